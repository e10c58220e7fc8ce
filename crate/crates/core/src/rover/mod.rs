//! Simulated mobile platform: command set, kinematics and the stale-command
//! watchdog.

mod packet;

pub use packet::{decode_packet, encode_packet, PacketError, SerialLink, PACKET_LEN, SYNC};

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Linear speed in m/s.
pub const LINEAR_SPEED: f64 = 0.5;
/// Turn rate in rad/s.
pub const TURN_RATE: f64 = 1.0;
pub const DEFAULT_WATCHDOG_TIMEOUT_MS: u64 = 2000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RoverError {
    #[error("time step must be positive, got {0}")]
    InvalidTimeStep(f64),
    #[error("unknown command name {0:?}")]
    UnknownName(String),
}

/// The seven-way direction pad.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DriveCommand {
    Forward,
    Backward,
    Left,
    Right,
    ForwardLeft,
    ForwardRight,
    Stop,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AuxCommand {
    LightsOn,
    LightsOff,
    NightVisionOn,
    NightVisionOff,
    CameraStart,
    CameraStop,
}

impl DriveCommand {
    pub const ALL: [DriveCommand; 7] = [
        DriveCommand::Forward,
        DriveCommand::Backward,
        DriveCommand::Left,
        DriveCommand::Right,
        DriveCommand::ForwardLeft,
        DriveCommand::ForwardRight,
        DriveCommand::Stop,
    ];

    pub fn code(self) -> u8 {
        match self {
            DriveCommand::Forward => 0x01,
            DriveCommand::Backward => 0x02,
            DriveCommand::Left => 0x03,
            DriveCommand::Right => 0x04,
            DriveCommand::ForwardLeft => 0x05,
            DriveCommand::ForwardRight => 0x06,
            DriveCommand::Stop => 0x07,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.code() == code)
    }

    pub fn name(self) -> &'static str {
        match self {
            DriveCommand::Forward => "Forward",
            DriveCommand::Backward => "Backward",
            DriveCommand::Left => "Left",
            DriveCommand::Right => "Right",
            DriveCommand::ForwardLeft => "ForwardLeft",
            DriveCommand::ForwardRight => "ForwardRight",
            DriveCommand::Stop => "Stop",
        }
    }
}

impl AuxCommand {
    pub const ALL: [AuxCommand; 6] = [
        AuxCommand::LightsOn,
        AuxCommand::LightsOff,
        AuxCommand::NightVisionOn,
        AuxCommand::NightVisionOff,
        AuxCommand::CameraStart,
        AuxCommand::CameraStop,
    ];

    pub fn code(self) -> u8 {
        match self {
            AuxCommand::LightsOn => 0x10,
            AuxCommand::LightsOff => 0x11,
            AuxCommand::NightVisionOn => 0x12,
            AuxCommand::NightVisionOff => 0x13,
            AuxCommand::CameraStart => 0x14,
            AuxCommand::CameraStop => 0x15,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.code() == code)
    }

    pub fn name(self) -> &'static str {
        match self {
            AuxCommand::LightsOn => "LightsOn",
            AuxCommand::LightsOff => "LightsOff",
            AuxCommand::NightVisionOn => "NightVisionOn",
            AuxCommand::NightVisionOff => "NightVisionOff",
            AuxCommand::CameraStart => "CameraStart",
            AuxCommand::CameraStop => "CameraStop",
        }
    }
}

impl fmt::Display for DriveCommand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl fmt::Display for AuxCommand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DriveCommand {
    type Err = RoverError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|c| c.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| RoverError::UnknownName(s.to_string()))
    }
}

/// Anything the platform's microcontroller understands.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Command {
    Drive(DriveCommand),
    Aux(AuxCommand),
}

impl Command {
    pub fn code(self) -> u8 {
        match self {
            Command::Drive(d) => d.code(),
            Command::Aux(a) => a.code(),
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        DriveCommand::from_code(code)
            .map(Command::Drive)
            .or_else(|| AuxCommand::from_code(code).map(Command::Aux))
    }

    pub fn all() -> impl Iterator<Item = Command> {
        DriveCommand::ALL
            .into_iter()
            .map(Command::Drive)
            .chain(AuxCommand::ALL.into_iter().map(Command::Aux))
    }
}

impl From<DriveCommand> for Command {
    fn from(d: DriveCommand) -> Self {
        Command::Drive(d)
    }
}

impl From<AuxCommand> for Command {
    fn from(a: AuxCommand) -> Self {
        Command::Aux(a)
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Command::Drive(d) => d.fmt(f),
            Command::Aux(a) => a.fmt(f),
        }
    }
}

/// Wraps an angle into (-π, π].
pub fn normalize_angle(a: f64) -> f64 {
    let r = a.rem_euclid(2.0 * PI);
    if r > PI {
        r - 2.0 * PI
    } else {
        r
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoverState {
    pub x: f64,
    pub y: f64,
    /// Radians, counter-clockwise from +x, in (-π, π].
    pub heading: f64,
    pub lights: bool,
    pub night_vision: bool,
    pub camera_on: bool,
    pub active_drive: DriveCommand,
    pub last_command_ms: u64,
}

impl Default for RoverState {
    /// At the origin facing +x, stopped, camera powered.
    fn default() -> Self {
        RoverState {
            x: 0.0,
            y: 0.0,
            heading: 0.0,
            lights: false,
            night_vision: false,
            camera_on: true,
            active_drive: DriveCommand::Stop,
            last_command_ms: 0,
        }
    }
}

impl RoverState {
    /// Latches a drive command or sets an auxiliary flag. The pose only
    /// changes in [`RoverState::step`].
    pub fn apply_command(&self, cmd: Command, now_ms: u64) -> RoverState {
        let mut next = self.clone();
        match cmd {
            Command::Drive(d) => {
                next.active_drive = d;
                next.last_command_ms = now_ms;
            }
            Command::Aux(a) => match a {
                AuxCommand::LightsOn => next.lights = true,
                AuxCommand::LightsOff => next.lights = false,
                AuxCommand::NightVisionOn => next.night_vision = true,
                AuxCommand::NightVisionOff => next.night_vision = false,
                AuxCommand::CameraStart => next.camera_on = true,
                AuxCommand::CameraStop => next.camera_on = false,
            },
        }
        next
    }

    pub fn step(&self, dt: f64) -> Result<RoverState, RoverError> {
        if !dt.is_finite() || dt <= 0.0 {
            return Err(RoverError::InvalidTimeStep(dt));
        }
        let (linear, angular) = match self.active_drive {
            DriveCommand::Forward => (LINEAR_SPEED, 0.0),
            DriveCommand::Backward => (-LINEAR_SPEED, 0.0),
            DriveCommand::Left => (0.0, TURN_RATE),
            DriveCommand::Right => (0.0, -TURN_RATE),
            DriveCommand::ForwardLeft => (LINEAR_SPEED, TURN_RATE / 2.0),
            DriveCommand::ForwardRight => (LINEAR_SPEED, -TURN_RATE / 2.0),
            DriveCommand::Stop => return Ok(self.clone()),
        };
        let mut next = self.clone();
        next.x += linear * dt * self.heading.cos();
        next.y += linear * dt * self.heading.sin();
        next.heading = normalize_angle(self.heading + angular * dt);
        Ok(next)
    }

    /// Forces a stop when the latched drive command has gone stale.
    pub fn watchdog(&self, now_ms: u64, timeout_ms: u64) -> RoverState {
        if self.active_drive != DriveCommand::Stop && now_ms.saturating_sub(self.last_command_ms) > timeout_ms {
            RoverState {
                active_drive: DriveCommand::Stop,
                ..self.clone()
            }
        } else {
            self.clone()
        }
    }
}
