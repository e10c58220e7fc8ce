//! Client ↔ control-centre wire protocol.
//!
//! Every message is framed as a big-endian `u32` payload length, a `u8`
//! type tag and the payload. The same frames travel over raw TCP and as
//! binary WebSocket messages.

mod codec;
mod session;

pub use codec::{decode_message, encode_message, Decoded, MessageDecoder, MAX_PAYLOAD};
pub use session::{
    mode_transition, session_step, Action, ModeLocked, SessionError, SessionPhase, SessionState, SessionStep,
};

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::imaging::{Frame, ImagingError, PixelFormat};
use crate::rover::{AuxCommand, DriveCommand};

pub const DEFAULT_PORT: u16 = 8640;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProtocolError {
    #[error("unknown message tag {0:#04x}")]
    UnknownTag(u8),
    #[error("declared payload length {0} exceeds the 16 MiB limit")]
    TooLarge(u32),
    #[error("malformed {kind} payload: {reason}")]
    Malformed { kind: MessageKind, reason: String },
}

/// The four mutually exclusive operating modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Mode {
    PcControl,
    InternetControl,
    Tracing,
    MotionDetection,
}

impl Mode {
    pub const ALL: [Mode; 4] = [
        Mode::PcControl,
        Mode::InternetControl,
        Mode::Tracing,
        Mode::MotionDetection,
    ];

    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(code: u8) -> Option<Mode> {
        Mode::ALL.get(code as usize).copied()
    }

    /// Modes in which something other than the operator may be driving.
    pub fn drives_rover(self) -> bool {
        !matches!(self, Mode::MotionDetection)
    }

    /// Modes that accept DRIVE messages from a session.
    pub fn accepts_manual_drive(self) -> bool {
        matches!(self, Mode::PcControl | Mode::InternetControl)
    }

    pub fn name(self) -> &'static str {
        match self {
            Mode::PcControl => "PcControl",
            Mode::InternetControl => "InternetControl",
            Mode::Tracing => "Tracing",
            Mode::MotionDetection => "MotionDetection",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Mode::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown mode {s:?}"))
    }
}

/// AUX payload: a platform toggle, or a centre-local recording control that
/// never reaches the serial link.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AuxRequest {
    Rover(AuxCommand),
    RecordStart,
    RecordStop,
}

impl AuxRequest {
    pub const RECORD_START: u8 = 0x20;
    pub const RECORD_STOP: u8 = 0x21;

    pub fn code(self) -> u8 {
        match self {
            AuxRequest::Rover(a) => a.code(),
            AuxRequest::RecordStart => Self::RECORD_START,
            AuxRequest::RecordStop => Self::RECORD_STOP,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            Self::RECORD_START => Some(AuxRequest::RecordStart),
            Self::RECORD_STOP => Some(AuxRequest::RecordStop),
            c => AuxCommand::from_code(c).map(AuxRequest::Rover),
        }
    }
}

impl From<AuxCommand> for AuxRequest {
    fn from(a: AuxCommand) -> Self {
        AuxRequest::Rover(a)
    }
}

/// Raw image carried by FRAME and SNAPSHOT: `u32 width, u32 height,
/// u8 format, u32 seq` (big-endian) followed by the pixels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FramePayload {
    pub width: u32,
    pub height: u32,
    pub format: PixelFormat,
    pub seq: u32,
    pub data: Vec<u8>,
}

impl FramePayload {
    pub const HEADER_LEN: usize = 13;

    pub fn from_frame(f: &Frame) -> Self {
        FramePayload {
            width: f.width(),
            height: f.height(),
            format: f.format(),
            seq: f.seq as u32,
            data: f.data().to_vec(),
        }
    }

    pub fn to_frame(&self) -> Result<Frame, ImagingError> {
        Ok(Frame::new(self.width, self.height, self.format, self.data.clone())?.with_meta(self.seq as u64, 0))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ControlMessage {
    Hello {
        secret: String,
    },
    HelloOk,
    HelloErr {
        reason: String,
    },
    Drive(DriveCommand),
    Aux(AuxRequest),
    ModeSet(Mode),
    /// Carries the mode that is active after the request was handled.
    ModeOk(Mode),
    Frame(FramePayload),
    SnapshotReq,
    Snapshot(FramePayload),
    SetColorRef {
        rgb: [u8; 3],
        tolerance: u8,
    },
    /// Seq of the frame on which the alarm was raised.
    AlarmEvent {
        seq: u32,
    },
    Disarm {
        password: String,
    },
    DisarmResult {
        ok: bool,
    },
    Ping,
    Pong,
    Bye,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MessageKind {
    Hello = 0x01,
    HelloOk = 0x02,
    HelloErr = 0x03,
    Drive = 0x04,
    Aux = 0x05,
    ModeSet = 0x06,
    ModeOk = 0x07,
    Frame = 0x08,
    SnapshotReq = 0x09,
    Snapshot = 0x0A,
    SetColorRef = 0x0B,
    AlarmEvent = 0x0C,
    Disarm = 0x0D,
    Ping = 0x0E,
    Pong = 0x0F,
    DisarmResult = 0x10,
    Bye = 0x11,
}

impl MessageKind {
    pub const ALL: [MessageKind; 17] = [
        MessageKind::Hello,
        MessageKind::HelloOk,
        MessageKind::HelloErr,
        MessageKind::Drive,
        MessageKind::Aux,
        MessageKind::ModeSet,
        MessageKind::ModeOk,
        MessageKind::Frame,
        MessageKind::SnapshotReq,
        MessageKind::Snapshot,
        MessageKind::SetColorRef,
        MessageKind::AlarmEvent,
        MessageKind::Disarm,
        MessageKind::Ping,
        MessageKind::Pong,
        MessageKind::DisarmResult,
        MessageKind::Bye,
    ];

    pub fn tag(self) -> u8 {
        self as u8
    }

    pub fn from_tag(tag: u8) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.tag() == tag)
    }
}

impl fmt::Display for MessageKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            MessageKind::Hello => "HELLO",
            MessageKind::HelloOk => "HELLO_OK",
            MessageKind::HelloErr => "HELLO_ERR",
            MessageKind::Drive => "DRIVE",
            MessageKind::Aux => "AUX",
            MessageKind::ModeSet => "MODE_SET",
            MessageKind::ModeOk => "MODE_OK",
            MessageKind::Frame => "FRAME",
            MessageKind::SnapshotReq => "SNAPSHOT_REQ",
            MessageKind::Snapshot => "SNAPSHOT",
            MessageKind::SetColorRef => "SET_COLOR_REF",
            MessageKind::AlarmEvent => "ALARM_EVENT",
            MessageKind::Disarm => "DISARM",
            MessageKind::Ping => "PING",
            MessageKind::Pong => "PONG",
            MessageKind::DisarmResult => "DISARM_RESULT",
            MessageKind::Bye => "BYE",
        };
        f.write_str(name)
    }
}

impl ControlMessage {
    pub fn kind(&self) -> MessageKind {
        match self {
            ControlMessage::Hello { .. } => MessageKind::Hello,
            ControlMessage::HelloOk => MessageKind::HelloOk,
            ControlMessage::HelloErr { .. } => MessageKind::HelloErr,
            ControlMessage::Drive(_) => MessageKind::Drive,
            ControlMessage::Aux(_) => MessageKind::Aux,
            ControlMessage::ModeSet(_) => MessageKind::ModeSet,
            ControlMessage::ModeOk(_) => MessageKind::ModeOk,
            ControlMessage::Frame(_) => MessageKind::Frame,
            ControlMessage::SnapshotReq => MessageKind::SnapshotReq,
            ControlMessage::Snapshot(_) => MessageKind::Snapshot,
            ControlMessage::SetColorRef { .. } => MessageKind::SetColorRef,
            ControlMessage::AlarmEvent { .. } => MessageKind::AlarmEvent,
            ControlMessage::Disarm { .. } => MessageKind::Disarm,
            ControlMessage::DisarmResult { .. } => MessageKind::DisarmResult,
            ControlMessage::Ping => MessageKind::Ping,
            ControlMessage::Pong => MessageKind::Pong,
            ControlMessage::Bye => MessageKind::Bye,
        }
    }
}
