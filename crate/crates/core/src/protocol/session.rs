//! Per-connection session state machine and the mode switch rules.

use thiserror::Error;

use super::{AuxRequest, ControlMessage, MessageKind, Mode};
use crate::motion::AlarmPhase;
use crate::rover::{Command, DriveCommand};
use crate::tracker::ColorReference;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SessionPhase {
    AwaitHello,
    Ready,
    Closed,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SessionState {
    pub phase: SessionPhase,
    pub authenticated: bool,
    pub negotiated_mode: Mode,
}

impl Default for SessionState {
    fn default() -> Self {
        SessionState {
            phase: SessionPhase::AwaitHello,
            authenticated: false,
            negotiated_mode: Mode::PcControl,
        }
    }
}

/// Work a session asks the control centre to perform.
#[derive(Debug, Clone, PartialEq)]
pub enum Action {
    Rover(Command),
    ModeChange(Mode),
    Snapshot,
    Disarm(String),
    SetColorRef(ColorReference),
    Record(bool),
    /// Teardown when leaving motion detection.
    StopMonitoring,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SessionError {
    #[error("authentication failed")]
    Auth,
    #[error("{kind} not allowed in phase {phase:?}")]
    PhaseViolation { phase: SessionPhase, kind: MessageKind },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SessionStep {
    pub state: SessionState,
    pub outgoing: Vec<ControlMessage>,
    pub actions: Vec<Action>,
    pub error: Option<SessionError>,
}

fn secrets_match(a: &str, b: &str) -> bool {
    let (a, b) = (a.as_bytes(), b.as_bytes());
    if a.len() != b.len() {
        return false;
    }
    a.iter().zip(b).fold(0u8, |acc, (x, y)| acc | (x ^ y)) == 0
}

/// Advances one session by one incoming message.
pub fn session_step(s: &SessionState, incoming: &ControlMessage, shared_secret: &str) -> SessionStep {
    let mut step = SessionStep {
        state: s.clone(),
        outgoing: Vec::new(),
        actions: Vec::new(),
        error: None,
    };
    let violation = |step: &mut SessionStep, reply: Option<ControlMessage>| {
        step.error = Some(SessionError::PhaseViolation {
            phase: s.phase,
            kind: incoming.kind(),
        });
        step.state.phase = SessionPhase::Closed;
        step.outgoing.extend(reply);
    };

    match s.phase {
        SessionPhase::Closed => {}
        SessionPhase::AwaitHello => match incoming {
            ControlMessage::Hello { secret } if secrets_match(secret, shared_secret) => {
                step.state.phase = SessionPhase::Ready;
                step.state.authenticated = true;
                step.outgoing.push(ControlMessage::HelloOk);
            }
            ControlMessage::Hello { .. } => {
                step.state.phase = SessionPhase::Closed;
                step.error = Some(SessionError::Auth);
                step.outgoing.push(ControlMessage::HelloErr { reason: "auth".into() });
            }
            _ => violation(
                &mut step,
                Some(ControlMessage::HelloErr {
                    reason: "protocol".into(),
                }),
            ),
        },
        SessionPhase::Ready => match incoming {
            ControlMessage::Drive(d) => step.actions.push(Action::Rover(Command::Drive(*d))),
            ControlMessage::Aux(AuxRequest::Rover(a)) => step.actions.push(Action::Rover(Command::Aux(*a))),
            ControlMessage::Aux(AuxRequest::RecordStart) => step.actions.push(Action::Record(true)),
            ControlMessage::Aux(AuxRequest::RecordStop) => step.actions.push(Action::Record(false)),
            ControlMessage::ModeSet(m) => step.actions.push(Action::ModeChange(*m)),
            ControlMessage::SnapshotReq => step.actions.push(Action::Snapshot),
            ControlMessage::SetColorRef { rgb, tolerance } => step
                .actions
                .push(Action::SetColorRef(ColorReference::new(*rgb, *tolerance as u32))),
            ControlMessage::Disarm { password } => step.actions.push(Action::Disarm(password.clone())),
            ControlMessage::Ping => step.outgoing.push(ControlMessage::Pong),
            ControlMessage::Bye => step.state.phase = SessionPhase::Closed,
            _ => violation(&mut step, Some(ControlMessage::Bye)),
        },
    }
    step
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("mode locked: {reason}")]
pub struct ModeLocked {
    pub reason: String,
}

/// Switches the active mode, returning the teardown actions for the mode
/// being left. Leaving motion detection while the alarm is raised is
/// refused until a successful disarm.
pub fn mode_transition(current: Mode, requested: Mode, alarm: AlarmPhase) -> Result<(Mode, Vec<Action>), ModeLocked> {
    if current == requested {
        return Ok((current, Vec::new()));
    }
    let teardown = match current {
        Mode::MotionDetection => {
            if alarm == AlarmPhase::Alarm {
                return Err(ModeLocked {
                    reason: "alarm raised; disarm with the password first".into(),
                });
            }
            vec![Action::StopMonitoring]
        }
        Mode::PcControl | Mode::InternetControl | Mode::Tracing => {
            vec![Action::Rover(Command::Drive(DriveCommand::Stop))]
        }
    };
    Ok((requested, teardown))
}
