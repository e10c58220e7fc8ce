//! Core engine of the surveillance rover: imaging primitives, the
//! four-frame motion detector and alarm, colour-quadrant tracking, the
//! simulated rover with its serial packet codec, and the framed
//! client/control-centre protocol.
//!
//! Everything in this crate is a pure function of its inputs or a value
//! that evolves by replacement; the networked service lives elsewhere.

pub mod imaging;
pub mod motion;
pub mod protocol;
pub mod rover;
pub mod tracker;

pub use imaging::{Frame, PixelFormat, Scene, SceneObject};
pub use motion::{AlarmPhase, AlarmState, DetectorConfig, MotionMask};
pub use protocol::{ControlMessage, Mode};
pub use rover::{AuxCommand, Command, DriveCommand, RoverState};
pub use tracker::{ColorReference, QuadrantReport, TrackerConfig};
