//! Control centre for the surveillance rover: the network service, the
//! frame loop for the four operating modes, and headless batch tools.

pub mod analyze;
pub mod config;
pub mod dataset;
pub mod engine;
pub mod report;
pub mod rover_link;
pub mod server;
pub mod trace;

pub use config::{CentreConfig, ConfigError, FrameSourceConfig};
pub use engine::{Centre, FrameSource, Outgoing, SessionId};
pub use report::{FrameRecord, RunReport};
pub use rover_link::{LocalRover, RoverLink};
pub use server::{start, ServerHandle, ServerOptions};
