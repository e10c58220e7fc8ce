//! The rover end of the serial link and the centre's view of it.

use vmd_core::rover::{decode_packet, PacketError, PACKET_LEN};
use vmd_core::rover::{Command, RoverState};

/// Where the centre sends encoded packets and reads the platform state from.
pub trait RoverLink {
    fn transmit(&mut self, packet: [u8; PACKET_LEN], now_ms: u64);
    fn state(&self) -> RoverState;
}

/// Simulated platform: decodes packets, latches commands, integrates the
/// pose and applies the watchdog.
#[derive(Debug, Clone)]
pub struct LocalRover {
    state: RoverState,
    watchdog_timeout_ms: u64,
    last_advance_ms: u64,
    received: Vec<Command>,
    rejected: Vec<PacketError>,
}

impl LocalRover {
    pub fn new(state: RoverState, watchdog_timeout_ms: u64) -> Self {
        LocalRover {
            state,
            watchdog_timeout_ms,
            last_advance_ms: 0,
            received: Vec::new(),
            rejected: Vec::new(),
        }
    }

    /// Decodes one packet and applies it. Corrupt packets are counted and
    /// otherwise ignored.
    pub fn receive(&mut self, bytes: &[u8], now_ms: u64) -> Result<Command, PacketError> {
        match decode_packet(bytes) {
            Ok(cmd) => {
                self.state = self.state.apply_command(cmd, now_ms);
                self.received.push(cmd);
                Ok(cmd)
            }
            Err(e) => {
                self.rejected.push(e);
                Err(e)
            }
        }
    }

    /// Watchdog check, then motion up to `now_ms`.
    pub fn advance(&mut self, now_ms: u64) {
        self.state = self.state.watchdog(now_ms, self.watchdog_timeout_ms);
        if now_ms > self.last_advance_ms {
            let dt = (now_ms - self.last_advance_ms) as f64 / 1000.0;
            if let Ok(next) = self.state.step(dt) {
                self.state = next;
            }
        }
        self.last_advance_ms = self.last_advance_ms.max(now_ms);
    }

    pub fn state(&self) -> &RoverState {
        &self.state
    }

    /// Every command that decoded successfully, in arrival order.
    pub fn received(&self) -> &[Command] {
        &self.received
    }

    pub fn rejected(&self) -> &[PacketError] {
        &self.rejected
    }
}

impl RoverLink for LocalRover {
    fn transmit(&mut self, packet: [u8; PACKET_LEN], now_ms: u64) {
        let _ = self.receive(&packet, now_ms);
    }

    fn state(&self) -> RoverState {
        self.state.clone()
    }
}
