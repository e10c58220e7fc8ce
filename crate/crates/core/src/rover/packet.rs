//! Four-byte serial packets between the control centre and the platform.
//!
//! `[0xA5, command, argument, checksum]` where the checksum is the XOR of
//! the first three bytes and the argument byte is reserved (0x00).

use thiserror::Error;

use super::Command;

pub const SYNC: u8 = 0xA5;
pub const PACKET_LEN: usize = 4;

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum PacketError {
    #[error("packet must be {PACKET_LEN} bytes, got {0}")]
    Length(usize),
    #[error("bad sync byte {0:#04x}")]
    Sync(u8),
    #[error("checksum mismatch: computed {computed:#04x}, received {received:#04x}")]
    Checksum { computed: u8, received: u8 },
    #[error("unknown command byte {0:#04x}")]
    UnknownCommand(u8),
}

fn checksum(bytes: &[u8]) -> u8 {
    bytes.iter().fold(0, |acc, b| acc ^ b)
}

pub fn encode_packet(cmd: Command) -> [u8; PACKET_LEN] {
    let head = [SYNC, cmd.code(), 0x00];
    [head[0], head[1], head[2], checksum(&head)]
}

pub fn decode_packet(bytes: &[u8]) -> Result<Command, PacketError> {
    let [sync, code, arg, sum]: [u8; PACKET_LEN] = bytes.try_into().map_err(|_| PacketError::Length(bytes.len()))?;
    if sync != SYNC {
        return Err(PacketError::Sync(sync));
    }
    let computed = checksum(&[sync, code, arg]);
    if computed != sum {
        return Err(PacketError::Checksum {
            computed,
            received: sum,
        });
    }
    Command::from_code(code).ok_or(PacketError::UnknownCommand(code))
}

/// Centre-side transmitter that keeps a byte transcript of everything sent.
#[derive(Debug, Default, Clone)]
pub struct SerialLink {
    transcript: Vec<u8>,
}

impl SerialLink {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn transmit(&mut self, cmd: Command) -> [u8; PACKET_LEN] {
        let packet = encode_packet(cmd);
        self.transcript.extend_from_slice(&packet);
        packet
    }

    pub fn transcript(&self) -> &[u8] {
        &self.transcript
    }

    /// Decodes the whole transcript back into commands.
    pub fn replay(bytes: &[u8]) -> Result<Vec<Command>, PacketError> {
        if !bytes.len().is_multiple_of(PACKET_LEN) {
            return Err(PacketError::Length(bytes.len() % PACKET_LEN));
        }
        bytes.chunks_exact(PACKET_LEN).map(decode_packet).collect()
    }
}
