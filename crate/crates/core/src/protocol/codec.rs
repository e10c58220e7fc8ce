use super::{AuxRequest, ControlMessage, FramePayload, MessageKind, Mode, ProtocolError};
use crate::imaging::PixelFormat;
use crate::rover::DriveCommand;

/// Largest accepted payload.
pub const MAX_PAYLOAD: u32 = 16 * 1024 * 1024;
const PREFIX_LEN: usize = 5;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Decoded {
    NeedMore,
    Message(ControlMessage, usize),
}

fn put_frame(out: &mut Vec<u8>, p: &FramePayload) {
    out.extend_from_slice(&p.width.to_be_bytes());
    out.extend_from_slice(&p.height.to_be_bytes());
    out.push(p.format.tag());
    out.extend_from_slice(&p.seq.to_be_bytes());
    out.extend_from_slice(&p.data);
}

fn payload_bytes(m: &ControlMessage) -> Vec<u8> {
    let mut out = Vec::new();
    match m {
        ControlMessage::Hello { secret } => out.extend_from_slice(secret.as_bytes()),
        ControlMessage::HelloErr { reason } => out.extend_from_slice(reason.as_bytes()),
        ControlMessage::Disarm { password } => out.extend_from_slice(password.as_bytes()),
        ControlMessage::Drive(d) => out.push(d.code()),
        ControlMessage::Aux(a) => out.push(a.code()),
        ControlMessage::ModeSet(mode) | ControlMessage::ModeOk(mode) => out.push(mode.code()),
        ControlMessage::Frame(p) | ControlMessage::Snapshot(p) => put_frame(&mut out, p),
        ControlMessage::SetColorRef { rgb, tolerance } => {
            out.extend_from_slice(rgb);
            out.push(*tolerance);
        }
        ControlMessage::AlarmEvent { seq } => out.extend_from_slice(&seq.to_be_bytes()),
        ControlMessage::DisarmResult { ok } => out.push(u8::from(*ok)),
        ControlMessage::HelloOk
        | ControlMessage::SnapshotReq
        | ControlMessage::Ping
        | ControlMessage::Pong
        | ControlMessage::Bye => {}
    }
    out
}

pub fn encode_message(m: &ControlMessage) -> Vec<u8> {
    let payload = payload_bytes(m);
    let mut out = Vec::with_capacity(PREFIX_LEN + payload.len());
    out.extend_from_slice(&(payload.len() as u32).to_be_bytes());
    out.push(m.kind().tag());
    out.extend_from_slice(&payload);
    out
}

fn malformed(kind: MessageKind, reason: impl Into<String>) -> ProtocolError {
    ProtocolError::Malformed {
        kind,
        reason: reason.into(),
    }
}

fn exact<const N: usize>(kind: MessageKind, p: &[u8]) -> Result<[u8; N], ProtocolError> {
    p.try_into()
        .map_err(|_| malformed(kind, format!("expected {N} bytes, got {}", p.len())))
}

fn text(kind: MessageKind, p: &[u8]) -> Result<String, ProtocolError> {
    String::from_utf8(p.to_vec()).map_err(|_| malformed(kind, "payload is not UTF-8"))
}

fn frame(kind: MessageKind, p: &[u8]) -> Result<FramePayload, ProtocolError> {
    if p.len() < FramePayload::HEADER_LEN {
        return Err(malformed(kind, "shorter than the 13-byte frame header"));
    }
    let be32 = |at: usize| u32::from_be_bytes(p[at..at + 4].try_into().unwrap());
    let (width, height) = (be32(0), be32(4));
    let format = PixelFormat::from_tag(p[8]).ok_or_else(|| malformed(kind, format!("pixel format {}", p[8])))?;
    let seq = be32(9);
    let data = &p[FramePayload::HEADER_LEN..];
    let expected = width as u64 * height as u64 * format.channels() as u64;
    if width == 0 || height == 0 || data.len() as u64 != expected {
        return Err(malformed(
            kind,
            format!("{width}x{height} {format} needs {expected} bytes, got {}", data.len()),
        ));
    }
    Ok(FramePayload {
        width,
        height,
        format,
        seq,
        data: data.to_vec(),
    })
}

fn empty(kind: MessageKind, p: &[u8]) -> Result<(), ProtocolError> {
    if p.is_empty() {
        Ok(())
    } else {
        Err(malformed(
            kind,
            format!("expected empty payload, got {} bytes", p.len()),
        ))
    }
}

fn parse_payload(kind: MessageKind, p: &[u8]) -> Result<ControlMessage, ProtocolError> {
    use ControlMessage as M;
    Ok(match kind {
        MessageKind::Hello => M::Hello { secret: text(kind, p)? },
        MessageKind::HelloOk => empty(kind, p).map(|_| M::HelloOk)?,
        MessageKind::HelloErr => M::HelloErr { reason: text(kind, p)? },
        MessageKind::Drive => {
            let [c] = exact(kind, p)?;
            M::Drive(DriveCommand::from_code(c).ok_or_else(|| malformed(kind, format!("drive code {c:#04x}")))?)
        }
        MessageKind::Aux => {
            let [c] = exact(kind, p)?;
            M::Aux(AuxRequest::from_code(c).ok_or_else(|| malformed(kind, format!("aux code {c:#04x}")))?)
        }
        MessageKind::ModeSet | MessageKind::ModeOk => {
            let [c] = exact(kind, p)?;
            let mode = Mode::from_code(c).ok_or_else(|| malformed(kind, format!("mode {c}")))?;
            if kind == MessageKind::ModeSet {
                M::ModeSet(mode)
            } else {
                M::ModeOk(mode)
            }
        }
        MessageKind::Frame => M::Frame(frame(kind, p)?),
        MessageKind::SnapshotReq => empty(kind, p).map(|_| M::SnapshotReq)?,
        MessageKind::Snapshot => M::Snapshot(frame(kind, p)?),
        MessageKind::SetColorRef => {
            let [r, g, b, tolerance] = exact(kind, p)?;
            M::SetColorRef {
                rgb: [r, g, b],
                tolerance,
            }
        }
        MessageKind::AlarmEvent => M::AlarmEvent {
            seq: u32::from_be_bytes(exact(kind, p)?),
        },
        MessageKind::Disarm => M::Disarm {
            password: text(kind, p)?,
        },
        MessageKind::DisarmResult => match exact(kind, p)? {
            [0] => M::DisarmResult { ok: false },
            [1] => M::DisarmResult { ok: true },
            [v] => return Err(malformed(kind, format!("result byte {v}"))),
        },
        MessageKind::Ping => empty(kind, p).map(|_| M::Ping)?,
        MessageKind::Pong => empty(kind, p).map(|_| M::Pong)?,
        MessageKind::Bye => empty(kind, p).map(|_| M::Bye)?,
    })
}

/// Decodes one message from the front of `buf`.
///
/// Oversized lengths and unknown tags are reported as soon as the prefix
/// bytes that reveal them have arrived.
pub fn decode_message(buf: &[u8]) -> Result<Decoded, ProtocolError> {
    if buf.len() < 4 {
        return Ok(Decoded::NeedMore);
    }
    let len = u32::from_be_bytes(buf[..4].try_into().unwrap());
    if len > MAX_PAYLOAD {
        return Err(ProtocolError::TooLarge(len));
    }
    let Some(&tag) = buf.get(4) else {
        return Ok(Decoded::NeedMore);
    };
    let kind = MessageKind::from_tag(tag).ok_or(ProtocolError::UnknownTag(tag))?;
    let end = PREFIX_LEN + len as usize;
    if buf.len() < end {
        return Ok(Decoded::NeedMore);
    }
    let msg = parse_payload(kind, &buf[PREFIX_LEN..end])?;
    Ok(Decoded::Message(msg, end))
}

/// Incremental decoder over an arbitrary byte stream.
#[derive(Debug, Default)]
pub struct MessageDecoder {
    buf: Vec<u8>,
}

impl MessageDecoder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn feed(&mut self, bytes: &[u8]) {
        self.buf.extend_from_slice(bytes);
    }

    /// Next complete message, `Ok(None)` when more bytes are needed.
    pub fn next_message(&mut self) -> Result<Option<ControlMessage>, ProtocolError> {
        match decode_message(&self.buf)? {
            Decoded::NeedMore => Ok(None),
            Decoded::Message(m, used) => {
                self.buf.drain(..used);
                Ok(Some(m))
            }
        }
    }

    pub fn buffered(&self) -> usize {
        self.buf.len()
    }
}
