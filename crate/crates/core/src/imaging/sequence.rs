//! `SRSEQ1` raw frame container.
//!
//! Layout (all integers little-endian):
//! `"SRSEQ1"`, u32 width, u32 height, u8 format (0 = GRAY8, 1 = RGB24),
//! u32 frame count, then per frame u64 timestamp_ms, u64 seq and the pixel
//! payload.

use super::{Frame, ImagingError, PixelFormat, Result};

pub const SEQUENCE_MAGIC: &[u8; 6] = b"SRSEQ1";
const HEADER_LEN: usize = 6 + 4 + 4 + 1 + 4;

/// Frames with uniform shape and strictly increasing `seq`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameSequence {
    frames: Vec<Frame>,
}

impl FrameSequence {
    pub fn new(frames: Vec<Frame>) -> Result<Self> {
        for (i, pair) in frames.windows(2).enumerate() {
            let (a, b) = (&pair[0], &pair[1]);
            if !a.same_shape(b) {
                return Err(ImagingError::Sequence {
                    frame: Some(i + 1),
                    reason: "frame shape differs from the first frame".into(),
                });
            }
            if b.seq <= a.seq {
                return Err(ImagingError::Sequence {
                    frame: Some(i + 1),
                    reason: format!("seq {} does not increase past {}", b.seq, a.seq),
                });
            }
            if b.timestamp_ms < a.timestamp_ms {
                return Err(ImagingError::Sequence {
                    frame: Some(i + 1),
                    reason: "timestamp goes backwards".into(),
                });
            }
        }
        Ok(FrameSequence { frames })
    }

    pub fn frames(&self) -> &[Frame] {
        &self.frames
    }

    pub fn into_frames(self) -> Vec<Frame> {
        self.frames
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }
}

/// Encodes a sequence. An empty sequence is written as a 1x1 GRAY8 header.
pub fn write_sequence(seq: &FrameSequence) -> Vec<u8> {
    let (w, h, fmt) = seq
        .frames
        .first()
        .map(|f| (f.width(), f.height(), f.format()))
        .unwrap_or((1, 1, PixelFormat::Gray8));
    let payload: usize = seq.frames.iter().map(|f| 16 + f.data().len()).sum();
    let mut out = Vec::with_capacity(HEADER_LEN + payload);
    out.extend_from_slice(SEQUENCE_MAGIC);
    out.extend_from_slice(&w.to_le_bytes());
    out.extend_from_slice(&h.to_le_bytes());
    out.push(fmt.tag());
    out.extend_from_slice(&(seq.frames.len() as u32).to_le_bytes());
    for f in &seq.frames {
        out.extend_from_slice(&f.timestamp_ms.to_le_bytes());
        out.extend_from_slice(&f.seq.to_le_bytes());
        out.extend_from_slice(f.data());
    }
    out
}

fn header_err(reason: &str) -> ImagingError {
    ImagingError::Sequence {
        frame: None,
        reason: reason.into(),
    }
}

pub fn read_sequence(bytes: &[u8]) -> Result<FrameSequence> {
    if bytes.len() < HEADER_LEN {
        return Err(header_err("file shorter than the SRSEQ1 header"));
    }
    if &bytes[..6] != SEQUENCE_MAGIC {
        return Err(header_err("bad magic, expected SRSEQ1"));
    }
    let u32_at = |at: usize| u32::from_le_bytes(bytes[at..at + 4].try_into().unwrap());
    let width = u32_at(6);
    let height = u32_at(10);
    let format = PixelFormat::from_tag(bytes[14]).ok_or_else(|| header_err("unknown pixel format tag"))?;
    let count = u32_at(15) as usize;
    if width == 0 || height == 0 {
        return Err(header_err("zero frame dimension"));
    }
    let frame_len = (width as usize)
        .checked_mul(height as usize)
        .and_then(|n| n.checked_mul(format.channels()))
        .ok_or_else(|| header_err("frame dimensions overflow"))?;

    let mut frames = Vec::with_capacity(count.min(bytes.len() / (frame_len + 16).max(1) + 1));
    let mut pos = HEADER_LEN;
    for index in 0..count {
        let end = pos + 16 + frame_len;
        if bytes.len() < end {
            return Err(ImagingError::Sequence {
                frame: Some(index),
                reason: format!("truncated: need {} bytes, {} remain", 16 + frame_len, bytes.len() - pos),
            });
        }
        let timestamp_ms = u64::from_le_bytes(bytes[pos..pos + 8].try_into().unwrap());
        let seq = u64::from_le_bytes(bytes[pos + 8..pos + 16].try_into().unwrap());
        let frame = Frame::new(width, height, format, bytes[pos + 16..end].to_vec())
            .map_err(|e| ImagingError::Sequence {
                frame: Some(index),
                reason: e.to_string(),
            })?
            .with_meta(seq, timestamp_ms);
        frames.push(frame);
        pos = end;
    }
    if pos != bytes.len() {
        return Err(ImagingError::Sequence {
            frame: Some(count),
            reason: format!("{} trailing bytes after the last frame", bytes.len() - pos),
        });
    }
    FrameSequence::new(frames)
}
