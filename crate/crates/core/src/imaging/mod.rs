//! Frames, image files, the simulated camera and synthetic test sequences.

mod pnm;
mod scene;
mod sequence;
mod synth;

pub use pnm::{read_pnm, write_pnm};
pub use scene::{parse_scene, render_scene, Scene, SceneObject, FOCAL_PX_PER_M, HALF_FOV_DEG};
pub use sequence::{read_sequence, write_sequence, FrameSequence, SEQUENCE_MAGIC};
pub use synth::{synth_motion_sequence, SquareMotion};

use std::fmt;

use thiserror::Error;

/// Default capture resolution of the simulated camera.
pub const DEFAULT_WIDTH: u32 = 320;
pub const DEFAULT_HEIGHT: u32 = 240;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ImagingError {
    #[error("invalid frame dimensions {width}x{height}")]
    InvalidDimensions { width: u32, height: u32 },
    #[error("pixel buffer holds {actual} bytes, expected {expected}")]
    DataLength { expected: usize, actual: usize },
    #[error("expected a {expected} frame, got {actual}")]
    FormatMismatch { expected: PixelFormat, actual: PixelFormat },
    #[error("pnm parse error at byte {offset}: {reason}")]
    Pnm { offset: usize, reason: String },
    #[error("sequence error{}: {reason}", frame.map(|i| format!(" at frame {i}")).unwrap_or_default())]
    Sequence { frame: Option<usize>, reason: String },
    #[error("scene error on line {line}: {reason}")]
    Scene { line: usize, reason: String },
    #[error("invalid parameter: {0}")]
    Parameter(String),
}

pub type Result<T, E = ImagingError> = std::result::Result<T, E>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PixelFormat {
    Gray8,
    Rgb24,
}

impl PixelFormat {
    pub fn channels(self) -> usize {
        match self {
            PixelFormat::Gray8 => 1,
            PixelFormat::Rgb24 => 3,
        }
    }

    /// Tag byte used by the sequence container and the FRAME payload.
    pub fn tag(self) -> u8 {
        match self {
            PixelFormat::Gray8 => 0,
            PixelFormat::Rgb24 => 1,
        }
    }

    pub fn from_tag(tag: u8) -> Option<Self> {
        match tag {
            0 => Some(PixelFormat::Gray8),
            1 => Some(PixelFormat::Rgb24),
            _ => None,
        }
    }
}

impl fmt::Display for PixelFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PixelFormat::Gray8 => "GRAY8",
            PixelFormat::Rgb24 => "RGB24",
        })
    }
}

/// One captured image. Pixel data is row-major and tightly packed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    width: u32,
    height: u32,
    format: PixelFormat,
    data: Vec<u8>,
    pub timestamp_ms: u64,
    pub seq: u64,
}

impl Frame {
    pub fn new(width: u32, height: u32, format: PixelFormat, data: Vec<u8>) -> Result<Self> {
        let expected = checked_len(width, height, format)?;
        if data.len() != expected {
            return Err(ImagingError::DataLength {
                expected,
                actual: data.len(),
            });
        }
        Ok(Frame {
            width,
            height,
            format,
            data,
            timestamp_ms: 0,
            seq: 0,
        })
    }

    /// A frame with every byte set to `value`.
    pub fn filled(width: u32, height: u32, format: PixelFormat, value: u8) -> Result<Self> {
        let len = checked_len(width, height, format)?;
        Frame::new(width, height, format, vec![value; len])
    }

    pub fn with_meta(mut self, seq: u64, timestamp_ms: u64) -> Self {
        self.seq = seq;
        self.timestamp_ms = timestamp_ms;
        self
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn format(&self) -> PixelFormat {
        self.format
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn into_data(self) -> Vec<u8> {
        self.data
    }

    pub fn pixel_count(&self) -> usize {
        self.width as usize * self.height as usize
    }

    pub fn same_shape(&self, other: &Frame) -> bool {
        self.width == other.width && self.height == other.height && self.format == other.format
    }

    /// Gray value at (x, y). Only meaningful for GRAY8 frames.
    pub fn gray_at(&self, x: u32, y: u32) -> u8 {
        self.data[(y * self.width + x) as usize]
    }

    pub fn rgb_at(&self, x: u32, y: u32) -> [u8; 3] {
        let i = (y * self.width + x) as usize * 3;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    pub fn expect_format(&self, format: PixelFormat) -> Result<()> {
        if self.format == format {
            Ok(())
        } else {
            Err(ImagingError::FormatMismatch {
                expected: format,
                actual: self.format,
            })
        }
    }
}

fn checked_len(width: u32, height: u32, format: PixelFormat) -> Result<usize> {
    if width == 0 || height == 0 {
        return Err(ImagingError::InvalidDimensions { width, height });
    }
    (width as usize)
        .checked_mul(height as usize)
        .and_then(|n| n.checked_mul(format.channels()))
        .ok_or(ImagingError::InvalidDimensions { width, height })
}

/// Integer BT.601 luma approximation.
#[inline]
pub fn luma(r: u8, g: u8, b: u8) -> u8 {
    ((77 * r as u32 + 150 * g as u32 + 29 * b as u32) >> 8) as u8
}

/// Converts an RGB24 frame to GRAY8, keeping dimensions, seq and timestamp.
pub fn to_gray(f: &Frame) -> Result<Frame> {
    f.expect_format(PixelFormat::Rgb24)?;
    let data = f.data.chunks_exact(3).map(|px| luma(px[0], px[1], px[2])).collect();
    Ok(Frame {
        width: f.width,
        height: f.height,
        format: PixelFormat::Gray8,
        data,
        timestamp_ms: f.timestamp_ms,
        seq: f.seq,
    })
}

/// GRAY8 view of any frame: gray frames pass through, RGB24 goes through
/// [`to_gray`].
pub fn into_gray(f: Frame) -> Result<Frame> {
    match f.format {
        PixelFormat::Gray8 => Ok(f),
        PixelFormat::Rgb24 => to_gray(&f),
    }
}

/// Expands a GRAY8 frame to RGB24 by channel replication.
pub fn gray_to_rgb(f: &Frame) -> Result<Frame> {
    f.expect_format(PixelFormat::Gray8)?;
    let data = f.data.iter().flat_map(|&v| [v, v, v]).collect();
    Ok(Frame {
        width: f.width,
        height: f.height,
        format: PixelFormat::Rgb24,
        data,
        timestamp_ms: f.timestamp_ms,
        seq: f.seq,
    })
}
