//! Motion detection: per-pixel differencing, the four-frame rule, a
//! running-average background baseline, erosion denoising and the alarm
//! latch used while monitoring.

mod alarm;
mod background;
mod four_frame;

pub use alarm::{AlarmEvent, AlarmPhase, AlarmState, DisarmRejection, PasswordDigest};
pub use background::BackgroundModel;
pub use four_frame::{four_frame_mask, DetectorConfig, FrameWindow, MotionDetector};

use thiserror::Error;

use crate::imaging::{Frame, ImagingError, PixelFormat};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MotionError {
    #[error("dimension mismatch: {0}x{1} vs {2}x{3}")]
    DimensionMismatch(u32, u32, u32, u32),
    #[error(transparent)]
    Imaging(#[from] ImagingError),
    #[error("frame window holds {0} of 4 frames")]
    NotReady(usize),
    #[error("frame seq {got} does not follow {last}")]
    OutOfOrder { last: u64, got: u64 },
    #[error("invalid detector config: {0}")]
    Config(String),
    #[error("alarm step called in phase {0:?}")]
    Phase(AlarmPhase),
}

pub type Result<T, E = MotionError> = std::result::Result<T, E>;

/// Binary per-pixel map, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MotionMask {
    width: u32,
    height: u32,
    bits: Vec<bool>,
}

impl MotionMask {
    pub fn zeros(width: u32, height: u32) -> Self {
        MotionMask {
            width,
            height,
            bits: vec![false; width as usize * height as usize],
        }
    }

    pub fn from_bits(width: u32, height: u32, bits: Vec<bool>) -> Result<Self> {
        if bits.len() != width as usize * height as usize {
            return Err(ImagingError::DataLength {
                expected: width as usize * height as usize,
                actual: bits.len(),
            }
            .into());
        }
        Ok(MotionMask { width, height, bits })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn get(&self, x: u32, y: u32) -> bool {
        self.bits[(y * self.width + x) as usize]
    }

    pub fn set(&mut self, x: u32, y: u32, value: bool) {
        self.bits[(y * self.width + x) as usize] = value;
    }

    pub fn popcount(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    pub fn is_subset_of(&self, other: &MotionMask) -> bool {
        self.bits.len() == other.bits.len() && self.bits.iter().zip(&other.bits).all(|(&a, &b)| !a || b)
    }

    fn zip_with(&self, other: &MotionMask, op: impl Fn(bool, bool) -> bool) -> MotionMask {
        MotionMask {
            width: self.width,
            height: self.height,
            bits: self.bits.iter().zip(&other.bits).map(|(&a, &b)| op(a, b)).collect(),
        }
    }

    pub fn and(&self, other: &MotionMask) -> MotionMask {
        self.zip_with(other, |a, b| a && b)
    }

    pub fn or(&self, other: &MotionMask) -> MotionMask {
        self.zip_with(other, |a, b| a || b)
    }

    pub fn flip_horizontal(&self) -> MotionMask {
        let w = self.width as usize;
        let bits = self
            .bits
            .chunks_exact(w)
            .flat_map(|row| row.iter().rev().copied())
            .collect();
        MotionMask { bits, ..*self }
    }

    /// Debug rendering as a GRAY8 frame (0 → 0, 1 → 255).
    pub fn to_frame(&self) -> Frame {
        let data = self.bits.iter().map(|&b| if b { 255 } else { 0 }).collect();
        Frame::new(self.width, self.height, PixelFormat::Gray8, data).expect("mask dimensions are valid")
    }
}

fn check_same_dims(a: &Frame, b: &Frame) -> Result<()> {
    if a.width() != b.width() || a.height() != b.height() {
        return Err(MotionError::DimensionMismatch(
            a.width(),
            a.height(),
            b.width(),
            b.height(),
        ));
    }
    Ok(())
}

/// `mask(p) = |a(p) - b(p)| > tau`.
pub fn frame_difference(a: &Frame, b: &Frame, tau: u8) -> Result<MotionMask> {
    a.expect_format(PixelFormat::Gray8)?;
    b.expect_format(PixelFormat::Gray8)?;
    check_same_dims(a, b)?;
    let bits = a
        .data()
        .iter()
        .zip(b.data())
        .map(|(&x, &y)| x.abs_diff(y) > tau)
        .collect();
    Ok(MotionMask {
        width: a.width(),
        height: a.height(),
        bits,
    })
}

/// 3x3 erosion; border pixels consider only their in-bounds neighbours.
pub fn denoise(m: &MotionMask) -> MotionMask {
    let (w, h) = (m.width as usize, m.height as usize);
    let mut bits = vec![false; w * h];
    for y in 0..h {
        let rows = y.saturating_sub(1)..=(y + 1).min(h - 1);
        for x in 0..w {
            let cols = x.saturating_sub(1)..=(x + 1).min(w - 1);
            bits[y * w + x] = rows.clone().all(|ny| cols.clone().all(|nx| m.bits[ny * w + nx]));
        }
    }
    MotionMask { bits, ..*m }
}

pub fn motion_ratio(m: &MotionMask) -> f64 {
    if m.bits.is_empty() {
        return 0.0;
    }
    m.popcount() as f64 / m.bits.len() as f64
}
