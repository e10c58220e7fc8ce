use super::{Frame, FrameSequence, ImagingError, PixelFormat, Result};

/// A uniform square translating at constant velocity over a flat
/// background. Frame `t` has the square's top-left corner at
/// `start + t * velocity`.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareMotion {
    pub width: u32,
    pub height: u32,
    pub side: u32,
    pub start: (i64, i64),
    pub velocity: (i64, i64),
    pub n_frames: usize,
    pub fg: u8,
    pub bg: u8,
    pub frame_interval_ms: u64,
}

impl SquareMotion {
    pub fn position(&self, t: usize) -> (i64, i64) {
        (
            self.start.0 + t as i64 * self.velocity.0,
            self.start.1 + t as i64 * self.velocity.1,
        )
    }

    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(ImagingError::InvalidDimensions {
                width: self.width,
                height: self.height,
            });
        }
        if self.side == 0 {
            return Err(ImagingError::Parameter("square side must be at least 1".into()));
        }
        let side = self.side as i64;
        for t in 0..self.n_frames {
            let (x, y) = self.position(t);
            if x < 0 || y < 0 || x + side > self.width as i64 || y + side > self.height as i64 {
                return Err(ImagingError::Parameter(format!(
                    "square leaves the {}x{} frame at frame {t} (top-left {x},{y})",
                    self.width, self.height
                )));
            }
        }
        Ok(())
    }
}

pub fn synth_motion_sequence(spec: &SquareMotion) -> Result<FrameSequence> {
    spec.validate()?;
    let w = spec.width as usize;
    let side = spec.side as usize;
    let frames = (0..spec.n_frames)
        .map(|t| {
            let mut data = vec![spec.bg; w * spec.height as usize];
            let (x, y) = spec.position(t);
            let (x, y) = (x as usize, y as usize);
            for row in data.chunks_exact_mut(w).skip(y).take(side) {
                row[x..x + side].fill(spec.fg);
            }
            Frame::new(spec.width, spec.height, PixelFormat::Gray8, data)
                .map(|f| f.with_meta(t as u64, t as u64 * spec.frame_interval_ms))
        })
        .collect::<Result<Vec<_>>>()?;
    FrameSequence::new(frames)
}
