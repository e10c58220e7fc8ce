use std::collections::VecDeque;

use super::{denoise, frame_difference, MotionError, MotionMask, Result};
use crate::imaging::{Frame, PixelFormat};

#[derive(Debug, Clone, PartialEq)]
pub struct DetectorConfig {
    /// Gray-level change that counts as motion (strictly greater than).
    pub tau: u8,
    /// Fraction of moving pixels that makes a window "positive".
    pub min_ratio: f64,
    /// Consecutive positive windows before the alarm is raised.
    pub persist_k: u32,
    pub denoise: bool,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        DetectorConfig {
            tau: 25,
            min_ratio: 0.005,
            persist_k: 2,
            denoise: true,
        }
    }
}

impl DetectorConfig {
    pub fn validate(&self) -> Result<()> {
        if self.tau == 0 || self.tau == 255 {
            return Err(MotionError::Config(format!("tau must be in 1..=254, got {}", self.tau)));
        }
        if !(self.min_ratio > 0.0 && self.min_ratio < 1.0) {
            return Err(MotionError::Config(format!(
                "min_ratio must be in (0, 1), got {}",
                self.min_ratio
            )));
        }
        if self.persist_k == 0 {
            return Err(MotionError::Config("persist_k must be at least 1".into()));
        }
        Ok(())
    }
}

/// The four most recent GRAY8 frames, oldest first.
#[derive(Debug, Clone, Default)]
pub struct FrameWindow {
    frames: VecDeque<Frame>,
}

impl FrameWindow {
    pub const DEPTH: usize = 4;

    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a warm window from `[f0, f1, f2, f3]`.
    pub fn from_frames(frames: [Frame; 4]) -> Result<Self> {
        let mut w = FrameWindow::new();
        for f in frames {
            w.push(f)?;
        }
        Ok(w)
    }

    pub fn push(&mut self, frame: Frame) -> Result<()> {
        frame.expect_format(PixelFormat::Gray8)?;
        if let Some(last) = self.frames.back() {
            if last.width() != frame.width() || last.height() != frame.height() {
                return Err(MotionError::DimensionMismatch(
                    last.width(),
                    last.height(),
                    frame.width(),
                    frame.height(),
                ));
            }
            if frame.seq <= last.seq {
                return Err(MotionError::OutOfOrder {
                    last: last.seq,
                    got: frame.seq,
                });
            }
        }
        if self.frames.len() == Self::DEPTH {
            self.frames.pop_front();
        }
        self.frames.push_back(frame);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn is_warm(&self) -> bool {
        self.frames.len() == Self::DEPTH
    }

    pub fn newest(&self) -> Option<&Frame> {
        self.frames.back()
    }

    pub fn clear(&mut self) {
        self.frames.clear();
    }
}

/// `diff(f3,f2) AND (diff(f2,f1) OR diff(f1,f0))`, optionally eroded.
///
/// A pixel must change in the newest pair and have changed in one of the
/// two preceding pairs, so a single-frame flash never fires.
pub fn four_frame_mask(window: &FrameWindow, cfg: &DetectorConfig) -> Result<MotionMask> {
    if !window.is_warm() {
        return Err(MotionError::NotReady(window.len()));
    }
    let f = &window.frames;
    let b0 = frame_difference(&f[3], &f[2], cfg.tau)?;
    let b1 = frame_difference(&f[2], &f[1], cfg.tau)?;
    let b2 = frame_difference(&f[1], &f[0], cfg.tau)?;
    let raw = b0.and(&b1.or(&b2));
    Ok(if cfg.denoise { denoise(&raw) } else { raw })
}

/// Sliding four-frame detector over a stream.
#[derive(Debug, Clone)]
pub struct MotionDetector {
    window: FrameWindow,
    cfg: DetectorConfig,
}

impl MotionDetector {
    pub fn new(cfg: DetectorConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(MotionDetector {
            window: FrameWindow::new(),
            cfg,
        })
    }

    pub fn config(&self) -> &DetectorConfig {
        &self.cfg
    }

    /// Adds a GRAY8 frame; returns the mask once the window is warm.
    pub fn push(&mut self, frame: Frame) -> Result<Option<MotionMask>> {
        self.window.push(frame)?;
        if self.window.is_warm() {
            four_frame_mask(&self.window, &self.cfg).map(Some)
        } else {
            Ok(None)
        }
    }

    pub fn reset(&mut self) {
        self.window.clear();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imaging::{synth_motion_sequence, SquareMotion};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn gray(w: u32, h: u32, data: Vec<u8>, seq: u64) -> Frame {
        Frame::new(w, h, PixelFormat::Gray8, data)
            .unwrap()
            .with_meta(seq, seq * 100)
    }

    fn window_of(frames: Vec<Vec<u8>>, w: u32, h: u32) -> FrameWindow {
        let fs: Vec<Frame> = frames
            .into_iter()
            .enumerate()
            .map(|(i, d)| gray(w, h, d, i as u64))
            .collect();
        FrameWindow::from_frames(fs.try_into().unwrap()).unwrap()
    }

    fn no_denoise() -> DetectorConfig {
        DetectorConfig {
            denoise: false,
            ..Default::default()
        }
    }

    /// Independent per-pixel evaluation straight from pixel values.
    fn brute_force(f: &[Vec<u8>; 4], tau: u8) -> Vec<bool> {
        (0..f[0].len())
            .map(|p| {
                let d = |a: u8, b: u8| (a as i32 - b as i32).abs() > tau as i32;
                let now = d(f[3][p], f[2][p]);
                let prev = d(f[2][p], f[1][p]);
                let older = d(f[1][p], f[0][p]);
                now && (prev || older)
            })
            .collect()
    }

    #[test]
    fn identical_frames_are_quiet() {
        let w = window_of(vec![vec![9; 64]; 4], 8, 8);
        assert!(four_frame_mask(&w, &DetectorConfig::default()).unwrap().is_empty());
    }

    #[test]
    fn single_frame_flash_is_suppressed() {
        let w = window_of(vec![vec![0], vec![0], vec![0], vec![100]], 1, 1);
        assert_eq!(four_frame_mask(&w, &no_denoise()).unwrap().bits(), &[false]);
    }

    #[test]
    fn cold_window_is_not_ready() {
        let mut w = FrameWindow::new();
        w.push(gray(8, 8, vec![0; 64], 0)).unwrap();
        assert_eq!(four_frame_mask(&w, &no_denoise()), Err(MotionError::NotReady(1)));
    }

    #[test]
    fn window_rejects_out_of_order_and_rgb() {
        let mut w = FrameWindow::new();
        w.push(gray(8, 8, vec![0; 64], 5)).unwrap();
        assert!(matches!(
            w.push(gray(8, 8, vec![0; 64], 5)),
            Err(MotionError::OutOfOrder { .. })
        ));
        let rgb = Frame::filled(8, 8, PixelFormat::Rgb24, 0).unwrap().with_meta(6, 0);
        assert!(matches!(w.push(rgb), Err(MotionError::Imaging(_))));
    }

    #[test]
    fn moving_square_window_matches_brute_force() {
        let seq = synth_motion_sequence(&SquareMotion {
            width: 8,
            height: 8,
            side: 2,
            start: (0, 2),
            velocity: (2, 0),
            n_frames: 4,
            fg: 220,
            bg: 20,
            frame_interval_ms: 100,
        })
        .unwrap();
        let raw: Vec<Vec<u8>> = seq.frames().iter().map(|f| f.data().to_vec()).collect();
        let expected = brute_force(&raw.clone().try_into().unwrap(), 25);
        let w = FrameWindow::from_frames(seq.into_frames().try_into().unwrap()).unwrap();
        let got = four_frame_mask(&w, &no_denoise()).unwrap();
        assert_eq!(got.bits(), &expected[..]);
        // moving a full side per frame, vacated pixels were covered one frame earlier
        assert!(got.popcount() > 0);
    }

    #[test]
    fn random_windows_match_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        for _ in 0..1000 {
            let frames: [Vec<u8>; 4] = std::array::from_fn(|_| (0..64).map(|_| rng.random()).collect());
            let tau = rng.random_range(1..255);
            let cfg = DetectorConfig {
                tau,
                denoise: false,
                ..Default::default()
            };
            let w = window_of(frames.to_vec(), 8, 8);
            let got = four_frame_mask(&w, &cfg).unwrap();
            assert_eq!(got.bits(), &brute_force(&frames, tau)[..]);
            let newest = frame_difference(
                &gray(8, 8, frames[3].clone(), 0),
                &gray(8, 8, frames[2].clone(), 0),
                tau,
            )
            .unwrap();
            assert!(got.is_subset_of(&newest));
        }
    }

    #[test]
    fn detector_warms_after_four_frames() {
        let mut d = MotionDetector::new(DetectorConfig::default()).unwrap();
        for seq in 0..3 {
            assert_eq!(d.push(gray(8, 8, vec![0; 64], seq)).unwrap(), None);
        }
        assert!(d.push(gray(8, 8, vec![0; 64], 3)).unwrap().is_some());
    }

    #[test]
    fn config_validation() {
        assert!(DetectorConfig::default().validate().is_ok());
        for bad in [
            DetectorConfig {
                tau: 0,
                ..Default::default()
            },
            DetectorConfig {
                tau: 255,
                ..Default::default()
            },
            DetectorConfig {
                min_ratio: 0.0,
                ..Default::default()
            },
            DetectorConfig {
                min_ratio: 1.0,
                ..Default::default()
            },
            DetectorConfig {
                persist_k: 0,
                ..Default::default()
            },
        ] {
            assert!(bad.validate().is_err(), "{bad:?}");
        }
    }
}
