use super::{MotionError, MotionMask, Result};
use crate::imaging::{Frame, PixelFormat};

/// Running-average background reference.
#[derive(Debug, Clone, PartialEq)]
pub struct BackgroundModel {
    width: u32,
    height: u32,
    reference: Vec<f64>,
    alpha: f64,
}

impl BackgroundModel {
    /// Seeds the reference with `first` (GRAY8).
    pub fn new(first: &Frame, alpha: f64) -> Result<Self> {
        first.expect_format(PixelFormat::Gray8)?;
        Self::check_alpha(alpha)?;
        Ok(BackgroundModel {
            width: first.width(),
            height: first.height(),
            reference: first.data().iter().map(|&v| v as f64).collect(),
            alpha,
        })
    }

    pub fn from_reference(width: u32, height: u32, reference: Vec<f64>, alpha: f64) -> Result<Self> {
        Self::check_alpha(alpha)?;
        if reference.len() != width as usize * height as usize {
            return Err(MotionError::Config("reference length does not match dimensions".into()));
        }
        if reference.iter().any(|v| !(0.0..=255.0).contains(v)) {
            return Err(MotionError::Config("reference values must lie in [0, 255]".into()));
        }
        Ok(BackgroundModel {
            width,
            height,
            reference,
            alpha,
        })
    }

    fn check_alpha(alpha: f64) -> Result<()> {
        if alpha > 0.0 && alpha <= 1.0 {
            Ok(())
        } else {
            Err(MotionError::Config(format!("alpha must be in (0, 1], got {alpha}")))
        }
    }

    pub fn reference(&self) -> &[f64] {
        &self.reference
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Compares `f` against the reference, then blends `f` into it.
    pub fn step(&self, f: &Frame, tau: u8) -> Result<(MotionMask, BackgroundModel)> {
        f.expect_format(PixelFormat::Gray8)?;
        if f.width() != self.width || f.height() != self.height {
            return Err(MotionError::DimensionMismatch(
                self.width,
                self.height,
                f.width(),
                f.height(),
            ));
        }
        let bits = f
            .data()
            .iter()
            .zip(&self.reference)
            .map(|(&v, &r)| (v as f64 - r).abs() > tau as f64)
            .collect();
        let reference = if self.alpha == 1.0 {
            f.data().iter().map(|&v| v as f64).collect()
        } else {
            f.data()
                .iter()
                .zip(&self.reference)
                .map(|(&v, &r)| ((1.0 - self.alpha) * r + self.alpha * v as f64).clamp(0.0, 255.0))
                .collect()
        };
        let mask = MotionMask::from_bits(self.width, self.height, bits)?;
        Ok((
            mask,
            BackgroundModel {
                reference,
                ..self.clone()
            },
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn gray(data: Vec<u8>) -> Frame {
        let n = data.len() as u32;
        Frame::new(n, 1, PixelFormat::Gray8, data).unwrap()
    }

    #[test]
    fn alpha_one_copies_frame() {
        let m = BackgroundModel::from_reference(3, 1, vec![1.5, 200.0, 7.0], 1.0).unwrap();
        let (_, next) = m.step(&gray(vec![9, 8, 7]), 25).unwrap();
        assert_eq!(next.reference(), &[9.0, 8.0, 7.0]);
    }

    #[test]
    fn constant_scene_stays_quiet() {
        let f = gray(vec![10, 50, 90, 130]);
        let mut m = BackgroundModel::new(&f, 0.3).unwrap();
        for _ in 0..50 {
            let (mask, next) = m.step(&f, 25).unwrap();
            assert!(mask.is_empty());
            m = next;
        }
    }

    #[test]
    fn half_alpha_converges() {
        let m = BackgroundModel::from_reference(1, 1, vec![0.0], 0.5).unwrap();
        let (mask, m) = m.step(&gray(vec![100]), 25).unwrap();
        assert!(mask.get(0, 0));
        let (_, m) = m.step(&gray(vec![100]), 25).unwrap();
        assert_eq!(m.reference(), &[75.0]);
    }

    #[test]
    fn rejects_mismatch_and_bad_alpha() {
        let m = BackgroundModel::new(&gray(vec![0; 4]), 0.5).unwrap();
        assert!(matches!(
            m.step(&gray(vec![0; 3]), 25),
            Err(MotionError::DimensionMismatch(..))
        ));
        assert!(BackgroundModel::new(&gray(vec![0]), 0.0).is_err());
        assert!(BackgroundModel::new(&gray(vec![0]), 1.5).is_err());
    }

    proptest! {
        #[test]
        fn reference_stays_bounded(
            alpha in 0.001..=1.0f64,
            frames in proptest::collection::vec(proptest::collection::vec(any::<u8>(), 6), 1..40),
        ) {
            let mut m = BackgroundModel::new(&gray(frames[0].clone()), alpha).unwrap();
            for data in frames {
                m = m.step(&gray(data), 25).unwrap().1;
                prop_assert!(m.reference().iter().all(|v| (0.0..=255.0).contains(v)));
            }
        }
    }
}
