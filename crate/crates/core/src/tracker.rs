//! Colour tracing: highlight pixels near a stored colour, summarise them by
//! screen quadrant and steer toward the highlighted region.

use crate::imaging::{gray_to_rgb, to_gray, Frame, ImagingError, PixelFormat};
use crate::motion::MotionMask;
use crate::rover::DriveCommand;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ColorReference {
    pub rgb: [u8; 3],
    /// Euclidean RGB distance bound (inclusive).
    pub tolerance: u32,
}

impl ColorReference {
    pub const DEFAULT_TOLERANCE: u32 = 60;

    pub fn new(rgb: [u8; 3], tolerance: u32) -> Self {
        ColorReference { rgb, tolerance }
    }

    pub fn matches(&self, px: [u8; 3]) -> bool {
        let d2: u32 = px
            .iter()
            .zip(&self.rgb)
            .map(|(&a, &b)| (a as i32 - b as i32).pow(2) as u32)
            .sum();
        d2 as u64 <= self.tolerance as u64 * self.tolerance as u64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrackerConfig {
    /// Half-width of the centred dead zone, as a fraction of frame width.
    pub dead_zone_frac: f64,
    pub min_pixels: u64,
    /// Matched fraction of the frame at which the target counts as reached.
    pub target_fill: f64,
}

impl Default for TrackerConfig {
    fn default() -> Self {
        TrackerConfig {
            dead_zone_frac: 0.10,
            min_pixels: 20,
            target_fill: 0.10,
        }
    }
}

impl TrackerConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.dead_zone_frac > 0.0 && self.dead_zone_frac < 0.5) {
            return Err(format!(
                "dead_zone_frac must be in (0, 0.5), got {}",
                self.dead_zone_frac
            ));
        }
        if self.min_pixels == 0 {
            return Err("min_pixels must be at least 1".into());
        }
        if !(self.target_fill > 0.0 && self.target_fill <= 1.0) {
            return Err(format!("target_fill must be in (0, 1], got {}", self.target_fill));
        }
        Ok(())
    }
}

/// Matched-pixel counts per quadrant plus their centroid.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadrantReport {
    pub top_left: u64,
    pub top_right: u64,
    pub bottom_left: u64,
    pub bottom_right: u64,
    pub total: u64,
    pub centroid: Option<(f64, f64)>,
    sum_x: u64,
    sum_y: u64,
}

impl QuadrantReport {
    pub fn empty() -> Self {
        QuadrantReport {
            top_left: 0,
            top_right: 0,
            bottom_left: 0,
            bottom_right: 0,
            total: 0,
            centroid: None,
            sum_x: 0,
            sum_y: 0,
        }
    }

    pub fn counts(&self) -> [u64; 4] {
        [self.top_left, self.top_right, self.bottom_left, self.bottom_right]
    }

    /// Signed horizontal offset of the matched region's centre from the
    /// image centre line, measured at pixel centres. Exactly negated by a
    /// horizontal mirror of the mask.
    fn horizontal_offset(&self, width: u32) -> Option<f64> {
        if self.total == 0 {
            return None;
        }
        let numerator = 2 * self.sum_x as i128 + self.total as i128 - width as i128 * self.total as i128;
        Some(numerator as f64 / (2 * self.total) as f64)
    }
}

pub fn match_color(f: &Frame, reference: &ColorReference) -> Result<MotionMask, ImagingError> {
    f.expect_format(PixelFormat::Rgb24)?;
    let bits = f
        .data()
        .chunks_exact(3)
        .map(|px| reference.matches([px[0], px[1], px[2]]))
        .collect();
    Ok(MotionMask::from_bits(f.width(), f.height(), bits).expect("frame dimensions are valid"))
}

/// Columns `x < width/2` are left, rows `y < height/2` are top.
pub fn quadrant_report(m: &MotionMask) -> QuadrantReport {
    let (w, h) = (m.width(), m.height());
    let (mid_x, mid_y) = (w / 2, h / 2);
    let mut rep = QuadrantReport::empty();
    for y in 0..h {
        for x in 0..w {
            if !m.get(x, y) {
                continue;
            }
            let slot = match (x < mid_x, y < mid_y) {
                (true, true) => &mut rep.top_left,
                (false, true) => &mut rep.top_right,
                (true, false) => &mut rep.bottom_left,
                (false, false) => &mut rep.bottom_right,
            };
            *slot += 1;
            rep.total += 1;
            rep.sum_x += x as u64;
            rep.sum_y += y as u64;
        }
    }
    if rep.total > 0 {
        rep.centroid = Some((rep.sum_x as f64 / rep.total as f64, rep.sum_y as f64 / rep.total as f64));
    }
    rep
}

/// Drive decision, first matching rule wins: too few pixels → Stop; target
/// fills `target_fill` of the frame → Stop; centre left of the dead zone →
/// Left; right of it → Right; otherwise Forward.
pub fn steer(rep: &QuadrantReport, width: u32, height: u32, cfg: &TrackerConfig) -> DriveCommand {
    if rep.total < cfg.min_pixels {
        return DriveCommand::Stop;
    }
    let area = width as f64 * height as f64;
    if rep.total as f64 >= cfg.target_fill * area {
        return DriveCommand::Stop;
    }
    let Some(offset) = rep.horizontal_offset(width) else {
        return DriveCommand::Stop;
    };
    let half_band = cfg.dead_zone_frac * width as f64;
    if offset < -half_band {
        DriveCommand::Left
    } else if offset > half_band {
        DriveCommand::Right
    } else {
        DriveCommand::Forward
    }
}

/// Whether the report's centroid lies inside the dead zone band.
pub fn in_dead_zone(rep: &QuadrantReport, width: u32, cfg: &TrackerConfig) -> bool {
    rep.horizontal_offset(width)
        .is_some_and(|o| o.abs() <= cfg.dead_zone_frac * width as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrackOutput {
    pub command: DriveCommand,
    pub report: QuadrantReport,
    pub mask: MotionMask,
}

pub fn track_step(f: &Frame, reference: &ColorReference, cfg: &TrackerConfig) -> Result<TrackOutput, ImagingError> {
    let mask = match_color(f, reference)?;
    let report = quadrant_report(&mask);
    let command = steer(&report, f.width(), f.height(), cfg);
    Ok(TrackOutput { command, report, mask })
}

/// Gray-scaled frame with matched pixels painted pure red.
pub fn overlay(f: &Frame, mask: &MotionMask) -> Result<Frame, ImagingError> {
    let gray = gray_to_rgb(&to_gray(f)?)?;
    let (seq, ts) = (gray.seq, gray.timestamp_ms);
    let (w, h) = (gray.width(), gray.height());
    let mut data = gray.into_data();
    for (px, &hit) in data.chunks_exact_mut(3).zip(mask.bits()) {
        if hit {
            px.copy_from_slice(&[255, 0, 0]);
        }
    }
    Ok(Frame::new(w, h, PixelFormat::Rgb24, data)?.with_meta(seq, ts))
}
