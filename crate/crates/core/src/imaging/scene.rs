//! Flat-world camera model for the simulated rover.
//!
//! The world is a plane of coloured discs. The camera sits on the rover,
//! looks along its heading and has a 60° horizontal field of view. Bearing
//! is measured clockwise from the heading, so positive bearings appear on
//! the right half of the image.

use super::{luma, Frame, ImagingError, PixelFormat, Result};
use crate::rover::{normalize_angle, RoverState};

pub const HALF_FOV_DEG: f64 = 30.0;
/// Apparent radius in pixels of a 1 m radius object at 1 m.
pub const FOCAL_PX_PER_M: f64 = 140.0;
// absorbs round-off when an object sits exactly on the FOV boundary
const FOV_EPS: f64 = 1e-9;
const LIGHTS_BOOST: u8 = 40;
const LIGHTS_RANGE_M: f64 = 2.0;

#[derive(Debug, Clone, PartialEq)]
pub struct SceneObject {
    pub x: f64,
    pub y: f64,
    pub radius: f64,
    pub color: [u8; 3],
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub background_gray: u8,
    pub objects: Vec<SceneObject>,
}

impl Scene {
    pub fn new(background_gray: u8) -> Self {
        Scene {
            background_gray,
            objects: Vec::new(),
        }
    }

    pub fn with_object(mut self, object: SceneObject) -> Result<Self> {
        validate_object(&object)?;
        self.objects.push(object);
        Ok(self)
    }

    /// Places an object at `distance` metres and `bearing_deg` relative to a
    /// rover at the origin facing +x.
    pub fn with_object_at_bearing(self, distance: f64, bearing_deg: f64, radius: f64, color: [u8; 3]) -> Result<Self> {
        let angle = -bearing_deg.to_radians();
        self.with_object(SceneObject {
            x: distance * angle.cos(),
            y: distance * angle.sin(),
            radius,
            color,
        })
    }
}

fn validate_object(o: &SceneObject) -> Result<()> {
    if !(o.x.is_finite() && o.y.is_finite()) {
        return Err(ImagingError::Parameter("object coordinates must be finite".into()));
    }
    if !(o.radius.is_finite() && o.radius > 0.0) {
        return Err(ImagingError::Parameter(format!(
            "object radius must be positive, got {}",
            o.radius
        )));
    }
    Ok(())
}

/// Distance and bearing (radians, positive to the right) of a world point
/// as seen from `pose`.
pub(crate) fn relative_polar(pose: &RoverState, x: f64, y: f64) -> (f64, f64) {
    let dx = x - pose.x;
    let dy = y - pose.y;
    let d = dx.hypot(dy);
    let bearing = normalize_angle(pose.heading - dy.atan2(dx));
    (d, bearing)
}

pub fn render_scene(
    scene: &Scene,
    pose: &RoverState,
    width: u32,
    height: u32,
    lights: bool,
    night_vision: bool,
) -> Result<Frame> {
    if width < 8 || height < 8 {
        return Err(ImagingError::InvalidDimensions { width, height });
    }
    let half_fov = HALF_FOV_DEG.to_radians();
    let mut visible: Vec<(f64, f64, &SceneObject)> = scene
        .objects
        .iter()
        .filter_map(|o| {
            let (d, bearing) = relative_polar(pose, o.x, o.y);
            (d > 0.0 && bearing.abs() <= half_fov + FOV_EPS).then_some((d, bearing, o))
        })
        .collect();
    // painter's order: farthest first
    visible.sort_by(|a, b| b.0.total_cmp(&a.0));

    let (w, h) = (width as usize, height as usize);
    let mut data = vec![scene.background_gray; w * h * 3];
    let max_r = (height / 2) as i64;
    for (d, bearing, o) in visible {
        let cx = width as f64 / 2.0 * (1.0 + bearing / half_fov);
        let cy = height as f64 / 2.0;
        let r = ((FOCAL_PX_PER_M * o.radius / d).round() as i64).clamp(1, max_r);
        let color = if lights && d < LIGHTS_RANGE_M {
            o.color.map(|c| c.saturating_add(LIGHTS_BOOST))
        } else {
            o.color
        };
        let r2 = (r * r) as f64;
        let x0 = ((cx - r as f64).floor() as i64).max(0);
        let x1 = ((cx + r as f64).ceil() as i64).min(w as i64 - 1);
        let y0 = ((cy - r as f64).floor() as i64).max(0);
        let y1 = ((cy + r as f64).ceil() as i64).min(h as i64 - 1);
        for py in y0..=y1 {
            let dy = py as f64 - cy;
            for px in x0..=x1 {
                let dx = px as f64 - cx;
                if dx * dx + dy * dy <= r2 {
                    let i = (py as usize * w + px as usize) * 3;
                    data[i..i + 3].copy_from_slice(&color);
                }
            }
        }
    }

    if night_vision {
        for px in data.chunks_exact_mut(3) {
            let l = luma(px[0], px[1], px[2]) as u32;
            let boosted = (l * 3 / 2).min(255) as u8;
            px.fill(boosted);
        }
    }
    Frame::new(width, height, PixelFormat::Rgb24, data)
}

/// Parses the line-oriented scene format:
///
/// ```text
/// # comment
/// background 40
/// object <x> <y> <radius> <r> <g> <b>
/// object_polar <distance> <bearing_deg> <radius> <r> <g> <b>
/// ```
///
/// `object_polar` positions are relative to a rover at the origin facing +x.
pub fn parse_scene(text: &str) -> Result<Scene> {
    let mut scene = Scene::new(128);
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let bad = |reason: String| ImagingError::Scene { line, reason };
        let mut tokens = content.split_whitespace();
        let keyword = tokens.next().unwrap_or_default();
        let args: Vec<&str> = tokens.collect();
        match keyword {
            "background" => {
                let [v] = args[..] else {
                    return Err(bad("background takes one gray value".into()));
                };
                scene.background_gray = v.parse().map_err(|_| bad(format!("bad gray value {v:?}")))?;
            }
            "object" | "object_polar" => {
                if args.len() != 6 {
                    return Err(bad(format!("{keyword} takes 6 values, got {}", args.len())));
                }
                let mut reals = [0.0f64; 3];
                for (slot, tok) in reals.iter_mut().zip(&args[..3]) {
                    *slot = tok.parse().map_err(|_| bad(format!("bad number {tok:?}")))?;
                }
                let mut color = [0u8; 3];
                for (slot, tok) in color.iter_mut().zip(&args[3..]) {
                    *slot = tok.parse().map_err(|_| bad(format!("bad channel {tok:?}")))?;
                }
                let [a, b, radius] = reals;
                let result = if keyword == "object" {
                    scene.clone().with_object(SceneObject {
                        x: a,
                        y: b,
                        radius,
                        color,
                    })
                } else {
                    scene.clone().with_object_at_bearing(a, b, radius, color)
                };
                scene = result.map_err(|e| bad(e.to_string()))?;
            }
            other => return Err(bad(format!("unknown keyword {other:?}"))),
        }
    }
    Ok(scene)
}

#[cfg(test)]
mod tests {
    use super::*;

    const RED: [u8; 3] = [255, 0, 0];

    fn red_columns(f: &Frame) -> Vec<u32> {
        let mut cols = Vec::new();
        for y in 0..f.height() {
            for x in 0..f.width() {
                if f.rgb_at(x, y) == RED {
                    cols.push(x);
                }
            }
        }
        cols
    }

    fn mean(v: &[u32]) -> f64 {
        v.iter().map(|&c| c as f64).sum::<f64>() / v.len() as f64
    }

    #[test]
    fn dead_ahead_is_centered() {
        let scene = Scene::new(100).with_object_at_bearing(3.0, 0.0, 0.3, RED).unwrap();
        let f = render_scene(&scene, &RoverState::default(), 320, 240, false, false).unwrap();
        assert_eq!(mean(&red_columns(&f)), 160.0);
    }

    #[test]
    fn right_fov_edge_maps_to_last_column() {
        let scene = Scene::new(100).with_object_at_bearing(3.0, 30.0, 0.3, RED).unwrap();
        let f = render_scene(&scene, &RoverState::default(), 320, 240, false, false).unwrap();
        let cols = red_columns(&f);
        // the disc centre sits on column 320, only its left half is visible
        assert_eq!(*cols.iter().max().unwrap(), 319);
        assert_eq!(*cols.iter().min().unwrap(), 320 - 14);
    }

    #[test]
    fn pixel_radius_follows_distance() {
        let scene = Scene::new(0).with_object_at_bearing(1.0, 0.0, 0.5, RED).unwrap();
        let f = render_scene(&scene, &RoverState::default(), 320, 240, false, false).unwrap();
        let cols = red_columns(&f);
        assert_eq!(*cols.iter().min().unwrap(), 160 - 70);
        assert_eq!(*cols.iter().max().unwrap(), 160 + 70);
    }

    #[test]
    fn radius_clamps_to_half_height() {
        let scene = Scene::new(0).with_object_at_bearing(0.1, 0.0, 0.5, RED).unwrap();
        let f = render_scene(&scene, &RoverState::default(), 320, 240, false, false).unwrap();
        let cols = red_columns(&f);
        assert_eq!(*cols.iter().min().unwrap(), 160 - 120);
    }

    #[test]
    fn out_of_view_objects_are_absent() {
        let scene = Scene::new(7)
            .with_object_at_bearing(3.0, 45.0, 0.5, RED)
            .unwrap()
            .with_object_at_bearing(3.0, 180.0, 0.5, RED)
            .unwrap();
        let f = render_scene(&scene, &RoverState::default(), 16, 16, false, false).unwrap();
        assert!(f.data().iter().all(|&b| b == 7));
    }

    #[test]
    fn nearer_object_painted_last() {
        let scene = Scene::new(0)
            .with_object_at_bearing(1.0, 0.0, 0.1, [0, 255, 0])
            .unwrap()
            .with_object_at_bearing(4.0, 0.0, 2.0, RED)
            .unwrap();
        let f = render_scene(&scene, &RoverState::default(), 64, 48, false, false).unwrap();
        assert_eq!(f.rgb_at(32, 24), [0, 255, 0]);
    }

    #[test]
    fn lights_and_night_vision() {
        let scene = Scene::new(50)
            .with_object_at_bearing(1.0, 0.0, 0.1, [100, 20, 0])
            .unwrap();
        let pose = RoverState::default();
        let lit = render_scene(&scene, &pose, 32, 32, true, false).unwrap();
        assert_eq!(lit.rgb_at(16, 16), [140, 60, 40]);
        assert_eq!(lit.rgb_at(0, 0), [50, 50, 50]);
        let nv = render_scene(&scene, &pose, 32, 32, false, true).unwrap();
        let l = luma(100, 20, 0) as u32 * 3 / 2;
        assert_eq!(nv.rgb_at(16, 16), [l as u8; 3]);
        assert_eq!(nv.rgb_at(0, 0), [75; 3]);
    }

    #[test]
    fn lights_ignore_distant_objects() {
        let scene = Scene::new(0)
            .with_object_at_bearing(2.5, 0.0, 0.5, [10, 10, 10])
            .unwrap();
        let f = render_scene(&scene, &RoverState::default(), 32, 32, true, false).unwrap();
        assert_eq!(f.rgb_at(16, 16), [10, 10, 10]);
    }

    #[test]
    fn rendering_is_deterministic() {
        let scene = Scene::new(30).with_object_at_bearing(2.0, -12.0, 0.4, RED).unwrap();
        let pose = RoverState {
            heading: 0.2,
            ..RoverState::default()
        };
        let a = render_scene(&scene, &pose, 64, 48, true, true).unwrap();
        let b = render_scene(&scene, &pose, 64, 48, true, true).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn too_small_frame_is_rejected() {
        assert!(render_scene(&Scene::new(0), &RoverState::default(), 7, 8, false, false).is_err());
    }

    #[test]
    fn parses_scene_file() {
        let s = parse_scene("# test\nbackground 40\nobject 1 2 0.5 255 0 0\nobject_polar 3 -20 0.5 0 0 255 # left\n")
            .unwrap();
        assert_eq!(s.background_gray, 40);
        assert_eq!(s.objects.len(), 2);
        assert_eq!(
            s.objects[0],
            SceneObject {
                x: 1.0,
                y: 2.0,
                radius: 0.5,
                color: RED
            }
        );
        let (d, b) = relative_polar(&RoverState::default(), s.objects[1].x, s.objects[1].y);
        assert!((d - 3.0).abs() < 1e-12);
        assert!((b.to_degrees() + 20.0).abs() < 1e-9);
    }

    #[test]
    fn scene_errors_name_the_line() {
        assert!(matches!(
            parse_scene("background 1\nobject 1 2 -1 0 0 0"),
            Err(ImagingError::Scene { line: 2, .. })
        ));
        assert!(matches!(
            parse_scene("blob 1"),
            Err(ImagingError::Scene { line: 1, .. })
        ));
    }
}
