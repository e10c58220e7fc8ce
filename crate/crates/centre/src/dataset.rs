//! Synthetic dataset generation into SRSEQ1 files.
//!
//! Spec files use the config syntax. `kind=square` keys: `width height
//! side start_x start_y vx vy frames fg bg interval_ms noise`.
//! `kind=scene` keys: `scene_file frames width height interval_ms drive
//! lights night_vision noise`; the rover starts at the origin and holds
//! `drive` for the whole run. `noise=a` adds independent uniform noise in
//! `[-a, a]` to every sample, seeded.

use std::collections::BTreeMap;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;
use vmd_core::imaging::{
    parse_scene, render_scene, synth_motion_sequence, write_sequence, Frame, FrameSequence, ImagingError, SquareMotion,
};
use vmd_core::rover::{Command, DriveCommand, RoverState};

use crate::config::{parse_pairs, value, ConfigError};

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error(transparent)]
    Spec(#[from] ConfigError),
    #[error(transparent)]
    Imaging(#[from] ImagingError),
    #[error("cannot read scene file {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum DatasetKind {
    Square(SquareMotion),
    Scene {
        scene_text: String,
        frames: usize,
        width: u32,
        height: u32,
        interval_ms: u64,
        drive: DriveCommand,
        lights: bool,
        night_vision: bool,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetSpec {
    pub kind: DatasetKind,
    pub noise: u8,
}

struct Keys(BTreeMap<String, String>);

impl Keys {
    fn get<T: std::str::FromStr>(&mut self, key: &str, default: T) -> Result<T, ConfigError> {
        match self.0.remove(key) {
            Some(v) => value(key, &v),
            None => Ok(default),
        }
    }

    fn require(&mut self, key: &str) -> Result<String, ConfigError> {
        self.0.remove(key).ok_or_else(|| ConfigError::Value {
            key: key.into(),
            reason: "required".into(),
        })
    }

    fn finish(self) -> Result<(), ConfigError> {
        match self.0.into_keys().next() {
            Some(key) => Err(ConfigError::Value {
                key,
                reason: "unknown setting".into(),
            }),
            None => Ok(()),
        }
    }
}

impl DatasetSpec {
    /// Parses a spec; `base` resolves a relative `scene_file`.
    pub fn parse(text: &str, base: &Path) -> Result<Self, DatasetError> {
        let mut k = Keys(parse_pairs(text)?);
        let kind = k.require("kind")?;
        let noise = k.get("noise", 0u8)?;
        let kind = match kind.as_str() {
            "square" => {
                let spec = SquareMotion {
                    width: k.get("width", 64)?,
                    height: k.get("height", 64)?,
                    side: k.get("side", 8)?,
                    start: (k.get("start_x", 0)?, k.get("start_y", 0)?),
                    velocity: (k.get("vx", 0)?, k.get("vy", 0)?),
                    n_frames: k.get("frames", 20)?,
                    fg: k.get("fg", 255)?,
                    bg: k.get("bg", 0)?,
                    frame_interval_ms: k.get("interval_ms", 100)?,
                };
                spec.validate()?;
                DatasetKind::Square(spec)
            }
            "scene" => {
                let file = base.join(k.require("scene_file")?);
                let scene_text = std::fs::read_to_string(&file).map_err(|source| DatasetError::Io {
                    path: file.display().to_string(),
                    source,
                })?;
                parse_scene(&scene_text)?;
                let drive = match k.0.remove("drive") {
                    Some(v) => v.parse().map_err(|e: vmd_core::rover::RoverError| ConfigError::Value {
                        key: "drive".into(),
                        reason: e.to_string(),
                    })?,
                    None => DriveCommand::Stop,
                };
                DatasetKind::Scene {
                    scene_text,
                    frames: k.get("frames", 20)?,
                    width: k.get("width", vmd_core::imaging::DEFAULT_WIDTH)?,
                    height: k.get("height", vmd_core::imaging::DEFAULT_HEIGHT)?,
                    interval_ms: k.get("interval_ms", 100)?,
                    drive,
                    lights: k.get("lights", false)?,
                    night_vision: k.get("night_vision", false)?,
                }
            }
            other => {
                return Err(ConfigError::Value {
                    key: "kind".into(),
                    reason: format!("expected square or scene, got {other:?}"),
                }
                .into())
            }
        };
        k.finish()?;
        Ok(DatasetSpec { kind, noise })
    }
}

fn add_noise(frame: Frame, amplitude: u8, rng: &mut ChaCha8Rng) -> Result<Frame, ImagingError> {
    if amplitude == 0 {
        return Ok(frame);
    }
    let (w, h, fmt, seq, ts) = (
        frame.width(),
        frame.height(),
        frame.format(),
        frame.seq,
        frame.timestamp_ms,
    );
    let a = amplitude as i16;
    let data = frame
        .into_data()
        .into_iter()
        .map(|v| (v as i16 + rng.random_range(-a..=a)).clamp(0, 255) as u8)
        .collect();
    Ok(Frame::new(w, h, fmt, data)?.with_meta(seq, ts))
}

pub fn generate(spec: &DatasetSpec, seed: u64) -> Result<FrameSequence, DatasetError> {
    let clean: Vec<Frame> = match &spec.kind {
        DatasetKind::Square(s) => synth_motion_sequence(s)?.into_frames(),
        DatasetKind::Scene {
            scene_text,
            frames,
            width,
            height,
            interval_ms,
            drive,
            lights,
            night_vision,
        } => {
            let scene = parse_scene(scene_text)?;
            let mut pose = RoverState::default().apply_command(Command::Drive(*drive), 0);
            let dt = *interval_ms as f64 / 1000.0;
            let mut out = Vec::with_capacity(*frames);
            for t in 0..*frames {
                let f = render_scene(&scene, &pose, *width, *height, *lights, *night_vision)?;
                out.push(f.with_meta(t as u64, t as u64 * interval_ms));
                if dt > 0.0 {
                    pose = pose.step(dt).expect("positive time step");
                }
            }
            out
        }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noisy = clean
        .into_iter()
        .map(|f| add_noise(f, spec.noise, &mut rng))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(FrameSequence::new(noisy)?)
}

/// Generates and serialises in one go.
pub fn gen_dataset(spec: &DatasetSpec, seed: u64) -> Result<Vec<u8>, DatasetError> {
    Ok(write_sequence(&generate(spec, seed)?))
}
