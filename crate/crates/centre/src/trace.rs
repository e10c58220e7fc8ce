//! Headless closed-loop colour tracing against a simulated scene.

use std::fmt::Write as _;

use vmd_core::imaging::{render_scene, ImagingError, Scene, DEFAULT_HEIGHT, DEFAULT_WIDTH};
use vmd_core::protocol::Mode;
use vmd_core::rover::{Command, DriveCommand, RoverState, SerialLink, DEFAULT_WATCHDOG_TIMEOUT_MS};
use vmd_core::tracker::{in_dead_zone, track_step, ColorReference, QuadrantReport, TrackerConfig};

use crate::report::{FrameRecord, ReportEvent, RunReport};
use crate::rover_link::LocalRover;

#[derive(Debug, Clone)]
pub struct TraceConfig {
    pub color: ColorReference,
    pub tracker: TrackerConfig,
    pub width: u32,
    pub height: u32,
    pub frame_interval_ms: u64,
    pub max_steps: u64,
    pub watchdog_timeout_ms: u64,
}

impl TraceConfig {
    pub const DEFAULT_MAX_STEPS: u64 = 300;

    pub fn new(color: ColorReference) -> Self {
        TraceConfig {
            color,
            tracker: TrackerConfig::default(),
            width: DEFAULT_WIDTH,
            height: DEFAULT_HEIGHT,
            frame_interval_ms: 100,
            max_steps: Self::DEFAULT_MAX_STEPS,
            watchdog_timeout_ms: DEFAULT_WATCHDOG_TIMEOUT_MS,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    /// Stopped because the target fills enough of the frame.
    Reached,
    /// Stopped because too few pixels matched.
    Lost,
    MaxSteps,
}

impl Termination {
    pub fn name(self) -> &'static str {
        match self {
            Termination::Reached => "reached",
            Termination::Lost => "lost",
            Termination::MaxSteps => "max_steps",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceStep {
    pub step: u64,
    pub time_ms: u64,
    /// Pose the frame was rendered from.
    pub pose: RoverState,
    pub command: DriveCommand,
    pub report: QuadrantReport,
    pub in_dead_zone: bool,
}

/// render → track_step → serial packet → rover → physics, one frame per tick.
#[derive(Debug, Clone)]
pub struct ClosedLoop {
    scene: Scene,
    cfg: TraceConfig,
    rover: LocalRover,
    link: SerialLink,
    now_ms: u64,
    step: u64,
}

impl ClosedLoop {
    pub fn new(scene: Scene, cfg: TraceConfig) -> Self {
        let rover = LocalRover::new(RoverState::default(), cfg.watchdog_timeout_ms);
        ClosedLoop {
            scene,
            cfg,
            rover,
            link: SerialLink::new(),
            now_ms: 0,
            step: 0,
        }
    }

    pub fn tick(&mut self) -> Result<TraceStep, ImagingError> {
        let pose = self.rover.state().clone();
        let frame = render_scene(
            &self.scene,
            &pose,
            self.cfg.width,
            self.cfg.height,
            pose.lights,
            pose.night_vision,
        )?
        .with_meta(self.step, self.now_ms);
        let out = track_step(&frame, &self.cfg.color, &self.cfg.tracker)?;
        let packet = self.link.transmit(Command::Drive(out.command));
        // a packet from our own encoder always decodes
        let _ = self.rover.receive(&packet, self.now_ms);
        let step = TraceStep {
            step: self.step,
            time_ms: self.now_ms,
            pose,
            command: out.command,
            in_dead_zone: in_dead_zone(&out.report, self.cfg.width, &self.cfg.tracker),
            report: out.report,
        };
        self.now_ms += self.cfg.frame_interval_ms;
        self.rover.advance(self.now_ms);
        self.step += 1;
        Ok(step)
    }

    pub fn rover(&self) -> &LocalRover {
        &self.rover
    }

    pub fn transcript(&self) -> &[u8] {
        self.link.transcript()
    }

    fn stop_reason(&self, s: &TraceStep) -> Option<Termination> {
        if s.command != DriveCommand::Stop {
            None
        } else if s.report.total < self.cfg.tracker.min_pixels {
            Some(Termination::Lost)
        } else {
            Some(Termination::Reached)
        }
    }
}

#[derive(Debug, Clone)]
pub struct TraceOutcome {
    pub report: RunReport,
    pub trajectory: Vec<TraceStep>,
    pub termination: Termination,
    pub transcript: Vec<u8>,
    pub received: Vec<Command>,
}

/// Runs the loop until the tracker stops the rover or `max_steps` frames.
pub fn trace(scene: &Scene, cfg: &TraceConfig) -> Result<TraceOutcome, ImagingError> {
    let mut cl = ClosedLoop::new(scene.clone(), cfg.clone());
    let mut report = RunReport::new();
    let mut trajectory = Vec::new();
    let mut termination = Termination::MaxSteps;
    for _ in 0..cfg.max_steps {
        let s = cl.tick()?;
        let reason = cl.stop_reason(&s);
        report.push(FrameRecord {
            seq: s.step,
            mode: Mode::Tracing,
            motion_ratio: None,
            command: Some(s.command),
            alarm: None,
            event: reason.and_then(|r| match r {
                Termination::Reached => Some(ReportEvent::Reached),
                Termination::Lost => Some(ReportEvent::Lost),
                Termination::MaxSteps => None,
            }),
        });
        trajectory.push(s);
        if let Some(r) = reason {
            termination = r;
            break;
        }
    }
    if termination == Termination::MaxSteps {
        report.warn(format!("no stop within {} steps", cfg.max_steps));
    }
    Ok(TraceOutcome {
        report,
        trajectory,
        termination,
        transcript: cl.transcript().to_vec(),
        received: cl.rover().received().to_vec(),
    })
}

pub const TRAJECTORY_HEADER: &str = "step\ttime_ms\tx\ty\theading_deg\tcommand\tpixels\tcentroid_x\tin_dead_zone";

pub fn trajectory_tsv(steps: &[TraceStep]) -> String {
    let mut out = String::from(TRAJECTORY_HEADER);
    out.push('\n');
    for s in steps {
        let cx = s
            .report
            .centroid
            .map_or_else(|| "-".to_string(), |(x, _)| format!("{x:.2}"));
        let _ = writeln!(
            out,
            "{}\t{}\t{:.4}\t{:.4}\t{:.3}\t{}\t{}\t{}\t{}",
            s.step,
            s.time_ms,
            s.pose.x,
            s.pose.y,
            s.pose.heading.to_degrees(),
            s.command.name(),
            s.report.total,
            cx,
            s.in_dead_zone as u8,
        );
    }
    out
}
