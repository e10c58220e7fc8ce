//! The control centre as a synchronous state machine.
//!
//! Sessions, the active mode, the alarm, the tracker and the frame loop live
//! here. Time and the rover are passed in, so the same code runs under the
//! network server and under simulated clocks in tests.

use std::collections::BTreeMap;
use std::path::PathBuf;

use thiserror::Error;
use vmd_core::imaging::{
    into_gray, parse_scene, read_sequence, render_scene, write_sequence, Frame, FrameSequence, ImagingError, Scene,
};
use vmd_core::motion::{motion_ratio, AlarmEvent, AlarmPhase, AlarmState, DetectorConfig, MotionDetector, MotionError};
use vmd_core::protocol::{
    mode_transition, session_step, Action, ControlMessage, FramePayload, Mode, SessionPhase, SessionState,
};
use vmd_core::rover::{Command, DriveCommand, RoverState, SerialLink};
use vmd_core::tracker::{overlay, track_step, ColorReference, TrackerConfig};

use crate::config::{CentreConfig, FrameSourceConfig};
use crate::report::{FrameRecord, ReportEvent};
use crate::rover_link::RoverLink;

pub type SessionId = u64;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Source {
        path: PathBuf,
        #[source]
        source: ImagingError,
    },
    #[error("replay sequence is empty")]
    EmptySequence,
    #[error(transparent)]
    Imaging(#[from] ImagingError),
    #[error(transparent)]
    Motion(#[from] MotionError),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Outgoing {
    Send(SessionId, ControlMessage),
    /// Flush what was queued for the session, then drop the connection.
    Close(SessionId),
}

/// Where captured frames come from.
#[derive(Debug, Clone)]
pub enum FrameSource {
    /// Rendered from the rover's current pose.
    Scene { scene: Scene, width: u32, height: u32 },
    /// A recorded sequence, looped.
    Replay { frames: Vec<Frame>, next: usize },
}

impl FrameSource {
    pub fn load(cfg: &CentreConfig) -> Result<Self, EngineError> {
        let read = |path: &PathBuf| {
            std::fs::read(path).map_err(|source| EngineError::Io {
                path: path.clone(),
                source,
            })
        };
        match &cfg.source {
            FrameSourceConfig::Scene(path) => {
                let text = String::from_utf8_lossy(&read(path)?).into_owned();
                let scene = parse_scene(&text).map_err(|source| EngineError::Source {
                    path: path.clone(),
                    source,
                })?;
                Ok(FrameSource::Scene {
                    scene,
                    width: cfg.width,
                    height: cfg.height,
                })
            }
            FrameSourceConfig::Sequence(path) => {
                let seq = read_sequence(&read(path)?).map_err(|source| EngineError::Source {
                    path: path.clone(),
                    source,
                })?;
                Self::replay(seq)
            }
        }
    }

    pub fn replay(seq: FrameSequence) -> Result<Self, EngineError> {
        if seq.is_empty() {
            return Err(EngineError::EmptySequence);
        }
        Ok(FrameSource::Replay {
            frames: seq.into_frames(),
            next: 0,
        })
    }

    fn capture(&mut self, pose: &RoverState) -> Result<Frame, ImagingError> {
        match self {
            FrameSource::Scene { scene, width, height } => {
                render_scene(scene, pose, *width, *height, pose.lights, pose.night_vision)
            }
            FrameSource::Replay { frames, next } => {
                let f = frames[*next % frames.len()].clone();
                *next += 1;
                Ok(f)
            }
        }
    }
}

#[derive(Debug, Default)]
pub struct TickOutput {
    pub outgoing: Vec<Outgoing>,
    /// `None` when nothing was captured (camera stopped).
    pub record: Option<FrameRecord>,
}

#[derive(Debug)]
pub struct Centre {
    secret: String,
    mode: Mode,
    alarm: AlarmState,
    detector_cfg: DetectorConfig,
    detector: MotionDetector,
    tracker_cfg: TrackerConfig,
    color: ColorReference,
    source: FrameSource,
    sessions: BTreeMap<SessionId, SessionState>,
    next_session: SessionId,
    ready: Option<SessionId>,
    link: SerialLink,
    frame_seq: u64,
    last_frame: Option<Frame>,
    recording: Option<Vec<Frame>>,
    record_dir: Option<PathBuf>,
    recordings_written: Vec<PathBuf>,
}

impl Centre {
    /// Builds the centre in IDLE alarm phase with the configured start mode;
    /// starting in motion detection arms the alarm straight away.
    pub fn new(cfg: &CentreConfig, source: FrameSource) -> Result<Self, EngineError> {
        let mut c = Centre {
            secret: cfg.shared_secret.clone(),
            mode: Mode::PcControl,
            alarm: AlarmState::new(&cfg.alarm_password),
            detector_cfg: cfg.detector.clone(),
            detector: MotionDetector::new(cfg.detector.clone())?,
            tracker_cfg: cfg.tracker.clone(),
            color: cfg.color,
            source,
            sessions: BTreeMap::new(),
            next_session: 1,
            ready: None,
            link: SerialLink::new(),
            frame_seq: 0,
            last_frame: None,
            recording: None,
            record_dir: cfg.record_dir.clone(),
            recordings_written: Vec::new(),
        };
        if cfg.initial_mode == Mode::MotionDetection {
            c.alarm = c.alarm.arm();
        }
        c.mode = cfg.initial_mode;
        Ok(c)
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn alarm_phase(&self) -> AlarmPhase {
        self.alarm.phase
    }

    pub fn color(&self) -> ColorReference {
        self.color
    }

    pub fn ready_session(&self) -> Option<SessionId> {
        self.ready
    }

    pub fn session(&self, id: SessionId) -> Option<&SessionState> {
        self.sessions.get(&id)
    }

    /// Bytes of every packet sent toward the rover.
    pub fn transcript(&self) -> &[u8] {
        self.link.transcript()
    }

    pub fn last_frame(&self) -> Option<&Frame> {
        self.last_frame.as_ref()
    }

    pub fn recordings(&self) -> &[PathBuf] {
        &self.recordings_written
    }

    pub fn connect(&mut self) -> SessionId {
        let id = self.next_session;
        self.next_session += 1;
        self.sessions.insert(id, SessionState::default());
        id
    }

    /// Transport went away. Manual modes stop the rover when the operator
    /// holding the Ready slot disappears.
    pub fn disconnect(&mut self, id: SessionId, now_ms: u64, rover: &mut dyn RoverLink) {
        if self.sessions.remove(&id).is_some() && self.ready == Some(id) {
            self.ready = None;
            if self.mode.accepts_manual_drive() {
                self.send_rover(Command::Drive(DriveCommand::Stop), now_ms, rover);
            }
        }
    }

    pub fn handle(
        &mut self,
        id: SessionId,
        msg: &ControlMessage,
        now_ms: u64,
        rover: &mut dyn RoverLink,
    ) -> Vec<Outgoing> {
        let Some(before) = self.sessions.get(&id).cloned() else {
            return Vec::new();
        };
        let step = session_step(&before, msg, &self.secret);
        let mut state = step.state;
        let mut replies = step.outgoing;
        if let Some(e) = &step.error {
            tracing::info!(session = id, "session error: {e}");
        }

        if before.phase == SessionPhase::AwaitHello && state.phase == SessionPhase::Ready {
            if self.ready.is_some() {
                replies = vec![ControlMessage::HelloErr { reason: "busy".into() }];
                state.phase = SessionPhase::Closed;
            } else {
                self.ready = Some(id);
                replies.push(ControlMessage::ModeOk(self.mode));
            }
        }

        let mut out: Vec<Outgoing> = replies.into_iter().map(|m| Outgoing::Send(id, m)).collect();
        for action in step.actions {
            self.apply(id, action, now_ms, rover, &mut out);
        }

        if state.phase == SessionPhase::Closed {
            self.sessions.insert(id, state);
            self.disconnect(id, now_ms, rover);
            out.push(Outgoing::Close(id));
        } else {
            self.sessions.insert(id, state);
        }
        out
    }

    fn send_rover(&mut self, cmd: Command, now_ms: u64, rover: &mut dyn RoverLink) {
        let packet = self.link.transmit(cmd);
        rover.transmit(packet, now_ms);
    }

    fn apply(
        &mut self,
        id: SessionId,
        action: Action,
        now_ms: u64,
        rover: &mut dyn RoverLink,
        out: &mut Vec<Outgoing>,
    ) {
        match action {
            Action::Rover(cmd @ Command::Drive(_)) => {
                if self.mode.accepts_manual_drive() {
                    self.send_rover(cmd, now_ms, rover);
                } else {
                    tracing::debug!(mode = %self.mode, "ignoring {cmd}");
                }
            }
            Action::Rover(cmd @ Command::Aux(_)) => self.send_rover(cmd, now_ms, rover),
            Action::ModeChange(m) => {
                self.set_mode(m, now_ms, rover);
                out.push(Outgoing::Send(id, ControlMessage::ModeOk(self.mode)));
            }
            Action::Snapshot => {
                let frame = match &self.last_frame {
                    Some(f) => Some(f.clone()),
                    None => self.source.capture(&rover.state()).ok(),
                };
                if let Some(f) = frame {
                    out.push(Outgoing::Send(
                        id,
                        ControlMessage::Snapshot(FramePayload::from_frame(&f)),
                    ));
                }
            }
            Action::Disarm(password) => {
                let ok = match self.alarm.disarm(&password) {
                    Ok(next) => {
                        self.alarm = next;
                        self.detector.reset();
                        true
                    }
                    Err(_) => false,
                };
                out.push(Outgoing::Send(id, ControlMessage::DisarmResult { ok }));
            }
            Action::SetColorRef(c) => self.color = c,
            Action::Record(true) => {
                self.recording.get_or_insert_with(Vec::new);
            }
            Action::Record(false) => self.finish_recording(),
            Action::StopMonitoring => self.stop_monitoring(),
        }
    }

    fn stop_monitoring(&mut self) {
        self.alarm = self.alarm.stop_monitoring();
        self.detector.reset();
    }

    /// Applies the mode switch rules. Selecting motion detection while the
    /// alarm is IDLE (including re-selecting it after a disarm) arms it.
    /// Returns whether the requested mode is now active.
    pub fn set_mode(&mut self, requested: Mode, now_ms: u64, rover: &mut dyn RoverLink) -> bool {
        match mode_transition(self.mode, requested, self.alarm.phase) {
            Ok((mode, teardown)) => {
                for action in teardown {
                    match action {
                        Action::Rover(cmd) => self.send_rover(cmd, now_ms, rover),
                        Action::StopMonitoring => self.stop_monitoring(),
                        other => tracing::warn!("unexpected teardown action {other:?}"),
                    }
                }
                if mode == Mode::MotionDetection && self.alarm.phase == AlarmPhase::Idle {
                    self.alarm = self.alarm.arm();
                    self.detector.reset();
                }
                self.mode = mode;
                true
            }
            Err(locked) => {
                tracing::info!("mode change to {requested} refused: {locked}");
                false
            }
        }
    }

    fn finish_recording(&mut self) {
        let Some(frames) = self.recording.take() else {
            return;
        };
        let Some(dir) = &self.record_dir else {
            tracing::warn!(
                "recording stopped but no record_dir configured; {} frames discarded",
                frames.len()
            );
            return;
        };
        let bytes = match FrameSequence::new(frames) {
            Ok(seq) => write_sequence(&seq),
            Err(e) => {
                tracing::warn!("recording discarded: {e}");
                return;
            }
        };
        let path = dir.join(format!("recording_{:03}.srseq", self.recordings_written.len() + 1));
        match std::fs::write(&path, bytes) {
            Ok(()) => self.recordings_written.push(path),
            Err(e) => tracing::warn!("cannot write {}: {e}", path.display()),
        }
    }

    /// One frame period: capture, run the active mode's processing, stream
    /// the frame to the Ready session and report alarms.
    pub fn tick(&mut self, now_ms: u64, rover: &mut dyn RoverLink) -> Result<TickOutput, EngineError> {
        let pose = rover.state();
        if !pose.camera_on {
            return Ok(TickOutput::default());
        }
        let seq = self.frame_seq;
        self.frame_seq += 1;
        let frame = self.source.capture(&pose)?.with_meta(seq, now_ms);
        let mut record = FrameRecord {
            seq,
            mode: self.mode,
            motion_ratio: None,
            command: None,
            alarm: None,
            event: None,
        };
        let mut outgoing = Vec::new();
        let mut shown = None;

        match self.mode {
            Mode::Tracing => {
                let out = track_step(&frame, &self.color, &self.tracker_cfg)?;
                self.send_rover(Command::Drive(out.command), now_ms, rover);
                record.command = Some(out.command);
                shown = Some(overlay(&frame, &out.mask)?);
            }
            Mode::MotionDetection => {
                if let Some(mask) = self.detector.push(into_gray(frame.clone())?)? {
                    record.motion_ratio = Some(motion_ratio(&mask));
                    if self.alarm.phase == AlarmPhase::Monitoring {
                        let (next, events) = self.alarm.step(&mask, &self.detector_cfg)?;
                        self.alarm = next;
                        if events.contains(&AlarmEvent::AlarmRaised) {
                            record.event = Some(ReportEvent::AlarmRaised);
                        }
                    }
                }
                record.alarm = Some(self.alarm.phase);
            }
            Mode::PcControl | Mode::InternetControl => {}
        }

        if let Some(ready) = self.ready {
            let payload = FramePayload::from_frame(shown.as_ref().unwrap_or(&frame));
            outgoing.push(Outgoing::Send(ready, ControlMessage::Frame(payload)));
            if record.event == Some(ReportEvent::AlarmRaised) {
                outgoing.push(Outgoing::Send(ready, ControlMessage::AlarmEvent { seq: seq as u32 }));
            }
        }
        if let Some(rec) = &mut self.recording {
            rec.push(frame.clone());
        }
        self.last_frame = Some(frame);
        Ok(TickOutput {
            outgoing,
            record: Some(record),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rover_link::LocalRover;
    use vmd_core::imaging::PixelFormat;
    use vmd_core::rover::AuxCommand;

    const SECRET: &str = "s3cret";
    const PASSWORD: &str = "open sesame";

    fn config() -> CentreConfig {
        CentreConfig::new(FrameSourceConfig::Scene("unused".into()), SECRET, PASSWORD)
    }

    fn scene_source() -> FrameSource {
        let scene = Scene::new(60)
            .with_object_at_bearing(3.0, 0.0, 0.5, [255, 0, 0])
            .unwrap();
        FrameSource::Scene {
            scene,
            width: 320,
            height: 240,
        }
    }

    fn setup() -> (Centre, LocalRover) {
        (
            Centre::new(&config(), scene_source()).unwrap(),
            LocalRover::new(RoverState::default(), 2000),
        )
    }

    fn hello(c: &mut Centre, r: &mut LocalRover) -> SessionId {
        let id = c.connect();
        let out = c.handle(id, &ControlMessage::Hello { secret: SECRET.into() }, 0, r);
        assert_eq!(out[0], Outgoing::Send(id, ControlMessage::HelloOk));
        id
    }

    #[test]
    fn drive_reaches_rover_through_codec() {
        let (mut c, mut r) = setup();
        let id = hello(&mut c, &mut r);
        c.handle(id, &ControlMessage::Drive(DriveCommand::Forward), 10, &mut r);
        assert_eq!(r.state().active_drive, DriveCommand::Forward);
        assert_eq!(SerialLink::replay(c.transcript()).unwrap(), r.received());
    }

    #[test]
    fn second_hello_is_busy() {
        let (mut c, mut r) = setup();
        let first = hello(&mut c, &mut r);
        let second = c.connect();
        let out = c.handle(second, &ControlMessage::Hello { secret: SECRET.into() }, 0, &mut r);
        assert_eq!(
            out,
            vec![
                Outgoing::Send(second, ControlMessage::HelloErr { reason: "busy".into() }),
                Outgoing::Close(second)
            ]
        );
        assert_eq!(c.ready_session(), Some(first));
    }

    #[test]
    fn slot_frees_on_disconnect_and_rover_stops() {
        let (mut c, mut r) = setup();
        let first = hello(&mut c, &mut r);
        c.handle(first, &ControlMessage::Drive(DriveCommand::Forward), 0, &mut r);
        c.disconnect(first, 5, &mut r);
        assert_eq!(r.state().active_drive, DriveCommand::Stop);
        assert_eq!(c.ready_session(), None);
        hello(&mut c, &mut r);
    }

    #[test]
    fn drive_ignored_outside_manual_modes() {
        let (mut c, mut r) = setup();
        let id = hello(&mut c, &mut r);
        for mode in [Mode::Tracing, Mode::MotionDetection] {
            let out = c.handle(id, &ControlMessage::ModeSet(mode), 0, &mut r);
            assert!(out.contains(&Outgoing::Send(id, ControlMessage::ModeOk(mode))));
            let before = c.transcript().len();
            c.handle(id, &ControlMessage::Drive(DriveCommand::Forward), 0, &mut r);
            assert_eq!(c.transcript().len(), before);
        }
        // aux still goes through
        c.handle(id, &ControlMessage::Aux(AuxCommand::LightsOn.into()), 0, &mut r);
        assert!(r.state().lights);
    }

    fn flicker_source() -> FrameSource {
        let frames = (0..2u8)
            .map(|i| {
                Frame::filled(16, 16, PixelFormat::Gray8, i * 200)
                    .unwrap()
                    .with_meta(i as u64, 0)
            })
            .collect();
        FrameSource::replay(FrameSequence::new(frames).unwrap()).unwrap()
    }

    #[test]
    fn alarm_locks_mode_until_disarm() {
        let mut c = Centre::new(&config(), flicker_source()).unwrap();
        let mut r = LocalRover::new(RoverState::default(), 2000);
        let id = hello(&mut c, &mut r);
        c.handle(id, &ControlMessage::ModeSet(Mode::MotionDetection), 0, &mut r);
        assert_eq!(c.alarm_phase(), AlarmPhase::Monitoring);
        let mut raised = Vec::new();
        for t in 0..10u64 {
            for o in c.tick(t * 100, &mut r).unwrap().outgoing {
                if let Outgoing::Send(_, ControlMessage::AlarmEvent { seq }) = o {
                    raised.push(seq);
                }
            }
        }
        // first mask at frame 3, two consecutive hits, then latched
        assert_eq!(raised, vec![4]);
        assert_eq!(c.alarm_phase(), AlarmPhase::Alarm);
        let out = c.handle(id, &ControlMessage::ModeSet(Mode::PcControl), 0, &mut r);
        assert!(out.contains(&Outgoing::Send(id, ControlMessage::ModeOk(Mode::MotionDetection))));
        let out = c.handle(
            id,
            &ControlMessage::Disarm {
                password: "nope".into(),
            },
            0,
            &mut r,
        );
        assert!(out.contains(&Outgoing::Send(id, ControlMessage::DisarmResult { ok: false })));
        assert_eq!(c.alarm_phase(), AlarmPhase::Alarm);
        let out = c.handle(
            id,
            &ControlMessage::Disarm {
                password: PASSWORD.into(),
            },
            0,
            &mut r,
        );
        assert!(out.contains(&Outgoing::Send(id, ControlMessage::DisarmResult { ok: true })));
        assert_eq!(c.alarm_phase(), AlarmPhase::Idle);
        c.handle(id, &ControlMessage::ModeSet(Mode::PcControl), 0, &mut r);
        assert_eq!(c.mode(), Mode::PcControl);
    }

    #[test]
    fn leaving_monitoring_goes_idle() {
        let (mut c, mut r) = setup();
        assert!(c.set_mode(Mode::MotionDetection, 0, &mut r));
        assert_eq!(c.alarm_phase(), AlarmPhase::Monitoring);
        assert!(c.set_mode(Mode::Tracing, 0, &mut r));
        assert_eq!(c.alarm_phase(), AlarmPhase::Idle);
    }

    #[test]
    fn tracing_streams_overlay_and_steers() {
        let (mut c, mut r) = setup();
        let id = hello(&mut c, &mut r);
        c.handle(id, &ControlMessage::ModeSet(Mode::Tracing), 0, &mut r);
        let out = c.tick(0, &mut r).unwrap();
        assert_eq!(out.record.unwrap().command, Some(DriveCommand::Forward));
        assert_eq!(r.state().active_drive, DriveCommand::Forward);
        let Outgoing::Send(_, ControlMessage::Frame(p)) = &out.outgoing[0] else {
            panic!("expected a frame, got {:?}", out.outgoing);
        };
        assert_eq!(p.format, PixelFormat::Rgb24);
        // overlay paints matches pure red on a gray image
        let f = p.to_frame().unwrap();
        assert_eq!(f.rgb_at(160, 120), [255, 0, 0]);
        assert_eq!(f.rgb_at(0, 0), [60, 60, 60]);
    }

    #[test]
    fn tracing_to_pc_control_emits_stop() {
        let (mut c, mut r) = setup();
        c.set_mode(Mode::Tracing, 0, &mut r);
        c.tick(0, &mut r).unwrap();
        assert_eq!(r.state().active_drive, DriveCommand::Forward);
        c.set_mode(Mode::PcControl, 100, &mut r);
        assert_eq!(r.state().active_drive, DriveCommand::Stop);
        assert_eq!(r.received().last(), Some(&Command::Drive(DriveCommand::Stop)));
    }

    #[test]
    fn camera_stop_pauses_capture() {
        let (mut c, mut r) = setup();
        let id = hello(&mut c, &mut r);
        c.handle(id, &ControlMessage::Aux(AuxCommand::CameraStop.into()), 0, &mut r);
        assert!(c.tick(0, &mut r).unwrap().record.is_none());
        c.handle(id, &ControlMessage::Aux(AuxCommand::CameraStart.into()), 0, &mut r);
        assert!(c.tick(100, &mut r).unwrap().record.is_some());
    }

    #[test]
    fn snapshot_returns_last_frame() {
        let (mut c, mut r) = setup();
        let id = hello(&mut c, &mut r);
        let out = c.handle(id, &ControlMessage::SnapshotReq, 0, &mut r);
        assert!(matches!(out[0], Outgoing::Send(_, ControlMessage::Snapshot(_))));
        c.tick(0, &mut r).unwrap();
        let out = c.handle(id, &ControlMessage::SnapshotReq, 0, &mut r);
        let Outgoing::Send(_, ControlMessage::Snapshot(p)) = &out[0] else {
            panic!()
        };
        assert_eq!(p.to_frame().unwrap().data(), c.last_frame().unwrap().data());
    }

    #[test]
    fn color_reference_update() {
        let (mut c, mut r) = setup();
        let id = hello(&mut c, &mut r);
        c.handle(
            id,
            &ControlMessage::SetColorRef {
                rgb: [0, 255, 0],
                tolerance: 30,
            },
            0,
            &mut r,
        );
        assert_eq!(c.color(), ColorReference::new([0, 255, 0], 30));
    }

    #[test]
    fn recording_writes_sequence() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = config();
        cfg.record_dir = Some(dir.path().to_path_buf());
        let mut c = Centre::new(&cfg, scene_source()).unwrap();
        let mut r = LocalRover::new(RoverState::default(), 2000);
        let id = hello(&mut c, &mut r);
        c.handle(
            id,
            &ControlMessage::Aux(vmd_core::protocol::AuxRequest::RecordStart),
            0,
            &mut r,
        );
        for t in 0..3 {
            c.tick(t * 100, &mut r).unwrap();
        }
        c.handle(
            id,
            &ControlMessage::Aux(vmd_core::protocol::AuxRequest::RecordStop),
            300,
            &mut r,
        );
        let path = &c.recordings()[0];
        let seq = read_sequence(&std::fs::read(path).unwrap()).unwrap();
        assert_eq!(seq.len(), 3);
        assert!(r.received().is_empty(), "recording is centre-local");
    }

    #[test]
    fn replay_loops() {
        let frames = (0..2)
            .map(|i| {
                Frame::filled(8, 8, PixelFormat::Gray8, i * 100)
                    .unwrap()
                    .with_meta(i as u64, 0)
            })
            .collect();
        let src = FrameSource::replay(FrameSequence::new(frames).unwrap()).unwrap();
        let mut c = Centre::new(&config(), src).unwrap();
        let mut r = LocalRover::new(RoverState::default(), 2000);
        c.set_mode(Mode::MotionDetection, 0, &mut r);
        for t in 0..6 {
            let rec = c.tick(t * 100, &mut r).unwrap().record.unwrap();
            assert_eq!(rec.seq, t);
        }
        assert_eq!(c.last_frame().unwrap().data()[0], 100);
    }
}
