//! Batch motion detection over a recorded sequence.

use vmd_core::imaging::{into_gray, FrameSequence};
use vmd_core::motion::{
    motion_ratio, AlarmEvent, AlarmState, DetectorConfig, MotionDetector, MotionError, MotionMask, PasswordDigest,
};
use vmd_core::protocol::Mode;

use crate::report::{FrameRecord, ReportEvent, RunReport};

#[derive(Debug)]
pub struct Analysis {
    pub report: RunReport,
    /// Detector output per frame seq, once the window is warm.
    pub masks: Vec<(u64, MotionMask)>,
}

/// Runs the four-frame detector and the alarm latch over every frame. The
/// alarm is armed at the first frame and never disarmed, so at most one
/// alarm is raised.
pub fn analyze(seq: &FrameSequence, cfg: &DetectorConfig) -> Result<Analysis, MotionError> {
    let mut detector = MotionDetector::new(cfg.clone())?;
    // the password is never checked here; a fixed salt keeps runs identical
    let mut alarm = AlarmState::with_digest(PasswordDigest::with_salt("", [0; 16])).arm();
    let mut report = RunReport::new();
    let mut masks = Vec::new();

    if seq.len() < 4 {
        report.warn(format!(
            "sequence has {} frame(s); the detector needs 4, no motion output produced",
            seq.len()
        ));
    }

    for frame in seq.frames() {
        let gray = into_gray(frame.clone())?;
        let mut record = FrameRecord {
            seq: frame.seq,
            mode: Mode::MotionDetection,
            motion_ratio: None,
            command: None,
            alarm: Some(alarm.phase),
            event: None,
        };
        if let Some(mask) = detector.push(gray)? {
            record.motion_ratio = Some(motion_ratio(&mask));
            let (next, events) = alarm.step(&mask, cfg)?;
            alarm = next;
            record.alarm = Some(alarm.phase);
            if events.contains(&AlarmEvent::AlarmRaised) {
                record.event = Some(ReportEvent::AlarmRaised);
            }
            masks.push((frame.seq, mask));
        }
        report.push(record);
    }
    Ok(Analysis { report, masks })
}

/// `mask_<seq>.pgm`, zero-padded so a directory listing sorts by frame.
pub fn mask_file_name(seq: u64) -> String {
    format!("mask_{seq:06}.pgm")
}

#[cfg(test)]
mod tests {
    use super::*;
    use vmd_core::imaging::{Frame, PixelFormat};

    fn constant_sequence(n: usize) -> FrameSequence {
        let frames = (0..n)
            .map(|i| {
                Frame::filled(16, 16, PixelFormat::Gray8, 90)
                    .unwrap()
                    .with_meta(i as u64, i as u64 * 100)
            })
            .collect();
        FrameSequence::new(frames).unwrap()
    }

    fn flicker_sequence(n: usize) -> FrameSequence {
        let frames = (0..n)
            .map(|i| {
                let v = if i % 2 == 0 { 0 } else { 200 };
                Frame::filled(16, 16, PixelFormat::Gray8, v)
                    .unwrap()
                    .with_meta(i as u64, i as u64 * 100)
            })
            .collect();
        FrameSequence::new(frames).unwrap()
    }

    #[test]
    fn static_scene_never_alarms() {
        let a = analyze(&constant_sequence(30), &DetectorConfig::default()).unwrap();
        assert_eq!(a.report.summary().alarms, 0);
        assert_eq!(a.report.records.len(), 30);
        assert_eq!(a.masks.len(), 27);
        assert!(a.masks.iter().all(|(_, m)| m.is_empty()));
    }

    #[test]
    fn short_sequence_warns() {
        let a = analyze(&constant_sequence(3), &DetectorConfig::default()).unwrap();
        assert_eq!(a.report.records.len(), 3);
        assert!(a.report.records.iter().all(|r| r.motion_ratio.is_none()));
        assert!(a.masks.is_empty());
        assert_eq!(a.report.warnings.len(), 1);
    }

    #[test]
    fn whole_frame_flicker_alarms_once_at_persist_k() {
        let cfg = DetectorConfig::default();
        let a = analyze(&flicker_sequence(12), &cfg).unwrap();
        // first mask at frame 3, persist_k = 2 consecutive hits
        assert_eq!(a.report.alarm_frames(), vec![4]);
    }

    #[test]
    fn deterministic() {
        let cfg = DetectorConfig::default();
        let a = analyze(&flicker_sequence(10), &cfg).unwrap().report.to_tsv();
        let b = analyze(&flicker_sequence(10), &cfg).unwrap().report.to_tsv();
        assert_eq!(a, b);
    }
}
