//! Tab-separated run reports.
//!
//! Columns, tab-separated: `seq mode motion_ratio command alarm event`.
//! A row looks like `3 MotionDetection 0.012500 - ALARM ALARM_RAISED`
//! with tabs between fields; `-` marks an empty field. Warnings and the summary are `#` lines after
//! the records.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use vmd_core::motion::AlarmPhase;
use vmd_core::protocol::Mode;
use vmd_core::rover::DriveCommand;

pub const HEADER: &str = "seq\tmode\tmotion_ratio\tcommand\talarm\tevent";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportEvent {
    AlarmRaised,
    Reached,
    Lost,
}

impl ReportEvent {
    pub fn name(self) -> &'static str {
        match self {
            ReportEvent::AlarmRaised => "ALARM_RAISED",
            ReportEvent::Reached => "REACHED",
            ReportEvent::Lost => "LOST",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameRecord {
    pub seq: u64,
    pub mode: Mode,
    /// `None` while the detector window is cold or outside motion detection.
    pub motion_ratio: Option<f64>,
    pub command: Option<DriveCommand>,
    pub alarm: Option<AlarmPhase>,
    pub event: Option<ReportEvent>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Summary {
    pub frames: usize,
    pub alarms: usize,
    pub commands: BTreeMap<&'static str, usize>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunReport {
    pub records: Vec<FrameRecord>,
    pub warnings: Vec<String>,
}

impl RunReport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, record: FrameRecord) {
        self.records.push(record);
    }

    pub fn warn(&mut self, message: impl Into<String>) {
        self.warnings.push(message.into());
    }

    /// Derived from the records, so it cannot disagree with them.
    pub fn summary(&self) -> Summary {
        let mut s = Summary {
            frames: self.records.len(),
            ..Summary::default()
        };
        for r in &self.records {
            if r.event == Some(ReportEvent::AlarmRaised) {
                s.alarms += 1;
            }
            if let Some(c) = r.command {
                *s.commands.entry(c.name()).or_default() += 1;
            }
        }
        s
    }

    pub fn alarm_frames(&self) -> Vec<u64> {
        self.records
            .iter()
            .filter(|r| r.event == Some(ReportEvent::AlarmRaised))
            .map(|r| r.seq)
            .collect()
    }

    pub fn commands(&self) -> Vec<DriveCommand> {
        self.records.iter().filter_map(|r| r.command).collect()
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        out.push_str(HEADER);
        out.push('\n');
        for r in &self.records {
            let ratio = r.motion_ratio.map_or_else(|| "-".to_string(), |v| format!("{v:.6}"));
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{}",
                r.seq,
                r.mode.name(),
                ratio,
                r.command.map_or("-", DriveCommand::name),
                r.alarm.map_or("-", AlarmPhase::name),
                r.event.map_or("-", ReportEvent::name),
            );
        }
        for w in &self.warnings {
            let _ = writeln!(out, "# warning: {}", w.replace('\n', " "));
        }
        let s = self.summary();
        let commands = if s.commands.is_empty() {
            "-".to_string()
        } else {
            s.commands
                .iter()
                .map(|(k, v)| format!("{k}:{v}"))
                .collect::<Vec<_>>()
                .join(",")
        };
        let _ = writeln!(
            out,
            "# summary frames={} alarms={} commands={}",
            s.frames, s.alarms, commands
        );
        out
    }
}
