use serde::Serialize;

use crate::laplace::FrameReport;

/// Per-frame time the interactive tool targets on a desktop CPU.
pub const FRAME_BUDGET_MS: f64 = 300.0;

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ReportRecord {
    Stage {
        stage: String,
        ms: f64,
    },
    Frame(FrameReport),
    Warning {
        stage: String,
        message: String,
    },
    Summary {
        mode: String,
        frames: usize,
        keypoints: usize,
        control_points: usize,
        total_ms: f64,
        ms_per_frame: f64,
        budget_ms_per_frame: f64,
        within_budget: bool,
    },
}

/// Run report, serialized as one JSON object per line.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Report {
    pub records: Vec<ReportRecord>,
}

impl Report {
    pub fn stage(&mut self, stage: &str, ms: f64) {
        log::info!("{stage}: {ms:.1} ms");
        self.records.push(ReportRecord::Stage { stage: stage.to_string(), ms });
    }

    pub fn warn(&mut self, stage: &str, message: impl Into<String>) {
        let message = message.into();
        log::warn!("{stage}: {message}");
        self.records.push(ReportRecord::Warning { stage: stage.to_string(), message });
    }

    pub fn warnings(&self) -> impl Iterator<Item = &str> {
        self.records.iter().filter_map(|r| match r {
            ReportRecord::Warning { message, .. } => Some(message.as_str()),
            _ => None,
        })
    }

    pub fn frames(&self) -> impl Iterator<Item = &FrameReport> {
        self.records.iter().filter_map(|r| match r {
            ReportRecord::Frame(f) => Some(f),
            _ => None,
        })
    }

    pub fn stage_ms(&self, stage: &str) -> Option<f64> {
        self.records.iter().find_map(|r| match r {
            ReportRecord::Stage { stage: s, ms } if s == stage => Some(*ms),
            _ => None,
        })
    }

    pub fn summary_ms_per_frame(&self) -> Option<f64> {
        self.records.iter().find_map(|r| match r {
            ReportRecord::Summary { ms_per_frame, .. } => Some(*ms_per_frame),
            _ => None,
        })
    }

    pub fn to_ndjson(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&serde_json::to_string(r).expect("report serializes"));
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_object_per_line() {
        let mut r = Report::default();
        r.stage("decode", 1.5);
        r.warn("layout", "glyph 'l' has only 4 control points");
        let text = r.to_ndjson();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0], r#"{"type":"stage","stage":"decode","ms":1.5}"#);
        let v: serde_json::Value = serde_json::from_str(lines[1]).unwrap();
        assert_eq!(v["type"], "warning");
        assert_eq!(r.warnings().count(), 1);
    }
}
