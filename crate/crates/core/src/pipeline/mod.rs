//! End-to-end orchestration: decode, track, lay out, align, optimize,
//! render and encode.

mod config;
mod report;
mod run;
mod wordcloud;

pub use config::{
    ControlEdit, KeypointEdit, Mode, PipelineConfig, WordPlacement, DEFAULT_TRAJECTORY_DELAY,
};
pub use report::{Report, ReportRecord, FRAME_BUDGET_MS};
pub use run::{
    apply_control_edits, apply_keypoint_edits, load_inputs, run_pipeline, run_with_inputs, Artifacts,
    MotionInput, PipelineError, PipelineInputs,
};
pub use wordcloud::{build_word_cloud, spiral_layout, PlacedWord, WordCloud};
