//! Batch jobs: configuration, planning, execution and validation.

mod config;
mod plan;
mod presets;
mod run;
mod validate;

pub use config::JobConfig;
pub use plan::{group_radar_frames, plan, task_seed, RadarFrame, Task, Work};
pub use presets::{presets, render_json, render_text, ParamInfo, PresetInfo};
pub use run::{run_occlude, RunSummary, MANIFEST_FILE};
pub use validate::{
    run_validate, NoiseValidation, RetentionValidation, SsimValidation, ValidateMode,
    ValidateOptions, ValidationOutcome, ValidationReport,
};
