//! Experiment configuration, the four trial modes, and report output.
//!
//! | mode | jammer | chain |
//! |------|--------|-------|
//! | t1 | off | beam, CFAR, MUSIC on the detection patch, error vs truth |
//! | t2 | on  | conventional and MVDR maps per steering angle, rejection, beamscan |
//! | t3 | on  | MVDR beam, CFAR, MUSIC (two sources) on the unfiltered cube |
//! | t4 | off | multi-dwell body, range alignment, autofocus, image |

mod config;
mod experiment;
mod report;

pub use config::{
    config_to_string, load_config, parse_config, write_config, ExperimentConfig, IsarConfig, Mode,
    ProcessingConfig,
};
pub use experiment::{
    provenance, run_experiment, DetectionRecord, ExperimentReport, IsarSummary, Provenance, RejectionRow,
    TruthComparison,
};
pub use report::{summary_text, write_report};
