//! Experiment plumbing: data files, splitting, repeated runs, smoothing and
//! output emission.

pub mod experiment;
pub mod loader;
pub mod output;
pub mod smooth;
pub mod split;

pub use experiment::{run_experiment, ExperimentConfig, ExperimentResult, Method, RunResult, ScatterPoint};
pub use loader::{load_cost_profile, load_dataset_csv, read_dataset, LoadedDataset};
pub use output::emit_outputs;
pub use smooth::{smooth_schedule, Lowess};
pub use split::{split_dataset, DatasetSplit};
