//! Model files, CSV output, thread pools and the `stochar` command line on
//! top of [`stochar_core`].

pub mod cli;
pub mod exec;
pub mod func;
pub mod output;
pub mod spec;

pub use exec::RayonExecutor;
pub use spec::{load_model, load_model_str, LoadedModel, NoiseRule};
