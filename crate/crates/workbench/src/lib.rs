//! Pipeline assembly, benchmark harness and HTTP session API.

pub mod bench;
pub mod dataset;
pub mod pipeline;
pub mod server;

pub use bench::{run_bench, BenchReport, Source};
pub use dataset::{load_dataset, BenchCase, DatasetError};
pub use pipeline::{assemble, Assembly, PipelineError};
