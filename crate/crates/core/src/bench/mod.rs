//! Benchmark harness: instance registry, batch runs, result files and the
//! sign test.

pub mod batch;
pub mod record;
pub mod registry;

pub use batch::{find_instance_file, load_instance, run_batch, run_once, BatchResult, BatchSpec};
pub use record::{export_results, read_results, summarize, Format, InstanceSummary, RunRecord};
pub use registry::{InstanceMeta, Registry};
pub use sign_test::{sign_test, ComparisonReport, Indicator};
