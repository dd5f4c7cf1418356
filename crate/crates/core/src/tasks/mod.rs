//! Task streams: synthetic generators, the lower-bound adversary, CSV
//! ingestion and the hindsight oracle.

mod adversary;
mod csv_io;
mod generator;
mod oracle;
mod sequence;

pub use adversary::AdversaryStream;
pub use csv_io::{load_csv_tasks, parse_csv_tasks, write_csv_tasks, CsvSchema};
pub use generator::{
    gen_clustered_logistic, sample_task_stream, unit_ball, unit_sphere, ClusteredLogistic, LogisticTask,
    QuadraticMeta, QuadraticTask,
};
pub use oracle::{hindsight_oracle, OracleConfig, OracleResult, OracleStatus};
pub use sequence::{MetaDistribution, TaskDistribution, TaskSequence};
