//! The four case studies: k-star counts, entropy, partition function and
//! profile, on synthetic or ingested data, with CSV output.

mod data;
mod harness;
mod report;

pub use data::{
    erdos_renyi, ingest_edge_list, ingest_histogram, parse_edge_list, parse_histogram,
    uniform_histogram, zipf_histogram, EdgeListGraph, Histogram,
};
pub use harness::{
    experiment_entropy, experiment_kstars, experiment_partition, experiment_profile, ExperimentRun,
    TrialConfig,
};
pub use report::{
    emit_csv, read_csv, summarize, write_csv, RunMetadata, Summary, TrialRecord, CSV_HEADER,
};
