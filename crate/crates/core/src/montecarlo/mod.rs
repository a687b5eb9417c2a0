//! Discrete-event Monte Carlo of the write/herald/read trial sequence.
//!
//! Every trial draws from its own generator keyed by
//! `(master_seed, cycle, trial)`; cycles are simulated in parallel and merged
//! in cycle order, so counts are bit-identical for any worker count.

mod bootstrap;
mod engine;
mod seed;
mod sequence;
mod sweep;

pub use bootstrap::{bootstrap_errors, BootstrapErrors, RetrievalErrors};
pub use engine::{
    run_trials, write_records, AntiStokesDetector, ClickRecord, RunOutput, Simulator,
    StokesDetector,
};
pub use seed::SeedSpec;
pub use sequence::SequenceConfig;
pub use sweep::{
    expected_estimators, simulate_storage_time, sweep_storage_time, Budget,
    ExpectedEstimators, StorageRow,
};
