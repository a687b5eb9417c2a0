//! Modelling toolkit for heralded atom-photon entanglement sources with
//! cavity-enhanced retrieval.
//!
//! * [`model`]: closed-form retrieval decay, detection budgets, polarization
//!   correlations, CHSH quantities and count estimators.
//! * [`montecarlo`]: seeded discrete-event simulation of the trial sequence
//!   and Poisson bootstrap errors.
//! * [`repeater`]: multiplexed nested-repeater rate model and distance sweeps.
//! * [`calibration`]: fits of the free model parameters to measured points.
//!
//! The guide in `book/` walks through each part; its code blocks are compiled
//! and run as doc-tests of this crate.

pub mod calibration;
mod error;
pub mod model;
pub mod montecarlo;
pub mod repeater;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/intro.md")]
    mod intro {}
    #[doc = include_str!("../../../book/src/retrieval.md")]
    mod retrieval {}
    #[doc = include_str!("../../../book/src/detection.md")]
    mod detection {}
    #[doc = include_str!("../../../book/src/chsh.md")]
    mod chsh {}
    #[doc = include_str!("../../../book/src/montecarlo.md")]
    mod montecarlo {}
    #[doc = include_str!("../../../book/src/repeater.md")]
    mod repeater {}
    #[doc = include_str!("../../../book/src/calibration.md")]
    mod calibration {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
