//! Closed-form model of the source: retrieval decay, detection budgets,
//! polarization correlations, CHSH quantities and the count estimators.
//!
//! Everything here is a pure function of its arguments.

mod cavity;
mod chsh;
mod detection;
mod estimators;
mod params;
mod retrieval;

pub use cavity::{cavity_fsr, cavity_linewidths, SPEED_OF_LIGHT};
pub use chsh::{
    analytic_bell, bell_parameter, coincidence_probabilities, correlation_e, fidelity_from_bell,
    readout_model, werner_from_fidelity, werner_projections, OutcomeProbabilities, ReadoutModel,
    TSIRELSON,
};
pub use detection::{escape_efficiency, total_detection_efficiency, transmission_efficiency};
pub use estimators::{estimate_intrinsic_retrieval, Estimate, RetrievalEstimates};
pub use params::{
    CavityParams, CoincidenceCounts, DecayModel, DetectionChain, MeasurementSettings,
    SourceParams,
};
pub use retrieval::retrieval_efficiency;
