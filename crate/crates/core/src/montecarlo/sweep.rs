use serde::{Deserialize, Serialize};

use super::bootstrap::bootstrap_errors;
use super::engine::Simulator;
use super::seed::SeedSpec;
use crate::error::{Error, Result};
use crate::model::{
    bell_parameter, coincidence_probabilities, correlation_e, estimate_intrinsic_retrieval,
    CoincidenceCounts, Estimate, MeasurementSettings,
};

/// How much to simulate at each measurement setting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Budget {
    Cycles(u64),
    /// Approximate number of trials (whole cycles are always simulated).
    Trials(u64),
    /// Approximate number of heralds.
    Heralds(u64),
}

impl Budget {
    pub fn cycles(&self, sim: &Simulator) -> u64 {
        match *self {
            Budget::Cycles(c) => c,
            Budget::Trials(t) => sim.cycles_for_trials(t),
            Budget::Heralds(h) => sim.cycles_for_heralds(h),
        }
    }
}

/// Expected values of the estimators under the analytic model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpectedEstimators {
    pub r_qu: f64,
    pub r_l: f64,
    pub r_r: f64,
    pub correlations: [f64; 4],
    pub s_bell: f64,
}

/// Expectation of every count estimator at storage time `t`.
///
/// The retrieval estimators include the background share that lands on the
/// D₁D₃/D₂D₄ coincidences.
pub fn expected_estimators(sim: &Simulator, t: f64) -> Result<ExpectedEstimators> {
    let eta = sim.read_eta();
    let p = coincidence_probabilities(
        sim.source(),
        sim.decay(),
        t,
        eta,
        &MeasurementSettings::aligned(),
    )?;
    // Each Stokes detector fires on half of the heralds.
    let r_l = p.p13 / (eta * 0.5);
    let r_r = p.p24 / (eta * 0.5);
    let mut correlations = [0.0; 4];
    for (e, set) in correlations
        .iter_mut()
        .zip(MeasurementSettings::canonical_chsh())
    {
        *e = coincidence_probabilities(sim.source(), sim.decay(), t, eta, &set)?.correlation();
    }
    Ok(ExpectedEstimators {
        r_qu: (p.p13 + p.p24) / eta,
        r_l,
        r_r,
        correlations,
        s_bell: bell_parameter(correlations),
    })
}

/// One storage time of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StorageRow {
    /// Seconds.
    pub t: f64,
    pub r_qu: Estimate,
    pub r_l: Estimate,
    pub r_r: Estimate,
    pub correlations: [Estimate; 4],
    pub s_bell: Estimate,
    /// Counts at θ_S = θ_AS = 0°.
    pub aligned: CoincidenceCounts,
    /// Counts at the four CHSH settings.
    pub chsh: [CoincidenceCounts; 4],
    pub expected: ExpectedEstimators,
}

/// Simulates one storage time: an aligned run for the retrieval estimators
/// and four runs at the canonical CHSH settings.
pub fn simulate_storage_time(
    sim: &Simulator,
    t: f64,
    budget: Budget,
    n_resamples: usize,
    seed: &SeedSpec,
) -> Result<StorageRow> {
    let sim = sim.clone().with_storage_time(t)?;
    let cycles = budget.cycles(&sim);
    let aligned = sim
        .run(&MeasurementSettings::aligned(), cycles, &seed.substream(0))?
        .counts;
    let mut chsh = [CoincidenceCounts::default(); 4];
    for (k, (slot, set)) in chsh
        .iter_mut()
        .zip(MeasurementSettings::canonical_chsh())
        .enumerate()
    {
        *slot = sim.run(&set, cycles, &seed.substream(k as u64 + 1))?.counts;
    }

    let retrieval = estimate_intrinsic_retrieval(&aligned, sim.read_eta())?;
    let boot = bootstrap_errors(&chsh, sim.read_eta(), n_resamples, &seed.substream(5))?;
    let mut correlations = [Estimate {
        value: 0.0,
        std_err: 0.0,
    }; 4];
    for (i, e) in correlations.iter_mut().enumerate() {
        e.value = correlation_e(&chsh[i])?;
        e.std_err = boot.correlation[i].ok_or(Error::InsufficientStatistics(
            "no coincidences at a CHSH setting",
        ))?;
    }
    let s_bell = Estimate {
        value: bell_parameter(correlations.map(|e| e.value)),
        std_err: boot.bell.ok_or(Error::InsufficientStatistics(
            "Bell parameter undefined on the simulated counts",
        ))?,
    };
    Ok(StorageRow {
        t,
        r_qu: retrieval.qubit,
        r_l: retrieval.left,
        r_r: retrieval.right,
        correlations,
        s_bell,
        aligned,
        chsh,
        expected: expected_estimators(&sim, t)?,
    })
}

/// One row per storage time in `ts`; each row uses its own seed substream.
pub fn sweep_storage_time(
    sim: &Simulator,
    ts: &[f64],
    budget: Budget,
    n_resamples: usize,
    seed: &SeedSpec,
) -> Result<Vec<StorageRow>> {
    if ts.is_empty() {
        return Err(Error::invalid("ts", "no storage times given"));
    }
    if let Some(&t) = ts.iter().find(|t| !(t.is_finite() && **t >= 0.0)) {
        return Err(Error::invalid("ts", format!("storage time {t} must be >= 0")));
    }
    ts.iter()
        .enumerate()
        .map(|(i, &t)| simulate_storage_time(sim, t, budget, n_resamples, &seed.substream(i as u64)))
        .collect()
}
