use serde::{Deserialize, Serialize};

use super::params::CoincidenceCounts;
use crate::error::{Error, Result};

/// A point estimate with its one-sigma standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub std_err: f64,
}

/// Intrinsic retrieval efficiencies of the qubit and of each spin-wave mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RetrievalEstimates {
    /// `(C₁₃ + C₂₄) / (η_TD (S₁ + S₂))`.
    pub qubit: Estimate,
    /// `C₁₃ / (η_TD S₁)`.
    pub left: Estimate,
    /// `C₂₄ / (η_TD S₂)`.
    pub right: Estimate,
}

/// Ratio `c / (eta · s)` of a coincidence count to the heralds it came from.
///
/// The error treats `c` and `h = s − c` as independent Poisson counts, giving
/// `σ² = c·h / (η² s³)`. A zero numerator uses one count in its place so the
/// bar stays finite.
fn herald_ratio(c: u64, s: u64, eta: f64) -> Estimate {
    let (cf, sf) = (c as f64, s as f64);
    let h = sf - cf;
    let var_c = cf.max(1.0);
    Estimate {
        value: cf / (eta * sf),
        std_err: (var_c * h).max(0.0).sqrt() / (eta * sf.powf(1.5)),
    }
}

/// Intrinsic retrieval estimators from counts taken at θ_S = θ_AS = 0°.
pub fn estimate_intrinsic_retrieval(
    counts: &CoincidenceCounts,
    eta_td: f64,
) -> Result<RetrievalEstimates> {
    if !(eta_td.is_finite() && eta_td > 0.0 && eta_td <= 1.0) {
        return Err(Error::invalid("eta_td", format!("{eta_td} is outside (0, 1]")));
    }
    if counts.s1 == 0 || counts.s2 == 0 {
        return Err(Error::InsufficientStatistics(
            "retrieval estimators need heralds on both Stokes detectors",
        ));
    }
    counts.validate()?;
    Ok(RetrievalEstimates {
        qubit: herald_ratio(counts.c13 + counts.c24, counts.heralds(), eta_td),
        left: herald_ratio(counts.c13, counts.s1, eta_td),
        right: herald_ratio(counts.c24, counts.s2, eta_td),
    })
}
