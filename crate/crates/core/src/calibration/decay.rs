use serde::{Deserialize, Serialize};

use super::lm::levenberg_marquardt;
use super::{distinct_times, DataPoint};
use crate::error::{Error, Result};
use crate::model::{retrieval_efficiency, DecayModel};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub model: DecayModel,
    pub r0_err: f64,
    /// Seconds.
    pub tau0_err: f64,
    /// `model − value` at each input point.
    pub residuals: Vec<f64>,
    pub chi2: f64,
}

const LN_TAU_MIN: f64 = -20.723_265_836_946_41; // ln 1e-9 s
const LN_TAU_MAX: f64 = 6.907_755_278_982_137; // ln 1e3 s

fn model(x: &[f64]) -> DecayModel {
    DecayModel {
        r0: x[0],
        tau0: x[1].exp(),
    }
}

/// Weighted least-squares fit of `R₀` and `τ₀` in
/// `R(t) = R₀ (exp(-t²/τ₀²) + exp(-t/τ₀)) / 2`.
pub fn fit_decay(points: &[DataPoint]) -> Result<DecayFit> {
    for p in points {
        p.validate()?;
    }
    if points.len() < 3 || distinct_times(points) < 3 {
        return Err(Error::invalid(
            "points",
            "need at least three points at distinct times",
        ));
    }
    let residuals = |x: &[f64]| -> Vec<f64> {
        let m = model(x);
        points
            .iter()
            .map(|p| (retrieval_efficiency(p.t, &m).unwrap_or(f64::NAN) - p.value) / p.sigma)
            .collect()
    };
    let r0_start = points
        .iter()
        .map(|p| p.value)
        .fold(0.0, f64::max)
        .clamp(0.01, 1.0);
    let lower = [0.0, LN_TAU_MIN];
    let upper = [1.0, LN_TAU_MAX];

    let mut best = None;
    for k in 0..13 {
        let tau = 1e-6 * 10f64.powf(k as f64 / 2.0);
        let fit = levenberg_marquardt(residuals, &[r0_start, tau.ln()], &lower, &upper, 500);
        let better = best
            .as_ref()
            .is_none_or(|b: &super::lm::LmResult| fit.cost < b.cost);
        if better {
            best = Some(fit);
        }
    }
    let best = best.expect("non-empty start grid");
    if !best.converged {
        return Err(Error::NonConvergence {
            iterations: best.iterations,
            cost: best.cost,
            best: best.x,
        });
    }
    let m = model(&best.x);
    let (r0_err, tau0_err) = match &best.covariance {
        Some(c) => (c[0].max(0.0).sqrt(), m.tau0 * c[3].max(0.0).sqrt()),
        None => (f64::NAN, f64::NAN),
    };
    let residuals: Vec<f64> = points
        .iter()
        .map(|p| retrieval_efficiency(p.t, &m).map(|r| r - p.value))
        .collect::<Result<_>>()?;
    Ok(DecayFit {
        model: m,
        r0_err,
        tau0_err,
        residuals,
        chi2: 2.0 * best.cost,
    })
}
