use serde::{Deserialize, Serialize};

use super::lm::{levenberg_marquardt, LmResult};
use super::{distinct_times, DataPoint};
use crate::error::{check_unit, Error, Result};
use crate::model::{analytic_bell, DecayModel, MeasurementSettings, SourceParams, TSIRELSON};

/// Fitted correlation-decay parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BellFit {
    pub werner_p0: f64,
    /// Seconds; `None` when the data cannot constrain it (all points at
    /// t = 0).
    pub vis_tau_gauss: Option<f64>,
    /// Seconds; `None` when unconstrained.
    pub vis_tau_exp: Option<f64>,
    /// `model − value` at each input point.
    pub residuals: Vec<f64>,
    pub chi2: f64,
}

impl BellFit {
    /// Source parameters carrying the fitted correlation decay; an
    /// unconstrained decay constant becomes "no decay".
    pub fn source(&self, chi: f64, p_noise: f64) -> SourceParams {
        SourceParams {
            chi,
            phase_write: 0.0,
            phase_read: 0.0,
            werner_p0: self.werner_p0,
            vis_tau_gauss: self.vis_tau_gauss.unwrap_or(f64::INFINITY),
            vis_tau_exp: self.vis_tau_exp.unwrap_or(f64::INFINITY),
            p_noise,
        }
    }
}

/// Canonical-angle Bell parameter of the model at storage time `t`.
pub fn bell_model_value(
    sp: &SourceParams,
    dm: &DecayModel,
    readout_eta: f64,
    t: f64,
) -> Result<f64> {
    analytic_bell(sp, dm, t, readout_eta, &MeasurementSettings::canonical_chsh())
}

const LN_TAU_MIN: f64 = -16.118_095_650_958_32; // ln 1e-7 s
const LN_TAU_MAX: f64 = 6.907_755_278_982_137; // ln 1e3 s

/// Fits `(werner_p0, vis_tau_gauss, vis_tau_exp)` so that the canonical Bell
/// parameter `S(t) = 2√2 p(t) q_s(t) / (q_s(t) + p_N)` passes through the
/// points. A fit is accepted only if every residual is within its sigma.
pub fn fit_bell_model(
    points: &[DataPoint],
    dm: &DecayModel,
    readout_eta: f64,
    p_noise: f64,
) -> Result<BellFit> {
    for p in points {
        p.validate()?;
    }
    dm.validate()?;
    check_unit("readout_eta", readout_eta)?;
    if points.is_empty() {
        return Err(Error::invalid("points", "no data"));
    }
    let base = SourceParams {
        p_noise,
        ..SourceParams::ideal(0.02)
    };
    base.validate()?;

    if points.iter().all(|p| p.t == 0.0) {
        return fit_zero_delay(points, &base, dm, readout_eta);
    }
    if distinct_times(points) < 3 {
        return Err(Error::invalid(
            "points",
            "need three distinct storage times to constrain the decay",
        ));
    }

    let source = |x: &[f64]| SourceParams {
        werner_p0: x[0],
        vis_tau_gauss: x[1].exp(),
        vis_tau_exp: x[2].exp(),
        ..base
    };
    let residuals = |x: &[f64]| -> Vec<f64> {
        let sp = source(x);
        points
            .iter()
            .map(|p| {
                (bell_model_value(&sp, dm, readout_eta, p.t).unwrap_or(f64::NAN) - p.value)
                    / p.sigma
            })
            .collect()
    };
    let lower = [0.0, LN_TAU_MIN, LN_TAU_MIN];
    let upper = [1.0, LN_TAU_MAX, LN_TAU_MAX];
    let p0_start = zero_delay_start(points, &base, dm, readout_eta)?;

    let mut best: Option<LmResult> = None;
    for i in 0..9 {
        for j in 0..9 {
            let tg = 1e-5 * 10f64.powf(i as f64 / 2.0);
            let te = 1e-5 * 10f64.powf(j as f64 / 2.0);
            let fit = levenberg_marquardt(
                residuals,
                &[p0_start, tg.ln(), te.ln()],
                &lower,
                &upper,
                300,
            );
            if best.as_ref().is_none_or(|b| fit.cost < b.cost) {
                best = Some(fit);
            }
        }
    }
    let best = best.expect("non-empty start grid");
    let sp = source(&best.x);
    let residuals: Vec<f64> = points
        .iter()
        .map(|p| bell_model_value(&sp, dm, readout_eta, p.t).map(|s| s - p.value))
        .collect::<Result<_>>()?;
    if !best.converged {
        return Err(Error::NonConvergence {
            iterations: best.iterations,
            cost: best.cost,
            best: best.x,
        });
    }
    if residuals
        .iter()
        .zip(points)
        .any(|(r, p)| r.abs() > p.sigma)
    {
        return Err(Error::NoSolution { residuals });
    }
    Ok(BellFit {
        werner_p0: sp.werner_p0,
        vis_tau_gauss: Some(sp.vis_tau_gauss),
        vis_tau_exp: Some(sp.vis_tau_exp),
        residuals,
        chi2: 2.0 * best.cost,
    })
}

/// `p₀` that reproduces the weighted mean of the zero-delay points.
fn zero_delay_start(
    points: &[DataPoint],
    base: &SourceParams,
    dm: &DecayModel,
    readout_eta: f64,
) -> Result<f64> {
    let earliest = points.iter().map(|p| p.t).fold(f64::INFINITY, f64::min);
    let (mut num, mut den) = (0.0, 0.0);
    for p in points.iter().filter(|p| p.t == earliest) {
        let w = 1.0 / (p.sigma * p.sigma);
        num += w * p.value;
        den += w;
    }
    let s_unit = bell_model_value(base, dm, readout_eta, earliest)?;
    if s_unit == 0.0 {
        return Err(Error::InsufficientStatistics(
            "no retrieved signal at the earliest point",
        ));
    }
    Ok((num / den / s_unit).clamp(0.0, 1.0))
}

fn fit_zero_delay(
    points: &[DataPoint],
    base: &SourceParams,
    dm: &DecayModel,
    readout_eta: f64,
) -> Result<BellFit> {
    // S is linear in p₀ at fixed t, so the weighted mean is the LS solution.
    let p0 = zero_delay_start(points, base, dm, readout_eta)?;
    let sp = SourceParams {
        werner_p0: p0,
        ..*base
    };
    let s = bell_model_value(&sp, dm, readout_eta, 0.0)?;
    let residuals: Vec<f64> = points.iter().map(|p| s - p.value).collect();
    let chi2 = residuals
        .iter()
        .zip(points)
        .map(|(r, p)| (r / p.sigma).powi(2))
        .sum();
    if residuals
        .iter()
        .zip(points)
        .any(|(r, p)| r.abs() > p.sigma)
    {
        return Err(Error::NoSolution { residuals });
    }
    Ok(BellFit {
        werner_p0: p0,
        vis_tau_gauss: None,
        vis_tau_exp: None,
        residuals,
        chi2,
    })
}

/// Largest Bell parameter the model can produce at `t` for this decay and
/// readout (p₀ = 1, no correlation decay).
pub fn bell_ceiling(dm: &DecayModel, readout_eta: f64, p_noise: f64, t: f64) -> Result<f64> {
    let sp = SourceParams {
        p_noise,
        ..SourceParams::ideal(0.02)
    };
    let s = bell_model_value(&sp, dm, readout_eta, t)?;
    debug_assert!(s <= TSIRELSON + 1e-12);
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calibration::published_bell_points;

    #[test]
    fn single_ideal_point_gives_unit_p0() {
        let dm = DecayModel::measured();
        let fit = fit_bell_model(&[DataPoint::new(0.0, TSIRELSON, 0.01)], &dm, 0.15, 0.0)
            .unwrap();
        assert!((fit.werner_p0 - 1.0).abs() < 1e-12);
        assert_eq!(fit.vis_tau_gauss, None);
        assert_eq!(fit.vis_tau_exp, None);
    }

    #[test]
    fn published_points_fit_within_error_bars() {
        let dm = DecayModel::measured();
        let fit = fit_bell_model(&published_bell_points(), &dm, 0.15, 1e-4).unwrap();
        for r in &fit.residuals {
            assert!(r.abs() <= 0.03, "{:?}", fit.residuals);
        }
    }

    #[test]
    fn calibrated_source_matches_fresh_fit() {
        let fit = fit_bell_model(&published_bell_points(), &DecayModel::measured(), 0.15, 1e-4)
            .unwrap();
        let sp = SourceParams::calibrated();
        assert!((fit.werner_p0 / sp.werner_p0 - 1.0).abs() < 1e-9);
        assert!((fit.vis_tau_gauss.unwrap() / sp.vis_tau_gauss - 1.0).abs() < 1e-9);
        assert!((fit.vis_tau_exp.unwrap() / sp.vis_tau_exp - 1.0).abs() < 1e-9);
    }

    #[test]
    fn background_free_limit_fits_mixing_directly() {
        // q_s constant (no retrieval decay) and p_N = 0: S = 2√2 p(t).
        let dm = DecayModel::new(0.77, 1e6).unwrap();
        let truth = SourceParams {
            werner_p0: 0.9,
            vis_tau_gauss: 2e-3,
            vis_tau_exp: 5e-3,
            ..SourceParams::ideal(0.02)
        };
        let pts: Vec<DataPoint> = [0.0, 1e-3, 2e-3, 3e-3]
            .iter()
            .map(|&t| DataPoint::new(t, TSIRELSON * truth.werner_mixing(t), 0.01))
            .collect();
        let fit = fit_bell_model(&pts, &dm, 0.15, 0.0).unwrap();
        assert!((fit.werner_p0 - 0.9).abs() < 1e-6);
        assert!((fit.vis_tau_gauss.unwrap() / 2e-3 - 1.0).abs() < 1e-6);
        assert!((fit.vis_tau_exp.unwrap() / 5e-3 - 1.0).abs() < 1e-6);
    }

    #[test]
    fn two_distinct_times_rejected() {
        let pts = [
            DataPoint::new(0.0, 2.5, 0.02),
            DataPoint::new(1e-3, 2.0, 0.02),
        ];
        assert!(fit_bell_model(&pts, &DecayModel::measured(), 0.15, 1e-4).is_err());
    }

    #[test]
    fn ceiling_is_below_tsirelson() {
        let s = bell_ceiling(&DecayModel::measured(), 0.15, 1e-4, 0.0).unwrap();
        assert!(s < TSIRELSON && s > 2.8);
    }
}
