use serde::{Deserialize, Serialize};

use super::params::{LinkConvention, PrExponent, RepeaterParams, R0_CIE, R0_CPE};
use super::rate::repeater_rate;
use crate::error::{check_positive, Result};

/// Reference crossing distances of the CPE and CIE curves at a rate of
/// 1e-4 per second, km.
pub const ANCHOR_CPE_KM: f64 = 1000.0;
pub const ANCHOR_CIE_KM: f64 = 430.0;
pub const ANCHOR_TARGET_RATE: f64 = 1e-4;
/// Relative tolerance for calling an interpretation a reproduction.
pub const ANCHOR_TOLERANCE: f64 = 0.15;

const SEARCH_MIN_KM: f64 = 1.0;
const SEARCH_MAX_KM: f64 = 50_000.0;

/// Distance at which the rate falls to `target`, found by bisection on the
/// analytic rate. `None` when the rate is already below the target at
/// `lo_km` or still above it at `hi_km`.
pub fn crossing_by_bisection(
    p: &RepeaterParams,
    target: f64,
    lo_km: f64,
    hi_km: f64,
) -> Result<Option<f64>> {
    check_positive("target", target)?;
    let above = |l: f64| -> Result<bool> { Ok(repeater_rate(p, l)?.rate >= target) };
    if !above(lo_km)? || above(hi_km)? {
        return Ok(None);
    }
    let (mut lo, mut hi) = (lo_km, hi_km);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if above(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-9 * hi {
            break;
        }
    }
    Ok(Some(0.5 * (lo + hi)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChiChoice {
    Fixed,
    /// χ chosen to best match both anchor distances.
    Fitted,
}

/// Crossing distances of the CPE and CIE curves under one interpretation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportEntry {
    pub link_convention: LinkConvention,
    pub pr_exponent: PrExponent,
    pub chi_choice: ChiChoice,
    pub chi: f64,
    pub cpe_km: Option<f64>,
    pub cie_km: Option<f64>,
    /// `cpe_km / cie_km`.
    pub ratio: Option<f64>,
    /// Both crossings within ±15 % of the anchors.
    pub reproduces_anchors: bool,
    pub non_physical_units: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossingReport {
    pub target_rate: f64,
    pub anchor_cpe_km: f64,
    pub anchor_cie_km: f64,
    pub tolerance: f64,
    pub entries: Vec<ReportEntry>,
}

impl CrossingReport {
    pub fn reproducing(&self) -> impl Iterator<Item = &ReportEntry> {
        self.entries.iter().filter(|e| e.reproduces_anchors)
    }
}

fn crossings(base: &RepeaterParams, chi: f64, target: f64) -> Result<(Option<f64>, Option<f64>)> {
    let cpe = RepeaterParams {
        chi,
        r0: R0_CPE,
        ..*base
    };
    let cie = RepeaterParams { r0: R0_CIE, ..cpe };
    Ok((
        crossing_by_bisection(&cpe, target, SEARCH_MIN_KM, SEARCH_MAX_KM)?,
        crossing_by_bisection(&cie, target, SEARCH_MIN_KM, SEARCH_MAX_KM)?,
    ))
}

fn anchor_misfit(c: (Option<f64>, Option<f64>)) -> f64 {
    match c {
        (Some(a), Some(b)) => {
            (a / ANCHOR_CPE_KM).ln().powi(2) + (b / ANCHOR_CIE_KM).ln().powi(2)
        }
        _ => f64::INFINITY,
    }
}

/// χ in `[1e-4, 0.5]` minimizing the squared log-misfit of both crossings
/// against the anchors: fixed 121-point log grid, then golden-section
/// refinement around the best grid point.
pub fn fit_chi(base: &RepeaterParams, target: f64) -> Result<f64> {
    let (lo, hi) = (1e-4f64.ln(), 0.5f64.ln());
    let n = 121;
    let step = (hi - lo) / (n - 1) as f64;
    let mut best = (f64::INFINITY, lo);
    for i in 0..n {
        let x = lo + i as f64 * step;
        let m = anchor_misfit(crossings(base, x.exp(), target)?);
        if m < best.0 {
            best = (m, x);
        }
    }
    let (mut a, mut b) = ((best.1 - step).max(lo), (best.1 + step).min(hi));
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..60 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        let fc = anchor_misfit(crossings(base, c.exp(), target)?);
        let fd = anchor_misfit(crossings(base, d.exp(), target)?);
        if fc <= fd {
            b = d;
        } else {
            a = c;
        }
    }
    Ok((0.5 * (a + b)).exp())
}

/// Crossing distances for every link convention, every `P_pr` exponent and
/// χ ∈ {0.01, 0.02, fitted}, with the rest of the parameters from `base`.
pub fn crossing_report(base: &RepeaterParams, target: f64) -> Result<CrossingReport> {
    base.validate()?;
    let mut entries = Vec::new();
    for link_convention in LinkConvention::ALL {
        for pr_exponent in PrExponent::ALL {
            let p = RepeaterParams {
                link_convention,
                pr_exponent,
                ..*base
            };
            let fitted = fit_chi(&p, target)?;
            for (chi_choice, chi) in [
                (ChiChoice::Fixed, 0.01),
                (ChiChoice::Fixed, 0.02),
                (ChiChoice::Fitted, fitted),
            ] {
                let (cpe_km, cie_km) = crossings(&p, chi, target)?;
                let within = |x: Option<f64>, anchor: f64| {
                    x.is_some_and(|x| (x / anchor - 1.0).abs() <= ANCHOR_TOLERANCE)
                };
                entries.push(ReportEntry {
                    link_convention,
                    pr_exponent,
                    chi_choice,
                    chi,
                    cpe_km,
                    cie_km,
                    ratio: cpe_km.zip(cie_km).map(|(a, b)| a / b),
                    reproduces_anchors: within(cpe_km, ANCHOR_CPE_KM)
                        && within(cie_km, ANCHOR_CIE_KM),
                    non_physical_units: !pr_exponent.is_physical(),
                });
            }
        }
    }
    Ok(CrossingReport {
        target_rate: target,
        anchor_cpe_km: ANCHOR_CPE_KM,
        anchor_cie_km: ANCHOR_CIE_KM,
        tolerance: ANCHOR_TOLERANCE,
        entries,
    })
}
