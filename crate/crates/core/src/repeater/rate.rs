use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use super::params::{Multiplexing, PrExponent, RepeaterParams};
use crate::error::{check_positive, Error, Result};

/// Probabilities below `exp(LN_FLOOR)` ≈ 1e-300 are treated as collapse.
pub const LN_FLOOR: f64 = -690.775_527_898_213_7;

/// Elementary-link quantities at a given total distance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Elementary {
    /// Link length L₀, km.
    pub link_km: f64,
    /// Single-mode success probability P₀.
    pub p0: f64,
    pub ln_p0: f64,
    /// Multiplexed success probability P₀⁽ᴺ⁾.
    pub p0n: f64,
    /// Classical communication time over one link, seconds.
    pub t_cc: f64,
    /// Expected time to establish an elementary pair, `T_cc / P₀⁽ᴺ⁾`.
    pub t0: f64,
}

/// `P₀ = χ² e^{-L₀/L_att} η_FC² η_TD² / 2`, `P₀⁽ᴺ⁾ = 1 − (1 − P₀)^N`,
/// `T_cc = L₀ / c_fiber`, `t₀ = T_cc / P₀⁽ᴺ⁾`.
pub fn elementary_probability(p: &RepeaterParams, total_km: f64) -> Result<Elementary> {
    p.validate()?;
    check_positive("L", total_km)?;
    let link_km = p.link_length(total_km);
    let ln_p0 = 2.0 * p.chi.ln() - link_km / p.attenuation_length
        + 2.0 * p.eta_fc.ln()
        + 2.0 * p.eta_td.ln()
        - LN_2;
    if !(ln_p0 >= LN_FLOOR) {
        return Err(Error::LinkUnreachable { link_km, ln_p0 });
    }
    let p0 = ln_p0.exp();
    let p0n = match p.mode_count {
        1 => p0,
        n => match p.multiplexing {
            Multiplexing::Exact => -(n as f64 * (-p0).ln_1p()).exp_m1(),
            Multiplexing::Linear => (n as f64 * p0).min(1.0),
        },
    };
    let t_cc = link_km * 1e3 / p.fiber_speed;
    Ok(Elementary {
        link_km,
        p0,
        ln_p0,
        p0n,
        t_cc,
        t0: t_cc / p0n,
    })
}

/// One entanglement-swapping level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SwapLevel {
    /// Success probability P_j.
    pub p: f64,
    pub ln_p: f64,
    /// Time t_j to complete this level, seconds.
    pub t: f64,
}

fn ln_swap_probability(p: &RepeaterParams, t_prev: f64) -> f64 {
    2.0 * p.r0.ln() - 2.0 * t_prev / p.memory_lifetime + 2.0 * p.eta_td.ln() - LN_2
}

/// Levels `j = 1..=n` of `P_j = (R₀ e^{-t_{j-1}/τ₀})² η_TD² / 2`,
/// `t_j = t_{j-1} / P_j`.
pub fn swap_chain(p: &RepeaterParams, t0: f64) -> Result<Vec<SwapLevel>> {
    p.validate()?;
    check_positive("t0", t0)?;
    let mut levels = Vec::with_capacity(p.nest_level as usize);
    let mut t_prev = t0;
    for level in 1..=p.nest_level as usize {
        let ln_p = ln_swap_probability(p, t_prev);
        if !(ln_p >= LN_FLOOR) {
            return Err(Error::ChainCollapsed { level, ln_p });
        }
        let prob = ln_p.exp();
        let t = t_prev / prob;
        levels.push(SwapLevel { p: prob, ln_p, t });
        t_prev = t;
    }
    Ok(levels)
}

/// Outcome class of a rate evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RateStatus {
    Ok,
    LinkUnreachable,
    ChainCollapsed { level: usize },
    /// Every factor is representable but the product is below 1e-300.
    Underflow,
}

/// Rate at one distance with every intermediate quantity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatePoint {
    pub distance_km: f64,
    /// Pairs per second; zero whenever `status` is not `Ok`.
    pub rate: f64,
    /// Natural log of the rate; `-inf` when a factor vanished.
    pub ln_rate: f64,
    pub status: RateStatus,
    pub elementary: Option<Elementary>,
    /// Completed swap levels (all `n` unless the chain collapsed).
    pub levels: Vec<SwapLevel>,
    pub p_pr: Option<f64>,
}

impl RatePoint {
    /// `t₀, t₁, …` for the levels that were reached.
    pub fn times(&self) -> Vec<f64> {
        self.elementary
            .iter()
            .map(|e| e.t0)
            .chain(self.levels.iter().map(|l| l.t))
            .collect()
    }
}

fn ln_pr(p: &RepeaterParams, total_km: f64, t_n: f64) -> f64 {
    let x = match p.pr_exponent {
        PrExponent::LiteralLOverTau => total_km / p.memory_lifetime,
        PrExponent::TotalElapsedTime => t_n / p.memory_lifetime,
        PrExponent::FlightTime => total_km * 1e3 / p.fiber_speed / p.memory_lifetime,
    };
    2.0 * p.r0.ln() - 2.0 * x - LN_2
}

/// `R = P₀⁽ᴺ⁾ (∏ P_j) P_pr / T_cc` at total distance `total_km`.
///
/// Link underflow and chain collapse are reported through
/// [`RatePoint::status`] with a zero rate; invalid parameters are errors.
pub fn repeater_rate(p: &RepeaterParams, total_km: f64) -> Result<RatePoint> {
    let mut point = RatePoint {
        distance_km: total_km,
        rate: 0.0,
        ln_rate: f64::NEG_INFINITY,
        status: RateStatus::Ok,
        elementary: None,
        levels: Vec::new(),
        p_pr: None,
    };
    let el = match elementary_probability(p, total_km) {
        Ok(el) => el,
        Err(Error::LinkUnreachable { .. }) => {
            point.status = RateStatus::LinkUnreachable;
            return Ok(point);
        }
        Err(e) => return Err(e),
    };
    point.elementary = Some(el);
    let levels = match swap_chain(p, el.t0) {
        Ok(levels) => levels,
        Err(Error::ChainCollapsed { level, .. }) => {
            // Keep the levels completed before the collapse.
            let mut t_prev = el.t0;
            for _ in 1..level {
                let ln_p = ln_swap_probability(p, t_prev);
                let prob = ln_p.exp();
                let t = t_prev / prob;
                point.levels.push(SwapLevel { p: prob, ln_p, t });
                t_prev = t;
            }
            point.status = RateStatus::ChainCollapsed { level };
            return Ok(point);
        }
        Err(e) => return Err(e),
    };
    let t_n = levels.last().map_or(el.t0, |l| l.t);
    let ln_p_pr = ln_pr(p, total_km, t_n);
    point.p_pr = Some(ln_p_pr.exp());
    let ln_rate = el.p0n.ln() + levels.iter().map(|l| l.ln_p).sum::<f64>() + ln_p_pr - el.t_cc.ln();
    point.levels = levels;
    point.ln_rate = ln_rate;
    if ln_rate >= LN_FLOOR {
        point.rate = ln_rate.exp();
    } else {
        point.status = RateStatus::Underflow;
    }
    Ok(point)
}
