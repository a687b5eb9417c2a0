//! Multiplexed nested-repeater rate model and distance sweeps.
//!
//! `R = P₀⁽ᴺ⁾ (∏ⱼ P_j) P_pr / T_cc` with the time recursion `t_j = t_{j-1}/P_j`.
//! Two points of the printed model are ambiguous and selectable: the link
//! length (`L/n` or `L/2ⁿ`) and the exponent of `P_pr`.

mod curve;
mod params;
mod rate;
mod report;

pub use curve::{crossing_distance, sweep_distance, Grid, RateCurve};
pub use params::{LinkConvention, Multiplexing, PrExponent, RepeaterParams, R0_CIE, R0_CPE};
pub use rate::{
    elementary_probability, repeater_rate, swap_chain, Elementary, RatePoint, RateStatus,
    SwapLevel, LN_FLOOR,
};
pub use report::{
    crossing_by_bisection, crossing_report, fit_chi, ChiChoice, CrossingReport, ReportEntry,
    ANCHOR_CIE_KM, ANCHOR_CPE_KM, ANCHOR_TARGET_RATE, ANCHOR_TOLERANCE,
};
