use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{check_positive, check_unit, Error, Result};

/// How the elementary link length follows from the total distance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LinkConvention {
    /// `L₀ = L / n`, as printed next to the rate formula.
    #[serde(rename = "L_over_n")]
    LOverN,
    /// `L₀ = L / 2ⁿ`, the usual link count of a nested repeater.
    #[serde(rename = "L_over_2_pow_n")]
    LOver2PowN,
}

/// Exponent used in the final-distribution probability
/// `P_pr = (R₀ e^{-x})² / 2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PrExponent {
    /// `x = L / τ₀` with `L` in km and `τ₀` in s, taken literally. The units
    /// do not cancel, so results in this mode are flagged non-physical.
    #[serde(rename = "literal_L_over_tau")]
    LiteralLOverTau,
    /// `x = t_n / τ₀`, the time the top-level pair waits in memory.
    TotalElapsedTime,
    /// `x = (L / c_fiber) / τ₀`, the one-way flight time over the full
    /// distance.
    FlightTime,
}

/// Form of the multiplexed link success probability.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Multiplexing {
    /// `1 − (1 − P₀)^N`.
    Exact,
    /// `N · P₀`, valid for `N·P₀ ≪ 1`.
    Linear,
}

impl LinkConvention {
    pub const ALL: [LinkConvention; 2] = [LinkConvention::LOverN, LinkConvention::LOver2PowN];

    pub fn as_str(&self) -> &'static str {
        match self {
            LinkConvention::LOverN => "L_over_n",
            LinkConvention::LOver2PowN => "L_over_2_pow_n",
        }
    }
}

impl PrExponent {
    pub const ALL: [PrExponent; 3] = [
        PrExponent::LiteralLOverTau,
        PrExponent::TotalElapsedTime,
        PrExponent::FlightTime,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            PrExponent::LiteralLOverTau => "literal_L_over_tau",
            PrExponent::TotalElapsedTime => "total_elapsed_time",
            PrExponent::FlightTime => "flight_time",
        }
    }

    pub fn is_physical(&self) -> bool {
        !matches!(self, PrExponent::LiteralLOverTau)
    }
}

impl fmt::Display for LinkConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Display for PrExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LinkConvention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        LinkConvention::ALL
            .into_iter()
            .find(|c| c.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::invalid("link_convention", format!("unknown value `{s}`")))
    }
}

impl FromStr for PrExponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PrExponent::ALL
            .into_iter()
            .find(|c| c.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::invalid("pr_exponent", format!("unknown value `{s}`")))
    }
}

/// Parameters of a multiplexed nested repeater.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RepeaterParams {
    pub nest_level: u32,
    pub mode_count: u64,
    /// Memory lifetime τ₀, seconds.
    pub memory_lifetime: f64,
    pub eta_td: f64,
    pub eta_fc: f64,
    pub chi: f64,
    /// Fiber attenuation length, km.
    pub attenuation_length: f64,
    /// Zero-delay qubit retrieval efficiency R₀.
    pub r0: f64,
    /// Group velocity in fiber, m/s.
    pub fiber_speed: f64,
    pub link_convention: LinkConvention,
    pub pr_exponent: PrExponent,
    pub multiplexing: Multiplexing,
}

/// R₀ of cavity-perfectly-enhanced retrieval.
pub const R0_CPE: f64 = 0.77;
/// R₀ of cavity-imperfectly-enhanced retrieval.
pub const R0_CIE: f64 = 0.58;

impl Default for RepeaterParams {
    /// n = 4, N = 1000, τ₀ = 16 s, η_TD = 0.90, η_FC = 0.33, χ = 0.02,
    /// L_att = 22 km, R₀ = 0.77.
    fn default() -> Self {
        RepeaterParams {
            nest_level: 4,
            mode_count: 1000,
            memory_lifetime: 16.0,
            eta_td: 0.90,
            eta_fc: 0.33,
            chi: 0.02,
            attenuation_length: 22.0,
            r0: R0_CPE,
            fiber_speed: 2.0e8,
            link_convention: LinkConvention::LOverN,
            pr_exponent: PrExponent::TotalElapsedTime,
            multiplexing: Multiplexing::Exact,
        }
    }
}

impl RepeaterParams {
    pub fn validate(&self) -> Result<()> {
        if self.nest_level == 0 {
            return Err(Error::invalid("nest_level", "must be >= 1"));
        }
        if self.mode_count == 0 {
            return Err(Error::invalid("mode_count", "must be >= 1"));
        }
        check_unit("eta_td", self.eta_td)?;
        check_unit("eta_fc", self.eta_fc)?;
        check_unit("chi", self.chi)?;
        check_unit("r0", self.r0)?;
        // τ₀ and L_att may be infinite (no decay, lossless fiber).
        for (name, v) in [
            ("memory_lifetime", self.memory_lifetime),
            ("attenuation_length", self.attenuation_length),
        ] {
            if v.is_nan() || v <= 0.0 {
                return Err(Error::invalid(name, format!("{v} must be > 0")));
            }
        }
        check_positive("fiber_speed", self.fiber_speed)
    }

    /// Distance between the two nodes of an elementary link, km.
    pub fn link_length(&self, total_km: f64) -> f64 {
        match self.link_convention {
            LinkConvention::LOverN => total_km / f64::from(self.nest_level),
            LinkConvention::LOver2PowN => total_km / 2f64.powi(self.nest_level as i32),
        }
    }
}
