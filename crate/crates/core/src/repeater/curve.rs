use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::params::RepeaterParams;
use super::rate::{repeater_rate, RatePoint, RateStatus};
use crate::error::{check_positive, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Grid {
    Linear,
    Log,
}

/// Rate as a function of total distance, with per-point diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateCurve {
    pub nest_level: u32,
    pub points: Vec<RatePoint>,
}

impl RateCurve {
    /// Curve from bare `(distance_km, rate)` pairs, without diagnostics.
    pub fn from_rates(pairs: &[(f64, f64)]) -> Result<Self> {
        let points: Vec<RatePoint> = pairs
            .iter()
            .map(|&(d, r)| RatePoint {
                distance_km: d,
                rate: r,
                ln_rate: r.ln(),
                status: RateStatus::Ok,
                elementary: None,
                levels: Vec::new(),
                p_pr: None,
            })
            .collect();
        let curve = RateCurve {
            nest_level: 0,
            points,
        };
        curve.validate()?;
        Ok(curve)
    }

    pub fn validate(&self) -> Result<()> {
        if self
            .points
            .windows(2)
            .any(|w| w[1].distance_km <= w[0].distance_km)
        {
            return Err(Error::invalid("curve", "distances must strictly increase"));
        }
        if self.points.iter().any(|p| !(p.rate >= 0.0)) {
            return Err(Error::invalid("curve", "rates must be >= 0"));
        }
        Ok(())
    }

    /// CSV header for a repeater of nest level `n`. For `n = 4`:
    /// `L_km,rate_per_s,P0,P0N,P1,P2,P3,P4,t0_s,t1_s,t2_s,t3_s,t4_s,Ppr`.
    pub fn csv_header(n: u32) -> String {
        let mut cols = vec!["L_km".to_string(), "rate_per_s".into(), "P0".into(), "P0N".into()];
        cols.extend((1..=n).map(|j| format!("P{j}")));
        cols.extend((0..=n).map(|j| format!("t{j}_s")));
        cols.push("Ppr".into());
        cols.join(",")
    }

    /// Writes the curve as CSV; quantities that were never reached (after a
    /// collapse) are left empty.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let n = self.nest_level as usize;
        writeln!(out, "{}", Self::csv_header(self.nest_level))?;
        for p in &self.points {
            let mut row = vec![fmt(p.distance_km), fmt(p.rate)];
            match &p.elementary {
                Some(e) => row.extend([fmt(e.p0), fmt(e.p0n)]),
                None => row.extend([String::new(), String::new()]),
            }
            for j in 0..n {
                row.push(p.levels.get(j).map(|l| fmt(l.p)).unwrap_or_default());
            }
            let times = p.times();
            for j in 0..=n {
                row.push(times.get(j).map(|&t| fmt(t)).unwrap_or_default());
            }
            row.push(p.p_pr.map(fmt).unwrap_or_default());
            writeln!(out, "{}", row.join(","))?;
        }
        out.flush()
    }
}

fn fmt(x: f64) -> String {
    format!("{x:e}")
}

/// Evaluates the rate on `points` distances between `l_min` and `l_max`
/// (inclusive), in distance order.
pub fn sweep_distance(
    p: &RepeaterParams,
    l_min: f64,
    l_max: f64,
    points: usize,
    grid: Grid,
) -> Result<RateCurve> {
    p.validate()?;
    check_positive("l_min", l_min)?;
    if !(l_max > l_min && l_max.is_finite()) {
        return Err(Error::invalid("l_max", "must exceed l_min"));
    }
    if points < 2 {
        return Err(Error::invalid("points", "at least two points"));
    }
    let last = (points - 1) as f64;
    let distances: Vec<f64> = (0..points)
        .map(|i| {
            let f = i as f64 / last;
            match grid {
                Grid::Linear => l_min + f * (l_max - l_min),
                Grid::Log => l_min * (l_max / l_min).powf(f),
            }
        })
        .collect();
    let points = distances
        .par_iter()
        .map(|&d| repeater_rate(p, d))
        .collect::<Result<Vec<_>>>()?;
    Ok(RateCurve {
        nest_level: p.nest_level,
        points,
    })
}

/// Distance at which a non-increasing curve falls to `target_rate`, by
/// linear interpolation of `ln(rate)` between the bracketing points.
pub fn crossing_distance(curve: &RateCurve, target_rate: f64) -> Result<f64> {
    check_positive("target_rate", target_rate)?;
    let not_bracketed = Error::NotBracketed {
        target: target_rate,
    };
    for (i, w) in curve.points.windows(2).enumerate() {
        let (a, b) = (&w[0], &w[1]);
        if a.rate == target_rate {
            return Ok(a.distance_km);
        }
        if a.rate > target_rate && b.rate <= target_rate {
            if b.rate == target_rate {
                return Ok(b.distance_km);
            }
            let (la, lb) = (a.rate.ln(), b.rate.ln());
            if !lb.is_finite() {
                // Nothing to interpolate against in log space.
                let f = (a.rate - target_rate) / (a.rate - b.rate);
                return Ok(a.distance_km + f * (b.distance_km - a.distance_km));
            }
            let f = (la - target_rate.ln()) / (la - lb);
            return Ok(a.distance_km + f * (b.distance_km - a.distance_km));
        }
        if i + 2 == curve.points.len() && b.rate == target_rate {
            return Ok(b.distance_km);
        }
    }
    Err(not_bracketed)
}
