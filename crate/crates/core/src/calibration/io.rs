use std::io::BufRead;

use serde::{Deserialize, Serialize};

use super::DataPoint;
use crate::error::{Error, Result};

pub const POINTS_CSV_HEADER: &str = "t_s,value,sigma";

/// Reads `t_s,value,sigma` rows. The header line is required; blank lines and
/// lines starting with `#` are skipped.
pub fn read_points_csv<R: BufRead>(reader: R) -> Result<Vec<DataPoint>> {
    let mut lines = reader
        .lines()
        .map(|l| l.map_err(|e| Error::invalid("csv", e.to_string())))
        .filter(|l| {
            l.as_ref()
                .map(|s| !s.trim().is_empty() && !s.trim_start().starts_with('#'))
                .unwrap_or(true)
        });
    match lines.next() {
        Some(Ok(h)) if h.trim() == POINTS_CSV_HEADER => {}
        Some(Ok(h)) => {
            return Err(Error::invalid(
                "csv",
                format!("expected header `{POINTS_CSV_HEADER}`, found `{}`", h.trim()),
            ))
        }
        Some(Err(e)) => return Err(e),
        None => return Err(Error::invalid("csv", "empty input")),
    }
    let mut points = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 3 {
            return Err(Error::invalid(
                "csv",
                format!("row {}: expected 3 fields, found {}", i + 1, fields.len()),
            ));
        }
        let num = |s: &str| {
            s.parse::<f64>()
                .map_err(|e| Error::invalid("csv", format!("row {}: `{s}`: {e}", i + 1)))
        };
        let p = DataPoint::new(num(fields[0])?, num(fields[1])?, num(fields[2])?);
        p.validate()?;
        points.push(p);
    }
    Ok(points)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecayCalibration {
    pub r0: f64,
    pub tau0_s: f64,
    pub r0_err: f64,
    pub tau0_err_s: f64,
    pub residuals: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BellCalibration {
    pub werner_p0: f64,
    pub vis_tau_gauss_s: Option<f64>,
    pub vis_tau_exp_s: Option<f64>,
    /// Readout efficiency and background the fit assumed.
    pub readout_eta: f64,
    pub p_noise: f64,
    pub residuals: Vec<f64>,
}

/// Calibration file consumed by the command-line front end.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decay: Option<DecayCalibration>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bell: Option<BellCalibration>,
}

impl CalibrationFile {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::invalid("calibration", e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("calibration serializes")
    }
}
