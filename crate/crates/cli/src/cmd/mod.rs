pub mod bell;
pub mod calibrate;
pub mod efficiency;
pub mod repeater;
pub mod simulate;

use std::path::PathBuf;

use dlcz::model::total_detection_efficiency;
use dlcz::montecarlo::{SeedSpec, Simulator};

use crate::config::Settings;
use crate::error::CliError;
use crate::output::Format;

/// Resolved settings plus the common flags.
pub struct Ctx {
    pub settings: Settings,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub seed: u64,
}

impl Ctx {
    pub fn format_or(&self, default: Format) -> Format {
        self.format.unwrap_or(default)
    }

    pub fn seed(&self) -> SeedSpec {
        SeedSpec::new(self.seed)
    }

    pub fn write_eta(&self) -> Result<f64, CliError> {
        Ok(total_detection_efficiency(&self.settings.write_chain)?)
    }

    pub fn read_eta(&self) -> Result<f64, CliError> {
        Ok(total_detection_efficiency(&self.settings.read_chain)?)
    }

    pub fn simulator(&self) -> Result<Simulator, CliError> {
        let s = &self.settings;
        Ok(Simulator::new(
            s.sequence,
            s.source,
            s.decay,
            self.write_eta()?,
            self.read_eta()?,
        )?)
    }
}

/// Storage-time grid shared by `efficiency` and `bell`.
#[derive(clap::Args, Debug)]
pub struct TimeGrid {
    /// Explicit storage times in µs, comma separated; overrides the uniform
    /// grid.
    #[arg(long, value_delimiter = ',')]
    pub t_us: Vec<f64>,
    /// End of the uniform grid, µs.
    #[arg(long, default_value_t = 3000.0)]
    pub t_max_us: f64,
    /// Points of the uniform grid, starting at 0.
    #[arg(long, default_value_t = 31)]
    pub points: usize,
}

impl TimeGrid {
    pub fn times_us(&self) -> Result<Vec<f64>, CliError> {
        let ts = if self.t_us.is_empty() {
            if self.points < 2 {
                return Err(CliError::Validation("--points must be >= 2".into()));
            }
            if !(self.t_max_us.is_finite() && self.t_max_us > 0.0) {
                return Err(CliError::Validation("--t-max-us must be > 0".into()));
            }
            let step = self.t_max_us / (self.points - 1) as f64;
            (0..self.points).map(|i| i as f64 * step).collect()
        } else {
            self.t_us.clone()
        };
        if let Some(t) = ts.iter().find(|t| !(t.is_finite() && **t >= 0.0)) {
            return Err(CliError::Validation(format!("storage time {t} µs must be >= 0")));
        }
        Ok(ts)
    }
}
