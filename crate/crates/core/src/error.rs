use thiserror::Error;

/// Errors raised by the analytic model, the simulator, the repeater model
/// and the calibration fitters.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("insufficient statistics: {0}")]
    InsufficientStatistics(&'static str),

    #[error("Bell parameter {0} exceeds the Tsirelson bound 2*sqrt(2)")]
    BeyondTsirelson(f64),

    #[error("elementary link unreachable at L0 = {link_km} km (ln P0 = {ln_p0})")]
    LinkUnreachable { link_km: f64, ln_p0: f64 },

    #[error("swap chain collapsed at level {level} (ln P = {ln_p})")]
    ChainCollapsed { level: usize, ln_p: f64 },

    #[error("target rate {target} is not bracketed by the curve")]
    NotBracketed { target: f64 },

    #[error("fit did not converge after {iterations} iterations (cost {cost})")]
    NonConvergence {
        iterations: usize,
        cost: f64,
        best: Vec<f64>,
    },

    #[error("no solution within parameter bounds; residuals {residuals:?}")]
    NoSolution { residuals: Vec<f64> },

    #[error("bootstrap gave up after {attempts} attempts ({accepted} usable resamples)")]
    BootstrapExhausted { attempts: usize, accepted: usize },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// True for failures of a numerical or statistical procedure
    /// (non-convergence, collapse, too few counts) as opposed to rejected
    /// input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::InsufficientStatistics(_)
                | Error::LinkUnreachable { .. }
                | Error::ChainCollapsed { .. }
                | Error::NonConvergence { .. }
                | Error::NoSolution { .. }
                | Error::BootstrapExhausted { .. }
                | Error::NotBracketed { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_unit(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("{value} is outside [0, 1]")))
    }
}

pub(crate) fn check_positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("{value} must be finite and > 0")))
    }
}
