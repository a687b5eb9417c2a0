use super::params::DecayModel;
use crate::error::{Error, Result};

/// Intrinsic retrieval efficiency after storing for `t` seconds,
/// `R₀ (exp(-t²/τ₀²) + exp(-t/τ₀)) / 2`.
///
/// The Gaussian term captures motional dephasing, the exponential term the
/// remaining loss; both are normalized so that `R(0) = R₀`.
pub fn retrieval_efficiency(t: f64, m: &DecayModel) -> Result<f64> {
    if t.is_nan() || t < 0.0 {
        return Err(Error::invalid("t", format!("storage time {t} must be >= 0")));
    }
    m.validate()?;
    let x = t / m.tau0;
    Ok(m.r0 * ((-x * x).exp() + (-x).exp()) / 2.0)
}
