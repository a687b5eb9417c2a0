//! Polarization correlations of the retrieved photon pair and the CHSH
//! quantities built from them.

use std::f64::consts::SQRT_2;

use serde::{Deserialize, Serialize};

use super::params::{CoincidenceCounts, DecayModel, MeasurementSettings, SourceParams};
use super::retrieval::retrieval_efficiency;
use crate::error::{check_unit, Error, Result};

/// Tsirelson bound 2√2.
pub const TSIRELSON: f64 = 2.0 * SQRT_2;

/// Per-herald probabilities of the four detector-pair outcomes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutcomeProbabilities {
    pub p13: f64,
    pub p14: f64,
    pub p23: f64,
    pub p24: f64,
}

impl OutcomeProbabilities {
    pub fn total(&self) -> f64 {
        self.p13 + self.p14 + self.p23 + self.p24
    }

    /// Correlation function evaluated on expected rather than counted
    /// coincidences.
    pub fn correlation(&self) -> f64 {
        let total = self.total();
        if total == 0.0 {
            return 0.0;
        }
        (self.p13 + self.p24 - self.p14 - self.p23) / total
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.p13, self.p14, self.p23, self.p24]
    }
}

/// Decomposition of the readout into the correlated photon and the flat
/// background, per herald.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReadoutModel {
    /// Probability that the stored excitation is retrieved and detected.
    pub signal: f64,
    /// Werner joint projection probabilities `W_ij` (sum to 1), ordered
    /// `[13, 14, 23, 24]`.
    pub werner: [f64; 4],
    /// Background click probability after clipping so that
    /// `signal + background <= 1`.
    pub background: f64,
}

impl ReadoutModel {
    pub fn probabilities(&self) -> OutcomeProbabilities {
        let b = self.background / 4.0;
        let w = self.werner;
        OutcomeProbabilities {
            p13: self.signal * w[0] + b,
            p14: self.signal * w[1] + b,
            p23: self.signal * w[2] + b,
            p24: self.signal * w[3] + b,
        }
    }
}

/// Joint projection probabilities of a Werner state
/// `p |Φ⟩⟨Φ| + (1-p) I/4` with `|Φ⟩ = (|HH⟩ + e^{iΔ}|VV⟩)/√2`, analysed with
/// linear polarizers at `theta_s` (D₁, D₂ ⟂) and `theta_as` (D₃, D₄ ⟂),
/// angles in radians. Order `[13, 14, 23, 24]`.
pub fn werner_projections(p: f64, theta_s: f64, theta_as: f64, phase: f64) -> [f64; 4] {
    let (s2a, c2a) = (2.0 * theta_s).sin_cos();
    let (s2b, c2b) = (2.0 * theta_as).sin_cos();
    let k = p * (c2a * c2b + phase.cos() * s2a * s2b);
    let same = (1.0 + k) / 4.0;
    let cross = (1.0 - k) / 4.0;
    [same, cross, cross, same]
}

/// Readout decomposition after storage time `t` with a readout-channel
/// efficiency `readout_eta`.
pub fn readout_model(
    sp: &SourceParams,
    dm: &DecayModel,
    t: f64,
    readout_eta: f64,
    set: &MeasurementSettings,
) -> Result<ReadoutModel> {
    sp.validate()?;
    set.validate()?;
    check_unit("readout_eta", readout_eta)?;
    let signal = retrieval_efficiency(t, dm)? * readout_eta;
    let p = sp.werner_mixing(t);
    let werner = werner_projections(p, set.theta_s_rad(), set.theta_as_rad(), sp.total_phase());
    Ok(ReadoutModel {
        signal,
        werner,
        background: sp.p_noise.min(1.0 - signal),
    })
}

/// Per-herald probabilities of the D₁D₃, D₁D₄, D₂D₃, D₂D₄ coincidences.
///
/// `P_ij = q_s(t) W_ij + p_N / 4`, where `q_s(t)` is the retrieval efficiency
/// times `readout_eta` and `W_ij` the Werner projections at mixing `p(t)`.
/// The background term is clipped so that the four probabilities never sum
/// above one.
pub fn coincidence_probabilities(
    sp: &SourceParams,
    dm: &DecayModel,
    t: f64,
    readout_eta: f64,
    set: &MeasurementSettings,
) -> Result<OutcomeProbabilities> {
    Ok(readout_model(sp, dm, t, readout_eta, set)?.probabilities())
}

/// `E = (C₁₃ + C₂₄ − C₁₄ − C₂₃) / (C₁₃ + C₂₄ + C₁₄ + C₂₃)`.
pub fn correlation_e(counts: &CoincidenceCounts) -> Result<f64> {
    let total = counts.coincidences();
    if total == 0 {
        return Err(Error::InsufficientStatistics(
            "no coincidences recorded for the correlation function",
        ));
    }
    let same = (counts.c13 + counts.c24) as f64;
    let cross = (counts.c14 + counts.c23) as f64;
    Ok((same - cross) / total as f64)
}

/// `S = |E₁ − E₂ + E₃ + E₄|` for correlations measured at
/// `(θ_S,θ_AS), (θ_S,θ'_AS), (θ'_S,θ_AS), (θ'_S,θ'_AS)`.
pub fn bell_parameter(e: [f64; 4]) -> f64 {
    (e[0] - e[1] + e[2] + e[3]).abs()
}

/// Fidelity of the Werner state that produces Bell parameter `s` at the
/// canonical angles: `p = s / 2√2`, `F = (3p + 1) / 4`.
pub fn fidelity_from_bell(s: f64) -> Result<f64> {
    const SLACK: f64 = 1e-12;
    if !s.is_finite() || s < 0.0 {
        return Err(Error::invalid("s", format!("{s} must be finite and >= 0")));
    }
    if s > TSIRELSON + SLACK {
        return Err(Error::BeyondTsirelson(s));
    }
    let p = (s / TSIRELSON).min(1.0);
    Ok((3.0 * p + 1.0) / 4.0)
}

/// Werner mixing parameter of a state with fidelity `f` to the Bell state.
pub fn werner_from_fidelity(f: f64) -> f64 {
    (4.0 * f - 1.0) / 3.0
}

/// Bell parameter implied by the model at storage time `t` for the given four
/// settings (expected counts, no sampling noise).
pub fn analytic_bell(
    sp: &SourceParams,
    dm: &DecayModel,
    t: f64,
    readout_eta: f64,
    settings: &[MeasurementSettings; 4],
) -> Result<f64> {
    let mut e = [0.0; 4];
    for (slot, set) in e.iter_mut().zip(settings) {
        *slot = coincidence_probabilities(sp, dm, t, readout_eta, set)?.correlation();
    }
    Ok(bell_parameter(e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ideal() -> (SourceParams, DecayModel) {
        (SourceParams::ideal(0.01), DecayModel::new(1.0, 1.0).unwrap())
    }

    #[test]
    fn ideal_aligned_is_perfectly_correlated() {
        let (sp, dm) = ideal();
        let p = coincidence_probabilities(&sp, &dm, 0.0, 1.0, &MeasurementSettings::aligned())
            .unwrap();
        assert!((p.p13 - 0.5).abs() < 1e-15);
        assert!((p.p24 - 0.5).abs() < 1e-15);
        assert!(p.p14.abs() < 1e-15 && p.p23.abs() < 1e-15);
    }

    #[test]
    fn ideal_at_45_degrees_is_uniform() {
        let (sp, dm) = ideal();
        let p = coincidence_probabilities(&sp, &dm, 0.0, 1.0, &MeasurementSettings::new(0.0, 45.0))
            .unwrap();
        for v in p.as_array() {
            assert!((v - 0.25).abs() < 1e-15, "{v}");
        }
    }

    #[test]
    fn fully_mixed_is_isotropic() {
        let sp = SourceParams {
            werner_p0: 0.0,
            ..SourceParams::ideal(0.01)
        };
        let dm = DecayModel::new(1.0, 1.0).unwrap();
        for (a, b) in [(0.0, 0.0), (12.0, 80.0), (45.0, 67.5)] {
            let p = coincidence_probabilities(&sp, &dm, 0.0, 1.0, &MeasurementSettings::new(a, b))
                .unwrap();
            for v in p.as_array() {
                assert!((v - 0.25).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn correlation_examples() {
        let c = |c13, c14, c23, c24| CoincidenceCounts {
            c13,
            c14,
            c23,
            c24,
            s1: 10_000,
            s2: 10_000,
            n_trials: 100_000,
        };
        assert_eq!(correlation_e(&c(10, 0, 0, 10)).unwrap(), 1.0);
        assert_eq!(correlation_e(&c(0, 10, 10, 0)).unwrap(), -1.0);
        assert!((correlation_e(&c(853, 147, 147, 853)).unwrap() - 0.706).abs() < 1e-12);
        assert!(matches!(
            correlation_e(&c(0, 0, 0, 0)),
            Err(Error::InsufficientStatistics(_))
        ));
    }

    #[test]
    fn bell_values() {
        let (sp, dm) = ideal();
        let s = analytic_bell(&sp, &dm, 0.0, 1.0, &MeasurementSettings::canonical_chsh()).unwrap();
        assert!((s - TSIRELSON).abs() < 1e-12);
        assert_eq!(bell_parameter([0.0; 4]), 0.0);
        let sp = SourceParams {
            werner_p0: 0.884,
            ..sp
        };
        let s = analytic_bell(&sp, &dm, 0.0, 1.0, &MeasurementSettings::canonical_chsh()).unwrap();
        assert!((s - 2.5).abs() < 1e-3, "{s}");
    }

    #[test]
    fn fidelity_values() {
        assert!((fidelity_from_bell(TSIRELSON).unwrap() - 1.0).abs() < 1e-15);
        assert!((fidelity_from_bell(1.15).unwrap() - 0.555).abs() < 0.005);
        assert!((fidelity_from_bell(2.5).unwrap() - 0.913).abs() < 5e-4);
        assert_eq!(fidelity_from_bell(0.0).unwrap(), 0.25);
        assert!(matches!(fidelity_from_bell(2.9), Err(Error::BeyondTsirelson(_))));
    }

    #[test]
    fn background_clipped_when_signal_saturates() {
        let sp = SourceParams {
            p_noise: 0.5,
            ..SourceParams::ideal(0.01)
        };
        let dm = DecayModel::new(1.0, 1.0).unwrap();
        let p = coincidence_probabilities(&sp, &dm, 0.0, 0.8, &MeasurementSettings::aligned())
            .unwrap();
        assert!((p.total() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn phase_reduces_diagonal_correlations_only() {
        let sp = SourceParams::new(0.01, std::f64::consts::FRAC_PI_2, 0.0, 1.0, 1.0, 1.0, 0.0)
            .unwrap();
        let dm = DecayModel::new(1.0, 1.0).unwrap();
        let aligned = coincidence_probabilities(&sp, &dm, 0.0, 1.0, &MeasurementSettings::aligned())
            .unwrap();
        assert!((aligned.correlation() - 1.0).abs() < 1e-12);
        let diag =
            coincidence_probabilities(&sp, &dm, 0.0, 1.0, &MeasurementSettings::new(45.0, 45.0))
                .unwrap();
        assert!(diag.correlation().abs() < 1e-12);
    }
}
