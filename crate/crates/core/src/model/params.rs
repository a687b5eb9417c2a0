use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{check_positive, check_unit, Error, Result};

/// Parameters of the atom-photon source and of the effective readout state.
///
/// The two-photon state seen at the detectors is modelled as a Werner state
/// whose mixing parameter decays with storage time as
/// `p(t) = werner_p0 * (exp(-t²/vis_tau_gauss²) + exp(-t/vis_tau_exp)) / 2`,
/// plus an uncorrelated background of `p_noise` clicks per read pulse.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SourceParams {
    /// Per-trial pair-creation probability χ.
    pub chi: f64,
    /// Write phase φ, radians in `[0, 2π)`.
    pub phase_write: f64,
    /// Read phase ψ, radians in `[0, 2π)`.
    pub phase_read: f64,
    pub werner_p0: f64,
    /// Seconds.
    pub vis_tau_gauss: f64,
    /// Seconds.
    pub vis_tau_exp: f64,
    /// Background click probability per read pulse.
    pub p_noise: f64,
}

impl SourceParams {
    pub fn new(
        chi: f64,
        phase_write: f64,
        phase_read: f64,
        werner_p0: f64,
        vis_tau_gauss: f64,
        vis_tau_exp: f64,
        p_noise: f64,
    ) -> Result<Self> {
        let sp = SourceParams {
            chi,
            phase_write: phase_write.rem_euclid(TAU),
            phase_read: phase_read.rem_euclid(TAU),
            werner_p0,
            vis_tau_gauss,
            vis_tau_exp,
            p_noise,
        };
        sp.validate()?;
        Ok(sp)
    }

    /// Perfect Bell-state source with no background and no decay of the
    /// correlations.
    pub fn ideal(chi: f64) -> Self {
        SourceParams {
            chi,
            phase_write: 0.0,
            phase_read: 0.0,
            werner_p0: 1.0,
            vis_tau_gauss: f64::INFINITY,
            vis_tau_exp: f64::INFINITY,
            p_noise: 0.0,
        }
    }

    /// χ = 2 % source with the calibrated correlation decay reproducing the
    /// measured Bell curve. The decay constants are the output of
    /// `calibration::fit_bell_model` on the three published points and are
    /// checked against a fresh fit in the calibration tests.
    pub fn calibrated() -> Self {
        SourceParams {
            chi: 0.02,
            phase_write: 0.0,
            phase_read: 0.0,
            werner_p0: CALIBRATED_WERNER_P0,
            vis_tau_gauss: CALIBRATED_VIS_TAU_GAUSS,
            vis_tau_exp: CALIBRATED_VIS_TAU_EXP,
            p_noise: 1e-4,
        }
    }

    pub fn with_chi(self, chi: f64) -> Self {
        SourceParams { chi, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.chi.is_finite() && (0.0..1.0).contains(&self.chi)) {
            return Err(Error::invalid("chi", format!("{} is outside [0, 1)", self.chi)));
        }
        check_unit("werner_p0", self.werner_p0)?;
        if !(self.p_noise.is_finite() && (0.0..1.0).contains(&self.p_noise)) {
            return Err(Error::invalid(
                "p_noise",
                format!("{} is outside [0, 1)", self.p_noise),
            ));
        }
        // Infinity is allowed: it means "no decay".
        for (name, v) in [
            ("vis_tau_gauss", self.vis_tau_gauss),
            ("vis_tau_exp", self.vis_tau_exp),
        ] {
            if v.is_nan() || v <= 0.0 {
                return Err(Error::invalid(name, format!("{v} must be > 0")));
            }
        }
        if !(self.phase_write.is_finite() && self.phase_read.is_finite()) {
            return Err(Error::invalid("phase", "phases must be finite"));
        }
        Ok(())
    }

    /// Total phase φ + ψ of the two-photon state.
    pub fn total_phase(&self) -> f64 {
        self.phase_write + self.phase_read
    }

    /// Werner mixing parameter after a storage time `t` (seconds).
    pub fn werner_mixing(&self, t: f64) -> f64 {
        let g = (-(t * t) / (self.vis_tau_gauss * self.vis_tau_gauss)).exp();
        let e = (-t / self.vis_tau_exp).exp();
        self.werner_p0 * (g + e) / 2.0
    }
}

// Output of `fit_bell_model` on the published Bell points with the measured
// decay, readout efficiency 0.15 and p_N = 1e-4.
pub(crate) const CALIBRATED_WERNER_P0: f64 = 0.886_981_443_299_480_6;
pub(crate) const CALIBRATED_VIS_TAU_GAUSS: f64 = 2.291_494_998_588_123e-3;
pub(crate) const CALIBRATED_VIS_TAU_EXP: f64 = 6.597_578_976_006_073e-3;

/// Retrieval-efficiency decay `R(t) = R₀ (exp(-t²/τ₀²) + exp(-t/τ₀)) / 2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayModel {
    pub r0: f64,
    /// Seconds.
    pub tau0: f64,
}

impl DecayModel {
    pub fn new(r0: f64, tau0: f64) -> Result<Self> {
        let m = DecayModel { r0, tau0 };
        m.validate()?;
        Ok(m)
    }

    /// R₀ = 0.77, τ₀ = 1 ms.
    pub fn measured() -> Self {
        DecayModel {
            r0: 0.77,
            tau0: 1e-3,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_unit("r0", self.r0)?;
        if self.tau0.is_nan() || self.tau0 <= 0.0 {
            return Err(Error::invalid("tau0", format!("{} must be > 0", self.tau0)));
        }
        Ok(())
    }
}

/// Efficiency factors of one detection channel, from cavity escape to the
/// single-photon detector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionChain {
    /// Output-coupler transmission.
    pub t_ocm: f64,
    /// Intracavity round-trip loss.
    pub cavity_loss: f64,
    pub eta_smf: f64,
    pub eta_filter: f64,
    pub eta_mmf: f64,
    pub eta_det: f64,
    /// Telecom frequency conversion; 1.0 when the node has none.
    pub eta_fc: f64,
}

impl DetectionChain {
    /// Chain of the 6 m ring-cavity setup (η_TD ≈ 15 %).
    pub fn experimental() -> Self {
        DetectionChain {
            t_ocm: 0.20,
            cavity_loss: 0.13,
            eta_smf: 0.71,
            eta_filter: 0.56,
            eta_mmf: 0.92,
            eta_det: 0.68,
            eta_fc: 1.0,
        }
    }

    /// Projected chain with a 0.5 % loss cavity (η_TD ≈ 90 %).
    pub fn improved() -> Self {
        DetectionChain {
            t_ocm: 0.20,
            cavity_loss: 0.005,
            eta_smf: 0.99,
            eta_filter: 0.98,
            eta_mmf: 0.99,
            eta_det: 0.95,
            eta_fc: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_unit("t_ocm", self.t_ocm)?;
        check_unit("cavity_loss", self.cavity_loss)?;
        check_unit("eta_smf", self.eta_smf)?;
        check_unit("eta_filter", self.eta_filter)?;
        check_unit("eta_mmf", self.eta_mmf)?;
        check_unit("eta_det", self.eta_det)?;
        check_unit("eta_fc", self.eta_fc)?;
        if self.t_ocm + self.cavity_loss <= 0.0 {
            return Err(Error::invalid(
                "t_ocm + cavity_loss",
                "escape efficiency denominator is zero",
            ));
        }
        Ok(())
    }
}

/// Polarization analysis angles, stored in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasurementSettings {
    pub theta_s: f64,
    pub theta_as: f64,
}

impl MeasurementSettings {
    pub const fn new(theta_s: f64, theta_as: f64) -> Self {
        MeasurementSettings { theta_s, theta_as }
    }

    /// θ_S = θ_AS = 0°, the setting used for the retrieval estimators.
    pub const fn aligned() -> Self {
        MeasurementSettings::new(0.0, 0.0)
    }

    /// The four CHSH settings in the order `(θ_S,θ_AS), (θ_S,θ'_AS),
    /// (θ'_S,θ_AS), (θ'_S,θ'_AS)` for θ_S = 0°, θ'_S = 45°, θ_AS = 22.5°,
    /// θ'_AS = 67.5°.
    pub const fn canonical_chsh() -> [MeasurementSettings; 4] {
        [
            MeasurementSettings::new(0.0, 22.5),
            MeasurementSettings::new(0.0, 67.5),
            MeasurementSettings::new(45.0, 22.5),
            MeasurementSettings::new(45.0, 67.5),
        ]
    }

    pub fn validate(&self) -> Result<()> {
        if self.theta_s.is_finite() && self.theta_as.is_finite() {
            Ok(())
        } else {
            Err(Error::invalid("theta", "angles must be finite"))
        }
    }

    pub fn theta_s_rad(&self) -> f64 {
        self.theta_s.to_radians()
    }

    pub fn theta_as_rad(&self) -> f64 {
        self.theta_as.to_radians()
    }
}

/// Coincidence and single counts accumulated at one pair of analysis angles.
///
/// Detector labels follow the setup: D₁/D₂ are the Stokes (herald) detectors,
/// D₃/D₄ the anti-Stokes (readout) detectors.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CoincidenceCounts {
    pub c13: u64,
    pub c14: u64,
    pub c23: u64,
    pub c24: u64,
    pub s1: u64,
    pub s2: u64,
    pub n_trials: u64,
}

impl CoincidenceCounts {
    pub fn validate(&self) -> Result<()> {
        if self.c13 + self.c14 > self.s1 {
            return Err(Error::invalid("c13 + c14", "exceeds Stokes singles s1"));
        }
        if self.c23 + self.c24 > self.s2 {
            return Err(Error::invalid("c23 + c24", "exceeds Stokes singles s2"));
        }
        if self.s1 + self.s2 > self.n_trials {
            return Err(Error::invalid("s1 + s2", "more heralds than trials"));
        }
        Ok(())
    }

    pub fn coincidences(&self) -> u64 {
        self.c13 + self.c14 + self.c23 + self.c24
    }

    pub fn heralds(&self) -> u64 {
        self.s1 + self.s2
    }

    /// Multiplies every count by `k`.
    pub fn scaled(&self, k: u64) -> Self {
        CoincidenceCounts {
            c13: self.c13 * k,
            c14: self.c14 * k,
            c23: self.c23 * k,
            c24: self.c24 * k,
            s1: self.s1 * k,
            s2: self.s2 * k,
            n_trials: self.n_trials * k,
        }
    }

    /// Adds the counts of `other` into `self`.
    pub fn merge(&mut self, other: &CoincidenceCounts) {
        self.c13 += other.c13;
        self.c14 += other.c14;
        self.c23 += other.c23;
        self.c24 += other.c24;
        self.s1 += other.s1;
        self.s2 += other.s2;
        self.n_trials += other.n_trials;
    }
}

/// Ring-cavity geometry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CavityParams {
    /// Round-trip length, meters.
    pub length: f64,
    pub finesse_left: f64,
    pub finesse_right: f64,
}

impl CavityParams {
    /// 6000 mm ring cavity with finesses 16.9 / 17.0.
    pub fn experimental() -> Self {
        CavityParams {
            length: 6.0,
            finesse_left: 16.9,
            finesse_right: 17.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_positive("length", self.length)?;
        for (name, f) in [
            ("finesse_left", self.finesse_left),
            ("finesse_right", self.finesse_right),
        ] {
            if !(f.is_finite() && f > 1.0) {
                return Err(Error::invalid(name, format!("{f} must be > 1")));
            }
        }
        Ok(())
    }
}
