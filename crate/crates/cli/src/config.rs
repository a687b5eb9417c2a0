//! Strict TOML run configuration. Every key carries its unit in the name and
//! unknown keys are rejected.

use std::path::{Path, PathBuf};

use dlcz::calibration::CalibrationFile;
use dlcz::model::{DecayModel, DetectionChain, SourceParams};
use dlcz::montecarlo::SequenceConfig;
use dlcz::repeater::{LinkConvention, Multiplexing, PrExponent, RepeaterParams};
use serde::Deserialize;

use crate::error::CliError;
use crate::output::Format;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub source: SourceSection,
    #[serde(default)]
    pub decay: DecaySection,
    #[serde(default)]
    pub detection: DetectionSection,
    #[serde(default)]
    pub sequence: SequenceSection,
    #[serde(default)]
    pub repeater: RepeaterSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceSection {
    pub chi: Option<f64>,
    pub p_noise: Option<f64>,
    pub werner_p0: Option<f64>,
    pub vis_tau_gauss_ms: Option<f64>,
    pub vis_tau_exp_ms: Option<f64>,
    pub phase_write_rad: Option<f64>,
    pub phase_read_rad: Option<f64>,
    /// Calibration JSON; relative paths resolve against the config file.
    pub calibration: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecaySection {
    pub r0: Option<f64>,
    pub tau0_ms: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectionSection {
    #[serde(default)]
    pub write: ChainSection,
    #[serde(default)]
    pub read: ChainSection,
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChainPreset {
    #[default]
    Experimental,
    Improved,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainSection {
    #[serde(default)]
    pub preset: ChainPreset,
    pub t_ocm: Option<f64>,
    pub cavity_loss: Option<f64>,
    pub eta_smf: Option<f64>,
    pub eta_filter: Option<f64>,
    pub eta_mmf: Option<f64>,
    pub eta_det: Option<f64>,
    pub eta_fc: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SequenceSection {
    pub prep_ms: Option<f64>,
    pub run_ms: Option<f64>,
    pub write_pulse_ns: Option<f64>,
    pub read_pulse_ns: Option<f64>,
    pub clean_pulse_ns: Option<f64>,
    pub post_read_gap_ns: Option<f64>,
    pub trial_period_ns: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RepeaterSection {
    pub nest_level: Option<u32>,
    pub mode_count: Option<u64>,
    pub memory_lifetime_s: Option<f64>,
    pub eta_td: Option<f64>,
    pub eta_fc: Option<f64>,
    pub chi: Option<f64>,
    pub l_att_km: Option<f64>,
    pub r0: Option<f64>,
    pub fiber_speed_m_per_s: Option<f64>,
    pub link_convention: Option<LinkConvention>,
    pub pr_exponent: Option<PrExponent>,
    pub multiplexing: Option<Multiplexing>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub path: Option<PathBuf>,
    pub format: Option<Format>,
    pub seed: Option<u64>,
}

/// Fully resolved and validated parameters, SI units.
#[derive(Debug, Clone)]
pub struct Settings {
    pub source: SourceParams,
    pub decay: DecayModel,
    pub write_chain: DetectionChain,
    pub read_chain: DetectionChain,
    pub sequence: SequenceConfig,
    pub repeater: RepeaterParams,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub seed: u64,
}

fn set(slot: &mut f64, value: Option<f64>, scale: f64) {
    if let Some(v) = value {
        *slot = v * scale;
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Validation(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Applies the configuration over the built-in defaults. `base` is the
    /// directory relative paths are resolved against.
    pub fn resolve(self, base: &Path) -> Result<Settings, CliError> {
        let mut source = SourceParams::calibrated();
        let mut decay = DecayModel::measured();
        if let Some(path) = &self.source.calibration {
            let path = base.join(path);
            let text = std::fs::read_to_string(&path)
                .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
            let cal = CalibrationFile::from_json(&text)?;
            if let Some(d) = cal.decay {
                decay = DecayModel { r0: d.r0, tau0: d.tau0_s };
            }
            if let Some(b) = cal.bell {
                source.werner_p0 = b.werner_p0;
                source.vis_tau_gauss = b.vis_tau_gauss_s.unwrap_or(f64::INFINITY);
                source.vis_tau_exp = b.vis_tau_exp_s.unwrap_or(f64::INFINITY);
                source.p_noise = b.p_noise;
            }
        }
        let s = &self.source;
        set(&mut source.chi, s.chi, 1.0);
        set(&mut source.p_noise, s.p_noise, 1.0);
        set(&mut source.werner_p0, s.werner_p0, 1.0);
        set(&mut source.vis_tau_gauss, s.vis_tau_gauss_ms, 1e-3);
        set(&mut source.vis_tau_exp, s.vis_tau_exp_ms, 1e-3);
        source = SourceParams::new(
            source.chi,
            s.phase_write_rad.unwrap_or(source.phase_write),
            s.phase_read_rad.unwrap_or(source.phase_read),
            source.werner_p0,
            source.vis_tau_gauss,
            source.vis_tau_exp,
            source.p_noise,
        )?;

        set(&mut decay.r0, self.decay.r0, 1.0);
        set(&mut decay.tau0, self.decay.tau0_ms, 1e-3);
        decay.validate()?;

        let write_chain = self.detection.write.chain()?;
        let read_chain = self.detection.read.chain()?;

        let mut sequence = SequenceConfig::default();
        let q = &self.sequence;
        set(&mut sequence.prep_duration, q.prep_ms, 1e-3);
        set(&mut sequence.run_duration, q.run_ms, 1e-3);
        set(&mut sequence.write_pulse, q.write_pulse_ns, 1e-9);
        set(&mut sequence.read_pulse, q.read_pulse_ns, 1e-9);
        set(&mut sequence.clean_pulse, q.clean_pulse_ns, 1e-9);
        set(&mut sequence.post_read_gap, q.post_read_gap_ns, 1e-9);
        set(&mut sequence.trial_period, q.trial_period_ns, 1e-9);
        sequence.validate()?;

        let mut repeater = RepeaterParams::default();
        let r = &self.repeater;
        if let Some(n) = r.nest_level {
            repeater.nest_level = n;
        }
        if let Some(n) = r.mode_count {
            repeater.mode_count = n;
        }
        set(&mut repeater.memory_lifetime, r.memory_lifetime_s, 1.0);
        set(&mut repeater.eta_td, r.eta_td, 1.0);
        set(&mut repeater.eta_fc, r.eta_fc, 1.0);
        set(&mut repeater.chi, r.chi, 1.0);
        set(&mut repeater.attenuation_length, r.l_att_km, 1.0);
        set(&mut repeater.r0, r.r0, 1.0);
        set(&mut repeater.fiber_speed, r.fiber_speed_m_per_s, 1.0);
        repeater.link_convention = r.link_convention.unwrap_or(repeater.link_convention);
        repeater.pr_exponent = r.pr_exponent.unwrap_or(repeater.pr_exponent);
        repeater.multiplexing = r.multiplexing.unwrap_or(repeater.multiplexing);
        repeater.validate()?;

        Ok(Settings {
            source,
            decay,
            write_chain,
            read_chain,
            sequence,
            repeater,
            out: self.output.path.map(|p| base.join(p)),
            format: self.output.format,
            seed: self.output.seed.unwrap_or(0),
        })
    }
}

impl ChainSection {
    fn chain(&self) -> Result<DetectionChain, CliError> {
        let mut c = match self.preset {
            ChainPreset::Experimental => DetectionChain::experimental(),
            ChainPreset::Improved => DetectionChain::improved(),
        };
        set(&mut c.t_ocm, self.t_ocm, 1.0);
        set(&mut c.cavity_loss, self.cavity_loss, 1.0);
        set(&mut c.eta_smf, self.eta_smf, 1.0);
        set(&mut c.eta_filter, self.eta_filter, 1.0);
        set(&mut c.eta_mmf, self.eta_mmf, 1.0);
        set(&mut c.eta_det, self.eta_det, 1.0);
        set(&mut c.eta_fc, self.eta_fc, 1.0);
        c.validate()?;
        Ok(c)
    }
}
