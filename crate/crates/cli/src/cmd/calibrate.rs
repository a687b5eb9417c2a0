use std::io::BufReader;
use std::path::PathBuf;

use clap::ValueEnum;
use dlcz::calibration::{
    fit_bell_model, fit_decay, read_points_csv, BellCalibration, CalibrationFile,
    DecayCalibration,
};

use super::Ctx;
use crate::error::CliError;
use crate::output::{emit, Format};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Which {
    Decay,
    Bell,
}

/// Fits the decay or correlation model to `t_s,value,sigma` data.
#[derive(clap::Args, Debug)]
pub struct Args {
    /// CSV with header `t_s,value,sigma`.
    #[arg(long)]
    data: PathBuf,
    #[arg(long, value_enum)]
    which: Which,
    /// Readout efficiency assumed by the Bell fit; defaults to η_TD of the
    /// configured read chain.
    #[arg(long)]
    readout_eta: Option<f64>,
    /// Background per read pulse assumed by the Bell fit; defaults to the
    /// configured source.
    #[arg(long)]
    p_noise: Option<f64>,
    /// Existing calibration JSON to update; the other section is kept.
    #[arg(long)]
    merge: Option<PathBuf>,
}

pub fn run(ctx: &Ctx, args: &Args) -> Result<(), CliError> {
    if ctx.format_or(Format::Json) != Format::Json {
        return Err(CliError::Validation("calibrate writes JSON only".into()));
    }
    let file = std::fs::File::open(&args.data)
        .map_err(|e| CliError::Validation(format!("{}: {e}", args.data.display())))?;
    let points = read_points_csv(BufReader::new(file))?;
    let mut out = match &args.merge {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
            CalibrationFile::from_json(&text)?
        }
        None => CalibrationFile::default(),
    };
    match args.which {
        Which::Decay => {
            let fit = fit_decay(&points)?;
            out.decay = Some(DecayCalibration {
                r0: fit.model.r0,
                tau0_s: fit.model.tau0,
                r0_err: fit.r0_err,
                tau0_err_s: fit.tau0_err,
                residuals: fit.residuals,
            });
        }
        Which::Bell => {
            let readout_eta = match args.readout_eta {
                Some(e) => e,
                None => ctx.read_eta()?,
            };
            let p_noise = args.p_noise.unwrap_or(ctx.settings.source.p_noise);
            let fit = fit_bell_model(&points, &ctx.settings.decay, readout_eta, p_noise)?;
            out.bell = Some(BellCalibration {
                werner_p0: fit.werner_p0,
                vis_tau_gauss_s: fit.vis_tau_gauss,
                vis_tau_exp_s: fit.vis_tau_exp,
                readout_eta,
                p_noise,
                residuals: fit.residuals,
            });
        }
    }
    let mut json = out.to_json();
    json.push('\n');
    emit(ctx.out.as_deref(), &json)
}
