use clap::ValueEnum;
use dlcz::model::{analytic_bell, MeasurementSettings, SourceParams};
use dlcz::montecarlo::{simulate_storage_time, Budget};

use super::{Ctx, TimeGrid};
use crate::error::CliError;
use crate::output::{emit, table, Format};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Analytic,
    Montecarlo,
}

/// CHSH Bell parameter versus storage time at the canonical angles.
#[derive(clap::Args, Debug)]
pub struct Args {
    #[command(flatten)]
    grid: TimeGrid,
    #[arg(long, value_enum, default_value_t = Mode::Analytic)]
    mode: Mode,
    /// Trials per measurement setting in Monte Carlo mode.
    #[arg(long, default_value_t = 1_000_000, value_parser = clap::value_parser!(u64).range(1..))]
    trials: u64,
    /// Poisson resamples for the Monte Carlo error bar.
    #[arg(long, default_value_t = 200)]
    resamples: usize,
    /// Replace the source by a pure Bell state without background.
    #[arg(long)]
    ideal: bool,
}

pub const HEADER: &str = "t_us,S,S_err";

pub fn run(ctx: &Ctx, args: &Args) -> Result<(), CliError> {
    let ts = args.grid.times_us()?;
    let mut settings = ctx.settings.clone();
    if args.ideal {
        settings.source = SourceParams::ideal(settings.source.chi);
    }
    let ctx = Ctx {
        settings,
        out: ctx.out.clone(),
        format: ctx.format,
        seed: ctx.seed,
    };
    let s = &ctx.settings;
    let read_eta = ctx.read_eta()?;
    let mut rows = Vec::with_capacity(ts.len());
    match args.mode {
        Mode::Analytic => {
            for &t_us in &ts {
                let v = analytic_bell(
                    &s.source,
                    &s.decay,
                    t_us * 1e-6,
                    read_eta,
                    &MeasurementSettings::canonical_chsh(),
                )?;
                rows.push(vec![t_us, v, 0.0]);
            }
        }
        Mode::Montecarlo => {
            let sim = ctx.simulator()?;
            let seed = ctx.seed();
            for (i, &t_us) in ts.iter().enumerate() {
                let row = simulate_storage_time(
                    &sim,
                    t_us * 1e-6,
                    Budget::Trials(args.trials),
                    args.resamples,
                    &seed.substream(i as u64),
                )?;
                rows.push(vec![t_us, row.s_bell.value, row.s_bell.std_err]);
            }
        }
    }
    emit(ctx.out.as_deref(), &table(ctx.format_or(Format::Csv), HEADER, &rows))
}
