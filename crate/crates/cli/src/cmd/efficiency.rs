use dlcz::model::{estimate_intrinsic_retrieval, retrieval_efficiency, MeasurementSettings};

use super::{Ctx, TimeGrid};
use crate::error::CliError;
use crate::output::{emit, table, Format};

/// Retrieval efficiency versus storage time.
#[derive(clap::Args, Debug)]
pub struct Args {
    #[command(flatten)]
    grid: TimeGrid,
    /// Also simulate the qubit retrieval estimator at θ_S = θ_AS = 0°.
    #[arg(long)]
    montecarlo: bool,
    /// Trials per storage time for --montecarlo.
    #[arg(long, default_value_t = 1_000_000, value_parser = clap::value_parser!(u64).range(1..))]
    trials: u64,
}

pub fn run(ctx: &Ctx, args: &Args) -> Result<(), CliError> {
    let ts = args.grid.times_us()?;
    let sim = if args.montecarlo {
        Some(ctx.simulator()?)
    } else {
        None
    };
    let header = if args.montecarlo {
        "t_us,R_model,R_mc,R_mc_err"
    } else {
        "t_us,R_model"
    };
    let seed = ctx.seed();
    let mut rows = Vec::with_capacity(ts.len());
    for (i, &t_us) in ts.iter().enumerate() {
        let t = t_us * 1e-6;
        let mut row = vec![t_us, retrieval_efficiency(t, &ctx.settings.decay)?];
        if let Some(sim) = &sim {
            let sim = sim.clone().with_storage_time(t)?;
            let cycles = sim.cycles_for_trials(args.trials);
            let counts = sim
                .run(&MeasurementSettings::aligned(), cycles, &seed.substream(i as u64))?
                .counts;
            let est = estimate_intrinsic_retrieval(&counts, sim.read_eta())?;
            row.extend([est.qubit.value, est.qubit.std_err]);
        }
        rows.push(row);
    }
    emit(ctx.out.as_deref(), &table(ctx.format_or(Format::Csv), header, &rows))
}
