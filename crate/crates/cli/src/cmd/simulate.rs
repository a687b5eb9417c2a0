use std::path::PathBuf;

use dlcz::model::MeasurementSettings;
use dlcz::montecarlo::write_records;
use serde::Serialize;

use super::Ctx;
use crate::error::CliError;
use crate::output::{emit, table, to_json, Format};

/// Runs the trial sequence for a stretch of experiment time.
#[derive(clap::Args, Debug)]
pub struct Args {
    /// Experiment time to simulate, seconds (whole cycles, rounded).
    #[arg(long, default_value_t = 1.0)]
    seconds: f64,
    /// Storage time between write and read, µs.
    #[arg(long, default_value_t = 0.0)]
    t_us: f64,
    #[arg(long, default_value_t = 0.0)]
    theta_s_deg: f64,
    #[arg(long, default_value_t = 0.0)]
    theta_as_deg: f64,
    /// Write every trial as one line
    /// `cycle,trial,herald,readout,background,timestamp_ns`.
    #[arg(long)]
    dump: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct Summary {
    seed: u64,
    seconds: f64,
    cycles: u64,
    storage_time_us: f64,
    theta_s_deg: f64,
    theta_as_deg: f64,
    trials: u64,
    heralds: u64,
    s1: u64,
    s2: u64,
    c13: u64,
    c14: u64,
    c23: u64,
    c24: u64,
    background_clicks: u64,
}

const CSV_HEADER: &str =
    "cycles,trials,heralds,s1,s2,c13,c14,c23,c24,background_clicks";

pub fn run(ctx: &Ctx, args: &Args) -> Result<(), CliError> {
    if !(args.seconds.is_finite() && args.seconds > 0.0) {
        return Err(CliError::Validation("--seconds must be > 0".into()));
    }
    if !(args.t_us.is_finite() && args.t_us >= 0.0) {
        return Err(CliError::Validation("--t-us must be >= 0".into()));
    }
    let set = MeasurementSettings::new(args.theta_s_deg, args.theta_as_deg);
    set.validate()?;
    let sim = ctx.simulator()?.with_storage_time(args.t_us * 1e-6)?;
    let cycles = sim.config().cycles_in(args.seconds);
    if cycles == 0 {
        return Err(CliError::Validation(format!(
            "{} s is shorter than half a cycle ({} s)",
            args.seconds,
            sim.config().cycle_period()
        )));
    }
    let run = if args.dump.is_some() {
        sim.run_with_records(&set, cycles, &ctx.seed())?
    } else {
        sim.run(&set, cycles, &ctx.seed())?
    };
    let c = run.counts;
    let summary = Summary {
        seed: ctx.seed,
        seconds: args.seconds,
        cycles,
        storage_time_us: args.t_us,
        theta_s_deg: args.theta_s_deg,
        theta_as_deg: args.theta_as_deg,
        trials: c.n_trials,
        heralds: c.heralds(),
        s1: c.s1,
        s2: c.s2,
        c13: c.c13,
        c14: c.c14,
        c23: c.c23,
        c24: c.c24,
        background_clicks: run.background_clicks,
    };
    let body = match ctx.format_or(Format::Json) {
        Format::Json => to_json(&summary),
        Format::Csv => {
            let row = [
                cycles, c.n_trials, c.heralds(), c.s1, c.s2, c.c13, c.c14, c.c23, c.c24,
                run.background_clicks,
            ];
            table(Format::Csv, CSV_HEADER, &[row.iter().map(|&v| v as f64).collect()])
        }
    };
    if let (Some(path), Some(records)) = (&args.dump, &run.records) {
        let mut buf = Vec::new();
        write_records(records, &mut buf).map_err(|e| CliError::Io(e.to_string()))?;
        std::fs::write(path, buf)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    }
    emit(ctx.out.as_deref(), &body)
}
