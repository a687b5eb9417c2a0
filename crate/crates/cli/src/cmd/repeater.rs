use std::path::PathBuf;

use clap::ValueEnum;
use dlcz::repeater::{
    crossing_by_bisection, crossing_distance, crossing_report, sweep_distance, CrossingReport,
    Grid, LinkConvention, Multiplexing, PrExponent, RatePoint, RepeaterParams, R0_CIE, R0_CPE,
};
use dlcz::Error;
use serde::Serialize;

use super::Ctx;
use crate::error::CliError;
use crate::output::{emit, to_json, Format};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GridArg {
    Log,
    Linear,
}

fn parse_exponent(s: &str) -> Result<PrExponent, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_link(s: &str) -> Result<LinkConvention, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Repeater rate versus total distance.
#[derive(clap::Args, Debug)]
pub struct Args {
    #[arg(long, default_value_t = 10.0)]
    l_min_km: f64,
    #[arg(long, default_value_t = 2000.0)]
    l_max_km: f64,
    #[arg(long, default_value_t = 200)]
    points: usize,
    #[arg(long, value_enum, default_value_t = GridArg::Log)]
    grid: GridArg,
    /// Exponent of P_pr: literal_L_over_tau, total_elapsed_time or
    /// flight_time.
    #[arg(long, value_parser = parse_exponent)]
    interpretation: Option<PrExponent>,
    /// Elementary link length: L_over_n or L_over_2_pow_n.
    #[arg(long, value_parser = parse_link)]
    link_convention: Option<LinkConvention>,
    /// Zero-delay retrieval efficiency of the curve.
    #[arg(long)]
    r0: Option<f64>,
    #[arg(long)]
    chi: Option<f64>,
    /// Rate at which crossing distances are reported, per second.
    #[arg(long, default_value_t = 1e-4)]
    target_rate: f64,
    /// Where the JSON summary goes in CSV mode. Defaults to the output path
    /// with the extension `summary.json`, or stderr without an output path.
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct Summary {
    link_convention: LinkConvention,
    pr_exponent: PrExponent,
    multiplexing: Multiplexing,
    non_physical_units: bool,
    warnings: Vec<String>,
    params: RepeaterParams,
    l_min_km: f64,
    l_max_km: f64,
    points: usize,
    grid: Grid,
    target_rate: f64,
    /// Where this curve crosses the target; `None` when not bracketed.
    crossing_km: Option<f64>,
    cpe_km: Option<f64>,
    cie_km: Option<f64>,
    cpe_over_cie: Option<f64>,
    report: CrossingReport,
}

#[derive(Serialize)]
struct JsonDocument<'a> {
    summary: &'a Summary,
    points: &'a [RatePoint],
}

pub fn run(ctx: &Ctx, args: &Args) -> Result<(), CliError> {
    let mut p = ctx.settings.repeater;
    if let Some(e) = args.interpretation {
        p.pr_exponent = e;
    }
    if let Some(l) = args.link_convention {
        p.link_convention = l;
    }
    if let Some(r0) = args.r0 {
        p.r0 = r0;
    }
    if let Some(chi) = args.chi {
        p.chi = chi;
    }
    p.validate()?;
    if !(args.target_rate.is_finite() && args.target_rate > 0.0) {
        return Err(CliError::Validation("--target-rate must be > 0".into()));
    }
    let grid = match args.grid {
        GridArg::Log => Grid::Log,
        GridArg::Linear => Grid::Linear,
    };
    let curve = sweep_distance(&p, args.l_min_km, args.l_max_km, args.points, grid)?;
    let crossing_km = match crossing_distance(&curve, args.target_rate) {
        Ok(l) => Some(l),
        Err(Error::NotBracketed { .. }) => None,
        Err(e) => return Err(e.into()),
    };
    let at = |r0: f64| -> Result<Option<f64>, CliError> {
        let q = RepeaterParams { r0, ..p };
        Ok(crossing_by_bisection(&q, args.target_rate, 1.0, 50_000.0)?)
    };
    let (cpe_km, cie_km) = (at(R0_CPE)?, at(R0_CIE)?);
    let mut warnings = Vec::new();
    if !p.pr_exponent.is_physical() {
        warnings.push(format!(
            "pr_exponent {} divides km by s; rates in this mode are not physical",
            p.pr_exponent
        ));
    }
    let collapsed = curve.points.iter().filter(|pt| pt.rate == 0.0).count();
    if collapsed > 0 {
        warnings.push(format!("{collapsed} points collapsed or underflowed to a zero rate"));
    }
    let summary = Summary {
        link_convention: p.link_convention,
        pr_exponent: p.pr_exponent,
        multiplexing: p.multiplexing,
        non_physical_units: !p.pr_exponent.is_physical(),
        warnings,
        params: p,
        l_min_km: args.l_min_km,
        l_max_km: args.l_max_km,
        points: args.points,
        grid,
        target_rate: args.target_rate,
        crossing_km,
        cpe_km,
        cie_km,
        cpe_over_cie: cpe_km.zip(cie_km).map(|(a, b)| a / b),
        report: crossing_report(&p, args.target_rate)?,
    };

    match ctx.format_or(Format::Csv) {
        Format::Json => emit(
            ctx.out.as_deref(),
            &to_json(&JsonDocument {
                summary: &summary,
                points: &curve.points,
            }),
        ),
        Format::Csv => {
            let mut buf = Vec::new();
            curve
                .write_csv(&mut buf)
                .map_err(|e| CliError::Io(e.to_string()))?;
            let csv = String::from_utf8(buf).expect("csv is utf-8");
            let summary_path = args
                .summary
                .clone()
                .or_else(|| ctx.out.as_ref().map(|o| o.with_extension("summary.json")));
            let json = to_json(&summary);
            emit(ctx.out.as_deref(), &csv)?;
            match summary_path {
                Some(path) => emit(Some(&path), &json),
                None => {
                    eprint!("{json}");
                    Ok(())
                }
            }
        }
    }
}
