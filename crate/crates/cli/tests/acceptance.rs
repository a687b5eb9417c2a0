//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails.

use std::process::{Command, ExitCode};
use std::time::Instant;

use dlcz::calibration::{bell_model_value, fit_bell_model, published_bell_points};
use dlcz::model::{
    analytic_bell, bell_parameter, estimate_intrinsic_retrieval, fidelity_from_bell,
    retrieval_efficiency, total_detection_efficiency, DecayModel, DetectionChain,
    MeasurementSettings, SourceParams, TSIRELSON,
};
use dlcz::montecarlo::{
    bootstrap_errors, expected_estimators, run_trials, Budget, SeedSpec, SequenceConfig,
    Simulator,
};
use dlcz::repeater::{
    crossing_report, elementary_probability, repeater_rate, sweep_distance, Grid,
    Multiplexing, PrExponent, RepeaterParams, ANCHOR_TARGET_RATE, R0_CIE, R0_CPE,
};
use rand::{Rng, SeedableRng};
use rand_pcg::Pcg64Mcg;

type Check = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(name: &str, got: f64, want: f64, tol: f64) -> Result<(), String> {
    ensure((got - want).abs() <= tol, || format!("{name} = {got}, want {want} ± {tol}"))
}

fn e<E: std::fmt::Display>(err: E) -> String {
    err.to_string()
}

// 40-digit evaluations of the closed forms, computed outside this code base.
const ORACLE_R_023: f64 = 0.671_058_256_225_641_342_4;
const ORACLE_R_054: f64 = 0.511_978_988_871_806_356_4;
const ORACLE_ETA_EXPERIMENTAL: f64 = 0.150_750_642_424_242_424_2;
const ORACLE_ETA_IMPROVED: f64 = 0.890_217_658_536_585_365_9;
const ORACLE_P0_62_5KM: f64 = 1.029_797_308_775_858_499_5e-6;
const ORACLE_P0N_62_5KM: f64 = 1.029_267_779_189_950_257_2e-3;

fn decay_law() -> Check {
    let dm = DecayModel::measured();
    let a = retrieval_efficiency(0.23e-3, &dm).map_err(e)?;
    let b = retrieval_efficiency(0.54e-3, &dm).map_err(e)?;
    within("R(0.23 ms)", a, 0.667, 0.005)?;
    within("R(0.54 ms)", b, 0.512, 0.005)?;
    within("R(0.23 ms) vs oracle", a, ORACLE_R_023, 1e-14)?;
    within("R(0.54 ms) vs oracle", b, ORACLE_R_054, 1e-14)?;
    Ok(format!("R(0.23 ms) = {a:.4}, R(0.54 ms) = {b:.4}"))
}

fn detection_budgets() -> Check {
    let x = total_detection_efficiency(&DetectionChain::experimental()).map_err(e)?;
    let y = total_detection_efficiency(&DetectionChain::improved()).map_err(e)?;
    within("experimental η_TD", x, 0.150, 0.003)?;
    within("improved η_TD", y, 0.90, 0.01)?;
    within("experimental η_TD vs oracle", x, ORACLE_ETA_EXPERIMENTAL, 1e-15)?;
    within("improved η_TD vs oracle", y, ORACLE_ETA_IMPROVED, 1e-15)?;
    Ok(format!("η_TD = {x:.4} (experimental), {y:.4} (improved)"))
}

fn chsh_analytics() -> Check {
    let canon = MeasurementSettings::canonical_chsh();
    let ideal = SourceParams::ideal(0.02);
    let dm = DecayModel::new(1.0, 1e-3).map_err(e)?;
    let s_ideal = analytic_bell(&ideal, &dm, 0.0, 1.0, &canon).map_err(e)?;
    within("ideal S", s_ideal, TSIRELSON, 1e-12)?;
    let werner = SourceParams {
        werner_p0: 0.884,
        ..ideal
    };
    let s_w = analytic_bell(&werner, &dm, 0.0, 1.0, &canon).map_err(e)?;
    within("Werner S", s_w, 2.5, 0.001)?;
    let f = fidelity_from_bell(1.15).map_err(e)?;
    within("F(1.15)", f, 0.555, 0.005)?;
    Ok(format!("S_ideal = {s_ideal:.12}, S(p=0.884) = {s_w:.4}, F(1.15) = {f:.4}"))
}

fn bell_calibration() -> Check {
    let dm = DecayModel::measured();
    let points = published_bell_points();
    let fit = fit_bell_model(&points, &dm, 0.15, 1e-4).map_err(e)?;
    for (r, p) in fit.residuals.iter().zip(&points) {
        within(&format!("residual at {} ms", p.t * 1e3), *r, 0.0, 0.03)?;
    }
    let source = fit.source(0.02, 1e-4);
    let sim = Simulator::new(SequenceConfig::default(), source, dm, 0.15, 0.15).map_err(e)?;
    let canon = MeasurementSettings::canonical_chsh();
    let mut parts = Vec::new();
    for (i, p) in points.iter().enumerate() {
        let analytic = bell_model_value(&source, &dm, 0.15, p.t).map_err(e)?;
        let sim = sim.clone().with_storage_time(p.t).map_err(e)?;
        let cycles = Budget::Trials(10_000_000).cycles(&sim);
        let seed = SeedSpec::new(0xACCE_0004).substream(i as u64);
        let mut counts = Vec::new();
        for (k, set) in canon.iter().enumerate() {
            let run = sim.run(set, cycles, &seed.substream(k as u64)).map_err(e)?;
            ensure(run.counts.n_trials >= 10_000_000, || "fewer than 10^7 trials".into())?;
            counts.push(run.counts);
        }
        let corr: Vec<f64> = counts
            .iter()
            .map(dlcz::model::correlation_e)
            .collect::<Result<_, _>>()
            .map_err(e)?;
        let s = bell_parameter([corr[0], corr[1], corr[2], corr[3]]);
        let boot = bootstrap_errors(&counts, 0.15, 400, &seed.substream(9)).map_err(e)?;
        let err = boot.bell.ok_or("no Bell error bar")?;
        ensure((s - analytic).abs() <= 3.0 * err, || {
            format!("t = {} ms: MC {s:.4} ± {err:.4} vs analytic {analytic:.4}", p.t * 1e3)
        })?;
        parts.push(format!("{:.2} ms: {analytic:.3} / {s:.3}±{err:.3}", p.t * 1e3));
    }
    Ok(format!(
        "residuals {:?}; analytic / MC: {}",
        fit.residuals.iter().map(|r| (r * 1e4).round() / 1e4).collect::<Vec<_>>(),
        parts.join(", ")
    ))
}

fn sequencer() -> Check {
    let cfg = SequenceConfig::default();
    ensure(cfg.trials_per_run() == 4000, || format!("{} trials per run", cfg.trials_per_run()))?;
    let out = run_trials(
        &cfg,
        &SourceParams::calibrated(),
        &DecayModel::measured(),
        0.15,
        0.15,
        &MeasurementSettings::aligned(),
        cfg.cycles_in(1.0),
        &SeedSpec::new(5),
    )
    .map_err(e)?;
    ensure(out.cycles == 20 && out.counts.n_trials == 80_000, || {
        format!("{} cycles, {} trials", out.cycles, out.counts.n_trials)
    })?;
    Ok(format!("{} cycles × 4000 = {} trials", out.cycles, out.counts.n_trials))
}

fn random_repeater(rng: &mut Pcg64Mcg) -> RepeaterParams {
    RepeaterParams {
        nest_level: rng.random_range(1..=6),
        mode_count: rng.random_range(1..5000),
        memory_lifetime: rng.random_range(0.1..100.0),
        eta_td: rng.random_range(0.05..1.0),
        eta_fc: rng.random_range(0.05..1.0),
        chi: rng.random_range(1e-3..0.2),
        r0: rng.random_range(0.2..1.0),
        link_convention: dlcz::repeater::LinkConvention::ALL[rng.random_range(0..2)],
        pr_exponent: PrExponent::ALL[rng.random_range(0..3)],
        ..RepeaterParams::default()
    }
}

fn repeater_model() -> Check {
    let p = RepeaterParams::default();
    let el = elementary_probability(&p, 250.0).map_err(e)?;
    within("P0 relative error", el.p0 / ORACLE_P0_62_5KM - 1.0, 0.0, 1e-6)?;
    within("P0N relative error", el.p0n / ORACLE_P0N_62_5KM - 1.0, 0.0, 1e-6)?;

    let mut rng = Pcg64Mcg::seed_from_u64(0xACCE_0006);
    let le = |a: f64, b: f64| a <= b * (1.0 + 1e-12);
    for case in 0..300 {
        let q = random_repeater(&mut rng);
        let l = rng.random_range(1.0..2500.0);
        let r = repeater_rate(&q, l).map_err(e)?;
        let mut probs: Vec<f64> = r.levels.iter().map(|x| x.p).collect();
        if let Some(el) = r.elementary {
            probs.extend([el.p0, el.p0n]);
        }
        probs.extend(r.p_pr);
        ensure(probs.iter().all(|x| (0.0..=1.0).contains(x)) && r.rate >= 0.0, || {
            format!("case {case}: probability outside [0, 1]")
        })?;
        ensure(r.times().windows(2).all(|w| w[1] > w[0]), || {
            format!("case {case}: t_j not increasing")
        })?;
        let f = rng.random_range(1.0..2.0);
        for bumped in [
            RepeaterParams { r0: (q.r0 * f).min(1.0), ..q },
            RepeaterParams { eta_td: (q.eta_td * f).min(1.0), ..q },
            RepeaterParams { eta_fc: (q.eta_fc * f).min(1.0), ..q },
            RepeaterParams { mode_count: q.mode_count * 2, ..q },
            RepeaterParams { memory_lifetime: q.memory_lifetime * f, ..q },
        ] {
            let better = repeater_rate(&bumped, l).map_err(e)?.rate;
            ensure(le(r.rate, better), || format!("case {case}: rate not monotone"))?;
        }
        let exact = elementary_probability(&q, l);
        let linear = elementary_probability(
            &RepeaterParams {
                multiplexing: Multiplexing::Linear,
                ..q
            },
            l,
        );
        if let (Ok(a), Ok(b)) = (exact, linear) {
            if q.mode_count as f64 * a.p0 < 0.02 {
                ensure((a.p0n / b.p0n - 1.0).abs() <= 0.01, || {
                    format!("case {case}: exact and linear multiplexing differ")
                })?;
            }
        }
        if case % 10 == 0 {
            let cpe = sweep_distance(&RepeaterParams { r0: R0_CPE, ..q }, 10.0, 3000.0, 50, Grid::Log)
                .map_err(e)?;
            let cie = sweep_distance(&RepeaterParams { r0: R0_CIE, ..q }, 10.0, 3000.0, 50, Grid::Log)
                .map_err(e)?;
            ensure(
                cpe.points.iter().zip(&cie.points).all(|(a, b)| le(b.rate, a.rate)),
                || format!("case {case}: CIE above CPE"),
            )?;
        }
    }

    let report = crossing_report(&p, ANCHOR_TARGET_RATE).map_err(e)?;
    ensure(report.entries.len() == 18, || format!("{} report entries", report.entries.len()))?;
    println!("    crossing report at {ANCHOR_TARGET_RATE:e} /s (anchors 1000 km CPE, 430 km CIE, ±15 %):");
    let km = |x: Option<f64>| x.map_or("-".to_string(), |v| format!("{v:.0}"));
    for r in &report.entries {
        println!(
            "      {:<15} {:<19} chi={:<8.4} CPE {:>6} km  CIE {:>6} km  ratio {:>5}{}{}",
            r.link_convention.as_str(),
            r.pr_exponent.as_str(),
            r.chi,
            km(r.cpe_km),
            km(r.cie_km),
            r.ratio.map_or("-".into(), |x| format!("{x:.2}")),
            if r.reproduces_anchors { "  REPRODUCES" } else { "" },
            if r.non_physical_units { "  [non-physical units]" } else { "" },
        );
    }
    Ok(format!(
        "P0 = {:.6e}, P0N = {:.6e}; 300 random property cases; {} of 18 combinations reproduce both anchors",
        el.p0,
        el.p0n,
        report.reproducing().count()
    ))
}

struct Estimator {
    name: &'static str,
    value: f64,
    err: f64,
    expected: f64,
}

fn statistical_core() -> Check {
    let mut rng = Pcg64Mcg::seed_from_u64(0xACCE_0007);
    let mut worst: f64 = 0.0;
    let mut compared = 0;
    let mut min_heralds = u64::MAX;
    for case in 0..20 {
        let source = SourceParams {
            chi: rng.random_range(0.2..0.9),
            werner_p0: rng.random_range(0.5..1.0),
            vis_tau_gauss: rng.random_range(1e-3..1e-2),
            vis_tau_exp: rng.random_range(1e-3..1e-2),
            p_noise: rng.random_range(0.0..0.02),
            ..SourceParams::ideal(0.5)
        };
        let decay = DecayModel::new(rng.random_range(0.3..1.0), rng.random_range(0.5e-3..5e-3))
            .map_err(e)?;
        let write_eta = rng.random_range(0.2..0.9);
        let read_eta = rng.random_range(0.1..1.0);
        let t = rng.random_range(0.0..2e-3);
        let sim = Simulator::new(SequenceConfig::default(), source, decay, write_eta, read_eta)
            .map_err(e)?
            .with_storage_time(t)
            .map_err(e)?;
        let cycles = Budget::Heralds(1_000_000).cycles(&sim);
        let seed = SeedSpec::new(0xACCE_0007).substream(case);
        let aligned = sim
            .run(&MeasurementSettings::aligned(), cycles, &seed.substream(0))
            .map_err(e)?
            .counts;
        let mut chsh = Vec::new();
        for (k, set) in MeasurementSettings::canonical_chsh().iter().enumerate() {
            chsh.push(sim.run(set, cycles, &seed.substream(k as u64 + 1)).map_err(e)?.counts);
        }
        min_heralds = min_heralds
            .min(aligned.heralds())
            .min(chsh.iter().map(|c| c.heralds()).min().unwrap_or(0));
        let exp = expected_estimators(&sim, t).map_err(e)?;
        let ret = estimate_intrinsic_retrieval(&aligned, read_eta).map_err(e)?;
        let boot = bootstrap_errors(&chsh, read_eta, 200, &seed.substream(5)).map_err(e)?;
        let corr: Vec<f64> = chsh
            .iter()
            .map(dlcz::model::correlation_e)
            .collect::<Result<_, _>>()
            .map_err(e)?;
        let mut estimators = vec![
            Estimator { name: "R_qu", value: ret.qubit.value, err: ret.qubit.std_err, expected: exp.r_qu },
            Estimator { name: "R_L", value: ret.left.value, err: ret.left.std_err, expected: exp.r_l },
            Estimator { name: "R_R", value: ret.right.value, err: ret.right.std_err, expected: exp.r_r },
            Estimator {
                name: "S",
                value: bell_parameter([corr[0], corr[1], corr[2], corr[3]]),
                err: boot.bell.ok_or("no Bell error bar")?,
                expected: exp.s_bell,
            },
        ];
        for (k, c) in corr.iter().enumerate() {
            estimators.push(Estimator {
                name: ["E1", "E2", "E3", "E4"][k],
                value: *c,
                err: boot.correlation[k].ok_or("no correlation error bar")?,
                expected: exp.correlations[k],
            });
        }
        for est in &estimators {
            let z = (est.value - est.expected).abs() / est.err;
            worst = worst.max(z);
            compared += 1;
            ensure(z <= 3.0, || {
                format!(
                    "set {case}: {} = {:.5} ± {:.5}, analytic {:.5} ({z:.2} σ)",
                    est.name, est.value, est.err, est.expected
                )
            })?;
        }
    }

    let worst_oracle = density_matrix_oracle()?;
    Ok(format!(
        "20 sets, ≥{min_heralds} heralds per setting, {compared} comparisons, worst {worst:.2} σ; \
         density-matrix oracle max deviation {worst_oracle:.1e} over 1000 cases"
    ))
}

/// Explicit 4×4 Werner density matrix (real for zero phase) against the
/// closed-form projections.
fn density_matrix_oracle() -> Result<f64, String> {
    let mut rng = Pcg64Mcg::seed_from_u64(0xACCE_0070);
    let dm = DecayModel::new(1.0, 1e-3).map_err(e)?;
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let p: f64 = rng.random();
        let set = MeasurementSettings::new(rng.random_range(0.0..360.0), rng.random_range(0.0..360.0));
        let sp = SourceParams {
            werner_p0: p,
            ..SourceParams::ideal(0.02)
        };
        let got = dlcz::model::coincidence_probabilities(&sp, &dm, 0.0, 1.0, &set)
            .map_err(e)?
            .as_array();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let phi = [h, 0.0, 0.0, h];
        let mut rho = [[0.0; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                rho[i][j] = p * phi[i] * phi[j] + if i == j { (1.0 - p) / 4.0 } else { 0.0 };
            }
        }
        let pol = |th: f64| [th.cos(), th.sin()];
        let q = std::f64::consts::FRAC_PI_2;
        let (a, b) = (set.theta_s_rad(), set.theta_as_rad());
        let projectors = [
            (pol(a), pol(b)),
            (pol(a), pol(b + q)),
            (pol(a + q), pol(b)),
            (pol(a + q), pol(b + q)),
        ];
        for (k, (u, v)) in projectors.iter().enumerate() {
            let psi = [u[0] * v[0], u[0] * v[1], u[1] * v[0], u[1] * v[1]];
            let mut want = 0.0;
            for i in 0..4 {
                for j in 0..4 {
                    want += psi[i] * rho[i][j] * psi[j];
                }
            }
            worst = worst.max((got[k] - want).abs());
        }
    }
    ensure(worst <= 1e-12, || format!("density-matrix deviation {worst:e}"))?;
    Ok(worst)
}

fn cli(args: &[&str]) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_dlcz"))
        .args(args)
        .output()
        .map_err(e)?;
    ensure(out.status.success(), || {
        format!("`dlcz {}` failed: {}", args.join(" "), String::from_utf8_lossy(&out.stderr))
    })?;
    Ok(out.stdout)
}

fn determinism() -> Check {
    let dir = tempfile::tempdir().map_err(e)?;
    let fixtures = concat!(env!("CARGO_MANIFEST_DIR"), "/../core/fixtures");
    let retrieval = format!("{fixtures}/retrieval_points.csv");
    let bell = format!("{fixtures}/bell_points.csv");
    let commands: Vec<Vec<&str>> = vec![
        vec!["efficiency", "--montecarlo", "--trials", "200000", "--t-us", "0,230,540"],
        vec!["bell", "--t-us", "0,1150,2600"],
        vec!["bell", "--mode", "montecarlo", "--trials", "200000", "--t-us", "0,1150"],
        vec!["repeater", "--points", "60", "--summary", "/dev/null"],
        vec!["repeater", "--points", "60", "--format", "json"],
        vec!["calibrate", "--which", "decay", "--data", &retrieval],
        vec!["calibrate", "--which", "bell", "--data", &bell],
        vec!["simulate", "--seconds", "0.5"],
        vec!["simulate", "--seconds", "0.5", "--format", "csv"],
    ];
    for cmd in &commands {
        let mut args = cmd.clone();
        args.extend(["--seed", "2718"]);
        let a = cli(&args)?;
        let b = cli(&args)?;
        ensure(a == b && !a.is_empty(), || format!("`dlcz {}` is not reproducible", cmd.join(" ")))?;
    }
    let dumps: Vec<Vec<u8>> = ["a", "b"]
        .iter()
        .map(|name| {
            let path = dir.path().join(name);
            let p = path.to_str().unwrap();
            cli(&["simulate", "--seconds", "0.3", "--seed", "7", "--dump", p])?;
            std::fs::read(&path).map_err(e)
        })
        .collect::<Result<_, _>>()?;
    ensure(dumps[0] == dumps[1], || "click dumps differ".into())?;

    let sim = Simulator::new(
        SequenceConfig::default(),
        SourceParams::calibrated().with_chi(0.3),
        DecayModel::measured(),
        0.5,
        0.5,
    )
    .map_err(e)?
    .with_storage_time(0.3e-3)
    .map_err(e)?;
    let set = MeasurementSettings::new(45.0, 67.5);
    let seed = SeedSpec::new(31);
    let runs: Vec<_> = [1, 2, 4, 8]
        .iter()
        .map(|&w| sim.clone().with_workers(w).run_with_records(&set, 40, &seed))
        .collect::<Result<_, _>>()
        .map_err(e)?;
    ensure(runs.windows(2).all(|w| w[0] == w[1]), || "worker count changed the output".into())?;
    Ok(format!(
        "{} command lines byte-identical across reruns, click dump identical, 1/2/4/8 workers identical",
        commands.len()
    ))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Check); 8] = [
        ("1 decay law", decay_law),
        ("2 detection budgets", detection_budgets),
        ("3 CHSH analytics", chsh_analytics),
        ("4 Bell-curve calibration", bell_calibration),
        ("5 sequencer arithmetic", sequencer),
        ("6 repeater model", repeater_model),
        ("7 statistical core", statistical_core),
        ("8 determinism", determinism),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let start = Instant::now();
        let result = check();
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("PASS  criterion {name} ({secs:.1} s): {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL  criterion {name} ({secs:.1} s): {why}");
            }
        }
    }
    println!("acceptance: {} of 8 criteria passed", 8 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
