use std::io::Write;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::seed::SeedSpec;
use super::sequence::SequenceConfig;
use crate::error::{check_unit, Error, Result};
use crate::model::{
    readout_model, CoincidenceCounts, DecayModel, MeasurementSettings, SourceParams,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StokesDetector {
    D1,
    D2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AntiStokesDetector {
    D3,
    D4,
}

/// One simulated trial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClickRecord {
    pub cycle_index: u64,
    pub trial_index: u64,
    pub herald_detector: Option<StokesDetector>,
    pub readout_detector: Option<AntiStokesDetector>,
    /// Whether the readout click came from the background. Diagnostic only;
    /// the estimators never see it.
    pub readout_is_background: bool,
    /// Start of the trial's write pulse, seconds from the start of the run
    /// window.
    pub timestamp: f64,
}

impl ClickRecord {
    /// `cycle,trial,herald,readout,background,timestamp_ns` with `-` for an
    /// absent detector.
    pub fn to_line(&self) -> String {
        let herald = match self.herald_detector {
            Some(StokesDetector::D1) => "D1",
            Some(StokesDetector::D2) => "D2",
            None => "-",
        };
        let readout = match self.readout_detector {
            Some(AntiStokesDetector::D3) => "D3",
            Some(AntiStokesDetector::D4) => "D4",
            None => "-",
        };
        format!(
            "{},{},{},{},{},{}",
            self.cycle_index,
            self.trial_index,
            herald,
            readout,
            u8::from(self.readout_is_background),
            (self.timestamp * 1e9).round() as u64
        )
    }
}

/// Writes records one per line.
pub fn write_records<W: Write>(records: &[ClickRecord], mut out: W) -> std::io::Result<()> {
    for r in records {
        writeln!(out, "{}", r.to_line())?;
    }
    out.flush()
}

/// Result of a simulation at one measurement setting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunOutput {
    pub counts: CoincidenceCounts,
    pub cycles: u64,
    /// Readout clicks that came from the background (diagnostic).
    pub background_clicks: u64,
    #[serde(skip)]
    pub records: Option<Vec<ClickRecord>>,
}

/// Per-herald cumulative thresholds for one Stokes detector, in the order
/// correlated D₃, correlated D₄, background D₃, background D₄.
#[derive(Debug, Clone, Copy)]
struct ReadoutTable {
    thresholds: [[f64; 4]; 2],
}

impl ReadoutTable {
    fn sample(&self, stokes: usize, u: f64) -> Option<(AntiStokesDetector, bool)> {
        let th = &self.thresholds[stokes];
        if u < th[0] {
            Some((AntiStokesDetector::D3, false))
        } else if u < th[1] {
            Some((AntiStokesDetector::D4, false))
        } else if u < th[2] {
            Some((AntiStokesDetector::D3, true))
        } else if u < th[3] {
            Some((AntiStokesDetector::D4, true))
        } else {
            None
        }
    }
}

/// Discrete-event simulator of the write/herald/read sequence.
#[derive(Debug, Clone)]
pub struct Simulator {
    cfg: SequenceConfig,
    source: SourceParams,
    decay: DecayModel,
    write_eta: f64,
    read_eta: f64,
    workers: Option<usize>,
}

impl Simulator {
    /// Validates every input; nothing is simulated on failure.
    pub fn new(
        cfg: SequenceConfig,
        source: SourceParams,
        decay: DecayModel,
        write_eta: f64,
        read_eta: f64,
    ) -> Result<Self> {
        cfg.validate()?;
        source.validate()?;
        decay.validate()?;
        check_unit("write_eta", write_eta)?;
        check_unit("read_eta", read_eta)?;
        Ok(Simulator {
            cfg,
            source,
            decay,
            write_eta,
            read_eta,
            workers: None,
        })
    }

    /// Runs on a dedicated pool of `n` threads instead of the global pool.
    pub fn with_workers(mut self, n: usize) -> Self {
        self.workers = Some(n.max(1));
        self
    }

    pub fn with_storage_time(mut self, t: f64) -> Result<Self> {
        self.cfg = self.cfg.with_storage_time(t);
        self.cfg.validate()?;
        Ok(self)
    }

    pub fn config(&self) -> &SequenceConfig {
        &self.cfg
    }

    pub fn source(&self) -> &SourceParams {
        &self.source
    }

    pub fn decay(&self) -> &DecayModel {
        &self.decay
    }

    pub fn read_eta(&self) -> f64 {
        self.read_eta
    }

    pub fn write_eta(&self) -> f64 {
        self.write_eta
    }

    /// Per-trial herald probability χ·η_write.
    pub fn herald_probability(&self) -> f64 {
        self.source.chi * self.write_eta
    }

    /// Cycles needed for about `trials` trials.
    pub fn cycles_for_trials(&self, trials: u64) -> u64 {
        let per = self.cfg.expected_trials_per_run(self.herald_probability());
        ((trials as f64 / per).ceil() as u64).max(1)
    }

    /// Cycles needed for about `heralds` heralds.
    pub fn cycles_for_heralds(&self, heralds: u64) -> u64 {
        let p = self.herald_probability();
        if p == 0.0 {
            return 1;
        }
        self.cycles_for_trials((heralds as f64 / p).ceil() as u64)
    }

    fn readout_table(&self, set: &MeasurementSettings) -> Result<ReadoutTable> {
        let m = readout_model(
            &self.source,
            &self.decay,
            self.cfg.storage_time,
            self.read_eta,
            set,
        )?;
        let mut thresholds = [[0.0; 4]; 2];
        for (i, th) in thresholds.iter_mut().enumerate() {
            // Conditional on the Stokes detector, whose marginal is 1/2.
            let c3 = 2.0 * m.signal * m.werner[2 * i];
            let c4 = 2.0 * m.signal * m.werner[2 * i + 1];
            let b = m.background / 2.0;
            th[0] = c3;
            th[1] = c3 + c4;
            th[2] = th[1] + b;
            th[3] = th[2] + b;
        }
        Ok(ReadoutTable { thresholds })
    }

    fn run_cycle(
        &self,
        table: &ReadoutTable,
        cycle: u64,
        seed: &SeedSpec,
        keep_records: bool,
    ) -> (CoincidenceCounts, u64, Vec<ClickRecord>) {
        let slots = self.cfg.trials_per_run();
        let herald_slots = self.cfg.heralded_slots();
        let p_herald = self.herald_probability();
        let mut counts = CoincidenceCounts::default();
        let mut background = 0;
        let mut records = Vec::new();
        let mut slot = 0;
        let mut trial = 0;
        while slot < slots {
            let mut rng = seed.trial_rng(cycle, trial);
            let mut record = ClickRecord {
                cycle_index: cycle,
                trial_index: trial,
                herald_detector: None,
                readout_detector: None,
                readout_is_background: false,
                timestamp: slot as f64 * self.cfg.trial_period,
            };
            counts.n_trials += 1;
            if rng.random::<f64>() < p_herald {
                let stokes = usize::from(rng.random::<f64>() >= 0.5);
                record.herald_detector = Some(if stokes == 0 {
                    counts.s1 += 1;
                    StokesDetector::D1
                } else {
                    counts.s2 += 1;
                    StokesDetector::D2
                });
                if let Some((det, is_bg)) = table.sample(stokes, rng.random::<f64>()) {
                    match (stokes, det) {
                        (0, AntiStokesDetector::D3) => counts.c13 += 1,
                        (0, AntiStokesDetector::D4) => counts.c14 += 1,
                        (_, AntiStokesDetector::D3) => counts.c23 += 1,
                        (_, AntiStokesDetector::D4) => counts.c24 += 1,
                    }
                    background += u64::from(is_bg);
                    record.readout_detector = Some(det);
                    record.readout_is_background = is_bg;
                }
                slot += herald_slots;
            } else {
                slot += 1;
            }
            if keep_records {
                records.push(record);
            }
            trial += 1;
        }
        (counts, background, records)
    }

    fn run_inner(
        &self,
        set: &MeasurementSettings,
        n_cycles: u64,
        seed: &SeedSpec,
        keep_records: bool,
    ) -> Result<RunOutput> {
        if n_cycles == 0 {
            return Err(Error::invalid("n_cycles", "at least one cycle is required"));
        }
        let table = self.readout_table(set)?;
        let go = || {
            (0..n_cycles)
                .into_par_iter()
                .map(|c| self.run_cycle(&table, c, seed, keep_records))
                .collect::<Vec<_>>()
        };
        let per_cycle = match self.workers {
            Some(n) => rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::invalid("workers", e.to_string()))?
                .install(go),
            None => go(),
        };
        // Fixed reduction order: by cycle index.
        let mut counts = CoincidenceCounts::default();
        let mut background_clicks = 0;
        let mut records = keep_records.then(Vec::new);
        for (c, b, r) in per_cycle {
            counts.merge(&c);
            background_clicks += b;
            if let Some(all) = records.as_mut() {
                all.extend(r);
            }
        }
        Ok(RunOutput {
            counts,
            cycles: n_cycles,
            background_clicks,
            records,
        })
    }

    /// Simulates `n_cycles` cycles at one measurement setting and returns the
    /// accumulated counts.
    pub fn run(
        &self,
        set: &MeasurementSettings,
        n_cycles: u64,
        seed: &SeedSpec,
    ) -> Result<RunOutput> {
        self.run_inner(set, n_cycles, seed, false)
    }

    /// Like [`Simulator::run`] but also keeps every [`ClickRecord`].
    pub fn run_with_records(
        &self,
        set: &MeasurementSettings,
        n_cycles: u64,
        seed: &SeedSpec,
    ) -> Result<RunOutput> {
        self.run_inner(set, n_cycles, seed, true)
    }
}

/// Free-function form of [`Simulator::run`].
#[allow(clippy::too_many_arguments)]
pub fn run_trials(
    cfg: &SequenceConfig,
    sp: &SourceParams,
    dm: &DecayModel,
    write_eta: f64,
    read_eta: f64,
    set: &MeasurementSettings,
    n_cycles: u64,
    seed: &SeedSpec,
) -> Result<RunOutput> {
    Simulator::new(*cfg, *sp, *dm, write_eta, read_eta)?.run(set, n_cycles, seed)
}
