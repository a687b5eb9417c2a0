use serde::{Deserialize, Serialize};

use crate::error::{check_positive, Error, Result};

/// Timing of one experimental cycle, all durations in seconds.
///
/// A cycle is an atom-preparation stage followed by a run window that is cut
/// into trial slots of `trial_period`. Each trial starts with a write pulse.
/// Without a herald the trial ends with its slot. A heralded trial stops the
/// write sequence: the read pulse fires `storage_time` after the write pulse,
/// `post_read_gap` (measured from the start of the read pulse) later the
/// cleaning pulse follows, and writing resumes at the next free slot boundary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SequenceConfig {
    pub prep_duration: f64,
    pub run_duration: f64,
    pub write_pulse: f64,
    pub read_pulse: f64,
    pub clean_pulse: f64,
    pub post_read_gap: f64,
    pub trial_period: f64,
    pub storage_time: f64,
}

impl Default for SequenceConfig {
    fn default() -> Self {
        SequenceConfig {
            prep_duration: 42e-3,
            run_duration: 8e-3,
            write_pulse: 300e-9,
            read_pulse: 300e-9,
            clean_pulse: 200e-9,
            post_read_gap: 1300e-9,
            trial_period: 2000e-9,
            storage_time: 0.0,
        }
    }
}

impl SequenceConfig {
    pub fn with_storage_time(self, storage_time: f64) -> Self {
        SequenceConfig {
            storage_time,
            ..self
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_positive("prep_duration", self.prep_duration)?;
        check_positive("run_duration", self.run_duration)?;
        check_positive("write_pulse", self.write_pulse)?;
        check_positive("read_pulse", self.read_pulse)?;
        check_positive("clean_pulse", self.clean_pulse)?;
        check_positive("post_read_gap", self.post_read_gap)?;
        check_positive("trial_period", self.trial_period)?;
        if !(self.storage_time.is_finite() && self.storage_time >= 0.0) {
            return Err(Error::invalid(
                "storage_time",
                format!("{} must be >= 0", self.storage_time),
            ));
        }
        if self.trial_period < self.write_pulse {
            return Err(Error::invalid(
                "trial_period",
                "shorter than the write pulse",
            ));
        }
        if self.post_read_gap < self.read_pulse {
            return Err(Error::invalid(
                "post_read_gap",
                "the gap before the cleaning pulse must contain the read pulse",
            ));
        }
        if self.run_duration < self.trial_period {
            return Err(Error::invalid("run_duration", "shorter than one trial"));
        }
        Ok(())
    }

    /// Trial slots in one run window, `floor(run_duration / trial_period)`.
    pub fn trials_per_run(&self) -> u64 {
        // Guard against 8e-3 / 2e-6 landing a hair below 4000.
        (self.run_duration / self.trial_period * (1.0 + 1e-12)).floor() as u64
    }

    /// Cycle period `prep_duration + run_duration`.
    pub fn cycle_period(&self) -> f64 {
        self.prep_duration + self.run_duration
    }

    /// Cycles in `seconds` of experiment, rounded to the nearest whole cycle.
    pub fn cycles_in(&self, seconds: f64) -> u64 {
        (seconds / self.cycle_period()).round() as u64
    }

    /// Time from the start of a heralded trial's write pulse to the end of
    /// its cleaning pulse.
    pub fn heralded_span(&self) -> f64 {
        self.write_pulse + self.storage_time + self.post_read_gap + self.clean_pulse
    }

    /// Slots consumed by a heralded trial (at least one).
    pub fn heralded_slots(&self) -> u64 {
        let slots = (self.heralded_span() / self.trial_period * (1.0 - 1e-12)).ceil();
        (slots as u64).max(1)
    }

    /// Expected number of trials in one run window for a per-trial herald
    /// probability `p_herald`.
    pub fn expected_trials_per_run(&self, p_herald: f64) -> f64 {
        let k = self.heralded_slots() as f64;
        self.trials_per_run() as f64 / (1.0 + p_herald * (k - 1.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_give_4000_trials_and_20_cycles_per_second() {
        let c = SequenceConfig::default();
        c.validate().unwrap();
        assert_eq!(c.trials_per_run(), 4000);
        assert_eq!(c.cycles_in(1.0), 20);
        assert_eq!(c.heralded_slots(), 1);
    }

    #[test]
    fn long_storage_spans_slots() {
        let c = SequenceConfig::default().with_storage_time(1.15e-3);
        // 300 ns + 1.15 ms + 1300 ns + 200 ns = 1 151 800 ns -> 576 slots
        assert_eq!(c.heralded_slots(), 576);
        let c = SequenceConfig::default().with_storage_time(200e-9);
        assert_eq!(c.heralded_slots(), 1);
        let c = SequenceConfig::default().with_storage_time(201e-9);
        assert_eq!(c.heralded_slots(), 2);
    }

    #[test]
    fn rejects_bad_timing() {
        let c = SequenceConfig {
            trial_period: 100e-9,
            ..Default::default()
        };
        assert!(c.validate().is_err());
        let c = SequenceConfig {
            post_read_gap: 100e-9,
            ..Default::default()
        };
        assert!(c.validate().is_err());
    }
}
