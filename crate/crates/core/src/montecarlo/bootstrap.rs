use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use super::seed::SeedSpec;
use crate::error::{Error, Result};
use crate::model::{
    bell_parameter, correlation_e, estimate_intrinsic_retrieval, CoincidenceCounts,
};

/// Bootstrap standard errors of the retrieval estimators for one dataset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RetrievalErrors {
    pub qubit: f64,
    pub left: f64,
    pub right: f64,
}

/// Standard errors for every estimator defined on the supplied datasets.
///
/// An estimator that is undefined on the observed counts themselves (no
/// coincidences, a silent Stokes detector) is reported as `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapErrors {
    /// One entry per dataset.
    pub correlation: Vec<Option<f64>>,
    /// Present when exactly four datasets with defined correlations are
    /// given, in CHSH order.
    pub bell: Option<f64>,
    /// One entry per dataset.
    pub retrieval: Vec<Option<RetrievalErrors>>,
    /// Resamples drawn, including redrawn ones.
    pub attempts: usize,
}

fn draw(rng: &mut impl Rng, mean: u64) -> u64 {
    if mean == 0 {
        return 0;
    }
    // Poisson::new only fails for non-positive or non-finite means.
    Poisson::new(mean as f64).expect("positive mean").sample(rng) as u64
}

/// Draws one Poisson resample of a dataset. The disjoint cells
/// (four coincidence classes plus heralds without coincidence on each Stokes
/// detector) are resampled independently so that the count invariants hold on
/// every resample.
fn resample(rng: &mut impl Rng, c: &CoincidenceCounts) -> CoincidenceCounts {
    let c13 = draw(rng, c.c13);
    let c14 = draw(rng, c.c14);
    let lone1 = draw(rng, c.s1 - c.c13 - c.c14);
    let c23 = draw(rng, c.c23);
    let c24 = draw(rng, c.c24);
    let lone2 = draw(rng, c.s2 - c.c23 - c.c24);
    let s1 = c13 + c14 + lone1;
    let s2 = c23 + c24 + lone2;
    CoincidenceCounts {
        c13,
        c14,
        c23,
        c24,
        s1,
        s2,
        n_trials: c.n_trials.max(s1 + s2),
    }
}

fn std_dev(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
}

/// Poisson bootstrap of the correlation, Bell and retrieval estimators.
///
/// Each count is resampled as an independent Poisson variate with mean equal
/// to the observed count and every estimator is recomputed. A resample on
/// which a defined estimator becomes undefined is redrawn, up to
/// `10 · n_resamples` attempts in total.
pub fn bootstrap_errors(
    datasets: &[CoincidenceCounts],
    eta_td: f64,
    n_resamples: usize,
    seed: &SeedSpec,
) -> Result<BootstrapErrors> {
    if n_resamples < 100 {
        return Err(Error::invalid("n_resamples", "at least 100 resamples"));
    }
    if datasets.is_empty() {
        return Err(Error::invalid("datasets", "nothing to resample"));
    }
    for d in datasets {
        d.validate()?;
    }
    let has_e: Vec<bool> = datasets.iter().map(|d| d.coincidences() > 0).collect();
    let has_r: Vec<bool> = datasets
        .iter()
        .map(|d| estimate_intrinsic_retrieval(d, eta_td).is_ok())
        .collect();
    let with_bell = datasets.len() == 4 && has_e.iter().all(|&b| b);

    let mut rng = seed.trial_rng(u64::MAX, 0);
    let mut e_samples = vec![Vec::with_capacity(n_resamples); datasets.len()];
    let mut r_samples = vec![Vec::with_capacity(n_resamples); datasets.len()];
    let mut bell_samples = Vec::with_capacity(n_resamples);
    let max_attempts = 10 * n_resamples;
    let mut attempts = 0;
    let mut accepted = 0;

    'draws: while accepted < n_resamples {
        if attempts == max_attempts {
            return Err(Error::BootstrapExhausted { attempts, accepted });
        }
        attempts += 1;
        let draws: Vec<CoincidenceCounts> =
            datasets.iter().map(|d| resample(&mut rng, d)).collect();
        let mut es = vec![f64::NAN; draws.len()];
        let mut rs = vec![[f64::NAN; 3]; draws.len()];
        for (i, d) in draws.iter().enumerate() {
            if has_e[i] {
                match correlation_e(d) {
                    Ok(e) => es[i] = e,
                    Err(_) => continue 'draws,
                }
            }
            if has_r[i] {
                match estimate_intrinsic_retrieval(d, eta_td) {
                    Ok(r) => rs[i] = [r.qubit.value, r.left.value, r.right.value],
                    Err(_) => continue 'draws,
                }
            }
        }
        for i in 0..draws.len() {
            e_samples[i].push(es[i]);
            r_samples[i].push(rs[i]);
        }
        if with_bell {
            bell_samples.push(bell_parameter([es[0], es[1], es[2], es[3]]));
        }
        accepted += 1;
    }

    let correlation = e_samples
        .iter()
        .zip(&has_e)
        .map(|(xs, &ok)| ok.then(|| std_dev(xs)))
        .collect();
    let retrieval = r_samples
        .iter()
        .zip(&has_r)
        .map(|(xs, &ok)| {
            ok.then(|| {
                let col = |k: usize| std_dev(&xs.iter().map(|r| r[k]).collect::<Vec<_>>());
                RetrievalErrors {
                    qubit: col(0),
                    left: col(1),
                    right: col(2),
                }
            })
        })
        .collect();
    Ok(BootstrapErrors {
        correlation,
        bell: with_bell.then(|| std_dev(&bell_samples)),
        retrieval,
        attempts,
    })
}
