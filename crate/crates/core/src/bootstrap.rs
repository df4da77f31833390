//! Bias-corrected and accelerated (BCa) bootstrap intervals for the
//! difference between two scores computed on the same evaluation items.
//!
//! Resample `b` draws its item indices from `ChaCha8Rng` seeded with the
//! user seed and switched to stream `b`. Each resample therefore has its own
//! reproducible index stream and the result does not depend on the order in
//! which resamples are evaluated.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::normal;
use crate::{Error, Result};

/// Default number of bootstrap resamples.
pub const DEFAULT_RESAMPLES: usize = 10_000;

/// Minimum number of items for a bootstrap interval.
pub const MIN_ITEMS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BcaInterval {
    pub lower: f64,
    pub upper: f64,
    pub level: f64,
    pub resamples: usize,
    pub seed: u64,
    /// Point estimate on the full item set.
    pub estimate: f64,
    /// Bias correction.
    pub z0: f64,
    /// Acceleration.
    #[serde(rename = "a")]
    pub acceleration: f64,
    /// Resamples on which the statistic was undefined.
    pub failures: usize,
}

type Statistic<'a> = Box<dyn Fn(&[usize]) -> Option<f64> + Sync + 'a>;

/// A statistic over a multiset of item indices, typically
/// `score_A(items) - score_B(items)`. `None` marks an undefined value.
pub struct PairedScoreDiff<'a> {
    item_count: usize,
    statistic: Statistic<'a>,
}

impl<'a> PairedScoreDiff<'a> {
    pub fn new<F>(item_count: usize, statistic: F) -> Self
    where
        F: Fn(&[usize]) -> Option<f64> + Sync + 'a,
    {
        PairedScoreDiff {
            item_count,
            statistic: Box::new(statistic),
        }
    }

    pub fn item_count(&self) -> usize {
        self.item_count
    }

    pub fn evaluate(&self, items: &[usize]) -> Option<f64> {
        (self.statistic)(items).filter(|v| v.is_finite())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Verdict {
    #[serde(rename = "A_wins")]
    AWins,
    #[serde(rename = "B_wins")]
    BWins,
    #[serde(rename = "tie")]
    Tie,
}

/// `A` wins when the whole interval is above zero, `B` when it is below;
/// an interval touching zero is a tie.
pub fn significance_verdict(interval: &BcaInterval) -> Verdict {
    if interval.lower > 0.0 {
        Verdict::AWins
    } else if interval.upper < 0.0 {
        Verdict::BWins
    } else {
        Verdict::Tie
    }
}

fn resample_indices(n: usize, seed: u64, resample: usize) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(resample as u64);
    (0..n).map(|_| rng.random_range(0..n)).collect()
}

/// The raw bootstrap distribution, one entry per resample in resample order.
pub fn bootstrap_distribution(
    diff: &PairedScoreDiff<'_>,
    resamples: usize,
    seed: u64,
) -> Vec<Option<f64>> {
    let n = diff.item_count();
    (0..resamples)
        .into_par_iter()
        .map(|b| diff.evaluate(&resample_indices(n, seed, b)))
        .collect()
}

/// Leave-one-out estimates; undefined ones are dropped.
fn jackknife(diff: &PairedScoreDiff<'_>) -> Vec<f64> {
    let n = diff.item_count();
    (0..n)
        .into_par_iter()
        .filter_map(|left_out| {
            let items: Vec<usize> = (0..n).filter(|&i| i != left_out).collect();
            diff.evaluate(&items)
        })
        .collect()
}

/// Acceleration from the skewness of jackknife estimates.
pub fn acceleration(jackknife: &[f64]) -> f64 {
    if jackknife.len() < 2 || jackknife.iter().all(|&v| v == jackknife[0]) {
        return 0.0;
    }
    let m = jackknife.iter().sum::<f64>() / jackknife.len() as f64;
    let (mut s2, mut s3) = (0.0, 0.0);
    for &v in jackknife {
        let d = m - v;
        s2 += d * d;
        s3 += d * d * d;
    }
    if s2 == 0.0 {
        return 0.0;
    }
    s3 / (6.0 * s2.powf(1.5))
}

/// Bias correction from the share of bootstrap values below the estimate;
/// values equal to the estimate count half.
pub fn bias_correction(estimate: f64, sorted: &[f64]) -> f64 {
    let b = sorted.len() as f64;
    let below = sorted.partition_point(|&v| v < estimate);
    let equal = sorted[below..].partition_point(|&v| v <= estimate);
    let p = (below as f64 + 0.5 * equal as f64) / b;
    normal::inv_cdf(p.clamp(0.5 / b, 1.0 - 0.5 / b))
}

/// Order statistic at probability `p`: the smallest value whose empirical
/// CDF reaches `p`.
fn order_statistic(sorted: &[f64], p: f64) -> f64 {
    let b = sorted.len();
    // the 1e-9 slack absorbs round-off from cdf(inv_cdf(p))
    let k = (p * b as f64 - 1e-9).ceil().clamp(1.0, b as f64) as usize;
    sorted[k - 1]
}

/// Endpoints after the BCa percentile adjustment for given `z0` and `a`.
pub fn adjusted_endpoints(sorted: &[f64], level: f64, z0: f64, acceleration: f64) -> (f64, f64) {
    let alpha = (1.0 - level) / 2.0;
    let adjust = |q: f64| {
        let z = normal::inv_cdf(q);
        let shifted = z0 + z;
        normal::cdf(z0 + shifted / (1.0 - acceleration * shifted))
    };
    let lo = order_statistic(sorted, adjust(alpha));
    let hi = order_statistic(sorted, adjust(1.0 - alpha));
    (lo.min(hi), lo.max(hi))
}

/// Plain percentile interval over a sorted bootstrap distribution.
pub fn percentile_interval(sorted: &[f64], level: f64) -> (f64, f64) {
    let alpha = (1.0 - level) / 2.0;
    (
        order_statistic(sorted, alpha),
        order_statistic(sorted, 1.0 - alpha),
    )
}

/// BCa interval for `diff` at confidence `level`.
pub fn bca_interval(
    diff: &PairedScoreDiff<'_>,
    level: f64,
    resamples: usize,
    seed: u64,
) -> Result<BcaInterval> {
    let n = diff.item_count();
    if n < MIN_ITEMS {
        return Err(Error::TooFewPairs {
            scored: n,
            required: MIN_ITEMS,
        });
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "confidence level must be in (0, 1), got {level}"
        )));
    }
    if resamples == 0 {
        return Err(Error::InvalidArgument("need at least one resample".into()));
    }
    let all: Vec<usize> = (0..n).collect();
    let estimate = diff
        .evaluate(&all)
        .ok_or_else(|| Error::InvalidArgument("statistic undefined on the full item set".into()))?;

    let raw = bootstrap_distribution(diff, resamples, seed);
    let mut sorted: Vec<f64> = raw.into_iter().flatten().collect();
    let failures = resamples - sorted.len();
    if 2 * failures > resamples {
        return Err(Error::DegenerateStatistic {
            failures,
            resamples,
        });
    }
    sorted.sort_by(f64::total_cmp);

    let z0 = bias_correction(estimate, &sorted);
    let a = acceleration(&jackknife(diff));
    let (lower, upper) = adjusted_endpoints(&sorted, level, z0, a);
    Ok(BcaInterval {
        lower,
        upper,
        level,
        resamples,
        seed,
        estimate,
        z0,
        acceleration: a,
        failures,
    })
}
