//! Normality diagnostics for embedding samples.
//!
//! Pearson's r (and hence cosine similarity on near-zero-mean vectors) is a
//! complete summary of association only under bivariate normality. The tools
//! here let a user check that assumption per vector: the Shapiro-Wilk test,
//! a census over many vectors, the distribution of per-vector means, and raw
//! Q-Q / histogram data for plotting.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::embeddings::EmbeddingTable;
use crate::measures::{mean, VectorSample};
use crate::normal;
use crate::{Error, Result};

/// Sample sizes supported by the Shapiro-Wilk approximation.
pub const SHAPIRO_MIN_N: usize = 3;
pub const SHAPIRO_MAX_N: usize = 5000;

/// Number of fixed-width histogram bins.
pub const HISTOGRAM_BINS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShapiroResult {
    pub w_statistic: f64,
    pub p_value: f64,
    pub n: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalityReport {
    /// Vectors that were tested.
    pub total: usize,
    /// Tested vectors with `p >= alpha`.
    pub not_rejected: usize,
    /// Vectors that could not be tested (constant, or size out of range).
    pub untestable: usize,
    pub alpha: f64,
    pub proportion: f64,
}

// Polynomial coefficients of the AS R94 approximations, ascending order.
const C1: [f64; 6] = [0.0, 0.221157, -0.147981, -2.071190, 4.434685, -2.706056];
const C2: [f64; 6] = [0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633];
const C3: [f64; 4] = [0.5440, -0.39978, 0.025054, -6.714e-4];
const C4: [f64; 4] = [1.3822, -0.77857, 0.062767, -0.0020322];
const C5: [f64; 4] = [-1.5861, -0.31082, -0.083751, 0.0038915];
const C6: [f64; 3] = [-0.4803, -0.082676, 0.0030302];
const G: [f64; 2] = [-2.273, 0.459];

fn poly(coefs: &[f64], x: f64) -> f64 {
    coefs.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

/// Half of the antisymmetric Shapiro-Wilk weights, for the lower order
/// statistics (entry `i` pairs `x_(i)` with `x_(n-1-i)`).
fn shapiro_weights(n: usize) -> Vec<f64> {
    let half = n / 2;
    if n == 3 {
        return vec![std::f64::consts::FRAC_1_SQRT_2];
    }
    let an = n as f64;
    let m: Vec<f64> = (0..half)
        .map(|i| normal::inv_cdf((i as f64 + 1.0 - 0.375) / (an + 0.25)))
        .collect();
    let summ2 = 2.0 * m.iter().map(|v| v * v).sum::<f64>();
    let ssumm2 = summ2.sqrt();
    let rsn = 1.0 / an.sqrt();
    let a1 = poly(&C1, rsn) - m[0] / ssumm2;

    let mut a = vec![0.0; half];
    a[0] = a1;
    let (first_scaled, fac) = if n > 5 {
        let a2 = -m[1] / ssumm2 + poly(&C2, rsn);
        let fac = ((summ2 - 2.0 * m[0] * m[0] - 2.0 * m[1] * m[1])
            / (1.0 - 2.0 * a1 * a1 - 2.0 * a2 * a2))
            .sqrt();
        a[1] = a2;
        (2, fac)
    } else {
        let fac = ((summ2 - 2.0 * m[0] * m[0]) / (1.0 - 2.0 * a1 * a1)).sqrt();
        (1, fac)
    };
    for i in first_scaled..half {
        a[i] = -m[i] / fac;
    }
    a
}

/// Shapiro-Wilk W test using Royston's AS R94 approximations.
pub fn shapiro_wilk(x: VectorSample<'_>) -> Result<ShapiroResult> {
    let n = x.len();
    if !(SHAPIRO_MIN_N..=SHAPIRO_MAX_N).contains(&n) {
        return Err(Error::InvalidArgument(format!(
            "Shapiro-Wilk needs {SHAPIRO_MIN_N} <= n <= {SHAPIRO_MAX_N}, got {n}"
        )));
    }
    let mut sorted = x.values().to_vec();
    sorted.sort_by(f64::total_cmp);
    let range = sorted[n - 1] - sorted[0];
    if range <= 0.0 {
        return Err(Error::InvalidSample("constant sample".into()));
    }
    let pivot = sorted[n / 2];
    for v in &mut sorted {
        *v = (*v - pivot) / range;
    }

    let half = n / 2;
    let a = shapiro_weights(n);
    let coef = |i: usize| {
        if i < half {
            -a[i]
        } else if i >= n - half {
            a[n - 1 - i]
        } else {
            0.0
        }
    };

    let an = n as f64;
    let sa = (0..n).map(coef).sum::<f64>() / an;
    let sx = sorted.iter().sum::<f64>() / an;
    let (mut ssa, mut ssx, mut sax) = (0.0, 0.0, 0.0);
    for (i, &v) in sorted.iter().enumerate() {
        let da = coef(i) - sa;
        let dx = v - sx;
        ssa += da * da;
        ssx += dx * dx;
        sax += da * dx;
    }
    let ssassx = (ssa * ssx).sqrt();
    // 1 - W, computed directly so it stays accurate for W near 1.
    let w1 = (ssassx - sax) * (ssassx + sax) / (ssa * ssx);
    if w1 <= 0.0 {
        return Ok(ShapiroResult {
            w_statistic: 1.0,
            p_value: 1.0,
            n,
        });
    }
    let w = 1.0 - w1;

    if n == 3 {
        if w < 0.75 {
            return Ok(ShapiroResult {
                w_statistic: 0.75,
                p_value: 0.0,
                n,
            });
        }
        let p = 1.0 - 6.0 / std::f64::consts::PI * w.sqrt().acos();
        return Ok(ShapiroResult {
            w_statistic: w,
            p_value: p.clamp(0.0, 1.0),
            n,
        });
    }

    let y = w1.ln();
    let p = if n <= 11 {
        let gamma = poly(&G, an);
        if y >= gamma {
            1e-99
        } else {
            let y = -(gamma - y).ln();
            let m = poly(&C3, an);
            let s = poly(&C4, an).exp();
            normal::sf((y - m) / s)
        }
    } else {
        let ln_n = an.ln();
        let m = poly(&C5, ln_n);
        let s = poly(&C6, ln_n).exp();
        normal::sf((y - m) / s)
    };

    Ok(ShapiroResult {
        w_statistic: w,
        p_value: p.clamp(0.0, 1.0),
        n,
    })
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "alpha must be in (0, 1), got {alpha}"
        )));
    }
    Ok(())
}

/// Counts the vectors for which normality is not rejected at `alpha`.
///
/// Vectors that cannot be tested are reported in `untestable` and left out
/// of the proportion.
pub fn normality_census(vectors: &[VectorSample<'_>], alpha: f64) -> Result<NormalityReport> {
    check_alpha(alpha)?;
    if vectors.is_empty() {
        return Err(Error::EmptyInput("no vectors for normality census"));
    }
    let results: Vec<Option<ShapiroResult>> = vectors
        .par_iter()
        .map(|v| shapiro_wilk(*v).ok())
        .collect();
    let untestable = results.iter().filter(|r| r.is_none()).count();
    let tested: Vec<ShapiroResult> = results.into_iter().flatten().collect();
    let mut report = census_from_results(&tested, alpha)?;
    report.untestable = untestable;
    Ok(report)
}

/// Aggregates already-computed test results.
pub fn census_from_results(results: &[ShapiroResult], alpha: f64) -> Result<NormalityReport> {
    check_alpha(alpha)?;
    if results.is_empty() {
        return Err(Error::EmptyInput("no testable vectors for normality census"));
    }
    let not_rejected = results.iter().filter(|r| r.p_value >= alpha).count();
    Ok(NormalityReport {
        total: results.len(),
        not_rejected,
        untestable: 0,
        alpha,
        proportion: not_rejected as f64 / results.len() as f64,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub left: f64,
    pub right: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub bins: Vec<HistogramBin>,
}

impl Histogram {
    /// Fixed-width bins over the observed range; the last bin is closed.
    /// A zero-width range is widened by 0.5 on each side.
    pub fn from_values(values: &[f64], bins: usize) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyInput("no values to histogram"));
        }
        if bins == 0 {
            return Err(Error::InvalidArgument("histogram needs at least one bin".into()));
        }
        let (mut lo, mut hi) = values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            });
        if lo == hi {
            lo -= 0.5;
            hi += 0.5;
        }
        let width = (hi - lo) / bins as f64;
        let mut counts = vec![0usize; bins];
        for &v in values {
            let idx = (((v - lo) / width) as usize).min(bins - 1);
            counts[idx] += 1;
        }
        let bins = counts
            .into_iter()
            .enumerate()
            .map(|(i, count)| HistogramBin {
                left: lo + i as f64 * width,
                right: if i + 1 == bins { hi } else { lo + (i + 1) as f64 * width },
                count,
            })
            .collect();
        Ok(Histogram { bins })
    }

    pub fn total(&self) -> usize {
        self.bins.iter().map(|b| b.count).sum()
    }

    /// CSV with header `bin_left,bin_right,count`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "bin_left,bin_right,count")?;
        for b in &self.bins {
            writeln!(out, "{},{},{}", b.left, b.right, b.count)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanCensus {
    pub histogram: Histogram,
    pub threshold: f64,
    pub total: usize,
    pub exceeding: usize,
    /// Fraction of vectors whose mean exceeds `threshold` in magnitude.
    pub fraction: f64,
}

/// Distribution of per-vector means across a whole table.
pub fn mean_census(table: &EmbeddingTable, threshold: f64) -> Result<MeanCensus> {
    if !(threshold > 0.0 && threshold.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "threshold must be positive, got {threshold}"
        )));
    }
    if table.is_empty() {
        return Err(Error::EmptyInput("empty embedding table"));
    }
    let means: Vec<f64> = (0..table.len())
        .into_par_iter()
        .map(|i| {
            let row = table.row(i);
            row.iter().sum::<f64>() / row.len() as f64
        })
        .collect();
    let exceeding = means.iter().filter(|m| m.abs() > threshold).count();
    Ok(MeanCensus {
        histogram: Histogram::from_values(&means, HISTOGRAM_BINS)?,
        threshold,
        total: means.len(),
        exceeding,
        fraction: exceeding as f64 / means.len() as f64,
    })
}

/// Rescales to mean 0 and sample standard deviation 1.
pub fn standardize(x: VectorSample<'_>) -> Result<Vec<f64>> {
    let m = mean(x);
    let ss: f64 = x.values().iter().map(|v| (v - m) * (v - m)).sum();
    let sd = (ss / (x.len() - 1) as f64).sqrt();
    if sd == 0.0 {
        return Err(Error::InvalidSample("constant sample".into()));
    }
    Ok(x.values().iter().map(|v| (v - m) / sd).collect())
}

/// `(theoretical, sample)` quantile pairs: the sorted standardized sample
/// against standard normal quantiles at plotting positions `(i - 0.5) / n`.
pub fn qq_points(x: VectorSample<'_>) -> Result<Vec<(f64, f64)>> {
    let n = x.len();
    if n < 3 {
        return Err(Error::InvalidArgument(format!(
            "Q-Q plot needs at least 3 observations, got {n}"
        )));
    }
    let mut z = standardize(x)?;
    z.sort_by(f64::total_cmp);
    Ok(z
        .into_iter()
        .enumerate()
        .map(|(i, v)| (normal::inv_cdf((i as f64 + 0.5) / n as f64), v))
        .collect())
}

/// CSV with header `x,y`.
pub fn write_qq_csv<W: Write>(points: &[(f64, f64)], mut out: W) -> Result<()> {
    writeln!(out, "x,y")?;
    for (x, y) in points {
        writeln!(out, "{x},{y}")?;
    }
    Ok(())
}
