//! Similarity measures between two equal-length samples.
//!
//! An embedding of dimension `D` is viewed as `D` observations of a scalar
//! random variable, so any bivariate association statistic can act as a
//! similarity measure. Everything here is a pure function of its inputs.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// A borrowed sample of at least two finite observations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VectorSample<'a>(&'a [f64]);

impl<'a> VectorSample<'a> {
    pub fn new(values: &'a [f64]) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::InvalidSample(format!(
                "need at least 2 observations, got {}",
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidSample(format!(
                "non-finite value {} at index {i}",
                values[i]
            )));
        }
        Ok(VectorSample(values))
    }

    pub fn values(&self) -> &'a [f64] {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    /// Always false; kept alongside `len` for API symmetry.
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// The similarity measures compared throughout the toolkit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum MeasureKind {
    /// Cosine similarity.
    Cos,
    /// Pearson's r.
    Prs,
    /// Spearman's rho (average ranks for ties).
    Spr,
    /// Kendall's tau-b.
    Ken,
    /// APSynP rank-overlap similarity.
    Aps,
}

impl MeasureKind {
    pub const ALL: [MeasureKind; 5] = [
        MeasureKind::Cos,
        MeasureKind::Prs,
        MeasureKind::Spr,
        MeasureKind::Ken,
        MeasureKind::Aps,
    ];

    pub fn code(self) -> &'static str {
        match self {
            MeasureKind::Cos => "COS",
            MeasureKind::Prs => "PRS",
            MeasureKind::Spr => "SPR",
            MeasureKind::Ken => "KEN",
            MeasureKind::Aps => "APS",
        }
    }

    /// Whether the measure only depends on the ranks of the components.
    pub fn is_rank_based(self) -> bool {
        matches!(self, MeasureKind::Spr | MeasureKind::Ken | MeasureKind::Aps)
    }
}

impl fmt::Display for MeasureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for MeasureKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "cos" | "cosine" => Ok(MeasureKind::Cos),
            "prs" | "pearson" => Ok(MeasureKind::Prs),
            "spr" | "spearman" => Ok(MeasureKind::Spr),
            "ken" | "kendall" => Ok(MeasureKind::Ken),
            "aps" | "apsynp" => Ok(MeasureKind::Aps),
            other => Err(Error::InvalidArgument(format!("unknown measure '{other}'"))),
        }
    }
}

/// APSynP knobs. `top_n = None` means `min(100, n)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ApsParams {
    pub top_n: Option<usize>,
    pub power: f64,
}

impl Default for ApsParams {
    fn default() -> Self {
        ApsParams {
            top_n: None,
            power: 0.1,
        }
    }
}

fn check_lengths(x: VectorSample<'_>, y: VectorSample<'_>) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    Ok(())
}

/// Sample mean.
pub fn mean(x: VectorSample<'_>) -> f64 {
    x.values().iter().sum::<f64>() / x.len() as f64
}

/// Inner product over the product of norms, or `None` when a norm is zero.
fn normalized_dot(
    x: impl Iterator<Item = f64>,
    y: impl Iterator<Item = f64>,
) -> Option<f64> {
    let (mut xy, mut xx, mut yy) = (0.0, 0.0, 0.0);
    for (a, b) in x.zip(y) {
        xy += a * b;
        xx += a * a;
        yy += b * b;
    }
    if xx == 0.0 || yy == 0.0 {
        return None;
    }
    // sqrt(xx * yy) keeps r(x, x) == 1 exactly; split only when it overflows
    let norm = match (xx * yy).sqrt() {
        n if n.is_finite() && n > 0.0 => n,
        _ => xx.sqrt() * yy.sqrt(),
    };
    Some((xy / norm).clamp(-1.0, 1.0))
}

/// Sample Pearson correlation coefficient.
pub fn pearson(x: VectorSample<'_>, y: VectorSample<'_>) -> Result<f64> {
    check_lengths(x, y)?;
    let mx = mean(x);
    let my = mean(y);
    normalized_dot(
        x.values().iter().map(|v| v - mx),
        y.values().iter().map(|v| v - my),
    )
    .ok_or(Error::UndefinedCorrelation("zero variance sample"))
}

/// Cosine similarity.
pub fn cosine(x: VectorSample<'_>, y: VectorSample<'_>) -> Result<f64> {
    check_lengths(x, y)?;
    normalized_dot(x.values().iter().copied(), y.values().iter().copied()).ok_or(Error::ZeroNorm)
}

// -0.0 and 0.0 must tie; total_cmp alone would separate them.
#[inline]
fn canonical(v: f64) -> f64 {
    v + 0.0
}

/// Fractional ranks in `[1, n]`; tied values share the average of their
/// positions.
pub fn rank(x: VectorSample<'_>) -> Vec<f64> {
    rank_values(x.values())
}

fn rank_values(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let keys: Vec<f64> = values.iter().map(|&v| canonical(v)).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| keys[a].total_cmp(&keys[b]));

    let mut ranks = vec![0.0; n];
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && keys[order[end]] == keys[order[start]] {
            end += 1;
        }
        // positions start..end hold 1-based ranks start+1..=end
        let avg = (start + 1 + end) as f64 / 2.0;
        for &idx in &order[start..end] {
            ranks[idx] = avg;
        }
        start = end;
    }
    ranks
}

/// Spearman's rho: Pearson's r on fractional ranks.
pub fn spearman(x: VectorSample<'_>, y: VectorSample<'_>) -> Result<f64> {
    check_lengths(x, y)?;
    let rx = rank(x);
    let ry = rank(y);
    pearson(VectorSample(&rx), VectorSample(&ry))
}

/// Kendall's tau-b in `O(n log n)`.
///
/// Pairs are sorted by `(x, y)`; discordant pairs are then exactly the
/// inversions left in the `y` sequence, counted during a merge sort.
pub fn kendall(x: VectorSample<'_>, y: VectorSample<'_>) -> Result<f64> {
    check_lengths(x, y)?;
    let n = x.len();
    let mut pairs: Vec<(f64, f64)> = x
        .values()
        .iter()
        .zip(y.values())
        .map(|(&a, &b)| (canonical(a), canonical(b)))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));

    let mut tied_x = 0u64;
    let mut tied_xy = 0u64;
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        while j < n && pairs[j].0 == pairs[i].0 {
            j += 1;
        }
        tied_x += pair_count(j - i);
        let mut k = i;
        while k < j {
            let mut l = k + 1;
            while l < j && pairs[l].1 == pairs[k].1 {
                l += 1;
            }
            tied_xy += pair_count(l - k);
            k = l;
        }
        i = j;
    }

    let mut ys: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let discordant = count_inversions(&mut ys);

    let mut tied_y = 0u64;
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        while j < n && ys[j] == ys[i] {
            j += 1;
        }
        tied_y += pair_count(j - i);
        i = j;
    }

    let total = pair_count(n);
    if tied_x == total || tied_y == total {
        return Err(Error::UndefinedCorrelation("all pairs tied in one sample"));
    }
    let concordant_minus_discordant =
        total as i64 - tied_x as i64 - tied_y as i64 + tied_xy as i64 - 2 * discordant as i64;
    let denom = ((total - tied_x) as f64 * (total - tied_y) as f64).sqrt();
    Ok((concordant_minus_discordant as f64 / denom).clamp(-1.0, 1.0))
}

#[inline]
fn pair_count(run: usize) -> u64 {
    let run = run as u64;
    run * run.saturating_sub(1) / 2
}

/// Sorts `values` ascending and returns the number of strict inversions
/// (pairs `i < j` with `values[i] > values[j]`).
fn count_inversions(values: &mut [f64]) -> u64 {
    let n = values.len();
    let mut buf = vec![0.0; n];
    let mut inversions = 0u64;
    let mut width = 1;
    while width < n {
        let mut lo = 0;
        while lo < n - width {
            let mid = lo + width;
            let hi = (mid + width).min(n);
            let (mut i, mut j, mut k) = (lo, mid, lo);
            while i < mid && j < hi {
                if values[j] < values[i] {
                    inversions += (mid - i) as u64;
                    buf[k] = values[j];
                    j += 1;
                } else {
                    buf[k] = values[i];
                    i += 1;
                }
                k += 1;
            }
            buf[k..k + (mid - i)].copy_from_slice(&values[i..mid]);
            k += mid - i;
            buf[k..k + (hi - j)].copy_from_slice(&values[j..hi]);
            values[lo..hi].copy_from_slice(&buf[lo..hi]);
            lo = hi;
        }
        width *= 2;
    }
    inversions
}

/// Indices of the `top_n` largest components; ties broken by index.
fn top_indices(values: &[f64], top_n: usize) -> Vec<bool> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| match canonical(values[b]).total_cmp(&canonical(values[a])) {
        Ordering::Equal => a.cmp(&b),
        ord => ord,
    });
    let mut mask = vec![false; values.len()];
    for &i in &order[..top_n] {
        mask[i] = true;
    }
    mask
}

/// APSynP: sum over the shared top-`n` dimensions of the inverse average
/// power-transformed descending rank.
pub fn apsynp(x: VectorSample<'_>, y: VectorSample<'_>, params: ApsParams) -> Result<f64> {
    check_lengths(x, y)?;
    let n = x.len();
    let top_n = params.top_n.unwrap_or(n.min(100));
    if top_n == 0 || top_n > n {
        return Err(Error::InvalidArgument(format!(
            "APSynP top_n must be in [1, {n}], got {top_n}"
        )));
    }
    if !(params.power.is_finite() && params.power > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "APSynP power must be positive, got {}",
            params.power
        )));
    }

    let neg_x: Vec<f64> = x.values().iter().map(|v| -v).collect();
    let neg_y: Vec<f64> = y.values().iter().map(|v| -v).collect();
    let rank_x = rank_values(&neg_x);
    let rank_y = rank_values(&neg_y);
    let top_x = top_indices(x.values(), top_n);
    let top_y = top_indices(y.values(), top_n);

    let score = (0..n)
        .filter(|&i| top_x[i] && top_y[i])
        .map(|i| 2.0 / (rank_x[i].powf(params.power) + rank_y[i].powf(params.power)))
        .sum();
    Ok(score)
}

/// Clips components to the `lower_q` and `upper_q` empirical quantiles.
///
/// Quantiles are the nearest order statistics, index `round((n - 1) q)` of
/// the sorted sample. Clip points are therefore sample values, which makes
/// the operation idempotent.
pub fn winsorize(x: VectorSample<'_>, lower_q: f64, upper_q: f64) -> Result<Vec<f64>> {
    if !(0.0..=1.0).contains(&lower_q) || !(0.0..=1.0).contains(&upper_q) || lower_q >= upper_q {
        return Err(Error::InvalidArgument(format!(
            "winsorize bounds must satisfy 0 <= lower < upper <= 1, got ({lower_q}, {upper_q})"
        )));
    }
    let mut sorted = x.values().to_vec();
    sorted.sort_by(f64::total_cmp);
    let lo = order_statistic(&sorted, lower_q);
    let hi = order_statistic(&sorted, upper_q);
    Ok(x.values().iter().map(|v| v.clamp(lo, hi)).collect())
}

fn order_statistic(sorted: &[f64], q: f64) -> f64 {
    let idx = ((sorted.len() - 1) as f64 * q).round() as usize;
    sorted[idx.min(sorted.len() - 1)]
}

/// Dispatches to the measure named by `kind`.
pub fn similarity(
    kind: MeasureKind,
    x: VectorSample<'_>,
    y: VectorSample<'_>,
    aps: ApsParams,
) -> Result<f64> {
    match kind {
        MeasureKind::Cos => cosine(x, y),
        MeasureKind::Prs => pearson(x, y),
        MeasureKind::Spr => spearman(x, y),
        MeasureKind::Ken => kendall(x, y),
        MeasureKind::Aps => apsynp(x, y, aps),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn s(v: &[f64]) -> VectorSample<'_> {
        VectorSample::new(v).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn sample_validation() {
        assert!(VectorSample::new(&[1.0]).is_err());
        assert!(VectorSample::new(&[1.0, f64::NAN]).is_err());
        assert!(VectorSample::new(&[1.0, f64::INFINITY]).is_err());
        assert!(VectorSample::new(&[1.0, 2.0]).is_ok());
    }

    #[test]
    fn mean_examples() {
        assert_eq!(mean(s(&[1.0, 2.0, 3.0])), 2.0);
        assert_eq!(mean(s(&[0.0, 0.0])), 0.0);
        assert!(close(mean(s(&[-1.0, 1.0, 4.0])), 4.0 / 3.0, 1e-15));
    }

    #[test]
    fn pearson_examples() {
        assert!(close(pearson(s(&[1., 2., 3.]), s(&[1., 2., 3.])).unwrap(), 1.0, 1e-15));
        assert!(close(pearson(s(&[1., 2., 3.]), s(&[3., 2., 1.])).unwrap(), -1.0, 1e-15));
        // centered (-1.5,-.5,.5,1.5) and (-1.5,.5,-.5,1.5): 4 / 5
        assert!(close(pearson(s(&[1., 2., 3., 4.]), s(&[1., 3., 2., 4.])).unwrap(), 0.8, 1e-15));
    }

    #[test]
    fn pearson_errors() {
        assert!(matches!(
            pearson(s(&[1., 2.]), s(&[1., 2., 3.])),
            Err(Error::LengthMismatch { .. })
        ));
        assert!(matches!(
            pearson(s(&[2., 2., 2.]), s(&[1., 2., 3.])),
            Err(Error::UndefinedCorrelation(_))
        ));
    }

    #[test]
    fn cosine_examples() {
        assert_eq!(cosine(s(&[1., 0.]), s(&[0., 1.])).unwrap(), 0.0);
        assert!(close(cosine(s(&[1., 1.]), s(&[2., 2.])).unwrap(), 1.0, 1e-15));
        assert!(matches!(cosine(s(&[0., 0.]), s(&[1., 2.])), Err(Error::ZeroNorm)));
        let x = [1.0, -2.0, 0.5, 0.5];
        let y = [0.3, 0.2, -0.9, 0.4];
        assert!(close(cosine(s(&x), s(&y)).unwrap(), pearson(s(&x), s(&y)).unwrap(), 1e-15));
    }

    #[test]
    fn rank_examples() {
        assert_eq!(rank(s(&[10., 20., 30.])), vec![1., 2., 3.]);
        assert_eq!(rank(s(&[5., 5.])), vec![1.5, 1.5]);
        assert_eq!(rank(s(&[3., 1., 3.])), vec![2.5, 1., 2.5]);
        assert_eq!(rank(s(&[0.0, -0.0, 1.0])), vec![1.5, 1.5, 3.0]);
    }

    #[test]
    fn spearman_examples() {
        assert!(close(spearman(s(&[1., 2., 3.]), s(&[1., 4., 9.])).unwrap(), 1.0, 1e-15));
        assert!(close(spearman(s(&[1., 2., 3.]), s(&[9., 4., 1.])).unwrap(), -1.0, 1e-15));
        assert!(close(spearman(s(&[1., 2., 3., 4.]), s(&[1., 3., 2., 4.])).unwrap(), 0.8, 1e-15));
        assert!(spearman(s(&[1., 1., 1.]), s(&[1., 2., 3.])).is_err());
    }

    #[test]
    fn kendall_examples() {
        assert_eq!(kendall(s(&[1., 2., 3.]), s(&[1., 2., 3.])).unwrap(), 1.0);
        assert!(close(kendall(s(&[1., 2., 3.]), s(&[1., 3., 2.])).unwrap(), 1.0 / 3.0, 1e-15));
        assert!(close(kendall(s(&[1., 1., 2., 3.]), s(&[4., 4., 5., 6.])).unwrap(), 1.0, 1e-15));
        assert!(matches!(
            kendall(s(&[1., 1., 1.]), s(&[1., 2., 3.])),
            Err(Error::UndefinedCorrelation(_))
        ));
        assert!(kendall(s(&[1., 2.]), s(&[1., 2., 3.])).is_err());
    }

    #[test]
    fn inversion_counter() {
        let mut v = vec![3.0, 1.0, 2.0, 2.0, 0.0];
        // (3,1) (3,2) (3,2) (3,0) (1,0) (2,0) (2,0)
        assert_eq!(count_inversions(&mut v), 7);
        assert_eq!(v, vec![0.0, 1.0, 2.0, 2.0, 3.0]);
    }

    #[test]
    fn apsynp_examples() {
        let x = [0.4, 0.1, 0.9, -0.3, 0.25];
        let harmonic: f64 = (1..=5).map(|k| 1.0 / k as f64).sum();
        let p = ApsParams {
            top_n: Some(5),
            power: 1.0,
        };
        assert!(close(apsynp(s(&x), s(&x), p).unwrap(), harmonic, 1e-12));

        let top1 = ApsParams {
            top_n: Some(1),
            power: 1.0,
        };
        assert_eq!(apsynp(s(&[3., 2., 1.]), s(&[1., 2., 3.]), top1).unwrap(), 0.0);

        let top2 = ApsParams {
            top_n: Some(2),
            power: 1.0,
        };
        assert_eq!(apsynp(s(&[5., 4., 3.]), s(&[5., 3., 4.]), top2).unwrap(), 1.0);
    }

    #[test]
    fn apsynp_bad_params() {
        let x = [1., 2., 3.];
        for top_n in [0, 4] {
            let p = ApsParams {
                top_n: Some(top_n),
                power: 1.0,
            };
            assert!(matches!(apsynp(s(&x), s(&x), p), Err(Error::InvalidArgument(_))));
        }
        let p = ApsParams {
            top_n: None,
            power: 0.0,
        };
        assert!(apsynp(s(&x), s(&x), p).is_err());
    }

    #[test]
    fn winsorize_examples() {
        let x: Vec<f64> = (1..=100).map(f64::from).collect();
        let w = winsorize(s(&x), 0.05, 0.95).unwrap();
        // round(99 * 0.05) = 5 -> 6.0; round(99 * 0.95) = 94 -> 95.0
        assert_eq!(w.iter().cloned().fold(f64::INFINITY, f64::min), 6.0);
        assert_eq!(w.iter().cloned().fold(f64::NEG_INFINITY, f64::max), 95.0);
        assert_eq!(winsorize(s(&x), 0.0, 1.0).unwrap(), x);
        // round(3 * 0.75) = 2 -> sorted[2] = 0
        assert_eq!(
            winsorize(s(&[0., 0., 0., 100.]), 0.0, 0.75).unwrap(),
            vec![0., 0., 0., 0.]
        );
        assert!(winsorize(s(&x), 0.5, 0.5).is_err());
        assert!(winsorize(s(&x), -0.1, 0.5).is_err());
    }

    #[test]
    fn dispatch() {
        let x = [0.3, -1.2, 2.5, 0.7];
        let y = [1.0, 0.2, 0.4, -0.6];
        let rev: Vec<f64> = x.iter().map(|v| -v).collect();
        let aps = ApsParams::default();
        assert_eq!(
            similarity(MeasureKind::Cos, s(&x), s(&y), aps).unwrap(),
            cosine(s(&x), s(&y)).unwrap()
        );
        assert_eq!(similarity(MeasureKind::Spr, s(&x), s(&x), aps).unwrap(), 1.0);
        assert_eq!(similarity(MeasureKind::Ken, s(&x), s(&rev), aps).unwrap(), -1.0);
    }

    #[test]
    fn measure_kind_parsing() {
        assert_eq!("spr".parse::<MeasureKind>().unwrap(), MeasureKind::Spr);
        assert_eq!("KEN".parse::<MeasureKind>().unwrap(), MeasureKind::Ken);
        assert!("euclid".parse::<MeasureKind>().is_err());
        assert_eq!(MeasureKind::Aps.to_string(), "APS");
    }

    fn pair(max_len: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
        (3..max_len).prop_flat_map(|n| {
            (
                prop::collection::vec(-10.0f64..10.0, n),
                prop::collection::vec(-10.0f64..10.0, n),
            )
        })
    }

    proptest! {
        #[test]
        fn measures_are_symmetric_and_bounded((x, y) in pair(60)) {
            for kind in MeasureKind::ALL {
                let a = similarity(kind, s(&x), s(&y), ApsParams::default()).unwrap();
                let b = similarity(kind, s(&y), s(&x), ApsParams::default()).unwrap();
                prop_assert_eq!(a, b);
                if kind != MeasureKind::Aps {
                    prop_assert!(a.abs() <= 1.0 + 1e-12);
                } else {
                    prop_assert!(a >= 0.0);
                }
            }
        }

        #[test]
        fn self_correlation_is_exactly_one((x, _y) in pair(60)) {
            prop_assert_eq!(cosine(s(&x), s(&x)).unwrap(), 1.0);
            prop_assert_eq!(pearson(s(&x), s(&x)).unwrap(), 1.0);
            prop_assert_eq!(spearman(s(&x), s(&x)).unwrap(), 1.0);
        }

        #[test]
        fn pearson_is_cosine_of_centered((x, y) in pair(60)) {
            let mx = mean(s(&x));
            let my = mean(s(&y));
            let cx: Vec<f64> = x.iter().map(|v| v - mx).collect();
            let cy: Vec<f64> = y.iter().map(|v| v - my).collect();
            let r = pearson(s(&x), s(&y)).unwrap();
            prop_assert!((r - cosine(s(&cx), s(&cy)).unwrap()).abs() < 1e-12);
        }

        #[test]
        fn rank_sum((x, _y) in pair(60)) {
            let n = x.len() as f64;
            let r = rank(s(&x));
            prop_assert!((r.iter().sum::<f64>() - n * (n + 1.0) / 2.0).abs() < 1e-9);
            prop_assert!(r.iter().all(|&v| (1.0..=n).contains(&v)));
        }

        #[test]
        fn rank_measures_monotone_invariant((x, y) in pair(60)) {
            let fx: Vec<f64> = x.iter().map(|v| v * v * v + v).collect();
            let gy: Vec<f64> = y.iter().map(|v| v.exp()).collect();
            let sp = spearman(s(&x), s(&y)).unwrap();
            let kd = kendall(s(&x), s(&y)).unwrap();
            prop_assert!((spearman(s(&fx), s(&gy)).unwrap() - sp).abs() < 1e-12);
            prop_assert!((kendall(s(&fx), s(&gy)).unwrap() - kd).abs() < 1e-12);
        }

        #[test]
        fn pearson_affine_cosine_scale((x, y) in pair(60), a in 0.1f64..10.0, b in -5.0f64..5.0) {
            let ax: Vec<f64> = x.iter().map(|v| a * v + b).collect();
            let sx: Vec<f64> = x.iter().map(|v| a * v).collect();
            let r = pearson(s(&x), s(&y)).unwrap();
            prop_assert!((pearson(s(&ax), s(&y)).unwrap() - r).abs() < 1e-12);
            let c = cosine(s(&x), s(&y)).unwrap();
            prop_assert!((cosine(s(&sx), s(&y)).unwrap() - c).abs() < 1e-12);
        }

        #[test]
        fn winsorize_idempotent((x, _y) in pair(80), lo in 0.0f64..0.5, width in 0.01f64..0.5) {
            let hi = lo + width;
            let once = winsorize(s(&x), lo, hi).unwrap();
            let twice = winsorize(s(&once), lo, hi).unwrap();
            prop_assert_eq!(&once, &twice);
            let mut sorted = x.clone();
            sorted.sort_by(f64::total_cmp);
            let (qlo, qhi) = (order_statistic(&sorted, lo), order_statistic(&sorted, hi));
            prop_assert!(once.iter().all(|&v| v >= qlo && v <= qhi));
        }
    }
}
