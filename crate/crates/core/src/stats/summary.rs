use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::scalar::{median, quantile_sorted, sorted, Scalar};

/// Centroid and spread of one group of (pc1, pc2) points.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupSummary<K, T> {
    pub key: K,
    pub centroid: [T; 2],
    /// Population variance along pc1 plus along pc2.
    pub variance_sum: T,
    pub count: usize,
}

/// Per-group summaries in ascending key order.
pub fn group_summaries<K: Ord + Clone, T: Scalar>(records: &[(K, T, T)]) -> Vec<GroupSummary<K, T>> {
    let mut groups: BTreeMap<K, Vec<[T; 2]>> = BTreeMap::new();
    for (k, a, b) in records {
        groups.entry(k.clone()).or_default().push([*a, *b]);
    }
    groups
        .into_iter()
        .map(|(key, pts)| {
            let n = T::from_len(pts.len());
            let c0 = pts.iter().map(|p| p[0]).sum::<T>() / n;
            let c1 = pts.iter().map(|p| p[1]).sum::<T>() / n;
            let var = pts.iter().map(|p| (p[0] - c0) * (p[0] - c0) + (p[1] - c1) * (p[1] - c1)).sum::<T>() / n;
            GroupSummary { key, centroid: [c0, c1], variance_sum: var, count: pts.len() }
        })
        .collect()
}

/// Centered moving average of the centroids over `window` consecutive
/// groups. Near the ends the window is truncated to the available groups.
pub fn smooth_centroid_curve<K, T: Scalar>(summaries: &[GroupSummary<K, T>], window: usize) -> Vec<[T; 2]> {
    let n = summaries.len();
    let half = window.max(1) / 2;
    (0..n)
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half + 1).min(n);
            let m = T::from_len(hi - lo);
            let s = &summaries[lo..hi];
            [s.iter().map(|g| g.centroid[0]).sum::<T>() / m, s.iter().map(|g| g.centroid[1]).sum::<T>() / m]
        })
        .collect()
}

/// Linearly interpolated empirical quantiles at percentiles 1 through 99.
pub fn percentile_curve<T: Scalar>(values: &[T]) -> Result<Vec<(u32, T)>> {
    if values.len() < 2 {
        return Err(Error::InvalidParameter("percentiles need at least two values".into()));
    }
    let s = sorted(values);
    Ok((1..=99).map(|p| (p, quantile_sorted(&s, T::lit(p as f64 / 100.0)).unwrap())).collect())
}

/// Median of `y` within `bins` equal-population bins of `x`, as
/// `(median x, median y)` per bin.
pub fn conditional_median<T: Scalar>(x: &[T], y: &[T], bins: usize) -> Result<Vec<(T, T)>> {
    if x.len() != y.len() {
        return Err(Error::InvalidParameter("columns differ in length".into()));
    }
    if bins == 0 || x.len() < bins {
        return Err(Error::InvalidParameter(format!("{} points cannot fill {bins} bins", x.len())));
    }
    let mut pairs: Vec<(T, T)> = x.iter().copied().zip(y.iter().copied()).collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.partial_cmp(&b.1).unwrap()));
    let n = pairs.len();
    Ok((0..bins)
        .map(|b| {
            let chunk = &pairs[b * n / bins..(b + 1) * n / bins];
            let xs: Vec<T> = chunk.iter().map(|p| p.0).collect();
            let ys: Vec<T> = chunk.iter().map(|p| p.1).collect();
            (median(&xs).unwrap(), median(&ys).unwrap())
        })
        .collect())
}
