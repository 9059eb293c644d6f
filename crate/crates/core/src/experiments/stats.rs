//! Rank summaries with paired signed-rank tests and Benjamini–Hochberg
//! false-discovery-rate control.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// Minimum number of instances for the normal approximation.
pub const MIN_INSTANCES: usize = 6;

pub const SIGNIFICANCE: f64 = 0.05;

/// Per-instance metric values (lower is better), one column per algorithm.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricTable {
    pub algorithms: Vec<String>,
    pub instances: Vec<String>,
    /// `values[instance][algorithm]`.
    pub values: Vec<Vec<f64>>,
}

impl MetricTable {
    pub fn new(algorithms: Vec<String>, instances: Vec<String>, values: Vec<Vec<f64>>) -> Result<Self> {
        if values.len() != instances.len() {
            return Err(Error::invalid("one row of values per instance required"));
        }
        if values.iter().any(|row| row.len() != algorithms.len()) {
            return Err(Error::invalid("one value per algorithm required in every row"));
        }
        if values.iter().flatten().any(|v| v.is_nan()) {
            return Err(Error::invalid("metric values must not be NaN"));
        }
        Ok(MetricTable {
            algorithms,
            instances,
            values,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Annotation {
    Best,
    NotSignificantlyDifferent,
    SignificantlyWorse,
}

impl fmt::Display for Annotation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Annotation::Best => "best",
            Annotation::NotSignificantlyDifferent => "not-significantly-different",
            Annotation::SignificantlyWorse => "significantly-worse",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmRank {
    pub algorithm: String,
    pub average_rank: f64,
    /// Two-sided p-value against the best-ranked algorithm.
    pub p_value: Option<f64>,
    pub adjusted_p: Option<f64>,
    pub annotation: Annotation,
}

/// Average ranks (1-based, ties share the mean rank) of `values`.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap_or(Ordering::Equal));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // positions start..end hold ranks start+1 ..= end
        let rank = (start + 1 + end) as f64 / 2.0;
        for &k in &order[start..end] {
            ranks[k] = rank;
        }
        start = end;
    }
    ranks
}

/// Two-sided Wilcoxon signed-rank p-value for paired samples, normal
/// approximation with tie correction; zero differences are dropped.
pub fn signed_rank_p(x: &[f64], y: &[f64]) -> f64 {
    let diffs: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).filter(|d| *d != 0.0).collect();
    let m = diffs.len();
    if m == 0 {
        return 1.0;
    }
    let abs: Vec<f64> = diffs.iter().map(|d| d.abs()).collect();
    let ranks = average_ranks(&abs);
    let w_plus: f64 = diffs
        .iter()
        .zip(&ranks)
        .filter(|(d, _)| **d > 0.0)
        .map(|(_, r)| r)
        .sum();
    let mf = m as f64;
    let mean = mf * (mf + 1.0) / 4.0;
    let mut sorted = abs.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut tie_term = 0.0;
    let mut k = 0;
    while k < m {
        let mut j = k + 1;
        while j < m && sorted[j] == sorted[k] {
            j += 1;
        }
        let t = (j - k) as f64;
        tie_term += t * t * t - t;
        k = j;
    }
    let var = mf * (mf + 1.0) * (2.0 * mf + 1.0) / 24.0 - tie_term / 48.0;
    if var <= 0.0 {
        return 1.0;
    }
    let z = (w_plus - mean) / var.sqrt();
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    (2.0 * (1.0 - normal.cdf(z.abs()))).min(1.0)
}

/// Benjamini–Hochberg adjusted p-values, in input order.
pub fn benjamini_hochberg(p: &[f64]) -> Vec<f64> {
    let m = p.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| p[a].partial_cmp(&p[b]).unwrap_or(Ordering::Equal));
    let mut adjusted = vec![0.0; m];
    let mut running = 1.0f64;
    for (pos, &k) in order.iter().enumerate().rev() {
        running = running.min(p[k] * m as f64 / (pos + 1) as f64);
        adjusted[k] = running.min(1.0);
    }
    adjusted
}

/// Average ranks per algorithm, and each algorithm tested against the
/// best-ranked one with BH-adjusted signed-rank tests at level 0.05.
pub fn wilcoxon_bh(table: &MetricTable) -> Result<Vec<AlgorithmRank>> {
    let k = table.algorithms.len();
    if k < 2 {
        return Err(Error::unsupported("rank comparison needs at least two algorithms"));
    }
    if table.instances.len() < MIN_INSTANCES {
        return Err(Error::unsupported(format!(
            "rank comparison needs at least {MIN_INSTANCES} instances, got {}",
            table.instances.len()
        )));
    }
    let mut rank_sums = vec![0.0; k];
    for row in &table.values {
        for (a, r) in average_ranks(row).into_iter().enumerate() {
            rank_sums[a] += r;
        }
    }
    let rows = table.values.len() as f64;
    let avg: Vec<f64> = rank_sums.iter().map(|s| s / rows).collect();
    let best = (0..k)
        .min_by(|&a, &b| avg[a].partial_cmp(&avg[b]).unwrap().then(a.cmp(&b)))
        .unwrap();
    let column = |a: usize| -> Vec<f64> { table.values.iter().map(|row| row[a]).collect() };
    let best_col = column(best);
    let others: Vec<usize> = (0..k).filter(|&a| a != best).collect();
    let raw: Vec<f64> = others.iter().map(|&a| signed_rank_p(&column(a), &best_col)).collect();
    let adjusted = benjamini_hochberg(&raw);
    let mut out: Vec<AlgorithmRank> = (0..k)
        .map(|a| AlgorithmRank {
            algorithm: table.algorithms[a].clone(),
            average_rank: avg[a],
            p_value: None,
            adjusted_p: None,
            annotation: Annotation::Best,
        })
        .collect();
    for ((&a, p), q) in others.iter().zip(raw).zip(adjusted) {
        out[a].p_value = Some(p);
        out[a].adjusted_p = Some(q);
        out[a].annotation = if q < SIGNIFICANCE {
            Annotation::SignificantlyWorse
        } else {
            Annotation::NotSignificantlyDifferent
        };
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(cols: Vec<Vec<f64>>) -> MetricTable {
        let k = cols.len();
        let rows = cols[0].len();
        MetricTable::new(
            (0..k).map(|a| format!("a{a}")).collect(),
            (0..rows).map(|i| format!("i{i}")).collect(),
            (0..rows).map(|i| cols.iter().map(|c| c[i]).collect()).collect(),
        )
        .unwrap()
    }

    #[test]
    fn ranks_with_ties() {
        assert_eq!(average_ranks(&[3.0, 1.0, 3.0, 2.0]), vec![3.5, 1.0, 3.5, 2.0]);
        assert_eq!(average_ranks(&[5.0, 5.0]), vec![1.5, 1.5]);
    }

    #[test]
    fn identical_algorithms() {
        let col = vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0];
        let out = wilcoxon_bh(&table(vec![col.clone(), col.clone(), col])).unwrap();
        assert!(out.iter().all(|r| r.average_rank == 2.0));
        assert!(out.iter().all(|r| r.annotation != Annotation::SignificantlyWorse));
        assert_eq!(out[1].p_value, Some(1.0));
    }

    #[test]
    fn strict_dominance_over_twenty_instances() {
        let good: Vec<f64> = (0..20).map(|i| i as f64).collect();
        let bad: Vec<f64> = (0..20).map(|i| i as f64 + 1.0 + 0.1 * i as f64).collect();
        let out = wilcoxon_bh(&table(vec![bad, good])).unwrap();
        assert_eq!(out[1].annotation, Annotation::Best);
        assert_eq!(out[0].annotation, Annotation::SignificantlyWorse);
        // W+ = 210, mean 105, var 717.5
        let z: f64 = 105.0 / 717.5f64.sqrt();
        let expected = 2.0 * (1.0 - Normal::new(0.0, 1.0).unwrap().cdf(z));
        assert!((out[0].p_value.unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn rank_bounds_and_errors() {
        let cols: Vec<Vec<f64>> = (0..4)
            .map(|a| (0..8).map(|i| ((a * 7 + i * 3) % 5) as f64).collect())
            .collect();
        let out = wilcoxon_bh(&table(cols)).unwrap();
        assert!(out.iter().all(|r| (1.0..=4.0).contains(&r.average_rank)));
        let short = table(vec![vec![1.0; 5], vec![2.0; 5]]);
        assert!(matches!(wilcoxon_bh(&short), Err(Error::Unsupported(_))));
        let single = table(vec![vec![1.0; 8]]);
        assert!(matches!(wilcoxon_bh(&single), Err(Error::Unsupported(_))));
    }

    #[test]
    fn bh_adjustment() {
        let adj = benjamini_hochberg(&[0.01, 0.04, 0.03]);
        assert!((adj[0] - 0.03).abs() < 1e-12);
        assert!((adj[1] - 0.04).abs() < 1e-12);
        assert!((adj[2] - 0.04).abs() < 1e-12);
    }
}
