//! Clustering quality metrics, the repeated-restart benchmark protocol, and
//! a Monte-Carlo check of the expected number of random restarts needed to
//! hit one seed per cluster.

use std::io::Write;
use std::time::Instant;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cluster::{kmeans, ldps_means_with_profile, ClusterConfig, SearchMetric, Seeding};
use crate::error::{Error, Result};
use crate::peaks::{grid_search_theta, search_peaks};
use crate::types::{DataMatrix, LdpsParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub error_rate: f64,
    pub true_assoc: f64,
    pub false_assoc: f64,
}

fn check_lengths(a: &[usize], b: &[usize]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::LabelMismatch(a.len(), b.len()));
    }
    if a.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(())
}

/// `table[learned][truth]` counts.
fn contingency(predicted: &[usize], truth: &[usize]) -> Vec<Vec<usize>> {
    let rows = predicted.iter().max().map_or(0, |v| v + 1);
    let cols = truth.iter().max().map_or(0, |v| v + 1);
    let mut table = vec![vec![0usize; cols]; rows];
    for (&p, &t) in predicted.iter().zip(truth) {
        table[p][t] += 1;
    }
    table
}

/// Each learned cluster is mapped to its plurality true category (ties to the
/// smaller id); returns the fraction of points not in their cluster's category.
pub fn error_rate(predicted: &[usize], truth: &[usize]) -> Result<f64> {
    check_lengths(predicted, truth)?;
    let table = contingency(predicted, truth);
    let correct: usize = table
        .iter()
        .map(|row| row.iter().copied().max().unwrap_or(0))
        .sum();
    Ok(1.0 - correct as f64 / predicted.len() as f64)
}

fn pairs(n: usize) -> u128 {
    let n = n as u128;
    n * n.saturating_sub(1) / 2
}

/// `(r_t, r_f)`: the fraction of same-category pairs placed together, and the
/// fraction of different-category pairs placed together. With no pairs of a
/// kind the corresponding rate is 1 for `r_t` and 0 for `r_f`.
pub fn pairwise_association(predicted: &[usize], truth: &[usize]) -> Result<(f64, f64)> {
    check_lengths(predicted, truth)?;
    let table = contingency(predicted, truth);
    let both: u128 = table.iter().flatten().map(|&c| pairs(c)).sum();
    let same_learned: u128 = table.iter().map(|row| pairs(row.iter().sum())).sum();
    let cols = table.first().map_or(0, Vec::len);
    let same_true: u128 = (0..cols)
        .map(|t| pairs(table.iter().map(|row| row[t]).sum()))
        .sum();
    let total = pairs(predicted.len());
    let diff_true = total - same_true;
    let r_t = if same_true == 0 {
        1.0
    } else {
        both as f64 / same_true as f64
    };
    let r_f = if diff_true == 0 {
        0.0
    } else {
        (same_learned - both) as f64 / diff_true as f64
    };
    Ok((r_t, r_f))
}

pub fn evaluate(predicted: &[usize], truth: &[usize]) -> Result<EvalReport> {
    let error_rate = error_rate(predicted, truth)?;
    let (true_assoc, false_assoc) = pairwise_association(predicted, truth)?;
    Ok(EvalReport {
        error_rate,
        true_assoc,
        false_assoc,
    })
}

/// Maps full-length labels with outliers (-1) onto dense ids, putting
/// outliers in one extra group.
pub fn labels_with_outlier_group(labels: &[i64]) -> Vec<usize> {
    let k = labels.iter().copied().max().map_or(0, |v| (v + 1).max(0) as usize);
    labels
        .iter()
        .map(|&l| if l < 0 { k } else { l as usize })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkRecord {
    pub method: String,
    /// Wall-clock seconds spent reaching the recorded repeat, millisecond precision.
    pub cpu_time_seconds: f64,
    /// Assignment iterations in the recorded repeat.
    pub iter_at_best: usize,
    /// 1-based repeat index that first beat the density-peak SSE, else the best repeat.
    pub repeats_to_beat: usize,
    /// Whether some repeat beat the density-peak SSE.
    pub beat_reference: bool,
    pub best_sse: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub k: usize,
    pub budget: usize,
    pub h_bar: f64,
    pub r_bar: f64,
    /// Parameter search time, reported apart from the clustering run.
    pub grid_search_seconds: f64,
    pub records: Vec<BenchmarkRecord>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkOptions {
    pub budget: usize,
    pub seed: u64,
    pub params: LdpsParams,
    pub metric: SearchMetric,
    /// Search (h_bar, r_bar) on these grids; `None` uses `params` as given.
    pub grid: Option<(Vec<f64>, Vec<f64>)>,
    pub config: ClusterConfig,
}

fn millis(secs: f64) -> f64 {
    (secs * 1000.0).round() / 1000.0
}

/// Runs the density-peak pipeline once for the reference SSE, then plain
/// k-means and k-means++ restarts up to the budget. For each baseline the
/// record holds the first repeat with a strictly smaller SSE, or else the
/// best repeat. Outlier removal is disabled so all methods score the same points.
pub fn benchmark_protocol(data: &DataMatrix, k_star: usize, opts: &BenchmarkOptions) -> Result<BenchmarkReport> {
    if opts.budget == 0 {
        return Err(Error::InvalidParameter("budget must be >= 1".into()));
    }
    let params = LdpsParams {
        outlier_threshold: 1.0,
        ..opts.params
    };
    let d = opts.metric.matrix(data)?;

    let grid_start = Instant::now();
    let profile = match &opts.grid {
        Some((hs, rs)) => grid_search_theta(&d, hs, rs, &params)?.profile,
        None => search_peaks(&d, &params)?,
    };
    let grid_search_seconds = millis(grid_start.elapsed().as_secs_f64());
    let (h_bar, r_bar) = (profile.params.h_bar, profile.params.r_bar);

    let start = Instant::now();
    let reference = ldps_means_with_profile(data, Some(k_star), profile, &opts.config)?;
    let ldps_time = start.elapsed().as_secs_f64();
    let reference_sse = reference.model.sse;
    let mut records = vec![BenchmarkRecord {
        method: "ldps-means".into(),
        cpu_time_seconds: millis(ldps_time),
        iter_at_best: reference.model.iterations,
        repeats_to_beat: 1,
        beat_reference: false,
        best_sse: reference_sse,
    }];

    for (method, plus_plus) in [("kmeans", false), ("kmeans++", true)] {
        let start = Instant::now();
        let mut best: Option<(usize, usize, f64, f64)> = None;
        let mut first_beat: Option<(usize, usize, f64)> = None;
        for rep in 0..opts.budget {
            let seed = derive_seed(opts.seed, plus_plus, rep);
            let seeding = if plus_plus {
                Seeding::KMeansPlusPlus(seed)
            } else {
                Seeding::Random(seed)
            };
            let model = kmeans(data, k_star, &opts.config.clone().with_seeding(seeding))?;
            let elapsed = start.elapsed().as_secs_f64();
            if best.is_none_or(|b| model.sse < b.2) {
                best = Some((rep + 1, model.iterations, model.sse, elapsed));
            }
            if first_beat.is_none() && model.sse < reference_sse {
                first_beat = Some((rep + 1, model.iterations, elapsed));
            }
        }
        let (best_rep, best_iter, best_sse, best_time) = best.expect("budget >= 1");
        let (repeats, iters, time, beat) = match first_beat {
            Some((r, i, t)) => (r, i, t, true),
            None => (best_rep, best_iter, best_time, false),
        };
        records.push(BenchmarkRecord {
            method: method.into(),
            cpu_time_seconds: millis(time),
            iter_at_best: iters,
            repeats_to_beat: repeats,
            beat_reference: beat,
            best_sse,
        });
    }
    Ok(BenchmarkReport {
        k: k_star,
        budget: opts.budget,
        h_bar,
        r_bar,
        grid_search_seconds,
        records,
    })
}

/// Per-repeat seed: a SplitMix64 step over (base, method, repeat).
fn derive_seed(base: u64, plus_plus: bool, rep: usize) -> u64 {
    let mut z = base
        .wrapping_add((rep as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(if plus_plus { 0xD1B5_4A32_D192_ED03 } else { 0 });
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Writes a benchmark as one CSV row, with a column group per method. Timing
/// columns are included only when asked, since they are the one
/// nondeterministic field.
pub fn write_benchmark_csv<W: Write>(out: W, report: &BenchmarkReport, timing: bool) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = ["k", "budget", "h_bar", "r_bar"].map(String::from).to_vec();
    let mut row = vec![
        report.k.to_string(),
        report.budget.to_string(),
        report.h_bar.to_string(),
        report.r_bar.to_string(),
    ];
    if timing {
        header.push("grid_search_s".into());
        row.push(format!("{:.3}", report.grid_search_seconds));
    }
    for (n, r) in report.records.iter().enumerate() {
        let tag = &r.method;
        header.push(format!("{tag}_iter"));
        row.push(r.iter_at_best.to_string());
        // The reference run has no repeat count of its own.
        if n > 0 {
            header.push(format!("{tag}_repe"));
            row.push(r.repeats_to_beat.to_string());
            header.push(format!("{tag}_beat_ldps"));
            row.push(r.beat_reference.to_string());
        }
        header.push(format!("{tag}_sse"));
        row.push(r.best_sse.to_string());
        if timing {
            header.push(format!("{tag}_time_s"));
            row.push(format!("{:.3}", r.cpu_time_seconds));
        }
    }
    w.write_record(&header)?;
    w.write_record(&row)?;
    w.flush()?;
    Ok(())
}

/// `C(k*m0, k) / m0^k`, evaluated in log space.
pub fn expected_repeats(m0: usize, k: usize) -> f64 {
    log_expected_repeats(m0, k).exp()
}

pub fn log_expected_repeats(m0: usize, k: usize) -> f64 {
    let m = (k * m0) as f64;
    let log_choose: f64 = (0..k).map(|i| ((m - i as f64) / (i as f64 + 1.0)).ln()).sum();
    log_choose - k as f64 * (m0 as f64).ln()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloResult {
    pub m0: usize,
    pub k: usize,
    pub trials: usize,
    pub empirical_mean: f64,
    pub analytic: f64,
}

impl MonteCarloResult {
    pub fn relative_error(&self) -> f64 {
        (self.empirical_mean - self.analytic).abs() / self.analytic
    }
}

/// Simulates random seeding on `k` balanced clusters of `m0` points: each
/// draw picks `k` distinct indices uniformly; a trial ends at the first draw
/// that hits every cluster once. Returns the mean draws per trial alongside
/// the closed form.
pub fn theorem_one_monte_carlo(m0: usize, k: usize, trials: usize, seed: u64) -> Result<MonteCarloResult> {
    if trials == 0 || m0 == 0 || k == 0 {
        return Err(Error::InvalidParameter("m0, k and trials must be >= 1".into()));
    }
    let m = k * m0;
    if m > 10_000 {
        return Err(Error::InvalidParameter(format!("k*m0 = {m} exceeds 10000")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = vec![false; k];
    let mut total: u64 = 0;
    for _ in 0..trials {
        loop {
            total += 1;
            seen.iter_mut().for_each(|s| *s = false);
            let mut hit_all = true;
            for idx in sample(&mut rng, m, k).iter() {
                let label = idx / m0;
                if seen[label] {
                    hit_all = false;
                    break;
                }
                seen[label] = true;
            }
            if hit_all {
                break;
            }
        }
    }
    Ok(MonteCarloResult {
        m0,
        k,
        trials,
        empirical_mean: total as f64 / trials as f64,
        analytic: expected_repeats(m0, k),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_labels() {
        let y = [0, 0, 1, 1, 2];
        let r = evaluate(&y, &y).unwrap();
        assert_eq!(r.error_rate, 0.0);
        assert_eq!(r.true_assoc, 1.0);
        assert_eq!(r.false_assoc, 0.0);
    }

    #[test]
    fn one_cluster_over_two_categories() {
        let truth = [0, 0, 1, 1];
        let pred = [0, 0, 0, 0];
        assert_eq!(error_rate(&pred, &truth).unwrap(), 0.5);
        assert_eq!(pairwise_association(&pred, &truth).unwrap(), (1.0, 1.0));
    }

    #[test]
    fn two_clusters_mapping_to_one_category() {
        // Cluster 0 -> {0,0,1}, cluster 1 -> {0,0,2}: both map to category 0.
        let pred = [0, 0, 0, 1, 1, 1];
        let truth = [0, 0, 1, 0, 0, 2];
        assert!((error_rate(&pred, &truth).unwrap() - 2.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn length_mismatch() {
        assert!(matches!(error_rate(&[0], &[0, 1]), Err(Error::LabelMismatch(1, 2))));
    }

    #[test]
    fn outlier_group() {
        assert_eq!(labels_with_outlier_group(&[0, -1, 1, 1]), vec![0, 2, 1, 1]);
    }

    #[test]
    fn analytic_repeats() {
        assert!((expected_repeats(100, 2) - 1.99).abs() < 1e-12);
        assert_eq!(expected_repeats(7, 1), 1.0);
        assert!((expected_repeats(30, 3) - 117480.0 / 27000.0).abs() < 1e-12);
    }

    #[test]
    fn single_cluster_always_succeeds() {
        let r = theorem_one_monte_carlo(50, 1, 1000, 4).unwrap();
        assert_eq!(r.empirical_mean, 1.0);
        assert_eq!(r.analytic, 1.0);
    }

    #[test]
    fn growth_rate_increases_with_k() {
        let rates: Vec<f64> = (2..=10).map(|k| log_expected_repeats(50, k) / k as f64).collect();
        assert!(rates.windows(2).all(|w| w[1] > w[0]), "{rates:?}");
    }
}
