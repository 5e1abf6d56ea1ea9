//! Local density peak search.
//!
//! Every point gets a Gaussian kernel density and a local distinctiveness
//! index (LDI): the distance to the nearest denser point inside radius `r`,
//! divided by `r`, or 1 when no such point exists. The two combine into a
//! center score and an outlier score. Sorting the center scores and locating
//! the largest gap between consecutive values yields both the number of
//! clusters and the seeds; the size of that gap (`tau*`) measures how
//! distinct the peaks are and drives parameter selection.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{stable_sort_descending, DissimilarityMatrix, LdpsParams};

/// Gaussian-kernel density: `rho_i = 1/(m h) * sum_j K(d_ij / h)`, self-term included.
pub fn local_density(d: &DissimilarityMatrix, h: f64) -> Result<Vec<f64>> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidBandwidth(h));
    }
    let m = d.len();
    let norm = 1.0 / ((m as f64) * h * (2.0 * PI).sqrt());
    Ok((0..m)
        .into_par_iter()
        .map(|i| {
            let s: f64 = d
                .row(i)
                .iter()
                .map(|&dij| {
                    let z = dij / h;
                    (-0.5 * z * z).exp()
                })
                .sum();
            s * norm
        })
        .collect())
}

/// LDI per point. Dominators are neighbors with `0 < d_ij <= r` and strictly
/// greater density.
pub fn local_distinctiveness_index(d: &DissimilarityMatrix, rho: &[f64], r: f64) -> Result<Vec<f64>> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidRadius(r));
    }
    if rho.len() != d.len() {
        return Err(Error::DimensionMismatch {
            expected: d.len(),
            got: rho.len(),
        });
    }
    Ok((0..d.len())
        .into_par_iter()
        .map(|i| {
            let nearest = d
                .row(i)
                .iter()
                .zip(rho)
                .filter(|&(&dij, &rj)| dij > 0.0 && dij <= r && rj > rho[i])
                .map(|(&dij, _)| dij)
                .fold(f64::INFINITY, f64::min);
            if nearest.is_finite() {
                nearest / r
            } else {
                1.0
            }
        })
        .collect())
}

fn check_unit(values: &[f64]) -> Result<()> {
    match values.iter().position(|v| !(0.0..=1.0).contains(v)) {
        Some(index) => Err(Error::InvalidScore {
            index,
            value: values[index],
        }),
        None => Ok(()),
    }
}

/// Center score for one point; high when both density and LDI are high.
#[inline]
pub fn center_score(rho_bar: f64, ldi: f64) -> f64 {
    let a = 1.0 - rho_bar;
    let b = 1.0 - ldi;
    let s = 1.0 - 0.5 * a * a - 0.5 * b * b;
    s * s
}

/// Outlier score for one point; high when density is low and LDI is high.
#[inline]
pub fn outlier_score(rho_bar: f64, ldi: f64) -> f64 {
    let b = 1.0 - ldi;
    let s = 1.0 - 0.5 * rho_bar * rho_bar - 0.5 * b * b;
    s * s
}

fn paired_scores(rho_bar: &[f64], ldi: &[f64], f: fn(f64, f64) -> f64) -> Result<Vec<f64>> {
    if rho_bar.len() != ldi.len() {
        return Err(Error::DimensionMismatch {
            expected: rho_bar.len(),
            got: ldi.len(),
        });
    }
    check_unit(rho_bar)?;
    check_unit(ldi)?;
    Ok(rho_bar.iter().zip(ldi).map(|(&r, &l)| f(r, l)).collect())
}

pub fn gamma_center(rho_bar: &[f64], ldi: &[f64]) -> Result<Vec<f64>> {
    paired_scores(rho_bar, ldi, center_score)
}

pub fn gamma_outlier(rho_bar: &[f64], ldi: &[f64]) -> Result<Vec<f64>> {
    paired_scores(rho_bar, ldi, outlier_score)
}

/// Gaps between consecutive sorted scores. The last gap is measured against 0,
/// so `gaps[i-1]` is the margin of taking the top `i` points as peaks.
fn sorted_gaps(sorted: &[f64]) -> Vec<f64> {
    let mut gaps: Vec<f64> = sorted.windows(2).map(|w| w[0] - w[1]).collect();
    gaps.push(*sorted.last().expect("nonempty"));
    gaps
}

/// 1-based position of the largest gap; ties go to the smaller index.
fn largest_gap(gaps: &[f64]) -> usize {
    let mut best = 0;
    for (i, &g) in gaps.iter().enumerate() {
        if g > gaps[best] {
            best = i;
        }
    }
    best + 1
}

/// Everything the peak search computes for one parameter setting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LdpsProfile {
    pub params: LdpsParams,
    /// Absolute bandwidth and radius.
    pub h: f64,
    pub r: f64,
    pub rho: Vec<f64>,
    pub rho_bar: Vec<f64>,
    pub ldi: Vec<f64>,
    pub gamma_c: Vec<f64>,
    pub gamma_o: Vec<f64>,
    /// Point indices by descending center score.
    pub sorted_order: Vec<usize>,
    /// `gaps[i] = gamma_sorted[i] - gamma_sorted[i+1]`, last entry against 0.
    pub gaps: Vec<f64>,
    /// Position of the largest gap, before the `tau_min` check.
    pub raw_k: usize,
    /// `None` when the largest gap is below `tau_min`.
    pub estimated_k: Option<usize>,
    pub peak_indices: Vec<usize>,
    pub tau_star: f64,
}

impl LdpsProfile {
    /// Estimated k, or -1 on failure.
    pub fn estimated_k_signed(&self) -> i64 {
        self.estimated_k.map_or(-1, |k| k as i64)
    }

    /// Gap after the top `k` scores.
    pub fn gap_at(&self, k: usize) -> f64 {
        self.gaps[k - 1]
    }
}

fn build_profile(
    d: &DissimilarityMatrix,
    rho: Vec<f64>,
    params: LdpsParams,
    h: f64,
) -> Result<LdpsProfile> {
    let r = params.radius(d.max());
    let ldi = local_distinctiveness_index(d, &rho, r)?;
    let rho_max = rho.iter().copied().fold(0.0_f64, f64::max);
    let exponent = params.density_exponent.value();
    let rho_bar: Vec<f64> = rho
        .iter()
        .map(|&v| (v / rho_max).powf(exponent).min(1.0))
        .collect();
    let gamma_c = gamma_center(&rho_bar, &ldi)?;
    let gamma_o = gamma_outlier(&rho_bar, &ldi)?;
    let (sorted, sorted_order) = stable_sort_descending(&gamma_c)?;
    let gaps = sorted_gaps(&sorted);
    let raw_k = largest_gap(&gaps);
    let tau_star = gaps[raw_k - 1];
    let (estimated_k, peak_indices) = if tau_star < params.tau_min {
        (None, Vec::new())
    } else {
        (Some(raw_k), sorted_order[..raw_k].to_vec())
    };
    Ok(LdpsProfile {
        params,
        h,
        r,
        rho,
        rho_bar,
        ldi,
        gamma_c,
        gamma_o,
        sorted_order,
        gaps,
        raw_k,
        estimated_k,
        peak_indices,
        tau_star,
    })
}

/// Runs the full peak search for one parameter setting.
pub fn search_peaks(d: &DissimilarityMatrix, params: &LdpsParams) -> Result<LdpsProfile> {
    if d.len() < 2 {
        return Err(Error::TooFewPoints {
            needed: 2,
            got: d.len(),
        });
    }
    params.validate()?;
    let h = params.bandwidth(d.max());
    let rho = local_density(d, h)?;
    build_profile(d, rho, *params, h)
}

/// Seeds chosen from a profile for a given cluster count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedSelection {
    pub indices: Vec<usize>,
    /// Gap after the top `k_star` scores.
    pub tau_star: f64,
}

/// The `k_star` highest-scoring points, in score order.
pub fn select_seeds(profile: &LdpsProfile, k_star: usize) -> Result<SeedSelection> {
    let m = profile.sorted_order.len();
    if k_star == 0 || k_star > m {
        return Err(Error::KTooLarge { k: k_star, m });
    }
    Ok(SeedSelection {
        indices: profile.sorted_order[..k_star].to_vec(),
        tau_star: profile.gap_at(k_star),
    })
}

/// Points whose outlier score exceeds `threshold`, never including the peaks.
pub fn detect_outliers(profile: &LdpsProfile, threshold: f64) -> Vec<usize> {
    detect_outliers_protecting(profile, threshold, &profile.peak_indices)
}

/// Like [`detect_outliers`], with an explicit set of points that are never flagged.
pub fn detect_outliers_protecting(profile: &LdpsProfile, threshold: f64, protected: &[usize]) -> Vec<usize> {
    profile
        .gamma_o
        .iter()
        .enumerate()
        .filter(|&(i, &g)| g > threshold && !protected.contains(&i))
        .map(|(i, _)| i)
        .collect()
}

/// One evaluated grid cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub h_bar: f64,
    pub r_bar: f64,
    pub raw_k: usize,
    /// -1 when estimation failed.
    pub estimated_k: i64,
    pub tau_star: f64,
}

impl GridCell {
    /// Selection score; failed cells score 0.
    pub fn score(&self) -> f64 {
        if self.estimated_k > 0 {
            self.tau_star
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSearch {
    pub h_bar: f64,
    pub r_bar: f64,
    pub profile: LdpsProfile,
    /// Cells in (h, r) row-major grid order.
    pub cells: Vec<GridCell>,
}

/// Inclusive linear spacing of `count` values from `start` to `stop`.
pub fn linspace(start: f64, stop: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![start],
        _ => {
            let step = (stop - start) / (count - 1) as f64;
            (0..count)
                .map(|i| if i == count - 1 { stop } else { start + step * i as f64 })
                .collect()
        }
    }
}

/// Default bandwidth grid: 10 values over (0, 0.2].
pub fn default_h_grid() -> Vec<f64> {
    linspace(0.02, 0.2, 10)
}

/// Default radius grid: 10 values over [0.05, 0.5].
pub fn default_r_grid() -> Vec<f64> {
    linspace(0.05, 0.5, 10)
}

/// Picks the (h_bar, r_bar) pair maximizing `tau*`. Ties prefer the smaller
/// h_bar, then the smaller r_bar.
pub fn grid_search_theta(
    d: &DissimilarityMatrix,
    h_grid: &[f64],
    r_grid: &[f64],
    base: &LdpsParams,
) -> Result<GridSearch> {
    if h_grid.is_empty() || r_grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    if d.len() < 2 {
        return Err(Error::TooFewPoints {
            needed: 2,
            got: d.len(),
        });
    }
    for &h in h_grid {
        base.with_theta(h, base.r_bar).validate()?;
    }
    for &r in r_grid {
        base.with_theta(base.h_bar, r).validate()?;
    }

    // Densities depend only on h; evaluate them once per bandwidth.
    let per_h: Vec<Vec<GridCell>> = h_grid
        .iter()
        .map(|&h_bar| {
            let h = h_bar * d.max();
            let rho = local_density(d, h)?;
            r_grid
                .par_iter()
                .map(|&r_bar| {
                    let p = build_profile(d, rho.clone(), base.with_theta(h_bar, r_bar), h)?;
                    Ok(GridCell {
                        h_bar,
                        r_bar,
                        raw_k: p.raw_k,
                        estimated_k: p.estimated_k_signed(),
                        tau_star: p.tau_star,
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let cells: Vec<GridCell> = per_h.into_iter().flatten().collect();

    let mut best = cells[0];
    for c in &cells[1..] {
        let better = c.score() > best.score()
            || (c.score() == best.score()
                && (c.h_bar < best.h_bar || (c.h_bar == best.h_bar && c.r_bar < best.r_bar)));
        if better {
            best = *c;
        }
    }
    let profile = search_peaks(d, &base.with_theta(best.h_bar, best.r_bar))?;
    Ok(GridSearch {
        h_bar: best.h_bar,
        r_bar: best.r_bar,
        profile,
        cells,
    })
}

/// Cutoff-density / global-distinctiveness decision values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CfsfdpProfile {
    pub dc: f64,
    /// Number of other points closer than `dc`.
    pub rho_cutoff: Vec<usize>,
    /// Distance to the nearest denser point; the farthest distance for points with none.
    pub gdi: Vec<f64>,
    pub gamma: Vec<f64>,
    pub sorted_order: Vec<usize>,
    pub gaps: Vec<f64>,
    pub estimated_k: usize,
    pub peak_indices: Vec<usize>,
}

pub fn cfsfdp_baseline(d: &DissimilarityMatrix, dc: f64) -> Result<CfsfdpProfile> {
    if !(dc > 0.0 && dc.is_finite()) {
        return Err(Error::InvalidCutoff(dc));
    }
    let m = d.len();
    let rho: Vec<usize> = (0..m)
        .map(|i| {
            d.row(i)
                .iter()
                .enumerate()
                .filter(|&(j, &dij)| j != i && dij < dc)
                .count()
        })
        .collect();
    let gdi: Vec<f64> = (0..m)
        .map(|i| {
            let row = d.row(i);
            let nearest = (0..m)
                .filter(|&j| rho[j] > rho[i])
                .map(|j| row[j])
                .fold(f64::INFINITY, f64::min);
            if nearest.is_finite() {
                nearest
            } else {
                row.iter().copied().fold(0.0, f64::max)
            }
        })
        .collect();
    let gamma: Vec<f64> = rho.iter().zip(&gdi).map(|(&r, &g)| r as f64 * g).collect();
    let (sorted, sorted_order) = stable_sort_descending(&gamma)?;
    let gaps = sorted_gaps(&sorted);
    let estimated_k = largest_gap(&gaps);
    let peak_indices = sorted_order[..estimated_k].to_vec();
    Ok(CfsfdpProfile {
        dc,
        rho_cutoff: rho,
        gdi,
        gamma,
        sorted_order,
        gaps,
        estimated_k,
        peak_indices,
    })
}

/// Cutoff at which points have on average `fraction * m` neighbors.
pub fn cutoff_for_neighbor_fraction(d: &DissimilarityMatrix, fraction: f64) -> Result<f64> {
    let m = d.len();
    if m < 2 {
        return Err(Error::TooFewPoints { needed: 2, got: m });
    }
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "neighbor fraction must lie in (0, 1), got {fraction}"
        )));
    }
    let mut upper: Vec<f64> = (0..m)
        .flat_map(|i| d.row(i)[i + 1..].to_vec())
        .collect();
    upper.sort_by(f64::total_cmp);
    let pos = ((fraction * upper.len() as f64).round() as usize).min(upper.len() - 1);
    let dc = upper[pos];
    if dc > 0.0 {
        Ok(dc)
    } else {
        upper
            .iter()
            .copied()
            .find(|&v| v > 0.0)
            .ok_or(Error::InvalidCutoff(0.0))
    }
}
