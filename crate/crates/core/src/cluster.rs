//! Lloyd k-means, alternating k-medoids, k-means++ seeding, and the two
//! pipelines that seed them from density peaks.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dissim::{euclidean, squared_euclidean};
use crate::error::{Error, Result};
use crate::peaks::{detect_outliers_protecting, search_peaks, select_seeds, LdpsProfile};
use crate::types::{squared_distance, Centers, ClusterModel, DataMatrix, DissimilarityMatrix, LdpsParams};

/// Label used for removed outliers in full-length label vectors.
pub const OUTLIER_LABEL: i64 = -1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Seeding {
    /// `k` distinct points chosen uniformly.
    Random(u64),
    KMeansPlusPlus(u64),
    /// Caller-chosen point indices.
    Explicit(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterConfig {
    pub max_iterations: usize,
    /// Stop once the relative objective decrease falls below this.
    pub rel_sse_tolerance: f64,
    pub seeding: Seeding,
}

impl Default for ClusterConfig {
    fn default() -> Self {
        Self {
            max_iterations: 300,
            rel_sse_tolerance: 1e-9,
            seeding: Seeding::Random(0),
        }
    }
}

impl ClusterConfig {
    pub fn with_seeding(self, seeding: Seeding) -> Self {
        Self { seeding, ..self }
    }

    fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(Error::InvalidParameter("max_iterations must be >= 1".into()));
        }
        if !(self.rel_sse_tolerance >= 0.0) {
            return Err(Error::InvalidParameter("rel_sse_tolerance must be >= 0".into()));
        }
        Ok(())
    }
}

fn check_k(k: usize, m: usize) -> Result<()> {
    if k == 0 || k > m {
        Err(Error::KTooLarge { k, m })
    } else {
        Ok(())
    }
}

/// Nearest center for every point; ties go to the lower center index.
pub fn assign_to_centers(data: &DataMatrix, centers: &[Vec<f64>]) -> Vec<usize> {
    data.rows()
        .map(|x| nearest(centers.iter().map(|c| squared_distance(x, c))).0)
        .collect()
}

/// Nearest medoid for every point; ties go to the lower medoid position.
pub fn assign_to_medoids(d: &DissimilarityMatrix, medoids: &[usize]) -> Vec<usize> {
    (0..d.len())
        .map(|i| {
            let row = d.row(i);
            nearest(medoids.iter().map(|&c| row[c])).0
        })
        .collect()
}

fn nearest(dists: impl Iterator<Item = f64>) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (j, v) in dists.enumerate() {
        if v < best.1 {
            best = (j, v);
        }
    }
    best
}

/// Coordinate mean of each cluster; `None` for an empty cluster.
pub fn update_means(data: &DataMatrix, assignments: &[usize], k: usize) -> Vec<Option<Vec<f64>>> {
    let p = data.dim();
    let mut sums = vec![vec![0.0; p]; k];
    let mut counts = vec![0usize; k];
    for (x, &a) in data.rows().zip(assignments) {
        counts[a] += 1;
        for (s, v) in sums[a].iter_mut().zip(x) {
            *s += v;
        }
    }
    sums.into_iter()
        .zip(counts)
        .map(|(s, n)| (n > 0).then(|| s.into_iter().map(|v| v / n as f64).collect()))
        .collect()
}

/// Member minimizing total within-cluster dissimilarity; ties go to the lower
/// index. `None` for an empty cluster.
pub fn update_medoids(d: &DissimilarityMatrix, assignments: &[usize], k: usize) -> Vec<Option<usize>> {
    let mut members = vec![Vec::new(); k];
    for (i, &a) in assignments.iter().enumerate() {
        members[a].push(i);
    }
    members
        .iter()
        .map(|group| {
            let mut best: Option<(usize, f64)> = None;
            for &cand in group {
                let row = d.row(cand);
                let cost: f64 = group.iter().map(|&l| row[l]).sum();
                if best.is_none_or(|(_, c)| cost < c) {
                    best = Some((cand, cost));
                }
            }
            best.map(|(i, _)| i)
        })
        .collect()
}

/// k-means SSE of an assignment.
pub fn sse(data: &DataMatrix, centers: &[Vec<f64>], assignments: &[usize]) -> f64 {
    data.rows()
        .zip(assignments)
        .map(|(x, &a)| squared_distance(x, &centers[a]))
        .sum()
}

/// Total dissimilarity of every point to its medoid.
pub fn medoid_objective(d: &DissimilarityMatrix, medoids: &[usize], assignments: &[usize]) -> f64 {
    assignments
        .iter()
        .enumerate()
        .map(|(i, &a)| d.get(i, medoids[a]))
        .sum()
}

/// k-means++: first seed uniform, then each next seed with probability
/// proportional to its squared distance to the nearest chosen seed.
pub fn kmeans_plus_plus_seeds(data: &DataMatrix, k: usize, seed: u64) -> Result<Vec<usize>> {
    let m = data.len();
    check_k(k, m)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seeds = vec![rng.random_range(0..m)];
    let mut weights: Vec<f64> = data
        .rows()
        .map(|x| squared_distance(x, data.row(seeds[0])))
        .collect();
    while seeds.len() < k {
        let total: f64 = weights.iter().sum();
        let next = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut chosen = None;
            for (i, &w) in weights.iter().enumerate() {
                acc += w;
                if w > 0.0 && acc > target {
                    chosen = Some(i);
                    break;
                }
            }
            // Rounding can leave `target` at the very end of the mass.
            chosen.unwrap_or_else(|| weights.iter().rposition(|&w| w > 0.0).expect("positive mass"))
        } else {
            // Every remaining point coincides with a seed.
            (0..m).find(|i| !seeds.contains(i)).expect("k <= m")
        };
        seeds.push(next);
        let c = data.row(next);
        for (w, x) in weights.iter_mut().zip(data.rows()) {
            *w = w.min(squared_distance(x, c));
        }
    }
    Ok(seeds)
}

/// `k` distinct indices drawn uniformly.
pub fn random_seeds(m: usize, k: usize, seed: u64) -> Result<Vec<usize>> {
    check_k(k, m)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(sample(&mut rng, m, k).into_vec())
}

fn resolve_seeds(data_len: usize, k: usize, seeding: &Seeding, data: Option<&DataMatrix>) -> Result<Vec<usize>> {
    match seeding {
        Seeding::Random(s) => random_seeds(data_len, k, *s),
        Seeding::KMeansPlusPlus(s) => match data {
            Some(x) => kmeans_plus_plus_seeds(x, k, *s),
            None => Err(Error::InvalidParameter(
                "k-means++ seeding needs coordinates".into(),
            )),
        },
        Seeding::Explicit(idx) => {
            if idx.len() != k {
                return Err(Error::InvalidParameter(format!(
                    "expected {k} explicit seeds, got {}",
                    idx.len()
                )));
            }
            if let Some(&bad) = idx.iter().find(|&&i| i >= data_len) {
                return Err(Error::InvalidParameter(format!("seed index {bad} out of range")));
            }
            Ok(idx.clone())
        }
    }
}

/// Moves the point farthest from its center into each empty cluster.
/// `cost(i)` is point i's current cost; returns the points that became centers.
fn repair_empty(assignments: &mut [usize], k: usize, cost: impl Fn(usize, usize) -> f64) -> Vec<(usize, usize)> {
    let mut moved = Vec::new();
    loop {
        let mut counts = vec![0usize; k];
        for &a in assignments.iter() {
            counts[a] += 1;
        }
        let Some(empty) = counts.iter().position(|&c| c == 0) else {
            break;
        };
        let mut far: Option<(usize, f64)> = None;
        for (i, &a) in assignments.iter().enumerate() {
            if counts[a] < 2 || moved.iter().any(|&(p, _)| p == i) {
                continue;
            }
            let c = cost(i, a);
            if far.is_none_or(|(_, best)| c > best) {
                far = Some((i, c));
            }
        }
        let (point, _) = far.expect("k <= m guarantees a donor cluster");
        assignments[point] = empty;
        moved.push((point, empty));
    }
    moved
}

fn converged(prev: f64, next: f64, tol: f64) -> bool {
    if prev <= 0.0 {
        return true;
    }
    (prev - next) / prev < tol
}

/// Lloyd iterations from seed coordinates.
pub fn kmeans_from_centers(data: &DataMatrix, mut centers: Vec<Vec<f64>>, config: &ClusterConfig) -> Result<ClusterModel> {
    config.validate()?;
    let k = centers.len();
    check_k(k, data.len())?;
    if let Some(c) = centers.iter().find(|c| c.len() != data.dim()) {
        return Err(Error::DimensionMismatch {
            expected: data.dim(),
            got: c.len(),
        });
    }

    let mut assignments = assign_to_centers(data, &centers);
    let mut objective = sse(data, &centers, &assignments);
    let mut trace = vec![objective];
    let mut iterations = 1;
    while iterations < config.max_iterations {
        let moved = repair_empty(&mut assignments, k, |i, a| squared_distance(data.row(i), &centers[a]));
        if !moved.is_empty() {
            for (point, cluster) in moved {
                centers[cluster] = data.row(point).to_vec();
            }
            objective = sse(data, &centers, &assignments);
        }
        let previous = centers.clone();
        for (c, mean) in centers.iter_mut().zip(update_means(data, &assignments, k)) {
            *c = mean.expect("clusters are nonempty after repair");
        }
        // Recomputed means can land an ulp away from a point they should
        // equal; an update that does not lower the objective is a fixed point.
        if sse(data, &centers, &assignments) > objective {
            centers = previous;
            break;
        }
        let next = assign_to_centers(data, &centers);
        let next_obj = sse(data, &centers, &next);
        iterations += 1;
        trace.push(next_obj);
        let stable = next == assignments;
        let small = converged(objective, next_obj, config.rel_sse_tolerance);
        assignments = next;
        objective = next_obj;
        if stable || small {
            break;
        }
    }
    // A final repair keeps every cluster nonempty when the loop hit its cap.
    let moved = repair_empty(&mut assignments, k, |i, a| squared_distance(data.row(i), &centers[a]));
    if !moved.is_empty() {
        for (point, cluster) in moved {
            centers[cluster] = data.row(point).to_vec();
        }
        objective = sse(data, &centers, &assignments);
    }
    Ok(ClusterModel {
        k,
        centers: Centers::Coordinates(centers),
        assignments,
        sse: objective,
        iterations,
        objective_trace: trace,
    })
}

pub fn kmeans(data: &DataMatrix, k: usize, config: &ClusterConfig) -> Result<ClusterModel> {
    check_k(k, data.len())?;
    let seeds = resolve_seeds(data.len(), k, &config.seeding, Some(data))?;
    let centers = seeds.iter().map(|&i| data.row(i).to_vec()).collect();
    kmeans_from_centers(data, centers, config)
}

/// Alternating k-medoids: assign to nearest medoid, then move each medoid
/// to its cluster's minimizer.
pub fn kmedoids(d: &DissimilarityMatrix, k: usize, config: &ClusterConfig) -> Result<ClusterModel> {
    config.validate()?;
    let m = d.len();
    check_k(k, m)?;
    let mut medoids = resolve_seeds(m, k, &config.seeding, None)?;

    let mut assignments = assign_to_medoids(d, &medoids);
    let mut objective = medoid_objective(d, &medoids, &assignments);
    let mut trace = vec![objective];
    let mut iterations = 1;
    while iterations < config.max_iterations {
        let moved = repair_empty(&mut assignments, k, |i, a| d.get(i, medoids[a]));
        if !moved.is_empty() {
            for (point, cluster) in moved {
                medoids[cluster] = point;
            }
            objective = medoid_objective(d, &medoids, &assignments);
        }
        let previous = medoids.clone();
        for (c, best) in medoids.iter_mut().zip(update_medoids(d, &assignments, k)) {
            *c = best.expect("clusters are nonempty after repair");
        }
        if medoid_objective(d, &medoids, &assignments) > objective {
            medoids = previous;
            break;
        }
        let next = assign_to_medoids(d, &medoids);
        let next_obj = medoid_objective(d, &medoids, &next);
        iterations += 1;
        trace.push(next_obj);
        let stable = next == assignments;
        let small = converged(objective, next_obj, config.rel_sse_tolerance);
        assignments = next;
        objective = next_obj;
        if stable || small {
            break;
        }
    }
    let moved = repair_empty(&mut assignments, k, |i, a| d.get(i, medoids[a]));
    if !moved.is_empty() {
        for (point, cluster) in moved {
            medoids[cluster] = point;
        }
        objective = medoid_objective(d, &medoids, &assignments);
    }
    Ok(ClusterModel {
        k,
        centers: Centers::Medoids(medoids),
        assignments,
        sse: objective,
        iterations,
        objective_trace: trace,
    })
}

/// Dissimilarity on which the k-means pipeline searches for peaks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchMetric {
    Euclidean,
    SquaredEuclidean,
}

impl SearchMetric {
    pub fn matrix(self, data: &DataMatrix) -> Result<DissimilarityMatrix> {
        match self {
            SearchMetric::Euclidean => euclidean(data),
            SearchMetric::SquaredEuclidean => squared_euclidean(data),
        }
    }
}

/// Outcome of a density-peak seeded run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LdpsRun {
    /// Model over the retained (non-outlier) points, in original order.
    pub model: ClusterModel,
    /// Original indices of the retained points; `model.assignments[i]` belongs to `retained[i]`.
    pub retained: Vec<usize>,
    /// Original indices of removed outliers.
    pub outliers: Vec<usize>,
    /// Original indices of the seeds, in score order.
    pub seeds: Vec<usize>,
    pub tau_star: f64,
    pub profile: LdpsProfile,
}

impl LdpsRun {
    /// One label per original point; outliers get [`OUTLIER_LABEL`].
    pub fn labels(&self) -> Vec<i64> {
        let m = self.retained.len() + self.outliers.len();
        let mut labels = vec![OUTLIER_LABEL; m];
        for (&orig, &a) in self.retained.iter().zip(&self.model.assignments) {
            labels[orig] = a as i64;
        }
        labels
    }
}

struct Prepared {
    seeds: Vec<usize>,
    tau_star: f64,
    outliers: Vec<usize>,
    retained: Vec<usize>,
}

fn prepare(profile: &LdpsProfile, k_star: Option<usize>, params: &LdpsParams) -> Result<Prepared> {
    let k = match k_star {
        Some(k) => k,
        None => profile.estimated_k.ok_or(Error::KEstimationFailed)?,
    };
    let sel = select_seeds(profile, k)?;
    let outliers = detect_outliers_protecting(profile, params.outlier_threshold, &sel.indices);
    let m = profile.gamma_c.len();
    let mut is_outlier = vec![false; m];
    for &o in &outliers {
        is_outlier[o] = true;
    }
    let retained = (0..m).filter(|&i| !is_outlier[i]).collect();
    Ok(Prepared {
        seeds: sel.indices,
        tau_star: sel.tau_star,
        outliers,
        retained,
    })
}

/// Density-peak seeded k-means. The peak search runs on `metric` distances;
/// clustering minimizes squared Euclidean SSE over the non-outlier points.
pub fn ldps_means(
    data: &DataMatrix,
    k_star: Option<usize>,
    params: &LdpsParams,
    metric: SearchMetric,
    config: &ClusterConfig,
) -> Result<LdpsRun> {
    let d = metric.matrix(data)?;
    let profile = search_peaks(&d, params)?;
    ldps_means_with_profile(data, k_star, profile, config)
}

/// As [`ldps_means`], reusing an already computed profile.
pub fn ldps_means_with_profile(
    data: &DataMatrix,
    k_star: Option<usize>,
    profile: LdpsProfile,
    config: &ClusterConfig,
) -> Result<LdpsRun> {
    let prep = prepare(&profile, k_star, &profile.params)?;
    let kept = data.select_rows(&prep.retained)?;
    let centers = prep.seeds.iter().map(|&i| data.row(i).to_vec()).collect();
    let model = kmeans_from_centers(&kept, centers, config)?;
    Ok(LdpsRun {
        model,
        retained: prep.retained,
        outliers: prep.outliers,
        seeds: prep.seeds,
        tau_star: prep.tau_star,
        profile,
    })
}

/// Density-peak seeded k-medoids over an arbitrary dissimilarity. Medoids
/// are reported in original point indexing.
pub fn ldps_medoids(
    d: &DissimilarityMatrix,
    k_star: Option<usize>,
    params: &LdpsParams,
    config: &ClusterConfig,
) -> Result<LdpsRun> {
    let profile = search_peaks(d, params)?;
    ldps_medoids_with_profile(d, k_star, profile, config)
}

pub fn ldps_medoids_with_profile(
    d: &DissimilarityMatrix,
    k_star: Option<usize>,
    profile: LdpsProfile,
    config: &ClusterConfig,
) -> Result<LdpsRun> {
    let prep = prepare(&profile, k_star, &profile.params)?;
    let reduced = if prep.outliers.is_empty() {
        d.clone()
    } else {
        d.submatrix(&prep.retained)?
    };
    // Seeds are never outliers, so each has a position in `retained`.
    let local_seeds = prep
        .seeds
        .iter()
        .map(|s| prep.retained.binary_search(s).expect("seed retained"))
        .collect();
    let mut model = kmedoids(&reduced, prep.seeds.len(), &config.clone().with_seeding(Seeding::Explicit(local_seeds)))?;
    if let Centers::Medoids(local) = &model.centers {
        model.centers = Centers::Medoids(local.iter().map(|&i| prep.retained[i]).collect());
    }
    Ok(LdpsRun {
        model,
        retained: prep.retained,
        outliers: prep.outliers,
        seeds: prep.seeds,
        tau_star: prep.tau_star,
        profile,
    })
}
