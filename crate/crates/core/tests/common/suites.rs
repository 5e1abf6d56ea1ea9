//! Randomized comparison suites, shared by the integration tests and the
//! acceptance harness. Each returns `Err` with a description of the first
//! disagreement.

#![allow(dead_code)]

use ldps::cluster::{self, ClusterConfig, Seeding};
use ldps::dissim;
use ldps::eval;
use ldps::peaks;
use ldps::{DataMatrix, DissimilarityMatrix, Measure};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::oracles;

pub type Check = Result<(), String>;

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1.0)
}

/// Random points; a share of instances sit on a coarse lattice so that
/// duplicates and exact distance ties occur.
pub fn random_points(rng: &mut ChaCha8Rng, m: usize, p: usize) -> DataMatrix {
    let lattice = rng.random_bool(0.3);
    loop {
        let values: Vec<f64> = (0..m * p)
            .map(|_| {
                let v: f64 = rng.random();
                if lattice {
                    (v * 4.0).round() / 4.0
                } else {
                    v
                }
            })
            .collect();
        let data = DataMatrix::new(m, p, values).unwrap();
        let d = dissim::squared_euclidean(&data).unwrap();
        if m < 2 || d.max() > 0.0 {
            return data;
        }
    }
}

pub fn check_squared_euclidean(data: &DataMatrix) -> Check {
    let d = dissim::squared_euclidean(data).map_err(|e| e.to_string())?;
    let reference = oracles::squared_euclidean(data);
    for (i, row) in reference.iter().enumerate() {
        for (j, &want) in row.iter().enumerate() {
            if !close(d.get(i, j), want, 1e-12) {
                return Err(format!("squared distance ({i},{j}): {} vs {want}", d.get(i, j)));
            }
        }
    }
    Ok(())
}

pub fn check_local_density(d: &DissimilarityMatrix, h: f64) -> Check {
    let rho = peaks::local_density(d, h).map_err(|e| e.to_string())?;
    for (i, (&got, want)) in rho.iter().zip(oracles::kde(d, h)).enumerate() {
        if !close(got, want, 1e-12) {
            return Err(format!("density {i}: {got} vs {want}"));
        }
    }
    Ok(())
}

pub fn check_ldi(d: &DissimilarityMatrix, h: f64, r: f64) -> Check {
    let rho = peaks::local_density(d, h).map_err(|e| e.to_string())?;
    let ldi = peaks::local_distinctiveness_index(d, &rho, r).map_err(|e| e.to_string())?;
    if ldi != oracles::ldi(d, &rho, r) {
        return Err(format!("ldi mismatch at h={h}, r={r}"));
    }
    Ok(())
}

pub fn check_cfsfdp(d: &DissimilarityMatrix, dc: f64) -> Check {
    let got = peaks::cfsfdp_baseline(d, dc).map_err(|e| e.to_string())?;
    let rho = oracles::cutoff_density(d, dc);
    if got.rho_cutoff != rho {
        return Err(format!("cutoff density mismatch at dc={dc}"));
    }
    let rho_f: Vec<f64> = rho.iter().map(|&v| v as f64).collect();
    let gdi = oracles::gdi(d, &rho_f);
    if got.gdi != gdi {
        return Err(format!("distinctiveness mismatch at dc={dc}"));
    }
    let gamma: Vec<f64> = rho_f.iter().zip(&gdi).map(|(a, b)| a * b).collect();
    if got.gamma != gamma {
        return Err("decision value mismatch".into());
    }
    // Largest drop between consecutive sorted values, the last one against zero.
    let mut order: Vec<usize> = (0..gamma.len()).collect();
    order.sort_by(|&a, &b| gamma[b].total_cmp(&gamma[a]).then(a.cmp(&b)));
    let mut k = 1;
    let mut best = f64::NEG_INFINITY;
    for pos in 0..order.len() {
        let next = if pos + 1 < order.len() { gamma[order[pos + 1]] } else { 0.0 };
        let gap = gamma[order[pos]] - next;
        if gap > best {
            best = gap;
            k = pos + 1;
        }
    }
    if got.estimated_k != k || got.peak_indices != order[..k] {
        return Err(format!("center count {} vs {k}", got.estimated_k));
    }
    Ok(())
}

/// Checks the t-nn graph against a direct construction, then every graph
/// distance against Floyd-Warshall on the same edges.
pub fn check_manifold(data: &DataMatrix, t: usize) -> Check {
    let m = data.len();
    let graph = dissim::build_tnn_graph(data, t).map_err(|e| e.to_string())?;
    let sq = oracles::squared_euclidean(data);
    let mut base = vec![vec![false; m]; m];
    for i in 0..m {
        let mut others: Vec<usize> = (0..m).filter(|&j| j != i).collect();
        others.sort_by(|&a, &b| sq[i][a].total_cmp(&sq[i][b]).then(a.cmp(&b)));
        for &j in &others[..t] {
            base[i][j] = true;
            base[j][i] = true;
        }
    }
    let mut edges = Vec::new();
    let mut extra = 0;
    for i in 0..m {
        for &(j, w) in graph.neighbors(i) {
            if !close(w, sq[i][j].sqrt(), 1e-12) {
                return Err(format!("edge ({i},{j}) weight {w}"));
            }
            if i < j {
                edges.push((i, j, w));
                if !base[i][j] {
                    extra += 1;
                }
            }
        }
        for j in 0..m {
            if base[i][j] && !graph.neighbors(i).iter().any(|e| e.0 == j) {
                return Err(format!("missing neighbor edge ({i},{j})"));
            }
        }
    }
    // Components of the plain neighbor graph, by flood fill.
    let mut comp = vec![usize::MAX; m];
    let mut count = 0;
    for s in 0..m {
        if comp[s] != usize::MAX {
            continue;
        }
        let mut stack = vec![s];
        comp[s] = count;
        while let Some(u) = stack.pop() {
            for v in 0..m {
                if base[u][v] && comp[v] == usize::MAX {
                    comp[v] = count;
                    stack.push(v);
                }
            }
        }
        count += 1;
    }
    if extra != count - 1 || graph.bridge_count() != extra {
        return Err(format!("{extra} bridges for {count} components"));
    }
    let d = dissim::manifold_distance(&graph).map_err(|e| e.to_string())?;
    let reference = oracles::all_pairs_shortest(m, &edges);
    for i in 0..m {
        for j in 0..m {
            if !close(d.get(i, j), reference[i][j], 1e-12) {
                return Err(format!("graph distance ({i},{j}): {} vs {}", d.get(i, j), reference[i][j]));
            }
        }
    }
    Ok(())
}

/// Integer-valued dissimilarities keep medoid costs exact, so tie handling is checked too.
pub fn check_update_medoids(rng: &mut ChaCha8Rng, m: usize) -> Check {
    let mut w = vec![vec![0.0; m]; m];
    for i in 0..m {
        for j in (i + 1)..m {
            let v = rng.random_range(1..20) as f64;
            w[i][j] = v;
            w[j][i] = v;
        }
    }
    let d = DissimilarityMatrix::from_fn(m, Measure::Custom, |i, j| w[i][j]).map_err(|e| e.to_string())?;
    let k = rng.random_range(1..=5);
    let assignments: Vec<usize> = (0..m).map(|_| rng.random_range(0..k)).collect();
    let got = cluster::update_medoids(&d, &assignments, k);
    let want = oracles::medoids(&d, &assignments, k);
    if got != want {
        return Err(format!("medoids {got:?} vs {want:?}"));
    }
    Ok(())
}

pub fn check_pairwise(rng: &mut ChaCha8Rng, m: usize) -> Check {
    let kp = rng.random_range(1..=5);
    let kt = rng.random_range(1..=5);
    let pred: Vec<usize> = (0..m).map(|_| rng.random_range(0..kp)).collect();
    let truth: Vec<usize> = (0..m).map(|_| rng.random_range(0..kt)).collect();
    let got = eval::pairwise_association(&pred, &truth).map_err(|e| e.to_string())?;
    let want = oracles::pair_rates(&pred, &truth);
    if got != want {
        return Err(format!("pair rates {got:?} vs {want:?}"));
    }
    let re = eval::error_rate(&pred, &truth).map_err(|e| e.to_string())?;
    if !close(re, oracles::error_rate(&pred, &truth), 1e-12) {
        return Err("error rate mismatch".into());
    }
    Ok(())
}

/// Runs each comparison on `instances` random inputs with at most 60 points.
pub fn oracle_suite(instances: usize, seed: u64) -> Vec<(&'static str, Check)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut results: Vec<(&'static str, Check)> = vec![
        ("squared_euclidean", Ok(())),
        ("local_density", Ok(())),
        ("local_distinctiveness_index", Ok(())),
        ("cfsfdp_baseline", Ok(())),
        ("manifold_distance", Ok(())),
        ("update_medoids", Ok(())),
        ("pairwise_association", Ok(())),
    ];
    let mut record = |slot: usize, check: Check| {
        if results[slot].1.is_ok() {
            results[slot].1 = check;
        }
    };
    for _ in 0..instances {
        let m = rng.random_range(3..=60);
        let p = rng.random_range(1..=3);
        let data = random_points(&mut rng, m, p);
        record(0, check_squared_euclidean(&data));

        let d = if rng.random_bool(0.5) {
            dissim::squared_euclidean(&data).unwrap()
        } else {
            dissim::euclidean(&data).unwrap()
        };
        let h = rng.random_range(0.02..0.2) * d.max();
        let r = rng.random_range(0.05..0.5) * d.max();
        record(1, check_local_density(&d, h));
        record(2, check_ldi(&d, h, r));
        record(3, check_cfsfdp(&d, rng.random_range(0.05..0.5) * d.max()));
        let t = rng.random_range(1..m.min(6));
        record(4, check_manifold(&data, t));
        record(5, check_update_medoids(&mut rng, m));
        record(6, check_pairwise(&mut rng, m));
    }
    results
}

/// Objective traces of random k-means and k-medoids runs, split evenly.
pub fn monotone_suite(runs: usize, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for run in 0..runs {
        let m = rng.random_range(5..=80);
        let p = rng.random_range(1..=3);
        let data = random_points(&mut rng, m, p);
        let k = rng.random_range(1..=m.min(8));
        let s = rng.random();
        let model = if run % 2 == 0 {
            let seeding = if rng.random_bool(0.5) {
                Seeding::Random(s)
            } else {
                Seeding::KMeansPlusPlus(s)
            };
            cluster::kmeans(&data, k, &ClusterConfig::default().with_seeding(seeding))
        } else {
            let d = if rng.random_bool(0.5) {
                dissim::squared_euclidean(&data).unwrap()
            } else {
                dissim::euclidean(&data).unwrap()
            };
            cluster::kmedoids(&d, k, &ClusterConfig::default().with_seeding(Seeding::Random(s)))
        }
        .map_err(|e| e.to_string())?;
        for (step, w) in model.objective_trace.windows(2).enumerate() {
            if w[1] > w[0] {
                return Err(format!(
                    "run {run}: objective rose from {} to {} at step {}",
                    w[0],
                    w[1],
                    step + 1
                ));
            }
        }
    }
    Ok(())
}
