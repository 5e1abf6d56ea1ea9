//! Brute-force reference implementations. Each one follows the textbook
//! definition directly and shares no code with the library beyond plain
//! data access.

#![allow(dead_code)]

use ldps::{DataMatrix, DissimilarityMatrix};

pub fn squared_euclidean(data: &DataMatrix) -> Vec<Vec<f64>> {
    let m = data.len();
    let mut d = vec![vec![0.0; m]; m];
    for i in 0..m {
        for j in 0..m {
            let mut s = 0.0;
            for a in 0..data.dim() {
                let diff = data.row(i)[a] - data.row(j)[a];
                s += diff * diff;
            }
            d[i][j] = s;
        }
    }
    d
}

/// Floyd-Warshall over an explicit weight list.
pub fn all_pairs_shortest(n: usize, edges: &[(usize, usize, f64)]) -> Vec<Vec<f64>> {
    let mut d = vec![vec![f64::INFINITY; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 0.0;
    }
    for &(a, b, w) in edges {
        if w < d[a][b] {
            d[a][b] = w;
            d[b][a] = w;
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = d[i][k] + d[k][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    d
}

pub fn kde(d: &DissimilarityMatrix, h: f64) -> Vec<f64> {
    let m = d.len();
    (0..m)
        .map(|i| {
            let mut s = 0.0;
            for j in 0..m {
                let z = d.get(i, j) / h;
                s += (-(z * z) / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt();
            }
            s / (m as f64 * h)
        })
        .collect()
}

pub fn ldi(d: &DissimilarityMatrix, rho: &[f64], r: f64) -> Vec<f64> {
    let m = d.len();
    (0..m)
        .map(|i| {
            let mut best: Option<f64> = None;
            for j in 0..m {
                let dij = d.get(i, j);
                if dij > 0.0 && dij <= r && rho[j] > rho[i] {
                    best = Some(best.map_or(dij, |b: f64| b.min(dij)));
                }
            }
            best.map_or(1.0, |b| b / r)
        })
        .collect()
}

/// Distance to the nearest strictly denser point anywhere; max row entry if none.
pub fn gdi(d: &DissimilarityMatrix, rho: &[f64]) -> Vec<f64> {
    let m = d.len();
    (0..m)
        .map(|i| {
            let mut best: Option<f64> = None;
            let mut far = 0.0_f64;
            for j in 0..m {
                far = far.max(d.get(i, j));
                if rho[j] > rho[i] {
                    best = Some(best.map_or(d.get(i, j), |b: f64| b.min(d.get(i, j))));
                }
            }
            best.unwrap_or(far)
        })
        .collect()
}

pub fn cutoff_density(d: &DissimilarityMatrix, dc: f64) -> Vec<usize> {
    let m = d.len();
    let mut out = vec![0; m];
    for (i, slot) in out.iter_mut().enumerate() {
        for j in 0..m {
            if i != j && d.get(i, j) - dc < 0.0 {
                *slot += 1;
            }
        }
    }
    out
}

/// Medoid per cluster by scanning members in descending index order and
/// keeping the last minimum, arriving at the same tie rule from the other side.
pub fn medoids(d: &DissimilarityMatrix, assignments: &[usize], k: usize) -> Vec<Option<usize>> {
    (0..k)
        .map(|c| {
            let members: Vec<usize> = (0..assignments.len()).filter(|&i| assignments[i] == c).collect();
            let mut best: Option<(usize, f64)> = None;
            for &cand in members.iter().rev() {
                let cost: f64 = members.iter().map(|&l| d.get(l, cand)).sum();
                match best {
                    Some((_, b)) if cost > b => {}
                    _ => best = Some((cand, cost)),
                }
            }
            best.map(|b| b.0)
        })
        .collect()
}

/// `(r_t, r_f)` by enumerating every pair.
pub fn pair_rates(pred: &[usize], truth: &[usize]) -> (f64, f64) {
    let m = pred.len();
    let (mut same_t, mut same_t_same_p, mut diff_t, mut diff_t_same_p) = (0u64, 0u64, 0u64, 0u64);
    for i in 0..m {
        for j in (i + 1)..m {
            if truth[i] == truth[j] {
                same_t += 1;
                if pred[i] == pred[j] {
                    same_t_same_p += 1;
                }
            } else {
                diff_t += 1;
                if pred[i] == pred[j] {
                    diff_t_same_p += 1;
                }
            }
        }
    }
    let rt = if same_t == 0 { 1.0 } else { same_t_same_p as f64 / same_t as f64 };
    let rf = if diff_t == 0 { 0.0 } else { diff_t_same_p as f64 / diff_t as f64 };
    (rt, rf)
}

/// Error rate by trying every per-cluster category and keeping the best.
pub fn error_rate(pred: &[usize], truth: &[usize]) -> f64 {
    let k = pred.iter().max().unwrap() + 1;
    let t = truth.iter().max().unwrap() + 1;
    let mut correct = 0;
    for c in 0..k {
        let mut best = 0;
        for cat in 0..t {
            let n = (0..pred.len()).filter(|&i| pred[i] == c && truth[i] == cat).count();
            best = best.max(n);
        }
        correct += best;
    }
    1.0 - correct as f64 / pred.len() as f64
}

pub fn nearest_center(data: &DataMatrix, centers: &[Vec<f64>]) -> Vec<usize> {
    (0..data.len())
        .map(|i| {
            let mut best = 0;
            let mut bd = f64::INFINITY;
            for (c, center) in centers.iter().enumerate() {
                let mut s = 0.0;
                for a in 0..data.dim() {
                    s += (data.row(i)[a] - center[a]).powi(2);
                }
                if s < bd {
                    bd = s;
                    best = c;
                }
            }
            best
        })
        .collect()
}

/// Exact `C(n, k) / m0^k` with integer binomials (small inputs only).
pub fn exact_expected_repeats(m0: u64, k: u64) -> f64 {
    let n = m0 * k;
    let mut c: u128 = 1;
    for i in 0..k {
        c = c * (n - i) as u128 / (i + 1) as u128;
    }
    c as f64 / (m0 as f64).powi(k as i32)
}
