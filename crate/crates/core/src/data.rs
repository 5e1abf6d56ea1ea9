//! Synthetic benchmark sets with ground truth, and the whitespace-delimited
//! point file format.
//!
//! A point file holds one point per line: ASCII floats separated by
//! whitespace with an optional trailing integer label. Lines starting with
//! `#` are comments.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{squared_distance, DataMatrix};

/// Attempts allowed when placing one center before giving up.
pub const MAX_CENTER_ATTEMPTS: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GeneratorSpec {
    Gaussian {
        k: usize,
        m0: usize,
        sigma: f64,
        p: usize,
        min_sep: f64,
        seed: u64,
    },
    Rings {
        k: usize,
        m0: usize,
        radii: Vec<f64>,
        noise: f64,
        seed: u64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    pub data: DataMatrix,
    pub labels: Option<Vec<usize>>,
    pub generator: Option<GeneratorSpec>,
}

impl LabeledDataset {
    pub fn num_labels(&self) -> Option<usize> {
        self.labels
            .as_ref()
            .map(|l| l.iter().copied().max().map_or(0, |v| v + 1))
    }
}

/// Result of a Gaussian cluster draw, including the true centers.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianClusters {
    pub dataset: LabeledDataset,
    pub centers: Vec<Vec<f64>>,
}

/// `k` isotropic Gaussian clusters with covariance `sigma * I_p`, `m0` points
/// each. Centers are uniform in `[0,1]^p`, placed one at a time with
/// rejection until every pairwise center distance is at least `min_sep`.
pub fn gen_gaussian_clusters(
    k: usize,
    m0: usize,
    sigma: f64,
    p: usize,
    seed: u64,
    min_sep: f64,
) -> Result<GaussianClusters> {
    if k == 0 || m0 == 0 || p == 0 {
        return Err(Error::InvalidParameter("k, m0 and p must be >= 1".into()));
    }
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidParameter(format!("sigma must be positive, got {sigma}")));
    }
    if !(min_sep >= 0.0 && min_sep.is_finite()) {
        return Err(Error::InvalidParameter(format!("min_sep must be >= 0, got {min_sep}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sep2 = min_sep * min_sep;
    let mut centers: Vec<Vec<f64>> = Vec::with_capacity(k);
    while centers.len() < k {
        let mut placed = false;
        for _ in 0..MAX_CENTER_ATTEMPTS {
            let c: Vec<f64> = (0..p).map(|_| rng.random::<f64>()).collect();
            if centers.iter().all(|o| squared_distance(o, &c) >= sep2) {
                centers.push(c);
                placed = true;
                break;
            }
        }
        if !placed {
            return Err(Error::CannotPlaceCenters {
                k,
                min_sep,
                attempts: MAX_CENTER_ATTEMPTS,
            });
        }
    }
    let sd = sigma.sqrt();
    let mut values = Vec::with_capacity(k * m0 * p);
    let mut labels = Vec::with_capacity(k * m0);
    for (label, c) in centers.iter().enumerate() {
        for _ in 0..m0 {
            for &mu in c {
                let z: f64 = StandardNormal.sample(&mut rng);
                values.push(mu + sd * z);
            }
            labels.push(label);
        }
    }
    Ok(GaussianClusters {
        dataset: LabeledDataset {
            data: DataMatrix::new(k * m0, p, values)?,
            labels: Some(labels),
            generator: Some(GeneratorSpec::Gaussian {
                k,
                m0,
                sigma,
                p,
                min_sep,
                seed,
            }),
        },
        centers,
    })
}

/// Concentric noisy rings around the origin, one label per ring. Angles are
/// uniform; each radius gets additive Gaussian noise with standard deviation `noise`.
pub fn gen_rings(k: usize, m0: usize, radii: &[f64], noise: f64, seed: u64) -> Result<LabeledDataset> {
    if k == 0 || m0 == 0 {
        return Err(Error::InvalidParameter("k and m0 must be >= 1".into()));
    }
    if radii.len() != k {
        return Err(Error::InvalidParameter(format!(
            "expected {k} radii, got {}",
            radii.len()
        )));
    }
    if radii.windows(2).any(|w| w[0] >= w[1]) || radii[0] <= 0.0 {
        return Err(Error::InvalidParameter("radii must be positive and strictly increasing".into()));
    }
    if !(noise >= 0.0 && noise.is_finite()) {
        return Err(Error::InvalidParameter(format!("noise must be >= 0, got {noise}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = Vec::with_capacity(2 * k * m0);
    let mut labels = Vec::with_capacity(k * m0);
    for (label, &radius) in radii.iter().enumerate() {
        for _ in 0..m0 {
            let angle = rng.random::<f64>() * 2.0 * PI;
            let z: f64 = StandardNormal.sample(&mut rng);
            let rr = radius + noise * z;
            values.push(rr * angle.cos());
            values.push(rr * angle.sin());
            labels.push(label);
        }
    }
    Ok(LabeledDataset {
        data: DataMatrix::new(k * m0, 2, values)?,
        labels: Some(labels),
        generator: Some(GeneratorSpec::Rings {
            k,
            m0,
            radii: radii.to_vec(),
            noise,
            seed,
        }),
    })
}

/// Named recipes for the standard synthetic sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// k=50, m0=100, p=2, sigma in {0.002, 0.004, 0.006, 0.008}.
    S(u8),
    /// k=50, m0=100, p in {3, 6, 9, 12} with sigma {0.001, 0.004, 0.007, 0.01}.
    Dim(u8),
    /// m0=150, sigma=0.002, k in {5, 20, 35, 50} for A0..A3.
    A(u8),
    /// Two concentric rings, radii 1 and 2.
    Rings,
}

/// Minimum center separation used by the Gaussian presets.
pub const PRESET_MIN_SEP: f64 = 0.1;

impl Preset {
    pub fn parse(name: &str) -> Option<Self> {
        let lower = name.to_ascii_lowercase();
        let preset = match lower.as_str() {
            "rings" => Preset::Rings,
            _ if lower.starts_with("dim") => Preset::Dim(lower[3..].parse().ok()?),
            _ if lower.starts_with('s') => Preset::S(lower[1..].parse().ok()?),
            _ if lower.starts_with('a') => Preset::A(lower[1..].parse().ok()?),
            _ => return None,
        };
        match preset {
            Preset::S(1..=4) | Preset::A(0..=3) | Preset::Rings => Some(preset),
            Preset::Dim(3 | 6 | 9 | 12) => Some(preset),
            _ => None,
        }
    }

    pub fn generate(self, seed: u64) -> Result<LabeledDataset> {
        match self {
            Preset::S(i) => {
                let sigma = [0.002, 0.004, 0.006, 0.008][i as usize - 1];
                Ok(gen_gaussian_clusters(50, 100, sigma, 2, seed, PRESET_MIN_SEP)?.dataset)
            }
            Preset::Dim(p) => {
                let sigma = match p {
                    3 => 0.001,
                    6 => 0.004,
                    9 => 0.007,
                    _ => 0.01,
                };
                Ok(gen_gaussian_clusters(50, 100, sigma, p as usize, seed, PRESET_MIN_SEP)?.dataset)
            }
            Preset::A(i) => {
                let k = [5, 20, 35, 50][i as usize];
                Ok(gen_gaussian_clusters(k, 150, 0.002, 2, seed, PRESET_MIN_SEP)?.dataset)
            }
            Preset::Rings => gen_rings(2, 200, &[1.0, 2.0], 0.05, seed),
        }
    }
}

fn is_integer_token(tok: &str) -> bool {
    let digits = tok.strip_prefix(['-', '+']).unwrap_or(tok);
    !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit())
}

/// How to treat the last column of a point file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LabelColumn {
    /// A label iff every row ends in an integer literal and rows have at least two columns.
    #[default]
    Auto,
    Absent,
    Present,
}

/// Parses point-file text.
pub fn parse_points(text: &str, labels: LabelColumn) -> Result<LabeledDataset> {
    let mut rows: Vec<(usize, Vec<&str>)> = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let toks: Vec<&str> = trimmed.split_whitespace().collect();
        if let Some((_, first)) = rows.first() {
            if first.len() != toks.len() {
                return Err(Error::MalformedFile {
                    line: n + 1,
                    reason: format!("expected {} columns, found {}", first.len(), toks.len()),
                });
            }
        }
        rows.push((n + 1, toks));
    }
    if rows.is_empty() {
        return Err(Error::EmptyInput);
    }
    let cols = rows[0].1.len();
    let has_labels = match labels {
        LabelColumn::Absent => false,
        LabelColumn::Present => true,
        LabelColumn::Auto => cols >= 2 && rows.iter().all(|(_, t)| is_integer_token(t[cols - 1])),
    };
    let p = if has_labels { cols - 1 } else { cols };
    if p == 0 {
        return Err(Error::MalformedFile {
            line: rows[0].0,
            reason: "no coordinate columns".into(),
        });
    }
    let mut values = Vec::with_capacity(rows.len() * p);
    let mut raw_labels = Vec::new();
    for (line, toks) in &rows {
        for tok in &toks[..p] {
            let v: f64 = tok.parse().map_err(|_| Error::ParseError {
                line: *line,
                token: tok.to_string(),
            })?;
            values.push(v);
        }
        if has_labels {
            let tok = toks[p];
            let v: i64 = tok.parse().map_err(|_| Error::ParseError {
                line: *line,
                token: tok.to_string(),
            })?;
            raw_labels.push(v);
        }
    }
    let labels = has_labels.then(|| reindex_labels(&raw_labels));
    Ok(LabeledDataset {
        data: DataMatrix::new(rows.len(), p, values)?,
        labels,
        generator: None,
    })
}

/// Maps arbitrary label values onto `0..n` in ascending value order.
pub fn reindex_labels(raw: &[i64]) -> Vec<usize> {
    let ids: BTreeMap<i64, usize> = {
        let mut distinct: Vec<i64> = raw.to_vec();
        distinct.sort_unstable();
        distinct.dedup();
        distinct.into_iter().enumerate().map(|(i, v)| (v, i)).collect()
    };
    raw.iter().map(|v| ids[v]).collect()
}

pub fn load_point_file(path: impl AsRef<Path>, labels: LabelColumn) -> Result<LabeledDataset> {
    let text = std::fs::read_to_string(path)?;
    parse_points(&text, labels)
}

/// Serializes a dataset in point-file form. Floats use the shortest
/// representation that parses back to the same value.
pub fn format_points(dataset: &LabeledDataset) -> String {
    let mut out = String::new();
    for (i, row) in dataset.data.rows().enumerate() {
        for (c, v) in row.iter().enumerate() {
            if c > 0 {
                out.push(' ');
            }
            // Debug keeps a decimal point or exponent, so coordinates never
            // read back as a label column.
            let _ = write!(out, "{v:?}");
        }
        if let Some(labels) = &dataset.labels {
            let _ = write!(out, " {}", labels[i]);
        }
        out.push('\n');
    }
    out
}

pub fn write_point_file(path: impl AsRef<Path>, dataset: &LabeledDataset) -> Result<()> {
    std::fs::write(path, format_points(dataset))?;
    Ok(())
}
