//! Shared domain types and the deterministic sort used for score ranking.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `m` points in `p` dimensions, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    values: Vec<f64>,
    rows: usize,
    cols: usize,
}

impl DataMatrix {
    pub fn new(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::EmptyInput);
        }
        if values.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                got: values.len(),
            });
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteData {
                row: pos / cols,
                col: pos % cols,
            });
        }
        Ok(Self { values, rows, cols })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let first = rows.first().ok_or(Error::EmptyInput)?;
        let cols = first.len();
        let mut values = Vec::with_capacity(rows.len() * cols);
        for row in rows {
            if row.len() != cols {
                return Err(Error::DimensionMismatch {
                    expected: cols,
                    got: row.len(),
                });
            }
            values.extend_from_slice(row);
        }
        Self::new(rows.len(), cols, values)
    }

    /// Number of points.
    pub fn len(&self) -> usize {
        self.rows
    }

    pub fn is_empty(&self) -> bool {
        self.rows == 0
    }

    /// Number of attributes.
    pub fn dim(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.cols..(i + 1) * self.cols]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.cols)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    /// New matrix holding the listed rows, in the given order.
    pub fn select_rows(&self, indices: &[usize]) -> Result<Self> {
        let mut values = Vec::with_capacity(indices.len() * self.cols);
        for &i in indices {
            values.extend_from_slice(self.row(i));
        }
        Self::new(indices.len(), self.cols, values)
    }
}

/// Squared Euclidean distance between two equal-length vectors.
pub fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Which construction produced a dissimilarity matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Measure {
    SquaredEuclidean,
    Euclidean,
    ManifoldGraph { t: usize },
    /// Supplied by the caller.
    Custom,
}

/// Symmetric, nonnegative `m x m` dissimilarities with a zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct DissimilarityMatrix {
    values: Vec<f64>,
    n: usize,
    measure: Measure,
    max: f64,
}

impl DissimilarityMatrix {
    /// Builds and validates a matrix from row-major values.
    pub fn new(n: usize, values: Vec<f64>, measure: Measure) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyInput);
        }
        if values.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                got: values.len(),
            });
        }
        let max = values.iter().copied().fold(0.0_f64, f64::max);
        let d = Self {
            values,
            n,
            measure,
            max,
        };
        d.validate()?;
        Ok(d)
    }

    /// Builds from a symmetric function evaluated on the upper triangle.
    pub fn from_fn(n: usize, measure: Measure, f: impl Fn(usize, usize) -> f64) -> Result<Self> {
        let mut values = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let v = f(i, j);
                values[i * n + j] = v;
                values[j * n + i] = v;
            }
        }
        Self::new(n, values, measure)
    }

    /// Checks every structural invariant.
    pub fn validate(&self) -> Result<()> {
        let n = self.n;
        let mut max = 0.0_f64;
        for i in 0..n {
            if self.values[i * n + i] != 0.0 {
                return Err(Error::InvalidDissimilarity(format!("d[{i}][{i}] is nonzero")));
            }
            for j in 0..n {
                let v = self.values[i * n + j];
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::InvalidDissimilarity(format!(
                        "d[{i}][{j}] = {v} is negative or non-finite"
                    )));
                }
                if v != self.values[j * n + i] {
                    return Err(Error::InvalidDissimilarity(format!("d[{i}][{j}] != d[{j}][{i}]")));
                }
                max = max.max(v);
            }
        }
        if max != self.max {
            return Err(Error::InvalidDissimilarity("recorded maximum is stale".into()));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n..(i + 1) * self.n]
    }

    /// Largest entry, `d*`.
    pub fn max(&self) -> f64 {
        self.max
    }

    pub fn measure(&self) -> Measure {
        self.measure
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    /// Restriction to the listed points (rows and columns), in the given order.
    pub fn submatrix(&self, keep: &[usize]) -> Result<Self> {
        let k = keep.len();
        let mut values = Vec::with_capacity(k * k);
        for &i in keep {
            let row = self.row(i);
            values.extend(keep.iter().map(|&j| row[j]));
        }
        Self::new(k, values, self.measure)
    }
}

/// Scaling applied to densities before scoring.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DensityExponent {
    /// `rho / max rho`.
    Linear,
    /// `(rho / max rho)^(1/4)`, flattens the density spread when k is large.
    Quarter,
}

impl DensityExponent {
    pub fn value(self) -> f64 {
        match self {
            DensityExponent::Linear => 1.0,
            DensityExponent::Quarter => 0.25,
        }
    }

    pub fn from_value(v: f64) -> Result<Self> {
        if v == 1.0 {
            Ok(DensityExponent::Linear)
        } else if v == 0.25 {
            Ok(DensityExponent::Quarter)
        } else {
            Err(Error::InvalidParameter(format!(
                "density exponent must be 1 or 0.25, got {v}"
            )))
        }
    }
}

/// Parameters of the peak search, with bandwidth and radius expressed as
/// fractions of the largest dissimilarity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LdpsParams {
    pub h_bar: f64,
    pub r_bar: f64,
    pub density_exponent: DensityExponent,
    /// Minimum acceptable gap at the chosen k; smaller gaps mean estimation failed.
    pub tau_min: f64,
    /// Points whose outlier score exceeds this are removed before clustering.
    pub outlier_threshold: f64,
}

impl Default for LdpsParams {
    fn default() -> Self {
        Self {
            h_bar: 0.02,
            r_bar: 0.1,
            density_exponent: DensityExponent::Linear,
            tau_min: 0.1,
            outlier_threshold: 0.95,
        }
    }
}

impl LdpsParams {
    pub fn with_theta(self, h_bar: f64, r_bar: f64) -> Self {
        Self {
            h_bar,
            r_bar,
            ..self
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.h_bar > 0.0 && self.h_bar.is_finite()) {
            return Err(Error::InvalidBandwidth(self.h_bar));
        }
        if !(self.r_bar > 0.0 && self.r_bar.is_finite()) {
            return Err(Error::InvalidRadius(self.r_bar));
        }
        if !(0.0..=1.0).contains(&self.outlier_threshold) {
            return Err(Error::InvalidParameter(format!(
                "outlier threshold must lie in [0, 1], got {}",
                self.outlier_threshold
            )));
        }
        if !self.tau_min.is_finite() {
            return Err(Error::InvalidParameter("tau_min must be finite".into()));
        }
        Ok(())
    }

    /// Absolute bandwidth for a matrix with largest entry `d_star`.
    pub fn bandwidth(&self, d_star: f64) -> f64 {
        self.h_bar * d_star
    }

    /// Absolute neighborhood radius for a matrix with largest entry `d_star`.
    pub fn radius(&self, d_star: f64) -> f64 {
        self.r_bar * d_star
    }
}

/// How cluster centers are represented.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Centers {
    Coordinates(Vec<Vec<f64>>),
    Medoids(Vec<usize>),
}

/// Result of a k-means or k-medoids run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterModel {
    pub k: usize,
    pub centers: Centers,
    pub assignments: Vec<usize>,
    /// Final objective: SSE for k-means, total dissimilarity to medoids for k-medoids.
    pub sse: f64,
    /// Number of assignment steps performed.
    pub iterations: usize,
    /// Objective after every assignment step.
    pub objective_trace: Vec<f64>,
}

impl ClusterModel {
    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &a in &self.assignments {
            sizes[a] += 1;
        }
        sizes
    }
}

/// Sorts descending; ties keep ascending original index.
pub fn stable_sort_descending(values: &[f64]) -> Result<(Vec<f64>, Vec<usize>)> {
    if values.is_empty() {
        return Err(Error::EmptyInput);
    }
    if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFiniteData { row: pos, col: 0 });
    }
    let mut order: Vec<usize> = (0..values.len()).collect();
    // `sort_by` is stable, so equal values retain index order.
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    let sorted = order.iter().map(|&i| values[i]).collect();
    Ok((sorted, order))
}
