//! Deterministic initialization for k-means and k-medoids by local density
//! peak search.
//!
//! The crate estimates the number of clusters, picks seeds and flags
//! outliers from two per-point measures: a kernel density and a local
//! distinctiveness index. It also carries the usual baselines (random and
//! k-means++ restarts, cutoff-density peaks), synthetic benchmark
//! generators and the evaluation metrics used to compare them.
//!
//! ```
//! use ldps::{cluster, data, LdpsParams};
//!
//! let set = data::gen_gaussian_clusters(3, 50, 0.0005, 2, 7, 0.4).unwrap();
//! let run = cluster::ldps_means(
//!     &set.dataset.data,
//!     None,
//!     &LdpsParams::default().with_theta(0.05, 0.2),
//!     cluster::SearchMetric::Euclidean,
//!     &cluster::ClusterConfig::default(),
//! )
//! .unwrap();
//! assert_eq!(run.model.k, 3);
//! ```

pub mod cluster;
pub mod data;
pub mod dissim;
pub mod error;
pub mod eval;
pub mod peaks;
pub mod types;

pub use error::{Error, Result};
pub use types::{
    stable_sort_descending, Centers, ClusterModel, DataMatrix, DensityExponent, DissimilarityMatrix, LdpsParams,
    Measure,
};
