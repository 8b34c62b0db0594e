//! Curve dissimilarity toolkit centered on the k-largest dynamic time warping
//! distance (k-DTW): the sum of the k largest vertex distances matched by the
//! best traversal of two polygonal curves. k-DTW interpolates between the
//! discrete Frechet distance (k = 1) and plain DTW (k large), keeps a
//! k-relaxed triangle inequality, and tolerates up to `floor((k+1)/2) - 1`
//! corrupted vertices before its top-k median estimator breaks down.
//!
//! The crate provides:
//!
//! * exact k-DTW by parametric search with two pruning heuristics, plus a
//!   (1+epsilon)-approximation ([`kdtw`]);
//! * the classical measures it is compared against: DTW_q, discrete and weak
//!   discrete Frechet, ERP, windowed and segmented DTW ([`measures`]);
//! * exhaustive small-instance oracles for all of the above ([`traversal`]);
//! * the top-k geometric median with a breakdown-point experiment
//!   ([`median`]);
//! * agglomerative clustering, l-NN cross-validation and k-tuning pipelines
//!   ([`hac`], [`knn`]);
//! * synthetic curve families and adversarial fixtures ([`synth`]);
//! * dataset and matrix file formats ([`dataset`]).
//!
//! Pairwise computations run on rayon when the default `parallel` feature is
//! enabled and fall back to sequential loops without it; outputs are
//! identical either way.

pub mod dataset;
pub mod error;
pub mod geometry;
pub mod hac;
pub mod kdtw;
pub mod knn;
pub mod measures;
pub mod median;
pub mod pairwise;
pub mod parallel;
pub mod seeded;
pub mod synth;
pub mod traversal;

pub use dataset::{LabeledDataset, DatasetItem};
pub use error::{Error, Result};
pub use geometry::{distance_matrix, euclidean, Curve, DistanceMatrix, Point};
pub use kdtw::{kdtw, kdtw_approx, kdtw_exact, Heuristics, KdtwMode, KdtwResult};
pub use measures::{
    discrete_frechet, dtw_q, erp, segment_dtw, weak_discrete_frechet, window_dtw, DistanceResult,
};
pub use pairwise::{pairwise_matrix, pairwise_matrix_seq, Measure};
pub use traversal::{
    enumerate_traversals, oracle_dtw_q, oracle_frechet, oracle_kdtw, topk_cost, TopKProfile,
    Traversal,
};
