//! Clustering of the reduced table: k-means with elbow diagnostics and
//! Gaussian mixtures chosen by BIC.

mod gmm;
mod kmeans;

pub use gmm::{
    bic, gmm_em, gmm_em_rows, n_params, select_gmm, BicEntry, CovarianceType, GmmResult,
    GmmSelection, DEFAULT_GMM_MAX_ITER, DEFAULT_GMM_TOL, DEFAULT_K_MAX, RIDGE,
};
pub(crate) use kmeans::centroids_of;
pub use kmeans::{elbow_curve, kmeans, kmeans_rows, ElbowPoint, KMeansResult};

pub const DEFAULT_RESTARTS: usize = 10;
pub const DEFAULT_MAX_ITER: usize = 300;
