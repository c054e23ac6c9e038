//! Variable discovery through dependency networks.
//!
//! Every variable of a numeric table is regressed on all the others; the
//! predictors each regression keeps become directed edges of a dependency
//! network. Ranking the network's nodes by a centrality measure yields the
//! Top-n variables, which can then be clustered and evaluated.
//!
//! - [`ingest`]: CSV loading, cleaning, standardization, return series
//! - [`linmod`]: OLS with inference and the four selection procedures
//! - [`depnet`]: parallel network construction
//! - [`centrality`]: nine node-ranking measures and Top-n selection
//! - [`cluster`]: k-means with elbow curves, Gaussian mixtures with BIC
//! - [`metrics`]: Davies-Bouldin, adjusted Rand, PCA projection
//! - [`pipeline`]: the end-to-end run and its JSON report

pub mod centrality;
pub mod cluster;
pub mod depnet;
pub mod error;
pub mod ingest;
pub mod linalg;
pub mod linmod;
pub mod metrics;
pub mod pipeline;

pub use error::{Error, Result};
