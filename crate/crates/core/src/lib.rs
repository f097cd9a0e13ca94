//! Anomaly detection with ensembles of encoder-decoder GANs.
//!
//! Several generators and discriminators are trained by sampling one
//! generator-discriminator pair per iteration; the anomaly score of a sample
//! is the mean of the per-pair scores. The crate also carries an exact
//! linear-programming check of the optimal 1-Lipschitz critic's closed form.

pub mod autodiff;
pub mod checkpoint;
pub mod config;
pub mod critic;
pub mod data;
pub mod error;
pub mod losses;
pub mod metrics;
pub mod model;
pub mod networks;
pub mod pipeline;
pub mod scoring;
pub mod trainer;

pub use error::{Error, Result};
