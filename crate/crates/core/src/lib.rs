//! Supervised dimensionality reduction (linear and kernel discriminant
//! analysis) with an ingest → reduce → classify → evaluate pipeline for
//! multiclass network-attack data.

pub mod classifiers;
pub mod container;
pub mod dataset;
pub mod eigencore;
pub mod error;
pub mod gda;
pub mod lda;
pub mod metrics;
pub mod pipeline;

pub use error::{Error, ErrorKind, Result};
