//! Synthetic chart corpus generation, training-set assembly and chart QA
//! benchmarking.
//!
//! The pipeline runs as a chain of stages, each reading the manifests of its
//! prerequisites and writing its own (see [`manifest::Stage`]):
//! templates, then data and code, composition, sandboxed rendering,
//! filtering, and finally training-set assembly and benchmark construction.

pub mod bench;
pub mod canonical;
pub mod compose;
pub mod config;
pub mod dualpath;
pub mod error;
pub mod filter;
pub mod forge;
pub mod manifest;
pub mod model;
pub mod pipeline;
pub mod raster;
pub mod registry;
pub mod render;
pub mod sandbox;
pub mod table;

pub use error::{Error, Result};
