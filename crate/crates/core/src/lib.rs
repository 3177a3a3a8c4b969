//! Two-level machine-learning warm starts for QAOA on graph MaxCut.
//!
//! The toolkit simulates parametric QAOA circuits exactly, finds optimal
//! parameters with instrumented bounded optimizers, learns depth-1 to
//! depth-p parameter correlations with regression models, and measures the
//! reduction in optimizer loop iterations versus random initialization.

pub mod bench;
pub mod dataset;
pub mod error;
pub mod graph;
pub mod optim;
pub mod regress;
pub mod sim;

pub use error::{Error, Result};
