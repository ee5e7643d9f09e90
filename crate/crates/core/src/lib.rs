//! Non-conforming finite element computation of Helmholtz transmission
//! eigenvalues with the Adini and Morley-Zienkiewicz plate elements.

#![allow(clippy::needless_range_loop)]

pub mod assembly;
pub mod eigensolver;
pub mod elements;
pub mod error;
pub mod experiments;
pub mod mesh;
pub mod quadrature;
pub mod refraction;
pub mod sparse;

pub use error::{Error, Result};

/// How data-parallel loops run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// Rayon thread pool; same as `Sequential` without the `parallel` feature.
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

impl Execution {
    /// `(0..n).map(f)` collected in index order.
    pub fn map<R, F>(self, n: usize, f: F) -> Vec<R>
    where
        R: Send,
        F: Fn(usize) -> R + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Execution::Parallel => {
                use rayon::prelude::*;
                (0..n).into_par_iter().map(f).collect()
            }
            _ => (0..n).map(f).collect(),
        }
    }
}
