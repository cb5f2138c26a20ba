use thiserror::Error;

use crate::grid::TorusGrid;

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("grid mismatch: {0:?} vs {1:?}")]
    GridMismatch(TorusGrid, TorusGrid),
    #[error("metric is not positive definite at point ({i}, {j})")]
    NotSpd { i: usize, j: usize },
    #[error("incompatible inputs: {0}")]
    Incompatible(String),
    #[error("metric is not conformally flat")]
    NotConformallyFlat,
    #[error("solver did not converge: {0}")]
    NoConvergence(String),
    #[error("operator gap ratio {gap:.3e} above threshold {threshold:.3e}; spectrum {spectrum:?}")]
    SmallGap { gap: f64, threshold: f64, spectrum: Box<crate::solvers::SpectrumReport> },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
