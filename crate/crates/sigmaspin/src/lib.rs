//! Discrete two-dimensional nonlinear sigma model with gravitino on flat
//! tori, together with the machinery to check its symmetries and
//! conservation laws numerically.

pub mod action;
pub mod clifford;
pub mod config;
pub mod error;
pub mod fields;
pub mod geometry;
pub mod grid;
pub mod noether;
pub mod report;
pub mod runner;
pub mod solvers;
pub mod spin;
pub mod state;
pub mod suites;
pub mod symmetries;
pub mod trig;

pub use error::{Error, Result};
pub use geometry::{MetricField, Sym2Field, VectorField};
pub use grid::TorusGrid;
