//! Radial finite-difference solvers for ground and sign-changing states of
//! Kirchhoff and Choquard equations, with Nehari projections and checks of
//! the identities and energy inequalities that organize them.

pub mod app;
pub mod choquard;
pub mod config;
pub mod dd;
pub mod error;
pub mod grid;
pub mod kirchhoff;
pub mod nehari;
pub mod nonlinearity;
pub mod potential;
pub mod refine;
pub mod report;
pub mod roots;
pub mod solver;
pub mod suites;

pub use error::{Error, Result};
pub use grid::{GridFunction, RadialGrid};
