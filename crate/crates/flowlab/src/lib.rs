//! Perturbative flow-equation laboratory for massive φ⁴ in four dimensions.

pub mod constants;
pub mod error;
pub mod model;
pub mod tree;

pub use error::{Error, Result};
pub mod numerics;
pub mod ode;
pub mod quadrature;
pub mod oracle;
pub mod interp;
pub mod flow_solver;
pub mod cert;
pub mod bounds;
pub mod lemmas;
pub mod chain;
pub mod config;
pub mod report;
pub mod cli;
