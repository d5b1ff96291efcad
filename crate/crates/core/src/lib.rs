//! Arithmetic in `F_q[t]` and exact and asymptotic checks of divisor-function
//! correlations over function fields.

pub mod combinatorics;
pub mod conjecture;
pub mod enumerate;
pub mod error;
pub mod factor;
pub mod gf;
pub mod harness;
pub mod identities;
pub mod poly;
pub mod stats;

pub use error::{Error, Result};
