//! Groups built by HNN extensions and amalgamated free products, their word
//! problems, and finite balls of the relative Cayley graph, the left coset
//! graph, the coned-off Cayley graph and the Bass–Serre tree, together with
//! exact desk-scale checks of hyperbolicity, quasi-isometry and linear
//! isoperimetric bounds.
//!
//! All metric quantities are integers (edge lengths carry a global scale
//! factor) and all derived constants are exact rationals.

pub mod cli;
pub mod complexes;
pub mod error;
pub mod groups;
pub mod hyperbolicity;
pub mod isoperimetry;
pub mod qi;
pub mod stallings;
pub mod words;

pub use error::{Error, Result};

/// Exact rational used for δ, λ, c, ε and isoperimetric ratios.
pub type Rational = num_rational::Ratio<i64>;

/// Default vertex budget for ball construction.
pub const DEFAULT_BUDGET: usize = 200_000;

/// Vertex budget, honouring `RELHYP_BUDGET` when set.
pub fn budget_from_env() -> usize {
    std::env::var("RELHYP_BUDGET")
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or(DEFAULT_BUDGET)
}
