//! Shapley decompositions of arbitrary cooperative games.
//!
//! The Shapley value of player `v` averages its marginal contribution
//! `C(S ∪ {v}) − C(S)` first over all teams `S` of a fixed size `k` that
//! exclude `v`, then uniformly over `k = 0..d−1`. Three engines are provided:
//!
//! * [`exact_shapley`] enumerates all `2^d` coalitions (memoized, capped at
//!   [`DEFAULT_EXACT_LIMIT`] players unless overridden);
//! * [`monte_carlo_shapley`] averages marginal contributions along uniformly
//!   sampled permutations;
//! * [`block_shapley`] runs the exact engine inside each block of a partition
//!   of players into mutually independent groups.

mod block;
mod exact;
mod game;
mod monte_carlo;

use serde::{Deserialize, Serialize};

pub use block::{block_shapley, BlockPartition};
pub use exact::{
    exact_shapley, exact_shapley_with_limit, marginal_contribution_mean, shapley_from_table,
    DEFAULT_EXACT_LIMIT,
};
pub use game::{AdditiveGame, Game, MemoGame, TableGame};
pub use monte_carlo::{monte_carlo_shapley, PERMUTATION_CHUNK};

use crate::dependence::CharacteristicSpec;

/// What the characteristic function's target was.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TargetKind {
    Labels,
    Predictions,
    Residuals,
    Custom,
}

/// Which engine produced a decomposition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Method {
    Exact,
    MonteCarlo { permutations: usize, seed: u64 },
    Block { blocks: Vec<Vec<usize>> },
}

/// Per-player attributions plus bookkeeping about how they were obtained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapleyDecomposition {
    pub values: Vec<f64>,
    /// Monte Carlo standard errors, when at least two permutations were drawn.
    pub std_errors: Option<Vec<f64>>,
    pub method: Method,
    /// Distinct nonempty coalitions evaluated.
    pub evaluations_used: usize,
    /// Marginal-contribution terms `C(S ∪ {v}) − C(S)` the estimate is built
    /// from (for exact engines: `Σ_blocks |b| · 2^{|b|−1}`).
    pub marginal_contributions: usize,
    pub measure: Option<CharacteristicSpec>,
    pub target_kind: TargetKind,
}

impl ShapleyDecomposition {
    pub(crate) fn new(
        values: Vec<f64>,
        method: Method,
        evaluations_used: usize,
        marginal_contributions: usize,
    ) -> Self {
        Self {
            values,
            std_errors: None,
            method,
            evaluations_used,
            marginal_contributions,
            measure: None,
            target_kind: TargetKind::Custom,
        }
    }

    pub fn players(&self) -> usize {
        self.values.len()
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }
}
