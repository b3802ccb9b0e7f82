//! Extensive-form LCL games: explicit truncated trees, structural checks,
//! payoffs, metrics, best responses and perturbed equilibria.

pub mod build;
pub mod eval;
pub mod markov;
pub mod metric;
pub mod profile;
pub mod response;
pub mod search;
pub mod structure;
pub mod tree;

use thiserror::Error;

use crate::lang::LangError;
use crate::pref::PrefError;

pub use build::{build_lcl_game, GameParams, LclGame, DEFAULT_NODE_BUDGET};
pub use eval::{expected_payoff, realization_all, realization_probability, PayoffReport};
pub use markov::{MarkovProfile, MarkovResponse, MarkovStrategy, RoundModel};
pub use metric::{outcome_metric, strategy_metric_approx, MetricValue};
pub use profile::{induce_to_full, BehaviorProfile, PerturbationSpec};
pub use response::{best_response, equilibrium_gap, BestResponse, GapReport};
pub use search::{perturbed_equilibrium_search, SearchMethod, SearchOutcome};
pub use structure::{check_perfect_recall, check_round_coherence, check_well_rounded};
pub use tree::{GameTree, InfoSet, NodeId, NodeKind, TreeBuilder, TreeError};

#[derive(Debug, Error)]
pub enum GameError {
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Lang(#[from] LangError),
    #[error(transparent)]
    Pref(PrefError),
    #[error("discount must lie in (0, 1), got {0}")]
    BadDelta(f64),
    #[error("no graphs given")]
    NoGraphs,
    #[error("all graphs of a distribution need the same vertex count")]
    PlayerCountMismatch,
    #[error("perturbation floors must be non-negative and sum below 1 (sum {0})")]
    Perturbation(f64),
    #[error("profile does not fit the game at `{key}`")]
    ProfileShape { key: String },
    #[error("profile falls below a perturbation floor at `{key}`")]
    BelowFloor { key: String },
    #[error("perfect recall fails for player {}", .0.player)]
    PerfectRecall(Box<structure::RecallViolation>),
    #[error("player {0} does not see the whole graph; round-merged best responses need full observability")]
    NotFullyObservable(usize),
    #[error("more than {0} pure strategies")]
    TooManyStrategies(usize),
    #[error("search: {0}")]
    BadSearch(String),
}
