//! Node strategies: maps from observation histories to distributions over
//! the currently available actions.

use std::fmt;
use std::sync::Arc;

use rand::RngCore;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::BallShape;
use crate::lang::{LanguageKind, LclLanguage};
use crate::Action;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StrategyError {
    #[error("unknown strategy `{0}`")]
    Unknown(String),
    #[error("strategy `{name}` does not apply to language {lang}")]
    WrongLanguage { name: String, lang: String },
    #[error("biased weights must be finite, non-negative and have positive total")]
    BadWeights,
    #[error("expected {expected} weights, got {got}")]
    WeightCount { expected: usize, got: usize },
    #[error("bad strategy parameter in `{0}`")]
    BadParameter(String),
}

/// What a node saw at the start of one round within its ball: the last
/// value of every ball vertex and which of them have decided.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Snapshot {
    pub labels: Vec<Option<Action>>,
    pub decided: Vec<bool>,
}

/// Everything a node has observed so far. Snapshot `r` is taken at the
/// start of round `r`, so the first one is all ⊥.
#[derive(Clone, Debug)]
pub struct ObservationHistory {
    pub vertex: usize,
    pub shape: Arc<BallShape>,
    pub snapshots: Vec<Snapshot>,
}

impl ObservationHistory {
    pub fn new(vertex: usize, shape: Arc<BallShape>) -> Self {
        ObservationHistory {
            vertex,
            shape,
            snapshots: Vec::new(),
        }
    }

    pub fn round(&self) -> usize {
        self.snapshots.len().saturating_sub(1)
    }

    pub fn current(&self) -> Option<&Snapshot> {
        self.snapshots.last()
    }

    /// The node's own past values, oldest first.
    pub fn own_actions(&self) -> Vec<Option<Action>> {
        let c = self.shape.center_index;
        self.snapshots.iter().skip(1).map(|s| s.labels[c]).collect()
    }

    /// Neighbors that have not decided yet.
    pub fn undecided_neighbors(&self) -> usize {
        let Some(snap) = self.current() else {
            return 0;
        };
        self.shape
            .center_neighbors()
            .filter(|&i| !snap.decided[i])
            .count()
    }
}

/// Outcome of a draw: a value, or sitting the round out (⊥).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Choice {
    Abstain,
    Act(Action),
}

/// A distribution over `available` (aligned weights) plus abstention mass.
#[derive(Clone, Debug, PartialEq)]
pub struct Distribution {
    pub abstain: f64,
    pub weights: Vec<f64>,
}

impl Distribution {
    pub fn uniform(len: usize) -> Self {
        Distribution {
            abstain: 0.0,
            weights: vec![1.0 / len as f64; len],
        }
    }

    /// Normalizes `raw` over the available actions; falls back to uniform
    /// when the raw mass on them is zero.
    pub fn normalized(raw: Vec<f64>) -> Self {
        let total: f64 = raw.iter().sum();
        if total <= 0.0 {
            return Self::uniform(raw.len());
        }
        Distribution {
            abstain: 0.0,
            weights: raw.into_iter().map(|w| w / total).collect(),
        }
    }

    pub fn total(&self) -> f64 {
        self.abstain + self.weights.iter().sum::<f64>()
    }

    /// Inverse-CDF draw from a uniform `u` in `[0, 1)`.
    pub fn pick(&self, available: &[Action], u: f64) -> Choice {
        let mut acc = self.abstain;
        if u < acc {
            return Choice::Abstain;
        }
        for (i, w) in self.weights.iter().enumerate() {
            acc += w;
            if u < acc {
                return Choice::Act(available[i]);
            }
        }
        // rounding slack goes to the last positive entry
        match self.weights.iter().rposition(|&w| w > 0.0) {
            Some(i) => Choice::Act(available[i]),
            None => Choice::Abstain,
        }
    }
}

pub trait Strategy: Send + Sync + fmt::Debug {
    fn name(&self) -> String;

    fn distribution(&self, obs: &ObservationHistory, available: &[Action]) -> Distribution;

    fn sample(
        &self,
        obs: &ObservationHistory,
        available: &[Action],
        rng: &mut dyn RngCore,
    ) -> Choice {
        let u = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        self.distribution(obs, available).pick(available, u)
    }
}

pub type SharedStrategy = Arc<dyn Strategy>;

#[derive(Debug)]
pub struct Uniform;

impl Strategy for Uniform {
    fn name(&self) -> String {
        "uniform".into()
    }

    fn distribution(&self, _: &ObservationHistory, available: &[Action]) -> Distribution {
        Distribution::uniform(available.len())
    }
}

/// MIS proposal with probability `1/(2d)`, `d` the undecided neighbors.
#[derive(Debug)]
pub struct Luby {
    one: Action,
}

impl Strategy for Luby {
    fn name(&self) -> String {
        "luby".into()
    }

    fn distribution(&self, obs: &ObservationHistory, available: &[Action]) -> Distribution {
        let p = 1.0 / (2.0 * obs.undecided_neighbors().max(1) as f64);
        Distribution::normalized(
            available
                .iter()
                .map(|&a| if a == self.one { p } else { 1.0 - p })
                .collect(),
        )
    }
}

/// Fake color (abstain) with probability 1/2, each available color 1/(2k).
#[derive(Debug)]
pub struct BeColoring;

impl Strategy for BeColoring {
    fn name(&self) -> String {
        "be_coloring".into()
    }

    fn distribution(&self, _: &ObservationHistory, available: &[Action]) -> Distribution {
        let k = available.len() as f64;
        Distribution {
            abstain: 0.5,
            weights: vec![1.0 / (2.0 * k); available.len()],
        }
    }
}

/// Uniform reweighted by per-letter weights.
#[derive(Debug)]
pub struct Biased {
    weights: Vec<f64>,
}

impl Strategy for Biased {
    fn name(&self) -> String {
        let w: Vec<String> = self.weights.iter().map(|w| w.to_string()).collect();
        format!("biased:{}", w.join("/"))
    }

    fn distribution(&self, _: &ObservationHistory, available: &[Action]) -> Distribution {
        Distribution::normalized(
            available
                .iter()
                .map(|&a| self.weights[a as usize])
                .collect(),
        )
    }
}

/// Plays R for `l` rounds, then uniform over {G, B}.
#[derive(Debug)]
pub struct Stubborn {
    l: usize,
    red: Action,
}

impl Strategy for Stubborn {
    fn name(&self) -> String {
        format!("stubborn:{}", self.l)
    }

    fn distribution(&self, obs: &ObservationHistory, available: &[Action]) -> Distribution {
        let raw: Vec<f64> = if obs.round() < self.l {
            available.iter().map(|&a| f64::from(u8::from(a == self.red))).collect()
        } else {
            available.iter().map(|&a| f64::from(u8::from(a != self.red))).collect()
        };
        Distribution::normalized(raw)
    }
}

pub const STRATEGY_NAMES: &[&str] = &["uniform", "luby", "be_coloring", "biased:W1/W2/..", "stubborn:L"];

/// Parses `uniform`, `luby`, `be_coloring`, `biased:w1/w2/..` or `stubborn:l`.
pub fn builtin_strategy(spec: &str, lang: &LclLanguage) -> Result<SharedStrategy, StrategyError> {
    let spec = spec.trim();
    let (name, arg) = match spec.split_once(':') {
        Some((n, a)) => (n, Some(a)),
        None => (spec, None),
    };
    let wrong = || StrategyError::WrongLanguage {
        name: name.to_string(),
        lang: lang.to_string(),
    };
    match (name, arg) {
        ("uniform", None) => Ok(Arc::new(Uniform)),
        ("luby", None) => {
            if lang.kind() != LanguageKind::Mis {
                return Err(wrong());
            }
            Ok(Arc::new(Luby {
                one: lang.action("1").expect("mis has 1"),
            }))
        }
        ("be_coloring" | "be", None) => match lang.kind() {
            LanguageKind::Mis => Err(wrong()),
            _ => Ok(Arc::new(BeColoring)),
        },
        ("biased", Some(arg)) => {
            let weights: Vec<f64> = arg
                .split('/')
                .map(|w| w.trim().parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|_| StrategyError::BadParameter(spec.to_string()))?;
            if weights.len() != lang.alphabet_size() {
                return Err(StrategyError::WeightCount {
                    expected: lang.alphabet_size(),
                    got: weights.len(),
                });
            }
            if weights.iter().any(|w| !w.is_finite() || *w < 0.0) || weights.iter().sum::<f64>() <= 0.0 {
                return Err(StrategyError::BadWeights);
            }
            Ok(Arc::new(Biased { weights }))
        }
        ("stubborn", Some(arg)) => {
            if lang.kind() != LanguageKind::ConstrainedColoring {
                return Err(wrong());
            }
            let l = arg
                .trim()
                .parse()
                .map_err(|_| StrategyError::BadParameter(spec.to_string()))?;
            Ok(Arc::new(Stubborn {
                l,
                red: lang.action("R").expect("cc has R"),
            }))
        }
        _ => Err(StrategyError::Unknown(spec.to_string())),
    }
}
