//! Behavior strategy profiles and perturbation specs.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::tree::{GameTree, InfoSet};
use super::GameError;
use crate::Action;

const TOL: f64 = 1e-9;

/// Minimum probabilities every action must receive.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PerturbationSpec {
    Uniform { eta: f64 },
    /// One floor per alphabet letter.
    PerAction { eta: Vec<f64> },
}

impl PerturbationSpec {
    pub fn uniform(eta: f64, alphabet: usize) -> Result<Self, GameError> {
        let spec = PerturbationSpec::Uniform { eta };
        spec.validate(alphabet)?;
        Ok(spec)
    }

    pub fn per_action(eta: Vec<f64>) -> Result<Self, GameError> {
        let len = eta.len();
        let spec = PerturbationSpec::PerAction { eta };
        spec.validate(len)?;
        Ok(spec)
    }

    pub fn floor(&self, a: Action) -> f64 {
        match self {
            PerturbationSpec::Uniform { eta } => *eta,
            PerturbationSpec::PerAction { eta } => eta.get(a as usize).copied().unwrap_or(0.0),
        }
    }

    /// Floors must be non-negative with total below 1 on the alphabet,
    /// hence on every available-action set.
    pub fn validate(&self, alphabet: usize) -> Result<(), GameError> {
        let floors: Vec<f64> = (0..alphabet).map(|a| self.floor(a as Action)).collect();
        let total: f64 = floors.iter().sum();
        if floors.iter().any(|e| !e.is_finite() || *e < 0.0) || total >= 1.0 {
            return Err(GameError::Perturbation(total));
        }
        if let PerturbationSpec::PerAction { eta } = self {
            if eta.len() != alphabet {
                return Err(GameError::Perturbation(total));
            }
        }
        Ok(())
    }

    /// The perturbed local strategy: floors everywhere, the rest on `best`.
    pub fn tremble(&self, actions: &[Action], best: usize) -> Vec<f64> {
        let mut out: Vec<f64> = actions.iter().map(|&a| self.floor(a)).collect();
        let rest = 1.0 - out.iter().sum::<f64>();
        out[best] += rest;
        out
    }
}

/// A local strategy for every information set, aligned with its actions.
#[derive(Clone, Debug, PartialEq)]
pub struct BehaviorProfile {
    pub local: Vec<Vec<f64>>,
}

impl BehaviorProfile {
    pub fn uniform(tree: &GameTree) -> Self {
        Self::from_fn(tree, |u| vec![1.0 / u.actions.len() as f64; u.actions.len()])
    }

    pub fn from_fn(tree: &GameTree, mut f: impl FnMut(&InfoSet) -> Vec<f64>) -> Self {
        BehaviorProfile {
            local: tree.info_sets.iter().map(&mut f).collect(),
        }
    }

    /// Checks shapes, normalization and perturbation floors.
    pub fn validate(&self, tree: &GameTree, spec: Option<&PerturbationSpec>) -> Result<(), GameError> {
        if self.local.len() != tree.info_sets.len() {
            return Err(GameError::ProfileShape {
                key: format!("{} information sets", self.local.len()),
            });
        }
        for (u, probs) in tree.info_sets.iter().zip(&self.local) {
            let bad = || GameError::ProfileShape { key: u.key.clone() };
            if probs.len() != u.actions.len() {
                return Err(bad());
            }
            if probs.iter().any(|p| !(*p >= -TOL)) || (probs.iter().sum::<f64>() - 1.0).abs() > 1e-7 {
                return Err(bad());
            }
            if let Some(spec) = spec {
                for (p, &a) in probs.iter().zip(&u.actions) {
                    if *p < spec.floor(a) - TOL {
                        return Err(GameError::BelowFloor { key: u.key.clone() });
                    }
                }
            }
        }
        Ok(())
    }

    /// Takes `player`'s local strategies from `other`.
    pub fn with_player(&self, tree: &GameTree, player: usize, other: &BehaviorProfile) -> Self {
        let mut out = self.clone();
        for u in tree.info_sets_of(player) {
            out.local[u] = other.local[u].clone();
        }
        out
    }

    /// JSON-friendly map from information-set key to probabilities.
    pub fn to_keyed(&self, tree: &GameTree) -> BTreeMap<String, Vec<f64>> {
        tree.info_sets
            .iter()
            .zip(&self.local)
            .map(|(u, p)| (u.key.clone(), p.clone()))
            .collect()
    }

    /// Reads a keyed map; information sets it does not mention play
    /// uniformly, unknown keys are ignored.
    pub fn from_keyed(tree: &GameTree, map: &BTreeMap<String, Vec<f64>>) -> Result<Self, GameError> {
        let profile = Self::from_fn(tree, |u| match map.get(&u.key) {
            Some(p) => p.clone(),
            None => vec![1.0 / u.actions.len() as f64; u.actions.len()],
        });
        profile.validate(tree, None)?;
        Ok(profile)
    }
}

/// Carries a profile to another truncation of the same game: local
/// strategies are copied by key, information sets absent from the source
/// play uniformly.
pub fn induce_to_full(source_tree: &GameTree, profile: &BehaviorProfile, target: &GameTree) -> BehaviorProfile {
    let keyed = profile.to_keyed(source_tree);
    BehaviorProfile::from_fn(target, |u| match keyed.get(&u.key) {
        Some(p) if p.len() == u.actions.len() => p.clone(),
        _ => vec![1.0 / u.actions.len() as f64; u.actions.len()],
    })
}
