//! Best responses by backward induction over a player's information sets,
//! and equilibrium gaps.

use serde::{Deserialize, Serialize};

use super::eval::{edge_probability, expected_payoff};
use super::profile::{BehaviorProfile, PerturbationSpec};
use super::structure::check_perfect_recall;
use super::tree::{GameTree, NodeId, NodeKind};
use super::GameError;

#[derive(Clone, Debug, PartialEq)]
pub struct BestResponse {
    pub player: usize,
    /// The profile with `player`'s local strategies replaced.
    pub profile: BehaviorProfile,
    /// `Π_player(best, others)`.
    pub value: f64,
}

struct Solver<'a> {
    tree: &'a GameTree,
    player: usize,
    profile: &'a BehaviorProfile,
    spec: Option<&'a PerturbationSpec>,
    reach: Vec<f64>,
    ev: Vec<Option<f64>>,
    policy: Vec<Option<Vec<f64>>>,
}

impl Solver<'_> {
    fn value(&mut self, x: NodeId) -> f64 {
        if let Some(v) = self.ev[x] {
            return v;
        }
        let tree = self.tree;
        let node = &tree.nodes[x];
        let v = match &node.kind {
            NodeKind::Terminal { payoffs } | NodeKind::Horizon { payoffs } => payoffs[self.player],
            NodeKind::Decision { player, info } if *player == self.player => {
                let local = self.local(*info);
                node.children
                    .iter()
                    .zip(&local)
                    .filter(|(_, p)| **p > 0.0)
                    .map(|(&c, p)| p * self.value(c))
                    .sum()
            }
            _ => {
                let mut acc = 0.0;
                for (e, &c) in node.children.iter().enumerate() {
                    let p = edge_probability(tree, self.profile, x, e);
                    if p > 0.0 {
                        acc += p * self.value(c);
                    }
                }
                acc
            }
        };
        self.ev[x] = Some(v);
        v
    }

    fn local(&mut self, u: usize) -> Vec<f64> {
        if let Some(p) = &self.policy[u] {
            return p.clone();
        }
        let tree = self.tree;
        let set = &tree.info_sets[u];
        let mut q = vec![0.0; set.actions.len()];
        for &y in &set.nodes {
            let w = self.reach[y];
            if w == 0.0 {
                continue;
            }
            for (e, &c) in tree.nodes[y].children.iter().enumerate() {
                q[e] += w * self.value(c);
            }
        }
        let best = argmax(&q);
        let local = match self.spec {
            Some(spec) => spec.tremble(&set.actions, best),
            None => {
                let mut v = vec![0.0; q.len()];
                v[best] = 1.0;
                v
            }
        };
        self.policy[u] = Some(local.clone());
        local
    }
}

/// Index of the largest entry; ties go to the lowest index.
fn argmax(q: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in q.iter().enumerate() {
        if v > q[best] + 1e-12 {
            best = i;
        }
    }
    best
}

/// Probability of reaching each node when `player` always steers there.
fn reach_of_others(tree: &GameTree, player: usize, profile: &BehaviorProfile) -> Vec<f64> {
    let mut reach = vec![0.0; tree.len()];
    reach[tree.root()] = 1.0;
    for x in tree.preorder() {
        let own = tree.nodes[x].player() == Some(player);
        for (e, &c) in tree.nodes[x].children.iter().enumerate() {
            let p = if own {
                1.0
            } else {
                edge_probability(tree, profile, x, e)
            };
            reach[c] = reach[x] * p;
        }
    }
    reach
}

/// Exact best response on the tree. Under a perturbation spec each local
/// strategy puts the floors on every action and the remaining mass on a
/// locally optimal one.
pub fn best_response(
    tree: &GameTree,
    player: usize,
    profile: &BehaviorProfile,
    spec: Option<&PerturbationSpec>,
) -> Result<BestResponse, GameError> {
    check_perfect_recall(tree).map_err(|w| GameError::PerfectRecall(Box::new(w)))?;
    Ok(best_response_unchecked(tree, player, profile, spec))
}

pub(crate) fn best_response_unchecked(
    tree: &GameTree,
    player: usize,
    profile: &BehaviorProfile,
    spec: Option<&PerturbationSpec>,
) -> BestResponse {
    let mut solver = Solver {
        tree,
        player,
        profile,
        spec,
        reach: reach_of_others(tree, player, profile),
        ev: vec![None; tree.len()],
        policy: vec![None; tree.info_sets.len()],
    };
    let value = solver.value(tree.root());
    let mut out = profile.clone();
    for u in tree.info_sets_of(player) {
        out.local[u] = solver.local(u);
    }
    BestResponse {
        player,
        profile: out,
        value,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub values: Vec<f64>,
    pub best_values: Vec<f64>,
    /// `best_values - values`, per player.
    pub gaps: Vec<f64>,
    pub tail_bound: f64,
    /// The profile is an ε-equilibrium of the untruncated game for
    /// `ε = max gap + 2 · tail_bound`.
    pub epsilon: f64,
}

impl GapReport {
    pub fn from_values(values: Vec<f64>, best_values: Vec<f64>, tail_bound: f64) -> Self {
        let gaps: Vec<f64> = best_values.iter().zip(&values).map(|(b, v)| b - v).collect();
        let max_gap = gaps.iter().copied().fold(0.0, f64::max);
        GapReport {
            values,
            best_values,
            gaps,
            tail_bound,
            epsilon: max_gap + 2.0 * tail_bound,
        }
    }

    pub fn max_gap(&self) -> f64 {
        self.gaps.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// How much each player gains by its best (perturbed) deviation.
pub fn equilibrium_gap(
    tree: &GameTree,
    profile: &BehaviorProfile,
    spec: Option<&PerturbationSpec>,
    tail_bound: f64,
) -> Result<GapReport, GameError> {
    profile.validate(tree, spec)?;
    check_perfect_recall(tree).map_err(|w| GameError::PerfectRecall(Box::new(w)))?;
    let values = expected_payoff(tree, profile, tail_bound).values;
    let best_values = (0..tree.players)
        .map(|i| best_response_unchecked(tree, i, profile, spec).value)
        .collect();
    Ok(GapReport::from_values(values, best_values, tail_bound))
}
