//! Realization probabilities and expected payoffs on explicit trees.

use serde::{Deserialize, Serialize};

use super::profile::BehaviorProfile;
use super::tree::{GameTree, NodeId, NodeKind};

/// Probability of the edge from `parent` along `edge` under `profile`.
pub fn edge_probability(tree: &GameTree, profile: &BehaviorProfile, parent: NodeId, edge: usize) -> f64 {
    match &tree.nodes[parent].kind {
        NodeKind::Chance { probs } => probs[edge],
        NodeKind::Decision { info, .. } => profile.local[*info][edge],
        _ => 0.0,
    }
}

/// `ρ_b(x)`: product of local probabilities along the path to `x`.
pub fn realization_probability(tree: &GameTree, profile: &BehaviorProfile, x: NodeId) -> f64 {
    let mut p = 1.0;
    let mut cur = x;
    while let (Some(parent), Some(edge)) = (tree.nodes[cur].parent, tree.nodes[cur].edge) {
        p *= edge_probability(tree, profile, parent, edge);
        cur = parent;
    }
    p
}

/// `ρ_b` for every node at once.
pub fn realization_all(tree: &GameTree, profile: &BehaviorProfile) -> Vec<f64> {
    let mut rho = vec![0.0; tree.len()];
    rho[tree.root()] = 1.0;
    for x in tree.preorder() {
        for (e, &c) in tree.nodes[x].children.iter().enumerate() {
            rho[c] = rho[x] * edge_probability(tree, profile, x, e);
        }
    }
    rho
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PayoffReport {
    /// Expected payoff per player on the truncation (horizon leaves count
    /// with their lower bracket).
    pub values: Vec<f64>,
    /// Probability of reaching a horizon leaf.
    pub horizon_mass: f64,
    /// Bound on the payoff reachable only past the horizon.
    pub tail_bound: f64,
}

/// `Σ_z ρ_b(z) π(z)` over the leaves of the tree.
pub fn expected_payoff(tree: &GameTree, profile: &BehaviorProfile, tail_bound: f64) -> PayoffReport {
    let rho = realization_all(tree, profile);
    let mut values = vec![0.0; tree.players];
    let mut horizon_mass = 0.0;
    for (x, node) in tree.nodes.iter().enumerate() {
        if let Some(pay) = node.leaf_payoffs() {
            for (v, p) in values.iter_mut().zip(pay) {
                *v += rho[x] * p;
            }
            if matches!(node.kind, NodeKind::Horizon { .. }) {
                horizon_mass += rho[x];
            }
        }
    }
    PayoffReport {
        values,
        horizon_mass,
        tail_bound,
    }
}
