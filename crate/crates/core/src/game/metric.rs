//! Distances between outcomes and between strategy profiles.

use serde::{Deserialize, Serialize};

use super::eval::realization_all;
use super::profile::BehaviorProfile;
use super::tree::{GameTree, NodeId, NodeKind};
use super::GameError;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricValue {
    pub value: f64,
    /// Histories deeper than the explored rounds can add at most this.
    pub error_bound: f64,
    /// Node attaining the maximum.
    pub witness: Option<NodeId>,
}

/// `max 2^{-r(x)} |ρ¹(x) − ρ²(x)|` over histories of round at most `depth`.
pub fn outcome_metric(
    tree: &GameTree,
    first: &BehaviorProfile,
    second: &BehaviorProfile,
    depth: usize,
) -> MetricValue {
    let r1 = realization_all(tree, first);
    let r2 = realization_all(tree, second);
    let mut value = 0.0;
    let mut witness = None;
    for (x, node) in tree.nodes.iter().enumerate() {
        if node.round > depth {
            continue;
        }
        let d = 0.5f64.powi(node.round as i32) * (r1[x] - r2[x]).abs();
        if d > value {
            value = d;
            witness = Some(x);
        }
    }
    let error_bound = 0.5f64.powi(depth.min(1 << 20) as i32);
    MetricValue {
        value,
        error_bound,
        witness,
    }
}

/// Reduced pure strategies of `player`: one action per information set
/// the strategy itself does not rule out, `None` elsewhere.
pub fn reduced_pure_strategies(
    tree: &GameTree,
    player: usize,
    cap: usize,
) -> Result<Vec<Vec<Option<usize>>>, GameError> {
    let mut out = Vec::new();
    let mut assignment = vec![None; tree.info_sets.len()];
    let mut stack = vec![tree.root()];
    expand(tree, player, &mut stack, &mut assignment, &mut out, cap)?;
    Ok(out)
}

fn expand(
    tree: &GameTree,
    player: usize,
    stack: &mut Vec<NodeId>,
    assignment: &mut Vec<Option<usize>>,
    out: &mut Vec<Vec<Option<usize>>>,
    cap: usize,
) -> Result<(), GameError> {
    let Some(x) = stack.pop() else {
        if out.len() >= cap {
            return Err(GameError::TooManyStrategies(cap));
        }
        out.push(assignment.clone());
        return Ok(());
    };
    let node = &tree.nodes[x];
    match node.kind {
        NodeKind::Decision { player: p, info } if p == player => match assignment[info] {
            Some(e) => {
                stack.push(node.children[e]);
                expand(tree, player, stack, assignment, out, cap)?;
                stack.pop();
            }
            None => {
                for (e, &c) in node.children.iter().enumerate() {
                    assignment[info] = Some(e);
                    stack.push(c);
                    expand(tree, player, stack, assignment, out, cap)?;
                    stack.pop();
                }
                assignment[info] = None;
            }
        },
        _ => {
            let before = stack.len();
            stack.extend(node.children.iter().rev());
            expand(tree, player, stack, assignment, out, cap)?;
            stack.truncate(before);
        }
    }
    stack.push(x);
    Ok(())
}

/// Overlays a pure strategy for `player` onto `profile`.
pub fn apply_pure(
    tree: &GameTree,
    profile: &BehaviorProfile,
    player: usize,
    pure: &[Option<usize>],
) -> BehaviorProfile {
    let mut out = profile.clone();
    for u in tree.info_sets_of(player) {
        if let Some(e) = pure[u] {
            let mut v = vec![0.0; tree.info_sets[u].actions.len()];
            v[e] = 1.0;
            out.local[u] = v;
        }
    }
    out
}

/// Profile distance, approximating the supremum over deviations by the
/// maximum over reduced pure deviations (at most `cap` per player).
pub fn strategy_metric_approx(
    tree: &GameTree,
    first: &BehaviorProfile,
    second: &BehaviorProfile,
    depth: usize,
    cap: usize,
) -> Result<MetricValue, GameError> {
    let mut best = outcome_metric(tree, first, second, depth);
    for i in 0..tree.players {
        for pure in reduced_pure_strategies(tree, i, cap)? {
            let a = apply_pure(tree, first, i, &pure);
            let b = apply_pure(tree, second, i, &pure);
            let m = outcome_metric(tree, &a, &b, depth);
            if m.value > best.value {
                best = m;
            }
        }
    }
    Ok(best)
}
