//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap, VecDeque};

use lcl_core::game::{BehaviorProfile, GameTree, NodeKind};
use lcl_core::graph::Graph;
use rand::Rng;

/// Vertices within distance `t` of `v`, by a plain BFS.
pub fn bfs_ball(graph: &Graph, v: usize, t: usize) -> BTreeSet<usize> {
    let mut dist: HashMap<usize, usize> = HashMap::new();
    dist.insert(v, 0);
    let mut queue = VecDeque::from([v]);
    while let Some(u) = queue.pop_front() {
        let d = dist[&u];
        if d == t {
            continue;
        }
        for &w in graph.neighbors(u) {
            if !dist.contains_key(&w) {
                dist.insert(w, d + 1);
                queue.push_back(w);
            }
        }
    }
    dist.into_keys().collect()
}

/// Expected payoff of `player` by recursion over the tree, with one
/// player's local strategies overridden by a pure assignment.
pub fn value_with(
    tree: &GameTree,
    profile: &BehaviorProfile,
    player: usize,
    pure: &HashMap<usize, usize>,
) -> f64 {
    fn go(
        tree: &GameTree,
        profile: &BehaviorProfile,
        player: usize,
        pure: &HashMap<usize, usize>,
        x: usize,
    ) -> f64 {
        let node = tree.node(x);
        match &node.kind {
            NodeKind::Terminal { payoffs } | NodeKind::Horizon { payoffs } => payoffs[player],
            NodeKind::Chance { probs } => node
                .children
                .iter()
                .zip(probs)
                .map(|(&c, p)| p * go(tree, profile, player, pure, c))
                .sum(),
            NodeKind::Decision { player: p, info } => {
                if *p == player {
                    if let Some(&e) = pure.get(info) {
                        return go(tree, profile, player, pure, node.children[e]);
                    }
                }
                node.children
                    .iter()
                    .zip(&profile.local[*info])
                    .map(|(&c, q)| if *q == 0.0 { 0.0 } else { q * go(tree, profile, player, pure, c) })
                    .sum()
            }
        }
    }
    go(tree, profile, player, pure, tree.root())
}

/// First information set of `player` that play under `pure` can reach
/// and that `pure` leaves open.
fn open_info_set(tree: &GameTree, player: usize, pure: &HashMap<usize, usize>) -> Option<usize> {
    let mut queue = VecDeque::from([tree.root()]);
    while let Some(x) = queue.pop_front() {
        let node = tree.node(x);
        if let NodeKind::Decision { player: p, info } = node.kind {
            if p == player {
                match pure.get(&info) {
                    Some(&e) => queue.push_back(node.children[e]),
                    None => return Some(info),
                }
                continue;
            }
        }
        queue.extend(node.children.iter().copied());
    }
    None
}

/// All reduced pure strategies of `player`, grown one reachable
/// information set at a time.
pub fn pure_strategies(tree: &GameTree, player: usize, cap: usize) -> Vec<HashMap<usize, usize>> {
    let mut done = Vec::new();
    let mut work = vec![HashMap::new()];
    while let Some(s) = work.pop() {
        match open_info_set(tree, player, &s) {
            None => {
                done.push(s);
                assert!(done.len() <= cap, "too many pure strategies");
            }
            Some(u) => {
                for e in 0..tree.info_sets[u].actions.len() {
                    let mut t = s.clone();
                    t.insert(u, e);
                    work.push(t);
                }
            }
        }
    }
    done
}

/// Best value over pure strategies, by exhaustive enumeration.
pub fn best_pure_value(tree: &GameTree, profile: &BehaviorProfile, player: usize) -> f64 {
    pure_strategies(tree, player, 1 << 20)
        .iter()
        .map(|s| value_with(tree, profile, player, s))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// `ρ(x)` by walking parent links.
pub fn path_probability(tree: &GameTree, profile: &BehaviorProfile, x: usize) -> f64 {
    let mut p = 1.0;
    let mut cur = x;
    while let Some(parent) = tree.node(cur).parent {
        let e = tree.node(cur).edge.unwrap();
        p *= match &tree.node(parent).kind {
            NodeKind::Chance { probs } => probs[e],
            NodeKind::Decision { info, .. } => profile.local[*info][e],
            _ => unreachable!(),
        };
        cur = parent;
    }
    p
}

/// A random full-support-or-not profile.
pub fn random_profile(tree: &GameTree, rng: &mut impl Rng) -> BehaviorProfile {
    BehaviorProfile::from_fn(tree, |u| random_simplex(u.actions.len(), rng))
}

pub fn random_simplex(len: usize, rng: &mut impl Rng) -> Vec<f64> {
    let w: Vec<f64> = (0..len).map(|_| -(rng.gen::<f64>().max(1e-300)).ln()).collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|x| x / s).collect()
}
