//! Structural checks: well-roundedness, perfect recall and round
//! coherence of information sets.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::tree::{GameTree, NodeId};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundDrop {
    pub parent: NodeId,
    pub child: NodeId,
    pub parent_round: usize,
    pub child_round: usize,
}

/// Rounds never decrease along an edge between decision nodes (hence
/// along any path).
pub fn check_well_rounded(tree: &GameTree) -> Result<(), RoundDrop> {
    for (x, node) in tree.nodes.iter().enumerate() {
        if node.player().is_none() {
            continue;
        }
        for &c in &node.children {
            let child = &tree.nodes[c];
            if child.player().is_some() && child.round < node.round {
                return Err(RoundDrop {
                    parent: x,
                    child: c,
                    parent_round: node.round,
                    child_round: child.round,
                });
            }
        }
    }
    Ok(())
}

/// The sequence of (own information set, own action index) on the path.
pub type Experience = Vec<(usize, usize)>;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecallViolation {
    pub player: usize,
    pub info_set: String,
    /// Two members of the set reached through different own experience.
    pub first: NodeId,
    pub second: NodeId,
    pub first_experience: Experience,
    pub second_experience: Experience,
}

/// The mover's own experience at every decision node.
pub fn experiences(tree: &GameTree) -> Vec<Option<Experience>> {
    let mut out: Vec<Option<Experience>> = vec![None; tree.len()];
    // per-player experience along the current path
    let mut stack: Vec<(NodeId, Vec<Experience>)> = vec![(tree.root(), vec![Vec::new(); tree.players])];
    while let Some((x, exp)) = stack.pop() {
        let node = &tree.nodes[x];
        let info = tree.info_of(x);
        if let Some(p) = node.player() {
            out[x] = Some(exp[p].clone());
        }
        for (e, &c) in node.children.iter().enumerate() {
            let mut next = exp.clone();
            if let (Some(p), Some(u)) = (node.player(), info) {
                next[p].push((u, e));
            }
            stack.push((c, next));
        }
    }
    out
}

/// A player never forgets its own earlier information sets and actions:
/// all members of an information set share the same experience.
pub fn check_perfect_recall(tree: &GameTree) -> Result<(), RecallViolation> {
    let exp = experiences(tree);
    for set in &tree.info_sets {
        let first = set.nodes[0];
        for &y in &set.nodes[1..] {
            if exp[y] != exp[first] {
                return Err(RecallViolation {
                    player: set.player,
                    info_set: set.key.clone(),
                    first,
                    second: y,
                    first_experience: exp[first].clone().unwrap_or_default(),
                    second_experience: exp[y].clone().unwrap_or_default(),
                });
            }
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IncoherentSet {
    pub info_set: String,
    pub rounds: Vec<usize>,
}

/// All histories of one information set have the same round.
pub fn check_round_coherence(tree: &GameTree) -> Result<(), IncoherentSet> {
    for set in &tree.info_sets {
        let mut rounds: HashMap<usize, ()> = HashMap::new();
        for &x in &set.nodes {
            rounds.insert(tree.nodes[x].round, ());
        }
        if rounds.len() > 1 {
            let mut r: Vec<usize> = rounds.into_keys().collect();
            r.sort_unstable();
            return Err(IncoherentSet {
                info_set: set.key.clone(),
                rounds: r,
            });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::tree::TreeBuilder;

    #[test]
    fn interleaved_mover_breaks_rounds() {
        // player 0 moves twice, then player 1 for the first time
        let mut b = TreeBuilder::new(2);
        let r = b.decision(None, 0, "a0", 1).unwrap();
        let x = b.decision(Some((r, 0)), 0, "a1", 1).unwrap();
        let y = b.decision(Some((x, 0)), 1, "b0", 1).unwrap();
        b.terminal(Some((y, 0)), vec![0.0, 0.0]).unwrap();
        let t = b.build().unwrap();
        let w = check_well_rounded(&t).unwrap_err();
        assert_eq!((w.parent_round, w.child_round), (1, 0));
    }

    #[test]
    fn single_node_is_fine() {
        let mut b = TreeBuilder::new(1);
        b.terminal(None, vec![1.0]).unwrap();
        let t = b.build().unwrap();
        assert!(check_well_rounded(&t).is_ok());
        assert!(check_perfect_recall(&t).is_ok());
    }

    #[test]
    fn forgetting_own_action() {
        // player 0 moves, then cannot tell which action it took
        let mut b = TreeBuilder::new(1);
        let r = b.decision(None, 0, "first", 2).unwrap();
        for e in 0..2 {
            let x = b.decision(Some((r, e)), 0, "second", 2).unwrap();
            b.terminal(Some((x, 0)), vec![1.0]).unwrap();
            b.terminal(Some((x, 1)), vec![0.0]).unwrap();
        }
        let t = b.build().unwrap();
        let w = check_perfect_recall(&t).unwrap_err();
        assert_eq!(w.info_set, "second");
        assert_ne!(w.first_experience, w.second_experience);
    }
}
