//! Explicit finite extensive-form game trees.

use std::collections::HashMap;

use thiserror::Error;

use crate::Action;

pub type NodeId = usize;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TreeError {
    #[error("node {0} does not exist")]
    NoSuchNode(NodeId),
    #[error("node {parent} has no edge {edge}")]
    NoSuchEdge { parent: NodeId, edge: usize },
    #[error("edge {edge} of node {parent} is already attached")]
    EdgeTaken { parent: NodeId, edge: usize },
    #[error("node {0} has unattached edges")]
    Dangling(NodeId),
    #[error("information set `{key}` mixes action sets")]
    InconsistentActions { key: String },
    #[error("information set `{key}` mixes players")]
    InconsistentPlayer { key: String },
    #[error("chance probabilities at node {0} must be non-negative and sum to 1")]
    BadChance(NodeId),
    #[error("player {player} out of range (game has {players})")]
    NoSuchPlayer { player: usize, players: usize },
    #[error("tree has no root")]
    Empty,
    #[error("tree exceeds the node budget of {0}")]
    Budget(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub enum NodeKind {
    Chance { probs: Vec<f64> },
    Decision { player: usize, info: usize },
    Terminal { payoffs: Vec<f64> },
    /// Play cut at the horizon; payoffs are a lower bracket (exact for
    /// players whose ball already finished, 0 for the rest).
    Horizon { payoffs: Vec<f64> },
}

#[derive(Clone, Debug)]
pub struct Node {
    pub parent: Option<NodeId>,
    /// Index of the edge of `parent` leading here.
    pub edge: Option<usize>,
    pub kind: NodeKind,
    pub children: Vec<NodeId>,
    /// `|Rec(x)|`: earlier nodes on the path with the same mover. Leaves
    /// and chance nodes inherit the round of their parent.
    pub round: usize,
    pub depth: usize,
}

impl Node {
    pub fn is_leaf(&self) -> bool {
        matches!(self.kind, NodeKind::Terminal { .. } | NodeKind::Horizon { .. })
    }

    pub fn player(&self) -> Option<usize> {
        match self.kind {
            NodeKind::Decision { player, .. } => Some(player),
            _ => None,
        }
    }

    pub fn leaf_payoffs(&self) -> Option<&[f64]> {
        match &self.kind {
            NodeKind::Terminal { payoffs } | NodeKind::Horizon { payoffs } => Some(payoffs),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct InfoSet {
    pub player: usize,
    pub key: String,
    pub actions: Vec<Action>,
    pub nodes: Vec<NodeId>,
    /// Round of the first member (all members agree in a coherent game).
    pub round: usize,
    /// Decided labels visible to the mover, used to look up round-indexed
    /// strategies. Empty for hand-built trees.
    pub view: String,
}

#[derive(Clone, Debug)]
pub struct GameTree {
    pub players: usize,
    pub nodes: Vec<Node>,
    pub info_sets: Vec<InfoSet>,
    key_index: HashMap<String, usize>,
}

impl GameTree {
    pub fn root(&self) -> NodeId {
        0
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Information set of a decision node.
    pub fn info_of(&self, x: NodeId) -> Option<usize> {
        match self.nodes[x].kind {
            NodeKind::Decision { info, .. } => Some(info),
            _ => None,
        }
    }

    pub fn info_set(&self, key: &str) -> Option<usize> {
        self.key_index.get(key).copied()
    }

    pub fn info_sets_of(&self, player: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.info_sets.len()).filter(move |&u| self.info_sets[u].player == player)
    }

    /// Action labeling the edge from `parent` to its `edge`-th child.
    pub fn edge_action(&self, parent: NodeId, edge: usize) -> Option<Action> {
        match self.nodes[parent].kind {
            NodeKind::Decision { info, .. } => Some(self.info_sets[info].actions[edge]),
            NodeKind::Chance { .. } => Some(edge as Action),
            _ => None,
        }
    }

    /// Walks a sequence of edge labels from the root.
    pub fn find(&self, history: &[Action]) -> Option<NodeId> {
        let mut x = self.root();
        for &a in history {
            let edge = match self.nodes[x].kind {
                NodeKind::Decision { info, .. } => {
                    self.info_sets[info].actions.iter().position(|&b| b == a)?
                }
                NodeKind::Chance { .. } => a as usize,
                _ => return None,
            };
            x = *self.nodes[x].children.get(edge)?;
        }
        Some(x)
    }

    /// Edge labels from the root to `x`.
    pub fn history(&self, x: NodeId) -> Vec<Action> {
        let mut out = Vec::new();
        let mut cur = x;
        while let (Some(p), Some(e)) = (self.nodes[cur].parent, self.nodes[cur].edge) {
            out.push(self.edge_action(p, e).expect("inner node"));
            cur = p;
        }
        out.reverse();
        out
    }

    pub fn round_of(&self, x: NodeId) -> usize {
        self.nodes[x].round
    }

    pub fn max_round(&self) -> usize {
        self.nodes.iter().map(|n| n.round).max().unwrap_or(0)
    }

    /// Nodes in depth-first preorder (parents before children).
    pub fn preorder(&self) -> Vec<NodeId> {
        let mut out = Vec::with_capacity(self.nodes.len());
        let mut stack = vec![self.root()];
        while let Some(x) = stack.pop() {
            out.push(x);
            stack.extend(self.nodes[x].children.iter().rev());
        }
        out
    }
}

enum Slot {
    Chance(Vec<f64>),
    Decision { player: usize, key: String, actions: Vec<Action>, view: String },
    Terminal(Vec<f64>),
    Horizon(Vec<f64>),
}

struct Pending {
    parent: Option<(NodeId, usize)>,
    slot: Slot,
    children: Vec<Option<NodeId>>,
}

/// Incremental construction of a [`GameTree`]. Information sets are
/// formed by equal keys.
pub struct TreeBuilder {
    players: usize,
    nodes: Vec<Pending>,
    budget: usize,
}

impl TreeBuilder {
    pub fn new(players: usize) -> Self {
        TreeBuilder {
            players,
            nodes: Vec::new(),
            budget: usize::MAX,
        }
    }

    pub fn with_budget(players: usize, budget: usize) -> Self {
        TreeBuilder {
            budget,
            ..Self::new(players)
        }
    }

    fn push(&mut self, parent: Option<(NodeId, usize)>, slot: Slot, arity: usize) -> Result<NodeId, TreeError> {
        if self.nodes.len() >= self.budget {
            return Err(TreeError::Budget(self.budget));
        }
        let id = self.nodes.len();
        match parent {
            None if id != 0 => return Err(TreeError::NoSuchNode(usize::MAX)),
            None => {}
            Some((p, e)) => {
                let pn = self.nodes.get_mut(p).ok_or(TreeError::NoSuchNode(p))?;
                let edge = pn
                    .children
                    .get_mut(e)
                    .ok_or(TreeError::NoSuchEdge { parent: p, edge: e })?;
                if edge.is_some() {
                    return Err(TreeError::EdgeTaken { parent: p, edge: e });
                }
                *edge = Some(id);
            }
        }
        self.nodes.push(Pending {
            parent,
            slot,
            children: vec![None; arity],
        });
        Ok(id)
    }

    pub fn chance(&mut self, parent: Option<(NodeId, usize)>, probs: Vec<f64>) -> Result<NodeId, TreeError> {
        let arity = probs.len();
        self.push(parent, Slot::Chance(probs), arity)
    }

    /// A decision node with actions `0..arity`.
    pub fn decision(
        &mut self,
        parent: Option<(NodeId, usize)>,
        player: usize,
        key: &str,
        arity: usize,
    ) -> Result<NodeId, TreeError> {
        let actions = (0..arity as Action).collect();
        self.decision_with(parent, player, key, actions, String::new())
    }

    pub fn decision_with(
        &mut self,
        parent: Option<(NodeId, usize)>,
        player: usize,
        key: &str,
        actions: Vec<Action>,
        view: String,
    ) -> Result<NodeId, TreeError> {
        if player >= self.players {
            return Err(TreeError::NoSuchPlayer {
                player,
                players: self.players,
            });
        }
        let arity = actions.len();
        self.push(
            parent,
            Slot::Decision {
                player,
                key: key.to_string(),
                actions,
                view,
            },
            arity,
        )
    }

    pub fn terminal(&mut self, parent: Option<(NodeId, usize)>, payoffs: Vec<f64>) -> Result<NodeId, TreeError> {
        self.push(parent, Slot::Terminal(payoffs), 0)
    }

    pub fn horizon(&mut self, parent: Option<(NodeId, usize)>, payoffs: Vec<f64>) -> Result<NodeId, TreeError> {
        self.push(parent, Slot::Horizon(payoffs), 0)
    }

    pub fn build(self) -> Result<GameTree, TreeError> {
        if self.nodes.is_empty() {
            return Err(TreeError::Empty);
        }
        let mut info_sets: Vec<InfoSet> = Vec::new();
        let mut key_index: HashMap<String, usize> = HashMap::new();
        let mut nodes = Vec::with_capacity(self.nodes.len());
        for (id, p) in self.nodes.into_iter().enumerate() {
            let children = p
                .children
                .iter()
                .map(|c| c.ok_or(TreeError::Dangling(id)))
                .collect::<Result<Vec<_>, _>>()?;
            let kind = match p.slot {
                Slot::Chance(probs) => {
                    let total: f64 = probs.iter().sum();
                    if probs.iter().any(|&q| !(q >= 0.0)) || (total - 1.0).abs() > 1e-9 {
                        return Err(TreeError::BadChance(id));
                    }
                    NodeKind::Chance { probs }
                }
                Slot::Decision {
                    player,
                    key,
                    actions,
                    view,
                } => {
                    let info = match key_index.get(&key) {
                        Some(&u) => {
                            let set = &mut info_sets[u];
                            if set.player != player {
                                return Err(TreeError::InconsistentPlayer { key });
                            }
                            if set.actions != actions {
                                return Err(TreeError::InconsistentActions { key });
                            }
                            set.nodes.push(id);
                            u
                        }
                        None => {
                            let u = info_sets.len();
                            key_index.insert(key.clone(), u);
                            info_sets.push(InfoSet {
                                player,
                                key,
                                actions,
                                nodes: vec![id],
                                round: 0,
                                view,
                            });
                            u
                        }
                    };
                    NodeKind::Decision { player, info }
                }
                Slot::Terminal(payoffs) => NodeKind::Terminal { payoffs },
                Slot::Horizon(payoffs) => NodeKind::Horizon { payoffs },
            };
            nodes.push(Node {
                parent: p.parent.map(|(q, _)| q),
                edge: p.parent.map(|(_, e)| e),
                kind,
                children,
                round: 0,
                depth: 0,
            });
        }
        let mut tree = GameTree {
            players: self.players,
            nodes,
            info_sets,
            key_index,
        };
        assign_rounds(&mut tree);
        for u in 0..tree.info_sets.len() {
            let first = tree.info_sets[u].nodes[0];
            tree.info_sets[u].round = tree.nodes[first].round;
        }
        Ok(tree)
    }
}

/// Computes `|Rec(x)|` for every node with one traversal that keeps a
/// per-player count of moves on the current path.
fn assign_rounds(tree: &mut GameTree) {
    let players = tree.players;
    // (node, depth, counts of moves by each player strictly above node)
    let mut stack: Vec<(NodeId, usize, Vec<usize>)> = vec![(0, 0, vec![0; players])];
    let mut parent_round = vec![0usize; tree.nodes.len()];
    while let Some((x, depth, counts)) = stack.pop() {
        let round = match tree.nodes[x].player() {
            Some(p) => counts[p],
            None => tree.nodes[x].parent.map_or(0, |p| parent_round[p]),
        };
        parent_round[x] = round;
        tree.nodes[x].round = round;
        tree.nodes[x].depth = depth;
        let mut below = counts;
        if let Some(p) = tree.nodes[x].player() {
            below[p] += 1;
        }
        for &c in tree.nodes[x].children.iter() {
            stack.push((c, depth + 1, below.clone()));
        }
    }
}
