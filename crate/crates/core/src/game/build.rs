//! The truncated extensive-form game induced by an LCL task.

use serde::{Deserialize, Serialize};

use super::tree::{GameTree, NodeId, TreeBuilder};
use super::GameError;
use crate::graph::{BallView, Graph};
use crate::lang::{settle, LclLanguage, Neighborhoods};
use crate::pref::Preference;
use crate::Action;

pub const DEFAULT_NODE_BUDGET: usize = 4_000_000;

/// Parameters shared by the explicit and round-merged game models.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GameParams {
    pub lang: LclLanguage,
    pub pref: Preference,
    pub delta: f64,
    /// Last round that is played; rounds `0..=horizon` are kept.
    pub horizon: usize,
}

impl GameParams {
    pub fn validate(&self) -> Result<(), GameError> {
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(GameError::BadDelta(self.delta));
        }
        self.pref.validate().map_err(GameError::Pref)
    }

    /// `δ^T · M`: payoff mass reachable only past the horizon.
    pub fn tail_bound(&self) -> f64 {
        self.delta.powi(self.horizon as i32) * self.pref.bound()
    }

    /// Payoff of `v` once its whole ball has decided.
    pub(crate) fn ball_payoff(
        &self,
        hoods: &Neighborhoods,
        labels: &[Option<Action>],
        v: usize,
        time: usize,
    ) -> f64 {
        let shape = hoods.shape(v);
        let local = shape.gather(labels);
        let view = BallView {
            shape,
            labels: &local,
        };
        self.delta.powi(time as i32) * self.pref.value(&self.lang, &view)
    }
}

/// An explicit truncated LCL game.
#[derive(Clone, Debug)]
pub struct LclGame {
    pub params: GameParams,
    /// Support of the chance move with probabilities.
    pub graphs: Vec<(Graph, f64)>,
    pub tree: GameTree,
}

impl LclGame {
    pub fn players(&self) -> usize {
        self.tree.players
    }

    pub fn tail_bound(&self) -> f64 {
        self.params.tail_bound()
    }
}

#[derive(Clone)]
struct State {
    labels: Vec<Option<Action>>,
    decided: Vec<bool>,
    decision_round: Vec<Option<usize>>,
    /// Past-round actions of every vertex.
    hist: Vec<Vec<Action>>,
    proposals: Vec<Option<Action>>,
}

struct Builder<'a> {
    params: &'a GameParams,
    graph: &'a Graph,
    hoods: Neighborhoods,
    tree: TreeBuilder,
    all: Vec<Action>,
}

/// Information-set key: mover, its ball, and for every ball vertex the
/// actions taken in past rounds plus whether it has decided (`*`).
pub fn info_key(
    lang: &LclLanguage,
    hoods: &Neighborhoods,
    mover: usize,
    hist: &[Vec<Action>],
    decided: &[bool],
) -> String {
    let shape = hoods.shape(mover);
    let parts: Vec<String> = shape
        .vertices
        .iter()
        .map(|&j| {
            let seq: Vec<Option<Action>> = hist[j].iter().map(|&a| Some(a)).collect();
            format!(
                "{j}:{}{}",
                lang.render(&seq),
                if decided[j] { "*" } else { "" }
            )
        })
        .collect();
    format!("p{mover}|{}|{}", shape.signature(), parts.join(";"))
}

/// Decided labels inside `v`'s ball, `_` for undecided vertices.
pub fn view_key(
    lang: &LclLanguage,
    hoods: &Neighborhoods,
    v: usize,
    labels: &[Option<Action>],
    decided: &[bool],
) -> String {
    let shape = hoods.shape(v);
    let seen: Vec<Option<Action>> = shape
        .vertices
        .iter()
        .map(|&w| if decided[w] { labels[w] } else { None })
        .collect();
    lang.render(&seen)
}

impl Builder<'_> {
    fn round(&mut self, parent: Option<(NodeId, usize)>, st: State, r: usize) -> Result<(), GameError> {
        let order: Vec<usize> = (0..self.graph.n()).filter(|&v| !st.decided[v]).collect();
        self.mover(parent, st, r, &order, 0)
    }

    fn mover(
        &mut self,
        parent: Option<(NodeId, usize)>,
        st: State,
        r: usize,
        order: &[usize],
        idx: usize,
    ) -> Result<(), GameError> {
        if idx == order.len() {
            return self.end_round(parent, st, r);
        }
        let i = order[idx];
        let lang = &self.params.lang;
        let available = if r == 0 {
            self.all.clone()
        } else {
            lang.compatible_actions(self.graph, &st.labels, i, &st.decided)?
        };
        let key = info_key(lang, &self.hoods, i, &st.hist, &st.decided);
        let view = view_key(lang, &self.hoods, i, &st.labels, &st.decided);
        let node = self
            .tree
            .decision_with(parent, i, &key, available.clone(), view)?;
        for (e, &a) in available.iter().enumerate() {
            let mut next = st.clone();
            next.proposals[i] = Some(a);
            self.mover(Some((node, e)), next, r, order, idx + 1)?;
        }
        Ok(())
    }

    fn end_round(&mut self, parent: Option<(NodeId, usize)>, mut st: State, r: usize) -> Result<(), GameError> {
        let n = self.graph.n();
        let mut next = st.labels.clone();
        for v in 0..n {
            if !st.decided[v] {
                next[v] = st.proposals[v];
                st.hist[v].push(st.proposals[v].expect("every active vertex moved"));
            }
        }
        for v in settle(&self.params.lang, &self.hoods, &next, &st.decided) {
            st.decided[v] = true;
            st.decision_round[v] = Some(r);
        }
        st.labels = next;
        st.proposals = vec![None; n];
        let done = st.decided.iter().all(|&d| d);
        if done || r == self.params.horizon {
            let payoffs: Vec<f64> = (0..n)
                .map(|v| {
                    let time = self
                        .hoods
                        .shape(v)
                        .vertices
                        .iter()
                        .map(|&w| st.decision_round[w])
                        .try_fold(0usize, |acc, d| d.map(|d| acc.max(d)));
                    match time {
                        Some(t) => self.params.ball_payoff(&self.hoods, &st.labels, v, t),
                        None => 0.0,
                    }
                })
                .collect();
            if done {
                self.tree.terminal(parent, payoffs)?;
            } else {
                self.tree.horizon(parent, payoffs)?;
            }
            return Ok(());
        }
        self.round(parent, st, r + 1)
    }
}

/// Builds the game of rounds `0..=horizon` on a finite graph distribution.
/// A single graph yields no chance node.
pub fn build_lcl_game(
    params: &GameParams,
    graphs: &[(Graph, f64)],
    budget: usize,
) -> Result<LclGame, GameError> {
    params.validate()?;
    let n = match graphs.first() {
        Some((g, _)) => g.n(),
        None => return Err(GameError::NoGraphs),
    };
    if graphs.iter().any(|(g, _)| g.n() != n) {
        return Err(GameError::PlayerCountMismatch);
    }
    let mut tree = TreeBuilder::with_budget(n, budget);
    let root_parent = if graphs.len() > 1 {
        let root = tree.chance(None, graphs.iter().map(|(_, p)| *p).collect())?;
        Some(root)
    } else {
        None
    };
    for (gi, (graph, _)) in graphs.iter().enumerate() {
        let mut b = Builder {
            params,
            graph,
            hoods: Neighborhoods::new(graph, params.lang.radius()),
            tree,
            all: params.lang.actions(),
        };
        let st = State {
            labels: vec![None; n],
            decided: vec![false; n],
            decision_round: vec![None; n],
            hist: vec![Vec::new(); n],
            proposals: vec![None; n],
        };
        b.round(root_parent.map(|r| (r, gi)), st, 0)?;
        tree = b.tree;
    }
    Ok(LclGame {
        params: params.clone(),
        graphs: graphs.to_vec(),
        tree: tree.build()?,
    })
}
