//! A round-merged evaluator for profiles whose local strategies depend
//! only on the round and on the decided labels a player can see.
//!
//! For such profiles the play from round `r` on depends only on which
//! vertices have decided and on what, so histories can be merged into
//! states. This keeps long horizons tractable where the explicit tree
//! grows exponentially.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::build::{view_key, GameParams};
use super::eval::PayoffReport;
use super::profile::{BehaviorProfile, PerturbationSpec};
use super::response::GapReport;
use super::tree::GameTree;
use super::GameError;
use crate::graph::Graph;
use crate::lang::{settle, Neighborhoods};
use crate::Action;

/// Wildcard view key matching any view.
pub const ANY_VIEW: &str = "*";

/// Local strategies indexed by round and view. Weights are over the whole
/// alphabet; at play time they are restricted to the available actions and
/// renormalized (uniform if no weight remains). Rounds past the last entry
/// reuse it; missing views play uniformly.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarkovStrategy {
    pub rounds: Vec<BTreeMap<String, Vec<f64>>>,
}

impl MarkovStrategy {
    pub fn per_round(dists: Vec<Vec<f64>>) -> Self {
        MarkovStrategy {
            rounds: dists
                .into_iter()
                .map(|d| [(ANY_VIEW.to_string(), d)].into_iter().collect())
                .collect(),
        }
    }

    pub fn stationary(dist: Vec<f64>) -> Self {
        Self::per_round(vec![dist])
    }

    /// Stored weights over the alphabet, if any.
    pub fn raw(&self, round: usize, view: &str) -> Option<&Vec<f64>> {
        let table = self.rounds.get(round.min(self.rounds.len().checked_sub(1)?))?;
        table.get(view).or_else(|| table.get(ANY_VIEW))
    }

    /// Probabilities aligned with `available`.
    pub fn distribution(&self, round: usize, view: &str, available: &[Action]) -> Vec<f64> {
        let raw: Vec<f64> = match self.raw(round, view) {
            Some(w) => available
                .iter()
                .map(|&a| w.get(a as usize).copied().unwrap_or(0.0).max(0.0))
                .collect(),
            None => vec![1.0; available.len()],
        };
        let total: f64 = raw.iter().sum();
        if total <= 0.0 {
            return vec![1.0 / available.len() as f64; available.len()];
        }
        if (total - 1.0).abs() <= 1e-12 {
            return raw;
        }
        raw.into_iter().map(|w| w / total).collect()
    }

    /// Convex combination `(1 − t)·self + t·other`, view by view.
    pub fn mix(&self, other: &MarkovStrategy, t: f64, alphabet: usize) -> MarkovStrategy {
        let len = self.rounds.len().max(other.rounds.len());
        let uniform = vec![1.0 / alphabet as f64; alphabet];
        let rounds = (0..len)
            .map(|r| {
                let mut keys: Vec<&String> = Vec::new();
                for s in [self, other] {
                    if let Some(table) = s.rounds.get(r.min(s.rounds.len().saturating_sub(1))) {
                        keys.extend(table.keys());
                    }
                }
                keys.sort();
                keys.dedup();
                keys.into_iter()
                    .map(|k| {
                        let a = self.raw(r, k).unwrap_or(&uniform);
                        let b = other.raw(r, k).unwrap_or(&uniform);
                        let w = a.iter().zip(b).map(|(x, y)| (1.0 - t) * x + t * y).collect();
                        (k.clone(), w)
                    })
                    .collect()
            })
            .collect();
        MarkovStrategy { rounds }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarkovProfile {
    pub players: Vec<MarkovStrategy>,
}

impl MarkovProfile {
    pub fn symmetric(strategy: MarkovStrategy, players: usize) -> Self {
        MarkovProfile {
            players: vec![strategy; players],
        }
    }

    /// The same profile as behavior strategies on an explicit tree.
    pub fn to_behavior(&self, tree: &GameTree) -> BehaviorProfile {
        BehaviorProfile::from_fn(tree, |u| {
            self.players[u.player].distribution(u.round, &u.view, &u.actions)
        })
    }

    /// Every stored weight respects the floors of `spec`.
    pub fn respects(&self, spec: &PerturbationSpec) -> bool {
        self.players.iter().all(|s| {
            s.rounds.iter().all(|t| {
                t.values().all(|w| {
                    let total: f64 = w.iter().sum();
                    w.iter()
                        .enumerate()
                        .all(|(a, p)| p / total >= spec.floor(a as Action) - 1e-9)
                })
            })
        })
    }
}

/// Decided labels; `None` for vertices still playing.
type State = Vec<Option<Action>>;

/// One outcome of a round from a given state.
struct Transition {
    prob: f64,
    /// Index of `player`'s action among its available ones, if active.
    own: Option<usize>,
    next: State,
    /// Payoff credited to every player whose ball completed this round.
    rewards: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct RoundModel {
    pub params: GameParams,
    pub graph: Graph,
    hoods: Neighborhoods,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MarkovResponse {
    pub player: usize,
    pub strategy: MarkovStrategy,
    pub value: f64,
}

impl RoundModel {
    pub fn new(params: GameParams, graph: Graph) -> Result<Self, GameError> {
        params.validate()?;
        let hoods = Neighborhoods::new(&graph, params.lang.radius());
        Ok(RoundModel {
            params,
            graph,
            hoods,
        })
    }

    pub fn players(&self) -> usize {
        self.graph.n()
    }

    fn available(&self, state: &State, v: usize, round: usize) -> Result<Vec<Action>, GameError> {
        if round == 0 {
            return Ok(self.params.lang.actions());
        }
        let decided: Vec<bool> = state.iter().map(Option::is_some).collect();
        Ok(self.params.lang.compatible_actions(&self.graph, state, v, &decided)?)
    }

    fn view(&self, state: &State, v: usize) -> String {
        let decided: Vec<bool> = state.iter().map(Option::is_some).collect();
        view_key(&self.params.lang, &self.hoods, v, state, &decided)
    }

    fn ball_done(&self, state: &State, v: usize) -> bool {
        self.hoods.shape(v).vertices.iter().all(|&w| state[w].is_some())
    }

    /// All outcomes of round `round` from `state`. With `free = Some(i)`,
    /// player `i`'s actions are enumerated with weight 1 instead of drawn.
    fn transitions(
        &self,
        profile: &MarkovProfile,
        state: &State,
        round: usize,
        free: Option<usize>,
    ) -> Result<Vec<Transition>, GameError> {
        let n = self.players();
        let active: Vec<usize> = (0..n).filter(|&v| state[v].is_none()).collect();
        let mut options: Vec<(Vec<Action>, Vec<f64>)> = Vec::with_capacity(active.len());
        for &v in &active {
            let avail = self.available(state, v, round)?;
            let probs = if free == Some(v) {
                vec![1.0; avail.len()]
            } else {
                profile.players[v].distribution(round, &self.view(state, v), &avail)
            };
            options.push((avail, probs));
        }
        let decided: Vec<bool> = state.iter().map(Option::is_some).collect();
        let mut out = Vec::new();
        let mut idx = vec![0usize; active.len()];
        loop {
            let mut prob = 1.0;
            let mut proposals = state.clone();
            let mut own = None;
            for (k, &v) in active.iter().enumerate() {
                let (avail, probs) = &options[k];
                prob *= probs[idx[k]];
                proposals[v] = Some(avail[idx[k]]);
                if free == Some(v) {
                    own = Some(idx[k]);
                }
            }
            if prob > 0.0 {
                let mut next = state.clone();
                for v in settle(&self.params.lang, &self.hoods, &proposals, &decided) {
                    next[v] = proposals[v];
                }
                let rewards = (0..n)
                    .map(|v| {
                        if !self.ball_done(state, v) && self.ball_done(&next, v) {
                            self.params.ball_payoff(&self.hoods, &next, v, round)
                        } else {
                            0.0
                        }
                    })
                    .collect();
                out.push(Transition {
                    prob,
                    own,
                    next,
                    rewards,
                });
            }
            let mut k = 0;
            loop {
                if k == idx.len() {
                    return Ok(out);
                }
                idx[k] += 1;
                if idx[k] < options[k].0.len() {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
        }
    }

    fn is_final(state: &State) -> bool {
        state.iter().all(Option::is_some)
    }

    /// Expected payoffs of rounds `0..=horizon`, with the same lower
    /// bracket at the horizon as the explicit tree.
    pub fn expected_payoff(&self, profile: &MarkovProfile) -> Result<PayoffReport, GameError> {
        self.check_profile(profile)?;
        let n = self.players();
        let mut values = vec![0.0; n];
        let mut dist: BTreeMap<State, f64> = [(vec![None; n], 1.0)].into_iter().collect();
        for round in 0..=self.params.horizon {
            let mut next_dist: BTreeMap<State, f64> = BTreeMap::new();
            for (state, mass) in &dist {
                for t in self.transitions(profile, state, round, None)? {
                    let p = mass * t.prob;
                    for (v, r) in values.iter_mut().zip(&t.rewards) {
                        *v += p * r;
                    }
                    if !Self::is_final(&t.next) {
                        *next_dist.entry(t.next).or_insert(0.0) += p;
                    }
                }
            }
            dist = next_dist;
        }
        Ok(PayoffReport {
            values,
            horizon_mass: dist.values().sum(),
            tail_bound: self.params.tail_bound(),
        })
    }

    fn check_profile(&self, profile: &MarkovProfile) -> Result<(), GameError> {
        if profile.players.len() != self.players() {
            return Err(GameError::ProfileShape {
                key: format!("{} player strategies", profile.players.len()),
            });
        }
        Ok(())
    }

    /// Best response of a player who sees the whole graph, by backward
    /// induction over (round, state).
    pub fn best_response(
        &self,
        player: usize,
        profile: &MarkovProfile,
        spec: Option<&PerturbationSpec>,
    ) -> Result<MarkovResponse, GameError> {
        self.check_profile(profile)?;
        if self.hoods.shape(player).len() != self.players() {
            return Err(GameError::NotFullyObservable(player));
        }
        let n = self.players();
        let horizon = self.params.horizon;
        // states reachable at the start of each round, under any own play
        let mut layers: Vec<Vec<State>> = vec![vec![vec![None; n]]];
        for round in 0..horizon {
            let mut next: Vec<State> = Vec::new();
            for state in &layers[round] {
                for t in self.transitions(profile, state, round, Some(player))? {
                    if !Self::is_final(&t.next) {
                        next.push(t.next);
                    }
                }
            }
            next.sort();
            next.dedup();
            layers.push(next);
        }
        let mut value_next: BTreeMap<State, f64> = BTreeMap::new();
        let mut policy: Vec<BTreeMap<String, Vec<f64>>> = vec![BTreeMap::new(); horizon + 1];
        let alphabet = self.params.lang.alphabet_size();
        for round in (0..=horizon).rev() {
            let mut value_here = BTreeMap::new();
            for state in &layers[round] {
                let trans = self.transitions(profile, state, round, Some(player))?;
                let cont = |t: &Transition| t.rewards[player] + value_next.get(&t.next).copied().unwrap_or(0.0);
                let v = if state[player].is_some() {
                    trans.iter().map(|t| t.prob * cont(t)).sum()
                } else {
                    let avail = self.available(state, player, round)?;
                    let mut q = vec![0.0; avail.len()];
                    for t in &trans {
                        q[t.own.expect("active player moved")] += t.prob * cont(t);
                    }
                    let mut best = 0;
                    for (i, &x) in q.iter().enumerate() {
                        if x > q[best] + 1e-12 {
                            best = i;
                        }
                    }
                    let local = match spec {
                        Some(s) => s.tremble(&avail, best),
                        None => {
                            let mut l = vec![0.0; avail.len()];
                            l[best] = 1.0;
                            l
                        }
                    };
                    let mut full = vec![0.0; alphabet];
                    for (&a, &p) in avail.iter().zip(&local) {
                        full[a as usize] = p;
                    }
                    policy[round].insert(self.view(state, player), full);
                    local.iter().zip(&q).map(|(p, q)| p * q).sum()
                };
                value_here.insert(state.clone(), v);
            }
            value_next = value_here;
        }
        let value = value_next.get(&vec![None; n]).copied().unwrap_or(0.0);
        Ok(MarkovResponse {
            player,
            strategy: MarkovStrategy { rounds: policy },
            value,
        })
    }

    pub fn equilibrium_gap(
        &self,
        profile: &MarkovProfile,
        spec: Option<&PerturbationSpec>,
    ) -> Result<GapReport, GameError> {
        if let Some(s) = spec {
            if !profile.respects(s) {
                return Err(GameError::BelowFloor {
                    key: "markov profile".into(),
                });
            }
        }
        let values = self.expected_payoff(profile)?.values;
        let best_values = (0..self.players())
            .map(|i| self.best_response(i, profile, spec).map(|b| b.value))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(GapReport::from_values(values, best_values, self.params.tail_bound()))
    }
}
