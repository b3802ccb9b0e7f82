//! Synchronous round-based execution of the randomized construction
//! algorithm, discounted payoffs and a Monte Carlo harness.

pub mod strategy;

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{BallShape, BallView, Graph};
use crate::lang::{settle, LangError, LclLanguage, Neighborhoods};
use crate::pref::Preference;
use crate::rng::{trial_seed, StreamRng};
use crate::Action;

pub use strategy::{
    builtin_strategy, Choice, Distribution, ObservationHistory, SharedStrategy, Snapshot,
    Strategy, StrategyError,
};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("max_rounds must be at least 1")]
    ZeroRounds,
    #[error("expected {expected} strategies, got {got}")]
    StrategyCount { expected: usize, got: usize },
    #[error("round {round}: {source}")]
    Stuck { round: usize, source: LangError },
    #[error("trials must be at least 1")]
    ZeroTrials,
    #[error("thread pool: {0}")]
    Pool(String),
}

/// One executed round: what each active vertex drew and the state after
/// the termination rule ran.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    /// `None` for vertices that were already inactive.
    pub choices: Vec<Option<Choice>>,
    pub labels: Vec<Option<Action>>,
    pub decided: Vec<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub labels: Vec<Option<Action>>,
    pub decision_round: Vec<Option<usize>>,
    /// Latest decision round over each vertex's ball; `None` if any ball
    /// vertex is undecided.
    pub time: Vec<Option<usize>>,
    pub rounds: usize,
    pub terminated: bool,
    pub seed: u64,
    pub trace: Vec<RoundRecord>,
}

impl RunResult {
    /// Observation history of `v` through round `r`, rebuilt from the trace.
    pub fn observation(&self, shape: Arc<BallShape>, r: usize) -> ObservationHistory {
        let n = self.labels.len();
        let mut obs = ObservationHistory::new(shape.center, shape.clone());
        for round in 0..=r {
            let (labels, decided) = if round == 0 {
                (vec![None; n], vec![false; n])
            } else {
                let rec = &self.trace[round - 1];
                (rec.labels.clone(), rec.decided.clone())
            };
            obs.snapshots.push(Snapshot {
                labels: shape.gather(&labels),
                decided: shape.vertices.iter().map(|&w| decided[w]).collect(),
            });
        }
        obs
    }
}

/// Runs the algorithm until every vertex is inactive or `max_rounds`
/// rounds have been played.
pub fn run(
    graph: &Graph,
    lang: &LclLanguage,
    strategies: &[SharedStrategy],
    seed: u64,
    max_rounds: usize,
) -> Result<RunResult, SimError> {
    let hoods = Neighborhoods::new(graph, lang.radius());
    run_with(graph, lang, &hoods, strategies, seed, max_rounds)
}

pub(crate) fn run_with(
    graph: &Graph,
    lang: &LclLanguage,
    hoods: &Neighborhoods,
    strategies: &[SharedStrategy],
    seed: u64,
    max_rounds: usize,
) -> Result<RunResult, SimError> {
    let n = graph.n();
    if max_rounds == 0 {
        return Err(SimError::ZeroRounds);
    }
    if strategies.len() != n {
        return Err(SimError::StrategyCount {
            expected: n,
            got: strategies.len(),
        });
    }
    let shapes: Vec<Arc<BallShape>> = hoods.shapes.iter().cloned().map(Arc::new).collect();
    let mut obs: Vec<ObservationHistory> = (0..n)
        .map(|v| ObservationHistory::new(v, shapes[v].clone()))
        .collect();
    let mut labels: Vec<Option<Action>> = vec![None; n];
    let mut decided = vec![false; n];
    let mut decision_round = vec![None; n];
    let mut trace = Vec::new();
    let all = lang.actions();
    let mut rounds = 0;

    while rounds < max_rounds && decided.iter().any(|d| !d) {
        let r = rounds;
        let mut next = labels.clone();
        let mut choices = vec![None; n];
        for v in 0..n {
            if decided[v] {
                continue;
            }
            let shape = &shapes[v];
            obs[v].snapshots.push(Snapshot {
                labels: shape.gather(&labels),
                decided: shape.vertices.iter().map(|&w| decided[w]).collect(),
            });
            let available = if r == 0 {
                all.clone()
            } else {
                lang.compatible_actions(graph, &labels, v, &decided)
                    .map_err(|source| SimError::Stuck { round: r, source })?
            };
            let mut rng = StreamRng::new(seed, v, r);
            let choice = strategies[v].sample(&obs[v], &available, &mut rng);
            choices[v] = Some(choice);
            next[v] = match choice {
                Choice::Act(a) => Some(a),
                Choice::Abstain => None,
            };
        }
        for v in settle(lang, hoods, &next, &decided) {
            decided[v] = true;
            decision_round[v] = Some(r);
        }
        labels = next;
        trace.push(RoundRecord {
            choices,
            labels: labels.clone(),
            decided: decided.clone(),
        });
        rounds += 1;
    }

    let time = (0..n)
        .map(|v| {
            shapes[v]
                .vertices
                .iter()
                .map(|&w| decision_round[w])
                .try_fold(0usize, |acc, d| d.map(|d| acc.max(d)))
        })
        .collect();
    let terminated = decided.iter().all(|&d| d);
    Ok(RunResult {
        labels,
        decision_round,
        time,
        rounds,
        terminated,
        seed,
        trace,
    })
}

/// `δ^{time_v} · pref(ball_v)` for every vertex, 0 where the ball never
/// finished.
pub fn payoffs(
    graph: &Graph,
    lang: &LclLanguage,
    result: &RunResult,
    pref: &Preference,
    delta: f64,
) -> Vec<f64> {
    (0..graph.n())
        .map(|v| match result.time[v] {
            None => 0.0,
            Some(t) => {
                let shape = graph.ball_shape(v, lang.radius());
                let local = shape.gather(&result.labels);
                let view = BallView {
                    shape: &shape,
                    labels: &local,
                };
                delta.powi(t as i32) * pref.value(lang, &view)
            }
        })
        .collect()
}

/// True iff every ball of a complete labeling is good.
pub fn all_balls_good(graph: &Graph, lang: &LclLanguage, labels: &[Option<Action>]) -> bool {
    (0..graph.n()).all(|v| {
        let shape = graph.ball_shape(v, lang.radius());
        let local = shape.gather(labels);
        lang.is_good(&BallView {
            shape: &shape,
            labels: &local,
        })
        .unwrap_or(false)
    })
}

#[derive(Clone, Debug)]
pub struct MonteCarlo<'a> {
    pub graph: &'a Graph,
    pub lang: &'a LclLanguage,
    pub strategies: &'a [SharedStrategy],
    pub pref: &'a Preference,
    pub delta: f64,
    pub max_rounds: usize,
    pub jobs: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stats {
    pub trials: u64,
    pub base_seed: u64,
    pub horizon: usize,
    /// `histogram[r]` counts terminated trials that executed exactly `r`
    /// rounds (entry 0 stays empty).
    pub histogram: Vec<u64>,
    /// Empirical P(terminated within `r` rounds), indexed by `r`.
    pub p_leq_r: Vec<f64>,
    pub mean_payoffs: Vec<f64>,
    pub stderr: Vec<f64>,
    /// Trials still running at the horizon; their payoffs count as 0.
    pub censored: u64,
    /// Terminated trials whose final labeling had a bad ball.
    pub invalid: u64,
}

impl MonteCarlo<'_> {
    pub fn run(&self, trials: u64, base_seed: u64) -> Result<Stats, SimError> {
        if trials == 0 {
            return Err(SimError::ZeroTrials);
        }
        let hoods = Neighborhoods::new(self.graph, self.lang.radius());
        let one = |i: u64| -> Result<(usize, bool, bool, Vec<f64>), SimError> {
            let res = run_with(
                self.graph,
                self.lang,
                &hoods,
                self.strategies,
                trial_seed(base_seed, i),
                self.max_rounds,
            )?;
            let valid = !res.terminated || all_balls_good(self.graph, self.lang, &res.labels);
            let pay = payoffs(self.graph, self.lang, &res, self.pref, self.delta);
            Ok((res.rounds, res.terminated, valid, pay))
        };
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.jobs)
            .build()
            .map_err(|e| SimError::Pool(e.to_string()))?;
        let outcomes: Vec<_> = pool.install(|| {
            (0..trials)
                .into_par_iter()
                .map(one)
                .collect::<Result<Vec<_>, _>>()
        })?;

        let n = self.graph.n();
        let mut histogram = vec![0u64; self.max_rounds + 1];
        let mut censored = 0;
        let mut invalid = 0;
        let mut sum = vec![0.0; n];
        let mut sum_sq = vec![0.0; n];
        for (rounds, terminated, valid, pay) in &outcomes {
            if *terminated {
                histogram[*rounds] += 1;
            } else {
                censored += 1;
            }
            if !valid {
                invalid += 1;
            }
            for v in 0..n {
                sum[v] += pay[v];
                sum_sq[v] += pay[v] * pay[v];
            }
        }
        let t = trials as f64;
        let mut acc = 0;
        let p_leq_r = histogram
            .iter()
            .map(|&h| {
                acc += h;
                acc as f64 / t
            })
            .collect();
        let mean_payoffs: Vec<f64> = sum.iter().map(|s| s / t).collect();
        let stderr = (0..n)
            .map(|v| {
                if trials < 2 {
                    return 0.0;
                }
                let var = (sum_sq[v] - t * mean_payoffs[v] * mean_payoffs[v]) / (t - 1.0);
                (var.max(0.0) / t).sqrt()
            })
            .collect();
        Ok(Stats {
            trials,
            base_seed,
            horizon: self.max_rounds,
            histogram,
            p_leq_r,
            mean_payoffs,
            stderr,
            censored,
            invalid,
        })
    }
}
