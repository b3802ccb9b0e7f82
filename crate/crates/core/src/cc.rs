//! The two-player constrained-coloring game on K₂: closed-form payoffs
//! of the `s^l` family and certificates checked against the game engine.
//!
//! Actions are `G = 0`, `R = 1`, `B = 2`. Both players always receive the
//! same payoff, so `Π(s, s')` is stated for either of them.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::game::{GameError, GameParams, MarkovProfile, MarkovStrategy, RoundModel};
use crate::graph::{make_family, Family};
use crate::lang::LclLanguage;
use crate::pref::Preference;
use crate::Action;

pub const G: Action = 0;
pub const R: Action = 1;
pub const B: Action = 2;

const EPS: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum CcError {
    #[error("delta must lie in (0, 1), got {0}")]
    BadDelta(f64),
    #[error("k must be at least 1")]
    BadK,
    #[error("strategy: {0}")]
    BadStrategy(String),
    #[error(transparent)]
    Game(#[from] GameError),
}

/// A round index or "never".
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Round {
    Finite(usize),
    Never,
}

impl Round {
    /// `base^round`, with `base^∞ = 0`.
    pub fn pow(self, base: f64) -> f64 {
        match self {
            Round::Finite(t) => base.powi(t as i32),
            Round::Never => 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "cycle", rename_all = "snake_case")]
pub enum CcTail {
    /// `(G + B) / 2` forever.
    UniformGb,
    /// The last prefix action forever.
    RepeatLast,
    Periodic(Vec<Action>),
}

/// A fixed action sequence followed by a tail; depends only on the round.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CcPureStrategy {
    pub prefix: Vec<Action>,
    pub tail: CcTail,
}

fn letter(a: Action) -> char {
    match a {
        G => 'G',
        R => 'R',
        _ => 'B',
    }
}

impl fmt::Display for CcPureStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p: String = self.prefix.iter().map(|&a| letter(a)).collect();
        match &self.tail {
            CcTail::UniformGb => write!(f, "{p}+(G+B)/2"),
            CcTail::RepeatLast => write!(f, "{p}+repeat"),
            CcTail::Periodic(c) => write!(f, "{p}+({})*", c.iter().map(|&a| letter(a)).collect::<String>()),
        }
    }
}

/// Distribution over `{G, R, B}` at one round.
type Mix = [f64; 3];

fn pure(a: Action) -> Mix {
    let mut m = [0.0; 3];
    m[a as usize] = 1.0;
    m
}

const GB: Mix = [0.5, 0.0, 0.5];

impl CcPureStrategy {
    pub fn new(prefix: Vec<Action>, tail: CcTail) -> Result<Self, CcError> {
        let s = CcPureStrategy { prefix, tail };
        s.validate()?;
        Ok(s)
    }

    /// `s^l`: R for `l` rounds, then uniform over {G, B}.
    pub fn s(l: usize) -> Self {
        CcPureStrategy {
            prefix: vec![R; l],
            tail: CcTail::UniformGb,
        }
    }

    pub fn validate(&self) -> Result<(), CcError> {
        let bad = |m: &str| Err(CcError::BadStrategy(m.to_string()));
        if self.prefix.iter().any(|&a| a > B) {
            return bad("prefix action outside {G, R, B}");
        }
        match &self.tail {
            CcTail::RepeatLast if self.prefix.is_empty() => bad("repeat-last needs a prefix"),
            CcTail::Periodic(c) if c.is_empty() || c.iter().any(|&a| a > B) => bad("bad cycle"),
            _ => Ok(()),
        }
    }

    /// What the strategy plays at round `r`.
    fn at(&self, r: usize) -> Mix {
        if let Some(&a) = self.prefix.get(r) {
            return pure(a);
        }
        match &self.tail {
            CcTail::UniformGb => GB,
            CcTail::RepeatLast => pure(*self.prefix.last().expect("validated")),
            CcTail::Periodic(c) => pure(c[(r - self.prefix.len()) % c.len()]),
        }
    }

    /// Rounds after which the strategy is periodic with one of these
    /// patterns; enough to find first occurrences.
    fn scan_len(&self) -> usize {
        self.prefix.len()
            + match &self.tail {
                CcTail::Periodic(c) => c.len(),
                _ => 1,
            }
    }

    fn first(&self, pred: impl Fn(&Mix) -> bool) -> Round {
        (0..self.scan_len())
            .find(|&r| pred(&self.at(r)))
            .map_or(Round::Never, Round::Finite)
    }

    /// First round at which R is played.
    pub fn first_red(&self) -> Round {
        self.first(|m| m[R as usize] > 0.0)
    }

    /// First round at which only G or B is played.
    pub fn first_gb(&self) -> Round {
        self.first(|m| m[R as usize] == 0.0)
    }

    /// The strategy from round `k` on, `s_{|k}`.
    pub fn shifted(&self, k: usize) -> Self {
        if k <= self.prefix.len() {
            return CcPureStrategy {
                prefix: self.prefix[k..].to_vec(),
                tail: match (&self.tail, k == self.prefix.len()) {
                    (CcTail::RepeatLast, true) => CcTail::Periodic(vec![*self.prefix.last().expect("validated")]),
                    (t, _) => t.clone(),
                },
            };
        }
        match &self.tail {
            CcTail::UniformGb => CcPureStrategy::s(0),
            CcTail::RepeatLast => CcPureStrategy {
                prefix: vec![],
                tail: CcTail::Periodic(vec![*self.prefix.last().expect("validated")]),
            },
            CcTail::Periodic(c) => {
                let off = (k - self.prefix.len()) % c.len();
                let mut rot = c[off..].to_vec();
                rot.extend_from_slice(&c[..off]);
                CcPureStrategy {
                    prefix: vec![],
                    tail: CcTail::Periodic(rot),
                }
            }
        }
    }

    /// Round-indexed strategy for the engine, covering rounds `0..=horizon`.
    pub fn to_markov(&self, horizon: usize) -> MarkovStrategy {
        MarkovStrategy::per_round((0..=horizon).map(|r| self.at(r).to_vec()).collect())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CcPayoffs {
    /// Payoff when one player is G and the other B.
    pub gb: f64,
    /// Payoff when a player is R.
    pub red: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CcParams {
    pub delta: f64,
    pub k: u32,
    pub payoffs: CcPayoffs,
}

impl CcParams {
    /// Standard payoffs `2 − δ` and `δ^k`.
    pub fn new(delta: f64, k: u32) -> Result<Self, CcError> {
        Self::with_payoffs(
            delta,
            k,
            CcPayoffs {
                gb: 2.0 - delta,
                red: delta.powi(k as i32),
            },
        )
    }

    /// Arbitrary payoff constants, e.g. a corrupted table for negative
    /// controls. The closed forms always use the standard constants.
    pub fn with_payoffs(delta: f64, k: u32, payoffs: CcPayoffs) -> Result<Self, CcError> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(CcError::BadDelta(delta));
        }
        if k == 0 {
            return Err(CcError::BadK);
        }
        Ok(CcParams { delta, k, payoffs })
    }

    pub fn dk(&self) -> f64 {
        self.delta.powi(self.k as i32)
    }

    pub fn bound(&self) -> f64 {
        self.payoffs.gb.max(self.payoffs.red)
    }

    pub fn game_params(&self, horizon: usize) -> GameParams {
        GameParams {
            lang: LclLanguage::constrained_coloring(),
            pref: Preference::RedPenalty {
                plain: self.payoffs.gb,
                red: self.payoffs.red,
            },
            delta: self.delta,
            horizon,
        }
    }

    /// The K₂ game merged by rounds.
    pub fn model(&self, horizon: usize) -> Result<RoundModel, CcError> {
        let k2 = make_family(&Family::K2).expect("k2 is valid");
        Ok(RoundModel::new(self.game_params(horizon), k2)?)
    }

    /// `δ^T · M`.
    pub fn tail(&self, horizon: usize) -> f64 {
        self.delta.powi(horizon as i32) * self.bound()
    }
}

/// `Π(s⁰, s) = Π(s, s⁰) = 1 − (δ/2)^t (1 − δ^k)`, `t` the first R round.
pub fn payoff_vs_s0(s: &CcPureStrategy, params: &CcParams) -> f64 {
    1.0 - s.first_red().pow(params.delta / 2.0) * (1.0 - params.dk())
}

/// `Π(s, s^k)` by cases on the first G/B round `t'` of `s`.
pub fn payoff_vs_sk(s: &CcPureStrategy, params: &CcParams) -> f64 {
    let k = params.k as usize;
    let d = params.delta;
    match s.first_gb() {
        Round::Finite(t) if t < k => d.powi((t + k) as i32),
        Round::Finite(t) if t == k => params.dk() * payoff_vs_s0(&s.shifted(k), params),
        _ => d.powi(2 * k as i32),
    }
}

/// `P(converged within r rounds) = 1 − 2^{−r}` under `(s⁰, s⁰)`.
pub fn convergence_law(r: u32) -> f64 {
    1.0 - 0.5f64.powi(r as i32)
}

/// Engine value of `Π(first, second)` for the player using `first`.
pub fn engine_payoff(
    model: &RoundModel,
    first: &CcPureStrategy,
    second: &CcPureStrategy,
) -> Result<f64, CcError> {
    let h = model.params.horizon;
    let profile = MarkovProfile {
        players: vec![first.to_markov(h), second.to_markov(h)],
    };
    Ok(model.expected_payoff(&profile)?.values[0])
}

/// Every strategy with a prefix of length at most `max_len` and a
/// uniform-GB or repeat-last tail.
pub fn enumerate_strategies(max_len: usize) -> Vec<CcPureStrategy> {
    let mut out = Vec::new();
    let mut layer: Vec<Vec<Action>> = vec![vec![]];
    for len in 0..=max_len {
        for p in &layer {
            out.push(CcPureStrategy {
                prefix: p.clone(),
                tail: CcTail::UniformGb,
            });
            if len > 0 {
                out.push(CcPureStrategy {
                    prefix: p.clone(),
                    tail: CcTail::RepeatLast,
                });
            }
        }
        layer = layer
            .iter()
            .flat_map(|p| {
                [G, R, B].into_iter().map(move |a| {
                    let mut q = p.clone();
                    q.push(a);
                    q
                })
            })
            .collect();
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// `lhs ≤ rhs + tolerance`
    AtMost,
    /// `lhs ≥ rhs − tolerance`
    AtLeast,
    /// `|lhs − rhs| ≤ tolerance`
    Equal,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub description: String,
    pub relation: Relation,
    pub lhs: f64,
    pub rhs: f64,
    pub tolerance: f64,
    pub holds: bool,
}

impl Check {
    pub fn new(description: String, relation: Relation, lhs: f64, rhs: f64, tolerance: f64) -> Self {
        let holds = match relation {
            Relation::AtMost => lhs <= rhs + tolerance,
            Relation::AtLeast => lhs >= rhs - tolerance,
            Relation::Equal => (lhs - rhs).abs() <= tolerance,
        };
        Check {
            description,
            relation,
            lhs,
            rhs,
            tolerance,
            holds,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub claim: String,
    pub params: CcParams,
    pub horizon: usize,
    pub depth: usize,
    pub tail_bound: f64,
    pub checks: Vec<Check>,
    pub passed: bool,
    /// Description of the first failing check.
    pub counterexample: Option<String>,
}

impl Certificate {
    fn new(claim: &str, params: &CcParams, horizon: usize, depth: usize, checks: Vec<Check>) -> Self {
        let counterexample = checks.iter().find(|c| !c.holds).map(|c| c.description.clone());
        Certificate {
            claim: claim.to_string(),
            params: *params,
            horizon,
            depth,
            tail_bound: params.tail(horizon),
            passed: counterexample.is_none(),
            checks,
            counterexample,
        }
    }
}

/// Closed forms against the engine for every enumerated strategy.
pub fn closed_form_checks(params: &CcParams, horizon: usize, max_len: usize) -> Result<Vec<Check>, CcError> {
    let model = params.model(horizon)?;
    let tol = params.tail(horizon) + EPS;
    let s0 = CcPureStrategy::s(0);
    let sk = CcPureStrategy::s(params.k as usize);
    let mut checks = Vec::new();
    for s in enumerate_strategies(max_len) {
        checks.push(Check::new(
            format!("engine Π({s}, s⁰) = 1 − (δ/2)^t(1 − δ^k)"),
            Relation::Equal,
            engine_payoff(&model, &s, &s0)?,
            payoff_vs_s0(&s, params),
            tol,
        ));
        checks.push(Check::new(
            format!("engine Π({s}, s^k) by cases on t'"),
            Relation::Equal,
            engine_payoff(&model, &s, &sk)?,
            payoff_vs_sk(&s, params),
            tol,
        ));
    }
    Ok(checks)
}

/// `(s^k, s^k)` is a Nash equilibrium: no enumerated deviation (prefix up
/// to `depth`) and no best response of the truncated game gains more
/// than the tail bound.
pub fn verify_fact3(params: &CcParams, horizon: usize, depth: usize) -> Result<Certificate, CcError> {
    let model = params.model(horizon)?;
    let tail = params.tail(horizon);
    let sk = CcPureStrategy::s(params.k as usize);
    let eq_value = engine_payoff(&model, &sk, &sk)?;
    let mut checks = vec![Check::new(
        "engine Π(s^k, s^k) = δ^k".into(),
        Relation::Equal,
        eq_value,
        params.dk(),
        tail + EPS,
    )];
    for s in enumerate_strategies(depth) {
        let dev = engine_payoff(&model, &s, &sk)?;
        checks.push(Check::new(
            format!("Π({s}, s^k) ≤ Π(s^k, s^k)"),
            Relation::AtMost,
            dev,
            eq_value,
            tail + EPS,
        ));
        checks.push(Check::new(
            format!("engine Π({s}, s^k) matches closed form"),
            Relation::Equal,
            dev,
            payoff_vs_sk(&s, params),
            tail + EPS,
        ));
    }
    let profile = MarkovProfile {
        players: vec![sk.to_markov(horizon), sk.to_markov(horizon)],
    };
    for player in 0..2 {
        let br = model.best_response(player, &profile, None)?;
        checks.push(Check::new(
            format!("best response of player {player} against s^k gains nothing"),
            Relation::AtMost,
            br.value,
            eq_value,
            tail + EPS,
        ));
    }
    Ok(Certificate::new("(s^k, s^k) is a Nash equilibrium", params, horizon, depth, checks))
}

/// `s^k` is weakly dominated by `s⁰`, strictly against `s⁰` itself.
pub fn verify_fact4(params: &CcParams, horizon: usize, depth: usize) -> Result<Certificate, CcError> {
    let model = params.model(horizon)?;
    let tail = params.tail(horizon);
    let s0 = CcPureStrategy::s(0);
    let sk = CcPureStrategy::s(params.k as usize);
    let dk = params.dk();
    let mut checks = Vec::new();
    for s in enumerate_strategies(depth) {
        let (a, b) = (payoff_vs_s0(&s, params), payoff_vs_sk(&s, params));
        checks.push(Check::new(format!("Π(s⁰, {s}) ≥ δ^k"), Relation::AtLeast, a, dk, EPS));
        checks.push(Check::new(format!("δ^k ≥ Π(s^k, {s})"), Relation::AtLeast, dk, b, EPS));
        let ea = engine_payoff(&model, &s0, &s)?;
        let eb = engine_payoff(&model, &sk, &s)?;
        checks.push(Check::new(
            format!("engine Π(s⁰, {s}) ≥ Π(s^k, {s})"),
            Relation::AtLeast,
            ea,
            eb,
            2.0 * tail + EPS,
        ));
    }
    let strict = engine_payoff(&model, &s0, &s0)? - engine_payoff(&model, &sk, &s0)?;
    checks.push(Check::new(
        "Π(s⁰, s⁰) − Π(s^k, s⁰) = 1 − δ^k".into(),
        Relation::Equal,
        strict,
        1.0 - dk,
        2.0 * tail + EPS,
    ));
    checks.push(Check::new(
        "strict gap at s⁰ is positive".into(),
        Relation::AtLeast,
        strict,
        2.0 * tail + EPS,
        0.0,
    ));
    Ok(Certificate::new("s^k is weakly dominated by s⁰", params, horizon, depth, checks))
}
