//! LCL languages: good-ball predicates, partial goodness, action
//! availability and the end-of-round termination rule.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{BallShape, BallView, Graph};
use crate::Action;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LangError {
    #[error("unknown language `{0}` (expected mis, coloring:Q or cc)")]
    Unknown(String),
    #[error("coloring needs q >= 2, got {0}")]
    TooFewColors(usize),
    #[error("ball around vertex {center} has undecided labels")]
    Unlabeled { center: usize },
    #[error("no compatible action for vertex {vertex}")]
    NoCompatibleAction { vertex: usize },
    #[error("greedy check needs {needed} labelings, budget is {budget}")]
    BudgetExceeded { needed: u128, budget: u128 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LanguageKind {
    /// Maximal independent set over `{0, 1}`.
    Mis,
    /// Proper coloring with colors `1..=q`.
    Coloring { q: usize },
    /// Proper coloring over `{G, R, B}`; red carries a low preference.
    ConstrainedColoring,
}

/// A radius-1 built-in LCL language.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LclLanguage {
    kind: LanguageKind,
    alphabet: Vec<String>,
    radius: usize,
}

impl LclLanguage {
    pub fn builtin(kind: LanguageKind) -> Result<Self, LangError> {
        let alphabet = match kind {
            LanguageKind::Mis => vec!["0".to_string(), "1".to_string()],
            LanguageKind::Coloring { q } if q < 2 => return Err(LangError::TooFewColors(q)),
            LanguageKind::Coloring { q } => (1..=q).map(|c| c.to_string()).collect(),
            LanguageKind::ConstrainedColoring => {
                vec!["G".to_string(), "R".to_string(), "B".to_string()]
            }
        };
        Ok(LclLanguage {
            kind,
            alphabet,
            radius: 1,
        })
    }

    pub fn mis() -> Self {
        Self::builtin(LanguageKind::Mis).expect("mis is valid")
    }

    pub fn coloring(q: usize) -> Result<Self, LangError> {
        Self::builtin(LanguageKind::Coloring { q })
    }

    pub fn constrained_coloring() -> Self {
        Self::builtin(LanguageKind::ConstrainedColoring).expect("cc is valid")
    }

    pub fn kind(&self) -> LanguageKind {
        self.kind
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet.len()
    }

    pub fn actions(&self) -> Vec<Action> {
        (0..self.alphabet.len() as Action).collect()
    }

    pub fn symbol(&self, a: Action) -> &str {
        &self.alphabet[a as usize]
    }

    pub fn action(&self, symbol: &str) -> Option<Action> {
        self.alphabet
            .iter()
            .position(|s| s == symbol)
            .map(|i| i as Action)
    }

    /// Renders a label sequence, `_` standing for ⊥.
    pub fn render(&self, labels: &[Option<Action>]) -> String {
        let sep = if self.alphabet.iter().all(|s| s.len() == 1) {
            ""
        } else {
            ","
        };
        labels
            .iter()
            .map(|l| l.map_or("_", |a| self.symbol(a)))
            .collect::<Vec<_>>()
            .join(sep)
    }

    /// The predicate on a fully labeled ball.
    fn good_complete(&self, view: &BallView<'_>) -> bool {
        let center = match view.center_label() {
            Some(c) => c,
            None => return false,
        };
        match self.kind {
            LanguageKind::Mis => {
                if center == 1 {
                    view.neighbor_labels().all(|l| l == Some(0))
                } else {
                    view.neighbor_labels().any(|l| l == Some(1))
                }
            }
            LanguageKind::Coloring { .. } | LanguageKind::ConstrainedColoring => {
                view.neighbor_labels().all(|l| l != Some(center))
            }
        }
    }

    pub fn is_good(&self, view: &BallView<'_>) -> Result<bool, LangError> {
        if !view.is_complete() {
            return Err(LangError::Unlabeled {
                center: view.shape.center,
            });
        }
        Ok(self.good_complete(view))
    }

    /// True iff some assignment of alphabet values to the ⊥ positions yields
    /// a good ball. Enumerates `|A|^{#⊥}` completions, stopping early.
    pub fn is_partially_good(&self, view: &BallView<'_>) -> bool {
        let holes: Vec<usize> = (0..view.labels.len())
            .filter(|&i| view.labels[i].is_none())
            .collect();
        if holes.is_empty() {
            return self.good_complete(view);
        }
        let mut labels = view.labels.to_vec();
        let q = self.alphabet.len() as Action;
        let mut digits = vec![0 as Action; holes.len()];
        loop {
            for (&h, &d) in holes.iter().zip(&digits) {
                labels[h] = Some(d);
            }
            let filled = BallView {
                shape: view.shape,
                labels: &labels,
            };
            if self.good_complete(&filled) {
                return true;
            }
            if !advance(&mut digits, q) {
                return false;
            }
        }
    }

    /// Actions `a` such that a good ball around the center agrees with the
    /// labels of inactive ball vertices and assigns `a` to the center.
    /// `fixed` holds the labels of inactive vertices (⊥ elsewhere) aligned
    /// with `shape.vertices`.
    pub fn compatible_in_ball(&self, shape: &BallShape, fixed: &[Option<Action>]) -> Vec<Action> {
        let mut labels = fixed.to_vec();
        let mut out = Vec::new();
        for a in 0..self.alphabet.len() as Action {
            labels[shape.center_index] = Some(a);
            let view = BallView {
                shape,
                labels: &labels,
            };
            if self.is_partially_good(&view) {
                out.push(a);
            }
        }
        out
    }

    /// Compatible actions of active vertex `v` given the inactive set.
    /// `labels` is a global labeling; only labels of inactive vertices are read.
    pub fn compatible_actions(
        &self,
        graph: &Graph,
        labels: &[Option<Action>],
        v: usize,
        inactive: &[bool],
    ) -> Result<Vec<Action>, LangError> {
        let shape = graph.ball_shape(v, self.radius);
        let fixed: Vec<Option<Action>> = shape
            .vertices
            .iter()
            .map(|&w| if inactive[w] && w != v { labels[w] } else { None })
            .collect();
        let out = self.compatible_in_ball(&shape, &fixed);
        if out.is_empty() {
            Err(LangError::NoCompatibleAction { vertex: v })
        } else {
            Ok(out)
        }
    }
}

impl fmt::Display for LclLanguage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            LanguageKind::Mis => write!(f, "mis"),
            LanguageKind::Coloring { q } => write!(f, "coloring:{q}"),
            LanguageKind::ConstrainedColoring => write!(f, "cc"),
        }
    }
}

impl FromStr for LclLanguage {
    type Err = LangError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        match s {
            "mis" => Ok(Self::mis()),
            "cc" | "constrained_coloring" => Ok(Self::constrained_coloring()),
            _ => {
                let q = s
                    .strip_prefix("coloring:")
                    .and_then(|q| q.parse::<usize>().ok())
                    .ok_or_else(|| LangError::Unknown(s.to_string()))?;
                Self::coloring(q)
            }
        }
    }
}

impl Serialize for LclLanguage {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for LclLanguage {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Odometer increment over base `q`; false once every digit wrapped.
pub(crate) fn advance(digits: &mut [Action], q: Action) -> bool {
    for d in digits.iter_mut() {
        *d += 1;
        if *d < q {
            return true;
        }
        *d = 0;
    }
    false
}

/// Radius-t ball shapes of every vertex, computed once per graph.
#[derive(Clone, Debug)]
pub struct Neighborhoods {
    pub shapes: Vec<BallShape>,
}

impl Neighborhoods {
    pub fn new(graph: &Graph, radius: usize) -> Self {
        Neighborhoods {
            shapes: (0..graph.n()).map(|v| graph.ball_shape(v, radius)).collect(),
        }
    }

    pub fn shape(&self, v: usize) -> &BallShape {
        &self.shapes[v]
    }
}

/// Decides which still-active vertices terminate at the end of a round.
///
/// `labels` holds the decided labels of inactive vertices and this round's
/// proposals for active ones (⊥ for a vertex that abstained). A vertex is a
/// candidate when it proposed a value and its ball is (partially) good. A
/// candidate terminates only if its ball stays good for every continuation
/// in which the remaining active ball vertices pick compatible actions; the
/// terminating set is the largest candidate subset with that property. For
/// coloring-type languages this coincides with plain goodness. For MIS it
/// means a vertex settles on 0 only next to a vertex that has settled on 1.
pub fn settle(
    lang: &LclLanguage,
    hoods: &Neighborhoods,
    labels: &[Option<Action>],
    decided: &[bool],
) -> Vec<usize> {
    let n = labels.len();
    let mut scratch = Vec::new();
    let mut joining: Vec<bool> = (0..n)
        .map(|v| {
            if decided[v] || labels[v].is_none() {
                return false;
            }
            let shape = hoods.shape(v);
            scratch.clear();
            scratch.extend(shape.vertices.iter().map(|&w| labels[w]));
            lang.is_partially_good(&BallView {
                shape,
                labels: &scratch,
            })
        })
        .collect();
    loop {
        let fixed: Vec<bool> = (0..n).map(|v| decided[v] || joining[v]).collect();
        let mut cache: HashMap<usize, Vec<Action>> = HashMap::new();
        let mut changed = false;
        for v in 0..n {
            if joining[v] && !stays_good(lang, hoods, labels, &fixed, v, &mut cache) {
                joining[v] = false;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    (0..n).filter(|&v| joining[v]).collect()
}

/// Whether the ball of fixed vertex `v` is good under every assignment of
/// compatible actions to the non-fixed vertices of the ball.
pub(crate) fn stays_good(
    lang: &LclLanguage,
    hoods: &Neighborhoods,
    labels: &[Option<Action>],
    fixed: &[bool],
    v: usize,
    cache: &mut HashMap<usize, Vec<Action>>,
) -> bool {
    let shape = hoods.shape(v);
    let free: Vec<usize> = (0..shape.len())
        .filter(|&i| !fixed[shape.vertices[i]])
        .collect();
    let mut options = Vec::with_capacity(free.len());
    for &i in &free {
        let w = shape.vertices[i];
        let compat = cache.entry(w).or_insert_with(|| {
            let ws = hoods.shape(w);
            let local: Vec<Option<Action>> = ws
                .vertices
                .iter()
                .map(|&x| if fixed[x] && x != w { labels[x] } else { None })
                .collect();
            lang.compatible_in_ball(ws, &local)
        });
        if compat.is_empty() {
            return true;
        }
        options.push(compat.clone());
    }
    let mut local: Vec<Option<Action>> = shape
        .vertices
        .iter()
        .map(|&w| if fixed[w] { labels[w] } else { None })
        .collect();
    let mut idx = vec![0usize; free.len()];
    loop {
        for (k, &i) in free.iter().enumerate() {
            local[i] = Some(options[k][idx[k]]);
        }
        let view = BallView {
            shape,
            labels: &local,
        };
        if !lang.good_complete(&view) {
            return false;
        }
        let mut k = 0;
        loop {
            if k == idx.len() {
                return true;
            }
            idx[k] += 1;
            if idx[k] < options[k].len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

/// Which greedy-constructibility condition failed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GreedyViolation {
    NoExtensionProgress,
    BadExtension,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GreedyWitness {
    pub partial: Vec<Option<Action>>,
    pub violation: GreedyViolation,
    pub extension: Option<Vec<Action>>,
    /// Labeling after the extension step, for `BadExtension`.
    pub result: Option<Vec<Option<Action>>>,
    /// A vertex whose ball is not partially good afterwards.
    pub offending_vertex: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum GreedyOutcome {
    Ok { partial_labelings_checked: u64 },
    Witness(GreedyWitness),
}

/// Applies an extension of `partial` and returns the labeling in which only
/// the newly terminating vertices keep their extension values.
pub fn extension_step(
    lang: &LclLanguage,
    hoods: &Neighborhoods,
    partial: &[Option<Action>],
    extension: &[Action],
) -> Vec<Option<Action>> {
    let decided: Vec<bool> = partial.iter().map(Option::is_some).collect();
    let full: Vec<Option<Action>> = extension.iter().map(|&a| Some(a)).collect();
    let mut next = partial.to_vec();
    for v in settle(lang, hoods, &full, &decided) {
        next[v] = full[v];
    }
    next
}

fn first_bad_ball(
    lang: &LclLanguage,
    hoods: &Neighborhoods,
    labels: &[Option<Action>],
) -> Option<usize> {
    (0..labels.len()).find(|&v| {
        let shape = hoods.shape(v);
        let local = shape.gather(labels);
        !lang.is_partially_good(&BallView {
            shape,
            labels: &local,
        })
    })
}

/// Whether a partial labeling is admissible: every ball partially good and
/// every decided vertex's ball stays good whatever the undecided vertices
/// later choose among their compatible actions.
pub fn is_admissible_partial(
    lang: &LclLanguage,
    hoods: &Neighborhoods,
    labels: &[Option<Action>],
) -> bool {
    if first_bad_ball(lang, hoods, labels).is_some() {
        return false;
    }
    let fixed: Vec<bool> = labels.iter().map(Option::is_some).collect();
    let mut cache = HashMap::new();
    (0..labels.len())
        .filter(|&v| fixed[v])
        .all(|v| stays_good(lang, hoods, labels, &fixed, v, &mut cache))
}

impl GreedyWitness {
    /// Re-derives the violation from the stored labelings.
    pub fn replay(&self, lang: &LclLanguage, graph: &Graph) -> bool {
        let hoods = Neighborhoods::new(graph, lang.radius());
        let undecided: Vec<usize> = (0..self.partial.len())
            .filter(|&v| self.partial[v].is_none())
            .collect();
        match self.violation {
            GreedyViolation::BadExtension => {
                let Some(ext) = &self.extension else {
                    return false;
                };
                let next = extension_step(lang, &hoods, &self.partial, ext);
                next != self.partial && first_bad_ball(lang, &hoods, &next).is_some()
            }
            GreedyViolation::NoExtensionProgress => {
                let q = lang.alphabet_size() as Action;
                let mut digits = vec![0 as Action; undecided.len()];
                loop {
                    let mut ext: Vec<Action> =
                        self.partial.iter().map(|l| l.unwrap_or(0)).collect();
                    for (&v, &d) in undecided.iter().zip(&digits) {
                        ext[v] = d;
                    }
                    if extension_step(lang, &hoods, &self.partial, &ext) != self.partial {
                        return false;
                    }
                    if !advance(&mut digits, q) {
                        return true;
                    }
                }
            }
        }
    }
}

/// Exhaustively checks both greedy-constructibility conditions on `graph`
/// over every admissible partial labeling with at least one ⊥.
pub fn check_greedy_constructible(
    lang: &LclLanguage,
    graph: &Graph,
    budget: u128,
) -> Result<GreedyOutcome, LangError> {
    let n = graph.n();
    let q = lang.alphabet_size() as Action;
    let needed = (q as u128 + 1).checked_pow(n as u32).unwrap_or(u128::MAX);
    if needed > budget {
        return Err(LangError::BudgetExceeded { needed, budget });
    }
    let hoods = Neighborhoods::new(graph, lang.radius());
    // digit q encodes ⊥
    let mut digits = vec![0 as Action; n];
    let mut checked = 0u64;
    loop {
        let partial: Vec<Option<Action>> = digits
            .iter()
            .map(|&d| if d == q { None } else { Some(d) })
            .collect();
        let undecided: Vec<usize> = (0..n).filter(|&v| partial[v].is_none()).collect();
        if !undecided.is_empty() && is_admissible_partial(lang, &hoods, &partial) {
            checked += 1;
            if let Some(w) = check_extensions(lang, &hoods, &partial, &undecided) {
                return Ok(GreedyOutcome::Witness(w));
            }
        }
        if !advance(&mut digits, q + 1) {
            break;
        }
    }
    Ok(GreedyOutcome::Ok {
        partial_labelings_checked: checked,
    })
}

fn check_extensions(
    lang: &LclLanguage,
    hoods: &Neighborhoods,
    partial: &[Option<Action>],
    undecided: &[usize],
) -> Option<GreedyWitness> {
    let q = lang.alphabet_size() as Action;
    let mut digits = vec![0 as Action; undecided.len()];
    let mut progressed = false;
    loop {
        let mut ext: Vec<Action> = partial.iter().map(|l| l.unwrap_or(0)).collect();
        for (&v, &d) in undecided.iter().zip(&digits) {
            ext[v] = d;
        }
        let next = extension_step(lang, hoods, partial, &ext);
        if next != partial {
            progressed = true;
            if let Some(bad) = first_bad_ball(lang, hoods, &next) {
                return Some(GreedyWitness {
                    partial: partial.to_vec(),
                    violation: GreedyViolation::BadExtension,
                    extension: Some(ext),
                    result: Some(next),
                    offending_vertex: Some(bad),
                });
            }
        }
        if !advance(&mut digits, q) {
            break;
        }
    }
    (!progressed).then(|| GreedyWitness {
        partial: partial.to_vec(),
        violation: GreedyViolation::NoExtensionProgress,
        extension: None,
        result: None,
        offending_vertex: None,
    })
}
