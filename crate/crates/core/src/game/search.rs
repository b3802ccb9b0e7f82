//! Searching for equilibria of perturbed games on the round-merged model.
//!
//! Neither method is guaranteed to converge; failures return the gap
//! trajectory instead of a profile.

use serde::{Deserialize, Serialize};

use super::markov::{MarkovProfile, MarkovStrategy, RoundModel};
use super::profile::PerturbationSpec;
use super::response::GapReport;
use super::GameError;
use crate::Action;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum SearchMethod {
    /// Players replace (a `damping` share of) their strategy by a
    /// perturbed best response, one after the other.
    IteratedBestResponse { damping: f64 },
    /// Scans stationary symmetric profiles on a grid over the floored
    /// simplex with `resolution` steps per unit.
    SymmetricGrid { resolution: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum SearchOutcome {
    Converged {
        profile: MarkovProfile,
        gap: GapReport,
        iterations: usize,
    },
    Failed {
        /// Largest player gap after each iteration (or grid point).
        trajectory: Vec<f64>,
        last: MarkovProfile,
    },
}

impl SearchOutcome {
    pub fn profile(&self) -> Option<&MarkovProfile> {
        match self {
            SearchOutcome::Converged { profile, .. } => Some(profile),
            SearchOutcome::Failed { .. } => None,
        }
    }
}

/// Floors plus an even split of the remaining mass.
pub fn floored_uniform(spec: &PerturbationSpec, alphabet: usize) -> Vec<f64> {
    let floors: Vec<f64> = (0..alphabet).map(|a| spec.floor(a as Action)).collect();
    let rest = 1.0 - floors.iter().sum::<f64>();
    floors.iter().map(|f| f + rest / alphabet as f64).collect()
}

/// Looks for a profile whose perturbed-game gap is at most `epsilon`.
pub fn perturbed_equilibrium_search(
    model: &RoundModel,
    spec: &PerturbationSpec,
    method: &SearchMethod,
    iters: usize,
    epsilon: f64,
) -> Result<SearchOutcome, GameError> {
    let alphabet = model.params.lang.alphabet_size();
    spec.validate(alphabet)?;
    let n = model.players();
    match method {
        SearchMethod::IteratedBestResponse { damping } => {
            if !(*damping > 0.0 && *damping <= 1.0) {
                return Err(GameError::BadSearch("damping must be in (0, 1]".into()));
            }
            let mut profile =
                MarkovProfile::symmetric(MarkovStrategy::stationary(floored_uniform(spec, alphabet)), n);
            let mut trajectory = Vec::new();
            for it in 1..=iters {
                for i in 0..n {
                    let br = model.best_response(i, &profile, Some(spec))?;
                    profile.players[i] = profile.players[i].mix(&br.strategy, *damping, alphabet);
                }
                let gap = model.equilibrium_gap(&profile, Some(spec))?;
                trajectory.push(gap.max_gap());
                if gap.max_gap() <= epsilon {
                    return Ok(SearchOutcome::Converged {
                        profile,
                        gap,
                        iterations: it,
                    });
                }
            }
            Ok(SearchOutcome::Failed {
                trajectory,
                last: profile,
            })
        }
        SearchMethod::SymmetricGrid { resolution } => {
            if *resolution == 0 {
                return Err(GameError::BadSearch("resolution must be positive".into()));
            }
            let floors: Vec<f64> = (0..alphabet).map(|a| spec.floor(a as Action)).collect();
            let rest = 1.0 - floors.iter().sum::<f64>();
            let mut best: Option<(f64, MarkovProfile, GapReport)> = None;
            let mut trajectory = Vec::new();
            let mut parts = vec![0usize; alphabet];
            let mut count = 0;
            compositions(*resolution, &mut parts, 0, &mut |c| {
                if count >= iters {
                    return Ok(());
                }
                count += 1;
                let dist: Vec<f64> = floors
                    .iter()
                    .zip(c)
                    .map(|(f, &k)| f + rest * k as f64 / *resolution as f64)
                    .collect();
                let profile = MarkovProfile::symmetric(MarkovStrategy::stationary(dist), n);
                let gap = model.equilibrium_gap(&profile, Some(spec))?;
                let g = gap.max_gap();
                trajectory.push(g);
                if best.as_ref().map_or(true, |(b, _, _)| g < *b) {
                    best = Some((g, profile, gap));
                }
                Ok(())
            })?;
            match best {
                Some((g, profile, gap)) if g <= epsilon => Ok(SearchOutcome::Converged {
                    profile,
                    gap,
                    iterations: count,
                }),
                Some((_, last, _)) => Ok(SearchOutcome::Failed { trajectory, last }),
                None => Err(GameError::BadSearch("empty grid".into())),
            }
        }
    }
}

fn compositions(
    total: usize,
    parts: &mut Vec<usize>,
    at: usize,
    f: &mut dyn FnMut(&[usize]) -> Result<(), GameError>,
) -> Result<(), GameError> {
    if at + 1 == parts.len() {
        parts[at] = total;
        return f(parts);
    }
    for k in 0..=total {
        parts[at] = k;
        compositions(total - k, parts, at + 1, f)?;
    }
    Ok(())
}
