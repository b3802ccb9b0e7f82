//! Preference functions over good balls.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::BallView;
use crate::lang::{LanguageKind, LclLanguage};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PrefError {
    #[error("unknown preference preset `{0}`")]
    UnknownPreset(String),
    #[error("preference values must be finite and non-negative, got {0}")]
    BadValue(f64),
    #[error("preference bound must be positive")]
    ZeroBound,
}

/// Payoff weight of a final good ball, bounded by `bound()`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Preference {
    Constant {
        value: f64,
    },
    /// Depends on whether the center is labeled `1`.
    Membership {
        member: f64,
        non_member: f64,
    },
    /// `red` when any ball label is `R`, `plain` otherwise.
    RedPenalty {
        plain: f64,
        red: f64,
    },
    /// Looked up by [`canonical_ball`]; missing keys get `default`.
    Table {
        entries: BTreeMap<String, f64>,
        #[serde(default)]
        default: f64,
    },
}

pub const PRESETS: &[&str] = &["unit", "mis", "mis-strict", "cc"];

impl Preference {
    /// Named presets. `cc` needs the discount and the red exponent.
    pub fn preset(name: &str, delta: f64, k: u32) -> Result<Self, PrefError> {
        let p = match name {
            "unit" => Preference::Constant { value: 1.0 },
            "mis" => Preference::Membership {
                member: 0.5,
                non_member: 1.0,
            },
            "mis-strict" => Preference::Membership {
                member: 0.0,
                non_member: 1.0,
            },
            "cc" => Preference::RedPenalty {
                plain: 2.0 - delta,
                red: delta.powi(k as i32),
            },
            other => return Err(PrefError::UnknownPreset(other.to_string())),
        };
        p.validate()?;
        Ok(p)
    }

    /// The default preset for a language.
    pub fn default_for(lang: &LclLanguage, delta: f64, k: u32) -> Self {
        let name = match lang.kind() {
            LanguageKind::Mis => "mis",
            LanguageKind::Coloring { .. } => "unit",
            LanguageKind::ConstrainedColoring => "cc",
        };
        Self::preset(name, delta, k).expect("built-in presets are valid")
    }

    fn values(&self) -> Vec<f64> {
        match self {
            Preference::Constant { value } => vec![*value],
            Preference::Membership { member, non_member } => vec![*member, *non_member],
            Preference::RedPenalty { plain, red } => vec![*plain, *red],
            Preference::Table { entries, default } => {
                entries.values().copied().chain([*default]).collect()
            }
        }
    }

    pub fn validate(&self) -> Result<(), PrefError> {
        if let Some(&bad) = self.values().iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(PrefError::BadValue(bad));
        }
        if self.bound() <= 0.0 {
            return Err(PrefError::ZeroBound);
        }
        Ok(())
    }

    /// The bound M on all values.
    pub fn bound(&self) -> f64 {
        self.values().into_iter().fold(0.0, f64::max)
    }

    pub fn value(&self, lang: &LclLanguage, view: &BallView<'_>) -> f64 {
        match self {
            Preference::Constant { value } => *value,
            Preference::Membership { member, non_member } => {
                match view.center_label().map(|a| lang.symbol(a)) {
                    Some("1") => *member,
                    _ => *non_member,
                }
            }
            Preference::RedPenalty { plain, red } => {
                let any_red = view
                    .labels
                    .iter()
                    .any(|l| l.map(|a| lang.symbol(a)) == Some("R"));
                if any_red {
                    *red
                } else {
                    *plain
                }
            }
            Preference::Table { entries, default } => entries
                .get(&canonical_ball(lang, view))
                .copied()
                .unwrap_or(*default),
        }
    }
}

/// `center|others` with the other labels sorted, e.g. `1|0,0`.
pub fn canonical_ball(lang: &LclLanguage, view: &BallView<'_>) -> String {
    let sym = |l: Option<crate::Action>| l.map_or("_", |a| lang.symbol(a)).to_string();
    let mut others: Vec<String> = (0..view.labels.len())
        .filter(|&i| i != view.shape.center_index)
        .map(|i| sym(view.labels[i]))
        .collect();
    others.sort();
    format!("{}|{}", sym(view.center_label()), others.join(","))
}
