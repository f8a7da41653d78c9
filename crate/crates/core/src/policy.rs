//! Policies (belief to action maps) and the policy file format.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::belief::{Belief, DistBelief};
use crate::criterion::CriterionKind;
use crate::model::{model_hash, ActionId, DetPomdp};
use crate::stateset::StateSet;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Policy {
    map: BTreeMap<Belief, ActionId>,
}

impl Policy {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, b: Belief, a: ActionId) -> Option<ActionId> {
        self.map.insert(b, a)
    }

    pub fn get(&self, b: &Belief) -> Option<ActionId> {
        self.map.get(b).copied()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Belief, ActionId)> {
        self.map.iter().map(|(b, &a)| (b, a))
    }
}

impl FromIterator<(Belief, ActionId)> for Policy {
    fn from_iter<I: IntoIterator<Item = (Belief, ActionId)>>(iter: I) -> Self {
        Policy { map: iter.into_iter().collect() }
    }
}

#[derive(Debug, Error)]
pub enum PolicyFileError {
    #[error("policy parse error at {path} (line {line}, column {column}): {message}")]
    Parse {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unknown criterion {0:?}")]
    Criterion(String),
    #[error("entries[{entry}]: unknown action {name:?}")]
    UnknownAction { entry: usize, name: String },
    #[error("entries[{entry}]: state {state} out of range")]
    StateOutOfRange { entry: usize, state: usize },
    #[error("entries[{entry}]: support and probs differ in length")]
    ProbsShape { entry: usize },
    #[error("entries[{entry}]: probabilities must be finite and positive")]
    BadProbability { entry: usize },
    #[error("entries[{entry}]: belief listed twice")]
    DuplicateBelief { entry: usize },
    #[error("entries[{entry}]: empty support")]
    EmptySupport { entry: usize },
    #[error("entries[{entry}]: {found} belief under a {criterion} policy")]
    KindMismatch {
        entry: usize,
        found: &'static str,
        criterion: CriterionKind,
    },
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PolicyDoc {
    criterion: String,
    value: String,
    model_hash: String,
    entries: Vec<EntryDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EntryDoc {
    support: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    probs: Option<Vec<f64>>,
    action: String,
}

/// A policy together with the header stored next to it on disk.
#[derive(Clone, Debug, PartialEq)]
pub struct PolicyFile {
    pub criterion: CriterionKind,
    /// The value as printed by the solver (`"2"`, `"3/2"`, `"1.5"`, `"inf"`).
    pub value: String,
    pub model_hash: String,
    pub policy: Policy,
}

impl PolicyFile {
    pub fn new(model: &DetPomdp, criterion: CriterionKind, value: String, policy: Policy) -> Self {
        PolicyFile {
            criterion,
            value,
            model_hash: model_hash(model),
            policy,
        }
    }
}

/// Canonical JSON: entries in belief order, one per line.
pub fn save_policy(model: &DetPomdp, file: &PolicyFile) -> String {
    let entries: Vec<String> = file
        .policy
        .iter()
        .map(|(b, a)| {
            let doc = EntryDoc {
                support: b.support().iter().collect(),
                probs: b.as_dist().map(|d| d.iter().map(|(_, p)| p).collect()),
                action: model.actions[a].name.clone(),
            };
            serde_json::to_string(&doc).expect("entry serializes")
        })
        .collect();
    let s = |v: &str| serde_json::to_string(v).expect("string serializes");
    let mut out = format!(
        "{{\"criterion\":{},\"value\":{},\"model_hash\":{},\"entries\":[",
        s(file.criterion.name()),
        s(&file.value),
        s(&file.model_hash)
    );
    for (k, e) in entries.iter().enumerate() {
        out.push_str(if k == 0 { "\n  " } else { ",\n  " });
        out.push_str(e);
    }
    if !entries.is_empty() {
        out.push('\n');
    }
    out.push_str("]}\n");
    out
}

/// Parses a policy file against `model`. The model hash is read but not
/// enforced; callers decide whether a mismatch matters.
pub fn load_policy(model: &DetPomdp, text: &str) -> Result<PolicyFile, PolicyFileError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let doc: PolicyDoc = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        PolicyFileError::Parse {
            path,
            line: inner.line(),
            column: inner.column(),
            message: inner.to_string(),
        }
    })?;
    let criterion: CriterionKind = doc.criterion.parse().map_err(|_| PolicyFileError::Criterion(doc.criterion.clone()))?;
    let n = model.num_states;
    let mut policy = Policy::new();
    for (entry, e) in doc.entries.into_iter().enumerate() {
        if e.support.is_empty() {
            return Err(PolicyFileError::EmptySupport { entry });
        }
        if let Some(&state) = e.support.iter().find(|&&i| i >= n) {
            return Err(PolicyFileError::StateOutOfRange { entry, state });
        }
        let a = model
            .action_by_name(&e.action)
            .ok_or_else(|| PolicyFileError::UnknownAction { entry, name: e.action.clone() })?;
        let b = match (e.probs, criterion) {
            (None, CriterionKind::MinMax) => Belief::Set(StateSet::from_states(n, e.support.iter().copied())),
            (Some(p), CriterionKind::MinExp) => {
                if p.len() != e.support.len() {
                    return Err(PolicyFileError::ProbsShape { entry });
                }
                if p.iter().any(|x| !x.is_finite() || *x <= 0.0) {
                    return Err(PolicyFileError::BadProbability { entry });
                }
                Belief::Dist(DistBelief::from_pairs(n, e.support.iter().copied().zip(p)))
            }
            (None, _) => return Err(PolicyFileError::KindMismatch { entry, found: "set", criterion }),
            (Some(_), _) => return Err(PolicyFileError::KindMismatch { entry, found: "distribution", criterion }),
        };
        if b.support().len() != e.support.len() || policy.insert(b, a).is_some() {
            return Err(PolicyFileError::DuplicateBelief { entry });
        }
    }
    Ok(PolicyFile {
        criterion,
        value: doc.value,
        model_hash: doc.model_hash,
        policy,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::tests::m3;

    fn set(s: &[usize]) -> Belief {
        Belief::Set(StateSet::from_states(3, s.iter().copied()))
    }

    #[test]
    fn round_trip_set_policy() {
        let m = m3();
        let policy: Policy = [(set(&[0, 1]), 0), (set(&[1, 2]), 0)].into_iter().collect();
        let file = PolicyFile::new(&m, CriterionKind::MinMax, "2".into(), policy);
        let text = save_policy(&m, &file);
        assert!(text.contains("{\"support\":[0,1],\"action\":\"right\"}"));
        assert_eq!(load_policy(&m, &text).unwrap(), file);
    }

    #[test]
    fn round_trip_dist_policy() {
        let m = m3();
        let b = Belief::Dist(DistBelief::from_pairs(3, [(0, 1.0 / 3.0), (1, 2.0 / 3.0)]));
        let policy: Policy = [(b, 0)].into_iter().collect();
        let file = PolicyFile::new(&m, CriterionKind::MinExp, "1.5".into(), policy);
        let text = save_policy(&m, &file);
        assert_eq!(load_policy(&m, &text).unwrap(), file);
    }

    #[test]
    fn rejects_bad_entries() {
        let m = m3();
        let head = r#"{"criterion":"minmax","value":"2","model_hash":"x","entries":"#;
        let cases = [
            (r#"[{"support":[0],"action":"left"}]}"#, "unknown action"),
            (r#"[{"support":[7],"action":"right"}]}"#, "out of range"),
            (r#"[{"support":[0],"action":"right"},{"support":[0],"action":"right"}]}"#, "twice"),
            (r#"[{"support":[0],"probs":[1.0],"action":"right"}]}"#, "distribution belief"),
            (r#"[{"support":[],"action":"right"}]}"#, "empty support"),
        ];
        for (tail, want) in cases {
            let err = load_policy(&m, &format!("{head}{tail}")).unwrap_err().to_string();
            assert!(err.contains(want), "{err}");
        }
        let err = load_policy(&m, "{\"criterion\":1}").unwrap_err().to_string();
        assert!(err.contains("criterion"), "{err}");
    }
}
