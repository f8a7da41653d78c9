//! JSON model documents.
//!
//! ```json
//! {"num_states": 3, "num_observations": 1, "goal": [2],
//!  "initial": {"kind": "set", "states": [0, 1]},
//!  "actions": [{"name": "right", "applicable": [0, 1, 2],
//!               "effects": [[0, 1], [1, 2], [2, 2]],
//!               "costs": [[0, 1], [1, 1], [2, 0]]}]}
//! ```
//!
//! `obs_fn` lists `(state, action, observation)` triples and is omitted for
//! single-observation models. Costs are JSON numbers (converted exactly from
//! their decimal text) or `"p/q"` strings.

use std::fmt;

use serde::de::{self, Deserializer, Visitor};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use super::{Action, DetPomdp, Initial, Violation};
use crate::cost::{parse_rational, Rational};
use crate::stateset::StateSet;

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("parse error at line {line}, column {column} ({path}): {message}")]
    Parse {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("schema violations: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Schema(Vec<Violation>),
}

impl LoadError {
    pub fn violations(&self) -> &[Violation] {
        match self {
            LoadError::Schema(v) => v,
            LoadError::Parse { .. } => &[],
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelDoc {
    num_states: usize,
    num_observations: usize,
    goal: Vec<usize>,
    initial: InitialDoc,
    actions: Vec<ActionDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    obs_fn: Option<Vec<(usize, usize, usize)>>,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
enum InitialDoc {
    Set { states: Vec<usize> },
    Dist { probs: Vec<(usize, f64)> },
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ActionDoc {
    name: String,
    applicable: Vec<usize>,
    effects: Vec<(usize, usize)>,
    costs: Vec<(usize, CostNum)>,
}

#[derive(Clone, Copy)]
struct CostNum(Rational);

impl Serialize for CostNum {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let r = self.0;
        if r.is_integer() {
            return s.serialize_i64(*r.numer());
        }
        // Terminating decimals round-trip through their shortest f64 text.
        let mut d = *r.denom();
        while d % 2 == 0 {
            d /= 2;
        }
        while d % 5 == 0 {
            d /= 5;
        }
        if d == 1 {
            let f = *r.numer() as f64 / *r.denom() as f64;
            if parse_rational(&f.to_string()) == Some(r) {
                return s.serialize_f64(f);
            }
        }
        s.serialize_str(&format!("{}/{}", r.numer(), r.denom()))
    }
}

impl<'de> Deserialize<'de> for CostNum {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = CostNum;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a number or a \"p/q\" string")
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<CostNum, E> {
                Ok(CostNum(Rational::from_integer(v)))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<CostNum, E> {
                i64::try_from(v)
                    .map(|v| CostNum(Rational::from_integer(v)))
                    .map_err(|_| E::custom("cost out of range"))
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> Result<CostNum, E> {
                if !v.is_finite() {
                    return Err(E::custom("cost must be finite"));
                }
                parse_rational(&v.to_string())
                    .map(CostNum)
                    .ok_or_else(|| E::custom("cost not representable as a bounded rational"))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<CostNum, E> {
                parse_rational(v)
                    .map(CostNum)
                    .ok_or_else(|| E::custom(format!("invalid rational {v:?}")))
            }
        }
        d.deserialize_any(V)
    }
}

/// Parses and validates a model document.
pub fn load_model(text: &str) -> Result<DetPomdp, LoadError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let doc: ModelDoc = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        LoadError::Parse {
            path,
            line: inner.line(),
            column: inner.column(),
            message: inner.to_string(),
        }
    })?;
    let model = from_doc(doc).map_err(LoadError::Schema)?;
    let violations = model.validate();
    if violations.is_empty() {
        Ok(model)
    } else {
        Err(LoadError::Schema(violations))
    }
}

// Caps the dense tables a document can request before allocation.
const MAX_TABLE_ENTRIES: usize = 1 << 22;

fn from_doc(doc: ModelDoc) -> Result<DetPomdp, Vec<Violation>> {
    let n = doc.num_states;
    let na = doc.actions.len();
    let mut out = Vec::new();
    if n == 0 || n.saturating_mul(na.max(1)) > MAX_TABLE_ENTRIES {
        out.push(Violation::ShapeMismatch {
            field: "num_states".into(),
            expected: 1,
            found: n,
        });
        return Err(out);
    }

    let in_range = |field: &str, i: usize, bound: usize, out: &mut Vec<Violation>| -> bool {
        if i >= bound {
            out.push(Violation::IndexOutOfRange {
                field: field.to_string(),
                index: i,
                bound,
            });
            false
        } else {
            true
        }
    };

    let mut goal = StateSet::new(n);
    for &i in &doc.goal {
        if in_range("goal", i, n, &mut out) && !goal.insert(i) {
            out.push(Violation::Duplicate {
                field: "goal".into(),
                index: i,
            });
        }
    }

    let initial = match doc.initial {
        InitialDoc::Set { states } => {
            let mut s = StateSet::new(n);
            for i in states {
                if in_range("initial.states", i, n, &mut out) && !s.insert(i) {
                    out.push(Violation::Duplicate {
                        field: "initial.states".into(),
                        index: i,
                    });
                }
            }
            Initial::Set(s)
        }
        InitialDoc::Dist { mut probs } => {
            probs.retain(|&(i, _)| in_range("initial.probs", i, n, &mut out));
            probs.sort_by_key(|&(i, _)| i);
            Initial::Dist(probs)
        }
    };

    let mut model = DetPomdp::new(n, doc.num_observations, goal, initial);
    for (a, ad) in doc.actions.into_iter().enumerate() {
        let mut act = Action::new(ad.name, n);
        let field = |k: &str| format!("actions[{a}].{k}");
        for i in ad.applicable {
            if in_range(&field("applicable"), i, n, &mut out) && !act.applicable.insert(i) {
                out.push(Violation::Duplicate {
                    field: field("applicable"),
                    index: i,
                });
            }
        }
        for (i, j) in ad.effects {
            let ok = in_range(&field("effects"), i, n, &mut out) & in_range(&field("effects"), j, n, &mut out);
            if ok && act.effects[i].replace(j).is_some() {
                out.push(Violation::Duplicate {
                    field: field("effects"),
                    index: i,
                });
            }
        }
        for (i, c) in ad.costs {
            if in_range(&field("costs"), i, n, &mut out) && act.costs[i].replace(c.0).is_some() {
                out.push(Violation::Duplicate {
                    field: field("costs"),
                    index: i,
                });
            }
        }
        model.actions.push(act);
    }
    model.obs_fn = vec![0; n * na];
    if let Some(triples) = doc.obs_fn {
        let mut seen = vec![false; n * na];
        for (i, a, o) in triples {
            let ok = in_range("obs_fn.state", i, n, &mut out) & in_range("obs_fn.action", a, na, &mut out);
            if !ok {
                continue;
            }
            let k = a * n + i;
            if std::mem::replace(&mut seen[k], true) {
                out.push(Violation::Duplicate {
                    field: format!("obs_fn[action {a}]"),
                    index: i,
                });
            }
            model.obs_fn[k] = o;
        }
        for (k, s) in seen.iter().enumerate() {
            if !s {
                out.push(Violation::ObsMissing {
                    state: k % n,
                    action: k / n,
                });
            }
        }
    }
    if out.is_empty() {
        Ok(model)
    } else {
        Err(out)
    }
}

fn to_doc(model: &DetPomdp) -> ModelDoc {
    let n = model.num_states;
    let initial = match &model.initial {
        Initial::Set(s) => InitialDoc::Set {
            states: s.iter().collect(),
        },
        Initial::Dist(d) => InitialDoc::Dist { probs: d.clone() },
    };
    let actions = model
        .actions
        .iter()
        .map(|act| ActionDoc {
            name: act.name.clone(),
            applicable: act.applicable.iter().collect(),
            effects: (0..n).filter_map(|i| act.effects[i].map(|j| (i, j))).collect(),
            costs: (0..n).filter_map(|i| act.costs[i].map(|c| (i, CostNum(c)))).collect(),
        })
        .collect();
    let obs_fn = (!model.is_unobservable()).then(|| {
        let mut v = Vec::with_capacity(n * model.num_actions());
        for i in 0..n {
            for a in 0..model.num_actions() {
                v.push((i, a, model.obs(i, a)));
            }
        }
        v
    });
    ModelDoc {
        num_states: n,
        num_observations: model.num_observations,
        goal: model.goal.iter().collect(),
        initial,
        actions,
        obs_fn,
    }
}

/// Canonical JSON text for a model: compact, with one action per line.
pub fn save_model(model: &DetPomdp) -> String {
    let doc = to_doc(model);
    let mut out = String::new();
    out.push_str("{\"num_states\":");
    out.push_str(&doc.num_states.to_string());
    out.push_str(",\"num_observations\":");
    out.push_str(&doc.num_observations.to_string());
    out.push_str(",\"goal\":");
    out.push_str(&serde_json::to_string(&doc.goal).unwrap());
    out.push_str(",\n\"initial\":");
    out.push_str(&serde_json::to_string(&doc.initial).unwrap());
    out.push_str(",\n\"actions\":[");
    for (k, a) in doc.actions.iter().enumerate() {
        out.push_str(if k == 0 { "\n" } else { ",\n" });
        out.push_str(&serde_json::to_string(a).unwrap());
    }
    out.push_str("\n]");
    if let Some(obs) = &doc.obs_fn {
        out.push_str(",\n\"obs_fn\":");
        out.push_str(&serde_json::to_string(obs).unwrap());
    }
    out.push_str("}\n");
    out
}

/// Hex SHA-256 of the canonical document.
pub fn model_hash(model: &DetPomdp) -> String {
    hex::encode(Sha256::digest(save_model(model).as_bytes()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::tests::m3;

    const M3_DOC: &str = r#"{"num_states": 3, "num_observations": 1, "goal": [2],
        "initial": {"kind": "set", "states": [0, 1]},
        "actions": [{"name": "right", "applicable": [0, 1, 2],
                     "effects": [[0, 1], [1, 2], [2, 2]],
                     "costs": [[0, 1], [1, 1], [2, 0]]}]}"#;

    #[test]
    fn loads_m3() {
        assert_eq!(load_model(M3_DOC).unwrap(), m3());
    }

    #[test]
    fn save_then_load_is_identity() {
        let m = m3();
        let text = save_model(&m);
        assert_eq!(load_model(&text).unwrap(), m);
        assert_eq!(save_model(&load_model(&text).unwrap()), text);
    }

    #[test]
    fn dist_sum_is_a_schema_violation() {
        let doc = M3_DOC.replace(
            r#"{"kind": "set", "states": [0, 1]}"#,
            r#"{"kind": "dist", "probs": [[0, 0.5], [1, 0.4]]}"#,
        );
        let err = load_model(&doc).unwrap_err();
        assert!(err.to_string().contains("initial.dist sum"), "{err}");
    }

    #[test]
    fn parse_errors_carry_location_and_path() {
        let doc = M3_DOC.replace("\"right\"", "7");
        match load_model(&doc).unwrap_err() {
            LoadError::Parse { path, line, .. } => {
                assert_eq!(path, "actions[0].name");
                assert_eq!(line, 3);
            }
            e => panic!("unexpected {e}"),
        }
        assert!(matches!(load_model("{"), Err(LoadError::Parse { .. })));
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let doc = M3_DOC.replace("\"goal\"", "\"extra\": 1, \"goal\"");
        assert!(matches!(load_model(&doc), Err(LoadError::Parse { .. })));
    }

    #[test]
    fn fractional_costs_round_trip() {
        let mut m = m3();
        m.actions[0].costs[0] = Some(Rational::new(1, 3));
        m.actions[0].costs[1] = Some(Rational::new(1, 4));
        let text = save_model(&m);
        assert!(text.contains("\"1/3\"") && text.contains("0.25"), "{text}");
        assert_eq!(load_model(&text).unwrap(), m);
    }

    #[test]
    fn partial_obs_fn_is_reported() {
        let doc = M3_DOC.replace(
            "\"num_observations\": 1",
            "\"num_observations\": 2, \"obs_fn\": [[0, 0, 1]]",
        );
        let err = load_model(&doc).unwrap_err();
        assert_eq!(
            err.violations(),
            &[
                Violation::ObsMissing { state: 1, action: 0 },
                Violation::ObsMissing { state: 2, action: 0 }
            ]
        );
    }
}
