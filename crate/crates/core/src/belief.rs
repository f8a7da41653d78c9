//! Belief dynamics: applicable actions, progression, observation filtering,
//! and the state-table representation of reachable distributions.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};

use thiserror::Error;

use crate::model::{ActionId, DetPomdp, ObsId, StateId};
use crate::stateset::StateSet;

/// Probabilities are compared after rounding to this many decimal digits.
const KEY_SCALE: f64 = 1e12;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum BeliefError {
    #[error("action {action} is not applicable at state {state}")]
    Inapplicable { action: ActionId, state: StateId },
    #[error("observation {obs} is impossible after action {action}")]
    ImpossibleObservation { action: ActionId, obs: ObsId },
    #[error("belief has empty support")]
    Empty,
}

/// A probability distribution over states with its support cached.
#[derive(Clone)]
pub struct DistBelief {
    support: StateSet,
    /// Aligned with the ascending iteration order of `support`.
    probs: Vec<f64>,
    key: Vec<i64>,
}

impl DistBelief {
    /// Builds a distribution from `(state, mass)` pairs, dropping zero
    /// entries and merging repeated states. Masses are used as given.
    pub fn from_pairs(num_states: usize, pairs: impl IntoIterator<Item = (StateId, f64)>) -> Self {
        let mut dense: Vec<(StateId, f64)> = pairs.into_iter().filter(|&(_, p)| p > 0.0).collect();
        dense.sort_by_key(|&(i, _)| i);
        let mut support = StateSet::new(num_states);
        let mut probs: Vec<f64> = Vec::with_capacity(dense.len());
        for (i, p) in dense {
            if support.insert(i) {
                probs.push(p);
            } else {
                *probs.last_mut().unwrap() += p;
            }
        }
        let key = probs.iter().map(|p| (p * KEY_SCALE).round() as i64).collect();
        DistBelief { support, probs, key }
    }

    pub fn support(&self) -> &StateSet {
        &self.support
    }

    pub fn iter(&self) -> impl Iterator<Item = (StateId, f64)> + '_ {
        self.support.iter().zip(self.probs.iter().copied())
    }

    pub fn prob(&self, i: StateId) -> f64 {
        self.iter().find(|&(j, _)| j == i).map_or(0.0, |(_, p)| p)
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }
}

impl PartialEq for DistBelief {
    fn eq(&self, other: &Self) -> bool {
        self.support == other.support && self.key == other.key
    }
}

impl Eq for DistBelief {}

impl Hash for DistBelief {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.support.hash(state);
        self.key.hash(state);
    }
}

impl Ord for DistBelief {
    fn cmp(&self, other: &Self) -> Ordering {
        self.support.cmp(&other.support).then_with(|| self.key.cmp(&other.key))
    }
}

impl PartialOrd for DistBelief {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for DistBelief {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for DistBelief {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (k, (i, p)) in self.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{i}:{}", crate::cost::format_sig9(p))?;
        }
        f.write_str("}")
    }
}

/// A belief: a set of possible states (worst-case reasoning) or a
/// distribution over states (expected-cost reasoning).
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Belief {
    Set(StateSet),
    Dist(DistBelief),
}

impl Belief {
    pub fn support(&self) -> &StateSet {
        match self {
            Belief::Set(s) => s,
            Belief::Dist(d) => &d.support,
        }
    }

    /// `(state, weight)` pairs; set beliefs carry weight 1 per state.
    pub fn weighted(&self) -> Box<dyn Iterator<Item = (StateId, f64)> + '_> {
        match self {
            Belief::Set(s) => Box::new(s.iter().map(|i| (i, 1.0))),
            Belief::Dist(d) => Box::new(d.iter()),
        }
    }

    pub fn as_dist(&self) -> Option<&DistBelief> {
        match self {
            Belief::Dist(d) => Some(d),
            Belief::Set(_) => None,
        }
    }
}

impl fmt::Display for Belief {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Belief::Set(s) => fmt::Display::fmt(s, f),
            Belief::Dist(d) => fmt::Display::fmt(d, f),
        }
    }
}

impl fmt::Debug for Belief {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Actions applicable at every state in the support, ascending.
pub fn applicable_actions(model: &DetPomdp, b: &Belief) -> Vec<ActionId> {
    let sup = b.support();
    (0..model.num_actions())
        .filter(|&a| model.actions[a].applicable.is_superset(sup))
        .collect()
}

fn check_applicable(model: &DetPomdp, sup: &StateSet, a: ActionId) -> Result<(), BeliefError> {
    let act = &model.actions[a];
    match sup.iter().find(|&i| !act.applicable.contains(i)) {
        Some(state) => Err(BeliefError::Inapplicable { action: a, state }),
        None => Ok(()),
    }
}

/// The belief after applying `a`, before any observation.
pub fn progress(model: &DetPomdp, b: &Belief, a: ActionId) -> Result<Belief, BeliefError> {
    check_applicable(model, b.support(), a)?;
    let f = |i: StateId| model.effect(i, a).expect("effect defined on applicable state");
    Ok(match b {
        Belief::Set(s) => Belief::Set(StateSet::from_states(model.num_states, s.iter().map(f))),
        Belief::Dist(d) => Belief::Dist(DistBelief::from_pairs(model.num_states, d.iter().map(|(i, p)| (f(i), p)))),
    })
}

/// Observations that can follow `a` at `b`, ascending.
pub fn observation_set(model: &DetPomdp, b: &Belief, a: ActionId) -> Result<Vec<ObsId>, BeliefError> {
    let ba = progress(model, b, a)?;
    let mut obs: Vec<ObsId> = ba.support().iter().map(|j| model.obs(j, a)).collect();
    obs.sort_unstable();
    obs.dedup();
    Ok(obs)
}

/// Probability of each observation following `a` at a distribution `b`.
pub fn observation_probs(model: &DetPomdp, b: &DistBelief, a: ActionId) -> Result<Vec<(ObsId, f64)>, BeliefError> {
    let ba = progress(model, &Belief::Dist(b.clone()), a)?;
    Ok(split(model, &ba, a).into_iter().map(|(o, p, _)| (o, p)).collect())
}

/// Restriction of the progressed belief `ba` to states consistent with `o`,
/// renormalized for distributions.
pub fn filter(model: &DetPomdp, ba: &Belief, a: ActionId, o: ObsId) -> Result<Belief, BeliefError> {
    let keep = |j: StateId| model.obs(j, a) == o;
    let out = match ba {
        Belief::Set(s) => Belief::Set(StateSet::from_states(model.num_states, s.iter().filter(|&j| keep(j)))),
        Belief::Dist(d) => {
            let mass: f64 = d.iter().filter(|&(j, _)| keep(j)).map(|(_, p)| p).sum();
            Belief::Dist(DistBelief::from_pairs(
                model.num_states,
                d.iter().filter(|&(j, _)| keep(j)).map(|(j, p)| (j, p / mass)),
            ))
        }
    };
    if out.support().is_empty() {
        return Err(BeliefError::ImpossibleObservation { action: a, obs: o });
    }
    Ok(out)
}

/// Partitions the progressed belief `ba` by the observation each state
/// emits under `a`: `(o, probability of o, filtered belief)` ascending in
/// `o`. Set beliefs report probability 1 for every part.
pub fn split(model: &DetPomdp, ba: &Belief, a: ActionId) -> Parts {
    let n = model.num_states;
    let mut parts: Vec<(ObsId, Vec<(StateId, f64)>)> = Vec::new();
    for (j, p) in ba.weighted() {
        let o = model.obs(j, a);
        match parts.iter_mut().find(|(q, _)| *q == o) {
            Some((_, v)) => v.push((j, p)),
            None => parts.push((o, vec![(j, p)])),
        }
    }
    parts.sort_by_key(|(o, _)| *o);
    parts
        .into_iter()
        .map(|(o, states)| match ba {
            Belief::Set(_) => (o, 1.0, Belief::Set(StateSet::from_states(n, states.iter().map(|&(j, _)| j)))),
            Belief::Dist(_) => {
                let mass: f64 = states.iter().map(|&(_, p)| p).sum();
                let d = DistBelief::from_pairs(n, states.into_iter().map(|(j, p)| (j, p / mass)));
                (o, mass, Belief::Dist(d))
            }
        })
        .collect()
}

/// `(o, probability of o, filtered belief)` for each possible observation.
pub type Parts = Vec<(ObsId, f64, Belief)>;

/// The atomic belief transition: progress by `a`, then split by observation.
pub fn successors(model: &DetPomdp, b: &Belief, a: ActionId) -> Result<(Belief, Parts), BeliefError> {
    let ba = progress(model, b, a)?;
    let parts = split(model, &ba, a);
    Ok((ba, parts))
}

pub fn is_target(model: &DetPomdp, b: &Belief) -> bool {
    let sup = b.support();
    !sup.is_empty() && sup.is_subset(&model.goal)
}

/// `t(i)` is the current state had the initial state been `i`, or `None`
/// when `i` has been ruled out.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct StateTable(pub Vec<Option<StateId>>);

pub fn table_init(model: &DetPomdp) -> StateTable {
    let sup = model.initial_support();
    StateTable((0..model.num_states).map(|i| sup.contains(i).then_some(i)).collect())
}

pub fn table_step(model: &DetPomdp, t: &StateTable, a: ActionId, o: ObsId) -> Result<StateTable, BeliefError> {
    let mut next = Vec::with_capacity(t.0.len());
    for cur in &t.0 {
        let Some(s) = *cur else {
            next.push(None);
            continue;
        };
        if !model.is_applicable(s, a) {
            return Err(BeliefError::Inapplicable { action: a, state: s });
        }
        let j = model.effect(s, a).expect("effect defined on applicable state");
        next.push((model.obs(j, a) == o).then_some(j));
    }
    if next.iter().all(Option::is_none) {
        return Err(BeliefError::ImpossibleObservation { action: a, obs: o });
    }
    Ok(StateTable(next))
}

/// The distribution a table represents: `b(i)` proportional to the initial
/// mass of the states `j` with `t(j) = i`.
pub fn table_to_belief(model: &DetPomdp, t: &StateTable) -> DistBelief {
    let b0 = model.initial_distribution();
    let pairs: Vec<(StateId, f64)> = b0.iter().filter_map(|&(j, p)| t.0[j].map(|i| (i, p))).collect();
    let mass: f64 = pairs.iter().map(|&(_, p)| p).sum();
    DistBelief::from_pairs(model.num_states, pairs.into_iter().map(|(i, p)| (i, p / mass)))
}
