//! The deterministic POMDP model: states, actions with preconditions,
//! deterministic effects and observations, positive costs, absorbing goals.

mod file;

use std::collections::BTreeSet;

use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::cost::Rational;
use crate::stateset::StateSet;

pub use file::{load_model, model_hash, save_model, LoadError};

pub type StateId = usize;
pub type ActionId = usize;
pub type ObsId = usize;

/// Tolerance on the total mass of an initial distribution.
pub const DIST_SUM_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct Action {
    pub name: String,
    /// States at which the action may be applied (its precondition).
    pub applicable: StateSet,
    /// `effects[i]` is `f(i, a)`; defined exactly on applicable states.
    pub effects: Vec<Option<StateId>>,
    /// `costs[i]` is `c(i, a)`; defined exactly on applicable states.
    pub costs: Vec<Option<Rational>>,
}

impl Action {
    pub fn new(name: impl Into<String>, num_states: usize) -> Self {
        Action {
            name: name.into(),
            applicable: StateSet::new(num_states),
            effects: vec![None; num_states],
            costs: vec![None; num_states],
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Initial {
    Set(StateSet),
    /// Sparse distribution sorted by state.
    Dist(Vec<(StateId, f64)>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct DetPomdp {
    pub num_states: usize,
    pub num_observations: usize,
    pub actions: Vec<Action>,
    /// Observation table, action-major: `obs_fn[a * num_states + i] = o(i, a)`.
    pub obs_fn: Vec<ObsId>,
    pub goal: StateSet,
    pub initial: Initial,
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum Violation {
    #[error("{field}: index {index} out of range (< {bound} required)")]
    IndexOutOfRange {
        field: String,
        index: usize,
        bound: usize,
    },
    #[error("{field}: duplicate entry for index {index}")]
    Duplicate { field: String, index: usize },
    #[error("{field}: expected length {expected}, found {found}")]
    ShapeMismatch {
        field: String,
        expected: usize,
        found: usize,
    },
    #[error("num_observations: at least one observation is required")]
    NoObservations,
    #[error("initial: empty initial belief")]
    EmptyInitial,
    #[error("initial.dist: probability {p} for state {state} is not in (0, 1]")]
    BadProbability { state: StateId, p: f64 },
    #[error("initial.dist sum is {sum}, expected 1")]
    DistSum { sum: f64 },
    #[error("obs_fn: missing observation for state {state}, action {action}")]
    ObsMissing { state: StateId, action: ActionId },
    #[error("goal state {state} is not applicable for action {action}")]
    GoalInapplicable { state: StateId, action: ActionId },
    #[error("goal state {state} is not absorbing under action {action} (effect {effect:?})")]
    GoalNotAbsorbing {
        state: StateId,
        action: ActionId,
        effect: Option<StateId>,
    },
    #[error("goal state {state} has nonzero cost {cost} under action {action}")]
    GoalCostNonzero {
        state: StateId,
        action: ActionId,
        cost: Rational,
    },
    #[error("non-goal state {state} has non-positive cost {cost} under action {action}")]
    NonPositiveCost {
        state: StateId,
        action: ActionId,
        cost: Rational,
    },
    #[error("action {action} is applicable at state {state} but has no effect")]
    MissingEffect { state: StateId, action: ActionId },
    #[error("action {action} is applicable at state {state} but has no cost")]
    MissingCost { state: StateId, action: ActionId },
    #[error("action {action} has an effect at inapplicable state {state}")]
    EffectOnInapplicable { state: StateId, action: ActionId },
    #[error("action {action} has a cost at inapplicable state {state}")]
    CostOnInapplicable { state: StateId, action: ActionId },
}

impl DetPomdp {
    /// An empty model with no actions. Observations default to 0.
    pub fn new(num_states: usize, num_observations: usize, goal: StateSet, initial: Initial) -> Self {
        DetPomdp {
            num_states,
            num_observations,
            actions: Vec::new(),
            obs_fn: Vec::new(),
            goal,
            initial,
        }
    }

    pub fn num_actions(&self) -> usize {
        self.actions.len()
    }

    pub fn add_action(&mut self, name: impl Into<String>) -> ActionId {
        self.actions.push(Action::new(name, self.num_states));
        self.obs_fn.extend(std::iter::repeat_n(0, self.num_states));
        self.actions.len() - 1
    }

    /// Makes `a` applicable at `from` with effect `to` and cost `cost`.
    pub fn set_transition(&mut self, a: ActionId, from: StateId, to: StateId, cost: Rational) {
        let act = &mut self.actions[a];
        act.applicable.insert(from);
        act.effects[from] = Some(to);
        act.costs[from] = Some(cost);
    }

    pub fn set_obs(&mut self, state: StateId, a: ActionId, o: ObsId) {
        self.obs_fn[a * self.num_states + state] = o;
    }

    /// Installs the absorbing self-loops at every goal state for every action.
    pub fn make_goals_absorbing(&mut self) {
        let goals: Vec<_> = self.goal.iter().collect();
        for a in 0..self.actions.len() {
            for &t in &goals {
                self.set_transition(a, t, t, Rational::zero());
            }
        }
    }

    #[inline]
    pub fn is_applicable(&self, i: StateId, a: ActionId) -> bool {
        self.actions[a].applicable.contains(i)
    }

    #[inline]
    pub fn effect(&self, i: StateId, a: ActionId) -> Option<StateId> {
        self.actions[a].effects[i]
    }

    #[inline]
    pub fn cost(&self, i: StateId, a: ActionId) -> Option<Rational> {
        self.actions[a].costs[i]
    }

    #[inline]
    pub fn obs(&self, i: StateId, a: ActionId) -> ObsId {
        self.obs_fn[a * self.num_states + i]
    }

    pub fn action_by_name(&self, name: &str) -> Option<ActionId> {
        self.actions.iter().position(|a| a.name == name)
    }

    /// Support of the initial belief.
    pub fn initial_support(&self) -> StateSet {
        match &self.initial {
            Initial::Set(s) => s.clone(),
            Initial::Dist(d) => StateSet::from_states(self.num_states, d.iter().map(|&(i, _)| i)),
        }
    }

    /// Initial distribution; a set-valued initial belief is read as uniform.
    pub fn initial_distribution(&self) -> Vec<(StateId, f64)> {
        match &self.initial {
            Initial::Dist(d) => d.clone(),
            Initial::Set(s) => {
                let p = 1.0 / s.len() as f64;
                s.iter().map(|i| (i, p)).collect()
            }
        }
    }

    /// True when the observation function carries no information.
    pub fn is_unobservable(&self) -> bool {
        self.num_observations == 1
    }

    /// Checks every model invariant; an empty list means the model is valid.
    pub fn validate(&self) -> Vec<Violation> {
        let n = self.num_states;
        let mut out = Vec::new();
        if self.num_observations == 0 {
            out.push(Violation::NoObservations);
        }
        let shape = |field: &str, expected: usize, found: usize, out: &mut Vec<Violation>| {
            if expected != found {
                out.push(Violation::ShapeMismatch {
                    field: field.to_string(),
                    expected,
                    found,
                });
            }
        };
        shape("obs_fn", n * self.actions.len(), self.obs_fn.len(), &mut out);
        for (a, act) in self.actions.iter().enumerate() {
            shape(&format!("actions[{a}].effects"), n, act.effects.len(), &mut out);
            shape(&format!("actions[{a}].costs"), n, act.costs.len(), &mut out);
        }
        if !out.is_empty() {
            return out;
        }

        if let Some(i) = self.goal.iter().find(|&i| i >= n) {
            out.push(Violation::IndexOutOfRange {
                field: "goal".into(),
                index: i,
                bound: n,
            });
        }
        match &self.initial {
            Initial::Set(s) => {
                if s.is_empty() {
                    out.push(Violation::EmptyInitial);
                }
                if let Some(i) = s.iter().find(|&i| i >= n) {
                    out.push(Violation::IndexOutOfRange {
                        field: "initial.states".into(),
                        index: i,
                        bound: n,
                    });
                }
            }
            Initial::Dist(d) => {
                if d.is_empty() {
                    out.push(Violation::EmptyInitial);
                }
                let mut seen = BTreeSet::new();
                for &(i, p) in d {
                    if i >= n {
                        out.push(Violation::IndexOutOfRange {
                            field: "initial.probs".into(),
                            index: i,
                            bound: n,
                        });
                    }
                    if !seen.insert(i) {
                        out.push(Violation::Duplicate {
                            field: "initial.probs".into(),
                            index: i,
                        });
                    }
                    if !(p > 0.0 && p <= 1.0) {
                        out.push(Violation::BadProbability { state: i, p });
                    }
                }
                let sum: f64 = d.iter().map(|&(_, p)| p).sum();
                if !d.is_empty() && (sum - 1.0).abs() > DIST_SUM_TOLERANCE {
                    out.push(Violation::DistSum { sum });
                }
            }
        }

        for (a, act) in self.actions.iter().enumerate() {
            if let Some(i) = act.applicable.iter().find(|&i| i >= n) {
                out.push(Violation::IndexOutOfRange {
                    field: format!("actions[{a}].applicable"),
                    index: i,
                    bound: n,
                });
            }
            for i in 0..n {
                let applicable = act.applicable.contains(i);
                let effect = act.effects[i];
                let cost = act.costs[i];
                if let Some(j) = effect {
                    if j >= n {
                        out.push(Violation::IndexOutOfRange {
                            field: format!("actions[{a}].effects"),
                            index: j,
                            bound: n,
                        });
                    }
                }
                if !applicable {
                    if self.goal.contains(i) {
                        out.push(Violation::GoalInapplicable { state: i, action: a });
                    }
                    if effect.is_some() {
                        out.push(Violation::EffectOnInapplicable { state: i, action: a });
                    }
                    if cost.is_some() {
                        out.push(Violation::CostOnInapplicable { state: i, action: a });
                    }
                    continue;
                }
                if effect.is_none() {
                    out.push(Violation::MissingEffect { state: i, action: a });
                }
                let Some(c) = cost else {
                    out.push(Violation::MissingCost { state: i, action: a });
                    continue;
                };
                if self.goal.contains(i) {
                    if effect.is_some() && effect != Some(i) {
                        out.push(Violation::GoalNotAbsorbing {
                            state: i,
                            action: a,
                            effect,
                        });
                    }
                    if !c.is_zero() {
                        out.push(Violation::GoalCostNonzero {
                            state: i,
                            action: a,
                            cost: c,
                        });
                    }
                } else if !c.is_positive() {
                    out.push(Violation::NonPositiveCost {
                        state: i,
                        action: a,
                        cost: c,
                    });
                }
            }
        }
        for (k, &o) in self.obs_fn.iter().enumerate() {
            if o >= self.num_observations {
                out.push(Violation::IndexOutOfRange {
                    field: format!("obs_fn[state {}, action {}]", k % n.max(1), k / n.max(1)),
                    index: o,
                    bound: self.num_observations,
                });
            }
        }
        out
    }

    /// The global transition graph: edge `(i, j)` iff some action
    /// applicable at `i` maps it to `j`. Self-loops included.
    pub fn transition_graph(&self) -> TransitionGraph {
        let mut succ = vec![BTreeSet::new(); self.num_states];
        for act in &self.actions {
            for i in act.applicable.iter() {
                if let Some(j) = act.effects[i] {
                    succ[i].insert(j);
                }
            }
        }
        TransitionGraph { succ }
    }
}

/// Directed graph on states.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransitionGraph {
    succ: Vec<BTreeSet<StateId>>,
}

impl TransitionGraph {
    pub fn num_states(&self) -> usize {
        self.succ.len()
    }

    pub fn successors(&self, i: StateId) -> impl Iterator<Item = StateId> + '_ {
        self.succ[i].iter().copied()
    }

    pub fn edges(&self) -> Vec<(StateId, StateId)> {
        self.succ
            .iter()
            .enumerate()
            .flat_map(|(i, s)| s.iter().map(move |&j| (i, j)))
            .collect()
    }

    pub fn has_edge(&self, i: StateId, j: StateId) -> bool {
        self.succ[i].contains(&j)
    }

    /// A directed cycle of length at least two, ignoring self-loops, if one
    /// exists. The returned states are listed in cycle order.
    pub fn find_cycle(&self) -> Option<Vec<StateId>> {
        #[derive(Clone, Copy, PartialEq)]
        enum Mark {
            New,
            Open,
            Done,
        }
        let n = self.succ.len();
        let mut mark = vec![Mark::New; n];
        let mut parent = vec![usize::MAX; n];
        for root in 0..n {
            if mark[root] != Mark::New {
                continue;
            }
            let mut stack: Vec<(StateId, Vec<StateId>)> = Vec::new();
            mark[root] = Mark::Open;
            stack.push((root, self.succ[root].iter().copied().rev().collect()));
            while let Some((v, pending)) = stack.last_mut() {
                let v = *v;
                match pending.pop() {
                    Some(w) if w == v => {}
                    Some(w) => match mark[w] {
                        Mark::New => {
                            mark[w] = Mark::Open;
                            parent[w] = v;
                            stack.push((w, self.succ[w].iter().copied().rev().collect()));
                        }
                        Mark::Open => {
                            let mut cycle = vec![v];
                            let mut u = v;
                            while u != w {
                                u = parent[u];
                                cycle.push(u);
                            }
                            cycle.reverse();
                            return Some(cycle);
                        }
                        Mark::Done => {}
                    },
                    None => {
                        mark[v] = Mark::Done;
                        stack.pop();
                    }
                }
            }
        }
        None
    }

    pub fn is_acyclic_except_self_loops(&self) -> bool {
        self.find_cycle().is_none()
    }
}
