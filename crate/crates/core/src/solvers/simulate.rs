use std::collections::HashMap;

use num_traits::Zero;
use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::belief::{filter, is_target, progress, Belief};
use crate::cost::{rational_to_f64, Rational};
use crate::criterion::Criterion;
use crate::model::{ActionId, DetPomdp, ObsId, StateId};
use crate::policy::Policy;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum SimulateError {
    #[error("state {0} is not in the support of the initial belief")]
    NotInitial(StateId),
    #[error("policy has no action for belief {0}")]
    Uncovered(Belief),
    #[error("policy action {action} is not applicable at belief {belief}")]
    Inapplicable { belief: Belief, action: ActionId },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Step {
    pub belief: Belief,
    pub action: ActionId,
    /// Cost paid at the true state.
    pub cost: Rational,
    pub obs: ObsId,
    pub next: Belief,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trace {
    pub start: StateId,
    pub steps: Vec<Step>,
    pub total: Rational,
    pub final_state: StateId,
    pub reached_target: bool,
}

/// Executes `policy` with the hidden state starting at `true_state`.
pub fn simulate<C: Criterion>(model: &DetPomdp, policy: &Policy, true_state: StateId, max_steps: usize) -> Result<Trace, SimulateError> {
    let mut b = C::initial_belief(model);
    if !b.support().contains(true_state) {
        return Err(SimulateError::NotInitial(true_state));
    }
    let mut s = true_state;
    let mut steps = Vec::new();
    let mut total = Rational::zero();
    while !is_target(model, &b) && steps.len() < max_steps {
        let a = policy.get(&b).ok_or_else(|| SimulateError::Uncovered(b.clone()))?;
        let ba = progress(model, &b, a).map_err(|_| SimulateError::Inapplicable { belief: b.clone(), action: a })?;
        let cost = model.cost(s, a).expect("true state lies in the belief");
        s = model.effect(s, a).expect("true state lies in the belief");
        let obs = model.obs(s, a);
        let next = filter(model, &ba, a, obs).expect("observation of the true state is consistent");
        total += cost;
        steps.push(Step { belief: b, action: a, cost, obs, next: next.clone() });
        b = next;
    }
    Ok(Trace { start: true_state, reached_target: is_target(model, &b), steps, total, final_state: s })
}

#[derive(Clone, Debug, PartialEq)]
pub struct MonteCarlo {
    pub runs: usize,
    pub mean: f64,
    pub std_err: f64,
}

/// Mean true cost over `runs` executions with start states drawn from the
/// initial distribution. Runs that do not reach a target within
/// `max_steps` count with the cost paid so far.
pub fn monte_carlo<C: Criterion>(model: &DetPomdp, policy: &Policy, runs: usize, seed: u64, max_steps: usize) -> Result<MonteCarlo, SimulateError> {
    let dist = model.initial_distribution();
    let weights = WeightedIndex::new(dist.iter().map(|&(_, p)| p)).expect("initial distribution has positive mass");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Executions are deterministic given the start state.
    let mut cost: HashMap<StateId, f64> = HashMap::new();
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for _ in 0..runs {
        let s = dist[weights.sample(&mut rng)].0;
        let c = match cost.get(&s) {
            Some(&c) => c,
            None => {
                let c = rational_to_f64(&simulate::<C>(model, policy, s, max_steps)?.total);
                cost.insert(s, c);
                c
            }
        };
        sum += c;
        sum_sq += c * c;
    }
    let n = runs as f64;
    let mean = sum / n;
    let var = if runs > 1 { ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0) } else { 0.0 };
    Ok(MonteCarlo { runs, mean, std_err: (var / n).sqrt() })
}
