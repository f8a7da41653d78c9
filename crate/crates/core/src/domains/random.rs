use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::cost::Rational;
use crate::model::{DetPomdp, Initial};
use crate::stateset::StateSet;

/// Parameters of [`random_model`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RandomSpec {
    pub states: usize,
    pub actions: usize,
    pub observations: usize,
    pub goals: usize,
    pub initial: usize,
    /// Chance that an action is applicable at a non-goal state.
    pub applicability: f64,
    /// Costs are drawn from `{1/2, 1, 3/2, .., max_cost}`.
    pub max_cost: i64,
    /// A random initial distribution instead of a set.
    pub dist: bool,
}

impl Default for RandomSpec {
    fn default() -> Self {
        RandomSpec { states: 5, actions: 3, observations: 2, goals: 1, initial: 3, applicability: 0.8, max_cost: 3, dist: false }
    }
}

/// A valid model drawn from `rng`: uniform effects and observations,
/// absorbing goals.
pub fn random_model(spec: &RandomSpec, rng: &mut impl Rng) -> DetPomdp {
    let n = spec.states;
    assert!(n >= 1 && spec.observations >= 1 && spec.max_cost >= 1);
    assert!(spec.goals <= n && (1..=n).contains(&spec.initial));
    let goal = StateSet::from_states(n, sample(rng, n, spec.goals));
    let init: Vec<usize> = sample(rng, n, spec.initial).into_vec();
    let initial = if spec.dist {
        let w: Vec<f64> = init.iter().map(|_| rng.gen_range(1..=8) as f64).collect();
        let total: f64 = w.iter().sum();
        let mut d: Vec<(usize, f64)> = init.iter().zip(&w).map(|(&i, &x)| (i, x / total)).collect();
        d.sort_by_key(|&(i, _)| i);
        Initial::Dist(d)
    } else {
        Initial::Set(StateSet::from_states(n, init))
    };
    let mut model = DetPomdp::new(n, spec.observations, goal.clone(), initial);
    for k in 0..spec.actions {
        let a = model.add_action(format!("a{k}"));
        for i in 0..n {
            if goal.contains(i) || !rng.gen_bool(spec.applicability) {
                continue;
            }
            let cost = Rational::new(rng.gen_range(1..=2 * spec.max_cost), 2);
            model.set_transition(a, i, rng.gen_range(0..n), cost);
        }
        for i in 0..n {
            model.set_obs(i, a, rng.gen_range(0..spec.observations));
        }
    }
    model.make_goals_absorbing();
    model
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn random_models_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for dist in [false, true] {
            for _ in 0..50 {
                let m = random_model(&RandomSpec { dist, ..RandomSpec::default() }, &mut rng);
                assert!(m.validate().is_empty(), "{:?}", m.validate());
            }
        }
    }
}
