mod common;

use std::collections::HashSet;

use common::*;
use detpomdp::andor::reachable_beliefs;
use detpomdp::belief::{self, Belief};
use detpomdp::criterion::{MinExp, MinMax};
use detpomdp::domains::{random_model, RandomSpec};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn singleton_start(seed: u64) -> detpomdp::model::DetPomdp {
    let spec = RandomSpec { states: 4 + (seed % 3) as usize, initial: 1, ..RandomSpec::default() };
    random_model(&spec, &mut ChaCha8Rng::seed_from_u64(seed))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn one_step_structure(seed in any::<u64>()) {
        let m = random_small(seed, false);
        prop_assert_eq!(graph_violations::<MinMax>(&m), Vec::<String>::new());
        let m = random_small(seed, true);
        prop_assert_eq!(graph_violations::<MinExp>(&m), Vec::<String>::new());
    }

    #[test]
    fn reachable_sets_match_oracle(seed in any::<u64>()) {
        let m = random_small(seed, false);
        let ours: HashSet<Vec<usize>> = reachable_beliefs::<MinMax>(&m, 100_000, true)
            .unwrap()
            .iter()
            .map(|b| b.support().iter().collect())
            .collect();
        let oracle: HashSet<Vec<usize>> = oracle_reachable_supports(&m).into_iter().collect();
        prop_assert_eq!(ours, oracle);
    }

    #[test]
    fn reachable_counts_are_bounded(seed in any::<u64>()) {
        for dist in [false, true] {
            let m = random_small(seed, dist);
            let n = if dist {
                reachable_beliefs::<MinExp>(&m, 100_000, true).unwrap().len()
            } else {
                reachable_beliefs::<MinMax>(&m, 100_000, true).unwrap().len()
            };
            prop_assert!(n as u128 <= table_bound(m.num_states));
        }
        let m = singleton_start(seed);
        let beliefs = reachable_beliefs::<MinMax>(&m, 100_000, true).unwrap();
        prop_assert!(beliefs.len() <= m.num_states);
        prop_assert!(beliefs.iter().all(|b| b.support().len() == 1));
    }

    #[test]
    fn table_and_distribution_agree(seed in any::<u64>()) {
        let m = random_small(seed, seed % 2 == 0);
        let gap = table_gap(&m, &mut ChaCha8Rng::seed_from_u64(seed), 8);
        prop_assert!(gap.is_some_and(|g| g < 1e-9), "gap {gap:?}");
    }

    #[test]
    fn probabilities_are_conserved(seed in any::<u64>()) {
        let m = random_small(seed, true);
        for b in reachable_beliefs::<MinExp>(&m, 100_000, true).unwrap() {
            let Belief::Dist(d) = &b else { unreachable!() };
            prop_assert!((d.total() - 1.0).abs() < 1e-9);
            for a in belief::applicable_actions(&m, &b) {
                let probs = belief::observation_probs(&m, d, a).unwrap();
                prop_assert!((probs.iter().map(|&(_, p)| p).sum::<f64>() - 1.0).abs() < 1e-9);
                let ba = belief::progress(&m, &b, a).unwrap();
                prop_assert!(ba.support().len() <= b.support().len());
            }
        }
    }
}

#[test]
fn m3_table_trace() {
    let m = m3();
    let t = belief::table_init(&m);
    assert_eq!(t.0, vec![Some(0), Some(1), None]);
    let t = belief::table_step(&m, &t, 0, 0).unwrap();
    assert_eq!(t.0, vec![Some(1), Some(2), None]);
}

#[test]
fn targets() {
    let m = m3();
    let set = |s: &[usize]| Belief::Set(detpomdp::stateset::StateSet::from_states(3, s.iter().copied()));
    assert!(belief::is_target(&m, &set(&[2])));
    assert!(!belief::is_target(&m, &set(&[1, 2])));
    let mut no_goal = m3();
    no_goal.goal = detpomdp::stateset::StateSet::new(3);
    assert!(!belief::is_target(&no_goal, &set(&[2])));
}
