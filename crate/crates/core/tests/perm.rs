mod common;

use common::*;
use detpomdp::cost::Rational;
use detpomdp::criterion::MinMax;
use detpomdp::model::{DetPomdp, Initial};
use detpomdp::perm::*;
use detpomdp::solvers::{solve_unobservable, SolveStatus};
use detpomdp::stateset::StateSet;
use num_bigint::BigUint;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Smallest `k >= 1` with `p^k = id`, by repeated composition.
fn brute_order(p: &Permutation) -> u64 {
    let mut q = p.clone();
    let mut k = 1;
    while !q.is_identity() {
        q = p.compose(&q);
        k += 1;
    }
    k
}

/// An unobservable model whose actions are the given permutations, with
/// the goal states fixed by every generator.
fn permutation_model(n: usize, gens: &[Permutation], initial: &[usize], goal: &[usize]) -> DetPomdp {
    let mut m = DetPomdp::new(n, 1, StateSet::from_states(n, goal.iter().copied()), Initial::Set(StateSet::from_states(n, initial.iter().copied())));
    for (k, g) in gens.iter().enumerate() {
        let a = m.add_action(format!("g{k}"));
        for i in 0..n {
            let c = if goal.contains(&i) { 0 } else { 1 };
            m.set_transition(a, i, g.apply(i), Rational::from_integer(c));
        }
    }
    m
}

proptest! {
    #[test]
    fn order_matches_brute_powering(seed in any::<u64>(), n in 1usize..=10) {
        let p = random_permutation(&mut ChaCha8Rng::seed_from_u64(seed), n);
        let k = brute_order(&p);
        prop_assert_eq!(p.order(), BigUint::from(k));
        prop_assert!(p.pow(k).is_identity());
    }

    #[test]
    fn cycles_partition_states(seed in any::<u64>(), n in 1usize..=12) {
        let p = random_permutation(&mut ChaCha8Rng::seed_from_u64(seed), n);
        let mut all: Vec<usize> = p.cycles().into_iter().flatten().collect();
        all.sort_unstable();
        prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
        prop_assert_eq!(Permutation::from_cycles(n, &p.cycles()).unwrap(), p);
    }

    #[test]
    fn membership_matches_closure(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(1..=7);
        let gens: Vec<Permutation> = (0..rng.gen_range(0..=3)).map(|_| random_permutation(&mut rng, n)).collect();
        let closure = bfs_closure(n, &gens);
        let chain = StabChain::new(n, &gens);
        prop_assert_eq!(chain.order(), BigUint::from(closure.len()));
        for _ in 0..5 {
            let s = random_permutation(&mut rng, n);
            prop_assert_eq!(chain.contains(&s), closure.contains(&s));
        }
    }
}

#[test]
fn cycle_notation_example_action() {
    let sigma = Permutation::from_cycles(8, &[vec![0, 2, 4, 7], vec![1, 3, 6], vec![5]]).unwrap();
    let m = permutation_model(8, std::slice::from_ref(&sigma), &[0], &[]);
    assert_eq!(action_as_permutation(&m, 0), Ok(sigma.clone()));
    assert_eq!(sigma.order(), BigUint::from(12u32));
}

#[test]
fn identity_action_is_identity() {
    let m = permutation_model(4, &[Permutation::identity(4)], &[0], &[3]);
    assert!(action_as_permutation(&m, 0).unwrap().is_identity());
}

#[test]
fn membership_small_cases() {
    let t = Permutation::from_cycles(3, &[vec![0, 1]]).unwrap();
    let c = Permutation::from_cycles(3, &[vec![0, 1, 2]]).unwrap();
    assert!(group_membership(std::slice::from_ref(&t), &t));
    assert!(!group_membership(std::slice::from_ref(&t), &c));
    assert!(group_membership(&[t, c.clone()], &c.inverse()));
}

#[test]
fn pef_certificates() {
    // Rotating four states; goal state 3 is fixed, so rotate 0..3.
    let rot = Permutation::from_cycles(4, &[vec![0, 1, 2]]).unwrap();
    let m = permutation_model(4, std::slice::from_ref(&rot), &[3], &[3]);
    assert_eq!(pef_certificate_check(&m, &Permutation::identity(4)), Ok(true));

    // A transposition outside the rotation group is rejected even though it
    // maps b0 = {3} into the goal.
    let m = permutation_model(4, std::slice::from_ref(&rot), &[3], &[3]);
    let swap = Permutation::from_cycles(4, &[vec![0, 1]]).unwrap();
    assert_eq!(pef_certificate_check(&m, &swap), Ok(false));

    // Permutation actions fix the goal, so they can only certify targets
    // already reached; the check and the solver agree on that.
    let m = permutation_model(4, std::slice::from_ref(&rot), &[0], &[3]);
    for s in bfs_closure(4, &[rot]) {
        assert_eq!(pef_certificate_check(&m, &s), Ok(false));
    }
    assert_eq!(solve_unobservable::<MinMax>(&m, 1000).unwrap().status, SolveStatus::NoFinitePolicy);
}

#[test]
fn pef_needs_permutation_actions() {
    let inst = build_from_cycles(&[2, 3], 0, LastStateRule::Precondition).unwrap();
    let err = pef_certificate_check(&inst.model, &Permutation::identity(inst.model.num_states)).unwrap_err();
    assert_eq!(err.action, "a'");
}

#[test]
fn large_order_plans() {
    for (cycles, len) in [(vec![2], 2usize), (vec![2, 3], 6), (vec![2, 3, 5], 30)] {
        let inst = build_from_cycles(&cycles, 0, LastStateRule::Precondition).unwrap();
        assert_eq!(inst.order, BigUint::from(len));
        let plan = solve_unobservable::<MinMax>(&inst.model, 100_000).unwrap().plan.unwrap();
        assert_eq!(plan.actions.len(), len);
        let a = inst.model.action_by_name("a").unwrap();
        assert!(plan.actions[..len - 1].iter().all(|&x| x == a));
        let profile = chunk_profile(&plan.beliefs);
        if cycles.len() == 1 {
            assert_eq!(profile.chunks, vec![(1, len + 1)]);
        } else {
            assert_eq!(profile.chunks, vec![(cycles.len(), len), (1, 1)]);
            assert_eq!(profile.jumps, 1);
        }
    }
}

#[test]
fn large_order_diameter_and_conditions() {
    let inst = build_from_cycles(&[2, 3], 0, LastStateRule::Precondition).unwrap();
    assert!(measure_diameter::<MinMax>(&inst.model, 100_000).unwrap() >= 5);
    // Four cycles get past the support bound.
    let big = build_large_order_instance(17).unwrap();
    assert_eq!(big.cycles, vec![2, 3, 5, 7]);
    let r = diameter_conditions(&big.model);
    assert_eq!(r.verdict, Verdict::Unknown);
    assert!(r.recheck(&big.model));
}

#[test]
fn singleton_start_has_constant_support() {
    let mut m = m3();
    m.initial = Initial::Set(StateSet::from_states(3, [0]));
    assert_eq!(diameter_conditions(&m).verdict, Verdict::PolynomialByConstantSupport);
}

#[test]
fn permutation_verdicts() {
    let n = 6;
    let swap = Permutation::from_cycles(n, &[vec![0, 1]]).unwrap();
    let rot = Permutation::from_cycles(n, &[vec![1, 2, 3]]).unwrap();
    let m = permutation_model(n, &[swap, rot], &[0, 1, 2, 3, 4], &[5]);
    let r = diameter_conditions(&m);
    assert_eq!(r.verdict, Verdict::BoundedCycleLengths);
    assert_eq!(r.max_cycle_len, Some(3));

    let long = Permutation::from_cycles(n, &[vec![0, 1, 2, 3]]).unwrap();
    let m = permutation_model(n, &[long], &[0, 1, 2, 3, 4], &[5]);
    let cfg = DiameterConfig { moved_bound: 4, ..DiameterConfig::default() };
    assert_eq!(diameter_conditions_with(&m, cfg).verdict, Verdict::BoundedSupportMoves);
    assert_eq!(diameter_conditions(&m).verdict, Verdict::Unknown);
}

#[test]
fn crossing_table_reports_concrete_points() {
    let table = crossing_table(&[1, 2, 3], 120);
    for c in &table {
        let n = c.n.expect("crossing within the table");
        assert!(c.lcm > c.power, "n={n}");
        for k in n..=120 {
            let lcm: BigUint = prime_packing(k).into_iter().map(BigUint::from).product();
            assert!(lcm > BigUint::from(k).pow(c.exponent));
        }
    }
}

#[test]
fn word_extraction_realizes_sigma() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let gens: Vec<Permutation> = (0..2).map(|_| random_permutation(&mut rng, 5)).collect();
    for s in bfs_closure(5, &gens).into_iter().take(20) {
        let w = word_for(&gens, &s, 10_000).unwrap();
        let p = w.iter().fold(Permutation::identity(5), |acc, &k| gens[k].compose(&acc));
        assert_eq!(p, s);
    }
}

#[test]
fn non_injective_action_names_its_witness() {
    assert_eq!(action_as_permutation(&m3(), 0), Err(NotPermutation::NotInjective { image: 2, preimages: vec![1, 2] }));
}
