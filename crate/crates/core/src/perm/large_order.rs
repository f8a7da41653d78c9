use num_bigint::BigUint;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::cost::Rational;
use crate::model::{DetPomdp, Initial, StateId};
use crate::stateset::StateSet;

use super::Permutation;

/// What the finishing action `a'` does at states that are not the last of
/// their cycle.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum LastStateRule {
    /// `a'` is not applicable there.
    #[default]
    Precondition,
    /// `a'` sends them to an absorbing non-goal trap.
    Trap,
    /// `a'` leaves them in place. Finishing cycles one at a time then beats
    /// the order of the permutation.
    FixOthers,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum LargeOrderError {
    #[error("no prime fits in {0} states")]
    TooSmall(usize),
    #[error("cycle lengths must be positive and non-empty")]
    BadCycles,
}

#[derive(Clone, Debug)]
pub struct LargeOrderInstance {
    pub model: DetPomdp,
    pub cycles: Vec<usize>,
    /// The cycling action `a` on all states of the model.
    pub sigma: Permutation,
    pub order: BigUint,
    pub target: StateId,
}

fn primes_up_to(n: usize) -> Vec<usize> {
    let mut sieve = vec![true; n + 1];
    let mut out = Vec::new();
    for p in 2..=n {
        if sieve[p] {
            out.push(p);
            let mut q = p * p;
            while q <= n {
                sieve[q] = false;
                q += p;
            }
        }
    }
    out
}

/// Distinct primes with sum at most `n` and the largest product, in
/// ascending order. Ties keep the set found first.
pub fn prime_packing(n: usize) -> Vec<usize> {
    let mut best: Vec<(BigUint, Vec<usize>)> = vec![(BigUint::one(), Vec::new()); n + 1];
    for p in primes_up_to(n) {
        for s in (p..=n).rev() {
            let cand = &best[s - p].0 * BigUint::from(p);
            if cand > best[s].0 {
                let mut set = best[s - p].1.clone();
                set.push(p);
                best[s] = (cand, set);
            }
        }
    }
    best.pop().map(|(_, s)| s).unwrap_or_default()
}

/// The instance on the packing for `n`, padded with fixed points to `n`
/// cycle states.
pub fn build_large_order_instance(n: usize) -> Result<LargeOrderInstance, LargeOrderError> {
    let cycles = prime_packing(n);
    if cycles.is_empty() {
        return Err(LargeOrderError::TooSmall(n));
    }
    build_from_cycles(&cycles, n, LastStateRule::default())
}

/// States `0..m` hold the cycles back to back (then fixed points up to
/// `pad_to`), followed by the target and, for [`LastStateRule::Trap`], the
/// trap. `a` rotates each cycle; `a'` moves every cycle's last state to the
/// target. `b0` holds the first state of each cycle.
pub fn build_from_cycles(cycles: &[usize], pad_to: usize, rule: LastStateRule) -> Result<LargeOrderInstance, LargeOrderError> {
    if cycles.is_empty() || cycles.contains(&0) {
        return Err(LargeOrderError::BadCycles);
    }
    let m = pad_to.max(cycles.iter().sum());
    let target = m;
    let trap = (rule == LastStateRule::Trap).then_some(m + 1);
    let n = m + 1 + usize::from(trap.is_some());

    let mut spans = Vec::new();
    let mut off = 0;
    for &l in cycles {
        spans.push((off..off + l).collect::<Vec<_>>());
        off += l;
    }
    let sigma = Permutation::from_cycles(n, &spans).expect("cycles are disjoint and in range");
    let firsts: Vec<StateId> = spans.iter().map(|c| c[0]).collect();
    let lasts: Vec<StateId> = spans.iter().map(|c| c[c.len() - 1]).collect();

    let one = Rational::from_integer(1);
    let mut model = DetPomdp::new(n, 1, StateSet::from_states(n, [target]), Initial::Set(StateSet::from_states(n, firsts)));
    let a = model.add_action("a");
    let fin = model.add_action("a'");
    for i in 0..n {
        if i != target {
            model.set_transition(a, i, sigma.apply(i), one);
        }
    }
    for i in 0..m {
        if lasts.contains(&i) {
            model.set_transition(fin, i, target, one);
            continue;
        }
        match (rule, trap) {
            (LastStateRule::Precondition, _) => {}
            (LastStateRule::Trap, Some(t)) => model.set_transition(fin, i, t, one),
            (LastStateRule::FixOthers, _) => model.set_transition(fin, i, i, one),
            (LastStateRule::Trap, None) => unreachable!(),
        }
    }
    if let Some(t) = trap {
        model.set_transition(fin, t, t, one);
    }
    model.make_goals_absorbing();
    let order = sigma.order();
    Ok(LargeOrderInstance { model, cycles: cycles.to_vec(), sigma, order, target })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Crossing {
    pub exponent: u32,
    /// Least `n` from which the packing's lcm stays above `n^exponent` up
    /// to the table limit.
    pub n: Option<usize>,
    pub lcm: BigUint,
    pub power: BigUint,
}

/// For each exponent, where the lcm of the prime packing overtakes
/// `n^exponent` for good within `2..=max_n`.
pub fn crossing_table(exponents: &[u32], max_n: usize) -> Vec<Crossing> {
    let lcms: Vec<BigUint> = (0..=max_n).map(|n| prime_packing(n).into_iter().map(BigUint::from).product()).collect();
    exponents
        .iter()
        .map(|&c| {
            let above = |n: usize| lcms[n] > BigUint::from(n).pow(c);
            let mut start = None;
            for n in 2..=max_n {
                match (above(n), start) {
                    (true, None) => start = Some(n),
                    (false, Some(_)) => start = None,
                    _ => {}
                }
            }
            let (lcm, power) = match start {
                Some(n) => (lcms[n].clone(), BigUint::from(n).pow(c)),
                None => (BigUint::zero(), BigUint::zero()),
            };
            Crossing { exponent: c, n: start, lcm, power }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::criterion::MinMax;
    use crate::solvers::solve_unobservable;

    fn plan_len(inst: &LargeOrderInstance) -> usize {
        let r = solve_unobservable::<MinMax>(&inst.model, 100_000).unwrap();
        r.plan.expect("solved").actions.len()
    }

    #[test]
    fn packings() {
        assert_eq!(prime_packing(1), Vec::<usize>::new());
        assert_eq!(prime_packing(3), vec![3]);
        assert_eq!(prime_packing(5), vec![2, 3]);
        assert_eq!(prime_packing(10), vec![2, 3, 5]);
        assert_eq!(prime_packing(17), vec![2, 3, 5, 7]);
    }

    #[test]
    fn plan_length_equals_order() {
        for (cycles, len) in [(vec![2], 2), (vec![2, 3], 6), (vec![2, 3, 5], 30)] {
            for rule in [LastStateRule::Precondition, LastStateRule::Trap] {
                let inst = build_from_cycles(&cycles, 0, rule).unwrap();
                assert!(inst.model.validate().is_empty(), "{:?}", inst.model.validate());
                assert_eq!(inst.order, BigUint::from(len as u32));
                assert_eq!(plan_len(&inst), len, "{cycles:?} {rule:?}");
            }
        }
    }

    #[test]
    fn fixing_others_shortcuts_the_plan() {
        let inst = build_from_cycles(&[2, 3], 0, LastStateRule::FixOthers).unwrap();
        assert_eq!(plan_len(&inst), 4);
    }

    #[test]
    fn state_count_within_bound() {
        let inst = build_large_order_instance(10).unwrap();
        assert_eq!(inst.model.num_states, 11);
        assert_eq!(inst.cycles, vec![2, 3, 5]);
        assert!(build_large_order_instance(1).is_err());
        assert_eq!(build_large_order_instance(2).unwrap().cycles, vec![2]);
    }

    #[test]
    fn crossing_square() {
        let t = crossing_table(&[1, 2], 60);
        assert!(t.iter().all(|c| c.n.is_some()));
        assert!(t[0].n <= t[1].n);
    }
}
