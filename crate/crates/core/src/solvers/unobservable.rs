use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};
use std::time::Instant;

use num_traits::Zero;
use thiserror::Error;

use crate::belief::{applicable_actions, is_target, progress, Belief};
use crate::criterion::Criterion;
use crate::model::{ActionId, DetPomdp};
use crate::policy::Policy;

use super::{Plan, SolveResult, SolveStats, SolveStatus};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("the unobservable solver needs exactly one observation, the model has {0}")]
pub struct WrongVariant(pub usize);

struct Open<V> {
    g: V,
    seq: usize,
    node: usize,
}

impl<V: PartialOrd> PartialEq for Open<V> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<V: PartialOrd> Eq for Open<V> {}

impl<V: PartialOrd> PartialOrd for Open<V> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<V: PartialOrd> Ord for Open<V> {
    fn cmp(&self, other: &Self) -> Ordering {
        other.g.partial_cmp(&self.g).unwrap_or(Ordering::Equal).then_with(|| other.seq.cmp(&self.seq))
    }
}

/// Uniform-cost search for a cheapest linear plan from `b0` to a target.
pub fn solve_unobservable<C: Criterion>(model: &DetPomdp, budget: usize) -> Result<SolveResult<C::Value>, WrongVariant> {
    if !model.is_unobservable() {
        return Err(WrongVariant(model.num_observations));
    }
    let t0 = Instant::now();
    let mut index: HashMap<Belief, usize> = HashMap::new();
    let mut beliefs: Vec<Belief> = Vec::new();
    let mut g: Vec<C::Value> = Vec::new();
    let mut parent: Vec<Option<(usize, ActionId)>> = Vec::new();
    let mut closed: Vec<bool> = Vec::new();
    let mut heap = BinaryHeap::new();
    let mut seq = 0;
    let mut expanded = 0;

    let b0 = C::initial_belief(model);
    index.insert(b0.clone(), 0);
    beliefs.push(b0);
    g.push(C::Value::zero());
    parent.push(None);
    closed.push(false);
    heap.push(Open { g: g[0], seq, node: 0 });

    while let Some(Open { g: d, node: u, .. }) = heap.pop() {
        if closed[u] || g[u] != d {
            continue;
        }
        closed[u] = true;
        if is_target(model, &beliefs[u]) {
            let mut actions = Vec::new();
            let mut path = vec![u];
            let mut v = u;
            while let Some((p, a)) = parent[v] {
                actions.push(a);
                path.push(p);
                v = p;
            }
            actions.reverse();
            path.reverse();
            let plan = Plan { actions, beliefs: path.iter().map(|&k| beliefs[k].clone()).collect() };
            let policy: Policy = plan.beliefs.iter().cloned().zip(plan.actions.iter().copied()).collect();
            let stats = SolveStats { expanded, beliefs: beliefs.len(), wall: t0.elapsed() };
            let mut r = SolveResult::solved(policy, d, stats);
            r.plan = Some(plan);
            return Ok(r);
        }
        expanded += 1;
        let b = beliefs[u].clone();
        for a in applicable_actions(model, &b) {
            let next = progress(model, &b, a).expect("action is applicable");
            let cand = d + C::action_cost(model, &b, a);
            let v = match index.get(&next) {
                Some(&v) => v,
                None => {
                    let v = beliefs.len();
                    if v >= budget {
                        let stats = SolveStats { expanded, beliefs: v, wall: t0.elapsed() };
                        return Ok(SolveResult::unsolved(SolveStatus::BudgetExceeded, stats));
                    }
                    index.insert(next.clone(), v);
                    beliefs.push(next);
                    g.push(cand);
                    parent.push(Some((u, a)));
                    closed.push(false);
                    seq += 1;
                    heap.push(Open { g: cand, seq, node: v });
                    continue;
                }
            };
            if !closed[v] && cand < g[v] {
                g[v] = cand;
                parent[v] = Some((u, a));
                seq += 1;
                heap.push(Open { g: cand, seq, node: v });
            }
        }
    }
    let stats = SolveStats { expanded, beliefs: beliefs.len(), wall: t0.elapsed() };
    Ok(SolveResult::unsolved(SolveStatus::NoFinitePolicy, stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost::{ExtCost, Rational};
    use crate::criterion::{MinExp, MinMax};
    use crate::model::tests::m3;
    use crate::model::Initial;
    use crate::stateset::StateSet;

    #[test]
    fn m3_plan() {
        let r = solve_unobservable::<MinMax>(&m3(), 100).unwrap();
        assert_eq!(r.plan.as_ref().unwrap().actions, vec![0, 0]);
        assert_eq!(r.value, ExtCost::Finite(Rational::from_integer(2)));
        let r = solve_unobservable::<MinExp>(&m3(), 100).unwrap();
        assert_eq!(r.value, ExtCost::Finite(1.5));
    }

    #[test]
    fn target_start_gives_empty_plan() {
        let mut m = m3();
        m.initial = Initial::Set(StateSet::from_states(3, [2]));
        let r = solve_unobservable::<MinMax>(&m, 100).unwrap();
        assert!(r.plan.unwrap().actions.is_empty());
        assert_eq!(r.value, ExtCost::zero());
    }

    #[test]
    fn observable_model_is_rejected() {
        let mut m = m3();
        m.num_observations = 2;
        assert_eq!(solve_unobservable::<MinMax>(&m, 100).unwrap_err(), WrongVariant(2));
    }
}
