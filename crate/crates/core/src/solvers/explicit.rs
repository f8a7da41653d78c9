use std::collections::{HashMap, HashSet, VecDeque};
use std::time::Instant;

use crate::andor::{build_graph, Node};
use crate::belief::{applicable_actions, is_target, successors, Belief};
use crate::cost::ExtCost;
use crate::criterion::Criterion;
use crate::model::DetPomdp;
use crate::policy::Policy;

use super::label::{label_set, FlatEdge, FlatNode};
use super::symmetry::VerifiedSymmetry;
use super::{SolveResult, SolveStats, SolveStatus};

/// Enumerates every reachable belief, then labels them with optimal values.
pub fn solve_explicit<C: Criterion>(model: &DetPomdp, budget: usize) -> SolveResult<C::Value> {
    let t0 = Instant::now();
    let g = match build_graph::<C>(model, budget) {
        Ok(g) => g,
        Err(e) => {
            let stats = SolveStats { beliefs: e.count, wall: t0.elapsed(), ..Default::default() };
            return SolveResult::unsolved(SolveStatus::BudgetExceeded, stats);
        }
    };

    let mut flat_id = vec![usize::MAX; g.nodes.len()];
    let ors: Vec<usize> = g.or_nodes().collect();
    for (k, &u) in ors.iter().enumerate() {
        flat_id[u] = k;
    }
    let nodes: Vec<FlatNode<C::Value>> = ors
        .iter()
        .map(|&u| {
            let Node::Or { belief, terminal, edges } = &g.nodes[u] else { unreachable!() };
            let edges = edges
                .iter()
                .map(|e| {
                    let Node::And { edges: out, .. } = &g.nodes[e.target] else { unreachable!() };
                    FlatEdge {
                        action: e.action,
                        cost: e.cost,
                        children: out.iter().map(|o| (o.prob.unwrap_or(1.0), flat_id[o.target])).collect(),
                    }
                })
                .collect();
            FlatNode { support_len: belief.support().len(), terminal: *terminal, edges }
        })
        .collect();

    let all: Vec<usize> = (0..nodes.len()).collect();
    let mut value = vec![ExtCost::Infinite; nodes.len()];
    let mut best = vec![None; nodes.len()];
    label_set::<C>(&nodes, &all, &mut value, &mut best);

    let stats = SolveStats {
        expanded: nodes.iter().filter(|n| !n.terminal).count(),
        beliefs: nodes.len(),
        wall: t0.elapsed(),
    };
    let root = flat_id[g.root];
    let ExtCost::Finite(v) = value[root] else {
        return SolveResult::unsolved(SolveStatus::NoFinitePolicy, stats);
    };
    let policy = extract(&nodes, &best, root, |k| g.nodes[ors[k]].belief().clone());
    SolveResult::solved(policy, v, stats)
}

/// Follows the best edges from `root`, collecting the minimal policy.
pub(super) fn extract<V>(nodes: &[FlatNode<V>], best: &[Option<usize>], root: usize, belief: impl Fn(usize) -> Belief) -> Policy {
    let mut policy = Policy::new();
    let mut seen = vec![false; nodes.len()];
    let mut queue = VecDeque::from([root]);
    seen[root] = true;
    while let Some(u) = queue.pop_front() {
        if nodes[u].terminal {
            continue;
        }
        let e = &nodes[u].edges[best[u].expect("finite node has a best edge")];
        policy.insert(belief(u), e.action);
        for &(_, c) in &e.children {
            if !seen[c] {
                seen[c] = true;
                queue.push_back(c);
            }
        }
    }
    policy
}

/// Explicit solving over the beliefs modulo a verified state symmetry.
///
/// Only one representative per orbit is expanded, and actions with the same
/// canonical outcome are merged. The policy is then read off the real model
/// greedily against the quotient values.
pub fn solve_explicit_symmetric<C: Criterion>(model: &DetPomdp, sym: &VerifiedSymmetry, budget: usize) -> SolveResult<C::Value> {
    let t0 = Instant::now();
    let mut index: HashMap<Belief, usize> = HashMap::new();
    let mut beliefs: Vec<Belief> = Vec::new();
    let mut nodes: Vec<FlatNode<C::Value>> = Vec::new();

    let root_belief = sym.canonical(&C::initial_belief(model));
    index.insert(root_belief.clone(), 0);
    beliefs.push(root_belief);
    let mut k = 0;
    let mut expanded = 0;
    while k < beliefs.len() {
        let b = beliefs[k].clone();
        k += 1;
        let terminal = is_target(model, &b);
        let mut edges: Vec<FlatEdge<C::Value>> = Vec::new();
        if !terminal {
            expanded += 1;
            let mut outcomes: HashMap<Vec<(i64, usize)>, Vec<usize>> = HashMap::new();
            for a in applicable_actions(model, &b) {
                let cost = C::action_cost(model, &b, a);
                let (_, parts) = successors(model, &b, a).expect("action is applicable");
                let mut children = Vec::with_capacity(parts.len());
                for (_, p, child) in parts {
                    let c = sym.canonical(&child);
                    let id = match index.get(&c) {
                        Some(&id) => id,
                        None => {
                            let id = beliefs.len();
                            if id >= budget {
                                let stats = SolveStats { expanded, beliefs: id, wall: t0.elapsed() };
                                return SolveResult::unsolved(SolveStatus::BudgetExceeded, stats);
                            }
                            index.insert(c.clone(), id);
                            beliefs.push(c);
                            id
                        }
                    };
                    children.push((p, id));
                }
                let mut key: Vec<(i64, usize)> = children.iter().map(|&(p, id)| ((p * 1e12).round() as i64, id)).collect();
                key.sort_unstable();
                let same = outcomes.entry(key).or_default();
                if !same.iter().any(|&e| edges[e].cost == cost) {
                    same.push(edges.len());
                    edges.push(FlatEdge { action: a, cost, children });
                }
            }
        }
        nodes.push(FlatNode { support_len: b.support().len(), terminal, edges });
    }

    let all: Vec<usize> = (0..nodes.len()).collect();
    let mut value = vec![ExtCost::Infinite; nodes.len()];
    let mut best = vec![None; nodes.len()];
    label_set::<C>(&nodes, &all, &mut value, &mut best);

    let ExtCost::Finite(v) = value[0] else {
        let stats = SolveStats { expanded, beliefs: nodes.len(), wall: t0.elapsed() };
        return SolveResult::unsolved(SolveStatus::NoFinitePolicy, stats);
    };

    // Greedy extraction on real beliefs. Every real belief met here is a
    // symmetric image of an enumerated one, so its successors' orbits are
    // all labelled.
    let lookup = |b: &Belief| value[*index.get(&sym.canonical(b)).expect("orbit was enumerated")];
    let mut policy = Policy::new();
    let mut queue = VecDeque::from([C::initial_belief(model)]);
    let mut seen: HashSet<Belief> = HashSet::new();
    seen.insert(queue[0].clone());
    while let Some(b) = queue.pop_front() {
        if is_target(model, &b) {
            continue;
        }
        let mut choice: Option<(ExtCost<C::Value>, usize, Vec<Belief>)> = None;
        for a in applicable_actions(model, &b) {
            let cost = C::action_cost(model, &b, a);
            let (_, parts) = successors(model, &b, a).expect("action is applicable");
            let q = ExtCost::Finite(cost) + C::aggregate(parts.iter().map(|(_, p, c)| (*p, lookup(c))));
            if choice.as_ref().is_none_or(|(best_q, _, _)| q < *best_q) {
                choice = Some((q, a, parts.into_iter().map(|(_, _, c)| c).collect()));
            }
        }
        let (_, a, children) = choice.expect("finite belief has an action");
        policy.insert(b, a);
        for c in children {
            if seen.insert(c.clone()) {
                queue.push_back(c);
            }
        }
    }
    let stats = SolveStats { expanded, beliefs: nodes.len(), wall: t0.elapsed() };
    SolveResult::solved(policy, v, stats)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost::Rational;
    use crate::criterion::{MinExp, MinMax};
    use crate::model::tests::m3;
    use crate::model::Initial;
    use crate::stateset::StateSet;

    #[test]
    fn m3_value_two() {
        let r = solve_explicit::<MinMax>(&m3(), 100);
        assert_eq!(r.status, SolveStatus::Solved);
        assert_eq!(r.value, ExtCost::Finite(Rational::from_integer(2)));
        assert_eq!(r.policy.unwrap().len(), 2);
        let r = solve_explicit::<MinExp>(&m3(), 100);
        assert_eq!(r.value, ExtCost::Finite(1.5));
    }

    #[test]
    fn dead_end_root_has_no_policy() {
        let mut m = m3();
        m.actions[0].applicable.remove(0);
        m.actions[0].effects[0] = None;
        m.actions[0].costs[0] = None;
        let r = solve_explicit::<MinMax>(&m, 100);
        assert_eq!(r.status, SolveStatus::NoFinitePolicy);
        assert!(r.policy.is_none());
    }

    #[test]
    fn budget_exceeded_reports_partial_count() {
        let r = solve_explicit::<MinMax>(&m3(), 1);
        assert_eq!(r.status, SolveStatus::BudgetExceeded);
        assert!(r.stats.beliefs > 1);
    }

    #[test]
    fn target_root_solves_with_empty_policy() {
        let mut m = m3();
        m.initial = Initial::Set(StateSet::from_states(3, [2]));
        let r = solve_explicit::<MinMax>(&m, 100);
        assert_eq!(r.value, ExtCost::zero());
        assert!(r.policy.unwrap().is_empty());
    }
}
