//! Best-first AND/OR search (AO*) over beliefs generated on demand.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap, HashSet, VecDeque};
use std::str::FromStr;
use std::time::Instant;

use crate::belief::{applicable_actions, is_target, successors, Belief};
use crate::cost::{ExtCost, Rational};
use crate::criterion::Criterion;
use crate::model::DetPomdp;

use super::explicit::extract;
use super::label::{label_set, FlatEdge, FlatNode};
use super::{SolveResult, SolveStats, SolveStatus};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Heuristic {
    Zero,
    /// Goal distances of the fully observable relaxation.
    FullObs,
}

impl FromStr for Heuristic {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "zero" => Ok(Heuristic::Zero),
            "fullobs" => Ok(Heuristic::FullObs),
            _ => Err(format!("unknown heuristic {s:?} (expected zero or fullobs)")),
        }
    }
}

/// `d*(i)`: cheapest cost from state `i` to a goal when the state is known.
pub fn fullobs_distances(model: &DetPomdp) -> Vec<ExtCost<Rational>> {
    let n = model.num_states;
    let mut pred: Vec<Vec<(usize, Rational)>> = vec![Vec::new(); n];
    for a in 0..model.num_actions() {
        for i in model.actions[a].applicable.iter() {
            let j = model.effect(i, a).expect("effect on applicable state");
            pred[j].push((i, model.cost(i, a).expect("cost on applicable state")));
        }
    }
    let mut dist = vec![ExtCost::Infinite; n];
    let mut heap = BinaryHeap::new();
    for t in model.goal.iter() {
        dist[t] = ExtCost::zero();
        heap.push(Reverse((Rational::from_integer(0), t)));
    }
    while let Some(Reverse((d, j))) = heap.pop() {
        if dist[j] != ExtCost::Finite(d) {
            continue;
        }
        for &(i, c) in &pred[j] {
            let cand = d + c;
            if ExtCost::Finite(cand) < dist[i] {
                dist[i] = ExtCost::Finite(cand);
                heap.push(Reverse((cand, i)));
            }
        }
    }
    dist
}

struct Search<'m, C: Criterion> {
    model: &'m DetPomdp,
    dist: Option<Vec<ExtCost<Rational>>>,
    index: HashMap<Belief, usize>,
    beliefs: Vec<Belief>,
    nodes: Vec<FlatNode<C::Value>>,
    expanded: Vec<bool>,
    parents: Vec<Vec<usize>>,
    value: Vec<ExtCost<C::Value>>,
    best: Vec<Option<usize>>,
}

impl<C: Criterion> Search<'_, C> {
    fn intern(&mut self, b: Belief) -> usize {
        if let Some(&u) = self.index.get(&b) {
            return u;
        }
        let u = self.beliefs.len();
        let terminal = is_target(self.model, &b);
        let h = if terminal {
            ExtCost::zero()
        } else {
            match &self.dist {
                Some(d) => C::heuristic(&b, d),
                None => ExtCost::zero(),
            }
        };
        self.nodes.push(FlatNode { support_len: b.support().len(), terminal, edges: Vec::new() });
        self.index.insert(b.clone(), u);
        self.beliefs.push(b);
        self.expanded.push(false);
        self.parents.push(Vec::new());
        self.value.push(h);
        self.best.push(None);
        u
    }

    fn expand(&mut self, u: usize) {
        let b = self.beliefs[u].clone();
        let mut edges = Vec::new();
        for a in applicable_actions(self.model, &b) {
            let cost = C::action_cost(self.model, &b, a);
            let (_, parts) = successors(self.model, &b, a).expect("action is applicable");
            let mut children = Vec::with_capacity(parts.len());
            for (_, p, child) in parts {
                let c = self.intern(child);
                if !self.parents[c].contains(&u) {
                    self.parents[c].push(u);
                }
                children.push((p, c));
            }
            edges.push(FlatEdge { action: a, cost, children });
        }
        self.nodes[u].edges = edges;
        self.expanded[u] = true;
    }

    /// Non-terminal, unexpanded nodes reachable along best edges, with
    /// their breadth-first depth.
    fn tips(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        let mut seen = HashSet::from([0]);
        let mut queue = VecDeque::from([(0, 0)]);
        while let Some((u, d)) = queue.pop_front() {
            if self.nodes[u].terminal {
                continue;
            }
            if !self.expanded[u] {
                out.push((u, d));
                continue;
            }
            let Some(k) = self.best[u] else { continue };
            for &(_, c) in &self.nodes[u].edges[k].children {
                if seen.insert(c) {
                    queue.push_back((c, d + 1));
                }
            }
        }
        out
    }

    fn ancestors(&self, u: usize) -> Vec<usize> {
        let mut seen = HashSet::from([u]);
        let mut stack = vec![u];
        while let Some(v) = stack.pop() {
            for &p in &self.parents[v] {
                if seen.insert(p) {
                    stack.push(p);
                }
            }
        }
        seen.into_iter().collect()
    }
}

/// AO*: repeatedly expands the deepest open tip of the best partial
/// solution and revises the values of its ancestors.
pub fn solve_heuristic<C: Criterion>(model: &DetPomdp, heuristic: Heuristic, budget: usize) -> SolveResult<C::Value> {
    let t0 = Instant::now();
    let mut s: Search<C> = Search {
        model,
        dist: (heuristic == Heuristic::FullObs).then(|| fullobs_distances(model)),
        index: HashMap::new(),
        beliefs: Vec::new(),
        nodes: Vec::new(),
        expanded: Vec::new(),
        parents: Vec::new(),
        value: Vec::new(),
        best: Vec::new(),
    };
    s.intern(C::initial_belief(model));
    let mut expansions = 0;
    loop {
        let stats = |s: &Search<C>, expanded| SolveStats { expanded, beliefs: s.beliefs.len(), wall: t0.elapsed() };
        if !s.value[0].is_finite() {
            return SolveResult::unsolved(SolveStatus::NoFinitePolicy, stats(&s, expansions));
        }
        let tips = s.tips();
        let Some(&(u, _)) = tips.iter().max_by_key(|&&(u, d)| (d, Reverse(u))) else {
            let ExtCost::Finite(v) = s.value[0] else { unreachable!() };
            let policy = extract(&s.nodes, &s.best, 0, |k| s.beliefs[k].clone());
            return SolveResult::solved(policy, v, stats(&s, expansions));
        };
        s.expand(u);
        expansions += 1;
        if s.beliefs.len() > budget {
            return SolveResult::unsolved(SolveStatus::BudgetExceeded, stats(&s, expansions));
        }
        let z = s.ancestors(u);
        label_set::<C>(&s.nodes, &z, &mut s.value, &mut s.best);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::criterion::{MinExp, MinMax};
    use crate::model::tests::m3;

    #[test]
    fn m3_distances() {
        let d = fullobs_distances(&m3());
        let r = |x| ExtCost::Finite(Rational::from_integer(x));
        assert_eq!(d, vec![r(2), r(1), r(0)]);
    }

    #[test]
    fn m3_both_heuristics() {
        let m = m3();
        let zero = solve_heuristic::<MinMax>(&m, Heuristic::Zero, 100);
        let full = solve_heuristic::<MinMax>(&m, Heuristic::FullObs, 100);
        assert_eq!(zero.value, ExtCost::Finite(Rational::from_integer(2)));
        assert_eq!(full.value, zero.value);
        assert!(zero.stats.expanded >= full.stats.expanded);
        assert_eq!(solve_heuristic::<MinExp>(&m, Heuristic::FullObs, 100).value, ExtCost::Finite(1.5));
    }
}
