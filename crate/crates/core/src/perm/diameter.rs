use std::collections::{HashMap, VecDeque};
use std::fmt;

use crate::andor::{reachable_beliefs, BudgetExceeded};
use crate::belief::{applicable_actions, successors, Belief};
use crate::criterion::Criterion;
use crate::model::{DetPomdp, StateId};

use super::{action_as_permutation, NotPermutation};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Verdict {
    PolynomialByConstantSupport,
    PolynomialByAcyclicTM,
    BoundedCycleLengths,
    BoundedSupportMoves,
    Unknown,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DiameterConfig {
    pub support_bound: usize,
    pub cycle_bound: usize,
    pub moved_bound: usize,
}

impl Default for DiameterConfig {
    fn default() -> Self {
        DiameterConfig { support_bound: 3, cycle_bound: 3, moved_bound: 3 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiameterReport {
    pub verdict: Verdict,
    pub config: DiameterConfig,
    pub support_size: usize,
    /// A cycle of the transition graph, ignoring self-loops.
    pub tm_cycle: Option<Vec<StateId>>,
    /// Set when every action is a permutation with empty precondition.
    pub max_cycle_len: Option<usize>,
    pub max_moved: Option<usize>,
    /// The first action that is not a permutation.
    pub non_permutation: Option<(String, NotPermutation)>,
}

impl DiameterReport {
    fn verdict_from_witness(&self) -> Verdict {
        let c = &self.config;
        if self.support_size <= c.support_bound {
            Verdict::PolynomialByConstantSupport
        } else if self.tm_cycle.is_none() {
            Verdict::PolynomialByAcyclicTM
        } else if self.max_cycle_len.is_some_and(|l| l <= c.cycle_bound) {
            Verdict::BoundedCycleLengths
        } else if self.max_moved.is_some_and(|m| m <= c.moved_bound) {
            Verdict::BoundedSupportMoves
        } else {
            Verdict::Unknown
        }
    }

    /// Whether the verdict follows from the witness data, and the witness
    /// data agrees with `model`.
    pub fn recheck(&self, model: &DetPomdp) -> bool {
        diameter_conditions_with(model, self.config) == *self && self.verdict_from_witness() == self.verdict
    }
}

impl fmt::Display for DiameterReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "verdict {}", self.verdict)?;
        writeln!(f, "support_size {} bound {}", self.support_size, self.config.support_bound)?;
        match &self.tm_cycle {
            None => writeln!(f, "transition_graph acyclic")?,
            Some(c) => {
                let s: Vec<String> = c.iter().map(|i| i.to_string()).collect();
                writeln!(f, "transition_graph cycle {}", s.join(" "))?
            }
        }
        match (&self.max_cycle_len, &self.max_moved, &self.non_permutation) {
            (Some(l), Some(m), _) => writeln!(
                f,
                "permutations all max_cycle {l} bound {} max_moved {m} bound {}",
                self.config.cycle_bound, self.config.moved_bound
            ),
            (_, _, Some((name, why))) => writeln!(f, "permutations not {name:?}: {why}"),
            _ => writeln!(f, "permutations not"),
        }
    }
}

pub fn diameter_conditions(model: &DetPomdp) -> DiameterReport {
    diameter_conditions_with(model, DiameterConfig::default())
}

pub fn diameter_conditions_with(model: &DetPomdp, config: DiameterConfig) -> DiameterReport {
    let support_size = model.initial_support().len();
    let tm_cycle = model.transition_graph().find_cycle();
    let mut max_cycle_len = Some(0);
    let mut max_moved = Some(0);
    let mut non_permutation = None;
    for a in 0..model.num_actions() {
        match action_as_permutation(model, a) {
            Ok(p) => {
                let l = p.cycle_lengths().into_iter().max().unwrap_or(0);
                max_cycle_len = max_cycle_len.map(|m: usize| m.max(l));
                max_moved = max_moved.map(|m: usize| m.max(p.moved()));
            }
            Err(e) => {
                non_permutation = Some((model.actions[a].name.clone(), e));
                max_cycle_len = None;
                max_moved = None;
                break;
            }
        }
    }
    let mut r = DiameterReport { verdict: Verdict::Unknown, config, support_size, tm_cycle, max_cycle_len, max_moved, non_permutation };
    r.verdict = r.verdict_from_witness();
    r
}

/// Exact diameter: for every reachable belief, the eccentricity of the
/// breadth-first search restricted to beliefs of the same support size.
/// `budget` bounds the beliefs enumerated plus the search visits.
pub fn measure_diameter<C: Criterion>(model: &DetPomdp, budget: usize) -> Result<usize, BudgetExceeded> {
    let beliefs = reachable_beliefs::<C>(model, budget, true)?;
    let index: HashMap<&Belief, usize> = beliefs.iter().enumerate().map(|(k, b)| (b, k)).collect();
    let same: Vec<Vec<usize>> = beliefs
        .iter()
        .map(|b| {
            let mut out = Vec::new();
            for a in applicable_actions(model, b) {
                let (_, parts) = successors(model, b, a).expect("action is applicable");
                for (_, _, c) in parts {
                    if c.support().len() == b.support().len() {
                        let k = index[&c];
                        if !out.contains(&k) {
                            out.push(k);
                        }
                    }
                }
            }
            out
        })
        .collect();

    let mut work = beliefs.len();
    let mut dist = vec![usize::MAX; beliefs.len()];
    let mut diameter = 0;
    for root in 0..beliefs.len() {
        dist.iter_mut().for_each(|d| *d = usize::MAX);
        dist[root] = 0;
        let mut queue = VecDeque::from([root]);
        while let Some(u) = queue.pop_front() {
            work += 1;
            if work > budget {
                return Err(BudgetExceeded { budget, count: work });
            }
            diameter = diameter.max(dist[u]);
            for &v in &same[u] {
                if dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    queue.push_back(v);
                }
            }
        }
    }
    Ok(diameter)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChunkProfile {
    /// Maximal runs of equal support size, as `(size, length)`.
    pub chunks: Vec<(usize, usize)>,
    /// Strict decreases in support size.
    pub jumps: usize,
}

pub fn chunk_profile(beliefs: &[Belief]) -> ChunkProfile {
    let mut chunks: Vec<(usize, usize)> = Vec::new();
    let mut jumps = 0;
    for b in beliefs {
        let s = b.support().len();
        match chunks.last_mut() {
            Some((size, len)) if *size == s => *len += 1,
            Some((size, _)) => {
                if s < *size {
                    jumps += 1;
                }
                chunks.push((s, 1));
            }
            None => chunks.push((s, 1)),
        }
    }
    if let Some(b) = beliefs.first() {
        assert!(jumps <= b.support().capacity(), "more jumps than states");
    }
    ChunkProfile { chunks, jumps }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost::Rational;
    use crate::criterion::MinMax;
    use crate::model::tests::m3;
    use crate::model::Initial;
    use crate::stateset::StateSet;

    fn set(n: usize, s: &[usize]) -> Belief {
        Belief::Set(StateSet::from_states(n, s.iter().copied()))
    }

    #[test]
    fn m3_conditions_and_diameter() {
        let m = m3();
        let r = diameter_conditions(&m);
        assert_eq!(r.verdict, Verdict::PolynomialByConstantSupport);
        assert!(r.recheck(&m));
        assert_eq!(measure_diameter::<MinMax>(&m, 1000), Ok(1));
    }

    #[test]
    fn acyclic_fires_past_support_bound() {
        let mut m = m3();
        let cfg = DiameterConfig { support_bound: 1, ..DiameterConfig::default() };
        m.initial = Initial::Set(StateSet::from_states(3, [0, 1]));
        let r = diameter_conditions_with(&m, cfg);
        assert_eq!(r.verdict, Verdict::PolynomialByAcyclicTM);
        assert!(r.to_string().contains("transition_graph acyclic"));
    }

    #[test]
    fn identity_actions_have_diameter_zero() {
        let mut m = DetPomdp::new(3, 1, StateSet::from_states(3, [2]), Initial::Set(StateSet::from_states(3, [0, 1])));
        let a = m.add_action("stay");
        for i in 0..3 {
            let c = if i == 2 { 0 } else { 1 };
            m.set_transition(a, i, i, Rational::from_integer(c));
        }
        assert_eq!(measure_diameter::<MinMax>(&m, 1000), Ok(0));
        let r = diameter_conditions(&m);
        assert_eq!(r.max_cycle_len, Some(1));
        assert_eq!(r.max_moved, Some(0));
    }

    #[test]
    fn chunks_of_m3_plan() {
        let p = chunk_profile(&[set(3, &[0, 1]), set(3, &[1, 2]), set(3, &[2])]);
        assert_eq!(p.chunks, vec![(2, 2), (1, 1)]);
        assert_eq!(p.jumps, 1);
        let p = chunk_profile(&[set(3, &[0, 1]), set(3, &[1, 2])]);
        assert_eq!((p.chunks, p.jumps), (vec![(2, 2)], 0));
    }

    #[test]
    fn budget_is_enforced() {
        assert!(measure_diameter::<MinMax>(&m3(), 2).is_err());
    }
}
