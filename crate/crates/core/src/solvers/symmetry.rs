//! Block symmetries: groups of states that can be permuted wholesale
//! without changing the model, up to renaming actions and observations.

use std::collections::{HashMap, HashSet};

use thiserror::Error;

use crate::belief::{Belief, DistBelief};
use crate::cost::Rational;
use crate::model::{DetPomdp, StateId};

/// Equal-length, disjoint blocks of states. The symmetry group is every
/// permutation of whole blocks, position `k` of one block going to
/// position `k` of another.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Symmetry {
    pub blocks: Vec<Vec<StateId>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum SymmetryError {
    #[error("blocks must be non-empty and of equal length")]
    Shape,
    #[error("state {0} is out of range or appears in two blocks")]
    Overlap(StateId),
    #[error("swapping blocks {0} and {1} does not preserve the goal or initial belief")]
    Boundary(usize, usize),
    #[error("swapping blocks {0} and {1} maps action {2} to no action of the model")]
    Action(usize, usize, String),
}

/// A symmetry checked against a model; only these can canonicalize beliefs.
#[derive(Clone, Debug)]
pub struct VerifiedSymmetry {
    blocks: Vec<Vec<StateId>>,
}

type ActionKey = (Vec<Option<StateId>>, Vec<Option<Rational>>, Vec<u32>);

fn normalize_labels(labels: impl Iterator<Item = usize>) -> Vec<u32> {
    let mut map: HashMap<usize, u32> = HashMap::new();
    labels
        .map(|o| {
            let next = map.len() as u32;
            *map.entry(o).or_insert(next)
        })
        .collect()
}

fn action_key(model: &DetPomdp, a: usize, perm: &[StateId]) -> ActionKey {
    let n = model.num_states;
    let mut effects = vec![None; n];
    let mut costs = vec![None; n];
    let mut obs = vec![0; n];
    for i in 0..n {
        effects[perm[i]] = model.effect(i, a).map(|j| perm[j]);
        costs[perm[i]] = model.cost(i, a);
        obs[perm[i]] = model.obs(i, a);
    }
    (effects, costs, normalize_labels(obs.into_iter()))
}

impl Symmetry {
    fn swap_perm(&self, n: usize, x: usize, y: usize) -> Vec<StateId> {
        let mut perm: Vec<StateId> = (0..n).collect();
        for (&s, &t) in self.blocks[x].iter().zip(&self.blocks[y]) {
            perm[s] = t;
            perm[t] = s;
        }
        perm
    }

    /// Checks that every block transposition is an automorphism of `model`.
    /// Adjacent transpositions generate all block permutations.
    pub fn verify(&self, model: &DetPomdp) -> Result<VerifiedSymmetry, SymmetryError> {
        let n = model.num_states;
        let width = self.blocks.first().map_or(0, Vec::len);
        if width == 0 || self.blocks.iter().any(|b| b.len() != width) {
            return Err(SymmetryError::Shape);
        }
        let mut used = vec![false; n];
        for &s in self.blocks.iter().flatten() {
            if s >= n || used[s] {
                return Err(SymmetryError::Overlap(s));
            }
            used[s] = true;
        }
        let identity: Vec<StateId> = (0..n).collect();
        let index: HashSet<ActionKey> = (0..model.num_actions()).map(|a| action_key(model, a, &identity)).collect();
        let dist = model.initial_distribution();
        let init = model.initial_support();
        for x in 0..self.blocks.len().saturating_sub(1) {
            let perm = self.swap_perm(n, x, x + 1);
            let goal_ok = (0..n).all(|i| model.goal.contains(i) == model.goal.contains(perm[i]));
            let init_ok = (0..n).all(|i| init.contains(i) == init.contains(perm[i]));
            let prob = |i: StateId| dist.iter().find(|&&(j, _)| j == i).map_or(0.0, |&(_, p)| p);
            let dist_ok = dist.iter().all(|&(i, p)| (prob(perm[i]) - p).abs() <= 1e-12);
            if !goal_ok || !init_ok || !dist_ok {
                return Err(SymmetryError::Boundary(x, x + 1));
            }
            for a in 0..model.num_actions() {
                if !index.contains(&action_key(model, a, &perm)) {
                    return Err(SymmetryError::Action(x, x + 1, model.actions[a].name.clone()));
                }
            }
        }
        Ok(VerifiedSymmetry { blocks: self.blocks.clone() })
    }
}

impl VerifiedSymmetry {
    /// The orbit representative: blocks reordered so their membership
    /// patterns are sorted.
    pub fn canonical(&self, b: &Belief) -> Belief {
        match b {
            Belief::Set(s) => {
                let mut patterns: Vec<Vec<bool>> = self.blocks.iter().map(|blk| blk.iter().map(|&i| s.contains(i)).collect()).collect();
                patterns.sort_unstable();
                let mut out = s.clone();
                for (blk, pat) in self.blocks.iter().zip(&patterns) {
                    for (&i, &on) in blk.iter().zip(pat) {
                        if on {
                            out.insert(i);
                        } else {
                            out.remove(i);
                        }
                    }
                }
                Belief::Set(out)
            }
            Belief::Dist(d) => {
                let n = d.support().capacity();
                let mut probs: Vec<f64> = vec![0.0; n];
                for (i, p) in d.iter() {
                    probs[i] = p;
                }
                let key = |p: f64| (p * 1e12).round() as i64;
                let mut patterns: Vec<Vec<(i64, f64)>> =
                    self.blocks.iter().map(|blk| blk.iter().map(|&i| (key(probs[i]), probs[i])).collect()).collect();
                patterns.sort_unstable_by(|x, y| x.iter().map(|e| e.0).cmp(y.iter().map(|e| e.0)));
                for (blk, pat) in self.blocks.iter().zip(&patterns) {
                    for (&i, &(_, p)) in blk.iter().zip(pat) {
                        probs[i] = p;
                    }
                }
                let pairs = probs.into_iter().enumerate().filter(|&(_, p)| p > 0.0);
                Belief::Dist(DistBelief::from_pairs(n, pairs))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Initial;
    use crate::stateset::StateSet;

    /// Two interchangeable probes: action "probe_k" flags state k.
    fn twin() -> DetPomdp {
        let n = 3;
        let mut m = DetPomdp::new(n, 2, StateSet::from_states(n, [2]), Initial::Set(StateSet::from_states(n, [0, 1])));
        let one = Rational::from_integer(1);
        for k in 0..2 {
            let a = m.add_action(format!("probe_{k}"));
            for i in 0..2 {
                m.set_transition(a, i, i, one);
            }
            m.set_obs(k, a, 1);
        }
        m.make_goals_absorbing();
        m
    }

    #[test]
    fn swapping_probes_is_a_symmetry() {
        let m = twin();
        let sym = Symmetry { blocks: vec![vec![0], vec![1]] }.verify(&m).unwrap();
        let a = Belief::Set(StateSet::from_states(3, [0]));
        let b = Belief::Set(StateSet::from_states(3, [1]));
        assert_eq!(sym.canonical(&a), sym.canonical(&b));
    }

    #[test]
    fn broken_symmetry_is_rejected() {
        let mut m = twin();
        m.actions[1].costs[1] = Some(Rational::from_integer(2));
        let err = Symmetry { blocks: vec![vec![0], vec![1]] }.verify(&m).unwrap_err();
        assert!(matches!(err, SymmetryError::Action(0, 1, _)));
        let err = Symmetry { blocks: vec![vec![0], vec![0]] }.verify(&m).unwrap_err();
        assert_eq!(err, SymmetryError::Overlap(0));
        let err = Symmetry { blocks: vec![vec![0], vec![2]] }.verify(&twin()).unwrap_err();
        assert_eq!(err, SymmetryError::Boundary(0, 1));
    }
}
