//! Permutations, permutation groups, and the structural analyses built on
//! them: diameter conditions, certificate checks, large-order instances.

mod diameter;
mod group;
mod large_order;

use std::fmt;

use num_bigint::BigUint;
use num_integer::Integer;
use thiserror::Error;

use crate::model::{ActionId, DetPomdp, StateId};

pub use diameter::{chunk_profile, diameter_conditions, diameter_conditions_with, measure_diameter, ChunkProfile, DiameterConfig, DiameterReport, Verdict};
pub use group::{group_membership, word_for, StabChain};
pub use large_order::{
    build_from_cycles, build_large_order_instance, crossing_table, prime_packing, Crossing, LargeOrderError, LargeOrderInstance,
    LastStateRule,
};

/// A bijection on `0..n`, stored as its image vector.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    img: Vec<StateId>,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum PermutationError {
    #[error("image {0} is out of range")]
    OutOfRange(StateId),
    #[error("state {image} has several preimages {preimages:?}")]
    NotInjective { image: StateId, preimages: Vec<StateId> },
    #[error("cycle notation repeats state {0}")]
    RepeatedInCycles(StateId),
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Permutation { img: (0..n).collect() }
    }

    pub fn from_images(img: Vec<StateId>) -> Result<Self, PermutationError> {
        let n = img.len();
        let mut pre: Vec<Vec<StateId>> = vec![Vec::new(); n];
        for (i, &j) in img.iter().enumerate() {
            if j >= n {
                return Err(PermutationError::OutOfRange(j));
            }
            pre[j].push(i);
        }
        if let Some(image) = pre.iter().position(|p| p.len() > 1) {
            return Err(PermutationError::NotInjective { image, preimages: pre[image].clone() });
        }
        Ok(Permutation { img })
    }

    /// Builds from disjoint cycles; unlisted states are fixed.
    pub fn from_cycles(n: usize, cycles: &[Vec<StateId>]) -> Result<Self, PermutationError> {
        let mut img: Vec<StateId> = (0..n).collect();
        let mut seen = vec![false; n];
        for c in cycles {
            for (k, &s) in c.iter().enumerate() {
                if s >= n {
                    return Err(PermutationError::OutOfRange(s));
                }
                if seen[s] {
                    return Err(PermutationError::RepeatedInCycles(s));
                }
                seen[s] = true;
                img[s] = c[(k + 1) % c.len()];
            }
        }
        Ok(Permutation { img })
    }

    pub fn degree(&self) -> usize {
        self.img.len()
    }

    #[inline]
    pub fn apply(&self, i: StateId) -> StateId {
        self.img[i]
    }

    pub fn images(&self) -> &[StateId] {
        &self.img
    }

    /// `(self ∘ other)(x) = self(other(x))`.
    pub fn compose(&self, other: &Permutation) -> Permutation {
        Permutation { img: other.img.iter().map(|&x| self.img[x]).collect() }
    }

    pub fn inverse(&self) -> Permutation {
        let mut img = vec![0; self.img.len()];
        for (i, &j) in self.img.iter().enumerate() {
            img[j] = i;
        }
        Permutation { img }
    }

    pub fn is_identity(&self) -> bool {
        self.img.iter().enumerate().all(|(i, &j)| i == j)
    }

    pub fn pow(&self, mut k: u64) -> Permutation {
        let mut base = self.clone();
        let mut acc = Permutation::identity(self.degree());
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.compose(&base);
            }
            base = base.compose(&base);
            k >>= 1;
        }
        acc
    }

    /// Disjoint cycles covering every state, fixed points included, each
    /// starting at its smallest state.
    pub fn cycles(&self) -> Vec<Vec<StateId>> {
        let mut seen = vec![false; self.img.len()];
        let mut out = Vec::new();
        for s in 0..self.img.len() {
            if seen[s] {
                continue;
            }
            let mut c = vec![s];
            seen[s] = true;
            let mut t = self.img[s];
            while t != s {
                seen[t] = true;
                c.push(t);
                t = self.img[t];
            }
            out.push(c);
        }
        out
    }

    pub fn cycle_lengths(&self) -> Vec<usize> {
        self.cycles().iter().map(Vec::len).collect()
    }

    /// Number of states not fixed.
    pub fn moved(&self) -> usize {
        self.img.iter().enumerate().filter(|&(i, &j)| i != j).count()
    }

    /// Least common multiple of the cycle lengths.
    pub fn order(&self) -> BigUint {
        self.cycle_lengths().into_iter().fold(BigUint::from(1u32), |acc, l| acc.lcm(&BigUint::from(l)))
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in self.cycles() {
            f.write_str("(")?;
            for (k, s) in c.iter().enumerate() {
                if k > 0 {
                    f.write_str(" ")?;
                }
                write!(f, "{s}")?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum NotPermutation {
    #[error("not applicable at state {0}")]
    Precondition(StateId),
    #[error("state {image} has several preimages {preimages:?}")]
    NotInjective { image: StateId, preimages: Vec<StateId> },
}

/// The action's transition function as a permutation, when it is
/// applicable everywhere and bijective.
pub fn action_as_permutation(model: &DetPomdp, a: ActionId) -> Result<Permutation, NotPermutation> {
    let mut img = Vec::with_capacity(model.num_states);
    for i in 0..model.num_states {
        img.push(model.effect(i, a).ok_or(NotPermutation::Precondition(i))?);
    }
    Permutation::from_images(img).map_err(|e| match e {
        PermutationError::NotInjective { image, preimages } => NotPermutation::NotInjective { image, preimages },
        other => unreachable!("effects are in range: {other}"),
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("action {action:?} is not a permutation with empty precondition: {reason}")]
pub struct WrongClass {
    pub action: String,
    pub reason: NotPermutation,
}

/// Checks a policy-existence certificate for an unobservable model whose
/// actions are all permutations: `sigma` must send the initial support into
/// the goal and lie in the group the actions generate.
pub fn pef_certificate_check(model: &DetPomdp, sigma: &Permutation) -> Result<bool, WrongClass> {
    let mut gens = Vec::with_capacity(model.num_actions());
    for a in 0..model.num_actions() {
        let p = action_as_permutation(model, a).map_err(|reason| WrongClass { action: model.actions[a].name.clone(), reason })?;
        gens.push(p);
    }
    let into_goal = model.initial_support().iter().all(|i| model.goal.contains(sigma.apply(i)));
    Ok(into_goal && sigma.degree() == model.num_states && group_membership(&gens, sigma))
}
