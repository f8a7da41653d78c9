use std::collections::{HashMap, VecDeque};

use num_bigint::BigUint;

use super::Permutation;

struct Level {
    point: usize,
    /// Strong generators fixing every earlier base point.
    gens: Vec<Permutation>,
    /// `transversal[b] = u_b` with `u_b(point) = b`, for `b` in the orbit.
    transversal: Vec<Option<Permutation>>,
    orbit: Vec<usize>,
}

impl Level {
    fn rebuild_orbit(&mut self, n: usize) {
        self.transversal = vec![None; n];
        self.transversal[self.point] = Some(Permutation::identity(n));
        self.orbit = vec![self.point];
        let mut k = 0;
        while k < self.orbit.len() {
            let b = self.orbit[k];
            let ub = self.transversal[b].clone().expect("orbit point has a transversal");
            for s in &self.gens {
                let c = s.apply(b);
                if self.transversal[c].is_none() {
                    self.transversal[c] = Some(s.compose(&ub));
                    self.orbit.push(c);
                }
            }
            k += 1;
        }
    }
}

/// Stabilizer chain for the base `0, 1, ..., n-1`, built by the
/// deterministic Schreier-Sims algorithm.
pub struct StabChain {
    n: usize,
    levels: Vec<Level>,
}

impl StabChain {
    pub fn new(n: usize, gens: &[Permutation]) -> Self {
        let levels = (0..n).map(|point| Level { point, gens: Vec::new(), transversal: Vec::new(), orbit: Vec::new() }).collect();
        let mut chain = StabChain { n, levels };
        for l in &mut chain.levels {
            l.rebuild_orbit(n);
        }
        for g in gens {
            assert_eq!(g.degree(), n, "generator degree");
            let (h, _) = chain.sift(g.clone(), 0);
            if !h.is_identity() {
                chain.add_strong(h);
            }
        }
        chain
    }

    /// Strips `g` through the levels from `from`; returns the residue and
    /// the level where stripping stopped (`n` when it went all the way).
    fn sift(&self, mut g: Permutation, from: usize) -> (Permutation, usize) {
        for k in from..self.n {
            let b = g.apply(self.levels[k].point);
            match &self.levels[k].transversal[b] {
                Some(u) => g = u.inverse().compose(&g),
                None => return (g, k),
            }
        }
        (g, self.n)
    }

    fn first_moved(g: &Permutation) -> usize {
        (0..g.degree()).find(|&i| g.apply(i) != i).expect("non-identity")
    }

    /// Adds a non-identity strong generator and restores the chain's
    /// closure, working from its deepest affected level upward.
    fn add_strong(&mut self, h: Permutation) {
        let j = Self::first_moved(&h);
        for l in 0..=j {
            self.levels[l].gens.push(h.clone());
        }
        let mut k = j as isize;
        while k >= 0 {
            let ku = k as usize;
            self.levels[ku].rebuild_orbit(self.n);
            match self.schreier_failure(ku) {
                Some(res) => {
                    let jj = Self::first_moved(&res);
                    for l in 0..=jj {
                        self.levels[l].gens.push(res.clone());
                    }
                    k = jj as isize;
                }
                None => k -= 1,
            }
        }
    }

    /// First Schreier generator of level `k` that does not sift through
    /// the deeper levels, as its residue.
    fn schreier_failure(&self, k: usize) -> Option<Permutation> {
        let lv = &self.levels[k];
        for &b in &lv.orbit {
            let ub = lv.transversal[b].as_ref().expect("orbit point");
            for s in &lv.gens {
                let c = s.apply(b);
                let uc = lv.transversal[c].as_ref().expect("orbit is closed");
                let h = uc.inverse().compose(&s.compose(ub));
                let (res, _) = self.sift(h, k + 1);
                if !res.is_identity() {
                    return Some(res);
                }
            }
        }
        None
    }

    pub fn contains(&self, g: &Permutation) -> bool {
        g.degree() == self.n && self.sift(g.clone(), 0).0.is_identity()
    }

    /// Product of the basic orbit lengths.
    pub fn order(&self) -> BigUint {
        self.levels.iter().fold(BigUint::from(1u32), |acc, l| acc * BigUint::from(l.orbit.len()))
    }
}

/// Whether `sigma` lies in the group generated by `gens`.
pub fn group_membership(gens: &[Permutation], sigma: &Permutation) -> bool {
    StabChain::new(sigma.degree(), gens).contains(sigma)
}

/// A shortest word `[g_1, .., g_k]` (generator indices) with
/// `g_k ∘ .. ∘ g_1 = sigma`, found by breadth-first search over at most
/// `max_nodes` group elements.
pub fn word_for(gens: &[Permutation], sigma: &Permutation, max_nodes: usize) -> Option<Vec<usize>> {
    let id = Permutation::identity(sigma.degree());
    let mut parent: HashMap<Permutation, Option<(Permutation, usize)>> = HashMap::from([(id.clone(), None)]);
    let mut queue = VecDeque::from([id]);
    let mut found = parent.contains_key(sigma);
    while !found {
        let Some(p) = queue.pop_front() else { break };
        for (k, g) in gens.iter().enumerate() {
            let q = g.compose(&p);
            if parent.contains_key(&q) {
                continue;
            }
            if parent.len() >= max_nodes {
                return None;
            }
            parent.insert(q.clone(), Some((p.clone(), k)));
            if &q == sigma {
                found = true;
                break;
            }
            queue.push_back(q);
        }
    }
    if !found {
        return None;
    }
    let mut word = Vec::new();
    let mut cur = sigma.clone();
    while let Some(Some((p, k))) = parent.get(&cur) {
        word.push(*k);
        cur = p.clone();
    }
    word.reverse();
    Some(word)
}
