//! Brute-force oracles and fixtures shared by the integration tests. Each
//! oracle works on the raw model tables, not on the library's beliefs.
#![allow(dead_code)]

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};

use detpomdp::andor::build_graph;
use detpomdp::belief::{self, Belief};
use detpomdp::cost::{rational_to_f64, Rational};
use detpomdp::criterion::Criterion;
use detpomdp::domains::{self, Formula, GridSpec, RandomSpec};
use detpomdp::model::{DetPomdp, Initial};
use detpomdp::perm::{build_from_cycles, LastStateRule, Permutation};
use detpomdp::stateset::StateSet;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn r(x: i64) -> Rational {
    Rational::from_integer(x)
}

/// `right` moves 0 -> 1 -> 2, goal {2}, b0 = {0, 1}.
pub fn m3() -> DetPomdp {
    let mut m = DetPomdp::new(3, 1, StateSet::from_states(3, [2]), Initial::Set(StateSet::from_states(3, [0, 1])));
    let a = m.add_action("right");
    m.set_transition(a, 0, 1, r(1));
    m.set_transition(a, 1, 2, r(1));
    m.make_goals_absorbing();
    m
}

/// The same model with state `i` renamed `perm[i]`.
pub fn relabel(model: &DetPomdp, perm: &[usize]) -> DetPomdp {
    let n = model.num_states;
    let goal = StateSet::from_states(n, model.goal.iter().map(|i| perm[i]));
    let initial = match &model.initial {
        Initial::Set(s) => Initial::Set(StateSet::from_states(n, s.iter().map(|i| perm[i]))),
        Initial::Dist(d) => {
            let mut d: Vec<(usize, f64)> = d.iter().map(|&(i, p)| (perm[i], p)).collect();
            d.sort_by_key(|&(i, _)| i);
            Initial::Dist(d)
        }
    };
    let mut out = DetPomdp::new(n, model.num_observations, goal, initial);
    for (a, act) in model.actions.iter().enumerate() {
        let b = out.add_action(act.name.clone());
        for i in act.applicable.iter() {
            out.set_transition(b, perm[i], perm[model.effect(i, a).unwrap()], model.cost(i, a).unwrap());
        }
        for (i, &p) in perm.iter().enumerate() {
            out.set_obs(p, b, model.obs(i, a));
        }
    }
    out
}

fn is_target(model: &DetPomdp, support: &[usize]) -> bool {
    support.iter().all(|&i| model.goal.contains(i))
}

/// Successors of a support under `a`, grouped by observation; `None` when
/// `a` is not applicable somewhere in the support.
fn split_support(model: &DetPomdp, support: &[usize], a: usize) -> Option<BTreeMap<usize, Vec<usize>>> {
    let mut parts: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for &i in support {
        let j = model.effect(i, a)?;
        let o = model.obs(j, a);
        let part = parts.entry(o).or_default();
        if !part.contains(&j) {
            part.push(j);
        }
    }
    for p in parts.values_mut() {
        p.sort_unstable();
    }
    Some(parts)
}

/// Every support reachable from `b0`, targets included.
pub fn oracle_reachable_supports(model: &DetPomdp) -> Vec<Vec<usize>> {
    let b0: Vec<usize> = model.initial_support().iter().collect();
    let mut seen: HashSet<Vec<usize>> = HashSet::from([b0.clone()]);
    let mut order = vec![b0];
    let mut k = 0;
    while k < order.len() {
        let b = order[k].clone();
        k += 1;
        for a in 0..model.num_actions() {
            if let Some(parts) = split_support(model, &b, a) {
                for c in parts.into_values() {
                    if seen.insert(c.clone()) {
                        order.push(c);
                    }
                }
            }
        }
    }
    order
}

/// Worst-case optimal value by Bellman-Ford style value iteration over
/// every reachable support; `None` when no finite-cost policy exists.
pub fn oracle_minmax(model: &DetPomdp) -> Option<Rational> {
    let beliefs = oracle_reachable_supports(model);
    let index: HashMap<&Vec<usize>, usize> = beliefs.iter().enumerate().map(|(k, b)| (b, k)).collect();
    // (cost, children) per applicable action.
    let edges: Vec<Vec<(Rational, Vec<usize>)>> = beliefs
        .iter()
        .map(|b| {
            (0..model.num_actions())
                .filter_map(|a| {
                    let parts = split_support(model, b, a)?;
                    let cost = b.iter().map(|&i| model.cost(i, a).unwrap()).max().unwrap();
                    Some((cost, parts.values().map(|c| index[c]).collect()))
                })
                .collect()
        })
        .collect();
    let mut v: Vec<Option<Rational>> = beliefs.iter().map(|b| is_target(model, b).then(|| r(0))).collect();
    loop {
        let mut changed = false;
        for k in 0..beliefs.len() {
            if is_target(model, &beliefs[k]) {
                continue;
            }
            for (cost, children) in &edges[k] {
                let worst = children.iter().try_fold(r(0), |acc, &c| v[c].map(|x| acc.max(x)));
                if let Some(w) = worst {
                    let cand = *cost + w;
                    if v[k].is_none_or(|old| cand < old) {
                        v[k] = Some(cand);
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            return v[0];
        }
    }
}

type DistKey = Vec<(usize, i64)>;
/// Per action: expected cost and `(probability, child)` pairs.
type DistEdges = Vec<(f64, Vec<(f64, usize)>)>;

fn dist_key(d: &[(usize, f64)]) -> DistKey {
    d.iter().map(|&(i, p)| (i, (p * 1e12).round() as i64)).collect()
}

/// Expected-cost optimal value by value iteration over reachable
/// distributions. A set `b0` is read as uniform.
pub fn oracle_minexp(model: &DetPomdp) -> Option<f64> {
    let b0 = model.initial_distribution();
    let mut index: HashMap<DistKey, usize> = HashMap::from([(dist_key(&b0), 0)]);
    let mut beliefs = vec![b0];
    let mut edges: Vec<DistEdges> = Vec::new();
    let mut k = 0;
    while k < beliefs.len() {
        let b = beliefs[k].clone();
        k += 1;
        let mut out = Vec::new();
        let support: Vec<usize> = b.iter().map(|&(i, _)| i).collect();
        for a in 0..model.num_actions() {
            if split_support(model, &support, a).is_none() {
                continue;
            }
            let cost: f64 = b.iter().map(|&(i, p)| p * rational_to_f64(&model.cost(i, a).unwrap())).sum();
            let mut parts: BTreeMap<usize, BTreeMap<usize, f64>> = BTreeMap::new();
            for &(i, p) in &b {
                let j = model.effect(i, a).unwrap();
                *parts.entry(model.obs(j, a)).or_default().entry(j).or_default() += p;
            }
            let mut children = Vec::new();
            for part in parts.into_values() {
                let mass: f64 = part.values().sum();
                let child: Vec<(usize, f64)> = part.into_iter().map(|(j, p)| (j, p / mass)).collect();
                let key = dist_key(&child);
                let c = *index.entry(key).or_insert_with(|| {
                    beliefs.push(child);
                    beliefs.len() - 1
                });
                children.push((mass, c));
            }
            out.push((cost, children));
        }
        edges.push(out);
    }
    let target = |b: &Vec<(usize, f64)>| b.iter().all(|&(i, _)| model.goal.contains(i));
    let mut v: Vec<Option<f64>> = beliefs.iter().map(|b| target(b).then_some(0.0)).collect();
    for _ in 0..=beliefs.len() + 1 {
        let mut changed = false;
        for k in 0..beliefs.len() {
            if target(&beliefs[k]) {
                continue;
            }
            for (cost, children) in &edges[k] {
                let exp = children.iter().try_fold(0.0, |acc, &(p, c)| v[c].map(|x| acc + p * x));
                if let Some(e) = exp {
                    let cand = cost + e;
                    if v[k].is_none_or(|old| cand < old - 1e-12) {
                        v[k] = Some(cand);
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
    v[0]
}

pub fn truth_table_sat(f: &Formula) -> bool {
    (0..1u64 << f.num_vars).any(|bits| {
        let asg: Vec<bool> = (0..f.num_vars).map(|i| bits >> i & 1 == 1).collect();
        f.eval(&asg)
    })
}

/// Every element of the group generated by `gens`, by closure under
/// composition.
pub fn bfs_closure(n: usize, gens: &[Permutation]) -> HashSet<Permutation> {
    let id = Permutation::identity(n);
    let mut seen = HashSet::from([id.clone()]);
    let mut queue = VecDeque::from([id]);
    while let Some(p) = queue.pop_front() {
        for g in gens {
            let q = g.compose(&p);
            if seen.insert(q.clone()) {
                queue.push_back(q);
            }
        }
    }
    seen
}

pub fn random_permutation(rng: &mut impl rand::Rng, n: usize) -> Permutation {
    use rand::seq::SliceRandom;
    let mut img: Vec<usize> = (0..n).collect();
    img.shuffle(rng);
    Permutation::from_images(img).unwrap()
}

/// The 2x3 detour grid: start top-left, goal top-right, top-middle unknown.
pub fn detour_grid() -> GridSpec {
    GridSpec { rows: 2, cols: 3, blocked: vec![], unknown: vec![(0, 1)], start: (0, 0), goal: (0, 2) }
}

pub fn random_small(seed: u64, dist: bool) -> DetPomdp {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spec = RandomSpec {
        states: 3 + (seed % 4) as usize,
        actions: 2 + (seed % 3) as usize,
        observations: 1 + (seed % 3) as usize,
        goals: 1,
        initial: 2 + (seed % 2) as usize,
        applicability: 0.85,
        max_cost: 3,
        dist,
    };
    domains::random_model(&spec, &mut rng)
}

/// Named models used by the cross-checks.
pub fn corpus() -> Vec<(String, DetPomdp)> {
    let mut out = vec![
        ("m3".to_string(), m3()),
        ("coins3".into(), domains::gen_coins(3).unwrap()),
        ("coins4".into(), domains::gen_coins(4).unwrap()),
        ("mastermind-1-2".into(), domains::gen_mastermind(1, 2).unwrap()),
        ("mastermind-2-2".into(), domains::gen_mastermind(2, 2).unwrap()),
        ("mastermind-2-3".into(), domains::gen_mastermind(2, 3).unwrap()),
        ("diagnosis-id2".into(), domains::gen_diagnosis(&[vec![true, false], vec![false, true]]).unwrap()),
        (
            "diagnosis-4x2".into(),
            domains::gen_diagnosis(&[vec![false, false], vec![false, true], vec![true, false], vec![true, true]]).unwrap(),
        ),
        ("diagnosis-zero".into(), domains::gen_diagnosis(&[vec![false], vec![false]]).unwrap()),
        ("grid-detour".into(), domains::gen_gridnav(&detour_grid()).unwrap()),
        ("sat-unit".into(), domains::gen_sat(&Formula::new(1, vec![vec![1]]).unwrap()).unwrap()),
        ("sat-contra".into(), domains::gen_sat(&Formula::new(1, vec![vec![1], vec![-1]]).unwrap()).unwrap()),
        ("large-order-2-3".into(), build_from_cycles(&[2, 3], 0, LastStateRule::Precondition).unwrap().model),
        ("large-order-trap-2-3".into(), build_from_cycles(&[2, 3], 0, LastStateRule::Trap).unwrap().model),
    ];
    for seed in 0..30 {
        out.push((format!("random-{seed}"), random_small(seed, seed % 2 == 1)));
    }
    out
}

/// Checks the one-step structure of every OR -> AND -> OR edge in the
/// graph: supports never grow, a step that keeps the support size has a
/// single observation and keeps the probability multiset, and the filtered
/// supports partition the progressed support. Returns the violations.
pub fn graph_violations<C: Criterion>(model: &DetPomdp) -> Vec<String> {
    let g = build_graph::<C>(model, 100_000).expect("small model");
    let mut out = Vec::new();
    for u in g.or_nodes() {
        let parent = g.nodes[u].belief();
        for and in g.nodes[u].targets() {
            let ba = g.nodes[and].belief();
            let kids: Vec<&Belief> = g.nodes[and].targets().into_iter().map(|v| g.nodes[v].belief()).collect();
            if ba.support().len() > parent.support().len() {
                out.push(format!("progress grew {parent} -> {ba}"));
            }
            let mut union: Vec<usize> = kids.iter().flat_map(|k| k.support().iter()).collect();
            let total = union.len();
            union.sort_unstable();
            union.dedup();
            if total != union.len() || union != ba.support().iter().collect::<Vec<_>>() {
                out.push(format!("filtered supports of {ba} do not partition it"));
            }
            for k in &kids {
                if k.support().len() > parent.support().len() {
                    out.push(format!("support grew {parent} -> {k}"));
                }
                if k.support().len() == parent.support().len() {
                    if kids.len() != 1 {
                        out.push(format!("equal-support step {parent} -> {k} branches {} ways", kids.len()));
                    }
                    if let (Some(p), Some(q)) = (parent.as_dist(), k.as_dist()) {
                        let ms = |d: &detpomdp::belief::DistBelief| {
                            let mut v: Vec<i64> = d.iter().map(|(_, x)| (x * 1e9).round() as i64).collect();
                            v.sort_unstable();
                            v
                        };
                        if ms(p) != ms(q) {
                            out.push(format!("equal-support step {parent} -> {k} changed probabilities"));
                        }
                    }
                }
            }
        }
    }
    out
}

/// Follows a random consistent action/observation sequence of length up to
/// `len` along both the table and the direct distribution; returns the
/// largest probability gap, or `None` on a support mismatch.
pub fn table_gap(model: &DetPomdp, rng: &mut impl rand::Rng, len: usize) -> Option<f64> {
    use rand::seq::SliceRandom;
    let mut table = belief::table_init(model);
    let mut b = Belief::Dist(belief::DistBelief::from_pairs(model.num_states, model.initial_distribution()));
    let mut worst = 0.0f64;
    for _ in 0..=len {
        let t = belief::table_to_belief(model, &table);
        if t.support() != b.support() {
            return None;
        }
        for (i, p) in b.weighted() {
            worst = worst.max((t.prob(i) - p).abs());
        }
        let actions = belief::applicable_actions(model, &b);
        let Some(&a) = actions.choose(rng) else { break };
        let (_, parts) = belief::successors(model, &b, a).unwrap();
        let (o, _, next) = parts.choose(rng).unwrap().clone();
        table = belief::table_step(model, &table, a, o).ok()?;
        b = next;
    }
    Some(worst)
}

/// `(1 + n)^n`, saturating.
pub fn table_bound(n: usize) -> u128 {
    (1 + n as u128).saturating_pow(n as u32)
}
