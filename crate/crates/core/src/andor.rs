//! Compilation of a model into an AND/OR graph over beliefs, and
//! validation and costing of solution subgraphs.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt::{self, Write as _};

use thiserror::Error;

use crate::belief::{applicable_actions, is_target, successors, Belief};
use crate::cost::ExtCost;
use crate::criterion::{Criterion, CriterionKind};
use crate::model::{ActionId, DetPomdp, ObsId};
use crate::policy::Policy;

pub type NodeId = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Error)]
#[error("node budget of {budget} exceeded ({count} nodes generated)")]
pub struct BudgetExceeded {
    pub budget: usize,
    pub count: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OrEdge<V> {
    pub action: ActionId,
    pub cost: V,
    pub target: NodeId,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AndEdge {
    pub obs: ObsId,
    /// `b_a(o)`; present for expected-cost graphs only.
    pub prob: Option<f64>,
    pub target: NodeId,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Node<V> {
    /// A belief `b`.
    Or {
        belief: Belief,
        terminal: bool,
        edges: Vec<OrEdge<V>>,
    },
    /// A progressed belief `b_a`, before observation.
    And {
        belief: Belief,
        action: ActionId,
        edges: Vec<AndEdge>,
    },
}

impl<V> Node<V> {
    pub fn belief(&self) -> &Belief {
        match self {
            Node::Or { belief, .. } | Node::And { belief, .. } => belief,
        }
    }

    pub fn is_or(&self) -> bool {
        matches!(self, Node::Or { .. })
    }

    pub fn is_terminal(&self) -> bool {
        matches!(self, Node::Or { terminal: true, .. })
    }

    pub fn targets(&self) -> Vec<NodeId> {
        match self {
            Node::Or { edges, .. } => edges.iter().map(|e| e.target).collect(),
            Node::And { edges, .. } => edges.iter().map(|e| e.target).collect(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct AndOrGraph<V> {
    pub criterion: CriterionKind,
    pub nodes: Vec<Node<V>>,
    pub root: NodeId,
    or_index: HashMap<Belief, NodeId>,
}

impl<V> AndOrGraph<V> {
    pub fn or_node(&self, b: &Belief) -> Option<NodeId> {
        self.or_index.get(b).copied()
    }

    pub fn or_nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.nodes.len()).filter(|&u| self.nodes[u].is_or())
    }

    pub fn and_nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.nodes.len()).filter(|&u| !self.nodes[u].is_or())
    }

    pub fn terminals(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.nodes.len()).filter(|&u| self.nodes[u].is_terminal())
    }

    pub fn num_edges(&self) -> usize {
        self.nodes.iter().map(|n| n.targets().len()).sum()
    }
}

impl<V: fmt::Debug> AndOrGraph<V> {
    /// One line per node: id, kind, belief, labelled edges.
    pub fn dump(&self, model: &DetPomdp, fmt_cost: impl Fn(&V) -> String) -> String {
        let mut out = String::new();
        for (u, node) in self.nodes.iter().enumerate() {
            match node {
                Node::Or { belief, terminal, edges } => {
                    write!(out, "{u} OR {belief}").unwrap();
                    if *terminal {
                        out.push_str(" terminal");
                    } else if edges.is_empty() {
                        out.push_str(" dead-end");
                    }
                    for e in edges {
                        write!(out, " -> {} [{} cost {}]", e.target, model.actions[e.action].name, fmt_cost(&e.cost)).unwrap();
                    }
                }
                Node::And { belief, action, edges } => {
                    write!(out, "{u} AND {belief} {}", model.actions[*action].name).unwrap();
                    for e in edges {
                        match e.prob {
                            Some(p) => write!(out, " -> {} [o{} p {}]", e.target, e.obs, crate::cost::format_sig9(p)).unwrap(),
                            None => write!(out, " -> {} [o{}]", e.target, e.obs).unwrap(),
                        }
                    }
                }
            }
            out.push('\n');
        }
        out
    }
}

/// Breadth-first compilation from `b0`. Target beliefs become terminals and
/// are not expanded; dead ends are kept without edges.
pub fn build_graph<C: Criterion>(model: &DetPomdp, budget: usize) -> Result<AndOrGraph<C::Value>, BudgetExceeded> {
    let mut g = AndOrGraph {
        criterion: C::KIND,
        nodes: Vec::new(),
        root: 0,
        or_index: HashMap::new(),
    };
    let mut and_index: HashMap<(Belief, ActionId), NodeId> = HashMap::new();
    let mut queue = VecDeque::new();

    let check = |g: &AndOrGraph<C::Value>| {
        if g.nodes.len() > budget {
            Err(BudgetExceeded { budget, count: g.nodes.len() })
        } else {
            Ok(())
        }
    };
    let intern_or = |g: &mut AndOrGraph<C::Value>, queue: &mut VecDeque<NodeId>, b: Belief| -> NodeId {
        if let Some(&u) = g.or_index.get(&b) {
            return u;
        }
        let u = g.nodes.len();
        let terminal = is_target(model, &b);
        g.or_index.insert(b.clone(), u);
        g.nodes.push(Node::Or { belief: b, terminal, edges: Vec::new() });
        queue.push_back(u);
        u
    };

    g.root = intern_or(&mut g, &mut queue, C::initial_belief(model));
    while let Some(u) = queue.pop_front() {
        if g.nodes[u].is_terminal() {
            continue;
        }
        let b = g.nodes[u].belief().clone();
        let mut or_edges = Vec::new();
        for a in applicable_actions(model, &b) {
            let cost = C::action_cost(model, &b, a);
            let (ba, parts) = successors(model, &b, a).expect("action is applicable");
            let key = (ba, a);
            let v = match and_index.get(&key) {
                Some(&v) => v,
                None => {
                    let v = g.nodes.len();
                    and_index.insert(key.clone(), v);
                    g.nodes.push(Node::And { belief: key.0, action: a, edges: Vec::new() });
                    let mut edges = Vec::with_capacity(parts.len());
                    for (obs, p, child) in parts {
                        let target = intern_or(&mut g, &mut queue, child);
                        let prob = (C::KIND == CriterionKind::MinExp).then_some(p);
                        edges.push(AndEdge { obs, prob, target });
                    }
                    if let Node::And { edges: e, .. } = &mut g.nodes[v] {
                        *e = edges;
                    }
                    check(&g)?;
                    v
                }
            };
            or_edges.push(OrEdge { action: a, cost, target: v });
        }
        if let Node::Or { edges, .. } = &mut g.nodes[u] {
            *edges = or_edges;
        }
    }
    Ok(g)
}

/// All beliefs reachable from `b0` in breadth-first order. With
/// `expand_targets` the closure also continues through target beliefs.
pub fn reachable_beliefs<C: Criterion>(model: &DetPomdp, budget: usize, expand_targets: bool) -> Result<Vec<Belief>, BudgetExceeded> {
    let b0 = C::initial_belief(model);
    let mut seen: HashSet<Belief> = HashSet::new();
    let mut order = vec![b0.clone()];
    seen.insert(b0);
    let mut k = 0;
    while k < order.len() {
        let b = order[k].clone();
        k += 1;
        if !expand_targets && is_target(model, &b) {
            continue;
        }
        for a in applicable_actions(model, &b) {
            let (_, parts) = successors(model, &b, a).expect("action is applicable");
            for (_, _, child) in parts {
                if seen.insert(child.clone()) {
                    order.push(child);
                    if order.len() > budget {
                        return Err(BudgetExceeded { budget, count: order.len() });
                    }
                }
            }
        }
    }
    Ok(order)
}

/// A subgraph given by its edges and the nodes they span.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Solution {
    pub nodes: BTreeSet<NodeId>,
    pub edges: BTreeSet<(NodeId, NodeId)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum SolutionError {
    #[error("root {0} is not in the solution")]
    MissingRoot(NodeId),
    #[error("edge ({0}, {1}) is not an edge of the graph or leaves the solution's node set")]
    ForeignEdge(NodeId, NodeId),
    #[error("node {0} is in the solution but not spanned by its edges")]
    Unspanned(NodeId),
    #[error("AND node {node} keeps {kept} of its {total} edges")]
    AndIncomplete { node: NodeId, kept: usize, total: usize },
    #[error("non-terminal OR node {node} keeps {kept} edges, expected exactly one")]
    OrChoice { node: NodeId, kept: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ClosureError {
    #[error("policy does not cover reachable belief {0}")]
    Uncovered(Belief),
    #[error("policy action {action} is not applicable at belief {belief}")]
    Inapplicable { belief: Belief, action: ActionId },
}

/// Checks that `h` is a subgraph spanned by its edges that contains the
/// root, keeps every edge of its AND nodes and one edge per OR node.
pub fn validate_solution<V>(g: &AndOrGraph<V>, h: &Solution) -> Result<(), SolutionError> {
    if !h.nodes.contains(&g.root) {
        return Err(SolutionError::MissingRoot(g.root));
    }
    for &(u, v) in &h.edges {
        let ok = u < g.nodes.len() && g.nodes[u].targets().contains(&v) && h.nodes.contains(&u) && h.nodes.contains(&v);
        if !ok {
            return Err(SolutionError::ForeignEdge(u, v));
        }
    }
    let spanned: BTreeSet<NodeId> = h.edges.iter().map(|&(_, v)| v).chain([g.root]).collect();
    if let Some(&u) = h.nodes.iter().find(|u| !spanned.contains(u)) {
        return Err(SolutionError::Unspanned(u));
    }
    for &u in &h.nodes {
        let kept = g.nodes[u].targets().iter().filter(|&&v| h.edges.contains(&(u, v))).count();
        match &g.nodes[u] {
            Node::Or { terminal: true, .. } => {}
            Node::Or { .. } => {
                if kept != 1 {
                    return Err(SolutionError::OrChoice { node: u, kept });
                }
            }
            Node::And { edges, .. } => {
                if kept != edges.len() {
                    return Err(SolutionError::AndIncomplete { node: u, kept, total: edges.len() });
                }
            }
        }
    }
    Ok(())
}

/// `V_H(root)`; infinite when `h` contains a cycle.
pub fn solution_cost<C: Criterion>(g: &AndOrGraph<C::Value>, h: &Solution) -> Result<ExtCost<C::Value>, SolutionError> {
    validate_solution(g, h)?;
    // Iterative post-order DFS with colours for cycle detection.
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        New,
        Open,
        Done,
    }
    let mut mark = vec![Mark::New; g.nodes.len()];
    let mut value: Vec<Option<ExtCost<C::Value>>> = vec![None; g.nodes.len()];
    let kept = |u: NodeId| -> Vec<NodeId> { g.nodes[u].targets().into_iter().filter(|&v| h.edges.contains(&(u, v))).collect() };
    let mut stack = vec![(g.root, false)];
    while let Some((u, post)) = stack.pop() {
        if post {
            let v = match &g.nodes[u] {
                Node::Or { terminal: true, .. } => ExtCost::zero(),
                Node::Or { edges, .. } => {
                    let e = edges.iter().find(|e| h.edges.contains(&(u, e.target))).expect("validated");
                    ExtCost::Finite(e.cost) + value[e.target].expect("child done")
                }
                Node::And { edges, .. } => C::aggregate(edges.iter().map(|e| (e.prob.unwrap_or(1.0), value[e.target].expect("child done")))),
            };
            value[u] = Some(v);
            mark[u] = Mark::Done;
            continue;
        }
        match mark[u] {
            Mark::Done => continue,
            Mark::Open => return Ok(ExtCost::Infinite),
            Mark::New => {}
        }
        mark[u] = Mark::Open;
        stack.push((u, true));
        for v in kept(u) {
            match mark[v] {
                Mark::Open => return Ok(ExtCost::Infinite),
                Mark::New => stack.push((v, false)),
                Mark::Done => {}
            }
        }
    }
    Ok(value[g.root].expect("root evaluated"))
}

/// The solution induced by following `policy` from the root.
pub fn policy_to_solution<V>(g: &AndOrGraph<V>, policy: &Policy) -> Result<Solution, ClosureError> {
    let mut h = Solution::default();
    h.nodes.insert(g.root);
    let mut stack = vec![g.root];
    while let Some(u) = stack.pop() {
        match &g.nodes[u] {
            Node::Or { terminal: true, .. } => {}
            Node::Or { belief, edges, .. } => {
                let a = policy.get(belief).ok_or_else(|| ClosureError::Uncovered(belief.clone()))?;
                let e = edges
                    .iter()
                    .find(|e| e.action == a)
                    .ok_or_else(|| ClosureError::Inapplicable { belief: belief.clone(), action: a })?;
                h.edges.insert((u, e.target));
                if h.nodes.insert(e.target) {
                    stack.push(e.target);
                }
            }
            Node::And { edges, .. } => {
                for e in edges {
                    h.edges.insert((u, e.target));
                    if h.nodes.insert(e.target) {
                        stack.push(e.target);
                    }
                }
            }
        }
    }
    Ok(h)
}

/// The policy choosing, at each non-terminal OR node of `h`, its kept action.
pub fn solution_to_policy<V>(g: &AndOrGraph<V>, h: &Solution) -> Result<Policy, SolutionError> {
    validate_solution(g, h)?;
    let mut policy = Policy::new();
    for &u in &h.nodes {
        if let Node::Or { belief, terminal: false, edges } = &g.nodes[u] {
            let e = edges.iter().find(|e| h.edges.contains(&(u, e.target))).expect("validated");
            policy.insert(belief.clone(), e.action);
        }
    }
    Ok(policy)
}
