//! Label setting over a flattened belief graph.
//!
//! Nodes are processed in layers of equal support size, smallest first.
//! A child never has a larger support than its parent, and an edge whose
//! child has the same support size has exactly one child. So inside a layer
//! the remaining structure is a plain shortest-path problem with positive
//! costs, solved by Dijkstra seeded with the edges that leave the layer.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap, HashSet};

use num_traits::Zero;

use crate::cost::ExtCost;
use crate::criterion::Criterion;
use crate::model::ActionId;

#[derive(Clone, Debug)]
pub(crate) struct FlatEdge<V> {
    pub action: ActionId,
    pub cost: V,
    /// `(probability, child)`; probability is 1 for set beliefs.
    pub children: Vec<(f64, usize)>,
}

#[derive(Clone, Debug)]
pub(crate) struct FlatNode<V> {
    pub support_len: usize,
    pub terminal: bool,
    pub edges: Vec<FlatEdge<V>>,
}

struct Entry<V> {
    value: V,
    node: usize,
}

impl<V: PartialOrd> PartialEq for Entry<V> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<V: PartialOrd> Eq for Entry<V> {}

impl<V: PartialOrd> PartialOrd for Entry<V> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

// Reversed: the heap pops the smallest value, then the smallest node.
impl<V: PartialOrd> Ord for Entry<V> {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .value
            .partial_cmp(&self.value)
            .unwrap_or(Ordering::Equal)
            .then_with(|| other.node.cmp(&self.node))
    }
}

fn improves<V: PartialOrd>(cand: &ExtCost<V>, action: ActionId, cur: &ExtCost<V>, cur_action: Option<ActionId>) -> bool {
    match cand.partial_cmp(cur) {
        Some(Ordering::Less) => true,
        Some(Ordering::Equal) => cand.is_finite() && cur_action.is_none_or(|b| action < b),
        _ => false,
    }
}

/// Recomputes `value` and `best` (an edge index) for the nodes in `z`,
/// reading every other node's current `value` as fixed.
pub(crate) fn label_set<C: Criterion>(
    nodes: &[FlatNode<C::Value>],
    z: &[usize],
    value: &mut [ExtCost<C::Value>],
    best: &mut [Option<usize>],
) {
    let mut order: Vec<usize> = z.to_vec();
    order.sort_by_key(|&u| (nodes[u].support_len, u));
    // Nodes of the current layer not yet final.
    let mut pending: HashSet<usize> = HashSet::with_capacity(order.len());

    let mut start = 0;
    while start < order.len() {
        let s = nodes[order[start]].support_len;
        let end = start + order[start..].iter().take_while(|&&u| nodes[u].support_len == s).count();
        let layer = &order[start..end];
        pending.clear();
        for &u in layer {
            pending.insert(u);
        }

        // Reverse in-layer edges: child -> (parent, edge index).
        let mut rev: HashMap<usize, Vec<(usize, usize)>> = HashMap::new();
        let mut heap = BinaryHeap::new();
        for &u in layer {
            value[u] = ExtCost::Infinite;
            best[u] = None;
            if nodes[u].terminal {
                value[u] = ExtCost::zero();
                heap.push(Entry { value: C::Value::zero(), node: u });
                continue;
            }
            for (k, e) in nodes[u].edges.iter().enumerate() {
                if let Some(&(_, c)) = e.children.iter().find(|(_, c)| pending.contains(c)) {
                    debug_assert_eq!(e.children.len(), 1, "equal-support edge with several children");
                    rev.entry(c).or_default().push((u, k));
                    continue;
                }
                let cand = ExtCost::Finite(e.cost) + C::aggregate(e.children.iter().map(|&(p, c)| (p, value[c])));
                if improves(&cand, e.action, &value[u], best[u].map(|b| nodes[u].edges[b].action)) {
                    value[u] = cand;
                    best[u] = Some(k);
                }
            }
            if let ExtCost::Finite(v) = value[u] {
                heap.push(Entry { value: v, node: u });
            }
        }

        let mut last: Option<C::Value> = None;
        while let Some(Entry { value: v, node: u }) = heap.pop() {
            if !pending.remove(&u) || value[u] != ExtCost::Finite(v) {
                continue;
            }
            if let Some(prev) = last {
                debug_assert!(prev <= v, "label setting finalized values out of order");
            }
            last = Some(v);
            let Some(preds) = rev.get(&u) else { continue };
            for &(p, k) in preds {
                if !pending.contains(&p) {
                    continue;
                }
                let e = &nodes[p].edges[k];
                let cand = ExtCost::Finite(e.cost) + C::aggregate(e.children.iter().map(|&(q, c)| (q, value[c])));
                if improves(&cand, e.action, &value[p], best[p].map(|b| nodes[p].edges[b].action)) {
                    value[p] = cand;
                    best[p] = Some(k);
                    if let ExtCost::Finite(x) = cand {
                        heap.push(Entry { value: x, node: p });
                    }
                }
            }
        }
        // Whatever is still pending never got a finite label.
        for &u in layer {
            if pending.contains(&u) {
                value[u] = ExtCost::Infinite;
                best[u] = None;
            }
        }
        start = end;
    }
}
