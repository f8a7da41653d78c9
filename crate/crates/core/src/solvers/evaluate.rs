use std::collections::{HashMap, HashSet};

use crate::andor::ClosureError;
use crate::belief::{applicable_actions, is_target, successors, Belief};
use crate::cost::ExtCost;
use crate::criterion::Criterion;
use crate::model::DetPomdp;
use crate::policy::Policy;

enum Frame<V> {
    Enter(Belief),
    Exit(Belief, V, Vec<(f64, Belief)>),
}

/// `V_pi(b0)`. Infinite when the policy graph has a cycle or reaches a
/// dead end; an error when the policy is undefined at a reachable belief.
pub fn evaluate_policy<C: Criterion>(model: &DetPomdp, policy: &Policy) -> Result<ExtCost<C::Value>, ClosureError> {
    let mut done: HashMap<Belief, ExtCost<C::Value>> = HashMap::new();
    let mut open: HashSet<Belief> = HashSet::new();
    let b0 = C::initial_belief(model);
    let mut stack: Vec<Frame<C::Value>> = vec![Frame::Enter(b0.clone())];
    let mut cyclic = false;
    while let Some(frame) = stack.pop() {
        match frame {
            Frame::Enter(b) => {
                if done.contains_key(&b) {
                    continue;
                }
                if open.contains(&b) {
                    cyclic = true;
                    continue;
                }
                if is_target(model, &b) {
                    done.insert(b, ExtCost::zero());
                    continue;
                }
                if applicable_actions(model, &b).is_empty() {
                    done.insert(b, ExtCost::Infinite);
                    continue;
                }
                let a = policy.get(&b).ok_or_else(|| ClosureError::Uncovered(b.clone()))?;
                let (_, parts) = successors(model, &b, a).map_err(|_| ClosureError::Inapplicable { belief: b.clone(), action: a })?;
                let cost = C::action_cost(model, &b, a);
                let children: Vec<(f64, Belief)> = parts.into_iter().map(|(_, p, c)| (p, c)).collect();
                open.insert(b.clone());
                let pending: Vec<Belief> = children.iter().map(|(_, c)| c.clone()).collect();
                stack.push(Frame::Exit(b, cost, children));
                for c in pending {
                    if open.contains(&c) {
                        cyclic = true;
                    } else {
                        stack.push(Frame::Enter(c));
                    }
                }
            }
            Frame::Exit(b, cost, children) => {
                let agg = C::aggregate(children.iter().map(|(p, c)| (*p, done.get(c).copied().unwrap_or(ExtCost::Infinite))));
                open.remove(&b);
                done.insert(b, ExtCost::Finite(cost) + agg);
            }
        }
    }
    if cyclic {
        // Closure errors take precedence, so the whole graph was walked first.
        return Ok(ExtCost::Infinite);
    }
    Ok(done[&b0])
}
