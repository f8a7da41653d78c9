use itertools::Itertools;

use crate::cost::Rational;
use crate::model::{DetPomdp, Initial, StateId};
use crate::solvers::Symmetry;
use crate::stateset::StateSet;

use super::DomainError;

pub const LEFT_HEAVY: usize = 0;
pub const RIGHT_HEAVY: usize = 1;
pub const BALANCED: usize = 2;

/// State of coin `k` being counterfeit: `2k` heavy, `2k + 1` light.
pub fn coin_state(k: usize, heavy: bool) -> StateId {
    2 * k + usize::from(!heavy)
}

/// Pan assignments `(L, R)`: disjoint, equal size, `L` before `R` in
/// lexicographic order.
pub fn weighings(n: usize) -> Vec<(Vec<usize>, Vec<usize>)> {
    let mut out = Vec::new();
    for k in 1..=n / 2 {
        for left in (0..n).combinations(k) {
            let rest: Vec<usize> = (0..n).filter(|c| !left.contains(c)).collect();
            for right in rest.into_iter().combinations(k) {
                if left < right {
                    out.push((left.clone(), right));
                }
            }
        }
    }
    out
}

fn pans(coins: &[usize]) -> String {
    coins.iter().join(",")
}

/// `n` coins, one counterfeit of unknown weight. States `0..2n` follow
/// [`coin_state`], then the goal `2n` and the sink `2n + 1`, a dead end.
/// Weighings cost 1 and leave the state alone; `declare` actions cost 1 and
/// move to the goal from their own state and to the sink from any other.
pub fn gen_coins(n: usize) -> Result<DetPomdp, DomainError> {
    if n < 3 {
        return Err(DomainError::Param(format!("coins needs n >= 3, got {n}")));
    }
    let goal = 2 * n;
    let sink = 2 * n + 1;
    let states = 2 * n + 2;
    let one = Rational::from_integer(1);
    let mut m = DetPomdp::new(states, 3, StateSet::from_states(states, [goal]), Initial::Set(StateSet::from_states(states, 0..2 * n)));
    for (left, right) in weighings(n) {
        let a = m.add_action(format!("weigh {}|{}", pans(&left), pans(&right)));
        for c in 0..n {
            for heavy in [true, false] {
                let s = coin_state(c, heavy);
                m.set_transition(a, s, s, one);
                let tips_left = if left.contains(&c) {
                    Some(heavy)
                } else if right.contains(&c) {
                    Some(!heavy)
                } else {
                    None
                };
                let o = match tips_left {
                    Some(true) => LEFT_HEAVY,
                    Some(false) => RIGHT_HEAVY,
                    None => BALANCED,
                };
                m.set_obs(s, a, o);
            }
        }
        m.set_obs(goal, a, BALANCED);
        m.set_obs(sink, a, BALANCED);
    }
    for c in 0..n {
        for heavy in [true, false] {
            let tag = if heavy { "heavy" } else { "light" };
            let a = m.add_action(format!("declare {c} {tag}"));
            let own = coin_state(c, heavy);
            for s in 0..2 * n {
                m.set_transition(a, s, if s == own { goal } else { sink }, one);
            }
        }
    }
    m.make_goals_absorbing();
    Ok(m)
}

/// Coins are interchangeable: block `k` is coin `k`'s two states.
pub fn coins_symmetry(n: usize) -> Symmetry {
    Symmetry { blocks: (0..n).map(|k| vec![coin_state(k, true), coin_state(k, false)]).collect() }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weighing_counts() {
        // 3 coins: three 1-vs-1 weighings.
        assert_eq!(weighings(3).len(), 3);
        // 4 coins: 6 singles, 3 pairs.
        assert_eq!(weighings(4).len(), 9);
    }

    #[test]
    fn model_is_valid() {
        let m = gen_coins(4).unwrap();
        assert!(m.validate().is_empty());
        assert_eq!(m.num_states, 10);
        assert!(coins_symmetry(4).verify(&m).is_ok());
        assert!(gen_coins(2).is_err());
    }
}
