use crate::cost::Rational;
use crate::model::{DetPomdp, Initial};
use crate::stateset::StateSet;

use super::DomainError;

pub const NEGATIVE: usize = 0;
pub const POSITIVE: usize = 1;

/// `matrix[i][j]` is whether test `j` is positive in system state `i`.
/// States `0..m`, then the goal `m` and the sink `m + 1`. Tests cost 1 and
/// change nothing; `declare i` costs 1 and reaches the goal only from `i`.
pub fn gen_diagnosis(matrix: &[Vec<bool>]) -> Result<DetPomdp, DomainError> {
    let m = matrix.len();
    if m == 0 {
        return Err(DomainError::Param("diagnosis needs at least one state".into()));
    }
    let tests = matrix[0].len();
    if let Some(i) = matrix.iter().position(|r| r.len() != tests) {
        return Err(DomainError::Param(format!("row {i} has {} entries, expected {tests}", matrix[i].len())));
    }
    let (goal, sink, states) = (m, m + 1, m + 2);
    let one = Rational::from_integer(1);
    let mut model = DetPomdp::new(states, 2, StateSet::from_states(states, [goal]), Initial::Set(StateSet::from_states(states, 0..m)));
    for j in 0..tests {
        let a = model.add_action(format!("test {j}"));
        for (i, row) in matrix.iter().enumerate() {
            model.set_transition(a, i, i, one);
            model.set_obs(i, a, if row[j] { POSITIVE } else { NEGATIVE });
        }
    }
    for own in 0..m {
        let a = model.add_action(format!("declare {own}"));
        for i in 0..m {
            model.set_transition(a, i, if i == own { goal } else { sink }, one);
        }
    }
    model.make_goals_absorbing();
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shape_checks() {
        assert!(gen_diagnosis(&[]).is_err());
        assert!(gen_diagnosis(&[vec![true], vec![]]).is_err());
        let m = gen_diagnosis(&[vec![true, false], vec![false, true]]).unwrap();
        assert!(m.validate().is_empty());
        assert_eq!(m.num_actions(), 4);
    }
}
