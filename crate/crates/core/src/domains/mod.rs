//! Generators for the example domains and the SAT reduction.

mod coins;
mod diagnosis;
mod gridnav;
mod mastermind;
mod random;
mod sat;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::DetPomdp;
use crate::perm::{build_large_order_instance, LargeOrderError};

pub use coins::{coin_state, coins_symmetry, gen_coins, weighings, BALANCED, LEFT_HEAVY, RIGHT_HEAVY};
pub use diagnosis::{gen_diagnosis, NEGATIVE, POSITIVE};
pub use gridnav::{gen_gridnav, Cell, GridSpec, MAX_UNKNOWN};
pub use mastermind::{decode, gen_mastermind, score, MAX_CODES};
pub use random::{random_model, RandomSpec};
pub use sat::{gen_sat, parse_formula, random_3cnf, sat_state, Formula, FormulaError};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum DomainError {
    #[error("invalid parameters: {0}")]
    Param(String),
    #[error("instance too large: {0}")]
    TooLarge(String),
    #[error(transparent)]
    LargeOrder(#[from] LargeOrderError),
}

/// Parameters of one generated instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "domain", rename_all = "snake_case")]
pub enum DomainSpec {
    Mastermind { m: usize, n: usize },
    Coins { n: usize },
    Diagnosis { matrix: Vec<Vec<bool>> },
    GridNav(GridSpec),
    Sat3(Formula),
    LargeOrder { n: usize },
}

impl DomainSpec {
    pub fn build(&self) -> Result<DetPomdp, DomainError> {
        match self {
            DomainSpec::Mastermind { m, n } => gen_mastermind(*m, *n),
            DomainSpec::Coins { n } => gen_coins(*n),
            DomainSpec::Diagnosis { matrix } => gen_diagnosis(matrix),
            DomainSpec::GridNav(g) => gen_gridnav(g),
            DomainSpec::Sat3(f) => gen_sat(f),
            DomainSpec::LargeOrder { n } => Ok(build_large_order_instance(*n)?.model),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_json_is_tagged() {
        let s: DomainSpec = serde_json::from_str(r#"{"domain":"coins","n":3}"#).unwrap();
        assert_eq!(s, DomainSpec::Coins { n: 3 });
        assert_eq!(s.build().unwrap().num_states, 8);
    }
}
