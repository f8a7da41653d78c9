use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cost::Rational;
use crate::model::{DetPomdp, Initial, StateId};
use crate::stateset::StateSet;

use super::DomainError;

/// A CNF formula with at most three literals per clause. Literal `k > 0`
/// is variable `k`, `-k` its negation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Formula {
    pub num_vars: usize,
    pub clauses: Vec<Vec<i32>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum FormulaError {
    #[error("line {0}: expected a `p cnf <vars> <clauses>` header before any clause")]
    MissingHeader(usize),
    #[error("line {0}: malformed header")]
    BadHeader(usize),
    #[error("line {line}: bad literal {token:?}")]
    BadLiteral { line: usize, token: String },
    #[error("literal {lit} mentions a variable beyond {num_vars}")]
    VarOutOfRange { lit: i32, num_vars: usize },
    #[error("header declares {declared} clauses, found {found}")]
    ClauseCount { declared: usize, found: usize },
    #[error("last clause is not terminated by 0")]
    Unterminated,
    #[error("clause {0} is empty")]
    EmptyClause(usize),
    #[error("clause {0} has more than three literals")]
    TooLong(usize),
    #[error("clause {0} contains a literal and its negation")]
    Tautology(usize),
    #[error("formula has no clauses")]
    NoClauses,
    #[error("formula has no variables")]
    NoVariables,
}

impl Formula {
    /// Checks the clause shape and normalizes each clause to sorted,
    /// duplicate-free literals.
    pub fn new(num_vars: usize, clauses: Vec<Vec<i32>>) -> Result<Self, FormulaError> {
        if num_vars == 0 {
            return Err(FormulaError::NoVariables);
        }
        if clauses.is_empty() {
            return Err(FormulaError::NoClauses);
        }
        let mut out = Vec::with_capacity(clauses.len());
        for (j, mut c) in clauses.into_iter().enumerate() {
            for &lit in &c {
                if lit == 0 || lit.unsigned_abs() as usize > num_vars {
                    return Err(FormulaError::VarOutOfRange { lit, num_vars });
                }
            }
            c.sort_unstable_by_key(|l| (l.abs(), *l));
            c.dedup();
            if c.is_empty() {
                return Err(FormulaError::EmptyClause(j));
            }
            if c.windows(2).any(|w| w[0] == -w[1]) {
                return Err(FormulaError::Tautology(j));
            }
            if c.len() > 3 {
                return Err(FormulaError::TooLong(j));
            }
            out.push(c);
        }
        Ok(Formula { num_vars, clauses: out })
    }

    pub fn eval(&self, assignment: &[bool]) -> bool {
        self.clauses
            .iter()
            .all(|c| c.iter().any(|&l| assignment[l.unsigned_abs() as usize - 1] == (l > 0)))
    }

    /// Whether variable `i` (1-based) appears with polarity `v` in clause `j`
    /// (0-based).
    pub fn appears(&self, i: usize, v: bool, j: usize) -> bool {
        self.clauses[j].iter().any(|&l| l.unsigned_abs() as usize == i && (l > 0) == v)
    }
}

impl fmt::Display for Formula {
    /// DIMACS.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "p cnf {} {}", self.num_vars, self.clauses.len())?;
        for c in &self.clauses {
            for l in c {
                write!(f, "{l} ")?;
            }
            writeln!(f, "0")?;
        }
        Ok(())
    }
}

/// Parses DIMACS CNF. Lines starting with `c` are comments; a lone `%`
/// ends the input.
pub fn parse_formula(text: &str) -> Result<Formula, FormulaError> {
    let mut header: Option<(usize, usize)> = None;
    let mut clauses: Vec<Vec<i32>> = Vec::new();
    let mut current: Vec<i32> = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let line_no = k + 1;
        let line = line.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        if line == "%" {
            break;
        }
        if line.starts_with('p') {
            let parts: Vec<&str> = line.split_whitespace().collect();
            let parsed = match parts.as_slice() {
                ["p", "cnf", v, c] => v.parse().ok().zip(c.parse().ok()),
                _ => None,
            };
            if header.is_some() || parsed.is_none() {
                return Err(FormulaError::BadHeader(line_no));
            }
            header = parsed;
            continue;
        }
        if header.is_none() {
            return Err(FormulaError::MissingHeader(line_no));
        }
        for tok in line.split_whitespace() {
            let lit: i32 = tok.parse().map_err(|_| FormulaError::BadLiteral { line: line_no, token: tok.to_string() })?;
            if lit == 0 {
                clauses.push(std::mem::take(&mut current));
            } else {
                current.push(lit);
            }
        }
    }
    if !current.is_empty() {
        return Err(FormulaError::Unterminated);
    }
    let (num_vars, declared) = header.ok_or(FormulaError::MissingHeader(0))?;
    if declared != clauses.len() {
        return Err(FormulaError::ClauseCount { declared, found: clauses.len() });
    }
    Formula::new(num_vars, clauses)
}

/// `m` clauses of three distinct variables with random signs; variables
/// beyond `n` do not occur when `n < 3`.
pub fn random_3cnf(rng: &mut impl Rng, n: usize, m: usize) -> Formula {
    assert!(n >= 1 && m >= 1);
    let clauses = (0..m)
        .map(|_| {
            let k = n.min(3);
            let vars = rand::seq::index::sample(rng, n, k);
            vars.into_iter()
                .map(|v| {
                    let lit = v as i32 + 1;
                    if rng.gen_bool(0.5) {
                        lit
                    } else {
                        -lit
                    }
                })
                .collect()
        })
        .collect();
    Formula::new(n, clauses).expect("distinct variables")
}

/// State `[x_i, C_j]` for 1-based `i`, `j`.
pub fn sat_state(formula: &Formula, i: usize, j: usize) -> StateId {
    (i - 1) * formula.clauses.len() + (j - 1)
}

/// The reduction: clause tokens walk through the variables; `set(i,v)`
/// sends the token of every clause that `x_i = v` satisfies to `t`, the
/// others to the next variable, or to the failure state `f` after the last.
/// `f` is absorbing with cost 1 and never a goal, so the model has a
/// finite-cost plan iff the formula is satisfiable.
pub fn gen_sat(formula: &Formula) -> Result<DetPomdp, DomainError> {
    let (n, m) = (formula.num_vars, formula.clauses.len());
    let states = n
        .checked_mul(m)
        .and_then(|x| x.checked_add(2))
        .filter(|&s| s <= 1 << 20)
        .ok_or_else(|| DomainError::TooLarge(format!("{n} variables x {m} clauses")))?;
    let (t, f) = (n * m, n * m + 1);
    let one = Rational::from_integer(1);
    let init = StateSet::from_states(states, (1..=m).map(|j| sat_state(formula, 1, j)));
    let mut model = DetPomdp::new(states, 1, StateSet::from_states(states, [t]), Initial::Set(init));
    for i in 1..=n {
        for v in [false, true] {
            let a = model.add_action(format!("set({i},{})", u8::from(v)));
            for j in 1..=m {
                let to = if formula.appears(i, v, j - 1) {
                    t
                } else if i == n {
                    f
                } else {
                    sat_state(formula, i + 1, j)
                };
                model.set_transition(a, sat_state(formula, i, j), to, one);
            }
            model.set_transition(a, f, f, one);
        }
    }
    model.make_goals_absorbing();
    Ok(model)
}
