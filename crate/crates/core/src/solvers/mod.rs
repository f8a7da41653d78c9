//! Optimal policies and policy evaluation.

mod aostar;
mod evaluate;
mod explicit;
mod label;
mod simulate;
mod symmetry;
mod unobservable;

use std::fmt;
use std::time::Duration;

use crate::belief::Belief;
use crate::cost::ExtCost;
use crate::model::ActionId;
use crate::policy::Policy;

pub use aostar::{fullobs_distances, solve_heuristic, Heuristic};
pub use evaluate::evaluate_policy;
pub use explicit::{solve_explicit, solve_explicit_symmetric};
pub use simulate::{monte_carlo, simulate, MonteCarlo, SimulateError, Step, Trace};
pub use symmetry::{Symmetry, SymmetryError, VerifiedSymmetry};
pub use unobservable::{solve_unobservable, WrongVariant};

/// Default node budget for solvers and enumeration.
pub const DEFAULT_BUDGET: usize = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveStatus {
    Solved,
    NoFinitePolicy,
    BudgetExceeded,
}

impl fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolveStatus::Solved => "solved",
            SolveStatus::NoFinitePolicy => "no finite-cost policy",
            SolveStatus::BudgetExceeded => "budget exceeded",
        })
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SolveStats {
    /// Beliefs whose successors were generated.
    pub expanded: usize,
    /// Distinct beliefs generated.
    pub beliefs: usize,
    pub wall: Duration,
}

/// A linear plan and the beliefs it passes through (one more than actions).
#[derive(Clone, Debug, PartialEq)]
pub struct Plan {
    pub actions: Vec<ActionId>,
    pub beliefs: Vec<Belief>,
}

#[derive(Clone, Debug)]
pub struct SolveResult<V> {
    pub status: SolveStatus,
    pub policy: Option<Policy>,
    pub value: ExtCost<V>,
    pub stats: SolveStats,
    /// Set by the unobservable solver.
    pub plan: Option<Plan>,
}

impl<V> SolveResult<V> {
    fn unsolved(status: SolveStatus, stats: SolveStats) -> Self {
        SolveResult {
            status,
            policy: None,
            value: ExtCost::Infinite,
            stats,
            plan: None,
        }
    }

    fn solved(policy: Policy, value: V, stats: SolveStats) -> Self {
        SolveResult {
            status: SolveStatus::Solved,
            policy: Some(policy),
            value: ExtCost::Finite(value),
            stats,
            plan: None,
        }
    }
}
