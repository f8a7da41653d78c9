//! Planning for deterministic POMDPs: belief dynamics, AND/OR compilation,
//! optimal policies under worst-case and expected cost, and structural
//! analysis of permutation actions.

pub mod andor;
pub mod belief;
pub mod cli;
pub mod cost;
pub mod criterion;
pub mod domains;
pub mod model;
pub mod perm;
pub mod policy;
pub mod solvers;
pub mod stateset;
