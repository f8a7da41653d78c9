use serde::{Deserialize, Serialize};

use crate::cost::Rational;
use crate::model::{DetPomdp, Initial, StateId};
use crate::stateset::StateSet;

use super::DomainError;

pub type Cell = (usize, usize);

/// Most unknown cells generated; states grow as `2^k`.
pub const MAX_UNKNOWN: usize = 12;

const MOVES: [(&str, isize, isize); 4] = [("north", -1, 0), ("east", 0, 1), ("south", 1, 0), ("west", 0, -1)];

/// A grid of `(row, col)` cells. Unknown cells are traversable or not
/// depending on the hidden assignment.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSpec {
    pub rows: usize,
    pub cols: usize,
    #[serde(default)]
    pub blocked: Vec<Cell>,
    #[serde(default)]
    pub unknown: Vec<Cell>,
    pub start: Cell,
    pub goal: Cell,
}

impl GridSpec {
    fn cell(&self, (r, c): Cell) -> usize {
        r * self.cols + c
    }

    fn in_grid(&self, (r, c): Cell) -> bool {
        r < self.rows && c < self.cols
    }

    fn step(&self, (r, c): Cell, dr: isize, dc: isize) -> Option<Cell> {
        let r = r.checked_add_signed(dr)?;
        let c = c.checked_add_signed(dc)?;
        self.in_grid((r, c)).then_some((r, c))
    }

    /// Whether `cell` is traversable under assignment bits `asg`.
    pub fn open(&self, cell: Cell, asg: usize) -> bool {
        if self.blocked.contains(&cell) {
            return false;
        }
        match self.unknown.iter().position(|&u| u == cell) {
            Some(k) => asg >> k & 1 == 1,
            None => true,
        }
    }

    /// State index of the robot at `cell` under assignment `asg`.
    pub fn state(&self, cell: Cell, asg: usize) -> StateId {
        asg * self.rows * self.cols + self.cell(cell)
    }
}

/// States `(cell, assignment)`. A move into a wall, a blocked cell or the
/// grid edge leaves the robot in place. After each move the robot observes
/// its cell and which of the four neighbours are traversable, encoded as
/// `cell * 16 + bits`.
pub fn gen_gridnav(spec: &GridSpec) -> Result<DetPomdp, DomainError> {
    let bad = |what: &str| Err(DomainError::Param(what.into()));
    if spec.rows == 0 || spec.cols == 0 {
        return bad("grid must be non-empty");
    }
    if spec.unknown.len() > MAX_UNKNOWN {
        return Err(DomainError::TooLarge(format!("{} unknown cells exceed {MAX_UNKNOWN}", spec.unknown.len())));
    }
    for &c in spec.blocked.iter().chain(&spec.unknown).chain([&spec.start, &spec.goal]) {
        if !spec.in_grid(c) {
            return Err(DomainError::Param(format!("cell {c:?} is outside the grid")));
        }
    }
    let mut seen = spec.unknown.clone();
    seen.sort_unstable();
    seen.dedup();
    if seen.len() != spec.unknown.len() || spec.unknown.iter().any(|u| spec.blocked.contains(u)) {
        return bad("unknown cells must be distinct and not blocked");
    }
    for (what, c) in [("start", spec.start), ("goal", spec.goal)] {
        if spec.blocked.contains(&c) || spec.unknown.contains(&c) {
            return Err(DomainError::Param(format!("{what} cell must be known traversable")));
        }
    }

    let cells = spec.rows * spec.cols;
    let asgs = 1usize << spec.unknown.len();
    let states = cells * asgs;
    let goal = StateSet::from_states(states, (0..asgs).map(|g| spec.state(spec.goal, g)));
    let init = StateSet::from_states(states, (0..asgs).map(|g| spec.state(spec.start, g)));
    let mut model = DetPomdp::new(states, cells * 16, goal, Initial::Set(init));
    let one = Rational::from_integer(1);
    for &(name, dr, dc) in &MOVES {
        let a = model.add_action(name);
        for g in 0..asgs {
            for r in 0..spec.rows {
                for c in 0..spec.cols {
                    let here = (r, c);
                    let to = match spec.step(here, dr, dc) {
                        Some(next) if spec.open(next, g) => next,
                        _ => here,
                    };
                    let bits = MOVES
                        .iter()
                        .enumerate()
                        .filter(|&(_, &(_, er, ec))| spec.step(to, er, ec).is_some_and(|nb| spec.open(nb, g)))
                        .fold(0, |acc, (k, _)| acc | 1 << k);
                    let (s, t) = (spec.state(here, g), spec.state(to, g));
                    model.set_transition(a, s, t, one);
                    model.set_obs(t, a, spec.cell(to) * 16 + bits);
                }
            }
        }
    }
    model.make_goals_absorbing();
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corridor_model() {
        let spec = GridSpec { rows: 1, cols: 3, blocked: vec![], unknown: vec![(0, 1)], start: (0, 0), goal: (0, 2) };
        let m = gen_gridnav(&spec).unwrap();
        assert_eq!(m.num_states, 6);
        assert!(m.validate().is_empty());
        let east = m.action_by_name("east").unwrap();
        // Blocked middle: the robot bumps and stays.
        assert_eq!(m.effect(spec.state((0, 0), 0), east), Some(spec.state((0, 0), 0)));
        assert_eq!(m.effect(spec.state((0, 0), 1), east), Some(spec.state((0, 1), 1)));
    }

    #[test]
    fn start_must_be_known() {
        let spec = GridSpec { rows: 1, cols: 2, blocked: vec![], unknown: vec![(0, 0)], start: (0, 0), goal: (0, 1) };
        assert!(gen_gridnav(&spec).is_err());
    }
}
