//! Optimization criteria. `MinMax` prices a belief by its worst state and
//! works on set beliefs with exact rational costs; `MinExp` prices by
//! expectation over distribution beliefs in `f64`.

use std::fmt;
use std::ops::Add;
use std::str::FromStr;

use num_traits::Zero;

use crate::belief::{Belief, DistBelief};
use crate::cost::{format_rational, format_sig9, rational_to_f64, ExtCost, Rational};
use crate::model::{ActionId, DetPomdp};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CriterionKind {
    MinMax,
    MinExp,
}

impl CriterionKind {
    pub fn name(self) -> &'static str {
        match self {
            CriterionKind::MinMax => "minmax",
            CriterionKind::MinExp => "minexp",
        }
    }
}

impl fmt::Display for CriterionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CriterionKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "minmax" => Ok(CriterionKind::MinMax),
            "minexp" => Ok(CriterionKind::MinExp),
            _ => Err(format!("unknown criterion {s:?} (expected minmax or minexp)")),
        }
    }
}

/// Numeric type of a criterion's values.
pub trait CostValue: Copy + PartialOrd + Add<Output = Self> + Zero + fmt::Debug + Send + Sync + 'static {
    fn to_f64(self) -> f64;
}

impl CostValue for Rational {
    fn to_f64(self) -> f64 {
        rational_to_f64(&self)
    }
}

impl CostValue for f64 {
    fn to_f64(self) -> f64 {
        self
    }
}

pub trait Criterion: Copy + Default + fmt::Debug + Send + Sync + 'static {
    type Value: CostValue;
    const KIND: CriterionKind;

    /// `b0` in the representation this criterion reasons over.
    fn initial_belief(model: &DetPomdp) -> Belief;

    /// `c(b, a)`: the worst state cost, or the expected cost.
    fn action_cost(model: &DetPomdp, b: &Belief, a: ActionId) -> Self::Value;

    /// Value of an AND node from `(probability, child value)` pairs.
    fn aggregate(children: impl IntoIterator<Item = (f64, ExtCost<Self::Value>)>) -> ExtCost<Self::Value>;

    /// Full-observability bound from per-state goal distances.
    fn heuristic(b: &Belief, dist: &[ExtCost<Rational>]) -> ExtCost<Self::Value>;

    fn from_rational(r: Rational) -> Self::Value;

    fn format(v: &ExtCost<Self::Value>) -> String;
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct MinMax;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct MinExp;

impl Criterion for MinMax {
    type Value = Rational;
    const KIND: CriterionKind = CriterionKind::MinMax;

    fn initial_belief(model: &DetPomdp) -> Belief {
        Belief::Set(model.initial_support())
    }

    fn action_cost(model: &DetPomdp, b: &Belief, a: ActionId) -> Rational {
        b.support()
            .iter()
            .map(|i| model.cost(i, a).expect("cost defined on applicable state"))
            .max()
            .unwrap_or_else(Rational::zero)
    }

    fn aggregate(children: impl IntoIterator<Item = (f64, ExtCost<Rational>)>) -> ExtCost<Rational> {
        let mut best = Rational::zero();
        for (_, v) in children {
            match v {
                ExtCost::Infinite => return ExtCost::Infinite,
                ExtCost::Finite(x) => best = best.max(x),
            }
        }
        ExtCost::Finite(best)
    }

    fn heuristic(b: &Belief, dist: &[ExtCost<Rational>]) -> ExtCost<Rational> {
        let mut best = ExtCost::zero();
        for i in b.support() {
            if dist[i] > best {
                best = dist[i];
            }
        }
        best
    }

    fn from_rational(r: Rational) -> Rational {
        r
    }

    fn format(v: &ExtCost<Rational>) -> String {
        match v {
            ExtCost::Finite(r) => format_rational(r),
            ExtCost::Infinite => "inf".into(),
        }
    }
}

impl Criterion for MinExp {
    type Value = f64;
    const KIND: CriterionKind = CriterionKind::MinExp;

    fn initial_belief(model: &DetPomdp) -> Belief {
        Belief::Dist(DistBelief::from_pairs(model.num_states, model.initial_distribution()))
    }

    fn action_cost(model: &DetPomdp, b: &Belief, a: ActionId) -> f64 {
        b.weighted()
            .map(|(i, p)| p * rational_to_f64(&model.cost(i, a).expect("cost defined on applicable state")))
            .sum()
    }

    fn aggregate(children: impl IntoIterator<Item = (f64, ExtCost<f64>)>) -> ExtCost<f64> {
        let mut total = 0.0;
        for (p, v) in children {
            match v {
                ExtCost::Infinite if p > 0.0 => return ExtCost::Infinite,
                ExtCost::Infinite => {}
                ExtCost::Finite(x) => total += p * x,
            }
        }
        ExtCost::Finite(total)
    }

    fn heuristic(b: &Belief, dist: &[ExtCost<Rational>]) -> ExtCost<f64> {
        let mut total = 0.0;
        for (i, p) in b.weighted() {
            match dist[i] {
                ExtCost::Infinite => return ExtCost::Infinite,
                ExtCost::Finite(d) => total += p * rational_to_f64(&d),
            }
        }
        ExtCost::Finite(total)
    }

    fn from_rational(r: Rational) -> f64 {
        rational_to_f64(&r)
    }

    fn format(v: &ExtCost<f64>) -> String {
        match v {
            ExtCost::Finite(x) => format_sig9(*x),
            ExtCost::Infinite => "inf".into(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::tests::m3;

    #[test]
    fn costs_on_m3() {
        let m = m3();
        let b = MinMax::initial_belief(&m);
        assert_eq!(MinMax::action_cost(&m, &b, 0), Rational::from_integer(1));
        let d = MinExp::initial_belief(&m);
        assert!((MinExp::action_cost(&m, &d, 0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn aggregation() {
        let one = ExtCost::Finite(Rational::from_integer(1));
        let two = ExtCost::Finite(Rational::from_integer(2));
        assert_eq!(MinMax::aggregate([(1.0, one), (1.0, two)]), two);
        assert_eq!(MinMax::aggregate([(1.0, one), (1.0, ExtCost::Infinite)]), ExtCost::Infinite);
        assert_eq!(MinExp::aggregate([(0.25, ExtCost::Finite(4.0)), (0.75, ExtCost::Finite(0.0))]), ExtCost::Finite(1.0));
        assert_eq!(MinExp::aggregate([(0.5, ExtCost::Finite(1.0)), (0.5, ExtCost::Infinite)]), ExtCost::Infinite);
    }
}
