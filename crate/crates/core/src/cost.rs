//! Cost arithmetic: exact rationals, and costs extended with `+inf`.

use std::cmp::Ordering;
use std::fmt;
use std::ops::Add;

use num_rational::Ratio;
use num_traits::{ToPrimitive, Zero};

pub type Rational = Ratio<i64>;

/// A cost that may be infinite. Infinity absorbs addition and dominates
/// every finite value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ExtCost<V> {
    Finite(V),
    Infinite,
}

impl<V> ExtCost<V> {
    pub fn is_finite(&self) -> bool {
        matches!(self, ExtCost::Finite(_))
    }

    pub fn finite(self) -> Option<V> {
        match self {
            ExtCost::Finite(v) => Some(v),
            ExtCost::Infinite => None,
        }
    }

    pub fn map<W>(self, f: impl FnOnce(V) -> W) -> ExtCost<W> {
        match self {
            ExtCost::Finite(v) => ExtCost::Finite(f(v)),
            ExtCost::Infinite => ExtCost::Infinite,
        }
    }
}

impl<V: PartialOrd> PartialOrd for ExtCost<V> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (ExtCost::Finite(a), ExtCost::Finite(b)) => a.partial_cmp(b),
            (ExtCost::Finite(_), ExtCost::Infinite) => Some(Ordering::Less),
            (ExtCost::Infinite, ExtCost::Finite(_)) => Some(Ordering::Greater),
            (ExtCost::Infinite, ExtCost::Infinite) => Some(Ordering::Equal),
        }
    }
}

impl<V: Add<Output = V>> Add for ExtCost<V> {
    type Output = ExtCost<V>;

    fn add(self, rhs: Self) -> Self {
        match (self, rhs) {
            (ExtCost::Finite(a), ExtCost::Finite(b)) => ExtCost::Finite(a + b),
            _ => ExtCost::Infinite,
        }
    }
}

impl<V: Zero + Add<Output = V>> ExtCost<V> {
    pub fn zero() -> Self {
        ExtCost::Finite(V::zero())
    }
}

/// Parses a rational from `"p/q"`, an integer, or a decimal literal with an
/// optional exponent (`"0.25"`, `"1.5e-3"`). Decimals are converted exactly.
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let p: i64 = p.trim().parse().ok()?;
        let q: i64 = q.trim().parse().ok()?;
        if q == 0 {
            return None;
        }
        return Some(Rational::new(p, q));
    }
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(k) => (&s[..k], s[k + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (neg, mantissa) = match mantissa.strip_prefix('-') {
        Some(m) => (true, m),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return None;
    }
    let mut digits: i64 = 0;
    for b in int_part.bytes().chain(frac_part.bytes()) {
        digits = digits.checked_mul(10)?.checked_add((b - b'0') as i64)?;
    }
    let scale = exp - frac_part.len() as i32;
    let pow10 = |k: u32| 10i64.checked_pow(k);
    let mut r = if scale >= 0 {
        Rational::from_integer(digits.checked_mul(pow10(scale as u32)?)?)
    } else {
        Rational::new(digits, pow10((-scale) as u32)?)
    };
    if neg {
        r = -r;
    }
    Some(r)
}

/// `"p"` for integers, `"p/q"` otherwise.
pub fn format_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Nine significant digits, trailing zeros trimmed, like C's `%.9g`.
pub fn format_sig9(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if !v.is_finite() {
        return if v > 0.0 { "inf".into() } else { v.to_string() };
    }
    let exp = v.abs().log10().floor() as i32;
    if !(-5..9).contains(&exp) {
        let s = format!("{:.8e}", v);
        let (m, e) = s.split_once('e').unwrap();
        let m = trim_zeros(m);
        return format!("{m}e{e}");
    }
    let decimals = (8 - exp).max(0) as usize;
    trim_zeros(&format!("{:.*}", decimals, v)).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

impl fmt::Display for ExtCost<Rational> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtCost::Finite(r) => f.write_str(&format_rational(r)),
            ExtCost::Infinite => f.write_str("inf"),
        }
    }
}

impl fmt::Display for ExtCost<f64> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtCost::Finite(v) => f.write_str(&format_sig9(*v)),
            ExtCost::Infinite => f.write_str("inf"),
        }
    }
}
