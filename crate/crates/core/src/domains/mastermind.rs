use itertools::Itertools;

use crate::cost::Rational;
use crate::model::{DetPomdp, Initial};
use crate::stateset::StateSet;

use super::DomainError;

/// Largest number of secret codes generated.
pub const MAX_CODES: usize = 1296;

/// Code `k` as its `m` pegs, most significant first.
pub fn decode(k: usize, m: usize, n: usize) -> Vec<usize> {
    let mut pegs = vec![0; m];
    let mut x = k;
    for p in pegs.iter_mut().rev() {
        *p = x % n;
        x /= n;
    }
    pegs
}

/// `(exact, near)`: pegs right in place, and further colour matches
/// counted without reusing a peg.
pub fn score(guess: &[usize], secret: &[usize], n: usize) -> (usize, usize) {
    let exact = guess.iter().zip(secret).filter(|(g, s)| g == s).count();
    let mut cg = vec![0; n];
    let mut cs = vec![0; n];
    for (&g, &s) in guess.iter().zip(secret) {
        cg[g] += 1;
        cs[s] += 1;
    }
    let common: usize = cg.iter().zip(&cs).map(|(a, b)| a.min(b)).sum();
    (exact, common - exact)
}

/// Codes of `m` pegs over `n` colours; state `n^m` is the solved goal.
/// Observation `exact * (m + 1) + near`.
pub fn gen_mastermind(m: usize, n: usize) -> Result<DetPomdp, DomainError> {
    if m == 0 || n == 0 {
        return Err(DomainError::Param("mastermind needs m >= 1 and n >= 1".into()));
    }
    let codes = u32::try_from(m)
        .ok()
        .and_then(|e| n.checked_pow(e))
        .filter(|&c| c <= MAX_CODES)
        .ok_or_else(|| DomainError::TooLarge(format!("{n}^{m} codes exceed {MAX_CODES}")))?;
    let solved = codes;
    let states = codes + 1;
    let one = Rational::from_integer(1);
    let mut model = DetPomdp::new(states, (m + 1) * (m + 1), StateSet::from_states(states, [solved]), Initial::Set(StateSet::from_states(states, 0..codes)));
    let all: Vec<Vec<usize>> = (0..codes).map(|k| decode(k, m, n)).collect();
    for (g, guess) in all.iter().enumerate() {
        let a = model.add_action(format!("guess {}", guess.iter().join(",")));
        for (s, secret) in all.iter().enumerate() {
            let (exact, near) = score(guess, secret, n);
            let to = if g == s { solved } else { s };
            model.set_transition(a, s, to, one);
            model.set_obs(to, a, exact * (m + 1) + near);
        }
    }
    model.make_goals_absorbing();
    Ok(model)
}
