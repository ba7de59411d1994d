//! Solvers for the best-choice (secretary) problem with expert queries under
//! the Mallows permutation model.
//!
//! A hiring committee interviews `n` candidates whose arrival order is a
//! Mallows sample with parameter `θ > 0`. It may select up to `s` candidates;
//! the first `s - 1` selections each spend an infallible yes/no query ("is
//! this the best?"), the last is blind. The crate computes, for this process
//! and its query-free Dowry twin:
//!
//! - exact win probabilities, prefix probabilities, and optimal strike sets
//!   over `S_n` in rational arithmetic (small `n`),
//! - the `O(n·s)` dynamic program for optimal thresholds and win
//!   probabilities at any finite `n`,
//! - closed forms for the win/selection-count/stopping-position statistics of
//!   arbitrary threshold strategies,
//! - `n → ∞` win probabilities and optimal thresholds in all three θ regimes,
//! - a Monte Carlo simulator for independent validation.
//!
//! The mdbook under `book/` walks through the model and the math; its code
//! snippets are compiled and run as doc-tests via the [`guide`] module.

pub mod asym;
pub mod dp;
mod error;
pub mod eval;
pub mod expect;
pub mod guide;
pub mod oracle;
pub mod perm;
pub mod reference;
pub mod sample;
pub mod sim;
pub mod strategy;
mod sums;
pub mod tables;
pub mod theta;

pub use error::{Error, Result};
pub use perm::Permutation;
pub use strategy::{Model, Thresholds};
pub use theta::Theta;

/// Exact rational scalar used by the enumeration oracle.
pub type Rational = num_rational::BigRational;

/// Parses a rational from `"p/q"`, an integer, or a finite decimal, exactly.
pub fn rational_from_str(s: &str) -> Result<Rational> {
    use num_bigint::BigInt;
    use std::str::FromStr;
    let s = s.trim();
    let parse_int = |t: &str| -> Result<BigInt> {
        BigInt::from_str(t).map_err(|_| Error::Domain(format!("not a rational: {s:?}")))
    };
    if let Some((num, den)) = s.split_once('/') {
        let d = parse_int(den.trim())?;
        if d == BigInt::from(0) {
            return Err(Error::Domain("zero denominator".into()));
        }
        return Ok(Rational::new(parse_int(num.trim())?, d));
    }
    if let Some((int_part, frac_part)) = s.split_once('.') {
        let digits = frac_part.len() as u32;
        let joined = format!("{int_part}{frac_part}");
        let scale = BigInt::from(10u32).pow(digits);
        return Ok(Rational::new(parse_int(&joined)?, scale));
    }
    Ok(Rational::from(parse_int(s)?))
}
