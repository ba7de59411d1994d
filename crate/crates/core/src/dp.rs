//! The backward dynamic program over (prefix length, queries remaining).
//!
//! Acceptance and rejection values of an eligible prefix depend only on its
//! length (and, for rejection, not even on the last value), so the full
//! prefix tree collapses to an `O(n·s)` table. Working in probability form
//! keeps every entry in `[0, 1]`: dividing the numerator recurrences through
//! by the standard denominator turns the inversion-sum factor into
//! `θ·P_{k-1}` and contributes a `P_k` divisor, because the denominator of a
//! length-`(k-1)` prefix is `P_k` times that of its eligible child.

use crate::error::{Error, Result};
use crate::strategy::Thresholds;
use crate::theta::{PolyCache, Theta};

/// Accept/reject win probabilities for eligible prefixes, indexed by
/// `[queries remaining][prefix length]`.
#[derive(Debug, Clone)]
pub struct QTable {
    n: usize,
    s: usize,
    theta: Theta,
    /// `accept[j][k]`: win probability when accepting an eligible length-`k`
    /// prefix with `j` queries remaining and playing optimally after.
    accept: Vec<Vec<f64>>,
    /// `reject[j][k]`: win probability when rejecting a length-`k` prefix
    /// with `j` queries remaining and playing optimally after.
    reject: Vec<Vec<f64>>,
}

impl QTable {
    /// Fills the table backward from `k = n`.
    pub fn compute(n: usize, theta: Theta, s: usize) -> Result<QTable> {
        if n == 0 || s == 0 {
            return Err(Error::Domain("need n >= 1 and s >= 1".into()));
        }
        let cache = PolyCache::new(theta, n);
        let mut accept: Vec<Vec<f64>> = vec![vec![0.0; n + 1]; s];
        let mut reject: Vec<Vec<f64>> = vec![vec![0.0; n + 1]; s];
        for j in 0..s {
            accept[j][n] = 1.0; // a length-n eligible prefix ends in the best
            reject[j][n] = 0.0;
        }
        for k in (2..=n).rev() {
            // θ·P_{k-1} / P_k and 1 / P_k, overflow-stable
            let carry = cache.scaled_power(k, k - 1, 0);
            let lead = cache.pow_over_p(k, 0);
            for j in 0..s {
                let qbar = accept[j][k].max(reject[j][k]);
                reject[j][k - 1] = qbar * lead + reject[j][k] * carry;
                accept[j][k - 1] = if j == 0 {
                    accept[0][k] * carry
                } else {
                    let qbar_prev = accept[j - 1][k].max(reject[j - 1][k]);
                    qbar_prev * lead + accept[j][k] * carry
                };
            }
        }
        Ok(QTable {
            n,
            s,
            theta,
            accept,
            reject,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn theta(&self) -> Theta {
        self.theta
    }

    /// Win probability accepting an eligible length-`k` prefix with `j`
    /// queries remaining.
    pub fn accept(&self, j: usize, k: usize) -> f64 {
        self.accept[j][k]
    }

    /// Win probability rejecting a length-`k` prefix with `j` queries
    /// remaining (independent of the last value).
    pub fn reject(&self, j: usize, k: usize) -> f64 {
        self.reject[j][k]
    }

    /// The crossover threshold for the selection made with `j` queries
    /// remaining: the largest `k` where rejecting strictly beats accepting.
    ///
    /// Also verifies the single-crossover structure: the sign of
    /// `accept - reject` changes at most once as `k` grows.
    pub fn crossover(&self, j: usize) -> usize {
        let mut threshold = 0;
        for k in 1..=self.n {
            if self.accept[j][k] < self.reject[j][k] {
                threshold = k;
            }
        }
        threshold
    }

    /// True when `accept - reject` changes sign at most once in `k` for
    /// every query count.
    pub fn single_crossover_holds(&self) -> bool {
        (0..self.s).all(|j| {
            let flips = (2..=self.n)
                .filter(|&k| {
                    let neg_prev = self.accept[j][k - 1] < self.reject[j][k - 1];
                    let neg = self.accept[j][k] < self.reject[j][k];
                    neg_prev != neg
                })
                .count();
            flips <= 1
        })
    }
}

/// The optimal `(k_1, ..., k_s)` rejection thresholds at finite `n`.
pub fn optimal_thresholds(n: usize, theta: Theta, s: usize) -> Result<Thresholds> {
    let table = QTable::compute(n, theta, s)?;
    let ks: Vec<usize> = (1..=s).map(|i| table.crossover(s - i)).collect();
    Thresholds::new(ks)
}

/// The optimal win probability at finite `n` with `s` selections:
/// `max(accept, reject)` at the root prefix of length 1.
pub fn optimal_win_prob(n: usize, theta: Theta, s: usize) -> Result<f64> {
    let table = QTable::compute(n, theta, s)?;
    Ok(table.accept(s - 1, 1).max(table.reject(s - 1, 1)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn th(v: f64) -> Theta {
        Theta::new(v).unwrap()
    }

    #[test]
    fn worked_example_four_candidates() {
        let t = QTable::compute(4, th(1.0), 2).unwrap();
        assert!((t.accept(0, 1) - 0.25).abs() < 1e-15);
        assert!((t.reject(0, 1) - 11.0 / 24.0).abs() < 1e-15);
        let p2 = optimal_win_prob(4, th(1.0), 2).unwrap();
        assert!((p2 - 17.0 / 24.0).abs() < 1e-14);
        let p1 = optimal_win_prob(4, th(1.0), 1).unwrap();
        assert!((p1 - 11.0 / 24.0).abs() < 1e-14);
        assert_eq!(optimal_thresholds(4, th(1.0), 2).unwrap().ks(), &[0, 1]);
        assert_eq!(optimal_thresholds(4, th(1.0), 1).unwrap().ks(), &[1]);
    }

    #[test]
    fn base_cases() {
        let t = QTable::compute(7, th(1.4), 3).unwrap();
        for j in 0..3 {
            assert_eq!(t.accept(j, 7), 1.0);
            assert_eq!(t.reject(j, 7), 0.0);
        }
    }

    #[test]
    fn classical_secretary_threshold() {
        // θ=1, s=1, large n: k_1/n -> 1/e
        let ks = optimal_thresholds(1000, th(1.0), 1).unwrap();
        let ratio = ks.ks()[0] as f64 / 1000.0;
        assert!((ratio - (-1.0f64).exp()).abs() < 2.0 / 1000.0, "{ratio}");
    }

    #[test]
    fn descending_regime_accepts_first() {
        // Table-style check: θ=2, s=1 at large n has threshold 0
        assert_eq!(optimal_thresholds(1000, th(2.0), 1).unwrap().ks(), &[0]);
        let p = optimal_win_prob(1000, th(2.0), 1).unwrap();
        assert!((p - 0.5).abs() < 1e-9);
    }

    #[test]
    fn thresholds_are_non_decreasing_and_right_aligned() {
        for t in [0.5, 0.9, 1.0, 1.1, 2.0] {
            let ks5 = optimal_thresholds(200, th(t), 5).unwrap();
            assert!(ks5.ks().windows(2).all(|w| w[0] <= w[1]));
            for s in 1..5 {
                let ks = optimal_thresholds(200, th(t), s).unwrap();
                // last s entries agree with the s = 5 tuple read from the right
                assert_eq!(&ks5.ks()[5 - s..], ks.ks(), "t={t} s={s}");
            }
        }
    }

    #[test]
    fn monotone_in_queries() {
        let t = QTable::compute(50, th(1.0), 4).unwrap();
        for k in 1..=50 {
            for j in 1..4 {
                assert!(t.accept(j, k) >= t.accept(j - 1, k) - 1e-15);
                assert!(t.reject(j, k) >= t.reject(j - 1, k) - 1e-15);
            }
        }
    }

    #[test]
    fn single_crossover_structure() {
        for t in [0.3, 0.9, 1.0, 1.05, 1.6, 3.0] {
            let table = QTable::compute(400, th(t), 5).unwrap();
            assert!(table.single_crossover_holds(), "t={t}");
        }
    }

    #[test]
    fn rejects_zero_sizes() {
        assert!(QTable::compute(0, th(1.0), 1).is_err());
        assert!(QTable::compute(5, th(1.0), 0).is_err());
    }
}
