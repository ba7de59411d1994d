//! The Mallows parameter and its θ-polynomial building blocks.
//!
//! `P_i(θ) = 1 + θ + ... + θ^{i-1}` is the θ-analog of the integer `i`; its
//! running product `(P_n)!` is the Mallows partition function. Every large-N
//! formula in this crate is expressed through ratios of these quantities so
//! that nothing of `(P_n)!` magnitude is ever materialized.

use crate::error::{Error, Result};

/// Saturation bound for the raw `P_i` table; ratios of saturated entries are
/// only consumed where their true value is indistinguishable from the limit.
const P_SATURATION: f64 = 1e300;

/// The Mallows concentration parameter, a strictly positive real.
///
/// `θ < 1` concentrates interview orders near the ascending identity (quality
/// improves over time), `θ > 1` near the descending order, and `θ = 1` is the
/// uniform distribution.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Theta(f64);

impl Theta {
    pub fn new(value: f64) -> Result<Self> {
        if value.is_finite() && value > 0.0 {
            Ok(Theta(value))
        } else {
            Err(Error::Domain(format!(
                "theta must be positive, got {value}"
            )))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }

    pub fn is_uniform(self) -> bool {
        self.0 == 1.0
    }
}

impl TryFrom<f64> for Theta {
    type Error = Error;
    fn try_from(v: f64) -> Result<Self> {
        Theta::new(v)
    }
}

/// The geometric sum `P_i(θ)`, with `P_0 = 0` by convention.
pub fn p_value(i: usize, theta: Theta) -> f64 {
    let th = theta.get();
    if th == 1.0 {
        return i as f64;
    }
    // (1 - θ^i) / (1 - θ), saturated rather than overflowed for large θ^i
    let pow = powi_saturating(th, i as i32);
    ((1.0 - pow) / (1.0 - th)).min(P_SATURATION)
}

fn powi_saturating(th: f64, e: i32) -> f64 {
    let v = th.powi(e);
    if v.is_finite() {
        v
    } else {
        P_SATURATION
    }
}

/// Precomputed `P_i(θ)` and reciprocals for `0 <= i <= n`.
///
/// Immutable after construction; safe to share across threads.
#[derive(Debug, Clone)]
pub struct PolyCache {
    theta: Theta,
    p: Vec<f64>,
    inv_p: Vec<f64>,
}

impl PolyCache {
    pub fn new(theta: Theta, n: usize) -> Self {
        let th = theta.get();
        let mut p = vec![0.0; n + 1];
        let mut inv_p = vec![0.0; n + 1];
        for i in 1..=n {
            p[i] = (p[i - 1] * th + 1.0).min(P_SATURATION);
            inv_p[i] = 1.0 / p[i];
        }
        PolyCache { theta, p, inv_p }
    }

    pub fn theta(&self) -> Theta {
        self.theta
    }

    pub fn n(&self) -> usize {
        self.p.len() - 1
    }

    /// `P_i(θ)`.
    pub fn p(&self, i: usize) -> f64 {
        self.p[i]
    }

    /// `1 / P_i(θ)` for `i >= 1`.
    pub fn inv_p(&self, i: usize) -> f64 {
        self.inv_p[i]
    }

    pub fn inv_p_slice(&self) -> &[f64] {
        &self.inv_p
    }

    /// `θ^e / P_m` for `0 <= e <= m`, in a form that never overflows.
    pub fn pow_over_p(&self, m: usize, e: usize) -> f64 {
        let th = self.theta.get();
        debug_assert!(e <= m && m >= 1);
        if th == 1.0 {
            1.0 / m as f64
        } else if th > 1.0 {
            th.powi(e as i32 - m as i32) * (th - 1.0) / (1.0 - th.powi(-(m as i32)))
        } else {
            th.powi(e as i32) * (1.0 - th) / (1.0 - th.powi(m as i32))
        }
    }

    /// `θ^{m-k-j} · P_k / P_m` for `k <= m`, the prefactor of every term in
    /// the T and W closed forms, in a form that never overflows.
    pub fn scaled_power(&self, m: usize, k: usize, j: usize) -> f64 {
        if k == 0 {
            return 0.0; // P_0 = 0 kills the term
        }
        let th = self.theta.get();
        if th == 1.0 {
            k as f64 / m as f64
        } else if th > 1.0 {
            (1.0 - th.powi(-(k as i32))) / (1.0 - th.powi(-(m as i32))) * th.powi(-(j as i32))
        } else {
            debug_assert!(m - k >= j);
            th.powi((m - k - j) as i32) * self.p[k] / self.p[m]
        }
    }
}

/// The Gaussian binomial `B(n, m)`: the θ-weighted count of ordered
/// 2-partitions of `{1, ..., n+m}` by crossing inversions, equal to
/// `(P_{n+m})! / ((P_n)! (P_m)!)`.
///
/// Evaluated as a product of `P`-ratios, which is continuous at `θ = 1`
/// where it reduces to the binomial coefficient `C(n+m, n)`.
pub fn q_binomial(n: usize, m: usize, theta: Theta) -> f64 {
    if n == 0 || m == 0 {
        return 1.0;
    }
    // prod_{i=1}^{min} P_{max+i} / P_i with min = min(n, m)
    let (lo, hi) = if n <= m { (n, m) } else { (m, n) };
    let mut acc = 1.0;
    for i in 1..=lo {
        acc *= p_value(hi + i, theta) / p_value(i, theta);
    }
    acc
}
