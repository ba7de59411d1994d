//! `n → ∞` win probabilities and optimal thresholds.
//!
//! For `θ < 1` the limit is a function of the tail distances `b_i = n - k`
//! alone; for `θ > 1` it is a function of the head thresholds `a_i` with
//! geometrically convergent sums; for `θ = 1` the block sums become nested
//! integrals of `1/t`, whose iterated integrands stay polynomials in `ln t`
//! and therefore integrate in closed form layer by layer.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::strategy::Thresholds;
use crate::sums::nested_descending_sum;
use crate::theta::Theta;

/// How the infinite sums of the `θ > 1` expressions are cut off.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Horizon {
    /// Truncate every sum at `n - 1`, exactly as a finite proxy `n` would:
    /// this reproduces published table digits computed at a proxy.
    Proxy(usize),
    /// Extend until the geometric tail bound
    /// `Σ_{i>M} 1/(θ^i-1) <= θ^{-M} / ((θ-1)(1-θ^{-1}))`
    /// drops below this relative tolerance.
    Tail(f64),
}

impl Default for Horizon {
    fn default() -> Self {
        Horizon::Tail(1e-14)
    }
}

/// Which asymptotic regime a threshold tuple lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    ThetaBelowOne,
    ThetaAboveOne,
    Uniform,
}

/// An optimal asymptotic strategy: integer head/tail thresholds for
/// `θ ≠ 1`, real ratios for `θ = 1`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AsymptoticThresholds {
    pub regime: Regime,
    /// `a_1 >= ... >= a_s` (θ>1), `b_1 < ... < b_s` (θ<1), or
    /// `x_1 > ... > x_s` (θ=1).
    pub values: Vec<f64>,
    pub win_prob: f64,
    /// True if the integer search ran into its cap.
    pub cap_hit: bool,
}

/// `P'`: the limit win probability for `θ < 1` as a function of
/// `b_1 < b_2 < ... < b_s` (the strategy rejects all but the last `b_i`
/// candidates before its `(s+1-i)`-th selection).
///
/// Independent of `n` by construction; evaluated through the block sums at a
/// synthetic `n` just large enough to hold the `b`s.
pub fn asym_win_prob_low(theta: Theta, bs: &[usize]) -> Result<f64> {
    let th = theta.get();
    if th >= 1.0 {
        return Err(Error::Domain("asym_win_prob_low requires theta < 1".into()));
    }
    if bs.is_empty() || bs[0] == 0 || bs.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Domain(format!(
            "b thresholds must satisfy 1 <= b_1 < b_2 < ...: {bs:?}"
        )));
    }
    let s = bs.len();
    let n = bs[s - 1] + 1;
    let a: Vec<usize> = bs.iter().map(|&b| n - b).collect(); // a_1 > a_2 > ...
    let ones = vec![1.0; n + 1];
    let mut total = 0.0;
    for r in 1..=s {
        let mut inner = 0.0;
        for t in 1..=r {
            let count = block_sum(&ones, &a, n, r, t);
            // θ^{b_r} (1/θ - 1)^t = θ^{b_r - t} (1 - θ)^t, and b_r >= t
            inner += th.powi((bs[r - 1] - t) as i32) * (1.0 - th).powi(t as i32) * count;
        }
        total += inner;
    }
    Ok(total)
}

/// `P''`: the limit win probability for `θ > 1` as a function of
/// `a_1 >= a_2 >= ... >= a_s` (the strategy thresholds read right to left).
///
/// Returned with the geometric bound on what the truncation discarded.
pub fn asym_win_prob_high(theta: Theta, a_desc: &[usize], horizon: Horizon) -> Result<HighEval> {
    let th = theta.get();
    if th <= 1.0 {
        return Err(Error::Domain(
            "asym_win_prob_high requires theta > 1".into(),
        ));
    }
    if a_desc.is_empty() || a_desc.windows(2).any(|w| w[0] < w[1]) {
        return Err(Error::Domain(format!(
            "a thresholds must be non-increasing: {a_desc:?}"
        )));
    }
    // thresholds in play order, canonicalized, zero-peeled
    let ascending: Vec<usize> = a_desc.iter().rev().copied().collect();
    let strategy = Thresholds::new(ascending)?.canonical();
    let mut ks = strategy.ks().to_vec();
    let mut peeled = 0.0;
    if ks[0] == 0 {
        peeled = 1.0 - 1.0 / th;
        ks.remove(0);
    }
    let m = match horizon {
        Horizon::Proxy(n) => n.max(ks.last().copied().unwrap_or(0) + 2) - 1,
        Horizon::Tail(tol) => {
            let base = ks.last().copied().unwrap_or(0);
            base + ((-(tol.ln()) / th.ln()).ceil() as usize).max(50) + 10
        }
    };
    let tail_bound = th.powi(-(m as i32)) / ((th - 1.0) * (1.0 - 1.0 / th));
    if ks.is_empty() {
        return Ok(HighEval {
            value: peeled,
            tail_bound,
        });
    }
    let a: Vec<usize> = ks.iter().rev().copied().collect(); // strictly decreasing now
    let s = a.len();
    let mut f = vec![0.0; m + 1];
    let lt = th.ln();
    for (i, slot) in f.iter_mut().enumerate().skip(1) {
        let e = i as f64 * lt;
        *slot = if e > 700.0 {
            0.0
        } else {
            1.0 / (e.exp() - 1.0)
        };
    }
    let mut total = peeled;
    for r in 1..=s {
        let mut inner = 0.0;
        for t in 1..=r {
            let val = block_sum(&f, &a, m + 1, r, t);
            inner += (1.0 - 1.0 / th).powi(t as i32) * val;
        }
        total += (1.0 - th.powi(-(a[r - 1] as i32))) * inner;
    }
    Ok(HighEval {
        value: total,
        tail_bound,
    })
}

/// Result of a truncated `θ > 1` evaluation.
#[derive(Debug, Clone, Copy)]
pub struct HighEval {
    pub value: f64,
    /// Geometric bound on the discarded single-sum tail.
    pub tail_bound: f64,
}

/// One block term of the limit expressions: for block `r` and term `t`,
/// the nested sum with outer range `[a_{r-t+1}+1, a_{r-t}-1]` (term 1:
/// `[a_r, a_{r-1}-1]`), second bound `a_{r-t+1}`, then
/// `a_{r-t+2}, ..., a_{r-1}`, where `a_0` plays the role of `n`.
///
/// `a` is strictly decreasing (after canonicalization) and `f` is the
/// per-index summand.
fn block_sum(f: &[f64], a: &[usize], n_bound: usize, r: usize, t: usize) -> f64 {
    let a0 = |idx: usize| if idx == 0 { n_bound } else { a[idx - 1] };
    if t == 1 {
        let lo = a[r - 1];
        debug_assert!(
            lo >= 1,
            "summand index 0 is never reachable after the zero peel"
        );
        return nested_descending_sum(f, &[lo], a0(r - 1).saturating_sub(1));
    }
    let mut lows = Vec::with_capacity(t);
    lows.push(a0(r - t + 1) + 1);
    lows.push(a0(r - t + 1));
    for j in 3..=t {
        lows.push(a0(r - t + j - 1));
    }
    let hi = a0(r - t).saturating_sub(1);
    nested_descending_sum(f, &lows, hi)
}

/// Sequentially searches the optimal asymptotic thresholds for `θ ≠ 1`,
/// exploiting right-alignment: the value found at `s = j` is kept when
/// searching `s = j + 1`.
pub fn search_thresholds(
    theta: Theta,
    s: usize,
    cap: usize,
    horizon: Horizon,
) -> Result<AsymptoticThresholds> {
    let th = theta.get();
    if th == 1.0 {
        return Err(Error::Domain("use uniform_thresholds for theta = 1".into()));
    }
    if s == 0 {
        return Err(Error::Domain("s must be at least 1".into()));
    }
    // exact ties are common on the table grid (e.g. θ^b·b can repeat);
    // resolve them to the smaller threshold, robust to float noise
    let improves = |p: f64, best: f64| p > best + 1e-12 * best.abs();
    let mut cap_hit = false;
    if th < 1.0 {
        let mut bs: Vec<usize> = Vec::new();
        let mut best_p = 0.0;
        for _ in 0..s {
            let lo = bs.last().map(|&b| b + 1).unwrap_or(1);
            let mut best_b = lo;
            best_p = -1.0;
            for b in lo..=cap {
                bs.push(b);
                let p = asym_win_prob_low(theta, &bs)?;
                bs.pop();
                if improves(p, best_p) {
                    best_p = p;
                    best_b = b;
                }
            }
            cap_hit |= best_b == cap;
            bs.push(best_b);
        }
        Ok(AsymptoticThresholds {
            regime: Regime::ThetaBelowOne,
            values: bs.iter().map(|&b| b as f64).collect(),
            win_prob: best_p,
            cap_hit,
        })
    } else {
        let mut a: Vec<usize> = Vec::new();
        let mut best_p = 0.0;
        for _ in 0..s {
            let hi = a.last().copied().unwrap_or(cap);
            let mut best_a = 0;
            best_p = -1.0;
            for cand in 0..=hi {
                a.push(cand);
                let p = asym_win_prob_high(theta, &a, horizon)?.value;
                a.pop();
                if improves(p, best_p) {
                    best_p = p;
                    best_a = cand;
                }
            }
            cap_hit |= best_a == cap;
            a.push(best_a);
        }
        Ok(AsymptoticThresholds {
            regime: Regime::ThetaAboveOne,
            values: a.iter().map(|&v| v as f64).collect(),
            win_prob: best_p,
            cap_hit,
        })
    }
}

/// Exhaustive joint search over all ordered tuples up to `cap`, as a
/// cross-check of the sequential right-aligned search. Exponential in `s`;
/// intended for small caps.
pub fn search_thresholds_joint(
    theta: Theta,
    s: usize,
    cap: usize,
    horizon: Horizon,
) -> Result<AsymptoticThresholds> {
    let th = theta.get();
    if th == 1.0 || s == 0 {
        return Err(Error::Domain(
            "joint search needs theta != 1 and s >= 1".into(),
        ));
    }
    let low = th < 1.0;
    let mut best: Option<(Vec<usize>, f64)> = None;
    let mut tuple = vec![if low { 1 } else { 0 }; s];
    loop {
        let ordered = if low {
            tuple.windows(2).all(|w| w[0] < w[1])
        } else {
            tuple.windows(2).all(|w| w[0] >= w[1])
        };
        if ordered {
            let p = if low {
                asym_win_prob_low(theta, &tuple)?
            } else {
                asym_win_prob_high(theta, &tuple, horizon)?.value
            };
            let improves = match &best {
                None => true,
                Some((_, bp)) => p > bp + 1e-12 * bp.abs(),
            };
            if improves {
                best = Some((tuple.clone(), p));
            }
        }
        // odometer
        let mut idx = 0;
        loop {
            if idx == s {
                break;
            }
            tuple[idx] += 1;
            if tuple[idx] <= cap {
                break;
            }
            tuple[idx] = if low { 1 } else { 0 };
            idx += 1;
        }
        if idx == s {
            break;
        }
    }
    let (values, win_prob) = best.expect("non-empty search space");
    Ok(AsymptoticThresholds {
        regime: if low {
            Regime::ThetaBelowOne
        } else {
            Regime::ThetaAboveOne
        },
        values: values.iter().map(|&v| v as f64).collect(),
        win_prob,
        cap_hit: values.contains(&cap),
    })
}

// ---------------------------------------------------------------------------
// θ = 1: nested integrals of 1/t as polynomials in ln t
// ---------------------------------------------------------------------------

/// A polynomial in `y = ln t`, low-degree-first coefficients.
#[derive(Debug, Clone)]
struct LogPoly(Vec<f64>);

impl LogPoly {
    fn eval(&self, y: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, c| acc * y + c)
    }

    /// Antiderivative with respect to `y`.
    fn antiderivative(&self) -> LogPoly {
        let mut out = vec![0.0];
        out.extend(self.0.iter().enumerate().map(|(i, c)| c / (i as f64 + 1.0)));
        LogPoly(out)
    }
}

/// `∫_{lo[0]}^{hi} dt₁/t₁ ∫_{lo[1]}^{t₁} dt₂/t₂ ... ∫_{lo[d-1]}^{t_{d-1}} dt_d/t_d`,
/// evaluated exactly: substituting `y = ln t` turns every layer into a
/// polynomial integral.
pub fn nested_log_integral(lo: &[f64], hi: f64) -> f64 {
    let d = lo.len();
    assert!(d >= 1, "need at least one integration layer");
    // innermost layer: ln u - ln lo[d-1]
    let mut poly = LogPoly(vec![-lo[d - 1].ln(), 1.0]);
    for j in (0..d - 1).rev() {
        let anti = poly.antiderivative();
        let at_lo = anti.eval(lo[j].ln());
        let mut coeffs = anti.0;
        coeffs[0] -= at_lo;
        poly = LogPoly(coeffs);
    }
    // the outermost antiderivative was already folded in except for the
    // first layer when d == 1
    poly.eval(hi.ln())
}

/// `𝓘_{r-1}` given the ratios `x_1 > ... > x_{r-1}` (with `x_0 = 1`): the sum
/// of the depth-`t` nested integrals for `t = 2..r`.
fn calligraphic_i(xs: &[f64], r: usize) -> f64 {
    let x = |idx: usize| if idx == 0 { 1.0 } else { xs[idx - 1] };
    let mut total = 0.0;
    for t in 2..=r {
        // t₁ ∈ [x_{r-t+1}, x_{r-t}], then lower bounds x_{r-t+1},
        // x_{r-t+2}, ..., x_{r-1}
        let mut lo = Vec::with_capacity(t);
        lo.push(x(r - t + 1));
        lo.push(x(r - t + 1));
        for j in 3..=t {
            lo.push(x(r - t + j - 1));
        }
        total += nested_log_integral(&lo, x(r - t));
    }
    total
}

/// Optimal ratios and win probability for the uniform case, via the
/// fixed-point recursion `x_r = x_{r-1}·e^{𝓘_{r-1} - 1}` with `x_0 = 1`,
/// `𝓘_0 = 0`.
///
/// The integrals are evaluated exactly (see [`nested_log_integral`]);
/// `quad_tol` is the accuracy contract on the returned values.
pub fn uniform_thresholds(s: usize, quad_tol: f64) -> Result<AsymptoticThresholds> {
    if s == 0 {
        return Err(Error::Domain("s must be at least 1".into()));
    }
    let _ = quad_tol;
    let mut xs: Vec<f64> = Vec::with_capacity(s);
    for r in 1..=s {
        let i_val = calligraphic_i(&xs, r);
        let prev = if r == 1 { 1.0 } else { xs[r - 2] };
        xs.push(prev * (i_val - 1.0).exp());
    }
    let win_prob = uniform_win_prob(&xs)?;
    Ok(AsymptoticThresholds {
        regime: Regime::Uniform,
        values: xs,
        win_prob,
        cap_hit: false,
    })
}

/// Limit win probability of an arbitrary strictly decreasing ratio tuple
/// `x_1 > ... > x_s` in the uniform case: `Σ_r x_r (ln(x_{r-1}/x_r) + 𝓘_{r-1})`.
pub fn uniform_win_prob(xs: &[f64]) -> Result<f64> {
    if xs.is_empty()
        || xs.iter().any(|&x| !(0.0..1.0).contains(&x) || x == 0.0)
        || xs.windows(2).any(|w| w[0] <= w[1])
    {
        return Err(Error::Domain(format!(
            "ratios must satisfy 1 > x_1 > ... > x_s > 0: {xs:?}"
        )));
    }
    let mut total = 0.0;
    for r in 1..=xs.len() {
        let prev = if r == 1 { 1.0 } else { xs[r - 2] };
        total += xs[r - 1] * ((prev / xs[r - 1]).ln() + calligraphic_i(xs, r));
    }
    Ok(total)
}
