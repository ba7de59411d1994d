//! Closed-form and recurrence evaluation of the weighted counts behind a
//! threshold strategy at finite `n`, all in `(P_n)!`-normalized ratio form.
//!
//! `t_leq_ratio` is the at-most-`r`-selections mass, `win_ratio` the
//! probability that the best candidate is captured, and the `*_exact_*`
//! variants split both by the exact selection count. Every quantity stays in
//! `[0, 1]`; nothing of `(P_n)!` magnitude is ever formed.

use crate::error::{Error, Result};
use crate::strategy::Thresholds;
use crate::sums::nested_descending_sum;
use crate::theta::{PolyCache, Theta};

/// `T_{≤ r-1}(m, k_1..k_r) / (P_m)!`: the normalized weight of interview
/// orders on which the strategy prefix `ks` makes at most `r - 1` selections
/// within the first `m` positions.
///
/// `ks` must be strictly increasing (canonicalize first); `m >= k_r` is
/// required, with `m = k_r` giving exactly 1.
pub fn t_leq_ratio(m: usize, ks: &[usize], theta: Theta) -> Result<f64> {
    check_strict(ks)?;
    if m < *ks.last().unwrap() {
        // no selection beyond position m is possible at all
        return Ok(1.0);
    }
    let cache = PolyCache::new(theta, m.max(1));
    Ok(t_leq_ratio_cached(m, ks, &cache))
}

/// The same ratio evaluated through the peeling recurrence on `m`
/// (`T_{≤ r-1}(m) = (P_{m-1})!·θ^{m-k_r}·P_{k_r} + (P_{m-1})!·Σ_i θ^{m-1-i}·T_{≤ r-2}(i)/(P_i)!`),
/// as an independent route for cross-checking the nested-sum closed form.
pub fn t_leq_ratio_recurrence(m: usize, ks: &[usize], theta: Theta) -> Result<f64> {
    check_strict(ks)?;
    let cache = PolyCache::new(theta, m.max(1));
    // level ρ holds T_{≤ ρ-1}(i, k_1..k_ρ)/(P_i)! for every i up to m
    let mut level = vec![0.0; m + 1];
    for (rho, &k_rho) in ks.iter().enumerate() {
        let mut next = vec![0.0; m + 1];
        for (i, slot) in next.iter_mut().enumerate() {
            *slot = if i <= k_rho {
                1.0
            } else if rho == 0 {
                cache.scaled_power(i, k_rho, 0)
            } else {
                let mut acc = cache.scaled_power(i, k_rho, 0);
                for (j, t_prev) in level.iter().enumerate().take(i).skip(k_rho) {
                    acc += cache.pow_over_p(i, i - 1 - j) * t_prev;
                }
                acc
            };
        }
        level = next;
    }
    Ok(level[m])
}

/// As [`t_leq_ratio`] but reusing a prepared [`PolyCache`] (callers that
/// sweep over `m`).
pub fn t_leq_ratio_cached(m: usize, ks: &[usize], cache: &PolyCache) -> f64 {
    let r = ks.len();
    debug_assert!(r >= 1);
    if m <= ks[r - 1] {
        return 1.0;
    }
    let f = cache.inv_p_slice();
    let mut total = 0.0;
    for t in 1..=r {
        let coeff = ks[r - t]; // k_{r+1-t}
        if coeff == 0 {
            continue;
        }
        // depth t-1 nested sums; layer j has lower bound k_{r-j+1}
        let lows: Vec<usize> = (1..t).map(|j| ks[r - j]).collect();
        let ns = if t == 1 {
            1.0
        } else {
            nested_descending_sum(f, &lows, m - 1)
        };
        total += cache.scaled_power(m, coeff, t - 1) * ns;
    }
    total
}

/// `W(n, k_1..k_s) / (P_n)!`: the probability that the best candidate is
/// captured by the strategy, via the nested-sum closed form.
///
/// Accepts any non-decreasing strategy; duplicates are canonicalized and
/// thresholds at or beyond `n` dropped (they can never trigger a selection).
pub fn win_ratio(n: usize, strategy: &Thresholds, theta: Theta) -> Result<f64> {
    if n == 0 {
        return Err(Error::Domain("n must be at least 1".into()));
    }
    let (eff, _) = strategy.effective(n);
    let cache = PolyCache::new(theta, n);
    Ok(win_ratio_inner(n, eff.ks(), &cache, true))
}

/// The same probability evaluated through the peeling recurrence
/// `W(m) = θ·P_{m-1}·W(m-1) + T_{≤ s-1}(m-1)`, as an independent route.
pub fn win_ratio_recurrence(n: usize, strategy: &Thresholds, theta: Theta) -> Result<f64> {
    if n == 0 {
        return Err(Error::Domain("n must be at least 1".into()));
    }
    let (eff, _) = strategy.effective(n);
    let cache = PolyCache::new(theta, n);
    Ok(win_recurrence_inner(n, eff.ks(), &cache))
}

fn win_recurrence_inner(n: usize, ks: &[usize], cache: &PolyCache) -> f64 {
    if ks.is_empty() {
        return 0.0;
    }
    if ks[0] == 0 {
        return cache.pow_over_p(n, n - 1) + win_recurrence_inner(n, &ks[1..], cache);
    }
    let k_last = *ks.last().unwrap();
    // W(k_s, k_1..k_s) = W(k_s, k_1..k_{s-1})
    let mut w = win_recurrence_inner(k_last, &ks[..ks.len() - 1], cache);
    for m in k_last + 1..=n {
        // ratio update: W(m)/(P_m)! = θ P_{m-1}/P_m · W(m-1)/(P_{m-1})! + T(m-1)/(P_{m-1})!/P_m
        let carry = cache.scaled_power(m, m - 1, 0);
        w = carry * w + t_leq_ratio_cached(m - 1, ks, cache) * cache.inv_p(m);
    }
    w
}

/// `with_delta_guards` keeps the explicit `δ(k_i, k_{i+1})` factors from the
/// closed form; with strictly increasing thresholds the empty-sum convention
/// makes them redundant, and both paths are cross-asserted in tests.
pub(crate) fn win_ratio_inner(
    n: usize,
    ks: &[usize],
    cache: &PolyCache,
    with_delta_guards: bool,
) -> f64 {
    if ks.is_empty() {
        return 0.0;
    }
    if ks[0] == 0 {
        // peel: W(n, 0, k_2..) = θ^{n-1} (P_{n-1})! + W(n, k_2..)
        return cache.pow_over_p(n, n - 1) + win_ratio_inner(n, &ks[1..], cache, with_delta_guards);
    }
    let s = ks.len();
    let f = cache.inv_p_slice();
    let upper = |r: usize| if r == s { n } else { ks[r] }; // k_{r+1}, with k_{s+1} = n
    let mut total = 0.0;
    for r in 1..=s {
        let k_r = ks[r - 1];
        let k_next = upper(r);
        // t = 1: θ^{n-k_r-1} P_{k_r} Σ_{i=k_r}^{k_{r+1}-1} 1/P_i
        let first: f64 = f[k_r..k_next].iter().sum();
        total += cache.scaled_power(n, k_r, 1) * first;
        for t in 2..=r {
            if with_delta_guards && k_next < k_r + 2 {
                continue; // δ(k_r, k_{r+1}) = 0
            }
            let coeff = ks[r - t]; // k_{r+1-t}
                                   // i₁ ∈ [k_r+1, k_{r+1}-1], i₂ ∈ [k_r, i₁-1], i_j ∈ [k_{r-j+2}, i_{j-1}-1]
            let mut lows = Vec::with_capacity(t);
            lows.push(k_r + 1);
            lows.push(k_r);
            for j in 3..=t {
                lows.push(ks[r - j + 1]);
            }
            let ns = nested_descending_sum(f, &lows, k_next - 1);
            total += cache.scaled_power(n, coeff, t) * ns;
        }
    }
    total
}

/// `T_r(n, k_1..k_s) / (P_n)!`: the normalized weight of interview orders on
/// which exactly `r` selections are made (`0 <= r <= s`).
///
/// Requires `n >= k_s + 1` so that the difference form
/// `T_{≤r} - T_{≤r-1}` is valid for every `r`.
pub fn t_exact_ratio(n: usize, strategy: &Thresholds, r: usize, theta: Theta) -> Result<f64> {
    let canon = strategy.canonical();
    let ks = canon.ks();
    let s = ks.len();
    if r > s {
        return Err(Error::Domain(format!("r = {r} exceeds s = {s}")));
    }
    if n < ks[s - 1] + 1 {
        return Err(Error::Domain(format!(
            "need n >= k_s + 1 = {} for the exact-count split, got n = {n}",
            ks[s - 1] + 1
        )));
    }
    let cache = PolyCache::new(theta, n);
    Ok(t_exact_ratio_cached(n, ks, r, &cache))
}

/// As [`t_exact_ratio`] with a prepared cache; `ks` strictly increasing.
pub fn t_exact_ratio_cached(n: usize, ks: &[usize], r: usize, cache: &PolyCache) -> f64 {
    let s = ks.len();
    // T_{≤r} uses only the first r+1 thresholds
    let hi = if r >= s {
        1.0
    } else {
        t_leq_ratio_cached(n, &ks[..r + 1], cache)
    };
    let lo = if r == 0 {
        0.0
    } else {
        t_leq_ratio_cached(n, &ks[..r], cache)
    };
    (hi - lo).max(0.0)
}

/// `W_r(n, k_1..k_s) / (P_n)!`: the probability that the best candidate is
/// captured as exactly the `r`-th selection (`1 <= r <= s`).
pub fn w_exact_ratio(n: usize, strategy: &Thresholds, r: usize, theta: Theta) -> Result<f64> {
    let canon = strategy.canonical();
    let ks = canon.ks();
    let s = ks.len();
    if r == 0 || r > s {
        return Err(Error::Domain(format!("r = {r} out of range 1..={s}")));
    }
    if n < ks[s - 1] + 1 {
        return Err(Error::Domain(format!(
            "need n >= k_s + 1 = {} for the exact-count split, got n = {n}",
            ks[s - 1] + 1
        )));
    }
    let cache = PolyCache::new(theta, n);
    let hi = win_ratio_inner(n, &ks[..r], &cache, true);
    let lo = if r == 1 {
        0.0
    } else {
        win_ratio_inner(n, &ks[..r - 1], &cache, true)
    };
    Ok((hi - lo).max(0.0))
}

fn check_strict(ks: &[usize]) -> Result<()> {
    if ks.is_empty() {
        return Err(Error::Domain("at least one threshold required".into()));
    }
    if ks.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Domain(format!(
            "thresholds must be strictly increasing here (canonicalize first): {ks:?}"
        )));
    }
    Ok(())
}
