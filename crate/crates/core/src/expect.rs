//! Expected selection counts and stopping-position statistics for both
//! feedback models, at finite `n` and in the `n → ∞` limit.
//!
//! All finite-`n` masses are assembled from the `T`/`W` ratios in
//! `(P_n)!`-normalized form. The Genie interview can halt early on a
//! confirmed best; the Dowry interview halts only when the last selection is
//! spent, so the two stopping distributions differ even though selections and
//! wins coincide.

use crate::asym::{
    asym_win_prob_high, asym_win_prob_low, nested_log_integral, uniform_win_prob,
    AsymptoticThresholds, Horizon, Regime,
};
use crate::error::{Error, Result};
use crate::eval::{t_exact_ratio_cached, t_leq_ratio_cached, win_ratio};
use crate::strategy::{Model, Thresholds};
use crate::sums::nested_descending_sum;
use crate::theta::{PolyCache, Theta};

/// Per-position stopping masses of a strategy, in `(P_n)!`-normalized form.
///
/// Unconditional masses sum to 1. Conditional masses are *not* renormalized:
/// they sum to the strategy's win probability, kept in [`Self::win_prob`].
#[derive(Debug, Clone)]
pub struct StoppingDistribution {
    pub model: Model,
    pub conditional: bool,
    /// `masses[m]` is the stop mass at one-based position `m`; index 0 unused.
    pub masses: Vec<f64>,
    /// Win probability of the same strategy, for conditional normalization.
    pub win_prob: f64,
}

impl StoppingDistribution {
    pub fn n(&self) -> usize {
        self.masses.len() - 1
    }

    pub fn total_mass(&self) -> f64 {
        self.masses[1..].iter().sum()
    }

    /// Mean stop position (normalized by the win probability when
    /// conditional).
    pub fn mean_position(&self) -> Result<f64> {
        let raw: f64 = self
            .masses
            .iter()
            .enumerate()
            .map(|(m, &w)| m as f64 * w)
            .sum();
        if self.conditional {
            if self.win_prob <= 0.0 {
                return Err(Error::UndefinedConditional);
            }
            Ok(raw / self.win_prob)
        } else {
            Ok(raw)
        }
    }

    /// Mean stop position divided by `n`.
    pub fn expected_stop_ratio(&self) -> Result<f64> {
        Ok(self.mean_position()? / self.n() as f64)
    }

    /// Probability of examining the whole list (stop mass at `n`,
    /// renormalized when conditional).
    pub fn whole_list_probability(&self) -> Result<f64> {
        let raw = self.masses[self.n()];
        if self.conditional {
            if self.win_prob <= 0.0 {
                return Err(Error::UndefinedConditional);
            }
            Ok(raw / self.win_prob)
        } else {
            Ok(raw)
        }
    }
}

/// The exact stopping distribution of a threshold strategy at finite `n`,
/// assembled from the case analysis of the halt position.
///
/// Thresholds at or beyond `n` are dropped; when any are dropped the Genie
/// model's final query-less selection can never occur (every remaining
/// selection carries a query) and the Dowry model never halts early.
pub fn stopping_distribution(
    n: usize,
    strategy: &Thresholds,
    theta: Theta,
    model: Model,
    conditional: bool,
) -> Result<StoppingDistribution> {
    if n == 0 {
        return Err(Error::Domain("n must be at least 1".into()));
    }
    let s_orig = strategy.selections();
    let (eff, complete) = strategy.effective(n);
    let sp = eff.ks().len();
    let cache = PolyCache::new(theta, n);
    let w = if sp == 0 {
        0.0
    } else {
        win_ratio(n, &eff, theta)?
    };
    let mut masses = vec![0.0; n + 1];

    match model {
        Model::Genie => {
            if sp == 0 {
                if !conditional {
                    masses[n] = 1.0;
                }
                return Ok(StoppingDistribution {
                    model,
                    conditional,
                    masses,
                    win_prob: w,
                });
            }
            let ks = eff.ks();
            #[allow(clippy::needless_range_loop)] // m is the stop position
            for m in ks[0] + 1..=n {
                // interval index: m ∈ (k_i, k_{i+1}], with k_{sp+1} = n
                let i = ks.iter().take_while(|&&k| k < m).count();
                if conditional {
                    // win & stop at m: the best sits at m with few enough
                    // selections before it to still be selectable
                    let idx = if i < sp || !complete {
                        i - 1
                    } else {
                        s_orig - 1
                    };
                    masses[m] = cache.pow_over_p(n, n - m)
                        * t_leq_ratio_cached(m - 1, &ks[..(idx + 1).min(sp)], &cache);
                } else {
                    if m == n {
                        continue; // complement below
                    }
                    let mut val = 0.0;
                    // query-backed stop: best at m, selection with a query left
                    let qs_idx = if i < sp || !complete {
                        i as isize - 1
                    } else {
                        s_orig as isize - 2
                    };
                    if qs_idx >= 0 {
                        let prefix = &ks[..(qs_idx as usize + 1).min(sp)];
                        val +=
                            cache.pow_over_p(n, n - m) * t_leq_ratio_cached(m - 1, prefix, &cache);
                    }
                    // final query-less selection at m halts regardless
                    if complete && i == sp {
                        val += t_exact_ratio_cached(m - 1, ks, sp - 1, &cache)
                            * cache.pow_over_p(m, 0);
                    }
                    masses[m] = val;
                }
            }
            if !conditional {
                masses[n] = (1.0 - masses[1..n].iter().sum::<f64>()).max(0.0);
            }
        }
        Model::Dowry => {
            if sp < s_orig || sp == 0 {
                // the final selection can never be spent: always reach the end
                masses[n] = if conditional { w } else { 1.0 };
                return Ok(StoppingDistribution {
                    model,
                    conditional,
                    masses,
                    win_prob: w,
                });
            }
            let ks = eff.ks();
            #[allow(clippy::needless_range_loop)] // m is the stop position
            for m in ks[sp - 1] + 1..n {
                let t_last = t_exact_ratio_cached(m - 1, ks, sp - 1, &cache);
                masses[m] = if conditional {
                    cache.pow_over_p(n, n - m) * t_last
                } else {
                    t_last * cache.pow_over_p(m, 0)
                };
            }
            let partial: f64 = masses[1..n].iter().sum();
            masses[n] = if conditional {
                (w - partial).max(0.0)
            } else {
                (1.0 - partial).max(0.0)
            };
        }
    }
    Ok(StoppingDistribution {
        model,
        conditional,
        masses,
        win_prob: w,
    })
}

/// Expected number of selections at finite `n` (identical across models).
///
/// Unconditional: `Σ r · T_r / (P_n)!`. Conditional on winning:
/// `Σ r · W_r / W`.
pub fn expected_selections(
    n: usize,
    strategy: &Thresholds,
    theta: Theta,
    conditional: bool,
) -> Result<f64> {
    let canon = strategy.canonical();
    let ks = canon.ks();
    let s = ks.len();
    if n < ks[s - 1] + 1 {
        return Err(Error::Domain(format!(
            "need n >= k_s + 1 = {}, got {n}",
            ks[s - 1] + 1
        )));
    }
    let cache = PolyCache::new(theta, n);
    if conditional {
        let w = crate::eval::win_ratio(n, &canon, theta)?;
        if w <= 0.0 {
            return Err(Error::UndefinedConditional);
        }
        let mut acc = 0.0;
        for r in 1..=s {
            acc += r as f64 * crate::eval::w_exact_ratio(n, &canon, r, theta)?;
        }
        Ok(acc / w)
    } else {
        let mut acc = 0.0;
        for r in 1..=s {
            acc += r as f64 * t_exact_ratio_cached(n, ks, r, &cache);
        }
        Ok(acc)
    }
}

/// Expected number of selections in the `n → ∞` limit, from the limit forms
/// of the `T`/`W` ratios in the regime of the supplied thresholds.
pub fn expected_selections_limit(
    theta: Theta,
    thresholds: &AsymptoticThresholds,
    conditional: bool,
) -> Result<f64> {
    let th = theta.get();
    let s = thresholds.values.len();
    match thresholds.regime {
        Regime::ThetaBelowOne => {
            if th >= 1.0 {
                return Err(Error::Domain("regime/theta mismatch".into()));
            }
            let bs: Vec<usize> = thresholds.values.iter().map(|&v| v as usize).collect();
            if conditional {
                let win = |r: usize| asym_win_prob_low(theta, &bs[s - r..]);
                conditional_from_w(s, win)
            } else {
                let t_leq = |r: usize| -> Result<f64> {
                    // T_{<=r} uses thresholds k_1..k_{r+1}; β_j = b_{s+1-j}
                    let betas: Vec<usize> = (0..=r).map(|j| bs[s - 1 - j]).collect();
                    Ok(t_leq_limit_low(th, &betas))
                };
                unconditional_from_t(s, t_leq)
            }
        }
        Regime::ThetaAboveOne => {
            if th <= 1.0 {
                return Err(Error::Domain("regime/theta mismatch".into()));
            }
            let a_desc: Vec<usize> = thresholds.values.iter().map(|&v| v as usize).collect();
            if conditional {
                let win = |r: usize| {
                    Ok(asym_win_prob_high(theta, &a_desc[s - r..], Horizon::default())?.value)
                };
                conditional_from_w(s, win)
            } else {
                let ks_full: Vec<usize> = {
                    let asc: Vec<usize> = a_desc.iter().rev().copied().collect();
                    Thresholds::new(asc)?.canonical().ks().to_vec()
                };
                let t_leq = |r: usize| Ok(t_leq_limit_high(th, &ks_full[..r + 1]));
                unconditional_from_t(s, t_leq)
            }
        }
        Regime::Uniform => {
            if th != 1.0 {
                return Err(Error::Domain("regime/theta mismatch".into()));
            }
            let xs = &thresholds.values; // descending ratios
            if conditional {
                let win = |r: usize| uniform_win_prob(&xs[s - r..]);
                conditional_from_w(s, win)
            } else {
                let t_leq = |r: usize| -> Result<f64> {
                    let kx: Vec<f64> = xs[s - 1 - r..].iter().rev().copied().collect();
                    Ok(t_leq_limit_uniform(&kx))
                };
                unconditional_from_t(s, t_leq)
            }
        }
    }
}

fn unconditional_from_t(s: usize, t_leq: impl Fn(usize) -> Result<f64>) -> Result<f64> {
    let mut cum = Vec::with_capacity(s + 1);
    for r in 0..s {
        cum.push(t_leq(r)?);
    }
    cum.push(1.0);
    let mut acc = 0.0;
    for r in 1..=s {
        acc += r as f64 * (cum[r] - cum[r - 1]).max(0.0);
    }
    Ok(acc)
}

fn conditional_from_w(s: usize, win: impl Fn(usize) -> Result<f64>) -> Result<f64> {
    let mut cum = Vec::with_capacity(s + 1);
    cum.push(0.0);
    for r in 1..=s {
        cum.push(win(r)?);
    }
    let w = cum[s];
    if w <= 0.0 {
        return Err(Error::UndefinedConditional);
    }
    let mut acc = 0.0;
    for r in 1..=s {
        acc += r as f64 * (cum[r] - cum[r - 1]);
    }
    Ok(acc / w)
}

/// Limit of `T_{≤ r-1}(n, k_1..k_r)/(P_n)!` for `θ < 1`, as a function of the
/// tail distances `β_j = n - k_j` (strictly decreasing).
pub fn t_leq_limit_low(theta: f64, betas_desc: &[usize]) -> f64 {
    let r = betas_desc.len();
    let n = betas_desc[0] + 1;
    let ks: Vec<usize> = betas_desc.iter().map(|&b| n - b).collect();
    let ones = vec![1.0; n + 1];
    let mut total = theta.powi(betas_desc[r - 1] as i32);
    for t in 2..=r {
        let lows: Vec<usize> = (1..t).map(|j| ks[r - j]).collect();
        let count = nested_descending_sum(&ones, &lows, n - 1);
        total += theta.powi((betas_desc[r - t] - (t - 1)) as i32)
            * (1.0 - theta).powi(t as i32 - 1)
            * count;
    }
    total
}

/// Limit of `T_{≤ r-1}(n, k_1..k_r)/(P_n)!` for `θ > 1` (strictly increasing
/// `ks`), with tail truncation at relative 1e-15.
pub fn t_leq_limit_high(theta: f64, ks: &[usize]) -> f64 {
    let r = ks.len();
    let last = ks[r - 1];
    let m = last + ((15.0 * std::f64::consts::LN_10 / theta.ln()).ceil() as usize).max(60) + 10;
    let lt = theta.ln();
    let mut f = vec![0.0; m + 1];
    for (i, slot) in f.iter_mut().enumerate().skip(1) {
        let e = i as f64 * lt;
        *slot = if e > 700.0 {
            0.0
        } else {
            1.0 / (e.exp() - 1.0)
        };
    }
    let mut total = if last == 0 {
        0.0
    } else {
        1.0 - theta.powi(-(last as i32))
    };
    for t in 2..=r {
        let coeff = ks[r - t];
        if coeff == 0 {
            continue;
        }
        let lows: Vec<usize> = (1..t).map(|j| ks[r - j]).collect();
        let val = nested_descending_sum(&f, &lows, m);
        total += (1.0 - 1.0 / theta).powi(t as i32 - 1) * (1.0 - theta.powi(-(coeff as i32))) * val;
    }
    total
}

/// Limit of `T_{≤ r-1}(n, k_1..k_r)/n!` in the uniform case, for threshold
/// ratios `kx` (ascending, `kx[j] = lim k_{j+1}/n`).
pub fn t_leq_limit_uniform(kx: &[f64]) -> f64 {
    let r = kx.len();
    let mut total = kx[r - 1];
    for t in 1..r {
        let lows: Vec<f64> = (0..t).map(|j| kx[r - 1 - j]).collect();
        total += kx[r - 1 - t] * nested_log_integral(&lows, 1.0);
    }
    total
}

/// Threshold tuple `round(x_i · n)` from descending ratios.
pub fn scaled_thresholds(xs: &[f64], n: usize) -> Result<Thresholds> {
    let ks: Vec<usize> = xs
        .iter()
        .rev()
        .map(|&x| (x * n as f64).round() as usize)
        .collect();
    Thresholds::new(ks)
}

/// Uniform-case expected selections at proxy `n`, with the threshold-rounding
/// noise removed by multilinear interpolation over the floor/ceil corners of
/// `x_i · n`.
pub fn uniform_selections_interpolated(xs: &[f64], n: usize, conditional: bool) -> Result<f64> {
    let s = xs.len();
    let base: Vec<f64> = xs.iter().rev().map(|&x| x * n as f64).collect();
    let floors: Vec<usize> = base.iter().map(|&v| v.floor() as usize).collect();
    let fracs: Vec<f64> = base
        .iter()
        .zip(&floors)
        .map(|(&v, &f)| v - f as f64)
        .collect();
    let mut total = 0.0;
    for mask in 0u32..(1 << s) {
        let mut weight = 1.0;
        let mut ks = Vec::with_capacity(s);
        for j in 0..s {
            if mask >> j & 1 == 1 {
                weight *= fracs[j];
                ks.push(floors[j] + 1);
            } else {
                weight *= 1.0 - fracs[j];
                ks.push(floors[j]);
            }
        }
        if weight == 0.0 {
            continue;
        }
        ks.sort_unstable();
        let strategy = Thresholds::new(ks)?.canonical();
        total += weight * expected_selections(n, &strategy, Theta::new(1.0)?, conditional)?;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn th(v: f64) -> Theta {
        Theta::new(v).unwrap()
    }

    fn strat(ks: &[usize]) -> Thresholds {
        Thresholds::new(ks.to_vec()).unwrap()
    }

    #[test]
    fn unconditional_masses_sum_to_one() {
        for t in [0.5, 1.0, 2.0] {
            for ks in [vec![1usize], vec![0, 2], vec![1, 2, 4]] {
                for model in [Model::Genie, Model::Dowry] {
                    let d = stopping_distribution(7, &strat(&ks), th(t), model, false).unwrap();
                    assert!(
                        (d.total_mass() - 1.0).abs() < 1e-12,
                        "{model:?} {ks:?} t={t}"
                    );
                }
            }
        }
    }

    #[test]
    fn conditional_masses_sum_to_win_probability() {
        for t in [0.5, 1.0, 2.0] {
            for ks in [vec![1usize], vec![0, 2], vec![1, 3, 5]] {
                let w = win_ratio(8, &strat(&ks), th(t)).unwrap();
                for model in [Model::Genie, Model::Dowry] {
                    let d = stopping_distribution(8, &strat(&ks), th(t), model, true).unwrap();
                    assert!((d.total_mass() - w).abs() < 1e-12);
                    assert!((d.win_prob - w).abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn single_selection_models_coincide() {
        for t in [0.7, 1.0, 1.4] {
            for cond in [false, true] {
                let g = stopping_distribution(9, &strat(&[3]), th(t), Model::Genie, cond).unwrap();
                let d = stopping_distribution(9, &strat(&[3]), th(t), Model::Dowry, cond).unwrap();
                for m in 1..=9 {
                    assert!((g.masses[m] - d.masses[m]).abs() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn genie_masses_vanish_at_or_below_first_threshold() {
        let d = stopping_distribution(8, &strat(&[2, 4]), th(1.0), Model::Genie, false).unwrap();
        assert_eq!(&d.masses[1..=2], &[0.0, 0.0]);
        let d = stopping_distribution(8, &strat(&[2, 4]), th(1.0), Model::Dowry, false).unwrap();
        assert_eq!(&d.masses[1..=4], &[0.0; 4]);
    }

    #[test]
    fn expected_selections_worked_case() {
        // classical secretary, θ=1: E[selections] = 1 - k/n
        for n in [10usize, 40] {
            for k in 1..n {
                let e = expected_selections(n, &strat(&[k]), th(1.0), false).unwrap();
                assert!((e - (1.0 - k as f64 / n as f64)).abs() < 1e-12);
            }
        }
        // conditional with one selection is identically 1
        let e = expected_selections(10, &strat(&[3]), th(1.0), true).unwrap();
        assert!((e - 1.0).abs() < 1e-14);
    }

    #[test]
    fn zero_win_conditional_is_undefined() {
        // every threshold at or beyond n: no selection is ever possible
        let d = stopping_distribution(4, &strat(&[4]), th(1.0), Model::Genie, true).unwrap();
        assert!(matches!(
            d.mean_position(),
            Err(Error::UndefinedConditional)
        ));
        assert!(matches!(
            d.whole_list_probability(),
            Err(Error::UndefinedConditional)
        ));
    }

    #[test]
    fn limit_selections_match_finite_large_n() {
        // θ=0.5, b=(1..5): the finite evaluation converges exponentially
        let at = AsymptoticThresholds {
            regime: Regime::ThetaBelowOne,
            values: vec![1.0, 2.0, 3.0, 4.0, 5.0],
            win_prob: 0.96875,
            cap_hit: false,
        };
        let lim_u = expected_selections_limit(th(0.5), &at, false).unwrap();
        let lim_c = expected_selections_limit(th(0.5), &at, true).unwrap();
        assert!((lim_u - 2.5).abs() < 1e-8, "{lim_u}");
        assert!((lim_c - 2.58064516).abs() < 5e-8, "{lim_c}");
        let n = 400;
        let ks: Vec<usize> = [5usize, 4, 3, 2, 1].iter().map(|&b| n - b).collect();
        let fin_u = expected_selections(n, &strat(&ks), th(0.5), false).unwrap();
        assert!((fin_u - lim_u).abs() < 1e-9);
    }

    #[test]
    fn high_limit_matches_finite_large_n() {
        let at = AsymptoticThresholds {
            regime: Regime::ThetaAboveOne,
            values: vec![0.0, 0.0, 0.0, 0.0, 0.0],
            win_prob: 0.0,
            cap_hit: false,
        };
        let lim_u = expected_selections_limit(th(2.0), &at, false).unwrap();
        let lim_c = expected_selections_limit(th(2.0), &at, true).unwrap();
        assert!((lim_u - 1.60669004).abs() < 5e-8, "{lim_u}");
        assert!((lim_c - 1.60667284).abs() < 5e-8, "{lim_c}");
        let fin_u = expected_selections(300, &strat(&[0, 1, 2, 3, 4]), th(2.0), false).unwrap();
        assert!((fin_u - lim_u).abs() < 1e-9);
    }

    #[test]
    fn uniform_limit_matches_table_row() {
        let u = crate::asym::uniform_thresholds(5, 1e-10).unwrap();
        let e_u = expected_selections_limit(th(1.0), &u, false).unwrap();
        let e_c = expected_selections_limit(th(1.0), &u, true).unwrap();
        assert!((e_u - 2.61986256).abs() < 1e-7, "{e_u}");
        assert!((e_c - 2.69822343).abs() < 1e-7, "{e_c}");
    }

    #[test]
    fn interpolated_proxy_richardson_hits_limit() {
        let u = crate::asym::uniform_thresholds(5, 1e-10).unwrap();
        let e2 = uniform_selections_interpolated(&u.values, 2000, false).unwrap();
        let e4 = uniform_selections_interpolated(&u.values, 4000, false).unwrap();
        let extrapolated = 2.0 * e4 - e2;
        assert!((extrapolated - 2.61986256).abs() < 1e-4, "{extrapolated}");
    }
}
