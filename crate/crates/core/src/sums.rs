//! Layered evaluation of the nested descending sums shared by the finite-N
//! closed forms and the asymptotic expressions.

/// Evaluates
/// `Σ_{i₁=lo[0]}^{hi} f[i₁] Σ_{i₂=lo[1]}^{i₁-1} f[i₂] ⋯ Σ_{i_d=lo[d-1]}^{i_{d-1}-1} f[i_d]`
/// with every empty sum contributing zero.
///
/// Each layer is a running prefix sum over the previous one, so the cost is
/// `O(d · hi)` instead of `O(hi^d)`.
pub(crate) fn nested_descending_sum(f: &[f64], lo: &[usize], hi: usize) -> f64 {
    let d = lo.len();
    if d == 0 {
        return 1.0;
    }
    debug_assert!(lo.iter().all(|&l| l >= 1));
    if hi < lo[0] {
        return 0.0;
    }
    let mut inner: Option<Vec<f64>> = None;
    for j in (1..d).rev() {
        let mut g = vec![0.0; hi + 1];
        let mut acc = 0.0;
        for v in lo[j]..=hi {
            acc += f[v]
                * match &inner {
                    None => 1.0,
                    Some(g_next) => g_next[v - 1],
                };
            g[v] = acc;
        }
        inner = Some(g);
    }
    let mut total = 0.0;
    for v in lo[0]..=hi {
        total += f[v]
            * match &inner {
                None => 1.0,
                Some(g_next) => g_next[v - 1],
            };
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute(f: &[f64], lo: &[usize], hi: usize) -> f64 {
        fn rec(f: &[f64], lo: &[usize], level: usize, upper: usize) -> f64 {
            if level == lo.len() {
                return 1.0;
            }
            let mut total = 0.0;
            for i in lo[level]..=upper {
                total += f[i] * rec(f, lo, level + 1, i.wrapping_sub(1));
            }
            total
        }
        rec(f, lo, 0, hi)
    }

    #[test]
    fn matches_brute_force() {
        let f: Vec<f64> = (0..20).map(|i| 1.0 / (i as f64 + 1.0)).collect();
        for lo in [
            vec![1],
            vec![2, 1],
            vec![3, 2, 1],
            vec![5, 3, 4],
            vec![2, 2, 2, 2],
        ] {
            for hi in 1..=19 {
                let a = nested_descending_sum(&f, &lo, hi);
                let b = brute(&f, &lo, hi);
                assert!(
                    (a - b).abs() <= 1e-12 * b.abs().max(1.0),
                    "{lo:?} hi={hi}: {a} vs {b}"
                );
            }
        }
    }

    #[test]
    fn empty_ranges_are_zero() {
        let f = vec![1.0; 10];
        assert_eq!(nested_descending_sum(&f, &[5], 4), 0.0);
        assert_eq!(nested_descending_sum(&f, &[5, 5], 5), 0.0);
    }
}
