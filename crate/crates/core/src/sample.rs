//! Exact Mallows sampling and the exact pmf table for small `n`.
//!
//! The sampler draws an inversion table: independent `v_i ∈ {0, ..., i-1}`
//! with `P(v_i = j) ∝ θ^j`, then decodes by inserting each value `i` so that
//! exactly `v_i` smaller values sit to its right. Inserting the running
//! maximum never disturbs earlier pairs, so the decoded permutation has
//! exactly `Σ v_i` inversions and the pmf `θ^{c(π)} / (P_n)!` is hit exactly.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::perm::Permutation;
use crate::theta::Theta;

/// Hard cap for exact enumeration: the pmf table has `n!` entries.
pub const ENUM_CAP: usize = 8;

/// Above this length, inverse-CDF draws switch from per-length cumulative
/// tables to closed-form inversion.
const TABLE_LIMIT: usize = 4096;

/// A reusable exact sampler for fixed `(n, θ)`.
pub struct MallowsSampler {
    n: usize,
    theta: f64,
    /// cum[i][j] = P(v_{i+2} <= j), for i-th draw of support size i+2
    tables: Vec<Vec<f64>>,
}

impl MallowsSampler {
    pub fn new(n: usize, theta: Theta) -> Self {
        let th = theta.get();
        let mut tables = Vec::new();
        if n <= TABLE_LIMIT {
            for size in 2..=n {
                let mut cum = Vec::with_capacity(size);
                let mut acc = 0.0;
                let mut w = 1.0;
                for _ in 0..size {
                    acc += w;
                    cum.push(acc);
                    w *= th;
                }
                let total = acc;
                for c in &mut cum {
                    *c /= total;
                }
                tables.push(cum);
            }
        }
        MallowsSampler {
            n,
            theta: th,
            tables,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Draws one permutation using the supplied RNG.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> Permutation {
        let n = self.n;
        let mut values: Vec<u32> = Vec::with_capacity(n);
        values.push(1);
        for i in 2..=n {
            let v = self.draw_inversions(i, rng);
            values.insert(i - 1 - v, i as u32);
        }
        Permutation::new(values).expect("insertion decode yields a bijection")
    }

    /// Draws `v ∈ {0..size-1}` with `P(v = j) ∝ θ^j`.
    fn draw_inversions<R: Rng>(&self, size: usize, rng: &mut R) -> usize {
        let u: f64 = rng.gen();
        if !self.tables.is_empty() {
            let cum = &self.tables[size - 2];
            return match cum.binary_search_by(|c| c.partial_cmp(&u).unwrap()) {
                Ok(idx) => (idx + 1).min(size - 1),
                Err(idx) => idx.min(size - 1),
            };
        }
        if self.theta == 1.0 {
            return rng.gen_range(0..size);
        }
        // invert (1 - θ^{j+1}) / (1 - θ^size) at u
        let th = self.theta;
        let target = 1.0 - u * (1.0 - th.powi(size as i32));
        let j = (target.ln() / th.ln() - 1.0).ceil();
        (j.max(0.0) as usize).min(size - 1)
    }
}

/// Samples one Mallows permutation; deterministic for a fixed seed.
pub fn sample_mallows(n: usize, theta: Theta, rng_seed: u64) -> Result<Permutation> {
    if n == 0 {
        return Err(Error::Domain("n must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    Ok(MallowsSampler::new(n, theta).sample(&mut rng))
}

/// The exact pmf over `S_n` for rational θ.
#[derive(Debug, Clone)]
pub struct PmfTable {
    /// Unnormalized weights `θ^{c(π)}` keyed by permutation.
    pub weights: BTreeMap<Permutation, BigRational>,
    /// The partition function `Σ_π θ^{c(π)} = (P_n)!`.
    pub normalizer: BigRational,
}

impl PmfTable {
    pub fn probability(&self, p: &Permutation) -> BigRational {
        &self.weights[p] / &self.normalizer
    }
}

/// Tabulates `θ^{c(π)}` for every `π ∈ S_n`, exactly.
///
/// Errors with [`Error::CapExceeded`] for `n > cap` since the table has `n!`
/// entries.
pub fn mallows_pmf_table(n: usize, theta: &BigRational, cap: usize) -> Result<PmfTable> {
    if n > cap {
        return Err(Error::CapExceeded { requested: n, cap });
    }
    if n == 0 {
        return Err(Error::Domain("n must be at least 1".into()));
    }
    let max_inv = n * (n - 1) / 2;
    let mut powers = Vec::with_capacity(max_inv + 1);
    powers.push(BigRational::one());
    for i in 1..=max_inv {
        powers.push(&powers[i - 1] * theta);
    }
    let mut weights = BTreeMap::new();
    let mut normalizer = BigRational::zero();
    for p in Permutation::all(n) {
        let w = powers[p.kendall_tau() as usize].clone();
        normalizer += &w;
        weights.insert(p, w);
    }
    Ok(PmfTable {
        weights,
        normalizer,
    })
}

/// `(P_n)!` as an exact rational, for cross-checking the partition function.
pub fn p_factorial(n: usize, theta: &BigRational) -> BigRational {
    let mut p = BigRational::zero();
    let mut acc = BigRational::one();
    for _ in 1..=n {
        p = &p * theta + BigRational::from(BigInt::from(1));
        acc *= &p;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::ToPrimitive;

    fn ratio(num: i64, den: i64) -> BigRational {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    #[test]
    fn pmf_table_uniform_n3() {
        let t = mallows_pmf_table(3, &ratio(1, 1), ENUM_CAP).unwrap();
        assert_eq!(t.weights.len(), 6);
        for p in Permutation::all(3) {
            assert_eq!(t.probability(&p), ratio(1, 6));
        }
    }

    #[test]
    fn pmf_table_n2_theta2() {
        let t = mallows_pmf_table(2, &ratio(2, 1), ENUM_CAP).unwrap();
        let p12 = Permutation::identity(2);
        let p21 = Permutation::new(vec![2, 1]).unwrap();
        assert_eq!(t.probability(&p12), ratio(1, 3));
        assert_eq!(t.probability(&p21), ratio(2, 3));
    }

    #[test]
    fn normalizer_is_p_factorial() {
        for (num, den) in [(1, 2), (1, 1), (2, 1), (3, 2)] {
            let theta = ratio(num, den);
            for n in 1..=6 {
                let t = mallows_pmf_table(n, &theta, ENUM_CAP).unwrap();
                assert_eq!(t.normalizer, p_factorial(n, &theta));
            }
        }
        // up to the cap itself for one non-uniform theta
        for n in 7..=8 {
            let theta = ratio(3, 2);
            let t = mallows_pmf_table(n, &theta, ENUM_CAP).unwrap();
            assert_eq!(t.normalizer, p_factorial(n, &theta));
        }
    }

    #[test]
    fn cap_is_enforced() {
        let err = mallows_pmf_table(9, &ratio(1, 1), ENUM_CAP).unwrap_err();
        assert_eq!(
            err,
            Error::CapExceeded {
                requested: 9,
                cap: 8
            }
        );
    }

    #[test]
    fn sampler_is_deterministic() {
        let a = sample_mallows(20, Theta::new(1.3).unwrap(), 42).unwrap();
        let b = sample_mallows(20, Theta::new(1.3).unwrap(), 42).unwrap();
        let c = sample_mallows(20, Theta::new(1.3).unwrap(), 43).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn tiny_theta_concentrates_on_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let sampler = MallowsSampler::new(12, Theta::new(1e-6).unwrap());
        for _ in 0..50 {
            assert_eq!(sampler.sample(&mut rng), Permutation::identity(12));
        }
    }

    #[test]
    fn uniform_mean_inversions() {
        // E[kendall] = n(n-1)/4 under θ = 1
        let n = 10;
        let trials = 20_000;
        let sampler = MallowsSampler::new(n, Theta::new(1.0).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mean: f64 = (0..trials)
            .map(|_| sampler.sample(&mut rng).kendall_tau() as f64)
            .sum::<f64>()
            / trials as f64;
        let expect = (n * (n - 1)) as f64 / 4.0;
        // sd of kendall is O(n^{3/2}); 20k trials give ~0.03 se
        assert!((mean - expect).abs() < 0.5, "mean {mean} vs {expect}");
    }

    #[test]
    fn chi_square_against_exact_pmf() {
        // 10^5 samples here; the full 10^6-sample run lives in the acceptance suite
        let critical = [(3usize, 20.515), (4usize, 49.728)]; // chi2_{0.999}, df = n!-1
        for (n, crit) in critical {
            for th in [0.5, 1.0, 2.0] {
                let theta_r = BigRational::new(BigInt::from((th * 2.0) as i64), BigInt::from(2));
                let table = mallows_pmf_table(n, &theta_r, ENUM_CAP).unwrap();
                let sampler = MallowsSampler::new(n, Theta::new(th).unwrap());
                let mut rng = ChaCha8Rng::seed_from_u64(2024);
                let trials = 100_000usize;
                let mut counts: BTreeMap<Permutation, usize> = BTreeMap::new();
                for _ in 0..trials {
                    *counts.entry(sampler.sample(&mut rng)).or_default() += 1;
                }
                let mut chi2 = 0.0;
                for p in table.weights.keys() {
                    let expected = table.probability(p).to_f64().unwrap() * trials as f64;
                    let observed = *counts.get(p).unwrap_or(&0) as f64;
                    chi2 += (observed - expected).powi(2) / expected;
                }
                assert!(chi2 < crit, "n={n} th={th}: chi2={chi2} >= {crit}");
            }
        }
    }
}
