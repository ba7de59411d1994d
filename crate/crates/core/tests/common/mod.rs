//! Shared brute-force oracle for the integration suites: exhaustive
//! play-through over `S_n` with exact rational weights, aggregated as
//! inversion-count histograms so the rational arithmetic happens once per
//! category instead of once per permutation.

#![allow(dead_code)] // shared across several integration targets; not all use every helper

use mallows_secretary::perm::Permutation;
use mallows_secretary::sample::p_factorial;
use mallows_secretary::strategy::{play, Thresholds};
use mallows_secretary::Rational;
use num_traits::{ToPrimitive, Zero};

/// Histogram over inversion counts; `hist[c]` counts permutations with `c`
/// inversions in the category.
#[derive(Clone)]
pub struct InversionHistogram(pub Vec<u64>);

impl InversionHistogram {
    pub fn new(n: usize) -> Self {
        InversionHistogram(vec![0; n * (n - 1) / 2 + 1])
    }

    pub fn add(&mut self, inversions: u64) {
        self.0[inversions as usize] += 1;
    }

    /// `Σ_c hist[c] · θ^c`.
    pub fn weight(&self, powers: &[Rational]) -> Rational {
        let mut acc = Rational::zero();
        for (c, &count) in self.0.iter().enumerate() {
            if count > 0 {
                acc += &powers[c] * Rational::from_integer(count.into());
            }
        }
        acc
    }
}

/// Exhaustive statistics of one strategy on `S_n`.
pub struct BruteStats {
    /// Winning permutations.
    pub win: InversionHistogram,
    /// By exact number of selections used, `0..=s`.
    pub by_selections: Vec<InversionHistogram>,
    /// Winning permutations by which selection captured the best, `1..=s`.
    pub by_winning_selection: Vec<InversionHistogram>,
    /// Stop-position histograms: `[model][position]`, positions `1..=n`.
    pub genie_stop: Vec<InversionHistogram>,
    pub genie_stop_win: Vec<InversionHistogram>,
    pub dowry_stop: Vec<InversionHistogram>,
    pub dowry_stop_win: Vec<InversionHistogram>,
}

impl BruteStats {
    pub fn collect(n: usize, strategy: &Thresholds) -> BruteStats {
        let s = strategy.selections();
        let fresh = || InversionHistogram::new(n);
        let mut stats = BruteStats {
            win: fresh(),
            by_selections: vec![fresh(); s + 1],
            by_winning_selection: vec![fresh(); s + 1],
            genie_stop: vec![fresh(); n + 1],
            genie_stop_win: vec![fresh(); n + 1],
            dowry_stop: vec![fresh(); n + 1],
            dowry_stop_win: vec![fresh(); n + 1],
        };
        let canon = strategy.canonical();
        for pi in Permutation::all(n) {
            let c = pi.kendall_tau();
            let out = play(&pi, &canon);
            stats.by_selections[out.selections].add(c);
            stats.genie_stop[out.genie_stop].add(c);
            stats.dowry_stop[out.dowry_stop].add(c);
            if out.win {
                stats.win.add(c);
                stats.by_winning_selection[out.winning_selection.unwrap()].add(c);
                stats.genie_stop_win[out.genie_stop].add(c);
                stats.dowry_stop_win[out.dowry_stop].add(c);
            }
        }
        stats
    }
}

/// Ratio of a category weight to the partition function, as `f64`.
pub struct RatioContext {
    powers: Vec<Rational>,
    total: Rational,
}

impl RatioContext {
    pub fn new(n: usize, theta: &Rational) -> RatioContext {
        let max = n * (n - 1) / 2;
        let mut powers = Vec::with_capacity(max + 1);
        powers.push(Rational::from_integer(1.into()));
        for i in 1..=max {
            let next = &powers[i - 1] * theta;
            powers.push(next);
        }
        RatioContext {
            powers,
            total: p_factorial(n, theta),
        }
    }

    pub fn ratio(&self, hist: &InversionHistogram) -> Rational {
        hist.weight(&self.powers) / &self.total
    }

    pub fn ratio_f64(&self, hist: &InversionHistogram) -> f64 {
        self.ratio(hist).to_f64().unwrap()
    }
}

/// Deterministic xorshift for test tuple generation.
pub struct TestRng(pub u64);

impl TestRng {
    pub fn next(&mut self) -> u64 {
        self.0 ^= self.0 << 13;
        self.0 ^= self.0 >> 7;
        self.0 ^= self.0 << 17;
        self.0
    }

    /// A sorted threshold tuple with entries in `0..=max`.
    pub fn monotone_tuple(&mut self, s: usize, max: usize) -> Vec<usize> {
        let mut ks: Vec<usize> = (0..s)
            .map(|_| (self.next() % (max as u64 + 1)) as usize)
            .collect();
        ks.sort_unstable();
        ks
    }

    /// A sorted tuple whose canonical (strictly increasing) form still has
    /// `k_s <= n - 1`, as the exact-count splits require.
    pub fn monotone_tuple_for_counts(&mut self, s: usize, n: usize) -> Vec<usize> {
        assert!(n > s, "need n > s for an exact-count-compatible tuple");
        self.monotone_tuple(s, n - s)
    }
}
