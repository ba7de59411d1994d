//! Monte Carlo validation: sample interview orders, play a strategy, and
//! report win rates, selection counts, and stopping positions with standard
//! errors.
//!
//! Trials are sharded into fixed 4096-trial chunks, each driven by its own
//! ChaCha8 stream, and all accumulators are integers, so a report is
//! bit-identical for a fixed `(seed, trials)` pair regardless of thread
//! count.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sample::MallowsSampler;
use crate::strategy::{play, Model, Thresholds};
use crate::theta::Theta;

const CHUNK: u64 = 4096;

/// A point estimate with its standard error.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
}

impl Estimate {
    fn from_rate(hits: u64, trials: u64) -> Estimate {
        let p = hits as f64 / trials as f64;
        Estimate {
            value: p,
            std_error: (p * (1.0 - p) / trials as f64).sqrt(),
        }
    }

    fn from_moments(sum: u64, sumsq: u64, count: u64, scale: f64) -> Estimate {
        let mean = sum as f64 / count as f64;
        let var = (sumsq as f64 / count as f64 - mean * mean).max(0.0);
        Estimate {
            value: mean * scale,
            std_error: (var / count as f64).sqrt() * scale,
        }
    }
}

/// Aggregated Monte Carlo estimates for one configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimReport {
    pub n: usize,
    pub theta: f64,
    pub thresholds: Vec<usize>,
    pub model: Model,
    pub trials: u64,
    pub seed: u64,
    /// Generator identifier (algorithm, stream layout).
    pub rng: String,
    pub wins: u64,
    pub win_rate: Estimate,
    pub mean_selections: Estimate,
    /// Present only when at least one trial won.
    pub mean_selections_conditional: Option<Estimate>,
    pub mean_stop_ratio: Estimate,
    /// Present only when at least one trial won.
    pub mean_stop_ratio_conditional: Option<Estimate>,
    pub whole_list_rate: Estimate,
}

#[derive(Default, Clone, Copy)]
struct Tally {
    trials: u64,
    wins: u64,
    whole_list: u64,
    sel_sum: u64,
    sel_sumsq: u64,
    stop_sum: u64,
    stop_sumsq: u64,
    win_sel_sum: u64,
    win_sel_sumsq: u64,
    win_stop_sum: u64,
    win_stop_sumsq: u64,
}

impl Tally {
    fn merge(mut self, other: Tally) -> Tally {
        self.trials += other.trials;
        self.wins += other.wins;
        self.whole_list += other.whole_list;
        self.sel_sum += other.sel_sum;
        self.sel_sumsq += other.sel_sumsq;
        self.stop_sum += other.stop_sum;
        self.stop_sumsq += other.stop_sumsq;
        self.win_sel_sum += other.win_sel_sum;
        self.win_sel_sumsq += other.win_sel_sumsq;
        self.win_stop_sum += other.win_stop_sum;
        self.win_stop_sumsq += other.win_stop_sumsq;
        self
    }
}

/// Runs `trials` independent interviews and aggregates the outcome
/// statistics for the requested feedback model.
pub fn simulate(
    n: usize,
    theta: Theta,
    strategy: &Thresholds,
    model: Model,
    trials: u64,
    seed: u64,
) -> Result<SimReport> {
    if n == 0 || trials == 0 {
        return Err(Error::Domain("need n >= 1 and trials >= 1".into()));
    }
    let canon = strategy.canonical();
    let sampler = MallowsSampler::new(n, theta);
    let chunks = trials.div_ceil(CHUNK);
    let tally = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(chunk + 1);
            let lo = chunk * CHUNK;
            let hi = ((chunk + 1) * CHUNK).min(trials);
            let mut t = Tally::default();
            for _ in lo..hi {
                let pi = sampler.sample(&mut rng);
                let out = play(&pi, &canon);
                let stop = match model {
                    Model::Genie => out.genie_stop,
                    Model::Dowry => out.dowry_stop,
                } as u64;
                let sel = out.selections as u64;
                t.trials += 1;
                t.sel_sum += sel;
                t.sel_sumsq += sel * sel;
                t.stop_sum += stop;
                t.stop_sumsq += stop * stop;
                if stop == n as u64 {
                    t.whole_list += 1;
                }
                if out.win {
                    t.wins += 1;
                    t.win_sel_sum += sel;
                    t.win_sel_sumsq += sel * sel;
                    t.win_stop_sum += stop;
                    t.win_stop_sumsq += stop * stop;
                }
            }
            t
        })
        .reduce(Tally::default, Tally::merge);

    let inv_n = 1.0 / n as f64;
    Ok(SimReport {
        n,
        theta: theta.get(),
        thresholds: canon.ks().to_vec(),
        model,
        trials,
        seed,
        rng: format!("chacha8/stream-per-{CHUNK}-trial-chunk"),
        wins: tally.wins,
        win_rate: Estimate::from_rate(tally.wins, trials),
        mean_selections: Estimate::from_moments(tally.sel_sum, tally.sel_sumsq, trials, 1.0),
        mean_selections_conditional: (tally.wins > 0).then(|| {
            Estimate::from_moments(tally.win_sel_sum, tally.win_sel_sumsq, tally.wins, 1.0)
        }),
        mean_stop_ratio: Estimate::from_moments(tally.stop_sum, tally.stop_sumsq, trials, inv_n),
        mean_stop_ratio_conditional: (tally.wins > 0).then(|| {
            Estimate::from_moments(tally.win_stop_sum, tally.win_stop_sumsq, tally.wins, inv_n)
        }),
        whole_list_rate: Estimate::from_rate(tally.whole_list, trials),
    })
}
