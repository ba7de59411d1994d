//! Recomputation of the four published tables and structured comparison
//! against the bundled transcriptions.
//!
//! Comparisons distinguish hard cells (must match within tolerance) from
//! flagged cells: inside the slow-convergence band `0.9 < θ < 1.2` the
//! printed digits carry the proxy horizon they were produced at, and two
//! cells of the stopping table disagree with the formulas every other cell
//! follows, so those are reported rather than asserted.

use rayon::prelude::*;

use crate::asym::{search_thresholds, uniform_thresholds, AsymptoticThresholds, Horizon, Regime};
use crate::error::Result;
use crate::expect::{expected_selections_limit, scaled_thresholds, stopping_distribution};
use crate::reference::{self, Table1Row, Table2Row, Table3Row, Table4Row};
use crate::strategy::Model;
use crate::theta::Theta;

/// Search cap used for the table reproductions (matching their proxy).
pub const TABLE_CAP: usize = 1000;
/// Proxy length for the stopping-position table.
pub const TABLE4_PROXY_N: usize = 2000;

/// Whether θ sits in the slow-convergence band where printed digits are
/// proxy-dependent.
pub fn in_slow_band(theta: f64) -> bool {
    theta > 0.9 && theta < 1.2
}

/// One compared cell.
#[derive(Debug, Clone)]
pub struct Diff {
    pub cell: String,
    pub got: f64,
    pub want: f64,
    pub tol: f64,
    /// Hard cells fail the run when out of tolerance; soft cells are
    /// reported as flags.
    pub hard: bool,
}

impl Diff {
    pub fn within(&self) -> bool {
        (self.got - self.want).abs() <= self.tol
    }
}

/// The optimal asymptotic strategy for any θ, dispatching on regime.
pub fn optimal_asymptotic(
    theta: Theta,
    s: usize,
    cap: usize,
    horizon: Horizon,
) -> Result<AsymptoticThresholds> {
    if theta.is_uniform() {
        uniform_thresholds(s, 1e-10)
    } else {
        search_thresholds(theta, s, cap, horizon)
    }
}

/// Recomputes the optimal-strategy table over the published θ grid.
pub fn compute_table1() -> Result<Vec<Table1Row>> {
    let grid = reference::theta_grid();
    let per_theta: Vec<Result<Vec<Table1Row>>> = grid
        .par_iter()
        .map(|&theta| {
            let t = Theta::new(theta)?;
            let found = search_thresholds(t, 5, TABLE_CAP, Horizon::Proxy(TABLE_CAP))?;
            let mut rows = Vec::with_capacity(5);
            for s in 1..=5usize {
                let win_prob = partial_win_prob(t, &found, s)?;
                rows.push(Table1Row {
                    theta,
                    s,
                    threshold: found.values[s - 1] as usize,
                    p: win_prob,
                });
            }
            Ok(rows)
        })
        .collect();
    let mut out = Vec::new();
    for rows in per_theta {
        out.extend(rows?);
    }
    Ok(out)
}

fn partial_win_prob(theta: Theta, found: &AsymptoticThresholds, s: usize) -> Result<f64> {
    let head: Vec<usize> = found.values[..s].iter().map(|&v| v as usize).collect();
    match found.regime {
        Regime::ThetaBelowOne => crate::asym::asym_win_prob_low(theta, &head),
        Regime::ThetaAboveOne => {
            Ok(crate::asym::asym_win_prob_high(theta, &head, Horizon::Proxy(TABLE_CAP))?.value)
        }
        Regime::Uniform => crate::asym::uniform_win_prob(&found.values[..s]),
    }
}

/// Compares a recomputed Table 1 against the transcription.
pub fn diff_table1(computed: &[Table1Row]) -> Vec<Diff> {
    let mut diffs = Vec::new();
    for (got, want) in computed.iter().zip(reference::table1()) {
        debug_assert!(got.theta == want.theta && got.s == want.s);
        let band = in_slow_band(want.theta);
        diffs.push(Diff {
            cell: format!("table1 theta={} s={} threshold", want.theta, want.s),
            got: got.threshold as f64,
            want: want.threshold as f64,
            tol: if band { 1.0 } else { 0.0 },
            hard: !band,
        });
        diffs.push(Diff {
            cell: format!("table1 theta={} s={} p", want.theta, want.s),
            got: got.p,
            want: want.p,
            tol: if band { 1e-4 } else { 5e-7 },
            hard: !band,
        });
    }
    diffs
}

/// Recomputes the expected-selections table (limit formulas; the θ = 1 row
/// through the exact uniform integrals).
pub fn compute_table2() -> Result<Vec<Table2Row>> {
    let thetas: Vec<f64> = reference::table2().iter().map(|r| r.theta).collect();
    let rows: Vec<Result<Table2Row>> = thetas
        .par_iter()
        .map(|&theta| {
            let t = Theta::new(theta)?;
            let found = optimal_asymptotic(t, 5, TABLE_CAP, Horizon::Proxy(TABLE_CAP))?;
            Ok(Table2Row {
                theta,
                unconditional: expected_selections_limit(t, &found, false)?,
                conditional: expected_selections_limit(t, &found, true)?,
            })
        })
        .collect();
    rows.into_iter().collect()
}

pub fn diff_table2(computed: &[Table2Row]) -> Vec<Diff> {
    let mut diffs = Vec::new();
    for (got, want) in computed.iter().zip(reference::table2()) {
        let band = in_slow_band(want.theta);
        let tol = if band { 1e-2 } else { 1e-4 };
        diffs.push(Diff {
            cell: format!("table2 theta={} unconditional", want.theta),
            got: got.unconditional,
            want: want.unconditional,
            tol,
            hard: !band,
        });
        diffs.push(Diff {
            cell: format!("table2 theta={} conditional", want.theta),
            got: got.conditional,
            want: want.conditional,
            tol,
            hard: !band,
        });
    }
    diffs
}

/// Recomputes the uniform-case ratio table.
pub fn compute_table3() -> Result<Vec<Table3Row>> {
    (1..=5usize)
        .map(|s| {
            let u = uniform_thresholds(s, 1e-10)?;
            Ok(Table3Row {
                s,
                x: u.values[s - 1],
                p: u.win_prob,
            })
        })
        .collect()
}

pub fn diff_table3(computed: &[Table3Row]) -> Vec<Diff> {
    let mut diffs = Vec::new();
    for (got, want) in computed.iter().zip(reference::table3()) {
        diffs.push(Diff {
            cell: format!("table3 s={} x", want.s),
            got: got.x,
            want: want.x,
            tol: 1e-9,
            hard: true,
        });
        diffs.push(Diff {
            cell: format!("table3 s={} p", want.s),
            got: got.p,
            want: want.p,
            tol: 1e-9,
            hard: true,
        });
    }
    diffs
}

/// Recomputes the stopping-position table at the proxy length.
pub fn compute_table4(proxy_n: usize) -> Result<Vec<Table4Row>> {
    let combos: Vec<(Model, bool)> = vec![
        (Model::Genie, false),
        (Model::Genie, true),
        (Model::Dowry, false),
        (Model::Dowry, true),
    ];
    let mut rows = Vec::new();
    for (model, conditional) in combos {
        let per_s: Vec<Result<Table4Row>> = (1..=5usize)
            .into_par_iter()
            .map(|s| {
                let u = uniform_thresholds(s, 1e-10)?;
                let ks = scaled_thresholds(&u.values, proxy_n)?;
                let d = stopping_distribution(proxy_n, &ks, Theta::new(1.0)?, model, conditional)?;
                Ok(Table4Row {
                    model,
                    conditional,
                    s,
                    esr: d.expected_stop_ratio()?,
                    whole_list: d.whole_list_probability()?,
                })
            })
            .collect();
        for r in per_s {
            rows.push(r?);
        }
    }
    Ok(rows)
}

pub fn diff_table4(computed: &[Table4Row]) -> Vec<Diff> {
    let mut diffs = Vec::new();
    for (got, want) in computed.iter().zip(reference::table4()) {
        // the Genie-unconditional 4-query column disagrees with the
        // formulas all other cells follow; report it instead of asserting
        let soft = want.model == Model::Genie && !want.conditional && want.s == 5;
        let label = |what: &str| {
            format!(
                "table4 {:?} {} s={} {what}",
                want.model,
                if want.conditional {
                    "conditional"
                } else {
                    "unconditional"
                },
                want.s
            )
        };
        diffs.push(Diff {
            cell: label("esr"),
            got: got.esr,
            want: want.esr,
            tol: 1e-3,
            hard: !soft,
        });
        diffs.push(Diff {
            cell: label("whole_list"),
            got: got.whole_list,
            want: want.whole_list,
            tol: 1e-3,
            hard: !soft,
        });
    }
    diffs
}

/// Splits diffs into hard failures and informational flags.
pub fn partition_diffs(diffs: &[Diff]) -> (Vec<&Diff>, Vec<&Diff>) {
    let hard_failures: Vec<&Diff> = diffs.iter().filter(|d| d.hard && !d.within()).collect();
    let flags: Vec<&Diff> = diffs.iter().filter(|d| !d.within() && !d.hard).collect();
    (hard_failures, flags)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table3_reproduces() {
        let diffs = diff_table3(&compute_table3().unwrap());
        assert!(diffs.iter().all(|d| d.within()), "{diffs:?}");
    }

    #[test]
    fn band_detection() {
        assert!(!in_slow_band(0.9));
        assert!(in_slow_band(0.91));
        assert!(in_slow_band(1.1));
        assert!(!in_slow_band(1.2));
    }
}
