//! Threshold strategies and their play-through semantics.
//!
//! A `(k_1, ..., k_s)`-strategy makes up to `s` selections: for the `i`-th
//! selection it rejects every candidate up to position `k_i` and then accepts
//! the next left-to-right maxima. A strategy with duplicate thresholds is
//! behaviorally identical to the strictly increasing rewrite
//! `k'_{i+1} = k_i + 1` (two selections can never share a position), so a
//! single play-through semantics suffices.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::perm::Permutation;

/// Which feedback the interviewer receives.
///
/// Both models make the same selections on every interview order and
/// therefore win together; only the position where interviewing halts
/// differs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    /// `s-1` infallible queries plus one final query-less selection; a
    /// confirmed best halts the interview.
    Genie,
    /// `s` blind selections; interviewing continues to the end of the list
    /// unless all selections are spent earlier.
    Dowry,
}

/// A non-decreasing tuple of rejection thresholds `k_1 <= ... <= k_s`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Thresholds {
    ks: Vec<usize>,
}

impl Thresholds {
    pub fn new(ks: Vec<usize>) -> Result<Self> {
        if ks.is_empty() {
            return Err(Error::Domain(
                "a strategy needs at least one threshold".into(),
            ));
        }
        if ks.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::Domain(format!(
                "thresholds must be non-decreasing: {ks:?}"
            )));
        }
        Ok(Thresholds { ks })
    }

    /// Number of selections `s`.
    pub fn selections(&self) -> usize {
        self.ks.len()
    }

    pub fn ks(&self) -> &[usize] {
        &self.ks
    }

    /// The strictly increasing rewrite: any `k_{i+1} <= k_i` becomes
    /// `k_i + 1`.
    pub fn canonical(&self) -> Thresholds {
        let mut ks = self.ks.clone();
        for i in 1..ks.len() {
            if ks[i] <= ks[i - 1] {
                ks[i] = ks[i - 1] + 1;
            }
        }
        Thresholds { ks }
    }

    /// Canonical thresholds that are actually reachable in a list of length
    /// `n` (i.e. strictly below `n`), plus whether none were dropped.
    ///
    /// When thresholds are dropped, the final query-less selection of the
    /// Genie model can never be made: every selection still possible carries
    /// a query.
    pub fn effective(&self, n: usize) -> (Thresholds, bool) {
        let canon = self.canonical();
        let kept: Vec<usize> = canon.ks.iter().copied().filter(|&k| k < n).collect();
        let complete = kept.len() == canon.ks.len();
        (Thresholds { ks: kept }, complete)
    }

    pub fn is_strictly_increasing(&self) -> bool {
        self.ks.windows(2).all(|w| w[0] < w[1])
    }
}

impl std::fmt::Display for Thresholds {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.ks.iter().map(|k| k.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// The outcome of playing a strategy on one interview order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Playout {
    /// Number of selections made (0..=s).
    pub selections: usize,
    /// Whether the best candidate was among the selections.
    pub win: bool,
    /// Which selection captured the best candidate, if any (1-based).
    pub winning_selection: Option<usize>,
    /// Where the Genie-model interview halts.
    pub genie_stop: usize,
    /// Where the Dowry-model interview halts.
    pub dowry_stop: usize,
}

/// Plays the strategy on `pi`, reporting selections, win state, and the stop
/// positions of both models.
pub fn play(pi: &Permutation, strategy: &Thresholds) -> Playout {
    let ks = strategy.canonical();
    let ks = ks.ks();
    let s = ks.len();
    let n = pi.len();
    let best = n as u32;
    let mut running_max = 0u32;
    let mut made = 0usize;
    let mut win = false;
    let mut winning_selection = None;
    let mut genie_stop = None;
    let mut dowry_stop = None;
    for pos in 1..=n {
        let v = pi.value_at(pos);
        let is_lr = v > running_max;
        running_max = running_max.max(v);
        if !is_lr || made >= s || pos <= ks[made] {
            continue;
        }
        made += 1;
        if v == best {
            win = true;
            winning_selection = Some(made);
        }
        if made < s {
            // a query is available for this selection
            if v == best && genie_stop.is_none() {
                genie_stop = Some(pos);
            }
        } else {
            // final query-less selection halts the Genie interview regardless
            if genie_stop.is_none() {
                genie_stop = Some(pos);
            }
            dowry_stop = Some(pos);
        }
    }
    Playout {
        selections: made,
        win,
        winning_selection,
        genie_stop: genie_stop.unwrap_or(n),
        dowry_stop: dowry_stop.unwrap_or(n),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(ks: &[usize]) -> Thresholds {
        Thresholds::new(ks.to_vec()).unwrap()
    }

    #[test]
    fn canonicalization_rewrites_duplicates() {
        assert_eq!(t(&[0, 0, 0]).canonical().ks(), &[0, 1, 2]);
        assert_eq!(t(&[1, 1, 3]).canonical().ks(), &[1, 2, 3]);
        assert_eq!(t(&[0, 2]).canonical().ks(), &[0, 2]);
    }

    #[test]
    fn rejects_decreasing() {
        assert!(Thresholds::new(vec![2, 1]).is_err());
        assert!(Thresholds::new(vec![]).is_err());
    }

    #[test]
    fn duplicate_thresholds_play_identically_to_canonical() {
        for pi in Permutation::all(6) {
            for raw in [vec![0, 0], vec![2, 2, 2], vec![1, 1, 4]] {
                let a = play(&pi, &t(&raw));
                let b = play(&pi, &t(&raw).canonical());
                assert_eq!(a, b);
            }
        }
    }

    #[test]
    fn single_candidate_always_wins_with_zero_threshold() {
        let pi = Permutation::identity(1);
        let out = play(&pi, &t(&[0]));
        assert!(out.win);
        assert_eq!(out.selections, 1);
        assert_eq!(out.genie_stop, 1);
        assert_eq!(out.dowry_stop, 1);
    }

    #[test]
    fn worked_playout() {
        // pi = [2 1 3 4]: strategy (0,1) selects at position 1 (value 2, query
        // says no) and position 3 (value 3... not LR max after 2? value 3 > 2 yes).
        let pi = Permutation::new(vec![2, 1, 3, 4]).unwrap();
        let out = play(&pi, &t(&[0, 1]));
        assert_eq!(out.selections, 2);
        assert!(!out.win);
        assert_eq!(out.genie_stop, 3); // final selection at position 3
        assert_eq!(out.dowry_stop, 3);

        // pi = [2 1 4 3]: selections at 1 and 3; position 3 holds the best
        let pi = Permutation::new(vec![2, 1, 4, 3]).unwrap();
        let out = play(&pi, &t(&[0, 1]));
        assert!(out.win);
        assert_eq!(out.winning_selection, Some(2));
        assert_eq!(out.genie_stop, 3);
        assert_eq!(out.dowry_stop, 3);
    }

    #[test]
    fn genie_confirms_early_dowry_runs_to_end() {
        // first selection captures the best; the query confirms it and the
        // Genie interview halts, while the Dowry interview (one selection
        // still unspent, no further left-to-right maxima) runs to the end
        let pi = Permutation::new(vec![5, 1, 2, 3, 4]).unwrap();
        let out = play(&pi, &t(&[0, 2]));
        assert!(out.win);
        assert_eq!(out.selections, 1);
        assert_eq!(out.winning_selection, Some(1));
        assert_eq!(out.genie_stop, 1);
        assert_eq!(out.dowry_stop, 5);
    }

    #[test]
    fn selections_and_win_agree_across_models_exhaustively() {
        // the models differ only in stop position
        for pi in Permutation::all(6) {
            for ks in [vec![0], vec![1, 3], vec![0, 1, 2], vec![2, 2, 4]] {
                let out = play(&pi, &t(&ks));
                if out.win {
                    assert!(out.winning_selection.is_some());
                }
                assert!(out.genie_stop <= out.dowry_stop);
            }
        }
    }

    #[test]
    fn thresholds_at_or_beyond_n_never_select() {
        let (eff, complete) = t(&[2, 6, 7]).effective(6);
        assert_eq!(eff.ks(), &[2]);
        assert!(!complete);
        for pi in Permutation::all(4) {
            let out = play(&pi, &t(&[4]));
            assert_eq!(out.selections, 0);
            assert!(!out.win);
            assert_eq!(out.genie_stop, 4);
            assert_eq!(out.dowry_stop, 4);
        }
    }
}
