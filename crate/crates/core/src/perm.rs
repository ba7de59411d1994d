//! Permutations, the Kendall tau statistic, and prefix relabelling.
//!
//! Candidates are indexed by quality: value `n` is the best of `n`, value 1
//! the worst. A permutation lists the qualities in interview order, so the
//! number of inversions (the Kendall tau distance to the ascending identity)
//! measures how far the interview order is from worst-to-best.

use crate::error::{Error, Result};

/// An interview order: a bijection on `{1, ..., n}` stored in one-based values.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    values: Vec<u32>,
}

impl Permutation {
    /// Validates that `values` is a bijection on `{1, ..., n}`.
    pub fn new(values: Vec<u32>) -> Result<Self> {
        let n = values.len();
        if n == 0 {
            return Err(Error::Domain("permutation must be nonempty".into()));
        }
        let mut seen = vec![false; n + 1];
        for &v in &values {
            if v == 0 || v as usize > n || seen[v as usize] {
                return Err(Error::Domain(format!(
                    "values are not a bijection on 1..={n}"
                )));
            }
            seen[v as usize] = true;
        }
        Ok(Permutation { values })
    }

    /// The ascending identity `[1, 2, ..., n]`.
    pub fn identity(n: usize) -> Self {
        Permutation {
            values: (1..=n as u32).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[u32] {
        &self.values
    }

    /// Value at one-based position `pos`.
    pub fn value_at(&self, pos: usize) -> u32 {
        self.values[pos - 1]
    }

    /// Number of inversions, i.e. the Kendall tau distance to the identity.
    ///
    /// Counted by merge sort in `O(n log n)`; the brute-force pair count is
    /// kept in the tests as the independent oracle.
    pub fn kendall_tau(&self) -> u64 {
        let mut work: Vec<u32> = self.values.clone();
        let mut buf = vec![0u32; work.len()];
        merge_count(&mut work, &mut buf)
    }

    /// The permutation read right-to-left.
    pub fn reverse(&self) -> Self {
        let mut values = self.values.clone();
        values.reverse();
        Permutation { values }
    }

    /// Relabels the first `k` entries by their relative order (the prefix
    /// `pi|_k`).
    pub fn prefix_relabel(&self, k: usize) -> Result<Permutation> {
        if k == 0 || k > self.len() {
            return Err(Error::Domain(format!(
                "prefix length {k} out of range 1..={}",
                self.len()
            )));
        }
        Ok(relabel(&self.values[..k]))
    }

    /// True if position `pos` (one-based) holds a left-to-right maxima.
    pub fn is_left_to_right_maxima(&self, pos: usize) -> bool {
        let v = self.values[pos - 1];
        self.values[..pos - 1].iter().all(|&u| u < v)
    }

    /// A prefix is eligible if it ends in a left-to-right maxima; full-length
    /// permutations are eligible by convention.
    pub fn is_eligible_prefix(&self, full_len: usize) -> bool {
        self.len() == full_len || self.is_left_to_right_maxima(self.len())
    }

    /// The children `f_1, ..., f_{k+1}` in the prefix tree: each appends a new
    /// last value `j` and shifts the existing values at or above `j` up by one.
    pub fn children(&self) -> Vec<Permutation> {
        let k = self.len() as u32;
        (1..=k + 1)
            .map(|j| {
                let mut values: Vec<u32> = self
                    .values
                    .iter()
                    .map(|&v| if v >= j { v + 1 } else { v })
                    .collect();
                values.push(j);
                Permutation { values }
            })
            .collect()
    }

    /// The action `g_tau`: rewrites the first `|tau|` positions of a
    /// `[1 2 ... k]`-prefixed permutation into the pattern `tau`.
    pub fn apply_prefix_pattern(&self, tau: &Permutation) -> Result<Permutation> {
        let k = tau.len();
        if k > self.len() {
            return Err(Error::Domain("pattern longer than permutation".into()));
        }
        let mut sorted: Vec<u32> = self.values[..k].to_vec();
        sorted.sort_unstable();
        let mut values = self.values.clone();
        for (i, &t) in tau.values.iter().enumerate() {
            values[i] = sorted[t as usize - 1];
        }
        Ok(Permutation { values })
    }

    /// Iterates over all of `S_n` in lexicographic order.
    pub fn all(n: usize) -> PermutationIter {
        PermutationIter {
            next: Some(Permutation::identity(n)),
        }
    }
}

/// Rank-normalizes an arbitrary sequence of distinct values into a permutation.
pub fn relabel(values: &[u32]) -> Permutation {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_unstable_by_key(|&i| values[i]);
    let mut out = vec![0u32; values.len()];
    for (rank, &i) in order.iter().enumerate() {
        out[i] = rank as u32 + 1;
    }
    Permutation { values: out }
}

fn merge_count(v: &mut [u32], buf: &mut [u32]) -> u64 {
    let n = v.len();
    if n <= 1 {
        return 0;
    }
    let mid = n / 2;
    let (left, right) = v.split_at_mut(mid);
    let mut inv = merge_count(left, &mut buf[..mid]) + merge_count(right, &mut buf[mid..]);
    let (mut i, mut j) = (0, 0);
    for slot in buf[..n].iter_mut() {
        if i < mid && (j >= n - mid || left[i] <= right[j]) {
            *slot = left[i];
            i += 1;
        } else {
            inv += (mid - i) as u64;
            *slot = right[j];
            j += 1;
        }
    }
    v.copy_from_slice(&buf[..n]);
    inv
}

/// Lexicographic iterator over `S_n`.
pub struct PermutationIter {
    next: Option<Permutation>,
}

impl Iterator for PermutationIter {
    type Item = Permutation;

    fn next(&mut self) -> Option<Permutation> {
        let current = self.next.take()?;
        let mut values = current.values.clone();
        if next_lex(&mut values) {
            self.next = Some(Permutation { values });
        }
        Some(current)
    }
}

fn next_lex(v: &mut [u32]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kendall_brute(p: &Permutation) -> u64 {
        let v = p.values();
        let mut count = 0;
        for a in 0..v.len() {
            for b in a + 1..v.len() {
                if v[a] > v[b] {
                    count += 1;
                }
            }
        }
        count
    }

    #[test]
    fn kendall_known_values() {
        assert_eq!(Permutation::new(vec![1, 2, 3]).unwrap().kendall_tau(), 0);
        assert_eq!(Permutation::new(vec![3, 2, 1]).unwrap().kendall_tau(), 3);
        // brute-force double loop over pairs gives 5
        let p = Permutation::new(vec![4, 2, 3, 1]).unwrap();
        assert_eq!(kendall_brute(&p), 5);
        assert_eq!(p.kendall_tau(), 5);
    }

    #[test]
    fn kendall_matches_brute_force_exhaustively() {
        for n in 1..=6 {
            for p in Permutation::all(n) {
                assert_eq!(p.kendall_tau(), kendall_brute(&p));
            }
        }
    }

    #[test]
    fn kendall_reverse_complement() {
        for p in Permutation::all(5) {
            assert_eq!(p.kendall_tau() + p.reverse().kendall_tau(), 10);
        }
    }

    #[test]
    fn prefix_relabel_worked_example() {
        let p = Permutation::new(vec![6, 3, 5, 1, 2, 4]).unwrap();
        assert_eq!(p.prefix_relabel(4).unwrap().values(), &[4, 2, 3, 1]);
        let id = Permutation::identity(3);
        assert_eq!(id.prefix_relabel(3).unwrap(), id);
        let q = Permutation::new(vec![5, 1, 2, 3, 4]).unwrap();
        assert_eq!(q.prefix_relabel(1).unwrap().values(), &[1]);
    }

    #[test]
    fn prefix_relabel_range_check() {
        let p = Permutation::identity(4);
        assert!(p.prefix_relabel(0).is_err());
        assert!(p.prefix_relabel(5).is_err());
    }

    #[test]
    fn relabel_idempotent_on_own_output() {
        for p in Permutation::all(5) {
            let r = p.prefix_relabel(p.len()).unwrap();
            assert_eq!(r, p);
            assert_eq!(relabel(r.values()), r);
        }
    }

    #[test]
    fn rejects_non_bijections() {
        assert!(Permutation::new(vec![]).is_err());
        assert!(Permutation::new(vec![1, 1]).is_err());
        assert!(Permutation::new(vec![0, 1]).is_err());
        assert!(Permutation::new(vec![2, 3]).is_err());
    }

    #[test]
    fn children_worked_example() {
        // f_j of [123]: [2341], [1342], [1243], [1234]
        let p = Permutation::identity(3);
        let ch: Vec<Vec<u32>> = p.children().iter().map(|c| c.values().to_vec()).collect();
        assert_eq!(
            ch,
            vec![
                vec![2, 3, 4, 1],
                vec![1, 3, 4, 2],
                vec![1, 2, 4, 3],
                vec![1, 2, 3, 4]
            ]
        );
    }

    #[test]
    fn lr_maxima_worked_example() {
        // [423516]: positions 1, 4, 6 are left-to-right maxima
        let p = Permutation::new(vec![4, 2, 3, 5, 1, 6]).unwrap();
        let maxima: Vec<usize> = (1..=6).filter(|&i| p.is_left_to_right_maxima(i)).collect();
        assert_eq!(maxima, vec![1, 4, 6]);
    }

    #[test]
    fn apply_prefix_pattern_worked_example() {
        // tau = [132], pi = [245361] -> [254361]
        let pi = Permutation::new(vec![2, 4, 5, 3, 6, 1]).unwrap();
        let tau = Permutation::new(vec![1, 3, 2]).unwrap();
        assert_eq!(
            pi.apply_prefix_pattern(&tau).unwrap().values(),
            &[2, 5, 4, 3, 6, 1]
        );
    }

    #[test]
    fn all_enumerates_factorially_many() {
        assert_eq!(Permutation::all(4).count(), 24);
        assert_eq!(Permutation::all(1).count(), 1);
    }
}
