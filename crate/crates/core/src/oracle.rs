//! Ground truth for small `n`: exhaustive play-through in exact rational
//! arithmetic, the per-prefix accept/reject probabilities, and optimal strike
//! sets built by the expand-or-collect construction.
//!
//! Everything here is `O(n!)` and guarded by an enumeration cap; it exists to
//! verify the scalable paths, not to replace them.

use num_traits::{One, Signed, Zero};
use serde_json::json;
use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::perm::Permutation;
use crate::sample::p_factorial;
use crate::strategy::{Model, Thresholds};
use crate::Rational;

/// Default exhaustive-enumeration cap (`8! = 40320` permutations).
pub const ENUM_CAP: usize = 8;

fn check_cap(n: usize, cap: usize) -> Result<()> {
    if n > cap {
        Err(Error::CapExceeded { requested: n, cap })
    } else if n == 0 {
        Err(Error::Domain("n must be at least 1".into()))
    } else {
        Ok(())
    }
}

fn check_positive_theta(theta: &Rational) -> Result<()> {
    if theta.is_positive() {
        Ok(())
    } else {
        Err(Error::Domain("theta must be positive".into()))
    }
}

/// Exact powers `θ^0..θ^max`.
fn power_table(theta: &Rational, max: usize) -> Vec<Rational> {
    let mut powers = Vec::with_capacity(max + 1);
    powers.push(Rational::one());
    for i in 1..=max {
        let next = &powers[i - 1] * theta;
        powers.push(next);
    }
    powers
}

fn genie_wins(pi: &Permutation, ks: &[usize]) -> bool {
    let n = pi.len();
    let best = n as u32;
    let s = ks.len();
    let mut running_max = 0;
    let mut made = 0;
    for pos in 1..=n {
        let v = pi.value_at(pos);
        if v <= running_max {
            continue;
        }
        running_max = v;
        if made < s && pos > ks[made] {
            made += 1;
            if made < s {
                // query: a confirmed best ends the search in success,
                // a denial continues it
                if v == best {
                    return true;
                }
            } else {
                // final query-less selection: the search ends here
                return v == best;
            }
        }
    }
    false
}

fn dowry_wins(pi: &Permutation, ks: &[usize]) -> bool {
    let n = pi.len();
    let s = ks.len();
    let mut running_max = 0;
    let mut made = 0;
    let mut captured = false;
    for pos in 1..=n {
        let v = pi.value_at(pos);
        if v <= running_max {
            continue;
        }
        running_max = v;
        if made < s && pos > ks[made] {
            made += 1;
            captured |= v == n as u32;
        }
    }
    captured
}

/// Exact win probability of a threshold strategy, by playing it on every
/// permutation of `S_n` and summing normalized Mallows weights.
///
/// The Genie and Dowry semantics are evaluated through separate
/// play-throughs; both return the same value.
pub fn enumerate_win_prob(
    n: usize,
    theta: &Rational,
    strategy: &Thresholds,
    model: Model,
    cap: usize,
) -> Result<Rational> {
    check_cap(n, cap)?;
    check_positive_theta(theta)?;
    let ks = strategy.canonical();
    let powers = power_table(theta, n * (n - 1) / 2);
    let mut winning = Rational::zero();
    for pi in Permutation::all(n) {
        let win = match model {
            Model::Genie => genie_wins(&pi, ks.ks()),
            Model::Dowry => dowry_wins(&pi, ks.ks()),
        };
        if win {
            winning += &powers[pi.kendall_tau() as usize];
        }
    }
    Ok(winning / p_factorial(n, theta))
}

/// The prefix tree with exact accept/reject win probabilities
/// `Q_i, Q_i°, Q̄_i` for every prefix and every query count `i < s`.
pub struct PrefixTree {
    n: usize,
    s: usize,
    theta: Rational,
    ids: HashMap<Permutation, usize>,
    nodes: Vec<Node>,
}

struct Node {
    prefix: Permutation,
    children: Vec<usize>,
    /// Standard denominator: total weight of permutations with this prefix.
    sd: Rational,
    /// Numerator of the accept-and-win probability with no queries.
    w0: Rational,
    /// Numerators of `Q_i` and `Q_i°` for `i = 0..s`.
    q: Vec<Rational>,
    qo: Vec<Rational>,
}

impl PrefixTree {
    /// Builds the tree and fills the probabilities by backward induction on
    /// prefix length, using the child-sum expansion of the reject value.
    pub fn build(n: usize, theta: &Rational, s: usize, cap: usize) -> Result<PrefixTree> {
        check_cap(n, cap)?;
        check_positive_theta(theta)?;
        if s == 0 {
            return Err(Error::Domain("s must be at least 1".into()));
        }
        let mut nodes: Vec<Node> = Vec::new();
        let mut ids: HashMap<Permutation, usize> = HashMap::new();
        let mut levels: Vec<Vec<usize>> = Vec::with_capacity(n);

        let root = Permutation::identity(1);
        nodes.push(Node::empty(root.clone(), s));
        ids.insert(root, 0);
        levels.push(vec![0]);
        for len in 1..n {
            let mut level = Vec::new();
            for &parent in levels[len - 1].clone().iter() {
                let children = nodes[parent].prefix.children();
                for child in children {
                    let id = nodes.len();
                    nodes.push(Node::empty(child.clone(), s));
                    ids.insert(child, id);
                    nodes[parent].children.push(id);
                    level.push(id);
                }
            }
            levels.push(level);
        }

        let powers = power_table(theta, n * (n - 1) / 2 + n);
        // (P_k)! for all k
        let pfact: Vec<Rational> = (0..=n).map(|k| p_factorial(k, theta)).collect();

        for len in (1..=n).rev() {
            for &id in &levels[len - 1] {
                let c = nodes[id].prefix.kendall_tau() as usize;
                let last_is_max = nodes[id].prefix.value_at(len) == len as u32;
                if len == n {
                    let w = powers[c].clone();
                    nodes[id].sd = w.clone();
                    if last_is_max {
                        nodes[id].w0 = w.clone();
                        for i in 0..s {
                            nodes[id].q[i] = w.clone();
                        }
                    }
                    continue;
                }
                // sd(σ) = θ^{c(σ)} (P_n)!/(P_k)!; the child-sum is asserted below
                nodes[id].sd = &powers[c] * &pfact[n] / &pfact[len];
                if last_is_max {
                    // weight of σ-prefixed π with the best at position |σ|
                    nodes[id].w0 = &powers[c + n - len] * &pfact[n - 1] / &pfact[len - 1];
                }
                let child_ids = nodes[id].children.clone();
                debug_assert_eq!(
                    child_ids
                        .iter()
                        .map(|&ch| nodes[ch].sd.clone())
                        .sum::<Rational>(),
                    nodes[id].sd
                );
                for i in 0..s {
                    let mut acc = Rational::zero();
                    for &ch in &child_ids {
                        let bar = nodes[ch].q[i].clone().max(nodes[ch].qo[i].clone());
                        acc += bar;
                    }
                    nodes[id].qo[i] = acc;
                }
                for i in 0..s {
                    nodes[id].q[i] = if i == 0 {
                        nodes[id].w0.clone()
                    } else {
                        &nodes[id].w0 + &nodes[id].qo[i - 1]
                    };
                }
            }
        }
        Ok(PrefixTree {
            n,
            s,
            theta: theta.clone(),
            ids,
            nodes,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn theta(&self) -> &Rational {
        &self.theta
    }

    fn id_of(&self, prefix: &Permutation) -> Result<usize> {
        self.ids
            .get(prefix)
            .copied()
            .ok_or_else(|| Error::Domain(format!("prefix {:?} not in the tree", prefix.values())))
    }

    /// `Q_i(σ)`: win probability accepting `σ` with `i` queries remaining.
    pub fn q(&self, prefix: &Permutation, i: usize) -> Result<Rational> {
        let id = self.id_of(prefix)?;
        Ok(&self.nodes[id].q[i] / &self.nodes[id].sd)
    }

    /// `Q_i°(σ)`: win probability rejecting `σ` with `i` queries remaining.
    pub fn q_reject(&self, prefix: &Permutation, i: usize) -> Result<Rational> {
        let id = self.id_of(prefix)?;
        Ok(&self.nodes[id].qo[i] / &self.nodes[id].sd)
    }

    /// `Q̄_i(σ) = max(Q_i, Q_i°)`.
    pub fn q_bar(&self, prefix: &Permutation, i: usize) -> Result<Rational> {
        Ok(self.q(prefix, i)?.max(self.q_reject(prefix, i)?))
    }

    /// Total Mallows weight of permutations carrying this prefix.
    pub fn standard_denominator(&self, prefix: &Permutation) -> Result<Rational> {
        Ok(self.nodes[self.id_of(prefix)?].sd.clone())
    }

    /// Type `i`-positivity: accepting is at least as good as rejecting
    /// (ties accept).
    pub fn is_positive(&self, prefix: &Permutation, i: usize) -> Result<bool> {
        let id = self.id_of(prefix)?;
        Ok(self.nodes[id].q[i] >= self.nodes[id].qo[i])
    }

    fn positive_id(&self, id: usize, i: usize) -> bool {
        self.nodes[id].q[i] >= self.nodes[id].qo[i]
    }

    fn eligible_id(&self, id: usize) -> bool {
        self.nodes[id].prefix.is_eligible_prefix(self.n)
    }

    /// The optimal win probability `Q̄_{s-1}([1])`.
    pub fn optimal_win_prob(&self) -> Rational {
        let root = Permutation::identity(1);
        self.q_bar(&root, self.s - 1)
            .expect("root is always present")
    }

    /// Exact optimal thresholds: for the selection with `j` queries left,
    /// the longest increasing prefix that is still type `j`-negative.
    pub fn crossover_thresholds(&self) -> Thresholds {
        let ks: Vec<usize> = (1..=self.s)
            .map(|i| {
                let j = self.s - i;
                let mut threshold = 0;
                for k in 1..=self.n {
                    let id = self.ids[&Permutation::identity(k)];
                    if self.nodes[id].q[j] < self.nodes[id].qo[j] {
                        threshold = k;
                    }
                }
                threshold
            })
            .collect();
        Thresholds::new(ks).expect("crossover thresholds are non-decreasing")
    }

    /// Every prefix of a given length, with its probabilities, as JSON rows
    /// with exact fraction strings.
    pub fn dump_json(&self) -> serde_json::Value {
        let mut rows = Vec::new();
        for node in &self.nodes {
            let fr = |r: &Rational| format!("{r}");
            rows.push(json!({
                "prefix": node.prefix.values(),
                "eligible": node.prefix.is_eligible_prefix(self.n),
                "q": (0..self.s).map(|i| fr(&(&node.q[i] / &node.sd))).collect::<Vec<_>>(),
                "q_reject": (0..self.s).map(|i| fr(&(&node.qo[i] / &node.sd))).collect::<Vec<_>>(),
            }));
        }
        json!({
            "n": self.n,
            "s": self.s,
            "theta": format!("{}", self.theta),
            "optimal_win_prob": format!("{}", self.optimal_win_prob()),
            "prefixes": rows,
        })
    }
}

impl Node {
    fn empty(prefix: Permutation, s: usize) -> Node {
        Node {
            prefix,
            children: Vec::new(),
            sd: Rational::zero(),
            w0: Rational::zero(),
            q: vec![Rational::zero(); s],
            qo: vec![Rational::zero(); s],
        }
    }
}

/// A layered optimal strike set: `layers[i]` holds the type `i`-positive
/// members `A_i`, for `i = s-1, ..., 0` (indexed here by `i`).
pub struct StrikeSet {
    pub n: usize,
    pub s: usize,
    /// `layers[i] = A_i`.
    pub layers: Vec<Vec<Permutation>>,
}

/// Builds the optimal strike set by the expand-or-collect construction: walk
/// children of the root; collect eligible type `i`-positive prefixes into the
/// current layer and recurse below them at level `i - 1`; expand everything
/// else.
pub fn build_strike_set(tree: &PrefixTree) -> StrikeSet {
    let s = tree.s;
    let mut layers: Vec<Vec<usize>> = vec![Vec::new(); s];
    let root_id = 0usize;

    fn collect_layer(tree: &PrefixTree, from: usize, i: usize, out: &mut Vec<usize>) {
        let mut stack: Vec<usize> = tree.nodes[from].children.clone();
        while let Some(id) = stack.pop() {
            if tree.eligible_id(id) && tree.positive_id(id, i) {
                out.push(id);
            } else {
                stack.extend(tree.nodes[id].children.iter().copied());
            }
        }
    }

    fn build_below(tree: &PrefixTree, from: usize, i: usize, layers: &mut Vec<Vec<usize>>) {
        let mut layer = Vec::new();
        collect_layer(tree, from, i, &mut layer);
        for &member in &layer {
            if i > 0 && tree.nodes[member].prefix.len() < tree.n {
                build_below(tree, member, i - 1, layers);
            }
        }
        layers[i].extend(layer);
    }

    if tree.positive_id(root_id, s - 1) {
        layers[s - 1].push(root_id);
        if s >= 2 {
            build_below(tree, root_id, s - 2, &mut layers);
        }
    } else {
        build_below(tree, root_id, s - 1, &mut layers);
    }

    let mut out = StrikeSet {
        n: tree.n,
        s,
        layers: Vec::new(),
    };
    for layer in layers {
        let mut prefixes: Vec<Permutation> = layer
            .into_iter()
            .map(|id| tree.nodes[id].prefix.clone())
            .collect();
        prefixes.sort();
        out.layers.push(prefixes);
    }
    out
}

impl StrikeSet {
    pub fn members(&self) -> impl Iterator<Item = &Permutation> {
        self.layers.iter().flatten()
    }

    /// Win probability recovered from the top layer:
    /// `⊕_{σ ∈ A_{s-1}} Q_{s-1}(σ)`.
    pub fn win_prob(&self, tree: &PrefixTree) -> Result<Rational> {
        let mut num = Rational::zero();
        let mut den = Rational::zero();
        for p in &self.layers[self.s - 1] {
            let id = tree.id_of(p)?;
            num += &tree.nodes[id].q[self.s - 1];
            den += &tree.nodes[id].sd;
        }
        Ok(num / den)
    }

    /// Win probability recovered from the whole set:
    /// `Σ_{σ ∈ A} Q_0(σ)·SD(σ) / (P_n)!`.
    pub fn win_prob_from_q0(&self, tree: &PrefixTree) -> Result<Rational> {
        let mut num = Rational::zero();
        for p in self.members() {
            let id = tree.id_of(p)?;
            num += &tree.nodes[id].q[0];
        }
        Ok(num / p_factorial(self.n, &tree.theta))
    }

    /// The mixed split at layer `j`:
    /// `(Σ_{A_{s-1}..A_j} Q_0·SD + Σ_{A_{j-1}} Q_{j-1}·SD) / (P_n)!`.
    pub fn win_prob_split(&self, tree: &PrefixTree, j: usize) -> Result<Rational> {
        let mut num = Rational::zero();
        for layer in (j..self.s).rev() {
            for p in &self.layers[layer] {
                let id = tree.id_of(p)?;
                num += &tree.nodes[id].q[0];
            }
        }
        for p in &self.layers[j - 1] {
            let id = tree.id_of(p)?;
            num += &tree.nodes[id].q[j - 1];
        }
        Ok(num / p_factorial(self.n, &tree.theta))
    }

    /// Longest prefix-chain among members (must be at most `s`).
    pub fn max_chain_len(&self) -> usize {
        let members: Vec<&Permutation> = self.members().collect();
        let mut best = 0;
        for &m in &members {
            best = best.max(chain_from(m, &members));
        }
        fn chain_from(top: &Permutation, members: &[&Permutation]) -> usize {
            let mut longest = 1;
            for &cand in members {
                if cand.len() < top.len()
                    && top
                        .prefix_relabel(cand.len())
                        .map(|p| &p == cand)
                        .unwrap_or(false)
                {
                    longest = longest.max(1 + chain_from(cand, members));
                }
            }
            longest
        }
        best
    }

    /// Checks eligibility, the chain bound, and covering of all of `S_n`.
    pub fn verify(&self, tree: &PrefixTree) -> Result<()> {
        for p in self.members() {
            if !p.is_eligible_prefix(self.n) {
                return Err(Error::Domain(format!("ineligible member {:?}", p.values())));
            }
        }
        for (i, layer) in self.layers.iter().enumerate() {
            for p in layer {
                if !tree.is_positive(p, i)? {
                    return Err(Error::Domain(format!(
                        "layer {i} member {:?} is type {i}-negative",
                        p.values()
                    )));
                }
            }
        }
        if self.max_chain_len() > self.s {
            return Err(Error::Domain("prefix chain longer than s".into()));
        }
        let members: Vec<&Permutation> = self.members().collect();
        for pi in Permutation::all(self.n) {
            let covered = (1..=self.n).any(|k| {
                let pref = pi.prefix_relabel(k).unwrap();
                members.iter().any(|&m| *m == pref)
            });
            if !covered {
                return Err(Error::Domain(format!("{:?} is uncovered", pi.values())));
            }
        }
        Ok(())
    }
}

/// Report from the exhaustive bijection-invariance checks.
#[derive(Debug, Default)]
pub struct InvarianceReport {
    pub checks: usize,
    pub violations: Vec<String>,
}

impl InvarianceReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Exhaustively verifies, for every prefix, that
///
/// 1. `Q_i` depends only on (length, last relative value),
/// 2. `Q_i°` depends only on length,
/// 3. the prefix-pattern action `g_τ` preserves type `i`-positivity for
///    eligible prefixes.
pub fn invariance_suite(
    n: usize,
    theta: &Rational,
    s: usize,
    cap: usize,
) -> Result<InvarianceReport> {
    let tree = PrefixTree::build(n, theta, s, cap)?;
    let mut report = InvarianceReport::default();

    // group prefixes by length
    let mut by_len: Vec<Vec<&Node>> = vec![Vec::new(); n + 1];
    for node in &tree.nodes {
        by_len[node.prefix.len()].push(node);
    }
    #[allow(clippy::needless_range_loop)] // len is the prefix length
    for len in 1..=n {
        for i in 0..s {
            // (1) Q_i constant over fixed (len, last value)
            let mut by_last: HashMap<u32, Rational> = HashMap::new();
            for node in &by_len[len] {
                let prob = &node.q[i] / &node.sd;
                let last = node.prefix.value_at(len);
                report.checks += 1;
                match by_last.get(&last) {
                    None => {
                        by_last.insert(last, prob);
                    }
                    Some(seen) if *seen == prob => {}
                    Some(seen) => report.violations.push(format!(
                        "Q_{i} differs within (len={len}, last={last}): {seen} vs {prob} at {:?}",
                        node.prefix.values()
                    )),
                }
            }
            // (2) Q_i° constant over fixed length
            let mut seen_qo: Option<Rational> = None;
            for node in &by_len[len] {
                let prob = &node.qo[i] / &node.sd;
                report.checks += 1;
                match &seen_qo {
                    None => seen_qo = Some(prob),
                    Some(seen) if *seen == prob => {}
                    Some(seen) => report.violations.push(format!(
                        "Q_{i}° differs within len={len}: {seen} vs {prob} at {:?}",
                        node.prefix.values()
                    )),
                }
            }
        }
    }

    // (3) g_τ preserves positivity: map every eligible σ prefixed by the
    // increasing pattern to its τ-image and compare types
    for k in 1..n {
        let id_k = Permutation::identity(k);
        for tau in Permutation::all(k) {
            if !tau.is_eligible_prefix(n) {
                continue;
            }
            for node in tree.nodes.iter() {
                let sigma = &node.prefix;
                if sigma.len() <= k || sigma.prefix_relabel(k).unwrap() != id_k {
                    continue;
                }
                if !sigma.is_eligible_prefix(n) {
                    continue;
                }
                let image = sigma.apply_prefix_pattern(&tau)?;
                for i in 0..s {
                    report.checks += 1;
                    let a = tree.is_positive(sigma, i)?;
                    let b = tree.is_positive(&image, i)?;
                    if a != b {
                        report.violations.push(format!(
                            "g_tau with tau={:?} flips type {i} of {:?}",
                            tau.values(),
                            sigma.values()
                        ));
                    }
                }
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational_from_str;

    fn rat(s: &str) -> Rational {
        rational_from_str(s).unwrap()
    }

    fn strat(ks: &[usize]) -> Thresholds {
        Thresholds::new(ks.to_vec()).unwrap()
    }

    #[test]
    fn worked_example_enumeration() {
        let one = rat("1");
        let p = enumerate_win_prob(4, &one, &strat(&[0, 1]), Model::Genie, ENUM_CAP).unwrap();
        assert_eq!(p, rat("17/24"));
        let p = enumerate_win_prob(4, &one, &strat(&[1]), Model::Genie, ENUM_CAP).unwrap();
        assert_eq!(p, rat("11/24"));
        let p = enumerate_win_prob(1, &rat("7/3"), &strat(&[0]), Model::Dowry, ENUM_CAP).unwrap();
        assert_eq!(p, rat("1"));
    }

    #[test]
    fn genie_equals_dowry_probability() {
        for theta in ["1/2", "1", "2"] {
            for ks in [vec![0usize], vec![1, 2], vec![0, 1, 3]] {
                let g = enumerate_win_prob(5, &rat(theta), &strat(&ks), Model::Genie, ENUM_CAP)
                    .unwrap();
                let d = enumerate_win_prob(5, &rat(theta), &strat(&ks), Model::Dowry, ENUM_CAP)
                    .unwrap();
                assert_eq!(g, d, "theta={theta} ks={ks:?}");
            }
        }
    }

    #[test]
    fn cap_enforced() {
        let e = enumerate_win_prob(9, &rat("1"), &strat(&[1]), Model::Genie, ENUM_CAP);
        assert!(matches!(
            e,
            Err(Error::CapExceeded {
                requested: 9,
                cap: 8
            })
        ));
    }

    #[test]
    fn tree_worked_example() {
        let tree = PrefixTree::build(4, &rat("1"), 2, ENUM_CAP).unwrap();
        let root = Permutation::identity(1);
        assert_eq!(tree.q_bar(&root, 1).unwrap(), rat("17/24"));
        assert_eq!(tree.q_reject(&root, 0).unwrap(), rat("11/24"));
        // a full prefix ending in the best: accept wins surely
        let full = Permutation::new(vec![2, 1, 3, 4]).unwrap();
        assert_eq!(tree.q(&full, 0).unwrap(), rat("1"));
        assert_eq!(tree.q_reject(&full, 1).unwrap(), rat("0"));
    }

    #[test]
    fn optimality_matches_exhaustive_search() {
        // max over all strategies of the enumerated win probability equals
        // the tree's optimal value
        for theta in ["1/2", "1", "2"] {
            let theta = rat(theta);
            for (n, s) in [(4usize, 1usize), (5, 1), (5, 2), (6, 1), (6, 2), (6, 3)] {
                let tree = PrefixTree::build(n, &theta, s, ENUM_CAP).unwrap();
                let mut best = Rational::zero();
                let mut tuple = vec![0usize; s];
                loop {
                    if tuple.windows(2).all(|w| w[0] <= w[1]) {
                        let p =
                            enumerate_win_prob(n, &theta, &strat(&tuple), Model::Genie, ENUM_CAP)
                                .unwrap();
                        best = best.max(p);
                    }
                    // odometer over {0..n-1}^s
                    let mut idx = 0;
                    loop {
                        if idx == s {
                            break;
                        }
                        tuple[idx] += 1;
                        if tuple[idx] < n {
                            break;
                        }
                        tuple[idx] = 0;
                        idx += 1;
                    }
                    if idx == s {
                        break;
                    }
                }
                assert_eq!(best, tree.optimal_win_prob());
            }
        }
    }

    #[test]
    fn strike_set_worked_example() {
        let tree = PrefixTree::build(4, &rat("1"), 2, ENUM_CAP).unwrap();
        let set = build_strike_set(&tree);
        set.verify(&tree).unwrap();
        assert_eq!(set.win_prob(&tree).unwrap(), rat("17/24"));
        assert_eq!(set.win_prob_from_q0(&tree).unwrap(), rat("17/24"));
        for j in 1..2 {
            assert_eq!(set.win_prob_split(&tree, j).unwrap(), rat("17/24"));
        }
        // the root is 1-positive here, so the top layer is {[1]}, and the
        // chain bound s is attained ([1] sits above [12] in layer 0)
        assert_eq!(set.layers[1], vec![Permutation::identity(1)]);
        assert_eq!(set.max_chain_len(), 2);
    }

    #[test]
    fn strike_set_nonuniform() {
        for theta in ["2", "1/2"] {
            let theta = rat(theta);
            for s in 1..=3usize {
                let tree = PrefixTree::build(5, &theta, s, ENUM_CAP).unwrap();
                let set = build_strike_set(&tree);
                set.verify(&tree).unwrap();
                assert_eq!(set.win_prob(&tree).unwrap(), tree.optimal_win_prob());
                assert_eq!(
                    set.win_prob_from_q0(&tree).unwrap(),
                    tree.optimal_win_prob()
                );
                for j in 1..s {
                    assert_eq!(
                        set.win_prob_split(&tree, j).unwrap(),
                        tree.optimal_win_prob()
                    );
                }
            }
        }
    }

    #[test]
    fn full_selection_budget_always_wins() {
        // s = n: every left-to-right maxima can be taken
        let n = 4;
        let tree = PrefixTree::build(n, &rat("3/2"), n, ENUM_CAP).unwrap();
        assert_eq!(tree.optimal_win_prob(), rat("1"));
        let p = enumerate_win_prob(n, &rat("3/2"), &strat(&vec![0; n]), Model::Dowry, ENUM_CAP)
            .unwrap();
        assert_eq!(p, rat("1"));
    }

    #[test]
    fn two_candidates_tie_resolution() {
        // n=2, s=1: both (0) and (1) win with probability 1/2 at θ=1;
        // ties resolve to accept, so the strike set starts at [1]... the
        // root accept value equals the reject value
        let tree = PrefixTree::build(2, &rat("1"), 1, ENUM_CAP).unwrap();
        let set = build_strike_set(&tree);
        set.verify(&tree).unwrap();
        assert_eq!(set.win_prob(&tree).unwrap(), rat("1/2"));
        assert!(tree.is_positive(&Permutation::identity(1), 0).unwrap());
        assert_eq!(set.layers[0], vec![Permutation::identity(1)]);
    }

    #[test]
    fn invariance_small_cases() {
        for (theta, s) in [("1", 2), ("2", 2), ("1/2", 1)] {
            let report = invariance_suite(4, &rat(theta), s, ENUM_CAP).unwrap();
            assert!(report.passed(), "violations: {:?}", report.violations);
            assert!(report.checks > 0);
        }
    }

    #[test]
    fn crossover_thresholds_are_right_aligned() {
        for theta in ["1/2", "1", "2"] {
            let theta = rat(theta);
            for n in 3..=6usize {
                let ks3 = PrefixTree::build(n, &theta, 3, ENUM_CAP)
                    .unwrap()
                    .crossover_thresholds();
                for s in 1..3usize {
                    let ks = PrefixTree::build(n, &theta, s, ENUM_CAP)
                        .unwrap()
                        .crossover_thresholds();
                    assert_eq!(&ks3.ks()[3 - s..], ks.ks(), "n={n} s={s}");
                }
            }
        }
    }

    #[test]
    fn monotone_in_query_budget() {
        let theta = rat("4/5");
        let mut prev = Rational::zero();
        for s in 1..=4 {
            let tree = PrefixTree::build(5, &theta, s, ENUM_CAP).unwrap();
            let p = tree.optimal_win_prob();
            assert!(p >= prev);
            prev = p;
        }
    }
}
