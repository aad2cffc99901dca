//! Commuting-group partitioning and the classical preprocessing behind the
//! multi-ancilla parallel circuits: x/y/z splits, anticommutation signs, and
//! the pair set that the diagonal sign-fix operator must realize.

use crate::error::{Error, Result};
use crate::pauli::{Letter, PauliSum, PauliWord};
use std::fmt::Write as _;

/// Hard cap for the exhaustive partition search.
pub const EXHAUSTIVE_CAP: usize = 12;

/// Indices into a PauliSum whose words mutually commute.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CommutingGroup {
    pub terms: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PartitionStrategy {
    /// Descending anticommutation degree, first-fit, index-stable ties.
    GreedyLargestDegreeFirst,
    /// Widest support first, first-fit; a term joins a group only when it
    /// commutes with every member AND its support is nested inside or
    /// disjoint from each member's. Laminar groups keep straddling terms
    /// apart, so group-ordered emission runs structured Hamiltonians as
    /// non-interleaved waves instead of a staircase of overlapping windows.
    GreedyLaminar,
    /// Minimum group count by branch and bound; capped at EXHAUSTIVE_CAP terms.
    Exhaustive,
}

fn anticommute_matrix(h: &PauliSum) -> Vec<Vec<bool>> {
    let n = h.len();
    let mut m = vec![vec![false; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let anti = !h.terms()[i].word.commutes(&h.terms()[j].word);
            m[i][j] = anti;
            m[j][i] = anti;
        }
    }
    m
}

pub fn partition_commuting(
    h: &PauliSum,
    strategy: PartitionStrategy,
) -> Result<Vec<CommutingGroup>> {
    let n = h.len();
    if n == 0 {
        return Ok(vec![]);
    }
    let anti = anticommute_matrix(h);
    match strategy {
        PartitionStrategy::GreedyLargestDegreeFirst => Ok(greedy_partition(n, &anti)),
        PartitionStrategy::GreedyLaminar => Ok(laminar_partition(h, &anti)),
        PartitionStrategy::Exhaustive => {
            if n > EXHAUSTIVE_CAP {
                return Err(Error::PartitionCap {
                    n,
                    cap: EXHAUSTIVE_CAP,
                });
            }
            Ok(exhaustive_partition(n, &anti))
        }
    }
}

fn greedy_partition(n: usize, anti: &[Vec<bool>]) -> Vec<CommutingGroup> {
    let mut order: Vec<usize> = (0..n).collect();
    let degree: Vec<usize> = (0..n).map(|i| anti[i].iter().filter(|&&b| b).count()).collect();
    order.sort_by_key(|&i| (std::cmp::Reverse(degree[i]), i));
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for &i in &order {
        match groups
            .iter_mut()
            .find(|g| g.iter().all(|&j| !anti[i][j]))
        {
            Some(g) => g.push(i),
            None => groups.push(vec![i]),
        }
    }
    for g in &mut groups {
        g.sort_unstable();
    }
    groups.into_iter().map(|terms| CommutingGroup { terms }).collect()
}

fn laminar_partition(h: &PauliSum, anti: &[Vec<bool>]) -> Vec<CommutingGroup> {
    let n = h.len();
    let n_words = h.n_qubits().div_ceil(64);
    let masks: Vec<Vec<u64>> = h
        .terms()
        .iter()
        .map(|t| {
            let mut m = vec![0u64; n_words];
            for q in t.word.support() {
                m[q / 64] |= 1 << (q % 64);
            }
            m
        })
        .collect();
    let compatible = |a: &[u64], b: &[u64]| {
        let mut disjoint = true;
        let mut a_in_b = true;
        let mut b_in_a = true;
        for (x, y) in a.iter().zip(b) {
            let both = x & y;
            disjoint &= both == 0;
            a_in_b &= both == *x;
            b_in_a &= both == *y;
        }
        disjoint || a_in_b || b_in_a
    };
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| (std::cmp::Reverse(h.terms()[i].word.weight()), i));
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for &i in &order {
        match groups
            .iter_mut()
            .find(|g| g.iter().all(|&j| !anti[i][j] && compatible(&masks[i], &masks[j])))
        {
            Some(g) => g.push(i),
            None => groups.push(vec![i]),
        }
    }
    for g in &mut groups {
        g.sort_unstable();
    }
    groups.into_iter().map(|terms| CommutingGroup { terms }).collect()
}

fn exhaustive_partition(n: usize, anti: &[Vec<bool>]) -> Vec<CommutingGroup> {
    // Minimum clique cover of the commutation graph == coloring of the
    // anticommutation graph; plain backtracking is fine at <= 12 vertices.
    let mut best: Option<Vec<usize>> = None;
    let mut best_count = greedy_partition(n, anti).len();
    let mut color = vec![usize::MAX; n];

    fn rec(
        v: usize,
        used: usize,
        n: usize,
        anti: &[Vec<bool>],
        color: &mut Vec<usize>,
        best_count: &mut usize,
        best: &mut Option<Vec<usize>>,
    ) {
        if used >= *best_count {
            return;
        }
        if v == n {
            *best_count = used;
            *best = Some(color.clone());
            return;
        }
        for c in 0..=used.min(*best_count - 1) {
            if c < used {
                let ok = (0..v).all(|u| color[u] != c || !anti[v][u]);
                if !ok {
                    continue;
                }
            }
            color[v] = c;
            rec(
                v + 1,
                used.max(c + 1),
                n,
                anti,
                color,
                best_count,
                best,
            );
            color[v] = usize::MAX;
        }
    }
    rec(0, 0, n, anti, &mut color, &mut best_count, &mut best);

    let assignment = best.unwrap_or_else(|| {
        // Greedy already achieves best_count; rebuild it as colors.
        let groups = greedy_partition(n, anti);
        let mut c = vec![0usize; n];
        for (gi, g) in groups.iter().enumerate() {
            for &t in &g.terms {
                c[t] = gi;
            }
        }
        c
    });
    let n_groups = assignment.iter().max().map_or(0, |m| m + 1);
    let mut groups = vec![Vec::new(); n_groups];
    for (t, &c) in assignment.iter().enumerate() {
        groups[c].push(t);
    }
    groups
        .into_iter()
        .filter(|g| !g.is_empty())
        .map(|terms| CommutingGroup { terms })
        .collect()
}

/// A word separated into its pure-x, pure-y and pure-z content.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct XYZSplit {
    pub sx: PauliWord,
    pub sy: PauliWord,
    pub sz: PauliWord,
}

impl XYZSplit {
    pub fn recombined(&self) -> PauliWord {
        let n = self.sx.n_qubits();
        let mut w = PauliWord::identity(n);
        for q in 0..n {
            let l = match (self.sx.letter(q), self.sy.letter(q), self.sz.letter(q)) {
                (Letter::X, Letter::I, Letter::I) => Letter::X,
                (Letter::I, Letter::Y, Letter::I) => Letter::Y,
                (Letter::I, Letter::I, Letter::Z) => Letter::Z,
                _ => Letter::I,
            };
            w.set(q, l);
        }
        w
    }
}

pub fn split_xyz(w: &PauliWord) -> XYZSplit {
    let n = w.n_qubits();
    let mut sx = PauliWord::identity(n);
    let mut sy = PauliWord::identity(n);
    let mut sz = PauliWord::identity(n);
    for q in 0..n {
        match w.letter(q) {
            Letter::I => {}
            Letter::X => sx.set(q, Letter::X),
            Letter::Y => sy.set(q, Letter::Y),
            Letter::Z => sz.set(q, Letter::Z),
        }
    }
    XYZSplit { sx, sy, sz }
}

/// +1 when the words commute, -1 when they anticommute.
pub fn tau(a: &PauliWord, b: &PauliWord) -> i32 {
    if a.commutes(b) {
        1
    } else {
        -1
    }
}

/// Classical preprocessing of one commuting group for the multi-ancilla
/// parallel circuit. `sign_pairs` holds the (rank, rank) pairs whose product
/// of cross-type signs is -1; the diagonal correction applies (-1)^(n_mu n_nu)
/// for exactly those pairs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParallelPlan {
    pub group: CommutingGroup,
    pub splits: Vec<XYZSplit>,
    /// term rank within the group -> ancilla index (identity mapping)
    pub ancilla_of_term: Vec<usize>,
    /// 0-based rank pairs (mu < nu)
    pub sign_pairs: Vec<(usize, usize)>,
    /// Kept in the plan format for stability; this implementation never sets
    /// it. Complementing the pair set is not equivalent to a global sign
    /// (take all ancillae empty: the pair product is +1 either way), so the
    /// emitted pair set is always the exact one.
    pub global_flip: bool,
}

/// Sign picked up when the per-term x/y/z conditional strings are regrouped
/// type-by-type, for the pair (mu, nu): x of the later term crosses y and z
/// of the earlier, z of the earlier crosses y of the later. Symmetric in
/// (mu, nu) because the six cross-type signs multiply to +1 for commuting
/// terms.
fn pair_sign(a: &XYZSplit, b: &XYZSplit) -> i32 {
    tau(&a.sx, &b.sy) * tau(&a.sx, &b.sz) * tau(&a.sy, &b.sz)
}

pub fn plan_group(h: &PauliSum, group: &CommutingGroup, ancillae: usize) -> Result<ParallelPlan> {
    let n = group.terms.len();
    if ancillae < n {
        return Err(Error::InvalidArg(format!(
            "group of {n} terms needs {n} ancillae, only {ancillae} available"
        )));
    }
    for (a, &ta) in group.terms.iter().enumerate() {
        for &tb in group.terms.iter().skip(a + 1) {
            if !h.terms()[ta].word.commutes(&h.terms()[tb].word) {
                return Err(Error::InvalidArg(format!(
                    "terms {ta} and {tb} of the group anticommute"
                )));
            }
        }
    }
    let splits: Vec<XYZSplit> = group
        .terms
        .iter()
        .map(|&t| split_xyz(&h.terms()[t].word))
        .collect();
    let mut sign_pairs = Vec::new();
    for mu in 0..n {
        for nu in mu + 1..n {
            if pair_sign(&splits[mu], &splits[nu]) == -1 {
                sign_pairs.push((mu, nu));
            }
        }
    }
    Ok(ParallelPlan {
        group: group.clone(),
        splits,
        ancilla_of_term: (0..n).collect(),
        sign_pairs,
        global_flip: false,
    })
}

/// Line-based text report over all groups of a partition.
pub fn plan_report(h: &PauliSum, plans: &[ParallelPlan]) -> String {
    let mut out = String::new();
    for (gi, p) in plans.iter().enumerate() {
        write!(out, "group {gi}: terms").unwrap();
        for &t in &p.group.terms {
            write!(out, " {t}").unwrap();
        }
        out.push('\n');
        for (rank, &t) in p.group.terms.iter().enumerate() {
            writeln!(
                out,
                "  term {t} ancilla {rank} word {}",
                h.terms()[t].word
            )
            .unwrap();
        }
        write!(out, "  sign_pairs:").unwrap();
        for &(a, b) in &p.sign_pairs {
            write!(out, " ({a},{b})").unwrap();
        }
        out.push('\n');
        writeln!(out, "  flip: {}", if p.global_flip { 1 } else { 0 }).unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::PauliTerm;
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sum_of(words: &[&str]) -> PauliSum {
        let n = words[0].len();
        PauliSum::from_terms(
            n,
            words
                .iter()
                .map(|w| PauliTerm::new(Complex64::new(1.0, 0.0), w.parse().unwrap()))
                .collect(),
        )
        .unwrap()
    }

    fn group_words() -> PauliSum {
        // Three mutually commuting six-qubit terms whose x/y/z splits do not
        // all commute; the exact sign-pair set is pinned below.
        sum_of(&["ZXZYYI", "IYYXXZ", "ZXXYXY"])
    }

    #[test]
    fn all_commuting_is_one_group() {
        let h = sum_of(&["ZZI", "IZZ", "ZIZ"]);
        let g = partition_commuting(&h, PartitionStrategy::GreedyLargestDegreeFirst).unwrap();
        assert_eq!(g.len(), 1);
        assert_eq!(g[0].terms, vec![0, 1, 2]);
    }

    #[test]
    fn x_and_z_split_into_two_groups() {
        let h = sum_of(&["X", "Z"]);
        for strat in [
            PartitionStrategy::GreedyLargestDegreeFirst,
            PartitionStrategy::Exhaustive,
        ] {
            assert_eq!(partition_commuting(&h, strat).unwrap().len(), 2);
        }
    }

    #[test]
    fn greedy_groups_the_commuting_pair_together() {
        let h = sum_of(&["XI", "IX", "ZZ"]);
        let g = partition_commuting(&h, PartitionStrategy::GreedyLargestDegreeFirst).unwrap();
        assert_eq!(g.len(), 2);
        assert!(g.iter().any(|grp| grp.terms == vec![0, 1]));
        assert!(g.iter().any(|grp| grp.terms == vec![2]));
    }

    #[test]
    fn example_terms_mutually_commute() {
        let h = group_words();
        let g = partition_commuting(&h, PartitionStrategy::GreedyLargestDegreeFirst).unwrap();
        assert_eq!(g.len(), 1);
    }

    #[test]
    fn exhaustive_cap_enforced() {
        let words: Vec<String> = (0..13)
            .map(|i| {
                let mut s = vec!['I'; 13];
                s[i] = 'X';
                s.iter().collect()
            })
            .collect();
        let refs: Vec<&str> = words.iter().map(|s| s.as_str()).collect();
        let h = sum_of(&refs);
        assert!(matches!(
            partition_commuting(&h, PartitionStrategy::Exhaustive),
            Err(Error::PartitionCap { n: 13, .. })
        ));
    }

    #[test]
    fn exhaustive_never_worse_than_greedy_and_always_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let n_terms = rng.gen_range(2..=8);
            let words: Vec<String> = (0..n_terms)
                .map(|_| {
                    (0..4)
                        .map(|_| ['I', 'X', 'Y', 'Z'][rng.gen_range(0..4)])
                        .collect()
                })
                .collect();
            let refs: Vec<&str> = words.iter().map(|s| s.as_str()).collect();
            let h = sum_of(&refs);
            let greedy =
                partition_commuting(&h, PartitionStrategy::GreedyLargestDegreeFirst).unwrap();
            let exact = partition_commuting(&h, PartitionStrategy::Exhaustive).unwrap();
            assert!(exact.len() <= greedy.len());
            for groups in [&greedy, &exact] {
                let mut seen = vec![false; h.len()];
                for g in groups.iter() {
                    for (i, &a) in g.terms.iter().enumerate() {
                        assert!(!seen[a]);
                        seen[a] = true;
                        for &b in g.terms.iter().skip(i + 1) {
                            assert!(h.terms()[a].word.commutes(&h.terms()[b].word));
                        }
                    }
                }
                assert!(seen.iter().all(|&s| s));
            }
        }
    }

    #[test]
    fn split_examples() {
        let s = split_xyz(&"ZXZYYI".parse().unwrap());
        assert_eq!(s.sx, "IXIIII".parse().unwrap());
        assert_eq!(s.sy, "IIIYYI".parse().unwrap());
        assert_eq!(s.sz, "ZIZIII".parse().unwrap());

        let z = split_xyz(&"ZZZ".parse().unwrap());
        assert!(z.sx.is_identity() && z.sy.is_identity());
        assert_eq!(z.sz, "ZZZ".parse().unwrap());

        let w = split_xyz(&"XYZ".parse().unwrap());
        assert_eq!(w.sx, "XII".parse().unwrap());
        assert_eq!(w.sy, "IYI".parse().unwrap());
        assert_eq!(w.sz, "IIZ".parse().unwrap());
    }

    #[test]
    fn tau_on_printed_splits() {
        let h = group_words();
        let s1 = split_xyz(&h.terms()[0].word);
        let s2 = split_xyz(&h.terms()[1].word);
        assert_eq!(tau(&s1.sz, &s2.sy), -1);
        assert_eq!(tau(&s1.sx, &s2.sx), 1);
        assert_eq!(tau(&s1.sz, &s1.sz), 1);
    }

    #[test]
    fn plan_for_example_group() {
        let h = group_words();
        let group = CommutingGroup {
            terms: vec![0, 1, 2],
        };
        let plan = plan_group(&h, &group, 3).unwrap();
        // 1-based (1,2) and (2,3).
        assert_eq!(plan.sign_pairs, vec![(0, 1), (1, 2)]);
        assert!(!plan.global_flip);
        assert_eq!(plan.ancilla_of_term, vec![0, 1, 2]);
        assert!(plan_group(&h, &group, 2).is_err());
    }

    #[test]
    fn pure_z_group_needs_no_sign_fix() {
        let h = sum_of(&["ZZI", "IZZ", "ZIZ"]);
        let group = CommutingGroup {
            terms: vec![0, 1, 2],
        };
        let plan = plan_group(&h, &group, 3).unwrap();
        assert!(plan.sign_pairs.is_empty());
    }

    #[test]
    fn plan_rejects_anticommuting_group() {
        let h = sum_of(&["X", "Z"]);
        let group = CommutingGroup { terms: vec![0, 1] };
        assert!(plan_group(&h, &group, 2).is_err());
    }

    /// Stable bubble of the interleaved (term, type) list into type blocks,
    /// accumulating the anticommutation sign of every adjacent swap.
    fn reorder_sign(splits: &[&XYZSplit], active: &[bool]) -> i32 {
        let mut seq: Vec<(usize, usize)> = Vec::new(); // (type, term)
        for (t, s) in splits.iter().enumerate() {
            if active[t] {
                seq.push((0, t));
                let _ = s;
                seq.push((1, t));
                seq.push((2, t));
            }
        }
        let word_of = |(ty, t): (usize, usize)| -> &PauliWord {
            match ty {
                0 => &splits[t].sx,
                1 => &splits[t].sy,
                _ => &splits[t].sz,
            }
        };
        let mut sign = 1i32;
        let mut changed = true;
        while changed {
            changed = false;
            for i in 0..seq.len().saturating_sub(1) {
                if seq[i].0 > seq[i + 1].0 {
                    sign *= tau(word_of(seq[i]), word_of(seq[i + 1]));
                    seq.swap(i, i + 1);
                    changed = true;
                }
            }
        }
        sign
    }

    #[test]
    fn sign_pairs_reproduce_symbolic_reordering() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut tested = 0;
        while tested < 12 {
            // Grow a random commuting set of up to 4 words on 5 qubits.
            let mut words: Vec<PauliWord> = Vec::new();
            for _ in 0..40 {
                let w = PauliWord::from_letters(
                    &(0..5)
                        .map(|_| {
                            [Letter::I, Letter::X, Letter::Y, Letter::Z][rng.gen_range(0..4)]
                        })
                        .collect::<Vec<_>>(),
                );
                if !w.is_identity()
                    && words.iter().all(|v| v.commutes(&w))
                    && !words.contains(&w)
                {
                    words.push(w);
                    if words.len() == 4 {
                        break;
                    }
                }
            }
            if words.len() < 3 {
                continue;
            }
            tested += 1;
            let n_terms = words.len();
            let h = PauliSum::from_terms(
                5,
                words
                    .iter()
                    .map(|w| PauliTerm::new(Complex64::new(1.0, 0.0), w.clone()))
                    .collect(),
            )
            .unwrap();
            let group = CommutingGroup {
                terms: (0..n_terms).collect(),
            };
            let plan = plan_group(&h, &group, n_terms).unwrap();
            let split_refs: Vec<&XYZSplit> = plan.splits.iter().collect();
            for mask in 0..(1u32 << n_terms) {
                let active: Vec<bool> = (0..n_terms).map(|t| mask >> t & 1 == 1).collect();
                let direct = reorder_sign(&split_refs, &active);
                let mut from_pairs = 1i32;
                for &(a, b) in &plan.sign_pairs {
                    if active[a] && active[b] {
                        from_pairs *= -1;
                    }
                }
                assert_eq!(direct, from_pairs, "mask {mask:b} words {words:?}");
            }
        }
    }

    #[test]
    fn report_lists_groups_and_pairs() {
        let h = group_words();
        let group = CommutingGroup {
            terms: vec![0, 1, 2],
        };
        let plan = plan_group(&h, &group, 3).unwrap();
        let report = plan_report(&h, &[plan]);
        assert!(report.contains("group 0: terms 0 1 2"));
        assert!(report.contains("sign_pairs: (0,1) (1,2)"));
        assert!(report.contains("flip: 0"));
    }
}
