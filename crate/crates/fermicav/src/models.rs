//! Benchmark Hamiltonians and ingestion.
//!
//! The 2D spinful Hubbard lattice is laid out as a snake: each spin species
//! of each lattice row occupies one contiguous stretch of the qubit line
//! (up species of row y at snake row 2y, down species at 2y+1), alternating
//! direction per lattice row. Horizontal hops and the on-site density product
//! then encode with weight <= 2, while vertical hops carry the inter-row
//! Z string that the string-capable backends exist to absorb; the direction
//! flip makes those strings nest within a row pair instead of sliding.

use crate::encoding::{
    encode_hamiltonian, encode_mode_op, Encoding, EncodingKind, FermionHamiltonian, ModeOrdering,
    Quartic,
};
use crate::error::{Error, Result};
use crate::pauli::{Letter, PauliSum, PauliWord};
use crate::scheduler::{partition_commuting, CommutingGroup, PartitionStrategy};
use ndarray::Array2;
use num_complex::Complex64;
use std::path::Path;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HubbardSpec {
    pub nx: usize,
    pub ny: usize,
    pub kappa: f64,
    pub u: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum TermClass {
    Onsite,
    Horizontal,
    VerticalEven,
    VerticalOdd,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Spin {
    Up,
    Down,
}

#[derive(Clone, Debug, PartialEq)]
pub enum HubbardTermKind {
    /// U n_up n_down on one site.
    Onsite { x: usize, y: usize },
    /// -kappa (c_from† c_to + H.c.)
    Hop { from_mode: usize, to_mode: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct HubbardTerm {
    pub class: TermClass,
    pub kind: HubbardTermKind,
}

#[derive(Clone, Debug)]
pub struct HubbardModel {
    pub spec: HubbardSpec,
    pub hamiltonian: FermionHamiltonian,
    pub ordering: ModeOrdering,
    pub terms: Vec<HubbardTerm>,
}

pub fn mode_index(spec: &HubbardSpec, x: usize, y: usize, spin: Spin) -> usize {
    (y * spec.nx + x) * 2 + if spin == Spin::Up { 0 } else { 1 }
}

/// Line position of a mode: snake row 2y+spin, direction alternating per
/// lattice row y. Same-species rows of adjacent y then point opposite ways,
/// so the vertical-hop strings of one row pair nest into one another and the
/// even/odd row pairs carry their strings on opposite sides of the block.
pub fn snake_ordering(spec: &HubbardSpec) -> ModeOrdering {
    let n = 2 * spec.nx * spec.ny;
    let mut to_pos = vec![0usize; n];
    for y in 0..spec.ny {
        for x in 0..spec.nx {
            for spin in [Spin::Up, Spin::Down] {
                let r = 2 * y + if spin == Spin::Up { 0 } else { 1 };
                let col = if y % 2 == 0 { x } else { spec.nx - 1 - x };
                to_pos[mode_index(spec, x, y, spin)] = r * spec.nx + col;
            }
        }
    }
    ModeOrdering::new(to_pos).expect("snake layout is a permutation")
}

pub fn build_hubbard(spec: &HubbardSpec) -> Result<HubbardModel> {
    if spec.nx < 1 || spec.ny < 1 {
        return Err(Error::InvalidArg("lattice extents must be >= 1".into()));
    }
    let n = 2 * spec.nx * spec.ny;
    let mut kappa = Array2::zeros((n, n));
    let mut quartics = Vec::new();
    let mut terms = Vec::new();
    let k = Complex64::new(-spec.kappa, 0.0);
    let mut add_hop = |kappa: &mut Array2<Complex64>, a: usize, b: usize, class: TermClass| {
        kappa[(a, b)] += k;
        kappa[(b, a)] += k;
        terms.push(HubbardTerm {
            class,
            kind: HubbardTermKind::Hop {
                from_mode: a,
                to_mode: b,
            },
        });
    };
    for y in 0..spec.ny {
        for x in 0..spec.nx {
            for spin in [Spin::Up, Spin::Down] {
                if x + 1 < spec.nx {
                    add_hop(
                        &mut kappa,
                        mode_index(spec, x, y, spin),
                        mode_index(spec, x + 1, y, spin),
                        TermClass::Horizontal,
                    );
                }
                if y + 1 < spec.ny {
                    let class = if y % 2 == 0 {
                        TermClass::VerticalEven
                    } else {
                        TermClass::VerticalOdd
                    };
                    add_hop(
                        &mut kappa,
                        mode_index(spec, x, y, spin),
                        mode_index(spec, x, y + 1, spin),
                        class,
                    );
                }
            }
        }
    }
    for y in 0..spec.ny {
        for x in 0..spec.nx {
            let up = mode_index(spec, x, y, Spin::Up);
            let dn = mode_index(spec, x, y, Spin::Down);
            quartics.push(Quartic {
                i: up,
                j: dn,
                k: dn,
                l: up,
                v: Complex64::new(spec.u, 0.0),
            });
            terms.push(HubbardTerm {
                class: TermClass::Onsite,
                kind: HubbardTermKind::Onsite { x, y },
            });
        }
    }
    terms.sort_by_key(|t| t.class);
    Ok(HubbardModel {
        spec: *spec,
        hamiltonian: FermionHamiltonian::new(n, kappa, quartics)?,
        ordering: snake_ordering(spec),
        terms,
    })
}

impl HubbardModel {
    pub fn n_modes(&self) -> usize {
        self.hamiltonian.n_modes()
    }

    pub fn encoding(&self, kind: EncodingKind) -> Encoding {
        Encoding::with_ordering(kind, self.ordering.clone())
    }

    /// One Hermitian term of the Trotter decomposition as a Pauli sum.
    pub fn encode_term(&self, idx: usize, enc: &Encoding) -> Result<PauliSum> {
        let t = &self.terms[idx];
        match &t.kind {
            HubbardTermKind::Onsite { x, y } => {
                let up = mode_index(&self.spec, *x, *y, Spin::Up);
                let dn = mode_index(&self.spec, *x, *y, Spin::Down);
                let n_up = encode_mode_op(up, true, enc)?.mul(&encode_mode_op(up, false, enc)?);
                let n_dn = encode_mode_op(dn, true, enc)?.mul(&encode_mode_op(dn, false, enc)?);
                Ok(n_up
                    .mul(&n_dn)
                    .scale(Complex64::new(self.spec.u, 0.0))
                    .simplify())
            }
            HubbardTermKind::Hop { from_mode, to_mode } => {
                let fwd = encode_mode_op(*from_mode, true, enc)?
                    .mul(&encode_mode_op(*to_mode, false, enc)?);
                let bwd = encode_mode_op(*to_mode, true, enc)?
                    .mul(&encode_mode_op(*from_mode, false, enc)?);
                Ok(fwd
                    .add(&bwd)
                    .scale(Complex64::new(-self.spec.kappa, 0.0))
                    .simplify())
            }
        }
    }

    pub fn encode_full(&self, enc: &Encoding) -> Result<PauliSum> {
        encode_hamiltonian(&self.hamiltonian, enc)
    }

    /// Letter-sorted waves of the encoded sum: diagonal on-site words, the
    /// horizontal XX and YY bonds, and the X- and Y-type vertical strings.
    /// On the snake line every wave commutes internally: bond or endpoint
    /// overlaps carry the same letter, and a string endpoint landing in
    /// another string's Z interior always does so twice. The model therefore
    /// splits into at most five commuting groups whatever the lattice size;
    /// the parallel backend's flat depth rests on that. `h` must be the
    /// simplified output of `encode_full` under the same line-ordered
    /// encoding.
    pub fn wave_groups(&self, enc: &Encoding, h: &PauliSum) -> Result<Vec<CommutingGroup>> {
        let mut bucket_of: std::collections::HashMap<PauliWord, usize> =
            std::collections::HashMap::new();
        for (idx, t) in self.terms.iter().enumerate() {
            let s = self.encode_term(idx, enc)?;
            for pt in s.terms() {
                let has_y = pt.word.letters().any(|l| l == Letter::Y);
                let b = match t.class {
                    TermClass::Onsite => 0,
                    TermClass::Horizontal => 1 + usize::from(has_y),
                    TermClass::VerticalEven | TermClass::VerticalOdd => 3 + usize::from(has_y),
                };
                if let Some(prev) = bucket_of.insert(pt.word.clone(), b) {
                    if prev != b {
                        return Err(Error::InvalidArg(format!(
                            "word {} appears in two term classes",
                            pt.word
                        )));
                    }
                }
            }
        }
        let mut waves: [Vec<usize>; 5] = Default::default();
        for (i, t) in h.terms().iter().enumerate() {
            match bucket_of.get(&t.word) {
                Some(&b) => waves[b].push(i),
                None => {
                    return Err(Error::InvalidArg(format!(
                        "term {} does not come from this model under that encoding",
                        t.word
                    )))
                }
            }
        }
        Ok(waves
            .into_iter()
            .filter(|w| !w.is_empty())
            .map(|terms| CommutingGroup { terms })
            .collect())
    }

    /// Total number operator of one spin species.
    pub fn species_number(&self, spin: Spin, enc: &Encoding) -> Result<PauliSum> {
        let mut acc = PauliSum::zero(self.n_modes());
        for y in 0..self.spec.ny {
            for x in 0..self.spec.nx {
                let m = mode_index(&self.spec, x, y, spin);
                let n_m = encode_mode_op(m, true, enc)?.mul(&encode_mode_op(m, false, enc)?);
                acc = acc.add(&n_m);
            }
        }
        Ok(acc.simplify())
    }
}

/// Open chain of spinless modes, H = kappa sum (c_i^dag c_{i+1} + h.c.),
/// no interaction; positive kappa puts the dimer ground state on the
/// antisymmetric orbital.
pub fn build_spinless_chain(n_sites: usize, kappa: f64) -> Result<(FermionHamiltonian, ModeOrdering)> {
    if n_sites < 1 {
        return Err(Error::InvalidArg("chain needs at least one site".into()));
    }
    let mut mat = Array2::zeros((n_sites, n_sites));
    for i in 0..n_sites.saturating_sub(1) {
        mat[(i, i + 1)] = Complex64::new(kappa, 0.0);
        mat[(i + 1, i)] = Complex64::new(kappa, 0.0);
    }
    Ok((
        FermionHamiltonian::new(n_sites, mat, vec![])?,
        ModeOrdering::identity(n_sites),
    ))
}

/// Generic quadratic-plus-quartic Hamiltonian; validates Hermiticity of the
/// quadratic part and index ranges of the quartic entries.
pub fn build_coulomb(
    n_modes: usize,
    hopping: Array2<Complex64>,
    interaction: Vec<Quartic>,
) -> Result<FermionHamiltonian> {
    FermionHamiltonian::new(n_modes, hopping, interaction)
}

/// Strict reader for the textual Hamiltonian format: '#' comments, optional
/// `nqubits <n>` header, then `<re> <im> <word>` lines, qubit 0 leftmost.
pub fn parse_pauli_hamiltonian(text: &str) -> Result<PauliSum> {
    let mut n_qubits: Option<usize> = None;
    let mut terms = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if n_qubits.is_none() && terms.is_empty() && fields[0] == "nqubits" {
            if fields.len() != 2 {
                return Err(Error::Parse {
                    line: line_no,
                    msg: "nqubits header takes exactly one value".into(),
                });
            }
            let n: usize = fields[1].parse().map_err(|_| Error::Parse {
                line: line_no,
                msg: format!("invalid qubit count {:?}", fields[1]),
            })?;
            if n == 0 {
                return Err(Error::Parse {
                    line: line_no,
                    msg: "qubit count must be positive".into(),
                });
            }
            n_qubits = Some(n);
            continue;
        }
        if fields.len() != 3 {
            return Err(Error::Parse {
                line: line_no,
                msg: format!("expected `<re> <im> <word>`, got {} fields", fields.len()),
            });
        }
        let re: f64 = fields[0].parse().map_err(|_| Error::Parse {
            line: line_no,
            msg: format!("invalid real part {:?}", fields[0]),
        })?;
        let im: f64 = fields[1].parse().map_err(|_| Error::Parse {
            line: line_no,
            msg: format!("invalid imaginary part {:?}", fields[1]),
        })?;
        if !re.is_finite() || !im.is_finite() {
            return Err(Error::Parse {
                line: line_no,
                msg: "coefficients must be finite".into(),
            });
        }
        let word: crate::pauli::PauliWord = fields[2].parse().map_err(|e| match e {
            Error::Parse { msg, .. } => Error::Parse { line: line_no, msg },
            other => other,
        })?;
        match n_qubits {
            None => n_qubits = Some(word.n_qubits()),
            Some(n) if n != word.n_qubits() => {
                return Err(Error::Parse {
                    line: line_no,
                    msg: format!(
                        "word length {} does not match register of {n} qubits",
                        word.n_qubits()
                    ),
                });
            }
            _ => {}
        }
        terms.push(crate::pauli::PauliTerm::new(Complex64::new(re, im), word));
    }
    let n = n_qubits.ok_or(Error::Parse {
        line: 0,
        msg: "no terms and no nqubits header".into(),
    })?;
    Ok(PauliSum::from_terms(n, terms)?.simplify())
}

pub fn load_pauli_hamiltonian(path: &Path) -> Result<PauliSum> {
    parse_pauli_hamiltonian(&std::fs::read_to_string(path)?)
}

/// Grouping statistics of a simplified Pauli sum.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HamiltonianStats {
    pub n_terms: usize,
    pub n_groups: usize,
    pub terms_per_group: f64,
    pub mean_weight: f64,
    /// Mean over (qubit, group) cells of the number of terms in that group
    /// touching that qubit.
    pub qubit_participation: f64,
}

pub fn stats(h: &PauliSum) -> Result<HamiltonianStats> {
    let groups = partition_commuting(h, PartitionStrategy::GreedyLargestDegreeFirst)?;
    let n_terms = h.len();
    let n_groups = groups.len();
    let total_weight: usize = h.terms().iter().map(|t| t.word.weight()).sum();
    let denom = (h.n_qubits() * n_groups.max(1)) as f64;
    Ok(HamiltonianStats {
        n_terms,
        n_groups,
        terms_per_group: if n_groups == 0 {
            0.0
        } else {
            n_terms as f64 / n_groups as f64
        },
        mean_weight: h.mean_weight(),
        qubit_participation: total_weight as f64 / denom,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense;
    use crate::pauli::{Letter, PauliWord};

    fn spec22() -> HubbardSpec {
        HubbardSpec {
            nx: 2,
            ny: 2,
            kappa: 0.1,
            u: 1.0,
        }
    }

    #[test]
    fn snake_positions_for_2x2() {
        let spec = spec22();
        let ord = snake_ordering(&spec);
        let expect = [
            ((0, 0, Spin::Up), 0),
            ((1, 0, Spin::Up), 1),
            ((0, 0, Spin::Down), 2),
            ((1, 0, Spin::Down), 3),
            ((1, 1, Spin::Up), 4),
            ((0, 1, Spin::Up), 5),
            ((1, 1, Spin::Down), 6),
            ((0, 1, Spin::Down), 7),
        ];
        for ((x, y, s), pos) in expect {
            assert_eq!(ord.position(mode_index(&spec, x, y, s)), pos, "{x},{y}");
        }
    }

    #[test]
    fn spinless_two_site_chain_has_one_stringless_hop() {
        let (h, ord) = build_spinless_chain(2, 0.7).unwrap();
        let enc = Encoding::with_ordering(EncodingKind::Jw, ord);
        let s = encode_hamiltonian(&h, &enc).unwrap();
        assert_eq!(s.len(), 2);
        for t in s.terms() {
            assert_eq!(t.word.weight(), 2);
            assert!((t.coeff.re - 0.35).abs() < 1e-15);
            assert!(!t.word.letters().any(|l| l == Letter::Z));
        }
    }

    #[test]
    fn hubbard_2x2_term_census() {
        let model = build_hubbard(&spec22()).unwrap();
        assert_eq!(model.n_modes(), 8);
        let count = |c: TermClass| model.terms.iter().filter(|t| t.class == c).count();
        assert_eq!(count(TermClass::Onsite), 4);
        assert_eq!(count(TermClass::Horizontal), 4);
        assert_eq!(count(TermClass::VerticalEven), 4);
        assert_eq!(count(TermClass::VerticalOdd), 0);
    }

    #[test]
    fn hubbard_3x3_vertical_parity() {
        let model = build_hubbard(&HubbardSpec {
            nx: 3,
            ny: 3,
            kappa: 1.0,
            u: 2.0,
        })
        .unwrap();
        let count = |c: TermClass| model.terms.iter().filter(|t| t.class == c).count();
        // Rows (0,1) are even, (1,2) odd; 3 columns x 2 species each.
        assert_eq!(count(TermClass::VerticalEven), 6);
        assert_eq!(count(TermClass::VerticalOdd), 6);
    }

    #[test]
    fn encoded_term_weights_follow_the_layout() {
        let model = build_hubbard(&spec22()).unwrap();
        let enc = model.encoding(EncodingKind::Jw);
        for (i, t) in model.terms.iter().enumerate() {
            let s = model.encode_term(i, &enc).unwrap();
            match t.class {
                TermClass::Onsite | TermClass::Horizontal => {
                    for term in s.terms() {
                        assert!(term.word.weight() <= 2, "{:?}: {}", t.class, term.word);
                    }
                }
                TermClass::VerticalEven | TermClass::VerticalOdd => {
                    for term in s.terms() {
                        assert!(term.word.weight() > 2);
                        assert!(term.word.letters().any(|l| l == Letter::Z));
                    }
                }
            }
        }
    }

    #[test]
    fn terms_sum_to_full_hamiltonian() {
        let model = build_hubbard(&spec22()).unwrap();
        for kind in [EncodingKind::Jw, EncodingKind::Bk] {
            let enc = model.encoding(kind);
            let mut acc = PauliSum::zero(model.n_modes());
            for i in 0..model.terms.len() {
                acc = acc.add(&model.encode_term(i, &enc).unwrap());
            }
            let full = model.encode_full(&enc).unwrap();
            let diff = dense::max_abs_diff(
                &acc.simplify().to_matrix().unwrap(),
                &full.to_matrix().unwrap(),
            );
            assert!(diff < 1e-12, "{kind:?}: {diff}");
        }
    }

    #[test]
    fn hubbard_conserves_species_number() {
        let model = build_hubbard(&spec22()).unwrap();
        let enc = model.encoding(EncodingKind::Jw);
        let h = model.encode_full(&enc).unwrap().to_matrix().unwrap();
        for spin in [Spin::Up, Spin::Down] {
            let n_s = model
                .species_number(spin, &enc)
                .unwrap()
                .to_matrix()
                .unwrap();
            let comm = h.dot(&n_s) - n_s.dot(&h);
            assert!(dense::max_abs(&comm) < 1e-10);
        }
    }

    #[test]
    fn onsite_encoding_is_the_density_product() {
        let model = build_hubbard(&spec22()).unwrap();
        let enc = model.encoding(EncodingKind::Jw);
        let idx = model
            .terms
            .iter()
            .position(|t| matches!(t.kind, HubbardTermKind::Onsite { x: 0, y: 0 }))
            .unwrap();
        let s = model.encode_term(idx, &enc).unwrap();
        // U/4 (I - Z_up - Z_dn + Z_up Z_dn) on positions 0 and 2.
        assert_eq!(s.len(), 4);
        for t in s.terms() {
            assert!((t.coeff.re.abs() - 0.25).abs() < 1e-15);
            assert_eq!(t.coeff.im, 0.0);
            assert!(t.word.support().iter().all(|&q| q == 0 || q == 2));
        }
    }

    #[test]
    fn coulomb_validates_inputs() {
        let mut bad = Array2::zeros((2, 2));
        bad[(0, 1)] = Complex64::new(0.0, 1.0);
        bad[(1, 0)] = Complex64::new(0.0, 1.0);
        assert!(build_coulomb(2, bad, vec![]).is_err());

        let mut diag = Array2::zeros((2, 2));
        diag[(0, 0)] = Complex64::new(0.5, 0.0);
        diag[(1, 1)] = Complex64::new(0.25, 0.0);
        let h = build_coulomb(2, diag, vec![]).unwrap();
        let s = encode_hamiltonian(&h, &Encoding::jw(2)).unwrap();
        for t in s.terms() {
            assert!(t.word.weight() <= 1);
            assert!(!t.word.letters().any(|l| l == Letter::X || l == Letter::Y));
        }
    }

    #[test]
    fn parse_minimal_file() {
        let s = parse_pauli_hamiltonian("1.0 0.0 ZZ\n").unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s.n_qubits(), 2);
        assert_eq!(s.terms()[0].word, "ZZ".parse::<PauliWord>().unwrap());
    }

    #[test]
    fn parse_merges_duplicates_and_reads_header() {
        let text = "# comment\nnqubits 3\n0.5 0.0 XYZ # inline\n0.25 0.0 XYZ\n";
        let s = parse_pauli_hamiltonian(text).unwrap();
        assert_eq!(s.n_qubits(), 3);
        assert_eq!(s.len(), 1);
        assert!((s.terms()[0].coeff.re - 0.75).abs() < 1e-15);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let cases = [
            ("1.0 0.0 ZZ\nbroken line\n", 2),
            ("1.0 0.0 ZZ\n1.0 0.0 ZZZ\n", 2),
            ("nqubits 2\n1.0 zero ZZ\n", 2),
            ("1.0 0.0 Q\n", 1),
        ];
        for (text, line) in cases {
            match parse_pauli_hamiltonian(text) {
                Err(Error::Parse { line: l, .. }) => assert_eq!(l, line, "{text:?}"),
                other => panic!("expected parse error for {text:?}, got {other:?}"),
            }
        }
        assert!(parse_pauli_hamiltonian("# nothing\n").is_err());
    }

    #[test]
    fn stats_on_small_sums() {
        let s = parse_pauli_hamiltonian("1.0 0.0 ZZ\n").unwrap();
        let st = stats(&s).unwrap();
        assert_eq!(st.n_terms, 1);
        assert_eq!(st.n_groups, 1);
        assert_eq!(st.mean_weight, 2.0);
        assert_eq!(st.qubit_participation, 1.0);

        let s = parse_pauli_hamiltonian("1.0 0.0 XI\n1.0 0.0 IX\n1.0 0.0 ZZ\n").unwrap();
        assert_eq!(stats(&s).unwrap().n_groups, 2);
    }

    #[test]
    fn wave_groups_form_a_commuting_partition() {
        // Five waves at every size: an X-string of one row pair and of the
        // next share only their corner wire, with the same letter on it.
        for (nx, ny, expect) in [(2usize, 2usize, 5usize), (3, 3, 5), (4, 4, 5)] {
            let model = build_hubbard(&HubbardSpec { nx, ny, kappa: 0.7, u: 1.3 }).unwrap();
            let enc = model.encoding(EncodingKind::Jw);
            let h = model.encode_full(&enc).unwrap();
            let groups = model.wave_groups(&enc, &h).unwrap();
            assert_eq!(groups.len(), expect, "{nx}x{ny}");
            let mut seen = vec![false; h.len()];
            for g in &groups {
                for (i, &a) in g.terms.iter().enumerate() {
                    assert!(!std::mem::replace(&mut seen[a], true), "term {a} repeated");
                    for &b in &g.terms[i + 1..] {
                        assert!(
                            h.terms()[a].word.commutes(&h.terms()[b].word),
                            "{} vs {}",
                            h.terms()[a].word,
                            h.terms()[b].word
                        );
                    }
                }
            }
            assert!(seen.iter().all(|&s| s), "partition must cover the sum");
        }
    }

    #[test]
    fn hubbard_2x2_groups_within_budget() {
        let model = build_hubbard(&spec22()).unwrap();
        let enc = model.encoding(EncodingKind::Jw);
        let full = model.encode_full(&enc).unwrap();
        let st = stats(&full).unwrap();
        assert!(st.n_groups <= 6, "{st:?}");
        assert_eq!(st.n_terms, 29);
    }
}
