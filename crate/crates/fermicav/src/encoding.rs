//! Fermionic creation/annihilation and Majorana operators as Pauli sums.
//!
//! Qubit |0> stores an empty mode and |1> an occupied one. Under the
//! Jordan-Wigner map a lowering operator is the raising letter on its own
//! qubit times a Z string over every earlier position in the chosen linear
//! ordering. The Bravyi-Kitaev map stores Fenwick-tree partial sums instead;
//! we realize it by conjugating the Jordan-Wigner form with the tree's CNOT
//! encoder circuit, which keeps every operator a two-term sum and fixes all
//! signs mechanically.

use crate::dense::CMat;
use crate::error::{Error, Result};
use crate::pauli::{Letter, PauliSum, PauliTerm, PauliWord};
use num_complex::Complex64;
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

/// Bijection between fermionic mode labels and positions on the qubit line.
///
/// Strings always run over *positions*, so the same Hamiltonian can be laid
/// out along a snake, a row-major raster, or any other order without touching
/// the encoders.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModeOrdering {
    to_pos: Vec<usize>,
    to_mode: Vec<usize>,
}

impl ModeOrdering {
    pub fn identity(n_modes: usize) -> ModeOrdering {
        ModeOrdering {
            to_pos: (0..n_modes).collect(),
            to_mode: (0..n_modes).collect(),
        }
    }

    /// `to_pos[mode]` = line position; must be a permutation of 0..n.
    pub fn new(to_pos: Vec<usize>) -> Result<ModeOrdering> {
        let n = to_pos.len();
        let mut to_mode = vec![usize::MAX; n];
        for (mode, &p) in to_pos.iter().enumerate() {
            if p >= n || to_mode[p] != usize::MAX {
                return Err(Error::InvalidArg(format!(
                    "mode ordering is not a permutation: position {p} (mode {mode})"
                )));
            }
            to_mode[p] = mode;
        }
        Ok(ModeOrdering { to_pos, to_mode })
    }

    pub fn n_modes(&self) -> usize {
        self.to_pos.len()
    }

    pub fn position(&self, mode: usize) -> usize {
        self.to_pos[mode]
    }

    pub fn mode_at(&self, pos: usize) -> usize {
        self.to_mode[pos]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EncodingKind {
    Jw,
    Bk,
}

/// An encoding scheme plus the mode-to-line layout it acts through.
#[derive(Clone, Debug)]
pub struct Encoding {
    pub kind: EncodingKind,
    pub ordering: ModeOrdering,
}

impl Encoding {
    pub fn jw(n_modes: usize) -> Encoding {
        Encoding {
            kind: EncodingKind::Jw,
            ordering: ModeOrdering::identity(n_modes),
        }
    }

    pub fn bk(n_modes: usize) -> Encoding {
        Encoding {
            kind: EncodingKind::Bk,
            ordering: ModeOrdering::identity(n_modes),
        }
    }

    pub fn with_ordering(kind: EncodingKind, ordering: ModeOrdering) -> Encoding {
        Encoding { kind, ordering }
    }

    pub fn n_modes(&self) -> usize {
        self.ordering.n_modes()
    }
}

/// Product of creation/annihilation factors, applied right to left like the
/// operator expression it denotes. `dagger = true` marks a creator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FermionOp {
    pub factors: Vec<(usize, bool)>,
}

impl FermionOp {
    pub fn encode(&self, enc: &Encoding) -> Result<PauliSum> {
        let n = enc.n_modes();
        let mut acc = PauliSum::from_terms(
            n,
            vec![PauliTerm::new(Complex64::new(1.0, 0.0), PauliWord::identity(n))],
        )?;
        for &(mode, dagger) in &self.factors {
            acc = acc.mul(&encode_mode_op(mode, dagger, enc)?);
        }
        Ok(acc.simplify())
    }
}

/// One nonzero entry of the quartic tensor, standing for v c_i† c_j† c_k c_l.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quartic {
    pub i: usize,
    pub j: usize,
    pub k: usize,
    pub l: usize,
    pub v: Complex64,
}

/// Quadratic-plus-quartic fermionic Hamiltonian
/// H = sum_ij kappa_ij c_i† c_j + sum V_ijkl c_i† c_j† c_k c_l.
///
/// The quartic list is taken verbatim in that operator order; callers wanting
/// a Hermitian H must supply a conjugation-closed list.
#[derive(Clone, Debug)]
pub struct FermionHamiltonian {
    n_modes: usize,
    hopping: CMat,
    interaction: Vec<Quartic>,
}

impl FermionHamiltonian {
    pub fn new(n_modes: usize, hopping: CMat, interaction: Vec<Quartic>) -> Result<FermionHamiltonian> {
        if hopping.shape() != [n_modes, n_modes] {
            return Err(Error::InvalidArg(format!(
                "hopping matrix shape {:?} does not match {n_modes} modes",
                hopping.shape()
            )));
        }
        let mut dev = 0.0f64;
        for i in 0..n_modes {
            for j in 0..n_modes {
                dev = dev.max((hopping[(i, j)] - hopping[(j, i)].conj()).norm());
            }
        }
        if dev > 1e-12 {
            return Err(Error::NonHermitian {
                what: "hopping matrix",
                detail: format!("max |k_ij - conj(k_ji)| = {dev:.3e}"),
            });
        }
        for q in &interaction {
            for m in [q.i, q.j, q.k, q.l] {
                if m >= n_modes {
                    return Err(Error::ModeOutOfRange { mode: m, n_modes });
                }
            }
            if !q.v.re.is_finite() || !q.v.im.is_finite() {
                return Err(Error::InvalidArg("non-finite interaction entry".into()));
            }
        }
        Ok(FermionHamiltonian {
            n_modes,
            hopping,
            interaction,
        })
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn hopping(&self) -> &CMat {
        &self.hopping
    }

    pub fn interaction(&self) -> &[Quartic] {
        &self.interaction
    }
}

/// CNOT list (control, target) in application order for the Fenwick encoder
/// on `n` line positions. After running it, position r of each subtree range
/// holds the occupancy parity of that whole range.
pub fn fenwick_cnots(n: usize) -> Arc<Vec<(usize, usize)>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Vec<(usize, usize)>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(hit) = cache.lock().unwrap().get(&n) {
        return hit.clone();
    }
    fn rec(l: usize, r: usize, out: &mut Vec<(usize, usize)>) {
        if l >= r {
            return;
        }
        let m = (l + r) / 2;
        rec(l, m, out);
        rec(m + 1, r, out);
        out.push((m, r));
    }
    let mut out = Vec::new();
    if n > 0 {
        rec(0, n - 1, &mut out);
    }
    let arc = Arc::new(out);
    cache.lock().unwrap().insert(n, arc.clone());
    arc
}

/// Heisenberg update of a word under CNOT(control -> target): X spreads
/// control to target, Z spreads target to control, and the sign flips exactly
/// when the XZ-part on (control, target) maps through the XZ = -YY identity.
fn conjugate_cnot(w: &PauliWord, control: usize, target: usize) -> (f64, PauliWord) {
    let (xc, zc) = letter_bits(w.letter(control));
    let (xt, zt) = letter_bits(w.letter(target));
    let sign = if xc && zt && (xt == zc) { -1.0 } else { 1.0 };
    let mut out = w.clone();
    out.set(control, bits_letter(xc, zc ^ zt));
    out.set(target, bits_letter(xt ^ xc, zt));
    (sign, out)
}

fn letter_bits(l: Letter) -> (bool, bool) {
    match l {
        Letter::I => (false, false),
        Letter::X => (true, false),
        Letter::Y => (true, true),
        Letter::Z => (false, true),
    }
}

fn bits_letter(x: bool, z: bool) -> Letter {
    match (x, z) {
        (false, false) => Letter::I,
        (true, false) => Letter::X,
        (true, true) => Letter::Y,
        (false, true) => Letter::Z,
    }
}

/// Push one encoded term through the whole Fenwick encoder, E term E^dag.
fn through_fenwick(term: PauliTerm, cnots: &[(usize, usize)]) -> PauliTerm {
    let mut coeff = term.coeff;
    let mut word = term.word;
    for &(c, t) in cnots {
        let (s, w) = conjugate_cnot(&word, c, t);
        coeff *= s;
        word = w;
    }
    PauliTerm::new(coeff, word)
}

/// Lowering (dagger = false) or raising (true) operator on mode `j` as a
/// two-term Pauli sum with coefficients drawn from {±1/2, ±i/2}.
pub fn encode_mode_op(j: usize, dagger: bool, enc: &Encoding) -> Result<PauliSum> {
    let n = enc.n_modes();
    if j >= n {
        return Err(Error::ModeOutOfRange { mode: j, n_modes: n });
    }
    let pos = enc.ordering.position(j);
    let mut xw = PauliWord::identity(n);
    let mut yw = PauliWord::identity(n);
    for p in 0..pos {
        xw.set(p, Letter::Z);
        yw.set(p, Letter::Z);
    }
    xw.set(pos, Letter::X);
    yw.set(pos, Letter::Y);
    // Lowering maps |1> to |0>, i.e. (X + iY)/2 on the |0>=empty convention.
    let y_coeff = Complex64::new(0.0, if dagger { -0.5 } else { 0.5 });
    let mut terms = vec![
        PauliTerm::new(Complex64::new(0.5, 0.0), xw),
        PauliTerm::new(y_coeff, yw),
    ];
    if enc.kind == EncodingKind::Bk {
        let cnots = fenwick_cnots(n);
        terms = terms
            .into_iter()
            .map(|t| through_fenwick(t, &cnots))
            .collect();
    }
    PauliSum::from_terms(n, terms)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MajoranaKind {
    /// q_j = c_j + c_j†
    Q,
    /// p_j = i(c_j - c_j†)
    P,
}

/// Majorana operator as a single Hermitian unit-coefficient term.
pub fn encode_majorana(j: usize, kind: MajoranaKind, enc: &Encoding) -> Result<PauliSum> {
    let n = enc.n_modes();
    if j >= n {
        return Err(Error::ModeOutOfRange { mode: j, n_modes: n });
    }
    let pos = enc.ordering.position(j);
    let mut w = PauliWord::identity(n);
    for p in 0..pos {
        w.set(p, Letter::Z);
    }
    // q keeps the X part; p = i(c - c†) = i(iY...) = -Y times the string.
    let (letter, mut coeff) = match kind {
        MajoranaKind::Q => (Letter::X, Complex64::new(1.0, 0.0)),
        MajoranaKind::P => (Letter::Y, Complex64::new(-1.0, 0.0)),
    };
    w.set(pos, letter);
    if enc.kind == EncodingKind::Bk {
        let t = through_fenwick(PauliTerm::new(coeff, w), &fenwick_cnots(n));
        coeff = t.coeff;
        w = t.word;
    }
    PauliSum::from_terms(n, vec![PauliTerm::new(coeff, w)])
}

/// Encode the full Hamiltonian and simplify. Hermitian whenever the quartic
/// list is conjugation-closed (the quadratic part always is).
pub fn encode_hamiltonian(h: &FermionHamiltonian, enc: &Encoding) -> Result<PauliSum> {
    let n = h.n_modes();
    if enc.n_modes() != n {
        return Err(Error::QubitMismatch {
            expected: n,
            got: enc.n_modes(),
        });
    }
    let mut acc = PauliSum::zero(n);
    for i in 0..n {
        for j in 0..n {
            let k = h.hopping[(i, j)];
            if k == Complex64::new(0.0, 0.0) {
                continue;
            }
            let term = encode_mode_op(i, true, enc)?
                .mul(&encode_mode_op(j, false, enc)?)
                .scale(k);
            acc = acc.add(&term);
        }
    }
    for q in h.interaction() {
        let op = FermionOp {
            factors: vec![(q.i, true), (q.j, true), (q.k, false), (q.l, false)],
        };
        acc = acc.add(&op.encode(enc)?.scale(q.v));
    }
    Ok(acc.simplify())
}

/// Canonical anticommutation self-test over dense matrices.
#[derive(Clone, Copy, Debug)]
pub struct CarReport {
    pub n_modes: usize,
    /// max over i, j of |{c_i, c_j†} - delta_ij I|
    pub max_dev_mixed: f64,
    /// max over i, j of |{c_i, c_j}|
    pub max_dev_same: f64,
}

impl CarReport {
    pub fn max_dev(&self) -> f64 {
        self.max_dev_mixed.max(self.max_dev_same)
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.max_dev() <= tol
    }
}

pub fn verify_car(enc: &Encoding) -> Result<CarReport> {
    let n = enc.n_modes();
    let lower: Vec<CMat> = (0..n)
        .map(|j| encode_mode_op(j, false, enc)?.to_matrix())
        .collect::<Result<_>>()?;
    let raise: Vec<CMat> = (0..n)
        .map(|j| encode_mode_op(j, true, enc)?.to_matrix())
        .collect::<Result<_>>()?;
    let eye = crate::dense::identity(1 << n);
    let mut mixed = 0.0f64;
    let mut same = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let anti = lower[i].dot(&raise[j]) + raise[j].dot(&lower[i]);
            let expect = if i == j { &eye } else { &CMat::zeros((1 << n, 1 << n)) };
            mixed = mixed.max(crate::dense::max_abs_diff(&anti, expect));
            let anti2 = lower[i].dot(&lower[j]) + lower[j].dot(&lower[i]);
            same = same.max(crate::dense::max_abs(&anti2));
        }
    }
    Ok(CarReport {
        n_modes: n,
        max_dev_mixed: mixed,
        max_dev_same: same,
    })
}
