//! Pauli-word algebra on a fixed qubit register.
//!
//! Words are stored symplectically: per qubit an (x, z) bit pair with
//! I=(0,0), X=(1,0), Y=(1,1), Z=(0,1), packed into u64 blocks. Products track
//! the fourth-root-of-unity phase exactly; commutation is the symplectic-form
//! parity. Text form writes qubit 0 leftmost, and all dense matrices use the
//! matching convention (qubit 0 = most significant index bit).

use crate::dense::CMat;
use crate::error::{Error, Result};
use num_complex::Complex64;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

/// Largest register the dense oracles will materialize.
pub const ORACLE_CAP: usize = 12;

/// i^k for k in 0..4, the only phases Pauli products generate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Phase(pub u8);

impl Phase {
    pub const ONE: Phase = Phase(0);

    pub fn as_complex(self) -> Complex64 {
        match self.0 & 3 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        }
    }

    fn mul(self, other: Phase) -> Phase {
        Phase((self.0 + other.0) & 3)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Letter {
    I,
    X,
    Y,
    Z,
}

impl Letter {
    fn bits(self) -> (bool, bool) {
        match self {
            Letter::I => (false, false),
            Letter::X => (true, false),
            Letter::Y => (true, true),
            Letter::Z => (false, true),
        }
    }

    fn from_bits(x: bool, z: bool) -> Letter {
        match (x, z) {
            (false, false) => Letter::I,
            (true, false) => Letter::X,
            (true, true) => Letter::Y,
            (false, true) => Letter::Z,
        }
    }

    pub fn char(self) -> char {
        match self {
            Letter::I => 'I',
            Letter::X => 'X',
            Letter::Y => 'Y',
            Letter::Z => 'Z',
        }
    }
}

/// Tensor product of single-qubit Paulis with unit coefficient.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliWord {
    n: usize,
    x: Vec<u64>,
    z: Vec<u64>,
}

fn blocks(n: usize) -> usize {
    n.div_ceil(64)
}

impl PauliWord {
    pub fn identity(n: usize) -> PauliWord {
        PauliWord {
            n,
            x: vec![0; blocks(n)],
            z: vec![0; blocks(n)],
        }
    }

    /// Single non-identity letter at `q`, identity elsewhere.
    pub fn single(n: usize, q: usize, letter: Letter) -> PauliWord {
        let mut w = PauliWord::identity(n);
        w.set(q, letter);
        w
    }

    pub fn from_letters(letters: &[Letter]) -> PauliWord {
        let mut w = PauliWord::identity(letters.len());
        for (q, &l) in letters.iter().enumerate() {
            w.set(q, l);
        }
        w
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn letter(&self, q: usize) -> Letter {
        assert!(q < self.n);
        let (b, o) = (q / 64, q % 64);
        Letter::from_bits(self.x[b] >> o & 1 == 1, self.z[b] >> o & 1 == 1)
    }

    pub fn set(&mut self, q: usize, letter: Letter) {
        assert!(q < self.n);
        let (b, o) = (q / 64, q % 64);
        let (xb, zb) = letter.bits();
        self.x[b] = self.x[b] & !(1 << o) | (xb as u64) << o;
        self.z[b] = self.z[b] & !(1 << o) | (zb as u64) << o;
    }

    pub fn letters(&self) -> impl Iterator<Item = Letter> + '_ {
        (0..self.n).map(|q| self.letter(q))
    }

    /// Number of non-identity positions.
    pub fn weight(&self) -> usize {
        self.x
            .iter()
            .zip(&self.z)
            .map(|(x, z)| (x | z).count_ones() as usize)
            .sum()
    }

    pub fn is_identity(&self) -> bool {
        self.weight() == 0
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.n).filter(|&q| self.letter(q) != Letter::I).collect()
    }

    /// True when the words commute; Pauli words either commute or anticommute,
    /// deciding by the parity of positions carrying differing non-identity letters.
    pub fn commutes(&self, other: &PauliWord) -> bool {
        assert_eq!(self.n, other.n);
        let mut parity = 0u32;
        for i in 0..self.x.len() {
            parity ^= (self.x[i] & other.z[i]).count_ones() & 1;
            parity ^= (self.z[i] & other.x[i]).count_ones() & 1;
        }
        parity == 0
    }

    /// Operator product `self * other`, returning the quarter phase split off
    /// so the word itself stays coefficient-free.
    pub fn mul(&self, other: &PauliWord) -> (Phase, PauliWord) {
        assert_eq!(self.n, other.n);
        let mut phase = Phase::ONE;
        let mut out = PauliWord::identity(self.n);
        for i in 0..self.x.len() {
            out.x[i] = self.x[i] ^ other.x[i];
            out.z[i] = self.z[i] ^ other.z[i];
        }
        // Per-qubit phases: cyclic products (XY, YZ, ZX) contribute i, the
        // reversed orders contribute -i, everything else is real.
        let mut cyc = 0u32;
        let mut acyc = 0u32;
        for i in 0..self.x.len() {
            let (x1, z1, x2, z2) = (self.x[i], self.z[i], other.x[i], other.z[i]);
            let xy = x1 & !z1 & x2 & z2;
            let yz = x1 & z1 & !x2 & z2;
            let zx = !x1 & z1 & x2 & !z2;
            let yx = x1 & z1 & x2 & !z2;
            let zy = !x1 & z1 & x2 & z2;
            let xz = x1 & !z1 & !x2 & z2;
            cyc += (xy | yz | zx).count_ones();
            acyc += (yx | zy | xz).count_ones();
        }
        phase = phase.mul(Phase(((cyc + 3 * acyc) & 3) as u8));
        (phase, out)
    }

    /// Dense matrix with qubit 0 as the most significant index bit.
    pub fn to_matrix(&self) -> Result<CMat> {
        if self.n > ORACLE_CAP {
            return Err(Error::OracleCap {
                n: self.n,
                cap: ORACLE_CAP,
            });
        }
        let dim = 1usize << self.n;
        let mut flip = 0usize;
        let mut zmask = 0usize;
        let mut n_y = 0u32;
        for q in 0..self.n {
            let bit = 1usize << (self.n - 1 - q);
            match self.letter(q) {
                Letter::I => {}
                Letter::X => flip |= bit,
                Letter::Z => zmask |= bit,
                Letter::Y => {
                    flip |= bit;
                    zmask |= bit;
                    n_y += 1;
                }
            }
        }
        let y_phase = Phase((n_y & 3) as u8).as_complex();
        let mut m = CMat::zeros((dim, dim));
        for col in 0..dim {
            let sign = if (col & zmask).count_ones() & 1 == 1 {
                -1.0
            } else {
                1.0
            };
            m[(col ^ flip, col)] = y_phase * sign;
        }
        Ok(m)
    }
}

impl fmt::Display for PauliWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in self.letters() {
            write!(f, "{}", l.char())?;
        }
        Ok(())
    }
}

impl FromStr for PauliWord {
    type Err = Error;

    fn from_str(s: &str) -> Result<PauliWord> {
        let mut letters = Vec::with_capacity(s.len());
        for (i, c) in s.chars().enumerate() {
            letters.push(match c {
                'I' => Letter::I,
                'X' => Letter::X,
                'Y' => Letter::Y,
                'Z' => Letter::Z,
                _ => {
                    return Err(Error::Parse {
                        line: 0,
                        msg: format!("invalid Pauli letter {c:?} at position {i}"),
                    })
                }
            });
        }
        if letters.is_empty() {
            return Err(Error::Parse {
                line: 0,
                msg: "empty Pauli word".into(),
            });
        }
        Ok(PauliWord::from_letters(&letters))
    }
}

/// One weighted word of a Pauli expansion.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliTerm {
    pub coeff: Complex64,
    pub word: PauliWord,
}

impl PauliTerm {
    pub fn new(coeff: Complex64, word: PauliWord) -> PauliTerm {
        PauliTerm { coeff, word }
    }
}

/// Linear combination of Pauli words over a fixed register.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliSum {
    n: usize,
    terms: Vec<PauliTerm>,
}

impl PauliSum {
    pub fn zero(n: usize) -> PauliSum {
        PauliSum { n, terms: vec![] }
    }

    pub fn from_terms(n: usize, terms: Vec<PauliTerm>) -> Result<PauliSum> {
        for t in &terms {
            if t.word.n_qubits() != n {
                return Err(Error::QubitMismatch {
                    expected: n,
                    got: t.word.n_qubits(),
                });
            }
        }
        Ok(PauliSum { n, terms })
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &[PauliTerm] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn push(&mut self, t: PauliTerm) {
        assert_eq!(t.word.n_qubits(), self.n);
        self.terms.push(t);
    }

    pub fn add(&self, other: &PauliSum) -> PauliSum {
        assert_eq!(self.n, other.n);
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        PauliSum { n: self.n, terms }
    }

    pub fn scale(&self, c: Complex64) -> PauliSum {
        PauliSum {
            n: self.n,
            terms: self
                .terms
                .iter()
                .map(|t| PauliTerm::new(t.coeff * c, t.word.clone()))
                .collect(),
        }
    }

    /// Operator product; term count is the pairwise product before simplify.
    pub fn mul(&self, other: &PauliSum) -> PauliSum {
        assert_eq!(self.n, other.n);
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for a in &self.terms {
            for b in &other.terms {
                let (phase, word) = a.word.mul(&b.word);
                terms.push(PauliTerm::new(a.coeff * b.coeff * phase.as_complex(), word));
            }
        }
        PauliSum { n: self.n, terms }
    }

    /// Merge duplicate words and drop exact-zero coefficients. Word order is
    /// the lexicographic order of the packed representation, so the result is
    /// deterministic regardless of input order.
    pub fn simplify(&self) -> PauliSum {
        let mut map: BTreeMap<&PauliWord, Complex64> = BTreeMap::new();
        for t in &self.terms {
            *map.entry(&t.word).or_insert(Complex64::new(0.0, 0.0)) += t.coeff;
        }
        let terms = map
            .into_iter()
            .filter(|(_, c)| c.re != 0.0 || c.im != 0.0)
            .map(|(w, c)| PauliTerm::new(c, w.clone()))
            .collect();
        PauliSum { n: self.n, terms }
    }

    /// Hermitian iff every simplified coefficient is real (words are Hermitian).
    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.simplify().terms.iter().all(|t| t.coeff.im.abs() <= tol)
    }

    pub fn to_matrix(&self) -> Result<CMat> {
        if self.n > ORACLE_CAP {
            return Err(Error::OracleCap {
                n: self.n,
                cap: ORACLE_CAP,
            });
        }
        let dim = 1usize << self.n;
        let mut m = CMat::zeros((dim, dim));
        for t in &self.terms {
            m = m + t.word.to_matrix()?.mapv(|v| v * t.coeff);
        }
        Ok(m)
    }

    /// Mean weight over terms, identity terms counting zero.
    pub fn mean_weight(&self) -> f64 {
        if self.terms.is_empty() {
            return 0.0;
        }
        self.terms.iter().map(|t| t.word.weight() as f64).sum::<f64>() / self.terms.len() as f64
    }
}
