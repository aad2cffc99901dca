//! State-vector execution of circuits: unitary runs, measurement branch
//! enumeration, sampled runs, exact Hamiltonian diagonalisation/evolution,
//! and quantum-trajectory simulation with jump noise.
//!
//! Wire 0 is the most significant bit of the basis index, matching the
//! operator ordering used by the Pauli matrices.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::circuit::{Circuit, DeviceModel, Gate, KeyId, Registers};
use crate::dense::{self, CMat};
use crate::error::{Error, Result};
use crate::pauli::{Letter, PauliSum, PauliWord, ORACLE_CAP};

/// Hard cap on wire count so state vectors stay within memory.
pub const MAX_WIRES: usize = 24;

const C0: Complex64 = Complex64::new(0.0, 0.0);
const C1: Complex64 = Complex64::new(1.0, 0.0);

/// Normalised (unless stated otherwise) state vector over `n_wires` wires.
#[derive(Clone, Debug)]
pub struct State {
    n_wires: usize,
    amps: Vec<Complex64>,
}

impl State {
    pub fn zero(n_wires: usize) -> Result<State> {
        State::basis(n_wires, 0)
    }

    /// Computational basis state with the given index (wire 0 = MSB).
    pub fn basis(n_wires: usize, index: usize) -> Result<State> {
        if n_wires == 0 || n_wires > MAX_WIRES {
            return Err(Error::InvalidArg(format!(
                "wire count {n_wires} outside 1..={MAX_WIRES}"
            )));
        }
        let dim = 1usize << n_wires;
        if index >= dim {
            return Err(Error::InvalidArg(format!("basis index {index} >= dim {dim}")));
        }
        let mut amps = vec![C0; dim];
        amps[index] = C1;
        Ok(State { n_wires, amps })
    }

    pub fn from_amplitudes(n_wires: usize, amps: Vec<Complex64>) -> Result<State> {
        if n_wires == 0 || n_wires > MAX_WIRES || amps.len() != 1 << n_wires {
            return Err(Error::InvalidArg(format!(
                "amplitude vector of length {} does not fit {n_wires} wires",
                amps.len()
            )));
        }
        Ok(State { n_wires, amps })
    }

    /// `data (x) |0...0>` over `total_wires` wires, data block on the high bits.
    pub fn embed_front(data: &State, total_wires: usize) -> Result<State> {
        if total_wires < data.n_wires || total_wires > MAX_WIRES {
            return Err(Error::InvalidArg(format!(
                "cannot embed {}-wire state into {total_wires} wires",
                data.n_wires
            )));
        }
        let rest = total_wires - data.n_wires;
        let mut amps = vec![C0; 1 << total_wires];
        for (b, &a) in data.amps.iter().enumerate() {
            amps[b << rest] = a;
        }
        Ok(State { n_wires: total_wires, amps })
    }

    pub fn n_wires(&self) -> usize {
        self.n_wires
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn normalize(&mut self) {
        let n = self.norm_sqr().sqrt();
        if n > 0.0 {
            let inv = 1.0 / n;
            for a in &mut self.amps {
                *a *= inv;
            }
        }
    }

    fn mask(&self, wire: usize) -> usize {
        debug_assert!(wire < self.n_wires);
        1usize << (self.n_wires - 1 - wire)
    }

    /// Probability that `wire` reads 1.
    pub fn prob_one(&self, wire: usize) -> f64 {
        let m = self.mask(wire);
        self.amps
            .iter()
            .enumerate()
            .filter(|(i, _)| i & m != 0)
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    /// Zeroes all amplitudes where `wire` differs from `bit`; unnormalised.
    pub fn project(&mut self, wire: usize, bit: u8) {
        let m = self.mask(wire);
        let want = if bit == 1 { m } else { 0 };
        for (i, a) in self.amps.iter_mut().enumerate() {
            if i & m != want {
                *a = C0;
            }
        }
    }

    fn apply_1q(&mut self, wire: usize, m: [[Complex64; 2]; 2]) {
        let mask = self.mask(wire);
        let dim = self.amps.len();
        let mut base = 0;
        while base < dim {
            for off in 0..mask {
                let i = base + off;
                let j = i + mask;
                let (a, b) = (self.amps[i], self.amps[j]);
                self.amps[i] = m[0][0] * a + m[0][1] * b;
                self.amps[j] = m[1][0] * a + m[1][1] * b;
            }
            base += mask << 1;
        }
    }

    fn apply_cnot(&mut self, control: usize, target: usize) {
        let cm = self.mask(control);
        let tm = self.mask(target);
        for i in 0..self.amps.len() {
            if i & cm != 0 && i & tm == 0 {
                self.amps.swap(i, i | tm);
            }
        }
    }

    /// Multiplies each amplitude by `phase(i)`; covers every diagonal gate.
    fn apply_diag<F: Fn(usize) -> Complex64>(&mut self, phase: F) {
        for (i, a) in self.amps.iter_mut().enumerate() {
            *a *= phase(i);
        }
    }

    fn apply_rxx(&mut self, wa: usize, wb: usize, theta: f64) {
        let fm = self.mask(wa) | self.mask(wb);
        let am = self.mask(wa);
        let c = Complex64::new((theta / 2.0).cos(), 0.0);
        let s = Complex64::new(0.0, -(theta / 2.0).sin());
        for i in 0..self.amps.len() {
            if i & am == 0 {
                let j = i ^ fm;
                let (x, y) = (self.amps[i], self.amps[j]);
                self.amps[i] = c * x + s * y;
                self.amps[j] = c * y + s * x;
            }
        }
    }
}

fn h_mat() -> [[Complex64; 2]; 2] {
    let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    [[h, h], [h, -h]]
}

fn rx_mat(theta: f64) -> [[Complex64; 2]; 2] {
    let c = Complex64::new((theta / 2.0).cos(), 0.0);
    let s = Complex64::new(0.0, -(theta / 2.0).sin());
    [[c, s], [s, c]]
}

fn rz_mat(theta: f64) -> [[Complex64; 2]; 2] {
    [
        [Complex64::new(0.0, -theta / 2.0).exp(), C0],
        [C0, Complex64::new(0.0, theta / 2.0).exp()],
    ]
}

fn phase_mat(phi: f64) -> [[Complex64; 2]; 2] {
    [[C1, C0], [C0, Complex64::new(0.0, phi).exp()]]
}

fn s_mat() -> [[Complex64; 2]; 2] {
    [[C1, C0], [C0, Complex64::new(0.0, 1.0)]]
}

fn sdag_mat() -> [[Complex64; 2]; 2] {
    [[C1, C0], [C0, Complex64::new(0.0, -1.0)]]
}

fn mat_mul_2x2(a: [[Complex64; 2]; 2], b: [[Complex64; 2]; 2]) -> [[Complex64; 2]; 2] {
    let mut out = [[C0; 2]; 2];
    for r in 0..2 {
        for c in 0..2 {
            out[r][c] = a[r][0] * b[0][c] + a[r][1] * b[1][c];
        }
    }
    out
}

/// Applies one measurement-free gate in place.
fn apply_unitary_gate(st: &mut State, g: &Gate, regs: &Registers) {
    match g {
        Gate::H(w) => st.apply_1q(*w, h_mat()),
        Gate::S(w) => st.apply_1q(*w, s_mat()),
        Gate::Sdag(w) => st.apply_1q(*w, sdag_mat()),
        // HS = apply H then S, i.e. the matrix S*H.
        Gate::Hs(w) => st.apply_1q(*w, mat_mul_2x2(s_mat(), h_mat())),
        // SDAGH = apply S-dagger then H, i.e. the matrix H*Sdag.
        Gate::SdagH(w) => st.apply_1q(*w, mat_mul_2x2(h_mat(), sdag_mat())),
        Gate::Rx(w, t) | Gate::AncRx(w, t) => st.apply_1q(*w, rx_mat(*t)),
        Gate::Rz(w, t) => st.apply_1q(*w, rz_mat(*t)),
        Gate::Phase(w, t) | Gate::AncPhase(w, t) => st.apply_1q(*w, phase_mat(*t)),
        Gate::Cnot(c, t) => st.apply_cnot(*c, *t),
        Gate::Cz(a, b) => {
            let m = st.mask(*a) | st.mask(*b);
            st.apply_diag(|i| if (i & m) == m { -C1 } else { C1 });
        }
        Gate::CStringZ { ancilla, qubits } => {
            let am = st.mask(*ancilla);
            let mut zm = 0usize;
            for &q in qubits {
                zm |= st.mask(q);
            }
            st.apply_diag(|i| {
                if i & am != 0 && (i & zm).count_ones() % 2 == 1 {
                    -C1
                } else {
                    C1
                }
            });
        }
        Gate::CMultiStringZ { strings } => {
            let masks: Vec<(usize, usize)> = strings
                .iter()
                .map(|(a, qs)| {
                    let mut zm = 0usize;
                    for &q in qs {
                        zm |= st.mask(q);
                    }
                    (st.mask(*a), zm)
                })
                .collect();
            st.apply_diag(|i| {
                let mut sign = 1.0;
                for &(am, zm) in &masks {
                    if i & am != 0 && (i & zm).count_ones() % 2 == 1 {
                        sign = -sign;
                    }
                }
                Complex64::new(sign, 0.0)
            });
        }
        Gate::Ccz { controls, target } => {
            let mut m = st.mask(*target);
            for &c in controls {
                m |= st.mask(c);
            }
            st.apply_diag(|i| if (i & m) == m { -C1 } else { C1 });
        }
        Gate::ParallelCcz { pairs, target } => {
            let tm = st.mask(*target);
            let masks: Vec<usize> =
                pairs.iter().map(|&(a, b)| tm | st.mask(a) | st.mask(b)).collect();
            st.apply_diag(|i| {
                let mut sign = 1.0;
                for &m in &masks {
                    if (i & m) == m {
                        sign = -sign;
                    }
                }
                Complex64::new(sign, 0.0)
            });
        }
        Gate::Rxx(a, b, t) => st.apply_rxx(*a, *b, *t),
        Gate::BellPrep(p) => {
            let (u, v) = regs.bell(*p);
            st.apply_1q(u, h_mat());
            st.apply_cnot(u, v);
        }
        Gate::Idle { .. } => {}
        Gate::Measure { .. } | Gate::BellMeasure { .. } | Gate::ClassicallyControlled { .. } => {
            unreachable!("measurement handling belongs to the runners")
        }
    }
}

/// Runs a measurement-free circuit on `initial`.
pub fn run(c: &Circuit, initial: &State) -> Result<State> {
    check_wires(c, initial)?;
    let mut st = initial.clone();
    for layer in c.layers() {
        for g in layer {
            if matches!(
                g,
                Gate::Measure { .. } | Gate::BellMeasure { .. } | Gate::ClassicallyControlled { .. }
            ) {
                return Err(Error::NotUnitary);
            }
            apply_unitary_gate(&mut st, g, c.registers());
        }
    }
    Ok(st)
}

fn check_wires(c: &Circuit, st: &State) -> Result<()> {
    if st.n_wires != c.n_wires() {
        return Err(Error::QubitMismatch { expected: c.n_wires(), got: st.n_wires });
    }
    Ok(())
}

/// One measurement outcome path: the unnormalised state (so `probability` is
/// its squared norm) and the recorded bits.
#[derive(Clone, Debug)]
pub struct Branch {
    pub state: State,
    pub records: BTreeMap<KeyId, u8>,
    pub probability: f64,
}

/// Branches whose probability falls below this are numerically dead.
const BRANCH_EPS: f64 = 1e-24;

fn max_branches() -> usize {
    1 << 14
}

fn split_on_wire(branches: Vec<Branch>, wire: usize, key: KeyId) -> Result<Vec<Branch>> {
    let mut out = Vec::with_capacity(branches.len() * 2);
    for br in branches {
        for bit in [0u8, 1u8] {
            let mut st = br.state.clone();
            st.project(wire, bit);
            let p = st.norm_sqr();
            if p > BRANCH_EPS {
                let mut records = br.records.clone();
                records.insert(key, bit);
                out.push(Branch { state: st, records, probability: p });
            }
        }
    }
    if out.len() > max_branches() {
        return Err(Error::InvalidArg(format!(
            "measurement branch enumeration exceeded {} paths",
            max_branches()
        )));
    }
    Ok(out)
}

/// Enumerates every measurement outcome path. Branch states stay
/// unnormalised: each one is the corresponding Kraus branch applied to the
/// input, so probabilities are squared norms and sum to one.
pub fn run_branches(c: &Circuit, initial: &State) -> Result<Vec<Branch>> {
    check_wires(c, initial)?;
    let mut branches = vec![Branch {
        state: initial.clone(),
        records: BTreeMap::new(),
        probability: 1.0,
    }];
    for layer in c.layers() {
        for g in layer {
            match g {
                Gate::Measure { wire, key } => {
                    branches = split_on_wire(branches, *wire, *key)?;
                }
                Gate::BellMeasure { pair, keys } => {
                    let (u, v) = c.registers().bell(*pair);
                    for br in &mut branches {
                        br.state.apply_cnot(u, v);
                        br.state.apply_1q(u, h_mat());
                    }
                    branches = split_on_wire(branches, u, keys.0)?;
                    branches = split_on_wire(branches, v, keys.1)?;
                }
                Gate::ClassicallyControlled { key, gate } => {
                    for br in &mut branches {
                        if br.records[key] == 1 {
                            apply_unitary_gate(&mut br.state, gate, c.registers());
                        }
                    }
                }
                _ => {
                    for br in &mut branches {
                        apply_unitary_gate(&mut br.state, g, c.registers());
                    }
                }
            }
        }
    }
    Ok(branches)
}

fn sample_measure(st: &mut State, wire: usize, rng: &mut ChaCha8Rng) -> u8 {
    let p1 = st.prob_one(wire) / st.norm_sqr().max(f64::MIN_POSITIVE);
    let bit = u8::from(rng.gen::<f64>() < p1);
    st.project(wire, bit);
    st.normalize();
    bit
}

/// Runs the circuit sampling each measurement from the Born rule.
pub fn run_sampled(
    c: &Circuit,
    initial: &State,
    rng: &mut ChaCha8Rng,
) -> Result<(State, BTreeMap<KeyId, u8>)> {
    check_wires(c, initial)?;
    let mut st = initial.clone();
    let mut records = BTreeMap::new();
    for layer in c.layers() {
        for g in layer {
            apply_gate_sampled(&mut st, g, c.registers(), &mut records, rng);
        }
    }
    Ok((st, records))
}

fn apply_gate_sampled(
    st: &mut State,
    g: &Gate,
    regs: &Registers,
    records: &mut BTreeMap<KeyId, u8>,
    rng: &mut ChaCha8Rng,
) {
    match g {
        Gate::Measure { wire, key } => {
            let bit = sample_measure(st, *wire, rng);
            records.insert(*key, bit);
        }
        Gate::BellMeasure { pair, keys } => {
            let (u, v) = regs.bell(*pair);
            st.apply_cnot(u, v);
            st.apply_1q(u, h_mat());
            records.insert(keys.0, sample_measure(st, u, rng));
            records.insert(keys.1, sample_measure(st, v, rng));
        }
        Gate::ClassicallyControlled { key, gate } => {
            if records[key] == 1 {
                apply_unitary_gate(st, gate, regs);
            }
        }
        _ => apply_unitary_gate(st, g, regs),
    }
}

impl Circuit {
    /// Dense unitary of a measurement-free circuit, columns = basis images.
    pub fn unitary(&self) -> Result<CMat> {
        let n = self.n_wires();
        if n > ORACLE_CAP {
            return Err(Error::OracleCap { n, cap: ORACLE_CAP });
        }
        let dim = 1usize << n;
        let mut u = CMat::zeros((dim, dim));
        for col in 0..dim {
            let st = run(self, &State::basis(n, col)?)?;
            for row in 0..dim {
                u[(row, col)] = st.amps[row];
            }
        }
        Ok(u)
    }
}

// ---------------------------------------------------------------------------
// Exact spectra and evolution.

/// Full eigendecomposition of a Hermitian Pauli sum, eigenvalues ascending,
/// every eigenpair verified to residual 1e-8.
pub fn exact_diagonalize(h: &PauliSum) -> Result<(Vec<f64>, CMat)> {
    let m = h.to_matrix()?;
    if !dense::is_hermitian(&m, 1e-9) {
        return Err(Error::NonHermitian {
            what: "hamiltonian",
            detail: "exact diagonalisation needs a Hermitian operator".into(),
        });
    }
    let (vals, vecs) = dense::eigh_hermitian(&m)?;
    verify_residuals(&m, &vals, &vecs)?;
    Ok((vals, vecs))
}

fn verify_residuals(m: &CMat, vals: &[f64], vecs: &CMat) -> Result<()> {
    for (k, &e) in vals.iter().enumerate() {
        let v = vecs.column(k).to_owned();
        let hv = m.dot(&v);
        let res: f64 = hv
            .iter()
            .zip(v.iter())
            .map(|(a, b)| (a - b * Complex64::new(e, 0.0)).norm_sqr())
            .sum::<f64>()
            .sqrt();
        if res > 1e-8 {
            return Err(Error::Eigen(format!(
                "eigenpair {k} residual {res:.2e} exceeds 1e-8"
            )));
        }
    }
    Ok(())
}

/// Eigenpairs restricted to the subspace with exactly `n_ones` wires set
/// (the particle-number sector for occupation encodings, which map total
/// occupation to total set bits under any mode permutation). Returned
/// eigenvector columns live in the full space. Fails if the operator leaks
/// out of the sector.
pub fn exact_diagonalize_number_sector(
    h: &PauliSum,
    n_ones: usize,
) -> Result<(Vec<f64>, CMat)> {
    let m = h.to_matrix()?;
    if !dense::is_hermitian(&m, 1e-9) {
        return Err(Error::NonHermitian {
            what: "hamiltonian",
            detail: "sector diagonalisation needs a Hermitian operator".into(),
        });
    }
    let dim = m.dim().0;
    let sector: Vec<usize> =
        (0..dim).filter(|b| b.count_ones() as usize == n_ones).collect();
    if sector.is_empty() {
        return Err(Error::InvalidArg(format!(
            "no basis states with {n_ones} set bits in dimension {dim}"
        )));
    }
    let k = sector.len();
    let mut block = CMat::zeros((k, k));
    for (r, &br) in sector.iter().enumerate() {
        for (c, &bc) in sector.iter().enumerate() {
            block[(r, c)] = m[(br, bc)];
        }
    }
    let (vals, vecs) = dense::eigh_hermitian(&block)?;
    let mut full = CMat::zeros((dim, k));
    for c in 0..k {
        for (r, &br) in sector.iter().enumerate() {
            full[(br, c)] = vecs[(r, c)];
        }
    }
    // Residual in the full space catches operators that do not preserve the
    // sector (their true eigenvectors leave the subspace).
    verify_residuals(&m, &vals, &full)?;
    Ok((vals, full))
}

/// Lowest eigenpair in a fixed set-bit sector, as energy plus state.
pub fn ground_state_in_sector(h: &PauliSum, n_ones: usize) -> Result<(f64, State)> {
    let (vals, vecs) = exact_diagonalize_number_sector(h, n_ones)?;
    let v = vecs.column(0);
    let st = State::from_amplitudes(h.n_qubits(), v.to_vec())?;
    Ok((vals[0], st))
}

/// exp(-i t H) applied to `initial` by dense eigendecomposition.
pub fn exact_evolve(h: &PauliSum, t: f64, initial: &State) -> Result<State> {
    let m = h.to_matrix()?;
    if initial.dim() != m.dim().0 {
        return Err(Error::QubitMismatch { expected: h.n_qubits(), got: initial.n_wires });
    }
    let u = dense::expm_hermitian(&m, t)?;
    let v = ndarray::Array1::from_vec(initial.amps.clone());
    let out = u.dot(&v);
    State::from_amplitudes(initial.n_wires, out.to_vec())
}

// ---------------------------------------------------------------------------
// Expectation values.

struct WordMasks {
    flip: usize,
    sign: usize,
    phase: Complex64,
}

/// Index-space masks for one Pauli word placed on `wire_map` wires:
/// `P|b> = phase * (-1)^popcount(b & sign) |b ^ flip>`.
fn word_masks(w: &PauliWord, wire_map: &[usize], n_wires: usize) -> WordMasks {
    let mut flip = 0usize;
    let mut sign = 0usize;
    let mut n_y = 0u32;
    for q in 0..w.n_qubits() {
        let bit = 1usize << (n_wires - 1 - wire_map[q]);
        match w.letter(q) {
            Letter::I => {}
            Letter::X => flip |= bit,
            Letter::Y => {
                flip |= bit;
                sign |= bit;
                n_y += 1;
            }
            Letter::Z => sign |= bit,
        }
    }
    let phase = match n_y % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    };
    WordMasks { flip, sign, phase }
}

fn word_expectation(st: &State, masks: &WordMasks) -> Complex64 {
    let mut acc = C0;
    for (b, &a) in st.amps.iter().enumerate() {
        if a == C0 {
            continue;
        }
        let sgn = if (b & masks.sign).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
        acc += st.amps[b ^ masks.flip].conj() * masks.phase * sgn * a;
    }
    acc
}

/// <psi| sum |psi> with the observable's qubit q living on `wire_map[q]`.
/// Identity words contribute their coefficient exactly, so a pure identity
/// observable on a normalised state reads exactly 1.
pub fn expectation_mapped(st: &State, sum: &PauliSum, wire_map: &[usize]) -> Result<Complex64> {
    if wire_map.len() != sum.n_qubits() {
        return Err(Error::QubitMismatch { expected: sum.n_qubits(), got: wire_map.len() });
    }
    for &w in wire_map {
        if w >= st.n_wires {
            return Err(Error::InvalidArg(format!(
                "observable wire {w} out of range for {}-wire state",
                st.n_wires
            )));
        }
    }
    let mut acc = C0;
    for term in sum.terms() {
        if term.word.is_identity() {
            acc += term.coeff;
            continue;
        }
        let masks = word_masks(&term.word, wire_map, st.n_wires);
        acc += term.coeff * word_expectation(st, &masks);
    }
    Ok(acc)
}

/// Expectation of an observable over the full wire set.
pub fn expectation(st: &State, sum: &PauliSum) -> Result<Complex64> {
    let map: Vec<usize> = (0..sum.n_qubits()).collect();
    expectation_mapped(st, sum, &map)
}

/// Real observable evaluated on a state; the trajectory runner averages these.
#[derive(Clone, Debug)]
pub enum Observable {
    /// <Z> of one wire.
    WireZ(usize),
    /// <Y> of one wire.
    WireY(usize),
    /// Hermitian Pauli observable on the leading wires (the data block).
    DataPauli(PauliSum),
}

impl Observable {
    pub fn evaluate(&self, st: &State) -> Result<f64> {
        match self {
            Observable::WireZ(w) => {
                if *w >= st.n_wires {
                    return Err(Error::InvalidArg(format!("observable wire {w} out of range")));
                }
                let m = st.mask(*w);
                let mut acc = 0.0;
                for (b, a) in st.amps.iter().enumerate() {
                    let p = a.norm_sqr();
                    acc += if b & m != 0 { -p } else { p };
                }
                Ok(acc)
            }
            Observable::WireY(w) => {
                if *w >= st.n_wires {
                    return Err(Error::InvalidArg(format!("observable wire {w} out of range")));
                }
                let masks = WordMasks {
                    flip: st.mask(*w),
                    sign: st.mask(*w),
                    phase: Complex64::new(0.0, 1.0),
                };
                Ok(word_expectation(st, &masks).re)
            }
            Observable::DataPauli(sum) => {
                let map: Vec<usize> = (0..sum.n_qubits()).collect();
                Ok(expectation_mapped(st, sum, &map)?.re)
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Jump noise and quantum trajectories.

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum JumpKind {
    /// sigma- : |1> -> |0> at the given rate.
    Lower,
    /// sigma+ : |0> -> |1>.
    Raise,
    /// sigma_z dephasing jumps.
    Dephase,
}

#[derive(Clone, Copy, Debug)]
pub struct JumpOp {
    pub wire: usize,
    pub kind: JumpKind,
    pub rate_per_ns: f64,
}

/// Independent jump processes; every L^dag L is diagonal, which the
/// first-order trajectory stepper relies on.
#[derive(Clone, Debug, Default)]
pub struct NoiseModel {
    pub jumps: Vec<JumpOp>,
}

impl NoiseModel {
    pub fn none() -> NoiseModel {
        NoiseModel { jumps: Vec::new() }
    }

    /// Relaxation, thermal excitation and dephasing on every qubit wire plus
    /// photon loss on every cavity wire, at the rates used for the noisy
    /// comparisons: qubit decay 10 kHz, excitation 0.05 kHz, dephasing
    /// 50 kHz, cavity decay 5 kHz (1 kHz = 1e-6 per ns).
    pub fn fig5(regs: &Registers) -> NoiseModel {
        let mut jumps = Vec::new();
        let cavity_lo = regs.n_data;
        let cavity_hi = regs.n_data + regs.n_cavity;
        for w in 0..regs.total_wires() {
            if w >= cavity_lo && w < cavity_hi {
                jumps.push(JumpOp { wire: w, kind: JumpKind::Lower, rate_per_ns: 5e-6 });
            } else {
                jumps.push(JumpOp { wire: w, kind: JumpKind::Lower, rate_per_ns: 1e-5 });
                jumps.push(JumpOp { wire: w, kind: JumpKind::Raise, rate_per_ns: 5e-8 });
                jumps.push(JumpOp { wire: w, kind: JumpKind::Dephase, rate_per_ns: 5e-5 });
            }
        }
        NoiseModel { jumps }
    }

    pub fn validate(&self, n_wires: usize) -> Result<()> {
        for j in &self.jumps {
            if j.wire >= n_wires {
                return Err(Error::InvalidArg(format!(
                    "jump on wire {} out of range for {n_wires} wires",
                    j.wire
                )));
            }
            if !j.rate_per_ns.is_finite() || j.rate_per_ns < 0.0 {
                return Err(Error::InvalidArg(format!("bad jump rate {}", j.rate_per_ns)));
            }
        }
        Ok(())
    }

    pub fn is_trivial(&self) -> bool {
        self.jumps.iter().all(|j| j.rate_per_ns == 0.0)
    }
}

#[derive(Clone, Debug)]
pub struct TrajectoryConfig {
    pub n_trajectories: usize,
    pub base_seed: u64,
    /// Physical duration assigned to one dimensionless Hamiltonian time unit
    /// when protocols schedule evolution windows (default 1 us).
    pub ns_per_time_unit: f64,
    /// Record observables after every layer; otherwise only the final time.
    pub record_every_layer: bool,
}

impl Default for TrajectoryConfig {
    fn default() -> Self {
        TrajectoryConfig {
            n_trajectories: 100,
            base_seed: 7,
            ns_per_time_unit: 1000.0,
            record_every_layer: true,
        }
    }
}

/// Ensemble averages over trajectories: one row of means and standard errors
/// per recorded time, observables in call order.
#[derive(Clone, Debug)]
pub struct TrajectoryResult {
    pub times_ns: Vec<f64>,
    pub names: Vec<String>,
    /// means[obs][time]
    pub means: Vec<Vec<f64>>,
    pub stderrs: Vec<Vec<f64>>,
    pub n_trajectories: usize,
    pub warnings: Vec<String>,
}

impl TrajectoryResult {
    /// CSV rows `t_ns,observable_name,mean,stderr`, times outer, observables
    /// inner, shortest-roundtrip float formatting.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t_ns,observable_name,mean,stderr\n");
        for (ti, t) in self.times_ns.iter().enumerate() {
            for (oi, name) in self.names.iter().enumerate() {
                let _ = writeln!(s, "{t},{name},{},{}", self.means[oi][ti], self.stderrs[oi][ti]);
            }
        }
        s
    }
}

/// Per-substep total jump probability kept at or below this.
const SUBSTEP_BUDGET: f64 = 0.01;

struct JumpTable {
    jumps: Vec<JumpOp>,
    /// Diagonal of sum_j rate_j L_j^dag L_j over basis indices.
    damp_diag: Vec<f64>,
}

impl JumpTable {
    fn build(noise: &NoiseModel, st: &State) -> JumpTable {
        let jumps: Vec<JumpOp> =
            noise.jumps.iter().copied().filter(|j| j.rate_per_ns > 0.0).collect();
        let mut damp_diag = vec![0.0; st.dim()];
        for j in &jumps {
            let m = st.mask(j.wire);
            for (b, d) in damp_diag.iter_mut().enumerate() {
                let occ = match j.kind {
                    JumpKind::Lower => b & m != 0,
                    JumpKind::Raise => b & m == 0,
                    JumpKind::Dephase => true,
                };
                if occ {
                    *d += j.rate_per_ns;
                }
            }
        }
        JumpTable { jumps, damp_diag }
    }

    /// First-order probability weight of jump `j` on `st` (rate times the
    /// population its L^dag L projects onto).
    fn weight(&self, j: &JumpOp, st: &State) -> f64 {
        match j.kind {
            JumpKind::Dephase => j.rate_per_ns,
            JumpKind::Lower => j.rate_per_ns * st.prob_one(j.wire),
            JumpKind::Raise => j.rate_per_ns * (1.0 - st.prob_one(j.wire)),
        }
    }

    fn apply_jump(&self, j: &JumpOp, st: &mut State) {
        let m = st.mask(j.wire);
        match j.kind {
            JumpKind::Dephase => {
                st.apply_diag(|i| if i & m != 0 { -C1 } else { C1 });
            }
            JumpKind::Lower => {
                // |0><1| : keep the bit-1 part, moved to bit 0.
                for i in 0..st.amps.len() {
                    if i & m == 0 {
                        st.amps[i] = st.amps[i | m];
                        st.amps[i | m] = C0;
                    }
                }
                st.normalize();
            }
            JumpKind::Raise => {
                for i in 0..st.amps.len() {
                    if i & m == 0 {
                        st.amps[i | m] = st.amps[i];
                        st.amps[i] = C0;
                    }
                }
                st.normalize();
            }
        }
    }

    /// Evolves `st` through a window of `ns` nanoseconds: sub-stepped
    /// first-order waiting-time sampling with diagonal no-jump damping.
    fn evolve_window(&self, st: &mut State, ns: f64, rng: &mut ChaCha8Rng) {
        if ns <= 0.0 || self.jumps.is_empty() {
            return;
        }
        let gamma: f64 = self.jumps.iter().map(|j| j.rate_per_ns).sum();
        let n_sub = ((gamma * ns / SUBSTEP_BUDGET).ceil() as usize).max(1);
        let dtau = ns / n_sub as f64;
        for _ in 0..n_sub {
            let weights: Vec<f64> = self.jumps.iter().map(|j| self.weight(j, st) * dtau).collect();
            let total: f64 = weights.iter().sum();
            let u = rng.gen::<f64>();
            if u < total {
                let mut pick = u;
                let mut idx = self.jumps.len() - 1;
                for (k, w) in weights.iter().enumerate() {
                    if pick < *w {
                        idx = k;
                        break;
                    }
                    pick -= w;
                }
                self.apply_jump(&self.jumps[idx], st);
            } else {
                for (i, a) in st.amps.iter_mut().enumerate() {
                    *a *= (-0.5 * dtau * self.damp_diag[i]).exp();
                }
                st.normalize();
            }
        }
    }
}

/// Averages the observables over jump-noise trajectories of one circuit.
/// Noise acts during gate layers and explicit idle layers, scaled by each
/// layer's device duration; layer unitaries (and sampled measurements) apply
/// at the start of their window. Trajectory `i` draws from an independent
/// counter stream `i` of one seeded generator, so results are bit-exact
/// reproducible and independent of scheduling.
pub fn run_trajectories(
    c: &Circuit,
    initial: &State,
    noise: &NoiseModel,
    dev: &DeviceModel,
    cfg: &TrajectoryConfig,
    observables: &[(String, Observable)],
) -> Result<TrajectoryResult> {
    check_wires(c, initial)?;
    noise.validate(c.n_wires())?;
    dev.validate()?;
    if cfg.n_trajectories == 0 {
        return Err(Error::InvalidArg("need at least one trajectory".into()));
    }
    if observables.is_empty() {
        return Err(Error::InvalidArg("need at least one observable".into()));
    }
    let durations = c.layer_durations(dev);
    let total_ns: f64 = durations.iter().sum();
    let mut warnings = Vec::new();
    if total_ns == 0.0 && !noise.is_trivial() {
        warnings.push(
            "noise rates are set but the schedule has zero total duration; nothing decays"
                .to_string(),
        );
    }

    let times_ns: Vec<f64> = if cfg.record_every_layer {
        let mut ts = Vec::with_capacity(durations.len() + 1);
        let mut acc = 0.0;
        ts.push(0.0);
        for d in &durations {
            acc += d;
            ts.push(acc);
        }
        ts
    } else {
        vec![total_ns]
    };
    let n_times = times_ns.len();
    let n_obs = observables.len();

    let table = JumpTable::build(noise, initial);
    let skip_noise = noise.is_trivial();

    let per_traj: Vec<Result<Vec<f64>>> = (0..cfg.n_trajectories)
        .into_par_iter()
        .map(|ti| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.base_seed);
            rng.set_stream(ti as u64);
            let mut st = initial.clone();
            let mut records: BTreeMap<KeyId, u8> = BTreeMap::new();
            let mut samples = Vec::with_capacity(n_obs * n_times);
            let record_point = |st: &State, out: &mut Vec<f64>| -> Result<()> {
                for (_, obs) in observables {
                    out.push(obs.evaluate(st)?);
                }
                Ok(())
            };
            if cfg.record_every_layer {
                record_point(&st, &mut samples)?;
            }
            for (li, layer) in c.layers().iter().enumerate() {
                for g in layer {
                    apply_gate_sampled(&mut st, g, c.registers(), &mut records, &mut rng);
                }
                if !skip_noise {
                    table.evolve_window(&mut st, durations[li], &mut rng);
                }
                if cfg.record_every_layer {
                    record_point(&st, &mut samples)?;
                }
            }
            if !cfg.record_every_layer {
                record_point(&st, &mut samples)?;
            }
            Ok(samples)
        })
        .collect();

    // Ordered reduction keeps the means bit-identical across thread counts.
    let mut sums = vec![0.0f64; n_obs * n_times];
    let mut sumsq = vec![0.0f64; n_obs * n_times];
    for traj in &per_traj {
        let samples = traj.as_ref().map_err(|e| Error::InvalidArg(e.to_string()))?;
        for (k, v) in samples.iter().enumerate() {
            sums[k] += v;
            sumsq[k] += v * v;
        }
    }
    let n = cfg.n_trajectories as f64;
    let mut means = vec![vec![0.0; n_times]; n_obs];
    let mut stderrs = vec![vec![0.0; n_times]; n_obs];
    for t in 0..n_times {
        for o in 0..n_obs {
            let k = t * n_obs + o;
            let mean = sums[k] / n;
            means[o][t] = mean;
            let var = if cfg.n_trajectories > 1 {
                ((sumsq[k] - n * mean * mean) / (n - 1.0)).max(0.0)
            } else {
                0.0
            };
            stderrs[o][t] = (var / n).sqrt();
        }
    }
    Ok(TrajectoryResult {
        times_ns,
        names: observables.iter().map(|(n, _)| n.clone()).collect(),
        means,
        stderrs,
        n_trajectories: cfg.n_trajectories,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::CavityScaling;
    use crate::pauli::PauliTerm;
    use num_complex::Complex64;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn sum1(s: &str) -> PauliSum {
        let w: PauliWord = s.parse().unwrap();
        PauliSum::from_terms(w.n_qubits(), vec![PauliTerm::new(c(1.0, 0.0), w)]).unwrap()
    }

    fn single(g: Gate, regs: Registers) -> Circuit {
        Circuit::from_gates(regs, [g]).unwrap()
    }

    fn mat_of(g: Gate, n: usize) -> CMat {
        single(g, Registers::data_only(n)).unitary().unwrap()
    }

    #[test]
    fn single_qubit_gates_match_matrices() {
        let h = mat_of(Gate::H(0), 1);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!((h[(0, 0)] - c(r, 0.0)).norm() < 1e-15);
        assert!((h[(1, 1)] - c(-r, 0.0)).norm() < 1e-15);
        let s = mat_of(Gate::S(0), 1);
        assert!((s[(1, 1)] - c(0.0, 1.0)).norm() < 1e-15);
        let sd = mat_of(Gate::Sdag(0), 1);
        assert!((sd[(1, 1)] - c(0.0, -1.0)).norm() < 1e-15);
        let p = mat_of(Gate::Phase(0, 0.3), 1);
        assert!((p[(1, 1)] - c(0.0, 0.3).exp()).norm() < 1e-15);
        let rx = mat_of(Gate::Rx(0, 0.7), 1);
        assert!((rx[(0, 1)] - c(0.0, -(0.35f64).sin())).norm() < 1e-15);
        let rz = mat_of(Gate::Rz(0, 0.7), 1);
        assert!((rz[(0, 0)] - c(0.0, -0.35).exp()).norm() < 1e-15);
    }

    #[test]
    fn y_basis_sandwich_gives_y_rotation() {
        // SDAGH then Rz then HS equals exp(-i theta/2 Y).
        let theta = 0.9;
        let circ = Circuit::from_gates(
            Registers::data_only(1),
            [Gate::SdagH(0), Gate::Rz(0, theta), Gate::Hs(0)],
        )
        .unwrap();
        let u = circ.unitary().unwrap();
        let ch = (theta / 2.0).cos();
        let sh = (theta / 2.0).sin();
        let expect = [[c(ch, 0.0), c(-sh, 0.0)], [c(sh, 0.0), c(ch, 0.0)]];
        for r in 0..2 {
            for col in 0..2 {
                assert!((u[(r, col)] - expect[r][col]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn hs_inverts_sdagh() {
        let circ = Circuit::from_gates(
            Registers::data_only(1),
            [Gate::SdagH(0), Gate::Hs(0)],
        )
        .unwrap();
        let u = circ.unitary().unwrap();
        assert!(dense::max_abs_diff(&u, &dense::identity(2)) < 1e-12);
    }

    #[test]
    fn cnot_and_cz_tables() {
        let u = mat_of(Gate::Cnot(0, 1), 2);
        // |10> -> |11> with wire 0 as MSB.
        assert!((u[(3, 2)] - c(1.0, 0.0)).norm() < 1e-15);
        assert!((u[(2, 3)] - c(1.0, 0.0)).norm() < 1e-15);
        assert!((u[(0, 0)] - c(1.0, 0.0)).norm() < 1e-15);
        let z = mat_of(Gate::Cz(0, 1), 2);
        assert!((z[(3, 3)] + c(1.0, 0.0)).norm() < 1e-15);
        assert!((z[(2, 2)] - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn cstring_matches_dispersive_phase_accumulation() {
        // The string gate equals evolving the number-split dispersive
        // Hamiltonian chi * |1><1|_anc (x) sum_q (I - Z_q)/2 for t = pi/chi.
        let regs = Registers { n_data: 3, n_cavity: 1, has_dummy: false, n_bell_pairs: 0 };
        let circ = single(Gate::CStringZ { ancilla: 3, qubits: vec![0, 1, 2] }, regs);
        let u = circ.unitary().unwrap();
        let chi = 0.7;
        let dim = 16;
        let mut hq = CMat::zeros((dim, dim));
        for b in 0..dim {
            if b & 1 != 0 {
                // ancilla wire 3 is the least significant bit
                let occ = (b >> 1 & 0b111u32 as usize).count_ones() as f64;
                hq[(b, b)] = c(chi * occ, 0.0);
            }
        }
        let evolved = dense::expm_hermitian(&hq, PI / chi).unwrap();
        assert!(dense::max_abs_diff(&u, &evolved) < 1e-12);
    }

    #[test]
    fn multi_string_is_product_of_strings() {
        let regs = Registers { n_data: 3, n_cavity: 2, has_dummy: false, n_bell_pairs: 0 };
        let joint = single(
            Gate::CMultiStringZ { strings: vec![(3, vec![0, 1]), (4, vec![1, 2])] },
            regs,
        )
        .unitary()
        .unwrap();
        let a = single(Gate::CStringZ { ancilla: 3, qubits: vec![0, 1] }, regs)
            .unitary()
            .unwrap();
        let b = single(Gate::CStringZ { ancilla: 4, qubits: vec![1, 2] }, regs)
            .unitary()
            .unwrap();
        assert!(dense::max_abs_diff(&joint, &b.dot(&a)) < 1e-12);
    }

    #[test]
    fn parallel_ccz_is_product_of_ccz() {
        let regs = Registers { n_data: 4, n_cavity: 0, has_dummy: true, n_bell_pairs: 0 };
        let joint = single(
            Gate::ParallelCcz { pairs: vec![(0, 1), (2, 3)], target: 4 },
            regs,
        )
        .unitary()
        .unwrap();
        let a = single(Gate::Ccz { controls: vec![0, 1], target: 4 }, regs)
            .unitary()
            .unwrap();
        let b = single(Gate::Ccz { controls: vec![2, 3], target: 4 }, regs)
            .unitary()
            .unwrap();
        assert!(dense::max_abs_diff(&joint, &b.dot(&a)) < 1e-12);
    }

    #[test]
    fn rxx_matches_exponential() {
        let theta = 1.1;
        let u = mat_of(Gate::Rxx(0, 1, theta), 2);
        let xx = sum1("XX").to_matrix().unwrap();
        let expect = dense::expm_hermitian(&xx, theta / 2.0).unwrap();
        assert!(dense::max_abs_diff(&u, &expect) < 1e-12);
    }

    #[test]
    fn compose_matches_unitary_product() {
        use rand::Rng;
        let regs = Registers::data_only(3);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let mut mk = |n: usize| -> Circuit {
                let mut circ = Circuit::new(regs).unwrap();
                for _ in 0..n {
                    let w = rng.gen_range(0..3);
                    let g = match rng.gen_range(0..3) {
                        0 => Gate::H(w),
                        1 => Gate::Rz(w, rng.gen_range(-2.0..2.0)),
                        _ => Gate::Cnot(w, (w + 1) % 3),
                    };
                    circ.push(g).unwrap();
                }
                circ
            };
            let a = mk(6);
            let b = mk(6);
            let ua = a.unitary().unwrap();
            let ub = b.unitary().unwrap();
            let expect = ub.dot(&ua);
            for repack in [false, true] {
                let u = a.compose(&b, repack).unwrap().unitary().unwrap();
                assert!(dense::max_abs_diff(&u, &expect) < 1e-10);
            }
        }
    }

    #[test]
    fn unitary_rejects_measurements() {
        let mut circ = Circuit::new(Registers::data_only(1)).unwrap();
        circ.push(Gate::Measure { wire: 0, key: 0 }).unwrap();
        assert!(matches!(circ.unitary(), Err(Error::NotUnitary)));
        assert!(matches!(
            run(&circ, &State::zero(1).unwrap()),
            Err(Error::NotUnitary)
        ));
    }

    #[test]
    fn measurement_branches_follow_born_rule() {
        let mut circ = Circuit::new(Registers::data_only(1)).unwrap();
        circ.push(Gate::Rx(0, 2.0 * (0.6f64).asin())).unwrap();
        circ.push(Gate::Measure { wire: 0, key: 0 }).unwrap();
        let branches = run_branches(&circ, &State::zero(1).unwrap()).unwrap();
        assert_eq!(branches.len(), 2);
        let p: BTreeMap<u8, f64> =
            branches.iter().map(|b| (b.records[&0], b.probability)).collect();
        assert!((p[&0] - 0.64).abs() < 1e-12);
        assert!((p[&1] - 0.36).abs() < 1e-12);
    }

    #[test]
    fn bell_measurement_outcomes() {
        let regs = Registers { n_data: 0, n_cavity: 0, has_dummy: false, n_bell_pairs: 1 };
        // Measuring a fresh Bell pair in the Bell basis is deterministic.
        let mut circ = Circuit::new(regs).unwrap();
        circ.push(Gate::BellPrep(0)).unwrap();
        circ.push(Gate::BellMeasure { pair: 0, keys: (0, 1) }).unwrap();
        let branches = run_branches(&circ, &State::zero(2).unwrap()).unwrap();
        assert_eq!(branches.len(), 1);
        assert_eq!(branches[0].records[&0], 0);
        assert_eq!(branches[0].records[&1], 0);
        assert!((branches[0].probability - 1.0).abs() < 1e-12);

        // |0+> spreads uniformly over all four Bell outcomes.
        let mut circ = Circuit::new(regs).unwrap();
        circ.push(Gate::H(1)).unwrap();
        circ.push(Gate::BellMeasure { pair: 0, keys: (0, 1) }).unwrap();
        let branches = run_branches(&circ, &State::zero(2).unwrap()).unwrap();
        assert_eq!(branches.len(), 4);
        for b in &branches {
            assert!((b.probability - 0.25).abs() < 1e-12);
        }
    }

    #[test]
    fn teleportation_with_classical_corrections() {
        // Standard one-qubit teleport: wire 0 carries psi, pair (1,2).
        let regs = Registers { n_data: 1, n_cavity: 0, has_dummy: false, n_bell_pairs: 1 };
        let mut circ = Circuit::new(regs).unwrap();
        circ.push_all([
            Gate::BellPrep(0),
            Gate::Cnot(0, 1),
            Gate::H(0),
            Gate::Measure { wire: 0, key: 0 },
            Gate::Measure { wire: 1, key: 1 },
            // bit-flip correction from the middle wire, phase flip from the top
            Gate::ClassicallyControlled { key: 1, gate: Box::new(Gate::Rx(2, PI)) },
            Gate::ClassicallyControlled { key: 0, gate: Box::new(Gate::Rz(2, PI)) },
        ])
        .unwrap();
        let psi = State::from_amplitudes(1, vec![c(0.6, 0.0), c(0.0, 0.8)]).unwrap();
        let full = State::embed_front(&psi, 3).unwrap();
        let branches = run_branches(&circ, &full).unwrap();
        assert_eq!(branches.len(), 4);
        let mut total_p = 0.0;
        for b in &branches {
            total_p += b.probability;
            let mut st = b.state.clone();
            st.normalize();
            // wires 0 and 1 are collapsed; read the wire-2 block
            let base = (b.records[&0] as usize) << 2 | (b.records[&1] as usize) << 1;
            let got = [st.amplitudes()[base], st.amplitudes()[base | 1]];
            let ip = (got[0].conj() * psi.amplitudes()[0] + got[1].conj() * psi.amplitudes()[1])
                .norm();
            assert!((ip - 1.0).abs() < 1e-10, "branch fidelity {ip}");
        }
        assert!((total_p - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sampled_run_is_deterministic() {
        let regs = Registers::data_only(2);
        let mut circ = Circuit::new(regs).unwrap();
        circ.push_all([
            Gate::H(0),
            Gate::Cnot(0, 1),
            Gate::Measure { wire: 0, key: 0 },
            Gate::Measure { wire: 1, key: 1 },
        ])
        .unwrap();
        let init = State::zero(2).unwrap();
        let mut r1 = ChaCha8Rng::seed_from_u64(3);
        let (_, rec1) = run_sampled(&circ, &init, &mut r1).unwrap();
        let mut r2 = ChaCha8Rng::seed_from_u64(3);
        let (_, rec2) = run_sampled(&circ, &init, &mut r2).unwrap();
        assert_eq!(rec1, rec2);
        assert_eq!(rec1[&0], rec1[&1]);
    }

    #[test]
    fn exact_diagonalize_checks_residuals_and_sector() {
        // Number-conserving two-mode hopping in qubit form.
        let h = PauliSum::from_terms(
            2,
            vec![
                PauliTerm::new(c(0.5, 0.0), "XX".parse().unwrap()),
                PauliTerm::new(c(0.5, 0.0), "YY".parse().unwrap()),
            ],
        )
        .unwrap();
        let (vals, _) = exact_diagonalize(&h).unwrap();
        assert_eq!(vals.len(), 4);
        let (svals, svecs) = exact_diagonalize_number_sector(&h, 1).unwrap();
        assert_eq!(svals.len(), 2);
        assert!((svals[0] + 1.0).abs() < 1e-12);
        assert!((svals[1] - 1.0).abs() < 1e-12);
        // Sector columns live in the full space and vanish outside popcount 1.
        assert!(svecs[(0, 0)].norm() < 1e-14);
        assert!(svecs[(3, 0)].norm() < 1e-14);

        // An operator that leaks out of the sector is rejected.
        assert!(exact_diagonalize_number_sector(&sum1("X"), 0).is_err());
    }

    #[test]
    fn exact_evolution_of_plus_under_z() {
        let h = sum1("Z");
        let plus = State::from_amplitudes(
            1,
            vec![c(std::f64::consts::FRAC_1_SQRT_2, 0.0), c(std::f64::consts::FRAC_1_SQRT_2, 0.0)],
        )
        .unwrap();
        let out = exact_evolve(&h, FRAC_PI_2, &plus).unwrap();
        // exp(-i pi/2 Z)|+> = (|0> -i e^{i pi} ... ) explicit: diag(e^{-i pi/2}, e^{i pi/2})
        let a0 = out.amplitudes()[0];
        let a1 = out.amplitudes()[1];
        assert!((a0 - c(0.0, -std::f64::consts::FRAC_1_SQRT_2)).norm() < 1e-12);
        assert!((a1 - c(0.0, std::f64::consts::FRAC_1_SQRT_2)).norm() < 1e-12);
    }

    #[test]
    fn expectations_on_known_states() {
        let zero = State::zero(1).unwrap();
        assert!((Observable::WireZ(0).evaluate(&zero).unwrap() - 1.0).abs() < 1e-15);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let plus = State::from_amplitudes(1, vec![c(r, 0.0), c(r, 0.0)]).unwrap();
        assert!((expectation(&plus, &sum1("X")).unwrap().re - 1.0).abs() < 1e-14);
        let ipl = State::from_amplitudes(1, vec![c(r, 0.0), c(0.0, r)]).unwrap();
        assert!((Observable::WireY(0).evaluate(&ipl).unwrap() - 1.0).abs() < 1e-14);
        // Identity reads exactly one.
        let v = expectation(&ipl, &sum1("I")).unwrap();
        assert_eq!(v.re, 1.0);
        assert_eq!(v.im, 0.0);
    }

    #[test]
    fn mapped_expectation_reads_data_block() {
        // psi = |1> on wire 0, ancilla |0> on wire 1.
        let psi = State::basis(2, 0b10).unwrap();
        let z = sum1("Z");
        let v = expectation_mapped(&psi, &z, &[0]).unwrap();
        assert!((v.re + 1.0).abs() < 1e-15);
        let v = expectation_mapped(&psi, &z, &[1]).unwrap();
        assert!((v.re - 1.0).abs() < 1e-15);
    }

    fn idle_circuit(n_layers: usize, ns: f64) -> Circuit {
        let mut circ = Circuit::new(Registers::data_only(1)).unwrap();
        for _ in 0..n_layers {
            circ.push(Gate::Idle { ns }).unwrap();
        }
        circ
    }

    #[test]
    fn relaxation_decay_matches_exponential() {
        // Start in |1>, pure sigma- noise: excited population decays as
        // exp(-Gamma t), so 2 p1 - 1 tracks 2 exp(-Gamma t) - 1.
        let gamma = 1e-4;
        let circ = idle_circuit(50, 200.0);
        let noise = NoiseModel {
            jumps: vec![JumpOp { wire: 0, kind: JumpKind::Lower, rate_per_ns: gamma }],
        };
        let cfg = TrajectoryConfig { n_trajectories: 500, base_seed: 11, ..Default::default() };
        let init = State::basis(1, 1).unwrap();
        let obs = vec![("z".to_string(), Observable::WireZ(0))];
        let res = run_trajectories(
            &circ,
            &init,
            &noise,
            &DeviceModel::default(),
            &cfg,
            &obs,
        )
        .unwrap();
        for (ti, &t) in res.times_ns.iter().enumerate() {
            let expect = 2.0 * (-gamma * t).exp() - 1.0;
            // our Z convention has |1> at -1, so negate
            let got = -res.means[0][ti];
            let se = res.stderrs[0][ti].max(1e-6);
            assert!(
                (got - expect).abs() <= 3.0 * se + 0.01,
                "t={t} got={got} expect={expect} se={se}"
            );
        }
    }

    #[test]
    fn dephasing_decays_coherence() {
        // |+> under sigma_z jumps at rate g: <X>(t) = exp(-2 g t).
        let g = 5e-5;
        let mut circ = Circuit::new(Registers::data_only(1)).unwrap();
        circ.push(Gate::H(0)).unwrap();
        for _ in 0..40 {
            circ.push(Gate::Idle { ns: 250.0 }).unwrap();
        }
        let noise = NoiseModel {
            jumps: vec![JumpOp { wire: 0, kind: JumpKind::Dephase, rate_per_ns: g }],
        };
        let cfg = TrajectoryConfig { n_trajectories: 400, base_seed: 23, ..Default::default() };
        let obs = vec![("x".to_string(), Observable::DataPauli(sum1("X")))];
        let dev = DeviceModel { base_ns: 0.0001, scaling: CavityScaling::Flat, ..Default::default() };
        let res =
            run_trajectories(&circ, &State::zero(1).unwrap(), &noise, &dev, &cfg, &obs).unwrap();
        let last = *res.times_ns.last().unwrap();
        let got = *res.means[0].last().unwrap();
        let expect = (-2.0 * g * last).exp();
        let se = res.stderrs[0].last().unwrap().max(1e-6);
        assert!((got - expect).abs() <= 3.0 * se + 0.01, "got={got} expect={expect}");
    }

    #[test]
    fn zero_rates_reproduce_unitary_run_bitwise() {
        let regs = Registers::data_only(2);
        let mut circ = Circuit::new(regs).unwrap();
        circ.push_all([Gate::H(0), Gate::Cnot(0, 1), Gate::Rz(1, 0.37), Gate::H(0)]).unwrap();
        let init = State::zero(2).unwrap();
        let pure = run(&circ, &init).unwrap();
        let noise = NoiseModel {
            jumps: vec![JumpOp { wire: 0, kind: JumpKind::Lower, rate_per_ns: 0.0 }],
        };
        let cfg = TrajectoryConfig {
            n_trajectories: 3,
            record_every_layer: false,
            ..Default::default()
        };
        let z = vec![
            ("z0".to_string(), Observable::WireZ(0)),
            ("z1".to_string(), Observable::WireZ(1)),
        ];
        let res = run_trajectories(
            &circ,
            &init,
            &noise,
            &DeviceModel::default(),
            &cfg,
            &z,
        )
        .unwrap();
        let z0 = Observable::WireZ(0).evaluate(&pure).unwrap();
        let z1 = Observable::WireZ(1).evaluate(&pure).unwrap();
        assert_eq!(res.means[0][0], z0);
        assert_eq!(res.means[1][0], z1);
        assert_eq!(res.stderrs[0][0], 0.0);
        assert!(res.warnings.is_empty());
    }

    #[test]
    fn trajectories_are_bit_exact_reproducible() {
        let circ = idle_circuit(5, 100.0);
        let noise = NoiseModel {
            jumps: vec![
                JumpOp { wire: 0, kind: JumpKind::Lower, rate_per_ns: 1e-4 },
                JumpOp { wire: 0, kind: JumpKind::Dephase, rate_per_ns: 2e-4 },
            ],
        };
        let cfg = TrajectoryConfig { n_trajectories: 40, base_seed: 99, ..Default::default() };
        let init = State::basis(1, 1).unwrap();
        let obs = vec![("z".to_string(), Observable::WireZ(0))];
        let dev = DeviceModel::default();
        let a = run_trajectories(&circ, &init, &noise, &dev, &cfg, &obs).unwrap();
        let b = run_trajectories(&circ, &init, &noise, &dev, &cfg, &obs).unwrap();
        assert_eq!(a.to_csv(), b.to_csv());
    }

    #[test]
    fn zero_duration_schedule_warns() {
        let mut circ = Circuit::new(Registers::data_only(1)).unwrap();
        circ.push(Gate::Idle { ns: 0.0 }).unwrap();
        let noise = NoiseModel {
            jumps: vec![JumpOp { wire: 0, kind: JumpKind::Lower, rate_per_ns: 1e-4 }],
        };
        let cfg = TrajectoryConfig { n_trajectories: 2, ..Default::default() };
        let res = run_trajectories(
            &circ,
            &State::zero(1).unwrap(),
            &noise,
            &DeviceModel::default(),
            &cfg,
            &[("z".to_string(), Observable::WireZ(0))],
        )
        .unwrap();
        assert_eq!(res.warnings.len(), 1);
    }

    #[test]
    fn csv_layout() {
        let circ = idle_circuit(2, 50.0);
        let cfg = TrajectoryConfig { n_trajectories: 2, base_seed: 1, ..Default::default() };
        let res = run_trajectories(
            &circ,
            &State::zero(1).unwrap(),
            &NoiseModel::none(),
            &DeviceModel::default(),
            &cfg,
            &[("z".to_string(), Observable::WireZ(0))],
        )
        .unwrap();
        let csv = res.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "t_ns,observable_name,mean,stderr");
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[1], "0,z,1,0");
        assert_eq!(lines[3], "100,z,1,0");
    }

    #[test]
    fn fig5_noise_covers_all_wires() {
        let regs = Registers { n_data: 2, n_cavity: 1, has_dummy: true, n_bell_pairs: 1 };
        let nm = NoiseModel::fig5(&regs);
        nm.validate(regs.total_wires()).unwrap();
        // 5 qubit wires with 3 processes each, 1 cavity wire with 1.
        assert_eq!(nm.jumps.len(), 16);
        let cavity_jumps: Vec<&JumpOp> =
            nm.jumps.iter().filter(|j| j.wire == regs.cavity(0)).collect();
        assert_eq!(cavity_jumps.len(), 1);
        assert_eq!(cavity_jumps[0].kind, JumpKind::Lower);
        assert!((cavity_jumps[0].rate_per_ns - 5e-6).abs() < 1e-18);
    }
}
