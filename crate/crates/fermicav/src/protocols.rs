//! Measurement protocols built on the compiled evolutions: Kitaev-style
//! phase estimation, iterative phase estimation with state projection,
//! interferometric correlators, and the spectral function assembled from
//! them.
//!
//! The controlled-evolution kernel applies exp(-i t H (x) X_ctrl), so a
//! control prepared in |0> accumulates the beat between the two X
//! eigenphases: <Z_a> - i<Y_a> = <psi| e^{2iHt} |psi>. Every frequency read
//! off a spectrum here is therefore 2E, and reported energies divide by two.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

use crate::backends::{
    compile_controlled_trotter, compile_trotter, CompileOptions, TrotterSpec,
};
use crate::circuit::{Circuit, DeviceModel, Gate, Registers};
use crate::encoding::{encode_majorana, encode_mode_op, Encoding, MajoranaKind};
use crate::error::{Error, Result};
use crate::pauli::{Letter, PauliSum, PauliTerm, PauliWord};
use crate::scheduler::PartitionStrategy;
use crate::simulator::{
    expectation_mapped, run, run_sampled, run_trajectories, NoiseModel, Observable, State,
    TrajectoryConfig,
};

/// Uniform sample grid t_k = k dt, k = 0..n-1.
#[derive(Clone, Copy, Debug)]
pub struct TimeGrid {
    pub dt: f64,
    pub n: usize,
}

impl TimeGrid {
    pub fn new(dt: f64, n: usize) -> TimeGrid {
        TimeGrid { dt, n }
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.n).map(|k| k as f64 * self.dt).collect()
    }

    pub fn span(&self) -> f64 {
        self.dt * (self.n.max(1) - 1) as f64
    }

    fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::InvalidArg(format!("grid spacing {} must be positive", self.dt)));
        }
        if self.n == 0 {
            return Err(Error::InvalidArg("grid needs at least one sample".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct PeaConfig {
    pub grid: TimeGrid,
    /// Trotter steps per sample interval.
    pub substeps: usize,
    pub compile: CompileOptions,
    pub grouping: PartitionStrategy,
    /// Strip pure Z/identity words from the compiled Hamiltonian and add
    /// their expectation value in the initial state back onto reported
    /// energies. Exact only when the initial state is an eigenstate of the
    /// stripped part; useful to slow the phase winding of strongly diagonal
    /// problems.
    pub subtract_diagonal: bool,
}

impl PeaConfig {
    pub fn new(grid: TimeGrid) -> PeaConfig {
        PeaConfig {
            grid,
            substeps: 4,
            compile: CompileOptions::new(crate::backends::BackendKind::Local),
            grouping: PartitionStrategy::GreedyLaminar,
            subtract_diagonal: false,
        }
    }
}

/// Windowed discrete Fourier transform on a signed frequency grid.
#[derive(Clone, Debug)]
pub struct Spectrum {
    pub omega: Vec<f64>,
    pub magnitude: Vec<f64>,
    /// Sum of the window coefficients; peak height divided by this estimates
    /// the spectral weight of an isolated line.
    pub window_sum: f64,
}

#[derive(Clone, Copy, Debug)]
pub struct SpectralPeak {
    pub omega: f64,
    pub height: f64,
    pub weight: f64,
}

#[derive(Clone, Copy, Debug)]
pub struct PeaPeak {
    pub omega: f64,
    /// omega / 2 plus any diagonal-subtraction shift.
    pub energy: f64,
    pub height: f64,
    pub weight: f64,
}

#[derive(Clone, Debug)]
pub struct PeaResult {
    pub times: Vec<f64>,
    pub za: Vec<f64>,
    pub ya: Vec<f64>,
    pub za_err: Vec<f64>,
    pub ya_err: Vec<f64>,
    /// za - i ya, the complex beat signal.
    pub signal: Vec<Complex64>,
    pub spectrum: Spectrum,
    pub peaks: Vec<PeaPeak>,
    pub energy_shift: f64,
}

/// Hann-windowed, zero-padded DFT of a uniform complex record. The
/// frequency grid is two-sided and ascending; pad_factor stretches it for
/// peak interpolation without adding information.
pub fn fourier_spectrum(
    dt: f64,
    signal: &[Complex64],
    pad_factor: usize,
    hann: bool,
) -> Result<Spectrum> {
    let k_len = signal.len();
    if k_len == 0 {
        return Err(Error::InvalidArg("empty signal".into()));
    }
    if !(dt > 0.0) {
        return Err(Error::InvalidArg("sample spacing must be positive".into()));
    }
    let window: Vec<f64> = (0..k_len)
        .map(|k| {
            if !hann || k_len == 1 {
                1.0
            } else {
                0.5 * (1.0 - (2.0 * PI * k as f64 / (k_len - 1) as f64).cos())
            }
        })
        .collect();
    let window_sum: f64 = window.iter().sum();
    let n = k_len * pad_factor.max(1);
    let mut omega = Vec::with_capacity(n);
    let mut magnitude = Vec::with_capacity(n);
    let half = (n / 2) as i64;
    for idx in 0..n as i64 {
        let m = idx - half;
        let w = 2.0 * PI * m as f64 / (n as f64 * dt);
        let mut f = Complex64::new(0.0, 0.0);
        for (k, s) in signal.iter().enumerate() {
            let phase = -w * k as f64 * dt;
            f += window[k] * s * Complex64::new(0.0, phase).exp();
        }
        omega.push(w);
        magnitude.push(f.norm());
    }
    Ok(Spectrum { omega, magnitude, window_sum })
}

/// Local maxima above `rel_threshold` of the global maximum, refined by
/// quadratic interpolation through the neighbouring bins; tallest first.
pub fn find_peaks(sp: &Spectrum, rel_threshold: f64) -> Vec<SpectralPeak> {
    let n = sp.magnitude.len();
    if n < 3 {
        return Vec::new();
    }
    let max = sp.magnitude.iter().cloned().fold(0.0f64, f64::max);
    if max <= 0.0 {
        return Vec::new();
    }
    let thr = rel_threshold * max;
    let dw = sp.omega[1] - sp.omega[0];
    let mut peaks = Vec::new();
    for m in 1..n - 1 {
        let (hl, h0, hr) = (sp.magnitude[m - 1], sp.magnitude[m], sp.magnitude[m + 1]);
        if h0 < thr || h0 < hl || h0 <= hr {
            continue;
        }
        let denom = hl - 2.0 * h0 + hr;
        let delta = if denom.abs() < 1e-300 { 0.0 } else { (0.5 * (hl - hr) / denom).clamp(-0.5, 0.5) };
        let height = h0 - 0.25 * (hl - hr) * delta;
        peaks.push(SpectralPeak {
            omega: sp.omega[m] + delta * dw,
            height,
            weight: height / sp.window_sum,
        });
    }
    peaks.sort_by(|a, b| b.height.total_cmp(&a.height));
    peaks
}

/// Splits off the pure Z/identity words; returns (rest, diagonal part).
fn split_diagonal(h: &PauliSum) -> (PauliSum, PauliSum) {
    let n = h.n_qubits();
    let mut rest = Vec::new();
    let mut diag = Vec::new();
    for t in h.terms() {
        let pure_z = t.word.support().iter().all(|&q| t.word.letter(q) == Letter::Z);
        if pure_z {
            diag.push(t.clone());
        } else {
            rest.push(t.clone());
        }
    }
    (
        PauliSum::from_terms(n, rest).expect("same width"),
        PauliSum::from_terms(n, diag).expect("same width"),
    )
}

struct PeaCircuit {
    circuit: Circuit,
    regs: Registers,
    control: usize,
    /// Record row (state after this many layers) per sample time.
    rows: Vec<usize>,
}

fn build_pea_circuit(h: &PauliSum, cfg: &PeaConfig) -> Result<PeaCircuit> {
    cfg.grid.validate()?;
    if cfg.substeps == 0 {
        return Err(Error::InvalidArg("need at least one substep per sample".into()));
    }
    let spec = TrotterSpec {
        dt: cfg.grid.dt / cfg.substeps as f64,
        n_steps: cfg.substeps,
        grouping: cfg.grouping,
    };
    let block = compile_controlled_trotter(h, &spec, &cfg.compile)?;
    let regs = block.registers;
    let control = block.control.expect("controlled compile defines a control");
    let mut circuit = Circuit::new(regs)?;
    let mut rows = vec![0usize];
    for _ in 1..cfg.grid.n {
        for layer in block.circuit.layers() {
            for g in layer {
                circuit.push(g.clone())?;
            }
        }
        // a zero-length idle seals the sample boundary so later gates cannot
        // pack backwards past the record point
        circuit.push(Gate::Idle { ns: 0.0 })?;
        rows.push(circuit.depth());
    }
    Ok(PeaCircuit { circuit, regs, control, rows })
}

fn assemble_pea(
    cfg: &PeaConfig,
    za: Vec<f64>,
    ya: Vec<f64>,
    za_err: Vec<f64>,
    ya_err: Vec<f64>,
    energy_shift: f64,
) -> Result<PeaResult> {
    let signal: Vec<Complex64> =
        za.iter().zip(ya.iter()).map(|(&z, &y)| Complex64::new(z, -y)).collect();
    let spectrum = fourier_spectrum(cfg.grid.dt, &signal, 4, true)?;
    let peaks = find_peaks(&spectrum, 0.1)
        .into_iter()
        .map(|p| PeaPeak {
            omega: p.omega,
            energy: p.omega / 2.0 + energy_shift,
            height: p.height,
            weight: p.weight,
        })
        .collect();
    Ok(PeaResult {
        times: cfg.grid.times(),
        za,
        ya,
        za_err,
        ya_err,
        signal,
        spectrum,
        peaks,
        energy_shift,
    })
}

fn pea_preprocess(h: &PauliSum, initial: &State, cfg: &PeaConfig) -> Result<(PauliSum, f64)> {
    if !cfg.subtract_diagonal {
        return Ok((h.clone(), 0.0));
    }
    let (rest, diag) = split_diagonal(h);
    let shift = crate::simulator::expectation(initial, &diag)?;
    Ok((rest, shift.re))
}

/// Register layout of the phase-estimation circuit; lets callers size
/// wire-addressed noise models before running.
pub fn pea_registers(h: &PauliSum, cfg: &PeaConfig) -> Result<Registers> {
    let h_run = if cfg.subtract_diagonal { split_diagonal(h).0 } else { h.clone() };
    Ok(build_pea_circuit(&h_run, cfg)?.regs)
}

/// Register layout of the Ramsey correlator circuit.
pub fn correlator_registers(h: &PauliSum, cfg: &CorrelatorConfig) -> Result<Registers> {
    Ok(ramsey_layout(h, cfg)?.regs)
}

/// Phase-estimation record: the control's <Z>, <Y> beat signal on a uniform
/// time grid, its windowed spectrum, and the interpolated peaks. Peaks of an
/// initial state sum C_k |E_k> sit at omega = 2 E_k with weight ~ |C_k|^2.
pub fn kitaev_pea(h: &PauliSum, initial: &State, cfg: &PeaConfig) -> Result<PeaResult> {
    if initial.n_wires() != h.n_qubits() {
        return Err(Error::QubitMismatch { expected: h.n_qubits(), got: initial.n_wires() });
    }
    let (h_run, shift) = pea_preprocess(h, initial, cfg)?;
    let pc = build_pea_circuit(&h_run, cfg)?;
    let mut st = State::embed_front(initial, pc.regs.total_wires())?;
    let n = cfg.grid.n;
    let mut za = Vec::with_capacity(n);
    let mut ya = Vec::with_capacity(n);
    let record = |st: &State, za: &mut Vec<f64>, ya: &mut Vec<f64>| -> Result<()> {
        za.push(Observable::WireZ(pc.control).evaluate(st)?);
        ya.push(Observable::WireY(pc.control).evaluate(st)?);
        Ok(())
    };
    let mut next = 0usize;
    if pc.rows[next] == 0 {
        record(&st, &mut za, &mut ya)?;
        next += 1;
    }
    for (li, layer) in pc.circuit.layers().iter().enumerate() {
        let sub = Circuit::from_gates(pc.regs, layer.iter().cloned())?;
        st = run(&sub, &st)?;
        while next < pc.rows.len() && pc.rows[next] == li + 1 {
            record(&st, &mut za, &mut ya)?;
            next += 1;
        }
    }
    let zeros = vec![0.0; n];
    assemble_pea(cfg, za, ya, zeros.clone(), zeros, shift)
}

/// Trajectory-averaged variant: same circuit, observables recorded at the
/// sealed sample boundaries while jump noise acts between layers.
pub fn kitaev_pea_noisy(
    h: &PauliSum,
    initial: &State,
    cfg: &PeaConfig,
    noise: &NoiseModel,
    dev: &DeviceModel,
    tcfg: &TrajectoryConfig,
) -> Result<PeaResult> {
    if initial.n_wires() != h.n_qubits() {
        return Err(Error::QubitMismatch { expected: h.n_qubits(), got: initial.n_wires() });
    }
    let (h_run, shift) = pea_preprocess(h, initial, cfg)?;
    let pc = build_pea_circuit(&h_run, cfg)?;
    let st = State::embed_front(initial, pc.regs.total_wires())?;
    let observables = vec![
        ("za".to_string(), Observable::WireZ(pc.control)),
        ("ya".to_string(), Observable::WireY(pc.control)),
    ];
    let mut tc = tcfg.clone();
    tc.record_every_layer = true;
    let res = run_trajectories(&pc.circuit, &st, noise, dev, &tc, &observables)?;
    let pick = |series: &[f64]| -> Vec<f64> { pc.rows.iter().map(|&r| series[r]).collect() };
    let za = pick(&res.means[0]);
    let ya = pick(&res.means[1]);
    let za_err = pick(&res.stderrs[0]);
    let ya_err = pick(&res.stderrs[1]);
    assemble_pea(cfg, za, ya, za_err, ya_err, shift)
}

#[derive(Clone, Debug)]
pub struct IpeaConfig {
    /// Base evolution time; one application of the kernel advances the
    /// estimated phase by 2 E t0 = 2 pi phi.
    pub t0: f64,
    pub n_bits: usize,
    /// Trotter steps per t0 of evolution.
    pub substeps: usize,
    pub compile: CompileOptions,
    pub grouping: PartitionStrategy,
    pub seed: u64,
}

impl IpeaConfig {
    pub fn new(t0: f64, n_bits: usize) -> IpeaConfig {
        IpeaConfig {
            t0,
            n_bits,
            substeps: 1,
            compile: CompileOptions::new(crate::backends::BackendKind::Local),
            grouping: PartitionStrategy::GreedyLaminar,
            seed: 1,
        }
    }
}

#[derive(Clone, Debug)]
pub struct IpeaResult {
    /// j_1 .. j_L, most significant first: phase = 0.j1 j2 ... binary.
    pub bits: Vec<u8>,
    pub phase: f64,
    /// phase * pi / t0, the matching energy representative (aliases by
    /// pi/t0 are the caller's concern).
    pub energy: f64,
    /// Data register after all measurements; for an eigenstate input this is
    /// the input, for a superposition it is the surviving eigencomponent.
    pub projected: State,
}

fn extract_data_block(st: &State, regs: &Registers, control: usize, bit: u8) -> Result<State> {
    let n = regs.n_data;
    let total = regs.total_wires();
    let shift = total - n;
    let tail = (bit as usize) << (total - 1 - control);
    let amps: Vec<Complex64> =
        (0..1usize << n).map(|b| st.amplitudes()[(b << shift) | tail]).collect();
    let captured: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
    if (captured - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidArg(format!(
            "ancilla wires retained population (captured {captured:.6})"
        )));
    }
    let mut out = State::from_amplitudes(n, amps)?;
    out.normalize();
    Ok(out)
}

/// Iterative phase estimation: bits are measured last-first with the
/// accumulated corrective rotation S_k = Rx(theta_k) undoing the already
/// known fraction, so each round reads one binary digit of phi. Measurement
/// sampling uses a seeded stream; eigenstate inputs give deterministic bits.
pub fn ipea(h: &PauliSum, initial: &State, cfg: &IpeaConfig) -> Result<IpeaResult> {
    if initial.n_wires() != h.n_qubits() {
        return Err(Error::QubitMismatch { expected: h.n_qubits(), got: initial.n_wires() });
    }
    if cfg.n_bits == 0 {
        return Err(Error::InvalidArg("need at least one bit".into()));
    }
    if cfg.n_bits > 24 {
        return Err(Error::InvalidArg("more than 24 bits is not practical here".into()));
    }
    if !(cfg.t0 > 0.0) || !cfg.t0.is_finite() {
        return Err(Error::InvalidArg(format!("base time {} must be positive", cfg.t0)));
    }
    if cfg.substeps == 0 {
        return Err(Error::InvalidArg("need at least one substep".into()));
    }
    let l = cfg.n_bits;
    let mut bits = vec![0u8; l + 1]; // 1-based, bits[k] = j_k
    let mut data = initial.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for k in (1..=l).rev() {
        let spec = TrotterSpec {
            dt: cfg.t0 / cfg.substeps as f64,
            n_steps: (1usize << (k - 1)) * cfg.substeps,
            grouping: cfg.grouping,
        };
        let comp = compile_controlled_trotter(h, &spec, &cfg.compile)?;
        let ctrl = comp.control.expect("controlled compile defines a control");
        let mut circuit = comp.circuit;
        let mut theta = 0.0;
        for li in 2..=(l - k + 1) {
            theta -= 2.0 * PI * bits[k + li - 1] as f64 / (1u64 << li) as f64;
        }
        if theta != 0.0 {
            circuit.push(Gate::Rx(ctrl, theta))?;
        }
        // the kernel leaves the bit in the phase between |+> and |->, so
        // after the Rx correction the control already sits at |j> in the
        // computational basis; no closing Hadamard
        circuit.push(Gate::Measure { wire: ctrl, key: 0 })?;
        let st = State::embed_front(&data, comp.registers.total_wires())?;
        let (out, records) = run_sampled(&circuit, &st, &mut rng)?;
        let j = records[&0];
        bits[k] = j;
        data = extract_data_block(&out, &comp.registers, ctrl, j)?;
    }
    let bits_out: Vec<u8> = bits[1..].to_vec();
    let phase: f64 =
        bits_out.iter().enumerate().map(|(i, &b)| b as f64 / (1u64 << (i + 1)) as f64).sum();
    Ok(IpeaResult { bits: bits_out, phase, energy: phase * PI / cfg.t0, projected: data })
}

fn push_controlled_word(c: &mut Circuit, anc: usize, w: &PauliWord) -> Result<()> {
    for q in w.support() {
        match w.letter(q) {
            Letter::X => c.push(Gate::Cnot(anc, q))?,
            Letter::Z => c.push(Gate::Cz(anc, q))?,
            Letter::Y => {
                c.push(Gate::Sdag(q))?;
                c.push(Gate::Cnot(anc, q))?;
                c.push(Gate::S(q))?;
            }
            Letter::I => unreachable!("support never yields identity"),
        }
    }
    Ok(())
}

fn single_qubit_sum(letter: Letter) -> PauliSum {
    let mut w = PauliWord::identity(1);
    w.set(0, letter);
    PauliSum::from_terms(1, vec![PauliTerm::new(Complex64::new(1.0, 0.0), w)]).expect("width 1")
}

/// Interference estimate of <W> on `state`: the ancilla arm at phase 0
/// reads the real part and the quarter-turn arm the imaginary part.
pub fn hadamard_test(state: &State, w: &PauliWord) -> Result<Complex64> {
    let n = state.n_wires();
    if w.n_qubits() != n {
        return Err(Error::QubitMismatch { expected: n, got: w.n_qubits() });
    }
    let regs = Registers { n_data: n, n_cavity: 1, has_dummy: false, n_bell_pairs: 0 };
    let anc = regs.cavity(0);
    let full = State::embed_front(state, regs.total_wires())?;
    let mut parts = [0.0f64; 2];
    for (idx, phi) in [0.0, -PI / 2.0].into_iter().enumerate() {
        let mut c = Circuit::new(regs)?;
        c.push(Gate::H(anc))?;
        if phi != 0.0 {
            c.push(Gate::Phase(anc, phi))?;
        }
        push_controlled_word(&mut c, anc, w)?;
        c.push(Gate::H(anc))?;
        let out = run(&c, &full)?;
        parts[idx] = Observable::WireZ(anc).evaluate(&out)?;
    }
    Ok(Complex64::new(parts[0], parts[1]))
}

/// <c_i^dag c_j> on a prepared state, realised as interference measurements
/// of the string words in the operator product. i == j reduces to the
/// number operator, where only the single-Z word needs a circuit.
pub fn static_correlator(state: &State, i: usize, j: usize, enc: &Encoding) -> Result<Complex64> {
    let ci_dag = encode_mode_op(i, true, enc)?;
    let cj = encode_mode_op(j, false, enc)?;
    let prod = ci_dag.mul(&cj).simplify();
    let mut total = Complex64::new(0.0, 0.0);
    for t in prod.terms() {
        if t.word.is_identity() {
            total += t.coeff;
        } else {
            total += t.coeff * hadamard_test(state, &t.word)?;
        }
    }
    Ok(total)
}

#[derive(Clone, Debug)]
pub struct CorrelatorConfig {
    pub grid: TimeGrid,
    /// Trotter steps per sample interval.
    pub substeps: usize,
    pub compile: CompileOptions,
    pub grouping: PartitionStrategy,
}

impl CorrelatorConfig {
    pub fn new(grid: TimeGrid) -> CorrelatorConfig {
        CorrelatorConfig {
            grid,
            substeps: 4,
            compile: CompileOptions::new(crate::backends::BackendKind::Local),
            grouping: PartitionStrategy::GreedyLaminar,
        }
    }
}

#[derive(Clone, Debug)]
pub struct CorrelatorResult {
    pub times: Vec<f64>,
    /// <q_i(t) q_j(0)> and <q_i(t) p_j(0)>.
    pub qq: Vec<Complex64>,
    pub qp: Vec<Complex64>,
    /// Particle and hole propagators assembled from the two records.
    pub gp: Vec<Complex64>,
    pub gh: Vec<Complex64>,
}

fn majorana_word(mode: usize, kind: MajoranaKind, enc: &Encoding) -> Result<(PauliWord, f64)> {
    let sum = encode_majorana(mode, kind, enc)?;
    let t = &sum.terms()[0];
    debug_assert!(t.coeff.im.abs() < 1e-12);
    Ok((t.word.clone(), t.coeff.re))
}

struct RamseyLayout {
    regs: Registers,
    anc: usize,
    /// Evolution block re-addressed into the extended register file.
    block: Circuit,
}

/// The evolution runs on its own backend registers; the interference
/// ancilla takes the first cavity slot and every compiled wire shifts
/// around it.
fn ramsey_layout(h: &PauliSum, cfg: &CorrelatorConfig) -> Result<RamseyLayout> {
    cfg.grid.validate()?;
    if cfg.substeps == 0 {
        return Err(Error::InvalidArg("need at least one substep per sample".into()));
    }
    let spec = TrotterSpec {
        dt: cfg.grid.dt / cfg.substeps as f64,
        n_steps: cfg.substeps,
        grouping: cfg.grouping,
    };
    let evo = compile_trotter(h, &spec, &cfg.compile)?;
    let evo_regs = evo.registers;
    let regs = Registers {
        n_data: evo_regs.n_data,
        n_cavity: evo_regs.n_cavity + 1,
        has_dummy: evo_regs.has_dummy,
        n_bell_pairs: 0,
    };
    let mut remap = |w: usize| -> usize {
        if w < evo_regs.n_data {
            w
        } else if evo_regs.has_dummy && w == evo_regs.dummy().unwrap() {
            regs.dummy().unwrap()
        } else {
            w + 1
        }
    };
    let mut block = Circuit::new(regs)?;
    for layer in evo.circuit.layers() {
        for g in layer {
            block.push(g.map_wires(&mut remap))?;
        }
    }
    Ok(RamseyLayout { regs, anc: regs.cavity(0), block })
}

/// Ramsey interferometry of <A_i(t) B_j(0)> for Majorana insertions A, B:
/// ancilla split, controlled B, free evolution, controlled A, then the
/// ancilla's X and Y quadratures read the complex correlator. Returns the
/// qq and qp records with G^p = (qq + i qp)/2 and G^h = (qq - i qp)/2.
pub fn dynamical_correlator(
    h: &PauliSum,
    state: &State,
    i: usize,
    j: usize,
    enc: &Encoding,
    cfg: &CorrelatorConfig,
) -> Result<CorrelatorResult> {
    if state.n_wires() != h.n_qubits() {
        return Err(Error::QubitMismatch { expected: h.n_qubits(), got: state.n_wires() });
    }
    let lay = ramsey_layout(h, cfg)?;
    let (wi, si) = majorana_word(i, MajoranaKind::Q, enc)?;
    let x_sum = single_qubit_sum(Letter::X);
    let y_sum = single_qubit_sum(Letter::Y);
    let run_record = |first: &PauliWord, scale: f64| -> Result<Vec<Complex64>> {
        let mut prefix = Circuit::new(lay.regs)?;
        prefix.push(Gate::H(lay.anc))?;
        push_controlled_word(&mut prefix, lay.anc, first)?;
        let mut tail = Circuit::new(lay.regs)?;
        push_controlled_word(&mut tail, lay.anc, &wi)?;
        let mut st = run(&prefix, &State::embed_front(state, lay.regs.total_wires())?)?;
        let mut out = Vec::with_capacity(cfg.grid.n);
        for k in 0..cfg.grid.n {
            if k > 0 {
                st = run(&lay.block, &st)?;
            }
            let probed = run(&tail, &st)?;
            let x = expectation_mapped(&probed, &x_sum, &[lay.anc])?.re;
            let y = expectation_mapped(&probed, &y_sum, &[lay.anc])?.re;
            out.push(scale * Complex64::new(x, y));
        }
        Ok(out)
    };
    let (wj_q, sj_q) = majorana_word(j, MajoranaKind::Q, enc)?;
    let (wj_p, sj_p) = majorana_word(j, MajoranaKind::P, enc)?;
    let qq = run_record(&wj_q, si * sj_q)?;
    let qp = run_record(&wj_p, si * sj_p)?;
    Ok(assemble_correlator(cfg.grid.times(), qq, qp))
}

fn assemble_correlator(times: Vec<f64>, qq: Vec<Complex64>, qp: Vec<Complex64>) -> CorrelatorResult {
    let i = Complex64::new(0.0, 1.0);
    let gp: Vec<Complex64> =
        qq.iter().zip(qp.iter()).map(|(&a, &b)| (a + i * b) / 2.0).collect();
    let gh: Vec<Complex64> =
        qq.iter().zip(qp.iter()).map(|(&a, &b)| (a - i * b) / 2.0).collect();
    CorrelatorResult { times, qq, qp, gp, gh }
}

/// Trajectory version: one full circuit per sample time (prefix, k blocks,
/// probe, basis close), with the ancilla quadratures read from the
/// trajectory-averaged final state.
pub fn dynamical_correlator_noisy(
    h: &PauliSum,
    state: &State,
    i: usize,
    j: usize,
    enc: &Encoding,
    cfg: &CorrelatorConfig,
    noise: &NoiseModel,
    dev: &DeviceModel,
    tcfg: &TrajectoryConfig,
) -> Result<CorrelatorResult> {
    if state.n_wires() != h.n_qubits() {
        return Err(Error::QubitMismatch { expected: h.n_qubits(), got: state.n_wires() });
    }
    let lay = ramsey_layout(h, cfg)?;
    let (wi, si) = majorana_word(i, MajoranaKind::Q, enc)?;
    let observables = vec![
        ("za".to_string(), Observable::WireZ(lay.anc)),
        ("ya".to_string(), Observable::WireY(lay.anc)),
    ];
    let mut tc = tcfg.clone();
    tc.record_every_layer = false;
    let initial = State::embed_front(state, lay.regs.total_wires())?;
    let run_record = |first: &PauliWord, scale: f64| -> Result<Vec<Complex64>> {
        let mut out = Vec::with_capacity(cfg.grid.n);
        for k in 0..cfg.grid.n {
            let mut c = Circuit::new(lay.regs)?;
            c.push(Gate::H(lay.anc))?;
            push_controlled_word(&mut c, lay.anc, first)?;
            for _ in 0..k {
                for layer in lay.block.layers() {
                    for g in layer {
                        c.push(g.clone())?;
                    }
                }
            }
            push_controlled_word(&mut c, lay.anc, &wi)?;
            // close in the X basis: <X> before equals <Z> after, <Y> flips
            c.push(Gate::H(lay.anc))?;
            let res = run_trajectories(&c, &initial, noise, dev, &tc, &observables)?;
            let x = res.means[0][0];
            let y = -res.means[1][0];
            out.push(scale * Complex64::new(x, y));
        }
        Ok(out)
    };
    let (wj_q, sj_q) = majorana_word(j, MajoranaKind::Q, enc)?;
    let (wj_p, sj_p) = majorana_word(j, MajoranaKind::P, enc)?;
    let qq = run_record(&wj_q, si * sj_q)?;
    let qp = run_record(&wj_p, si * sj_p)?;
    Ok(assemble_correlator(cfg.grid.times(), qq, qp))
}

#[derive(Clone, Debug)]
pub struct SpectralFunction {
    pub omega: Vec<f64>,
    pub a: Vec<f64>,
}

/// Smallest damping that resolves the finite record.
pub fn default_eta(grid: &TimeGrid) -> f64 {
    2.0 * PI / grid.span().max(f64::MIN_POSITIVE)
}

/// Retarded combination of the particle and hole records:
/// G(w) = -i [ int dt e^{i(w+i eta)t} G^p(t) + int dt e^{-i(w-i eta)t} G^h(t) ],
/// A = -2 Im G, by trapezoidal quadrature over the finite grid.
pub fn spectral_function(
    corr: &CorrelatorResult,
    eta: f64,
    omega: &[f64],
) -> Result<SpectralFunction> {
    if !(eta > 0.0) || !eta.is_finite() {
        return Err(Error::InvalidArg(format!("damping {eta} must be positive")));
    }
    let nt = corr.times.len();
    if nt < 2 {
        return Err(Error::InvalidArg("need at least two time samples".into()));
    }
    let dt = corr.times[1] - corr.times[0];
    let mut a = Vec::with_capacity(omega.len());
    for &w in omega {
        let mut g = Complex64::new(0.0, 0.0);
        for (k, &t) in corr.times.iter().enumerate() {
            let trap = if k == 0 || k == nt - 1 { 0.5 * dt } else { dt };
            let damp = (-eta * t).exp();
            g += trap * damp * Complex64::new(0.0, w * t).exp() * corr.gp[k];
            g += trap * damp * Complex64::new(0.0, -w * t).exp() * corr.gh[k];
        }
        g *= Complex64::new(0.0, -1.0);
        a.push(-2.0 * g.im);
    }
    Ok(SpectralFunction { omega: omega.to_vec(), a })
}

/// Trapezoidal integral of A over the grid divided by 2 pi; 1 for a fully
/// resolved single mode.
pub fn spectral_sum_rule(sf: &SpectralFunction) -> f64 {
    let n = sf.omega.len();
    if n < 2 {
        return 0.0;
    }
    let mut s = 0.0;
    for k in 0..n - 1 {
        s += 0.5 * (sf.a[k] + sf.a[k + 1]) * (sf.omega[k + 1] - sf.omega[k]);
    }
    s / (2.0 * PI)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backends::BackendKind;
    use crate::models::build_spinless_chain;
    use crate::simulator::ground_state_in_sector;

    fn c64(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn sum_z(coeff: f64) -> PauliSum {
        PauliSum::from_terms(
            1,
            vec![PauliTerm::new(c64(coeff, 0.0), "Z".parse().unwrap())],
        )
        .unwrap()
    }

    #[test]
    fn pea_single_eigenstate_beats_at_twice_energy() {
        // h = Z with |0>: E = +1, signal e^{2it}, za = cos(2t) exactly.
        let h = sum_z(1.0);
        let cfg = PeaConfig::new(TimeGrid::new(0.1, 40));
        let res = kitaev_pea(&h, &State::basis(1, 0).unwrap(), &cfg).unwrap();
        for (k, &t) in res.times.iter().enumerate() {
            assert!((res.za[k] - (2.0 * t).cos()).abs() < 1e-10);
            assert!((res.ya[k] + (2.0 * t).sin()).abs() < 1e-10);
            assert!(res.za[k].abs() <= 1.0 + 1e-12);
        }
        let top = &res.peaks[0];
        assert!((top.energy - 1.0).abs() < 0.05, "energy {}", top.energy);
        assert!(top.weight > 0.9, "weight {}", top.weight);
    }

    #[test]
    fn pea_mixed_state_shows_both_lines() {
        let h = sum_z(1.0);
        let psi = State::from_amplitudes(
            1,
            vec![c64(std::f64::consts::FRAC_1_SQRT_2, 0.0), c64(std::f64::consts::FRAC_1_SQRT_2, 0.0)],
        )
        .unwrap();
        let cfg = PeaConfig::new(TimeGrid::new(0.1, 60));
        let res = kitaev_pea(&h, &psi, &cfg).unwrap();
        assert!(res.peaks.len() >= 2);
        let mut energies: Vec<f64> = res.peaks[..2].iter().map(|p| p.energy).collect();
        energies.sort_by(f64::total_cmp);
        assert!((energies[0] + 1.0).abs() < 0.05);
        assert!((energies[1] - 1.0).abs() < 0.05);
        for p in &res.peaks[..2] {
            assert!((p.weight - 0.5).abs() < 0.1, "weight {}", p.weight);
        }
    }

    #[test]
    fn pea_peak_interpolation_hits_off_bin_energy() {
        // Energy engineered off the padded frequency grid.
        let e = 0.7317;
        let h = sum_z(e);
        let cfg = PeaConfig::new(TimeGrid::new(0.2, 50));
        let res = kitaev_pea(&h, &State::basis(1, 0).unwrap(), &cfg).unwrap();
        let top = &res.peaks[0];
        let bin = res.spectrum.omega[1] - res.spectrum.omega[0];
        assert!((top.omega - 2.0 * e).abs() < bin, "omega {} vs {}", top.omega, 2.0 * e);
    }

    #[test]
    fn pea_diagonal_subtraction_restores_energies() {
        // Diagonal part is a pure shift for a 1-qubit Z Hamiltonian, so the
        // subtracted run must reproduce the same energy via the shift.
        let h = PauliSum::from_terms(
            1,
            vec![
                PauliTerm::new(c64(0.8, 0.0), "Z".parse().unwrap()),
                PauliTerm::new(c64(0.3, 0.0), "I".parse().unwrap()),
            ],
        )
        .unwrap();
        let mut cfg = PeaConfig::new(TimeGrid::new(0.15, 48));
        cfg.subtract_diagonal = true;
        let res = kitaev_pea(&h, &State::basis(1, 0).unwrap(), &cfg).unwrap();
        // everything was diagonal: flat signal, single zero-frequency peak
        assert!((res.energy_shift - 1.1).abs() < 1e-12);
        assert!((res.peaks[0].energy - 1.1).abs() < 1e-9);
    }

    #[test]
    fn noisy_pea_with_zero_rates_matches_noiseless() {
        let h = sum_z(0.8);
        let cfg = PeaConfig::new(TimeGrid::new(0.2, 12));
        let psi = State::basis(1, 0).unwrap();
        let clean = kitaev_pea(&h, &psi, &cfg).unwrap();
        let noisy = kitaev_pea_noisy(
            &h,
            &psi,
            &cfg,
            &NoiseModel::none(),
            &DeviceModel::default(),
            &TrajectoryConfig { n_trajectories: 3, base_seed: 5, ..Default::default() },
        )
        .unwrap();
        for k in 0..cfg.grid.n {
            assert!((clean.za[k] - noisy.za[k]).abs() < 1e-12);
            assert!((clean.ya[k] - noisy.ya[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn noise_damps_the_beat_signal() {
        let h = sum_z(0.8);
        let cfg = PeaConfig::new(TimeGrid::new(0.2, 10));
        let psi = State::basis(1, 0).unwrap();
        let clean = kitaev_pea(&h, &psi, &cfg).unwrap();
        let noise = NoiseModel {
            jumps: vec![crate::simulator::JumpOp {
                wire: 1,
                kind: crate::simulator::JumpKind::Dephase,
                rate_per_ns: 2e-4,
            }],
        };
        let noisy = kitaev_pea_noisy(
            &h,
            &psi,
            &cfg,
            &noise,
            &DeviceModel::default(),
            &TrajectoryConfig { n_trajectories: 60, base_seed: 9, ..Default::default() },
        )
        .unwrap();
        let amp = |r: &PeaResult| r.signal.last().unwrap().norm();
        assert!(amp(&noisy) < amp(&clean) - 0.05, "{} vs {}", amp(&noisy), amp(&clean));
    }

    #[test]
    fn ipea_reads_exact_three_bit_phase() {
        // |1> under h = Z has E = -1; t0 tuned so phi = 0.101b = 0.625.
        let t0 = (1.0 - 0.625) * PI;
        let h = sum_z(1.0);
        let cfg = IpeaConfig::new(t0, 3);
        let res = ipea(&h, &State::basis(1, 1).unwrap(), &cfg).unwrap();
        assert_eq!(res.bits, vec![1, 0, 1]);
        assert!((res.phase - 0.625).abs() < 1e-12);
    }

    #[test]
    fn ipea_zero_phase_gives_zero_bits() {
        // E = 0 eigenstate: |1> under (Z + I)/2.
        let h = PauliSum::from_terms(
            1,
            vec![
                PauliTerm::new(c64(0.5, 0.0), "Z".parse().unwrap()),
                PauliTerm::new(c64(0.5, 0.0), "I".parse().unwrap()),
            ],
        )
        .unwrap();
        let cfg = IpeaConfig::new(0.7, 4);
        let res = ipea(&h, &State::basis(1, 1).unwrap(), &cfg).unwrap();
        assert_eq!(res.bits, vec![0, 0, 0, 0]);
        assert_eq!(res.phase, 0.0);
    }

    #[test]
    fn ipea_generic_phase_within_last_bit() {
        let mut cfg = IpeaConfig::new(0.9, 8);
        cfg.seed = 3;
        for &e in &[0.3141, -0.777, 1.234] {
            let h = sum_z(-e); // |1> eigenstate has E = +e
            let res = ipea(&h, &State::basis(1, 1).unwrap(), &cfg).unwrap();
            let phi_true = (e * cfg.t0 / PI).rem_euclid(1.0);
            let mut d = (res.phase - phi_true).abs();
            d = d.min(1.0 - d);
            assert!(d <= 1.0 / 256.0 + 1e-12, "phase {} vs {}", res.phase, phi_true);
        }
    }

    #[test]
    fn ipea_projects_a_superposition() {
        // Equal mix of E = +1 and E = -1; sampling collapses onto one of
        // them and the projected register must match the surviving branch.
        let h = sum_z(1.0);
        let t0 = PI / 4.0; // phases 0.25 and 0.75, both exact in 2 bits
        let psi = State::from_amplitudes(
            1,
            vec![c64(std::f64::consts::FRAC_1_SQRT_2, 0.0), c64(std::f64::consts::FRAC_1_SQRT_2, 0.0)],
        )
        .unwrap();
        let mut seen = std::collections::BTreeSet::new();
        for seed in 0..6 {
            let mut cfg = IpeaConfig::new(t0, 4);
            cfg.seed = seed;
            let res = ipea(&h, &psi, &cfg).unwrap();
            let expect_index = if (res.phase - 0.25).abs() < 1e-12 {
                0 // phi = +E t0/pi for E = +1 (eigenstate |0>)
            } else {
                assert!((res.phase - 0.75).abs() < 1e-12, "phase {}", res.phase);
                1
            };
            seen.insert(expect_index);
            let amp = res.projected.amplitudes()[expect_index].norm();
            assert!((amp - 1.0).abs() < 1e-9);
        }
        assert_eq!(seen.len(), 2, "both branches should appear across seeds");
    }

    #[test]
    fn hadamard_test_reads_complex_expectations() {
        // |+> state: <X> = 1; (|0> + i|1>)/sqrt2: <Y> = 1.
        let plus = State::from_amplitudes(
            1,
            vec![c64(std::f64::consts::FRAC_1_SQRT_2, 0.0), c64(std::f64::consts::FRAC_1_SQRT_2, 0.0)],
        )
        .unwrap();
        let x: PauliWord = "X".parse().unwrap();
        let v = hadamard_test(&plus, &x).unwrap();
        assert!((v - c64(1.0, 0.0)).norm() < 1e-12);
        let yplus = State::from_amplitudes(
            1,
            vec![c64(std::f64::consts::FRAC_1_SQRT_2, 0.0), c64(0.0, std::f64::consts::FRAC_1_SQRT_2)],
        )
        .unwrap();
        let y: PauliWord = "Y".parse().unwrap();
        let v = hadamard_test(&yplus, &y).unwrap();
        assert!((v - c64(1.0, 0.0)).norm() < 1e-12);
        // Bell state: <XX> = 1.
        let bell = State::from_amplitudes(
            2,
            vec![
                c64(std::f64::consts::FRAC_1_SQRT_2, 0.0),
                c64(0.0, 0.0),
                c64(0.0, 0.0),
                c64(std::f64::consts::FRAC_1_SQRT_2, 0.0),
            ],
        )
        .unwrap();
        let xx: PauliWord = "XX".parse().unwrap();
        assert!((hadamard_test(&bell, &xx).unwrap() - c64(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn static_correlator_on_known_states() {
        let enc = Encoding::jw(2);
        // empty register: no coherence
        let vac = State::basis(2, 0).unwrap();
        let v = static_correlator(&vac, 0, 1, &enc).unwrap();
        assert!(v.norm() < 1e-12);
        // occupied mode 0: <n_0> = 1 through the i == j path
        let one = State::basis(2, 2).unwrap(); // mode 0 is the high wire
        let n0 = static_correlator(&one, 0, 0, &enc).unwrap();
        assert!((n0 - c64(1.0, 0.0)).norm() < 1e-12);
        // hopping dimer ground state: C_01 = -1/2 for positive kappa
        let (fh, _) = build_spinless_chain(2, 1.0).unwrap();
        let h_enc = crate::encoding::encode_hamiltonian(&fh, &enc).unwrap();
        let (_, gs) = ground_state_in_sector(&h_enc, 1).unwrap();
        let c01 = static_correlator(&gs, 0, 1, &enc).unwrap();
        assert!((c01 - c64(-0.5, 0.0)).norm() < 1e-9, "C01 = {c01}");
    }

    fn single_mode_number(eps: f64) -> PauliSum {
        // eps * n = eps (I - Z)/2 on one qubit
        PauliSum::from_terms(
            1,
            vec![
                PauliTerm::new(c64(eps / 2.0, 0.0), "I".parse().unwrap()),
                PauliTerm::new(c64(-eps / 2.0, 0.0), "Z".parse().unwrap()),
            ],
        )
        .unwrap()
    }

    #[test]
    fn free_mode_propagator_from_vacuum() {
        let eps = 1.3;
        let h = single_mode_number(eps);
        let enc = Encoding::jw(1);
        let vac = State::basis(1, 0).unwrap();
        let cfg = CorrelatorConfig::new(TimeGrid::new(0.15, 30));
        let res = dynamical_correlator(&h, &vac, 0, 0, &enc, &cfg).unwrap();
        assert!((res.qq[0] - c64(1.0, 0.0)).norm() < 1e-12, "q^2 = 1 at t = 0");
        for (k, &t) in res.times.iter().enumerate() {
            // both terms commute, so Trotterisation is exact here
            let expect = c64(0.0, -eps * t).exp();
            assert!((res.gp[k] - expect).norm() < 1e-8, "t {t}: {} vs {expect}", res.gp[k]);
            assert!(res.gh[k].norm() < 1e-8);
        }
    }

    #[test]
    fn occupied_mode_shows_only_hole_response() {
        let eps = 0.9;
        let h = single_mode_number(eps);
        let enc = Encoding::jw(1);
        let filled = State::basis(1, 1).unwrap();
        let cfg = CorrelatorConfig::new(TimeGrid::new(0.2, 20));
        let res = dynamical_correlator(&h, &filled, 0, 0, &enc, &cfg).unwrap();
        for (k, &t) in res.times.iter().enumerate() {
            let expect = c64(0.0, eps * t).exp();
            assert!((res.gh[k] - expect).norm() < 1e-8);
            assert!(res.gp[k].norm() < 1e-8);
        }
    }

    #[test]
    fn spectral_function_is_a_lorentzian_line() {
        let eps = 1.1;
        let grid = TimeGrid::new(0.05, 400);
        let times = grid.times();
        let gp: Vec<Complex64> = times.iter().map(|&t| c64(0.0, -eps * t).exp()).collect();
        let gh = vec![c64(0.0, 0.0); times.len()];
        let qq = gp.clone();
        let qp: Vec<Complex64> = gp.iter().map(|&g| g * c64(0.0, -1.0)).collect();
        let corr = CorrelatorResult { times, qq, qp, gp, gh };
        let eta = default_eta(&grid);
        let omega: Vec<f64> = (0..1200).map(|k| -6.0 + k as f64 * 0.01).collect();
        let sf = spectral_function(&corr, eta, &omega).unwrap();
        let (mut best_w, mut best_a) = (0.0, f64::MIN);
        for (k, &w) in sf.omega.iter().enumerate() {
            if sf.a[k] > best_a {
                best_a = sf.a[k];
                best_w = w;
            }
        }
        assert!((best_w - eps).abs() < 0.05, "peak at {best_w}, want {eps}");
        let expected_height = 2.0 / eta;
        assert!((best_a - expected_height).abs() / expected_height < 0.1);
        let sum = spectral_sum_rule(&sf);
        assert!((sum - 1.0).abs() < 0.05, "sum rule {sum}");
        for &a in &sf.a {
            assert!(a > -1e-6, "negative spectral weight {a}");
        }
    }

    #[test]
    fn hole_record_peaks_at_positive_energy() {
        // G^h = e^{+i eps t} alone: the quadrature e^{-i w t} picks w = eps.
        let eps = 0.8;
        let grid = TimeGrid::new(0.05, 400);
        let times = grid.times();
        let gh: Vec<Complex64> = times.iter().map(|&t| c64(0.0, eps * t).exp()).collect();
        let gp = vec![c64(0.0, 0.0); times.len()];
        let qq = gh.clone();
        let qp: Vec<Complex64> = gh.iter().map(|&g| g * c64(0.0, 1.0)).collect();
        let corr = CorrelatorResult { times, qq, qp, gp, gh };
        let omega: Vec<f64> = (0..800).map(|k| -2.0 + k as f64 * 0.005).collect();
        let sf = spectral_function(&corr, default_eta(&grid), &omega).unwrap();
        let best = sf
            .omega
            .iter()
            .zip(sf.a.iter())
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(w, _)| *w)
            .unwrap();
        assert!((best - eps).abs() < 0.05, "hole line at {best}, want +{eps}");
    }

    #[test]
    fn spectral_function_rejects_bad_damping() {
        let grid = TimeGrid::new(0.1, 4);
        let times = grid.times();
        let z = vec![c64(0.0, 0.0); 4];
        let corr = CorrelatorResult { times, qq: z.clone(), qp: z.clone(), gp: z.clone(), gh: z };
        assert!(spectral_function(&corr, 0.0, &[0.0]).is_err());
        assert!(spectral_function(&corr, -1.0, &[0.0]).is_err());
    }

    #[test]
    fn correlator_backends_agree() {
        let (fh, _) = build_spinless_chain(2, 0.7).unwrap();
        let enc = Encoding::jw(2);
        let h = crate::encoding::encode_hamiltonian(&fh, &enc).unwrap();
        let (_, gs) = ground_state_in_sector(&h, 1).unwrap();
        let grid = TimeGrid::new(0.25, 8);
        let mut results = Vec::new();
        for backend in [BackendKind::Local, BackendKind::CavitySeries, BackendKind::CavityParallel]
        {
            let mut cfg = CorrelatorConfig::new(grid);
            cfg.compile = CompileOptions::new(backend);
            cfg.compile.hybrid_cutoff = 0;
            results.push(dynamical_correlator(&h, &gs, 0, 1, &enc, &cfg).unwrap());
        }
        for other in &results[1..] {
            for k in 0..grid.n {
                assert!((results[0].gp[k] - other.gp[k]).norm() < 1e-9);
                assert!((results[0].gh[k] - other.gh[k]).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn noisy_correlator_with_zero_rates_matches_noiseless() {
        let eps = 1.3;
        let h = single_mode_number(eps);
        let enc = Encoding::jw(1);
        let vac = State::basis(1, 0).unwrap();
        let cfg = CorrelatorConfig::new(TimeGrid::new(0.3, 5));
        let clean = dynamical_correlator(&h, &vac, 0, 0, &enc, &cfg).unwrap();
        let noisy = dynamical_correlator_noisy(
            &h,
            &vac,
            0,
            0,
            &enc,
            &cfg,
            &NoiseModel::none(),
            &DeviceModel::default(),
            &TrajectoryConfig { n_trajectories: 2, base_seed: 4, ..Default::default() },
        )
        .unwrap();
        for k in 0..cfg.grid.n {
            assert!((clean.qq[k] - noisy.qq[k]).norm() < 1e-10);
            assert!((clean.qp[k] - noisy.qp[k]).norm() < 1e-10);
        }
    }
}
