//! Compilation of Pauli-sum evolutions into circuits.
//!
//! Three backends share one Trotter assembler. `Local` exponentiates each
//! term with a CNOT ladder. `CavitySeries` replaces the ladder by one
//! ancilla-controlled string gate pair around an ancilla rotation.
//! `CavityParallel` multiplexes a whole commuting group: every term gets its
//! own ancilla, the type-sorted string blocks are driven as single pulses,
//! and the pairwise reordering signs are absorbed by controlled-Z pairs on
//! the ancillae, applied through a dummy qubit so the collect and erase
//! stages stay one collective pulse each.
//!
//! Conventions: a term (c, W) compiles to exp(-i dt c W); rotation angles
//! are 2 c dt. Controlled compiles realise exp(-i dt H (x) X_ctrl), whose
//! restriction to the control |+>/|-> eigenstates is exp(-/+ i dt H).

use num_complex::Complex64;

use crate::circuit::{Circuit, Gate, Registers};
use crate::error::{Error, Result};
use crate::pauli::{Letter, PauliSum, PauliTerm, PauliWord};
use crate::scheduler::{plan_group, CommutingGroup, ParallelPlan, PartitionStrategy};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BackendKind {
    Local,
    CavitySeries,
    CavityParallel,
}

/// First-order Trotterisation parameters.
#[derive(Clone, Debug)]
pub struct TrotterSpec {
    pub dt: f64,
    pub n_steps: usize,
    pub grouping: PartitionStrategy,
}

impl TrotterSpec {
    pub fn new(dt: f64, n_steps: usize) -> TrotterSpec {
        // Laminar grouping keeps structured Hamiltonians wave-ordered; the
        // degree-greedy strategy packs every mutually commuting string into
        // one group, which serialises overlapping rows on the ladder and
        // series backends.
        TrotterSpec { dt, n_steps, grouping: PartitionStrategy::GreedyLaminar }
    }

    fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::InvalidArg(format!("Trotter step {} must be positive", self.dt)));
        }
        if self.n_steps == 0 {
            return Err(Error::InvalidArg("need at least one Trotter step".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct CompileOptions {
    pub backend: BackendKind,
    /// On cavity backends, terms with support at most this size keep using
    /// local gates; strings longer than the cutoff go through the cavity.
    /// Zero routes everything through the cavity.
    pub hybrid_cutoff: usize,
    /// Upper bound on terms multiplexed into one parallel gadget; `None`
    /// takes whole commuting groups.
    pub parallel_group_cap: Option<usize>,
    /// Number of string ancillae available to the series backend; `None`
    /// sizes the pool to the largest commuting group so disjoint strings
    /// can overlap in time.
    pub series_pool: Option<usize>,
}

impl CompileOptions {
    pub fn new(backend: BackendKind) -> CompileOptions {
        CompileOptions { backend, hybrid_cutoff: 2, parallel_group_cap: None, series_pool: None }
    }
}

/// A compiled evolution plus the layout information needed to run it.
#[derive(Clone, Debug)]
pub struct CompiledEvolution {
    pub circuit: Circuit,
    pub registers: Registers,
    /// Control wire of a controlled compile.
    pub control: Option<usize>,
    /// Terms per step routed through cavity gadgets / local ladders.
    pub cavity_terms_per_step: usize,
    pub local_terms_per_step: usize,
    pub groups: Vec<CommutingGroup>,
}

fn real_coeff(t: &PauliTerm) -> Result<f64> {
    if t.coeff.im.abs() > 1e-12 {
        return Err(Error::NonHermitian {
            what: "term coefficient",
            detail: format!("coefficient {} has an imaginary part", t.coeff),
        });
    }
    Ok(t.coeff.re)
}

fn push_basis_open(c: &mut Circuit, word: &PauliWord) -> Result<()> {
    for q in word.support() {
        match word.letter(q) {
            Letter::X => c.push(Gate::H(q))?,
            Letter::Y => c.push(Gate::SdagH(q))?,
            _ => {}
        }
    }
    Ok(())
}

fn push_basis_close(c: &mut Circuit, word: &PauliWord) -> Result<()> {
    for q in word.support() {
        match word.letter(q) {
            Letter::X => c.push(Gate::H(q))?,
            Letter::Y => c.push(Gate::Hs(q))?,
            _ => {}
        }
    }
    Ok(())
}

/// exp(-i dt c W) from basis changes, a CNOT ladder over the support, and
/// one Rz(2 c dt) on the highest support wire. Identity words are a global
/// phase and emit nothing. When `extend_to` adds the control wire the same
/// ladder realises exp(-i dt c W (x) X_ctrl).
fn emit_local_term(
    c: &mut Circuit,
    word: &PauliWord,
    coeff: f64,
    dt: f64,
    extend_to: Option<usize>,
) -> Result<()> {
    let mut support = word.support();
    if let Some(ctrl) = extend_to {
        // control participates as an X factor, i.e. in the Hadamard basis
        c.push(Gate::H(ctrl))?;
        support.push(ctrl);
    } else if support.is_empty() {
        return Ok(());
    }
    push_basis_open(c, word)?;
    for w in support.windows(2) {
        c.push(Gate::Cnot(w[0], w[1]))?;
    }
    let last = *support.last().unwrap();
    c.push(Gate::Rz(last, 2.0 * coeff * dt))?;
    for w in support.windows(2).rev() {
        c.push(Gate::Cnot(w[0], w[1]))?;
    }
    push_basis_close(c, word)?;
    if let Some(ctrl) = extend_to {
        c.push(Gate::H(ctrl))?;
    }
    Ok(())
}

/// exp(-i dt c W) via one ancilla: conjugating an ancilla X rotation by the
/// controlled string turns it into exp(-i theta/2 X_anc (x) W), which acts
/// as the target exponential once the ancilla sits in |+>. With `prep` the
/// ancilla is taken from |0> to |+> and back; without it the rotation stays
/// on the (externally prepared) ancilla, which is how the controlled
/// variant rides on the clock cavity.
fn emit_cavity_term(
    c: &mut Circuit,
    word: &PauliWord,
    coeff: f64,
    dt: f64,
    anc: usize,
    prep: bool,
) -> Result<()> {
    let support = word.support();
    if prep {
        c.push(Gate::H(anc))?;
    }
    push_basis_open(c, word)?;
    if !support.is_empty() {
        c.push(Gate::CStringZ { ancilla: anc, qubits: support.clone() })?;
    }
    c.push(Gate::AncRx(anc, 2.0 * coeff * dt))?;
    if !support.is_empty() {
        c.push(Gate::CStringZ { ancilla: anc, qubits: support })?;
    }
    push_basis_close(c, word)?;
    if prep {
        c.push(Gate::H(anc))?;
    }
    Ok(())
}

/// One multiplexed commuting group. Collect stage: sign-pair CZs (as one
/// parallel CCZ pulse through the dummy), then the Z, Y, X string blocks,
/// each a single multi-string pulse inside its basis sandwich. Rotating
/// every ancilla then enacts all the term exponentials at once; the erase
/// stage mirrors the collect stage. With a control wire the rotations become
/// XX rotations against the control, turning the whole group into its
/// controlled evolution.
fn emit_parallel_chunk(
    c: &mut Circuit,
    h: &PauliSum,
    plan: &ParallelPlan,
    dt: f64,
    ancs: &[usize],
    dummy: Option<usize>,
    control: Option<usize>,
) -> Result<()> {
    let k = plan.group.terms.len();
    debug_assert!(ancs.len() >= k);
    debug_assert!(!plan.global_flip);

    let d_gate = if plan.sign_pairs.is_empty() {
        None
    } else {
        let target = dummy.ok_or_else(|| {
            Error::Registers("parallel gadget with sign pairs needs the dummy qubit".into())
        })?;
        let pairs: Vec<(usize, usize)> = plan
            .sign_pairs
            .iter()
            .map(|&(mu, nu)| (ancs[plan.ancilla_of_term[mu]], ancs[plan.ancilla_of_term[nu]]))
            .collect();
        Some((Gate::ParallelCcz { pairs, target }, target))
    };

    let mut zs: Vec<(usize, Vec<usize>)> = Vec::new();
    let mut ys: Vec<(usize, Vec<usize>)> = Vec::new();
    let mut xs: Vec<(usize, Vec<usize>)> = Vec::new();
    for rank in 0..k {
        let anc = ancs[plan.ancilla_of_term[rank]];
        let sp = &plan.splits[rank];
        for (part, out) in [(&sp.sz, &mut zs), (&sp.sy, &mut ys), (&sp.sx, &mut xs)] {
            let sup = part.support();
            if !sup.is_empty() {
                out.push((anc, sup));
            }
        }
    }
    let union_of = |block: &[(usize, Vec<usize>)]| -> Vec<usize> {
        let mut u: Vec<usize> = block.iter().flat_map(|(_, qs)| qs.iter().copied()).collect();
        u.sort_unstable();
        u.dedup();
        u
    };
    let uy = union_of(&ys);
    let ux = union_of(&xs);

    let push_block = |c: &mut Circuit,
                      strings: &[(usize, Vec<usize>)],
                      open: Option<fn(usize) -> Gate>,
                      close: Option<fn(usize) -> Gate>,
                      wires: &[usize]|
     -> Result<()> {
        if strings.is_empty() {
            return Ok(());
        }
        if let Some(mk) = open {
            for &q in wires {
                c.push(mk(q))?;
            }
        }
        c.push(Gate::CMultiStringZ { strings: strings.to_vec() })?;
        if let Some(mk) = close {
            for &q in wires {
                c.push(mk(q))?;
            }
        }
        Ok(())
    };

    // preps
    for rank in 0..k {
        c.push(Gate::H(ancs[plan.ancilla_of_term[rank]]))?;
    }
    if let Some((_, target)) = &d_gate {
        c.push(Gate::Rx(*target, std::f64::consts::PI))?;
    }
    // collect
    if let Some((g, _)) = &d_gate {
        c.push(g.clone())?;
    }
    push_block(c, &zs, None, None, &[])?;
    push_block(c, &ys, Some(Gate::SdagH), Some(Gate::Hs), &uy)?;
    push_block(c, &xs, Some(Gate::H), Some(Gate::H), &ux)?;
    // rotations
    for rank in 0..k {
        let coeff = real_coeff(&h.terms()[plan.group.terms[rank]])?;
        let theta = 2.0 * coeff * dt;
        let anc = ancs[plan.ancilla_of_term[rank]];
        match control {
            Some(ctrl) => c.push(Gate::Rxx(anc, ctrl, theta))?,
            None => c.push(Gate::AncRx(anc, theta))?,
        }
    }
    // erase = mirror of collect
    push_block(c, &xs, Some(Gate::H), Some(Gate::H), &ux)?;
    push_block(c, &ys, Some(Gate::SdagH), Some(Gate::Hs), &uy)?;
    push_block(c, &zs, None, None, &[])?;
    if let Some((g, target)) = &d_gate {
        c.push(g.clone())?;
        c.push(Gate::Rx(*target, -std::f64::consts::PI))?;
    }
    for rank in 0..k {
        c.push(Gate::H(ancs[plan.ancilla_of_term[rank]]))?;
    }
    Ok(())
}

/// Standalone circuit for one term on the local backend.
pub fn compile_term_local(h_n: usize, term: &PauliTerm, dt: f64) -> Result<Circuit> {
    if term.word.n_qubits() != h_n {
        return Err(Error::QubitMismatch { expected: h_n, got: term.word.n_qubits() });
    }
    let coeff = real_coeff(term)?;
    let mut c = Circuit::new(Registers::data_only(h_n))?;
    emit_local_term(&mut c, &term.word, coeff, dt, None)?;
    Ok(c)
}

/// Standalone circuit for one term on a single-cavity backend; wire `h_n`
/// is the ancilla, prepared and returned by the circuit.
pub fn compile_term_cavity(h_n: usize, term: &PauliTerm, dt: f64) -> Result<Circuit> {
    if term.word.n_qubits() != h_n {
        return Err(Error::QubitMismatch { expected: h_n, got: term.word.n_qubits() });
    }
    let coeff = real_coeff(term)?;
    let regs = Registers { n_data: h_n, n_cavity: 1, has_dummy: false, n_bell_pairs: 0 };
    let mut c = Circuit::new(regs)?;
    emit_cavity_term(&mut c, &term.word, coeff, dt, regs.cavity(0), true)?;
    Ok(c)
}

struct Routing {
    /// Per group: indices of locally routed terms, then cavity-routed terms.
    local: Vec<Vec<usize>>,
    cavity: Vec<Vec<usize>>,
    n_local: usize,
    n_cavity: usize,
}

fn route_terms(h: &PauliSum, groups: &[CommutingGroup], opts: &CompileOptions) -> Routing {
    let mut local = Vec::with_capacity(groups.len());
    let mut cavity = Vec::with_capacity(groups.len());
    let mut n_local = 0;
    let mut n_cavity = 0;
    for g in groups {
        let mut gl = Vec::new();
        let mut gc = Vec::new();
        for &t in &g.terms {
            let w = &h.terms()[t].word;
            let to_local = match opts.backend {
                BackendKind::Local => true,
                _ => w.weight() <= opts.hybrid_cutoff,
            };
            if to_local {
                gl.push(t);
            } else {
                gc.push(t);
            }
        }
        n_local += gl.len();
        n_cavity += gc.len();
        local.push(gl);
        cavity.push(gc);
    }
    Routing { local, cavity, n_local, n_cavity }
}

fn chunked(terms: &[usize], cap: Option<usize>) -> Vec<Vec<usize>> {
    match cap {
        Some(k) if k > 0 => terms.chunks(k).map(|c| c.to_vec()).collect(),
        _ => {
            if terms.is_empty() {
                vec![]
            } else {
                vec![terms.to_vec()]
            }
        }
    }
}

fn sorted_groups(h: &PauliSum, strategy: PartitionStrategy) -> Result<Vec<CommutingGroup>> {
    let mut groups = crate::scheduler::partition_commuting(h, strategy)?;
    groups.sort_by_key(|g| g.terms[0]);
    Ok(groups)
}

fn plan_registers(
    h: &PauliSum,
    routing: &Routing,
    opts: &CompileOptions,
    controlled: bool,
) -> Result<(Registers, Option<usize>, Vec<Vec<ParallelPlan>>)> {
    let n = h.n_qubits();
    let mut plans: Vec<Vec<ParallelPlan>> = Vec::new();
    let (n_cavity, has_dummy) = match opts.backend {
        BackendKind::Local => (0, false),
        BackendKind::CavitySeries => {
            if controlled {
                (0, false) // the control doubles as the string ancilla
            } else if routing.n_cavity == 0 {
                (0, false)
            } else {
                let widest = routing.cavity.iter().map(Vec::len).max().unwrap_or(1).max(1);
                (opts.series_pool.unwrap_or(widest).max(1), false)
            }
        }
        BackendKind::CavityParallel => {
            let mut widest = 0;
            let mut dummy = false;
            for gc in &routing.cavity {
                let mut group_plans = Vec::new();
                for chunk in chunked(gc, opts.parallel_group_cap) {
                    let cg = CommutingGroup { terms: chunk };
                    let plan = plan_group(h, &cg, cg.terms.len())?;
                    widest = widest.max(cg.terms.len());
                    dummy = dummy || !plan.sign_pairs.is_empty();
                    group_plans.push(plan);
                }
                plans.push(group_plans);
            }
            (widest, dummy)
        }
    };
    let regs = Registers {
        n_data: n,
        n_cavity: n_cavity + usize::from(controlled),
        has_dummy,
        n_bell_pairs: 0,
    };
    let control = controlled.then(|| regs.cavity(0));
    Ok((regs, control, plans))
}

fn emit_step(
    c: &mut Circuit,
    h: &PauliSum,
    routing: &Routing,
    plans: &[Vec<ParallelPlan>],
    dt: f64,
    opts: &CompileOptions,
    regs: &Registers,
    control: Option<usize>,
) -> Result<()> {
    let anc_base = usize::from(control.is_some());
    for (gi, (gl, gc)) in routing.local.iter().zip(routing.cavity.iter()).enumerate() {
        for &t in gl {
            let term = &h.terms()[t];
            let coeff = real_coeff(term)?;
            match control {
                Some(ctrl) if term.word.is_identity() => {
                    c.push(Gate::Rx(ctrl, 2.0 * coeff * dt))?;
                }
                Some(ctrl) => emit_local_term(c, &term.word, coeff, dt, Some(ctrl))?,
                None => emit_local_term(c, &term.word, coeff, dt, None)?,
            }
        }
        match opts.backend {
            BackendKind::Local => {}
            BackendKind::CavitySeries => {
                let pool = regs.n_cavity - anc_base;
                for (k, &t) in gc.iter().enumerate() {
                    let term = &h.terms()[t];
                    let coeff = real_coeff(term)?;
                    match control {
                        Some(ctrl) => {
                            emit_cavity_term(c, &term.word, coeff, dt, ctrl, false)?;
                        }
                        None => {
                            let anc = regs.cavity(k % pool);
                            emit_cavity_term(c, &term.word, coeff, dt, anc, true)?;
                        }
                    }
                }
            }
            BackendKind::CavityParallel => {
                for plan in &plans[gi] {
                    let ancs: Vec<usize> = (0..plan.group.terms.len())
                        .map(|r| regs.cavity(anc_base + r))
                        .collect();
                    emit_parallel_chunk(c, h, plan, dt, &ancs, regs.dummy(), control)?;
                }
            }
        }
    }
    Ok(())
}

fn compile_impl(
    h: &PauliSum,
    spec: &TrotterSpec,
    opts: &CompileOptions,
    controlled: bool,
    groups: Vec<CommutingGroup>,
) -> Result<CompiledEvolution> {
    spec.validate()?;
    if h.n_qubits() == 0 {
        return Err(Error::InvalidArg("cannot compile over zero qubits".into()));
    }
    let mut routing = route_terms(h, &groups, opts);
    if !controlled {
        // identity terms are a global phase in the plain evolution
        for gl in &mut routing.local {
            gl.retain(|&t| !h.terms()[t].word.is_identity());
        }
        routing.n_local = routing.local.iter().map(Vec::len).sum();
    }
    let (regs, control, plans) = plan_registers(h, &routing, opts, controlled)?;
    let mut step = Circuit::new(regs)?;
    emit_step(&mut step, h, &routing, &plans, spec.dt, opts, &regs, control)?;
    let mut circuit = step.clone();
    for _ in 1..spec.n_steps {
        for layer in step.layers() {
            for g in layer {
                circuit.push(g.clone())?;
            }
        }
    }
    Ok(CompiledEvolution {
        circuit,
        registers: regs,
        control,
        cavity_terms_per_step: routing.n_cavity,
        local_terms_per_step: routing.n_local,
        groups,
    })
}

/// First-order Trotter circuit for exp(-i H dt n_steps). Terms are emitted
/// group by group (groups ordered by their first term, term order inside a
/// group ascending), so recompilation is reproducible.
pub fn compile_trotter(
    h: &PauliSum,
    spec: &TrotterSpec,
    opts: &CompileOptions,
) -> Result<CompiledEvolution> {
    compile_impl(h, spec, opts, false, sorted_groups(h, spec.grouping)?)
}

/// Same assembler, but over a caller-supplied commuting partition (e.g. a
/// model's term-class waves) instead of a scheduler strategy. Groups must
/// cover every term exactly once and commute pairwise.
pub fn compile_trotter_grouped(
    h: &PauliSum,
    spec: &TrotterSpec,
    opts: &CompileOptions,
    groups: &[CommutingGroup],
) -> Result<CompiledEvolution> {
    validate_groups(h, groups)?;
    let mut sorted = groups.to_vec();
    sorted.sort_by_key(|g| g.terms[0]);
    compile_impl(h, spec, opts, false, sorted)
}

fn validate_groups(h: &PauliSum, groups: &[CommutingGroup]) -> Result<()> {
    let mut seen = vec![false; h.len()];
    for g in groups {
        if g.terms.is_empty() {
            return Err(Error::InvalidArg("empty commuting group".into()));
        }
        for (i, &a) in g.terms.iter().enumerate() {
            if a >= h.len() || std::mem::replace(&mut seen[a], true) {
                return Err(Error::InvalidArg(format!(
                    "group term {a} out of range or repeated"
                )));
            }
            for &b in g.terms.iter().skip(i + 1) {
                if !h.terms()[a].word.commutes(&h.terms()[b].word) {
                    return Err(Error::InvalidArg(format!(
                        "grouped terms {a} and {b} anticommute"
                    )));
                }
            }
        }
    }
    if !seen.iter().all(|&s| s) {
        return Err(Error::InvalidArg("groups do not cover every term".into()));
    }
    Ok(())
}

/// Controlled variant: exp(-i H dt n_steps 0.5*(I+... )) is realised as
/// exp(-i dt H (x) X_c) per step, the phase-kickback kernel. The control is
/// cavity wire 0, distinct from every gadget ancilla; on the series backend
/// it doubles as the string ancilla, on the parallel backend the ancilla
/// rotations become XX rotations against it. Identity terms turn into plain
/// control rotations instead of being dropped.
pub fn compile_controlled_trotter(
    h: &PauliSum,
    spec: &TrotterSpec,
    opts: &CompileOptions,
) -> Result<CompiledEvolution> {
    compile_impl(h, spec, opts, true, sorted_groups(h, spec.grouping)?)
}

/// Z-string evolution split across modules whose cavities are stitched by
/// teleported CNOTs: each module collects its local parity onto its own
/// cavity, the chain folds all cavities onto the last one, the rotation
/// lands there, and the mirror erases everything with fresh Bell pairs.
/// One module degenerates to the plain cavity term gadget.
pub fn compile_teleported_string(
    n_data: usize,
    modules: &[Vec<usize>],
    coeff: f64,
    dt: f64,
) -> Result<CompiledEvolution> {
    if modules.is_empty() {
        return Err(Error::InvalidArg("need at least one module".into()));
    }
    let mut seen = vec![false; n_data];
    for m in modules {
        if m.is_empty() {
            return Err(Error::InvalidArg("empty module in string partition".into()));
        }
        for &q in m {
            if q >= n_data {
                return Err(Error::InvalidArg(format!("module qubit {q} outside data block")));
            }
            if seen[q] {
                return Err(Error::InvalidArg(format!("qubit {q} appears in two modules")));
            }
            seen[q] = true;
        }
    }
    let m_count = modules.len();
    let regs = Registers {
        n_data,
        n_cavity: m_count,
        has_dummy: false,
        n_bell_pairs: 2 * (m_count - 1),
    };
    let mut c = Circuit::new(regs)?;
    for m in 0..m_count {
        c.push(Gate::H(regs.cavity(m)))?;
    }
    for p in 0..regs.n_bell_pairs {
        c.push(Gate::BellPrep(p))?;
    }
    let string_block = |c: &mut Circuit| -> Result<()> {
        for (m, qs) in modules.iter().enumerate() {
            c.push(Gate::CStringZ { ancilla: regs.cavity(m), qubits: qs.clone() })?;
        }
        Ok(())
    };
    // Folds the X frame of cavity `from` onto cavity `to` through one Bell
    // pair: an exact CNOT(from -> to) built from one ebit, two measured
    // bits and their corrections.
    let teleported_cnot = |c: &mut Circuit, from: usize, to: usize, pair: usize| -> Result<()> {
        let (u, v) = regs.bell(pair);
        let (k1, k2) = (2 * pair as u32, 2 * pair as u32 + 1);
        c.push(Gate::Cnot(from, u))?;
        c.push(Gate::Measure { wire: u, key: k1 })?;
        c.push(Gate::ClassicallyControlled {
            key: k1,
            gate: Box::new(Gate::Rx(v, std::f64::consts::PI)),
        })?;
        c.push(Gate::Cnot(v, to))?;
        c.push(Gate::H(v))?;
        c.push(Gate::Measure { wire: v, key: k2 })?;
        c.push(Gate::ClassicallyControlled {
            key: k2,
            gate: Box::new(Gate::Rz(from, std::f64::consts::PI)),
        })?;
        Ok(())
    };

    string_block(&mut c)?;
    for m in 1..m_count {
        teleported_cnot(&mut c, regs.cavity(m), regs.cavity(m - 1), m - 1)?;
    }
    c.push(Gate::AncRx(regs.cavity(m_count - 1), 2.0 * coeff * dt))?;
    for m in (1..m_count).rev() {
        teleported_cnot(&mut c, regs.cavity(m), regs.cavity(m - 1), (m_count - 1) + (m - 1))?;
    }
    string_block(&mut c)?;
    for m in 0..m_count {
        c.push(Gate::H(regs.cavity(m)))?;
    }
    Ok(CompiledEvolution {
        circuit: c,
        registers: regs,
        control: None,
        cavity_terms_per_step: 1,
        local_terms_per_step: 0,
        groups: vec![],
    })
}

/// Dense exp(-i dt c W) for the equivalence checks.
pub fn term_exponential(term: &PauliTerm, dt: f64) -> Result<crate::dense::CMat> {
    let coeff = real_coeff(term)?;
    let w = term.word.to_matrix()?;
    crate::dense::expm_hermitian(&w.mapv(|v| v * Complex64::new(coeff, 0.0)), dt)
}
