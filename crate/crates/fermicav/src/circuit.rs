//! Circuit intermediate representation.
//!
//! A circuit is a list of layers over a fixed wire layout; every gate in a
//! layer touches a disjoint wire set, so a layer is one parallel time slice.
//! Gates are pushed one at a time and packed as-soon-as-possible against a
//! per-wire frontier. Classical records produced by measurements are tracked
//! so that classically controlled gates can never drift ahead of the
//! measurement that feeds them.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use serde_json::json;

use crate::error::{Error, Result};

/// Identifier of one classical measurement record, unique within a circuit.
pub type KeyId = u32;

/// Wire layout: data qubits first, then cavity ancillae, then an optional
/// dummy qubit, then Bell-pair halves (two consecutive wires per pair).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Registers {
    pub n_data: usize,
    pub n_cavity: usize,
    pub has_dummy: bool,
    pub n_bell_pairs: usize,
}

impl Registers {
    pub fn data_only(n_data: usize) -> Self {
        Registers { n_data, n_cavity: 0, has_dummy: false, n_bell_pairs: 0 }
    }

    pub fn total_wires(&self) -> usize {
        self.n_data + self.n_cavity + usize::from(self.has_dummy) + 2 * self.n_bell_pairs
    }

    /// Wire index of cavity ancilla `i`.
    pub fn cavity(&self, i: usize) -> usize {
        debug_assert!(i < self.n_cavity);
        self.n_data + i
    }

    pub fn dummy(&self) -> Option<usize> {
        self.has_dummy.then(|| self.n_data + self.n_cavity)
    }

    /// Wires of Bell pair `p`, lower index first.
    pub fn bell(&self, p: usize) -> (usize, usize) {
        debug_assert!(p < self.n_bell_pairs);
        let base = self.n_data + self.n_cavity + usize::from(self.has_dummy) + 2 * p;
        (base, base + 1)
    }

    fn validate(&self) -> Result<()> {
        if self.total_wires() == 0 {
            return Err(Error::Registers("layout has no wires".into()));
        }
        Ok(())
    }
}

/// One gate. Angles follow exp(-i theta/2 P) for RX/RZ/RXX; PHASE(phi) is
/// diag(1, e^{i phi}). HS and SDAGH are the single-pulse basis changes for
/// Y-type string legs: SDAGH applies S-dagger then H (matrix H*Sdag), HS
/// applies H then S (matrix S*H, the inverse of SDAGH).
#[derive(Clone, Debug, PartialEq)]
pub enum Gate {
    H(usize),
    S(usize),
    Sdag(usize),
    Hs(usize),
    SdagH(usize),
    Rx(usize, f64),
    Rz(usize, f64),
    Phase(usize, f64),
    Cnot(usize, usize),
    Cz(usize, usize),
    /// |0><0|_anc (x) I + |1><1|_anc (x) prod Z_q. The dispersive pulse that
    /// realises it leaves a known (-i)^N byproduct phase on the ancilla; that
    /// correction is folded into the gate, so this is the exact projector form.
    CStringZ { ancilla: usize, qubits: Vec<usize> },
    /// Product of CStringZ factors driven by one collective pulse.
    /// All factors are diagonal, so overlapping qubit sets still commute;
    /// the ancillae must be pairwise distinct.
    CMultiStringZ { strings: Vec<(usize, Vec<usize>)> },
    /// X rotation of a cavity ancilla (same matrix as Rx, collective pulse).
    AncRx(usize, f64),
    /// Phase gate on a cavity ancilla (same matrix as Phase, collective pulse).
    AncPhase(usize, f64),
    /// Multi-controlled Z: flips sign iff all controls and the target are 1.
    Ccz { controls: Vec<usize>, target: usize },
    /// Product of two-control CCZ factors sharing one target, one pulse.
    ParallelCcz { pairs: Vec<(usize, usize)>, target: usize },
    /// exp(-i theta/2 X(x)X) between two ancilla wires.
    Rxx(usize, usize, f64),
    /// Prepares Bell pair `p` to (|00> + |11>)/sqrt(2); inputs must be |00>.
    BellPrep(usize),
    /// Bell-basis measurement of pair `p`; records two bits (x-key, z-key).
    BellMeasure { pair: usize, keys: (KeyId, KeyId) },
    Measure { wire: usize, key: KeyId },
    /// Applies the inner gate iff the recorded bit under `key` is 1.
    ClassicallyControlled { key: KeyId, gate: Box<Gate> },
    /// Explicit wait on all wires, used to schedule decay windows.
    Idle { ns: f64 },
}

impl Gate {
    pub fn kind(&self) -> &'static str {
        match self {
            Gate::H(_) => "H",
            Gate::S(_) => "S",
            Gate::Sdag(_) => "SDAG",
            Gate::Hs(_) => "HS",
            Gate::SdagH(_) => "SDAGH",
            Gate::Rx(..) => "RX",
            Gate::Rz(..) => "RZ",
            Gate::Phase(..) => "PHASE",
            Gate::Cnot(..) => "CNOT",
            Gate::Cz(..) => "CZ",
            Gate::CStringZ { .. } => "CSTRINGZ",
            Gate::CMultiStringZ { .. } => "CMULTISTRINGZ",
            Gate::AncRx(..) => "ANCRX",
            Gate::AncPhase(..) => "ANCPHASE",
            Gate::Ccz { .. } => "CCZ",
            Gate::ParallelCcz { .. } => "PARALLELCCZ",
            Gate::Rxx(..) => "RXX",
            Gate::BellPrep(_) => "BELLPREP",
            Gate::BellMeasure { .. } => "BELLMEASURE",
            Gate::Measure { .. } => "MEASURE",
            Gate::ClassicallyControlled { .. } => "CC",
            Gate::Idle { .. } => "IDLE",
        }
    }

    /// Same gate with every wire index pushed through `f`. BellPrep and
    /// BellMeasure address pair slots, not wires, and pass through
    /// untouched; Idle occupies whatever register it lands in.
    pub fn map_wires(&self, f: &mut impl FnMut(usize) -> usize) -> Gate {
        match self {
            Gate::H(q) => Gate::H(f(*q)),
            Gate::S(q) => Gate::S(f(*q)),
            Gate::Sdag(q) => Gate::Sdag(f(*q)),
            Gate::Hs(q) => Gate::Hs(f(*q)),
            Gate::SdagH(q) => Gate::SdagH(f(*q)),
            Gate::Rx(q, th) => Gate::Rx(f(*q), *th),
            Gate::Rz(q, th) => Gate::Rz(f(*q), *th),
            Gate::Phase(q, th) => Gate::Phase(f(*q), *th),
            Gate::Cnot(c, t) => Gate::Cnot(f(*c), f(*t)),
            Gate::Cz(a, b) => Gate::Cz(f(*a), f(*b)),
            Gate::CStringZ { ancilla, qubits } => Gate::CStringZ {
                ancilla: f(*ancilla),
                qubits: qubits.iter().map(|&q| f(q)).collect(),
            },
            Gate::CMultiStringZ { strings } => Gate::CMultiStringZ {
                strings: strings
                    .iter()
                    .map(|(a, qs)| (f(*a), qs.iter().map(|&q| f(q)).collect()))
                    .collect(),
            },
            Gate::AncRx(q, th) => Gate::AncRx(f(*q), *th),
            Gate::AncPhase(q, th) => Gate::AncPhase(f(*q), *th),
            Gate::Ccz { controls, target } => Gate::Ccz {
                controls: controls.iter().map(|&q| f(q)).collect(),
                target: f(*target),
            },
            Gate::ParallelCcz { pairs, target } => Gate::ParallelCcz {
                pairs: pairs.iter().map(|&(a, b)| (f(a), f(b))).collect(),
                target: f(*target),
            },
            Gate::Rxx(a, b, th) => Gate::Rxx(f(*a), f(*b), *th),
            Gate::BellPrep(p) => Gate::BellPrep(*p),
            Gate::BellMeasure { pair, keys } => Gate::BellMeasure { pair: *pair, keys: *keys },
            Gate::Measure { wire, key } => Gate::Measure { wire: f(*wire), key: *key },
            Gate::ClassicallyControlled { key, gate } => Gate::ClassicallyControlled {
                key: *key,
                gate: Box::new(gate.map_wires(f)),
            },
            Gate::Idle { ns } => Gate::Idle { ns: *ns },
        }
    }

    /// Deduplicated wires the gate occupies for layering purposes.
    pub fn wires(&self, regs: &Registers) -> Vec<usize> {
        let mut ws = match self {
            Gate::H(w)
            | Gate::S(w)
            | Gate::Sdag(w)
            | Gate::Hs(w)
            | Gate::SdagH(w)
            | Gate::Rx(w, _)
            | Gate::Rz(w, _)
            | Gate::Phase(w, _)
            | Gate::AncRx(w, _)
            | Gate::AncPhase(w, _)
            | Gate::Measure { wire: w, .. } => vec![*w],
            Gate::Cnot(a, b) | Gate::Cz(a, b) | Gate::Rxx(a, b, _) => vec![*a, *b],
            Gate::CStringZ { ancilla, qubits } => {
                let mut v = qubits.clone();
                v.push(*ancilla);
                v
            }
            Gate::CMultiStringZ { strings } => {
                let mut v = Vec::new();
                for (a, qs) in strings {
                    v.push(*a);
                    v.extend_from_slice(qs);
                }
                v
            }
            Gate::Ccz { controls, target } => {
                let mut v = controls.clone();
                v.push(*target);
                v
            }
            Gate::ParallelCcz { pairs, target } => {
                let mut v = vec![*target];
                for (a, b) in pairs {
                    v.push(*a);
                    v.push(*b);
                }
                v
            }
            Gate::BellPrep(p) => {
                let (u, v) = regs.bell(*p);
                vec![u, v]
            }
            Gate::BellMeasure { pair, .. } => {
                let (u, v) = regs.bell(*pair);
                vec![u, v]
            }
            Gate::ClassicallyControlled { gate, .. } => gate.wires(regs),
            Gate::Idle { .. } => (0..regs.total_wires()).collect(),
        };
        ws.sort_unstable();
        ws.dedup();
        ws
    }

    fn validate(&self, regs: &Registers) -> Result<()> {
        let total = regs.total_wires();
        let chk = |w: usize| -> Result<()> {
            if w >= total {
                return Err(Error::InvalidArg(format!(
                    "wire {w} out of range for {total}-wire layout"
                )));
            }
            Ok(())
        };
        let chk_angle = |t: f64| -> Result<()> {
            if !t.is_finite() {
                return Err(Error::InvalidArg(format!("non-finite gate angle {t}")));
            }
            Ok(())
        };
        let chk_string = |anc: usize, qs: &[usize]| -> Result<()> {
            chk(anc)?;
            if qs.is_empty() {
                return Err(Error::InvalidArg("controlled string with empty qubit set".into()));
            }
            let mut seen = BTreeSet::new();
            for &q in qs {
                chk(q)?;
                if q == anc {
                    return Err(Error::InvalidArg(format!(
                        "ancilla {anc} appears in its own string set"
                    )));
                }
                if !seen.insert(q) {
                    return Err(Error::InvalidArg(format!("duplicate qubit {q} in string set")));
                }
            }
            Ok(())
        };
        match self {
            Gate::H(w) | Gate::S(w) | Gate::Sdag(w) | Gate::Hs(w) | Gate::SdagH(w) => chk(*w),
            Gate::Rx(w, t) | Gate::Rz(w, t) | Gate::Phase(w, t) => {
                chk(*w)?;
                chk_angle(*t)
            }
            Gate::AncRx(w, t) | Gate::AncPhase(w, t) => {
                chk(*w)?;
                chk_angle(*t)
            }
            Gate::Cnot(a, b) | Gate::Cz(a, b) => {
                chk(*a)?;
                chk(*b)?;
                if a == b {
                    return Err(Error::InvalidArg("two-qubit gate needs distinct wires".into()));
                }
                Ok(())
            }
            Gate::Rxx(a, b, t) => {
                chk(*a)?;
                chk(*b)?;
                chk_angle(*t)?;
                if a == b {
                    return Err(Error::InvalidArg("two-qubit gate needs distinct wires".into()));
                }
                Ok(())
            }
            Gate::CStringZ { ancilla, qubits } => chk_string(*ancilla, qubits),
            Gate::CMultiStringZ { strings } => {
                if strings.is_empty() {
                    return Err(Error::InvalidArg("empty multi-string gate".into()));
                }
                let mut ancs = BTreeSet::new();
                for (a, qs) in strings {
                    chk_string(*a, qs)?;
                    if !ancs.insert(*a) {
                        return Err(Error::InvalidArg(format!(
                            "ancilla {a} drives two strings in one pulse"
                        )));
                    }
                }
                Ok(())
            }
            Gate::Ccz { controls, target } => {
                chk(*target)?;
                if controls.is_empty() {
                    return Err(Error::InvalidArg("CCZ needs at least one control".into()));
                }
                let mut seen = BTreeSet::new();
                for &c in controls {
                    chk(c)?;
                    if c == *target || !seen.insert(c) {
                        return Err(Error::InvalidArg("CCZ wires must be distinct".into()));
                    }
                }
                Ok(())
            }
            Gate::ParallelCcz { pairs, target } => {
                chk(*target)?;
                if pairs.is_empty() {
                    return Err(Error::InvalidArg("empty parallel CCZ".into()));
                }
                for &(a, b) in pairs {
                    chk(a)?;
                    chk(b)?;
                    if a == b || a == *target || b == *target {
                        return Err(Error::InvalidArg("CCZ wires must be distinct".into()));
                    }
                }
                Ok(())
            }
            Gate::BellPrep(p) | Gate::BellMeasure { pair: p, .. } => {
                if *p >= regs.n_bell_pairs {
                    return Err(Error::InvalidArg(format!(
                        "Bell pair {p} out of range ({} pairs)",
                        regs.n_bell_pairs
                    )));
                }
                if let Gate::BellMeasure { keys: (k1, k2), .. } = self {
                    if k1 == k2 {
                        return Err(Error::InvalidArg("Bell measurement needs two keys".into()));
                    }
                }
                Ok(())
            }
            Gate::Measure { wire, .. } => chk(*wire),
            Gate::ClassicallyControlled { gate, .. } => {
                match gate.as_ref() {
                    Gate::Measure { .. }
                    | Gate::BellMeasure { .. }
                    | Gate::ClassicallyControlled { .. }
                    | Gate::Idle { .. } => {
                        return Err(Error::InvalidArg(
                            "classical control wraps only plain unitary gates".into(),
                        ))
                    }
                    _ => {}
                }
                gate.validate(regs)
            }
            Gate::Idle { ns } => {
                if !ns.is_finite() || *ns < 0.0 {
                    return Err(Error::InvalidArg(format!("bad idle duration {ns}")));
                }
                Ok(())
            }
        }
    }

    /// Keys this gate records, if any.
    fn defined_keys(&self) -> Vec<KeyId> {
        match self {
            Gate::Measure { key, .. } => vec![*key],
            Gate::BellMeasure { keys: (k1, k2), .. } => vec![*k1, *k2],
            _ => Vec::new(),
        }
    }

    pub fn is_measurement(&self) -> bool {
        matches!(self, Gate::Measure { .. } | Gate::BellMeasure { .. })
    }

    fn dump(&self) -> String {
        match self {
            Gate::H(w) | Gate::S(w) | Gate::Sdag(w) | Gate::Hs(w) | Gate::SdagH(w) => {
                format!("{}({w})", self.kind())
            }
            Gate::Rx(w, t) | Gate::Rz(w, t) | Gate::Phase(w, t) => {
                format!("{}({w};{t})", self.kind())
            }
            Gate::AncRx(w, t) | Gate::AncPhase(w, t) => format!("{}({w};{t})", self.kind()),
            Gate::Cnot(a, b) | Gate::Cz(a, b) => format!("{}({a},{b})", self.kind()),
            Gate::Rxx(a, b, t) => format!("RXX({a},{b};{t})"),
            Gate::CStringZ { ancilla, qubits } => {
                format!("CSTRINGZ({ancilla};{})", join_usize(qubits))
            }
            Gate::CMultiStringZ { strings } => {
                let parts: Vec<String> =
                    strings.iter().map(|(a, qs)| format!("{a};{}", join_usize(qs))).collect();
                format!("CMULTISTRINGZ({})", parts.join("|"))
            }
            Gate::Ccz { controls, target } => {
                format!("CCZ({};{target})", join_usize(controls))
            }
            Gate::ParallelCcz { pairs, target } => {
                let parts: Vec<String> = pairs.iter().map(|(a, b)| format!("{a},{b}")).collect();
                format!("PARALLELCCZ({};{target})", parts.join("|"))
            }
            Gate::BellPrep(p) => format!("BELLPREP({p})"),
            Gate::BellMeasure { pair, keys } => {
                format!("BELLMEASURE({pair};{},{})", keys.0, keys.1)
            }
            Gate::Measure { wire, key } => format!("MEASURE({wire};{key})"),
            Gate::ClassicallyControlled { key, gate } => format!("CC({key};{})", gate.dump()),
            Gate::Idle { ns } => format!("IDLE({ns})"),
        }
    }
}

fn join_usize(v: &[usize]) -> String {
    let parts: Vec<String> = v.iter().map(|x| x.to_string()).collect();
    parts.join(",")
}

enum PulseClass {
    Local,
    Collective,
    None,
}

fn pulse_class(g: &Gate) -> PulseClass {
    match g {
        Gate::CStringZ { .. }
        | Gate::CMultiStringZ { .. }
        | Gate::AncRx(..)
        | Gate::AncPhase(..)
        | Gate::Ccz { .. }
        | Gate::ParallelCcz { .. }
        | Gate::Rxx(..) => PulseClass::Collective,
        Gate::ClassicallyControlled { gate, .. } => pulse_class(gate),
        Gate::Idle { .. } => PulseClass::None,
        _ => PulseClass::Local,
    }
}

/// Layered circuit over a fixed register layout.
#[derive(Clone, Debug)]
pub struct Circuit {
    regs: Registers,
    layers: Vec<Vec<Gate>>,
    /// frontier[w] = first layer index with wire w still free.
    frontier: Vec<usize>,
    /// key -> first layer index after the measurement that records it.
    key_frontier: HashMap<KeyId, usize>,
    keys: BTreeSet<KeyId>,
}

impl Circuit {
    pub fn new(regs: Registers) -> Result<Self> {
        regs.validate()?;
        Ok(Circuit {
            regs,
            layers: Vec::new(),
            frontier: vec![0; regs.total_wires()],
            key_frontier: HashMap::new(),
            keys: BTreeSet::new(),
        })
    }

    pub fn from_gates<I: IntoIterator<Item = Gate>>(regs: Registers, gates: I) -> Result<Self> {
        let mut c = Circuit::new(regs)?;
        for g in gates {
            c.push(g)?;
        }
        Ok(c)
    }

    pub fn registers(&self) -> &Registers {
        &self.regs
    }

    pub fn n_wires(&self) -> usize {
        self.regs.total_wires()
    }

    pub fn layers(&self) -> &[Vec<Gate>] {
        &self.layers
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.layers.is_empty()
    }

    pub fn keys(&self) -> &BTreeSet<KeyId> {
        &self.keys
    }

    pub fn has_measurements(&self) -> bool {
        self.layers.iter().flatten().any(Gate::is_measurement)
    }

    fn register_keys(&mut self, g: &Gate) -> Result<()> {
        let defined = g.defined_keys();
        for k in &defined {
            if self.keys.contains(k) {
                return Err(Error::InvalidArg(format!("measurement key {k} already used")));
            }
        }
        if let Gate::ClassicallyControlled { key, .. } = g {
            if !self.keys.contains(key) {
                return Err(Error::InvalidArg(format!(
                    "classical control references unknown key {key}"
                )));
            }
        }
        self.keys.extend(defined);
        Ok(())
    }

    /// Pushes a gate at the earliest layer consistent with wire order and,
    /// for classically controlled gates, with the feeding measurement.
    pub fn push(&mut self, g: Gate) -> Result<()> {
        g.validate(&self.regs)?;
        self.register_keys(&g)?;
        let ws = g.wires(&self.regs);
        let mut at = 0;
        for &w in &ws {
            at = at.max(self.frontier[w]);
        }
        if let Gate::ClassicallyControlled { key, .. } = &g {
            at = at.max(self.key_frontier[key]);
        }
        self.place(at, g, ws);
        Ok(())
    }

    pub fn push_all<I: IntoIterator<Item = Gate>>(&mut self, gates: I) -> Result<()> {
        for g in gates {
            self.push(g)?;
        }
        Ok(())
    }

    fn place(&mut self, at: usize, g: Gate, wires: Vec<usize>) {
        while self.layers.len() <= at {
            self.layers.push(Vec::new());
        }
        for &w in &wires {
            self.frontier[w] = at + 1;
        }
        for k in g.defined_keys() {
            self.key_frontier.insert(k, at + 1);
        }
        self.layers[at].push(g);
    }

    /// Appends `other` after this circuit. With `repack` the incoming gates
    /// are re-packed as-soon-as-possible and may merge into trailing layers;
    /// otherwise the incoming layer boundaries are kept verbatim, so the
    /// result has depth `self.depth() + other.depth()`.
    pub fn compose(&self, other: &Circuit, repack: bool) -> Result<Circuit> {
        if self.regs != other.regs {
            return Err(Error::Registers(format!(
                "cannot compose circuits over different layouts ({} vs {} wires)",
                self.n_wires(),
                other.n_wires()
            )));
        }
        let mut out = self.clone();
        if repack {
            for layer in &other.layers {
                for g in layer {
                    out.push(g.clone())?;
                }
            }
        } else {
            let base = out.layers.len();
            for (i, layer) in other.layers.iter().enumerate() {
                for g in layer {
                    g.validate(&out.regs)?;
                    out.register_keys(g)?;
                    let ws = g.wires(&out.regs);
                    out.place(base + i, g.clone(), ws);
                }
            }
        }
        Ok(out)
    }

    /// One text line per layer: gates as KIND(wires;params) in push order.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        for layer in &self.layers {
            let parts: Vec<String> = layer.iter().map(Gate::dump).collect();
            let _ = writeln!(s, "{}", parts.join(" "));
        }
        s
    }

    pub fn layer_durations(&self, dev: &DeviceModel) -> Vec<f64> {
        self.layers
            .iter()
            .map(|layer| {
                layer.iter().map(|g| dev.gate_duration_ns(g)).fold(0.0, f64::max)
            })
            .collect()
    }

    pub fn metrics(&self, dev: &DeviceModel) -> Metrics {
        let mut gate_counts: BTreeMap<String, usize> = BTreeMap::new();
        let mut local = 0usize;
        let mut collective = 0usize;
        for layer in &self.layers {
            for g in layer {
                *gate_counts.entry(g.kind().to_string()).or_insert(0) += 1;
                match pulse_class(g) {
                    PulseClass::Local => local += 1,
                    PulseClass::Collective => collective += 1,
                    PulseClass::None => {}
                }
            }
        }
        let duration_ns: f64 = self.layer_durations(dev).iter().sum();
        Metrics {
            depth: self.depth(),
            gate_counts,
            local_pulses: local,
            collective_pulses: collective,
            duration_ns,
            fidelity: dev.f_local.powi(local as i32) * dev.f_collective.powi(collective as i32),
        }
    }

    #[cfg(test)]
    fn check_layering(&self) {
        let mut measured_at: HashMap<KeyId, usize> = HashMap::new();
        for (i, layer) in self.layers.iter().enumerate() {
            let mut used = BTreeSet::new();
            for g in layer {
                for w in g.wires(&self.regs) {
                    assert!(used.insert(w), "layer {i} reuses wire {w}");
                }
                for k in g.defined_keys() {
                    measured_at.insert(k, i);
                }
                if let Gate::ClassicallyControlled { key, .. } = g {
                    assert!(measured_at[key] < i, "classical control at or before its measurement");
                }
            }
        }
    }
}

/// How the collective-pulse duration grows with the string length N.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CavityScaling {
    Flat,
    SqrtN,
    SqrtLogN,
}

/// Pulse timing and per-pulse fidelity parameters.
#[derive(Clone, Debug)]
pub struct DeviceModel {
    /// Duration of one local pulse; also the collective base time.
    pub base_ns: f64,
    pub scaling: CavityScaling,
    /// Fidelity factor per local pulse.
    pub f_local: f64,
    /// Fidelity factor per collective pulse.
    pub f_collective: f64,
}

impl Default for DeviceModel {
    fn default() -> Self {
        DeviceModel {
            base_ns: 40.0,
            scaling: CavityScaling::SqrtN,
            f_local: 0.999,
            f_collective: 0.999,
        }
    }
}

impl DeviceModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.base_ns > 0.0) {
            return Err(Error::InvalidArg(format!("pulse duration {} must be > 0", self.base_ns)));
        }
        for (name, f) in [("local", self.f_local), ("collective", self.f_collective)] {
            if !(f > 0.0 && f <= 1.0) {
                return Err(Error::InvalidArg(format!("{name} fidelity {f} outside (0, 1]")));
            }
        }
        Ok(())
    }

    fn string_factor(&self, n: usize) -> f64 {
        let n = n.max(1) as f64;
        match self.scaling {
            CavityScaling::Flat => 1.0,
            CavityScaling::SqrtN => n.sqrt(),
            CavityScaling::SqrtLogN => n.log2().sqrt().max(1.0),
        }
    }

    pub fn gate_duration_ns(&self, g: &Gate) -> f64 {
        match g {
            Gate::Idle { ns } => *ns,
            Gate::CStringZ { qubits, .. } => self.base_ns * self.string_factor(qubits.len()),
            Gate::CMultiStringZ { strings } => {
                let n = strings.iter().map(|(_, qs)| qs.len()).max().unwrap_or(1);
                self.base_ns * self.string_factor(n)
            }
            Gate::ClassicallyControlled { gate, .. } => self.gate_duration_ns(gate),
            _ => self.base_ns,
        }
    }
}

/// Aggregate cost figures of one circuit under one device model.
#[derive(Clone, Debug)]
pub struct Metrics {
    pub depth: usize,
    pub gate_counts: BTreeMap<String, usize>,
    pub local_pulses: usize,
    pub collective_pulses: usize,
    pub duration_ns: f64,
    pub fidelity: f64,
}

impl Metrics {
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "depth": self.depth,
            "gate_counts": self.gate_counts,
            "local_pulses": self.local_pulses,
            "collective_pulses": self.collective_pulses,
            "duration_ns": self.duration_ns,
            "fidelity": self.fidelity,
        })
    }
}
