//! Command-line driver: encode fermionic models, compile and scan circuits,
//! run phase estimation and spectral-function protocols, and sweep the
//! fluxonium device numbers. Every run writes its artifacts plus a JSON
//! manifest (resolved configuration, seed, library version) into the output
//! directory; identical configuration and seed give byte-identical files.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use fermicav::backends::{compile_trotter, BackendKind, CompileOptions, TrotterSpec};
use fermicav::circuit::DeviceModel;
use fermicav::device::{ej_sweep, sweep_to_csv, FluxoniumParams};
use fermicav::encoding::EncodingKind;
use fermicav::models::{build_hubbard, load_pauli_hamiltonian, stats, HubbardSpec};
use fermicav::pauli::PauliSum;
use fermicav::protocols::{
    correlator_registers, default_eta, dynamical_correlator, dynamical_correlator_noisy,
    find_peaks, ipea, kitaev_pea, kitaev_pea_noisy, pea_registers, spectral_function,
    spectral_sum_rule, CorrelatorConfig, IpeaConfig, PeaConfig, Spectrum, TimeGrid,
};
use fermicav::scheduler::PartitionStrategy;
use fermicav::simulator::{ground_state_in_sector, NoiseModel, State, TrajectoryConfig};

#[derive(Parser)]
#[command(name = "fermicav", version, about = "fermion-to-qubit compiler and simulator")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Encode a fermionic model into Pauli terms plus grouping statistics.
    Encode(EncodeArgs),
    /// Compile a Trotter circuit and report its metrics.
    Compile(CompileArgs),
    /// Compile Hubbard lattices of growing size and tabulate depth scaling.
    DepthScan(DepthScanArgs),
    /// Kitaev phase estimation: beat signal, spectrum and peak report.
    Pea(PeaArgs),
    /// Dynamical correlator and spectral function.
    Spectral(SpectralArgs),
    /// Iterative phase estimation.
    Ipea(IpeaArgs),
    /// Fluxonium level / matrix-element sweep against the junction energy.
    Fluxonium(FluxoniumArgs),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            if e.use_stderr() {
                eprint!("{e}");
                return ExitCode::from(1);
            }
            // --help / --version render through the error path but are not errors
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };
    match run(cli.cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cmd: Cmd) -> Result<()> {
    match cmd {
        Cmd::Encode(a) => cmd_encode(a),
        Cmd::Compile(a) => cmd_compile(a),
        Cmd::DepthScan(a) => cmd_depth_scan(a),
        Cmd::Pea(a) => cmd_pea(a),
        Cmd::Spectral(a) => cmd_spectral(a),
        Cmd::Ipea(a) => cmd_ipea(a),
        Cmd::Fluxonium(a) => cmd_fluxonium(a),
    }
}

// Flag resolution: explicit flag wins, then a `key=value` config file, then
// the built-in default. Every resolved value is recorded for the manifest.
struct Resolver {
    file: BTreeMap<String, String>,
    used: BTreeMap<String, String>,
}

impl Resolver {
    fn new(config: Option<&PathBuf>) -> Result<Resolver> {
        let mut file = BTreeMap::new();
        if let Some(path) = config {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading config {}", path.display()))?;
            for (i, raw) in text.lines().enumerate() {
                let line = raw.split('#').next().unwrap_or("").trim();
                if line.is_empty() {
                    continue;
                }
                let (k, v) = line
                    .split_once('=')
                    .ok_or_else(|| anyhow!("config line {}: expected key=value", i + 1))?;
                file.insert(k.trim().to_string(), v.trim().to_string());
            }
        }
        Ok(Resolver { file, used: BTreeMap::new() })
    }

    fn get<T>(&mut self, key: &str, flag: Option<T>, default: T) -> Result<T>
    where
        T: FromStr + ToString,
        T::Err: Display,
    {
        let v = match flag {
            Some(v) => v,
            None => match self.file.get(key) {
                Some(s) => s
                    .parse()
                    .map_err(|e| anyhow!("config key {key}={s}: {e}"))?,
                None => default,
            },
        };
        self.used.insert(key.to_string(), v.to_string());
        Ok(v)
    }

    /// Optional value with no default; absent stays absent.
    fn get_opt<T>(&mut self, key: &str, flag: Option<T>) -> Result<Option<T>>
    where
        T: FromStr + ToString,
        T::Err: Display,
    {
        let v = match flag {
            Some(v) => Some(v),
            None => match self.file.get(key) {
                Some(s) => {
                    Some(s.parse().map_err(|e| anyhow!("config key {key}={s}: {e}"))?)
                }
                None => None,
            },
        };
        if let Some(v) = &v {
            self.used.insert(key.to_string(), v.to_string());
        }
        Ok(v)
    }

    fn note(&mut self, key: &str, value: impl ToString) {
        self.used.insert(key.to_string(), value.to_string());
    }
}

struct OutDir {
    dir: PathBuf,
    outputs: Vec<String>,
}

impl OutDir {
    fn new(dir: PathBuf) -> Result<OutDir> {
        std::fs::create_dir_all(&dir)
            .with_context(|| format!("creating output directory {}", dir.display()))?;
        Ok(OutDir { dir, outputs: Vec::new() })
    }

    fn write(&mut self, name: &str, contents: &str) -> Result<()> {
        std::fs::write(self.dir.join(name), contents)
            .with_context(|| format!("writing {name}"))?;
        self.outputs.push(name.to_string());
        Ok(())
    }

    fn manifest(mut self, command: &str, r: &Resolver, seed: Option<u64>) -> Result<()> {
        self.outputs.sort();
        let m = serde_json::json!({
            "command": command,
            "version": env!("CARGO_PKG_VERSION"),
            "seed": seed,
            "config": r.used,
            "outputs": self.outputs,
        });
        let name = format!("{command}_manifest.json");
        std::fs::write(self.dir.join(&name), serde_json::to_string_pretty(&m)? + "\n")
            .with_context(|| format!("writing {name}"))?;
        Ok(())
    }
}

fn parse_backend(s: &str) -> Result<BackendKind> {
    match s {
        "local" => Ok(BackendKind::Local),
        "cavity-series" => Ok(BackendKind::CavitySeries),
        "cavity-parallel" => Ok(BackendKind::CavityParallel),
        other => bail!("unknown backend {other:?} (local, cavity-series, cavity-parallel)"),
    }
}

fn parse_encoding(s: &str) -> Result<EncodingKind> {
    match s {
        "jw" => Ok(EncodingKind::Jw),
        "bk" => Ok(EncodingKind::Bk),
        other => bail!("unknown encoding {other:?} (jw, bk)"),
    }
}

fn parse_grouping(s: &str) -> Result<PartitionStrategy> {
    match s {
        "greedy" => Ok(PartitionStrategy::GreedyLargestDegreeFirst),
        "laminar" => Ok(PartitionStrategy::GreedyLaminar),
        "exhaustive" => Ok(PartitionStrategy::Exhaustive),
        other => bail!("unknown grouping {other:?} (greedy, laminar, exhaustive)"),
    }
}

#[derive(Args)]
struct CommonArgs {
    /// Output directory for artifacts and the manifest.
    #[arg(long)]
    out: Option<PathBuf>,
    /// key=value file merged underneath explicit flags.
    #[arg(long)]
    config: Option<PathBuf>,
}

impl CommonArgs {
    fn open(&self, command: &str) -> Result<(Resolver, OutDir)> {
        let mut r = Resolver::new(self.config.as_ref())?;
        let flag = self.out.as_ref().map(|p| p.to_string_lossy().into_owned());
        let dir = r.get("out", flag, format!("out/{command}"))?;
        Ok((r, OutDir::new(PathBuf::from(dir))?))
    }
}

#[derive(Args)]
struct ModelArgs {
    /// Pauli Hamiltonian file (`<re> <im> <word>` lines); overrides --model.
    #[arg(long)]
    hamiltonian: Option<PathBuf>,
    /// Built-in model name (hubbard).
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    nx: Option<usize>,
    #[arg(long)]
    ny: Option<usize>,
    #[arg(long)]
    kappa: Option<f64>,
    #[arg(long)]
    u: Option<f64>,
    /// Fermion-to-qubit encoding (jw, bk).
    #[arg(long)]
    encoding: Option<String>,
}

struct ResolvedModel {
    h: PauliSum,
    /// Half filling for lattice models; protocols needing a particle sector
    /// fall back to this when --sector is absent.
    default_sector: Option<usize>,
}

fn resolve_model(r: &mut Resolver, m: &ModelArgs) -> Result<ResolvedModel> {
    let ham_flag = m.hamiltonian.as_ref().map(|p| p.to_string_lossy().into_owned());
    if let Some(path) = r.get_opt("hamiltonian", ham_flag)? {
        let h = load_pauli_hamiltonian(Path::new(&path))?;
        return Ok(ResolvedModel { h, default_sector: None });
    }
    let name = r.get("model", m.model.clone(), "hubbard".to_string())?;
    if name != "hubbard" {
        bail!("unknown model {name:?} (hubbard, or --hamiltonian <file>)");
    }
    let spec = HubbardSpec {
        nx: r.get("nx", m.nx, 2)?,
        ny: r.get("ny", m.ny, 2)?,
        kappa: r.get("kappa", m.kappa, 0.1)?,
        u: r.get("u", m.u, 1.0)?,
    };
    let enc_kind = parse_encoding(&r.get("encoding", m.encoding.clone(), "jw".into())?)?;
    let model = build_hubbard(&spec)?;
    let enc = model.encoding(enc_kind);
    let h = model.encode_full(&enc)?;
    Ok(ResolvedModel { h, default_sector: Some(model.n_modes() / 2) })
}

#[derive(Args)]
struct CompileFlags {
    /// Evolution backend (local, cavity-series, cavity-parallel).
    #[arg(long)]
    backend: Option<String>,
    /// Commuting-group strategy (greedy, laminar, exhaustive).
    #[arg(long)]
    groups: Option<String>,
    /// Terms with support at or below this stay on local ladders.
    #[arg(long)]
    hybrid_cutoff: Option<usize>,
    /// Cap on terms per parallel gadget.
    #[arg(long)]
    group_cap: Option<usize>,
    /// Ancilla pool size for the series backend.
    #[arg(long)]
    series_pool: Option<usize>,
}

impl CompileFlags {
    fn resolve(&self, r: &mut Resolver) -> Result<(CompileOptions, PartitionStrategy)> {
        let backend = parse_backend(&r.get("backend", self.backend.clone(), "local".into())?)?;
        let grouping = parse_grouping(&r.get("groups", self.groups.clone(), "laminar".into())?)?;
        let mut opts = CompileOptions::new(backend);
        opts.hybrid_cutoff = r.get("hybrid_cutoff", self.hybrid_cutoff, opts.hybrid_cutoff)?;
        opts.parallel_group_cap = r.get_opt("group_cap", self.group_cap)?;
        opts.series_pool = r.get_opt("series_pool", self.series_pool)?;
        Ok((opts, grouping))
    }
}

fn csv_f(x: f64) -> String {
    // shortest-roundtrip Display keeps files byte-stable across runs
    format!("{x}")
}

// ---------------------------------------------------------------- encode --

#[derive(Args)]
struct EncodeArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    model: ModelArgs,
}

fn cmd_encode(a: EncodeArgs) -> Result<()> {
    let (mut r, mut out) = a.common.open("encode")?;
    let rm = resolve_model(&mut r, &a.model)?;
    let mut terms = format!("nqubits {}\n", rm.h.n_qubits());
    for t in rm.h.terms() {
        writeln!(terms, "{} {} {}", t.coeff.re, t.coeff.im, t.word).unwrap();
    }
    out.write("terms.txt", &terms)?;
    let st = stats(&rm.h)?;
    let js = serde_json::json!({
        "n_qubits": rm.h.n_qubits(),
        "n_terms": st.n_terms,
        "n_groups": st.n_groups,
        "terms_per_group": st.terms_per_group,
        "mean_weight": st.mean_weight,
        "qubit_participation": st.qubit_participation,
    });
    out.write("stats.json", &(serde_json::to_string_pretty(&js)? + "\n"))?;
    out.manifest("encode", &r, None)
}

// --------------------------------------------------------------- compile --

#[derive(Args)]
struct CompileArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    compile: CompileFlags,
    /// Trotter step length.
    #[arg(long)]
    dt: Option<f64>,
    /// Number of Trotter steps.
    #[arg(long)]
    steps: Option<usize>,
}

fn cmd_compile(a: CompileArgs) -> Result<()> {
    let (mut r, mut out) = a.common.open("compile")?;
    let rm = resolve_model(&mut r, &a.model)?;
    let (opts, grouping) = a.compile.resolve(&mut r)?;
    let mut spec = TrotterSpec::new(r.get("dt", a.dt, 0.05)?, r.get("steps", a.steps, 1)?);
    spec.grouping = grouping;
    let comp = compile_trotter(&rm.h, &spec, &opts)?;
    out.write("circuit.txt", &comp.circuit.dump())?;
    let metrics = comp.circuit.metrics(&DeviceModel::default());
    let js = serde_json::json!({
        "n_data": comp.registers.n_data,
        "total_wires": comp.registers.total_wires(),
        "cavity_terms_per_step": comp.cavity_terms_per_step,
        "local_terms_per_step": comp.local_terms_per_step,
        "n_groups": comp.groups.len(),
        "metrics": metrics.to_json(),
    });
    out.write("metrics.json", &(serde_json::to_string_pretty(&js)? + "\n"))?;
    out.manifest("compile", &r, None)
}

// ------------------------------------------------------------ depth-scan --

#[derive(Args)]
struct DepthScanArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Smallest lattice edge N.
    #[arg(long)]
    n_min: Option<usize>,
    /// Largest lattice edge N.
    #[arg(long)]
    n_max: Option<usize>,
    /// Comma-separated backend list.
    #[arg(long)]
    backends: Option<String>,
    #[arg(long)]
    kappa: Option<f64>,
    #[arg(long)]
    u: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
}

fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let num: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    num / den
}

fn cmd_depth_scan(a: DepthScanArgs) -> Result<()> {
    let (mut r, mut out) = a.common.open("depth-scan")?;
    let n_min = r.get("n_min", a.n_min, 2)?;
    let n_max = r.get("n_max", a.n_max, 8)?;
    if n_min < 2 || n_max < n_min {
        bail!("need 2 <= n_min <= n_max, got {n_min}..{n_max}");
    }
    let kappa = r.get("kappa", a.kappa, 0.1)?;
    let u = r.get("u", a.u, 1.0)?;
    let dt = r.get("dt", a.dt, 0.05)?;
    let backends_raw = r.get(
        "backends",
        a.backends,
        "local,cavity-series,cavity-parallel".to_string(),
    )?;
    let dev = DeviceModel::default();
    let mut csv = String::from(
        "backend,n,n_modes,terms,cavity_terms,depth,duration_ns,fidelity,local_pulses,collective_pulses\n",
    );
    let mut summary = BTreeMap::new();
    for name in backends_raw.split(',') {
        let backend = parse_backend(name.trim())?;
        let opts = CompileOptions::new(backend);
        let mut ns = Vec::new();
        let mut depths = Vec::new();
        for n in n_min..=n_max {
            let spec = HubbardSpec { nx: n, ny: n, kappa, u };
            let model = build_hubbard(&spec)?;
            let enc = model.encoding(EncodingKind::Jw);
            let h = model.encode_full(&enc)?;
            let comp = compile_trotter(&h, &TrotterSpec::new(dt, 1), &opts)?;
            let m = comp.circuit.metrics(&dev);
            writeln!(
                csv,
                "{},{},{},{},{},{},{},{},{},{}",
                name.trim(),
                n,
                model.n_modes(),
                h.len(),
                comp.cavity_terms_per_step,
                m.depth,
                csv_f(m.duration_ns),
                csv_f(m.fidelity),
                m.local_pulses,
                m.collective_pulses
            )
            .unwrap();
            ns.push(n as f64);
            depths.push(m.depth as f64);
        }
        summary.insert(
            name.trim().to_string(),
            serde_json::json!({ "depth_exponent": loglog_slope(&ns, &depths) }),
        );
    }
    out.write("depth_scan.csv", &csv)?;
    out.write(
        "depth_scan.json",
        &(serde_json::to_string_pretty(&serde_json::json!(summary))? + "\n"),
    )?;
    out.manifest("depth-scan", &r, None)
}

// ------------------------------------------------------------------- pea --

#[derive(Args)]
struct PeaArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    compile: CompileFlags,
    /// Particle-number sector for the prepared eigenstate.
    #[arg(long)]
    sector: Option<usize>,
    /// Sample spacing in time.
    #[arg(long)]
    dt: Option<f64>,
    /// Number of time samples.
    #[arg(long)]
    samples: Option<usize>,
    /// Trotter steps per sample interval.
    #[arg(long)]
    substeps: Option<usize>,
    /// Strip diagonal words and fold their energy into the peak report.
    #[arg(long)]
    subtract_diagonal: bool,
    /// Noise preset (none, fig5).
    #[arg(long)]
    noise: Option<String>,
    #[arg(long)]
    trajectories: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

fn prepared_state(
    r: &mut Resolver,
    h: &PauliSum,
    flag: Option<usize>,
    default_sector: Option<usize>,
) -> Result<(f64, State)> {
    let sector = match r.get_opt("sector", flag)? {
        Some(s) => s,
        None => default_sector
            .ok_or_else(|| anyhow!("--sector is required for file Hamiltonians"))?,
    };
    r.note("sector", sector);
    Ok(ground_state_in_sector(h, sector)?)
}

fn cmd_pea(a: PeaArgs) -> Result<()> {
    let (mut r, mut out) = a.common.open("pea")?;
    let rm = resolve_model(&mut r, &a.model)?;
    let (opts, grouping) = a.compile.resolve(&mut r)?;
    let grid = TimeGrid::new(r.get("dt", a.dt, 0.25)?, r.get("samples", a.samples, 64)?);
    let mut cfg = PeaConfig::new(grid);
    cfg.substeps = r.get("substeps", a.substeps, 4)?;
    cfg.compile = opts;
    cfg.grouping = grouping;
    cfg.subtract_diagonal = r.get("subtract_diagonal", Some(a.subtract_diagonal), false)?;
    let noise = r.get("noise", a.noise, "none".to_string())?;
    let seed = r.get("seed", a.seed, 7)?;
    let (ground_energy, state) = prepared_state(&mut r, &rm.h, a.sector, rm.default_sector)?;
    r.note("ground_energy_oracle", ground_energy);
    let res = match noise.as_str() {
        "none" => kitaev_pea(&rm.h, &state, &cfg)?,
        "fig5" => {
            let regs = pea_registers(&rm.h, &cfg)?;
            let tc = TrajectoryConfig {
                n_trajectories: r.get("trajectories", a.trajectories, 50)?,
                base_seed: seed,
                ..Default::default()
            };
            kitaev_pea_noisy(&rm.h, &state, &cfg, &NoiseModel::fig5(&regs), &DeviceModel::default(), &tc)?
        }
        other => bail!("unknown noise preset {other:?} (none, fig5)"),
    };
    let mut signal = String::from("t,re_za,im_za\n");
    for (k, &t) in res.times.iter().enumerate() {
        writeln!(signal, "{},{},{}", csv_f(t), csv_f(res.signal[k].re), csv_f(res.signal[k].im))
            .unwrap();
    }
    out.write("pea_signal.csv", &signal)?;
    if noise == "fig5" {
        let mut err = String::from("t,za_err,ya_err\n");
        for (k, &t) in res.times.iter().enumerate() {
            writeln!(err, "{},{},{}", csv_f(t), csv_f(res.za_err[k]), csv_f(res.ya_err[k]))
                .unwrap();
        }
        out.write("pea_stderr.csv", &err)?;
    }
    let mut spec = String::from("omega,za_ft\n");
    for (k, &w) in res.spectrum.omega.iter().enumerate() {
        writeln!(spec, "{},{}", csv_f(w), csv_f(res.spectrum.magnitude[k])).unwrap();
    }
    out.write("pea_spectrum.csv", &spec)?;
    let peaks: Vec<_> = res
        .peaks
        .iter()
        .map(|p| {
            serde_json::json!({
                "omega": p.omega,
                "energy": p.energy,
                "height": p.height,
                "weight": p.weight,
            })
        })
        .collect();
    let js = serde_json::json!({
        "energy_shift": res.energy_shift,
        "peaks": peaks,
    });
    out.write("pea_peaks.json", &(serde_json::to_string_pretty(&js)? + "\n"))?;
    out.manifest("pea", &r, Some(seed))
}

// -------------------------------------------------------------- spectral --

#[derive(Args)]
struct SpectralArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    compile: CompileFlags,
    #[arg(long)]
    sector: Option<usize>,
    /// Mode index of the later insertion.
    #[arg(long)]
    i: Option<usize>,
    /// Mode index of the t = 0 insertion.
    #[arg(long)]
    j: Option<usize>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    substeps: Option<usize>,
    /// Lorentzian damping; default resolves the finite record.
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    omega_min: Option<f64>,
    #[arg(long)]
    omega_max: Option<f64>,
    #[arg(long)]
    omega_points: Option<usize>,
    #[arg(long)]
    noise: Option<String>,
    #[arg(long)]
    trajectories: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

fn cmd_spectral(a: SpectralArgs) -> Result<()> {
    let (mut r, mut out) = a.common.open("spectral")?;
    let rm = resolve_model(&mut r, &a.model)?;
    let (opts, grouping) = a.compile.resolve(&mut r)?;
    let grid = TimeGrid::new(r.get("dt", a.dt, 0.25)?, r.get("samples", a.samples, 64)?);
    let mut cfg = CorrelatorConfig::new(grid);
    cfg.substeps = r.get("substeps", a.substeps, 4)?;
    cfg.compile = opts;
    cfg.grouping = grouping;
    let i = r.get("i", a.i, 0)?;
    let j = r.get("j", a.j, 0)?;
    let noise = r.get("noise", a.noise, "none".to_string())?;
    let seed = r.get("seed", a.seed, 7)?;
    let (ground_energy, state) = prepared_state(&mut r, &rm.h, a.sector, rm.default_sector)?;
    r.note("ground_energy_oracle", ground_energy);
    // correlators address modes through the same register layout the
    // Hamiltonian was encoded on; JW with identity ordering matches the
    // built-in models and file inputs alike
    let enc = fermicav::encoding::Encoding::jw(rm.h.n_qubits());
    let corr = match noise.as_str() {
        "none" => dynamical_correlator(&rm.h, &state, i, j, &enc, &cfg)?,
        "fig5" => {
            let regs = correlator_registers(&rm.h, &cfg)?;
            let tc = TrajectoryConfig {
                n_trajectories: r.get("trajectories", a.trajectories, 50)?,
                base_seed: seed,
                ..Default::default()
            };
            dynamical_correlator_noisy(
                &rm.h,
                &state,
                i,
                j,
                &enc,
                &cfg,
                &NoiseModel::fig5(&regs),
                &DeviceModel::default(),
                &tc,
            )?
        }
        other => bail!("unknown noise preset {other:?} (none, fig5)"),
    };
    let eta = match r.get_opt("eta", a.eta)? {
        Some(e) => e,
        None => {
            let e = default_eta(&grid);
            r.note("eta", e);
            e
        }
    };
    let omega_min = r.get("omega_min", a.omega_min, -5.0)?;
    let omega_max = r.get("omega_max", a.omega_max, 5.0)?;
    let omega_points = r.get("omega_points", a.omega_points, 1001)?;
    if omega_points < 2 || !(omega_max > omega_min) {
        bail!("need omega_min < omega_max and at least two omega points");
    }
    let omegas: Vec<f64> = (0..omega_points)
        .map(|k| omega_min + (omega_max - omega_min) * k as f64 / (omega_points - 1) as f64)
        .collect();
    let sf = spectral_function(&corr, eta, &omegas)?;
    let mut corr_csv =
        String::from("t,re_qq,im_qq,re_qp,im_qp,re_gp,im_gp,re_gh,im_gh\n");
    for (k, &t) in corr.times.iter().enumerate() {
        writeln!(
            corr_csv,
            "{},{},{},{},{},{},{},{},{}",
            csv_f(t),
            csv_f(corr.qq[k].re),
            csv_f(corr.qq[k].im),
            csv_f(corr.qp[k].re),
            csv_f(corr.qp[k].im),
            csv_f(corr.gp[k].re),
            csv_f(corr.gp[k].im),
            csv_f(corr.gh[k].re),
            csv_f(corr.gh[k].im)
        )
        .unwrap();
    }
    out.write("correlator.csv", &corr_csv)?;
    let mut a_csv = String::from("omega,a\n");
    for (k, &w) in sf.omega.iter().enumerate() {
        writeln!(a_csv, "{},{}", csv_f(w), csv_f(sf.a[k])).unwrap();
    }
    out.write("spectral.csv", &a_csv)?;
    // peak report on the (clamped) spectral weight
    let sp = Spectrum {
        omega: sf.omega.clone(),
        magnitude: sf.a.iter().map(|&x| x.max(0.0)).collect(),
        window_sum: 1.0,
    };
    let peaks: Vec<_> = find_peaks(&sp, 0.1)
        .into_iter()
        .map(|p| serde_json::json!({ "omega": p.omega, "height": p.height }))
        .collect();
    let js = serde_json::json!({
        "eta": eta,
        "sum_rule": spectral_sum_rule(&sf),
        "peaks": peaks,
    });
    out.write("spectral_peaks.json", &(serde_json::to_string_pretty(&js)? + "\n"))?;
    out.manifest("spectral", &r, Some(seed))
}

// ------------------------------------------------------------------ ipea --

#[derive(Args)]
struct IpeaArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    compile: CompileFlags,
    #[arg(long)]
    sector: Option<usize>,
    /// Base evolution time t0.
    #[arg(long)]
    t0: Option<f64>,
    /// Number of phase bits.
    #[arg(long)]
    bits: Option<usize>,
    /// Trotter steps per t0.
    #[arg(long)]
    substeps: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

fn cmd_ipea(a: IpeaArgs) -> Result<()> {
    let (mut r, mut out) = a.common.open("ipea")?;
    let rm = resolve_model(&mut r, &a.model)?;
    let (opts, grouping) = a.compile.resolve(&mut r)?;
    let mut cfg = IpeaConfig::new(r.get("t0", a.t0, 0.5)?, r.get("bits", a.bits, 8)?);
    cfg.substeps = r.get("substeps", a.substeps, 4)?;
    cfg.compile = opts;
    cfg.grouping = grouping;
    cfg.seed = r.get("seed", a.seed, 7)?;
    let (ground_energy, state) = prepared_state(&mut r, &rm.h, a.sector, rm.default_sector)?;
    r.note("ground_energy_oracle", ground_energy);
    let res = ipea(&rm.h, &state, &cfg)?;
    let bit_string: String = res.bits.iter().map(|b| char::from(b'0' + b)).collect();
    let js = serde_json::json!({
        "bits": bit_string,
        "phase": res.phase,
        "energy": res.energy,
        "alias_period": std::f64::consts::PI / cfg.t0,
    });
    out.write("ipea.json", &(serde_json::to_string_pretty(&js)? + "\n"))?;
    out.manifest("ipea", &r, Some(cfg.seed))
}

// ------------------------------------------------------------- fluxonium --

#[derive(Args)]
struct FluxoniumArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long)]
    e_c: Option<f64>,
    #[arg(long)]
    e_l: Option<f64>,
    /// External flux over the flux quantum.
    #[arg(long)]
    flux: Option<f64>,
    /// Comma-separated junction energies to sweep.
    #[arg(long)]
    e_j: Option<String>,
    #[arg(long)]
    basis: Option<usize>,
    /// Qudit-cavity coupling for the QND column.
    #[arg(long)]
    g: Option<f64>,
    /// Cavity frequency for the QND column.
    #[arg(long)]
    omega: Option<f64>,
}

fn cmd_fluxonium(a: FluxoniumArgs) -> Result<()> {
    let (mut r, mut out) = a.common.open("fluxonium")?;
    let base = FluxoniumParams {
        e_c: r.get("e_c", a.e_c, 0.5)?,
        e_j: 0.0,
        e_l: r.get("e_l", a.e_l, 0.75)?,
        flux: r.get("flux", a.flux, 0.4)?,
    };
    let list = r.get("e_j", a.e_j, "4,8,12,16,20".to_string())?;
    let ejs: Vec<f64> = list
        .split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|e| anyhow!("bad E_J value {s:?}: {e}")))
        .collect::<Result<_>>()?;
    let basis = r.get("basis", a.basis, 120)?;
    let g = r.get("g", a.g, 0.05)?;
    let omega = r.get("omega", a.omega, 1.9)?;
    let rows = ej_sweep(&base, &ejs, basis, g, omega)?;
    out.write("fluxonium_sweep.csv", &sweep_to_csv(&rows))?;
    out.manifest("fluxonium", &r, None)
}
