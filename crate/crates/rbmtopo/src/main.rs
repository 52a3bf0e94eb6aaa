//! Command-line front end: builds RBM parameterizations from model names,
//! hypergraph files, circuit files, or stabilizer lists; verifies them
//! against oracles; and inspects stored networks.
//!
//! Exit codes: 0 success / verification pass, 1 verification failure,
//! 2 usage or input-format error, 3 synthesis error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::OnceLock;
use std::time::Instant;

use clap::{ArgGroup, Args, Parser, Subcommand};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rbmtopo::clifford::{circuit_to_rbm, dense_simulate, CliffordCircuit};
use rbmtopo::models::{
    build_model, hypergraph_state, registry, Hypergraph, ModelBundle, ModelMeta, ModelParams,
    OracleSource,
};
use rbmtopo::phase_poly::{fit_cubic_phase, parse_signed_support, ClosedFormState};
use rbmtopo::rbm::{BitString, DenseState, RbmNetwork, DEFAULT_DENSE_CAP};
use rbmtopo::stabilizer::{stabilizer_state_to_rbm, StabilizerGenerators};
use rbmtopo::verify::{check_bundle, resource_report, VerifyOptions};
use rbmtopo::{Error, Result};

#[derive(Parser)]
#[command(
    name = "rbmtopo",
    version,
    about = "Exact RBM parameterizations of topologically ordered states, with differential verification"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build an RBM from a model name, hypergraph, circuit, or stabilizer list
    Build(BuildArgs),
    /// Check a stored RBM against an oracle; exit 0 on pass, 1 on failure
    Verify(VerifyArgs),
    /// Print the amplitude of one basis configuration
    Amp(AmpArgs),
    /// Print neuron and weight counts for a stored RBM
    Stats(StatsArgs),
    /// Re-emit a stored RBM as canonical JSON, or as a dense state vector
    Export(ExportArgs),
    /// Fit a sign pattern on a support list to a closed-form phase polynomial
    Fit(FitArgs),
    /// List the built-in model registry
    ListModels,
}

/// State source shared by `build`, `verify --oracle auto`, and `stats`.
#[derive(Args)]
#[command(group(
    ArgGroup::new("source")
        .args(["model", "hypergraph", "circuit", "stabilizers"])
))]
struct SourceArgs {
    /// Named model from the registry (see list-models)
    #[arg(long)]
    model: Option<String>,
    /// Hypergraph file: `n <count>` header, one edge per line
    #[arg(long)]
    hypergraph: Option<PathBuf>,
    /// Circuit file: `wires <n>`, optional `inputs ...`, one gate per line
    #[arg(long)]
    circuit: Option<PathBuf>,
    /// Stabilizer file: optional `n <count>` header, one signed Pauli string per line
    #[arg(long)]
    stabilizers: Option<PathBuf>,
    /// Lattice width (toric, double-semion, czx, ccz)
    #[arg(long)]
    lx: Option<usize>,
    /// Lattice height (toric, double-semion, czx, ccz)
    #[arg(long)]
    ly: Option<usize>,
    /// Cubic torus side (haah)
    #[arg(long)]
    l: Option<usize>,
    /// Qubit count (dicke)
    #[arg(long)]
    n: Option<usize>,
    /// Hamming weight (dicke)
    #[arg(long)]
    k: Option<usize>,
    /// Chain length in sites (aklt)
    #[arg(long)]
    sites: Option<usize>,
    /// Request open boundary conditions where a model has the option
    #[arg(long)]
    open: bool,
}

#[derive(Args)]
struct BuildArgs {
    #[command(flatten)]
    source: SourceArgs,
    /// Output path for the RBM JSON (stdout when omitted)
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// RBM JSON produced by `build` or `export`
    rbm_file: PathBuf,
    #[command(flatten)]
    source: SourceArgs,
    /// `auto` rebuilds the oracle from the source flags; otherwise a dense
    /// state JSON file
    #[arg(long, default_value = "auto")]
    oracle: String,
    /// Fidelity must reach 1 - tol
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// Aligned amplitude error must stay at or below this
    #[arg(long, default_value_t = 1e-6)]
    tol_amp: f64,
    /// Seed for spot-check sampling beyond the dense cap
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Emit only the JSON report (default prints a table then the JSON)
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct AmpArgs {
    rbm_file: PathBuf,
    /// Basis configuration as a 0/1 string, first character most significant
    #[arg(long)]
    basis: String,
}

#[derive(Args)]
struct StatsArgs {
    rbm_file: PathBuf,
    #[command(flatten)]
    source: SourceArgs,
}

#[derive(Args)]
struct ExportArgs {
    rbm_file: PathBuf,
    /// Emit the dense state vector instead of the network
    #[arg(long)]
    dense: bool,
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FitArgs {
    /// File of `BITSTRING SIGN` lines with sign +1 or -1
    #[arg(long)]
    support: PathBuf,
    /// Expected visible count (validated against the bitstring width)
    #[arg(long)]
    n: Option<usize>,
    #[arg(short, long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}

/// 2 for malformed input, 3 for failures inside synthesis.
fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Parse(_)
        | Error::InvalidInput(_)
        | Error::DimensionMismatch(_)
        | Error::Io(_)
        | Error::Json(_) => 2,
        Error::Synthesis(_)
        | Error::Unsupported(_)
        | Error::FitInfeasible { .. }
        | Error::NonFinite(_)
        | Error::ZeroNorm(_)
        | Error::DenseCapExceeded { .. } => 3,
    }
}

fn dense_cap() -> Result<usize> {
    match std::env::var("RBMTOPO_DENSE_CAP") {
        Ok(raw) => raw.parse().map_err(|_| {
            Error::InvalidInput(format!("RBMTOPO_DENSE_CAP must be an integer, got {raw:?}"))
        }),
        Err(_) => Ok(DEFAULT_DENSE_CAP),
    }
}

fn run(command: Command) -> Result<ExitCode> {
    match command {
        Command::Build(args) => cmd_build(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Amp(args) => cmd_amp(args),
        Command::Stats(args) => cmd_stats(args),
        Command::Export(args) => cmd_export(args),
        Command::Fit(args) => cmd_fit(args),
        Command::ListModels => cmd_list_models(),
    }
}

/// Oracle for circuit sources: the dense simulation, computed once.
struct CircuitOracle {
    circuit: CliffordCircuit,
    cap: usize,
    cache: OnceLock<Result<DenseState>>,
}

impl CircuitOracle {
    fn state(&self) -> Result<&DenseState> {
        self.cache
            .get_or_init(|| dense_simulate(&self.circuit, self.cap))
            .as_ref()
            .map_err(|e| Error::Synthesis(format!("circuit oracle: {e}")))
    }
}

impl OracleSource for CircuitOracle {
    fn n(&self) -> usize {
        self.circuit.output_wires().len()
    }

    fn amplitude(&self, v: &BitString) -> Result<C64> {
        let state = self.state()?;
        if v.len() != state.n {
            return Err(Error::DimensionMismatch(format!(
                "oracle expects {} bits, got {}",
                state.n,
                v.len()
            )));
        }
        Ok(state.amps[v.to_index()])
    }

    fn dense(&self, cap: usize) -> Result<DenseState> {
        if self.n() > cap {
            return Err(Error::DenseCapExceeded { needed: self.n(), cap });
        }
        Ok(self.state()?.clone())
    }
}

/// Oracle for stabilizer sources: the projector onto the stabilized space,
/// applied to a seeded random vector. Independent of circuit synthesis.
struct StabilizerOracle {
    gens: StabilizerGenerators,
    cap: usize,
    cache: OnceLock<Result<DenseState>>,
}

impl StabilizerOracle {
    fn project(&self) -> Result<DenseState> {
        let n = self.gens.n();
        if n > self.cap {
            return Err(Error::DenseCapExceeded { needed: n, cap: self.cap });
        }
        for attempt in 0..4u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(0xB0B5 + attempt);
            let mut state = DenseState::zero(n);
            for amp in state.amps.iter_mut() {
                *amp = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            }
            for g in self.gens.generators() {
                let moved = g.apply_dense(&state)?;
                for (a, b) in state.amps.iter_mut().zip(moved.amps) {
                    *a = 0.5 * (*a + b);
                }
            }
            if state.norm_sqr() > 1e-18 {
                return Ok(state);
            }
        }
        Err(Error::ZeroNorm(
            "stabilizer projector annihilated every probe vector".into(),
        ))
    }

    fn state(&self) -> Result<&DenseState> {
        self.cache
            .get_or_init(|| self.project())
            .as_ref()
            .map_err(|e| Error::Synthesis(format!("stabilizer oracle: {e}")))
    }
}

impl OracleSource for StabilizerOracle {
    fn n(&self) -> usize {
        self.gens.n()
    }

    fn amplitude(&self, v: &BitString) -> Result<C64> {
        let state = self.state()?;
        if v.len() != state.n {
            return Err(Error::DimensionMismatch(format!(
                "oracle expects {} bits, got {}",
                state.n,
                v.len()
            )));
        }
        Ok(state.amps[v.to_index()])
    }

    fn dense(&self, cap: usize) -> Result<DenseState> {
        if self.n() > cap {
            return Err(Error::DenseCapExceeded { needed: self.n(), cap });
        }
        Ok(self.state()?.clone())
    }
}

/// Oracle loaded from a dense state JSON file.
struct DenseFileOracle {
    state: DenseState,
}

impl OracleSource for DenseFileOracle {
    fn n(&self) -> usize {
        self.state.n
    }

    fn amplitude(&self, v: &BitString) -> Result<C64> {
        if v.len() != self.state.n {
            return Err(Error::DimensionMismatch(format!(
                "oracle expects {} bits, got {}",
                self.state.n,
                v.len()
            )));
        }
        Ok(self.state.amps[v.to_index()])
    }
}

fn model_params(source: &SourceArgs) -> ModelParams {
    ModelParams {
        lx: source.lx,
        ly: source.ly,
        l: source.l,
        n: source.n,
        k: source.k,
        sites: source.sites,
        periodic: !source.open,
    }
}

/// Builds the bundle described by the source flags. Exactly one source must
/// be present.
fn bundle_from_source(source: &SourceArgs, cap: usize) -> Result<ModelBundle> {
    let picked = [
        source.model.is_some(),
        source.hypergraph.is_some(),
        source.circuit.is_some(),
        source.stabilizers.is_some(),
    ]
    .iter()
    .filter(|&&p| p)
    .count();
    if picked != 1 {
        return Err(Error::InvalidInput(
            "exactly one of --model, --hypergraph, --circuit, --stabilizers is required".into(),
        ));
    }
    if let Some(name) = &source.model {
        return build_model(name, &model_params(source));
    }
    if let Some(path) = &source.hypergraph {
        let hg = Hypergraph::parse(&read_file(path)?)?;
        return hypergraph_state(&hg);
    }
    if let Some(path) = &source.circuit {
        let circuit = CliffordCircuit::parse(&read_file(path)?)?;
        let rbm = circuit_to_rbm(&circuit)?;
        let n = rbm.n_visible();
        let meta = ModelMeta {
            n_qubits: n,
            n_interactions: circuit.gates().len().max(1),
            params: vec![("wires".into(), circuit.n_wires())],
        };
        return Ok(ModelBundle {
            name: "circuit".into(),
            rbm,
            oracle: Box::new(CircuitOracle {
                circuit,
                cap,
                cache: OnceLock::new(),
            }),
            meta,
        });
    }
    let path = source.stabilizers.as_ref().expect("checked above");
    let gens = StabilizerGenerators::parse(&read_file(path)?)?;
    let rbm = stabilizer_state_to_rbm(&gens)?;
    let meta = ModelMeta {
        n_qubits: gens.n(),
        n_interactions: gens.generators().len(),
        params: vec![("generators".into(), gens.generators().len())],
    };
    Ok(ModelBundle {
        name: "stabilizers".into(),
        rbm,
        oracle: Box::new(StabilizerOracle {
            gens,
            cap,
            cache: OnceLock::new(),
        }),
        meta,
    })
}

fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))
}

/// Writes to stdout, treating a closed pipe as a normal early exit.
fn emit_raw(content: &str) {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    if let Err(e) = out.write_all(content.as_bytes()) {
        if e.kind() == std::io::ErrorKind::BrokenPipe {
            std::process::exit(0);
        }
        eprintln!("error: writing to stdout: {e}");
        std::process::exit(2);
    }
}

fn emit(line: &str) {
    emit_raw(line);
    emit_raw("\n");
}

/// Writes `content` terminated by exactly one newline, so a file target is
/// byte-identical to the stdout emission.
fn write_output(out: Option<&PathBuf>, content: &str) -> Result<()> {
    let text = if content.ends_with('\n') {
        content.to_string()
    } else {
        format!("{content}\n")
    };
    match out {
        Some(path) => {
            std::fs::write(path, text)?;
            Ok(())
        }
        None => {
            emit_raw(&text);
            Ok(())
        }
    }
}

fn cmd_build(args: BuildArgs) -> Result<ExitCode> {
    let start = Instant::now();
    let bundle = bundle_from_source(&args.source, dense_cap()?)?;
    let json = bundle.rbm.to_json_string()?;
    let elapsed = start.elapsed().as_secs_f64();
    let info = format!(
        "model {}: visible {} hidden {} built in {:.3}s",
        bundle.name,
        bundle.rbm.n_visible(),
        bundle.rbm.n_hidden(),
        elapsed
    );
    match &args.out {
        Some(path) => {
            write_output(Some(path), &json)?;
            emit(&info);
            emit(&format!("wrote {}", path.display()));
        }
        None => {
            emit(&json);
            eprintln!("{info}");
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(args: VerifyArgs) -> Result<ExitCode> {
    let cap = dense_cap()?;
    let rbm = RbmNetwork::from_json_str(&read_file(&args.rbm_file)?)?;
    let bundle = if args.oracle == "auto" {
        let mut bundle = bundle_from_source(&args.source, cap)?;
        if bundle.rbm.n_visible() != rbm.n_visible() {
            return Err(Error::DimensionMismatch(format!(
                "stored network has {} visible units but the rebuilt source has {}",
                rbm.n_visible(),
                bundle.rbm.n_visible()
            )));
        }
        bundle.rbm = rbm;
        bundle
    } else {
        let state = DenseState::from_json_str(&read_file(Path::new(&args.oracle))?)?;
        if state.n != rbm.n_visible() {
            return Err(Error::DimensionMismatch(format!(
                "stored network has {} visible units but the oracle file has {}",
                rbm.n_visible(),
                state.n
            )));
        }
        let meta = ModelMeta {
            n_qubits: state.n,
            n_interactions: 1,
            params: Vec::new(),
        };
        ModelBundle {
            name: "file-oracle".into(),
            rbm,
            oracle: Box::new(DenseFileOracle { state }),
            meta,
        }
    };
    let opts = VerifyOptions {
        tol: args.tol,
        tol_amp: args.tol_amp,
        dense_cap: cap,
        seed: args.seed,
        ..VerifyOptions::default()
    };
    let report = check_bundle(&bundle, &opts)?;
    if args.json {
        emit(&report.to_json_string()?);
    } else {
        emit_raw(&report.to_table());
        emit(&report.to_json_string()?);
    }
    Ok(if report.pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn cmd_amp(args: AmpArgs) -> Result<ExitCode> {
    let rbm = RbmNetwork::from_json_str(&read_file(&args.rbm_file)?)?;
    let v = BitString::parse(&args.basis)?;
    let amp = rbm.amplitude(&v)?;
    emit(&format!("{} {}", amp.re, amp.im));
    Ok(ExitCode::SUCCESS)
}

fn cmd_stats(args: StatsArgs) -> Result<ExitCode> {
    let rbm = RbmNetwork::from_json_str(&read_file(&args.rbm_file)?)?;
    let has_source = args.source.model.is_some()
        || args.source.hypergraph.is_some()
        || args.source.circuit.is_some()
        || args.source.stabilizers.is_some();
    if has_source {
        let mut bundle = bundle_from_source(&args.source, dense_cap()?)?;
        if bundle.rbm.n_visible() != rbm.n_visible() {
            return Err(Error::DimensionMismatch(format!(
                "stored network has {} visible units but the source has {}",
                rbm.n_visible(),
                bundle.rbm.n_visible()
            )));
        }
        bundle.rbm = rbm;
        emit_raw(&resource_report(&bundle).to_table());
    } else {
        let rows = [
            ("visible units", rbm.n_visible().to_string()),
            ("hidden units", rbm.n_hidden().to_string()),
            ("nonzero weights", rbm.weight_count().to_string()),
            ("sparsity", format!("{:.4}", rbm.sparsity())),
        ];
        let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
        for (k, v) in rows {
            emit(&format!("{k:<width$}  {v}"));
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_export(args: ExportArgs) -> Result<ExitCode> {
    let rbm = RbmNetwork::from_json_str(&read_file(&args.rbm_file)?)?;
    let content = if args.dense {
        rbm.dense_state(dense_cap()?)?.to_json_string()?
    } else {
        rbm.to_json_string()?
    };
    write_output(args.out.as_ref(), &content)
        .map(|()| ExitCode::SUCCESS)
}

fn cmd_fit(args: FitArgs) -> Result<ExitCode> {
    let (configs, signs, n) = parse_signed_support(&read_file(&args.support)?)?;
    if let Some(expected) = args.n {
        if expected != n {
            return Err(Error::InvalidInput(format!(
                "--n {expected} does not match the {n}-bit support file"
            )));
        }
    }
    let phase = fit_cubic_phase(&configs, &signs, n)?;
    let mut state = ClosedFormState::new(n);
    *state.phase_mut() = phase;
    write_output(args.out.as_ref(), &state.to_text())
        .map(|()| ExitCode::SUCCESS)
}

fn cmd_list_models() -> Result<ExitCode> {
    for info in registry() {
        emit(&format!("{:<15} {:<36} {}", info.name, info.params, info.summary));
    }
    Ok(ExitCode::SUCCESS)
}
