use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use toric_negativity::closedform::{anyon_report, AnyonModel, AreaLaw};
use toric_negativity::entanglement::OracleCaps;
use toric_negativity::groundstate::{Convention, Flux, DEFAULT_MAX_QUBITS};
use toric_negativity::harness::{
    build_state, resolve_states, run_row, run_sweep, write_csv, write_report, ComparisonRow, HarnessError,
    PartitionDoc, Quantity, RowConfig, StateSpec, SweepConfig, SweepReport, Triple, DEFAULT_TOLERANCE, SCHEMA_VERSION,
};
use toric_negativity::pauli::Direction;

#[derive(Parser)]
#[command(name = "toricneg", version, about = "Entanglement negativity of toric-code ground states")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Args)]
struct Common {
    /// Input file: partition (compute, predict), sweep config (sweep) or report JSON (report).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; JSON goes to stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Absolute tolerance on oracle vs prediction [default: 1e-8].
    #[arg(long, global = true)]
    tolerance: Option<f64>,
    /// State-vector size cap in qubits; larger rows become prediction-only [default: 24].
    #[arg(long, global = true)]
    max_qubits: Option<usize>,
    /// Seed for random flux coefficients.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum StateArg {
    Psi0,
    Uniform,
    I,
    E,
    M,
    Em,
    Random,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Toric,
    Fibonacci,
    Custom,
}

#[derive(Clone, Copy, ValueEnum)]
enum DirectionArg {
    Vertical,
    Horizontal,
}

#[derive(Args)]
struct RowArgs {
    #[arg(long, value_enum, default_value = "psi0")]
    state: StateArg,
    #[arg(long, value_enum, default_value = "vertical")]
    loop_direction: DirectionArg,
    /// Also write the state vector to state.csv in the output directory.
    #[arg(long)]
    dump_state: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Oracle and prediction for one partition file.
    Compute(RowArgs),
    /// Run a sweep config; the bundled partition sequence when no config is given.
    Sweep,
    /// Closed-form prediction only, without state-vector caps.
    Predict(RowArgs),
    /// Generic anyon-model closed forms.
    AnyonCalc {
        #[arg(long, value_enum, default_value = "toric")]
        model: ModelArg,
        /// Quantum dimensions for a custom model.
        #[arg(long, value_delimiter = ',')]
        d: Vec<f64>,
        /// Flux probabilities |c_i|²; uniform when absent.
        #[arg(long, value_delimiter = ',')]
        p: Vec<f64>,
        /// Boundary lengths |Γ_m|.
        #[arg(long, value_delimiter = ',', required = true)]
        boundaries: Vec<f64>,
        #[arg(long, default_value_t = 1.0)]
        a: f64,
        #[arg(long, default_value_t = 1.0)]
        a_prime: f64,
    },
    /// Re-render a JSON report as CSV.
    Report,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, Box<dyn std::error::Error>> {
    let c = &cli.common;
    match cli.cmd {
        Command::Sweep => {
            let mut cfg = match &c.config {
                Some(p) => SweepConfig::load(p)?,
                None => SweepConfig::settings_sequence(),
            };
            if let Some(t) = c.tolerance {
                cfg.tolerance = t;
            }
            if let Some(m) = c.max_qubits {
                cfg.max_qubits = m;
            }
            if let Some(s) = c.seed {
                cfg.seed = s;
            }
            let report = run_sweep(&cfg)?;
            for r in &report.rows {
                if r.oracle.is_none() {
                    eprintln!("setting {} ({}): {}", r.setting, r.state, status_reason(r));
                }
            }
            emit(&report, c.out.as_deref())?;
            Ok(if report.all_pass { ExitCode::SUCCESS } else { ExitCode::FAILURE })
        }
        Command::Compute(args) => {
            let row = single_row(c, &args, c.max_qubits.unwrap_or(DEFAULT_MAX_QUBITS))?;
            let report = wrap(row);
            emit(&report, c.out.as_deref())?;
            if args.dump_state {
                let out = c.out.as_deref().ok_or("--dump-state needs --out")?;
                dump_state(&report.rows[0], out)?;
            }
            Ok(if report.all_pass { ExitCode::SUCCESS } else { ExitCode::FAILURE })
        }
        Command::Predict(args) => {
            let report = wrap(single_row(c, &args, 0)?);
            emit(&report, c.out.as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::AnyonCalc { model, d, p, boundaries, a, a_prime } => {
            let model = match model {
                ModelArg::Toric => AnyonModel::toric_code(),
                ModelArg::Fibonacci => AnyonModel::fibonacci(),
                ModelArg::Custom => AnyonModel::new("custom", d)?,
            };
            let p = if p.is_empty() { vec![1.0 / model.count() as f64; model.count()] } else { p };
            let report = anyon_report(&model, &p, &boundaries, AreaLaw { a, a_prime })?;
            if let Some(reason) = &report.renyi_half_refusal {
                eprintln!("half-Rényi negativity refused: {reason}");
            }
            let text = serde_json::to_string_pretty(&report)? + "\n";
            match &c.out {
                Some(dir) => {
                    std::fs::create_dir_all(dir)?;
                    std::fs::write(dir.join("anyon.json"), text)?;
                }
                None => stdout(&text)?,
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Report => {
            let path = c.config.as_deref().ok_or("report needs --config <report.json>")?;
            let report: SweepReport = serde_json::from_str(&std::fs::read_to_string(path)?)?;
            if report.schema_version != SCHEMA_VERSION {
                return Err(HarnessError::SchemaVersion(report.schema_version).into());
            }
            match &c.out {
                Some(dir) => {
                    std::fs::create_dir_all(dir)?;
                    write_csv(&report, std::fs::File::create(dir.join("report.csv"))?)?;
                }
                None => {
                    let mut buf = Vec::new();
                    write_csv(&report, &mut buf)?;
                    stdout(&String::from_utf8(buf)?)?;
                }
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn single_row(c: &Common, args: &RowArgs, max_qubits: usize) -> Result<ComparisonRow, Box<dyn std::error::Error>> {
    let path = c.config.as_deref().ok_or("needs --config <partition.json>")?;
    let doc: PartitionDoc = serde_json::from_str(&std::fs::read_to_string(path)?)?;
    let lat = doc.lattice.build()?;
    let regions = Triple::from_doc(&doc, &lat)?;
    let spec = match args.state {
        StateArg::Psi0 => StateSpec::Psi0,
        StateArg::Uniform => StateSpec::Uniform,
        StateArg::I => StateSpec::Flux(Flux::I),
        StateArg::E => StateSpec::Flux(Flux::E),
        StateArg::M => StateSpec::Flux(Flux::M),
        StateArg::Em => StateSpec::Flux(Flux::Em),
        StateArg::Random => StateSpec::Random { count: 1 },
    };
    let state = resolve_states(&[spec], c.seed.unwrap_or(0))?.remove(0);
    let loop_direction = match args.loop_direction {
        DirectionArg::Vertical => Direction::Vertical,
        DirectionArg::Horizontal => Direction::Horizontal,
    };
    let cfg = RowConfig {
        lattice: doc.lattice,
        regions,
        state: state.spec,
        convention: Convention { loop_direction },
        tolerance: c.tolerance.unwrap_or(DEFAULT_TOLERANCE),
        max_qubits,
        caps: OracleCaps::default(),
        quantities: vec![Quantity::LogNegativity, Quantity::MutualInformation, Quantity::Schmidt, Quantity::Classical],
        renyi_orders: vec![0.5, 2.0],
    };
    Ok(run_row("custom", &state.label, &cfg)?)
}

fn wrap(row: ComparisonRow) -> SweepReport {
    let all_pass = !row.failed();
    SweepReport {
        schema_version: SCHEMA_VERSION,
        name: "custom".into(),
        tolerance: row.config.tolerance,
        rows: vec![row],
        flags: None,
        all_pass,
    }
}

fn status_reason(r: &ComparisonRow) -> String {
    serde_json::to_string(&r.status).unwrap_or_default()
}

fn emit(report: &SweepReport, out: Option<&Path>) -> Result<(), HarnessError> {
    match out {
        Some(dir) => write_report(report, dir),
        None => {
            Ok(stdout(&(serde_json::to_string_pretty(report)? + "\n"))?)
        }
    }
}

fn dump_state(row: &ComparisonRow, dir: &Path) -> Result<(), Box<dyn std::error::Error>> {
    let cfg = &row.config;
    let lat = cfg.lattice.build()?;
    let state = resolve_states(std::slice::from_ref(&cfg.state), 0)?.remove(0);
    let psi = build_state(&lat, &state, cfg.convention, cfg.max_qubits)?;
    psi.dump_csv(std::fs::File::create(dir.join("state.csv"))?)?;
    Ok(())
}

/// Writes to stdout; a closed pipe (e.g. `| head`) is not an error.
fn stdout(text: &str) -> std::io::Result<()> {
    use std::io::Write;
    match std::io::stdout().lock().write_all(text.as_bytes()) {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        r => r,
    }
}
