use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use jaccard_core::asymptotic::VarianceForm;
use jaccard_core::calibrate::{benchmark, simulate_and_test, write_benchmark, BenchmarkOptions};
use jaccard_core::error::ParseError;
use jaccard_core::fdr::Pi0Method;
use jaccard_core::matrix::{HeaderMode, ParseOptions, PresenceAbsenceMatrix};
use jaccard_core::pairs::{all_pairs_test, format_real, write_reports};
use jaccard_core::simulate::SimSpec;
use jaccard_core::{run_test, BinaryVector, Engine, EngineConfig, Error};

/// Centered Jaccard/Tanimoto similarity with significance testing.
#[derive(Parser, Debug)]
#[command(author, version, about, long_about = None)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Test one pair of binary vectors
    Test(TestArgs),
    /// Test every pair of rows of a presence-absence matrix
    Matrix(MatrixArgs),
    /// Simulate a query/panel mixture and emit a calibration table
    Simulate(SimulateArgs),
    /// Time the engines over a grid of vector lengths
    Benchmark(BenchmarkArgs),
}

#[derive(Args, Debug, Clone)]
struct EngineArgs {
    /// p-value engine
    #[arg(long, value_enum, default_value_t = EngineArg::Mca)]
    engine: EngineArg,

    /// MCA accuracy: the visited states hold mass >= 1 - epsilon
    #[arg(long, default_value_t = jaccard_core::mca::DEFAULT_EPSILON)]
    epsilon: f64,

    /// MCA: report the upper bound p_L + epsilon instead of p_L
    #[arg(long)]
    report_upper: bool,

    /// Bootstrap iterations (default 5 m)
    #[arg(long = "B", value_name = "N")]
    iterations: Option<usize>,

    /// Master random seed
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Bootstrap: use (1 + count) / (1 + B)
    #[arg(long)]
    add_one: bool,

    /// Largest m the exact engine accepts
    #[arg(long, default_value_t = jaccard_core::exact::DEFAULT_EXACT_CAP)]
    exact_cap: usize,

    /// Asymptotic engine variance: the closed form, or the
    /// delta-method variance that accounts for the plug-in expectation
    #[arg(long, value_enum, default_value_t = VarianceArg::ClosedForm)]
    asymptotic_variance: VarianceArg,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum VarianceArg {
    ClosedForm,
    PlugIn,
}

impl EngineArgs {
    fn config(&self) -> EngineConfig {
        EngineConfig {
            engine: self.engine.into(),
            epsilon: self.epsilon,
            report_upper: self.report_upper,
            iterations: self.iterations,
            seed: self.seed,
            add_one_smoothing: self.add_one,
            exact_cap: self.exact_cap,
            asymptotic_variance: match self.asymptotic_variance {
                VarianceArg::ClosedForm => VarianceForm::ClosedForm,
                VarianceArg::PlugIn => VarianceForm::PlugIn,
            },
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum EngineArg {
    Exact,
    Asymptotic,
    Bootstrap,
    Mca,
}

impl From<EngineArg> for Engine {
    fn from(e: EngineArg) -> Self {
        match e {
            EngineArg::Exact => Engine::Exact,
            EngineArg::Asymptotic => Engine::Asymptotic,
            EngineArg::Bootstrap => Engine::Bootstrap,
            EngineArg::Mca => Engine::Mca,
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Delimiter {
    Comma,
    Tab,
}

impl Delimiter {
    fn byte(self) -> u8 {
        match self {
            Delimiter::Comma => b',',
            Delimiter::Tab => b'\t',
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Header {
    Auto,
    Yes,
    No,
}

#[derive(Args, Debug, Clone)]
struct OutputArgs {
    /// Write the table here instead of stdout
    #[arg(long, short)]
    output: Option<PathBuf>,

    /// Output delimiter
    #[arg(long, value_enum, default_value_t = Delimiter::Comma)]
    out_delimiter: Delimiter,
}

#[derive(Args, Debug)]
struct TestArgs {
    /// First vector, e.g. 1,0,1,1 or 1011
    #[arg(long, required_unless_present = "a_file", conflicts_with = "a_file")]
    a: Option<String>,

    /// Second vector
    #[arg(long, required_unless_present = "b_file", conflicts_with = "b_file")]
    b: Option<String>,

    /// File holding the first vector (comma, tab, space or newline separated)
    #[arg(long)]
    a_file: Option<PathBuf>,

    /// File holding the second vector
    #[arg(long)]
    b_file: Option<PathBuf>,

    #[command(flatten)]
    engine: EngineArgs,

    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct MatrixArgs {
    /// Delimited 0/1 matrix: rows are species, columns are units
    #[arg(long, short)]
    input: PathBuf,

    /// Compare columns instead of rows
    #[arg(long)]
    transpose: bool,

    /// Input delimiter (detected when omitted)
    #[arg(long, value_enum)]
    delimiter: Option<Delimiter>,

    /// Whether the first line is a header
    #[arg(long, value_enum, default_value_t = Header::Auto)]
    header: Header,

    /// The first column holds data, not row labels
    #[arg(long)]
    no_row_labels: bool,

    /// π0 for q-values: a λ in [0, 1), "smoother", or "one"
    #[arg(long, default_value = "0.5", value_parser = parse_pi0)]
    pi0_method: Pi0Method,

    #[command(flatten)]
    engine: EngineArgs,

    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    /// Number of panel vectors tested against the query
    #[arg(long, default_value_t = 2000)]
    n: usize,

    /// Vector length
    #[arg(long, default_value_t = 100)]
    m: usize,

    /// Occurrence probability
    #[arg(long, default_value_t = 0.5)]
    p: f64,

    /// Fraction of true nulls
    #[arg(long, default_value_t = 1.0)]
    pi0: f64,

    /// Probability that a dependent coordinate copies the query
    #[arg(long, default_value_t = 0.5)]
    dependence: f64,

    /// π0 for q-values: a λ in [0, 1), "smoother", or "one"
    #[arg(long, default_value = "0.5", value_parser = parse_pi0)]
    pi0_method: Pi0Method,

    #[command(flatten)]
    engine: EngineArgs,

    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct BenchmarkArgs {
    /// Comma-separated vector lengths
    #[arg(long, value_delimiter = ',', default_values_t = [50, 100, 200, 300, 400, 500])]
    m_grid: Vec<usize>,

    /// Calls per engine and length
    #[arg(long, default_value_t = 10)]
    reps: usize,

    /// Comma-separated engines
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [EngineArg::Exact, EngineArg::Asymptotic, EngineArg::Bootstrap, EngineArg::Mca])]
    engines: Vec<EngineArg>,

    /// Per-call timeout in seconds; slower engines are skipped for larger m
    #[arg(long, default_value_t = 120.0)]
    timeout: f64,

    #[command(flatten)]
    engine: EngineArgs,

    #[command(flatten)]
    output: OutputArgs,
}

fn parse_pi0(s: &str) -> std::result::Result<Pi0Method, String> {
    match s {
        "smoother" => Ok(Pi0Method::Smoother),
        "one" | "bh" => Ok(Pi0Method::One),
        _ => match s.parse::<f64>() {
            Ok(l) if (0.0..1.0).contains(&l) => Ok(Pi0Method::Fixed(l)),
            _ => Err(format!("expected a λ in [0, 1), \"smoother\" or \"one\", got {s:?}")),
        },
    }
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn read_vector(inline: Option<&str>, file: Option<&Path>) -> Result<BinaryVector> {
    let text = match (inline, file) {
        (Some(s), _) => s.to_string(),
        (None, Some(p)) => std::fs::read_to_string(p).map_err(|e| {
            Error::Parse(ParseError {
                line: None,
                column: None,
                message: format!("cannot read {}: {e}", p.display()),
            })
        })?,
        (None, None) => unreachable!("clap requires one of the two"),
    };
    // files may spread the vector over several lines
    let joined = text.split_whitespace().collect::<Vec<_>>().join(" ");
    Ok(BinaryVector::parse(&joined)?)
}

fn run_test_command(args: &TestArgs) -> Result<()> {
    let a = read_vector(args.a.as_deref(), args.a_file.as_deref())?;
    let b = read_vector(args.b.as_deref(), args.b_file.as_deref())?;
    let cfg = args.engine.config();
    cfg.validate()?;
    let r = run_test(&a, &b, &cfg, 0)?;

    let opt_real = |x: Option<f64>| x.map(format_real).unwrap_or_default();
    let opt = |x: Option<String>| x.unwrap_or_default();
    let d = args.output.out_delimiter.byte() as char;
    let mut out = open_output(args.output.output.as_deref())?;
    let header = [
        "coefficient",
        "expectation",
        "centered",
        "p_value",
        "engine",
        "p_upper",
        "z",
        "states",
        "iterations",
        "exceedances",
    ];
    writeln!(out, "{}", header.join(&d.to_string()))?;
    let row = [
        format_real(r.coefficient),
        format_real(r.expectation),
        format_real(r.centered),
        format_real(r.p_value),
        r.engine.to_string(),
        opt_real(r.diagnostics.p_upper),
        opt_real(r.diagnostics.z),
        opt(r.diagnostics.states.map(|s| s.to_string())),
        opt(r.diagnostics.iterations.map(|s| s.to_string())),
        opt(r.diagnostics.exceedances.map(|s| s.to_string())),
    ];
    writeln!(out, "{}", row.join(&d.to_string()))?;
    out.flush()?;
    Ok(())
}

fn run_matrix_command(args: &MatrixArgs) -> Result<()> {
    let opts = ParseOptions {
        delimiter: args.delimiter.map(Delimiter::byte),
        header: match args.header {
            Header::Auto => HeaderMode::Auto,
            Header::Yes => HeaderMode::Present,
            Header::No => HeaderMode::Absent,
        },
        row_labels: !args.no_row_labels,
    };
    let mut matrix = PresenceAbsenceMatrix::read_path(&args.input, &opts)?;
    if args.transpose {
        matrix = matrix.transpose();
    }
    let result = all_pairs_test(&matrix, &args.engine.config(), args.pi0_method)?;
    for w in &result.warnings {
        eprintln!("warning: {w}");
    }
    eprintln!(
        "{} pairs of {} vectors (m = {}), pi0 = {}",
        result.reports.len(),
        matrix.n_rows(),
        matrix.n_columns(),
        result.pi0
    );
    let mut out = open_output(args.output.output.as_deref())?;
    write_reports(&result.reports, &mut out, args.output.out_delimiter.byte())?;
    out.flush()?;
    Ok(())
}

fn run_simulate_command(args: &SimulateArgs) -> Result<()> {
    let cfg = args.engine.config();
    let spec = SimSpec {
        n: args.n,
        m: args.m,
        p: args.p,
        pi0: args.pi0,
        dependence_strength: args.dependence,
        seed: cfg.seed,
    };
    let cal = simulate_and_test(&spec, &cfg, args.pi0_method)?;
    eprintln!(
        "null KS distance = {:.4}, pi0 estimate = {:.4}, FDP at q <= 0.1 = {:.4}",
        cal.null_ks_distance(),
        cal.pi0_estimate,
        cal.fdp(0.1)
    );
    let mut out = open_output(args.output.output.as_deref())?;
    cal.write(&mut out, args.output.out_delimiter.byte())?;
    out.flush()?;
    Ok(())
}

fn run_benchmark_command(args: &BenchmarkArgs) -> Result<()> {
    if args.m_grid.is_empty() || args.m_grid.contains(&0) {
        return Err(Error::InvalidConfig("--m-grid needs positive lengths".into()).into());
    }
    if args.timeout.is_nan() || args.timeout <= 0.0 {
        return Err(Error::InvalidConfig("--timeout must be positive".into()).into());
    }
    let base = args.engine.config();
    base.validate()?;
    let opts = BenchmarkOptions {
        m_grid: args.m_grid.clone(),
        reps: args.reps,
        engines: args.engines.iter().map(|&e| e.into()).collect(),
        timeout: Duration::from_secs_f64(args.timeout),
        base,
        seed: base.seed,
    };
    let rows = benchmark(&opts);
    for r in rows.iter().filter(|r| !r.note.is_empty()) {
        eprintln!("note: {} at m = {}: {}", r.engine, r.m, r.note);
    }
    let mut out = open_output(args.output.output.as_deref())?;
    write_benchmark(&rows, &mut out, args.output.out_delimiter.byte())?;
    out.flush()?;
    Ok(())
}

/// 2 for input problems, 3 for resource guards, 1 otherwise.
fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(e) if e.is_resource_guard() => 3,
        Some(e) if e.is_validation() => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Test(a) => run_test_command(a),
        Command::Matrix(a) => run_matrix_command(a),
        Command::Simulate(a) => run_simulate_command(a),
        Command::Benchmark(a) => run_benchmark_command(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
