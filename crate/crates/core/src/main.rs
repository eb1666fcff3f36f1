use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use mpmg::bounds::{BoundInputs, BoundReport};
use mpmg::harness::{
    progressive_study, run_experiment, sweep, validate_file, write_csv, Experiment,
    ExperimentConfig, PrecisionPlan, TrialRecord,
};
use mpmg::Error;

const EXIT_ASSERTION: u8 = 1;
const EXIT_CONFIG: u8 = 2;

#[derive(Parser)]
#[command(
    name = "mpmg",
    version,
    about = "Reduced-precision two-grid experiments and bounds"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Overrides {
    /// TOML experiment configuration; built-in defaults when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output CSV path; overrides `run.output_path`. `-` writes to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    /// Comma-separated significand widths.
    #[arg(long, value_delimiter = ',', conflicts_with = "pi_target")]
    bits: Option<Vec<u32>>,
    #[arg(long)]
    pi_target: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the configured trials and write a CSV report.
    Run(Overrides),
    /// Print predicted constants without running trials.
    Bounds(BoundsArgs),
    /// Run the configured trials over several problem sizes.
    Sweep {
        #[command(flatten)]
        overrides: Overrides,
        /// Comma-separated sizes (n in 1D, k in 2D).
        #[arg(long, value_delimiter = ',', required = true)]
        sizes: Vec<usize>,
    },
    /// Progressive-precision study over several sizes.
    Progressive {
        #[command(flatten)]
        overrides: Overrides,
        #[arg(long, value_delimiter = ',', default_values_t = [15usize, 31, 63])]
        sizes: Vec<usize>,
    },
    /// Re-check the pass flags of an existing CSV report.
    Validate { csv: PathBuf },
}

#[derive(Args)]
struct BoundsArgs {
    /// Derive inputs from this configuration's hierarchy.
    #[arg(long, conflicts_with = "eps")]
    config: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    bits: Option<Vec<u32>>,
    #[arg(long)]
    pi_target: Option<f64>,
    /// Explicit inputs: unit roundoff.
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    kappa: f64,
    #[arg(long, default_value_t = 1.0)]
    kappa_c: f64,
    #[arg(long, default_value_t = 1.0)]
    eta_a: f64,
    #[arg(long, default_value_t = 1.0)]
    eta_p: f64,
    #[arg(long, default_value_t = 1.0)]
    eta_m: f64,
    #[arg(long, default_value_t = 1.0)]
    eta_n: f64,
    #[arg(long, default_value_t = 3)]
    m_a: usize,
    #[arg(long, default_value_t = 3)]
    m_p: usize,
    #[arg(long, default_value_t = 1.0)]
    alpha_m: f64,
    #[arg(long, default_value_t = 1.0)]
    alpha_n: f64,
    #[arg(long, default_value_t = 0.0)]
    rho_star: f64,
    /// Print JSON instead of a table.
    #[arg(long)]
    json: bool,
}

enum Failure {
    Config(Error),
    Runtime(Error),
    Assertion(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Runtime(e)
    }
}

type Outcome = Result<(), Failure>;

fn load_config(o: &Overrides) -> Result<ExperimentConfig, Failure> {
    let mut c = match &o.config {
        Some(p) => ExperimentConfig::load(p).map_err(Failure::Config)?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = o.seed {
        c.run.rng_seed = s;
    }
    if let Some(t) = o.trials {
        c.run.trials = t;
    }
    if let Some(b) = &o.bits {
        c.precision = PrecisionPlan::bits(b.clone());
    }
    if let Some(t) = o.pi_target {
        c.precision = PrecisionPlan::progressive(t);
    }
    if let Some(p) = &o.out {
        c.run.output_path = Some(p.to_string_lossy().into_owned());
    }
    c.validate().map_err(Failure::Config)?;
    Ok(c)
}

fn emit(records: &[TrialRecord], path: Option<&str>) -> Result<(), Error> {
    match path {
        None | Some("-") => write_csv(io::stdout().lock(), records),
        Some(p) => write_csv(BufWriter::new(File::create(Path::new(p))?), records),
    }
}

fn check_records(records: &[TrialRecord]) -> Outcome {
    let failed = records.iter().filter(|r| !r.pass).count();
    eprintln!("{} trials, {} failed", records.len(), failed);
    if failed > 0 {
        return Err(Failure::Assertion(format!(
            "{failed} trial(s) violated a bound"
        )));
    }
    Ok(())
}

/// Config errors found while building the hierarchy count as bad config.
fn prepare_failure(e: Error) -> Failure {
    match e {
        Error::Experiment { ref source, .. }
            if matches!(
                **source,
                Error::InvalidArgument(_) | Error::NonContracting(_) | Error::CoarseDeviation(_)
            ) =>
        {
            Failure::Config(e)
        }
        e => Failure::Runtime(e),
    }
}

fn cmd_run(o: &Overrides) -> Outcome {
    let c = load_config(o)?;
    let records = run_experiment(&c).map_err(prepare_failure)?;
    emit(&records, c.run.output_path.as_deref())?;
    check_records(&records)
}

fn cmd_sweep(o: &Overrides, sizes: &[usize]) -> Outcome {
    let c = load_config(o)?;
    for &s in sizes {
        let mut probe = c.clone();
        probe.problem = c.problem.with_size(s);
        probe.validate().map_err(Failure::Config)?;
    }
    let records = sweep(&c, sizes).map_err(prepare_failure)?;
    emit(&records, c.run.output_path.as_deref())?;
    check_records(&records)
}

fn cmd_progressive(o: &Overrides, sizes: &[usize]) -> Outcome {
    let c = load_config(o)?;
    let target = c
        .precision
        .pi_target
        .or(o.pi_target)
        .unwrap_or(2f64.powi(-8));
    let summary = progressive_study(&c, sizes, target, c.run.trials).map_err(prepare_failure)?;
    print!("{}", summary.table());
    if let Some(p) = c.run.output_path.as_deref().filter(|p| *p != "-") {
        std::fs::write(
            p,
            serde_json::to_string_pretty(&summary).map_err(Error::from)?,
        )
        .map_err(Error::from)?;
    }
    let v = summary.violations();
    if v.is_empty() {
        Ok(())
    } else {
        Err(Failure::Assertion(v.join("; ")))
    }
}

fn print_report(out: &mut impl Write, r: &BoundReport) -> io::Result<()> {
    writeln!(
        out,
        "n = {}  n_c = {}  bits = {}  eps = {:e}  kappa = {:e}  pi_dot = {:e}",
        r.n, r.n_c, r.significand_bits, r.inputs.eps, r.inputs.kappa, r.pi_dot
    )?;
    for (k, c) in r.c.iter().enumerate() {
        writeln!(out, "  C{k} = {c:e}")?;
    }
    for (k, g) in r.gamma.iter().enumerate() {
        writeln!(out, "  gamma{} = {g:e}", k + 1)?;
    }
    writeln!(
        out,
        "  delta_rho_tg = {:e}  rho_star = {:e}  rho_tg = {:e}",
        r.delta_rho, r.rho_star, r.rho_tg
    )
}

fn cmd_bounds(a: &BoundsArgs) -> Outcome {
    let reports = if let Some(eps) = a.eps {
        let inputs = BoundInputs::new(
            eps, a.kappa, a.kappa_c, a.eta_a, a.eta_p, a.eta_m, a.eta_n, a.m_a, a.m_p, a.alpha_m,
            a.alpha_n,
        )
        .map_err(Failure::Config)?;
        let bits = if eps > 0.0 {
            (-eps.log2()).round() as u32
        } else {
            0
        };
        vec![BoundReport::new(0, 0, bits, inputs, a.rho_star)]
    } else {
        let o = Overrides {
            config: a.config.clone(),
            out: None,
            seed: None,
            trials: None,
            bits: a.bits.clone(),
            pi_target: a.pi_target,
        };
        let c = load_config(&o)?;
        let exp = Experiment::prepare(&c).map_err(Failure::Config)?;
        exp.formats()?
            .into_iter()
            .map(|f| exp.report(f))
            .collect::<Result<Vec<_>, _>>()?
    };
    let mut out = io::stdout().lock();
    if a.json {
        writeln!(
            out,
            "{}",
            serde_json::to_string_pretty(&reports).map_err(Error::from)?
        )
        .map_err(Error::from)?;
    } else {
        for r in &reports {
            print_report(&mut out, r).map_err(Error::from)?;
        }
    }
    Ok(())
}

fn cmd_validate(path: &Path) -> Outcome {
    let v = validate_file(path).map_err(Failure::Config)?;
    for line in &v.inconsistent {
        eprintln!("inconsistent {line}");
    }
    eprintln!(
        "{} rows, {} failed, {} inconsistent",
        v.rows,
        v.failed.len(),
        v.inconsistent.len()
    );
    if v.ok() {
        Ok(())
    } else {
        Err(Failure::Assertion(format!("{} invalid", path.display())))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Run(o) => cmd_run(o),
        Command::Bounds(a) => cmd_bounds(a),
        Command::Sweep { overrides, sizes } => cmd_sweep(overrides, sizes),
        Command::Progressive { overrides, sizes } => cmd_progressive(overrides, sizes),
        Command::Validate { csv } => cmd_validate(csv),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(e)) => {
            eprintln!("error: bad configuration: {e}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_ASSERTION)
        }
        Err(Failure::Assertion(msg)) => {
            eprintln!("assertion failed: {msg}");
            ExitCode::from(EXIT_ASSERTION)
        }
    }
}
