//! Command-line front end: efficiency sweeps, the composition check, the
//! extraction demo, and the invariant validation suite.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use postfid::fidelity::FidelityReport;
use postfid::gates::{cs_composition_check, cs_fidelity_sweep, ns_fidelity_sweep, CsGateSpec, NsGateSpec};
use postfid::validate;
use postfid::Error;

#[derive(Parser)]
#[command(
    name = "postfid",
    about = "Fidelity analysis of postselecting linear-optical circuits with lossy photon counters",
    long_about = "Models postselected optical gates on a truncated Fock space and reports the \
                  retrodictive, correct-output, and overlap fidelities as functions of detector \
                  quantum efficiency.  The global positivity tolerance (default 1e-10) can be \
                  overridden through the POSTFID_TOL environment variable.",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep detector efficiency and emit one fidelity report per point
    Sweep(SweepArgs),
    /// Measure F_r(CS) against F_r(NS)^2 at chosen efficiencies
    CsCheck(CsCheckArgs),
    /// Print the two reference extraction values
    PmaxDemo,
    /// Run the invariant suite; exit 0 only if every check passes
    Validate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
enum GateKind {
    Ns,
    Cs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
enum OutputFormat {
    Csv,
    Json,
}

#[derive(Args)]
struct SweepArgs {
    /// JSON config file; explicit flags win on conflict
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    gate: Option<GateKind>,
    /// Signal amplitudes for the NS gate, normalized internally
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    eta_start: Option<f64>,
    #[arg(long)]
    eta_end: Option<f64>,
    #[arg(long)]
    eta_steps: Option<usize>,
    /// Output path; stdout when omitted
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
}

#[derive(Args)]
struct CsCheckArgs {
    /// Efficiencies to measure at (repeatable)
    #[arg(long = "eta", num_args = 1..)]
    etas: Vec<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
}

/// Sweep parameters after merging defaults, config file, and flags.
#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct SweepConfig {
    gate: GateKind,
    alpha: f64,
    beta: f64,
    gamma: f64,
    eta_start: f64,
    eta_end: f64,
    eta_steps: usize,
    out: Option<PathBuf>,
    format: OutputFormat,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            gate: GateKind::Ns,
            alpha: 1.0,
            beta: 1.0,
            gamma: 1.0,
            eta_start: 0.05,
            eta_end: 1.0,
            eta_steps: 20,
            out: None,
            format: OutputFormat::Csv,
        }
    }
}

impl SweepConfig {
    fn resolve(args: &SweepArgs) -> Result<Self, Error> {
        let mut cfg = match &args.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)?;
                serde_json::from_str(&text)
                    .map_err(|e| Error::InvalidParameter(format!("bad config file: {e}")))?
            }
            None => SweepConfig::default(),
        };
        if let Some(g) = args.gate {
            cfg.gate = g;
        }
        if let Some(a) = args.alpha {
            cfg.alpha = a;
        }
        if let Some(b) = args.beta {
            cfg.beta = b;
        }
        if let Some(g) = args.gamma {
            cfg.gamma = g;
        }
        if let Some(v) = args.eta_start {
            cfg.eta_start = v;
        }
        if let Some(v) = args.eta_end {
            cfg.eta_end = v;
        }
        if let Some(v) = args.eta_steps {
            cfg.eta_steps = v;
        }
        if let Some(p) = &args.out {
            cfg.out = Some(p.clone());
        }
        if let Some(f) = args.format {
            cfg.format = f;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), Error> {
        if !(0.0..=1.0).contains(&self.eta_start)
            || !(0.0..=1.0).contains(&self.eta_end)
            || self.eta_start > self.eta_end
        {
            return Err(Error::InvalidParameter(format!(
                "eta range [{}, {}] must satisfy 0 <= start <= end <= 1",
                self.eta_start, self.eta_end
            )));
        }
        if self.eta_steps < 1 {
            return Err(Error::InvalidParameter("eta_steps must be >= 1".into()));
        }
        Ok(())
    }

    fn grid(&self) -> Vec<f64> {
        if self.eta_steps == 1 {
            return vec![self.eta_start];
        }
        let span = self.eta_end - self.eta_start;
        (0..self.eta_steps)
            .map(|k| self.eta_start + span * k as f64 / (self.eta_steps - 1) as f64)
            .collect()
    }
}

fn fmt12(x: f64) -> String {
    format!("{x:.12}")
}

fn reports_to_csv(reports: &[FidelityReport]) -> String {
    let mut out = String::from("eta,p_click,F_r,F_c,F_o\n");
    for r in reports {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            fmt12(r.eta),
            fmt12(r.click_probability),
            fmt12(r.f_r),
            fmt12(r.f_c),
            fmt12(r.f_o)
        ));
    }
    out
}

fn write_output(path: &Option<PathBuf>, payload: &str) -> Result<(), Error> {
    match path {
        Some(p) => {
            let mut f = std::fs::File::create(p)?;
            f.write_all(payload.as_bytes())?;
            Ok(())
        }
        None => {
            print!("{payload}");
            Ok(())
        }
    }
}

fn run_sweep(args: &SweepArgs) -> Result<(), Error> {
    let cfg = SweepConfig::resolve(args)?;
    let grid = cfg.grid();
    let reports = match cfg.gate {
        GateKind::Ns => {
            let spec = NsGateSpec::from_reals(cfg.alpha, cfg.beta, cfg.gamma)?;
            ns_fidelity_sweep(&spec, &grid)?
        }
        GateKind::Cs => cs_fidelity_sweep(&CsGateSpec::basis(1, 1)?, &grid)?,
    };
    let payload = match cfg.format {
        OutputFormat::Csv => reports_to_csv(&reports),
        OutputFormat::Json => {
            let mut s = serde_json::to_string_pretty(&reports)
                .map_err(|e| Error::Other(e.to_string()))?;
            s.push('\n');
            s
        }
    };
    write_output(&cfg.out, &payload)
}

fn run_cs_check(args: &CsCheckArgs) -> Result<(), Error> {
    let etas = if args.etas.is_empty() {
        vec![0.3, 0.6, 0.9]
    } else {
        args.etas.clone()
    };
    for &eta in &etas {
        if !(0.0..=1.0).contains(&eta) {
            return Err(Error::InvalidParameter(format!(
                "efficiency {eta} outside [0, 1]"
            )));
        }
    }
    let checks: Vec<_> = etas
        .iter()
        .map(|&eta| cs_composition_check(eta))
        .collect::<Result<_, _>>()?;
    let format = args.format.unwrap_or(OutputFormat::Csv);
    let payload = match format {
        OutputFormat::Csv => {
            let mut out = String::from("eta,F_r_cs,F_r_ns_squared,discrepancy\n");
            for c in &checks {
                out.push_str(&format!(
                    "{},{},{},{}\n",
                    fmt12(c.eta),
                    fmt12(c.f_r_cs),
                    fmt12(c.f_r_ns_squared),
                    fmt12(c.discrepancy)
                ));
            }
            out
        }
        OutputFormat::Json => {
            let mut s =
                serde_json::to_string_pretty(&checks).map_err(|e| Error::Other(e.to_string()))?;
            s.push('\n');
            s
        }
    };
    write_output(&args.out, &payload)
}

fn run_pmax_demo() -> Result<(), Error> {
    let (a, b) = validate::pmax_demo_values()?;
    println!("pmax(|+><+|, |1>)  = {}", fmt12(a));
    println!("pmax(|1><1|, |+>)  = {}", fmt12(b));
    println!("(strict positive-semidefinite remainder; see README on extraction conventions)");
    Ok(())
}

fn run_validate() -> Result<bool, Error> {
    let results = validate::run_all();
    let mut all_passed = true;
    for r in &results {
        let tag = if r.passed { "PASS" } else { "FAIL" };
        println!("{tag} {} - {}", r.name, r.detail);
        all_passed &= r.passed;
    }
    Ok(all_passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Sweep(args) => run_sweep(args).map(|_| true),
        Command::CsCheck(args) => run_cs_check(args).map(|_| true),
        Command::PmaxDemo => run_pmax_demo().map(|_| true),
        Command::Validate => run_validate(),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
