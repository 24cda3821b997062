//! `inflate`: run norm-inflation sweeps, check the sufficient conditions, and
//! dump the resonance decomposition.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use inflate_core::experiment::{
    self, check_conditions, csv_rows, find_inflation_scale, provenance, run_sweep, schedule_params,
    CaseSelector, GaussianPreset, Relation, RunOptions, CSV_HEADER,
};
use inflate_core::field::{Lattice, PhasePair};
use inflate_core::propagator::DispersionKind;
use inflate_core::resonance::{xi1_grid, xi1_resonant_split, WindowPolicy};
use serde_json::json;

#[derive(Parser)]
#[command(
    name = "inflate",
    version,
    about = "Norm-inflation experiments for u_tt - Δu = u^k on the torus"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment over a sweep of frequency scales.
    Run(RunArgs),
    /// Print the six condition margins.
    CheckConditions(ConditionArgs),
    /// Emit the resonant/nonresonant decomposition as JSON.
    Resonance(ResonanceArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Dispersion {
    Wave,
    KleinGordon,
}

impl From<Dispersion> for DispersionKind {
    fn from(d: Dispersion) -> Self {
        match d {
            Dispersion::Wave => DispersionKind::Wave,
            Dispersion::KleinGordon => DispersionKind::KleinGordon,
        }
    }
}

#[derive(Args, Clone)]
struct ModelArgs {
    #[arg(long, default_value_t = 1)]
    d: usize,
    #[arg(long, default_value_t = 2)]
    k: usize,
    #[arg(long, allow_hyphen_values = true, default_value_t = -0.5)]
    s: f64,
    #[arg(long, default_value_t = 1)]
    n: u64,
    #[arg(long, default_value_t = 0.1)]
    delta: f64,
    /// auto, 1 or 2
    #[arg(long, default_value = "auto")]
    case: CaseSelector,
    #[arg(long, value_enum, default_value_t = Dispersion::Wave)]
    dispersion: Dispersion,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Comma-separated frequency scales.
    #[arg(long = "N-sweep", value_delimiter = ',', required = true)]
    n_sweep: Vec<i64>,
    /// Lattice cutoff per axis for the data; defaults to k(2N + A).
    #[arg(long)]
    modes: Option<i64>,
    /// Highest Picard order evaluated.
    #[arg(long, default_value_t = 2)]
    order: usize,
    /// Drop the smooth background data.
    #[arg(long)]
    no_background: bool,
    #[arg(long, default_value_t = experiment::DEFAULT_MARGIN)]
    margin: f64,
    #[arg(long, default_value = "report.json")]
    out: PathBuf,
    /// CSV companion; defaults to the report path with a `.csv` extension.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct ConditionArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Frequency scale; without it, N is doubled from 64 until the
    /// conditions pass or `--max-N` is reached.
    #[arg(long = "N")]
    big_n: Option<i64>,
    #[arg(long = "max-N", default_value_t = 1 << 14)]
    max_n: i64,
    #[arg(long, default_value_t = experiment::DEFAULT_MARGIN)]
    margin: f64,
    /// Use the smooth background preset as u0 (default u0 = 0).
    #[arg(long)]
    background: bool,
}

#[derive(Args)]
struct ResonanceArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long = "N")]
    big_n: i64,
    /// Override the scheduled horizon.
    #[arg(long = "T")]
    horizon: Option<f64>,
    /// Fail when T is outside the resonance window.
    #[arg(long)]
    enforce_window: bool,
    #[arg(long, default_value_t = 8)]
    nodes: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

type CliResult<T> = Result<T, Box<dyn std::error::Error>>;

fn background(model: &ModelArgs, on: bool) -> CliResult<PhasePair> {
    let preset = GaussianPreset::default();
    let lat = Lattice::new(model.d, preset.radius)?;
    Ok(if on {
        preset.build(lat)?
    } else {
        PhasePair::zero(lat)
    })
}

fn write_json(path: Option<&Path>, value: &serde_json::Value) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value)?;
    match path {
        Some(p) => fs::write(p, text + "\n")?,
        None => {
            let mut out = std::io::stdout().lock();
            if let Err(e) = writeln!(out, "{text}") {
                if e.kind() != std::io::ErrorKind::BrokenPipe {
                    return Err(e.into());
                }
            }
        }
    }
    Ok(())
}

fn run(args: RunArgs) -> CliResult<()> {
    let m = &args.model;
    let options = RunOptions {
        order: args.order,
        dispersion: m.dispersion.into(),
        margin: args.margin,
        cutoff: args.modes,
        background: (!args.no_background).then(GaussianPreset::default),
        window_policy: WindowPolicy::Report,
        ..Default::default()
    };
    let inputs = json!({
        "d": m.d, "k": m.k, "s": m.s, "n": m.n, "delta": m.delta,
        "case": m.case, "N_sweep": args.n_sweep, "options": options,
    });
    let sweep = run_sweep(m.d, m.k, m.s, m.n, m.delta, m.case, &args.n_sweep, &options)?;
    let report = json!({
        "provenance": provenance(&inputs),
        "inputs": inputs,
        "report": sweep,
    });
    write_json(Some(&args.out), &report)?;
    let csv_path = args
        .csv
        .clone()
        .unwrap_or_else(|| args.out.with_extension("csv"));
    let mut csv = String::from(CSV_HEADER);
    csv.push('\n');
    for row in csv_rows(&sweep) {
        csv.push_str(&row);
        csv.push('\n');
    }
    fs::write(&csv_path, csv)?;
    eprintln!(
        "wrote {} and {} ({} points, growth exponent {}, predicted {:.4})",
        args.out.display(),
        csv_path.display(),
        sweep.reports.len(),
        sweep
            .growth_exponent
            .map(|g| format!("{g:.4}"))
            .unwrap_or_else(|| "n/a".into()),
        sweep.predicted_exponent
    );
    Ok(())
}

fn check(args: ConditionArgs) -> CliResult<bool> {
    let m = &args.model;
    let u0 = background(m, args.background)?;
    let (p, report) = match args.big_n {
        Some(big_n) => {
            let p = schedule_params(m.d, m.k, m.s, m.n, m.delta, big_n, m.case)?;
            let report = check_conditions(&p, &u0, args.margin);
            (p, report)
        }
        None => find_inflation_scale(
            m.d,
            m.k,
            m.s,
            m.n,
            m.delta,
            m.case,
            &u0,
            args.margin,
            64,
            args.max_n,
        )?,
    };
    println!(
        "case {}  N = {}  A = {}  R = {:.6e}  T = {:.6e}  margin = {}",
        p.case, p.big_n, p.a, p.r, p.t, report.margin
    );
    println!(
        "{:<6} {:<34} {:>6} {:>14} {:>6}",
        "cond", "ratio", "needs", "value", "ok"
    );
    for c in &report.conditions {
        for (name, value) in &c.ratios {
            let needs = match c.relation {
                Relation::MuchLess => format!("<={}", 1.0 / report.margin),
                Relation::MuchGreater => format!(">={}", report.margin),
            };
            let ok = match c.relation {
                Relation::MuchLess => *value <= 1.0 / report.margin,
                Relation::MuchGreater => *value >= report.margin,
            };
            println!(
                "{:<6} {:<34} {:>6} {:>14.6e} {:>6}",
                c.label,
                name,
                needs,
                value,
                if ok { "yes" } else { "no" }
            );
        }
    }
    println!(
        "all conditions: {}",
        if report.pass { "PASS" } else { "FAIL" }
    );
    Ok(report.pass)
}

fn resonance(args: ResonanceArgs) -> CliResult<()> {
    let m = &args.model;
    let mut p = schedule_params(m.d, m.k, m.s, m.n, m.delta, args.big_n, m.case)?;
    if let Some(t) = args.horizon {
        p.t = t;
    }
    let disp: DispersionKind = m.dispersion.into();
    let lat = Lattice::new(m.d, p.required_cutoff())?;
    let phi = experiment::build_inflation_data(&p, lat)?;
    let grid = xi1_grid(&phi, p.k, p.t, disp, args.nodes)?;
    let policy = if args.enforce_window {
        WindowPolicy::Enforce
    } else {
        WindowPolicy::Report
    };
    let report = xi1_resonant_split(&phi, &p, &grid, disp, policy)?;
    write_json(args.out.as_deref(), &serde_json::to_value(&report)?)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => run(a).map(|_| true),
        Command::CheckConditions(a) => check(a),
        Command::Resonance(a) => resonance(a).map(|_| true),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
