//! `flowspace-cli`: runs the verification suites and writes JSON reports.
//!
//! Exit status is 0 when every check passes, 1 when some check fails and 2
//! on usage or configuration errors.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use flowspace::group_actions::GroupAction;
use flowspace::model_spaces::Space;
use flowspace::periodic::{build_cover, Cover};
use flowspace::report::EstimateReport;
use flowspace::suites;
use flowspace::Error;
use serde::Deserialize;

#[derive(Parser)]
#[command(name = "flowspace-cli", version, about = "Sampled verification of flow-space estimates and covers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Metric axioms, closed forms, ball projections, CAT(0) comparison.
    VerifyMetric(Flags),
    /// Continuity of the flow, pointwise bounds, convergence monitors.
    VerifyFlow(Flags),
    /// Window bound and the flow estimates at a given delta.
    VerifyFlowEstimates(Flags),
    /// Chains of length 1 to 3; with --cover, also the S-long check of the
    /// pulled-back cover.
    VerifyChains {
        #[command(flatten)]
        flags: Flags,
        #[arg(long)]
        cover: Option<PathBuf>,
    },
    /// Translation lengths, axes, flow-line bundles and extension laws.
    VerifyAxes(Flags),
    /// Builds the periodic cover and writes it as JSON.
    BuildCover(Flags),
    /// Checks a cover written by build-cover.
    CheckCover {
        cover: PathBuf,
        #[command(flatten)]
        flags: Flags,
    },
    /// Writes `parameter,deviation` rows: flow-estimate, shift or integrand.
    Sweep {
        kind: String,
        #[command(flatten)]
        flags: Flags,
    },
}

#[derive(Args, Clone, Default)]
struct Flags {
    #[arg(long)]
    space: Option<String>,
    #[arg(long)]
    action: Option<String>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON file with any of the keys above; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
}

/// Settings from a config file; same keys as the flags.
#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    space: Option<String>,
    action: Option<String>,
    delta: Option<f64>,
    gamma: Option<f64>,
    beta: Option<f64>,
    l: Option<f64>,
    samples: Option<usize>,
    seed: Option<u64>,
    tol: Option<f64>,
    out: Option<PathBuf>,
}

/// Resolved settings for one run.
struct RunConfig {
    space: Space,
    action: GroupAction,
    delta: f64,
    gamma: f64,
    beta: f64,
    l: f64,
    samples: usize,
    seed: u64,
    tol: Option<f64>,
    out: Option<PathBuf>,
}

impl RunConfig {
    fn resolve(flags: &Flags) -> Result<Self, Error> {
        let file = match &flags.config {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| Error::Config(format!("{}: {e}", p.display())))?;
                serde_json::from_str::<FileConfig>(&text).map_err(|e| Error::Config(format!("{}: {e}", p.display())))?
            }
            None => FileConfig::default(),
        };
        let space = flags.space.clone().or(file.space).unwrap_or_else(|| "euclidean2".into());
        let action = flags.action.clone().or(file.action).unwrap_or_else(|| "z2".into());
        let cfg = RunConfig {
            space: Space::parse(&space)?,
            action: GroupAction::preset(&action)?,
            delta: flags.delta.or(file.delta).unwrap_or(0.1),
            gamma: flags.gamma.or(file.gamma).unwrap_or(1.0),
            beta: flags.beta.or(file.beta).unwrap_or(1.0),
            l: file.l.unwrap_or(1.0),
            samples: flags.samples.or(file.samples).unwrap_or(200),
            seed: flags.seed.or(file.seed).unwrap_or(7),
            tol: flags.tol.or(file.tol),
            out: flags.out.clone().or(file.out),
        };
        for (name, v) in [("delta", cfg.delta), ("gamma", cfg.gamma), ("beta", cfg.beta), ("l", cfg.l)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Usage(format!("{name} must be positive, got {v}")));
            }
        }
        if matches!(cfg.tol, Some(t) if !(t > 0.0)) {
            return Err(Error::Usage("tol must be positive".into()));
        }
        Ok(cfg)
    }

    fn tol(&self) -> f64 {
        self.tol.unwrap_or(1e-7)
    }
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), Error> {
    match out {
        Some(p) => std::fs::write(p, format!("{text}\n")).map_err(|e| Error::Config(format!("{}: {e}", p.display()))),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn load_cover(path: &Path) -> Result<Cover, Error> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    Cover::from_json(&text)
}

fn finish(report: EstimateReport, out: &Option<PathBuf>) -> Result<bool, Error> {
    emit(out, &report.to_json())?;
    for f in report.failures() {
        eprintln!("FAIL {}: deviation {} {}", f.name, f.max_deviation, f.witness.clone().unwrap_or_default());
    }
    Ok(report.passed())
}

fn run(cli: Cli) -> Result<bool, Error> {
    match cli.command {
        Command::VerifyMetric(f) => {
            let c = RunConfig::resolve(&f)?;
            finish(suites::metric_suite(c.space, c.samples, c.seed, c.tol())?, &c.out)
        }
        Command::VerifyFlow(f) => {
            let c = RunConfig::resolve(&f)?;
            finish(suites::flow_suite(c.space, c.samples, c.seed, c.tol())?, &c.out)
        }
        Command::VerifyFlowEstimates(f) => {
            let c = RunConfig::resolve(&f)?;
            finish(suites::flow_estimates_suite(&c.action, c.delta, c.beta, c.l, c.samples, c.seed, c.tol)?, &c.out)
        }
        Command::VerifyChains { flags, cover } => {
            let c = RunConfig::resolve(&flags)?;
            let mut report = suites::chains_suite(&c.action, 3, c.samples, c.seed, c.delta)?;
            if let Some(p) = cover {
                let s = suites::s_long_suite(&load_cover(&p)?, c.samples, c.seed + 1, c.delta, 4)?;
                report.param("s_long", &s.parameters);
                report.extend(s);
                report.sort();
            }
            finish(report, &c.out)
        }
        Command::VerifyAxes(f) => {
            let c = RunConfig::resolve(&f)?;
            let mut report = suites::axes_suite(c.samples, c.seed, c.gamma)?;
            report.extend(suites::extension_suite(20, c.samples, c.seed + 1));
            report.sort();
            finish(report, &c.out)
        }
        Command::BuildCover(f) => {
            let c = RunConfig::resolve(&f)?;
            let cover = build_cover(c.gamma, &c.action, None)?;
            emit(&c.out, &cover.to_json())?;
            Ok(true)
        }
        Command::CheckCover { cover, flags } => {
            let c = RunConfig::resolve(&flags)?;
            finish(suites::cover_suite(&load_cover(&cover)?, c.samples, c.seed)?, &c.out)
        }
        Command::Sweep { kind, flags } => {
            let c = RunConfig::resolve(&flags)?;
            let rows = suites::sweep(&kind, c.space, c.samples, c.seed)?;
            let mut csv = String::from("parameter,deviation");
            for (p, d) in rows {
                csv.push_str(&format!("\n{p},{d}"));
            }
            emit(&c.out, &csv)?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
