//! `hamcert` command-line runner: seeded experiment batteries with JSON/CSV
//! reports. Exit status is 0 only when every acceptance check in the battery
//! passes; errors exit with 2.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use hamcert::harness::{
    self, BatterySpec, BenchParams, CertifyDynamicsParams, CertifyGibbsParams, ExperimentConfig,
    LearnGibbsParams, VerifyInvariantsParams,
};
use hamcert::Result;

#[derive(Parser, Debug)]
#[command(name = "hamcert", version, about = "Certify and learn local Hamiltonians on a dense simulator")]
struct Cli {
    /// Master seed; trial i uses a stream derived from (seed, i).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Write the JSON report here.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Also write the flattened per-trial CSV here.
    #[arg(long, global = true)]
    csv: Option<PathBuf>,
    /// JSON file mirroring these flags; the command line takes precedence for
    /// seed/jobs/out/csv, and supplies the battery when given.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand, Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum Command {
    /// Tolerant certification of a hidden Hamiltonian from time evolution.
    CertifyDynamics(CertifyDynamicsArgs),
    /// Covering-net learning of a Gibbs state from measurement samples.
    LearnGibbs(LearnGibbsArgs),
    /// CLOSE/FAR certification between two Gibbs states.
    CertifyGibbs(CertifyGibbsArgs),
    /// Sweep every supporting inequality on random instances.
    VerifyInvariants(VerifyInvariantsArgs),
    /// Evolution-time scaling battery across an eps grid.
    Bench(BenchArgs),
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
struct CertifyDynamicsArgs {
    /// Reference Hamiltonian file (one `<pauli-word> <coefficient>` per line).
    #[arg(long)]
    h0: PathBuf,
    /// Hidden target file; the simulator hides it behind the evolution oracle.
    #[arg(long)]
    h: PathBuf,
    #[arg(long)]
    eps: f64,
    #[arg(long)]
    k: usize,
    #[arg(long)]
    n: usize,
    /// Amplify each trial to failure probability delta by majority vote.
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long, default_value_t = 20)]
    #[serde(default = "default_trials")]
    trials: u32,
    /// SPAM budget (uniform random shift of the outcome probability).
    #[arg(long, default_value_t = 0.0)]
    #[serde(default)]
    spam: f64,
    /// Operator-norm bound used to size Trotter steps.
    #[arg(long, default_value_t = 1.0)]
    #[serde(default = "default_c_op")]
    c_op: f64,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
struct LearnGibbsArgs {
    /// Hamiltonian file; its Gibbs state is the unknown.
    #[arg(long)]
    h: PathBuf,
    #[arg(long)]
    beta: f64,
    #[arg(long)]
    eps: f64,
    #[arg(long, default_value_t = 0.1)]
    #[serde(default = "default_delta")]
    delta: f64,
    #[arg(long)]
    k: usize,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    copies_override: Option<u64>,
    /// Coarsened net step (the analysis default usually exceeds the net cap).
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long, default_value_t = 20)]
    #[serde(default = "default_trials")]
    trials: u32,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
struct CertifyGibbsArgs {
    #[arg(long)]
    h: PathBuf,
    #[arg(long)]
    h0: PathBuf,
    #[arg(long)]
    beta: f64,
    #[arg(long)]
    eps: f64,
    #[arg(long, default_value_t = 0.1)]
    #[serde(default = "default_delta")]
    delta: f64,
    #[arg(long)]
    k: usize,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    copies_override: Option<u64>,
    #[arg(long, default_value_t = 20)]
    #[serde(default = "default_trials")]
    trials: u32,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
struct VerifyInvariantsArgs {
    #[arg(long, default_value_t = 3)]
    #[serde(default = "default_n")]
    n: usize,
    #[arg(long, default_value_t = 2)]
    #[serde(default = "default_k")]
    k: usize,
    #[arg(long, default_value_t = 200)]
    #[serde(default = "default_samples")]
    samples: usize,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
struct BenchArgs {
    #[arg(long, default_value_t = 2)]
    #[serde(default = "default_bench_n")]
    n: usize,
    #[arg(long, default_value_t = 1)]
    #[serde(default = "default_k_one")]
    k: usize,
    /// Eps grid for the scaling fit.
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.5, 0.25, 0.125, 0.0625])]
    #[serde(default = "default_eps_list")]
    eps_list: Vec<f64>,
    #[arg(long, default_value_t = 0.1)]
    #[serde(default = "default_delta")]
    delta: f64,
    #[arg(long, default_value_t = 5)]
    #[serde(default = "default_bench_trials")]
    trials: u32,
}

fn default_trials() -> u32 {
    20
}
fn default_bench_trials() -> u32 {
    5
}
fn default_delta() -> f64 {
    0.1
}
fn default_c_op() -> f64 {
    1.0
}
fn default_n() -> usize {
    3
}
fn default_bench_n() -> usize {
    2
}
fn default_k() -> usize {
    2
}
fn default_k_one() -> usize {
    1
}
fn default_samples() -> usize {
    200
}
fn default_eps_list() -> Vec<f64> {
    vec![0.5, 0.25, 0.125, 0.0625]
}

/// On-disk mirror of the command line.
#[derive(Debug, Default, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
struct FileConfig {
    seed: Option<u64>,
    jobs: Option<usize>,
    out: Option<PathBuf>,
    csv: Option<PathBuf>,
    certify_dynamics: Option<CertifyDynamicsArgs>,
    learn_gibbs: Option<LearnGibbsArgs>,
    certify_gibbs: Option<CertifyGibbsArgs>,
    verify_invariants: Option<VerifyInvariantsArgs>,
    bench: Option<BenchArgs>,
}

impl FileConfig {
    fn command(&self) -> Result<Option<Command>> {
        let mut found: Vec<Command> = Vec::new();
        if let Some(a) = &self.certify_dynamics {
            found.push(Command::CertifyDynamics(a.clone()));
        }
        if let Some(a) = &self.learn_gibbs {
            found.push(Command::LearnGibbs(a.clone()));
        }
        if let Some(a) = &self.certify_gibbs {
            found.push(Command::CertifyGibbs(a.clone()));
        }
        if let Some(a) = &self.verify_invariants {
            found.push(Command::VerifyInvariants(a.clone()));
        }
        if let Some(a) = &self.bench {
            found.push(Command::Bench(a.clone()));
        }
        if found.len() > 1 {
            return Err(hamcert::Error::InvalidParameter(
                "config file defines more than one battery".into(),
            ));
        }
        Ok(found.into_iter().next())
    }
}

fn read_hamiltonian(path: &Path) -> Result<String> {
    Ok(std::fs::read_to_string(path)?)
}

fn build_config(cli: &Cli) -> Result<(ExperimentConfig, Option<PathBuf>, Option<PathBuf>)> {
    let file: FileConfig = match &cli.config {
        Some(path) => serde_json::from_str(&std::fs::read_to_string(path)?)?,
        None => FileConfig::default(),
    };
    let command = match &cli.command {
        Some(c) => c.clone(),
        None => file.command()?.ok_or_else(|| {
            hamcert::Error::InvalidParameter(
                "no battery requested: pass a subcommand or a --config file that defines one".into(),
            )
        })?,
    };
    let seed = cli.seed.or(file.seed).unwrap_or(0);
    let jobs = cli.jobs.or(file.jobs).unwrap_or(0);
    let out = cli.out.clone().or(file.out);
    let csv = cli.csv.clone().or(file.csv);

    let (trials, battery) = match command {
        Command::CertifyDynamics(a) => (
            a.trials,
            BatterySpec::CertifyDynamics(CertifyDynamicsParams {
                h0: read_hamiltonian(&a.h0)?,
                h: read_hamiltonian(&a.h)?,
                eps: a.eps,
                k: a.k,
                n: a.n,
                delta: a.delta,
                spam: a.spam,
                c_op: a.c_op,
            }),
        ),
        Command::LearnGibbs(a) => (
            a.trials,
            BatterySpec::LearnGibbs(LearnGibbsParams {
                h: read_hamiltonian(&a.h)?,
                beta: a.beta,
                eps: a.eps,
                delta: a.delta,
                k: a.k,
                n: a.n,
                copies_override: a.copies_override,
                eta: a.eta,
            }),
        ),
        Command::CertifyGibbs(a) => (
            a.trials,
            BatterySpec::CertifyGibbs(CertifyGibbsParams {
                h: read_hamiltonian(&a.h)?,
                h0: read_hamiltonian(&a.h0)?,
                beta: a.beta,
                eps: a.eps,
                delta: a.delta,
                k: a.k,
                n: a.n,
                copies_override: a.copies_override,
            }),
        ),
        Command::VerifyInvariants(a) => (
            1,
            BatterySpec::VerifyInvariants(VerifyInvariantsParams { n: a.n, k: a.k, samples: a.samples }),
        ),
        Command::Bench(a) => (
            a.trials,
            BatterySpec::Bench(BenchParams { n: a.n, k: a.k, eps_list: a.eps_list, delta: a.delta }),
        ),
    };
    Ok((ExperimentConfig { seed, jobs, trials, battery }, out, csv))
}

fn execute(cli: &Cli) -> Result<bool> {
    let (config, out, csv) = build_config(cli)?;
    let report = harness::run(&config)?;
    if let Some(path) = &out {
        std::fs::write(path, serde_json::to_string_pretty(&report)?)?;
    }
    if let Some(path) = &csv {
        harness::emit_csv_to_path(&report, path)?;
    }
    let agg = &report.aggregates;
    println!(
        "{} | trials {} | evolution time {:.4} | queries {} | experiments {} | copies {}",
        report.artifact,
        agg.trials,
        agg.total_evolution_time,
        agg.total_queries,
        agg.total_experiments,
        agg.total_copies
    );
    if let Some(rate) = agg.success_rate {
        println!(
            "success rate {:.3} (Wilson 95% [{:.3}, {:.3}]) over {} scored trials",
            rate,
            agg.wilson_low.unwrap(),
            agg.wilson_high.unwrap(),
            agg.scored_trials
        );
    }
    for check in &report.checks {
        println!("{}: {} ({})", check.name, if check.passed { "PASS" } else { "FAIL" }, check.detail);
    }
    if let Some(path) = &out {
        println!("report written to {}", path.display());
    }
    Ok(report.passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
