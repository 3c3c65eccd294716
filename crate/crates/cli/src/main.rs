use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use reliable_cmab::config::ExperimentConfig;
use reliable_cmab::ingest::{average_peak_target, daily_peak_targets, synth_load, LoadProfile, SynthLoad};
use reliable_cmab::output::{write_bundle, write_sweep};
use reliable_cmab::policies::PolicyKind;
use reliable_cmab::runner::{comparison_configs, run_comparison, run_policy, sweep, SweepAxis};
use reliable_cmab::{brute_force_optimal, offline_select, Error, ProbabilityProfile, Purpose, RngStream};

const CONFIG_HELP: &str = "\
CONFIG FILE (key = value, `#` starts a comment, unset keys keep defaults):
  n                 number of arms (default 10)
  horizon           steps T; one step is one day / DR event (default 100)
  replicates        independent replicates (default 1)
  policy            greedy | cucb | cucb-avg | ts | cmv-ucb-avg | fatigue-cucb-avg
  alpha             exploration weight of the confidence radius (default 2.5)
  rho               risk weight of cmv-ucb-avg (default 0)
  master_seed       u64; overridden by BANDIT_DR_SEED, which --seed overrides
  profile           `uniform` (p_i ~ Unif[0,1] per replicate) or a comma list
  target            static | average-peak | daily-peak
  target.value      static target D in MW (default 1)
  target.fraction   share of the peak ramp, in (0, 1] (default 0.05)
  load.path         hourly load CSV in MW (`date,h0,...,h23`); synthetic if unset
  load.seed/days    synthetic load seed and number of days
  load.base         synthetic base load in MW (default 1000)
  load.amplitude    synthetic evening peak amplitude in MW (default 500)
  fatigue           on | off
  fatigue.low/high  range of the true per-arm fatigue ratios (default 0.75/0.95)
  fatigue.estimate  `exact` or a constant ratio assumed by the policy

Each arm contributes 1 MW when it responds, so loads and targets share units.

EXIT CODES: 0 success, 1 invalid input or failed check, 2 I/O error.";

#[derive(Parser)]
#[command(name = "rcmab", version, about = "Reliability-aware bandit simulator for demand response")]
#[command(after_long_help = CONFIG_HELP)]
struct Cli {
    /// Worker threads for replicate fan-out (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Experiment {
    /// Key-value config file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory for steps.csv, summary.json and manifest.json.
    #[arg(long)]
    out: PathBuf,
    /// Master seed; takes precedence over BANDIT_DR_SEED and the file.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the configured policy.
    Run(Experiment),
    /// Paired comparison of several policies on the same populations.
    Compare {
        #[command(flatten)]
        experiment: Experiment,
        /// Comma-separated policy names.
        #[arg(long, default_value = "cucb-avg,cucb,ts")]
        policies: String,
    },
    /// One comparison per value of `alpha` or `n`.
    Sweep {
        #[command(flatten)]
        experiment: Experiment,
        #[arg(long, default_value = "cucb-avg")]
        policies: String,
        /// Swept parameter: alpha or n.
        #[arg(long)]
        axis: String,
        /// Comma-separated values.
        #[arg(long)]
        values: String,
    },
    /// Offline oracle on a known profile.
    Oracle {
        /// File of probabilities separated by commas or whitespace.
        #[arg(long, conflicts_with = "probs", required_unless_present = "probs")]
        p: Option<PathBuf>,
        /// Inline comma-separated probabilities.
        #[arg(long)]
        probs: Option<String>,
        /// Target reduction D (MW).
        #[arg(long)]
        target: f64,
        /// Cross-check against brute-force enumeration (n <= 20).
        #[arg(long)]
        verify: bool,
        /// Seed for tie breaks.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Derive a target schedule from hourly load data.
    Ingest {
        /// Hourly load CSV (MW); synthetic load is generated when absent.
        #[arg(long)]
        load: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Scheme::AveragePeak)]
        scheme: Scheme,
        /// Share of the peak ramp, in (0, 1].
        #[arg(long, default_value_t = 0.05)]
        fraction: f64,
        /// Horizon for the static scheme.
        #[arg(long, default_value_t = 122)]
        horizon: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 122)]
        days: usize,
        /// Synthetic base load (MW).
        #[arg(long, default_value_t = 1000.0)]
        base: f64,
        /// Synthetic evening peak amplitude (MW).
        #[arg(long, default_value_t = 500.0)]
        amplitude: f64,
        /// Directory for targets.json, load.csv and load.json; stdout otherwise.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Scheme {
    AveragePeak,
    DailyPeak,
}

fn load_config(experiment: &Experiment) -> Result<ExperimentConfig> {
    let text = fs::read_to_string(&experiment.config)
        .with_context(|| format!("reading {}", experiment.config.display()))?;
    let mut config = ExperimentConfig::parse(&text)
        .with_context(|| format!("invalid config {}", experiment.config.display()))?;
    config.apply_seed_env()?;
    if let Some(seed) = experiment.seed {
        config.master_seed = seed;
    }
    Ok(config)
}

fn parse_policies(list: &str) -> Result<Vec<PolicyKind>> {
    let policies = list
        .split(',')
        .map(|name| name.trim().parse::<PolicyKind>())
        .collect::<reliable_cmab::Result<Vec<_>>>()?;
    if policies.is_empty() {
        bail!("no policies given");
    }
    Ok(policies)
}

fn parse_floats(text: &str) -> Result<Vec<f64>> {
    text.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<f64>().with_context(|| format!("`{s}` is not a number")))
        .collect()
}

fn write_json(path: &Path, value: &serde_json::Value) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(value)? + "\n")
        .with_context(|| format!("writing {}", path.display()))
}

fn oracle(p: ProbabilityProfile, target: f64, verify: bool, seed: u64) -> Result<bool> {
    let mut rng = RngStream::new(seed, 0, Purpose::Ties).rng();
    let result = offline_select(&p, target, &mut rng)?;
    let mut line = format!("{}, k={}, EL={:.6}", result.subset, result.k, result.expected_loss);
    let mut ok = true;
    if verify {
        match brute_force_optimal(&p, target) {
            Ok((_, best)) if (best - result.expected_loss).abs() <= 1e-12 => line.push_str(", verify=OK"),
            Ok((subset, best)) => {
                ok = false;
                line.push_str(&format!(", verify=MISMATCH (brute force {subset}, EL={best:.6})"));
            }
            Err(Error::TooManyArms { limit, .. }) => {
                line.push_str(&format!(", verify=SKIPPED (n > {limit})"))
            }
            Err(e) => return Err(e.into()),
        }
    }
    println!("{line}");
    Ok(ok)
}

fn ingest(
    load: Option<PathBuf>,
    scheme: Scheme,
    fraction: f64,
    horizon: usize,
    synth: SynthLoad,
    out: Option<PathBuf>,
) -> Result<()> {
    let profile = match &load {
        Some(path) => LoadProfile::load(path).with_context(|| format!("reading {}", path.display()))?,
        None => synth_load(synth),
    };
    let (name, schedule) = match scheme {
        Scheme::AveragePeak => ("average-peak", average_peak_target(&profile, fraction, horizon)?),
        Scheme::DailyPeak => ("daily-peak", daily_peak_targets(&profile, fraction)?),
    };
    let targets: Vec<String> = schedule.targets().iter().map(|d| format!("{d:.6}")).collect();
    let report = json!({
        "scheme": name,
        "fraction": fraction,
        "days": profile.len(),
        "targets": schedule.targets().iter().map(|d| (d * 1e6).round() / 1e6).collect::<Vec<_>>(),
    });
    match out {
        Some(dir) => {
            fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
            write_json(&dir.join("targets.json"), &report)?;
            write_json(&dir.join("load.json"), &serde_json::to_value(&profile)?)?;
            profile.save(&dir.join("load.csv"))?;
            println!("{name}: {} targets, first D={}", targets.len(), targets[0]);
        }
        None => writeln!(std::io::stdout().lock(), "{}", targets.join("\n"))?,
    }
    Ok(())
}

fn execute(command: Command) -> Result<bool> {
    match command {
        Command::Run(experiment) => {
            let config = load_config(&experiment)?;
            let run = run_policy(&config, true)?;
            write_bundle(&experiment.out, &config, &[run], "run")?;
        }
        Command::Compare { experiment, policies } => {
            let config = load_config(&experiment)?;
            let configs = comparison_configs(&config, &parse_policies(&policies)?);
            let runs = run_comparison(&configs, true)?;
            write_bundle(&experiment.out, &config, &runs, "compare")?;
        }
        Command::Sweep {
            experiment,
            policies,
            axis,
            values,
        } => {
            let config = load_config(&experiment)?;
            let axis: SweepAxis = axis.parse()?;
            let cells = sweep(&config, axis, &parse_floats(&values)?, &parse_policies(&policies)?, false)?;
            write_sweep(&experiment.out, &config, &cells)?;
        }
        Command::Oracle {
            p,
            probs,
            target,
            verify,
            seed,
        } => {
            let values = match (p, probs) {
                (Some(path), _) => {
                    let text = fs::read_to_string(&path)
                        .with_context(|| format!("reading {}", path.display()))?;
                    parse_floats(&text)?
                }
                (None, Some(inline)) => parse_floats(&inline)?,
                (None, None) => bail!("either --p or --probs is required"),
            };
            return oracle(ProbabilityProfile::new(values)?, target, verify, seed);
        }
        Command::Ingest {
            load,
            scheme,
            fraction,
            horizon,
            seed,
            days,
            base,
            amplitude,
            out,
        } => {
            let synth = SynthLoad {
                seed,
                days,
                base,
                peak_amplitude: amplitude,
            };
            ingest(load, scheme, fraction, horizon, synth, out)?;
        }
    }
    Ok(true)
}

fn is_io(err: &anyhow::Error) -> bool {
    err.chain().any(|cause| {
        cause.is::<std::io::Error>()
            || matches!(cause.downcast_ref::<Error>(), Some(Error::Io(_)))
            || matches!(cause.downcast_ref::<Error>(), Some(Error::Csv(e)) if e.is_io_error())
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.threads {
        Some(threads) => rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .context("building thread pool")
            .and_then(|pool| pool.install(|| execute(cli.command))),
        None => execute(cli.command),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(if is_io(&err) { 2 } else { 1 })
        }
    }
}
