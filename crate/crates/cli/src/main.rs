//! `ysq`: classify scenarios, run Monte Carlo scatters and λ sweeps, and
//! simulate the finite-run identification test.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::Serialize;
use ysq_core::experiments::{
    run_hyptest_with_model, run_scatter, write_csv, write_outcomes_csv, ClickModel, HypTestSetup,
    Measurement, YsRecord,
};
use ysq_core::sampling::{sample_scenario, substream, StreamDomain};
use ysq_core::{
    evaluate, lambda_family, EffectKind, EffectMeasure, LurkingVars, PremiseMode, SampleConfig,
    Scenario, StateMeasure, YsError,
};

#[derive(Parser)]
#[command(
    name = "ysq",
    version,
    about = "Quantum Yule-Simpson reversals: classification, sampling, hypothesis tests"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify one scenario under given lurking variables.
    Classify(ClassifyArgs),
    /// Monte Carlo scatter over random scenarios; summary JSON on stdout.
    Sample(SampleArgs),
    /// Scatter run carrying λ-interpolated probabilities per record.
    LambdaSweep(SweepArgs),
    /// Simulate identifying the measurement from finite probe runs.
    Hyptest(HypTestArgs),
    /// Write a scenario file: the built-in exclusive-events example, or a random draw.
    Scenario(ScenarioArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct ClassifyArgs {
    /// Scenario JSON file.
    #[arg(long)]
    scenario: PathBuf,
    /// Mixing angle α of the A preparation, in [0, π/2].
    #[arg(long, allow_hyphen_values = true)]
    alpha: f64,
    /// Mixing angle β of the B preparation, in [0, π/2].
    #[arg(long, allow_hyphen_values = true)]
    beta: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    phi_alpha: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    phi_beta: f64,
    /// Comma-separated λ values in [0, 1].
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    lambdas: Vec<f64>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Args)]
struct SamplerFlags {
    /// Hilbert-space dimension, 2 or 3 [default: 2].
    #[arg(long)]
    dim: Option<usize>,
    /// Seed for every random draw; required unless --config supplies it.
    #[arg(long)]
    seed: Option<u64>,
    /// State measure: haar | param-uniform.
    #[arg(long, value_parser = kebab::<StateMeasure>)]
    measure: Option<StateMeasure>,
    /// Effects: general | projective-only.
    #[arg(long, value_parser = kebab::<EffectKind>)]
    effects: Option<EffectKind>,
    /// Qubit effect measure: region | ball.
    #[arg(long, value_parser = kebab::<EffectMeasure>)]
    effect_measure: Option<EffectMeasure>,
    /// Premise: strict | weak.
    #[arg(long, value_parser = kebab::<PremiseMode>)]
    premise: Option<PremiseMode>,
    /// Fix α = β = π/4.
    #[arg(long)]
    equal_mixing: bool,
    #[arg(long)]
    max_rejections: Option<u64>,
    /// JSON file with SampleConfig fields; explicit flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct RunFlags {
    #[arg(long)]
    trials: u64,
    /// CSV destination; with --format csv and no --out the CSV goes to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Omit the timestamp from the metadata block.
    #[arg(long)]
    no_timestamp: bool,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Args)]
struct SampleArgs {
    #[command(flatten)]
    sampler: SamplerFlags,
    #[command(flatten)]
    run: RunFlags,
    /// Optional λ values attached to every record.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    lambdas: Vec<f64>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    sampler: SamplerFlags,
    #[command(flatten)]
    run: RunFlags,
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "0.1,0.5,0.9",
        allow_hyphen_values = true
    )]
    lambdas: Vec<f64>,
}

#[derive(Args)]
#[command(group = clap::ArgGroup::new("model").required(true).args(["scenario", "clicks"]))]
struct HypTestArgs {
    /// Scenario JSON supplying p1, p2, q1, q2.
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// Click probabilities given directly as p1,p2,q1,q2.
    #[arg(long, value_delimiter = ',', num_args = 1, allow_hyphen_values = true)]
    clicks: Option<Vec<f64>>,
    /// Total probe runs M.
    #[arg(long)]
    m: u64,
    /// cos²α: ψ1 fraction behind the reference rate of A.
    #[arg(long)]
    frac1: f64,
    /// cos²β: ψ1 fraction behind the reference rate of B.
    #[arg(long)]
    frac1_alt: f64,
    /// ψ1 fraction of the probe runs; defaults to --frac1.
    #[arg(long)]
    probe_frac: Option<f64>,
    #[arg(long, default_value_t = 1000)]
    repeats: u64,
    #[arg(long, value_parser = parse_measurement, default_value = "A")]
    truth: Measurement,
    #[arg(long)]
    seed: u64,
    /// Per-repeat CSV destination.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    no_timestamp: bool,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Args)]
struct ScenarioArgs {
    #[command(flatten)]
    sampler: SamplerFlags,
    /// Destination file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Usage errors exit with 2, everything else with 1.
enum Failure {
    Usage(String),
    Runtime(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Runtime(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Runtime(e.into())
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

/// Input validation failures are the caller's fault; the rest happen at run time.
fn classify_error(e: YsError) -> Failure {
    match e {
        YsError::SamplingStarvation { .. } | YsError::EmptyRecords => Failure::Runtime(e.into()),
        other => Failure::Usage(other.to_string()),
    }
}

fn kebab<T: DeserializeOwned>(s: &str) -> Result<T, String> {
    serde_json::from_value(serde_json::Value::String(s.to_owned())).map_err(|e| e.to_string())
}

fn parse_measurement(s: &str) -> Result<Measurement, String> {
    s.parse()
}

#[derive(Serialize)]
struct Metadata<C: Serialize> {
    tool: &'static str,
    version: &'static str,
    seed: Option<u64>,
    config: C,
    #[serde(skip_serializing_if = "Option::is_none")]
    timestamp_unix: Option<u64>,
}

fn metadata<C: Serialize>(seed: Option<u64>, config: C, no_timestamp: bool) -> Metadata<C> {
    let timestamp_unix = (!no_timestamp).then(|| {
        SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0)
    });
    Metadata {
        tool: "ysq",
        version: env!("CARGO_PKG_VERSION"),
        seed,
        config,
        timestamp_unix,
    }
}

fn print_json<T: Serialize>(value: &T) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).context("serializing output")?;
    let mut stdout = io::stdout().lock();
    writeln!(stdout, "{text}")?;
    Ok(())
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    let f = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn load_scenario(path: &Path) -> Result<Scenario, Failure> {
    Scenario::load(path).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn check_lambdas(lambdas: &[f64]) -> Result<(), Failure> {
    match lambdas.iter().find(|l| !(0.0..=1.0).contains(*l)) {
        Some(bad) => Err(usage(format!("lambda {bad} is outside [0, 1]"))),
        None => Ok(()),
    }
}

impl SamplerFlags {
    fn resolve(&self) -> Result<SampleConfig, Failure> {
        let mut config = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
                let mut value: serde_json::Value = serde_json::from_str(&text)
                    .map_err(|e| usage(format!("{}: {e}", path.display())))?;
                // the file may leave the seed to the command line
                if let (Some(obj), Some(seed)) = (value.as_object_mut(), self.seed) {
                    obj.insert("seed".into(), seed.into());
                }
                serde_json::from_value::<SampleConfig>(value)
                    .map_err(|e| usage(format!("{}: {e}", path.display())))?
            }
            None => {
                let seed = self
                    .seed
                    .ok_or_else(|| usage("--seed is required for sampling"))?;
                SampleConfig::with_seed(seed)
            }
        };
        if let Some(d) = self.dim {
            config.dim = d;
        }
        if let Some(m) = self.measure {
            config.measure = m;
        }
        if let Some(e) = self.effects {
            config.effects = e;
        }
        if let Some(e) = self.effect_measure {
            config.effect_measure = e;
        }
        if let Some(p) = self.premise {
            config.premise = p;
        }
        if self.equal_mixing {
            config.equal_mixing = true;
        }
        if let Some(m) = self.max_rejections {
            config.max_rejections_per_trial = m;
        }
        config.validate().map_err(classify_error)?;
        Ok(config)
    }
}

#[derive(Serialize)]
struct ClassifyOutput<'a> {
    metadata: Metadata<ClassifyEcho<'a>>,
    scalars: &'a ysq_core::ScenarioScalars,
    premise: ysq_core::Premise,
    category: ysq_core::Category,
    p: f64,
    q: f64,
    #[serde(rename = "P")]
    p_super: f64,
    #[serde(rename = "Q")]
    q_super: f64,
    ratio_pq: Option<f64>,
    #[serde(rename = "ratio_PQ")]
    ratio_pq_super: Option<f64>,
    qc_threshold: Option<ysq_core::QcThreshold>,
    lambda_results: Vec<ysq_core::LambdaResult>,
}

#[derive(Serialize)]
struct ClassifyEcho<'a> {
    scenario: &'a Path,
    lurking: LurkingVars,
    lambdas: &'a [f64],
}

fn cmd_classify(args: &ClassifyArgs) -> Result<(), Failure> {
    check_lambdas(&args.lambdas)?;
    let scenario = load_scenario(&args.scenario)?;
    let lurking = LurkingVars::new(args.alpha, args.beta, args.phi_alpha, args.phi_beta)
        .map_err(classify_error)?;
    let eval = evaluate(&scenario, &lurking).map_err(|e| Failure::Runtime(e.into()))?;
    let lambda_results = args
        .lambdas
        .iter()
        .map(|&l| lambda_family(&scenario, &lurking, l))
        .collect::<Result<Vec<_>, _>>()
        .map_err(classify_error)?;

    match args.format {
        Format::Csv => {
            let record = YsRecord::new(0, scenario.scalars(), lurking, &eval, 0, 0, lambda_results);
            write_csv(io::stdout().lock(), &[record], args.lambdas.len())?;
            Ok(())
        }
        Format::Json => print_json(&ClassifyOutput {
            metadata: metadata(
                None,
                ClassifyEcho {
                    scenario: &args.scenario,
                    lurking,
                    lambdas: &args.lambdas,
                },
                true,
            ),
            scalars: scenario.scalars(),
            premise: eval.classification.premise,
            category: eval.classification.category,
            p: eval.qc.p,
            q: eval.qc.q,
            p_super: eval.qq.p_super,
            q_super: eval.qq.q_super,
            ratio_pq: eval.classification.ratio_pq,
            ratio_pq_super: eval.classification.ratio_pq_super,
            qc_threshold: eval.qc.threshold,
            lambda_results,
        }),
    }
}

#[derive(Serialize)]
struct SampleOutput<'a> {
    metadata: Metadata<&'a SampleConfig>,
    n_trials: u64,
    summary: &'a ysq_core::experiments::RunSummary,
}

fn cmd_run(sampler: &SamplerFlags, run: &RunFlags, lambdas: &[f64]) -> Result<(), Failure> {
    check_lambdas(lambdas)?;
    if run.trials == 0 {
        return Err(usage("--trials must be at least 1"));
    }
    let config = sampler.resolve()?;
    let lambda_arg = (!lambdas.is_empty()).then_some(lambdas);
    let result = run_scatter(&config, run.trials, lambda_arg).map_err(classify_error)?;

    if let Some(path) = &run.out {
        let mut w = create(path)?;
        write_csv(&mut w, &result.records, lambdas.len())?;
        w.flush()?;
    }
    match run.format {
        Format::Csv if run.out.is_none() => {
            let mut stdout = BufWriter::new(io::stdout().lock());
            write_csv(&mut stdout, &result.records, lambdas.len())?;
            stdout.flush()?;
            Ok(())
        }
        _ => print_json(&SampleOutput {
            metadata: metadata(Some(config.seed), &config, run.no_timestamp),
            n_trials: run.trials,
            summary: &result.summary,
        }),
    }
}

#[derive(Serialize)]
struct HypTestEcho<'a> {
    scenario: Option<&'a Path>,
    model: ClickModel,
    setup: HypTestSetup,
    repeats: u64,
}

#[derive(Serialize)]
struct HypTestOutput<'a> {
    metadata: Metadata<HypTestEcho<'a>>,
    #[serde(rename = "M1")]
    m1: u64,
    #[serde(rename = "M2")]
    m2: u64,
    p_aggregate: f64,
    q_aggregate: f64,
    single_preparation: bool,
    disagreements: usize,
    disagreement_rate: f64,
    exact_disagreement: f64,
    standard_error: f64,
}

fn cmd_hyptest(args: &HypTestArgs) -> Result<(), Failure> {
    let model = match (&args.scenario, &args.clicks) {
        (Some(path), _) => ClickModel::from(&load_scenario(path)?),
        (None, Some(c)) if c.len() == 4 => {
            if c.iter().any(|x| !(0.0..=1.0).contains(x)) {
                return Err(usage("--clicks entries must lie in [0, 1]"));
            }
            ClickModel {
                p1: c[0],
                p2: c[1],
                q1: c[2],
                q2: c[3],
            }
        }
        _ => return Err(usage("--clicks expects four values p1,p2,q1,q2")),
    };
    let setup = HypTestSetup {
        probe_frac: args.probe_frac.unwrap_or(args.frac1),
        ..HypTestSetup::new(args.m, args.frac1, args.frac1_alt, args.truth)
    };
    setup.validate().map_err(classify_error)?;
    if args.repeats == 0 {
        return Err(usage("--repeats must be at least 1"));
    }
    let report =
        run_hyptest_with_model(&model, &setup, args.repeats, args.seed).map_err(classify_error)?;

    if let Some(path) = &args.out {
        let mut w = create(path)?;
        write_outcomes_csv(&mut w, &report.outcomes)?;
        w.flush()?;
    }
    match args.format {
        Format::Csv if args.out.is_none() => {
            let mut stdout = BufWriter::new(io::stdout().lock());
            write_outcomes_csv(&mut stdout, &report.outcomes)?;
            stdout.flush()?;
            Ok(())
        }
        _ => print_json(&HypTestOutput {
            metadata: metadata(
                Some(args.seed),
                HypTestEcho {
                    scenario: args.scenario.as_deref(),
                    model,
                    setup,
                    repeats: args.repeats,
                },
                args.no_timestamp,
            ),
            m1: report.m1,
            m2: report.m2,
            p_aggregate: report.p_aggregate,
            q_aggregate: report.q_aggregate,
            single_preparation: report.single_preparation,
            disagreements: report.outcomes.iter().filter(|o| o.disagree).count(),
            disagreement_rate: report.disagreement_rate,
            exact_disagreement: report.exact_disagreement,
            standard_error: report.standard_error,
        }),
    }
}

fn cmd_scenario(args: &ScenarioArgs) -> Result<(), Failure> {
    let scenario = if args.sampler.seed.is_none() && args.sampler.config.is_none() {
        Scenario::exclusive_events_example()
    } else {
        // same draw as trial 0 of a scatter run with this config
        let config = args.sampler.resolve()?;
        let mut rng = substream(config.seed, StreamDomain::Scatter, 0);
        sample_scenario(&config, &mut rng)
            .map_err(classify_error)?
            .0
    };
    let text = scenario.to_json();
    match &args.out {
        Some(path) => {
            let mut w = create(path)?;
            writeln!(w, "{text}")?;
            w.flush()?;
        }
        None => println!("{text}"),
    }
    Ok(())
}

fn init_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("YSQ_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        usage(format!(
            "YSQ_THREADS must be a positive integer, got {raw:?}"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .context("configuring worker pool")?;
    Ok(())
}

fn is_broken_pipe(e: &anyhow::Error) -> bool {
    e.downcast_ref::<io::Error>()
        .is_some_and(|io| io.kind() == io::ErrorKind::BrokenPipe)
}

fn run(cli: Cli) -> Result<(), Failure> {
    init_threads()?;
    match &cli.command {
        Command::Classify(a) => cmd_classify(a),
        Command::Sample(a) => cmd_run(&a.sampler, &a.run, &a.lambdas),
        Command::LambdaSweep(a) => cmd_run(&a.sampler, &a.run, &a.lambdas),
        Command::Hyptest(a) => cmd_hyptest(a),
        Command::Scenario(a) => cmd_scenario(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            // clap's report up to the usage block, folded onto one line
            let rendered = e.to_string();
            let head: Vec<&str> = rendered
                .lines()
                .take_while(|l| !l.trim().is_empty() && !l.starts_with("Usage:"))
                .map(str::trim)
                .collect();
            eprintln!("ysq: {}", head.join(" ").trim_start_matches("error: "));
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("ysq: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) if is_broken_pipe(&e) => ExitCode::SUCCESS,
        Err(Failure::Runtime(e)) => {
            eprintln!("ysq: {e:#}");
            ExitCode::from(1)
        }
    }
}
