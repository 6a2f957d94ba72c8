//! `orlicz`: premia, scores, Murphy diagrams and OR risk from the command line.

mod svg;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use orlicz::dist::{
    DiscreteDistribution, ExponentialParams, ForecastScenario, LognormalParams, ScenarioParams,
};
use orlicz::io::{read_distribution_file, read_sample_file, write_score_reports};
use orlicz::murphy::{
    default_thresholds, murphy_curve, murphy_from_replications, parse_threshold_grid,
    population_exponential, population_lognormal, ElementaryKind, MurphyCurve, POPULATION_GRID,
};
use orlicz::orliczfn::{catalog_lookup, OrliczFunctionSpec, PhiParams, CATALOG};
use orlicz::orrisk::{or_risk, HaezendonckGoovaerts, ScaledExpectation};
use orlicz::premium::orlicz_premium;
use orlicz::scoring::{mean_score, ScoringFamily, Weight};

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] orlicz::Error),
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if e.is_numerical() => 3,
            _ => 2,
        }
    }
}

type CliResult<T> = Result<T, CliError>;

#[derive(Parser)]
#[command(name = "orlicz", version, about = "Orlicz premia, consistent scores and Murphy diagrams")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Orlicz premium of a distribution file.
    #[command(allow_negative_numbers = true)]
    Premium(PremiumArgs),
    /// Mean scores of forecast files against an outcome file.
    #[command(allow_negative_numbers = true)]
    Score(ScoreArgs),
    /// Murphy diagram for a simulated scenario or forecast files.
    #[command(allow_negative_numbers = true)]
    Murphy(MurphyArgs),
    /// Simulated scenario replications, one row per observation.
    #[command(allow_negative_numbers = true)]
    Simulate(SimulateArgs),
    /// Optimized return risk of a distribution file.
    #[command(allow_negative_numbers = true)]
    Orrisk(OrriskArgs),
}

#[derive(Args, Clone)]
struct PhiArgs {
    /// Catalog function name.
    #[arg(long)]
    phi: String,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    q: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long = "lambda-mix")]
    lambda_mix: Option<f64>,
}

impl PhiArgs {
    fn spec(&self) -> CliResult<OrliczFunctionSpec<f64>> {
        let mut params = PhiParams::default();
        if let Some(p) = self.p {
            params = params.p(p);
        }
        if let Some(q) = self.q {
            params = params.q(q);
        }
        if let Some(a) = self.alpha {
            params = params.alpha(a);
        }
        if let Some(l) = self.lambda_mix {
            params = params.lambda_mix(l);
        }
        catalog_lookup(&self.phi, &params).map_err(|e| match e {
            orlicz::Error::UnknownFunction(name) => CliError::Usage(format!(
                "--phi: unknown function `{name}` (expected one of {})",
                CATALOG.join(", ")
            )),
            other => CliError::Core(other),
        })
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Emit {
    Csv,
    Json,
    Svg,
}

#[derive(Args)]
struct PremiumArgs {
    #[arg(long)]
    dist: PathBuf,
    #[command(flatten)]
    phi: PhiArgs,
    #[arg(long, value_enum, default_value = "json")]
    emit: Emit,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum WeightChoice {
    Invz,
    Invz2,
}

#[derive(Args)]
struct ScoreArgs {
    /// Outcome sample, one positive value per line.
    #[arg(long)]
    outcomes: PathBuf,
    /// Forecast sample as NAME=PATH; repeatable.
    #[arg(long = "forecast", required = true)]
    forecasts: Vec<String>,
    #[command(flatten)]
    phi: PhiArgs,
    /// Mixing weight; scores are integrated numerically when given,
    /// otherwise the closed form is used.
    #[arg(long, value_enum)]
    weight: Option<WeightChoice>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScenarioName {
    Lognormal,
    Exponential,
}

#[derive(Args, Clone)]
struct ScenarioArgs {
    #[arg(long, value_enum)]
    scenario: Option<ScenarioName>,
    /// Power of the lognormal scenario (0 targets the log certainty equivalent).
    #[arg(long = "p", id = "scenario_p")]
    p: Option<f64>,
    /// Expectile level of the exponential scenario.
    #[arg(long = "q", id = "scenario_q")]
    q: Option<f64>,
    #[arg(long = "sigma-y", default_value_t = 0.2)]
    sigma_y: f64,
    #[arg(long = "sigma-mu", default_value_t = 0.2)]
    sigma_mu: f64,
    #[arg(long = "sigma-lambda", default_value_t = 0.2)]
    sigma_lambda: f64,
    #[arg(long = "n-sims", default_value_t = 10_000)]
    n_sims: usize,
    #[arg(long = "n-obs", default_value_t = 1_000)]
    n_obs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl ScenarioArgs {
    fn scenario(&self) -> CliResult<ForecastScenario<f64>> {
        match self.scenario {
            Some(ScenarioName::Lognormal) => {
                let p = self.p.unwrap_or(0.0);
                Ok(ForecastScenario::lognormal(LognormalParams::new(self.sigma_y, self.sigma_mu, p)?)?)
            }
            Some(ScenarioName::Exponential) => {
                let q = self
                    .q
                    .ok_or_else(|| CliError::Usage("--q is required for the exponential scenario".into()))?;
                Ok(ForecastScenario::exponential(ExponentialParams::new(self.sigma_lambda, q)?)?)
            }
            None => Err(CliError::Usage("--scenario is required".into())),
        }
    }
}

#[derive(Args)]
struct MurphyArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    /// Compute population curves on a latent grid instead of simulating.
    #[arg(long)]
    population: bool,
    /// Outcome sample (with --forecast and --phi instead of --scenario).
    #[arg(long)]
    outcomes: Option<PathBuf>,
    #[arg(long = "forecast")]
    forecasts: Vec<String>,
    #[arg(long)]
    phi: Option<String>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long = "lambda-mix")]
    lambda_mix: Option<f64>,
    /// Threshold grid `lo:hi:count[:log|lin]`.
    #[arg(long)]
    grid: Option<String>,
    #[arg(long, value_enum, default_value = "csv")]
    emit: Emit,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum InnerName {
    Avar,
    Hg,
    Expectation,
}

#[derive(Args)]
struct OrriskArgs {
    #[arg(long)]
    dist: PathBuf,
    #[arg(long, value_enum)]
    inner: InnerName,
    /// Level of the AV@R or Haezendonck-Goovaerts inner functional.
    #[arg(long)]
    lambda: Option<f64>,
    /// Orlicz function of the Haezendonck-Goovaerts inner functional.
    #[arg(long)]
    phi: Option<String>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    q: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long = "lambda-mix")]
    lambda_mix: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn output(path: &Option<PathBuf>) -> CliResult<Box<dyn Write>> {
    match path {
        Some(p) => {
            let file = File::create(p).map_err(|source| CliError::Io {
                path: p.display().to_string(),
                source,
            })?;
            Ok(Box::new(BufWriter::new(file)))
        }
        None => Ok(Box::new(BufWriter::new(io::stdout().lock()))),
    }
}

fn write_text(path: &Option<PathBuf>, text: &str) -> CliResult<()> {
    let mut out = output(path)?;
    out.write_all(text.as_bytes())
        .and_then(|_| out.flush())
        .map_err(|source| CliError::Io {
            path: path.as_ref().map_or("<stdout>".into(), |p| p.display().to_string()),
            source,
        })
}

fn flag_file<T>(flag: &str, path: &Path, read: impl Fn(&Path) -> orlicz::Result<T>) -> CliResult<T> {
    if !path.exists() {
        return Err(CliError::Usage(format!("{flag}: {} does not exist", path.display())));
    }
    read(path).map_err(|e| match e {
        orlicz::Error::Parse(msg) => CliError::Usage(format!("{flag}: {msg}")),
        other => CliError::Core(other),
    })
}

fn read_forecasts(specs: &[String]) -> CliResult<Vec<(String, Vec<f64>)>> {
    specs
        .iter()
        .map(|s| {
            let (name, path) = s
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("--forecast: expected NAME=PATH, got `{s}`")))?;
            let sample = flag_file("--forecast", Path::new(path), read_sample_file)?;
            Ok((name.to_string(), sample.values().to_vec()))
        })
        .collect()
}

fn json(value: &impl serde::Serialize) -> String {
    serde_json::to_string_pretty(value).expect("serializable") + "\n"
}

fn cmd_premium(args: &PremiumArgs) -> CliResult<()> {
    let spec = args.phi.spec()?;
    let dist: DiscreteDistribution<f64> = flag_file("--dist", &args.dist, read_distribution_file)?;
    let result = orlicz_premium(&dist, &spec)?;
    let text = match args.emit {
        Emit::Json => json(&result),
        Emit::Csv => format!(
            "value,method,residual\n{},{},{}\n",
            result.value,
            serde_json::to_value(result.method).unwrap().as_str().unwrap(),
            result.residual
        ),
        Emit::Svg => return Err(CliError::Usage("--emit: premium supports json or csv".into())),
    };
    write_text(&args.out, &text)
}

fn cmd_score(args: &ScoreArgs) -> CliResult<()> {
    let spec = args.phi.spec()?;
    let outcomes = flag_file("--outcomes", &args.outcomes, read_sample_file)?;
    let forecasts = read_forecasts(&args.forecasts)?;
    let family = match args.weight {
        None => ScoringFamily::canonical(spec),
        Some(WeightChoice::Invz) => ScoringFamily::with_weight(spec, Weight::InvZ(1.0)),
        Some(WeightChoice::Invz2) => ScoringFamily::with_weight(spec, Weight::InvZ2(1.0)),
    };
    let mut reports = Vec::with_capacity(forecasts.len());
    for (name, xs) in &forecasts {
        let report = mean_score(&family, name, xs, outcomes.values()).map_err(|e| match e {
            orlicz::Error::LengthMismatch { left, right } => CliError::Usage(format!(
                "--forecast {name}: {left} forecasts for {right} outcomes"
            )),
            other => CliError::Core(other),
        })?;
        reports.push(report);
    }
    reports.sort_by(|a, b| a.mean_score.total_cmp(&b.mean_score).then(a.forecaster.cmp(&b.forecaster)));
    let mut buf = Vec::new();
    write_score_reports(&reports, &mut buf)?;
    write_text(&args.out, &String::from_utf8(buf).expect("csv is utf-8"))
}

fn thresholds(grid: &Option<String>, pooled: impl FnOnce() -> Vec<f64>) -> CliResult<Vec<f64>> {
    match grid {
        Some(text) => parse_threshold_grid(text).map_err(|e| CliError::Usage(format!("--grid: {e}"))),
        None => Ok(default_thresholds(&pooled())?),
    }
}

fn emit_curve(curve: &MurphyCurve<f64>, emit: Emit, out: &Option<PathBuf>) -> CliResult<()> {
    let text = match emit {
        Emit::Csv => {
            let mut buf = Vec::new();
            curve.write_csv(&mut buf)?;
            String::from_utf8(buf).expect("csv is utf-8")
        }
        Emit::Json => json(curve),
        Emit::Svg => svg::murphy_svg(curve),
    };
    write_text(out, &text)
}

fn cmd_murphy(args: &MurphyArgs) -> CliResult<()> {
    if let Some(outcomes_path) = &args.outcomes {
        if args.scenario.scenario.is_some() {
            return Err(CliError::Usage("--scenario and --outcomes are mutually exclusive".into()));
        }
        let phi = PhiArgs {
            phi: args
                .phi
                .clone()
                .ok_or_else(|| CliError::Usage("--phi is required with --outcomes".into()))?,
            p: args.scenario.p,
            q: args.scenario.q,
            alpha: args.alpha,
            lambda_mix: args.lambda_mix,
        };
        let kind = ElementaryKind::for_spec(&phi.spec()?);
        let outcomes = flag_file("--outcomes", outcomes_path, read_sample_file)?;
        let forecasts = read_forecasts(&args.forecasts)?;
        if forecasts.is_empty() {
            return Err(CliError::Usage("--forecast: at least one forecast file is required".into()));
        }
        let zs = thresholds(&args.grid, || {
            let mut pooled = outcomes.values().to_vec();
            forecasts.iter().for_each(|(_, xs)| pooled.extend_from_slice(xs));
            pooled
        })?;
        let curve = murphy_curve(&kind, &forecasts, outcomes.values(), &zs).map_err(|e| match e {
            orlicz::Error::LengthMismatch { left, right } => {
                CliError::Usage(format!("--forecast: {left} forecasts for {right} outcomes"))
            }
            other => CliError::Core(other),
        })?;
        return emit_curve(&curve, args.emit, &args.out);
    }

    let scenario = args.scenario.scenario()?;
    let kind = match scenario.params {
        ScenarioParams::Lognormal(p) if p.p == 0.0 => {
            ElementaryKind::Generic(catalog_lookup("lce", &PhiParams::default())?)
        }
        ScenarioParams::Lognormal(p) => ElementaryKind::PNorm { p: p.p },
        ScenarioParams::Exponential(p) => ElementaryKind::Expectile { q: p.q },
    };
    let curve = if args.population {
        let grid = args
            .grid
            .as_ref()
            .ok_or_else(|| CliError::Usage("--grid is required with --population".into()))?;
        let zs = thresholds(&Some(grid.clone()), Vec::new)?;
        match scenario.params {
            ScenarioParams::Lognormal(p) => population_lognormal(&p, &zs, POPULATION_GRID)?,
            ScenarioParams::Exponential(p) => population_exponential(&p, &zs, POPULATION_GRID)?,
        }
    } else {
        let s = &args.scenario;
        let reps = scenario.simulate(s.n_sims, s.n_obs, s.seed)?;
        let zs = thresholds(&args.grid, || {
            reps.iter()
                .flat_map(|r| r.outcomes.values().iter().chain(&r.forecasts).copied())
                .collect()
        })?;
        murphy_from_replications(&kind, &scenario.forecasters, &reps, &zs, Some(s.seed))?
    };
    emit_curve(&curve, args.emit, &args.out)
}

fn cmd_simulate(args: &SimulateArgs) -> CliResult<()> {
    let scenario = args.scenario.scenario()?;
    let s = &args.scenario;
    let reps = scenario.simulate(s.n_sims, s.n_obs, s.seed)?;
    let mut text = format!("replication,latent,tau,{},outcome\n", scenario.forecasters.join(","));
    for r in &reps {
        let forecasts: Vec<String> = r.forecasts.iter().map(|x| x.to_string()).collect();
        let prefix = format!("{},{},{},{}", r.index, r.latent, r.tau, forecasts.join(","));
        for y in r.outcomes.values() {
            text.push_str(&format!("{prefix},{y}\n"));
        }
    }
    write_text(&args.out, &text)
}

fn cmd_orrisk(args: &OrriskArgs) -> CliResult<()> {
    let dist: DiscreteDistribution<f64> = flag_file("--dist", &args.dist, read_distribution_file)?;
    let level = || {
        args.lambda
            .ok_or_else(|| CliError::Usage("--lambda is required for this inner functional".into()))
    };
    let result = match args.inner {
        InnerName::Expectation => or_risk(&dist, &ScaledExpectation::new(0.0)?)?,
        InnerName::Avar => or_risk(&dist, &ScaledExpectation::new(level()?)?)?,
        InnerName::Hg => {
            let phi = PhiArgs {
                phi: args
                    .phi
                    .clone()
                    .ok_or_else(|| CliError::Usage("--phi is required for --inner hg".into()))?,
                p: args.p,
                q: args.q,
                alpha: args.alpha,
                lambda_mix: args.lambda_mix,
            };
            or_risk(&dist, &HaezendonckGoovaerts::new(phi.spec()?, level()?)?)?
        }
    };
    write_text(&args.out, &json(&result))
}

fn run(cli: &Cli) -> CliResult<()> {
    match &cli.command {
        Command::Premium(a) => cmd_premium(a),
        Command::Score(a) => cmd_score(a),
        Command::Murphy(a) => cmd_murphy(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Orrisk(a) => cmd_orrisk(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
