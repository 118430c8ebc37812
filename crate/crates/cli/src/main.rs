//! `ordexp` — estimators of positive powers of ordered scale parameters for
//! two shifted-exponential populations, with Monte Carlo verification.
//!
//! Subcommands: `constants`, `estimate`, `simulate`, `gpc`, `gof`. Every run
//! echoes its resolved configuration to stderr before emitting results on
//! stdout (or to files), so stdout stays machine-parseable.

mod output;
mod svg;

use std::collections::HashMap;
use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use ordexp::mcrisk::{self, default_eta_grid, SimConfig};
use ordexp::model::{self, EstimationConfig};
use ordexp::{evaluate_estimator, kernel, numerics, sigma1, sigma2};
use ordexp::{EstimateReport, EstimatorId, LossSpec, Target};

use output::{estimates_to_csv, format_sig, render_table, risk_rows_to_csv};

#[derive(Debug)]
enum CliError {
    Usage(String),
    Io(String),
    Core(ordexp::Error),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Io(m) => f.write_str(m),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl CliError {
    fn category(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Io(_) => "io",
            CliError::Core(e) => e.category(),
        }
    }
}

impl From<ordexp::Error> for CliError {
    fn from(e: ordexp::Error) -> Self {
        CliError::Core(e)
    }
}

type CliResult<T> = Result<T, CliError>;

fn io_err(context: &str, e: std::io::Error) -> CliError {
    CliError::Io(format!("{context}: {e}"))
}

// ---------------------------------------------------------------------------
// Argument surface.
// ---------------------------------------------------------------------------

#[derive(Parser)]
#[command(
    name = "ordexp",
    version,
    about = "Improved estimators of powers of ordered scale parameters for two shifted-exponential populations"
)]
struct Cli {
    /// Optional key=value config file mirroring the long flags; explicit
    /// flags win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Significant digits for numeric output (1..=17).
    #[arg(long, global = true)]
    precision: Option<usize>,

    /// Worker threads (additionally capped by ORDEXP_THREADS).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print every estimator constant for a (p1, p2, k, loss) configuration.
    Constants(ConstantsArgs),
    /// Estimate all sigma1^k and sigma2^k estimators from a two-population CSV.
    Estimate(EstimateArgs),
    /// Monte Carlo risk / RRI sweep over an eta grid.
    Simulate(SimulateArgs),
    /// Monte Carlo generalized Pitman closeness of one estimator vs another.
    Gpc(GpcArgs),
    /// Kolmogorov-Smirnov goodness of fit against a shifted exponential.
    Gof(GofArgs),
}

#[derive(Args)]
struct ConstantsArgs {
    #[arg(long)]
    p1: Option<usize>,
    #[arg(long)]
    p2: Option<usize>,
    #[arg(long)]
    k: Option<f64>,
    /// squared|entropy|symmetric|linex:<alpha>
    #[arg(long)]
    loss: Option<String>,
    /// Emit a JSON object instead of aligned text.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct EstimateArgs {
    /// CSV with header `population,value`.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    k: Option<f64>,
    /// Comma-separated loss selectors.
    #[arg(long)]
    losses: Option<String>,
    /// text|csv|json
    #[arg(long)]
    format: Option<String>,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    p1: Option<usize>,
    #[arg(long)]
    p2: Option<usize>,
    #[arg(long)]
    mu1: Option<f64>,
    #[arg(long)]
    mu2: Option<f64>,
    #[arg(long)]
    sigma2: Option<f64>,
    #[arg(long)]
    k: Option<f64>,
    #[arg(long)]
    losses: Option<String>,
    /// `all`, `improved`, or a comma-separated id list.
    #[arg(long)]
    estimators: Option<String>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// `lo:hi:count` or a comma-separated list of eta values in (0, 1].
    #[arg(long)]
    eta_grid: Option<String>,
    /// Output CSV path.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Optional RRI line chart.
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Args)]
struct GpcArgs {
    #[arg(long)]
    p1: Option<usize>,
    #[arg(long)]
    p2: Option<usize>,
    #[arg(long)]
    mu1: Option<f64>,
    #[arg(long)]
    mu2: Option<f64>,
    #[arg(long)]
    k: Option<f64>,
    #[arg(long)]
    loss: Option<String>,
    /// sigma1|sigma2
    #[arg(long)]
    target: Option<String>,
    #[arg(long)]
    est_a: Option<String>,
    #[arg(long)]
    est_b: Option<String>,
    /// Comma-separated eta values.
    #[arg(long)]
    etas: Option<String>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Optional CSV output path (default: table on stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GofArgs {
    #[arg(long)]
    input: Option<PathBuf>,
    /// 1 or 2.
    #[arg(long)]
    population: Option<usize>,
    #[arg(long)]
    location: Option<f64>,
    #[arg(long)]
    rate: Option<f64>,
}

// ---------------------------------------------------------------------------
// key=value config file; flags win, unknown keys are rejected.
// ---------------------------------------------------------------------------

struct Settings {
    map: HashMap<String, String>,
}

impl Settings {
    fn load(path: Option<&PathBuf>) -> CliResult<Self> {
        let mut map = HashMap::new();
        if let Some(path) = path {
            let text = std::fs::read_to_string(path)
                .map_err(|e| io_err(&format!("cannot read config {}", path.display()), e))?;
            for (idx, raw) in text.lines().enumerate() {
                let line = raw.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let (key, value) = line.split_once('=').ok_or_else(|| {
                    CliError::Usage(format!(
                        "config {} line {}: expected key=value, got {line:?}",
                        path.display(),
                        idx + 1
                    ))
                })?;
                map.insert(key.trim().to_string(), value.trim().to_string());
            }
        }
        Ok(Settings { map })
    }

    /// CLI flag wins; otherwise config value; otherwise default.
    fn get<T: FromStr>(&mut self, key: &str, cli: Option<T>, default: T) -> CliResult<T>
    where
        <T as FromStr>::Err: fmt::Display,
    {
        self.get_opt(key, cli).map(|v| v.unwrap_or(default))
    }

    fn get_opt<T: FromStr>(&mut self, key: &str, cli: Option<T>) -> CliResult<Option<T>>
    where
        <T as FromStr>::Err: fmt::Display,
    {
        let from_file = self.map.remove(key);
        if let Some(v) = cli {
            return Ok(Some(v));
        }
        match from_file {
            Some(raw) => raw
                .parse()
                .map(Some)
                .map_err(|e| CliError::Usage(format!("config key {key}: {e}"))),
            None => Ok(None),
        }
    }

    fn get_required<T: FromStr>(&mut self, key: &str, cli: Option<T>) -> CliResult<T>
    where
        <T as FromStr>::Err: fmt::Display,
    {
        self.get_opt(key, cli)?
            .ok_or_else(|| CliError::Usage(format!("missing required option --{key}")))
    }

    /// Every config key must correspond to a consumed flag.
    fn finish(&mut self) -> CliResult<()> {
        if let Some(key) = self.map.keys().next() {
            return Err(CliError::Usage(format!("unknown config key {key:?}")));
        }
        Ok(())
    }
}

/// Reject leftover config keys, then echo the resolved configuration to
/// stderr.
fn finish_and_echo(
    settings: &mut Settings,
    subcommand: &str,
    lines: &[(&str, String)],
) -> CliResult<()> {
    settings.finish()?;
    eprintln!("# ordexp {subcommand}");
    for (key, value) in lines {
        eprintln!("# {key} = {value}");
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Shared parsing helpers.
// ---------------------------------------------------------------------------

fn parse_losses(spec: &str) -> CliResult<Vec<LossSpec<f64>>> {
    let losses: Vec<LossSpec<f64>> = spec
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.parse().map_err(CliError::Core))
        .collect::<CliResult<_>>()?;
    if losses.is_empty() {
        return Err(CliError::Usage("at least one loss is required".into()));
    }
    Ok(losses)
}

fn parse_estimators(spec: &str) -> CliResult<Vec<EstimatorId>> {
    match spec.trim() {
        "all" => Ok(EstimatorId::ALL.to_vec()),
        "improved" => Ok(EstimatorId::IMPROVED.to_vec()),
        list => list
            .split(',')
            .filter(|s| !s.trim().is_empty())
            .map(|s| s.parse().map_err(CliError::Core))
            .collect(),
    }
}

fn parse_eta_grid(spec: &str) -> CliResult<Vec<f64>> {
    if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        if parts.len() != 3 {
            return Err(CliError::Usage(format!(
                "eta grid {spec:?}: expected lo:hi:count"
            )));
        }
        let lo: f64 = parts[0]
            .parse()
            .map_err(|_| CliError::Usage(format!("bad eta {:?}", parts[0])))?;
        let hi: f64 = parts[1]
            .parse()
            .map_err(|_| CliError::Usage(format!("bad eta {:?}", parts[1])))?;
        let count: usize = parts[2]
            .parse()
            .map_err(|_| CliError::Usage(format!("bad count {:?}", parts[2])))?;
        if count == 0 {
            return Err(CliError::Usage("eta grid needs at least one point".into()));
        }
        if count == 1 {
            return Ok(vec![lo]);
        }
        let step = (hi - lo) / (count - 1) as f64;
        Ok((0..count).map(|i| lo + step * i as f64).collect())
    } else {
        spec.split(',')
            .filter(|s| !s.trim().is_empty())
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| CliError::Usage(format!("bad eta {s:?}")))
            })
            .collect()
    }
}

fn parse_target(spec: &str) -> CliResult<Target> {
    match spec.trim() {
        "sigma1" => Ok(Target::Sigma1),
        "sigma2" => Ok(Target::Sigma2),
        other => Err(CliError::Usage(format!(
            "target must be sigma1 or sigma2, got {other:?}"
        ))),
    }
}

fn read_dataset(path: &PathBuf) -> CliResult<ordexp::RawDataset<f64>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| io_err(&format!("cannot read {}", path.display()), e))?;
    Ok(model::parse_csv(&text)?)
}

fn resolve_precision(settings: &mut Settings, cli: Option<usize>) -> CliResult<usize> {
    let digits = settings.get("precision", cli, 6usize)?;
    if !(1..=17).contains(&digits) {
        return Err(CliError::Usage(format!(
            "precision must be in 1..=17, got {digits}"
        )));
    }
    Ok(digits)
}

/// Worker count: flag/config value (default: all cores), capped by the
/// ORDEXP_THREADS environment variable when set.
fn resolve_threads(settings: &mut Settings, cli: Option<usize>) -> CliResult<usize> {
    let available = std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1);
    let mut n = settings.get("threads", cli, available)?;
    if let Ok(cap) = std::env::var("ORDEXP_THREADS") {
        let cap: usize = cap.parse().map_err(|_| {
            CliError::Usage(format!("ORDEXP_THREADS must be an integer, got {cap:?}"))
        })?;
        n = n.min(cap.max(1));
    }
    Ok(n.max(1))
}

// ---------------------------------------------------------------------------
// Subcommands.
// ---------------------------------------------------------------------------

fn cmd_constants(args: ConstantsArgs, settings: &mut Settings, digits: usize) -> CliResult<()> {
    let p1 = settings.get("p1", args.p1, 6usize)?;
    let p2 = settings.get("p2", args.p2, 6usize)?;
    let k = settings.get("k", args.k, 2.0f64)?;
    let loss_str = settings.get("loss", args.loss, "squared".to_string())?;
    let loss: LossSpec<f64> = loss_str.parse()?;
    finish_and_echo(
        settings,
        "constants",
        &[
            ("p1", p1.to_string()),
            ("p2", p2.to_string()),
            ("k", format_sig(k, digits)),
            ("loss", loss.to_string()),
            ("precision", digits.to_string()),
        ],
    )?;

    let cfg = EstimationConfig::new(k, loss)?;
    let c1 = sigma1::Sigma1Constants::new(p1, p2, &cfg)?;
    let c2 = sigma2::Sigma2Constants::new(p1, p2, &cfg)?;
    let q_joint = numerics::gamma_median((p1 + p2 - 2) as f64)?;
    let m01 = numerics::gamma_median((p1 - 1) as f64)?.powf(-k);
    let m02 = numerics::gamma_median((p2 - 1) as f64)?.powf(-k);
    let entries: Vec<(&str, f64)> = vec![
        ("d01", c1.d01),
        ("d02", c2.d02),
        ("umvue1", kernel::umvue_constant(p1, k)?),
        ("umvue2", kernel::umvue_constant(p2, k)?),
        ("alpha1", c1.alpha1),
        ("alpha2", c1.alpha2),
        ("alpha4", c1.alpha4),
        ("beta1", c2.beta1),
        ("beta2", c2.beta2),
        ("gamma_median_joint", q_joint),
        ("m01", m01),
        ("m02", m02),
    ];
    if args.json {
        let mut obj = serde_json::Map::new();
        obj.insert("p1".into(), p1.into());
        obj.insert("p2".into(), p2.into());
        obj.insert("k".into(), k.into());
        obj.insert("loss".into(), loss.to_string().into());
        for (name, value) in &entries {
            obj.insert((*name).into(), (*value).into());
        }
        obj.insert(
            "delta21_condition_holds".into(),
            c2.delta21_condition_holds().into(),
        );
        println!("{}", serde_json::Value::Object(obj));
    } else {
        let rows: Vec<Vec<String>> = entries
            .iter()
            .map(|(name, value)| vec![name.to_string(), format_sig(*value, digits)])
            .collect();
        print!(
            "{}",
            render_table(&["constant".to_string(), "value".to_string()], &rows)
        );
        println!(
            "delta21 dominance condition (beta1 < d02): {}",
            c2.delta21_condition_holds()
        );
    }
    Ok(())
}

const SIGMA1_TABLE: [EstimatorId; 9] = [
    EstimatorId::D01,
    EstimatorId::D11,
    EstimatorId::D12,
    EstimatorId::D13,
    EstimatorId::D14,
    EstimatorId::Bz1,
    EstimatorId::Pitman1,
    EstimatorId::Pitman1Pcaee,
    EstimatorId::Pcaee1,
];
const SIGMA2_TABLE: [EstimatorId; 6] = [
    EstimatorId::D02,
    EstimatorId::D21,
    EstimatorId::D22,
    EstimatorId::DoubleShrink,
    EstimatorId::Bz2,
    EstimatorId::Pitman2,
];

fn cmd_estimate(args: EstimateArgs, settings: &mut Settings, digits: usize) -> CliResult<()> {
    let input =
        PathBuf::from(settings.get_required("input", args.input.map(|p| p.display().to_string()))?);
    let k = settings.get("k", args.k, 2.0f64)?;
    let losses_str = settings.get(
        "losses",
        args.losses,
        "squared,entropy,symmetric".to_string(),
    )?;
    let losses = parse_losses(&losses_str)?;
    let format = settings.get("format", args.format, "text".to_string())?;
    finish_and_echo(
        settings,
        "estimate",
        &[
            ("input", input.display().to_string()),
            ("k", format_sig(k, digits)),
            ("losses", losses_str.clone()),
            ("format", format.clone()),
            ("precision", digits.to_string()),
        ],
    )?;

    let data = read_dataset(&input)?;
    let stats = model::summarize(&data)?;
    let mut all: Vec<EstimateReport<f64>> = Vec::new();
    for &loss in &losses {
        let cfg = EstimationConfig::new(k, loss)?;
        for id in SIGMA1_TABLE.iter().chain(SIGMA2_TABLE.iter()) {
            all.push(evaluate_estimator(*id, &stats, &cfg)?);
        }
    }
    let rate1 = stats.p1 as f64 / stats.s1;
    let rate2 = stats.p2 as f64 / stats.s2;

    match format.as_str() {
        "text" => {
            println!(
                "statistics: x1={} x2={} s1={} s2={} p1={} p2={}",
                format_sig(stats.x1, digits),
                format_sig(stats.x2, digits),
                format_sig(stats.s1, digits),
                format_sig(stats.s2, digits),
                stats.p1,
                stats.p2
            );
            println!(
                "reference rates (p_i / s_i): rate1={} rate2={}",
                format_sig(rate1, digits),
                format_sig(rate2, digits)
            );
            for (title, ids) in [
                ("sigma1^k estimates", &SIGMA1_TABLE[..]),
                ("sigma2^k estimates", &SIGMA2_TABLE[..]),
            ] {
                println!("\n{title}:");
                let mut header = vec!["loss".to_string()];
                header.extend(ids.iter().map(|id| id.to_string()));
                let rows: Vec<Vec<String>> = losses
                    .iter()
                    .map(|&loss| {
                        let mut row = vec![loss.to_string()];
                        for id in ids {
                            let rep = all
                                .iter()
                                .find(|r| r.loss == loss && r.estimator == *id)
                                .unwrap();
                            row.push(format_sig(rep.value, digits));
                        }
                        row
                    })
                    .collect();
                print!("{}", render_table(&header, &rows));
            }
        }
        "csv" => print!("{}", estimates_to_csv(&all, digits)),
        "json" => {
            let tables: Vec<serde_json::Value> = losses
                .iter()
                .map(|&loss| {
                    let estimates: Vec<&EstimateReport<f64>> =
                        all.iter().filter(|r| r.loss == loss).collect();
                    serde_json::json!({
                        "loss": loss.to_string(),
                        "estimates": estimates,
                    })
                })
                .collect();
            let doc = serde_json::json!({
                "k": k,
                "statistics": stats,
                "reference_rates": { "rate1": rate1, "rate2": rate2 },
                "tables": tables,
            });
            println!("{doc}");
        }
        other => {
            return Err(CliError::Usage(format!(
                "format must be text, csv or json, got {other:?}"
            )))
        }
    }
    Ok(())
}

fn cmd_simulate(args: SimulateArgs, settings: &mut Settings, digits: usize) -> CliResult<()> {
    let p1 = settings.get("p1", args.p1, 6usize)?;
    let p2 = settings.get("p2", args.p2, 6usize)?;
    let mu1 = settings.get("mu1", args.mu1, 0.0f64)?;
    let mu2 = settings.get("mu2", args.mu2, 0.0f64)?;
    let sigma2 = settings.get("sigma2", args.sigma2, 1.0f64)?;
    let k = settings.get("k", args.k, 2.0f64)?;
    let losses_str = settings.get("losses", args.losses, "squared".to_string())?;
    let losses = parse_losses(&losses_str)?;
    let estimators_str = settings.get("estimators", args.estimators, "all".to_string())?;
    let estimators = parse_estimators(&estimators_str)?;
    let reps = settings.get("reps", args.reps, 90_000usize)?;
    let seed = settings.get("seed", args.seed, 20250810u64)?;
    let eta_spec = settings.get_opt("eta-grid", args.eta_grid)?;
    let eta_grid = match &eta_spec {
        Some(spec) => parse_eta_grid(spec)?,
        None => default_eta_grid(),
    };
    let out =
        PathBuf::from(settings.get_required("out", args.out.map(|p| p.display().to_string()))?);
    let svg_path = settings
        .get_opt("svg", args.svg.map(|p| p.display().to_string()))?
        .map(PathBuf::from);
    finish_and_echo(
        settings,
        "simulate",
        &[
            ("p1", p1.to_string()),
            ("p2", p2.to_string()),
            ("mu1", format_sig(mu1, digits)),
            ("mu2", format_sig(mu2, digits)),
            ("sigma2", format_sig(sigma2, digits)),
            ("k", format_sig(k, digits)),
            ("losses", losses_str.clone()),
            (
                "estimators",
                estimators
                    .iter()
                    .map(|e| e.to_string())
                    .collect::<Vec<_>>()
                    .join(","),
            ),
            ("reps", reps.to_string()),
            ("seed", seed.to_string()),
            (
                "eta-grid",
                eta_grid
                    .iter()
                    .map(|e| format_sig(*e, digits))
                    .collect::<Vec<_>>()
                    .join(","),
            ),
            ("out", out.display().to_string()),
            (
                "svg",
                svg_path
                    .as_ref()
                    .map(|p| p.display().to_string())
                    .unwrap_or_default(),
            ),
        ],
    )?;

    let cfg = SimConfig {
        p1,
        p2,
        mu1,
        mu2,
        sigma2,
        eta_grid,
        k,
        losses,
        estimators,
        reps,
        seed,
    };
    let result = mcrisk::simulate_risk(&cfg)?;
    if result.degenerate_resamples > 0 {
        eprintln!(
            "# degenerate draws resampled: {}",
            result.degenerate_resamples
        );
    }
    let csv = risk_rows_to_csv(&result.rows, p1, p2, mu1, mu2, k, digits);
    std::fs::write(&out, csv).map_err(|e| io_err(&format!("cannot write {}", out.display()), e))?;
    eprintln!("# wrote {} rows to {}", result.rows.len(), out.display());
    if let Some(svg_path) = svg_path {
        let chart = svg::render_rri_chart(&result.rows);
        std::fs::write(&svg_path, chart)
            .map_err(|e| io_err(&format!("cannot write {}", svg_path.display()), e))?;
        eprintln!("# wrote chart to {}", svg_path.display());
    }
    Ok(())
}

fn cmd_gpc(args: GpcArgs, settings: &mut Settings, digits: usize) -> CliResult<()> {
    let p1 = settings.get("p1", args.p1, 6usize)?;
    let p2 = settings.get("p2", args.p2, 6usize)?;
    let mu1 = settings.get("mu1", args.mu1, 0.0f64)?;
    let mu2 = settings.get("mu2", args.mu2, 0.0f64)?;
    let k = settings.get("k", args.k, 2.0f64)?;
    let loss_str = settings.get("loss", args.loss, "squared".to_string())?;
    let loss: LossSpec<f64> = loss_str.parse()?;
    let target = parse_target(&settings.get("target", args.target, "sigma1".to_string())?)?;
    let est_a: EstimatorId = settings
        .get_required::<String>("est-a", args.est_a)?
        .parse()?;
    let est_b: EstimatorId = settings
        .get_required::<String>("est-b", args.est_b)?
        .parse()?;
    let etas =
        parse_eta_grid(&settings.get("etas", args.etas, "0.25,0.5,0.75,1.0".to_string())?)?;
    let reps = settings.get("reps", args.reps, 50_000usize)?;
    let seed = settings.get("seed", args.seed, 20250810u64)?;
    let out = settings
        .get_opt("out", args.out.map(|p| p.display().to_string()))?
        .map(PathBuf::from);
    finish_and_echo(
        settings,
        "gpc",
        &[
            ("p1", p1.to_string()),
            ("p2", p2.to_string()),
            ("mu1", format_sig(mu1, digits)),
            ("mu2", format_sig(mu2, digits)),
            ("k", format_sig(k, digits)),
            ("loss", loss.to_string()),
            ("target", format!("{target:?}").to_lowercase()),
            ("est-a", est_a.to_string()),
            ("est-b", est_b.to_string()),
            (
                "etas",
                etas.iter()
                    .map(|e| format_sig(*e, digits))
                    .collect::<Vec<_>>()
                    .join(","),
            ),
            ("reps", reps.to_string()),
            ("seed", seed.to_string()),
        ],
    )?;

    let cfg = SimConfig {
        p1,
        p2,
        mu1,
        mu2,
        sigma2: 1.0,
        eta_grid: etas,
        k,
        losses: vec![loss],
        estimators: vec![est_a, est_b],
        reps,
        seed,
    };
    let rows = mcrisk::gpc_estimate(&cfg, est_a, est_b, target)?;
    let mut csv = String::from("eta,loss,est_a,est_b,probability,se,reps,seed\n");
    for r in &rows {
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            format_sig(r.eta, digits),
            r.loss,
            est_a,
            est_b,
            format_sig(r.probability, digits),
            format_sig(r.se, digits),
            r.reps,
            r.seed
        ));
    }
    match out {
        Some(path) => {
            std::fs::write(&path, csv)
                .map_err(|e| io_err(&format!("cannot write {}", path.display()), e))?;
            eprintln!("# wrote {} rows to {}", rows.len(), path.display());
        }
        None => print!("{csv}"),
    }
    Ok(())
}

fn cmd_gof(args: GofArgs, settings: &mut Settings, digits: usize) -> CliResult<()> {
    let input =
        PathBuf::from(settings.get_required("input", args.input.map(|p| p.display().to_string()))?);
    let population = settings.get("population", args.population, 1usize)?;
    let location = settings.get_required("location", args.location)?;
    let rate = settings.get_required("rate", args.rate)?;
    finish_and_echo(
        settings,
        "gof",
        &[
            ("input", input.display().to_string()),
            ("population", population.to_string()),
            ("location", format_sig(location, digits)),
            ("rate", format_sig(rate, digits)),
        ],
    )?;

    let data = read_dataset(&input)?;
    let sample = match population {
        1 => &data.pop1,
        2 => &data.pop2,
        other => {
            return Err(CliError::Usage(format!(
                "population must be 1 or 2, got {other}"
            )))
        }
    };
    let report = model::ks_test(sample, location, rate)?;
    let verdict = if report.p_value > 0.05 {
        "fail to reject H0 at alpha=0.05"
    } else {
        "reject H0 at alpha=0.05"
    };
    println!(
        "D = {}\np = {}\nverdict: {verdict}",
        format_sig(report.statistic, digits),
        format_sig(report.p_value, digits)
    );
    Ok(())
}

fn run(cli: Cli) -> CliResult<()> {
    let mut settings = Settings::load(cli.config.as_ref())?;
    let digits = resolve_precision(&mut settings, cli.precision)?;
    let threads = resolve_threads(&mut settings, cli.threads)?;
    // One global pool for every simulation in this process.
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global();
    match cli.command {
        Command::Constants(args) => cmd_constants(args, &mut settings, digits),
        Command::Estimate(args) => cmd_estimate(args, &mut settings, digits),
        Command::Simulate(args) => cmd_simulate(args, &mut settings, digits),
        Command::Gpc(args) => cmd_gpc(args, &mut settings, digits),
        Command::Gof(args) => cmd_gof(args, &mut settings, digits),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.category());
            ExitCode::FAILURE
        }
    }
}
