//! `kakeya-lab`: runs the experiments from a JSON config and writes tables,
//! figures, a report and a manifest into the output directory.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use kakeya_lab::experiments::{
    exp_correlation, exp_dichotomy, exp_lower_bound_chain, exp_weak_type, run_frostman, run_maximal,
    ExperimentConfig, Outcome,
};
use kakeya_lab::io::{read_raster, read_tube_measures, render_measures_svg, render_raster_svg, sha256_hex, to_json, write_bytes};
use kakeya_lab::Error;
use serde_json::json;

/// Environment variable that overrides `--out`.
const OUT_ENV: &str = "KAKEYA_LAB_OUT";

#[derive(Parser)]
#[command(name = "kakeya-lab", version, about = "Multi-line Kakeya maximal operator experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Maximal function over a direction sweep.
    Maximal(RunArgs),
    /// Correlation of pipeline measures against the angle gap.
    Correlation(RunArgs),
    /// Weak-type ratio over scales and levels.
    Weaktype(RunArgs),
    /// Area of K(delta) for a Perron tree and for the configured set.
    Dichotomy(RunArgs),
    /// Lower-bound chain: mass floor, level sets and direction measures.
    Chain(RunArgs),
    /// Frostman measures on projected segment families.
    Frostman(RunArgs),
    /// Renders a raster (.pgm) or a tube measure file (.csv) to SVG.
    Render(RenderArgs),
}

#[derive(Args)]
struct Common {
    /// Output directory. `KAKEYA_LAB_OUT` takes precedence.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads. Changes wall time only.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct RunArgs {
    /// JSON config file.
    #[arg(long)]
    config: PathBuf,
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    seed: Option<u64>,
    /// Scale; repeat to give several. Replaces the config's list.
    #[arg(long = "delta")]
    deltas: Vec<f64>,
    #[arg(long)]
    s: Option<f64>,
    #[arg(long)]
    t: Option<f64>,
    /// Comma-separated levels. Replaces the config's list.
    #[arg(long, value_delimiter = ',')]
    lambda_grid: Option<Vec<f64>>,
    /// Number of sweep directions.
    #[arg(long)]
    dirs: Option<usize>,
}

#[derive(Args)]
struct RenderArgs {
    /// Input file: a .pgm raster with its sidecar, or a tube measure .csv.
    input: PathBuf,
    #[command(flatten)]
    common: Common,
}

/// A run that could not finish, with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Io { .. } => 3,
            Error::Config(_)
            | Error::InvalidParameter(_)
            | Error::Malformed { .. }
            | Error::GridTooCoarse { .. }
            | Error::FeatureTooSmall { .. } => 2,
            Error::EmptySupport | Error::LiftFailed { .. } | Error::InvalidMeasure(_) => 1,
        };
        Failure { code, message: e.to_string() }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: Cli) -> Result<bool, Failure> {
    let (name, args): (&str, RunArgs) = match cli.command {
        Command::Render(r) => return render(r),
        Command::Maximal(a) => ("maximal", a),
        Command::Correlation(a) => ("correlation", a),
        Command::Weaktype(a) => ("weaktype", a),
        Command::Dichotomy(a) => ("dichotomy", a),
        Command::Chain(a) => ("chain", a),
        Command::Frostman(a) => ("frostman", a),
    };
    let mut cfg = load_config(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if !args.deltas.is_empty() {
        cfg.deltas = args.deltas.clone();
    }
    if let Some(s) = args.s {
        cfg.s = s;
    }
    if let Some(t) = args.t {
        cfg.t = t;
    }
    if let Some(l) = &args.lambda_grid {
        cfg.lambdas = l.clone();
    }
    if let Some(n) = args.dirs {
        cfg.directions = Some(n);
    }
    let out = out_dir(&args.common, cfg.output.take());
    let outcome = with_threads(args.common.threads, || match name {
        "maximal" => run_maximal(&cfg),
        "correlation" => exp_correlation(&cfg),
        "weaktype" => exp_weak_type(&cfg),
        "dichotomy" => exp_dichotomy(&cfg),
        "chain" => exp_lower_bound_chain(&cfg),
        _ => run_frostman(&cfg),
    })??;
    let files = outcome.files();
    write_outputs(&out, name, json!(cfg), &files, Some(&outcome))?;
    for flag in &outcome.report.flags {
        let mark = if flag.passed { "PASS" } else { "FAIL" };
        println!("{mark} {} value={:?} threshold={:?}", flag.criterion, flag.value, flag.threshold);
    }
    Ok(outcome.report.passed)
}

fn load_config(path: &Path) -> Result<ExperimentConfig, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure { code: 3, message: format!("cannot read config {}: {e}", path.display()) })?;
    serde_json::from_str(&text).map_err(|e| Failure { code: 2, message: format!("config {}: {e}", path.display()) })
}

fn out_dir(common: &Common, from_config: Option<PathBuf>) -> PathBuf {
    if let Some(p) = std::env::var_os(OUT_ENV).filter(|p| !p.is_empty()) {
        return PathBuf::from(p);
    }
    common.out.clone().or(from_config).unwrap_or_else(|| PathBuf::from("out"))
}

fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, Failure> {
    match threads {
        None => Ok(f()),
        Some(0) => Err(Failure { code: 2, message: "--threads must be at least 1".into() }),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Failure { code: 3, message: format!("cannot start worker pool: {e}") })?;
            Ok(pool.install(f))
        }
    }
}

/// Writes every output file, then the manifest listing their digests.
fn write_outputs(
    out: &Path,
    command: &str,
    config: serde_json::Value,
    files: &BTreeMap<String, Vec<u8>>,
    outcome: Option<&Outcome>,
) -> Result<(), Failure> {
    for (name, bytes) in files {
        write_bytes(&out.join(name), bytes)?;
    }
    let digests: BTreeMap<&str, String> = files.iter().map(|(n, b)| (n.as_str(), sha256_hex(b))).collect();
    let mut manifest = json!({
        "command": command,
        "version": env!("CARGO_PKG_VERSION"),
        "config": config,
        "outputs": digests,
    });
    if let Some(o) = outcome {
        manifest["config_hash"] = json!(o.report.config_hash);
        manifest["passed"] = json!(o.report.passed);
    }
    write_bytes(&out.join("manifest.json"), to_json(&manifest).as_bytes())?;
    Ok(())
}

fn render(args: RenderArgs) -> Result<bool, Failure> {
    let input = &args.input;
    let ext = input.extension().and_then(|e| e.to_str()).unwrap_or("").to_ascii_lowercase();
    if !input.exists() {
        return Err(Failure { code: 3, message: format!("cannot read {}: no such file", input.display()) });
    }
    let svg = match ext.as_str() {
        "pgm" => render_raster_svg(&read_raster(input)?),
        "csv" => render_measures_svg(&read_tube_measures(input)?),
        _ => {
            return Err(Failure {
                code: 2,
                message: format!("{}: expected a .pgm raster or a .csv measure file", input.display()),
            })
        }
    };
    let stem = input.file_stem().and_then(|s| s.to_str()).unwrap_or("render");
    let mut files = BTreeMap::new();
    files.insert(format!("{stem}.svg"), svg.into_bytes());
    let source = std::fs::read(input).map_err(|e| Failure { code: 3, message: format!("cannot read {}: {e}", input.display()) })?;
    let out = out_dir(&args.common, None);
    let config = json!({ "input": input.file_name().and_then(|n| n.to_str()), "input_sha256": sha256_hex(&source) });
    write_outputs(&out, "render", config, &files, None)?;
    Ok(true)
}
