//! `ristrace` command-line front end.

mod manifest;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use ristrace::scenarios::{path_dump_csv, run, Motion, ScenarioConfig};
use ristrace::tracer::trace;
use ristrace::validate::{run_all, OracleOptions};
use ristrace::Point3;

use manifest::{write_outputs, RunManifest};

#[derive(Parser)]
#[command(name = "ristrace", version, about = "Ray-traced RIS channel simulator")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the configured scenario.
    Run(RunArgs),
    /// Run a scenario C coverage map.
    Coverage(RunArgs),
    /// Dump the traced paths of a single link.
    Paths(PathsArgs),
    /// Run the built-in oracle suite.
    Validate(ValidateArgs),
}

#[derive(Args)]
struct ConfigArgs {
    /// Scenario config (or a previous run's manifest.json).
    #[arg(long)]
    config: PathBuf,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Override a config value, `dotted.key=value` (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Shorthand for `--set seed=N`.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: ConfigArgs,
}

#[derive(Args)]
struct PathsArgs {
    #[command(flatten)]
    common: ConfigArgs,
    /// Transmitter position `x,y,z` (default: the configured BS).
    #[arg(long, value_parser = parse_point)]
    tx: Option<Point3>,
    /// Receiver position `x,y,z` (default: the configured UE).
    #[arg(long, value_parser = parse_point)]
    rx: Option<Point3>,
}

#[derive(Args)]
struct ValidateArgs {
    /// Fault injection: scale the simulator's wavelength.
    #[arg(long, hide = true, default_value_t = 1.0)]
    inject_lambda_scale: f64,
}

fn parse_point(s: &str) -> Result<Point3, String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("`{t}`: {e}")))
        .collect::<Result<_, _>>()?;
    match v[..] {
        [x, y, z] => Ok(Point3::new(x, y, z)),
        _ => Err(format!("expected x,y,z, got `{s}`")),
    }
}

/// Failure classes; the discriminant is the process exit code.
#[derive(Debug)]
enum Failure {
    Config(String),
    Scene(String),
    Runtime(String),
    Oracle(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 1,
            Failure::Scene(_) => 2,
            Failure::Runtime(_) => 3,
            Failure::Oracle(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::Scene(m) | Failure::Runtime(m) | Failure::Oracle(m) => m,
        }
    }

    fn from_core(e: ristrace::Error) -> Self {
        if e.is_scene_error() {
            Failure::Scene(e.to_string())
        } else {
            Failure::Runtime(e.to_string())
        }
    }
}

struct Loaded {
    cfg: ScenarioConfig,
    scene: ristrace::scene::Scene,
    scene_sha256: String,
}

fn load(args: &ConfigArgs) -> Result<Loaded, Failure> {
    let mut overrides = args.set.clone();
    if let Some(seed) = args.seed {
        overrides.push(format!("seed={seed}"));
    }
    let cfg = ScenarioConfig::from_file(&args.config, &overrides).map_err(|e| Failure::Config(e.to_string()))?;
    let base = args.config.parent().filter(|p| !p.as_os_str().is_empty());
    let text = cfg.scene_text(base).map_err(|e| Failure::Scene(e.to_string()))?;
    let scene = ristrace::scene::Scene::from_json_str(&text).map_err(|e| Failure::Scene(e.to_string()))?;
    Ok(Loaded {
        cfg,
        scene,
        scene_sha256: manifest::sha256_hex(text.as_bytes()),
    })
}

fn cmd_run(args: &RunArgs, coverage: bool, command: &str) -> Result<(), Failure> {
    let start = Instant::now();
    let l = load(&args.common)?;
    if coverage && l.cfg.scenario.motion() != Motion::Grid {
        return Err(Failure::Config(format!(
            "coverage needs scenario C, config names {}",
            l.cfg.scenario
        )));
    }
    let out = run(&l.scene, &l.cfg).map_err(Failure::from_core)?;
    finish(&args.common.out, command, &l, out.files, start)
}

fn cmd_paths(args: &PathsArgs) -> Result<(), Failure> {
    let start = Instant::now();
    let l = load(&args.common)?;
    let cfg = &l.cfg;
    let tx = args.tx.unwrap_or(Point3::new(cfg.bs[0], cfg.bs[1], cfg.tx_height));
    let rx = args.rx.unwrap_or(Point3::new(cfg.ue[0], cfg.ue[1], cfg.ue_height));
    let tc = cfg.trace_config();
    let keep = |paths: Vec<ristrace::tracer::PropagationPath>| -> Vec<_> {
        paths.into_iter().filter(|p| cfg.path_filter.accepts(p)).collect()
    };
    let dump = |a: Point3, b: Point3| -> Result<String, Failure> {
        let paths = keep(trace(&l.scene, a, b, &tc).map_err(Failure::from_core)?);
        path_dump_csv(&paths, &l.scene, cfg.freq_ghz).map_err(Failure::from_core)
    };
    let mut files = vec![("paths.csv".to_string(), dump(tx, rx)?)];
    if cfg.ris_enabled {
        let ris = Point3::new(cfg.ris[0], cfg.ris[1], cfg.ris_height);
        files.push(("paths_tx_ris.csv".into(), dump(tx, ris)?));
        files.push(("paths_ris_rx.csv".into(), dump(ris, rx)?));
    }
    files.push(("config.json".into(), cfg.to_json_pretty() + "\n"));
    finish(&args.common.out, "paths", &l, files, start)
}

fn finish(
    out: &Path,
    command: &str,
    l: &Loaded,
    files: Vec<(String, String)>,
    start: Instant,
) -> Result<(), Failure> {
    let names: Vec<String> = files.iter().map(|(n, _)| n.clone()).collect();
    let manifest = RunManifest::new(command, &l.cfg, &l.scene_sha256, names, start.elapsed());
    write_outputs(out, &files, &manifest).map_err(|e| Failure::Runtime(format!("cannot write outputs: {e}")))
}

fn cmd_validate(args: &ValidateArgs) -> Result<(), Failure> {
    let opts = OracleOptions {
        lambda_scale: args.inject_lambda_scale,
    };
    let reports = run_all(opts).map_err(Failure::from_core)?;
    let mut stdout = std::io::stdout().lock();
    for r in &reports {
        // a closed pipe must not turn into a panic exit code
        let _ = writeln!(stdout, "{r}");
    }
    let failed: Vec<&str> = reports.iter().filter(|r| !r.passed).map(|r| r.name).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Oracle(format!("oracle failure: {}", failed.join(", "))))
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let msg = e.to_string();
            eprintln!("error: {}", msg.lines().next().unwrap_or("invalid arguments").trim_start_matches("error: "));
            return ExitCode::from(1);
        }
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(1);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot configure worker threads: {e}");
            return ExitCode::from(3);
        }
    }
    std::panic::set_hook(Box::new(|info| {
        eprintln!("error: internal failure: {}", info.to_string().replace('\n', " "));
    }));
    let dispatched = std::panic::catch_unwind(|| match &cli.command {
        Command::Run(a) => cmd_run(a, false, "run"),
        Command::Coverage(a) => cmd_run(a, true, "coverage"),
        Command::Paths(a) => cmd_paths(a),
        Command::Validate(a) => cmd_validate(a),
    });
    let Ok(result) = dispatched else {
        return ExitCode::from(3);
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message().replace('\n', " "));
            ExitCode::from(f.code())
        }
    }
}
