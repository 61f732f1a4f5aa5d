use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use subeq::config::{Analysis, SystemConfig};
use subeq::io::{coupling_table, read_distribution, write_table};
use subeq::model::ModelSpec;
use subeq::pipeline::{label, run_analysis, run_pipeline, Context};
use subeq::report::to_json_string;
use subeq::CliError;
use subeq_core::bunching::{BunchingMode, Side};
use subeq_core::mixing::dbar;
use subeq_core::potential::PotentialKind;
use subeq_core::{PointSpec, Word};

/// Thread count for the data-parallel parts.
const THREADS_VAR: &str = "SUBEQ_THREADS";

#[derive(Parser)]
#[command(name = "subeq", version, about = "Subadditive equilibrium states of matrix cocycles over subshifts of finite type")]
struct Cli {
    /// System config (JSON); required by every per-analysis subcommand except `dbar`.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the config's potential: `norm` or `sv:S`.
    #[arg(long, global = true)]
    potential: Option<PotentialKind>,
    /// Overrides the config's seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Out {
    /// Directory for CSV tables.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ScanArgs {
    #[arg(long, default_value = "gibbs")]
    model: ModelSpec,
    #[arg(long)]
    level: usize,
    #[arg(long)]
    m1: i64,
    #[arg(long)]
    m2: i64,
    #[arg(long)]
    eps: f64,
    /// Window `a,b` of the cylinder partition; defaults to coordinate 0.
    #[arg(long, value_parser = parse_window)]
    partition: Option<(i64, i64)>,
}

fn parse_window(s: &str) -> Result<(i64, i64), String> {
    let (a, b) = s.split_once(',').ok_or("expected a,b")?;
    Ok((a.trim().parse().map_err(|_| "bad a")?, b.trim().parse().map_err(|_| "bad b")?))
}

#[derive(Subcommand)]
enum Command {
    /// Runs every analysis in a config and writes report.json, timings.json and CSV tables.
    Run {
        config_file: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    Pressure {
        #[arg(long)]
        n_max: usize,
        #[command(flatten)]
        out: Out,
    },
    Gibbs {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        pressure: Option<f64>,
        #[command(flatten)]
        out: Out,
    },
    Qm {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k_max: usize,
    },
    Lps {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value = "gibbs")]
        model: ModelSpec,
        #[arg(long)]
        gibbs_constant: Option<f64>,
    },
    Submult {
        #[arg(long)]
        n_max: usize,
    },
    Bunching {
        #[arg(long, default_value = "fiber")]
        mode: BunchingMode,
    },
    Holonomy {
        #[arg(long)]
        x: PointSpec,
        #[arg(long)]
        y: PointSpec,
        #[arg(long)]
        side: Side,
        #[arg(long)]
        n: usize,
    },
    Typicality {
        #[arg(long)]
        p: Word,
        #[arg(long)]
        bridge: Word,
        #[arg(long, default_value_t = 30)]
        n: usize,
    },
    Irreducibility,
    Lyapunov {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value = "gibbs")]
        model: ModelSpec,
    },
    /// Exact d-bar distance between two `sequence,mass` CSV distributions.
    Dbar {
        #[arg(long)]
        left: PathBuf,
        #[arg(long)]
        right: PathBuf,
        #[arg(long)]
        n: usize,
        /// Writes the optimal coupling as `left,right,mass`.
        #[arg(long)]
        coupling: Option<PathBuf>,
    },
    Kscan {
        #[command(flatten)]
        scan: ScanArgs,
    },
    Vwbscan {
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        scan: ScanArgs,
    },
}

fn load_config(cli: &Cli, path: &Path) -> Result<SystemConfig, CliError> {
    let mut config = SystemConfig::load(path)?;
    if let Some(p) = cli.potential {
        config.potential = p;
    }
    if let Some(s) = cli.seed {
        config.seed = s;
    }
    Ok(config)
}

fn single(cli: &Cli, analysis: Analysis, out: Option<&Path>) -> Result<(), CliError> {
    let path = cli.config.as_deref().ok_or_else(|| CliError::Config("--config is required".into()))?;
    let mut config = load_config(cli, path)?;
    config.analyses = vec![analysis.clone()];
    let system = config.validate()?;
    let (result, tables) = run_analysis(&system, &analysis, &mut Context::default())
        .map_err(|source| CliError::Numeric { analysis: label(0, &analysis), source })?;
    print!("{}", to_json_string(&result));
    if let Some(dir) = out {
        std::fs::create_dir_all(dir)?;
        for t in &tables {
            write_table(dir, t)?;
        }
    }
    Ok(())
}

fn execute(cli: &Cli) -> Result<i32, CliError> {
    let scan = |s: &ScanArgs| (s.model.clone(), s.level, s.m1, s.m2, s.eps, s.partition);
    let analysis = match &cli.command {
        Command::Run { config_file, out } => {
            let config = load_config(cli, config_file)?;
            let report = run_pipeline(&config)?;
            let dir = out.clone().or_else(|| config.output_dir.clone()).unwrap_or_else(|| PathBuf::from("out"));
            report.persist(&dir)?;
            if let Some(e) = &report.failure {
                eprintln!("subeq: {e}");
            }
            return Ok(report.exit_code());
        }
        Command::Dbar { left, right, n, coupling } => {
            let l = read_distribution(left, *n)?;
            let r = read_distribution(right, *n)?;
            let res = dbar(&l, &r).map_err(|source| CliError::Numeric { analysis: "dbar".into(), source })?;
            print!("{}", to_json_string(&serde_json::to_value(&res).expect("serializable")));
            if let Some(path) = coupling {
                let dir = path.parent().unwrap_or(Path::new("."));
                let file = path.file_name().and_then(|f| f.to_str()).unwrap_or("coupling.csv");
                write_table(dir, &coupling_table(file, &res.coupling))?;
            }
            return Ok(0);
        }
        Command::Pressure { n_max, out } => return single(cli, Analysis::Pressure { n_max: *n_max }, out.out.as_deref()).map(|_| 0),
        Command::Gibbs { n, pressure, out } => {
            return single(cli, Analysis::Gibbs { n: *n, pressure: *pressure }, out.out.as_deref()).map(|_| 0)
        }
        Command::Qm { n, k_max } => Analysis::Qm { n: *n, k_max: *k_max },
        Command::Lps { n, model, gibbs_constant } => {
            Analysis::Lps { n: *n, model: model.clone(), gibbs_constant: *gibbs_constant }
        }
        Command::Submult { n_max } => Analysis::Submult { n_max: *n_max },
        Command::Bunching { mode } => Analysis::Bunching { mode: *mode },
        Command::Holonomy { x, y, side, n } => Analysis::Holonomy { x: x.clone(), y: y.clone(), side: *side, n: *n },
        Command::Typicality { p, bridge, n } => Analysis::Typicality { p: p.clone(), bridge: bridge.clone(), n: *n },
        Command::Irreducibility => Analysis::Irreducibility {},
        Command::Lyapunov { n, model } => Analysis::Lyapunov { n: *n, model: model.clone() },
        Command::Kscan { scan: s } => {
            let (model, level, m1, m2, eps, partition) = scan(s);
            Analysis::Kscan { model, level, m1, m2, eps, partition }
        }
        Command::Vwbscan { n, scan: s } => {
            let (model, level, m1, m2, eps, partition) = scan(s);
            Analysis::Vwbscan { model, level, n: *n, m1, m2, eps, partition }
        }
    };
    single(cli, analysis, None).map(|_| 0)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    if let Ok(threads) = std::env::var(THREADS_VAR) {
        match threads.parse::<usize>() {
            Ok(n) => {
                if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                    log::warn!("{THREADS_VAR}: {e}");
                }
            }
            Err(_) => log::warn!("ignoring {THREADS_VAR}={threads:?}"),
        }
    }
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("subeq: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
