//! `sdde-split`: trajectories, convergence studies and correlation sweeps.

mod manifest;

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};

use sdde_split::config::{ConfigFile, Preset};
use sdde_split::experiment::{self, run_convergence_study, run_rho_sweep, ConvergenceStudy};
use sdde_split::noise::{BrownianLattice, TrajectoryKey};
use sdde_split::reference::exact_path;
use sdde_split::schemes::UniformMesh;
use sdde_split::{Scheme, StudyConfig};

use manifest::Manifest;

#[derive(Parser, Debug)]
#[command(name = "sdde-split", version, about = "Splitting schemes for SDDEs with correlated noise")]
struct Cli {
    #[command(flatten)]
    common: Common,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Built-in parameter set.
    #[arg(long, global = true, value_parser = parse_preset)]
    preset: Option<Preset>,

    /// Flat TOML configuration; its keys override the preset.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Master seed for every noise stream.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads (output does not depend on this).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[arg(long, global = true, default_value = "out")]
    out_dir: PathBuf,

    /// Use the fine reference step, step grid and ensemble size of the full
    /// experiment instead of the desk-scale defaults.
    #[arg(long, global = true)]
    paper_scale: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write one trajectory as `t,X` CSV.
    Simulate {
        #[arg(long, value_enum, default_value_t = Method::LieTrotter)]
        scheme: Method,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        rho: f64,
        /// Scheme step; defaults to the largest step of the configured grid.
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long, default_value_t = 0)]
        trajectory: u64,
        /// Also write the fine Brownian lattice as a binary dump.
        #[arg(long)]
        dump_lattice: Option<PathBuf>,
    },
    /// Strong-error study at one correlation.
    Convergence {
        #[arg(long, value_enum)]
        scheme: Option<SchemeArg>,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        rho: f64,
    },
    /// Strong-error studies across the correlation grid.
    Sweep {
        #[arg(long, value_enum)]
        scheme: Option<SchemeArg>,
        /// Comma-separated correlations overriding the configured grid.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        rho_grid: Option<Vec<f64>>,
    },
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum SchemeArg {
    LieTrotter,
    Strang,
}

impl From<SchemeArg> for Scheme {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::LieTrotter => Scheme::LieTrotter,
            SchemeArg::Strang => Scheme::Strang,
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Method {
    LieTrotter,
    Strang,
    Reference,
}

fn parse_preset(s: &str) -> Result<Preset, String> {
    s.parse().map_err(|e: sdde_split::Error| e.to_string())
}

/// Failures that are the caller's fault exit with status 2.
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::fmt::Debug for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(e: sdde_split::Error) -> anyhow::Error {
    anyhow::Error::new(UsageError(format!("{}: {e}", e.kind())))
}

fn resolve(common: &Common) -> anyhow::Result<(StudyConfig, Option<Preset>)> {
    let file = match &common.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            ConfigFile::parse(&text).map_err(usage)?
        }
        None => ConfigFile::default(),
    };
    let mut preset = common.preset.or(file.preset).unwrap_or(Preset::Example1Desk);
    if common.paper_scale {
        preset = preset.at_paper_scale();
    }
    let mut cfg = file.apply(preset.config()).map_err(usage)?;
    if let Some(seed) = common.seed {
        cfg.master_seed = seed;
    }
    Ok((cfg, Some(preset)))
}

fn create(path: &Path) -> anyhow::Result<BufWriter<File>> {
    let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn tag(x: f64) -> String {
    format!("{x}").replace('-', "m")
}

fn simulate(
    cfg: &StudyConfig,
    out_dir: &Path,
    method: Method,
    rho: f64,
    dt: Option<f64>,
    trajectory: u64,
    dump: Option<&Path>,
    manifest: &mut Manifest,
) -> anyhow::Result<()> {
    let problem = cfg.problem.with_rho(rho).map_err(usage)?;
    let steps = (problem.horizon() / cfg.dt_reference).round() as usize;
    let key = TrajectoryKey::new(cfg.master_seed, trajectory);
    let fine = BrownianLattice::generate(key, steps, cfg.dt_reference).map_err(usage)?;
    if let Some(path) = dump {
        fine.write_binary(cfg.master_seed, create(path)?)?;
        manifest.output(path)?;
    }
    let (name, path) = match method {
        Method::Reference => {
            let path = out_dir.join(format!(
                "reference_rho{}_dt{}_traj{trajectory}.csv",
                tag(rho),
                tag(cfg.dt_reference)
            ));
            exact_path(&problem, &fine)?.write_csv(create(&path)?)?;
            ("reference".to_string(), path)
        }
        Method::LieTrotter | Method::Strang => {
            let scheme = if method == Method::Strang {
                Scheme::Strang
            } else {
                Scheme::LieTrotter
            };
            let dt = dt.unwrap_or_else(|| cfg.dt_grid.iter().copied().fold(0.0, f64::max));
            let mesh = UniformMesh::new(&problem, dt).map_err(usage)?;
            let noise = scheme.noise_from(&fine, &mesh).map_err(usage)?;
            let path = out_dir.join(format!(
                "{scheme}_rho{}_dt{}_traj{trajectory}.csv",
                tag(rho),
                tag(dt)
            ));
            scheme.simulate(&problem, &mesh, &noise)?.write_csv(create(&path)?)?;
            (scheme.to_string(), path)
        }
    };
    log::info!("{name} trajectory {trajectory} written to {}", path.display());
    manifest.output(&path)
}

fn write_tables(
    studies: &[ConvergenceStudy],
    out_dir: &Path,
    manifest: &mut Manifest,
) -> anyhow::Result<()> {
    let errors = out_dir.join("errors.csv");
    experiment::write_errors_csv(create(&errors)?, studies)?;
    manifest.output(&errors)?;
    let orders = out_dir.join("orders.csv");
    experiment::write_orders_csv(create(&orders)?, studies)?;
    manifest.output(&orders)
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let (mut cfg, preset) = resolve(&cli.common)?;
    let out_dir = &cli.common.out_dir;
    fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;

    let command = match &cli.command {
        Command::Simulate { .. } => "simulate",
        Command::Convergence { .. } => "convergence",
        Command::Sweep { .. } => "sweep",
    };
    match &cli.command {
        Command::Convergence { scheme: Some(s), .. } | Command::Sweep { scheme: Some(s), .. } => {
            cfg.scheme = (*s).into()
        }
        _ => {}
    }
    if let Command::Sweep { rho_grid: Some(grid), .. } = &cli.command {
        cfg.rho_grid = grid.clone();
    }
    if let Command::Sweep { .. } = &cli.command {
        if cfg.rho_grid.is_empty() {
            return Err(usage(sdde_split::Error::EmptyInput("rho_grid")));
        }
    }
    cfg.validate().map_err(usage)?;

    let mut manifest = Manifest::new(command, preset, &cfg, cli.common.threads)?;
    let config_path = out_dir.join("config.toml");
    fs::write(&config_path, &manifest.config)
        .with_context(|| format!("writing {}", config_path.display()))?;

    let pool = {
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(n) = cli.common.threads {
            b = b.num_threads(n.max(1));
        }
        b.build()?
    };

    let started = Instant::now();
    pool.install(|| -> anyhow::Result<()> {
        match cli.command {
            Command::Simulate {
                scheme,
                rho,
                dt,
                trajectory,
                dump_lattice,
            } => simulate(
                &cfg,
                out_dir,
                scheme,
                rho,
                dt,
                trajectory,
                dump_lattice.as_deref(),
                &mut manifest,
            ),
            Command::Convergence { rho, .. } => {
                let study = run_convergence_study(&cfg, rho).map_err(|e| match e {
                    e @ sdde_split::Error::RhoOutOfRange(_) => usage(e),
                    e => e.into(),
                })?;
                write_tables(&[study], out_dir, &mut manifest)
            }
            Command::Sweep { .. } => {
                let studies = run_rho_sweep(&cfg)?;
                write_tables(&studies, out_dir, &mut manifest)
            }
        }
    })?;
    manifest.elapsed_seconds = started.elapsed().as_secs_f64();

    let manifest_path = out_dir.join("manifest.json");
    manifest.write(&manifest_path)?;
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let (code, kind) = if e.downcast_ref::<UsageError>().is_some() {
                (2, "usage")
            } else {
                (1, "runtime")
            };
            let message = format!("{e:#}").replace('\n', " ");
            eprintln!("error[{kind}]: {message}");
            ExitCode::from(code)
        }
    }
}
