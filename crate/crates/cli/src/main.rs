use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use fwmpair_cli::commands::{self, Output};
use fwmpair_cli::config::{Format, IdlerBand, RunConfig};
use fwmpair_cli::quantity::{Length, Power, Quantity};
use fwmpair_cli::{exit, presets, CliError};
use fwmpair_core::materials::MixingRule;
use fwmpair_core::modes::cache::DispersionCache;

#[derive(Debug, Parser)]
#[command(name = "fwmpair", version, about = "Photon-pair source modeling for SFWM waveguides")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Global {
    /// Run configuration (TOML).
    #[arg(long, global = true, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Embedded configuration: wCH4, wNO2, wCOM or alibart.
    #[arg(long, global = true)]
    preset: Option<String>,
    /// Directory receiving the JSON report and CSV tables.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Dispersion cache directory.
    #[arg(long, global = true)]
    cache: Option<PathBuf>,
    /// FD mesh step, e.g. 20nm.
    #[arg(long, global = true)]
    grid_step: Option<Quantity<Length>>,
    /// Print the JSON report (default).
    #[arg(long, global = true, conflicts_with = "csv")]
    json: bool,
    /// Print the primary CSV table instead of JSON.
    #[arg(long, global = true)]
    csv: bool,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve the guided mode at one wavelength.
    SolveMode {
        /// Vacuum wavelength with unit, e.g. 2.1um.
        #[arg(long)]
        wavelength: Quantity<Length>,
        /// Also emit the sampled field as field.csv.
        #[arg(long)]
        dump_field: bool,
    },
    /// Dispersion, phase matching, γ, pair probability and rates.
    Pipeline {
        /// Overrides the configured peak pump power.
        #[arg(long)]
        peak_power: Option<Quantity<Power>>,
    },
    /// Rates of the step-index fiber source against the published table.
    ValidateAlibart {
        /// Air/silica mean used for the holey cladding.
        #[arg(long, value_enum, default_value_t = Mixing::Index)]
        mixing: Mixing,
    },
    /// Rank core geometries for a target signal wavelength.
    Design {
        /// Defaults to the configured signal wavelength.
        #[arg(long)]
        target_signal: Option<Quantity<Length>>,
        /// "c" or "LO:HI" with units, e.g. 1530nm:1565nm.
        #[arg(long)]
        idler_band: Option<String>,
        /// Candidates kept in the JSON report.
        #[arg(long, default_value_t = 10)]
        top: usize,
    },
    /// Signal drift and pump re-tuning under ±delta core perturbations.
    Tolerance {
        /// Width and height perturbation, e.g. 10nm (default 10 nm).
        #[arg(long)]
        delta: Option<Quantity<Length>>,
    },
    /// Phase-matched signal and idler versus pump wavelength.
    PmCurve {
        /// "LO:HI" with units, e.g. 2.10um:2.25um.
        #[arg(long)]
        pump_range: Option<String>,
        /// Pump sampling step, e.g. 5nm.
        #[arg(long)]
        pump_step: Option<Quantity<Length>>,
    },
    /// Joint spectral density around the filters.
    Jsd {
        /// Cells per axis (rounded up to a multiple of 6).
        #[arg(long, default_value_t = 120)]
        cells: usize,
    },
    /// Inspect or empty the dispersion cache.
    Cache {
        #[command(subcommand)]
        action: CacheAction,
    },
}

#[derive(Debug, Subcommand)]
enum CacheAction {
    List,
    Clear,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Mixing {
    Index,
    Permittivity,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    fwmpair_core::init_deterministic_linalg();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::from(exit::OK),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let g = &cli.global;
    if let Some(n) = g.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    }
    let out = match &cli.command {
        Command::ValidateAlibart { mixing } => commands::alibart(match mixing {
            Mixing::Index => MixingRule::Index,
            Mixing::Permittivity => MixingRule::Permittivity,
        })?,
        Command::Cache { action } => {
            let cfg = load_optional(g)?;
            let cache = cache_dir(g, cfg.as_ref())
                .ok_or_else(|| CliError::Config("no cache directory: pass --cache or set compute.cache".into()))?;
            match action {
                CacheAction::List => commands::cache_list(&cache)?,
                CacheAction::Clear => commands::cache_clear(&cache)?,
            }
        }
        cmd => {
            let mut cfg = load_optional(g)?.ok_or_else(|| CliError::Config("pass --config or --preset".into()))?;
            if let Some(step) = g.grid_step {
                cfg.compute.get_or_insert_with(Default::default).grid_step = Some(step);
            }
            let cache = cache_dir(g, Some(&cfg));
            match cmd {
                Command::SolveMode { wavelength, dump_field } => commands::solve_mode(&cfg, wavelength.si(), *dump_field)?,
                Command::Pipeline { peak_power } => {
                    if let Some(p) = peak_power {
                        cfg.pump.peak_power = Some(*p);
                        cfg.pump.mean_power = None;
                    }
                    commands::pipeline(&cfg, cache)?
                }
                Command::Design { target_signal, idler_band, top } => {
                    let signal = target_signal
                        .or(cfg.design_spec().target_signal)
                        .or(cfg.compute().target_signal)
                        .ok_or_else(|| CliError::Config("no target signal: pass --target-signal".into()))?;
                    let band = idler_band.as_deref().map(parse_band).transpose()?;
                    commands::design(&cfg, signal.si(), band, *top, cache)?
                }
                Command::Tolerance { delta } => {
                    let d = delta.or(cfg.design_spec().tolerance).map_or(0.010, |q| q.si());
                    commands::tolerance(&cfg, d, cache)?
                }
                Command::PmCurve { pump_range, pump_step } => {
                    let (mut lo, mut hi, mut step) = cfg.pump_range();
                    if let Some(r) = pump_range {
                        (lo, hi) = parse_pair(r)?;
                    }
                    if let Some(s) = pump_step {
                        step = s.si();
                    }
                    commands::pm_curve(&cfg, (lo, hi, step), cache)?
                }
                Command::Jsd { cells } => commands::jsd_grid(&cfg, *cells, cache)?,
                Command::ValidateAlibart { .. } | Command::Cache { .. } => unreachable!(),
            }
        }
    };
    let format = if g.csv {
        Format::Csv
    } else if g.json {
        Format::Json
    } else {
        load_optional(g).ok().flatten().and_then(|c| c.outputs).and_then(|o| o.format).unwrap_or(Format::Json)
    };
    let dir = g.out.clone().or_else(|| load_optional(g).ok().flatten().and_then(|c| c.outputs).and_then(|o| o.dir));
    emit(&out, format, dir.as_deref())
}

fn load_optional(g: &Global) -> Result<Option<RunConfig>, CliError> {
    match (&g.config, &g.preset) {
        (Some(path), _) => {
            let text = fs::read_to_string(path).map_err(|source| CliError::Io { path: path.clone(), source })?;
            RunConfig::from_toml(&text).map(Some)
        }
        (None, Some(name)) => presets::load(name).map(Some),
        (None, None) => Ok(None),
    }
}

fn cache_dir(g: &Global, cfg: Option<&RunConfig>) -> Option<DispersionCache> {
    g.cache
        .clone()
        .or_else(|| cfg.and_then(|c| c.compute.as_ref()).and_then(|c| c.cache.clone()))
        .map(DispersionCache::new)
}

/// "LO:HI" lengths with units.
fn parse_pair(s: &str) -> Result<(f64, f64), CliError> {
    let (a, b) = s.split_once(':').ok_or_else(|| CliError::Config(format!("expected LO:HI, got '{s}'")))?;
    let q = |t: &str| t.parse::<Quantity<Length>>().map(|q| q.si()).map_err(|e| CliError::Config(e.to_string()));
    Ok((q(a)?, q(b)?))
}

fn parse_band(s: &str) -> Result<(f64, f64), CliError> {
    if s.contains(':') {
        parse_pair(s)
    } else {
        IdlerBand::Named(s.into()).resolve()
    }
}

fn emit(out: &Output, format: Format, dir: Option<&Path>) -> Result<(), CliError> {
    if let Some(dir) = dir {
        let io = |path: &Path| {
            let path = path.to_path_buf();
            move |source| CliError::Io { path, source }
        };
        fs::create_dir_all(dir).map_err(io(dir))?;
        let p = dir.join(format!("{}.json", out.stem));
        fs::write(&p, &out.json).map_err(io(&p))?;
        for (name, text) in &out.tables {
            let p = dir.join(name);
            fs::write(&p, text).map_err(io(&p))?;
        }
    }
    let text = match format {
        Format::Json => out.json.as_str(),
        Format::Csv => out.tables.first().map_or(out.json.as_str(), |t| t.1.as_str()),
    };
    match std::io::stdout().lock().write_all(text.as_bytes()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(CliError::Io { path: "<stdout>".into(), source: e }),
        _ => Ok(()),
    }
}
