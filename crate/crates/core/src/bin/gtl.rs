use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use gtl_core::data::{load_hapt, load_mnist, subsample, write_idx};
use gtl_core::experiment::{
    report_tables, run_experiment, sweep, ExperimentConfig, ExperimentReport, SweepAxis, SweepSpec,
    PRESETS,
};
use gtl_core::{Error, Result};

#[derive(Parser)]
#[command(
    name = "gtl",
    version,
    about = "Distributed learning simulator: GTL and noHTL model exchange with exact traffic accounting"
)]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = "GTL_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Source {
    /// Experiment config file (TOML).
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Built-in scenario instead of a config file.
    #[arg(long)]
    preset: Option<String>,
    /// Base seed; run i uses seed + i.
    #[arg(long)]
    seed: Option<u64>,
    /// Number of holdout repetitions.
    #[arg(long)]
    runs: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Source {
    fn resolve(&self) -> Result<ExperimentConfig> {
        let config = self.load()?;
        config.validate()?;
        Ok(config)
    }

    /// The config with flag overrides applied, not yet validated.
    fn load(&self) -> Result<ExperimentConfig> {
        let mut config = match (&self.config, &self.preset) {
            (Some(path), _) => {
                let mut c = ExperimentConfig::load(path)?;
                c.dataset.apply_env();
                c
            }
            (None, Some(name)) => ExperimentConfig::preset(name)?,
            (None, None) => {
                return Err(Error::Config(format!(
                    "pass --config FILE or --preset NAME ({})",
                    PRESETS.join(", ")
                )))
            }
        };
        if let Some(seed) = self.seed {
            config.base_seed = seed;
        }
        if let Some(runs) = self.runs {
            config.runs = runs;
        }
        if let Some(out) = &self.out {
            config.output = out.clone();
        }
        Ok(config)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum DatasetArg {
    Mnist,
    Hapt,
}

#[derive(Subcommand)]
enum Command {
    /// Check a configuration without running it.
    Validate(Source),
    /// Run an experiment and write its report.
    Run(Source),
    /// Run one sub-experiment per value of a parameter.
    Sweep {
        #[command(flatten)]
        source: Source,
        /// num_aggregators, malicious_fraction, corruption_probability,
        /// locations or alpha (default: the config's sweep section).
        #[arg(long)]
        axis: Option<String>,
        /// Comma-separated axis values.
        #[arg(long, value_delimiter = ',')]
        values: Option<Vec<f64>>,
    },
    /// Re-render the tables of a finished run.
    Report {
        /// Directory holding report.json.
        #[arg(long)]
        out: PathBuf,
    },
    /// Convert a local copy of a dataset into the layout the loaders use.
    /// Nothing is downloaded.
    FetchData {
        #[arg(value_enum)]
        dataset: DatasetArg,
        /// Directory with the original files.
        #[arg(long)]
        from: PathBuf,
        /// Destination directory (MNIST only).
        #[arg(long)]
        to: Option<PathBuf>,
        /// Keep this many images, chosen at random (MNIST only).
        #[arg(long)]
        limit: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn print_files(files: &[PathBuf]) {
    for f in files {
        println!("wrote {}", f.display());
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Validate(source) => {
            let c = source.resolve()?;
            println!("{}: ok", c.name);
            print!("{}", c.to_toml()?);
        }
        Command::Run(source) => {
            let c = source.resolve()?;
            let report = run_experiment(&c)?;
            let files = report.write(&c.output)?;
            print!("{}", report_tables(&report).markdown());
            print_files(&files);
        }
        Command::Sweep {
            source,
            axis,
            values,
        } => {
            let mut c = source.load()?;
            let file = c.sweep.take();
            let axis = match axis {
                Some(a) => Some(a.parse::<SweepAxis>()?),
                None => file.as_ref().map(|s| s.axis),
            };
            let values = values.or_else(|| file.filter(|s| Some(s.axis) == axis).map(|s| s.values));
            let (Some(axis), Some(values)) = (axis, values) else {
                return Err(Error::Config(
                    "sweep needs --axis and --values or a [sweep] section".into(),
                ));
            };
            c.sweep = Some(SweepSpec {
                axis,
                values: values.clone(),
            });
            c.validate()?;
            let report = sweep(&c, axis, &values)?;
            let files = report.write(&c.output)?;
            print!("{}", report.steps_csv());
            print_files(&files);
        }
        Command::Report { out } => {
            let report = ExperimentReport::load(&out.join("report.json")).map_err(|e| match e {
                Error::Json(j) => {
                    Error::Config(format!("{}: {j}", out.join("report.json").display()))
                }
                e => e,
            })?;
            let tables = report_tables(&report);
            print!("{}", tables.markdown());
            print_files(&tables.write(&out)?);
        }
        Command::FetchData {
            dataset,
            from,
            to,
            limit,
            seed,
        } => match dataset {
            DatasetArg::Mnist => convert_mnist(&from, to.as_deref(), limit, seed)?,
            DatasetArg::Hapt => {
                let tagged = load_hapt(&from)?;
                let users: std::collections::BTreeSet<usize> =
                    tagged.iter().map(|(u, _)| *u).collect();
                println!(
                    "{}: {} samples from {} users; set GTL_HAPT_DIR={} to use it",
                    from.display(),
                    tagged.len(),
                    users.len(),
                    from.display()
                );
            }
        },
    }
    Ok(())
}

/// Rewrites (optionally subsampled) MNIST as gzip-compressed IDX files.
fn convert_mnist(from: &Path, to: Option<&Path>, limit: Option<usize>, seed: u64) -> Result<()> {
    let to = to.ok_or_else(|| Error::Config("fetch-data mnist needs --to".into()))?;
    let samples = load_mnist(from)?;
    let samples = match limit {
        Some(n) => subsample(&samples, n, seed),
        None => samples,
    };
    let images: Vec<Vec<u8>> = samples
        .iter()
        .map(|s| {
            s.features
                .iter()
                .map(|&v| (v * 255.0).round() as u8)
                .collect()
        })
        .collect();
    let digits: Vec<u8> = samples.iter().map(|s| (s.label - 1) as u8).collect();
    std::fs::create_dir_all(to).map_err(|e| Error::Io {
        path: to.to_path_buf(),
        source: e,
    })?;
    write_idx(to, "train", &images, &digits, true)?;
    println!("wrote {} images to {}", images.len(), to.display());
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: cannot start {n} threads: {e}");
            return ExitCode::from(1);
        }
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config() { 2 } else { 1 })
        }
    }
}
