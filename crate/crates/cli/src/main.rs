use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use massqd::experiment::{
    self, aggregate, render_archive, render_phenotype, run_experiment_with, run_sweep, write_summary, ColorMode,
    ExperimentConfig, Manifest, SweepSpec,
};
use massqd::metrics::RunMetrics;
use massqd::phenotype::HeightGrid;
use massqd::qd::ArchiveSnapshot;
use massqd::{Error, Result};

#[derive(Parser)]
#[command(name = "massqd", version, about = "Quality-diversity search over building-mass height grids")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a replicated experiment from a config file.
    Run(RunArgs),
    /// Run a hyperparameter grid search and rank the points.
    Sweep(RunArgs),
    /// Summarize finished experiments given their manifests.
    Aggregate {
        #[arg(required = true)]
        manifests: Vec<PathBuf>,
        /// Directory for summary.csv and the p-value tables.
        #[arg(long)]
        out: PathBuf,
    },
    /// Render an archive JSON as SVG.
    RenderArchive {
        archive: PathBuf,
        #[arg(long, value_enum, default_value_t = Mode::Fitness)]
        mode: Mode,
        #[arg(long)]
        out: PathBuf,
    },
    /// Render a phenotype as SVG, either a grid JSON (nested rows) or one
    /// elite of an archive JSON selected with --bin.
    RenderPhenotype {
        input: PathBuf,
        /// Archive bin as AREA,COUNT.
        #[arg(long, value_parser = parse_bin)]
        bin: Option<(usize, usize)>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Dump every elite's flattened phenotype with encoding tag and fitness.
    ExportPhenotypes {
        /// Archive JSONs or experiment manifests.
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long)]
        out: PathBuf,
    },
    /// Parse and check a config (experiment or sweep) without running it.
    ValidateConfig {
        #[arg(long)]
        config: PathBuf,
        #[arg(long = "override", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Dot-path patch applied before validation, e.g. loop.max_generations=0.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Base seed; replicate r uses seed + r.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    replicates: Option<usize>,
    /// Output directory, replacing the config's output_dir.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Suppress progress on stderr.
    #[arg(long)]
    quiet: bool,
}

impl RunArgs {
    fn all_overrides(&self) -> Vec<String> {
        let mut o = self.overrides.clone();
        if let Some(s) = self.seed {
            o.push(format!("base_seed={s}"));
        }
        if let Some(r) = self.replicates {
            o.push(format!("replicates={r}"));
        }
        o
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Fitness,
    Encoding,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

fn parse_bin(s: &str) -> std::result::Result<(usize, usize), String> {
    let (a, c) = s.split_once(',').ok_or("expected AREA,COUNT")?;
    let parse = |v: &str| v.trim().parse::<usize>().map_err(|e| e.to_string());
    Ok((parse(a)?, parse(c)?))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config() { 1 } else { 2 })
        }
    }
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Run(args) => run(args),
        Command::Sweep(args) => sweep(args),
        Command::Aggregate { manifests, out } => {
            let summary = aggregate(&manifests)?;
            for path in write_summary(&summary, &out)? {
                eprintln!("wrote {}", path.display());
            }
            Ok(())
        }
        Command::RenderArchive { archive, mode, out } => {
            let snapshot = experiment::load_archive(&archive)?;
            let mode = match mode {
                Mode::Fitness => ColorMode::Fitness,
                Mode::Encoding => ColorMode::Encoding,
            };
            write(&out, &render_archive(&snapshot, mode)?)
        }
        Command::RenderPhenotype { input, bin, out } => {
            let grid = match bin {
                Some(bin) => {
                    let snapshot = experiment::load_archive(&input)?;
                    snapshot
                        .elites
                        .into_iter()
                        .find(|e| (e.area_bin, e.count_bin) == bin)
                        .map(|e| e.elite.phenotype)
                        .ok_or_else(|| Error::Parse {
                            location: input.display().to_string(),
                            message: format!("no elite in bin ({}, {})", bin.0, bin.1),
                        })?
                }
                None => {
                    let text = read(&input)?;
                    serde_json::from_str::<HeightGrid>(&text).map_err(|e| Error::Parse {
                        location: format!("{}:{}:{}", input.display(), e.line(), e.column()),
                        message: e.to_string(),
                    })?
                }
            };
            write(&out, &render_phenotype(&grid))
        }
        Command::ExportPhenotypes { inputs, format, out } => export(&inputs, format, &out),
        Command::ValidateConfig { config, overrides } => {
            let text = read(&config)?;
            if is_sweep(&text) {
                let spec = SweepSpec::from_toml_str(&text, &overrides)?;
                eprintln!("ok: sweep `{}` with {} grid points", spec.name, spec.grid_points()?.len());
            } else {
                let c = ExperimentConfig::from_toml_str(&text, &overrides)?;
                eprintln!(
                    "ok: experiment `{}` with {} encoding(s), {} replicate(s)",
                    c.name,
                    c.encodings.len(),
                    c.replicates
                );
            }
            Ok(())
        }
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn is_sweep(text: &str) -> bool {
    text.parse::<toml::Table>().is_ok_and(|t| t.contains_key("grid"))
}

fn progress(quiet: bool) -> impl Fn(usize, &RunMetrics) + Sync {
    move |r, m| {
        if !quiet {
            eprintln!(
                "replicate {r:03} generation {:>6} coverage {:.4} qd {:.3} mean fitness {:.4}",
                m.generation, m.coverage, m.qd_score, m.mean_fitness
            );
        }
    }
}

fn run(args: RunArgs) -> Result<()> {
    let mut config = ExperimentConfig::load(&args.config, &args.all_overrides())?;
    if let Some(out) = &args.out {
        config.output_dir = out.clone();
    }
    let manifest = run_experiment_with(&config, &progress(args.quiet))?;
    if !args.quiet {
        eprintln!(
            "wrote {} replicate(s) to {}",
            manifest.replicates.len(),
            config.output_dir.display()
        );
    }
    Ok(())
}

fn sweep(args: RunArgs) -> Result<()> {
    let mut spec = SweepSpec::load(&args.config, &args.all_overrides())?;
    if let Some(out) = &args.out {
        spec.output_dir = out.clone();
    }
    let report = run_sweep(&spec)?;
    if !args.quiet {
        for p in report.selected() {
            eprintln!(
                "selected point {:03} front {} mean fitness {:.4} diversity {:.4e}",
                p.index, p.front, p.mean_fitness, p.phenotypic_diversity
            );
        }
    }
    Ok(())
}

fn export(inputs: &[PathBuf], format: Format, out: &Path) -> Result<()> {
    let mut archives: Vec<(String, ArchiveSnapshot)> = Vec::new();
    for input in inputs {
        let text = read(input)?;
        if let Ok(manifest) = serde_json::from_str::<Manifest>(&text) {
            let dir = input.parent().unwrap_or(Path::new("."));
            for r in &manifest.replicates {
                let path = dir.join(&r.archive);
                archives.push((path.display().to_string(), experiment::load_archive(&path)?));
            }
        } else {
            let snapshot = ArchiveSnapshot::from_json(&text, &input.display().to_string())?;
            archives.push((input.display().to_string(), snapshot));
        }
    }
    let text = match format {
        Format::Csv => experiment::export_phenotypes_csv(&archives),
        Format::Json => {
            let rows: Vec<serde_json::Value> = archives
                .iter()
                .flat_map(|(source, a)| {
                    a.elites.iter().map(move |e| {
                        serde_json::json!({
                            "source": source,
                            "encoding_tag": e.elite.encoding_tag,
                            "fitness": e.elite.fitness,
                            "phenotype": e.elite.phenotype.levels(),
                        })
                    })
                })
                .collect();
            serde_json::to_string_pretty(&rows).expect("rows serialize") + "\n"
        }
    };
    write(out, &text)
}
