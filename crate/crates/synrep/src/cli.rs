//! Command definitions and command runners for the `synrep` binary.
//!
//! The binary is a thin shell: `main` parses [`Cli`] and dispatches to the
//! `run_*` functions here, which do all the work through the library and
//! print a one-line summary per completed command. Seeds are required flags
//! on `generate` and `simulate` so every release and study is auditable.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::inference::{
    combine_synrep_1, combine_synrep_r, EstimandSpec, ReplicateStatistics,
};
use crate::io::{
    read_population, read_replicates, read_sample, write_replicates, SampleSchema,
};
use crate::rng::child_seed;
use crate::simulate::{
    emit_report, load_config, render_run_dump, run_experiment_with_detail, ReportFormat,
};
use crate::synthesizer::{synthesize_release, SynthesizerKind, SynthesizerSpec};
use crate::types::{ExpansionMode, Variant};
use crate::wfpbb::run_wfpbb_stage;

#[derive(Debug, Parser)]
#[command(
    name = "synrep",
    version,
    about = "Generate fully synthetic survey microdata, analyze released replicates, and run repeated-sampling studies"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Turn a confidential weighted sample into a released replicate file.
    Generate(GenerateArgs),
    /// Combine a released replicate file into a point estimate and interval.
    Analyze(AnalyzeArgs),
    /// Run a repeated-sampling experiment from a TOML config.
    Simulate(SimulateArgs),
    /// Check that an artifact file is well formed.
    Validate(ValidateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    #[value(name = "synrep-r")]
    SynRepR,
    #[value(name = "synrep-1")]
    SynRep1,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SynthesizerArg {
    #[value(name = "normal-bayes")]
    NormalBayes,
    #[value(name = "normal-plugin")]
    NormalPlugin,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Full,
    Truncated,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Confidential sample CSV (header row; one weight column).
    #[arg(short, long)]
    pub input: PathBuf,
    /// Name of the weight column in the input.
    #[arg(long, default_value = "weight")]
    pub weight_column: String,
    /// Population size N the sample was drawn from.
    #[arg(short = 'N', long)]
    pub population_size: usize,
    /// Release strategy.
    #[arg(long, value_enum)]
    pub variant: VariantArg,
    /// Number of pseudo-samples M.
    #[arg(short = 'M', long)]
    pub groups: usize,
    /// Replicates per pseudo-sample R (must be 1 for synrep-1).
    #[arg(short = 'R', long, default_value_t = 1)]
    pub replicates: usize,
    /// Synthesis model.
    #[arg(long, value_enum, default_value = "normal-bayes")]
    pub synthesizer: SynthesizerArg,
    /// Column to synthesize (name; defaults to the first value column).
    #[arg(long)]
    pub column: Option<String>,
    /// Pseudo-population expansion mode.
    #[arg(long, value_enum, default_value = "truncated")]
    pub mode: ModeArg,
    /// Master seed (required: releases must be reproducible).
    #[arg(long)]
    pub seed: u64,
    /// Output replicate file.
    #[arg(short, long)]
    pub output: PathBuf,
    /// Worker threads (0 = default pool).
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Released replicate file.
    #[arg(short, long)]
    pub input: PathBuf,
    /// Analysis column (name or index; defaults to the first column).
    #[arg(long)]
    pub column: Option<String>,
    /// Confidence level for the interval.
    #[arg(long, default_value_t = 0.95)]
    pub level: f64,
    /// Output JSON record (also echoed to stdout).
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Experiment description (TOML).
    #[arg(short, long)]
    pub config: PathBuf,
    /// Directory for report files.
    #[arg(short, long)]
    pub output_dir: PathBuf,
    /// Override the config's worker thread count.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Also write per-run raw results to runs.csv.
    #[arg(long, default_value_t = false)]
    pub dump_runs: bool,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    /// Artifact file: replicate file, population cache, sample CSV, or
    /// experiment config.
    pub path: PathBuf,
    /// Weight column name when validating a sample CSV.
    #[arg(long, default_value = "weight")]
    pub weight_column: String,
    /// Population size when validating a sample CSV; without it the N > n
    /// check is skipped.
    #[arg(long)]
    pub population_size: Option<usize>,
}

/// The JSON record written by `analyze`.
#[derive(Debug, Serialize)]
pub struct AnalyzeRecord {
    pub variant: Variant,
    #[serde(rename = "M")]
    pub groups: usize,
    #[serde(rename = "R")]
    pub replicates: usize,
    pub point: f64,
    pub raw_variance: f64,
    pub variance: f64,
    pub adjusted: bool,
    pub df: f64,
    pub ci: [f64; 2],
    pub level: f64,
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate(args) => run_generate(&args),
        Command::Analyze(args) => run_analyze(&args),
        Command::Simulate(args) => run_simulate(&args),
        Command::Validate(args) => run_validate(&args),
    }
}

pub fn run_generate(args: &GenerateArgs) -> Result<()> {
    let (variant, replicates) = match (args.variant, args.replicates) {
        (VariantArg::SynRepR, r) if r >= 2 => (Variant::SynRepR, r),
        (VariantArg::SynRepR, r) => {
            return Err(Error::Argument(format!(
                "--variant synrep-r requires -R >= 2, got {r}"
            )));
        }
        (VariantArg::SynRep1, 1) => (Variant::SynRep1, 1),
        (VariantArg::SynRep1, r) => {
            return Err(Error::Argument(format!(
                "--variant synrep-1 requires R = 1, got {r}"
            )));
        }
    };
    if args.groups < 2 {
        return Err(Error::Argument(format!(
            "-M must be at least 2, got {}",
            args.groups
        )));
    }

    let schema = SampleSchema::new(args.population_size)
        .with_weight_column(&args.weight_column);
    let loaded = read_sample(&args.input, &schema)?;
    let column_index = match &args.column {
        Some(name) => loaded
            .columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| {
                Error::Argument(format!(
                    "column '{name}' not found (columns: {})",
                    loaded.columns.join(", ")
                ))
            })?,
        None => 0,
    };
    let column_name = loaded.columns[column_index].clone();
    let kind = match args.synthesizer {
        SynthesizerArg::NormalBayes => SynthesizerKind::NormalBayes,
        SynthesizerArg::NormalPlugin => SynthesizerKind::NormalPlugin,
    };
    let mode = match args.mode {
        ModeArg::Full => ExpansionMode::Full,
        ModeArg::Truncated => ExpansionMode::Truncated,
    };

    let stage_seed = child_seed(args.seed, [1, 0, 0]);
    let synth_seed = child_seed(args.seed, [2, 0, 0]);
    let build = || -> Result<crate::types::ReplicateSet> {
        let stage = run_wfpbb_stage(&loaded.sample, args.groups, mode, stage_seed, false)?;
        let pseudo_samples: Vec<Vec<Vec<f64>>> =
            stage.into_iter().map(|rep| rep.pseudo_sample).collect();
        synthesize_release(
            &pseudo_samples,
            variant,
            replicates,
            &SynthesizerSpec {
                kind,
                column: column_index,
            },
            &loaded.sample,
            &column_name,
            synth_seed,
        )
    };
    let set = if args.threads > 0 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(args.threads)
            .build()
            .map_err(|e| Error::Config(format!("cannot build worker pool: {e}")))?;
        pool.install(build)?
    } else {
        build()?
    };

    write_replicates(&set, &args.output)?;
    println!(
        "wrote {}: variant={} M={} R={} n={} N={} column={} synthesizer={} seed={}",
        args.output.display(),
        set.variant(),
        set.groups(),
        set.replicates(),
        set.sample_size(),
        set.population_size(),
        column_name,
        kind,
        args.seed,
    );
    Ok(())
}

pub fn run_analyze(args: &AnalyzeArgs) -> Result<()> {
    let set = read_replicates(&args.input)?;
    let column = match &args.column {
        Some(reference) => set.resolve_column(reference)?,
        None => 0,
    };
    let stats = ReplicateStatistics::from_replicate_set(&set, &EstimandSpec::mean_of(column))?;
    let estimate = match set.variant() {
        Variant::SynRepR => combine_synrep_r(&stats, args.level)?,
        Variant::SynRep1 => combine_synrep_1(&stats, args.level)?,
    };
    if estimate.adjusted {
        eprintln!(
            "warning: variance estimate was nonpositive ({}); the ad hoc replacement was used",
            estimate.raw_variance
        );
    }
    if estimate.zero_width {
        eprintln!("warning: variance is exactly zero; the interval has zero width");
    }
    let record = AnalyzeRecord {
        variant: set.variant(),
        groups: set.groups(),
        replicates: set.replicates(),
        point: estimate.point,
        raw_variance: estimate.raw_variance,
        variance: estimate.variance,
        adjusted: estimate.adjusted,
        df: estimate.df,
        ci: [estimate.ci_low, estimate.ci_high],
        level: estimate.level,
    };
    let json = serde_json::to_string_pretty(&record)?;
    println!("{json}");
    if let Some(path) = &args.output {
        std::fs::write(path, format!("{json}\n"))?;
    }
    Ok(())
}

pub fn run_simulate(args: &SimulateArgs) -> Result<()> {
    let mut config = load_config(&args.config)?;
    if let Some(threads) = args.threads {
        config.threads = threads;
    }
    let started = std::time::Instant::now();
    let (report, detail) = run_experiment_with_detail(&config)?;
    let elapsed = started.elapsed();

    std::fs::create_dir_all(&args.output_dir)?;
    let json_path = args.output_dir.join("report.json");
    let csv_path = args.output_dir.join("report.csv");
    let md_path = args.output_dir.join("report.md");
    emit_report(&report, &json_path, ReportFormat::Json)?;
    emit_report(&report, &csv_path, ReportFormat::Csv)?;
    emit_report(&report, &md_path, ReportFormat::Markdown)?;
    if args.dump_runs {
        std::fs::write(args.output_dir.join("runs.csv"), render_run_dump(&detail))?;
    }

    println!(
        "completed {}/{} runs in {:.1}s; reports in {}",
        report.completed_runs,
        report.runs,
        elapsed.as_secs_f64(),
        args.output_dir.display(),
    );
    for row in &report.rows {
        println!(
            "  {:<11} {:<7} bias {:+.3}% cov {:.3} ratio {:.3} negvar {:.1}% ({:.1} ms/run)",
            row.method.to_string(),
            row.setting_label(),
            row.percent_bias,
            row.coverage,
            row.variance_ratio,
            100.0 * row.negative_variance_rate,
            row.mean_runtime_ms,
        );
    }
    Ok(())
}

fn sniff_kind(path: &Path) -> Result<String> {
    if path.extension().and_then(|e| e.to_str()) == Some("toml") {
        return Ok("config".into());
    }
    let content = std::fs::read_to_string(path)?;
    if let Some(first) = content.lines().next() {
        if let Some(meta) = first.strip_prefix('#') {
            let value: serde_json::Value = serde_json::from_str(meta)
                .map_err(|e| Error::Structure(format!("bad metadata header: {e}")))?;
            if let Some(kind) = value.get("kind").and_then(|k| k.as_str()) {
                return Ok(kind.to_string());
            }
            return Err(Error::Structure(
                "metadata header carries no 'kind' field".into(),
            ));
        }
    }
    Ok("sample".into())
}

pub fn run_validate(args: &ValidateArgs) -> Result<()> {
    let kind = sniff_kind(&args.path)?;
    match kind.as_str() {
        "replicates" => {
            let set = read_replicates(&args.path)?;
            println!(
                "valid replicates: variant={} M={} R={} n={} N={} columns={}",
                set.variant(),
                set.groups(),
                set.replicates(),
                set.sample_size(),
                set.population_size(),
                set.columns().join(",")
            );
        }
        "population" => {
            let pop = read_population(&args.path)?;
            println!(
                "valid population: N={} true_mean={:.6}",
                pop.len(),
                pop.true_mean()
            );
        }
        "config" => {
            let config = load_config(&args.path)?;
            println!(
                "valid config: design={:?} S={} n={} N={} settings={}",
                config.design,
                config.runs,
                config.sample_size,
                config.population.size,
                config
                    .settings
                    .iter()
                    .map(|s| s.to_string())
                    .collect::<Vec<_>>()
                    .join(",")
            );
        }
        "sample" => {
            // Without N we validate everything except the N > n relation.
            let rows = std::fs::read_to_string(&args.path)?
                .lines()
                .skip(1)
                .filter(|l| !l.trim().is_empty())
                .count();
            let population_size = match args.population_size {
                Some(n) => n,
                None => rows + 1,
            };
            let schema = SampleSchema::new(population_size)
                .with_weight_column(&args.weight_column);
            let loaded = read_sample(&args.path, &schema)?;
            if args.population_size.is_some() {
                println!(
                    "valid sample: n={} N={} columns={}",
                    loaded.sample.len(),
                    loaded.sample.population_size(),
                    loaded.columns.join(",")
                );
            } else {
                println!(
                    "valid sample: n={} columns={} (population size not checked; pass --population-size)",
                    loaded.sample.len(),
                    loaded.columns.join(",")
                );
            }
        }
        other => {
            return Err(Error::Structure(format!("unknown artifact kind '{other}'")));
        }
    }
    Ok(())
}
