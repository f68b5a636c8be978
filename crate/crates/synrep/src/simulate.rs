//! Repeated-sampling evaluation harness.
//!
//! One experiment fixes a finite population, draws `S` independent parent
//! samples under the configured design, runs every configured method on each
//! sample, and scores the results against the realized population mean:
//! percent bias, interval coverage, the ratio of mean estimated variance to
//! the empirical variance of the point estimates, and the rate of
//! negative-variance events.
//!
//! Runs execute on a bounded worker pool. Every random stage is keyed by
//! (master seed, run index, stage, unit), and aggregation walks runs in index
//! order with compensated sums, so reports are bit-identical across thread
//! counts and repeat invocations. Timing is kept in memory only and never
//! serialized, for the same reason.

use std::fmt;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::design::{
    draw_pps, draw_srs, estimate_direct, estimate_ht, estimate_srssyn, generate_population,
    FinitePopulation, SizeSource, SyntheticPopulationSpec,
};
use crate::error::{Error, Result};
use crate::inference::{
    combine_pseudo_pop, combine_pseudo_srs, combine_synrep_1, combine_synrep_r, estimand_on_srs,
    interval, EstimandSpec, ReplicateStatistics,
};
use crate::io::{read_population, read_size_file};
use crate::moments::{CompensatedSum, RunningMoments};
use crate::rng::{child_seed, substream, unit_tag};
use crate::synthesizer::{fit, generate, SynthesizerKind, SynthesizerSpec};
use crate::types::{ExpansionMode, PointVariance, WeightedSample};
use crate::wfpbb::run_wfpbb_stage;

const STAGE_POPULATION: u64 = 0;
const STAGE_SAMPLE: u64 = 1;
const STAGE_SRSSYN: u64 = 2;
const STAGE_WFPBB: u64 = 3;
const STAGE_SYNTH: u64 = 4;

/// Sampling design for the parent samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Design {
    Pps,
    Srs,
}

/// Procedures the harness can score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "pseudo-pop")]
    PseudoPop,
    #[serde(rename = "pseudo-srs")]
    PseudoSrs,
    #[serde(rename = "synrep-r")]
    SynRepR,
    #[serde(rename = "synrep-1")]
    SynRep1,
    #[serde(rename = "direct")]
    Direct,
    #[serde(rename = "ht")]
    Ht,
    #[serde(rename = "srs-syn")]
    SrsSyn,
}

impl Method {
    pub const ALL: [Method; 7] = [
        Method::PseudoPop,
        Method::PseudoSrs,
        Method::SynRepR,
        Method::SynRep1,
        Method::Direct,
        Method::Ht,
        Method::SrsSyn,
    ];

    /// Methods that run on the WFPBB stage and therefore vary by (M, R).
    pub fn uses_stage(self) -> bool {
        matches!(
            self,
            Method::PseudoPop | Method::PseudoSrs | Method::SynRepR | Method::SynRep1
        )
    }

    /// Methods whose variance estimate can go negative.
    pub fn can_go_negative(self) -> bool {
        matches!(self, Method::PseudoSrs | Method::SynRepR | Method::SynRep1)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Method::PseudoPop => "pseudo-pop",
            Method::PseudoSrs => "pseudo-srs",
            Method::SynRepR => "synrep-r",
            Method::SynRep1 => "synrep-1",
            Method::Direct => "direct",
            Method::Ht => "ht",
            Method::SrsSyn => "srs-syn",
        };
        write!(f, "{name}")
    }
}

/// One (M, R) configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Setting {
    /// Number of pseudo-samples M.
    pub m: usize,
    /// Replicates per pseudo-sample R.
    pub r: usize,
}

impl fmt::Display for Setting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "M{}R{}", self.m, self.r)
    }
}

fn default_level() -> f64 {
    0.95
}

fn default_mode() -> ExpansionMode {
    ExpansionMode::Truncated
}

fn default_synthesizer() -> SynthesizerKind {
    SynthesizerKind::NormalBayes
}

fn default_methods() -> Vec<Method> {
    Method::ALL.to_vec()
}

fn default_size_mean() -> f64 {
    102.0
}

fn default_size_cv() -> f64 {
    0.95
}

fn default_intercept() -> f64 {
    20.0
}

fn default_slope() -> f64 {
    0.2
}

fn default_noise_sd() -> f64 {
    100.0
}

/// Population section of an experiment config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PopulationConfig {
    /// Population size N.
    pub size: usize,
    #[serde(default = "default_intercept")]
    pub intercept: f64,
    #[serde(default = "default_slope")]
    pub slope: f64,
    #[serde(default = "default_noise_sd")]
    pub noise_sd: f64,
    /// Mean of the generated size variable.
    #[serde(default = "default_size_mean")]
    pub size_mean: f64,
    /// Coefficient of variation of the generated size variable.
    #[serde(default = "default_size_cv")]
    pub size_cv: f64,
    /// Resample sizes from this single-column CSV instead of generating them.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub size_file: Option<PathBuf>,
    /// Load a previously realized population instead of generating one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cache: Option<PathBuf>,
}

impl PopulationConfig {
    pub fn with_defaults(size: usize) -> Self {
        Self {
            size,
            intercept: default_intercept(),
            slope: default_slope(),
            noise_sd: default_noise_sd(),
            size_mean: default_size_mean(),
            size_cv: default_size_cv(),
            size_file: None,
            cache: None,
        }
    }
}

/// Full experiment description; parses from a TOML file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub design: Design,
    /// Master seed; every random stage derives from it.
    pub seed: u64,
    /// Number of independent parent samples S.
    pub runs: usize,
    /// Parent (and replicate) sample size n.
    pub sample_size: usize,
    pub population: PopulationConfig,
    /// (M, R) settings to evaluate.
    pub settings: Vec<Setting>,
    #[serde(default = "default_methods")]
    pub methods: Vec<Method>,
    #[serde(default = "default_level")]
    pub level: f64,
    #[serde(default = "default_mode")]
    pub mode: ExpansionMode,
    #[serde(default = "default_synthesizer")]
    pub synthesizer: SynthesizerKind,
    /// Worker threads; 0 uses the default pool.
    #[serde(default)]
    pub threads: usize,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.runs < 2 {
            return Err(Error::Config(format!("runs must be >= 2, got {}", self.runs)));
        }
        if self.sample_size < 2 || self.sample_size >= self.population.size {
            return Err(Error::Config(format!(
                "sample_size must satisfy 2 <= n < N, got n = {}, N = {}",
                self.sample_size, self.population.size
            )));
        }
        if !(0.0 < self.level && self.level < 1.0) {
            return Err(Error::Config(format!(
                "level must lie in (0, 1), got {}",
                self.level
            )));
        }
        if self.settings.is_empty() {
            return Err(Error::Config("at least one (M, R) setting required".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::Config("at least one method required".into()));
        }
        for setting in &self.settings {
            if setting.m < 2 {
                return Err(Error::Config(format!("setting {setting}: M >= 2 required")));
            }
            if setting.r < 1 {
                return Err(Error::Config(format!("setting {setting}: R >= 1 required")));
            }
            if self.methods.contains(&Method::SynRepR) && setting.r < 2 {
                return Err(Error::Config(format!(
                    "setting {setting}: the multi-replicate method needs R >= 2"
                )));
            }
        }
        Ok(())
    }
}

/// Parse an experiment config from TOML text.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let config: ExperimentConfig =
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    config.validate()?;
    Ok(config)
}

/// Load an experiment config from a TOML file.
pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)?;
    parse_config(&text)
}

/// Metrics for one method at one setting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub method: Method,
    /// Absent for methods that only see the parent sample.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub setting: Option<Setting>,
    pub percent_bias: f64,
    pub bias_mc_se: f64,
    pub coverage: f64,
    pub coverage_mc_se: f64,
    pub variance_ratio: f64,
    pub negative_variance_rate: f64,
    pub mean_point: f64,
    pub mean_variance: f64,
    pub empirical_variance: f64,
    /// Mean per-run compute time; in-memory only so emitted reports stay
    /// byte-identical across runs and thread counts.
    #[serde(skip)]
    pub mean_runtime_ms: f64,
}

impl MetricsRow {
    pub fn setting_label(&self) -> String {
        self.setting.map(|s| s.to_string()).unwrap_or_else(|| "-".into())
    }
}

/// Result of one experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub design: Design,
    pub seed: u64,
    pub runs: usize,
    pub completed_runs: usize,
    pub sample_size: usize,
    pub population_size: usize,
    pub level: f64,
    pub mode: ExpansionMode,
    pub synthesizer: SynthesizerKind,
    pub true_mean: f64,
    pub rows: Vec<MetricsRow>,
    /// Messages for runs that failed (kept when at most 1% fail).
    pub failures: Vec<String>,
}

impl SimulationReport {
    /// Zero the in-memory-only fields; used when comparing a report against
    /// its serialized round trip.
    pub fn strip_runtime(&mut self) {
        for row in &mut self.rows {
            row.mean_runtime_ms = 0.0;
        }
    }

    pub fn row(&self, method: Method, setting: Option<Setting>) -> Option<&MetricsRow> {
        self.rows
            .iter()
            .find(|r| r.method == method && r.setting == setting)
    }
}

#[derive(Debug, Clone, Copy)]
struct Slot {
    method: Method,
    setting: Option<usize>,
}

fn slots(config: &ExperimentConfig) -> Vec<Slot> {
    let mut slots = Vec::new();
    for &method in &config.methods {
        if !method.uses_stage() {
            slots.push(Slot {
                method,
                setting: None,
            });
        }
    }
    for setting_index in 0..config.settings.len() {
        for &method in &config.methods {
            if method.uses_stage() {
                slots.push(Slot {
                    method,
                    setting: Some(setting_index),
                });
            }
        }
    }
    slots
}

#[derive(Debug, Clone)]
struct Outcome {
    point: f64,
    variance: f64,
    raw_variance: f64,
    adjusted: bool,
    covered: bool,
    elapsed_ms: f64,
}

fn outcome_from_point_variance(
    pv: PointVariance,
    df: f64,
    level: f64,
    truth: f64,
    elapsed_ms: f64,
) -> Outcome {
    let (lo, hi) = interval(pv.estimate, pv.variance, df, level);
    Outcome {
        point: pv.estimate,
        variance: pv.variance,
        raw_variance: pv.variance,
        adjusted: false,
        covered: lo <= truth && truth <= hi,
        elapsed_ms,
    }
}

fn run_one(
    run_index: usize,
    config: &ExperimentConfig,
    population: &FinitePopulation,
    truth: f64,
    slot_list: &[Slot],
) -> Result<Vec<Option<Outcome>>> {
    let run_tag = run_index as u64 + 1;
    let n = config.sample_size;
    let level = config.level;
    let estimand = EstimandSpec::mean_of(0);

    let mut sample_rng = substream(config.seed, [run_tag, STAGE_SAMPLE, 0]);
    let parent: WeightedSample = match config.design {
        Design::Pps => draw_pps(population, n, &mut sample_rng)?.0,
        Design::Srs => draw_srs(population, n, &mut sample_rng)?,
    };
    let sample_df = (n - 1) as f64;

    let mut outcomes: Vec<Option<Outcome>> = vec![None; slot_list.len()];

    for (idx, slot) in slot_list.iter().enumerate() {
        match slot.method {
            Method::Direct => {
                let start = Instant::now();
                let pv = estimate_direct(&parent, 0)?;
                outcomes[idx] = Some(outcome_from_point_variance(
                    pv,
                    sample_df,
                    level,
                    truth,
                    start.elapsed().as_secs_f64() * 1e3,
                ));
            }
            Method::Ht => {
                let start = Instant::now();
                let pv = estimate_ht(&parent, 0)?;
                outcomes[idx] = Some(outcome_from_point_variance(
                    pv,
                    sample_df,
                    level,
                    truth,
                    start.elapsed().as_secs_f64() * 1e3,
                ));
            }
            Method::SrsSyn => {
                let start = Instant::now();
                let mut rng = substream(config.seed, [run_tag, STAGE_SRSSYN, 0]);
                let pv = estimate_srssyn(&parent, 0, &mut rng)?;
                outcomes[idx] = Some(outcome_from_point_variance(
                    pv,
                    sample_df,
                    level,
                    truth,
                    start.elapsed().as_secs_f64() * 1e3,
                ));
            }
            _ => {}
        }
    }

    for (setting_index, setting) in config.settings.iter().enumerate() {
        let stage_slots: Vec<usize> = slot_list
            .iter()
            .enumerate()
            .filter(|(_, s)| s.setting == Some(setting_index))
            .map(|(i, _)| i)
            .collect();
        if stage_slots.is_empty() {
            continue;
        }

        let stage_start = Instant::now();
        let stage_seed = child_seed(config.seed, [run_tag, STAGE_WFPBB, setting_index as u64]);
        let stage = run_wfpbb_stage(&parent, setting.m, config.mode, stage_seed, false)?;
        let stage_share =
            stage_start.elapsed().as_secs_f64() * 1e3 / stage_slots.len() as f64;

        let wants_synthesis = stage_slots.iter().any(|&i| {
            matches!(slot_list[i].method, Method::SynRepR | Method::SynRep1)
        });
        let mut synth_points: Vec<Vec<f64>> = Vec::new();
        let mut synth_variances: Vec<Vec<f64>> = Vec::new();
        let mut synth_ms = 0.0;
        if wants_synthesis {
            let start = Instant::now();
            let synth_seed =
                child_seed(config.seed, [run_tag, STAGE_SYNTH, setting_index as u64]);
            let synth_spec = SynthesizerSpec {
                kind: config.synthesizer,
                column: 0,
            };
            let r_count = if stage_slots
                .iter()
                .any(|&i| slot_list[i].method == Method::SynRepR)
            {
                setting.r.max(2)
            } else {
                1
            };
            for (m_index, replicate) in stage.iter().enumerate() {
                let model = fit(&synth_spec, &replicate.pseudo_sample)?;
                let mut q_row = Vec::with_capacity(r_count);
                let mut v_row = Vec::with_capacity(r_count);
                for r in 1..=r_count {
                    let mut rng =
                        substream(synth_seed, [unit_tag(0, m_index + 1, r), 0, 0]);
                    let synthetic = generate(&model, n, &mut rng);
                    let pv =
                        estimand_on_srs(&synthetic, &estimand, config.population.size)?;
                    q_row.push(pv.estimate);
                    v_row.push(pv.variance);
                }
                synth_points.push(q_row);
                synth_variances.push(v_row);
            }
            synth_ms = start.elapsed().as_secs_f64() * 1e3;
        }
        let synth_consumers = stage_slots
            .iter()
            .filter(|&&i| matches!(slot_list[i].method, Method::SynRepR | Method::SynRep1))
            .count()
            .max(1);

        for &slot_index in &stage_slots {
            let start = Instant::now();
            let estimate = match slot_list[slot_index].method {
                Method::PseudoPop => {
                    let means: Vec<f64> = stage
                        .iter()
                        .map(|rep| rep.summary.column_means[0])
                        .collect();
                    combine_pseudo_pop(&means, level)?
                }
                Method::PseudoSrs => {
                    let estimates = stage
                        .iter()
                        .map(|rep| {
                            estimand_on_srs(&rep.pseudo_sample, &estimand, config.population.size)
                        })
                        .collect::<Result<Vec<_>>>()?;
                    combine_pseudo_srs(&estimates, level)?
                }
                Method::SynRepR => {
                    let stats = ReplicateStatistics::new(
                        synth_points.clone(),
                        synth_variances.clone(),
                    )?;
                    combine_synrep_r(&stats, level)?
                }
                Method::SynRep1 => {
                    let stats = ReplicateStatistics::new(
                        synth_points.iter().map(|q| vec![q[0]]).collect(),
                        synth_variances.iter().map(|v| vec![v[0]]).collect(),
                    )?;
                    combine_synrep_1(&stats, level)?
                }
                _ => unreachable!("stage slots only hold stage methods"),
            };
            let mut elapsed = start.elapsed().as_secs_f64() * 1e3 + stage_share;
            if matches!(slot_list[slot_index].method, Method::SynRepR | Method::SynRep1) {
                elapsed += synth_ms / synth_consumers as f64;
            }
            outcomes[slot_index] = Some(Outcome {
                point: estimate.point,
                variance: estimate.variance,
                raw_variance: estimate.raw_variance,
                adjusted: estimate.adjusted,
                covered: estimate.ci_low <= truth && truth <= estimate.ci_high,
                elapsed_ms: elapsed,
            });
        }
    }

    Ok(outcomes)
}

fn realize_population(config: &ExperimentConfig) -> Result<FinitePopulation> {
    if let Some(cache) = &config.population.cache {
        return read_population(cache);
    }
    let size_source = match &config.population.size_file {
        Some(path) => SizeSource::Resample(read_size_file(path)?),
        None => SizeSource::Lognormal {
            mean: config.population.size_mean,
            cv: config.population.size_cv,
        },
    };
    let spec = SyntheticPopulationSpec {
        population_size: config.population.size,
        size_source,
        intercept: config.population.intercept,
        slope: config.population.slope,
        noise_sd: config.population.noise_sd,
    };
    generate_population(&spec, child_seed(config.seed, [0, STAGE_POPULATION, 0]))
}

fn aggregate(
    config: &ExperimentConfig,
    truth: f64,
    slot_list: &[Slot],
    records: Vec<(usize, Result<Vec<Option<Outcome>>>)>,
) -> Result<SimulationReport> {
    let mut failures = Vec::new();
    let mut completed = Vec::new();
    for (run_index, record) in records {
        match record {
            Ok(outcomes) => completed.push(outcomes),
            Err(e) => failures.push(format!("run {run_index}: {e}")),
        }
    }
    let failure_share = failures.len() as f64 / config.runs as f64;
    if failure_share > 0.01 {
        return Err(Error::SimulationAborted(format!(
            "{} of {} runs failed ({:.1}%); first failures: {}",
            failures.len(),
            config.runs,
            100.0 * failure_share,
            failures
                .iter()
                .take(3)
                .cloned()
                .collect::<Vec<_>>()
                .join(" | ")
        )));
    }

    let mut rows = Vec::with_capacity(slot_list.len());
    for (slot_index, slot) in slot_list.iter().enumerate() {
        let mut points = RunningMoments::new();
        let mut variance_sum = CompensatedSum::new();
        let mut runtime_sum = CompensatedSum::new();
        let mut covered = 0u64;
        let mut negative = 0u64;
        for outcomes in &completed {
            let outcome = outcomes[slot_index]
                .as_ref()
                .expect("every slot is filled on a successful run");
            points.push(outcome.point);
            variance_sum.add(outcome.variance);
            runtime_sum.add(outcome.elapsed_ms);
            if outcome.covered {
                covered += 1;
            }
            if outcome.adjusted {
                negative += 1;
            }
        }
        let s = points.count() as f64;
        let coverage = covered as f64 / s;
        let mean_variance = variance_sum.value() / s;
        let empirical_variance = points.sample_variance();
        rows.push(MetricsRow {
            method: slot.method,
            setting: slot.setting.map(|i| config.settings[i]),
            percent_bias: 100.0 * (points.mean() - truth) / truth,
            bias_mc_se: 100.0 * (empirical_variance / s).sqrt() / truth.abs(),
            coverage,
            coverage_mc_se: (coverage * (1.0 - coverage) / s).sqrt(),
            variance_ratio: mean_variance / empirical_variance,
            negative_variance_rate: negative as f64 / s,
            mean_point: points.mean(),
            mean_variance,
            empirical_variance,
            mean_runtime_ms: runtime_sum.value() / s,
        });
    }

    Ok(SimulationReport {
        design: config.design,
        seed: config.seed,
        runs: config.runs,
        completed_runs: completed.len(),
        sample_size: config.sample_size,
        population_size: config.population.size,
        level: config.level,
        mode: config.mode,
        synthesizer: config.synthesizer,
        true_mean: truth,
        rows,
        failures,
    })
}

/// One method's result on one run, for external plotting.
#[derive(Debug, Clone, PartialEq)]
pub struct RunDetail {
    pub run: usize,
    pub method: Method,
    pub setting: Option<Setting>,
    pub point: f64,
    pub variance: f64,
    pub raw_variance: f64,
    pub adjusted: bool,
    pub covered: bool,
}

/// Run the full experiment described by `config`.
///
/// Deterministic given the seed: thread count and scheduling cannot change
/// any reported number.
pub fn run_experiment(config: &ExperimentConfig) -> Result<SimulationReport> {
    run_experiment_with_detail(config).map(|(report, _)| report)
}

/// As [`run_experiment`], additionally returning the per-run raw results.
pub fn run_experiment_with_detail(
    config: &ExperimentConfig,
) -> Result<(SimulationReport, Vec<RunDetail>)> {
    config.validate()?;
    let population = realize_population(config)?;
    let truth = population.true_mean();
    let slot_list = slots(config);

    let execute = || -> Vec<(usize, Result<Vec<Option<Outcome>>>)> {
        (0..config.runs)
            .into_par_iter()
            .map(|run_index| {
                (
                    run_index,
                    run_one(run_index, config, &population, truth, &slot_list),
                )
            })
            .collect()
    };
    let records = if config.threads > 0 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.threads)
            .build()
            .map_err(|e| Error::Config(format!("cannot build worker pool: {e}")))?;
        pool.install(execute)
    } else {
        execute()
    };

    let mut detail = Vec::new();
    for (run_index, record) in &records {
        if let Ok(outcomes) = record {
            for (slot_index, outcome) in outcomes.iter().enumerate() {
                let outcome = outcome.as_ref().expect("successful runs fill every slot");
                detail.push(RunDetail {
                    run: *run_index,
                    method: slot_list[slot_index].method,
                    setting: slot_list[slot_index].setting.map(|i| config.settings[i]),
                    point: outcome.point,
                    variance: outcome.variance,
                    raw_variance: outcome.raw_variance,
                    adjusted: outcome.adjusted,
                    covered: outcome.covered,
                });
            }
        }
    }

    let report = aggregate(config, truth, &slot_list, records)?;
    Ok((report, detail))
}

/// Render the per-run raw results as CSV.
pub fn render_run_dump(detail: &[RunDetail]) -> String {
    let mut out = String::from(
        "run,method,setting_m,setting_r,point,variance,raw_variance,adjusted,covered\n",
    );
    for d in detail {
        let (m, r) = d
            .setting
            .map(|s| (s.m.to_string(), s.r.to_string()))
            .unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            d.run, d.method, m, r, d.point, d.variance, d.raw_variance, d.adjusted, d.covered
        ));
    }
    out
}

/// Negative-variance rates (as percentages) for the methods whose variance
/// estimate can go negative, one row per setting and method.
pub fn negative_variance_table(report: &SimulationReport) -> Vec<(String, String, f64)> {
    report
        .rows
        .iter()
        .filter(|row| row.method.can_go_negative() && row.setting.is_some())
        .map(|row| {
            (
                row.setting_label(),
                row.method.to_string(),
                100.0 * row.negative_variance_rate,
            )
        })
        .collect()
}

/// Output format for [`emit_report`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
    Markdown,
}

/// Fixed CSV column set for report files.
pub const REPORT_CSV_COLUMNS: [&str; 12] = [
    "method",
    "setting_m",
    "setting_r",
    "percent_bias",
    "bias_mc_se",
    "coverage",
    "coverage_mc_se",
    "variance_ratio",
    "negative_variance_rate",
    "mean_point",
    "mean_variance",
    "empirical_variance",
];

/// Render the report in the requested format.
pub fn render_report(report: &SimulationReport, format: ReportFormat) -> Result<String> {
    match format {
        ReportFormat::Json => Ok(format!("{}\n", serde_json::to_string_pretty(report)?)),
        ReportFormat::Csv => {
            let mut out = String::new();
            out.push_str(&REPORT_CSV_COLUMNS.join(","));
            out.push('\n');
            for row in &report.rows {
                let (m, r) = row
                    .setting
                    .map(|s| (s.m.to_string(), s.r.to_string()))
                    .unwrap_or_default();
                out.push_str(&format!(
                    "{},{},{},{},{},{},{},{},{},{},{},{}\n",
                    row.method,
                    m,
                    r,
                    row.percent_bias,
                    row.bias_mc_se,
                    row.coverage,
                    row.coverage_mc_se,
                    row.variance_ratio,
                    row.negative_variance_rate,
                    row.mean_point,
                    row.mean_variance,
                    row.empirical_variance
                ));
            }
            Ok(out)
        }
        ReportFormat::Markdown => {
            let mut out = String::new();
            out.push_str(&format!(
                "# Repeated-sampling report\n\n\
                 design: {:?} | N = {} | n = {} | S = {} (completed {}) | level = {} | \
                 mode = {:?} | synthesizer = {} | seed = {} | true mean = {:.6}\n\n",
                report.design,
                report.population_size,
                report.sample_size,
                report.runs,
                report.completed_runs,
                report.level,
                report.mode,
                report.synthesizer,
                report.seed,
                report.true_mean,
            ));
            out.push_str(
                "| method | setting | %bias | bias SE | coverage | cov SE | var ratio | neg var % |\n",
            );
            out.push_str(
                "|--------|---------|-------|---------|----------|--------|-----------|-----------|\n",
            );
            for row in &report.rows {
                out.push_str(&format!(
                    "| {} | {} | {:.3} | {:.3} | {:.3} | {:.3} | {:.3} | {:.1} |\n",
                    row.method,
                    row.setting_label(),
                    row.percent_bias,
                    row.bias_mc_se,
                    row.coverage,
                    row.coverage_mc_se,
                    row.variance_ratio,
                    100.0 * row.negative_variance_rate,
                ));
            }
            if !report.failures.is_empty() {
                out.push_str(&format!("\n{} failed runs:\n", report.failures.len()));
                for f in &report.failures {
                    out.push_str(&format!("- {f}\n"));
                }
            }
            Ok(out)
        }
    }
}

/// Write the report to `path` in the requested format.
pub fn emit_report(report: &SimulationReport, path: &Path, format: ReportFormat) -> Result<()> {
    let rendered = render_report(report, format)?;
    std::fs::write(path, rendered)?;
    Ok(())
}
