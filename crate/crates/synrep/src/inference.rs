//! Combining rules and interval construction for released replicates.
//!
//! Analysts treat each released replicate as a simple random sample of size
//! `n` from the population, compute a point estimate and its SRS variance per
//! replicate, and pool them. Pooling differs by release strategy:
//!
//! * multi-replicate sets (R > 1 per pseudo-sample): variance estimate
//!   `T_r = (1 + 1/M) b - v_bar - w_bar / R`;
//! * single-replicate sets (R = 1): `T_m = (1 + 1/M) b - 2 v_bar`.
//!
//! Both can go nonpositive for small `M`; the ad hoc replacements
//! `T*_r = (1 + 2/M) v_bar + w_bar / (M R)` and `T*_m = (1 + 3/M) v_bar`
//! restore a usable variance and are flagged on the result. Intervals are
//! `point +/- t_{1-alpha/2, M-1} * sqrt(variance)`.
//!
//! The reference procedures for pseudo-populations and pseudo-samples used by
//! the simulation harness live here too.

use crate::error::{Error, Result};
use crate::moments::{compensated_sum, RunningMoments};
use crate::student_t::t_quantile;
use crate::types::{CombinedEstimate, PointVariance, ReplicateSet};

/// Which population quantity is being estimated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimandKind {
    PopulationMean,
}

/// An estimand bound to one analysis column.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EstimandSpec {
    pub kind: EstimandKind,
    pub column: usize,
}

impl EstimandSpec {
    pub fn mean_of(column: usize) -> Self {
        Self {
            kind: EstimandKind::PopulationMean,
            column,
        }
    }
}

/// Point estimate and SRS variance of the estimand, treating `data` as a
/// simple random sample of `n` rows from a population of `N`.
///
/// For the population mean this is the column mean with finite-population-
/// corrected variance `(1 - n/N) s^2 / n`.
pub fn estimand_on_srs(data: &[Vec<f64>], spec: &EstimandSpec, population_size: usize) -> Result<PointVariance> {
    let n = data.len();
    if n < 2 {
        return Err(Error::Argument(format!("estimand needs n >= 2 rows, got {n}")));
    }
    if data.iter().any(|row| spec.column >= row.len()) {
        return Err(Error::Argument(format!(
            "column index {} out of range",
            spec.column
        )));
    }
    match spec.kind {
        EstimandKind::PopulationMean => {
            let moments = RunningMoments::from_iter(data.iter().map(|row| row[spec.column]));
            let fpc = 1.0 - n as f64 / population_size as f64;
            PointVariance::new(moments.mean(), fpc * moments.sample_variance() / n as f64)
        }
    }
}

/// Per-replicate estimates together with every derived quantity the
/// combining rules need.
///
/// Built once from the `M x R` grid of per-replicate `(q, v)` pairs; the
/// same builder serves both release strategies (with R = 1 the within-group
/// variances are identically zero and unused).
#[derive(Debug, Clone)]
pub struct ReplicateStatistics {
    groups: usize,
    replicates: usize,
    points: Vec<Vec<f64>>,
    variances: Vec<Vec<f64>>,
    group_means: Vec<f64>,
    grand_mean: f64,
    between_variance: f64,
    within_variances: Vec<f64>,
    mean_within_variance: f64,
    mean_sampling_variance: f64,
}

impl ReplicateStatistics {
    /// Build from an `M x R` grid: `points[m][r]` and `variances[m][r]`.
    pub fn new(points: Vec<Vec<f64>>, variances: Vec<Vec<f64>>) -> Result<Self> {
        let groups = points.len();
        if groups < 2 {
            return Err(Error::Argument(format!("M >= 2 required, got M = {groups}")));
        }
        if variances.len() != groups {
            return Err(Error::Structure(format!(
                "{groups} point groups but {} variance groups",
                variances.len()
            )));
        }
        let replicates = points[0].len();
        if replicates == 0 {
            return Err(Error::Argument("R >= 1 required".into()));
        }
        for (m, (q, v)) in points.iter().zip(variances.iter()).enumerate() {
            if q.len() != replicates || v.len() != replicates {
                return Err(Error::Structure(format!(
                    "group m = {} has ragged replicate counts ({} points, {} variances, expected {replicates})",
                    m + 1,
                    q.len(),
                    v.len()
                )));
            }
            if let Some(bad) = q.iter().find(|x| !x.is_finite()) {
                return Err(Error::Invariant(format!("nonfinite point estimate {bad}")));
            }
            if let Some(bad) = v.iter().find(|x| !x.is_finite() || **x < 0.0) {
                return Err(Error::Invariant(format!("invalid variance estimate {bad}")));
            }
        }

        let group_means: Vec<f64> = points
            .iter()
            .map(|q| compensated_sum(q.iter().copied()) / replicates as f64)
            .collect();
        let grand_mean = compensated_sum(group_means.iter().copied()) / groups as f64;
        let between_variance = compensated_sum(
            group_means
                .iter()
                .map(|&gm| (gm - grand_mean) * (gm - grand_mean)),
        ) / (groups - 1) as f64;
        let within_variances: Vec<f64> = if replicates > 1 {
            points
                .iter()
                .zip(group_means.iter())
                .map(|(q, &gm)| {
                    compensated_sum(q.iter().map(|&x| (x - gm) * (x - gm)))
                        / (replicates - 1) as f64
                })
                .collect()
        } else {
            vec![0.0; groups]
        };
        let mean_within_variance =
            compensated_sum(within_variances.iter().copied()) / groups as f64;
        let mean_sampling_variance = compensated_sum(
            variances.iter().flat_map(|v| v.iter().copied()),
        ) / (groups * replicates) as f64;

        Ok(Self {
            groups,
            replicates,
            points,
            variances,
            group_means,
            grand_mean,
            between_variance,
            within_variances,
            mean_within_variance,
            mean_sampling_variance,
        })
    }

    /// Compute per-replicate estimates from a released set and build the
    /// statistics in one step.
    pub fn from_replicate_set(set: &ReplicateSet, spec: &EstimandSpec) -> Result<Self> {
        let mut points = Vec::with_capacity(set.groups());
        let mut variances = Vec::with_capacity(set.groups());
        for m in 1..=set.groups() {
            let mut q_row = Vec::with_capacity(set.replicates());
            let mut v_row = Vec::with_capacity(set.replicates());
            for r in 1..=set.replicates() {
                let column: Vec<Vec<f64>> = set
                    .group_column(m, r, spec.column)
                    .into_iter()
                    .map(|y| vec![y])
                    .collect();
                let pv = estimand_on_srs(
                    &column,
                    &EstimandSpec::mean_of(0),
                    set.population_size(),
                )?;
                q_row.push(pv.estimate);
                v_row.push(pv.variance);
            }
            points.push(q_row);
            variances.push(v_row);
        }
        Self::new(points, variances)
    }

    pub fn groups(&self) -> usize {
        self.groups
    }

    pub fn replicates(&self) -> usize {
        self.replicates
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn sampling_variances(&self) -> &[Vec<f64>] {
        &self.variances
    }

    /// Per-group replicate means.
    pub fn group_means(&self) -> &[f64] {
        &self.group_means
    }

    /// Grand mean of all `M * R` point estimates.
    pub fn grand_mean(&self) -> f64 {
        self.grand_mean
    }

    /// Between-group variance of the group means.
    pub fn between_variance(&self) -> f64 {
        self.between_variance
    }

    /// Per-group within-group variances of the replicate estimates
    /// (zero when R = 1).
    pub fn within_variances(&self) -> &[f64] {
        &self.within_variances
    }

    /// Mean of the within-group variances.
    pub fn mean_within_variance(&self) -> f64 {
        self.mean_within_variance
    }

    /// Mean of the per-replicate sampling variances.
    pub fn mean_sampling_variance(&self) -> f64 {
        self.mean_sampling_variance
    }
}

/// Two-sided `level` interval: `point +/- t_{1-alpha/2, df} * sqrt(variance)`.
pub fn interval(point: f64, variance: f64, df: f64, level: f64) -> (f64, f64) {
    debug_assert!(variance >= 0.0);
    let alpha = 1.0 - level;
    let quantile = t_quantile(1.0 - alpha / 2.0, df);
    let half = quantile * variance.sqrt();
    (point - half, point + half)
}

fn build_estimate(
    point: f64,
    raw_variance: f64,
    fallback_variance: f64,
    df: f64,
    level: f64,
) -> Result<CombinedEstimate> {
    if !(0.0 < level && level < 1.0) {
        return Err(Error::Argument(format!("level must lie in (0, 1), got {level}")));
    }
    let adjusted = raw_variance <= 0.0;
    let variance = if adjusted { fallback_variance } else { raw_variance };
    let (ci_low, ci_high) = interval(point, variance, df, level);
    let estimate = CombinedEstimate {
        point,
        variance,
        raw_variance,
        adjusted,
        df,
        ci_low,
        ci_high,
        level,
        zero_width: variance == 0.0,
    };
    estimate.validate()?;
    Ok(estimate)
}

/// Combine a multi-replicate release (R >= 2 per pseudo-sample).
pub fn combine_synrep_r(stats: &ReplicateStatistics, level: f64) -> Result<CombinedEstimate> {
    if stats.replicates() < 2 {
        return Err(Error::Argument(format!(
            "multi-replicate combining requires R >= 2, got R = {}",
            stats.replicates()
        )));
    }
    let m = stats.groups() as f64;
    let r = stats.replicates() as f64;
    let b = stats.between_variance();
    let v_bar = stats.mean_sampling_variance();
    let w_bar = stats.mean_within_variance();
    let t_r = (1.0 + 1.0 / m) * b - v_bar - w_bar / r;
    let t_star = (1.0 + 2.0 / m) * v_bar + w_bar / (m * r);
    build_estimate(stats.grand_mean(), t_r, t_star, m - 1.0, level)
}

/// Combine a single-replicate release (R = 1 per pseudo-sample).
pub fn combine_synrep_1(stats: &ReplicateStatistics, level: f64) -> Result<CombinedEstimate> {
    if stats.replicates() != 1 {
        return Err(Error::Argument(format!(
            "single-replicate combining requires R = 1, got R = {}",
            stats.replicates()
        )));
    }
    let m = stats.groups() as f64;
    let b = stats.between_variance();
    let v_bar = stats.mean_sampling_variance();
    let t_m = (1.0 + 1.0 / m) * b - 2.0 * v_bar;
    let t_star = (1.0 + 3.0 / m) * v_bar;
    build_estimate(stats.grand_mean(), t_m, t_star, m - 1.0, level)
}

/// Reference procedure when the pseudo-populations themselves are available:
/// mean of the per-population estimands with variance `(1 + 1/M) B`.
///
/// `B` is nonnegative by construction, so no adjustment can fire; identical
/// inputs yield a zero-width interval flagged on the result.
pub fn combine_pseudo_pop(population_means: &[f64], level: f64) -> Result<CombinedEstimate> {
    if population_means.len() < 2 {
        return Err(Error::Argument(format!(
            "M >= 2 required, got M = {}",
            population_means.len()
        )));
    }
    let m = population_means.len() as f64;
    let moments = RunningMoments::from_iter(population_means.iter().copied());
    let variance = (1.0 + 1.0 / m) * moments.sample_variance();
    // A zero between-variance is valid here, so bypass the adjusted path by
    // treating the raw variance as final.
    let (ci_low, ci_high) = interval(moments.mean(), variance, m - 1.0, level);
    let estimate = CombinedEstimate {
        point: moments.mean(),
        variance,
        raw_variance: variance,
        adjusted: false,
        df: m - 1.0,
        ci_low,
        ci_high,
        level,
        zero_width: variance == 0.0,
    };
    if variance > 0.0 {
        estimate.validate()?;
    }
    Ok(estimate)
}

/// Reference procedure when the pseudo-samples are available: pooled mean
/// with variance `(1 + 1/M) b - v_bar`, adjusted to `(1 + 2/M) v_bar` when
/// nonpositive.
pub fn combine_pseudo_srs(estimates: &[PointVariance], level: f64) -> Result<CombinedEstimate> {
    if estimates.len() < 2 {
        return Err(Error::Argument(format!(
            "M >= 2 required, got M = {}",
            estimates.len()
        )));
    }
    let m = estimates.len() as f64;
    let moments = RunningMoments::from_iter(estimates.iter().map(|e| e.estimate));
    let v_bar = compensated_sum(estimates.iter().map(|e| e.variance)) / m;
    let raw = (1.0 + 1.0 / m) * moments.sample_variance() - v_bar;
    let fallback = (1.0 + 2.0 / m) * v_bar;
    build_estimate(moments.mean(), raw, fallback, m - 1.0, level)
}
