//! Domain types shared by the whole pipeline.
//!
//! Every type validates its invariants at construction; an invalid instance
//! cannot be built through the public surface. All types are immutable after
//! construction and safe to share across threads.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One confidential survey record: a design weight paired with the unit's
/// survey variables.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitRecord {
    weight: f64,
    values: Vec<f64>,
}

impl UnitRecord {
    /// Build a record, requiring a positive finite weight and finite values.
    pub fn new(weight: f64, values: Vec<f64>) -> Result<Self> {
        if !(weight.is_finite() && weight > 0.0) {
            return Err(Error::Invariant(format!(
                "unit weight must be positive and finite, got {weight}"
            )));
        }
        if values.is_empty() {
            return Err(Error::Invariant("unit must carry at least one value".into()));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Invariant(format!("nonfinite value {bad} in unit record")));
        }
        Ok(Self { weight, values })
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// The confidential parent sample: `n` weighted records drawn from a finite
/// population of `N` units.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedSample {
    records: Vec<UnitRecord>,
    population_size: usize,
}

impl WeightedSample {
    /// Validate `n >= 2`, `N > n`, and rectangular value rows.
    pub fn new(records: Vec<UnitRecord>, population_size: usize) -> Result<Self> {
        if records.len() < 2 {
            return Err(Error::Invariant(format!(
                "n >= 2 required, got n = {}",
                records.len()
            )));
        }
        if population_size <= records.len() {
            return Err(Error::Invariant(format!(
                "population size N = {population_size} must exceed sample size n = {}",
                records.len()
            )));
        }
        let width = records[0].values().len();
        if let Some((row, r)) = records
            .iter()
            .enumerate()
            .find(|(_, r)| r.values().len() != width)
        {
            return Err(Error::Invariant(format!(
                "row {} has {} values, expected {width}",
                row + 1,
                r.values().len()
            )));
        }
        Ok(Self {
            records,
            population_size,
        })
    }

    /// Convenience constructor from parallel weight/value slices.
    pub fn from_columns(weights: &[f64], values: &[Vec<f64>], population_size: usize) -> Result<Self> {
        if weights.len() != values.len() {
            return Err(Error::Argument(format!(
                "{} weights but {} value rows",
                weights.len(),
                values.len()
            )));
        }
        let records = weights
            .iter()
            .zip(values.iter())
            .map(|(&w, v)| UnitRecord::new(w, v.clone()))
            .collect::<Result<Vec<_>>>()?;
        Self::new(records, population_size)
    }

    pub fn records(&self) -> &[UnitRecord] {
        &self.records
    }

    /// Sample size `n`.
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Population size `N`.
    pub fn population_size(&self) -> usize {
        self.population_size
    }

    /// Number of survey variables carried per record.
    pub fn width(&self) -> usize {
        self.records[0].values().len()
    }

    pub fn weights(&self) -> impl Iterator<Item = f64> + '_ {
        self.records.iter().map(|r| r.weight())
    }

    pub fn column(&self, index: usize) -> impl Iterator<Item = f64> + '_ {
        self.records.iter().map(move |r| r.values()[index])
    }

    pub fn check_column(&self, index: usize) -> Result<()> {
        if index >= self.width() {
            return Err(Error::Argument(format!(
                "column index {index} out of range for width {}",
                self.width()
            )));
        }
        Ok(())
    }
}

/// A point estimate paired with its estimated variance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointVariance {
    pub estimate: f64,
    pub variance: f64,
}

impl PointVariance {
    pub fn new(estimate: f64, variance: f64) -> Result<Self> {
        if !estimate.is_finite() || !variance.is_finite() || variance < 0.0 {
            return Err(Error::Invariant(format!(
                "point/variance must be finite with variance >= 0, got ({estimate}, {variance})"
            )));
        }
        Ok(Self { estimate, variance })
    }
}

/// How far a Polya expansion runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExpansionMode {
    /// Expand to the full population of `N` rows.
    Full,
    /// Build `n + 50 n` rows; large enough to stand in for the full
    /// population when `N` is very large.
    Truncated,
}

impl ExpansionMode {
    /// Rows added beyond the sample size: the pseudo-population holds
    /// `n + target` rows.
    pub fn target(self, n: usize, population_size: usize) -> usize {
        match self {
            ExpansionMode::Full => population_size - n,
            ExpansionMode::Truncated => 50 * n,
        }
    }
}

/// One completed pseudo-population: the bootstrap-realized sample rows plus
/// the Polya-drawn rows, stored as parent-row multiplicities.
///
/// Rows are never copied; every row of the multiset is, by construction, the
/// value vector of some parent-sample record. Methods that materialize rows
/// take the parent sample the multiplicities refer to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PseudoPopulation {
    /// How many times each parent row appears, aligned with the parent sample.
    counts: Vec<u64>,
    /// Which replicate (1-based m) this population belongs to.
    source_index: usize,
    mode: ExpansionMode,
    size: usize,
}

impl PseudoPopulation {
    pub(crate) fn from_counts(
        counts: Vec<u64>,
        source_index: usize,
        mode: ExpansionMode,
        declared_size: usize,
    ) -> Result<Self> {
        let total: u64 = counts.iter().sum();
        if total as usize != declared_size {
            return Err(Error::Invariant(format!(
                "pseudo-population holds {total} rows but declares size {declared_size}"
            )));
        }
        Ok(Self {
            counts,
            source_index,
            mode,
            size: declared_size,
        })
    }

    /// Same population tagged with a different replicate index.
    pub fn with_source_index(mut self, source_index: usize) -> Self {
        self.source_index = source_index;
        self
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn source_index(&self) -> usize {
        self.source_index
    }

    pub fn mode(&self) -> ExpansionMode {
        self.mode
    }

    /// Total number of rows in the multiset.
    pub fn size(&self) -> usize {
        self.size
    }

    /// Mean of one column over the whole multiset.
    pub fn column_mean(&self, sample: &WeightedSample, column: usize) -> f64 {
        debug_assert_eq!(self.counts.len(), sample.len());
        let mut sum = 0.0;
        for (count, record) in self.counts.iter().zip(sample.records()) {
            sum += *count as f64 * record.values()[column];
        }
        sum / self.size as f64
    }

    /// Per-column mean and variance (population denominator) of the multiset.
    pub fn column_moments(&self, sample: &WeightedSample) -> Vec<(f64, f64)> {
        let width = sample.width();
        (0..width)
            .map(|c| {
                let mean = self.column_mean(sample, c);
                let mut ss = 0.0;
                for (count, record) in self.counts.iter().zip(sample.records()) {
                    let d = record.values()[c] - mean;
                    ss += *count as f64 * d * d;
                }
                (mean, ss / self.size as f64)
            })
            .collect()
    }
}

/// Release strategy for synthetic replicates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Variant {
    /// `R > 1` synthetic replicates per pseudo-sample.
    #[serde(rename = "synrep-r")]
    SynRepR,
    /// Exactly one synthetic replicate per pseudo-sample.
    #[serde(rename = "synrep-1")]
    SynRep1,
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Variant::SynRepR => write!(f, "synrep-r"),
            Variant::SynRep1 => write!(f, "synrep-1"),
        }
    }
}

/// One released synthetic row, tagged with its replicate coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicateRow {
    /// 1-based pseudo-sample index.
    pub m: usize,
    /// 1-based replicate index within the pseudo-sample.
    pub r: usize,
    pub values: Vec<f64>,
}

/// The released synthetic data set: `M x R` replicates of `n` rows each,
/// plus the metadata an analyst needs to combine them.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicateSet {
    variant: Variant,
    groups: usize,
    replicates: usize,
    sample_size: usize,
    population_size: usize,
    columns: Vec<String>,
    rows: Vec<ReplicateRow>,
}

impl ReplicateSet {
    /// Validate the full (m, r) group structure.
    ///
    /// Requires `M >= 2`, `R >= 2` for [`Variant::SynRepR`] and `R = 1` for
    /// [`Variant::SynRep1`], exactly `M * R * n` rows, and exactly `n` rows in
    /// every (m, r) group.
    pub fn new(
        variant: Variant,
        groups: usize,
        replicates: usize,
        sample_size: usize,
        population_size: usize,
        columns: Vec<String>,
        rows: Vec<ReplicateRow>,
    ) -> Result<Self> {
        if groups < 2 {
            return Err(Error::Invariant(format!("M >= 2 required, got M = {groups}")));
        }
        match variant {
            Variant::SynRepR if replicates < 2 => {
                return Err(Error::Invariant(format!(
                    "synrep-r requires R >= 2, got R = {replicates}"
                )));
            }
            Variant::SynRep1 if replicates != 1 => {
                return Err(Error::Invariant(format!(
                    "synrep-1 requires R = 1, got R = {replicates}"
                )));
            }
            _ => {}
        }
        if sample_size < 2 {
            return Err(Error::Invariant(format!(
                "replicates must have n >= 2 rows, got n = {sample_size}"
            )));
        }
        if population_size <= sample_size {
            return Err(Error::Invariant(format!(
                "population size N = {population_size} must exceed n = {sample_size}"
            )));
        }
        let expected = groups * replicates * sample_size;
        if rows.len() != expected {
            return Err(Error::Structure(format!(
                "expected {expected} rows (M = {groups}, R = {replicates}, n = {sample_size}), got {}",
                rows.len()
            )));
        }
        let width = columns.len();
        let mut group_sizes = vec![0usize; groups * replicates];
        for row in &rows {
            if row.m < 1 || row.m > groups {
                return Err(Error::Structure(format!(
                    "row carries m = {} outside 1..={groups}",
                    row.m
                )));
            }
            if row.r < 1 || row.r > replicates {
                if variant == Variant::SynRep1 && row.r > 1 {
                    return Err(Error::Invariant(format!(
                        "synrep-1 set contains a row with r = {}",
                        row.r
                    )));
                }
                return Err(Error::Structure(format!(
                    "row carries r = {} outside 1..={replicates}",
                    row.r
                )));
            }
            if row.values.len() != width {
                return Err(Error::Structure(format!(
                    "row in group (m={}, r={}) has {} values, expected {width}",
                    row.m,
                    row.r,
                    row.values.len()
                )));
            }
            group_sizes[(row.m - 1) * replicates + (row.r - 1)] += 1;
        }
        for m in 1..=groups {
            for r in 1..=replicates {
                let got = group_sizes[(m - 1) * replicates + (r - 1)];
                if got != sample_size {
                    return Err(Error::Structure(format!(
                        "group (m={m}, r={r}) has {got} rows, expected n = {sample_size}"
                    )));
                }
            }
        }
        Ok(Self {
            variant,
            groups,
            replicates,
            sample_size,
            population_size,
            columns,
            rows,
        })
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    /// Number of pseudo-samples `M`.
    pub fn groups(&self) -> usize {
        self.groups
    }

    /// Replicates per pseudo-sample `R`.
    pub fn replicates(&self) -> usize {
        self.replicates
    }

    /// Rows per replicate `n`.
    pub fn sample_size(&self) -> usize {
        self.sample_size
    }

    /// Released population size `N`.
    pub fn population_size(&self) -> usize {
        self.population_size
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn rows(&self) -> &[ReplicateRow] {
        &self.rows
    }

    /// Resolve a column reference (name, or decimal index) to an index.
    pub fn resolve_column(&self, reference: &str) -> Result<usize> {
        if let Some(idx) = self.columns.iter().position(|c| c == reference) {
            return Ok(idx);
        }
        if let Ok(idx) = reference.parse::<usize>() {
            if idx < self.columns.len() {
                return Ok(idx);
            }
        }
        Err(Error::Argument(format!(
            "column '{reference}' not found (columns: {})",
            self.columns.join(", ")
        )))
    }

    /// Values of one column for group (m, r), in row order.
    pub fn group_column(&self, m: usize, r: usize, column: usize) -> Vec<f64> {
        self.rows
            .iter()
            .filter(|row| row.m == m && row.r == r)
            .map(|row| row.values[column])
            .collect()
    }
}

/// A combined inference: point estimate, variance (after any negative-variance
/// adjustment), and a t-interval on `M - 1` degrees of freedom.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CombinedEstimate {
    pub point: f64,
    /// Variance actually used for the interval (positive unless the inputs
    /// are fully degenerate, in which case `zero_width` is set).
    pub variance: f64,
    /// Method-of-moments variance before adjustment; may be nonpositive.
    pub raw_variance: f64,
    /// True exactly when `raw_variance <= 0` and the ad hoc replacement fired.
    pub adjusted: bool,
    /// Degrees of freedom of the interval's t reference (`M - 1`).
    pub df: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub level: f64,
    /// Degenerate case: variance is exactly zero, interval has zero width.
    pub zero_width: bool,
}

impl CombinedEstimate {
    pub(crate) fn validate(&self) -> Result<()> {
        if !self.point.is_finite() {
            return Err(Error::Invariant("combined point estimate is not finite".into()));
        }
        if self.variance < 0.0 || !self.variance.is_finite() {
            return Err(Error::Invariant(format!(
                "combined variance must be nonnegative and finite, got {}",
                self.variance
            )));
        }
        if (self.variance == 0.0) != self.zero_width {
            return Err(Error::Invariant(
                "zero_width must flag exactly the zero-variance case".into(),
            ));
        }
        if self.adjusted != (self.raw_variance <= 0.0) {
            return Err(Error::Invariant(
                "adjusted must flag exactly the nonpositive raw variance case".into(),
            ));
        }
        if self.df <= 0.0 {
            return Err(Error::Invariant(format!("df must be positive, got {}", self.df)));
        }
        if !(0.0 < self.level && self.level < 1.0) {
            return Err(Error::Invariant(format!(
                "level must lie in (0, 1), got {}",
                self.level
            )));
        }
        if self.variance > 0.0 && !(self.ci_low < self.point && self.point < self.ci_high) {
            return Err(Error::Invariant(
                "interval must strictly bracket the point estimate".into(),
            ));
        }
        Ok(())
    }
}
