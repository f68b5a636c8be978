//! File formats: sample CSV ingestion, replicate-file round trips, the
//! population cache, and size files.
//!
//! A replicate file is one self-describing delimited table. Its first line is
//! a `#`-prefixed JSON header carrying the release metadata (variant, M, R,
//! n, N, column names); the rest is a plain CSV with columns `m, r,
//! <variables>`. Reals are written in scientific notation with 17 fractional
//! digits, which round-trips every f64 exactly. The population cache uses the
//! same layout with an `x, y` body.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::design::FinitePopulation;
use crate::error::{Error, Result};
use crate::types::{ReplicateRow, ReplicateSet, UnitRecord, Variant, WeightedSample};

/// How to interpret a sample CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSchema {
    /// Name of the weight column.
    pub weight_column: String,
    /// Population size `N` (not derivable from the file).
    pub population_size: usize,
    /// Survey-variable columns to load; `None` loads every non-weight column.
    pub value_columns: Option<Vec<String>>,
}

impl SampleSchema {
    pub fn new(population_size: usize) -> Self {
        Self {
            weight_column: "weight".into(),
            population_size,
            value_columns: None,
        }
    }

    pub fn with_weight_column(mut self, name: &str) -> Self {
        self.weight_column = name.into();
        self
    }
}

/// A parsed sample plus the value-column names it was read with.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedSample {
    pub sample: WeightedSample,
    pub columns: Vec<String>,
}

/// Read a weighted sample from a headed CSV file.
///
/// Row order is preserved. Errors name the offending row (1-based, excluding
/// the header).
pub fn read_sample(path: &Path, schema: &SampleSchema) -> Result<LoadedSample> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::Schema(format!("cannot open {}: {e}", path.display())))?;
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| Error::Schema(format!("missing header row: {e}")))?
        .iter()
        .map(str::to_string)
        .collect();
    let weight_idx = headers
        .iter()
        .position(|h| h == &schema.weight_column)
        .ok_or_else(|| {
            Error::Schema(format!(
                "weight column '{}' not found (columns: {})",
                schema.weight_column,
                headers.join(", ")
            ))
        })?;
    let value_indices: Vec<usize> = match &schema.value_columns {
        Some(wanted) => wanted
            .iter()
            .map(|name| {
                headers
                    .iter()
                    .position(|h| h == name)
                    .ok_or_else(|| Error::Schema(format!("value column '{name}' not found")))
            })
            .collect::<Result<Vec<_>>>()?,
        None => (0..headers.len()).filter(|&i| i != weight_idx).collect(),
    };
    if value_indices.is_empty() {
        return Err(Error::Schema(
            "sample file needs at least one value column besides the weight".into(),
        ));
    }

    let mut records = Vec::new();
    for (row_number, record) in reader.records().enumerate() {
        let row = row_number + 1;
        let record =
            record.map_err(|e| Error::Parse(format!("row {row}: {e}")))?;
        let parse = |idx: usize| -> Result<f64> {
            let field = record.get(idx).ok_or_else(|| {
                Error::Schema(format!("row {row}: missing field '{}'", headers[idx]))
            })?;
            field.parse::<f64>().map_err(|_| {
                Error::Parse(format!(
                    "row {row}: '{field}' in column '{}' is not a number",
                    headers[idx]
                ))
            })
        };
        let weight = parse(weight_idx)?;
        if !(weight.is_finite() && weight > 0.0) {
            return Err(Error::Schema(format!(
                "row {row}: weight must be positive, got {weight}"
            )));
        }
        let values = value_indices
            .iter()
            .map(|&i| parse(i))
            .collect::<Result<Vec<f64>>>()?;
        records.push(UnitRecord::new(weight, values).map_err(|e| {
            Error::Schema(format!("row {row}: {e}"))
        })?);
    }

    let sample = WeightedSample::new(records, schema.population_size)?;
    let columns = value_indices
        .iter()
        .map(|&i| headers[i].clone())
        .collect();
    Ok(LoadedSample { sample, columns })
}

/// Write a weighted sample as a headed CSV (weight column first).
pub fn write_sample(
    sample: &WeightedSample,
    columns: &[String],
    weight_column: &str,
    path: &Path,
) -> Result<()> {
    if columns.len() != sample.width() {
        return Err(Error::Argument(format!(
            "{} column names for width {}",
            columns.len(),
            sample.width()
        )));
    }
    let mut out = String::new();
    out.push_str(weight_column);
    for c in columns {
        out.push(',');
        out.push_str(c);
    }
    out.push('\n');
    for rec in sample.records() {
        out.push_str(&format_real(rec.weight()));
        for v in rec.values() {
            out.push(',');
            out.push_str(&format_real(*v));
        }
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

/// Scientific notation with 17 fractional digits: parses back to the exact
/// same f64.
pub fn format_real(x: f64) -> String {
    format!("{x:.17e}")
}

#[derive(Debug, Serialize, Deserialize)]
struct ReplicateMeta {
    kind: String,
    variant: Variant,
    #[serde(rename = "M")]
    groups: usize,
    #[serde(rename = "R")]
    replicates: usize,
    #[serde(rename = "n")]
    sample_size: usize,
    #[serde(rename = "N")]
    population_size: usize,
    columns: Vec<String>,
}

/// Write a replicate set as a single self-describing file.
pub fn write_replicates(set: &ReplicateSet, path: &Path) -> Result<()> {
    let meta = ReplicateMeta {
        kind: "replicates".into(),
        variant: set.variant(),
        groups: set.groups(),
        replicates: set.replicates(),
        sample_size: set.sample_size(),
        population_size: set.population_size(),
        columns: set.columns().to_vec(),
    };
    let mut out = String::new();
    out.push('#');
    out.push_str(&serde_json::to_string(&meta)?);
    out.push('\n');
    out.push_str("m,r");
    for c in set.columns() {
        out.push(',');
        out.push_str(c);
    }
    out.push('\n');
    for row in set.rows() {
        out.push_str(&row.m.to_string());
        out.push(',');
        out.push_str(&row.r.to_string());
        for v in &row.values {
            out.push(',');
            out.push_str(&format_real(*v));
        }
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

fn split_meta_line<'a>(content: &'a str, path: &Path) -> Result<(&'a str, &'a str)> {
    let mut lines = content.splitn(2, '\n');
    let first = lines.next().unwrap_or("");
    let rest = lines.next().unwrap_or("");
    let meta = first.strip_prefix('#').ok_or_else(|| {
        Error::Structure(format!(
            "{} does not start with a '#' metadata line",
            path.display()
        ))
    })?;
    Ok((meta, rest))
}

/// Read a replicate file written by [`write_replicates`], re-validating the
/// full group structure.
pub fn read_replicates(path: &Path) -> Result<ReplicateSet> {
    let content = fs::read_to_string(path)?;
    let (meta_text, body) = split_meta_line(&content, path)?;
    let meta: ReplicateMeta = serde_json::from_str(meta_text)
        .map_err(|e| Error::Structure(format!("bad metadata header: {e}")))?;
    if meta.kind != "replicates" {
        return Err(Error::Structure(format!(
            "expected a replicates file, found kind '{}'",
            meta.kind
        )));
    }

    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(body.as_bytes());
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| Error::Structure(format!("missing column header: {e}")))?
        .iter()
        .map(str::to_string)
        .collect();
    if headers.len() != meta.columns.len() + 2 || headers[0] != "m" || headers[1] != "r" {
        return Err(Error::Structure(format!(
            "replicate columns must be m, r, {}; found {}",
            meta.columns.join(", "),
            headers.join(", ")
        )));
    }

    let mut rows = Vec::new();
    for (row_number, record) in reader.records().enumerate() {
        let row = row_number + 1;
        let record = record.map_err(|e| Error::Parse(format!("row {row}: {e}")))?;
        if record.len() != headers.len() {
            return Err(Error::Structure(format!(
                "row {row}: {} fields, expected {}",
                record.len(),
                headers.len()
            )));
        }
        let m: usize = record[0]
            .parse()
            .map_err(|_| Error::Parse(format!("row {row}: bad m index '{}'", &record[0])))?;
        let r: usize = record[1]
            .parse()
            .map_err(|_| Error::Parse(format!("row {row}: bad r index '{}'", &record[1])))?;
        let values = (2..record.len())
            .map(|i| {
                record[i].parse::<f64>().map_err(|_| {
                    Error::Parse(format!("row {row}: '{}' is not a number", &record[i]))
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(ReplicateRow { m, r, values });
    }

    ReplicateSet::new(
        meta.variant,
        meta.groups,
        meta.replicates,
        meta.sample_size,
        meta.population_size,
        meta.columns,
        rows,
    )
}

#[derive(Debug, Serialize, Deserialize)]
struct PopulationMeta {
    kind: String,
    #[serde(rename = "N")]
    population_size: usize,
    true_mean: f64,
}

/// Cache a realized population as `x, y` rows under a metadata header.
pub fn write_population(pop: &FinitePopulation, path: &Path) -> Result<()> {
    let meta = PopulationMeta {
        kind: "population".into(),
        population_size: pop.len(),
        true_mean: pop.true_mean(),
    };
    let mut out = String::new();
    out.push('#');
    out.push_str(&serde_json::to_string(&meta)?);
    out.push_str("\nx,y\n");
    for (x, y) in pop.sizes().iter().zip(pop.values()) {
        out.push_str(&format_real(*x));
        out.push(',');
        out.push_str(&format_real(*y));
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

/// Read a cached population, verifying the recorded mean against the rows.
pub fn read_population(path: &Path) -> Result<FinitePopulation> {
    let content = fs::read_to_string(path)?;
    let (meta_text, body) = split_meta_line(&content, path)?;
    let meta: PopulationMeta = serde_json::from_str(meta_text)
        .map_err(|e| Error::Structure(format!("bad metadata header: {e}")))?;
    if meta.kind != "population" {
        return Err(Error::Structure(format!(
            "expected a population cache, found kind '{}'",
            meta.kind
        )));
    }
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(body.as_bytes());
    let mut sizes = Vec::new();
    let mut values = Vec::new();
    for (row_number, record) in reader.records().enumerate() {
        let row = row_number + 1;
        let record = record.map_err(|e| Error::Parse(format!("row {row}: {e}")))?;
        let x: f64 = record[0]
            .parse()
            .map_err(|_| Error::Parse(format!("row {row}: bad size '{}'", &record[0])))?;
        let y: f64 = record[1]
            .parse()
            .map_err(|_| Error::Parse(format!("row {row}: bad value '{}'", &record[1])))?;
        sizes.push(x);
        values.push(y);
    }
    if sizes.len() != meta.population_size {
        return Err(Error::Structure(format!(
            "cache declares N = {} but holds {} rows",
            meta.population_size,
            sizes.len()
        )));
    }
    let pop = FinitePopulation::new(sizes, values)?;
    let recomputed = pop.true_mean();
    if (recomputed - meta.true_mean).abs() > 1e-9 * meta.true_mean.abs().max(1.0) {
        return Err(Error::Structure(format!(
            "cache declares true mean {} but rows give {recomputed}",
            meta.true_mean
        )));
    }
    Ok(pop)
}

/// Dump a pseudo-population's parent-row multiplicity table as JSON, for
/// debugging the expansion.
///
/// The table indexes confidential parent rows, so it belongs on the
/// agency side only: it must never accompany a release.
pub fn write_pseudo_population_dump(
    pop: &crate::types::PseudoPopulation,
    path: &Path,
) -> Result<()> {
    let json = serde_json::to_string_pretty(pop)?;
    fs::write(path, format!("{json}\n"))?;
    Ok(())
}

/// Read a single-column CSV of positive sizes; the header row is optional.
pub fn read_size_file(path: &Path) -> Result<Vec<f64>> {
    let content = fs::read_to_string(path)?;
    let mut sizes = Vec::new();
    for (i, line) in content.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        match trimmed.parse::<f64>() {
            Ok(x) => {
                if !(x.is_finite() && x > 0.0) {
                    return Err(Error::Schema(format!(
                        "line {}: sizes must be positive, got {x}",
                        i + 1
                    )));
                }
                sizes.push(x);
            }
            Err(_) if i == 0 => continue, // header
            Err(_) => {
                return Err(Error::Parse(format!(
                    "line {}: '{trimmed}' is not a number",
                    i + 1
                )));
            }
        }
    }
    if sizes.is_empty() {
        return Err(Error::Schema("size file holds no values".into()));
    }
    Ok(sizes)
}
