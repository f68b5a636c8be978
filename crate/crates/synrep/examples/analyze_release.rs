//! Analyst-side walkthrough: valid inference from a released replicate file,
//! with no access to the confidential data.
//!
//! ```bash
//! cargo run --example analyze_release
//! ```

use synrep::inference::{combine_synrep_1, combine_synrep_r, EstimandSpec, ReplicateStatistics};
use synrep::io::{read_replicates, write_replicates};
use synrep::rng::child_seed;
use synrep::synthesizer::{synthesize_release, SynthesizerKind, SynthesizerSpec};
use synrep::types::{ExpansionMode, Variant, WeightedSample};
use synrep::wfpbb::run_wfpbb_stage;

fn make_release(variant: Variant, replicates: usize, kind: SynthesizerKind) -> synrep::Result<synrep::ReplicateSet> {
    // Stand-in for the agency: a PPS-style weighted sample wherever the
    // weights correlate with the outcome, so ignoring them would mislead.
    let weights: Vec<f64> = (0..150).map(|i| 30.0 + (i % 25) as f64 * 14.0).collect();
    let rows: Vec<Vec<f64>> = weights.iter().map(|&w| vec![10.0 + w / 5.0]).collect();
    let population_size = weights.iter().sum::<f64>().round() as usize;
    let sample = WeightedSample::from_columns(&weights, &rows, population_size)?;

    let stage = run_wfpbb_stage(
        &sample,
        8,
        ExpansionMode::Truncated,
        child_seed(99, [1, 0, 0]),
        false,
    )?;
    let pseudo_samples: Vec<Vec<Vec<f64>>> =
        stage.into_iter().map(|rep| rep.pseudo_sample).collect();
    synthesize_release(
        &pseudo_samples,
        variant,
        replicates,
        &SynthesizerSpec { kind, column: 0 },
        &sample,
        "y",
        child_seed(99, [2, 0, 0]),
    )
}

fn main() -> synrep::Result<()> {
    let dir = std::env::temp_dir().join("synrep_analyze_release");
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("release.csv");

    // Multi-replicate release: posterior-draw synthesis pairs with the
    // multi-replicate combining rule.
    write_replicates(
        &make_release(Variant::SynRepR, 10, SynthesizerKind::NormalBayes)?,
        &path,
    )?;

    // Everything the analyst needs is in the file: variant, M, R, n, N,
    // column names, and the rows.
    let set = read_replicates(&path)?;
    println!(
        "release: variant = {}, M = {}, R = {}, n = {}, N = {}",
        set.variant(),
        set.groups(),
        set.replicates(),
        set.sample_size(),
        set.population_size()
    );

    let column = set.resolve_column("y")?;
    let stats = ReplicateStatistics::from_replicate_set(&set, &EstimandSpec::mean_of(column))?;
    println!(
        "per-group means: {:?}",
        stats
            .group_means()
            .iter()
            .map(|m| (m * 100.0).round() / 100.0)
            .collect::<Vec<_>>()
    );

    let estimate = combine_synrep_r(&stats, 0.95)?;
    println!(
        "combined: point = {:.3}, variance = {:.4} (raw {:.4}, adjusted = {}), 95% CI [{:.3}, {:.3}] on {} df",
        estimate.point,
        estimate.variance,
        estimate.raw_variance,
        estimate.adjusted,
        estimate.ci_low,
        estimate.ci_high,
        estimate.df
    );

    // Single-replicate release: plug-in synthesis pairs with the
    // single-replicate rule, whose variance formula assumes the synthetic
    // estimate varies around the pseudo-sample estimate by one SRS variance.
    write_replicates(
        &make_release(Variant::SynRep1, 1, SynthesizerKind::NormalPlugin)?,
        &path,
    )?;
    let set = read_replicates(&path)?;
    let stats = ReplicateStatistics::from_replicate_set(&set, &EstimandSpec::mean_of(0))?;
    let estimate = combine_synrep_1(&stats, 0.95)?;
    println!(
        "single-replicate release: point = {:.3}, 95% CI [{:.3}, {:.3}], adjusted = {}",
        estimate.point, estimate.ci_low, estimate.ci_high, estimate.adjusted
    );
    Ok(())
}
