//! Agency-side walkthrough: turn a confidential weighted sample into a
//! releasable synthetic replicate file.
//!
//! ```bash
//! cargo run --example generate_release
//! ```

use synrep::io::{write_replicates, write_sample, SampleSchema};
use synrep::rng::{child_seed, substream};
use synrep::synthesizer::{synthesize_release, SynthesizerKind, SynthesizerSpec};
use synrep::types::{ExpansionMode, UnitRecord, Variant, WeightedSample};
use synrep::wfpbb::run_wfpbb_stage;

use rand::Rng;

fn main() -> synrep::Result<()> {
    let dir = std::env::temp_dir().join("synrep_generate_release");
    std::fs::create_dir_all(&dir)?;

    // A small confidential sample: 120 households with design weights
    // between 40 and 260 (so N is about 18,000) and one survey variable.
    let mut rng = substream(2_024, [0, 0, 0]);
    let records: Vec<UnitRecord> = (0..120)
        .map(|_| {
            let weight = 40.0 + 220.0 * rng.random::<f64>();
            let income = 30.0 + weight / 8.0 + 12.0 * rng.random::<f64>();
            UnitRecord::new(weight, vec![income]).unwrap()
        })
        .collect();
    let population_size = records.iter().map(|r| r.weight()).sum::<f64>().round() as usize;
    let sample = WeightedSample::new(records, population_size)?;
    println!(
        "confidential sample: n = {}, N = {}, weighted mean = {:.3}",
        sample.len(),
        sample.population_size(),
        sample
            .records()
            .iter()
            .map(|r| r.weight() * r.values()[0])
            .sum::<f64>()
            / sample.weights().sum::<f64>()
    );

    // The file an agency would actually hold.
    let sample_path = dir.join("confidential.csv");
    write_sample(&sample, &["income".into()], "weight", &sample_path)?;

    // Releases must be reproducible: one master seed drives everything.
    let master_seed = 20_240_814;
    let stage_seed = child_seed(master_seed, [1, 0, 0]);
    let synth_seed = child_seed(master_seed, [2, 0, 0]);

    // Stage: M independent bootstrap + expansion + simple-random-sample
    // repetitions, then R synthetic replicates per repetition.
    let groups = 5;
    let replicates = 10;
    let stage = run_wfpbb_stage(&sample, groups, ExpansionMode::Truncated, stage_seed, false)?;
    let pseudo_samples: Vec<Vec<Vec<f64>>> =
        stage.into_iter().map(|rep| rep.pseudo_sample).collect();
    let release = synthesize_release(
        &pseudo_samples,
        Variant::SynRepR,
        replicates,
        &SynthesizerSpec {
            kind: SynthesizerKind::NormalBayes,
            column: 0,
        },
        &sample,
        "income",
        synth_seed,
    )?;

    let release_path = dir.join("release.csv");
    write_replicates(&release, &release_path)?;
    println!(
        "released {} rows ({} groups x {} replicates x n = {}) to {}",
        release.rows().len(),
        release.groups(),
        release.replicates(),
        release.sample_size(),
        release_path.display()
    );

    // The release carries only synthetic values.
    let confidential: Vec<f64> = sample.column(0).collect();
    let collisions = release
        .rows()
        .iter()
        .filter(|row| confidential.contains(&row.values[0]))
        .count();
    println!("rows identical to a confidential value: {collisions}");

    // The same file can be reproduced from the sample and the seed alone;
    // the reader side is shown in the analyze_release example.
    let schema = SampleSchema::new(population_size);
    let reloaded = synrep::io::read_sample(&sample_path, &schema)?;
    assert_eq!(reloaded.sample, sample);
    println!("sample file round-trips; analyze it with: cargo run --example analyze_release");
    Ok(())
}
