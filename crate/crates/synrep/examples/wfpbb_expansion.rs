//! Inside the weighted bootstrap: renormalized weights, urn probabilities,
//! pseudo-population expansion, and the design-unbiasedness property.
//!
//! ```bash
//! cargo run --example wfpbb_expansion
//! ```

use synrep::rng::substream;
use synrep::types::{ExpansionMode, WeightedSample};
use synrep::wfpbb::{
    bayesian_bootstrap, draw_pseudo_srs, expand_pseudo_population, polya_probabilities,
    BootstrapSample, UrnState,
};

fn main() -> synrep::Result<()> {
    // Six units; the heavy-weight units represent many more population
    // members, so the expansion should replicate them more often.
    let weights = [9.0, 3.0, 6.0, 12.0, 3.0, 3.0];
    let values = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
    let rows: Vec<Vec<f64>> = values.iter().map(|&y| vec![y]).collect();
    let sample = WeightedSample::from_columns(&weights, &rows, 36)?;
    let weighted_mean = weights
        .iter()
        .zip(&values)
        .map(|(&w, &y)| w * y)
        .sum::<f64>()
        / weights.iter().sum::<f64>();
    println!("weights {weights:?}, values {values:?}");
    println!("weighted sample mean = {weighted_mean:.4}\n");

    // Step 1: the Bayesian bootstrap perturbs the weights while keeping
    // their total at N.
    let mut rng = substream(11, [0, 0, 0]);
    let boot = bayesian_bootstrap(&sample, &mut rng);
    println!(
        "bootstrap multiplicities: {:?}",
        boot.counts()
            .iter()
            .map(|c| (c * 100.0).round() / 100.0)
            .collect::<Vec<_>>()
    );
    println!(
        "renormalized weights:     {:?} (sum = {:.3})\n",
        boot.renormalized_weights()
            .iter()
            .map(|w| (w * 100.0).round() / 100.0)
            .collect::<Vec<_>>(),
        boot.renormalized_weights().iter().sum::<f64>()
    );

    // Step 2: the urn. Draw probabilities depend on the weights and on how
    // often each unit has already been selected.
    let mut urn = UrnState::new(boot.renormalized_weights().to_vec(), sample.len(), 30)?;
    println!("first-draw probabilities: {:?}", round3(&polya_probabilities(&urn)?));
    urn.record_draw(3);
    urn.record_draw(3);
    println!(
        "after unit 4 is drawn twice: {:?} (selection begets selection)\n",
        round3(&polya_probabilities(&urn)?)
    );

    // The full expansion materializes a pseudo-population.
    let pop = expand_pseudo_population(&boot, &sample, ExpansionMode::Full, &mut rng)?;
    println!(
        "pseudo-population of {} rows, per-unit counts {:?}",
        pop.size(),
        pop.counts()
    );
    println!("pseudo-population mean = {:.4}", pop.column_mean(&sample, 0));

    // Step 3: a simple random sample erases the design.
    let srs = draw_pseudo_srs(&pop, &sample, 6, &mut rng)?;
    println!("pseudo-SRS rows: {:?}\n", srs.iter().map(|r| r[0]).collect::<Vec<_>>());

    // Unbiasedness: averaged over many bootstrap + expansion repetitions,
    // the pseudo-population mean centers on the weighted sample mean.
    let reps = 2_000;
    let mut total = 0.0;
    for _ in 0..reps {
        let boot = bayesian_bootstrap(&sample, &mut rng);
        let pop = expand_pseudo_population(&boot, &sample, ExpansionMode::Full, &mut rng)?;
        total += pop.column_mean(&sample, 0);
    }
    println!(
        "mean pseudo-population mean over {reps} repetitions = {:.4} (weighted mean {:.4})",
        total / reps as f64,
        weighted_mean
    );

    // Forcing the identity bootstrap isolates the urn: expected unit counts
    // are then exactly the design weights.
    let identity = BootstrapSample::from_counts(vec![1.0; 6], &sample)?;
    let mut counts = vec![0.0; 6];
    for _ in 0..reps {
        let pop = expand_pseudo_population(&identity, &sample, ExpansionMode::Full, &mut rng)?;
        for (acc, &c) in counts.iter_mut().zip(pop.counts()) {
            *acc += c as f64 / reps as f64;
        }
    }
    println!("mean unit counts under the identity bootstrap: {:?}", round3(&counts));
    println!("design weights:                                {weights:?}");
    Ok(())
}

fn round3(xs: &[f64]) -> Vec<f64> {
    xs.iter().map(|x| (x * 1000.0).round() / 1000.0).collect()
}
