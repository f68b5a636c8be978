//! Population generation, PPS and SRS selection, and what happens to naive
//! estimators when the design is informative.
//!
//! ```bash
//! cargo run --example survey_designs
//! ```

use synrep::design::{
    draw_pps, draw_srs, estimate_direct, estimate_ht, estimate_srssyn, generate_population,
    pps_inclusion_probabilities, SyntheticPopulationSpec,
};
use synrep::rng::substream;

fn main() -> synrep::Result<()> {
    // Y = 20 + 0.2 X + noise over a heavy-tailed size variable X, so units
    // with large X carry large Y and are oversampled under PPS.
    let spec = SyntheticPopulationSpec::with_defaults(100_000);
    let pop = generate_population(&spec, 4)?;
    println!(
        "population: N = {}, true mean = {:.4}, size variable in [{:.1}, {:.1}]",
        pop.len(),
        pop.true_mean(),
        pop.sizes().iter().fold(f64::INFINITY, |a, &b| a.min(b)),
        pop.sizes().iter().fold(0.0f64, |a, &b| a.max(b)),
    );

    let n = 500;
    let (probs, certainties) = pps_inclusion_probabilities(pop.sizes(), n)?;
    let max_p = probs.iter().fold(0.0f64, |a, &b| a.max(b));
    println!("PPS inclusion probabilities: max = {max_p:.4}, certainty units = {certainties}\n");

    let mut rng = substream(8, [0, 0, 0]);
    let (pps_sample, diagnostics) = draw_pps(&pop, n, &mut rng)?;
    if diagnostics.excessive_certainty() {
        println!("warning: more than 20% certainty selections");
    }
    let srs_sample = draw_srs(&pop, n, &mut rng)?;

    let truth = pop.true_mean();
    println!("estimates from one PPS sample (truth {truth:.3}):");
    let direct = estimate_direct(&pps_sample, 0)?;
    let ht = estimate_ht(&pps_sample, 0)?;
    let srssyn = estimate_srssyn(&pps_sample, 0, &mut rng)?;
    println!(
        "  unweighted mean {:.3} (off by {:+.1}%)",
        direct.estimate,
        100.0 * (direct.estimate - truth) / truth
    );
    println!(
        "  weighted (inverse-probability) mean {:.3} (off by {:+.1}%), se {:.3}",
        ht.estimate,
        100.0 * (ht.estimate - truth) / truth,
        ht.variance.sqrt()
    );
    println!(
        "  design-ignoring synthesis {:.3} (off by {:+.1}%)",
        srssyn.estimate,
        100.0 * (srssyn.estimate - truth) / truth
    );

    println!("\nestimates from one SRS sample:");
    let direct = estimate_direct(&srs_sample, 0)?;
    let ht = estimate_ht(&srs_sample, 0)?;
    println!(
        "  unweighted mean {:.3} (off by {:+.1}%)",
        direct.estimate,
        100.0 * (direct.estimate - truth) / truth
    );
    println!(
        "  weighted mean {:.3} (equal weights reduce it to the sample mean)",
        ht.estimate
    );

    // Averaged over repeated PPS samples the gap is systematic, not noise.
    let reps = 2_000;
    let mut naive = 0.0;
    let mut weighted = 0.0;
    for _ in 0..reps {
        let (sample, _) = draw_pps(&pop, n, &mut rng)?;
        naive += estimate_direct(&sample, 0)?.estimate / reps as f64;
        weighted += estimate_ht(&sample, 0)?.estimate / reps as f64;
    }
    println!(
        "\nover {reps} PPS samples: mean unweighted estimate {:.3} ({:+.1}% bias), mean weighted estimate {:.3} ({:+.1}%)",
        naive,
        100.0 * (naive - truth) / truth,
        weighted,
        100.0 * (weighted - truth) / truth
    );
    Ok(())
}
