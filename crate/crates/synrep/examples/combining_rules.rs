//! The combining arithmetic on small worked numbers: pooled statistics, the
//! two release-strategy variance rules, the negative-variance adjustment,
//! and the reference procedures.
//!
//! ```bash
//! cargo run --example combining_rules
//! ```

use synrep::inference::{
    combine_pseudo_pop, combine_pseudo_srs, combine_synrep_1, combine_synrep_r, interval,
    ReplicateStatistics,
};
use synrep::types::PointVariance;

fn main() -> synrep::Result<()> {
    // M = 2 groups, R = 2 replicates per group: point estimates (1, 3) and
    // (2, 4), every per-replicate sampling variance 0.1.
    let points = vec![vec![1.0, 3.0], vec![2.0, 4.0]];
    let variances = vec![vec![0.1, 0.1], vec![0.1, 0.1]];
    let stats = ReplicateStatistics::new(points, variances)?;
    println!("pooled statistics for the 2 x 2 grid:");
    println!("  group means      = {:?}", stats.group_means());
    println!("  grand mean       = {}", stats.grand_mean());
    println!("  between variance = {}", stats.between_variance());
    println!("  within variances = {:?} (mean {})", stats.within_variances(), stats.mean_within_variance());
    println!("  sampling mean    = {}", stats.mean_sampling_variance());

    let estimate = combine_synrep_r(&stats, 0.95)?;
    println!(
        "\nmulti-replicate rule: raw variance (1 + 1/M) b - v - w/R = {:.3}",
        estimate.raw_variance
    );
    println!(
        "  nonpositive, so the adjustment (1 + 2/M) v + w/(M R) = {:.3} takes over (adjusted = {})",
        estimate.variance, estimate.adjusted
    );
    println!(
        "  point {:.2}, 95% interval [{:.3}, {:.3}] on {} df",
        estimate.point, estimate.ci_low, estimate.ci_high, estimate.df
    );

    // Single-replicate rule on per-group estimates (1, 3).
    let stats1 = ReplicateStatistics::new(
        vec![vec![1.0], vec![3.0]],
        vec![vec![0.1], vec![0.1]],
    )?;
    let estimate = combine_synrep_1(&stats1, 0.95)?;
    println!(
        "\nsingle-replicate rule: (1 + 1/M) b - 2 v = {:.3} (positive, adjusted = {})",
        estimate.raw_variance, estimate.adjusted
    );

    // Reference procedures used for comparison in the studies.
    let pseudo_pop = combine_pseudo_pop(&[1.0, 3.0], 0.95)?;
    println!(
        "\npseudo-population route: point {:.1}, variance (1 + 1/M) B = {:.1}",
        pseudo_pop.point, pseudo_pop.variance
    );
    let pseudo_srs = combine_pseudo_srs(
        &[PointVariance::new(1.0, 0.1)?, PointVariance::new(3.0, 0.1)?],
        0.95,
    )?;
    println!(
        "pseudo-sample route: point {:.1}, variance (1 + 1/M) b - v = {:.1}",
        pseudo_srs.point, pseudo_srs.variance
    );

    // Interval widths come from the t distribution on M - 1 degrees of
    // freedom, so small M is punished hard.
    println!("\nt-interval half-widths for unit variance at 95%:");
    for df in [1.0, 4.0, 9.0, 49.0, 1e6] {
        let (lo, hi) = interval(0.0, 1.0, df, 0.95);
        println!("  df {df:>9}: [{lo:+.3}, {hi:+.3}]");
    }
    Ok(())
}
