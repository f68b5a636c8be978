//! Acceptance suite: one test per release criterion, each printing a
//! PASS/FAIL line (run with `--nocapture` to see them).
//!
//! Every oracle here is implemented independently of the library path it
//! checks: naive textbook loops for the combining rules, an exhaustive
//! enumeration for the SRS variance, a count-based Polya urn for the
//! unweighted bootstrap comparison, and closed-form identities for the urn
//! normalization.

use std::path::Path;
use std::process::Command;
use std::time::Instant;

use rand::Rng;

use synrep::design::{draw_pps, generate_population, SyntheticPopulationSpec};
use synrep::inference::{
    combine_synrep_1, combine_synrep_r, estimand_on_srs, EstimandSpec, ReplicateStatistics,
};
use synrep::rng::substream;
use synrep::simulate::{
    run_experiment, Design, ExperimentConfig, Method, PopulationConfig, Setting,
};
use synrep::synthesizer::SynthesizerKind;
use synrep::types::{ExpansionMode, UnitRecord, WeightedSample};
use synrep::wfpbb::{
    bayesian_bootstrap, draw_pseudo_srs, expand_pseudo_population, run_wfpbb_stage, UrnState,
};

fn relative_gap(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-30)
}

fn mean_and_variance(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

// ---------------------------------------------------------------------------
// Criterion 1: combining-rule arithmetic against a brute-force oracle.
// ---------------------------------------------------------------------------

struct OracleCombined {
    group_means: Vec<f64>,
    grand_mean: f64,
    between: f64,
    within_mean: f64,
    sampling_mean: f64,
    raw: f64,
    variance: f64,
    adjusted: bool,
}

fn oracle_multi(points: &[Vec<f64>], variances: &[Vec<f64>]) -> OracleCombined {
    let m = points.len();
    let r = points[0].len();
    let mut group_means = Vec::new();
    for q in points {
        let mut s = 0.0;
        for &x in q {
            s += x;
        }
        group_means.push(s / r as f64);
    }
    let mut grand = 0.0;
    for &g in &group_means {
        grand += g;
    }
    grand /= m as f64;
    let mut between = 0.0;
    for &g in &group_means {
        between += (g - grand) * (g - grand);
    }
    between /= (m - 1) as f64;
    let mut within_mean = 0.0;
    if r > 1 {
        for (q, &g) in points.iter().zip(&group_means) {
            let mut w = 0.0;
            for &x in q {
                w += (x - g) * (x - g);
            }
            within_mean += w / (r - 1) as f64;
        }
        within_mean /= m as f64;
    }
    let mut sampling_mean = 0.0;
    for v in variances {
        for &x in v {
            sampling_mean += x;
        }
    }
    sampling_mean /= (m * r) as f64;

    let (raw, fallback) = if r > 1 {
        (
            (1.0 + 1.0 / m as f64) * between - sampling_mean - within_mean / r as f64,
            (1.0 + 2.0 / m as f64) * sampling_mean + within_mean / (m * r) as f64,
        )
    } else {
        (
            (1.0 + 1.0 / m as f64) * between - 2.0 * sampling_mean,
            (1.0 + 3.0 / m as f64) * sampling_mean,
        )
    };
    let adjusted = raw <= 0.0;
    OracleCombined {
        group_means,
        grand_mean: grand,
        between,
        within_mean,
        sampling_mean,
        raw,
        variance: if adjusted { fallback } else { raw },
        adjusted,
    }
}

#[test]
fn criterion_1_combining_rule_oracle() {
    let started = Instant::now();
    let mut rng = substream(101, [0, 0, 0]);
    let cases = 1_000;
    let mut worst = 0.0f64;
    for _ in 0..cases {
        let m = rng.random_range(2..=10usize);
        let r = rng.random_range(1..=10usize);
        let points: Vec<Vec<f64>> = (0..m)
            .map(|_| (0..r).map(|_| rng.random_range(-50.0..50.0)).collect())
            .collect();
        let variances: Vec<Vec<f64>> = (0..m)
            .map(|_| (0..r).map(|_| rng.random_range(0.01..5.0)).collect())
            .collect();

        let oracle = oracle_multi(&points, &variances);
        let stats = ReplicateStatistics::new(points.clone(), variances.clone()).unwrap();
        let estimate = if r > 1 {
            combine_synrep_r(&stats, 0.95).unwrap()
        } else {
            combine_synrep_1(&stats, 0.95).unwrap()
        };

        for (a, b) in stats.group_means().iter().zip(&oracle.group_means) {
            worst = worst.max(relative_gap(*a, *b));
        }
        worst = worst.max(relative_gap(stats.grand_mean(), oracle.grand_mean));
        worst = worst.max(relative_gap(stats.between_variance(), oracle.between));
        worst = worst.max(relative_gap(stats.mean_within_variance(), oracle.within_mean));
        worst = worst.max(relative_gap(
            stats.mean_sampling_variance(),
            oracle.sampling_mean,
        ));
        worst = worst.max(relative_gap(estimate.point, oracle.grand_mean));
        worst = worst.max(relative_gap(estimate.raw_variance, oracle.raw));
        worst = worst.max(relative_gap(estimate.variance, oracle.variance));
        assert_eq!(estimate.adjusted, oracle.adjusted);
    }
    let elapsed = started.elapsed().as_secs_f64();
    let pass = worst <= 1e-12 && elapsed < 60.0;
    println!(
        "criterion 1 (combining-rule oracle): {} — worst relative gap {worst:.2e} over {cases} cases in {elapsed:.2}s",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "worst relative gap {worst:.2e}, elapsed {elapsed:.2}s");
}

// ---------------------------------------------------------------------------
// Criterion 2: Polya draw probabilities sum to one on clean urn states.
// ---------------------------------------------------------------------------

#[test]
fn criterion_2_polya_normalization() {
    let started = Instant::now();
    let mut rng = substream(102, [0, 0, 0]);
    let states = 10_000;
    let mut worst = 0.0f64;
    for _ in 0..states {
        let n = rng.random_range(3..200usize);
        let target = (n as u64) * rng.random_range(2..80u64);
        // No clamping: weights at least one, summing to n + T.
        let mut extras: Vec<f64> = (0..n).map(|_| rng.random::<f64>() + 1e-9).collect();
        let extra_total: f64 = extras.iter().sum();
        let weights: Vec<f64> = extras
            .drain(..)
            .map(|e| 1.0 + e * target as f64 / extra_total)
            .collect();
        let draws = rng.random_range(0..target);
        let mut tallies = vec![0u64; n];
        for _ in 0..draws {
            tallies[rng.random_range(0..n)] += 1;
        }
        let state = UrnState::with_tallies(weights, tallies, draws, n, target).unwrap();
        // Probabilities per the closed-form denominator; the telescoping
        // identity makes them sum to one without renormalization.
        let denominator = state.nominal_total_mass();
        let total: f64 = state.masses().iter().map(|m| m / denominator).sum();
        worst = worst.max((total - 1.0).abs());
    }
    let elapsed = started.elapsed().as_secs_f64();
    let pass = worst <= 1e-12 && elapsed < 60.0;
    println!(
        "criterion 2 (Polya normalization): {} — worst |sum - 1| = {worst:.2e} over {states} states in {elapsed:.2}s",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "worst |sum - 1| = {worst:.2e}, elapsed {elapsed:.2}s");
}

// ---------------------------------------------------------------------------
// Criterion 3: pseudo-population means center on the weighted sample mean.
// ---------------------------------------------------------------------------

#[test]
fn criterion_3_wfpbb_unbiasedness() {
    let started = Instant::now();
    let mut rng = substream(103, [0, 0, 0]);
    let n = 200;
    let weights: Vec<f64> = (0..n).map(|_| 50.0 + 100.0 * rng.random::<f64>()).collect();
    let values: Vec<f64> = weights
        .iter()
        .map(|&w| w / 100.0 + rng.random::<f64>())
        .collect();
    let population_size = weights.iter().sum::<f64>().round() as usize;
    let records: Vec<UnitRecord> = weights
        .iter()
        .zip(&values)
        .map(|(&w, &y)| UnitRecord::new(w, vec![y]).unwrap())
        .collect();
    let sample = WeightedSample::new(records, population_size).unwrap();
    let hajek = weights.iter().zip(&values).map(|(&w, &y)| w * y).sum::<f64>()
        / weights.iter().sum::<f64>();

    let reps = 1_000;
    let mut means = Vec::with_capacity(reps);
    for _ in 0..reps {
        let boot = bayesian_bootstrap(&sample, &mut rng);
        let pop = expand_pseudo_population(&boot, &sample, ExpansionMode::Full, &mut rng).unwrap();
        means.push(pop.column_mean(&sample, 0));
    }
    let (mean, var) = mean_and_variance(&means);
    let se = (var / reps as f64).sqrt();
    let gap = (mean - hajek).abs();
    let elapsed = started.elapsed().as_secs_f64();
    let pass = gap <= 3.0 * se && elapsed < 300.0;
    println!(
        "criterion 3 (WFPBB unbiasedness): {} — mean {mean:.5} vs weighted mean {hajek:.5}, |gap| = {gap:.5} <= 3se = {:.5}, {elapsed:.1}s",
        if pass { "PASS" } else { "FAIL" },
        3.0 * se
    );
    assert!(pass, "gap {gap:.6} vs 3se {:.6}, elapsed {elapsed:.1}s", 3.0 * se);
}

// ---------------------------------------------------------------------------
// Criterion 4: with equal weights the stage matches an unweighted
// finite-population bootstrap oracle.
// ---------------------------------------------------------------------------

/// Oracle: classic count-based Polya urn on the sample rows (every row starts
/// with count one; each draw adds a copy), then a uniform without-replacement
/// sample of `srs_n` rows.
fn unweighted_fpbb_srs(
    values: &[f64],
    draws: usize,
    srs_n: usize,
    rng: &mut impl Rng,
) -> Vec<f64> {
    let n = values.len();
    let mut counts: Vec<u64> = vec![1; n];
    let mut total = n as u64;
    for _ in 0..draws {
        let mut u = rng.random_range(0..total);
        let mut pick = n - 1;
        for (i, &c) in counts.iter().enumerate() {
            if u < c {
                pick = i;
                break;
            }
            u -= c;
        }
        counts[pick] += 1;
        total += 1;
    }
    // Materialize and draw the SRS by partial Fisher-Yates.
    let mut rows: Vec<f64> = Vec::with_capacity(total as usize);
    for (i, &c) in counts.iter().enumerate() {
        for _ in 0..c {
            rows.push(values[i]);
        }
    }
    for i in 0..srs_n {
        let j = rng.random_range(i..rows.len());
        rows.swap(i, j);
    }
    rows.truncate(srs_n);
    rows
}

#[test]
fn criterion_4_uniform_weight_equivalence() {
    let started = Instant::now();
    let n = 50;
    let big_n = 1_000_000;
    let mut rng = substream(104, [0, 0, 0]);
    let values: Vec<f64> = (0..n).map(|_| 10.0 * rng.random::<f64>()).collect();
    let weight = big_n as f64 / n as f64;
    let records: Vec<UnitRecord> = values
        .iter()
        .map(|&y| UnitRecord::new(weight, vec![y]).unwrap())
        .collect();
    let sample = WeightedSample::new(records, big_n).unwrap();

    let reps = 1_000;
    let mut ours = Vec::with_capacity(reps);
    let mut oracle = Vec::with_capacity(reps);
    for _ in 0..reps {
        let boot = bayesian_bootstrap(&sample, &mut rng);
        let pop =
            expand_pseudo_population(&boot, &sample, ExpansionMode::Truncated, &mut rng).unwrap();
        let srs = draw_pseudo_srs(&pop, &sample, n, &mut rng).unwrap();
        ours.push(srs.iter().map(|r| r[0]).sum::<f64>() / n as f64);
        let rows = unweighted_fpbb_srs(&values, 50 * n, n, &mut rng);
        oracle.push(rows.iter().sum::<f64>() / n as f64);
    }
    let (mean_a, var_a) = mean_and_variance(&ours);
    let (mean_b, var_b) = mean_and_variance(&oracle);
    let mean_se = (var_a / reps as f64 + var_b / reps as f64).sqrt();
    let mean_gap = (mean_a - mean_b).abs();
    // Variances compared on the log scale; each sample variance has
    // relative standard error about sqrt(2 / reps).
    let log_se = (2.0 / reps as f64 + 2.0 / reps as f64).sqrt();
    let log_gap = (var_a / var_b).ln().abs();
    let elapsed = started.elapsed().as_secs_f64();
    let pass = mean_gap <= 3.0 * mean_se && log_gap <= 3.0 * log_se;
    println!(
        "criterion 4 (uniform-weight equivalence): {} — means {mean_a:.4} vs {mean_b:.4} (3se {:.4}), variances {var_a:.4} vs {var_b:.4} (|log ratio| {log_gap:.3} <= {:.3}), {elapsed:.1}s",
        if pass { "PASS" } else { "FAIL" },
        3.0 * mean_se,
        3.0 * log_se
    );
    assert!(pass);
}

// ---------------------------------------------------------------------------
// Criteria 5-7: desk-scale repeated-sampling studies.
// ---------------------------------------------------------------------------

fn desk_config(
    seed: u64,
    design: Design,
    settings: Vec<Setting>,
    methods: Vec<Method>,
    synthesizer: SynthesizerKind,
) -> ExperimentConfig {
    ExperimentConfig {
        design,
        seed,
        runs: 500,
        sample_size: 500,
        population: PopulationConfig::with_defaults(100_000),
        settings,
        methods,
        level: 0.95,
        mode: ExpansionMode::Truncated,
        synthesizer,
        threads: 0,
    }
}

#[test]
fn criterion_5_desk_scale_pps_study() {
    let started = Instant::now();
    // Multi-replicate method under posterior-draw synthesis, plus the
    // sample-level baselines.
    let config_r = desk_config(
        20_250_801,
        Design::Pps,
        vec![Setting { m: 10, r: 10 }, Setting { m: 50, r: 10 }],
        vec![Method::SynRepR, Method::Direct, Method::Ht, Method::SrsSyn],
        SynthesizerKind::NormalBayes,
    );
    let report_r = run_experiment(&config_r).unwrap();

    // Single-replicate method under plug-in synthesis: its variance rule
    // presumes the synthetic estimate varies around the pseudo-sample
    // estimate by one SRS variance, which posterior draws would double.
    let config_1 = desk_config(
        20_250_812,
        Design::Pps,
        vec![Setting { m: 10, r: 10 }, Setting { m: 50, r: 10 }],
        vec![Method::SynRep1],
        SynthesizerKind::NormalPlugin,
    );
    let report_1 = run_experiment(&config_1).unwrap();

    let mut failures: Vec<String> = Vec::new();
    let mut lines: Vec<String> = Vec::new();

    for (report, method, label) in [
        (&report_r, Method::SynRepR, "synrep-r/normal-bayes"),
        (&report_1, Method::SynRep1, "synrep-1/normal-plugin"),
    ] {
        for m in [10, 50] {
            let row = report
                .row(method, Some(Setting { m, r: 10 }))
                .expect("configured setting");
            lines.push(format!(
                "    {label} M{m}: bias {:+.3}% cov {:.3} ratio {:.3}",
                row.percent_bias, row.coverage, row.variance_ratio
            ));
            if row.percent_bias.abs() >= 1.5 {
                failures.push(format!("(a) {label} M{m} |bias| {:.3}% >= 1.5%", row.percent_bias));
            }
            if !(0.90..=0.98).contains(&row.coverage) {
                failures.push(format!("(b) {label} M{m} coverage {:.3}", row.coverage));
            }
            if !(0.7..=1.3).contains(&row.variance_ratio) {
                failures.push(format!("(c) {label} M{m} ratio {:.3}", row.variance_ratio));
            }
        }
    }

    for (method, name) in [(Method::Direct, "direct"), (Method::SrsSyn, "srs-syn")] {
        let row = report_r.row(method, None).expect("baseline row");
        lines.push(format!(
            "    {name}: bias {:+.3}% cov {:.3}",
            row.percent_bias, row.coverage
        ));
        if row.percent_bias <= 20.0 {
            failures.push(format!("(d) {name} bias {:.3}% <= 20%", row.percent_bias));
        }
        if row.coverage >= 0.10 {
            failures.push(format!("(d) {name} coverage {:.3} >= 0.10", row.coverage));
        }
    }
    let ht = report_r.row(Method::Ht, None).expect("ht row");
    lines.push(format!(
        "    ht: bias {:+.3}% cov {:.3}",
        ht.percent_bias, ht.coverage
    ));
    if ht.percent_bias.abs() >= 1.0 {
        failures.push(format!("(e) ht |bias| {:.3}% >= 1%", ht.percent_bias));
    }
    if !(0.92..=0.97).contains(&ht.coverage) {
        failures.push(format!("(e) ht coverage {:.3}", ht.coverage));
    }

    let elapsed = started.elapsed().as_secs_f64();
    println!(
        "criterion 5 (desk-scale PPS study): {} — S=500, n=500, N=100000, truncated, {elapsed:.0}s (target < 1800s)",
        if failures.is_empty() { "PASS" } else { "FAIL" }
    );
    for line in &lines {
        println!("{line}");
    }
    assert!(failures.is_empty(), "criterion 5 failures: {failures:?}");
}

#[test]
fn criterion_6_negative_variance_ordering() {
    let started = Instant::now();
    let config = desk_config(
        20_250_801,
        Design::Pps,
        vec![
            Setting { m: 2, r: 10 },
            Setting { m: 5, r: 10 },
            Setting { m: 10, r: 10 },
            Setting { m: 50, r: 10 },
        ],
        vec![Method::PseudoSrs, Method::SynRepR, Method::SynRep1],
        SynthesizerKind::NormalPlugin,
    );
    let report = run_experiment(&config).unwrap();

    let rate = |method: Method, m: usize| -> f64 {
        report
            .row(method, Some(Setting { m, r: 10 }))
            .expect("configured setting")
            .negative_variance_rate
    };

    let mut failures: Vec<String> = Vec::new();
    let methods = [Method::PseudoSrs, Method::SynRepR, Method::SynRep1];
    for method in methods {
        let rates: Vec<f64> = [2, 5, 10, 50].iter().map(|&m| rate(method, m)).collect();
        println!(
            "    {method}: M2 {:.1}% M5 {:.1}% M10 {:.1}% M50 {:.1}%",
            100.0 * rates[0],
            100.0 * rates[1],
            100.0 * rates[2],
            100.0 * rates[3]
        );
        for pair in rates.windows(2) {
            // Strict decrease; equality only permitted once both hit zero.
            if !(pair[1] < pair[0] || (pair[0] == 0.0 && pair[1] == 0.0)) {
                failures.push(format!("{method} rates not decreasing: {rates:?}"));
            }
        }
        if rates[0] <= 0.20 {
            failures.push(format!("{method} M2 rate {:.3} <= 20%", rates[0]));
        }
        // The reference table reports integer percentages, so "0 at M = 50"
        // is a rate below half a percent; at S = 500 that is the resolution
        // Monte Carlo error allows.
        if rates[3] >= 0.005 {
            failures.push(format!(
                "{method} M50 rate {:.4} does not round to 0%",
                rates[3]
            ));
        }
    }
    for &m in &[2, 5, 10, 50] {
        if rate(Method::SynRep1, m) < rate(Method::SynRepR, m) {
            failures.push(format!(
                "single-replicate rate below multi-replicate at M{m}: {:.3} < {:.3}",
                rate(Method::SynRep1, m),
                rate(Method::SynRepR, m)
            ));
        }
    }

    let elapsed = started.elapsed().as_secs_f64();
    println!(
        "criterion 6 (negative-variance ordering): {} — {elapsed:.0}s",
        if failures.is_empty() { "PASS" } else { "FAIL" }
    );
    assert!(failures.is_empty(), "criterion 6 failures: {failures:?}");
}

#[test]
fn criterion_7_srs_design_sanity() {
    let started = Instant::now();
    let config = desk_config(
        20_250_803,
        Design::Srs,
        vec![Setting { m: 10, r: 10 }],
        vec![Method::PseudoSrs, Method::SynRepR, Method::SynRep1],
        SynthesizerKind::NormalPlugin,
    );
    let report = run_experiment(&config).unwrap();

    let mut failures: Vec<String> = Vec::new();
    for method in [Method::SynRepR, Method::SynRep1] {
        let row = report
            .row(method, Some(Setting { m: 10, r: 10 }))
            .expect("configured setting");
        println!(
            "    {method}: bias {:+.3}% (mc se {:.3}) cov {:.3}",
            row.percent_bias, row.bias_mc_se, row.coverage
        );
        if !(0.89..=0.97).contains(&row.coverage) {
            failures.push(format!("{method} coverage {:.3}", row.coverage));
        }
        if row.percent_bias.abs() > 3.0 * row.bias_mc_se {
            failures.push(format!(
                "{method} bias {:.3}% exceeds 3 mc se = {:.3}%",
                row.percent_bias,
                3.0 * row.bias_mc_se
            ));
        }
    }

    let elapsed = started.elapsed().as_secs_f64();
    println!(
        "criterion 7 (SRS-design sanity): {} — {elapsed:.0}s",
        if failures.is_empty() { "PASS" } else { "FAIL" }
    );
    assert!(failures.is_empty(), "criterion 7 failures: {failures:?}");
}

// ---------------------------------------------------------------------------
// Criterion 8: byte-identical outputs across repeats and thread counts.
// ---------------------------------------------------------------------------

fn run_binary(args: &[&str], dir: &Path) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_synrep"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

#[test]
fn criterion_8_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let dir = dir.path();

    // A small confidential sample file.
    let mut sample_csv = String::from("weight,y\n");
    let mut rng = substream(108, [0, 0, 0]);
    for _ in 0..60 {
        sample_csv.push_str(&format!(
            "{},{}\n",
            20.0 + 10.0 * rng.random::<f64>(),
            50.0 * rng.random::<f64>()
        ));
    }
    std::fs::write(dir.join("sample.csv"), sample_csv).unwrap();

    let generate = |output: &str, threads: &str| {
        let out = run_binary(
            &[
                "generate",
                "--input",
                "sample.csv",
                "--population-size",
                "2000",
                "--variant",
                "synrep-r",
                "-M",
                "3",
                "-R",
                "2",
                "--seed",
                "424242",
                "--threads",
                threads,
                "--output",
                output,
            ],
            dir,
        );
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    };
    generate("rel_a.csv", "1");
    generate("rel_b.csv", "1");
    generate("rel_c.csv", "8");
    let a = std::fs::read(dir.join("rel_a.csv")).unwrap();
    let b = std::fs::read(dir.join("rel_b.csv")).unwrap();
    let c = std::fs::read(dir.join("rel_c.csv")).unwrap();
    let generate_ok = a == b && a == c;

    // A tiny simulation config.
    let config = r#"
design = "pps"
seed = 99
runs = 8
sample_size = 50
settings = [{ m = 2, r = 3 }]

[population]
size = 5000
"#;
    std::fs::write(dir.join("exp.toml"), config).unwrap();
    let simulate = |out_dir: &str, threads: &str| {
        let out = run_binary(
            &[
                "simulate",
                "--config",
                "exp.toml",
                "--output-dir",
                out_dir,
                "--threads",
                threads,
            ],
            dir,
        );
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    };
    simulate("sim_a", "1");
    simulate("sim_b", "8");
    simulate("sim_c", "1");
    let mut simulate_ok = true;
    for file in ["report.json", "report.csv", "report.md"] {
        let a = std::fs::read(dir.join("sim_a").join(file)).unwrap();
        let b = std::fs::read(dir.join("sim_b").join(file)).unwrap();
        let c = std::fs::read(dir.join("sim_c").join(file)).unwrap();
        simulate_ok &= a == b && a == c;
    }

    let pass = generate_ok && simulate_ok;
    println!(
        "criterion 8 (determinism): {} — generate byte-identical: {generate_ok}, simulate byte-identical across threads 1/8: {simulate_ok}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass);
}

// ---------------------------------------------------------------------------
// Criterion 9: SRS variance formula against exhaustive enumeration.
// ---------------------------------------------------------------------------

#[test]
fn criterion_9_exhaustive_srs_oracle() {
    let population = [3.0, 7.0, 11.0, 13.0, 19.0, 29.0];
    let n = 2;
    let mu = population.iter().sum::<f64>() / 6.0;

    // Enumerate all 15 samples of size 2: the design variance of the mean.
    let mut sample_means = Vec::new();
    let mut estimator_values = Vec::new();
    for i in 0..6 {
        for j in (i + 1)..6 {
            let rows = vec![vec![population[i]], vec![population[j]]];
            let pv = estimand_on_srs(&rows, &EstimandSpec::mean_of(0), 6).unwrap();
            sample_means.push(pv.estimate);
            estimator_values.push(pv.variance);
        }
    }
    assert_eq!(sample_means.len(), 15);
    let design_variance = sample_means
        .iter()
        .map(|m| (m - mu) * (m - mu))
        .sum::<f64>()
        / 15.0;

    // Route one: the closed formula (1 - n/N) S^2 / n on the population.
    let s2 = population.iter().map(|y| (y - mu) * (y - mu)).sum::<f64>() / 5.0;
    let formula = (1.0 - n as f64 / 6.0) * s2 / n as f64;
    let formula_gap = relative_gap(formula, design_variance);

    // Route two: the estimator is design-unbiased, so its average over all
    // samples reproduces the same number.
    let estimator_mean = estimator_values.iter().sum::<f64>() / 15.0;
    let estimator_gap = relative_gap(estimator_mean, design_variance);

    let pass = formula_gap <= 1e-12 && estimator_gap <= 1e-12;
    println!(
        "criterion 9 (exhaustive SRS oracle): {} — formula gap {formula_gap:.2e}, estimator-mean gap {estimator_gap:.2e}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass);
}

// ---------------------------------------------------------------------------
// Supporting check: the PPS baseline behaves before the studies run.
// ---------------------------------------------------------------------------

#[test]
fn pps_population_matches_reference_shape() {
    let spec = SyntheticPopulationSpec::with_defaults(100_000);
    let pop = generate_population(&spec, 20_250_801).unwrap();
    assert!((pop.true_mean() - 40.5).abs() < 1.5, "mean {}", pop.true_mean());
    let mut rng = substream(109, [0, 0, 0]);
    let (sample, diagnostics) = draw_pps(&pop, 500, &mut rng).unwrap();
    assert_eq!(sample.len(), 500);
    assert!(!diagnostics.excessive_certainty());

    // The stage runs end to end at desk scale.
    let stage = run_wfpbb_stage(&sample, 2, ExpansionMode::Truncated, 7, false).unwrap();
    assert_eq!(stage.len(), 2);
    assert_eq!(stage[0].summary.size, 500 + 25_000);
}
