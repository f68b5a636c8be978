//! Weighted finite population Bayesian bootstrap: weight-renormalizing
//! bootstrap resampling, Polya-urn pseudo-population expansion, and simple
//! random draws from the completed populations.
//!
//! One stage repetition runs three steps:
//!
//! 1. a Bayesian bootstrap of the parent sample: Dirichlet(1, ..., 1)
//!    multiplicities over the `n` units (the gaps between sorted uniforms,
//!    scaled by `n`), with the weights of the realized units renormalized so
//!    they sum to the population size `N`;
//! 2. a sequential Polya expansion that draws units with probability
//!    proportional to `w_i - 1 + l_i * (T / n)`, where `l_i` counts the
//!    unit's previous expansion selections and `T` is the number of draws;
//!    the sample rows plus the drawn rows form one pseudo-population;
//! 3. a uniform without-replacement sample of `n` rows from the
//!    pseudo-population.
//!
//! The bootstrap multiplicities are kept continuous rather than discretized
//! into integer resampling counts. Discretizing adds a multinomial layer that
//! doubles the bootstrap component of the between-population variance and
//! makes the downstream variance estimates badly conservative; the continuous
//! Dirichlet weights deliver between-population spread matching the design
//! variance of the weighted estimator.
//!
//! In full mode the pseudo-population is the `n` sample rows plus `N - n`
//! urn draws with mass increment `(N - n) / n`; each unit's expected row
//! count is then exactly its renormalized weight. Truncated mode stands in
//! for the full population at a fraction of the size: all `n + 50 n` rows
//! are drawn from the urn with the increment scaled to `51 n / n`, which
//! preserves the full-size composition distribution. (Keeping a fixed
//! sample block at the reduced scale would make 2% of the rows follow the
//! unweighted sample distribution, a visible distortion that the full-size
//! run does not have.)
//!
//! Renormalized weights below one start with negative urn mass; masses are
//! clamped at zero (such units enter the pseudo-population only through
//! their sample row), and draw probabilities are renormalized over the
//! clamped masses.

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::moments::compensated_sum;
use crate::rng::substream;
use crate::types::{ExpansionMode, PseudoPopulation, WeightedSample};

/// One Bayesian bootstrap draw over the parent sample.
#[derive(Debug, Clone, PartialEq)]
pub struct BootstrapSample {
    counts: Vec<f64>,
    renormalized_weights: Vec<f64>,
}

impl BootstrapSample {
    /// Build directly from bootstrap multiplicities (used by tests and by
    /// [`bayesian_bootstrap`]); computes the renormalized weights
    /// `w_i^(m) = N w_i r_i / sum_k w_k r_k`.
    ///
    /// Multiplicities must be nonnegative, finite, and sum to `n`.
    pub fn from_counts(counts: Vec<f64>, sample: &WeightedSample) -> Result<Self> {
        if counts.len() != sample.len() {
            return Err(Error::Argument(format!(
                "{} multiplicities for a sample of {} records",
                counts.len(),
                sample.len()
            )));
        }
        if let Some(bad) = counts.iter().find(|c| !(c.is_finite() && **c >= 0.0)) {
            return Err(Error::Invariant(format!(
                "bootstrap multiplicities must be nonnegative, got {bad}"
            )));
        }
        let total = compensated_sum(counts.iter().copied());
        let n = sample.len() as f64;
        if (total - n).abs() > 1e-9 * n {
            return Err(Error::Invariant(format!(
                "bootstrap multiplicities must sum to n = {n}, got {total}"
            )));
        }
        let weighted_total = compensated_sum(
            counts
                .iter()
                .zip(sample.weights())
                .map(|(&r, w)| r * w),
        );
        let scale = sample.population_size() as f64 / weighted_total;
        let renormalized_weights: Vec<f64> = counts
            .iter()
            .zip(sample.weights())
            .map(|(&r, w)| scale * r * w)
            .collect();
        Ok(Self {
            counts,
            renormalized_weights,
        })
    }

    /// Bootstrap multiplicities `r_i`, nonnegative and summing to `n`.
    pub fn counts(&self) -> &[f64] {
        &self.counts
    }

    /// Weights `w_i^(m)`, zero exactly where the multiplicity is zero and
    /// summing to `N`.
    pub fn renormalized_weights(&self) -> &[f64] {
        &self.renormalized_weights
    }
}

/// Bayesian bootstrap of the parent sample: Dirichlet(1, ..., 1)
/// probabilities via the uniform-gaps construction, scaled by `n`.
pub fn bayesian_bootstrap(sample: &WeightedSample, rng: &mut impl Rng) -> BootstrapSample {
    let n = sample.len();
    // Gaps between sorted uniforms are Dirichlet(1, ..., 1).
    let mut cuts: Vec<f64> = (0..n - 1).map(|_| rng.random::<f64>()).collect();
    cuts.sort_unstable_by(|a, b| a.partial_cmp(b).expect("uniforms are not NaN"));
    let mut counts = Vec::with_capacity(n);
    let mut previous = 0.0;
    for &c in &cuts {
        counts.push(n as f64 * (c - previous));
        previous = c;
    }
    counts.push(n as f64 * (1.0 - previous));
    BootstrapSample::from_counts(counts, sample).expect("gaps sum to one by construction")
}

/// State of a Polya urn mid-expansion.
#[derive(Debug, Clone, PartialEq)]
pub struct UrnState {
    weights: Vec<f64>,
    tallies: Vec<u64>,
    draws_made: u64,
    expansion_target: u64,
    sample_size: usize,
}

impl UrnState {
    /// Fresh urn (no draws yet).
    pub fn new(weights: Vec<f64>, sample_size: usize, expansion_target: u64) -> Result<Self> {
        let tallies = vec![0; weights.len()];
        Self::with_tallies(weights, tallies, 0, sample_size, expansion_target)
    }

    /// Urn at an arbitrary point of the expansion.
    pub fn with_tallies(
        weights: Vec<f64>,
        tallies: Vec<u64>,
        draws_made: u64,
        sample_size: usize,
        expansion_target: u64,
    ) -> Result<Self> {
        if weights.is_empty() || weights.len() != tallies.len() {
            return Err(Error::Argument(format!(
                "urn needs matching nonempty weights/tallies, got {} and {}",
                weights.len(),
                tallies.len()
            )));
        }
        if let Some(bad) = weights.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            return Err(Error::Invariant(format!("urn weights must be positive, got {bad}")));
        }
        if sample_size == 0 || expansion_target == 0 {
            return Err(Error::Argument(format!(
                "urn needs n > 0 and a positive expansion target, got n = {sample_size}, target = {expansion_target}"
            )));
        }
        let tally_total: u64 = tallies.iter().sum();
        if tally_total != draws_made {
            return Err(Error::Invariant(format!(
                "tallies sum to {tally_total} but draws_made = {draws_made}"
            )));
        }
        if draws_made > expansion_target {
            return Err(Error::Invariant(format!(
                "draws_made = {draws_made} exceeds expansion target {expansion_target}"
            )));
        }
        Ok(Self {
            weights,
            tallies,
            draws_made,
            expansion_target,
            sample_size,
        })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn tallies(&self) -> &[u64] {
        &self.tallies
    }

    pub fn draws_made(&self) -> u64 {
        self.draws_made
    }

    pub fn expansion_target(&self) -> u64 {
        self.expansion_target
    }

    /// Mass added to a unit per selection: `T / n`.
    pub fn increment(&self) -> f64 {
        self.expansion_target as f64 / self.sample_size as f64
    }

    /// Clamped unnormalized draw masses `max(w_i - 1 + l_i * T/n, 0)`.
    pub fn masses(&self) -> Vec<f64> {
        let inc = self.increment();
        self.weights
            .iter()
            .zip(&self.tallies)
            .map(|(&w, &l)| (w - 1.0 + l as f64 * inc).max(0.0))
            .collect()
    }

    /// The closed-form total mass `T + k * T / n` after `k` draws.
    ///
    /// Equals the sum of the unclamped masses whenever the urn holds all `n`
    /// sample units and the weights sum to `n + T`; that telescoping identity
    /// is what makes the draw probabilities sum to one without rescaling.
    pub fn nominal_total_mass(&self) -> f64 {
        self.expansion_target as f64 + self.draws_made as f64 * self.increment()
    }

    /// Record one selection of `index`.
    pub fn record_draw(&mut self, index: usize) {
        self.tallies[index] += 1;
        self.draws_made += 1;
    }
}

/// Draw probabilities for the next Polya selection: clamped masses,
/// renormalized.
pub fn polya_probabilities(state: &UrnState) -> Result<Vec<f64>> {
    if state.draws_made() >= state.expansion_target() {
        return Err(Error::Argument(format!(
            "urn already made all {} draws",
            state.expansion_target()
        )));
    }
    let masses = state.masses();
    let total = compensated_sum(masses.iter().copied());
    if total <= 0.0 {
        return Err(Error::DegenerateUrn(format!(
            "{} units, all with weight <= 1 and no selections",
            masses.len()
        )));
    }
    Ok(masses.into_iter().map(|m| m / total).collect())
}

/// Fenwick tree over draw masses: point update and cumulative search in
/// O(log u). The sequential Polya probabilities define correctness; the tree
/// only accelerates the inverse-CDF lookup.
struct MassIndex {
    tree: Vec<f64>,
    len: usize,
}

impl MassIndex {
    fn new(masses: &[f64]) -> Self {
        let len = masses.len();
        let mut tree = vec![0.0; len + 1];
        tree[1..].copy_from_slice(masses);
        for i in 1..=len {
            let parent = i + (i & i.wrapping_neg());
            if parent <= len {
                tree[parent] += tree[i];
            }
        }
        Self { tree, len }
    }

    fn add(&mut self, index: usize, delta: f64) {
        let mut i = index + 1;
        while i <= self.len {
            self.tree[i] += delta;
            i += i & i.wrapping_neg();
        }
    }

    fn total(&self) -> f64 {
        let mut sum = 0.0;
        let mut i = self.len;
        while i > 0 {
            sum += self.tree[i];
            i -= i & i.wrapping_neg();
        }
        sum
    }

    /// Smallest index whose cumulative mass exceeds `target`.
    fn search(&self, mut target: f64) -> usize {
        let mut pos = 0usize;
        let mut step = self.len.next_power_of_two();
        while step > 0 {
            let next = pos + step;
            if next <= self.len && self.tree[next] <= target {
                target -= self.tree[next];
                pos = next;
            }
            step >>= 1;
        }
        pos
    }
}

/// Run the Polya expansion and assemble one pseudo-population.
///
/// In full mode the result holds every sample row once plus `N - n` drawn
/// rows (size `N`); in truncated mode all `n + 50 n` rows are drawn. The
/// population's `source_index` defaults to one; use
/// [`PseudoPopulation::with_source_index`] when building several.
pub fn expand_pseudo_population(
    boot: &BootstrapSample,
    sample: &WeightedSample,
    mode: ExpansionMode,
    rng: &mut impl Rng,
) -> Result<PseudoPopulation> {
    if boot.counts().len() != sample.len() {
        return Err(Error::Argument(format!(
            "bootstrap covers {} units but the sample has {}",
            boot.counts().len(),
            sample.len()
        )));
    }
    let n = sample.len();
    let big_n = sample.population_size();
    let (draws, base_rows) = match mode {
        ExpansionMode::Full => (big_n - n, 1),
        ExpansionMode::Truncated => (n + mode.target(n, big_n), 0),
    };
    let increment = draws as f64 / n as f64;

    let mut masses: Vec<f64> = boot
        .renormalized_weights()
        .iter()
        .map(|&w| (w - 1.0).max(0.0))
        .collect();
    if compensated_sum(masses.iter().copied()) <= 0.0 {
        return Err(Error::DegenerateUrn(format!(
            "no unit has renormalized weight above one (n = {n}, N = {big_n})"
        )));
    }

    let mut row_counts: Vec<u64> = vec![base_rows; n];
    let mut index = MassIndex::new(&masses);
    let last_positive = masses
        .iter()
        .rposition(|&m| m > 0.0)
        .expect("a positive mass exists");

    let mut total = index.total();
    for _ in 0..draws {
        let u: f64 = rng.random::<f64>() * total;
        let mut pick = index.search(u);
        if pick >= masses.len() || masses[pick] == 0.0 {
            // Rounding pushed the target past the last boundary.
            pick = last_positive;
        }
        row_counts[pick] += 1;
        masses[pick] += increment;
        index.add(pick, increment);
        total += increment;
    }

    PseudoPopulation::from_counts(row_counts, 1, mode, n * base_rows as usize + draws)
}

/// Uniform without-replacement sample of `n` rows from the pseudo-population
/// multiset, materialized as value rows of the parent sample.
pub fn draw_pseudo_srs(
    pop: &PseudoPopulation,
    sample: &WeightedSample,
    n: usize,
    rng: &mut impl Rng,
) -> Result<Vec<Vec<f64>>> {
    if n > pop.size() {
        return Err(Error::Argument(format!(
            "cannot draw {n} rows from a pseudo-population of {}",
            pop.size()
        )));
    }
    let positions = crate::design::sample_indices_without_replacement(pop.size(), n, rng);
    // Map sorted flat positions to parent rows through cumulative counts.
    let mut rows = Vec::with_capacity(n);
    let mut parent = 0usize;
    let mut covered = pop.counts()[0];
    for pos in positions {
        while pos as u64 >= covered {
            parent += 1;
            covered += pop.counts()[parent];
        }
        rows.push(sample.records()[parent].values().to_vec());
    }
    Ok(rows)
}

/// Per-column summary of a pseudo-population, retained when the full
/// multiplicity table is not kept.
#[derive(Debug, Clone, PartialEq)]
pub struct PseudoPopulationSummary {
    pub source_index: usize,
    pub size: usize,
    pub column_means: Vec<f64>,
    pub column_variances: Vec<f64>,
}

/// One stage repetition: the pseudo-population (summarized, optionally
/// retained) and the pseudo-sample drawn from it.
#[derive(Debug, Clone, PartialEq)]
pub struct StageReplicate {
    pub summary: PseudoPopulationSummary,
    pub pseudo_sample: Vec<Vec<f64>>,
    pub population: Option<PseudoPopulation>,
}

/// Run bootstrap, expansion, and pseudo-SRS `groups` times with independent
/// substreams keyed by the repetition index; repetitions run in parallel.
///
/// With `keep_populations` false only the per-column summary of each
/// pseudo-population is retained.
pub fn run_wfpbb_stage(
    sample: &WeightedSample,
    groups: usize,
    mode: ExpansionMode,
    seed: u64,
    keep_populations: bool,
) -> Result<Vec<StageReplicate>> {
    if groups == 0 {
        return Err(Error::Argument("at least one repetition required".into()));
    }
    (1..=groups)
        .into_par_iter()
        .map(|m| {
            let mut rng = substream(seed, [m as u64, 0, 0]);
            let boot = bayesian_bootstrap(sample, &mut rng);
            let pop = expand_pseudo_population(&boot, sample, mode, &mut rng)?
                .with_source_index(m);
            let pseudo_sample = draw_pseudo_srs(&pop, sample, sample.len(), &mut rng)?;
            let moments = pop.column_moments(sample);
            let summary = PseudoPopulationSummary {
                source_index: m,
                size: pop.size(),
                column_means: moments.iter().map(|&(mean, _)| mean).collect(),
                column_variances: moments.iter().map(|&(_, var)| var).collect(),
            };
            Ok(StageReplicate {
                summary,
                pseudo_sample,
                population: keep_populations.then_some(pop),
            })
        })
        .collect()
}
