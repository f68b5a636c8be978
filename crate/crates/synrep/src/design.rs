//! Finite-population generation, PPS and SRS selection, and the design-based
//! comparison estimators used by the simulation study.
//!
//! The synthetic population carries a positive size variable `X_i` and a
//! survey variable `Y_i = intercept + slope * X_i + eps_i` with normal noise.
//! PPS samples select units with inclusion probability proportional to size
//! via systematic sampling on a randomly permuted list, which hits the target
//! inclusion probabilities exactly and runs in O(N).

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, LogNormal, Normal};

use crate::error::{Error, Result};
use crate::moments::{compensated_sum, RunningMoments};
use crate::rng::substream;
use crate::types::{PointVariance, UnitRecord, WeightedSample};

/// Clipping bounds applied to generated size variables.
///
/// Matches the observed range of the size file the default configuration is
/// calibrated against (1 to 3223, mean about 102).
pub const SIZE_CLIP: (f64, f64) = (1.0, 3223.0);

/// Where the size variable comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum SizeSource {
    /// Lognormal with the given mean and coefficient of variation, clipped to
    /// [`SIZE_CLIP`].
    Lognormal { mean: f64, cv: f64 },
    /// Resample (with replacement) from an observed list of sizes.
    Resample(Vec<f64>),
}

impl Default for SizeSource {
    fn default() -> Self {
        SizeSource::Lognormal {
            mean: 102.0,
            cv: 0.95,
        }
    }
}

/// Recipe for one synthetic finite population.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticPopulationSpec {
    pub population_size: usize,
    pub size_source: SizeSource,
    pub intercept: f64,
    pub slope: f64,
    pub noise_sd: f64,
}

impl SyntheticPopulationSpec {
    /// Defaults mirroring the reference configuration: `Y = 20 + 0.2 X + eps`,
    /// `eps ~ N(0, 100^2)`.
    pub fn with_defaults(population_size: usize) -> Self {
        Self {
            population_size,
            size_source: SizeSource::default(),
            intercept: 20.0,
            slope: 0.2,
            noise_sd: 100.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.population_size < 1000 {
            return Err(Error::Invariant(format!(
                "population size must be at least 1000, got {}",
                self.population_size
            )));
        }
        if !(self.noise_sd.is_finite() && self.noise_sd > 0.0) {
            return Err(Error::Invariant(format!(
                "noise_sd must be positive, got {}",
                self.noise_sd
            )));
        }
        match &self.size_source {
            SizeSource::Lognormal { mean, cv } => {
                if !(*mean > 0.0 && mean.is_finite()) || !(*cv > 0.0 && cv.is_finite()) {
                    return Err(Error::Invariant(format!(
                        "lognormal size source needs positive mean and cv, got ({mean}, {cv})"
                    )));
                }
            }
            SizeSource::Resample(values) => {
                if values.is_empty() {
                    return Err(Error::Invariant("size file is empty".into()));
                }
                if let Some(bad) = values.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
                    return Err(Error::Invariant(format!("size values must be positive, got {bad}")));
                }
            }
        }
        Ok(())
    }
}

/// A realized finite population of `(size, value)` units.
#[derive(Debug, Clone, PartialEq)]
pub struct FinitePopulation {
    sizes: Vec<f64>,
    values: Vec<f64>,
}

impl FinitePopulation {
    pub fn new(sizes: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if sizes.len() != values.len() {
            return Err(Error::Invariant(format!(
                "{} sizes but {} values",
                sizes.len(),
                values.len()
            )));
        }
        if sizes.is_empty() {
            return Err(Error::Invariant("population is empty".into()));
        }
        if let Some(bad) = sizes.iter().find(|x| !(x.is_finite() && **x > 0.0)) {
            return Err(Error::Invariant(format!("sizes must be positive, got {bad}")));
        }
        if let Some(bad) = values.iter().find(|y| !y.is_finite()) {
            return Err(Error::Invariant(format!("values must be finite, got {bad}")));
        }
        Ok(Self { sizes, values })
    }

    pub fn len(&self) -> usize {
        self.sizes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sizes.is_empty()
    }

    pub fn sizes(&self) -> &[f64] {
        &self.sizes
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// The target quantity: the arithmetic mean of the values, recomputed
    /// from the stored units on every call.
    pub fn true_mean(&self) -> f64 {
        compensated_sum(self.values.iter().copied()) / self.values.len() as f64
    }
}

/// Generate a population from the spec; deterministic given the seed.
pub fn generate_population(spec: &SyntheticPopulationSpec, seed: u64) -> Result<FinitePopulation> {
    spec.validate()?;
    let mut rng = substream(seed, [0, 0, 0]);
    let n = spec.population_size;

    let sizes: Vec<f64> = match &spec.size_source {
        SizeSource::Lognormal { mean, cv } => {
            let sigma2 = (1.0 + cv * cv).ln();
            let mu = mean.ln() - 0.5 * sigma2;
            let dist = LogNormal::new(mu, sigma2.sqrt())
                .map_err(|e| Error::Argument(format!("bad lognormal parameters: {e}")))?;
            (0..n)
                .map(|_| dist.sample(&mut rng).clamp(SIZE_CLIP.0, SIZE_CLIP.1))
                .collect()
        }
        SizeSource::Resample(values) => (0..n)
            .map(|_| values[rng.random_range(0..values.len())])
            .collect(),
    };

    let noise = Normal::new(0.0, spec.noise_sd)
        .map_err(|e| Error::Argument(format!("bad noise parameters: {e}")))?;
    let values: Vec<f64> = sizes
        .iter()
        .map(|&x| spec.intercept + spec.slope * x + noise.sample(&mut rng))
        .collect();

    FinitePopulation::new(sizes, values)
}

/// Diagnostics reported alongside a PPS draw.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PpsDiagnostics {
    /// Units selected with probability one.
    pub certainty_units: usize,
    /// Certainty units as a share of the sample size.
    pub certainty_share: f64,
}

impl PpsDiagnostics {
    /// True when more than 20% of the sample is certainty selections; the
    /// caller should treat the configuration as suspect.
    pub fn excessive_certainty(&self) -> bool {
        self.certainty_share > 0.2
    }
}

/// Target inclusion probabilities for a PPS design of size `n`.
///
/// Probabilities are `n * x_i / sum(x)` with values at or above one moved to
/// a certainty set (probability exactly one) and the remainder rescaled until
/// no further unit crosses one. Returns the probabilities and the number of
/// certainty units.
pub fn pps_inclusion_probabilities(sizes: &[f64], n: usize) -> Result<(Vec<f64>, usize)> {
    if n == 0 || n >= sizes.len() {
        return Err(Error::Argument(format!(
            "PPS needs 0 < n < N, got n = {n}, N = {}",
            sizes.len()
        )));
    }
    let mut probs = vec![0.0f64; sizes.len()];
    let mut certain = vec![false; sizes.len()];
    let mut certainty_count = 0usize;
    loop {
        let remaining_n = n - certainty_count;
        if remaining_n == 0 {
            break;
        }
        let active_total = compensated_sum(
            sizes
                .iter()
                .zip(&certain)
                .filter(|(_, &c)| !c)
                .map(|(&x, _)| x),
        );
        let mut promoted = false;
        for i in 0..sizes.len() {
            if certain[i] {
                continue;
            }
            let p = remaining_n as f64 * sizes[i] / active_total;
            if p >= 1.0 {
                certain[i] = true;
                probs[i] = 1.0;
                certainty_count += 1;
                promoted = true;
            } else {
                probs[i] = p;
            }
        }
        if !promoted {
            break;
        }
        if certainty_count >= n {
            return Err(Error::Argument(format!(
                "PPS degenerate: {certainty_count} certainty units fill the whole sample of {n}"
            )));
        }
    }
    Ok((probs, certainty_count))
}

/// Draw a without-replacement PPS sample of size `n`.
///
/// Certainty units (inclusion probability clipped to one) enter with weight
/// one; the rest are selected by systematic sampling on a randomly permuted
/// list, so each unit's inclusion probability equals its target exactly.
pub fn draw_pps(
    pop: &FinitePopulation,
    n: usize,
    rng: &mut impl Rng,
) -> Result<(WeightedSample, PpsDiagnostics)> {
    let (probs, certainty_count) = pps_inclusion_probabilities(pop.sizes(), n)?;

    let mut selected: Vec<usize> = Vec::with_capacity(n);
    let mut active: Vec<usize> = Vec::with_capacity(pop.len());
    for (i, &p) in probs.iter().enumerate() {
        if p >= 1.0 {
            selected.push(i);
        } else {
            active.push(i);
        }
    }
    active.shuffle(rng);

    let remaining_n = n - certainty_count;
    if remaining_n > 0 {
        let start: f64 = rng.random::<f64>();
        let mut cumulative = 0.0;
        let mut next_hit = start;
        for &i in &active {
            cumulative += probs[i];
            while next_hit < cumulative {
                selected.push(i);
                next_hit += 1.0;
            }
        }
        // Guard against the cumulative total landing a hair under the last
        // grid point through rounding.
        while selected.len() < n {
            selected.push(*active.last().expect("active units exist"));
        }
    }

    let records = selected
        .iter()
        .map(|&i| UnitRecord::new(1.0 / probs[i], vec![pop.values()[i]]))
        .collect::<Result<Vec<_>>>()?;
    let sample = WeightedSample::new(records, pop.len())?;
    let diagnostics = PpsDiagnostics {
        certainty_units: certainty_count,
        certainty_share: certainty_count as f64 / n as f64,
    };
    Ok((sample, diagnostics))
}

/// Draw a uniform without-replacement sample of size `n`; every weight is
/// `N / n`.
pub fn draw_srs(pop: &FinitePopulation, n: usize, rng: &mut impl Rng) -> Result<WeightedSample> {
    if n >= pop.len() {
        return Err(Error::Argument(format!(
            "SRS needs n < N, got n = {n}, N = {}",
            pop.len()
        )));
    }
    if n < 2 {
        return Err(Error::Argument(format!("SRS needs n >= 2, got n = {n}")));
    }
    let indices = sample_indices_without_replacement(pop.len(), n, rng);
    let weight = pop.len() as f64 / n as f64;
    let records = indices
        .iter()
        .map(|&i| UnitRecord::new(weight, vec![pop.values()[i]]))
        .collect::<Result<Vec<_>>>()?;
    WeightedSample::new(records, pop.len())
}

/// Floyd's algorithm: a uniform without-replacement index sample, returned
/// sorted ascending.
pub(crate) fn sample_indices_without_replacement(
    population: usize,
    n: usize,
    rng: &mut impl Rng,
) -> Vec<usize> {
    debug_assert!(n <= population);
    let mut chosen = std::collections::HashSet::with_capacity(n);
    for j in (population - n)..population {
        let t = rng.random_range(0..=j);
        if !chosen.insert(t) {
            chosen.insert(j);
        }
    }
    let mut indices: Vec<usize> = chosen.into_iter().collect();
    indices.sort_unstable();
    indices
}

/// Unweighted sample mean with variance `s^2 / n`; ignores the weights.
pub fn estimate_direct(sample: &WeightedSample, column: usize) -> Result<PointVariance> {
    sample.check_column(column)?;
    let moments = RunningMoments::from_iter(sample.column(column));
    PointVariance::new(
        moments.mean(),
        moments.sample_variance() / sample.len() as f64,
    )
}

/// Horvitz-Thompson estimator of the population mean with the
/// with-replacement variance approximation.
///
/// The variance treats the weighted draws as if sampled with replacement,
/// which is the standard approximation when inclusion probabilities are
/// small; it slightly overstates the without-replacement variance.
pub fn estimate_ht(sample: &WeightedSample, column: usize) -> Result<PointVariance> {
    sample.check_column(column)?;
    let n = sample.len() as f64;
    let big_n = sample.population_size() as f64;
    let weighted: Vec<f64> = sample
        .records()
        .iter()
        .map(|rec| rec.weight() * rec.values()[column])
        .collect();
    let total = compensated_sum(weighted.iter().copied());
    let estimate = total / big_n;
    let ss = compensated_sum(weighted.iter().map(|&z| {
        let d = n * z - total;
        d * d
    }));
    let variance = ss / (n * (n - 1.0) * big_n * big_n);
    PointVariance::new(estimate, variance)
}

/// Design-ignoring synthesis baseline: simulate `n` values from a normal with
/// the unweighted sample mean and standard deviation as plug-in parameters,
/// then report the simulated values' mean and `s^2 / n`.
pub fn estimate_srssyn(
    sample: &WeightedSample,
    column: usize,
    rng: &mut impl Rng,
) -> Result<PointVariance> {
    sample.check_column(column)?;
    let fit = RunningMoments::from_iter(sample.column(column));
    let sd = fit.sample_variance().sqrt();
    let n = sample.len();
    let draws = if sd > 0.0 {
        let dist = Normal::new(fit.mean(), sd)
            .map_err(|e| Error::Argument(format!("bad plug-in parameters: {e}")))?;
        RunningMoments::from_iter((0..n).map(|_| dist.sample(rng)))
    } else {
        RunningMoments::from_iter((0..n).map(|_| fit.mean()))
    };
    PointVariance::new(draws.mean(), draws.sample_variance() / n as f64)
}
