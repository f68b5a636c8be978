//! Synthesis models fitted to pseudo-samples and the release assembly step.
//!
//! Two univariate normal synthesizers ship. `NormalBayes` draws from the
//! posterior predictive under the diffuse prior p(mu, sigma^2) ~ 1/sigma^2:
//! sigma^2 from its scaled inverse chi-square posterior, mu from
//! N(mean, sigma^2 / n), then the synthetic values. Replicates therefore
//! carry parameter uncertainty, which the combining rules presume.
//! `NormalPlugin` fixes (mean, variance) at the sample estimates and is
//! provided for comparison experiments.
//!
//! Downstream code depends only on the fit/generate contract, so other
//! synthesizers can slot in behind [`SynthesizerSpec`].

use rand::Rng;
use rand_distr::{ChiSquared, Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::moments::RunningMoments;
use crate::rng::{substream, unit_tag};
use crate::types::{ReplicateRow, ReplicateSet, Variant, WeightedSample};

/// Which synthesis model to fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SynthesizerKind {
    /// Posterior-predictive draws under the diffuse normal prior.
    #[serde(rename = "normal-bayes")]
    NormalBayes,
    /// Plug-in normal with the sample mean and variance.
    #[serde(rename = "normal-plugin")]
    NormalPlugin,
}

impl std::fmt::Display for SynthesizerKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SynthesizerKind::NormalBayes => write!(f, "normal-bayes"),
            SynthesizerKind::NormalPlugin => write!(f, "normal-plugin"),
        }
    }
}

/// A synthesis model bound to one analysis column.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SynthesizerSpec {
    pub kind: SynthesizerKind,
    pub column: usize,
}

/// Sufficient statistics of a fitted synthesizer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FittedSynthesizer {
    kind: SynthesizerKind,
    n_fit: usize,
    mean: f64,
    variance: f64,
}

impl FittedSynthesizer {
    pub fn kind(&self) -> SynthesizerKind {
        self.kind
    }

    pub fn n_fit(&self) -> usize {
        self.n_fit
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased sample variance of the fitted column.
    pub fn variance(&self) -> f64 {
        self.variance
    }

    /// A constant fitted column collapses the model to a point mass.
    pub fn degenerate(&self) -> bool {
        self.variance == 0.0
    }
}

/// Fit the model: store the unweighted mean and variance of the chosen
/// column. A constant column fits successfully with variance zero; the
/// degenerate flag is queryable on the result.
pub fn fit(spec: &SynthesizerSpec, data: &[Vec<f64>]) -> Result<FittedSynthesizer> {
    if data.len() < 2 {
        return Err(Error::Argument(format!(
            "synthesizer fit needs at least 2 rows, got {}",
            data.len()
        )));
    }
    if data.iter().any(|row| spec.column >= row.len()) {
        return Err(Error::Argument(format!(
            "column index {} out of range",
            spec.column
        )));
    }
    let moments = RunningMoments::from_iter(data.iter().map(|row| row[spec.column]));
    Ok(FittedSynthesizer {
        kind: spec.kind,
        n_fit: data.len(),
        mean: moments.mean(),
        variance: moments.sample_variance(),
    })
}

/// Draw `n` synthetic values from the fitted model as single-column rows.
///
/// A degenerate model (zero fitted variance) emits the mean for every row.
pub fn generate(model: &FittedSynthesizer, n: usize, rng: &mut impl Rng) -> Vec<Vec<f64>> {
    if model.degenerate() {
        return vec![vec![model.mean]; n];
    }
    match model.kind {
        SynthesizerKind::NormalBayes => {
            let df = (model.n_fit - 1) as f64;
            let chi = ChiSquared::new(df).expect("df >= 1 by construction");
            let sigma2 = df * model.variance / chi.sample(rng);
            let sigma = sigma2.sqrt();
            let mu = model.mean + sigma / (model.n_fit as f64).sqrt() * rng.sample::<f64, _>(StandardNormal);
            let dist = Normal::new(mu, sigma).expect("sigma is finite and positive");
            (0..n).map(|_| vec![dist.sample(rng)]).collect()
        }
        SynthesizerKind::NormalPlugin => {
            let dist = Normal::new(model.mean, model.variance.sqrt())
                .expect("variance is finite and positive");
            (0..n).map(|_| vec![dist.sample(rng)]).collect()
        }
    }
}

/// Assemble the released set: for each pseudo-sample fit once, then draw the
/// replicates with independent substreams keyed by (m, r).
///
/// `replicates` is the per-group count R; it must be 1 for
/// [`Variant::SynRep1`] and at least 2 for [`Variant::SynRepR`]. Only the
/// synthesized column is released.
pub fn synthesize_release(
    pseudo_samples: &[Vec<Vec<f64>>],
    variant: Variant,
    replicates: usize,
    spec: &SynthesizerSpec,
    sample: &WeightedSample,
    column_name: &str,
    seed: u64,
) -> Result<ReplicateSet> {
    let groups = pseudo_samples.len();
    let n = sample.len();
    let mut rows = Vec::with_capacity(groups * replicates * n);
    for (index, data) in pseudo_samples.iter().enumerate() {
        let m = index + 1;
        if data.len() != n {
            return Err(Error::Argument(format!(
                "pseudo-sample {m} has {} rows, expected n = {n}",
                data.len()
            )));
        }
        let model = fit(spec, data)?;
        for r in 1..=replicates {
            let mut rng = substream(seed, [unit_tag(0, m, r), 0, 0]);
            for values in generate(&model, n, &mut rng) {
                rows.push(ReplicateRow { m, r, values });
            }
        }
    }
    ReplicateSet::new(
        variant,
        groups,
        replicates,
        n,
        sample.population_size(),
        vec![column_name.to_string()],
        rows,
    )
}
