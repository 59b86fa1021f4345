//! Cheap separable fitness landscapes for testing the optimizers without
//! playing games.

use rand_distr::{Distribution, Normal};

use crate::fitness::Evaluator;
use crate::params::{Genome, SearchSpace};
use crate::{seed, Error, Result, Rng};

/// `f(genome) = Σ weights[g] · levels[g]`, optionally plus Gaussian noise.
#[derive(Debug, Clone)]
pub struct Surrogate {
    weights: Vec<f64>,
    noise: Option<(Normal<f64>, Rng)>,
}

impl Surrogate {
    pub fn from_weights(weights: Vec<f64>) -> Self {
        Self { weights, noise: None }
    }

    /// Sum of raw levels.
    pub fn level_sum(space: &SearchSpace) -> Self {
        Self::scaled_level_sum(space, 1.0)
    }

    /// `weight` times the sum of raw levels.
    pub fn scaled_level_sum(space: &SearchSpace, weight: f64) -> Self {
        Self::from_weights(vec![weight; space.len()])
    }

    /// Sum of levels scaled to [0, 1] per gene, so every gene is worth the same.
    pub fn normalized(space: &SearchSpace) -> Self {
        Self::from_weights(space.arities().iter().map(|&a| 1.0 / (a - 1) as f64).collect())
    }

    /// Only `gene` matters.
    pub fn single_gene(space: &SearchSpace, gene: usize, scale: f64) -> Self {
        let mut w = vec![0.0; space.len()];
        w[gene] = scale;
        Self::from_weights(w)
    }

    pub fn with_noise(mut self, sd: f64, noise_seed: u64) -> Result<Self> {
        let normal = Normal::new(0.0, sd).map_err(|e| Error::Config(format!("noise sd {sd}: {e}")))?;
        self.noise = Some((normal, seed::rng(noise_seed)));
        Ok(self)
    }

    /// Noise-free value.
    pub fn true_value(&self, genome: &Genome) -> f64 {
        self.weights
            .iter()
            .zip(&genome.levels)
            .map(|(w, &l)| w * f64::from(l))
            .sum()
    }
}

impl Evaluator for Surrogate {
    fn evaluate(&mut self, genome: &Genome) -> Result<f64> {
        let v = self.true_value(genome);
        Ok(match &mut self.noise {
            Some((normal, rng)) => v + normal.sample(rng),
            None => v,
        })
    }
}
