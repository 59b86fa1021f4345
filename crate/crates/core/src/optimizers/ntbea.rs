use rand::seq::IndexedRandom;
use serde::{Deserialize, Serialize};

use super::{EvalRecord, EvolutionTrace, NTupleModel};
use crate::fitness::Evaluator;
use crate::params::{neighbours, random_genome, Genome, SearchSpace};
use crate::{Error, Result, Rng};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NtbeaConfig {
    /// Neighbours proposed per iteration.
    pub k: usize,
    /// Exploration constant of the model's UCB.
    pub c: f64,
}

impl Default for NtbeaConfig {
    fn default() -> Self {
        Self { k: 30, c: 1.0 }
    }
}

#[derive(Debug, Clone)]
pub struct NtbeaRun {
    /// `final_genome` is the recommendation.
    pub trace: EvolutionTrace,
    pub model: NTupleModel,
}

/// N-tuple bandit EA: evaluate the current point once, fold it into the
/// model, then move to the neighbour with the highest model UCB.
pub fn ntbea_run<E: Evaluator>(
    space: &SearchSpace,
    evaluator: &mut E,
    n_evals: usize,
    rng: &mut Rng,
    cfg: &NtbeaConfig,
) -> Result<NtbeaRun> {
    if n_evals == 0 {
        return Err(Error::Config("nEvals must be at least 1".into()));
    }
    if cfg.k == 0 {
        return Err(Error::Config("ntbea.k must be at least 1".into()));
    }
    let mut model = NTupleModel::new(space.len());
    let mut current = random_genome(space, rng);
    let mut evaluated: Vec<Genome> = Vec::with_capacity(n_evals);
    let mut records = Vec::with_capacity(n_evals);
    let mut proposals = Vec::new();

    for i in 0..n_evals {
        let fitness = evaluator.evaluate(&current)?;
        model.add(&current, fitness)?;
        if !evaluated.contains(&current) {
            evaluated.push(current.clone());
        }
        let mut best_so_far = f64::NEG_INFINITY;
        for g in &evaluated {
            best_so_far = best_so_far.max(model.mean_estimate(g)?);
        }
        records.push(EvalRecord {
            eval_index: i,
            genome: current.clone(),
            fitness,
            best_so_far,
        });

        proposals = neighbours(&current, space, cfg.k, rng);
        let scores = proposals
            .iter()
            .map(|n| model.ucb(n, cfg.c))
            .collect::<Result<Vec<_>>>()?;
        let top = scores.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v));
        let best: Vec<usize> = (0..scores.len()).filter(|&j| near(scores[j], top)).collect();
        let &pick = best.choose(rng).ok_or(Error::EmptyChildren)?;
        current = proposals[pick].clone();
    }

    let final_genome = recommend(&model, evaluated.iter().chain(proposals.iter()))?;
    Ok(NtbeaRun {
        trace: EvolutionTrace {
            records,
            final_genome,
            setup_evals: 0,
        },
        model,
    })
}

/// Highest mean estimate among `candidates`; earliest wins ties.
fn recommend<'a>(model: &NTupleModel, candidates: impl Iterator<Item = &'a Genome>) -> Result<Genome> {
    let mut best: Option<(&Genome, f64)> = None;
    for g in candidates {
        let v = model.mean_estimate(g)?;
        if best.is_none_or(|(_, b)| v > b && !near(v, b)) {
            best = Some((g, v));
        }
    }
    best.map(|(g, _)| g.clone()).ok_or(Error::EmptyChildren)
}

/// Equal up to summation rounding; averaging 31 terms in a different order
/// must not turn a tie into a preference.
fn near(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}
