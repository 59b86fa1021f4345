use serde::{Deserialize, Serialize};

use super::{EvalRecord, EvolutionTrace};
use crate::fitness::Evaluator;
use crate::params::{mutate, random_genome, Genome, SearchSpace};
use crate::{Error, Result, Rng};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RmhcConfig {
    /// Re-evaluate the parent every generation (two calls per generation)
    /// instead of trusting its first recorded fitness.
    pub resample_parent: bool,
}

/// Random mutation hill climber: one random gene per generation, offspring
/// kept when its fitness is at least the incumbent's recorded fitness.
///
/// Consumes exactly `n_evals` evaluator calls, plus one setup call for the
/// initial parent that is reported in [`EvolutionTrace::setup_evals`].
pub fn rmhc_run<E: Evaluator>(
    space: &SearchSpace,
    evaluator: &mut E,
    n_evals: usize,
    rng: &mut Rng,
    cfg: &RmhcConfig,
) -> Result<EvolutionTrace> {
    hill_climb(space, evaluator, n_evals, rng, cfg.resample_parent, |_, rng| {
        Ok(rand::Rng::random_range(rng, 0..space.len()))
    })
}

/// Shared (1+1) loop; `pick_gene` chooses which gene to mutate.
pub(super) fn hill_climb<E, F>(
    space: &SearchSpace,
    evaluator: &mut E,
    n_evals: usize,
    rng: &mut Rng,
    resample_parent: bool,
    mut pick_gene: F,
) -> Result<EvolutionTrace>
where
    E: Evaluator,
    F: FnMut(&Genome, &mut Rng) -> Result<usize>,
{
    if n_evals == 0 {
        return Err(Error::Config("nEvals must be at least 1".into()));
    }
    let mut current = random_genome(space, rng);
    let mut best = evaluator.evaluate(&current)?;
    let mut records = Vec::with_capacity(n_evals);

    while records.len() < n_evals {
        if resample_parent && n_evals - records.len() >= 2 {
            best = evaluator.evaluate(&current)?;
            records.push(EvalRecord {
                eval_index: records.len(),
                genome: current.clone(),
                fitness: best,
                best_so_far: best,
            });
        }
        let gene = pick_gene(&current, rng)?;
        let child = mutate(&current, space, rng, Some(gene))?;
        let fitness = evaluator.evaluate(&child)?;
        if fitness >= best {
            current = child.clone();
            best = fitness;
        }
        records.push(EvalRecord {
            eval_index: records.len(),
            genome: child,
            fitness,
            best_so_far: best,
        });
    }
    Ok(EvolutionTrace {
        records,
        final_genome: current,
        setup_evals: 1,
    })
}
