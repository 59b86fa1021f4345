//! Rolling-horizon microbial EA over fixed-length action sequences.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::{heuristic_value, joint, random_action};
use crate::game::{Action, GameState, Rules};
use crate::{Error, Result, Rng};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeaConfig {
    pub pop_size: usize,
    pub seq_length: usize,
    /// Sequence evaluations per decision, initial population included.
    pub evals: usize,
    /// Per-gene probability of taking the winner's gene during crossover.
    pub crossover_rate: f64,
}

impl Default for MeaConfig {
    fn default() -> Self {
        Self {
            pop_size: 10,
            seq_length: 10,
            evals: 500,
            crossover_rate: 0.5,
        }
    }
}

impl MeaConfig {
    pub fn validate(&self) -> Result<()> {
        if self.pop_size < 2 || self.seq_length == 0 || self.evals == 0 {
            return Err(Error::Config(
                "mea.popSize must be >= 2, mea.seqLength and mea.evals >= 1".into(),
            ));
        }
        Ok(())
    }
}

struct Plan {
    actions: Vec<Action>,
    fitness: f64,
}

/// Plays the sequence against an idle opponent and scores the final state.
fn evaluate(rules: &Rules, root: &GameState, player: usize, actions: &[Action]) -> Result<f64> {
    let mut state = root.clone();
    for &a in actions {
        if rules.outcome(&state).is_some() {
            break;
        }
        rules.step_in_place(&mut state, joint(player, a, Action::NOOP))?;
    }
    Ok(heuristic_value(&state, player, &rules.world))
}

pub(super) fn plan(rules: &Rules, root: &GameState, player: usize, cfg: &MeaConfig, rng: &mut Rng) -> Result<Action> {
    cfg.validate()?;
    let mut pop = Vec::with_capacity(cfg.pop_size);
    for _ in 0..cfg.pop_size {
        let actions: Vec<Action> = (0..cfg.seq_length).map(|_| random_action(rng)).collect();
        let fitness = evaluate(rules, root, player, &actions)?;
        pop.push(Plan { actions, fitness });
    }
    let mut used = cfg.pop_size;
    while used < cfg.evals {
        let i = rng.random_range(0..pop.len());
        let mut j = rng.random_range(0..pop.len() - 1);
        if j >= i {
            j += 1;
        }
        let (winner, loser) = if pop[i].fitness >= pop[j].fitness {
            (i, j)
        } else {
            (j, i)
        };
        let mut child = pop[loser].actions.clone();
        for (k, gene) in child.iter_mut().enumerate() {
            if rng.random_bool(cfg.crossover_rate) {
                *gene = pop[winner].actions[k];
            }
        }
        let k = rng.random_range(0..child.len());
        child[k] = random_action(rng);
        let fitness = evaluate(rules, root, player, &child)?;
        pop[loser] = Plan {
            actions: child,
            fitness,
        };
        used += 1;
    }
    let best = pop
        .iter()
        .enumerate()
        .fold(0, |b, (i, p)| if p.fitness > pop[b].fitness { i } else { b });
    Ok(pop[best].actions[0])
}
