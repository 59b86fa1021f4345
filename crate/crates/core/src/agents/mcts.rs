use serde::{Deserialize, Serialize};

use super::{heuristic_value, joint, random_action, ucb1_select, ArmStats};
use crate::game::{Action, GameState, Rules};
use crate::{Error, Result, Rng};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MctsConfig {
    pub iterations: u32,
    /// Ticks simulated per iteration, tree descent included.
    pub rollout_depth: u32,
    pub c: f64,
    /// Score difference mapped to 0.73 by the logistic squash.
    pub value_scale: f64,
}

impl Default for MctsConfig {
    fn default() -> Self {
        Self {
            iterations: 500,
            rollout_depth: 20,
            c: std::f64::consts::SQRT_2,
            value_scale: 100.0,
        }
    }
}

impl MctsConfig {
    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 || self.rollout_depth == 0 {
            return Err(Error::Config(
                "mcts.iterations and mcts.rolloutDepth must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MctsResult {
    pub action: Action,
    /// Root visit count per action index.
    pub root_visits: [u32; Action::COUNT],
    pub root_values: [f64; Action::COUNT],
}

struct Node {
    children: [Option<u32>; Action::COUNT],
    visits: u32,
    total: f64,
}

impl Node {
    fn new() -> Self {
        Self {
            children: [None; Action::COUNT],
            visits: 0,
            total: 0.0,
        }
    }
}

fn squash(delta: f64, scale: f64) -> f64 {
    1.0 / (1.0 + (-delta / scale).exp())
}

/// Open-loop UCT over the searching player's own actions. The opponent is
/// modelled as uniformly random both in the tree and in rollouts. Rollout
/// values are the change in [`heuristic_value`] since the root, squashed to
/// (0, 1). Returns the most visited root action.
pub fn mcts_search(
    rules: &Rules,
    root: &GameState,
    player: usize,
    cfg: &MctsConfig,
    rng: &mut Rng,
) -> Result<MctsResult> {
    cfg.validate()?;
    let base = heuristic_value(root, player, &rules.world);
    let mut nodes = vec![Node::new()];
    let mut path: Vec<u32> = Vec::with_capacity(cfg.rollout_depth as usize + 1);
    let mut arms = [ArmStats { q: 0.0, n: 0 }; Action::COUNT];

    for _ in 0..cfg.iterations {
        let mut state = root.clone();
        let mut node = 0u32;
        let mut depth = 0;
        path.clear();
        path.push(0);

        // selection and expansion
        while depth < cfg.rollout_depth && rules.outcome(&state).is_none() {
            let n = &nodes[node as usize];
            for (arm, child) in arms.iter_mut().zip(n.children) {
                *arm = match child {
                    Some(c) => {
                        let c = &nodes[c as usize];
                        ArmStats {
                            q: c.total / f64::from(c.visits),
                            n: c.visits,
                        }
                    }
                    None => ArmStats { q: 0.0, n: 0 },
                };
            }
            let a = ucb1_select(&arms, n.visits, cfg.c)?;
            let expanded = n.children[a].is_none();
            let child = match n.children[a] {
                Some(c) => c,
                None => {
                    nodes.push(Node::new());
                    let id = (nodes.len() - 1) as u32;
                    nodes[node as usize].children[a] = Some(id);
                    id
                }
            };
            let other = random_action(rng);
            rules.step_in_place(&mut state, joint(player, Action::from_index(a), other))?;
            depth += 1;
            node = child;
            path.push(node);
            if expanded {
                break;
            }
        }

        // rollout
        while depth < cfg.rollout_depth && rules.outcome(&state).is_none() {
            let own = random_action(rng);
            let other = random_action(rng);
            rules.step_in_place(&mut state, joint(player, own, other))?;
            depth += 1;
        }

        let value = squash(heuristic_value(&state, player, &rules.world) - base, cfg.value_scale);
        for &id in &path {
            let n = &mut nodes[id as usize];
            n.visits += 1;
            n.total += value;
        }
    }

    let mut root_visits = [0u32; Action::COUNT];
    let mut root_values = [0.0; Action::COUNT];
    for (i, child) in nodes[0].children.iter().enumerate() {
        if let Some(c) = child {
            let c = &nodes[*c as usize];
            root_visits[i] = c.visits;
            root_values[i] = c.total / f64::from(c.visits);
        }
    }
    let mut best = 0;
    for i in 1..Action::COUNT {
        if root_visits[i] > root_visits[best] {
            best = i;
        }
    }
    Ok(MctsResult {
        action: Action::from_index(best),
        root_visits,
        root_values,
    })
}
