//! Game-playing controllers.
//!
//! Every agent sees the full state and may use the forward model
//! ([`Rules::step_in_place`] on a cloned [`GameState`]). Search agents run
//! on fixed iteration budgets rather than wall-clock limits so games are
//! reproducible from a seed.

mod mcts;
mod mea;

use std::fmt;
use std::str::FromStr;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

pub use mcts::{mcts_search, MctsConfig, MctsResult};
pub use mea::MeaConfig;

use crate::game::{is_terminal, Action, GameState, Outcome, Rules, Turn, WorldConfig};
use crate::{Error, Result, Rng};

/// Bonus (or penalty) added to the score difference in finished games.
pub const TERMINAL_BONUS: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AgentId {
    DoNothing = 0,
    Random = 1,
    Osla = 2,
    Ras = 3,
    Mcts = 4,
    Mea = 5,
}

impl AgentId {
    pub const ALL: [AgentId; 6] = [
        AgentId::DoNothing,
        AgentId::Random,
        AgentId::Osla,
        AgentId::Ras,
        AgentId::Mcts,
        AgentId::Mea,
    ];

    pub fn from_index(i: u8) -> Result<Self> {
        Self::ALL.get(usize::from(i)).copied().ok_or(Error::UnknownAgent(i))
    }

    pub fn index(self) -> u8 {
        self as u8
    }

    pub fn name(self) -> &'static str {
        match self {
            AgentId::DoNothing => "DoNothing",
            AgentId::Random => "Random",
            AgentId::Osla => "OSLA",
            AgentId::Ras => "RAS",
            AgentId::Mcts => "MCTS",
            AgentId::Mea => "MEA",
        }
    }
}

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AgentId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if let Ok(i) = s.parse::<u8>() {
            return Self::from_index(i);
        }
        Self::ALL
            .into_iter()
            .find(|a| a.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Parse(format!("unknown agent {s:?}")))
    }
}

/// Search budgets for the agents that plan.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AgentBudgets {
    pub mcts: MctsConfig,
    pub mea: MeaConfig,
}

impl AgentBudgets {
    pub fn validate(&self) -> Result<()> {
        self.mcts.validate()?;
        self.mea.validate()
    }
}

/// Own score minus the opponent's, plus [`TERMINAL_BONUS`] for a won finished
/// game and minus it for a lost one.
pub fn heuristic_value(state: &GameState, player: usize, world: &WorldConfig) -> f64 {
    let own = state.ships[player].score as f64;
    let other = state.ships[1 - player].score as f64;
    let bonus = match is_terminal(state, world) {
        Some(Outcome::Winner(w)) if w == player => TERMINAL_BONUS,
        Some(Outcome::Winner(_)) => -TERMINAL_BONUS,
        Some(Outcome::Draw) | None => 0.0,
    };
    own - other + bonus
}

/// Visit statistics of one bandit arm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArmStats {
    pub q: f64,
    pub n: u32,
}

/// UCB1 arm choice: `argmax q + c·sqrt(ln N / n)`. Unvisited arms come first;
/// ties go to the lowest index.
pub fn ucb1_select(children: &[ArmStats], total_n: u32, c: f64) -> Result<usize> {
    if children.is_empty() {
        return Err(Error::EmptyChildren);
    }
    if let Some(i) = children.iter().position(|a| a.n == 0) {
        return Ok(i);
    }
    let ln_n = f64::from(total_n.max(1)).ln();
    let mut best = 0;
    let mut best_value = f64::NEG_INFINITY;
    for (i, a) in children.iter().enumerate() {
        let v = a.q + c * (ln_n / f64::from(a.n)).sqrt();
        if v > best_value {
            best = i;
            best_value = v;
        }
    }
    Ok(best)
}

/// Rotate-and-shoot's fixed action.
pub const RAS_ACTION: Action = Action {
    turn: Turn::Clockwise,
    thrust: false,
    shoot: true,
};

pub fn random_action(rng: &mut Rng) -> Action {
    Action::from_index(rng.random_range(0..Action::COUNT))
}

/// Orders a player's action and the opponent's into the `[p1, p2]` pair.
pub(crate) fn joint(player: usize, own: Action, other: Action) -> [Action; 2] {
    if player == 0 {
        [own, other]
    } else {
        [other, own]
    }
}

/// Picks `agent`'s action for `player` in `state`.
pub fn act(
    agent: AgentId,
    rules: &Rules,
    state: &GameState,
    player: usize,
    budgets: &AgentBudgets,
    rng: &mut Rng,
) -> Result<Action> {
    if rules.outcome(state).is_some() {
        return Err(Error::TerminalState { tick: state.tick });
    }
    Ok(match agent {
        AgentId::DoNothing => Action::NOOP,
        AgentId::Random => random_action(rng),
        AgentId::Osla => one_step_lookahead(rules, state, player)?,
        AgentId::Ras => RAS_ACTION,
        AgentId::Mcts => mcts_search(rules, state, player, &budgets.mcts, rng)?.action,
        AgentId::Mea => mea::plan(rules, state, player, &budgets.mea, rng)?,
    })
}

/// Simulates every action one tick against an idle opponent and keeps the
/// best by [`heuristic_value`], lowest index on ties.
pub fn one_step_lookahead(rules: &Rules, state: &GameState, player: usize) -> Result<Action> {
    let mut best = Action::NOOP;
    let mut best_value = f64::NEG_INFINITY;
    for a in Action::all() {
        let mut next = state.clone();
        rules.step_in_place(&mut next, joint(player, a, Action::NOOP))?;
        let v = heuristic_value(&next, player, &rules.world);
        if v > best_value {
            best = a;
            best_value = v;
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests;
