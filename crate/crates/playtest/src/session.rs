//! One human-vs-agent game and its tick logic, independent of any transport.

use std::time::Duration;

use skilldepth::agents::{act, AgentBudgets, AgentId};
use skilldepth::game::{Action, GameState, Outcome, Rules, Snapshot, WorldConfig};
use skilldepth::params::{decode, Genome, SearchSpace};
use skilldepth::{seed, Rng};

use crate::protocol::ServerMessage;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SessionConfig {
    pub world: WorldConfig,
    pub budgets: AgentBudgets,
    pub tick_interval: Duration,
    /// Advance exactly one tick per received action instead of on a timer.
    pub lockstep: bool,
    /// How long a disconnected session stays resumable.
    pub grace: Duration,
}

impl Default for SessionConfig {
    fn default() -> Self {
        let mut budgets = AgentBudgets::default();
        budgets.mcts.iterations = 100;
        Self {
            world: WorldConfig::default(),
            budgets,
            tick_interval: Duration::from_millis(40),
            lockstep: false,
            grace: Duration::from_secs(60),
        }
    }
}

/// What one tick produced: the new state and, when the game just ended, the result.
#[derive(Debug, Clone, PartialEq)]
pub struct TickOutput {
    pub state: Snapshot,
    pub result: Option<ServerMessage>,
}

impl TickOutput {
    pub fn messages(&self) -> impl Iterator<Item = ServerMessage> + '_ {
        std::iter::once(ServerMessage::State(self.state.clone())).chain(self.result.clone())
    }
}

#[derive(Debug, Clone)]
pub struct Session {
    rules: Rules,
    state: GameState,
    human: usize,
    enemy: AgentId,
    budgets: AgentBudgets,
    pending: Option<Action>,
    rng: Rng,
    seed: u64,
}

impl Session {
    /// `human_side` is 1 or 2. The enemy defaults to the genome's own enemy gene.
    pub fn new(
        genome: &Genome,
        space: &SearchSpace,
        human_side: u8,
        enemy: Option<AgentId>,
        game_seed: u64,
        cfg: &SessionConfig,
    ) -> Result<Self> {
        let human = match human_side {
            1 | 2 => usize::from(human_side - 1),
            _ => return Err(Error::Protocol(format!("humanSide must be 1 or 2, got {human_side}"))),
        };
        cfg.world.validate()?;
        cfg.budgets.validate()?;
        let params = decode(genome, space)?;
        let enemy = enemy.unwrap_or(params.enemy);
        let rules = Rules::new(params, cfg.world.clone());
        let state = rules.init(game_seed);
        Ok(Self {
            rules,
            state,
            human,
            enemy,
            budgets: cfg.budgets.clone(),
            pending: None,
            rng: seed::rng(seed::derive(&[game_seed, 2])),
            seed: game_seed,
        })
    }

    pub fn enemy(&self) -> AgentId {
        self.enemy
    }

    pub fn human_side(&self) -> u8 {
        self.human as u8 + 1
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn tick(&self) -> u32 {
        self.state.tick
    }

    pub fn snapshot(&self) -> Snapshot {
        Snapshot::of(&self.state, &self.rules.world)
    }

    pub fn outcome(&self) -> Option<Outcome> {
        self.rules.outcome(&self.state)
    }

    pub fn is_over(&self) -> bool {
        self.outcome().is_some()
    }

    /// Replaces any action not yet consumed; the latest one wins.
    pub fn submit(&mut self, action: Action) {
        self.pending = Some(action);
    }

    /// Consumes the pending human action (no-op if none), asks the enemy,
    /// and advances one step.
    pub fn advance(&mut self) -> Result<TickOutput> {
        if self.is_over() {
            return Err(Error::Finished);
        }
        let human = self.pending.take().unwrap_or(Action::NOOP);
        let enemy_side = 1 - self.human;
        let enemy = act(
            self.enemy,
            &self.rules,
            &self.state,
            enemy_side,
            &self.budgets,
            &mut self.rng,
        )?;
        let mut actions = [Action::NOOP; 2];
        actions[self.human] = human;
        actions[enemy_side] = enemy;
        self.rules.step_in_place(&mut self.state, actions)?;
        let result = self.outcome().map(|o| ServerMessage::Result {
            winner: o.winner().map(|w| w as u8 + 1),
            tick: self.state.tick,
            scores: [self.state.ships[0].score, self.state.ships[1].score],
        });
        Ok(TickOutput {
            state: self.snapshot(),
            result,
        })
    }

    /// Plays a scripted sequence of human actions, one per tick, stopping early
    /// if the game ends.
    pub fn play_script(&mut self, script: &[Action]) -> Result<Vec<TickOutput>> {
        let mut out = Vec::with_capacity(script.len());
        for &a in script {
            if self.is_over() {
                break;
            }
            self.submit(a);
            out.push(self.advance()?);
        }
        Ok(out)
    }
}
