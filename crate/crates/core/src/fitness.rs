//! Per-game score and skill-depth fitness.
//!
//! One fitness evaluation plays three games: a weak (one-step lookahead),
//! a medium (rotate-and-shoot) and a strong (MCTS) agent each face the
//! evolved enemy. Each game is reduced to a single score and the fitness is
//! the smallest gap in the ordering strong > medium > weak.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::agents::{act, AgentBudgets, AgentId};
use crate::game::{GameState, Outcome, Rules, WorldConfig, PLAYER_ONE, PLAYER_TWO};
use crate::params::{decode, Genome, SearchSpace};
use crate::{seed, Result};

/// The three skill levels, weakest first.
pub const SKILL_AGENTS: [AgentId; 3] = [AgentId::Osla, AgentId::Ras, AgentId::Mcts];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GameOutcome {
    pub s1: f64,
    pub s2: f64,
    /// 1000 for the winner, 0 otherwise.
    pub w1: f64,
    pub w2: f64,
}

impl GameOutcome {
    pub fn from_state(state: &GameState, outcome: Outcome, world: &WorldConfig) -> Self {
        let bonus = |p| {
            if outcome.winner() == Some(p) {
                world.win_bonus
            } else {
                0.0
            }
        };
        Self {
            s1: state.ships[PLAYER_ONE].score as f64,
            s2: state.ships[PLAYER_TWO].score as f64,
            w1: bonus(PLAYER_ONE),
            w2: bonus(PLAYER_TWO),
        }
    }

    pub fn swapped(self) -> Self {
        Self {
            s1: self.s2,
            s2: self.s1,
            w1: self.w2,
            w2: self.w1,
        }
    }
}

/// `(S1/100 + W1) - (S2/100 + W2)`.
pub fn game_score(o: &GameOutcome) -> f64 {
    (o.s1 / 100.0 + o.w1) - (o.s2 / 100.0 + o.w2)
}

/// `min(t3 - t2, t2 - t1)`; positive exactly when `t3 > t2 > t1`.
pub fn skill_depth(t1: f64, t2: f64, t3: f64) -> f64 {
    (t3 - t2).min(t2 - t1)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitnessResult {
    pub t1: f64,
    pub t2: f64,
    pub t3: f64,
    pub fitness: f64,
}

impl FitnessResult {
    pub fn from_scores(t1: f64, t2: f64, t3: f64) -> Self {
        Self {
            t1,
            t2,
            t3,
            fitness: skill_depth(t1, t2, t3),
        }
    }
}

/// Which side the skill agent plays.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SideMode {
    SkillFirst,
    SkillSecond,
    /// Play both sides and average; six games per evaluation.
    BothAveraged,
}

impl std::str::FromStr for SideMode {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "first" | "skill-first" => Ok(SideMode::SkillFirst),
            "second" | "skill-second" => Ok(SideMode::SkillSecond),
            "both" | "both-averaged" => Ok(SideMode::BothAveraged),
            _ => Err(crate::Error::Parse(format!("unknown side mode {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitnessConfig {
    pub world: WorldConfig,
    pub budgets: AgentBudgets,
    pub sides: SideMode,
}

impl Default for FitnessConfig {
    fn default() -> Self {
        Self {
            world: WorldConfig::default(),
            budgets: AgentBudgets::default(),
            sides: SideMode::SkillFirst,
        }
    }
}

/// Everything that happened in one played game.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameRecord {
    pub agents: [AgentId; 2],
    pub seed: u64,
    pub ticks: u32,
    pub outcome: Outcome,
    pub scores: GameOutcome,
    pub lives: [u32; 2],
    pub hits: [u32; 2],
    pub missiles_fired: [u32; 2],
}

/// Plays one full game between `agents[0]` (player one) and `agents[1]`.
pub fn play_game(rules: &Rules, agents: [AgentId; 2], budgets: &AgentBudgets, game_seed: u64) -> Result<GameRecord> {
    let mut state = rules.init(game_seed);
    let mut rngs = [
        seed::rng(seed::derive(&[game_seed, 1])),
        seed::rng(seed::derive(&[game_seed, 2])),
    ];
    let outcome = loop {
        if let Some(o) = rules.outcome(&state) {
            break o;
        }
        let [r1, r2] = &mut rngs;
        let a1 = act(agents[0], rules, &state, PLAYER_ONE, budgets, r1)?;
        let a2 = act(agents[1], rules, &state, PLAYER_TWO, budgets, r2)?;
        rules.step_in_place(&mut state, [a1, a2])?;
    };
    Ok(GameRecord {
        agents,
        seed: game_seed,
        ticks: state.tick,
        outcome,
        scores: GameOutcome::from_state(&state, outcome, &rules.world),
        lives: [state.ships[0].lives, state.ships[1].lives],
        hits: [state.ships[0].hits, state.ships[1].hits],
        missiles_fired: [state.ships[0].fired, state.ships[1].fired],
    })
}

/// One game of an evaluation: which skill level it measures and which side
/// the skill agent plays.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvaluationGame {
    pub level: usize,
    pub skill_side: usize,
    pub agents: [AgentId; 2],
}

/// The games one evaluation plays, in a fixed order.
pub fn evaluation_games(enemy: AgentId, sides: SideMode) -> Vec<EvaluationGame> {
    let mut games = Vec::new();
    for (level, &skill) in SKILL_AGENTS.iter().enumerate() {
        if matches!(sides, SideMode::SkillFirst | SideMode::BothAveraged) {
            games.push(EvaluationGame {
                level,
                skill_side: PLAYER_ONE,
                agents: [skill, enemy],
            });
        }
        if matches!(sides, SideMode::SkillSecond | SideMode::BothAveraged) {
            games.push(EvaluationGame {
                level,
                skill_side: PLAYER_TWO,
                agents: [enemy, skill],
            });
        }
    }
    games
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationRecord {
    pub game: EvaluationGame,
    pub record: GameRecord,
}

impl EvaluationRecord {
    /// Game score seen from the skill agent's side.
    pub fn skill_score(&self) -> f64 {
        if self.game.skill_side == PLAYER_ONE {
            game_score(&self.record.scores)
        } else {
            game_score(&self.record.scores.swapped())
        }
    }
}

/// Plays the evaluation games; game `i` is seeded with `derive(eval_seed, i)`.
pub fn play_evaluation(
    genome: &Genome,
    space: &SearchSpace,
    cfg: &FitnessConfig,
    eval_seed: u64,
) -> Result<Vec<EvaluationRecord>> {
    let params = decode(genome, space)?;
    let rules = Rules::new(params, cfg.world.clone());
    let games = evaluation_games(rules.params.enemy, cfg.sides);
    games
        .par_iter()
        .enumerate()
        .map(|(i, &game)| {
            let game_seed = seed::derive(&[eval_seed, i as u64]);
            play_game(&rules, game.agents, &cfg.budgets, game_seed).map(|record| EvaluationRecord { game, record })
        })
        .collect()
}

/// Decodes the genome, plays the evaluation games and combines them.
pub fn evaluate(genome: &Genome, space: &SearchSpace, cfg: &FitnessConfig, eval_seed: u64) -> Result<FitnessResult> {
    Ok(combine(&play_evaluation(genome, space, cfg, eval_seed)?))
}

/// Averages the skill scores per level and applies [`skill_depth`].
pub fn combine(records: &[EvaluationRecord]) -> FitnessResult {
    let mut sum = [0.0; 3];
    let mut count = [0u32; 3];
    for r in records {
        sum[r.game.level] += r.skill_score();
        count[r.game.level] += 1;
    }
    let t = |l: usize| {
        if count[l] == 0 {
            0.0
        } else {
            sum[l] / f64::from(count[l])
        }
    };
    FitnessResult::from_scores(t(0), t(1), t(2))
}

/// Anything that can score a genome; optimizers only see this.
pub trait Evaluator {
    fn evaluate(&mut self, genome: &Genome) -> Result<f64>;
}

impl<E: Evaluator + ?Sized> Evaluator for &mut E {
    fn evaluate(&mut self, genome: &Genome) -> Result<f64> {
        (**self).evaluate(genome)
    }
}

/// Game-playing evaluator. Call `i` uses seed `derive(base_seed, i)`, so a
/// run is reproducible while every call sees fresh game noise.
#[derive(Debug, Clone)]
pub struct GameEvaluator {
    pub space: SearchSpace,
    pub cfg: FitnessConfig,
    pub base_seed: u64,
    calls: u64,
}

impl GameEvaluator {
    pub fn new(space: SearchSpace, cfg: FitnessConfig, base_seed: u64) -> Self {
        Self {
            space,
            cfg,
            base_seed,
            calls: 0,
        }
    }

    pub fn calls(&self) -> u64 {
        self.calls
    }

    pub fn evaluate_full(&mut self, genome: &Genome) -> Result<FitnessResult> {
        let s = seed::derive(&[self.base_seed, self.calls]);
        self.calls += 1;
        evaluate(genome, &self.space, &self.cfg, s)
    }
}

impl Evaluator for GameEvaluator {
    fn evaluate(&mut self, genome: &Genome) -> Result<f64> {
        self.evaluate_full(genome).map(|r| r.fitness)
    }
}
