//! Experiment driver: evolve, re-evaluate, report.
//!
//! Configuration is a flat `key=value` file; every key can also be given on
//! the command line as `--key value`.

mod experiment;
mod replay;

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

pub use experiment::{
    compare, read_summaries, run_experiment, significance_rows, write_significance, ExperimentReport, SignificanceRow,
    TrialAccounting, TrialOutcome,
};
pub use replay::{format_replay, load_genome, replay};

use crate::fitness::{FitnessConfig, SideMode};
use crate::game::SafeZonePlacement;
use crate::optimizers::{Algorithm, BrmhcConfig, DeltaWeighting, NtbeaConfig, RmhcConfig};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub algorithms: Vec<Algorithm>,
    pub trials: usize,
    pub n_evals: usize,
    pub reeval_n: usize,
    pub seed: u64,
    pub out: PathBuf,
    /// Concurrent trials; 0 uses every core.
    pub workers: usize,
    pub fitness: FitnessConfig,
    pub rmhc: RmhcConfig,
    pub brmhc: BrmhcConfig,
    pub ntbea: NtbeaConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            algorithms: Algorithm::ALL.to_vec(),
            trials: 50,
            n_evals: 100,
            reeval_n: 100,
            seed: 1,
            out: PathBuf::from("results"),
            workers: 0,
            fitness: FitnessConfig::default(),
            rmhc: RmhcConfig::default(),
            brmhc: BrmhcConfig::default(),
            ntbea: NtbeaConfig::default(),
        }
    }
}

fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value
        .parse()
        .map_err(|e| Error::Parse(format!("{key}: cannot parse {value:?}: {e}")))
}

fn boolean(key: &str, value: &str) -> Result<bool> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(Error::Parse(format!("{key}: expected true/false, got {value:?}"))),
    }
}

impl ExperimentConfig {
    /// Keys accepted by [`ExperimentConfig::set`], in the order
    /// [`ExperimentConfig::to_text`] writes them.
    pub const KEYS: &'static [&'static str] = &[
        "algo",
        "trials",
        "evals",
        "reeval",
        "seed",
        "out",
        "workers",
        "sides",
        "world.maxTicks",
        "world.width",
        "world.height",
        "world.startLives",
        "world.startMissiles",
        "world.safeZone",
        "world.missileSpeedUnit",
        "world.blackholeAccelUnit",
        "mcts.iterations",
        "mcts.rolloutDepth",
        "mcts.c",
        "mcts.valueScale",
        "mea.popSize",
        "mea.seqLength",
        "mea.evals",
        "mea.crossoverRate",
        "ntbea.k",
        "ntbea.c",
        "brmhc.temperature",
        "brmhc.deltas",
        "resampleParent",
    ];

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        let world = &mut self.fitness.world;
        let budgets = &mut self.fitness.budgets;
        match key {
            "algo" | "algos" | "algorithms" => {
                let algos = value
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(|s| if s == "all" { Ok(None) } else { s.parse().map(Some) })
                    .collect::<Result<Vec<_>>>()?;
                self.algorithms = if algos.iter().any(Option::is_none) {
                    Algorithm::ALL.to_vec()
                } else {
                    let mut v: Vec<Algorithm> = algos.into_iter().flatten().collect();
                    v.sort();
                    v.dedup();
                    v
                };
            }
            "trials" => self.trials = num(key, value)?,
            "evals" | "nEvals" => self.n_evals = num(key, value)?,
            "reeval" | "reevalN" => self.reeval_n = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            "out" => self.out = PathBuf::from(value),
            "workers" => self.workers = num(key, value)?,
            "sides" => self.fitness.sides = value.parse::<SideMode>()?,
            "world.maxTicks" => world.max_ticks = num(key, value)?,
            "world.width" => world.width = num(key, value)?,
            "world.height" => world.height = num(key, value)?,
            "world.startLives" => world.start_lives = num(key, value)?,
            "world.startMissiles" => world.start_missiles = num(key, value)?,
            "world.safeZone" => {
                world.safe_zone = match value {
                    "center" | "centre" => SafeZonePlacement::Center,
                    "border" => SafeZonePlacement::Border,
                    _ => return Err(Error::Parse(format!("{key}: expected center or border, got {value:?}"))),
                }
            }
            "world.missileSpeedUnit" => world.missile_speed_unit = num(key, value)?,
            "world.blackholeAccelUnit" => world.blackhole_accel_unit = num(key, value)?,
            "mcts.iterations" => budgets.mcts.iterations = num(key, value)?,
            "mcts.rolloutDepth" => budgets.mcts.rollout_depth = num(key, value)?,
            "mcts.c" => budgets.mcts.c = num(key, value)?,
            "mcts.valueScale" => budgets.mcts.value_scale = num(key, value)?,
            "mea.popSize" => budgets.mea.pop_size = num(key, value)?,
            "mea.seqLength" => budgets.mea.seq_length = num(key, value)?,
            "mea.evals" => budgets.mea.evals = num(key, value)?,
            "mea.crossoverRate" => budgets.mea.crossover_rate = num(key, value)?,
            "ntbea.k" => self.ntbea.k = num(key, value)?,
            "ntbea.c" => self.ntbea.c = num(key, value)?,
            "brmhc.temperature" => self.brmhc.temperature = if value == "auto" { None } else { Some(num(key, value)?) },
            "brmhc.deltas" => {
                self.brmhc.deltas = match value {
                    "abs" | "absolute" => DeltaWeighting::Absolute,
                    "signed" => DeltaWeighting::Signed,
                    _ => return Err(Error::Parse(format!("{key}: expected abs or signed, got {value:?}"))),
                }
            }
            "resampleParent" => {
                let on = boolean(key, value)?;
                self.rmhc.resample_parent = on;
                self.brmhc.resample_parent = on;
            }
            _ => return Err(Error::Config(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<String> {
        let world = &self.fitness.world;
        let budgets = &self.fitness.budgets;
        Some(match key {
            "algo" => self.algorithms.iter().map(|a| a.name()).collect::<Vec<_>>().join(","),
            "trials" => self.trials.to_string(),
            "evals" => self.n_evals.to_string(),
            "reeval" => self.reeval_n.to_string(),
            "seed" => self.seed.to_string(),
            "out" => self.out.display().to_string(),
            "workers" => self.workers.to_string(),
            "sides" => match self.fitness.sides {
                SideMode::SkillFirst => "first",
                SideMode::SkillSecond => "second",
                SideMode::BothAveraged => "both",
            }
            .to_string(),
            "world.maxTicks" => world.max_ticks.to_string(),
            "world.width" => world.width.to_string(),
            "world.height" => world.height.to_string(),
            "world.startLives" => world.start_lives.to_string(),
            "world.startMissiles" => world.start_missiles.to_string(),
            "world.safeZone" => match world.safe_zone {
                SafeZonePlacement::Center => "center",
                SafeZonePlacement::Border => "border",
            }
            .to_string(),
            "world.missileSpeedUnit" => world.missile_speed_unit.to_string(),
            "world.blackholeAccelUnit" => world.blackhole_accel_unit.to_string(),
            "mcts.iterations" => budgets.mcts.iterations.to_string(),
            "mcts.rolloutDepth" => budgets.mcts.rollout_depth.to_string(),
            "mcts.c" => budgets.mcts.c.to_string(),
            "mcts.valueScale" => budgets.mcts.value_scale.to_string(),
            "mea.popSize" => budgets.mea.pop_size.to_string(),
            "mea.seqLength" => budgets.mea.seq_length.to_string(),
            "mea.evals" => budgets.mea.evals.to_string(),
            "mea.crossoverRate" => budgets.mea.crossover_rate.to_string(),
            "ntbea.k" => self.ntbea.k.to_string(),
            "ntbea.c" => self.ntbea.c.to_string(),
            "brmhc.temperature" => match self.brmhc.temperature {
                Some(t) => t.to_string(),
                None => "auto".into(),
            },
            "brmhc.deltas" => match self.brmhc.deltas {
                DeltaWeighting::Absolute => "abs",
                DeltaWeighting::Signed => "signed",
            }
            .to_string(),
            "resampleParent" => self.rmhc.resample_parent.to_string(),
            _ => return None,
        })
    }

    /// Applies `key=value` lines; blank lines and `#` comments are skipped.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("line {}: expected key=value, got {line:?}", n + 1)))?;
            self.set(k.trim(), v)?;
        }
        Ok(())
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        cfg.apply_text(text)?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_text(&text)
    }

    pub fn to_text(&self) -> String {
        Self::KEYS
            .iter()
            .map(|k| format!("{k}={}\n", self.get(k).expect("every listed key is readable")))
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.algorithms.is_empty() {
            return Err(Error::Config("no algorithms selected".into()));
        }
        if self.trials == 0 || self.n_evals == 0 {
            return Err(Error::Config("trials and evals must be at least 1".into()));
        }
        if self.reeval_n < 2 {
            return Err(Error::Config("reeval must be at least 2".into()));
        }
        if self.ntbea.k == 0 {
            return Err(Error::Config("ntbea.k must be at least 1".into()));
        }
        self.fitness.world.validate()?;
        self.fitness.budgets.validate()
    }
}
