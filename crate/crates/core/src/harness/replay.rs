use std::fmt::Write as _;
use std::path::Path;

use crate::fitness::{combine, play_evaluation, EvaluationRecord, FitnessConfig};
use crate::game::Outcome;
use crate::params::{GameParams, Genome, SearchSpace};
use crate::{Error, Result};

/// Reads a genome file: either one comma-separated level line or
/// `NAME=value` parameter lines. `#` comments are ignored.
pub fn load_genome(path: &Path, space: &SearchSpace) -> Result<Genome> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let body: Vec<&str> = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .collect();
    let genome = if body.iter().any(|l| l.contains('=')) {
        GameParams::from_text(&text)?.encode()?
    } else {
        match body.as_slice() {
            [line] => line.parse()?,
            _ => return Err(Error::Parse(format!("{}: expected one genome line", path.display()))),
        }
    };
    space.validate(&genome)?;
    Ok(genome)
}

/// Re-plays one evaluation of `genome` on a pool of `workers` threads
/// (0 = all cores). The games do not depend on the pool size.
pub fn replay(
    genome: &Genome,
    space: &SearchSpace,
    cfg: &FitnessConfig,
    seed: u64,
    workers: usize,
) -> Result<Vec<EvaluationRecord>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
    pool.install(|| play_evaluation(genome, space, cfg, seed))
}

const LEVELS: [&str; 3] = ["weak", "medium", "strong"];

/// One CSV line per game followed by the combined fitness.
pub fn format_replay(records: &[EvaluationRecord]) -> String {
    let mut out = String::from(
        "game,level,player1,player2,seed,ticks,outcome,score1,score2,lives1,lives2,hits1,hits2,fired1,fired2,skillScore\n",
    );
    for (i, r) in records.iter().enumerate() {
        let g = &r.record;
        let outcome = match g.outcome {
            Outcome::Winner(p) => format!("p{}", p + 1),
            Outcome::Draw => "draw".into(),
        };
        let _ = writeln!(
            out,
            "{i},{},{},{},{},{},{outcome},{},{},{},{},{},{},{},{},{}",
            LEVELS[r.game.level],
            g.agents[0],
            g.agents[1],
            g.seed,
            g.ticks,
            g.scores.s1,
            g.scores.s2,
            g.lives[0],
            g.lives[1],
            g.hits[0],
            g.hits[1],
            g.missiles_fired[0],
            g.missiles_fired[1],
            r.skill_score(),
        );
    }
    let f = combine(records);
    let _ = writeln!(out, "# t1={} t2={} t3={} fitness={}", f.t1, f.t2, f.t3, f.fitness);
    out
}
