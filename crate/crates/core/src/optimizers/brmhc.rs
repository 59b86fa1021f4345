//! Biased-mutation RMHC: a pre-processing pass measures how strongly each
//! gene moves the fitness, then the hill climber picks genes to mutate by a
//! softmax over those importances.

use std::collections::BTreeMap;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::rmhc::hill_climb;
use super::EvolutionTrace;
use crate::fitness::Evaluator;
use crate::params::Genome;
use crate::params::{
    is_cell_gene, random_genome, SearchSpace, BLACKHOLE_CELLS, BLACKHOLE_CELL_FIRST, GENE_COUNT, GRID_SIZE,
};
use crate::stats::sample_sd;
use crate::{Error, Result, Rng};

/// Pre-processing output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceTables {
    /// Sample SD of the probe fitnesses, for every non-cell gene.
    pub scalar: BTreeMap<usize, f64>,
    /// Indexed by `grid_size - 1`; maps grid position to
    /// `fitness(all off) - fitness(only this cell on)`.
    pub black_hole: [BTreeMap<usize, f64>; 4],
    /// Evaluator calls spent building the tables.
    pub evals_used: usize,
}

impl ImportanceTables {
    /// Every gene gets the same importance.
    pub fn uniform(value: f64) -> Self {
        let scalar = (0..GENE_COUNT)
            .filter(|&g| !is_cell_gene(g))
            .map(|g| (g, value))
            .collect();
        let black_hole = std::array::from_fn(|i| {
            let n = (i + 1) * (i + 1);
            (0..n).map(|b| (b, value)).collect()
        });
        Self {
            scalar,
            black_hole,
            evals_used: 0,
        }
    }

    /// Expected pre-processing cost on `space`.
    pub fn expected_evals(space: &SearchSpace) -> usize {
        let group_a: usize = (0..space.len())
            .filter(|&g| !is_cell_gene(g))
            .map(|g| space.arity(g))
            .sum();
        let group_b: usize = (1..=4).map(|g| 1 + g * g).sum();
        group_a + group_b
    }

    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["table", "gridSize", "index", "importance"])?;
        for (g, v) in &self.scalar {
            w.write_record(["scalar".into(), String::new(), g.to_string(), v.to_string()])?;
        }
        for (i, table) in self.black_hole.iter().enumerate() {
            for (b, v) in table {
                w.write_record(["blackhole".into(), (i + 1).to_string(), b.to_string(), v.to_string()])?;
            }
        }
        w.flush().map_err(|e| Error::io("importance csv", e))?;
        Ok(())
    }
}

fn require_game_layout(space: &SearchSpace) -> Result<()> {
    if space.len() != GENE_COUNT || space.arity(GRID_SIZE) != 4 {
        return Err(Error::Config("biased mutation needs the 30-gene game space".into()));
    }
    Ok(())
}

/// Measures gene importance. Scalar genes: from a fresh random context,
/// evaluate once per level and take the sample SD. Black-hole cells: for each
/// grid size, evaluate with every cell disabled, then with each cell enabled
/// alone, and record the fitness drop.
pub fn brmhc_preprocess<E: Evaluator>(
    space: &SearchSpace,
    evaluator: &mut E,
    rng: &mut Rng,
) -> Result<ImportanceTables> {
    require_game_layout(space)?;
    let mut used = 0;
    let mut scalar = BTreeMap::new();
    for gene in (0..space.len()).filter(|&g| !is_cell_gene(g)) {
        let mut probe = random_genome(space, rng);
        let mut values = Vec::with_capacity(space.arity(gene));
        for level in 0..space.arity(gene) as u8 {
            probe.levels[gene] = level;
            values.push(evaluator.evaluate(&probe)?);
            used += 1;
        }
        scalar.insert(gene, sample_sd(&values));
    }

    let mut base = random_genome(space, rng);
    for c in 0..BLACKHOLE_CELLS {
        base.levels[BLACKHOLE_CELL_FIRST + c] = 0;
    }
    let mut black_hole: [BTreeMap<usize, f64>; 4] = Default::default();
    for grid in 1..=4usize {
        base.levels[GRID_SIZE] = (grid - 1) as u8;
        let off = evaluator.evaluate(&base)?;
        used += 1;
        for b in 0..grid * grid {
            let mut on = base.clone();
            on.levels[BLACKHOLE_CELL_FIRST + b] = 1;
            let f = evaluator.evaluate(&on)?;
            used += 1;
            black_hole[grid - 1].insert(b, off - f);
        }
    }
    Ok(ImportanceTables {
        scalar,
        black_hole,
        evals_used: used,
    })
}

/// How cell deltas become selection weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DeltaWeighting {
    Absolute,
    Signed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BrmhcConfig {
    /// Softmax temperature; `None` means a third of the largest weight.
    pub temperature: Option<f64>,
    pub deltas: DeltaWeighting,
    pub resample_parent: bool,
}

impl Default for BrmhcConfig {
    fn default() -> Self {
        Self {
            temperature: None,
            deltas: DeltaWeighting::Absolute,
            resample_parent: false,
        }
    }
}

/// Selection weight of every gene for `genome`.
///
/// Cell deltas come from the table for the genome's grid size; cells that
/// grid does not express use the 4×4 table. Deltas are rescaled so the
/// largest magnitude matches the largest scalar importance.
pub fn gene_weights(tables: &ImportanceTables, genome: &Genome, deltas: DeltaWeighting) -> Vec<f64> {
    let grid = usize::from(genome.levels[GRID_SIZE]) + 1;
    let scalar_max = tables.scalar.values().fold(0.0f64, |m, &v| m.max(v.abs()));
    let delta_max = tables
        .black_hole
        .iter()
        .flat_map(|t| t.values())
        .fold(0.0f64, |m, &v| m.max(v.abs()));
    let scale = if delta_max > 0.0 && scalar_max > 0.0 {
        scalar_max / delta_max
    } else {
        1.0
    };
    (0..GENE_COUNT)
        .map(|g| {
            if is_cell_gene(g) {
                let b = g - BLACKHOLE_CELL_FIRST;
                let d = tables.black_hole[grid - 1]
                    .get(&b)
                    .or_else(|| tables.black_hole[3].get(&b))
                    .copied()
                    .unwrap_or(0.0);
                let d = match deltas {
                    DeltaWeighting::Absolute => d.abs(),
                    DeltaWeighting::Signed => d,
                };
                d * scale
            } else {
                tables.scalar.get(&g).copied().unwrap_or(0.0)
            }
        })
        .collect()
}

/// Samples index `i` with probability `exp(w_i / t) / Σ exp(w_j / t)`.
pub fn softmax_select(weights: &[f64], temperature: f64, rng: &mut Rng) -> Result<usize> {
    if weights.is_empty() {
        return Err(Error::EmptyChildren);
    }
    if temperature.is_nan() || temperature <= 0.0 {
        return Err(Error::Config(format!(
            "softmax temperature must be positive, got {temperature}"
        )));
    }
    let max = weights.iter().fold(f64::NEG_INFINITY, |m, &w| m.max(w));
    let exp: Vec<f64> = weights.iter().map(|&w| ((w - max) / temperature).exp()).collect();
    let total: f64 = exp.iter().sum();
    let mut u = rng.random::<f64>() * total;
    for (i, e) in exp.iter().enumerate() {
        if u < *e {
            return Ok(i);
        }
        u -= e;
    }
    Ok(exp.iter().rposition(|&e| e > 0.0).unwrap_or(0))
}

/// RMHC whose mutated gene is drawn by [`softmax_select`] over
/// [`gene_weights`].
pub fn brmhc_run<E: Evaluator>(
    space: &SearchSpace,
    evaluator: &mut E,
    tables: &ImportanceTables,
    n_evals: usize,
    rng: &mut Rng,
    cfg: &BrmhcConfig,
) -> Result<EvolutionTrace> {
    require_game_layout(space)?;
    hill_climb(space, evaluator, n_evals, rng, cfg.resample_parent, |genome, rng| {
        let weights = gene_weights(tables, genome, cfg.deltas);
        let t = match cfg.temperature {
            Some(t) => t,
            None => {
                let top = weights.iter().fold(0.0f64, |m, &w| m.max(w));
                if top > 0.0 {
                    top / 3.0
                } else {
                    1.0
                }
            }
        };
        softmax_select(&weights, t, rng)
    })
}
