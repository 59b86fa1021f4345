//! Evolutionary optimizers over a [`SearchSpace`].
//!
//! All of them talk to the fitness function only through [`Evaluator`], so
//! they run unchanged on real games or on cheap surrogate landscapes.

mod brmhc;
mod ntbea;
mod ntuple;
mod rmhc;
pub mod surrogate;

use std::io::Write;

use serde::{Deserialize, Serialize};

pub use brmhc::{
    brmhc_preprocess, brmhc_run, gene_weights, softmax_select, BrmhcConfig, DeltaWeighting, ImportanceTables,
};
pub use ntbea::{ntbea_run, NtbeaConfig, NtbeaRun};
pub use ntuple::{NTupleModel, TupleStats};
pub use rmhc::{rmhc_run, RmhcConfig};

use crate::fitness::Evaluator;
use crate::params::Genome;
use crate::Result;

/// One evaluator call made during evolution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub eval_index: usize,
    pub genome: Genome,
    pub fitness: f64,
    pub best_so_far: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolutionTrace {
    /// Exactly one record per budgeted evaluation.
    pub records: Vec<EvalRecord>,
    pub final_genome: Genome,
    /// Calls made outside the evolution budget (the hill climbers' initial
    /// parent evaluation).
    pub setup_evals: usize,
}

impl EvolutionTrace {
    /// Writes one CSV row per evaluation:
    /// `trial,algo,evalIndex,fitness,bestSoFar,genome`.
    pub fn write_csv<W: Write>(&self, out: W, trial: usize, algo: &str) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["trial", "algo", "evalIndex", "fitness", "bestSoFar", "genome"])?;
        for r in &self.records {
            w.write_record([
                trial.to_string(),
                algo.to_string(),
                r.eval_index.to_string(),
                r.fitness.to_string(),
                r.best_so_far.to_string(),
                r.genome.to_string(),
            ])?;
        }
        w.flush().map_err(|e| crate::Error::io("trace csv", e))?;
        Ok(())
    }
}

/// Wraps an evaluator and counts its calls.
#[derive(Debug, Clone)]
pub struct CountingEvaluator<E> {
    pub inner: E,
    pub calls: usize,
}

impl<E> CountingEvaluator<E> {
    pub fn new(inner: E) -> Self {
        Self { inner, calls: 0 }
    }
}

impl<E: Evaluator> Evaluator for CountingEvaluator<E> {
    fn evaluate(&mut self, genome: &Genome) -> Result<f64> {
        self.calls += 1;
        self.inner.evaluate(genome)
    }
}

/// The three algorithms under comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Algorithm {
    Rmhc,
    Brmhc,
    Ntbea,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::Rmhc, Algorithm::Brmhc, Algorithm::Ntbea];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Rmhc => "rmhc",
            Algorithm::Brmhc => "brmhc",
            Algorithm::Ntbea => "ntbea",
        }
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Algorithm {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "rmhc" => Ok(Algorithm::Rmhc),
            "brmhc" | "b-rmhc" => Ok(Algorithm::Brmhc),
            "ntbea" | "ntuple" | "n-tuple" => Ok(Algorithm::Ntbea),
            other => Err(crate::Error::Parse(format!("unknown algorithm {other:?}"))),
        }
    }
}

#[cfg(test)]
mod tests;
