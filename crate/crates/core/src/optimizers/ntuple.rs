use std::collections::HashMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::params::Genome;
use crate::{Error, Result};

/// Visit count credited to patterns the model has never seen.
pub const UNSEEN_VISITS: f64 = 0.5;

/// Running sums for one lookup-table entry.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct TupleStats {
    pub n: u64,
    pub sum: f64,
    pub sum_sq: f64,
}

impl TupleStats {
    pub fn add(&mut self, value: f64) {
        self.n += 1;
        self.sum += value;
        self.sum_sq += value * value;
    }

    pub fn mean(&self) -> f64 {
        self.sum / self.n as f64
    }

    /// Sample standard deviation; 0 below two samples.
    pub fn sd(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        let n = self.n as f64;
        let var = (self.sum_sq - self.sum * self.sum / n) / (n - 1.0);
        var.max(0.0).sqrt()
    }

    pub fn standard_error(&self) -> f64 {
        self.sd() / (self.n as f64).sqrt()
    }
}

/// Lookup-table fitness landscape model. Each tuple is a set of gene
/// positions; its table is keyed by the genome's levels at those positions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NTupleModel {
    tuples: Vec<Vec<usize>>,
    tables: Vec<HashMap<Vec<u8>, TupleStats>>,
    total: TupleStats,
}

impl NTupleModel {
    /// Every 1-tuple plus the single full-length tuple.
    pub fn new(genes: usize) -> Self {
        let mut tuples: Vec<Vec<usize>> = (0..genes).map(|g| vec![g]).collect();
        if genes > 1 {
            tuples.push((0..genes).collect());
        }
        Self::with_tuples(tuples).expect("default tuples are valid")
    }

    pub fn with_tuples(tuples: Vec<Vec<usize>>) -> Result<Self> {
        if tuples.is_empty() || tuples.iter().any(Vec::is_empty) {
            return Err(Error::Config("n-tuple model needs non-empty tuples".into()));
        }
        let tables = vec![HashMap::new(); tuples.len()];
        Ok(Self {
            tuples,
            tables,
            total: TupleStats::default(),
        })
    }

    pub fn tuples(&self) -> &[Vec<usize>] {
        &self.tuples
    }

    pub fn table(&self, tuple: usize) -> &HashMap<Vec<u8>, TupleStats> {
        &self.tables[tuple]
    }

    pub fn total_samples(&self) -> u64 {
        self.total.n
    }

    /// Mean of every sample added so far.
    pub fn global_mean(&self) -> f64 {
        if self.total.n == 0 {
            0.0
        } else {
            self.total.mean()
        }
    }

    fn key_into(&self, tuple: usize, genome: &Genome, key: &mut Vec<u8>) -> Result<()> {
        key.clear();
        for &g in &self.tuples[tuple] {
            let level = *genome.levels.get(g).ok_or(Error::GeneOutOfRange {
                index: g,
                len: genome.levels.len(),
            })?;
            key.push(level);
        }
        Ok(())
    }

    pub fn add(&mut self, genome: &Genome, value: f64) -> Result<()> {
        let mut key = Vec::new();
        for t in 0..self.tuples.len() {
            self.key_into(t, genome, &mut key)?;
            self.tables[t].entry(key.clone()).or_default().add(value);
        }
        self.total.add(value);
        Ok(())
    }

    /// Statistics of the entry `genome` hits in table `tuple`.
    pub fn lookup(&self, tuple: usize, genome: &Genome) -> Option<&TupleStats> {
        let mut key = Vec::with_capacity(self.tuples[tuple].len());
        self.key_into(tuple, genome, &mut key).ok()?;
        self.tables[tuple].get(key.as_slice())
    }

    /// Arithmetic mean over tuples of `mean + c·√(ln N / n)`, with unseen
    /// patterns scored at the global mean and [`UNSEEN_VISITS`] visits.
    pub fn ucb(&self, genome: &Genome, c: f64) -> Result<f64> {
        if self.total.n == 0 {
            return Err(Error::Config("model has no samples".into()));
        }
        let ln_n = (self.total.n as f64).ln();
        let optimistic = self.global_mean();
        let mut key = Vec::with_capacity(genome.levels.len());
        let mut acc = 0.0;
        for t in 0..self.tuples.len() {
            self.key_into(t, genome, &mut key)?;
            acc += match self.tables[t].get(key.as_slice()) {
                Some(s) => s.mean() + c * (ln_n / s.n as f64).sqrt(),
                None => optimistic + c * (ln_n / UNSEEN_VISITS).sqrt(),
            };
        }
        Ok(acc / self.tuples.len() as f64)
    }

    /// Mean estimate with no exploration bonus.
    pub fn mean_estimate(&self, genome: &Genome) -> Result<f64> {
        self.ucb(genome, 0.0)
    }

    /// Per-tuple tables as text, one `tuple pattern n mean sd` line per entry.
    pub fn dump(&self) -> String {
        let mut out = format!("totalSamples {}\n", self.total.n);
        for (t, tuple) in self.tuples.iter().enumerate() {
            let mut rows: Vec<_> = self.tables[t].iter().collect();
            rows.sort_by(|a, b| a.0.cmp(b.0));
            let names: Vec<String> = tuple.iter().map(usize::to_string).collect();
            for (pattern, s) in rows {
                let pat: Vec<String> = pattern.iter().map(u8::to_string).collect();
                let _ = writeln!(
                    out,
                    "[{}] [{}] {} {} {}",
                    names.join(","),
                    pat.join(","),
                    s.n,
                    s.mean(),
                    s.sd()
                );
            }
        }
        out
    }
}
