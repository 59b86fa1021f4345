//! Re-evaluation summaries and the Mann-Whitney U test.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::fitness::{evaluate, FitnessConfig};
use crate::params::{Genome, SearchSpace};
use crate::{seed, Error, Result};

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Standard deviation with the n−1 denominator; 0 below two samples.
pub fn sample_sd(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    let ss: f64 = xs.iter().map(|x| (x - m) * (x - m)).sum();
    (ss / (xs.len() - 1) as f64).sqrt()
}

pub fn standard_error(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    sample_sd(xs) / (xs.len() as f64).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReevaluationSummary {
    pub genome: Genome,
    pub samples: Vec<f64>,
    pub mean: f64,
    pub standard_error: f64,
}

impl ReevaluationSummary {
    pub fn from_samples(genome: Genome, samples: Vec<f64>) -> Self {
        Self {
            mean: mean(&samples),
            standard_error: standard_error(&samples),
            genome,
            samples,
        }
    }
}

/// `n` independent evaluations through any evaluator.
pub fn reevaluate_with<E: crate::fitness::Evaluator>(
    genome: &Genome,
    evaluator: &mut E,
    n: usize,
) -> Result<ReevaluationSummary> {
    if n < 2 {
        return Err(Error::Config(format!("re-evaluation needs n >= 2, got {n}")));
    }
    let samples = (0..n).map(|_| evaluator.evaluate(genome)).collect::<Result<Vec<_>>>()?;
    Ok(ReevaluationSummary::from_samples(genome.clone(), samples))
}

/// `n` full game evaluations; sample `i` uses seed `derive([seed_base, i])`,
/// so the result does not depend on how the work is scheduled.
pub fn reevaluate(
    genome: &Genome,
    space: &SearchSpace,
    cfg: &FitnessConfig,
    n: usize,
    seed_base: u64,
) -> Result<ReevaluationSummary> {
    if n < 2 {
        return Err(Error::Config(format!("re-evaluation needs n >= 2, got {n}")));
    }
    let samples = (0..n as u64)
        .into_par_iter()
        .map(|i| evaluate(genome, space, cfg, seed::derive(&[seed_base, i])).map(|r| r.fitness))
        .collect::<Result<Vec<_>>>()?;
    Ok(ReevaluationSummary::from_samples(genome.clone(), samples))
}

/// How the p-value is computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PMethod {
    /// Exact when both samples have at most [`EXACT_LIMIT`] values.
    Auto,
    Exact,
    Normal,
}

pub const EXACT_LIMIT: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MannWhitney {
    /// U statistic of the first sample.
    pub u: f64,
    pub p_two_tailed: f64,
    /// Every value in both samples is identical.
    pub degenerate: bool,
    pub exact: bool,
}

/// Midranks (1-based) of `xs`.
pub fn midranks(xs: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&i, &j| xs[i].total_cmp(&xs[j]));
    let mut ranks = vec![0.0; xs.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && xs[order[j + 1]] == xs[order[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

pub fn mann_whitney_u(a: &[f64], b: &[f64]) -> Result<MannWhitney> {
    mann_whitney_u_with(a, b, PMethod::Auto)
}

pub fn mann_whitney_u_with(a: &[f64], b: &[f64], method: PMethod) -> Result<MannWhitney> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Config("Mann-Whitney needs two non-empty samples".into()));
    }
    let (m, n) = (a.len(), b.len());
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let ranks = midranks(&pooled);
    let r1: f64 = ranks[..m].iter().sum();
    let u = r1 - (m * (m + 1)) as f64 / 2.0;

    if pooled.iter().all(|&x| x == pooled[0]) {
        return Ok(MannWhitney {
            u,
            p_two_tailed: 1.0,
            degenerate: true,
            exact: false,
        });
    }

    let exact = match method {
        PMethod::Auto => m <= EXACT_LIMIT && n <= EXACT_LIMIT,
        PMethod::Exact => true,
        PMethod::Normal => false,
    };
    let p = if exact {
        exact_p(&ranks, m, u)
    } else {
        normal_p(&pooled, m, n, u)
    };
    Ok(MannWhitney {
        u,
        p_two_tailed: p.min(1.0),
        degenerate: false,
        exact,
    })
}

/// Share of all ways to give `m` of the pooled ranks to the first sample
/// whose U is at least as far from its mean as the observed one.
fn exact_p(ranks: &[f64], m: usize, u: f64) -> f64 {
    // Midranks are multiples of 1/2, so doubled ranks are exact integers.
    let doubled: Vec<i64> = ranks.iter().map(|r| (r * 2.0).round() as i64).collect();
    let n_total = ranks.len();
    let n = n_total - m;
    let offset = (m * (m + 1)) as i64; // doubled m(m+1)/2
    let mu2 = (m * n) as i64; // doubled mn/2
    let observed = ((u * 2.0).round() as i64 - mu2).abs();

    let mut extreme = 0u64;
    let mut total = 0u64;
    let mut stack: Vec<(usize, usize, i64)> = vec![(0, 0, 0)];
    while let Some((next, taken, sum)) = stack.pop() {
        if taken == m {
            total += 1;
            if (sum - offset - mu2).abs() >= observed {
                extreme += 1;
            }
            continue;
        }
        if n_total - next < m - taken {
            continue;
        }
        stack.push((next + 1, taken, sum));
        stack.push((next + 1, taken + 1, sum + doubled[next]));
    }
    extreme as f64 / total as f64
}

fn normal_p(pooled: &[f64], m: usize, n: usize, u: f64) -> f64 {
    let (mf, nf) = (m as f64, n as f64);
    let big_n = mf + nf;
    let mut sorted = pooled.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut ties = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i;
        while j + 1 < sorted.len() && sorted[j + 1] == sorted[i] {
            j += 1;
        }
        let t = (j - i + 1) as f64;
        ties += t * t * t - t;
        i = j + 1;
    }
    let var = mf * nf / 12.0 * ((big_n + 1.0) - ties / (big_n * (big_n - 1.0)));
    if var <= 0.0 {
        return 1.0;
    }
    let diff = (u - mf * nf / 2.0).abs();
    let z = ((diff - 0.5).max(0.0)) / var.sqrt();
    let std = Normal::standard();
    2.0 * (1.0 - std.cdf(z))
}

/// One row of the sorted comparison table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub algo: String,
    pub trial: usize,
    pub rank: usize,
    pub mean: f64,
    pub standard_error: f64,
    pub n: usize,
    pub genome: Genome,
}

/// Orders each algorithm's summaries by ascending mean and numbers them;
/// algorithms appear in input order. The sort is stable.
pub fn sort_and_tabulate(summaries: &[(String, usize, ReevaluationSummary)]) -> Vec<ReportRow> {
    let mut algos: Vec<&str> = Vec::new();
    for (a, _, _) in summaries {
        if !algos.contains(&a.as_str()) {
            algos.push(a);
        }
    }
    let mut rows = Vec::with_capacity(summaries.len());
    for algo in algos {
        let mut group: Vec<_> = summaries.iter().filter(|(a, _, _)| a == algo).collect();
        group.sort_by(|x, y| x.2.mean.total_cmp(&y.2.mean));
        for (rank, (a, trial, s)) in group.into_iter().enumerate() {
            rows.push(ReportRow {
                algo: a.clone(),
                trial: *trial,
                rank,
                mean: s.mean,
                standard_error: s.standard_error,
                n: s.samples.len(),
                genome: s.genome.clone(),
            });
        }
    }
    rows
}
