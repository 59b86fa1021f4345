use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ExperimentConfig;
use crate::fitness::{evaluation_games, GameEvaluator};
use crate::optimizers::{
    brmhc_preprocess, brmhc_run, ntbea_run, rmhc_run, Algorithm, CountingEvaluator, EvolutionTrace, ImportanceTables,
};
use crate::params::{decode, default_search_space, Genome, SearchSpace};
use crate::stats::{mann_whitney_u, reevaluate, sort_and_tabulate, ReevaluationSummary, ReportRow};
use crate::{seed, Error, Result};

/// Evaluator calls made by one trial, by purpose.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialAccounting {
    pub setup_evals: usize,
    pub preprocess_evals: usize,
    pub evolution_evals: usize,
    pub reeval_games: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    pub algo: Algorithm,
    pub trial: usize,
    pub seed: u64,
    pub trace: EvolutionTrace,
    pub tables: Option<ImportanceTables>,
    pub summary: ReevaluationSummary,
    pub accounting: TrialAccounting,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignificanceRow {
    pub comparison: String,
    pub u: f64,
    pub p: f64,
}

#[derive(Debug)]
pub struct ExperimentReport {
    /// One entry per algorithm × trial, in run order; failed trials keep
    /// their error message.
    pub trials: Vec<(Algorithm, usize, std::result::Result<TrialOutcome, String>)>,
    pub report: Vec<ReportRow>,
    pub significance: Vec<SignificanceRow>,
    /// Every file written, relative to the output directory.
    pub files: Vec<PathBuf>,
}

impl ExperimentReport {
    pub fn outcomes(&self) -> impl Iterator<Item = &TrialOutcome> {
        self.trials.iter().filter_map(|(_, _, r)| r.as_ref().ok())
    }

    /// Mean of the per-trial re-evaluated means for `algo`.
    pub fn mean_fitness(&self, algo: Algorithm) -> Option<f64> {
        let means: Vec<f64> = self
            .outcomes()
            .filter(|o| o.algo == algo)
            .map(|o| o.summary.mean)
            .collect();
        (!means.is_empty()).then(|| crate::stats::mean(&means))
    }
}

fn trial_seed(base: u64, algo: Algorithm, trial: usize) -> u64 {
    seed::derive(&[base, seed::label(algo.name()), trial as u64])
}

fn run_trial(cfg: &ExperimentConfig, space: &SearchSpace, algo: Algorithm, trial: usize) -> Result<TrialOutcome> {
    let tseed = trial_seed(cfg.seed, algo, trial);
    let mut rng = seed::rng(seed::derive(&[tseed, 0]));
    let games = GameEvaluator::new(space.clone(), cfg.fitness.clone(), seed::derive(&[tseed, 1]));
    let mut ev = CountingEvaluator::new(games);
    let mut tables = None;
    let trace = match algo {
        Algorithm::Rmhc => rmhc_run(space, &mut ev, cfg.n_evals, &mut rng, &cfg.rmhc)?,
        Algorithm::Brmhc => {
            let t = brmhc_preprocess(space, &mut ev, &mut rng)?;
            let trace = brmhc_run(space, &mut ev, &t, cfg.n_evals, &mut rng, &cfg.brmhc)?;
            tables = Some(t);
            trace
        }
        Algorithm::Ntbea => ntbea_run(space, &mut ev, cfg.n_evals, &mut rng, &cfg.ntbea)?.trace,
    };
    let preprocess = tables.as_ref().map_or(0, |t| t.evals_used);
    let evolution = ev.calls - preprocess - trace.setup_evals;
    if evolution != cfg.n_evals || trace.records.len() != cfg.n_evals {
        return Err(Error::Config(format!(
            "{algo} trial {trial}: spent {evolution} evolution evaluations, budget was {}",
            cfg.n_evals
        )));
    }
    let summary = reevaluate(
        &trace.final_genome,
        space,
        &cfg.fitness,
        cfg.reeval_n,
        seed::derive(&[tseed, 2]),
    )?;
    let enemy = decode(&trace.final_genome, space)?.enemy;
    let per_eval = evaluation_games(enemy, cfg.fitness.sides).len();
    Ok(TrialOutcome {
        algo,
        trial,
        seed: tseed,
        accounting: TrialAccounting {
            setup_evals: trace.setup_evals,
            preprocess_evals: preprocess,
            evolution_evals: evolution,
            reeval_games: cfg.reeval_n * per_eval,
        },
        trace,
        tables,
        summary,
    })
}

struct Writer {
    root: PathBuf,
    files: Vec<PathBuf>,
}

impl Writer {
    fn put(&mut self, rel: impl AsRef<Path>, bytes: &[u8]) -> Result<()> {
        let rel = rel.as_ref();
        let path = self.root.join(rel);
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
        self.files.push(rel.to_path_buf());
        Ok(())
    }

    fn csv(
        &mut self,
        rel: impl AsRef<Path>,
        header: &[&str],
        rows: impl IntoIterator<Item = Vec<String>>,
    ) -> Result<()> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(header)?;
        for r in rows {
            w.write_record(&r)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::io(rel.as_ref(), e.into_error()))?;
        self.put(rel, &bytes)
    }
}

fn trial_name(algo: Algorithm, trial: usize) -> String {
    format!("{}_trial{trial:02}", algo.name())
}

/// Runs every algorithm × trial, then writes traces, re-evaluation
/// summaries, the sorted report, significance tests, best/worst games and
/// the evaluation accounting under `cfg.out`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let mut out = Writer {
        root: cfg.out.clone(),
        files: Vec::new(),
    };
    // fail before any game is played if the directory is unusable
    out.put("config.txt", cfg.to_text().as_bytes())?;

    let space = default_search_space();
    let jobs: Vec<(Algorithm, usize)> = cfg
        .algorithms
        .iter()
        .flat_map(|&a| (0..cfg.trials).map(move |t| (a, t)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
    let results: Vec<_> = pool.install(|| {
        jobs.par_iter()
            .map(|&(a, t)| (a, t, run_trial(cfg, &space, a, t).map_err(|e| e.to_string())))
            .collect()
    });

    let mut accounting = Vec::new();
    let mut summaries = Vec::new();
    for (algo, trial, res) in &results {
        let name = trial_name(*algo, *trial);
        match res {
            Ok(o) => {
                let mut buf = Vec::new();
                o.trace.write_csv(&mut buf, *trial, algo.name())?;
                out.put(format!("traces/{name}.csv"), &buf)?;
                out.csv(
                    format!("summaries/{name}.csv"),
                    &["algo", "trial", "sample", "fitness"],
                    o.summary
                        .samples
                        .iter()
                        .enumerate()
                        .map(|(i, f)| vec![algo.name().into(), trial.to_string(), i.to_string(), f.to_string()]),
                )?;
                if let Some(t) = &o.tables {
                    let mut buf = Vec::new();
                    t.write_csv(&mut buf)?;
                    out.put(format!("preprocessing/{name}.csv"), &buf)?;
                }
                let a = o.accounting;
                accounting.push(vec![
                    algo.name().into(),
                    trial.to_string(),
                    o.seed.to_string(),
                    "ok".into(),
                    a.setup_evals.to_string(),
                    a.preprocess_evals.to_string(),
                    a.evolution_evals.to_string(),
                    a.reeval_games.to_string(),
                ]);
                summaries.push((algo.name().to_string(), *trial, o.summary.clone()));
            }
            Err(msg) => accounting.push(vec![
                algo.name().into(),
                trial.to_string(),
                trial_seed(cfg.seed, *algo, *trial).to_string(),
                format!("error: {msg}"),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
            ]),
        }
    }
    out.csv(
        "accounting.csv",
        &[
            "algo",
            "trial",
            "seed",
            "status",
            "setupEvals",
            "preprocessEvals",
            "evolutionEvals",
            "reevalGames",
        ],
        accounting,
    )?;

    let report = sort_and_tabulate(&summaries);
    out.csv(
        "report.csv",
        &["algo", "trial", "mean", "stderr", "n", "genome"],
        report.iter().map(|r| {
            vec![
                r.algo.clone(),
                r.trial.to_string(),
                r.mean.to_string(),
                r.standard_error.to_string(),
                r.n.to_string(),
                r.genome.to_string(),
            ]
        }),
    )?;

    let significance = significance_rows(&summaries)?;
    let mut buf = Vec::new();
    write_significance(&mut buf, &significance)?;
    out.put("significance.csv", &buf)?;

    write_extremes(&mut out, &report, &space)?;

    Ok(ExperimentReport {
        trials: results,
        report,
        significance,
        files: out.files,
    })
}

/// Best and worst game per algorithm, plus their parameters as text.
fn write_extremes(out: &mut Writer, report: &[ReportRow], space: &SearchSpace) -> Result<()> {
    let mut by_algo: BTreeMap<usize, (&ReportRow, &ReportRow)> = BTreeMap::new();
    let mut order: Vec<&str> = Vec::new();
    for r in report {
        let i = match order.iter().position(|a| *a == r.algo) {
            Some(i) => i,
            None => {
                order.push(&r.algo);
                order.len() - 1
            }
        };
        let e = by_algo.entry(i).or_insert((r, r));
        if r.mean > e.0.mean {
            e.0 = r;
        }
        if r.mean < e.1.mean {
            e.1 = r;
        }
    }
    let mut rows = Vec::new();
    for (best, worst) in by_algo.values() {
        for (kind, r) in [("best", best), ("worst", worst)] {
            rows.push(vec![
                r.algo.clone(),
                kind.into(),
                r.trial.to_string(),
                r.mean.to_string(),
                r.standard_error.to_string(),
                r.genome.to_string(),
            ]);
            let params = decode(&r.genome, space)?;
            out.put(format!("extremes/{}_{kind}.txt", r.algo), params.to_text().as_bytes())?;
        }
    }
    out.csv(
        "extremes.csv",
        &["algo", "kind", "trial", "mean", "stderr", "genome"],
        rows,
    )
}

/// Pairwise two-tailed Mann-Whitney tests. `/all` compares the per-trial
/// mean fitnesses; `/worst` compares the re-evaluation samples of each
/// algorithm's lowest-mean game.
pub fn significance_rows(summaries: &[(String, usize, ReevaluationSummary)]) -> Result<Vec<SignificanceRow>> {
    let mut algos: Vec<&str> = Vec::new();
    for (a, _, _) in summaries {
        if !algos.contains(&a.as_str()) {
            algos.push(a);
        }
    }
    let group = |algo: &str| -> Vec<&ReevaluationSummary> {
        summaries
            .iter()
            .filter(|(a, _, _)| a == algo)
            .map(|(_, _, s)| s)
            .collect()
    };
    let worst = |g: &[&ReevaluationSummary]| -> Vec<f64> {
        g.iter()
            .min_by(|x, y| x.mean.total_cmp(&y.mean))
            .map(|s| s.samples.clone())
            .unwrap_or_default()
    };
    let mut rows = Vec::new();
    for i in 0..algos.len() {
        for j in i + 1..algos.len() {
            let (a, b) = (group(algos[i]), group(algos[j]));
            let means = |g: &[&ReevaluationSummary]| g.iter().map(|s| s.mean).collect::<Vec<_>>();
            let name = format!("{}-vs-{}", algos[i], algos[j]);
            let all = mann_whitney_u(&means(&a), &means(&b))?;
            rows.push(SignificanceRow {
                comparison: format!("{name}/all"),
                u: all.u,
                p: all.p_two_tailed,
            });
            let w = mann_whitney_u(&worst(&a), &worst(&b))?;
            rows.push(SignificanceRow {
                comparison: format!("{name}/worst"),
                u: w.u,
                p: w.p_two_tailed,
            });
        }
    }
    Ok(rows)
}

pub fn write_significance<W: std::io::Write>(out: W, rows: &[SignificanceRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["comparison", "U", "p"])?;
    for r in rows {
        w.write_record([r.comparison.clone(), r.u.to_string(), r.p.to_string()])?;
    }
    w.flush().map_err(|e| Error::io("significance csv", e))?;
    Ok(())
}

#[derive(Debug, Deserialize)]
struct SampleRow {
    algo: String,
    trial: usize,
    #[allow(dead_code)]
    sample: usize,
    fitness: f64,
}

#[derive(Debug, Deserialize)]
struct ReportLine {
    algo: String,
    trial: usize,
    genome: String,
}

/// Loads `summaries/*.csv` from an experiment directory, with genomes from
/// `report.csv` when present.
pub fn read_summaries(dir: &Path) -> Result<Vec<(String, usize, ReevaluationSummary)>> {
    let sdir = dir.join("summaries");
    let mut paths: Vec<PathBuf> = fs::read_dir(&sdir)
        .map_err(|e| Error::io(&sdir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .collect();
    paths.sort();

    let mut genomes: BTreeMap<(String, usize), Genome> = BTreeMap::new();
    let report = dir.join("report.csv");
    if report.exists() {
        for row in csv::Reader::from_path(&report)?.deserialize::<ReportLine>() {
            let row = row?;
            genomes.insert((row.algo, row.trial), row.genome.parse()?);
        }
    }

    let mut out = Vec::new();
    for p in paths {
        let mut samples = Vec::new();
        let mut key = None;
        for row in csv::Reader::from_path(&p)?.deserialize::<SampleRow>() {
            let row = row?;
            key.get_or_insert((row.algo.clone(), row.trial));
            samples.push(row.fitness);
        }
        if let Some(k) = key {
            let genome = genomes.get(&k).cloned().unwrap_or_else(|| Genome::new(Vec::new()));
            out.push((k.0, k.1, ReevaluationSummary::from_samples(genome, samples)));
        }
    }
    // algorithms in canonical order, then by trial
    out.sort_by_key(|(a, t, _)| {
        let rank = a.parse::<Algorithm>().map_or(usize::MAX, |x| x as usize);
        (rank, a.clone(), *t)
    });
    Ok(out)
}

/// Recomputes the significance table of an experiment directory and writes
/// it to `significance.csv` there.
pub fn compare(dir: &Path) -> Result<Vec<SignificanceRow>> {
    let summaries = read_summaries(dir)?;
    if summaries.is_empty() {
        return Err(Error::Config(format!("no summaries under {}", dir.display())));
    }
    let rows = significance_rows(&summaries)?;
    let path = dir.join("significance.csv");
    let file = fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
    write_significance(file, &rows)?;
    Ok(rows)
}
