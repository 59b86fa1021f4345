use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use playtest::{AppState, SessionConfig};
use skilldepth::harness::{self, ExperimentConfig};
use skilldepth::optimizers::Algorithm;
use skilldepth::params::default_search_space;

/// Evolve skill-deep parameter sets for the space shooter and inspect the results.
#[derive(Parser, Debug)]
#[command(name = "skilldepth", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run trials of one or more optimizers and write the report files.
    ///
    /// Any configuration key can be given as `--key value` (or `--key=value`),
    /// e.g. `--algo ntbea --trials 50 --evals 100 --reeval 100 --seed 7
    /// --out results --mcts.iterations 100`.
    Evolve {
        /// key=value file applied before the command-line keys.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Print the resolved configuration and exit.
        #[arg(long)]
        dry_run: bool,
        #[arg(trailing_var_arg = true, allow_hyphen_values = true, value_name = "--KEY VALUE")]
        settings: Vec<String>,
    },
    /// Recompute the significance table of an experiment directory.
    Compare {
        #[arg(long = "in", value_name = "DIR")]
        input: PathBuf,
    },
    /// Re-simulate one evaluation of a genome and print per-game outcomes.
    Replay {
        #[arg(long)]
        genome: PathBuf,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Games played concurrently; the output does not depend on it.
        #[arg(long, default_value_t = 1)]
        workers: usize,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(trailing_var_arg = true, allow_hyphen_values = true, value_name = "--KEY VALUE")]
        settings: Vec<String>,
    },
    /// Start the play-test server for a genome.
    Serve {
        #[arg(long)]
        genome: Option<PathBuf>,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        /// Experiment directory listed by GET /games.
        #[arg(long)]
        results: Option<PathBuf>,
        #[arg(long, default_value_t = 40)]
        tick_ms: u64,
        #[arg(long, default_value_t = 100)]
        mcts_iterations: u32,
        /// Advance one tick per received action instead of on a timer.
        #[arg(long)]
        lockstep: bool,
    },
}

/// Turns `--key value` / `--key=value` pairs into (key, value).
fn pairs(args: &[String]) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    let mut it = args.iter();
    while let Some(a) = it.next() {
        let Some(key) = a.strip_prefix("--") else {
            bail!("expected --key, got {a:?}");
        };
        match key.split_once('=') {
            Some((k, v)) => out.push((k.to_string(), v.to_string())),
            None => {
                let v = it.next().with_context(|| format!("--{key} needs a value"))?;
                out.push((key.to_string(), v.clone()));
            }
        }
    }
    Ok(out)
}

fn resolve(config: Option<&Path>, settings: &[String]) -> Result<ExperimentConfig> {
    let mut cfg = match config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    for (k, v) in pairs(settings)? {
        cfg.set(&k, &v).with_context(|| format!("--{k}"))?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn evolve(cfg: &ExperimentConfig) -> Result<()> {
    eprintln!(
        "evolving {} x {} trials, {} evaluations each, re-evaluating {} times -> {}",
        cfg.algorithms.iter().map(|a| a.name()).collect::<Vec<_>>().join(","),
        cfg.trials,
        cfg.n_evals,
        cfg.reeval_n,
        cfg.out.display()
    );
    let report = harness::run_experiment(cfg)?;
    let failed: Vec<_> = report
        .trials
        .iter()
        .filter_map(|(a, t, r)| r.as_ref().err().map(|e| format!("{}#{t}: {e}", a.name())))
        .collect();
    println!("{:<8} {:>8} {:>12}", "algo", "trials", "mean");
    for algo in Algorithm::ALL.into_iter().filter(|a| cfg.algorithms.contains(a)) {
        let n = report.outcomes().filter(|o| o.algo == algo).count();
        match report.mean_fitness(algo) {
            Some(m) => println!("{:<8} {n:>8} {m:>12.6}", algo.name()),
            None => println!("{:<8} {n:>8} {:>12}", algo.name(), "-"),
        }
    }
    print_significance(&report.significance);
    for f in &failed {
        eprintln!("trial failed: {f}");
    }
    Ok(())
}

fn print_significance(rows: &[harness::SignificanceRow]) {
    if rows.is_empty() {
        return;
    }
    println!();
    println!("{:<24} {:>10} {:>12}", "comparison", "U", "p");
    for r in rows {
        println!("{:<24} {:>10} {:>12.4e}", r.comparison, r.u, r.p);
    }
}

fn serve(
    genome: Option<&Path>,
    addr: SocketAddr,
    results: Option<PathBuf>,
    tick_ms: u64,
    mcts_iterations: u32,
    lockstep: bool,
) -> Result<()> {
    let mut config = SessionConfig {
        tick_interval: Duration::from_millis(tick_ms),
        lockstep,
        ..SessionConfig::default()
    };
    config.budgets.mcts.iterations = mcts_iterations;
    let mut state = AppState::new(config);
    if let Some(path) = genome {
        state.default_genome = Some(harness::load_genome(path, &state.space)?);
    }
    state.results_dir = results;
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(async move {
        let listener = tokio::net::TcpListener::bind(addr).await?;
        eprintln!("play-test server on ws://{}/ws", listener.local_addr()?);
        playtest::serve(listener, Arc::new(state)).await?;
        Ok(())
    })
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Evolve {
            config,
            dry_run,
            settings,
        } => {
            let cfg = resolve(config.as_deref(), &settings)?;
            if dry_run {
                print!("{}", cfg.to_text());
                return Ok(());
            }
            evolve(&cfg)
        }
        Command::Compare { input } => {
            let rows = harness::compare(&input)?;
            print_significance(&rows);
            Ok(())
        }
        Command::Replay {
            genome,
            seed,
            workers,
            config,
            settings,
        } => {
            let cfg = resolve(config.as_deref(), &settings)?;
            let space = default_search_space();
            let g = harness::load_genome(&genome, &space)?;
            let records = harness::replay(&g, &space, &cfg.fitness, seed, workers)?;
            print!("{}", harness::format_replay(&records));
            Ok(())
        }
        Command::Serve {
            genome,
            port,
            host,
            results,
            tick_ms,
            mcts_iterations,
            lockstep,
        } => {
            let addr: SocketAddr = format!("{host}:{port}").parse().context("bad --host/--port")?;
            serve(genome.as_deref(), addr, results, tick_ms, mcts_iterations, lockstep)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn strings(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn key_value_pairs() {
        let p = pairs(&strings(&["--algo", "ntbea", "--trials=3", "--mcts.iterations", "100"])).unwrap();
        assert_eq!(p[0], ("algo".into(), "ntbea".into()));
        assert_eq!(p[1], ("trials".into(), "3".into()));
        assert_eq!(p[2], ("mcts.iterations".into(), "100".into()));
        assert!(pairs(&strings(&["trials", "3"])).is_err());
        assert!(pairs(&strings(&["--trials"])).is_err());
    }

    #[test]
    fn flags_override_the_file() {
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("c.txt");
        std::fs::write(&file, "trials=7\nevals=9\n").unwrap();
        let cfg = resolve(Some(&file), &strings(&["--evals", "11"])).unwrap();
        assert_eq!((cfg.trials, cfg.n_evals), (7, 11));
        assert!(resolve(None, &strings(&["--bogus", "1"])).is_err());
    }

    #[test]
    fn cli_parses() {
        Cli::try_parse_from(["skilldepth", "evolve", "--algo", "ntbea", "--trials", "50"]).unwrap();
        Cli::try_parse_from(["skilldepth", "compare", "--in", "results"]).unwrap();
        Cli::try_parse_from([
            "skilldepth",
            "replay",
            "--genome",
            "g.txt",
            "--seed",
            "4",
            "--workers",
            "4",
        ])
        .unwrap();
        Cli::try_parse_from(["skilldepth", "serve", "--genome", "g.txt", "--port", "9000"]).unwrap();
        assert!(Cli::try_parse_from(["skilldepth", "compare"]).is_err());
    }
}
