//! The `GET /games` listing: evolved genomes read from an experiment's report.

use std::path::Path;

use serde::{Deserialize, Serialize};
use skilldepth::params::Genome;

use crate::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct GameEntry {
    /// `{algo}-{trial}`, unique within one results directory.
    pub id: String,
    pub algo: String,
    pub trial: usize,
    pub mean_fitness: f64,
    pub std_error: f64,
    pub genome: Vec<u8>,
}

#[derive(Deserialize)]
struct ReportRow {
    algo: String,
    trial: usize,
    mean: f64,
    stderr: f64,
    genome: String,
}

/// Reads `report.csv` under `dir`. A directory without a report lists nothing.
pub fn list_games(dir: &Path) -> Result<Vec<GameEntry>> {
    let path = dir.join("report.csv");
    if !path.is_file() {
        return Ok(Vec::new());
    }
    let mut rd = csv::Reader::from_path(&path)?;
    let mut out = Vec::new();
    for row in rd.deserialize::<ReportRow>() {
        let row = row?;
        let genome: Genome = row.genome.parse()?;
        out.push(GameEntry {
            id: format!("{}-{}", row.algo, row.trial),
            algo: row.algo,
            trial: row.trial,
            mean_fitness: row.mean,
            std_error: row.stderr,
            genome: genome.levels,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_rows_become_entries() {
        let dir = tempfile::tempdir().unwrap();
        assert!(list_games(dir.path()).unwrap().is_empty());
        std::fs::write(
            dir.path().join("report.csv"),
            "algo,trial,mean,stderr,n,genome\nntbea,0,0.25,0.01,100,\"1,2,3\"\nrmhc,4,-0.5,0.2,100,\"0,0,0\"\n",
        )
        .unwrap();
        let games = list_games(dir.path()).unwrap();
        assert_eq!(games.len(), 2);
        assert_eq!(games[0].id, "ntbea-0");
        assert_eq!(games[0].genome, vec![1, 2, 3]);
        assert_eq!(games[1].mean_fitness, -0.5);
        let json = serde_json::to_value(&games[0]).unwrap();
        assert_eq!(json["meanFitness"], 0.25);
    }
}
