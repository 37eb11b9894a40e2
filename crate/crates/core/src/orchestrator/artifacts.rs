//! File formats written and read by runs. CSV files open with a
//! `# config_hash=<hash>` comment line; NDJSON rows carry a `config_hash`
//! field.

use std::collections::BTreeMap;
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::analysis::{PerformanceStats, TrendRow, TrialResult};
use crate::embodiment::{SpikeLog, SpikeLogRecord};
use crate::evolution::GenerationRecord;
use crate::fitness::FitnessBreakdown;
use crate::world::Snapshot;
use crate::{Error, Result};

pub const RECORDS_CSV: &str = "records.csv";
pub const STATS_CSV: &str = "stats.csv";
pub const BREAKDOWN_CSV: &str = "breakdown.csv";
pub const BEST_GENOME_CSV: &str = "best_genome.csv";
pub const SNAPSHOTS_NDJSON: &str = "snapshots.ndjson";
pub const CHECKPOINT_JSON: &str = "checkpoint.json";
pub const CONFIG_TOML: &str = "config.toml";
pub const SPIKES_DIR: &str = "spikes";

fn csv_writer(path: &Path, config_hash: &str) -> Result<csv::Writer<BufWriter<File>>> {
    let mut f = BufWriter::new(File::create(path)?);
    writeln!(f, "# config_hash={config_hash}")?;
    Ok(csv::Writer::from_writer(f))
}

fn csv_reader(path: &Path) -> Result<csv::Reader<File>> {
    Ok(csv::ReaderBuilder::new().comment(Some(b'#')).from_path(path)?)
}

/// Reads the hash from the leading comment of a CSV file, if present.
pub fn read_csv_hash(path: &Path) -> Result<Option<String>> {
    let mut first = String::new();
    BufReader::new(File::open(path)?).read_line(&mut first)?;
    Ok(first.trim().strip_prefix("# config_hash=").map(str::to_string))
}

/// Reads the `config_hash` field of the first row of an NDJSON file.
pub fn read_ndjson_hash(path: &Path) -> Result<Option<String>> {
    let mut first = String::new();
    BufReader::new(File::open(path)?).read_line(&mut first)?;
    if first.trim().is_empty() {
        return Ok(None);
    }
    let v: serde_json::Value = serde_json::from_str(&first)?;
    Ok(v.get("config_hash").and_then(|h| h.as_str()).map(str::to_string))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RecordRow {
    gen: usize,
    ind: usize,
    fitness: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct StatsRow {
    gen: usize,
    mean: f64,
    sd: f64,
    best_fitness: f64,
    best_ind: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct BreakdownRow {
    gen: usize,
    ind: usize,
    sum_nest: f64,
    sum_food: f64,
    sum_cost: f64,
    #[serde(rename = "T_s")]
    t_s: u32,
    fitness: f64,
}

/// Rewrites the per-generation tables from the full history.
pub fn write_generation_tables(
    dir: &Path,
    config_hash: &str,
    records: &[GenerationRecord],
    breakdowns: &[Vec<FitnessBreakdown>],
) -> Result<()> {
    let mut rec = csv_writer(&dir.join(RECORDS_CSV), config_hash)?;
    let mut stats = csv_writer(&dir.join(STATS_CSV), config_hash)?;
    let mut bd = csv_writer(&dir.join(BREAKDOWN_CSV), config_hash)?;
    for (r, bds) in records.iter().zip(breakdowns) {
        stats.serialize(StatsRow {
            gen: r.generation,
            mean: r.mean,
            sd: r.sd,
            best_fitness: r.best_fitness,
            best_ind: r.best_index,
        })?;
        for (ind, (&fitness, b)) in r.fitnesses.iter().zip(bds).enumerate() {
            rec.serialize(RecordRow {
                gen: r.generation,
                ind,
                fitness,
            })?;
            bd.serialize(BreakdownRow {
                gen: r.generation,
                ind,
                sum_nest: b.sum_nest,
                sum_food: b.sum_food,
                sum_cost: b.sum_cost,
                t_s: b.t_s,
                fitness,
            })?;
        }
    }
    rec.flush()?;
    stats.flush()?;
    bd.flush()?;
    Ok(())
}

/// Reads `records.csv` back as `(gen, ind, fitness)` triples.
pub fn read_records(path: &Path) -> Result<Vec<(usize, usize, f64)>> {
    csv_reader(path)?
        .deserialize::<RecordRow>()
        .map(|r| Ok(r.map(|r| (r.gen, r.ind, r.fitness))?))
        .collect()
}

pub fn write_trials(path: &Path, config_hash: &str, trials: &[TrialResult]) -> Result<()> {
    let mut w = csv_writer(path, config_hash)?;
    for t in trials {
        w.serialize(t)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_trials(path: &Path) -> Result<Vec<TrialResult>> {
    Ok(csv_reader(path)?.deserialize().collect::<Result<_, _>>()?)
}

#[derive(Debug, Clone, Serialize)]
struct PerformanceRow<'a> {
    model: &'a str,
    mean: f64,
    sd: f64,
    n: usize,
}

pub fn write_performance(path: &Path, config_hash: &str, stats: &BTreeMap<String, PerformanceStats>) -> Result<()> {
    let mut w = csv_writer(path, config_hash)?;
    for (model, s) in stats {
        w.serialize(PerformanceRow {
            model,
            mean: s.mean,
            sd: s.sd,
            n: s.n,
        })?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_trends(path: &Path, config_hash: &str, rows: &[TrendRow]) -> Result<()> {
    let mut w = csv_writer(path, config_hash)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text)?;
    Ok(())
}

/// One spike-train row per ant and channel.
pub fn write_spike_logs(path: &Path, config_hash: &str, logs: &[SpikeLog]) -> Result<()> {
    let mut f = BufWriter::new(File::create(path)?);
    for log in logs {
        for rec in log.to_records(Some(config_hash)) {
            serde_json::to_writer(&mut f, &rec)?;
            f.write_all(b"\n")?;
        }
    }
    f.flush()?;
    Ok(())
}

pub fn read_spike_logs(path: &Path) -> Result<Vec<SpikeLog>> {
    let records = read_ndjson::<SpikeLogRecord>(path)?;
    SpikeLog::from_records(&records)
}

/// A world snapshot tagged with where it came from.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SnapshotRecord {
    pub config_hash: String,
    pub generation: Option<usize>,
    pub individual: Option<usize>,
    #[serde(flatten)]
    pub snapshot: Snapshot,
}

pub fn append_snapshot(path: &Path, record: &SnapshotRecord) -> Result<()> {
    let mut f = BufWriter::new(OpenOptions::new().create(true).append(true).open(path)?);
    serde_json::to_writer(&mut f, record)?;
    f.write_all(b"\n")?;
    f.flush()?;
    Ok(())
}

pub fn read_snapshots(path: &Path) -> Result<Vec<SnapshotRecord>> {
    read_ndjson(path)
}

fn read_ndjson<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let reader = BufReader::new(File::open(path)?);
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| Error::Format {
            path: path.to_path_buf(),
            reason: format!("line {}: {e}", i + 1),
        })?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::AntPose;

    #[test]
    fn trials_roundtrip_with_hash() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("trials.csv");
        let rows = vec![TrialResult {
            model: "snn".into(),
            trial_seed: 7,
            food_delivered: 12,
            t_s: 2000,
        }];
        write_trials(&p, "deadbeef", &rows).unwrap();
        assert_eq!(read_csv_hash(&p).unwrap().as_deref(), Some("deadbeef"));
        assert_eq!(read_trials(&p).unwrap(), rows);
        let header = fs::read_to_string(&p).unwrap().lines().nth(1).unwrap().to_string();
        assert_eq!(header, "model,trial_seed,food_delivered,T_s");
    }

    #[test]
    fn generation_tables_have_expected_columns() {
        let dir = tempfile::tempdir().unwrap();
        let rec = GenerationRecord::from_fitnesses(0, vec![1.0, -2.0]);
        let bd = vec![FitnessBreakdown::new(10); 2];
        write_generation_tables(dir.path(), "h", &[rec], &[bd]).unwrap();
        let text = fs::read_to_string(dir.path().join(BREAKDOWN_CSV)).unwrap();
        assert_eq!(text.lines().nth(1).unwrap(), "gen,ind,sum_nest,sum_food,sum_cost,T_s,fitness");
        let recs = read_records(&dir.path().join(RECORDS_CSV)).unwrap();
        assert_eq!(recs, vec![(0, 0, 1.0), (0, 1, -2.0)]);
    }

    #[test]
    fn snapshot_ndjson_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join(SNAPSHOTS_NDJSON);
        let snap = Snapshot {
            tick: 5,
            pheromone: vec![vec![0.5, 0.0]],
            food: vec![vec![1, 0]],
            nest_center: (1.5, 0.5),
            ants: vec![AntPose {
                id: 0,
                x: 1.0,
                y: 0.2,
                heading: 0.0,
                carrying: false,
            }],
        };
        for g in 0..2 {
            append_snapshot(
                &p,
                &SnapshotRecord {
                    config_hash: "h".into(),
                    generation: Some(g),
                    individual: Some(0),
                    snapshot: snap.clone(),
                },
            )
            .unwrap();
        }
        let back = read_snapshots(&p).unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(back[1].snapshot.pheromone, snap.pheromone);
        let line = fs::read_to_string(&p).unwrap();
        let v: serde_json::Value = serde_json::from_str(line.lines().next().unwrap()).unwrap();
        for key in ["tick", "pheromone", "food", "nest_center", "ants", "config_hash"] {
            assert!(v.get(key).is_some(), "{key}");
        }
    }
}
