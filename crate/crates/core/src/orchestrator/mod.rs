//! Run orchestration: configuration, colony evaluation, the evolution loop
//! with checkpoints, held-out evaluation, baseline runs and the analysis
//! passes over emitted artifacts.

pub mod artifacts;
mod colony;
mod config;
mod evolve;

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

pub use colony::{simulate_colony, ColonyOptions, ColonyOutcome};
pub use config::{EvalSeedPolicy, ModeFlags, RunConfig, RunSection};
pub use evolve::{Checkpoint, Evolution, CHECKPOINT_VERSION};

use crate::analysis::{
    correlation_heatmap, pheromone_density_marginals, performance_stats, trend_report, CorrelationMatrix, TrendRow,
    TrialResult,
};
use crate::baseline::run_baseline_trial;
use crate::genome::Genome;
use crate::rng::{derive_seed, purpose};
use crate::world::matrix_csv;
use crate::{Error, Result};

use artifacts::*;

/// Seed of held-out trial `i` for a master seed.
pub fn trial_seed(master: u64, i: usize) -> u64 {
    derive_seed(master, purpose::TRIAL, i as u64)
}

fn spike_path(dir: &Path, generation: usize) -> PathBuf {
    dir.join(SPIKES_DIR).join(format!("gen_{generation:04}.ndjson"))
}

/// Drives an [`Evolution`] to `cfg.ga.generations`, writing artifacts to
/// `dir` as it goes.
pub struct EvolutionRun {
    pub evolution: Evolution,
    dir: PathBuf,
}

impl EvolutionRun {
    /// Starts a fresh run in `dir`.
    pub fn create(cfg: RunConfig, dir: &Path) -> Result<Self> {
        let evolution = Evolution::new(cfg)?;
        Self::open(evolution, dir, true)
    }

    /// Resumes from `dir/checkpoint.json`. `cfg` may extend the horizon but
    /// must otherwise match the run that wrote the checkpoint.
    pub fn resume(cfg: RunConfig, dir: &Path) -> Result<Self> {
        let ck = Checkpoint::load(&dir.join(CHECKPOINT_JSON))?;
        let evolution = Evolution::resume(cfg, ck)?;
        Self::open(evolution, dir, false)
    }

    fn open(evolution: Evolution, dir: &Path, fresh: bool) -> Result<Self> {
        fs::create_dir_all(dir.join(SPIKES_DIR))?;
        let hash = evolution.config_hash().to_string();
        let cfg = evolution.config();
        write_text(&dir.join(CONFIG_TOML), &format!("# config_hash={hash}\n{}", cfg.to_toml()?))?;
        let snaps = dir.join(SNAPSHOTS_NDJSON);
        if fresh && snaps.exists() {
            fs::remove_file(&snaps)?;
        }
        write_generation_tables(dir, &hash, evolution.records(), evolution.breakdowns())?;
        Ok(Self {
            evolution,
            dir: dir.to_path_buf(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// Evaluates one generation and writes its artifacts.
    pub fn step(&mut self) -> Result<()> {
        let g = self.evolution.generation();
        let record = self.evolution.step()?.clone();
        let hash = self.evolution.config_hash().to_string();
        let run = self.evolution.config().run.clone();
        let horizon = self.evolution.config().ga.generations;
        let last = g + 1 >= horizon;
        write_generation_tables(&self.dir, &hash, self.evolution.records(), self.evolution.breakdowns())?;

        let best = self.evolution.best_genome().expect("set by step").clone();
        best.save_tagged(&self.dir.join(BEST_GENOME_CSV), Some(&hash))?;
        let want_spikes = run.spike_log_every > 0 && (g % run.spike_log_every == 0 || last);
        let want_snapshot = run.snapshot_every > 0 && (g % run.snapshot_every == 0 || last);
        if want_spikes || want_snapshot {
            let opts = ColonyOptions {
                record_spikes: want_spikes,
                snapshot_tick: want_snapshot.then_some(run.snapshot_tick),
            };
            let out = self.evolution.replay(&best, g, opts)?;
            if want_spikes {
                write_spike_logs(&spike_path(&self.dir, g), &hash, &out.spike_logs)?;
            }
            if let Some(snapshot) = out.snapshot {
                append_snapshot(
                    &self.dir.join(SNAPSHOTS_NDJSON),
                    &SnapshotRecord {
                        config_hash: hash.clone(),
                        generation: Some(g),
                        individual: Some(record.best_index),
                        snapshot,
                    },
                )?;
            }
        }
        if last || (run.checkpoint_every > 0 && (g + 1) % run.checkpoint_every == 0) {
            self.save_checkpoint()?;
        }
        Ok(())
    }

    pub fn save_checkpoint(&self) -> Result<()> {
        self.evolution.checkpoint().save(&self.dir.join(CHECKPOINT_JSON))
    }

    /// Runs until the configured horizon; `progress` sees each finished
    /// generation.
    pub fn run_to_end<F: FnMut(&crate::evolution::GenerationRecord)>(&mut self, mut progress: F) -> Result<()> {
        while self.evolution.generation() < self.evolution.config().ga.generations {
            self.step()?;
            progress(self.evolution.records().last().expect("stepped"));
        }
        Ok(())
    }
}

/// Evaluates `genome` on `n_trials` held-out worlds under `cfg.modes`.
pub fn evaluate_genome(genome: &Genome, cfg: &RunConfig, n_trials: usize) -> Result<Vec<TrialResult>> {
    cfg.validate()?;
    let flags = cfg.modes.pathway();
    let model = cfg.modes.model_name();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.worker_count())
        .build()
        .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
    pool.install(|| {
        (0..n_trials)
            .into_par_iter()
            .map(|i| {
                let seed = trial_seed(cfg.run.seed, i);
                let out = simulate_colony(genome, cfg, flags, seed, ColonyOptions::default())?;
                Ok(TrialResult {
                    model: model.to_string(),
                    trial_seed: seed,
                    food_delivered: out.food_delivered,
                    t_s: out.t_s,
                })
            })
            .collect()
    })
}

/// Runs the rule-based colony on `n_trials` held-out worlds.
pub fn baseline_trials(cfg: &RunConfig, n_trials: usize) -> Result<Vec<TrialResult>> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.worker_count())
        .build()
        .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
    pool.install(|| {
        (0..n_trials)
            .into_par_iter()
            .map(|i| run_baseline_trial(&cfg.world, &cfg.baseline, trial_seed(cfg.run.seed, i)))
            .collect()
    })
}

/// Writes `trials.csv` and `performance.csv` for a set of trial results.
pub fn write_trial_report(dir: &Path, config_hash: &str, trials: &[TrialResult]) -> Result<()> {
    fs::create_dir_all(dir)?;
    write_trials(&dir.join("trials.csv"), config_hash, trials)?;
    write_performance(&dir.join("performance.csv"), config_hash, &performance_stats(trials))
}

/// Mean input/output correlation over all ants of one spike-log file.
pub fn correlations_from_file(spikes: &Path, bin_size: u64) -> Result<CorrelationMatrix> {
    let logs = read_spike_logs(spikes)?;
    correlation_heatmap(&logs, bin_size)
}

/// Collects `spikes/gen_XXXX.ndjson` files of a run directory, in
/// generation order.
pub fn spike_files(run_dir: &Path) -> Result<Vec<(usize, PathBuf)>> {
    let mut out = Vec::new();
    for entry in fs::read_dir(run_dir.join(SPIKES_DIR))? {
        let path = entry?.path();
        let gen = path
            .file_name()
            .and_then(|n| n.to_str())
            .and_then(|n| n.strip_prefix("gen_"))
            .and_then(|n| n.strip_suffix(".ndjson"))
            .and_then(|n| n.parse::<usize>().ok());
        if let Some(g) = gen {
            out.push((g, path));
        }
    }
    out.sort();
    Ok(out)
}

/// Significant trends of input/output coefficients across the logged
/// generations of a run.
pub fn trends_from_run(run_dir: &Path, bin_size: u64, p_max: f64) -> Result<Vec<TrendRow>> {
    let per_gen = spike_files(run_dir)?
        .into_iter()
        .map(|(g, p)| Ok((g, correlations_from_file(&p, bin_size)?)))
        .collect::<Result<Vec<_>>>()?;
    trend_report(&per_gen, p_max)
}

/// Writes the pheromone matrix and its marginals for every snapshot in
/// `snapshots`; returns the written file paths.
pub fn export_heatmaps(snapshots: &Path, out_dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out_dir)?;
    let mut written = Vec::new();
    for rec in read_snapshots(snapshots)? {
        let stem = match rec.generation {
            Some(g) => format!("gen_{g:04}_tick_{:05}", rec.snapshot.tick),
            None => format!("tick_{:05}", rec.snapshot.tick),
        };
        let header = format!("# config_hash={}\n", rec.config_hash);
        let matrix = out_dir.join(format!("pheromone_{stem}.csv"));
        write_text(&matrix, &format!("{header}{}", matrix_csv(&rec.snapshot.pheromone)))?;
        written.push(matrix);
        let m = pheromone_density_marginals(&rec.snapshot.pheromone)?;
        let mut text = header.clone();
        text.push_str("axis,index,density\n");
        for (i, v) in m.x.iter().enumerate() {
            text.push_str(&format!("x,{i},{v}\n"));
        }
        for (i, v) in m.y.iter().enumerate() {
            text.push_str(&format!("y,{i},{v}\n"));
        }
        let marg = out_dir.join(format!("marginals_{stem}.csv"));
        write_text(&marg, &text)?;
        written.push(marg);
    }
    Ok(written)
}
