//! Run configuration: one TOML file with a section per subsystem.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::baseline::BaselineConfig;
use crate::embodiment::{EmbodimentConfig, PathwayFlags};
use crate::evolution::GaConfig;
use crate::fitness::RewardSchedule;
use crate::snn::NeuronParams;
use crate::world::WorldConfig;
use crate::{Error, Result};

/// How evaluation worlds are seeded across generations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EvalSeedPolicy {
    /// A fresh nest placement every generation, shared by all individuals.
    PerGeneration,
    /// The same nest placement in every generation.
    Fixed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSection {
    pub seed: u64,
    /// Worker threads for colony evaluations; 0 uses all available cores.
    pub workers: usize,
    pub eval_seed_policy: EvalSeedPolicy,
    /// Snapshot the best individual's world every N generations (0 = never).
    pub snapshot_every: usize,
    /// World tick at which snapshots are taken.
    pub snapshot_tick: u32,
    /// Record the best individual's spike trains every N generations (0 = never).
    pub spike_log_every: usize,
    /// Write a checkpoint every N generations (0 = only at the end).
    pub checkpoint_every: usize,
    pub output_dir: PathBuf,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            seed: 1,
            workers: 0,
            eval_seed_policy: EvalSeedPolicy::PerGeneration,
            snapshot_every: 0,
            snapshot_tick: 1900,
            spike_log_every: 10,
            checkpoint_every: 10,
            output_dir: PathBuf::from("runs/default"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModeFlags {
    /// Ants can both smell and drop pheromone.
    pub pheromone_pathway: bool,
    /// Smell receptors read zero; depositing is unaffected.
    pub sensing_ablation: bool,
}

impl Default for ModeFlags {
    fn default() -> Self {
        Self {
            pheromone_pathway: true,
            sensing_ablation: false,
        }
    }
}

impl ModeFlags {
    pub fn pathway(&self) -> PathwayFlags {
        PathwayFlags::from_modes(self.pheromone_pathway, self.sensing_ablation)
    }

    pub fn model_name(&self) -> &'static str {
        match (self.pheromone_pathway, self.sensing_ablation) {
            (false, _) => "snn-no-pheromone",
            (true, true) => "snn-ablated-sensing",
            (true, false) => "snn",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub run: RunSection,
    pub modes: ModeFlags,
    pub world: WorldConfig,
    pub neuron: NeuronParams,
    pub embodiment: EmbodimentConfig,
    pub ga: GaConfig,
    pub reward: RewardSchedule,
    pub baseline: BaselineConfig,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&fs::read_to_string(path)?)
    }

    /// Parses and validates TOML text; missing keys take their defaults.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string_pretty(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        self.world.validate()?;
        self.neuron.validate()?;
        self.embodiment.validate()?;
        self.ga.validate()?;
        self.reward.validate()?;
        self.baseline.validate()?;
        if self.run.snapshot_tick == 0 {
            return Err(Error::Config("snapshot_tick must be at least 1".into()));
        }
        Ok(())
    }

    /// Hash over everything that influences simulated outcomes. The output
    /// directory, worker count and generation horizon are excluded so that
    /// a run can be moved, rescheduled or extended and still resume.
    pub fn hash(&self) -> String {
        let mut norm = self.clone();
        norm.run.output_dir = PathBuf::new();
        norm.run.workers = 0;
        norm.ga.generations = 0;
        let json = serde_json::to_string(&norm).expect("config serializes");
        let digest = Sha256::digest(json.as_bytes());
        hex::encode(&digest[..8])
    }

    pub fn worker_count(&self) -> usize {
        if self.run.workers > 0 {
            self.run.workers
        } else {
            std::thread::available_parallelism().map_or(1, |n| n.get())
        }
    }
}
