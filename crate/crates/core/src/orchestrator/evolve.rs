//! Generational loop with parallel evaluation and resumable checkpoints.

use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::evolution::{init_population, next_generation, GenerationRecord};
use crate::fitness::FitnessBreakdown;
use crate::genome::Genome;
use crate::rng::{derive_seed, purpose, stream};
use crate::{Error, Result};

use super::colony::{simulate_colony, ColonyOptions, ColonyOutcome};
use super::{EvalSeedPolicy, RunConfig};

pub const CHECKPOINT_VERSION: u32 = 1;

/// Everything needed to continue a run bit-identically. Random streams are
/// derived from `(seed, purpose, generation)`, so no generator state is kept.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub version: u32,
    pub config_hash: String,
    pub seed: u64,
    /// Index of the next generation to evaluate.
    pub next_generation: usize,
    pub population: Vec<Genome>,
    pub records: Vec<GenerationRecord>,
    pub breakdowns: Vec<Vec<FitnessBreakdown>>,
    pub best_genome: Option<Genome>,
}

impl Checkpoint {
    pub fn save(&self, path: &Path) -> Result<()> {
        let tmp = path.with_extension("json.tmp");
        fs::write(&tmp, serde_json::to_vec(self)?)?;
        fs::rename(tmp, path)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let ck: Checkpoint = serde_json::from_slice(&fs::read(path)?)?;
        if ck.version != CHECKPOINT_VERSION {
            return Err(Error::ResumeRefused(format!("checkpoint version {} is not supported", ck.version)));
        }
        Ok(ck)
    }
}

pub struct Evolution {
    cfg: RunConfig,
    hash: String,
    pool: rayon::ThreadPool,
    population: Vec<Genome>,
    generation: usize,
    records: Vec<GenerationRecord>,
    breakdowns: Vec<Vec<FitnessBreakdown>>,
    best_genome: Option<Genome>,
}

impl Evolution {
    pub fn new(cfg: RunConfig) -> Result<Self> {
        cfg.validate()?;
        let population = init_population(&cfg.ga, &mut stream(cfg.run.seed, purpose::INIT_POPULATION, 0));
        Self::assemble(cfg, population, 0, Vec::new(), Vec::new(), None)
    }

    /// Continues from a checkpoint; refuses if the outcome-relevant
    /// configuration differs from the one that wrote it.
    pub fn resume(cfg: RunConfig, ck: Checkpoint) -> Result<Self> {
        cfg.validate()?;
        let hash = cfg.hash();
        if ck.config_hash != hash {
            return Err(Error::ResumeRefused(format!(
                "checkpoint was written with config {} but the current config hashes to {}",
                ck.config_hash, hash
            )));
        }
        if ck.seed != cfg.run.seed
            || ck.population.len() != cfg.ga.population_size
            || ck.records.len() != ck.next_generation
            || ck.breakdowns.len() != ck.next_generation
        {
            return Err(Error::ResumeRefused("checkpoint is internally inconsistent".into()));
        }
        for g in &ck.population {
            g.validate()?;
        }
        Self::assemble(cfg, ck.population, ck.next_generation, ck.records, ck.breakdowns, ck.best_genome)
    }

    fn assemble(
        cfg: RunConfig,
        population: Vec<Genome>,
        generation: usize,
        records: Vec<GenerationRecord>,
        breakdowns: Vec<Vec<FitnessBreakdown>>,
        best_genome: Option<Genome>,
    ) -> Result<Self> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.worker_count())
            .build()
            .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
        Ok(Self {
            hash: cfg.hash(),
            cfg,
            pool,
            population,
            generation,
            records,
            breakdowns,
            best_genome,
        })
    }

    pub fn config(&self) -> &RunConfig {
        &self.cfg
    }

    pub fn config_hash(&self) -> &str {
        &self.hash
    }

    pub fn generation(&self) -> usize {
        self.generation
    }

    pub fn population(&self) -> &[Genome] {
        &self.population
    }

    pub fn records(&self) -> &[GenerationRecord] {
        &self.records
    }

    pub fn breakdowns(&self) -> &[Vec<FitnessBreakdown>] {
        &self.breakdowns
    }

    /// Best individual of the most recently evaluated generation.
    pub fn best_genome(&self) -> Option<&Genome> {
        self.best_genome.as_ref()
    }

    /// World seed shared by all individuals of generation `g`.
    pub fn world_seed(&self, g: usize) -> u64 {
        let index = match self.cfg.run.eval_seed_policy {
            EvalSeedPolicy::PerGeneration => g as u64,
            EvalSeedPolicy::Fixed => 0,
        };
        derive_seed(self.cfg.run.seed, purpose::NEST_PLACEMENT, index)
    }

    /// Re-runs one genome in the world of generation `g` with extra outputs.
    pub fn replay(&self, genome: &Genome, g: usize, opts: ColonyOptions) -> Result<ColonyOutcome> {
        simulate_colony(genome, &self.cfg, self.cfg.modes.pathway(), self.world_seed(g), opts)
    }

    /// Evaluates the current population and breeds the next one.
    pub fn step(&mut self) -> Result<&GenerationRecord> {
        let g = self.generation;
        let seed = self.world_seed(g);
        let flags = self.cfg.modes.pathway();
        let cfg = &self.cfg;
        let population = &self.population;
        let outcomes: Vec<ColonyOutcome> = self.pool.install(|| {
            population
                .par_iter()
                .map(|genome| simulate_colony(genome, cfg, flags, seed, ColonyOptions::default()))
                .collect::<Result<_>>()
        })?;
        let fitnesses: Vec<f64> = outcomes.iter().map(|o| o.fitness).collect();
        let record = GenerationRecord::from_fitnesses(g, fitnesses);
        let next = next_generation(
            &self.population,
            &record.fitnesses,
            &self.cfg.ga,
            &mut stream(self.cfg.run.seed, purpose::GA_OPERATORS, g as u64),
        )?;
        self.best_genome = Some(self.population[record.best_index].clone());
        self.population = next;
        self.breakdowns.push(outcomes.iter().map(|o| o.breakdown).collect());
        self.records.push(record);
        self.generation += 1;
        Ok(self.records.last().expect("just pushed"))
    }

    pub fn checkpoint(&self) -> Checkpoint {
        Checkpoint {
            version: CHECKPOINT_VERSION,
            config_hash: self.hash.clone(),
            seed: self.cfg.run.seed,
            next_generation: self.generation,
            population: self.population.clone(),
            records: self.records.clone(),
            breakdowns: self.breakdowns.clone(),
            best_genome: self.best_genome.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::GaConfig;
    use crate::world::WorldConfig;

    fn tiny() -> RunConfig {
        RunConfig {
            world: WorldConfig {
                n_ants: 3,
                max_ticks: 40,
                ..Default::default()
            },
            ga: GaConfig {
                population_size: 4,
                generations: 3,
                ..Default::default()
            },
            ..Default::default()
        }
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let mut one = tiny();
        one.run.workers = 1;
        let mut three = tiny();
        three.run.workers = 3;
        let (mut a, mut b) = (Evolution::new(one).unwrap(), Evolution::new(three).unwrap());
        for _ in 0..2 {
            assert_eq!(a.step().unwrap(), b.step().unwrap());
        }
        assert_eq!(a.population(), b.population());
    }

    #[test]
    fn resume_refuses_other_config() {
        let mut evo = Evolution::new(tiny()).unwrap();
        evo.step().unwrap();
        let ck = evo.checkpoint();
        let mut other = tiny();
        other.world.n_ants = 5;
        assert!(matches!(Evolution::resume(other, ck.clone()), Err(Error::ResumeRefused(_))));
        let mut longer = tiny();
        longer.ga.generations = 50;
        assert!(Evolution::resume(longer, ck).is_ok());
    }
}
