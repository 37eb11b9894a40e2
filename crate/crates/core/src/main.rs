use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use antsnn_core::analysis::DEFAULT_P_MAX;
use antsnn_core::orchestrator::artifacts::{write_text, write_trends, CONFIG_TOML};
use antsnn_core::orchestrator::{
    baseline_trials, correlations_from_file, evaluate_genome, export_heatmaps, simulate_colony, trends_from_run,
    trial_seed, write_trial_report, ColonyOptions, EvolutionRun, RunConfig,
};
use antsnn_core::Genome;

#[derive(Parser)]
#[command(name = "antsnn", version, about = "Spiking-network ant colonies evolved to forage")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// TOML run configuration; defaults are used for missing keys.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (0 = all cores).
    #[arg(long)]
    workers: Option<usize>,
    /// Disable both smelling and dropping pheromone.
    #[arg(long)]
    no_pheromone_pathway: bool,
    /// Zero the smell receptors; depositing still works.
    #[arg(long)]
    ablate_sensing: bool,
}

impl Common {
    fn load(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p).with_context(|| format!("loading {}", p.display()))?,
            None => RunConfig::default(),
        };
        if let Some(s) = self.seed {
            cfg.run.seed = s;
        }
        if let Some(w) = self.workers {
            cfg.run.workers = w;
        }
        if self.no_pheromone_pathway {
            cfg.modes.pheromone_pathway = false;
        }
        if self.ablate_sensing {
            cfg.modes.sensing_ablation = true;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Evolve a population of network genomes.
    Evolve {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        generations: Option<usize>,
        /// Snapshot the best individual's world every N generations.
        #[arg(long)]
        snapshot_every: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Continue an evolution run from its last checkpoint.
    Resume {
        /// Run directory holding checkpoint.json and config.toml.
        #[arg(long)]
        out: PathBuf,
        /// Overrides the run's own config.toml.
        #[arg(long)]
        config: Option<PathBuf>,
        /// New generation horizon.
        #[arg(long)]
        generations: Option<usize>,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Evaluate a saved genome on held-out worlds.
    Eval {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        genome: PathBuf,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        /// Also write spike logs of every ant in the first trial.
        #[arg(long)]
        record_spikes: bool,
        #[arg(long, default_value = "eval")]
        out: PathBuf,
    },
    /// Run the rule-based reference colony.
    Baseline {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value = "baseline")]
        out: PathBuf,
    },
    /// Post-process emitted artifacts.
    Analyze {
        #[command(subcommand)]
        what: Analyze,
    },
}

#[derive(Subcommand)]
enum Analyze {
    /// Input/output correlation heatmap from one spike-log file.
    Correlations {
        #[arg(long)]
        spikes: PathBuf,
        #[arg(long, default_value_t = 20)]
        bin_size: u64,
        #[arg(long, default_value = "heatmap.csv")]
        out: PathBuf,
    },
    /// Regress correlation coefficients on generation across a run.
    Trends {
        /// Run directory with spikes/gen_XXXX.ndjson files.
        #[arg(long)]
        run: PathBuf,
        #[arg(long, default_value_t = 20)]
        bin_size: u64,
        #[arg(long, default_value_t = DEFAULT_P_MAX)]
        p_max: f64,
        #[arg(long, default_value = "trends.csv")]
        out: PathBuf,
    },
    /// Pheromone matrices and density marginals from a snapshot file.
    Heatmap {
        #[arg(long)]
        snapshots: PathBuf,
        #[arg(long, default_value = "heatmaps")]
        out: PathBuf,
    },
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Evolve {
            common,
            generations,
            snapshot_every,
            out,
        } => {
            let mut cfg = common.load()?;
            if let Some(g) = generations {
                cfg.ga.generations = g;
            }
            if let Some(s) = snapshot_every {
                cfg.run.snapshot_every = s;
            }
            let dir = out.unwrap_or_else(|| cfg.run.output_dir.clone());
            cfg.run.output_dir = dir.clone();
            let mut run = EvolutionRun::create(cfg, &dir)?;
            drive(&mut run)
        }
        Command::Resume {
            out,
            config,
            generations,
            workers,
        } => {
            let path = config.unwrap_or_else(|| out.join(CONFIG_TOML));
            let mut cfg = RunConfig::load(&path).with_context(|| format!("loading {}", path.display()))?;
            if let Some(g) = generations {
                cfg.ga.generations = g;
            }
            if let Some(w) = workers {
                cfg.run.workers = w;
            }
            cfg.run.output_dir = out.clone();
            let mut run = EvolutionRun::resume(cfg, &out)?;
            drive(&mut run)
        }
        Command::Eval {
            common,
            genome,
            trials,
            record_spikes,
            out,
        } => {
            let cfg = common.load()?;
            let g = Genome::load(&genome)?;
            let results = evaluate_genome(&g, &cfg, trials)?;
            let hash = cfg.hash();
            write_trial_report(&out, &hash, &results)?;
            if record_spikes && trials > 0 {
                let opts = ColonyOptions {
                    record_spikes: true,
                    snapshot_tick: None,
                };
                let run = simulate_colony(&g, &cfg, cfg.modes.pathway(), trial_seed(cfg.run.seed, 0), opts)?;
                antsnn_core::orchestrator::artifacts::write_spike_logs(&out.join("spikes.ndjson"), &hash, &run.spike_logs)?;
            }
            report(&out, &results);
            Ok(())
        }
        Command::Baseline { common, trials, out } => {
            let cfg = common.load()?;
            let results = baseline_trials(&cfg, trials)?;
            write_trial_report(&out, &cfg.hash(), &results)?;
            report(&out, &results);
            Ok(())
        }
        Command::Analyze { what } => analyze(what),
    }
}

fn drive(run: &mut EvolutionRun) -> Result<()> {
    run.run_to_end(|r| {
        eprintln!(
            "gen {:4}  best {:10.2}  mean {:10.2}  sd {:8.2}",
            r.generation, r.best_fitness, r.mean, r.sd
        )
    })?;
    eprintln!("artifacts in {}", run.dir().display());
    Ok(())
}

fn report(out: &Path, results: &[antsnn_core::analysis::TrialResult]) {
    for (model, s) in antsnn_core::analysis::performance_stats(results) {
        eprintln!("{model}: mean food {:.2} (sd {:.2}, n = {})", s.mean, s.sd, s.n);
    }
    eprintln!("results in {}", out.display());
}

fn analyze(what: Analyze) -> Result<()> {
    match what {
        Analyze::Correlations { spikes, bin_size, out } => {
            let m = correlations_from_file(&spikes, bin_size)?;
            let hash = antsnn_core::orchestrator::artifacts::read_ndjson_hash(&spikes)?;
            write_text(&out, &m.to_csv(hash.as_deref()))?;
            eprintln!("wrote {}", out.display());
        }
        Analyze::Trends {
            run,
            bin_size,
            p_max,
            out,
        } => {
            let rows = trends_from_run(&run, bin_size, p_max)?;
            let cfg = RunConfig::load(&run.join(CONFIG_TOML))?;
            write_trends(&out, &cfg.hash(), &rows)?;
            eprintln!("{} significant trends, wrote {}", rows.len(), out.display());
        }
        Analyze::Heatmap { snapshots, out } => {
            let files = export_heatmaps(&snapshots, &out)?;
            eprintln!("wrote {} files to {}", files.len(), out.display());
        }
    }
    Ok(())
}
