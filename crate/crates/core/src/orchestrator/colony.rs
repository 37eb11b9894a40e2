//! One colony of network-driven ants sharing a single genome.

use crate::embodiment::{ant_step, ActionCommand, AntBrain, PathwayFlags, SpikeLog};
use crate::fitness::FitnessBreakdown;
use crate::genome::Genome;
use crate::rng::from_seed;
use crate::snn::{Network, NetworkTopology};
use crate::world::{init_world, Snapshot};
use crate::Result;

use super::RunConfig;

/// Optional artifacts collected during a colony run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ColonyOptions {
    pub record_spikes: bool,
    /// Capture the world at this tick, or at the final tick if the run
    /// stops earlier.
    pub snapshot_tick: Option<u32>,
}

#[derive(Debug, Clone)]
pub struct ColonyOutcome {
    pub breakdown: FitnessBreakdown,
    pub fitness: f64,
    pub food_delivered: u32,
    /// Last simulated tick.
    pub t_s: u32,
    pub spike_logs: Vec<SpikeLog>,
    pub snapshot: Option<Snapshot>,
}

/// Runs `cfg.world.n_ants` ants, each with its own copy of the network built
/// from `genome`, in a world seeded by `world_seed`. The run stops at the
/// horizon or on the tick that delivers the last unit of food.
pub fn simulate_colony(
    genome: &Genome,
    cfg: &RunConfig,
    flags: PathwayFlags,
    world_seed: u64,
    opts: ColonyOptions,
) -> Result<ColonyOutcome> {
    let network = Network::build(genome, &NetworkTopology::canonical(), cfg.neuron.clone())?;
    let (mut grid, mut ants) = init_world(&cfg.world, &mut from_seed(world_seed))?;
    let mut brains: Vec<AntBrain> = ants
        .iter()
        .map(|a| AntBrain::new(network.clone(), a.id, opts.record_spikes))
        .collect();
    let gains = cfg.embodiment.gains();
    let t_max = cfg.world.max_ticks;
    let mut breakdown = FitnessBreakdown::new(t_max);
    let mut actions = vec![ActionCommand::default(); ants.len()];
    let mut events = Vec::new();
    let mut snapshot = None;

    for t in 1..=t_max {
        events.clear();
        for ((ant, brain), action) in ants.iter_mut().zip(brains.iter_mut()).zip(actions.iter_mut()) {
            *action = ant_step(ant, &mut grid, brain, &cfg.embodiment, &gains, flags, &mut events);
        }
        grid.end_tick();
        breakdown.accumulate_tick(&events, &actions, &cfg.reward);
        let done = grid.total_food() > 0 && grid.all_food_delivered();
        if let Some(at) = opts.snapshot_tick {
            if snapshot.is_none() && (t == at || done || t == t_max) {
                snapshot = Some(grid.snapshot(&ants));
            }
        }
        if done {
            break;
        }
    }

    Ok(ColonyOutcome {
        fitness: breakdown.finalize(&cfg.reward),
        food_delivered: grid.delivered(),
        t_s: breakdown.t_s,
        breakdown,
        spike_logs: brains.into_iter().filter_map(|b| b.log).collect(),
        snapshot,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::WorldConfig;

    fn small() -> RunConfig {
        RunConfig {
            world: WorldConfig {
                n_ants: 4,
                max_ticks: 60,
                ..Default::default()
            },
            ..Default::default()
        }
    }

    #[test]
    fn dead_genome_pays_only_step_cost() {
        let cfg = small();
        let out = simulate_colony(&Genome::dead(), &cfg, PathwayFlags::INTACT, 3, ColonyOptions::default()).unwrap();
        assert_eq!(out.food_delivered, 0);
        assert_eq!(out.t_s, 60);
        let expected = -(60.0 * 4.0 * cfg.reward.step_cost);
        assert!((out.fitness - expected).abs() < 1e-9);
    }

    #[test]
    fn same_inputs_same_outcome() {
        let cfg = small();
        let g = crate::evolution::random_genome(5.0, &mut from_seed(8));
        let opts = ColonyOptions {
            record_spikes: true,
            snapshot_tick: Some(30),
        };
        let a = simulate_colony(&g, &cfg, PathwayFlags::INTACT, 11, opts).unwrap();
        let b = simulate_colony(&g, &cfg, PathwayFlags::INTACT, 11, opts).unwrap();
        assert_eq!(a.fitness.to_bits(), b.fitness.to_bits());
        assert_eq!(a.spike_logs, b.spike_logs);
        assert_eq!(a.spike_logs.len(), 4);
        assert_eq!(a.snapshot.unwrap().tick, 30);
    }
}
