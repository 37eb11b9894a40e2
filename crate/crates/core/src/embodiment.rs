//! Sensor encoding, action decoding and the per-ant sense→think→act loop.
//!
//! Channel order is fixed and shared by the genome layout, spike logs and
//! analysis labels: see [`INPUT_LABELS`] and [`OUTPUT_LABELS`].

use serde::{Deserialize, Serialize};

use crate::snn::{Network, SpikeEvent, N_INPUT, N_OUTPUT, OUTPUT_START};
use crate::world::{AntState, EventKind, WorldEvent, WorldGrid};
use crate::{Error, Result};

pub const INPUT_LABELS: [&str; N_INPUT] = [
    "Smell Left",
    "Smell Middle",
    "Smell Right",
    "Nest Left",
    "Nest Middle",
    "Nest Right",
    "On Nest",
    "Reward",
    "Nociceptor",
    "Visual Green",
    "Visual Red",
    "Heartbeat",
];

pub const OUTPUT_LABELS: [&str; N_OUTPUT] = ["Left", "Right", "Move", "Pheromone"];

pub const OUT_LEFT: usize = 0;
pub const OUT_RIGHT: usize = 1;
pub const OUT_MOVE: usize = 2;
pub const OUT_PHEROMONE: usize = 3;

pub const HEARTBEAT: usize = 11;

/// Total spike-log channels: 12 inputs followed by 4 outputs.
pub const N_CHANNELS: usize = N_INPUT + N_OUTPUT;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SensorReading {
    pub smell_left: f64,
    pub smell_middle: f64,
    pub smell_right: f64,
    pub nest_left: f64,
    pub nest_middle: f64,
    pub nest_right: f64,
    pub on_nest: f64,
    pub reward: f64,
    pub nociceptor: f64,
    pub visual_green: f64,
    pub visual_red: f64,
    pub heartbeat: f64,
}

impl SensorReading {
    pub fn to_array(&self) -> [f64; N_INPUT] {
        [
            self.smell_left,
            self.smell_middle,
            self.smell_right,
            self.nest_left,
            self.nest_middle,
            self.nest_right,
            self.on_nest,
            self.reward,
            self.nociceptor,
            self.visual_green,
            self.visual_red,
            self.heartbeat,
        ]
    }

    pub fn from_array(a: [f64; N_INPUT]) -> Self {
        Self {
            smell_left: a[0],
            smell_middle: a[1],
            smell_right: a[2],
            nest_left: a[3],
            nest_middle: a[4],
            nest_right: a[5],
            on_nest: a[6],
            reward: a[7],
            nociceptor: a[8],
            visual_green: a[9],
            visual_red: a[10],
            heartbeat: a[11],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ActionCommand {
    pub rotate_left: u32,
    pub rotate_right: u32,
    pub move_forward: bool,
    pub drop_pheromone: bool,
}

impl ActionCommand {
    /// Left minus right spike count.
    pub fn net_rotation(&self) -> i64 {
        self.rotate_left as i64 - self.rotate_right as i64
    }

    /// Actions charged by the fitness: a net turn, a step, a pheromone drop.
    pub fn action_count(&self) -> u32 {
        u32::from(self.net_rotation() != 0) + u32::from(self.move_forward) + u32::from(self.drop_pheromone)
    }

    pub fn is_noop(&self) -> bool {
        self.action_count() == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EmbodimentConfig {
    /// Drive (mV of steady-state depolarisation) for a sensory reading of 1.
    pub sensory_gain: f64,
    pub heartbeat_gain: f64,
    pub move_threshold: u32,
    pub drop_threshold: u32,
    /// Network ticks per world tick.
    pub window_ticks: u32,
}

impl Default for EmbodimentConfig {
    fn default() -> Self {
        Self {
            sensory_gain: 100.0,
            heartbeat_gain: 20.0,
            move_threshold: 1,
            drop_threshold: 1,
            window_ticks: 20,
        }
    }
}

impl EmbodimentConfig {
    pub fn gains(&self) -> [f64; N_INPUT] {
        let mut g = [self.sensory_gain; N_INPUT];
        g[HEARTBEAT] = self.heartbeat_gain;
        g
    }

    pub fn validate(&self) -> Result<()> {
        if self.window_ticks == 0 {
            return Err(Error::Config("window_ticks must be at least 1".into()));
        }
        if !(self.sensory_gain.is_finite() && self.heartbeat_gain.is_finite()) {
            return Err(Error::Config("gains must be finite".into()));
        }
        Ok(())
    }
}

/// Which parts of the pheromone pathway are wired up.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathwayFlags {
    pub sensing: bool,
    pub depositing: bool,
}

impl PathwayFlags {
    pub const INTACT: Self = Self {
        sensing: true,
        depositing: true,
    };

    /// `pheromone_pathway = false` disables both directions;
    /// `ablate_sensing` only blinds the smell receptors.
    pub fn from_modes(pheromone_pathway: bool, ablate_sensing: bool) -> Self {
        Self {
            sensing: pheromone_pathway && !ablate_sensing,
            depositing: pheromone_pathway,
        }
    }
}

impl Default for PathwayFlags {
    fn default() -> Self {
        Self::INTACT
    }
}

pub fn encode(reading: &SensorReading, gains: &[f64; N_INPUT]) -> [f64; N_INPUT] {
    let r = reading.to_array();
    std::array::from_fn(|i| gains[i] * r[i])
}

pub fn decode(counts: [u32; N_OUTPUT], move_threshold: u32, drop_threshold: u32) -> ActionCommand {
    ActionCommand {
        rotate_left: counts[OUT_LEFT],
        rotate_right: counts[OUT_RIGHT],
        move_forward: counts[OUT_MOVE] >= move_threshold,
        drop_pheromone: counts[OUT_PHEROMONE] >= drop_threshold,
    }
}

/// Per-ant spike timestamps for the 12 input and 4 output channels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpikeLog {
    pub ant_id: usize,
    /// `channels[c]` holds network ticks (1-based) of spikes on channel `c`.
    pub channels: Vec<Vec<u64>>,
    /// Network ticks covered by the log.
    pub duration: u64,
}

/// NDJSON row of an exported spike log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpikeLogRecord {
    pub ant_id: usize,
    pub channel: String,
    pub timestamps: Vec<u64>,
    pub duration: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config_hash: Option<String>,
}

impl SpikeLog {
    pub fn new(ant_id: usize) -> Self {
        Self {
            ant_id,
            channels: vec![Vec::new(); N_CHANNELS],
            duration: 0,
        }
    }

    /// Maps a neuron spike to its channel; hidden neurons are not logged.
    pub fn record(&mut self, spike: SpikeEvent) {
        let ch = if spike.neuron < N_INPUT {
            spike.neuron
        } else if spike.neuron >= OUTPUT_START {
            N_INPUT + spike.neuron - OUTPUT_START
        } else {
            return;
        };
        debug_assert!(self.channels[ch].last().is_none_or(|&t| t < spike.tick));
        self.channels[ch].push(spike.tick);
    }

    pub fn channel_label(ch: usize) -> &'static str {
        if ch < N_INPUT {
            INPUT_LABELS[ch]
        } else {
            OUTPUT_LABELS[ch - N_INPUT]
        }
    }

    pub fn to_records(&self, config_hash: Option<&str>) -> Vec<SpikeLogRecord> {
        self.channels
            .iter()
            .enumerate()
            .map(|(ch, ts)| SpikeLogRecord {
                ant_id: self.ant_id,
                channel: Self::channel_label(ch).to_string(),
                timestamps: ts.clone(),
                duration: self.duration,
                config_hash: config_hash.map(str::to_string),
            })
            .collect()
    }

    /// Rebuilds per-ant logs from NDJSON records, ordered by ant id.
    pub fn from_records(records: &[SpikeLogRecord]) -> Result<Vec<SpikeLog>> {
        let mut logs: std::collections::BTreeMap<usize, SpikeLog> = Default::default();
        for r in records {
            let ch = (0..N_CHANNELS)
                .find(|&c| Self::channel_label(c) == r.channel)
                .ok_or_else(|| Error::Degenerate(format!("unknown spike channel {:?}", r.channel)))?;
            if r.timestamps.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::Degenerate(format!(
                    "timestamps of ant {} channel {:?} are not strictly increasing",
                    r.ant_id, r.channel
                )));
            }
            let log = logs.entry(r.ant_id).or_insert_with(|| SpikeLog::new(r.ant_id));
            log.channels[ch] = r.timestamps.clone();
            log.duration = log.duration.max(r.duration);
        }
        Ok(logs.into_values().collect())
    }
}

/// One ant's controller: its network copy and optional spike log.
#[derive(Debug, Clone)]
pub struct AntBrain {
    pub network: Network,
    pub log: Option<SpikeLog>,
}

impl AntBrain {
    pub fn new(network: Network, ant_id: usize, record: bool) -> Self {
        Self {
            network,
            log: record.then(|| SpikeLog::new(ant_id)),
        }
    }
}

/// Sense, encode, run one network window, decode, act.
///
/// Events produced by the action are appended to `events` and latched into
/// the ant's reward/nociceptor receptors for the next tick.
pub fn ant_step(
    ant: &mut AntState,
    world: &mut WorldGrid,
    brain: &mut AntBrain,
    cfg: &EmbodimentConfig,
    gains: &[f64; N_INPUT],
    flags: PathwayFlags,
    events: &mut Vec<WorldEvent>,
) -> ActionCommand {
    let mut reading = world.sense(ant);
    if !flags.sensing {
        reading.smell_left = 0.0;
        reading.smell_middle = 0.0;
        reading.smell_right = 0.0;
    }
    let drive = encode(&reading, gains);
    let counts = match brain.log.as_mut() {
        Some(log) => {
            let c = brain.network.run_window_with(&drive, cfg.window_ticks, |sp| log.record(sp));
            log.duration = brain.network.tick();
            c
        }
        None => brain.network.run_window(&drive, cfg.window_ticks),
    };
    let mut action = decode(counts, cfg.move_threshold, cfg.drop_threshold);
    if !flags.depositing {
        action.drop_pheromone = false;
    }
    let first = events.len();
    world.apply_action(ant, &action, events);
    let mine = &events[first..];
    ant.reward_latch = mine
        .iter()
        .any(|e| matches!(e.kind, EventKind::FoodTouched | EventKind::FoodDelivered));
    ant.pain_latch = mine.iter().any(|e| e.kind == EventKind::WallHit);
    action
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::genome::Genome;
    use crate::rng::from_seed;
    use crate::snn::{edge_index, NetworkTopology, NeuronParams, HIDDEN_START};
    use crate::world::{init_world, WorldConfig};

    fn brain(g: &Genome, record: bool) -> AntBrain {
        let n = Network::build(g, &NetworkTopology::canonical(), NeuronParams::default()).unwrap();
        AntBrain::new(n, 0, record)
    }

    #[test]
    fn heartbeat_only_reading_drives_only_heartbeat() {
        let r = SensorReading {
            heartbeat: 1.0,
            ..Default::default()
        };
        let d = encode(&r, &EmbodimentConfig::default().gains());
        for (i, v) in d.iter().enumerate() {
            if i == HEARTBEAT {
                assert!(*v > 0.0);
            } else {
                assert_eq!(*v, 0.0);
            }
        }
    }

    #[test]
    fn encode_is_linear() {
        let gains = EmbodimentConfig::default().gains();
        let r = SensorReading::from_array([0.1, 0.2, 0.3, 0.0, 0.5, 0.0, 0.25, 0.0, 0.4, 0.0, 0.1, 0.5]);
        let r2 = SensorReading::from_array(r.to_array().map(|v| (2.0 * v).min(1.0)));
        let (d, d2) = (encode(&r, &gains), encode(&r2, &gains));
        for i in 0..N_INPUT {
            assert!((d2[i] - 2.0 * d[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn saturated_smell_fires_its_input_neuron() {
        let cfg = EmbodimentConfig::default();
        let r = SensorReading {
            smell_middle: 1.0,
            ..Default::default()
        };
        let mut b = brain(&Genome::dead(), true);
        b.network.run_window_with(&encode(&r, &cfg.gains()), cfg.window_ticks, |sp| {
            b.log.as_mut().unwrap().record(sp)
        });
        let log = b.log.unwrap();
        assert!(!log.channels[1].is_empty());
        assert!(log.channels.iter().enumerate().all(|(c, ts)| c == 1 || ts.is_empty()));
    }

    #[test]
    fn heartbeat_keeps_a_slow_rhythm() {
        // With default gains the heartbeat input fires about once per window.
        let cfg = EmbodimentConfig::default();
        let r = SensorReading {
            heartbeat: 1.0,
            ..Default::default()
        };
        let mut b = brain(&Genome::dead(), true);
        for _ in 0..10 {
            let log = b.log.as_mut().unwrap();
            b.network.run_window_with(&encode(&r, &cfg.gains()), cfg.window_ticks, |sp| log.record(sp));
        }
        let n = b.log.unwrap().channels[HEARTBEAT].len();
        assert!((8..=16).contains(&n), "{n}");
    }

    #[test]
    fn decode_cases() {
        assert!(decode([0, 0, 0, 0], 1, 1).is_noop());
        let c = decode([2, 2, 5, 0], 1, 1);
        assert_eq!(c.net_rotation(), 0);
        assert!(c.move_forward && !c.drop_pheromone);
        let c = decode([0, 0, 3, 2], 3, 2);
        assert!(c.move_forward && c.drop_pheromone);
        let c = decode([0, 0, 2, 1], 3, 2);
        assert!(!c.move_forward && !c.drop_pheromone);
    }

    #[test]
    fn action_counting() {
        let c = ActionCommand {
            rotate_left: 3,
            rotate_right: 1,
            move_forward: true,
            drop_pheromone: true,
        };
        assert_eq!(c.action_count(), 3);
        assert_eq!(ActionCommand::default().action_count(), 0);
    }

    #[test]
    fn pathway_flags() {
        assert_eq!(PathwayFlags::from_modes(true, false), PathwayFlags::INTACT);
        let f = PathwayFlags::from_modes(true, true);
        assert!(!f.sensing && f.depositing);
        let f = PathwayFlags::from_modes(false, false);
        assert!(!f.sensing && !f.depositing);
    }

    #[test]
    fn dead_genome_never_moves() {
        let cfg = EmbodimentConfig::default();
        let (mut world, mut ants) = init_world(&WorldConfig::default(), &mut from_seed(1)).unwrap();
        let mut b = brain(&Genome::dead(), false);
        let start = ants[0].clone();
        let mut ev = Vec::new();
        for _ in 0..2000 {
            let a = ant_step(&mut ants[0], &mut world, &mut b, &cfg, &cfg.gains(), PathwayFlags::INTACT, &mut ev);
            assert!(a.is_noop());
        }
        assert_eq!(ants[0], start);
        assert!(ev.is_empty());
    }

    #[test]
    fn reward_latch_lasts_one_tick() {
        let cfg = EmbodimentConfig::default();
        let (mut world, _) = init_world(&WorldConfig::default(), &mut from_seed(1)).unwrap();
        let mut b = brain(&Genome::dead(), false);
        // Ant standing on the right pile: dead network, contact happens in place.
        let mut ant = AntState::new(0, 35.5, 28.5, 0.0);
        let mut ev = Vec::new();
        ant_step(&mut ant, &mut world, &mut b, &cfg, &cfg.gains(), PathwayFlags::INTACT, &mut ev);
        assert_eq!(ev.len(), 1);
        assert_eq!(world.sense(&ant).reward, 1.0);
        ant_step(&mut ant, &mut world, &mut b, &cfg, &cfg.gains(), PathwayFlags::INTACT, &mut ev);
        assert_eq!(ev.len(), 1);
        assert_eq!(world.sense(&ant).reward, 0.0);
    }

    /// Smell-middle excites a move chain: the ant walks while it smells
    /// pheromone and stops once the trail ends.
    #[test]
    fn chase_pheromone_genome_follows_a_trail() {
        let mut g = Genome::dead();
        let h = HIDDEN_START;
        g.weights[edge_index(1, h).unwrap()] = 20.0;
        g.weights[edge_index(h, 32 + OUT_MOVE).unwrap()] = 20.0;
        let cfg = EmbodimentConfig::default();
        let (mut world, _) = init_world(&WorldConfig::default(), &mut from_seed(2)).unwrap();
        let (cx, cy) = world.nest_center();
        // Trail heading away from the nest along +x or -x, whichever has room.
        let dir = if cx < 20.0 { 1.0 } else { -1.0 };
        let heading = if dir > 0.0 { 0.0 } else { std::f64::consts::PI };
        let y = if cy > 27.0 { 12.5 } else { 42.5 };
        let x0 = 20.5 - dir * 8.0;
        for k in 0..12 {
            world.deposit_pheromone(x0 + dir * k as f64, y, 50.0);
        }
        let mut ant = AntState::new(0, x0, y, heading);
        let mut b = brain(&g, false);
        let mut ev = Vec::new();
        let mut moved = 0;
        for _ in 0..30 {
            // Keep the trail topped up against evaporation.
            let (px, _) = (ant.x, ant.y);
            let a = ant_step(&mut ant, &mut world, &mut b, &cfg, &cfg.gains(), PathwayFlags::INTACT, &mut ev);
            if a.move_forward {
                moved += 1;
                assert!((ant.x - px - dir).abs() < 1e-9);
                assert_eq!(ant.y, y);
            }
            for k in 0..12 {
                let x = x0 + dir * k as f64;
                let need = 50.0 - world.pheromone_at(x, y);
                if need > 0.0 {
                    world.deposit_pheromone(x, y, need);
                }
            }
        }
        // It walks to the end of the trail (probe two patches ahead) and stops.
        assert!(moved >= 9, "moved {moved}");
        assert!((ant.x - x0).abs() <= 12.0);
        let blind = PathwayFlags::from_modes(true, true);
        let mut still = AntState::new(0, x0, y, heading);
        let mut b = brain(&g, false);
        for _ in 0..10 {
            ant_step(&mut still, &mut world, &mut b, &cfg, &cfg.gains(), blind, &mut ev);
        }
        assert_eq!(still.x, x0);
    }

    #[test]
    fn spike_log_records_roundtrip() {
        let mut log = SpikeLog::new(3);
        log.record(SpikeEvent { neuron: 0, tick: 4 });
        log.record(SpikeEvent { neuron: 20, tick: 5 });
        log.record(SpikeEvent { neuron: 35, tick: 6 });
        log.duration = 20;
        assert_eq!(log.channels[0], vec![4]);
        assert_eq!(log.channels[15], vec![6]);
        assert_eq!(log.channels.iter().map(Vec::len).sum::<usize>(), 2);
        let recs = log.to_records(Some("abc"));
        assert_eq!(recs.len(), 16);
        assert_eq!(recs[15].channel, "Pheromone");
        let back = SpikeLog::from_records(&recs).unwrap();
        assert_eq!(back, vec![log]);
    }
}
