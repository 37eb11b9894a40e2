//! Discrete-time leaky integrate-and-fire network with delayed synapses.
//!
//! Neurons `0..12` are inputs, `12..32` the all-to-all hidden layer and
//! `32..36` the outputs. Synaptic input is delta-shaped: a spike arriving
//! over a synapse of weight `w` adds `w` (mV) to the target membrane in the
//! tick it is delivered. Inputs arriving during the refractory period are
//! discarded.

use serde::{Deserialize, Serialize};

use crate::genome::{Genome, DELAY_MAX};
use crate::{Error, Result};

pub const N_INPUT: usize = 12;
pub const N_HIDDEN: usize = 20;
pub const N_OUTPUT: usize = 4;
pub const N_NEURONS: usize = N_INPUT + N_HIDDEN + N_OUTPUT;
pub const N_SYNAPSES: usize = N_INPUT * N_HIDDEN + N_HIDDEN * N_HIDDEN + N_HIDDEN * N_OUTPUT;

pub const HIDDEN_START: usize = N_INPUT;
pub const OUTPUT_START: usize = N_INPUT + N_HIDDEN;

const RING_LEN: usize = DELAY_MAX as usize + 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NeuronParams {
    /// ms
    pub membrane_time_constant: f64,
    /// Scales external current into mV of steady-state depolarisation.
    pub membrane_resistance: f64,
    pub resting_potential: f64,
    pub threshold: f64,
    pub reset_potential: f64,
    /// ms
    pub refractory_period: f64,
    /// Integration step in ms; one network tick.
    pub dt: f64,
}

impl Default for NeuronParams {
    fn default() -> Self {
        Self {
            membrane_time_constant: 10.0,
            membrane_resistance: 1.0,
            resting_potential: -70.0,
            threshold: -55.0,
            reset_potential: -70.0,
            refractory_period: 2.0,
            dt: 1.0,
        }
    }
}

impl NeuronParams {
    pub fn validate(&self) -> Result<()> {
        let all = [
            self.membrane_time_constant,
            self.membrane_resistance,
            self.resting_potential,
            self.threshold,
            self.reset_potential,
            self.refractory_period,
            self.dt,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("neuron parameters must be finite".into()));
        }
        if self.threshold <= self.reset_potential {
            return Err(Error::Config("threshold must exceed reset potential".into()));
        }
        if self.membrane_time_constant <= 0.0 {
            return Err(Error::Config("membrane time constant must be positive".into()));
        }
        if self.refractory_period < 0.0 {
            return Err(Error::Config("refractory period must be non-negative".into()));
        }
        if self.dt <= 0.0 {
            return Err(Error::Config("dt must be positive".into()));
        }
        Ok(())
    }

    /// Refractory period rounded up to whole ticks.
    pub fn refractory_ticks(&self) -> u32 {
        (self.refractory_period / self.dt - 1e-9).ceil().max(0.0) as u32
    }
}

/// Snapshot of one neuron's dynamic state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NeuronState {
    pub membrane_potential: f64,
    /// ms
    pub refractory_remaining: f64,
    /// Synaptic input delivered in the most recent tick.
    pub input_current_accumulator: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Synapse {
    pub source: usize,
    pub target: usize,
    pub weight: f64,
    pub delay: u16,
}

/// The fixed edge list shared by every network.
///
/// Canonical order: input→hidden row-major, then hidden→hidden row-major
/// (self-loops included), then hidden→output row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetworkTopology {
    edges: Vec<(usize, usize)>,
}

impl NetworkTopology {
    pub fn canonical() -> Self {
        let hidden = HIDDEN_START..OUTPUT_START;
        let mut edges = Vec::with_capacity(N_SYNAPSES);
        for s in 0..N_INPUT {
            edges.extend(hidden.clone().map(|t| (s, t)));
        }
        for s in hidden.clone() {
            edges.extend(hidden.clone().map(|t| (s, t)));
        }
        for s in hidden {
            edges.extend((OUTPUT_START..N_NEURONS).map(|t| (s, t)));
        }
        debug_assert_eq!(edges.len(), N_SYNAPSES);
        Self { edges }
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn n_neurons(&self) -> usize {
        N_NEURONS
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpikeEvent {
    pub neuron: usize,
    pub tick: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct OutEdge {
    target: u8,
    delay: u8,
    weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    params: NeuronParams,
    synapses: Vec<Synapse>,
    // CSR view of outgoing synapses, indexed by source neuron.
    out_offsets: [usize; N_NEURONS + 1],
    out_edges: Vec<OutEdge>,
    decay: f64,
    refractory_ticks: u32,
    potential: [f64; N_NEURONS],
    refractory: [u32; N_NEURONS],
    accumulator: [f64; N_NEURONS],
    external: [f64; N_NEURONS],
    // ring[(tick % RING_LEN) * N_NEURONS + target]
    ring: Vec<f64>,
    tick: u64,
    spikes: Vec<SpikeEvent>,
}

impl Network {
    pub fn build(genome: &Genome, topology: &NetworkTopology, params: NeuronParams) -> Result<Self> {
        genome.validate()?;
        params.validate()?;
        if topology.edges().len() != N_SYNAPSES {
            return Err(Error::LengthMismatch {
                what: "topology edges",
                expected: N_SYNAPSES,
                actual: topology.edges().len(),
            });
        }
        let synapses: Vec<Synapse> = topology
            .edges()
            .iter()
            .zip(genome.weights.iter().zip(&genome.delays))
            .map(|(&(source, target), (&weight, &delay))| Synapse {
                source,
                target,
                weight,
                delay,
            })
            .collect();

        let mut out_offsets = [0usize; N_NEURONS + 1];
        for s in &synapses {
            out_offsets[s.source + 1] += 1;
        }
        for i in 0..N_NEURONS {
            out_offsets[i + 1] += out_offsets[i];
        }
        let mut fill = out_offsets;
        let mut out_edges = vec![
            OutEdge {
                target: 0,
                delay: 1,
                weight: 0.0
            };
            synapses.len()
        ];
        for s in &synapses {
            out_edges[fill[s.source]] = OutEdge {
                target: s.target as u8,
                delay: s.delay as u8,
                weight: s.weight,
            };
            fill[s.source] += 1;
        }

        let net = Self {
            params,
            decay: (-params.dt / params.membrane_time_constant).exp(),
            refractory_ticks: params.refractory_ticks(),
            synapses,
            out_offsets,
            out_edges,
            potential: [params.resting_potential; N_NEURONS],
            refractory: [0; N_NEURONS],
            accumulator: [0.0; N_NEURONS],
            external: [0.0; N_NEURONS],
            ring: vec![0.0; RING_LEN * N_NEURONS],
            tick: 0,
            spikes: Vec::with_capacity(N_NEURONS),
        };
        assert_eq!(net.n_neurons(), N_NEURONS);
        assert_eq!(net.synapses.len(), N_SYNAPSES);
        Ok(net)
    }

    pub fn n_neurons(&self) -> usize {
        self.potential.len()
    }

    pub fn synapses(&self) -> &[Synapse] {
        &self.synapses
    }

    pub fn params(&self) -> &NeuronParams {
        &self.params
    }

    /// Number of ticks simulated since construction or the last reset.
    pub fn tick(&self) -> u64 {
        self.tick
    }

    pub fn neuron_state(&self, neuron: usize) -> NeuronState {
        NeuronState {
            membrane_potential: self.potential[neuron],
            refractory_remaining: self.refractory[neuron] as f64 * self.params.dt,
            input_current_accumulator: self.accumulator[neuron],
        }
    }

    pub fn states(&self) -> Vec<NeuronState> {
        (0..N_NEURONS).map(|n| self.neuron_state(n)).collect()
    }

    /// Synaptic input queued for delivery `ticks_ahead` ticks from now.
    pub fn pending_input(&self, neuron: usize, ticks_ahead: u64) -> f64 {
        assert!((1..=DELAY_MAX as u64).contains(&ticks_ahead));
        let slot = ((self.tick + ticks_ahead) % RING_LEN as u64) as usize;
        self.ring[slot * N_NEURONS + neuron]
    }

    /// Adds `amplitude` to the neuron's external current for the next step.
    pub fn inject_current(&mut self, neuron: usize, amplitude: f64) -> Result<()> {
        let len = self.n_neurons();
        let slot = self
            .external
            .get_mut(neuron)
            .ok_or(Error::NeuronIndex { index: neuron, len })?;
        *slot += amplitude;
        Ok(())
    }

    /// Advances one tick and returns the spikes emitted in it.
    ///
    /// Ticks are numbered from 1. A spike emitted at tick `t` over a synapse
    /// with delay `d` reaches its target in tick `t + d`.
    pub fn step(&mut self) -> &[SpikeEvent] {
        let p = self.params;
        let t = self.tick + 1;
        let slot = (t % RING_LEN as u64) as usize * N_NEURONS;
        let leak_gain = 1.0 - self.decay;
        self.spikes.clear();

        for n in 0..N_NEURONS {
            let syn = std::mem::take(&mut self.ring[slot + n]);
            self.accumulator[n] = syn;
            let ext = std::mem::take(&mut self.external[n]);
            if self.refractory[n] > 0 {
                self.refractory[n] -= 1;
                self.potential[n] = p.reset_potential;
                continue;
            }
            // Exact exponential integration for current held constant over dt.
            let v = p.resting_potential
                + (self.potential[n] - p.resting_potential) * self.decay
                + p.membrane_resistance * ext * leak_gain
                + syn;
            if v >= p.threshold {
                self.potential[n] = p.reset_potential;
                self.refractory[n] = self.refractory_ticks;
                self.spikes.push(SpikeEvent { neuron: n, tick: t });
            } else {
                self.potential[n] = v;
            }
        }

        for sp in &self.spikes {
            let edges = &self.out_edges[self.out_offsets[sp.neuron]..self.out_offsets[sp.neuron + 1]];
            for e in edges {
                let s = ((t + e.delay as u64) % RING_LEN as u64) as usize;
                self.ring[s * N_NEURONS + e.target as usize] += e.weight;
            }
        }
        self.tick = t;
        &self.spikes
    }

    /// Holds the 12 input drives constant for `window_ticks` steps and counts
    /// output spikes. Network state carries over between windows.
    pub fn run_window(&mut self, input_drive: &[f64; N_INPUT], window_ticks: u32) -> [u32; N_OUTPUT] {
        self.run_window_with(input_drive, window_ticks, |_| {})
    }

    /// Like [`run_window`](Self::run_window), also reporting every spike.
    pub fn run_window_with<F: FnMut(SpikeEvent)>(
        &mut self,
        input_drive: &[f64; N_INPUT],
        window_ticks: u32,
        mut on_spike: F,
    ) -> [u32; N_OUTPUT] {
        let mut counts = [0u32; N_OUTPUT];
        for _ in 0..window_ticks {
            for (i, &d) in input_drive.iter().enumerate() {
                self.external[i] += d;
            }
            for &sp in self.step() {
                if sp.neuron >= OUTPUT_START {
                    counts[sp.neuron - OUTPUT_START] += 1;
                }
                on_spike(sp);
            }
        }
        counts
    }

    /// Returns every neuron to rest and clears queued input. Synapses are kept.
    pub fn reset(&mut self) {
        self.potential = [self.params.resting_potential; N_NEURONS];
        self.refractory = [0; N_NEURONS];
        self.accumulator = [0.0; N_NEURONS];
        self.external = [0.0; N_NEURONS];
        self.ring.iter_mut().for_each(|v| *v = 0.0);
        self.tick = 0;
        self.spikes.clear();
    }

    /// Sets a membrane potential directly; used to set up traces.
    pub fn set_potential(&mut self, neuron: usize, v: f64) -> Result<()> {
        let len = self.n_neurons();
        *self
            .potential
            .get_mut(neuron)
            .ok_or(Error::NeuronIndex { index: neuron, len })? = v;
        Ok(())
    }
}

/// Index of synapse `(source, target)` in canonical order, if that edge exists.
pub fn edge_index(source: usize, target: usize) -> Option<usize> {
    let hidden = HIDDEN_START..OUTPUT_START;
    if source < N_INPUT && hidden.contains(&target) {
        Some(source * N_HIDDEN + (target - HIDDEN_START))
    } else if hidden.contains(&source) && hidden.contains(&target) {
        Some(N_INPUT * N_HIDDEN + (source - HIDDEN_START) * N_HIDDEN + (target - HIDDEN_START))
    } else if hidden.contains(&source) && (OUTPUT_START..N_NEURONS).contains(&target) {
        Some(
            N_INPUT * N_HIDDEN
                + N_HIDDEN * N_HIDDEN
                + (source - HIDDEN_START) * N_OUTPUT
                + (target - OUTPUT_START),
        )
    } else {
        None
    }
}
