//! Python module `antsnn`: genomes, networks, colony runs, evaluation,
//! the rule-based baseline, evolution and the correlation statistics.

use std::path::PathBuf;

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

use antsnn_core::analysis::{self, TrialResult};
use antsnn_core::embodiment::SpikeLog;
use antsnn_core::evolution::random_genome;
use antsnn_core::orchestrator::{self, ColonyOptions, EvolutionRun};
use antsnn_core::rng::from_seed;
use antsnn_core::snn::{Network as CoreNetwork, NetworkTopology, NeuronParams, N_INPUT};

fn to_py(e: antsnn_core::Error) -> PyErr {
    match e {
        antsnn_core::Error::Io(io) => PyIOError::new_err(io.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

#[pyclass(from_py_object)]
#[derive(Clone)]
struct Genome {
    inner: antsnn_core::Genome,
}

#[pymethods]
impl Genome {
    #[new]
    fn new(weights: Vec<f64>, delays: Vec<u16>) -> PyResult<Self> {
        antsnn_core::Genome::new(weights, delays)
            .map(|inner| Self { inner })
            .map_err(to_py)
    }

    /// All weights zero, all delays one.
    #[staticmethod]
    fn dead() -> Self {
        Self {
            inner: antsnn_core::Genome::dead(),
        }
    }

    #[staticmethod]
    #[pyo3(signature = (seed, w_init = 10.0))]
    fn random(seed: u64, w_init: f64) -> Self {
        Self {
            inner: random_genome(w_init, &mut from_seed(seed)),
        }
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        antsnn_core::Genome::load(&path).map(|inner| Self { inner }).map_err(to_py)
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        self.inner.save(&path).map_err(to_py)
    }

    #[getter]
    fn weights(&self) -> Vec<f64> {
        self.inner.weights.clone()
    }

    #[getter]
    fn delays(&self) -> Vec<u16> {
        self.inner.delays.clone()
    }

    fn __len__(&self) -> usize {
        self.inner.weights.len()
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.inner == other.inner
    }
}

#[pyclass]
struct Network {
    inner: CoreNetwork,
}

#[pymethods]
impl Network {
    #[new]
    fn new(genome: &Genome) -> PyResult<Self> {
        CoreNetwork::build(&genome.inner, &NetworkTopology::canonical(), NeuronParams::default())
            .map(|inner| Self { inner })
            .map_err(to_py)
    }

    /// Advances one tick; returns `(neuron, tick)` for every spike.
    fn step(&mut self) -> Vec<(usize, u64)> {
        self.inner.step().iter().map(|s| (s.neuron, s.tick)).collect()
    }

    fn inject_current(&mut self, neuron: usize, amplitude: f64) -> PyResult<()> {
        self.inner.inject_current(neuron, amplitude).map_err(to_py)
    }

    /// Holds `drive` (12 values) for `window_ticks` steps; returns the four
    /// output spike counts.
    fn run_window(&mut self, drive: Vec<f64>, window_ticks: u32) -> PyResult<Vec<u32>> {
        let drive: [f64; N_INPUT] = drive
            .try_into()
            .map_err(|v: Vec<f64>| PyValueError::new_err(format!("expected 12 drive values, got {}", v.len())))?;
        Ok(self.inner.run_window(&drive, window_ticks).to_vec())
    }

    fn reset(&mut self) {
        self.inner.reset();
    }

    fn potentials(&self) -> Vec<f64> {
        self.inner.states().iter().map(|s| s.membrane_potential).collect()
    }

    #[getter]
    fn tick(&self) -> u64 {
        self.inner.tick()
    }

    #[getter]
    fn n_neurons(&self) -> usize {
        self.inner.n_neurons()
    }

    #[getter]
    fn n_synapses(&self) -> usize {
        self.inner.synapses().len()
    }
}

#[pyclass(from_py_object)]
#[derive(Clone)]
struct RunConfig {
    inner: orchestrator::RunConfig,
}

#[pymethods]
impl RunConfig {
    #[new]
    fn new() -> Self {
        Self {
            inner: orchestrator::RunConfig::default(),
        }
    }

    #[staticmethod]
    fn from_toml(text: &str) -> PyResult<Self> {
        orchestrator::RunConfig::from_toml_str(text)
            .map(|inner| Self { inner })
            .map_err(to_py)
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        orchestrator::RunConfig::load(&path).map(|inner| Self { inner }).map_err(to_py)
    }

    fn to_toml(&self) -> PyResult<String> {
        self.inner.to_toml().map_err(to_py)
    }

    fn hash(&self) -> String {
        self.inner.hash()
    }

    #[getter]
    fn get_seed(&self) -> u64 {
        self.inner.run.seed
    }
    #[setter]
    fn set_seed(&mut self, v: u64) {
        self.inner.run.seed = v;
    }
    #[getter]
    fn get_n_ants(&self) -> usize {
        self.inner.world.n_ants
    }
    #[setter]
    fn set_n_ants(&mut self, v: usize) {
        self.inner.world.n_ants = v;
    }
    #[getter]
    fn get_max_ticks(&self) -> u32 {
        self.inner.world.max_ticks
    }
    #[setter]
    fn set_max_ticks(&mut self, v: u32) {
        self.inner.world.max_ticks = v;
    }
    #[getter]
    fn get_population_size(&self) -> usize {
        self.inner.ga.population_size
    }
    #[setter]
    fn set_population_size(&mut self, v: usize) {
        self.inner.ga.population_size = v;
    }
    #[getter]
    fn get_generations(&self) -> usize {
        self.inner.ga.generations
    }
    #[setter]
    fn set_generations(&mut self, v: usize) {
        self.inner.ga.generations = v;
    }
    #[getter]
    fn get_pheromone_pathway(&self) -> bool {
        self.inner.modes.pheromone_pathway
    }
    #[setter]
    fn set_pheromone_pathway(&mut self, v: bool) {
        self.inner.modes.pheromone_pathway = v;
    }
    #[getter]
    fn get_ablate_sensing(&self) -> bool {
        self.inner.modes.sensing_ablation
    }
    #[setter]
    fn set_ablate_sensing(&mut self, v: bool) {
        self.inner.modes.sensing_ablation = v;
    }
}

#[pyclass(get_all)]
struct ColonyResult {
    fitness: f64,
    food_delivered: u32,
    t_s: u32,
    sum_nest: f64,
    sum_food: f64,
    sum_cost: f64,
    /// Per ant: 16 lists of spike ticks (12 inputs, then 4 outputs).
    spike_trains: Vec<Vec<Vec<u64>>>,
}

#[pyclass(get_all)]
struct Trial {
    model: String,
    trial_seed: u64,
    food_delivered: u32,
    t_s: u32,
}

impl From<TrialResult> for Trial {
    fn from(t: TrialResult) -> Self {
        Self {
            model: t.model,
            trial_seed: t.trial_seed,
            food_delivered: t.food_delivered,
            t_s: t.t_s,
        }
    }
}

#[pyclass(get_all)]
struct Generation {
    generation: usize,
    best_index: usize,
    best_fitness: f64,
    mean: f64,
    sd: f64,
}

#[pyclass(get_all)]
struct Regression {
    slope: f64,
    intercept: f64,
    p_value: f64,
    sigma: f64,
}

/// Runs one colony with `genome` in the world seeded by `world_seed`.
#[pyfunction]
#[pyo3(signature = (genome, config, world_seed, record_spikes = false))]
fn simulate_colony(
    py: Python<'_>,
    genome: &Genome,
    config: &RunConfig,
    world_seed: u64,
    record_spikes: bool,
) -> PyResult<ColonyResult> {
    let (g, cfg) = (genome.inner.clone(), config.inner.clone());
    let out = py
        .detach(move || {
            let opts = ColonyOptions {
                record_spikes,
                snapshot_tick: None,
            };
            orchestrator::simulate_colony(&g, &cfg, cfg.modes.pathway(), world_seed, opts)
        })
        .map_err(to_py)?;
    Ok(ColonyResult {
        fitness: out.fitness,
        food_delivered: out.food_delivered,
        t_s: out.t_s,
        sum_nest: out.breakdown.sum_nest,
        sum_food: out.breakdown.sum_food,
        sum_cost: out.breakdown.sum_cost,
        spike_trains: out.spike_logs.into_iter().map(|l: SpikeLog| l.channels).collect(),
    })
}

/// Held-out trials of `genome` under the config's pathway modes.
#[pyfunction]
fn evaluate(py: Python<'_>, genome: &Genome, config: &RunConfig, trials: usize) -> PyResult<Vec<Trial>> {
    let (g, cfg) = (genome.inner.clone(), config.inner.clone());
    let res = py
        .detach(move || orchestrator::evaluate_genome(&g, &cfg, trials))
        .map_err(to_py)?;
    Ok(res.into_iter().map(Trial::from).collect())
}

/// Held-out trials of the rule-based colony.
#[pyfunction]
fn baseline(py: Python<'_>, config: &RunConfig, trials: usize) -> PyResult<Vec<Trial>> {
    let cfg = config.inner.clone();
    let res = py
        .detach(move || orchestrator::baseline_trials(&cfg, trials))
        .map_err(to_py)?;
    Ok(res.into_iter().map(Trial::from).collect())
}

/// Runs (or extends) an evolution in `out_dir`; returns per-generation
/// summaries.
#[pyfunction]
#[pyo3(signature = (config, out_dir, resume = false))]
fn evolve(py: Python<'_>, config: &RunConfig, out_dir: PathBuf, resume: bool) -> PyResult<Vec<Generation>> {
    let cfg = config.inner.clone();
    let records = py
        .detach(move || {
            let mut run = if resume {
                EvolutionRun::resume(cfg, &out_dir)?
            } else {
                EvolutionRun::create(cfg, &out_dir)?
            };
            run.run_to_end(|_| {})?;
            Ok::<_, antsnn_core::Error>(run.evolution.records().to_vec())
        })
        .map_err(to_py)?;
    Ok(records
        .into_iter()
        .map(|r| Generation {
            generation: r.generation,
            best_index: r.best_index,
            best_fitness: r.best_fitness,
            mean: r.mean,
            sd: r.sd,
        })
        .collect())
}

/// Pearson correlation; `None` when either series is constant.
#[pyfunction]
fn pearson(x: Vec<f64>, y: Vec<f64>) -> PyResult<Option<f64>> {
    analysis::pearson(&x, &y).map_err(to_py)
}

/// Least-squares line through `(x, y)` points with the slope's p-value.
#[pyfunction]
fn regression(points: Vec<(f64, f64)>) -> PyResult<Regression> {
    let r = analysis::trend_regression(&points).map_err(to_py)?;
    Ok(Regression {
        slope: r.slope,
        intercept: r.intercept,
        p_value: r.p_value,
        sigma: r.sigma,
    })
}

#[pymodule]
fn antsnn(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Genome>()?;
    m.add_class::<Network>()?;
    m.add_class::<RunConfig>()?;
    m.add_class::<ColonyResult>()?;
    m.add_class::<Trial>()?;
    m.add_class::<Generation>()?;
    m.add_class::<Regression>()?;
    m.add_function(wrap_pyfunction!(simulate_colony, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    m.add_function(wrap_pyfunction!(baseline, m)?)?;
    m.add_function(wrap_pyfunction!(evolve, m)?)?;
    m.add_function(wrap_pyfunction!(pearson, m)?)?;
    m.add_function(wrap_pyfunction!(regression, m)?)?;
    m.add("INPUT_LABELS", antsnn_core::embodiment::INPUT_LABELS.to_vec())?;
    m.add("OUTPUT_LABELS", antsnn_core::embodiment::OUTPUT_LABELS.to_vec())?;
    Ok(())
}
