//! Genetic algorithm over [`Genome`]s: tournament selection, uniform
//! crossover, per-gene Gaussian/step mutation and elitism.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::genome::{Genome, DELAY_MAX, W_MAX};
use crate::rng::SimRng;
use crate::snn::N_SYNAPSES;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GaConfig {
    pub population_size: usize,
    pub elite_count: usize,
    pub tournament_size: usize,
    /// Probability that a parent pair is recombined at all.
    pub crossover_probability: f64,
    /// Per-gene swap probability inside a uniform crossover.
    pub crossover_swap_probability: f64,
    pub mutation_probability_per_gene: f64,
    pub weight_mutation_sigma: f64,
    pub delay_mutation_step: u16,
    /// Initial weights are drawn from `[-w_init, w_init]`.
    pub w_init: f64,
    pub generations: usize,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            population_size: 32,
            elite_count: 1,
            tournament_size: 3,
            crossover_probability: 0.7,
            crossover_swap_probability: 0.5,
            mutation_probability_per_gene: 0.02,
            weight_mutation_sigma: 1.0,
            delay_mutation_step: 1,
            w_init: 10.0,
            generations: 100,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<()> {
        let err = |m: &str| Err(Error::Config(m.to_string()));
        if self.population_size == 0 {
            return err("population_size must be positive");
        }
        if self.elite_count > self.population_size {
            return err("elite_count cannot exceed population_size");
        }
        if self.tournament_size == 0 {
            return err("tournament_size must be at least 1");
        }
        for p in [
            self.crossover_probability,
            self.crossover_swap_probability,
            self.mutation_probability_per_gene,
        ] {
            if !(0.0..=1.0).contains(&p) {
                return err("probabilities must lie in [0, 1]");
            }
        }
        if !(self.weight_mutation_sigma >= 0.0) || !(0.0..=W_MAX).contains(&self.w_init) {
            return err("weight_mutation_sigma must be >= 0 and w_init within [0, w_max]");
        }
        Ok(())
    }
}

pub fn random_genome(w_init: f64, rng: &mut SimRng) -> Genome {
    let weights = (0..N_SYNAPSES)
        .map(|_| if w_init > 0.0 { rng.random_range(-w_init..=w_init) } else { 0.0 })
        .collect();
    let delays = (0..N_SYNAPSES).map(|_| rng.random_range(1..=DELAY_MAX)).collect();
    Genome { weights, delays }
}

pub fn init_population(cfg: &GaConfig, rng: &mut SimRng) -> Vec<Genome> {
    (0..cfg.population_size).map(|_| random_genome(cfg.w_init, rng)).collect()
}

/// `true` if individual `a` ranks above `b`: higher fitness, then lower index.
fn beats(fitnesses: &[f64], a: usize, b: usize) -> bool {
    match fitnesses[a].total_cmp(&fitnesses[b]) {
        std::cmp::Ordering::Greater => true,
        std::cmp::Ordering::Less => false,
        std::cmp::Ordering::Equal => a < b,
    }
}

/// Index of the winner of a `k`-way tournament drawn with replacement.
pub fn tournament_select(fitnesses: &[f64], k: usize, rng: &mut SimRng) -> Result<usize> {
    if fitnesses.is_empty() {
        return Err(Error::EmptyPopulation);
    }
    let k = k.max(1);
    let mut best = rng.random_range(0..fitnesses.len());
    for _ in 1..k {
        let c = rng.random_range(0..fitnesses.len());
        if beats(fitnesses, c, best) {
            best = c;
        }
    }
    Ok(best)
}

/// Uniform crossover; weights and delays are mixed independently.
pub fn crossover(a: &Genome, b: &Genome, swap_probability: f64, rng: &mut SimRng) -> (Genome, Genome) {
    let (mut c1, mut c2) = (a.clone(), b.clone());
    for i in 0..c1.weights.len() {
        if rng.random_bool(swap_probability) {
            std::mem::swap(&mut c1.weights[i], &mut c2.weights[i]);
        }
    }
    for i in 0..c1.delays.len() {
        if rng.random_bool(swap_probability) {
            std::mem::swap(&mut c1.delays[i], &mut c2.delays[i]);
        }
    }
    (c1, c2)
}

/// How many genes a mutation call touched.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct MutationCount {
    pub weights: usize,
    pub delays: usize,
}

/// Per-gene mutation in place: Gaussian weight noise, ±step delay shifts,
/// both clamped back into bounds.
pub fn mutate(g: &mut Genome, cfg: &GaConfig, rng: &mut SimRng) -> MutationCount {
    let p = cfg.mutation_probability_per_gene;
    let mut count = MutationCount::default();
    let noise = Normal::new(0.0, cfg.weight_mutation_sigma).expect("sigma validated non-negative");
    for w in &mut g.weights {
        if rng.random_bool(p) {
            *w = (*w + noise.sample(rng)).clamp(-W_MAX, W_MAX);
            count.weights += 1;
        }
    }
    let step = cfg.delay_mutation_step as i32;
    for d in &mut g.delays {
        if rng.random_bool(p) {
            let shift = if rng.random_bool(0.5) { step } else { -step };
            *d = (*d as i32 + shift).clamp(1, DELAY_MAX as i32) as u16;
            count.delays += 1;
        }
    }
    count
}

/// Indices sorted best first (ties keep the lower index first).
pub fn ranking(fitnesses: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..fitnesses.len()).collect();
    order.sort_by(|&a, &b| fitnesses[b].total_cmp(&fitnesses[a]).then(a.cmp(&b)));
    order
}

/// Elites are copied unchanged; the rest come from tournament selection,
/// optional crossover and mutation.
pub fn next_generation(population: &[Genome], fitnesses: &[f64], cfg: &GaConfig, rng: &mut SimRng) -> Result<Vec<Genome>> {
    if population.is_empty() {
        return Err(Error::EmptyPopulation);
    }
    if fitnesses.len() != population.len() {
        return Err(Error::LengthMismatch {
            what: "fitness values per individual",
            expected: population.len(),
            actual: fitnesses.len(),
        });
    }
    let n = population.len();
    let mut next: Vec<Genome> = ranking(fitnesses)
        .into_iter()
        .take(cfg.elite_count.min(n))
        .map(|i| population[i].clone())
        .collect();
    while next.len() < n {
        let a = tournament_select(fitnesses, cfg.tournament_size, rng)?;
        let b = tournament_select(fitnesses, cfg.tournament_size, rng)?;
        let (mut c1, mut c2) = if rng.random_bool(cfg.crossover_probability) {
            crossover(&population[a], &population[b], cfg.crossover_swap_probability, rng)
        } else {
            (population[a].clone(), population[b].clone())
        };
        mutate(&mut c1, cfg, rng);
        mutate(&mut c2, cfg, rng);
        next.push(c1);
        if next.len() < n {
            next.push(c2);
        }
    }
    Ok(next)
}

/// Per-generation summary; `sd` is the population standard deviation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationRecord {
    pub generation: usize,
    pub fitnesses: Vec<f64>,
    pub best_index: usize,
    pub best_fitness: f64,
    pub mean: f64,
    pub sd: f64,
}

impl GenerationRecord {
    pub fn from_fitnesses(generation: usize, fitnesses: Vec<f64>) -> Self {
        let n = fitnesses.len() as f64;
        let best_index = ranking(&fitnesses)[0];
        let mean = fitnesses.iter().sum::<f64>() / n;
        let sd = (fitnesses.iter().map(|f| (f - mean).powi(2)).sum::<f64>() / n).sqrt();
        Self {
            generation,
            best_fitness: fitnesses[best_index],
            best_index,
            mean,
            sd,
            fitnesses,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::from_seed;

    #[test]
    fn init_is_seeded_and_sized() {
        let cfg = GaConfig::default();
        let a = init_population(&cfg, &mut from_seed(5));
        let b = init_population(&cfg, &mut from_seed(5));
        assert_eq!(a, b);
        assert_eq!(a.len(), 32);
        for g in &a {
            g.validate().unwrap();
            assert!(g.weights.iter().all(|w| w.abs() <= cfg.w_init));
        }
    }

    #[test]
    fn exhaustive_tournament_picks_global_best() {
        let mut rng = from_seed(1);
        let fit: Vec<f64> = (0..32).map(|i| ((i * 7) % 32) as f64).collect();
        let best = ranking(&fit)[0];
        // k = population size does not guarantee drawing every member, but
        // a large k does with overwhelming probability.
        let hits = (0..1000)
            .filter(|_| tournament_select(&fit, 32 * 8, &mut rng).unwrap() == best)
            .count();
        assert_eq!(hits, 1000);
    }

    #[test]
    fn tournament_ties_prefer_lower_index() {
        let fit = vec![1.0, 3.0, 3.0, 0.0];
        let mut rng = from_seed(2);
        for _ in 0..200 {
            assert_ne!(tournament_select(&fit, 64, &mut rng).unwrap(), 2);
        }
    }

    #[test]
    fn empty_tournament_errors() {
        assert!(matches!(tournament_select(&[], 3, &mut from_seed(0)), Err(Error::EmptyPopulation)));
    }

    #[test]
    fn crossover_of_clones_is_identity() {
        let mut rng = from_seed(3);
        let a = random_genome(5.0, &mut rng);
        let (c1, c2) = crossover(&a, &a, 0.5, &mut rng);
        assert_eq!(c1, a);
        assert_eq!(c2, a);
    }

    #[test]
    fn crossover_genes_come_from_parents() {
        let mut rng = from_seed(4);
        let a = random_genome(5.0, &mut rng);
        let b = random_genome(5.0, &mut rng);
        let (c1, c2) = crossover(&a, &b, 0.5, &mut rng);
        for i in 0..N_SYNAPSES {
            assert!(c1.weights[i] == a.weights[i] || c1.weights[i] == b.weights[i]);
            assert!(c1.delays[i] == a.delays[i] || c1.delays[i] == b.delays[i]);
            // The pair is complementary.
            assert_eq!(c1.weights[i] + c2.weights[i], a.weights[i] + b.weights[i]);
        }
    }

    #[test]
    fn mutation_identities() {
        let mut rng = from_seed(6);
        let g = random_genome(5.0, &mut rng);
        let off = GaConfig {
            mutation_probability_per_gene: 0.0,
            ..Default::default()
        };
        let mut m = g.clone();
        assert_eq!(mutate(&mut m, &off, &mut rng), MutationCount::default());
        assert_eq!(m, g);
        let inert = GaConfig {
            mutation_probability_per_gene: 1.0,
            weight_mutation_sigma: 0.0,
            delay_mutation_step: 0,
            ..Default::default()
        };
        let mut m = g.clone();
        let c = mutate(&mut m, &inert, &mut rng);
        assert_eq!(c.weights, N_SYNAPSES);
        assert_eq!(m, g);
    }

    #[test]
    fn pure_elitism_returns_sorted_population() {
        let mut rng = from_seed(7);
        let cfg = GaConfig {
            population_size: 6,
            elite_count: 6,
            ..Default::default()
        };
        let pop = init_population(&cfg, &mut rng);
        let fit = vec![0.5, 3.0, -1.0, 3.0, 2.0, 0.0];
        let next = next_generation(&pop, &fit, &cfg, &mut rng).unwrap();
        let expected: Vec<Genome> = [1, 3, 4, 0, 5, 2].iter().map(|&i| pop[i].clone()).collect();
        assert_eq!(next, expected);
    }

    #[test]
    fn next_generation_checks_lengths() {
        let mut rng = from_seed(8);
        let cfg = GaConfig {
            population_size: 4,
            ..Default::default()
        };
        let pop = init_population(&cfg, &mut rng);
        assert!(matches!(
            next_generation(&pop, &[1.0, 2.0], &cfg, &mut rng),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn config_validation() {
        GaConfig::default().validate().unwrap();
        let bad = GaConfig {
            elite_count: 33,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = GaConfig {
            crossover_probability: 1.5,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn record_statistics() {
        let r = GenerationRecord::from_fitnesses(3, vec![1.0, 3.0, 3.0, -1.0]);
        assert_eq!(r.best_index, 1);
        assert_eq!(r.best_fitness, 3.0);
        assert_eq!(r.mean, 1.5);
        assert!((r.sd - (11.0f64 / 4.0).sqrt()).abs() < 1e-12);
    }
}
