//! Rule-driven reference colony in the style of the classic NetLogo ants
//! model: wander until food is found, carry it home along the nest-scent
//! gradient while laying a chemical trail, follow trails uphill when
//! searching.
//!
//! Baseline ants live in the same [`WorldGrid`] as network-driven ants and
//! use the same movement, pickup and delivery code.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::analysis::TrialResult;
use crate::rng::{from_seed, SimRng};
use crate::world::{init_world, wrap_angle, AntState, WorldConfig, WorldEvent, WorldGrid};
use crate::{Error, Result};

pub const MODEL_NAME: &str = "baseline";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BaselineConfig {
    /// Trails weaker than this are ignored.
    pub sniff_threshold: f64,
    /// Trails at or above this are ignored too (saturated, usually the nest).
    pub sniff_saturation: f64,
    /// Chemical laid per tick by a returning ant.
    pub deposit: f64,
    /// Each tick the ant turns right by U[0, w) and left by U[0, w), degrees.
    pub wiggle_deg: f64,
    /// Turn used when steering toward a stronger probe, degrees.
    pub steer_deg: f64,
    pub probe_distance: f64,
    /// Ant `j` stays in the nest for its first `j * stagger` ticks.
    pub departure_stagger: u32,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        Self {
            sniff_threshold: 0.05,
            sniff_saturation: 2.0,
            deposit: 60.0,
            wiggle_deg: 40.0,
            steer_deg: 45.0,
            probe_distance: 1.0,
            departure_stagger: 1,
        }
    }
}

impl BaselineConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.sniff_threshold >= 0.0 && self.sniff_saturation > self.sniff_threshold) {
            return Err(Error::Config("baseline sniff window must satisfy 0 <= threshold < saturation".into()));
        }
        if !(self.deposit >= 0.0 && self.wiggle_deg >= 0.0 && self.probe_distance > 0.0) {
            return Err(Error::Config("baseline deposit, wiggle and probe distance must be non-negative".into()));
        }
        Ok(())
    }
}

/// Static radial nest scent: maximal at the nest centre, falling off linearly.
#[derive(Debug, Clone)]
pub struct ScentField {
    center: (f64, f64),
    width: usize,
    height: usize,
}

impl ScentField {
    pub fn new(grid: &WorldGrid) -> Self {
        Self {
            center: grid.nest_center(),
            width: grid.width(),
            height: grid.height(),
        }
    }

    /// Nest scent at the patch containing `(x, y)`; `-inf` off-grid.
    pub fn nest_scent(&self, x: f64, y: f64) -> f64 {
        if x < 0.0 || y < 0.0 || x >= self.width as f64 || y >= self.height as f64 {
            return f64::NEG_INFINITY;
        }
        let (px, py) = (x.floor() + 0.5, y.floor() + 0.5);
        200.0 - (px - self.center.0).hypot(py - self.center.1)
    }
}

/// Samples `field` at three probes (left, ahead, right) and turns toward the
/// strongest when a side probe beats the one ahead.
pub fn turn_uphill<F: Fn(f64, f64) -> f64>(ant: &mut AntState, probe_distance: f64, steer: f64, field: F) {
    let at = |off: f64| {
        let a = ant.heading + off;
        field(ant.x + probe_distance * a.cos(), ant.y + probe_distance * a.sin())
    };
    let (left, ahead, right) = (at(steer), at(0.0), at(-steer));
    if right > ahead || left > ahead {
        ant.heading = wrap_angle(if right > left { ant.heading - steer } else { ant.heading + steer });
    }
}

/// One tick of the rule set for one ant.
pub fn baseline_step(
    ant: &mut AntState,
    grid: &mut WorldGrid,
    scent: &ScentField,
    cfg: &BaselineConfig,
    rng: &mut SimRng,
    events: &mut Vec<WorldEvent>,
) {
    let steer = cfg.steer_deg.to_radians();
    let first = events.len();
    grid.resolve_contacts(ant, events);
    if events.len() > first {
        // Picked up or dropped off: turn around and rest this tick.
        ant.heading = wrap_angle(ant.heading + std::f64::consts::PI);
        return;
    }
    if ant.carrying {
        grid.deposit_pheromone(ant.x, ant.y, cfg.deposit);
        turn_uphill(ant, cfg.probe_distance, steer, |x, y| scent.nest_scent(x, y));
    } else {
        let here = grid.pheromone_at(ant.x, ant.y);
        if here >= cfg.sniff_threshold && here < cfg.sniff_saturation {
            turn_uphill(ant, cfg.probe_distance, steer, |x, y| grid.pheromone_at(x, y));
        }
    }
    if cfg.wiggle_deg > 0.0 {
        let w = cfg.wiggle_deg;
        let turn = rng.random_range(0.0..w) - rng.random_range(0.0..w);
        ant.heading = wrap_angle(ant.heading + turn.to_radians());
    }
    let step = grid.config().move_step;
    if !grid.try_move(ant, step) {
        ant.heading = wrap_angle(ant.heading + std::f64::consts::PI);
        grid.try_move(ant, step);
    }
}

/// Outcome of one baseline colony run, with the final world for inspection.
pub struct BaselineRun {
    pub result: TrialResult,
    pub grid: WorldGrid,
    pub ants: Vec<AntState>,
}

pub fn run_baseline(world_cfg: &WorldConfig, cfg: &BaselineConfig, seed: u64) -> Result<BaselineRun> {
    cfg.validate()?;
    let mut rng = from_seed(seed);
    let (mut grid, mut ants) = init_world(world_cfg, &mut rng)?;
    let scent = ScentField::new(&grid);
    let mut events = Vec::new();
    let mut t_s = world_cfg.max_ticks;
    for t in 0..world_cfg.max_ticks {
        events.clear();
        for (j, ant) in ants.iter_mut().enumerate() {
            if (t as u64) < j as u64 * cfg.departure_stagger as u64 {
                continue;
            }
            baseline_step(ant, &mut grid, &scent, cfg, &mut rng, &mut events);
        }
        grid.end_tick();
        if grid.all_food_delivered() && grid.total_food() > 0 {
            t_s = t + 1;
            break;
        }
    }
    Ok(BaselineRun {
        result: TrialResult {
            model: MODEL_NAME.to_string(),
            trial_seed: seed,
            food_delivered: grid.delivered(),
            t_s,
        },
        grid,
        ants,
    })
}

/// Food delivered by the rule-based colony within the horizon.
pub fn run_baseline_trial(world_cfg: &WorldConfig, cfg: &BaselineConfig, seed: u64) -> Result<TrialResult> {
    run_baseline(world_cfg, cfg, seed).map(|r| r.result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::EventKind;

    #[test]
    fn zero_ants_deliver_nothing() {
        let wc = WorldConfig {
            n_ants: 0,
            max_ticks: 200,
            ..Default::default()
        };
        let r = run_baseline_trial(&wc, &BaselineConfig::default(), 1).unwrap();
        assert_eq!(r.food_delivered, 0);
        assert_eq!(r.t_s, 200);
    }

    #[test]
    fn nest_scent_peaks_at_nest() {
        let (g, _) = init_world(&WorldConfig::default(), &mut from_seed(4)).unwrap();
        let s = ScentField::new(&g);
        let (cx, cy) = g.nest_center();
        let c = s.nest_scent(cx, cy);
        for d in 1..10 {
            let v = s.nest_scent(cx + d as f64, cy);
            if v.is_finite() {
                assert!(v < c);
            }
        }
        assert_eq!(s.nest_scent(-1.0, 3.0), f64::NEG_INFINITY);
    }

    #[test]
    fn turns_toward_stronger_probe() {
        let field = |x: f64, y: f64| if y > 10.6 { 5.0 } else if x > 10.9 { 1.0 } else { 0.0 };
        let mut ant = AntState::new(0, 10.0, 10.0, 0.0);
        // Left probe (45 deg) is at y = 10.7 -> 5.0, ahead is 1.0.
        turn_uphill(&mut ant, 1.0, 45f64.to_radians(), field);
        assert!((ant.heading - 45f64.to_radians()).abs() < 1e-12);
        // Positive scaling of the field keeps the choice.
        let mut scaled = AntState::new(0, 10.0, 10.0, 0.0);
        turn_uphill(&mut scaled, 1.0, 45f64.to_radians(), |x, y| 7.0 * field(x, y));
        assert_eq!(scaled.heading, ant.heading);
    }

    #[test]
    fn carrying_ant_returns_home() {
        let wc = WorldConfig::default();
        let (mut g, _) = init_world(&wc, &mut from_seed(9)).unwrap();
        let scent = ScentField::new(&g);
        let cfg = BaselineConfig {
            wiggle_deg: 0.0,
            ..Default::default()
        };
        let (cx, cy) = g.nest_center();
        let start_x = if cx > 20.0 { cx - 8.0 } else { cx + 8.0 };
        let mut ant = AntState::new(0, start_x, cy + 0.3, 1.0);
        ant.carrying = true;
        let mut rng = from_seed(0);
        let mut ev = Vec::new();
        let mut steps = 0;
        while ev.is_empty() {
            baseline_step(&mut ant, &mut g, &scent, &cfg, &mut rng, &mut ev);
            steps += 1;
            assert!(steps < 30, "did not reach the nest");
        }
        assert_eq!(ev[0].kind, EventKind::FoodDelivered);
        assert!(g.total_pheromone() > 0.0);
    }

    #[test]
    fn seeded_random_walk_is_reproducible() {
        let wc = WorldConfig {
            max_ticks: 300,
            ..Default::default()
        };
        let a = run_baseline(&wc, &BaselineConfig::default(), 42).unwrap();
        let b = run_baseline(&wc, &BaselineConfig::default(), 42).unwrap();
        assert_eq!(a.ants, b.ants);
        assert_eq!(a.grid, b.grid);
    }

    #[test]
    fn longer_horizon_never_delivers_less() {
        for seed in 0..3 {
            let short = WorldConfig {
                max_ticks: 600,
                ..Default::default()
            };
            let long = WorldConfig {
                max_ticks: 1200,
                ..Default::default()
            };
            let a = run_baseline_trial(&short, &BaselineConfig::default(), seed).unwrap();
            let b = run_baseline_trial(&long, &BaselineConfig::default(), seed).unwrap();
            assert!(b.food_delivered >= a.food_delivered);
        }
    }

    #[test]
    fn baseline_conserves_food() {
        let wc = WorldConfig {
            max_ticks: 800,
            ..Default::default()
        };
        let run = run_baseline(&wc, &BaselineConfig::default(), 5).unwrap();
        let carried = run.ants.iter().filter(|a| a.carrying).count() as u32;
        assert_eq!(run.grid.food_on_grid() + carried + run.grid.delivered(), 150);
    }
}
