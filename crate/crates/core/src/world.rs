//! Grid world: pheromone field, food piles, nest, ant kinematics.
//!
//! Coordinates are continuous, in patch units, with `x` in `[0, width)` and
//! `y` in `[0, height)`; patch `(i, j)` covers `[i, i+1) x [j, j+1)`.
//! Headings are radians, counter-clockwise from the +x axis, so "left" means
//! a positive rotation. The grid boundary acts as a wall.

use std::f64::consts::{PI, TAU};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::embodiment::{ActionCommand, SensorReading};
use crate::rng::SimRng;
use crate::{Error, Result};

/// Relative positions of the food piles: right-middle, bottom-left, top-left.
pub const PILE_TEMPLATE: [(f64, f64); 3] = [(35.0 / 40.0, 28.0 / 55.0), (5.0 / 40.0, 5.0 / 55.0), (5.0 / 40.0, 52.0 / 55.0)];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WorldConfig {
    pub width: usize,
    pub height: usize,
    pub n_piles: usize,
    /// Food units per pile.
    pub pile_size: u32,
    /// Pile disc radius in patches.
    pub pile_radius: f64,
    pub nest_radius: f64,
    pub diffusion_rate: f64,
    pub evaporation_rate: f64,
    pub pheromone_deposit_amount: f64,
    /// Concentrations below this are truncated to zero after evaporation.
    pub pheromone_floor: f64,
    /// Smell readings saturate at this concentration.
    pub pheromone_saturation: f64,
    pub n_ants: usize,
    pub max_ticks: u32,
    pub move_step: f64,
    /// Rotation per net output spike, degrees.
    pub rotation_unit_deg: f64,
    /// Cap on rotation per tick, degrees.
    pub max_turn_deg: f64,
    pub probe_distance: f64,
    pub smell_probe_angle_deg: f64,
    pub view_range: f64,
    pub view_half_angle_deg: f64,
    /// Half-width of the "nest ahead" sector, degrees.
    pub nest_sector_half_width_deg: f64,
}

impl Default for WorldConfig {
    fn default() -> Self {
        Self {
            width: 40,
            height: 55,
            n_piles: 3,
            pile_size: 50,
            pile_radius: 2.5,
            nest_radius: 3.0,
            diffusion_rate: 0.5,
            evaporation_rate: 0.1,
            pheromone_deposit_amount: 10.0,
            pheromone_floor: 1e-4,
            pheromone_saturation: 50.0,
            n_ants: 15,
            max_ticks: 2000,
            move_step: 1.0,
            rotation_unit_deg: 15.0,
            max_turn_deg: 45.0,
            probe_distance: 2.0,
            smell_probe_angle_deg: 45.0,
            view_range: 3.0,
            view_half_angle_deg: 45.0,
            nest_sector_half_width_deg: 30.0,
        }
    }
}

impl WorldConfig {
    pub fn total_food(&self) -> u32 {
        self.n_piles as u32 * self.pile_size
    }

    pub fn validate(&self) -> Result<()> {
        let err = |m: &str| Err(Error::Config(m.to_string()));
        if self.width < 3 || self.height < 3 {
            return err("world must be at least 3x3 patches");
        }
        if self.n_piles > PILE_TEMPLATE.len() {
            return err("at most 3 food piles are supported");
        }
        if !(0.0..=1.0).contains(&self.diffusion_rate) {
            return err("diffusion_rate must lie in [0, 1]");
        }
        if !(self.evaporation_rate > 0.0 && self.evaporation_rate < 1.0) {
            return err("evaporation_rate must lie in (0, 1)");
        }
        if !(self.pheromone_deposit_amount >= 0.0) || !(self.pheromone_floor >= 0.0) {
            return err("pheromone amounts must be non-negative");
        }
        if !(self.pheromone_saturation > 0.0) {
            return err("pheromone_saturation must be positive");
        }
        if !(self.nest_radius >= 0.0) || !(self.pile_radius >= 0.0) {
            return err("radii must be non-negative");
        }
        let min_side = self.width.min(self.height) as f64;
        if 2.0 * (self.nest_radius + 1.0) >= min_side {
            return err("nest radius does not fit inside the world");
        }
        if !(self.move_step > 0.0) || !(self.rotation_unit_deg >= 0.0) || !(self.max_turn_deg >= 0.0) {
            return err("kinematics must be positive");
        }
        Ok(())
    }

    fn pile_centers(&self) -> Vec<(f64, f64)> {
        PILE_TEMPLATE[..self.n_piles]
            .iter()
            .map(|&(fx, fy)| {
                let px = ((fx * self.width as f64).floor() as usize).min(self.width - 1);
                let py = ((fy * self.height as f64).floor() as usize).min(self.height - 1);
                (px as f64 + 0.5, py as f64 + 0.5)
            })
            .collect()
    }
}

/// Read-only view of one grid cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Patch {
    pub pheromone: f64,
    pub food: u32,
    pub is_nest: bool,
    pub is_wall: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AntState {
    pub id: usize,
    pub x: f64,
    pub y: f64,
    pub heading: f64,
    pub carrying: bool,
    /// Food touched or delivered last tick.
    pub reward_latch: bool,
    /// Wall hit last tick.
    pub pain_latch: bool,
}

impl AntState {
    pub fn new(id: usize, x: f64, y: f64, heading: f64) -> Self {
        Self {
            id,
            x,
            y,
            heading: wrap_angle(heading),
            carrying: false,
            reward_latch: false,
            pain_latch: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EventKind {
    FoodTouched,
    FoodDelivered,
    WallHit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorldEvent {
    pub kind: EventKind,
    pub ant: usize,
    pub tick: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AntPose {
    pub id: usize,
    pub x: f64,
    pub y: f64,
    pub heading: f64,
    pub carrying: bool,
}

/// One exported world snapshot. Matrices are indexed `[y][x]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Snapshot {
    pub tick: u64,
    pub pheromone: Vec<Vec<f64>>,
    pub food: Vec<Vec<u32>>,
    pub nest_center: (f64, f64),
    pub ants: Vec<AntPose>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorldGrid {
    cfg: WorldConfig,
    pheromone: Vec<f64>,
    scratch: Vec<f64>,
    food: Vec<u32>,
    nest: Vec<bool>,
    wall: Vec<bool>,
    nest_center: (f64, f64),
    tick: u64,
    delivered: u32,
    total_food: u32,
}

/// Wraps an angle into `[0, 2π)`.
pub fn wrap_angle(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Wraps an angle into `(-π, π]`.
pub fn signed_angle(a: f64) -> f64 {
    let r = wrap_angle(a);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// Builds the world: random nest, template piles, ants at the nest.
pub fn init_world(cfg: &WorldConfig, rng: &mut SimRng) -> Result<(WorldGrid, Vec<AntState>)> {
    cfg.validate()?;
    let (w, h) = (cfg.width, cfg.height);
    let n = w * h;
    let mut grid = WorldGrid {
        cfg: cfg.clone(),
        pheromone: vec![0.0; n],
        scratch: vec![0.0; n],
        food: vec![0; n],
        nest: vec![false; n],
        wall: vec![false; n],
        nest_center: (0.0, 0.0),
        tick: 0,
        delivered: 0,
        total_food: 0,
    };

    let piles = cfg.pile_centers();
    for (a, pa) in piles.iter().enumerate() {
        for pb in &piles[a + 1..] {
            if dist(*pa, *pb) <= 2.0 * cfg.pile_radius + 1.0 {
                return Err(Error::Config("food piles overlap at this grid size".into()));
            }
        }
    }
    for &c in &piles {
        grid.place_pile(c, cfg.pile_radius, cfg.pile_size)?;
    }
    grid.total_food = grid.food.iter().sum();

    let margin = cfg.nest_radius.ceil() as usize;
    let clearance = cfg.nest_radius + cfg.pile_radius + 2.0;
    let mut center = None;
    for _ in 0..10_000 {
        let px = rng.random_range(margin..w - margin);
        let py = rng.random_range(margin..h - margin);
        let c = (px as f64 + 0.5, py as f64 + 0.5);
        if piles.iter().all(|&p| dist(c, p) >= clearance) {
            center = Some(c);
            break;
        }
    }
    let center = center.ok_or_else(|| Error::Config("no room to place the nest clear of the food piles".into()))?;
    grid.nest_center = center;
    for j in 0..h {
        for i in 0..w {
            if dist((i as f64 + 0.5, j as f64 + 0.5), center) <= cfg.nest_radius {
                grid.nest[j * w + i] = true;
            }
        }
    }

    let ants = (0..cfg.n_ants)
        .map(|id| AntState::new(id, center.0, center.1, rng.random_range(0.0..TAU)))
        .collect();
    Ok((grid, ants))
}

fn dist(a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - b.0).hypot(a.1 - b.1)
}

impl WorldGrid {
    fn place_pile(&mut self, center: (f64, f64), radius: f64, size: u32) -> Result<()> {
        let mut cells: Vec<(f64, usize)> = Vec::new();
        for j in 0..self.cfg.height {
            for i in 0..self.cfg.width {
                let d = dist((i as f64 + 0.5, j as f64 + 0.5), center);
                if d <= radius {
                    cells.push((d, j * self.cfg.width + i));
                }
            }
        }
        if cells.is_empty() && size > 0 {
            return Err(Error::Config("food pile covers no patch".into()));
        }
        // Closest cells take the remainder first.
        cells.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let n = cells.len() as u32;
        for (k, &(_, idx)) in cells.iter().enumerate() {
            self.food[idx] += size / n + u32::from((k as u32) < size % n);
        }
        Ok(())
    }

    pub fn config(&self) -> &WorldConfig {
        &self.cfg
    }

    pub fn width(&self) -> usize {
        self.cfg.width
    }

    pub fn height(&self) -> usize {
        self.cfg.height
    }

    /// Completed world ticks.
    pub fn tick(&self) -> u64 {
        self.tick
    }

    pub fn nest_center(&self) -> (f64, f64) {
        self.nest_center
    }

    pub fn delivered(&self) -> u32 {
        self.delivered
    }

    pub fn total_food(&self) -> u32 {
        self.total_food
    }

    pub fn food_on_grid(&self) -> u32 {
        self.food.iter().sum()
    }

    pub fn all_food_delivered(&self) -> bool {
        self.delivered == self.total_food
    }

    pub fn pheromone(&self) -> &[f64] {
        &self.pheromone
    }

    pub fn pheromone_mut(&mut self) -> &mut [f64] {
        &mut self.pheromone
    }

    pub fn total_pheromone(&self) -> f64 {
        self.pheromone.iter().sum()
    }

    pub fn food_mut(&mut self) -> &mut [u32] {
        &mut self.food
    }

    pub fn set_wall(&mut self, px: usize, py: usize, wall: bool) {
        let i = self.index(px, py);
        self.wall[i] = wall;
    }

    pub fn index(&self, px: usize, py: usize) -> usize {
        py * self.cfg.width + px
    }

    pub fn patch(&self, px: usize, py: usize) -> Patch {
        let i = self.index(px, py);
        Patch {
            pheromone: self.pheromone[i],
            food: self.food[i],
            is_nest: self.nest[i],
            is_wall: self.wall[i],
        }
    }

    /// Patch containing `(x, y)`, if it lies on the grid.
    pub fn patch_at(&self, x: f64, y: f64) -> Option<(usize, usize)> {
        if x >= 0.0 && y >= 0.0 && x < self.cfg.width as f64 && y < self.cfg.height as f64 {
            Some((x as usize, y as usize))
        } else {
            None
        }
    }

    fn clamped_patch(&self, x: f64, y: f64) -> (usize, usize) {
        let px = x.floor().clamp(0.0, (self.cfg.width - 1) as f64) as usize;
        let py = y.floor().clamp(0.0, (self.cfg.height - 1) as f64) as usize;
        (px, py)
    }

    fn blocked(&self, x: f64, y: f64) -> bool {
        match self.patch_at(x, y) {
            Some((px, py)) => self.wall[self.index(px, py)],
            None => true,
        }
    }

    pub fn in_nest(&self, x: f64, y: f64) -> bool {
        self.patch_at(x, y).is_some_and(|(px, py)| self.nest[self.index(px, py)])
    }

    /// Pheromone at the patch containing `(x, y)`; zero off-grid.
    pub fn pheromone_at(&self, x: f64, y: f64) -> f64 {
        self.patch_at(x, y)
            .map_or(0.0, |(px, py)| self.pheromone[self.index(px, py)])
    }

    /// Adds `amount` at the patch containing `position`, clamping to the grid.
    pub fn deposit_pheromone(&mut self, x: f64, y: f64, amount: f64) {
        debug_assert!(amount >= 0.0);
        let (px, py) = self.clamped_patch(x, y);
        let i = self.index(px, py);
        self.pheromone[i] += amount.max(0.0);
    }

    /// Moore-8 diffusion: every patch keeps `1 - rate` of its pheromone and
    /// sends `rate / 8` to each neighbour. Shares aimed off the grid stay put,
    /// so total mass is conserved.
    pub fn diffuse_pheromone(&mut self, rate: f64) {
        if rate == 0.0 {
            return;
        }
        let (w, h) = (self.cfg.width, self.cfg.height);
        let keep = 1.0 - rate;
        let share_frac = rate / 8.0;
        let next = &mut self.scratch;
        next.iter_mut().for_each(|v| *v = 0.0);
        for j in 0..h {
            for i in 0..w {
                let idx = j * w + i;
                let p = self.pheromone[idx];
                if p == 0.0 {
                    continue;
                }
                let share = p * share_frac;
                let mut kept = p * keep;
                for dj in [-1isize, 0, 1] {
                    for di in [-1isize, 0, 1] {
                        if di == 0 && dj == 0 {
                            continue;
                        }
                        let (ni, nj) = (i as isize + di, j as isize + dj);
                        if ni < 0 || nj < 0 || ni >= w as isize || nj >= h as isize {
                            kept += share;
                        } else {
                            next[nj as usize * w + ni as usize] += share;
                        }
                    }
                }
                next[idx] += kept;
            }
        }
        std::mem::swap(&mut self.pheromone, &mut self.scratch);
    }

    /// Multiplies the field by `1 - rate`, then zeroes values below the floor.
    pub fn evaporate_pheromone(&mut self, rate: f64) {
        let factor = 1.0 - rate;
        let floor = self.cfg.pheromone_floor;
        for p in &mut self.pheromone {
            let v = *p * factor;
            *p = if v < floor { 0.0 } else { v };
        }
    }

    /// Reads the 12 sensor channels for `ant`.
    pub fn sense(&self, ant: &AntState) -> SensorReading {
        let c = &self.cfg;
        let probe = c.smell_probe_angle_deg.to_radians();
        let smell = |offset: f64| {
            let a = ant.heading + offset;
            let v = self.pheromone_at(ant.x + c.probe_distance * a.cos(), ant.y + c.probe_distance * a.sin());
            (v / c.pheromone_saturation).min(1.0)
        };

        let (nx, ny) = (self.nest_center.0 - ant.x, self.nest_center.1 - ant.y);
        let sector = c.nest_sector_half_width_deg.to_radians();
        let (nest_left, nest_middle, nest_right) = if nx.hypot(ny) < 1e-9 {
            (0.0, 1.0, 0.0)
        } else {
            let rel = signed_angle(ny.atan2(nx) - ant.heading);
            if rel.abs() <= sector {
                (0.0, 1.0, 0.0)
            } else if rel > 0.0 {
                (1.0, 0.0, 0.0)
            } else {
                (0.0, 0.0, 1.0)
            }
        };

        SensorReading {
            smell_left: smell(probe),
            smell_middle: smell(0.0),
            smell_right: smell(-probe),
            nest_left,
            nest_middle,
            nest_right,
            on_nest: f64::from(u8::from(self.in_nest(ant.x, ant.y))),
            reward: f64::from(u8::from(ant.reward_latch)),
            nociceptor: f64::from(u8::from(ant.pain_latch)),
            visual_green: f64::from(u8::from(self.sees_food(ant))),
            visual_red: f64::from(u8::from(self.sees_wall(ant))),
            heartbeat: 1.0,
        }
    }

    fn sees_food(&self, ant: &AntState) -> bool {
        let c = &self.cfg;
        let half = c.view_half_angle_deg.to_radians();
        let r = c.view_range;
        let own = self.patch_at(ant.x, ant.y);
        let (x0, x1) = ((ant.x - r).floor().max(0.0) as usize, ((ant.x + r).floor() as usize).min(c.width - 1));
        let (y0, y1) = ((ant.y - r).floor().max(0.0) as usize, ((ant.y + r).floor() as usize).min(c.height - 1));
        for py in y0..=y1 {
            for px in x0..=x1 {
                if self.food[self.index(px, py)] == 0 {
                    continue;
                }
                if own == Some((px, py)) {
                    return true;
                }
                let (dx, dy) = (px as f64 + 0.5 - ant.x, py as f64 + 0.5 - ant.y);
                if dx.hypot(dy) <= r && signed_angle(dy.atan2(dx) - ant.heading).abs() <= half {
                    return true;
                }
            }
        }
        false
    }

    fn sees_wall(&self, ant: &AntState) -> bool {
        let c = &self.cfg;
        let half = c.view_half_angle_deg.to_radians();
        let steps = (c.view_range / 0.5).round() as usize;
        [-half, -half / 2.0, 0.0, half / 2.0, half].iter().any(|&off| {
            let a = ant.heading + off;
            (1..=steps).any(|k| {
                let d = k as f64 * 0.5;
                self.blocked(ant.x + d * a.cos(), ant.y + d * a.sin())
            })
        })
    }

    /// Moves the ant forward by `step` unless a wall is in the way.
    /// Returns `false` on a wall hit.
    pub fn try_move(&self, ant: &mut AntState, step: f64) -> bool {
        let (nx, ny) = (ant.x + step * ant.heading.cos(), ant.y + step * ant.heading.sin());
        if self.blocked(nx, ny) {
            false
        } else {
            ant.x = nx;
            ant.y = ny;
            true
        }
    }

    /// Pickup and delivery rules, shared by every ant controller.
    pub fn resolve_contacts(&mut self, ant: &mut AntState, events: &mut Vec<WorldEvent>) {
        let tick = self.tick + 1;
        let Some((px, py)) = self.patch_at(ant.x, ant.y) else {
            return;
        };
        let i = self.index(px, py);
        if !ant.carrying && self.food[i] > 0 {
            self.food[i] -= 1;
            ant.carrying = true;
            events.push(WorldEvent {
                kind: EventKind::FoodTouched,
                ant: ant.id,
                tick,
            });
        } else if ant.carrying && self.nest[i] {
            ant.carrying = false;
            self.delivered += 1;
            events.push(WorldEvent {
                kind: EventKind::FoodDelivered,
                ant: ant.id,
                tick,
            });
        }
    }

    /// Rotate, move, pick up / deliver, then drop pheromone if requested.
    pub fn apply_action(&mut self, ant: &mut AntState, action: &ActionCommand, events: &mut Vec<WorldEvent>) {
        let c = &self.cfg;
        let max = c.max_turn_deg.to_radians();
        let turn = (action.net_rotation() as f64 * c.rotation_unit_deg.to_radians()).clamp(-max, max);
        ant.heading = wrap_angle(ant.heading + turn);
        if action.move_forward && !self.try_move(ant, c.move_step) {
            events.push(WorldEvent {
                kind: EventKind::WallHit,
                ant: ant.id,
                tick: self.tick + 1,
            });
        }
        self.resolve_contacts(ant, events);
        if action.drop_pheromone {
            let amount = self.cfg.pheromone_deposit_amount;
            self.deposit_pheromone(ant.x, ant.y, amount);
        }
    }

    /// Closes a tick: diffusion, evaporation, tick counter.
    pub fn end_tick(&mut self) {
        self.diffuse_pheromone(self.cfg.diffusion_rate);
        self.evaporate_pheromone(self.cfg.evaporation_rate);
        self.tick += 1;
    }

    /// Applies one action per ant in index order, then closes the tick.
    pub fn world_tick(&mut self, ants: &mut [AntState], actions: &[ActionCommand]) -> Result<Vec<WorldEvent>> {
        if ants.len() != actions.len() {
            return Err(Error::LengthMismatch {
                what: "actions per ant",
                expected: ants.len(),
                actual: actions.len(),
            });
        }
        let mut events = Vec::new();
        for (ant, action) in ants.iter_mut().zip(actions) {
            self.apply_action(ant, action, &mut events);
        }
        self.end_tick();
        Ok(events)
    }

    pub fn snapshot(&self, ants: &[AntState]) -> Snapshot {
        let w = self.cfg.width;
        Snapshot {
            tick: self.tick,
            pheromone: self.pheromone.chunks(w).map(<[f64]>::to_vec).collect(),
            food: self.food.chunks(w).map(<[u32]>::to_vec).collect(),
            nest_center: self.nest_center,
            ants: ants
                .iter()
                .map(|a| AntPose {
                    id: a.id,
                    x: a.x,
                    y: a.y,
                    heading: a.heading,
                    carrying: a.carrying,
                })
                .collect(),
        }
    }

    /// Pheromone matrix as CSV text, one row per `y`, for plotting.
    pub fn pheromone_csv(&self) -> String {
        matrix_csv(&self.snapshot(&[]).pheromone)
    }
}

pub fn matrix_csv(rows: &[Vec<f64>]) -> String {
    let mut out = String::new();
    for row in rows {
        let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}
