//! Colony fitness: rewards for food touched and delivered, a cost per ant
//! per tick and per action, plus a speed bonus when all food comes home
//! before the horizon.
//!
//! ```text
//! f = Σ_{t=1..T_s} Σ_{j=1..J} (N_tj + F_tj − C_tj) + η (T − T_s)
//! ```

use serde::{Deserialize, Serialize};

use crate::embodiment::ActionCommand;
use crate::world::{EventKind, WorldEvent};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RewardSchedule {
    pub nest_reward: f64,
    pub food_touch_reward: f64,
    /// Charged per ant per tick.
    pub step_cost: f64,
    pub per_action_cost: f64,
    pub speed_bonus_eta: f64,
}

impl Default for RewardSchedule {
    fn default() -> Self {
        Self {
            nest_reward: 100.0,
            food_touch_reward: 5.0,
            step_cost: 0.01,
            per_action_cost: 0.01,
            speed_bonus_eta: 1.0,
        }
    }
}

impl RewardSchedule {
    pub fn zero() -> Self {
        Self {
            nest_reward: 0.0,
            food_touch_reward: 0.0,
            step_cost: 0.0,
            per_action_cost: 0.0,
            speed_bonus_eta: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let all = [
            self.nest_reward,
            self.food_touch_reward,
            self.step_cost,
            self.per_action_cost,
            self.speed_bonus_eta,
        ];
        if all.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::Config("reward schedule values must be finite and non-negative".into()));
        }
        if self.nest_reward < self.food_touch_reward {
            return Err(Error::Config("nest_reward must dominate food_touch_reward".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FitnessBreakdown {
    pub sum_nest: f64,
    pub sum_food: f64,
    pub sum_cost: f64,
    /// Ticks accumulated so far; the end tick once the run stops.
    pub t_s: u32,
    /// Simulation horizon.
    pub t_max: u32,
}

impl FitnessBreakdown {
    pub fn new(t_max: u32) -> Self {
        Self {
            t_max,
            ..Default::default()
        }
    }

    /// Adds one world tick. `actions` holds one command per ant.
    pub fn accumulate_tick(&mut self, events: &[WorldEvent], actions: &[ActionCommand], schedule: &RewardSchedule) {
        let (mut delivered, mut touched) = (0u32, 0u32);
        for e in events {
            match e.kind {
                EventKind::FoodDelivered => delivered += 1,
                EventKind::FoodTouched => touched += 1,
                EventKind::WallHit => {}
            }
        }
        let taken: u32 = actions.iter().map(ActionCommand::action_count).sum();
        self.sum_nest += schedule.nest_reward * delivered as f64;
        self.sum_food += schedule.food_touch_reward * touched as f64;
        self.sum_cost += schedule.step_cost * actions.len() as f64 + schedule.per_action_cost * taken as f64;
        self.t_s += 1;
    }

    pub fn speed_bonus(&self, schedule: &RewardSchedule) -> f64 {
        schedule.speed_bonus_eta * self.t_max.saturating_sub(self.t_s) as f64
    }

    pub fn finalize(&self, schedule: &RewardSchedule) -> f64 {
        self.sum_nest + self.sum_food - self.sum_cost + self.speed_bonus(schedule)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(kind: EventKind) -> WorldEvent {
        WorldEvent { kind, ant: 0, tick: 1 }
    }

    #[test]
    fn idle_tick_costs_step_cost_per_ant() {
        let mut bd = FitnessBreakdown::new(2000);
        bd.accumulate_tick(&[], &[ActionCommand::default(); 15], &RewardSchedule::default());
        assert!((bd.sum_cost - 0.15).abs() < 1e-15);
        assert_eq!(bd.t_s, 1);
    }

    #[test]
    fn one_delivery() {
        let mut bd = FitnessBreakdown::new(10);
        bd.accumulate_tick(&[ev(EventKind::FoodDelivered)], &[], &RewardSchedule::default());
        assert_eq!(bd.sum_nest, 100.0);
    }

    #[test]
    fn zero_schedule_leaves_sums() {
        let mut bd = FitnessBreakdown::new(10);
        let act = ActionCommand {
            move_forward: true,
            ..Default::default()
        };
        bd.accumulate_tick(
            &[ev(EventKind::FoodDelivered), ev(EventKind::FoodTouched)],
            &[act; 4],
            &RewardSchedule::zero(),
        );
        assert_eq!((bd.sum_nest, bd.sum_food, bd.sum_cost), (0.0, 0.0, 0.0));
    }

    #[test]
    fn no_bonus_at_horizon() {
        let s = RewardSchedule::default();
        let mut bd = FitnessBreakdown::new(5);
        for _ in 0..5 {
            bd.accumulate_tick(&[], &[ActionCommand::default(); 3], &s);
        }
        assert_eq!(bd.speed_bonus(&s), 0.0);
        assert!(bd.finalize(&s) < 0.0);
    }

    #[test]
    fn early_finish_bonus() {
        let s = RewardSchedule::default();
        let bd = FitnessBreakdown {
            sum_nest: 150.0 * 100.0,
            sum_food: 150.0 * 5.0,
            sum_cost: 0.0,
            t_s: 1500,
            t_max: 2000,
        };
        assert_eq!(bd.speed_bonus(&s), 500.0);
        assert_eq!(bd.finalize(&s), 15000.0 + 750.0 + 500.0);
    }

    #[test]
    fn schedule_validation() {
        RewardSchedule::default().validate().unwrap();
        let s = RewardSchedule {
            nest_reward: 1.0,
            food_touch_reward: 5.0,
            ..Default::default()
        };
        assert!(s.validate().is_err());
    }
}
