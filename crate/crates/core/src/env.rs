//! Two-dimensional point-mass world with agents and fixed landmarks.
//!
//! Dynamics are deterministic. Each step an agent's force is its clipped
//! acceleration command scaled by `accel_gain` plus soft repulsive contact
//! forces from nearby agents; velocity is damped, integrated with explicit
//! Euler and clamped to the agent's maximum speed.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Vec2 = [f64; 2];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WorldConfig {
    pub n_agents: usize,
    pub n_landmarks: usize,
    pub landmark_positions: Vec<Vec2>,
    pub agent_radius: f64,
    pub landmark_radius: f64,
    pub dt: f64,
    pub damping: f64,
    pub max_speed: Vec<f64>,
    pub accel_gain: f64,
    pub reward_sigma2: f64,
    pub reward_gate: f64,
    pub episode_length: usize,
    pub contact_stiffness: f64,
    pub contact_margin: f64,
    pub spawn_extent: f64,
}

impl Default for WorldConfig {
    fn default() -> Self {
        Self {
            n_agents: 3,
            n_landmarks: 3,
            landmark_positions: triangle_landmarks(0.6),
            agent_radius: 0.15,
            landmark_radius: 0.05,
            dt: 0.1,
            damping: 0.25,
            // agent 3 is the hindered one
            max_speed: vec![1.0, 1.0, 0.25],
            accel_gain: 5.0,
            reward_sigma2: 0.1,
            reward_gate: 0.2,
            episode_length: 25,
            contact_stiffness: 100.0,
            contact_margin: 0.25,
            spawn_extent: 1.0,
        }
    }
}

/// Vertices of an equilateral triangle centred on the origin, first vertex
/// straight up.
pub fn triangle_landmarks(circumradius: f64) -> Vec<Vec2> {
    (0..3)
        .map(|k| {
            let angle = std::f64::consts::FRAC_PI_2 + k as f64 * 2.0 * std::f64::consts::PI / 3.0;
            [circumradius * angle.cos(), circumradius * angle.sin()]
        })
        .collect()
}

/// Joint physical state of all agents.
#[derive(Debug, Clone, PartialEq)]
pub struct WorldState {
    pub positions: Vec<Vec2>,
    pub velocities: Vec<Vec2>,
    pub step_index: usize,
}

/// Result of advancing the world one step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub state: WorldState,
    pub rewards: Vec<f64>,
    pub done: bool,
}

impl WorldConfig {
    /// A single agent and a single landmark at the origin.
    pub fn single_agent() -> Self {
        Self {
            n_agents: 1,
            n_landmarks: 1,
            landmark_positions: vec![[0.0, 0.0]],
            max_speed: vec![1.0],
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::WorldConfig(msg));
        if self.n_agents == 0 {
            return bad("n_agents must be positive".into());
        }
        if self.n_landmarks == 0 {
            return bad("at least one landmark is required".into());
        }
        if self.landmark_positions.len() != self.n_landmarks {
            return bad(format!(
                "{} landmark positions given for n_landmarks = {}",
                self.landmark_positions.len(),
                self.n_landmarks
            ));
        }
        if self.max_speed.len() != self.n_agents {
            return bad(format!("max_speed has {} entries for {} agents", self.max_speed.len(), self.n_agents));
        }
        if self.max_speed.iter().any(|&s| !(s > 0.0 && s.is_finite())) {
            return bad("max_speed entries must be positive".into());
        }
        for (name, v) in [
            ("agent_radius", self.agent_radius),
            ("landmark_radius", self.landmark_radius),
            ("dt", self.dt),
            ("accel_gain", self.accel_gain),
            ("reward_sigma2", self.reward_sigma2),
            ("reward_gate", self.reward_gate),
            ("contact_margin", self.contact_margin),
            ("spawn_extent", self.spawn_extent),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("{name} must be positive and finite, got {v}"));
            }
        }
        if !(self.contact_stiffness >= 0.0 && self.contact_stiffness.is_finite()) {
            return bad("contact_stiffness must be non-negative".into());
        }
        if !(0.0..1.0).contains(&self.damping) {
            return bad(format!("damping must lie in [0, 1), got {}", self.damping));
        }
        if self.episode_length == 0 {
            return bad("episode_length must be positive".into());
        }
        if self.landmark_positions.iter().flatten().any(|c| !c.is_finite()) {
            return bad("landmark positions must be finite".into());
        }
        Ok(())
    }

    /// Index of the agent with the strictly lowest maximum speed, if any.
    pub fn hindered_agent(&self) -> Option<usize> {
        let (idx, &min) = self.max_speed.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1))?;
        let unique = self.max_speed.iter().enumerate().all(|(i, &s)| i == idx || s > min);
        unique.then_some(idx)
    }

    pub fn obs_dim(&self) -> usize {
        4 + 2 * self.n_landmarks + 2 * (self.n_agents - 1)
    }

    /// Fresh episode: uniform random positions, zero velocities.
    pub fn reset<R: Rng + ?Sized>(&self, rng: &mut R) -> (WorldState, Vec<Vec<f64>>) {
        let e = self.spawn_extent;
        let positions = (0..self.n_agents)
            .map(|_| [rng.gen_range(-e..=e), rng.gen_range(-e..=e)])
            .collect();
        let state = WorldState {
            positions,
            velocities: vec![[0.0; 2]; self.n_agents],
            step_index: 0,
        };
        let obs = self.observe(&state);
        (state, obs)
    }

    /// Advances the world by one step. Rewards are evaluated at the new
    /// positions.
    pub fn step(&self, state: &WorldState, actions: &[Vec2]) -> Result<StepOutcome> {
        let n = self.n_agents;
        if actions.len() != n {
            return Err(Error::LengthMismatch {
                context: "joint action",
                left: actions.len(),
                right: n,
            });
        }
        if actions.iter().flatten().any(|a| !a.is_finite()) {
            return Err(Error::NonFinite("action"));
        }

        let mut forces: Vec<Vec2> = actions
            .iter()
            .map(|a| [self.accel_gain * a[0].clamp(-1.0, 1.0), self.accel_gain * a[1].clamp(-1.0, 1.0)])
            .collect();
        for i in 0..n {
            for k in (i + 1)..n {
                if let Some(f) = self.contact_force(state.positions[i], state.positions[k], i < k) {
                    forces[i][0] += f[0];
                    forces[i][1] += f[1];
                    forces[k][0] -= f[0];
                    forces[k][1] -= f[1];
                }
            }
        }

        let keep = 1.0 - self.damping;
        let mut next = WorldState {
            positions: state.positions.clone(),
            velocities: state.velocities.clone(),
            step_index: state.step_index + 1,
        };
        for i in 0..n {
            let v = &mut next.velocities[i];
            v[0] = v[0] * keep + forces[i][0] * self.dt;
            v[1] = v[1] * keep + forces[i][1] * self.dt;
            let speed = v[0].hypot(v[1]);
            let cap = self.max_speed[i];
            if speed > cap {
                v[0] *= cap / speed;
                v[1] *= cap / speed;
            }
            let p = &mut next.positions[i];
            p[0] += v[0] * self.dt;
            p[1] += v[1] * self.dt;
        }

        let rewards = next
            .positions
            .iter()
            .map(|&p| individual_reward(p, &self.landmark_positions, self.reward_sigma2, self.reward_gate))
            .collect::<Result<Vec<_>>>()?;
        let done = state.step_index + 1 >= self.episode_length;
        Ok(StepOutcome {
            state: next,
            rewards,
            done,
        })
    }

    /// Force on the first body from the second, if they are within contact
    /// range.
    fn contact_force(&self, a: Vec2, b: Vec2, a_first: bool) -> Option<Vec2> {
        let dx = a[0] - b[0];
        let dy = a[1] - b[1];
        let dist = dx.hypot(dy);
        let reach = 2.0 * self.agent_radius;
        if dist >= reach + self.contact_margin {
            return None;
        }
        let m = self.contact_margin;
        let magnitude = self.contact_stiffness * m * softplus((reach - dist) / m);
        let dir = if dist > 1e-12 {
            [dx / dist, dy / dist]
        } else if a_first {
            [1.0, 0.0]
        } else {
            [-1.0, 0.0]
        };
        Some([magnitude * dir[0], magnitude * dir[1]])
    }

    /// Individual rewards for the current positions.
    pub fn rewards(&self, state: &WorldState) -> Vec<f64> {
        state
            .positions
            .iter()
            .map(|&p| {
                individual_reward(p, &self.landmark_positions, self.reward_sigma2, self.reward_gate)
                    .expect("validated config has landmarks")
            })
            .collect()
    }

    /// Per-agent observation vectors:
    /// `[vel (2), pos (2), landmark - pos (2M), other - pos (2(N-1))]`.
    pub fn observe(&self, state: &WorldState) -> Vec<Vec<f64>> {
        (0..self.n_agents)
            .map(|i| {
                let p = state.positions[i];
                let v = state.velocities[i];
                let mut o = Vec::with_capacity(self.obs_dim());
                o.extend_from_slice(&v);
                o.extend_from_slice(&p);
                for l in &self.landmark_positions {
                    o.push(l[0] - p[0]);
                    o.push(l[1] - p[1]);
                }
                for (k, q) in state.positions.iter().enumerate() {
                    if k != i {
                        o.push(q[0] - p[0]);
                        o.push(q[1] - p[1]);
                    }
                }
                o
            })
            .collect()
    }
}

fn softplus(x: f64) -> f64 {
    if x > 30.0 {
        x
    } else {
        x.exp().ln_1p()
    }
}

/// `exp(-d²/σ²)` where `d` is the distance to the closest landmark, or zero
/// when `d` is not strictly below `gate`.
pub fn individual_reward(position: Vec2, landmarks: &[Vec2], sigma2: f64, gate: f64) -> Result<f64> {
    let d2 = landmarks
        .iter()
        .map(|l| {
            let dx = position[0] - l[0];
            let dy = position[1] - l[1];
            dx * dx + dy * dy
        })
        .min_by(f64::total_cmp)
        .ok_or_else(|| Error::WorldConfig("no landmarks".into()))?;
    if d2.sqrt() < gate {
        Ok((-d2 / sigma2).exp())
    } else {
        Ok(0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn speed(v: Vec2) -> f64 {
        v[0].hypot(v[1])
    }

    #[test]
    fn default_config_is_valid() {
        let c = WorldConfig::default();
        c.validate().unwrap();
        assert_eq!(c.obs_dim(), 14);
        assert_eq!(c.hindered_agent(), Some(2));
        WorldConfig::single_agent().validate().unwrap();
    }

    #[test]
    fn validation_errors() {
        let mut c = WorldConfig::default();
        c.max_speed.pop();
        assert!(c.validate().is_err());
        let c = WorldConfig {
            damping: 1.0,
            ..WorldConfig::default()
        };
        assert!(c.validate().is_err());
        let c = WorldConfig {
            landmark_positions: vec![],
            ..WorldConfig::default()
        };
        assert!(c.validate().is_err());
    }

    #[test]
    fn reward_closed_form() {
        let l = [[0.0, 0.0]];
        assert_eq!(individual_reward([0.0, 0.0], &l, 0.1, 0.2).unwrap(), 1.0);
        assert_eq!(individual_reward([0.2, 0.0], &l, 0.1, 0.2).unwrap(), 0.0);
        let r = individual_reward([0.1, 0.0], &l, 0.1, 0.2).unwrap();
        assert!((r - (-0.1f64).exp()).abs() < 1e-12);
        assert!(individual_reward([0.0, 0.0], &[], 0.1, 0.2).is_err());
        // nearest landmark wins
        let r = individual_reward([0.0, 0.05], &[[5.0, 5.0], [0.0, 0.0]], 0.1, 0.2).unwrap();
        assert!((r - (-0.0025f64 / 0.1).exp()).abs() < 1e-15);
    }

    #[test]
    fn reset_is_seeded() {
        let c = WorldConfig::default();
        let a = c.reset(&mut ChaCha8Rng::seed_from_u64(7));
        let b = c.reset(&mut ChaCha8Rng::seed_from_u64(7));
        let d = c.reset(&mut ChaCha8Rng::seed_from_u64(8));
        assert_eq!(a, b);
        assert_ne!(a.0.positions, d.0.positions);
        assert_eq!(a.0.step_index, 0);
        assert!(a.0.velocities.iter().all(|v| *v == [0.0, 0.0]));
        assert!(a.0.positions.iter().flatten().all(|x| x.abs() <= c.spawn_extent));
        assert!(c.rewards(&a.0).iter().all(|r| (0.0..=1.0).contains(r)));
    }

    #[test]
    fn zero_action_fixed_point() {
        let c = WorldConfig::default();
        let s = WorldState {
            positions: vec![[-0.9, 0.0], [0.0, 0.0], [0.9, 0.0]],
            velocities: vec![[0.0; 2]; 3],
            step_index: 0,
        };
        let out = c.step(&s, &[[0.0; 2]; 3]).unwrap();
        assert_eq!(out.state.positions, s.positions);
        assert_eq!(out.state.velocities, s.velocities);
        assert_eq!(out.state.step_index, 1);
        assert!(!out.done);
    }

    #[test]
    fn terminal_speed_is_the_cap() {
        // v_{n+1} = 0.75 v_n + 0.5 has fixed point 2.0, above the cap of 1.0
        let c = WorldConfig::single_agent();
        let mut s = c.reset(&mut ChaCha8Rng::seed_from_u64(0)).0;
        for _ in 0..60 {
            s = c.step(&s, &[[1.0, 0.0]]).unwrap().state;
            s.step_index = 0;
        }
        assert!((speed(s.velocities[0]) - 1.0).abs() < 1e-12);

        // a weak gain settles at the closed-form limit gain*dt/damping
        let weak = WorldConfig {
            accel_gain: 1.0,
            ..WorldConfig::single_agent()
        };
        let mut s = weak.reset(&mut ChaCha8Rng::seed_from_u64(0)).0;
        for _ in 0..200 {
            s = weak.step(&s, &[[1.0, 0.0]]).unwrap().state;
            s.step_index = 0;
        }
        assert!((speed(s.velocities[0]) - 0.4).abs() < 1e-12);
    }

    #[test]
    fn overlapping_agents_separate() {
        let c = WorldConfig {
            n_agents: 2,
            max_speed: vec![1.0, 1.0],
            ..WorldConfig::default()
        };
        let s = WorldState {
            positions: vec![[0.0, 0.0], [0.1, 0.05]],
            velocities: vec![[0.0; 2]; 2],
            step_index: 0,
        };
        let gap = |s: &WorldState| (s.positions[0][0] - s.positions[1][0]).hypot(s.positions[0][1] - s.positions[1][1]);
        let next = c.step(&s, &[[0.0; 2]; 2]).unwrap().state;
        assert!(gap(&next) > gap(&s));
        // coincident bodies still get pushed apart
        let s = WorldState {
            positions: vec![[0.3, 0.3], [0.3, 0.3]],
            ..s
        };
        let next = c.step(&s, &[[0.0; 2]; 2]).unwrap().state;
        assert!(gap(&next) > 0.0);
    }

    #[test]
    fn hindered_agent_speed_clamp() {
        let c = WorldConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (mut s, _) = c.reset(&mut rng);
        for _ in 0..c.episode_length {
            let actions: Vec<Vec2> = (0..3).map(|_| [rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)]).collect();
            let out = c.step(&s, &actions).unwrap();
            for i in 0..3 {
                assert!(speed(out.state.velocities[i]) <= c.max_speed[i] + 1e-9);
            }
            let dx = out.state.positions[2][0] - s.positions[2][0];
            let dy = out.state.positions[2][1] - s.positions[2][1];
            assert!(dx.hypot(dy) <= c.max_speed[2] * c.dt + 1e-12);
            s = out.state;
        }
    }

    #[test]
    fn done_on_last_step() {
        let c = WorldConfig::default();
        let (mut s, _) = c.reset(&mut ChaCha8Rng::seed_from_u64(1));
        for t in 0..c.episode_length {
            let out = c.step(&s, &[[0.0; 2]; 3]).unwrap();
            assert_eq!(out.done, t + 1 == c.episode_length);
            s = out.state;
        }
    }

    #[test]
    fn step_rejects_bad_actions() {
        let c = WorldConfig::default();
        let (s, _) = c.reset(&mut ChaCha8Rng::seed_from_u64(1));
        assert!(c.step(&s, &[[0.0; 2]; 2]).is_err());
        assert!(c.step(&s, &[[f64::NAN, 0.0], [0.0; 2], [0.0; 2]]).is_err());
    }

    #[test]
    fn damping_dissipates_energy() {
        let c = WorldConfig::default();
        let mut s = WorldState {
            positions: vec![[-0.9, -0.9], [0.9, 0.9], [0.9, -0.9]],
            velocities: vec![[0.5, 0.2], [-0.3, 0.1], [0.1, 0.1]],
            step_index: 0,
        };
        let energy = |s: &WorldState| s.velocities.iter().map(|v| v[0] * v[0] + v[1] * v[1]).sum::<f64>();
        for _ in 0..10 {
            let next = c.step(&s, &[[0.0; 2]; 3]).unwrap().state;
            assert!(energy(&next) <= energy(&s));
            s = next;
        }
    }

    #[test]
    fn observation_layout() {
        let c = WorldConfig {
            landmark_positions: vec![[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0]],
            ..WorldConfig::default()
        };
        let s = WorldState {
            positions: vec![[0.0, 0.0], [0.5, 0.5], [-0.5, 0.25]],
            velocities: vec![[0.1, -0.1], [0.0; 2], [0.0; 2]],
            step_index: 0,
        };
        let o = c.observe(&s);
        assert_eq!(o[0].len(), 14);
        assert_eq!(&o[0][..4], &[0.1, -0.1, 0.0, 0.0]);
        assert_eq!(&o[0][4..6], &[1.0, 0.0]);
        assert_eq!(&o[0][10..14], &[0.5, 0.5, -0.5, 0.25]);
        assert_eq!(&o[1][10..14], &[-0.5, -0.5, -1.0, -0.25]);

        let same = WorldState {
            positions: vec![[0.2, 0.2]; 3],
            ..s.clone()
        };
        assert!(c.observe(&same).iter().all(|o| o[10..].iter().all(|&x| x == 0.0)));
    }

    #[test]
    fn observation_translation() {
        let c = WorldConfig::default();
        let (s, obs) = c.reset(&mut ChaCha8Rng::seed_from_u64(5));
        let shift = [0.25, -0.5];
        let moved_cfg = WorldConfig {
            landmark_positions: c.landmark_positions.iter().map(|l| [l[0] + shift[0], l[1] + shift[1]]).collect(),
            ..c.clone()
        };
        let moved = WorldState {
            positions: s.positions.iter().map(|p| [p[0] + shift[0], p[1] + shift[1]]).collect(),
            ..s
        };
        let obs2 = moved_cfg.observe(&moved);
        for (a, b) in obs.iter().zip(&obs2) {
            assert!((b[2] - a[2] - shift[0]).abs() < 1e-12);
            assert!((b[3] - a[3] - shift[1]).abs() < 1e-12);
            for k in 4..a.len() {
                assert!((a[k] - b[k]).abs() < 1e-12);
            }
        }
    }
}
