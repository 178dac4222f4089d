use rand::Rng;

use crate::env::Vec2;
use crate::error::{Error, Result};

/// One environment step as seen by the learners. Rewards are the
/// relational rewards, already scalarized through the network.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub joint_obs: Vec<Vec<f64>>,
    pub joint_actions: Vec<Vec2>,
    pub relational_rewards: Vec<f64>,
    pub next_joint_obs: Vec<Vec<f64>>,
    pub done: bool,
}

/// Fixed-capacity ring buffer of transitions, stored as flat rows
/// `[obs | actions | rewards | next_obs | done]`.
#[derive(Debug, Clone)]
pub struct ReplayBuffer {
    capacity: usize,
    n_agents: usize,
    obs_dim: usize,
    data: Vec<f64>,
    len: usize,
    head: usize,
}

/// Row-major minibatch assembled from sampled transitions.
#[derive(Debug, Clone)]
pub struct Batch {
    pub size: usize,
    pub n_agents: usize,
    pub obs_dim: usize,
    /// `size × (n_agents·obs_dim)`
    pub joint_obs: Vec<f64>,
    /// `size × (n_agents·2)`
    pub joint_actions: Vec<f64>,
    /// `size × n_agents`
    pub rewards: Vec<f64>,
    pub next_joint_obs: Vec<f64>,
    /// 1.0 for terminal transitions
    pub done: Vec<f64>,
}

impl Batch {
    /// Observations of agent `i` alone, `size × obs_dim`.
    pub fn agent_obs(&self, joint: &[f64], i: usize) -> Vec<f64> {
        let w = self.n_agents * self.obs_dim;
        joint
            .chunks_exact(w)
            .flat_map(|row| &row[i * self.obs_dim..(i + 1) * self.obs_dim])
            .copied()
            .collect()
    }

    pub fn reward(&self, row: usize, agent: usize) -> f64 {
        self.rewards[row * self.n_agents + agent]
    }
}

impl ReplayBuffer {
    pub fn new(capacity: usize, n_agents: usize, obs_dim: usize) -> Self {
        Self {
            capacity,
            n_agents,
            obs_dim,
            data: Vec::new(),
            len: 0,
            head: 0,
        }
    }

    fn row_width(&self) -> usize {
        let n = self.n_agents;
        2 * n * self.obs_dim + 2 * n + n + 1
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// Appends, overwriting the oldest entry when full.
    pub fn push(&mut self, t: &Transition) -> Result<()> {
        let n = self.n_agents;
        let shape_ok = t.joint_obs.len() == n
            && t.next_joint_obs.len() == n
            && t.joint_actions.len() == n
            && t.relational_rewards.len() == n
            && t.joint_obs.iter().chain(&t.next_joint_obs).all(|o| o.len() == self.obs_dim);
        if !shape_ok {
            return Err(Error::Shape("transition does not match buffer layout".into()));
        }
        if t.relational_rewards.iter().any(|r| !r.is_finite()) {
            return Err(Error::NonFinite("transition reward"));
        }
        if self.capacity == 0 {
            return Ok(());
        }
        let mut row = Vec::with_capacity(self.row_width());
        t.joint_obs.iter().for_each(|o| row.extend_from_slice(o));
        t.joint_actions.iter().for_each(|a| row.extend_from_slice(a));
        row.extend_from_slice(&t.relational_rewards);
        t.next_joint_obs.iter().for_each(|o| row.extend_from_slice(o));
        row.push(if t.done { 1.0 } else { 0.0 });

        let w = self.row_width();
        if self.len < self.capacity {
            self.data.extend_from_slice(&row);
            self.len += 1;
        } else {
            self.data[self.head * w..(self.head + 1) * w].copy_from_slice(&row);
        }
        self.head = (self.head + 1) % self.capacity;
        Ok(())
    }

    /// Transition at storage slot `index` (not insertion order once wrapped).
    pub fn get(&self, index: usize) -> Option<Transition> {
        if index >= self.len {
            return None;
        }
        let (n, od) = (self.n_agents, self.obs_dim);
        let w = self.row_width();
        let row = &self.data[index * w..(index + 1) * w];
        let (obs, rest) = row.split_at(n * od);
        let (act, rest) = rest.split_at(2 * n);
        let (rew, rest) = rest.split_at(n);
        let (next, done) = rest.split_at(n * od);
        Some(Transition {
            joint_obs: obs.chunks_exact(od).map(<[f64]>::to_vec).collect(),
            joint_actions: act.chunks_exact(2).map(|a| [a[0], a[1]]).collect(),
            relational_rewards: rew.to_vec(),
            next_joint_obs: next.chunks_exact(od).map(<[f64]>::to_vec).collect(),
            done: done[0] != 0.0,
        })
    }

    /// Uniform indices with replacement.
    pub fn sample_indices<R: Rng + ?Sized>(&self, batch: usize, rng: &mut R) -> Vec<usize> {
        (0..batch).map(|_| rng.gen_range(0..self.len)).collect()
    }

    pub fn batch(&self, indices: &[usize]) -> Batch {
        let (n, od) = (self.n_agents, self.obs_dim);
        let w = self.row_width();
        let b = indices.len();
        let mut out = Batch {
            size: b,
            n_agents: n,
            obs_dim: od,
            joint_obs: Vec::with_capacity(b * n * od),
            joint_actions: Vec::with_capacity(b * 2 * n),
            rewards: Vec::with_capacity(b * n),
            next_joint_obs: Vec::with_capacity(b * n * od),
            done: Vec::with_capacity(b),
        };
        for &i in indices {
            let row = &self.data[i * w..(i + 1) * w];
            let (obs, rest) = row.split_at(n * od);
            let (act, rest) = rest.split_at(2 * n);
            let (rew, rest) = rest.split_at(n);
            let (next, done) = rest.split_at(n * od);
            out.joint_obs.extend_from_slice(obs);
            out.joint_actions.extend_from_slice(act);
            out.rewards.extend_from_slice(rew);
            out.next_joint_obs.extend_from_slice(next);
            out.done.push(done[0]);
        }
        out
    }

    pub fn sample<R: Rng + ?Sized>(&self, batch: usize, rng: &mut R) -> Batch {
        self.batch(&self.sample_indices(batch, rng))
    }
}
