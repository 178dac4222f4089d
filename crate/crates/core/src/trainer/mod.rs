//! Decentralized actors with centralized critics, trained on relational
//! rewards.
//!
//! Every collected step is scalarized through the relational network before
//! it is stored, so the critics regress onto each agent's relational reward
//! rather than its individual one.

mod buffer;
mod learner;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use buffer::{Batch, ReplayBuffer, Transition};
pub use learner::{
    batch_actions, critic_input, select_actions, soft_update, AgentLearner, CriticReport, ExplorationNoise, ACTION_DIM,
};

use crate::env::{Vec2, WorldConfig, WorldState};
use crate::error::{Error, Result};
use crate::graph::RelationalNetwork;
use crate::neuro::AdamConfig;
use crate::scalarize::{relational_rewards, Scalarization};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseKind {
    #[default]
    Gaussian,
    OrnsteinUhlenbeck,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub gamma: f64,
    pub batch_size: usize,
    pub lr: f64,
    pub tau: f64,
    pub buffer_capacity: usize,
    /// Environment steps between update rounds.
    pub updates_every: usize,
    /// Episodes collected before any update.
    pub warmup_episodes: usize,
    pub noise: NoiseKind,
    pub noise_std_start: f64,
    pub noise_std_end: f64,
    pub ou_theta: f64,
    pub n_episodes: usize,
    /// Optional cap on total environment steps; training stops at the first
    /// episode boundary at or past it.
    pub max_env_steps: Option<usize>,
    pub hidden_sizes: Vec<usize>,
    /// Global L2 gradient-norm cap applied before each optimizer step.
    /// Written as a number, or `false` to disable clipping.
    #[serde(with = "clip_setting")]
    pub grad_clip: Option<f64>,
    /// Set per run from the experiment's seed list.
    #[serde(skip)]
    pub seed: u64,
}

mod clip_setting {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Setting {
        Flag(bool),
        Norm(f64),
    }

    pub fn serialize<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(c) => Setting::Norm(*c),
            None => Setting::Flag(false),
        }
        .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
        match Setting::deserialize(d)? {
            Setting::Norm(c) => Ok(Some(c)),
            Setting::Flag(false) => Ok(None),
            Setting::Flag(true) => Err(serde::de::Error::custom("grad_clip = true is ambiguous; give a norm or false")),
        }
    }
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            gamma: 0.99,
            batch_size: 2048,
            lr: 0.01,
            tau: 0.01,
            buffer_capacity: 1_000_000,
            updates_every: 100,
            warmup_episodes: 50,
            noise: NoiseKind::Gaussian,
            noise_std_start: 0.3,
            noise_std_end: 0.05,
            ou_theta: 0.15,
            n_episodes: 30_000,
            max_env_steps: None,
            hidden_sizes: vec![64, 64],
            grad_clip: Some(0.5),
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::TrainConfig(m));
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return bad(format!("gamma must lie in (0, 1), got {}", self.gamma));
        }
        if self.batch_size == 0 || self.batch_size > self.buffer_capacity {
            return bad(format!(
                "batch_size must be in 1..=buffer_capacity ({}), got {}",
                self.buffer_capacity, self.batch_size
            ));
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return bad(format!("lr must be positive, got {}", self.lr));
        }
        if !(self.tau > 0.0 && self.tau <= 1.0) {
            return bad(format!("tau must lie in (0, 1], got {}", self.tau));
        }
        if self.updates_every == 0 {
            return bad("updates_every must be positive".into());
        }
        if !(self.noise_std_start >= 0.0 && self.noise_std_end >= 0.0) {
            return bad("noise std must be non-negative".into());
        }
        if !(0.0..=1.0).contains(&self.ou_theta) {
            return bad("ou_theta must lie in [0, 1]".into());
        }
        if self.hidden_sizes.contains(&0) {
            return bad("hidden sizes must be positive".into());
        }
        if let Some(c) = self.grad_clip {
            if !(c > 0.0) {
                return bad("grad_clip must be positive".into());
            }
        }
        Ok(())
    }

    /// Linear decay from `noise_std_start` to `noise_std_end` over the run.
    pub fn noise_std(&self, episode: usize) -> f64 {
        let span = self.n_episodes.saturating_sub(1).max(1) as f64;
        let frac = (episode as f64 / span).min(1.0);
        self.noise_std_start + (self.noise_std_end - self.noise_std_start) * frac
    }

    pub fn adam(&self) -> AdamConfig {
        AdamConfig {
            learning_rate: self.lr,
            ..AdamConfig::default()
        }
    }

    fn exploration(&self, n_agents: usize) -> ExplorationNoise {
        match self.noise {
            NoiseKind::Gaussian => ExplorationNoise::Gaussian,
            NoiseKind::OrnsteinUhlenbeck => ExplorationNoise::OrnsteinUhlenbeck {
                theta: self.ou_theta,
                state: vec![[0.0; 2]; n_agents],
            },
        }
    }
}

/// Independent random streams derived from one run seed.
#[derive(Debug, Clone, Copy)]
pub enum Stream {
    Init = 0,
    TrainEnv = 1,
    Exploration = 2,
    Replay = 3,
    Eval = 4,
}

pub fn stream_rng(seed: u64, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream as u64);
    rng
}

/// A live environment instance.
#[derive(Debug, Clone)]
pub struct Episode {
    pub config: WorldConfig,
    pub state: WorldState,
    pub obs: Vec<Vec<f64>>,
    pub done: bool,
}

impl Episode {
    pub fn start<R: rand::Rng + ?Sized>(config: &WorldConfig, rng: &mut R) -> Self {
        let (state, obs) = config.reset(rng);
        Self {
            config: config.clone(),
            state,
            obs,
            done: false,
        }
    }
}

/// Everything one collected step produced.
#[derive(Debug, Clone)]
pub struct Collected {
    pub transition: Transition,
    pub individual_rewards: Vec<f64>,
    pub state: WorldState,
}

/// Steps `episode` with noisy policy actions, scalarizes the individual
/// rewards through `net` and stores the transition.
#[allow(clippy::too_many_arguments)]
pub fn collect_step<R: rand::Rng + ?Sized>(
    episode: &mut Episode,
    learners: &[AgentLearner],
    net: &RelationalNetwork,
    method: Scalarization,
    buffer: &mut ReplayBuffer,
    noise: &mut ExplorationNoise,
    noise_std: f64,
    rng: &mut R,
) -> Result<Collected> {
    if episode.done {
        return Err(Error::WorldConfig("episode already finished".into()));
    }
    let actions = select_actions(learners, &episode.obs, noise, noise_std, rng)?;
    let out = episode.config.step(&episode.state, &actions)?;
    let next_obs = episode.config.observe(&out.state);
    let transition = Transition {
        joint_obs: std::mem::replace(&mut episode.obs, next_obs.clone()),
        joint_actions: actions,
        relational_rewards: relational_rewards(&out.rewards, net, method)?,
        next_joint_obs: next_obs,
        done: out.done,
    };
    buffer.push(&transition)?;
    episode.state = out.state.clone();
    episode.done = out.done;
    Ok(Collected {
        transition,
        individual_rewards: out.rewards,
        state: out.state,
    })
}

/// Per-episode training record.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeMetrics {
    pub episode: usize,
    pub individual: Vec<f64>,
    pub relational: Vec<f64>,
    /// Mean critic loss per agent over the episode's update rounds (0 if none).
    pub critic_loss: Vec<f64>,
    pub updates: usize,
    pub noise_std: f64,
}

pub struct TrainOutcome {
    pub learners: Vec<AgentLearner>,
    pub metrics: Vec<EpisodeMetrics>,
    pub env_steps: usize,
}

pub fn init_learners(config: &TrainConfig, world: &WorldConfig) -> Result<Vec<AgentLearner>> {
    let mut rng = stream_rng(config.seed, Stream::Init);
    (0..world.n_agents)
        .map(|_| AgentLearner::new(world.n_agents, world.obs_dim(), &config.hidden_sizes, config.adam(), &mut rng))
        .collect()
}

/// One update round: a shared minibatch, then critic, actor and target
/// updates for every agent. Returns the per-agent critic losses.
pub fn update_round(learners: &mut [AgentLearner], batch: &Batch, config: &TrainConfig) -> Result<Vec<f64>> {
    let target_actions = batch_actions(learners.iter().map(|l| &l.target_actor), batch, &batch.next_joint_obs)?;
    let losses = learners
        .iter_mut()
        .enumerate()
        .map(|(i, l)| Ok(l.critic_update(i, batch, &target_actions, config.gamma, config.grad_clip)?.loss))
        .collect::<Result<Vec<_>>>()?;
    // other agents' actions come from the live actors as they stand before
    // this round's policy steps
    let live = batch_actions(learners.iter().map(|l| &l.actor), batch, &batch.joint_obs)?;
    for (i, l) in learners.iter_mut().enumerate() {
        l.actor_update(i, batch, &live, config.grad_clip)?;
    }
    for l in learners.iter_mut() {
        l.soft_update_targets(config.tau)?;
    }
    Ok(losses)
}

/// Trains one agent team from scratch. `on_episode` sees every episode's
/// metrics as soon as the episode ends.
pub fn train(
    config: &TrainConfig,
    world: &WorldConfig,
    net: &RelationalNetwork,
    method: Scalarization,
    mut on_episode: impl FnMut(&EpisodeMetrics),
) -> Result<TrainOutcome> {
    config.validate()?;
    world.validate()?;
    if net.n_agents() != world.n_agents {
        return Err(Error::LengthMismatch {
            context: "relational network vs world agents",
            left: net.n_agents(),
            right: world.n_agents,
        });
    }
    let n = world.n_agents;
    let mut learners = init_learners(config, world)?;
    let mut env_rng = stream_rng(config.seed, Stream::TrainEnv);
    let mut noise_rng = stream_rng(config.seed, Stream::Exploration);
    let mut replay_rng = stream_rng(config.seed, Stream::Replay);
    let mut buffer = ReplayBuffer::new(config.buffer_capacity, n, world.obs_dim());
    let mut noise = config.exploration(n);
    let mut metrics = Vec::with_capacity(config.n_episodes);
    let mut env_steps = 0usize;

    for ep in 0..config.n_episodes {
        if config.max_env_steps.is_some_and(|cap| env_steps >= cap) {
            break;
        }
        let noise_std = config.noise_std(ep);
        let mut episode = Episode::start(world, &mut env_rng);
        noise.reset();
        let mut record = EpisodeMetrics {
            episode: ep,
            individual: vec![0.0; n],
            relational: vec![0.0; n],
            critic_loss: vec![0.0; n],
            updates: 0,
            noise_std,
        };
        while !episode.done {
            let c = collect_step(&mut episode, &learners, net, method, &mut buffer, &mut noise, noise_std, &mut noise_rng)?;
            for i in 0..n {
                record.individual[i] += c.individual_rewards[i];
                record.relational[i] += c.transition.relational_rewards[i];
            }
            env_steps += 1;
            let ready = ep >= config.warmup_episodes && buffer.len() >= config.batch_size;
            if ready && env_steps.is_multiple_of(config.updates_every) {
                let batch = buffer.sample(config.batch_size, &mut replay_rng);
                let losses = update_round(&mut learners, &batch, config).map_err(|e| Error::Diverged {
                    episode: ep,
                    what: e.to_string(),
                })?;
                record.updates += 1;
                record.critic_loss.iter_mut().zip(&losses).for_each(|(acc, l)| *acc += l);
            }
        }
        if record.updates > 0 {
            let k = record.updates as f64;
            record.critic_loss.iter_mut().for_each(|l| *l /= k);
        }
        on_episode(&record);
        metrics.push(record);
    }
    Ok(TrainOutcome {
        learners,
        metrics,
        env_steps,
    })
}

/// One step of a recorded evaluation episode.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceStep {
    pub positions: Vec<Vec2>,
    pub velocities: Vec<Vec2>,
    pub actions: Vec<Vec2>,
    pub rewards: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    /// Per-episode summed individual rewards, one row per episode.
    pub individual: Vec<Vec<f64>>,
    pub relational: Vec<Vec<f64>>,
    pub mean_individual: Vec<f64>,
    pub mean_relational: Vec<f64>,
    pub traces: Vec<Vec<TraceStep>>,
}

/// Noise-free rollouts of the current policies. The first `n_traces`
/// episodes are recorded step by step.
pub fn evaluate<R: rand::Rng + ?Sized>(
    learners: &[AgentLearner],
    world: &WorldConfig,
    net: &RelationalNetwork,
    method: Scalarization,
    n_episodes: usize,
    n_traces: usize,
    rng: &mut R,
) -> Result<EvalReport> {
    let n = world.n_agents;
    let mut report = EvalReport {
        individual: Vec::with_capacity(n_episodes),
        relational: Vec::with_capacity(n_episodes),
        mean_individual: vec![0.0; n],
        mean_relational: vec![0.0; n],
        traces: Vec::new(),
    };
    let mut noise = ExplorationNoise::Gaussian;
    for ep in 0..n_episodes {
        let (mut state, mut obs) = world.reset(rng);
        let mut ind = vec![0.0; n];
        let mut rel = vec![0.0; n];
        let mut trace = Vec::new();
        loop {
            let actions = select_actions(learners, &obs, &mut noise, 0.0, rng)?;
            let out = world.step(&state, &actions)?;
            let shared = relational_rewards(&out.rewards, net, method)?;
            for i in 0..n {
                ind[i] += out.rewards[i];
                rel[i] += shared[i];
            }
            if ep < n_traces {
                trace.push(TraceStep {
                    positions: out.state.positions.clone(),
                    velocities: out.state.velocities.clone(),
                    actions,
                    rewards: out.rewards,
                });
            }
            obs = world.observe(&out.state);
            state = out.state;
            if out.done {
                break;
            }
        }
        if ep < n_traces {
            report.traces.push(trace);
        }
        report.individual.push(ind);
        report.relational.push(rel);
    }
    if n_episodes > 0 {
        report.mean_individual = column_means(&report.individual, n);
        report.mean_relational = column_means(&report.relational, n);
    }
    Ok(report)
}

pub fn column_means(rows: &[Vec<f64>], n: usize) -> Vec<f64> {
    let mut sums = vec![0.0; n];
    for r in rows {
        sums.iter_mut().zip(r).for_each(|(s, v)| *s += v);
    }
    sums.iter().map(|s| s / rows.len() as f64).collect()
}
