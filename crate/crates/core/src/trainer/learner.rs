use rand::Rng;
use rand_distr::StandardNormal;

use super::buffer::Batch;
use crate::env::Vec2;
use crate::error::{Error, Result};
use crate::neuro::{Activation, Adam, AdamConfig, Gradients, Mlp};

pub const ACTION_DIM: usize = 2;

/// Actor, centralized critic and their slowly tracking targets for one
/// agent.
#[derive(Debug, Clone)]
pub struct AgentLearner {
    pub actor: Mlp,
    pub critic: Mlp,
    pub target_actor: Mlp,
    pub target_critic: Mlp,
    pub actor_opt: Adam,
    pub critic_opt: Adam,
}

/// Outcome of one critic regression step.
#[derive(Debug, Clone)]
pub struct CriticReport {
    /// Mean squared TD error before the update.
    pub loss: f64,
    pub targets: Vec<f64>,
}

impl AgentLearner {
    pub fn new<R: Rng + ?Sized>(n_agents: usize, obs_dim: usize, hidden: &[usize], adam: AdamConfig, rng: &mut R) -> Result<Self> {
        let mut actor_sizes = vec![obs_dim];
        actor_sizes.extend_from_slice(hidden);
        actor_sizes.push(ACTION_DIM);
        let mut critic_sizes = vec![n_agents * (obs_dim + ACTION_DIM)];
        critic_sizes.extend_from_slice(hidden);
        critic_sizes.push(1);
        let actor = Mlp::new(&actor_sizes, Activation::Relu, Activation::Tanh, rng)?;
        let critic = Mlp::new(&critic_sizes, Activation::Relu, Activation::Identity, rng)?;
        Ok(Self::from_networks(actor, critic, adam))
    }

    pub fn from_networks(actor: Mlp, critic: Mlp, adam: AdamConfig) -> Self {
        Self {
            actor_opt: Adam::new(&actor, adam),
            critic_opt: Adam::new(&critic, adam),
            target_actor: actor.clone(),
            target_critic: critic.clone(),
            actor,
            critic,
        }
    }

    /// Bootstrapped regression targets `r̄_i + γ(1 − done)·Q'_i(o', a')`.
    pub fn td_targets(&self, agent: usize, batch: &Batch, target_actions: &[f64], gamma: f64) -> Result<Vec<f64>> {
        let input = critic_input(batch, &batch.next_joint_obs, target_actions);
        let next_q = self.target_critic.forward_batch(&input, batch.size)?;
        Ok((0..batch.size)
            .map(|b| batch.reward(b, agent) + gamma * (1.0 - batch.done[b]) * next_q.output()[b])
            .collect())
    }

    /// Mean squared TD error and its gradient with respect to the critic.
    pub fn critic_gradient(&self, agent: usize, batch: &Batch, target_actions: &[f64], gamma: f64) -> Result<(CriticReport, Gradients)> {
        if batch.size == 0 {
            return Err(Error::TrainConfig("empty batch".into()));
        }
        let targets = self.td_targets(agent, batch, target_actions, gamma)?;
        let input = critic_input(batch, &batch.joint_obs, &batch.joint_actions);
        let cache = self.critic.forward_batch(&input, batch.size)?;
        let n = batch.size as f64;
        let residual: Vec<f64> = cache.output().iter().zip(&targets).map(|(q, y)| q - y).collect();
        let loss = residual.iter().map(|r| r * r).sum::<f64>() / n;
        if !loss.is_finite() {
            return Err(Error::NonFinite("critic loss"));
        }
        let upstream: Vec<f64> = residual.iter().map(|r| 2.0 * r / n).collect();
        let mut grads = Gradients::zeros_like(&self.critic);
        self.critic.backward_batch(&cache, &upstream, Some(&mut grads), false)?;
        Ok((CriticReport { loss, targets }, grads))
    }

    /// Regresses `Q_i(o, a)` onto the TD targets with one optimizer step.
    pub fn critic_update(&mut self, agent: usize, batch: &Batch, target_actions: &[f64], gamma: f64, grad_clip: Option<f64>) -> Result<CriticReport> {
        let (report, mut grads) = self.critic_gradient(agent, batch, target_actions, gamma)?;
        if let Some(c) = grad_clip {
            grads.clip_norm(c);
        }
        self.critic_opt.step(&mut self.critic, &grads)?;
        Ok(report)
    }

    /// Mean `Q_i` with the agent's own action slot replaced by its actor's
    /// output, and the gradient of `-mean Q_i` with respect to the actor.
    pub fn actor_gradient(&self, agent: usize, batch: &Batch, live_actions: &[f64]) -> Result<(f64, Gradients)> {
        if batch.size == 0 {
            return Err(Error::TrainConfig("empty batch".into()));
        }
        let n_act = batch.n_agents * ACTION_DIM;
        if live_actions.len() != batch.size * n_act {
            return Err(Error::LengthMismatch {
                context: "live actions",
                left: live_actions.len(),
                right: batch.size * n_act,
            });
        }
        let obs = batch.agent_obs(&batch.joint_obs, agent);
        let actor_cache = self.actor.forward_batch(&obs, batch.size)?;
        let mut actions = live_actions.to_vec();
        let slot = agent * ACTION_DIM;
        for (row, own) in actions.chunks_exact_mut(n_act).zip(actor_cache.output().chunks_exact(ACTION_DIM)) {
            row[slot..slot + ACTION_DIM].copy_from_slice(own);
        }
        let input = critic_input(batch, &batch.joint_obs, &actions);
        let q_cache = self.critic.forward_batch(&input, batch.size)?;
        let n = batch.size as f64;
        let objective = q_cache.output().iter().sum::<f64>() / n;

        let upstream = vec![-1.0 / n; batch.size];
        let dx = self.critic.backward_batch(&q_cache, &upstream, None, true)?.expect("input gradient");
        let width = self.critic.input_dim();
        let act_offset = batch.n_agents * batch.obs_dim + slot;
        let d_action: Vec<f64> = dx
            .chunks_exact(width)
            .flat_map(|row| &row[act_offset..act_offset + ACTION_DIM])
            .copied()
            .collect();
        let mut grads = Gradients::zeros_like(&self.actor);
        self.actor.backward_batch(&actor_cache, &d_action, Some(&mut grads), false)?;
        Ok((objective, grads))
    }

    /// Deterministic policy-gradient step: ascends `Q_i` through the agent's
    /// own action slot while the other agents' actions stay at
    /// `live_actions`. Returns the mean Q before the update.
    pub fn actor_update(&mut self, agent: usize, batch: &Batch, live_actions: &[f64], grad_clip: Option<f64>) -> Result<f64> {
        let (objective, mut grads) = self.actor_gradient(agent, batch, live_actions)?;
        if let Some(c) = grad_clip {
            grads.clip_norm(c);
        }
        self.actor_opt.step(&mut self.actor, &grads)?;
        Ok(objective)
    }

    pub fn soft_update_targets(&mut self, tau: f64) -> Result<()> {
        soft_update(&mut self.target_actor, &self.actor, tau)?;
        soft_update(&mut self.target_critic, &self.critic, tau)
    }
}

/// `target ← tau·live + (1 − tau)·target`.
pub fn soft_update(target: &mut Mlp, live: &Mlp, tau: f64) -> Result<()> {
    if !target.same_shape(live) {
        return Err(Error::Shape("soft update between differently shaped networks".into()));
    }
    if !(tau > 0.0 && tau <= 1.0) {
        return Err(Error::TrainConfig(format!("tau must lie in (0, 1], got {tau}")));
    }
    if tau == 1.0 {
        target.params_mut().copy_from_slice(live.params());
        return Ok(());
    }
    // equal to tau·live + (1 − tau)·target, and exact when the two agree
    for (t, &l) in target.params_mut().iter_mut().zip(live.params()) {
        *t += tau * (l - *t);
    }
    Ok(())
}

/// Rows of `[joint_obs | joint_actions]`.
pub fn critic_input(batch: &Batch, joint_obs: &[f64], joint_actions: &[f64]) -> Vec<f64> {
    let w_obs = batch.n_agents * batch.obs_dim;
    let w_act = batch.n_agents * ACTION_DIM;
    let mut out = Vec::with_capacity(batch.size * (w_obs + w_act));
    for (o, a) in joint_obs.chunks_exact(w_obs).zip(joint_actions.chunks_exact(w_act)) {
        out.extend_from_slice(o);
        out.extend_from_slice(a);
    }
    out
}

/// Joint actions of the chosen actors on the batch's observations,
/// `size × (n_agents·2)`.
pub fn batch_actions<'a>(actors: impl Iterator<Item = &'a Mlp>, batch: &Batch, joint_obs: &[f64]) -> Result<Vec<f64>> {
    let n_act = batch.n_agents * ACTION_DIM;
    let mut out = vec![0.0; batch.size * n_act];
    for (i, actor) in actors.enumerate() {
        let obs = batch.agent_obs(joint_obs, i);
        let cache = actor.forward_batch(&obs, batch.size)?;
        for (row, a) in out.chunks_exact_mut(n_act).zip(cache.output().chunks_exact(ACTION_DIM)) {
            row[i * ACTION_DIM..(i + 1) * ACTION_DIM].copy_from_slice(a);
        }
    }
    Ok(out)
}

/// Exploration noise added to actor outputs during collection.
#[derive(Debug, Clone)]
pub enum ExplorationNoise {
    Gaussian,
    /// Mean-reverting noise `x ← x − θx + σ·ξ`, reset every episode.
    OrnsteinUhlenbeck { theta: f64, state: Vec<Vec2> },
}

impl ExplorationNoise {
    pub fn reset(&mut self) {
        if let ExplorationNoise::OrnsteinUhlenbeck { state, .. } = self {
            state.iter_mut().for_each(|s| *s = [0.0; 2]);
        }
    }

    fn sample<R: Rng + ?Sized>(&mut self, agent: usize, std: f64, rng: &mut R) -> Vec2 {
        let mut draw = || -> f64 { rng.sample::<f64, _>(StandardNormal) * std };
        match self {
            ExplorationNoise::Gaussian => [draw(), draw()],
            ExplorationNoise::OrnsteinUhlenbeck { theta, state } => {
                let s = &mut state[agent];
                s[0] += -*theta * s[0] + draw();
                s[1] += -*theta * s[1] + draw();
                *s
            }
        }
    }
}

/// `clip(μ_i(o_i) + ε_i, −1, 1)` for every agent. With `noise_std == 0` no
/// random numbers are drawn and the actor outputs are returned unchanged.
pub fn select_actions<R: Rng + ?Sized>(
    learners: &[AgentLearner],
    joint_obs: &[Vec<f64>],
    noise: &mut ExplorationNoise,
    noise_std: f64,
    rng: &mut R,
) -> Result<Vec<Vec2>> {
    if joint_obs.len() != learners.len() {
        return Err(Error::LengthMismatch {
            context: "joint observation",
            left: joint_obs.len(),
            right: learners.len(),
        });
    }
    learners
        .iter()
        .zip(joint_obs)
        .enumerate()
        .map(|(i, (l, o))| {
            let out = l.actor.forward(o)?;
            if out.iter().any(|a| !a.is_finite()) {
                return Err(Error::NonFinite("actor output"));
            }
            let mut a = [out[0], out[1]];
            if noise_std > 0.0 {
                let e = noise.sample(i, noise_std, rng);
                a = [(a[0] + e[0]).clamp(-1.0, 1.0), (a[1] + e[1]).clamp(-1.0, 1.0)];
            }
            Ok(a)
        })
        .collect()
}
