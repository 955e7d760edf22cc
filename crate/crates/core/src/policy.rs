//! Masked softmax policy over customers, trained with REINFORCE.
//!
//! The environment does no feasibility checking at all: any unvisited
//! customer is a legal action, and every completed rollout is a
//! permutation whose quality comes back as the split reward. The policy
//! is linear in a fixed feature vector per candidate, which keeps the
//! gradient analytic:
//!
//! ```text
//! grad_w log pi(a) = temperature * (phi(a) - E_softmax[phi])
//! ```
//!
//! Updates use a per-instance rollout baseline: the advantage of a
//! rollout is its reward minus the mean reward of its instance's
//! rollouts, so shifting all rewards by a constant cancels exactly.

use crate::files::to_json_string;
use crate::instance::{generate_instance, Instance, ScaleProfile, VariantFlags};
use crate::split::{split_reward, ConstraintSemantics, GiantTour, TourError};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PolicyError {
    #[error("no unvisited customer to sample")]
    EmptyMask,
    #[error("customer {customer} was already visited")]
    AlreadyVisited { customer: usize },
    #[error("bad configuration: {0}")]
    Config(String),
    #[error("gradient is not finite")]
    NonFiniteGradient,
    #[error("bad parameter file: {0}")]
    ParamsFile(String),
    #[error(transparent)]
    Tour(#[from] TourError),
    #[error(transparent)]
    Generate(#[from] crate::instance::GenerateError),
}

/// Construction state: visited-set mask plus the running load history.
///
/// `n0` and `n1` accumulate delivered and picked-up quantity over the
/// whole rollout; they are the only memory the policy has of how the
/// eventual split might cut the sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvState {
    pub n0: i64,
    pub n1: i64,
    /// Last visited node; 0 (depot) before the first step.
    pub current: usize,
    /// `mask[c]` is true while customer c is unvisited; index 0 unused.
    pub mask: Vec<bool>,
    pub flags: VariantFlags,
    pub step: usize,
}

impl EnvState {
    pub fn reset(inst: &Instance) -> Self {
        let mut mask = vec![true; inst.n + 1];
        mask[0] = false;
        EnvState {
            n0: 0,
            n1: 0,
            current: 0,
            mask,
            flags: inst.flags,
            step: 0,
        }
    }

    pub fn unvisited(&self, inst: &Instance) -> usize {
        inst.n - self.step
    }

    /// Visit `action`: clear its mask bit and accumulate its demand.
    pub fn apply(&mut self, inst: &Instance, action: usize) -> Result<(), PolicyError> {
        if action == 0 || action > inst.n || !self.mask[action] {
            return Err(PolicyError::AlreadyVisited { customer: action });
        }
        self.mask[action] = false;
        self.current = action;
        let q = inst.demand[action];
        self.n0 += q.max(0);
        self.n1 += (-q).max(0);
        self.step += 1;
        Ok(())
    }
}

pub const FEATURE_DIM: usize = 15;

pub const FEATURE_NAMES: [&str; FEATURE_DIM] = [
    "bias",
    "dist_from_current",
    "dist_to_depot",
    "demand_over_capacity",
    "delivered_mod_capacity",
    "picked_mod_capacity",
    "is_pickup",
    "tw_slack",
    "tw_start",
    "remaining_fraction",
    "flag_open",
    "flag_backhaul",
    "flag_dist_limit",
    "flag_time_window",
    "dist_times_load",
];

/// Candidate features, in [`FEATURE_NAMES`] order. All entries are
/// finite and bounded by small constants on generated instances.
pub fn featurize(inst: &Instance, state: &EnvState, candidate: usize) -> [f64; FEATURE_DIM] {
    let capacity = inst.capacity as f64;
    let q = inst.demand[candidate] as f64;
    let dist_current = inst.dist(state.current, candidate);
    let dist_depot = inst.dist(candidate, 0);
    let delivered_mod = (state.n0 % inst.capacity) as f64 / capacity;
    let picked_mod = (state.n1 % inst.capacity) as f64 / capacity;
    let flag = |b: bool| if b { 1.0 } else { 0.0 };
    [
        1.0,
        dist_current,
        dist_depot,
        q / capacity,
        delivered_mod,
        picked_mod,
        flag(q < 0.0),
        (inst.tw_end[candidate] - inst.tw_start[candidate]) / inst.horizon,
        inst.tw_start[candidate] / inst.horizon,
        state.unvisited(inst) as f64 / inst.n as f64,
        flag(state.flags.open),
        flag(state.flags.backhaul),
        flag(state.flags.dist_limit),
        flag(state.flags.time_window),
        dist_current * delivered_mod,
    ]
}

/// Weights of the linear scoring function plus the softmax temperature.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyParams {
    pub weights: Vec<f64>,
    pub temperature: f64,
}

impl PolicyParams {
    /// Zero weights: a uniform policy over unvisited customers.
    pub fn zeros() -> Self {
        PolicyParams {
            weights: vec![0.0; FEATURE_DIM],
            temperature: 1.0,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.weights.iter().all(|w| w.is_finite())
            && self.temperature.is_finite()
            && self.temperature > 0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleMode {
    Sample,
    Greedy,
}

struct StepSoftmax {
    /// (customer, features, logit) per unvisited candidate.
    candidates: Vec<(usize, [f64; FEATURE_DIM], f64)>,
    max_logit: f64,
    exp_sum: f64,
}

fn dot(w: &[f64], phi: &[f64; FEATURE_DIM]) -> f64 {
    w.iter().zip(phi.iter()).map(|(a, b)| a * b).sum()
}

fn step_softmax(inst: &Instance, state: &EnvState, params: &PolicyParams) -> Result<StepSoftmax, PolicyError> {
    let mut candidates = Vec::with_capacity(state.unvisited(inst));
    for c in 1..=inst.n {
        if state.mask[c] {
            let phi = featurize(inst, state, c);
            let logit = params.temperature * dot(&params.weights, &phi);
            candidates.push((c, phi, logit));
        }
    }
    if candidates.is_empty() {
        return Err(PolicyError::EmptyMask);
    }
    let max_logit = candidates.iter().map(|c| c.2).fold(f64::NEG_INFINITY, f64::max);
    let exp_sum: f64 = candidates.iter().map(|c| (c.2 - max_logit).exp()).sum();
    Ok(StepSoftmax { candidates, max_logit, exp_sum })
}

impl StepSoftmax {
    fn log_prob(&self, logit: f64) -> f64 {
        (logit - self.max_logit) - self.exp_sum.ln()
    }

    fn prob(&self, logit: f64) -> f64 {
        (logit - self.max_logit).exp() / self.exp_sum
    }

    fn pick<R: Rng>(&self, mode: SampleMode, rng: &mut R) -> (usize, f64) {
        match mode {
            SampleMode::Greedy => {
                // strict > keeps the lowest index on ties
                let mut best = 0usize;
                for i in 1..self.candidates.len() {
                    if self.candidates[i].2 > self.candidates[best].2 {
                        best = i;
                    }
                }
                let (customer, _, logit) = self.candidates[best];
                (customer, self.log_prob(logit))
            }
            SampleMode::Sample => {
                let target = rng.gen::<f64>() * self.exp_sum;
                let mut cumulative = 0.0;
                for &(customer, _, logit) in &self.candidates {
                    cumulative += (logit - self.max_logit).exp();
                    if target < cumulative {
                        return (customer, self.log_prob(logit));
                    }
                }
                let &(customer, _, logit) = self.candidates.last().unwrap();
                (customer, self.log_prob(logit))
            }
        }
    }
}

/// Choose the next customer. Visited customers have probability exactly
/// zero; greedy mode breaks ties by lowest customer index.
pub fn policy_sample<R: Rng>(
    inst: &Instance,
    state: &EnvState,
    params: &PolicyParams,
    mode: SampleMode,
    rng: &mut R,
) -> Result<(usize, f64), PolicyError> {
    Ok(step_softmax(inst, state, params)?.pick(mode, rng))
}

/// One completed construction episode.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub actions: Vec<usize>,
    pub log_probs: Vec<f64>,
    pub reward: f64,
}

impl Trajectory {
    pub fn tour(&self, n: usize) -> Result<GiantTour, TourError> {
        GiantTour::new(self.actions.clone(), n)
    }
}

/// Run the policy to completion and score the tour with the splitter.
pub fn rollout<R: Rng>(
    inst: &Instance,
    params: &PolicyParams,
    mode: SampleMode,
    sem: ConstraintSemantics,
    rng: &mut R,
) -> Result<Trajectory, PolicyError> {
    let mut state = EnvState::reset(inst);
    let mut actions = Vec::with_capacity(inst.n);
    let mut log_probs = Vec::with_capacity(inst.n);
    for _ in 0..inst.n {
        let (action, log_prob) = policy_sample(inst, &state, params, mode, rng)?;
        state.apply(inst, action)?;
        actions.push(action);
        log_probs.push(log_prob);
    }
    let tour = GiantTour::new(actions, inst.n)?;
    let reward = split_reward(inst, &tour, sem);
    Ok(Trajectory {
        actions: tour.into_order(),
        log_probs,
        reward,
    })
}

/// Reward minus the mean of its cohort, computed as the mean pairwise
/// difference so that identical rewards yield exactly zero and a common
/// shift of exactly representable rewards cancels bit for bit.
pub fn advantages(rewards: &[f64]) -> Vec<f64> {
    let k = rewards.len() as f64;
    rewards
        .iter()
        .map(|&r| rewards.iter().map(|&o| r - o).sum::<f64>() / k)
        .collect()
}

/// Sampled rollouts frozen for a gradient computation.
pub struct FrozenRollouts<'a> {
    pub instance: &'a Instance,
    pub trajectories: Vec<Trajectory>,
}

/// Sample `rollouts_per_instance` stochastic rollouts per instance.
pub fn sample_rollouts<'a, R: Rng>(
    instances: &'a [Instance],
    params: &PolicyParams,
    rollouts_per_instance: usize,
    sem: ConstraintSemantics,
    rng: &mut R,
) -> Result<Vec<FrozenRollouts<'a>>, PolicyError> {
    instances
        .iter()
        .map(|instance| {
            let trajectories = (0..rollouts_per_instance)
                .map(|_| rollout(instance, params, SampleMode::Sample, sem, rng))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(FrozenRollouts { instance, trajectories })
        })
        .collect()
}

/// Policy gradient of the expected reward over a frozen batch: the mean
/// over instances and rollouts of the advantage-weighted sum over steps
/// of the score function. The second component is the derivative with
/// respect to the temperature.
pub fn batch_gradient(
    batch: &[FrozenRollouts<'_>],
    params: &PolicyParams,
) -> Result<([f64; FEATURE_DIM], f64), PolicyError> {
    let mut grad = [0.0f64; FEATURE_DIM];
    let mut grad_temperature = 0.0f64;
    let instances = batch.len() as f64;
    for item in batch {
        let rewards: Vec<f64> = item.trajectories.iter().map(|t| t.reward).collect();
        let scale = instances * item.trajectories.len() as f64;
        for (trajectory, advantage) in item.trajectories.iter().zip(advantages(&rewards)) {
            let weight = advantage / scale;
            let mut state = EnvState::reset(item.instance);
            for &action in &trajectory.actions {
                let softmax = step_softmax(item.instance, &state, params)?;
                let mut expected_phi = [0.0f64; FEATURE_DIM];
                let mut expected_score = 0.0;
                let mut chosen: Option<(&[f64; FEATURE_DIM], f64)> = None;
                for (customer, phi, logit) in &softmax.candidates {
                    let p = softmax.prob(*logit);
                    for (e, v) in expected_phi.iter_mut().zip(phi.iter()) {
                        *e += p * v;
                    }
                    expected_score += p * (logit / params.temperature);
                    if *customer == action {
                        chosen = Some((phi, *logit));
                    }
                }
                let (phi, logit) = chosen.ok_or(PolicyError::AlreadyVisited { customer: action })?;
                for f in 0..FEATURE_DIM {
                    grad[f] += weight * params.temperature * (phi[f] - expected_phi[f]);
                }
                grad_temperature += weight * (logit / params.temperature - expected_score);
                state.apply(item.instance, action)?;
            }
        }
    }
    if !grad.iter().all(|g| g.is_finite()) || !grad_temperature.is_finite() {
        return Err(PolicyError::NonFiniteGradient);
    }
    Ok((grad, grad_temperature))
}

/// The scalar whose gradient `batch_gradient` computes: advantage-
/// weighted log-likelihood of the frozen actions, same normalization.
pub fn batch_surrogate(batch: &[FrozenRollouts<'_>], params: &PolicyParams) -> Result<f64, PolicyError> {
    let mut value = 0.0;
    let instances = batch.len() as f64;
    for item in batch {
        let rewards: Vec<f64> = item.trajectories.iter().map(|t| t.reward).collect();
        let scale = instances * item.trajectories.len() as f64;
        for (trajectory, advantage) in item.trajectories.iter().zip(advantages(&rewards)) {
            let weight = advantage / scale;
            let mut state = EnvState::reset(item.instance);
            for &action in &trajectory.actions {
                let softmax = step_softmax(item.instance, &state, params)?;
                let logit = softmax
                    .candidates
                    .iter()
                    .find(|(customer, _, _)| *customer == action)
                    .map(|(_, _, logit)| *logit)
                    .ok_or(PolicyError::AlreadyVisited { customer: action })?;
                value += weight * softmax.log_prob(logit);
                state.apply(item.instance, action)?;
            }
        }
    }
    Ok(value)
}

/// Step-decay learning rate: `initial * decay^k` after passing `k`
/// milestones.
#[derive(Debug, Clone, PartialEq)]
pub struct LrSchedule {
    pub initial: f64,
    pub decay: f64,
    pub milestones: Vec<usize>,
}

impl LrSchedule {
    pub fn constant(initial: f64) -> Self {
        LrSchedule { initial, decay: 1.0, milestones: Vec::new() }
    }

    pub fn at(&self, epoch: usize) -> f64 {
        let passed = self.milestones.iter().filter(|&&m| m <= epoch).count();
        self.initial * self.decay.powi(passed as i32)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub n: usize,
    pub flags: VariantFlags,
    pub profile: ScaleProfile,
    pub rollouts_per_instance: usize,
    pub batch_size: usize,
    pub epochs: usize,
    pub lr: LrSchedule,
    pub seed: u64,
    pub sem: ConstraintSemantics,
    pub eval_instances: usize,
    pub train_temperature: bool,
}

impl TrainConfig {
    /// Defaults sized for desk runs: batch 64, 8 rollouts per instance,
    /// lr 0.2 halved at 60% and 80% of the epochs.
    pub fn new(n: usize, flags: VariantFlags, epochs: usize, seed: u64) -> Self {
        TrainConfig {
            n,
            flags,
            profile: ScaleProfile::N50,
            rollouts_per_instance: 8,
            batch_size: 64,
            epochs,
            lr: LrSchedule {
                initial: 0.2,
                decay: 0.5,
                milestones: vec![epochs * 6 / 10, epochs * 8 / 10],
            },
            seed,
            sem: ConstraintSemantics::default(),
            eval_instances: 64,
            train_temperature: false,
        }
    }

    fn validate(&self) -> Result<(), PolicyError> {
        if self.n == 0 {
            return Err(PolicyError::Config("n must be positive".into()));
        }
        if self.rollouts_per_instance < 2 {
            return Err(PolicyError::Config(
                "rollouts_per_instance must be at least 2 for the rollout baseline".into(),
            ));
        }
        if self.batch_size == 0 {
            return Err(PolicyError::Config("batch_size must be positive".into()));
        }
        if self.eval_instances == 0 {
            return Err(PolicyError::Config("eval_instances must be positive".into()));
        }
        if !(self.lr.initial > 0.0 && self.lr.decay > 0.0) {
            return Err(PolicyError::Config("learning rate schedule must be positive".into()));
        }
        Ok(())
    }

    /// Stable fingerprint of the configuration, stored in parameter files.
    pub fn digest(&self) -> String {
        format!("{:016x}", fnv1a64(format!("{self:?}").as_bytes()))
    }
}

fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Independent sub-seed for (base, purpose tag, index).
pub fn derive_seed(base: u64, tag: u64, index: u64) -> u64 {
    splitmix64(splitmix64(base ^ tag.wrapping_mul(0x9e37_79b9_7f4a_7c15)).wrapping_add(index))
}

pub const SEED_TAG_TRAIN: u64 = 0x5452_4149;
pub const SEED_TAG_EVAL: u64 = 0x4556_414c;
pub const SEED_TAG_ROLLOUT: u64 = 0x524f_4c4c;

#[derive(Debug, Clone, Copy)]
pub struct BatchStats {
    pub mean_reward: f64,
    pub grad_norm: f64,
}

/// One REINFORCE ascent step on a batch of instances.
pub fn reinforce_update<R: Rng>(
    instances: &[Instance],
    params: &mut PolicyParams,
    cfg: &TrainConfig,
    lr: f64,
    rng: &mut R,
) -> Result<BatchStats, PolicyError> {
    cfg.validate()?;
    let batch = sample_rollouts(instances, params, cfg.rollouts_per_instance, cfg.sem, rng)?;
    let (grad, grad_temperature) = batch_gradient(&batch, params)?;
    let rollouts: usize = batch.iter().map(|b| b.trajectories.len()).sum();
    let mean_reward = batch
        .iter()
        .flat_map(|b| b.trajectories.iter().map(|t| t.reward))
        .sum::<f64>()
        / rollouts as f64;
    for (w, g) in params.weights.iter_mut().zip(grad.iter()) {
        *w += lr * g;
    }
    if cfg.train_temperature {
        params.temperature = (params.temperature + lr * grad_temperature).max(1e-3);
    }
    if !params.is_finite() {
        return Err(PolicyError::NonFiniteGradient);
    }
    let grad_norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
    Ok(BatchStats { mean_reward, grad_norm })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochStats {
    pub epoch: usize,
    /// Mean greedy split cost on the held-out evaluation set.
    pub mean_cost: f64,
    pub grad_norm: f64,
    pub train_mean_reward: f64,
}

/// Mean greedy split cost of `params` over `instances`. Infeasible
/// rollouts count at the sentinel cost.
pub fn evaluate_params(
    instances: &[Instance],
    params: &PolicyParams,
    sem: ConstraintSemantics,
) -> Result<f64, PolicyError> {
    let mut rng = ChaCha8Rng::seed_from_u64(0); // unused by greedy sampling
    let mut total = 0.0;
    for inst in instances {
        let trajectory = rollout(inst, params, SampleMode::Greedy, sem, &mut rng)?;
        total += -trajectory.reward;
    }
    Ok(total / instances.len() as f64)
}

/// Full training loop: fresh instances every batch, one update per
/// epoch, greedy evaluation on a fixed held-out set after each.
pub fn train(cfg: &TrainConfig) -> Result<(PolicyParams, Vec<EpochStats>), PolicyError> {
    cfg.validate()?;
    let eval_set: Vec<Instance> = (0..cfg.eval_instances)
        .map(|i| {
            generate_instance(cfg.n, cfg.flags, cfg.profile, derive_seed(cfg.seed, SEED_TAG_EVAL, i as u64))
        })
        .collect::<Result<_, _>>()?;
    let mut params = PolicyParams::zeros();
    let mut curve = Vec::with_capacity(cfg.epochs);
    for epoch in 0..cfg.epochs {
        let batch: Vec<Instance> = (0..cfg.batch_size)
            .map(|i| {
                let index = (epoch * cfg.batch_size + i) as u64;
                generate_instance(cfg.n, cfg.flags, cfg.profile, derive_seed(cfg.seed, SEED_TAG_TRAIN, index))
            })
            .collect::<Result<_, _>>()?;
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, SEED_TAG_ROLLOUT, epoch as u64));
        let stats = reinforce_update(&batch, &mut params, cfg, cfg.lr.at(epoch), &mut rng)?;
        let mean_cost = evaluate_params(&eval_set, &params, cfg.sem)?;
        curve.push(EpochStats {
            epoch,
            mean_cost,
            grad_norm: stats.grad_norm,
            train_mean_reward: stats.mean_reward,
        });
    }
    Ok((params, curve))
}

pub const PARAMS_FILE_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct ParamsFile {
    version: u32,
    feature_names: Vec<String>,
    weights: Vec<f64>,
    temperature: f64,
    train_config_digest: String,
}

pub fn serialize_params(params: &PolicyParams, train_config_digest: &str) -> String {
    to_json_string(&ParamsFile {
        version: PARAMS_FILE_VERSION,
        feature_names: FEATURE_NAMES.iter().map(|s| s.to_string()).collect(),
        weights: params.weights.clone(),
        temperature: params.temperature,
        train_config_digest: train_config_digest.to_string(),
    })
}

pub fn parse_params(text: &str) -> Result<(PolicyParams, String), PolicyError> {
    let file: ParamsFile =
        serde_json::from_str(text).map_err(|e| PolicyError::ParamsFile(e.to_string()))?;
    if file.version != PARAMS_FILE_VERSION {
        return Err(PolicyError::ParamsFile(format!("unsupported version {}", file.version)));
    }
    if file.feature_names != FEATURE_NAMES {
        return Err(PolicyError::ParamsFile("feature names do not match this build".into()));
    }
    if file.weights.len() != FEATURE_DIM {
        return Err(PolicyError::ParamsFile(format!("expected {FEATURE_DIM} weights")));
    }
    let params = PolicyParams { weights: file.weights, temperature: file.temperature };
    if !params.is_finite() {
        return Err(PolicyError::ParamsFile("weights and temperature must be finite and positive".into()));
    }
    Ok((params, file.train_config_digest))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::split::split;

    fn sem() -> ConstraintSemantics {
        ConstraintSemantics::default()
    }

    fn toy_instance(seed: u64) -> Instance {
        generate_instance(6, VariantFlags::cvrp(), ScaleProfile::N50, seed).unwrap()
    }

    #[test]
    fn reset_state_shape() {
        let inst = generate_instance(5, "OVRPB".parse().unwrap(), ScaleProfile::N50, 1).unwrap();
        let state = EnvState::reset(&inst);
        assert_eq!(state.mask.iter().filter(|&&m| m).count(), 5);
        assert_eq!((state.n0, state.n1), (0, 0));
        assert_eq!(state.current, 0);
        assert_eq!(state.flags, inst.flags);
    }

    #[test]
    fn step_accumulates_loads_by_sign() {
        let mut inst = toy_instance(2);
        inst.demand[1] = 5;
        inst.demand[2] = -3;
        let mut state = EnvState::reset(&inst);
        state.apply(&inst, 1).unwrap();
        assert_eq!((state.n0, state.n1), (5, 0));
        state.apply(&inst, 2).unwrap();
        assert_eq!((state.n0, state.n1), (5, 3));
        assert_eq!(state.current, 2);
        assert!(matches!(
            state.apply(&inst, 1),
            Err(PolicyError::AlreadyVisited { customer: 1 })
        ));
    }

    #[test]
    fn first_step_distance_features_agree() {
        let inst = Instance::basic(
            vec![[0.0, 0.0], [0.3, 0.4]],
            vec![0, 5],
            40,
            VariantFlags::cvrp(),
        );
        let state = EnvState::reset(&inst);
        let phi = featurize(&inst, &state, 1);
        assert_eq!(phi[1], phi[2]);
        assert!((phi[1] - 0.5).abs() < 1e-15);
        assert_eq!(phi[4], 0.0);
        assert_eq!(phi[5], 0.0);
        assert_eq!(phi[0], 1.0);
    }

    #[test]
    fn single_candidate_has_log_prob_zero() {
        let inst = toy_instance(3);
        let mut state = EnvState::reset(&inst);
        for c in 1..=5 {
            state.apply(&inst, c).unwrap();
        }
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let (action, log_prob) =
            policy_sample(&inst, &state, &PolicyParams::zeros(), SampleMode::Sample, &mut rng).unwrap();
        assert_eq!(action, 6);
        assert_eq!(log_prob, 0.0);
    }

    #[test]
    fn zero_weights_are_uniform() {
        let inst = toy_instance(4);
        let state = EnvState::reset(&inst);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (_, log_prob) =
            policy_sample(&inst, &state, &PolicyParams::zeros(), SampleMode::Sample, &mut rng).unwrap();
        assert_eq!(log_prob, -(6.0f64).ln());
    }

    #[test]
    fn sampling_frequencies_match_softmax() {
        let inst = toy_instance(5);
        let state = EnvState::reset(&inst);
        let mut params = PolicyParams::zeros();
        params.weights[1] = -2.0; // prefer near customers
        params.weights[3] = 1.0;
        let softmax = step_softmax(&inst, &state, &params).unwrap();
        let draws = 100_000usize;
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let mut counts = vec![0usize; inst.n + 1];
        for _ in 0..draws {
            let (action, _) = softmax.pick(SampleMode::Sample, &mut rng);
            counts[action] += 1;
        }
        for &(customer, _, logit) in &softmax.candidates {
            let p = softmax.prob(logit);
            let sigma = (draws as f64 * p * (1.0 - p)).sqrt();
            let observed = counts[customer] as f64;
            assert!(
                (observed - draws as f64 * p).abs() <= 3.0 * sigma.max(1.0),
                "customer {customer}: observed {observed}, expected {}",
                draws as f64 * p
            );
        }
    }

    #[test]
    fn rollouts_visit_everyone_once() {
        let inst = toy_instance(7);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            let t = rollout(&inst, &PolicyParams::zeros(), SampleMode::Sample, sem(), &mut rng).unwrap();
            let mut sorted = t.actions.clone();
            sorted.sort_unstable();
            assert_eq!(sorted, (1..=6).collect::<Vec<_>>());
            let tour = t.tour(6).unwrap();
            assert_eq!(t.reward, -split(&inst, &tour, sem()).total_cost);
        }
    }

    #[test]
    fn greedy_rollout_is_deterministic() {
        let inst = toy_instance(8);
        let mut params = PolicyParams::zeros();
        params.weights[1] = -1.5;
        let mut rng1 = ChaCha8Rng::seed_from_u64(10);
        let mut rng2 = ChaCha8Rng::seed_from_u64(999);
        let a = rollout(&inst, &params, SampleMode::Greedy, sem(), &mut rng1).unwrap();
        let b = rollout(&inst, &params, SampleMode::Greedy, sem(), &mut rng2).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn identical_rewards_have_exactly_zero_advantage() {
        let r = -7.316024857;
        let adv = advantages(&[r, r, r]);
        assert!(adv.iter().all(|&a| a == 0.0));
        let adv2 = advantages(&[-3.0, -5.0]);
        assert_eq!(adv2, vec![1.0, -1.0]);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let instances: Vec<Instance> = (0..2u64).map(|i| toy_instance(40 + i)).collect();
        let mut params = PolicyParams::zeros();
        let mut wrng = ChaCha8Rng::seed_from_u64(3);
        for w in params.weights.iter_mut() {
            *w = wrng.gen_range(-0.5..0.5);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let batch = sample_rollouts(&instances, &params, 4, sem(), &mut rng).unwrap();
        let (grad, grad_temperature) = batch_gradient(&batch, &params).unwrap();
        let step = 1e-5;
        for f in 0..FEATURE_DIM {
            let mut hi = params.clone();
            hi.weights[f] += step;
            let mut lo = params.clone();
            lo.weights[f] -= step;
            let fd = (batch_surrogate(&batch, &hi).unwrap() - batch_surrogate(&batch, &lo).unwrap())
                / (2.0 * step);
            let denom = grad[f].abs().max(fd.abs()).max(1e-6);
            assert!(
                ((grad[f] - fd) / denom).abs() <= 1e-5,
                "component {f}: analytic {} vs fd {fd}",
                grad[f]
            );
        }
        let mut hi = params.clone();
        hi.temperature += step;
        let mut lo = params.clone();
        lo.temperature -= step;
        let fd = (batch_surrogate(&batch, &hi).unwrap() - batch_surrogate(&batch, &lo).unwrap())
            / (2.0 * step);
        let denom = grad_temperature.abs().max(fd.abs()).max(1e-6);
        assert!(((grad_temperature - fd) / denom).abs() <= 1e-5);
    }

    #[test]
    fn zero_epochs_returns_initial_params() {
        let mut cfg = TrainConfig::new(5, VariantFlags::cvrp(), 0, 13);
        cfg.batch_size = 4;
        cfg.eval_instances = 4;
        let (params, curve) = train(&cfg).unwrap();
        assert_eq!(params, PolicyParams::zeros());
        assert!(curve.is_empty());
    }

    #[test]
    fn curve_has_one_row_per_epoch() {
        let mut cfg = TrainConfig::new(5, VariantFlags::cvrp(), 3, 14);
        cfg.batch_size = 4;
        cfg.rollouts_per_instance = 3;
        cfg.eval_instances = 4;
        let (_, curve) = train(&cfg).unwrap();
        assert_eq!(curve.len(), 3);
        assert_eq!(curve[2].epoch, 2);
        assert!(curve.iter().all(|row| row.mean_cost.is_finite()));
    }

    #[test]
    fn rollout_baseline_needs_two_rollouts() {
        let mut cfg = TrainConfig::new(5, VariantFlags::cvrp(), 1, 15);
        cfg.rollouts_per_instance = 1;
        assert!(matches!(train(&cfg), Err(PolicyError::Config(_))));
    }

    #[test]
    fn params_file_round_trip() {
        let mut params = PolicyParams::zeros();
        params.weights[1] = -0.75;
        params.temperature = 1.25;
        let text = serialize_params(&params, "deadbeefdeadbeef");
        let (back, digest) = parse_params(&text).unwrap();
        assert_eq!(back, params);
        assert_eq!(digest, "deadbeefdeadbeef");
        assert!(parse_params(&text.replace("bias", "bais")).is_err());
    }

    #[test]
    fn lr_schedule_steps_down() {
        let lr = LrSchedule { initial: 0.2, decay: 0.5, milestones: vec![3, 5] };
        assert_eq!(lr.at(0), 0.2);
        assert_eq!(lr.at(2), 0.2);
        assert_eq!(lr.at(3), 0.1);
        assert_eq!(lr.at(4), 0.1);
        assert_eq!(lr.at(7), 0.05);
    }
}
