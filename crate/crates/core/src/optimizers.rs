//! Per-round update laws: CDSGD, its Polyak/Nesterov momentum variants,
//! centralized SGD, and the FedAvg baseline, under fixed or diminishing
//! step sizes.
//!
//! A step is one minibatch update with one mixing application. Within a
//! step, batch indices are drawn sequentially (each agent owns its shuffle
//! stream) and gradients are evaluated concurrently; the mixing
//! multiplication is the barrier. Results are independent of the degree of
//! concurrency.

use ndarray::{Array1, Array2, ArrayView1, Axis};
use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::{self, Dataset, DatasetShard, EpochSampler};
use crate::error::{Error, Result};
use crate::objectives::{self, ObjectiveSpec};
use crate::par;
use crate::topology::InteractionMatrix;

/// Stacked per-agent parameters (row j is agent j's vector) plus momentum
/// buffers, which stay zero for momentum-free updates.
#[derive(Debug, Clone)]
pub struct SwarmState {
    pub params: Array2<f64>,
    pub momentum: Array2<f64>,
    pub iteration: u64,
}

impl SwarmState {
    pub fn new(params: Array2<f64>) -> Self {
        let momentum = Array2::zeros(params.raw_dim());
        Self {
            params,
            momentum,
            iteration: 0,
        }
    }

    /// Every agent starts from the same row.
    pub fn from_shared(row: &Array1<f64>, n_agents: usize) -> Self {
        let params = Array2::from_shape_fn((n_agents, row.len()), |(_, c)| row[c]);
        Self::new(params)
    }

    pub fn n_agents(&self) -> usize {
        self.params.nrows()
    }

    pub fn dim(&self) -> usize {
        self.params.ncols()
    }
}

/// Fixed step or the diminishing family `theta / (k^eps + t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum StepSchedule {
    Fixed { alpha: f64 },
    Diminishing { theta: f64, t: f64, eps: f64 },
}

impl StepSchedule {
    pub fn fixed(alpha: f64) -> Result<Self> {
        if alpha <= 0.0 || !alpha.is_finite() {
            return Err(Error::Parameter(format!(
                "fixed step must be positive, got {alpha}"
            )));
        }
        Ok(StepSchedule::Fixed { alpha })
    }

    /// `eps` in (0.5, 1] makes the sums diverge and square-sums converge.
    pub fn diminishing(theta: f64, t: f64, eps: f64) -> Result<Self> {
        if theta <= 0.0 || t < 0.0 {
            return Err(Error::Parameter(format!(
                "need theta > 0 and t >= 0, got theta={theta}, t={t}"
            )));
        }
        if !(eps > 0.5 && eps <= 1.0) {
            return Err(Error::Parameter(format!(
                "eps must lie in (0.5, 1], got {eps}"
            )));
        }
        Ok(StepSchedule::Diminishing { theta, t, eps })
    }

    /// Step size at iteration k (nonincreasing, positive).
    pub fn at(&self, k: u64) -> f64 {
        match *self {
            StepSchedule::Fixed { alpha } => alpha,
            StepSchedule::Diminishing { theta, t, eps } => theta / ((k as f64).powf(eps) + t),
        }
    }

    pub fn is_fixed(&self) -> bool {
        matches!(self, StepSchedule::Fixed { .. })
    }
}

/// Which update law a run uses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OptimizerKind {
    Cdsgd,
    CdmsgdPolyak { mu: f64 },
    CdmsgdNesterov { mu: f64 },
    CentralizedSgd,
    FedAvg { local_epochs: usize, client_fraction: f64 },
}

impl OptimizerKind {
    pub fn validate(&self) -> Result<()> {
        match *self {
            OptimizerKind::CdmsgdPolyak { mu } | OptimizerKind::CdmsgdNesterov { mu } => {
                if !(0.0..1.0).contains(&mu) {
                    return Err(Error::Parameter(format!(
                        "momentum mu must lie in [0, 1), got {mu}"
                    )));
                }
            }
            OptimizerKind::FedAvg {
                local_epochs,
                client_fraction,
            } => {
                if local_epochs == 0 {
                    return Err(Error::Parameter("fedavg needs local_epochs >= 1".into()));
                }
                if !(client_fraction > 0.0 && client_fraction <= 1.0) {
                    return Err(Error::Parameter(format!(
                        "client fraction must lie in (0, 1], got {client_fraction}"
                    )));
                }
            }
            _ => {}
        }
        Ok(())
    }

    pub fn is_decentralized(&self) -> bool {
        matches!(
            self,
            OptimizerKind::Cdsgd
                | OptimizerKind::CdmsgdPolyak { .. }
                | OptimizerKind::CdmsgdNesterov { .. }
        )
    }
}

/// Stack per-agent minibatch gradients evaluated at the rows of `eval_at`.
/// Batches are drawn sequentially (deterministic order); the gradient
/// evaluations run per-agent concurrently.
pub fn gradient_stack(
    spec: &ObjectiveSpec,
    data: &Dataset,
    samplers: &mut [EpochSampler],
    batch_size: usize,
    eval_at: &Array2<f64>,
) -> Result<Array2<f64>> {
    if samplers.len() != eval_at.nrows() {
        return Err(Error::Parameter(format!(
            "{} samplers for {} agents",
            samplers.len(),
            eval_at.nrows()
        )));
    }
    let batches: Vec<Vec<usize>> = samplers
        .iter_mut()
        .map(|s| s.next_batch(batch_size))
        .collect::<Result<_>>()?;
    stack_rows(par::map_agents(&batches, |j, batch| {
        objectives::grad_at(spec, data, batch, eval_at.row(j))
    }))
}

/// Stack exact shard gradients at the rows of `eval_at`.
pub fn full_gradient_stack(
    spec: &ObjectiveSpec,
    data: &Dataset,
    shards: &[DatasetShard],
    eval_at: &Array2<f64>,
) -> Result<Array2<f64>> {
    if shards.len() != eval_at.nrows() {
        return Err(Error::Parameter(format!(
            "{} shards for {} agents",
            shards.len(),
            eval_at.nrows()
        )));
    }
    stack_rows(par::map_agents(shards, |j, shard| {
        objectives::full_gradient(spec, data, shard, eval_at.row(j))
    }))
}

fn stack_rows(rows: Vec<Result<Array1<f64>>>) -> Result<Array2<f64>> {
    let mut out = Array2::zeros((rows.len(), 0));
    for (j, row) in rows.into_iter().enumerate() {
        let row = row?;
        if j == 0 {
            out = Array2::zeros((out.nrows(), row.len()));
        }
        out.row_mut(j).assign(&row);
    }
    Ok(out)
}

fn check_finite(params: &Array2<f64>, step: u64) -> Result<()> {
    for (j, row) in params.rows().into_iter().enumerate() {
        if row.iter().any(|v| !v.is_finite()) {
            return Err(Error::Divergence { agent: j, step });
        }
    }
    Ok(())
}

/// One CDSGD step: mix with neighbors, then subtract the local stochastic
/// gradient (`x <- Pi x - alpha g`).
pub fn cdsgd_step(
    state: &SwarmState,
    pi: &InteractionMatrix,
    spec: &ObjectiveSpec,
    data: &Dataset,
    samplers: &mut [EpochSampler],
    batch_size: usize,
    alpha: f64,
    ) -> Result<SwarmState> {
    let grads = gradient_stack(spec, data, samplers, batch_size, &state.params)?;
    let mixed = pi.mix(&state.params);
    let params = mixed - alpha * &grads;
    let step = state.iteration + 1;
    check_finite(&params, step)?;
    Ok(SwarmState {
        params,
        momentum: state.momentum.clone(),
        iteration: step,
    })
}

/// Polyak momentum: `w = Pi x; v <- mu v - alpha g(x); x <- w + v`.
pub fn cdmsgd_polyak_step(
    state: &SwarmState,
    pi: &InteractionMatrix,
    spec: &ObjectiveSpec,
    data: &Dataset,
    samplers: &mut [EpochSampler],
    batch_size: usize,
    alpha: f64,
    mu: f64,
) -> Result<SwarmState> {
    check_momentum(mu)?;
    let grads = gradient_stack(spec, data, samplers, batch_size, &state.params)?;
    let mixed = pi.mix(&state.params);
    let momentum = mu * &state.momentum - alpha * &grads;
    let params = mixed + &momentum;
    let step = state.iteration + 1;
    check_finite(&params, step)?;
    Ok(SwarmState {
        params,
        momentum,
        iteration: step,
    })
}

/// Nesterov momentum: the gradient is taken at the lookahead point
/// `x + mu v` instead of `x`.
pub fn cdmsgd_nesterov_step(
    state: &SwarmState,
    pi: &InteractionMatrix,
    spec: &ObjectiveSpec,
    data: &Dataset,
    samplers: &mut [EpochSampler],
    batch_size: usize,
    alpha: f64,
    mu: f64,
) -> Result<SwarmState> {
    check_momentum(mu)?;
    let lookahead = &state.params + &(mu * &state.momentum);
    let grads = gradient_stack(spec, data, samplers, batch_size, &lookahead)?;
    let mixed = pi.mix(&state.params);
    let momentum = mu * &state.momentum - alpha * &grads;
    let params = mixed + &momentum;
    let step = state.iteration + 1;
    check_finite(&params, step)?;
    Ok(SwarmState {
        params,
        momentum,
        iteration: step,
    })
}

fn check_momentum(mu: f64) -> Result<()> {
    if !(0.0..1.0).contains(&mu) {
        return Err(Error::Parameter(format!(
            "momentum mu must lie in [0, 1), got {mu}"
        )));
    }
    Ok(())
}

/// One centralized SGD step on a single parameter vector drawing batches
/// from the whole dataset.
pub fn centralized_sgd_step(
    x: &Array1<f64>,
    spec: &ObjectiveSpec,
    data: &Dataset,
    sampler: &mut EpochSampler,
    batch_size: usize,
    alpha: f64,
    step: u64,
) -> Result<Array1<f64>> {
    let g = objectives::stochastic_gradient(spec, data, sampler, batch_size, x.view())?;
    let next = x - &(alpha * &g);
    if next.iter().any(|v| !v.is_finite()) {
        return Err(Error::Divergence { agent: 0, step });
    }
    Ok(next)
}

/// One FedAvg round: sample `ceil(C * N)` clients, run `E` local epochs of
/// minibatch SGD on each, then replace every client's vector with the
/// shard-size-weighted average of the sampled clients' results.
#[allow(clippy::too_many_arguments)]
pub fn fedavg_round(
    params: &Array2<f64>,
    spec: &ObjectiveSpec,
    data: &Dataset,
    shards: &[DatasetShard],
    samplers: &mut [EpochSampler],
    local_epochs: usize,
    client_fraction: f64,
    batch_size: usize,
    alpha: f64,
    server_rng: &mut ChaCha8Rng,
    round: u64,
) -> Result<Array2<f64>> {
    let n = params.nrows();
    if local_epochs == 0 || !(client_fraction > 0.0 && client_fraction <= 1.0) {
        return Err(Error::Parameter(
            "fedavg needs local_epochs >= 1 and client fraction in (0, 1]".into(),
        ));
    }
    let picked = ((client_fraction * n as f64).ceil() as usize).clamp(1, n);
    let mut clients: Vec<usize> = (0..n).collect();
    clients.shuffle(server_rng);
    let mut chosen = clients[..picked].to_vec();
    chosen.sort_unstable();

    // Local epochs run sequentially per client; each client owns its
    // sampler, so client order does not change the draws.
    let mut results: Vec<(usize, Array1<f64>)> = Vec::with_capacity(picked);
    for &c in &chosen {
        let mut x = params.row(c).to_owned();
        let steps = local_epochs * data::steps_per_epoch(shards[c].len(), batch_size.min(shards[c].len()));
        for _ in 0..steps {
            let g = objectives::stochastic_gradient(
                spec,
                data,
                &mut samplers[c],
                batch_size.min(shards[c].len()),
                x.view(),
            )?;
            x -= &(alpha * &g);
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Divergence { agent: c, step: round });
        }
        results.push((c, x));
    }

    let total: f64 = chosen.iter().map(|&c| shards[c].len() as f64).sum();
    let mut average = Array1::zeros(params.ncols());
    for (c, x) in &results {
        average.scaled_add(shards[*c].len() as f64 / total, x);
    }
    let mut next = params.clone();
    for mut row in next.rows_mut() {
        row.assign(&average);
    }
    Ok(next)
}

/// Largest fixed step size the sufficient condition admits:
/// `(zeta1 - (1 - lambdaN) Qm) / (gamma_m Qm)`. A nonpositive value means
/// no admissible fixed step exists for this topology/noise combination.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct StepSizeBound {
    pub value: f64,
    pub admissible: bool,
}

pub fn max_stable_step_size(
    zeta1: f64,
    q_m: f64,
    gamma_m: f64,
    lambda_n: f64,
) -> Result<StepSizeBound> {
    if zeta1 <= 0.0 {
        return Err(Error::Parameter(format!("zeta1 must be > 0, got {zeta1}")));
    }
    if q_m <= 0.0 || gamma_m <= 0.0 {
        return Err(Error::Parameter(format!(
            "need Qm > 0 and gamma_m > 0, got Qm={q_m}, gamma_m={gamma_m}"
        )));
    }
    let value = (zeta1 - (1.0 - lambda_n) * q_m) / (gamma_m * q_m);
    Ok(StepSizeBound {
        value,
        admissible: value > 0.0,
    })
}

/// Column means of the stacked parameters: the swarm average vector.
pub fn swarm_mean(params: &Array2<f64>) -> Array1<f64> {
    params.mean_axis(Axis(0)).expect("nonempty params")
}

pub fn make_samplers(shards: &[DatasetShard], master_seed: u64) -> Vec<EpochSampler> {
    shards
        .iter()
        .map(|s| EpochSampler::new(s, crate::rng::agent_stream(master_seed, s.owner_agent())))
        .collect()
}
