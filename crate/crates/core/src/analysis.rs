//! Lyapunov function, effective constants, gradient-noise estimation, and
//! the quantitative convergence/consensus bounds used to check runs
//! against theory.
//!
//! The Lyapunov function pairs the weighted global objective with a
//! disagreement seminorm:
//! `V(x, alpha) = sum_j w_j fbar_j(x^j) + (1/2 alpha) ||x||^2_{I - Pi}`,
//! with `w_j = N n_j / n`. Under it one CDSGD step is exactly a gradient
//! step along the stochastic Lyapunov gradient `g + alpha^-1 (I - Pi) x`.

use ndarray::{Array1, Array2, Axis};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, DatasetShard, EpochSampler};
use crate::error::{Error, Result};
use crate::objectives::{self, ObjectiveKind, ObjectiveSpec};
use crate::optimizers;
use crate::par;
use crate::topology::InteractionMatrix;

/// Probe points with `||grad V||` below this are skipped by the noise
/// estimator.
pub const PROBE_GRADIENT_FLOOR: f64 = 1e-12;

/// Per-agent objective weights `N * n_j / n`, computed as an exact
/// integer ratio so equal shards give exactly 1.
pub fn swarm_weights(total_samples: usize, shards: &[DatasetShard]) -> Vec<f64> {
    let n_agents = shards.len();
    shards
        .iter()
        .map(|s| (n_agents * s.len()) as f64 / total_samples as f64)
        .collect()
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::Parameter(format!(
            "step size must be positive and finite, got {alpha}"
        )));
    }
    Ok(())
}

/// `V(x, alpha)`: weighted objective plus `1/(2 alpha)` times the
/// disagreement seminorm, summed over parameter coordinates.
pub fn lyapunov_value(
    x: &Array2<f64>,
    pi: &InteractionMatrix,
    alpha: f64,
    spec: &ObjectiveSpec,
    data: &Dataset,
    shards: &[DatasetShard],
) -> Result<f64> {
    check_alpha(alpha)?;
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Parameter("non-finite state".into()));
    }
    let weights = swarm_weights(data.len(), shards);
    let losses = par::map_agents(shards, |j, shard| {
        objectives::loss(spec, data, shard, x.row(j))
    });
    let mut objective = 0.0;
    for (w, l) in weights.iter().zip(losses) {
        objective += w * l?;
    }
    let lap = pi.laplacian_apply(x);
    let seminorm: f64 = x.iter().zip(lap.iter()).map(|(a, b)| a * b).sum();
    Ok(objective + seminorm / (2.0 * alpha))
}

/// Analytic `grad V`: per-agent shard gradients scaled by the swarm
/// weights, plus `alpha^-1 (I - Pi) x`.
pub fn lyapunov_gradient(
    x: &Array2<f64>,
    pi: &InteractionMatrix,
    alpha: f64,
    spec: &ObjectiveSpec,
    data: &Dataset,
    shards: &[DatasetShard],
) -> Result<Array2<f64>> {
    check_alpha(alpha)?;
    let weights = swarm_weights(data.len(), shards);
    let mut grads = optimizers::full_gradient_stack(spec, data, shards, x)?;
    for (j, w) in weights.iter().enumerate() {
        grads.row_mut(j).mapv_inplace(|v| v * w);
    }
    let lap = pi.laplacian_apply(x);
    Ok(grads + lap / alpha)
}

/// The stochastic Lyapunov gradient `G + alpha^-1 (I - Pi) x`. Stepping
/// `x - alpha * result` reproduces the mixing form `Pi x - alpha G`.
pub fn stochastic_lyapunov_gradient(
    x: &Array2<f64>,
    pi: &InteractionMatrix,
    alpha: f64,
    gradient_stack: &Array2<f64>,
) -> Result<Array2<f64>> {
    check_alpha(alpha)?;
    Ok(gradient_stack + &(pi.laplacian_apply(x) / alpha))
}

/// Strong-convexity and smoothness moduli of V as combined from the
/// objective constants and the network spectrum:
/// `H_hat = Hm + (1 - lambda2) / (2 alpha)`,
/// `gamma_hat = gamma_m + (1 - lambdaN) / alpha`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct EffectiveConstants {
    pub h_hat: f64,
    pub gamma_hat: f64,
}

pub fn effective_constants(
    h_m: f64,
    gamma_m: f64,
    lambda2: f64,
    lambda_n: f64,
    alpha: f64,
) -> Result<EffectiveConstants> {
    check_alpha(alpha)?;
    if !(lambda_n > 0.0 && lambda_n <= lambda2 && lambda2 <= 1.0) {
        return Err(Error::Parameter(format!(
            "need 0 < lambdaN <= lambda2 <= 1, got lambdaN={lambda_n}, lambda2={lambda2}"
        )));
    }
    Ok(EffectiveConstants {
        h_hat: h_m + (1.0 - lambda2) / (2.0 * alpha),
        gamma_hat: gamma_m + (1.0 - lambda_n) / alpha,
    })
}

/// Swarm mean and per-agent distances from it.
pub fn consensus_residuals(x: &Array2<f64>) -> (Array1<f64>, Array1<f64>) {
    let mean = x.mean_axis(Axis(0)).expect("nonempty state");
    let residuals = Array1::from_shape_fn(x.nrows(), |j| {
        x.row(j)
            .iter()
            .zip(mean.iter())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    });
    (mean, residuals)
}

/// Empirical gradient-noise constants: alignment bounds (zeta1, zeta2) and
/// the variance envelope (Q, Q_V), fitted over finitely many probe
/// points. Probe-limited by construction; full-batch gradients yield
/// exactly (1, 1, 0, 0).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct NoiseConstants {
    pub zeta1: f64,
    pub zeta2: f64,
    pub q: f64,
    pub q_v: f64,
}

impl NoiseConstants {
    /// `Qm = Q_V + zeta2^2`.
    pub fn q_m(&self) -> f64 {
        self.q_v + self.zeta2 * self.zeta2
    }

    pub const EXACT_FULL_BATCH: NoiseConstants = NoiseConstants {
        zeta1: 1.0,
        zeta2: 1.0,
        q: 0.0,
        q_v: 0.0,
    };
}

/// Estimate the noise constants at the given probe states. Each sample is
/// a fresh epoch shuffle's first minibatch, so draws are independent.
#[allow(clippy::too_many_arguments)]
pub fn estimate_noise_constants(
    spec: &ObjectiveSpec,
    data: &Dataset,
    shards: &[DatasetShard],
    pi: &InteractionMatrix,
    alpha: f64,
    probes: &[Array2<f64>],
    samples_per_point: usize,
    batch_size: usize,
    rng: &mut ChaCha8Rng,
) -> Result<NoiseConstants> {
    check_alpha(alpha)?;
    if samples_per_point < 2 {
        return Err(Error::Parameter(
            "need samples_per_point >= 2 for a variance estimate".into(),
        ));
    }
    if probes.is_empty() {
        return Err(Error::Estimation("no probe points given".into()));
    }

    let mut zeta1 = f64::INFINITY;
    let mut zeta2 = f64::NEG_INFINITY;
    let mut pairs: Vec<(f64, f64)> = Vec::new(); // (||grad V||^2, variance)
    let mut used = 0;

    for probe in probes {
        let grad_v = lyapunov_gradient(probe, pi, alpha, spec, data, shards)?;
        let grad_v_sq: f64 = grad_v.iter().map(|v| v * v).sum();
        if grad_v_sq.sqrt() < PROBE_GRADIENT_FLOOR {
            continue;
        }
        used += 1;

        let mut draws: Vec<Array2<f64>> = Vec::with_capacity(samples_per_point);
        for _ in 0..samples_per_point {
            let draw_seed: u64 = rng.gen();
            let mut samplers: Vec<EpochSampler> = shards
                .iter()
                .map(|s| EpochSampler::new(s, crate::rng::agent_stream(draw_seed, s.owner_agent())))
                .collect();
            let g = optimizers::gradient_stack(spec, data, &mut samplers, batch_size, probe)?;
            draws.push(stochastic_lyapunov_gradient(probe, pi, alpha, &g)?);
        }

        let mut mean = Array2::zeros(probe.raw_dim());
        for d in &draws {
            mean += d;
        }
        mean /= samples_per_point as f64;

        let variance: f64 = draws
            .iter()
            .map(|d| (d - &mean).iter().map(|v| v * v).sum::<f64>())
            .sum::<f64>()
            / (samples_per_point as f64 - 1.0);

        let alignment: f64 = grad_v.iter().zip(mean.iter()).map(|(a, b)| a * b).sum();
        let mean_norm: f64 = mean.iter().map(|v| v * v).sum::<f64>();
        zeta1 = zeta1.min(alignment / grad_v_sq);
        zeta2 = zeta2.max((mean_norm / grad_v_sq).sqrt());
        pairs.push((grad_v_sq, variance));
    }

    if used == 0 {
        return Err(Error::Estimation(
            "every probe point had a vanishing Lyapunov gradient".into(),
        ));
    }

    // Least-squares fit variance ~ Q + Q_V * ||grad V||^2, clamped to be
    // nonnegative, then lifted into an envelope over the probes.
    let n = pairs.len() as f64;
    let mean_g = pairs.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_v = pairs.iter().map(|p| p.1).sum::<f64>() / n;
    let cov: f64 = pairs
        .iter()
        .map(|p| (p.0 - mean_g) * (p.1 - mean_v))
        .sum::<f64>();
    let var_g: f64 = pairs.iter().map(|p| (p.0 - mean_g).powi(2)).sum::<f64>();
    let mut q_v = if var_g > 0.0 { (cov / var_g).max(0.0) } else { 0.0 };
    if !q_v.is_finite() {
        q_v = 0.0;
    }
    let mut q = (mean_v - q_v * mean_g).max(0.0);
    let worst_excess = pairs
        .iter()
        .map(|p| p.1 - (q + q_v * p.0))
        .fold(f64::NEG_INFINITY, f64::max);
    if worst_excess > 0.0 {
        q += worst_excess;
    }

    Ok(NoiseConstants {
        zeta1,
        zeta2,
        q,
        q_v,
    })
}

/// Consensus ball radius `alpha L / (1 - lambda2)`.
pub fn bound_prop1_consensus(alpha: f64, l: f64, lambda2: f64) -> Result<f64> {
    if lambda2 >= 1.0 {
        return Err(Error::Parameter(format!(
            "lambda2 must be < 1 (connected network), got {lambda2}"
        )));
    }
    if alpha < 0.0 || l < 0.0 {
        return Err(Error::Parameter("alpha and L must be nonnegative".into()));
    }
    Ok(alpha * l / (1.0 - lambda2))
}

/// Strongly convex fixed-step envelope at iteration k, with its geometric
/// rate and the k -> infinity noise floor.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Thm1Bound {
    pub value: f64,
    /// Per-step factor `1 - alpha * H_hat * zeta1`.
    pub rate: f64,
    /// `alpha * gamma_hat * Q / (2 H_hat zeta1)`.
    pub asymptote: f64,
}

/// Evaluate `rate^(k-1) * gap1 + (alpha^2 gamma_hat Q / 2) * sum_{l<k}
/// rate^l` in closed form.
#[allow(clippy::too_many_arguments)]
pub fn bound_thm1(
    v1_gap: f64,
    alpha: f64,
    h_hat: f64,
    gamma_hat: f64,
    zeta1: f64,
    q: f64,
    k: u64,
) -> Result<Thm1Bound> {
    check_alpha(alpha)?;
    if k == 0 {
        return Err(Error::Parameter("iteration index k starts at 1".into()));
    }
    if q < 0.0 || v1_gap < 0.0 {
        return Err(Error::Parameter("Q and the initial gap must be >= 0".into()));
    }
    let contraction = alpha * h_hat * zeta1;
    if !(contraction > 0.0 && contraction <= 1.0) {
        return Err(Error::Parameter(format!(
            "alpha * H_hat * zeta1 = {contraction} outside (0, 1]"
        )));
    }
    let rate = 1.0 - contraction;
    let noise_coeff = 0.5 * alpha * alpha * gamma_hat * q;
    let geometric_sum = if rate == 0.0 {
        1.0
    } else {
        (1.0 - rate.powi(k as i32)) / (1.0 - rate)
    };
    let asymptote = alpha * gamma_hat * q / (2.0 * h_hat * zeta1);
    Ok(Thm1Bound {
        value: rate.powi(k as i32 - 1) * v1_gap + noise_coeff * geometric_sum,
        rate,
        asymptote,
    })
}

/// Nonconvex fixed-step bound on the average squared Lyapunov gradient
/// over m iterations:
/// `[(gamma_m alpha + 1 - lambdaN) m Q / zeta1 + 2 (V1 - V_inf) /
/// (zeta1 alpha)] / m`.
#[allow(clippy::too_many_arguments)]
pub fn bound_thm2_avg_grad(
    gamma_m: f64,
    alpha: f64,
    lambda_n: f64,
    q: f64,
    zeta1: f64,
    m: u64,
    v1: f64,
    v_inf: f64,
) -> Result<f64> {
    check_alpha(alpha)?;
    if m == 0 {
        return Err(Error::Parameter("m must be >= 1".into()));
    }
    if zeta1 <= 0.0 || q < 0.0 || gamma_m < 0.0 {
        return Err(Error::Parameter(
            "need zeta1 > 0, Q >= 0, gamma_m >= 0".into(),
        ));
    }
    if v1 < v_inf {
        return Err(Error::Parameter(format!(
            "V_inf = {v_inf} is not a lower bound of V1 = {v1}"
        )));
    }
    let total = (gamma_m * alpha + 1.0 - lambda_n) * m as f64 * q / zeta1
        + 2.0 * (v1 - v_inf) / (zeta1 * alpha);
    Ok(total / m as f64)
}

/// Exact Lyapunov minimizer for quadratic objectives via the linear system
/// `grad V(x) = 0`, solved over the stacked (N*d) unknowns.
pub fn v_star_quadratic(
    pi: &InteractionMatrix,
    alpha: f64,
    spec: &ObjectiveSpec,
    data: &Dataset,
    shards: &[DatasetShard],
) -> Result<(Array2<f64>, f64)> {
    check_alpha(alpha)?;
    let (a, b) = match spec.kind() {
        ObjectiveKind::Quadratic { a, b } => (a, b),
        _ => {
            return Err(Error::Parameter(
                "exact Lyapunov minimizer needs a quadratic objective".into(),
            ))
        }
    };
    let n = shards.len();
    let dim = a.nrows();
    let weights = swarm_weights(data.len(), shards);
    let nd = n * dim;
    let mut system = nalgebra::DMatrix::zeros(nd, nd);
    for j in 0..n {
        for l in 0..n {
            let lap = (if j == l { 1.0 } else { 0.0 }) - pi.weights()[[j, l]];
            for c in 0..dim {
                system[(j * dim + c, l * dim + c)] += lap / alpha;
            }
        }
        for r in 0..dim {
            for c in 0..dim {
                system[(j * dim + r, j * dim + c)] += weights[j] * a[[r, c]];
            }
        }
    }
    let mut rhs = nalgebra::DVector::zeros(nd);
    for (j, shard) in shards.iter().enumerate() {
        let mut shift = b.clone();
        let inv = 1.0 / shard.len() as f64;
        for &i in shard.indices() {
            shift.scaled_add(inv, &data.features().row(i));
        }
        for c in 0..dim {
            rhs[j * dim + c] = weights[j] * shift[c];
        }
    }
    let solution = system
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Parameter("Lyapunov Hessian is singular".into()))?;
    let x_star = Array2::from_shape_fn((n, dim), |(j, c)| solution[j * dim + c]);
    let v_star = lyapunov_value(&x_star, pi, alpha, spec, data, shards)?;
    Ok((x_star, v_star))
}

/// Lyapunov minimizer by a long deterministic gradient run, for objectives
/// without a linear stationarity system. Stops at `||grad V|| <= tol`.
#[allow(clippy::too_many_arguments)]
pub fn v_star_descent(
    pi: &InteractionMatrix,
    alpha: f64,
    spec: &ObjectiveSpec,
    data: &Dataset,
    shards: &[DatasetShard],
    start: &Array2<f64>,
    descent_step: f64,
    tol: f64,
    max_iters: u64,
) -> Result<(Array2<f64>, f64)> {
    check_alpha(alpha)?;
    let mut x = start.clone();
    for _ in 0..max_iters {
        let g = lyapunov_gradient(&x, pi, alpha, spec, data, shards)?;
        let norm: f64 = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm <= tol {
            let v = lyapunov_value(&x, pi, alpha, spec, data, shards)?;
            return Ok((x, v));
        }
        x -= &(descent_step * &g);
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Estimation(
                "Lyapunov descent diverged; reduce the descent step".into(),
            ));
        }
    }
    Err(Error::Estimation(format!(
        "Lyapunov descent did not reach tolerance {tol} in {max_iters} iterations"
    )))
}

/// Snapshot of the Lyapunov diagnostics at one state.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LyapunovReport {
    pub v: f64,
    pub grad_v_norm: f64,
    pub mean_params: Vec<f64>,
    pub consensus_residuals: Vec<f64>,
    pub h_hat: Option<f64>,
    pub gamma_hat: Option<f64>,
}

pub fn report(
    x: &Array2<f64>,
    pi: &InteractionMatrix,
    alpha: f64,
    spec: &ObjectiveSpec,
    data: &Dataset,
    shards: &[DatasetShard],
    constants: Option<&objectives::SwarmConstants>,
) -> Result<LyapunovReport> {
    let v = lyapunov_value(x, pi, alpha, spec, data, shards)?;
    let grad = lyapunov_gradient(x, pi, alpha, spec, data, shards)?;
    let grad_v_norm = grad.iter().map(|v| v * v).sum::<f64>().sqrt();
    let (mean, residuals) = consensus_residuals(x);
    let spectrum = pi.spectral_summary();
    let effective = constants.and_then(|c| {
        match (c.strong_convexity_min, c.smoothness_max) {
            (Some(h), Some(g)) if !spectrum.degenerate => {
                effective_constants(h, g, spectrum.lambda2, spectrum.lambda_n, alpha).ok()
            }
            (Some(h), Some(g)) => Some(EffectiveConstants {
                h_hat: h,
                gamma_hat: g,
            }),
            _ => None,
        }
    });
    Ok(LyapunovReport {
        v,
        grad_v_norm,
        mean_params: mean.to_vec(),
        consensus_residuals: residuals.to_vec(),
        h_hat: effective.map(|e| e.h_hat),
        gamma_hat: effective.map(|e| e.gamma_hat),
    })
}
