//! Loss families with deterministic and minibatch-stochastic gradient
//! oracles, plus closed-form smoothness/convexity constants where they
//! exist.
//!
//! Agent-local oracles return per-sample means over the given indices, so
//! gradient magnitudes are batch-size independent; the analysis layer
//! applies the swarm-level weights when assembling the global objective.

use ndarray::{Array1, Array2, ArrayView1};

use crate::data::{Dataset, DatasetShard, EpochSampler};
use crate::error::{Error, Result};

mod mlp;

pub use mlp::Activation;

#[derive(Debug, Clone)]
pub enum ObjectiveKind {
    /// `f(x) = 1/2 x'Ax - b'x`, perturbed per sample by the dataset row:
    /// sample i contributes `1/2 x'Ax - (b + z_i)'x`. A must be symmetric
    /// positive definite.
    Quadratic { a: Array2<f64>, b: Array1<f64> },
    /// Binary cross-entropy over linear logits with an optional L2 term.
    Logistic { reg: f64 },
    /// Fully connected net with softmax cross-entropy output.
    Mlp {
        layers: Vec<usize>,
        activation: Activation,
    },
}

#[derive(Debug, Clone)]
pub struct ObjectiveSpec {
    kind: ObjectiveKind,
    dim: usize,
}

/// Per-agent constants; `None` marks a value that does not exist (or is
/// not computable) for the loss family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectiveConstants {
    /// Gradient Lipschitz constant (smoothness).
    pub smoothness: Option<f64>,
    /// Strong-convexity modulus.
    pub strong_convexity: Option<f64>,
    /// Function Lipschitz constant; only over an explicit ball for
    /// unbounded-domain losses.
    pub lipschitz: Option<f64>,
}

/// Aggregates over the swarm: max smoothness, min strong convexity, max
/// Lipschitz. `None` as soon as one agent lacks the constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwarmConstants {
    pub smoothness_max: Option<f64>,
    pub strong_convexity_min: Option<f64>,
    pub lipschitz_max: Option<f64>,
}

impl SwarmConstants {
    pub fn aggregate(per_agent: &[ObjectiveConstants]) -> Self {
        fn fold(values: impl Iterator<Item = Option<f64>>, pick_max: bool) -> Option<f64> {
            let mut acc: Option<f64> = None;
            for v in values {
                let v = v?;
                acc = Some(match acc {
                    None => v,
                    Some(a) => {
                        if pick_max {
                            a.max(v)
                        } else {
                            a.min(v)
                        }
                    }
                });
            }
            acc
        }
        SwarmConstants {
            smoothness_max: fold(per_agent.iter().map(|c| c.smoothness), true),
            strong_convexity_min: fold(per_agent.iter().map(|c| c.strong_convexity), false),
            lipschitz_max: fold(per_agent.iter().map(|c| c.lipschitz), true),
        }
    }
}

impl ObjectiveSpec {
    pub fn quadratic(a: Array2<f64>, b: Array1<f64>) -> Result<Self> {
        let d = a.nrows();
        if a.ncols() != d || b.len() != d || d == 0 {
            return Err(Error::Parameter(format!(
                "quadratic needs square A matching b, got A {}x{}, b {}",
                a.nrows(),
                a.ncols(),
                b.len()
            )));
        }
        for j in 0..d {
            for l in 0..d {
                if (a[[j, l]] - a[[l, j]]).abs() > 1e-12 {
                    return Err(Error::Parameter("quadratic A must be symmetric".into()));
                }
            }
        }
        let m = nalgebra::DMatrix::from_fn(d, d, |r, c| a[[r, c]]);
        if nalgebra::Cholesky::new(m).is_none() {
            return Err(Error::Parameter(
                "quadratic A must be positive definite".into(),
            ));
        }
        Ok(Self {
            kind: ObjectiveKind::Quadratic { a, b },
            dim: d,
        })
    }

    /// Diagonal SPD quadratic with eigenvalues spaced geometrically from 1
    /// to `condition`, and `b` all ones.
    pub fn quadratic_conditioned(dim: usize, condition: f64) -> Result<Self> {
        if dim == 0 || condition < 1.0 {
            return Err(Error::Parameter(format!(
                "need dim >= 1 and condition >= 1, got {dim}, {condition}"
            )));
        }
        let mut a = Array2::zeros((dim, dim));
        for i in 0..dim {
            let t = if dim > 1 {
                i as f64 / (dim as f64 - 1.0)
            } else {
                0.0
            };
            a[[i, i]] = condition.powf(t);
        }
        Self::quadratic(a, Array1::ones(dim))
    }

    pub fn logistic(dim: usize, reg: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Parameter("logistic needs dim >= 1".into()));
        }
        if reg < 0.0 {
            return Err(Error::Parameter(format!(
                "regularization must be >= 0, got {reg}"
            )));
        }
        Ok(Self {
            kind: ObjectiveKind::Logistic { reg },
            dim,
        })
    }

    pub fn mlp(layers: Vec<usize>, activation: Activation) -> Result<Self> {
        if layers.len() < 3 {
            return Err(Error::Parameter(
                "mlp needs at least one hidden layer (>= 3 layer sizes)".into(),
            ));
        }
        if layers.iter().any(|&s| s == 0) {
            return Err(Error::Parameter("mlp layer sizes must be positive".into()));
        }
        if *layers.last().unwrap() < 2 {
            return Err(Error::Parameter(
                "mlp output layer needs >= 2 units for softmax".into(),
            ));
        }
        let dim = mlp::param_count(&layers);
        Ok(Self {
            kind: ObjectiveKind::Mlp { layers, activation },
            dim,
        })
    }

    pub fn kind(&self) -> &ObjectiveKind {
        &self.kind
    }

    /// Parameter dimension d.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Feature dimension the paired dataset must have.
    pub fn input_dim(&self) -> usize {
        match &self.kind {
            ObjectiveKind::Quadratic { a, .. } => a.nrows(),
            ObjectiveKind::Logistic { .. } => self.dim,
            ObjectiveKind::Mlp { layers, .. } => layers[0],
        }
    }

    pub fn is_classifier(&self) -> bool {
        matches!(
            self.kind,
            ObjectiveKind::Logistic { .. } | ObjectiveKind::Mlp { .. }
        )
    }
}

fn check_inputs(
    spec: &ObjectiveSpec,
    data: &Dataset,
    indices: &[usize],
    x: &ArrayView1<f64>,
) -> Result<()> {
    if x.len() != spec.dim() {
        return Err(Error::Parameter(format!(
            "parameter has dimension {}, objective needs {}",
            x.len(),
            spec.dim()
        )));
    }
    if data.dim() != spec.input_dim() {
        return Err(Error::Parameter(format!(
            "dataset dimension {} does not match objective input {}",
            data.dim(),
            spec.input_dim()
        )));
    }
    if indices.is_empty() {
        return Err(Error::Parameter("empty sample set".into()));
    }
    if let Some(&bad) = indices.iter().find(|&&i| i >= data.len()) {
        return Err(Error::Parameter(format!(
            "sample index {bad} outside dataset of {}",
            data.len()
        )));
    }
    if matches!(spec.kind, ObjectiveKind::Logistic { .. }) && data.n_classes() != 2 {
        return Err(Error::Parameter(format!(
            "logistic regression needs binary labels, dataset has {} classes",
            data.n_classes()
        )));
    }
    Ok(())
}

/// Mean loss over the given sample indices.
pub fn loss_at(
    spec: &ObjectiveSpec,
    data: &Dataset,
    indices: &[usize],
    x: ArrayView1<f64>,
) -> Result<f64> {
    check_inputs(spec, data, indices, &x)?;
    let inv = 1.0 / indices.len() as f64;
    match &spec.kind {
        ObjectiveKind::Quadratic { a, b } => {
            let ax = a.dot(&x);
            let base = 0.5 * x.dot(&ax) - b.dot(&x);
            let mut zx = 0.0;
            for &i in indices {
                zx += data.features().row(i).dot(&x);
            }
            Ok(base - inv * zx)
        }
        ObjectiveKind::Logistic { reg } => {
            let mut total = 0.0;
            for &i in indices {
                let margin = signed_margin(data, i, &x);
                total += softplus(-margin);
            }
            Ok(inv * total + 0.5 * reg * x.dot(&x))
        }
        ObjectiveKind::Mlp { layers, activation } => {
            let mut total = 0.0;
            for &i in indices {
                total += mlp::sample_loss(layers, *activation, x, data, i);
            }
            Ok(inv * total)
        }
    }
}

/// Exact gradient of the mean loss over the given indices. Samples are
/// accumulated in ascending index order, so the result depends only on the
/// index set.
pub fn grad_at(
    spec: &ObjectiveSpec,
    data: &Dataset,
    indices: &[usize],
    x: ArrayView1<f64>,
) -> Result<Array1<f64>> {
    check_inputs(spec, data, indices, &x)?;
    let inv = 1.0 / indices.len() as f64;
    match &spec.kind {
        ObjectiveKind::Quadratic { a, b } => {
            let mut g = a.dot(&x) - b;
            let mut z_mean = Array1::zeros(x.len());
            for &i in indices {
                z_mean += &data.features().row(i);
            }
            z_mean *= inv;
            g -= &z_mean;
            Ok(g)
        }
        ObjectiveKind::Logistic { reg } => {
            let mut g = Array1::zeros(x.len());
            for &i in indices {
                let margin = signed_margin(data, i, &x);
                let y = label_sign(data.labels()[i]);
                let coeff = -y * sigmoid(-margin);
                g.scaled_add(coeff, &data.features().row(i));
            }
            g *= inv;
            g.scaled_add(*reg, &x);
            Ok(g)
        }
        ObjectiveKind::Mlp { layers, activation } => {
            let mut g = Array1::zeros(x.len());
            for &i in indices {
                mlp::accumulate_sample_grad(layers, *activation, x, data, i, &mut g);
            }
            g *= inv;
            Ok(g)
        }
    }
}

/// Shard-local mean loss.
pub fn loss(
    spec: &ObjectiveSpec,
    data: &Dataset,
    shard: &DatasetShard,
    x: ArrayView1<f64>,
) -> Result<f64> {
    loss_at(spec, data, shard.indices(), x)
}

/// Exact gradient of the shard-local mean loss.
pub fn full_gradient(
    spec: &ObjectiveSpec,
    data: &Dataset,
    shard: &DatasetShard,
    x: ArrayView1<f64>,
) -> Result<Array1<f64>> {
    grad_at(spec, data, shard.indices(), x)
}

/// Gradient over the next epoch-shuffle minibatch. With `batch_size` equal
/// to the shard size this reproduces [`full_gradient`] exactly: the batch
/// is then the whole shard in canonical order.
pub fn stochastic_gradient(
    spec: &ObjectiveSpec,
    data: &Dataset,
    sampler: &mut EpochSampler,
    batch_size: usize,
    x: ArrayView1<f64>,
) -> Result<Array1<f64>> {
    let batch = sampler.next_batch(batch_size)?;
    grad_at(spec, data, &batch, x)
}

/// Closed-form constants over a shard, where the loss family admits them.
/// `ball_radius` declares the domain for Lipschitz reporting on losses
/// whose gradient is unbounded globally.
pub fn constants(
    spec: &ObjectiveSpec,
    data: &Dataset,
    shard: &DatasetShard,
    ball_radius: Option<f64>,
) -> Result<ObjectiveConstants> {
    match &spec.kind {
        ObjectiveKind::Quadratic { a, b } => {
            let d = a.nrows();
            let m = nalgebra::DMatrix::from_fn(d, d, |r, c| a[[r, c]]);
            let eigs = m.symmetric_eigenvalues();
            let gamma = eigs.iter().cloned().fold(f64::MIN, f64::max);
            let strong = eigs.iter().cloned().fold(f64::MAX, f64::min);
            let lipschitz = ball_radius.map(|r| {
                let shift = shard_mean_shift(data, shard, b);
                gamma * r + shift
            });
            Ok(ObjectiveConstants {
                smoothness: Some(gamma),
                strong_convexity: Some(strong),
                lipschitz,
            })
        }
        ObjectiveKind::Logistic { reg } => {
            let n_j = shard.len() as f64;
            let d = data.dim();
            let mut gram = Array2::zeros((d, d));
            for &i in shard.indices() {
                let row = data.features().row(i);
                for a in 0..d {
                    for b in 0..d {
                        gram[[a, b]] += row[a] * row[b];
                    }
                }
            }
            let m = nalgebra::DMatrix::from_fn(d, d, |r, c| gram[[r, c]]);
            let lambda_max = m
                .symmetric_eigenvalues()
                .iter()
                .cloned()
                .fold(f64::MIN, f64::max);
            let smoothness = lambda_max / (4.0 * n_j) + reg;
            let lipschitz = ball_radius.map(|r| {
                let mean_norm: f64 = shard
                    .indices()
                    .iter()
                    .map(|&i| data.features().row(i).dot(&data.features().row(i)).sqrt())
                    .sum::<f64>()
                    / n_j;
                mean_norm + reg * r
            });
            Ok(ObjectiveConstants {
                smoothness: Some(smoothness),
                strong_convexity: Some(*reg),
                lipschitz,
            })
        }
        ObjectiveKind::Mlp { .. } => Ok(ObjectiveConstants {
            smoothness: None,
            strong_convexity: None,
            lipschitz: None,
        }),
    }
}

/// Fraction of the given samples classified correctly; `None` for loss
/// families without a decision rule.
pub fn accuracy(
    spec: &ObjectiveSpec,
    data: &Dataset,
    indices: &[usize],
    x: ArrayView1<f64>,
) -> Result<Option<f64>> {
    check_inputs(spec, data, indices, &x)?;
    match &spec.kind {
        ObjectiveKind::Quadratic { .. } => Ok(None),
        ObjectiveKind::Logistic { .. } => {
            let hits = indices
                .iter()
                .filter(|&&i| {
                    let logit = data.features().row(i).dot(&x);
                    (logit > 0.0) == (data.labels()[i] == 1)
                })
                .count();
            Ok(Some(hits as f64 / indices.len() as f64))
        }
        ObjectiveKind::Mlp { layers, activation } => {
            let hits = indices
                .iter()
                .filter(|&&i| mlp::predict(layers, *activation, x, data, i) == data.labels()[i])
                .count();
            Ok(Some(hits as f64 / indices.len() as f64))
        }
    }
}

fn shard_mean_shift(data: &Dataset, shard: &DatasetShard, b: &Array1<f64>) -> f64 {
    let inv = 1.0 / shard.len() as f64;
    let mut shifted = b.clone();
    for &i in shard.indices() {
        shifted.scaled_add(inv, &data.features().row(i));
    }
    shifted.dot(&shifted).sqrt()
}

fn label_sign(label: usize) -> f64 {
    if label == 1 {
        1.0
    } else {
        -1.0
    }
}

fn signed_margin(data: &Dataset, i: usize, x: &ArrayView1<f64>) -> f64 {
    label_sign(data.labels()[i]) * data.features().row(i).dot(x)
}

fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// Numerically stable `ln(1 + exp(t))`.
fn softplus(t: f64) -> f64 {
    t.max(0.0) + (-t.abs()).exp().ln_1p()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{self, full_shard};
    use crate::rng;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use ndarray::array;
    use rand::Rng;

    fn zero_data(n: usize, dim: usize) -> Dataset {
        data::generate_gradient_noise(n, dim, 0.0, 0).unwrap()
    }

    fn diag_quadratic() -> ObjectiveSpec {
        ObjectiveSpec::quadratic(array![[1.0, 0.0], [0.0, 2.0]], array![0.0, 0.0]).unwrap()
    }

    /// Central finite differences, the independent oracle for gradients.
    fn fd_gradient(
        spec: &ObjectiveSpec,
        data: &Dataset,
        indices: &[usize],
        x: &Array1<f64>,
        h: f64,
    ) -> Array1<f64> {
        let mut g = Array1::zeros(x.len());
        for i in 0..x.len() {
            let mut plus = x.clone();
            plus[i] += h;
            let mut minus = x.clone();
            minus[i] -= h;
            let fp = loss_at(spec, data, indices, plus.view()).unwrap();
            let fm = loss_at(spec, data, indices, minus.view()).unwrap();
            g[i] = (fp - fm) / (2.0 * h);
        }
        g
    }

    #[test]
    fn quadratic_loss_values() {
        let spec = diag_quadratic();
        let d = zero_data(4, 2);
        let shard = full_shard(&d);
        let at_zero = loss(&spec, &d, &shard, array![0.0, 0.0].view()).unwrap();
        assert_eq!(at_zero, 0.0);
        let at_ones = loss(&spec, &d, &shard, array![1.0, 1.0].view()).unwrap();
        assert_abs_diff_eq!(at_ones, 1.5, epsilon = 1e-15);
    }

    #[test]
    fn quadratic_gradient_values() {
        let spec = diag_quadratic();
        let d = zero_data(4, 2);
        let shard = full_shard(&d);
        let g = full_gradient(&spec, &d, &shard, array![1.0, 1.0].view()).unwrap();
        assert_abs_diff_eq!(g[0], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(g[1], 2.0, epsilon = 1e-15);

        // Gradient vanishes at the minimizer A^-1 b.
        let spec = ObjectiveSpec::quadratic(array![[1.0, 0.0], [0.0, 2.0]], array![1.0, 2.0]).unwrap();
        let g = full_gradient(&spec, &d, &shard, array![1.0, 1.0].view()).unwrap();
        assert_abs_diff_eq!(g[0], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(g[1], 0.0, epsilon = 1e-15);
    }

    #[test]
    fn logistic_saturates_on_separated_data() {
        let d = data::generate_blobs(200, 2, 2, 10.0, 3).unwrap();
        let shard = full_shard(&d);
        let spec = ObjectiveSpec::logistic(2, 0.0).unwrap();
        // Class 1 sits at +separation/2 along the first axis after
        // centering, so a large weight along that axis separates.
        let x = array![40.0, 0.0];
        let l = loss(&spec, &d, &shard, x.view()).unwrap();
        assert!(l < 0.01, "saturated logistic loss was {l}");
        let acc = accuracy(&spec, &d, &shard, (0..d.len()).collect::<Vec<_>>().as_slice(), x.view());
        let _ = acc; // signature exercised below
    }

    #[test]
    fn gradients_match_finite_differences() {
        let mut rand_stream = rng::stream(momentless_seed(), rng::STREAM_PROBE);
        let blobs = data::generate_blobs(24, 3, 2, 4.0, 5).unwrap();
        let noise = data::generate_gradient_noise(24, 3, 0.7, 6).unwrap();
        let quad = ObjectiveSpec::quadratic(
            array![[2.0, 0.3, 0.0], [0.3, 1.0, 0.1], [0.0, 0.1, 3.0]],
            array![0.5, -1.0, 2.0],
        )
        .unwrap();
        let logistic = ObjectiveSpec::logistic(3, 0.05).unwrap();
        let net = ObjectiveSpec::mlp(vec![3, 5, 2], Activation::Tanh).unwrap();
        let relu_net = ObjectiveSpec::mlp(vec![3, 4, 2], Activation::Relu).unwrap();

        let cases: [(&ObjectiveSpec, &Dataset, f64); 4] = [
            (&quad, &noise, 1e-4),
            (&logistic, &blobs, 1e-4),
            (&net, &blobs, 1e-4),
            (&relu_net, &blobs, 1e-3),
        ];
        for (spec, dataset, tol) in cases {
            let shard = full_shard(dataset);
            for _ in 0..10 {
                let x = Array1::from_shape_fn(spec.dim(), |_| rand_stream.gen_range(-0.8..0.8));
                let g = full_gradient(spec, dataset, &shard, x.view()).unwrap();
                let fd = fd_gradient(spec, dataset, shard.indices(), &x, 1e-5);
                let denom = 1.0 + fd.dot(&fd).sqrt();
                let diff = (&g - &fd).dot(&(&g - &fd)).sqrt();
                assert!(
                    diff / denom < tol,
                    "finite-difference mismatch {diff} for x = {x:?}"
                );
            }
        }
    }

    fn momentless_seed() -> u64 {
        42
    }

    #[test]
    fn degenerate_batch_equals_full_gradient_bitwise() {
        let d = data::generate_gradient_noise(12, 3, 0.5, 2).unwrap();
        let quad = ObjectiveSpec::quadratic_conditioned(3, 10.0).unwrap();
        let shard = full_shard(&d);
        let mut sampler = data::EpochSampler::new(&shard, rng::agent_stream(9, 0));
        let x = array![0.3, -0.2, 1.0];
        let stoch = stochastic_gradient(&quad, &d, &mut sampler, 12, x.view()).unwrap();
        let full = full_gradient(&quad, &d, &shard, x.view()).unwrap();
        assert_eq!(stoch, full);
    }

    #[test]
    fn epoch_mean_of_stochastic_gradients_matches_full_gradient() {
        let d = data::generate_gradient_noise(12, 3, 0.5, 2).unwrap();
        let quad = ObjectiveSpec::quadratic_conditioned(3, 10.0).unwrap();
        let shard = full_shard(&d);
        let mut sampler = data::EpochSampler::new(&shard, rng::agent_stream(9, 0));
        let x = array![0.3, -0.2, 1.0];
        let mut mean = Array1::zeros(3);
        for _ in 0..4 {
            mean += &stochastic_gradient(&quad, &d, &mut sampler, 3, x.view()).unwrap();
        }
        mean /= 4.0;
        let full = full_gradient(&quad, &d, &shard, x.view()).unwrap();
        for (a, b) in mean.iter().zip(full.iter()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn stochastic_gradient_is_deterministic_per_seed() {
        let d = data::generate_blobs(20, 2, 2, 4.0, 1).unwrap();
        let spec = ObjectiveSpec::logistic(2, 0.1).unwrap();
        let shard = full_shard(&d);
        let x = array![0.1, -0.4];
        let mut a = data::EpochSampler::new(&shard, rng::agent_stream(3, 0));
        let mut b = data::EpochSampler::new(&shard, rng::agent_stream(3, 0));
        for _ in 0..7 {
            let ga = stochastic_gradient(&spec, &d, &mut a, 6, x.view()).unwrap();
            let gb = stochastic_gradient(&spec, &d, &mut b, 6, x.view()).unwrap();
            assert_eq!(ga, gb);
        }
    }

    #[test]
    fn constants_for_diagonal_quadratic() {
        let spec = diag_quadratic();
        let d = zero_data(4, 2);
        let shard = full_shard(&d);
        let c = constants(&spec, &d, &shard, None).unwrap();
        assert_abs_diff_eq!(c.smoothness.unwrap(), 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(c.strong_convexity.unwrap(), 1.0, epsilon = 1e-12);
        assert!(c.lipschitz.is_none());
        let with_ball = constants(&spec, &d, &shard, Some(3.0)).unwrap();
        assert_abs_diff_eq!(with_ball.lipschitz.unwrap(), 6.0, epsilon = 1e-12);
    }

    #[test]
    fn constants_for_tiny_logistic() {
        // Two identity rows: lambda_max(X'X) = 1, n_j = 2.
        let d = Dataset::new(
            array![[1.0, 0.0], [0.0, 1.0]],
            vec![0, 1],
            2,
            crate::data::Provenance::Derived,
        )
        .unwrap();
        let spec = ObjectiveSpec::logistic(2, 0.1).unwrap();
        let shard = full_shard(&d);
        let c = constants(&spec, &d, &shard, None).unwrap();
        assert_abs_diff_eq!(c.smoothness.unwrap(), 0.225, epsilon = 1e-12);
        assert_abs_diff_eq!(c.strong_convexity.unwrap(), 0.1, epsilon = 1e-12);
    }

    #[test]
    fn constants_for_mlp_are_unavailable() {
        let spec = ObjectiveSpec::mlp(vec![4, 3, 2], Activation::Relu).unwrap();
        let d = data::generate_blobs(10, 4, 2, 4.0, 0).unwrap();
        let shard = full_shard(&d);
        let c = constants(&spec, &d, &shard, Some(1.0)).unwrap();
        assert_eq!(
            c,
            ObjectiveConstants {
                smoothness: None,
                strong_convexity: None,
                lipschitz: None
            }
        );
        let agg = SwarmConstants::aggregate(&[c]);
        assert!(agg.smoothness_max.is_none());
    }

    #[test]
    fn convexity_and_smoothness_inequalities_hold() {
        let mut stream = rng::stream(17, rng::STREAM_PROBE);
        let noise = data::generate_gradient_noise(16, 3, 0.4, 3).unwrap();
        let blobs = data::generate_blobs(16, 3, 2, 4.0, 3).unwrap();
        let quad = ObjectiveSpec::quadratic(
            array![[2.0, 0.5, 0.0], [0.5, 1.5, 0.2], [0.0, 0.2, 1.0]],
            array![1.0, 0.0, -1.0],
        )
        .unwrap();
        let logistic = ObjectiveSpec::logistic(3, 0.2).unwrap();

        for (spec, dataset) in [(&quad, &noise), (&logistic, &blobs)] {
            let shard = full_shard(dataset);
            let c = constants(spec, dataset, &shard, None).unwrap();
            let h = c.strong_convexity.unwrap();
            let gamma = c.smoothness.unwrap();
            assert!(h <= gamma);
            for _ in 0..100 {
                let x = Array1::from_shape_fn(3, |_| stream.gen_range(-2.0..2.0));
                let y = Array1::from_shape_fn(3, |_| stream.gen_range(-2.0..2.0));
                let fx = loss(spec, dataset, &shard, x.view()).unwrap();
                let fy = loss(spec, dataset, &shard, y.view()).unwrap();
                let gx = full_gradient(spec, dataset, &shard, x.view()).unwrap();
                let gy = full_gradient(spec, dataset, &shard, y.view()).unwrap();
                let diff = &y - &x;
                let dist2 = diff.dot(&diff);
                // Strong convexity lower bound.
                assert!(
                    fy >= fx + gx.dot(&diff) + 0.5 * h * dist2 - 1e-9,
                    "convexity violated"
                );
                // Gradient Lipschitz bound.
                let gd = &gy - &gx;
                assert!(
                    gd.dot(&gd).sqrt() <= gamma * dist2.sqrt() + 1e-9,
                    "smoothness violated"
                );
            }
        }
    }

    #[test]
    fn accuracy_on_separated_blobs() {
        let d = data::generate_blobs(400, 2, 2, 10.0, 9).unwrap();
        let spec = ObjectiveSpec::logistic(2, 0.0).unwrap();
        let idx: Vec<usize> = (0..d.len()).collect();
        let acc = accuracy(&spec, &d, &idx, array![5.0, 0.0].view())
            .unwrap()
            .unwrap();
        assert!(acc >= 0.99, "separator accuracy {acc}");
    }

    #[test]
    fn dimension_mismatch_is_a_parameter_error() {
        let spec = diag_quadratic();
        let d = zero_data(4, 2);
        let shard = full_shard(&d);
        assert!(loss(&spec, &d, &shard, array![1.0].view()).is_err());
        let d3 = zero_data(4, 3);
        assert!(loss(&spec, &d3, &full_shard(&d3), array![1.0, 1.0].view()).is_err());
    }

    #[test]
    fn spec_construction_rejects_bad_input() {
        assert!(ObjectiveSpec::quadratic(array![[1.0, 0.5], [0.0, 1.0]], array![0.0, 0.0]).is_err());
        assert!(ObjectiveSpec::quadratic(array![[-1.0, 0.0], [0.0, 1.0]], array![0.0, 0.0]).is_err());
        assert!(ObjectiveSpec::logistic(2, -0.1).is_err());
        assert!(ObjectiveSpec::mlp(vec![4, 2], Activation::Relu).is_err());
        assert!(ObjectiveSpec::mlp(vec![4, 3, 1], Activation::Relu).is_err());
    }
}
