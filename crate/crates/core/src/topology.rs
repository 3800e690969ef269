//! Agent interaction matrices over fixed undirected communication graphs.
//!
//! The interaction matrix is symmetric and doubly stochastic; its spectrum
//! drives both consensus speed (through the gap `1 - lambda2`) and the
//! admissible step-size range (through `lambdaN`). Matrices are immutable
//! after construction and safe to share across threads.

use std::collections::BTreeSet;
use std::path::Path;

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Row/column sums must match 1 within this tolerance.
pub const STOCHASTIC_TOL: f64 = 1e-12;
/// Eigenvalues within this distance of 1 count toward the multiplicity of
/// the consensus eigenvalue. Robust for N <= 256 at double precision.
pub const EIGEN_ONE_TOL: f64 = 1e-8;
/// The smallest eigenvalue must exceed this to count as positive definite;
/// rank-deficient constructions land at +/-1e-16 numerically.
pub const POSITIVE_DEFINITE_TOL: f64 = 1e-10;

/// Symmetric doubly stochastic mixing matrix with its cached spectrum.
#[derive(Debug, Clone)]
pub struct InteractionMatrix {
    n_agents: usize,
    weights: Array2<f64>,
    /// Eigenvalues sorted descending; `eigenvalues[0]` is the consensus one.
    eigenvalues: Vec<f64>,
    /// Unordered neighbor pairs, stored as (min, max).
    edges: BTreeSet<(usize, usize)>,
}

/// Per-clause report of the mixing-matrix requirements. Never fails hard:
/// callers decide whether a violation is an error or a warning.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ValidationReport {
    pub doubly_stochastic: bool,
    pub symmetric: bool,
    pub connected: bool,
    pub positive_definite: bool,
    pub messages: Vec<String>,
}

impl ValidationReport {
    pub fn all_ok(&self) -> bool {
        self.doubly_stochastic && self.symmetric && self.connected && self.positive_definite
    }
}

/// `(lambda2, lambdaN, 1 - lambda2)` plus a degeneracy flag for networks
/// that cannot mix (single agent or disconnected).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SpectralSummary {
    pub lambda2: f64,
    pub lambda_n: f64,
    pub spectral_gap: f64,
    pub degenerate: bool,
}

#[derive(Serialize, Deserialize)]
struct MatrixJson {
    n: usize,
    weights: Vec<Vec<f64>>,
}

impl InteractionMatrix {
    /// Lazy fully connected topology: `(1-rho) I + (rho/N) * ones`.
    ///
    /// The pure uniform matrix (`rho = 1`) has a zero eigenvalue for N >= 2
    /// and is only constructible through [`fully_connected_uniform`].
    ///
    /// [`fully_connected_uniform`]: InteractionMatrix::fully_connected_uniform
    pub fn fully_connected(n_agents: usize, rho: f64) -> Result<Self> {
        if n_agents == 0 {
            return Err(Error::Parameter("n_agents must be >= 1".into()));
        }
        if !(rho > 0.0 && rho < 1.0) {
            return Err(Error::Parameter(format!(
                "laziness rho must lie in (0, 1), got {rho}"
            )));
        }
        let n = n_agents;
        let off = rho / n as f64;
        // Diagonal written as 1 - (n-1)*off so each row sums to 1 exactly
        // when n == 1 (the matrix must be the scalar 1).
        let diag = 1.0 - (n as f64 - 1.0) * off;
        let weights = Array2::from_shape_fn((n, n), |(j, l)| if j == l { diag } else { off });
        let edges = all_pairs(n);
        Ok(Self::from_parts(weights, edges))
    }

    /// Paper-style uniform averaging `(1/N) * ones`. Violates positive
    /// definiteness for N >= 2; validation reports it, construction does not
    /// reject it. Prefer [`fully_connected`](InteractionMatrix::fully_connected).
    pub fn fully_connected_uniform(n_agents: usize) -> Result<Self> {
        if n_agents == 0 {
            return Err(Error::Parameter("n_agents must be >= 1".into()));
        }
        let n = n_agents;
        let w = 1.0 / n as f64;
        let weights = Array2::from_elem((n, n), w);
        Ok(Self::from_parts(weights, all_pairs(n)))
    }

    /// Identity matrix: no communication. Connectivity validation fails for
    /// N >= 2; useful as an explicit no-coupling override.
    pub fn identity(n_agents: usize) -> Result<Self> {
        if n_agents == 0 {
            return Err(Error::Parameter("n_agents must be >= 1".into()));
        }
        Ok(Self::from_parts(Array2::eye(n_agents), BTreeSet::new()))
    }

    /// Circulant ring: diagonal `1 - 2*beta`, weight `beta` to each of the
    /// two ring neighbors. `beta < 1/4` keeps the smallest eigenvalue
    /// `1 - 2*beta + 2*beta*cos(pi)` positive for every N.
    pub fn ring(n_agents: usize, beta: f64) -> Result<Self> {
        if n_agents < 3 {
            return Err(Error::Parameter(format!(
                "ring needs n_agents >= 3, got {n_agents}"
            )));
        }
        if !(beta > 0.0 && beta < 0.25) {
            return Err(Error::Parameter(format!(
                "ring coupling beta must lie in (0, 1/4), got {beta}"
            )));
        }
        let n = n_agents;
        let mut weights = Array2::zeros((n, n));
        let mut edges = BTreeSet::new();
        for j in 0..n {
            weights[[j, j]] = 1.0 - 2.0 * beta;
            let next = (j + 1) % n;
            let prev = (j + n - 1) % n;
            weights[[j, next]] = beta;
            weights[[j, prev]] = beta;
            edges.insert(pair(j, next));
            edges.insert(pair(j, prev));
        }
        Ok(Self::from_parts(weights, edges))
    }

    /// Lazy Metropolis weights on an arbitrary simple graph:
    /// `pi_jl = 1 / (1 + max(deg_j, deg_l))` on edges, diagonal absorbing
    /// the remainder, then blended as `(1-rho) I + rho * Pi_metro`.
    ///
    /// Double stochasticity holds by construction for any input; a
    /// disconnected graph still builds and shows up in validation.
    pub fn from_edges(n_agents: usize, edge_list: &[(usize, usize)], rho: f64) -> Result<Self> {
        if n_agents == 0 {
            return Err(Error::Parameter("n_agents must be >= 1".into()));
        }
        if !(rho > 0.0 && rho <= 1.0) {
            return Err(Error::Parameter(format!(
                "blend rho must lie in (0, 1], got {rho}"
            )));
        }
        let n = n_agents;
        let mut edges = BTreeSet::new();
        for &(a, b) in edge_list {
            if a >= n || b >= n {
                return Err(Error::Parameter(format!(
                    "edge ({a}, {b}) references an agent outside 0..{n}"
                )));
            }
            if a == b {
                return Err(Error::Parameter(format!("self loop at agent {a}")));
            }
            edges.insert(pair(a, b));
        }
        let mut degree = vec![0usize; n];
        for &(a, b) in &edges {
            degree[a] += 1;
            degree[b] += 1;
        }
        let mut weights = Array2::zeros((n, n));
        for &(a, b) in &edges {
            let w = rho / (1.0 + degree[a].max(degree[b]) as f64);
            weights[[a, b]] = w;
            weights[[b, a]] = w;
        }
        for j in 0..n {
            let off: f64 = (0..n).filter(|&l| l != j).map(|l| weights[[j, l]]).sum();
            weights[[j, j]] = 1.0 - off;
        }
        Ok(Self::from_parts(weights, edges))
    }

    /// Rebuild from raw weights, inferring the edge set from the nonzero
    /// off-diagonal pattern. Spectrum is recomputed; validity is reported by
    /// [`validate`](InteractionMatrix::validate), not enforced here.
    pub fn from_weights(weights: Array2<f64>) -> Result<Self> {
        let n = weights.nrows();
        if n == 0 || weights.ncols() != n {
            return Err(Error::Parameter(format!(
                "weights must be square and nonempty, got {}x{}",
                weights.nrows(),
                weights.ncols()
            )));
        }
        let mut edges = BTreeSet::new();
        for j in 0..n {
            for l in (j + 1)..n {
                if weights[[j, l]] != 0.0 || weights[[l, j]] != 0.0 {
                    edges.insert((j, l));
                }
            }
        }
        Ok(Self::from_parts(weights, edges))
    }

    fn from_parts(weights: Array2<f64>, edges: BTreeSet<(usize, usize)>) -> Self {
        let eigenvalues = symmetric_eigenvalues_desc(&weights);
        Self {
            n_agents: weights.nrows(),
            weights,
            eigenvalues,
            edges,
        }
    }

    pub fn n_agents(&self) -> usize {
        self.n_agents
    }

    pub fn weights(&self) -> &Array2<f64> {
        &self.weights
    }

    /// Eigenvalues sorted descending.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn edges(&self) -> &BTreeSet<(usize, usize)> {
        &self.edges
    }

    /// Mix a stacked parameter matrix: `Pi * x`, applied to each of the d
    /// parameter coordinates (columns) identically.
    pub fn mix(&self, x: &Array2<f64>) -> Array2<f64> {
        self.weights.dot(x)
    }

    /// `(I - Pi) * x`.
    pub fn laplacian_apply(&self, x: &Array2<f64>) -> Array2<f64> {
        x - &self.mix(x)
    }

    /// Check every clause of the mixing-matrix requirements. Reports,
    /// never rejects.
    pub fn validate(&self) -> ValidationReport {
        let n = self.n_agents;
        let w = &self.weights;
        let mut messages = Vec::new();

        let mut doubly_stochastic = true;
        for j in 0..n {
            let row: f64 = w.row(j).sum();
            let col: f64 = w.column(j).sum();
            if (row - 1.0).abs() > STOCHASTIC_TOL {
                doubly_stochastic = false;
                messages.push(format!("row {j} sums to {row}, expected 1"));
            }
            if (col - 1.0).abs() > STOCHASTIC_TOL {
                doubly_stochastic = false;
                messages.push(format!("column {j} sums to {col}, expected 1"));
            }
        }

        let mut symmetric = true;
        for j in 0..n {
            for l in 0..n {
                let v = w[[j, l]];
                if (v - w[[l, j]]).abs() > STOCHASTIC_TOL {
                    symmetric = false;
                    messages.push(format!("asymmetry at ({j}, {l}): {v} vs {}", w[[l, j]]));
                }
                if !(0.0..=1.0).contains(&v) {
                    symmetric = false;
                    messages.push(format!("weight ({j}, {l}) = {v} outside [0, 1]"));
                }
                if j != l {
                    let on_edge = self.edges.contains(&pair(j, l));
                    if !on_edge && v != 0.0 {
                        symmetric = false;
                        messages.push(format!("nonzero weight ({j}, {l}) off the edge set"));
                    }
                }
            }
        }

        let ones_multiplicity = self
            .eigenvalues
            .iter()
            .filter(|&&e| (e - 1.0).abs() <= EIGEN_ONE_TOL)
            .count();
        let connected = ones_multiplicity == 1;
        if !connected {
            messages.push(format!(
                "eigenvalue 1 has multiplicity {ones_multiplicity}; graph is not connected"
            ));
        }

        let lambda_n = *self.eigenvalues.last().unwrap_or(&f64::NAN);
        let positive_definite = lambda_n > POSITIVE_DEFINITE_TOL;
        if !positive_definite {
            messages.push(format!(
                "smallest eigenvalue {lambda_n} is not strictly positive"
            ));
        }

        ValidationReport {
            doubly_stochastic,
            symmetric,
            connected,
            positive_definite,
            messages,
        }
    }

    /// `(lambda2, lambdaN, 1 - lambda2)`. A single agent is reported as
    /// `(1, 1, 0)` with the degenerate flag set; a disconnected matrix
    /// (gap ~ 0) is also flagged.
    pub fn spectral_summary(&self) -> SpectralSummary {
        if self.n_agents == 1 {
            return SpectralSummary {
                lambda2: 1.0,
                lambda_n: 1.0,
                spectral_gap: 0.0,
                degenerate: true,
            };
        }
        let lambda2 = self.eigenvalues[1];
        let lambda_n = *self.eigenvalues.last().unwrap();
        let spectral_gap = 1.0 - lambda2;
        SpectralSummary {
            lambda2,
            lambda_n,
            spectral_gap,
            degenerate: spectral_gap <= EIGEN_ONE_TOL,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = MatrixJson {
            n: self.n_agents,
            weights: self
                .weights
                .rows()
                .into_iter()
                .map(|r| r.to_vec())
                .collect(),
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: MatrixJson = serde_json::from_str(text)?;
        if doc.weights.len() != doc.n || doc.weights.iter().any(|r| r.len() != doc.n) {
            return Err(Error::Parameter(format!(
                "weights must be {n}x{n}",
                n = doc.n
            )));
        }
        let mut weights = Array2::zeros((doc.n, doc.n));
        for (j, row) in doc.weights.iter().enumerate() {
            for (l, &v) in row.iter().enumerate() {
                weights[[j, l]] = v;
            }
        }
        Self::from_weights(weights)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Parse a CLI descriptor: `full:rho=0.9`, `full:uniform`,
    /// `ring:beta=0.2`, `identity`, or `file:<path>` (which ignores
    /// `n_agents` in favor of the stored size).
    pub fn parse_descriptor(descriptor: &str, n_agents: usize) -> Result<Self> {
        let (kind, args) = match descriptor.split_once(':') {
            Some((k, a)) => (k, a),
            None => (descriptor, ""),
        };
        match kind {
            "full" => {
                if args == "uniform" {
                    Self::fully_connected_uniform(n_agents)
                } else {
                    let rho = parse_kv(args, "rho")?.unwrap_or(0.9);
                    Self::fully_connected(n_agents, rho)
                }
            }
            "ring" => {
                let beta = parse_kv(args, "beta")?.unwrap_or(0.2);
                Self::ring(n_agents, beta)
            }
            "identity" => Self::identity(n_agents),
            "file" => Self::load(Path::new(args)),
            other => Err(Error::Config(format!("unknown topology '{other}'"))),
        }
    }
}

fn pair(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

fn all_pairs(n: usize) -> BTreeSet<(usize, usize)> {
    let mut edges = BTreeSet::new();
    for j in 0..n {
        for l in (j + 1)..n {
            edges.insert((j, l));
        }
    }
    edges
}

/// Eigenvalues of a symmetric matrix, sorted descending. Symmetry is
/// structural for every construction in this module, so the values are
/// real by construction.
fn symmetric_eigenvalues_desc(w: &Array2<f64>) -> Vec<f64> {
    let n = w.nrows();
    let m = nalgebra::DMatrix::from_fn(n, n, |r, c| w[[r, c]]);
    let mut eigs: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
    eigs.sort_by(|a, b| b.partial_cmp(a).unwrap());
    eigs
}

/// Read `key=value` out of a comma-separated argument list.
fn parse_kv(args: &str, key: &str) -> Result<Option<f64>> {
    for part in args.split(',').filter(|p| !p.is_empty()) {
        match part.split_once('=') {
            Some((k, v)) if k == key => {
                let value = v
                    .parse::<f64>()
                    .map_err(|_| Error::Config(format!("bad value for {key}: '{v}'")))?;
                return Ok(Some(value));
            }
            Some(_) => continue,
            None => {
                return Err(Error::Config(format!(
                    "expected key=value in descriptor, got '{part}'"
                )))
            }
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;

    fn assert_spectrum(m: &InteractionMatrix, expected: &[f64], tol: f64) {
        assert_eq!(m.eigenvalues().len(), expected.len());
        for (got, want) in m.eigenvalues().iter().zip(expected) {
            assert_abs_diff_eq!(got, want, epsilon = tol);
        }
    }

    #[test]
    fn fully_connected_spectrum_matches_rank_one_form() {
        // (1-rho) I + (rho/N) ones has eigenvalues {1, 1-rho, ..., 1-rho}.
        let m = InteractionMatrix::fully_connected(5, 0.9).unwrap();
        assert_spectrum(&m, &[1.0, 0.1, 0.1, 0.1, 0.1], 1e-10);
        assert!(m.validate().all_ok());
    }

    #[test]
    fn single_agent_is_exactly_one() {
        let m = InteractionMatrix::fully_connected(1, 0.5).unwrap();
        assert_eq!(m.weights()[[0, 0]], 1.0);
        assert_spectrum(&m, &[1.0], 0.0);
    }

    #[test]
    fn two_agents_closed_form() {
        let m = InteractionMatrix::fully_connected(2, 0.5).unwrap();
        let expected = array![[0.75, 0.25], [0.25, 0.75]];
        for j in 0..2 {
            for l in 0..2 {
                assert_abs_diff_eq!(m.weights()[[j, l]], expected[[j, l]], epsilon = 1e-15);
            }
        }
        assert_spectrum(&m, &[1.0, 0.5], 1e-12);
    }

    #[test]
    fn fully_connected_rejects_bad_rho() {
        assert!(InteractionMatrix::fully_connected(3, 0.0).is_err());
        assert!(InteractionMatrix::fully_connected(3, 1.0).is_err());
        assert!(InteractionMatrix::fully_connected(3, -0.2).is_err());
    }

    #[test]
    fn ring_spectrum_matches_circulant_closed_form() {
        let m = InteractionMatrix::ring(4, 0.2).unwrap();
        assert_spectrum(&m, &[1.0, 0.6, 0.6, 0.2], 1e-10);
        assert!(m.validate().all_ok());

        // lambda_min = 1 - 2 beta + 2 beta cos(pi) for even N.
        let m6 = InteractionMatrix::ring(6, 0.1).unwrap();
        assert_abs_diff_eq!(*m6.eigenvalues().last().unwrap(), 0.6, epsilon = 1e-10);
    }

    #[test]
    fn ring_rows_sum_to_one() {
        let m = InteractionMatrix::ring(3, 0.2).unwrap();
        for j in 0..3 {
            assert_abs_diff_eq!(m.weights().row(j).sum(), 1.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn ring_closed_form_holds_up_to_64_agents() {
        for n in [3usize, 5, 8, 16, 33, 64] {
            let beta = 0.2;
            let m = InteractionMatrix::ring(n, beta).unwrap();
            let mut expected: Vec<f64> = (0..n)
                .map(|k| 1.0 - 2.0 * beta + 2.0 * beta * (2.0 * std::f64::consts::PI * k as f64 / n as f64).cos())
                .collect();
            expected.sort_by(|a, b| b.partial_cmp(a).unwrap());
            assert_spectrum(&m, &expected, 1e-10);
        }
    }

    #[test]
    fn ring_rejects_bad_parameters() {
        assert!(InteractionMatrix::ring(2, 0.2).is_err());
        assert!(InteractionMatrix::ring(4, 0.25).is_err());
        assert!(InteractionMatrix::ring(4, 0.0).is_err());
    }

    #[test]
    fn metropolis_path_is_doubly_stochastic() {
        let m = InteractionMatrix::from_edges(3, &[(0, 1), (1, 2)], 0.5).unwrap();
        let report = m.validate();
        assert!(report.doubly_stochastic, "{:?}", report.messages);
        assert!(report.symmetric);
        assert!(report.connected);
    }

    #[test]
    fn disconnected_graph_reports_not_connected() {
        let m = InteractionMatrix::from_edges(4, &[(0, 1), (2, 3)], 0.5).unwrap();
        let report = m.validate();
        assert!(report.doubly_stochastic);
        assert!(!report.connected);
    }

    #[test]
    fn star_graph_mixes_and_stays_positive() {
        let m = InteractionMatrix::from_edges(4, &[(0, 1), (0, 2), (0, 3)], 0.8).unwrap();
        let report = m.validate();
        assert!(report.all_ok(), "{:?}", report.messages);
        let s = m.spectral_summary();
        assert!(s.lambda2 < 1.0);
        assert!(s.lambda_n > 0.0);
        // Metropolis star has eigenvalues {1, 0.75, 0.75, 0}; the 0.8 blend
        // maps them to {1, 0.8, 0.8, 0.2}.
        assert_spectrum(&m, &[1.0, 0.8, 0.8, 0.2], 1e-10);
    }

    #[test]
    fn from_edges_rejects_bad_input() {
        assert!(InteractionMatrix::from_edges(3, &[(0, 3)], 0.5).is_err());
        assert!(InteractionMatrix::from_edges(3, &[(1, 1)], 0.5).is_err());
    }

    #[test]
    fn identity_is_disconnected() {
        let report = InteractionMatrix::identity(3).unwrap().validate();
        assert!(report.doubly_stochastic);
        assert!(report.symmetric);
        assert!(!report.connected);
        assert!(report.positive_definite);
    }

    #[test]
    fn uniform_override_fails_positive_definiteness() {
        let m = InteractionMatrix::fully_connected_uniform(5).unwrap();
        let report = m.validate();
        assert!(report.doubly_stochastic);
        assert!(!report.positive_definite);
    }

    #[test]
    fn spectral_summary_values() {
        let full = InteractionMatrix::fully_connected(5, 0.9).unwrap().spectral_summary();
        assert_abs_diff_eq!(full.lambda2, 0.1, epsilon = 1e-10);
        assert_abs_diff_eq!(full.lambda_n, 0.1, epsilon = 1e-10);
        assert_abs_diff_eq!(full.spectral_gap, 0.9, epsilon = 1e-10);
        assert!(!full.degenerate);

        let ring = InteractionMatrix::ring(4, 0.2).unwrap().spectral_summary();
        assert_abs_diff_eq!(ring.lambda2, 0.6, epsilon = 1e-10);
        assert_abs_diff_eq!(ring.lambda_n, 0.2, epsilon = 1e-10);

        let single = InteractionMatrix::fully_connected(1, 0.5).unwrap().spectral_summary();
        assert!(single.degenerate);
        assert_eq!(single.spectral_gap, 0.0);

        let id2 = InteractionMatrix::identity(2).unwrap().spectral_summary();
        assert!(id2.degenerate);
        assert_abs_diff_eq!(id2.spectral_gap, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn consensus_vectors_are_fixed_points() {
        for m in [
            InteractionMatrix::fully_connected(5, 0.9).unwrap(),
            InteractionMatrix::ring(7, 0.15).unwrap(),
            InteractionMatrix::from_edges(4, &[(0, 1), (0, 2), (0, 3)], 0.8).unwrap(),
        ] {
            let n = m.n_agents();
            let x = Array2::from_elem((n, 3), 2.75);
            let mixed = m.mix(&x);
            for v in mixed.iter().zip(x.iter()) {
                assert_abs_diff_eq!(v.0, v.1, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn leading_eigenvector_is_uniform() {
        let m = InteractionMatrix::ring(6, 0.2).unwrap();
        let n = m.n_agents();
        let dm = nalgebra::DMatrix::from_fn(n, n, |r, c| m.weights()[[r, c]]);
        let eig = nalgebra::SymmetricEigen::new(dm);
        let (idx, _) = eig
            .eigenvalues
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap();
        let v = eig.eigenvectors.column(idx);
        let expected = 1.0 / (n as f64).sqrt();
        let sign = v[0].signum();
        for j in 0..n {
            assert_abs_diff_eq!(sign * v[j], expected, epsilon = 1e-8);
        }
    }

    #[test]
    fn json_round_trip_preserves_weights_and_spectrum() {
        let m = InteractionMatrix::ring(5, 0.2).unwrap();
        let text = m.to_json().unwrap();
        let back = InteractionMatrix::from_json(&text).unwrap();
        assert_eq!(back.n_agents(), 5);
        assert_eq!(back.edges(), m.edges());
        for (a, b) in back.weights().iter().zip(m.weights().iter()) {
            assert_eq!(a, b);
        }
        for (a, b) in back.eigenvalues().iter().zip(m.eigenvalues()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn descriptor_parsing() {
        let full = InteractionMatrix::parse_descriptor("full:rho=0.5", 2).unwrap();
        assert_abs_diff_eq!(full.weights()[[0, 1]], 0.25, epsilon = 1e-15);
        let ring = InteractionMatrix::parse_descriptor("ring:beta=0.1", 6).unwrap();
        assert_abs_diff_eq!(ring.weights()[[0, 0]], 0.8, epsilon = 1e-15);
        assert!(InteractionMatrix::parse_descriptor("torus:beta=1", 4).is_err());
        assert!(InteractionMatrix::parse_descriptor("ring:beta=zero", 4).is_err());
        let uniform = InteractionMatrix::parse_descriptor("full:uniform", 4).unwrap();
        assert!(!uniform.validate().positive_definite);
    }
}
