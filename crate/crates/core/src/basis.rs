//! Legendre-Gauss-Lobatto nodal basis on [-1, 1].
//!
//! Collocating interpolation and quadrature on the LGL nodes gives a diagonal
//! mass matrix `M = diag(w)` and a derivative matrix `D` that together satisfy
//! the summation-by-parts property
//!
//! ```text
//!     Q = M D,    Q + Q^T = B = diag(-1, 0, ..., 0, 1).
//! ```
//!
//! Everything downstream (telescoping flux differencing, split-form identities,
//! discrete conservation) rests on that property and on the rows of `D`
//! summing to zero.

use crate::error::{Error, Result};

pub const MAX_DEGREE: usize = 20;

const NEWTON_TOL: f64 = 1e-15;
const NEWTON_MAX_ITER: usize = 100;

/// LGL nodes, weights and SBP operators for polynomial degree `N`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyBasis {
    degree: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    /// Row-major `(N+1) x (N+1)`.
    deriv: Vec<f64>,
    qmat: Vec<f64>,
}

impl PolyBasis {
    /// Builds the basis for `1 <= degree <= 20`.
    pub fn new(degree: usize) -> Result<Self> {
        if !(1..=MAX_DEGREE).contains(&degree) {
            return Err(Error::Config(format!(
                "polynomial degree must lie in 1..={MAX_DEGREE}, got {degree}"
            )));
        }
        let nodes = lgl_nodes(degree);
        let weights = nodes
            .iter()
            .map(|&x| {
                let (p, _) = legendre_and_derivative(degree, x);
                let n = degree as f64;
                2.0 / (n * (n + 1.0) * p * p)
            })
            .collect::<Vec<_>>();
        let deriv = barycentric_derivative_matrix(&nodes);
        let n1 = degree + 1;
        let mut qmat = vec![0.0; n1 * n1];
        for i in 0..n1 {
            for j in 0..n1 {
                qmat[i * n1 + j] = weights[i] * deriv[i * n1 + j];
            }
        }
        Ok(Self {
            degree,
            nodes,
            weights,
            deriv,
            qmat,
        })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Number of nodes per direction, `N + 1`.
    pub fn num_nodes(&self) -> usize {
        self.degree + 1
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `D_ij = l_j'(xi_i)`.
    #[inline]
    pub fn d(&self, i: usize, j: usize) -> f64 {
        self.deriv[i * (self.degree + 1) + j]
    }

    /// Row-major derivative matrix.
    pub fn deriv_matrix(&self) -> &[f64] {
        &self.deriv
    }

    #[inline]
    pub fn q(&self, i: usize, j: usize) -> f64 {
        self.qmat[i * (self.degree + 1) + j]
    }

    /// Row-major `Q = M D`.
    pub fn q_matrix(&self) -> &[f64] {
        &self.qmat
    }

    /// Diagonal of the boundary operator `B`.
    pub fn b_diag(&self) -> Vec<f64> {
        let mut b = vec![0.0; self.degree + 1];
        b[0] = -1.0;
        b[self.degree] = 1.0;
        b
    }

    /// `D * values`, the nodal derivative of the interpolant.
    pub fn differentiate(&self, values: &[f64]) -> Vec<f64> {
        let n1 = self.num_nodes();
        assert_eq!(values.len(), n1, "expected {n1} nodal values");
        (0..n1)
            .map(|i| {
                self.deriv[i * n1..(i + 1) * n1]
                    .iter()
                    .zip(values)
                    .map(|(d, v)| d * v)
                    .sum()
            })
            .collect()
    }

    /// LGL quadrature of the interpolant over [-1, 1].
    pub fn integrate(&self, values: &[f64]) -> f64 {
        assert_eq!(
            values.len(),
            self.num_nodes(),
            "expected {} nodal values",
            self.num_nodes()
        );
        self.weights.iter().zip(values).map(|(w, v)| w * v).sum()
    }

    /// Evaluates the Lagrange interpolant of `values` at `x`.
    pub fn interpolate(&self, values: &[f64], x: f64) -> f64 {
        assert_eq!(values.len(), self.num_nodes());
        let bary = barycentric_weights(&self.nodes);
        let mut num = 0.0;
        let mut den = 0.0;
        for ((&xj, &wj), &fj) in self.nodes.iter().zip(&bary).zip(values) {
            let dx = x - xj;
            if dx == 0.0 {
                return fj;
            }
            let t = wj / dx;
            num += t * fj;
            den += t;
        }
        num / den
    }
}

/// Legendre polynomial `P_n(x)` and its derivative.
pub fn legendre_and_derivative(n: usize, x: f64) -> (f64, f64) {
    match n {
        0 => (1.0, 0.0),
        1 => (x, 1.0),
        _ => {
            let mut p_prev = 1.0;
            let mut p = x;
            let mut dp_prev = 0.0;
            let mut dp = 1.0;
            for k in 1..n {
                let kf = k as f64;
                let p_next = ((2.0 * kf + 1.0) * x * p - kf * p_prev) / (kf + 1.0);
                let dp_next = dp_prev + (2.0 * kf + 1.0) * p;
                p_prev = p;
                p = p_next;
                dp_prev = dp;
                dp = dp_next;
            }
            (p, dp)
        }
    }
}

/// Interior LGL nodes are the roots of `P_N'`. Newton on `P_N'` with the
/// second derivative taken from Legendre's equation, started from the
/// Chebyshev-Gauss-Lobatto points. Only the left half is iterated; the right
/// half is mirrored so the node set is exactly symmetric.
fn lgl_nodes(degree: usize) -> Vec<f64> {
    let n = degree;
    let nf = n as f64;
    let mut nodes = vec![0.0; n + 1];
    nodes[0] = -1.0;
    nodes[n] = 1.0;
    for j in 1..=(n - 1) / 2 {
        let mut x = -(std::f64::consts::PI * j as f64 / nf).cos();
        for _ in 0..NEWTON_MAX_ITER {
            let (p, dp) = legendre_and_derivative(n, x);
            let ddp = (2.0 * x * dp - nf * (nf + 1.0) * p) / (1.0 - x * x);
            let delta = dp / ddp;
            x -= delta;
            if delta.abs() <= NEWTON_TOL * x.abs().max(1.0) {
                break;
            }
        }
        nodes[j] = x;
        nodes[n - j] = -x;
    }
    if n % 2 == 0 {
        nodes[n / 2] = 0.0;
    }
    nodes
}

fn barycentric_weights(nodes: &[f64]) -> Vec<f64> {
    nodes
        .iter()
        .enumerate()
        .map(|(j, &xj)| {
            let prod: f64 = nodes
                .iter()
                .enumerate()
                .filter(|&(k, _)| k != j)
                .map(|(_, &xk)| xj - xk)
                .product();
            1.0 / prod
        })
        .collect()
}

/// Off-diagonal entries from barycentric weights, diagonal by the negative
/// sum so that each row annihilates constants.
fn barycentric_derivative_matrix(nodes: &[f64]) -> Vec<f64> {
    let n1 = nodes.len();
    let w = barycentric_weights(nodes);
    let mut d = vec![0.0; n1 * n1];
    for i in 0..n1 {
        let mut diag = 0.0;
        for j in 0..n1 {
            if i != j {
                let dij = (w[j] / w[i]) / (nodes[i] - nodes[j]);
                d[i * n1 + j] = dij;
                diag -= dij;
            }
        }
        d[i * n1 + i] = diag;
    }
    d
}
