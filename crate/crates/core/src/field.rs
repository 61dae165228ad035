//! Nodal storage and the discretization context (basis + mesh).

use std::ops::{Index, IndexMut};

use crate::basis::PolyBasis;
use crate::error::{NodeLocation, Result};
use crate::euler::{primitive_from_conserved, EulerState, GasModel, PrimState, NVARS};
use crate::mesh::CartesianMesh;

/// Basis and mesh of a tensor-product DGSEM discretization.
#[derive(Debug, Clone, PartialEq)]
pub struct Discretization {
    pub basis: PolyBasis,
    pub mesh: CartesianMesh,
}

impl Discretization {
    pub fn new(basis: PolyBasis, mesh: CartesianMesh) -> Self {
        Self { basis, mesh }
    }

    /// Nodes per direction.
    pub fn n1(&self) -> usize {
        self.basis.num_nodes()
    }

    pub fn nodes_per_element(&self) -> usize {
        self.n1().pow(3)
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes_per_element() * self.mesh.num_elements()
    }

    #[inline]
    pub fn local_index(&self, i: usize, j: usize, k: usize) -> usize {
        let n1 = self.n1();
        i + n1 * (j + n1 * k)
    }

    #[inline]
    pub fn local_coords(&self, local: usize) -> (usize, usize, usize) {
        let n1 = self.n1();
        (local % n1, (local / n1) % n1, local / (n1 * n1))
    }

    /// Physical coordinates of node `(i, j, k)` of `element`.
    pub fn node_position(&self, element: usize, i: usize, j: usize, k: usize) -> [f64; 3] {
        let x = self.basis.nodes();
        self.mesh.map_point(element, [x[i], x[j], x[k]])
    }

    /// Tensor-product quadrature weight of a local node, without the Jacobian.
    #[inline]
    pub fn node_weight(&self, local: usize) -> f64 {
        let (i, j, k) = self.local_coords(local);
        let w = self.basis.weights();
        w[i] * w[j] * w[k]
    }

    /// Samples `init` at every node.
    pub fn interpolate<F>(&self, init: F) -> Field
    where
        F: Fn([f64; 3]) -> EulerState,
    {
        let mut field = Field::zeros(self);
        let npe = self.nodes_per_element();
        for e in 0..self.mesh.num_elements() {
            for local in 0..npe {
                let (i, j, k) = self.local_coords(local);
                field.data[e * npe + local] = init(self.node_position(e, i, j, k)).0;
            }
        }
        field
    }
}

/// Conserved variables at every node, element-major with `i` fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    nodes_per_element: usize,
    data: Vec<[f64; NVARS]>,
}

impl Field {
    pub fn zeros(disc: &Discretization) -> Self {
        Self {
            nodes_per_element: disc.nodes_per_element(),
            data: vec![[0.0; NVARS]; disc.num_nodes()],
        }
    }

    pub fn filled(disc: &Discretization, state: EulerState) -> Self {
        Self {
            nodes_per_element: disc.nodes_per_element(),
            data: vec![state.0; disc.num_nodes()],
        }
    }

    pub fn zeros_like(other: &Field) -> Self {
        Self {
            nodes_per_element: other.nodes_per_element,
            data: vec![[0.0; NVARS]; other.data.len()],
        }
    }

    pub fn nodes_per_element(&self) -> usize {
        self.nodes_per_element
    }

    pub fn num_elements(&self) -> usize {
        self.data.len() / self.nodes_per_element
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn as_slice(&self) -> &[[f64; NVARS]] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [[f64; NVARS]] {
        &mut self.data
    }

    pub fn element(&self, e: usize) -> &[[f64; NVARS]] {
        &self.data[e * self.nodes_per_element..(e + 1) * self.nodes_per_element]
    }

    pub fn state(&self, index: usize) -> EulerState {
        EulerState(self.data[index])
    }

    pub fn location(&self, index: usize, n1: usize) -> NodeLocation {
        let local = index % self.nodes_per_element;
        NodeLocation {
            element: index / self.nodes_per_element,
            node: (local % n1, (local / n1) % n1, local / (n1 * n1)),
        }
    }

    /// Primitive states of every node; the first invalid node aborts with its
    /// location attached.
    pub fn primitives(&self, gas: GasModel, n1: usize, time: f64) -> Result<Vec<PrimState>> {
        self.data
            .iter()
            .enumerate()
            .map(|(idx, u)| {
                primitive_from_conserved(&EulerState(*u), gas)
                    .map_err(|e| e.at(self.location(idx, n1), time))
            })
            .collect()
    }

    /// `self += alpha * other`
    pub fn axpy(&mut self, alpha: f64, other: &Field) {
        assert_eq!(self.data.len(), other.data.len());
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            for k in 0..NVARS {
                a[k] += alpha * b[k];
            }
        }
    }

    /// `self = beta * self + other`
    pub fn scale_add(&mut self, beta: f64, other: &Field) {
        assert_eq!(self.data.len(), other.data.len());
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            for k in 0..NVARS {
                a[k] = beta * a[k] + b[k];
            }
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data
            .iter()
            .flat_map(|u| u.iter())
            .fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data
            .iter()
            .flat_map(|u| u.iter())
            .all(|v| v.is_finite())
    }
}

impl Index<usize> for Field {
    type Output = [f64; NVARS];

    fn index(&self, index: usize) -> &Self::Output {
        &self.data[index]
    }
}

impl IndexMut<usize> for Field {
    fn index_mut(&mut self, index: usize) -> &mut Self::Output {
        &mut self.data[index]
    }
}
