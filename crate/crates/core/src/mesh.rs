//! Uniform periodic Cartesian hexahedral mesh.

use crate::error::{Error, Result};
use crate::euler::Axis;

/// Element face, ordered -x, +x, -y, +y, -z, +z.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Face {
    XMinus = 0,
    XPlus = 1,
    YMinus = 2,
    YPlus = 3,
    ZMinus = 4,
    ZPlus = 5,
}

impl Face {
    pub const ALL: [Face; 6] = [
        Face::XMinus,
        Face::XPlus,
        Face::YMinus,
        Face::YPlus,
        Face::ZMinus,
        Face::ZPlus,
    ];

    pub fn from_id(id: usize) -> Option<Face> {
        Face::ALL.get(id).copied()
    }

    pub fn axis(self) -> Axis {
        Axis::ALL[self as usize / 2]
    }

    pub fn is_plus(self) -> bool {
        self as usize % 2 == 1
    }

    pub fn opposite(self) -> Face {
        Face::ALL[(self as usize) ^ 1]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CartesianMesh {
    counts: [usize; 3],
    lower: [f64; 3],
    upper: [f64; 3],
    sizes: [f64; 3],
}

impl CartesianMesh {
    /// Uniform `nx x ny x nz` partition of `bounds[d] = (lo, hi)`.
    pub fn new(counts: [usize; 3], bounds: [(f64, f64); 3]) -> Result<Self> {
        let mut lower = [0.0; 3];
        let mut upper = [0.0; 3];
        let mut sizes = [0.0; 3];
        for d in 0..3 {
            if counts[d] == 0 {
                return Err(Error::Config(format!(
                    "axis {d} needs at least one element"
                )));
            }
            let (lo, hi) = bounds[d];
            if !(hi > lo) || !lo.is_finite() || !hi.is_finite() {
                return Err(Error::Config(format!(
                    "degenerate interval [{lo}, {hi}] on axis {d}"
                )));
            }
            lower[d] = lo;
            upper[d] = hi;
            sizes[d] = (hi - lo) / counts[d] as f64;
        }
        Ok(Self {
            counts,
            lower,
            upper,
            sizes,
        })
    }

    /// `n^3` elements on the cube `[lo, hi]^3`.
    pub fn cube(n: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::new([n; 3], [(lo, hi); 3])
    }

    pub fn counts(&self) -> [usize; 3] {
        self.counts
    }

    pub fn num_elements(&self) -> usize {
        self.counts.iter().product()
    }

    pub fn lower(&self) -> [f64; 3] {
        self.lower
    }

    pub fn upper(&self) -> [f64; 3] {
        self.upper
    }

    /// Element side lengths.
    pub fn sizes(&self) -> [f64; 3] {
        self.sizes
    }

    /// `J = dx dy dz / 8`
    pub fn jacobian(&self) -> f64 {
        0.125 * self.sizes[0] * self.sizes[1] * self.sizes[2]
    }

    /// `(X_xi, Y_eta, Z_zeta) = (dx/2, dy/2, dz/2)`
    pub fn metric(&self) -> [f64; 3] {
        [
            0.5 * self.sizes[0],
            0.5 * self.sizes[1],
            0.5 * self.sizes[2],
        ]
    }

    pub fn domain_volume(&self) -> f64 {
        (0..3).map(|d| self.upper[d] - self.lower[d]).product()
    }

    pub fn element_index(&self, ijk: [usize; 3]) -> usize {
        ijk[0] + self.counts[0] * (ijk[1] + self.counts[1] * ijk[2])
    }

    pub fn element_coords(&self, element: usize) -> [usize; 3] {
        let [nx, ny, _] = self.counts;
        [element % nx, (element / nx) % ny, element / (nx * ny)]
    }

    /// Periodic neighbor across `face`.
    pub fn neighbor(&self, element: usize, face: Face) -> usize {
        let mut ijk = self.element_coords(element);
        let d = face.axis().index();
        let n = self.counts[d];
        ijk[d] = if face.is_plus() {
            (ijk[d] + 1) % n
        } else {
            (ijk[d] + n - 1) % n
        };
        self.element_index(ijk)
    }

    /// Neighbor by integer face id in `0..6`.
    pub fn neighbor_by_id(&self, element: usize, face_id: usize) -> usize {
        let face = Face::from_id(face_id).unwrap_or_else(|| panic!("invalid face id {face_id}"));
        self.neighbor(element, face)
    }

    /// Physical coordinates of reference point `xi in [-1, 1]^3` inside `element`.
    pub fn map_point(&self, element: usize, xi: [f64; 3]) -> [f64; 3] {
        let ijk = self.element_coords(element);
        let mut x = [0.0; 3];
        for d in 0..3 {
            let left = self.lower[d] + ijk[d] as f64 * self.sizes[d];
            x[d] = left + 0.5 * (xi[d] + 1.0) * self.sizes[d];
        }
        x
    }
}
