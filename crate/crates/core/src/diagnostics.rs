//! Quadrature integrals and derived flow statistics.
//!
//! All reductions are computed per element in parallel and summed
//! sequentially in element order, so results are bit-reproducible.

use rayon::prelude::*;

use crate::error::Result;
use crate::euler::{EulerState, GasModel, PrimState, NVARS};
use crate::field::{Discretization, Field};

/// Enstrophy below which the numerical viscosity is undefined.
pub const SIGMA_THRESHOLD: f64 = 1e-12;

/// One row of a simulation time series.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub mass: f64,
    pub mom_x: f64,
    pub mom_y: f64,
    pub mom_z: f64,
    pub energy: f64,
    pub kinetic_energy: f64,
    pub entropy_total: f64,
    pub enstrophy: f64,
    /// `-d kappa / dt`, positive when kinetic energy decays.
    pub ke_dissipation_rate: f64,
    pub mu_num: Option<f64>,
    /// Per-variable L2 error, for cases with an exact solution.
    pub l2_error: Option<[f64; NVARS]>,
}

/// Domain integrals of the conserved and derived densities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Totals {
    pub mass: f64,
    pub momentum: [f64; 3],
    pub energy: f64,
    pub kinetic_energy: f64,
    /// Integral of `S = -rho s / (gamma - 1)`.
    pub entropy: f64,
}

impl Totals {
    pub fn conserved(&self) -> [f64; NVARS] {
        [
            self.mass,
            self.momentum[0],
            self.momentum[1],
            self.momentum[2],
            self.energy,
        ]
    }
}

/// `J sum_e sum_nodes w f(e, local)`, in fixed order.
fn quadrature<const K: usize, F>(disc: &Discretization, f: F) -> [f64; K]
where
    F: Fn(usize, usize) -> [f64; K] + Sync,
{
    let npe = disc.nodes_per_element();
    let partial: Vec<[f64; K]> = (0..disc.mesh.num_elements())
        .into_par_iter()
        .map(|e| {
            let mut acc = [0.0; K];
            for local in 0..npe {
                let w = disc.node_weight(local);
                let v = f(e, local);
                for k in 0..K {
                    acc[k] += w * v[k];
                }
            }
            acc
        })
        .collect();
    let jac = disc.mesh.jacobian();
    let mut total = [0.0; K];
    for p in &partial {
        for k in 0..K {
            total[k] += p[k];
        }
    }
    total.map(|v| jac * v)
}

pub fn total_quantities(disc: &Discretization, field: &Field, gas: GasModel) -> Result<Totals> {
    let prims = field.primitives(gas, disc.n1(), f64::NAN)?;
    let npe = disc.nodes_per_element();
    let [mass, mx, my, mz, energy, kinetic_energy, entropy] = quadrature(disc, |e, l| {
        let u = &field[e * npe + l];
        let p = &prims[e * npe + l];
        [
            u[0],
            u[1],
            u[2],
            u[3],
            u[4],
            0.5 * p.rho * p.speed_squared(),
            -p.rho * p.specific_entropy(gas) / (gas.gamma - 1.0),
        ]
    });
    Ok(Totals {
        mass,
        momentum: [mx, my, mz],
        energy,
        kinetic_energy,
        entropy,
    })
}

/// `sum |rho u_c|` over all nodes and components, used to normalise momentum
/// drift when the net momentum vanishes.
pub fn momentum_l1(disc: &Discretization, field: &Field) -> f64 {
    let npe = disc.nodes_per_element();
    let [m] = quadrature(disc, |e, l| {
        let u = &field[e * npe + l];
        [u[1].abs() + u[2].abs() + u[3].abs()]
    });
    m
}

/// Nodal vorticity from broken (element-local) collocation derivatives.
pub fn vorticity(disc: &Discretization, prims: &[PrimState], element: usize) -> Vec<[f64; 3]> {
    let n1 = disc.n1();
    let npe = disc.nodes_per_element();
    let sizes = disc.mesh.sizes();
    let base = element * npe;
    let vel = |l: usize| prims[base + l].velocity();
    let mut out = vec![[0.0; 3]; npe];
    for local in 0..npe {
        let (i, j, k) = disc.local_coords(local);
        // grad[d][c] = d u_c / d x_d
        let mut grad = [[0.0; 3]; 3];
        for m in 0..n1 {
            let lines = [
                (disc.basis.d(i, m), disc.local_index(m, j, k)),
                (disc.basis.d(j, m), disc.local_index(i, m, k)),
                (disc.basis.d(k, m), disc.local_index(i, j, m)),
            ];
            for (d, (dm, idx)) in lines.into_iter().enumerate() {
                let v = vel(idx);
                for c in 0..3 {
                    grad[d][c] += dm * v[c];
                }
            }
        }
        for d in 0..3 {
            for c in 0..3 {
                grad[d][c] *= 2.0 / sizes[d];
            }
        }
        out[local] = [
            grad[1][2] - grad[2][1],
            grad[2][0] - grad[0][2],
            grad[0][1] - grad[1][0],
        ];
    }
    out
}

/// `sigma = (1 / |Omega|) int rho |omega|^2 / 2`.
pub fn enstrophy(disc: &Discretization, field: &Field, gas: GasModel) -> Result<f64> {
    let prims = field.primitives(gas, disc.n1(), f64::NAN)?;
    let npe = disc.nodes_per_element();
    let partial: Vec<f64> = (0..disc.mesh.num_elements())
        .into_par_iter()
        .map(|e| {
            let omega = vorticity(disc, &prims, e);
            (0..npe)
                .map(|l| {
                    let w = omega[l];
                    disc.node_weight(l)
                        * 0.5
                        * prims[e * npe + l].rho
                        * (w[0] * w[0] + w[1] * w[1] + w[2] * w[2])
                })
                .sum::<f64>()
        })
        .collect();
    Ok(disc.mesh.jacobian() * partial.iter().sum::<f64>() / disc.mesh.domain_volume())
}

/// `-d kappa / dt` from the chain rule applied to the semi-discrete rate.
pub fn ke_dissipation_rate(
    disc: &Discretization,
    field: &Field,
    rate: &Field,
    gas: GasModel,
) -> Result<f64> {
    let prims = field.primitives(gas, disc.n1(), f64::NAN)?;
    let npe = disc.nodes_per_element();
    let [dk] = quadrature(disc, |e, l| {
        let p = &prims[e * npe + l];
        let r = &rate[e * npe + l];
        [-0.5 * p.speed_squared() * r[0] + p.u * r[1] + p.v * r[2] + p.w * r[3]]
    });
    Ok(-dk)
}

/// `mu_num = (-d kappa / dt) / (2 sigma)`, undefined for vanishing enstrophy.
pub fn numerical_viscosity(rate: f64, sigma: f64) -> Option<f64> {
    (sigma > SIGMA_THRESHOLD).then(|| rate / (2.0 * sigma))
}

/// Discrete L2 error per conserved variable against `exact(x, t)`.
pub fn discrete_l2_error<F>(disc: &Discretization, field: &Field, exact: F, t: f64) -> [f64; NVARS]
where
    F: Fn([f64; 3], f64) -> EulerState + Sync,
{
    let npe = disc.nodes_per_element();
    let sq = quadrature(disc, |e, l| {
        let (i, j, k) = disc.local_coords(l);
        let ex = exact(disc.node_position(e, i, j, k), t).0;
        let u = &field[e * npe + l];
        let mut out = [0.0; NVARS];
        for v in 0..NVARS {
            out[v] = (u[v] - ex[v]).powi(2);
        }
        out
    });
    sq.map(f64::sqrt)
}

/// Full diagnostics row at time `t`, given the rate `dU/dt` at that instant.
pub fn record(
    disc: &Discretization,
    field: &Field,
    rate: &Field,
    gas: GasModel,
    t: f64,
) -> Result<DiagnosticsRecord> {
    let totals = total_quantities(disc, field, gas)?;
    let sigma = enstrophy(disc, field, gas)?;
    let diss = ke_dissipation_rate(disc, field, rate, gas)?;
    Ok(DiagnosticsRecord {
        t,
        mass: totals.mass,
        mom_x: totals.momentum[0],
        mom_y: totals.momentum[1],
        mom_z: totals.momentum[2],
        energy: totals.energy,
        kinetic_energy: totals.kinetic_energy,
        entropy_total: totals.entropy,
        enstrophy: sigma,
        ke_dissipation_rate: diss,
        mu_num: numerical_viscosity(diss, sigma),
        l2_error: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::PolyBasis;
    use crate::cases::{tgv_initial_condition, TgvVariant};
    use crate::euler::conserved_from_primitive;
    use crate::flux::{FluxScheme, Stabilization};
    use crate::mesh::CartesianMesh;
    use crate::solver::{compute_residual, SemidiscreteConfig};
    use crate::time::lsrk_step;
    use std::f64::consts::PI;

    fn tgv(n: usize, elems: usize) -> (Discretization, Field) {
        let gas = GasModel::default();
        let disc = Discretization::new(
            PolyBasis::new(n).unwrap(),
            CartesianMesh::cube(elems, 0.0, 2.0 * PI).unwrap(),
        );
        let field = disc.interpolate(|x| tgv_initial_condition(x, TgvVariant::Low, gas));
        (disc, field)
    }

    #[test]
    fn uniform_totals() {
        let gas = GasModel::default();
        let disc = Discretization::new(
            PolyBasis::new(2).unwrap(),
            CartesianMesh::cube(2, 0.0, 2.0 * PI).unwrap(),
        );
        let field = Field::filled(&disc, EulerState::new(1.0, 0.0, 0.0, 0.0, 1.0 / 0.4));
        let t = total_quantities(&disc, &field, gas).unwrap();
        assert!((t.mass - (2.0 * PI).powi(3)).abs() < 1e-11);
        assert!((t.mass - 248.05).abs() < 0.01);
        assert_eq!(t.kinetic_energy, 0.0);
        assert!(t.entropy.abs() < 1e-12);
        assert_eq!(enstrophy(&disc, &field, gas).unwrap(), 0.0);
    }

    #[test]
    fn rigid_rotation_enstrophy() {
        let gas = GasModel::default();
        let disc = Discretization::new(
            PolyBasis::new(3).unwrap(),
            CartesianMesh::cube(1, -1.0, 1.0).unwrap(),
        );
        let field = disc.interpolate(|x| {
            conserved_from_primitive(&PrimState::new(1.0, -x[1], x[0], 0.0, 10.0), gas)
        });
        let sigma = enstrophy(&disc, &field, gas).unwrap();
        assert!((sigma - 2.0).abs() < 1e-12, "{sigma}");
    }

    #[test]
    fn tgv_initial_enstrophy() {
        let (disc, field) = tgv(7, 4);
        let sigma = enstrophy(&disc, &field, GasModel::default()).unwrap();
        assert!((sigma - 0.375).abs() < 0.01 * 0.375, "{sigma}");
    }

    #[test]
    fn viscosity_guard() {
        assert_eq!(numerical_viscosity(0.0, 1.0), Some(0.0));
        assert_eq!(numerical_viscosity(2.0, 1.0), Some(1.0));
        assert_eq!(numerical_viscosity(2.0, 1e-14), None);
    }

    #[test]
    fn zero_rate_gives_zero_dissipation() {
        let (disc, field) = tgv(2, 2);
        let zero = Field::zeros_like(&field);
        assert_eq!(
            ke_dissipation_rate(&disc, &field, &zero, GasModel::default()).unwrap(),
            0.0
        );
    }

    #[test]
    fn kg_tgv_initial_dissipation_vanishes() {
        let gas = GasModel::default();
        let (disc, field) = tgv(3, 2);
        let cfg = SemidiscreteConfig::new(FluxScheme::Kg, Stabilization::None, gas);
        let rate = compute_residual(&disc, &field, &cfg, 0.0).unwrap();
        let diss = ke_dissipation_rate(&disc, &field, &rate, gas).unwrap();
        let kappa = total_quantities(&disc, &field, gas).unwrap().kinetic_energy;
        assert!(diss.abs() < 1e-9 * kappa, "{diss} vs {kappa}");
    }

    #[test]
    fn dissipation_matches_time_difference() {
        let gas = GasModel::default();
        let (disc, field) = tgv(3, 2);
        let cfg = SemidiscreteConfig::new(FluxScheme::Kg, Stabilization::Llf, gas);
        let rate = |u: &Field, t: f64| compute_residual(&disc, u, &cfg, t);
        // advance to a state with nonzero dissipation first
        let mut u = field;
        for n in 0..20 {
            lsrk_step(&mut u, n as f64 * 0.02, 0.02, rate).unwrap();
        }
        let t0 = 0.4;
        let inst = ke_dissipation_rate(&disc, &u, &rate(&u, t0).unwrap(), gas).unwrap();
        let kappa_at = |dt: f64| {
            let mut v = u.clone();
            lsrk_step(&mut v, t0, dt, rate).unwrap();
            total_quantities(&disc, &v, gas).unwrap().kinetic_energy
        };
        let mut errs = Vec::new();
        for h in [2e-3, 1e-3] {
            let fd = -(kappa_at(h) - kappa_at(-h)) / (2.0 * h);
            errs.push((fd - inst).abs());
        }
        assert!(
            errs[1] < 1e-10 || errs[0] / errs[1] > 3.5,
            "{errs:?} vs {inst}"
        );
        assert!(errs[1] < 1e-4 * inst.abs(), "{errs:?} vs {inst}");
    }

    #[test]
    fn l2_error_of_interpolant_is_zero() {
        let gas = GasModel::default();
        let disc = Discretization::new(
            PolyBasis::new(3).unwrap(),
            CartesianMesh::cube(2, -1.0, 1.0).unwrap(),
        );
        let exact = |x: [f64; 3], t: f64| crate::cases::manufactured_solution(x, t, gas);
        let field = disc.interpolate(|x| exact(x, 0.3));
        let err = discrete_l2_error(&disc, &field, exact, 0.3);
        assert!(err.iter().all(|&e| e < 1e-14));
        let err = discrete_l2_error(&disc, &field, exact, 0.0);
        assert!(err[0] > 1e-3);
    }
}
