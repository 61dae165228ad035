//! Strong-form DGSEM residual with flux-differencing volume terms.
//!
//! For node `(i, j, k)` of an element the semi-discrete equation reads
//!
//! ```text
//! dU/dt = -(2/dx) [ 2 sum_m D_im F#(U_ijk, U_mjk)
//!                   + (delta_iN / w_N)(F*_+ - F_N) - (delta_i0 / w_0)(F*_- - F_0) ]
//!         - (2/dy) [ ... eta lines ... ] - (2/dz) [ ... zeta lines ... ] + source
//! ```
//!
//! where `2/dx = Y_eta Z_zeta / J` on Cartesian elements. The split-form
//! reference path evaluates the same volume term by applying `D` to nodal
//! products directly, which makes it an independent check of the two-point
//! flux implementation.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::euler::{physical_flux_prim, Axis, GasModel, NVARS};
use crate::field::{Discretization, Field};
use crate::flux::{surface_flux_nodes, two_point_flux, FluxScheme, NodeState, Stabilization};
use crate::mesh::Face;

/// Pointwise source term `q(x, t)`.
pub type SourceFn = dyn Fn([f64; 3], f64) -> [f64; NVARS] + Send + Sync;

#[derive(Clone)]
pub struct SemidiscreteConfig {
    pub scheme: FluxScheme,
    pub stab: Stabilization,
    pub gas: GasModel,
    pub source: Option<Arc<SourceFn>>,
}

impl SemidiscreteConfig {
    pub fn new(scheme: FluxScheme, stab: Stabilization, gas: GasModel) -> Self {
        Self {
            scheme,
            stab,
            gas,
            source: None,
        }
    }

    pub fn with_source(mut self, source: Arc<SourceFn>) -> Self {
        self.source = Some(source);
        self
    }
}

impl fmt::Debug for SemidiscreteConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SemidiscreteConfig")
            .field("scheme", &self.scheme)
            .field("stab", &self.stab)
            .field("gas", &self.gas)
            .field("source", &self.source.is_some())
            .finish()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum VolumeForm {
    FluxDifferencing,
    SplitReference,
}

#[derive(Debug, Clone, Copy)]
struct Parts {
    volume: Option<VolumeForm>,
    surface: bool,
    source: bool,
}

/// Node states of a field, validated.
pub fn node_states(
    disc: &Discretization,
    field: &Field,
    gas: GasModel,
    t: f64,
) -> Result<Vec<NodeState>> {
    Ok(field
        .primitives(gas, disc.n1(), t)?
        .into_iter()
        .map(|p| NodeState::new(p, gas))
        .collect())
}

/// Full time derivative `dU/dt`.
pub fn compute_residual(
    disc: &Discretization,
    field: &Field,
    cfg: &SemidiscreteConfig,
    t: f64,
) -> Result<Field> {
    assemble(
        disc,
        field,
        cfg,
        t,
        Parts {
            volume: Some(VolumeForm::FluxDifferencing),
            surface: true,
            source: true,
        },
    )
}

/// Contribution of the flux-differencing volume terms to `dU/dt`.
pub fn volume_residual(
    disc: &Discretization,
    field: &Field,
    cfg: &SemidiscreteConfig,
    t: f64,
) -> Result<Field> {
    assemble(
        disc,
        field,
        cfg,
        t,
        Parts {
            volume: Some(VolumeForm::FluxDifferencing),
            surface: false,
            source: false,
        },
    )
}

/// Contribution of the interface terms to `dU/dt`.
pub fn surface_residual(
    disc: &Discretization,
    field: &Field,
    cfg: &SemidiscreteConfig,
    t: f64,
) -> Result<Field> {
    assemble(
        disc,
        field,
        cfg,
        t,
        Parts {
            volume: None,
            surface: true,
            source: false,
        },
    )
}

/// Full `dU/dt` with the volume term evaluated through the explicit split
/// forms. IR and CH have none.
pub fn split_form_reference_residual(
    disc: &Discretization,
    field: &Field,
    cfg: &SemidiscreteConfig,
    t: f64,
) -> Result<Field> {
    if cfg.scheme.needs_log_means() {
        return Err(Error::UnsupportedScheme(cfg.scheme));
    }
    assemble(
        disc,
        field,
        cfg,
        t,
        Parts {
            volume: Some(VolumeForm::SplitReference),
            surface: true,
            source: true,
        },
    )
}

/// Volume contribution of the split-form reference path.
pub fn split_form_reference_volume(
    disc: &Discretization,
    field: &Field,
    cfg: &SemidiscreteConfig,
    t: f64,
) -> Result<Field> {
    if cfg.scheme.needs_log_means() {
        return Err(Error::UnsupportedScheme(cfg.scheme));
    }
    assemble(
        disc,
        field,
        cfg,
        t,
        Parts {
            volume: Some(VolumeForm::SplitReference),
            surface: false,
            source: false,
        },
    )
}

fn assemble(
    disc: &Discretization,
    field: &Field,
    cfg: &SemidiscreteConfig,
    t: f64,
    parts: Parts,
) -> Result<Field> {
    assert_eq!(
        field.len(),
        disc.num_nodes(),
        "field does not match discretization"
    );
    let states = node_states(disc, field, cfg.gas, t)?;
    let mut rate = Field::zeros(disc);
    let npe = disc.nodes_per_element();
    rate.as_mut_slice()
        .par_chunks_mut(npe)
        .enumerate()
        .for_each(|(e, out)| element_rate(disc, &states, cfg, e, out, parts));
    if parts.source {
        if let Some(source) = &cfg.source {
            for e in 0..disc.mesh.num_elements() {
                for local in 0..npe {
                    let (i, j, k) = disc.local_coords(local);
                    let q = source(disc.node_position(e, i, j, k), t);
                    let r = &mut rate[e * npe + local];
                    for v in 0..NVARS {
                        r[v] += q[v];
                    }
                }
            }
        }
    }
    Ok(rate)
}

/// Start index and stride of the line through local node `(a, b)` along `axis`.
#[inline]
fn line_layout(disc: &Discretization, axis: Axis, a: usize, b: usize) -> (usize, usize) {
    let n1 = disc.n1();
    match axis {
        Axis::X => (disc.local_index(0, a, b), 1),
        Axis::Y => (disc.local_index(a, 0, b), n1),
        Axis::Z => (disc.local_index(a, b, 0), n1 * n1),
    }
}

fn element_rate(
    disc: &Discretization,
    states: &[NodeState],
    cfg: &SemidiscreteConfig,
    e: usize,
    out: &mut [[f64; NVARS]],
    parts: Parts,
) {
    let n1 = disc.n1();
    let nn = n1 - 1;
    let npe = disc.nodes_per_element();
    let basis = &disc.basis;
    let w = basis.weights();
    let sizes = disc.mesh.sizes();
    let gas = cfg.gas;
    let base = e * npe;
    let elem = &states[base..base + npe];
    let mut acc = vec![[0.0; NVARS]; n1];
    let mut line: Vec<NodeState> = Vec::with_capacity(n1);

    for axis in Axis::ALL {
        let d = axis.index();
        let scale = 2.0 / sizes[d];
        let plus = disc.mesh.neighbor(e, Face::ALL[2 * d + 1]);
        let minus = disc.mesh.neighbor(e, Face::ALL[2 * d]);
        for b in 0..n1 {
            for a in 0..n1 {
                let (start, stride) = line_layout(disc, axis, a, b);
                if let Some(form) = parts.volume {
                    line.clear();
                    line.extend((0..n1).map(|i| elem[start + i * stride]));
                    match form {
                        VolumeForm::FluxDifferencing => {
                            flux_difference_line(cfg, basis, &line, axis, &mut acc)
                        }
                        VolumeForm::SplitReference => {
                            split_form_line(cfg, basis, &line, axis, &mut acc)
                        }
                    }
                    for i in 0..n1 {
                        let o = &mut out[start + i * stride];
                        for v in 0..NVARS {
                            o[v] -= scale * acc[i][v];
                        }
                    }
                }
                if parts.surface {
                    let last = start + nn * stride;
                    let own = &elem[last];
                    let fstar = surface_flux_nodes(
                        cfg.scheme,
                        cfg.stab,
                        own,
                        &states[plus * npe + start],
                        axis,
                        gas,
                    );
                    let f = physical_flux_prim(&own.prim, axis, gas);
                    let c = scale / w[nn];
                    for v in 0..NVARS {
                        out[last][v] -= c * (fstar[v] - f[v]);
                    }

                    let own = &elem[start];
                    let fstar = surface_flux_nodes(
                        cfg.scheme,
                        cfg.stab,
                        &states[minus * npe + last],
                        own,
                        axis,
                        gas,
                    );
                    let f = physical_flux_prim(&own.prim, axis, gas);
                    let c = scale / w[0];
                    for v in 0..NVARS {
                        out[start][v] += c * (fstar[v] - f[v]);
                    }
                }
            }
        }
    }
}

/// `acc_i = 2 sum_m D_im F#(U_i, U_m)`, each symmetric pair evaluated once.
fn flux_difference_line(
    cfg: &SemidiscreteConfig,
    basis: &crate::basis::PolyBasis,
    line: &[NodeState],
    axis: Axis,
    acc: &mut [[f64; NVARS]],
) {
    let n1 = line.len();
    for a in acc.iter_mut() {
        *a = [0.0; NVARS];
    }
    for i in 0..n1 {
        let dii = basis.d(i, i);
        if dii != 0.0 {
            let f = physical_flux_prim(&line[i].prim, axis, cfg.gas);
            for v in 0..NVARS {
                acc[i][v] += 2.0 * dii * f[v];
            }
        }
        for m in i + 1..n1 {
            let f = two_point_flux(cfg.scheme, &line[i], &line[m], axis, cfg.gas);
            let dim = 2.0 * basis.d(i, m);
            let dmi = 2.0 * basis.d(m, i);
            for v in 0..NVARS {
                acc[i][v] += dim * f[v];
                acc[m][v] += dmi * f[v];
            }
        }
    }
}

/// Split-form operators on one line of nodal values.
struct LineOps<'a> {
    basis: &'a crate::basis::PolyBasis,
}

impl LineOps<'_> {
    fn d(&self, a: &[f64]) -> Vec<f64> {
        self.basis.differentiate(a)
    }

    fn prod(a: &[f64], b: &[f64]) -> Vec<f64> {
        a.iter().zip(b).map(|(x, y)| x * y).collect()
    }

    /// `(D a b + a D b + b D a) / 2`
    fn quad(&self, a: &[f64], b: &[f64]) -> Vec<f64> {
        let dab = self.d(&Self::prod(a, b));
        let da = self.d(a);
        let db = self.d(b);
        (0..a.len())
            .map(|i| 0.5 * (dab[i] + a[i] * db[i] + b[i] * da[i]))
            .collect()
    }

    /// Seven-term cubic split form.
    fn cubic(&self, a: &[f64], b: &[f64], c: &[f64]) -> Vec<f64> {
        let ab = Self::prod(a, b);
        let ac = Self::prod(a, c);
        let bc = Self::prod(b, c);
        let dabc = self.d(&Self::prod(&ab, c));
        let dbc = self.d(&bc);
        let dac = self.d(&ac);
        let dab = self.d(&ab);
        let da = self.d(a);
        let db = self.d(b);
        let dc = self.d(c);
        (0..a.len())
            .map(|i| {
                0.25 * (dabc[i]
                    + a[i] * dbc[i]
                    + b[i] * dac[i]
                    + c[i] * dab[i]
                    + bc[i] * da[i]
                    + ac[i] * db[i]
                    + ab[i] * dc[i])
            })
            .collect()
    }
}

fn split_form_line(
    cfg: &SemidiscreteConfig,
    basis: &crate::basis::PolyBasis,
    line: &[NodeState],
    axis: Axis,
    acc: &mut [[f64; NVARS]],
) {
    let ops = LineOps { basis };
    let n = axis.index();
    let gas = cfg.gas;
    let g = gas.gamma;
    let rho: Vec<f64> = line.iter().map(|s| s.rho()).collect();
    let p: Vec<f64> = line.iter().map(|s| s.p()).collect();
    let vel: Vec<Vec<f64>> = (0..3)
        .map(|c| line.iter().map(|s| s.vel[c]).collect())
        .collect();
    let un = &vel[n];
    let mut comps: [Vec<f64>; NVARS] = Default::default();
    match cfg.scheme {
        FluxScheme::Standard => {
            let fluxes: Vec<[f64; NVARS]> = line
                .iter()
                .map(|s| physical_flux_prim(&s.prim, axis, gas))
                .collect();
            for (v, comp) in comps.iter_mut().enumerate() {
                let fv: Vec<f64> = fluxes.iter().map(|f| f[v]).collect();
                *comp = ops.d(&fv);
            }
        }
        FluxScheme::Mo => {
            let m = LineOps::prod(&rho, un);
            comps[0] = ops.d(&m);
            for c in 0..3 {
                comps[1 + c] = ops.quad(&m, &vel[c]);
            }
            let enthalpy_flux: Vec<f64> = p
                .iter()
                .zip(un)
                .map(|(p, u)| g / (g - 1.0) * p * u)
                .collect();
            let mut energy = ops.d(&enthalpy_flux);
            for c in 0..3 {
                let muc = LineOps::prod(&m, &vel[c]);
                let q = ops.quad(&muc, &vel[c]);
                let dd = ops.d(&LineOps::prod(&muc, &vel[c]));
                for i in 0..energy.len() {
                    energy[i] += q[i] - 0.5 * dd[i];
                }
            }
            comps[4] = energy;
        }
        FluxScheme::Du => {
            comps[0] = ops.quad(&rho, un);
            for c in 0..3 {
                comps[1 + c] = ops.quad(&LineOps::prod(&rho, &vel[c]), un);
            }
            let total: Vec<f64> = line.iter().map(|s| s.rhoe + s.p()).collect();
            comps[4] = ops.quad(&total, un);
        }
        FluxScheme::Kg | FluxScheme::Pi => {
            comps[0] = ops.quad(&rho, un);
            for c in 0..3 {
                comps[1 + c] = ops.cubic(&rho, un, &vel[c]);
            }
            comps[4] = if cfg.scheme == FluxScheme::Kg {
                let e: Vec<f64> = line.iter().map(|s| s.e).collect();
                let a = ops.cubic(&rho, un, &e);
                let b = ops.quad(&p, un);
                a.iter().zip(&b).map(|(x, y)| x + y).collect()
            } else {
                let h: Vec<f64> = line.iter().map(|s| s.h).collect();
                ops.cubic(&rho, un, &h)
            };
        }
        FluxScheme::Qu => {
            let q1: Vec<f64> = line.iter().map(|s| s.sqrt_rho).collect();
            let qv: Vec<Vec<f64>> = (0..3).map(|c| LineOps::prod(&q1, &vel[c])).collect();
            let q5: Vec<f64> = line.iter().map(|s| s.sqrt_rho * s.h).collect();
            let qn = &qv[n];
            comps[0] = ops.quad(&q1, qn);
            for c in 0..3 {
                comps[1 + c] = ops.quad(qn, &qv[c]);
            }
            let q15 = ops.quad(&q1, &q5);
            let sq: Vec<Vec<f64>> = (0..3).map(|c| ops.quad(&qv[c], &qv[c])).collect();
            for i in 0..line.len() {
                comps[1 + n][i] +=
                    (g - 1.0) / g * (q15[i] - 0.5 * (sq[0][i] + sq[1][i] + sq[2][i]));
            }
            comps[4] = ops.quad(qn, &q5);
        }
        FluxScheme::Ir | FluxScheme::Ch => unreachable!("checked by caller"),
    }
    if matches!(
        cfg.scheme,
        FluxScheme::Mo | FluxScheme::Du | FluxScheme::Kg | FluxScheme::Pi
    ) {
        let dp = ops.d(&p);
        for i in 0..line.len() {
            comps[1 + n][i] += dp[i];
        }
    }
    for (i, a) in acc.iter_mut().enumerate() {
        for v in 0..NVARS {
            a[v] = comps[v][i];
        }
    }
}

/// Terms of the discrete kinetic energy balance, each a quadrature-summed
/// rate over the whole mesh.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KeBalance {
    /// Sum of the flux differences of `f#kappa = F#1 (u_i . u_m) / 2`.
    pub advective_rate: f64,
    /// Sum of `u . 2 sum_m D_im p~_im` with `p~` inferred from the momentum flux.
    pub pressure_work_rate: f64,
    /// Chain-rule contraction of the interface terms of `dU/dt`.
    pub surface_rate: f64,
    /// Chain-rule contraction of the source term (zero without one).
    pub source_rate: f64,
    /// `d kappa / dt` from the full residual.
    pub total_ke_rate: f64,
    /// `total - (-(advective + pressure_work) + surface + source)`; vanishes
    /// for kinetic energy preserving volume fluxes.
    pub defect: f64,
}

/// Node-wise `d kappa/dt = -|u|^2/2 rho_t + u . (rho u)_t`.
#[inline]
pub(crate) fn ke_chain(state: &NodeState, rate: &[f64; NVARS]) -> f64 {
    let v = state.vel;
    -0.5 * state.prim.speed_squared() * rate[0] + v[0] * rate[1] + v[1] * rate[2] + v[2] * rate[3]
}

fn contract(disc: &Discretization, states: &[NodeState], rate: &Field) -> f64 {
    let npe = disc.nodes_per_element();
    let jac = disc.mesh.jacobian();
    let partial: Vec<f64> = (0..disc.mesh.num_elements())
        .into_par_iter()
        .map(|e| {
            (0..npe)
                .map(|l| disc.node_weight(l) * ke_chain(&states[e * npe + l], &rate[e * npe + l]))
                .sum::<f64>()
        })
        .collect();
    jac * partial.iter().sum::<f64>()
}

pub fn ke_balance_decomposition(
    disc: &Discretization,
    field: &Field,
    cfg: &SemidiscreteConfig,
    t: f64,
) -> Result<KeBalance> {
    let states = node_states(disc, field, cfg.gas, t)?;
    let total = compute_residual(disc, field, cfg, t)?;
    let surface = surface_residual(disc, field, cfg, t)?;
    let total_ke_rate = contract(disc, &states, &total);
    let surface_rate = contract(disc, &states, &surface);
    let source_rate = match &cfg.source {
        Some(_) => {
            let vol = volume_residual(disc, field, cfg, t)?;
            let mut src = total.clone();
            src.axpy(-1.0, &vol);
            src.axpy(-1.0, &surface);
            contract(disc, &states, &src)
        }
        None => 0.0,
    };

    let n1 = disc.n1();
    let npe = disc.nodes_per_element();
    let sizes = disc.mesh.sizes();
    let jac = disc.mesh.jacobian();
    let basis = &disc.basis;
    let partial: Vec<(f64, f64)> = (0..disc.mesh.num_elements())
        .into_par_iter()
        .map(|e| {
            let elem = &states[e * npe..(e + 1) * npe];
            let mut adv = 0.0;
            let mut pw = 0.0;
            for axis in Axis::ALL {
                let d = axis.index();
                let scale = 2.0 / sizes[d];
                for b in 0..n1 {
                    for a in 0..n1 {
                        let (start, stride) = line_layout(disc, axis, a, b);
                        for i in 0..n1 {
                            let si = &elem[start + i * stride];
                            let wi = disc.node_weight(start + i * stride);
                            let mut adv_i = 0.0;
                            let mut pw_i = 0.0;
                            for m in 0..n1 {
                                let sm = &elem[start + m * stride];
                                let f = two_point_flux(cfg.scheme, si, sm, axis, cfg.gas);
                                let dot = si.vel[0] * sm.vel[0]
                                    + si.vel[1] * sm.vel[1]
                                    + si.vel[2] * sm.vel[2];
                                let f_kappa = 0.5 * f[0] * dot;
                                let p_tilde = f[1 + d] - f[0] * 0.5 * (si.vel[d] + sm.vel[d]);
                                let dim = basis.d(i, m);
                                adv_i += 2.0 * dim * f_kappa;
                                pw_i += 2.0 * dim * si.vel[d] * p_tilde;
                            }
                            adv += wi * scale * adv_i;
                            pw += wi * scale * pw_i;
                        }
                    }
                }
            }
            (adv, pw)
        })
        .collect();
    let advective_rate = jac * partial.iter().map(|p| p.0).sum::<f64>();
    let pressure_work_rate = jac * partial.iter().map(|p| p.1).sum::<f64>();
    let defect =
        total_ke_rate - (-(advective_rate + pressure_work_rate) + surface_rate + source_rate);
    Ok(KeBalance {
        advective_rate,
        pressure_work_rate,
        surface_rate,
        source_rate,
        total_ke_rate,
        defect,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::PolyBasis;
    use crate::euler::{conserved_from_primitive, EulerState, PrimState};
    use crate::mesh::CartesianMesh;

    fn disc(n: usize, elems: usize) -> Discretization {
        Discretization::new(
            PolyBasis::new(n).unwrap(),
            CartesianMesh::cube(elems, 0.0, 1.0).unwrap(),
        )
    }

    /// Smooth periodic field with order-one variations.
    fn wavy(d: &Discretization, gas: GasModel) -> Field {
        use std::f64::consts::TAU;
        d.interpolate(|x| {
            let s = |k: f64, ph: f64, c: usize| (TAU * k * x[c] + ph).sin();
            let prim = PrimState::new(
                1.0 + 0.3 * s(1.0, 0.2, 0) * s(1.0, 0.5, 1),
                0.4 * s(1.0, 0.1, 1) + 0.1 * s(2.0, 0.3, 2),
                -0.3 * s(1.0, 0.7, 2),
                0.2 * s(1.0, 1.1, 0) * s(1.0, 0.4, 2),
                2.0 + 0.5 * s(1.0, 0.9, 2) * s(1.0, 0.3, 0),
            );
            conserved_from_primitive(&prim, gas)
        })
    }

    #[test]
    fn free_stream_is_preserved() {
        let gas = GasModel::default();
        let d = disc(3, 2);
        let u = conserved_from_primitive(&PrimState::new(1.2, 0.3, -0.5, 0.7, 2.0), gas);
        let field = Field::filled(&d, u);
        for scheme in FluxScheme::ALL {
            for stab in Stabilization::ALL {
                let r =
                    compute_residual(&d, &field, &SemidiscreteConfig::new(scheme, stab, gas), 0.0)
                        .unwrap();
                assert!(r.max_abs() < 1e-12, "{scheme}/{stab}: {}", r.max_abs());
            }
        }
    }

    #[test]
    fn standard_volume_is_collocation_divergence() {
        let gas = GasModel::default();
        let d = disc(4, 1);
        let field = wavy(&d, gas);
        let cfg = SemidiscreteConfig::new(FluxScheme::Standard, Stabilization::None, gas);
        let vol = volume_residual(&d, &field, &cfg, 0.0).unwrap();
        // -(2/dx) sum_m D_im F_m summed over directions, built independently
        let n1 = d.n1();
        let states = node_states(&d, &field, gas, 0.0).unwrap();
        let scale = 2.0 / d.mesh.sizes()[0];
        for k in 0..n1 {
            for j in 0..n1 {
                for i in 0..n1 {
                    let mut div = [0.0; NVARS];
                    for m in 0..n1 {
                        let fx =
                            physical_flux_prim(&states[d.local_index(m, j, k)].prim, Axis::X, gas);
                        let fy =
                            physical_flux_prim(&states[d.local_index(i, m, k)].prim, Axis::Y, gas);
                        let fz =
                            physical_flux_prim(&states[d.local_index(i, j, m)].prim, Axis::Z, gas);
                        for v in 0..NVARS {
                            div[v] += d.basis.d(i, m) * fx[v]
                                + d.basis.d(j, m) * fy[v]
                                + d.basis.d(k, m) * fz[v];
                        }
                    }
                    let got = vol[d.local_index(i, j, k)];
                    for v in 0..NVARS {
                        let expect = -scale * div[v];
                        assert!((got[v] - expect).abs() <= 1e-12 * expect.abs().max(1.0));
                    }
                }
            }
        }
    }

    #[test]
    fn reference_path_matches_flux_differencing() {
        let gas = GasModel::default();
        let d = disc(4, 2);
        let field = wavy(&d, gas);
        for scheme in [
            FluxScheme::Standard,
            FluxScheme::Mo,
            FluxScheme::Du,
            FluxScheme::Kg,
            FluxScheme::Pi,
            FluxScheme::Qu,
        ] {
            let cfg = SemidiscreteConfig::new(scheme, Stabilization::Llf, gas);
            let a = volume_residual(&d, &field, &cfg, 0.0).unwrap();
            let b = split_form_reference_volume(&d, &field, &cfg, 0.0).unwrap();
            let scale = a.max_abs();
            let mut diff = a.clone();
            diff.axpy(-1.0, &b);
            assert!(
                diff.max_abs() <= 1e-11 * scale,
                "{scheme}: {}",
                diff.max_abs() / scale
            );
        }
    }

    #[test]
    fn reference_path_rejects_entropy_conservative_schemes() {
        let gas = GasModel::default();
        let d = disc(2, 1);
        let field = Field::filled(&d, EulerState::new(1.0, 0.0, 0.0, 0.0, 2.5));
        for scheme in [FluxScheme::Ir, FluxScheme::Ch] {
            let cfg = SemidiscreteConfig::new(scheme, Stabilization::None, gas);
            assert!(matches!(
                split_form_reference_residual(&d, &field, &cfg, 0.0),
                Err(Error::UnsupportedScheme(s)) if s == scheme
            ));
        }
    }

    #[test]
    fn constant_field_reference_is_zero() {
        let gas = GasModel::default();
        let d = disc(3, 2);
        let field = Field::filled(&d, EulerState::new(1.0, 0.2, 0.1, 0.0, 2.5));
        let cfg = SemidiscreteConfig::new(FluxScheme::Mo, Stabilization::Llf, gas);
        assert!(
            split_form_reference_residual(&d, &field, &cfg, 0.0)
                .unwrap()
                .max_abs()
                < 1e-12
        );
    }

    #[test]
    fn global_conservation_brute_force() {
        let gas = GasModel::default();
        let d = disc(3, 2);
        let field = wavy(&d, gas);
        let npe = d.nodes_per_element();
        for scheme in FluxScheme::ALL {
            for stab in Stabilization::ALL {
                let cfg = SemidiscreteConfig::new(scheme, stab, gas);
                let r = compute_residual(&d, &field, &cfg, 0.0).unwrap();
                let mut total = [0.0; NVARS];
                let mut scale = 0.0_f64;
                for idx in 0..r.len() {
                    let w = d.node_weight(idx % npe) * d.mesh.jacobian();
                    for v in 0..NVARS {
                        total[v] += w * r[idx][v];
                        scale = scale.max((w * r[idx][v]).abs());
                    }
                }
                for v in 0..NVARS {
                    assert!(
                        total[v].abs() < 1e-12 * scale.max(1.0),
                        "{scheme}/{stab} var {v}: {}",
                        total[v]
                    );
                }
            }
        }
    }

    #[test]
    fn invalid_state_reports_location() {
        let gas = GasModel::default();
        let d = disc(2, 2);
        let mut field = Field::filled(&d, EulerState::new(1.0, 0.0, 0.0, 0.0, 2.5));
        let npe = d.nodes_per_element();
        field[3 * npe + d.local_index(1, 2, 0)] = [1.0, 0.0, 0.0, 0.0, -1.0];
        let cfg = SemidiscreteConfig::new(FluxScheme::Kg, Stabilization::Llf, gas);
        match compute_residual(&d, &field, &cfg, 0.25) {
            Err(Error::InvalidState { location, time, .. }) => {
                assert_eq!(location.element, 3);
                assert_eq!(location.node, (1, 2, 0));
                assert_eq!(time, 0.25);
            }
            other => panic!("expected invalid state, got {other:?}"),
        }
    }

    #[test]
    fn entropy_conservative_schemes_conserve_entropy() {
        use crate::euler::entropy_variables_prim;
        let gas = GasModel::default();
        let d = disc(3, 2);
        let field = wavy(&d, gas);
        let states = node_states(&d, &field, gas, 0.0).unwrap();
        let npe = d.nodes_per_element();
        for scheme in [FluxScheme::Ir, FluxScheme::Ch] {
            let cfg = SemidiscreteConfig::new(scheme, Stabilization::None, gas);
            let r = compute_residual(&d, &field, &cfg, 0.0).unwrap();
            let (mut total, mut scale) = (0.0, 0.0);
            for idx in 0..r.len() {
                let v = entropy_variables_prim(&states[idx].prim, gas);
                let w = d.node_weight(idx % npe);
                let c: f64 = (0..NVARS).map(|k| v[k] * r[idx][k]).sum();
                total += w * c;
                scale += w * c.abs();
            }
            assert!(total.abs() < 1e-10 * scale, "{scheme}: {total} vs {scale}");

            // interface jumps are needed for the stabilization to act
            let mut rough = field.clone();
            let mut rng = crate::sampling::rng(5);
            for idx in 0..rough.len() {
                let f = 1.0 + 0.05 * rand::Rng::gen_range(&mut rng, -1.0..1.0);
                rough[idx][0] *= f;
                rough[idx][4] *= f;
            }
            let rough_states = node_states(&d, &rough, gas, 0.0).unwrap();
            let cfg = SemidiscreteConfig::new(scheme, scheme.paired_stabilization(), gas);
            let r = compute_residual(&d, &rough, &cfg, 0.0).unwrap();
            let produced: f64 = (0..r.len())
                .map(|idx| {
                    let v = entropy_variables_prim(&rough_states[idx].prim, gas);
                    d.node_weight(idx % npe) * (0..NVARS).map(|k| v[k] * r[idx][k]).sum::<f64>()
                })
                .sum();
            assert!(
                produced < 0.0,
                "{scheme}: stabilized entropy rate {produced}"
            );
        }
    }

    #[test]
    fn ke_balance_identity_for_kep_schemes() {
        let gas = GasModel::default();
        let d = disc(3, 2);
        let field = wavy(&d, gas);
        for scheme in [
            FluxScheme::Kg,
            FluxScheme::Pi,
            FluxScheme::Mo,
            FluxScheme::Ch,
        ] {
            let cfg = SemidiscreteConfig::new(scheme, Stabilization::Llf, gas);
            let b = ke_balance_decomposition(&d, &field, &cfg, 0.0).unwrap();
            let scale = b
                .total_ke_rate
                .abs()
                .max(b.advective_rate.abs())
                .max(b.pressure_work_rate.abs());
            assert!(b.defect.abs() <= 1e-12 * scale, "{scheme}: {b:?}");
        }
    }

    #[test]
    fn ke_balance_uniform_flow() {
        let gas = GasModel::default();
        let d = disc(3, 2);
        let field = Field::filled(
            &d,
            conserved_from_primitive(&PrimState::new(1.0, 0.5, 0.2, -0.1, 1.0), gas),
        );
        let cfg = SemidiscreteConfig::new(FluxScheme::Kg, Stabilization::Llf, gas);
        let b = ke_balance_decomposition(&d, &field, &cfg, 0.0).unwrap();
        assert!(b.pressure_work_rate.abs() < 1e-12);
        assert!(b.total_ke_rate.abs() < 1e-12);
    }
}
