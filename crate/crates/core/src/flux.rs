//! Two-point volume fluxes and interface stabilization terms.
//!
//! Every volume flux here is consistent (`F#(U, U) = F(U)`) and symmetric in
//! its two arguments. Plugged into the flux-differencing volume term
//! `2 sum_m D_im F#(U_i, U_m)` the arithmetic-mean based fluxes reproduce the
//! standard, Morinishi, Ducros, Kennedy-Gruber and Pirozzoli split forms; IR
//! and CH are entropy conservative; QU is the quadratic split in Roe
//! variables. The surface flux is `F* = F# - Stab`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::euler::{
    entropy_jacobian_with, entropy_variables_prim, ln_mean, max_wave_speed_prim,
    primitive_from_conserved, Axis, EulerState, GasModel, PrimState, NVARS,
};
use crate::sampling;

/// Volume flux family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FluxScheme {
    Standard,
    /// Morinishi
    Mo,
    /// Ducros et al.
    Du,
    /// Kennedy and Gruber
    Kg,
    /// Pirozzoli
    Pi,
    /// Ismail and Roe, entropy conservative
    Ir,
    /// Chandrashekar, entropy conservative and kinetic energy preserving
    Ch,
    /// Quadratic split in Roe variables
    Qu,
}

impl FluxScheme {
    pub const ALL: [FluxScheme; 8] = [
        FluxScheme::Standard,
        FluxScheme::Mo,
        FluxScheme::Du,
        FluxScheme::Kg,
        FluxScheme::Pi,
        FluxScheme::Ir,
        FluxScheme::Ch,
        FluxScheme::Qu,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FluxScheme::Standard => "standard",
            FluxScheme::Mo => "mo",
            FluxScheme::Du => "du",
            FluxScheme::Kg => "kg",
            FluxScheme::Pi => "pi",
            FluxScheme::Ir => "ir",
            FluxScheme::Ch => "ch",
            FluxScheme::Qu => "qu",
        }
    }

    /// Interface dissipation the scheme is paired with in robustness runs.
    pub fn paired_stabilization(self) -> Stabilization {
        match self {
            FluxScheme::Ir => Stabilization::Ir,
            FluxScheme::Ch => Stabilization::Ch,
            _ => Stabilization::Llf,
        }
    }

    /// IR and CH evaluate logarithms of density and pressure.
    pub fn needs_log_means(self) -> bool {
        matches!(self, FluxScheme::Ir | FluxScheme::Ch)
    }
}

impl fmt::Display for FluxScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FluxScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FluxScheme::ALL
            .into_iter()
            .find(|v| v.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Config(format!("unknown flux scheme '{s}'")))
    }
}

/// Jump-dependent interface dissipation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stabilization {
    None,
    /// Local Lax-Friedrichs, `lambda/2 [U]`
    Llf,
    /// LLF in mass and momentum, entropy-dissipative energy component
    Ch,
    /// `lambda/2 H [V]` with the entropy Jacobian at the IR mean state
    Ir,
}

impl Stabilization {
    pub const ALL: [Stabilization; 4] = [
        Stabilization::None,
        Stabilization::Llf,
        Stabilization::Ch,
        Stabilization::Ir,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stabilization::None => "none",
            Stabilization::Llf => "llf",
            Stabilization::Ch => "ch",
            Stabilization::Ir => "ir",
        }
    }
}

impl fmt::Display for Stabilization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Stabilization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Stabilization::ALL
            .into_iter()
            .find(|v| v.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Config(format!("unknown stabilization '{s}'")))
    }
}

/// Nodal quantities the two-point fluxes read, computed once per node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeState {
    pub prim: PrimState,
    pub vel: [f64; 3],
    pub rhoe: f64,
    /// specific total energy
    pub e: f64,
    /// specific total enthalpy
    pub h: f64,
    pub beta: f64,
    /// IR parameter vector: sqrt(rho / p) and sqrt(rho p)
    pub z1: f64,
    pub z5: f64,
    pub sqrt_rho: f64,
}

impl NodeState {
    pub fn new(prim: PrimState, gas: GasModel) -> Self {
        let vel = prim.velocity();
        let kin = 0.5 * prim.rho * prim.speed_squared();
        let rhoe = prim.p / (gas.gamma - 1.0) + kin;
        let e = rhoe / prim.rho;
        let h = e + prim.p / prim.rho;
        Self {
            prim,
            vel,
            rhoe,
            e,
            h,
            beta: 0.5 * prim.rho / prim.p,
            z1: (prim.rho / prim.p).sqrt(),
            z5: (prim.rho * prim.p).sqrt(),
            sqrt_rho: prim.rho.sqrt(),
        }
    }

    pub fn from_conserved(state: &EulerState, gas: GasModel) -> Result<Self> {
        Ok(Self::new(primitive_from_conserved(state, gas)?, gas))
    }

    #[inline]
    pub fn rho(&self) -> f64 {
        self.prim.rho
    }

    #[inline]
    pub fn p(&self) -> f64 {
        self.prim.p
    }

    pub fn conserved(&self) -> [f64; NVARS] {
        let r = self.prim.rho;
        [
            r,
            r * self.vel[0],
            r * self.vel[1],
            r * self.vel[2],
            self.rhoe,
        ]
    }
}

#[inline]
fn avg(a: f64, b: f64) -> f64 {
    0.5 * (a + b)
}

/// Two-point volume flux on precomputed node states.
#[inline]
pub fn two_point_flux(
    scheme: FluxScheme,
    a: &NodeState,
    b: &NodeState,
    axis: Axis,
    gas: GasModel,
) -> [f64; NVARS] {
    let n = axis.index();
    let (ra, rb) = (a.rho(), b.rho());
    let (pa, pb) = (a.p(), b.p());
    let una = a.vel[n];
    let unb = b.vel[n];
    let mut f = [0.0; NVARS];
    match scheme {
        FluxScheme::Standard => {
            let ma = ra * una;
            let mb = rb * unb;
            f[0] = avg(ma, mb);
            for c in 0..3 {
                f[1 + c] = avg(ma * a.vel[c], mb * b.vel[c]);
            }
            f[1 + n] += avg(pa, pb);
            f[4] = avg(una * (a.rhoe + pa), unb * (b.rhoe + pb));
        }
        FluxScheme::Mo => {
            let ma = ra * una;
            let mb = rb * unb;
            let mass = avg(ma, mb);
            f[0] = mass;
            let mut adv = 0.0;
            let mut cubic = 0.0;
            for c in 0..3 {
                let vc = avg(a.vel[c], b.vel[c]);
                f[1 + c] = mass * vc;
                adv += avg(ma * a.vel[c], mb * b.vel[c]) * vc;
                cubic += avg(ma * a.vel[c] * a.vel[c], mb * b.vel[c] * b.vel[c]);
            }
            f[1 + n] += avg(pa, pb);
            let g1 = gas.gamma / (gas.gamma - 1.0);
            // rho theta + p = gamma p / (gamma - 1)
            f[4] = avg(g1 * pa * una, g1 * pb * unb) + adv - 0.5 * cubic;
        }
        FluxScheme::Du => {
            let un = avg(una, unb);
            f[0] = avg(ra, rb) * un;
            for c in 0..3 {
                f[1 + c] = avg(ra * a.vel[c], rb * b.vel[c]) * un;
            }
            let p = avg(pa, pb);
            f[1 + n] += p;
            f[4] = (avg(a.rhoe, b.rhoe) + p) * un;
        }
        FluxScheme::Kg | FluxScheme::Pi => {
            let un = avg(una, unb);
            let mass = avg(ra, rb) * un;
            f[0] = mass;
            for c in 0..3 {
                f[1 + c] = mass * avg(a.vel[c], b.vel[c]);
            }
            let p = avg(pa, pb);
            f[1 + n] += p;
            f[4] = if scheme == FluxScheme::Kg {
                mass * avg(a.e, b.e) + p * un
            } else {
                mass * avg(a.h, b.h)
            };
        }
        FluxScheme::Ir => {
            let m = IrMean::new(a, b, gas);
            let mass = m.rho * m.vel[n];
            f[0] = mass;
            for c in 0..3 {
                f[1 + c] = mass * m.vel[c];
            }
            f[1 + n] += m.p1;
            f[4] = mass * m.h;
        }
        FluxScheme::Ch => {
            let rho_ln = ln_mean(ra, rb);
            let beta_ln = ln_mean(a.beta, b.beta);
            let vel = [
                avg(a.vel[0], b.vel[0]),
                avg(a.vel[1], b.vel[1]),
                avg(a.vel[2], b.vel[2]),
            ];
            let p_hat = avg(ra, rb) / (2.0 * avg(a.beta, b.beta));
            let mean_sq = avg(a.prim.speed_squared(), b.prim.speed_squared());
            let sq_mean = vel[0] * vel[0] + vel[1] * vel[1] + vel[2] * vel[2];
            let h_hat = 1.0 / (2.0 * beta_ln * (gas.gamma - 1.0)) - 0.5 * mean_sq
                + p_hat / rho_ln
                + sq_mean;
            let mass = rho_ln * vel[n];
            f[0] = mass;
            for c in 0..3 {
                f[1 + c] = mass * vel[c];
            }
            f[1 + n] += p_hat;
            f[4] = mass * h_hat;
        }
        FluxScheme::Qu => {
            let q1 = avg(a.sqrt_rho, b.sqrt_rho);
            let qv = [
                avg(a.sqrt_rho * a.vel[0], b.sqrt_rho * b.vel[0]),
                avg(a.sqrt_rho * a.vel[1], b.sqrt_rho * b.vel[1]),
                avg(a.sqrt_rho * a.vel[2], b.sqrt_rho * b.vel[2]),
            ];
            let q5 = avg(a.sqrt_rho * a.h, b.sqrt_rho * b.h);
            let qn = qv[n];
            f[0] = q1 * qn;
            for c in 0..3 {
                f[1 + c] = qn * qv[c];
            }
            let g = gas.gamma;
            f[1 + n] +=
                (g - 1.0) / g * (q1 * q5 - 0.5 * (qv[0] * qv[0] + qv[1] * qv[1] + qv[2] * qv[2]));
            f[4] = qn * q5;
        }
    }
    f
}

/// Mean state of the Ismail-Roe flux.
#[derive(Debug, Clone, Copy)]
pub struct IrMean {
    pub rho: f64,
    pub vel: [f64; 3],
    pub p1: f64,
    pub p2: f64,
    pub h: f64,
}

impl IrMean {
    #[inline]
    pub fn new(a: &NodeState, b: &NodeState, gas: GasModel) -> Self {
        let g = gas.gamma;
        let z1 = avg(a.z1, b.z1);
        let z5 = avg(a.z5, b.z5);
        let z1_ln = ln_mean(a.z1, b.z1);
        let z5_ln = ln_mean(a.z5, b.z5);
        let inv_z1 = 1.0 / z1;
        let rho = z1 * z5_ln;
        let vel = [
            avg(a.z1 * a.vel[0], b.z1 * b.vel[0]) * inv_z1,
            avg(a.z1 * a.vel[1], b.z1 * b.vel[1]) * inv_z1,
            avg(a.z1 * a.vel[2], b.z1 * b.vel[2]) * inv_z1,
        ];
        let p1 = z5 * inv_z1;
        let p2 = (g + 1.0) / (2.0 * g) * z5_ln / z1_ln + (g - 1.0) / (2.0 * g) * p1;
        let h = g * p2 / (rho * (g - 1.0))
            + 0.5 * (vel[0] * vel[0] + vel[1] * vel[1] + vel[2] * vel[2]);
        Self {
            rho,
            vel,
            p1,
            p2,
            h,
        }
    }
}

/// Stabilization term `Stab(U-, U+)` with `left = U-`, `right = U+`.
#[inline]
pub fn stabilization_term(
    stab: Stabilization,
    left: &NodeState,
    right: &NodeState,
    axis: Axis,
    gas: GasModel,
) -> [f64; NVARS] {
    let n = axis.index();
    match stab {
        Stabilization::None => [0.0; NVARS],
        Stabilization::Llf => {
            let lambda = max_wave_speed_prim(&left.prim, &right.prim, axis, gas);
            let ul = left.conserved();
            let ur = right.conserved();
            let mut s = [0.0; NVARS];
            for k in 0..NVARS {
                s[k] = 0.5 * lambda * (ur[k] - ul[k]);
            }
            s
        }
        Stabilization::Ch => {
            let lambda = max_wave_speed_prim(&left.prim, &right.prim, axis, gas);
            let ul = left.conserved();
            let ur = right.conserved();
            let mut s = [0.0; NVARS];
            for k in 0..4 {
                s[k] = 0.5 * lambda * (ur[k] - ul[k]);
            }
            let gm1 = gas.gamma - 1.0;
            let beta_ln = ln_mean(left.beta, right.beta);
            let rho_mean = avg(left.rho(), right.rho());
            let vdot = left.vel[0] * right.vel[0]
                + left.vel[1] * right.vel[1]
                + left.vel[2] * right.vel[2];
            let mut bracket =
                (1.0 / (2.0 * gm1 * beta_ln) + 0.5 * vdot) * (right.rho() - left.rho());
            for c in 0..3 {
                bracket += rho_mean * avg(left.vel[c], right.vel[c]) * (right.vel[c] - left.vel[c]);
            }
            bracket += rho_mean / (2.0 * gm1) * (1.0 / right.beta - 1.0 / left.beta);
            s[4] = 0.5 * lambda * bracket;
            s
        }
        Stabilization::Ir => {
            let m = IrMean::new(left, right, gas);
            let lambda = m.vel[n].abs() + (gas.gamma * m.p1 / m.rho).sqrt();
            let q2 = m.vel[0] * m.vel[0] + m.vel[1] * m.vel[1] + m.vel[2] * m.vel[2];
            // one consistent state (rho^, u^, p^1) keeps H symmetric positive definite
            let rhoe = m.p1 / (gas.gamma - 1.0) + 0.5 * m.rho * q2;
            let h = (rhoe + m.p1) / m.rho;
            let jac = entropy_jacobian_with(m.rho, m.vel, m.p1, h, rhoe, gas);
            let vl = entropy_variables_prim(&left.prim, gas);
            let vr = entropy_variables_prim(&right.prim, gas);
            let mut jump = [0.0; NVARS];
            for k in 0..NVARS {
                jump[k] = vr[k] - vl[k];
            }
            let mut s = [0.0; NVARS];
            for (row, out) in jac.iter().zip(s.iter_mut()) {
                let hv: f64 = row.iter().zip(&jump).map(|(h, j)| h * j).sum();
                *out = 0.5 * lambda * hv;
            }
            s
        }
    }
}

/// `F*(U-, U+) = F#(U-, U+) - Stab(U-, U+)`.
#[inline]
pub fn surface_flux_nodes(
    scheme: FluxScheme,
    stab: Stabilization,
    left: &NodeState,
    right: &NodeState,
    axis: Axis,
    gas: GasModel,
) -> [f64; NVARS] {
    let mut f = two_point_flux(scheme, left, right, axis, gas);
    if stab != Stabilization::None {
        let s = stabilization_term(stab, left, right, axis, gas);
        for k in 0..NVARS {
            f[k] -= s[k];
        }
    }
    f
}

fn check_log_domain(state: &NodeState) -> Result<()> {
    let ok = [state.rho(), state.p()]
        .iter()
        .all(|v| *v > 0.0 && v.is_finite());
    if ok {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "logarithmic means need positive density and pressure, got rho = {}, p = {}",
            state.rho(),
            state.p()
        )))
    }
}

/// Two-point volume flux of two conserved states.
pub fn volume_flux(
    scheme: FluxScheme,
    left: &EulerState,
    right: &EulerState,
    axis: Axis,
    gas: GasModel,
) -> Result<[f64; NVARS]> {
    let a = NodeState::from_conserved(left, gas)?;
    let b = NodeState::from_conserved(right, gas)?;
    if scheme.needs_log_means() {
        check_log_domain(&a)?;
        check_log_domain(&b)?;
    }
    Ok(two_point_flux(scheme, &a, &b, axis, gas))
}

pub fn stabilization(
    stab: Stabilization,
    left: &EulerState,
    right: &EulerState,
    axis: Axis,
    gas: GasModel,
) -> Result<[f64; NVARS]> {
    let a = NodeState::from_conserved(left, gas)?;
    let b = NodeState::from_conserved(right, gas)?;
    Ok(stabilization_term(stab, &a, &b, axis, gas))
}

pub fn surface_flux(
    scheme: FluxScheme,
    stab: Stabilization,
    left: &EulerState,
    right: &EulerState,
    axis: Axis,
    gas: GasModel,
) -> Result<[f64; NVARS]> {
    let a = NodeState::from_conserved(left, gas)?;
    let b = NodeState::from_conserved(right, gas)?;
    if scheme.needs_log_means() {
        check_log_domain(&a)?;
        check_log_domain(&b)?;
    }
    Ok(surface_flux_nodes(scheme, stab, &a, &b, axis, gas))
}

/// Outcome of sampling the kinetic-energy-preserving momentum structure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KepReport {
    pub passes: bool,
    pub max_defect: f64,
}

pub const KEP_TOLERANCE: f64 = 1e-13;

/// Samples random state pairs and checks the momentum components against
/// `F^{1+c} = F^1 <u_c> + delta_{cn} p~`, with `p~` inferred from the normal
/// momentum component and required to be symmetric and consistent.
///
/// Defects are measured relative to `max(1, |F#|_max)`.
pub fn check_kep_structure(scheme: FluxScheme, sample_count: usize, seed: u64) -> KepReport {
    let gas = GasModel::default();
    let mut rng = sampling::rng(seed);
    let mut max_defect: f64 = 0.0;
    for _ in 0..sample_count.max(1) {
        let a = NodeState::new(sampling::random_prim(&mut rng), gas);
        let b = NodeState::new(sampling::random_prim(&mut rng), gas);
        for axis in Axis::ALL {
            let n = axis.index();
            let fab = two_point_flux(scheme, &a, &b, axis, gas);
            let fba = two_point_flux(scheme, &b, &a, axis, gas);
            let faa = two_point_flux(scheme, &a, &a, axis, gas);
            let scale = fab.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
            let vel = [
                avg(a.vel[0], b.vel[0]),
                avg(a.vel[1], b.vel[1]),
                avg(a.vel[2], b.vel[2]),
            ];
            for c in 0..3 {
                if c != n {
                    max_defect = max_defect.max((fab[1 + c] - fab[0] * vel[c]).abs() / scale);
                }
            }
            let p_ab = fab[1 + n] - fab[0] * vel[n];
            let p_ba = fba[1 + n] - fba[0] * vel[n];
            let p_aa = faa[1 + n] - faa[0] * a.vel[n];
            max_defect = max_defect.max((p_ab - p_ba).abs() / scale);
            max_defect = max_defect.max((p_aa - a.p()).abs() / scale.max(a.p()));
        }
    }
    KepReport {
        passes: max_defect < KEP_TOLERANCE,
        max_defect,
    }
}
