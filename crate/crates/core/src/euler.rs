//! Perfect-gas algebra for the 3D compressible Euler equations.
//!
//! Conserved variables are `(rho, rho u, rho v, rho w, rho e)` with
//! `rho e = p / (gamma - 1) + rho |u|^2 / 2`.

use crate::error::{Error, NodeLocation, Result};

pub const NVARS: usize = 5;

/// Adiabatic coefficient of a calorically perfect gas.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GasModel {
    pub gamma: f64,
}

impl Default for GasModel {
    fn default() -> Self {
        Self { gamma: 1.4 }
    }
}

impl GasModel {
    pub fn new(gamma: f64) -> Result<Self> {
        if gamma > 1.0 && gamma.is_finite() {
            Ok(Self { gamma })
        } else {
            Err(Error::Config(format!("gamma must exceed 1, got {gamma}")))
        }
    }
}

/// Coordinate direction of a flux or face normal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    X = 0,
    Y = 1,
    Z = 2,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }
}

/// Conserved state `(rho, rho u, rho v, rho w, rho e)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EulerState(pub [f64; NVARS]);

impl EulerState {
    pub fn new(rho: f64, mx: f64, my: f64, mz: f64, energy: f64) -> Self {
        Self([rho, mx, my, mz, energy])
    }

    pub fn rho(&self) -> f64 {
        self.0[0]
    }

    pub fn momentum(&self) -> [f64; 3] {
        [self.0[1], self.0[2], self.0[3]]
    }

    pub fn energy(&self) -> f64 {
        self.0[4]
    }
}

/// Primitive state `(rho, u, v, w, p)`. Derived quantities are computed on
/// demand.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrimState {
    pub rho: f64,
    pub u: f64,
    pub v: f64,
    pub w: f64,
    pub p: f64,
}

impl PrimState {
    pub fn new(rho: f64, u: f64, v: f64, w: f64, p: f64) -> Self {
        Self { rho, u, v, w, p }
    }

    #[inline]
    pub fn velocity(&self) -> [f64; 3] {
        [self.u, self.v, self.w]
    }

    #[inline]
    pub fn normal_velocity(&self, axis: Axis) -> f64 {
        self.velocity()[axis.index()]
    }

    #[inline]
    pub fn speed_squared(&self) -> f64 {
        self.u * self.u + self.v * self.v + self.w * self.w
    }

    /// Specific inner energy `p / ((gamma - 1) rho)`.
    pub fn theta(&self, gas: GasModel) -> f64 {
        self.p / ((gas.gamma - 1.0) * self.rho)
    }

    /// Specific total energy.
    pub fn e(&self, gas: GasModel) -> f64 {
        self.theta(gas) + 0.5 * self.speed_squared()
    }

    /// Specific total enthalpy `e + p / rho`.
    pub fn h(&self, gas: GasModel) -> f64 {
        self.e(gas) + self.p / self.rho
    }

    pub fn sound_speed(&self, gas: GasModel) -> f64 {
        (gas.gamma * self.p / self.rho).sqrt()
    }

    /// Inverse temperature proxy `rho / (2 p)`.
    pub fn beta(&self) -> f64 {
        self.rho / (2.0 * self.p)
    }

    /// Specific entropy `ln p - gamma ln rho`.
    pub fn specific_entropy(&self, gas: GasModel) -> f64 {
        self.p.ln() - gas.gamma * self.rho.ln()
    }
}

fn invalid(rho: f64, pressure: f64) -> Error {
    Error::InvalidState {
        rho,
        pressure,
        location: NodeLocation::default(),
        time: f64::NAN,
    }
}

pub fn primitive_from_conserved(state: &EulerState, gas: GasModel) -> Result<PrimState> {
    let [rho, mx, my, mz, energy] = state.0;
    if !(rho > 0.0) || !rho.is_finite() {
        return Err(invalid(rho, f64::NAN));
    }
    let inv = 1.0 / rho;
    let (u, v, w) = (mx * inv, my * inv, mz * inv);
    let p = (gas.gamma - 1.0) * (energy - 0.5 * rho * (u * u + v * v + w * w));
    if !(p > 0.0) || !p.is_finite() {
        return Err(invalid(rho, p));
    }
    Ok(PrimState { rho, u, v, w, p })
}

pub fn conserved_from_primitive(prim: &PrimState, gas: GasModel) -> EulerState {
    let PrimState { rho, u, v, w, p } = *prim;
    EulerState([
        rho,
        rho * u,
        rho * v,
        rho * w,
        p / (gas.gamma - 1.0) + 0.5 * rho * (u * u + v * v + w * w),
    ])
}

/// Euler flux of a primitive state along `axis`.
#[inline]
pub fn physical_flux_prim(prim: &PrimState, axis: Axis, gas: GasModel) -> [f64; NVARS] {
    let un = prim.normal_velocity(axis);
    let rho_un = prim.rho * un;
    let rhoe = prim.p / (gas.gamma - 1.0) + 0.5 * prim.rho * prim.speed_squared();
    let mut f = [
        rho_un,
        rho_un * prim.u,
        rho_un * prim.v,
        rho_un * prim.w,
        (rhoe + prim.p) * un,
    ];
    f[1 + axis.index()] += prim.p;
    f
}

pub fn physical_flux(state: &EulerState, axis: Axis, gas: GasModel) -> Result<[f64; NVARS]> {
    Ok(physical_flux_prim(
        &primitive_from_conserved(state, gas)?,
        axis,
        gas,
    ))
}

/// `max(|u_n^L| + a_L, |u_n^R| + a_R)`.
pub fn max_wave_speed(
    left: &EulerState,
    right: &EulerState,
    axis: Axis,
    gas: GasModel,
) -> Result<f64> {
    let pl = primitive_from_conserved(left, gas)?;
    let pr = primitive_from_conserved(right, gas)?;
    Ok(max_wave_speed_prim(&pl, &pr, axis, gas))
}

#[inline]
pub fn max_wave_speed_prim(left: &PrimState, right: &PrimState, axis: Axis, gas: GasModel) -> f64 {
    let sl = left.normal_velocity(axis).abs() + left.sound_speed(gas);
    let sr = right.normal_velocity(axis).abs() + right.sound_speed(gas);
    sl.max(sr)
}

/// Entropy variables for the entropy `-rho s / (gamma - 1)`.
pub fn entropy_variables_prim(prim: &PrimState, gas: GasModel) -> [f64; NVARS] {
    let g = gas.gamma;
    let s = prim.specific_entropy(gas);
    let rho_p = prim.rho / prim.p;
    [
        (g - s) / (g - 1.0) - 0.5 * rho_p * prim.speed_squared(),
        rho_p * prim.u,
        rho_p * prim.v,
        rho_p * prim.w,
        -rho_p,
    ]
}

pub fn entropy_variables(state: &EulerState, gas: GasModel) -> Result<[f64; NVARS]> {
    Ok(entropy_variables_prim(
        &primitive_from_conserved(state, gas)?,
        gas,
    ))
}

/// `dU/dV` in terms of primitive values, with `h` and `rho e` supplied by the
/// caller so that averaged states can plug in their own enthalpy.
pub fn entropy_jacobian_with(
    rho: f64,
    vel: [f64; 3],
    p: f64,
    h: f64,
    rhoe: f64,
    gas: GasModel,
) -> [[f64; NVARS]; NVARS] {
    let [u, v, w] = vel;
    let a2 = gas.gamma * p / rho;
    let rhoh = rho * h;
    [
        [rho, rho * u, rho * v, rho * w, rhoe],
        [rho * u, rho * u * u + p, rho * u * v, rho * u * w, rhoh * u],
        [rho * v, rho * u * v, rho * v * v + p, rho * v * w, rhoh * v],
        [rho * w, rho * u * w, rho * v * w, rho * w * w + p, rhoh * w],
        [
            rhoe,
            rhoh * u,
            rhoh * v,
            rhoh * w,
            rho * h * h - a2 * p / (gas.gamma - 1.0),
        ],
    ]
}

pub fn entropy_jacobian(state: &EulerState, gas: GasModel) -> Result<[[f64; NVARS]; NVARS]> {
    let prim = primitive_from_conserved(state, gas)?;
    Ok(entropy_jacobian_with(
        prim.rho,
        prim.velocity(),
        prim.p,
        prim.h(gas),
        state.energy(),
        gas,
    ))
}

/// `|zeta - 1|` below which the logarithmic mean switches to its series.
pub const LOG_MEAN_SWITCH: f64 = 1e-4;

/// Logarithmic mean `(a - b) / (ln a - ln b)`, unchecked.
///
/// With `zeta = a / b`, `f = (zeta - 1) / (zeta + 1)` and `u = f^2`, the mean is
/// `(a + b) / (2 F)` where `F = ln(zeta) / (2 f) = 1 + u/3 + u^2/5 + u^3/7 + u^4/9 + ...`.
#[inline]
pub fn ln_mean(a: f64, b: f64) -> f64 {
    let (a, b) = if a >= b { (a, b) } else { (b, a) };
    let diff = a - b;
    let rel = diff / b;
    if rel.abs() < LOG_MEAN_SWITCH {
        let f = diff / (a + b);
        let u = f * f;
        let series = 1.0 + u * (1.0 / 3.0 + u * (1.0 / 5.0 + u * (1.0 / 7.0 + u / 9.0)));
        0.5 * (a + b) / series
    } else {
        diff / rel.ln_1p()
    }
}

/// Checked logarithmic mean of two positive numbers.
pub fn log_mean(a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0) || !a.is_finite() || !b.is_finite() {
        return Err(Error::Domain(format!(
            "logarithmic mean needs positive arguments, got ({a}, {b})"
        )));
    }
    Ok(ln_mean(a, b))
}
