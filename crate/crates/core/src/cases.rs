//! Built-in test problems.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::Error;
use crate::euler::{conserved_from_primitive, EulerState, GasModel, PrimState, NVARS};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TgvVariant {
    /// Background pressure `100 / gamma`.
    Low,
    /// Background pressure `1 / (gamma Ma^2)` with `Ma = 0.4`.
    Ma04,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaseId {
    ManufacturedWave,
    TaylorGreen(TgvVariant),
}

impl CaseId {
    pub fn name(self) -> &'static str {
        match self {
            CaseId::ManufacturedWave => "manufactured",
            CaseId::TaylorGreen(TgvVariant::Low) => "tgv",
            CaseId::TaylorGreen(TgvVariant::Ma04) => "tgv-ma04",
        }
    }

    /// Periodic box of the case, identical on every axis.
    pub fn domain(self) -> (f64, f64) {
        match self {
            CaseId::ManufacturedWave => (-1.0, 1.0),
            CaseId::TaylorGreen(_) => (0.0, 2.0 * PI),
        }
    }

    pub fn initial_condition(self, x: [f64; 3], gas: GasModel) -> EulerState {
        match self {
            CaseId::ManufacturedWave => manufactured_solution(x, 0.0, gas),
            CaseId::TaylorGreen(v) => tgv_initial_condition(x, v, gas),
        }
    }

    pub fn has_exact_solution(self) -> bool {
        matches!(self, CaseId::ManufacturedWave)
    }
}

impl fmt::Display for CaseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CaseId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "manufactured" => Ok(CaseId::ManufacturedWave),
            "tgv" => Ok(CaseId::TaylorGreen(TgvVariant::Low)),
            "tgv-ma04" => Ok(CaseId::TaylorGreen(TgvVariant::Ma04)),
            other => Err(Error::Config(format!(
                "unknown case '{other}' (expected manufactured, tgv or tgv-ma04)"
            ))),
        }
    }
}

#[inline]
fn phase(x: [f64; 3], t: f64) -> f64 {
    PI * (x[0] + x[1] + x[2] - 2.0 * t)
}

/// Density wave advected diagonally with unit velocity, `rho e = rho^2`.
pub fn manufactured_solution(x: [f64; 3], t: f64, _gas: GasModel) -> EulerState {
    let rho = 2.0 + 0.1 * phase(x, t).sin();
    EulerState::new(rho, rho, rho, rho, rho * rho)
}

pub fn manufactured_constants(gas: GasModel) -> [f64; 5] {
    let g = gas.gamma;
    [
        PI / 10.0,
        -PI / 5.0 + PI * (1.0 + 5.0 * g) / 20.0,
        PI / 100.0 * (g - 1.0),
        (-16.0 * PI + PI * (9.0 + 15.0 * g)) / 20.0,
        (3.0 * PI * g - 2.0 * PI) / 100.0,
    ]
}

/// Forcing that makes [`manufactured_solution`] an exact solution.
pub fn manufactured_source(x: [f64; 3], t: f64, gas: GasModel) -> [f64; NVARS] {
    let [c1, c2, c3, c4, c5] = manufactured_constants(gas);
    let a = phase(x, t);
    let (c, s2) = (a.cos(), (2.0 * a).sin());
    let m = c2 * c + c3 * s2;
    [c1 * c, m, m, m, c4 * c + c5 * s2]
}

pub fn tgv_background_pressure(variant: TgvVariant, gas: GasModel) -> f64 {
    match variant {
        TgvVariant::Low => 100.0 / gas.gamma,
        TgvVariant::Ma04 => 1.0 / (gas.gamma * 0.4 * 0.4),
    }
}

pub fn tgv_initial_condition(x: [f64; 3], variant: TgvVariant, gas: GasModel) -> EulerState {
    let [x, y, z] = x;
    let u = x.sin() * y.cos() * z.cos();
    let v = -x.cos() * y.sin() * z.cos();
    let (c2x, c2y, c2z) = ((2.0 * x).cos(), (2.0 * y).cos(), (2.0 * z).cos());
    let p = tgv_background_pressure(variant, gas)
        + (c2x * c2z + 2.0 * c2y + 2.0 * c2x + c2y * c2z) / 16.0;
    conserved_from_primitive(&PrimState::new(1.0, u, v, 0.0, p), gas)
}
