//! Five-stage fourth-order low-storage Runge-Kutta and CFL time step.

use crate::error::Result;
use crate::euler::GasModel;
use crate::field::{Discretization, Field};

/// Coefficients of a 2-register (Williamson form) low-storage scheme.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RkScheme {
    pub a: [f64; 5],
    pub b: [f64; 5],
    pub c: [f64; 5],
}

/// Carpenter & Kennedy (1994), solution 3. The third abscissa is the value
/// implied by `a` and `b`; the published rational differs from it by 4e-8.
pub const CARPENTER_KENNEDY_54: RkScheme = RkScheme {
    a: [
        0.0,
        -567301805773.0 / 1357537059087.0,
        -2404267990393.0 / 2016746695238.0,
        -3550918686646.0 / 2091501179385.0,
        -1275806237668.0 / 842570457699.0,
    ],
    b: [
        1432997174477.0 / 9575080441755.0,
        5161836677717.0 / 13612068292357.0,
        1720146321549.0 / 2090206949498.0,
        3134564353537.0 / 4481467310338.0,
        2277821191437.0 / 14882151754819.0,
    ],
    c: [
        0.0,
        1432997174477.0 / 9575080441755.0,
        0.37040095736420475,
        2006345519317.0 / 3224310063776.0,
        2802321613138.0 / 2924317926251.0,
    ],
};

/// State vector the integrator can update in place.
pub trait StageVector: Sized {
    fn zeros_like(&self) -> Self;
    /// `self = beta * self + other`
    fn scale_add(&mut self, beta: f64, other: &Self);
    /// `self += alpha * other`
    fn axpy(&mut self, alpha: f64, other: &Self);
}

impl StageVector for Field {
    fn zeros_like(&self) -> Self {
        Field::zeros_like(self)
    }

    fn scale_add(&mut self, beta: f64, other: &Self) {
        Field::scale_add(self, beta, other)
    }

    fn axpy(&mut self, alpha: f64, other: &Self) {
        Field::axpy(self, alpha, other)
    }
}

impl StageVector for Vec<f64> {
    fn zeros_like(&self) -> Self {
        vec![0.0; self.len()]
    }

    fn scale_add(&mut self, beta: f64, other: &Self) {
        for (a, b) in self.iter_mut().zip(other) {
            *a = beta * *a + b;
        }
    }

    fn axpy(&mut self, alpha: f64, other: &Self) {
        for (a, b) in self.iter_mut().zip(other) {
            *a += alpha * b;
        }
    }
}

/// Advances `u` from `t` to `t + dt`. On error `u` holds a partially updated
/// stage and should be discarded.
pub fn lsrk_step<V, F>(u: &mut V, t: f64, dt: f64, mut rate: F) -> Result<()>
where
    V: StageVector,
    F: FnMut(&V, f64) -> Result<V>,
{
    lsrk_step_with(&CARPENTER_KENNEDY_54, u, t, dt, &mut rate)
}

pub fn lsrk_step_with<V, F>(
    scheme: &RkScheme,
    u: &mut V,
    t: f64,
    dt: f64,
    rate: &mut F,
) -> Result<()>
where
    V: StageVector,
    F: FnMut(&V, f64) -> Result<V>,
{
    let mut reg = u.zeros_like();
    for s in 0..5 {
        let r = rate(u, t + scheme.c[s] * dt)?;
        reg.scale_add(scheme.a[s], &r);
        u.axpy(scheme.b[s] * dt, &reg);
    }
    Ok(())
}

/// `dt = cfl / max_nodes sum_d lambda_d (N+1) / dx_d` with `lambda_d = |u_d| + a`.
pub fn compute_dt(disc: &Discretization, field: &Field, gas: GasModel, cfl: f64) -> Result<f64> {
    let prims = field.primitives(gas, disc.n1(), f64::NAN)?;
    let n1 = disc.n1() as f64;
    let sizes = disc.mesh.sizes();
    let mut worst = 0.0_f64;
    for p in &prims {
        let a = p.sound_speed(gas);
        let v = p.velocity();
        let s: f64 = (0..3).map(|d| (v[d].abs() + a) * n1 / sizes[d]).sum();
        worst = worst.max(s);
    }
    Ok(cfl / worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::PolyBasis;
    use crate::euler::EulerState;
    use crate::mesh::CartesianMesh;
    use std::f64::consts::PI;

    fn integrate(dt: f64, t_end: f64) -> f64 {
        let mut y = vec![1.0];
        let steps = (t_end / dt).round() as usize;
        for n in 0..steps {
            lsrk_step(&mut y, n as f64 * dt, dt, |y: &Vec<f64>, _| Ok(vec![-y[0]])).unwrap();
        }
        y[0]
    }

    #[test]
    fn coefficients_are_consistent() {
        let s = CARPENTER_KENNEDY_54;
        // constant rate: the accumulated increment must equal dt
        let mut y = vec![0.0];
        lsrk_step(&mut y, 0.0, 0.3, |_: &Vec<f64>, _| Ok(vec![1.0])).unwrap();
        assert!((y[0] - 0.3).abs() < 1e-15);
        assert_eq!(s.a[0], 0.0);
        assert_eq!(s.c[0], 0.0);
    }

    #[test]
    fn zero_rate_leaves_state_unchanged() {
        let mut y = vec![1.5, -2.0];
        lsrk_step(&mut y, 0.0, 0.1, |y: &Vec<f64>, _| Ok(vec![0.0; y.len()])).unwrap();
        assert_eq!(y, vec![1.5, -2.0]);
    }

    #[test]
    fn polynomial_in_time_is_exact() {
        for (deg, f) in [(1, 1.0), (2, 2.0), (3, 3.0)] {
            let mut y = vec![0.0];
            lsrk_step(&mut y, 0.5, 0.4, |_: &Vec<f64>, t| {
                Ok(vec![f * t.powi(deg - 1)])
            })
            .unwrap();
            let exact = 0.9f64.powi(deg) - 0.5f64.powi(deg);
            assert!(
                (y[0] - exact).abs() < 1e-14,
                "degree {deg}: {}",
                y[0] - exact
            );
        }
    }

    #[test]
    fn observed_order_is_four() {
        let errs: Vec<f64> = [0.1, 0.05, 0.025]
            .iter()
            .map(|&dt| (integrate(dt, 1.0) - (-1.0f64).exp()).abs())
            .collect();
        for w in errs.windows(2) {
            let order = (w[0] / w[1]).log2();
            assert!(order >= 3.9, "order {order}");
        }
    }

    #[test]
    fn dt_example() {
        let gas = GasModel::default();
        let disc = Discretization::new(
            PolyBasis::new(1).unwrap(),
            CartesianMesh::cube(1, 0.0, 2.0 * PI).unwrap(),
        );
        let field = Field::filled(&disc, EulerState::new(1.0, 0.0, 0.0, 0.0, 1.0 / 0.4));
        let dt = compute_dt(&disc, &field, gas, 1.0).unwrap();
        let expect = PI / (3.0 * 1.4f64.sqrt());
        assert!((dt - expect).abs() < 1e-14);
        assert!((dt - 0.885).abs() < 1e-3);

        let dt2 = compute_dt(&disc, &field, gas, 2.0).unwrap();
        assert!((dt2 - 2.0 * dt).abs() < 1e-15);

        let fine = Discretization::new(
            PolyBasis::new(1).unwrap(),
            CartesianMesh::cube(2, 0.0, 2.0 * PI).unwrap(),
        );
        let field = Field::filled(&fine, EulerState::new(1.0, 0.0, 0.0, 0.0, 1.0 / 0.4));
        let dt3 = compute_dt(&fine, &field, gas, 1.0).unwrap();
        assert!((dt3 - 0.5 * dt).abs() < 1e-15);
    }

    #[test]
    fn rate_errors_propagate() {
        let mut y = vec![1.0];
        let r = lsrk_step(&mut y, 0.0, 0.1, |_: &Vec<f64>, _| {
            Err(crate::error::Error::Domain("boom".into()))
        });
        assert!(r.is_err());
    }
}
