use std::time::Instant;

use splitdg::driver::RunConfig;
use splitdg::solver::compute_residual;
use splitdg::FluxScheme;

fn main() {
    for scheme in [FluxScheme::Kg, FluxScheme::Ir, FluxScheme::Ch] {
        let cfg = RunConfig {
            degree: 7,
            elements: 4,
            scheme,
            ..RunConfig::default()
        };
        let disc = cfg.discretization().unwrap();
        let sd = cfg.semidiscrete();
        let u = cfg.initial_field(&disc);
        let t0 = Instant::now();
        let n = 20;
        for _ in 0..n {
            std::hint::black_box(compute_residual(&disc, &u, &sd, 0.0).unwrap());
        }
        println!(
            "{scheme}: {:.2} ms per residual",
            t0.elapsed().as_secs_f64() * 1e3 / n as f64
        );
    }
}
