//! Run configuration and the simulation, convergence and robustness drivers.

use std::fmt::Write as _;
use std::sync::Arc;

use crate::basis::PolyBasis;
use crate::cases::{manufactured_solution, manufactured_source, CaseId, TgvVariant};
use crate::diagnostics::{self, DiagnosticsRecord};
use crate::error::{Error, Result};
use crate::euler::{GasModel, NVARS};
use crate::field::{Discretization, Field};
use crate::flux::{FluxScheme, Stabilization};
use crate::mesh::CartesianMesh;
use crate::solver::{compute_residual, SemidiscreteConfig};
use crate::time::{compute_dt, lsrk_step};

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub case: CaseId,
    pub degree: usize,
    pub elements: usize,
    pub scheme: FluxScheme,
    /// `None` selects the scheme's paired stabilization.
    pub stab: Option<Stabilization>,
    pub cfl: f64,
    pub t_end: f64,
    /// Time between CSV rows; `0` writes only the first and last row.
    pub output_interval: f64,
    pub gamma: f64,
    pub seed: u64,
    pub threads: Option<usize>,
    /// Elements per axis for `converge` and `sweep`.
    pub grids: Vec<usize>,
    /// Polynomial degrees for `sweep`.
    pub degrees: Vec<usize>,
    /// Schemes for `sweep`.
    pub schemes: Vec<FluxScheme>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            case: CaseId::TaylorGreen(TgvVariant::Low),
            degree: 3,
            elements: 4,
            scheme: FluxScheme::Kg,
            stab: None,
            cfl: 0.5,
            t_end: 1.0,
            output_interval: 0.1,
            gamma: 1.4,
            seed: 0,
            threads: None,
            grids: Vec::new(),
            degrees: Vec::new(),
            schemes: Vec::new(),
        }
    }
}

fn parse_value<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("invalid value '{value}' for key '{key}'")))
}

fn parse_list<T: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_value(key, s))
        .collect()
}

impl RunConfig {
    /// Parses `key = value` lines. `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected key = value", lineno + 1))
            })?;
            let (key, value) = (key.trim().to_ascii_lowercase(), value.trim());
            match key.as_str() {
                "case" => cfg.case = value.parse()?,
                "n" | "degree" => cfg.degree = parse_value(&key, value)?,
                "elements" => cfg.elements = parse_value(&key, value)?,
                "scheme" => cfg.scheme = value.parse()?,
                "stab" | "stabilization" => {
                    cfg.stab = if value.eq_ignore_ascii_case("paired") {
                        None
                    } else {
                        Some(value.parse()?)
                    }
                }
                "cfl" => cfg.cfl = parse_value(&key, value)?,
                "t_end" => cfg.t_end = parse_value(&key, value)?,
                "output_interval" => cfg.output_interval = parse_value(&key, value)?,
                "gamma" => cfg.gamma = parse_value(&key, value)?,
                "seed" => cfg.seed = parse_value(&key, value)?,
                "threads" => cfg.threads = Some(parse_value(&key, value)?),
                "grids" => cfg.grids = parse_list(&key, value)?,
                "degrees" => cfg.degrees = parse_list(&key, value)?,
                "schemes" => cfg.schemes = parse_list(&key, value)?,
                other => {
                    return Err(Error::Config(format!(
                        "line {}: unknown key '{other}'",
                        lineno + 1
                    )))
                }
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        PolyBasis::new(self.degree)?;
        GasModel::new(self.gamma)?;
        if self.elements == 0 {
            return Err(Error::Config("elements must be positive".into()));
        }
        if !(self.cfl > 0.0 && self.cfl.is_finite()) {
            return Err(Error::Config(format!(
                "cfl must be positive, got {}",
                self.cfl
            )));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(Error::Config(format!(
                "t_end must be positive, got {}",
                self.t_end
            )));
        }
        if !(self.output_interval >= 0.0 && self.output_interval.is_finite()) {
            return Err(Error::Config("output_interval must be nonnegative".into()));
        }
        if self.threads == Some(0) {
            return Err(Error::Config("threads must be positive".into()));
        }
        if self.grids.contains(&0) {
            return Err(Error::Config("grids must be positive".into()));
        }
        for &n in &self.degrees {
            PolyBasis::new(n)?;
        }
        Ok(())
    }

    pub fn gas(&self) -> GasModel {
        GasModel { gamma: self.gamma }
    }

    pub fn stabilization(&self) -> Stabilization {
        self.stab
            .unwrap_or_else(|| self.scheme.paired_stabilization())
    }

    pub fn discretization(&self) -> Result<Discretization> {
        let (lo, hi) = self.case.domain();
        Ok(Discretization::new(
            PolyBasis::new(self.degree)?,
            CartesianMesh::cube(self.elements, lo, hi)?,
        ))
    }

    pub fn semidiscrete(&self) -> SemidiscreteConfig {
        let gas = self.gas();
        let cfg = SemidiscreteConfig::new(self.scheme, self.stabilization(), gas);
        match self.case {
            CaseId::ManufacturedWave => {
                cfg.with_source(Arc::new(move |x, t| manufactured_source(x, t, gas)))
            }
            CaseId::TaylorGreen(_) => cfg,
        }
    }

    pub fn initial_field(&self, disc: &Discretization) -> Field {
        let gas = self.gas();
        disc.interpolate(|x| self.case.initial_condition(x, gas))
    }
}

/// Runs `f` on a pool with `threads` workers, or on the global pool.
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Config(format!("cannot build thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RunStatus {
    Completed,
    Crashed { time: f64, reason: String },
}

impl RunStatus {
    pub fn is_completed(&self) -> bool {
        matches!(self, RunStatus::Completed)
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub records: Vec<DiagnosticsRecord>,
    pub status: RunStatus,
    pub steps: usize,
    pub final_time: f64,
    pub field: Field,
}

/// Integrates `cfg` up to `t_end`, sampling diagnostics every
/// `output_interval`. A non-physical state ends the run with
/// [`RunStatus::Crashed`].
pub fn run_simulation(cfg: &RunConfig) -> Result<RunOutput> {
    cfg.validate()?;
    with_threads(cfg.threads, || simulate(cfg, None))?
}

/// Like [`run_simulation`], stopping after at most `max_steps` steps.
pub fn run_steps(cfg: &RunConfig, max_steps: usize) -> Result<RunOutput> {
    cfg.validate()?;
    with_threads(cfg.threads, || simulate(cfg, Some(max_steps)))?
}

fn sample(
    cfg: &RunConfig,
    disc: &Discretization,
    sd: &SemidiscreteConfig,
    u: &Field,
    t: f64,
) -> Result<DiagnosticsRecord> {
    let rate = compute_residual(disc, u, sd, t)?;
    let mut rec = diagnostics::record(disc, u, &rate, sd.gas, t)?;
    if cfg.case.has_exact_solution() {
        let gas = sd.gas;
        rec.l2_error = Some(diagnostics::discrete_l2_error(
            disc,
            u,
            |x, t| manufactured_solution(x, t, gas),
            t,
        ));
    }
    Ok(rec)
}

fn simulate(cfg: &RunConfig, max_steps: Option<usize>) -> Result<RunOutput> {
    let disc = cfg.discretization()?;
    let sd = cfg.semidiscrete();
    let mut u = cfg.initial_field(&disc);
    let mut t = 0.0;
    let mut steps = 0;
    let mut records = Vec::new();
    let crash = |t: f64, e: Error| match e {
        Error::InvalidState { time, .. } => Ok(RunStatus::Crashed {
            time: if time.is_finite() { time } else { t },
            reason: e.to_string(),
        }),
        other => Err(other),
    };

    match sample(cfg, &disc, &sd, &u, t) {
        Ok(r) => records.push(r),
        Err(e) => {
            let status = crash(t, e)?;
            return Ok(RunOutput {
                records,
                status,
                steps,
                final_time: t,
                field: u,
            });
        }
    }
    let mut next_output = if cfg.output_interval > 0.0 {
        cfg.output_interval
    } else {
        cfg.t_end
    };
    let mut status = RunStatus::Completed;
    let eps = 1e-12 * cfg.t_end;
    while t < cfg.t_end - eps {
        if max_steps.is_some_and(|m| steps >= m) {
            break;
        }
        let step = compute_dt(&disc, &u, sd.gas, cfg.cfl).and_then(|dt| {
            let dt = dt.min(next_output - t).min(cfg.t_end - t);
            lsrk_step(&mut u, t, dt, |v, s| compute_residual(&disc, v, &sd, s))?;
            Ok(dt)
        });
        let dt = match step {
            Ok(dt) => dt,
            Err(e) => {
                status = crash(t, e)?;
                break;
            }
        };
        t += dt;
        steps += 1;
        if !u.is_finite() {
            status = RunStatus::Crashed {
                time: t,
                reason: "non-finite state".into(),
            };
            break;
        }
        if t >= next_output - eps || t >= cfg.t_end - eps {
            match sample(cfg, &disc, &sd, &u, t) {
                Ok(r) => records.push(r),
                Err(e) => {
                    status = crash(t, e)?;
                    break;
                }
            }
            if cfg.output_interval > 0.0 {
                while next_output <= t + eps {
                    next_output += cfg.output_interval;
                }
            }
            next_output = next_output.min(cfg.t_end);
        }
    }
    Ok(RunOutput {
        records,
        status,
        steps,
        final_time: t,
        field: u,
    })
}

pub const CSV_COLUMNS: [&str; 11] = [
    "t",
    "mass",
    "mom_x",
    "mom_y",
    "mom_z",
    "energy",
    "kinetic_energy",
    "entropy_total",
    "enstrophy",
    "ke_dissipation_rate",
    "mu_num",
];

const L2_COLUMNS: [&str; NVARS] = ["l2_rho", "l2_rhou", "l2_rhov", "l2_rhow", "l2_rhoe"];

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

/// CSV time series. A crash appends a row holding only the crash time.
pub fn records_to_csv(out: &RunOutput) -> String {
    let with_l2 = out.records.first().is_some_and(|r| r.l2_error.is_some());
    let mut s = CSV_COLUMNS.join(",");
    if with_l2 {
        s.push(',');
        s.push_str(&L2_COLUMNS.join(","));
    }
    s.push('\n');
    for r in &out.records {
        let cols = [
            r.t,
            r.mass,
            r.mom_x,
            r.mom_y,
            r.mom_z,
            r.energy,
            r.kinetic_energy,
            r.entropy_total,
            r.enstrophy,
            r.ke_dissipation_rate,
        ];
        let mut row: Vec<String> = cols.iter().map(|&v| num(v)).collect();
        row.push(r.mu_num.map_or_else(|| "NA".into(), num));
        if let Some(l2) = r.l2_error {
            row.extend(l2.iter().map(|&v| num(v)));
        }
        s.push_str(&row.join(","));
        s.push('\n');
    }
    if let RunStatus::Crashed { time, .. } = out.status {
        let width = CSV_COLUMNS.len() + if with_l2 { NVARS } else { 0 };
        let mut row = vec![num(time)];
        row.extend(std::iter::repeat("NA".to_string()).take(width - 1));
        s.push_str(&row.join(","));
        s.push('\n');
    }
    s
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub elements: usize,
    pub l2_error: [f64; NVARS],
    /// `log2(e_coarse / e_fine)` against the previous grid, scaled by the
    /// grid ratio.
    pub order: Option<[f64; NVARS]>,
}

/// Manufactured-solution error at `t_end` on each of `cfg.grids`.
pub fn run_convergence(cfg: &RunConfig) -> Result<Vec<ConvergenceRow>> {
    if cfg.grids.len() < 2 {
        return Err(Error::Config("converge needs at least two grids".into()));
    }
    if cfg.case != CaseId::ManufacturedWave {
        return Err(Error::Config(
            "converge requires case = manufactured".into(),
        ));
    }
    let mut rows: Vec<ConvergenceRow> = Vec::new();
    for &n in &cfg.grids {
        let run_cfg = RunConfig {
            elements: n,
            output_interval: 0.0,
            ..cfg.clone()
        };
        let out = run_simulation(&run_cfg)?;
        if let RunStatus::Crashed { time, reason } = &out.status {
            return Err(Error::Domain(format!(
                "{n}^3 run crashed at t = {time}: {reason}"
            )));
        }
        let gas = cfg.gas();
        let disc = run_cfg.discretization()?;
        let err = diagnostics::discrete_l2_error(
            &disc,
            &out.field,
            |x, t| manufactured_solution(x, t, gas),
            out.final_time,
        );
        let order = rows.last().map(|prev| {
            let ratio = (n as f64 / prev.elements as f64).log2();
            let mut o = [0.0; NVARS];
            for v in 0..NVARS {
                o[v] = (prev.l2_error[v] / err[v]).log2() / ratio;
            }
            o
        });
        rows.push(ConvergenceRow {
            elements: n,
            l2_error: err,
            order,
        });
    }
    Ok(rows)
}

pub fn convergence_to_csv(rows: &[ConvergenceRow]) -> String {
    let mut s = String::from("elements");
    for c in L2_COLUMNS {
        let _ = write!(s, ",{c}");
    }
    for c in ["rho", "rhou", "rhov", "rhow", "rhoe"] {
        let _ = write!(s, ",order_{c}");
    }
    s.push('\n');
    for r in rows {
        let _ = write!(s, "{}", r.elements);
        for e in r.l2_error {
            let _ = write!(s, ",{}", num(e));
        }
        for v in 0..NVARS {
            match r.order {
                Some(o) => {
                    let _ = write!(s, ",{:.4}", o[v]);
                }
                None => s.push_str(",NA"),
            }
        }
        s.push('\n');
    }
    s
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepEntry {
    pub degree: usize,
    pub elements: usize,
    pub scheme: FluxScheme,
    pub stab: Stabilization,
    pub status: RunStatus,
    pub final_time: f64,
}

/// Robustness matrix over `degrees x grids x schemes`, each run with the
/// configured stabilization or the scheme's paired one.
pub fn run_sweep(cfg: &RunConfig) -> Result<Vec<SweepEntry>> {
    let degrees = if cfg.degrees.is_empty() {
        vec![cfg.degree]
    } else {
        cfg.degrees.clone()
    };
    let grids = if cfg.grids.is_empty() {
        vec![cfg.elements]
    } else {
        cfg.grids.clone()
    };
    let schemes = if cfg.schemes.is_empty() {
        FluxScheme::ALL.to_vec()
    } else {
        cfg.schemes.clone()
    };
    let mut out = Vec::new();
    for &degree in &degrees {
        for &elements in &grids {
            for &scheme in &schemes {
                let run_cfg = RunConfig {
                    degree,
                    elements,
                    scheme,
                    output_interval: 0.0,
                    ..cfg.clone()
                };
                let res = run_simulation(&run_cfg)?;
                out.push(SweepEntry {
                    degree,
                    elements,
                    scheme,
                    stab: run_cfg.stabilization(),
                    status: res.status,
                    final_time: res.final_time,
                });
            }
        }
    }
    Ok(out)
}

pub fn sweep_to_csv(entries: &[SweepEntry]) -> String {
    let mut s = String::from("N,elements,scheme,stab,status,final_time\n");
    for e in entries {
        let (status, time) = match &e.status {
            RunStatus::Completed => ("completed", e.final_time),
            RunStatus::Crashed { time, .. } => ("crashed", *time),
        };
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            e.degree,
            e.elements,
            e.scheme,
            e.stab,
            status,
            num(time)
        );
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_full_config() {
        let text = "# tgv smoke\ncase = tgv-ma04\nN = 4\nelements=2\nscheme = IR\nstab = none\ncfl=0.25\n\
                    t_end = 2\noutput_interval = 0.5\ngamma = 1.4\nseed = 7\nthreads = 1\ngrids = 2, 4,8\n\
                    degrees = 3,4\nschemes = kg,pi\n";
        let cfg = RunConfig::parse(text).unwrap();
        assert_eq!(cfg.case, CaseId::TaylorGreen(TgvVariant::Ma04));
        assert_eq!(cfg.degree, 4);
        assert_eq!(cfg.scheme, FluxScheme::Ir);
        assert_eq!(cfg.stabilization(), Stabilization::None);
        assert_eq!(cfg.grids, vec![2, 4, 8]);
        assert_eq!(cfg.schemes, vec![FluxScheme::Kg, FluxScheme::Pi]);
        assert_eq!(cfg.threads, Some(1));
    }

    #[test]
    fn paired_stabilization_default() {
        let cfg = RunConfig::parse("scheme = ch").unwrap();
        assert_eq!(cfg.stabilization(), Stabilization::Ch);
    }

    #[test]
    fn config_errors() {
        for bad in [
            "case = vortex",
            "N = 0",
            "N = 21",
            "cfl = -1",
            "t_end = 0",
            "scheme = xyz",
            "foo = 1",
            "elements",
            "elements = two",
            "gamma = 1",
            "threads = 0",
        ] {
            assert!(
                matches!(RunConfig::parse(bad), Err(Error::Config(_))),
                "{bad}"
            );
        }
    }

    #[test]
    fn manufactured_run_starts_exact() {
        let cfg = RunConfig::parse(
            "case = manufactured\nN = 2\nelements = 2\nt_end = 0.05\noutput_interval = 0.025",
        )
        .unwrap();
        let out = run_simulation(&cfg).unwrap();
        assert!(out.status.is_completed());
        assert!(out.records[0].l2_error.unwrap().iter().all(|&e| e < 1e-14));
        assert_eq!(out.records.len(), 3);
        assert!((out.final_time - 0.05).abs() < 1e-14);
        let csv = records_to_csv(&out);
        assert!(csv.starts_with("t,mass,mom_x,mom_y,mom_z,energy,kinetic_energy,entropy_total,enstrophy,ke_dissipation_rate,mu_num,l2_rho"));
        assert_eq!(csv.lines().count(), 4);
    }

    #[test]
    fn output_rows_follow_interval() {
        let cfg =
            RunConfig::parse("N = 2\nelements = 2\nt_end = 0.3\noutput_interval = 0.1").unwrap();
        let out = run_simulation(&cfg).unwrap();
        let times: Vec<f64> = out.records.iter().map(|r| r.t).collect();
        assert_eq!(times.len(), 4);
        for (k, t) in times.iter().enumerate() {
            assert!((t - 0.1 * k as f64).abs() < 1e-12, "{times:?}");
        }
    }

    #[test]
    fn crash_is_reported() {
        let cfg = RunConfig::parse("N = 2\nelements = 2\nt_end = 20\ncfl = 4\noutput_interval = 0\nscheme = standard\nstab = none").unwrap();
        let out = run_simulation(&cfg).unwrap();
        match &out.status {
            RunStatus::Crashed { time, .. } => assert!(*time < 20.0),
            RunStatus::Completed => panic!("expected a crash"),
        }
        let csv = records_to_csv(&out);
        assert!(csv.lines().last().unwrap().ends_with(",NA"));
    }
}
