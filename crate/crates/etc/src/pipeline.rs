//! End-to-end homogenization and the experiment runners built on it.
//!
//! Any Dirichlet axis is handled by transposing the field so that axis becomes
//! z; the discretization and the preconditioner only ever see the z case.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use etc_core::grid::{gen_center_ball, gen_channels, gen_random_balls, gen_smooth_problem, BallPreset, RandomBalls};
use etc_core::krylov::PcgOptions;
use etc_core::preconditioner::{
    coefficient_stats, FctPreconditioner, Identity, Jacobi, PrecondKind, Preconditioner, RefMode, Ssor,
};
use etc_core::tpfa::{
    add_source, build_rhs, build_rhs_with_profiles, build_system, effective_conductivity, l2_error_midpoint,
    reconstruct_boundary_flux, reconstruct_inflow_flux,
};
use etc_core::{pcg, Axis, BoundaryConfig, DiscreteSystem, OrthotropicField, Real, ReferenceParams, SolveReport};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Precision {
    #[default]
    F64,
    F32,
}

impl Precision {
    pub fn as_str(self) -> &'static str {
        match self {
            Precision::F64 => "f64",
            Precision::F32 => "f32",
        }
    }
}

impl fmt::Display for Precision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Precision {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "f64" => Ok(Precision::F64),
            "f32" => Ok(Precision::F32),
            _ => Err(Error::Usage(format!("unknown precision {s:?}, expected f64 or f32"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveSettings {
    pub rtol: f64,
    pub max_iter: usize,
    pub precond: PrecondKind,
    pub ref_mode: RefMode,
    pub precision: Precision,
}

impl Default for SolveSettings {
    fn default() -> Self {
        Self { rtol: 1e-9, max_iter: 1024, precond: PrecondKind::Fct, ref_mode: RefMode::Opt, precision: Precision::F64 }
    }
}

impl SolveSettings {
    pub fn with_rtol(self, rtol: f64) -> Self {
        Self { rtol, ..self }
    }

    pub fn with_precond(self, precond: PrecondKind) -> Self {
        Self { precond, ..self }
    }

    pub fn with_ref(self, ref_mode: RefMode) -> Self {
        Self { ref_mode, ..self }
    }

    pub fn with_precision(self, precision: Precision) -> Self {
        Self { precision, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rtol > 0.0 && self.rtol < 1.0) {
            return Err(Error::Usage(format!("rtol must lie in (0, 1), got {}", self.rtol)));
        }
        if self.max_iter == 0 {
            return Err(Error::Usage("max_iter must be at least 1".into()));
        }
        Ok(())
    }
}

/// A finished homogenization.
#[derive(Debug, Clone)]
pub struct Homogenized {
    pub report: SolveReport,
    /// `|sum(inflow) - sum(outflow)| / |sum(outflow)|`.
    pub flux_imbalance: f64,
    /// Solution on the permuted grid (z is the Dirichlet axis).
    pub solution: Vec<f64>,
}

struct Raw {
    outcome: etc_core::PcgOutcome<f64>,
    kappa_eff: f64,
    inflow: Vec<f64>,
    outflow: Vec<f64>,
    prep_seconds: f64,
    exec_seconds: f64,
}

fn solve_in<T: Real>(
    sys: &DiscreteSystem,
    rhs: &[f64],
    refs: ReferenceParams,
    s: &SolveSettings,
    start: Instant,
) -> Result<Raw> {
    let sys_t: DiscreteSystem<T> = sys.cast();
    let b: Vec<T> = rhs.iter().map(|&v| T::from_f64(v)).collect();
    let mut m: Box<dyn Preconditioner<T> + '_> = match s.precond {
        PrecondKind::Fct => Box::new(FctPreconditioner::<T>::new(&sys.grid, refs)?),
        PrecondKind::Ssor { omega } => Box::new(Ssor::new(&sys_t, omega)?),
        PrecondKind::Jacobi => Box::new(Jacobi::new(&sys_t)),
        PrecondKind::None => Box::new(Identity),
    };
    let prep_seconds = start.elapsed().as_secs_f64();
    let exec = Instant::now();
    let out = pcg(&sys_t, &mut *m, &b, &PcgOptions { rtol: s.rtol, max_iter: s.max_iter })?;
    let inflow = reconstruct_inflow_flux(&sys_t, &out.solution)?;
    let outflow = reconstruct_boundary_flux(&sys_t, &out.solution)?;
    let kappa_eff = working_kappa(&sys_t, &out.solution);
    let exec_seconds = exec.elapsed().as_secs_f64();
    let outcome = etc_core::PcgOutcome {
        solution: out.solution.iter().map(|v| v.as_f64()).collect(),
        iterations: out.iterations,
        converged: out.converged,
        history: out.history,
    };
    Ok(Raw { outcome, kappa_eff, inflow, outflow, prep_seconds, exec_seconds })
}

/// `kappa_eff` with the outflow flux accumulated in the solve's own precision,
/// so a single-precision run stays single precision end to end. In f64 this
/// agrees with `effective_conductivity` to rounding.
fn working_kappa<T: Real>(sys: &DiscreteSystem<T>, p: &[T]) -> f64 {
    let g = &sys.grid;
    let last = (g.nz - 1) * g.slice_len();
    let p_out = T::from_f64(sys.boundary.p_out);
    let total: T = sys.t_out.iter().zip(&p[last..]).map(|(&t, &v)| t * (v - p_out)).sum();
    let drop = sys.boundary.p_in - sys.boundary.p_out;
    total.as_f64() * g.hz() * g.lz / ((g.nx * g.ny) as f64 * drop)
}

fn solve_raw(sys: &DiscreteSystem, rhs: &[f64], refs: ReferenceParams, s: &SolveSettings, start: Instant) -> Result<Raw> {
    match s.precision {
        Precision::F64 => solve_in::<f64>(sys, rhs, refs, s, start),
        Precision::F32 => solve_in::<f32>(sys, rhs, refs, s, start),
    }
}

fn finish(sys: &DiscreteSystem, raw: Raw, refs: ReferenceParams, s: &SolveSettings) -> Homogenized {
    let mut report = SolveReport::new(&raw.outcome, s.precond.label());
    report.precision = s.precision.as_str();
    debug_assert!({
        let k = effective_conductivity(sys, &raw.outflow);
        s.precision == Precision::F32 || (k - raw.kappa_eff).abs() <= 1e-12 * k.abs()
    });
    report.kappa_eff = Some(raw.kappa_eff);
    report.ref_params = Some(refs);
    report.prep_seconds = raw.prep_seconds;
    report.exec_seconds = raw.exec_seconds;
    let (fin, fout): (f64, f64) = (raw.inflow.iter().sum(), raw.outflow.iter().sum());
    Homogenized { report, flux_imbalance: (fin - fout).abs() / fout.abs(), solution: raw.outcome.solution }
}

/// Permute, discretize, choose the reference medium, solve, and turn the
/// outflow flux into `kappa_eff` along `boundary.axis`.
pub fn homogenize(field: &OrthotropicField, boundary: BoundaryConfig, s: &SolveSettings) -> Result<Homogenized> {
    s.validate()?;
    let start = Instant::now();
    let field = field.axis_permute(boundary.axis);
    let sys = build_system(&field, BoundaryConfig { axis: Axis::Z, ..boundary })?;
    let refs = s.ref_mode.params(&coefficient_stats(&sys));
    let rhs = build_rhs(&sys);
    let raw = solve_raw(&sys, &rhs, refs, s, start)?;
    Ok(finish(&sys, raw, refs, s))
}

/// The manufactured smooth problem at `n` cells per axis; the report carries
/// the midpoint L2 error against the exact solution.
pub fn solve_smooth(n: usize, s: &SolveSettings) -> Result<Homogenized> {
    s.validate()?;
    let start = Instant::now();
    let (field, problem) = gen_smooth_problem(n)?;
    let sys = build_system(&field, BoundaryConfig::unit_z())?;
    let refs = s.ref_mode.params(&coefficient_stats(&sys));
    let mut rhs = build_rhs_with_profiles(&sys, |x, y| problem.inflow(x, y), |x, y| problem.outflow(x, y));
    add_source(&sys, &mut rhs, |x, y, z| problem.source(x, y, z))?;
    let raw = solve_raw(&sys, &rhs, refs, s, start)?;
    let mut h = finish(&sys, raw, refs, s);
    // the potential drop is not uniform, so there is no kappa_eff to speak of
    h.report.kappa_eff = None;
    h.flux_imbalance = f64::NAN;
    h.report.l2_error = Some(l2_error_midpoint(&sys.grid, &h.solution, |x, y, z| problem.exact(x, y, z)));
    Ok(h)
}

/// Named generator configurations.
#[derive(Debug, Clone, PartialEq)]
pub enum Config {
    Smooth { n: usize },
    CenterBall { n: usize, kappa_inc: f64 },
    RandomBalls { n: usize, balls: RandomBalls },
    Channels { cells_per_period: usize, periods: usize, psi: f64 },
}

impl Config {
    pub fn preset(n: usize, preset: BallPreset, kappa_inc: f64) -> Self {
        Config::RandomBalls { n, balls: preset.params(kappa_inc) }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Config::Smooth { .. } => "smooth",
            Config::CenterBall { .. } => "center-ball",
            Config::RandomBalls { .. } => "random-balls",
            Config::Channels { .. } => "channels",
        }
    }

    /// Stable one-line description used in reports and file names.
    pub fn describe(&self) -> String {
        match self {
            Config::Smooth { n } => format!("smooth n={n}"),
            Config::CenterBall { n, kappa_inc } => format!("center-ball n={n} kappa_inc={kappa_inc}"),
            Config::RandomBalls { n, balls } => format!(
                "random-balls n={n} count={} r_min={} r_max={} kappa_inc={} seed={}",
                balls.count, balls.r_min, balls.r_max, balls.kappa_inc, balls.seed
            ),
            Config::Channels { cells_per_period, periods, psi } => {
                format!("channels n={} periods={periods} psi={psi}", cells_per_period * periods)
            }
        }
    }

    pub fn field(&self) -> Result<OrthotropicField> {
        Ok(match self {
            Config::Smooth { n } => gen_smooth_problem(*n)?.0,
            Config::CenterBall { n, kappa_inc } => gen_center_ball(*n, *kappa_inc)?,
            Config::RandomBalls { n, balls } => gen_random_balls(*n, balls)?,
            Config::Channels { cells_per_period, periods, psi } => gen_channels(*cells_per_period, *periods, *psi)?,
        })
    }

    /// Solve with the canonical unit drop along z (or the manufactured data
    /// for the smooth case).
    pub fn solve(&self, s: &SolveSettings) -> Result<Homogenized> {
        match self {
            Config::Smooth { n } => solve_smooth(*n, s),
            other => homogenize(&other.field()?, BoundaryConfig::unit_z(), s),
        }
    }
}

/// One row of a resolution sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub n: usize,
    pub dof: usize,
    pub l2_error: Option<f64>,
    pub kappa_eff: Option<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub prep_seconds: f64,
    pub exec_seconds: f64,
}

/// Solves `make(n)` for every `n` in turn.
pub fn run_convergence_study(
    ns: &[usize],
    make: impl Fn(usize) -> Config,
    s: &SolveSettings,
) -> Result<Vec<ConvergenceRow>> {
    ns.iter()
        .map(|&n| {
            let h = make(n).solve(s)?;
            let r = &h.report;
            Ok(ConvergenceRow {
                n,
                dof: n * n * n,
                l2_error: r.l2_error,
                kappa_eff: r.kappa_eff,
                iterations: r.iterations,
                converged: r.converged,
                prep_seconds: r.prep_seconds,
                exec_seconds: r.exec_seconds,
            })
        })
        .collect()
}

pub fn convergence_csv(rows: &[ConvergenceRow]) -> String {
    let opt = |v: Option<f64>| v.map(|x| format!("{x:e}")).unwrap_or_default();
    let mut s = String::from("n,dof,l2_error,kappa_eff,iterations,converged,prep_seconds,exec_seconds\n");
    for r in rows {
        s += &format!(
            "{},{},{},{},{},{},{:.6},{:.6}\n",
            r.n,
            r.dof,
            opt(r.l2_error),
            opt(r.kappa_eff),
            r.iterations,
            r.converged,
            r.prep_seconds,
            r.exec_seconds
        );
    }
    s
}

/// `iter,relres`, one row per iteration starting at 0.
pub fn history_csv(history: &[f64]) -> String {
    let mut s = String::from("iter,relres\n");
    for (i, r) in history.iter().enumerate() {
        s += &format!("{i},{r:e}\n");
    }
    s
}

/// The same field and settings under each preconditioner.
pub fn compare_preconditioners(
    config: &Config,
    kinds: &[PrecondKind],
    s: &SolveSettings,
) -> Result<Vec<(PrecondKind, SolveReport)>> {
    let field = config.field()?;
    kinds
        .iter()
        .map(|&k| Ok((k, homogenize(&field, BoundaryConfig::unit_z(), &s.with_precond(k))?.report)))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelsRow {
    pub psi: f64,
    pub ref_mode: RefMode,
    pub report: SolveReport,
}

/// FCT solves on the channel microstructure for every `(psi, mode)` pair.
pub fn channels_study(
    cells_per_period: usize,
    periods: usize,
    psis: &[f64],
    modes: &[RefMode],
    s: &SolveSettings,
) -> Result<Vec<ChannelsRow>> {
    let mut rows = Vec::new();
    for &psi in psis {
        let field = gen_channels(cells_per_period, periods, psi)?;
        for &m in modes {
            let report = homogenize(&field, BoundaryConfig::unit_z(), &s.with_precond(PrecondKind::Fct).with_ref(m))?.report;
            rows.push(ChannelsRow { psi, ref_mode: m, report });
        }
    }
    Ok(rows)
}

pub fn channels_csv(rows: &[ChannelsRow]) -> String {
    let mut s = String::from("psi,ref,iterations,converged,kappa_eff,lambda_lo,lambda_hi\n");
    for r in rows {
        let p = r.report.ref_params.expect("homogenize always sets reference parameters");
        s += &format!(
            "{},{},{},{},{:e},{:e},{:e}\n",
            r.psi,
            r.ref_mode,
            r.report.iterations,
            r.report.converged,
            r.report.kappa_eff.unwrap_or(f64::NAN),
            p.lambda_lo,
            p.lambda_hi
        );
    }
    s
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrecisionRow {
    pub config: String,
    pub precision: Precision,
    pub rtol: f64,
    pub kappa_eff: f64,
    /// Relative difference to the f64 baseline.
    pub rel_diff: f64,
    pub iterations: usize,
    pub converged: bool,
    pub prep_seconds: f64,
    pub exec_seconds: f64,
}

/// For each configuration: an f64 baseline at `baseline_rtol`, then an f64 and
/// an f32 solve at every rtol in the sweep.
pub fn precision_study(
    configs: &[Config],
    rtols: &[f64],
    baseline_rtol: f64,
    s: &SolveSettings,
) -> Result<Vec<PrecisionRow>> {
    let mut rows = Vec::new();
    for c in configs {
        let field = c.field()?;
        let run = |p: Precision, rtol: f64| {
            homogenize(&field, BoundaryConfig::unit_z(), &s.with_precision(p).with_rtol(rtol)).map(|h| h.report)
        };
        let base = run(Precision::F64, baseline_rtol)?;
        let k0 = base.kappa_eff.unwrap_or(f64::NAN);
        for p in [Precision::F64, Precision::F32] {
            for &rtol in rtols {
                let r = run(p, rtol)?;
                let k = r.kappa_eff.unwrap_or(f64::NAN);
                rows.push(PrecisionRow {
                    config: c.describe(),
                    precision: p,
                    rtol,
                    kappa_eff: k,
                    rel_diff: (k - k0).abs() / k0.abs(),
                    iterations: r.iterations,
                    converged: r.converged,
                    prep_seconds: r.prep_seconds,
                    exec_seconds: r.exec_seconds,
                });
            }
        }
    }
    Ok(rows)
}

pub fn precision_csv(rows: &[PrecisionRow]) -> String {
    let mut s = String::from("config,precision,rtol,kappa_eff,rel_diff,iterations,converged,prep_seconds,exec_seconds\n");
    for r in rows {
        s += &format!(
            "{},{},{:e},{:e},{:e},{},{},{:.6},{:.6}\n",
            r.config, r.precision, r.rtol, r.kappa_eff, r.rel_diff, r.iterations, r.converged, r.prep_seconds, r.exec_seconds
        );
    }
    s
}
