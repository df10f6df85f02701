//! Command-line surface. Every flag is validated before any computation starts.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use etc_core::grid::{BallPreset, RandomBalls};
use etc_core::preconditioner::{PrecondKind, RefMode};
use etc_core::{Axis, BoundaryConfig};

use crate::error::{Error, Result};
use crate::oracle;
use crate::pipeline::{self, Config, Precision, SolveSettings};
use crate::report::Report;
use crate::vox::{self, Dtype};

#[derive(Debug, Parser)]
#[command(name = "etc", version, about = "Effective thermal conductivity of voxelized RVEs")]
pub struct Cli {
    /// Worker threads for the data-parallel kernels (0 = all cores)
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a generated microstructure to a voxel file
    Generate(GenerateArgs),
    /// Homogenize one microstructure and report kappa_eff
    Solve(SolveArgs),
    /// Resolution sweep: error, kappa_eff and iterations per n
    Convergence(ConvergenceArgs),
    /// Residual histories of several preconditioners on one microstructure
    Compare(CompareArgs),
    /// Optimal versus unit reference parameters on the channel microstructure
    Channels(ChannelsArgs),
    /// Single versus double precision kappa_eff on center-ball media
    Precision(PrecisionArgs),
    /// Time the preparation and execution phases of one solve
    Bench(BenchArgs),
    /// Run the dense and transform oracle suites
    Oracle(OracleArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ConfigName {
    Smooth,
    CenterBall,
    RandomBalls,
    Channels,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AxisArg {
    X,
    Y,
    Z,
}

impl From<AxisArg> for Axis {
    fn from(a: AxisArg) -> Self {
        match a {
            AxisArg::X => Axis::X,
            AxisArg::Y => Axis::Y,
            AxisArg::Z => Axis::Z,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PrecondArg {
    Fct,
    Ssor,
    Jacobi,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RefArg {
    Opt,
    One,
}

impl From<RefArg> for RefMode {
    fn from(r: RefArg) -> Self {
        match r {
            RefArg::Opt => RefMode::Opt,
            RefArg::One => RefMode::One,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PrecisionArg {
    F64,
    F32,
}

impl From<PrecisionArg> for Precision {
    fn from(p: PrecisionArg) -> Self {
        match p {
            PrecisionArg::F64 => Precision::F64,
            PrecisionArg::F32 => Precision::F32,
        }
    }
}

/// Generator parameters shared by every subcommand that builds a field.
#[derive(Debug, Clone, Args)]
pub struct GenArgs {
    /// Microstructure generator
    #[arg(long, value_enum)]
    pub config: Option<ConfigName>,
    /// Cells per axis
    #[arg(long, default_value_t = 32)]
    pub n: usize,
    /// Inclusion conductivity (center-ball, random-balls)
    #[arg(long, default_value_t = 10.0)]
    pub kappa_inc: f64,
    /// Number of balls (random-balls)
    #[arg(long, default_value_t = 60)]
    pub count: usize,
    /// Smallest ball radius (random-balls)
    #[arg(long, default_value_t = 0.05)]
    pub r_min: f64,
    /// Largest ball radius (random-balls)
    #[arg(long, default_value_t = 0.12)]
    pub r_max: f64,
    /// Anisotropy exponent (channels)
    #[arg(long, default_value_t = 1.0)]
    pub psi: f64,
    /// Periods per axis; n must be a multiple of 8 * periods (channels)
    #[arg(long, default_value_t = 1)]
    pub periods: usize,
    /// Random seed (random-balls)
    #[arg(long, default_value_t = 0xA11CE)]
    pub seed: u64,
}

impl GenArgs {
    fn build(&self, name: ConfigName) -> Result<Config> {
        Ok(match name {
            ConfigName::Smooth => Config::Smooth { n: self.n },
            ConfigName::CenterBall => Config::CenterBall { n: self.n, kappa_inc: self.kappa_inc },
            ConfigName::RandomBalls => Config::RandomBalls {
                n: self.n,
                balls: RandomBalls {
                    count: self.count,
                    r_min: self.r_min,
                    r_max: self.r_max,
                    kappa_inc: self.kappa_inc,
                    seed: self.seed,
                },
            },
            ConfigName::Channels => {
                if self.periods == 0 || !self.n.is_multiple_of(self.periods) {
                    return Err(Error::Usage(format!(
                        "--n {} is not a multiple of --periods {}",
                        self.n, self.periods
                    )));
                }
                Config::Channels { cells_per_period: self.n / self.periods, periods: self.periods, psi: self.psi }
            }
        })
    }

    fn config(&self) -> Result<Config> {
        let name = self.config.ok_or_else(|| Error::Usage("--config is required".into()))?;
        self.build(name)
    }
}

/// PCG and preconditioner settings.
#[derive(Debug, Clone, Args)]
pub struct PcgArgs {
    /// Stop once |r|/|b| <= rtol (default 1e-9, bench 1e-5)
    #[arg(long)]
    pub rtol: Option<f64>,
    /// Iteration cap
    #[arg(long, default_value_t = 1024)]
    pub max_iter: usize,
    /// Preconditioner
    #[arg(long, value_enum, default_value_t = PrecondArg::Fct)]
    pub precond: PrecondArg,
    /// SSOR relaxation factor in (0, 2)
    #[arg(long, default_value_t = 1.0)]
    pub omega: f64,
    /// Reference medium for fct
    #[arg(long = "ref", value_enum, default_value_t = RefArg::Opt)]
    pub ref_mode: RefArg,
    /// Floating-point precision of the solve
    #[arg(long, value_enum, default_value_t = PrecisionArg::F64)]
    pub precision: PrecisionArg,
}

fn precond_kind(p: PrecondArg, omega: f64) -> Result<PrecondKind> {
    Ok(match p {
        PrecondArg::Fct => PrecondKind::Fct,
        PrecondArg::Ssor => PrecondKind::parse(&format!("ssor:{omega}"), omega)?,
        PrecondArg::Jacobi => PrecondKind::Jacobi,
        PrecondArg::None => PrecondKind::None,
    })
}

impl PcgArgs {
    fn settings(&self, default_rtol: f64) -> Result<SolveSettings> {
        let s = SolveSettings {
            rtol: self.rtol.unwrap_or(default_rtol),
            max_iter: self.max_iter,
            precond: precond_kind(self.precond, self.omega)?,
            ref_mode: self.ref_mode.into(),
            precision: self.precision.into(),
        };
        s.validate()?;
        Ok(s)
    }
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub gen: GenArgs,
    /// Scalar width stored in the file
    #[arg(long, value_enum, default_value_t = PrecisionArg::F64)]
    pub precision: PrecisionArg,
    /// Output voxel file
    #[arg(short = 'o', long = "output")]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// Voxel file; omit to generate the field from --config
    pub input: Option<PathBuf>,
    #[command(flatten)]
    pub gen: GenArgs,
    /// Dirichlet direction
    #[arg(long, value_enum, default_value_t = AxisArg::Z)]
    pub axis: AxisArg,
    /// Potential on the inflow face
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub p_in: f64,
    /// Potential on the outflow face
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub p_out: f64,
    #[command(flatten)]
    pub pcg: PcgArgs,
    /// Write the report JSON here
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Write the residual history CSV here
    #[arg(long)]
    pub history: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ConvergenceArgs {
    /// smooth or center-ball
    #[arg(long, value_enum, default_value_t = ConfigName::Smooth)]
    pub config: ConfigName,
    /// Resolutions to sweep
    #[arg(long, value_delimiter = ',', default_values_t = [16, 32, 64])]
    pub n: Vec<usize>,
    /// Inclusion conductivity (center-ball)
    #[arg(long, default_value_t = 10.0)]
    pub kappa_inc: f64,
    #[command(flatten)]
    pub pcg: PcgArgs,
    /// Output CSV (standard output if omitted)
    #[arg(short = 'o', long = "output")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub gen: GenArgs,
    /// Preconditioners to compare
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [PrecondArg::Fct, PrecondArg::Ssor, PrecondArg::Jacobi, PrecondArg::None])]
    pub precond: Vec<PrecondArg>,
    /// SSOR relaxation factor in (0, 2)
    #[arg(long, default_value_t = 1.0)]
    pub omega: f64,
    /// Stop once |r|/|b| <= rtol
    #[arg(long, default_value_t = 1e-5)]
    pub rtol: f64,
    /// Iteration cap
    #[arg(long, default_value_t = 1024)]
    pub max_iter: usize,
    /// Reference medium for fct
    #[arg(long = "ref", value_enum, default_value_t = RefArg::Opt)]
    pub ref_mode: RefArg,
    /// Floating-point precision of the solves
    #[arg(long, value_enum, default_value_t = PrecisionArg::F64)]
    pub precision: PrecisionArg,
    /// Directory for the history CSVs
    #[arg(short = 'o', long = "output")]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct ChannelsArgs {
    /// Cells per axis
    #[arg(long, default_value_t = 64)]
    pub n: usize,
    /// Periods per axis
    #[arg(long, default_value_t = 8)]
    pub periods: usize,
    /// Anisotropy exponents
    #[arg(long, value_delimiter = ',', default_values_t = [1.0, 2.0, 3.0])]
    pub psi: Vec<f64>,
    /// Reference modes
    #[arg(long = "ref", value_enum, value_delimiter = ',', default_values_t = [RefArg::Opt, RefArg::One])]
    pub ref_mode: Vec<RefArg>,
    /// Stop once |r|/|b| <= rtol
    #[arg(long, default_value_t = 1e-5)]
    pub rtol: f64,
    /// Iteration cap
    #[arg(long, default_value_t = 1024)]
    pub max_iter: usize,
    /// Floating-point precision of the solves
    #[arg(long, value_enum, default_value_t = PrecisionArg::F64)]
    pub precision: PrecisionArg,
    /// Directory for the history CSVs and the summary
    #[arg(short = 'o', long = "output")]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct PrecisionArgs {
    /// Cells per axis
    #[arg(long, default_value_t = 64)]
    pub n: usize,
    /// Inclusion conductivities
    #[arg(long, value_delimiter = ',', default_values_t = [0.01, 0.1, 10.0, 100.0])]
    pub kappa_inc: Vec<f64>,
    /// rtol sweep
    #[arg(long, value_delimiter = ',', default_values_t = [1e-5, 1e-6, 1e-7, 1e-8, 1e-9])]
    pub rtol: Vec<f64>,
    /// Iteration cap
    #[arg(long, default_value_t = 1024)]
    pub max_iter: usize,
    /// Output CSV (standard output if omitted)
    #[arg(short = 'o', long = "output")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub gen: GenArgs,
    #[command(flatten)]
    pub pcg: PcgArgs,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    /// Largest transform size and random-grid extent
    #[arg(long, default_value_t = 9)]
    pub max_n: usize,
}

fn write(path: &Path, content: &str) -> Result<()> {
    fs::write(path, content).map_err(|e| Error::io(path, e))
}

fn emit(path: Option<&Path>, content: &str) -> Result<()> {
    match path {
        Some(p) => write(p, content),
        None => std::io::stdout().write_all(content.as_bytes()).map_err(|e| Error::io("<stdout>", e)),
    }
}

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

fn file_label(s: &str) -> String {
    s.chars().map(|c| if c.is_ascii_alphanumeric() || c == '.' || c == '_' { c } else { '-' }).collect()
}

fn check_rtol(rtol: f64) -> Result<()> {
    SolveSettings::default().with_rtol(rtol).validate()
}

/// Runs one parsed command; the value is the process exit status.
pub fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Generate(a) => {
            let config = a.gen.config()?;
            let dtype = match a.precision {
                PrecisionArg::F64 => Dtype::F64,
                PrecisionArg::F32 => Dtype::F32,
            };
            vox::write_vox(&config.field()?, dtype, &a.output)?;
            Ok(0)
        }
        Command::Solve(a) => {
            let s = a.pcg.settings(1e-9)?;
            let boundary = BoundaryConfig::new(a.axis.into(), a.p_in, a.p_out)?;
            let (label, h, grid) = match (&a.input, a.gen.config) {
                (Some(path), None) => {
                    let (field, _) = vox::read_vox(path)?;
                    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
                    (format!("file {name}"), pipeline::homogenize(&field, boundary, &s)?, *field.grid())
                }
                (None, Some(_)) => {
                    let config = a.gen.config()?;
                    let field = config.field()?;
                    let h = match config {
                        Config::Smooth { n } => {
                            if boundary != BoundaryConfig::unit_z() {
                                return Err(Error::Usage(
                                    "the smooth problem fixes its own boundary data; leave --axis, --p-in, --p-out at their defaults".into(),
                                ));
                            }
                            pipeline::solve_smooth(n, &s)?
                        }
                        _ => pipeline::homogenize(&field, boundary, &s)?,
                    };
                    (config.describe(), h, *field.grid())
                }
                (Some(_), Some(_)) => return Err(Error::Usage("give either an input file or --config, not both".into())),
                (None, None) => return Err(Error::Usage("give an input file or --config".into())),
            };
            let report = Report::new(label, &grid, &boundary, s.rtol, &h);
            if let Some(p) = &a.history {
                write(p, &pipeline::history_csv(&h.report.relative_residuals))?;
            }
            match &a.report {
                Some(p) => write(p, &report.to_json())?,
                None => emit(None, &report.to_json())?,
            }
            if !report.converged {
                eprintln!("etc: no convergence to rtol {} within {} iterations", s.rtol, s.max_iter);
                return Ok(1);
            }
            Ok(0)
        }
        Command::Convergence(a) => {
            let s = a.pcg.settings(1e-9)?;
            if a.n.is_empty() {
                return Err(Error::Usage("--n needs at least one resolution".into()));
            }
            let make = |n: usize| match a.config {
                ConfigName::CenterBall => Ok(Config::CenterBall { n, kappa_inc: a.kappa_inc }),
                ConfigName::Smooth => Ok(Config::Smooth { n }),
                _ => Err(Error::Usage("convergence supports --config smooth or center-ball".into())),
            };
            make(a.n[0])?;
            let rows = pipeline::run_convergence_study(&a.n, |n| make(n).unwrap(), &s)?;
            emit(a.output.as_deref(), &pipeline::convergence_csv(&rows))?;
            Ok(0)
        }
        Command::Compare(a) => {
            check_rtol(a.rtol)?;
            let config = a.gen.build(a.gen.config.unwrap_or(ConfigName::CenterBall))?;
            let kinds = a.precond.iter().map(|&p| precond_kind(p, a.omega)).collect::<Result<Vec<_>>>()?;
            let s = SolveSettings {
                rtol: a.rtol,
                max_iter: a.max_iter,
                precond: PrecondKind::Fct,
                ref_mode: a.ref_mode.into(),
                precision: a.precision.into(),
            };
            s.validate()?;
            let results = pipeline::compare_preconditioners(&config, &kinds, &s)?;
            create_dir(&a.output)?;
            let mut summary = String::from("precond,iterations,converged,kappa_eff\n");
            for (k, r) in &results {
                write(&a.output.join(format!("{}.csv", file_label(&k.label()))), &pipeline::history_csv(&r.relative_residuals))?;
                summary += &format!("{},{},{},{:e}\n", k.label(), r.iterations, r.converged, r.kappa_eff.unwrap_or(f64::NAN));
            }
            write(&a.output.join("summary.csv"), &summary)?;
            emit(None, &summary)?;
            Ok(0)
        }
        Command::Channels(a) => {
            let s = SolveSettings {
                rtol: a.rtol,
                max_iter: a.max_iter,
                precision: a.precision.into(),
                ..SolveSettings::default()
            };
            s.validate()?;
            if a.periods == 0 || a.n % a.periods != 0 {
                return Err(Error::Usage(format!("--n {} is not a multiple of --periods {}", a.n, a.periods)));
            }
            let modes: Vec<RefMode> = a.ref_mode.iter().map(|&m| m.into()).collect();
            let rows = pipeline::channels_study(a.n / a.periods, a.periods, &a.psi, &modes, &s)?;
            create_dir(&a.output)?;
            for r in &rows {
                let name = file_label(&format!("psi{}_{}", r.psi, r.ref_mode));
                write(&a.output.join(format!("{name}.csv")), &pipeline::history_csv(&r.report.relative_residuals))?;
            }
            let summary = pipeline::channels_csv(&rows);
            write(&a.output.join("summary.csv"), &summary)?;
            emit(None, &summary)?;
            Ok(0)
        }
        Command::Precision(a) => {
            for &r in &a.rtol {
                check_rtol(r)?;
            }
            let configs: Vec<Config> = a.kappa_inc.iter().map(|&k| Config::CenterBall { n: a.n, kappa_inc: k }).collect();
            let s = SolveSettings { max_iter: a.max_iter, ..SolveSettings::default() };
            let rows = pipeline::precision_study(&configs, &a.rtol, 1e-9, &s)?;
            emit(a.output.as_deref(), &pipeline::precision_csv(&rows))?;
            Ok(0)
        }
        Command::Bench(a) => {
            let s = a.pcg.settings(1e-5)?;
            let config = match a.gen.config {
                Some(_) => a.gen.config()?,
                None => Config::preset(a.gen.n, BallPreset::A, a.gen.kappa_inc),
            };
            let h = config.solve(&s)?;
            let r = &h.report;
            println!("config,precond,precision,workers,iterations,prep_seconds,exec_seconds");
            println!(
                "{},{},{},{},{},{:.6},{:.6}",
                config.describe(),
                r.preconditioner,
                r.precision,
                etc_core::workers(),
                r.iterations,
                r.prep_seconds,
                r.exec_seconds
            );
            Ok(if r.converged { 0 } else { 1 })
        }
        Command::Oracle(a) => {
            if a.max_n == 0 {
                return Err(Error::Usage("--max-n must be at least 1".into()));
            }
            let checks = oracle::run_all(a.max_n)?;
            for c in &checks {
                println!(
                    "{} {} ({} cases, worst {:.3e}, limit {:.0e})",
                    if c.passed() { "PASS" } else { "FAIL" },
                    c.name,
                    c.cases,
                    c.worst,
                    c.limit
                );
            }
            Ok(if checks.iter().all(oracle::Check::passed) { 0 } else { 1 })
        }
    }
}

/// Parses `args`, configures the thread pool and runs the command.
pub fn main_with<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    if cli.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global() {
            eprintln!("etc: {e}");
            return 2;
        }
    }
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("etc: {e}");
            e.exit_code()
        }
    }
}
