use std::path::PathBuf;

use clap::{Args, Subcommand};
use dnls_core::minimize::{LambdaPolicy, SolverConfig};
use dnls_core::rgrid::{GridControls, DEFAULT_NODES, DEFAULT_RMIN_FRACTION};
use dnls_core::specfun::PhysicalParams;
use serde::Serialize;

use crate::error::{CliError, CliResult};

fn config_err(e: impl ToString) -> CliError {
    CliError::Config(e.to_string())
}

fn positive(name: &str, v: f64) -> CliResult<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(CliError::Config(format!(
            "--{name} must be a positive number, got {v}"
        )))
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Mass-constrained ground state with verification
    GroundState(GroundStateArgs),
    /// Action minimizer on the Nehari manifold at one frequency
    ActionMin(ActionArgs),
    /// Singular branch q G_lambda of the Nehari manifold
    NehariScan(NehariArgs),
    /// d(omega), d0(omega) and the branch infimum across the threshold
    DCurve(DCurveArgs),
    /// Randomized rearrangement inequality battery
    RearrangeTest(RearrangeArgs),
    /// Replay the pointwise checks on a saved state file
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PhysicsArgs {
    /// Nonlinearity power p > 2
    #[arg(long, default_value_t = 3.0)]
    pub p: f64,
    /// Point interaction strength alpha
    #[arg(long, default_value_t = 0.0)]
    pub alpha: f64,
}

impl PhysicsArgs {
    pub fn params(&self) -> CliResult<PhysicalParams> {
        PhysicalParams::new(self.p, self.alpha).map_err(config_err)
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GridArgs {
    /// Radial grid nodes
    #[arg(long, default_value_t = DEFAULT_NODES)]
    pub nodes: usize,
    /// Innermost radius as a fraction of the truncation radius
    #[arg(long, default_value_t = DEFAULT_RMIN_FRACTION)]
    pub rmin_fraction: f64,
}

impl GridArgs {
    pub fn controls(&self) -> CliResult<GridControls> {
        if self.nodes < 16 {
            return Err(CliError::Config(format!(
                "--nodes must be at least 16, got {}",
                self.nodes
            )));
        }
        if !(self.rmin_fraction > 0.0 && self.rmin_fraction <= 1e-6) {
            return Err(CliError::Config(format!(
                "--rmin-fraction must lie in (0, 1e-6] to resolve the log singularity, got {}",
                self.rmin_fraction
            )));
        }
        Ok(GridControls {
            nodes: self.nodes,
            rmin_fraction: self.rmin_fraction,
        })
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SolverArgs {
    /// Relative projected-gradient tolerance
    #[arg(long, default_value_t = SolverConfig::default().grad_tol)]
    pub grad_tol: f64,
    #[arg(long, default_value_t = SolverConfig::default().max_iters)]
    pub max_iters: usize,
    /// Initial step length
    #[arg(long, default_value_t = SolverConfig::default().step)]
    pub step: f64,
    /// First multistart seed
    #[arg(long, default_value_t = SolverConfig::default().seed)]
    pub seed: u64,
    /// Number of multistart runs
    #[arg(long, default_value_t = SolverConfig::default().seeds)]
    pub seeds: usize,
    /// Euler-Lagrange residual tolerance
    #[arg(long, default_value_t = SolverConfig::default().el_tol)]
    pub el_tol: f64,
    /// Boundary-condition residual tolerance
    #[arg(long, default_value_t = SolverConfig::default().bc_tol)]
    pub bc_tol: f64,
    /// Keep the decomposition parameter fixed instead of tracking omega
    #[arg(long)]
    pub fixed_lambda: Option<f64>,
}

impl SolverArgs {
    pub fn config(&self) -> CliResult<SolverConfig> {
        let cfg = SolverConfig {
            step: self.step,
            max_iters: self.max_iters,
            grad_tol: self.grad_tol,
            lambda_policy: match self.fixed_lambda {
                Some(lambda) => LambdaPolicy::Fixed { lambda },
                None => LambdaPolicy::TrackOmega,
            },
            seed: self.seed,
            seeds: self.seeds,
            el_tol: self.el_tol,
            bc_tol: self.bc_tol,
        };
        cfg.validate().map_err(config_err)?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Args, Serialize)]
#[group(required = true, multiple = false)]
pub struct FrequencyArgs {
    /// Frequency omega
    #[arg(long)]
    pub omega: Option<f64>,
    /// Frequency as a multiple of the threshold omega0
    #[arg(long)]
    pub omega_rel: Option<f64>,
}

impl FrequencyArgs {
    pub fn resolve(&self, params: &PhysicalParams) -> CliResult<f64> {
        match (self.omega, self.omega_rel) {
            (Some(w), _) => positive("omega", w).map(|_| w),
            (_, Some(k)) => positive("omega-rel", k).map(|_| k * params.omega0),
            _ => Err(CliError::Config(
                "one of --omega, --omega-rel is required".into(),
            )),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct OutArgs {
    /// Output directory
    #[arg(long, env = "DNLS_OUT_DIR", default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GroundStateArgs {
    /// Mass mu > 0
    #[arg(long, default_value_t = 1.0)]
    pub mu: f64,
    #[command(flatten)]
    pub physics: PhysicsArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    #[serde(skip)]
    pub out: OutArgs,
}

impl GroundStateArgs {
    pub fn validate(&self) -> CliResult<(PhysicalParams, GridControls, SolverConfig)> {
        positive("mu", self.mu)?;
        let params = self.physics.params()?;
        params.require_subcritical().map_err(config_err)?;
        Ok((params, self.grid.controls()?, self.solver.config()?))
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ActionArgs {
    #[command(flatten)]
    pub frequency: FrequencyArgs,
    #[command(flatten)]
    pub physics: PhysicsArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    #[serde(skip)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct NehariArgs {
    #[command(flatten)]
    pub frequency: FrequencyArgs,
    #[command(flatten)]
    pub physics: PhysicsArgs,
    /// Smallest lambda, as a multiple of omega0
    #[arg(long, default_value_t = 1e-3)]
    pub lambda_min_rel: f64,
    /// Largest lambda, as a multiple of omega0
    #[arg(long, default_value_t = 1e3)]
    pub lambda_max_rel: f64,
    /// Log-spaced sample count
    #[arg(long, default_value_t = 400)]
    pub points: usize,
    #[command(flatten)]
    #[serde(skip)]
    pub out: OutArgs,
}

impl NehariArgs {
    pub fn validate(&self) -> CliResult<()> {
        positive("lambda-min-rel", self.lambda_min_rel)?;
        positive("lambda-max-rel", self.lambda_max_rel)?;
        if self.lambda_min_rel >= self.lambda_max_rel {
            return Err(CliError::Config(
                "--lambda-min-rel must be below --lambda-max-rel".into(),
            ));
        }
        if self.points < 2 {
            return Err(CliError::Config("--points must be at least 2".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DCurveArgs {
    /// Lowest frequency, as a multiple of omega0
    #[arg(long, default_value_t = 0.2)]
    pub omega_min_rel: f64,
    /// Highest frequency, as a multiple of omega0
    #[arg(long, default_value_t = 3.0)]
    pub omega_max_rel: f64,
    /// Evenly spaced frequencies
    #[arg(long, default_value_t = 29)]
    pub points: usize,
    /// Worker threads (default: all cores); does not change the output
    #[arg(long)]
    #[serde(skip)]
    pub threads: Option<usize>,
    #[command(flatten)]
    pub physics: PhysicsArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    #[serde(skip)]
    pub out: OutArgs,
}

impl DCurveArgs {
    pub fn validate(&self) -> CliResult<()> {
        positive("omega-min-rel", self.omega_min_rel)?;
        positive("omega-max-rel", self.omega_max_rel)?;
        if self.omega_min_rel >= self.omega_max_rel {
            return Err(CliError::Config(
                "--omega-min-rel must be below --omega-max-rel".into(),
            ));
        }
        if self.points < 2 {
            return Err(CliError::Config("--points must be at least 2".into()));
        }
        if self.threads == Some(0) {
            return Err(CliError::Config("--threads must be positive".into()));
        }
        Ok(())
    }

    pub fn frequencies_rel(&self) -> Vec<f64> {
        let (a, b) = (self.omega_min_rel, self.omega_max_rel);
        let m = (self.points - 1) as f64;
        (0..self.points)
            .map(|k| a + (b - a) * k as f64 / m)
            .collect()
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct RearrangeArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Cells per side
    #[arg(long, default_value_t = 64)]
    pub n: usize,
    /// Half-width of the square
    #[arg(long, default_value_t = 4.0)]
    pub extent: f64,
    /// Random pairs for the exact inequalities
    #[arg(long, default_value_t = 500)]
    pub pairs: usize,
    /// Polya-Szego trials
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    /// Exponents for the sum inequality
    #[arg(long, value_delimiter = ',', default_value = "1,2,3,3.5")]
    pub powers: Vec<f64>,
    #[command(flatten)]
    #[serde(skip)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct VerifyArgs {
    /// State file written by ground-state or action-min
    pub state: PathBuf,
    /// Euler-Lagrange residual tolerance
    #[arg(long, default_value_t = SolverConfig::default().el_tol)]
    pub el_tol: f64,
    /// Boundary-condition residual tolerance
    #[arg(long, default_value_t = SolverConfig::default().bc_tol)]
    pub bc_tol: f64,
    #[command(flatten)]
    #[serde(skip)]
    pub out: OutArgs,
}
