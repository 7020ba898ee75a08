//! Constrained minimization on the radial grid.
//!
//! Every solver is a Riemannian projected-gradient descent on a constraint
//! surface (mass sphere or unit `L^p` sphere), with the metric
//! `P = diag(K + σW, m_q)`: `K` the stiffness matrix, `W` the quadrature
//! weights and `m_q = α + θ_λ`. At `λ = σ = ω` this is exactly the Hessian of
//! `½Q_ω`, which makes the descent behave like inverse iteration. Steps are
//! retracted onto the constraint by scaling and accepted under Armijo
//! backtracking.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::functionals::{
    evaluate, green_table, lagrange_frequency, rebase, DecomposedState, FunctionalReport, Pieces,
};
use crate::rgrid::{GridControls, RadialField, RadialGrid};
use crate::specfun::PhysicalParams;
use crate::verify::{boundary_condition_residual, el_residual};

const ARMIJO: f64 = 1e-4;
const MAX_HALVINGS: usize = 60;
const TRACK_INTERVAL: usize = 50;
const MAX_REBASES: usize = 12;
/// Relative objective level at which a sub-threshold action run is declared collapsed.
pub const COLLAPSE_FLOOR: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LambdaPolicy {
    Fixed { lambda: f64 },
    TrackOmega,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub step: f64,
    pub max_iters: usize,
    pub grad_tol: f64,
    pub lambda_policy: LambdaPolicy,
    pub seed: u64,
    /// Number of multistart runs; seeds `seed, seed+1, …`.
    pub seeds: usize,
    pub el_tol: f64,
    pub bc_tol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            step: 1.0,
            max_iters: 20_000,
            grad_tol: 1e-7,
            lambda_policy: LambdaPolicy::TrackOmega,
            seed: 0,
            seeds: 3,
            el_tol: 1e-3,
            bc_tol: 1e-2,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !(self.step > 0.0 && self.step.is_finite()) {
            return bad(format!("step must be positive, got {}", self.step));
        }
        for (name, v) in [
            ("grad_tol", self.grad_tol),
            ("el_tol", self.el_tol),
            ("bc_tol", self.bc_tol),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("{name} must be positive, got {v}"));
            }
        }
        if self.max_iters == 0 {
            return bad("max_iters must be at least 1".into());
        }
        if self.seeds == 0 {
            return bad("seeds must be at least 1".into());
        }
        if let LambdaPolicy::Fixed { lambda } = self.lambda_policy {
            if !(lambda > 0.0 && lambda.is_finite()) {
                return bad(format!("fixed lambda must be positive, got {lambda}"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Residuals {
    pub el: f64,
    pub bc: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub objective_initial: f64,
    pub objective_final: f64,
    /// Final `‖d‖_P / ‖x‖_P`.
    pub projected_gradient: f64,
    /// Constraint multiplier; for mass problems the frequency `ω`.
    pub multiplier: f64,
    pub rebases: usize,
    pub stalled: bool,
    pub seeds: Vec<u64>,
    pub objectives: Vec<f64>,
    pub multistart_spread: f64,
    pub multistart_disagreement: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveResult {
    #[serde(skip)]
    pub state: DecomposedState,
    pub report: FunctionalReport,
    pub omega_recovered: Option<f64>,
    pub d_omega: Option<f64>,
    #[serde(rename = "C_omega")]
    pub c_omega: Option<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Sub-threshold action run: the objective collapsed toward zero.
    pub degenerate: bool,
    pub residuals: Residuals,
    pub diagnostics: Diagnostics,
}

#[derive(Debug, Clone, Copy)]
enum Objective {
    /// `E` on `‖u‖₂² = μ`
    Energy,
    /// `Q_ω` on `‖u‖_p^p = 1`
    Action { omega: f64 },
}

struct Problem<'a> {
    grid: Arc<RadialGrid>,
    params: &'a PhysicalParams,
    lambda: f64,
    green: Vec<f64>,
    a: f64,
    objective: Objective,
    target: f64,
    freeze_q: bool,
    sigma: f64,
    m_q: f64,
}

#[derive(Clone)]
struct Point {
    phi: Vec<f64>,
    q: f64,
}

struct Eval {
    f: f64,
    q_omega: f64,
    gf: Vec<f64>,
    gfq: f64,
    gc: Vec<f64>,
    gcq: f64,
    k_phi: Vec<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl<'a> Problem<'a> {
    fn new(
        grid: Arc<RadialGrid>,
        params: &'a PhysicalParams,
        lambda: f64,
        objective: Objective,
        target: f64,
        freeze_q: bool,
        sigma: f64,
    ) -> Self {
        let green = green_table(&grid, lambda);
        let a = params.alpha_plus_theta(lambda);
        let floor = 1e-3 / (4.0 * PI);
        let m_q = if a > floor {
            a
        } else {
            a.abs() + 0.1 / (4.0 * PI)
        };
        Self {
            grid,
            params,
            lambda,
            green,
            a,
            objective,
            target,
            freeze_q,
            sigma,
            m_q,
        }
    }

    fn pieces(&self, x: &Point) -> Pieces {
        Pieces::compute(&self.grid, &x.phi, x.q, &self.green, self.params.p)
    }

    /// Objective after scaling `x` onto the constraint, and the scale used.
    fn retracted_value(&self, x: &Point) -> Option<(f64, f64)> {
        let pc = self.pieces(x);
        let q_form = pc.quadratic(x.q, self.lambda, self.params);
        let m = pc.mass(x.q, self.lambda);
        let p = self.params.p;
        match self.objective {
            Objective::Energy => {
                if !(m > 0.0) {
                    return None;
                }
                let s = (self.target / m).sqrt();
                Some((0.5 * s * s * q_form - s.powf(p) * pc.lp / p, s))
            }
            Objective::Action { omega } => {
                let qw = q_form + omega * m;
                if !(qw > 0.0 && pc.lp > 0.0) {
                    return None;
                }
                let s = (self.target / pc.lp).powf(1.0 / p);
                Some((s * s * qw, s))
            }
        }
    }

    fn eval(&self, x: &Point) -> Eval {
        let grid = &self.grid;
        let w = grid.weights();
        let g = &self.green;
        let p = self.params.p;
        let (q, lambda) = (x.q, self.lambda);
        let n = x.phi.len();
        let u: Vec<f64> = x.phi.iter().zip(g).map(|(f, g)| f + q * g).collect();
        let mut lg = vec![0.0; n];
        let lp = grid.lp_p_values_grad(&u, p, &mut lg);
        let mut k_phi = vec![0.0; n];
        grid.stiffness_apply(&x.phi, &mut k_phi);
        let pc = Pieces {
            gradsq: dot(&x.phi, &k_phi),
            phi_sq: x.phi.iter().zip(w).map(|(f, w)| w * f * f).sum(),
            cross: x
                .phi
                .iter()
                .zip(w)
                .zip(g)
                .map(|((f, w), g)| w * f * g)
                .sum(),
            lp,
        };
        let q_form = pc.quadratic(q, lambda, self.params);
        let mass = pc.mass(q, lambda);
        let lgq = dot(&lg, g);
        let dq_phi = |i: usize| 2.0 * k_phi[i] - 2.0 * lambda * q * w[i] * g[i];
        let dq_q = -2.0 * lambda * pc.cross - q / (2.0 * PI) + 2.0 * self.a * q;
        let dm_phi = |i: usize| 2.0 * w[i] * u[i];
        let dm_q = 2.0 * pc.cross + q / (2.0 * PI * lambda);
        let mut e = match self.objective {
            Objective::Energy => Eval {
                f: 0.5 * q_form - lp / p,
                q_omega: f64::NAN,
                gf: (0..n).map(|i| 0.5 * dq_phi(i) - lg[i] / p).collect(),
                gfq: 0.5 * dq_q - lgq / p,
                gc: (0..n).map(dm_phi).collect(),
                gcq: dm_q,
                k_phi,
            },
            Objective::Action { omega } => {
                let qw = q_form + omega * mass;
                Eval {
                    f: qw,
                    q_omega: qw,
                    gf: (0..n).map(|i| dq_phi(i) + omega * dm_phi(i)).collect(),
                    gfq: dq_q + omega * dm_q,
                    gc: lg,
                    gcq: lgq,
                    k_phi,
                }
            }
        };
        if self.freeze_q {
            e.gfq = 0.0;
            e.gcq = 0.0;
        }
        e
    }

    fn precondition(&self, r: &[f64], rq: f64, scratch: &mut Vec<f64>) -> (Vec<f64>, f64) {
        let mut z = r.to_vec();
        self.grid.solve_shifted(self.sigma, &mut z, scratch);
        let zq = if self.freeze_q { 0.0 } else { rq / self.m_q };
        (z, zq)
    }

    fn norm_p_sq(&self, x: &Point, k_phi: &[f64]) -> f64 {
        let w = self.grid.weights();
        dot(&x.phi, k_phi)
            + self.sigma * x.phi.iter().zip(w).map(|(f, w)| w * f * f).sum::<f64>()
            + self.m_q * x.q * x.q
    }

    fn state(&self, x: &Point) -> Result<DecomposedState> {
        DecomposedState::new(
            self.lambda,
            x.q,
            RadialField::new(Arc::clone(&self.grid), x.phi.clone())?,
        )
    }

    fn scale_onto(&self, x: &mut Point) -> bool {
        match self.retracted_value(x) {
            Some((_, s)) => {
                x.phi.iter_mut().for_each(|v| *v *= s);
                x.q *= s;
                true
            }
            None => false,
        }
    }
}

struct Descent {
    x: Point,
    f: f64,
    f_initial: f64,
    rho: f64,
    /// Multiplier `η` with `∇f ≈ η ∇c`.
    eta: f64,
    iterations: usize,
    converged: bool,
    stalled: bool,
    collapsed: bool,
    step: f64,
}

/// Projected gradient descent from `x` (already on the constraint).
fn descend(
    prob: &Problem,
    mut x: Point,
    budget: usize,
    tol: f64,
    mut step: f64,
    collapse: Option<f64>,
) -> Descent {
    let mut scratch = Vec::new();
    let mut ev = prob.eval(&x);
    let f_initial = ev.f;
    let mut out = Descent {
        x: x.clone(),
        f: ev.f,
        f_initial,
        rho: f64::INFINITY,
        eta: 0.0,
        iterations: 0,
        converged: false,
        stalled: false,
        collapsed: false,
        step,
    };
    for it in 0..=budget {
        let (zc, zcq) = prob.precondition(&ev.gc, ev.gcq, &mut scratch);
        let (zf, zfq) = prob.precondition(&ev.gf, ev.gfq, &mut scratch);
        let eta = (dot(&ev.gf, &zc) + ev.gfq * zcq) / (dot(&ev.gc, &zc) + ev.gcq * zcq);
        let d: Vec<f64> = zf.iter().zip(&zc).map(|(a, b)| -(a - eta * b)).collect();
        let dq = -(zfq - eta * zcq);
        let gp: Vec<f64> = ev.gf.iter().zip(&ev.gc).map(|(a, b)| a - eta * b).collect();
        let gpq = ev.gfq - eta * ev.gcq;
        let slope = dot(&gp, &d) + gpq * dq;
        let rho = (-slope / prob.norm_p_sq(&x, &ev.k_phi)).max(0.0).sqrt();
        out.rho = rho;
        out.eta = eta;
        out.f = ev.f;
        out.iterations = it;
        if rho < tol {
            out.converged = true;
            break;
        }
        if let Some(floor) = collapse {
            if ev.f <= floor * f_initial {
                out.collapsed = true;
                break;
            }
        }
        if it == budget {
            break;
        }
        let mut accepted = None;
        for _ in 0..MAX_HALVINGS {
            let trial = Point {
                phi: x.phi.iter().zip(&d).map(|(a, b)| a + step * b).collect(),
                q: x.q + step * dq,
            };
            if trial.q >= 0.0 {
                if let Some((ft, _)) = prob.retracted_value(&trial) {
                    let armijo = ft <= ev.f + ARMIJO * step * slope;
                    // rounding-limited regime: accept any non-increase
                    let flat = (ARMIJO * step * slope).abs() < 1e-13 * ev.f.abs() && ft <= ev.f;
                    if ft.is_finite() && (armijo || flat) {
                        accepted = Some(trial);
                        break;
                    }
                }
            }
            step *= 0.5;
        }
        match accepted {
            Some(mut t) => {
                prob.scale_onto(&mut t);
                x = t;
                ev = prob.eval(&x);
                step = (step * 1.5).min(64.0);
            }
            None => {
                out.stalled = true;
                break;
            }
        }
    }
    out.x = x;
    out.step = step;
    out
}

fn lambda_start(params: &PhysicalParams, config: &SolverConfig) -> f64 {
    match config.lambda_policy {
        LambdaPolicy::Fixed { lambda } => lambda,
        LambdaPolicy::TrackOmega => 2.0 * params.omega0,
    }
}

/// Gaussian regular part carrying half of `mu` and a singular part carrying
/// the other half, with seed-dependent width and charge perturbations for
/// every multistart run after the first.
fn initial_point(
    grid: &RadialGrid,
    lambda: f64,
    mu: f64,
    seed: Option<u64>,
    with_q: bool,
) -> Point {
    let (mut width, mut amp_f, mut q_f) = (1.0, 1.0, 1.0);
    if let Some(s) = seed {
        let mut rng = ChaCha8Rng::seed_from_u64(s);
        width = (0.4 * rng.gen_range(-1.0..1.0_f64)).exp();
        amp_f = (0.3 * rng.gen_range(-1.0..1.0_f64)).exp();
        q_f = (0.3 * rng.gen_range(-1.0..1.0_f64)).exp();
    }
    let k = lambda / (width * width);
    let share = if with_q { 0.5 } else { 1.0 };
    let amp = amp_f * (k * share * mu / PI).sqrt();
    Point {
        phi: grid
            .nodes()
            .iter()
            .map(|&r| amp * (-0.5 * k * r * r).exp())
            .collect(),
        q: if with_q {
            q_f * (4.0 * PI * lambda * 0.5 * mu).sqrt()
        } else {
            0.0
        },
    }
}

fn run_seeds<F>(config: &SolverConfig, mut run: F) -> Result<SolveResult>
where
    F: FnMut(Option<u64>) -> Result<SolveResult>,
{
    let mut best: Option<SolveResult> = None;
    let mut seeds = Vec::new();
    let mut objectives = Vec::new();
    for k in 0..config.seeds {
        let seed = config.seed.wrapping_add(k as u64);
        let r = run(if k == 0 { None } else { Some(seed) })?;
        seeds.push(seed);
        objectives.push(r.diagnostics.objective_final);
        let better = match &best {
            None => true,
            Some(b) => {
                (r.converged && !b.converged)
                    || (r.converged == b.converged
                        && r.diagnostics.objective_final < b.diagnostics.objective_final)
            }
        };
        if better {
            best = Some(r);
        }
    }
    let mut best = best.expect("at least one seed");
    let lo = objectives.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = objectives.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let spread = if lo != 0.0 {
        (hi - lo) / lo.abs()
    } else {
        hi - lo
    };
    best.diagnostics.seeds = seeds;
    best.diagnostics.objectives = objectives;
    best.diagnostics.multistart_spread = spread;
    best.diagnostics.multistart_disagreement = spread > 1e-4;
    Ok(best)
}

fn diagnostics(d: &Descent, multiplier: f64, rebases: usize) -> Diagnostics {
    Diagnostics {
        objective_initial: d.f_initial,
        objective_final: d.f,
        projected_gradient: d.rho,
        multiplier,
        rebases,
        stalled: d.stalled,
        seeds: Vec::new(),
        objectives: Vec::new(),
        multistart_spread: 0.0,
        multistart_disagreement: false,
    }
}

fn check_mass(mu: f64) -> Result<()> {
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(domain(format!("mass must be positive, got {mu}")));
    }
    Ok(())
}

/// Gradient of `E` with respect to `(φ, q)`: the `φ`-component is the `L²`
/// representative (so directional derivatives pair through the quadrature
/// inner product), the second value is `∂E/∂q`.
pub fn energy_gradient(
    state: &DecomposedState,
    params: &PhysicalParams,
) -> Result<(RadialField, f64)> {
    let grid = Arc::clone(state.grid());
    let prob = Problem::new(
        grid.clone(),
        params,
        state.lambda(),
        Objective::Energy,
        1.0,
        false,
        state.lambda(),
    );
    let x = Point {
        phi: state.phi().values().to_vec(),
        q: state.q(),
    };
    let ev = prob.eval(&x);
    let w = grid.weights();
    let phi = ev.gf.iter().zip(w).map(|(g, w)| g / w).collect();
    Ok((RadialField::new(grid, phi)?, ev.gfq))
}

/// Classical soliton: minimizes `E⁰` over `‖v‖₂² = μ` with no singular part.
pub fn solve_soliton(
    mu: f64,
    p: f64,
    grid: &Arc<RadialGrid>,
    config: &SolverConfig,
) -> Result<SolveResult> {
    check_mass(mu)?;
    config.validate()?;
    let params = PhysicalParams::new(p, 0.0)?;
    params.require_subcritical()?;
    let radius = grid.truncation_radius();
    let sigma0 = (crate::rgrid::DECAY_LENGTHS / radius).powi(2);
    run_seeds(config, |seed| {
        let mut sigma = sigma0;
        let mut prob = Problem::new(
            Arc::clone(grid),
            &params,
            1.0,
            Objective::Energy,
            mu,
            true,
            sigma,
        );
        let mut x = initial_point(grid, sigma, mu, seed, false);
        prob.scale_onto(&mut x);
        let mut step = config.step;
        let mut iters = 0;
        let mut f0 = None;
        let d = loop {
            let chunk = TRACK_INTERVAL.min(config.max_iters - iters);
            let d = descend(&prob, x, chunk, config.grad_tol, step, None);
            f0.get_or_insert(d.f_initial);
            iters += d.iterations;
            let omega = -2.0 * d.eta;
            if d.converged || d.stalled || iters >= config.max_iters {
                break d;
            }
            if omega > 0.0 && (omega - sigma).abs() > 0.05 * sigma {
                sigma = omega;
                prob = Problem::new(
                    Arc::clone(grid),
                    &params,
                    1.0,
                    Objective::Energy,
                    mu,
                    true,
                    sigma,
                );
            }
            x = d.x;
            step = d.step;
        };
        let state = prob.state(&d.x)?;
        let omega = lagrange_frequency(&state, &params)?;
        let el = el_residual(&state, omega, &params)?;
        let mut diag = diagnostics(&d, -2.0 * d.eta, 0);
        diag.objective_initial = f0.unwrap_or(d.f_initial);
        Ok(SolveResult {
            report: evaluate(&state, &params, omega),
            state,
            omega_recovered: Some(omega),
            d_omega: None,
            c_omega: None,
            iterations: iters,
            converged: d.converged && el <= config.el_tol,
            degenerate: false,
            residuals: Residuals { el, bc: None },
            diagnostics: diag,
        })
    })
}

/// Frequency of the classical soliton of mass `mu`, from the unit-frequency
/// soliton and the scaling `u_ω(x) = ω^{1/(p−2)} u₁(√ω x)`, under which
/// the mass scales as `ω^{(4−p)/(p−2)}`.
pub fn soliton_frequency(
    mu: f64,
    p: f64,
    controls: &GridControls,
    config: &SolverConfig,
) -> Result<f64> {
    check_mass(mu)?;
    let params = PhysicalParams::new(p, 0.0)?;
    params.require_subcritical()?;
    let grid = RadialGrid::with_controls(1.0, controls)?;
    let cfg = SolverConfig {
        seeds: 1,
        ..*config
    };
    let unit = solve_action_regular(1.0, &params, &grid, &cfg)?;
    Ok((mu / unit.report.mass).powf((p - 2.0) / (4.0 - p)))
}

/// [`solve_soliton`] on a grid sized for the soliton's own decay rate.
pub fn solve_soliton_sized(
    mu: f64,
    p: f64,
    controls: &GridControls,
    config: &SolverConfig,
) -> Result<SolveResult> {
    let omega = soliton_frequency(mu, p, controls, config)?;
    let grid = RadialGrid::with_controls(omega, controls)?;
    solve_soliton(mu, p, &grid, config)
}

/// Mass-constrained ground state of the point-interaction problem.
pub fn solve_ground_state(
    mu: f64,
    params: &PhysicalParams,
    grid: &Arc<RadialGrid>,
    config: &SolverConfig,
) -> Result<SolveResult> {
    check_mass(mu)?;
    config.validate()?;
    params.require_subcritical()?;
    let track = matches!(config.lambda_policy, LambdaPolicy::TrackOmega);
    run_seeds(config, |seed| {
        let mut lambda = lambda_start(params, config);
        let mut prob = Problem::new(
            Arc::clone(grid),
            params,
            lambda,
            Objective::Energy,
            mu,
            false,
            lambda,
        );
        let mut x = initial_point(grid, lambda, mu, seed, true);
        prob.scale_onto(&mut x);
        let mut step = config.step;
        let mut iters = 0;
        let mut rebases = 0;
        let mut f0 = None;
        let d = loop {
            let chunk = if track {
                TRACK_INTERVAL
            } else {
                config.max_iters
            };
            let chunk = chunk.min(config.max_iters - iters);
            let d = descend(&prob, x, chunk, config.grad_tol, step, None);
            f0.get_or_insert(d.f_initial);
            iters += d.iterations;
            let omega = -2.0 * d.eta;
            let out_of_budget = iters >= config.max_iters;
            let mut move_to = None;
            if track && omega > params.omega0 * 1.01 {
                let tol = (1e-9_f64).max(10.0 * config.grad_tol) * lambda;
                let gap = (omega - lambda).abs();
                let settled = d.converged || d.stalled;
                if (settled && gap > tol && rebases < MAX_REBASES)
                    || (!settled && gap > 0.05 * lambda)
                {
                    move_to = Some(omega);
                }
            }
            match move_to {
                Some(nu) if !out_of_budget => {
                    let s = rebase(&prob.state(&d.x)?, nu)?;
                    lambda = nu;
                    rebases += 1;
                    prob = Problem::new(
                        Arc::clone(grid),
                        params,
                        lambda,
                        Objective::Energy,
                        mu,
                        false,
                        lambda,
                    );
                    x = Point {
                        phi: s.phi().values().to_vec(),
                        q: s.q(),
                    };
                    prob.scale_onto(&mut x);
                    step = d.step.max(config.step);
                }
                _ if d.converged || d.stalled || out_of_budget => break d,
                _ => {
                    x = d.x;
                    step = d.step;
                }
            }
        };
        let state = prob.state(&d.x)?;
        let omega = lagrange_frequency(&state, params)?;
        let el = el_residual(&state, omega, params)?;
        let bc = if state.q() > 0.0 {
            Some(boundary_condition_residual(&state, params)?)
        } else {
            None
        };
        let mut diag = diagnostics(&d, -2.0 * d.eta, rebases);
        diag.objective_initial = f0.unwrap_or(d.f_initial);
        let converged =
            d.converged && el <= config.el_tol && bc.is_some_and(|b| b <= config.bc_tol);
        Ok(SolveResult {
            report: evaluate(&state, params, omega),
            state,
            omega_recovered: Some(omega),
            d_omega: None,
            c_omega: None,
            iterations: iters,
            converged,
            degenerate: false,
            residuals: Residuals { el, bc },
            diagnostics: diag,
        })
    })
}

/// Action minimizer at frequency `omega`: minimizes `Q_ω` on `‖v‖_p^p = 1`
/// with `λ = ω`, then rescales onto the Nehari manifold.
///
/// For `ω ≤ ω₀` the infimum is zero and not attained; the run stops once the
/// objective has fallen by [`COLLAPSE_FLOOR`] and is flagged `degenerate`.
pub fn solve_action(
    omega: f64,
    params: &PhysicalParams,
    grid: &Arc<RadialGrid>,
    config: &SolverConfig,
) -> Result<SolveResult> {
    action_impl(omega, params, grid, config, false)
}

/// Same as [`solve_action`] with the charge frozen at zero, giving the
/// classical level `d⁰(ω)`.
pub fn solve_action_regular(
    omega: f64,
    params: &PhysicalParams,
    grid: &Arc<RadialGrid>,
    config: &SolverConfig,
) -> Result<SolveResult> {
    action_impl(omega, params, grid, config, true)
}

fn action_impl(
    omega: f64,
    params: &PhysicalParams,
    grid: &Arc<RadialGrid>,
    config: &SolverConfig,
    freeze_q: bool,
) -> Result<SolveResult> {
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(domain(format!("frequency must be positive, got {omega}")));
    }
    config.validate()?;
    let p = params.p;
    let degenerate_regime = !freeze_q && omega <= params.omega0;
    run_seeds(config, |seed| {
        let prob = Problem::new(
            Arc::clone(grid),
            params,
            omega,
            Objective::Action { omega },
            1.0,
            freeze_q,
            omega,
        );
        let mut x = initial_point(grid, omega, 1.0, seed, !freeze_q);
        let mut tries = 0;
        while prob.retracted_value(&x).is_none() && tries < 200 {
            x.q *= 0.5;
            tries += 1;
        }
        if !prob.scale_onto(&mut x) {
            return Err(domain(
                "could not find a starting state with positive Q_omega",
            ));
        }
        let collapse = if degenerate_regime {
            Some(COLLAPSE_FLOOR)
        } else {
            None
        };
        let d = descend(
            &prob,
            x,
            config.max_iters,
            config.grad_tol,
            config.step,
            collapse,
        );
        let ratio = prob.eval(&d.x).q_omega;
        let beta = ratio.powf(1.0 / (p - 2.0));
        let state = prob.state(&d.x)?.scaled(beta);
        let report = evaluate(&state, params, omega);
        let d_omega = report.action;
        let degenerate = degenerate_regime && (d.collapsed || d.f <= COLLAPSE_FLOOR * d.f_initial);
        let (el, bc) = if degenerate {
            (f64::NAN, None)
        } else {
            let el = el_residual(&state, omega, params)?;
            let bc = if state.q() > 0.0 {
                Some(boundary_condition_residual(&state, params)?)
            } else {
                None
            };
            (el, bc)
        };
        let converged = !degenerate
            && d.converged
            && el <= config.el_tol
            && bc.map_or(freeze_q, |b| b <= config.bc_tol);
        Ok(SolveResult {
            report,
            state,
            omega_recovered: None,
            d_omega: Some(d_omega),
            c_omega: Some(2.0 * p / (p - 2.0) * d_omega),
            iterations: d.iterations,
            converged,
            degenerate,
            residuals: Residuals { el, bc },
            diagnostics: diagnostics(&d, d.eta, 0),
        })
    })
}
