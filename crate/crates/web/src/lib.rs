//! Browser demo. Three operations, each returning JSON for the page in `www/`:
//! the singular Nehari branch, a ground-state profile, and a symmetric
//! decreasing rearrangement.

use dnls_core::minimize::{solve_ground_state, SolverConfig};
use dnls_core::nehari::{branch_infimum, branch_roots, branch_scan, log_grid};
use dnls_core::rearrange::{dirichlet_energy, equimeasurable, random_cells, rearrange};
use dnls_core::rgrid::{GridControls, RadialGrid};
use dnls_core::specfun::PhysicalParams;
use dnls_core::Result;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Points kept when thinning a profile for plotting.
const PLOT_POINTS: usize = 500;

#[derive(Debug, Clone, Serialize)]
pub struct BranchCurve {
    pub omega: f64,
    pub omega0: f64,
    pub lambda: Vec<f64>,
    pub action: Vec<f64>,
    pub admissible: Vec<bool>,
    /// `[λ₁, λ₂]` below the threshold
    pub forbidden: Option<[f64; 2]>,
    pub infimum: f64,
}

pub fn branch_curve(p: f64, alpha: f64, omega_rel: f64, points: usize) -> Result<BranchCurve> {
    let params = PhysicalParams::new(p, alpha)?;
    let omega = omega_rel * params.omega0;
    let lambdas = log_grid(1e-2 * params.omega0, 1e2 * params.omega0, points.max(2));
    let scan = branch_scan(omega, &params, &lambdas)?;
    Ok(BranchCurve {
        omega,
        omega0: params.omega0,
        lambda: lambdas,
        action: scan.iter().map(|b| b.action).collect(),
        admissible: scan.iter().map(|b| b.admissible).collect(),
        forbidden: branch_roots(omega, &params)?.map(|(a, b)| [a, b]),
        infimum: branch_infimum(omega, &params)?,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct Profile {
    pub r: Vec<f64>,
    pub u: Vec<f64>,
    pub phi: Vec<f64>,
    pub singular: Vec<f64>,
    pub energy: f64,
    pub omega: f64,
    pub omega0: f64,
    pub q: f64,
    pub converged: bool,
    pub iterations: usize,
}

pub fn ground_state_profile(mu: f64, p: f64, alpha: f64, nodes: usize) -> Result<Profile> {
    let params = PhysicalParams::new(p, alpha)?;
    let controls = GridControls {
        nodes,
        ..Default::default()
    };
    let grid = RadialGrid::with_controls(params.omega0, &controls)?;
    let cfg = SolverConfig {
        seeds: 1,
        ..Default::default()
    };
    let gs = solve_ground_state(mu, &params, &grid, &cfg)?;
    let omega = gs.omega_recovered.unwrap_or(f64::NAN);
    let r_max = 12.0 / omega.max(params.omega0).sqrt();
    let keep: Vec<usize> = (0..grid.len())
        .filter(|&i| grid.nodes()[i] <= r_max)
        .collect();
    let stride = keep.len().div_ceil(PLOT_POINTS).max(1);
    let idx: Vec<usize> = keep.into_iter().step_by(stride).collect();
    let green = gs.state.green_values();
    let phi = gs.state.phi().values();
    let q = gs.state.q();
    Ok(Profile {
        r: idx.iter().map(|&i| grid.nodes()[i]).collect(),
        u: idx.iter().map(|&i| phi[i] + q * green[i]).collect(),
        phi: idx.iter().map(|&i| phi[i]).collect(),
        singular: idx.iter().map(|&i| q * green[i]).collect(),
        energy: gs.report.energy,
        omega,
        omega0: params.omega0,
        q,
        converged: gs.converged,
        iterations: gs.iterations,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct RearrangeDemo {
    pub n: usize,
    pub f: Vec<f64>,
    pub f_star: Vec<f64>,
    pub dirichlet_f: f64,
    pub dirichlet_star: f64,
    pub equimeasurable: bool,
}

pub fn rearrange_demo(seed: u64, n: usize) -> Result<RearrangeDemo> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let f = random_cells(&mut rng, n, 4.0)?;
    let fs = rearrange(&f);
    Ok(RearrangeDemo {
        n,
        dirichlet_f: dirichlet_energy(&f),
        dirichlet_star: dirichlet_energy(&fs),
        equimeasurable: equimeasurable(&f, &fs),
        f: f.values().to_vec(),
        f_star: fs.values().to_vec(),
    })
}

fn to_js<T: Serialize>(r: Result<T>) -> std::result::Result<String, JsError> {
    let v = r.map_err(|e| JsError::new(&e.to_string()))?;
    serde_json::to_string(&v).map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen(js_name = branchCurve)]
pub fn branch_curve_js(
    p: f64,
    alpha: f64,
    omega_rel: f64,
    points: usize,
) -> std::result::Result<String, JsError> {
    to_js(branch_curve(p, alpha, omega_rel, points))
}

#[wasm_bindgen(js_name = groundStateProfile)]
pub fn ground_state_profile_js(
    mu: f64,
    p: f64,
    alpha: f64,
    nodes: usize,
) -> std::result::Result<String, JsError> {
    to_js(ground_state_profile(mu, p, alpha, nodes))
}

#[wasm_bindgen(js_name = rearrangeDemo)]
pub fn rearrange_demo_js(seed: u32, n: usize) -> std::result::Result<String, JsError> {
    to_js(rearrange_demo(u64::from(seed), n))
}
