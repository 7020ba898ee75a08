//! End-to-end acceptance run: ten criteria, one PASS/FAIL line each.
//! Closed forms and reference values used as oracles are written out here,
//! independently of the library code they check.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use dnls_core::functionals::{evaluate, DecomposedState};
use dnls_core::minimize::{
    energy_gradient, solve_action, solve_action_regular, solve_ground_state, solve_soliton_sized,
    SolveResult, SolverConfig,
};
use dnls_core::nehari::{
    branch_infimum, branch_point, branch_roots, branch_scan, g_function, log_grid,
};
use dnls_core::rearrange::{inequality_battery, BatteryConfig, POLYA_SZEGO_SLACK};
use dnls_core::rgrid::{grad_sq, inner_product, GridControls, RadialField, RadialGrid};
use dnls_core::specfun::{omega_threshold, theta, PhysicalParams};
use dnls_core::verify::{
    boundary_condition_residual, el_residual, log_slope, positivity_and_monotonicity,
    regular_part_min,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const GAMMA: f64 = 0.577_215_664_901_532_9;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(checks: &[(&str, bool)], detail: String) -> Outcome {
    let failed: Vec<&str> = checks.iter().filter(|c| !c.1).map(|c| c.0).collect();
    let detail = if failed.is_empty() {
        detail
    } else {
        format!("{detail}; failed: {}", failed.join(", "))
    };
    Outcome {
        pass: failed.is_empty(),
        detail,
    }
}

fn params() -> PhysicalParams {
    PhysicalParams::new(3.0, 0.0).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn green(lambda: f64, r: f64) -> f64 {
    dnls_core::specfun::green_value(lambda, r).unwrap()
}

fn closed_green_diff_l2(l: f64, n: f64) -> f64 {
    (1.0 / l + 1.0 / n + 2.0 * (n / l).ln() / (l - n)) / (4.0 * PI)
}

fn closed_green_diff_grad(l: f64, n: f64) -> f64 {
    ((l + n) * (l / n).ln() / (l - n) - 2.0) / (4.0 * PI)
}

fn criterion_1() -> Outcome {
    let set = [0.5, 1.0, 2.0, 4.0];
    let grid = RadialGrid::for_decay(0.5, 4096).unwrap();
    let mut worst: f64 = 0.0;
    for &l in &set {
        let g = grid.sample(|r| green(l, r));
        let s = DecomposedState::singular(grid.clone(), l, 1.0).unwrap();
        let l2 = dnls_core::rgrid::state_lp_p(&s, 2.0).unwrap();
        worst = worst.max(rel(l2, 1.0 / (4.0 * PI * l)));
        worst = worst.max(rel(inner_product(&g, &g).unwrap(), 1.0 / (4.0 * PI * l)));
        for &n in &set {
            if n == l {
                continue;
            }
            let d = grid.sample(|r| green(l, r) - green(n, r));
            worst = worst.max(rel(
                inner_product(&d, &d).unwrap(),
                closed_green_diff_l2(l, n),
            ));
            worst = worst.max(rel(grad_sq(&d).unwrap(), closed_green_diff_grad(l, n)));
        }
    }
    outcome(
        &[("relative error <= 1e-5", worst <= 1e-5)],
        format!("max relative error {worst:.2e}"),
    )
}

fn criterion_2() -> Outcome {
    let mut worst: f64 = 0.0;
    for alpha in [-2.0, -1.0, 0.0, 1.0, 2.0] {
        let w0 = omega_threshold(alpha);
        worst = worst.max((alpha + theta(w0).unwrap()).abs());
    }
    let direct = 4.0 * (-2.0 * GAMMA).exp();
    let dev = (omega_threshold(0.0) - direct).abs();
    outcome(
        &[
            ("alpha + theta(omega0) = 0", worst <= 1e-12),
            ("omega0(0) = 4 exp(-2 gamma)", dev <= 1e-12),
        ],
        format!("max |alpha+theta| {worst:.1e}, |omega0(0) - 4e^(-2gamma)| {dev:.1e}"),
    )
}

/// `g` written out from its definition, for an oracle independent of `nehari`.
fn g_oracle(lambda: f64, omega: f64, alpha: f64) -> f64 {
    let theta = ((lambda.sqrt() / 2.0).ln() + GAMMA) / (2.0 * PI);
    (omega - lambda) / (4.0 * PI) + lambda * (alpha + theta)
}

fn criterion_3() -> Outcome {
    let prm = params();
    let w0 = prm.omega0;
    let omega = 0.5 * w0;
    let (l1, l2) = branch_roots(omega, &prm).unwrap().unwrap();
    let g1 = g_oracle(l1, omega, 0.0).abs();
    let g2 = g_oracle(l2, omega, 0.0).abs();
    let lib_g = g_function(l1, omega, &prm).unwrap().g.abs();
    let sweep = branch_scan(omega, &prm, &log_grid(1e-4 * w0, l1, 400)).unwrap();
    let peak = sweep
        .iter()
        .filter(|p| p.admissible)
        .map(|p| p.action)
        .fold(0.0, f64::max);
    let near = branch_point(l1 * (1.0 - 1e-6), omega, &prm).unwrap();
    let collapse = near.admissible && near.action < 1e-4 * peak;
    let above = 2.0 * w0;
    let all = branch_scan(above, &prm, &log_grid(1e-4 * w0, 1e4 * w0, 2000)).unwrap();
    let covers = all.iter().all(|p| p.admissible && p.action > 0.0);
    let inf = branch_infimum(above, &prm).unwrap();
    outcome(
        &[
            ("lambda1 < omega0 < lambda2", l1 < w0 && w0 < l2),
            ("|g| < 1e-12 at roots", g1 < 1e-12 && g2 < 1e-12 && lib_g < 1e-12),
            ("branch action collapses near lambda1", collapse),
            ("omega = 2 omega0: all lambda admissible", covers),
            ("omega = 2 omega0: positive infimum", inf > 0.0),
        ],
        format!(
            "lambda1/omega0 {:.6}, lambda2/omega0 {:.6}, action ratio near lambda1 {:.1e}, infimum at 2omega0 {inf:.6}",
            l1 / w0,
            l2 / w0,
            near.action / peak
        ),
    )
}

fn criterion_4() -> Outcome {
    let prm = params();
    let w0 = prm.omega0;
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for omega in [0.5 * w0, 2.0 * w0] {
        for lambda in log_grid(1e-2 * w0, 1e2 * w0, 41) {
            let pt = branch_point(lambda, omega, &prm).unwrap();
            if !pt.admissible {
                continue;
            }
            count += 1;
            let grid = RadialGrid::for_decay(lambda, 4096).unwrap();
            let s = DecomposedState::singular(grid, lambda, pt.q).unwrap();
            let r = evaluate(&s, &prm, omega);
            worst = worst.max(r.nehari.abs() / r.lp_p);
        }
    }
    outcome(
        &[("|I| <= 1e-8 ||u||_p^p", worst <= 1e-8)],
        format!("{count} admissible points, max |I|/||u||_p^p {worst:.2e}"),
    )
}

fn criterion_5() -> Outcome {
    let prm = params();
    let grid = RadialGrid::for_decay(0.5, 2048).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let lambda = rng.gen_range(0.3..5.0);
        let amp = rng.gen_range(0.1..2.0);
        let width = rng.gen_range(0.5..3.0);
        let tilt = rng.gen_range(-0.4..0.4);
        let phi = grid.sample(|r| amp * (-(r / width).powi(2)).exp() * (1.0 + tilt * r));
        let state = DecomposedState::new(lambda, rng.gen_range(0.05..2.0), phi).unwrap();
        let c = rng.gen_range(0.5..4.0);
        let shift = rng.gen_range(0.0..2.0);
        let dir = grid.sample(|r| (-((r - shift) / c).powi(2)).exp());
        let dq = rng.gen_range(-1.0..1.0);
        let (g, gq) = energy_gradient(&state, &prm).unwrap();
        let analytic = inner_product(&g, &dir).unwrap() + gq * dq;
        let h = 1e-6;
        let moved = |t: f64| {
            let v = state
                .phi()
                .values()
                .iter()
                .zip(dir.values())
                .map(|(a, b)| a + t * b)
                .collect();
            let f = RadialField::new(Arc::clone(&grid), v).unwrap();
            DecomposedState::new(lambda, state.q() + t * dq, f).unwrap()
        };
        let e = |s: &DecomposedState| evaluate(s, &prm, 0.0).energy;
        let fd = (e(&moved(h)) - e(&moved(-h))) / (2.0 * h);
        worst = worst.max(rel(analytic, fd));
    }
    outcome(
        &[("relative error <= 1e-5", worst <= 1e-5)],
        format!("max relative error {worst:.2e} over 20 states"),
    )
}

type Criterion<'a> = Box<dyn Fn() -> Outcome + 'a>;

struct Headline {
    ground: SolveResult,
    action: SolveResult,
}

fn solver_config() -> SolverConfig {
    SolverConfig::default()
}

fn ground_state(controls: &GridControls) -> SolveResult {
    let prm = params();
    let grid = RadialGrid::with_controls(prm.omega0, controls).unwrap();
    solve_ground_state(1.0, &prm, &grid, &solver_config()).unwrap()
}

fn action_at(omega: f64, controls: &GridControls) -> SolveResult {
    let grid = RadialGrid::with_controls(omega, controls).unwrap();
    solve_action(omega, &params(), &grid, &solver_config()).unwrap()
}

fn criterion_6(h: &Headline) -> Outcome {
    let prm = params();
    let cfg = solver_config();
    let tol = cfg.grad_tol;
    let gs = &h.ground;
    let sol = solve_soliton_sized(1.0, 3.0, &GridControls::default(), &cfg).unwrap();
    let (e, e0) = (gs.report.energy, sol.report.energy);
    let w = gs.omega_recovered.unwrap();
    let lhs = 2.0 * e - (prm.p - 2.0) / prm.p * gs.report.lp_p;
    let identity = rel(lhs, -gs.diagnostics.multiplier * gs.report.mass);
    let el = el_residual(&gs.state, w, &prm).unwrap();
    let bc = boundary_condition_residual(&gs.state, &prm).unwrap();
    let slope = log_slope(&gs.state).unwrap().relative_error();
    let shape = positivity_and_monotonicity(&gs.state);
    let phi_up = regular_part_min(&gs.state, 1.5 * w).unwrap();
    outcome(
        &[
            ("converged", gs.converged && sol.converged),
            ("E < E0 with margin", e + 10.0 * tol * e.abs() < e0),
            ("E0 < 0 with margin", e0 + 10.0 * tol * e0.abs() < 0.0),
            ("q > 0", gs.state.q() > 0.0),
            ("omega_recovered > omega0", w > prm.omega0),
            ("energy identity 1e-6", identity <= 1e-6),
            ("EL residual <= 1e-3", el <= 1e-3),
            ("BC residual <= 1e-2", bc <= 1e-2),
            ("log slope within 2%", slope <= 2e-2),
            ("u > 0", shape.min_u > 0.0),
            ("u nonincreasing", shape.violations == 0),
            ("phi at 1.5 omega > 0", phi_up > 0.0),
        ],
        format!(
            "E {e:.10}, E0 {e0:.10}, q {:.6}, omega {w:.8}, identity {identity:.1e}, EL {el:.1e}, BC {bc:.1e}, slope {slope:.1e}",
            gs.state.q()
        ),
    )
}

fn criterion_7(h: &Headline) -> Outcome {
    let prm = params();
    let cfg = solver_config();
    let omega = 2.0 * prm.omega0;
    let a = &h.action;
    let d = a.d_omega.unwrap();
    let nehari = a.report.nehari.abs() / a.report.lp_p;
    let grid = RadialGrid::with_controls(omega, &GridControls::default()).unwrap();
    let reg = solve_action_regular(omega, &prm, &grid, &cfg).unwrap();
    let d0 = reg.d_omega.unwrap();
    // classical scaling d⁰(ω) = ω^{2/(p−2)} d⁰(1) against an independent unit solve
    let unit = solve_action_regular(
        1.0,
        &prm,
        &RadialGrid::with_controls(1.0, &GridControls::default()).unwrap(),
        &cfg,
    )
    .unwrap()
    .d_omega
    .unwrap();
    let scaling = rel(d0, omega.powf(2.0 / (prm.p - 2.0)) * unit);
    let inf = branch_infimum(omega, &prm).unwrap();
    let w = h.ground.omega_recovered.unwrap();
    let bridge_grid = RadialGrid::with_controls(prm.omega0, &GridControls::default()).unwrap();
    let bridge = solve_action(w, &prm, &bridge_grid, &cfg).unwrap();
    let s_gs = evaluate(&h.ground.state, &prm, w).action;
    let bridge_err = rel(bridge.d_omega.unwrap(), s_gs);
    let margin = 10.0 * cfg.grad_tol;
    outcome(
        &[
            ("converged", a.converged && reg.converged && bridge.converged),
            ("I = 0 within 1e-8", nehari <= 1e-8),
            ("d > 0 with margin", d > margin * d),
            ("d < d0 with margin", d + margin * d0 < d0),
            ("d0 obeys scaling", scaling <= 1e-6),
            ("d <= branch infimum", d <= inf),
            ("bridge within 10x tolerance", bridge_err <= margin),
        ],
        format!(
            "d {d:.10}, d0 {d0:.8}, branch inf {inf:.8}, |I|/L {nehari:.1e}, bridge rel err {bridge_err:.1e}"
        ),
    )
}

fn criterion_8() -> Outcome {
    let prm = params();
    let mut checks = Vec::new();
    let mut detail = Vec::new();
    for f in [0.3, 0.7, 1.0] {
        let r = action_at(f * prm.omega0, &GridControls::default());
        let dg = &r.diagnostics;
        let ratio = dg.objective_final / dg.objective_initial;
        checks.push(ratio < 1e-4 && r.degenerate && !r.converged && r.d_omega.unwrap() < 1e-12);
        detail.push(format!(
            "{f}omega0: ratio {ratio:.1e} after {} its",
            r.iterations
        ));
    }
    let names = [
        "0.3 omega0 collapses",
        "0.7 omega0 collapses",
        "omega0 collapses",
    ];
    let list: Vec<(&str, bool)> = names.iter().copied().zip(checks).collect();
    outcome(&list, detail.join(", "))
}

fn criterion_9() -> Outcome {
    let r = inequality_battery(&BatteryConfig::default()).unwrap();
    let sums: usize = r.sum_violations.values().sum();
    outcome(
        &[
            ("Hardy-Littlewood exact", r.hardy_littlewood_violations == 0),
            ("sum inequality exact", sums == 0),
            ("equimeasurability exact", r.equimeasurability_failures == 0),
            (
                "Polya-Szego within slack",
                r.polya_szego_max_ratio <= 1.0 + POLYA_SZEGO_SLACK,
            ),
        ],
        format!(
            "{} pairs, HL violations {}, sum violations {sums}, max PS ratio {:.4}",
            r.pairs, r.hardy_littlewood_violations, r.polya_szego_max_ratio
        ),
    )
}

fn criterion_10(h: &Headline) -> Outcome {
    let fine = GridControls::default().refined();
    let gs = ground_state(&fine);
    let act = action_at(2.0 * params().omega0, &fine);
    let de = rel(gs.report.energy, h.ground.report.energy);
    let dd = rel(act.d_omega.unwrap(), h.action.d_omega.unwrap());
    outcome(
        &[
            ("converged", gs.converged && act.converged),
            ("E shift <= 1e-4", de <= 1e-4),
            ("d shift <= 1e-4", dd <= 1e-4),
        ],
        format!(
            "n {} -> {}: E shift {de:.1e}, d shift {dd:.1e}",
            GridControls::default().nodes,
            fine.nodes
        ),
    )
}

fn main() -> ExitCode {
    let start = Instant::now();
    let headline = Headline {
        ground: ground_state(&GridControls::default()),
        action: action_at(2.0 * params().omega0, &GridControls::default()),
    };
    let criteria: Vec<(&str, Criterion)> = vec![
        ("closed-form norms", Box::new(criterion_1)),
        ("threshold identity", Box::new(criterion_2)),
        ("Nehari structure", Box::new(criterion_3)),
        ("branch round-trip", Box::new(criterion_4)),
        ("gradient correctness", Box::new(criterion_5)),
        ("ground state", Box::new(|| criterion_6(&headline))),
        ("action minimizer", Box::new(|| criterion_7(&headline))),
        ("sub-threshold collapse", Box::new(criterion_8)),
        ("rearrangement battery", Box::new(criterion_9)),
        ("grid independence", Box::new(|| criterion_10(&headline))),
    ];
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let o = run();
        failures += usize::from(!o.pass);
        println!(
            "{} criterion {:>2} {name}: {} ({:.2}s)",
            if o.pass { "PASS" } else { "FAIL" },
            i + 1,
            o.detail,
            t.elapsed().as_secs_f64()
        );
    }
    println!(
        "acceptance: {} of 10 passed in {:.1}s",
        10 - failures,
        start.elapsed().as_secs_f64()
    );
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
