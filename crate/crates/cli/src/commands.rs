use std::collections::BTreeMap;
use std::path::PathBuf;

use dnls_core::functionals::{evaluate, DecomposedState};
use dnls_core::minimize::{solve_action, solve_action_regular, solve_ground_state, SolveResult};
use dnls_core::nehari::{branch_infimum, branch_roots, branch_scan, log_grid};
use dnls_core::rearrange::{inequality_battery, BatteryConfig};
use dnls_core::rgrid::{GridControls, RadialGrid};
use dnls_core::specfun::PhysicalParams;
use dnls_core::verify::{
    comparison_suite, positivity_and_monotonicity, state_checks, Comparison, VerificationReport,
};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{
    ActionArgs, Command, DCurveArgs, GroundStateArgs, NehariArgs, RearrangeArgs, VerifyArgs,
};
use crate::error::{CliError, CliResult, EXIT_GATE, EXIT_NOT_CONVERGED, EXIT_OK};
use crate::output::{num, read_state, OutputDir, Provenance, StateHeader};

pub const LOG_SLOPE_TOL: f64 = 2e-2;
pub const NEHARI_TOL: f64 = 1e-8;
/// Fraction of the starting objective a sub-threshold run must fall below.
pub const COLLAPSE_RATIO: f64 = 1e-4;

pub struct Outcome {
    pub code: u8,
    pub summary: String,
    pub files: Vec<PathBuf>,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Gate {
    pub value: f64,
    pub limit: f64,
    pub pass: bool,
}

impl Gate {
    fn at_most(value: f64, limit: f64) -> Self {
        Self {
            value,
            limit,
            pass: value <= limit,
        }
    }

    fn above(value: f64, limit: f64) -> Self {
        Self {
            value,
            limit,
            pass: value > limit,
        }
    }
}

type Gates = BTreeMap<&'static str, Gate>;

fn exit_code(converged: bool, gates: &Gates, report: &VerificationReport) -> u8 {
    if !converged {
        EXIT_NOT_CONVERGED
    } else if gates.values().all(|g| g.pass) && report.all_pass() {
        EXIT_OK
    } else {
        EXIT_GATE
    }
}

fn status(code: u8) -> &'static str {
    match code {
        EXIT_OK => "ok",
        EXIT_NOT_CONVERGED => "not converged",
        _ => "gate failure",
    }
}

fn state_gates(report: &VerificationReport, el_tol: f64, bc_tol: f64) -> Gates {
    let mut g = Gates::new();
    g.insert("el_residual", Gate::at_most(report.el_residual_rel, el_tol));
    if let Some(bc) = report.bc_residual_rel {
        g.insert("bc_residual", Gate::at_most(bc, bc_tol));
    }
    if let Some(s) = report.log_slope_rel_err {
        g.insert("log_slope", Gate::at_most(s, LOG_SLOPE_TOL));
    }
    g.insert("u_positive", Gate::above(report.min_value_u, 0.0));
    g.insert(
        "monotone_violations",
        Gate::at_most(report.monotone_violations as f64, 0.0),
    );
    g
}

fn to_value(v: &impl Serialize) -> Value {
    serde_json::to_value(v).expect("serializable")
}

pub fn run(cmd: Command) -> CliResult<Outcome> {
    match cmd {
        Command::GroundState(a) => ground_state(&a),
        Command::ActionMin(a) => action_min(&a),
        Command::NehariScan(a) => nehari_scan(&a),
        Command::DCurve(a) => d_curve(&a),
        Command::RearrangeTest(a) => rearrange_test(&a),
        Command::Verify(a) => verify(&a),
    }
}

fn resolved(args: &impl Serialize, extra: Value) -> Value {
    let mut v = to_value(args);
    v["resolved"] = extra;
    v
}

fn save_state(
    out: &OutputDir,
    prov: &Provenance,
    stem: &str,
    params: PhysicalParams,
    state: &DecomposedState,
    omega: f64,
) -> CliResult<Vec<PathBuf>> {
    let header = StateHeader::new(prov, params, state, omega);
    Ok(vec![
        out.state(&format!("{stem}.state"), &header, state)?,
        out.profile(&format!("{stem}_profile.csv"), prov, state)?,
    ])
}

pub fn ground_state(args: &GroundStateArgs) -> CliResult<Outcome> {
    let (params, controls, solver) = args.validate()?;
    let prov = Provenance::new(
        "ground-state",
        resolved(
            args,
            json!({ "params": params, "grid": controls, "solver": solver }),
        ),
    );
    let out = OutputDir::create(&args.out.out_dir)?;
    let grid = RadialGrid::with_controls(params.omega0, &controls)?;
    let gs = solve_ground_state(args.mu, &params, &grid, &solver)?;
    let omega = gs.omega_recovered.unwrap_or(f64::NAN);
    let mut report = comparison_suite(args.mu, omega, &params, &controls, &solver)?;
    report.omega_recovered = Some(omega);
    let gates = state_gates(&report, solver.el_tol, solver.bc_tol);
    let code = exit_code(gs.converged, &gates, &report);
    let mut files = vec![out.json(
        "ground_state.json",
        &prov,
        json!({
            "params": params,
            "grid": grid.descriptor(),
            "solve": gs,
            "verification": report,
            "gates": gates,
            "status": status(code),
            "exit_code": code,
        }),
    )?];
    files.extend(save_state(
        &out,
        &prov,
        "ground_state",
        params,
        &gs.state,
        omega,
    )?);
    let summary = format!(
        "ground-state: E = {:.12}, omega = {omega:.12}, q = {:.10}, {} iterations, {}",
        gs.report.energy,
        gs.state.q(),
        gs.iterations,
        status(code)
    );
    Ok(Outcome {
        code,
        summary,
        files,
    })
}

fn action_verification(
    act: &SolveResult,
    omega: f64,
    params: &PhysicalParams,
    grid: &std::sync::Arc<RadialGrid>,
    solver: &dnls_core::minimize::SolverConfig,
) -> CliResult<(VerificationReport, Gates, bool, Value)> {
    let tol = 10.0 * solver.grad_tol;
    let d = act.d_omega.unwrap_or(f64::NAN);
    if omega <= params.omega0 {
        let shape = positivity_and_monotonicity(&act.state);
        let dg = &act.diagnostics;
        let mut comparisons = BTreeMap::new();
        comparisons.insert(
            "d_collapse".to_string(),
            Comparison::less(
                dg.objective_final,
                COLLAPSE_RATIO * dg.objective_initial,
                0.0,
                act.degenerate,
            ),
        );
        let report = VerificationReport {
            el_residual_rel: act.residuals.el,
            bc_residual_rel: None,
            log_slope_rel_err: None,
            min_value_u: shape.min_u,
            monotone_violations: shape.violations,
            omega_recovered: None,
            comparisons,
        };
        return Ok((report, Gates::new(), true, json!({ "d": d })));
    }
    let reg = solve_action_regular(omega, params, grid, solver)?;
    let d0 = reg.d_omega.unwrap_or(f64::NAN);
    let inf = branch_infimum(omega, params)?;
    let mut report = state_checks(&act.state, omega, params)?;
    let c = &mut report.comparisons;
    c.insert(
        "d_pos".into(),
        Comparison::less(0.0, d, tol * d.abs(), act.converged),
    );
    c.insert(
        "d<d0".into(),
        Comparison::less(d, d0, tol * d0.abs(), act.converged && reg.converged),
    );
    c.insert(
        "d<=branch_inf".into(),
        Comparison::less(d, inf, 0.0, act.converged),
    );
    let mut gates = state_gates(&report, solver.el_tol, solver.bc_tol);
    gates.insert(
        "nehari",
        Gate::at_most(act.report.nehari.abs() / act.report.lp_p, NEHARI_TOL),
    );
    let levels = json!({ "d": d, "d0": d0, "branch_infimum": inf, "regular": reg });
    Ok((report, gates, act.converged && reg.converged, levels))
}

pub fn action_min(args: &ActionArgs) -> CliResult<Outcome> {
    let params = args.physics.params()?;
    let omega = args.frequency.resolve(&params)?;
    let controls = args.grid.controls()?;
    let solver = args.solver.config()?;
    let prov = Provenance::new(
        "action-min",
        resolved(
            args,
            json!({ "omega": omega, "params": params, "grid": controls, "solver": solver }),
        ),
    );
    let out = OutputDir::create(&args.out.out_dir)?;
    let grid = RadialGrid::with_controls(omega, &controls)?;
    let act = solve_action(omega, &params, &grid, &solver)?;
    let (report, gates, converged, levels) =
        action_verification(&act, omega, &params, &grid, &solver)?;
    let code = exit_code(converged, &gates, &report);
    let mut files = vec![out.json(
        "action_min.json",
        &prov,
        json!({
            "params": params,
            "grid": grid.descriptor(),
            "omega": omega,
            "above_threshold": omega > params.omega0,
            "levels": levels,
            "solve": act,
            "verification": report,
            "gates": gates,
            "status": status(code),
            "exit_code": code,
        }),
    )?];
    if !act.degenerate {
        files.extend(save_state(
            &out,
            &prov,
            "action_min",
            params,
            &act.state,
            omega,
        )?);
    }
    let summary = if act.degenerate {
        format!(
            "action-min: omega/omega0 = {:.6}, objective fell to {:.2e} of its start, no minimizer, {}",
            omega / params.omega0,
            act.diagnostics.objective_final / act.diagnostics.objective_initial,
            status(code)
        )
    } else {
        format!(
            "action-min: omega/omega0 = {:.6}, d = {:.12}, q = {:.10}, {}",
            omega / params.omega0,
            act.d_omega.unwrap_or(f64::NAN),
            act.state.q(),
            status(code)
        )
    };
    Ok(Outcome {
        code,
        summary,
        files,
    })
}

pub fn nehari_scan(args: &NehariArgs) -> CliResult<Outcome> {
    args.validate()?;
    let params = args.physics.params()?;
    let omega = args.frequency.resolve(&params)?;
    let prov = Provenance::new(
        "nehari-scan",
        resolved(args, json!({ "omega": omega, "params": params })),
    );
    let out = OutputDir::create(&args.out.out_dir)?;
    let lambdas = log_grid(
        args.lambda_min_rel * params.omega0,
        args.lambda_max_rel * params.omega0,
        args.points,
    );
    let points = branch_scan(omega, &params, &lambdas)?;
    let roots = branch_roots(omega, &params)?;
    let inf = branch_infimum(omega, &params)?;
    let rows: Vec<Vec<String>> = points
        .iter()
        .map(|p| {
            vec![
                num(p.lambda),
                num(p.g),
                num(p.q),
                num(p.action),
                p.admissible.to_string(),
            ]
        })
        .collect();
    let csv = out.csv(
        "nehari_scan.csv",
        &prov,
        &["lambda", "g", "q", "action", "admissible"],
        &rows,
    )?;
    let forbidden = roots.map(|(l1, l2)| json!({ "lambda1": l1, "lambda2": l2 }));
    let admissible = points.iter().filter(|p| p.admissible).count();
    let js = out.json(
        "nehari_scan.json",
        &prov,
        json!({
            "omega": omega,
            "omega0": params.omega0,
            "forbidden_interval": forbidden,
            "branch_infimum": inf,
            "points": points.len(),
            "admissible_points": admissible,
            "status": status(EXIT_OK),
            "exit_code": EXIT_OK,
        }),
    )?;
    let summary = match roots {
        Some((l1, l2)) => format!(
            "nehari-scan: forbidden interval [{l1:.10}, {l2:.10}], {admissible}/{} admissible",
            points.len()
        ),
        None => format!("nehari-scan: every lambda admissible, branch infimum {inf:.12}"),
    };
    Ok(Outcome {
        code: EXIT_OK,
        summary,
        files: vec![csv, js],
    })
}

#[derive(Debug, Clone, Serialize)]
struct CurvePoint {
    omega: f64,
    omega_rel: f64,
    d: f64,
    d0: f64,
    branch_infimum: f64,
    degenerate: bool,
    converged: bool,
    pass: bool,
}

fn curve_point(
    rel: f64,
    params: &PhysicalParams,
    controls: &GridControls,
    solver: &dnls_core::minimize::SolverConfig,
) -> CliResult<CurvePoint> {
    let omega = rel * params.omega0;
    let grid = RadialGrid::with_controls(omega, controls)?;
    let act = solve_action(omega, params, &grid, solver)?;
    let reg = solve_action_regular(omega, params, &grid, solver)?;
    let (d, d0) = (
        act.d_omega.unwrap_or(f64::NAN),
        reg.d_omega.unwrap_or(f64::NAN),
    );
    let inf = branch_infimum(omega, params)?;
    let tol = 10.0 * solver.grad_tol;
    let (converged, pass) = if omega <= params.omega0 {
        let dg = &act.diagnostics;
        (
            reg.converged,
            act.degenerate && dg.objective_final < COLLAPSE_RATIO * dg.objective_initial,
        )
    } else {
        (
            act.converged && reg.converged,
            d > tol * d && d + tol * d0 < d0 && d <= inf,
        )
    };
    Ok(CurvePoint {
        omega,
        omega_rel: rel,
        d,
        d0,
        branch_infimum: inf,
        degenerate: act.degenerate,
        converged,
        pass,
    })
}

pub fn d_curve(args: &DCurveArgs) -> CliResult<Outcome> {
    args.validate()?;
    let params = args.physics.params()?;
    let controls = args.grid.controls()?;
    let solver = args.solver.config()?;
    let rels = args.frequencies_rel();
    let prov = Provenance::new(
        "d-curve",
        resolved(
            args,
            json!({ "params": params, "grid": controls, "solver": solver, "omega_rel": rels }),
        ),
    );
    let out = OutputDir::create(&args.out.out_dir)?;
    let sweep = || -> CliResult<Vec<CurvePoint>> {
        rels.par_iter()
            .map(|&k| curve_point(k, &params, &controls, &solver))
            .collect()
    };
    let points = match args.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Config(e.to_string()))?
            .install(sweep)?,
        None => sweep()?,
    };
    let rows: Vec<Vec<String>> = points
        .iter()
        .map(|p| {
            vec![
                num(p.omega),
                num(p.omega_rel),
                num(p.d),
                num(p.d0),
                num(p.branch_infimum),
                p.degenerate.to_string(),
                p.converged.to_string(),
            ]
        })
        .collect();
    let header = [
        "omega",
        "omega_rel",
        "d",
        "d0",
        "branch_inf",
        "degenerate",
        "converged",
    ];
    let csv = out.csv("d_curve.csv", &prov, &header, &rows)?;
    let code = if !points.iter().all(|p| p.converged) {
        EXIT_NOT_CONVERGED
    } else if points.iter().all(|p| p.pass) {
        EXIT_OK
    } else {
        EXIT_GATE
    };
    let js = out.json(
        "d_curve.json",
        &prov,
        json!({ "omega0": params.omega0, "points": points, "status": status(code), "exit_code": code }),
    )?;
    let below = points.iter().filter(|p| p.omega <= params.omega0).count();
    let summary = format!(
        "d-curve: {} frequencies ({below} at or below omega0), {}",
        points.len(),
        status(code)
    );
    Ok(Outcome {
        code,
        summary,
        files: vec![csv, js],
    })
}

pub fn rearrange_test(args: &RearrangeArgs) -> CliResult<Outcome> {
    let cfg = BatteryConfig {
        n: args.n,
        extent: args.extent,
        pairs: args.pairs,
        polya_szego_trials: args.trials,
        powers: args.powers.clone(),
        seed: args.seed,
    };
    let prov = Provenance::new("rearrange-test", resolved(args, to_value(&cfg)));
    let report = inequality_battery(&cfg)?;
    let out = OutputDir::create(&args.out.out_dir)?;
    let code = if report.pass() { EXIT_OK } else { EXIT_GATE };
    let js = out.json(
        "rearrange_test.json",
        &prov,
        json!({ "report": report, "pass": report.pass(), "status": status(code), "exit_code": code }),
    )?;
    let summary = format!(
        "rearrange-test: {} pairs, max Polya-Szego ratio {:.6}, {}",
        report.pairs,
        report.polya_szego_max_ratio,
        status(code)
    );
    Ok(Outcome {
        code,
        summary,
        files: vec![js],
    })
}

pub fn verify(args: &VerifyArgs) -> CliResult<Outcome> {
    let (header, state) = read_state(&args.state)?;
    let params = header.params;
    let prov = Provenance::new(
        "verify",
        resolved(
            args,
            json!({ "state_header": header, "el_tol": args.el_tol, "bc_tol": args.bc_tol }),
        ),
    );
    let out = OutputDir::create(&args.out.out_dir)?;
    let report = state_checks(&state, header.omega, &params)?;
    let functionals = evaluate(&state, &params, header.omega);
    let mut gates = state_gates(&report, args.el_tol, args.bc_tol);
    if header.kind == "action-min" {
        gates.insert(
            "nehari",
            Gate::at_most(functionals.nehari.abs() / functionals.lp_p, NEHARI_TOL),
        );
    }
    let code = exit_code(true, &gates, &report);
    let js = out.json(
        "verify.json",
        &prov,
        json!({
            "functionals": functionals,
            "verification": report,
            "gates": gates,
            "status": status(code),
            "exit_code": code,
        }),
    )?;
    let failed: Vec<&str> = gates
        .iter()
        .filter(|(_, g)| !g.pass)
        .map(|(k, _)| *k)
        .collect();
    let summary = if failed.is_empty() {
        format!("verify: {} gates pass, {}", gates.len(), status(code))
    } else {
        format!("verify: failed {}", failed.join(", "))
    };
    Ok(Outcome {
        code,
        summary,
        files: vec![js],
    })
}
