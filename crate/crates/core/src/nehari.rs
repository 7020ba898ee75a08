//! The purely singular part of the Nehari manifold, `{q G_λ : I_ω(q G_λ) = 0}`.
//!
//! With `K = ‖G₁‖_p^p`, `I_ω(q G_λ) = 0` reduces to
//! `q^{p−2} = g(λ)/K` where `g(λ) = (ω − λ)/(4π) + λ(α + θ_λ)`. The function
//! `g` is convex with `g′(λ) = α + θ_λ`, so it has its minimum
//! `(ω − ω₀)/(4π)` at `λ = ω₀`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::specfun::{green_unit_lp_p, PhysicalParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GValue {
    pub g: f64,
    /// `g′(λ) = α + θ_λ`
    pub dg: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NehariBranchPoint {
    pub lambda: f64,
    pub g: f64,
    pub q: f64,
    /// `S̃(q G_λ)`; zero when inadmissible.
    pub action: f64,
    pub admissible: bool,
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(domain(format!("lambda must be positive, got {lambda}")));
    }
    Ok(())
}

fn check_omega(omega: f64) -> Result<()> {
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(domain(format!("frequency must be positive, got {omega}")));
    }
    Ok(())
}

pub fn g_function(lambda: f64, omega: f64, params: &PhysicalParams) -> Result<GValue> {
    check_lambda(lambda)?;
    Ok(g_raw(lambda, omega, params))
}

fn g_raw(lambda: f64, omega: f64, params: &PhysicalParams) -> GValue {
    let dg = params.alpha_plus_theta(lambda);
    GValue {
        g: (omega - lambda) / (4.0 * PI) + lambda * dg,
        dg,
    }
}

/// The two zeros `λ₁ < ω₀ < λ₂` of `g` when `ω < ω₀`, `None` otherwise.
pub fn branch_roots(omega: f64, params: &PhysicalParams) -> Result<Option<(f64, f64)>> {
    check_omega(omega)?;
    let w0 = params.omega0;
    if omega >= w0 {
        return Ok(None);
    }
    let g = |l: f64| g_raw(l, omega, params).g;

    let mut lo = 1e-8 * w0;
    while g(lo) <= 0.0 {
        lo *= 1e-4;
    }
    let lambda1 = bisect(&g, lo, w0);

    let mut hi = 2.0 * w0;
    while g(hi) <= 0.0 {
        hi *= 2.0;
    }
    let lambda2 = bisect(&g, w0, hi);
    Ok(Some((lambda1, lambda2)))
}

/// Root of `f` in `[a, b]` given a sign change; runs until the bracket stops shrinking.
fn bisect(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let fa_pos = f(a) > 0.0;
    for _ in 0..400 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        if (f(m) > 0.0) == fa_pos {
            a = m;
        } else {
            b = m;
        }
    }
    if f(a).abs() <= f(b).abs() {
        a
    } else {
        b
    }
}

/// Charge and reduced action of the branch state at `λ`, or an inadmissible
/// marker when `g(λ) ≤ 0`.
pub fn branch_point(lambda: f64, omega: f64, params: &PhysicalParams) -> Result<NehariBranchPoint> {
    check_lambda(lambda)?;
    let k = green_unit_lp_p(params.p)?;
    Ok(branch_point_with(lambda, omega, params, k))
}

fn branch_point_with(
    lambda: f64,
    omega: f64,
    params: &PhysicalParams,
    k: f64,
) -> NehariBranchPoint {
    let p = params.p;
    let g = g_raw(lambda, omega, params).g;
    if g <= 0.0 {
        return NehariBranchPoint {
            lambda,
            g,
            q: 0.0,
            action: 0.0,
            admissible: false,
        };
    }
    let q = (g / k).powf(1.0 / (p - 2.0));
    NehariBranchPoint {
        lambda,
        g,
        q,
        action: (p - 2.0) / (2.0 * p) * k * q.powf(p) / lambda,
        admissible: true,
    }
}

pub fn branch_scan(
    omega: f64,
    params: &PhysicalParams,
    lambda_grid: &[f64],
) -> Result<Vec<NehariBranchPoint>> {
    let k = green_unit_lp_p(params.p)?;
    lambda_grid
        .iter()
        .map(|&l| {
            check_lambda(l)?;
            Ok(branch_point_with(l, omega, params, k))
        })
        .collect()
}

/// `n` log-spaced values from `lo` to `hi`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n.max(2) - 1) as f64).exp())
        .collect()
}

/// Infimum of the branch action over `λ > 0`.
///
/// Zero (approached, not attained) for `ω ≤ ω₀`. For `ω > ω₀` the action
/// blows up at both ends, and the minimum is located by a log-spaced scan
/// refined with golden-section search.
pub fn branch_infimum(omega: f64, params: &PhysicalParams) -> Result<f64> {
    check_omega(omega)?;
    if omega <= params.omega0 {
        return Ok(0.0);
    }
    let k = green_unit_lp_p(params.p)?;
    let f = |s: f64| branch_point_with(s.exp(), omega, params, k).action;
    let center = params.omega0.max(omega).ln();
    let (lo, hi) = (center - 25.0, center + 25.0);
    let n = 2001;
    let step = (hi - lo) / (n - 1) as f64;
    let (mut best_i, mut best) = (0, f64::INFINITY);
    for i in 0..n {
        let v = f(lo + i as f64 * step);
        if v < best {
            best = v;
            best_i = i;
        }
    }
    let (mut a, mut b) = (
        lo + (best_i as f64 - 1.0) * step,
        lo + (best_i as f64 + 1.0) * step,
    );
    let inv_phi = 0.5 * (5.0_f64.sqrt() - 1.0);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
        if (b - a).abs() < 1e-13 {
            break;
        }
    }
    Ok(best.min(fc).min(fd))
}
