//! Macdonald function `K₀`, the 2D Green's function `G_λ = K₀(√λ r)/(2π)` of
//! `−Δ + λ`, the boundary coefficient `θ_λ`, the spectral threshold `ω₀` and
//! the closed-form norms of `G_λ`.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{OnceLock, RwLock};

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Nonlinearity power and defect strength, with the derived threshold
/// `ω₀ = 4·exp(−4πα − 2γ)` and eigenvalue `ℓ_α = −ω₀` of the point
/// interaction Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    pub p: f64,
    pub alpha: f64,
    pub gamma_euler: f64,
    pub omega0: f64,
    pub ell_alpha: f64,
}

impl PhysicalParams {
    pub fn new(p: f64, alpha: f64) -> Result<Self> {
        if !p.is_finite() || p <= 2.0 {
            return Err(domain(format!(
                "nonlinearity power must satisfy p > 2, got {p}"
            )));
        }
        if !alpha.is_finite() {
            return Err(domain(format!(
                "defect strength must be finite, got {alpha}"
            )));
        }
        let omega0 = omega_threshold(alpha);
        if omega0 == 0.0 || !omega0.is_finite() {
            return Err(domain(format!(
                "threshold frequency out of range for alpha = {alpha}"
            )));
        }
        Ok(Self {
            p,
            alpha,
            gamma_euler: EULER_GAMMA,
            omega0,
            ell_alpha: -omega0,
        })
    }

    /// `p ∈ (2, 4)`, the range in which the mass-constrained energy is bounded below.
    pub fn require_subcritical(&self) -> Result<()> {
        if self.p >= 4.0 {
            return Err(domain(format!(
                "mass-constrained problems need 2 < p < 4, got p = {}",
                self.p
            )));
        }
        Ok(())
    }

    /// `α + θ_λ`, evaluated as `log(λ/ω₀)/(4π)`.
    pub fn alpha_plus_theta(&self, lambda: f64) -> f64 {
        (lambda / self.omega0).ln() / (4.0 * PI)
    }
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v.is_nan() || v <= 0.0 {
        Err(domain(format!("{name} must be positive, got {v}")))
    } else {
        Ok(())
    }
}

/// Macdonald function `K₀(x)` for `x > 0`.
///
/// Uses the logarithmic power series up to `x = 2` and Temme's continued
/// fraction for `e^x K₀(x)` above. Underflows to `0` past `x ≈ 745`.
pub fn bessel_k0(x: f64) -> Result<f64> {
    check_positive("K0 argument", x)?;
    Ok(k0(x))
}

/// `e^x K₀(x)`, finite for every `x > 0`.
pub fn bessel_k0_scaled(x: f64) -> Result<f64> {
    check_positive("K0 argument", x)?;
    if x.is_infinite() {
        return Ok(0.0);
    }
    Ok(if x <= 2.0 {
        k0_series(x) * x.exp()
    } else {
        k0e_cf(x)
    })
}

pub(crate) fn k0(x: f64) -> f64 {
    if x <= 2.0 {
        k0_series(x)
    } else if x.is_infinite() {
        0.0
    } else {
        k0e_cf(x) * (-x).exp()
    }
}

fn k0_series(x: f64) -> f64 {
    let y = 0.25 * x * x;
    let mut term = 1.0;
    let mut i0 = 1.0;
    let mut harmonic = 0.0;
    let mut tail = 0.0;
    for k in 1..60 {
        let kf = k as f64;
        term *= y / (kf * kf);
        harmonic += 1.0 / kf;
        i0 += term;
        tail += term * harmonic;
        if term * harmonic < 1e-18 * tail.abs().max(1e-300) {
            break;
        }
    }
    -((0.5 * x).ln() + EULER_GAMMA) * i0 + tail
}

fn k0e_cf(x: f64) -> f64 {
    // Steed's evaluation of Temme's CF2 at order zero.
    let mut b = 2.0 * (1.0 + x);
    let mut d = 1.0 / b;
    let mut delh = d;
    let mut q1 = 0.0;
    let mut q2 = 1.0;
    let a1 = 0.25;
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = 1.0 + q * delh;
    for i in 2..10_000 {
        let fi = i as f64;
        a -= 2.0 * (fi - 1.0);
        c = -a * c / fi;
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh *= b * d - 1.0;
        let dels = q * delh;
        s += dels;
        if (dels / s).abs() < 1e-17 {
            break;
        }
    }
    (PI / (2.0 * x)).sqrt() / s
}

/// `G_λ(r) = K₀(√λ r)/(2π)`.
pub fn green_value(lambda: f64, r: f64) -> Result<f64> {
    check_positive("lambda", lambda)?;
    check_positive("radius", r)?;
    Ok(green(lambda, r))
}

#[inline]
pub(crate) fn green(lambda: f64, r: f64) -> f64 {
    k0(lambda.sqrt() * r) / (2.0 * PI)
}

/// `θ_λ = (log(√λ/2) + γ)/(2π)`.
pub fn theta(lambda: f64) -> Result<f64> {
    check_positive("lambda", lambda)?;
    Ok((0.5 * lambda.ln() - std::f64::consts::LN_2 + EULER_GAMMA) / (2.0 * PI))
}

/// `ω₀ = −ℓ_α = 4·exp(−4πα − 2γ)`.
pub fn omega_threshold(alpha: f64) -> f64 {
    4.0 * (-4.0 * PI * alpha - 2.0 * EULER_GAMMA).exp()
}

/// `‖G_λ‖₂² = 1/(4πλ)`.
pub fn green_l2_sq(lambda: f64) -> Result<f64> {
    check_positive("lambda", lambda)?;
    Ok(1.0 / (4.0 * PI * lambda))
}

/// `‖G_λ‖_p^p = ‖G₁‖_p^p / λ` for `p > 2`.
pub fn green_lp_p(lambda: f64, p: f64) -> Result<f64> {
    check_positive("lambda", lambda)?;
    Ok(green_unit_lp_p(p)? / lambda)
}

/// `c(p) = ‖G₁‖_p^p`, memoized per `p`.
pub fn green_unit_lp_p(p: f64) -> Result<f64> {
    if !(p > 2.0) || !p.is_finite() {
        return Err(domain(format!("green_lp_p needs p > 2, got {p}")));
    }
    static CACHE: OnceLock<RwLock<HashMap<u64, f64>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| RwLock::new(HashMap::new()));
    let key = p.to_bits();
    if let Some(v) = cache.read().ok().and_then(|m| m.get(&key).copied()) {
        return Ok(v);
    }
    let v = unit_lp_quadrature(p);
    if let Ok(mut m) = cache.write() {
        m.insert(key, v);
    }
    Ok(v)
}

/// `∫₀^∞ (K₀(r)/2π)^p 2πr dr` by the trapezoid rule in `s = ln r`, halving
/// the step until two successive values agree to 1e-14.
///
/// The integrand is analytic in `s` and decays like `e^{2s}|s|^p` on the
/// left and doubly exponentially on the right, so the rule converges
/// geometrically.
fn unit_lp_quadrature(p: f64) -> f64 {
    let (s_lo, s_hi) = (-40.0_f64, 60.0_f64.ln());
    let integrand = |s: f64| {
        let r = s.exp();
        2.0 * PI * r * r * (k0(r) / (2.0 * PI)).powf(p)
    };
    let mut n = 512usize;
    let mut h = (s_hi - s_lo) / n as f64;
    let mut sum: f64 = (0..=n).map(|i| integrand(s_lo + i as f64 * h)).sum();
    let mut value = sum * h;
    for _ in 0..12 {
        // add the midpoints of the current cells
        let mid: f64 = (0..n).map(|i| integrand(s_lo + (i as f64 + 0.5) * h)).sum();
        sum += mid;
        n *= 2;
        h *= 0.5;
        let next = sum * h;
        let converged = (next - value).abs() <= 1e-14 * next.abs();
        value = next;
        if converged {
            break;
        }
    }
    value
}

/// Number of terms in the small-separation series.
const DIFF_SERIES_TERMS: usize = 24;
/// Relative separation `max/min − 1` below which the series is used.
const DIFF_SERIES_EPS: f64 = 1e-2;

/// `‖G_λ − G_ν‖₂² = (1/4π)(1/λ + 1/ν + 2 log(ν/λ)/(λ − ν))`.
pub fn green_diff_l2_sq(lambda: f64, nu: f64) -> Result<f64> {
    check_positive("lambda", lambda)?;
    check_positive("nu", nu)?;
    let (lo, hi) = if lambda <= nu {
        (lambda, nu)
    } else {
        (nu, lambda)
    };
    if hi / lo - 1.0 < DIFF_SERIES_EPS {
        Ok(diff_l2_series(lo, hi))
    } else {
        Ok(diff_l2_direct(lo, hi))
    }
}

fn diff_l2_direct(lo: f64, hi: f64) -> f64 {
    let bracket = 1.0 / lo + 1.0 / hi + 2.0 * (hi / lo).ln() / (lo - hi);
    bracket.max(0.0) / (4.0 * PI)
}

/// `1 + 1/(1+ε) − 2 ln(1+ε)/ε = Σ_{k≥2} (−1)^k (k−1)/(k+1) ε^k` with `ε = hi/lo − 1`.
fn diff_l2_series(lo: f64, hi: f64) -> f64 {
    let eps = hi / lo - 1.0;
    let mut sum = 0.0;
    let mut pow = eps * eps;
    for k in 2..DIFF_SERIES_TERMS {
        let kf = k as f64;
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign * (kf - 1.0) / (kf + 1.0) * pow;
        pow *= eps;
    }
    sum / (4.0 * PI * lo)
}

/// `‖∇(G_λ − G_ν)‖₂² = (1/4π)((λ + ν) log(λ/ν)/(λ − ν) − 2)`.
pub fn green_diff_grad_l2_sq(lambda: f64, nu: f64) -> Result<f64> {
    check_positive("lambda", lambda)?;
    check_positive("nu", nu)?;
    let (lo, hi) = if lambda <= nu {
        (lambda, nu)
    } else {
        (nu, lambda)
    };
    if hi / lo - 1.0 < DIFF_SERIES_EPS {
        Ok(diff_grad_series(lo, hi))
    } else {
        Ok(diff_grad_direct(lo, hi))
    }
}

fn diff_grad_direct(lo: f64, hi: f64) -> f64 {
    let bracket = (lo + hi) * (lo / hi).ln() / (lo - hi) - 2.0;
    bracket.max(0.0) / (4.0 * PI)
}

/// `(2+ε) ln(1+ε)/ε − 2 = Σ_{m≥2} (−1)^m (m−1)/(m(m+1)) ε^m`.
fn diff_grad_series(lo: f64, hi: f64) -> f64 {
    let eps = hi / lo - 1.0;
    let mut sum = 0.0;
    let mut pow = eps * eps;
    for m in 2..DIFF_SERIES_TERMS {
        let mf = m as f64;
        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign * (mf - 1.0) / (mf * (mf + 1.0)) * pow;
        pow *= eps;
    }
    sum / (4.0 * PI)
}
