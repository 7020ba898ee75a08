//! Functionals on states `u = φ_λ + q G_λ`.
//!
//! All evaluators share one discretization: `‖∇φ‖²` is the P1 Dirichlet form
//! of the grid, `L²` products use the grid weights, `‖G_λ‖₂² = 1/(4πλ)` is
//! taken in closed form, and `‖u‖_p^p` is the log-corrected quadrature of
//! [`crate::rgrid::state_lp_p`]. The solvers minimize exactly these discrete
//! functionals.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{contract, domain, Result};
use crate::rgrid::{RadialField, RadialGrid};
use crate::specfun::{green, PhysicalParams};

/// A state in the regular-plus-singular decomposition, gauge-fixed to a
/// real nonnegative charge.
#[derive(Debug, Clone, PartialEq)]
pub struct DecomposedState {
    lambda: f64,
    q: f64,
    phi: RadialField,
}

impl DecomposedState {
    pub fn new(lambda: f64, q: f64, phi: RadialField) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(domain(format!(
                "decomposition parameter must be positive, got {lambda}"
            )));
        }
        if !(q >= 0.0 && q.is_finite()) {
            return Err(domain(format!(
                "charge must be real and nonnegative, got {q}"
            )));
        }
        Ok(Self { lambda, q, phi })
    }

    /// `q G_λ` with no regular part.
    pub fn singular(grid: Arc<RadialGrid>, lambda: f64, q: f64) -> Result<Self> {
        Self::new(lambda, q, RadialField::zeros(grid))
    }

    /// A state with no singular part.
    pub fn regular(phi: RadialField) -> Self {
        Self {
            lambda: 1.0,
            q: 0.0,
            phi,
        }
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn phi(&self) -> &RadialField {
        &self.phi
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        self.phi.grid()
    }

    pub fn green_values(&self) -> Vec<f64> {
        green_table(self.grid(), self.lambda)
    }

    /// `u(rᵢ) = φ(rᵢ) + q G_λ(rᵢ)`.
    pub fn full_values(&self) -> Vec<f64> {
        let g = self.green_values();
        self.phi
            .values()
            .iter()
            .zip(&g)
            .map(|(f, g)| f + self.q * g)
            .collect()
    }

    /// The same state multiplied by `c ≥ 0`.
    pub fn scaled(&self, c: f64) -> Self {
        let mut phi = self.phi.clone();
        phi.values_mut().iter_mut().for_each(|v| *v *= c);
        Self {
            lambda: self.lambda,
            q: self.q * c,
            phi,
        }
    }
}

pub(crate) fn green_table(grid: &RadialGrid, lambda: f64) -> Vec<f64> {
    grid.nodes().iter().map(|&r| green(lambda, r)).collect()
}

/// Building blocks shared by every functional.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Pieces {
    pub gradsq: f64,
    pub phi_sq: f64,
    /// `⟨φ, G_λ⟩`
    pub cross: f64,
    pub lp: f64,
}

impl Pieces {
    pub fn compute(grid: &RadialGrid, phi: &[f64], q: f64, green: &[f64], p: f64) -> Self {
        let w = grid.weights();
        let mut phi_sq = 0.0;
        let mut cross = 0.0;
        let mut u = Vec::with_capacity(phi.len());
        for i in 0..phi.len() {
            phi_sq += w[i] * phi[i] * phi[i];
            cross += w[i] * phi[i] * green[i];
            u.push(phi[i] + q * green[i]);
        }
        Self {
            gradsq: grid.dirichlet(phi),
            phi_sq,
            cross,
            lp: grid.lp_p_values(&u, p),
        }
    }

    pub fn mass(&self, q: f64, lambda: f64) -> f64 {
        self.phi_sq + 2.0 * q * self.cross + q * q / (4.0 * PI * lambda)
    }

    /// `Q`, with `λ(‖φ‖² − ‖u‖²)` written as `−λ(2q⟨φ,G⟩ + q²/(4πλ))`.
    pub fn quadratic(&self, q: f64, lambda: f64, params: &PhysicalParams) -> f64 {
        self.gradsq - 2.0 * lambda * q * self.cross - q * q / (4.0 * PI)
            + params.alpha_plus_theta(lambda) * q * q
    }
}

fn pieces(state: &DecomposedState, p: f64) -> Pieces {
    let g = state.green_values();
    Pieces::compute(state.grid(), state.phi.values(), state.q, &g, p)
}

/// Every functional evaluated on one state at one frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FunctionalReport {
    pub omega: f64,
    pub mass: f64,
    pub lp_p: f64,
    pub gradsq_phi: f64,
    #[serde(rename = "Q")]
    pub q_form: f64,
    #[serde(rename = "Q_omega")]
    pub q_omega: f64,
    #[serde(rename = "E")]
    pub energy: f64,
    #[serde(rename = "S_omega")]
    pub action: f64,
    #[serde(rename = "I_omega")]
    pub nehari: f64,
    #[serde(rename = "S_tilde")]
    pub s_tilde: f64,
}

/// Evaluate all functionals at frequency `omega`.
pub fn evaluate(state: &DecomposedState, params: &PhysicalParams, omega: f64) -> FunctionalReport {
    let pc = pieces(state, params.p);
    report_from_pieces(&pc, state.q, state.lambda, params, omega)
}

pub(crate) fn report_from_pieces(
    pc: &Pieces,
    q: f64,
    lambda: f64,
    params: &PhysicalParams,
    omega: f64,
) -> FunctionalReport {
    let p = params.p;
    let mass = pc.mass(q, lambda);
    let q_form = pc.quadratic(q, lambda, params);
    let q_omega = q_form + omega * mass;
    let energy = 0.5 * q_form - pc.lp / p;
    FunctionalReport {
        omega,
        mass,
        lp_p: pc.lp,
        gradsq_phi: pc.gradsq,
        q_form,
        q_omega,
        energy,
        action: energy + 0.5 * omega * mass,
        nehari: q_omega - pc.lp,
        s_tilde: (p - 2.0) / (2.0 * p) * pc.lp,
    }
}

/// `‖u‖₂² = ‖φ‖² + 2q⟨φ, G_λ⟩ + q²/(4πλ)`.
pub fn mass(state: &DecomposedState) -> f64 {
    let g = state.green_values();
    let w = state.grid().weights();
    let phi = state.phi.values();
    let mut phi_sq = 0.0;
    let mut cross = 0.0;
    for i in 0..phi.len() {
        phi_sq += w[i] * phi[i] * phi[i];
        cross += w[i] * phi[i] * g[i];
    }
    phi_sq + 2.0 * state.q * cross + state.q * state.q / (4.0 * PI * state.lambda)
}

/// `Q(u) = ‖∇φ_λ‖² + λ(‖φ_λ‖² − ‖u‖²) + (α + θ_λ) q²`.
pub fn quadratic_form(state: &DecomposedState, params: &PhysicalParams) -> f64 {
    pieces(state, params.p).quadratic(state.q, state.lambda, params)
}

/// `E(u) = ½Q(u) − ‖u‖_p^p / p`.
pub fn energy(state: &DecomposedState, params: &PhysicalParams) -> f64 {
    evaluate(state, params, 0.0).energy
}

/// `S_ω(u) = E(u) + (ω/2)‖u‖²`.
pub fn action(state: &DecomposedState, params: &PhysicalParams, omega: f64) -> f64 {
    evaluate(state, params, omega).action
}

/// `I_ω(u) = Q(u) + ω‖u‖² − ‖u‖_p^p`.
pub fn nehari(state: &DecomposedState, params: &PhysicalParams, omega: f64) -> f64 {
    evaluate(state, params, omega).nehari
}

/// `S̃(u) = (p − 2)/(2p) ‖u‖_p^p`.
pub fn s_tilde(state: &DecomposedState, params: &PhysicalParams) -> f64 {
    let p = params.p;
    (p - 2.0) / (2.0 * p) * pieces(state, p).lp
}

/// Re-express the same `u` with decomposition parameter `nu`:
/// `φ_ν = φ_λ + q(G_λ − G_ν)`.
pub fn rebase(state: &DecomposedState, nu: f64) -> Result<DecomposedState> {
    if !(nu > 0.0 && nu.is_finite()) {
        return Err(domain(format!(
            "decomposition parameter must be positive, got {nu}"
        )));
    }
    let grid = Arc::clone(state.grid());
    let q = state.q;
    let lambda = state.lambda;
    let values = grid
        .nodes()
        .iter()
        .zip(state.phi.values())
        .map(|(&r, &f)| f + q * (green(lambda, r) - green(nu, r)))
        .collect();
    DecomposedState::new(nu, q, RadialField::new(grid, values)?)
}

/// Frequency `ω = (‖u‖_p^p − Q(u))/‖u‖²` attached to a mass-constrained critical point.
pub fn lagrange_frequency(state: &DecomposedState, params: &PhysicalParams) -> Result<f64> {
    let r = evaluate(state, params, 0.0);
    if !(r.mass > 0.0) {
        return Err(contract("lagrange_frequency of a zero-mass state"));
    }
    Ok((r.lp_p - r.q_form) / r.mass)
}

/// `‖u‖_p^p / (‖∇φ‖^{p−2}‖φ‖² + q^p/λ)`, the quantity bounded by the extended
/// Gagliardo–Nirenberg inequality.
pub fn gagliardo_nirenberg_ratio(state: &DecomposedState, p: f64) -> f64 {
    let pc = pieces(state, p);
    let denom = pc.gradsq.powf(0.5 * (p - 2.0)) * pc.phi_sq + state.q.powf(p) / state.lambda;
    pc.lp / denom
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::green_lp_p;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn params() -> PhysicalParams {
        PhysicalParams::new(3.0, 0.0).unwrap()
    }

    fn grid() -> Arc<RadialGrid> {
        RadialGrid::for_decay(0.25, 4096).unwrap()
    }

    fn random_state(rng: &mut ChaCha8Rng, grid: &Arc<RadialGrid>, w0: f64) -> DecomposedState {
        let lambda = w0 * rng.gen_range(0.25..4.0);
        let amp = rng.gen_range(0.2..2.0);
        let width = rng.gen_range(0.6..2.0);
        let bump = rng.gen_range(-0.3..0.3);
        let phi = grid.sample(|r| amp * (-(r / width).powi(2)).exp() * (1.0 + bump * r));
        DecomposedState::new(lambda, rng.gen_range(0.0..1.5), phi).unwrap()
    }

    #[test]
    fn singular_state_values() {
        let prm = params();
        let g = grid();
        let s = DecomposedState::singular(g.clone(), 1.0, 1.0).unwrap();
        assert!((mass(&s) - 1.0 / (4.0 * PI)).abs() < 1e-15);
        let q = quadratic_form(&s, &prm);
        assert!((q - (prm.alpha_plus_theta(1.0) - 1.0 / (4.0 * PI))).abs() < 1e-14);
        // the linear eigenstate G_{ω₀}: Q = ℓ_α ‖G_{ω₀}‖²
        let s = DecomposedState::singular(g, prm.omega0, 1.0).unwrap();
        let q = quadratic_form(&s, &prm);
        assert!((q + 1.0 / (4.0 * PI)).abs() < 1e-14);
        assert!((q - prm.ell_alpha * mass(&s)).abs() < 1e-14);
    }

    #[test]
    fn regular_state_reduces_to_classical_functionals() {
        let prm = params();
        let g = grid();
        let s = DecomposedState::regular(g.sample(|r| (-0.5 * r * r).exp()));
        // ‖e^{−r²/2}‖² = π, ‖∇ e^{−r²/2}‖² = π
        assert!((mass(&s) - PI).abs() < 1e-6);
        let q = quadratic_form(&s, &prm);
        assert!((q - PI).abs() < 1e-4);
        let lp = evaluate(&s, &prm, 0.0).lp_p;
        assert!((lp - 2.0 * PI / 3.0).abs() < 1e-6);
        assert!((energy(&s, &prm) - (0.5 * q - lp / 3.0)).abs() < 1e-14);
        let zero = DecomposedState::regular(RadialField::zeros(g));
        assert_eq!(energy(&zero, &prm), 0.0);
    }

    #[test]
    fn singular_lp_matches_closed_form() {
        for lambda in [0.5, 1.0, 3.0] {
            let g = RadialGrid::for_decay(lambda, 4096).unwrap();
            let s = DecomposedState::singular(g, lambda, 1.0).unwrap();
            let lp = evaluate(&s, &params(), 0.0).lp_p;
            let exact = green_lp_p(lambda, 3.0).unwrap();
            assert!(((lp - exact) / exact).abs() < 1e-5);
        }
    }

    #[test]
    fn report_identities() {
        let prm = params();
        let g = grid();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10 {
            let s = random_state(&mut rng, &g, prm.omega0);
            let omega = rng.gen_range(0.1..3.0);
            let r = evaluate(&s, &prm, omega);
            let tol = 1e-10 * (r.mass + r.lp_p + r.gradsq_phi);
            assert!((r.action - (0.5 * r.q_omega - r.lp_p / 3.0)).abs() < tol);
            assert!((r.nehari - (r.q_omega - r.lp_p)).abs() < tol);
            assert!((r.s_tilde - r.lp_p / 6.0).abs() < tol);
            assert!(r.s_tilde >= 0.0);
            assert_eq!(
                evaluate(&s, &prm, 0.0).action,
                evaluate(&s, &prm, 0.0).energy
            );
        }
    }

    #[test]
    fn rebase_is_an_involution_and_preserves_functionals() {
        let prm = params();
        let g = grid();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            let s = random_state(&mut rng, &g, prm.omega0);
            let nu = prm.omega0 * rng.gen_range(0.25..4.0);
            let t = rebase(&s, nu).unwrap();
            let back = rebase(&t, s.lambda()).unwrap();
            for (a, b) in back.phi().values().iter().zip(s.phi().values()) {
                assert!((a - b).abs() < 1e-12 * (1.0 + b.abs()));
            }
            let (ra, rb) = (evaluate(&s, &prm, 1.0), evaluate(&t, &prm, 1.0));
            for (x, y) in [
                (ra.mass, rb.mass),
                (ra.q_form, rb.q_form),
                (ra.energy, rb.energy),
                (ra.action, rb.action),
                (ra.nehari, rb.nehari),
            ] {
                assert!((x - y).abs() <= 1e-6 * x.abs().max(1e-3), "{x} vs {y}");
            }
        }
    }

    #[test]
    fn rebase_shifts_origin_value_by_log_ratio() {
        let g = grid();
        let s = DecomposedState::new(1.0, 0.8, g.sample(|r| (-r * r).exp())).unwrap();
        let t = rebase(&s, 3.0).unwrap();
        let shift = t.phi().origin_value() - s.phi().origin_value();
        let expected = 0.8 * 3.0_f64.ln() / (4.0 * PI);
        assert!((shift - expected).abs() < 1e-9, "{shift} vs {expected}");
    }

    #[test]
    fn beta_scaling_lands_on_nehari_manifold() {
        let prm = params();
        let g = grid();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut checked = 0;
        while checked < 20 {
            let s = random_state(&mut rng, &g, prm.omega0);
            let omega = 2.0 * prm.omega0;
            let r = evaluate(&s, &prm, omega);
            if r.q_omega <= 0.0 {
                continue;
            }
            let beta = (r.q_omega / r.lp_p).powf(1.0 / (prm.p - 2.0));
            let t = s.scaled(beta);
            let rt = evaluate(&t, &prm, omega);
            assert!(rt.nehari.abs() < 1e-10 * rt.lp_p);
            assert!((rt.action - rt.s_tilde).abs() < 1e-8 * rt.s_tilde);
            checked += 1;
        }
    }

    #[test]
    fn lagrange_frequency_homogeneity() {
        let prm = params();
        let g = grid();
        let s = DecomposedState::new(1.0, 0.5, g.sample(|r| (-r * r).exp())).unwrap();
        let r = evaluate(&s, &prm, 0.0);
        let c: f64 = 1.7;
        let w = lagrange_frequency(&s.scaled(c), &prm).unwrap();
        let expected = (c.powf(3.0) * r.lp_p - c * c * r.q_form) / (c * c * r.mass);
        assert!((w - expected).abs() < 1e-10 * expected.abs());
        let zero = DecomposedState::regular(RadialField::zeros(g));
        assert!(lagrange_frequency(&zero, &prm).is_err());
    }

    #[test]
    fn rejects_invalid_states() {
        let g = grid();
        assert!(DecomposedState::new(0.0, 1.0, RadialField::zeros(g.clone())).is_err());
        assert!(DecomposedState::new(1.0, -1.0, RadialField::zeros(g.clone())).is_err());
        let s = DecomposedState::singular(g, 1.0, 1.0).unwrap();
        assert!(rebase(&s, -2.0).is_err());
    }
}
