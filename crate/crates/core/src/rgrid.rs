//! Geometrically graded radial grid for 2D radial integrals `∫ f(r) 2πr dr`.
//!
//! Nodes are uniform in `s = ln r`. Quadrature is the trapezoid rule in `s`
//! (the integrand `2π r² f` of a decaying, log-singular radial function is
//! smooth in `s`, so the rule is spectrally accurate), with sixth-order Gregory
//! end weights at the outer radius and the disk `[0, r₁]` lumped onto the
//! first node.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{contract, domain, Error, Result};
use crate::functionals::DecomposedState;

/// Gregory end weights, exact for polynomials of degree ≤ 5 in `s`.
const GREGORY: [f64; 5] = [
    95.0 / 288.0,
    317.0 / 240.0,
    23.0 / 30.0,
    793.0 / 720.0,
    157.0 / 160.0,
];

/// Default number of nodes.
pub const DEFAULT_NODES: usize = 4096;
/// Default `r_min / R`.
pub const DEFAULT_RMIN_FRACTION: f64 = 1e-7;
/// `R·√λ_min`, so that `e^{−√λ_min R}` is about `4e−18`.
pub const DECAY_LENGTHS: f64 = 40.0;

/// Geometric grading: `r_{i+1} = ratio · r_i`, starting at `r_min`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grading {
    pub ratio: f64,
    pub r_min: f64,
    /// `ln ratio`, the node spacing in `s = ln r`.
    pub log_step: f64,
}

/// Everything needed to rebuild a grid bit-for-bit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridDescriptor {
    pub truncation_radius: f64,
    pub nodes: usize,
    pub r_min: f64,
}

/// Resolution of grids whose radius is chosen from a decay rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridControls {
    pub nodes: usize,
    /// `r_min / R`
    pub rmin_fraction: f64,
}

impl Default for GridControls {
    fn default() -> Self {
        Self {
            nodes: DEFAULT_NODES,
            rmin_fraction: DEFAULT_RMIN_FRACTION,
        }
    }
}

impl GridControls {
    /// Twice the nodes, half the innermost radius.
    pub fn refined(&self) -> Self {
        Self {
            nodes: 2 * self.nodes,
            rmin_fraction: 0.5 * self.rmin_fraction,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    truncation_radius: f64,
    grading: Grading,
    inner_area: f64,
    /// Per-cell stiffness `π(r_{i+1} + r_i)/(r_{i+1} − r_i)`.
    stiffness: Vec<f64>,
}

/// Build a graded grid on `(0, R]` with `n` nodes starting at `r_min`.
pub fn build_grid(radius: f64, n: usize, r_min: f64) -> Result<Arc<RadialGrid>> {
    RadialGrid::new(radius, n, r_min).map(Arc::new)
}

impl RadialGrid {
    pub fn new(radius: f64, n: usize, r_min: f64) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::Config(format!(
                "truncation radius must be positive, got {radius}"
            )));
        }
        if n < 16 {
            return Err(Error::Config(format!(
                "a radial grid needs at least 16 nodes, got {n}"
            )));
        }
        if !(r_min > 0.0 && r_min < radius) {
            return Err(Error::Config(format!(
                "r_min must lie in (0, R) = (0, {radius}), got {r_min}"
            )));
        }
        if r_min > 1e-6 * radius {
            return Err(Error::Config(format!(
                "r_min = {r_min} does not resolve the logarithmic singularity; need r_min <= 1e-6 R = {}",
                1e-6 * radius
            )));
        }
        let s0 = r_min.ln();
        let h = (radius.ln() - s0) / (n - 1) as f64;
        let mut nodes: Vec<f64> = (0..n).map(|i| (s0 + i as f64 * h).exp()).collect();
        nodes[0] = r_min;
        nodes[n - 1] = radius;

        let mut weights: Vec<f64> = nodes.iter().map(|r| 2.0 * PI * r * r * h).collect();
        weights[0] *= 0.5;
        for (j, g) in GREGORY.iter().enumerate() {
            weights[n - 1 - j] *= g;
        }
        let inner_area = PI * r_min * r_min;
        weights[0] += inner_area;

        let stiffness = nodes
            .windows(2)
            .map(|w| PI * (w[1] + w[0]) / (w[1] - w[0]))
            .collect();

        Ok(Self {
            nodes,
            weights,
            truncation_radius: radius,
            grading: Grading {
                ratio: h.exp(),
                r_min,
                log_step: h,
            },
            inner_area,
            stiffness,
        })
    }

    /// Default grid resolving decay rates down to `lambda_min`:
    /// `R = 40/√λ_min`, `r_min = 1e-7 R`.
    pub fn for_decay(lambda_min: f64, n: usize) -> Result<Arc<Self>> {
        Self::with_controls(
            lambda_min,
            &GridControls {
                nodes: n,
                ..Default::default()
            },
        )
    }

    /// Like [`Self::for_decay`] with explicit resolution controls.
    pub fn with_controls(lambda_min: f64, controls: &GridControls) -> Result<Arc<Self>> {
        if !(lambda_min > 0.0 && lambda_min.is_finite()) {
            return Err(domain(format!(
                "decay rate must be positive, got {lambda_min}"
            )));
        }
        let radius = DECAY_LENGTHS / lambda_min.sqrt();
        build_grid(radius, controls.nodes, controls.rmin_fraction * radius)
    }

    pub fn from_descriptor(d: &GridDescriptor) -> Result<Arc<Self>> {
        build_grid(d.truncation_radius, d.nodes, d.r_min)
    }

    pub fn descriptor(&self) -> GridDescriptor {
        GridDescriptor {
            truncation_radius: self.truncation_radius,
            nodes: self.nodes.len(),
            r_min: self.grading.r_min,
        }
    }

    /// Same radius, twice the nodes, half the innermost radius.
    pub fn refined(&self) -> Result<Arc<Self>> {
        build_grid(
            self.truncation_radius,
            2 * self.nodes.len(),
            0.5 * self.grading.r_min,
        )
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn truncation_radius(&self) -> f64 {
        self.truncation_radius
    }

    pub fn grading(&self) -> Grading {
        self.grading
    }

    /// Area of the innermost disk `[0, r₁]`, included in the first weight.
    pub fn inner_area(&self) -> f64 {
        self.inner_area
    }

    /// `Σ wᵢ f(rᵢ)` for raw node values.
    pub fn integrate_values(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.len());
        self.weights.iter().zip(values).map(|(w, v)| w * v).sum()
    }

    /// Sample `f` at the nodes.
    pub fn sample(self: &Arc<Self>, f: impl Fn(f64) -> f64) -> RadialField {
        RadialField {
            grid: Arc::clone(self),
            values: self.nodes.iter().map(|&r| f(r)).collect(),
        }
    }

    /// P1 Dirichlet form `Σ π(r_{i+1}² − r_i²)((f_{i+1} − f_i)/(r_{i+1} − r_i))²`.
    pub(crate) fn dirichlet(&self, values: &[f64]) -> f64 {
        self.stiffness
            .iter()
            .zip(values.windows(2))
            .map(|(k, w)| {
                let d = w[1] - w[0];
                k * d * d
            })
            .sum()
    }

    /// `out = K f`, the gradient of `½·dirichlet(f)`.
    pub(crate) fn stiffness_apply(&self, values: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        for (i, k) in self.stiffness.iter().enumerate() {
            let flux = k * (values[i + 1] - values[i]);
            out[i] -= flux;
            out[i + 1] += flux;
        }
    }

    /// Solve `(K + σ W) x = rhs` in place (tridiagonal, Thomas algorithm).
    pub(crate) fn solve_shifted(&self, sigma: f64, rhs: &mut [f64], scratch: &mut Vec<f64>) {
        let n = self.len();
        scratch.clear();
        scratch.resize(n, 0.0);
        let k = &self.stiffness;
        let diag = |i: usize| {
            let mut d = sigma * self.weights[i];
            if i > 0 {
                d += k[i - 1];
            }
            if i + 1 < n {
                d += k[i];
            }
            d
        };
        // off-diagonal entries are −k[i]
        let mut denom = diag(0);
        scratch[0] = -k[0] / denom;
        rhs[0] /= denom;
        for i in 1..n {
            denom = diag(i) + k[i - 1] * scratch[i - 1];
            if i + 1 < n {
                scratch[i] = -k[i] / denom;
            }
            rhs[i] = (rhs[i] + k[i - 1] * rhs[i - 1]) / denom;
        }
        for i in (0..n - 1).rev() {
            rhs[i] -= scratch[i] * rhs[i + 1];
        }
    }

    /// `∫|u|^p 2πr dr` for node values `u`, with the innermost disk integrated
    /// on the model `u ≈ a ln r + b` through the first two nodes.
    pub(crate) fn lp_p_values(&self, u: &[f64], p: f64) -> f64 {
        let bulk: f64 = self
            .weights
            .iter()
            .zip(u)
            .map(|(w, v)| w * v.abs().powf(p))
            .sum();
        bulk - self.inner_area * u[0].abs().powf(p) + self.inner_log_model(u[0], u[1], p, None)
    }

    /// Like [`Self::lp_p_values`], also writing `∂/∂uᵢ` into `grad`.
    pub(crate) fn lp_p_values_grad(&self, u: &[f64], p: f64, grad: &mut [f64]) -> f64 {
        let mut total = 0.0;
        for (i, (&w, &v)) in self.weights.iter().zip(u).enumerate() {
            let a = v.abs();
            let ap = a.powf(p - 2.0);
            total += w * ap * a * a;
            grad[i] = w * p * ap * v;
        }
        let a0 = u[0].abs();
        let ap0 = a0.powf(p - 2.0);
        total -= self.inner_area * ap0 * a0 * a0;
        grad[0] -= self.inner_area * p * ap0 * u[0];
        let mut d = [0.0; 2];
        total += self.inner_log_model(u[0], u[1], p, Some(&mut d));
        grad[0] += d[0];
        grad[1] += d[1];
        total
    }

    /// `∫₀^{r₁} |m(r)|^p 2πr dr` with `m` linear in `ln r` through `(r₁,u₀)`,
    /// `(r₂,u₁)`: substituting `τ = ln r₁ − ln r`, this is
    /// `2π r₁² ∫₀^∞ |u₀ − aτ|^p e^{−2τ} dτ`, done with composite Simpson on
    /// `[0, 25]`.
    fn inner_log_model(&self, u0: f64, u1: f64, p: f64, grad: Option<&mut [f64; 2]>) -> f64 {
        const INTERVALS: usize = 240;
        const SPAN: f64 = 25.0;
        let h = self.grading.log_step;
        let slope = (u1 - u0) / h;
        let dt = SPAN / INTERVALS as f64;
        let prefactor = 2.0 * PI * self.grading.r_min * self.grading.r_min;
        let mut value = 0.0;
        let mut d0 = 0.0;
        let mut d1 = 0.0;
        for j in 0..=INTERVALS {
            let tau = j as f64 * dt;
            let c = if j == 0 || j == INTERVALS {
                1.0
            } else if j % 2 == 1 {
                4.0
            } else {
                2.0
            };
            let wt = c * dt / 3.0 * (-2.0 * tau).exp();
            let m = u0 - slope * tau;
            let am = m.abs();
            let amp = am.powf(p - 2.0);
            value += wt * amp * am * am;
            let dm = wt * p * amp * m;
            d0 += dm * (1.0 + tau / h);
            d1 -= dm * tau / h;
        }
        if let Some(g) = grad {
            g[0] = prefactor * d0;
            g[1] = prefactor * d1;
        }
        prefactor * value
    }
}

/// Real radial function sampled at the nodes of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialField {
    grid: Arc<RadialGrid>,
    values: Vec<f64>,
}

impl RadialField {
    pub fn new(grid: Arc<RadialGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(contract(format!(
                "field has {} values but the grid has {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(domain(format!("non-finite field value at node {i}")));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Arc<RadialGrid>) -> Self {
        let n = grid.len();
        Self {
            grid,
            values: vec![0.0; n],
        }
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn same_grid(&self, other: &RadialField) -> bool {
        Arc::ptr_eq(&self.grid, &other.grid) || *self.grid == *other.grid
    }

    /// Value at `r = 0` by quadratic extrapolation through the three innermost nodes.
    pub fn origin_value(&self) -> f64 {
        let r = self.grid.nodes();
        let f = &self.values;
        let (r0, r1, r2) = (r[0], r[1], r[2]);
        // Lagrange basis evaluated at 0
        let l0 = r1 * r2 / ((r0 - r1) * (r0 - r2));
        let l1 = r0 * r2 / ((r1 - r0) * (r1 - r2));
        let l2 = r0 * r1 / ((r2 - r0) * (r2 - r1));
        l0 * f[0] + l1 * f[1] + l2 * f[2]
    }
}

/// `Σ wᵢ f(rᵢ)`.
pub fn integrate(f: &RadialField) -> f64 {
    f.grid.integrate_values(&f.values)
}

/// `∫ f g 2πr dr`.
pub fn inner_product(f: &RadialField, g: &RadialField) -> Result<f64> {
    if !f.same_grid(g) {
        return Err(contract("inner product of fields on different grids"));
    }
    Ok(f.grid
        .weights()
        .iter()
        .zip(f.values.iter().zip(&g.values))
        .map(|(w, (a, b))| w * a * b)
        .sum())
}

/// `∫ |f′|² 2πr dr` from cell-centered differences. Meant for regular parts only.
pub fn grad_sq(f: &RadialField) -> Result<f64> {
    if f.values.len() < 3 {
        return Err(contract("grad_sq needs at least 3 nodes"));
    }
    Ok(f.grid.dirichlet(&f.values))
}

/// Output of [`radial_laplacian`]; the two end nodes hold extrapolated,
/// low-accuracy values.
#[derive(Debug, Clone)]
pub struct Laplacian {
    pub field: RadialField,
    pub extrapolated: [usize; 2],
}

/// `f″ + f′/r` at interior nodes from three-point stencils exact for
/// quadratics on the nonuniform grid; end values are linearly extrapolated.
pub fn radial_laplacian(f: &RadialField) -> Result<Laplacian> {
    let n = f.values.len();
    if n < 5 {
        return Err(contract("radial_laplacian needs at least 5 nodes"));
    }
    let r = f.grid.nodes();
    let v = &f.values;
    let mut out = vec![0.0; n];
    for i in 1..n - 1 {
        let hm = r[i] - r[i - 1];
        let hp = r[i + 1] - r[i];
        let s = hm + hp;
        let fwd = v[i + 1] - v[i];
        let bwd = v[i] - v[i - 1];
        let d2 = 2.0 * (fwd / hp - bwd / hm) / s;
        let d1 = (hm / hp * fwd + hp / hm * bwd) / s;
        out[i] = d2 + d1 / r[i];
    }
    let extrap = |out: &[f64], a: usize, b: usize, target: usize| {
        let t = (r[target] - r[a]) / (r[b] - r[a]);
        out[a] + t * (out[b] - out[a])
    };
    out[0] = extrap(&out, 1, 2, 0);
    out[n - 1] = extrap(&out, n - 3, n - 2, n - 1);
    Ok(Laplacian {
        field: RadialField {
            grid: Arc::clone(&f.grid),
            values: out,
        },
        extrapolated: [0, n - 1],
    })
}

/// `‖φ + q G_λ‖_p^p` with `G_λ` evaluated analytically at each node.
pub fn state_lp_p(state: &DecomposedState, p: f64) -> Result<f64> {
    if !(p >= 2.0) {
        return Err(domain(format!("Lp norm needs p >= 2, got {p}")));
    }
    let u = state.full_values();
    Ok(state.grid().lp_p_values(&u, p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::{green, green_diff_grad_l2_sq};

    fn grid(radius: f64) -> Arc<RadialGrid> {
        build_grid(radius, DEFAULT_NODES, 1e-7 * radius).unwrap()
    }

    #[test]
    fn rejects_bad_configuration() {
        assert!(build_grid(1.0, 8, 1e-8).is_err());
        assert!(build_grid(1.0, 100, 2.0).is_err());
        assert!(build_grid(1.0, 100, 1e-3).is_err());
        assert!(build_grid(-1.0, 100, 1e-8).is_err());
    }

    #[test]
    fn nodes_and_weights_well_formed() {
        let g = grid(5.0);
        assert!(g.nodes().windows(2).all(|w| w[1] > w[0]));
        assert!(g.weights().iter().all(|&w| w > 0.0));
        assert_eq!(*g.nodes().last().unwrap(), 5.0);
    }

    #[test]
    fn unit_integral_is_disk_area() {
        for radius in [1.0, 7.5, 40.0] {
            let g = grid(radius);
            let area = integrate(&g.sample(|_| 1.0));
            let exact = PI * radius * radius;
            assert!(((area - exact) / exact).abs() < 1e-10, "{area} vs {exact}");
        }
    }

    #[test]
    fn gaussian_integral() {
        let g = grid(20.0);
        let v = integrate(&g.sample(|r| (-r * r).exp()));
        assert!((v - PI).abs() < 1e-8, "{v}");
    }

    #[test]
    fn log_cubed_integral_converges() {
        // |log(r/2)|³ on the unit disk: finite and stable under refinement
        let f = |r: f64| (r / 2.0).ln().abs().powi(3);
        let coarse = build_grid(1.0, 2048, 1e-7).unwrap();
        let fine = coarse.refined().unwrap();
        let a = integrate(&coarse.sample(f));
        let b = integrate(&fine.sample(f));
        assert!(a.is_finite() && a > 0.0);
        assert!(((a - b) / b).abs() < 1e-6, "{a} vs {b}");
    }

    #[test]
    fn grad_sq_cases() {
        let g = grid(20.0);
        assert_eq!(grad_sq(&g.sample(|_| 3.0)).unwrap(), 0.0);
        // ∫ r² e^{−r²} 2πr dr = π
        let v = grad_sq(&g.sample(|r| (-0.5 * r * r).exp())).unwrap();
        assert!((v - PI).abs() < 1e-4, "{v}");
        let g = grid(40.0);
        let d = grad_sq(&g.sample(|r| green(1.0, r) - green(4.0, r))).unwrap();
        let exact = green_diff_grad_l2_sq(1.0, 4.0).unwrap();
        assert!(((d - exact) / exact).abs() < 1e-4, "{d} vs {exact}");
    }

    #[test]
    fn laplacian_cases() {
        let g = grid(3.0);
        let lap = radial_laplacian(&g.sample(|r| r * r)).unwrap();
        let n = g.len();
        for i in 1..n - 1 {
            assert!((lap.field.values()[i] - 4.0).abs() < 1e-8);
        }
        let lap = radial_laplacian(&g.sample(|_| 2.5)).unwrap();
        assert!(lap.field.values()[1..n - 1].iter().all(|v| v.abs() < 1e-6));
        assert_eq!(lap.extrapolated, [0, n - 1]);
    }

    #[test]
    fn laplacian_of_green_difference() {
        // −Δ(G₁ − G₂) = 2G₂ − G₁, i.e. Δ(G₁ − G₂) = G₁ − 2G₂
        let g = grid(20.0);
        let f = g.sample(|r| green(1.0, r) - green(2.0, r));
        let lap = radial_laplacian(&f).unwrap();
        // below r ~ 1e-3 the second differences of f drop toward the rounding
        // level of the K₀ values it is built from
        for (i, &r) in g.nodes().iter().enumerate().skip(1).take(g.len() - 2) {
            if r < 1e-3 {
                continue;
            }
            if r > 15.0 {
                break;
            }
            let expected = green(1.0, r) - 2.0 * green(2.0, r);
            let got = lap.field.values()[i];
            assert!(
                (got - expected).abs() <= 1e-3 * expected.abs().max(1e-3),
                "r = {r}: {got} vs {expected}"
            );
        }
    }

    #[test]
    fn discrete_integration_by_parts() {
        let g = grid(10.0);
        let f = g.sample(|r| (-r * r).exp() * (1.0 + 0.3 * r));
        let lap = radial_laplacian(&f).unwrap();
        let n = g.len();
        let lhs: f64 = (1..n - 1)
            .map(|i| -lap.field.values()[i] * f.values()[i] * g.weights()[i])
            .sum();
        let rhs = grad_sq(&f).unwrap();
        assert!(((lhs - rhs) / rhs).abs() < 1e-3, "{lhs} vs {rhs}");
    }

    #[test]
    fn origin_extrapolation_of_smooth_field() {
        let g = grid(5.0);
        let f = g.sample(|r| 2.0 - r * r);
        assert!((f.origin_value() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn refinement_is_grid_independent() {
        let coarse = grid(20.0);
        let fine = coarse.refined().unwrap();
        let fs: [fn(f64) -> f64; 3] = [
            |r| (-r * r).exp(),
            |r| green(1.0, r).powi(3),
            |r| green(2.0, r) * (-0.5 * r * r).exp(),
        ];
        for f in fs {
            let a = integrate(&coarse.sample(f));
            let b = integrate(&fine.sample(f));
            assert!(((a - b) / b).abs() < 1e-6, "{a} vs {b}");
        }
    }

    #[test]
    fn lp_gradient_matches_finite_differences() {
        let g = build_grid(10.0, 64, 1e-6).unwrap();
        let u: Vec<f64> = g
            .nodes()
            .iter()
            .map(|&r| green(1.0, r) + (-r).exp())
            .collect();
        let mut grad = vec![0.0; u.len()];
        let base = g.lp_p_values_grad(&u, 3.0, &mut grad);
        assert!((base - g.lp_p_values(&u, 3.0)).abs() < 1e-12 * base);
        for i in [0usize, 1, 2, 30, 63] {
            let h = 1e-6 * u[i].abs().max(1e-3);
            let mut up = u.clone();
            up[i] += h;
            let mut dn = u.clone();
            dn[i] -= h;
            let fd = (g.lp_p_values(&up, 3.0) - g.lp_p_values(&dn, 3.0)) / (2.0 * h);
            let rounding = 1e-14 * base / h;
            assert!(
                (fd - grad[i]).abs() <= 1e-6 * grad[i].abs() + rounding,
                "{i}: {fd} vs {}",
                grad[i]
            );
        }
    }

    #[test]
    fn inner_log_model_derivatives() {
        let g = build_grid(10.0, 64, 1e-6).unwrap();
        for (u0, u1) in [(2.3, 2.25), (0.4, 0.41), (-0.3, 0.2)] {
            let mut d = [0.0; 2];
            let base = g.inner_log_model(u0, u1, 3.0, Some(&mut d));
            assert!(base > 0.0);
            let h = 1e-5;
            let fd0 = (g.inner_log_model(u0 + h, u1, 3.0, None)
                - g.inner_log_model(u0 - h, u1, 3.0, None))
                / (2.0 * h);
            let fd1 = (g.inner_log_model(u0, u1 + h, 3.0, None)
                - g.inner_log_model(u0, u1 - h, 3.0, None))
                / (2.0 * h);
            assert!((fd0 - d[0]).abs() < 1e-6 * d[0].abs());
            assert!((fd1 - d[1]).abs() < 1e-6 * d[1].abs());
        }
    }

    #[test]
    fn shifted_solve_inverts_operator() {
        let g = build_grid(10.0, 200, 1e-6).unwrap();
        let x: Vec<f64> = g
            .nodes()
            .iter()
            .map(|&r| (-r).exp() + 0.1 * r.sin())
            .collect();
        let sigma = 1.7;
        let mut kx = vec![0.0; x.len()];
        g.stiffness_apply(&x, &mut kx);
        let mut rhs: Vec<f64> = kx
            .iter()
            .zip(g.weights())
            .zip(&x)
            .map(|((k, w), v)| k + sigma * w * v)
            .collect();
        let mut scratch = Vec::new();
        g.solve_shifted(sigma, &mut rhs, &mut scratch);
        for (a, b) in rhs.iter().zip(&x) {
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
    }
}
