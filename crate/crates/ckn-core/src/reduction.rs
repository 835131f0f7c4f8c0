//! Finite-dimensional reduction for radial perturbations: solve for the
//! correction `w(μ, ε)` orthogonal to the dilation tangent, build the reduced
//! functionals `Γ(μ)` and `Φ_ε(μ)`, locate interior critical points and
//! certify them as approximate solutions of the perturbed equation.
//!
//! For a radial perturbation the whole problem lives in the cylinder line:
//! the discrete system solved per `(μ, ε)` is
//!
//! ```text
//! S·(φ_μ + w) - (1+εk)·(φ_μ + w)₊^{p-1} - α·S·ξ̇_μ = 0,
//! (w, ξ̇_μ)_H = 0,
//! ```
//!
//! with `S` the stiffness matrix, `ξ̇_μ` the normalized dilation tangent and
//! `α` the Lagrange multiplier. Newton iteration from `(w, α) = (0, 0)`
//! converges quadratically for small `ε`; the certificate is the converged
//! residual. At a critical point of `Φ_ε` the multiplier vanishes — the
//! constraint manifold is natural — which is what the refinement stage
//! drives to zero and the certification checks.

use crate::closed_form::{
    energy_f0, h_curve, norm_pb_p, nu, phi1, phi1_deriv, second_moment_pb, QuadratureError,
};
use crate::grid::{sample, Grid, GridError, RadialProfile, StiffnessOperator};
use crate::params::DerivedConstants;
use crate::perturbation::PerturbationSpec;
use crate::spectral::angular_eigenvalue;
use crate::tridiag::{solve_spd, SymTridiag, TridiagLu};
use rayon::prelude::*;
use thiserror::Error;

pub use crate::perturbation::{check_conditions, ConditionsReport, ExistenceMechanism};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error("parameters are degenerate: b is within {distance:.2e} of the mode-{mode} degeneracy curve")]
    DegenerateParameters { mode: u32, distance: f64 },
    #[error("Newton iteration did not converge after {iterations} steps (last residual {last_residual:.3e})")]
    NewtonDiverged {
        iterations: u32,
        last_residual: f64,
    },
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error("perturbation spec carries no Δk(0) metadata")]
    MissingLaplacian,
}

/// Solver settings; `tol` bounds the combined Newton residual (dual norm of
/// the gradient equation plus the constraint defect).
#[derive(Debug, Clone, Copy)]
pub struct SolveSettings {
    pub tol: f64,
    pub max_iterations: u32,
}

impl Default for SolveSettings {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iterations: 40,
        }
    }
}

/// One converged reduction solve.
#[derive(Debug, Clone)]
pub struct ReductionResult {
    pub mu: f64,
    pub eps: f64,
    /// The correction `w`, orthogonal to the tangent.
    pub w: RadialProfile,
    /// Lagrange multiplier.
    pub alpha: f64,
    /// `‖w‖` in the equation norm.
    pub w_norm: f64,
    /// Dual norm of `f_ε'(z_μ+w) - α·ξ̇`: the converged system residual.
    pub grad_residual: f64,
    /// Dual norm of the full Euler-Lagrange gradient `f_ε'(z_μ+w)`.
    pub full_residual: f64,
    /// Constraint defect `(w, ξ̇)_H` at convergence.
    pub orthogonality: f64,
    /// `Φ_ε(μ) = f_ε(z_μ + w)`.
    pub phi_value: f64,
    pub newton_iters: u32,
}

impl ReductionResult {
    /// Serialize the correction `w` as profile CSV with the solve's scalar
    /// certificate in the header comments.
    pub fn profile_csv(&self) -> String {
        let extra = vec![
            format!("mu={:.16e}", self.mu),
            format!("eps={:.16e}", self.eps),
            format!("alpha={:.16e}", self.alpha),
            format!("w_norm={:.16e}", self.w_norm),
            format!("grad_residual={:.16e}", self.grad_residual),
            format!("full_residual={:.16e}", self.full_residual),
            format!("phi={:.16e}", self.phi_value),
            format!("newton_iters={}", self.newton_iters),
        ];
        crate::grid::write_profile_csv(&self.w, &extra)
    }
}

/// Ground-state profile `φ₁(t - ln μ)` sampled on the grid (the cylinder
/// representative of `z_μ`).
pub fn ground_profile(mu: f64, dc: &DerivedConstants, grid: Grid) -> RadialProfile {
    assert!(mu > 0.0, "dilation parameter must be positive");
    let shift = mu.ln();
    sample(|t| phi1(t - shift, dc), grid).expect("φ₁ is finite")
}

/// Normalized tangent `ξ̇_μ` of the dilation family: the analytic
/// `μ`-derivative `-(1/μ)·φ₁'(t - ln μ)` scaled to unit equation norm.
pub fn tangent(mu: f64, dc: &DerivedConstants, grid: Grid) -> RadialProfile {
    assert!(mu > 0.0, "dilation parameter must be positive");
    let shift = mu.ln();
    let raw = sample(|t| -phi1_deriv(t - shift, dc) / mu, grid).expect("φ₁' is finite");
    let s = StiffnessOperator::new(grid, dc.lambda_tilde);
    let h = grid.spacing();
    let sv = s.matrix().apply(raw.values());
    let norm2: f64 = dc.omega * h * dot(raw.values(), &sv);
    let norm = norm2.sqrt();
    let mut out = raw;
    for v in out.values_mut() {
        *v /= norm;
    }
    out
}

/// Perturbation functional `G(u) = (ω/p)·h·Σ k(e^{t_k})·(u_k)₊^p`
/// (weight-free in cylinder coordinates for radial `k`).
pub fn g_functional(u: &RadialProfile, k: &PerturbationSpec, dc: &DerivedConstants) -> f64 {
    let grid = u.grid();
    let h = grid.spacing();
    let sum: f64 = grid
        .nodes()
        .zip(u.values())
        .map(|(t, &v)| {
            if v > 0.0 {
                k.eval_log(t) * v.powf(dc.p)
            } else {
                0.0
            }
        })
        .sum();
    dc.omega / dc.p * h * sum
}

/// Reduced perturbation functional `Γ(μ) = G(z_μ)`.
pub fn gamma(mu: f64, k: &PerturbationSpec, dc: &DerivedConstants, grid: Grid) -> f64 {
    g_functional(&ground_profile(mu, dc, grid), k, dc)
}

/// Continuous extension `Γ(0) = k(0)·‖z₁‖ᵖ_{p,b}/p`.
pub fn gamma0(k: &PerturbationSpec, dc: &DerivedConstants) -> Result<f64, QuadratureError> {
    Ok(k.k0() * norm_pb_p(dc)? / dc.p)
}

/// Second derivative of the extension at `μ = 0`:
/// `Γ''(0) = (Δk(0)/(N·p))·∫|x|²·|x|^{-bp} z₁^p = (Δk(0)·ω/(N·p))·∫e^{2t}φ₁^p`.
pub fn gamma2_0(k: &PerturbationSpec, dc: &DerivedConstants) -> Result<f64, SolveError> {
    let lap = k.laplacian0(dc.n).ok_or(SolveError::MissingLaplacian)?;
    let moment = second_moment_pb(dc)?;
    Ok(lap * dc.omega / (dc.n as f64 * dc.p) * moment)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Closed-form degeneracy guard: refuse parameters whose `b` lies within
/// `tol` of a degeneracy curve (the linearized system is then singular on the
/// tangent complement and the reduction is meaningless).
fn degeneracy_distance(dc: &DerivedConstants) -> (u32, f64) {
    let nu0 = nu(0, dc).expect("j = 0 admissible");
    let mut best = (0u32, f64::INFINITY);
    let mut mode = 1u32;
    loop {
        let shift = dc.lambda_tilde + angular_eigenvalue(mode, dc.n) + nu0;
        let h = h_curve(mode, dc.a, dc.lambda, dc.n).derived;
        let dist = (dc.b - h).abs();
        if dist < best.1 {
            best = (mode, dist);
        }
        if shift > 0.0 {
            break;
        }
        mode += 1;
    }
    best
}

const DEGENERACY_GUARD: f64 = 1e-6;

struct Workspace<'a> {
    dc: &'a DerivedConstants,
    grid: Grid,
    stiffness: StiffnessOperator,
    phi: Vec<f64>,
    /// `S·ξ̇` (the dual representative of the normalized tangent).
    s_xi: Vec<f64>,
    /// `1 + ε·k` at the nodes.
    load: Vec<f64>,
    eps: f64,
    mu: f64,
}

impl<'a> Workspace<'a> {
    fn new(
        mu: f64,
        eps: f64,
        k: &PerturbationSpec,
        dc: &'a DerivedConstants,
        grid: Grid,
    ) -> Self {
        let stiffness = StiffnessOperator::new(grid, dc.lambda_tilde);
        let phi = ground_profile(mu, dc, grid).into_values();
        let xi = tangent(mu, dc, grid).into_values();
        let s_xi = stiffness.matrix().apply(&xi);
        let load: Vec<f64> = grid.nodes().map(|t| 1.0 + eps * k.eval_log(t)).collect();
        Self {
            dc,
            grid,
            stiffness,
            phi,
            s_xi,
            load,
            eps,
            mu,
        }
    }

    fn measure(&self) -> f64 {
        self.dc.omega * self.grid.spacing()
    }

    /// Dual (equation-space) norm of a Euclidean residual vector:
    /// `‖ρ‖_* = √(ωh·ρᵀS⁻¹ρ)`.
    fn dual_norm(&self, rho: &[f64]) -> f64 {
        let s_inv_rho = solve_spd(self.stiffness.matrix(), rho);
        (self.measure() * dot(rho, &s_inv_rho)).max(0.0).sqrt()
    }

    /// Gradient equation residual `F₁ = S·v - (1+εk)·v₊^{p-1} - α·S·ξ̇` for
    /// `v = φ_μ + w`.
    fn residual(&self, w: &[f64], alpha: f64) -> Vec<f64> {
        let n = self.grid.len();
        let v: Vec<f64> = (0..n).map(|i| self.phi[i] + w[i]).collect();
        let mut rho = self.stiffness.matrix().apply(&v);
        let pm1 = self.dc.p - 1.0;
        for i in 0..n {
            let vp = if v[i] > 0.0 { v[i].powf(pm1) } else { 0.0 };
            rho[i] -= self.load[i] * vp + alpha * self.s_xi[i];
        }
        rho
    }

    fn solve(&self, settings: SolveSettings) -> Result<ReductionResult, SolveError> {
        let n = self.grid.len();
        let measure = self.measure();
        let mut w = vec![0.0; n];
        let mut alpha = 0.0f64;
        let mut iters = 0u32;

        loop {
            let f1 = self.residual(&w, alpha);
            let f2 = measure * dot(&w, &self.s_xi);
            let grad_res = self.dual_norm(&f1);
            let combined = grad_res.max(f2.abs());
            if combined <= settings.tol {
                break;
            }
            if iters >= settings.max_iterations || !combined.is_finite() {
                return Err(SolveError::NewtonDiverged {
                    iterations: iters,
                    last_residual: combined,
                });
            }

            // Jacobian A = S - diag((1+εk)(p-1)v₊^{p-2}), bordered by the
            // tangent row/column; solved by block elimination with two
            // pivoted tridiagonal solves.
            let pm2 = self.dc.p - 2.0;
            let base = self.stiffness.matrix();
            let mut diag = base.diag.clone();
            for i in 0..n {
                let v = self.phi[i] + w[i];
                let vp = if v > 0.0 { v.powf(pm2) } else { 0.0 };
                diag[i] -= self.load[i] * (self.dc.p - 1.0) * vp;
            }
            let a = SymTridiag::new(diag, base.off.clone());
            let lu = TridiagLu::factor(&a);
            let y1 = lu.solve(&f1);
            let y2 = lu.solve(&self.s_xi);
            let denom = measure * dot(&self.s_xi, &y2);
            let dalpha = (measure * dot(&self.s_xi, &y1) - f2) / denom;
            for i in 0..n {
                w[i] += -y1[i] + dalpha * y2[i];
            }
            alpha += dalpha;
            iters += 1;
        }

        // Converged: assemble the certificate.
        let f1 = self.residual(&w, alpha);
        let f2 = measure * dot(&w, &self.s_xi);
        let grad_residual = self.dual_norm(&f1);
        let full: Vec<f64> = (0..n).map(|i| f1[i] + alpha * self.s_xi[i]).collect();
        let full_residual = self.dual_norm(&full);

        let sw = self.stiffness.matrix().apply(&w);
        let w_norm = (measure * dot(&w, &sw)).max(0.0).sqrt();

        let v: Vec<f64> = (0..n).map(|i| self.phi[i] + w[i]).collect();
        let sv = self.stiffness.matrix().apply(&v);
        let quadratic = 0.5 * measure * dot(&v, &sv);
        let potential: f64 = (0..n)
            .map(|i| {
                if v[i] > 0.0 {
                    self.load[i] * v[i].powf(self.dc.p)
                } else {
                    0.0
                }
            })
            .sum::<f64>()
            * measure
            / self.dc.p;
        let phi_value = quadratic - potential;

        Ok(ReductionResult {
            mu: self.mu,
            eps: self.eps,
            w: RadialProfile::from_values(self.grid, w).expect("length matches grid"),
            alpha,
            w_norm,
            grad_residual,
            full_residual,
            orthogonality: f2,
            phi_value,
            newton_iters: iters,
        })
    }
}

/// Solve the constrained correction problem at one `(μ, ε)`.
pub fn solve_w(
    mu: f64,
    eps: f64,
    k: &PerturbationSpec,
    dc: &DerivedConstants,
    grid: Grid,
    settings: SolveSettings,
) -> Result<ReductionResult, SolveError> {
    let (mode, distance) = degeneracy_distance(dc);
    if distance < DEGENERACY_GUARD {
        return Err(SolveError::DegenerateParameters { mode, distance });
    }
    Workspace::new(mu, eps, k, dc, grid).solve(settings)
}

/// `Φ_ε(μ) = f_ε(z_μ + w(μ, ε))`.
pub fn phi(
    mu: f64,
    eps: f64,
    k: &PerturbationSpec,
    dc: &DerivedConstants,
    grid: Grid,
    settings: SolveSettings,
) -> Result<f64, SolveError> {
    Ok(solve_w(mu, eps, k, dc, grid, settings)?.phi_value)
}

/// One row of the `μ`-sweep.
#[derive(Debug, Clone)]
pub struct PhiRow {
    pub mu: f64,
    pub outcome: Result<PhiData, SolveError>,
}

#[derive(Debug, Clone, Copy)]
pub struct PhiData {
    pub phi: f64,
    pub gamma: f64,
    pub w_norm: f64,
    pub alpha: f64,
    pub newton_iters: u32,
}

/// Log-uniform `μ` grid on `[mu_min, mu_max]`.
pub fn log_uniform_mu(mu_min: f64, mu_max: f64, points: usize) -> Vec<f64> {
    assert!(mu_min > 0.0 && mu_max > mu_min && points >= 2);
    let (lo, hi) = (mu_min.ln(), mu_max.ln());
    (0..points)
        .map(|i| (lo + (hi - lo) * i as f64 / (points - 1) as f64).exp())
        .collect()
}

/// Sweep `Φ_ε`, `Γ` and the solver certificates over a `μ` grid. Each `μ` is
/// independent; the sweep runs in parallel and rows are returned in grid
/// order. Failures are carried per row.
pub fn phi_profile(
    eps: f64,
    k: &PerturbationSpec,
    dc: &DerivedConstants,
    grid: Grid,
    mus: &[f64],
    settings: SolveSettings,
) -> Vec<PhiRow> {
    mus.par_iter()
        .map(|&mu| {
            let outcome = solve_w(mu, eps, k, dc, grid, settings).map(|r| PhiData {
                phi: r.phi_value,
                gamma: gamma(mu, k, dc, grid),
                w_norm: r.w_norm,
                alpha: r.alpha,
                newton_iters: r.newton_iters,
            });
            PhiRow { mu, outcome }
        })
        .collect()
}

/// A certified critical point of the reduced functional.
#[derive(Debug, Clone, Copy)]
pub struct CriticalPoint {
    pub mu_star: f64,
    pub phi_value: f64,
    pub full_residual: f64,
    pub alpha: f64,
    pub w_norm: f64,
    pub is_maximum: bool,
    /// `|α| ≤ 1e-8` and full residual `≤ 1e-6`.
    pub certified: bool,
}

pub const CERT_ALPHA: f64 = 1e-8;
pub const CERT_RESIDUAL: f64 = 1e-6;
/// Sweeps flatter than this multiple of the solver tolerance are reported as
/// having no interior extremum rather than producing spurious candidates.
pub const FLATNESS_FACTOR: f64 = 1e2;

/// Locate and certify interior extrema of `Φ_ε` on a log-uniform `μ` grid.
///
/// Discrete extrema are detected by sign changes of the centered differences,
/// bracketed, refined by golden-section in `ln μ` to `refine_tol`, and then
/// polished by bisection on the multiplier `α` (whose sign change is the
/// discrete criticality condition) until the certificate holds. An empty
/// result is a valid outcome: either the sweep is flat to solver precision or
/// `Φ_ε` is monotone across the window.
pub fn find_critical(
    eps: f64,
    k: &PerturbationSpec,
    dc: &DerivedConstants,
    grid: Grid,
    mus: &[f64],
    refine_tol: f64,
    settings: SolveSettings,
) -> Result<Vec<CriticalPoint>, SolveError> {
    assert!(mus.len() >= 3, "need at least 3 grid points");
    let rows = phi_profile(eps, k, dc, grid, mus, settings);
    let mut phis = Vec::with_capacity(rows.len());
    for row in &rows {
        match &row.outcome {
            Ok(d) => phis.push(d.phi),
            Err(e) => return Err(e.clone()),
        }
    }

    let spread = phis.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - phis.iter().cloned().fold(f64::INFINITY, f64::min);
    if spread < FLATNESS_FACTOR * settings.tol {
        return Ok(Vec::new());
    }

    let eval_phi = |ln_mu: f64| -> Result<f64, SolveError> {
        Ok(solve_w(ln_mu.exp(), eps, k, dc, grid, settings)?.phi_value)
    };
    let eval_alpha = |ln_mu: f64| -> Result<f64, SolveError> {
        Ok(solve_w(ln_mu.exp(), eps, k, dc, grid, settings)?.alpha)
    };

    let mut out = Vec::new();
    for i in 1..mus.len() - 1 {
        let dl = phis[i] - phis[i - 1];
        let dr = phis[i + 1] - phis[i];
        let is_max = dl > 0.0 && dr < 0.0;
        let is_min = dl < 0.0 && dr > 0.0;
        if !(is_max || is_min) {
            continue;
        }
        let mut lo = mus[i - 1].ln();
        let mut hi = mus[i + 1].ln();

        // Golden-section refinement of the extremum in ln μ.
        let inv_phi_ratio = (5f64.sqrt() - 1.0) / 2.0;
        let mut x1 = hi - inv_phi_ratio * (hi - lo);
        let mut x2 = lo + inv_phi_ratio * (hi - lo);
        let mut f1 = eval_phi(x1)?;
        let mut f2 = eval_phi(x2)?;
        while hi - lo > refine_tol {
            let keep_left = if is_max { f1 > f2 } else { f1 < f2 };
            if keep_left {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - inv_phi_ratio * (hi - lo);
                f1 = eval_phi(x1)?;
            } else {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + inv_phi_ratio * (hi - lo);
                f2 = eval_phi(x2)?;
            }
        }

        // Certification polish: α changes sign across the extremum; bisect it
        // below the certificate threshold.
        let (mut blo, mut bhi) = (mus[i - 1].ln(), mus[i + 1].ln());
        let mut alo = eval_alpha(blo)?;
        let mut mid = 0.5 * (lo + hi);
        for _ in 0..90 {
            let amid = eval_alpha(mid)?;
            if amid.abs() <= CERT_ALPHA || bhi - blo < 1e-14 {
                break;
            }
            if (amid > 0.0) == (alo > 0.0) {
                blo = mid;
                alo = amid;
            } else {
                bhi = mid;
            }
            mid = 0.5 * (blo + bhi);
        }

        let r = solve_w(mid.exp(), eps, k, dc, grid, settings)?;
        out.push(CriticalPoint {
            mu_star: r.mu,
            phi_value: r.phi_value,
            full_residual: r.full_residual,
            alpha: r.alpha,
            w_norm: r.w_norm,
            is_maximum: is_max,
            certified: r.alpha.abs() <= CERT_ALPHA && r.full_residual <= CERT_RESIDUAL,
        });
    }
    Ok(out)
}

/// Closed-form unperturbed energy, re-exported next to the functions that
/// compare against it.
pub fn unperturbed_energy(dc: &DerivedConstants) -> Result<f64, QuadratureError> {
    energy_f0(dc)
}

/// Baseline `Φ₀(μ)` of the unperturbed solve (used by expansion tests): the
/// discrete analogue of `f₀(z₁)`.
pub fn phi_baseline(
    mu: f64,
    dc: &DerivedConstants,
    grid: Grid,
    settings: SolveSettings,
) -> Result<f64, SolveError> {
    // Any spec works at ε = 0; the constant-zero rational is cheapest.
    let k = PerturbationSpec::rational(0.0, 0.0);
    phi(mu, 0.0, &k, dc, grid, settings)
}
