//! Spectrum of the linearized operator around the ground state, one
//! spherical-harmonic mode at a time, and the resulting non-degeneracy and
//! symmetry-breaking decisions.
//!
//! In the cylinder variable the linearization decouples into line operators
//!
//! ```text
//! L_i = -d²/dt² + (Λ̃ + i(N+i-2)) - (p-1)·φ₁(t)^{p-2},    i = 0, 1, 2, …
//! ```
//!
//! and `(p-1)·φ₁^{p-2} = β·sech²(γt)` identically, so each `L_i` is a shifted
//! sech²-well operator with explicitly known negative spectrum `ν_j`. The
//! code never uses that explicit spectrum for its decisions: eigenvalues are
//! computed from the discretized operators by Sturm bisection and compared
//! against the closed forms as a cross-check, which is what arbitrates the
//! two transcriptions of the degeneracy curves in
//! [`closed_form::h_curve`](crate::closed_form::h_curve).
//!
//! Mode `i = 0` always carries a one-dimensional kernel (the tangent of the
//! dilation family); degeneracy means a kernel in some mode `i ≥ 1`. Mode
//! eigenvalues are reported after one `h → h/2` grid refinement with
//! Richardson extrapolation of the O(h²) discretization error, which is what
//! separates true kernels (extrapolating to 0) from near-kernels
//! (extrapolating to a nonzero limit).

use crate::closed_form::{bound_state_count, nu, phi1_log};
use crate::grid::{inner_h, lp_pb, Grid, GridError, RadialProfile};
use crate::params::{derive, validate, DerivedConstants, ParamError, ProblemParams};
use crate::tridiag::SymTridiag;

/// Discretized mode operator `L_i`, symmetric tridiagonal.
#[derive(Debug, Clone)]
pub struct ModeOperator {
    mode: u32,
    grid: Grid,
    dc: DerivedConstants,
    matrix: SymTridiag,
}

impl ModeOperator {
    pub fn new(mode: u32, grid: Grid, dc: &DerivedConstants) -> Self {
        let h2 = grid.spacing() * grid.spacing();
        let shift = dc.lambda_tilde + angular_eigenvalue(mode, dc.n);
        let diag: Vec<f64> = grid
            .nodes()
            .map(|t| 2.0 / h2 + shift - ((dc.p - 2.0) * phi1_log(t, dc)).exp() * (dc.p - 1.0))
            .collect();
        let off = vec![-1.0 / h2; grid.len() - 1];
        Self {
            mode,
            grid,
            dc: *dc,
            matrix: SymTridiag::new(diag, off),
        }
    }

    pub fn mode(&self) -> u32 {
        self.mode
    }
    pub fn grid(&self) -> Grid {
        self.grid
    }
    pub fn derived(&self) -> &DerivedConstants {
        &self.dc
    }
    pub fn matrix(&self) -> &SymTridiag {
        &self.matrix
    }
}

/// Laplace-Beltrami eigenvalue `i(N+i-2)` of the `i`-th spherical harmonic.
pub fn angular_eigenvalue(mode: u32, n: u32) -> f64 {
    let i = mode as f64;
    i * (n as f64 + i - 2.0)
}

/// Pure sech²-well operator `-d²/dt² - β·sech²(γt)` on the grid.
pub fn pt_operator(grid: Grid, dc: &DerivedConstants) -> SymTridiag {
    let h2 = grid.spacing() * grid.spacing();
    let diag: Vec<f64> = grid
        .nodes()
        .map(|t| {
            let c = (dc.gamma * t).cosh();
            2.0 / h2 - dc.beta / (c * c)
        })
        .collect();
    SymTridiag::new(diag, vec![-1.0 / h2; grid.len() - 1])
}

const EIGEN_TOL: f64 = 1e-10;

/// The `count` smallest eigenvalues of a mode operator, ascending, by
/// Sturm-sequence bisection to absolute tolerance 1e-10. Raw values of the
/// given discretization (no extrapolation).
pub fn eigen_lowest(op: &ModeOperator, count: usize) -> Vec<f64> {
    op.matrix.lowest_eigenvalues(count, EIGEN_TOL)
}

/// Lowest eigenvalues after one grid refinement: solves on `grid` and on the
/// halved-step grid, then removes the O(h²) error by Richardson
/// extrapolation `(4·e_{h/2} - e_h)/3`.
fn lowest_extrapolated<F>(build: F, grid: Grid, count: usize) -> Vec<f64>
where
    F: Fn(Grid) -> SymTridiag,
{
    let coarse = build(grid).lowest_eigenvalues(count, EIGEN_TOL);
    let fine = build(grid.refined()).lowest_eigenvalues(count, EIGEN_TOL);
    coarse
        .iter()
        .zip(&fine)
        .map(|(c, f)| (4.0 * f - c) / 3.0)
        .collect()
}

/// Extrapolated lowest eigenvalues of the mode-`i` operator.
pub fn mode_eigenvalues(mode: u32, grid: Grid, dc: &DerivedConstants, count: usize) -> Vec<f64> {
    lowest_extrapolated(|g| ModeOperator::new(mode, g, dc).matrix().clone(), grid, count)
}

/// Comparison of the numerically computed sech²-well spectrum against the
/// closed-form `ν_j`.
#[derive(Debug, Clone)]
pub struct PtSpectrumReport {
    /// Closed-form `ν_j`, ascending in `j`.
    pub expected: Vec<f64>,
    /// Extrapolated eigenvalues of the discretized operator.
    pub computed: Vec<f64>,
    pub max_abs_error: f64,
    /// Max of `|computed - ν_j| / max(1, |ν_j|)`.
    pub max_scaled_error: f64,
    /// All consecutive gaps exceed 1e-8 (numerical simplicity check).
    pub simple: bool,
    /// Eigenvalues below `-1e-8` of the refined discretization.
    pub negative_count: usize,
    pub negative_count_matches: bool,
}

/// Compare the discretized sech²-well spectrum with every admissible `ν_j`.
pub fn pt_spectrum_check(dc: &DerivedConstants, grid: Grid) -> PtSpectrumReport {
    let count = bound_state_count(dc);
    let expected: Vec<f64> = (0..count as u32).map(|j| nu(j, dc).unwrap()).collect();
    let computed = lowest_extrapolated(|g| pt_operator(g, dc), grid, count);
    let mut max_abs = 0.0f64;
    let mut max_scaled = 0.0f64;
    for (c, e) in computed.iter().zip(&expected) {
        let d = (c - e).abs();
        max_abs = max_abs.max(d);
        max_scaled = max_scaled.max(d / e.abs().max(1.0));
    }
    let simple = computed.windows(2).all(|w| w[1] - w[0] > 1e-8);
    let negative_count = pt_operator(grid.refined(), dc).count_below(-1e-8);
    PtSpectrumReport {
        expected,
        computed,
        max_abs_error: max_abs,
        max_scaled_error: max_scaled,
        simple,
        negative_count,
        negative_count_matches: negative_count == count,
    }
}

/// Per-mode kernel margin.
#[derive(Debug, Clone, Copy)]
pub struct ModeMargin {
    pub mode: u32,
    /// Smallest |eigenvalue| of the mode operator (extrapolated).
    pub min_abs_eigenvalue: f64,
}

/// Outcome of the non-degeneracy decision.
#[derive(Debug, Clone)]
pub struct NondegeneracyReport {
    /// True iff every mode `i ≥ 1` keeps all eigenvalues away from zero and
    /// mode 0 has a one-dimensional kernel.
    pub verdict: bool,
    /// Mode 0 has exactly one eigenvalue within tolerance of zero (the
    /// dilation tangent).
    pub mode0_kernel_dimension_ok: bool,
    /// Margins for modes `1..=i_max`.
    pub margins: Vec<ModeMargin>,
    /// Largest mode that can possibly touch zero; all larger modes are
    /// positive definite because `Λ̃ + i(N+i-2) + ν₀ > 0`.
    pub i_max: u32,
    pub kernel_tolerance: f64,
}

/// Kernel tolerance used by the degeneracy decisions.
pub fn kernel_tolerance(dc: &DerivedConstants) -> f64 {
    1e-6 * dc.lambda_tilde.max(1.0)
}

/// Decide non-degeneracy of the critical manifold at the given parameters by
/// sweeping the finitely many modes whose operators are not obviously
/// positive.
pub fn nondegenerate(dc: &DerivedConstants, grid: Grid) -> NondegeneracyReport {
    let tol = kernel_tolerance(dc);
    let nu0 = nu(0, dc).expect("j = 0 is always admissible");
    let mut i_max = 1u32;
    while dc.lambda_tilde + angular_eigenvalue(i_max, dc.n) + nu0 <= 0.0 {
        i_max += 1;
    }
    let count = bound_state_count(dc) + 1;

    let mode0 = mode_eigenvalues(0, grid, dc, count + 1);
    let near_zero = mode0.iter().filter(|e| e.abs() <= tol).count();
    let mode0_ok = near_zero == 1;

    let margins: Vec<ModeMargin> = (1..=i_max)
        .map(|mode| {
            let eigs = mode_eigenvalues(mode, grid, dc, count);
            let min_abs = eigs.iter().fold(f64::INFINITY, |m, e| m.min(e.abs()));
            ModeMargin {
                mode,
                min_abs_eigenvalue: min_abs,
            }
        })
        .collect();

    let verdict = mode0_ok && margins.iter().all(|m| m.min_abs_eigenvalue > tol);
    NondegeneracyReport {
        verdict,
        mode0_kernel_dimension_ok: mode0_ok,
        margins,
        i_max,
        kernel_tolerance: tol,
    }
}

/// Symmetry-breaking test at `λ = 0`.
#[derive(Debug, Clone, Copy)]
pub struct SymmetryBreakingReport {
    /// The bottom of the mode-1 spectrum is negative: the radial extremal is
    /// a saddle of the quotient and the minimizer is non-radial.
    pub breaks: bool,
    /// Lowest eigenvalue of the mode-1 operator (extrapolated).
    pub mode1_bottom: f64,
}

/// Sign test on the mode-1 linearization at `(a, b, λ=0)`. Equivalent to the
/// closed-form criterion `b < h₁(a, 0)`, but computed from the operator.
pub fn symmetry_breaking(a: f64, b: f64, n: u32, grid: Grid) -> Result<SymmetryBreakingReport, ParamError> {
    let dc = derive(&validate(ProblemParams::new(n, a, b, 0.0))?);
    let bottom = mode_eigenvalues(1, grid, &dc, 1)[0];
    Ok(SymmetryBreakingReport {
        breaks: bottom < -kernel_tolerance(&dc),
        mode1_bottom: bottom,
    })
}

/// Rayleigh quotient `I(u) = ‖u‖² / ‖u‖²_{p,b}` of the radial quotient whose
/// extremal is `φ₁`.
pub fn rayleigh(u: &RadialProfile, dc: &DerivedConstants) -> Result<f64, GridError> {
    let denom = lp_pb(u, dc.p, dc);
    if denom == 0.0 {
        return Err(GridError::ZeroProfile);
    }
    Ok(inner_h(u, u, dc)? / (denom * denom))
}
