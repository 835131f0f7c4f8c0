//! Uniform grid in the cylinder coordinate `t = ln r`, radial profiles on it,
//! the weighted inner product, `L^p` quadrature and the tridiagonal stiffness
//! operator behind every solve.
//!
//! Conventions fixed here once and for all:
//!
//! * `t = ln r` everywhere (the potentials involved are even in `t`, so
//!   spectra are unaffected by the sign choice);
//! * profiles carry the cylinder representative `v` of `u(r) =
//!   r^{-(N-2-2a)/2} v(ln r)` at the interior nodes `t_k = -L + k·h`,
//!   `k = 1..n`, `h = 2L/(n+1)`, with implicit Dirichlet zeros at `±L`;
//! * the radial weights cancel exactly in these coordinates: the `L^p_b`
//!   norm is a plain `L^p` norm in `t` up to the factor `ω^{1/p}`, and the
//!   equation norm is `ω·∫(v'² + Λ̃ v²)`.
//!
//! The equation norm is equivalent to the plain gradient norm because the
//! endpoint (`b = a+1`) Hardy-type inequality has best constant
//! `((N-2-2a)/2)²` and the admissible `λ` stays strictly below that square;
//! the endpoint itself is outside the parameter domain and not handled.

use crate::params::DerivedConstants;
use crate::tridiag::{solve_spd, SymTridiag};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GridError {
    #[error("grid requires n ≥ 3 interior nodes (got {n})")]
    TooFewNodes { n: usize },
    #[error("grid half-width must be positive and finite (got {l})")]
    BadHalfWidth { l: f64 },
    #[error("profiles live on different grids")]
    Mismatch,
    #[error("sampled value is not finite at t = {t}")]
    NonFiniteSample { t: f64 },
    #[error("profile value count {got} does not match grid size {expected}")]
    WrongLength { expected: usize, got: usize },
    #[error("operation requires a nonzero profile")]
    ZeroProfile,
}

/// Uniform Dirichlet grid on `[-L, L]` with `n` interior nodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    l: f64,
    n: usize,
    h: f64,
}

impl Grid {
    pub const DEFAULT_L: f64 = 40.0;
    pub const DEFAULT_N: usize = 8000;

    pub fn new(l: f64, n: usize) -> Result<Self, GridError> {
        if !(l.is_finite() && l > 0.0) {
            return Err(GridError::BadHalfWidth { l });
        }
        if n < 3 {
            return Err(GridError::TooFewNodes { n });
        }
        Ok(Self {
            l,
            n,
            h: 2.0 * l / (n as f64 + 1.0),
        })
    }

    /// Default discretization: `L = 40`, `n = 8000` (`h ≈ 0.01`). Profiles
    /// decaying like `exp(-√Λ̃ |t|)` are below rounding at the boundary for
    /// `Λ̃ ≥ 0.05`; widen `L` explicitly for smaller `Λ̃`.
    pub fn default_cylinder() -> Self {
        Self::new(Self::DEFAULT_L, Self::DEFAULT_N).expect("default grid is valid")
    }

    /// Same interval with halved spacing (`n → 2n+1` keeps `h' = h/2` exact).
    pub fn refined(&self) -> Self {
        Self::new(self.l, 2 * self.n + 1).expect("refinement preserves validity")
    }

    pub fn half_width(&self) -> f64 {
        self.l
    }
    /// Number of interior nodes (always ≥ 3).
    pub fn len(&self) -> usize {
        self.n
    }
    pub fn spacing(&self) -> f64 {
        self.h
    }

    /// Interior node `t_k`, `k = 0..n` zero-based.
    pub fn node(&self, k: usize) -> f64 {
        -self.l + (k as f64 + 1.0) * self.h
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(move |k| self.node(k))
    }
}

/// A radial function sampled at the grid nodes (cylinder representative).
#[derive(Debug, Clone, PartialEq)]
pub struct RadialProfile {
    grid: Grid,
    values: Vec<f64>,
}

impl RadialProfile {
    pub fn from_values(grid: Grid, values: Vec<f64>) -> Result<Self, GridError> {
        if values.len() != grid.len() {
            return Err(GridError::WrongLength {
                expected: grid.len(),
                got: values.len(),
            });
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.len()],
        }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }
    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

/// Sample `f` at the grid nodes. Errors on the first non-finite value.
pub fn sample<F: Fn(f64) -> f64>(f: F, grid: Grid) -> Result<RadialProfile, GridError> {
    let mut values = Vec::with_capacity(grid.len());
    for t in grid.nodes() {
        let v = f(t);
        if !v.is_finite() {
            return Err(GridError::NonFiniteSample { t });
        }
        values.push(v);
    }
    Ok(RadialProfile { grid, values })
}

/// Discrete representation of the quadratic form `∫(v'² + Λ̃ v²)`:
/// symmetric tridiagonal with diagonal `2/h² + Λ̃` and off-diagonal `-1/h²`,
/// positive definite for `Λ̃ > 0`.
#[derive(Debug, Clone)]
pub struct StiffnessOperator {
    grid: Grid,
    lambda_tilde: f64,
    matrix: SymTridiag,
}

impl StiffnessOperator {
    pub fn new(grid: Grid, lambda_tilde: f64) -> Self {
        let h2 = grid.spacing() * grid.spacing();
        let matrix = SymTridiag::new(
            vec![2.0 / h2 + lambda_tilde; grid.len()],
            vec![-1.0 / h2; grid.len() - 1],
        );
        Self {
            grid,
            lambda_tilde,
            matrix,
        }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }
    pub fn lambda_tilde(&self) -> f64 {
        self.lambda_tilde
    }
    pub fn matrix(&self) -> &SymTridiag {
        &self.matrix
    }

    /// Matrix-vector product `S·u`.
    pub fn apply(&self, u: &RadialProfile) -> Result<RadialProfile, GridError> {
        if u.grid != self.grid {
            return Err(GridError::Mismatch);
        }
        Ok(RadialProfile {
            grid: self.grid,
            values: self.matrix.apply(u.values()),
        })
    }

    /// Exact tridiagonal solve `S·x = rhs` (Thomas algorithm; `S` is positive
    /// definite so no pivoting is needed).
    pub fn solve(&self, rhs: &RadialProfile) -> Result<RadialProfile, GridError> {
        if rhs.grid != self.grid {
            return Err(GridError::Mismatch);
        }
        Ok(RadialProfile {
            grid: self.grid,
            values: solve_spd(&self.matrix, rhs.values()),
        })
    }
}

/// Equation-space scalar product
/// `(u,v) = ω·Σ_k [ (u_{k+1}-u_k)(v_{k+1}-v_k)/h + Λ̃·h·u_k v_k ]`
/// (= `ω·h·uᵀSv` exactly), the discrete version of
/// `∫|x|^{-2a}∇u·∇v - λ∫uv/|x|^{2(1+a)}`.
pub fn inner_h(
    u: &RadialProfile,
    v: &RadialProfile,
    dc: &DerivedConstants,
) -> Result<f64, GridError> {
    if u.grid != v.grid {
        return Err(GridError::Mismatch);
    }
    let h = u.grid.spacing();
    let n = u.grid.len();
    let (us, vs) = (u.values(), v.values());
    // Difference part including the Dirichlet boundary segments.
    let mut grad = us[0] * vs[0] + us[n - 1] * vs[n - 1];
    for k in 0..n - 1 {
        grad += (us[k + 1] - us[k]) * (vs[k + 1] - vs[k]);
    }
    let mut mass = 0.0;
    for k in 0..n {
        mass += us[k] * vs[k];
    }
    Ok(dc.omega * (grad / h + dc.lambda_tilde * h * mass))
}

/// Equation-space norm `‖u‖ = √(u,u)`.
pub fn norm_h(u: &RadialProfile, dc: &DerivedConstants) -> Result<f64, GridError> {
    Ok(inner_h(u, u, dc)?.max(0.0).sqrt())
}

/// Weighted Lebesgue norm `‖u‖_{p,b} = (ω·h·Σ|u_k|^p)^{1/p}`: the radial
/// weight exponent `N - bp - (N-2-2a)p/2` vanishes identically, so the
/// cylinder integral carries no weight.
pub fn lp_pb(u: &RadialProfile, p: f64, dc: &DerivedConstants) -> f64 {
    assert!(p >= 1.0, "lp_pb requires p ≥ 1");
    let h = u.grid.spacing();
    let sum: f64 = u.values().iter().map(|v| v.abs().powf(p)).sum();
    (dc.omega * h * sum).powf(1.0 / p)
}

// --- CSV serialization -----------------------------------------------------

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProfileCsvError {
    #[error("missing profile header line '# L=<L> n=<n> convention=t=ln(r)'")]
    MissingHeader,
    #[error("malformed profile header: {0}")]
    BadHeader(String),
    #[error("header declares unsupported grid (L={l}, n={n})")]
    BadGrid { l: f64, n: usize },
    #[error("malformed data row {line}: {reason}")]
    BadRow { line: usize, reason: String },
    #[error("expected {expected} data rows, found {got}")]
    RowCount { expected: usize, got: usize },
    #[error("node mismatch at row {line}: file has t={got}, grid expects t={expected}")]
    NodeMismatch { line: usize, got: f64, expected: f64 },
}

const PROFILE_CONVENTION: &str = "convention=t=ln(r)";
const MAX_CSV_NODES: usize = 1 << 24;

/// Render a profile as two-column CSV with the standard header line.
pub fn write_profile_csv(profile: &RadialProfile, extra_header: &[String]) -> String {
    let grid = profile.grid();
    let mut out = String::new();
    out.push_str(&format!(
        "# L={} n={} {}\n",
        grid.half_width(),
        grid.len(),
        PROFILE_CONVENTION
    ));
    for line in extra_header {
        out.push_str(&format!("# {line}\n"));
    }
    for (t, v) in grid.nodes().zip(profile.values()) {
        out.push_str(&format!("{t:.16e},{v:.16e}\n"));
    }
    out
}

/// Parse a profile from the CSV produced by [`write_profile_csv`]. Extra `#`
/// comment lines after the grid header are skipped. The node column must be
/// consistent with the declared grid.
pub fn read_profile_csv(text: &str) -> Result<RadialProfile, ProfileCsvError> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(ProfileCsvError::MissingHeader)?;
    let header = header.trim();
    let body = header
        .strip_prefix('#')
        .ok_or(ProfileCsvError::MissingHeader)?
        .trim();
    let mut l = None;
    let mut n = None;
    let mut convention = false;
    for field in body.split_whitespace() {
        if let Some(v) = field.strip_prefix("L=") {
            l = Some(
                v.parse::<f64>()
                    .map_err(|e| ProfileCsvError::BadHeader(format!("L: {e}")))?,
            );
        } else if let Some(v) = field.strip_prefix("n=") {
            n = Some(
                v.parse::<usize>()
                    .map_err(|e| ProfileCsvError::BadHeader(format!("n: {e}")))?,
            );
        } else if field == PROFILE_CONVENTION {
            convention = true;
        } else {
            return Err(ProfileCsvError::BadHeader(format!(
                "unrecognized field '{field}'"
            )));
        }
    }
    if !convention {
        return Err(ProfileCsvError::BadHeader(
            "missing convention field".into(),
        ));
    }
    let (l, n) = match (l, n) {
        (Some(l), Some(n)) => (l, n),
        _ => return Err(ProfileCsvError::BadHeader("missing L= or n=".into())),
    };
    if n > MAX_CSV_NODES {
        return Err(ProfileCsvError::BadGrid { l, n });
    }
    let grid = Grid::new(l, n).map_err(|_| ProfileCsvError::BadGrid { l, n })?;

    let mut values = Vec::with_capacity(n.min(1 << 20));
    for (idx, raw) in lines {
        let line = idx + 1;
        let raw = raw.trim();
        if raw.is_empty() || raw.starts_with('#') {
            continue;
        }
        let mut cols = raw.split(',');
        let (ts, vs) = match (cols.next(), cols.next(), cols.next()) {
            (Some(t), Some(v), None) => (t, v),
            _ => {
                return Err(ProfileCsvError::BadRow {
                    line,
                    reason: "expected exactly two comma-separated columns".into(),
                })
            }
        };
        let t: f64 = ts.trim().parse().map_err(|e| ProfileCsvError::BadRow {
            line,
            reason: format!("t: {e}"),
        })?;
        let v: f64 = vs.trim().parse().map_err(|e| ProfileCsvError::BadRow {
            line,
            reason: format!("value: {e}"),
        })?;
        if !v.is_finite() {
            return Err(ProfileCsvError::BadRow {
                line,
                reason: "non-finite value".into(),
            });
        }
        if values.len() >= n {
            return Err(ProfileCsvError::RowCount {
                expected: n,
                got: values.len() + 1,
            });
        }
        let expected = grid.node(values.len());
        if (t - expected).abs() > 1e-8 * grid.half_width().max(1.0) {
            return Err(ProfileCsvError::NodeMismatch {
                line,
                got: t,
                expected,
            });
        }
        values.push(v);
    }
    if values.len() != n {
        return Err(ProfileCsvError::RowCount {
            expected: n,
            got: values.len(),
        });
    }
    Ok(RadialProfile { grid, values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closed_form::{norm_pb_p, phi1};
    use crate::params::{derive, validate, ProblemParams};
    use approx::assert_relative_eq;

    fn base_dc() -> DerivedConstants {
        derive(&validate(ProblemParams::new(4, 0.0, 0.0, 0.0)).unwrap())
    }

    #[test]
    fn spacing_definition() {
        let g = Grid::new(40.0, 7999).unwrap();
        assert_relative_eq!(g.spacing(), 0.01, max_relative = 1e-14);
        assert_relative_eq!(g.node(0), -40.0 + 0.01, max_relative = 1e-12);
        assert_relative_eq!(g.node(7998), 40.0 - 0.01, max_relative = 1e-12);
    }

    #[test]
    fn sample_zero_and_positivity() {
        let g = Grid::new(10.0, 99).unwrap();
        let zero = sample(|_| 0.0, g).unwrap();
        assert!(zero.values().iter().all(|&v| v == 0.0));

        let dc = base_dc();
        let phi = sample(|t| phi1(t, &dc), g).unwrap();
        assert!(phi.values().iter().all(|&v| v > 0.0));
        // Maximum at the node nearest t = 0.
        let (imax, _) = phi
            .values()
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap();
        let tmax = g.node(imax);
        assert!(tmax.abs() <= 0.5 * g.spacing() + 1e-12);
    }

    #[test]
    fn sample_rejects_non_finite() {
        let g = Grid::new(5.0, 33).unwrap();
        let err = sample(|_| f64::NAN, g).unwrap_err();
        assert!(matches!(err, GridError::NonFiniteSample { .. }));
        // n odd puts a node exactly at t = 0, where 1/t blows up.
        let err = sample(|t| 1.0 / t, g).unwrap_err();
        assert!(matches!(err, GridError::NonFiniteSample { .. }));
    }

    #[test]
    fn inner_h_is_symmetric_and_linear() {
        let dc = base_dc();
        let g = Grid::new(20.0, 400).unwrap();
        let u = sample(|t| (0.3 * t).sin() * (-t * t / 30.0).exp(), g).unwrap();
        let v = sample(|t| (0.7 * t).cos() * (-t * t / 20.0).exp(), g).unwrap();
        let uv = inner_h(&u, &v, &dc).unwrap();
        let vu = inner_h(&v, &u, &dc).unwrap();
        assert_eq!(uv, vu);
        let zero = RadialProfile::zeros(g);
        assert_eq!(inner_h(&u, &zero, &dc).unwrap(), 0.0);
    }

    #[test]
    fn inner_h_rejects_grid_mismatch() {
        let dc = base_dc();
        let u = RadialProfile::zeros(Grid::new(20.0, 400).unwrap());
        let v = RadialProfile::zeros(Grid::new(20.0, 401).unwrap());
        assert!(matches!(
            inner_h(&u, &v, &dc),
            Err(GridError::Mismatch)
        ));
    }

    #[test]
    fn critical_point_identity_on_default_grid() {
        // ‖z₁‖² = ∫|x|^{-bp} z₁^p: the discrete gradient part carries the
        // O(h²) finite-difference error, so the match is at quadrature
        // accuracy, not rounding.
        let dc = base_dc();
        let g = Grid::default_cylinder();
        let phi = sample(|t| phi1(t, &dc), g).unwrap();
        let lhs = inner_h(&phi, &phi, &dc).unwrap();
        let rhs = norm_pb_p(&dc).unwrap();
        assert_relative_eq!(lhs, rhs, max_relative = 1e-4);
        assert_relative_eq!(rhs, 32.0 * std::f64::consts::PI.powi(2) / 3.0, max_relative = 1e-9);
    }

    #[test]
    fn inner_h_converges_second_order() {
        let dc = base_dc();
        let exact = norm_pb_p(&dc).unwrap();
        let mut errs = Vec::new();
        for n in [1999usize, 3999, 7999] {
            let g = Grid::new(40.0, n).unwrap();
            let phi = sample(|t| phi1(t, &dc), g).unwrap();
            errs.push((inner_h(&phi, &phi, &dc).unwrap() - exact).abs());
        }
        for w in errs.windows(2) {
            let ratio = w[0] / w[1];
            assert!(
                (3.4..=4.6).contains(&ratio),
                "halving h gave error ratio {ratio}, errors {errs:?}"
            );
        }
    }

    #[test]
    fn truncation_negligible_beyond_l30() {
        let dc = base_dc();
        let g30 = Grid::new(30.0, 5999).unwrap();
        let g40 = Grid::new(40.0, 7999).unwrap();
        let v30 = {
            let p = sample(|t| phi1(t, &dc), g30).unwrap();
            inner_h(&p, &p, &dc).unwrap()
        };
        let v40 = {
            let p = sample(|t| phi1(t, &dc), g40).unwrap();
            inner_h(&p, &p, &dc).unwrap()
        };
        assert!((v30 - v40).abs() <= 1e-12 * v40);
    }

    #[test]
    fn lp_pb_base_value_and_homogeneity() {
        let dc = base_dc();
        let g = Grid::default_cylinder();
        let phi = sample(|t| phi1(t, &dc), g).unwrap();
        let lp = lp_pb(&phi, dc.p, &dc);
        assert_relative_eq!(
            lp.powf(dc.p),
            32.0 * std::f64::consts::PI.powi(2) / 3.0,
            max_relative = 1e-9
        );
        let scaled = sample(|t| -2.5 * phi1(t, &dc), g).unwrap();
        assert_relative_eq!(lp_pb(&scaled, dc.p, &dc), 2.5 * lp, max_relative = 1e-13);
    }

    #[test]
    fn lp_pb_shift_invariance() {
        let dc = base_dc();
        let g = Grid::default_cylinder();
        let phi = sample(|t| phi1(t, &dc), g).unwrap();
        let shifted = sample(|t| phi1(t - 15.0, &dc), g).unwrap();
        assert_relative_eq!(
            lp_pb(&shifted, dc.p, &dc),
            lp_pb(&phi, dc.p, &dc),
            max_relative = 1e-10
        );
    }

    #[test]
    fn stiffness_round_trip() {
        let dc = base_dc();
        let g = Grid::new(25.0, 1200).unwrap();
        let s = StiffnessOperator::new(g, dc.lambda_tilde);
        let zero = RadialProfile::zeros(g);
        assert!(s.apply(&zero).unwrap().values().iter().all(|&v| v == 0.0));

        let u = sample(|t| (1.3 * t).sin() * (-0.1 * t * t).exp() + 0.2, g).unwrap();
        let au = s.apply(&u).unwrap();
        let back = s.solve(&au).unwrap();
        for (x, y) in u.values().iter().zip(back.values()) {
            assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn stiffness_discrete_sine_eigenrelation() {
        // v_k = sin(mπk/(n+1)) is an exact eigenvector of the discrete
        // operator with eigenvalue (2/h²)(1-cos(mπ/(n+1))) + Λ̃.
        let dc = base_dc();
        let g = Grid::new(12.0, 500).unwrap();
        let n = g.len() as f64;
        let s = StiffnessOperator::new(g, dc.lambda_tilde);
        for m in [1usize, 3, 17] {
            let v = sample(
                |t| (m as f64 * std::f64::consts::PI * (t + g.half_width()) / (2.0 * g.half_width())).sin(),
                g,
            )
            .unwrap();
            let av = s.apply(&v).unwrap();
            let expected = 2.0 / g.spacing().powi(2)
                * (1.0 - (m as f64 * std::f64::consts::PI / (n + 1.0)).cos())
                + dc.lambda_tilde;
            for (x, y) in av.values().iter().zip(v.values()) {
                assert!((x - expected * y).abs() <= 1e-8 * expected.max(1.0));
            }
        }
    }

    #[test]
    fn discrete_ckn_inequality() {
        // lp_pb(u)² ≤ C·inner_h(u,u) with C the quotient of the radial
        // minimizer (plus slack): random nonnegative profiles never beat φ₁.
        use rand::{Rng, SeedableRng};
        let dc = base_dc();
        let g = Grid::default_cylinder();
        let phi = sample(|t| phi1(t, &dc), g).unwrap();
        let c_best = lp_pb(&phi, dc.p, &dc).powi(2) / inner_h(&phi, &phi, &dc).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..25 {
            let centers: Vec<f64> = (0..3).map(|_| rng.gen_range(-5.0..5.0)).collect();
            let widths: Vec<f64> = (0..3).map(|_| rng.gen_range(0.5..3.0)).collect();
            let amps: Vec<f64> = (0..3).map(|_| rng.gen_range(0.1..2.0)).collect();
            let u = sample(
                |t| {
                    (0..3)
                        .map(|i| amps[i] * (-((t - centers[i]) / widths[i]).powi(2)).exp())
                        .sum::<f64>()
                },
                g,
            )
            .unwrap();
            let quotient = lp_pb(&u, dc.p, &dc).powi(2) / inner_h(&u, &u, &dc).unwrap();
            assert!(
                quotient <= c_best * (1.0 + 1e-6),
                "random profile beats the radial extremal: {quotient} > {c_best}"
            );
        }
    }

    #[test]
    fn profile_csv_round_trip() {
        let dc = base_dc();
        let g = Grid::new(8.0, 63).unwrap();
        let u = sample(|t| phi1(t, &dc) * (0.3 * t).cos(), g).unwrap();
        let text = write_profile_csv(&u, &["extra=1".into()]);
        assert!(text.starts_with("# L=8 n=63 convention=t=ln(r)\n"));
        let back = read_profile_csv(&text).unwrap();
        assert_eq!(back.grid(), g);
        for (x, y) in u.values().iter().zip(back.values()) {
            assert_eq!(x, y, "17-significant-digit round trip must be exact");
        }
    }

    #[test]
    fn profile_csv_rejects_malformed_input() {
        assert!(matches!(
            read_profile_csv(""),
            Err(ProfileCsvError::MissingHeader)
        ));
        assert!(matches!(
            read_profile_csv("L=8 n=63\n"),
            Err(ProfileCsvError::MissingHeader)
        ));
        assert!(read_profile_csv("# L=8 n=63 convention=t=ln(r)\n1,2,3\n").is_err());
        assert!(read_profile_csv("# L=8 n=3 convention=t=ln(r)\n").is_err());
        // Wrong node column.
        let bad = "# L=8 n=3 convention=t=ln(r)\n0,1\n0,1\n0,1\n";
        assert!(matches!(
            read_profile_csv(bad),
            Err(ProfileCsvError::NodeMismatch { .. })
        ));
    }
}
