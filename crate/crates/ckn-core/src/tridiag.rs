//! Symmetric tridiagonal kernels: Sturm-sequence bisection for eigenvalues,
//! a Thomas solve for positive definite systems, and a partially pivoted LU
//! solve for indefinite ones.
//!
//! These are the only linear-algebra primitives the crate needs; everything
//! downstream (mode spectra, Newton steps of the reduction) is tridiagonal by
//! construction. All routines are deterministic.

/// Symmetric tridiagonal matrix: main diagonal `diag[0..n]`, sub/super
/// diagonal `off[0..n-1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiag {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl SymTridiag {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Self {
        assert_eq!(off.len() + 1, diag.len(), "off-diagonal length mismatch");
        Self { diag, off }
    }

    pub fn n(&self) -> usize {
        self.diag.len()
    }

    /// Matrix-vector product.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n();
        assert_eq!(x.len(), n);
        let mut y = vec![0.0; n];
        for i in 0..n {
            let mut v = self.diag[i] * x[i];
            if i > 0 {
                v += self.off[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                v += self.off[i] * x[i + 1];
            }
            y[i] = v;
        }
        y
    }

    /// Number of eigenvalues strictly below `x`, by counting negative pivots
    /// of the LDLᵀ factorization of `A - xI` (Sturm sequence).
    pub fn count_below(&self, x: f64) -> usize {
        let n = self.n();
        let guard = 1e-300;
        let mut count = 0usize;
        let mut q = self.diag[0] - x;
        if q < 0.0 {
            count += 1;
        }
        for i in 1..n {
            let q_safe = if q.abs() < guard {
                if q >= 0.0 {
                    guard
                } else {
                    -guard
                }
            } else {
                q
            };
            q = (self.diag[i] - x) - self.off[i - 1] * self.off[i - 1] / q_safe;
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// Gershgorin interval containing the whole spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.n();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let left = if i > 0 { self.off[i - 1].abs() } else { 0.0 };
            let right = if i + 1 < n { self.off[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - left - right);
            hi = hi.max(self.diag[i] + left + right);
        }
        (lo - 1.0, hi + 1.0)
    }

    /// The `count` smallest eigenvalues in ascending order, each located by
    /// bisection on the Sturm count to absolute tolerance `tol`.
    pub fn lowest_eigenvalues(&self, count: usize, tol: f64) -> Vec<f64> {
        let count = count.min(self.n());
        let (glo, ghi) = self.gershgorin();
        let mut out = Vec::with_capacity(count);
        for k in 0..count {
            let mut lo = if k == 0 { glo } else { out[k - 1] - tol };
            let mut hi = ghi;
            // ~60 halvings of an O(1/h²) interval reach 1e-10 comfortably.
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if hi - lo < tol.max(4.0 * f64::EPSILON * mid.abs()) {
                    break;
                }
                if self.count_below(mid) <= k {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            out.push(0.5 * (lo + hi));
        }
        out
    }

    /// Eigenvector for an eigenvalue estimate `eig`, by inverse iteration with
    /// a slightly shifted, partially pivoted LU solve. Returns the vector
    /// normalized to Euclidean length 1.
    pub fn eigenvector(&self, eig: f64) -> Vec<f64> {
        let n = self.n();
        let shift = eig - 1e-8 * (1.0 + eig.abs());
        let shifted = SymTridiag::new(
            self.diag.iter().map(|d| d - shift).collect(),
            self.off.clone(),
        );
        let lu = TridiagLu::factor(&shifted);
        let mut v = vec![1.0; n];
        // A deterministic mild asymmetry avoids starting orthogonal to the
        // target eigenvector.
        for (i, vi) in v.iter_mut().enumerate() {
            *vi += 1e-3 * ((i % 7) as f64 - 3.0);
        }
        normalize(&mut v);
        for _ in 0..6 {
            let mut w = lu.solve(&v);
            normalize(&mut w);
            v = w;
        }
        v
    }

    /// Rayleigh quotient `xᵀAx / xᵀx`.
    pub fn rayleigh_quotient(&self, x: &[f64]) -> f64 {
        let ax = self.apply(x);
        let num: f64 = x.iter().zip(&ax).map(|(a, b)| a * b).sum();
        let den: f64 = x.iter().map(|a| a * a).sum();
        num / den
    }
}

fn normalize(v: &mut [f64]) {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        for x in v.iter_mut() {
            *x /= norm;
        }
    }
}

/// Thomas solve for a symmetric positive definite tridiagonal system.
/// No pivoting; definiteness makes the elimination stable.
pub fn solve_spd(m: &SymTridiag, rhs: &[f64]) -> Vec<f64> {
    let n = m.n();
    assert_eq!(rhs.len(), n);
    let mut c = vec![0.0; n]; // modified super-diagonal
    let mut d = vec![0.0; n]; // modified rhs
    c[0] = if n > 1 { m.off[0] / m.diag[0] } else { 0.0 };
    d[0] = rhs[0] / m.diag[0];
    for i in 1..n {
        let denom = m.diag[i] - m.off[i - 1] * c[i - 1];
        if i + 1 < n {
            c[i] = m.off[i] / denom;
        }
        d[i] = (rhs[i] - m.off[i - 1] * d[i - 1]) / denom;
    }
    let mut x = d;
    for i in (0..n - 1).rev() {
        x[i] -= c[i] * x[i + 1];
    }
    x
}

/// LU factorization of a tridiagonal matrix with partial pivoting. Row swaps
/// introduce one extra super-diagonal of fill-in, so the factors fit in four
/// bands. Handles the indefinite Jacobians of the reduction's Newton steps.
pub struct TridiagLu {
    n: usize,
    low: Vec<f64>,  // multipliers
    d0: Vec<f64>,   // main diagonal of U
    d1: Vec<f64>,   // first super-diagonal of U
    d2: Vec<f64>,   // second super-diagonal of U (fill-in)
    swap: Vec<bool>,
}

impl TridiagLu {
    pub fn factor(m: &SymTridiag) -> Self {
        let n = m.n();
        let mut d0 = m.diag.clone();
        let mut d1 = vec![0.0; n];
        let mut d2 = vec![0.0; n];
        let mut sub = vec![0.0; n];
        for i in 0..n - 1 {
            d1[i] = m.off[i];
            sub[i + 1] = m.off[i];
        }
        let mut low = vec![0.0; n];
        let mut swap = vec![false; n];
        for i in 0..n - 1 {
            if sub[i + 1].abs() > d0[i].abs() {
                swap[i] = true;
                std::mem::swap(&mut d0[i], &mut sub[i + 1]);
                // After the row swap the pivot row holds the sub-row entries.
                let t1 = d1[i];
                d1[i] = d0[i + 1];
                d0[i + 1] = t1;
                if i + 2 < n {
                    d2[i] = d1[i + 1];
                    d1[i + 1] = 0.0;
                }
            }
            let pivot = if d0[i] == 0.0 { 1e-300 } else { d0[i] };
            let l = sub[i + 1] / pivot;
            low[i + 1] = l;
            d0[i + 1] -= l * d1[i];
            if i + 2 < n {
                d1[i + 1] -= l * d2[i];
            }
        }
        Self {
            n,
            low,
            d0,
            d1,
            d2,
            swap,
        }
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = self.n;
        assert_eq!(rhs.len(), n);
        let mut y = rhs.to_vec();
        for i in 0..n - 1 {
            if self.swap[i] {
                y.swap(i, i + 1);
            }
            y[i + 1] -= self.low[i + 1] * y[i];
        }
        let mut x = y;
        for i in (0..n).rev() {
            let mut v = x[i];
            if i + 1 < n {
                v -= self.d1[i] * x[i + 1];
            }
            if i + 2 < n {
                v -= self.d2[i] * x[i + 2];
            }
            let pivot = if self.d0[i] == 0.0 { 1e-300 } else { self.d0[i] };
            x[i] = v / pivot;
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sturm_count_2x2() {
        // [[1,-1],[-1,3]] has eigenvalues 2 ± √2.
        let m = SymTridiag::new(vec![1.0, 3.0], vec![-1.0]);
        assert_eq!(m.count_below(0.0), 0);
        assert_eq!(m.count_below(1.0), 1);
        assert_eq!(m.count_below(4.0), 2);
    }

    #[test]
    fn chain_eigenvalues_match_closed_form() {
        // Free chain d=2, e=-1: eigenvalues 2 - 2cos(kπ/(n+1)).
        let n = 64;
        let m = SymTridiag::new(vec![2.0; n], vec![-1.0; n - 1]);
        let evs = m.lowest_eigenvalues(5, 1e-12);
        for (k, ev) in evs.iter().enumerate() {
            let exact = 2.0 - 2.0 * ((k + 1) as f64 * std::f64::consts::PI / (n as f64 + 1.0)).cos();
            assert!((ev - exact).abs() < 1e-10, "k={k}: {ev} vs {exact}");
        }
    }

    #[test]
    fn eigenvector_rayleigh_matches_eigenvalue() {
        let n = 200;
        let diag: Vec<f64> = (0..n).map(|i| 2.0 + 0.01 * (i as f64).sin()).collect();
        let m = SymTridiag::new(diag, vec![-1.0; n - 1]);
        let ev = m.lowest_eigenvalues(1, 1e-12)[0];
        let v = m.eigenvector(ev);
        assert!((m.rayleigh_quotient(&v) - ev).abs() < 1e-10);
    }

    #[test]
    fn spd_solve_round_trip() {
        let n = 500;
        let m = SymTridiag::new(vec![2.5; n], vec![-1.0; n - 1]);
        let x: Vec<f64> = (0..n).map(|i| ((i * 37 % 113) as f64 - 56.0) / 29.0).collect();
        let b = m.apply(&x);
        let x2 = solve_spd(&m, &b);
        for (u, v) in x.iter().zip(&x2) {
            assert!((u - v).abs() < 1e-10);
        }
    }

    #[test]
    fn pivoted_lu_solves_indefinite_systems() {
        let n = 300;
        // Strongly indefinite diagonal.
        let diag: Vec<f64> = (0..n)
            .map(|i| if i % 3 == 0 { -1.7 } else { 2.3 } + 0.05 * (i as f64 * 0.7).cos())
            .collect();
        let off: Vec<f64> = (0..n - 1).map(|i| -1.0 + 0.1 * (i as f64 * 0.3).sin()).collect();
        let m = SymTridiag::new(diag, off);
        let x: Vec<f64> = (0..n).map(|i| ((i * 53 % 97) as f64 - 48.0) / 17.0).collect();
        let b = m.apply(&x);
        let lu = TridiagLu::factor(&m);
        let x2 = lu.solve(&b);
        let err = x
            .iter()
            .zip(&x2)
            .map(|(u, v)| (u - v).abs())
            .fold(0.0f64, f64::max);
        assert!(err < 1e-9, "max err {err}");
    }
}
