//! Radial perturbations `k` of the right-hand side, given either by a
//! built-in analytic family or by a tabulated profile, together with the
//! metadata (`k(0)`, `k(∞)`, `Δk(0)`) that the existence criteria consume.
//!
//! Specs are written in a small argument language:
//!
//! * `gaussian-bump:c,t0,s` — `k(r) = c·exp(-(ln r - t0)²/s²)`, a bump in
//!   the cylinder variable; `k(0) = k(∞) = 0`, `Δk(0) = 0`.
//! * `rational:alpha,beta` — `k(r) = (α + β r²)/(1+r²)²`; `k(0) = α`,
//!   `k(∞) = 0`, `Δk(0) = 2N(β - 2α)`.
//! * `tabulated:<path>` — monotone-cubic interpolation of an `(r, k)` table;
//!   the metadata comes from the table header and is trusted. Outside the
//!   tabulated range `k` continues with the endpoint values.
//!
//! Only radial perturbations exist here; there is nothing non-radial to
//! reject because the language cannot express it.

use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PerturbationParseError {
    #[error("missing ':' separator in perturbation spec '{0}'")]
    MissingSeparator(String),
    #[error("unknown perturbation kind '{0}'")]
    UnknownKind(String),
    #[error("{kind} expects {expected} comma-separated parameters, got {got}")]
    WrongArity {
        kind: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("bad numeric parameter '{value}' for {kind}: {reason}")]
    BadNumber {
        kind: &'static str,
        value: String,
        reason: String,
    },
    #[error("gaussian-bump width must be positive and finite, got {0}")]
    BadWidth(f64),
    #[error("tabulated path must be non-empty")]
    EmptyPath,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TableError {
    #[error("table needs a header line '# k0=<v> kinf=<v> [laplacian0=<v>]'")]
    MissingHeader,
    #[error("malformed table header: {0}")]
    BadHeader(String),
    #[error("malformed table row {line}: {reason}")]
    BadRow { line: usize, reason: String },
    #[error("table needs at least 2 rows, got {0}")]
    TooFewRows(usize),
    #[error("table radii must be strictly increasing and nonnegative (row {line})")]
    NotIncreasing { line: usize },
    #[error("table too large ({0} rows)")]
    TooLarge(usize),
}

/// Tabulated radial profile with monotone cubic (Fritsch-Carlson)
/// interpolation. Slopes are limited so the interpolant is monotone on every
/// interval and therefore bounded by the tabulated values.
#[derive(Debug, Clone, PartialEq)]
pub struct KTable {
    r: Vec<f64>,
    k: Vec<f64>,
    slope: Vec<f64>,
    k0: f64,
    kinf: f64,
    laplacian0: Option<f64>,
}

const MAX_TABLE_ROWS: usize = 1_000_000;

impl KTable {
    /// Parse the table format: one `#` header with `k0=`, `kinf=` and
    /// optional `laplacian0=`, followed by `r,k` rows with strictly
    /// increasing nonnegative radii.
    pub fn parse(text: &str) -> Result<Self, TableError> {
        let mut lines = text.lines().enumerate();
        let header = loop {
            match lines.next() {
                None => return Err(TableError::MissingHeader),
                Some((_, l)) if l.trim().is_empty() => continue,
                Some((_, l)) => break l.trim(),
            }
        };
        let body = header
            .strip_prefix('#')
            .ok_or(TableError::MissingHeader)?
            .trim();
        let mut k0 = None;
        let mut kinf = None;
        let mut laplacian0 = None;
        for field in body.split_whitespace() {
            let parse = |v: &str| -> Result<f64, TableError> {
                let x: f64 = v
                    .parse()
                    .map_err(|e| TableError::BadHeader(format!("'{v}': {e}")))?;
                if !x.is_finite() {
                    return Err(TableError::BadHeader(format!("'{v}' is not finite")));
                }
                Ok(x)
            };
            if let Some(v) = field.strip_prefix("k0=") {
                k0 = Some(parse(v)?);
            } else if let Some(v) = field.strip_prefix("kinf=") {
                kinf = Some(parse(v)?);
            } else if let Some(v) = field.strip_prefix("laplacian0=") {
                laplacian0 = Some(parse(v)?);
            } else {
                return Err(TableError::BadHeader(format!("unrecognized field '{field}'")));
            }
        }
        let (k0, kinf) = match (k0, kinf) {
            (Some(a), Some(b)) => (a, b),
            _ => return Err(TableError::BadHeader("missing k0= or kinf=".into())),
        };

        let mut r = Vec::new();
        let mut k = Vec::new();
        for (idx, raw) in lines {
            let line = idx + 1;
            let raw = raw.trim();
            if raw.is_empty() || raw.starts_with('#') {
                continue;
            }
            if r.len() >= MAX_TABLE_ROWS {
                return Err(TableError::TooLarge(r.len() + 1));
            }
            let mut cols = raw.split(',');
            let (rs, ks) = match (cols.next(), cols.next(), cols.next()) {
                (Some(a), Some(b), None) => (a, b),
                _ => {
                    return Err(TableError::BadRow {
                        line,
                        reason: "expected exactly two comma-separated columns".into(),
                    })
                }
            };
            let rv: f64 = rs.trim().parse().map_err(|e| TableError::BadRow {
                line,
                reason: format!("r: {e}"),
            })?;
            let kv: f64 = ks.trim().parse().map_err(|e| TableError::BadRow {
                line,
                reason: format!("k: {e}"),
            })?;
            if !rv.is_finite() || !kv.is_finite() {
                return Err(TableError::BadRow {
                    line,
                    reason: "non-finite entry".into(),
                });
            }
            if rv < 0.0 || r.last().is_some_and(|&prev| rv <= prev) {
                return Err(TableError::NotIncreasing { line });
            }
            r.push(rv);
            k.push(kv);
        }
        if r.len() < 2 {
            return Err(TableError::TooFewRows(r.len()));
        }
        let slope = monotone_slopes(&r, &k);
        Ok(Self {
            r,
            k,
            slope,
            k0,
            kinf,
            laplacian0,
        })
    }

    /// Interpolated value at radius `r ≥ 0`; constant continuation outside
    /// the tabulated range.
    pub fn eval(&self, r: f64) -> f64 {
        let n = self.r.len();
        if r <= self.r[0] {
            return self.k[0];
        }
        if r >= self.r[n - 1] {
            return self.k[n - 1];
        }
        let mut i = match self.r.binary_search_by(|x| x.partial_cmp(&r).unwrap()) {
            Ok(i) => return self.k[i],
            Err(i) => i - 1,
        };
        i = i.min(n - 2);
        let h = self.r[i + 1] - self.r[i];
        let s = (r - self.r[i]) / h;
        let (y0, y1) = (self.k[i], self.k[i + 1]);
        let (d0, d1) = (self.slope[i], self.slope[i + 1]);
        // Cubic Hermite basis.
        let s2 = s * s;
        let s3 = s2 * s;
        (2.0 * s3 - 3.0 * s2 + 1.0) * y0
            + (s3 - 2.0 * s2 + s) * h * d0
            + (-2.0 * s3 + 3.0 * s2) * y1
            + (s3 - s2) * h * d1
    }

    pub fn range(&self) -> (f64, f64) {
        (self.r[0], *self.r.last().unwrap())
    }
    /// Number of table rows (always ≥ 2).
    pub fn len(&self) -> usize {
        self.r.len()
    }
    pub fn node(&self, i: usize) -> (f64, f64) {
        (self.r[i], self.k[i])
    }
}

/// Fritsch-Carlson slopes: zero at interior sign changes of the secants,
/// otherwise the arithmetic mean limited into the monotonicity region
/// (‖(α,β)‖ ≤ 3 per interval).
fn monotone_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let delta: Vec<f64> = (0..n - 1)
        .map(|i| (y[i + 1] - y[i]) / (x[i + 1] - x[i]))
        .collect();
    let mut d = vec![0.0; n];
    d[0] = delta[0];
    d[n - 1] = delta[n - 2];
    for i in 1..n - 1 {
        d[i] = if delta[i - 1] * delta[i] > 0.0 {
            0.5 * (delta[i - 1] + delta[i])
        } else {
            0.0
        };
    }
    for i in 0..n - 1 {
        if delta[i] == 0.0 {
            d[i] = 0.0;
            d[i + 1] = 0.0;
            continue;
        }
        let alpha = d[i] / delta[i];
        let beta = d[i + 1] / delta[i];
        let norm = (alpha * alpha + beta * beta).sqrt();
        if norm > 3.0 {
            let tau = 3.0 / norm;
            d[i] = tau * alpha * delta[i];
            d[i + 1] = tau * beta * delta[i];
        }
    }
    d
}

/// The analytic or tabulated shape of the perturbation.
#[derive(Debug, Clone, PartialEq)]
pub enum PerturbationKind {
    GaussianBump { amplitude: f64, center: f64, width: f64 },
    Rational { alpha: f64, beta: f64 },
    Tabulated(KTable),
}

/// A radial perturbation together with its metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationSpec {
    kind: PerturbationKind,
    k0: f64,
    kinf: f64,
    /// `Δk(0)` where known. For the rational family it depends on the space
    /// dimension, so it is stored per unit `2N`: see [`laplacian0`].
    laplacian0_raw: Laplacian0,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Laplacian0 {
    Known(f64),
    /// `2N·(β - 2α)` for the rational family; resolved once `N` is known.
    RationalCoefficient(f64),
    Unknown,
}

impl PerturbationSpec {
    pub fn gaussian_bump(
        amplitude: f64,
        center: f64,
        width: f64,
    ) -> Result<Self, PerturbationParseError> {
        if !(width.is_finite() && width > 0.0) {
            return Err(PerturbationParseError::BadWidth(width));
        }
        Ok(Self {
            kind: PerturbationKind::GaussianBump {
                amplitude,
                center,
                width,
            },
            k0: 0.0,
            kinf: 0.0,
            laplacian0_raw: Laplacian0::Known(0.0),
        })
    }

    pub fn rational(alpha: f64, beta: f64) -> Self {
        Self {
            kind: PerturbationKind::Rational { alpha, beta },
            k0: alpha,
            kinf: 0.0,
            laplacian0_raw: Laplacian0::RationalCoefficient(beta - 2.0 * alpha),
        }
    }

    pub fn tabulated(table: KTable) -> Self {
        let (k0, kinf) = (table.k0, table.kinf);
        let laplacian0_raw = match table.laplacian0 {
            Some(v) => Laplacian0::Known(v),
            None => Laplacian0::Unknown,
        };
        Self {
            kind: PerturbationKind::Tabulated(table),
            k0,
            kinf,
            laplacian0_raw,
        }
    }

    pub fn kind(&self) -> &PerturbationKind {
        &self.kind
    }
    pub fn k0(&self) -> f64 {
        self.k0
    }
    pub fn kinf(&self) -> f64 {
        self.kinf
    }

    /// `Δk(0)` for space dimension `n`, when known.
    pub fn laplacian0(&self, n: u32) -> Option<f64> {
        match self.laplacian0_raw {
            Laplacian0::Known(v) => Some(v),
            Laplacian0::RationalCoefficient(c) => Some(2.0 * n as f64 * c),
            Laplacian0::Unknown => None,
        }
    }

    /// Evaluate `k` at radius `r ≥ 0` (values at `r ≤ 0` return the `r → 0`
    /// limit).
    pub fn eval_r(&self, r: f64) -> f64 {
        if r <= 0.0 {
            return self.k0;
        }
        self.eval_log(r.ln())
    }

    /// Evaluate `k(e^t)`; stable for the whole cylinder range of `t`.
    pub fn eval_log(&self, t: f64) -> f64 {
        match &self.kind {
            PerturbationKind::GaussianBump {
                amplitude,
                center,
                width,
            } => {
                let u = (t - center) / width;
                amplitude * (-u * u).exp()
            }
            PerturbationKind::Rational { alpha, beta } => {
                if t <= 0.0 {
                    // x = r² ≤ 1
                    let x = (2.0 * t).exp();
                    (alpha + beta * x) / ((1.0 + x) * (1.0 + x))
                } else {
                    // u = r⁻² ≤ 1
                    let u = (-2.0 * t).exp();
                    (alpha * u * u + beta * u) / ((1.0 + u) * (1.0 + u))
                }
            }
            PerturbationKind::Tabulated(table) => {
                let (_, rmax) = table.range();
                if t >= rmax.max(1.0).ln() + 1.0 {
                    return table.k[table.k.len() - 1];
                }
                table.eval(t.exp())
            }
        }
    }
}

impl fmt::Display for PerturbationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PerturbationKind::GaussianBump {
                amplitude,
                center,
                width,
            } => write!(f, "gaussian-bump:{amplitude},{center},{width}"),
            PerturbationKind::Rational { alpha, beta } => write!(f, "rational:{alpha},{beta}"),
            PerturbationKind::Tabulated(_) => write!(f, "tabulated:<inline>"),
        }
    }
}

/// Result of parsing a perturbation argument: inline specs resolve
/// immediately, tabulated ones defer the file read to the caller.
#[derive(Debug, Clone, PartialEq)]
pub enum PerturbationArg {
    Inline(PerturbationSpec),
    TabulatedPath(String),
}

/// Parse the perturbation mini-language. Pure: never touches the file
/// system.
pub fn parse_arg(s: &str) -> Result<PerturbationArg, PerturbationParseError> {
    let s = s.trim();
    let (kind, rest) = s
        .split_once(':')
        .ok_or_else(|| PerturbationParseError::MissingSeparator(s.to_string()))?;
    match kind {
        "gaussian-bump" => {
            let v = parse_numbers("gaussian-bump", rest, 3)?;
            Ok(PerturbationArg::Inline(PerturbationSpec::gaussian_bump(
                v[0], v[1], v[2],
            )?))
        }
        "rational" => {
            let v = parse_numbers("rational", rest, 2)?;
            Ok(PerturbationArg::Inline(PerturbationSpec::rational(v[0], v[1])))
        }
        "tabulated" => {
            if rest.trim().is_empty() {
                return Err(PerturbationParseError::EmptyPath);
            }
            Ok(PerturbationArg::TabulatedPath(rest.trim().to_string()))
        }
        other => Err(PerturbationParseError::UnknownKind(other.to_string())),
    }
}

fn parse_numbers(
    kind: &'static str,
    rest: &str,
    expected: usize,
) -> Result<Vec<f64>, PerturbationParseError> {
    let parts: Vec<&str> = rest.split(',').collect();
    if parts.len() != expected {
        return Err(PerturbationParseError::WrongArity {
            kind,
            expected,
            got: parts.len(),
        });
    }
    parts
        .iter()
        .map(|p| {
            let v: f64 = p
                .trim()
                .parse()
                .map_err(|e: std::num::ParseFloatError| PerturbationParseError::BadNumber {
                    kind,
                    value: p.trim().to_string(),
                    reason: e.to_string(),
                })?;
            if !v.is_finite() {
                return Err(PerturbationParseError::BadNumber {
                    kind,
                    value: p.trim().to_string(),
                    reason: "not finite".into(),
                });
            }
            Ok(v)
        })
        .collect()
}

/// Which existence mechanisms the metadata of `k` certifies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExistenceMechanism {
    /// `k(0) = k(∞) = 0`: the reduced functional has equal limits at both
    /// ends, so an interior global max or min exists.
    VanishingTails,
    /// `limsup_∞ k ≤ k(0)` and `Δk(0) > 0`: the reduced functional has an
    /// interior global maximum.
    InteriorMaximum,
    /// `liminf_∞ k ≥ k(0)` and `Δk(0) < 0`: interior global minimum.
    InteriorMinimum,
}

/// Hypothesis report for a perturbation in dimension `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionsReport {
    pub k0: f64,
    pub kinf: f64,
    pub laplacian0: Option<f64>,
    pub mechanisms: Vec<ExistenceMechanism>,
}

impl ConditionsReport {
    pub fn predicts_solution(&self) -> bool {
        !self.mechanisms.is_empty()
    }
}

/// Evaluate which existence hypotheses the perturbation satisfies, from its
/// metadata alone. For the built-in families the tail limit exists, so
/// limsup and liminf both equal `k(∞)`; tabulated metadata is trusted the
/// same way.
pub fn check_conditions(spec: &PerturbationSpec, n: u32) -> ConditionsReport {
    let k0 = spec.k0();
    let kinf = spec.kinf();
    let laplacian0 = spec.laplacian0(n);
    let mut mechanisms = Vec::new();
    if k0 == 0.0 && kinf == 0.0 {
        mechanisms.push(ExistenceMechanism::VanishingTails);
    }
    if let Some(lap) = laplacian0 {
        if kinf <= k0 && lap > 0.0 {
            mechanisms.push(ExistenceMechanism::InteriorMaximum);
        }
        if kinf >= k0 && lap < 0.0 {
            mechanisms.push(ExistenceMechanism::InteriorMinimum);
        }
    }
    ConditionsReport {
        k0,
        kinf,
        laplacian0,
        mechanisms,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn parses_all_kinds() {
        match parse_arg("gaussian-bump:1,0,1").unwrap() {
            PerturbationArg::Inline(s) => {
                assert_eq!(s.k0(), 0.0);
                assert_eq!(s.kinf(), 0.0);
                assert_eq!(s.laplacian0(4), Some(0.0));
            }
            _ => panic!("expected inline"),
        }
        match parse_arg("rational:0,1").unwrap() {
            PerturbationArg::Inline(s) => {
                assert_eq!(s.k0(), 0.0);
                assert_eq!(s.laplacian0(4), Some(8.0));
            }
            _ => panic!("expected inline"),
        }
        assert_eq!(
            parse_arg("tabulated:/tmp/k.csv").unwrap(),
            PerturbationArg::TabulatedPath("/tmp/k.csv".into())
        );
    }

    #[test]
    fn parse_errors_are_specific() {
        assert!(matches!(
            parse_arg("gaussian-bump"),
            Err(PerturbationParseError::MissingSeparator(_))
        ));
        assert!(matches!(
            parse_arg("lorentzian:1,2"),
            Err(PerturbationParseError::UnknownKind(_))
        ));
        assert!(matches!(
            parse_arg("rational:1"),
            Err(PerturbationParseError::WrongArity { .. })
        ));
        assert!(matches!(
            parse_arg("rational:1,x"),
            Err(PerturbationParseError::BadNumber { .. })
        ));
        assert!(matches!(
            parse_arg("gaussian-bump:1,0,0"),
            Err(PerturbationParseError::BadWidth(_))
        ));
        assert!(matches!(
            parse_arg("tabulated:"),
            Err(PerturbationParseError::EmptyPath)
        ));
    }

    #[test]
    fn inline_kinds_round_trip_through_display() {
        for s in ["gaussian-bump:1.5,-0.25,2", "rational:0.1,-3"] {
            match parse_arg(s).unwrap() {
                PerturbationArg::Inline(spec) => {
                    let shown = spec.kind().to_string();
                    match parse_arg(&shown).unwrap() {
                        PerturbationArg::Inline(spec2) => assert_eq!(spec, spec2),
                        _ => panic!("round trip changed kind"),
                    }
                }
                _ => panic!("expected inline"),
            }
        }
    }

    #[test]
    fn gaussian_bump_is_a_cylinder_bump() {
        let s = PerturbationSpec::gaussian_bump(2.0, 1.0, 0.5).unwrap();
        assert_relative_eq!(s.eval_log(1.0), 2.0);
        assert_relative_eq!(s.eval_log(1.5), 2.0 * (-1.0f64).exp());
        assert_eq!(s.eval_r(0.0), 0.0);
        assert!(s.eval_log(40.0) < 1e-300);
    }

    #[test]
    fn rational_eval_is_stable_at_extreme_radii() {
        let s = PerturbationSpec::rational(1.0, 2.0);
        assert_relative_eq!(s.eval_r(1.0), 0.75); // (1+2)/4
        assert_relative_eq!(s.eval_r(0.0), 1.0);
        assert!(s.eval_log(400.0).abs() < 1e-300);
        assert!(s.eval_log(400.0).is_finite());
        assert_relative_eq!(s.eval_log(-400.0), 1.0);
        // k = α + (β-2α)r² + O(r⁴) near 0.
        let r: f64 = 1e-5;
        assert_relative_eq!(
            s.eval_r(r),
            1.0 + (2.0 - 2.0) * r * r,
            epsilon = 1e-9
        );
    }

    #[test]
    fn table_parses_and_interpolates() {
        let text = "# k0=0 kinf=0 laplacian0=8\n0,0\n0.5,0.2\n1,1\n2,0.5\n4,0\n";
        let table = KTable::parse(text).unwrap();
        assert_eq!(table.len(), 5);
        let spec = PerturbationSpec::tabulated(table);
        assert_eq!(spec.laplacian0(4), Some(8.0));
        assert_relative_eq!(spec.eval_r(1.0), 1.0);
        // Constant continuation outside the range.
        assert_eq!(spec.eval_r(10.0), 0.0);
        assert_eq!(spec.eval_r(0.0), 0.0);
        // Interpolation stays within the bracketing values.
        for i in 0..40 {
            let r = 0.05 + i as f64 * 0.095;
            let v = spec.eval_r(r);
            assert!((-1e-12..=1.0 + 1e-12).contains(&v), "overshoot at r={r}: {v}");
        }
    }

    #[test]
    fn constant_table_gives_constant_k() {
        let table = KTable::parse("# k0=1 kinf=1\n0,1\n1,1\n").unwrap();
        let spec = PerturbationSpec::tabulated(table);
        for t in [-30.0, -1.0, 0.0, 0.3, 5.0, 30.0] {
            assert_eq!(spec.eval_log(t), 1.0);
        }
    }

    #[test]
    fn table_rejects_malformed_input() {
        assert!(matches!(
            KTable::parse(""),
            Err(TableError::MissingHeader)
        ));
        assert!(matches!(
            KTable::parse("# k0=0 kinf=0\n0,0\n"),
            Err(TableError::TooFewRows(1))
        ));
        assert!(matches!(
            KTable::parse("# k0=0 kinf=0\n1,0\n1,1\n"),
            Err(TableError::NotIncreasing { .. })
        ));
        assert!(matches!(
            KTable::parse("# k0=0 kinf=0\n0,0\n1,zzz\n"),
            Err(TableError::BadRow { .. })
        ));
        assert!(KTable::parse("# k0=nan kinf=0\n0,0\n1,1\n").is_err());
    }

    #[test]
    fn conditions_match_the_three_reference_cases() {
        let bump = PerturbationSpec::gaussian_bump(1.0, 0.0, 1.0).unwrap();
        let r = check_conditions(&bump, 4);
        assert_eq!(r.mechanisms, vec![ExistenceMechanism::VanishingTails]);

        let grow = PerturbationSpec::rational(0.0, 1.0);
        let r = check_conditions(&grow, 4);
        assert!(r.mechanisms.contains(&ExistenceMechanism::VanishingTails));
        assert!(r.mechanisms.contains(&ExistenceMechanism::InteriorMaximum));

        // k(0)=1, k(∞)=0, Δk(0) = -4N < 0: no hypothesis applies.
        let dip = PerturbationSpec::rational(1.0, 0.0);
        let r = check_conditions(&dip, 4);
        assert!(r.mechanisms.is_empty());
        assert!(!r.predicts_solution());
    }
}
