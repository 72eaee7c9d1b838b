//! The φ-families of (α,β)-metrics `F = α φ(β/α)`, their derivatives,
//! admissibility, the theorem hypotheses and the metric-spec text format.

use std::fmt;
use std::str::FromStr;

use crate::b_independence::{integral_term, integral_term_jet};
use crate::error::{Error, Result};
use crate::jets::TaylorJet3;

/// Relative margin kept from the endpoint singularity of `sqrt(b^2 - s^2)`.
pub const ENDPOINT_MARGIN: f64 = 1e-3;

/// Default upper bound on `k` for families that may degenerate at `b = 1`.
pub const SAFE_K_MAX: f64 = 1.0 - 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MetricFamily {
    /// `φ = sqrt(c1 + 2 c2 s + c3 s^2)`, i.e. `F = sqrt(c1 α² + 2 c2 αβ + c3 β²)`.
    GeneralizedRanders { c1: f64, c2: f64, c3: f64 },
    /// `φ = c1 + c2 s + c3 s^2`, i.e. `F = c1 α + c2 β + c3 β²/α`.
    QuadraticBeta { c1: f64, c2: f64, c3: f64 },
    /// `φ = d1 sqrt(b² - s²)/b² + d2 s + d3`.
    SqrtBIndependent { d1: f64, d2: f64, d3: f64 },
    /// `φ = c1 s + c2 sqrt(b² - s²) + c3 sqrt(b² - s²) ∫_0^s e^{λt} (b² - t²)^{-3/2} dt`.
    IntegralBIndependent { c1: f64, c2: f64, c3: f64, lambda: f64 },
    /// `φ = s^{-m}`, i.e. `F = α^{m+1}/β^m`.
    GeneralizedKropina { m: f64 },
    /// `φ = (1 + s)^m`, i.e. `F = (α + β)^m / α^{m-1}`.
    PowerRanders { m: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhiDerivs {
    pub phi: f64,
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
}

impl PhiDerivs {
    pub fn as_array(&self) -> [f64; 4] {
        [self.phi, self.d1, self.d2, self.d3]
    }
}

impl MetricFamily {
    /// The family `-d1 sqrt(s² - b²)/b² + d2 s + d3`. Its radical is imaginary
    /// on `|s| < b`, so only the degenerate `d1 = 0` member is accepted (and
    /// returned as the equivalent linear member of the `sqrt(b² - s²)` family).
    pub fn sqrt_b_p1(d1: f64, d2: f64, d3: f64) -> Result<Self> {
        if d1 != 0.0 {
            return Err(Error::invalid(
                "the -d1*sqrt(s^2-b^2)/b^2 family is imaginary for |s| < b; \
                 only d1 = 0 is real on the metric's domain",
            ));
        }
        Ok(MetricFamily::SqrtBIndependent { d1, d2, d3 })
    }

    pub fn name(&self) -> &'static str {
        match self {
            MetricFamily::GeneralizedRanders { .. } => "gen-randers",
            MetricFamily::QuadraticBeta { .. } => "quadratic-beta",
            MetricFamily::SqrtBIndependent { .. } => "sqrt-b",
            MetricFamily::IntegralBIndependent { .. } => "integral",
            MetricFamily::GeneralizedKropina { .. } => "kropina",
            MetricFamily::PowerRanders { .. } => "power-randers",
        }
    }

    /// Coefficients in the order they appear in the CSV columns `c1,c2,c3`.
    pub fn coefficients(&self) -> [f64; 3] {
        match *self {
            MetricFamily::GeneralizedRanders { c1, c2, c3 }
            | MetricFamily::QuadraticBeta { c1, c2, c3 }
            | MetricFamily::IntegralBIndependent { c1, c2, c3, .. } => [c1, c2, c3],
            MetricFamily::SqrtBIndependent { d1, d2, d3 } => [d1, d2, d3],
            MetricFamily::GeneralizedKropina { m } | MetricFamily::PowerRanders { m } => {
                [m, 0.0, 0.0]
            }
        }
    }

    /// True for families whose φ contains `sqrt(b² - s²)`.
    pub fn uses_b(&self) -> bool {
        matches!(
            self,
            MetricFamily::SqrtBIndependent { .. } | MetricFamily::IntegralBIndependent { .. }
        )
    }

    /// φ affine in s: the metric is of Randers type (or Riemannian).
    pub fn is_randers_type(&self) -> bool {
        match *self {
            MetricFamily::QuadraticBeta { c3, .. } => c3 == 0.0,
            MetricFamily::GeneralizedRanders { c1, c2, c3 } => {
                c1 > 0.0 && c3 >= 0.0 && c2 * c2 == c1 * c3
            }
            MetricFamily::SqrtBIndependent { d1, .. } => d1 == 0.0,
            MetricFamily::IntegralBIndependent { c2, c3, .. } => c2 == 0.0 && c3 == 0.0,
            MetricFamily::PowerRanders { m } => m == 1.0,
            MetricFamily::GeneralizedKropina { m } => m == 0.0,
        }
    }

    /// Families for which `F` is Riemannian for every `b` (β enters only
    /// through `β²`, or not at all).
    pub fn is_riemannian(&self) -> bool {
        match *self {
            MetricFamily::GeneralizedRanders { c2, .. } => c2 == 0.0,
            MetricFamily::QuadraticBeta { c2, c3, .. } => c2 == 0.0 && c3 == 0.0,
            MetricFamily::PowerRanders { m } => m == 0.0,
            MetricFamily::GeneralizedKropina { m } => m == 0.0,
            _ => false,
        }
    }

    /// Open or closed domain check for φ at `s` given `b`.
    pub fn check_domain(&self, s: f64, b: f64) -> Result<()> {
        if !s.is_finite() {
            return Err(Error::domain(format!("non-finite s = {s}")));
        }
        match *self {
            MetricFamily::SqrtBIndependent { .. } => {
                if !(b > 0.0) || !(s.abs() < b) {
                    return Err(Error::domain(format!(
                        "sqrt(b^2 - s^2) family needs |s| < b (s = {s}, b = {b})"
                    )));
                }
            }
            MetricFamily::IntegralBIndependent { .. } => {
                if !(b > 0.0) || s.abs() > b * (1.0 - ENDPOINT_MARGIN) {
                    return Err(Error::SingularOde(format!(
                        "integral family needs |s| <= b(1 - {ENDPOINT_MARGIN}) (s = {s}, b = {b})"
                    )));
                }
            }
            MetricFamily::GeneralizedKropina { .. } => {
                if !(s > 0.0) {
                    return Err(Error::domain(format!("Kropina family needs s > 0, got {s}")));
                }
            }
            MetricFamily::PowerRanders { .. } => {
                if !(1.0 + s > 0.0) {
                    return Err(Error::domain(format!("power-Randers needs 1 + s > 0, got {s}")));
                }
            }
            MetricFamily::GeneralizedRanders { c1, c2, c3 } => {
                let radicand = c1 + 2.0 * c2 * s + c3 * s * s;
                if !(radicand > 0.0) {
                    return Err(Error::domain(format!(
                        "c1 + 2 c2 s + c3 s^2 = {radicand} at s = {s}"
                    )));
                }
            }
            MetricFamily::QuadraticBeta { .. } => {}
        }
        Ok(())
    }

    /// s-interval over which the canonical model with `‖β‖ = b` is evaluated:
    /// `[-b, b]`, pulled in by the endpoint margin where φ has a square-root
    /// singularity at `|s| = b`. Kropina needs `s > 0` and stops at `b·ε`.
    pub fn working_interval(&self, b: f64) -> (f64, f64) {
        if self.uses_b() {
            let h = b * (1.0 - ENDPOINT_MARGIN);
            (-h, h)
        } else if let MetricFamily::GeneralizedKropina { .. } = self {
            (b * ENDPOINT_MARGIN, b)
        } else {
            (-b, b)
        }
    }
}

/// φ and its first three derivatives at `s`, by closed-form differentiation.
pub fn phi_derivatives(family: &MetricFamily, s: f64, b: f64) -> Result<PhiDerivs> {
    family.check_domain(s, b)?;
    let d = match *family {
        MetricFamily::GeneralizedRanders { c1, c2, c3 } => {
            let phi = (c1 + 2.0 * c2 * s + c3 * s * s).sqrt();
            let lin = c2 + c3 * s;
            let disc = c1 * c3 - c2 * c2;
            PhiDerivs {
                phi,
                d1: lin / phi,
                d2: disc / phi.powi(3),
                d3: -3.0 * disc * lin / phi.powi(5),
            }
        }
        MetricFamily::QuadraticBeta { c1, c2, c3 } => PhiDerivs {
            phi: c1 + c2 * s + c3 * s * s,
            d1: c2 + 2.0 * c3 * s,
            d2: 2.0 * c3,
            d3: 0.0,
        },
        MetricFamily::SqrtBIndependent { d1, d2, d3 } => {
            let r = sqrt_b_derivs(s, b);
            let w = d1 / (b * b);
            PhiDerivs {
                phi: w * r[0] + d2 * s + d3,
                d1: w * r[1] + d2,
                d2: w * r[2],
                d3: w * r[3],
            }
        }
        MetricFamily::IntegralBIndependent { c1, c2, c3, lambda } => {
            let j = integral_term(lambda, b, s)?.derivs;
            let r = sqrt_b_derivs(s, b);
            // (c2 + c3 J) * r by Leibniz
            let u = [c2 + c3 * j[0], c3 * j[1], c3 * j[2], c3 * j[3]];
            PhiDerivs {
                phi: c1 * s + u[0] * r[0],
                d1: c1 + u[1] * r[0] + u[0] * r[1],
                d2: u[2] * r[0] + 2.0 * u[1] * r[1] + u[0] * r[2],
                d3: u[3] * r[0] + 3.0 * u[2] * r[1] + 3.0 * u[1] * r[2] + u[0] * r[3],
            }
        }
        MetricFamily::GeneralizedKropina { m } => {
            let p = s.powf(-m);
            PhiDerivs {
                phi: p,
                d1: -m * p / s,
                d2: m * (m + 1.0) * p / (s * s),
                d3: -m * (m + 1.0) * (m + 2.0) * p / (s * s * s),
            }
        }
        MetricFamily::PowerRanders { m } => {
            let x = 1.0 + s;
            let p = x.powf(m);
            PhiDerivs {
                phi: p,
                d1: m * p / x,
                d2: m * (m - 1.0) * p / (x * x),
                d3: m * (m - 1.0) * (m - 2.0) * p / (x * x * x),
            }
        }
    };
    let arr = d.as_array();
    if arr.iter().any(|v| !v.is_finite()) {
        return Err(Error::domain(format!(
            "{} derivatives not finite at s = {s}",
            family.name()
        )));
    }
    Ok(d)
}

/// `sqrt(b² - s²)` and its first three s-derivatives.
fn sqrt_b_derivs(s: f64, b: f64) -> [f64; 4] {
    let r2 = b * b - s * s;
    let r = r2.sqrt();
    [
        r,
        -s / r,
        -b * b / (r * r2),
        -3.0 * b * b * s / (r * r2 * r2),
    ]
}

/// φ applied to a jet `s`, built from jet arithmetic on the family's formula.
pub fn phi_jet(family: &MetricFamily, s: &TaylorJet3, b: f64) -> Result<TaylorJet3> {
    family.check_domain(s.value, b)?;
    let n = s.nvars();
    let c = |v: f64| TaylorJet3::constant(v, n);
    match *family {
        MetricFamily::GeneralizedRanders { c1, c2, c3 } => {
            (*s * *s * c3 + *s * (2.0 * c2) + c1).sqrt()
        }
        MetricFamily::QuadraticBeta { c1, c2, c3 } => Ok(*s * *s * c3 + *s * c2 + c1),
        MetricFamily::SqrtBIndependent { d1, d2, d3 } => {
            let r = (c(b * b) - *s * *s).sqrt()?;
            Ok(r * (d1 / (b * b)) + *s * d2 + d3)
        }
        MetricFamily::IntegralBIndependent { c1, c2, c3, lambda } => {
            let r = (c(b * b) - *s * *s).sqrt()?;
            let j = integral_term_jet(lambda, b, s)?;
            Ok(*s * c1 + r * (j * c3 + c2))
        }
        MetricFamily::GeneralizedKropina { m } => s.powf(-m),
        MetricFamily::PowerRanders { m } => {
            let base = *s + 1.0;
            if m.fract() == 0.0 && m.abs() <= 16.0 {
                base.pow_int(m as i32)
            } else {
                base.powf(m)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricModel {
    pub family: MetricFamily,
    /// `‖β‖_α`; in the canonical model `b = (k, 0, ..)`.
    pub k: f64,
    pub n: usize,
}

impl MetricModel {
    /// Validated model: `n ∈ {2, 3}`, `k ∈ [0, k_max]` where `k_max = 1` for
    /// the generalized Randers family and `1 - 1e-3` otherwise.
    pub fn new(family: MetricFamily, k: f64, n: usize) -> Result<Self> {
        let k_max = match family {
            MetricFamily::GeneralizedRanders { .. } => 1.0,
            _ => SAFE_K_MAX,
        };
        Self::with_k_max(family, k, n, k_max)
    }

    /// Like [`MetricModel::new`] but accepts `k = 1` for every family.
    pub fn with_unit_endpoint(family: MetricFamily, k: f64, n: usize) -> Result<Self> {
        Self::with_k_max(family, k, n, 1.0)
    }

    fn with_k_max(family: MetricFamily, k: f64, n: usize, k_max: f64) -> Result<Self> {
        if !(2..=3).contains(&n) {
            return Err(Error::invalid(format!("dimension must be 2 or 3, got {n}")));
        }
        if !(0.0..=k_max).contains(&k) {
            return Err(Error::invalid(format!(
                "k = {k} outside [0, {k_max}] for {}",
                family.name()
            )));
        }
        if family.uses_b() && k == 0.0 {
            return Err(Error::invalid(format!(
                "{} contains sqrt(b^2 - s^2) and needs k > 0",
                family.name()
            )));
        }
        Ok(MetricModel { family, k, n })
    }

    pub fn with_k(&self, k: f64) -> Result<Self> {
        Self::with_unit_endpoint(self.family, k, self.n)
    }

    pub fn with_dim(&self, n: usize) -> Result<Self> {
        Self::with_unit_endpoint(self.family, self.k, n)
    }

    pub fn phi(&self, s: f64) -> Result<PhiDerivs> {
        phi_derivatives(&self.family, s, self.k)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdmissibilityReport {
    pub min_phi: f64,
    pub min_phi_minus_s_dphi: f64,
    /// Minimum of `φ - sφ' + (b² - s²)φ''`.
    pub min_regularity: f64,
    pub admissible: bool,
}

/// Minima of the regularity triple over a uniform grid on the model's
/// working s-interval.
pub fn admissibility_report(model: &MetricModel, samples: usize) -> Result<AdmissibilityReport> {
    if samples < 2 {
        return Err(Error::invalid("admissibility needs at least 2 samples"));
    }
    let b = model.k;
    let (lo, hi) = model.family.working_interval(b);
    let mut report = AdmissibilityReport {
        min_phi: f64::INFINITY,
        min_phi_minus_s_dphi: f64::INFINITY,
        min_regularity: f64::INFINITY,
        admissible: false,
    };
    for i in 0..samples {
        let s = if i == samples - 1 {
            hi
        } else {
            lo + (hi - lo) * i as f64 / (samples - 1) as f64
        };
        let d = model.phi(s)?;
        let tangential = d.phi - s * d.d1;
        report.min_phi = report.min_phi.min(d.phi);
        report.min_phi_minus_s_dphi = report.min_phi_minus_s_dphi.min(tangential);
        report.min_regularity = report
            .min_regularity
            .min(tangential + (b * b - s * s) * d.d2);
    }
    report.admissible =
        report.min_phi > 0.0 && report.min_phi_minus_s_dphi > 0.0 && report.min_regularity > 0.0;
    Ok(report)
}

#[derive(Debug, Clone, PartialEq)]
pub struct InequalityCheck {
    pub label: &'static str,
    pub lhs: f64,
    pub rhs: f64,
    /// `true` for `lhs < rhs`, `false` for `lhs > rhs`.
    pub less_than: bool,
}

impl InequalityCheck {
    pub fn holds(&self) -> bool {
        if self.less_than {
            self.lhs < self.rhs
        } else {
            self.lhs > self.rhs
        }
    }

    /// Positive when the strict inequality holds.
    pub fn slack(&self) -> f64 {
        if self.less_than {
            self.rhs - self.lhs
        } else {
            self.lhs - self.rhs
        }
    }
}

impl fmt::Display for InequalityCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let op = if self.less_than { "<" } else { ">" };
        let neg = if self.holds() { "" } else { "!" };
        write!(f, "{}: {} {neg}{op} {}", self.label, self.lhs, self.rhs)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisReport {
    pub theorem: &'static str,
    pub checks: Vec<InequalityCheck>,
}

impl HypothesisReport {
    pub fn holds(&self) -> bool {
        self.checks.iter().all(InequalityCheck::holds)
    }
}

impl fmt::Display for HypothesisReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.checks.iter().find(|c| !c.holds()) {
            Some(bad) => write!(f, "{}: FAIL ({bad})", self.theorem),
            None => {
                let parts: Vec<String> = self.checks.iter().map(|c| c.to_string()).collect();
                write!(f, "{}: PASS ({})", self.theorem, parts.join("; "))
            }
        }
    }
}

/// `c1² > |c2 (3 c1 + c3)|` and `c2² < c1 c3`; the first failing check is
/// the one reported.
pub fn theorem1_hypothesis(c1: f64, c2: f64, c3: f64) -> HypothesisReport {
    HypothesisReport {
        theorem: "theorem1",
        checks: vec![
            InequalityCheck {
                label: "c1^2 > |c2(3c1+c3)|",
                lhs: c1 * c1,
                rhs: (c2 * (3.0 * c1 + c3)).abs(),
                less_than: false,
            },
            InequalityCheck {
                label: "c2^2 < c1*c3",
                lhs: c2 * c2,
                rhs: c1 * c3,
                less_than: true,
            },
        ],
    }
}

/// `c2² < 4 c1 c3` and `|c1| > |c3|`.
pub fn theorem2_hypothesis(c1: f64, c2: f64, c3: f64) -> HypothesisReport {
    HypothesisReport {
        theorem: "theorem2",
        checks: vec![
            InequalityCheck {
                label: "c2^2 < 4*c1*c3",
                lhs: c2 * c2,
                rhs: 4.0 * c1 * c3,
                less_than: true,
            },
            InequalityCheck {
                label: "|c1| > |c3|",
                lhs: c1.abs(),
                rhs: c3.abs(),
                less_than: false,
            },
        ],
    }
}

/// Parameters of the metric-spec text format and the equivalent CLI flags.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MetricSpec {
    pub family: Option<String>,
    pub c1: Option<f64>,
    pub c2: Option<f64>,
    pub c3: Option<f64>,
    pub d1: Option<f64>,
    pub d2: Option<f64>,
    pub d3: Option<f64>,
    pub lambda: Option<f64>,
    pub m: Option<f64>,
    pub k: Option<f64>,
    pub n: Option<usize>,
}

fn parse_number<T: FromStr>(key: &str, raw: &str, line: usize) -> Result<T> {
    raw.parse()
        .map_err(|_| Error::invalid(format!("line {line}: bad value for {key}: {raw:?}")))
}

impl MetricSpec {
    /// Parses `key = value` lines; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut spec = MetricSpec::default();
        for (idx, raw_line) in text.lines().enumerate() {
            let lineno = idx + 1;
            let line = raw_line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::invalid(format!("line {lineno}: expected key = value")))?;
            let (key, value) = (key.trim(), value.trim());
            let slot = match key {
                "family" => {
                    spec.family = Some(value.to_string());
                    continue;
                }
                "n" => {
                    spec.n = Some(parse_number(key, value, lineno)?);
                    continue;
                }
                "c1" => &mut spec.c1,
                "c2" => &mut spec.c2,
                "c3" => &mut spec.c3,
                "d1" => &mut spec.d1,
                "d2" => &mut spec.d2,
                "d3" => &mut spec.d3,
                "lambda" => &mut spec.lambda,
                "m" => &mut spec.m,
                "k" => &mut spec.k,
                other => {
                    return Err(Error::invalid(format!("line {lineno}: unknown key {other:?}")))
                }
            };
            *slot = Some(parse_number(key, value, lineno)?);
        }
        Ok(spec)
    }

    /// Fills unset fields from `other`.
    pub fn merge_missing(mut self, other: &MetricSpec) -> Self {
        self.family = self.family.or_else(|| other.family.clone());
        self.c1 = self.c1.or(other.c1);
        self.c2 = self.c2.or(other.c2);
        self.c3 = self.c3.or(other.c3);
        self.d1 = self.d1.or(other.d1);
        self.d2 = self.d2.or(other.d2);
        self.d3 = self.d3.or(other.d3);
        self.lambda = self.lambda.or(other.lambda);
        self.m = self.m.or(other.m);
        self.k = self.k.or(other.k);
        self.n = self.n.or(other.n);
        self
    }

    pub fn family(&self) -> Result<MetricFamily> {
        let name = self
            .family
            .as_deref()
            .ok_or_else(|| Error::invalid("missing family"))?;
        let need = |v: Option<f64>, key: &str| {
            v.ok_or_else(|| Error::invalid(format!("family {name} needs {key}")))
        };
        match name {
            "gen-randers" => Ok(MetricFamily::GeneralizedRanders {
                c1: need(self.c1, "c1")?,
                c2: need(self.c2, "c2")?,
                c3: need(self.c3, "c3")?,
            }),
            "quadratic-beta" => Ok(MetricFamily::QuadraticBeta {
                c1: need(self.c1, "c1")?,
                c2: need(self.c2, "c2")?,
                c3: need(self.c3, "c3")?,
            }),
            "sqrt-b" => Ok(MetricFamily::SqrtBIndependent {
                d1: need(self.d1, "d1")?,
                d2: need(self.d2, "d2")?,
                d3: need(self.d3, "d3")?,
            }),
            "sqrt-b-p1" => MetricFamily::sqrt_b_p1(
                need(self.d1, "d1")?,
                need(self.d2, "d2")?,
                need(self.d3, "d3")?,
            ),
            "integral" => Ok(MetricFamily::IntegralBIndependent {
                c1: need(self.c1, "c1")?,
                c2: need(self.c2, "c2")?,
                c3: need(self.c3, "c3")?,
                lambda: need(self.lambda, "lambda")?,
            }),
            "kropina" => Ok(MetricFamily::GeneralizedKropina { m: need(self.m, "m")? }),
            "power-randers" => Ok(MetricFamily::PowerRanders { m: need(self.m, "m")? }),
            other => Err(Error::invalid(format!("unknown family {other:?}"))),
        }
    }

    pub fn model(&self, default_k: f64, default_n: usize) -> Result<MetricModel> {
        MetricModel::new(
            self.family()?,
            self.k.unwrap_or(default_k),
            self.n.unwrap_or(default_n),
        )
    }
}
