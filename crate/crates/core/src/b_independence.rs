//! b-independent families: the integral term of the λ family, the two ODE
//! residuals, and the scan of the Cartan norm across `‖β‖ = k`.

use crate::bruteforce::cartan_norm_nd;
use crate::error::{Error, Result};
use crate::frame::{cartan_norm_2d, XiMethod};
use crate::jets::TaylorJet3;
use crate::metric::{phi_derivatives, MetricFamily, MetricModel, PhiDerivs, ENDPOINT_MARGIN};
use crate::quadrature::integrate;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegralTerm {
    /// `J(s) = ∫₀ˢ e^{λt}(b²-t²)^{-3/2} dt` and its first three derivatives.
    pub derivs: [f64; 4],
    pub quad_error: f64,
}

pub fn integral_term(lambda: f64, b: f64, s: f64) -> Result<IntegralTerm> {
    if !lambda.is_finite() || !s.is_finite() {
        return Err(Error::invalid(format!("non-finite lambda {lambda} or s {s}")));
    }
    if !(b > 0.0) || s.abs() > b * (1.0 - ENDPOINT_MARGIN) {
        return Err(Error::SingularOde(format!(
            "integral term needs |s| <= b(1 - {ENDPOINT_MARGIN}) (s = {s}, b = {b})"
        )));
    }
    let b2 = b * b;
    let integrand = |t: f64| (lambda * t).exp() * (b2 - t * t).powf(-1.5);
    // the λ = 0 antiderivative gives |J| >= e^{-|λs|} |s| / (b² sqrt(b² - s²)),
    // so this is a relative tolerance of at most 1e-12
    let lower = (-(lambda * s).abs()).exp() * s.abs() / (b2 * (b2 - s * s).sqrt());
    let tol = (1e-12 * lower).max(f64::MIN_POSITIVE);
    let q = if s == 0.0 {
        crate::quadrature::Quadrature { value: 0.0, error: 0.0, panels: 0 }
    } else {
        integrate(integrand, 0.0, s, tol)?
    };
    let r2 = b2 - s * s;
    let r = r2.sqrt();
    let r3 = r * r2;
    let r5 = r3 * r2;
    let r7 = r5 * r2;
    let e = (lambda * s).exp();
    let derivs = [
        q.value,
        e / r3,
        e * (lambda / r3 + 3.0 * s / r5),
        e * (lambda * lambda / r3 + 6.0 * lambda * s / r5 + 3.0 / r5 + 15.0 * s * s / r7),
    ];
    if derivs.iter().any(|v| !v.is_finite()) {
        return Err(Error::NumericOverflow(format!(
            "integral term overflows at s = {s}, lambda = {lambda}"
        )));
    }
    Ok(IntegralTerm { derivs, quad_error: q.error })
}

/// `J` applied to a jet by composition with its value and derivatives.
pub fn integral_term_jet(lambda: f64, b: f64, s: &TaylorJet3) -> Result<TaylorJet3> {
    Ok(s.compose(integral_term(lambda, b, s.value)?.derivs))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegralPhi {
    pub derivs: PhiDerivs,
    /// Quadrature error propagated into φ.
    pub quad_error: f64,
}

/// `φ(s) = c1 s + (c2 + c3 J(s)) sqrt(b² - s²)` with derivatives.
pub fn integral_phi_eval(c: [f64; 3], lambda: f64, b: f64, s: f64) -> Result<IntegralPhi> {
    let fam = MetricFamily::IntegralBIndependent { c1: c[0], c2: c[1], c3: c[2], lambda };
    let derivs = phi_derivatives(&fam, s, b)?;
    let j = integral_term(lambda, b, s)?;
    Ok(IntegralPhi {
        derivs,
        quad_error: (c[2] * j.quad_error * (b * b - s * s).sqrt()).abs(),
    })
}

/// A residual together with the magnitude of the terms that produced it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Residual {
    pub value: f64,
    pub scale: f64,
}

impl Residual {
    /// `|value| <= rel * scale`.
    pub fn within(&self, rel: f64) -> bool {
        self.value.abs() <= rel * self.scale
    }
}

/// `(b² - s²)φ''' - 3sφ''`.
pub fn ode1_residual(family: &MetricFamily, s: f64, b: f64) -> Result<Residual> {
    let d = phi_derivatives(family, s, b)?;
    let a = (b * b - s * s) * d.d3;
    let c = 3.0 * s * d.d2;
    Ok(Residual { value: a - c, scale: a.abs() + c.abs() })
}

/// `φ''' - (λ + 3s/w)φ'' + (λs/w)φ' - (λ/w)φ` with `w = b² - s²`.
pub fn ode2_residual(family: &MetricFamily, s: f64, b: f64, lambda: f64) -> Result<Residual> {
    let w = b * b - s * s;
    if w.abs() < 1e-12 {
        return Err(Error::SingularOde(format!("b^2 - s^2 = {w} at s = {s}, b = {b}")));
    }
    let d = phi_derivatives(family, s, b)?;
    let terms = [
        d.d3,
        -(lambda + 3.0 * s / w) * d.d2,
        lambda * s / w * d.d1,
        -lambda / w * d.phi,
    ];
    Ok(Residual {
        value: terms.iter().sum(),
        scale: terms.iter().map(|t| t.abs()).sum(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BScanEntry {
    pub k: f64,
    pub norm_2d: f64,
    pub theta_argmax: f64,
    /// Brute-force 3-dimensional estimate, when requested.
    pub norm_3d: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BScan {
    pub family: MetricFamily,
    pub entries: Vec<BScanEntry>,
    /// `max - min` of the planar norms.
    pub deviation: f64,
    pub deviation_3d: Option<f64>,
    pub tol: f64,
    /// Decided on the planar deviation only; the brute-force values are
    /// lower bounds with sampling error far above typical tolerances.
    pub pass: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BruteForceSettings {
    pub y_samples: usize,
    pub u_samples: usize,
    pub seed: u64,
}

fn spread(values: impl Iterator<Item = f64>) -> f64 {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    });
    if lo.is_finite() {
        hi - lo
    } else {
        0.0
    }
}

pub fn b_independence_scan(
    family: &MetricFamily,
    k_list: &[f64],
    theta_samples: usize,
    tol: f64,
    brute_force: Option<BruteForceSettings>,
) -> Result<BScan> {
    if k_list.is_empty() {
        return Err(Error::invalid("k list is empty"));
    }
    if !(tol > 0.0) {
        return Err(Error::invalid(format!("tolerance must be positive, got {tol}")));
    }
    let mut entries = Vec::with_capacity(k_list.len());
    for &k in k_list {
        let m2 = MetricModel::new(*family, k, 2)?;
        let scan = cartan_norm_2d(&m2, theta_samples, XiMethod::Jet)?;
        let norm_3d = match brute_force {
            Some(bf) => {
                let m3 = MetricModel::new(*family, k, 3)?;
                Some(cartan_norm_nd(&m3, bf.y_samples, bf.u_samples, bf.seed)?.norm)
            }
            None => None,
        };
        entries.push(BScanEntry { k, norm_2d: scan.norm, theta_argmax: scan.theta_argmax, norm_3d });
    }
    let deviation = spread(entries.iter().map(|e| e.norm_2d));
    let deviation_3d = brute_force.map(|_| spread(entries.iter().filter_map(|e| e.norm_3d)));
    Ok(BScan {
        family: *family,
        entries,
        deviation,
        deviation_3d,
        tol,
        pass: deviation <= tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn integral(c: [f64; 3], lambda: f64) -> MetricFamily {
        MetricFamily::IntegralBIndependent { c1: c[0], c2: c[1], c3: c[2], lambda }
    }

    #[test]
    fn phi_at_zero_is_c2_b() {
        let p = integral_phi_eval([0.3, 1.5, 2.0], 0.7, 0.8, 0.0).unwrap();
        assert!((p.derivs.phi - 1.5 * 0.8).abs() < 1e-15);
    }

    #[test]
    fn lambda_zero_has_closed_form() {
        for s in [-0.9, -0.3, 0.1, 0.5, 0.95] {
            let j = integral_term(0.0, 1.0, s).unwrap().derivs[0];
            let exact = s / (1.0 - s * s).sqrt();
            assert!((j - exact).abs() < 1e-10, "s={s}: {j} vs {exact}");
        }
    }

    #[test]
    fn matches_fine_trapezoid() {
        let (lambda, b, s) = (1.0, 0.8, 0.5);
        let f = |t: f64| (lambda * t).exp() * (b * b - t * t).powf(-1.5);
        let n = 1_000_000;
        let h = s / n as f64;
        let mut sum = 0.5 * (f(0.0) + f(s));
        for i in 1..n {
            sum += f(i as f64 * h);
        }
        let trap = sum * h;
        let j = integral_term(lambda, b, s).unwrap().derivs[0];
        assert!((j - trap).abs() < 1e-8, "{j} vs {trap}");
    }

    #[test]
    fn derivatives_match_differences() {
        let (lambda, b, s, h) = (0.6, 0.9, 0.3, 1e-4);
        let d = integral_term(lambda, b, s).unwrap().derivs;
        let at = |x: f64| integral_term(lambda, b, x).unwrap().derivs;
        let (p, m) = (at(s + h), at(s - h));
        assert!(((p[0] - m[0]) / (2.0 * h) - d[1]).abs() < 1e-6);
        assert!(((p[1] - m[1]) / (2.0 * h) - d[2]).abs() < 1e-6);
        assert!(((p[2] - m[2]) / (2.0 * h) - d[3]).abs() < 1e-5);
    }

    #[test]
    fn rejects_endpoint() {
        assert!(matches!(integral_term(0.0, 1.0, 0.9995), Err(Error::SingularOde(_))));
    }

    #[test]
    fn integral_family_solves_second_ode() {
        for c3 in [0.0, 1.0] {
            let fam = integral([0.4, 1.0, c3], 0.8);
            for s in [-0.5, -0.1, 0.2, 0.6] {
                let r = ode2_residual(&fam, s, 0.7, 0.8).unwrap();
                assert!(r.within(1e-9), "c3={c3} s={s}: {r:?}");
            }
        }
    }

    #[test]
    fn sqrt_family_solves_first_ode() {
        let fam = MetricFamily::SqrtBIndependent { d1: 1.5, d2: 0.3, d3: 2.0 };
        for s in [-0.4, 0.0, 0.3, 0.55] {
            assert!(ode1_residual(&fam, s, 0.6).unwrap().within(1e-12));
        }
    }

    #[test]
    fn second_ode_reduces_to_first_at_lambda_zero() {
        let fam = MetricFamily::SqrtBIndependent { d1: 1.0, d2: 0.5, d3: 1.0 };
        let (s, b) = (0.25, 0.7);
        let r1 = ode1_residual(&fam, s, b).unwrap().value;
        let r2 = ode2_residual(&fam, s, b, 0.0).unwrap().value;
        assert!((r2 * (b * b - s * s) - r1).abs() < 1e-12);
        // also for a family that does not solve either equation
        let fam = MetricFamily::QuadraticBeta { c1: 1.0, c2: 0.5, c3: 0.7 };
        let r1 = ode1_residual(&fam, s, b).unwrap().value;
        let r2 = ode2_residual(&fam, s, b, 0.0).unwrap().value;
        assert!((r2 * (b * b - s * s) - r1).abs() < 1e-12);
    }

    #[test]
    fn second_ode_singular_coefficient() {
        let fam = MetricFamily::QuadraticBeta { c1: 1.0, c2: 0.5, c3: 0.7 };
        assert!(matches!(ode2_residual(&fam, 0.5, 0.5, 1.0), Err(Error::SingularOde(_))));
    }

    #[test]
    fn scan_reports_deviation() {
        let fam = MetricFamily::GeneralizedRanders { c1: 1.0, c2: 0.0, c3: 1.0 };
        let s = b_independence_scan(&fam, &[0.2, 0.5, 0.8], 256, 1e-4, None).unwrap();
        assert_eq!(s.entries.len(), 3);
        assert!(s.deviation < 1e-12);
        assert!(s.pass);
        assert!(b_independence_scan(&fam, &[], 256, 1e-4, None).is_err());
    }
}
