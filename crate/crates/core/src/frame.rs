//! Two-dimensional Berwald frames, the torsion functional ξ and the
//! Cartan-norm maximization over the direction angle θ.
//!
//! In the canonical plane model `y = (cos θ, sin θ)` and `β = k y¹`. The
//! normal `y⊥` satisfies `g_y(y, y⊥) = 0` and `g_y(y⊥, y⊥) = F(y)²`; its sign
//! is fixed so that `(y, y⊥)` is positively oriented, which makes the second
//! component positive at `θ = 0`.

use std::f64::consts::PI;
use std::fmt;

use crate::error::{Error, Result};
use crate::metric::{MetricFamily, MetricModel, ENDPOINT_MARGIN};
use crate::optimize::grid_then_golden;
use crate::tensors::{bilinear, flag_tensors, mat_vec, trilinear, FlagTensors};

/// Default grid density on `[0, π]`.
pub const DEFAULT_THETA_SAMPLES: usize = 4096;
/// Golden-section stopping width in θ.
pub const THETA_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frame2D {
    pub theta: f64,
    pub y: [f64; 2],
    pub y_perp: [f64; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum XiMethod {
    Jet,
    ClosedForm,
}

impl fmt::Display for XiMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            XiMethod::Jet => "jet",
            XiMethod::ClosedForm => "closed_form",
        })
    }
}

impl std::str::FromStr for XiMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "jet" => Ok(XiMethod::Jet),
            "closed_form" | "closed-form" => Ok(XiMethod::ClosedForm),
            other => Err(Error::invalid(format!("unknown method {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameScan {
    pub model: MetricModel,
    pub theta_grid: Vec<f64>,
    pub xi_values: Vec<f64>,
    /// Grid maximum before refinement.
    pub grid_max: f64,
    pub norm: f64,
    pub theta_argmax: f64,
    pub method: XiMethod,
}

fn require_plane(model: &MetricModel) -> Result<()> {
    if model.n != 2 {
        return Err(Error::invalid(format!(
            "Berwald frame needs a 2-dimensional model, got n = {}",
            model.n
        )));
    }
    Ok(())
}

fn frame_from_tensors(t: &FlagTensors, theta: f64) -> Result<Frame2D> {
    let gy = mat_vec(&t.g, &t.y, 2);
    let yp = [-gy[1], gy[0], 0.0];
    let nyp = bilinear(&t.g, &yp, &yp, 2);
    let ny = t.f * t.f;
    if !(nyp > 0.0) || !(ny > 0.0) {
        return Err(Error::DegenerateFrame {
            theta,
            detail: format!("normalization radicand ny/nyp = {ny}/{nyp}"),
        });
    }
    let lambda = (nyp / ny).sqrt();
    Ok(Frame2D {
        theta,
        y: [t.y[0], t.y[1]],
        y_perp: [yp[0] / lambda, yp[1] / lambda],
    })
}

fn unit_direction(theta: f64) -> [f64; 2] {
    [theta.cos(), theta.sin()]
}

pub fn berwald_perp(model: &MetricModel, theta: f64) -> Result<Frame2D> {
    require_plane(model)?;
    let t = flag_tensors(model, &unit_direction(theta))?;
    frame_from_tensors(&t, theta)
}

/// ξ at θ from the jet pipeline.
pub fn xi_numeric(model: &MetricModel, theta: f64) -> Result<f64> {
    require_plane(model)?;
    let t = flag_tensors(model, &unit_direction(theta))?;
    let fr = frame_from_tensors(&t, theta)?;
    let p = [fr.y_perp[0], fr.y_perp[1], 0.0];
    let c = trilinear(&t.c, &p, &p, &p, 2);
    let gpp = bilinear(&t.g, &p, &p, 2);
    Ok(t.f * c.abs() / gpp.powf(1.5))
}

/// The two φ-families with closed-form frames and torsion functionals.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TheoremFamily {
    /// `sqrt(c1 α² + 2 c2 αβ + c3 β²)`
    GeneralizedRanders,
    /// `c1 α + c2 β + c3 β²/α`
    QuadraticBeta,
}

impl TheoremFamily {
    pub fn of(family: &MetricFamily) -> Result<(Self, [f64; 3])> {
        match *family {
            MetricFamily::GeneralizedRanders { c1, c2, c3 } => {
                Ok((TheoremFamily::GeneralizedRanders, [c1, c2, c3]))
            }
            MetricFamily::QuadraticBeta { c1, c2, c3 } => {
                Ok((TheoremFamily::QuadraticBeta, [c1, c2, c3]))
            }
            other => Err(Error::UnsupportedFamily(other.name().to_string())),
        }
    }
}

/// `f(k,x) = c1c3k² + c2c3k³x³ + 3c2²k²x² + 3c1c2kx - c2²k² + c1²`
pub fn gr_f(c: [f64; 3], k: f64, x: f64) -> f64 {
    let [c1, c2, c3] = c;
    c1 * c3 * k * k + c2 * c3 * k.powi(3) * x.powi(3) + 3.0 * c2 * c2 * k * k * x * x
        + 3.0 * c1 * c2 * k * x
        - c2 * c2 * k * k
        + c1 * c1
}

/// `f1(k,x) = 3c3k²x² - 2c3k² - c1`
pub fn qb_f1(c: [f64; 3], k: f64, x: f64) -> f64 {
    let [c1, _, c3] = c;
    3.0 * c3 * k * k * x * x - 2.0 * c3 * k * k - c1
}

/// `f2(k,x) = c1 + c2kx + c3k²x²`
pub fn qb_f2(c: [f64; 3], k: f64, x: f64) -> f64 {
    let [c1, c2, c3] = c;
    c1 + c2 * k * x + c3 * k * k * x * x
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FgValues {
    GeneralizedRanders { f: f64, g: Option<f64> },
    QuadraticBeta { f1: f64, f2: f64, g: Option<f64> },
}

impl FgValues {
    pub fn g(&self) -> Option<f64> {
        match *self {
            FgValues::GeneralizedRanders { g, .. } | FgValues::QuadraticBeta { g, .. } => g,
        }
    }
}

/// The auxiliary polynomials and the reduced torsion function `g(k, x)`,
/// `x = cos θ`. `g` is `None` where its radicand is not positive.
pub fn fg_polynomials(kind: TheoremFamily, c: [f64; 3], k: f64, x: f64) -> FgValues {
    let [c1, c2, c3] = c;
    let sin = (1.0 - x * x).max(0.0).sqrt();
    match kind {
        TheoremFamily::GeneralizedRanders => {
            let f = gr_f(c, k, x);
            let g = (f > 0.0).then(|| {
                let q = c1 + 2.0 * c2 * k * x + c3 * k * k * x * x;
                1.5 * c2 * k * sin * q * q / f.powf(1.5)
            });
            FgValues::GeneralizedRanders { f, g }
        }
        TheoremFamily::QuadraticBeta => {
            let f1 = qb_f1(c, k, x);
            let f2 = qb_f2(c, k, x);
            let rad = -f1 * f2;
            let g = (rad > 0.0 && f1 != 0.0).then(|| {
                let num = -c1 * c2 - 4.0 * k.powi(3) * c3 * c3 * x
                    + 8.0 * c3 * c3 * k.powi(3) * x.powi(3)
                    - 2.0 * k * k * c2 * c3
                    + 5.0 * c2 * c3 * k * k * x * x;
                1.5 * k * sin * num / (f1 * rad.sqrt())
            });
            FgValues::QuadraticBeta { f1, f2, g }
        }
    }
}

/// Closed-form `y⊥` at radius 1.
///
/// The quadratic-β frame uses `(c1 - c3k²cos²θ)` in the first component; the
/// variant with `cos θ` to the first power does not satisfy the frame
/// conditions.
pub fn closed_form_perp(model: &MetricModel, theta: f64) -> Result<[f64; 2]> {
    let (kind, [c1, c2, c3]) = TheoremFamily::of(&model.family)?;
    let k = model.k;
    let (cs, sn) = (theta.cos(), theta.sin());
    let degenerate = |detail: String| Error::DegenerateFrame { theta, detail };
    match kind {
        TheoremFamily::GeneralizedRanders => {
            let f = gr_f([c1, c2, c3], k, cs);
            if !(f > 0.0) {
                return Err(degenerate(format!("f(k, cos θ) = {f}")));
            }
            let d = f.sqrt();
            Ok([
                -sn * (c2 * k * cs + c1) / d,
                (c3 * k * k * cs + c2 * k + c1 * cs + c2 * k * cs * cs) / d,
            ])
        }
        TheoremFamily::QuadraticBeta => {
            let rad = (-3.0 * k * k * c3 * cs * cs + 2.0 * k * k * c3 + c1)
                * (k * k * c3 * cs * cs + k * c2 * cs + c1);
            if !(rad > 0.0) {
                return Err(degenerate(format!("frame radicand {rad}")));
            }
            let d = rad.sqrt();
            Ok([
                -sn * (c1 - c3 * k * k * cs * cs) / d,
                (c1 * cs + k * c2 + 2.0 * c3 * k * k * cs - c3 * k * k * cs.powi(3)) / d,
            ])
        }
    }
}

/// ξ at θ from the closed-form expressions for the two theorem families.
pub fn closed_form_xi(model: &MetricModel, theta: f64) -> Result<f64> {
    let (kind, c) = TheoremFamily::of(&model.family)?;
    match fg_polynomials(kind, c, model.k, theta.cos()) {
        FgValues::GeneralizedRanders { f, g } => g.map(f64::abs).ok_or(Error::DegenerateFrame {
            theta,
            detail: format!("f(k, cos θ) = {f}"),
        }),
        FgValues::QuadraticBeta { f1, f2, g } => {
            // sin θ enters through |sin θ|; the reduced g uses sqrt(1 - x²)
            g.map(f64::abs).ok_or(Error::DegenerateFrame {
                theta,
                detail: format!("f1 = {f1}, f2 = {f2}"),
            })
        }
    }
}

/// θ-window on which ξ is sampled. The full half-circle `[0, π]` suffices by
/// the reflection symmetry `ξ(θ) = ξ(2π - θ)`; families singular at `|s| = b`
/// or at `s = 0` are kept away from those directions.
pub fn theta_window(model: &MetricModel) -> (f64, f64) {
    match model.family {
        f if f.uses_b() => {
            let t0 = (1.0 - ENDPOINT_MARGIN).acos();
            (t0, PI - t0)
        }
        MetricFamily::GeneralizedKropina { .. } => (0.0, ENDPOINT_MARGIN.acos()),
        _ => (0.0, PI),
    }
}

pub fn xi(model: &MetricModel, theta: f64, method: XiMethod) -> Result<f64> {
    match method {
        XiMethod::Jet => xi_numeric(model, theta),
        XiMethod::ClosedForm => closed_form_xi(model, theta),
    }
}

/// Cartan norm of the plane model: ξ on `theta_samples` uniform intervals of
/// the θ-window, then golden-section refinement around the best grid point.
pub fn cartan_norm_2d(
    model: &MetricModel,
    theta_samples: usize,
    method: XiMethod,
) -> Result<FrameScan> {
    require_plane(model)?;
    if theta_samples < 64 {
        return Err(Error::invalid(format!(
            "theta_samples must be at least 64, got {theta_samples}"
        )));
    }
    if method == XiMethod::ClosedForm {
        TheoremFamily::of(&model.family)?;
    }
    let (lo, hi) = theta_window(model);
    let g = grid_then_golden(|t| xi(model, t, method), lo, hi, theta_samples, THETA_TOL)?;
    Ok(FrameScan {
        model: *model,
        grid_max: g.values[g.argmax_index],
        theta_grid: g.xs,
        xi_values: g.values,
        norm: g.f_max,
        theta_argmax: g.x_max,
        method,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Certificate {
    pub k: f64,
    pub x: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PositivityReport {
    GeneralizedRanders {
        min_f: Certificate,
    },
    QuadraticBeta {
        min_f1: Certificate,
        max_f1: Certificate,
        min_f2: Certificate,
        max_f2: Certificate,
    },
}

impl PositivityReport {
    /// Theorem-1 style certificate: `f > 0` on the whole box.
    pub fn f_positive(&self) -> Option<bool> {
        match self {
            PositivityReport::GeneralizedRanders { min_f } => Some(min_f.value > 0.0),
            _ => None,
        }
    }

    /// Theorem-2 style certificate: `f1` has one strict sign, `f2` never vanishes.
    pub fn sign_analysis(&self) -> Option<(bool, bool)> {
        match self {
            PositivityReport::QuadraticBeta {
                min_f1,
                max_f1,
                min_f2,
                max_f2,
            } => Some((
                min_f1.value > 0.0 || max_f1.value < 0.0,
                min_f2.value > 0.0 || max_f2.value < 0.0,
            )),
            _ => None,
        }
    }
}

/// Pattern search for a minimum of `f` on `[0,1] x [-1,1]` starting at `start`.
fn refine_min(f: &impl Fn(f64, f64) -> f64, start: Certificate, step: (f64, f64)) -> Certificate {
    let mut best = start;
    let (mut hk, mut hx) = step;
    while hk > 1e-14 || hx > 1e-14 {
        let mut moved = false;
        for (dk, dx) in [(hk, 0.0), (-hk, 0.0), (0.0, hx), (0.0, -hx)] {
            let k = (best.k + dk).clamp(0.0, 1.0);
            let x = (best.x + dx).clamp(-1.0, 1.0);
            let v = f(k, x);
            if v < best.value {
                best = Certificate { k, x, value: v };
                moved = true;
            }
        }
        if !moved {
            hk *= 0.5;
            hx *= 0.5;
        }
    }
    best
}

fn scan_min(f: impl Fn(f64, f64) -> f64, nk: usize, nx: usize) -> Certificate {
    let mut best = Certificate {
        k: 0.0,
        x: -1.0,
        value: f64::INFINITY,
    };
    for i in 0..=nk {
        let k = i as f64 / nk as f64;
        for j in 0..=nx {
            let x = -1.0 + 2.0 * j as f64 / nx as f64;
            let v = f(k, x);
            if v < best.value {
                best = Certificate { k, x, value: v };
            }
        }
    }
    refine_min(&f, best, (1.0 / nk as f64, 2.0 / nx as f64))
}

/// Grid extrema of the auxiliary polynomials over `[0,1] x [-1,1]` with
/// `grid.0 x grid.1` intervals, each refined by pattern search.
pub fn positivity_scan(kind: TheoremFamily, c: [f64; 3], grid: (usize, usize)) -> Result<PositivityReport> {
    let (nk, nx) = grid;
    if nk == 0 || nx == 0 {
        return Err(Error::invalid("positivity grid needs at least one interval per axis"));
    }
    let negate = |mut cert: Certificate| {
        cert.value = -cert.value;
        cert
    };
    Ok(match kind {
        TheoremFamily::GeneralizedRanders => PositivityReport::GeneralizedRanders {
            min_f: scan_min(|k, x| gr_f(c, k, x), nk, nx),
        },
        TheoremFamily::QuadraticBeta => PositivityReport::QuadraticBeta {
            min_f1: scan_min(|k, x| qb_f1(c, k, x), nk, nx),
            max_f1: negate(scan_min(|k, x| -qb_f1(c, k, x), nk, nx)),
            min_f2: scan_min(|k, x| qb_f2(c, k, x), nk, nx),
            max_f2: negate(scan_min(|k, x| -qb_f2(c, k, x), nk, nx)),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model(fam: MetricFamily, k: f64) -> MetricModel {
        MetricModel::new(fam, k, 2).unwrap()
    }

    fn gr(c1: f64, c2: f64, c3: f64) -> MetricFamily {
        MetricFamily::GeneralizedRanders { c1, c2, c3 }
    }

    fn qb(c1: f64, c2: f64, c3: f64) -> MetricFamily {
        MetricFamily::QuadraticBeta { c1, c2, c3 }
    }

    #[test]
    fn riemannian_frame_is_euclidean_perpendicular() {
        let m = model(gr(4.0, 0.0, 1.0), 0.5);
        let fr = berwald_perp(&m, 0.0).unwrap();
        // F(1,0) = sqrt(4 + 0.25)
        let f = 4.25f64.sqrt();
        // g = diag(4 + k², 4) at y = e1, so y⊥ = F e2 / 2
        assert!(fr.y_perp[0].abs() < 1e-15);
        assert!((fr.y_perp[1] - f / 2.0).abs() < 1e-14);
    }

    #[test]
    fn frame_conditions_and_closed_form_agree() {
        for fam in [gr(1.0, 0.2, 1.0), gr(2.0, -0.3, 0.5), qb(1.0, 1.0, 0.5), qb(1.5, -0.7, 0.4)] {
            for k in [0.1, 0.5, 0.9] {
                let m = model(fam, k);
                for i in 0..40 {
                    let th = 2.0 * PI * i as f64 / 40.0 + 0.01;
                    let fr = berwald_perp(&m, th).unwrap();
                    let t = flag_tensors(&m, &fr.y).unwrap();
                    let y = [fr.y[0], fr.y[1], 0.0];
                    let p = [fr.y_perp[0], fr.y_perp[1], 0.0];
                    let f2 = t.f * t.f;
                    assert!(bilinear(&t.g, &y, &p, 2).abs() < 1e-10 * f2);
                    assert!((bilinear(&t.g, &p, &p, 2) - f2).abs() < 1e-9 * f2);
                    let cf = closed_form_perp(&m, th).unwrap();
                    assert!((cf[0] - fr.y_perp[0]).abs() < 1e-9, "{fam:?} {k} {th}");
                    assert!((cf[1] - fr.y_perp[1]).abs() < 1e-9, "{fam:?} {k} {th}");
                }
            }
        }
    }

    #[test]
    fn printed_first_power_variant_fails_frame_condition() {
        // numerators with cos θ in place of cos² θ in the first component
        let (c1, c2, c3, k) = (1.0, 1.0, 0.5, 0.5);
        let m = model(qb(c1, c2, c3), k);
        let th = 1.0f64;
        let (cs, sn) = (th.cos(), th.sin());
        let fr = berwald_perp(&m, th).unwrap();
        let t = flag_tensors(&m, &fr.y).unwrap();
        let alt = [
            -(-c1 + c3 * k * k * cs) * sn,
            -c1 * cs - c2 * k - 2.0 * c3 * k * k * cs + c3 * k * k * cs.powi(3),
            0.0,
        ];
        let y = [fr.y[0], fr.y[1], 0.0];
        let cos_angle = bilinear(&t.g, &y, &alt, 2)
            / (bilinear(&t.g, &y, &y, 2) * bilinear(&t.g, &alt, &alt, 2)).sqrt();
        assert!(cos_angle.abs() > 1e-3);
    }

    #[test]
    fn xi_vanishes_when_riemannian_or_aligned() {
        let m = model(gr(1.0, 0.0, 1.0), 0.7);
        for th in [0.3, 1.2, 2.5] {
            assert!(xi_numeric(&m, th).unwrap() < 1e-13);
        }
        let m = model(qb(1.0, 1.0, 0.5), 0.0);
        assert!(xi_numeric(&m, 0.9).unwrap() < 1e-13);
        assert_eq!(closed_form_xi(&m, 0.9).unwrap(), 0.0);
        for fam in [gr(1.0, 0.2, 1.0), qb(1.0, 1.0, 0.5)] {
            let m = model(fam, 0.6);
            assert!(closed_form_xi(&m, 0.0).unwrap() < 1e-15);
            assert!(closed_form_xi(&m, PI).unwrap() < 1e-15);
            assert!(xi_numeric(&m, 0.0).unwrap() < 1e-12);
            assert!(xi_numeric(&m, PI).unwrap() < 1e-12);
        }
    }

    #[test]
    fn xi_numeric_matches_closed_form_at_third_pi() {
        let m = model(gr(1.0, 0.2, 1.0), 0.5);
        let a = xi_numeric(&m, PI / 3.0).unwrap();
        let b = closed_form_xi(&m, PI / 3.0).unwrap();
        assert!((a - b).abs() < 1e-9 * b);
    }

    #[test]
    fn closed_form_at_unit_k_right_angle() {
        let m = model(gr(1.0, 0.2, 1.0), 1.0);
        let want = 0.3 / 1.96f64.powf(1.5);
        assert!((closed_form_xi(&m, PI / 2.0).unwrap() - want).abs() < 1e-15);
        assert!((xi_numeric(&m, PI / 2.0).unwrap() - want).abs() < 1e-12);
    }

    #[test]
    fn randers_reduction_of_quadratic_beta_formula() {
        let (c1, c2) = (1.3, 0.6);
        let m = model(qb(c1, c2, 0.0), 0.7);
        for th in [0.2, 1.0, 2.0, 3.0, 4.5] {
            let k = 0.7;
            let reduced = 1.5 * c2 * k * f64::sin(th).abs() / (c1 * (c1 + c2 * k * f64::cos(th))).sqrt();
            let cf = closed_form_xi(&m, th).unwrap();
            let jet = xi_numeric(&m, th).unwrap();
            assert!((cf - reduced).abs() < 1e-13 * (1.0 + reduced));
            assert!((jet - reduced).abs() < 1e-10 * (1.0 + reduced));
        }
    }

    #[test]
    fn reflection_symmetry() {
        for fam in [gr(1.0, 0.2, 1.0), qb(1.0, 1.0, 0.5), MetricFamily::PowerRanders { m: 2.0 }] {
            let m = model(fam, 0.6);
            for th in [0.1, 0.8, 1.9, 2.7] {
                let a = xi_numeric(&m, th).unwrap();
                let b = xi_numeric(&m, 2.0 * PI - th).unwrap();
                assert!((a - b).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn fg_examples() {
        let c = [1.0, 0.2, 1.0];
        let FgValues::GeneralizedRanders { f, .. } = fg_polynomials(TheoremFamily::GeneralizedRanders, c, 1.0, 1.0) else {
            unreachable!()
        };
        // c1² + 3c1c2k + c1c3k² + 2c2²k² + c2c3k³ at k = 1
        let direct = 1.0 + 0.6 + 1.0 + 2.0 * 0.04 + 0.2;
        assert!((f - direct).abs() < 1e-15);
        assert!((f - 2.88).abs() < 1e-14);
        for x in [-1.0, -0.3, 0.5, 1.0] {
            let v = fg_polynomials(TheoremFamily::GeneralizedRanders, [1.7, -0.4, 2.0], 0.0, x);
            assert!(matches!(v, FgValues::GeneralizedRanders { f, .. } if (f - 1.7 * 1.7).abs() < 1e-15));
        }
        let c = [1.0, 1.0, 0.5];
        for k in [0.0, 0.3, 1.0] {
            for x in [-1.0, 1.0] {
                let FgValues::QuadraticBeta { f1, .. } = fg_polynomials(TheoremFamily::QuadraticBeta, c, k, x) else {
                    unreachable!()
                };
                assert!((f1 - (0.5 * k * k - 1.0)).abs() < 1e-15);
            }
        }
        let bad = fg_polynomials(TheoremFamily::GeneralizedRanders, [1.0, 3.0, 1.0], 1.0, -0.5);
        assert!(bad.g().is_none());
    }

    #[test]
    fn positivity_examples() {
        let r = positivity_scan(TheoremFamily::GeneralizedRanders, [1.0, 0.2, 1.0], (64, 64)).unwrap();
        assert_eq!(r.f_positive(), Some(true));
        // hypotheses fail: the scan still reports a minimum
        let r = positivity_scan(TheoremFamily::GeneralizedRanders, [1.0, 1.0, 1.0], (64, 64)).unwrap();
        let PositivityReport::GeneralizedRanders { min_f } = r else { unreachable!() };
        // f(1, -1) = 1 - 3 + 1 + 2 - 1 = 0 is the minimum over the box
        assert!(min_f.value.abs() < 1e-12);

        let r = positivity_scan(TheoremFamily::QuadraticBeta, [1.0, 1.0, 0.5], (64, 64)).unwrap();
        let PositivityReport::QuadraticBeta { max_f1, min_f2, .. } = &r else { unreachable!() };
        assert!(max_f1.value < 0.0);
        assert!(min_f2.value > 0.0);
        assert_eq!(r.sign_analysis(), Some((true, true)));
        assert!(positivity_scan(TheoremFamily::QuadraticBeta, [1.0, 1.0, 0.5], (0, 4)).is_err());
    }

    #[test]
    fn norm_scan_examples() {
        let m = model(gr(1.0, 0.0, 1.0), 0.5);
        let s = cartan_norm_2d(&m, 128, XiMethod::Jet).unwrap();
        assert!(s.norm < 1e-12);

        // Randers at k = 0.99 against an independent fine grid of the reduced form
        let k = 0.99;
        let m = model(qb(1.0, 1.0, 0.0), k);
        let s = cartan_norm_2d(&m, DEFAULT_THETA_SAMPLES, XiMethod::Jet).unwrap();
        let oracle = (0..=2_000_000)
            .map(|i| PI * i as f64 / 2e6)
            .map(|t| 1.5 * k * t.sin() / (1.0 + k * t.cos()).sqrt())
            .fold(0.0, f64::max);
        assert!((s.norm - oracle).abs() < 1e-9, "{} vs {oracle}", s.norm);
        assert!(s.norm > 1.96 && s.norm < 1.98);
        assert!(s.norm < 3.0 / 2f64.sqrt());

        for fam in [gr(1.0, 0.2, 1.0), qb(1.0, 1.0, 0.5)] {
            for i in 1..=9 {
                let m = model(fam, 0.1 * i as f64);
                let a = cartan_norm_2d(&m, 512, XiMethod::Jet).unwrap();
                let b = cartan_norm_2d(&m, 512, XiMethod::ClosedForm).unwrap();
                assert!((a.norm - b.norm).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn scan_grid_max_monotone_in_density() {
        let m = model(qb(1.0, 1.0, 0.5), 0.8);
        let mut prev = 0.0;
        for n in [64, 128, 256, 512, 1024] {
            let s = cartan_norm_2d(&m, n, XiMethod::Jet).unwrap();
            assert!(s.grid_max >= prev);
            assert!(s.norm >= s.grid_max);
            assert!(s.xi_values.iter().all(|&v| v <= s.norm && v >= 0.0));
            prev = s.grid_max;
        }
    }

    #[test]
    fn scan_rejects_bad_requests() {
        let m = model(gr(1.0, 0.2, 1.0), 0.5);
        assert!(cartan_norm_2d(&m, 32, XiMethod::Jet).is_err());
        let m3 = MetricModel::new(gr(1.0, 0.2, 1.0), 0.5, 3).unwrap();
        assert!(cartan_norm_2d(&m3, 128, XiMethod::Jet).is_err());
        let pr = model(MetricFamily::PowerRanders { m: 2.0 }, 0.5);
        assert!(matches!(
            cartan_norm_2d(&pr, 128, XiMethod::ClosedForm),
            Err(Error::UnsupportedFamily(_))
        ));
        // f(1, -1) = 0 for (1, 1, 1): the frame collapses at θ = π
        let bad = model(gr(1.0, 1.0, 1.0), 1.0);
        assert!(matches!(
            cartan_norm_2d(&bad, 128, XiMethod::ClosedForm),
            Err(Error::DegenerateFrame { .. })
        ));
    }
}
