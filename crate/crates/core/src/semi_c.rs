//! Semi-C-reducibility of (α,β)-metrics: the scalar split
//! `C = p/(n+1) (h⊗I)_sym + q/‖I‖² I⊗I⊗I` with `p + q = 1`.

use crate::error::{Error, Result};
use crate::jets::MAX_VARS;
use crate::metric::{phi_derivatives, MetricFamily, MetricModel};
use crate::tensors::{flag_tensors, FlagTensors, Tensor3};

const SINGULAR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PQSplit {
    pub s: f64,
    pub b: f64,
    pub n: usize,
    pub a: f64,
    pub big_a: f64,
    pub p: f64,
    pub q: f64,
}

fn require_dim(model: &MetricModel) -> Result<()> {
    if model.n < 3 {
        return Err(Error::invalid(format!(
            "the p/q split needs dimension n >= 3, got {}",
            model.n
        )));
    }
    Ok(())
}

fn nonsingular(value: f64, what: &str) -> Result<f64> {
    if value.abs() < SINGULAR || !value.is_finite() {
        return Err(Error::SingularSplit(format!("{what} = {value}")));
    }
    Ok(value)
}

/// `a = φ(φ - sφ')` and
/// `A = (n-2) sφ''/(φ - sφ') - (n+1) φ'/φ - ((b²-s²)φ''' - 3sφ'')/((b²-s²)φ'' + φ - sφ')`.
pub fn compute_a_big_a(model: &MetricModel, s: f64) -> Result<(f64, f64)> {
    require_dim(model)?;
    let b = model.k;
    if s.abs() > b {
        return Err(Error::domain(format!("|s| = {} exceeds b = {b}", s.abs())));
    }
    let d = model.phi(s)?;
    let n = model.n as f64;
    let phi = nonsingular(d.phi, "phi")?;
    let tangential = nonsingular(d.phi - s * d.d1, "phi - s phi'")?;
    let w = b * b - s * s;
    let regular = nonsingular(w * d.d2 + tangential, "(b^2-s^2) phi'' + phi - s phi'")?;
    let a = phi * tangential;
    let big_a = (n - 2.0) * s * d.d2 / tangential
        - (n + 1.0) * d.d1 / phi
        - (w * d.d3 - 3.0 * s * d.d2) / regular;
    Ok((a, big_a))
}

/// `p = (n+1)/(aA) [s(φφ'' + φ'²) - φφ']`, `q = 1 - p`.
pub fn compute_p(model: &MetricModel, s: f64) -> Result<PQSplit> {
    let (a, big_a) = compute_a_big_a(model, s)?;
    nonsingular(a * big_a, "a A")?;
    let d = model.phi(s)?;
    let n = model.n as f64;
    let p = (n + 1.0) / (a * big_a) * (s * (d.phi * d.d2 + d.d1 * d.d1) - d.phi * d.d1);
    Ok(PQSplit {
        s,
        b: model.k,
        n: model.n,
        a,
        big_a,
        p,
        q: 1.0 - p,
    })
}

/// p for `φ = sqrt(c1 + 2c2 s + c3 s²)`: `-(n+1) c2 / ((c1 + c2 s) A)`.
pub fn p_generalized_randers(c: [f64; 3], s: f64, big_a: f64, n: usize) -> f64 {
    let [c1, c2, _] = c;
    -(n as f64 + 1.0) * c2 / ((c1 + c2 * s) * big_a)
}

/// p for `φ = c1 + c2 s + c3 s²`:
/// `(n+1)(3c2c3s² + 4c3²s³ - c1c2) / ((c1 - c3s²)(c1 + c2s + c3s²) A)`.
pub fn p_quadratic_beta(c: [f64; 3], s: f64, big_a: f64, n: usize) -> f64 {
    let [c1, c2, c3] = c;
    let num = 3.0 * c2 * c3 * s * s + 4.0 * c3 * c3 * s.powi(3) - c1 * c2;
    (n as f64 + 1.0) * num / ((c1 - c3 * s * s) * (c1 + c2 * s + c3 * s * s) * big_a)
}

/// A for the generalized Randers family in terms of `D = c1c3 - c2²`:
/// `(n-2) s D/((c1+c2s)φ²) - (n+1)(c2+c3s)/φ² + 3D[(b²-s²)(c2+c3s) + sφ²] / (φ²[(c1+c2s)φ² + (b²-s²)D])`.
pub fn big_a_generalized_randers(c: [f64; 3], s: f64, b: f64, n: usize) -> f64 {
    let [c1, c2, c3] = c;
    let n = n as f64;
    let phi2 = c1 + 2.0 * c2 * s + c3 * s * s;
    let disc = c1 * c3 - c2 * c2;
    let w = b * b - s * s;
    let lin = c2 + c3 * s;
    let tang = c1 + c2 * s;
    (n - 2.0) * s * disc / (tang * phi2) - (n + 1.0) * lin / phi2
        + 3.0 * disc * (w * lin + s * phi2) / (phi2 * (tang * phi2 + w * disc))
}

/// A for `φ = c1 + c2 s + c3 s²`.
pub fn big_a_quadratic_beta(c: [f64; 3], s: f64, b: f64, n: usize) -> f64 {
    let [c1, c2, c3] = c;
    let n = n as f64;
    let tang = c1 - c3 * s * s;
    2.0 * (n - 2.0) * c3 * s / tang - (n + 1.0) * (c2 + 2.0 * c3 * s) / (c1 + c2 * s + c3 * s * s)
        + 6.0 * c3 * s / (tang + 2.0 * (b * b - s * s) * c3)
}

/// `sqrt((3p² + 6pq + (n+1)q²)/(n+1))`, the ratio ‖C‖/‖I‖ for a split.
pub fn norm_relation_factor(p: f64, q: f64, n: usize) -> Result<f64> {
    let n1 = n as f64 + 1.0;
    let radicand = (3.0 * p * p + 6.0 * p * q + n1 * q * q) / n1;
    if radicand < 0.0 || !radicand.is_finite() {
        return Err(Error::domain(format!("norm relation radicand {radicand}")));
    }
    Ok(radicand.sqrt())
}

/// The two basis tensors of the split at a flag:
/// `(h_ij I_k + h_jk I_i + h_ki I_j)/(n+1)` and `I_i I_j I_k / ‖I‖²`.
fn split_basis(t: &FlagTensors) -> Result<(Tensor3, Tensor3)> {
    let n = t.n;
    let mut i_norm2 = 0.0;
    for a in 0..n {
        for b in 0..n {
            i_norm2 += t.g_inv[a][b] * t.i[a] * t.i[b];
        }
    }
    if !(i_norm2.sqrt() > SINGULAR) {
        return Err(Error::RiemannianFlag(format!("|I|^2 = {i_norm2}")));
    }
    let w = 1.0 / (n as f64 + 1.0);
    let mut reducible = [[[0.0; MAX_VARS]; MAX_VARS]; MAX_VARS];
    let mut cubic = [[[0.0; MAX_VARS]; MAX_VARS]; MAX_VARS];
    let (h, i) = (&t.h, &t.i);
    for a in 0..n {
        for b in 0..n {
            for d in 0..n {
                reducible[a][b][d] = w * (h[a][b] * i[d] + h[b][d] * i[a] + h[d][a] * i[b]);
                cubic[a][b][d] = i[a] * i[b] * i[d] / i_norm2;
            }
        }
    }
    Ok((reducible, cubic))
}

/// Max-abs entry of `C - p·(reducible part) - (1-p)·(cubic part)`.
pub fn split_residual(t: &FlagTensors, p: f64) -> Result<f64> {
    let (r, c3) = split_basis(t)?;
    let n = t.n;
    let mut worst: f64 = 0.0;
    for a in 0..n {
        for b in 0..n {
            for d in 0..n {
                let rhs = p * r[a][b][d] + (1.0 - p) * c3[a][b][d];
                worst = worst.max((t.c[a][b][d] - rhs).abs());
            }
        }
    }
    Ok(worst)
}

/// Unconstrained least-squares weights `(p, q)` of the two basis tensors.
pub fn fitted_split(t: &FlagTensors) -> Result<(f64, f64)> {
    let (r, c3) = split_basis(t)?;
    let n = t.n;
    let (mut rr, mut rc, mut cc, mut ry, mut cy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for a in 0..n {
        for b in 0..n {
            for d in 0..n {
                let (x, z, y) = (r[a][b][d], c3[a][b][d], t.c[a][b][d]);
                rr += x * x;
                rc += x * z;
                cc += z * z;
                ry += x * y;
                cy += z * y;
            }
        }
    }
    let det = rr * cc - rc * rc;
    if det.abs() < SINGULAR * rr * cc {
        return Err(Error::SingularSplit("basis tensors are collinear".into()));
    }
    Ok(((ry * cc - cy * rc) / det, (rr * cy - rc * ry) / det))
}

/// Flag value `s = β/α` of the canonical model.
pub fn flag_s(model: &MetricModel, y: &[f64]) -> f64 {
    let alpha = y.iter().map(|v| v * v).sum::<f64>().sqrt();
    model.k * y[0] / alpha
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decomposition {
    pub residual: f64,
    pub split: PQSplit,
}

/// Residual of the split at flag `y` with `p` from [`compute_p`].
pub fn decomposition_residual(model: &MetricModel, y: &[f64]) -> Result<Decomposition> {
    if model.n != 3 {
        return Err(Error::invalid("decomposition residual is evaluated with n = 3"));
    }
    let t = flag_tensors(model, y)?;
    // a Riemannian flag makes p a 0/0 ratio; report that first
    split_basis(&t)?;
    let split = compute_p(model, flag_s(model, y))?;
    Ok(Decomposition {
        residual: split_residual(&t, split.p)?,
        split,
    })
}

/// `s(φφ'' + φ'²) - φφ'`; vanishes identically exactly for the C2-like case.
pub fn c2like_residual(family: &MetricFamily, s: f64, b: f64) -> Result<f64> {
    let d = phi_derivatives(family, s, b)?;
    Ok(s * (d.phi * d.d2 + d.d1 * d.d1) - d.phi * d.d1)
}
