//! Fundamental tensor, Cartan torsion and derived tensors of the canonical
//! model `α = |y|`, `β = k y¹`, computed by differentiating `½F²` with jets.

use crate::error::{Error, Result};
use crate::jets::{TaylorJet3, MAX_VARS};
use crate::metric::{phi_jet, MetricModel};

pub type Vector = [f64; MAX_VARS];
pub type Matrix = [[f64; MAX_VARS]; MAX_VARS];
pub type Tensor3 = [[[f64; MAX_VARS]; MAX_VARS]; MAX_VARS];

/// Everything attached to one flag `(x, y)` of the canonical model.
/// Entries with an index `>= n` are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct FlagTensors {
    pub n: usize,
    pub y: Vector,
    pub f: f64,
    pub g: Matrix,
    pub g_inv: Matrix,
    pub c: Tensor3,
    pub i: Vector,
    pub h: Matrix,
    pub m: Tensor3,
}

fn check_direction(model: &MetricModel, y: &[f64]) -> Result<Vector> {
    if y.len() != model.n {
        return Err(Error::invalid(format!(
            "direction has {} components, model dimension is {}",
            y.len(),
            model.n
        )));
    }
    if y.iter().all(|&v| v == 0.0) {
        return Err(Error::invalid("direction y must be nonzero"));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("direction y must be finite"));
    }
    let mut out = [0.0; MAX_VARS];
    out[..y.len()].copy_from_slice(y);
    Ok(out)
}

/// Jet of `F` at `y`.
pub fn metric_jet(model: &MetricModel, y: &[f64]) -> Result<TaylorJet3> {
    check_direction(model, y)?;
    let vars = TaylorJet3::variables(y)?;
    let norm2 = vars
        .iter()
        .skip(1)
        .fold(vars[0] * vars[0], |acc, v| acc + *v * *v);
    let alpha = norm2.sqrt()?;
    let beta = vars[0] * model.k;
    let s = beta.checked_div(&alpha)?;
    let phi = phi_jet(&model.family, &s, model.k)?;
    Ok(alpha * phi)
}

/// `F(y) = α(y) φ(β(y)/α(y))`.
pub fn metric_value(model: &MetricModel, y: &[f64]) -> Result<f64> {
    check_direction(model, y)?;
    let alpha = y.iter().map(|v| v * v).sum::<f64>().sqrt();
    let s = model.k * y[0] / alpha;
    Ok(alpha * model.phi(s)?.phi)
}

fn det(m: &Matrix, n: usize) -> f64 {
    if n == 2 {
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    } else {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }
}

/// Inverse of a symmetric positive-definite 2x2 or 3x3 matrix by adjugate.
pub fn spd_inverse(m: &Matrix, n: usize) -> Result<Matrix> {
    let scale = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| m[i][j].abs())
        .fold(0.0, f64::max);
    let d = det(m, n);
    let minor2 = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    if !(m[0][0] > 0.0) || !(minor2 > 0.0) || !(d > 1e-12 * scale.powi(n as i32)) {
        return Err(Error::NonPositiveDefinite(format!(
            "leading minors {}, {minor2}, det {d}",
            m[0][0]
        )));
    }
    let mut inv = [[0.0; MAX_VARS]; MAX_VARS];
    if n == 2 {
        inv[0][0] = m[1][1] / d;
        inv[1][1] = m[0][0] / d;
        inv[0][1] = -m[0][1] / d;
        inv[1][0] = -m[1][0] / d;
    } else {
        for i in 0..3 {
            for j in 0..3 {
                // cofactor of (j, i)
                let (r0, r1) = ((j + 1) % 3, (j + 2) % 3);
                let (c0, c1) = ((i + 1) % 3, (i + 2) % 3);
                inv[i][j] = (m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0]) / d;
            }
        }
    }
    Ok(inv)
}

pub fn flag_tensors(model: &MetricModel, y: &[f64]) -> Result<FlagTensors> {
    let yv = check_direction(model, y)?;
    let n = model.n;
    let f = metric_jet(model, y)?;
    if !(f.value > 0.0) {
        return Err(Error::domain(format!("F(y) = {} is not positive", f.value)));
    }
    let f2 = f * f;
    let mut g = [[0.0; MAX_VARS]; MAX_VARS];
    let mut c = [[[0.0; MAX_VARS]; MAX_VARS]; MAX_VARS];
    for a in 0..n {
        for b in 0..n {
            g[a][b] = 0.5 * f2.hess[a][b];
            for d in 0..n {
                c[a][b][d] = 0.25 * f2.third[a][b][d];
            }
        }
    }
    let g_inv = spd_inverse(&g, n)?;

    let mut i_vec = [0.0; MAX_VARS];
    for a in 0..n {
        i_vec[a] = (0..n)
            .flat_map(|j| (0..n).map(move |k| (j, k)))
            .map(|(j, k)| g_inv[j][k] * c[a][j][k])
            .sum();
    }

    let fv = f.value;
    let gy = mat_vec(&g, &yv, n);
    let mut h = [[0.0; MAX_VARS]; MAX_VARS];
    for a in 0..n {
        for b in 0..n {
            h[a][b] = g[a][b] - gy[a] * gy[b] / (fv * fv);
        }
    }

    let w = 1.0 / (n as f64 + 1.0);
    let mut m = [[[0.0; MAX_VARS]; MAX_VARS]; MAX_VARS];
    for a in 0..n {
        for b in 0..n {
            for d in 0..n {
                m[a][b][d] = c[a][b][d]
                    - w * (i_vec[a] * h[b][d] + i_vec[b] * h[a][d] + i_vec[d] * h[a][b]);
            }
        }
    }

    Ok(FlagTensors {
        n,
        y: yv,
        f: fv,
        g,
        g_inv,
        c,
        i: i_vec,
        h,
        m,
    })
}

pub fn mat_vec(m: &Matrix, v: &Vector, n: usize) -> Vector {
    let mut out = [0.0; MAX_VARS];
    for a in 0..n {
        out[a] = (0..n).map(|b| m[a][b] * v[b]).sum();
    }
    out
}

pub fn bilinear(m: &Matrix, u: &Vector, v: &Vector, n: usize) -> f64 {
    (0..n)
        .flat_map(|a| (0..n).map(move |b| (a, b)))
        .map(|(a, b)| m[a][b] * u[a] * v[b])
        .sum()
}

pub fn trilinear(t: &Tensor3, u: &Vector, v: &Vector, w: &Vector, n: usize) -> f64 {
    let mut acc = 0.0;
    for a in 0..n {
        for b in 0..n {
            for d in 0..n {
                acc += t[a][b][d] * u[a] * v[b] * w[d];
            }
        }
    }
    acc
}

pub fn max_abs3(t: &Tensor3, n: usize) -> f64 {
    let mut best: f64 = 0.0;
    for a in t.iter().take(n) {
        for b in a.iter().take(n) {
            for v in b.iter().take(n) {
                best = best.max(v.abs());
            }
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlagScalars {
    pub c_uuu: f64,
    pub g_uu: f64,
    /// `F |C(u,u,u)| / g(u,u)^{3/2}`.
    pub ratio: f64,
}

pub fn flag_scalars(t: &FlagTensors, u: &[f64]) -> Result<FlagScalars> {
    if u.len() != t.n || u.iter().all(|&v| v == 0.0) {
        return Err(Error::invalid("u must be a nonzero vector of the flag's dimension"));
    }
    let mut uv = [0.0; MAX_VARS];
    uv[..u.len()].copy_from_slice(u);
    let g_uu = bilinear(&t.g, &uv, &uv, t.n);
    if !(g_uu > 0.0) {
        return Err(Error::NonPositiveDefinite(format!("g(u,u) = {g_uu}")));
    }
    let c_uuu = trilinear(&t.c, &uv, &uv, &uv, t.n);
    Ok(FlagScalars {
        c_uuu,
        g_uu,
        ratio: t.f * c_uuu.abs() / g_uu.powf(1.5),
    })
}
