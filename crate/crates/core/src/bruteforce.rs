//! Brute-force Cartan norm of the 3-dimensional canonical model: maximize
//! `F(y)|C_y(u,u,u)|/g_y(u,u)^{3/2}` over sampled directions `y` and `u`,
//! then polish the best pair by coordinate ascent.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::error::{Error, Result};
use crate::frame::theta_window;
use crate::metric::MetricModel;
use crate::tensors::{flag_scalars, flag_tensors};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormEstimate {
    /// Refined maximum (a lower bound for the supremum).
    pub norm: f64,
    /// Best value over the sample sets before refinement.
    pub sampled_max: f64,
    pub y: [f64; 3],
    pub u: [f64; 3],
}

/// `count` nearly uniform points on the unit sphere (golden-angle spiral).
pub fn fibonacci_sphere(count: usize) -> Vec<[f64; 3]> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..count)
        .map(|i| {
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / count as f64;
            let r = (1.0 - z * z).sqrt();
            let phi = golden * i as f64;
            [z, r * phi.cos(), r * phi.sin()]
        })
        .collect()
}

fn from_angles(polar: f64, azimuth: f64) -> [f64; 3] {
    [polar.cos(), polar.sin() * azimuth.cos(), polar.sin() * azimuth.sin()]
}

fn to_angles(v: &[f64; 3]) -> (f64, f64) {
    let r = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    ((v[0] / r).clamp(-1.0, 1.0).acos(), v[2].atan2(v[1]))
}

/// Whether `y` lies in the direction window of the plane scan; families
/// singular at `|s| = b` or `s = 0` are sampled away from those directions.
pub fn in_window(model: &MetricModel, y: &[f64; 3]) -> bool {
    let r = (y[0] * y[0] + y[1] * y[1] + y[2] * y[2]).sqrt();
    let x = y[0] / r;
    let (lo, hi) = theta_window(model);
    x <= lo.cos() && x >= hi.cos()
}

/// Torsion ratio at the flag `y` in direction `u`.
pub fn torsion_ratio(model: &MetricModel, y: &[f64; 3], u: &[f64; 3]) -> Result<f64> {
    let t = flag_tensors(model, y)?;
    Ok(flag_scalars(&t, u)?.ratio)
}

pub fn cartan_norm_nd(
    model: &MetricModel,
    y_samples: usize,
    u_samples: usize,
    seed: u64,
) -> Result<NormEstimate> {
    if model.n != 3 {
        return Err(Error::invalid(format!(
            "brute-force norm is implemented for n = 3, got {}",
            model.n
        )));
    }
    if y_samples == 0 || u_samples == 0 {
        return Err(Error::invalid("sample counts must be positive"));
    }
    let ys: Vec<[f64; 3]> = fibonacci_sphere(y_samples)
        .into_iter()
        .filter(|y| in_window(model, y))
        .collect();
    if ys.is_empty() {
        return Err(Error::invalid("no y sample inside the direction window"));
    }
    // u and -u give the same ratio
    let us: Vec<[f64; 3]> = fibonacci_sphere(2 * u_samples)
        .into_iter()
        .filter(|u| u[0] >= 0.0)
        .take(u_samples)
        .collect();

    let mut best = NormEstimate {
        norm: 0.0,
        sampled_max: 0.0,
        y: ys[0],
        u: us[0],
    };
    for y in &ys {
        let t = flag_tensors(model, y)?;
        for u in &us {
            let r = flag_scalars(&t, u)?.ratio;
            if r > best.sampled_max {
                best.sampled_max = r;
                best.y = *y;
                best.u = *u;
            }
        }
    }
    best.norm = best.sampled_max;
    refine(model, best, seed)
}

fn refine(model: &MetricModel, start: NormEstimate, seed: u64) -> Result<NormEstimate> {
    let mut rng = StdRng::seed_from_u64(seed);
    let (ya, yb) = to_angles(&start.y);
    let (ua, ub) = to_angles(&start.u);
    let mut x = [ya, yb, ua, ub];
    let eval = |x: &[f64; 4]| -> Result<f64> {
        let y = from_angles(x[0], x[1]);
        if !in_window(model, &y) {
            return Ok(f64::NEG_INFINITY);
        }
        torsion_ratio(model, &y, &from_angles(x[2], x[3]))
    };
    let mut fx = eval(&x)?.max(start.norm);
    let mut step = 0.02;
    while step > 1e-10 {
        let mut improved = false;
        for i in 0..4 {
            for sign in [1.0, -1.0] {
                let mut z = x;
                z[i] += sign * step;
                let fz = eval(&z)?;
                if fz > fx {
                    x = z;
                    fx = fz;
                    improved = true;
                }
            }
        }
        // one random probe per round
        let mut z = x;
        for zi in z.iter_mut() {
            *zi += step * rng.gen_range(-1.0..1.0);
        }
        let fz = eval(&z)?;
        if fz > fx {
            x = z;
            fx = fz;
            improved = true;
        }
        if !improved {
            step *= 0.5;
        }
    }
    let mut out = start;
    if fx > start.norm {
        out.norm = fx;
        out.y = from_angles(x[0], x[1]);
        out.u = from_angles(x[2], x[3]);
    }
    Ok(out)
}
