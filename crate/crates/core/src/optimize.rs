//! One-dimensional maximization helpers: uniform grid scan plus
//! golden-section refinement of the best bracket.

use crate::error::Result;

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section search for a maximum of `f` on `[a, b]`, stopping when the
/// bracket is narrower than `tol`. Returns `(x_max, f_max)`.
pub fn golden_section_max<F>(f: F, mut a: f64, mut b: f64, tol: f64) -> Result<(f64, f64)>
where
    F: Fn(f64) -> Result<f64>,
{
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    let mut iters = 0;
    while (b - a).abs() > tol && iters < 200 {
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2)?;
        }
        iters += 1;
    }
    Ok(if f1 >= f2 { (x1, f1) } else { (x2, f2) })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridMax {
    pub xs: Vec<f64>,
    pub values: Vec<f64>,
    pub argmax_index: usize,
    pub x_max: f64,
    pub f_max: f64,
}

/// Evaluates `f` at `intervals + 1` equispaced points on `[lo, hi]`, then
/// refines around the best grid point. The refined maximum is never below the
/// best grid value.
pub fn grid_then_golden<F>(f: F, lo: f64, hi: f64, intervals: usize, tol: f64) -> Result<GridMax>
where
    F: Fn(f64) -> Result<f64>,
{
    let step = (hi - lo) / intervals as f64;
    let xs: Vec<f64> = (0..=intervals)
        .map(|i| if i == intervals { hi } else { lo + step * i as f64 })
        .collect();
    let values = xs.iter().map(|&x| f(x)).collect::<Result<Vec<_>>>()?;
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    let a = xs[best.saturating_sub(1)];
    let b = xs[(best + 1).min(intervals)];
    let (mut x_max, mut f_max) = (xs[best], values[best]);
    if b > a {
        let (x, fx) = golden_section_max(&f, a, b, tol)?;
        if fx > f_max {
            x_max = x;
            f_max = fx;
        }
    }
    Ok(GridMax {
        xs,
        values,
        argmax_index: best,
        x_max,
        f_max,
    })
}
