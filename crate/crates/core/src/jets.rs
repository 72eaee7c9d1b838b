//! Truncated third-order Taylor jets in up to three variables.
//!
//! A [`TaylorJet3`] carries the value of a scalar function together with its
//! gradient, Hessian and third-derivative tensor at a fixed point. Arithmetic
//! on jets propagates all of these exactly (up to rounding), so composing the
//! operations below evaluates any expression built from `+ - * /`, `sqrt`,
//! `exp` and powers along with its partial derivatives through order three.
//!
//! Storage is the full `3 x 3 x 3` cube regardless of `nvars`; entries with an
//! index `>= nvars` stay zero.

use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};

/// Largest supported number of variables.
pub const MAX_VARS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TaylorJet3 {
    nvars: usize,
    pub value: f64,
    pub grad: [f64; MAX_VARS],
    pub hess: [[f64; MAX_VARS]; MAX_VARS],
    pub third: [[[f64; MAX_VARS]; MAX_VARS]; MAX_VARS],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

fn check_nvars(nvars: usize) -> Result<()> {
    if nvars == 0 || nvars > MAX_VARS {
        return Err(Error::invalid(format!(
            "jets support 1..={MAX_VARS} variables, got {nvars}"
        )));
    }
    Ok(())
}

impl TaylorJet3 {
    /// Seed a jet: the coordinate function `x_index` when `index` is given,
    /// otherwise the constant `value`.
    pub fn seed(index: Option<usize>, value: f64, nvars: usize) -> Result<Self> {
        check_nvars(nvars)?;
        let mut jet = Self::constant(value, nvars);
        if let Some(i) = index {
            if i >= nvars {
                return Err(Error::invalid(format!(
                    "variable index {i} out of range for {nvars} variables"
                )));
            }
            jet.grad[i] = 1.0;
        }
        Ok(jet)
    }

    /// Constant jet. Panics if `nvars` is not in `1..=3`.
    pub fn constant(value: f64, nvars: usize) -> Self {
        assert!(
            (1..=MAX_VARS).contains(&nvars),
            "nvars must be in 1..=3, got {nvars}"
        );
        TaylorJet3 {
            nvars,
            value,
            grad: [0.0; MAX_VARS],
            hess: [[0.0; MAX_VARS]; MAX_VARS],
            third: [[[0.0; MAX_VARS]; MAX_VARS]; MAX_VARS],
        }
    }

    /// Seeds one jet per coordinate of `point`.
    pub fn variables(point: &[f64]) -> Result<Vec<Self>> {
        let n = point.len();
        check_nvars(n)?;
        point
            .iter()
            .enumerate()
            .map(|(i, &x)| Self::seed(Some(i), x, n))
            .collect()
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_finite(&self) -> bool {
        let n = self.nvars;
        if !self.value.is_finite() {
            return false;
        }
        for i in 0..n {
            if !self.grad[i].is_finite() {
                return false;
            }
            for j in 0..n {
                if !self.hess[i][j].is_finite() {
                    return false;
                }
                for k in 0..n {
                    if !self.third[i][j][k].is_finite() {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Jet of `f(self)` for a univariate `f` whose value and first three
    /// derivatives at `self.value` are `d = [f, f', f'', f''']`
    /// (third-order Faa di Bruno).
    pub fn compose(&self, d: [f64; 4]) -> Self {
        let n = self.nvars;
        let a = self;
        let mut out = Self::constant(d[0], n);
        for i in 0..n {
            out.grad[i] = d[1] * a.grad[i];
            for j in 0..n {
                out.hess[i][j] = d[2] * a.grad[i] * a.grad[j] + d[1] * a.hess[i][j];
                for k in 0..n {
                    out.third[i][j][k] = d[3] * a.grad[i] * a.grad[j] * a.grad[k]
                        + d[2]
                            * (a.hess[i][j] * a.grad[k]
                                + a.hess[i][k] * a.grad[j]
                                + a.hess[j][k] * a.grad[i])
                        + d[1] * a.third[i][j][k];
                }
            }
        }
        out.symmetrize();
        out
    }

    /// Copies each sorted-index entry onto its permutations so the
    /// derivative tensors are exactly symmetric despite rounding order.
    fn symmetrize(&mut self) {
        let n = self.nvars;
        for i in 0..n {
            for j in i..n {
                self.hess[j][i] = self.hess[i][j];
                for k in j..n {
                    let v = self.third[i][j][k];
                    for (a, b, c) in [(i, k, j), (j, i, k), (j, k, i), (k, i, j), (k, j, i)] {
                        self.third[a][b][c] = v;
                    }
                }
            }
        }
    }

    fn same_shape(&self, other: &Self) -> Result<()> {
        if self.nvars != other.nvars {
            return Err(Error::invalid(format!(
                "jet variable count mismatch: {} vs {}",
                self.nvars, other.nvars
            )));
        }
        Ok(())
    }

    fn zip(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        let n = self.nvars;
        let mut out = Self::constant(f(self.value, other.value), n);
        for i in 0..n {
            out.grad[i] = f(self.grad[i], other.grad[i]);
            for j in 0..n {
                out.hess[i][j] = f(self.hess[i][j], other.hess[i][j]);
                for k in 0..n {
                    out.third[i][j][k] = f(self.third[i][j][k], other.third[i][j][k]);
                }
            }
        }
        out
    }

    fn leibniz(a: &Self, b: &Self) -> Self {
        let n = a.nvars;
        let mut out = Self::constant(a.value * b.value, n);
        for i in 0..n {
            out.grad[i] = a.grad[i] * b.value + a.value * b.grad[i];
            for j in 0..n {
                out.hess[i][j] = a.hess[i][j] * b.value
                    + a.grad[i] * b.grad[j]
                    + a.grad[j] * b.grad[i]
                    + a.value * b.hess[i][j];
                for k in 0..n {
                    out.third[i][j][k] = a.third[i][j][k] * b.value
                        + a.hess[i][j] * b.grad[k]
                        + a.hess[i][k] * b.grad[j]
                        + a.hess[j][k] * b.grad[i]
                        + a.grad[i] * b.hess[j][k]
                        + a.grad[j] * b.hess[i][k]
                        + a.grad[k] * b.hess[i][j]
                        + a.value * b.third[i][j][k];
                }
            }
        }
        out.symmetrize();
        out
    }

    pub fn scale(&self, c: f64) -> Self {
        let zero = Self::constant(0.0, self.nvars);
        self.zip(&zero, |x, _| c * x)
    }

    pub fn add_const(&self, c: f64) -> Self {
        let mut out = *self;
        out.value += c;
        out
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        Ok(Self::leibniz(self, other))
    }

    pub fn recip(&self) -> Result<Self> {
        let x = self.value;
        if x == 0.0 || !x.is_finite() {
            return Err(Error::SingularJet(format!("reciprocal of {x}")));
        }
        let r = 1.0 / x;
        Ok(self.compose([r, -r * r, 2.0 * r * r * r, -6.0 * r * r * r * r]))
    }

    pub fn checked_div(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        Ok(Self::leibniz(self, &other.recip()?))
    }

    pub fn arith(op: ArithOp, a: &Self, b: &Self) -> Result<Self> {
        a.same_shape(b)?;
        match op {
            ArithOp::Add => Ok(a.zip(b, |x, y| x + y)),
            ArithOp::Sub => Ok(a.zip(b, |x, y| x - y)),
            ArithOp::Mul => Ok(Self::leibniz(a, b)),
            ArithOp::Div => a.checked_div(b),
        }
    }

    pub fn sqrt(&self) -> Result<Self> {
        let x = self.value;
        if !(x > 0.0) {
            return Err(Error::domain(format!("sqrt of non-positive value {x}")));
        }
        let r = x.sqrt();
        Ok(self.compose([
            r,
            0.5 / r,
            -0.25 / (r * x),
            0.375 / (r * x * x),
        ]))
    }

    pub fn exp(&self) -> Result<Self> {
        let e = self.value.exp();
        if !e.is_finite() {
            return Err(Error::NumericOverflow(format!("exp({})", self.value)));
        }
        let out = self.compose([e; 4]);
        if !out.is_finite() {
            return Err(Error::NumericOverflow(format!(
                "exp jet at {} overflowed",
                self.value
            )));
        }
        Ok(out)
    }

    pub fn pow_int(&self, m: i32) -> Result<Self> {
        let n = self.nvars;
        if m == 0 {
            return Ok(Self::constant(1.0, n));
        }
        let base = if m < 0 {
            if self.value == 0.0 {
                return Err(Error::SingularJet(format!("0 raised to {m}")));
            }
            self.recip()?
        } else {
            *self
        };
        // square-and-multiply
        let mut e = m.unsigned_abs();
        let mut acc = Self::constant(1.0, n);
        let mut sq = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = Self::leibniz(&acc, &sq);
            }
            e >>= 1;
            if e > 0 {
                sq = Self::leibniz(&sq, &sq);
            }
        }
        Ok(acc)
    }

    /// Real power `self^m` for `self.value > 0`.
    pub fn powf(&self, m: f64) -> Result<Self> {
        let x = self.value;
        if !(x > 0.0) {
            return Err(Error::domain(format!("real power of non-positive value {x}")));
        }
        let p0 = x.powf(m);
        Ok(self.compose([
            p0,
            m * p0 / x,
            m * (m - 1.0) * p0 / (x * x),
            m * (m - 1.0) * (m - 2.0) * p0 / (x * x * x),
        ]))
    }
}

impl Add for TaylorJet3 {
    type Output = TaylorJet3;
    fn add(self, rhs: Self) -> Self {
        assert_eq!(self.nvars, rhs.nvars, "jet variable count mismatch");
        self.zip(&rhs, |x, y| x + y)
    }
}

impl Sub for TaylorJet3 {
    type Output = TaylorJet3;
    fn sub(self, rhs: Self) -> Self {
        assert_eq!(self.nvars, rhs.nvars, "jet variable count mismatch");
        self.zip(&rhs, |x, y| x - y)
    }
}

impl Mul for TaylorJet3 {
    type Output = TaylorJet3;
    fn mul(self, rhs: Self) -> Self {
        assert_eq!(self.nvars, rhs.nvars, "jet variable count mismatch");
        Self::leibniz(&self, &rhs)
    }
}

impl Mul<f64> for TaylorJet3 {
    type Output = TaylorJet3;
    fn mul(self, rhs: f64) -> Self {
        self.scale(rhs)
    }
}

impl Add<f64> for TaylorJet3 {
    type Output = TaylorJet3;
    fn add(self, rhs: f64) -> Self {
        self.add_const(rhs)
    }
}

impl Neg for TaylorJet3 {
    type Output = TaylorJet3;
    fn neg(self) -> Self {
        self.scale(-1.0)
    }
}
