//! Forward-mode dual numbers that nest.
//!
//! `Dual<Dual<f64>>` carries two independent infinitesimals, so the coefficient
//! of `ε₁ε₂` is a mixed second partial. Everything that evaluates expressions
//! is generic over [`Scalar`], which lets geometric quantities be
//! differentiated again simply by evaluating them one level deeper.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Numbers the expression evaluator can run on.
pub trait Scalar:
    Copy
    + Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn cst(v: f64) -> Self;
    /// Innermost real part.
    fn re(&self) -> f64;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn tan(self) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sqrt(self) -> Self;
    fn abs(self) -> Self;
    fn powi(self, n: i32) -> Self;
    fn powf(self, c: f64) -> Self;

    fn zero() -> Self {
        Self::cst(0.0)
    }

    fn one() -> Self {
        Self::cst(1.0)
    }

    fn scale(self, c: f64) -> Self {
        self * Self::cst(c)
    }
}

impl Scalar for f64 {
    #[inline]
    fn cst(v: f64) -> Self {
        v
    }
    #[inline]
    fn re(&self) -> f64 {
        *self
    }
    fn sin(self) -> Self {
        f64::sin(self)
    }
    fn cos(self) -> Self {
        f64::cos(self)
    }
    fn tan(self) -> Self {
        f64::tan(self)
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn abs(self) -> Self {
        f64::abs(self)
    }
    fn powi(self, n: i32) -> Self {
        f64::powi(self, n)
    }
    fn powf(self, c: f64) -> Self {
        f64::powf(self, c)
    }
    #[inline]
    fn scale(self, c: f64) -> Self {
        self * c
    }
}

/// `re + eps·ε` with `ε² = 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dual<S> {
    pub re: S,
    pub eps: S,
}

impl<S: Scalar> Dual<S> {
    pub fn new(re: S, eps: S) -> Self {
        Dual { re, eps }
    }

    pub fn constant(re: S) -> Self {
        Dual { re, eps: S::zero() }
    }

    pub fn variable(re: S) -> Self {
        Dual { re, eps: S::one() }
    }

    #[inline]
    fn chain(self, value: S, slope: S) -> Self {
        Dual { re: value, eps: self.eps * slope }
    }
}

impl<S: Scalar> Add for Dual<S> {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        Dual { re: self.re + o.re, eps: self.eps + o.eps }
    }
}

impl<S: Scalar> Sub for Dual<S> {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        Dual { re: self.re - o.re, eps: self.eps - o.eps }
    }
}

impl<S: Scalar> Mul for Dual<S> {
    type Output = Self;
    #[inline]
    fn mul(self, o: Self) -> Self {
        Dual { re: self.re * o.re, eps: self.re * o.eps + self.eps * o.re }
    }
}

impl<S: Scalar> Div for Dual<S> {
    type Output = Self;
    #[inline]
    fn div(self, o: Self) -> Self {
        let q = self.re / o.re;
        Dual { re: q, eps: (self.eps - q * o.eps) / o.re }
    }
}

impl<S: Scalar> Neg for Dual<S> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Dual { re: -self.re, eps: -self.eps }
    }
}

impl<S: Scalar> Scalar for Dual<S> {
    fn cst(v: f64) -> Self {
        Dual::constant(S::cst(v))
    }

    fn re(&self) -> f64 {
        self.re.re()
    }

    fn sin(self) -> Self {
        self.chain(self.re.sin(), self.re.cos())
    }

    fn cos(self) -> Self {
        self.chain(self.re.cos(), -self.re.sin())
    }

    fn tan(self) -> Self {
        let t = self.re.tan();
        self.chain(t, S::one() + t * t)
    }

    fn exp(self) -> Self {
        let e = self.re.exp();
        self.chain(e, e)
    }

    fn ln(self) -> Self {
        Dual { re: self.re.ln(), eps: self.eps / self.re }
    }

    fn sqrt(self) -> Self {
        let s = self.re.sqrt();
        Dual { re: s, eps: self.eps / s.scale(2.0) }
    }

    fn abs(self) -> Self {
        if self.re.re() < 0.0 {
            -self
        } else {
            self
        }
    }

    fn powi(self, n: i32) -> Self {
        if n == 0 {
            return Self::one();
        }
        let slope = self.re.powi(n - 1).scale(n as f64);
        self.chain(self.re.powi(n), slope)
    }

    fn powf(self, c: f64) -> Self {
        let slope = self.re.powf(c - 1.0).scale(c);
        self.chain(self.re.powf(c), slope)
    }
}

/// Lift a point one level up the tower, seeding the infinitesimal along `direction`.
pub fn along<S: Scalar>(point: &[S], direction: &[S]) -> Vec<Dual<S>> {
    debug_assert_eq!(point.len(), direction.len());
    point
        .iter()
        .zip(direction)
        .map(|(&re, &eps)| Dual::new(re, eps))
        .collect()
}

/// Lift a point one level up the tower, seeding the coordinate `index`.
pub fn seed<S: Scalar>(point: &[S], index: usize) -> Vec<Dual<S>> {
    point
        .iter()
        .enumerate()
        .map(|(k, &re)| if k == index { Dual::variable(re) } else { Dual::constant(re) })
        .collect()
}

/// Lift a point without seeding anything.
pub fn lift<S: Scalar>(point: &[S]) -> Vec<Dual<S>> {
    point.iter().map(|&re| Dual::constant(re)).collect()
}

pub fn tangent<S: Scalar>(values: &[Dual<S>]) -> Vec<S> {
    values.iter().map(|d| d.eps).collect()
}

pub fn primal<S: Scalar>(values: &[Dual<S>]) -> Vec<S> {
    values.iter().map(|d| d.re).collect()
}
