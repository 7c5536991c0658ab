//! Forward-mode automatic differentiation with scalar dual numbers.
//!
//! A dual number `a + b·ε` (with `ε² = 0`) carries a value and a tangent
//! through an expression; evaluating `f` once on seeded duals yields the
//! exact directional derivative `pᵀ∇f(x)` at roughly the cost of one plain
//! function evaluation. One tangent per pass: a subspace of dimension `l`
//! costs `l` passes.
//!
//! Domain violations (log of a non-positive value, division by zero)
//! follow IEEE semantics and surface as NaN/infinity; the oracle layer
//! converts non-finite results into domain errors.

use crate::linalg::DenseVector;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Value plus tangent: `value + tangent·ε`, `ε² = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dual {
    pub value: f64,
    pub tangent: f64,
}

impl Dual {
    pub const fn new(value: f64, tangent: f64) -> Self {
        Self { value, tangent }
    }

    /// Lifts a constant: zero tangent.
    pub const fn constant(value: f64) -> Self {
        Self::new(value, 0.0)
    }

    /// Seeds a variable: unit tangent.
    pub const fn variable(value: f64) -> Self {
        Self::new(value, 1.0)
    }

    pub fn powi(self, n: i32) -> Self {
        Self::new(
            self.value.powi(n),
            f64::from(n) * self.value.powi(n - 1) * self.tangent,
        )
    }

    pub fn powf(self, e: f64) -> Self {
        Self::new(
            self.value.powf(e),
            e * self.value.powf(e - 1.0) * self.tangent,
        )
    }

    pub fn sqrt(self) -> Self {
        let s = self.value.sqrt();
        Self::new(s, 0.5 / s * self.tangent)
    }

    pub fn sin(self) -> Self {
        Self::new(self.value.sin(), self.value.cos() * self.tangent)
    }

    pub fn cos(self) -> Self {
        Self::new(self.value.cos(), -self.value.sin() * self.tangent)
    }

    pub fn exp(self) -> Self {
        let e = self.value.exp();
        Self::new(e, e * self.tangent)
    }

    pub fn ln(self) -> Self {
        Self::new(self.value.ln(), self.tangent / self.value)
    }

    /// Absolute value with the smooth extension `d|x| = sign(x) dx` and a
    /// zero tangent at the kink.
    pub fn abs(self) -> Self {
        let sign = if self.value == 0.0 {
            0.0
        } else {
            self.value.signum()
        };
        Self::new(self.value.abs(), sign * self.tangent)
    }

    pub fn recip(self) -> Self {
        Self::new(1.0 / self.value, -self.tangent / (self.value * self.value))
    }

    pub fn is_finite(self) -> bool {
        self.value.is_finite() && self.tangent.is_finite()
    }
}

impl Add for Dual {
    type Output = Dual;
    fn add(self, rhs: Dual) -> Dual {
        Dual::new(self.value + rhs.value, self.tangent + rhs.tangent)
    }
}

impl Sub for Dual {
    type Output = Dual;
    fn sub(self, rhs: Dual) -> Dual {
        Dual::new(self.value - rhs.value, self.tangent - rhs.tangent)
    }
}

impl Mul for Dual {
    type Output = Dual;
    fn mul(self, rhs: Dual) -> Dual {
        Dual::new(
            self.value * rhs.value,
            self.value * rhs.tangent + self.tangent * rhs.value,
        )
    }
}

impl Div for Dual {
    type Output = Dual;
    fn div(self, rhs: Dual) -> Dual {
        Dual::new(
            self.value / rhs.value,
            (self.tangent * rhs.value - self.value * rhs.tangent) / (rhs.value * rhs.value),
        )
    }
}

impl Neg for Dual {
    type Output = Dual;
    fn neg(self) -> Dual {
        Dual::new(-self.value, -self.tangent)
    }
}

impl Add<f64> for Dual {
    type Output = Dual;
    fn add(self, rhs: f64) -> Dual {
        Dual::new(self.value + rhs, self.tangent)
    }
}

impl Sub<f64> for Dual {
    type Output = Dual;
    fn sub(self, rhs: f64) -> Dual {
        Dual::new(self.value - rhs, self.tangent)
    }
}

impl Mul<f64> for Dual {
    type Output = Dual;
    fn mul(self, rhs: f64) -> Dual {
        Dual::new(self.value * rhs, self.tangent * rhs)
    }
}

impl Div<f64> for Dual {
    type Output = Dual;
    fn div(self, rhs: f64) -> Dual {
        Dual::new(self.value / rhs, self.tangent / rhs)
    }
}

impl Add<Dual> for f64 {
    type Output = Dual;
    fn add(self, rhs: Dual) -> Dual {
        rhs + self
    }
}

impl Sub<Dual> for f64 {
    type Output = Dual;
    fn sub(self, rhs: Dual) -> Dual {
        Dual::new(self - rhs.value, -rhs.tangent)
    }
}

impl Mul<Dual> for f64 {
    type Output = Dual;
    fn mul(self, rhs: Dual) -> Dual {
        rhs * self
    }
}

impl Div<Dual> for f64 {
    type Output = Dual;
    fn div(self, rhs: Dual) -> Dual {
        Dual::constant(self) / rhs
    }
}

/// Scalar contract shared by `f64` and [`Dual`].
///
/// Objectives written once against this trait serve both plain evaluation
/// and tangent propagation from the same code path, so a function and its
/// derivative cannot drift apart.
pub trait Scalar:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn from_f64(c: f64) -> Self;
    /// The value channel (identity for `f64`).
    fn value(self) -> f64;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sqrt(self) -> Self;
    fn abs(self) -> Self;
    fn powi(self, n: i32) -> Self;
}

impl Scalar for f64 {
    fn from_f64(c: f64) -> Self {
        c
    }
    fn value(self) -> f64 {
        self
    }
    fn sin(self) -> Self {
        f64::sin(self)
    }
    fn cos(self) -> Self {
        f64::cos(self)
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
}

impl Scalar for Dual {
    fn from_f64(c: f64) -> Self {
        Dual::constant(c)
    }
    fn value(self) -> f64 {
        self.value
    }
    fn sin(self) -> Self {
        Dual::sin(self)
    }
    fn cos(self) -> Self {
        Dual::cos(self)
    }
    fn exp(self) -> Self {
        Dual::exp(self)
    }
    fn ln(self) -> Self {
        Dual::ln(self)
    }
    fn sqrt(self) -> Self {
        Dual::sqrt(self)
    }
    fn abs(self) -> Self {
        Dual::abs(self)
    }
    fn powi(self, n: i32) -> Self {
        Dual::powi(self, n)
    }
}

/// Exact directional derivative `pᵀ∇f(x)` from a single dual-valued pass.
pub fn directional_derivative<F>(f: F, x: &DenseVector, p: &DenseVector) -> f64
where
    F: Fn(&[Dual]) -> Dual,
{
    assert_eq!(x.dim(), p.dim(), "directional derivative: dimension mismatch");
    let seeded: Vec<Dual> = x
        .iter()
        .zip(p.iter())
        .map(|(&xi, &pi)| Dual::new(xi, pi))
        .collect();
    f(&seeded).tangent
}
