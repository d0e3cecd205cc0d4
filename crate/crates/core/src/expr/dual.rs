use std::ops::{Add, Div, Mul, Neg, Sub};

use serde::Serialize;

/// Numeric carrier for expression evaluation.
///
/// Implemented for `f64` (plain evaluation) and [`DualValue`] (forward-mode
/// directional derivatives). The evaluator only ever inspects `value()` for
/// domain checks, so both carriers agree on which points are admissible.
pub trait Scalar:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Div<Output = Self> + Neg<Output = Self>
{
    fn constant(v: f64) -> Self;
    fn value(self) -> f64;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sqrt(self) -> Self;
    fn powi(self, n: i32) -> Self;
}

impl Scalar for f64 {
    #[inline]
    fn constant(v: f64) -> Self {
        v
    }
    #[inline]
    fn value(self) -> f64 {
        self
    }
    #[inline]
    fn sin(self) -> Self {
        f64::sin(self)
    }
    #[inline]
    fn cos(self) -> Self {
        f64::cos(self)
    }
    #[inline]
    fn exp(self) -> Self {
        f64::exp(self)
    }
    #[inline]
    fn ln(self) -> Self {
        f64::ln(self)
    }
    #[inline]
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    #[inline]
    fn powi(self, n: i32) -> Self {
        f64::powi(self, n)
    }
}

/// A value together with its derivative along one seed direction.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct DualValue {
    pub value: f64,
    pub derivative: f64,
}

impl DualValue {
    pub const fn new(value: f64, derivative: f64) -> Self {
        Self { value, derivative }
    }
}

impl Add for DualValue {
    type Output = Self;
    #[inline]
    fn add(self, rhs: Self) -> Self {
        Self::new(self.value + rhs.value, self.derivative + rhs.derivative)
    }
}

impl Sub for DualValue {
    type Output = Self;
    #[inline]
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.value - rhs.value, self.derivative - rhs.derivative)
    }
}

impl Mul for DualValue {
    type Output = Self;
    #[inline]
    fn mul(self, rhs: Self) -> Self {
        Self::new(
            self.value * rhs.value,
            self.derivative * rhs.value + self.value * rhs.derivative,
        )
    }
}

impl Div for DualValue {
    type Output = Self;
    #[inline]
    fn div(self, rhs: Self) -> Self {
        let v = self.value / rhs.value;
        Self::new(v, (self.derivative - v * rhs.derivative) / rhs.value)
    }
}

impl Neg for DualValue {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self::new(-self.value, -self.derivative)
    }
}

impl Scalar for DualValue {
    #[inline]
    fn constant(v: f64) -> Self {
        Self::new(v, 0.0)
    }
    #[inline]
    fn value(self) -> f64 {
        self.value
    }
    #[inline]
    fn sin(self) -> Self {
        Self::new(self.value.sin(), self.derivative * self.value.cos())
    }
    #[inline]
    fn cos(self) -> Self {
        Self::new(self.value.cos(), -self.derivative * self.value.sin())
    }
    #[inline]
    fn exp(self) -> Self {
        let e = self.value.exp();
        Self::new(e, self.derivative * e)
    }
    #[inline]
    fn ln(self) -> Self {
        Self::new(self.value.ln(), self.derivative / self.value)
    }
    #[inline]
    fn sqrt(self) -> Self {
        let r = self.value.sqrt();
        Self::new(r, self.derivative / (2.0 * r))
    }
    #[inline]
    fn powi(self, n: i32) -> Self {
        match n {
            0 => Self::new(1.0, 0.0),
            _ => Self::new(
                self.value.powi(n),
                self.derivative * f64::from(n) * self.value.powi(n - 1),
            ),
        }
    }
}
