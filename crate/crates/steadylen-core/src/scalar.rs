//! Forward-mode automatic differentiation on nestable dual numbers.
//!
//! Every geometric formula in this crate is written once, generically over
//! [`Scalar`]. Lifting an argument to [`Dual`] differentiates the whole
//! pipeline in one direction; nesting `Dual<Dual<…>>` gives higher and mixed
//! derivatives. Curvature needs up to four derivative levels of the metric
//! (∇²R contains fourth derivatives of g), which nesting supplies without
//! any hand-written tensor calculus for the derivatives themselves.

use core::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};

/// Arithmetic interface shared by `f64` and dual numbers.
pub trait Scalar:
    Copy
    + PartialEq
    + core::fmt::Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
{
    fn from_f64(x: f64) -> Self;
    /// Underlying value with every derivative part stripped.
    fn value(self) -> f64;
    fn zero() -> Self {
        Self::from_f64(0.0)
    }
    fn one() -> Self {
        Self::from_f64(1.0)
    }
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn sqrt(self) -> Self;
    fn powi(self, n: i32) -> Self;
}

impl Scalar for f64 {
    fn from_f64(x: f64) -> Self {
        x
    }
    fn value(self) -> f64 {
        self
    }
    fn exp(self) -> Self {
        libm::exp(self)
    }
    fn ln(self) -> Self {
        libm::log(self)
    }
    fn sin(self) -> Self {
        libm::sin(self)
    }
    fn cos(self) -> Self {
        libm::cos(self)
    }
    fn sqrt(self) -> Self {
        libm::sqrt(self)
    }
    fn powi(self, n: i32) -> Self {
        let mut acc = 1.0;
        let mut base = if n < 0 { 1.0 / self } else { self };
        let mut k = n.unsigned_abs();
        while k > 0 {
            if k & 1 == 1 {
                acc *= base;
            }
            base *= base;
            k >>= 1;
        }
        acc
    }
}

/// First-order dual number `a + b·ε` over any scalar, `ε² = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dual<S> {
    pub re: S,
    pub du: S,
}

impl<S: Scalar> Dual<S> {
    pub fn new(re: S, du: S) -> Self {
        Dual { re, du }
    }
    /// Constant lift: derivative part zero.
    pub fn constant(re: S) -> Self {
        Dual {
            re,
            du: S::zero(),
        }
    }
    /// Variable lift: unit derivative part, the seed of differentiation.
    pub fn variable(re: S) -> Self {
        Dual { re, du: S::one() }
    }
}

impl<S: Scalar> Add for Dual<S> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Dual::new(self.re + rhs.re, self.du + rhs.du)
    }
}

impl<S: Scalar> Sub for Dual<S> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Dual::new(self.re - rhs.re, self.du - rhs.du)
    }
}

impl<S: Scalar> Mul for Dual<S> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        Dual::new(self.re * rhs.re, self.re * rhs.du + self.du * rhs.re)
    }
}

impl<S: Scalar> Div for Dual<S> {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        let inv = S::one() / rhs.re;
        Dual::new(
            self.re * inv,
            (self.du * rhs.re - self.re * rhs.du) * inv * inv,
        )
    }
}

impl<S: Scalar> Neg for Dual<S> {
    type Output = Self;
    fn neg(self) -> Self {
        Dual::new(-self.re, -self.du)
    }
}

impl<S: Scalar> AddAssign for Dual<S> {
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}
impl<S: Scalar> SubAssign for Dual<S> {
    fn sub_assign(&mut self, rhs: Self) {
        *self = *self - rhs;
    }
}
impl<S: Scalar> MulAssign for Dual<S> {
    fn mul_assign(&mut self, rhs: Self) {
        *self = *self * rhs;
    }
}
impl<S: Scalar> DivAssign for Dual<S> {
    fn div_assign(&mut self, rhs: Self) {
        *self = *self / rhs;
    }
}

impl<S: Scalar> Scalar for Dual<S> {
    fn from_f64(x: f64) -> Self {
        Dual::constant(S::from_f64(x))
    }
    fn value(self) -> f64 {
        self.re.value()
    }
    fn exp(self) -> Self {
        let e = self.re.exp();
        Dual::new(e, self.du * e)
    }
    fn ln(self) -> Self {
        Dual::new(self.re.ln(), self.du / self.re)
    }
    fn sin(self) -> Self {
        Dual::new(self.re.sin(), self.du * self.re.cos())
    }
    fn cos(self) -> Self {
        Dual::new(self.re.cos(), -self.du * self.re.sin())
    }
    fn sqrt(self) -> Self {
        let r = self.re.sqrt();
        Dual::new(r, self.du / (r + r))
    }
    fn powi(self, n: i32) -> Self {
        let mut acc = Dual::constant(S::one());
        let mut base = if n < 0 {
            Dual::constant(S::one()) / self
        } else {
            self
        };
        let mut k = n.unsigned_abs();
        while k > 0 {
            if k & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            k >>= 1;
        }
        acc
    }
}

/// Derivative of a scalar-to-scalar map at `x`, returning `(f(x), f'(x))`.
pub fn derivative<S: Scalar>(f: impl Fn(Dual<S>) -> Dual<S>, x: S) -> (S, S) {
    let out = f(Dual::variable(x));
    (out.re, out.du)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_derivative_of_composite() {
        // d/dx [exp(sin x) * x^2] at x = 0.7
        let f = |x: Dual<f64>| x.sin().exp() * x * x;
        let (val, der) = derivative(f, 0.7f64);
        let x = 0.7f64;
        let expect_val = libm::exp(libm::sin(x)) * x * x;
        let expect_der =
            libm::exp(libm::sin(x)) * (libm::cos(x) * x * x + 2.0 * x);
        assert!((val - expect_val).abs() < 1e-14);
        assert!((der - expect_der).abs() < 1e-13);
    }

    #[test]
    fn nested_duals_give_second_derivative() {
        // f(x) = ln(1 + x^2), f''(x) = (2 - 2x^2) / (1 + x^2)^2
        let x = 0.4f64;
        let inner = Dual::<f64>::variable(x);
        let outer = Dual::<Dual<f64>>::variable(inner);
        let one = Dual::<Dual<f64>>::from_f64(1.0);
        let y = (one + outer * outer).ln();
        let f2 = y.du.du;
        let expect = (2.0 - 2.0 * x * x) / (1.0 + x * x) / (1.0 + x * x);
        assert!((f2 - expect).abs() < 1e-13);
    }

    #[test]
    fn powi_handles_negative_exponents() {
        let (v, d) = derivative(|x: Dual<f64>| x.powi(-3), 2.0f64);
        assert!((v - 0.125).abs() < 1e-15);
        assert!((d - (-3.0 / 16.0)).abs() < 1e-15);
    }
}
