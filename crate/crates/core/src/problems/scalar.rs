//! Number-like types the generating formulas are written against: plain
//! floats, intervals, and forward-mode dual numbers over either.

use core::ops::{Add, Div, Mul, Neg, Sub};

use crate::interval::{Interval, UnaryFn};
use crate::math;

pub trait Scalar:
    Clone
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn cst(v: f64) -> Self;
    fn sqrt(self) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn tanh(self) -> Self;
    fn asin(self) -> Self;
    fn powi(self, k: i32) -> Self;
}

impl Scalar for f64 {
    fn cst(v: f64) -> Self {
        v
    }
    fn sqrt(self) -> Self {
        math::sqrt(self)
    }
    fn exp(self) -> Self {
        math::exp(self)
    }
    fn ln(self) -> Self {
        math::ln(self)
    }
    fn sin(self) -> Self {
        math::sin(self)
    }
    fn cos(self) -> Self {
        math::cos(self)
    }
    fn tanh(self) -> Self {
        math::tanh(self)
    }
    fn asin(self) -> Self {
        math::asin(self)
    }
    fn powi(self, k: i32) -> Self {
        math::powi(self, k)
    }
}

impl Scalar for Interval {
    fn cst(v: f64) -> Self {
        Interval::point(v)
    }
    fn sqrt(self) -> Self {
        self.unary(UnaryFn::Sqrt)
    }
    fn exp(self) -> Self {
        self.unary(UnaryFn::Exp)
    }
    fn ln(self) -> Self {
        self.unary(UnaryFn::Log)
    }
    fn sin(self) -> Self {
        self.unary(UnaryFn::Sin)
    }
    fn cos(self) -> Self {
        self.unary(UnaryFn::Cos)
    }
    fn tanh(self) -> Self {
        self.unary(UnaryFn::Tanh)
    }
    fn asin(self) -> Self {
        Interval::asin(self)
    }
    fn powi(self, k: i32) -> Self {
        self.pow_int(k)
    }
}

/// Value and directional derivative.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dual<T> {
    pub v: T,
    pub d: T,
}

impl<T: Scalar> Dual<T> {
    pub fn var(v: T) -> Self {
        Dual { v, d: T::cst(1.0) }
    }

    pub fn constant(v: T) -> Self {
        Dual { v, d: T::cst(0.0) }
    }

    fn chain(self, v: T, dv: T) -> Self {
        Dual { v, d: dv * self.d }
    }
}

impl<T: Scalar> Add for Dual<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Dual {
            v: self.v + o.v,
            d: self.d + o.d,
        }
    }
}

impl<T: Scalar> Sub for Dual<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Dual {
            v: self.v - o.v,
            d: self.d - o.d,
        }
    }
}

impl<T: Scalar> Mul for Dual<T> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Dual {
            v: self.v.clone() * o.v.clone(),
            d: self.d * o.v + self.v * o.d,
        }
    }
}

impl<T: Scalar> Div for Dual<T> {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        let q = self.v / o.v.clone();
        Dual {
            v: q.clone(),
            d: (self.d - q * o.d) / o.v,
        }
    }
}

impl<T: Scalar> Neg for Dual<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Dual {
            v: -self.v,
            d: -self.d,
        }
    }
}

impl<T: Scalar> Scalar for Dual<T> {
    fn cst(v: f64) -> Self {
        Dual::constant(T::cst(v))
    }
    fn sqrt(self) -> Self {
        let s = self.v.clone().sqrt();
        self.chain(s.clone(), T::cst(0.5) / s)
    }
    fn exp(self) -> Self {
        let e = self.v.clone().exp();
        self.chain(e.clone(), e)
    }
    fn ln(self) -> Self {
        let v = self.v.clone();
        self.chain(v.clone().ln(), T::cst(1.0) / v)
    }
    fn sin(self) -> Self {
        let v = self.v.clone();
        self.chain(v.clone().sin(), v.cos())
    }
    fn cos(self) -> Self {
        let v = self.v.clone();
        self.chain(v.clone().cos(), -v.sin())
    }
    fn tanh(self) -> Self {
        let t = self.v.clone().tanh();
        self.chain(t.clone(), T::cst(1.0) - t.powi(2))
    }
    fn asin(self) -> Self {
        let v = self.v.clone();
        self.chain(
            v.clone().asin(),
            T::cst(1.0) / (T::cst(1.0) - v.powi(2)).sqrt(),
        )
    }
    fn powi(self, k: i32) -> Self {
        let v = self.v.clone();
        if k == 0 {
            return Dual::cst(1.0);
        }
        self.chain(v.clone().powi(k), T::cst(k as f64) * v.powi(k - 1))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dual_matches_hand_derivatives() {
        // d/dx [x^3 / sqrt(x)] = 2.5 x^1.5
        let x = Dual::var(2.0);
        let f = x.powi(3) / x.sqrt();
        assert!((f.d - 2.5 * libm::pow(2.0, 1.5)).abs() < 1e-12);
        // d/dx asin(x/2) = 1 / sqrt(4 - x^2)
        let g = (Dual::var(1.0) / Dual::cst(2.0)).asin();
        assert!((g.d - 1.0 / libm::sqrt(3.0)).abs() < 1e-12);
        // second derivative of tanh via nested duals: -2 tanh (1 - tanh^2)
        let x = Dual {
            v: Dual::var(0.3),
            d: Dual::cst(1.0),
        };
        let h = x.tanh();
        let t = libm::tanh(0.3);
        assert!((h.d.d + 2.0 * t * (1.0 - t * t)).abs() < 1e-12);
    }

    #[test]
    fn dual_interval_encloses_pointwise_derivative() {
        let x = Dual::var(Interval::new(1.0, 2.0));
        let f = (x * x).ln() + x.exp();
        for i in 0..=20 {
            let p = 1.0 + i as f64 / 20.0;
            let d = 2.0 / p + libm::exp(p);
            assert!(f.d.contains_with_slack(d, 1e-12));
        }
    }
}
