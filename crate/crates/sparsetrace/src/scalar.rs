//! The generic number interface that traceable programs are written
//! against.
//!
//! A program parameterized over [`Scalar`] can run unchanged on plain
//! `f64`, on dependency tracers, on value-aware tracers, and on
//! forward-mode dual numbers. The trait deliberately has a tiny required
//! core: lifting constants, applying a classified unary or binary operator,
//! a two-way select, and value comparisons. The whole named surface
//! (`exp`, `max`, `powi`, ...) derives from the core by pairing each method
//! with its classification entry, so a number type that implements
//! `apply_unary`/`apply_binary` supports every current and future
//! registered operator.

use crate::ops::{self, BinaryOp, UnaryOp};
use std::ops::{Add, Div, Mul, Neg, Sub};

/// A number a traced program can compute with.
///
/// Comparisons return plain `bool`s because programs branch on them.
/// Value-carrying kinds answer from their values; dependency-only tracers
/// have no value to consult and fail the trace instead (see
/// `MissingPrimal` in the tracer module).
pub trait Scalar:
    Clone
    + std::fmt::Debug
    + Sized
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    /// Lifts a constant. Constants depend on no inputs.
    fn from_f64(c: f64) -> Self;

    /// Applies a classified unary operator.
    fn apply_unary(self, op: &UnaryOp) -> Self;

    /// Applies a classified binary operator; `self` is the first argument.
    fn apply_binary(self, other: Self, op: &BinaryOp) -> Self;

    /// Two-way choice. Value-aware kinds return the chosen branch;
    /// dependency-only tracers conservatively keep both, since the branch
    /// taken may vary over the input domain.
    fn select(cond: bool, if_true: Self, if_false: Self) -> Self;

    /// `self < other` on values.
    fn lt(&self, other: &Self) -> bool;

    /// `self <= other` on values.
    fn le(&self, other: &Self) -> bool;

    /// `self == other` on values.
    fn value_eq(&self, other: &Self) -> bool;

    /// Whether the value is exactly zero.
    fn is_zero(&self) -> bool;

    /// Whether the value is finite.
    fn is_finite(&self) -> bool;

    fn gt(&self, other: &Self) -> bool {
        other.lt(self)
    }

    fn ge(&self, other: &Self) -> bool {
        other.le(self)
    }

    fn value_ne(&self, other: &Self) -> bool {
        !self.value_eq(other)
    }

    fn abs(self) -> Self {
        self.apply_unary(&ops::ABS)
    }

    fn sqrt(self) -> Self {
        self.apply_unary(&ops::SQRT)
    }

    fn exp(self) -> Self {
        self.apply_unary(&ops::EXP)
    }

    /// Natural logarithm.
    fn ln(self) -> Self {
        self.apply_unary(&ops::LOG)
    }

    fn sin(self) -> Self {
        self.apply_unary(&ops::SIN)
    }

    fn cos(self) -> Self {
        self.apply_unary(&ops::COS)
    }

    fn tan(self) -> Self {
        self.apply_unary(&ops::TAN)
    }

    fn tanh(self) -> Self {
        self.apply_unary(&ops::TANH)
    }

    fn signum(self) -> Self {
        self.apply_unary(&ops::SIGN)
    }

    fn floor(self) -> Self {
        self.apply_unary(&ops::FLOOR)
    }

    fn ceil(self) -> Self {
        self.apply_unary(&ops::CEIL)
    }

    fn round(self) -> Self {
        self.apply_unary(&ops::ROUND)
    }

    fn max(self, other: Self) -> Self {
        self.apply_binary(other, &ops::MAX)
    }

    fn min(self, other: Self) -> Self {
        self.apply_binary(other, &ops::MIN)
    }

    /// Power with a variable exponent; all five derivative slots of the
    /// classification are live.
    fn powf(self, exponent: Self) -> Self {
        self.apply_binary(exponent, &ops::POW)
    }

    /// Power with a constant integer exponent, lowered to repeated
    /// multiplication. `x.powi(3)` classifies like `x * x * x`, which is
    /// much tighter than routing through the variable-exponent operator.
    fn powi(self, exponent: i32) -> Self {
        if exponent == 0 {
            return Self::from_f64(1.0);
        }
        let mut acc = self.clone();
        for _ in 1..exponent.unsigned_abs() {
            acc = acc * self.clone();
        }
        if exponent < 0 {
            Self::from_f64(1.0) / acc
        } else {
            acc
        }
    }
}

impl Scalar for f64 {
    fn from_f64(c: f64) -> Self {
        c
    }

    fn apply_unary(self, op: &UnaryOp) -> Self {
        (op.f)(self)
    }

    fn apply_binary(self, other: Self, op: &BinaryOp) -> Self {
        (op.f)(self, other)
    }

    fn select(cond: bool, if_true: Self, if_false: Self) -> Self {
        if cond {
            if_true
        } else {
            if_false
        }
    }

    fn lt(&self, other: &Self) -> bool {
        self < other
    }

    fn le(&self, other: &Self) -> bool {
        self <= other
    }

    fn value_eq(&self, other: &Self) -> bool {
        self == other
    }

    fn is_zero(&self) -> bool {
        *self == 0.0
    }

    fn is_finite(&self) -> bool {
        f64::is_finite(*self)
    }
}
