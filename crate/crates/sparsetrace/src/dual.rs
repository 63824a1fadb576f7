//! Forward-mode dual numbers: first-order with a vector of directional
//! derivatives, and second-order with a symmetric block of second
//! directionals.
//!
//! Both kinds evaluate operators through the same classification table the
//! tracers use, so a registered custom operator differentiates without any
//! extra plumbing. Constants are represented with *empty* derivative parts
//! and broadcast against any seeding width; mixing two non-constant widths
//! is a programming error and panics.

use crate::matrix::Mat;
use crate::ops::{BinaryOp, UnaryOp};
use crate::scalar::Scalar;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// A value plus its derivatives along `k` seed directions.
///
/// Seeding input `x_j` with the `j`-th unit vector makes `partials[j]` the
/// plain partial derivative; seeding with a column block of an arbitrary
/// matrix `S` computes `J * S` one row at a time.
#[derive(Debug, Clone, PartialEq)]
pub struct Dual {
    value: f64,
    partials: Vec<f64>,
}

impl Dual {
    /// A constant: no derivative in any direction, any width.
    pub fn constant(value: f64) -> Self {
        Dual {
            value,
            partials: Vec::new(),
        }
    }

    /// A variable carrying the given directional derivatives.
    pub fn with_partials(value: f64, partials: Vec<f64>) -> Self {
        Dual { value, partials }
    }

    /// A variable seeded with unit direction `j` out of `k`.
    pub fn seeded(value: f64, j: usize, k: usize) -> Self {
        assert!(j < k, "seed index out of range");
        let mut partials = vec![0.0; k];
        partials[j] = 1.0;
        Dual { value, partials }
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    /// Directional derivatives; empty for constants.
    pub fn partials(&self) -> &[f64] {
        &self.partials
    }

    /// The derivative along direction `j`, treating constants as zero
    /// everywhere.
    pub fn partial(&self, j: usize) -> f64 {
        self.partials.get(j).copied().unwrap_or(0.0)
    }
}

/// Common width of two derivative parts, where empty means constant.
fn joint_width(a: usize, b: usize) -> usize {
    match (a, b) {
        (0, n) | (n, 0) => n,
        (n, m) => {
            assert_eq!(n, m, "dual numbers seeded with different widths");
            n
        }
    }
}

fn at(p: &[f64], i: usize) -> f64 {
    p.get(i).copied().unwrap_or(0.0)
}

impl Scalar for Dual {
    fn from_f64(c: f64) -> Self {
        Dual::constant(c)
    }

    fn apply_unary(self, op: &UnaryOp) -> Self {
        let d = (op.df)(self.value);
        Dual {
            value: (op.f)(self.value),
            partials: self.partials.iter().map(|p| d * p).collect(),
        }
    }

    fn apply_binary(self, other: Self, op: &BinaryOp) -> Self {
        let (av, bv) = (self.value, other.value);
        let k = joint_width(self.partials.len(), other.partials.len());
        let (d1, d2) = ((op.df1)(av, bv), (op.df2)(av, bv));
        let partials = (0..k)
            .map(|i| d1 * at(&self.partials, i) + d2 * at(&other.partials, i))
            .collect();
        Dual {
            value: (op.f)(av, bv),
            partials,
        }
    }

    fn select(cond: bool, if_true: Self, if_false: Self) -> Self {
        if cond {
            if_true
        } else {
            if_false
        }
    }

    fn lt(&self, other: &Self) -> bool {
        self.value < other.value
    }

    fn le(&self, other: &Self) -> bool {
        self.value <= other.value
    }

    fn value_eq(&self, other: &Self) -> bool {
        self.value == other.value
    }

    fn is_zero(&self) -> bool {
        self.value == 0.0
    }

    fn is_finite(&self) -> bool {
        self.value.is_finite()
    }
}

/// A value, its gradient along `k` seed directions, and the symmetric
/// `k x k` matrix of second derivatives along direction pairs.
///
/// Seeding inputs with directions `s_1 .. s_k` makes `second[(p, q)]` equal
/// to `s_p' H s_q`. The block is updated with symmetric formulas, so it
/// stays exactly symmetric bit for bit.
#[derive(Debug, Clone, PartialEq)]
pub struct SecondOrderDual {
    value: f64,
    first: Vec<f64>,
    second: Mat<f64>,
}

impl SecondOrderDual {
    pub fn constant(value: f64) -> Self {
        SecondOrderDual {
            value,
            first: Vec::new(),
            second: Mat::zeros(0, 0),
        }
    }

    /// A variable with first-order part `first` and no curvature yet.
    pub fn with_first(value: f64, first: Vec<f64>) -> Self {
        let k = first.len();
        SecondOrderDual {
            value,
            first,
            second: Mat::zeros(k, k),
        }
    }

    /// A variable seeded with unit direction `j` out of `k`.
    pub fn seeded(value: f64, j: usize, k: usize) -> Self {
        assert!(j < k, "seed index out of range");
        let mut first = vec![0.0; k];
        first[j] = 1.0;
        SecondOrderDual::with_first(value, first)
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn first(&self) -> &[f64] {
        &self.first
    }

    /// Second derivatives along direction pairs; `0 x 0` for constants.
    pub fn second(&self) -> &Mat<f64> {
        &self.second
    }
}

impl Scalar for SecondOrderDual {
    fn from_f64(c: f64) -> Self {
        SecondOrderDual::constant(c)
    }

    fn apply_unary(self, op: &UnaryOp) -> Self {
        let k = self.first.len();
        let (d, dd) = ((op.df)(self.value), (op.ddf)(self.value));
        let first: Vec<f64> = self.first.iter().map(|p| d * p).collect();
        // The product of the two first-order parts is grouped so swapping
        // (i, j) commutes multiplications instead of reassociating them;
        // that keeps the block symmetric bit for bit.
        let second = Mat::from_fn(k, k, |i, j| {
            d * self.second[(i, j)] + dd * (self.first[i] * self.first[j])
        });
        SecondOrderDual {
            value: (op.f)(self.value),
            first,
            second,
        }
    }

    fn apply_binary(self, other: Self, op: &BinaryOp) -> Self {
        let (av, bv) = (self.value, other.value);
        let k = joint_width(self.first.len(), other.first.len());
        let (d1, d2) = ((op.df1)(av, bv), (op.df2)(av, bv));
        let (d11, d22, d12) = ((op.d11f)(av, bv), (op.d22f)(av, bv), (op.d12f)(av, bv));
        let fa = |i| at(&self.first, i);
        let fb = |i| at(&other.first, i);
        let sa = |i, j| {
            if self.first.is_empty() {
                0.0
            } else {
                self.second[(i, j)]
            }
        };
        let sb = |i, j| {
            if other.first.is_empty() {
                0.0
            } else {
                other.second[(i, j)]
            }
        };
        let first = (0..k).map(|i| d1 * fa(i) + d2 * fb(i)).collect();
        // Grouping as in apply_unary: every term is invariant bit for bit
        // under swapping (i, j), so symmetry is preserved exactly.
        let second = Mat::from_fn(k, k, |i, j| {
            d1 * sa(i, j)
                + d2 * sb(i, j)
                + d11 * (fa(i) * fa(j))
                + d22 * (fb(i) * fb(j))
                + d12 * (fa(i) * fb(j) + fa(j) * fb(i))
        });
        SecondOrderDual {
            value: (op.f)(av, bv),
            first,
            second,
        }
    }

    fn select(cond: bool, if_true: Self, if_false: Self) -> Self {
        if cond {
            if_true
        } else {
            if_false
        }
    }

    fn lt(&self, other: &Self) -> bool {
        self.value < other.value
    }

    fn le(&self, other: &Self) -> bool {
        self.value <= other.value
    }

    fn value_eq(&self, other: &Self) -> bool {
        self.value == other.value
    }

    fn is_zero(&self) -> bool {
        self.value == 0.0
    }

    fn is_finite(&self) -> bool {
        self.value.is_finite()
    }
}

macro_rules! dual_std_ops {
    ($ty:ident) => {
        impl Add for $ty {
            type Output = Self;
            fn add(self, rhs: Self) -> Self {
                self.apply_binary(rhs, &crate::ops::ADD)
            }
        }

        impl Sub for $ty {
            type Output = Self;
            fn sub(self, rhs: Self) -> Self {
                self.apply_binary(rhs, &crate::ops::SUB)
            }
        }

        impl Mul for $ty {
            type Output = Self;
            fn mul(self, rhs: Self) -> Self {
                self.apply_binary(rhs, &crate::ops::MUL)
            }
        }

        impl Div for $ty {
            type Output = Self;
            fn div(self, rhs: Self) -> Self {
                self.apply_binary(rhs, &crate::ops::DIV)
            }
        }

        impl Neg for $ty {
            type Output = Self;
            fn neg(self) -> Self {
                self.apply_unary(&crate::ops::NEG)
            }
        }
    };
}

dual_std_ops!(Dual);
dual_std_ops!(SecondOrderDual);

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) {
        assert!((a - b).abs() < 1e-12, "{a} vs {b}");
    }

    #[test]
    fn single_direction_matches_hand_derivatives() {
        let x = Dual::seeded(0.5, 0, 1);
        let y = x.clone().sin() + x.clone() * x.clone();
        close(y.value(), 0.5_f64.sin() + 0.25);
        close(y.partial(0), 0.5_f64.cos() + 1.0);
    }

    #[test]
    fn constants_broadcast_against_any_width() {
        let x = Dual::seeded(2.0, 1, 3);
        let y = Dual::constant(10.0) * x + Dual::constant(1.0);
        close(y.value(), 21.0);
        assert_eq!(y.partials(), &[0.0, 10.0, 0.0]);
        // Constant-only arithmetic stays width zero.
        let c = Dual::constant(2.0) + Dual::constant(3.0);
        assert!(c.partials().is_empty());
    }

    #[test]
    #[should_panic(expected = "different widths")]
    fn mixed_widths_panic() {
        let a = Dual::seeded(1.0, 0, 2);
        let b = Dual::seeded(1.0, 0, 3);
        let _ = a + b;
    }

    #[test]
    fn multiple_directions_form_jacobian_rows() {
        // f(x0, x1) = x0 * x1 with both unit seeds at once.
        let x0 = Dual::seeded(3.0, 0, 2);
        let x1 = Dual::seeded(4.0, 1, 2);
        let y = x0 * x1;
        close(y.value(), 12.0);
        assert_eq!(y.partials(), &[4.0, 3.0]);
    }

    #[test]
    fn division_and_powi_derivatives() {
        let x = Dual::seeded(2.0, 0, 1);
        let y = Dual::constant(1.0) / x.clone();
        close(y.partial(0), -0.25);
        let z = x.powi(3);
        close(z.value(), 8.0);
        close(z.partial(0), 12.0);
    }

    #[test]
    fn max_uses_the_winning_branch_derivative() {
        let a = Dual::seeded(2.0, 0, 2);
        let b = Dual::seeded(5.0, 1, 2);
        let y = a.max(b);
        close(y.value(), 5.0);
        assert_eq!(y.partials(), &[0.0, 1.0]);
    }

    #[test]
    fn second_order_single_direction_is_a_second_derivative() {
        // f(x) = exp(2x) at x = 0.3: f'' = 4 exp(2x).
        let x = SecondOrderDual::seeded(0.3, 0, 1);
        let y = (SecondOrderDual::constant(2.0) * x).exp();
        close(y.value(), 0.6_f64.exp());
        close(y.first()[0], 2.0 * 0.6_f64.exp());
        close(y.second()[(0, 0)], 4.0 * 0.6_f64.exp());
    }

    #[test]
    fn second_order_cross_terms_match_the_product_rule() {
        // f(x0, x1) = x0 * x1: H = [[0, 1], [1, 0]].
        let x0 = SecondOrderDual::seeded(3.0, 0, 2);
        let x1 = SecondOrderDual::seeded(4.0, 1, 2);
        let y = x0 * x1;
        close(y.second()[(0, 0)], 0.0);
        close(y.second()[(0, 1)], 1.0);
        close(y.second()[(1, 0)], 1.0);
        close(y.second()[(1, 1)], 0.0);
    }

    #[test]
    fn second_order_chain_rule_through_division() {
        // f(x) = 1 / x at x = 2: f' = -1/4, f'' = 1/4.
        let x = SecondOrderDual::seeded(2.0, 0, 1);
        let y = SecondOrderDual::constant(1.0) / x;
        close(y.first()[0], -0.25);
        close(y.second()[(0, 0)], 0.25);
    }

    #[test]
    fn second_block_stays_exactly_symmetric() {
        let x0 = SecondOrderDual::seeded(0.7, 0, 3);
        let x1 = SecondOrderDual::seeded(-1.2, 1, 3);
        let x2 = SecondOrderDual::seeded(0.4, 2, 3);
        let y = (x0.clone() * x1.clone()).sin() * x2.exp() + x0 / x1;
        for i in 0..3 {
            for j in 0..3 {
                // Bitwise equality, not approximate.
                assert_eq!(y.second()[(i, j)], y.second()[(j, i)]);
            }
        }
    }

    #[test]
    fn constant_curvature_is_zero_sized_until_mixed() {
        let c = SecondOrderDual::constant(5.0);
        assert_eq!(c.second().nrows(), 0);
        let x = SecondOrderDual::seeded(1.0, 0, 2);
        let y = c * x;
        assert_eq!(y.second().nrows(), 2);
        close(y.first()[0], 5.0);
    }
}
