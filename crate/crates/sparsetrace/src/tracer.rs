//! Tracer number types. Running a program on tracers instead of floats
//! records which inputs each result can depend on.
//!
//! [`GradientTracer`] carries a set of input indices: the inputs whose
//! perturbation can change this value. [`HessianTracer`] additionally
//! carries a symmetric set of index pairs: the second-order interactions.
//! Both are *global* tracers: they know nothing about input values, so the
//! patterns they produce hold over the whole input domain.
//!
//! [`LocalTracer`] wraps either of them together with a primal value. It
//! propagates values alongside dependencies and consults the value-aware
//! operator classifications, producing tighter patterns that are valid near
//! the evaluation point only.
//!
//! Propagation follows the operator classification. For a binary operator
//! `φ(a, b)` with first-order flags `d1, d2`, the result's index set is the
//! union of the operand sets whose flag is live. The second-order rule adds
//! pair contributions: carried operand pairs under `d1`/`d2`, and products
//! of operand index sets under `d11`/`d22`/`d12`.

use crate::ops::{BinaryOp, UnaryOp};
use crate::sets::{PairSet, PatternSet, SetError};
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::panic::Location;

/// Raised (as a panic payload, converted to an error at the detection
/// boundary) when a program asks a global tracer for its value, typically
/// by comparing two tracers to decide a branch.
#[derive(Debug, Clone)]
pub struct MissingPrimal {
    /// Name of the operation that needed a value, e.g. `"lt"`.
    pub op: &'static str,
    /// Source location of the offending call.
    pub location: &'static Location<'static>,
}

impl fmt::Display for MissingPrimal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "`{}` at {} needs an argument value, but global tracers carry only \
             dependency sets; trace with value-aware tracers (local mode) instead",
            self.op, self.location
        )
    }
}

#[track_caller]
fn missing_primal(op: &'static str) -> ! {
    std::panic::panic_any(MissingPrimal {
        op,
        location: Location::caller(),
    });
}

/// Installs a process-wide panic hook that keeps [`MissingPrimal`] unwinds
/// quiet; they are caught and surfaced as errors by the detection entry
/// points. Other panics pass through untouched. Idempotent.
pub(crate) fn install_missing_primal_hook() {
    use std::sync::Once;
    static ONCE: Once = Once::new();
    ONCE.call_once(|| {
        let previous = std::panic::take_hook();
        std::panic::set_hook(Box::new(move |info| {
            if info.payload().downcast_ref::<MissingPrimal>().is_none() {
                previous(info);
            }
        }));
    });
}

/// Resolved derivative flags for one operator application. For unary
/// operators only `d1` and `d11` are meaningful.
#[derive(Debug, Clone, Copy)]
pub struct SecondOrderFlags {
    pub d1: bool,
    pub d2: bool,
    pub d11: bool,
    pub d22: bool,
    pub d12: bool,
}

impl SecondOrderFlags {
    /// Global flags of a binary operator.
    pub fn global_binary(op: &BinaryOp) -> Self {
        SecondOrderFlags {
            d1: op.d1.is_nonzero(),
            d2: op.d2.is_nonzero(),
            d11: op.d11.is_nonzero(),
            d22: op.d22.is_nonzero(),
            d12: op.d12.is_nonzero(),
        }
    }

    /// Global flags of a unary operator.
    pub fn global_unary(op: &UnaryOp) -> Self {
        SecondOrderFlags {
            d1: op.d1.is_nonzero(),
            d2: false,
            d11: op.d11.is_nonzero(),
            d22: false,
            d12: false,
        }
    }

    /// Value-aware flags of a binary operator at `(a, b)`.
    pub fn local_binary(op: &BinaryOp, a: f64, b: f64) -> Self {
        SecondOrderFlags {
            d1: op.local_d1.resolve(a, b),
            d2: op.local_d2.resolve(a, b),
            d11: op.local_d11.resolve(a, b),
            d22: op.local_d22.resolve(a, b),
            d12: op.local_d12.resolve(a, b),
        }
    }

    /// Value-aware flags of a unary operator at `a`.
    pub fn local_unary(op: &UnaryOp, a: f64) -> Self {
        SecondOrderFlags {
            d1: op.local_d1.resolve(a),
            d2: false,
            d11: op.local_d11.resolve(a),
            d22: false,
            d12: false,
        }
    }
}

/// First-order propagation for a unary operator with resolved flag `d1`.
pub fn propagate_first_order_unary<S: PatternSet>(d1: bool, a: &S) -> S {
    if d1 {
        a.clone()
    } else {
        S::empty(a.capacity())
    }
}

/// First-order propagation for a binary operator with resolved flags.
/// Both operand sets must share a capacity.
pub fn propagate_first_order<S: PatternSet>(
    d1: bool,
    a: &S,
    d2: bool,
    b: &S,
) -> Result<S, SetError> {
    Ok(match (d1, d2) {
        (true, true) => a.union(b)?,
        (true, false) => a.clone(),
        (false, true) => b.clone(),
        (false, false) => S::empty(a.capacity()),
    })
}

/// Second-order propagation for a unary operator: carried pairs under `d1`,
/// plus the self-product of the operand's index set under `d11`.
pub fn propagate_second_order_unary<S: PatternSet>(
    flags: SecondOrderFlags,
    a_grad: &S,
    a_pairs: &PairSet<S>,
) -> Result<(S, PairSet<S>), SetError> {
    let grad = propagate_first_order_unary(flags.d1, a_grad);
    let mut pairs = if flags.d1 {
        a_pairs.clone()
    } else {
        PairSet::empty(a_grad.capacity())
    };
    if flags.d11 {
        pairs = pairs.union(&PairSet::product(a_grad, a_grad)?)?;
    }
    Ok((grad, pairs))
}

/// Second-order propagation for a binary operator. All sets must share a
/// capacity.
pub fn propagate_second_order<S: PatternSet>(
    flags: SecondOrderFlags,
    a_grad: &S,
    a_pairs: &PairSet<S>,
    b_grad: &S,
    b_pairs: &PairSet<S>,
) -> Result<(S, PairSet<S>), SetError> {
    let grad = propagate_first_order(flags.d1, a_grad, flags.d2, b_grad)?;
    let mut pairs = PairSet::empty(a_grad.capacity());
    if flags.d1 {
        pairs = pairs.union(a_pairs)?;
    }
    if flags.d2 {
        pairs = pairs.union(b_pairs)?;
    }
    if flags.d11 {
        pairs = pairs.union(&PairSet::product(a_grad, a_grad)?)?;
    }
    if flags.d22 {
        pairs = pairs.union(&PairSet::product(b_grad, b_grad)?)?;
    }
    if flags.d12 {
        // The product closes symmetrically, covering both cross terms.
        pairs = pairs.union(&PairSet::product(a_grad, b_grad)?)?;
    }
    Ok((grad, pairs))
}

/// Shared behaviour of the two global tracer kinds, so [`LocalTracer`] and
/// `select` can treat them uniformly.
pub trait Tracer: Clone + fmt::Debug {
    /// A tracer for input `index` of a program with `n` inputs.
    fn input(index: usize, n: usize) -> Result<Self, SetError>;

    /// A constant: no dependencies. Constants are capacity-polymorphic
    /// (capacity 0) until combined with an input-derived tracer.
    fn constant() -> Self;

    /// Capacity of the carried sets; 0 for pure constants.
    fn capacity(&self) -> usize;

    /// Applies an operator with resolved flags.
    fn apply_unary_flags(&self, flags: SecondOrderFlags) -> Self;

    /// Applies a binary operator with resolved flags; `self` is the first
    /// argument.
    fn apply_binary_flags(&self, other: &Self, flags: SecondOrderFlags) -> Self;

    /// Union of the carried patterns, for conservative two-way selects.
    fn union_tracer(&self, other: &Self) -> Self;
}

/// Reconciles operand capacities: constants (capacity 0) are neutral and
/// simply drop out of the propagation. Returns the working capacity and
/// whether each operand participates. Mixing two distinct nonzero
/// capacities is a caller bug.
fn reconcile(a: usize, b: usize) -> (usize, bool, bool) {
    let n = a.max(b);
    if a != b {
        assert!(
            a.min(b) == 0,
            "tracers from different programs: capacity {a} vs {b}"
        );
    }
    (n, a == n && n > 0, b == n && n > 0)
}

fn expect_sets<T>(r: Result<T, SetError>) -> T {
    r.expect("operand capacities were reconciled")
}

/// A number that carries the set of input indices it can depend on.
#[derive(Clone)]
pub struct GradientTracer<S: PatternSet> {
    grad: S,
}

impl<S: PatternSet> fmt::Debug for GradientTracer<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GradientTracer({:?})", self.grad.indices())
    }
}

impl<S: PatternSet> GradientTracer<S> {
    /// Wraps an existing index set.
    pub fn from_set(grad: S) -> Self {
        GradientTracer { grad }
    }

    /// The carried index set.
    pub fn gradient(&self) -> &S {
        &self.grad
    }

    /// Sorted indices of the carried set.
    pub fn pattern(&self) -> Vec<usize> {
        self.grad.indices()
    }
}

impl<S: PatternSet> Tracer for GradientTracer<S> {
    fn input(index: usize, n: usize) -> Result<Self, SetError> {
        Ok(GradientTracer {
            grad: S::singleton(index, n)?,
        })
    }

    fn constant() -> Self {
        GradientTracer { grad: S::empty(0) }
    }

    fn capacity(&self) -> usize {
        self.grad.capacity()
    }

    fn apply_unary_flags(&self, flags: SecondOrderFlags) -> Self {
        GradientTracer {
            grad: propagate_first_order_unary(flags.d1, &self.grad),
        }
    }

    fn apply_binary_flags(&self, other: &Self, flags: SecondOrderFlags) -> Self {
        let (n, live_a, live_b) = reconcile(self.capacity(), other.capacity());
        let grad = match (flags.d1 && live_a, flags.d2 && live_b) {
            (true, true) => expect_sets(self.grad.union(&other.grad)),
            (true, false) => self.grad.clone(),
            (false, true) => other.grad.clone(),
            (false, false) => S::empty(n),
        };
        GradientTracer { grad }
    }

    fn union_tracer(&self, other: &Self) -> Self {
        let (n, live_a, live_b) = reconcile(self.capacity(), other.capacity());
        let grad = match (live_a, live_b) {
            (true, true) => expect_sets(self.grad.union(&other.grad)),
            (true, false) => self.grad.clone(),
            (false, true) => other.grad.clone(),
            (false, false) => S::empty(n),
        };
        GradientTracer { grad }
    }
}

/// A number that carries first-order dependencies plus the symmetric set of
/// second-order interaction pairs.
#[derive(Clone)]
pub struct HessianTracer<S: PatternSet> {
    grad: S,
    pairs: PairSet<S>,
}

impl<S: PatternSet> fmt::Debug for HessianTracer<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "HessianTracer(grad: {:?}, pairs: {:?})",
            self.grad.indices(),
            self.pairs.pairs()
        )
    }
}

impl<S: PatternSet> HessianTracer<S> {
    /// Wraps existing sets. They must share a capacity.
    pub fn from_sets(grad: S, pairs: PairSet<S>) -> Result<Self, SetError> {
        if grad.capacity() != pairs.capacity() {
            return Err(SetError::CapacityMismatch {
                left: grad.capacity(),
                right: pairs.capacity(),
            });
        }
        Ok(HessianTracer { grad, pairs })
    }

    /// The first-order index set.
    pub fn gradient(&self) -> &S {
        &self.grad
    }

    /// The second-order pair set.
    pub fn pairs(&self) -> &PairSet<S> {
        &self.pairs
    }
}

impl<S: PatternSet> Tracer for HessianTracer<S> {
    fn input(index: usize, n: usize) -> Result<Self, SetError> {
        Ok(HessianTracer {
            grad: S::singleton(index, n)?,
            pairs: PairSet::empty(n),
        })
    }

    fn constant() -> Self {
        HessianTracer {
            grad: S::empty(0),
            pairs: PairSet::empty(0),
        }
    }

    fn capacity(&self) -> usize {
        self.grad.capacity()
    }

    fn apply_unary_flags(&self, flags: SecondOrderFlags) -> Self {
        let (grad, pairs) =
            expect_sets(propagate_second_order_unary(flags, &self.grad, &self.pairs));
        HessianTracer { grad, pairs }
    }

    fn apply_binary_flags(&self, other: &Self, flags: SecondOrderFlags) -> Self {
        let (n, live_a, live_b) = reconcile(self.capacity(), other.capacity());
        // A constant operand contributes nothing: mask its flags off rather
        // than materializing capacity-n empties for it.
        let f = SecondOrderFlags {
            d1: flags.d1 && live_a,
            d2: flags.d2 && live_b,
            d11: flags.d11 && live_a,
            d22: flags.d22 && live_b,
            d12: flags.d12 && live_a && live_b,
        };
        let empty_grad = S::empty(n);
        let empty_pairs = PairSet::empty(n);
        let (a_grad, a_pairs) = if live_a {
            (&self.grad, &self.pairs)
        } else {
            (&empty_grad, &empty_pairs)
        };
        let (b_grad, b_pairs) = if live_b {
            (&other.grad, &other.pairs)
        } else {
            (&empty_grad, &empty_pairs)
        };
        let (grad, pairs) =
            expect_sets(propagate_second_order(f, a_grad, a_pairs, b_grad, b_pairs));
        HessianTracer { grad, pairs }
    }

    fn union_tracer(&self, other: &Self) -> Self {
        let (n, live_a, live_b) = reconcile(self.capacity(), other.capacity());
        let mut grad = S::empty(n);
        let mut pairs = PairSet::empty(n);
        for (live, t) in [(live_a, self), (live_b, other)] {
            if live {
                grad = expect_sets(grad.union(&t.grad));
                pairs = expect_sets(pairs.union(&t.pairs));
            }
        }
        HessianTracer { grad, pairs }
    }
}

/// A value-aware tracer: a primal value plus a global tracer.
///
/// Operator applications compute the value with the operator's `f` and
/// resolve the *local* classification flags at the operand values, so, for
/// example, `max` only keeps the winning argument and comparisons answer
/// normally instead of failing the trace.
#[derive(Clone)]
pub struct LocalTracer<T: Tracer> {
    value: f64,
    inner: T,
}

impl<T: Tracer> fmt::Debug for LocalTracer<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LocalTracer(value: {}, {:?})", self.value, self.inner)
    }
}

impl<T: Tracer> LocalTracer<T> {
    /// A value-aware tracer for input `index` with primal `value`.
    pub fn input(value: f64, index: usize, n: usize) -> Result<Self, SetError> {
        Ok(LocalTracer {
            value,
            inner: T::input(index, n)?,
        })
    }

    /// The primal value.
    pub fn value(&self) -> f64 {
        self.value
    }

    /// The carried global tracer.
    pub fn inner(&self) -> &T {
        &self.inner
    }
}

macro_rules! scalar_std_ops {
    ($ty:ident, $bound:ident) => {
        impl<T: $bound> Add for $ty<T> {
            type Output = Self;
            fn add(self, rhs: Self) -> Self {
                self.apply_binary(rhs, &crate::ops::ADD)
            }
        }

        impl<T: $bound> Sub for $ty<T> {
            type Output = Self;
            fn sub(self, rhs: Self) -> Self {
                self.apply_binary(rhs, &crate::ops::SUB)
            }
        }

        impl<T: $bound> Mul for $ty<T> {
            type Output = Self;
            fn mul(self, rhs: Self) -> Self {
                self.apply_binary(rhs, &crate::ops::MUL)
            }
        }

        impl<T: $bound> Div for $ty<T> {
            type Output = Self;
            fn div(self, rhs: Self) -> Self {
                self.apply_binary(rhs, &crate::ops::DIV)
            }
        }

        impl<T: $bound> Neg for $ty<T> {
            type Output = Self;
            fn neg(self) -> Self {
                self.apply_unary(&crate::ops::NEG)
            }
        }
    };
}

use crate::scalar::Scalar;

scalar_std_ops!(GradientTracer, PatternSet);
scalar_std_ops!(HessianTracer, PatternSet);
scalar_std_ops!(LocalTracer, Tracer);

macro_rules! global_tracer_scalar {
    ($ty:ident) => {
        impl<S: PatternSet> Scalar for $ty<S> {
            fn from_f64(_c: f64) -> Self {
                <Self as Tracer>::constant()
            }

            fn apply_unary(self, op: &UnaryOp) -> Self {
                self.apply_unary_flags(SecondOrderFlags::global_unary(op))
            }

            fn apply_binary(self, other: Self, op: &BinaryOp) -> Self {
                self.apply_binary_flags(&other, SecondOrderFlags::global_binary(op))
            }

            /// Keeps both branches: without values the taken branch is
            /// unknowable, and it may differ across the domain.
            fn select(_cond: bool, if_true: Self, if_false: Self) -> Self {
                if_true.union_tracer(&if_false)
            }

            #[track_caller]
            fn lt(&self, _other: &Self) -> bool {
                missing_primal("lt")
            }

            #[track_caller]
            fn le(&self, _other: &Self) -> bool {
                missing_primal("le")
            }

            #[track_caller]
            fn value_eq(&self, _other: &Self) -> bool {
                missing_primal("value_eq")
            }

            #[track_caller]
            fn is_zero(&self) -> bool {
                missing_primal("is_zero")
            }

            #[track_caller]
            fn is_finite(&self) -> bool {
                missing_primal("is_finite")
            }
        }
    };
}

global_tracer_scalar!(GradientTracer);
global_tracer_scalar!(HessianTracer);

impl<T: Tracer> Scalar for LocalTracer<T> {
    fn from_f64(c: f64) -> Self {
        LocalTracer {
            value: c,
            inner: T::constant(),
        }
    }

    fn apply_unary(self, op: &UnaryOp) -> Self {
        let flags = SecondOrderFlags::local_unary(op, self.value);
        LocalTracer {
            value: (op.f)(self.value),
            inner: self.inner.apply_unary_flags(flags),
        }
    }

    fn apply_binary(self, other: Self, op: &BinaryOp) -> Self {
        let flags = SecondOrderFlags::local_binary(op, self.value, other.value);
        LocalTracer {
            value: (op.f)(self.value, other.value),
            inner: self.inner.apply_binary_flags(&other.inner, flags),
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
