//! Operator classifications: which partial derivatives of each primitive can
//! be structurally nonzero.
//!
//! A unary operator carries flags for its first and second derivative; a
//! binary operator carries five (`d1`, `d2`, `d11`, `d22`, `d12`). Each flag
//! exists in two forms:
//!
//! * a *global* form, valid at every point of the domain, and
//! * a *local* form, which may be a predicate of the argument values
//!   (for example `d1(max) = [a >= b]`).
//!
//! Derivatives that vanish only on measure-zero sets are classified nonzero
//! in both forms; derivatives that are zero almost everywhere (`floor`,
//! `sign`) are classified zero. Entries also carry the operator's value and
//! derivative functions, so tracer propagation, value-aware tracing, and
//! forward-mode differentiation all read from the same table.

use std::collections::BTreeMap;

/// Whether a partial derivative can be structurally nonzero.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Deriv {
    Zero,
    NonZero,
}

impl Deriv {
    pub fn is_nonzero(self) -> bool {
        matches!(self, Deriv::NonZero)
    }
}

/// Local classification of a unary derivative: fixed, or decided per point.
#[derive(Debug, Clone, Copy)]
pub enum LocalUnary {
    Fixed(Deriv),
    Pred(fn(f64) -> bool),
}

impl LocalUnary {
    /// Resolves the flag at argument value `a`.
    pub fn resolve(&self, a: f64) -> bool {
        match *self {
            LocalUnary::Fixed(d) => d.is_nonzero(),
            LocalUnary::Pred(p) => p(a),
        }
    }
}

/// Local classification of a binary derivative.
#[derive(Debug, Clone, Copy)]
pub enum LocalBinary {
    Fixed(Deriv),
    Pred(fn(f64, f64) -> bool),
}

impl LocalBinary {
    /// Resolves the flag at argument values `(a, b)`.
    pub fn resolve(&self, a: f64, b: f64) -> bool {
        match *self {
            LocalBinary::Fixed(d) => d.is_nonzero(),
            LocalBinary::Pred(p) => p(a, b),
        }
    }
}

/// Classification and evaluation functions for a unary operator.
#[derive(Debug, Clone)]
pub struct UnaryOp {
    pub name: &'static str,
    /// Operator value.
    pub f: fn(f64) -> f64,
    /// First derivative value.
    pub df: fn(f64) -> f64,
    /// Second derivative value.
    pub ddf: fn(f64) -> f64,
    /// Global flag for the first derivative.
    pub d1: Deriv,
    /// Global flag for the second derivative.
    pub d11: Deriv,
    /// Local flag for the first derivative.
    pub local_d1: LocalUnary,
    /// Local flag for the second derivative.
    pub local_d11: LocalUnary,
}

/// Classification and evaluation functions for a binary operator.
///
/// Derivative naming: `df1` is the partial in the first argument, `d12f` the
/// mixed second partial, and so on.
#[derive(Debug, Clone)]
pub struct BinaryOp {
    pub name: &'static str,
    pub f: fn(f64, f64) -> f64,
    pub df1: fn(f64, f64) -> f64,
    pub df2: fn(f64, f64) -> f64,
    pub d11f: fn(f64, f64) -> f64,
    pub d22f: fn(f64, f64) -> f64,
    pub d12f: fn(f64, f64) -> f64,
    pub d1: Deriv,
    pub d2: Deriv,
    pub d11: Deriv,
    pub d22: Deriv,
    pub d12: Deriv,
    pub local_d1: LocalBinary,
    pub local_d2: LocalBinary,
    pub local_d11: LocalBinary,
    pub local_d22: LocalBinary,
    pub local_d12: LocalBinary,
}

const fn fixed_u(d: Deriv) -> LocalUnary {
    LocalUnary::Fixed(d)
}

const fn fixed_b(d: Deriv) -> LocalBinary {
    LocalBinary::Fixed(d)
}

use Deriv::{NonZero, Zero};

macro_rules! unary {
    ($ident:ident, $name:literal, f: $f:expr, df: $df:expr, ddf: $ddf:expr,
     d1: $d1:expr, d11: $d11:expr) => {
        pub static $ident: UnaryOp = UnaryOp {
            name: $name,
            f: $f,
            df: $df,
            ddf: $ddf,
            d1: $d1,
            d11: $d11,
            local_d1: fixed_u($d1),
            local_d11: fixed_u($d11),
        };
    };
}

unary!(NEG, "neg", f: |a| -a, df: |_| -1.0, ddf: |_| 0.0, d1: NonZero, d11: Zero);
unary!(ABS, "abs", f: f64::abs, df: f64::signum, ddf: |_| 0.0, d1: NonZero, d11: Zero);
unary!(SQRT, "sqrt",
    f: f64::sqrt,
    df: |a| 0.5 / a.sqrt(),
    ddf: |a| -0.25 / (a * a.sqrt()),
    d1: NonZero, d11: NonZero);
unary!(EXP, "exp", f: f64::exp, df: f64::exp, ddf: f64::exp, d1: NonZero, d11: NonZero);
unary!(LOG, "log",
    f: f64::ln,
    df: |a| 1.0 / a,
    ddf: |a| -1.0 / (a * a),
    d1: NonZero, d11: NonZero);
unary!(SIN, "sin", f: f64::sin, df: f64::cos, ddf: |a| -a.sin(), d1: NonZero, d11: NonZero);
unary!(COS, "cos", f: f64::cos, df: |a| -a.sin(), ddf: |a| -a.cos(), d1: NonZero, d11: NonZero);
unary!(TAN, "tan",
    f: f64::tan,
    df: |a| {
        let t = a.tan();
        1.0 + t * t
    },
    ddf: |a| {
        let t = a.tan();
        2.0 * t * (1.0 + t * t)
    },
    d1: NonZero, d11: NonZero);
unary!(TANH, "tanh",
    f: f64::tanh,
    df: |a| {
        let t = a.tanh();
        1.0 - t * t
    },
    ddf: |a| {
        let t = a.tanh();
        -2.0 * t * (1.0 - t * t)
    },
    d1: NonZero, d11: NonZero);
unary!(SIGN, "sign", f: f64::signum, df: |_| 0.0, ddf: |_| 0.0, d1: Zero, d11: Zero);
unary!(FLOOR, "floor", f: f64::floor, df: |_| 0.0, ddf: |_| 0.0, d1: Zero, d11: Zero);
unary!(CEIL, "ceil", f: f64::ceil, df: |_| 0.0, ddf: |_| 0.0, d1: Zero, d11: Zero);
unary!(ROUND, "round", f: f64::round, df: |_| 0.0, ddf: |_| 0.0, d1: Zero, d11: Zero);

pub static ADD: BinaryOp = BinaryOp {
    name: "add",
    f: |a, b| a + b,
    df1: |_, _| 1.0,
    df2: |_, _| 1.0,
    d11f: |_, _| 0.0,
    d22f: |_, _| 0.0,
    d12f: |_, _| 0.0,
    d1: NonZero,
    d2: NonZero,
    d11: Zero,
    d22: Zero,
    d12: Zero,
    local_d1: fixed_b(NonZero),
    local_d2: fixed_b(NonZero),
    local_d11: fixed_b(Zero),
    local_d22: fixed_b(Zero),
    local_d12: fixed_b(Zero),
};

pub static SUB: BinaryOp = BinaryOp {
    name: "sub",
    f: |a, b| a - b,
    df1: |_, _| 1.0,
    df2: |_, _| -1.0,
    d11f: |_, _| 0.0,
    d22f: |_, _| 0.0,
    d12f: |_, _| 0.0,
    d1: NonZero,
    d2: NonZero,
    d11: Zero,
    d22: Zero,
    d12: Zero,
    local_d1: fixed_b(NonZero),
    local_d2: fixed_b(NonZero),
    local_d11: fixed_b(Zero),
    local_d22: fixed_b(Zero),
    local_d12: fixed_b(Zero),
};

/// Multiplication keeps fixed local flags: zero operand values are not
/// inspected, so `x * 0.0` still reports a dependence on `x`.
pub static MUL: BinaryOp = BinaryOp {
    name: "mul",
    f: |a, b| a * b,
    df1: |_, b| b,
    df2: |a, _| a,
    d11f: |_, _| 0.0,
    d22f: |_, _| 0.0,
    d12f: |_, _| 1.0,
    d1: NonZero,
    d2: NonZero,
    d11: Zero,
    d22: Zero,
    d12: NonZero,
    local_d1: fixed_b(NonZero),
    local_d2: fixed_b(NonZero),
    local_d11: fixed_b(Zero),
    local_d22: fixed_b(Zero),
    local_d12: fixed_b(NonZero),
};

pub static DIV: BinaryOp = BinaryOp {
    name: "div",
    f: |a, b| a / b,
    df1: |_, b| 1.0 / b,
    df2: |a, b| -a / (b * b),
    d11f: |_, _| 0.0,
    d22f: |a, b| 2.0 * a / (b * b * b),
    d12f: |_, b| -1.0 / (b * b),
    d1: NonZero,
    d2: NonZero,
    d11: Zero,
    d22: NonZero,
    d12: NonZero,
    local_d1: fixed_b(NonZero),
    local_d2: fixed_b(NonZero),
    local_d11: fixed_b(Zero),
    local_d22: fixed_b(NonZero),
    local_d12: fixed_b(NonZero),
};

/// Power with a variable exponent. Every derivative slot can be nonzero;
/// constant integer exponents should instead lower to repeated
/// multiplication, which classifies much more tightly.
pub static POW: BinaryOp = BinaryOp {
    name: "pow",
    f: f64::powf,
    df1: |a, b| b * a.powf(b - 1.0),
    df2: |a, b| a.powf(b) * a.ln(),
    d11f: |a, b| b * (b - 1.0) * a.powf(b - 2.0),
    d22f: |a, b| {
        let l = a.ln();
        a.powf(b) * l * l
    },
    d12f: |a, b| a.powf(b - 1.0) * (1.0 + b * a.ln()),
    d1: NonZero,
    d2: NonZero,
    d11: NonZero,
    d22: NonZero,
    d12: NonZero,
    local_d1: fixed_b(NonZero),
    local_d2: fixed_b(NonZero),
    local_d11: fixed_b(NonZero),
    local_d22: fixed_b(NonZero),
    local_d12: fixed_b(NonZero),
};

/// At a tie both local first-derivative predicates hold, so a value-aware
/// trace keeps both arguments.
pub static MAX: BinaryOp = BinaryOp {
    name: "max",
    f: f64::max,
    df1: |a, b| if a >= b { 1.0 } else { 0.0 },
    df2: |a, b| if a >= b { 0.0 } else { 1.0 },
    d11f: |_, _| 0.0,
    d22f: |_, _| 0.0,
    d12f: |_, _| 0.0,
    d1: NonZero,
    d2: NonZero,
    d11: Zero,
    d22: Zero,
    d12: Zero,
    local_d1: LocalBinary::Pred(|a, b| a >= b),
    local_d2: LocalBinary::Pred(|a, b| b >= a),
    local_d11: fixed_b(Zero),
    local_d22: fixed_b(Zero),
    local_d12: fixed_b(Zero),
};

pub static MIN: BinaryOp = BinaryOp {
    name: "min",
    f: f64::min,
    df1: |a, b| if a <= b { 1.0 } else { 0.0 },
    df2: |a, b| if a <= b { 0.0 } else { 1.0 },
    d11f: |_, _| 0.0,
    d22f: |_, _| 0.0,
    d12f: |_, _| 0.0,
    d1: NonZero,
    d2: NonZero,
    d11: Zero,
    d22: Zero,
    d12: Zero,
    local_d1: LocalBinary::Pred(|a, b| a <= b),
    local_d2: LocalBinary::Pred(|a, b| b <= a),
    local_d11: fixed_b(Zero),
    local_d22: fixed_b(Zero),
    local_d12: fixed_b(Zero),
};

/// A registered operator of either arity.
#[derive(Debug, Clone)]
pub enum Op {
    Unary(UnaryOp),
    Binary(BinaryOp),
}

impl Op {
    pub fn name(&self) -> &'static str {
        match self {
            Op::Unary(u) => u.name,
            Op::Binary(b) => b.name,
        }
    }
}

/// Errors from registering operators.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RegistryError {
    #[error("operator `{name}` is already registered")]
    Duplicate { name: String },
}

/// A directory of operator classifications, keyed by name.
///
/// The built-in arithmetic lives in static entries ([`ADD`], [`EXP`], ...)
/// that number types reference directly; the registry exists so callers can
/// look classifications up by name and extend the operator set with their
/// own entries.
#[derive(Debug, Clone, Default)]
pub struct Registry {
    ops: BTreeMap<&'static str, Op>,
}

impl Registry {
    /// An empty registry.
    pub fn new() -> Self {
        Registry::default()
    }

    /// A registry holding every built-in operator.
    pub fn with_builtins() -> Self {
        let mut r = Registry::new();
        for u in [
            &NEG, &ABS, &SQRT, &EXP, &LOG, &SIN, &COS, &TAN, &TANH, &SIGN, &FLOOR, &CEIL, &ROUND,
        ] {
            r.register_unary(u.clone())
                .expect("builtin names are distinct");
        }
        for b in [&ADD, &SUB, &MUL, &DIV, &POW, &MAX, &MIN] {
            r.register_binary(b.clone())
                .expect("builtin names are distinct");
        }
        r
    }

    /// Registers a unary operator. The name must be unused.
    pub fn register_unary(&mut self, op: UnaryOp) -> Result<(), RegistryError> {
        self.register(Op::Unary(op))
    }

    /// Registers a binary operator. The name must be unused.
    pub fn register_binary(&mut self, op: BinaryOp) -> Result<(), RegistryError> {
        self.register(Op::Binary(op))
    }

    fn register(&mut self, op: Op) -> Result<(), RegistryError> {
        let name = op.name();
        if self.ops.contains_key(name) {
            return Err(RegistryError::Duplicate {
                name: name.to_string(),
            });
        }
        self.ops.insert(name, op);
        Ok(())
    }

    /// Looks an operator up by name.
    pub fn lookup(&self, name: &str) -> Option<&Op> {
        self.ops.get(name)
    }

    /// The unary operator named `name`, if one is registered.
    pub fn unary(&self, name: &str) -> Option<&UnaryOp> {
        match self.ops.get(name) {
            Some(Op::Unary(u)) => Some(u),
            _ => None,
        }
    }

    /// The binary operator named `name`, if one is registered.
    pub fn binary(&self, name: &str) -> Option<&BinaryOp> {
        match self.ops.get(name) {
            Some(Op::Binary(b)) => Some(b),
            _ => None,
        }
    }

    /// All registered operators in name order.
    pub fn ops(&self) -> impl Iterator<Item = &Op> {
        self.ops.values()
    }

    /// Registered names in order.
    pub fn names(&self) -> Vec<&'static str> {
        self.ops.keys().copied().collect()
    }
}

/// The registry of built-in operators.
pub fn builtins() -> &'static Registry {
    use std::sync::OnceLock;
    static REGISTRY: OnceLock<Registry> = OnceLock::new();
    REGISTRY.get_or_init(Registry::with_builtins)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smooth_unary_ops_flag_both_orders() {
        for op in [&SQRT, &EXP, &LOG, &SIN, &COS, &TAN, &TANH] {
            assert_eq!(op.d1, NonZero, "{}", op.name);
            assert_eq!(op.d11, NonZero, "{}", op.name);
        }
    }

    #[test]
    fn piecewise_constant_ops_flag_nothing() {
        for op in [&SIGN, &FLOOR, &CEIL, &ROUND] {
            assert_eq!(op.d1, Zero, "{}", op.name);
            assert_eq!(op.d11, Zero, "{}", op.name);
            assert!(!op.local_d1.resolve(2.7), "{}", op.name);
            assert!(!op.local_d11.resolve(2.7), "{}", op.name);
        }
    }

    #[test]
    fn linear_ops_have_no_second_order_flags() {
        assert_eq!(NEG.d11, Zero);
        assert_eq!(ABS.d11, Zero);
        for op in [&ADD, &SUB, &MAX, &MIN] {
            assert_eq!(op.d11, Zero, "{}", op.name);
            assert_eq!(op.d22, Zero, "{}", op.name);
            assert_eq!(op.d12, Zero, "{}", op.name);
        }
    }

    #[test]
    fn multiplication_couples_only_across_arguments() {
        assert_eq!(MUL.d1, NonZero);
        assert_eq!(MUL.d2, NonZero);
        assert_eq!(MUL.d11, Zero);
        assert_eq!(MUL.d22, Zero);
        assert_eq!(MUL.d12, NonZero);
    }

    #[test]
    fn division_is_nonlinear_in_the_denominator_only() {
        assert_eq!(DIV.d11, Zero);
        assert_eq!(DIV.d22, NonZero);
        assert_eq!(DIV.d12, NonZero);
    }

    #[test]
    fn variable_exponent_power_flags_everything() {
        for d in [POW.d1, POW.d2, POW.d11, POW.d22, POW.d12] {
            assert_eq!(d, NonZero);
        }
    }

    #[test]
    fn max_local_flags_follow_the_larger_argument() {
        assert!(MAX.local_d1.resolve(3.0, 1.0));
        assert!(!MAX.local_d2.resolve(3.0, 1.0));
        assert!(!MAX.local_d1.resolve(1.0, 3.0));
        assert!(MAX.local_d2.resolve(1.0, 3.0));
        // Ties keep both sides.
        assert!(MAX.local_d1.resolve(2.0, 2.0));
        assert!(MAX.local_d2.resolve(2.0, 2.0));
    }

    #[test]
    fn min_local_flags_follow_the_smaller_argument() {
        assert!(MIN.local_d1.resolve(1.0, 3.0));
        assert!(!MIN.local_d2.resolve(1.0, 3.0));
        assert!(MIN.local_d2.resolve(3.0, 1.0));
    }

    #[test]
    fn registry_lookup_finds_builtins() {
        let r = builtins();
        assert!(r.unary("exp").is_some());
        assert!(r.binary("max").is_some());
        assert!(r.lookup("nope").is_none());
        assert!(r.unary("max").is_none(), "max is binary");
        assert_eq!(r.binary("max").unwrap().d12, Zero);
        assert_eq!(r.names().len(), 20);
    }

    #[test]
    fn duplicate_registration_is_an_error() {
        let mut r = Registry::with_builtins();
        let err = r.register_unary(EXP.clone()).unwrap_err();
        assert_eq!(
            err,
            RegistryError::Duplicate {
                name: "exp".to_string()
            }
        );
        // Registering under a fresh name works.
        let mut relu = ABS.clone();
        relu.name = "softabs";
        assert!(r.register_unary(relu).is_ok());
        assert!(r.unary("softabs").is_some());
    }

    mod derivative_values {
        //! Finite-difference checks of every entry's derivative functions.
        //! Sample points stay away from kinks, integers, and poles so the
        //! central differences are trustworthy.

        use super::*;

        const H: f64 = 1e-5;

        fn rel_close(got: f64, want: f64, tol: f64) -> bool {
            (got - want).abs() <= tol * (1.0 + want.abs())
        }

        fn unary_points(name: &str) -> Vec<f64> {
            match name {
                "sqrt" | "log" => vec![0.31, 0.9, 2.4],
                "tan" => vec![-1.1, 0.3, 0.9],
                _ => vec![-1.7, -0.55, 0.45, 1.3],
            }
        }

        fn binary_points(name: &str) -> Vec<(f64, f64)> {
            match name {
                "pow" => vec![(0.7, 1.6), (1.9, -0.8), (2.3, 2.1)],
                "div" => vec![(1.2, 0.7), (-0.8, -1.5), (2.0, 0.4)],
                // Keep a clear gap between the arguments of max/min.
                "max" | "min" => vec![(1.7, 0.4), (-0.9, 0.8), (2.2, -1.3)],
                _ => vec![(1.2, 0.7), (-0.8, -1.5), (0.3, 2.1)],
            }
        }

        #[test]
        fn unary_derivatives_match_finite_differences() {
            for op in builtins().ops() {
                let Op::Unary(u) = op else { continue };
                for x in unary_points(u.name) {
                    let fd1 = ((u.f)(x + H) - (u.f)(x - H)) / (2.0 * H);
                    let fd2 = ((u.f)(x + H) - 2.0 * (u.f)(x) + (u.f)(x - H)) / (H * H);
                    assert!(
                        rel_close((u.df)(x), fd1, 1e-6),
                        "{}'({x}): {} vs fd {}",
                        u.name,
                        (u.df)(x),
                        fd1
                    );
                    assert!(
                        rel_close((u.ddf)(x), fd2, 1e-3),
                        "{}''({x}): {} vs fd {}",
                        u.name,
                        (u.ddf)(x),
                        fd2
                    );
                }
            }
        }

        #[test]
        fn binary_derivatives_match_finite_differences() {
            for op in builtins().ops() {
                let Op::Binary(b) = op else { continue };
                for (x, y) in binary_points(b.name) {
                    let f = b.f;
                    let fd1 = (f(x + H, y) - f(x - H, y)) / (2.0 * H);
                    let fd2 = (f(x, y + H) - f(x, y - H)) / (2.0 * H);
                    let fd11 = (f(x + H, y) - 2.0 * f(x, y) + f(x - H, y)) / (H * H);
                    let fd22 = (f(x, y + H) - 2.0 * f(x, y) + f(x, y - H)) / (H * H);
                    let fd12 = (f(x + H, y + H) - f(x + H, y - H) - f(x - H, y + H)
                        + f(x - H, y - H))
                        / (4.0 * H * H);
                    assert!(
                        rel_close((b.df1)(x, y), fd1, 1e-6),
                        "{} df1 at ({x},{y})",
                        b.name
                    );
                    assert!(
                        rel_close((b.df2)(x, y), fd2, 1e-6),
                        "{} df2 at ({x},{y})",
                        b.name
                    );
                    assert!(
                        rel_close((b.d11f)(x, y), fd11, 1e-3),
                        "{} d11f at ({x},{y})",
                        b.name
                    );
                    assert!(
                        rel_close((b.d22f)(x, y), fd22, 1e-3),
                        "{} d22f at ({x},{y})",
                        b.name
                    );
                    assert!(
                        rel_close((b.d12f)(x, y), fd12, 1e-3),
                        "{} d12f at ({x},{y})",
                        b.name
                    );
                }
            }
        }
    }
}
