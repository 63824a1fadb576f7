//! Sparsity detection: run a program on tracers, read patterns off the
//! outputs.
//!
//! Global detection seeds input `j` with the singleton set `{j}` and no
//! pairs, evaluates the program once, and collects each output's sets into
//! a [`SparsityPattern`]. The result is conservative over the whole input
//! domain. Local detection does the same with value-aware tracers seeded at
//! a concrete point and yields a pattern valid near that point.
//!
//! Programs implement [`Program`] by writing outputs into a caller-provided
//! buffer, generic over the scalar type; closures over a concrete tracer
//! type can use the `trace_*` entry points directly.
//!
//! The set backend defaults to the bit-vector for up to
//! [`DENSE_BACKEND_MAX_INPUTS`] inputs and the sorted vector above that;
//! the `*_with` variants pin a backend explicitly. Detected patterns do not
//! depend on the choice.

use crate::pattern::SparsityPattern;
use crate::scalar::Scalar;
use crate::sets::{BitSet, PatternSet, SetError, SortedSet};
use crate::tracer::{
    install_missing_primal_hook, GradientTracer, HessianTracer, LocalTracer, MissingPrimal, Tracer,
};
use std::cell::RefCell;
use std::panic::AssertUnwindSafe;

/// Inputs up to this size default to the bit-vector set backend; larger
/// programs default to the sorted-vector backend.
pub const DENSE_BACKEND_MAX_INPUTS: usize = 1024;

/// A program `f: R^n -> R^m` written against the generic scalar interface.
///
/// `eval` must fill all of `out`; entries it leaves untouched keep their
/// initial constant-zero value and detect as structurally zero rows.
pub trait Program {
    fn input_len(&self) -> usize;
    fn output_len(&self) -> usize;
    fn eval<T: Scalar>(&self, x: &[T], out: &mut [T]);
}

impl<P: Program + ?Sized> Program for &P {
    fn input_len(&self) -> usize {
        (**self).input_len()
    }

    fn output_len(&self) -> usize {
        (**self).output_len()
    }

    fn eval<T: Scalar>(&self, x: &[T], out: &mut [T]) {
        (**self).eval(x, out)
    }
}

/// Errors from detection.
#[derive(Debug, Clone, thiserror::Error)]
pub enum DetectError {
    /// The program asked a global tracer for a value. The message names the
    /// operation and its source location.
    #[error("{message}")]
    MissingPrimal {
        op: &'static str,
        location: String,
        message: String,
    },
    /// Hessian detection needs a single scalar output.
    #[error("hessian detection needs a scalar-valued program, this one has {outputs} outputs")]
    NotScalarValued { outputs: usize },
    /// The evaluation point has the wrong length.
    #[error("program takes {expected} inputs, point has {got}")]
    InputLength { expected: usize, got: usize },
    #[error(transparent)]
    Set(#[from] SetError),
}

thread_local! {
    static WARNINGS: RefCell<Vec<String>> = const { RefCell::new(Vec::new()) };
}

/// Drains warnings recorded by this thread's most recent local detection,
/// e.g. non-finite primal values propagating through a trace.
pub fn take_warnings() -> Vec<String> {
    WARNINGS.with(|w| w.borrow_mut().split_off(0))
}

fn warn(msg: String) {
    WARNINGS.with(|w| w.borrow_mut().push(msg));
}

/// Runs a trace, converting a [`MissingPrimal`] unwind into an error.
fn run_trace<R>(f: impl FnOnce() -> Result<R, DetectError>) -> Result<R, DetectError> {
    install_missing_primal_hook();
    match std::panic::catch_unwind(AssertUnwindSafe(f)) {
        Ok(r) => r,
        Err(payload) => match payload.downcast::<MissingPrimal>() {
            Ok(mp) => Err(DetectError::MissingPrimal {
                op: mp.op,
                location: mp.location.to_string(),
                message: mp.to_string(),
            }),
            Err(other) => std::panic::resume_unwind(other),
        },
    }
}

fn check_point(n: usize, x: &[f64]) -> Result<(), DetectError> {
    if x.len() != n {
        return Err(DetectError::InputLength {
            expected: n,
            got: x.len(),
        });
    }
    Ok(())
}

fn check_scalar_valued<P: Program>(p: &P) -> Result<(), DetectError> {
    if p.output_len() != 1 {
        return Err(DetectError::NotScalarValued {
            outputs: p.output_len(),
        });
    }
    Ok(())
}

/// Traces a closure over gradient tracers; the low-level form of
/// [`jacobian_pattern_global`].
pub fn trace_jacobian<S, F>(n: usize, m: usize, f: F) -> Result<SparsityPattern, DetectError>
where
    S: PatternSet,
    F: FnOnce(&[GradientTracer<S>], &mut [GradientTracer<S>]),
{
    run_trace(|| {
        let inputs = seed_inputs::<GradientTracer<S>>(n)?;
        let mut out = vec![GradientTracer::<S>::from_f64(0.0); m];
        f(&inputs, &mut out);
        let sets: Vec<S> = out.into_iter().map(|t| t.gradient().clone()).collect();
        Ok(SparsityPattern::from_sets(n, &sets))
    })
}

/// Traces a closure over Hessian tracers; the low-level form of
/// [`hessian_pattern_global`].
pub fn trace_hessian<S, F>(n: usize, f: F) -> Result<SparsityPattern, DetectError>
where
    S: PatternSet,
    F: FnOnce(&[HessianTracer<S>]) -> HessianTracer<S>,
{
    run_trace(|| {
        let inputs = seed_inputs::<HessianTracer<S>>(n)?;
        let y = f(&inputs);
        pairs_to_pattern(n, &y)
    })
}

fn seed_inputs<T: Tracer>(n: usize) -> Result<Vec<T>, SetError> {
    (0..n).map(|j| T::input(j, n)).collect()
}

fn seed_local_inputs<T: Tracer>(n: usize, x: &[f64]) -> Result<Vec<LocalTracer<T>>, SetError> {
    (0..n).map(|j| LocalTracer::input(x[j], j, n)).collect()
}

fn pairs_to_pattern<S: PatternSet>(
    n: usize,
    y: &HessianTracer<S>,
) -> Result<SparsityPattern, DetectError> {
    let entries = y.pairs().pairs();
    Ok(SparsityPattern::from_entries(n, n, &entries)
        .expect("tracer pair indices are within capacity"))
}

fn warn_nonfinite(outputs: impl Iterator<Item = f64>) {
    for (i, v) in outputs.enumerate() {
        if !v.is_finite() {
            warn(format!(
                "output {i} evaluated to {v}; the local pattern may not describe a differentiable neighbourhood"
            ));
        }
    }
}

/// Jacobian sparsity valid over the whole input domain.
pub fn jacobian_pattern_global<P: Program>(p: &P) -> Result<SparsityPattern, DetectError> {
    if p.input_len() <= DENSE_BACKEND_MAX_INPUTS {
        jacobian_pattern_global_with::<BitSet, P>(p)
    } else {
        jacobian_pattern_global_with::<SortedSet, P>(p)
    }
}

/// [`jacobian_pattern_global`] with an explicit set backend.
pub fn jacobian_pattern_global_with<S: PatternSet, P: Program>(
    p: &P,
) -> Result<SparsityPattern, DetectError> {
    trace_jacobian::<S, _>(p.input_len(), p.output_len(), |x, out| p.eval(x, out))
}

/// Jacobian sparsity at the point `x`; tighter than the global pattern but
/// only trustworthy near `x`.
pub fn jacobian_pattern_local<P: Program>(
    p: &P,
    x: &[f64],
) -> Result<SparsityPattern, DetectError> {
    if p.input_len() <= DENSE_BACKEND_MAX_INPUTS {
        jacobian_pattern_local_with::<BitSet, P>(p, x)
    } else {
        jacobian_pattern_local_with::<SortedSet, P>(p, x)
    }
}

/// [`jacobian_pattern_local`] with an explicit set backend.
pub fn jacobian_pattern_local_with<S: PatternSet, P: Program>(
    p: &P,
    x: &[f64],
) -> Result<SparsityPattern, DetectError> {
    let (n, m) = (p.input_len(), p.output_len());
    check_point(n, x)?;
    take_warnings();
    run_trace(|| {
        let inputs = seed_local_inputs::<GradientTracer<S>>(n, x)?;
        let mut out = vec![LocalTracer::<GradientTracer<S>>::from_f64(0.0); m];
        p.eval(&inputs, &mut out);
        warn_nonfinite(out.iter().map(|t| t.value()));
        let sets: Vec<S> = out
            .into_iter()
            .map(|t| t.inner().gradient().clone())
            .collect();
        Ok(SparsityPattern::from_sets(n, &sets))
    })
}

/// Hessian sparsity of a scalar-valued program, valid over the whole
/// domain. The result is square and symmetric.
pub fn hessian_pattern_global<P: Program>(p: &P) -> Result<SparsityPattern, DetectError> {
    if p.input_len() <= DENSE_BACKEND_MAX_INPUTS {
        hessian_pattern_global_with::<BitSet, P>(p)
    } else {
        hessian_pattern_global_with::<SortedSet, P>(p)
    }
}

/// [`hessian_pattern_global`] with an explicit set backend.
pub fn hessian_pattern_global_with<S: PatternSet, P: Program>(
    p: &P,
) -> Result<SparsityPattern, DetectError> {
    check_scalar_valued(p)?;
    trace_hessian::<S, _>(p.input_len(), |x| {
        let mut out = vec![HessianTracer::<S>::from_f64(0.0)];
        p.eval(x, &mut out);
        out.pop().expect("buffer of length one")
    })
}

/// Hessian sparsity of a scalar-valued program at the point `x`.
pub fn hessian_pattern_local<P: Program>(p: &P, x: &[f64]) -> Result<SparsityPattern, DetectError> {
    if p.input_len() <= DENSE_BACKEND_MAX_INPUTS {
        hessian_pattern_local_with::<BitSet, P>(p, x)
    } else {
        hessian_pattern_local_with::<SortedSet, P>(p, x)
    }
}

/// [`hessian_pattern_local`] with an explicit set backend.
pub fn hessian_pattern_local_with<S: PatternSet, P: Program>(
    p: &P,
    x: &[f64],
) -> Result<SparsityPattern, DetectError> {
    let n = p.input_len();
    check_scalar_valued(p)?;
    check_point(n, x)?;
    take_warnings();
    run_trace(|| {
        let inputs = seed_local_inputs::<HessianTracer<S>>(n, x)?;
        let mut out = vec![LocalTracer::<HessianTracer<S>>::from_f64(0.0)];
        p.eval(&inputs, &mut out);
        let y = out.pop().expect("buffer of length one");
        warn_nonfinite(std::iter::once(y.value()));
        pairs_to_pattern(n, y.inner())
    })
}
