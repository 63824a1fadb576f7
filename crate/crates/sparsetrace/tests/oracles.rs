//! Cross-checks between independent ways of computing the same thing.
//!
//! The bundled problems carry patterns worked out by hand; here the tracer
//! has to reproduce them. The tracer's derivatives in turn are checked
//! against central finite differences, and the two structured problems
//! (reaction-diffusion grid, convolution) against explicit constructions
//! of their stencils. None of these tests share code with the paths they
//! check beyond the problem definitions themselves.

use sparsetrace::ad::{dense_hessian, dense_jacobian};
use sparsetrace::detect::{
    hessian_pattern_global, hessian_pattern_local, jacobian_pattern_global, jacobian_pattern_local,
    DetectError, Program,
};
use sparsetrace::fd;
use sparsetrace::matrix::Mat;
use sparsetrace::pattern::SparsityPattern;
use sparsetrace::problems::{BrusselatorProblem, ConvProblem, SuiteFunction};

fn subset(small: &SparsityPattern, big: &SparsityPattern) -> bool {
    small.entries().iter().all(|&(i, j)| big.contains(i, j))
}

fn close(a: &Mat<f64>, b: &Mat<f64>, tol: f64) {
    assert_eq!((a.nrows(), a.ncols()), (b.nrows(), b.ncols()));
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            let (x, y) = (a[(i, j)], b[(i, j)]);
            let scale = x.abs().max(y.abs()).max(1.0);
            assert!(
                (x - y).abs() <= tol * scale,
                "entry ({i}, {j}): {x} vs {y} beyond {tol}"
            );
        }
    }
}

#[test]
fn hand_worked_jacobians_match_the_tracer() {
    for f in SuiteFunction::all_default() {
        if !f.global_traceable() {
            let err = jacobian_pattern_global(&f).unwrap_err();
            assert!(
                matches!(err, DetectError::MissingPrimal { .. }),
                "{}: expected a refusal, got {err:?}",
                f.name()
            );
            continue;
        }
        let detected = jacobian_pattern_global(&f).unwrap();
        assert_eq!(detected, f.expected_jacobian(), "jacobian of {}", f.name());
    }
}

#[test]
fn hand_worked_hessians_match_the_tracer() {
    let mut checked = 0;
    for f in SuiteFunction::all_default() {
        let Some(expected) = f.expected_hessian() else {
            continue;
        };
        if !f.global_traceable() {
            continue;
        }
        let detected = hessian_pattern_global(&f).unwrap();
        assert_eq!(detected, expected, "hessian of {}", f.name());
        checked += 1;
    }
    // The hand-worked list covers most of the scalar-valued suite.
    assert!(checked >= 8, "only {checked} hessians had expectations");
}

#[test]
fn piecewise_expectations_are_the_union_over_branches() {
    let f = SuiteFunction::Piecewise;
    // One point per branch of `x0 < x1`.
    let squares = [0.5, 1.0, 5.0];
    let product = [2.0, 1.0, 5.0];

    let jl = jacobian_pattern_local(&f, &squares).unwrap();
    let jr = jacobian_pattern_local(&f, &product).unwrap();
    assert_eq!(jl.entries(), vec![(0, 0)]);
    assert_eq!(jr.entries(), vec![(0, 1), (0, 2)]);
    let union =
        SparsityPattern::from_entries(1, 3, &[jl.entries(), jr.entries()].concat()).unwrap();
    assert_eq!(union, f.expected_jacobian());

    let hl = hessian_pattern_local(&f, &squares).unwrap();
    let hr = hessian_pattern_local(&f, &product).unwrap();
    assert_eq!(hl.entries(), vec![(0, 0)]);
    assert_eq!(hr.entries(), vec![(1, 2), (2, 1)]);
    let union =
        SparsityPattern::from_entries(3, 3, &[hl.entries(), hr.entries()].concat()).unwrap();
    assert_eq!(union, f.expected_hessian().unwrap());
}

#[test]
fn local_patterns_are_contained_in_global_ones() {
    for f in SuiteFunction::all_default() {
        if !f.global_traceable() {
            continue;
        }
        let jg = jacobian_pattern_global(&f).unwrap();
        let hg = (f.output_len() == 1).then(|| hessian_pattern_global(&f).unwrap());
        for seed in 0..5 {
            let x = f.sample_point(seed);
            let jl = jacobian_pattern_local(&f, &x).unwrap();
            assert!(
                subset(&jl, &jg),
                "{} seed {seed}: local jacobian leaks",
                f.name()
            );
            if let Some(hg) = &hg {
                let hl = hessian_pattern_local(&f, &x).unwrap();
                assert!(
                    subset(&hl, hg),
                    "{} seed {seed}: local hessian leaks",
                    f.name()
                );
            }
        }
    }
}

#[test]
fn forward_derivatives_match_central_differences() {
    for f in SuiteFunction::all_default() {
        for seed in 0..3 {
            let x = f.sample_point(seed);
            let exact = dense_jacobian(&f, &x).unwrap();
            close(&exact, &fd::jacobian(&f, &x, 1e-6), 1e-5);
            if f.output_len() == 1 {
                let exact = dense_hessian(&f, &x).unwrap();
                close(&exact, &fd::hessian(&f, &x, 1e-3), 1e-3);
            }
        }
    }
}

#[test]
fn grid_pattern_equals_the_stencil_construction() {
    for n in [3usize, 6, 11] {
        let p = BrusselatorProblem::new(n);
        let mut entries = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let cells = [
                    (i, j),
                    ((i + n - 1) % n, j),
                    ((i + 1) % n, j),
                    (i, (j + n - 1) % n),
                    (i, (j + 1) % n),
                ];
                // du row: its own field's stencil plus v at the center.
                for (a, b) in cells {
                    entries.push((p.index_u(i, j), p.index_u(a, b)));
                }
                entries.push((p.index_u(i, j), p.index_v(i, j)));
                // dv row: mirrored.
                for (a, b) in cells {
                    entries.push((p.index_v(i, j), p.index_v(a, b)));
                }
                entries.push((p.index_v(i, j), p.index_u(i, j)));
            }
        }
        let total = 2 * n * n;
        let expected = SparsityPattern::from_entries(total, total, &entries).unwrap();
        let detected = jacobian_pattern_global(&p).unwrap();
        assert_eq!(detected, expected, "grid size {n}");
        assert_eq!(detected.nnz(), 12 * n * n);

        // Six entries per row makes the zero fraction exactly 1 - 3 / n^2.
        let frac = 1.0 - detected.nnz() as f64 / (total * total) as f64;
        assert_eq!(frac, 1.0 - 3.0 / (n * n) as f64);
    }
}

#[test]
fn conv_pattern_equals_the_receptive_field_construction() {
    let (batch, cin, cout, h, w, k) = (2usize, 3, 2, 8, 7, 3);
    let p = ConvProblem::new(batch, cin, cout, h, w, k);
    let (oh, ow) = (p.out_height(), p.out_width());

    let input = |b: usize, c: usize, i: usize, j: usize| ((b * cin + c) * h + i) * w + j;
    let output = |b: usize, c: usize, i: usize, j: usize| ((b * cout + c) * oh + i) * ow + j;
    let mut entries = Vec::new();
    for b in 0..batch {
        for co in 0..cout {
            for oi in 0..oh {
                for oj in 0..ow {
                    for ci in 0..cin {
                        for di in 0..k {
                            for dj in 0..k {
                                entries
                                    .push((output(b, co, oi, oj), input(b, ci, oi + di, oj + dj)));
                            }
                        }
                    }
                }
            }
        }
    }
    let expected = SparsityPattern::from_entries(p.output_len(), p.input_len(), &entries).unwrap();
    let detected = jacobian_pattern_global(&p).unwrap();
    assert_eq!(detected, expected);
    for i in 0..detected.nrows() {
        assert_eq!(detected.row(i).count(), cin * k * k, "row {i}");
    }
}
