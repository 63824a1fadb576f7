//! Central finite differences, for checking derivatives computed any other
//! way. Accuracy is the usual O(h^2); pick the step to balance truncation
//! against cancellation (around 1e-6 for first order, 1e-4 for second).

use crate::detect::Program;
use crate::matrix::Mat;

fn eval_at<P: Program>(p: &P, x: &[f64]) -> Vec<f64> {
    let mut y = vec![0.0; p.output_len()];
    p.eval(x, &mut y);
    y
}

/// Central-difference Jacobian, `2n` program evaluations.
pub fn jacobian<P: Program>(p: &P, x: &[f64], h: f64) -> Mat<f64> {
    let (n, m) = (p.input_len(), p.output_len());
    assert_eq!(x.len(), n);
    let mut out = Mat::zeros(m, n);
    let mut xs = x.to_vec();
    for j in 0..n {
        xs[j] = x[j] + h;
        let fp = eval_at(p, &xs);
        xs[j] = x[j] - h;
        let fm = eval_at(p, &xs);
        xs[j] = x[j];
        for i in 0..m {
            out[(i, j)] = (fp[i] - fm[i]) / (2.0 * h);
        }
    }
    out
}

/// Central-difference directional derivative `J(x) v`.
pub fn jvp<P: Program>(p: &P, x: &[f64], v: &[f64], h: f64) -> Vec<f64> {
    assert_eq!(x.len(), p.input_len());
    assert_eq!(v.len(), p.input_len());
    let xp: Vec<f64> = x.iter().zip(v).map(|(a, b)| a + h * b).collect();
    let xm: Vec<f64> = x.iter().zip(v).map(|(a, b)| a - h * b).collect();
    let (fp, fm) = (eval_at(p, &xp), eval_at(p, &xm));
    fp.iter()
        .zip(&fm)
        .map(|(a, b)| (a - b) / (2.0 * h))
        .collect()
}

/// Gradient of a scalar-valued program.
pub fn gradient<P: Program>(p: &P, x: &[f64], h: f64) -> Vec<f64> {
    assert_eq!(p.output_len(), 1, "gradient needs a scalar-valued program");
    jacobian(p, x, h).row(0).to_vec()
}

/// Central-difference Hessian of a scalar-valued program via the four-point
/// second-difference stencil, symmetrized.
pub fn hessian<P: Program>(p: &P, x: &[f64], h: f64) -> Mat<f64> {
    let n = p.input_len();
    assert_eq!(p.output_len(), 1, "hessian needs a scalar-valued program");
    assert_eq!(x.len(), n);
    let f = |xs: &[f64]| eval_at(p, xs)[0];
    let mut out = Mat::zeros(n, n);
    let mut xs = x.to_vec();
    for i in 0..n {
        for j in i..n {
            let v = if i == j {
                let f0 = f(&xs);
                xs[i] = x[i] + h;
                let fp = f(&xs);
                xs[i] = x[i] - h;
                let fm = f(&xs);
                xs[i] = x[i];
                (fp - 2.0 * f0 + fm) / (h * h)
            } else {
                let mut probe = |si: f64, sj: f64| {
                    xs[i] = x[i] + si * h;
                    xs[j] = x[j] + sj * h;
                    let v = f(&xs);
                    xs[i] = x[i];
                    xs[j] = x[j];
                    v
                };
                (probe(1.0, 1.0) - probe(1.0, -1.0) - probe(-1.0, 1.0) + probe(-1.0, -1.0))
                    / (4.0 * h * h)
            };
            out[(i, j)] = v;
            out[(j, i)] = v;
        }
    }
    out
}
