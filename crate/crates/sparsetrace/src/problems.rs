//! Ready-made traceable programs: a reaction-diffusion right-hand side on
//! a periodic grid, a convolution layer, and a small suite of closed-form
//! functions with hand-derived sparsity patterns.
//!
//! The suite exists so detection can be tested against answers worked out
//! on paper rather than against itself; every entry carries its expected
//! Jacobian pattern, its expected Hessian pattern when scalar-valued, and
//! a sampling box on which the function is smooth.

use crate::detect::Program;
use crate::pattern::SparsityPattern;
use crate::scalar::Scalar;

/// Splits one 64-bit state step into a well-mixed output word.
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e3779b97f4a7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// `n` deterministic values uniform in `[lo, hi)`, keyed by `seed`.
pub fn seeded_uniform(seed: u64, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    let mut state = seed;
    (0..n)
        .map(|_| {
            let u = (splitmix64(&mut state) >> 11) as f64 / (1u64 << 53) as f64;
            lo + (hi - lo) * u
        })
        .collect()
}

/// Two-species reaction-diffusion dynamics on a periodic `n x n` grid.
///
/// The state stacks the `u` concentrations first, then `v`, each grid
/// row-major: `u(i, j)` at `i * n + j` and `v(i, j)` at `n*n + i * n + j`.
/// Each output couples a cell to its four periodic neighbours of the same
/// species and to the other species at the cell, so for `n >= 3` every
/// Jacobian row has exactly six nonzeros out of `2 n^2` columns.
#[derive(Debug, Clone)]
pub struct BrusselatorProblem {
    n: usize,
    alpha: f64,
}

impl BrusselatorProblem {
    pub const A: f64 = 3.4;
    pub const B: f64 = 1.0;

    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "grid must have at least one cell");
        BrusselatorProblem { n, alpha: 0.1 }
    }

    pub fn with_alpha(n: usize, alpha: f64) -> Self {
        assert!(alpha != 0.0, "zero diffusion decouples the grid");
        BrusselatorProblem {
            alpha,
            ..Self::new(n)
        }
    }

    /// Grid side length.
    pub fn grid(&self) -> usize {
        self.n
    }

    pub fn index_u(&self, i: usize, j: usize) -> usize {
        i * self.n + j
    }

    pub fn index_v(&self, i: usize, j: usize) -> usize {
        self.n * self.n + i * self.n + j
    }

    /// A deterministic positive state, concentrations in `[0.5, 3.0)`.
    pub fn sample_state(&self, seed: u64) -> Vec<f64> {
        seeded_uniform(seed, self.input_len(), 0.5, 3.0)
    }
}

impl Program for BrusselatorProblem {
    fn input_len(&self) -> usize {
        2 * self.n * self.n
    }

    fn output_len(&self) -> usize {
        2 * self.n * self.n
    }

    fn eval<T: Scalar>(&self, x: &[T], out: &mut [T]) {
        let n = self.n;
        let wrap_dec = |i: usize| (i + n - 1) % n;
        let wrap_inc = |i: usize| (i + 1) % n;
        for i in 0..n {
            for j in 0..n {
                let u = x[self.index_u(i, j)].clone();
                let v = x[self.index_v(i, j)].clone();
                let lap = |at: &dyn Fn(usize, usize) -> usize| {
                    x[at(wrap_dec(i), j)].clone()
                        + x[at(wrap_inc(i), j)].clone()
                        + x[at(i, wrap_dec(j))].clone()
                        + x[at(i, wrap_inc(j))].clone()
                        - T::from_f64(4.0) * x[at(i, j)].clone()
                };
                let lap_u = lap(&|i, j| self.index_u(i, j));
                let lap_v = lap(&|i, j| self.index_v(i, j));
                let uuv = u.clone() * u.clone() * v.clone();
                out[self.index_u(i, j)] = T::from_f64(Self::B) + uuv.clone()
                    - T::from_f64(Self::A + 1.0) * u.clone()
                    + T::from_f64(self.alpha) * lap_u;
                out[self.index_v(i, j)] =
                    T::from_f64(Self::A) * u - uuv + T::from_f64(self.alpha) * lap_v;
            }
        }
    }
}

/// A valid (no padding) convolution layer with fixed pseudo-random
/// weights; the traced inputs are the image pixels.
///
/// Both sides flatten batch-outermost: element `(b, c, i, j)` lives at
/// `((b * channels + c) * height + i) * width + j`. Every output pixel
/// depends on a `k x k` window across all input channels of its own batch
/// element, so the Jacobian has `cin * k^2` nonzeros per row and is block
/// diagonal over the batch.
#[derive(Debug, Clone)]
pub struct ConvProblem {
    batch: usize,
    cin: usize,
    cout: usize,
    height: usize,
    width: usize,
    k: usize,
    weights: Vec<f64>,
}

impl ConvProblem {
    pub fn new(
        batch: usize,
        cin: usize,
        cout: usize,
        height: usize,
        width: usize,
        k: usize,
    ) -> Self {
        assert!(
            k >= 1 && height >= k && width >= k,
            "kernel must fit the image"
        );
        assert!(batch >= 1 && cin >= 1 && cout >= 1);
        let weights = seeded_uniform(0x9d1f_3a00 ^ (k as u64), cout * cin * k * k, -1.0, 1.0);
        ConvProblem {
            batch,
            cin,
            cout,
            height,
            width,
            k,
            weights,
        }
    }

    pub fn out_height(&self) -> usize {
        self.height - self.k + 1
    }

    pub fn out_width(&self) -> usize {
        self.width - self.k + 1
    }

    fn weight(&self, co: usize, ci: usize, di: usize, dj: usize) -> f64 {
        self.weights[((co * self.cin + ci) * self.k + di) * self.k + dj]
    }

    fn input_index(&self, b: usize, c: usize, i: usize, j: usize) -> usize {
        ((b * self.cin + c) * self.height + i) * self.width + j
    }

    fn output_index(&self, b: usize, c: usize, i: usize, j: usize) -> usize {
        ((b * self.cout + c) * self.out_height() + i) * self.out_width() + j
    }

    /// A deterministic image, pixel values in `[-1, 1)`.
    pub fn sample_image(&self, seed: u64) -> Vec<f64> {
        seeded_uniform(seed, self.input_len(), -1.0, 1.0)
    }
}

impl Program for ConvProblem {
    fn input_len(&self) -> usize {
        self.batch * self.cin * self.height * self.width
    }

    fn output_len(&self) -> usize {
        self.batch * self.cout * self.out_height() * self.out_width()
    }

    fn eval<T: Scalar>(&self, x: &[T], out: &mut [T]) {
        for b in 0..self.batch {
            for co in 0..self.cout {
                for oi in 0..self.out_height() {
                    for oj in 0..self.out_width() {
                        let mut acc = T::from_f64(0.0);
                        for ci in 0..self.cin {
                            for di in 0..self.k {
                                for dj in 0..self.k {
                                    let w = T::from_f64(self.weight(co, ci, di, dj));
                                    let px = x[self.input_index(b, ci, oi + di, oj + dj)].clone();
                                    acc = acc + w * px;
                                }
                            }
                        }
                        out[self.output_index(b, co, oi, oj)] = acc;
                    }
                }
            }
        }
    }
}

/// Closed-form functions with patterns worked out by hand.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SuiteFunction {
    /// `y = x`; diagonal Jacobian.
    Identity { n: usize },
    /// Ignores its input; both patterns empty.
    Constant { n: usize },
    /// `y_i = max(x_i, 0)`; diagonal globally, negative rows vanish locally.
    Relu { n: usize },
    /// `sum_i x_i x_{i+1}`; Hessian is the off-diagonal chain, all ones.
    Chain { n: usize },
    /// `sum_i exp(x_i)`; diagonal Hessian.
    SumExp { n: usize },
    /// `max(x_0, x_1)`; slope one almost everywhere, empty Hessian.
    MaxPair,
    /// `min(x_0, x_1)`; same shape as `MaxPair`.
    MinPair,
    /// `y_i = floor(x_i)`; empty Jacobian, the staircase is flat a.e.
    Floor { n: usize },
    /// `x_0 / x_1 / ... / x_{n-1}`; Hessian misses only `(0, 0)`.
    DivChain { n: usize },
    /// Branches on `x_0 < x_1`: global tracing refuses, local resolves.
    Piecewise,
    /// `sum_i 100 (x_{i+1} - x_i^2)^2 + (1 - x_i)^2`; tridiagonal Hessian.
    Rosenbrock { n: usize },
    /// `sum_i x_i^2`; diagonal Hessian.
    SumSquares { n: usize },
    /// `y_i = exp(x_i)`; diagonal Jacobian.
    SeparableExp { n: usize },
    /// `y_i = x_i * x_{i+1 mod n}`; two nonzeros per row.
    CoupledPairs { n: usize },
    /// `sum_i |x_i|`; dense gradient, empty Hessian.
    AbsKink { n: usize },
    /// `x_0 / x_1 + x_2`; Hessian touches only the divisor pair.
    Quotient,
    /// `x_0 ^ x_1 + x_2^2`; full two-by-two block plus one diagonal entry.
    Powers,
}

use SuiteFunction::*;

impl SuiteFunction {
    /// Every suite function at its default size.
    pub fn all_default() -> Vec<SuiteFunction> {
        vec![
            Identity { n: 4 },
            Constant { n: 3 },
            Relu { n: 5 },
            Chain { n: 6 },
            SumExp { n: 5 },
            MaxPair,
            MinPair,
            Floor { n: 4 },
            DivChain { n: 4 },
            Piecewise,
            Rosenbrock { n: 5 },
            SumSquares { n: 6 },
            SeparableExp { n: 4 },
            CoupledPairs { n: 6 },
            AbsKink { n: 3 },
            Quotient,
            Powers,
        ]
    }

    pub fn name(&self) -> &'static str {
        match self {
            Identity { .. } => "identity",
            Constant { .. } => "constant",
            Relu { .. } => "relu",
            Chain { .. } => "chain",
            SumExp { .. } => "sum_exp",
            MaxPair => "max_pair",
            MinPair => "min_pair",
            Floor { .. } => "floor",
            DivChain { .. } => "div_chain",
            Piecewise => "piecewise",
            Rosenbrock { .. } => "rosenbrock",
            SumSquares { .. } => "sum_squares",
            SeparableExp { .. } => "separable_exp",
            CoupledPairs { .. } => "coupled_pairs",
            AbsKink { .. } => "abs_kink",
            Quotient => "quotient",
            Powers => "powers",
        }
    }

    fn scaled(name: &str, n: usize) -> Option<SuiteFunction> {
        let f = match name {
            "identity" => Identity { n },
            "constant" => Constant { n },
            "relu" => Relu { n },
            "chain" => Chain { n: n.max(2) },
            "sum_exp" => SumExp { n },
            "max_pair" => MaxPair,
            "min_pair" => MinPair,
            "floor" => Floor { n },
            "div_chain" => DivChain { n: n.max(2) },
            "piecewise" => Piecewise,
            "rosenbrock" => Rosenbrock { n: n.max(2) },
            "sum_squares" => SumSquares { n },
            "separable_exp" => SeparableExp { n },
            "coupled_pairs" => CoupledPairs { n: n.max(2) },
            "abs_kink" => AbsKink { n },
            "quotient" => Quotient,
            "powers" => Powers,
            _ => return None,
        };
        Some(f)
    }

    /// Whether the function admits an input-independent trace.  The one
    /// holdout branches on values, so only local probing can observe it.
    pub fn global_traceable(&self) -> bool {
        !matches!(self, Piecewise)
    }

    /// The box on which the function is smooth and safely differentiable.
    pub fn domain(&self) -> (f64, f64) {
        match self {
            Identity { .. } | Relu { .. } | Chain { .. } | Piecewise => (-2.0, 2.0),
            Constant { .. } | SumExp { .. } | SeparableExp { .. } => (-1.0, 1.0),
            SumSquares { .. } | MaxPair | MinPair => (-3.0, 3.0),
            // Strictly inside one unit step, so finite differences never
            // straddle a jump.
            Floor { .. } => (0.2, 0.8),
            Rosenbrock { .. } | CoupledPairs { .. } => (-2.0, 2.0),
            // Away from the kink, the pole, and non-positive bases.
            AbsKink { .. } => (0.2, 1.5),
            DivChain { .. } | Quotient | Powers => (0.5, 2.0),
        }
    }

    pub fn sample_point(&self, seed: u64) -> Vec<f64> {
        let (lo, hi) = self.domain();
        seeded_uniform(seed, self.input_len(), lo, hi)
    }

    /// The Jacobian pattern derived from the formula.  For the piecewise
    /// entry this is the union over both branches, which a global trace
    /// refuses to compute; see [`SuiteFunction::global_traceable`].
    pub fn expected_jacobian(&self) -> SparsityPattern {
        let dense_row = |n: usize| {
            SparsityPattern::from_entries(1, n, &(0..n).map(|j| (0, j)).collect::<Vec<_>>())
        };
        let diagonal = |n: usize| {
            SparsityPattern::from_entries(n, n, &(0..n).map(|j| (j, j)).collect::<Vec<_>>())
        };
        match *self {
            Identity { n } | Relu { n } => diagonal(n).unwrap(),
            Constant { n } => SparsityPattern::empty(1, n),
            Floor { n } => SparsityPattern::empty(n, n),
            Chain { n } | SumExp { n } | DivChain { n } => dense_row(n).unwrap(),
            MaxPair | MinPair => dense_row(2).unwrap(),
            Piecewise => dense_row(3).unwrap(),
            Rosenbrock { n } | SumSquares { n } | AbsKink { n } => dense_row(n).unwrap(),
            SeparableExp { n } => diagonal(n).unwrap(),
            CoupledPairs { n } => {
                let entries: Vec<(usize, usize)> =
                    (0..n).flat_map(|i| [(i, i), (i, (i + 1) % n)]).collect();
                SparsityPattern::from_entries(n, n, &entries).unwrap()
            }
            Quotient | Powers => dense_row(3).unwrap(),
        }
    }

    /// The Hessian pattern derived from the formula; `None` for
    /// vector-valued entries.
    pub fn expected_hessian(&self) -> Option<SparsityPattern> {
        let sym = |n: usize, upper: &[(usize, usize)]| {
            let mirrored: Vec<(usize, usize)> =
                upper.iter().flat_map(|&(i, j)| [(i, j), (j, i)]).collect();
            Some(SparsityPattern::from_entries(n, n, &mirrored).unwrap())
        };
        match *self {
            Constant { n } => Some(SparsityPattern::empty(n, n)),
            Chain { n } => sym(n, &(0..n - 1).map(|i| (i, i + 1)).collect::<Vec<_>>()),
            SumExp { n } => sym(n, &(0..n).map(|i| (i, i)).collect::<Vec<_>>()),
            MaxPair | MinPair => Some(SparsityPattern::empty(2, 2)),
            DivChain { n } => {
                // Every second derivative survives except d^2/dx_0^2: the
                // numerator enters linearly, each divisor nonlinearly.
                let mut upper: Vec<(usize, usize)> = (1..n).map(|i| (i, i)).collect();
                upper.extend((0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))));
                sym(n, &upper)
            }
            Piecewise => sym(3, &[(0, 0), (1, 2)]),
            Rosenbrock { n } => {
                let mut upper: Vec<(usize, usize)> = (0..n).map(|i| (i, i)).collect();
                upper.extend((0..n - 1).map(|i| (i, i + 1)));
                sym(n, &upper)
            }
            SumSquares { n } => sym(n, &(0..n).map(|i| (i, i)).collect::<Vec<_>>()),
            AbsKink { n } => Some(SparsityPattern::empty(n, n)),
            Quotient => sym(3, &[(0, 1), (1, 1)]),
            Powers => sym(3, &[(0, 0), (0, 1), (1, 1), (2, 2)]),
            Identity { .. }
            | Relu { .. }
            | Floor { .. }
            | SeparableExp { .. }
            | CoupledPairs { .. } => None,
        }
    }
}

impl Program for SuiteFunction {
    fn input_len(&self) -> usize {
        match *self {
            Identity { n }
            | Constant { n }
            | Relu { n }
            | Chain { n }
            | SumExp { n }
            | Floor { n }
            | DivChain { n } => n,
            MaxPair | MinPair => 2,
            Piecewise => 3,
            Rosenbrock { n }
            | SumSquares { n }
            | SeparableExp { n }
            | CoupledPairs { n }
            | AbsKink { n } => n,
            Quotient | Powers => 3,
        }
    }

    fn output_len(&self) -> usize {
        match *self {
            Identity { n } | Relu { n } | Floor { n } => n,
            SeparableExp { n } | CoupledPairs { n } => n,
            _ => 1,
        }
    }

    fn eval<T: Scalar>(&self, x: &[T], out: &mut [T]) {
        match *self {
            Identity { .. } => {
                for (o, v) in out.iter_mut().zip(x) {
                    *o = v.clone();
                }
            }
            Constant { .. } => {
                out[0] = T::from_f64(2.5);
            }
            Relu { .. } => {
                for (o, v) in out.iter_mut().zip(x) {
                    *o = v.clone().max(T::from_f64(0.0));
                }
            }
            Chain { .. } => {
                let mut acc = T::from_f64(0.0);
                for w in x.windows(2) {
                    acc = acc + w[0].clone() * w[1].clone();
                }
                out[0] = acc;
            }
            SumExp { .. } => {
                let mut acc = T::from_f64(0.0);
                for v in x {
                    acc = acc + v.clone().exp();
                }
                out[0] = acc;
            }
            MaxPair => {
                out[0] = x[0].clone().max(x[1].clone());
            }
            MinPair => {
                out[0] = x[0].clone().min(x[1].clone());
            }
            Floor { .. } => {
                for (o, v) in out.iter_mut().zip(x) {
                    *o = v.clone().floor();
                }
            }
            DivChain { .. } => {
                let mut acc = x[0].clone();
                for v in &x[1..] {
                    acc = acc / v.clone();
                }
                out[0] = acc;
            }
            Piecewise => {
                out[0] = T::select(
                    x[0].lt(&x[1]),
                    x[0].clone() * x[0].clone(),
                    x[1].clone() * x[2].clone(),
                );
            }
            Rosenbrock { .. } => {
                let mut acc = T::from_f64(0.0);
                for w in x.windows(2) {
                    let gap = w[1].clone() - w[0].clone().powi(2);
                    let off = T::from_f64(1.0) - w[0].clone();
                    acc = acc + T::from_f64(100.0) * gap.clone() * gap + off.clone() * off;
                }
                out[0] = acc;
            }
            SumSquares { .. } => {
                let mut acc = T::from_f64(0.0);
                for v in x {
                    acc = acc + v.clone().powi(2);
                }
                out[0] = acc;
            }
            SeparableExp { .. } => {
                for (o, v) in out.iter_mut().zip(x) {
                    *o = v.clone().exp();
                }
            }
            CoupledPairs { n } => {
                for i in 0..n {
                    out[i] = x[i].clone() * x[(i + 1) % n].clone();
                }
            }
            AbsKink { .. } => {
                let mut acc = T::from_f64(0.0);
                for v in x {
                    acc = acc + v.clone().abs();
                }
                out[0] = acc;
            }
            Quotient => {
                out[0] = x[0].clone() / x[1].clone() + x[2].clone();
            }
            Powers => {
                out[0] = x[0].clone().powf(x[1].clone()) + x[2].clone().powi(2);
            }
        }
    }
}

/// A program whose dependency structure genuinely varies with the point:
/// global detection must refuse it, local detection resolves per region.
#[derive(Debug, Clone, Copy)]
pub struct ControlFlowProbe;

impl Program for ControlFlowProbe {
    fn input_len(&self) -> usize {
        3
    }

    fn output_len(&self) -> usize {
        2
    }

    fn eval<T: Scalar>(&self, x: &[T], out: &mut [T]) {
        out[0] = if x[0].lt(&x[1]) {
            x[0].clone() * x[1].clone()
        } else {
            x[2].clone()
        };
        out[1] = x[0].clone().max(x[2].clone());
    }
}

#[derive(Debug, thiserror::Error)]
#[error("unknown problem `{name}`; known problems: {known}")]
pub struct UnknownProblem {
    name: String,
    known: String,
}

/// A named problem selectable by string, for command-line use.
#[derive(Debug, Clone)]
pub enum Problem {
    Brusselator(BrusselatorProblem),
    Conv(ConvProblem),
    Suite(SuiteFunction),
}

impl Problem {
    /// Looks a problem up by name at the given size.
    ///
    /// * `brusselator`: `n` is the grid side, state size `2 n^2`;
    /// * `conv`: `n` is the image side, three input channels, one output
    ///   channel, a `5 x 5` kernel, batch of one;
    /// * any suite function name (`rosenbrock`, `sum_squares`, ...): `n`
    ///   is the input dimension where the function scales.
    pub fn from_name(name: &str, n: usize) -> Result<Problem, UnknownProblem> {
        let lower = name.to_lowercase();
        match lower.as_str() {
            "brusselator" => Ok(Problem::Brusselator(BrusselatorProblem::new(n.max(1)))),
            "conv" => {
                let side = n.max(5);
                Ok(Problem::Conv(ConvProblem::new(1, 3, 1, side, side, 5)))
            }
            other => match SuiteFunction::scaled(other, n.max(1)) {
                Some(f) => Ok(Problem::Suite(f)),
                None => Err(UnknownProblem {
                    name: name.to_string(),
                    known: Problem::names().join(", "),
                }),
            },
        }
    }

    pub fn names() -> Vec<&'static str> {
        let mut names = vec!["brusselator", "conv"];
        names.extend(SuiteFunction::all_default().iter().map(|f| f.name()));
        names
    }

    /// A deterministic point inside the problem's preferred domain.
    pub fn sample_point(&self, seed: u64) -> Vec<f64> {
        match self {
            Problem::Brusselator(p) => p.sample_state(seed),
            Problem::Conv(p) => p.sample_image(seed),
            Problem::Suite(f) => f.sample_point(seed),
        }
    }
}

impl Program for Problem {
    fn input_len(&self) -> usize {
        match self {
            Problem::Brusselator(p) => p.input_len(),
            Problem::Conv(p) => p.input_len(),
            Problem::Suite(f) => f.input_len(),
        }
    }

    fn output_len(&self) -> usize {
        match self {
            Problem::Brusselator(p) => p.output_len(),
            Problem::Conv(p) => p.output_len(),
            Problem::Suite(f) => f.output_len(),
        }
    }

    fn eval<T: Scalar>(&self, x: &[T], out: &mut [T]) {
        match self {
            Problem::Brusselator(p) => p.eval(x, out),
            Problem::Conv(p) => p.eval(x, out),
            Problem::Suite(f) => f.eval(x, out),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{ad, detect, fd};

    #[test]
    fn brusselator_rows_have_six_nonzeros() {
        let p = BrusselatorProblem::new(6);
        let pattern = detect::jacobian_pattern_global(&p).unwrap();
        assert_eq!(pattern.nrows(), 72);
        for i in 0..pattern.nrows() {
            assert_eq!(pattern.row_nnz(i), 6, "row {i}");
        }
        // 1 - 3 / n^2 of the matrix is structurally zero.
        let want = 1.0 - 3.0 / 36.0;
        assert!((pattern.zeros_fraction() - want).abs() < 1e-12);
    }

    #[test]
    fn brusselator_row_contents_match_the_stencil() {
        let n = 5;
        let p = BrusselatorProblem::new(n);
        let pattern = detect::jacobian_pattern_global(&p).unwrap();
        // Interior cell (2, 3): u row couples to its own u, four u
        // neighbours, and v at the cell.
        let row: Vec<usize> = pattern.row(p.index_u(2, 3)).collect();
        let mut want = vec![
            p.index_u(1, 3),
            p.index_u(3, 3),
            p.index_u(2, 2),
            p.index_u(2, 4),
            p.index_u(2, 3),
            p.index_v(2, 3),
        ];
        want.sort_unstable();
        assert_eq!(row, want);
        // Corner cell (0, 0) wraps periodically.
        let row: Vec<usize> = pattern.row(p.index_v(0, 0)).collect();
        let mut want = vec![
            p.index_v(n - 1, 0),
            p.index_v(1, 0),
            p.index_v(0, n - 1),
            p.index_v(0, 1),
            p.index_v(0, 0),
            p.index_u(0, 0),
        ];
        want.sort_unstable();
        assert_eq!(row, want);
    }

    #[test]
    fn brusselator_values_match_finite_differences() {
        let p = BrusselatorProblem::new(3);
        let x = p.sample_state(7);
        let j = ad::dense_jacobian(&p, &x).unwrap();
        let j_fd = fd::jacobian(&p, &x, 1e-6);
        assert!(j.max_abs_diff(&j_fd) < 1e-6);
    }

    #[test]
    fn conv_pattern_is_windows_by_channels() {
        let p = ConvProblem::new(1, 3, 1, 10, 10, 5);
        let pattern = detect::jacobian_pattern_global(&p).unwrap();
        assert_eq!((pattern.nrows(), pattern.ncols()), (36, 300));
        assert_eq!(pattern.nnz(), 36 * 75);
        for i in 0..36 {
            assert_eq!(pattern.row_nnz(i), 75);
        }
    }

    #[test]
    fn conv_batches_are_block_diagonal() {
        let p = ConvProblem::new(2, 1, 1, 6, 6, 3);
        let pattern = detect::jacobian_pattern_global(&p).unwrap();
        let rows_per = 16;
        let cols_per = 36;
        for (i, j) in pattern.entries() {
            assert_eq!(
                i / rows_per,
                j / cols_per,
                "entry ({i}, {j}) crosses batches"
            );
        }
    }

    #[test]
    fn conv_values_match_finite_differences() {
        let p = ConvProblem::new(1, 1, 2, 6, 6, 3);
        let x = p.sample_image(11);
        let j = ad::dense_jacobian(&p, &x).unwrap();
        let j_fd = fd::jacobian(&p, &x, 1e-6);
        assert!(j.max_abs_diff(&j_fd) < 1e-7);
    }

    #[test]
    fn suite_expected_hessians_are_symmetric() {
        for f in SuiteFunction::all_default() {
            if let Some(h) = f.expected_hessian() {
                assert!(h.is_symmetric(), "{}", f.name());
            }
            let (lo, hi) = f.domain();
            assert!(lo < hi);
            let x = f.sample_point(3);
            assert!(x.iter().all(|v| (lo..hi).contains(v)));
            let mut out = vec![0.0; f.output_len()];
            f.eval(&x, &mut out);
            assert!(out.iter().all(|v| v.is_finite()), "{}", f.name());
        }
    }

    #[test]
    fn textbook_suite_patterns_come_out_exact() {
        let diag = detect::jacobian_pattern_global(&Identity { n: 4 }).unwrap();
        assert_eq!(diag.nnz(), 4);
        assert_eq!(diag, (Identity { n: 4 }).expected_jacobian());
        let empty = detect::jacobian_pattern_global(&Floor { n: 5 }).unwrap();
        assert_eq!(empty.nnz(), 0);
        let empty = detect::jacobian_pattern_global(&Constant { n: 3 }).unwrap();
        assert_eq!(empty.nnz(), 0);
        let relu = detect::jacobian_pattern_global(&Relu { n: 3 }).unwrap();
        assert_eq!(relu.entries(), vec![(0, 0), (1, 1), (2, 2)]);
    }

    #[test]
    fn relu_local_rows_vanish_on_the_negative_side() {
        let p = detect::jacobian_pattern_local(&Relu { n: 4 }, &[1.0, -2.0, 3.0, -0.5]).unwrap();
        assert_eq!(p.entries(), vec![(0, 0), (2, 2)]);
    }

    #[test]
    fn chain_hessian_is_the_offdiagonal_band() {
        let f = Chain { n: 5 };
        let h = detect::hessian_pattern_global(&f).unwrap();
        assert_eq!(h, f.expected_hessian().unwrap());
        assert!(!h.contains(0, 0));
        assert!(h.contains(1, 2));
    }

    #[test]
    fn piecewise_traces_only_locally_and_per_branch() {
        assert!(detect::jacobian_pattern_global(&Piecewise).is_err());
        assert!(detect::hessian_pattern_global(&Piecewise).is_err());
        // x0 < x1 takes the x0^2 branch.
        let p = detect::jacobian_pattern_local(&Piecewise, &[0.0, 1.0, 5.0]).unwrap();
        assert_eq!(p.entries(), vec![(0, 0)]);
        let h = detect::hessian_pattern_local(&Piecewise, &[0.0, 1.0, 5.0]).unwrap();
        assert_eq!(h.entries(), vec![(0, 0)]);
        // Otherwise the x1 * x2 branch.
        let p = detect::jacobian_pattern_local(&Piecewise, &[2.0, 1.0, 5.0]).unwrap();
        assert_eq!(p.entries(), vec![(0, 1), (0, 2)]);
        let h = detect::hessian_pattern_local(&Piecewise, &[2.0, 1.0, 5.0]).unwrap();
        assert_eq!(h.entries(), vec![(1, 2), (2, 1)]);
    }

    #[test]
    fn div_chain_hessian_misses_only_the_numerator_square() {
        let f = DivChain { n: 3 };
        let h = detect::hessian_pattern_global(&f).unwrap();
        assert_eq!(h, f.expected_hessian().unwrap());
        assert_eq!(h.nnz(), 8);
        assert!(!h.contains(0, 0));
        let x = f.sample_point(5);
        let h_fd = fd::hessian(&f, &x, 1e-4);
        for (i, j) in h.entries() {
            assert!(h_fd[(i, j)].abs() > 1e-6, "({i}, {j}) should be active");
        }
    }

    #[test]
    fn control_flow_probe_fails_globally_and_resolves_locally() {
        assert!(detect::jacobian_pattern_global(&ControlFlowProbe).is_err());
        let p = detect::jacobian_pattern_local(&ControlFlowProbe, &[0.0, 1.0, 5.0]).unwrap();
        assert_eq!(p.entries(), vec![(0, 0), (0, 1), (1, 2)]);
        let p = detect::jacobian_pattern_local(&ControlFlowProbe, &[2.0, 1.0, 0.0]).unwrap();
        assert_eq!(p.entries(), vec![(0, 2), (1, 0)]);
    }

    #[test]
    fn problem_lookup_is_case_insensitive_and_total() {
        assert!(matches!(
            Problem::from_name("Brusselator", 4),
            Ok(Problem::Brusselator(_))
        ));
        assert!(matches!(
            Problem::from_name("rosenbrock", 7),
            Ok(Problem::Suite(Rosenbrock { n: 7 }))
        ));
        let err = Problem::from_name("nope", 4).unwrap_err();
        assert!(err.to_string().contains("brusselator"));
        for name in Problem::names() {
            assert!(Problem::from_name(name, 6).is_ok());
        }
    }

    #[test]
    fn seeded_points_are_deterministic_and_in_range() {
        let a = seeded_uniform(42, 100, -1.5, 2.5);
        let b = seeded_uniform(42, 100, -1.5, 2.5);
        assert_eq!(a, b);
        assert!(a.iter().all(|v| (-1.5..2.5).contains(v)));
        let c = seeded_uniform(43, 100, -1.5, 2.5);
        assert_ne!(a, c);
    }
}
