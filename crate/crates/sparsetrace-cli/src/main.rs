//! Command line front end: pattern detection, coloring, sparse and dense
//! derivative export, an ASCII pattern viewer, and a scaling benchmark.
//!
//! Every subcommand is a thin shell around library calls, so with the same
//! arguments and seed it produces byte-identical files to calling the
//! library directly.
//!
//! Exit codes: 0 on success, 1 for usage errors (bad flags, unknown
//! problem names, requests a problem cannot satisfy), 2 when the
//! computation fails (detection refusal, malformed data files, a coloring
//! that does not verify).

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use sparsetrace::ad;
use sparsetrace::coloring::{self, Coloring};
use sparsetrace::detect::{self, DetectError, Program};
use sparsetrace::matrix::Mat;
use sparsetrace::pattern::{percent_4sig, SparsityPattern};
use sparsetrace::pipeline::{self, JacobianPrep};
use sparsetrace::problems::{Problem, UnknownProblem};
use sparsetrace::sparse::SparseMatrix;

#[derive(Parser)]
#[command(
    name = "sparsetrace",
    version,
    about = "Sparsity detection, coloring, and compressed derivatives"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Detect a sparsity pattern and print its statistics.
    Detect(DetectArgs),
    /// Color a pattern and report how many groups it needs.
    Color(ColorArgs),
    /// Evaluate a Jacobian and write it in Matrix Market form.
    Jacobian(ValueArgs),
    /// Evaluate a Hessian and write it in Matrix Market form.
    Hessian(ValueArgs),
    /// Time the pipeline stages across problem sizes.
    Bench(BenchArgs),
    /// Render a pattern as an ASCII grid.
    Show(ShowArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Order {
    Jacobian,
    Hessian,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Global,
    Local,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Kind {
    Column,
    Star,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Sparse,
    Dense,
}

/// Flags shared by every subcommand that evaluates a named problem.
#[derive(Args)]
struct ProblemArgs {
    /// Problem name; `detect --problem nope` lists the known ones.
    #[arg(long)]
    problem: String,
    /// Problem size: grid side for brusselator, image side for conv,
    /// input dimension for the closed-form suite.
    #[arg(long, default_value_t = 6)]
    n: usize,
    /// Seed for generated evaluation points.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// File of whitespace-separated numbers used as the evaluation point
    /// instead of a seeded one.
    #[arg(long)]
    input: Option<PathBuf>,
}

#[derive(Args)]
struct DetectArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    /// Which derivative's pattern to detect.
    #[arg(long, value_enum, default_value_t = Order::Jacobian)]
    order: Order,
    /// Global patterns hold at every input, local ones only at the point.
    #[arg(long, value_enum, default_value_t = Mode::Global)]
    mode: Mode,
    /// Write the pattern here in Matrix Market format.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ColorArgs {
    /// Pattern file to color; alternative to --problem.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Problem whose detected global pattern is colored.
    #[arg(long)]
    problem: Option<String>,
    /// Problem size when --problem is used.
    #[arg(long, default_value_t = 6)]
    n: usize,
    /// Which derivative's pattern to detect when --problem is used.
    #[arg(long, value_enum, default_value_t = Order::Jacobian)]
    order: Order,
    /// column groups structurally orthogonal columns for Jacobians; star
    /// colors a symmetric pattern for direct Hessian recovery.
    #[arg(long, value_enum, default_value_t = Kind::Column)]
    kind: Kind,
    /// Write the column,color table here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ValueArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    /// sparse detects, colors, and compresses; dense seeds every column.
    #[arg(long, value_enum, default_value_t = Method::Sparse)]
    method: Method,
    /// Write the matrix here; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Problem family to scale.
    #[arg(long, default_value = "brusselator")]
    problem: String,
    /// Comma-separated problem sizes.
    #[arg(long, default_value = "6,12,24", value_delimiter = ',')]
    sizes: Vec<usize>,
    /// Timed repeats per stage; each stage also gets one warm-up run.
    #[arg(long, default_value_t = 5)]
    repeats: usize,
    /// Seed for the evaluation point.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the timing table here; stdout when omitted.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct ShowArgs {
    /// Pattern file to render; alternative to --problem.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Problem whose detected global pattern is rendered.
    #[arg(long)]
    problem: Option<String>,
    /// Problem size when --problem is used.
    #[arg(long, default_value_t = 6)]
    n: usize,
    /// Which derivative's pattern to detect when --problem is used.
    #[arg(long, value_enum, default_value_t = Order::Jacobian)]
    order: Order,
    /// Coloring CSV; marks then show their column's color instead of #.
    #[arg(long)]
    csv: Option<PathBuf>,
}

/// A request the toolkit cannot honor, as opposed to a computation that
/// was attempted and failed.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
struct UsageError(String);

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests arrive as "errors" but exit clean.
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

fn exit_code_for(e: &anyhow::Error) -> u8 {
    // Transparent pipeline wrappers hide the inner error from downcasts,
    // so the scalar-valuedness check has to look through them too.
    let not_scalar = |c: &(dyn std::error::Error + 'static)| {
        matches!(
            c.downcast_ref::<DetectError>(),
            Some(DetectError::NotScalarValued { .. })
        ) || matches!(
            c.downcast_ref::<ad::AdError>(),
            Some(ad::AdError::NotScalarValued { .. })
        ) || matches!(
            c.downcast_ref::<pipeline::PipelineError>(),
            Some(
                pipeline::PipelineError::Detect(DetectError::NotScalarValued { .. })
                    | pipeline::PipelineError::Ad(ad::AdError::NotScalarValued { .. })
            )
        )
    };
    let usage = e.chain().any(|c| {
        c.downcast_ref::<UsageError>().is_some()
            || c.downcast_ref::<UnknownProblem>().is_some()
            || not_scalar(c)
    });
    if usage {
        1
    } else {
        2
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.cmd {
        Cmd::Detect(args) => cmd_detect(args),
        Cmd::Color(args) => cmd_color(args),
        Cmd::Jacobian(args) => cmd_value(args, Order::Jacobian),
        Cmd::Hessian(args) => cmd_value(args, Order::Hessian),
        Cmd::Bench(args) => cmd_bench(args),
        Cmd::Show(args) => cmd_show(args),
    }
}

fn cmd_detect(args: DetectArgs) -> anyhow::Result<()> {
    let problem = Problem::from_name(&args.problem.problem, args.problem.n)?;
    let pattern = detect_pattern(&problem, &args.problem, args.order, args.mode)?;
    println!(
        "rows={} cols={} nnz={} zeros={}%",
        pattern.nrows(),
        pattern.ncols(),
        pattern.nnz(),
        percent_4sig(100.0 * pattern.zeros_fraction())
    );
    if let Some(path) = &args.out {
        pattern
            .save(path)
            .with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn detect_pattern(
    problem: &Problem,
    source: &ProblemArgs,
    order: Order,
    mode: Mode,
) -> anyhow::Result<SparsityPattern> {
    let pattern = match (order, mode) {
        (Order::Jacobian, Mode::Global) => detect::jacobian_pattern_global(problem)?,
        (Order::Hessian, Mode::Global) => detect::hessian_pattern_global(problem)?,
        (Order::Jacobian, Mode::Local) => {
            detect::jacobian_pattern_local(problem, &load_point(source, problem)?)?
        }
        (Order::Hessian, Mode::Local) => {
            detect::hessian_pattern_local(problem, &load_point(source, problem)?)?
        }
    };
    Ok(pattern)
}

fn cmd_color(args: ColorArgs) -> anyhow::Result<()> {
    let pattern = pattern_source(
        args.input.as_deref(),
        args.problem.as_deref(),
        args.n,
        args.order,
    )?;
    // The verifier runs on every output; a failure here is a library bug
    // surfaced to the caller rather than silently wrong compression.
    let coloring = match args.kind {
        Kind::Column => {
            let c = coloring::color_jacobian_columns(&pattern);
            coloring::verify_structural_orthogonality(&pattern, &c)?;
            c
        }
        Kind::Star => {
            let c = coloring::color_hessian_star(&pattern)?;
            coloring::verify_star_coloring(&pattern, &c)?;
            c
        }
    };
    println!("colors={}", coloring.num_colors());
    if let Some(path) = &args.out {
        coloring
            .save_csv(path)
            .with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn cmd_value(args: ValueArgs, order: Order) -> anyhow::Result<()> {
    let problem = Problem::from_name(&args.problem.problem, args.problem.n)?;
    let x = load_point(&args.problem, &problem)?;
    let text = match (order, args.method) {
        (Order::Jacobian, Method::Sparse) => {
            let (m, _) = pipeline::sparse_jacobian(&problem, &x)?;
            m.to_matrix_market_string()
        }
        (Order::Jacobian, Method::Dense) => {
            dense_to_sparse(&ad::dense_jacobian(&problem, &x)?)?.to_matrix_market_string()
        }
        (Order::Hessian, Method::Sparse) => {
            let (m, _) = pipeline::sparse_hessian(&problem, &x)?;
            m.to_matrix_market_string()
        }
        (Order::Hessian, Method::Dense) => {
            dense_to_sparse(&ad::dense_hessian(&problem, &x)?)?.to_matrix_market_string()
        }
    };
    match &args.out {
        Some(path) => {
            fs::write(path, &text).with_context(|| format!("writing {}", path.display()))?
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn cmd_bench(args: BenchArgs) -> anyhow::Result<()> {
    if args.sizes.is_empty() {
        return Err(UsageError("--sizes needs at least one entry".into()).into());
    }
    if args.repeats == 0 {
        return Err(UsageError("--repeats must be at least 1".into()).into());
    }
    let mut csv = String::from(
        "size,detect_s,color_s,prepared_sparse_s,unprepared_sparse_s,dense_s,colors,nnz\n",
    );
    for &size in &args.sizes {
        let problem = Problem::from_name(&args.problem, size)?;
        let x = problem.sample_point(args.seed);
        csv.push_str(&bench_row(&problem, &x, size, args.repeats)?);
    }
    match &args.csv {
        Some(path) => {
            fs::write(path, &csv).with_context(|| format!("writing {}", path.display()))?
        }
        None => print!("{csv}"),
    }
    Ok(())
}

/// One warm-up pass, then the median of `repeats` timed passes.
fn median_secs(repeats: usize, mut f: impl FnMut() -> anyhow::Result<()>) -> anyhow::Result<f64> {
    f()?;
    let mut times = Vec::with_capacity(repeats);
    for _ in 0..repeats {
        let start = Instant::now();
        f()?;
        times.push(start.elapsed().as_secs_f64());
    }
    times.sort_by(f64::total_cmp);
    let mid = times.len() / 2;
    Ok(if times.len() % 2 == 1 {
        times[mid]
    } else {
        0.5 * (times[mid - 1] + times[mid])
    })
}

fn bench_row(problem: &Problem, x: &[f64], size: usize, repeats: usize) -> anyhow::Result<String> {
    let detect_s = median_secs(repeats, || {
        detect::jacobian_pattern_global(problem)?;
        Ok(())
    })?;
    let pattern = detect::jacobian_pattern_global(problem)?;
    let color_s = median_secs(repeats, || {
        coloring::color_jacobian_columns(&pattern);
        Ok(())
    })?;
    let prep = JacobianPrep::new(pattern);
    let prepared_sparse_s = median_secs(repeats, || {
        prep.evaluate(problem, x)?;
        Ok(())
    })?;
    let unprepared_sparse_s = median_secs(repeats, || {
        pipeline::sparse_jacobian(problem, x)?;
        Ok(())
    })?;
    let dense_s = median_secs(repeats, || {
        ad::dense_jacobian(problem, x)?;
        Ok(())
    })?;
    let mut row = String::new();
    let _ = writeln!(
        row,
        "{size},{detect_s},{color_s},{prepared_sparse_s},{unprepared_sparse_s},{dense_s},{},{}",
        prep.num_colors(),
        prep.pattern().nnz()
    );
    Ok(row)
}

fn cmd_show(args: ShowArgs) -> anyhow::Result<()> {
    let pattern = pattern_source(
        args.input.as_deref(),
        args.problem.as_deref(),
        args.n,
        args.order,
    )?;
    let overlay = match &args.csv {
        Some(path) => Some(read_coloring_csv(path, pattern.ncols())?),
        None => None,
    };
    print!("{}", render_pattern(&pattern, overlay.as_ref(), 96));
    Ok(())
}

/// A pattern from a file or from detecting a named problem, exactly one.
fn pattern_source(
    input: Option<&Path>,
    problem: Option<&str>,
    n: usize,
    order: Order,
) -> anyhow::Result<SparsityPattern> {
    match (input, problem) {
        (Some(path), None) => SparsityPattern::load(path)
            .with_context(|| format!("reading pattern {}", path.display())),
        (None, Some(name)) => {
            let p = Problem::from_name(name, n)?;
            Ok(match order {
                Order::Jacobian => detect::jacobian_pattern_global(&p)?,
                Order::Hessian => detect::hessian_pattern_global(&p)?,
            })
        }
        _ => Err(UsageError("pass exactly one of --input or --problem".into()).into()),
    }
}

fn load_point(args: &ProblemArgs, problem: &Problem) -> anyhow::Result<Vec<f64>> {
    let x = match &args.input {
        Some(path) => read_point_file(path)?,
        None => problem.sample_point(args.seed),
    };
    if x.len() != problem.input_len() {
        return Err(UsageError(format!(
            "point has {} entries, `{}` expects {}",
            x.len(),
            args.problem,
            problem.input_len()
        ))
        .into());
    }
    Ok(x)
}

fn read_point_file(path: &Path) -> anyhow::Result<Vec<f64>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    text.split_whitespace()
        .map(|tok| {
            tok.parse::<f64>()
                .map_err(|_| anyhow::anyhow!("{}: not a number: `{tok}`", path.display()))
        })
        .collect()
}

/// The dense result stored sparsely: numeric zeros are dropped, which
/// makes the file directly comparable with the sparse output.
fn dense_to_sparse(m: &Mat<f64>) -> anyhow::Result<SparseMatrix> {
    let mut triplets = Vec::new();
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let v = m[(i, j)];
            if v != 0.0 {
                triplets.push((i, j, v));
            }
        }
    }
    Ok(SparseMatrix::from_triplets(
        m.nrows(),
        m.ncols(),
        &triplets,
    )?)
}

/// Parses a `column,color` table back into a coloring, 1-based on disk.
fn read_coloring_csv(path: &Path, ncols: usize) -> anyhow::Result<Coloring> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some("column,color") {
        bail!("{}: expected a `column,color` header", path.display());
    }
    let mut colors = vec![usize::MAX; ncols];
    for line in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let (c, k) = line
            .split_once(',')
            .with_context(|| format!("{}: malformed line `{line}`", path.display()))?;
        let c: usize = c.trim().parse().with_context(|| format!("column `{c}`"))?;
        let k: usize = k.trim().parse().with_context(|| format!("color `{k}`"))?;
        if c == 0 || c > ncols || k == 0 {
            bail!(
                "{}: entry {c},{k} out of range for {ncols} columns",
                path.display()
            );
        }
        colors[c - 1] = k - 1;
    }
    if let Some(missing) = colors.iter().position(|&c| c == usize::MAX) {
        bail!("{}: no color for column {}", path.display(), missing + 1);
    }
    Ok(Coloring::from_colors(colors))
}

/// Renders the pattern as a fixed-budget grid: `.` for zero, `#` for a
/// nonzero, or the column's color (zero-based, modulo 36) under an
/// overlay.  Larger patterns are downsampled by an integer factor; a
/// block is marked when any cell inside it is, and shows the color of the
/// first such cell in row-major order.
fn render_pattern(pattern: &SparsityPattern, overlay: Option<&Coloring>, budget: usize) -> String {
    let step = pattern.nrows().max(pattern.ncols()).div_ceil(budget).max(1);
    let grid_rows = pattern.nrows().div_ceil(step);
    let grid_cols = pattern.ncols().div_ceil(step);
    let mut out = String::new();
    let _ = write!(
        out,
        "{} x {}, nnz={}",
        pattern.nrows(),
        pattern.ncols(),
        pattern.nnz()
    );
    if step > 1 {
        let _ = write!(out, " (downsampled {step}:1)");
    }
    out.push('\n');
    let mut grid = vec![b'.'; grid_rows * grid_cols];
    for (i, j) in pattern.entries() {
        let cell = &mut grid[(i / step) * grid_cols + j / step];
        if *cell != b'.' {
            continue;
        }
        *cell = match overlay {
            None => b'#',
            Some(c) => b"0123456789abcdefghijklmnopqrstuvwxyz"[c.color(j) % 36],
        };
    }
    for row in grid.chunks(grid_cols.max(1)) {
        out.push_str(std::str::from_utf8(row).unwrap());
        out.push('\n');
    }
    out
}
