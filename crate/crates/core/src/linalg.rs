//! Small dense matrices and the Perron root of nonnegative operators.
//!
//! The Perron root is computed on each strongly connected component of the
//! operator's support graph separately. Inside an irreducible block, power
//! iteration from the all-ones vector is bracketed by the Collatz–Wielandt
//! bounds `min_i (Mx)_i / x_i <= rho <= max_i (Mx)_i / x_i`, which hold for
//! every positive `x`, so the returned bracket is rigorous up to rounding.
//! Blocks without a self-loop may be periodic and are iterated with a
//! positive shift `M + cI`.

use nalgebra::DMatrix;
use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;

use crate::error::{Error, Result};

/// A dense real `d x d` matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix(DMatrix<f64>);

impl Matrix {
    /// Builds a square matrix from its rows.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.len();
        if d == 0 {
            return Err(Error::range("matrix must have at least one row"));
        }
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != d) {
            return Err(Error::range(format!(
                "row {i} has {} entries, expected {d}",
                r.len()
            )));
        }
        if rows.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::range("matrix entries must be finite"));
        }
        Ok(Matrix(DMatrix::from_fn(d, d, |i, j| rows[i][j])))
    }

    pub fn diagonal(entries: &[f64]) -> Self {
        let d = entries.len();
        Matrix(DMatrix::from_fn(d, d, |i, j| if i == j { entries[i] } else { 0.0 }))
    }

    pub fn identity(d: usize) -> Self {
        Matrix(DMatrix::identity(d, d))
    }

    pub fn zeros(d: usize) -> Self {
        Matrix(DMatrix::zeros(d, d))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.0[(i, j)] = value;
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim())
            .map(|i| (0..self.dim()).map(|j| self.0[(i, j)]).collect())
            .collect()
    }

    pub fn as_nalgebra(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn is_diagonal(&self) -> bool {
        let d = self.dim();
        (0..d).all(|i| (0..d).all(|j| i == j || self.0[(i, j)] == 0.0))
    }

    pub fn diagonal_entries(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.0[(i, i)]).collect()
    }

    pub fn scale(&self, c: f64) -> Matrix {
        Matrix(&self.0 * c)
    }

    pub fn det(&self) -> f64 {
        self.0.determinant()
    }

    /// Operator norm induced by the Euclidean norm, i.e. the top singular value.
    pub fn operator_norm(&self) -> f64 {
        self.singular_values()[0]
    }

    /// Singular values in descending order.
    ///
    /// Uses a bidiagonal SVD rather than `sqrt(eig(A A^T))`; the two agree
    /// mathematically but forming `A A^T` squares the condition number.
    pub fn singular_values(&self) -> Vec<f64> {
        let mut sv: Vec<f64> = self.0.singular_values().iter().copied().collect();
        sv.sort_by(|a, b| b.total_cmp(a));
        sv
    }

    pub fn is_nonnegative(&self) -> bool {
        self.0.iter().all(|&x| x >= 0.0)
    }
}

impl std::ops::Mul for &Matrix {
    type Output = Matrix;

    fn mul(self, rhs: &Matrix) -> Matrix {
        Matrix(&self.0 * &rhs.0)
    }
}

/// A nonnegative linear operator on `R^n`, applied matrix-free.
pub trait NonnegativeOperator: Sync {
    fn dim(&self) -> usize;

    /// `y = M x`.
    fn apply(&self, x: &[f64], y: &mut [f64]);

    /// Calls `f(v)` for every `v` with `M[u][v] > 0` (duplicates allowed).
    fn for_each_successor(&self, u: usize, f: &mut dyn FnMut(usize));
}

impl NonnegativeOperator for Matrix {
    fn dim(&self) -> usize {
        self.0.nrows()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let d = self.dim();
        for (i, yi) in y.iter_mut().enumerate().take(d) {
            *yi = (0..d).map(|j| self.0[(i, j)] * x[j]).sum();
        }
    }

    fn for_each_successor(&self, u: usize, f: &mut dyn FnMut(usize)) {
        for v in 0..self.dim() {
            if self.0[(u, v)] > 0.0 {
                f(v);
            }
        }
    }
}

/// Controls for [`perron_root`].
#[derive(Clone, Copy, Debug)]
pub struct PerronOptions {
    /// Stop once `upper - lower <= tol * upper`.
    pub tol: f64,
    pub max_iterations: usize,
    /// Operators up to this dimension fall back to a dense eigensolve when
    /// power iteration hits the iteration cap.
    pub dense_fallback_dim: usize,
}

impl Default for PerronOptions {
    fn default() -> Self {
        PerronOptions {
            tol: 1e-13,
            max_iterations: 200_000,
            dense_fallback_dim: 64,
        }
    }
}

impl PerronOptions {
    pub fn with_tol(tol: f64) -> Self {
        PerronOptions {
            tol,
            ..Default::default()
        }
    }
}

/// Result of a Perron root computation.
#[derive(Clone, Debug, PartialEq)]
pub struct PerronEstimate {
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
    pub iterations: usize,
    /// Whether the whole operator is a single irreducible block.
    pub irreducible: bool,
    /// `ln(max v / min v)` for the Perron vector of the dominant block.
    /// For an irreducible operator this bounds the finite-horizon error:
    /// `|ln(e_u^T M^n 1)/n - ln rho| <= log_spread / n`.
    pub log_spread: f64,
    /// True when the dense eigensolve produced the value.
    pub dense_fallback: bool,
}

impl PerronEstimate {
    fn zero(irreducible: bool) -> Self {
        PerronEstimate {
            value: 0.0,
            lower: 0.0,
            upper: 0.0,
            iterations: 0,
            irreducible,
            log_spread: 0.0,
            dense_fallback: false,
        }
    }
}

struct Block {
    states: Vec<usize>,
    self_loop: bool,
}

fn nontrivial_blocks<O: NonnegativeOperator + ?Sized>(op: &O) -> (Vec<Block>, usize) {
    let n = op.dim();
    let mut graph = DiGraph::<(), ()>::with_capacity(n, n * 2);
    let nodes: Vec<_> = (0..n).map(|_| graph.add_node(())).collect();
    let mut self_loops = vec![false; n];
    for u in 0..n {
        op.for_each_successor(u, &mut |v| {
            if u == v {
                self_loops[u] = true;
            }
            graph.add_edge(nodes[u], nodes[v], ());
        });
    }
    let sccs = tarjan_scc(&graph);
    let count = sccs.len();
    let blocks = sccs
        .into_iter()
        .filter_map(|scc| {
            let states: Vec<usize> = scc.into_iter().map(|ix| ix.index()).collect();
            let self_loop = states.iter().any(|&s| self_loops[s]);
            (states.len() > 1 || self_loop).then_some(Block { states, self_loop })
        })
        .collect();
    (blocks, count)
}

struct BlockResult {
    lower: f64,
    upper: f64,
    iterations: usize,
    log_spread: f64,
    converged: bool,
}

fn iterate_block<O: NonnegativeOperator + ?Sized>(
    op: &O,
    block: &Block,
    opts: &PerronOptions,
) -> BlockResult {
    let n = op.dim();
    let mut x = vec![0.0; n];
    let mut y = vec![0.0; n];
    for &s in &block.states {
        x[s] = 1.0;
    }

    // Entries outside the block stay zero, so on block states `y` is the
    // principal submatrix applied to `x`.
    let bracket = |x: &[f64], y: &[f64]| {
        let mut lo = f64::INFINITY;
        let mut hi = 0.0f64;
        for &s in &block.states {
            let r = y[s] / x[s];
            lo = lo.min(r);
            hi = hi.max(r);
        }
        (lo, hi)
    };

    op.apply(&x, &mut y);
    let (mut lower, mut upper) = bracket(&x, &y);
    let shift = if block.self_loop { 0.0 } else { 0.5 * upper };
    let mut best_lower = lower;
    let mut best_upper = upper;
    let mut iterations = 0;
    let mut converged = best_upper - best_lower <= opts.tol * best_upper;

    while !converged && iterations < opts.max_iterations {
        iterations += 1;
        let mut norm = 0.0f64;
        for &s in &block.states {
            let v = y[s] + shift * x[s];
            x[s] = v;
            norm = norm.max(v);
        }
        for &s in &block.states {
            x[s] /= norm;
        }
        op.apply(&x, &mut y);
        (lower, upper) = bracket(&x, &y);
        best_lower = best_lower.max(lower);
        best_upper = best_upper.min(upper);
        converged = best_upper - best_lower <= opts.tol * best_upper;
    }

    let (mut vmin, mut vmax) = (f64::INFINITY, 0.0f64);
    for &s in &block.states {
        vmin = vmin.min(x[s]);
        vmax = vmax.max(x[s]);
    }
    BlockResult {
        lower: best_lower,
        upper: best_upper,
        iterations,
        log_spread: (vmax / vmin).ln(),
        converged,
    }
}

/// Perron root (spectral radius) of a nonnegative operator.
///
/// Returns `0` for nilpotent operators (no cycle in the support graph).
pub fn perron_root<O: NonnegativeOperator + ?Sized>(
    op: &O,
    opts: &PerronOptions,
) -> Result<PerronEstimate> {
    let n = op.dim();
    if n == 0 {
        return Ok(PerronEstimate::zero(true));
    }
    let (blocks, scc_count) = nontrivial_blocks(op);
    let irreducible = scc_count == 1;
    if blocks.is_empty() {
        return Ok(PerronEstimate::zero(irreducible));
    }

    let mut best: Option<BlockResult> = None;
    let mut iterations = 0;
    let mut failed: Option<BlockResult> = None;
    for block in &blocks {
        let r = iterate_block(op, block, opts);
        iterations += r.iterations;
        if !r.converged {
            failed = Some(r);
            break;
        }
        if best.as_ref().is_none_or(|b| r.upper > b.upper) {
            best = Some(r);
        }
    }

    if let Some(f) = failed {
        if n <= opts.dense_fallback_dim {
            let rho = dense_spectral_radius(&materialize(op));
            return Ok(PerronEstimate {
                value: rho,
                lower: rho,
                upper: rho,
                iterations,
                irreducible,
                log_spread: f.log_spread,
                dense_fallback: true,
            });
        }
        return Err(Error::Numerical {
            message: format!(
                "power iteration did not reach relative width {:e} in {} iterations",
                opts.tol, opts.max_iterations
            ),
            lower: f.lower,
            upper: f.upper,
        });
    }

    let b = best.expect("at least one block");
    Ok(PerronEstimate {
        value: 0.5 * (b.lower + b.upper),
        lower: b.lower,
        upper: b.upper,
        iterations,
        irreducible,
        log_spread: b.log_spread,
        dense_fallback: false,
    })
}

/// Spectral radius of a nonnegative dense matrix.
pub fn spectral_radius(m: &Matrix) -> Result<f64> {
    spectral_radius_with(m, &PerronOptions::default())
}

pub fn spectral_radius_with(m: &Matrix, opts: &PerronOptions) -> Result<f64> {
    if !m.is_nonnegative() {
        return Err(Error::domain("spectral_radius expects a nonnegative matrix"));
    }
    Ok(perron_root(m, opts)?.value)
}

/// Largest eigenvalue modulus from a real Schur decomposition.
pub fn dense_spectral_radius(m: &Matrix) -> f64 {
    m.0.complex_eigenvalues()
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

/// Dense matrix of an operator, built column by column.
pub fn materialize<O: NonnegativeOperator + ?Sized>(op: &O) -> Matrix {
    let n = op.dim();
    let mut m = Matrix::zeros(n);
    let mut e = vec![0.0; n];
    let mut col = vec![0.0; n];
    for j in 0..n {
        e[j] = 1.0;
        op.apply(&e, &mut col);
        for (i, &c) in col.iter().enumerate() {
            m.set(i, j, c);
        }
        e[j] = 0.0;
    }
    m
}
