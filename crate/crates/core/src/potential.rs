//! The singular value function, the permutation potentials of diagonal
//! systems, and the affine IFS they are evaluated on.
//!
//! For a diagonal matrix `A = diag(a_1, ..., a_d)` and a permutation
//! `D = (e_1, ..., e_d)` the potential
//! `phi_D^s(A) = |a_{e_1}| ... |a_{e_{floor s}}| |a_{e_{floor s + 1}}|^{s - floor s}`
//! is multiplicative along words, unlike `phi^s`. Its maximum over `D`
//! dominates `phi^s` from below and the sum over `D` from above, so
//! `P = max_D P_D` for diagonal systems.

use std::fmt;

use itertools::Itertools;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// A permutation `(e_1, ..., e_d)` of `{1, ..., d}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    // 0-based
    order: Vec<usize>,
}

impl Permutation {
    /// From 1-based entries.
    pub fn new(order: &[usize]) -> Result<Self> {
        let d = order.len();
        let mut seen = vec![false; d];
        for &e in order {
            if e == 0 || e > d || seen[e - 1] {
                return Err(Error::range(format!(
                    "{order:?} is not a permutation of 1..={d}"
                )));
            }
            seen[e - 1] = true;
        }
        Ok(Permutation {
            order: order.iter().map(|e| e - 1).collect(),
        })
    }

    pub fn identity(d: usize) -> Self {
        Permutation {
            order: (0..d).collect(),
        }
    }

    /// All `d!` permutations in lexicographic order.
    pub fn all(d: usize) -> Vec<Permutation> {
        (0..d)
            .permutations(d)
            .map(|order| Permutation { order })
            .collect()
    }

    /// Parses `"21"`, `"2,1"` or `"(2,1)"`.
    pub fn parse(text: &str) -> Result<Self> {
        let inner = text.trim().trim_start_matches('(').trim_end_matches(')');
        let entries: Vec<usize> = if inner.contains(',') {
            inner
                .split(',')
                .map(|t| {
                    t.trim()
                        .parse()
                        .map_err(|_| Error::range(format!("bad permutation entry {t:?}")))
                })
                .collect::<Result<_>>()?
        } else {
            inner
                .chars()
                .map(|c| {
                    c.to_digit(10)
                        .map(|v| v as usize)
                        .ok_or_else(|| Error::range(format!("bad permutation entry {c:?}")))
                })
                .collect::<Result<_>>()?
        };
        Permutation::new(&entries)
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// 0-based coordinate in position `j` (0-based).
    pub fn index(&self, j: usize) -> usize {
        self.order[j]
    }

    /// 1-based entries.
    pub fn entries(&self) -> Vec<usize> {
        self.order.iter().map(|e| e + 1).collect()
    }
}

impl Serialize for Permutation {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.entries().iter().join(","))
    }
}

/// `ln` of `v_0 ... v_{m-1} v_m^{s-m}` with `m = floor(s)`, for values
/// already arranged in the order the potential consumes them.
fn log_ordered_potential(values: impl Iterator<Item = f64>, s: f64) -> f64 {
    let whole = s.floor() as usize;
    let frac = s - s.floor();
    let mut acc = 0.0;
    for (j, v) in values.enumerate() {
        if j < whole {
            acc += v.abs().ln();
        } else {
            if frac > 0.0 {
                acc += frac * v.abs().ln();
            }
            break;
        }
    }
    acc
}

fn check_order(s: f64, d: usize) -> Result<()> {
    if !(0.0..=d as f64).contains(&s) {
        return Err(Error::range(format!("s = {s} outside [0, {d}]")));
    }
    Ok(())
}

/// `ln phi^s(A)`.
pub fn log_svf(a: &Matrix, s: f64) -> Result<f64> {
    check_order(s, a.dim())?;
    Ok(log_svf_from_singular_values(&a.singular_values(), s))
}

/// `ln phi^s` from singular values sorted in descending order.
pub fn log_svf_from_singular_values(sv: &[f64], s: f64) -> f64 {
    log_ordered_potential(sv.iter().copied(), s)
}

/// The singular value function `phi^s(A) = sigma_1 ... sigma_{ceil s}^{s - floor s}`.
pub fn svf(a: &Matrix, s: f64) -> Result<f64> {
    log_svf(a, s).map(f64::exp)
}

/// `ln phi_D^s(A)` for a diagonal `A`.
pub fn log_svf_d(a: &Matrix, perm: &Permutation, s: f64) -> Result<f64> {
    if !a.is_diagonal() {
        return Err(Error::domain("phi_D is only defined for diagonal matrices"));
    }
    if perm.len() != a.dim() {
        return Err(Error::range(format!(
            "permutation of length {} for a {}x{} matrix",
            perm.len(),
            a.dim(),
            a.dim()
        )));
    }
    check_order(s, a.dim())?;
    let diag = a.diagonal_entries();
    Ok(log_ordered_potential(
        (0..perm.len()).map(|j| diag[perm.index(j)]),
        s,
    ))
}

pub fn svf_d(a: &Matrix, perm: &Permutation, s: f64) -> Result<f64> {
    log_svf_d(a, perm, s).map(f64::exp)
}

/// An IFS of affine maps `x -> A_i x + v_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineIFS {
    matrices: Vec<Matrix>,
    translations: Option<Vec<Vec<f64>>>,
    dim: usize,
    diagonal: bool,
    common_order: Option<Permutation>,
    norms: Vec<f64>,
}

impl AffineIFS {
    /// Validates `k >= 2` nonsingular contractions of a common dimension.
    pub fn new(matrices: Vec<Matrix>, translations: Option<Vec<Vec<f64>>>) -> Result<Self> {
        if matrices.len() < 2 {
            return Err(Error::validation(
                None,
                format!("need at least 2 maps, got {}", matrices.len()),
            ));
        }
        let dim = matrices[0].dim();
        let mut norms = Vec::with_capacity(matrices.len());
        for (i, a) in matrices.iter().enumerate() {
            if a.dim() != dim {
                return Err(Error::validation(
                    Some(i + 1),
                    format!("is {}x{}, expected {dim}x{dim}", a.dim(), a.dim()),
                ));
            }
            let sv = a.singular_values();
            if sv[dim - 1] <= 0.0 {
                return Err(Error::validation(Some(i + 1), "matrix is singular"));
            }
            if sv[0] >= 1.0 {
                return Err(Error::validation(
                    Some(i + 1),
                    format!("operator norm {} is not < 1", sv[0]),
                ));
            }
            norms.push(sv[0]);
        }
        if let Some(t) = &translations {
            if t.len() != matrices.len() {
                return Err(Error::validation(
                    None,
                    format!("{} translations for {} maps", t.len(), matrices.len()),
                ));
            }
            if let Some((i, _)) = t.iter().enumerate().find(|(_, v)| v.len() != dim) {
                return Err(Error::validation(
                    Some(i + 1),
                    format!("translation is not a {dim}-vector"),
                ));
            }
        }
        let diagonal = matrices.iter().all(Matrix::is_diagonal);
        let common_order = if diagonal {
            find_common_order(&matrices)
        } else {
            None
        };
        Ok(AffineIFS {
            matrices,
            translations,
            dim,
            diagonal,
            common_order,
            norms,
        })
    }

    /// Diagonal system from the diagonals of its matrices.
    pub fn diagonal(diagonals: &[Vec<f64>]) -> Result<Self> {
        AffineIFS::new(diagonals.iter().map(|d| Matrix::diagonal(d)).collect(), None)
    }

    pub fn matrices(&self) -> &[Matrix] {
        &self.matrices
    }

    pub fn translations(&self) -> Option<&[Vec<f64>]> {
        self.translations.as_deref()
    }

    /// Number of maps `k`.
    pub fn len(&self) -> usize {
        self.matrices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matrices.is_empty()
    }

    /// Ambient dimension `d`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_diagonal(&self) -> bool {
        self.diagonal
    }

    /// True iff the system is diagonal and one ordering of coordinates sorts
    /// every diagonal by decreasing absolute value.
    pub fn is_same_order(&self) -> bool {
        self.common_order.is_some()
    }

    /// The common decreasing order of a same-order system; for it
    /// `phi_D^s = phi^s` on every word.
    pub fn common_order(&self) -> Option<&Permutation> {
        self.common_order.as_ref()
    }

    pub fn operator_norms(&self) -> &[f64] {
        &self.norms
    }

    /// Maps (1-based) whose norm is not below 1/2.
    pub fn strict_violations(&self) -> Vec<(usize, f64)> {
        self.norms
            .iter()
            .enumerate()
            .filter(|(_, &n)| n >= 0.5)
            .map(|(i, &n)| (i + 1, n))
            .collect()
    }

    pub(crate) fn require_diagonal(&self) -> Result<()> {
        if self.diagonal {
            Ok(())
        } else {
            Err(Error::domain(
                "operation requires a diagonal system (all matrices diagonal)",
            ))
        }
    }

    /// Permutations with pairwise distinct potentials, first representative
    /// of each class in lexicographic order.
    pub fn distinct_permutations(&self) -> Result<Vec<Permutation>> {
        self.require_diagonal()?;
        let diags: Vec<Vec<f64>> = self
            .matrices
            .iter()
            .map(|m| m.diagonal_entries().iter().map(|x| x.abs()).collect())
            .collect();
        let mut seen = std::collections::HashSet::new();
        Ok(Permutation::all(self.dim)
            .into_iter()
            .filter(|p| {
                let key: Vec<u64> = diags
                    .iter()
                    .flat_map(|d| (0..self.dim).map(move |j| d[p.index(j)].to_bits()))
                    .collect();
                seen.insert(key)
            })
            .collect())
    }
}

fn find_common_order(matrices: &[Matrix]) -> Option<Permutation> {
    let diags: Vec<Vec<f64>> = matrices
        .iter()
        .map(|m| m.diagonal_entries().iter().map(|x| x.abs()).collect())
        .collect();
    let d = diags[0].len();
    Permutation::all(d).into_iter().find(|p| {
        diags
            .iter()
            .all(|diag| (1..d).all(|j| diag[p.index(j - 1)] >= diag[p.index(j)]))
    })
}

/// `a(s)`: the vector `(ln phi_D^s(A_1), ..., ln phi_D^s(A_k))`.
pub fn a_vector(ifs: &AffineIFS, perm: &Permutation, s: f64) -> Result<Vec<f64>> {
    ifs.require_diagonal()?;
    ifs.matrices()
        .iter()
        .map(|a| log_svf_d(a, perm, s))
        .collect()
}

/// `(ln |a^1_{e_m}|, ..., ln |a^k_{e_m}|)` with `m = ceil(s)`: the
/// left derivative of `a(s)` in `s`. Defined for `s` in `(0, d]`.
pub fn left_slope_vector(ifs: &AffineIFS, perm: &Permutation, s: f64) -> Result<Vec<f64>> {
    ifs.require_diagonal()?;
    let d = ifs.dim() as f64;
    if !(s > 0.0 && s <= d) {
        return Err(Error::range(format!("left slope needs s in (0, {d}], got {s}")));
    }
    let coord = perm.index(s.ceil() as usize - 1);
    Ok(ifs
        .matrices()
        .iter()
        .map(|a| a.get(coord, coord).abs().ln())
        .collect())
}

/// All `ln |a^i_j|`: every one-sided slope of every `a(s)` lies in their range.
pub fn slope_range(ifs: &AffineIFS) -> Result<(f64, f64)> {
    ifs.require_diagonal()?;
    let logs = ifs
        .matrices()
        .iter()
        .flat_map(|a| a.diagonal_entries())
        .map(|x| x.abs().ln());
    Ok(logs.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    }))
}
