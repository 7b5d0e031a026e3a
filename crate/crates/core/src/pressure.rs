//! Full and reduced pressures, bisection, and survivor-set dimensions.
//!
//! For a diagonal system every permutation potential is multiplicative, so
//! `P_D(s) = ln sum_i phi_D^s(A_i)` exactly and the reduced pressure
//! `P_{D,q}(s)` is the log Perron root of the avoidance automaton weighted by
//! `phi_D^s(A_i)`. The full pressures are the maxima over `D`.
//!
//! Non-diagonal systems only get the subadditive upper estimate
//! `(1/n) ln sum_{|i| = n} phi^s(A_i)` at a fixed depth `n`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::avoidance::{reduced_growth_rate, AvoidanceAutomaton};
use crate::error::{Error, Result};
use crate::linalg::{Matrix, PerronOptions};
use crate::potential::{a_vector, log_svf_from_singular_values, AffineIFS, Permutation};
use crate::symbolic::Word;

/// Numerical tolerances shared by the root finders and the Perron solver.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Bisection stops once the bracket is at most this wide.
    #[serde(default = "default_root_tol")]
    pub root_tol: f64,
    /// Relative width of the Collatz–Wielandt bracket for Perron roots.
    #[serde(default = "default_spectral_tol")]
    pub spectral_tol: f64,
    /// Word length for the enumeration estimate on non-diagonal systems;
    /// `None` picks [`default_estimate_depth`].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub estimate_depth: Option<usize>,
}

fn default_root_tol() -> f64 {
    1e-12
}

fn default_spectral_tol() -> f64 {
    1e-13
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            root_tol: default_root_tol(),
            spectral_tol: default_spectral_tol(),
            estimate_depth: None,
        }
    }
}

impl Tolerances {
    pub fn perron(&self) -> PerronOptions {
        PerronOptions::with_tol(self.spectral_tol)
    }

    /// Estimate depth for an alphabet of `k` symbols.
    pub fn depth_for(&self, k: usize) -> usize {
        self.estimate_depth.unwrap_or_else(|| default_estimate_depth(k))
    }
}

/// Outcome of [`root`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Root {
    pub value: f64,
    /// The map was still positive at the upper end; `value` is that end.
    pub capped: bool,
}

/// Bisection for the zero of a continuous decreasing map on `[lo, hi]`.
///
/// Stops when the bracket is at most `tol` wide or can no longer be split
/// in floating point (`tol = 0` runs to full precision). If `f(hi) > 0`
/// the result is `hi` with `capped` set.
pub fn root<F>(mut f: F, lo: f64, hi: f64, tol: f64) -> Result<Root>
where
    F: FnMut(f64) -> Result<f64>,
{
    let f_lo = f(lo)?;
    if f_lo < 0.0 {
        return Err(Error::domain(format!(
            "map is already negative at the lower end ({lo}): f = {f_lo:e}"
        )));
    }
    if f_lo == 0.0 {
        return Ok(Root {
            value: lo,
            capped: false,
        });
    }
    if f(hi)? > 0.0 {
        return Ok(Root {
            value: hi,
            capped: true,
        });
    }
    let (mut lo, mut hi) = (lo, hi);
    for _ in 0..2000 {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid)? >= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Root {
        value: 0.5 * (lo + hi),
        capped: false,
    })
}

/// `ln sum_i exp(x_i)`.
pub(crate) fn log_sum_exp(xs: impl IntoIterator<Item = f64>) -> f64 {
    let xs: Vec<f64> = xs.into_iter().collect();
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + xs.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

/// `P_D(s) = ln sum_i phi_D^s(A_i)` for a diagonal system.
pub fn pressure_d(ifs: &AffineIFS, perm: &Permutation, s: f64) -> Result<f64> {
    Ok(log_sum_exp(a_vector(ifs, perm, s)?))
}

/// `P_{D,q}(s)`: log Perron root of the hole's automaton weighted by
/// `phi_D^s(A_i)`.
pub fn reduced_pressure_d(
    ifs: &AffineIFS,
    perm: &Permutation,
    hole: &AvoidanceAutomaton,
    s: f64,
    opts: &PerronOptions,
) -> Result<f64> {
    check_hole(ifs, hole)?;
    let weights: Vec<f64> = a_vector(ifs, perm, s)?.into_iter().map(f64::exp).collect();
    reduced_growth_rate(hole, &weights, opts)
}

fn check_hole(ifs: &AffineIFS, hole: &AvoidanceAutomaton) -> Result<()> {
    if hole.alphabet_size() != ifs.len() {
        return Err(Error::range(format!(
            "hole over {} symbols for a system of {} maps",
            hole.alphabet_size(),
            ifs.len()
        )));
    }
    Ok(())
}

/// Which potential a [`PressureFunction`] sums.
#[derive(Clone, Debug, PartialEq)]
pub enum Potential {
    /// `phi^s`, realised as `max_D phi_D^s` on diagonal systems.
    Full,
    /// The multiplicative `phi_D^s` of a diagonal system.
    Permuted(Permutation),
}

/// How the pressure values are obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PressureKind {
    /// Exact, through multiplicativity of the permutation potentials.
    ExactMultiplicative,
    /// `(1/n) ln sum_{|i|=n} phi^s(A_i)`; an upper bound for the true value
    /// which is non-increasing along `n, 2n, 4n, ...`.
    GeneralEstimate { n: usize },
}

/// Largest number of words the general estimator will enumerate.
pub const ENUMERATION_BUDGET: u64 = 1 << 24;

/// Default depth: the largest `n` with `k^n <= 2^16`.
pub fn default_estimate_depth(k: usize) -> usize {
    let mut n = 1;
    while (k as u64).pow(n as u32 + 1) <= 1 << 16 {
        n += 1;
    }
    n
}

/// `s -> P(s)` (or `P_D`, `P_q`, `P_{D,q}`) on `[0, d]`.
#[derive(Clone, Debug)]
pub struct PressureFunction<'a> {
    ifs: &'a AffineIFS,
    potential: Potential,
    hole: Option<AvoidanceAutomaton>,
    kind: PressureKind,
    perron: PerronOptions,
    // distinct permutations, cached for Potential::Full on diagonal systems
    perms: Vec<Permutation>,
}

impl<'a> PressureFunction<'a> {
    /// The pressure of `phi^s`; exact for diagonal systems, otherwise the
    /// general estimate at the default depth.
    pub fn full(ifs: &'a AffineIFS) -> Result<Self> {
        if ifs.is_diagonal() {
            Self::build(ifs, Potential::Full, None, PressureKind::ExactMultiplicative)
        } else {
            Self::general(ifs, None, default_estimate_depth(ifs.len()))
        }
    }

    pub fn permuted(ifs: &'a AffineIFS, perm: Permutation) -> Result<Self> {
        Self::build(ifs, Potential::Permuted(perm), None, PressureKind::ExactMultiplicative)
    }

    /// Reduced pressure `P_q` for the hole `[pattern]`.
    pub fn reduced(ifs: &'a AffineIFS, pattern: &Word) -> Result<Self> {
        let hole = AvoidanceAutomaton::new(pattern)?;
        if ifs.is_diagonal() {
            Self::build(ifs, Potential::Full, Some(hole), PressureKind::ExactMultiplicative)
        } else {
            let n = default_estimate_depth(ifs.len());
            Self::build(ifs, Potential::Full, Some(hole), PressureKind::GeneralEstimate { n })
        }
    }

    pub fn reduced_permuted(ifs: &'a AffineIFS, perm: Permutation, pattern: &Word) -> Result<Self> {
        let hole = AvoidanceAutomaton::new(pattern)?;
        Self::build(
            ifs,
            Potential::Permuted(perm),
            Some(hole),
            PressureKind::ExactMultiplicative,
        )
    }

    /// The enumeration estimate at depth `n`, for any system.
    pub fn general(ifs: &'a AffineIFS, pattern: Option<&Word>, n: usize) -> Result<Self> {
        let hole = pattern.map(AvoidanceAutomaton::new).transpose()?;
        Self::build(ifs, Potential::Full, hole, PressureKind::GeneralEstimate { n })
    }

    fn build(
        ifs: &'a AffineIFS,
        potential: Potential,
        hole: Option<AvoidanceAutomaton>,
        kind: PressureKind,
    ) -> Result<Self> {
        if let Some(h) = &hole {
            check_hole(ifs, h)?;
        }
        let perms = match (&kind, &potential) {
            (PressureKind::ExactMultiplicative, Potential::Full) => ifs.distinct_permutations()?,
            (PressureKind::ExactMultiplicative, Potential::Permuted(p)) => {
                ifs.require_diagonal()?;
                if p.len() != ifs.dim() {
                    return Err(Error::range(format!(
                        "permutation {p} does not act on dimension {}",
                        ifs.dim()
                    )));
                }
                Vec::new()
            }
            (PressureKind::GeneralEstimate { n }, _) => {
                if *n == 0 {
                    return Err(Error::range("estimate depth n must be positive"));
                }
                let words = (ifs.len() as u64).checked_pow(*n as u32);
                if words.is_none_or(|w| w > ENUMERATION_BUDGET) {
                    return Err(Error::Budget(format!(
                        "{}^{n} words exceed the budget of 2^24; choose a smaller n",
                        ifs.len()
                    )));
                }
                Vec::new()
            }
        };
        Ok(PressureFunction {
            ifs,
            potential,
            hole,
            kind,
            perron: PerronOptions::default(),
            perms,
        })
    }

    pub fn with_perron(mut self, opts: PerronOptions) -> Self {
        self.perron = opts;
        self
    }

    pub fn kind(&self) -> PressureKind {
        self.kind
    }

    pub fn ifs(&self) -> &AffineIFS {
        self.ifs
    }

    pub fn hole(&self) -> Option<&AvoidanceAutomaton> {
        self.hole.as_ref()
    }

    pub fn eval(&self, s: f64) -> Result<f64> {
        match self.kind {
            PressureKind::GeneralEstimate { n } => {
                general_estimate(self.ifs, self.hole.as_ref(), s, n)
            }
            PressureKind::ExactMultiplicative => match &self.potential {
                Potential::Permuted(p) => self.eval_permuted(p, s),
                Potential::Full => {
                    let mut best = f64::NEG_INFINITY;
                    for p in &self.perms {
                        best = best.max(self.eval_permuted(p, s)?);
                    }
                    Ok(best)
                }
            },
        }
    }

    fn eval_permuted(&self, perm: &Permutation, s: f64) -> Result<f64> {
        match &self.hole {
            None => pressure_d(self.ifs, perm, s),
            Some(h) => reduced_pressure_d(self.ifs, perm, h, s, &self.perron),
        }
    }

    /// Zero on `[0, d]`, capped at `d`.
    pub fn root(&self, tol: f64) -> Result<Root> {
        root(|s| self.eval(s), 0.0, self.ifs.dim() as f64, tol)
    }
}

/// `P(s)`, exact for diagonal systems, otherwise the general estimate at
/// depth `n`.
pub fn pressure(ifs: &AffineIFS, s: f64, n: usize) -> Result<(f64, PressureKind)> {
    let f = if ifs.is_diagonal() {
        PressureFunction::full(ifs)?
    } else {
        PressureFunction::general(ifs, None, n)?
    };
    Ok((f.eval(s)?, f.kind()))
}

/// `(1/n) ln sum phi^s(A_i)` over words of length `n`, restricted to words
/// avoiding the hole when one is given.
pub fn general_estimate(
    ifs: &AffineIFS,
    hole: Option<&AvoidanceAutomaton>,
    s: f64,
    n: usize,
) -> Result<f64> {
    let d = ifs.dim();
    if !(0.0..=d as f64).contains(&s) {
        return Err(Error::range(format!("s = {s} outside [0, {d}]")));
    }
    if n == 0 {
        return Err(Error::range("estimate depth n must be positive"));
    }
    let k = ifs.len();
    // split on the first symbol for parallelism; every branch is a DFS
    let partials: Vec<(f64, f64)> = (0..k)
        .into_par_iter()
        .map(|first| {
            let mut acc = LogAccumulator::default();
            let state = match hole {
                Some(h) => match h.step(0, first) {
                    Some(u) => Some(u),
                    None => return acc.finish(),
                },
                None => None,
            };
            let mut stack = vec![(ifs.matrices()[first].clone(), state, 1usize)];
            while let Some((m, state, len)) = stack.pop() {
                if len == n {
                    acc.push(log_svf_from_singular_values(&m.singular_values(), s));
                    continue;
                }
                for (i, a) in ifs.matrices().iter().enumerate() {
                    let next = match (hole, state) {
                        (Some(h), Some(u)) => match h.step(u, i) {
                            Some(v) => Some(v),
                            None => continue,
                        },
                        _ => None,
                    };
                    stack.push((&m * a, next, len + 1));
                }
            }
            acc.finish()
        })
        .collect();
    let mut total = LogAccumulator::default();
    for (max, sum) in partials {
        total.merge(max, sum);
    }
    let (max, sum) = total.finish();
    Ok((max + sum.ln()) / n as f64)
}

/// Streaming `ln sum exp` as `(max, sum exp(x - max))`.
#[derive(Default)]
struct LogAccumulator {
    max: Option<f64>,
    sum: f64,
}

impl LogAccumulator {
    fn push(&mut self, x: f64) {
        self.merge(x, 1.0);
    }

    fn merge(&mut self, max: f64, sum: f64) {
        if sum == 0.0 || max == f64::NEG_INFINITY {
            return;
        }
        match self.max {
            None => {
                self.max = Some(max);
                self.sum = sum;
            }
            Some(m) if max > m => {
                self.sum = self.sum * (m - max).exp() + sum;
                self.max = Some(max);
            }
            Some(m) => self.sum += sum * (max - m).exp(),
        }
    }

    fn finish(self) -> (f64, f64) {
        (self.max.unwrap_or(f64::NEG_INFINITY), self.sum)
    }
}

/// One row of a per-permutation root table.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PermutationRoot {
    pub permutation: Permutation,
    pub root: f64,
    pub capped: bool,
}

/// `s_0`, the zero of the full pressure, with the per-permutation zeros.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FullDimension {
    /// `min(d, s_0)`.
    pub dimension: f64,
    pub s0: f64,
    pub capped: bool,
    pub kind: PressureKind,
    /// Zeros `s_0^D` of each `P_D` (diagonal systems only).
    pub per_permutation: Vec<PermutationRoot>,
}

/// Zero of the full pressure. For diagonal systems the zero is refined to
/// full floating-point precision since `P` is exact and cheap; the
/// downstream measures rely on `sum_i phi_D^{s_0}(A_i) = 1` to rounding.
pub fn full_dimension(ifs: &AffineIFS, tol: &Tolerances) -> Result<FullDimension> {
    let f = if ifs.is_diagonal() {
        PressureFunction::full(ifs)?
    } else {
        PressureFunction::general(ifs, None, tol.depth_for(ifs.len()))?
    };
    let root_tol = if ifs.is_diagonal() { 0.0 } else { tol.root_tol };
    let r = f.root(root_tol)?;
    let per_permutation = if ifs.is_diagonal() {
        ifs.distinct_permutations()?
            .into_par_iter()
            .map(|p| {
                let fp = PressureFunction::permuted(ifs, p.clone())?;
                let r = fp.root(0.0)?;
                Ok(PermutationRoot {
                    permutation: p,
                    root: r.value,
                    capped: r.capped,
                })
            })
            .collect::<Result<Vec<_>>>()?
    } else {
        Vec::new()
    };
    Ok(FullDimension {
        dimension: r.value,
        s0: r.value,
        capped: r.capped,
        kind: f.kind(),
        per_permutation,
    })
}

/// Dimension of the survivor set of the hole `[pattern]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SurvivorDimension {
    /// `min(d, max_D t_q^D)`.
    pub dimension: f64,
    pub capped: bool,
    /// `t_q^D` for every distinct permutation.
    pub per_permutation: Vec<PermutationRoot>,
}

impl SurvivorDimension {
    /// `max_D t_q^D` before capping.
    pub fn t_q(&self) -> f64 {
        self.dimension
    }
}

/// `dim Lambda_q = min{d, max_D t_q^D}` for a diagonal system.
pub fn survivor_dimension(
    ifs: &AffineIFS,
    pattern: &Word,
    tol: &Tolerances,
) -> Result<SurvivorDimension> {
    ifs.require_diagonal()?;
    let hole = AvoidanceAutomaton::new(pattern)?;
    check_hole(ifs, &hole)?;
    let perron = tol.perron();
    let per_permutation = ifs
        .distinct_permutations()?
        .into_par_iter()
        .map(|p| {
            let r = root(
                |s| reduced_pressure_d(ifs, &p, &hole, s, &perron),
                0.0,
                ifs.dim() as f64,
                tol.root_tol,
            )?;
            Ok(PermutationRoot {
                permutation: p,
                root: r.value,
                capped: r.capped,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let best = per_permutation
        .iter()
        .max_by(|a, b| a.root.total_cmp(&b.root))
        .expect("at least one permutation");
    Ok(SurvivorDimension {
        dimension: best.root,
        capped: best.capped,
        per_permutation,
    })
}

/// Zero of the reduced `D`-pressure, `t_q^D`.
pub fn reduced_root_d(
    ifs: &AffineIFS,
    perm: &Permutation,
    hole: &AvoidanceAutomaton,
    tol: &Tolerances,
) -> Result<Root> {
    let perron = tol.perron();
    root(
        |s| reduced_pressure_d(ifs, perm, hole, s, &perron),
        0.0,
        ifs.dim() as f64,
        tol.root_tol,
    )
}

/// Singular values of every product of `n` matrices; test and bench helper.
pub fn word_products(ifs: &AffineIFS, n: usize) -> Vec<Matrix> {
    let mut out = vec![Matrix::identity(ifs.dim())];
    for _ in 0..n {
        out = out
            .iter()
            .flat_map(|m| ifs.matrices().iter().map(move |a| m * a))
            .collect();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{dense_spectral_radius, Matrix};
    use crate::potential::svf;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn two_perm() -> AffineIFS {
        AffineIFS::diagonal(&[vec![4.0 / 9.0, 1.0 / 9.0], vec![1.0 / 9.0, 4.0 / 9.0]]).unwrap()
    }

    fn homogeneous(a: f64, k: usize) -> AffineIFS {
        AffineIFS::diagonal(&vec![vec![a, a]; k]).unwrap()
    }

    fn word(s: &[usize], k: usize) -> Word {
        Word::new(s, k).unwrap()
    }

    fn random_diagonal(rng: &mut ChaCha8Rng, k: usize, d: usize) -> AffineIFS {
        let diags: Vec<Vec<f64>> = (0..k)
            .map(|_| (0..d).map(|_| rng.random_range(0.05..0.49)).collect())
            .collect();
        AffineIFS::diagonal(&diags).unwrap()
    }

    #[test]
    fn pressure_d_examples() {
        let ifs = two_perm();
        let v = pressure_d(&ifs, &Permutation::identity(2), 0.5).unwrap();
        assert!(v.abs() < 1e-15);
        for k in [2, 3, 5] {
            let h = homogeneous(0.3, k);
            assert!((pressure_d(&h, &Permutation::identity(2), 0.0).unwrap() - (k as f64).ln()).abs() < 1e-15);
        }
        let h = homogeneous(1.0 / 3.0, 2);
        let v = pressure_d(&h, &Permutation::identity(2), 1.0).unwrap();
        assert!((v - (2.0f64 / 3.0).ln()).abs() < 1e-15);
        let full = Matrix::from_rows(&[vec![0.3, 0.1], vec![0.0, 0.2]]).unwrap();
        let ifs = AffineIFS::new(vec![full.clone(), full], None).unwrap();
        assert!(matches!(
            pressure_d(&ifs, &Permutation::identity(2), 0.5),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn full_pressure_examples() {
        let (v, kind) = pressure(&two_perm(), 0.5, 4).unwrap();
        assert!(v.abs() < 1e-15);
        assert_eq!(kind, PressureKind::ExactMultiplicative);
        let h = homogeneous(1.0 / 3.0, 2);
        let (v, _) = pressure(&h, 2f64.ln() / 3f64.ln(), 4).unwrap();
        assert!(v.abs() < 1e-15);
        let full = Matrix::from_rows(&[vec![0.3, 0.1], vec![0.0, 0.2]]).unwrap();
        let other = Matrix::from_rows(&[vec![0.2, 0.0], vec![0.15, 0.25]]).unwrap();
        let ifs = AffineIFS::new(vec![full, other], None).unwrap();
        for n in [1, 3, 6] {
            let (v, kind) = pressure(&ifs, 0.0, n).unwrap();
            assert!((v - 2f64.ln()).abs() < 1e-14);
            assert_eq!(kind, PressureKind::GeneralEstimate { n });
        }
        assert!(matches!(pressure(&ifs, 0.5, 25), Err(Error::Budget(_))));
    }

    #[test]
    fn reduced_pressure_examples() {
        let ifs = two_perm();
        let id = Permutation::identity(2);
        let opts = PerronOptions::default();
        let hole1 = AvoidanceAutomaton::new(&word(&[1], 2)).unwrap();
        let v = reduced_pressure_d(&ifs, &id, &hole1, 0.5, &opts).unwrap();
        assert!((v - (1.0f64 / 3.0).ln()).abs() < 1e-14);
        // rho([[1/3, 2/3], [1/3, 0]]) = 2/3
        let hole11 = AvoidanceAutomaton::new(&word(&[1, 1], 2)).unwrap();
        let v = reduced_pressure_d(&ifs, &id, &hole11, 0.5, &opts).unwrap();
        assert!((v - (2.0f64 / 3.0).ln()).abs() < 1e-13);
        let m = Matrix::from_rows(&[vec![1.0 / 3.0, 2.0 / 3.0], vec![1.0 / 3.0, 0.0]]).unwrap();
        assert!((v - dense_spectral_radius(&m).ln()).abs() < 1e-13);
    }

    #[test]
    fn long_hole_invisible_below_its_length() {
        let ifs = two_perm();
        let id = Permutation::identity(2);
        let pattern = word(&[1, 2, 2, 1, 2, 1, 1], 2);
        let hole = AvoidanceAutomaton::new(&pattern).unwrap();
        let w: Vec<f64> = a_vector(&ifs, &id, 0.7).unwrap().into_iter().map(f64::exp).collect();
        for n in 0..pattern.len() {
            let restricted = crate::avoidance::weighted_survivor_sum(&hole, &w, n).unwrap();
            let unrestricted = w.iter().sum::<f64>().powi(n as i32);
            assert!((restricted - unrestricted).abs() < 1e-15 * unrestricted.max(1.0));
        }
    }

    #[test]
    fn root_examples() {
        let h = homogeneous(1.0 / 3.0, 2);
        let r = PressureFunction::full(&h).unwrap().root(1e-12).unwrap();
        assert!((r.value - 2f64.ln() / 3f64.ln()).abs() < 1e-12);
        assert!(!r.capped);
        let r = PressureFunction::full(&two_perm()).unwrap().root(1e-12).unwrap();
        assert!((r.value - 0.5).abs() < 1e-12);
        // k * 0.49^s = 1
        let r = PressureFunction::full(&homogeneous(0.49, 4)).unwrap().root(1e-12).unwrap();
        assert!((r.value - 1.943358209874732).abs() < 1e-11);
        assert!(!r.capped);
        let r = PressureFunction::full(&homogeneous(0.49, 5)).unwrap().root(1e-12).unwrap();
        assert_eq!(r.value, 2.0);
        assert!(r.capped);
    }

    #[test]
    fn root_rejects_negative_start() {
        assert!(matches!(
            root(|s| Ok(-1.0 - s), 0.0, 1.0, 1e-12),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn survivor_dimension_examples() {
        let tol = Tolerances::default();
        let h = homogeneous(1.0 / 3.0, 2);
        let sd = survivor_dimension(&h, &word(&[1], 2), &tol).unwrap();
        assert_eq!(sd.dimension, 0.0);

        // oracle: dense eigenvalues of the 2x2 transfer matrices + bisection
        let sd = survivor_dimension(&two_perm(), &word(&[1, 1], 2), &tol).unwrap();
        assert_eq!(sd.per_permutation.len(), 2);
        let expected = [0.26859355647115035, 0.41583837828668263];
        for (row, e) in sd.per_permutation.iter().zip(expected) {
            assert!((row.root - e).abs() < 1e-11, "{} vs {e}", row.root);
        }
        assert!((sd.dimension - 0.41583837828668263).abs() < 1e-11);
    }

    #[test]
    fn survivor_dimension_matches_dense_oracle_route() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let tol = Tolerances::default();
        for _ in 0..10 {
            let ifs = random_diagonal(&mut rng, 3, 2);
            let pattern = Word::from_indices((0..3).map(|_| rng.random_range(0..3)).collect(), 3).unwrap();
            let sd = survivor_dimension(&ifs, &pattern, &tol).unwrap();
            let hole = AvoidanceAutomaton::new(&pattern).unwrap();
            for row in &sd.per_permutation {
                let oracle = root(
                    |s| {
                        let w: Vec<f64> = a_vector(&ifs, &row.permutation, s)
                            .unwrap()
                            .into_iter()
                            .map(f64::exp)
                            .collect();
                        Ok(dense_spectral_radius(&hole.transfer(&w).unwrap().to_dense()).ln())
                    },
                    0.0,
                    2.0,
                    1e-13,
                )
                .unwrap();
                assert!((row.root - oracle.value).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn survivor_dimension_below_s0_and_increasing() {
        let tol = Tolerances::default();
        let ifs = AffineIFS::diagonal(&[vec![0.4, 0.2], vec![0.3, 0.1], vec![0.25, 0.15]]).unwrap();
        let s0 = full_dimension(&ifs, &tol).unwrap().s0;
        let spec = crate::symbolic::HoleSpec::periodic(word(&[1, 3], 3)).unwrap();
        let mut prev = 0.0;
        for q in 1..=10 {
            let t = survivor_dimension(&ifs, &spec.prefix(q).unwrap(), &tol).unwrap().dimension;
            assert!(t < s0);
            assert!(t >= prev - 1e-12);
            prev = t;
        }
    }

    #[test]
    fn pressure_d_slopes_bracket_difference_quotients() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..100 {
            let ifs = random_diagonal(&mut rng, 3, 3);
            let p = Permutation::all(3)[rng.random_range(0..6)].clone();
            let s = rng.random_range(0.0..2.9);
            let h = 0.05;
            let q = (pressure_d(&ifs, &p, s + h).unwrap() - pressure_d(&ifs, &p, s).unwrap()) / h;
            // slopes on [s, s+h] come from coordinates e_{ceil t}, t in (s, s+h]
            let lo_idx = s.floor() as usize;
            let hi_idx = ((s + h).ceil() as usize - 1).min(2);
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for j in lo_idx..=hi_idx {
                for a in ifs.matrices() {
                    let v = a.get(p.index(j), p.index(j)).ln();
                    lo = lo.min(v);
                    hi = hi.max(v);
                }
            }
            assert!(q < 0.0);
            assert!(lo - 1e-9 <= q && q <= hi + 1e-9, "{lo} <= {q} <= {hi}");
        }
    }

    #[test]
    fn reduced_below_full_and_gap_shrinks_with_q() {
        let ifs = AffineIFS::diagonal(&[vec![0.4, 0.2], vec![0.3, 0.1]]).unwrap();
        let opts = PerronOptions::default();
        let spec = crate::symbolic::HoleSpec::periodic(word(&[1, 2, 2], 2)).unwrap();
        for p in Permutation::all(2) {
            for s in [0.2, 0.9, 1.4] {
                let full = pressure_d(&ifs, &p, s).unwrap();
                let mut prev_gap = f64::INFINITY;
                for q in 1..=12 {
                    let hole = AvoidanceAutomaton::new(&spec.prefix(q).unwrap()).unwrap();
                    let red = reduced_pressure_d(&ifs, &p, &hole, s, &opts).unwrap();
                    let gap = full - red;
                    assert!(gap > 0.0);
                    assert!(gap <= prev_gap + 1e-13);
                    prev_gap = gap;
                }
            }
        }
    }

    #[test]
    fn general_estimate_couples_with_exact_for_same_order() {
        let ifs = AffineIFS::diagonal(&[vec![0.4, 0.2], vec![0.3, 0.1], vec![0.35, 0.05]]).unwrap();
        assert!(ifs.is_same_order());
        let exact = PressureFunction::full(&ifs).unwrap();
        for n in [1, 2, 5] {
            let est = PressureFunction::general(&ifs, None, n).unwrap();
            for s in [0.0, 0.4, 1.0, 1.7, 2.0] {
                assert!((est.eval(s).unwrap() - exact.eval(s).unwrap()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn general_estimate_fekete_monotone() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..5 {
            let mats: Vec<Matrix> = (0..2)
                .map(|_| loop {
                    let rows: Vec<Vec<f64>> = (0..2)
                        .map(|_| (0..2).map(|_| rng.random_range(-0.5..0.5)).collect())
                        .collect();
                    let m = Matrix::from_rows(&rows).unwrap();
                    let sv = m.singular_values();
                    if sv[0] < 0.9 && sv[1] > 0.01 {
                        break m;
                    }
                })
                .collect();
            let ifs = AffineIFS::new(mats, None).unwrap();
            for s in [0.3, 1.0, 1.6] {
                let e: Vec<f64> = [2, 4, 8]
                    .iter()
                    .map(|&n| general_estimate(&ifs, None, s, n).unwrap())
                    .collect();
                assert!(e[1] <= e[0] + 1e-12 && e[2] <= e[1] + 1e-12, "{e:?}");
            }
        }
    }

    #[test]
    fn general_estimate_matches_direct_sum() {
        let a = Matrix::from_rows(&[vec![0.3, 0.1], vec![0.0, 0.2]]).unwrap();
        let b = Matrix::from_rows(&[vec![0.2, 0.0], vec![0.15, 0.25]]).unwrap();
        let ifs = AffineIFS::new(vec![a, b], None).unwrap();
        let n = 5;
        let s = 0.8;
        let direct: f64 = word_products(&ifs, n).iter().map(|m| svf(m, s).unwrap()).sum();
        let est = general_estimate(&ifs, None, s, n).unwrap();
        assert!((est - direct.ln() / n as f64).abs() < 1e-13);
        // reduced variant: drop words containing "11"
        let hole = AvoidanceAutomaton::new(&word(&[1, 1], 2)).unwrap();
        let est_q = general_estimate(&ifs, Some(&hole), s, n).unwrap();
        assert!(est_q < est);
    }
}
