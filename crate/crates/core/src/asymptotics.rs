//! Maximizing frequencies, the deficit constant `Z(D)`, and the scans that
//! compare finite-`q` survivor dimensions and escape rates with their
//! predicted limits.

use std::ops::RangeInclusive;

use rayon::prelude::*;
use serde::Serialize;

use crate::avoidance::AvoidanceAutomaton;
use crate::error::{Error, Result};
use crate::measures::{mu_d_at, BernoulliMeasure};
use crate::potential::{a_vector, left_slope_vector, slope_range, AffineIFS, Permutation};
use crate::pressure::{
    full_dimension, pressure_d, reduced_pressure_d, reduced_root_d, survivor_dimension, Tolerances,
};
use crate::symbolic::{HoleSpec, Word};

/// Permutations with `|P_D(s_0)|` at most this take part in the deficit
/// denominator.
pub const MAXIMIZING_TOL: f64 = 1e-9;

/// Finite-difference steps for one-sided derivatives, coarse to fine.
pub const DERIVATIVE_STEPS: [f64; 3] = [1e-3, 1e-4, 1e-5];

/// Spread across [`DERIVATIVE_STEPS`] above which a derivative is flagged
/// non-smooth.
pub const NONSMOOTH_SPREAD: f64 = 1e-3;

/// A point of the probability simplex.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FrequencyVector(Vec<f64>);

impl FrequencyVector {
    pub fn new(components: Vec<f64>) -> Result<Self> {
        if components.iter().any(|c| !(*c >= 0.0)) {
            return Err(Error::domain("frequencies must be nonnegative"));
        }
        let sum: f64 = components.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::domain(format!("frequencies sum to {sum}, not 1")));
        }
        Ok(FrequencyVector(components))
    }

    pub fn components(&self) -> &[f64] {
        &self.0
    }

    /// `-sum alpha_i ln alpha_i`, with `0 ln 0 = 0`.
    pub fn entropy(&self) -> f64 {
        -self
            .0
            .iter()
            .filter(|&&a| a > 0.0)
            .map(|a| a * a.ln())
            .sum::<f64>()
    }
}

/// Softmax of `a(s)`: the unique maximizer of `g^s` over the simplex.
pub fn maximizing_frequency(ifs: &AffineIFS, perm: &Permutation, s: f64) -> Result<FrequencyVector> {
    let a = a_vector(ifs, perm, s)?;
    let max = a.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = a.iter().map(|x| (x - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    let mut alpha: Vec<f64> = exps.iter().map(|e| e / total).collect();
    // put the rounding residue on the largest component
    let (imax, _) = alpha
        .iter()
        .enumerate()
        .max_by(|x, y| x.1.total_cmp(y.1))
        .expect("nonempty");
    let rest: f64 = alpha.iter().enumerate().filter(|(i, _)| *i != imax).map(|(_, v)| v).sum();
    alpha[imax] = 1.0 - rest;
    FrequencyVector::new(alpha)
}

/// `g^s(alpha) = H(alpha) + <a(s), alpha>`.
pub fn g_value(ifs: &AffineIFS, perm: &Permutation, s: f64, alpha: &FrequencyVector) -> Result<f64> {
    let a = a_vector(ifs, perm, s)?;
    if a.len() != alpha.components().len() {
        return Err(Error::range("frequency vector has the wrong length"));
    }
    let linear: f64 = a.iter().zip(alpha.components()).map(|(x, y)| x * y).sum();
    Ok(alpha.entropy() + linear)
}

/// A one-sided derivative estimate with its error bar.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LeftDerivative {
    /// Value at the finest step.
    pub value: f64,
    /// Largest difference between the estimates at the different steps.
    pub spread: f64,
    pub nonsmooth: bool,
}

/// Left derivative of `f` at `s` by the one-sided second-order stencil
/// `(3 f(s) - 4 f(s - h) + f(s - 2h)) / 2h` over [`DERIVATIVE_STEPS`].
///
/// The stencil is exact for the piecewise-linear parts of pressure curves
/// and has `O(h^2)` error on the smooth parts. A kink inside `[s - 2h, s)`
/// shows up as a large spread.
pub fn left_derivative<F>(f: F, s: f64) -> Result<LeftDerivative>
where
    F: Fn(f64) -> Result<f64>,
{
    let coarsest = DERIVATIVE_STEPS[0];
    if s < 2.0 * coarsest {
        return Err(Error::range(format!(
            "left derivative at s = {s} needs s >= {}",
            2.0 * coarsest
        )));
    }
    let fs = f(s)?;
    let mut estimates = Vec::with_capacity(DERIVATIVE_STEPS.len());
    for h in DERIVATIVE_STEPS {
        estimates.push((3.0 * fs - 4.0 * f(s - h)? + f(s - 2.0 * h)?) / (2.0 * h));
    }
    let lo = estimates.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = estimates.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let spread = hi - lo;
    Ok(LeftDerivative {
        value: *estimates.last().expect("steps"),
        spread,
        nonsmooth: spread > NONSMOOTH_SPREAD,
    })
}

/// `P_D'(s - 0)` by finite differences.
pub fn pressure_left_derivative(ifs: &AffineIFS, perm: &Permutation, s: f64) -> Result<LeftDerivative> {
    let d = ifs.dim() as f64;
    if !(s > 0.0 && s <= d) {
        return Err(Error::range(format!("s = {s} outside (0, {d}]")));
    }
    left_derivative(|t| pressure_d(ifs, perm, t), s)
}

/// `<left slopes at s, alpha^s>`: the exact left derivative of `P_D` at `s`.
pub fn analytic_left_derivative(ifs: &AffineIFS, perm: &Permutation, s: f64) -> Result<f64> {
    let slopes = left_slope_vector(ifs, perm, s)?;
    let alpha = maximizing_frequency(ifs, perm, s)?;
    Ok(slopes.iter().zip(alpha.components()).map(|(x, y)| x * y).sum())
}

/// The deficit constant of a maximizing permutation, by two routes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ZConstant {
    /// `-1 / <left slopes at s_0, alpha^{s_0}>`.
    pub value: f64,
    /// `-1 / P_D'(s_0 - 0)` from finite differences.
    pub finite_difference: f64,
    pub s0: f64,
    /// `s_0` is an integer, so only the left-sided constant is meaningful.
    pub one_sided: bool,
}

/// Relative agreement required between the two routes to `Z`.
pub const Z_AGREEMENT: f64 = 1e-6;

pub fn z_constant(ifs: &AffineIFS, perm: &Permutation, tol: &Tolerances) -> Result<ZConstant> {
    let s0 = full_dimension(ifs, tol)?.s0;
    z_constant_at(ifs, perm, s0)
}

/// [`z_constant`] with a precomputed `s_0`.
pub fn z_constant_at(ifs: &AffineIFS, perm: &Permutation, s0: f64) -> Result<ZConstant> {
    let p = pressure_d(ifs, perm, s0)?;
    if p.abs() > MAXIMIZING_TOL {
        return Err(Error::NonMaximal {
            permutation: perm.to_string(),
            pressure: p,
        });
    }
    let value = -1.0 / analytic_left_derivative(ifs, perm, s0)?;
    let fd = pressure_left_derivative(ifs, perm, s0)?;
    let finite_difference = -1.0 / fd.value;
    if (value - finite_difference).abs() > Z_AGREEMENT * value.abs().max(1.0) {
        return Err(Error::Internal(format!(
            "Z({perm}) disagrees between routes: {value} vs {finite_difference}"
        )));
    }
    Ok(ZConstant {
        value,
        finite_difference,
        s0,
        one_sided: s0.fract() == 0.0,
    })
}

/// One row of an escape-ratio scan.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FpRow {
    pub q: usize,
    pub hole: String,
    pub mass: f64,
    pub escape_rate: f64,
    pub ratio: f64,
    /// The escape rate is too small for the spectral tolerance to resolve
    /// the ratio to three digits.
    pub precision_warning: bool,
}

/// `r_m(U_q) / m(U_q)` along a shrinking hole.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FpRatioTable {
    pub predicted_limit: f64,
    pub periodic: bool,
    pub period: Option<usize>,
    pub rows: Vec<FpRow>,
}

pub fn fp_ratio_scan(
    m: &BernoulliMeasure,
    spec: &HoleSpec,
    q_range: RangeInclusive<usize>,
    tol: &Tolerances,
) -> Result<FpRatioTable> {
    check_range(&q_range, spec)?;
    let period = spec.period();
    let predicted_limit = match period {
        Some(l) => 1.0 - m.cylinder_mass(&spec.prefix(l)?)?,
        None => 1.0,
    };
    let opts = tol.perron();
    let rows = q_range
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|q| {
            let hole = spec.prefix(q)?;
            let mass = m.cylinder_mass(&hole)?;
            let escape_rate = m.escape_rate(&hole, &opts)?;
            Ok(FpRow {
                q,
                hole: hole.to_string(),
                mass,
                escape_rate,
                ratio: escape_rate / mass,
                precision_warning: escape_rate < 1e3 * tol.spectral_tol,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FpRatioTable {
        predicted_limit,
        periodic: period.is_some(),
        period,
        rows,
    })
}

fn check_range(q_range: &RangeInclusive<usize>, spec: &HoleSpec) -> Result<()> {
    if q_range.is_empty() || *q_range.start() == 0 {
        return Err(Error::range(format!(
            "q range {}..={} must be nonempty and start at 1 or later",
            q_range.start(),
            q_range.end()
        )));
    }
    if let Some(max) = spec.max_depth() {
        if *q_range.end() > max {
            return Err(Error::range(format!(
                "q = {} exceeds the explicit prefix length {max}",
                q_range.end()
            )));
        }
    }
    Ok(())
}

/// Per-permutation data of a maximizing `D` at one `q`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PermutationDeficit {
    pub permutation: Permutation,
    /// `mu_D[q|_q]`.
    pub mass: f64,
    /// `t_q^D`.
    pub t_q: f64,
    /// `Z(D) (1 - mu_D[q|_l]) mu_D[q|_q]`, the factor `(1 - ...)` only for
    /// periodic holes.
    pub denominator: f64,
    /// Overall deficit over this permutation's denominator.
    pub ratio: f64,
}

/// One row of a [`DeficitReport`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DeficitRow {
    pub q: usize,
    pub hole: String,
    /// `t_q = max_D t_q^D`.
    pub t_q: f64,
    /// `s_0 - t_q`.
    pub deficit: f64,
    /// Minimum of the per-permutation denominators.
    pub denominator: f64,
    /// `deficit / denominator`; predicted to tend to one.
    pub ratio: f64,
    /// The same ratio with `Z(D)` replaced by `1 / Z(D)`.
    pub ratio_inverse_z: f64,
    pub predicted_limit: f64,
    pub per_permutation: Vec<PermutationDeficit>,
    /// The deficit is within 100 root tolerances of zero.
    pub precision_warning: bool,
}

/// Data of a maximizing permutation that does not depend on `q`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MaximizingPermutation {
    pub permutation: Permutation,
    pub z: ZConstant,
    pub weights: Vec<f64>,
    /// `mu_D[q|_l]`, periodic holes only.
    pub period_mass: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DeficitReport {
    pub s0: f64,
    pub hole: String,
    pub periodic: bool,
    pub period: Option<usize>,
    pub maximizing: Vec<MaximizingPermutation>,
    pub rows: Vec<DeficitRow>,
}

impl DeficitReport {
    /// The last row whose deficit is resolved by the root tolerance.
    pub fn last_trustworthy(&self) -> Option<&DeficitRow> {
        self.rows.iter().rev().find(|r| !r.precision_warning)
    }
}

/// Permutations with `|P_D(s_0)| <= MAXIMIZING_TOL`.
pub fn maximizing_permutations(ifs: &AffineIFS, s0: f64) -> Result<Vec<Permutation>> {
    let mut out = Vec::new();
    for p in ifs.distinct_permutations()? {
        if pressure_d(ifs, &p, s0)?.abs() <= MAXIMIZING_TOL {
            out.push(p);
        }
    }
    Ok(out)
}

/// Deficit `s_0 - t_q` against `min_D Z(D) (1 - mu_D[q|_l]) mu_D[q|_q]`
/// for every `q` in range. Rows after the first precision warning are
/// dropped.
pub fn deficit_scan(
    ifs: &AffineIFS,
    spec: &HoleSpec,
    q_range: RangeInclusive<usize>,
    tol: &Tolerances,
) -> Result<DeficitReport> {
    ifs.require_diagonal()?;
    check_range(&q_range, spec)?;
    if spec.alphabet_size() != ifs.len() {
        return Err(Error::range(format!(
            "hole over {} symbols for a system of {} maps",
            spec.alphabet_size(),
            ifs.len()
        )));
    }
    let full = full_dimension(ifs, tol)?;
    if full.capped {
        return Err(Error::domain(format!(
            "pressure is positive at s = {}; the deficit is not defined",
            ifs.dim()
        )));
    }
    let s0 = full.s0;
    let period = spec.period();
    let period_word = period.map(|l| spec.prefix(l)).transpose()?;
    let maximizing = maximizing_permutations(ifs, s0)?
        .into_iter()
        .map(|p| {
            let z = z_constant_at(ifs, &p, s0)?;
            let mu = mu_d_at(ifs, &p, s0)?;
            let period_mass = period_word.as_ref().map(|w| mu.cylinder_mass(w)).transpose()?;
            Ok(MaximizingPermutation {
                permutation: p,
                z,
                weights: mu.weights().to_vec(),
                period_mass,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    if maximizing.is_empty() {
        return Err(Error::Internal("no permutation attains P_D(s0) = 0".into()));
    }
    let mut rows = q_range
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|q| deficit_row(ifs, spec, q, s0, &maximizing, tol))
        .collect::<Result<Vec<_>>>()?;
    if let Some(first) = rows.iter().position(|r| r.precision_warning) {
        rows.truncate(first + 1);
    }
    Ok(DeficitReport {
        s0,
        hole: spec.describe(),
        periodic: period.is_some(),
        period,
        maximizing,
        rows,
    })
}

fn deficit_row(
    ifs: &AffineIFS,
    spec: &HoleSpec,
    q: usize,
    s0: f64,
    maximizing: &[MaximizingPermutation],
    tol: &Tolerances,
) -> Result<DeficitRow> {
    let hole = spec.prefix(q)?;
    let survivor = survivor_dimension(ifs, &hole, tol)?;
    let t_q = survivor.dimension;
    let deficit = s0 - t_q;
    let mut per_permutation = Vec::with_capacity(maximizing.len());
    let mut denominator = f64::INFINITY;
    let mut denominator_inverse_z = f64::INFINITY;
    for m in maximizing {
        let mu = BernoulliMeasure::new(m.weights.clone())?;
        let mass = mu.cylinder_mass(&hole)?;
        let periodic_factor = 1.0 - m.period_mass.unwrap_or(0.0);
        let denom = m.z.value * periodic_factor * mass;
        denominator = denominator.min(denom);
        denominator_inverse_z = denominator_inverse_z.min(periodic_factor * mass / m.z.value);
        let t_q_d = survivor
            .per_permutation
            .iter()
            .find(|r| r.permutation == m.permutation)
            .map(|r| r.root)
            .ok_or_else(|| Error::Internal(format!("no survivor root for {}", m.permutation)))?;
        per_permutation.push(PermutationDeficit {
            permutation: m.permutation.clone(),
            mass,
            t_q: t_q_d,
            denominator: denom,
            ratio: deficit / denom,
        });
    }
    Ok(DeficitRow {
        q,
        hole: hole.to_string(),
        t_q,
        deficit,
        denominator,
        ratio: deficit / denominator,
        ratio_inverse_z: deficit / denominator_inverse_z,
        predicted_limit: 1.0,
        per_permutation,
        precision_warning: deficit < 100.0 * tol.root_tol,
    })
}

/// One row of [`derivative_relation_check`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DerivativeRow {
    pub q: usize,
    /// `-P_{D,q}(s_0)`.
    pub reduced_gap: f64,
    /// `t_q^D`.
    pub t_q: f64,
    /// `-P_{D,q}(s_0) / (s_0 - t_q^D)`.
    pub ratio: f64,
    /// `|ratio / target - 1|`.
    pub relative_error: f64,
    /// `ratio` lies in the slope bracket.
    pub in_bracket: bool,
    pub precision_warning: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DerivativeReport {
    pub permutation: Permutation,
    /// Zero of `P_D` (equal to the global `s_0` for maximizing `D`).
    pub s0: f64,
    /// `-P_D'(s_0 - 0)` from finite differences.
    pub target: f64,
    pub target_spread: f64,
    pub nonsmooth: bool,
    /// `[min, max]` of `-ln |a^i_j|`, which contains every chord slope.
    pub slope_bracket: (f64, f64),
    pub rows: Vec<DerivativeRow>,
}

/// Chord slopes `-P_{D,q}(s_0) / (s_0 - t_q^D)` against `-P_D'(s_0 - 0)`.
/// Here `s_0` is the zero of `P_D` itself.
pub fn derivative_relation_check(
    ifs: &AffineIFS,
    perm: &Permutation,
    spec: &HoleSpec,
    q_range: RangeInclusive<usize>,
    tol: &Tolerances,
) -> Result<DerivativeReport> {
    ifs.require_diagonal()?;
    check_range(&q_range, spec)?;
    let s0 = crate::pressure::root(|s| pressure_d(ifs, perm, s), 0.0, ifs.dim() as f64, 0.0)?;
    if s0.capped {
        return Err(Error::domain(format!("P_{perm} is positive on all of [0, d]")));
    }
    let s0 = s0.value;
    let deriv = pressure_left_derivative(ifs, perm, s0)?;
    let target = -deriv.value;
    let (lo, hi) = slope_range(ifs)?;
    let slope_bracket = (-hi, -lo);
    let opts = tol.perron();
    let rows = q_range
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|q| {
            let hole: Word = spec.prefix(q)?;
            let aut = AvoidanceAutomaton::new(&hole)?;
            let reduced_gap = -reduced_pressure_d(ifs, perm, &aut, s0, &opts)?;
            let t_q = reduced_root_d(ifs, perm, &aut, tol)?.value;
            let ratio = reduced_gap / (s0 - t_q);
            // propagated error of the Perron root and of the bisection
            let slack = 10.0
                * ratio.abs()
                * (tol.spectral_tol / reduced_gap + tol.root_tol / (s0 - t_q))
                + 1e-12 * slope_bracket.1;
            Ok(DerivativeRow {
                q,
                reduced_gap,
                t_q,
                ratio,
                relative_error: (ratio / target - 1.0).abs(),
                in_bracket: ratio >= slope_bracket.0 - slack && ratio <= slope_bracket.1 + slack,
                precision_warning: s0 - t_q < 100.0 * tol.root_tol,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DerivativeReport {
        permutation: perm.clone(),
        s0,
        target,
        target_spread: deriv.spread,
        nonsmooth: deriv.nonsmooth,
        slope_bracket,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn two_perm() -> AffineIFS {
        AffineIFS::diagonal(&[vec![4.0 / 9.0, 1.0 / 9.0], vec![1.0 / 9.0, 4.0 / 9.0]]).unwrap()
    }

    fn homogeneous() -> AffineIFS {
        AffineIFS::diagonal(&vec![vec![1.0 / 3.0, 1.0 / 3.0]; 2]).unwrap()
    }

    fn random_diagonal(rng: &mut ChaCha8Rng, k: usize, d: usize) -> AffineIFS {
        let diags: Vec<Vec<f64>> = (0..k)
            .map(|_| (0..d).map(|_| rng.random_range(0.05..0.49)).collect())
            .collect();
        AffineIFS::diagonal(&diags).unwrap()
    }

    fn random_simplex_point(rng: &mut ChaCha8Rng, k: usize) -> FrequencyVector {
        let e: Vec<f64> = (0..k).map(|_| -rng.random_range(1e-9f64..1.0).ln()).collect();
        let sum: f64 = e.iter().sum();
        let mut v: Vec<f64> = e.iter().map(|x| x / sum).collect();
        let rest: f64 = v[1..].iter().sum();
        v[0] = 1.0 - rest;
        FrequencyVector::new(v).unwrap()
    }

    #[test]
    fn maximizing_frequency_examples() {
        let ifs = two_perm();
        let a = maximizing_frequency(&ifs, &Permutation::new(&[1, 2]).unwrap(), 0.5).unwrap();
        assert!((a.components()[0] - 2.0 / 3.0).abs() < 1e-14);
        assert!((a.components()[1] - 1.0 / 3.0).abs() < 1e-14);
        let h = AffineIFS::diagonal(&vec![vec![0.3, 0.2]; 3]).unwrap();
        let a = maximizing_frequency(&h, &Permutation::identity(2), 1.3).unwrap();
        for c in a.components() {
            assert!((c - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn maximizer_beats_random_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let ifs = random_diagonal(&mut rng, 3, 2);
            let p = Permutation::all(2)[rng.random_range(0..2)].clone();
            let s = rng.random_range(0.0..2.0);
            let alpha = maximizing_frequency(&ifs, &p, s).unwrap();
            let best = g_value(&ifs, &p, s, &alpha).unwrap();
            assert!((best - pressure_d(&ifs, &p, s).unwrap()).abs() < 1e-12);
            for _ in 0..200 {
                let other = random_simplex_point(&mut rng, 3);
                assert!(g_value(&ifs, &p, s, &other).unwrap() < best);
            }
        }
    }

    #[test]
    fn z_constant_examples() {
        let tol = Tolerances::default();
        let ifs = two_perm();
        let z12 = z_constant(&ifs, &Permutation::new(&[1, 2]).unwrap(), &tol).unwrap();
        assert!((z12.value - 0.7855284688155066).abs() < 1e-12);
        assert!((z12.finite_difference - z12.value).abs() < 1e-6);
        assert!(!z12.one_sided);
        let z21 = z_constant(&ifs, &Permutation::new(&[2, 1]).unwrap(), &tol).unwrap();
        assert!((z21.value - z12.value).abs() < 1e-12);
        let z = z_constant(&homogeneous(), &Permutation::identity(2), &tol).unwrap();
        assert!((z.value + 1.0 / (1.0f64 / 3.0).ln()).abs() < 1e-12);
    }

    #[test]
    fn left_derivative_examples() {
        let h = AffineIFS::diagonal(&vec![vec![0.3, 0.3]; 3]).unwrap();
        let d = pressure_left_derivative(&h, &Permutation::identity(2), 0.91).unwrap();
        assert!((d.value - 0.3f64.ln()).abs() < 1e-6);
        assert!(!d.nonsmooth);
        let ifs = two_perm();
        let p = Permutation::new(&[1, 2]).unwrap();
        for s in [0.3, 0.5, 0.8, 1.4] {
            let d = pressure_left_derivative(&ifs, &p, s).unwrap();
            let exact = analytic_left_derivative(&ifs, &p, s).unwrap();
            assert!((d.value - exact).abs() < 1e-6, "{s}: {} vs {exact}", d.value);
        }
        let d = pressure_left_derivative(&ifs, &p, 1.0005).unwrap();
        assert!(d.nonsmooth);
    }

    #[test]
    fn fp_ratio_predicted_limits() {
        let tol = Tolerances::default();
        let half = BernoulliMeasure::uniform(2).unwrap();
        let spec = HoleSpec::periodic(Word::new(&[1], 2).unwrap()).unwrap();
        let t = fp_ratio_scan(&half, &spec, 1..=14, &tol).unwrap();
        assert_eq!(t.predicted_limit, 0.5);
        assert!((t.rows.last().unwrap().ratio - 0.5).abs() < 0.02);
        let spec = HoleSpec::periodic(Word::new(&[1, 2], 2).unwrap()).unwrap();
        let t = fp_ratio_scan(&half, &spec, 1..=14, &tol).unwrap();
        assert_eq!(t.predicted_limit, 0.75);
        assert_eq!(t.period, Some(2));
        assert!(fp_ratio_scan(
            &half,
            &HoleSpec::explicit_prefix(Word::new(&[1, 2], 2).unwrap()).unwrap(),
            1..=3,
            &tol
        )
        .is_err());
    }

    #[test]
    fn deficit_scan_homogeneous() {
        let tol = Tolerances::default();
        let spec = HoleSpec::periodic(Word::new(&[1], 2).unwrap()).unwrap();
        let r = deficit_scan(&homogeneous(), &spec, 2..=12, &tol).unwrap();
        assert_eq!(r.rows.len(), 11);
        assert_eq!(r.maximizing.len(), 1);
        let last = r.rows.last().unwrap();
        assert!((last.ratio - 1.0).abs() < 0.05, "{}", last.ratio);
        for w in r.rows.windows(2) {
            assert!(w[0].q < w[1].q);
        }
    }

    #[test]
    fn derivative_check_homogeneous() {
        let tol = Tolerances::default();
        let spec = HoleSpec::periodic(Word::new(&[1], 2).unwrap()).unwrap();
        let r = derivative_relation_check(&homogeneous(), &Permutation::identity(2), &spec, 1..=12, &tol)
            .unwrap();
        assert!((r.target - 3f64.ln()).abs() < 1e-8);
        assert!(r.rows.iter().all(|row| row.in_bracket && row.ratio.is_finite()));
        assert!(r.rows.last().unwrap().relative_error < 0.02);
    }
}
