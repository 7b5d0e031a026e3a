//! The forbidden-word automaton for a single pattern and its weighted
//! transfer operator.
//!
//! State `u` in `0..q` records the length of the longest suffix of the input
//! read so far that is a proper prefix of the pattern. Completing the
//! pattern rejects. A word therefore survives iff none of its factors equals
//! the pattern, which is exactly membership in `Sigma_{n,q}`.
//!
//! Weighted sums over surviving words are `e_0^T M^n 1` with
//! `M[u][v] = sum of w_a over symbols a with delta(u, a) = v`.

use crate::error::{Error, Result};
use crate::linalg::{perron_root, Matrix, NonnegativeOperator, PerronEstimate, PerronOptions};
use crate::symbolic::{failure_function, Word};

const REJECT: u32 = u32::MAX;

/// KMP prefix machine recognising words that avoid one pattern.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AvoidanceAutomaton {
    pattern: Word,
    alphabet_size: usize,
    // row-major q x k, REJECT marks completion of the pattern
    table: Vec<u32>,
}

impl AvoidanceAutomaton {
    pub fn new(pattern: &Word) -> Result<Self> {
        if pattern.is_empty() {
            return Err(Error::domain("forbidden pattern must be nonempty"));
        }
        let q = pattern.len();
        if q >= REJECT as usize {
            return Err(Error::range("pattern too long"));
        }
        let k = pattern.alphabet_size();
        let p = pattern.indices();
        let failure = failure_function(p);
        let mut table = vec![0u32; q * k];
        for u in 0..q {
            for a in 0..k {
                let next = if p[u] == a {
                    u + 1
                } else if u == 0 {
                    0
                } else {
                    // already filled: the fallback state is shorter than u
                    table[failure[u - 1] * k + a] as usize
                };
                table[u * k + a] = if next == q { REJECT } else { next as u32 };
            }
        }
        Ok(AvoidanceAutomaton {
            pattern: pattern.clone(),
            alphabet_size: k,
            table,
        })
    }

    pub fn pattern(&self) -> &Word {
        &self.pattern
    }

    /// Number of states, equal to the pattern length `q`.
    pub fn states(&self) -> usize {
        self.pattern.len()
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet_size
    }

    /// Transition on a 1-based symbol; `None` means the pattern was completed.
    pub fn transition(&self, state: usize, symbol: usize) -> Option<usize> {
        assert!(
            (1..=self.alphabet_size).contains(&symbol),
            "symbol {symbol} outside 1..={}",
            self.alphabet_size
        );
        self.step(state, symbol - 1)
    }

    /// Transition on a 0-based symbol index.
    #[inline]
    pub fn step(&self, state: usize, index: usize) -> Option<usize> {
        let t = self.table[state * self.alphabet_size + index];
        (t != REJECT).then_some(t as usize)
    }

    /// Runs the automaton from state 0; true iff the word avoids the pattern.
    pub fn accepts(&self, word: &Word) -> bool {
        word.indices()
            .iter()
            .try_fold(0usize, |u, &a| self.step(u, a))
            .is_some()
    }

    /// The weighted transfer operator with per-symbol weights `w`.
    pub fn transfer<'a>(&'a self, weights: &'a [f64]) -> Result<TransferOperator<'a>> {
        if weights.len() != self.alphabet_size {
            return Err(Error::range(format!(
                "{} weights for an alphabet of size {}",
                weights.len(),
                self.alphabet_size
            )));
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            return Err(Error::domain(format!("weights must be positive, got {w}")));
        }
        Ok(TransferOperator {
            automaton: self,
            weights,
        })
    }
}

/// Matrix-free weighted transfer operator of an [`AvoidanceAutomaton`].
#[derive(Clone, Copy, Debug)]
pub struct TransferOperator<'a> {
    automaton: &'a AvoidanceAutomaton,
    weights: &'a [f64],
}

impl TransferOperator<'_> {
    /// Dense `q x q` matrix; only sensible for small `q`.
    pub fn to_dense(&self) -> Matrix {
        let q = self.automaton.states();
        let mut m = Matrix::zeros(q);
        for u in 0..q {
            for (a, &w) in self.weights.iter().enumerate() {
                if let Some(v) = self.automaton.step(u, a) {
                    m.set(u, v, m.get(u, v) + w);
                }
            }
        }
        m
    }

    pub fn weights(&self) -> &[f64] {
        self.weights
    }
}

impl NonnegativeOperator for TransferOperator<'_> {
    fn dim(&self) -> usize {
        self.automaton.states()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let k = self.automaton.alphabet_size;
        for (u, yu) in y.iter_mut().enumerate().take(self.automaton.states()) {
            let row = &self.automaton.table[u * k..(u + 1) * k];
            let mut acc = 0.0;
            for (&t, &w) in row.iter().zip(self.weights) {
                if t != REJECT {
                    acc += w * x[t as usize];
                }
            }
            *yu = acc;
        }
    }

    fn for_each_successor(&self, u: usize, f: &mut dyn FnMut(usize)) {
        let k = self.automaton.alphabet_size;
        for &t in &self.automaton.table[u * k..(u + 1) * k] {
            if t != REJECT {
                f(t as usize);
            }
        }
    }
}

/// `ln sum_{i in Sigma_{n,q}} prod_j w_{i_j}`.
///
/// The state vector is rescaled by powers of two only, so for integer
/// weights the result is the exact count whenever it fits in `f64`.
pub fn log_weighted_survivor_sum(
    automaton: &AvoidanceAutomaton,
    weights: &[f64],
    n: usize,
) -> Result<f64> {
    let (mantissa, exponent) = scaled_survivor_sum(automaton, weights, n)?;
    Ok(mantissa.ln() + exponent as f64 * std::f64::consts::LN_2)
}

/// `sum_{i in Sigma_{n,q}} prod_j w_{i_j}`; `1` for `n = 0`. May overflow or
/// underflow for large `n`, see [`log_weighted_survivor_sum`].
pub fn weighted_survivor_sum(
    automaton: &AvoidanceAutomaton,
    weights: &[f64],
    n: usize,
) -> Result<f64> {
    let (mantissa, exponent) = scaled_survivor_sum(automaton, weights, n)?;
    Ok(mantissa * 2f64.powi(exponent))
}

fn scaled_survivor_sum(
    automaton: &AvoidanceAutomaton,
    weights: &[f64],
    n: usize,
) -> Result<(f64, i32)> {
    let op = automaton.transfer(weights)?;
    let q = automaton.states();
    // y_n = M^n 1 evaluated at state 0
    let mut x = vec![1.0; q];
    let mut y = vec![0.0; q];
    let mut exponent: i32 = 0;
    const HI: f64 = 1.3407807929942597e154; // 2^512
    const LO: f64 = 7.458340731200207e-155; // 2^-512
    for _ in 0..n {
        op.apply(&x, &mut y);
        std::mem::swap(&mut x, &mut y);
        let max = x.iter().copied().fold(0.0, f64::max);
        if max > HI {
            x.iter_mut().for_each(|v| *v *= LO);
            exponent += 512;
        } else if max > 0.0 && max < LO {
            x.iter_mut().for_each(|v| *v *= HI);
            exponent -= 512;
        }
    }
    Ok((x[0], exponent))
}

/// Perron root of the weighted transfer operator.
pub fn transfer_perron_root(
    automaton: &AvoidanceAutomaton,
    weights: &[f64],
    opts: &PerronOptions,
) -> Result<PerronEstimate> {
    perron_root(&automaton.transfer(weights)?, opts)
}

/// `lim (1/n) ln sum_{Sigma_{n,q}} prod w` = `ln rho(M)`.
pub fn reduced_growth_rate(
    automaton: &AvoidanceAutomaton,
    weights: &[f64],
    opts: &PerronOptions,
) -> Result<f64> {
    let est = transfer_perron_root(automaton, weights, opts)?;
    Ok(est.value.ln())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::dense_spectral_radius;
    use crate::symbolic::HoleSpec;
    use proptest::prelude::*;

    fn aut(p: &[usize], k: usize) -> AvoidanceAutomaton {
        AvoidanceAutomaton::new(&Word::new(p, k).unwrap()).unwrap()
    }

    fn contains(hay: &[usize], needle: &[usize]) -> bool {
        hay.windows(needle.len()).any(|w| w == needle)
    }

    fn all_words(k: usize, n: usize) -> impl Iterator<Item = Vec<usize>> {
        (0..k.pow(n as u32)).map(move |mut c| {
            (0..n)
                .map(|_| {
                    let s = c % k;
                    c /= k;
                    s
                })
                .collect()
        })
    }

    #[test]
    fn transitions_for_small_patterns() {
        let a = aut(&[1, 1], 2);
        assert_eq!(a.states(), 2);
        assert_eq!(a.transition(1, 1), None);
        assert_eq!(a.transition(1, 2), Some(0));
        assert_eq!(a.transition(0, 1), Some(1));
        assert_eq!(a.transition(0, 2), Some(0));

        let a = aut(&[1, 2], 2);
        assert_eq!(a.transition(1, 2), None);
        assert_eq!(a.transition(1, 1), Some(1));

        let a = aut(&[1, 2, 1], 2);
        assert_eq!(a.transition(2, 1), None);
        assert_eq!(a.transition(2, 2), Some(0));
    }

    #[test]
    fn empty_pattern_rejected() {
        assert!(matches!(
            AvoidanceAutomaton::new(&Word::empty(2)),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn automaton_agrees_with_substring_scan() {
        for k in 2..=3 {
            for q in 1..=3 {
                for pat in all_words(k, q) {
                    let a = AvoidanceAutomaton::new(&Word::from_indices(pat.clone(), k).unwrap())
                        .unwrap();
                    for n in 0..=8 {
                        for w in all_words(k, n) {
                            let word = Word::from_indices(w.clone(), k).unwrap();
                            assert_eq!(a.accepts(&word), !contains(&w, &pat), "{pat:?} in {w:?}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn fibonacci_counts() {
        let a = aut(&[1, 1], 2);
        let counts: Vec<f64> = (1..=4)
            .map(|n| weighted_survivor_sum(&a, &[1.0, 1.0], n).unwrap())
            .collect();
        assert_eq!(counts, vec![2.0, 3.0, 5.0, 8.0]);
        assert_eq!(weighted_survivor_sum(&a, &[1.0, 1.0], 0).unwrap(), 1.0);
        assert_eq!(weighted_survivor_sum(&aut(&[2, 1, 2], 2), &[0.3, 0.7], 0).unwrap(), 1.0);
    }

    #[test]
    fn single_symbol_hole_leaves_one_branch() {
        let a = aut(&[1], 2);
        let p: f64 = 0.3;
        for n in 0..20 {
            let s = weighted_survivor_sum(&a, &[p, 1.0 - p], n).unwrap();
            assert!((s - (1.0 - p).powi(n as i32)).abs() < 1e-15);
        }
        let r = reduced_growth_rate(&a, &[p, 1.0 - p], &PerronOptions::default()).unwrap();
        assert!((r - (1.0 - p).ln()).abs() < 1e-14);
    }

    #[test]
    fn growth_rate_examples() {
        let opts = PerronOptions::default();
        let golden = (1.0 + 5f64.sqrt()) / 2.0;
        let r = reduced_growth_rate(&aut(&[1, 1], 2), &[1.0, 1.0], &opts).unwrap();
        assert!((r - golden.ln()).abs() < 1e-13);
        // words avoiding "12" are 2^a 1^b: mass (n+1)/2^n, growth rate ln(1/2)
        let a = aut(&[1, 2], 2);
        for n in 0..10 {
            let s = weighted_survivor_sum(&a, &[0.5, 0.5], n).unwrap();
            assert!((s - (n as f64 + 1.0) / 2f64.powi(n as i32)).abs() < 1e-15);
        }
        let r = reduced_growth_rate(&a, &[0.5, 0.5], &opts).unwrap();
        assert!((r - 0.5f64.ln()).abs() < 1e-13);
    }

    #[test]
    fn long_sums_do_not_overflow() {
        let a = aut(&[1, 1, 1], 3);
        let l = log_weighted_survivor_sum(&a, &[1.0, 1.0, 1.0], 2000).unwrap();
        let r = reduced_growth_rate(&a, &[1.0, 1.0, 1.0], &PerronOptions::default()).unwrap();
        assert!(l.is_finite());
        assert!((l / 2000.0 - r).abs() < 1e-2);
        let l = log_weighted_survivor_sum(&a, &[1e-3, 1e-3, 1e-3], 2000).unwrap();
        assert!(l.is_finite() && l < -1e4);
    }

    #[test]
    fn dense_matrix_row_sums_bounded() {
        let a = aut(&[1, 2, 1, 1], 3);
        let w = [0.2, 0.5, 0.3];
        let m = a.transfer(&w).unwrap().to_dense();
        for row in m.rows() {
            assert!(row.iter().sum::<f64>() <= 1.0 + 1e-15);
        }
        let rho = dense_spectral_radius(&m);
        let r = reduced_growth_rate(&a, &w, &PerronOptions::default()).unwrap();
        assert!((r - rho.ln()).abs() < 1e-12);
    }

    #[test]
    fn growth_rate_strictly_below_full_and_increasing_in_q() {
        let spec = HoleSpec::periodic(Word::new(&[1, 2, 2], 3).unwrap()).unwrap();
        let w = [0.4, 0.25, 0.35];
        let full = w.iter().sum::<f64>().ln();
        let opts = PerronOptions::default();
        let mut prev = f64::NEG_INFINITY;
        for q in 1..=24 {
            let a = AvoidanceAutomaton::new(&spec.prefix(q).unwrap()).unwrap();
            let r = reduced_growth_rate(&a, &w, &opts).unwrap();
            assert!(r < full);
            assert!(r >= prev - 1e-12, "q={q}: {r} < {prev}");
            prev = r;
        }
        assert!(full - prev < 1e-6);
    }

    proptest! {
        #[test]
        fn weighted_sum_matches_enumeration(
            k in 2usize..=3,
            pat in prop::collection::vec(0usize..3, 1..=4),
            n in 0usize..=9,
            wnum in prop::collection::vec(1u32..=9, 3),
        ) {
            let pat: Vec<usize> = pat.into_iter().map(|s| s % k).collect();
            let w: Vec<f64> = wnum[..k].iter().map(|&x| x as f64 / 7.0).collect();
            let a = AvoidanceAutomaton::new(&Word::from_indices(pat.clone(), k).unwrap()).unwrap();
            let brute: f64 = all_words(k, n)
                .filter(|word| !contains(word, &pat))
                .map(|word| word.iter().map(|&s| w[s]).product::<f64>())
                .sum();
            let fast = weighted_survivor_sum(&a, &w, n).unwrap();
            prop_assert!((fast - brute).abs() <= 1e-12 * brute.max(1e-300));
        }
    }
}
