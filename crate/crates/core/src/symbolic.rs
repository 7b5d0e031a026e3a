//! Finite words over `{1, ..., k}`, hole addresses and periodicity.
//!
//! Symbols are 1-based on every public surface (parsing, display,
//! [`Word::new`]) and stored 0-based internally so they can index weight
//! vectors directly.

use std::fmt;

use crate::error::{Error, Result};

/// A finite word over the alphabet `{1, ..., k}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Word {
    // 0-based symbol indices
    symbols: Vec<usize>,
    alphabet_size: usize,
}

impl Word {
    /// Builds a word from 1-based symbols.
    pub fn new(symbols: &[usize], alphabet_size: usize) -> Result<Self> {
        if alphabet_size < 2 {
            return Err(Error::range(format!(
                "alphabet size must be at least 2, got {alphabet_size}"
            )));
        }
        let mut out = Vec::with_capacity(symbols.len());
        for (pos, &s) in symbols.iter().enumerate() {
            if s == 0 || s > alphabet_size {
                return Err(Error::range(format!(
                    "symbol {s} at position {} outside 1..={alphabet_size}",
                    pos + 1
                )));
            }
            out.push(s - 1);
        }
        Ok(Word {
            symbols: out,
            alphabet_size,
        })
    }

    /// Builds a word from 0-based symbol indices.
    pub fn from_indices(indices: Vec<usize>, alphabet_size: usize) -> Result<Self> {
        if alphabet_size < 2 {
            return Err(Error::range("alphabet size must be at least 2"));
        }
        if let Some(&bad) = indices.iter().find(|&&i| i >= alphabet_size) {
            return Err(Error::range(format!(
                "symbol index {bad} outside 0..{alphabet_size}"
            )));
        }
        Ok(Word {
            symbols: indices,
            alphabet_size,
        })
    }

    pub fn empty(alphabet_size: usize) -> Self {
        Word {
            symbols: Vec::new(),
            alphabet_size,
        }
    }

    /// Parses `"1121"` (digits, only for `k <= 9`) or `"1,1,2,1"`.
    pub fn parse(text: &str, alphabet_size: usize) -> Result<Self> {
        let text = text.trim();
        let symbols: Vec<usize> = if text.contains(',') {
            text.split(',')
                .map(|t| {
                    t.trim()
                        .parse::<usize>()
                        .map_err(|e| Error::range(format!("bad symbol {t:?}: {e}")))
                })
                .collect::<Result<_>>()?
        } else if alphabet_size <= 9 {
            text.chars()
                .filter(|c| !c.is_whitespace())
                .map(|c| {
                    c.to_digit(10)
                        .map(|d| d as usize)
                        .ok_or_else(|| Error::range(format!("bad symbol {c:?}")))
                })
                .collect::<Result<_>>()?
        } else if text.is_empty() {
            Vec::new()
        } else {
            // a single multi-digit symbol
            vec![text
                .parse::<usize>()
                .map_err(|e| Error::range(format!("bad symbol {text:?}: {e}")))?]
        };
        Word::new(&symbols, alphabet_size)
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet_size
    }

    /// 0-based symbol indices.
    pub fn indices(&self) -> &[usize] {
        &self.symbols
    }

    /// 1-based symbols.
    pub fn symbols(&self) -> Vec<usize> {
        self.symbols.iter().map(|s| s + 1).collect()
    }

    /// The first `n` symbols.
    pub fn truncate(&self, n: usize) -> Result<Word> {
        if n > self.len() {
            return Err(Error::range(format!(
                "cannot take {n} symbols of a word of length {}",
                self.len()
            )));
        }
        Ok(Word {
            symbols: self.symbols[..n].to_vec(),
            alphabet_size: self.alphabet_size,
        })
    }

    pub fn is_prefix_of(&self, other: &Word) -> bool {
        other.symbols.starts_with(&self.symbols)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.alphabet_size <= 9 {
            for s in &self.symbols {
                write!(f, "{}", s + 1)?;
            }
            Ok(())
        } else {
            let parts: Vec<String> = self.symbols.iter().map(|s| (s + 1).to_string()).collect();
            f.write_str(&parts.join(","))
        }
    }
}

/// Smallest `p >= 1` with `w[i] == w[i + p]` for every valid `i`.
///
/// Computed from the prefix (failure) function: `len - pi[len - 1]`.
/// The empty slice has period 0.
pub fn minimal_period<T: PartialEq>(w: &[T]) -> usize {
    if w.is_empty() {
        return 0;
    }
    let failure = failure_function(w);
    w.len() - failure[w.len() - 1]
}

/// `pi[i]` is the length of the longest proper prefix of `w[..=i]` that is
/// also a suffix of it.
pub(crate) fn failure_function<T: PartialEq>(w: &[T]) -> Vec<usize> {
    let mut pi = vec![0; w.len()];
    let mut k = 0;
    for i in 1..w.len() {
        while k > 0 && w[k] != w[i] {
            k = pi[k - 1];
        }
        if w[k] == w[i] {
            k += 1;
        }
        pi[i] = k;
    }
    pi
}

/// Generator of the infinite hole address: either a periodic point or a
/// finite prefix of a point declared aperiodic.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum HoleSpec {
    /// The infinite repetition of a primitive block.
    Periodic(Word),
    /// A finite prefix of a point that is treated as non-periodic.
    ExplicitPrefix(Word),
}

impl HoleSpec {
    /// Periodic hole address; the block is reduced to its primitive root,
    /// so `1212` and `12` describe the same point.
    pub fn periodic(block: Word) -> Result<Self> {
        if block.is_empty() {
            return Err(Error::domain("periodic hole block must be nonempty"));
        }
        let p = minimal_period(block.indices());
        let root = if block.len().is_multiple_of(p) {
            block.truncate(p)?
        } else {
            block
        };
        Ok(HoleSpec::Periodic(root))
    }

    pub fn explicit_prefix(prefix: Word) -> Result<Self> {
        if prefix.is_empty() {
            return Err(Error::domain("explicit hole prefix must be nonempty"));
        }
        Ok(HoleSpec::ExplicitPrefix(prefix))
    }

    pub fn alphabet_size(&self) -> usize {
        match self {
            HoleSpec::Periodic(w) | HoleSpec::ExplicitPrefix(w) => w.alphabet_size(),
        }
    }

    /// `q|_q`: the first `q` symbols of the hole address.
    pub fn prefix(&self, q: usize) -> Result<Word> {
        if q == 0 {
            return Err(Error::range("hole depth q must be positive"));
        }
        match self {
            HoleSpec::Periodic(block) => {
                let indices = block.indices().iter().copied().cycle().take(q).collect();
                Word::from_indices(indices, block.alphabet_size())
            }
            HoleSpec::ExplicitPrefix(prefix) => prefix.truncate(q),
        }
    }

    /// Largest `q` for which [`HoleSpec::prefix`] succeeds.
    pub fn max_depth(&self) -> Option<usize> {
        match self {
            HoleSpec::Periodic(_) => None,
            HoleSpec::ExplicitPrefix(w) => Some(w.len()),
        }
    }

    /// Period of the hole point, `None` for explicit prefixes (declared
    /// aperiodic even if the finite prefix happens to repeat).
    pub fn period(&self) -> Option<usize> {
        match self {
            HoleSpec::Periodic(block) => Some(block.len()),
            HoleSpec::ExplicitPrefix(_) => None,
        }
    }

    pub fn is_periodic_point(&self) -> bool {
        self.period().is_some()
    }

    /// Textual form used by the configuration layer.
    pub fn describe(&self) -> String {
        match self {
            HoleSpec::Periodic(b) => format!("periodic({b})"),
            HoleSpec::ExplicitPrefix(p) => format!("prefix({p})"),
        }
    }
}
