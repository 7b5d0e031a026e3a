//! TOML system configuration.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use survivordim_core::{AffineIFS, Error, HoleSpec, Matrix, Result, Tolerances, Word};

/// A matrix or translation entry: a number, or an exact fraction `"p/q"`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Number(f64),
    Text(String),
}

impl Entry {
    pub fn value(&self) -> Result<f64> {
        match self {
            Entry::Number(x) => Ok(*x),
            Entry::Text(t) => parse_fraction(t),
        }
    }
}

impl fmt::Display for Entry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Entry::Number(x) => write!(f, "{x}"),
            Entry::Text(t) => f.write_str(t),
        }
    }
}

fn parse_fraction(text: &str) -> Result<f64> {
    let bad = || Error::validation(None, format!("cannot read {text:?} as a number or p/q"));
    let value = match text.split_once('/') {
        Some((p, q)) => {
            let p: f64 = p.trim().parse().map_err(|_| bad())?;
            let q: f64 = q.trim().parse().map_err(|_| bad())?;
            if q == 0.0 {
                return Err(bad());
            }
            p / q
        }
        None => text.trim().parse().map_err(|_| bad())?,
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(bad())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HoleConfig {
    /// Block repeated forever, e.g. `"12"`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub periodic: Option<String>,
    /// Finite prefix of a hole address, e.g. `"1211212"`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prefix: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanConfig {
    #[serde(default = "default_q_min")]
    pub q_min: usize,
    #[serde(default = "default_q_max")]
    pub q_max: usize,
}

fn default_q_min() -> usize {
    1
}

fn default_q_max() -> usize {
    12
}

fn default_true() -> bool {
    true
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig {
            q_min: default_q_min(),
            q_max: default_q_max(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    pub alphabet_size: usize,
    pub dimension: usize,
    /// One block of `dimension` rows per map.
    pub matrices: Vec<Vec<Vec<Entry>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub translations: Option<Vec<Vec<Entry>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hole: Option<HoleConfig>,
    /// Require every operator norm to be below 1/2.
    #[serde(default = "default_true")]
    pub strict_mode: bool,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub scan: ScanConfig,
}

/// A validated configuration.
#[derive(Clone, Debug)]
pub struct LoadedSystem {
    pub ifs: AffineIFS,
    pub hole: Option<HoleSpec>,
    pub tolerances: Tolerances,
    pub scan: ScanConfig,
    pub warnings: Vec<String>,
}

impl SystemConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|err| {
            let line = err
                .span()
                .map(|span| text[..span.start.min(text.len())].matches('\n').count() + 1)
                .unwrap_or(0);
            Error::Parse {
                line,
                message: err.message().to_string(),
            }
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    /// Check shapes, contraction and (in strict mode) the 1/2 norm bound,
    /// and build the system. With `allow_weak` a norm of 1/2 or more is a
    /// warning instead of an error.
    pub fn build(&self, allow_weak: bool) -> Result<LoadedSystem> {
        let k = self.alphabet_size;
        let d = self.dimension;
        if k < 2 {
            return Err(Error::validation(None, "alphabet_size must be at least 2"));
        }
        if d < 1 {
            return Err(Error::validation(None, "dimension must be at least 1"));
        }
        if self.matrices.len() != k {
            return Err(Error::validation(
                None,
                format!("{} matrices for alphabet_size {k}", self.matrices.len()),
            ));
        }
        let mut matrices = Vec::with_capacity(k);
        for (i, block) in self.matrices.iter().enumerate() {
            let index = Some(i + 1);
            if block.len() != d || block.iter().any(|row| row.len() != d) {
                return Err(Error::validation(index, format!("matrix is not {d}x{d}")));
            }
            let rows = block
                .iter()
                .map(|row| row.iter().map(Entry::value).collect::<Result<Vec<_>>>())
                .collect::<Result<Vec<_>>>()
                .map_err(|err| Error::validation(index, err.to_string()))?;
            matrices.push(Matrix::from_rows(&rows)?);
        }
        let translations = self
            .translations
            .as_ref()
            .map(|ts| {
                ts.iter()
                    .map(|t| t.iter().map(Entry::value).collect::<Result<Vec<_>>>())
                    .collect::<Result<Vec<_>>>()
            })
            .transpose()?;
        let ifs = AffineIFS::new(matrices, translations)?;
        let mut warnings = Vec::new();
        if self.strict_mode {
            for (i, norm) in ifs.strict_violations() {
                let message = format!("operator norm {norm} is not below 1/2");
                if allow_weak {
                    warnings.push(format!("matrix {i}: {message}"));
                } else {
                    return Err(Error::validation(
                        Some(i),
                        format!("{message} (strict mode; pass --allow-weak to continue)"),
                    ));
                }
            }
        }
        let hole = match &self.hole {
            None => None,
            Some(h) => Some(match (&h.periodic, &h.prefix) {
                (Some(p), None) => HoleSpec::periodic(Word::parse(p, k)?)?,
                (None, Some(p)) => HoleSpec::explicit_prefix(Word::parse(p, k)?)?,
                _ => {
                    return Err(Error::validation(
                        None,
                        "[hole] needs exactly one of `periodic` or `prefix`",
                    ))
                }
            }),
        };
        if !(self.tolerances.root_tol >= 0.0 && self.tolerances.spectral_tol > 0.0) {
            return Err(Error::validation(None, "tolerances must be positive"));
        }
        if self.scan.q_min == 0 || self.scan.q_min > self.scan.q_max {
            return Err(Error::validation(
                None,
                format!("scan range {}..{} is empty or starts at 0", self.scan.q_min, self.scan.q_max),
            ));
        }
        Ok(LoadedSystem {
            ifs,
            hole,
            tolerances: self.tolerances,
            scan: self.scan,
            warnings,
        })
    }
}
