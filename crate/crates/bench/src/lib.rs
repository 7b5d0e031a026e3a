//! Fixed systems shared by the benchmarks.

use survivordim_core::{AffineIFS, HoleSpec, Word};

/// Two maps, `diag(4/9, 1/9)` and `diag(1/9, 4/9)`.
pub fn two_permutation_system() -> AffineIFS {
    AffineIFS::diagonal(&[vec![4.0 / 9.0, 1.0 / 9.0], vec![1.0 / 9.0, 4.0 / 9.0]])
        .expect("valid system")
}

/// Three maps in dimension three with mixed coordinate orders.
pub fn mixed_system() -> AffineIFS {
    AffineIFS::diagonal(&[
        vec![0.4, 0.2, 0.1],
        vec![0.15, 0.35, 0.25],
        vec![0.3, 0.12, 0.33],
    ])
    .expect("valid system")
}

/// Hole shrinking to the fixed point of `12` repeated, over `k` symbols.
pub fn periodic_hole(k: usize) -> HoleSpec {
    HoleSpec::periodic(Word::new(&[1, 2], k).expect("valid word")).expect("nonempty")
}
