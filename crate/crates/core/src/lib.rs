//! Normal-mode analysis of `N` identical particles in a spherically symmetric
//! confining potential, carried out in the large-dimension limit where the
//! particles freeze into a totally symmetric configuration and the low-order
//! quantum corrections reduce to coupled harmonic oscillations about it.
//!
//! The library solves the problem in three layers:
//!
//! * [`model`] / [`equilibrium`] build the dimensionally scaled effective
//!   potential for a chosen system (atom, quantum dot, or a user-supplied
//!   pair potential) and locate the symmetric minimum `(r_inf, gamma_inf)`
//!   together with the zeroth-order energy.
//! * [`quadratic`] compresses the Hessian and kinetic matrices of the
//!   oscillation problem into the nine distinct elements allowed by particle
//!   relabelling symmetry, and [`symgroup`] / [`nspecies`] exploit that
//!   symmetry to produce the five distinct frequencies and the two totally
//!   symmetric normal coordinates in closed form.
//! * [`oracle`] diagonalizes the full Wilson FG problem by brute force; it is
//!   the ground truth every analytic shortcut is validated against, and it
//!   supplies the degenerate mode manifolds the closed forms do not cover.
//!
//! All coordinates and energies are in scaled units (`hbar = m = 1`); the
//! scale factor connecting them to physical units is reported separately.

pub mod equilibrium;
pub mod error;
pub mod exec;
pub mod gramian;
pub mod model;
pub mod nspecies;
pub mod oracle;
pub mod quadratic;
pub mod report;
pub mod rng;
pub mod symgroup;

pub use error::Error;

/// Total number of internal coordinates: `N` radii plus `N(N-1)/2` angle
/// cosines.
pub fn coord_count(n: usize) -> usize {
    n * (n + 1) / 2
}

/// Number of angle-cosine coordinates, `M = N(N-1)/2`.
pub fn pair_count(n: usize) -> usize {
    n * (n - 1) / 2
}

/// Flat index of the pair `(i, j)`, `i < j`, in the column layout
/// `(12), (13), (23), (14), (24), (34), ...`.
pub fn pair_index(i: usize, j: usize) -> usize {
    debug_assert!(i < j);
    j * (j - 1) / 2 + i
}

/// Inverse of [`pair_index`].
pub fn pair_from_index(k: usize) -> (usize, usize) {
    let mut j = 1;
    while (j + 1) * j / 2 <= k {
        j += 1;
    }
    (k - j * (j - 1) / 2, j)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pair_layout_matches_column_order() {
        // (12),(13),(23),(14),(24),(34) in zero-based labels
        let expected = [(0, 1), (0, 2), (1, 2), (0, 3), (1, 3), (2, 3)];
        for (k, &(i, j)) in expected.iter().enumerate() {
            assert_eq!(pair_index(i, j), k);
            assert_eq!(pair_from_index(k), (i, j));
        }
        for n in 2..12 {
            assert_eq!(pair_count(n) + n, coord_count(n));
        }
    }
}
