//! Symmetric-group bookkeeping: conjugacy classes, characters, and the
//! decomposition of the radial and angular coordinate spaces into species.
//!
//! A conjugacy class of the permutation group on `N` objects is a cycle
//! structure `(1^v1, 2^v2, ..., N^vN)`. Characters are class functions, and
//! the three species that matter here have closed-form characters in the
//! cycle counts:
//!
//! ```text
//! chi_[N]     = 1
//! chi_[N-1,1] = v1 - 1
//! chi_[N-2,2] = (v1 - 1)(v1 - 2)/2 + v2 - 1
//! ```
//!
//! The radial coordinate vector transforms with character `v1`, the
//! angle-cosine vector with `v1 (v1 - 1)/2 + v2`; class-weighted inner
//! products with the simple characters decompose both into species with unit
//! multiplicity, which is exactly the degeneracy pattern of the five
//! frequency clusters.

use std::collections::BTreeMap;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::{pair_count, pair_index};

/// Cycle structure of a conjugacy class; `nu[j]` counts cycles of length
/// `j + 1`, so `sum (j+1) nu[j] = N`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CycleClass {
    nu: Vec<usize>,
}

impl CycleClass {
    pub fn new(nu: Vec<usize>) -> Result<Self> {
        let n: usize = nu.iter().enumerate().map(|(j, &v)| (j + 1) * v).sum();
        if n == 0 || nu.len() != n {
            return Err(Error::InvalidSpec(format!(
                "cycle counts {nu:?} do not describe a full partition"
            )));
        }
        Ok(Self { nu })
    }

    pub fn n(&self) -> usize {
        self.nu.len()
    }

    /// Number of cycles of length `len`.
    pub fn count(&self, len: usize) -> usize {
        self.nu.get(len - 1).copied().unwrap_or(0)
    }

    pub fn nu(&self) -> &[usize] {
        &self.nu
    }

    /// Number of group elements with this cycle structure:
    /// `N! / (prod_j j^(nu_j) nu_j!)`.
    pub fn size(&self) -> u64 {
        let mut denom: u128 = 1;
        for (idx, &v) in self.nu.iter().enumerate() {
            let j = (idx + 1) as u128;
            denom *= j.pow(v as u32) * factorial(v);
        }
        (factorial(self.n()) / denom) as u64
    }
}

pub fn factorial(n: usize) -> u128 {
    (1..=n as u128).product()
}

/// One entry per integer partition of `N`, ordered deterministically.
pub fn enumerate_classes(n: usize) -> Result<Vec<CycleClass>> {
    if n == 0 || n > 20 {
        return Err(Error::InvalidSpec(format!(
            "class enumeration supports 1 <= N <= 20, got {n}"
        )));
    }
    let mut out = Vec::new();
    let mut parts = Vec::new();
    fn recurse(remaining: usize, max_part: usize, parts: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if remaining == 0 {
            out.push(parts.clone());
            return;
        }
        for part in (1..=remaining.min(max_part)).rev() {
            parts.push(part);
            recurse(remaining - part, part, parts, out);
            parts.pop();
        }
    }
    let mut partitions = Vec::new();
    recurse(n, n, &mut parts, &mut partitions);
    for partition in partitions {
        let mut nu = vec![0usize; n];
        for part in partition {
            nu[part - 1] += 1;
        }
        out.push(CycleClass::new(nu)?);
    }
    Ok(out)
}

/// Characters of the reducible representations carried by the radial and
/// angular coordinate vectors: `(chi_r, chi_gamma)`.
pub fn reducible_characters(class: &CycleClass) -> (i64, i64) {
    let v1 = class.count(1) as i64;
    let v2 = class.count(2) as i64;
    (v1, v1 * (v1 - 1) / 2 + v2)
}

/// The three species, labelled by their partitions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Species {
    PartN,
    PartN11,
    PartN22,
}

impl Species {
    pub const ALL: [Species; 3] = [Species::PartN, Species::PartN11, Species::PartN22];

    /// Irreducible dimension; `None` when the species has no realization
    /// (the two-row species needs at least four particles).
    pub fn dimension(&self, n: usize) -> Option<usize> {
        match self {
            Species::PartN => Some(1),
            Species::PartN11 => (n >= 2).then_some(n - 1),
            Species::PartN22 => (n >= 4).then(|| n * (n - 3) / 2),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Species::PartN => "[N]",
            Species::PartN11 => "[N-1,1]",
            Species::PartN22 => "[N-2,2]",
        }
    }
}

/// Simple characters of the three species on a class; the two-row entry is
/// absent when the species does not exist for this `N`.
pub fn simple_characters(n: usize, class: &CycleClass) -> (i64, i64, Option<i64>) {
    let v1 = class.count(1) as i64;
    let v2 = class.count(2) as i64;
    let two_row = (n >= 4).then(|| (v1 - 1) * (v1 - 2) / 2 + v2 - 1);
    (1, v1 - 1, two_row)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sector {
    Radial,
    Angular,
}

/// Multiplicity of each species in a coordinate sector, by the
/// class-weighted character inner product. The sums are exact integers; a
/// non-integral result would mean a character bug and is an error.
pub fn decompose(n: usize, sector: Sector) -> Result<BTreeMap<Species, usize>> {
    let classes = enumerate_classes(n)?;
    let order = factorial(n);
    let mut out = BTreeMap::new();
    for species in Species::ALL {
        if species.dimension(n).is_none() {
            continue;
        }
        let mut sum: i128 = 0;
        for class in &classes {
            let (chi_r, chi_g) = reducible_characters(class);
            let reducible = match sector {
                Sector::Radial => chi_r,
                Sector::Angular => chi_g,
            };
            let (s0, s1, s2) = simple_characters(n, class);
            let simple = match species {
                Species::PartN => s0,
                Species::PartN11 => s1,
                Species::PartN22 => s2.unwrap(),
            };
            sum += class.size() as i128 * simple as i128 * reducible as i128;
        }
        if sum.rem_euclid(order as i128) != 0 {
            return Err(Error::NonIntegralMultiplicity {
                species: species.label(),
                numerator: sum,
                order,
            });
        }
        let mult = (sum / order as i128) as usize;
        if mult > 0 {
            out.insert(species, mult);
        }
    }
    Ok(out)
}

/// Rows of a reduction matrix for one species and sector.
#[derive(Clone, Debug)]
pub struct WBlock {
    pub species: Species,
    pub sector: Sector,
    pub rows: DMatrix<f64>,
}

impl WBlock {
    /// `rows * rows^T` must be the identity for the block to generate an
    /// orthogonal reduction; returns the largest deviation.
    pub fn orthonormality_defect(&self) -> f64 {
        let prod = &self.rows * self.rows.transpose();
        let ident = DMatrix::identity(prod.nrows(), prod.ncols());
        (prod - ident).iter().fold(0.0_f64, |m, x| m.max(x.abs()))
    }
}

/// The totally symmetric rows: `1/sqrt(N)` on every radius and
/// `sqrt(2/(N(N-1)))` on every angle cosine.
pub fn w_blocks_n_species(n: usize) -> Result<(WBlock, WBlock)> {
    if n < 2 {
        return Err(Error::InvalidSpec(format!("N = {n} < 2")));
    }
    let radial = DMatrix::from_element(1, n, 1.0 / (n as f64).sqrt());
    let angular = DMatrix::from_element(
        1,
        pair_count(n),
        (2.0 / (n as f64 * (n as f64 - 1.0))).sqrt(),
    );
    Ok((
        WBlock {
            species: Species::PartN,
            sector: Sector::Radial,
            rows: radial,
        },
        WBlock {
            species: Species::PartN,
            sector: Sector::Angular,
            rows: angular,
        },
    ))
}

/// Brute-force characters of the permutation action for small `N`: walk all
/// `N!` permutations, count fixed radii and fixed index pairs, and group the
/// counts by cycle structure. Used as the independent check of the closed
/// forms above.
pub fn permutation_action_characters(n: usize) -> Result<Vec<(CycleClass, i64, i64)>> {
    if n == 0 || n > 8 {
        return Err(Error::InvalidSpec(format!(
            "brute-force enumeration limited to N <= 8, got {n}"
        )));
    }
    let mut per_class: BTreeMap<Vec<usize>, (i64, i64, u64)> = BTreeMap::new();
    let mut perm: Vec<usize> = (0..n).collect();
    visit_permutations(&mut perm, 0, &mut |p| {
        let nu = cycle_structure(p);
        let fixed_r = (0..n).filter(|&i| p[i] == i).count() as i64;
        let mut fixed_pairs = 0i64;
        for j in 1..n {
            for i in 0..j {
                let (a, b) = (p[i].min(p[j]), p[i].max(p[j]));
                if pair_index(a, b) == pair_index(i, j) {
                    fixed_pairs += 1;
                }
            }
        }
        let entry = per_class.entry(nu).or_insert((fixed_r, fixed_pairs, 0));
        // all members of a class must agree on the counts
        assert_eq!((entry.0, entry.1), (fixed_r, fixed_pairs));
        entry.2 += 1;
    });
    let mut out = Vec::new();
    for (nu, (chi_r, chi_g, members)) in per_class {
        let class = CycleClass::new(nu)?;
        assert_eq!(class.size(), members, "class size mismatch");
        out.push((class, chi_r, chi_g));
    }
    Ok(out)
}

fn visit_permutations(perm: &mut Vec<usize>, k: usize, visit: &mut impl FnMut(&[usize])) {
    if k == perm.len() {
        visit(perm);
        return;
    }
    for i in k..perm.len() {
        perm.swap(k, i);
        visit_permutations(perm, k + 1, visit);
        perm.swap(k, i);
    }
}

fn cycle_structure(perm: &[usize]) -> Vec<usize> {
    let n = perm.len();
    let mut seen = vec![false; n];
    let mut nu = vec![0usize; n];
    for start in 0..n {
        if seen[start] {
            continue;
        }
        let mut len = 0;
        let mut at = start;
        while !seen[at] {
            seen[at] = true;
            at = perm[at];
            len += 1;
        }
        nu[len - 1] += 1;
    }
    nu
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn class_enumeration_small_n() {
        let classes = enumerate_classes(3).unwrap();
        assert_eq!(classes.len(), 3);
        let sizes: Vec<u64> = classes.iter().map(|c| c.size()).collect();
        let mut sorted = sizes.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, vec![1, 2, 3]);
        assert_eq!(sizes.iter().sum::<u64>(), 6);

        let classes = enumerate_classes(4).unwrap();
        assert_eq!(classes.len(), 5);
        let mut sizes: Vec<u64> = classes.iter().map(|c| c.size()).collect();
        sizes.sort_unstable();
        assert_eq!(sizes, vec![1, 3, 6, 6, 8]);

        let classes = enumerate_classes(1).unwrap();
        assert_eq!(classes.len(), 1);
        assert_eq!(classes[0].size(), 1);
    }

    #[test]
    fn class_sizes_sum_to_group_order() {
        for n in 1..=12 {
            let total: u128 = enumerate_classes(n)
                .unwrap()
                .iter()
                .map(|c| c.size() as u128)
                .sum();
            assert_eq!(total, factorial(n));
        }
    }

    #[test]
    fn reducible_character_examples() {
        // two fixed points and a transposition in S4
        let class = CycleClass::new(vec![2, 1, 0, 0]).unwrap();
        assert_eq!(reducible_characters(&class), (2, 2));

        // identity fixes everything
        let id = CycleClass::new(vec![5, 0, 0, 0, 0]).unwrap();
        assert_eq!(reducible_characters(&id), (5, 10));

        // a five-cycle fixes nothing
        let five = CycleClass::new(vec![0, 0, 0, 0, 1]).unwrap();
        assert_eq!(reducible_characters(&five), (0, 0));
    }

    #[test]
    fn simple_character_examples() {
        let id = CycleClass::new(vec![6, 0, 0, 0, 0, 0]).unwrap();
        let (s0, s1, s2) = simple_characters(6, &id);
        assert_eq!(s0, 1);
        assert_eq!(s1, 5);
        assert_eq!(s2, Some(9)); // N(N-3)/2

        // cross-checked against the orthogonality sums: with any other value
        // in the third slot the [2,2] row fails sum size * chi^2 = 4!
        let double_transposition = CycleClass::new(vec![0, 2, 0, 0]).unwrap();
        assert_eq!(simple_characters(4, &double_transposition), (1, -1, Some(2)));

        let three_cycle = CycleClass::new(vec![0, 0, 1]).unwrap();
        let (s0, s1, s2) = simple_characters(3, &three_cycle);
        assert_eq!((s0, s1), (1, -1));
        assert!(s2.is_none());
    }

    #[test]
    fn decomposition_multiplicities() {
        for n in 2..=10 {
            let radial = decompose(n, Sector::Radial).unwrap();
            assert_eq!(radial.get(&Species::PartN), Some(&1));
            assert_eq!(radial.get(&Species::PartN11), Some(&1));
            assert_eq!(radial.get(&Species::PartN22), None);

            let angular = decompose(n, Sector::Angular).unwrap();
            assert_eq!(angular.get(&Species::PartN), Some(&1));
            if n >= 3 {
                assert_eq!(angular.get(&Species::PartN11), Some(&1));
            }
            if n >= 4 {
                assert_eq!(angular.get(&Species::PartN22), Some(&1));
            }

            // dimension bookkeeping
            let dim = |m: &BTreeMap<Species, usize>| -> usize {
                m.iter()
                    .map(|(s, mult)| s.dimension(n).unwrap() * mult)
                    .sum()
            };
            assert_eq!(dim(&radial), n);
            assert_eq!(dim(&angular), pair_count(n));
        }
    }

    #[test]
    fn character_orthogonality_exact() {
        for n in 4..=12 {
            let classes = enumerate_classes(n).unwrap();
            let order = factorial(n) as i128;
            let chars: Vec<[i64; 3]> = classes
                .iter()
                .map(|c| {
                    let (a, b, c2) = simple_characters(n, c);
                    [a, b, c2.unwrap()]
                })
                .collect();
            for x in 0..3 {
                for y in 0..3 {
                    let sum: i128 = classes
                        .iter()
                        .zip(&chars)
                        .map(|(c, ch)| c.size() as i128 * ch[x] as i128 * ch[y] as i128)
                        .sum();
                    let expected = if x == y { order } else { 0 };
                    assert_eq!(sum, expected, "n = {n}, pair ({x}, {y})");
                }
            }
        }
    }

    #[test]
    fn brute_force_matches_closed_forms() {
        for n in 3..=6 {
            for (class, chi_r, chi_g) in permutation_action_characters(n).unwrap() {
                let (er, eg) = reducible_characters(&class);
                assert_eq!((chi_r, chi_g), (er, eg), "n = {n}, class {:?}", class.nu());
                // the counted characters must also decompose per class into
                // the simple characters
                let (s0, s1, s2) = simple_characters(n, &class);
                assert_eq!(chi_r, s0 + s1);
                assert_eq!(chi_g, s0 + s1 + s2.unwrap_or(0));
            }
        }
    }

    #[test]
    fn n_species_rows() {
        let (radial, angular) = w_blocks_n_species(4).unwrap();
        assert_eq!(radial.rows.ncols(), 4);
        assert!(radial.rows.iter().all(|&x| x == 0.5));
        assert_eq!(angular.rows.ncols(), 6);
        let expected = (2.0 / 12.0_f64).sqrt();
        assert!(angular.rows.iter().all(|&x| x == expected));
        assert!(radial.orthonormality_defect() < 1e-15);
        assert!(angular.orthonormality_defect() < 1e-15);
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(enumerate_classes(0).is_err());
        assert!(enumerate_classes(21).is_err());
        assert!(permutation_action_characters(9).is_err());
    }
}
