//! Brute-force diagonalization of the full normal-mode problem.
//!
//! The product FG is not symmetric, but with G positive definite it is
//! similar to the symmetric matrix `L^T F L` (Cholesky `G = L L^T`), so the
//! whole spectrum is real and an ordinary symmetric eigensolver suffices.
//! Mapping an orthonormal eigenvector `u` back through `b = L^(-T) u` lands
//! exactly on the coefficient vectors of the normal coordinates, already
//! normalized to `b^T G b = 1` and mutually G-orthogonal.
//!
//! The eigenvalues cluster into at most five distinct roots; the cluster
//! multiplicities are the species dimensions `(1, 1, N-1, N-1, N(N-3)/2)`,
//! which is both asserted and reported. Everything downstream (wave function
//! evaluation, first-order energies) consumes the clustered form.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};

use crate::equilibrium::SymmetricPoint;
use crate::error::{Error, Result};
use crate::quadratic::InvariantQuadratic;
use crate::coord_count;

/// One degenerate root with a G-orthonormal basis of coefficient vectors.
#[derive(Clone, Debug)]
pub struct Cluster {
    pub lambda: f64,
    pub multiplicity: usize,
    pub basis: Vec<DVector<f64>>,
}

impl Cluster {
    pub fn omega(&self) -> f64 {
        self.lambda.max(0.0).sqrt()
    }
}

#[derive(Clone, Debug)]
pub struct SpectrumClusters {
    pub n: usize,
    pub clusters: Vec<Cluster>,
    pub cluster_tol: f64,
    /// Set when distinct species coincide in frequency and their clusters
    /// merged; the multiplicity pattern is then a coarsening of the species
    /// dimensions rather than an exact match.
    pub accidental_degeneracy: bool,
    /// Largest residual of `F G b = lambda b` over all modes.
    pub max_residual: f64,
}

/// Per-cluster occupation numbers: cluster index to the quanta of its first
/// modes (unlisted modes hold zero quanta).
pub type Quanta = BTreeMap<usize, Vec<u32>>;

const CLUSTER_REL_TOL: f64 = 1e-7;

fn expected_multiplicities(n: usize) -> Vec<usize> {
    // species dimensions: two singlets, two (N-1)-fold roots, one
    // N(N-3)/2-fold root; degenerate patterns drop the absent entries
    let mut out = vec![1, 1];
    if n >= 3 {
        out.push(n - 1);
        out.push(n - 1);
    } else {
        out.push(1);
    }
    if n >= 4 {
        out.push(n * (n - 3) / 2);
    }
    out.sort_unstable();
    out
}

/// Can `observed` be produced by merging groups of the expected
/// multiplicities? Used to recognize accidental frequency coincidences.
fn is_merge_of(observed: &[usize], expected: &[usize]) -> bool {
    fn assign(remaining: &mut Vec<usize>, expected: &[usize], used: &mut Vec<bool>) -> bool {
        let Some(target) = remaining.pop() else {
            return used.iter().all(|&u| u);
        };
        fn subsets(
            target: usize,
            start: usize,
            expected: &[usize],
            used: &mut Vec<bool>,
            picked: &mut Vec<usize>,
            remaining: &mut Vec<usize>,
        ) -> bool {
            if target == 0 {
                if assign(remaining, expected, used) {
                    return true;
                }
                return false;
            }
            for i in start..expected.len() {
                if !used[i] && expected[i] <= target {
                    used[i] = true;
                    picked.push(i);
                    if subsets(target - expected[i], i + 1, expected, used, picked, remaining) {
                        return true;
                    }
                    picked.pop();
                    used[i] = false;
                }
            }
            false
        }
        let mut picked = Vec::new();
        if subsets(target, 0, expected, used, &mut picked, remaining) {
            return true;
        }
        remaining.push(target);
        false
    }
    let mut remaining = observed.to_vec();
    let mut used = vec![false; expected.len()];
    assign(&mut remaining, expected, &mut used)
}

/// Also used by the report layer to tag clusters by multiplicity.
pub fn species_dimensions(n: usize) -> Vec<usize> {
    expected_multiplicities(n)
}

/// Full eigendecomposition of the product of the expanded matrices, with the
/// eigenvalues clustered into degenerate roots.
pub fn diagonalize(
    hessian: &InvariantQuadratic,
    kinetic: &InvariantQuadratic,
) -> Result<SpectrumClusters> {
    diagonalize_with_tol(hessian, kinetic, CLUSTER_REL_TOL)
}

pub fn diagonalize_with_tol(
    hessian: &InvariantQuadratic,
    kinetic: &InvariantQuadratic,
    cluster_tol: f64,
) -> Result<SpectrumClusters> {
    if hessian.n() != kinetic.n() {
        return Err(Error::DimensionMismatch(format!(
            "F has N = {}, G has N = {}",
            hessian.n(),
            kinetic.n()
        )));
    }
    let n = hessian.n();
    let p = coord_count(n);
    let f = hessian.expand();
    let g = kinetic.expand();

    let chol = nalgebra::Cholesky::new(g.clone())
        .ok_or_else(|| Error::NotPositiveDefinite("kinetic matrix".into()))?;
    let l = chol.l();
    let mut s = l.transpose() * &f * &l;
    // symmetrize away the roundoff before the eigensolve
    s = (&s + s.transpose()) * 0.5;
    let eig = nalgebra::SymmetricEigen::new(s);

    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));

    let lt = l.transpose();
    let mut modes: Vec<(f64, DVector<f64>)> = Vec::with_capacity(p);
    for &idx in &order {
        let u = eig.eigenvectors.column(idx).into_owned();
        let mut b = lt
            .solve_upper_triangular(&u)
            .ok_or_else(|| Error::NotPositiveDefinite("Cholesky factor".into()))?;
        // deterministic sign: largest-magnitude entry positive
        let mut pivot = 0;
        for (k, x) in b.iter().enumerate() {
            if x.abs() > b[pivot].abs() {
                pivot = k;
            }
        }
        if b[pivot] < 0.0 {
            b.neg_mut();
        }
        modes.push((eig.eigenvalues[idx], b));
    }

    // split into clusters at relative gaps
    let lo = modes.first().map(|m| m.0).unwrap_or(0.0);
    let hi = modes.last().map(|m| m.0).unwrap_or(0.0);
    let scale = (hi - lo).abs().max(hi.abs()).max(lo.abs()).max(1e-300);
    let mut clusters: Vec<Cluster> = Vec::new();
    let mut current: Vec<(f64, DVector<f64>)> = Vec::new();
    for mode in modes {
        if let Some(last) = current.last() {
            if (mode.0 - last.0).abs() > cluster_tol * scale {
                clusters.push(close_cluster(std::mem::take(&mut current)));
            }
        }
        current.push(mode);
    }
    if !current.is_empty() {
        clusters.push(close_cluster(current));
    }

    // validate the multiplicity pattern against the species dimensions
    let expected = expected_multiplicities(n);
    let mut observed: Vec<usize> = clusters.iter().map(|c| c.multiplicity).collect();
    observed.sort_unstable();
    let accidental_degeneracy = if observed == expected {
        false
    } else if observed.len() < expected.len() && is_merge_of(&observed, &expected) {
        true
    } else {
        return Err(Error::ClusterPattern {
            expected,
            found: observed,
        });
    };

    // residual check of the eigenpairs on the raw product
    let fg = &f * &g;
    let mut max_residual = 0.0_f64;
    for cluster in &clusters {
        for b in &cluster.basis {
            let res = (&fg * b - b * cluster.lambda).amax();
            max_residual = max_residual.max(res);
        }
    }

    Ok(SpectrumClusters {
        n,
        clusters,
        cluster_tol,
        accidental_degeneracy,
        max_residual,
    })
}

fn close_cluster(modes: Vec<(f64, DVector<f64>)>) -> Cluster {
    let multiplicity = modes.len();
    let lambda = modes.iter().map(|m| m.0).sum::<f64>() / multiplicity as f64;
    Cluster {
        lambda,
        multiplicity,
        basis: modes.into_iter().map(|m| m.1).collect(),
    }
}

/// Outcome of checking the two equivalent routes to the eigenproblem: the
/// direct product route against the route through the inverse-metric
/// symmetrization (spectral square root of G).
#[derive(Clone, Copy, Debug)]
pub struct EquivalenceReport {
    pub max_lambda_dev: f64,
    pub max_projector_dev: f64,
    pub max_norm_dev: f64,
}

/// Solve the eigenproblem a second way and compare: eigenvalues as
/// multisets, eigenspaces as projectors (basis-independent), and both
/// normalization conventions.
pub fn eigen_equivalence(
    hessian: &InvariantQuadratic,
    kinetic: &InvariantQuadratic,
) -> Result<EquivalenceReport> {
    let primary = diagonalize(hessian, kinetic)?;
    let f = hessian.expand();
    let g = kinetic.expand();
    let p = f.nrows();

    // spectral square root of G
    let eig_g = nalgebra::SymmetricEigen::new(g.clone());
    if eig_g.eigenvalues.iter().any(|&v| v <= 0.0) {
        return Err(Error::NotPositiveDefinite("kinetic matrix".into()));
    }
    let v = &eig_g.eigenvectors;
    let sqrt_d = DMatrix::from_diagonal(&eig_g.eigenvalues.map(|x| x.sqrt()));
    let isqrt_d = DMatrix::from_diagonal(&eig_g.eigenvalues.map(|x| 1.0 / x.sqrt()));
    let g_half = v * sqrt_d * v.transpose();
    let g_ihalf = v * isqrt_d * v.transpose();

    let mut m = &g_half * &f * &g_half;
    m = (&m + m.transpose()) * 0.5;
    let eig_m = nalgebra::SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&i, &j| eig_m.eigenvalues[i].total_cmp(&eig_m.eigenvalues[j]));

    // coefficient vectors through the metric route: b = G^(-1) B with
    // B = G^(1/2) u, i.e. b = G^(-1/2) u
    let alt: Vec<(f64, DVector<f64>)> = order
        .iter()
        .map(|&idx| {
            let u = eig_m.eigenvectors.column(idx).into_owned();
            (eig_m.eigenvalues[idx], &g_ihalf * u)
        })
        .collect();

    let mut max_lambda_dev = 0.0_f64;
    let mut max_projector_dev = 0.0_f64;
    let mut max_norm_dev = 0.0_f64;
    let scale = alt
        .iter()
        .map(|m| m.0.abs())
        .fold(0.0_f64, f64::max)
        .max(1.0);

    let mut offset = 0;
    for cluster in &primary.clusters {
        // projector onto the eigenspace, unique regardless of basis choice
        let mut proj_primary = DMatrix::zeros(p, p);
        for b in &cluster.basis {
            proj_primary += b * b.transpose();
        }
        let mut proj_alt = DMatrix::zeros(p, p);
        for (lambda, b) in &alt[offset..offset + cluster.multiplicity] {
            max_lambda_dev = max_lambda_dev.max((lambda - cluster.lambda).abs() / scale);
            max_norm_dev = max_norm_dev.max(((b.transpose() * &g * b)[(0, 0)] - 1.0).abs());
            proj_alt += b * b.transpose();
        }
        max_projector_dev = max_projector_dev.max((proj_primary - proj_alt).amax());
        offset += cluster.multiplicity;
    }
    for cluster in &primary.clusters {
        for b in &cluster.basis {
            max_norm_dev = max_norm_dev.max(((b.transpose() * &g * b)[(0, 0)] - 1.0).abs());
        }
    }

    Ok(EquivalenceReport {
        max_lambda_dev,
        max_projector_dev,
        max_norm_dev,
    })
}

/// Sign-carrying logarithm of a product wave function value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogValue {
    pub ln_abs: f64,
    pub sign: i8,
}

impl LogValue {
    pub fn value(&self) -> f64 {
        if self.sign == 0 {
            0.0
        } else {
            self.sign as f64 * self.ln_abs.exp()
        }
    }
}

fn ln_factorial(n: u32) -> f64 {
    (1..=n).map(|k| (k as f64).ln()).sum()
}

/// Physicists' Hermite polynomial by recurrence.
fn hermite(n: u32, x: f64) -> f64 {
    let mut h0 = 1.0;
    if n == 0 {
        return h0;
    }
    let mut h1 = 2.0 * x;
    for k in 1..n {
        let h2 = 2.0 * x * h1 - 2.0 * k as f64 * h0;
        h0 = h1;
        h1 = h2;
    }
    h1
}

/// Product of one-dimensional oscillator wave functions over every mode,
/// evaluated at a displacement and returned in log-magnitude form.
///
/// Each factor is `(omega/pi)^(1/4) (2^n n!)^(-1/2) H_n(x) exp(-x^2/2)` at
/// `x = sqrt(omega) q` with `q = b . y'`; the log form keeps the product
/// finite for hundreds of modes.
pub fn wavefunction_log(
    clusters: &SpectrumClusters,
    quanta: &Quanta,
    y_prime: &[f64],
) -> Result<LogValue> {
    let p = coord_count(clusters.n);
    if y_prime.len() != p {
        return Err(Error::DimensionMismatch(format!(
            "displacement has {} entries, expected {p}",
            y_prime.len()
        )));
    }
    validate_quanta(clusters, quanta)?;
    let y = DVector::from_column_slice(y_prime);
    let mut ln_abs = 0.0;
    let mut sign = 1i8;
    for (ci, cluster) in clusters.clusters.iter().enumerate() {
        if cluster.lambda <= 0.0 {
            return Err(Error::UnstableMode {
                lambda: cluster.lambda,
            });
        }
        let omega = cluster.lambda.sqrt();
        let occ = quanta.get(&ci);
        for (mi, b) in cluster.basis.iter().enumerate() {
            let n_quanta = occ.and_then(|v| v.get(mi)).copied().unwrap_or(0);
            let q = b.dot(&y);
            let x = omega.sqrt() * q;
            let h = hermite(n_quanta, x);
            if h == 0.0 {
                return Ok(LogValue {
                    ln_abs: f64::NEG_INFINITY,
                    sign: 0,
                });
            }
            sign *= if h < 0.0 { -1 } else { 1 };
            ln_abs += 0.25 * (omega / std::f64::consts::PI).ln()
                - 0.5 * (n_quanta as f64 * std::f64::consts::LN_2 + ln_factorial(n_quanta))
                + h.abs().ln()
                - 0.5 * x * x;
        }
    }
    Ok(LogValue { ln_abs, sign })
}

fn validate_quanta(clusters: &SpectrumClusters, quanta: &Quanta) -> Result<()> {
    for (&ci, occ) in quanta {
        let cluster = clusters
            .clusters
            .get(ci)
            .ok_or(Error::NoSuchCluster(ci))?;
        if occ.len() > cluster.multiplicity {
            return Err(Error::DimensionMismatch(format!(
                "{} occupation numbers for a multiplicity-{} cluster",
                occ.len(),
                cluster.multiplicity
            )));
        }
    }
    Ok(())
}

/// Energy through first order in the inverse dimension:
/// `E_inf + (1/D) [ sum over modes (n + 1/2) omega + v0 ]`.
pub fn energy_first_order(
    point: &SymmetricPoint,
    clusters: &SpectrumClusters,
    quanta: &Quanta,
    d: usize,
) -> Result<f64> {
    validate_quanta(clusters, quanta)?;
    let mut harmonic = 0.0;
    for (ci, cluster) in clusters.clusters.iter().enumerate() {
        if cluster.lambda < -1e-10 {
            return Err(Error::UnstableMode {
                lambda: cluster.lambda,
            });
        }
        let omega = cluster.omega();
        let listed: f64 = quanta
            .get(&ci)
            .map(|occ| occ.iter().map(|&nq| nq as f64 + 0.5).sum())
            .unwrap_or(0.0);
        let listed_count = quanta.get(&ci).map(|occ| occ.len()).unwrap_or(0);
        let unlisted = (cluster.multiplicity - listed_count) as f64 * 0.5;
        harmonic += (listed + unlisted) * omega;
    }
    Ok(point.e_inf + (harmonic + point.v0) / d as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibrium::{find_symmetric_minimum, SolverOptions};
    use crate::exec::Parallelism;
    use crate::model::{build_system, SystemKind, SystemSpec};
    use crate::quadratic::{hessian_invariants, kinetic_invariants, Elements, QuadKind};
    use crate::rng::SplitMix64;

    fn solved_clusters(system: SystemKind, n: usize) -> (SymmetricPoint, SpectrumClusters) {
        let family = build_system(&SystemSpec::new(system, n, 100)).unwrap();
        let point = find_symmetric_minimum(&family, &SolverOptions::default()).unwrap();
        let f = hessian_invariants(&family, &point, Parallelism::default()).unwrap();
        let g = kinetic_invariants(&point, n).unwrap();
        (point, diagonalize(&f, &g).unwrap())
    }

    #[test]
    fn atom_five_cluster_pattern() {
        let (_, spectrum) = solved_clusters(SystemKind::Atom, 5);
        assert_eq!(spectrum.clusters.len(), 5);
        let mut mults: Vec<usize> = spectrum.clusters.iter().map(|c| c.multiplicity).collect();
        mults.sort_unstable();
        assert_eq!(mults, vec![1, 1, 4, 4, 5]);
        assert!(!spectrum.accidental_degeneracy);
        assert!(spectrum.max_residual < 1e-8, "residual {}", spectrum.max_residual);
    }

    #[test]
    fn three_particles_have_four_roots() {
        let (_, spectrum) = solved_clusters(SystemKind::Atom, 3);
        assert_eq!(spectrum.clusters.len(), 4);
        let mut mults: Vec<usize> = spectrum.clusters.iter().map(|c| c.multiplicity).collect();
        mults.sort_unstable();
        assert_eq!(mults, vec![1, 1, 2, 2]);
    }

    #[test]
    fn identity_inputs_collapse_to_one_cluster() {
        let n = 4;
        let ident = |kind: QuadKind| {
            InvariantQuadratic::new(
                n,
                kind,
                Elements {
                    a: 1.0,
                    g: 1.0,
                    d: Some(0.0),
                    f: Some(0.0),
                    h: Some(0.0),
                    iota: Some(0.0),
                    ..Default::default()
                },
            )
            .unwrap()
        };
        let spectrum = diagonalize(&ident(QuadKind::Hessian), &ident(QuadKind::Kinetic)).unwrap();
        assert_eq!(spectrum.clusters.len(), 1);
        assert_eq!(spectrum.clusters[0].multiplicity, coord_count(n));
        assert!((spectrum.clusters[0].lambda - 1.0).abs() < 1e-12);
        assert!(spectrum.accidental_degeneracy);
    }

    #[test]
    fn basis_is_g_orthonormal() {
        let (pt, spectrum) = solved_clusters(SystemKind::QuantumDot, 5);
        let g = kinetic_invariants(&pt, 5).unwrap().expand();
        let all: Vec<&DVector<f64>> = spectrum.clusters.iter().flat_map(|c| &c.basis).collect();
        for (i, bi) in all.iter().enumerate() {
            for (j, bj) in all.iter().enumerate() {
                let dot = (bi.transpose() * &g * *bj)[(0, 0)];
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!(
                    (dot - expected).abs() < 1e-8,
                    "G-orthonormality broken at ({i}, {j}): {dot}"
                );
            }
        }
    }

    #[test]
    fn equivalence_of_both_routes() {
        let mut rng = SplitMix64::new(0xabcd);
        for n in [3, 4, 6] {
            let f = crate::quadratic::random_invariant(&mut rng, n, QuadKind::Hessian);
            let g = crate::quadratic::random_invariant(&mut rng, n, QuadKind::Kinetic);
            let report = eigen_equivalence(&f, &g).unwrap();
            assert!(report.max_lambda_dev < 1e-10, "n = {n}: {report:?}");
            assert!(report.max_projector_dev < 1e-9, "n = {n}: {report:?}");
            assert!(report.max_norm_dev < 1e-9, "n = {n}: {report:?}");
        }
    }

    #[test]
    fn equivalence_with_diagonal_kinetic() {
        // with G = c I both routes reduce to the same symmetric problem
        let n = 4;
        let f = crate::quadratic::random_invariant(&mut SplitMix64::new(5), n, QuadKind::Hessian);
        let g = InvariantQuadratic::new(
            n,
            QuadKind::Kinetic,
            Elements {
                a: 2.0,
                g: 2.0,
                d: Some(0.0),
                f: Some(0.0),
                h: Some(0.0),
                iota: Some(0.0),
                ..Default::default()
            },
        )
        .unwrap();
        let report = eigen_equivalence(&f, &g).unwrap();
        assert!(report.max_projector_dev < 1e-10);
    }

    #[test]
    fn ground_state_wavefunction_at_origin() {
        let (_, spectrum) = solved_clusters(SystemKind::Atom, 4);
        let p = coord_count(4);
        let value = wavefunction_log(&spectrum, &Quanta::new(), &vec![0.0; p]).unwrap();
        let expected: f64 = spectrum
            .clusters
            .iter()
            .map(|c| {
                c.multiplicity as f64 * 0.25 * (c.lambda.sqrt() / std::f64::consts::PI).ln()
            })
            .sum();
        assert!((value.ln_abs - expected).abs() < 1e-12);
        assert_eq!(value.sign, 1);
    }

    #[test]
    fn single_quantum_vanishes_at_origin() {
        let (_, spectrum) = solved_clusters(SystemKind::Atom, 4);
        let p = coord_count(4);
        let mut quanta = Quanta::new();
        quanta.insert(0, vec![1]);
        let value = wavefunction_log(&spectrum, &quanta, &vec![0.0; p]).unwrap();
        assert_eq!(value.sign, 0);
        assert_eq!(value.value(), 0.0);
    }

    #[test]
    fn indefinite_kinetic_matrix_is_rejected() {
        let n = 4;
        let f = crate::quadratic::random_invariant(&mut SplitMix64::new(1), n, QuadKind::Hessian);
        // a "kinetic" matrix with a large negative shared-index element is
        // indefinite: the Cholesky route must refuse it
        let g = InvariantQuadratic::new(
            n,
            QuadKind::Kinetic,
            Elements {
                a: 1.0,
                g: 0.1,
                h: Some(-1.0),
                d: Some(0.0),
                f: Some(0.0),
                iota: Some(0.0),
                ..Default::default()
            },
        )
        .unwrap();
        assert!(matches!(
            diagonalize(&f, &g),
            Err(Error::NotPositiveDefinite(_))
        ));
    }

    #[test]
    fn quanta_validation() {
        let (point, spectrum) = solved_clusters(SystemKind::Atom, 4);
        let mut quanta = Quanta::new();
        quanta.insert(99, vec![1]);
        assert!(matches!(
            energy_first_order(&point, &spectrum, &quanta, 100),
            Err(Error::NoSuchCluster(99))
        ));
    }

    #[test]
    fn first_order_energy_arithmetic() {
        let (point, spectrum) = solved_clusters(SystemKind::Atom, 4);
        let d = 200;
        let ground = energy_first_order(&point, &spectrum, &Quanta::new(), d).unwrap();
        let zero_point: f64 = spectrum
            .clusters
            .iter()
            .map(|c| 0.5 * c.multiplicity as f64 * c.omega())
            .sum();
        assert!((ground - (point.e_inf + (zero_point + point.v0) / d as f64)).abs() < 1e-12);

        // one quantum in a singlet cluster raises the energy by omega / D
        let singlet = spectrum
            .clusters
            .iter()
            .position(|c| c.multiplicity == 1)
            .unwrap();
        let mut quanta = Quanta::new();
        quanta.insert(singlet, vec![1]);
        let excited = energy_first_order(&point, &spectrum, &quanta, d).unwrap();
        let omega = spectrum.clusters[singlet].omega();
        assert!((excited - ground - omega / d as f64).abs() < 1e-12);
    }

    #[test]
    fn noninteracting_dot_frequencies_are_closed_form() {
        let family = build_system(
            &SystemSpec::new(SystemKind::QuantumDot, 6, 100).with_param("interaction", 0.0),
        )
        .unwrap();
        let point = find_symmetric_minimum(&family, &SolverOptions::default()).unwrap();
        let f = hessian_invariants(&family, &point, Parallelism::default()).unwrap();
        let g = kinetic_invariants(&point, 6).unwrap();
        let spectrum = diagonalize(&f, &g).unwrap();
        // every mode of the noninteracting isotropic trap sits at the same
        // squared frequency: radial F_a G_a = 4 and angular F_g G_g =
        // (1/(2 r^2)) * (2/r^2) = 4 coincide, reproducing the uniform
        // excitation spacing of the decoupled oscillators
        for cluster in &spectrum.clusters {
            assert!(
                (cluster.lambda - 4.0).abs() < 5e-6,
                "unexpected root {}",
                cluster.lambda
            );
        }
        assert!(spectrum.accidental_degeneracy);
    }
}
