//! The Hessian (F), kinetic (G), and product (FG) matrices in their
//! nine-element invariant form.
//!
//! Because the symmetric minimum is invariant under every relabelling of the
//! particles, each of these `P x P` matrices (`P = N(N+1)/2`) has at most
//! nine distinct entries, one per index class:
//!
//! ```text
//! (i,i) -> a   (i,j) -> b   (ij,i) -> c   (jk,i) -> d   (i,ij) -> e
//! (i,jk) -> f  (ij,ij) -> g (ij,jk) -> h  (ij,kl) -> iota
//! ```
//!
//! with all indices distinct within a pattern. For `N = 2` and `N = 3` some
//! patterns have no realization and the corresponding classes are absent
//! (not zero). The dense matrix is recovered from the classes with the
//! block identities
//!
//! ```text
//! Q_rr = (a-b) I_N + b J_N                Q_rg = (e-f) R + f J
//! Q_gr = (c-d) R^T + d J^T                Q_gg = (g-2h+i) I_M + (h-i) R^T R + i J_M
//! ```
//!
//! where `R[i, jk] = delta_ij + delta_ik`. The product classes follow from
//! the F and G classes by closed "tilde" combinations, which is what lets
//! the five distinct frequencies be written down without ever forming the
//! dense product.

use nalgebra::DMatrix;
use serde_json::{json, Value};

use crate::equilibrium::SymmetricPoint;
use crate::error::{Error, Result};
use crate::exec::{map_collect, Parallelism};
use crate::model::{CentrifugalTerms, Configuration, EffectivePotentialFamily};
use crate::{coord_count, pair_count, pair_from_index, pair_index};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QuadKind {
    /// Second derivatives of the effective potential (symmetric).
    Hessian,
    /// Coefficients of the bilinear derivative term (symmetric, sparse).
    Kinetic,
    /// The Hessian-kinetic product (invariant but not symmetric).
    Product,
}

/// The nine class values; `None` marks a class with no realization at the
/// given particle number.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Elements {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: Option<f64>,
    pub e: f64,
    pub f: Option<f64>,
    pub g: f64,
    pub h: Option<f64>,
    pub iota: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InvariantQuadratic {
    n: usize,
    kind: QuadKind,
    elems: Elements,
}

impl InvariantQuadratic {
    pub fn new(n: usize, kind: QuadKind, elems: Elements) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidSpec(format!("N = {n} < 2")));
        }
        let need3 = n >= 3;
        let need4 = n >= 4;
        if elems.d.is_some() != need3 || elems.f.is_some() != need3 || elems.h.is_some() != need3 {
            return Err(Error::NotApplicable("three-index class", n));
        }
        if elems.iota.is_some() != need4 {
            return Err(Error::NotApplicable("disjoint-pair class", n));
        }
        if matches!(kind, QuadKind::Hessian | QuadKind::Kinetic) {
            let sym = elems.c == elems.e && elems.d == elems.f;
            if !sym {
                return Err(Error::InvalidSpec(
                    "symmetric kinds require c = e and d = f".into(),
                ));
            }
        }
        if kind == QuadKind::Kinetic {
            let zeros = [elems.b, elems.c, elems.e]
                .into_iter()
                .chain([elems.d, elems.f, elems.iota].into_iter().flatten());
            if zeros.into_iter().any(|x| x != 0.0) {
                return Err(Error::InvalidSpec(
                    "kinetic matrices couple nothing beyond the diagonal and shared-index angular classes".into(),
                ));
            }
        }
        Ok(Self { n, kind, elems })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> QuadKind {
        self.kind
    }

    pub fn elems(&self) -> &Elements {
        &self.elems
    }

    pub fn a(&self) -> f64 {
        self.elems.a
    }
    pub fn b(&self) -> f64 {
        self.elems.b
    }
    pub fn c(&self) -> f64 {
        self.elems.c
    }
    pub fn e(&self) -> f64 {
        self.elems.e
    }
    pub fn g(&self) -> f64 {
        self.elems.g
    }
    /// Absent classes enter the block algebra with weight zero; the
    /// identities below are arranged so their coefficients cancel exactly
    /// whenever the class has no realization.
    pub fn d0(&self) -> f64 {
        self.elems.d.unwrap_or(0.0)
    }
    pub fn f0(&self) -> f64 {
        self.elems.f.unwrap_or(0.0)
    }
    pub fn h0(&self) -> f64 {
        self.elems.h.unwrap_or(0.0)
    }
    pub fn iota0(&self) -> f64 {
        self.elems.iota.unwrap_or(0.0)
    }

    /// Dense `P x P` matrix from the class values.
    pub fn expand(&self) -> DMatrix<f64> {
        let n = self.n;
        let m = pair_count(n);
        let p = coord_count(n);
        let e = &self.elems;
        let mut out = DMatrix::zeros(p, p);
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] = if i == j { e.a } else { e.b };
            }
        }
        for k in 0..m {
            let (s, t) = pair_from_index(k);
            for i in 0..n {
                let touches = i == s || i == t;
                out[(i, n + k)] = if touches { e.e } else { self.f0() };
                out[(n + k, i)] = if touches { e.c } else { self.d0() };
            }
            for l in 0..m {
                let (u, v) = pair_from_index(l);
                let shared = [s, t]
                    .iter()
                    .filter(|&&x| x == u || x == v)
                    .count();
                out[(n + k, n + l)] = match shared {
                    2 => e.g,
                    1 => self.h0(),
                    _ => self.iota0(),
                };
            }
        }
        out
    }

    /// Read the class values back off a dense invariant matrix.
    pub fn classify(m: &DMatrix<f64>, n: usize, kind: QuadKind) -> Result<Self> {
        let p = coord_count(n);
        if m.nrows() != p || m.ncols() != p {
            return Err(Error::DimensionMismatch(format!(
                "expected {p} x {p}, got {} x {}",
                m.nrows(),
                m.ncols()
            )));
        }
        let elems = Elements {
            a: m[(0, 0)],
            b: m[(0, 1)],
            c: m[(n + pair_index(0, 1), 0)],
            d: (n >= 3).then(|| m[(n + pair_index(1, 2), 0)]),
            e: m[(0, n + pair_index(0, 1))],
            f: (n >= 3).then(|| m[(0, n + pair_index(1, 2))]),
            g: m[(n, n)],
            h: (n >= 3).then(|| m[(n + pair_index(0, 1), n + pair_index(0, 2))]),
            iota: (n >= 4).then(|| m[(n + pair_index(0, 1), n + pair_index(2, 3))]),
        };
        Self::new(n, kind, elems)
    }

    /// Debug dump of the nine elements, absent classes as null.
    pub fn debug_json(&self) -> Value {
        let e = &self.elems;
        json!({
            "Qa": e.a,
            "Qb": e.b,
            "Qc": e.c,
            "Qd": e.d,
            "Qe": e.e,
            "Qf": e.f,
            "Qg": e.g,
            "Qh": e.h,
            "Qiota": e.iota,
        })
    }
}

/// The nine product combinations and the three kinetic ones that the
/// symmetry-reduced blocks are written in.
#[derive(Clone, Copy, Debug)]
pub struct TildeSet {
    pub n: usize,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub e: f64,
    pub f: f64,
    pub g: f64,
    pub h: f64,
    pub iota: f64,
    pub a_prime: f64,
    pub g_prime: f64,
    pub h_prime: f64,
}

/// Product and kinetic combinations from the F and G classes.
pub fn tilde_coefficients(
    hessian: &InvariantQuadratic,
    kinetic: &InvariantQuadratic,
) -> Result<TildeSet> {
    if hessian.kind() != QuadKind::Hessian || kinetic.kind() != QuadKind::Kinetic {
        return Err(Error::InvalidSpec(
            "tilde coefficients take a Hessian and a Kinetic matrix".into(),
        ));
    }
    if hessian.n() != kinetic.n() {
        return Err(Error::DimensionMismatch(format!(
            "F has N = {}, G has N = {}",
            hessian.n(),
            kinetic.n()
        )));
    }
    let n = hessian.n();
    let nf = n as f64;
    let (fa, fb, fe, ff, fg, fh, fi) = (
        hessian.a(),
        hessian.b(),
        hessian.e(),
        hessian.f0(),
        hessian.g(),
        hessian.h0(),
        hessian.iota0(),
    );
    let (ga, gg, gh) = (kinetic.a(), kinetic.g(), kinetic.h0());
    Ok(TildeSet {
        n,
        a: (fa - fb) * ga,
        b: fb * ga,
        c: (fe - ff) * ga,
        d: ff * ga,
        e: (fe - ff) * (gg + (nf - 4.0) * gh),
        f: 2.0 * fe * gh + ff * (gg + 2.0 * (nf - 3.0) * gh),
        g: (fg - 2.0 * fh + fi) * (gg - 2.0 * gh),
        h: fg * gh + fh * (gg + (nf - 6.0) * gh) - fi * (gg + (nf - 5.0) * gh),
        iota: 4.0 * fh * gh + fi * (gg + 2.0 * (nf - 4.0) * gh),
        a_prime: ga,
        g_prime: gg - 2.0 * gh,
        h_prime: gh,
    })
}

impl TildeSet {
    /// Convert back to the nine-element class form of the product matrix.
    ///
    /// The tildes are coefficients of the block generators (identity,
    /// incidence, all-ones), so even when a class has no realization its
    /// tilde still feeds the classes that do: the all-ones coefficients
    /// land on every entry of their block.
    pub fn product_invariant(&self) -> Result<InvariantQuadratic> {
        let n = self.n;
        let elems = Elements {
            a: self.a + self.b,
            b: self.b,
            c: self.c + self.d,
            d: (n >= 3).then_some(self.d),
            e: self.e + self.f,
            f: (n >= 3).then_some(self.f),
            g: self.g + 2.0 * self.h + self.iota,
            h: (n >= 3).then_some(self.h + self.iota),
            iota: (n >= 4).then_some(self.iota),
        };
        InvariantQuadratic::new(n, QuadKind::Product, elems)
    }
}

/// Random invariant matrix for randomized validation. Kinetic draws keep
/// the sparsity pattern of a genuine kinetic matrix and are rejected until
/// positive definite.
pub fn random_invariant(rng: &mut crate::rng::SplitMix64, n: usize, kind: QuadKind) -> InvariantQuadratic {
    let mut val = |lim: f64| rng.uniform(-lim, lim);
    let elems = match kind {
        QuadKind::Kinetic => loop {
            let e = Elements {
                a: rng.uniform(0.5, 2.0),
                b: 0.0,
                c: 0.0,
                d: (n >= 3).then_some(0.0),
                e: 0.0,
                f: (n >= 3).then_some(0.0),
                g: rng.uniform(0.5, 2.0),
                h: (n >= 3).then(|| rng.uniform(-0.2, 0.2)),
                iota: (n >= 4).then_some(0.0),
            };
            let cand = InvariantQuadratic::new(n, kind, e).unwrap();
            if nalgebra::Cholesky::new(cand.expand()).is_some() {
                break e;
            }
        },
        _ => {
            let c = val(1.0);
            let d = (n >= 3).then(|| val(1.0));
            Elements {
                a: val(2.0),
                b: val(1.0),
                c,
                d,
                e: if kind == QuadKind::Hessian { c } else { val(1.0) },
                f: if kind == QuadKind::Hessian {
                    d
                } else {
                    (n >= 3).then(|| val(1.0))
                },
                g: val(2.0),
                h: (n >= 3).then(|| val(1.0)),
                iota: (n >= 4).then(|| val(1.0)),
            }
        }
    };
    InvariantQuadratic::new(n, kind, elems).unwrap()
}

/// Internal coordinate label for finite differencing.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Coord {
    Radius(usize),
    Cosine(usize, usize),
}

impl Coord {
    fn read(&self, cfg: &Configuration) -> f64 {
        match *self {
            Coord::Radius(i) => cfg.r[i],
            Coord::Cosine(i, j) => cfg.gamma[pair_index(i, j)],
        }
    }

    fn write(&self, cfg: &mut Configuration, value: f64) {
        match *self {
            Coord::Radius(i) => cfg.r[i] = value,
            Coord::Cosine(i, j) => cfg.gamma[pair_index(i, j)] = value,
        }
    }
}

fn step_for(x: f64) -> f64 {
    (1e-4_f64).max(1e-4 * x.abs())
}

const RICHARDSON_LIMIT: f64 = 1e-5;

enum CentSpec {
    None,
    One(usize),
    All,
}

/// The minimal term slice whose stencil difference equals the requested
/// second derivative: for a diagonal entry, everything the coordinate
/// touches; for a mixed entry, only the terms coupling both coordinates
/// (anything depending on just one of them cancels from the cross stencil).
fn entry_terms(n: usize, c1: Coord, c2: Coord) -> (CentSpec, Vec<usize>, Vec<(usize, usize)>) {
    match (c1, c2) {
        (Coord::Radius(i), Coord::Radius(j)) if i == j => {
            let pairs = (0..n)
                .filter(|&k| k != i)
                .map(|k| (i.min(k), i.max(k)))
                .collect();
            (CentSpec::One(i), vec![i], pairs)
        }
        // distinct radii couple only through their interaction term
        (Coord::Radius(i), Coord::Radius(j)) => {
            (CentSpec::None, vec![], vec![(i.min(j), i.max(j))])
        }
        (Coord::Cosine(a, b), Coord::Cosine(c, d)) if (a, b) == (c, d) => {
            (CentSpec::All, vec![], vec![(a, b)])
        }
        // distinct cosines couple through every Gramian ratio and nothing else
        (Coord::Cosine(..), Coord::Cosine(..)) => (CentSpec::All, vec![], vec![]),
        (Coord::Radius(i), Coord::Cosine(a, b)) | (Coord::Cosine(a, b), Coord::Radius(i)) => {
            // the radius meets the cosine in its own centrifugal ratio, and
            // in the pair distance when it is a member of the pair
            let pairs = if i == a || i == b { vec![(a, b)] } else { vec![] };
            (CentSpec::One(i), vec![], pairs)
        }
    }
}

/// Extrapolated second derivative and the raw disagreement of the two step
/// sizes, with no smoothness verdict attached.
fn hessian_entry_raw(
    family: &EffectivePotentialFamily,
    point: &SymmetricPoint,
    c1: Coord,
    c2: Coord,
) -> Result<(f64, f64)> {
    let base = Configuration::symmetric(family.n(), point.r_inf, point.gamma_inf)?;
    let (cent, conf, pairs) = entry_terms(family.n(), c1, c2);
    let slice = |cfg: &Configuration| -> Result<f64> {
        let one;
        let cent_sel = match cent {
            CentSpec::None => CentrifugalTerms::None,
            CentSpec::One(i) => {
                one = [i];
                CentrifugalTerms::Particles(&one)
            }
            CentSpec::All => CentrifugalTerms::All,
        };
        family.term_sum(cfg, cent_sel, &conf, &pairs)
    };

    let x1 = c1.read(&base);
    let h1 = step_for(x1);
    let estimate = |h: f64, k: f64| -> Result<f64> {
        if c1 == c2 {
            let s0 = slice(&base)?;
            let mut plus = base.clone();
            c1.write(&mut plus, x1 + h);
            let mut minus = base.clone();
            c1.write(&mut minus, x1 - h);
            Ok((slice(&plus)? - 2.0 * s0 + slice(&minus)?) / (h * h))
        } else {
            let x2 = c2.read(&base);
            let eval = |s1: f64, s2: f64| -> Result<f64> {
                let mut cfg = base.clone();
                c1.write(&mut cfg, x1 + s1);
                c2.write(&mut cfg, x2 + s2);
                slice(&cfg)
            };
            Ok(
                (eval(h, k)? - eval(h, -k)? - eval(-h, k)? + eval(-h, -k)?)
                    / (4.0 * h * k),
            )
        }
    };

    let k1 = step_for(c2.read(&base));
    let coarse = estimate(h1, k1)?;
    let fine = estimate(h1 / 2.0, k1 / 2.0)?;
    Ok(((4.0 * fine - coarse) / 3.0, (fine - coarse).abs()))
}

/// One second derivative of the potential at the symmetric point by central
/// differences with a single Richardson halving. The pair of estimates must
/// agree relative to the entry itself, otherwise the family is flagged as
/// non-smooth. (The batch builder below scales the same check by the whole
/// Hessian instead, since a small cross element shares its stencil error
/// with the large diagonal of the same slice.)
pub fn hessian_entry(
    family: &EffectivePotentialFamily,
    point: &SymmetricPoint,
    c1: Coord,
    c2: Coord,
) -> Result<f64> {
    let (extrapolated, disagreement) = hessian_entry_raw(family, point, c1, c2)?;
    let rel = disagreement / extrapolated.abs().max(1.0);
    if rel > RICHARDSON_LIMIT {
        return Err(Error::NonSmooth {
            rel,
            limit: RICHARDSON_LIMIT,
        });
    }
    Ok(extrapolated)
}

/// Hessian of the effective potential at the symmetric point, as class
/// values. Only one representative index pattern per class is differenced;
/// the invariance that makes this sufficient is validated against the fully
/// assembled Hessian in the test suite.
pub fn hessian_invariants(
    family: &EffectivePotentialFamily,
    point: &SymmetricPoint,
    par: Parallelism,
) -> Result<InvariantQuadratic> {
    let n = family.n();
    let mut jobs: Vec<(usize, Coord, Coord)> = vec![
        (0, Coord::Radius(0), Coord::Radius(0)),
        (1, Coord::Radius(0), Coord::Radius(1)),
        (2, Coord::Radius(0), Coord::Cosine(0, 1)),
        (4, Coord::Cosine(0, 1), Coord::Cosine(0, 1)),
    ];
    if n >= 3 {
        jobs.push((3, Coord::Radius(0), Coord::Cosine(1, 2)));
        jobs.push((5, Coord::Cosine(0, 1), Coord::Cosine(0, 2)));
    }
    if n >= 4 {
        jobs.push((6, Coord::Cosine(0, 1), Coord::Cosine(2, 3)));
    }

    let results = map_collect(par, jobs, |(slot, c1, c2)| {
        (slot, hessian_entry_raw(family, point, c1, c2))
    });
    let mut vals = [None::<f64>; 7];
    let mut worst_disagreement = 0.0_f64;
    let mut scale = 1.0_f64;
    for (slot, res) in results {
        let (value, disagreement) = res?;
        worst_disagreement = worst_disagreement.max(disagreement);
        scale = scale.max(value.abs());
        vals[slot] = Some(value);
    }
    let rel = worst_disagreement / scale;
    if rel > RICHARDSON_LIMIT {
        return Err(Error::NonSmooth {
            rel,
            limit: RICHARDSON_LIMIT,
        });
    }
    let elems = Elements {
        a: vals[0].unwrap(),
        b: vals[1].unwrap(),
        c: vals[2].unwrap(),
        d: vals[3],
        e: vals[2].unwrap(),
        f: vals[3],
        g: vals[4].unwrap(),
        h: vals[5],
        iota: vals[6],
    };
    InvariantQuadratic::new(n, QuadKind::Hessian, elems)
}

/// Kinetic-matrix class values in scaled units.
///
/// The radial block is the identity; the angular block carries the
/// `(gamma_jk - gamma_ij gamma_ik) / r_i^2` coefficients of the bilinear
/// derivative term, evaluated at the symmetric point. A pair differenced
/// with itself picks up that coefficient once from each of its two member
/// particles, so the diagonal class is `2 (1 - gamma^2) / r^2`, while pairs
/// sharing one particle meet only through that particle, giving
/// `(gamma - gamma^2) / r^2`. All other classes vanish.
///
/// With this normalization the angular block is positive definite on the
/// entire positivity window (its softest eigenvalue is proportional to
/// `(1 - gamma)(1 + (N-1) gamma)`, vanishing exactly at the window edge),
/// which the Cholesky factorization downstream relies on. The overall scale
/// is tied to the scale-factor convention and is flagged in run reports so
/// alternate conventions can be layered on.
pub fn kinetic_invariants(point: &SymmetricPoint, n: usize) -> Result<InvariantQuadratic> {
    let g = point.gamma_inf;
    let r2 = point.r_inf * point.r_inf;
    let elems = Elements {
        a: 1.0,
        b: 0.0,
        c: 0.0,
        d: (n >= 3).then_some(0.0),
        e: 0.0,
        f: (n >= 3).then_some(0.0),
        g: 2.0 * (1.0 - g * g) / r2,
        h: (n >= 3).then(|| (g - g * g) / r2),
        iota: (n >= 4).then_some(0.0),
    };
    InvariantQuadratic::new(n, QuadKind::Kinetic, elems)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibrium::{find_symmetric_minimum, SolverOptions};
    use crate::model::{build_system, SystemKind, SystemSpec};
    use crate::rng::SplitMix64;

    fn solved(system: SystemKind, n: usize) -> (EffectivePotentialFamily, SymmetricPoint) {
        let family = build_system(&SystemSpec::new(system, n, 100)).unwrap();
        let point = find_symmetric_minimum(&family, &SolverOptions::default()).unwrap();
        (family, point)
    }

    #[test]
    fn expand_identity_pattern() {
        let q = InvariantQuadratic::new(
            4,
            QuadKind::Hessian,
            Elements {
                a: 1.0,
                d: Some(0.0),
                f: Some(0.0),
                h: Some(0.0),
                iota: Some(0.0),
                ..Default::default()
            },
        )
        .unwrap();
        let m = q.expand();
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(m[(i, j)], if i == j { 1.0 } else { 0.0 });
            }
        }
        assert_eq!(m.view((4, 4), (6, 6)).iter().map(|x| x.abs()).sum::<f64>(), 0.0);
    }

    #[test]
    fn classify_inverts_expand_exactly() {
        let mut rng = SplitMix64::new(31);
        for n in [2, 3, 4, 6, 9] {
            for kind in [QuadKind::Hessian, QuadKind::Product] {
                let q = random_invariant(&mut rng, n, kind);
                let back = InvariantQuadratic::classify(&q.expand(), n, kind).unwrap();
                assert_eq!(q, back, "n = {n}");
            }
        }
    }

    #[test]
    fn expand_is_invariant_under_relabelling() {
        // distinct primes in every class; conjugating with any relabelling
        // permutation must reproduce the matrix entry for entry
        let n = 4;
        let q = InvariantQuadratic::new(
            n,
            QuadKind::Product,
            Elements {
                a: 2.0,
                b: 3.0,
                c: 5.0,
                d: Some(7.0),
                e: 11.0,
                f: Some(13.0),
                g: 17.0,
                h: Some(19.0),
                iota: Some(23.0),
            },
        )
        .unwrap();
        let m = q.expand();
        let p = coord_count(n);
        let mut rng = SplitMix64::new(99);
        for _ in 0..10 {
            // random permutation of particle labels
            let mut perm: Vec<usize> = (0..n).collect();
            for i in (1..n).rev() {
                let j = rng.uniform_usize(0, i);
                perm.swap(i, j);
            }
            // induced action on the coordinate list
            let mut coord_map = vec![0usize; p];
            for (i, &pi) in perm.iter().enumerate() {
                coord_map[i] = pi;
            }
            for k in 0..pair_count(n) {
                let (i, j) = pair_from_index(k);
                let (a, b) = (perm[i].min(perm[j]), perm[i].max(perm[j]));
                coord_map[n + k] = n + pair_index(a, b);
            }
            for row in 0..p {
                for col in 0..p {
                    assert_eq!(m[(row, col)], m[(coord_map[row], coord_map[col])]);
                }
            }
        }
    }

    #[test]
    fn tilde_matches_dense_product() {
        let mut rng = SplitMix64::new(0xf9);
        for n in [3, 4, 5, 6, 8, 10] {
            let f = random_invariant(&mut rng, n, QuadKind::Hessian);
            let g = random_invariant(&mut rng, n, QuadKind::Kinetic);
            let tilde = tilde_coefficients(&f, &g).unwrap();
            let via_tilde = tilde.product_invariant().unwrap().expand();
            let dense = f.expand() * g.expand();
            let scale = dense.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
            let dev = (&via_tilde - &dense)
                .iter()
                .fold(0.0_f64, |m, x| m.max(x.abs()));
            assert!(dev <= 1e-12 * scale.max(1.0), "n = {n}: dev {dev}");
        }
    }

    #[test]
    fn tilde_special_cases() {
        let mut rng = SplitMix64::new(7);
        let f = random_invariant(&mut rng, 5, QuadKind::Hessian);
        // kinetic with h = 0 decouples the angular mixing
        let g = InvariantQuadratic::new(
            5,
            QuadKind::Kinetic,
            Elements {
                a: 1.3,
                b: 0.0,
                c: 0.0,
                d: Some(0.0),
                e: 0.0,
                f: Some(0.0),
                g: 0.9,
                h: Some(0.0),
                iota: Some(0.0),
            },
        )
        .unwrap();
        let t = tilde_coefficients(&f, &g).unwrap();
        assert!((t.f - f.f0() * 0.9).abs() < 1e-15);
        assert!((t.iota - f.iota0() * 0.9).abs() < 1e-15);
        assert_eq!(t.a_prime, g.a());
    }

    #[test]
    fn product_is_generally_asymmetric_but_f_is_symmetric() {
        let mut rng = SplitMix64::new(8);
        let f = random_invariant(&mut rng, 5, QuadKind::Hessian);
        let g = random_invariant(&mut rng, 5, QuadKind::Kinetic);
        let fd = f.expand();
        assert_eq!(fd, fd.transpose());
        let gd = g.expand();
        assert_eq!(gd, gd.transpose());
        let prod = &fd * &gd;
        assert_ne!(prod, prod.transpose());
    }

    #[test]
    fn hessian_decouples_for_noninteracting_dot() {
        let family = build_system(
            &SystemSpec::new(SystemKind::QuantumDot, 5, 100).with_param("interaction", 0.0),
        )
        .unwrap();
        let point = find_symmetric_minimum(&family, &SolverOptions::default()).unwrap();
        let f = hessian_invariants(&family, &point, Parallelism::default()).unwrap();
        assert!(f.b().abs() < 1e-8, "F_b = {}", f.b());
        assert!(f.e().abs() < 1e-8, "F_e = {}", f.e());
        assert!(f.f0().abs() < 1e-8, "F_f = {}", f.f0());
        // radial diagonal: 3/(4 r^4) + 1 = 4 at r = 4^(-1/4)
        assert!((f.a() - 4.0).abs() < 1e-6, "F_a = {}", f.a());
    }

    #[test]
    fn representative_pairs_match_full_hessian() {
        let (family, point) = solved(SystemKind::Atom, 5);
        let f = hessian_invariants(&family, &point, Parallelism::default()).unwrap();
        let dense = f.expand();

        // independent oracle: assemble the full matrix by plain central
        // differences, no Richardson step
        let n = 5;
        let p = coord_count(n);
        let base = Configuration::symmetric(n, point.r_inf, point.gamma_inf).unwrap();
        let coord = |mu: usize| -> Coord {
            if mu < n {
                Coord::Radius(mu)
            } else {
                let (i, j) = pair_from_index(mu - n);
                Coord::Cosine(i, j)
            }
        };
        let v0 = family.value(&base, 0.0).unwrap();
        let mut oracle = DMatrix::zeros(p, p);
        let h = 1e-4;
        for mu in 0..p {
            for nu in mu..p {
                let val = if mu == nu {
                    let mut plus = base.clone();
                    let c = coord(mu);
                    c.write(&mut plus, c.read(&base) + h);
                    let mut minus = base.clone();
                    c.write(&mut minus, c.read(&base) - h);
                    (family.value(&plus, 0.0).unwrap() - 2.0 * v0
                        + family.value(&minus, 0.0).unwrap())
                        / (h * h)
                } else {
                    let (c1, c2) = (coord(mu), coord(nu));
                    let eval = |s1: f64, s2: f64| {
                        let mut cfg = base.clone();
                        c1.write(&mut cfg, c1.read(&base) + s1);
                        c2.write(&mut cfg, c2.read(&base) + s2);
                        family.value(&cfg, 0.0).unwrap()
                    };
                    (eval(h, h) - eval(h, -h) - eval(-h, h) + eval(-h, -h)) / (4.0 * h * h)
                };
                oracle[(mu, nu)] = val;
                oracle[(nu, mu)] = val;
            }
        }
        let scale = oracle.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        let dev = (&dense - &oracle)
            .iter()
            .fold(0.0_f64, |m, x| m.max(x.abs()));
        assert!(dev / scale < 1e-6, "max deviation {dev} against scale {scale}");
    }

    #[test]
    fn permuted_representative_pairs_agree() {
        let (family, point) = solved(SystemKind::Atom, 4);
        let e1 = hessian_entry(&family, &point, Coord::Radius(0), Coord::Cosine(0, 1)).unwrap();
        let e2 = hessian_entry(&family, &point, Coord::Radius(1), Coord::Cosine(1, 2)).unwrap();
        assert!((e1 - e2).abs() < 1e-8, "{e1} vs {e2}");
        let h1 = hessian_entry(&family, &point, Coord::Cosine(0, 1), Coord::Cosine(0, 2)).unwrap();
        let h2 = hessian_entry(&family, &point, Coord::Cosine(1, 3), Coord::Cosine(2, 3)).unwrap();
        assert!((h1 - h2).abs() < 1e-8, "{h1} vs {h2}");
    }

    #[test]
    fn kinetic_values_and_zero_pattern() {
        let point = SymmetricPoint {
            r_inf: 2.0,
            gamma_inf: 0.0,
            e_inf: 0.0,
            v0: 0.0,
            grad_residual: 0.0,
        };
        let g = kinetic_invariants(&point, 4).unwrap();
        assert_eq!(g.a(), 1.0);
        assert_eq!(g.g(), 0.5);
        assert_eq!(g.h0(), 0.0);
        assert_eq!(g.b(), 0.0);
        assert_eq!(g.iota0(), 0.0);
    }

    #[test]
    fn kinetic_matches_pattern_extracted_coefficients() {
        // direct oracle: assemble the angular block by walking the
        // (gamma_jk - gamma_ij gamma_ik) / r_i^2 pattern over every particle
        // i and ordered pair of coordinates touching it
        let point = SymmetricPoint {
            r_inf: 0.9,
            gamma_inf: -0.2,
            e_inf: 0.0,
            v0: 0.0,
            grad_residual: 0.0,
        };
        let n = 4;
        let g = kinetic_invariants(&point, n).unwrap().expand();
        let m = pair_count(n);
        let p = coord_count(n);
        let mut oracle = DMatrix::zeros(p, p);
        for i in 0..n {
            oracle[(i, i)] = 1.0;
        }
        let gm = point.gamma_inf;
        let r2 = point.r_inf * point.r_inf;
        // coefficient of d/d(gamma_ab) d/d(gamma_cd) summed over the shared
        // particles; gamma_xx = 1 on the diagonal of the cosine pattern
        let pattern = |a: usize, b: usize, c: usize, d: usize| -> f64 {
            let mut total = 0.0;
            for i in 0..n {
                let other1 = if a == i {
                    Some(b)
                } else if b == i {
                    Some(a)
                } else {
                    None
                };
                let other2 = if c == i {
                    Some(d)
                } else if d == i {
                    Some(c)
                } else {
                    None
                };
                if let (Some(j), Some(k)) = (other1, other2) {
                    let gamma_jk = if j == k { 1.0 } else { gm };
                    total += (gamma_jk - gm * gm) / r2;
                }
            }
            total
        };
        for k in 0..m {
            let (i, j) = pair_from_index(k);
            for l in 0..m {
                let (s, t) = pair_from_index(l);
                oracle[(n + k, n + l)] = pattern(i, j, s, t);
            }
        }
        assert_eq!(g, oracle);
        assert_eq!(g, g.transpose());
    }

    #[test]
    fn kinetic_positive_definite_on_window() {
        // softest angular eigenvalue vanishes only at the window edge
        for n in [3usize, 4, 6, 10] {
            let lo = -1.0 / (n as f64 - 1.0);
            for frac in [0.02, 0.3, 0.7, 0.98] {
                let gamma = lo + (1.0 - lo) * frac;
                let point = SymmetricPoint {
                    r_inf: 1.3,
                    gamma_inf: gamma,
                    e_inf: 0.0,
                    v0: 0.0,
                    grad_residual: 0.0,
                };
                let g = kinetic_invariants(&point, n).unwrap().expand();
                assert!(
                    nalgebra::Cholesky::new(g).is_some(),
                    "kinetic matrix not positive definite at n = {n}, gamma = {gamma}"
                );
            }
        }
    }

    #[test]
    fn non_smooth_family_trips_the_step_halving_check() {
        // a kink in the confinement right at the expansion point makes the
        // two step sizes disagree
        let family = EffectivePotentialFamily::custom(
            4,
            |r| 0.5 * r * r + (r - 1.0).abs(),
            |_| 0.0,
        );
        let point = SymmetricPoint {
            r_inf: 1.0,
            gamma_inf: 0.0,
            e_inf: 0.0,
            v0: 0.0,
            grad_residual: 0.0,
        };
        match hessian_entry(&family, &point, Coord::Radius(0), Coord::Radius(0)) {
            Err(crate::error::Error::NonSmooth { .. }) => {}
            other => panic!("expected a smoothness failure, got {other:?}"),
        }
    }

    #[test]
    fn tilde_rejects_mismatched_inputs() {
        let mut rng = SplitMix64::new(21);
        let f = random_invariant(&mut rng, 5, QuadKind::Hessian);
        let g4 = random_invariant(&mut rng, 4, QuadKind::Kinetic);
        assert!(tilde_coefficients(&f, &g4).is_err());
        let also_f = random_invariant(&mut rng, 5, QuadKind::Hessian);
        assert!(tilde_coefficients(&f, &also_f).is_err());
    }

    #[test]
    fn debug_json_keys() {
        let mut rng = SplitMix64::new(3);
        let q = random_invariant(&mut rng, 3, QuadKind::Hessian);
        let v = q.debug_json();
        assert!(v.get("Qa").unwrap().is_number());
        assert!(v.get("Qiota").unwrap().is_null());
        let q4 = random_invariant(&mut rng, 4, QuadKind::Hessian);
        assert!(q4.debug_json().get("Qiota").unwrap().is_number());
    }
}
