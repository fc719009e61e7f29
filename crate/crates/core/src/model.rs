//! Physical systems and the dimensionally scaled effective potential.
//!
//! In scaled units (`hbar = m = 1`) the large-dimension limit of the
//! Jacobian-weighted Hamiltonian leaves a static effective potential
//!
//! ```text
//! V_eff = sum_i [ (1/(8 r_i^2)) Gamma^(i)/Gamma + V_conf(r_i) ]
//!       + sum_{i<j} V_int(r_ij),      r_ij = sqrt(r_i^2 + r_j^2 - 2 r_i r_j gamma_ij)
//! ```
//!
//! whose minimum is the frozen structure everything else expands about. The
//! family carries an explicit dependence on the expansion parameter
//! `delta = 1/D` through the centrifugal coefficient
//! `delta^2 N(N-2) + (1 - (N+1) delta)^2 Gamma^(i)/Gamma`, which reduces to
//! the expression above at `delta = 0` and supplies the first-order constant
//! `v0` as its `delta` derivative.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gramian::{correlation_matrix, log_det_spd, log_gramian_and_minors};
use crate::{pair_count, pair_index};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SystemKind {
    Atom,
    QuantumDot,
    Custom,
}

/// Which scale factor `kappa(D)` connects scaled and physical units.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KappaKind {
    /// `(D-1)(D-2N-1)/(4Z)`
    Atom,
    /// `Omega * l_ho` with `Omega = (D-1)(D-2N-1)/4`
    Dot,
    /// `D^2 * a_ho`
    Bec,
}

/// Named system: what is confined, how many particles, and which scale
/// factor applies. `D` feeds only the unscaling previews and the
/// Jacobian-weight checks; the scaled computation itself is `D`-free.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SystemSpec {
    pub system: SystemKind,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "D")]
    pub d: usize,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa_kind: Option<KappaKind>,
}

impl SystemSpec {
    pub fn new(system: SystemKind, n: usize, d: usize) -> Self {
        Self {
            system,
            n,
            d,
            params: BTreeMap::new(),
            kappa_kind: None,
        }
    }

    pub fn with_param(mut self, name: &str, value: f64) -> Self {
        self.params.insert(name.to_string(), value);
        self
    }

    pub fn param(&self, name: &str) -> Option<f64> {
        self.params.get(name).copied()
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidSpec(format!("N = {} < 2", self.n)));
        }
        if self.d == 0 {
            return Err(Error::InvalidSpec("D must be positive".into()));
        }
        match self.system {
            SystemKind::Atom => {
                let z = self.param("Z").unwrap_or(self.n as f64);
                if z <= 0.0 {
                    return Err(Error::InvalidSpec(format!("Z = {z} must be > 0")));
                }
            }
            SystemKind::QuantumDot => {
                let omega = self.param("omega").unwrap_or(1.0);
                if omega <= 0.0 {
                    return Err(Error::InvalidSpec(format!("omega = {omega} must be > 0")));
                }
            }
            SystemKind::Custom => {
                let omega = self.param("omega").unwrap_or(1.0);
                if omega <= 0.0 {
                    return Err(Error::InvalidSpec(format!("omega = {omega} must be > 0")));
                }
                if let Some(p) = self.param("power") {
                    if p < 1.0 {
                        return Err(Error::InvalidSpec(format!(
                            "soft-core power p = {p} must be >= 1"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn kappa_kind(&self) -> KappaKind {
        self.kappa_kind.unwrap_or(match self.system {
            SystemKind::Atom => KappaKind::Atom,
            SystemKind::QuantumDot => KappaKind::Dot,
            SystemKind::Custom => KappaKind::Bec,
        })
    }

    /// Scale factor `kappa(D)` for unscaling previews. The harmonic lengths
    /// `l_ho` and `a_ho` are taken as the unit of length.
    pub fn kappa(&self) -> f64 {
        let d = self.d as f64;
        let n = self.n as f64;
        match self.kappa_kind() {
            KappaKind::Atom => {
                let z = self.param("Z").unwrap_or(n);
                (d - 1.0) * (d - 2.0 * n - 1.0) / (4.0 * z)
            }
            KappaKind::Dot => (d - 1.0) * (d - 2.0 * n - 1.0) / 4.0,
            KappaKind::Bec => d * d,
        }
    }
}

/// Internal coordinates: `N` scaled radii and `N(N-1)/2` angle cosines in
/// the `(12), (13), (23), (14), ...` layout.
#[derive(Clone, Debug, PartialEq)]
pub struct Configuration {
    pub r: Vec<f64>,
    pub gamma: Vec<f64>,
}

impl Configuration {
    pub fn new(r: Vec<f64>, gamma: Vec<f64>) -> Result<Self> {
        let n = r.len();
        if n < 2 {
            return Err(Error::InvalidConfiguration("need at least 2 particles".into()));
        }
        if gamma.len() != pair_count(n) {
            return Err(Error::DimensionMismatch(format!(
                "expected {} angle cosines for N = {n}, got {}",
                pair_count(n),
                gamma.len()
            )));
        }
        if let Some(bad) = r.iter().find(|&&x| x <= 0.0 || !x.is_finite()) {
            return Err(Error::InvalidConfiguration(format!("radius {bad} not > 0")));
        }
        if let Some(bad) = gamma.iter().find(|&&g| !(g > -1.0 && g < 1.0)) {
            return Err(Error::InvalidConfiguration(format!(
                "angle cosine {bad} outside (-1, 1)"
            )));
        }
        let cfg = Self { r, gamma };
        // positive definiteness of the correlation matrix
        log_det_spd(&correlation_matrix(n, &cfg.gamma))?;
        Ok(cfg)
    }

    pub fn symmetric(n: usize, r_inf: f64, gamma_inf: f64) -> Result<Self> {
        Self::new(vec![r_inf; n], vec![gamma_inf; pair_count(n)])
    }

    pub fn n(&self) -> usize {
        self.r.len()
    }

    /// Relabel particles: particle `i` of the result is particle `perm[i]`
    /// of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let n = self.n();
        let r = perm.iter().map(|&p| self.r[p]).collect();
        let mut gamma = vec![0.0; self.gamma.len()];
        for j in 1..n {
            for i in 0..j {
                let (a, b) = (perm[i].min(perm[j]), perm[i].max(perm[j]));
                gamma[pair_index(i, j)] = self.gamma[pair_index(a, b)];
            }
        }
        Self { r, gamma }
    }

    pub fn interparticle_distance(&self, i: usize, j: usize) -> f64 {
        let (a, b) = (i.min(j), i.max(j));
        let g = self.gamma[pair_index(a, b)];
        (self.r[i] * self.r[i] + self.r[j] * self.r[j] - 2.0 * self.r[i] * self.r[j] * g).sqrt()
    }
}

#[derive(Clone)]
enum Confinement {
    /// `-1/r` (nuclear attraction in scaled units; `Z` lives in `kappa`)
    Coulomb,
    /// `omega^2 r^2 / 2`
    Harmonic { omega: f64 },
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

#[derive(Clone)]
enum Interaction {
    /// `strength / r_ij`
    Coulomb { strength: f64 },
    /// `strength * r_ij^(-power)`
    SoftCore { strength: f64, power: f64 },
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl Confinement {
    fn eval(&self, r: f64) -> f64 {
        match self {
            Confinement::Coulomb => -1.0 / r,
            Confinement::Harmonic { omega } => 0.5 * omega * omega * r * r,
            Confinement::Custom(f) => f(r),
        }
    }

    fn label(&self) -> &'static str {
        match self {
            Confinement::Coulomb => "coulomb_attraction",
            Confinement::Harmonic { .. } => "harmonic_trap",
            Confinement::Custom(_) => "custom",
        }
    }
}

impl Interaction {
    fn eval(&self, rij: f64) -> f64 {
        match self {
            Interaction::Coulomb { strength } => strength / rij,
            Interaction::SoftCore { strength, power } => strength * rij.powf(-power),
            Interaction::Custom(f) => f(rij),
        }
    }

    fn label(&self) -> &'static str {
        match self {
            Interaction::Coulomb { .. } => "coulomb_repulsion",
            Interaction::SoftCore { .. } => "soft_core",
            Interaction::Custom(_) => "custom",
        }
    }
}

/// The scaled effective potential for one system. Immutable and pure:
/// evaluation never mutates, so the family can be shared across threads.
#[derive(Clone)]
pub struct EffectivePotentialFamily {
    n: usize,
    conf: Confinement,
    int: Interaction,
    delta_centrifugal: bool,
}

impl fmt::Debug for EffectivePotentialFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EffectivePotentialFamily")
            .field("n", &self.n)
            .field("conf", &self.conf.label())
            .field("int", &self.int.label())
            .field("delta_centrifugal", &self.delta_centrifugal)
            .finish()
    }
}

/// Canonical particle order: sort by radius, break ties by the sorted row of
/// angle cosines. Evaluating through this order makes the potential exactly
/// invariant under relabelling, bit for bit, because a permuted configuration
/// reduces to the identical sequence of arithmetic operations.
fn canonical_order(r: &[f64], gamma: &[f64]) -> Vec<usize> {
    let n = r.len();
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut row: Vec<f64> = (0..n)
                .filter(|&j| j != i)
                .map(|j| gamma[pair_index(i.min(j), i.max(j))])
                .collect();
            row.sort_by(f64::total_cmp);
            row
        })
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        r[a].total_cmp(&r[b]).then_with(|| {
            for (x, y) in rows[a].iter().zip(&rows[b]) {
                let c = x.total_cmp(y);
                if c != std::cmp::Ordering::Equal {
                    return c;
                }
            }
            std::cmp::Ordering::Equal
        })
    });
    order
}

/// Sum in ascending order so the result does not depend on how the terms
/// were produced.
fn ordered_sum(mut terms: Vec<f64>) -> f64 {
    terms.sort_by(f64::total_cmp);
    terms.iter().sum()
}

impl EffectivePotentialFamily {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn conf_label(&self) -> &'static str {
        self.conf.label()
    }

    pub fn int_label(&self) -> &'static str {
        self.int.label()
    }

    pub fn has_delta_dependence(&self) -> bool {
        self.delta_centrifugal
    }

    /// Drop the `delta` dependence; the family then evaluates its
    /// `delta = 0` slice for every `delta` and reports `v0 = 0`.
    pub fn without_delta_dependence(mut self) -> Self {
        self.delta_centrifugal = false;
        self
    }

    /// Custom family from one- and two-body potentials of the scalar radius
    /// and interparticle distance.
    pub fn custom(
        n: usize,
        conf: impl Fn(f64) -> f64 + Send + Sync + 'static,
        int: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            n,
            conf: Confinement::Custom(Arc::new(conf)),
            int: Interaction::Custom(Arc::new(int)),
            delta_centrifugal: true,
        }
    }

    /// Scaled effective potential at a configuration and expansion parameter.
    pub fn value(&self, cfg: &Configuration, delta: f64) -> Result<f64> {
        if cfg.n() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "family built for N = {}, configuration has N = {}",
                self.n,
                cfg.n()
            )));
        }
        let order = canonical_order(&cfg.r, &cfg.gamma);
        let canon = cfg.permuted(&order);
        let n = self.n;
        let nf = n as f64;

        let (log_full, log_minors) = log_gramian_and_minors(n, &canon.gamma)?;
        let (c0, c1) = if self.delta_centrifugal {
            let lin = 1.0 - (nf + 1.0) * delta;
            (delta * delta * nf * (nf - 2.0), lin * lin)
        } else {
            (0.0, 1.0)
        };

        let per_particle: Vec<f64> = (0..n)
            .map(|i| {
                let ratio = (log_minors[i] - log_full).exp();
                (c0 + c1 * ratio) / (8.0 * canon.r[i] * canon.r[i]) + self.conf.eval(canon.r[i])
            })
            .collect();

        let mut pair_terms = Vec::with_capacity(pair_count(n));
        for j in 1..n {
            for i in 0..j {
                pair_terms.push(self.int.eval(canon.interparticle_distance(i, j)));
            }
        }
        Ok(ordered_sum(per_particle) + ordered_sum(pair_terms))
    }

    /// Convenience: value at the totally symmetric configuration.
    pub fn value_symmetric(&self, r_inf: f64, gamma_inf: f64, delta: f64) -> Result<f64> {
        self.value(&Configuration::symmetric(self.n, r_inf, gamma_inf)?, delta)
    }

    /// Sum of a selected subset of potential terms (at `delta = 0`): the
    /// centrifugal terms of `cent` particles, the confinement terms of
    /// `conf` particles, and the listed interaction pairs.
    ///
    /// Finite-difference stencils difference these slices instead of the
    /// whole potential. Terms that do not couple the differenced coordinates
    /// cancel from the stencil in exact arithmetic, so leaving them out
    /// changes nothing but the rounding floor, which then scales with the
    /// few coupled terms instead of the full potential. That matters for
    /// Coulomb systems, whose derivative scales near the minimum would
    /// otherwise drown second differences in noise as `N` grows.
    ///
    /// Evaluation relabels the particles canonically (as [`Self::value`]
    /// does), so slices over symmetry-equivalent index patterns are
    /// bit-identical.
    pub fn term_sum(
        &self,
        cfg: &Configuration,
        cent: CentrifugalTerms,
        conf: &[usize],
        pairs: &[(usize, usize)],
    ) -> Result<f64> {
        let n = self.n;
        if cfg.n() != n {
            return Err(Error::DimensionMismatch(format!(
                "family built for N = {n}, configuration has N = {}",
                cfg.n()
            )));
        }
        let order = canonical_order(&cfg.r, &cfg.gamma);
        let canon = cfg.permuted(&order);
        // canonical position of each original particle
        let mut position = vec![0usize; n];
        for (pos, &orig) in order.iter().enumerate() {
            position[orig] = pos;
        }

        let mut total = 0.0;
        match cent {
            CentrifugalTerms::None => {}
            CentrifugalTerms::Particles(list) => {
                let (log_full, log_minors) = log_gramian_and_minors(n, &canon.gamma)?;
                let mut mapped: Vec<usize> = list.iter().map(|&i| position[i]).collect();
                mapped.sort_unstable();
                for i in mapped {
                    total +=
                        (log_minors[i] - log_full).exp() / (8.0 * canon.r[i] * canon.r[i]);
                }
            }
            CentrifugalTerms::All => {
                let (log_full, log_minors) = log_gramian_and_minors(n, &canon.gamma)?;
                for (minor, r) in log_minors.iter().zip(&canon.r) {
                    total += (minor - log_full).exp() / (8.0 * r * r);
                }
            }
        }
        let mut conf_mapped: Vec<usize> = conf.iter().map(|&i| position[i]).collect();
        conf_mapped.sort_unstable();
        for i in conf_mapped {
            total += self.conf.eval(canon.r[i]);
        }
        let mut pairs_mapped: Vec<(usize, usize)> = pairs
            .iter()
            .map(|&(i, j)| {
                let (a, b) = (position[i], position[j]);
                (a.min(b), a.max(b))
            })
            .collect();
        pairs_mapped.sort_unstable();
        for (i, j) in pairs_mapped {
            total += self.int.eval(canon.interparticle_distance(i, j));
        }
        Ok(total)
    }

    /// `dV/dr_i` at a configuration by fourth-order central differences of
    /// the radius-dependent slice.
    pub fn radial_derivative(&self, cfg: &Configuration, i: usize) -> Result<f64> {
        let pairs: Vec<(usize, usize)> = (0..self.n)
            .filter(|&j| j != i)
            .map(|j| (i.min(j), i.max(j)))
            .collect();
        let slice = |r: f64| -> Result<f64> {
            let mut moved = cfg.clone();
            moved.r[i] = r;
            self.term_sum(&moved, CentrifugalTerms::Particles(&[i]), &[i], &pairs)
        };
        let x = cfg.r[i];
        let h = 1e-4 * x;
        Ok((slice(x - 2.0 * h)? - 8.0 * slice(x - h)? + 8.0 * slice(x + h)?
            - slice(x + 2.0 * h)?)
            / (12.0 * h))
    }

    /// `dV/dgamma_ij` at a configuration by fourth-order central differences
    /// of the cosine-dependent slice (every centrifugal ratio plus the one
    /// interparticle distance).
    pub fn cosine_derivative(&self, cfg: &Configuration, i: usize, j: usize) -> Result<f64> {
        let k = pair_index(i.min(j), i.max(j));
        let x = cfg.gamma[k];
        let slice = |g: f64| -> Result<f64> {
            let mut moved = cfg.clone();
            moved.gamma[k] = g;
            self.term_sum(&moved, CentrifugalTerms::All, &[], &[(i, j)])
        };
        // stay well inside (-1, 1) and the positive-definite region
        let mut h = 1e-3_f64.min(0.05 * (1.0 - x.abs()).max(1e-8));
        for _ in 0..4 {
            let attempt = || -> Result<f64> {
                Ok((slice(x - 2.0 * h)? - 8.0 * slice(x - h)? + 8.0 * slice(x + h)?
                    - slice(x + 2.0 * h)?)
                    / (12.0 * h))
            };
            match attempt() {
                Ok(d) => return Ok(d),
                Err(_) => h *= 0.25,
            }
        }
        Err(Error::InvalidConfiguration(format!(
            "cosine derivative stencil left the valid region at gamma = {x}"
        )))
    }
}

/// Which centrifugal terms a [`EffectivePotentialFamily::term_sum`] slice
/// includes.
#[derive(Clone, Copy, Debug)]
pub enum CentrifugalTerms<'a> {
    None,
    Particles(&'a [usize]),
    All,
}

/// Build the effective-potential family for a system.
///
/// For the atom the nuclear charge is absorbed into the scale factor, which
/// leaves `1/Z` on the electron-electron repulsion; `Z` defaults to `N` (a
/// neutral atom). Without that factor the repulsion overwhelms the
/// attraction and no stable symmetric configuration exists for `N >= 2`.
pub fn build_system(spec: &SystemSpec) -> Result<EffectivePotentialFamily> {
    spec.validate()?;
    let (conf, int) = match spec.system {
        SystemKind::Atom => (
            Confinement::Coulomb,
            Interaction::Coulomb {
                strength: 1.0 / spec.param("Z").unwrap_or(spec.n as f64),
            },
        ),
        SystemKind::QuantumDot => (
            Confinement::Harmonic {
                omega: spec.param("omega").unwrap_or(1.0),
            },
            Interaction::Coulomb {
                strength: spec.param("interaction").unwrap_or(1.0),
            },
        ),
        SystemKind::Custom => (
            Confinement::Harmonic {
                omega: spec.param("omega").unwrap_or(1.0),
            },
            Interaction::SoftCore {
                strength: spec
                    .param("interaction")
                    .or_else(|| spec.param("strength"))
                    .unwrap_or(1.0),
                power: spec.param("power").unwrap_or(1.0),
            },
        ),
    };
    Ok(EffectivePotentialFamily {
        n: spec.n,
        conf,
        int,
        delta_centrifugal: true,
    })
}

/// Random valid configuration: angle cosines from the Gram matrix of random
/// unit vectors (positive definite by construction), radii uniform in
/// `(0.3, 2.5)`. Used by the randomized validation suites.
pub fn random_configuration(rng: &mut crate::rng::SplitMix64, n: usize) -> Configuration {
    let dim = n + 2;
    let vecs: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            let mut v: Vec<f64> = (0..dim).map(|_| rng.uniform(-1.0, 1.0)).collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            v.iter_mut().for_each(|x| *x /= norm);
            v
        })
        .collect();
    let mut gamma = vec![0.0; pair_count(n)];
    for j in 1..n {
        for i in 0..j {
            gamma[pair_index(i, j)] = vecs[i].iter().zip(&vecs[j]).map(|(a, b)| a * b).sum();
        }
    }
    let r = (0..n).map(|_| rng.uniform(0.3, 2.5)).collect();
    Configuration::new(r, gamma).expect("random Gram configuration is valid")
}

/// `log(J chi^2)` for the transformation to internal coordinates, where
///
/// ```text
/// J   = (r_1 ... r_N)^(D-1)    Gamma^((D-N-1)/2)
/// chi = (r_1 ... r_N)^(-(D-1)/2) Gamma^(-(D-N-1)/4)
/// ```
///
/// The weight `W = J chi^2` is identically one, so the returned value is a
/// pure rounding residual; anything above ~1e-10 signals a broken Gramian.
pub fn jacobian_weight_residual(cfg: &Configuration, d: usize, n: usize) -> Result<f64> {
    if cfg.n() != n {
        return Err(Error::DimensionMismatch(format!(
            "configuration has N = {}, expected {n}",
            cfg.n()
        )));
    }
    if d <= n + 1 {
        return Err(Error::InvalidSpec(format!(
            "need D > N + 1 for positive exponents, got D = {d}, N = {n}"
        )));
    }
    let df = d as f64;
    let nf = n as f64;
    let sum_log_r: f64 = cfg.r.iter().map(|r| r.ln()).sum();
    let log_gamma = log_det_spd(&correlation_matrix(n, &cfg.gamma))?;
    let log_j = (df - 1.0) * sum_log_r + 0.5 * (df - nf - 1.0) * log_gamma;
    let log_chi = -0.5 * (df - 1.0) * sum_log_r - 0.25 * (df - nf - 1.0) * log_gamma;
    Ok(log_j + 2.0 * log_chi)
}
