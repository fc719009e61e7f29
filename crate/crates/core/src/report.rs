//! Packaging a full run into stable, comparable records.
//!
//! A run is the pipeline system -> equilibrium -> invariant matrices ->
//! species decomposition -> closed-form symmetric modes -> brute-force
//! spectrum, with every stage's failure tagged by stage name. Reports are
//! deterministic for a given spec: reruns produce byte-identical output.

use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

use crate::equilibrium::{self, SolverOptions, SymmetricPoint, V0Mode};
use crate::error::Error;
use crate::exec::{map_collect, Parallelism};
use crate::model::{build_system, SystemSpec};
use crate::nspecies::{self, NSpeciesModes};
use crate::oracle::{self, Quanta, SpectrumClusters};
use crate::quadratic::{hessian_invariants, kinetic_invariants};
use crate::symgroup::{decompose, Sector, Species};

#[derive(Debug, thiserror::Error)]
#[error("{stage}: {source}")]
pub struct StageError {
    pub stage: &'static str,
    #[source]
    pub source: Error,
}

fn stage<T>(name: &'static str, res: Result<T, Error>) -> Result<T, StageError> {
    res.map_err(|source| StageError {
        stage: name,
        source,
    })
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
pub struct Tolerances {
    pub grad: f64,
    pub cluster: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            grad: 1e-10,
            cluster: 1e-7,
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub tolerances: Tolerances,
    pub seed: Option<(f64, f64)>,
    /// Occupation numbers for the first-order energy beyond the ground
    /// state.
    pub quanta: Option<Quanta>,
    pub parallelism: Parallelism,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ClusterSummary {
    pub lambda: f64,
    pub omega: f64,
    pub multiplicity: usize,
    /// Species tag, set only where the assignment is unambiguous: the two
    /// singlets matched against the closed-form branches, and clusters whose
    /// multiplicity identifies the species uniquely.
    pub species: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct SymmetricModesSummary {
    pub lambda_plus: f64,
    pub lambda_minus: f64,
    pub omega_plus: f64,
    pub omega_minus: f64,
    pub theta_plus: f64,
    pub theta_minus: f64,
    pub c_plus: f64,
    pub c_minus: f64,
    pub s_theta: f64,
}

impl From<&NSpeciesModes> for SymmetricModesSummary {
    fn from(m: &NSpeciesModes) -> Self {
        Self {
            lambda_plus: m.lambda_plus,
            lambda_minus: m.lambda_minus,
            omega_plus: m.omega_plus,
            omega_minus: m.omega_minus,
            theta_plus: m.theta_plus,
            theta_minus: m.theta_minus,
            c_plus: m.c_plus,
            c_minus: m.c_minus,
            s_theta: m.s_theta,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct EnergySummary {
    pub e_inf: f64,
    /// `E_inf + (zero-point sum + v0) / D`
    pub e_first_order_ground: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub e_first_order_requested: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Provenance {
    pub v0_mode: V0Mode,
    /// Kinetic-matrix normalization convention; alternate scale-factor
    /// conventions rescale these entries.
    pub g_convention: String,
    pub accidental_degeneracy: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunReport {
    pub spec: SystemSpec,
    pub kappa: f64,
    pub point: SymmetricPoint,
    pub clusters: Vec<ClusterSummary>,
    pub symmetric_modes: SymmetricModesSummary,
    pub energy: EnergySummary,
    pub provenance: Provenance,
    pub tolerances: Tolerances,
}

/// Execute the full pipeline for one system.
pub fn run(spec: &SystemSpec, opts: &RunOptions) -> Result<RunReport, StageError> {
    let family = stage("model", build_system(spec))?;
    let solver = SolverOptions {
        tol: opts.tolerances.grad,
        seed: opts.seed,
        parallelism: opts.parallelism,
        ..Default::default()
    };
    let point = stage(
        "equilibrium",
        equilibrium::find_symmetric_minimum(&family, &solver),
    )?;
    let (_, v0_mode) = stage("equilibrium", equilibrium::compute_v0(&family, &point))?;

    let hessian = stage(
        "quadratic",
        hessian_invariants(&family, &point, opts.parallelism),
    )?;
    let kinetic = stage("quadratic", kinetic_invariants(&point, spec.n))?;

    // species bookkeeping: multiplicities predicted by character theory
    // where the exact class arithmetic is available, otherwise straight from
    // the closed-form species dimensions
    let mut predicted: Vec<usize> = Vec::new();
    if spec.n <= 20 {
        let radial = stage("symgroup", decompose(spec.n, Sector::Radial))?;
        let angular = stage("symgroup", decompose(spec.n, Sector::Angular))?;
        for (species, mult) in radial.iter().chain(angular.iter()) {
            for _ in 0..*mult {
                predicted.push(species.dimension(spec.n).unwrap());
            }
        }
    } else {
        for sector in [Sector::Radial, Sector::Angular] {
            for species in Species::ALL {
                let in_sector = match sector {
                    Sector::Radial => species != Species::PartN22,
                    Sector::Angular => true,
                };
                if in_sector {
                    if let Some(dim) = species.dimension(spec.n) {
                        predicted.push(dim);
                    }
                }
            }
        }
    }
    predicted.sort_unstable();

    let (sigma_fg, sigma_g) = stage("nspecies", nspecies::sigma_blocks(&hessian, &kinetic))?;
    let modes = stage("nspecies", nspecies::solve_species(&sigma_fg, &sigma_g))?;

    let spectrum = stage(
        "oracle",
        oracle::diagonalize_with_tol(&hessian, &kinetic, opts.tolerances.cluster),
    )?;
    let mut observed: Vec<usize> = spectrum.clusters.iter().map(|c| c.multiplicity).collect();
    observed.sort_unstable();
    if observed != predicted && !spectrum.accidental_degeneracy {
        return Err(StageError {
            stage: "report",
            source: Error::ClusterPattern {
                expected: predicted,
                found: observed,
            },
        });
    }

    let clusters = tag_clusters(spec.n, &spectrum, &modes);

    let ground = stage(
        "oracle",
        oracle::energy_first_order(&point, &spectrum, &Quanta::new(), spec.d),
    )?;
    let requested = match &opts.quanta {
        Some(q) => Some(stage(
            "oracle",
            oracle::energy_first_order(&point, &spectrum, q, spec.d),
        )?),
        None => None,
    };

    Ok(RunReport {
        spec: spec.clone(),
        kappa: spec.kappa(),
        point,
        clusters,
        symmetric_modes: SymmetricModesSummary::from(&modes),
        energy: EnergySummary {
            e_inf: point.e_inf,
            e_first_order_ground: ground,
            e_first_order_requested: requested,
        },
        provenance: Provenance {
            v0_mode,
            g_convention: "scaled-units, unit radial block".to_string(),
            accidental_degeneracy: spectrum.accidental_degeneracy,
        },
        tolerances: opts.tolerances,
    })
}

fn tag_clusters(
    n: usize,
    spectrum: &SpectrumClusters,
    modes: &NSpeciesModes,
) -> Vec<ClusterSummary> {
    let match_tol = |lambda: f64, target: f64| {
        (lambda - target).abs() <= 1e-8 * target.abs().max(lambda.abs()).max(1.0)
    };
    let dims = [
        (Species::PartN11.dimension(n), Species::PartN11),
        (Species::PartN22.dimension(n), Species::PartN22),
    ];
    spectrum
        .clusters
        .iter()
        .map(|c| {
            let species = if c.multiplicity == 1 && match_tol(c.lambda, modes.lambda_plus) {
                Some("[N]+".to_string())
            } else if c.multiplicity == 1 && match_tol(c.lambda, modes.lambda_minus) {
                Some("[N]-".to_string())
            } else {
                // multiplicity identifies the species only if exactly one
                // species dimension matches, the dimension cannot be
                // confused with a singlet branch, and no clusters merged
                let hits: Vec<Species> = dims
                    .iter()
                    .filter_map(|(d, s)| {
                        (*d == Some(c.multiplicity) && c.multiplicity >= 2).then_some(*s)
                    })
                    .collect();
                match (hits.as_slice(), spectrum.accidental_degeneracy) {
                    ([s], false) => Some(s.label().to_string()),
                    _ => None,
                }
            };
            ClusterSummary {
                lambda: c.lambda,
                omega: c.omega(),
                multiplicity: c.multiplicity,
                species,
            }
        })
        .collect()
}

/// Per-entry sweep outcomes, in input order.
pub type SweepResults = Vec<(usize, Result<RunReport, StageError>)>;

/// Independent runs over a list of particle numbers; failures are recorded
/// per entry without aborting the sweep.
pub fn sweep(
    template: &SystemSpec,
    n_list: &[usize],
    opts: &RunOptions,
) -> Result<SweepResults, Error> {
    if n_list.is_empty() {
        return Err(Error::InvalidSpec("empty sweep list".into()));
    }
    let jobs: Vec<usize> = n_list.to_vec();
    let template = template.clone();
    let opts_inner = RunOptions {
        // per-run work is already spread across the sweep; keep runs
        // sequential inside so a sweep parallelizes across entries
        parallelism: Parallelism::Sequential,
        ..opts.clone()
    };
    Ok(map_collect(opts.parallelism, jobs, move |n| {
        let mut spec = template.clone();
        spec.n = n;
        (n, run(&spec, &opts_inner))
    }))
}

/// Frequency table: one row per cluster with columns `N, species, omega,
/// multiplicity`. Floats carry 17 significant digits so the file is an
/// exact record.
pub fn frequency_csv(reports: &[&RunReport]) -> String {
    let mut out = String::from("N,species,omega,multiplicity\n");
    for report in reports {
        for cluster in &report.clusters {
            writeln!(
                out,
                "{},{},{:.16e},{}",
                report.spec.n,
                cluster.species.as_deref().unwrap_or(""),
                cluster.omega,
                cluster.multiplicity
            )
            .unwrap();
        }
    }
    out
}

pub fn to_json(report: &RunReport) -> Result<String, Error> {
    Ok(serde_json::to_string_pretty(report)?)
}

pub fn from_json(text: &str) -> Result<RunReport, Error> {
    Ok(serde_json::from_str(text)?)
}
