//! Drive the pipeline from library code with a hand-rolled pair potential,
//! then print the mode table and the motion generated by one quantum of the
//! higher symmetric branch.

use dptmodes::equilibrium::{find_symmetric_minimum, SolverOptions};
use dptmodes::exec::Parallelism;
use dptmodes::model::EffectivePotentialFamily;
use dptmodes::nspecies::{motions, sigma_blocks, solve_species};
use dptmodes::oracle::diagonalize;
use dptmodes::quadratic::{hessian_invariants, kinetic_invariants};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let n = 6;
    // harmonic trap with a screened repulsion
    let family = EffectivePotentialFamily::custom(
        n,
        |r| 0.5 * r * r,
        |rij| (-rij).exp() / rij,
    );

    let point = find_symmetric_minimum(&family, &SolverOptions::default())?;
    println!(
        "symmetric minimum: r = {:.8}, gamma = {:.8}, energy = {:.8}",
        point.r_inf, point.gamma_inf, point.e_inf
    );

    let hessian = hessian_invariants(&family, &point, Parallelism::default())?;
    let kinetic = kinetic_invariants(&point, n)?;

    let spectrum = diagonalize(&hessian, &kinetic)?;
    println!("\n{:>12}  {:>12}  {:>4}", "lambda", "omega", "mult");
    for cluster in &spectrum.clusters {
        println!(
            "{:>12.6}  {:>12.6}  {:>4}",
            cluster.lambda,
            cluster.omega(),
            cluster.multiplicity
        );
    }

    let (sigma_fg, sigma_g) = sigma_blocks(&hessian, &kinetic)?;
    let modes = solve_species(&sigma_fg, &sigma_g)?;
    println!(
        "\nsymmetric branches: omega+ = {:.6} (theta {:.4}), omega- = {:.6} (theta {:.4})",
        modes.omega_plus, modes.theta_plus, modes.omega_minus, modes.theta_minus
    );

    let displacement = motions(&modes, n, 1.0, 0.0, 1000, false)?;
    println!(
        "unit plus-branch amplitude moves every radius by {:+.6} and every cosine by {:+.6}",
        displacement.r[0], displacement.gamma[0]
    );
    Ok(())
}
