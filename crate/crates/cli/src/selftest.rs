//! Built-in validation: the analytic shortcuts against their brute-force
//! oracles, printed one line per suite.

use dptmodes::equilibrium::{find_symmetric_minimum, SolverOptions};
use dptmodes::exec::Parallelism;
use dptmodes::gramian::{det_direct, symmetric_correlation_matrix, SymmetricGramian};
use dptmodes::model::{
    build_system, jacobian_weight_residual, random_configuration, SystemKind, SystemSpec,
};
use dptmodes::nspecies::{sigma_blocks, sigma_blocks_sandwich};
use dptmodes::oracle::diagonalize;
use dptmodes::quadratic::{hessian_invariants, kinetic_invariants, random_invariant, QuadKind};
use dptmodes::rng::SplitMix64;
use dptmodes::symgroup::{
    enumerate_classes, factorial, permutation_action_characters, reducible_characters,
    simple_characters,
};

use crate::CliError;

type SuiteResult = Result<(), String>;
type Suite = fn() -> SuiteResult;

pub fn run_all() -> Result<(), CliError> {
    let suites: [(&str, Suite); 5] = [
        ("gramian closed forms vs direct determinants", gramian_suite),
        ("jacobian weight identity", weight_suite),
        ("sigma blocks vs dense sandwich", sigma_suite),
        ("cluster multiplicity pattern", multiplicity_suite),
        ("character orthogonality and brute force", character_suite),
    ];
    let mut failed = 0;
    for (name, suite) in suites {
        match suite() {
            Ok(()) => println!("ok   {name}"),
            Err(detail) => {
                println!("FAIL {name}: {detail}");
                failed += 1;
            }
        }
    }
    if failed == 0 {
        println!("selftest: all suites passed");
        Ok(())
    } else {
        Err(CliError::Compute(format!("{failed} selftest suite(s) failed")))
    }
}

fn check(cond: bool, detail: String) -> SuiteResult {
    if cond {
        Ok(())
    } else {
        Err(detail)
    }
}

fn gramian_suite() -> SuiteResult {
    let mut rng = SplitMix64::new(0x6772);
    for n in 2..=8usize {
        let (lo, _) = SymmetricGramian::positivity_window(n);
        for _ in 0..20 {
            let gamma = rng.uniform(lo * 0.95, 0.95);
            let sg = SymmetricGramian::new(n, gamma).map_err(|e| e.to_string())?;

            let direct = det_direct(&symmetric_correlation_matrix(n, gamma));
            check(
                (sg.value() - direct).abs() <= 1e-12 * direct.abs().max(1e-30),
                format!("value n={n} gamma={gamma}"),
            )?;

            // first derivative against a step-halved central difference of
            // the direct determinant
            let fd = |h: f64| {
                let mut plus = symmetric_correlation_matrix(n, gamma);
                let mut minus = plus.clone();
                plus[(0, 1)] += h;
                plus[(1, 0)] += h;
                minus[(0, 1)] -= h;
                minus[(1, 0)] -= h;
                (det_direct(&plus) - det_direct(&minus)) / (2.0 * h)
            };
            let oracle = (4.0 * fd(5e-5) - fd(1e-4)) / 3.0;
            check(
                (sg.first_derivatives().full - oracle).abs() < 1e-8,
                format!("first derivative n={n} gamma={gamma}"),
            )?;

            // diagonal second derivative
            let fd2 = |h: f64| {
                let base = det_direct(&symmetric_correlation_matrix(n, gamma));
                let mut plus = symmetric_correlation_matrix(n, gamma);
                let mut minus = plus.clone();
                plus[(0, 1)] += h;
                plus[(1, 0)] += h;
                minus[(0, 1)] -= h;
                minus[(1, 0)] -= h;
                (det_direct(&plus) - 2.0 * base + det_direct(&minus)) / (h * h)
            };
            let oracle = (4.0 * fd2(5e-5) - fd2(1e-4)) / 3.0;
            check(
                (sg.second_derivatives().full_diagonal - oracle).abs() < 1e-6,
                format!("second derivative n={n} gamma={gamma}"),
            )?;
        }
    }
    Ok(())
}

fn weight_suite() -> SuiteResult {
    let mut rng = SplitMix64::new(0x4a58);
    for _ in 0..100 {
        let n = rng.uniform_usize(2, 9);
        let d = n + 2 + rng.uniform_usize(1, 40);
        let cfg = random_configuration(&mut rng, n);
        let residual = jacobian_weight_residual(&cfg, d, n).map_err(|e| e.to_string())?;
        check(
            residual.abs() < 1e-10,
            format!("residual {residual:.3e} at n={n}, d={d}"),
        )?;
    }
    Ok(())
}

fn sigma_suite() -> SuiteResult {
    let mut rng = SplitMix64::new(0x5347);
    for n in 4..=10usize {
        for _ in 0..3 {
            let f = random_invariant(&mut rng, n, QuadKind::Hessian);
            let g = random_invariant(&mut rng, n, QuadKind::Kinetic);
            let (fg_closed, g_closed) = sigma_blocks(&f, &g).map_err(|e| e.to_string())?;
            let (fg_dense, g_dense) = sigma_blocks_sandwich(&f, &g).map_err(|e| e.to_string())?;
            let scale = [fg_closed.rr, fg_closed.rg, fg_closed.gr, fg_closed.gg]
                .iter()
                .fold(1.0_f64, |m, x| m.max(x.abs()));
            check(
                fg_closed.max_deviation(&fg_dense) <= 1e-12 * scale
                    && g_closed.max_deviation(&g_dense) <= 1e-12 * scale,
                format!("sigma mismatch at n={n}"),
            )?;
        }
    }
    Ok(())
}

fn multiplicity_suite() -> SuiteResult {
    for system in [SystemKind::Atom, SystemKind::QuantumDot] {
        for n in [3usize, 4, 5, 6, 8] {
            let spec = SystemSpec::new(system, n, 100);
            let family = build_system(&spec).map_err(|e| e.to_string())?;
            let point =
                find_symmetric_minimum(&family, &SolverOptions::default()).map_err(|e| {
                    format!("equilibrium failed for {system:?} n={n}: {e}")
                })?;
            let f = hessian_invariants(&family, &point, Parallelism::default())
                .map_err(|e| e.to_string())?;
            let g = kinetic_invariants(&point, n).map_err(|e| e.to_string())?;
            let spectrum = diagonalize(&f, &g).map_err(|e| e.to_string())?;
            let mut mults: Vec<usize> =
                spectrum.clusters.iter().map(|c| c.multiplicity).collect();
            mults.sort_unstable();
            let mut expected = vec![1, 1, n - 1, n - 1];
            if n >= 4 {
                expected.push(n * (n - 3) / 2);
            }
            expected.sort_unstable();
            check(
                mults == expected,
                format!("{system:?} n={n}: multiplicities {mults:?}, expected {expected:?}"),
            )?;
        }
    }
    Ok(())
}

fn character_suite() -> SuiteResult {
    for n in 4..=12usize {
        let classes = enumerate_classes(n).map_err(|e| e.to_string())?;
        let order = factorial(n) as i128;
        for x in 0..3 {
            for y in 0..3 {
                let sum: i128 = classes
                    .iter()
                    .map(|c| {
                        let (s0, s1, s2) = simple_characters(n, c);
                        let ch = [s0, s1, s2.unwrap()];
                        c.size() as i128 * ch[x] as i128 * ch[y] as i128
                    })
                    .sum();
                let expected = if x == y { order } else { 0 };
                check(
                    sum == expected,
                    format!("orthogonality n={n} pair ({x},{y}): {sum} != {expected}"),
                )?;
            }
        }
    }
    for n in 3..=6usize {
        for (class, chi_r, chi_g) in
            permutation_action_characters(n).map_err(|e| e.to_string())?
        {
            let (er, eg) = reducible_characters(&class);
            check(
                (chi_r, chi_g) == (er, eg),
                format!("brute-force characters differ at n={n}, class {:?}", class.nu()),
            )?;
        }
    }
    Ok(())
}
