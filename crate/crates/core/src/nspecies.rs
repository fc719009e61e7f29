//! Closed-form frequencies and normal coordinates of the totally symmetric
//! species.
//!
//! Projecting the invariant FG and G matrices onto the symmetric rows of the
//! reduction leaves 2 x 2 blocks: one radial-angular mixing problem whose two
//! eigenvalues are the only nondegenerate roots of the full spectrum. The
//! block elements are short combinations of the tilde coefficients,
//!
//! ```text
//! sigma_G  = diag(a',  g' + 2(N-1) h')
//! sigma_FG = | a + bN                      sqrt(2(N-1)) (e + (N/2) f)          |
//!            | sqrt(2(N-1)) (c + (N/2) d)  g + 2(N-1) h + (N(N-1)/2) iota      |
//! ```
//!
//! and the eigenpair `(lambda, (cos theta, sin theta))` with the
//! normalization `c^T sigma_G c = 1` fixes the two normal coordinates
//!
//! ```text
//! q_pm = c_pm [ cos(theta_pm) S_r + sin(theta_pm) S_gamma ]
//! ```
//!
//! where `S_r` and `S_gamma` are the symmetric sums of the radial and
//! angular displacements.

use crate::error::{Error, Result};
use crate::quadratic::{tilde_coefficients, InvariantQuadratic, QuadKind};
use crate::symgroup::{w_blocks_n_species, Species};
use crate::{coord_count, pair_count};

/// A species-projected 2 x 2 block (radial row/column first).
#[derive(Clone, Copy, Debug)]
pub struct SigmaBlock {
    pub n: usize,
    pub rr: f64,
    pub rg: f64,
    pub gr: f64,
    pub gg: f64,
    pub kind: QuadKind,
    pub species: Species,
}

impl SigmaBlock {
    fn max_abs(&self) -> f64 {
        self.rr
            .abs()
            .max(self.rg.abs())
            .max(self.gr.abs())
            .max(self.gg.abs())
    }

    pub fn max_deviation(&self, other: &SigmaBlock) -> f64 {
        (self.rr - other.rr)
            .abs()
            .max((self.rg - other.rg).abs())
            .max((self.gr - other.gr).abs())
            .max((self.gg - other.gg).abs())
    }
}

/// Closed-form projected blocks `(sigma_FG, sigma_G)` from the tilde
/// coefficients.
pub fn sigma_blocks(
    hessian: &InvariantQuadratic,
    kinetic: &InvariantQuadratic,
) -> Result<(SigmaBlock, SigmaBlock)> {
    let t = tilde_coefficients(hessian, kinetic)?;
    let nf = t.n as f64;
    let root = (2.0 * (nf - 1.0)).sqrt();
    let fg = SigmaBlock {
        n: t.n,
        rr: t.a + t.b * nf,
        rg: root * (t.e + 0.5 * nf * t.f),
        gr: root * (t.c + 0.5 * nf * t.d),
        gg: t.g + 2.0 * (nf - 1.0) * t.h + 0.5 * nf * (nf - 1.0) * t.iota,
        kind: QuadKind::Product,
        species: Species::PartN,
    };
    let g = SigmaBlock {
        n: t.n,
        rr: t.a_prime,
        rg: 0.0,
        gr: 0.0,
        gg: t.g_prime + 2.0 * (nf - 1.0) * t.h_prime,
        kind: QuadKind::Kinetic,
        species: Species::PartN,
    };
    Ok((fg, g))
}

/// Independent route to the same blocks: expand F and G to dense matrices,
/// form the literal product, and sandwich each quadrant between the
/// symmetric reduction rows.
pub fn sigma_blocks_sandwich(
    hessian: &InvariantQuadratic,
    kinetic: &InvariantQuadratic,
) -> Result<(SigmaBlock, SigmaBlock)> {
    if hessian.n() != kinetic.n() {
        return Err(Error::DimensionMismatch(format!(
            "F has N = {}, G has N = {}",
            hessian.n(),
            kinetic.n()
        )));
    }
    let n = hessian.n();
    let m = pair_count(n);
    let (w_r, w_g) = w_blocks_n_species(n)?;
    let sandwich = |q: &nalgebra::DMatrix<f64>, kind: QuadKind| -> SigmaBlock {
        let rr_block = q.view((0, 0), (n, n));
        let rg_block = q.view((0, n), (n, m));
        let gr_block = q.view((n, 0), (m, n));
        let gg_block = q.view((n, n), (m, m));
        SigmaBlock {
            n,
            rr: (&w_r.rows * rr_block * w_r.rows.transpose())[(0, 0)],
            rg: (&w_r.rows * rg_block * w_g.rows.transpose())[(0, 0)],
            gr: (&w_g.rows * gr_block * w_r.rows.transpose())[(0, 0)],
            gg: (&w_g.rows * gg_block * w_g.rows.transpose())[(0, 0)],
            kind,
            species: Species::PartN,
        }
    };
    let product = hessian.expand() * kinetic.expand();
    Ok((
        sandwich(&product, QuadKind::Product),
        sandwich(&kinetic.expand(), QuadKind::Kinetic),
    ))
}

/// The two symmetric-species modes: squared frequencies, mixing angles, and
/// normalization constants.
#[derive(Clone, Copy, Debug, serde::Serialize, serde::Deserialize)]
pub struct NSpeciesModes {
    pub n: usize,
    pub lambda_plus: f64,
    pub lambda_minus: f64,
    pub omega_plus: f64,
    pub omega_minus: f64,
    pub theta_plus: f64,
    pub theta_minus: f64,
    pub c_plus: f64,
    pub c_minus: f64,
    /// `sin(theta_plus - theta_minus)`; must stay away from zero for the
    /// inverse transformation to exist.
    pub s_theta: f64,
}

/// Mixing angle of one eigenvalue of the 2 x 2 block, from whichever row of
/// `(sigma - lambda I)` is better conditioned, folded into `(-pi/2, pi/2]`.
fn mixing_angle(sigma: &SigmaBlock, lambda: f64) -> Result<f64> {
    let row1 = (sigma.rr - lambda, sigma.rg);
    let row2 = (sigma.gr, sigma.gg - lambda);
    let n1 = row1.0.hypot(row1.1);
    let n2 = row2.0.hypot(row2.1);
    let mut theta = if n1 >= n2 {
        (lambda - sigma.rr).atan2(sigma.rg)
    } else {
        sigma.gr.atan2(lambda - sigma.gg)
    };
    // both rows determine tan(theta); when both are well conditioned they
    // must agree
    let scale = sigma.max_abs().max(lambda.abs()).max(1.0);
    if n1 > 1e-9 * scale && n2 > 1e-9 * scale && sigma.rg.abs() > 1e-14 {
        let t1 = (lambda - sigma.rr) / sigma.rg;
        let t2 = sigma.gr / (lambda - sigma.gg);
        if (lambda - sigma.gg).abs() > 1e-14 && (t1 - t2).abs() > 1e-8 * (1.0 + t1.abs()) {
            return Err(Error::DegenerateBranches {
                gap: (t1 - t2).abs(),
            });
        }
    }
    if theta <= -std::f64::consts::FRAC_PI_2 {
        theta += std::f64::consts::PI;
    } else if theta > std::f64::consts::FRAC_PI_2 {
        theta -= std::f64::consts::PI;
    }
    Ok(theta)
}

/// Solve the projected 2 x 2 problem for both branches.
pub fn solve_species(sigma_fg: &SigmaBlock, sigma_g: &SigmaBlock) -> Result<NSpeciesModes> {
    let trace = sigma_fg.rr + sigma_fg.gg;
    let mut disc = (sigma_fg.rr - sigma_fg.gg).powi(2) + 4.0 * sigma_fg.rg * sigma_fg.gr;
    let scale = sigma_fg.max_abs().max(1.0);
    if disc < 0.0 {
        if disc > -1e-12 * scale * scale {
            disc = 0.0;
        } else {
            return Err(Error::UnstableMode { lambda: disc });
        }
    }
    let root = disc.sqrt();
    let lambda_plus = 0.5 * (trace + root);
    let lambda_minus = 0.5 * (trace - root);

    // a block that is a scalar multiple of the identity (the decoupled
    // degenerate case, e.g. noninteracting particles) carries no mixing
    // information: any orthonormal pair diagonalizes it, so take the pure
    // radial and pure angular directions
    let near_scalar = sigma_fg.rg.abs().max(sigma_fg.gr.abs()) <= 1e-6 * scale
        && (sigma_fg.rr - sigma_fg.gg).abs() <= 1e-6 * scale;

    if (lambda_plus - lambda_minus).abs() < 1e-10 * lambda_plus.abs().max(lambda_minus.abs())
        && !near_scalar
    {
        return Err(Error::DegenerateBranches {
            gap: (lambda_plus - lambda_minus).abs(),
        });
    }

    let omega_of = |lambda: f64| -> Result<f64> {
        if lambda < -1e-10 * scale {
            Err(Error::UnstableMode { lambda })
        } else {
            Ok(lambda.max(0.0).sqrt())
        }
    };

    let (theta_plus, theta_minus) = if near_scalar {
        (0.0, std::f64::consts::FRAC_PI_2)
    } else {
        (
            mixing_angle(sigma_fg, lambda_plus)?,
            mixing_angle(sigma_fg, lambda_minus)?,
        )
    };
    let s_theta = (theta_plus - theta_minus).sin();
    if s_theta.abs() < 1e-12 {
        return Err(Error::DegenerateBranches { gap: s_theta.abs() });
    }

    let norm_of = |theta: f64| -> Result<f64> {
        let (c, s) = (theta.cos(), theta.sin());
        let quad = c * c * sigma_g.rr + c * s * (sigma_g.rg + sigma_g.gr) + s * s * sigma_g.gg;
        if quad <= 0.0 {
            return Err(Error::NotPositiveDefinite(
                "projected kinetic block".into(),
            ));
        }
        Ok(1.0 / quad.sqrt())
    };

    Ok(NSpeciesModes {
        n: sigma_fg.n,
        lambda_plus,
        lambda_minus,
        omega_plus: omega_of(lambda_plus)?,
        omega_minus: omega_of(lambda_minus)?,
        theta_plus,
        theta_minus,
        c_plus: norm_of(theta_plus)?,
        c_minus: norm_of(theta_minus)?,
        s_theta,
    })
}

/// Symmetric sums of a displacement vector in the standard coordinate
/// layout: `S_r = (1/sqrt(N)) sum r_i'`, `S_gamma = sqrt(2/(N(N-1))) sum
/// gamma_ij'`.
pub fn symmetric_sums(n: usize, y_prime: &[f64]) -> Result<(f64, f64)> {
    if y_prime.len() != coord_count(n) {
        return Err(Error::DimensionMismatch(format!(
            "displacement has {} entries, expected {}",
            y_prime.len(),
            coord_count(n)
        )));
    }
    let s_r: f64 = y_prime[..n].iter().sum::<f64>() / (n as f64).sqrt();
    let s_g: f64 = y_prime[n..].iter().sum::<f64>()
        * (2.0 / (n as f64 * (n as f64 - 1.0))).sqrt();
    Ok((s_r, s_g))
}

/// The two symmetric normal coordinates carried by a displacement.
pub fn normal_coordinates(
    modes: &NSpeciesModes,
    n: usize,
    y_prime: &[f64],
) -> Result<(f64, f64)> {
    let (s_r, s_g) = symmetric_sums(n, y_prime)?;
    let q_plus = modes.c_plus * (modes.theta_plus.cos() * s_r + modes.theta_plus.sin() * s_g);
    let q_minus = modes.c_minus * (modes.theta_minus.cos() * s_r + modes.theta_minus.sin() * s_g);
    Ok((q_plus, q_minus))
}

/// Full-length coefficient vector of one branch: the vector `b` with
/// `q = b . y'` and `b^T G b = 1`.
pub fn mode_vector(modes: &NSpeciesModes, n: usize, plus_branch: bool) -> Vec<f64> {
    let (c, theta) = if plus_branch {
        (modes.c_plus, modes.theta_plus)
    } else {
        (modes.c_minus, modes.theta_minus)
    };
    let radial = c * theta.cos() / (n as f64).sqrt();
    let angular = c * theta.sin() * (2.0 / (n as f64 * (n as f64 - 1.0))).sqrt();
    let mut b = vec![radial; n];
    b.resize(n + pair_count(n), angular);
    b
}

/// Radial and angular displacement fields generated by given amplitudes of
/// the two symmetric modes.
#[derive(Clone, Debug, PartialEq)]
pub struct Displacement {
    pub r: Vec<f64>,
    pub gamma: Vec<f64>,
}

/// Invert the symmetric block of the mode transformation: the displacement
/// that carries amplitudes `(q_plus, q_minus)` and nothing in any other
/// species.
///
/// With `unscale` off the returned field is the scaled displacement; with it
/// on, the radial part is multiplied by `D^(3/2)` (in units of the harmonic
/// length) and the angular part by `D^(-1/2)`, which restores the
/// dimension-dependent prefactors of the physical motion.
pub fn motions(
    modes: &NSpeciesModes,
    n: usize,
    q_plus: f64,
    q_minus: f64,
    d: usize,
    unscale: bool,
) -> Result<Displacement> {
    if modes.s_theta.abs() < 1e-12 {
        return Err(Error::DegenerateBranches {
            gap: modes.s_theta.abs(),
        });
    }
    let s = modes.s_theta;
    let radial_amp = (-modes.theta_minus.sin() * q_plus / modes.c_plus
        + modes.theta_plus.sin() * q_minus / modes.c_minus)
        / (s * (n as f64).sqrt());
    let angular_amp = (modes.theta_minus.cos() * q_plus / modes.c_plus
        - modes.theta_plus.cos() * q_minus / modes.c_minus)
        / s
        * (2.0 / (n as f64 * (n as f64 - 1.0))).sqrt();
    let (r_scale, g_scale) = if unscale {
        let df = d as f64;
        (df.powf(1.5), 1.0 / df.sqrt())
    } else {
        (1.0, 1.0)
    };
    Ok(Displacement {
        r: vec![radial_amp * r_scale; n],
        gamma: vec![angular_amp * g_scale; pair_count(n)],
    })
}
