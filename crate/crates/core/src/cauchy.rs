//! Interior evaluation of `Φ` by the Cauchy integral of `f = Φ − id`.
//!
//! `f` is analytic in `K` and vanishes at infinity, and `Γ` is oriented with
//! `K` on its left, so
//!
//! ```text
//! f(z) = (1/2πi) ∮_Γ f(η)/(η − z) dη ≈ Q[f](z) = (1/(n i)) Σ_q f_q η̇_q/(η_q − z).
//! ```
//!
//! Near `Γ` the quadrature degrades. Since `(1/2πi)∮ dη/(η − z) = 0` in `K`,
//! the normalized form `Q[f](z) / (1 + Q[1](z))` cancels most of that error.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::Discretization;
use crate::newton::MapSolution;
use crate::C64;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum NearBoundaryPolicy {
    Plain,
    Normalized,
    /// Plain at distance `≥ 5h` from the nodes, normalized closer in.
    #[default]
    Auto,
}

#[derive(Clone, Debug, Default)]
pub struct EvaluationRequest {
    pub points: Vec<C64>,
    pub policy: NearBoundaryPolicy,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, thiserror::Error)]
pub enum PointError {
    #[error("outside-domain")]
    OutsideDomain { component: usize },
    #[error("on-boundary")]
    OnBoundary,
}

/// Distance from `z` to the nearest node.
pub fn node_distance(disc: &Discretization, z: C64) -> f64 {
    disc.eta
        .iter()
        .map(|e| (e - z).norm())
        .fold(f64::INFINITY, f64::min)
}

/// Checks that `z` lies in `K`: not on a curve and outside every hole.
pub fn classify(disc: &Discretization, z: C64) -> std::result::Result<(), PointError> {
    if !z.is_finite() || node_distance(disc, z) <= 1e-12 * disc.diameter().max(1.0) {
        return Err(PointError::OnBoundary);
    }
    for j in 0..disc.ell {
        match disc.winding(j, z) {
            Ok(0) => {}
            Ok(_) => return Err(PointError::OutsideDomain { component: j }),
            Err(_) => return Err(PointError::OnBoundary),
        }
    }
    Ok(())
}

/// `z` is closer to the nodes than the local spacing `h`; values there are
/// not reliable.
pub fn near_boundary(disc: &Discretization, z: C64) -> bool {
    node_distance(disc, z) < disc.max_spacing()
}

/// Quadrature of `(1/2πi)∮ f(η)/(η − z) dη` from node samples of `f`.
pub fn cauchy_eval(disc: &Discretization, f: &[C64], z: C64, normalized: bool) -> C64 {
    let scale = 1.0 / (disc.n as f64 * C64::new(0.0, 1.0));
    let mut num = C64::new(0.0, 0.0);
    let mut den = C64::new(0.0, 0.0);
    for q in 0..disc.len() {
        let k = disc.eta_dot[q] / (disc.eta[q] - z);
        num += f[q] * k;
        den += k;
    }
    if normalized {
        scale * num / (1.0 + scale * den)
    } else {
        scale * num
    }
}

fn use_normalized(disc: &Discretization, z: C64, policy: NearBoundaryPolicy) -> bool {
    match policy {
        NearBoundaryPolicy::Plain => false,
        NearBoundaryPolicy::Normalized => true,
        NearBoundaryPolicy::Auto => node_distance(disc, z) < 5.0 * disc.max_spacing(),
    }
}

/// Evaluates the analytic function with boundary samples `f` at each point,
/// validating that the point lies in `K`.
pub fn eval_analytic(
    disc: &Discretization,
    f: &[C64],
    req: &EvaluationRequest,
) -> Result<Vec<std::result::Result<C64, PointError>>> {
    if f.len() != disc.len() {
        return Err(Error::LengthMismatch {
            expected: disc.len(),
            got: f.len(),
        });
    }
    Ok(req
        .points
        .par_iter()
        .map(|&z| {
            classify(disc, z)?;
            Ok(cauchy_eval(disc, f, z, use_normalized(disc, z, req.policy)))
        })
        .collect())
}

/// `Φ(z)` at each requested point.
pub fn eval_map(
    solution: &MapSolution,
    disc: &Discretization,
    req: &EvaluationRequest,
) -> Result<Vec<std::result::Result<C64, PointError>>> {
    if solution.boundary_w.len() != disc.len() {
        return Err(Error::LengthMismatch {
            expected: disc.len(),
            got: solution.boundary_w.len(),
        });
    }
    let f: Vec<C64> = solution
        .boundary_w
        .iter()
        .zip(&disc.eta)
        .map(|(w, e)| w - e)
        .collect();
    let values = eval_analytic(disc, &f, req)?;
    Ok(values
        .into_iter()
        .zip(&req.points)
        .map(|(v, z)| v.map(|f| z + f))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{discretize, BoundaryCurve};
    use crate::oracle::reference_identity_domain;
    use crate::presets;
    use std::f64::consts::TAU;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn rational(disc: &Discretization, alpha: C64) -> Vec<C64> {
        disc.eta.iter().map(|z| 1.0 / (z - alpha)).collect()
    }

    #[test]
    fn identity_map() {
        let (disc, sol) = reference_identity_domain(2.0, c(0.0, 0.0), 64).unwrap();
        let req = EvaluationRequest { points: vec![c(5.0, 0.0), c(0.0, -3.0)], ..Default::default() };
        let out = eval_map(&sol, &disc, &req).unwrap();
        assert!((out[0].unwrap() - c(5.0, 0.0)).norm() < 1e-12);
        assert!((out[1].unwrap() - c(0.0, -3.0)).norm() < 1e-12);
    }

    #[test]
    fn rejects_points_in_holes() {
        let disc = discretize(&presets::two_disks(0.5).unwrap(), 32).unwrap();
        assert_eq!(classify(&disc, c(-1.1, 0.0)), Err(PointError::OutsideDomain { component: 1 }));
        assert_eq!(classify(&disc, disc.eta[5]), Err(PointError::OnBoundary));
        assert_eq!(classify(&disc, c(0.0, 0.0)), Ok(()));
        let req = EvaluationRequest { points: vec![c(1.0, 0.0), c(0.0, 2.0)], ..Default::default() };
        let out = eval_analytic(&disc, &vec![c(0.0, 0.0); 64], &req).unwrap();
        assert!(out[0].is_err());
        assert!(out[1].is_ok());
    }

    #[test]
    fn reproduces_rational_functions() {
        for (curves, alpha) in [
            (presets::two_disks(0.5).unwrap(), c(1.1, 0.05)),
            (vec![BoundaryCurve::ellipse(c(0.0, 0.0), 2.0, 1.0).unwrap()], c(0.5, 0.2)),
        ] {
            let disc = discretize(&curves, 128).unwrap();
            let f = rational(&disc, alpha);
            let points: Vec<C64> = (0..24)
                .map(|k| {
                    let th = TAU * k as f64 / 24.0;
                    3.2 * C64::new(0.0, th).exp()
                })
                .chain([c(0.0, 0.0), c(0.0, 1.0)])
                .filter(|&z| node_distance(&disc, z) >= 0.5 && classify(&disc, z).is_ok())
                .collect();
            let req = EvaluationRequest { points: points.clone(), policy: NearBoundaryPolicy::Plain };
            for (z, v) in points.iter().zip(eval_analytic(&disc, &f, &req).unwrap()) {
                let exact = 1.0 / (z - alpha);
                assert!((v.unwrap() - exact).norm() <= 1e-10, "{z}");
            }
        }
    }

    #[test]
    fn normalized_helps_near_the_circle() {
        let disc = discretize(&[BoundaryCurve::circle(c(0.0, 0.0), 1.0).unwrap()], 64).unwrap();
        let alpha = c(0.3, 0.2);
        let f = rational(&disc, alpha);
        let ring: Vec<C64> = (0..50).map(|k| 1.02 * C64::new(0.0, TAU * (k as f64 + 0.25) / 50.0).exp()).collect();
        let max_err = |normalized: bool| {
            ring.iter()
                .map(|&z| (cauchy_eval(&disc, &f, z, normalized) - 1.0 / (z - alpha)).norm())
                .fold(0.0, f64::max)
        };
        assert!(max_err(true) <= max_err(false));
        let far = c(4.0, -1.0);
        let diff = (cauchy_eval(&disc, &f, far, true) - cauchy_eval(&disc, &f, far, false)).norm();
        assert!(diff <= 1e-8);
    }

    #[test]
    fn far_field_decays_like_one_over_r() {
        let disc = discretize(&presets::two_disks(0.5).unwrap(), 64).unwrap();
        // Φ − id for two disks behaves like c/z with c ≠ 0; use a stand-in
        // with the same decay.
        let f: Vec<C64> = disc.eta.iter().map(|z| 0.3 / (z - 1.0) + 0.2 / (z + 1.0)).collect();
        let mags: Vec<f64> = [10.0, 20.0, 40.0]
            .iter()
            .map(|&r| cauchy_eval(&disc, &f, C64::new(r, 0.0) * C64::new(0.0, 0.7).exp(), false).norm() * r)
            .collect();
        for w in mags.windows(2) {
            assert!((w[1] / w[0] - 1.0).abs() < 0.2);
        }
    }
}
