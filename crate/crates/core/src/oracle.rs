//! Reference computations that share no code path with the main pipeline.

use std::f64::consts::{PI, TAU};

use nalgebra::{DMatrix, DVector};

use crate::bie::{BoundaryRhs, CanonicalParameters};
use crate::error::{Error, Result};
use crate::geometry::{discretize, BoundaryCurve, Discretization};
use crate::newton::{Diagnostics, GmresStats, LemniscaticDomain, MapSolution, MomentBlock, NewtonProblem};
use crate::C64;

/// Equilibrium measure of the union of the holes.
#[derive(Clone, Debug)]
pub struct CapacityResult {
    pub capacity: f64,
    /// Constant value `log cap` of the equilibrium potential on `Γ`.
    pub robin_constant: f64,
    /// Density with respect to the parameter, one value per node.
    pub density: Vec<f64>,
    /// Mass carried by each component.
    pub masses: Vec<f64>,
}

/// Weights `W_k` with `∫_0^{2π} log|2 sin((s − t)/2)| f(t) dt ≈ Σ_q W_{p−q} f(t_q)`
/// for `s = t_p`, exact for trigonometric polynomials of degree `< n/2`.
pub fn log_sine_weights(n: usize) -> Vec<f64> {
    let nf = n as f64;
    (0..n)
        .map(|k| {
            let d = TAU * k as f64 / nf;
            let mut acc = 0.0;
            for m in 1..n / 2 {
                acc += (m as f64 * d).cos() / m as f64;
            }
            0.5 * (-(2.0 * TAU / nf) * acc - (2.0 * TAU / (nf * nf)) * (nf / 2.0 * d).cos())
        })
        .collect()
}

/// Solves `∫_Γ log|w − ζ| dμ(ζ) = L` on `Γ`, `μ(Γ) = 1`, and returns
/// `cap = e^L`. The logarithmic singularity on each curve is split off as
/// `log|2 sin((s − t)/2)|` and integrated with [`log_sine_weights`].
pub fn capacity_logkernel(disc: &Discretization) -> Result<CapacityResult> {
    if disc.grading.is_some() {
        return Err(Error::Oracle(
            "capacity oracle needs smooth boundaries; this grid is graded".into(),
        ));
    }
    let (n, big_n) = (disc.n, disc.len());
    let h = disc.weight();
    let ws = log_sine_weights(n);
    let mut a = DMatrix::<f64>::zeros(big_n + 1, big_n + 1);
    for p in 0..big_n {
        let jp = disc.component_of[p];
        for q in 0..big_n {
            a[(p, q)] = if disc.component_of[q] != jp {
                h * (disc.eta[p] - disc.eta[q]).norm().ln()
            } else {
                let (ip, iq) = (p % n, q % n);
                let smooth = if ip == iq {
                    disc.eta_dot[p].norm().ln()
                } else {
                    let half = 0.5 * TAU * (ip as f64 - iq as f64) / n as f64;
                    ((disc.eta[p] - disc.eta[q]).norm() / (2.0 * half.sin()).abs()).ln()
                };
                ws[(ip + n - iq) % n] + h * smooth
            };
        }
        a[(p, big_n)] = -1.0;
        a[(big_n, p)] = h;
    }
    let mut rhs = DVector::zeros(big_n + 1);
    rhs[big_n] = 1.0;
    let x = a
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Oracle("equilibrium system is singular".into()))?;
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Oracle("equilibrium system is singular".into()));
    }
    let density: Vec<f64> = x.iter().take(big_n).copied().collect();
    let masses = (0..disc.ell)
        .map(|j| h * density[disc.range(j)].iter().sum::<f64>())
        .collect();
    let robin_constant = x[big_n];
    Ok(CapacityResult {
        capacity: robin_constant.exp(),
        robin_constant,
        density,
        masses,
    })
}

/// Exterior map `ψ(w) = R w + d/w` of the unit disk onto the exterior of the
/// ellipse with semi-axes `a ≥ b` along the axes; `R = (a + b)/2` is the
/// capacity.
pub fn joukowski_ellipse(a: f64, b: f64) -> (f64, impl Fn(C64) -> C64) {
    let r = 0.5 * (a + b);
    let d = 0.5 * (a - b);
    (r, move |w: C64| r * w + d / w)
}

/// Full Jacobian `[D A₁; A₂ E]` assembled entry by entry.
pub fn dense_jacobian(
    problem: &NewtonProblem,
    w: &[C64],
    a: &[C64],
    block: MomentBlock,
) -> Result<DMatrix<C64>> {
    let disc = problem.disc;
    let (big_n, ell) = (disc.len(), disc.ell);
    let size = big_n + ell;
    if size > 200 {
        return Err(Error::Oracle(format!(
            "dense Jacobian limited to 200 unknowns, got {size}"
        )));
    }
    if w.len() != big_n || a.len() != ell {
        return Err(Error::LengthMismatch {
            expected: size,
            got: w.len() + a.len(),
        });
    }
    let m = problem.m;
    let i_n = 1.0 / (disc.n as f64 * C64::new(0.0, 1.0));
    let mut jac = DMatrix::<C64>::zeros(size, size);
    for i in 0..big_n {
        jac[(i, i)] = (0..ell).map(|j| m[j] / (w[i] - a[j])).sum();
        for j in 0..ell {
            jac[(i, big_n + j)] = -m[j] / (w[i] - a[j]);
        }
    }
    for k in 0..ell {
        let mut s = C64::new(0.0, 0.0);
        for q in 0..big_n {
            let entry = i_n * disc.eta_dot[q] / (w[q] - a[k]);
            jac[(big_n + k, q)] = entry;
            s += entry;
        }
        jac[(big_n + k, big_n + k)] = match block {
            MomentBlock::Exact => -1.0 - s,
            MomentBlock::NegativeIdentity => C64::new(-1.0, 0.0),
        };
    }
    Ok(jac)
}

/// Exact solution for the exterior of the disk `|z − c| > r`: `Φ` is the
/// identity, `a = c`, `m = (1)`, `τ = r`. Also returns the matching right
/// side and parameters so the fixture can be fed to the Newton residual.
pub fn reference_identity_problem(
    r: f64,
    c: C64,
    n: usize,
) -> Result<(Discretization, BoundaryRhs, CanonicalParameters)> {
    let disc = discretize(&[BoundaryCurve::circle(c, r)?], n)?;
    let rhs = BoundaryRhs {
        p: vec![C64::new(0.0, 0.0); n],
        gamma: vec![-r.ln(); n],
        mu: vec![0.0; n],
        alpha: vec![c],
    };
    let params = CanonicalParameters {
        m: vec![1.0],
        log_tau: r.ln(),
        tau: r,
    };
    Ok((disc, rhs, params))
}

/// [`reference_identity_problem`] packaged as a solution.
pub fn reference_identity_domain(r: f64, c: C64, n: usize) -> Result<(Discretization, MapSolution)> {
    let (disc, _, params) = reference_identity_problem(r, c, n)?;
    let sol = MapSolution {
        boundary_w: disc.eta.clone(),
        domain: LemniscaticDomain {
            centers: vec![c],
            exponents: params.m,
            capacity: r,
        },
        diagnostics: Diagnostics {
            newton_iterations: 0,
            step_norm_history: Vec::new(),
            cond_history: Vec::new(),
            residual_norm: 0.0,
            lemniscate_residual: 0.0,
            lemniscate_residual_midpoint: 0.0,
            moment_residual: 0.0,
            restarted: false,
            gmres: GmresStats::default(),
        },
    };
    Ok((disc, sol))
}

/// `∫_0^{2π} log|2 sin(t/2)| cos(kt) dt`.
pub fn log_sine_moment(k: usize) -> f64 {
    if k == 0 {
        0.0
    } else {
        -PI / k as f64
    }
}
