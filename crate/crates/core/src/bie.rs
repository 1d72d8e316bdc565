//! Boundary integral equations for the exponents `m_j`, the capacity `τ`,
//! and the right-hand side of the nonlinear boundary system.
//!
//! For each component `j` with auxiliary interior point `α_j`:
//!
//! ```text
//! γ_j(t) = −log|η(t) − α_j|
//! (I − N) μ_j = −M γ_j
//! h_j = [M μ_j − (I − N) γ_j] / 2        (piecewise constant)
//! ```
//!
//! The averaged `h_{k,j}` feed the `(ℓ+1)×(ℓ+1)` system
//! `Σ_j h_{k,j} m_j − log τ = 0`, `Σ_j m_j = 1`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::geometry::{centroid, Discretization};
use crate::gmres::{gmres, GmresConfig};
use crate::kernels::{apply_m, apply_n, assemble_i_minus_n, PiecewiseConstant};
use crate::C64;

#[derive(Clone, Copy, Debug)]
pub struct BieOptions {
    /// GMRES relative residual tolerance.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for BieOptions {
    fn default() -> Self {
        BieOptions {
            tol: 1e-14,
            max_iter: 100,
        }
    }
}

/// Solution `(μ_j, h_j)` of one integral equation.
#[derive(Clone, Debug)]
pub struct ComponentSolution {
    pub mu: Vec<f64>,
    /// Pointwise `h_j` before averaging.
    pub h_pointwise: Vec<f64>,
    /// `(h_{1,j}, …, h_{ℓ,j})`.
    pub h: PiecewiseConstant,
    pub gmres_iters: usize,
    pub gmres_relres: f64,
    /// GMRES missed the tolerance and a dense LU solve was used instead.
    pub fallback: bool,
    /// Largest deviation of the pointwise `h_j` from its component mean.
    pub h_spread: f64,
}

/// Exponents and capacity of the lemniscatic domain.
#[derive(Clone, Debug, PartialEq)]
pub struct CanonicalParameters {
    pub m: Vec<f64>,
    pub log_tau: f64,
    pub tau: f64,
}

/// Boundary data `p_i = log τ + γ(t_i) + i μ(t_i)` for the Newton stage.
#[derive(Clone, Debug)]
pub struct BoundaryRhs {
    pub p: Vec<C64>,
    pub gamma: Vec<f64>,
    pub mu: Vec<f64>,
    pub alpha: Vec<C64>,
}

/// Default auxiliary points: the node centroid of each curve, accepted only
/// if the curve winds around it.
pub fn default_alphas(disc: &Discretization) -> Result<Vec<C64>> {
    (0..disc.ell)
        .map(|j| {
            let c = centroid(disc, j)?;
            match disc.winding(j, c) {
                Ok(-1) => Ok(c),
                _ => Err(Error::Geometry(format!(
                    "centroid {c} of curve {j} is not inside it; supply alphas explicitly"
                ))),
            }
        })
        .collect()
}

/// `γ_j(t_i) = −log|η(t_i) − α_j|` over every node.
pub fn gamma_j(disc: &Discretization, j: usize, alpha: C64) -> Result<Vec<f64>> {
    disc.check_component(j)?;
    let scale = disc.diameter().max(1.0);
    let nearest = disc
        .eta
        .iter()
        .map(|z| (z - alpha).norm())
        .fold(f64::INFINITY, f64::min);
    if nearest <= 1e-14 * scale {
        return Err(Error::Geometry(format!(
            "auxiliary point {alpha} sits on a node of curve {j}"
        )));
    }
    match disc.winding(j, alpha) {
        Ok(-1) => {}
        Ok(w) => {
            return Err(Error::Geometry(format!(
                "auxiliary point {alpha} is not inside curve {j} (winding {w})"
            )))
        }
        Err(_) => {
            return Err(Error::Geometry(format!(
                "auxiliary point {alpha} lies on curve {j}"
            )))
        }
    }
    Ok(disc.eta.iter().map(|z| -(z - alpha).norm().ln()).collect())
}

fn i_minus_n(disc: &Discretization, v: &[f64]) -> Vec<f64> {
    let nv = apply_n(disc, v).expect("length checked by caller");
    v.iter().zip(nv).map(|(a, b)| a - b).collect()
}

/// Solves `(I − N) μ = −M γ` and recovers `h = [Mμ − (I − N)γ]/2`.
pub fn solve_component(
    disc: &Discretization,
    gamma: &[f64],
    opts: &BieOptions,
) -> Result<ComponentSolution> {
    if !(opts.tol > 0.0 && opts.tol <= 1e-6) {
        return Err(Error::InvalidInput(format!(
            "GMRES tolerance must lie in (0, 1e-6], got {}",
            opts.tol
        )));
    }
    if gamma.len() != disc.len() {
        return Err(Error::LengthMismatch {
            expected: disc.len(),
            got: gamma.len(),
        });
    }
    let rhs: Vec<f64> = apply_m(disc, gamma)?.into_iter().map(|v| -v).collect();
    let cfg = GmresConfig {
        tol: opts.tol,
        max_iter: opts.max_iter,
    };
    let out = gmres(|v| i_minus_n(disc, v), &rhs, &cfg);
    let (mu, relres, fallback) = if out.converged {
        (out.x, out.relres, false)
    } else {
        let lu = assemble_i_minus_n(disc).lu();
        let x = lu
            .solve(&DVector::from_column_slice(&rhs))
            .ok_or_else(|| Error::Solver("dense fallback for (I − N) failed: singular".into()))?;
        let mu = x.as_slice().to_vec();
        let res = i_minus_n(disc, &mu);
        let num: f64 = res.iter().zip(&rhs).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let den: f64 = rhs.iter().map(|v| v * v).sum::<f64>().sqrt();
        (mu, num / den, true)
    };

    let m_mu = apply_m(disc, &mu)?;
    let imn_gamma = i_minus_n(disc, gamma);
    let h_pointwise: Vec<f64> = m_mu
        .iter()
        .zip(&imn_gamma)
        .map(|(a, b)| 0.5 * (a - b))
        .collect();
    let h = PiecewiseConstant::from_means(disc, &h_pointwise)?;
    let h_spread = h_pointwise
        .iter()
        .enumerate()
        .map(|(i, v)| (v - h.0[disc.component_of[i]]).abs())
        .fold(0.0, f64::max);
    Ok(ComponentSolution {
        mu,
        h_pointwise,
        h,
        gmres_iters: out.iterations,
        gmres_relres: relres,
        fallback,
        h_spread,
    })
}

/// Matrix `H[(k, j)] = h_{k,j}` from the component solutions.
pub fn h_matrix(components: &[ComponentSolution]) -> DMatrix<f64> {
    let ell = components.len();
    DMatrix::from_fn(ell, ell, |k, j| components[j].h.0[k])
}

/// Solves `[H  −1; 1ᵀ 0] [m; log τ] = [0; 1]` by LU with partial pivoting.
pub fn solve_parameters(h: &DMatrix<f64>) -> Result<CanonicalParameters> {
    let ell = h.nrows();
    if ell == 0 || h.ncols() != ell {
        return Err(Error::InvalidInput(format!(
            "h matrix must be square and non-empty, got {}×{}",
            h.nrows(),
            h.ncols()
        )));
    }
    if h.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("h matrix has non-finite entries".into()));
    }
    let mut a = DMatrix::zeros(ell + 1, ell + 1);
    a.view_mut((0, 0), (ell, ell)).copy_from(h);
    for k in 0..ell {
        a[(k, ell)] = -1.0;
        a[(ell, k)] = 1.0;
    }
    let norm = a.abs().row_sum().max();
    let lu = a.clone().lu();
    let pivot = lu.u().diagonal().abs().min();
    if !(pivot > 1e-14 * norm) {
        return Err(Error::SingularParameterSystem { pivot, norm });
    }
    let mut rhs = DVector::zeros(ell + 1);
    rhs[ell] = 1.0;
    let x = lu
        .solve(&rhs)
        .ok_or(Error::SingularParameterSystem { pivot, norm })?;
    let m: Vec<f64> = x.iter().take(ell).copied().collect();
    let log_tau = x[ell];
    if let Some((j, v)) = m.iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
        return Err(Error::Solver(format!(
            "exponent m_{j} = {v:e} is not positive; the discretization is too coarse"
        )));
    }
    Ok(CanonicalParameters {
        m,
        log_tau,
        tau: log_tau.exp(),
    })
}

/// `γ = Σ m_j γ_j`, `μ = Σ m_j μ_j`, `p = log τ + γ + iμ`.
pub fn assemble_rhs(
    disc: &Discretization,
    alphas: &[C64],
    components: &[ComponentSolution],
    params: &CanonicalParameters,
) -> Result<BoundaryRhs> {
    let ell = disc.ell;
    for (what, len) in [
        ("alphas", alphas.len()),
        ("components", components.len()),
        ("exponents", params.m.len()),
    ] {
        if len != ell {
            return Err(Error::InvalidInput(format!("{what}: expected {ell}, got {len}")));
        }
    }
    let mut gamma = vec![0.0; disc.len()];
    let mut mu = vec![0.0; disc.len()];
    for (j, comp) in components.iter().enumerate() {
        if comp.mu.len() != disc.len() {
            return Err(Error::LengthMismatch {
                expected: disc.len(),
                got: comp.mu.len(),
            });
        }
        let gj = gamma_j(disc, j, alphas[j])?;
        let mj = params.m[j];
        for i in 0..disc.len() {
            gamma[i] += mj * gj[i];
            mu[i] += mj * comp.mu[i];
        }
    }
    let p = gamma
        .iter()
        .zip(&mu)
        .map(|(&g, &u)| C64::new(params.log_tau + g, u))
        .collect();
    Ok(BoundaryRhs {
        p,
        gamma,
        mu,
        alpha: alphas.to_vec(),
    })
}

/// Everything the BIE stage produces.
#[derive(Clone, Debug)]
pub struct BieStage {
    pub alphas: Vec<C64>,
    pub components: Vec<ComponentSolution>,
    pub params: CanonicalParameters,
    pub rhs: BoundaryRhs,
}

/// Runs the `ℓ` component solves, the parameter system and the rhs assembly.
pub fn solve_bie(
    disc: &Discretization,
    alphas: Option<&[C64]>,
    opts: &BieOptions,
) -> Result<BieStage> {
    let alphas = match alphas {
        Some(a) => a.to_vec(),
        None => default_alphas(disc)?,
    };
    if alphas.len() != disc.ell {
        return Err(Error::InvalidInput(format!(
            "expected {} auxiliary points, got {}",
            disc.ell,
            alphas.len()
        )));
    }
    let components = alphas
        .iter()
        .enumerate()
        .map(|(j, &a)| solve_component(disc, &gamma_j(disc, j, a)?, opts))
        .collect::<Result<Vec<_>>>()?;
    let params = solve_parameters(&h_matrix(&components))?;
    let rhs = assemble_rhs(disc, &alphas, &components, &params)?;
    Ok(BieStage {
        alphas,
        components,
        params,
        rhs,
    })
}

/// `max_k |Σ_j m_j h_{k,j} − log τ|`.
pub fn row_consistency(components: &[ComponentSolution], params: &CanonicalParameters) -> f64 {
    (0..components.len())
        .map(|k| {
            let s: f64 = components
                .iter()
                .zip(&params.m)
                .map(|(c, m)| m * c.h.0[k])
                .sum();
            (s - params.log_tau).abs()
        })
        .fold(0.0, f64::max)
}
