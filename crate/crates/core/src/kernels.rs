//! The Neumann kernel `N` and the singular kernel `M`, and their Nyström
//! discretizations on the equispaced grid.
//!
//! ```text
//! N(s,t) = (1/π) Im( η̇(t) / (η(t) − η(s)) )
//! M(s,t) = (1/π) Re( η̇(t) / (η(t) − η(s)) )
//! ```
//!
//! On the diagonal `N(t,t) = (1/2π) Im(η̈/η̇)`. Within one component `M` has
//! a cotangent singularity, `M(s,t) = −(1/2π) cot((s−t)/2) + M₁(s,t)`, with
//! `M₁(t,t) = (1/2π) Re(η̈/η̇)`. The cotangent part is the periodic conjugation
//! operator, applied here through its Fourier multiplier.
//!
//! On graded grids the trapezoidal rule cannot resolve the kernels at nodes
//! next to a corner, so there the density is subtracted at the target node:
//! `∫N(s,t)dt = −1` and `∫M(s,t)dt = 0` hold exactly on each closed curve
//! (and the other curves contribute nothing), which leaves integrands that
//! vanish where they were badly behaved.

use std::f64::consts::{PI, TAU};

use nalgebra::DMatrix;
use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::geometry::Discretization;

/// A real function that is constant on each boundary component.
#[derive(Clone, Debug, PartialEq)]
pub struct PiecewiseConstant(pub Vec<f64>);

impl PiecewiseConstant {
    /// Grid function with value `ν_j` on every node of component `j`.
    pub fn expand(&self, n: usize) -> Vec<f64> {
        self.0
            .iter()
            .flat_map(|&v| std::iter::repeat(v).take(n))
            .collect()
    }

    /// Per-component node averages of a grid function.
    pub fn from_means(disc: &Discretization, values: &[f64]) -> Result<Self> {
        check_len(disc, values.len())?;
        Ok(PiecewiseConstant(
            (0..disc.ell)
                .map(|j| values[disc.range(j)].iter().sum::<f64>() / disc.n as f64)
                .collect(),
        ))
    }

    /// Indicator of component `j`.
    pub fn indicator(ell: usize, j: usize) -> Self {
        let mut v = vec![0.0; ell];
        v[j] = 1.0;
        PiecewiseConstant(v)
    }
}

fn check_len(disc: &Discretization, got: usize) -> Result<()> {
    if got != disc.len() {
        return Err(Error::LengthMismatch {
            expected: disc.len(),
            got,
        });
    }
    Ok(())
}

fn check_index(disc: &Discretization, i: usize) -> Result<()> {
    if i >= disc.len() {
        return Err(Error::InvalidInput(format!(
            "node index {i} out of range ({} nodes)",
            disc.len()
        )));
    }
    Ok(())
}

#[inline]
fn n_diag(disc: &Discretization, t: usize) -> f64 {
    (disc.eta_ddot[t] / disc.eta_dot[t]).im / TAU
}

#[inline]
fn m1_diag(disc: &Discretization, t: usize) -> f64 {
    (disc.eta_ddot[t] / disc.eta_dot[t]).re / TAU
}

/// `η̇(t) / (η(t) − η(s))` scaled by `1/π`, split into (Re, Im).
#[inline]
fn cauchy_ratio(disc: &Discretization, s: usize, t: usize) -> (f64, f64) {
    let d = disc.eta[t] - disc.eta[s];
    let num = disc.eta_dot[t] * d.conj();
    let scale = 1.0 / (PI * d.norm_sqr());
    (num.re * scale, num.im * scale)
}

fn coincident(disc: &Discretization, s: usize, t: usize) -> Result<()> {
    if s != t && disc.eta[s] == disc.eta[t] {
        return Err(Error::Geometry(format!("nodes {s} and {t} coincide")));
    }
    Ok(())
}

/// `N(t_s, t_t)`.
pub fn kernel_n(disc: &Discretization, s: usize, t: usize) -> Result<f64> {
    check_index(disc, s)?;
    check_index(disc, t)?;
    coincident(disc, s, t)?;
    if s == t {
        return Ok(n_diag(disc, t));
    }
    Ok(cauchy_ratio(disc, s, t).1)
}

/// `M(t_s, t_t)` for `s ≠ t`.
pub fn kernel_m(disc: &Discretization, s: usize, t: usize) -> Result<f64> {
    check_index(disc, s)?;
    check_index(disc, t)?;
    if s == t {
        return Err(Error::InvalidInput("M is singular on the diagonal; use kernel_m1".into()));
    }
    coincident(disc, s, t)?;
    Ok(cauchy_ratio(disc, s, t).0)
}

/// Continuous part `M₁ = M + (1/2π) cot((s−t)/2)` for nodes on one component.
pub fn kernel_m1(disc: &Discretization, s: usize, t: usize) -> Result<f64> {
    check_index(disc, s)?;
    check_index(disc, t)?;
    if disc.component_of[s] != disc.component_of[t] {
        return Err(Error::InvalidInput("M₁ is only defined within one component".into()));
    }
    if s == t {
        return Ok(m1_diag(disc, t));
    }
    coincident(disc, s, t)?;
    let half = 0.5 * (disc.nodes[s] - disc.nodes[t]);
    Ok(cauchy_ratio(disc, s, t).0 + 1.0 / (TAU * half.tan()))
}

/// Nyström application `(2π/n) Σ_q N(t_i, t_q) μ_q` over all `ℓn` nodes.
pub fn apply_n(disc: &Discretization, mu: &[f64]) -> Result<Vec<f64>> {
    check_len(disc, mu.len())?;
    let w = disc.weight();
    if disc.grading.is_some() {
        return Ok((0..disc.len())
            .into_par_iter()
            .map(|i| {
                let mut acc = 0.0;
                for (q, &m) in mu.iter().enumerate() {
                    if q != i {
                        acc += cauchy_ratio(disc, i, q).1 * (m - mu[i]);
                    }
                }
                w * acc - mu[i]
            })
            .collect());
    }
    Ok((0..disc.len())
        .into_par_iter()
        .map(|i| {
            let mut acc = 0.0;
            for (q, &m) in mu.iter().enumerate() {
                let k = if q == i {
                    n_diag(disc, i)
                } else {
                    cauchy_ratio(disc, i, q).1
                };
                acc += k * m;
            }
            w * acc
        })
        .collect())
}

/// Nyström application of `M`: the cotangent part of each diagonal block is
/// applied as `−H` (periodic conjugation), everything else by the
/// trapezoidal rule.
pub fn apply_m(disc: &Discretization, gamma: &[f64]) -> Result<Vec<f64>> {
    check_len(disc, gamma.len())?;
    let n = disc.n;
    let w = disc.weight();
    // 1/(2π tan(πd/n)) for offset d = p − q (mod n), d ≠ 0
    let cot: Vec<f64> = (0..n)
        .map(|d| {
            if d == 0 {
                0.0
            } else {
                1.0 / (TAU * (PI * d as f64 / n as f64).tan())
            }
        })
        .collect();

    let mut conj = Vec::with_capacity(disc.len());
    for j in 0..disc.ell {
        conj.extend(conjugate_periodic(&gamma[disc.range(j)])?);
    }

    let subtract = disc.grading.is_some();
    Ok((0..disc.len())
        .into_par_iter()
        .map(|i| {
            let comp = disc.component_of[i];
            let p = i - comp * n;
            let mut acc = 0.0;
            for (q, &g) in gamma.iter().enumerate() {
                let g = if subtract { g - gamma[i] } else { g };
                let k = if q == i {
                    m1_diag(disc, i)
                } else if disc.component_of[q] == comp {
                    let d = (p + n - (q - comp * n)) % n;
                    cauchy_ratio(disc, i, q).0 + cot[d]
                } else {
                    cauchy_ratio(disc, i, q).0
                };
                acc += k * g;
            }
            w * acc - conj[i]
        })
        .collect())
}

/// Periodic conjugation `H[e^{ikt}] = −i sgn(k) e^{iks}` on one component's
/// `n` samples, exact for trigonometric polynomials of degree `< n/2`.
pub fn conjugate_periodic(values: &[f64]) -> Result<Vec<f64>> {
    let n = values.len();
    if n < 2 || n % 2 != 0 {
        return Err(Error::InvalidInput(format!(
            "conjugation needs an even number of samples, got {n}"
        )));
    }
    let mut planner = FftPlanner::<f64>::new();
    let forward = planner.plan_fft_forward(n);
    let inverse = planner.plan_fft_inverse(n);
    let mut buf: Vec<Complex<f64>> = values.iter().map(|&v| Complex::new(v, 0.0)).collect();
    forward.process(&mut buf);
    let half = n / 2;
    for (k, c) in buf.iter_mut().enumerate() {
        *c = match k {
            0 => Complex::new(0.0, 0.0),
            k if k < half => Complex::new(c.im, -c.re),
            k if k == half => Complex::new(0.0, 0.0),
            _ => Complex::new(-c.im, c.re),
        };
    }
    inverse.process(&mut buf);
    Ok(buf.iter().map(|c| c.re / n as f64).collect())
}

/// Dense Nyström matrix `B = [(2π/n) N(t_i, t_q)]`, matching [`apply_n`].
/// Test scale only.
pub fn assemble_n(disc: &Discretization) -> DMatrix<f64> {
    let w = disc.weight();
    if disc.grading.is_some() {
        let mut b = DMatrix::from_fn(disc.len(), disc.len(), |i, q| {
            if i == q {
                0.0
            } else {
                w * cauchy_ratio(disc, i, q).1
            }
        });
        for i in 0..disc.len() {
            let row: f64 = b.row(i).sum();
            b[(i, i)] = -1.0 - row;
        }
        return b;
    }
    DMatrix::from_fn(disc.len(), disc.len(), |i, q| {
        if i == q {
            w * n_diag(disc, i)
        } else {
            w * cauchy_ratio(disc, i, q).1
        }
    })
}

/// Dense `I − B`.
pub fn assemble_i_minus_n(disc: &Discretization) -> DMatrix<f64> {
    DMatrix::identity(disc.len(), disc.len()) - assemble_n(disc)
}
