//! Newton's method for the boundary values `w_i = Φ(η(t_i))` and centers `a_j`.
//!
//! Unknowns `z = (w_1, …, w_{ℓn}, a_1, …, a_ℓ)`. The residual is
//!
//! ```text
//! F_i  = Σ_j m_j Log((w_i − a_j)/(η_i − α_j)) − p_i                  i < ℓn
//! G_k  = (1/(n i)) Σ_q Log((w_q − a_k)/(η_q − α_k)) η̇_q + α_k − a_k   k < ℓ
//! ```
//!
//! and the Jacobian has the block form `[D A₁; A₂ E]` with `D` diagonal,
//! `A₁` and `A₂` Cauchy-like. Each step eliminates `x` (the `w` part) and
//! solves the `ℓ × ℓ` Schur system `(A₂D⁻¹A₁ − E) y = A₂D⁻¹b − c`.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::bie::{BoundaryRhs, CanonicalParameters};
use crate::error::{Error, Result};
use crate::geometry::{centroid, winding_number, Discretization};
use crate::C64;

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Starting point heuristics.
#[derive(Clone, Debug)]
pub struct StartOptions {
    /// Scale applied to curve centroids to get `a⁰`.
    pub s0: f64,
    /// Radius factor of the starting circles.
    pub delta: f64,
    /// Explicit `a⁰`, replacing the scaled centroids.
    pub centers: Option<Vec<C64>>,
}

impl Default for StartOptions {
    fn default() -> Self {
        StartOptions {
            s0: 1.1,
            delta: 0.1,
            centers: None,
        }
    }
}

/// Lower-right block `E = ∂G/∂a` of the Jacobian.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MomentBlock {
    /// `E = diag(−1 − S_k)`, `S_k = (1/(n i)) Σ_q η̇_q/(w_q − a_k)`.
    #[default]
    Exact,
    /// `E = −I`, dropping the `S_k` term. Only linearly convergent.
    NegativeIdentity,
}

#[derive(Clone, Debug)]
pub struct NewtonOptions {
    /// Stop once `‖z^{k+1} − z^k‖∞ ≤ tol`.
    pub tol: f64,
    pub max_iter: usize,
    pub moment_block: MomentBlock,
    /// Abort when a step exceeds this multiple of the first step.
    pub divergence_factor: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions {
            tol: 1e-12,
            max_iter: 50,
            moment_block: MomentBlock::Exact,
            divergence_factor: 1e6,
        }
    }
}

/// Condition numbers of `D` and of the Schur matrix at one iterate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ConditionEstimate {
    pub d: f64,
    pub schur: f64,
}

#[derive(Clone, Debug)]
pub struct NewtonState {
    pub w: Vec<C64>,
    pub a: Vec<C64>,
    pub k: usize,
    pub step_norm_history: Vec<f64>,
    pub cond_history: Vec<ConditionEstimate>,
}

#[derive(Debug)]
pub struct NewtonFailure {
    pub state: NewtonState,
    pub reason: String,
}

/// `L = { w : Π_j |w − a_j|^{m_j} > τ }`.
#[derive(Clone, Debug, PartialEq)]
pub struct LemniscaticDomain {
    pub centers: Vec<C64>,
    pub exponents: Vec<f64>,
    pub capacity: f64,
}

impl LemniscaticDomain {
    /// `|U(w)| = Π_j |w − a_j|^{m_j}`.
    pub fn modulus(&self, w: C64) -> f64 {
        self.centers
            .iter()
            .zip(&self.exponents)
            .map(|(a, m)| m * (w - a).norm().ln())
            .sum::<f64>()
            .exp()
    }

    pub fn contains(&self, w: C64) -> bool {
        self.modulus(w) > self.capacity
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct GmresStats {
    pub iterations: Vec<usize>,
    pub relres: Vec<f64>,
    pub fallback: Vec<bool>,
    pub h_spread: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Diagnostics {
    pub newton_iterations: usize,
    pub step_norm_history: Vec<f64>,
    pub cond_history: Vec<ConditionEstimate>,
    /// `‖F(z)‖∞` at the returned iterate.
    pub residual_norm: f64,
    /// `max_i |Π_j |w_i − a_j|^{m_j} − τ|` over the nodes.
    pub lemniscate_residual: f64,
    /// Same, with `w` trigonometrically interpolated to the node midpoints.
    pub lemniscate_residual_midpoint: f64,
    /// `max_k |G_k(z)|`.
    pub moment_residual: f64,
    /// A retry with a tighter starting configuration was needed.
    pub restarted: bool,
    pub gmres: GmresStats,
}

#[derive(Clone, Debug)]
pub struct MapSolution {
    pub boundary_w: Vec<C64>,
    pub domain: LemniscaticDomain,
    pub diagnostics: Diagnostics,
}

/// Residual and Jacobian of the boundary system for fixed geometry and data.
pub struct NewtonProblem<'a> {
    pub disc: &'a Discretization,
    pub rhs: &'a BoundaryRhs,
    pub m: &'a [f64],
}

fn check_log(x: C64, what: impl FnOnce() -> String) -> Result<C64> {
    if x == C64::new(0.0, 0.0) || !x.is_finite() {
        return Err(Error::SingularLog(what()));
    }
    Ok(x.ln())
}

impl<'a> NewtonProblem<'a> {
    pub fn new(
        disc: &'a Discretization,
        rhs: &'a BoundaryRhs,
        params: &'a CanonicalParameters,
    ) -> Result<Self> {
        let ell = disc.ell;
        if rhs.p.len() != disc.len() {
            return Err(Error::LengthMismatch {
                expected: disc.len(),
                got: rhs.p.len(),
            });
        }
        if rhs.alpha.len() != ell || params.m.len() != ell {
            return Err(Error::InvalidInput(format!(
                "expected {ell} auxiliary points and exponents"
            )));
        }
        Ok(NewtonProblem {
            disc,
            rhs,
            m: &params.m,
        })
    }

    fn ell(&self) -> usize {
        self.disc.ell
    }

    fn check_sizes(&self, w: &[C64], a: &[C64]) -> Result<()> {
        if w.len() != self.disc.len() {
            return Err(Error::LengthMismatch {
                expected: self.disc.len(),
                got: w.len(),
            });
        }
        if a.len() != self.ell() {
            return Err(Error::LengthMismatch {
                expected: self.ell(),
                got: a.len(),
            });
        }
        Ok(())
    }

    fn log_ratio(&self, w: &[C64], a: &[C64], i: usize, j: usize) -> Result<C64> {
        let den = self.disc.eta[i] - self.rhs.alpha[j];
        if den == C64::new(0.0, 0.0) {
            return Err(Error::SingularLog(format!("node {i} coincides with alpha_{j}")));
        }
        check_log((w[i] - a[j]) / den, || format!("w_{i} coincides with a_{j}"))
    }

    /// `F(z)`, length `ℓn + ℓ`, principal branch in every logarithm.
    pub fn residual(&self, w: &[C64], a: &[C64]) -> Result<Vec<C64>> {
        self.check_sizes(w, a)?;
        let ell = self.ell();
        let big_n = self.disc.len();
        let mut f: Vec<C64> = (0..big_n)
            .into_par_iter()
            .map(|i| {
                let mut acc = C64::new(0.0, 0.0);
                for j in 0..ell {
                    acc += self.m[j] * self.log_ratio(w, a, i, j)?;
                }
                Ok(acc - self.rhs.p[i])
            })
            .collect::<Result<_>>()?;
        let scale = 1.0 / (self.disc.n as f64 * I);
        for k in 0..ell {
            let mut acc = C64::new(0.0, 0.0);
            for q in 0..big_n {
                acc += self.log_ratio(w, a, q, k)? * self.disc.eta_dot[q];
            }
            f.push(scale * acc + self.rhs.alpha[k] - a[k]);
        }
        Ok(f)
    }

    fn inverses(&self, w: &[C64], a: &[C64]) -> Vec<Vec<C64>> {
        w.iter()
            .map(|wi| a.iter().map(|aj| 1.0 / (wi - aj)).collect())
            .collect()
    }

    fn diagonal(&self, inv: &[Vec<C64>]) -> Vec<C64> {
        inv.iter()
            .map(|row| row.iter().zip(self.m).map(|(v, m)| m * v).sum())
            .collect()
    }

    /// `S_k = (1/(n i)) Σ_q η̇_q/(w_q − a_k)`.
    fn moment_sums(&self, inv: &[Vec<C64>]) -> Vec<C64> {
        let scale = 1.0 / (self.disc.n as f64 * I);
        (0..self.ell())
            .map(|k| {
                scale
                    * inv
                        .iter()
                        .zip(&self.disc.eta_dot)
                        .map(|(row, d)| d * row[k])
                        .sum::<C64>()
            })
            .collect()
    }

    fn e_block(&self, inv: &[Vec<C64>], block: MomentBlock) -> Vec<C64> {
        match block {
            MomentBlock::Exact => self
                .moment_sums(inv)
                .into_iter()
                .map(|s| -1.0 - s)
                .collect(),
            MomentBlock::NegativeIdentity => vec![C64::new(-1.0, 0.0); self.ell()],
        }
    }

    /// Structured product `F′(z) v`.
    pub fn jacobian_apply(
        &self,
        w: &[C64],
        a: &[C64],
        v: &[C64],
        block: MomentBlock,
    ) -> Result<Vec<C64>> {
        self.check_sizes(w, a)?;
        let (big_n, ell) = (self.disc.len(), self.ell());
        if v.len() != big_n + ell {
            return Err(Error::LengthMismatch {
                expected: big_n + ell,
                got: v.len(),
            });
        }
        let inv = self.inverses(w, a);
        let d = self.diagonal(&inv);
        let e = self.e_block(&inv, block);
        let (x, y) = v.split_at(big_n);
        let mut out: Vec<C64> = (0..big_n)
            .map(|i| {
                let a1y: C64 = (0..ell).map(|j| -self.m[j] * inv[i][j] * y[j]).sum();
                d[i] * x[i] + a1y
            })
            .collect();
        let scale = 1.0 / (self.disc.n as f64 * I);
        for k in 0..ell {
            let a2x: C64 = (0..big_n)
                .map(|q| self.disc.eta_dot[q] * inv[q][k] * x[q])
                .sum();
            out.push(scale * a2x + e[k] * y[k]);
        }
        Ok(out)
    }

    /// Solves `F′(z) v = f` through the `ℓ × ℓ` Schur complement.
    pub fn solve_linearized(
        &self,
        w: &[C64],
        a: &[C64],
        f: &[C64],
        block: MomentBlock,
    ) -> Result<(Vec<C64>, ConditionEstimate)> {
        self.check_sizes(w, a)?;
        let (big_n, ell, n) = (self.disc.len(), self.ell(), self.disc.n as f64);
        if f.len() != big_n + ell {
            return Err(Error::LengthMismatch {
                expected: big_n + ell,
                got: f.len(),
            });
        }
        let inv = self.inverses(w, a);
        let d = self.diagonal(&inv);
        let d_abs: Vec<f64> = d.iter().map(|v| v.norm()).collect();
        let d_min = d_abs.iter().copied().fold(f64::INFINITY, f64::min);
        let d_max = d_abs.iter().copied().fold(0.0, f64::max);
        if !(d_min > 1e-12) {
            return Err(Error::Newton(format!(
                "diagonal block D is nearly singular (min |d_ii| = {d_min:.3e}); \
                 try a different starting point (s0, delta or explicit centers)"
            )));
        }
        let e = self.e_block(&inv, block);
        let (b, c) = f.split_at(big_n);

        let scale = I / n;
        let mut schur = DMatrix::<C64>::zeros(ell, ell);
        let mut rhs = DVector::<C64>::zeros(ell);
        for r in 0..ell {
            for s in 0..ell {
                let mut acc = C64::new(0.0, 0.0);
                for k in 0..big_n {
                    acc += self.disc.eta_dot[k] * inv[k][r] * inv[k][s] / d[k];
                }
                schur[(r, s)] = scale * self.m[s] * acc;
            }
            schur[(r, r)] -= e[r];
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..big_n {
                acc += self.disc.eta_dot[k] * inv[k][r] * b[k] / d[k];
            }
            rhs[r] = -scale * acc - c[r];
        }

        let sv = schur.clone().singular_values();
        let cond_schur = sv.max() / sv.min();
        let norm = schur.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let lu = schur.lu();
        let pivot = lu.u().diagonal().iter().map(|v| v.norm()).fold(f64::INFINITY, f64::min);
        if !(pivot > 1e-14 * norm) {
            return Err(Error::Newton(format!(
                "Jacobian is singular at this iterate (Schur pivot {pivot:.3e})"
            )));
        }
        let y = lu
            .solve(&rhs)
            .ok_or_else(|| Error::Newton("Schur system is singular".into()))?;
        let mut step: Vec<C64> = (0..big_n)
            .map(|r| {
                let corr: C64 = (0..ell).map(|k| self.m[k] * y[k] * inv[r][k]).sum();
                (b[r] + corr) / d[r]
            })
            .collect();
        step.extend(y.iter());
        Ok((
            step,
            ConditionEstimate {
                d: d_max / d_min,
                schur: cond_schur,
            },
        ))
    }
}

/// Starting iterate: centers `s0 · centroid(Γ_j)` and small clockwise circles.
pub fn initial_guess(disc: &Discretization, start: &StartOptions) -> Result<NewtonState> {
    if !(start.s0 > 1.0) || !start.s0.is_finite() {
        return Err(Error::InvalidInput(format!("s0 must exceed 1, got {}", start.s0)));
    }
    if !(start.delta > 0.0 && start.delta <= 0.5) {
        return Err(Error::InvalidInput(format!(
            "delta must lie in (0, 0.5], got {}",
            start.delta
        )));
    }
    let ell = disc.ell;
    let a: Vec<C64> = match &start.centers {
        Some(c) if c.len() != ell => {
            return Err(Error::InvalidInput(format!(
                "expected {ell} starting centers, got {}",
                c.len()
            )))
        }
        Some(c) => c.clone(),
        None => (0..ell)
            .map(|j| centroid(disc, j).map(|c| start.s0 * c))
            .collect::<Result<_>>()?,
    };
    let diam = disc.diameter();
    let min_sep = min_pairwise(&a);
    if ell > 1 && !(min_sep > 1e-10 * diam) {
        return Err(Error::InvalidInput(
            "starting centers coincide; give explicit start centers in the problem spec".into(),
        ));
    }
    let mut w = Vec::with_capacity(disc.len());
    for j in 0..ell {
        let rho = if ell == 1 {
            start.delta * diam
        } else {
            start.delta
                * (0..ell)
                    .filter(|&k| k != j)
                    .map(|k| (a[j] - a[k]).norm())
                    .fold(f64::INFINITY, f64::min)
        };
        for i in disc.range(j) {
            w.push(a[j] + rho * C64::new(0.0, -disc.nodes[i]).exp());
        }
    }
    Ok(NewtonState {
        w,
        a,
        k: 0,
        step_norm_history: Vec::new(),
        cond_history: Vec::new(),
    })
}

fn min_pairwise(a: &[C64]) -> f64 {
    let mut best = f64::INFINITY;
    for j in 0..a.len() {
        for k in j + 1..a.len() {
            best = best.min((a[j] - a[k]).norm());
        }
    }
    best
}

/// Plain Newton iteration from `state`.
pub fn iterate(
    problem: &NewtonProblem,
    mut state: NewtonState,
    opts: &NewtonOptions,
) -> std::result::Result<NewtonState, Box<NewtonFailure>> {
    let fail = |state: NewtonState, reason: String| Box::new(NewtonFailure { state, reason });
    let diam = problem.disc.diameter();
    let big_n = problem.disc.len();
    let mut first_step = None;
    while state.k < opts.max_iter {
        let step = problem
            .residual(&state.w, &state.a)
            .and_then(|f| problem.solve_linearized(&state.w, &state.a, &f, opts.moment_block));
        let (step, cond) = match step {
            Ok(v) => v,
            Err(e) => return Err(fail(state, e.to_string())),
        };
        let norm = step.iter().map(|v| v.norm()).fold(0.0, f64::max);
        if !norm.is_finite() {
            return Err(fail(state, "non-finite Newton step".into()));
        }
        let first = *first_step.get_or_insert(norm);
        for (zi, vi) in state.w.iter_mut().chain(state.a.iter_mut()).zip(&step) {
            *zi -= vi;
        }
        debug_assert_eq!(step.len(), big_n + state.a.len());
        state.k += 1;
        state.step_norm_history.push(norm);
        state.cond_history.push(cond);
        if problem.disc.ell > 1 && !(min_pairwise(&state.a) > 1e-10 * diam) {
            return Err(fail(state, "centers collapsed onto each other".into()));
        }
        if norm <= opts.tol {
            return Ok(state);
        }
        if norm > opts.divergence_factor * first {
            return Err(fail(
                state,
                format!("diverging: step {norm:.3e} vs first step {first:.3e}"),
            ));
        }
    }
    Err(fail(state, "iteration limit reached".into()))
}

/// Values of a periodic sample block at the half-node shifts `t_i + π/n`.
pub fn midpoint_values(block: &[C64]) -> Vec<C64> {
    let n = block.len();
    let mut planner = FftPlanner::<f64>::new();
    let mut buf = block.to_vec();
    planner.plan_fft_forward(n).process(&mut buf);
    let h = std::f64::consts::PI / n as f64;
    for (k, c) in buf.iter_mut().enumerate() {
        let freq = if k < n / 2 {
            k as f64
        } else if k == n / 2 && n % 2 == 0 {
            // split Nyquist term: e^{±i(n/2)h} average to cos(π/2) = 0
            *c *= (n as f64 / 2.0 * h).cos();
            continue;
        } else {
            k as f64 - n as f64
        };
        *c *= C64::new(0.0, freq * h).exp();
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    buf.into_iter().map(|v| v / n as f64).collect()
}

fn lemniscate_error(domain: &LemniscaticDomain, w: &[C64]) -> f64 {
    w.iter()
        .map(|&wi| (domain.modulus(wi) - domain.capacity).abs())
        .fold(0.0, f64::max)
}

/// Checks the computed boundary values: component `j` winds `−1` around `a_j`
/// and `0` around the other centers, and each `Log((w − a_k)/(η − α_k))`
/// varies continuously along every component.
pub fn branch_consistent(problem: &NewtonProblem, w: &[C64], a: &[C64]) -> Result<bool> {
    let disc = problem.disc;
    for j in 0..disc.ell {
        let block = &w[disc.range(j)];
        for (k, &ak) in a.iter().enumerate() {
            let expected = if k == j { -1 } else { 0 };
            match winding_number(block, ak) {
                Ok(wn) if wn == expected => {}
                _ => return Ok(false),
            }
            let logs: Vec<C64> = disc
                .range(j)
                .map(|i| problem.log_ratio(w, a, i, k))
                .collect::<Result<_>>()?;
            for i in 0..logs.len() {
                let next = logs[(i + 1) % logs.len()];
                if (next.im - logs[i].im).abs() > std::f64::consts::PI {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// Packages an iterate with its residuals. Also used for failed runs, where
/// a residual that cannot be evaluated is reported as NaN.
pub fn summarize(
    problem: &NewtonProblem,
    state: NewtonState,
    params: &CanonicalParameters,
    restarted: bool,
) -> MapSolution {
    let disc = problem.disc;
    let (residual_norm, moment_residual) = match problem.residual(&state.w, &state.a) {
        Ok(f) => (
            f.iter().map(|v| v.norm()).fold(0.0, f64::max),
            f[disc.len()..].iter().map(|v| v.norm()).fold(0.0, f64::max),
        ),
        Err(_) => (f64::NAN, f64::NAN),
    };
    let domain = LemniscaticDomain {
        centers: state.a.clone(),
        exponents: params.m.clone(),
        capacity: params.tau,
    };
    let mid: Vec<C64> = (0..disc.ell)
        .flat_map(|j| midpoint_values(&state.w[disc.range(j)]))
        .collect();
    MapSolution {
        diagnostics: Diagnostics {
            newton_iterations: state.k,
            residual_norm,
            lemniscate_residual: lemniscate_error(&domain, &state.w),
            lemniscate_residual_midpoint: lemniscate_error(&domain, &mid),
            moment_residual,
            restarted,
            gmres: GmresStats::default(),
            step_norm_history: state.step_norm_history,
            cond_history: state.cond_history,
        },
        boundary_w: state.w,
        domain,
    }
}

/// Runs Newton from the heuristic start. A converged iterate whose boundary
/// values wind wrongly or whose logarithms jump is discarded and the run is
/// repeated once from tighter starting circles.
pub fn newton_solve(
    disc: &Discretization,
    rhs: &BoundaryRhs,
    params: &CanonicalParameters,
    start: &StartOptions,
    opts: &NewtonOptions,
) -> Result<MapSolution> {
    if !(opts.tol > 0.0) || opts.max_iter == 0 {
        return Err(Error::InvalidInput(
            "Newton tolerance must be positive and max_iter nonzero".into(),
        ));
    }
    let problem = NewtonProblem::new(disc, rhs, params)?;
    let state = iterate(&problem, initial_guess(disc, start)?, opts)
        .map_err(Error::NewtonNotConverged)?;
    if branch_consistent(&problem, &state.w, &state.a)? {
        return Ok(summarize(&problem, state, params, false));
    }
    let retry = StartOptions {
        s0: 1.0 + 2.0 * (start.s0 - 1.0),
        delta: start.delta / 2.0,
        centers: start.centers.clone(),
    };
    let state = iterate(&problem, initial_guess(disc, &retry)?, opts)
        .map_err(Error::NewtonNotConverged)?;
    if branch_consistent(&problem, &state.w, &state.a)? {
        return Ok(summarize(&problem, state, params, true));
    }
    Err(Error::NewtonNotConverged(Box::new(NewtonFailure {
        state,
        reason: "converged to a branch-inconsistent solution twice".into(),
    })))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bie::{solve_bie, BieOptions};
    use crate::geometry::{discretize, BoundaryCurve};
    use crate::presets;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn identity_problem(r: f64, center: C64, n: usize) -> (Discretization, BoundaryRhs, CanonicalParameters) {
        let disc = discretize(&[BoundaryCurve::circle(center, r).unwrap()], n).unwrap();
        let rhs = BoundaryRhs {
            p: vec![C64::new(0.0, 0.0); n],
            gamma: vec![-r.ln(); n],
            mu: vec![0.0; n],
            alpha: vec![center],
        };
        let params = CanonicalParameters { m: vec![1.0], log_tau: r.ln(), tau: r };
        (disc, rhs, params)
    }

    #[test]
    fn initial_guess_examples() {
        let disc = discretize(&[BoundaryCurve::circle(c(3.0, 0.0), 1.0).unwrap()], 16).unwrap();
        let st = initial_guess(&disc, &StartOptions::default()).unwrap();
        assert!((st.a[0] - c(3.3, 0.0)).norm() < 1e-14);

        let disc = discretize(&presets::two_disks(0.5).unwrap(), 4).unwrap();
        let st = initial_guess(&disc, &StartOptions::default()).unwrap();
        assert!((st.a[0] - c(1.1, 0.0)).norm() < 1e-14);
        assert!((st.a[1] - c(-1.1, 0.0)).norm() < 1e-14);
        assert!((st.w[0] - c(1.32, 0.0)).norm() < 1e-14);
        assert!(((st.w[1] - st.a[0]).norm() - 0.22).abs() < 1e-14);
        // clockwise start circle
        assert!((st.w[1] - c(1.1, -0.22)).norm() < 1e-14);
    }

    #[test]
    fn initial_guess_rejections() {
        let disc = discretize(&presets::two_disks(0.5).unwrap(), 8).unwrap();
        let bad = |s0, delta| StartOptions { s0, delta, centers: None };
        assert!(initial_guess(&disc, &bad(1.0, 0.1)).is_err());
        assert!(initial_guess(&disc, &bad(1.1, 0.0)).is_err());
        assert!(initial_guess(&disc, &bad(1.1, 0.6)).is_err());
        let same = StartOptions { centers: Some(vec![c(0.0, 0.0); 2]), ..StartOptions::default() };
        assert!(initial_guess(&disc, &same).is_err());
    }

    #[test]
    fn identity_state_has_zero_residual_and_step() {
        let (disc, rhs, params) = identity_problem(2.0, c(1.0, -0.5), 32);
        let problem = NewtonProblem::new(&disc, &rhs, &params).unwrap();
        let f = problem.residual(&disc.eta, &[c(1.0, -0.5)]).unwrap();
        assert!(f.iter().all(|v| v.norm() < 1e-14), "{:?}", f.last());
        let (step, _) = problem
            .solve_linearized(&disc.eta, &[c(1.0, -0.5)], &vec![C64::new(0.0, 0.0); 33], MomentBlock::Exact)
            .unwrap();
        assert!(step.iter().all(|v| *v == C64::new(0.0, 0.0)));
    }

    #[test]
    fn singular_log_is_reported() {
        let (disc, rhs, params) = identity_problem(1.0, c(0.0, 0.0), 8);
        let problem = NewtonProblem::new(&disc, &rhs, &params).unwrap();
        let mut w = disc.eta.clone();
        w[2] = c(0.0, 0.0);
        assert!(matches!(problem.residual(&w, &[c(0.0, 0.0)]), Err(Error::SingularLog(_))));
    }

    #[test]
    fn circle_converges_to_identity() {
        let (disc, rhs, params) = identity_problem(2.0, c(0.0, 0.0), 64);
        let sol = newton_solve(&disc, &rhs, &params, &StartOptions::default(), &NewtonOptions::default()).unwrap();
        assert!(sol.domain.centers[0].norm() < 1e-10);
        let err = sol.boundary_w.iter().zip(&disc.eta).map(|(w, e)| (w - e).norm()).fold(0.0, f64::max);
        assert!(err < 1e-10, "{err:e}");
    }

    fn random_state(disc: &Discretization, rng: &mut ChaCha8Rng) -> (Vec<C64>, Vec<C64>) {
        let start = initial_guess(disc, &StartOptions::default()).unwrap();
        let mut jitter = |z: C64, s: f64| z + c(rng.random_range(-s..s), rng.random_range(-s..s));
        let w = start.w.iter().map(|&z| jitter(z, 0.05)).collect();
        let a = start.a.iter().map(|&z| jitter(z, 0.05)).collect();
        (w, a)
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let disc = discretize(&presets::two_disks(0.6).unwrap(), 16).unwrap();
        let stage = solve_bie(&disc, None, &BieOptions::default()).unwrap();
        let problem = NewtonProblem::new(&disc, &stage.rhs, &stage.params).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let (w, a) = random_state(&disc, &mut rng);
        let f0 = problem.residual(&w, &a).unwrap();
        let eps = 1e-7;
        for _ in 0..20 {
            let v: Vec<C64> = (0..34).map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
            let w1: Vec<C64> = w.iter().zip(&v).map(|(x, d)| x + eps * d).collect();
            let a1: Vec<C64> = a.iter().zip(&v[32..]).map(|(x, d)| x + eps * d).collect();
            let f1 = problem.residual(&w1, &a1).unwrap();
            let jv = problem.jacobian_apply(&w, &a, &v, MomentBlock::Exact).unwrap();
            let num: f64 = f1.iter().zip(&f0).zip(&jv).map(|((p, q), j)| ((p - q) / eps - j).norm()).fold(0.0, f64::max);
            let den = jv.iter().map(|x| x.norm()).fold(0.0, f64::max);
            assert!(num / den <= 1e-5, "{}", num / den);
        }
    }

    #[test]
    fn schur_step_inverts_structured_jacobian() {
        let disc = discretize(&presets::seven_curves().unwrap()[..3], 16).unwrap();
        let stage = solve_bie(&disc, None, &BieOptions::default()).unwrap();
        let problem = NewtonProblem::new(&disc, &stage.rhs, &stage.params).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let (w, a) = random_state(&disc, &mut rng);
        for block in [MomentBlock::Exact, MomentBlock::NegativeIdentity] {
            let f = problem.residual(&w, &a).unwrap();
            let (step, cond) = problem.solve_linearized(&w, &a, &f, block).unwrap();
            assert!(cond.d >= 1.0 && cond.schur >= 1.0);
            let back = problem.jacobian_apply(&w, &a, &step, block).unwrap();
            let err = back.iter().zip(&f).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
            let scale = f.iter().map(|x| x.norm()).fold(0.0, f64::max);
            assert!(err <= 1e-10 * scale, "{err:e}");
        }
    }

    #[test]
    fn two_disks_converge_quadratically() {
        let disc = discretize(&presets::two_disks(0.5).unwrap(), 64).unwrap();
        let stage = solve_bie(&disc, None, &BieOptions::default()).unwrap();
        let sol = newton_solve(&disc, &stage.rhs, &stage.params, &StartOptions::default(), &NewtonOptions::default()).unwrap();
        let hist = &sol.diagnostics.step_norm_history;
        assert!(hist.len() <= 30);
        assert!(*hist.last().unwrap() <= 1e-11);
        assert!(sol.diagnostics.moment_residual <= 1e-8);
        assert!(sol.diagnostics.lemniscate_residual <= 1e-10);
        assert!((sol.domain.centers[0] + sol.domain.centers[1]).norm() <= 1e-10);
    }

    #[test]
    fn negative_identity_block_is_slower() {
        let disc = discretize(&presets::two_disks(0.5).unwrap(), 32).unwrap();
        let stage = solve_bie(&disc, None, &BieOptions::default()).unwrap();
        let exact = newton_solve(&disc, &stage.rhs, &stage.params, &StartOptions::default(), &NewtonOptions::default()).unwrap();
        let identity_block = NewtonOptions { moment_block: MomentBlock::NegativeIdentity, max_iter: 200, ..NewtonOptions::default() };
        let slow = newton_solve(&disc, &stage.rhs, &stage.params, &StartOptions::default(), &identity_block).unwrap();
        assert!(slow.diagnostics.newton_iterations > exact.diagnostics.newton_iterations);
        for (x, y) in slow.boundary_w.iter().zip(&exact.boundary_w) {
            assert!((x - y).norm() < 1e-10);
        }
    }

    #[test]
    fn midpoint_shift_is_exact_for_trig_polynomials() {
        let n = 16;
        let h = std::f64::consts::TAU / n as f64;
        let f = |t: f64| c(0.5, 0.0) + 2.0 * C64::new(0.0, -t).exp() + c(0.0, 0.3) * C64::new(0.0, 3.0 * t).exp();
        let samples: Vec<C64> = (0..n).map(|i| f(i as f64 * h)).collect();
        let mid = midpoint_values(&samples);
        for (i, v) in mid.iter().enumerate() {
            assert!((v - f((i as f64 + 0.5) * h)).norm() < 1e-14);
        }
    }

    #[test]
    fn lemniscatic_domain_membership() {
        let dom = LemniscaticDomain { centers: vec![c(1.0, 0.0), c(-1.0, 0.0)], exponents: vec![0.5, 0.5], capacity: 1.0 };
        assert!((dom.modulus(c(0.0, 0.0)) - 1.0).abs() < 1e-15);
        assert!(dom.contains(c(5.0, 0.0)));
        assert!(!dom.contains(c(1.1, 0.0)));
    }
}
