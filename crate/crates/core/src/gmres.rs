//! Full (unrestarted) GMRES for real systems, matrix-free.
//!
//! Arnoldi uses modified Gram-Schmidt with one reorthogonalization pass,
//! and the least-squares problem is updated with Givens rotations. All
//! reductions are sequential so repeated runs give bit-identical iterates.

#[derive(Clone, Copy, Debug)]
pub struct GmresConfig {
    /// Relative residual target `‖b − Ax‖ / ‖b‖`.
    pub tol: f64,
    /// Maximum Krylov dimension.
    pub max_iter: usize,
}

impl Default for GmresConfig {
    fn default() -> Self {
        GmresConfig {
            tol: 1e-14,
            max_iter: 100,
        }
    }
}

#[derive(Clone, Debug)]
pub struct GmresOutcome {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// True relative residual of the returned `x`.
    pub relres: f64,
    /// Relative residual estimate after each iteration.
    pub history: Vec<f64>,
    pub converged: bool,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Solves `A x = b` from `x₀ = 0`, where `apply` computes `A v`.
pub fn gmres<F>(apply: F, b: &[f64], cfg: &GmresConfig) -> GmresOutcome
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let n = b.len();
    let beta = norm(b);
    if beta == 0.0 {
        return GmresOutcome {
            x: vec![0.0; n],
            iterations: 0,
            relres: 0.0,
            history: Vec::new(),
            converged: true,
        };
    }
    let max_k = cfg.max_iter.min(n);
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(max_k + 1);
    basis.push(b.iter().map(|v| v / beta).collect());
    // hess[k] is column k of the Hessenberg matrix, length k + 2
    let mut hess: Vec<Vec<f64>> = Vec::with_capacity(max_k);
    let mut cs: Vec<f64> = Vec::with_capacity(max_k);
    let mut sn: Vec<f64> = Vec::with_capacity(max_k);
    let mut g = vec![beta];
    let mut history = Vec::new();
    let mut converged = false;

    for k in 0..max_k {
        let mut v = apply(&basis[k]);
        let mut h = vec![0.0; k + 2];
        for _pass in 0..2 {
            for (j, q) in basis.iter().enumerate() {
                let c = dot(q, &v);
                h[j] += c;
                for (vi, qi) in v.iter_mut().zip(q) {
                    *vi -= c * qi;
                }
            }
        }
        let h_next = norm(&v);
        h[k + 1] = h_next;

        for j in 0..k {
            let (a, b) = (h[j], h[j + 1]);
            h[j] = cs[j] * a + sn[j] * b;
            h[j + 1] = -sn[j] * a + cs[j] * b;
        }
        let r = h[k].hypot(h[k + 1]);
        let (c, s) = if r == 0.0 { (1.0, 0.0) } else { (h[k] / r, h[k + 1] / r) };
        cs.push(c);
        sn.push(s);
        h[k] = r;
        h[k + 1] = 0.0;
        let gk = g[k];
        g[k] = c * gk;
        g.push(-s * gk);
        hess.push(h);

        let est = g[k + 1].abs() / beta;
        history.push(est);
        if est <= cfg.tol || h_next == 0.0 {
            converged = true;
            break;
        }
        basis.push(v.iter().map(|x| x / h_next).collect());
    }

    let k = hess.len();
    let mut y = vec![0.0; k];
    for i in (0..k).rev() {
        let mut acc = g[i];
        for j in (i + 1)..k {
            acc -= hess[j][i] * y[j];
        }
        y[i] = acc / hess[i][i];
    }
    let mut x = vec![0.0; n];
    for (yj, q) in y.iter().zip(&basis) {
        for (xi, qi) in x.iter_mut().zip(q) {
            *xi += yj * qi;
        }
    }
    let ax = apply(&x);
    let res: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
    GmresOutcome {
        x,
        iterations: k,
        relres: norm(&res) / beta,
        history,
        converged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, DVector};

    fn test_matrix(n: usize) -> DMatrix<f64> {
        DMatrix::from_fn(n, n, |i, j| {
            let base = ((i * 7 + j * 3) % 11) as f64 / 11.0 - 0.5;
            if i == j {
                3.0 + base
            } else {
                0.3 * base / (1.0 + (i as f64 - j as f64).abs())
            }
        })
    }

    #[test]
    fn solves_small_nonsymmetric_system() {
        let a = test_matrix(40);
        let b: Vec<f64> = (0..40).map(|i| (i as f64 * 0.3).cos()).collect();
        let out = gmres(
            |v| (&a * DVector::from_column_slice(v)).as_slice().to_vec(),
            &b,
            &GmresConfig::default(),
        );
        assert!(out.converged);
        assert!(out.relres < 1e-13, "{}", out.relres);
        let direct = a.lu().solve(&DVector::from_column_slice(&b)).unwrap();
        let err = out.x.iter().zip(direct.iter()).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max);
        assert!(err < 1e-12);
    }

    #[test]
    fn zero_rhs_is_trivial() {
        let out = gmres(|v| v.to_vec(), &[0.0; 5], &GmresConfig::default());
        assert_eq!(out.iterations, 0);
        assert!(out.x.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn reports_non_convergence() {
        let a = test_matrix(30);
        let b = vec![1.0; 30];
        let cfg = GmresConfig { tol: 1e-14, max_iter: 3 };
        let out = gmres(|v| (&a * DVector::from_column_slice(v)).as_slice().to_vec(), &b, &cfg);
        assert!(!out.converged);
        assert_eq!(out.iterations, 3);
    }

    #[test]
    fn deterministic() {
        let a = test_matrix(25);
        let b: Vec<f64> = (0..25).map(|i| i as f64).collect();
        let run = || gmres(|v| (&a * DVector::from_column_slice(v)).as_slice().to_vec(), &b, &GmresConfig::default());
        let (x1, x2) = (run(), run());
        assert_eq!(x1.x, x2.x);
        assert_eq!(x1.history, x2.history);
    }
}
