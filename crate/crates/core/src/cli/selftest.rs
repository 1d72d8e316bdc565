//! Quick invariant checks over every stage at a small node count. The report
//! contains no timings, so two runs print the same bytes.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bie::{solve_bie, BieOptions};
use crate::cauchy::cauchy_eval;
use crate::geometry::{discretize, total_turning, winding_number, BoundaryCurve, Discretization};
use crate::kernels::{apply_m, apply_n, conjugate_periodic, PiecewiseConstant};
use crate::newton::{MomentBlock, NewtonProblem};
use crate::oracle::{capacity_logkernel, dense_jacobian};
use crate::presets;
use crate::solver::{solve, SolveOptions};
use crate::C64;

type Check = fn(usize) -> Result<(), String>;

#[derive(Clone, Debug)]
pub struct Report {
    pub lines: Vec<String>,
    pub passed: usize,
    pub failed: usize,
}

impl Report {
    pub fn ok(&self) -> bool {
        self.failed == 0
    }

    pub fn text(&self) -> String {
        let mut s = self.lines.join("\n");
        s.push_str(&format!("\n{} passed, {} failed\n", self.passed, self.failed));
        s
    }
}

const CHECKS: &[(&str, Check)] = &[
    ("precondition", precondition),
    ("geometry.circle-evaluation", circle_evaluation),
    ("geometry.turning-number", turning_number),
    ("geometry.winding", winding),
    ("kernels.n-constants", n_constants),
    ("kernels.m-constants", m_constants),
    ("kernels.analytic-identity", analytic_identity),
    ("kernels.conjugation", conjugation),
    ("bie.identity-circle", identity_circle),
    ("bie.two-disk-symmetry", two_disk_symmetry),
    ("newton.schur-vs-dense", schur_vs_dense),
    ("newton.finite-differences", finite_differences),
    ("cauchy.rational-function", rational_function),
    ("oracle.circle-capacity", circle_capacity),
    ("oracle.ellipse-capacity", ellipse_capacity),
    ("pipeline.two-disks", pipeline_two_disks),
];

/// Runs every check at `n` nodes per curve (`n ≥ 32` recommended).
pub fn run_selftest(n: usize) -> Report {
    let mut report = Report {
        lines: Vec::new(),
        passed: 0,
        failed: 0,
    };
    for (name, check) in CHECKS {
        match check(n) {
            Ok(()) => {
                report.passed += 1;
                report.lines.push(format!("PASS {name}"));
            }
            Err(msg) => {
                report.failed += 1;
                report.lines.push(format!("FAIL {name}: {msg}"));
            }
        }
    }
    report
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn bound(what: &str, err: f64, tol: f64) -> Result<(), String> {
    if err <= tol {
        Ok(())
    } else {
        Err(format!("{what} = {err:.3e} exceeds {tol:.0e}"))
    }
}

fn disc_of(curves: &[BoundaryCurve], n: usize) -> Result<Discretization, String> {
    discretize(curves, n).map_err(|e| format!("precondition: {e}"))
}

fn max_abs<'a>(v: impl IntoIterator<Item = &'a f64>) -> f64 {
    v.into_iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn precondition(n: usize) -> Result<(), String> {
    if n < 4 || n % 2 != 0 {
        return Err(format!("n must be even and at least 4, got {n}"));
    }
    Ok(())
}

fn circle_evaluation(_: usize) -> Result<(), String> {
    let circle = BoundaryCurve::circle(c(0.0, 0.0), 2.0).map_err(|e| e.to_string())?;
    let err = (circle.eval(0.0).z - c(2.0, 0.0)).norm() + (circle.eval(TAU / 4.0).z - c(0.0, -2.0)).norm();
    bound("|η − exact|", err, 1e-15)
}

fn turning_number(n: usize) -> Result<(), String> {
    let disc = disc_of(&[BoundaryCurve::ellipse(c(0.5, 0.0), 2.0, 1.0).map_err(|e| e.to_string())?], n)?;
    bound("|turning + 1|", (total_turning(&disc, 0) + 1.0).abs(), 1e-8)
}

fn winding(n: usize) -> Result<(), String> {
    let disc = disc_of(&presets::two_disks(0.5).map_err(|e| e.to_string())?, n)?;
    let inside = winding_number(disc.component(0), c(1.0, 0.0)).map_err(|e| e.to_string())?;
    let outside = winding_number(disc.component(0), c(-1.0, 0.0)).map_err(|e| e.to_string())?;
    if (inside, outside) != (-1, 0) {
        return Err(format!("winding numbers ({inside}, {outside}), expected (-1, 0)"));
    }
    Ok(())
}

fn two_disks(n: usize) -> Result<Discretization, String> {
    disc_of(&presets::two_disks(0.5).map_err(|e| e.to_string())?, n)
}

fn n_constants(n: usize) -> Result<(), String> {
    let disc = two_disks(n)?;
    let mut worst: f64 = 0.0;
    for j in 0..disc.ell {
        let e = PiecewiseConstant::indicator(disc.ell, j).expand(disc.n);
        let out = apply_n(&disc, &e).map_err(|e| e.to_string())?;
        worst = worst.max(max_abs(&out.iter().zip(&e).map(|(o, e)| o + e).collect::<Vec<_>>()));
    }
    bound("‖N e_j + e_j‖∞", worst, 1e-8)
}

fn m_constants(n: usize) -> Result<(), String> {
    let disc = two_disks(n)?;
    let nu = PiecewiseConstant(vec![1.0, -2.5]).expand(disc.n);
    let out = apply_m(&disc, &nu).map_err(|e| e.to_string())?;
    bound("‖M ν‖∞", max_abs(&out), 1e-8)
}

fn analytic_identity(n: usize) -> Result<(), String> {
    // f = 1/(z − α), α inside curve 0: Im f − N Im f + M Re f = 0
    let disc = two_disks(n)?;
    let alpha = c(1.1, 0.05);
    let (re, im): (Vec<f64>, Vec<f64>) = disc.eta.iter().map(|z| 1.0 / (z - alpha)).map(|f| (f.re, f.im)).unzip();
    let nb = apply_n(&disc, &im).map_err(|e| e.to_string())?;
    let ma = apply_m(&disc, &re).map_err(|e| e.to_string())?;
    let res: Vec<f64> = (0..disc.len()).map(|i| im[i] - nb[i] + ma[i]).collect();
    bound("‖(I − N)B + MA‖∞", max_abs(&res), 1e-10)
}

fn conjugation(n: usize) -> Result<(), String> {
    precondition(n)?;
    let t: Vec<f64> = (0..n).map(|p| TAU * p as f64 / n as f64).collect();
    let k = (n / 2 - 1).min(3) as f64;
    let cos: Vec<f64> = t.iter().map(|t| (k * t).cos()).collect();
    let out = conjugate_periodic(&cos).map_err(|e| e.to_string())?;
    let err: Vec<f64> = t.iter().zip(&out).map(|(t, o)| o - (k * t).sin()).collect();
    bound("‖H cos − sin‖∞", max_abs(&err), 1e-13)
}

fn identity_circle(n: usize) -> Result<(), String> {
    let disc = disc_of(&[BoundaryCurve::circle(c(0.3, -0.2), 2.0).map_err(|e| e.to_string())?], n)?;
    let stage = solve_bie(&disc, None, &BieOptions::default()).map_err(|e| e.to_string())?;
    bound("|m − 1| + |τ − 2|", (stage.params.m[0] - 1.0).abs() + (stage.params.tau - 2.0).abs(), 1e-12)
}

fn two_disk_symmetry(n: usize) -> Result<(), String> {
    let disc = two_disks(n)?;
    let stage = solve_bie(&disc, None, &BieOptions::default()).map_err(|e| e.to_string())?;
    let m = &stage.params.m;
    bound("|m − (1/2, 1/2)|", (m[0] - 0.5).abs().max((m[1] - 0.5).abs()), 1e-10)
}

/// Two disks, a random state near the solution shape, small enough for the
/// dense Jacobian.
fn random_state(
    disc: &Discretization,
    rng: &mut ChaCha8Rng,
) -> (Vec<C64>, Vec<C64>) {
    let a = vec![c(1.05, 0.02), c(-0.97, -0.03)];
    let w = (0..disc.len())
        .map(|i| {
            let j = disc.component_of[i];
            let r = 0.3 + 0.1 * rng.random_range(0.0..1.0);
            a[j] + r * C64::new(0.0, -disc.nodes[i]).exp()
        })
        .collect();
    (w, a)
}

fn schur_vs_dense(n: usize) -> Result<(), String> {
    let disc = two_disks(n.min(48))?;
    let stage = solve_bie(&disc, None, &BieOptions::default()).map_err(|e| e.to_string())?;
    let problem = NewtonProblem::new(&disc, &stage.rhs, &stage.params).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (w, a) = random_state(&disc, &mut rng);
    let f = problem.residual(&w, &a).map_err(|e| e.to_string())?;
    let (step, _) = problem.solve_linearized(&w, &a, &f, MomentBlock::Exact).map_err(|e| e.to_string())?;
    let jac = dense_jacobian(&problem, &w, &a, MomentBlock::Exact).map_err(|e| e.to_string())?;
    let dense = jac
        .lu()
        .solve(&nalgebra::DVector::from_column_slice(&f))
        .ok_or("dense Jacobian is singular")?;
    let scale = dense.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let diff = step.iter().zip(dense.iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    bound("relative step difference", diff / scale, 1e-10)
}

fn finite_differences(n: usize) -> Result<(), String> {
    let disc = two_disks(n.min(48))?;
    let stage = solve_bie(&disc, None, &BieOptions::default()).map_err(|e| e.to_string())?;
    let problem = NewtonProblem::new(&disc, &stage.rhs, &stage.params).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (w, a) = random_state(&disc, &mut rng);
    let f0 = problem.residual(&w, &a).map_err(|e| e.to_string())?;
    let eps = 1e-7;
    let mut worst: f64 = 0.0;
    for _ in 0..5 {
        let v: Vec<C64> = (0..f0.len())
            .map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let (w1, a1): (Vec<C64>, Vec<C64>) = {
            let shifted: Vec<C64> = w.iter().chain(&a).zip(&v).map(|(z, d)| z + eps * d).collect();
            (shifted[..disc.len()].to_vec(), shifted[disc.len()..].to_vec())
        };
        let f1 = problem.residual(&w1, &a1).map_err(|e| e.to_string())?;
        let jv = problem.jacobian_apply(&w, &a, &v, MomentBlock::Exact).map_err(|e| e.to_string())?;
        let num: f64 = f1.iter().zip(&f0).zip(&jv).map(|((x, y), j)| ((x - y) / eps - j).norm_sqr()).sum();
        let den: f64 = jv.iter().map(|j| j.norm_sqr()).sum();
        worst = worst.max((num / den).sqrt());
    }
    bound("relative finite-difference mismatch", worst, 1e-5)
}

fn rational_function(n: usize) -> Result<(), String> {
    let disc = two_disks(n)?;
    let alpha = c(1.1, 0.05);
    let f: Vec<C64> = disc.eta.iter().map(|z| 1.0 / (z - alpha)).collect();
    let mut worst: f64 = 0.0;
    for z in [c(0.0, 0.0), c(0.0, 1.5), c(3.0, -1.0), c(-2.5, 2.0)] {
        worst = worst.max((cauchy_eval(&disc, &f, z, false) - 1.0 / (z - alpha)).norm());
    }
    bound("|Q[f] − f|", worst, 1e-10)
}

fn circle_capacity(n: usize) -> Result<(), String> {
    let disc = disc_of(&[BoundaryCurve::circle(c(1.0, 1.0), 0.75).map_err(|e| e.to_string())?], n)?;
    let cap = capacity_logkernel(&disc).map_err(|e| e.to_string())?;
    bound("|cap − r|", (cap.capacity - 0.75).abs(), 1e-10)
}

fn ellipse_capacity(n: usize) -> Result<(), String> {
    let disc = disc_of(&[BoundaryCurve::ellipse(c(0.0, 0.0), 2.0, 1.0).map_err(|e| e.to_string())?], n)?;
    let cap = capacity_logkernel(&disc).map_err(|e| e.to_string())?;
    bound("|cap − (a + b)/2|", (cap.capacity - 1.5).abs(), 1e-8)
}

fn pipeline_two_disks(n: usize) -> Result<(), String> {
    let disc = two_disks(n)?;
    let solved = solve(&disc, None, &SolveOptions::default()).map_err(|e| e.to_string())?;
    let cap = capacity_logkernel(&disc).map_err(|e| e.to_string())?;
    bound("|τ − capacity|", (solved.bie.params.tau - cap.capacity).abs(), 1e-7)?;
    bound("lemniscate residual", solved.map.diagnostics.lemniscate_residual, 1e-9)
}
