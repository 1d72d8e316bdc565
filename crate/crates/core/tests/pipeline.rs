use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use lemniscatic::geometry::{discretize, winding_number};
use lemniscatic::newton::NewtonProblem;
use lemniscatic::oracle::capacity_logkernel;
use lemniscatic::{presets, solve, BoundaryCurve, SolveOptions, C64};

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[test]
fn capacity_oracle_is_affine_equivariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let base = presets::seven_curves().unwrap()[1..3].to_vec();
    let cap0 = capacity_logkernel(&discretize(&base, 256).unwrap()).unwrap().capacity;
    for _ in 0..4 {
        let s = C64::from_polar(rng.random_range(0.3..3.0), rng.random_range(0.0..6.3));
        let b = c(rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0));
        let moved: Vec<BoundaryCurve> = base.iter().map(|k| k.affine(s, b).unwrap()).collect();
        let cap = capacity_logkernel(&discretize(&moved, 256).unwrap()).unwrap().capacity;
        assert!((cap - s.norm() * cap0).abs() <= 1e-9, "{cap} vs {}", s.norm() * cap0);
    }
}

/// Converged solutions on smooth geometries: τ against the independent
/// capacity, residual bounds, winding of the boundary values, and the shape
/// of the Newton step history.
#[test]
fn smooth_geometries_at_convergence() {
    let cases = vec![
        ("disks", presets::two_disks(0.5).unwrap(), 128),
        ("ellipse", vec![BoundaryCurve::ellipse(c(0.3, 0.0), 2.0, 1.0).unwrap()], 128),
        ("lattice", presets::circle_lattice(4, 2.0).unwrap(), 128),
        ("seven", presets::seven_curves().unwrap(), 256),
    ];
    for (name, curves, n) in cases {
        let disc = discretize(&curves, n).unwrap();
        let s = solve(&disc, None, &SolveOptions::default()).unwrap();
        let cap = capacity_logkernel(&disc).unwrap().capacity;
        let tau = s.bie.params.tau;
        let d = &s.map.diagnostics;
        assert!((tau - cap).abs() <= 1e-7, "{name}: τ {tau} vs capacity {cap}");
        assert!((s.bie.params.m.iter().sum::<f64>() - 1.0).abs() <= 1e-12, "{name}");
        assert!(d.lemniscate_residual <= 1e-8 * (1.0 + tau), "{name}");
        assert!(d.moment_residual <= 1e-8, "{name}");
        let hist = &d.step_norm_history;
        assert!(hist.len() <= 30 && *hist.last().unwrap() <= 1e-11, "{name}: {hist:?}");
        for k in 3..hist.len() {
            assert!(hist[k] < hist[k - 1], "{name}: step history not decreasing {hist:?}");
        }
        let a = &s.map.domain.centers;
        for j in 0..disc.ell {
            let block = &s.map.boundary_w[disc.range(j)];
            for (k, &ak) in a.iter().enumerate() {
                let expected = if k == j { -1 } else { 0 };
                assert_eq!(winding_number(block, ak).unwrap(), expected, "{name}: component {j}, center {k}");
            }
        }
    }
}

#[test]
fn residual_sensitivity_band() {
    let disc = discretize(&presets::two_disks(0.7).unwrap(), 64).unwrap();
    let s = solve(&disc, None, &SolveOptions::default()).unwrap();
    let problem = NewtonProblem::new(&disc, &s.bie.rhs, &s.bie.params).unwrap();
    let a = &s.map.domain.centers;
    let f = problem.residual(&s.map.boundary_w, a).unwrap();
    assert!(f.iter().map(|v| v.norm()).fold(0.0, f64::max) <= 1e-10);
    let mut w = s.map.boundary_w.clone();
    w[17] += 1e-6;
    let f = problem.residual(&w, a).unwrap();
    let norm = f.iter().map(|v| v.norm()).fold(0.0, f64::max);
    assert!((1e-8..=1e-4).contains(&norm), "{norm}");
}

#[test]
fn symmetric_domains_keep_their_symmetry() {
    let disc = discretize(&presets::four_squares().unwrap(), 256).unwrap();
    let s = solve(&disc, None, &SolveOptions::default()).unwrap();
    let a = &s.map.domain.centers;
    for m in &s.bie.params.m {
        assert!((m - 0.25).abs() <= 1e-10);
    }
    // squares at ±1 ± i: centers related by the reflections z ↦ z̄, z ↦ −z̄
    assert!((a[0] - a[3].conj()).norm() <= 1e-8);
    assert!((a[0] + a[1].conj()).norm() <= 1e-8);
    assert!((a[0] + a[2]).norm() <= 1e-8);
    assert!((a[0].re - a[0].im).abs() <= 1e-8);
}
