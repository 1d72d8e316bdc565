//! Builtin test geometries.

use crate::error::Result;
use crate::geometry::{BoundaryCurve, RadialTerm, TrigFactor};
use crate::C64;

/// Exterior of two disks `±1 + r e^{−it}`.
pub fn two_disks(r: f64) -> Result<Vec<BoundaryCurve>> {
    Ok(vec![
        BoundaryCurve::circle(C64::new(1.0, 0.0), r)?,
        BoundaryCurve::circle(C64::new(-1.0, 0.0), r)?,
    ])
}

fn exp_term(weight: f64, exp_cos: f64, exp_sin: f64, factor: TrigFactor) -> RadialTerm {
    RadialTerm {
        weight,
        exp_cos,
        exp_sin,
        factor,
    }
}

fn cos2(freq: f64) -> TrigFactor {
    TrigFactor::CosPow { freq, power: 2 }
}

fn sin2(freq: f64) -> TrigFactor {
    TrigFactor::SinPow { freq, power: 2 }
}

/// Radius functions of the seven nonconvex smooth curves, `η_j = r_j(t) e^{−it}`.
pub fn seven_radii() -> Vec<Vec<RadialTerm>> {
    use RadialTerm as R;
    vec![
        vec![R::constant(1.25), R::sin(0.50, 4.0), R::cos(0.30, 1.0)],
        vec![R::constant(1.25), R::sin(0.40, 2.0), R::cos(0.20, 3.0)],
        vec![
            R::constant(0.75),
            exp_term(0.25, 1.0, 0.0, cos2(3.0)),
            exp_term(0.50, 0.0, 1.0, sin2(2.0)),
        ],
        vec![
            exp_term(1.0, 1.0, 0.0, cos2(2.0)),
            exp_term(1.0, 0.0, 1.0, sin2(2.0)),
        ],
        vec![
            R::constant(0.75),
            exp_term(0.25, 1.0, 0.0, cos2(2.0)),
            exp_term(0.50, 0.0, 1.0, sin2(3.0)),
        ],
        vec![R::constant(1.25), R::sin(0.40, 4.0), R::cos(0.20, 3.0)],
        vec![R::constant(1.25), R::sin(0.50, 3.0), R::cos(0.30, 1.0)],
    ]
}

/// Horizontal positions of the seven curves, left to right.
pub const SEVEN_CENTERS: [f64; 7] = [-15.0, -10.0, -5.0, 0.0, 5.0, 10.0, 15.0];

/// The seven nonconvex curves placed side by side along the real axis.
pub fn seven_curves() -> Result<Vec<BoundaryCurve>> {
    seven_radii()
        .into_iter()
        .zip(SEVEN_CENTERS)
        .map(|(terms, x)| BoundaryCurve::trig_radial(C64::new(x, 0.0), terms))
        .collect()
}

/// `side × side` lattice of circles symmetric about both axes. Centers sit at
/// odd multiples of `spacing/2`; radii vary symmetrically between rows and
/// columns.
pub fn circle_lattice(side: usize, spacing: f64) -> Result<Vec<BoundaryCurve>> {
    let half = (side as f64 - 1.0) / 2.0;
    let mut curves = Vec::with_capacity(side * side);
    for row in 0..side {
        for col in 0..side {
            let (x, y) = (col as f64 - half, row as f64 - half);
            let r = spacing * (0.15 + 0.05 * ((x.abs() + y.abs()) % 2.0));
            curves.push(BoundaryCurve::circle(C64::new(x * spacing, y * spacing), r)?);
        }
    }
    Ok(curves)
}

/// Four axis-aligned squares of half-side `0.5` centered at `±1 ± i`.
pub fn four_squares() -> Result<Vec<BoundaryCurve>> {
    let mut curves = Vec::with_capacity(4);
    for center in [
        C64::new(1.0, 1.0),
        C64::new(-1.0, 1.0),
        C64::new(-1.0, -1.0),
        C64::new(1.0, -1.0),
    ] {
        let h = 0.5;
        let vertices = vec![
            center + C64::new(h, h),
            center + C64::new(h, -h),
            center + C64::new(-h, -h),
            center + C64::new(-h, h),
        ];
        curves.push(BoundaryCurve::polygon(vertices)?);
    }
    Ok(curves)
}
