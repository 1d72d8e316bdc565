//! Boundary curves, the node grid on the total parameter domain, and a few
//! geometric helpers.
//!
//! Every curve is a `2π`-periodic map `t ↦ η(t)` oriented clockwise, so the
//! unbounded domain lies to the left of each boundary component. First and
//! second derivatives are evaluated analytically for every family.

use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::C64;

/// A point on a curve together with its first and second parameter derivatives.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurvePoint {
    pub z: C64,
    pub dz: C64,
    pub ddz: C64,
}

/// Power of a sine or cosine used as a factor in a [`RadialTerm`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TrigFactor {
    One,
    /// `cos(freq·t)^power`
    CosPow { freq: f64, power: u32 },
    /// `sin(freq·t)^power`
    SinPow { freq: f64, power: u32 },
}

impl TrigFactor {
    fn eval(&self, t: f64) -> (f64, f64, f64) {
        match *self {
            TrigFactor::One => (1.0, 0.0, 0.0),
            TrigFactor::CosPow { freq, power } => {
                let (s, c) = (freq * t).sin_cos();
                let (f, f1, f2) = pow_derivs(c, power);
                // d/dt cos(ωt) = −ω sin, d²/dt² = −ω² cos
                let dc = -freq * s;
                let ddc = -freq * freq * c;
                (f, f1 * dc, f2 * dc * dc + f1 * ddc)
            }
            TrigFactor::SinPow { freq, power } => {
                let (s, c) = (freq * t).sin_cos();
                let (f, f1, f2) = pow_derivs(s, power);
                let ds = freq * c;
                let dds = -freq * freq * s;
                (f, f1 * ds, f2 * ds * ds + f1 * dds)
            }
        }
    }
}

/// `x^p` and its first two derivatives in `x`, safe at `x = 0` for small `p`.
fn pow_derivs(x: f64, p: u32) -> (f64, f64, f64) {
    let p_i = p as i32;
    let f = x.powi(p_i);
    let f1 = if p >= 1 { p as f64 * x.powi(p_i - 1) } else { 0.0 };
    let f2 = if p >= 2 {
        (p * (p - 1)) as f64 * x.powi(p_i - 2)
    } else {
        0.0
    };
    (f, f1, f2)
}

/// One term `weight · exp(exp_cos·cos t + exp_sin·sin t) · factor(t)` of a
/// radius function.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RadialTerm {
    pub weight: f64,
    pub exp_cos: f64,
    pub exp_sin: f64,
    pub factor: TrigFactor,
}

impl RadialTerm {
    pub fn constant(weight: f64) -> Self {
        RadialTerm {
            weight,
            exp_cos: 0.0,
            exp_sin: 0.0,
            factor: TrigFactor::One,
        }
    }

    pub fn cos(weight: f64, freq: f64) -> Self {
        RadialTerm {
            weight,
            exp_cos: 0.0,
            exp_sin: 0.0,
            factor: TrigFactor::CosPow { freq, power: 1 },
        }
    }

    pub fn sin(weight: f64, freq: f64) -> Self {
        RadialTerm {
            weight,
            exp_cos: 0.0,
            exp_sin: 0.0,
            factor: TrigFactor::SinPow { freq, power: 1 },
        }
    }

    fn eval(&self, t: f64) -> (f64, f64, f64) {
        let (s, c) = t.sin_cos();
        let e = (self.exp_cos * c + self.exp_sin * s).exp();
        let e1 = -self.exp_cos * s + self.exp_sin * c;
        let e2 = -self.exp_cos * c - self.exp_sin * s;
        let (de, dde) = (e * e1, e * (e1 * e1 + e2));
        let (f, df, ddf) = self.factor.eval(t);
        (
            self.weight * e * f,
            self.weight * (de * f + e * df),
            self.weight * (dde * f + 2.0 * de * df + e * ddf),
        )
    }
}

/// Builtin curve families. Every parametrization runs clockwise.
#[derive(Clone, Debug, PartialEq)]
pub enum CurveShape {
    /// `c + r e^{−it}`
    Circle { center: C64, radius: f64 },
    /// `c + e^{iφ}(a cos t − i b sin t)`
    Ellipse {
        center: C64,
        semi_x: f64,
        semi_y: f64,
        rotation: f64,
    },
    /// `c + r(t) e^{−it}` with `r` a sum of [`RadialTerm`]s.
    TrigRadial { center: C64, terms: Vec<RadialTerm> },
    /// Closed polygon, vertices in clockwise order, each side traversed
    /// linearly over a parameter arc of length `2π / sides`.
    Polygon { vertices: Vec<C64> },
    /// `c + Σ_k c_k e^{ikt}`
    Fourier {
        center: C64,
        coefficients: Vec<(i32, C64)>,
    },
}

impl CurveShape {
    pub fn family(&self) -> &'static str {
        match self {
            CurveShape::Circle { .. } => "circle",
            CurveShape::Ellipse { .. } => "ellipse",
            CurveShape::TrigRadial { .. } => "trig_radial",
            CurveShape::Polygon { .. } => "polygon",
            CurveShape::Fourier { .. } => "fourier",
        }
    }

    fn radius_fn(terms: &[RadialTerm], t: f64) -> (f64, f64, f64) {
        terms.iter().fold((0.0, 0.0, 0.0), |acc, term| {
            let (r, dr, ddr) = term.eval(t);
            (acc.0 + r, acc.1 + dr, acc.2 + ddr)
        })
    }
}

/// Kress-type grading of each corner-to-corner arc.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grading {
    pub exponent: f64,
    /// Parameter value of the first corner.
    pub phase: f64,
}

/// One parametrized Jordan curve `η_j`.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryCurve {
    shape: CurveShape,
    scale: C64,
    shift: C64,
    grading: Option<Grading>,
}

const CHECK_SAMPLES: usize = 1024;

impl BoundaryCurve {
    /// Validates the family parameters and builds the curve.
    pub fn new(shape: CurveShape) -> Result<Self> {
        validate_shape(&shape)?;
        let curve = Self::from_shape_unchecked(shape);
        let samples = curve.sample(CHECK_SAMPLES);
        let area = signed_area(&samples);
        if area >= 0.0 {
            return Err(Error::Geometry(format!(
                "{} curve is not clockwise (signed area {area:.3e}); reverse its parametrization",
                curve.shape.family()
            )));
        }
        if matches!(curve.shape, CurveShape::Fourier { .. }) {
            if samples_self_intersect(&samples) {
                return Err(Error::Geometry("fourier curve intersects itself".into()));
            }
            let ts = (0..CHECK_SAMPLES).map(|i| TAU * i as f64 / CHECK_SAMPLES as f64);
            if ts.map(|t| curve.eval(t).dz.norm()).any(|d| d <= 1e-12) {
                return Err(Error::Geometry("fourier curve has a stationary point".into()));
            }
        }
        Ok(curve)
    }

    /// Builds a curve without any validation. Intended for tests that need
    /// a deliberately invalid orientation.
    #[doc(hidden)]
    pub fn from_shape_unchecked(shape: CurveShape) -> Self {
        BoundaryCurve {
            shape,
            scale: C64::new(1.0, 0.0),
            shift: C64::new(0.0, 0.0),
            grading: None,
        }
    }

    pub fn circle(center: C64, radius: f64) -> Result<Self> {
        Self::new(CurveShape::Circle { center, radius })
    }

    pub fn ellipse(center: C64, semi_x: f64, semi_y: f64) -> Result<Self> {
        Self::new(CurveShape::Ellipse {
            center,
            semi_x,
            semi_y,
            rotation: 0.0,
        })
    }

    pub fn polygon(vertices: Vec<C64>) -> Result<Self> {
        Self::new(CurveShape::Polygon { vertices })
    }

    pub fn trig_radial(center: C64, terms: Vec<RadialTerm>) -> Result<Self> {
        Self::new(CurveShape::TrigRadial { center, terms })
    }

    pub fn shape(&self) -> &CurveShape {
        &self.shape
    }

    pub fn grading(&self) -> Option<Grading> {
        self.grading
    }

    /// Image of the curve under `z ↦ s·z + b`. Orientation is preserved.
    pub fn affine(&self, s: C64, b: C64) -> Result<Self> {
        if s.norm() == 0.0 || !s.is_finite() || !b.is_finite() {
            return Err(Error::InvalidInput("affine map needs finite s ≠ 0".into()));
        }
        let mut out = self.clone();
        out.scale = s * self.scale;
        out.shift = s * self.shift + b;
        Ok(out)
    }

    /// Parameter values where `η̇` is discontinuous (or, after grading,
    /// vanishes). Empty for smooth families.
    pub fn corners(&self) -> Vec<f64> {
        match &self.shape {
            CurveShape::Polygon { vertices } => {
                let sides = vertices.len();
                let phase = self.grading.map_or(0.0, |g| g.phase);
                (0..sides)
                    .map(|k| (phase + TAU * k as f64 / sides as f64).rem_euclid(TAU))
                    .collect()
            }
            _ => Vec::new(),
        }
    }

    pub fn has_corners(&self) -> bool {
        !self.corners().is_empty()
    }

    /// Same curve with the first corner moved to parameter `phase`.
    /// Only meaningful for graded curves.
    pub fn with_phase(&self, phase: f64) -> Self {
        let mut out = self.clone();
        if let Some(g) = out.grading.as_mut() {
            g.phase = phase;
        }
        out
    }

    /// `η(t)`, `η̇(t)`, `η̈(t)`.
    pub fn eval(&self, t: f64) -> CurvePoint {
        let p = self.eval_base(t);
        CurvePoint {
            z: self.scale * p.z + self.shift,
            dz: self.scale * p.dz,
            ddz: self.scale * p.ddz,
        }
    }

    fn eval_base(&self, t: f64) -> CurvePoint {
        let i = crate::I;
        match &self.shape {
            CurveShape::Circle { center, radius } => {
                let e = C64::from_polar(*radius, -t);
                CurvePoint {
                    z: center + e,
                    dz: -i * e,
                    ddz: -e,
                }
            }
            CurveShape::Ellipse {
                center,
                semi_x,
                semi_y,
                rotation,
            } => {
                let rot = C64::from_polar(1.0, *rotation);
                let (s, c) = t.sin_cos();
                CurvePoint {
                    z: center + rot * C64::new(semi_x * c, -semi_y * s),
                    dz: rot * C64::new(-semi_x * s, -semi_y * c),
                    ddz: rot * C64::new(-semi_x * c, semi_y * s),
                }
            }
            CurveShape::TrigRadial { center, terms } => {
                let (r, dr, ddr) = CurveShape::radius_fn(terms, t);
                let e = C64::from_polar(1.0, -t);
                CurvePoint {
                    z: center + r * e,
                    dz: (dr - i * r) * e,
                    ddz: (ddr - 2.0 * i * dr - r) * e,
                }
            }
            CurveShape::Fourier {
                center,
                coefficients,
            } => {
                let mut p = CurvePoint {
                    z: *center,
                    dz: C64::new(0.0, 0.0),
                    ddz: C64::new(0.0, 0.0),
                };
                for &(k, ck) in coefficients {
                    let term = ck * C64::from_polar(1.0, k as f64 * t);
                    let kf = k as f64;
                    p.z += term;
                    p.dz += i * kf * term;
                    p.ddz -= kf * kf * term;
                }
                p
            }
            CurveShape::Polygon { vertices } => {
                let sides = vertices.len();
                let arc = TAU / sides as f64;
                let phase = self.grading.map_or(0.0, |g| g.phase);
                let local = (t - phase).rem_euclid(TAU) / arc;
                let k = (local.floor() as usize).min(sides - 1);
                let sigma = local - k as f64;
                let edge = vertices[(k + 1) % sides] - vertices[k];
                let (u, du, ddu) = match self.grading {
                    Some(g) => kress_substitution(sigma, g.exponent),
                    None => (sigma, 1.0, 0.0),
                };
                let rate = 1.0 / arc;
                CurvePoint {
                    z: vertices[k] + edge * u,
                    dz: edge * (du * rate),
                    ddz: edge * (ddu * rate * rate),
                }
            }
        }
    }

    /// `m` equispaced samples of `η` starting at `t = 0`.
    pub fn sample(&self, m: usize) -> Vec<C64> {
        (0..m)
            .map(|i| self.eval(TAU * i as f64 / m as f64).z)
            .collect()
    }
}

/// Convenience constructor mirroring the family descriptors of problem files.
pub fn make_curve(shape: CurveShape) -> Result<BoundaryCurve> {
    BoundaryCurve::new(shape)
}

fn validate_shape(shape: &CurveShape) -> Result<()> {
    let geo = |msg: String| Err(Error::Geometry(msg));
    match shape {
        CurveShape::Circle { center, radius } => {
            if !(radius.is_finite() && *radius > 0.0) || !center.is_finite() {
                return geo(format!("circle radius must be positive and finite, got {radius}"));
            }
        }
        CurveShape::Ellipse {
            center,
            semi_x,
            semi_y,
            rotation,
        } => {
            let ok = semi_x.is_finite() && semi_y.is_finite() && *semi_x > 0.0 && *semi_y > 0.0;
            if !ok || !center.is_finite() || !rotation.is_finite() {
                return geo(format!(
                    "ellipse semi-axes must be positive, got ({semi_x}, {semi_y})"
                ));
            }
        }
        CurveShape::TrigRadial { center, terms } => {
            if terms.is_empty() || !center.is_finite() {
                return geo("trig_radial needs at least one term".into());
            }
            let min_r = (0..CHECK_SAMPLES)
                .map(|i| CurveShape::radius_fn(terms, TAU * i as f64 / CHECK_SAMPLES as f64).0)
                .fold(f64::INFINITY, f64::min);
            if !(min_r > 0.0) {
                return geo(format!("trig_radial radius function has minimum {min_r} ≤ 0"));
            }
        }
        CurveShape::Polygon { vertices } => {
            if vertices.len() < 3 {
                return geo("polygon needs at least 3 vertices".into());
            }
            if vertices.iter().any(|v| !v.is_finite()) {
                return geo("polygon vertex is not finite".into());
            }
            let m = vertices.len();
            for k in 0..m {
                if (vertices[(k + 1) % m] - vertices[k]).norm() == 0.0 {
                    return geo(format!("polygon has repeated vertex at index {k}"));
                }
            }
            if samples_self_intersect(vertices) {
                return geo("polygon is self-intersecting".into());
            }
        }
        CurveShape::Fourier {
            center,
            coefficients,
        } => {
            if coefficients.is_empty() || !center.is_finite() {
                return geo("fourier curve needs at least one coefficient".into());
            }
        }
    }
    Ok(())
}

/// Kress substitution on `[0, 1]`: returns `u(σ), u'(σ), u''(σ)` where `u`
/// maps `[0,1]` onto itself and `u'` vanishes to order `p − 1` at both ends.
pub fn kress_substitution(sigma: f64, p: f64) -> (f64, f64, f64) {
    let x = 2.0 * sigma - 1.0;
    let c = 1.0 / p - 0.5;
    let v = -c * x * x * x + x / p + 0.5;
    let dv = 2.0 * (-3.0 * c * x * x + 1.0 / p);
    let ddv = -24.0 * c * x;
    let v = v.clamp(0.0, 1.0);
    let w = 1.0 - v;
    let a = v.powf(p) + w.powf(p);
    let b = p * v.powf(p - 1.0) * w.powf(p - 1.0);
    let da = p * (v.powf(p - 1.0) - w.powf(p - 1.0));
    let db = p * (p - 1.0) * (v.powf(p - 2.0) * w.powf(p - 1.0) - v.powf(p - 1.0) * w.powf(p - 2.0));
    let g = v.powf(p) / a;
    let dg = b / (a * a);
    let ddg = (db * a - 2.0 * b * da) / (a * a * a);
    (g, dg * dv, ddg * dv * dv + dg * ddv)
}

/// Returns the curve with each corner-to-corner arc reparametrized by the
/// Kress substitution of exponent `p`.
pub fn graded_reparam(curve: &BoundaryCurve, p: f64) -> Result<BoundaryCurve> {
    if !curve.has_corners() {
        return Err(Error::Geometry(format!(
            "graded reparametrization needs a curve with corners, got a {}",
            curve.shape.family()
        )));
    }
    if !(p >= 2.0) || !p.is_finite() {
        return Err(Error::InvalidInput(format!("grading exponent must be ≥ 2, got {p}")));
    }
    let mut out = curve.clone();
    out.grading = Some(Grading {
        exponent: p,
        phase: curve.grading.map_or(0.0, |g| g.phase),
    });
    Ok(out)
}

/// Shoelace area of a closed polyline; negative for clockwise.
pub fn signed_area(samples: &[C64]) -> f64 {
    let m = samples.len();
    0.5 * (0..m)
        .map(|k| (samples[k].conj() * samples[(k + 1) % m]).im)
        .sum::<f64>()
}

fn segments_intersect(p1: C64, p2: C64, q1: C64, q2: C64) -> bool {
    let cross = |a: C64, b: C64| a.re * b.im - a.im * b.re;
    let d1 = cross(q2 - q1, p1 - q1);
    let d2 = cross(q2 - q1, p2 - q1);
    let d3 = cross(p2 - p1, q1 - p1);
    let d4 = cross(p2 - p1, q2 - p1);
    ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
}

fn samples_self_intersect(poly: &[C64]) -> bool {
    let m = poly.len();
    for i in 0..m {
        for j in (i + 2)..m {
            if i == 0 && j == m - 1 {
                continue;
            }
            if segments_intersect(poly[i], poly[(i + 1) % m], poly[j], poly[(j + 1) % m]) {
                return true;
            }
        }
    }
    false
}

fn segment_distance(p: C64, a: C64, b: C64) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_sqr();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let s = (((p - a) * ab.conj()).re / len2).clamp(0.0, 1.0);
    (p - (a + ab * s)).norm()
}

/// Distance from `point` to the closed polyline through `samples`.
pub fn polyline_distance(samples: &[C64], point: C64) -> f64 {
    let m = samples.len();
    (0..m)
        .map(|k| segment_distance(point, samples[k], samples[(k + 1) % m]))
        .fold(f64::INFINITY, f64::min)
}

fn bbox_diameter(samples: &[C64]) -> f64 {
    let (mut lo, mut hi) = (
        C64::new(f64::INFINITY, f64::INFINITY),
        C64::new(f64::NEG_INFINITY, f64::NEG_INFINITY),
    );
    for z in samples {
        lo.re = lo.re.min(z.re);
        lo.im = lo.im.min(z.im);
        hi.re = hi.re.max(z.re);
        hi.im = hi.im.max(z.im);
    }
    (hi - lo).norm()
}

/// Winding number of the closed polyline `samples` around `point`, from the
/// summed argument increments.
pub fn winding_number(samples: &[C64], point: C64) -> Result<i32> {
    if samples.len() < 3 {
        return Err(Error::InvalidInput("winding number needs ≥ 3 samples".into()));
    }
    let tol = 1e-12 * bbox_diameter(samples).max(f64::MIN_POSITIVE);
    if polyline_distance(samples, point) <= tol {
        return Err(Error::Geometry(format!("point {point} lies on the curve")));
    }
    let m = samples.len();
    let total: f64 = (0..m)
        .map(|k| ((samples[(k + 1) % m] - point) / (samples[k] - point)).arg())
        .sum();
    Ok((total / TAU).round() as i32)
}

/// Options for [`discretize`].
#[derive(Clone, Copy, Debug)]
pub struct DiscretizeOptions {
    /// Minimum allowed distance between node samples of different curves.
    pub min_separation: f64,
    /// Grading exponent applied to curves with corners.
    pub grading_exponent: f64,
}

impl Default for DiscretizeOptions {
    fn default() -> Self {
        DiscretizeOptions {
            min_separation: 1e-8,
            grading_exponent: 3.0,
        }
    }
}

/// The sampled total parameter domain `J`: `ℓ` blocks of `n` equispaced
/// nodes each, with `η, η̇, η̈` at every node.
///
/// Component indices are zero-based throughout the crate.
#[derive(Clone, Debug)]
pub struct Discretization {
    pub ell: usize,
    pub n: usize,
    pub nodes: Vec<f64>,
    pub eta: Vec<C64>,
    pub eta_dot: Vec<C64>,
    pub eta_ddot: Vec<C64>,
    pub component_of: Vec<usize>,
    /// Curves as sampled (graded where they have corners).
    pub curves: Vec<BoundaryCurve>,
    /// Grading exponent, when any curve was graded.
    pub grading: Option<f64>,
}

impl Discretization {
    pub fn len(&self) -> usize {
        self.ell * self.n
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Trapezoidal weight `2π/n`.
    pub fn weight(&self) -> f64 {
        TAU / self.n as f64
    }

    /// Node index range of component `j`.
    pub fn range(&self, j: usize) -> std::ops::Range<usize> {
        j * self.n..(j + 1) * self.n
    }

    /// Node samples of `Γ_j`.
    pub fn component(&self, j: usize) -> &[C64] {
        &self.eta[self.range(j)]
    }

    pub fn check_component(&self, j: usize) -> Result<()> {
        if j >= self.ell {
            return Err(Error::InvalidInput(format!(
                "component index {j} out of range (ℓ = {})",
                self.ell
            )));
        }
        Ok(())
    }

    /// Bounding-box diameter of all node samples.
    pub fn diameter(&self) -> f64 {
        bbox_diameter(&self.eta)
    }

    /// Largest `2π|η̇|/n`, the local node spacing.
    pub fn max_spacing(&self) -> f64 {
        self.weight() * self.eta_dot.iter().map(|d| d.norm()).fold(0.0, f64::max)
    }

    /// Winding number of the node polyline of `Γ_j` around `point`.
    pub fn winding(&self, j: usize, point: C64) -> Result<i32> {
        winding_number(self.component(j), point)
    }

    /// Same curves on a different grid size.
    pub fn resample(&self, n: usize) -> Result<Discretization> {
        let opts = DiscretizeOptions {
            grading_exponent: self.grading.unwrap_or(3.0),
            ..DiscretizeOptions::default()
        };
        let ungraded: Vec<BoundaryCurve> = self
            .curves
            .iter()
            .map(|c| {
                let mut c = c.clone();
                c.grading = None;
                c
            })
            .collect();
        discretize_with(&ungraded, n, &opts)
    }
}

/// [`discretize_with`] using default options.
pub fn discretize(curves: &[BoundaryCurve], n: usize) -> Result<Discretization> {
    discretize_with(curves, n, &DiscretizeOptions::default())
}

/// Samples all curves on `n` equispaced nodes each. Curves with corners are
/// graded first and shifted by half a node so no node sits on a corner.
pub fn discretize_with(
    curves: &[BoundaryCurve],
    n: usize,
    opts: &DiscretizeOptions,
) -> Result<Discretization> {
    if n < 4 || n % 2 != 0 {
        return Err(Error::Geometry(format!("n must be even and ≥ 4, got {n}")));
    }
    if curves.is_empty() {
        return Err(Error::Geometry("need at least one boundary curve".into()));
    }
    let ell = curves.len();
    let h = TAU / n as f64;
    let mut sampled = Vec::with_capacity(ell);
    let mut graded_any = false;
    for curve in curves {
        if curve.has_corners() {
            let graded = graded_reparam(curve, opts.grading_exponent)?;
            sampled.push(place_corners_between_nodes(&graded, n)?);
            graded_any = true;
        } else {
            sampled.push(curve.clone());
        }
    }

    let total = ell * n;
    let mut disc = Discretization {
        ell,
        n,
        nodes: Vec::with_capacity(total),
        eta: Vec::with_capacity(total),
        eta_dot: Vec::with_capacity(total),
        eta_ddot: Vec::with_capacity(total),
        component_of: Vec::with_capacity(total),
        curves: sampled,
        grading: graded_any.then_some(opts.grading_exponent),
    };
    for (j, curve) in disc.curves.iter().enumerate() {
        for p in 0..n {
            let t = p as f64 * h;
            let pt = curve.eval(t);
            if !(pt.dz.norm() > 0.0) || !pt.z.is_finite() || !pt.ddz.is_finite() {
                return Err(Error::Geometry(format!(
                    "curve {j}: degenerate sample at t = {t} (|η̇| = {})",
                    pt.dz.norm()
                )));
            }
            disc.nodes.push(t);
            disc.eta.push(pt.z);
            disc.eta_dot.push(pt.dz);
            disc.eta_ddot.push(pt.ddz);
            disc.component_of.push(j);
        }
    }
    check_separation(&disc, opts.min_separation)?;
    Ok(disc)
}

fn place_corners_between_nodes(curve: &BoundaryCurve, n: usize) -> Result<BoundaryCurve> {
    let h = TAU / n as f64;
    for divisor in [2.0, 3.0, 4.0, 5.0, 7.0] {
        let candidate = curve.with_phase(h / divisor);
        let min_gap = candidate
            .corners()
            .iter()
            .map(|&c| {
                let r = (c / h).fract();
                r.min(1.0 - r) * h
            })
            .fold(f64::INFINITY, f64::min);
        if min_gap > 1e-3 * h {
            return Ok(candidate);
        }
    }
    Err(Error::Geometry(format!(
        "could not place corners off the {n}-node grid"
    )))
}

fn check_separation(disc: &Discretization, min_separation: f64) -> Result<()> {
    let n = disc.n;
    for j in 0..disc.ell {
        let block = disc.component(j);
        for p in 0..n {
            for q in (p + 1)..n {
                if block[p] == block[q] {
                    return Err(Error::Geometry(format!(
                        "curve {j}: nodes {p} and {q} coincide"
                    )));
                }
            }
        }
        for k in (j + 1)..disc.ell {
            let other = disc.component(k);
            let d = block
                .iter()
                .flat_map(|a| other.iter().map(move |b| (a - b).norm()))
                .fold(f64::INFINITY, f64::min);
            if !(d > min_separation) {
                return Err(Error::Geometry(format!(
                    "curves {j} and {k} overlap or touch (min sampled distance {d:.3e})"
                )));
            }
        }
    }
    if disc.ell > 1 {
        let fine: Vec<Vec<C64>> = disc
            .curves
            .iter()
            .map(|c| c.sample(CHECK_SAMPLES))
            .collect();
        for j in 0..disc.ell {
            for k in 0..disc.ell {
                if j == k {
                    continue;
                }
                let probe = disc.component(k)[0];
                if winding_number(&fine[j], probe).map_or(true, |w| w != 0) {
                    return Err(Error::Geometry(format!(
                        "curve {k} lies inside or on curve {j}"
                    )));
                }
            }
        }
    }
    Ok(())
}

/// Mean of the node samples of `Γ_j`.
pub fn centroid(disc: &Discretization, j: usize) -> Result<C64> {
    disc.check_component(j)?;
    let block = disc.component(j);
    Ok(block.iter().sum::<C64>() / block.len() as f64)
}

/// Trapezoidal estimate of `(1/2π)∮ Im(η̈/η̇) dt` per component: the total
/// turning of the tangent, `−1` for a clockwise Jordan curve.
pub fn total_turning(disc: &Discretization, j: usize) -> f64 {
    disc.range(j)
        .map(|i| (disc.eta_ddot[i] / disc.eta_dot[i]).im)
        .sum::<f64>()
        * disc.weight()
        / TAU
}
