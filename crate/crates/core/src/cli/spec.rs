//! JSON problem description.
//!
//! ```json
//! {
//!   "curves": [
//!     {"family": "circle", "params": {"center": {"re": 1, "im": 0}, "radius": 0.5}},
//!     {"family": "circle", "params": {"center": {"re": -1, "im": 0}, "radius": 0.5}}
//!   ],
//!   "n": 64,
//!   "tolerances": {"gmres_tol": 1e-14, "newton_tol": 1e-12, "max_newton": 50},
//!   "start": {"s0": 1.1, "delta": 0.1},
//!   "outputs": "out/two-disks"
//! }
//! ```

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::bie::BieOptions;
use crate::error::{Error, Result};
use crate::geometry::{discretize_with, BoundaryCurve, CurveShape, DiscretizeOptions, RadialTerm, TrigFactor};
use crate::geometry::Discretization;
use crate::newton::{NewtonOptions, StartOptions};
use crate::solver::SolveOptions;
use crate::C64;

/// Complex number as `{"re": …, "im": …}`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Cx {
    pub re: f64,
    pub im: f64,
}

impl From<C64> for Cx {
    fn from(z: C64) -> Self {
        Cx { re: z.re, im: z.im }
    }
}

impl From<Cx> for C64 {
    fn from(z: Cx) -> Self {
        C64::new(z.re, z.im)
    }
}

pub fn to_cx(v: &[C64]) -> Vec<Cx> {
    v.iter().map(|&z| z.into()).collect()
}

pub fn from_cx(v: &[Cx]) -> Vec<C64> {
    v.iter().map(|&z| z.into()).collect()
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FactorSpec {
    #[default]
    One,
    CosPow { freq: f64, power: u32 },
    SinPow { freq: f64, power: u32 },
}

/// `weight · exp(exp_cos·cos t + exp_sin·sin t) · factor(t)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermSpec {
    pub weight: f64,
    #[serde(default)]
    pub exp_cos: f64,
    #[serde(default)]
    pub exp_sin: f64,
    #[serde(default)]
    pub factor: FactorSpec,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FourierTerm {
    pub k: i32,
    pub c: Cx,
}

/// One boundary curve, `{"family": …, "params": {…}}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "params", rename_all = "snake_case")]
pub enum CurveSpec {
    Circle {
        center: Cx,
        radius: f64,
    },
    Ellipse {
        center: Cx,
        semi_x: f64,
        semi_y: f64,
        #[serde(default)]
        rotation: f64,
    },
    TrigRadial {
        #[serde(default)]
        center: Cx,
        terms: Vec<TermSpec>,
    },
    Polygon {
        vertices: Vec<Cx>,
    },
    Fourier {
        #[serde(default)]
        center: Cx,
        coefficients: Vec<FourierTerm>,
    },
}

impl CurveSpec {
    pub fn to_shape(&self) -> CurveShape {
        match self {
            CurveSpec::Circle { center, radius } => CurveShape::Circle {
                center: (*center).into(),
                radius: *radius,
            },
            CurveSpec::Ellipse {
                center,
                semi_x,
                semi_y,
                rotation,
            } => CurveShape::Ellipse {
                center: (*center).into(),
                semi_x: *semi_x,
                semi_y: *semi_y,
                rotation: *rotation,
            },
            CurveSpec::TrigRadial { center, terms } => CurveShape::TrigRadial {
                center: (*center).into(),
                terms: terms
                    .iter()
                    .map(|t| RadialTerm {
                        weight: t.weight,
                        exp_cos: t.exp_cos,
                        exp_sin: t.exp_sin,
                        factor: match t.factor {
                            FactorSpec::One => TrigFactor::One,
                            FactorSpec::CosPow { freq, power } => TrigFactor::CosPow { freq, power },
                            FactorSpec::SinPow { freq, power } => TrigFactor::SinPow { freq, power },
                        },
                    })
                    .collect(),
            },
            CurveSpec::Polygon { vertices } => CurveShape::Polygon {
                vertices: from_cx(vertices),
            },
            CurveSpec::Fourier {
                center,
                coefficients,
            } => CurveShape::Fourier {
                center: (*center).into(),
                coefficients: coefficients.iter().map(|t| (t.k, t.c.into())).collect(),
            },
        }
    }

    pub fn from_shape(shape: &CurveShape) -> Self {
        match shape {
            CurveShape::Circle { center, radius } => CurveSpec::Circle {
                center: (*center).into(),
                radius: *radius,
            },
            CurveShape::Ellipse {
                center,
                semi_x,
                semi_y,
                rotation,
            } => CurveSpec::Ellipse {
                center: (*center).into(),
                semi_x: *semi_x,
                semi_y: *semi_y,
                rotation: *rotation,
            },
            CurveShape::TrigRadial { center, terms } => CurveSpec::TrigRadial {
                center: (*center).into(),
                terms: terms
                    .iter()
                    .map(|t| TermSpec {
                        weight: t.weight,
                        exp_cos: t.exp_cos,
                        exp_sin: t.exp_sin,
                        factor: match t.factor {
                            TrigFactor::One => FactorSpec::One,
                            TrigFactor::CosPow { freq, power } => FactorSpec::CosPow { freq, power },
                            TrigFactor::SinPow { freq, power } => FactorSpec::SinPow { freq, power },
                        },
                    })
                    .collect(),
            },
            CurveShape::Polygon { vertices } => CurveSpec::Polygon {
                vertices: to_cx(vertices),
            },
            CurveShape::Fourier {
                center,
                coefficients,
            } => CurveSpec::Fourier {
                center: (*center).into(),
                coefficients: coefficients
                    .iter()
                    .map(|&(k, c)| FourierTerm { k, c: c.into() })
                    .collect(),
            },
        }
    }

    pub fn build(&self) -> Result<BoundaryCurve> {
        BoundaryCurve::new(self.to_shape())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub gmres_tol: f64,
    pub newton_tol: f64,
    pub max_newton: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            gmres_tol: 1e-14,
            newton_tol: 1e-12,
            max_newton: 50,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StartSpec {
    pub s0: f64,
    pub delta: f64,
    /// Explicit starting centers, one per curve.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub centers: Option<Vec<Cx>>,
}

impl Default for StartSpec {
    fn default() -> Self {
        StartSpec {
            s0: 1.1,
            delta: 0.1,
            centers: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub curves: Vec<CurveSpec>,
    pub n: usize,
    /// Auxiliary points inside each curve; centroids when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alphas: Option<Vec<Cx>>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub start: StartSpec,
    /// Grading exponent for curves with corners.
    #[serde(default = "default_grading")]
    pub grading_exponent: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outputs: Option<PathBuf>,
}

fn default_grading() -> f64 {
    3.0
}

/// Command-line values that replace the corresponding spec fields.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub n: Option<usize>,
    pub gmres_tol: Option<f64>,
    pub newton_tol: Option<f64>,
    pub s0: Option<f64>,
    pub delta: Option<f64>,
    pub out: Option<PathBuf>,
}

impl ProblemSpec {
    pub fn new(curves: &[BoundaryCurve], n: usize) -> Self {
        ProblemSpec {
            curves: curves.iter().map(|c| CurveSpec::from_shape(c.shape())).collect(),
            n,
            alphas: None,
            tolerances: Tolerances::default(),
            start: StartSpec::default(),
            grading_exponent: default_grading(),
            outputs: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: ProblemSpec = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn read(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn apply(&mut self, o: &Overrides) -> Result<()> {
        if let Some(n) = o.n {
            self.n = n;
        }
        if let Some(t) = o.gmres_tol {
            self.tolerances.gmres_tol = t;
        }
        if let Some(t) = o.newton_tol {
            self.tolerances.newton_tol = t;
        }
        if let Some(s0) = o.s0 {
            self.start.s0 = s0;
        }
        if let Some(d) = o.delta {
            self.start.delta = d;
        }
        if let Some(out) = &o.out {
            self.outputs = Some(out.clone());
        }
        self.validate()
    }

    /// Structural checks; numerical ones happen when the curves are built.
    pub fn validate(&self) -> Result<()> {
        if self.curves.is_empty() {
            return Err(Error::InvalidInput("problem has no curves".into()));
        }
        if self.n < 4 || self.n % 2 != 0 {
            return Err(Error::InvalidInput(format!("n must be even and at least 4, got {}", self.n)));
        }
        if let Some(a) = &self.alphas {
            if a.len() != self.curves.len() {
                return Err(Error::InvalidInput(format!(
                    "{} alphas given for {} curves",
                    a.len(),
                    self.curves.len()
                )));
            }
        }
        if let Some(c) = &self.start.centers {
            if c.len() != self.curves.len() {
                return Err(Error::InvalidInput(format!(
                    "{} start centers given for {} curves",
                    c.len(),
                    self.curves.len()
                )));
            }
        }
        let t = &self.tolerances;
        if !(t.gmres_tol > 0.0 && t.gmres_tol <= 1e-6) {
            return Err(Error::InvalidInput(format!("gmres_tol must lie in (0, 1e-6], got {}", t.gmres_tol)));
        }
        if !(t.newton_tol > 0.0) || t.max_newton == 0 {
            return Err(Error::InvalidInput("newton_tol must be positive and max_newton nonzero".into()));
        }
        Ok(())
    }

    pub fn build_curves(&self) -> Result<Vec<BoundaryCurve>> {
        self.curves
            .iter()
            .enumerate()
            .map(|(j, c)| c.build().map_err(|e| Error::Geometry(format!("curve {j}: {e}"))))
            .collect()
    }

    pub fn discretize(&self) -> Result<Discretization> {
        let opts = DiscretizeOptions {
            grading_exponent: self.grading_exponent,
            ..DiscretizeOptions::default()
        };
        discretize_with(&self.build_curves()?, self.n, &opts)
    }

    pub fn alphas(&self) -> Option<Vec<C64>> {
        self.alphas.as_deref().map(from_cx)
    }

    pub fn solve_options(&self) -> SolveOptions {
        SolveOptions {
            bie: BieOptions {
                tol: self.tolerances.gmres_tol,
                ..BieOptions::default()
            },
            start: StartOptions {
                s0: self.start.s0,
                delta: self.start.delta,
                centers: self.start.centers.as_deref().map(from_cx),
            },
            newton: NewtonOptions {
                tol: self.tolerances.newton_tol,
                max_iter: self.tolerances.max_newton,
                ..NewtonOptions::default()
            },
        }
    }
}
