//! Command-line front end: problem files in, result bundles out.
//!
//! Exit codes: `0` success, `1` bad input or a failed stage (nothing is
//! written), `2` Newton did not converge (the bundle is written with
//! `"converged": false` so the histories can be inspected).

pub mod bundle;
pub mod selftest;
pub mod spec;

use std::io::Read;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::cauchy::{eval_analytic, near_boundary, EvaluationRequest, NearBoundaryPolicy, PointError};
use crate::error::{Error, Result};
use crate::bie::BieStage;
use crate::geometry::Discretization;
use crate::newton::{newton_solve, summarize, MapSolution, NewtonProblem};
use crate::oracle::capacity_logkernel;
use crate::solver::{gmres_stats, prepare};
use crate::C64;

pub use bundle::{Bundle, LoadedBundle};
pub use selftest::run_selftest;
pub use spec::{Overrides, ProblemSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Converged,
    NotConverged,
}

impl Status {
    pub fn exit_code(self) -> u8 {
        match self {
            Status::Converged => 0,
            Status::NotConverged => 2,
        }
    }
}

/// Exit code for an error returned by any `run_*` function.
pub const ERROR_EXIT: u8 = 1;

#[derive(Clone, Debug)]
pub struct SolveReport {
    pub status: Status,
    pub out: PathBuf,
    pub tau: f64,
    pub newton_iterations: usize,
    pub failure: Option<String>,
}

/// Everything a solve produces, before anything is written.
#[derive(Clone, Debug)]
pub struct Computed {
    pub disc: Discretization,
    pub stage: BieStage,
    pub map: MapSolution,
    /// Why Newton stopped, when it did not converge.
    pub failure: Option<String>,
}

impl Computed {
    pub fn status(&self) -> Status {
        if self.failure.is_none() {
            Status::Converged
        } else {
            Status::NotConverged
        }
    }

    pub fn write(&self, spec: &ProblemSpec, out: &Path) -> Result<()> {
        Bundle {
            spec,
            disc: &self.disc,
            stage: &self.stage,
            map: &self.map,
            failure: self.failure.as_deref(),
        }
        .write(out)
        .map_err(Error::at("output"))
    }
}

/// Runs the pipeline on `spec`. Newton non-convergence is not an error here:
/// the last iterate is summarized and the reason kept in `failure`.
pub fn compute(spec: &ProblemSpec) -> Result<Computed> {
    spec.validate()?;
    let disc = spec.discretize().map_err(Error::at("geometry"))?;
    let opts = spec.solve_options();
    let stage = prepare(&disc, spec.alphas().as_deref(), &opts.bie)?;
    let (mut map, failure) = match newton_solve(&disc, &stage.rhs, &stage.params, &opts.start, &opts.newton) {
        Ok(map) => (map, None),
        Err(Error::NewtonNotConverged(f)) => {
            let problem = NewtonProblem::new(&disc, &stage.rhs, &stage.params).map_err(Error::at("newton"))?;
            (summarize(&problem, f.state, &stage.params, false), Some(f.reason))
        }
        Err(e) => return Err(Error::at("newton")(e)),
    };
    map.diagnostics.gmres = gmres_stats(&stage);
    Ok(Computed {
        disc,
        stage,
        map,
        failure,
    })
}

/// Runs the whole pipeline on `spec` and writes the bundle to
/// `spec.outputs`.
pub fn run_solve(spec: &ProblemSpec) -> Result<SolveReport> {
    spec.validate()?;
    let out = spec
        .outputs
        .clone()
        .ok_or_else(|| Error::InvalidInput("no output directory: set \"outputs\" or pass --out".into()))?;
    let c = compute(spec)?;
    c.write(spec, &out)?;
    Ok(SolveReport {
        status: c.status(),
        out,
        tau: c.stage.params.tau,
        newton_iterations: c.map.diagnostics.newton_iterations,
        failure: c.failure,
    })
}

/// One row of `eval` output.
#[derive(Clone, Debug, PartialEq)]
pub struct EvalRow {
    pub z: C64,
    pub phi: std::result::Result<C64, PointError>,
    /// Closer to the boundary than the node spacing.
    pub near_boundary: bool,
}

/// Reads points as `re,im` lines; a header line is optional.
pub fn parse_points(text: &str) -> Result<Vec<C64>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut points = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record?;
        if record.len() != 2 {
            return Err(Error::InvalidInput(format!(
                "points line {}: expected 2 columns, got {}",
                line + 1,
                record.len()
            )));
        }
        let parsed = (record[0].parse::<f64>(), record[1].parse::<f64>());
        match parsed {
            (Ok(re), Ok(im)) => points.push(C64::new(re, im)),
            _ if line == 0 => {} // header
            _ => {
                return Err(Error::InvalidInput(format!(
                    "points line {}: cannot parse {:?}",
                    line + 1,
                    record.iter().collect::<Vec<_>>()
                )))
            }
        }
    }
    Ok(points)
}

/// `Φ` at `points` from a bundle.
pub fn run_eval(bundle_dir: &Path, points: &[C64], policy: NearBoundaryPolicy) -> Result<Vec<EvalRow>> {
    let bundle = LoadedBundle::read(bundle_dir)?;
    let disc = bundle.spec.discretize().map_err(Error::at("geometry"))?;
    let f: Vec<C64> = bundle.w.iter().zip(&disc.eta).map(|(w, e)| w - e).collect();
    let req = EvaluationRequest {
        points: points.to_vec(),
        policy,
    };
    let values = eval_analytic(&disc, &f, &req).map_err(Error::at("eval"))?;
    Ok(points
        .iter()
        .zip(values)
        .map(|(&z, v)| EvalRow {
            z,
            phi: v.map(|f| z + f),
            near_boundary: near_boundary(&disc, z),
        })
        .collect())
}

/// CSV with columns `z_re, z_im, phi_re, phi_im, status`; failed points have
/// empty value columns and the reason as status.
pub fn eval_csv(rows: &[EvalRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["z_re", "z_im", "phi_re", "phi_im", "status"])?;
    for row in rows {
        let (z_re, z_im) = (bundle::fmt17(row.z.re), bundle::fmt17(row.z.im));
        match row.phi {
            Ok(phi) => {
                let status = if row.near_boundary { "near-boundary" } else { "ok" };
                w.write_record([z_re, z_im, bundle::fmt17(phi.re), bundle::fmt17(phi.im), status.into()])?
            }
            Err(e) => w.write_record([z_re, z_im, String::new(), String::new(), e.to_string()])?,
        }
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv writes UTF-8"))
}

/// Writes `grid.csv` into an existing bundle.
pub fn run_grid(bundle_dir: &Path, nx: usize, ny: usize, margin: f64) -> Result<PathBuf> {
    let bundle = LoadedBundle::read(bundle_dir)?;
    bundle::write_grid(bundle_dir, &bundle, nx, ny, margin)
}

#[derive(Clone, Debug, Serialize)]
pub struct CapacityReport {
    pub capacity: f64,
    pub robin_constant: f64,
    /// Equilibrium mass carried by each curve.
    pub masses: Vec<f64>,
}

/// Capacity of the compact set bounded by the spec's curves, from the
/// first-kind logarithmic integral equation.
pub fn run_capacity(spec: &ProblemSpec) -> Result<CapacityReport> {
    spec.validate()?;
    let disc = spec.discretize().map_err(Error::at("geometry"))?;
    let cap = capacity_logkernel(&disc).map_err(Error::at("capacity"))?;
    Ok(CapacityReport {
        capacity: cap.capacity,
        robin_constant: cap.robin_constant,
        masses: cap.masses,
    })
}

/// Reads a problem file, or standard input for `-`.
pub fn read_spec(path: &Path) -> Result<ProblemSpec> {
    if path == Path::new("-") {
        let mut text = String::new();
        std::io::stdin().read_to_string(&mut text)?;
        return ProblemSpec::from_json(&text);
    }
    ProblemSpec::read(path)
}
