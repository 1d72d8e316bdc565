//! Result bundles: a directory holding
//!
//! - `problem.json`: the problem as solved (after command-line overrides),
//! - `params.json`: centers, exponents, capacity and headline residuals,
//! - `boundary.csv`: `t, eta_re, eta_im, phi_re, phi_im, component` per node,
//! - `diagnostics.json`: GMRES and Newton histories,
//! - `grid.csv` (optional): `|U(w)|` on a lattice, for contour plots.
//!
//! Reals are written with 17 significant digits, so reading a bundle back
//! gives the same `f64` values.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Deserializer, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter};

use super::spec::{from_cx, to_cx, Cx, ProblemSpec};
use crate::bie::BieStage;
use crate::error::{Error, Result};
use crate::geometry::Discretization;
use crate::newton::{Diagnostics, LemniscaticDomain, MapSolution};
use crate::C64;

pub const PROBLEM: &str = "problem.json";
pub const PARAMS: &str = "params.json";
pub const BOUNDARY: &str = "boundary.csv";
pub const DIAGNOSTICS: &str = "diagnostics.json";
pub const GRID: &str = "grid.csv";

/// `v` with 17 significant digits.
pub fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

/// Pretty JSON whose floats carry 17 significant digits.
struct Digits17<'a>(PrettyFormatter<'a>);

impl Formatter for Digits17<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, v: f64) -> io::Result<()> {
        w.write_all(fmt17(v).as_bytes())
    }
    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, Digits17(PrettyFormatter::new()));
    value.serialize(&mut ser)?;
    out.push(b'\n');
    Ok(String::from_utf8(out).expect("serde_json writes UTF-8"))
}

/// Non-finite values are written as `null`; read them back as NaN.
fn nullable<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ParamsFile {
    pub converged: bool,
    pub ell: usize,
    pub n: usize,
    pub a: Vec<Cx>,
    pub m: Vec<f64>,
    pub tau: f64,
    pub log_tau: f64,
    pub alphas: Vec<Cx>,
    pub newton_iterations: usize,
    #[serde(deserialize_with = "nullable")]
    pub residual_norm: f64,
    #[serde(deserialize_with = "nullable")]
    pub lemniscate_residual: f64,
    #[serde(deserialize_with = "nullable")]
    pub lemniscate_residual_midpoint: f64,
    #[serde(deserialize_with = "nullable")]
    pub moment_residual: f64,
}

#[derive(Serialize)]
struct DiagnosticsFile<'a> {
    converged: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    failure: Option<&'a str>,
    #[serde(flatten)]
    diagnostics: &'a Diagnostics,
    /// `max_k |Σ_j m_j h_{k,j} − log τ|` for the solved parameters.
    parameter_row_consistency: f64,
}

/// Everything a solve run writes.
pub struct Bundle<'a> {
    pub spec: &'a ProblemSpec,
    pub disc: &'a Discretization,
    pub stage: &'a BieStage,
    pub map: &'a MapSolution,
    /// `None` on convergence, else why Newton stopped.
    pub failure: Option<&'a str>,
}

impl Bundle<'_> {
    fn params(&self) -> ParamsFile {
        let d = &self.map.diagnostics;
        let p = &self.stage.params;
        ParamsFile {
            converged: self.failure.is_none(),
            ell: self.disc.ell,
            n: self.disc.n,
            a: to_cx(&self.map.domain.centers),
            m: p.m.clone(),
            tau: p.tau,
            log_tau: p.log_tau,
            alphas: to_cx(&self.stage.alphas),
            newton_iterations: d.newton_iterations,
            residual_norm: d.residual_norm,
            lemniscate_residual: d.lemniscate_residual,
            lemniscate_residual_midpoint: d.lemniscate_residual_midpoint,
            moment_residual: d.moment_residual,
        }
    }

    fn write_into(&self, dir: &Path) -> Result<()> {
        let mut spec = self.spec.clone();
        spec.outputs = None;
        fs::write(dir.join(PROBLEM), to_json(&spec)?)?;
        fs::write(dir.join(PARAMS), to_json(&self.params())?)?;
        let diag = DiagnosticsFile {
            converged: self.failure.is_none(),
            failure: self.failure,
            diagnostics: &self.map.diagnostics,
            parameter_row_consistency: crate::bie::row_consistency(&self.stage.components, &self.stage.params),
        };
        fs::write(dir.join(DIAGNOSTICS), to_json(&diag)?)?;

        let mut csv = csv::Writer::from_path(dir.join(BOUNDARY))?;
        csv.write_record(["t", "eta_re", "eta_im", "phi_re", "phi_im", "component"])?;
        for i in 0..self.disc.len() {
            let (eta, w) = (self.disc.eta[i], self.map.boundary_w[i]);
            csv.write_record([
                fmt17(self.disc.nodes[i]),
                fmt17(eta.re),
                fmt17(eta.im),
                fmt17(w.re),
                fmt17(w.im),
                self.disc.component_of[i].to_string(),
            ])?;
        }
        csv.flush()?;
        Ok(())
    }

    /// Writes the bundle to `dir`, replacing an earlier bundle there. Files
    /// are assembled in a sibling directory first, so an error leaves
    /// nothing behind.
    pub fn write(&self, dir: &Path) -> Result<()> {
        atomic_dir(dir, |tmp| self.write_into(tmp))
    }
}

fn atomic_dir(dir: &Path, fill: impl FnOnce(&Path) -> Result<()>) -> Result<()> {
    let name = dir
        .file_name()
        .ok_or_else(|| Error::InvalidInput(format!("bad output directory {}", dir.display())))?
        .to_string_lossy()
        .into_owned();
    let parent = match dir.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    fs::create_dir_all(&parent)?;
    if dir.exists() && !replaceable(dir)? {
        return Err(Error::InvalidInput(format!(
            "{} exists and is not a result bundle; refusing to overwrite it",
            dir.display()
        )));
    }
    let tmp = parent.join(format!(".{name}.partial-{}", std::process::id()));
    if tmp.exists() {
        fs::remove_dir_all(&tmp)?;
    }
    fs::create_dir(&tmp)?;
    if let Err(e) = fill(&tmp) {
        let _ = fs::remove_dir_all(&tmp);
        return Err(e);
    }
    if dir.exists() {
        fs::remove_dir_all(dir)?;
    }
    fs::rename(&tmp, dir)?;
    Ok(())
}

/// An empty directory or an earlier bundle.
fn replaceable(dir: &Path) -> Result<bool> {
    if !dir.is_dir() {
        return Ok(false);
    }
    if dir.join(PARAMS).is_file() {
        return Ok(true);
    }
    Ok(fs::read_dir(dir)?.next().is_none())
}

/// A bundle read back from disk.
#[derive(Clone, Debug)]
pub struct LoadedBundle {
    pub spec: ProblemSpec,
    pub params: ParamsFile,
    pub t: Vec<f64>,
    pub eta: Vec<C64>,
    pub w: Vec<C64>,
    pub component: Vec<usize>,
}

#[derive(Deserialize)]
struct BoundaryRow {
    t: f64,
    eta_re: f64,
    eta_im: f64,
    phi_re: f64,
    phi_im: f64,
    component: usize,
}

impl LoadedBundle {
    pub fn read(dir: &Path) -> Result<Self> {
        let missing = |f: &str| Error::InvalidInput(format!("{} is not a result bundle (no {f})", dir.display()));
        for f in [PROBLEM, PARAMS, BOUNDARY] {
            if !dir.join(f).is_file() {
                return Err(missing(f));
            }
        }
        let spec = ProblemSpec::from_json(&fs::read_to_string(dir.join(PROBLEM))?)?;
        let params: ParamsFile = serde_json::from_str(&fs::read_to_string(dir.join(PARAMS))?)?;
        let mut reader = csv::Reader::from_path(dir.join(BOUNDARY))?;
        let (mut t, mut eta, mut w, mut component) = (vec![], vec![], vec![], vec![]);
        for row in reader.deserialize() {
            let row: BoundaryRow = row?;
            t.push(row.t);
            eta.push(C64::new(row.eta_re, row.eta_im));
            w.push(C64::new(row.phi_re, row.phi_im));
            component.push(row.component);
        }
        let ell = spec.curves.len();
        if params.ell != ell || params.n != spec.n || params.a.len() != ell || params.m.len() != ell {
            return Err(Error::InvalidInput("params.json does not match problem.json".into()));
        }
        if w.len() != ell * spec.n {
            return Err(Error::LengthMismatch {
                expected: ell * spec.n,
                got: w.len(),
            });
        }
        Ok(LoadedBundle {
            spec,
            params,
            t,
            eta,
            w,
            component,
        })
    }

    pub fn domain(&self) -> LemniscaticDomain {
        LemniscaticDomain {
            centers: from_cx(&self.params.a),
            exponents: self.params.m.clone(),
            capacity: self.params.tau,
        }
    }

    pub fn centers(&self) -> Vec<C64> {
        from_cx(&self.params.a)
    }
}

/// Writes `grid.csv` into `dir`: `|U(w)| = Π_j |w − a_j|^{m_j}` on an
/// `nx × ny` lattice covering the boundary values with a margin of
/// `margin` times their extent on every side.
pub fn write_grid(dir: &Path, bundle: &LoadedBundle, nx: usize, ny: usize, margin: f64) -> Result<PathBuf> {
    if nx < 2 || ny < 2 {
        return Err(Error::InvalidInput("grid needs at least 2 points per side".into()));
    }
    let domain = bundle.domain();
    let (mut lo, mut hi) = (C64::new(f64::INFINITY, f64::INFINITY), C64::new(f64::NEG_INFINITY, f64::NEG_INFINITY));
    for z in &bundle.w {
        lo = C64::new(lo.re.min(z.re), lo.im.min(z.im));
        hi = C64::new(hi.re.max(z.re), hi.im.max(z.im));
    }
    let pad = (hi - lo) * margin;
    let (lo, hi) = (lo - pad, hi + pad);
    let path = dir.join(GRID);
    let tmp = dir.join(format!(".{GRID}.partial-{}", std::process::id()));
    let write = || -> Result<()> {
        let mut csv = csv::Writer::from_path(&tmp)?;
        csv.write_record(["x", "y", "modulus"])?;
        for iy in 0..ny {
            let y = lo.im + (hi.im - lo.im) * iy as f64 / (ny - 1) as f64;
            for ix in 0..nx {
                let x = lo.re + (hi.re - lo.re) * ix as f64 / (nx - 1) as f64;
                let modulus = domain.modulus(C64::new(x, y));
                csv.write_record([fmt17(x), fmt17(y), fmt17(modulus)])?;
            }
        }
        csv.flush()?;
        Ok(())
    };
    if let Err(e) = write() {
        let _ = fs::remove_file(&tmp);
        return Err(e);
    }
    fs::rename(&tmp, &path)?;
    Ok(path)
}
