//! End-to-end pipeline: integral equations, parameters, right side, Newton.

use crate::bie::{self, BieOptions, BieStage};
use crate::error::{Error, Result};
use crate::geometry::Discretization;
use crate::newton::{newton_solve, GmresStats, MapSolution, NewtonOptions, StartOptions};
use crate::C64;

#[derive(Clone, Debug, Default)]
pub struct SolveOptions {
    pub bie: BieOptions,
    pub start: StartOptions,
    pub newton: NewtonOptions,
}

#[derive(Clone, Debug)]
pub struct Solved {
    pub bie: BieStage,
    pub map: MapSolution,
}

/// Integral equations, parameter system and Newton right side. Errors are
/// tagged with the stage name.
pub fn prepare(disc: &Discretization, alphas: Option<&[C64]>, opts: &BieOptions) -> Result<BieStage> {
    let alphas = match alphas {
        Some(a) if a.len() != disc.ell => {
            return Err(Error::at("bie")(Error::InvalidInput(format!(
                "expected {} auxiliary points, got {}",
                disc.ell,
                a.len()
            ))))
        }
        Some(a) => a.to_vec(),
        None => bie::default_alphas(disc).map_err(Error::at("bie"))?,
    };
    let components = alphas
        .iter()
        .enumerate()
        .map(|(j, &a)| bie::solve_component(disc, &bie::gamma_j(disc, j, a)?, opts))
        .collect::<Result<Vec<_>>>()
        .map_err(Error::at("bie"))?;
    let params =
        bie::solve_parameters(&bie::h_matrix(&components)).map_err(Error::at("parameters"))?;
    let rhs = bie::assemble_rhs(disc, &alphas, &components, &params).map_err(Error::at("rhs"))?;
    Ok(BieStage {
        alphas,
        components,
        params,
        rhs,
    })
}

/// Per-component GMRES statistics of a prepared stage.
pub fn gmres_stats(stage: &BieStage) -> GmresStats {
    let c = &stage.components;
    GmresStats {
        iterations: c.iter().map(|c| c.gmres_iters).collect(),
        relres: c.iter().map(|c| c.gmres_relres).collect(),
        fallback: c.iter().map(|c| c.fallback).collect(),
        h_spread: c.iter().map(|c| c.h_spread).collect(),
    }
}

/// Runs every stage on `disc`.
pub fn solve(disc: &Discretization, alphas: Option<&[C64]>, opts: &SolveOptions) -> Result<Solved> {
    let bie = prepare(disc, alphas, &opts.bie)?;
    let mut map = newton_solve(disc, &bie.rhs, &bie.params, &opts.start, &opts.newton)
        .map_err(Error::at("newton"))?;
    map.diagnostics.gmres = gmres_stats(&bie);
    Ok(Solved { bie, map })
}
