//! Numerical conformal maps from unbounded multiply connected domains onto
//! lemniscatic domains.
//!
//! Given `ℓ` disjoint Jordan curves `Γ_1, …, Γ_ℓ` bounding an unbounded
//! domain `K`, the map `Φ : K → L` with `Φ(z) = z + O(1/z)` sends `K` onto
//!
//! ```text
//! L = { w : Π_j |w − a_j|^{m_j} > τ },   Σ_j m_j = 1,
//! ```
//!
//! where `τ` is the logarithmic capacity of the complement of `K`.
//!
//! The pipeline is:
//!
//! 1. [`geometry`]: parametrized boundary curves and the equispaced node grid.
//! 2. [`bie`]: one Neumann-kernel integral equation per boundary component,
//!    followed by a small linear system for the exponents `m_j` and `log τ`.
//! 3. [`newton`]: Newton's method on the boundary values `w_i = Φ(η(t_i))`
//!    and centers `a_j`, with the Jacobian reduced to an `ℓ × ℓ` Schur system.
//! 4. [`cauchy`]: interior values of `Φ` from the Cauchy integral of `Φ(z) − z`.
//!
//! [`oracle`] holds independent reference computations (equilibrium-measure
//! capacity, dense Jacobians, exact fixtures) used by the tests, and [`cli`]
//! wires everything to JSON problem files and CSV/JSON result bundles.

pub mod bie;
pub mod cauchy;
pub mod cli;
pub mod error;
pub mod geometry;
pub mod gmres;
pub mod kernels;
pub mod newton;
pub mod oracle;
pub mod presets;
pub mod solver;

pub use num_complex::Complex64 as C64;

pub use bie::{BoundaryRhs, CanonicalParameters, ComponentSolution};
pub use cauchy::{EvaluationRequest, NearBoundaryPolicy, PointError};
pub use error::{Error, Result};
pub use geometry::{BoundaryCurve, CurveShape, Discretization, DiscretizeOptions};
pub use newton::{LemniscaticDomain, MapSolution, NewtonOptions, NewtonState, StartOptions};
pub use solver::{solve, SolveOptions, Solved};

/// Imaginary unit.
pub const I: C64 = C64 { re: 0.0, im: 1.0 };
