//! Pseudospectral simulator and stochastic verification harness for the 1-D
//! periodic defocusing cubic fractional NLS
//!
//! ```text
//!     i ∂_t u + |D_x|^α u + |u|² u = 0,   x ∈ T = R/Z,  1/2 < α ≤ 2,
//! ```
//!
//! together with its Galerkin truncation to E_N = span{e^{2πinx} : |n| ≤ N},
//! the renormalized and Wick-ordered variants of the truncated flow, and the
//! Gaussian / Gibbs measures those flows leave invariant.
//!
//! Conventions (fixed throughout):
//! * unit-length torus with orthonormal characters e_n(x) = e^{2πinx};
//! * the dispersion multiplier acts on the integer mode index, |D_x|^α ↦ |n|^α;
//! * mass M(u) = Σ|û(n)|², energy H(u) = Σ|n|^α|û(n)|² + ½‖u‖⁴_{L⁴}.
//!
//! The crate is layered as
//! * [`spectral`] — states, transforms, norms, nonlinearities, gauge;
//! * [`gibbs`] — Gaussian/Gibbs sampling and the renormalization functionals;
//! * [`dynamics`] — time integration of the three flows with conservation logs;
//! * [`resonance`] — resonance function, lattice counting, Strichartz and
//!   Bourgain-norm probes;
//! * [`experiments`] — seeded statistical experiments with tabular reports;
//! * [`rng`] — a splittable counter-based generator for reproducible parallel
//!   Monte Carlo.
//!
//! Numerical kernels are generic over the scalar type through [`real::Real`];
//! the aliases below fix the f64 instantiation used by the experiment layer.

pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod gibbs;
pub mod real;
pub mod report;
pub mod resonance;
pub mod rng;
pub mod spectral;
pub mod stats;

pub use error::Error;

/// f64 field state — the instantiation all experiments run on.
pub type State64 = spectral::FourierState<f64>;
/// f32 field state — compiles against the same generic kernels; useful for
/// quick storage-heavy scans where 7 digits suffice.
pub type State32 = spectral::FourierState<f32>;
pub type Params64 = spectral::ModelParams<f64>;
pub type Symbol64 = spectral::DispersionSymbol<f64>;
pub type Grid64 = spectral::SpectralGrid<f64>;
pub type Trajectory64 = dynamics::Trajectory<f64>;

pub type Result<T, E = Error> = std::result::Result<T, E>;
