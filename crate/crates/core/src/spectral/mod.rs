//! Fourier-side representation of fields on the unit torus: states, the
//! dispersion symbol, grid transforms, norms, the three cubic nonlinearities
//! and the gauge transform.

mod grid;
mod nonlinear;
mod norms;
mod params;
mod state;

pub use grid::SpectralGrid;
pub use nonlinear::{
    cubic_nonlinearity, gauge, trilinear_n0, trilinear_n1, wick_nonlinearity, GaugeDirection,
};
pub use norms::{
    fourier_lebesgue_norm, grid_lp_norm, hamiltonian, linear_flow, mass, norm, sobolev_norm,
    NormKind,
};
pub use params::{DispersionSymbol, ModelParams, TorusConvention};
pub use state::FourierState;
