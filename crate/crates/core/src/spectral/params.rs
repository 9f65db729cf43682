use crate::error::Error;
use crate::real::{mode_pow, real, Real};

/// Geometry convention tag.
///
/// Everything in this crate is written for the unit-length torus with
/// orthonormal characters e^{2πinx}; the tag exists so that the convention is
/// explicit in configuration echoes rather than implicit folklore.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum TorusConvention {
    #[default]
    UnitLength,
}

/// Physical/discretization parameters for one model instance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelParams<T> {
    alpha: T,
    cutoff_n: usize,
    grid_size: usize,
    torus: TorusConvention,
}

impl<T: Real> ModelParams<T> {
    /// Validated constructor with the smallest admissible power-of-two grid
    /// (≥ 4N+2, so cubic products of E_N fields are alias-free and exact).
    pub fn new(alpha: T, cutoff_n: usize) -> Result<Self, Error> {
        Self::with_grid_size(alpha, cutoff_n, (4 * cutoff_n + 2).next_power_of_two())
    }

    /// Constructor with an explicit grid size (must still be a dealiasing
    /// power of two).
    pub fn with_grid_size(alpha: T, cutoff_n: usize, grid_size: usize) -> Result<Self, Error> {
        if !(alpha > real(0.5) && alpha <= real(2.0)) {
            return Err(Error::InvalidParameter(format!(
                "dispersion exponent must satisfy 1/2 < alpha <= 2, got {alpha}"
            )));
        }
        if grid_size < 4 * cutoff_n + 2 {
            return Err(Error::InvalidParameter(format!(
                "grid size {grid_size} below the dealiasing bound {} for cutoff {cutoff_n}",
                4 * cutoff_n + 2
            )));
        }
        if !grid_size.is_power_of_two() {
            return Err(Error::InvalidParameter(format!(
                "grid size must be a power of two, got {grid_size}"
            )));
        }
        Ok(Self {
            alpha,
            cutoff_n,
            grid_size,
            torus: TorusConvention::UnitLength,
        })
    }

    pub fn alpha(&self) -> T {
        self.alpha
    }

    pub fn cutoff_n(&self) -> usize {
        self.cutoff_n
    }

    pub fn grid_size(&self) -> usize {
        self.grid_size
    }

    pub fn torus(&self) -> TorusConvention {
        self.torus
    }

    pub fn symbol(&self) -> DispersionSymbol<T> {
        DispersionSymbol::new(self.alpha, self.cutoff_n)
    }
}

/// The dispersion multiplier λ(n) = |n|^α and the Gaussian covariance weight
/// w(n) = 1 + |n|^α (the square of [n]^{α/2}), tabulated over |n| ≤ K.
#[derive(Clone, Debug)]
pub struct DispersionSymbol<T> {
    alpha: T,
    half_width: usize,
    lambda_abs: Vec<T>,
    weight_abs: Vec<T>,
}

impl<T: Real> DispersionSymbol<T> {
    pub fn new(alpha: T, half_width: usize) -> Self {
        let lambda_abs: Vec<T> = (0..=half_width as i64).map(|n| mode_pow(n, alpha)).collect();
        let weight_abs = lambda_abs.iter().map(|&l| T::one() + l).collect();
        Self {
            alpha,
            half_width,
            lambda_abs,
            weight_abs,
        }
    }

    pub fn alpha(&self) -> T {
        self.alpha
    }

    pub fn half_width(&self) -> usize {
        self.half_width
    }

    /// λ(n) = |n|^α; symmetric, λ(0) = 0.
    #[inline]
    pub fn lambda(&self, n: i64) -> T {
        self.lambda_abs[n.unsigned_abs() as usize]
    }

    /// w(n) = 1 + |n|^α ≥ 1.
    #[inline]
    pub fn weight(&self, n: i64) -> T {
        self.weight_abs[n.unsigned_abs() as usize]
    }
}
