use crate::error::Error;
use crate::real::{bracket, real, Real};
use crate::spectral::{DispersionSymbol, FourierState, SpectralGrid};

/// Norm selector for the single-entry [`norm`] dispatcher.
///
/// * `Sobolev(σ)`      — (Σ ⟨n⟩^{2σ}|û(n)|²)^{1/2}, ⟨n⟩ = (1+n²)^{1/2}
/// * `FourierLebesgue` — ‖⟨n⟩^s û(n)‖_{ℓ^r} (r = ∞ gives the sup)
/// * `GridLp(p)`       — (G^{-1} Σ_j |u(x_j)|^p)^{1/p}, unit-torus quadrature
#[derive(Clone, Copy, Debug)]
pub enum NormKind<T> {
    Sobolev(T),
    FourierLebesgue { s: T, r: T },
    GridLp(T),
}

pub fn norm<T: Real>(
    u: &FourierState<T>,
    kind: NormKind<T>,
    grid: Option<&SpectralGrid<T>>,
) -> Result<T, Error> {
    match kind {
        NormKind::Sobolev(sigma) => Ok(sobolev_norm(u, sigma)),
        NormKind::FourierLebesgue { s, r } => Ok(fourier_lebesgue_norm(u, s, r)),
        NormKind::GridLp(p) => {
            let grid = grid.ok_or_else(|| {
                Error::InvalidParameter("grid_lp norm needs a physical grid".into())
            })?;
            grid_lp_norm(u, p, grid)
        }
    }
}

/// H^σ norm (Σ ⟨n⟩^{2σ}|û(n)|²)^{1/2}.
pub fn sobolev_norm<T: Real>(u: &FourierState<T>, sigma: T) -> T {
    u.iter_modes()
        .map(|(n, z)| bracket::<T>(n).powf(sigma + sigma) * z.norm_sqr())
        .sum::<T>()
        .sqrt()
}

/// Fourier–Lebesgue norm ‖⟨n⟩^s û(n)‖_{ℓ^r}; r = ∞ returns the weighted sup.
pub fn fourier_lebesgue_norm<T: Real>(u: &FourierState<T>, s: T, r: T) -> T {
    if r == T::infinity() {
        return u
            .iter_modes()
            .map(|(n, z)| bracket::<T>(n).powf(s) * z.norm())
            .fold(T::zero(), |a, b| a.max(b));
    }
    assert!(r >= T::one(), "Fourier-Lebesgue exponent must satisfy r >= 1");
    u.iter_modes()
        .map(|(n, z)| (bracket::<T>(n).powf(s) * z.norm()).powf(r))
        .sum::<T>()
        .powf(T::one() / r)
}

/// L^p norm by grid quadrature, exact for band-limited integrands when the
/// grid is large enough (for p = 4 that is the dealiasing bound G ≥ 4K+2).
pub fn grid_lp_norm<T: Real>(u: &FourierState<T>, p: T, grid: &SpectralGrid<T>) -> Result<T, Error> {
    let k = u.populated_half_width();
    if p == real(4.0) && grid.size() < 4 * k + 2 {
        return Err(Error::Aliasing {
            grid: grid.size(),
            needed: 2 * k,
        });
    }
    assert!(p >= T::one(), "L^p exponent must satisfy p >= 1");
    let samples = grid.to_grid(u)?;
    let g = real::<T>(grid.size() as f64);
    let sum: T = if p == real(2.0) {
        samples.iter().map(|z| z.norm_sqr()).sum()
    } else if p == real(4.0) {
        samples
            .iter()
            .map(|z| {
                let m = z.norm_sqr();
                m * m
            })
            .sum()
    } else {
        samples.iter().map(|z| z.norm().powf(p)).sum()
    };
    Ok((sum / g).powf(T::one() / p))
}

/// Conserved mass M(u) = Σ|û(n)|² = ‖u‖²_{L²}.
pub fn mass<T: Real>(u: &FourierState<T>) -> T {
    u.l2_sq()
}

/// Conserved energy H(u) = Σ|n|^α|û(n)|² + ½‖u‖⁴_{L⁴}.
pub fn hamiltonian<T: Real>(
    u: &FourierState<T>,
    sym: &DispersionSymbol<T>,
    grid: &SpectralGrid<T>,
) -> Result<T, Error> {
    let kinetic: T = u.iter_modes().map(|(n, z)| sym.lambda(n) * z.norm_sqr()).sum();
    let l4 = grid_lp_norm(u, real(4.0), grid)?;
    Ok(kinetic + real::<T>(0.5) * l4.powi(4))
}

/// Free propagator S_α(t) = e^{it|D_x|^α}: multiplies û(n) by e^{it|n|^α}.
/// Exactly unitary mode-by-mode.
pub fn linear_flow<T: Real>(u: &FourierState<T>, t: T, sym: &DispersionSymbol<T>) -> FourierState<T> {
    let mut out = u.clone();
    for (n, z) in u.iter_modes() {
        let phase = t * sym.lambda(n);
        out.set(n, z * num_complex::Complex::new(phase.cos(), phase.sin()));
    }
    out
}
