//! The Gaussian base measure μ, the Gibbs measures, and the renormalization
//! functionals.
//!
//! μ is the law of the random Fourier series û(n) = g_n/(1+|n|^α)^{1/2} with
//! independent standard complex Gaussians g_n = (h_n + i·l_n)/√2, E|g_n|² = 1.
//! Because E‖Π_N u‖²_{L²} = α_N = Σ_{|n|≤N}(1+|n|^α)^{-1} diverges for α ≤ 1,
//! the quartic potential is renormalized:
//!
//! ```text
//!   f_N(u) = ½‖Π_N u‖⁴_{L⁴} − 2α_N‖Π_N u‖²_{L²} + α_N²,
//!   b_N(u) = ‖Π_N u‖²_{L²} − α_N,
//!   g_N(u) = ½‖Π_N u‖⁴_{L⁴} − ‖Π_N u‖⁴_{L²}   ( = f_N − b_N² ),
//! ```
//!
//! and the Gibbs measure is dρ_N ∝ e^{−f_N}dμ. Writing
//! f_N + α_N² = ½∫(|Π_N u|² − 2α_N)² ≥ 0 shows e^{−f_N−α_N²} ≤ 1, which is
//! what makes the rejection sampler valid. The renormalized nonlinearity is
//! F_N(u) = Π_N(|Π_N u|²Π_N u) − 2α_N Π_N u = G_N(u) + 2 b_N(u) Π_N u.

use crate::error::Error;
use crate::real::{real, Real};
use crate::rng::{zigzag, Stream};
use crate::spectral::{cubic_nonlinearity, grid_lp_norm, FourierState, SpectralGrid};
use num_complex::Complex;

/// α_N and its ingredients for one (α, N).
#[derive(Clone, Copy, Debug)]
pub struct RenormConstants<T> {
    alpha: T,
    n: usize,
    alpha_n: T,
}

impl<T: Real> RenormConstants<T> {
    pub fn new(alpha: T, n: usize) -> Self {
        Self {
            alpha,
            n,
            alpha_n: alpha_n(alpha, n),
        }
    }

    /// Same cutoff with the renormalization constant replaced (used by the
    /// degenerate-renormalization checks, where α_N := 0 must reproduce the
    /// truncated flow exactly).
    pub fn with_constant(self, alpha_n: T) -> Self {
        Self { alpha_n, ..self }
    }

    pub fn alpha(&self) -> T {
        self.alpha
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn alpha_n(&self) -> T {
        self.alpha_n
    }
}

/// α_N = E_μ‖Π_N u‖²_{L²} = Σ_{|n|≤N} (1+|n|^α)^{-1}.
pub fn alpha_n<T: Real>(alpha: T, n: usize) -> T {
    let mut sum = T::one(); // n = 0 term
    for m in 1..=n as i64 {
        let w = T::one() + crate::real::mode_pow(m, alpha);
        sum += (T::one() + T::one()) / w;
    }
    sum
}

/// Draw u ~ μ truncated to |n| ≤ K.
///
/// Each mode consumes the counters (2·zigzag(n), 2·zigzag(n)+1) of the given
/// stream, so draws for a mode are identical across different K — the
/// shared-ω coupling used by every N-scan. Sampling arithmetic is done in f64
/// and converted, keeping the realized ω independent of the scalar type.
pub fn sample_mu<T: Real>(stream: &Stream, alpha: f64, k: usize) -> FourierState<T> {
    let mut u = FourierState::zero(k);
    for n in -(k as i64)..=(k as i64) {
        let (h, l) = stream.normal_pair(2 * zigzag(n));
        let w = 1.0 + crate::real::mode_pow::<f64>(n, alpha);
        // û(n) = g_n/[n]^{α/2} with g_n = (h+il)/√2.
        let scale = 1.0 / (2.0 * w).sqrt();
        u.set(n, Complex::new(real::<T>(h * scale), real::<T>(l * scale)));
    }
    u
}

/// The renormalization functionals of one state.
#[derive(Clone, Copy, Debug)]
pub struct Functionals<T> {
    /// V = ½‖Π_N u‖⁴_{L⁴} (unrenormalized potential).
    pub v: T,
    /// b_N = ‖Π_N u‖²_{L²} − α_N.
    pub b_n: T,
    /// f_N = ½‖·‖⁴_{L⁴} − 2α_N‖·‖²_{L²} + α_N².
    pub f_n: T,
    /// g_N = ½‖·‖⁴_{L⁴} − ‖·‖⁴_{L²}.
    pub g_n: T,
}

/// Evaluate V, b_N, f_N, g_N on w = Π_N u.
pub fn functionals<T: Real>(
    u: &FourierState<T>,
    rc: &RenormConstants<T>,
    grid: &SpectralGrid<T>,
) -> Result<Functionals<T>, Error> {
    let w = u.project(rc.n());
    let l2_sq = w.l2_sq();
    let l4 = grid_lp_norm(&w, real(4.0), grid)?;
    let quartic = l4.powi(4);
    let half = real::<T>(0.5);
    let a = rc.alpha_n();
    Ok(Functionals {
        v: half * quartic,
        b_n: l2_sq - a,
        f_n: half * quartic - (a + a) * l2_sq + a * a,
        g_n: half * quartic - l2_sq * l2_sq,
    })
}

/// F_N(u) = Π_N(|Π_N u|² Π_N u) − 2α_N Π_N u.
pub fn renorm_nonlinearity<T: Real>(
    u: &FourierState<T>,
    rc: &RenormConstants<T>,
    grid: &SpectralGrid<T>,
) -> Result<FourierState<T>, Error> {
    let cubic = cubic_nonlinearity(u, rc.n(), grid)?;
    let c = rc.alpha_n() + rc.alpha_n();
    Ok(cubic.axpy(Complex::new(-c, T::zero()), &u.project(rc.n())))
}

/// G_N(u) = Π_N(|Π_N u|² Π_N u) − 2‖Π_N u‖²_{L²} Π_N u, the mass-centered
/// (random-constant) form appearing in F_N = G_N + 2 b_N Π_N u.
pub fn mass_centered_nonlinearity<T: Real>(
    u: &FourierState<T>,
    n: usize,
    grid: &SpectralGrid<T>,
) -> Result<FourierState<T>, Error> {
    let w = u.project(n);
    let cubic = cubic_nonlinearity(&w, n, grid)?;
    let c = real::<T>(2.0) * w.l2_sq();
    Ok(cubic.axpy(Complex::new(-c, T::zero()), &w))
}

/// Which Gibbs density reweights μ.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GibbsDensity {
    /// e^{−scale·f_N}; scale = 1 is the invariant Gibbs weight. Other scales
    /// are deliberately *wrong* densities (the doubled-constant negative
    /// control uses 2).
    Renormalized { exponent_scale: f64 },
    /// e^{−V} = e^{−½‖·‖⁴}; the honest density for α > 1 where no
    /// renormalization is needed.
    Unrenormalized,
}

impl GibbsDensity {
    pub fn renormalized() -> Self {
        GibbsDensity::Renormalized { exponent_scale: 1.0 }
    }

    /// −log-density relative to μ, and the log of a rejection bound
    /// sup e^{−exponent}: f_N ≥ −α_N² gives e^{−f_N−α_N²} ≤ 1, while V ≥ 0
    /// gives e^{−V} ≤ 1 directly.
    fn exponent_and_bound<T: Real>(&self, f: &Functionals<T>, rc: &RenormConstants<T>) -> (T, T) {
        match *self {
            GibbsDensity::Renormalized { exponent_scale } => {
                let s = real::<T>(exponent_scale);
                let a2 = rc.alpha_n() * rc.alpha_n();
                (s * f.f_n, s * a2)
            }
            GibbsDensity::Unrenormalized => (f.v, T::zero()),
        }
    }
}

/// Sampling strategy for ρ_N.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RhoMode {
    /// Exact draws by accept/reject; acceptance decays like e^{−α_N²}, so
    /// this starves for small α / large N. The cap bounds the attempt loop.
    Rejection { max_attempts: u64 },
    /// u ~ μ carrying log_weight = −exponent for self-normalized averaging.
    Importance,
}

/// One draw under μ or ρ_N with its provenance.
#[derive(Clone, Debug)]
pub struct GibbsSample<T> {
    pub state: FourierState<T>,
    /// log dρ/dμ up to the (unknown) normalization; 0 for μ itself and for
    /// accepted rejection samples.
    pub log_weight: T,
    pub accepted: bool,
    /// RNG stream addresses that produced the sample: (stream key, attempt).
    pub seed_path: Vec<u64>,
}

/// Draw from ρ_N (law on E_N) by the requested strategy.
pub fn sample_rho<T: Real>(
    stream: &Stream,
    alpha: f64,
    n: usize,
    mode: RhoMode,
    density: GibbsDensity,
    grid: &SpectralGrid<T>,
) -> Result<GibbsSample<T>, Error> {
    let rc = RenormConstants::<T>::new(real(alpha), n);
    match mode {
        RhoMode::Importance => {
            let state = sample_mu::<T>(&stream.child(0), alpha, n);
            let f = functionals(&state, &rc, grid)?;
            let (exponent, _) = density.exponent_and_bound(&f, &rc);
            Ok(GibbsSample {
                state,
                log_weight: -exponent,
                accepted: true,
                seed_path: vec![stream.key(), 0],
            })
        }
        RhoMode::Rejection { max_attempts } => {
            for attempt in 0..max_attempts {
                let attempt_stream = stream.child(attempt);
                let state = sample_mu::<T>(&attempt_stream, alpha, n);
                let f = functionals(&state, &rc, grid)?;
                let (exponent, log_bound) = density.exponent_and_bound(&f, &rc);
                // accept w.p. e^{−exponent−log_bound} ∈ (0, 1]
                let log_accept = -(exponent + log_bound);
                // the coin lives on a child stream so it can never collide
                // with the per-mode counters consumed by sample_mu
                let coin = attempt_stream.child(1).uniform_open(0);
                if real::<T>(coin.ln()) < log_accept {
                    return Ok(GibbsSample {
                        state,
                        log_weight: T::zero(),
                        accepted: true,
                        seed_path: vec![stream.key(), attempt],
                    });
                }
            }
            Err(Error::AcceptanceStarvation {
                attempts: max_attempts,
                rate: 0.0,
            })
        }
    }
}

/// Monte Carlo estimate of E_μ[e^{−p·f_N}] with its standard error.
///
/// For α ∈ (7/8, 1] this is the partition-function integrand whose L^p
/// integrability the construction rests on; outside that window the routine
/// still reports (the integral may simply be large), it does not reject.
pub fn partition_estimates<T: Real>(
    stream: &Stream,
    alpha: f64,
    n: usize,
    p: f64,
    trials: u64,
    grid: &SpectralGrid<T>,
) -> Result<(f64, f64), Error> {
    let rc = RenormConstants::<T>::new(real(alpha), n);
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for trial in 0..trials {
        let u = sample_mu::<T>(&stream.child(trial), alpha, n);
        let f = functionals(&u, &rc, grid)?;
        let x = (-p * f.f_n.to_f64().unwrap()).exp();
        sum += x;
        sum_sq += x * x;
    }
    let t = trials as f64;
    let mean = sum / t;
    let var = (sum_sq / t - mean * mean).max(0.0) / (t - 1.0).max(1.0);
    Ok((mean, var.sqrt()))
}
