use crate::error::Error;
use crate::real::{real, Real};
use crate::spectral::FourierState;
use num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

/// FFT plans for one physical grid of G equispaced points x_j = j/G.
///
/// `to_grid` evaluates u(x_j) = Σ_n û(n) e^{2πin x_j} (an unnormalized inverse
/// DFT after scattering mode n into bin n mod G); `from_grid` inverts it with
/// the 1/G forward DFT. Plans are immutable and shareable across threads.
pub struct SpectralGrid<T: Real> {
    size: usize,
    fwd: Arc<dyn Fft<T>>,
    inv: Arc<dyn Fft<T>>,
}

impl<T: Real> SpectralGrid<T> {
    pub fn new(size: usize) -> Self {
        assert!(size > 0);
        let mut planner = FftPlanner::new();
        Self {
            size,
            fwd: planner.plan_fft_forward(size),
            inv: planner.plan_fft_inverse(size),
        }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// Bin index of integer mode n (n mod G).
    #[inline]
    pub fn bin(&self, n: i64) -> usize {
        let g = self.size as i64;
        n.rem_euclid(g) as usize
    }

    fn check_holds(&self, half_width: usize) -> Result<(), Error> {
        if self.size < 2 * half_width + 1 {
            Err(Error::Aliasing {
                grid: self.size,
                needed: half_width,
            })
        } else {
            Ok(())
        }
    }

    /// Physical samples u(x_j), j = 0..G.
    pub fn to_grid(&self, u: &FourierState<T>) -> Result<Vec<Complex<T>>, Error> {
        self.check_holds(u.populated_half_width())?;
        let mut buf = vec![Complex::new(T::zero(), T::zero()); self.size];
        self.scatter(u, &mut buf);
        self.inv.process(&mut buf);
        Ok(buf)
    }

    /// Recover û(n) on |n| ≤ k from physical samples (consumes the buffer).
    pub fn from_grid(&self, mut samples: Vec<Complex<T>>, k: usize) -> Result<FourierState<T>, Error> {
        assert_eq!(samples.len(), self.size);
        self.check_holds(k)?;
        self.fwd.process(&mut samples);
        Ok(self.gather(&samples, k))
    }

    /// Scatter coefficients into DFT bins (no transform). Accumulating keeps
    /// the operation safe when storage is wider than the populated range and
    /// two stored modes share a bin: the zero mode contributes nothing.
    pub fn scatter(&self, u: &FourierState<T>, buf: &mut [Complex<T>]) {
        buf.fill(Complex::new(T::zero(), T::zero()));
        for (n, z) in u.iter_modes() {
            buf[self.bin(n)] += z;
        }
    }

    /// Gather bins |n| ≤ k out of a forward-transformed buffer, scaling by 1/G.
    pub fn gather(&self, buf: &[Complex<T>], k: usize) -> FourierState<T> {
        let scale = T::one() / real::<T>(self.size as f64);
        let mut u = FourierState::zero(k);
        for n in -(k as i64)..=(k as i64) {
            u.set(n, buf[self.bin(n)] * scale);
        }
        u
    }

    /// The unnormalized forward plan (Σ e^{−2πijk/G}); for callers managing
    /// their own buffers and scratch.
    pub fn forward_plan(&self) -> &Arc<dyn Fft<T>> {
        &self.fwd
    }

    /// The unnormalized inverse plan (Σ e^{+2πijk/G}).
    pub fn inverse_plan(&self) -> &Arc<dyn Fft<T>> {
        &self.inv
    }
}
