use crate::error::Error;
use crate::real::Real;
use num_complex::Complex;

/// A field on the torus in Fourier representation: complex coefficients û(n)
/// on the symmetric mode range n ∈ [−K, K].
///
/// The storage half-width K doubles as the support tag: a state lies in
/// E_N = span{e^{2πinx} : |n| ≤ N} exactly when its half-width is ≤ N (so the
/// invariant "coefficients vanish beyond the tag" holds by construction), and
/// [`project`](Self::project) trims storage accordingly. Coefficients are in
/// the orthonormal-character convention, so Σ|û(n)|² is the squared L² norm.
#[derive(Clone, Debug, PartialEq)]
pub struct FourierState<T> {
    half_width: usize,
    coeffs: Vec<Complex<T>>,
}

impl<T: Real> FourierState<T> {
    pub fn zero(half_width: usize) -> Self {
        Self {
            half_width,
            coeffs: vec![Complex::new(T::zero(), T::zero()); 2 * half_width + 1],
        }
    }

    /// Wrap an odd-length coefficient vector laid out as n = −K..K.
    pub fn from_coeffs(coeffs: Vec<Complex<T>>) -> Result<Self, Error> {
        if coeffs.len() % 2 != 1 {
            return Err(Error::InvalidParameter(format!(
                "coefficient vector must have odd length 2K+1, got {}",
                coeffs.len()
            )));
        }
        Ok(Self {
            half_width: (coeffs.len() - 1) / 2,
            coeffs,
        })
    }

    /// Build from sparse (mode, amplitude) pairs.
    pub fn from_modes(half_width: usize, modes: &[(i64, Complex<T>)]) -> Self {
        let mut u = Self::zero(half_width);
        for &(n, z) in modes {
            u.set(n, z);
        }
        u
    }

    /// c·e_k on storage wide enough to hold it.
    pub fn single_mode(half_width: usize, k: i64, c: Complex<T>) -> Self {
        assert!(k.unsigned_abs() as usize <= half_width);
        Self::from_modes(half_width, &[(k, c)])
    }

    pub fn half_width(&self) -> usize {
        self.half_width
    }

    pub fn coeffs(&self) -> &[Complex<T>] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex<T>] {
        &mut self.coeffs
    }

    #[inline]
    fn idx(&self, n: i64) -> usize {
        (n + self.half_width as i64) as usize
    }

    /// û(n); zero outside the stored range.
    #[inline]
    pub fn get(&self, n: i64) -> Complex<T> {
        if n.unsigned_abs() as usize > self.half_width {
            Complex::new(T::zero(), T::zero())
        } else {
            self.coeffs[self.idx(n)]
        }
    }

    /// Set û(n); the mode must lie in the stored range.
    #[inline]
    pub fn set(&mut self, n: i64, z: Complex<T>) {
        assert!(
            n.unsigned_abs() as usize <= self.half_width,
            "mode {n} outside storage half-width {}",
            self.half_width
        );
        let i = self.idx(n);
        self.coeffs[i] = z;
    }

    /// (n, û(n)) over the stored range.
    pub fn iter_modes(&self) -> impl Iterator<Item = (i64, Complex<T>)> + '_ {
        let k = self.half_width as i64;
        (-k..=k).map(move |n| (n, self.coeffs[self.idx(n)]))
    }

    /// Galerkin projection Π_N; trims storage, so the result is tagged as
    /// lying in E_N. N beyond the stored range returns the state unchanged.
    pub fn project(&self, n: usize) -> Self {
        if n >= self.half_width {
            return self.clone();
        }
        Self {
            half_width: n,
            coeffs: self.coeffs[self.half_width - n..=self.half_width + n].to_vec(),
        }
    }

    /// Same coefficients on storage widened to K' ≥ K.
    pub fn padded(&self, half_width: usize) -> Self {
        assert!(half_width >= self.half_width);
        let mut u = Self::zero(half_width);
        for (n, z) in self.iter_modes() {
            u.set(n, z);
        }
        u
    }

    /// Largest |n| carrying a nonzero coefficient (0 for the zero state).
    pub fn populated_half_width(&self) -> usize {
        self.iter_modes()
            .filter(|(_, z)| !(z.re.is_zero() && z.im.is_zero()))
            .map(|(n, _)| n.unsigned_abs() as usize)
            .max()
            .unwrap_or(0)
    }

    /// True when every populated coefficient lies in E_N.
    pub fn supported_within(&self, n: usize) -> bool {
        self.iter_modes()
            .all(|(m, z)| m.unsigned_abs() as usize <= n || (z.re.is_zero() && z.im.is_zero()))
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Σ|û(n)|² (squared L² norm; the conserved mass).
    pub fn l2_sq(&self) -> T {
        self.coeffs.iter().map(|z| z.norm_sqr()).sum()
    }

    /// ℓ² pairing Σ û(n)·conj(v̂(n)).
    pub fn inner(&self, other: &Self) -> Complex<T> {
        let k = self.half_width.max(other.half_width) as i64;
        let mut acc = Complex::new(T::zero(), T::zero());
        for n in -k..=k {
            acc += self.get(n) * other.get(n).conj();
        }
        acc
    }

    pub fn scaled(&self, c: Complex<T>) -> Self {
        Self {
            half_width: self.half_width,
            coeffs: self.coeffs.iter().map(|&z| z * c).collect(),
        }
    }

    /// self + c·other, on storage covering both.
    pub fn axpy(&self, c: Complex<T>, other: &Self) -> Self {
        let k = self.half_width.max(other.half_width);
        let mut out = Self::zero(k);
        for n in -(k as i64)..=(k as i64) {
            out.set(n, self.get(n) + c * other.get(n));
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        self.axpy(Complex::new(T::one(), T::zero()), other)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.axpy(Complex::new(-T::one(), T::zero()), other)
    }

    /// max_n |û(n) − v̂(n)| — handy uniform metric for oracle comparisons.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        let k = self.half_width.max(other.half_width) as i64;
        let mut m = T::zero();
        for n in -k..=k {
            m = m.max((self.get(n) - other.get(n)).norm());
        }
        m
    }
}
