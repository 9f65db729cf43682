use crate::error::Error;
use crate::real::{real, Real};
use crate::spectral::{FourierState, SpectralGrid};
use num_complex::Complex;

/// Π_N(|Π_N u|² Π_N u), computed exactly on a dealiased grid.
///
/// With G ≥ 4K+2 (K the support of Π_N u) the wrapped frequencies of the
/// cubic product never land on retained modes, so the grid evaluation equals
/// the triple convolution Σ_{n₁−n₂+n₃=n} û(n₁)conj(û)(n₂)û(n₃) exactly.
pub fn cubic_nonlinearity<T: Real>(
    u: &FourierState<T>,
    n: usize,
    grid: &SpectralGrid<T>,
) -> Result<FourierState<T>, Error> {
    let w = u.project(n);
    let support = w.populated_half_width();
    let k_out = n.min(3 * support);
    // Alias-free retention of mode m needs G ≥ 3·support + |m| + 1; for the
    // full projection window that is G ≥ 4N+2 when the field fills E_N.
    if grid.size() < 3 * support + k_out + 1 {
        return Err(Error::Aliasing {
            grid: grid.size(),
            needed: 3 * support + k_out,
        });
    }
    let mut samples = grid.to_grid(&w)?;
    for z in samples.iter_mut() {
        *z = *z * z.norm_sqr();
    }
    grid.from_grid(samples, k_out)
}

/// Diagonal trilinear form N₀(f₁,f₂,f₃)(n) = f̂₁(n)·conj(f̂₂)(n)·f̂₃(n).
pub fn trilinear_n0<T: Real>(
    f1: &FourierState<T>,
    f2: &FourierState<T>,
    f3: &FourierState<T>,
) -> FourierState<T> {
    let k = f1.half_width().min(f2.half_width()).min(f3.half_width());
    let mut out = FourierState::zero(k);
    for n in -(k as i64)..=(k as i64) {
        out.set(n, f1.get(n) * f2.get(n).conj() * f3.get(n));
    }
    out
}

/// Off-diagonal trilinear form: the convolution sum over n₂ ≠ n₁ and n₂ ≠ n₃
/// with output mode n₁ − n₂ + n₃.
///
/// Computed by inclusion–exclusion over the excluded index planes:
/// N₁ = T − ⟨f₁,f₂⟩f₃ − ⟨f₃,f₂⟩f₁ + N₀, where T is the full convolution,
/// evaluated by two direct O(K²) convolutions (exact, no grid involved).
pub fn trilinear_n1<T: Real>(
    f1: &FourierState<T>,
    f2: &FourierState<T>,
    f3: &FourierState<T>,
) -> FourierState<T> {
    let full = trilinear_full(f1, f2, f3);
    let ip12 = f1.inner(f2);
    let ip32 = f3.inner(f2);
    let n0 = trilinear_n0(f1, f2, f3);
    let k = full.half_width();
    let mut out = FourierState::zero(k);
    for n in -(k as i64)..=(k as i64) {
        out.set(
            n,
            full.get(n) - ip12 * f3.get(n) - ip32 * f1.get(n) + n0.get(n),
        );
    }
    out
}

/// Unrestricted convolution T(f₁,f₂,f₃)(n) = Σ_{n₁−n₂+n₃=n} f̂₁(n₁)conj(f̂₂)(n₂)f̂₃(n₃).
fn trilinear_full<T: Real>(
    f1: &FourierState<T>,
    f2: &FourierState<T>,
    f3: &FourierState<T>,
) -> FourierState<T> {
    let (k1, k2, k3) = (
        f1.half_width() as i64,
        f2.half_width() as i64,
        f3.half_width() as i64,
    );
    // h(p) = Σ_{n1-n2=p} f̂₁(n1)·conj(f̂₂)(n2), p ∈ [−(K1+K2), K1+K2].
    let kp = k1 + k2;
    let mut h: FourierState<T> = FourierState::zero(kp as usize);
    for n1 in -k1..=k1 {
        let a = f1.get(n1);
        if a.re.is_zero() && a.im.is_zero() {
            continue;
        }
        for n2 in -k2..=k2 {
            let p = n1 - n2;
            h.set(p, h.get(p) + a * f2.get(n2).conj());
        }
    }
    let kt = kp + k3;
    let mut out = FourierState::zero(kt as usize);
    for p in -kp..=kp {
        let b = h.get(p);
        if b.re.is_zero() && b.im.is_zero() {
            continue;
        }
        for n3 in -k3..=k3 {
            let n = p + n3;
            out.set(n, out.get(n) + b * f3.get(n3));
        }
    }
    out
}

/// Wick-ordered cubic nonlinearity N(v) = (|v|² − 2‖v‖²_{L²})v.
///
/// Equal to N₁(v,v,v) − N₀(v,v,v); the subtracted 2‖v‖² is the unit-torus
/// form of the mass coefficient. Output carries the full 3K support, so the
/// internal grid is sized for sextic dealiasing (G ≥ 6K+2).
pub fn wick_nonlinearity<T: Real>(v: &FourierState<T>) -> Result<FourierState<T>, Error> {
    let k = v.populated_half_width();
    let grid = SpectralGrid::new((6 * k + 2).next_power_of_two());
    let m2 = real::<T>(2.0) * v.l2_sq();
    let mut samples = grid.to_grid(v)?;
    for z in samples.iter_mut() {
        *z = *z * (z.norm_sqr() - m2);
    }
    grid.from_grid(samples, 3 * k)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GaugeDirection {
    Forward,
    Backward,
}

/// Gauge transform between the truncated and Wick-ordered flows: forward maps
/// u(t) ↦ v(t) = u(t)·e^{−2it·mass0} with mass0 = M(u(0)); backward inverts.
///
/// The sign is fixed by requiring that v solves the Wick equation whenever u
/// solves the truncated one (single-mode closed forms confirm it).
pub fn gauge<T: Real>(
    u: &FourierState<T>,
    t: T,
    mass0: T,
    direction: GaugeDirection,
) -> FourierState<T> {
    let theta = match direction {
        GaugeDirection::Forward => -real::<T>(2.0) * t * mass0,
        GaugeDirection::Backward => real::<T>(2.0) * t * mass0,
    };
    u.scaled(Complex::new(theta.cos(), theta.sin()))
}
