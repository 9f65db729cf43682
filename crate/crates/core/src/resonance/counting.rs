//! Resonance function and lattice counting.
//!
//! For the cubic interaction n = n₁ − n₂ + n₃ the resonance function is
//!
//! ```text
//!   Φ(n̄) = |n₁|^α − |n₂|^α + |n₃|^α − |n|^α,
//! ```
//!
//! which vanishes precisely on the degenerate pairings {n₁,n₃} = {n₂,n}
//! (equivalently n₁=n₂ or n₂=n₃). Away from them it obeys the lower bound
//! |Φ| ≳ |n₁−n₂|·|n₂−n₃|·|n|_max^{α−2}; `resonance_lower_bound_scan` measures
//! the implied constant exhaustively. The counting side studies
//!
//! ```text
//!   A_{a,l}(r) = { k : N₁ ≤ |k| ≤ 2N₁, N₂ ≤ |a−k| ≤ 2N₂,
//!                  −r < |k|^α + |a−k|^α − l ≤ r }
//! ```
//!
//! whose size is bounded by C·min(N₁,N₂)^{1−α/2}·r^{1/2} for 1 < α < 2;
//! `counting_bound_scan` hunts for worst-case (a, l) and fits the growth
//! exponent in N.

use crate::error::Error;
use crate::rng::Stream;
use crate::stats::fit_line;
use rayon::prelude::*;

/// |m|^α with integer-exponent fast path (α = 2 must be exact so that the
/// quadratic identity Φ = 2(n₁−n₂)(n₂−n₃) holds bitwise).
fn int_pow(m: i64, alpha: f64) -> f64 {
    let a = m.unsigned_abs() as f64;
    if alpha == 2.0 {
        a * a
    } else if alpha == 1.0 {
        a
    } else {
        a.powf(alpha)
    }
}

/// Φ(n₁,n₂,n₃) = |n₁|^α − |n₂|^α + |n₃|^α − |n₁−n₂+n₃|^α.
pub fn resonance_phi(n1: i64, n2: i64, n3: i64, alpha: f64) -> f64 {
    let n = n1 - n2 + n3;
    int_pow(n1, alpha) - int_pow(n2, alpha) + int_pow(n3, alpha) - int_pow(n, alpha)
}

/// The pairings on which Φ vanishes identically.
pub fn is_degenerate_pairing(n1: i64, n2: i64, n3: i64) -> bool {
    n1 == n2 || n2 == n3
}

/// Result of the exhaustive lower-bound scan.
#[derive(Clone, Copy, Debug)]
pub struct LowerBoundScan {
    /// min over admissible triples of |Φ| / (|n₁−n₂||n₂−n₃||n|_max^{α−2}).
    pub min_ratio: f64,
    /// lexicographically first minimizing triple.
    pub argmin: (i64, i64, i64),
    pub triples_scanned: u64,
}

/// Exhaustive minimum of the lower-bound ratio over all non-degenerate
/// triples with |n₁|,|n₂|,|n₃| ≤ n_max; |n|_max ranges over all four indices.
pub fn resonance_lower_bound_scan(alpha: f64, n_max: usize) -> LowerBoundScan {
    assert!(
        alpha > 1.0 && alpha <= 2.0,
        "lower-bound regime needs 1 < alpha <= 2, got {alpha}"
    );
    assert!(n_max >= 1 && n_max <= 512, "scan is cubic in n_max; cap 512");
    let k = n_max as i64;
    // |n₁−n₂+n₃| ≤ 3·n_max: one table serves all four exponents.
    let pow_a: Vec<f64> = (0..=3 * k).map(|m| int_pow(m, alpha)).collect();
    let pow_am2: Vec<f64> = (0..=3 * k)
        .map(|m| {
            if alpha == 2.0 {
                1.0
            } else {
                (m as f64).powf(alpha - 2.0)
            }
        })
        .collect();

    let per_n1: Vec<(f64, (i64, i64, i64), u64)> = (-k..=k)
        .into_par_iter()
        .map(|n1| {
            let mut best = f64::INFINITY;
            let mut arg = (0, 0, 0);
            let mut seen = 0u64;
            for n2 in -k..=k {
                if n1 == n2 {
                    continue;
                }
                let d12 = (n1 - n2).unsigned_abs() as usize;
                for n3 in -k..=k {
                    if n2 == n3 {
                        continue;
                    }
                    seen += 1;
                    let n = n1 - n2 + n3;
                    let phi = pow_a[n1.unsigned_abs() as usize]
                        - pow_a[n2.unsigned_abs() as usize]
                        + pow_a[n3.unsigned_abs() as usize]
                        - pow_a[n.unsigned_abs() as usize];
                    let d23 = (n2 - n3).unsigned_abs() as usize;
                    let m = n1
                        .unsigned_abs()
                        .max(n2.unsigned_abs())
                        .max(n3.unsigned_abs())
                        .max(n.unsigned_abs()) as usize;
                    let ratio = phi.abs() / ((d12 * d23) as f64 * pow_am2[m]);
                    if ratio < best {
                        best = ratio;
                        arg = (n1, n2, n3);
                    }
                }
            }
            (best, arg, seen)
        })
        .collect();

    // Sequential fold in n₁ order; strict < keeps the lexicographically
    // first argmin regardless of the thread pool.
    let mut out = LowerBoundScan {
        min_ratio: f64::INFINITY,
        argmin: (0, 0, 0),
        triples_scanned: 0,
    };
    for (best, arg, seen) in per_n1 {
        out.triples_scanned += seen;
        if best < out.min_ratio {
            out.min_ratio = best;
            out.argmin = arg;
        }
    }
    out
}

/// One counting-set query.
#[derive(Clone, Copy, Debug)]
pub struct CountingQuery {
    pub a: i64,
    pub l: f64,
    pub n1: usize,
    pub n2: usize,
    pub r: f64,
    pub alpha: f64,
}

impl CountingQuery {
    pub fn validate(&self) -> Result<(), Error> {
        if self.n1 == 0 || self.n2 == 0 {
            return Err(Error::InvalidParameter(
                "dyadic ranges need N1, N2 >= 1".into(),
            ));
        }
        if !(self.r > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "window half-width must be positive, got {}",
                self.r
            )));
        }
        Ok(())
    }
}

/// #A_{a,l}(r) by direct enumeration over the O(N₁) admissible k. The level
/// test is half-open: −r < |k|^α + |a−k|^α − l ≤ r.
pub fn count_set(q: &CountingQuery) -> Result<u64, Error> {
    q.validate()?;
    let (n1, n2) = (q.n1 as i64, q.n2 as i64);
    let mut count = 0u64;
    let mut tally = |k: i64| {
        let d = (q.a - k).abs();
        if d < n2 || d > 2 * n2 {
            return;
        }
        let phi = int_pow(k, q.alpha) + int_pow(q.a - k, q.alpha) - q.l;
        if -q.r < phi && phi <= q.r {
            count += 1;
        }
    };
    for k in n1..=2 * n1 {
        tally(k);
        tally(-k);
    }
    Ok(count)
}

/// One row of the growth scan.
#[derive(Clone, Copy, Debug)]
pub struct CountingRow {
    pub n: usize,
    pub r: f64,
    pub max_count: u64,
    /// max_count / (N^{1−α/2} √r) — the empirical implied constant.
    pub ratio: f64,
    /// (a, l) attaining the max.
    pub arg_a: i64,
    pub arg_l: f64,
}

#[derive(Clone, Debug)]
pub struct CountingScan {
    pub rows: Vec<CountingRow>,
    /// log-log slope of max_count vs N.
    pub slope: f64,
    pub alpha: f64,
    pub r: f64,
}

/// Adversarial growth scan: for each N the query set mixes structured level
/// choices l = |k₀|^α + |a−k₀|^α (worst cases sit on the level sets) with
/// uniform ones, and a values near 0, near ±2N, and uniform. Reports the max
/// count per N, the ratio against N^{1−α/2}√r, and the fitted growth slope.
pub fn counting_bound_scan(
    alpha: f64,
    n_list: &[usize],
    r: f64,
    queries_per_n: usize,
    stream: &Stream,
) -> Result<CountingScan, Error> {
    if !(alpha > 1.0 && alpha < 2.0) {
        return Err(Error::InvalidParameter(format!(
            "counting bound regime needs 1 < alpha < 2, got {alpha}"
        )));
    }
    if r < 0.01 {
        return Err(Error::InvalidParameter(format!(
            "window half-width below 1/100 not covered, got {r}"
        )));
    }
    if n_list.is_empty() || queries_per_n == 0 {
        return Err(Error::InvalidParameter(
            "need at least one N and one query".into(),
        ));
    }
    let rows: Vec<CountingRow> = n_list
        .par_iter()
        .enumerate()
        .map(|(row_idx, &n)| {
            let mut w = stream.child(row_idx as u64).walker();
            let nn = n as i64;
            let mut best: Option<CountingRow> = None;
            for qi in 0..queries_per_n {
                // a near 0, a near ±2N, and uniform over the reachable range
                let a = match qi % 4 {
                    0 => w.uniform_i64(-2, 2),
                    1 => 2 * nn + w.uniform_i64(-2, 2),
                    2 => -2 * nn + w.uniform_i64(-2, 2),
                    _ => w.uniform_i64(-4 * nn, 4 * nn),
                };
                // level on the grid of attained values, or uniform
                let l = if qi % 3 != 2 {
                    let k0 = w.uniform_i64(nn, 2 * nn) * if w.uniform() < 0.5 { 1 } else { -1 };
                    int_pow(k0, alpha) + int_pow(a - k0, alpha)
                } else {
                    w.uniform() * 2.0 * int_pow(2 * nn, alpha)
                };
                let q = CountingQuery {
                    a,
                    l,
                    n1: n,
                    n2: n,
                    r,
                    alpha,
                };
                let c = count_set(&q).expect("validated query");
                let better = match &best {
                    None => true,
                    Some(b) => c > b.max_count,
                };
                if better {
                    best = Some(CountingRow {
                        n,
                        r,
                        max_count: c,
                        ratio: c as f64 / ((n as f64).powf(1.0 - alpha / 2.0) * r.sqrt()),
                        arg_a: a,
                        arg_l: l,
                    });
                }
            }
            best.expect("queries_per_n >= 1")
        })
        .collect();

    let xs: Vec<f64> = rows.iter().map(|row| (row.n as f64).ln()).collect();
    let ys: Vec<f64> = rows
        .iter()
        .map(|row| (row.max_count.max(1) as f64).ln())
        .collect();
    let slope = if rows.len() >= 2 {
        fit_line(&xs, &ys).slope
    } else {
        0.0
    };
    Ok(CountingScan {
        rows,
        slope,
        alpha,
        r,
    })
}
