//! Space-time norm probes for the free flow S_α(t) = e^{it|D|^α}.
//!
//! The linear probe measures ‖S_α(t)P_N f‖_{L⁴([0,1]×T)} for unit-L² data
//! supported in {N ≤ ⟨n⟩ ≤ 2N} and fits its growth in N; the bound under
//! test is N^{(1/2)(1/2−α/4)} up to constants. The bilinear probe does the
//! same for ‖S_α P_M f · S_α P_N g‖_{L²} in the low frequency M ≪ N. The
//! probabilistic probe estimates the tail P(‖S_α(t)f^ω‖_{L^q([0,T]×T)} >
//! R‖c‖_{ℓ²}) for randomized data f̂^ω(n) = c_n g_n and checks the
//! sub-Gaussian decay exp(−cR²) by fitting log P against R².
//!
//! Time integrals use trapezoidal quadrature with the step resolving the
//! fastest phase present (dt < 1/(2·max|λ|)); requesting a coarser step is a
//! time-aliasing error, not a silent inaccuracy.

use crate::error::Error;
use crate::real::mode_pow;
use crate::rng::{zigzag, Stream};
use crate::spectral::{FourierState, SpectralGrid};
use crate::stats::{fit_line, fit_line_weighted, wilson_interval};
use num_complex::Complex;
use rayon::prelude::*;

/// Half-width of the randomized-data profile c_n = (1+|n|^α)^{−1/2} used by
/// the tail probe.
pub const TAIL_PROFILE_HALF_WIDTH: usize = 16;

/// Modes of the dyadic block {n : N ≤ ⟨n⟩ ≤ 2N}, ⟨n⟩ = (1+n²)^{1/2},
/// ascending.
fn block_modes(n: usize) -> Vec<i64> {
    let n2 = (n * n) as i64;
    let hi = (4 * n * n) as i64;
    let mut out = Vec::new();
    let mut m = 0i64;
    while 1 + m * m <= hi {
        if 1 + m * m >= n2 {
            out.push(m);
        }
        m += 1;
    }
    let mut signed: Vec<i64> = out.iter().rev().filter(|&&m| m != 0).map(|&m| -m).collect();
    signed.extend(out);
    signed
}

/// ‖S_α(t)f‖_{L^q([0,T]×T)} by trapezoidal time quadrature with `intervals`
/// uniform steps and exact spatial quadrature on `grid` (exact for q ∈ {2,4}
/// when the grid is large enough; a plain Riemann product rule otherwise).
pub fn free_lq_spacetime_norm(
    f: &FourierState<f64>,
    alpha: f64,
    q: f64,
    t_horizon: f64,
    intervals: usize,
    grid: &SpectralGrid<f64>,
) -> Result<f64, Error> {
    assert!(q >= 1.0 && t_horizon > 0.0 && intervals >= 1);
    let g = grid.size();
    let phw = f.populated_half_width();
    let needed = if q == 4.0 { 4 * phw + 2 } else { 2 * phw + 1 };
    if g < needed {
        return Err(Error::Aliasing { grid: g, needed });
    }

    let dt = t_horizon / intervals as f64;
    // (bin, current coefficient, per-step rotor e^{i·dt·|n|^α})
    let mut entries: Vec<(usize, Complex<f64>, Complex<f64>)> = f
        .iter_modes()
        .filter(|(_, z)| z.norm_sqr() > 0.0)
        .map(|(m, z)| {
            let theta = dt * mode_pow::<f64>(m, alpha);
            (grid.bin(m), z, Complex::new(theta.cos(), theta.sin()))
        })
        .collect();

    let plan = grid.inverse_plan().clone();
    let mut scratch = vec![Complex::new(0.0, 0.0); plan.get_inplace_scratch_len()];
    let mut buf = vec![Complex::new(0.0, 0.0); g];
    let mut acc = 0.0;
    for i in 0..=intervals {
        buf.fill(Complex::new(0.0, 0.0));
        for &(bin, z, _) in &entries {
            buf[bin] += z;
        }
        plan.process_with_scratch(&mut buf, &mut scratch);
        let mut space = 0.0;
        if q == 4.0 {
            for z in &buf {
                let p = z.norm_sqr();
                space += p * p;
            }
        } else if q == 2.0 {
            for z in &buf {
                space += z.norm_sqr();
            }
        } else {
            for z in &buf {
                space += z.norm_sqr().powf(q / 2.0);
            }
        }
        let weight = if i == 0 || i == intervals { 0.5 } else { 1.0 };
        acc += weight * (space / g as f64) * dt;
        for e in &mut entries {
            e.1 = e.1 * e.2;
        }
    }
    Ok(acc.powf(1.0 / q))
}

/// One block-size row of a Strichartz scan.
#[derive(Clone, Copy, Debug)]
pub struct StrichartzRow {
    pub n: usize,
    /// max over probed samples of the space-time norm.
    pub max_norm: f64,
}

#[derive(Clone, Debug)]
pub struct StrichartzScan {
    pub alpha: f64,
    pub rows: Vec<StrichartzRow>,
    /// log-log slope of max_norm against the block size.
    pub slope: f64,
}

fn scan_slope(rows: &[StrichartzRow]) -> f64 {
    if rows.len() < 2 {
        return 0.0;
    }
    let xs: Vec<f64> = rows.iter().map(|r| (r.n as f64).ln()).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.max_norm.ln()).collect();
    fit_line(&xs, &ys).slope
}

fn unit_block_sample(modes: &[i64], stream: &Stream, flat: bool) -> FourierState<f64> {
    let k = modes.iter().map(|m| m.unsigned_abs()).max().unwrap() as usize;
    let mut f = FourierState::zero(k);
    if flat {
        for &m in modes {
            f.set(m, Complex::new(1.0, 0.0));
        }
    } else {
        for &m in modes {
            let (h, l) = stream.normal_pair(2 * zigzag(m));
            f.set(m, Complex::new(h, l));
        }
    }
    let norm = f.l2_sq().sqrt();
    f.scaled(Complex::new(1.0 / norm, 0.0))
}

/// Linear L⁴ probe over a list of dyadic block sizes: `samples` Gaussian unit
/// vectors plus the flat (equal-coefficient) extremizer candidate per block.
/// `dt_override` forces a quadrature step; a step that cannot resolve the
/// fastest phase (2N)^α is rejected as time aliasing.
pub fn strichartz_l4_probe(
    alpha: f64,
    n_list: &[usize],
    samples: usize,
    stream: &Stream,
    dt_override: Option<f64>,
) -> Result<StrichartzScan, Error> {
    if n_list.is_empty() {
        return Err(Error::InvalidParameter("need at least one block size".into()));
    }
    let mut rows = Vec::with_capacity(n_list.len());
    for (row_idx, &n) in n_list.iter().enumerate() {
        let modes = block_modes(n);
        let kmax = modes.iter().map(|m| m.unsigned_abs()).max().unwrap() as usize;
        let grid = SpectralGrid::new((4 * kmax + 2).next_power_of_two());
        let phase_speed = (2.0 * n as f64).powf(alpha);
        let intervals = match dt_override {
            Some(dt) => {
                if dt >= 1.0 / (2.0 * phase_speed) {
                    return Err(Error::TimeAliasing { dt, phase_speed });
                }
                (1.0 / dt).ceil() as usize
            }
            None => (2.0 * phase_speed).ceil() as usize + 1,
        };
        let row_stream = stream.child(row_idx as u64);
        let norms: Vec<f64> = (0..=samples)
            .into_par_iter()
            .map(|s| {
                let f = unit_block_sample(&modes, &row_stream.child(s as u64), s == samples);
                free_lq_spacetime_norm(&f, alpha, 4.0, 1.0, intervals, &grid)
            })
            .collect::<Result<_, _>>()?;
        let max_norm = norms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        rows.push(StrichartzRow { n, max_norm });
    }
    let slope = scan_slope(&rows);
    Ok(StrichartzScan { alpha, rows, slope })
}

/// Bilinear probe ‖S_α(t)P_M f · S_α(t)P_N g‖_{L²([0,1]×T)} as the low
/// frequency M varies with N fixed; rows are indexed by M.
pub fn strichartz_bilinear_probe(
    alpha: f64,
    m_list: &[usize],
    n_fixed: usize,
    samples: usize,
    stream: &Stream,
) -> Result<StrichartzScan, Error> {
    if m_list.is_empty() {
        return Err(Error::InvalidParameter("need at least one block size".into()));
    }
    let modes_g = block_modes(n_fixed);
    let kmax_g = modes_g.iter().map(|m| m.unsigned_abs()).max().unwrap() as usize;
    let phase_speed = (2.0 * n_fixed as f64).powf(alpha);
    let intervals = (2.0 * phase_speed).ceil() as usize + 1;
    let mut rows = Vec::with_capacity(m_list.len());
    for (row_idx, &m) in m_list.iter().enumerate() {
        let modes_f = block_modes(m);
        let kmax_f = modes_f.iter().map(|x| x.unsigned_abs()).max().unwrap() as usize;
        // |f·g|² carries modes up to 2(kmax_f + kmax_g)
        let grid = SpectralGrid::new((4 * (kmax_f + kmax_g) + 2).next_power_of_two());
        let row_stream = stream.child(row_idx as u64);
        let norms: Vec<f64> = (0..samples.max(1))
            .into_par_iter()
            .map(|s| {
                let cs = row_stream.child(s as u64);
                let f = unit_block_sample(&modes_f, &cs.child(0), false);
                let g = unit_block_sample(&modes_g, &cs.child(1), false);
                bilinear_l2_norm(&f, &g, alpha, intervals, &grid)
            })
            .collect::<Result<_, _>>()?;
        let max_norm = norms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        rows.push(StrichartzRow { n: m, max_norm });
    }
    let slope = scan_slope(&rows);
    Ok(StrichartzScan { alpha, rows, slope })
}

fn bilinear_l2_norm(
    f: &FourierState<f64>,
    g: &FourierState<f64>,
    alpha: f64,
    intervals: usize,
    grid: &SpectralGrid<f64>,
) -> Result<f64, Error> {
    let gsz = grid.size();
    let needed = 4 * (f.populated_half_width() + g.populated_half_width()) + 2;
    if gsz < needed {
        return Err(Error::Aliasing { grid: gsz, needed });
    }
    let dt = 1.0 / intervals as f64;
    let make_entries = |u: &FourierState<f64>| -> Vec<(usize, Complex<f64>, Complex<f64>)> {
        u.iter_modes()
            .filter(|(_, z)| z.norm_sqr() > 0.0)
            .map(|(m, z)| {
                let theta = dt * mode_pow::<f64>(m, alpha);
                (grid.bin(m), z, Complex::new(theta.cos(), theta.sin()))
            })
            .collect()
    };
    let mut ef = make_entries(f);
    let mut eg = make_entries(g);
    let plan = grid.inverse_plan().clone();
    let mut scratch = vec![Complex::new(0.0, 0.0); plan.get_inplace_scratch_len()];
    let mut buf_f = vec![Complex::new(0.0, 0.0); gsz];
    let mut buf_g = vec![Complex::new(0.0, 0.0); gsz];
    let mut acc = 0.0;
    for i in 0..=intervals {
        for (buf, entries) in [(&mut buf_f, &ef), (&mut buf_g, &eg)] {
            buf.fill(Complex::new(0.0, 0.0));
            for &(bin, z, _) in entries.iter() {
                buf[bin] += z;
            }
            plan.process_with_scratch(buf, &mut scratch);
        }
        let mut space = 0.0;
        for (zf, zg) in buf_f.iter().zip(&buf_g) {
            space += (zf * zg).norm_sqr();
        }
        let weight = if i == 0 || i == intervals { 0.5 } else { 1.0 };
        acc += weight * (space / gsz as f64) * dt;
        for e in &mut ef {
            e.1 = e.1 * e.2;
        }
        for e in &mut eg {
            e.1 = e.1 * e.2;
        }
    }
    Ok(acc.sqrt())
}

/// One threshold row of the probabilistic tail table.
#[derive(Clone, Copy, Debug)]
pub struct TailRow {
    /// threshold in units of ‖c‖_{ℓ²}.
    pub r: f64,
    pub exceedances: u64,
    pub trials: u64,
    pub p_hat: f64,
    /// 95% Wilson interval.
    pub lo: f64,
    pub hi: f64,
}

#[derive(Clone, Debug)]
pub struct TailScan {
    pub q: f64,
    pub t_horizon: f64,
    pub profile_l2: f64,
    pub rows: Vec<TailRow>,
    /// slope of ln p̂ against R² — sub-Gaussian decay makes it negative.
    pub slope: f64,
    /// linearity of that fit.
    pub fit_r_squared: f64,
}

/// Monte Carlo estimate of P(‖S_α(t)f^ω‖_{L^q([0,T]×T)} > R‖c‖_{ℓ²}) on a
/// threshold grid, with a log-linear fit against R². When no grid is given,
/// thresholds are placed at empirical quantiles so that the rarest probed
/// event still has expected count ≥ 10.
pub fn proba_strichartz_tail(
    alpha: f64,
    q: f64,
    t_horizon: f64,
    r_grid: Option<&[f64]>,
    trials: u64,
    stream: &Stream,
) -> Result<TailScan, Error> {
    if !(q >= 2.0) {
        return Err(Error::InvalidParameter(format!(
            "integrability exponent must be >= 2, got {q}"
        )));
    }
    if !(t_horizon > 0.0 && t_horizon <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "time horizon must lie in (0, 1], got {t_horizon}"
        )));
    }
    if trials < 100 {
        return Err(Error::InsufficientSamples {
            got: trials as usize,
            need: 100,
        });
    }
    let k = TAIL_PROFILE_HALF_WIDTH;
    let profile: Vec<(i64, f64)> = (-(k as i64)..=k as i64)
        .map(|m| (m, (1.0 + mode_pow::<f64>(m, alpha)).powf(-0.5)))
        .collect();
    let profile_l2 = profile.iter().map(|(_, c)| c * c).sum::<f64>().sqrt();
    let grid = SpectralGrid::new((4 * k + 2).next_power_of_two());
    let phase_speed = (k as f64).powf(alpha);
    let intervals = (2.0 * t_horizon * phase_speed).ceil() as usize + 1;

    let norms: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let cs = stream.child(trial);
            let mut f = FourierState::zero(k);
            for &(m, c) in &profile {
                let (h, l) = cs.normal_pair(2 * zigzag(m));
                f.set(
                    m,
                    Complex::new(c * h / 2f64.sqrt(), c * l / 2f64.sqrt()),
                );
            }
            free_lq_spacetime_norm(&f, alpha, q, t_horizon, intervals, &grid)
        })
        .collect::<Result<_, _>>()?;

    let thresholds: Vec<f64> = match r_grid {
        Some(g) => g.to_vec(),
        None => {
            let mut sorted = norms.clone();
            sorted.sort_unstable_by(|a, b| a.partial_cmp(b).expect("finite norms"));
            let floor_p = 10.0 / trials as f64;
            let mut rs = Vec::new();
            for &p in &[0.5, 0.3, 0.2, 0.1, 0.05, 0.03, 0.02, 0.01, 0.005, 0.002, 0.001] {
                if p < floor_p {
                    break;
                }
                let idx = ((1.0 - p) * trials as f64) as usize;
                let r = sorted[idx.min(sorted.len() - 1)] / profile_l2;
                if rs.last().map_or(true, |&last: &f64| r > last) {
                    rs.push(r);
                }
            }
            rs
        }
    };
    if thresholds.is_empty() {
        return Err(Error::InvalidParameter("empty threshold grid".into()));
    }

    let rows: Vec<TailRow> = thresholds
        .iter()
        .map(|&r| {
            let exceedances = norms.iter().filter(|&&x| x > r * profile_l2).count() as u64;
            let (_, lo, hi) = wilson_interval(exceedances, trials, 1.96);
            TailRow {
                r,
                exceedances,
                trials,
                p_hat: exceedances as f64 / trials as f64,
                lo,
                hi,
            }
        })
        .collect();

    // weight each point by its count (≈ inverse variance of ln p̂)
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut ws = Vec::new();
    for row in &rows {
        if row.exceedances > 0 {
            xs.push(row.r * row.r);
            ys.push((row.exceedances as f64 / row.trials as f64).ln());
            ws.push(row.exceedances as f64);
        }
    }
    let (slope, fit_r_squared) = if xs.len() >= 2 {
        let fit = fit_line_weighted(&xs, &ys, &ws);
        (fit.slope, fit.r_squared)
    } else {
        (0.0, 1.0)
    };
    Ok(TailScan {
        q,
        t_horizon,
        profile_l2,
        rows,
        slope,
        fit_r_squared,
    })
}
