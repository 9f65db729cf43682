//! Small statistics toolbox shared by the experiments: sample moments,
//! self-normalized importance estimators, binomial intervals, least squares,
//! and the normal quantile used to widen thresholds under multiple testing.
//!
//! Everything here is deterministic given its inputs and sums in index order,
//! so reports built on top of it are reproducible byte for byte.

/// Sample mean and standard error of the mean (ddof = 1).
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, f64::INFINITY);
    }
    let ss: f64 = xs.iter().map(|x| (x - mean) * (x - mean)).sum();
    (mean, (ss / ((n - 1) as f64) / n as f64).sqrt())
}

/// Self-normalized importance estimator of E[x] under weights ∝ w, with the
/// delta-method standard error of the ratio Σwx/Σw:
///
/// ```text
///   SE² = Σ w_i²(x_i − m)² / (Σ w_i)².
/// ```
///
/// Weights are supplied as logs and shifted by their maximum before
/// exponentiating, so wildly scaled densities stay finite.
pub fn weighted_mean_se(xs: &[f64], log_ws: &[f64]) -> (f64, f64) {
    assert_eq!(xs.len(), log_ws.len(), "weight for every observation");
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let m = log_ws.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let ws: Vec<f64> = log_ws.iter().map(|lw| (lw - m).exp()).collect();
    let w_sum: f64 = ws.iter().sum();
    let mean = ws.iter().zip(xs).map(|(w, x)| w * x).sum::<f64>() / w_sum;
    let var_num: f64 = ws
        .iter()
        .zip(xs)
        .map(|(w, x)| {
            let d = x - mean;
            w * w * d * d
        })
        .sum();
    (mean, var_num.sqrt() / w_sum)
}

/// Kish effective sample size (Σw)²/Σw² of log-weights.
pub fn effective_sample_size(log_ws: &[f64]) -> f64 {
    if log_ws.is_empty() {
        return 0.0;
    }
    let m = log_ws.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let (mut s1, mut s2) = (0.0, 0.0);
    for lw in log_ws {
        let w = (lw - m).exp();
        s1 += w;
        s2 += w * w;
    }
    s1 * s1 / s2
}

/// Wilson score interval for a binomial proportion at z standard deviations.
/// Returns (center estimate, lower, upper); well behaved at successes 0 or n.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64, f64) {
    assert!(trials > 0, "wilson interval needs at least one trial");
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    (center, (center - half).max(0.0), (center + half).min(1.0))
}

/// Ordinary least squares y ≈ a + b·x.
#[derive(Clone, Copy, Debug)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Unweighted least-squares line through (x, y).
pub fn fit_line(xs: &[f64], ys: &[f64]) -> LineFit {
    let ws = vec![1.0; xs.len()];
    fit_line_weighted(xs, ys, &ws)
}

/// Weighted least-squares line (weights ∝ inverse variance of each y).
/// R² is reported against the weighted mean.
pub fn fit_line_weighted(xs: &[f64], ys: &[f64], ws: &[f64]) -> LineFit {
    assert_eq!(xs.len(), ys.len());
    assert_eq!(xs.len(), ws.len());
    assert!(xs.len() >= 2, "line fit needs at least two points");
    let w_sum: f64 = ws.iter().sum();
    let xb = xs.iter().zip(ws).map(|(x, w)| w * x).sum::<f64>() / w_sum;
    let yb = ys.iter().zip(ws).map(|(y, w)| w * y).sum::<f64>() / w_sum;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for ((x, y), w) in xs.iter().zip(ys).zip(ws) {
        let dx = x - xb;
        let dy = y - yb;
        sxx += w * dx * dx;
        sxy += w * dx * dy;
        syy += w * dy * dy;
    }
    let slope = sxy / sxx;
    let intercept = yb - slope * xb;
    let r_squared = if syy > 0.0 { (sxy * sxy) / (sxx * syy) } else { 1.0 };
    LineFit {
        slope,
        intercept,
        r_squared,
    }
}

/// Inverse standard-normal CDF (Acklam's rational approximation, |err| < 1.2e-9),
/// used to translate a per-family error budget into a per-test z threshold.
pub fn normal_quantile(p: f64) -> f64 {
    assert!(p > 0.0 && p < 1.0, "quantile needs p in (0,1), got {p}");
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383577518672690e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    const P_LOW: f64 = 0.02425;
    if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        -normal_quantile(1.0 - p)
    }
}

/// z threshold such that a family of `tests` two-sided checks at that
/// threshold has overall false-alarm probability `family_alpha` (Bonferroni).
/// Five or fewer tests keep the conventional 3σ.
pub fn family_z(tests: usize, family_alpha: f64) -> f64 {
    if tests <= 5 {
        return 3.0;
    }
    normal_quantile(1.0 - family_alpha / (2.0 * tests as f64))
}

/// Geometric mean of consecutive ratios x_i / x_{i+1} of a positive sequence
/// (the average per-step contraction factor of a decreasing scan).
pub fn geometric_contraction(xs: &[f64]) -> f64 {
    assert!(xs.len() >= 2);
    let mut log_sum = 0.0;
    for pair in xs.windows(2) {
        log_sum += (pair[0] / pair[1]).ln();
    }
    (log_sum / (xs.len() - 1) as f64).exp()
}
