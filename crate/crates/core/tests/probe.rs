//! Temporary diagnostics; run with --nocapture. Deleted before release.

use fnls_core::experiments::{
    cauchy_convergence_experiment, invariance_experiment, ConvergenceConfig, InvarianceConfig,
};
use fnls_core::gibbs::{functionals, sample_mu, RenormConstants, RhoMode};
use fnls_core::rng::Stream;
use fnls_core::spectral::{ModelParams, SpectralGrid};

#[test]
#[ignore]
fn probe_partition_function() {
    for (alpha, n) in [(1.5f64, 8usize), (0.95, 8), (1.5, 16)] {
        let params = ModelParams::new(alpha, n).unwrap();
        let grid = SpectralGrid::<f64>::new(params.grid_size());
        let rc = RenormConstants::new(alpha, n);
        let stream = Stream::from_seed(42);
        let trials = 200_000usize;
        let mut sum_w = 0.0f64;
        let mut sum_w2 = 0.0f64;
        let mut sum_f = 0.0;
        let mut sum_f2 = 0.0;
        let mut min_f = f64::INFINITY;
        for t in 0..trials {
            let u = sample_mu::<f64>(&stream.child(t as u64), alpha, n);
            let f = functionals(&u, &rc, &grid).unwrap().f_n;
            let w = (-f).exp();
            sum_w += w;
            sum_w2 += w * w;
            sum_f += f;
            sum_f2 += f * f;
            min_f = min_f.min(f);
        }
        let z = sum_w / trials as f64;
        let ess_frac = sum_w * sum_w / (sum_w2 * trials as f64);
        let mean_f = sum_f / trials as f64;
        let var_f = sum_f2 / trials as f64 - mean_f * mean_f;
        let an = rc.alpha_n();
        println!(
            "alpha={alpha} N={n}: Z~{z:.4e} ess_frac={ess_frac:.4} mean_f={mean_f:.4} sd_f={:.4} min_f={min_f:.4} alpha_n={an:.4} accept~{:.3e}",
            var_f.sqrt(),
            z * (-an * an).exp()
        );
    }
}

#[test]
#[ignore]
fn probe_invariance_small() {
    // Matched flow vs doubled coupling, importance mode, modest ensemble.
    for coupling in [1.0f64, 2.0] {
        let mut cfg = InvarianceConfig::new(1.5, 8, 1.0, 2000, 7);
        cfg.coupling = coupling;
        let rep = invariance_experiment(&cfg).unwrap();
        println!("== coupling={coupling} (importance) ==");
        for r in &rep.rows {
            println!(
                "  {}: delta={:.4e} se={:.4e} |z|={:.2} pass={}",
                r.observable,
                r.estimate,
                r.uncertainty,
                (r.estimate / r.uncertainty).abs(),
                r.pass
            );
        }
        println!("  runtime={:.2}s", rep.runtime_seconds);
    }
}

#[test]
#[ignore]
fn probe_invariance_rejection() {
    for coupling in [1.0f64, 2.0] {
        let mut cfg = InvarianceConfig::new(1.5, 8, 1.0, 2000, 7);
        cfg.coupling = coupling;
        cfg.sampling = RhoMode::Rejection {
            max_attempts: 40_000_000,
        };
        let rep = invariance_experiment(&cfg).unwrap();
        println!("== coupling={coupling} (rejection) ==");
        for r in &rep.rows {
            println!(
                "  {}: delta={:.4e} se={:.4e} |z|={:.2} pass={}",
                r.observable,
                r.estimate,
                r.uncertainty,
                (r.estimate / r.uncertainty).abs(),
                r.pass
            );
        }
        println!("  runtime={:.2}s", rep.runtime_seconds);
    }
}

#[test]
#[ignore]
fn probe_cauchy_scan() {
    let cfg = ConvergenceConfig::new(1.5, 0.2, vec![8, 16, 32, 64], 0.5, vec![11, 12]);
    let rep = cauchy_convergence_experiment(&cfg).unwrap();
    for (k, v) in &rep.config {
        println!("  cfg {k}={v}");
    }
    for r in &rep.rows {
        println!(
            "  {}: {:.6e} target[{}] pass={}",
            r.observable, r.estimate, r.target, r.pass
        );
    }
    println!("  runtime={:.2}s", rep.runtime_seconds);
}

#[test]
#[ignore]
fn probe_renorm_scan() {
    let t_final: f64 = std::env::var("PROBE_T")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(0.5);
    let cfg = ConvergenceConfig::modulated(
        0.95,
        -0.05,
        vec![8, 16, 32, 64],
        t_final,
        (1..=16).collect(),
    );
    let rep = fnls_core::experiments::renormalized_convergence_experiment(&cfg).unwrap();
    for r in &rep.rows {
        println!(
            "  {}: {:.6e} target[{}] pass={}",
            r.observable, r.estimate, r.target, r.pass
        );
    }
    println!("  runtime={:.2}s all_pass={}", rep.runtime_seconds, rep.all_pass());
}

#[test]
#[ignore]
fn probe_measure() {
    let cfg = fnls_core::experiments::MeasureConstructionConfig::new(
        0.95,
        vec![8, 16, 32, 64],
        10_000,
        5,
    );
    let rep = fnls_core::experiments::measure_construction_experiment(&cfg).unwrap();
    for r in &rep.rows {
        println!(
            "  {}: {:.6e} +- {:.2e} target[{}] pass={}",
            r.observable, r.estimate, r.uncertainty, r.target, r.pass
        );
    }
    println!("  runtime={:.2}s all_pass={}", rep.runtime_seconds, rep.all_pass());
}

#[test]
#[ignore]
fn probe_large_deviation() {
    let cfg = fnls_core::experiments::LargeDeviationConfig::new(0.9, 16, 64, 5);
    let rep = fnls_core::experiments::large_deviation_experiment(&cfg);
    match rep {
        Ok(rep) => {
            for r in &rep.rows {
                println!(
                    "  {}: {:.6e} +- {:.2e} target[{}] pass={}",
                    r.observable, r.estimate, r.uncertainty, r.target, r.pass
                );
            }
            println!("  runtime={:.2}s all_pass={}", rep.runtime_seconds, rep.all_pass());
        }
        Err(e) => println!("ERROR: {e}"),
    }
}

#[test]
#[ignore]
fn probe_recurrence() {
    let cfg = fnls_core::experiments::RecurrenceConfig::new(1.5, 1, 0.2, 1.0e4, 0.1, 3);
    let rep = fnls_core::experiments::recurrence_experiment(&cfg).unwrap();
    for (k, v) in &rep.config {
        println!("  cfg {k}={v}");
    }
    for r in &rep.rows {
        println!(
            "  {}: {:.6e} target[{}] pass={}",
            r.observable, r.estimate, r.target, r.pass
        );
    }
    println!("  runtime={:.2}s all_pass={}", rep.runtime_seconds, rep.all_pass());
}

#[test]
#[ignore]
fn probe_corr() {
    use fnls_core::dynamics::{evolve_with, DtPolicy, EquationVariant, EvolveOptions, Scheme};
    use num_complex::Complex;

    let alpha = 0.95f64;
    let sigma = -0.05f64;
    let t_final: f64 = std::env::var("PROBE_T")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(0.5);
    let outputs = 8usize;
    let ensemble: usize = std::env::var("PROBE_K")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(480);
    let levels = [8usize, 16, 32, 64];
    let window = levels[0] as i64;
    let nmodes = (2 * window + 1) as usize;
    let stream = Stream::from_seed(90);

    let weights: Vec<f64> = (-window..=window)
        .map(|n| (1.0 + (n * n) as f64).powf(sigma))
        .collect();

    // per variant, per pair, per output time: vector mean accumulator and
    // weighted second moment of the per-member difference
    let mut s1 = vec![vec![vec![vec![Complex::<f64>::new(0.0, 0.0); nmodes]; outputs + 1]; 3]; 2];
    let mut s2 = vec![vec![vec![0.0f64; outputs + 1]; 3]; 2];

    for m in 0..ensemble {
        let member = stream.child(m as u64);
        // z[variant][level][j][mode]
        let mut z = vec![vec![vec![vec![Complex::<f64>::new(0.0, 0.0); nmodes]; outputs + 1]; 4]; 2];
        for (li, &n) in levels.iter().enumerate() {
            let params = ModelParams::new(alpha, n).unwrap();
            let grid = SpectralGrid::<f64>::new(params.grid_size());
            let lam_max = 1.0 + (n as f64).powf(alpha);
            let dt_req = (0.05f64)
                .min(1.5 / lam_max)
                .min(0.7 * (72.0 * 1e-8 / (t_final * lam_max.powi(6))).powf(0.2));
            let k = (t_final / (outputs as f64 * dt_req)).ceil().max(1.0) as usize;
            let dt = t_final / (outputs as f64 * k as f64);
            let u0 = sample_mu::<f64>(&member, alpha, n);
            for (v, eq) in [
                EquationVariant::renormalized(params),
                EquationVariant::truncated(params),
            ]
            .into_iter()
            .enumerate()
            {
                let opts = EvolveOptions {
                    scheme: Scheme::Rk4,
                    dt: DtPolicy::Fixed(dt),
                    stride: k,
                    drift_tolerance: 1e-6,
                };
                let traj = evolve_with(&u0, &eq, t_final, &opts, &grid).unwrap();
                for (j, st) in traj.states.iter().enumerate() {
                    for (idx, nn) in (-window..=window).enumerate() {
                        z[v][li][j][idx] = st.get(nn) * u0.get(nn).conj();
                    }
                }
            }
        }
        for v in 0..2 {
            for p in 0..3 {
                for j in 0..=outputs {
                    let mut w2 = 0.0;
                    for idx in 0..nmodes {
                        let d = z[v][p + 1][j][idx] - z[v][p][j][idx];
                        s1[v][p][j][idx] += d;
                        w2 += weights[idx] * d.norm_sqr();
                    }
                    s2[v][p][j] += w2;
                }
            }
        }
    }

    let kf = ensemble as f64;
    for (v, name) in ["renormalized", "truncated"].iter().enumerate() {
        let mut raw = Vec::new();
        let mut corr = Vec::new();
        let mut floors = Vec::new();
        for p in 0..3 {
            let mut best_raw = 0.0f64;
            let mut best_corr = f64::NEG_INFINITY;
            let mut floor_at_best = 0.0;
            for j in 0..=outputs {
                let mean2: f64 = (0..nmodes)
                    .map(|idx| weights[idx] * (s1[v][p][j][idx] / kf).norm_sqr())
                    .sum();
                let tr_sigma = (s2[v][p][j] - kf * mean2) / (kf - 1.0);
                let corrected = mean2 - tr_sigma / kf;
                if corrected > best_corr {
                    best_corr = corrected;
                    floor_at_best = (tr_sigma / kf).sqrt();
                }
                best_raw = best_raw.max(mean2);
            }
            raw.push(best_raw.sqrt());
            corr.push(best_corr.max(0.0).sqrt());
            floors.push(floor_at_best);
        }
        println!(
            "{name}: raw D = [{:.4}, {:.4}, {:.4}] corrected D = [{:.4}, {:.4}, {:.4}] noise(sd of mean) = [{:.4}, {:.4}, {:.4}]",
            raw[0], raw[1], raw[2], corr[0], corr[1], corr[2], floors[0], floors[1], floors[2]
        );
    }
}
