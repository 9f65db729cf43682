//! Does the flow move the equilibrium ensemble?
//!
//! Draw u₀ ~ ρ_N, evolve to time T under the truncated flow, and compare
//! ensemble means of phase-blind observables at t = 0 and t = T. Exact
//! invariance of ρ_N makes every Δ = mean_T − mean_0 a pure Monte Carlo
//! zero, so the test is |Δ| ≤ z·√(SE₀² + SE_T²) per observable, with z = 3
//! widened Bonferroni-style beyond five observables. The thing under test is
//! the *measure/flow pairing*, not the integrator: time-stepping error is
//! held far below the statistical resolution by the drift-targeted step
//! choice.
//!
//! The negative control evolves a deliberately mismatched flow. Note that a
//! doubled mass-shift constant would be invisible here — any c(u)·u term is
//! a global phase and every listed observable is phase-blind; likewise a
//! doubled constant in the sampling weight e^{−f_N} leaves the density a
//! function of the conserved energy and mass, hence still invariant. The one
//! constant whose doubling is *detectable* is the interaction coupling κ:
//! the κ=2 flow conserves Σ|n|^α|û|² + ‖u‖⁴_{L⁴} while the ensemble weight
//! was built from the κ=1 energy (quartic coefficient ½), so the surplus
//! quartic tilt relaxes and ‖u‖⁴_{L⁴} drifts measurably.

use std::time::Instant;

use rayon::prelude::*;

use crate::dynamics::{evolve_with, DtPolicy, EquationVariant, EvolveOptions, Scheme};
use crate::error::Error;
use crate::gibbs::{sample_rho, GibbsDensity, RhoMode};
use crate::report::ExperimentReport;
use crate::rng::Stream;
use crate::spectral::{grid_lp_norm, sobolev_norm, FourierState, ModelParams, SpectralGrid};
use crate::stats::{effective_sample_size, family_z, weighted_mean_se};

/// A phase-blind functional of the state, evaluated on ensembles.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Observable {
    /// ‖u‖²_{L²}.
    Mass,
    /// |û(n)|².
    ModeIntensity(i64),
    /// ‖u‖⁴_{L⁴}.
    QuarticPotential,
    /// ‖u‖²_{H^σ}.
    SobolevSq(f64),
}

impl Observable {
    /// The standard five-observable battery.
    pub fn default_set() -> Vec<Observable> {
        vec![
            Observable::Mass,
            Observable::ModeIntensity(0),
            Observable::ModeIntensity(1),
            Observable::QuarticPotential,
            Observable::SobolevSq(0.2),
        ]
    }

    pub fn label(&self) -> String {
        match *self {
            Observable::Mass => "mass".to_string(),
            Observable::ModeIntensity(n) => format!("mode_sq[{n}]"),
            Observable::QuarticPotential => "l4_quartic".to_string(),
            Observable::SobolevSq(s) => format!("sobolev_sq[{s}]"),
        }
    }

    pub fn eval(&self, u: &FourierState<f64>, grid: &SpectralGrid<f64>) -> Result<f64, Error> {
        Ok(match *self {
            Observable::Mass => u.l2_sq(),
            Observable::ModeIntensity(n) => u.get(n).norm_sqr(),
            Observable::QuarticPotential => grid_lp_norm(u, 4.0, grid)?.powi(4),
            Observable::SobolevSq(s) => sobolev_norm(u, s).powi(2),
        })
    }
}

#[derive(Clone, Debug)]
pub struct InvarianceConfig {
    pub alpha: f64,
    pub cutoff_n: usize,
    pub t_final: f64,
    pub ensemble: usize,
    /// Empty means [`Observable::default_set`].
    pub observables: Vec<Observable>,
    pub sampling: RhoMode,
    /// Scale on the sampling weight's exponent (1 = the invariant density).
    pub exponent_scale: f64,
    /// Interaction coupling κ of the evolution (1 = the matched flow; the
    /// doubled-coupling negative control uses 2).
    pub coupling: f64,
    /// Fixed step; `None` resolves a step from a drift-targeted pilot run.
    pub dt: Option<f64>,
    pub seed: u64,
}

impl InvarianceConfig {
    pub fn new(alpha: f64, cutoff_n: usize, t_final: f64, ensemble: usize, seed: u64) -> Self {
        Self {
            alpha,
            cutoff_n,
            t_final,
            ensemble,
            observables: Vec::new(),
            sampling: RhoMode::Importance,
            exponent_scale: 1.0,
            coupling: 1.0,
            dt: None,
            seed,
        }
    }
}

/// Significance multiplier: 3 for at most five observables, Bonferroni
/// beyond (the family-wise false-alarm budget stays at the five-test level).
fn z_for(observables: usize) -> f64 {
    family_z(observables, 0.0135)
}

pub fn invariance_experiment(cfg: &InvarianceConfig) -> Result<ExperimentReport, Error> {
    let t0 = Instant::now();
    if cfg.ensemble < 2 {
        return Err(Error::InsufficientSamples {
            got: cfg.ensemble,
            need: 2,
        });
    }
    if !(cfg.exponent_scale.is_finite() && cfg.coupling.is_finite()) {
        return Err(Error::InvalidParameter(
            "exponent scale and coupling must be finite".into(),
        ));
    }
    let params = ModelParams::new(cfg.alpha, cfg.cutoff_n)?;
    let grid = SpectralGrid::<f64>::new(params.grid_size());
    let observables = if cfg.observables.is_empty() {
        Observable::default_set()
    } else {
        cfg.observables.clone()
    };
    for ob in &observables {
        if let Observable::ModeIntensity(n) = ob {
            if n.unsigned_abs() as usize > cfg.cutoff_n {
                return Err(Error::InvalidParameter(format!(
                    "mode intensity observable at |n|={} exceeds the cutoff {}",
                    n, cfg.cutoff_n
                )));
            }
        }
    }
    let density = GibbsDensity::Renormalized {
        exponent_scale: cfg.exponent_scale,
    };
    let eq = EquationVariant::truncated(params).with_coupling(cfg.coupling);
    let stream = Stream::from_seed(cfg.seed);

    // Resolve the time step once, from a drift-targeted pilot on member 0,
    // so every member integrates identically.
    let dt = match cfg.dt {
        Some(dt) => dt,
        None => {
            let pilot = sample_rho::<f64>(
                &stream.child(0),
                cfg.alpha,
                cfg.cutoff_n,
                cfg.sampling,
                density,
                &grid,
            )?;
            let opts = EvolveOptions {
                scheme: Scheme::Rk4,
                dt: DtPolicy::Auto {
                    target_drift: 1e-8,
                    max_halvings: 14,
                },
                stride: usize::MAX,
                drift_tolerance: 1e-6,
            };
            let traj = evolve_with(&pilot.state, &eq, cfg.t_final, &opts, &grid)?;
            traj.dt
        }
    };

    struct Member {
        log_weight: f64,
        attempts: u64,
        at_start: Vec<f64>,
        at_end: Vec<f64>,
    }

    let members: Vec<Member> = (0..cfg.ensemble)
        .into_par_iter()
        .map(|i| -> Result<Member, Error> {
            let child = stream.child(i as u64);
            let run = || -> Result<Member, Error> {
                let sample =
                    sample_rho::<f64>(&child, cfg.alpha, cfg.cutoff_n, cfg.sampling, density, &grid)?;
                let opts = EvolveOptions {
                    scheme: Scheme::Rk4,
                    dt: DtPolicy::Fixed(dt),
                    stride: usize::MAX,
                    drift_tolerance: 1e-6,
                };
                let traj = evolve_with(&sample.state, &eq, cfg.t_final, &opts, &grid)?;
                let u_end = traj.final_state();
                let mut at_start = Vec::with_capacity(observables.len());
                let mut at_end = Vec::with_capacity(observables.len());
                for ob in &observables {
                    at_start.push(ob.eval(&sample.state, &grid)?);
                    at_end.push(ob.eval(u_end, &grid)?);
                }
                Ok(Member {
                    log_weight: sample.log_weight,
                    attempts: sample.seed_path.last().copied().unwrap_or(0) + 1,
                    at_start,
                    at_end,
                })
            };
            run().map_err(|e| Error::member(i, child.key(), e))
        })
        .collect::<Result<Vec<_>, _>>()?;

    let log_ws: Vec<f64> = members.iter().map(|m| m.log_weight).collect();
    let z = z_for(observables.len());

    let mut report = ExperimentReport::new("invariance", cfg.seed);
    report.set_config("alpha", cfg.alpha);
    report.set_config("cutoff_n", cfg.cutoff_n);
    report.set_config("t_final", cfg.t_final);
    report.set_config("ensemble", cfg.ensemble);
    report.set_config(
        "sampling",
        match cfg.sampling {
            RhoMode::Importance => "importance".to_string(),
            RhoMode::Rejection { max_attempts } => format!("rejection(max_attempts={max_attempts})"),
        },
    );
    report.set_config("exponent_scale", cfg.exponent_scale);
    report.set_config("coupling", cfg.coupling);
    report.set_config("scheme", "rk4");
    report.set_config("dt", format!("{dt:e}"));
    report.set_config("z", z);

    for (j, ob) in observables.iter().enumerate() {
        let start: Vec<f64> = members.iter().map(|m| m.at_start[j]).collect();
        let end: Vec<f64> = members.iter().map(|m| m.at_end[j]).collect();
        let (m0, se0) = weighted_mean_se(&start, &log_ws);
        let (mt, set) = weighted_mean_se(&end, &log_ws);
        let delta = mt - m0;
        let se = se0.hypot(set);
        report.push_row(
            ob.label(),
            delta,
            se,
            format!("|mean(T)-mean(0)| <= {z:.3}*SE"),
            delta.abs() <= z * se,
        );
    }

    match cfg.sampling {
        RhoMode::Importance => {
            report.push_row(
                "effective_sample_size",
                effective_sample_size(&log_ws),
                0.0,
                "reported",
                true,
            );
        }
        RhoMode::Rejection { .. } => {
            let attempts: u64 = members.iter().map(|m| m.attempts).sum();
            report.push_row(
                "acceptance_rate",
                cfg.ensemble as f64 / attempts as f64,
                0.0,
                "reported",
                true,
            );
        }
    }

    report.runtime_seconds = t0.elapsed().as_secs_f64();
    Ok(report)
}
