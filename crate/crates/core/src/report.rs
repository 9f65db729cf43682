//! Machine-readable run outputs: a `report.csv` of pass/fail rows and a
//! `manifest.json` that permits exact replay.
//!
//! The CSV is a pure function of (configuration, master seed) — floats are
//! printed with 17 significant digits, strings are comma-sanitized, rows are
//! emitted in a fixed order, and nothing time- or machine-dependent enters
//! it, so identical runs produce byte-identical files regardless of thread
//! count. Wall-clock runtime and the content hash of the CSV live in the
//! manifest instead.

use crate::dynamics::Trajectory;
use crate::error::Error;
use crate::real::Real;
use serde_json::json;
use sha2::{Digest, Sha256};
use std::fmt::Write as _;
use std::path::Path;

/// 17-significant-digit scientific notation: enough to reproduce any f64
/// exactly on re-parse.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(bytes);
    let digest = h.finalize();
    let mut s = String::with_capacity(64);
    for b in digest {
        let _ = write!(s, "{b:02x}");
    }
    s
}

fn sanitize(field: &str) -> String {
    field.replace([',', '\n'], ";")
}

/// One tested quantity.
#[derive(Clone, Debug)]
pub struct ReportRow {
    /// What was measured (e.g. "slope of ln D vs ln N").
    pub observable: String,
    pub estimate: f64,
    /// Standard error or tolerance attached to the estimate.
    pub uncertainty: f64,
    /// The acceptance condition, spelled out (e.g. "<= -0.1").
    pub target: String,
    pub pass: bool,
}

/// A finished experiment: configuration echo, tested rows, seed, runtime.
#[derive(Clone, Debug)]
pub struct ExperimentReport {
    pub name: String,
    /// Ordered key/value echo of the effective configuration.
    pub config: Vec<(String, String)>,
    pub rows: Vec<ReportRow>,
    pub master_seed: u64,
    /// Seconds of wall clock; recorded in the manifest only (it is the one
    /// nondeterministic output).
    pub runtime_seconds: f64,
}

impl ExperimentReport {
    pub fn new(name: impl Into<String>, master_seed: u64) -> Self {
        Self {
            name: name.into(),
            config: Vec::new(),
            rows: Vec::new(),
            master_seed,
            runtime_seconds: 0.0,
        }
    }

    pub fn set_config(&mut self, key: impl Into<String>, value: impl ToString) {
        self.config.push((key.into(), value.to_string()));
    }

    pub fn push_row(
        &mut self,
        observable: impl Into<String>,
        estimate: f64,
        uncertainty: f64,
        target: impl Into<String>,
        pass: bool,
    ) {
        self.rows.push(ReportRow {
            observable: observable.into(),
            estimate,
            uncertainty,
            target: target.into(),
            pass,
        });
    }

    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    /// The deterministic report body.
    pub fn csv(&self) -> String {
        let mut out = String::from("observable,estimate,uncertainty,target,pass\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                sanitize(&r.observable),
                fmt_f64(r.estimate),
                fmt_f64(r.uncertainty),
                sanitize(&r.target),
                r.pass
            );
        }
        out
    }

    /// Replay manifest: configuration, seed, pass summary, runtime, and the
    /// SHA-256 of the CSV body it accompanies.
    pub fn manifest_json(&self) -> String {
        let config: serde_json::Map<String, serde_json::Value> = self
            .config
            .iter()
            .map(|(k, v)| (k.clone(), json!(v)))
            .collect();
        let value = json!({
            "experiment": self.name,
            "master_seed": self.master_seed,
            "config": config,
            "rows": self.rows.len(),
            "all_pass": self.all_pass(),
            "runtime_seconds": self.runtime_seconds,
            "report_sha256": sha256_hex(self.csv().as_bytes()),
        });
        let mut s = serde_json::to_string_pretty(&value).expect("static JSON shape");
        s.push('\n');
        s
    }

    /// Write `report.csv` and `manifest.json` into `dir` (created if absent).
    pub fn write(&self, dir: &Path) -> Result<(), Error> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("report.csv"), self.csv())?;
        std::fs::write(dir.join("manifest.json"), self.manifest_json())?;
        Ok(())
    }
}

/// Trajectory dump: one row per (recorded time, mode).
pub fn trajectory_csv<T: Real>(traj: &Trajectory<T>) -> String {
    let mut out = String::from("t,n,re,im\n");
    let k = traj.cutoff_n as i64;
    for (t, state) in traj.times.iter().zip(&traj.states) {
        let tf = t.to_f64().unwrap();
        for n in -k..=k {
            let z = state.get(n);
            let _ = writeln!(
                out,
                "{},{},{},{}",
                fmt_f64(tf),
                n,
                fmt_f64(z.re.to_f64().unwrap()),
                fmt_f64(z.im.to_f64().unwrap())
            );
        }
    }
    out
}

/// Companion manifest for a trajectory CSV.
pub fn trajectory_manifest<T: Real>(
    traj: &Trajectory<T>,
    grid_size: usize,
    seed: Option<u64>,
) -> String {
    let (dm, de) = traj.max_rel_drifts();
    let value = json!({
        "alpha": traj.alpha.to_f64().unwrap(),
        "cutoff_n": traj.cutoff_n,
        "grid_size": grid_size,
        "scheme": traj.scheme.as_str(),
        "variant": traj.variant.as_str(),
        "dt": traj.dt.to_f64().unwrap(),
        "steps": traj.steps,
        "recorded_times": traj.times.len(),
        "seed": seed,
        "max_rel_drift_mass": dm.to_f64().unwrap(),
        "max_rel_drift_energy": de.to_f64().unwrap(),
        "drift_flagged": traj.drift_flagged,
    });
    let mut s = serde_json::to_string_pretty(&value).expect("static JSON shape");
    s.push('\n');
    s
}
