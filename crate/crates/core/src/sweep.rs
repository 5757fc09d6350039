//! Parameter sweeps over channel families.

use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::channels::{build_fusion, build_lindblad_process};
use crate::error::{Error, Result};
use crate::formats::csv_float;
use crate::measures::{evaluate, MeasureOptions, MeasureReport};
use crate::quantum::ProcessMatrix;

/// Default upper end of the dynamics grid.
pub const DEFAULT_TAU_MAX: f64 = 4.0 * std::f64::consts::PI;
/// Default number of dynamics grid points (step `π/50` on `[0, 4π]`).
pub const DEFAULT_DYNAMICS_STEPS: usize = 201;

#[derive(Clone, Debug, Serialize)]
pub struct SweepPoint {
    pub value: f64,
    pub report: MeasureReport,
    /// Excluded from JSON so that reruns produce identical files.
    #[serde(skip)]
    pub wall_time_s: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepResult {
    pub parameter: String,
    /// CSV columns after the parameter, all keys of [`MeasureReport::rows`].
    pub columns: Vec<String>,
    pub points: Vec<SweepPoint>,
}

impl SweepResult {
    pub fn grid(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.value).collect()
    }

    /// Column `name` over the grid; `None` where a point lacks it.
    pub fn column(&self, name: &str) -> Vec<Option<f64>> {
        self.points
            .iter()
            .map(|p| {
                p.report
                    .rows()
                    .into_iter()
                    .find(|(n, _)| *n == name)
                    .map(|(_, v)| v)
            })
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.parameter.clone();
        for c in &self.columns {
            out.push(',');
            out.push_str(c);
        }
        out.push('\n');
        for p in &self.points {
            out.push_str(&csv_float(p.value));
            let rows = p.report.rows();
            for c in &self.columns {
                out.push(',');
                if let Some((_, v)) = rows.iter().find(|(n, _)| n == c) {
                    out.push_str(&csv_float(*v));
                }
            }
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }
}

/// `steps` evenly spaced points from `start` to `stop` inclusive.
pub fn linspace(start: f64, stop: f64, steps: usize) -> Result<Vec<f64>> {
    if steps < 2 {
        return Err(Error::InvalidParameter(format!(
            "need at least 2 grid points, got {steps}"
        )));
    }
    if !(start.is_finite() && stop.is_finite() && stop > start) {
        return Err(Error::InvalidParameter(format!(
            "grid [{start}, {stop}] is empty"
        )));
    }
    let h = (stop - start) / (steps - 1) as f64;
    Ok((0..steps)
        .map(|i| {
            if i == steps - 1 {
                stop
            } else {
                start + i as f64 * h
            }
        })
        .collect())
}

/// Evaluates `build` at every grid point on a pool of `jobs` threads
/// (`None` for the rayon default). Points come back in grid order.
pub fn run_sweep<F>(
    parameter: &str,
    grid: &[f64],
    columns: &[&str],
    jobs: Option<usize>,
    creation: bool,
    opts: &MeasureOptions,
    build: F,
) -> Result<SweepResult>
where
    F: Fn(f64) -> Result<ProcessMatrix> + Sync,
{
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter(
            "sweep grid must be strictly increasing".into(),
        ));
    }
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(j) = jobs {
        if j == 0 {
            return Err(Error::InvalidParameter("--jobs must be positive".into()));
        }
        pool = pool.num_threads(j);
    }
    let pool = pool
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    let points = pool.install(|| {
        grid.par_iter()
            .map(|&x| {
                let t = Instant::now();
                let chi = build(x)?;
                let report = evaluate(&chi, None, creation, opts)?;
                Ok(SweepPoint {
                    value: x,
                    report,
                    wall_time_s: t.elapsed().as_secs_f64(),
                })
            })
            .collect::<Result<Vec<_>>>()
    })?;
    Ok(SweepResult {
        parameter: parameter.to_string(),
        columns: columns.iter().map(|c| c.to_string()).collect(),
        points,
    })
}

/// Noisy fusion over `p_noise ∈ [0, 1]`.
pub fn sweep_fusion(
    steps: usize,
    creation: bool,
    jobs: Option<usize>,
    opts: &MeasureOptions,
) -> Result<SweepResult> {
    let grid = linspace(0.0, 1.0, steps)?;
    let columns: &[&str] = if creation {
        &["alpha_pre", "beta_pre", "alpha_cre", "beta_cre"]
    } else {
        &["alpha_pre", "beta_pre"]
    };
    run_sweep(
        "p_noise",
        &grid,
        columns,
        jobs,
        creation,
        opts,
        build_fusion,
    )
}

/// Lindblad dynamics over `τ ∈ [0, tau_max]`, all measures.
pub fn sweep_dynamics(
    gamma: f64,
    tau_max: f64,
    steps: usize,
    jobs: Option<usize>,
    opts: &MeasureOptions,
) -> Result<SweepResult> {
    if !(gamma >= 0.0 && gamma.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "gamma must be non-negative, got {gamma}"
        )));
    }
    let grid = linspace(0.0, tau_max, steps)?;
    run_sweep(
        "tau",
        &grid,
        &[
            "alpha_pre",
            "beta_pre",
            "alpha_cre",
            "beta_cre",
            "alpha_pre_prime",
        ],
        jobs,
        true,
        opts,
        |tau| build_lindblad_process(tau, gamma),
    )
}
