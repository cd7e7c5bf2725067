//! Minimum-damper maps over the off-diagonal stiffness plane `(ks, ka)`.
//!
//! The analytic map evaluates the sufficient bound per cell. The simulated
//! map replays the step-force test at ascending damper values and records
//! the first one that passes the kinetic-energy convergence criterion.
//! Cells are independent and evaluated in parallel; results do not depend on
//! scheduling.

use rayon::prelude::*;
use serde::Serialize;

use crate::eigen::min_damping_sufficient;
use crate::simulator::{self, Integrator, Scenario};
use crate::{AdmittanceParams, Error, Result, StiffnessMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CellStatus {
    Analytic,
    Simulated,
    Infeasible,
}

impl CellStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            CellStatus::Analytic => "analytic",
            CellStatus::Simulated => "simulated",
            CellStatus::Infeasible => "infeasible",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepCell {
    pub ks: f64,
    pub ka: f64,
    /// Minimum damper for this map (N·s/m); `None` when infeasible.
    pub d_min: Option<f64>,
    pub status: CellStatus,
    /// The sufficient bound for the cell, `None` when the symmetric part is
    /// not positive definite.
    pub d_min_analytic: Option<f64>,
}

/// Cells are stored `ks`-major: index `i·ka_values.len() + j`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepGrid {
    pub ks_values: Vec<f64>,
    pub ka_values: Vec<f64>,
    pub cells: Vec<SweepCell>,
    pub base: AdmittanceParams,
}

impl SweepGrid {
    pub fn cell(&self, ks: f64, ka: f64) -> Option<&SweepCell> {
        let i = self.ks_values.iter().position(|&v| v == ks)?;
        let j = self.ka_values.iter().position(|&v| v == ka)?;
        self.cells.get(i * self.ka_values.len() + j)
    }
}

/// Kinetic-energy convergence test: mean KE over the final `window` seconds
/// below `threshold` joules.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Criterion {
    pub window: f64,
    pub threshold: f64,
}

impl Default for Criterion {
    fn default() -> Self {
        Criterion {
            window: simulator::DEFAULT_WINDOW,
            threshold: simulator::DEFAULT_KE_THRESHOLD,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimulatedSweep {
    pub d_increment: f64,
    pub duration: f64,
    pub dt: f64,
    pub force: [f64; 2],
    pub criterion: Criterion,
    pub integrator: Integrator,
    /// Worker threads; 0 uses the rayon default.
    pub workers: usize,
}

impl Default for SimulatedSweep {
    fn default() -> Self {
        SimulatedSweep {
            d_increment: 0.1,
            duration: 5.0,
            dt: 1e-3,
            force: [0.0, 10.0],
            criterion: Criterion::default(),
            integrator: Integrator::SemiImplicit,
            workers: 0,
        }
    }
}

/// `lo, lo + step, …` up to `hi` inclusive (to within half a step).
pub fn axis(lo: f64, hi: f64, step: f64) -> Result<Vec<f64>> {
    if !(step.is_finite() && step > 0.0) || !lo.is_finite() || !hi.is_finite() || hi < lo {
        return Err(Error::invalid(
            "axis",
            format!("bad axis {lo}..{hi} step {step}"),
        ));
    }
    let n = ((hi - lo) / step + 0.5).floor() as usize;
    Ok((0..=n).map(|i| lo + step * i as f64).collect())
}

/// The default `−80..80` step 10 axis (17 points).
pub fn default_axis() -> Vec<f64> {
    (-8..=8).map(|i| 10.0 * i as f64).collect()
}

fn check_axis(name: &'static str, values: &[f64]) -> Result<()> {
    if values.is_empty() {
        return Err(Error::Empty(name));
    }
    if values.iter().any(|v| !v.is_finite()) || values.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::invalid(
            name,
            "axis must be finite and strictly increasing",
        ));
    }
    Ok(())
}

fn cell_stiffness(base: &AdmittanceParams, ks: f64, ka: f64) -> StiffnessMatrix {
    StiffnessMatrix { ks, ka, ..base.k }
}

fn analytic_value(base: &AdmittanceParams, ks: f64, ka: f64) -> Option<f64> {
    min_damping_sufficient(&cell_stiffness(base, ks, ka), base.m).ok()
}

fn grid_points(ks_axis: &[f64], ka_axis: &[f64]) -> Vec<(f64, f64)> {
    ks_axis
        .iter()
        .flat_map(|&ks| ka_axis.iter().map(move |&ka| (ks, ka)))
        .collect()
}

fn validate_base(base: &AdmittanceParams, ks_axis: &[f64], ka_axis: &[f64]) -> Result<()> {
    base.validate()?;
    check_axis("ks axis", ks_axis)?;
    check_axis("ka axis", ka_axis)?;
    if !(base.k.kx > 0.0 && base.k.ky > 0.0) {
        return Err(Error::invalid(
            "base",
            "diagonal stiffness must be positive",
        ));
    }
    Ok(())
}

/// Sufficient minimum damper per cell. Cells whose symmetric part is not
/// positive definite are infeasible.
pub fn analytic_map(
    base: &AdmittanceParams,
    ks_axis: &[f64],
    ka_axis: &[f64],
) -> Result<SweepGrid> {
    validate_base(base, ks_axis, ka_axis)?;
    let cells = grid_points(ks_axis, ka_axis)
        .into_iter()
        .map(|(ks, ka)| {
            let value = analytic_value(base, ks, ka);
            SweepCell {
                ks,
                ka,
                d_min: value,
                status: if value.is_some() {
                    CellStatus::Analytic
                } else {
                    CellStatus::Infeasible
                },
                d_min_analytic: value,
            }
        })
        .collect();
    Ok(SweepGrid {
        ks_values: ks_axis.to_vec(),
        ka_values: ka_axis.to_vec(),
        cells,
        base: *base,
    })
}

/// Runs the step test once and applies the convergence criterion.
pub fn passes_criterion(p: &AdmittanceParams, cfg: &SimulatedSweep) -> Result<bool> {
    let sc = Scenario::step_force(cfg.force, cfg.duration, cfg.dt).with_integrator(cfg.integrator);
    let mut kinetic = Vec::with_capacity(sc.steps() + 1);
    let completed = simulator::integrate(p, &sc, |s| {
        let v = s.state.velocity();
        kinetic.push(0.5 * p.m * v.dot(&v));
        true
    })?;
    if !completed {
        return Ok(false);
    }
    let n = ((cfg.criterion.window / cfg.dt).round() as usize).clamp(1, kinetic.len());
    let tail = &kinetic[kinetic.len() - n..];
    Ok(tail.iter().sum::<f64>() / (n as f64) < cfg.criterion.threshold)
}

fn simulated_cell(
    base: &AdmittanceParams,
    ks: f64,
    ka: f64,
    cfg: &SimulatedSweep,
) -> Result<SweepCell> {
    let analytic = analytic_value(base, ks, ka);
    let infeasible = SweepCell {
        ks,
        ka,
        d_min: None,
        status: CellStatus::Infeasible,
        d_min_analytic: analytic,
    };
    let Some(bound) = analytic else {
        return Ok(infeasible);
    };
    let cap = 10.0 * bound + 1.0;
    let k = cell_stiffness(base, ks, ka);
    for i in 0.. {
        let d = i as f64 * cfg.d_increment;
        if d > cap {
            break;
        }
        if passes_criterion(&AdmittanceParams::new(base.m, d, k)?, cfg)? {
            return Ok(SweepCell {
                d_min: Some(d),
                status: CellStatus::Simulated,
                ..infeasible
            });
        }
    }
    Ok(infeasible)
}

/// For each cell, ascends `d = 0, Δ, 2Δ, …` until the step test converges.
/// Cells with no passing damper up to `10 × analytic + 1` are infeasible.
pub fn simulated_map(
    base: &AdmittanceParams,
    ks_axis: &[f64],
    ka_axis: &[f64],
    cfg: &SimulatedSweep,
) -> Result<SweepGrid> {
    validate_base(base, ks_axis, ka_axis)?;
    if !(cfg.d_increment.is_finite() && cfg.d_increment > 0.0) {
        return Err(Error::invalid(
            "d_increment",
            format!("must be > 0, got {}", cfg.d_increment),
        ));
    }
    if !(cfg.criterion.window > 0.0 && cfg.criterion.window <= cfg.duration) {
        return Err(Error::invalid("window", "must be in (0, duration]"));
    }
    Scenario::step_force(cfg.force, cfg.duration, cfg.dt).validate()?;

    let points = grid_points(ks_axis, ka_axis);
    let run = || -> Result<Vec<SweepCell>> {
        points
            .par_iter()
            .map(|&(ks, ka)| simulated_cell(base, ks, ka, cfg))
            .collect()
    };
    let cells = if cfg.workers == 0 {
        run()?
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.workers)
            .build()
            .map_err(|e| Error::invalid("workers", e.to_string()))?
            .install(run)?
    };
    Ok(SweepGrid {
        ks_values: ks_axis.to_vec(),
        ka_values: ka_axis.to_vec(),
        cells,
        base: *base,
    })
}
