use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use admittance::eigen::{
    critical_damping, eigenvalues_closed_form, eigenvalues_oracle, linspace, root_locus,
    stability_report, Verdict,
};
use admittance::energy::passivity_violations;
use admittance::export;
use admittance::simulator::{
    damping_from_zeta, detect_spiral, final_window_kinetic, overshoot, simulate, RunStatus,
};
use admittance::sweep::{analytic_map, simulated_map};
use admittance::{AdmittanceParams, StiffnessMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use crate::config::{ConfigError, Loaded};

/// Largest relative oracle deviation `verify` accepts.
pub const VERIFY_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Ok,
    Unstable,
    Marginal,
}

impl Outcome {
    pub fn code(self) -> u8 {
        match self {
            Outcome::Ok => 0,
            Outcome::Unstable => 2,
            Outcome::Marginal => 3,
        }
    }
}

pub struct Context {
    pub loaded: Loaded,
    pub out: PathBuf,
    pub command: &'static str,
}

type CmdResult = Result<Outcome, ConfigError>;

fn io_err(path: &Path, e: std::io::Error) -> ConfigError {
    ConfigError(format!("{}: {e}", path.display()))
}

impl Context {
    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn prepare(&self) -> Result<(), ConfigError> {
        fs::create_dir_all(&self.out).map_err(|e| io_err(&self.out, e))
    }

    fn write_with(
        &self,
        name: &str,
        body: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
    ) -> Result<(), ConfigError> {
        let path = self.path(name);
        let file = File::create(&path).map_err(|e| io_err(&path, e))?;
        let mut w = BufWriter::new(file);
        body(&mut w)
            .and_then(|_| w.flush())
            .map_err(|e| io_err(&path, e))
    }

    /// Writes `{ "metadata": …, <key>: payload }` as pretty JSON.
    fn write_json<T: Serialize>(
        &self,
        name: &str,
        key: &str,
        payload: &T,
    ) -> Result<(), ConfigError> {
        let doc = json!({
            "metadata": {
                "command": self.command,
                "config_hash": self.loaded.hash,
                "config": self.loaded.config,
            },
            key: payload,
        });
        self.write_with(name, |w| {
            serde_json::to_writer_pretty(&mut *w, &doc)?;
            writeln!(w)
        })
    }
}

pub fn analyze(ctx: &Context) -> CmdResult {
    ctx.prepare()?;
    let report = stability_report(&ctx.loaded.config.params()?)?;
    ctx.write_json("report.json", "report", &report)?;
    println!(
        "verdict: {:?}, max real part {:.6e} 1/s",
        report.verdict, report.max_real_part_at_d
    );
    Ok(match report.verdict {
        Verdict::Stable => Outcome::Ok,
        Verdict::Unstable => Outcome::Unstable,
        Verdict::Marginal => Outcome::Marginal,
    })
}

/// `0 .. 2×` the larger critical-damping branch. Spiral matrices have no
/// critical value; the real part of the same expression is used instead.
fn default_d_range(k: &StiffnessMatrix, m: f64) -> Result<[f64; 2], ConfigError> {
    let upper = match critical_damping(k, m)? {
        Some(c) => c.upper,
        None => damping_from_zeta(k, m, 1.0)?,
    };
    Ok([0.0, 2.0 * upper])
}

pub fn rootlocus(ctx: &Context) -> CmdResult {
    let cfg = &ctx.loaded.config;
    let k = cfg.stiffness()?;
    let [lo, hi] = match cfg.d_range {
        Some(r) => r,
        None => default_d_range(&k, cfg.m)?,
    };
    if !(hi > lo) || cfg.d_samples < 2 {
        return Err(ConfigError(format!(
            "d_range: empty damper range [{lo}, {hi}] with {} samples",
            cfg.d_samples
        )));
    }
    let trace = root_locus(&k, cfg.m, &linspace(lo, hi, cfg.d_samples))?;
    ctx.prepare()?;
    ctx.write_with("rootlocus.csv", |w| export::write_root_locus(w, &trace))?;
    ctx.write_json(
        "rootlocus.json",
        "locus",
        &json!({ "d_range": [lo, hi], "samples": trace.len() }),
    )?;
    println!("{} locus samples over d in [{lo}, {hi}]", trace.len());
    Ok(Outcome::Ok)
}

pub fn simulate_cmd(ctx: &Context) -> CmdResult {
    let cfg = &ctx.loaded.config;
    let p = cfg.params()?;
    let tr = simulate(&p, &cfg.scenario()?)?;
    ctx.prepare()?;
    ctx.write_with("trajectory.csv", |w| export::write_trajectory(w, &tr))?;
    let window = cfg.window.min(tr.duration());
    let status = json!({
        "status": tr.status,
        "d": p.d,
        "final_state": tr.final_state(),
        "mean_kinetic_final_window": final_window_kinetic(&tr, window).ok(),
        "winding": detect_spiral(&tr),
        "overshoot_x": overshoot(&tr, 0),
        "overshoot_y": overshoot(&tr, 1),
        "peak_storage": tr.energy.peak_storage(),
        "max_balance_error": tr.energy.max_balance_error(),
    });
    ctx.write_json("status.json", "simulation", &status)?;
    ctx.write_json(
        "violations.json",
        "violations",
        &passivity_violations(&tr.energy),
    )?;
    println!("status: {:?}", tr.status);
    Ok(match tr.status {
        RunStatus::Converged => Outcome::Ok,
        RunStatus::Oscillating | RunStatus::Diverged => Outcome::Unstable,
    })
}

pub fn sweep(ctx: &Context, workers: usize) -> CmdResult {
    let cfg = &ctx.loaded.config;
    let base = cfg.params()?;
    let (ks, ka) = cfg.axes()?;
    let settings = cfg.sweep(workers);
    let grid = simulated_map(&base, &ks, &ka, &settings)?;
    let analytic = analytic_map(&base, &ks, &ka)?;
    ctx.prepare()?;
    ctx.write_with("sweep.csv", |w| export::write_grid(w, &grid))?;
    ctx.write_with("sweep_analytic.csv", |w| export::write_grid(w, &analytic))?;
    let meta = json!({
        "base": base,
        "criterion": settings.criterion,
        "d_increment": settings.d_increment,
        "duration": settings.duration,
        "force": settings.force,
        "rows": grid.cells.len(),
    });
    ctx.write_json("sweep.json", "sweep", &meta)?;
    println!("{} cells ({} × {})", grid.cells.len(), ks.len(), ka.len());
    Ok(Outcome::Ok)
}

/// Closed form against the quartic oracle on seeded random draws covering
/// both spiral-free and spiral stiffness.
pub fn verify(ctx: &Context) -> CmdResult {
    let cfg = &ctx.loaded.config;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (mut worst, mut spiral_free) = (0.0_f64, 0usize);
    for _ in 0..cfg.draws {
        let k = StiffnessMatrix::new(
            rng.gen_range(1.0..500.0),
            rng.gen_range(1.0..500.0),
            rng.gen_range(-200.0..200.0),
            rng.gen_range(-200.0..200.0),
        )?;
        let p = AdmittanceParams::new(rng.gen_range(0.05..5.0), rng.gen_range(0.0..50.0), k)?;
        spiral_free += usize::from(k.is_spiral_free());
        let closed = eigenvalues_closed_form(&p);
        let oracle = eigenvalues_oracle(&p)?;
        let scale = closed.values.iter().map(|v| v.norm()).fold(1.0, f64::max);
        worst = worst.max(closed.max_deviation(&oracle) / scale);
    }
    let pass = worst <= VERIFY_TOLERANCE;
    ctx.prepare()?;
    let result = json!({
        "draws": cfg.draws,
        "seed": cfg.seed,
        "spiral_free_draws": spiral_free,
        "spiral_draws": cfg.draws - spiral_free,
        "max_relative_deviation": worst,
        "tolerance": VERIFY_TOLERANCE,
        "pass": pass,
    });
    ctx.write_json("verify.json", "verify", &result)?;
    println!(
        "max relative deviation {worst:.3e} over {} draws",
        cfg.draws
    );
    Ok(if pass { Outcome::Ok } else { Outcome::Unstable })
}

pub fn forcefield(ctx: &Context) -> CmdResult {
    let cfg = &ctx.loaded.config;
    let field = cfg.stiffness()?.force_field(&cfg.field_grid())?;
    ctx.prepare()?;
    ctx.write_with("forcefield.csv", |w| export::write_force_field(w, &field))?;
    ctx.write_json(
        "forcefield.json",
        "field",
        &json!({ "extent": cfg.field_extent, "points_per_axis": cfg.field_points, "rows": field.len() }),
    )?;
    println!("{} field points", field.len());
    Ok(Outcome::Ok)
}
