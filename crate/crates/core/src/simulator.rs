//! Fixed-step time integration of the admittance model under piecewise
//! constant external forces.
//!
//! Within each force segment the state is integrated as a deviation from the
//! segment's static equilibrium `K⁻¹F`. The dynamics are identical to the
//! absolute form `m·a = F − d·v − K·x`, but a decaying response keeps full
//! relative precision instead of bottoming out at the rounding level of the
//! equilibrium position. Spiral detection depends on this.
//!
//! Reported sample velocities are time-aligned with positions. The
//! semi-implicit update carries a velocity that effectively lives half a step
//! behind the position, so each sample reports `v + a·dt/2`; energy
//! bookkeeping on the raw staggered velocity would otherwise drift by
//! `O(ω·dt)`.

use nalgebra::{Matrix2, Vector2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::energy::{self, EnergyBreakdown};
use crate::{AdmittanceParams, Error, Result, StiffnessMatrix};

/// Positions or velocities beyond this magnitude abort a run as diverged.
pub const DIVERGENCE_GUARD: f64 = 1e9;

/// Default averaging window (s) for the convergence criterion.
pub const DEFAULT_WINDOW: f64 = 0.1;

/// Default mean kinetic energy threshold (J) for the convergence criterion.
pub const DEFAULT_KE_THRESHOLD: f64 = 0.2;

/// Relative overshoot below which a step response counts as monotone.
pub const OVERSHOOT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SimState {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub vx: f64,
    pub vy: f64,
}

impl SimState {
    pub fn at_rest(x: f64, y: f64) -> Self {
        SimState {
            x,
            y,
            ..Default::default()
        }
    }

    pub fn position(&self) -> Vector2<f64> {
        Vector2::new(self.x, self.y)
    }

    pub fn velocity(&self) -> Vector2<f64> {
        Vector2::new(self.vx, self.vy)
    }

    fn within_guard(&self) -> bool {
        [self.x, self.y, self.vx, self.vy]
            .iter()
            .all(|v| v.is_finite() && v.abs() <= DIVERGENCE_GUARD)
    }
}

/// A state that left the divergence guard.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Diverged(pub SimState);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Integrator {
    #[default]
    SemiImplicit,
    Rk4,
}

fn acceleration(
    p: &AdmittanceParams,
    k: &Matrix2<f64>,
    x: Vector2<f64>,
    v: Vector2<f64>,
    f: Vector2<f64>,
) -> Vector2<f64> {
    (f - v * p.d - k * x) / p.m
}

/// One semi-implicit Euler step: `a = (f − D·v − K·x)/m`, `v' = v + a·dt`,
/// `x' = x + v'·dt`.
pub fn step(
    s: &SimState,
    f: [f64; 2],
    p: &AdmittanceParams,
    dt: f64,
) -> Result<SimState, Diverged> {
    let k = p.k.matrix();
    let a = acceleration(p, &k, s.position(), s.velocity(), Vector2::new(f[0], f[1]));
    let v = s.velocity() + a * dt;
    let x = s.position() + v * dt;
    let next = SimState {
        t: s.t + dt,
        x: x.x,
        y: x.y,
        vx: v.x,
        vy: v.y,
    };
    if next.within_guard() {
        Ok(next)
    } else {
        Err(Diverged(next))
    }
}

fn rk4_step(
    s: &SimState,
    f: [f64; 2],
    p: &AdmittanceParams,
    dt: f64,
) -> Result<SimState, Diverged> {
    let k = p.k.matrix();
    let f = Vector2::new(f[0], f[1]);
    let deriv = |x: Vector2<f64>, v: Vector2<f64>| (v, acceleration(p, &k, x, v, f));
    let (x0, v0) = (s.position(), s.velocity());
    let (k1x, k1v) = deriv(x0, v0);
    let (k2x, k2v) = deriv(x0 + k1x * (dt / 2.0), v0 + k1v * (dt / 2.0));
    let (k3x, k3v) = deriv(x0 + k2x * (dt / 2.0), v0 + k2v * (dt / 2.0));
    let (k4x, k4v) = deriv(x0 + k3x * dt, v0 + k3v * dt);
    let x = x0 + (k1x + k2x * 2.0 + k3x * 2.0 + k4x) * (dt / 6.0);
    let v = v0 + (k1v + k2v * 2.0 + k3v * 2.0 + k4v) * (dt / 6.0);
    let next = SimState {
        t: s.t + dt,
        x: x.x,
        y: x.y,
        vx: v.x,
        vy: v.y,
    };
    if next.within_guard() {
        Ok(next)
    } else {
        Err(Diverged(next))
    }
}

/// Constant force applied from `start` (s) until the next segment begins.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForceSegment {
    pub start: f64,
    pub force: [f64; 2],
}

/// Unilateral penalty wall: when `y` exceeds `position` the wall pushes back
/// with `stiffness·(y − position)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Wall {
    pub position: f64,
    pub stiffness: f64,
}

impl Wall {
    fn force(&self, y: f64) -> f64 {
        if y > self.position {
            -self.stiffness * (y - self.position)
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub schedule: Vec<ForceSegment>,
    pub duration: f64,
    pub dt: f64,
    pub initial: SimState,
    #[serde(default)]
    pub integrator: Integrator,
    #[serde(default)]
    pub wall: Option<Wall>,
}

impl Scenario {
    /// Constant `force` from rest at the origin.
    pub fn step_force(force: [f64; 2], duration: f64, dt: f64) -> Self {
        Scenario {
            schedule: vec![ForceSegment { start: 0.0, force }],
            duration,
            dt,
            initial: SimState::default(),
            integrator: Integrator::SemiImplicit,
            wall: None,
        }
    }

    /// The reference step test: 10 N along y for 5 s at 1 ms.
    pub fn reference_step() -> Self {
        Self::step_force([0.0, 10.0], 5.0, 1e-3)
    }

    pub fn with_integrator(mut self, integrator: Integrator) -> Self {
        self.integrator = integrator;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::invalid(
                "dt",
                format!("must be > 0, got {}", self.dt),
            ));
        }
        if !(self.duration.is_finite() && self.duration >= self.dt) {
            return Err(Error::invalid(
                "duration",
                format!("must be >= dt, got {}", self.duration),
            ));
        }
        let first = self
            .schedule
            .first()
            .ok_or(Error::Empty("force schedule"))?;
        if first.start > 0.0 {
            return Err(Error::invalid(
                "schedule",
                "first segment must start at t = 0",
            ));
        }
        for w in self.schedule.windows(2) {
            if !(w[1].start > w[0].start) {
                return Err(Error::invalid("schedule", "segment starts must increase"));
            }
        }
        if self
            .schedule
            .iter()
            .any(|s| !s.start.is_finite() || s.force.iter().any(|f| !f.is_finite()))
        {
            return Err(Error::invalid("schedule", "values must be finite"));
        }
        let s = &self.initial;
        if ![s.x, s.y, s.vx, s.vy].iter().all(|v| v.is_finite()) {
            return Err(Error::invalid("initial", "state must be finite"));
        }
        if let Some(w) = &self.wall {
            if !(w.position.is_finite() && w.stiffness.is_finite() && w.stiffness >= 0.0) {
                return Err(Error::invalid(
                    "wall",
                    "position and stiffness must be finite, stiffness >= 0",
                ));
            }
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        (self.duration / self.dt).round() as usize
    }

    fn segment_index(&self, t: f64) -> usize {
        let slack = 1e-9 * self.dt;
        self.schedule
            .iter()
            .rposition(|s| s.start <= t + slack)
            .unwrap_or(0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Converged,
    Oscillating,
    Diverged,
}

/// One recorded sample. `offset` is the position relative to `anchor`, the
/// static equilibrium of the active force segment (the origin when the run
/// has a wall or a singular stiffness); `state` holds `anchor + offset`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sample {
    pub state: SimState,
    pub force: [f64; 2],
    pub anchor: [f64; 2],
    pub offset: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub dt: f64,
    pub integrator: Integrator,
    pub samples: Vec<Sample>,
    pub energy: EnergyBreakdown,
    pub status: RunStatus,
}

impl Trajectory {
    pub fn duration(&self) -> f64 {
        self.samples.last().map_or(0.0, |s| s.state.t)
    }

    pub fn final_state(&self) -> Option<SimState> {
        self.samples.last().map(|s| s.state)
    }
}

fn equilibrium(k: &StiffnessMatrix, f: [f64; 2]) -> Option<Vector2<f64>> {
    let km = k.matrix();
    let det = km.determinant();
    let scale = km.abs().max().powi(2);
    if det.abs() <= 1e-12 * scale || scale == 0.0 {
        return None;
    }
    km.try_inverse().map(|inv| inv * Vector2::new(f[0], f[1]))
}

/// Integrator loop shared by [`simulate`] and the sweep's lightweight
/// convergence runs. `visit` sees every sample and may stop early.
pub(crate) fn integrate(
    p: &AdmittanceParams,
    sc: &Scenario,
    mut visit: impl FnMut(&Sample) -> bool,
) -> Result<bool> {
    p.validate()?;
    sc.validate()?;
    let k = p.k.matrix();
    let dt = sc.dt;

    let anchor_for = |seg: usize| -> Vector2<f64> {
        if sc.wall.is_some() {
            return Vector2::zeros();
        }
        equilibrium(&p.k, sc.schedule[seg].force).unwrap_or_else(Vector2::zeros)
    };
    let anchored = sc.wall.is_none() && equilibrium(&p.k, [1.0, 1.0]).is_some();

    let mut segment = sc.segment_index(0.0);
    let mut anchor = anchor_for(segment);
    // Integrator state: offset position and (staggered, for semi-implicit) velocity.
    let mut offset = sc.initial.position() - anchor;
    let mut vel = sc.initial.velocity();

    for n in 0..=sc.steps() {
        let t = n as f64 * dt;
        let seg = sc.segment_index(t);
        if seg != segment {
            let next = anchor_for(seg);
            offset += anchor - next;
            anchor = next;
            segment = seg;
        }
        let position = anchor + offset;
        let mut applied = Vector2::from(sc.schedule[segment].force);
        if let Some(w) = &sc.wall {
            applied.y += w.force(position.y);
        }
        // Force seen by the offset dynamics; zero when anchored at equilibrium.
        let driving = if anchored { Vector2::zeros() } else { applied };

        let reported_velocity = match sc.integrator {
            Integrator::SemiImplicit => {
                vel + acceleration(p, &k, offset, vel, driving) * (0.5 * dt)
            }
            Integrator::Rk4 => vel,
        };
        let sample = Sample {
            state: SimState {
                t,
                x: position.x,
                y: position.y,
                vx: reported_velocity.x,
                vy: reported_velocity.y,
            },
            force: [applied.x, applied.y],
            anchor: [anchor.x, anchor.y],
            offset: [offset.x, offset.y],
        };
        if !visit(&sample) || n == sc.steps() {
            break;
        }

        let current = SimState {
            t,
            x: offset.x,
            y: offset.y,
            vx: vel.x,
            vy: vel.y,
        };
        let f = [driving.x, driving.y];
        let next = match sc.integrator {
            Integrator::SemiImplicit => step(&current, f, p, dt),
            Integrator::Rk4 => rk4_step(&current, f, p, dt),
        };
        match next {
            Ok(s) if (anchor + Vector2::new(s.x, s.y)).abs().max() <= DIVERGENCE_GUARD => {
                offset = Vector2::new(s.x, s.y);
                vel = Vector2::new(s.vx, s.vy);
            }
            _ => return Ok(false),
        }
    }
    Ok(true)
}

/// Runs the scenario and attaches energy terms and a run status.
pub fn simulate(p: &AdmittanceParams, sc: &Scenario) -> Result<Trajectory> {
    sc.validate()?;
    let mut samples = Vec::with_capacity(sc.steps() + 1);
    let completed = integrate(p, sc, |s| {
        samples.push(*s);
        true
    })?;
    let energy = energy::breakdown(&samples, p, sc.dt, sc.integrator);
    let mut tr = Trajectory {
        dt: sc.dt,
        integrator: sc.integrator,
        samples,
        energy,
        status: RunStatus::Diverged,
    };
    if completed {
        let window = DEFAULT_WINDOW.min(tr.duration());
        tr.status = if detect_convergence(&tr, window, DEFAULT_KE_THRESHOLD)? {
            RunStatus::Converged
        } else {
            RunStatus::Oscillating
        };
    }
    Ok(tr)
}

/// `d = m·ζ·sqrt(2(k_xm + k_ym + sqrt(−4k_am² + 4k_sm² + (k_xm − k_ym)²)))`,
/// the larger critical-damping branch scaled by `ζ`. A negative inner
/// radicand is carried through in complex arithmetic and the real part of
/// the result is used.
pub fn damping_from_zeta(k: &StiffnessMatrix, m: f64, zeta: f64) -> Result<f64> {
    if !(m.is_finite() && m > 0.0) {
        return Err(Error::invalid(
            "m",
            format!("mass must be finite and > 0, got {m}"),
        ));
    }
    if !(zeta.is_finite() && zeta >= 0.0) {
        return Err(Error::invalid("zeta", format!("must be >= 0, got {zeta}")));
    }
    k.validate()?;
    let q = k.discriminant() / (m * m);
    let inner = Complex64::new(q, 0.0).sqrt();
    let outer = (2.0 * (Complex64::new((k.kx + k.ky) / m, 0.0) + inner)).sqrt();
    Ok(m * zeta * outer.re)
}

/// Mean kinetic energy (J) over the final `window` seconds.
pub fn final_window_kinetic(tr: &Trajectory, window: f64) -> Result<f64> {
    if tr.samples.is_empty() {
        return Err(Error::Empty("trajectory"));
    }
    if !(window > 0.0) || window > tr.duration() + 0.5 * tr.dt {
        return Err(Error::invalid(
            "window",
            format!("must be in (0, {}], got {window}", tr.duration()),
        ));
    }
    let n = ((window / tr.dt).round() as usize).clamp(1, tr.energy.samples.len());
    let tail = &tr.energy.samples[tr.energy.samples.len() - n..];
    Ok(tail.iter().map(|e| e.kinetic).sum::<f64>() / n as f64)
}

/// True iff the mean kinetic energy over the final `window` is below
/// `threshold`.
pub fn detect_convergence(tr: &Trajectory, window: f64, threshold: f64) -> Result<bool> {
    Ok(final_window_kinetic(tr, window)? < threshold)
}

fn relative_to_final(tr: &Trajectory) -> Vec<Vector2<f64>> {
    let Some(last) = tr.samples.last() else {
        return Vec::new();
    };
    let (a_end, o_end) = (Vector2::from(last.anchor), Vector2::from(last.offset));
    tr.samples
        .iter()
        .map(|s| (Vector2::from(s.anchor) - a_end) + (Vector2::from(s.offset) - o_end))
        .collect()
}

/// Signed number of turns the position sweeps around the trajectory's final
/// point. `|winding| ≥ 1` marks a spiral path.
pub fn detect_spiral(tr: &Trajectory) -> f64 {
    if tr.samples.len() < 3 {
        return 0.0;
    }
    let mut total = 0.0;
    let mut prev: Option<f64> = None;
    for r in relative_to_final(tr) {
        if r.x == 0.0 && r.y == 0.0 {
            continue;
        }
        let angle = r.y.atan2(r.x);
        if let Some(p) = prev {
            let mut delta = angle - p;
            if delta > std::f64::consts::PI {
                delta -= 2.0 * std::f64::consts::PI;
            } else if delta < -std::f64::consts::PI {
                delta += 2.0 * std::f64::consts::PI;
            }
            total += delta;
        }
        prev = Some(angle);
    }
    total / (2.0 * std::f64::consts::PI)
}

/// Largest excursion past the final value along `axis` (0 = x, 1 = y),
/// relative to the total travel from the first sample. Zero for a
/// monotone approach.
pub fn overshoot(tr: &Trajectory, axis: usize) -> f64 {
    let rel = relative_to_final(tr);
    let Some(first) = rel.first() else {
        return 0.0;
    };
    let travel = -first[axis];
    if travel == 0.0 {
        return 0.0;
    }
    rel.iter().map(|r| r[axis] / travel).fold(0.0, f64::max)
}
