//! Energy bookkeeping for the admittance model and local passivity checks.
//!
//! Supplied energy `∫ẋᵀF dt` splits into four terms:
//!
//! ```text
//! ∫ẋᵀF dt = ½ẋᵀMẋ + ½xᵀK_s x + ∫ẋᵀDẋ dt + ∫ẋᵀK_a x dt
//!           kinetic   potential   dissipated   curl work
//! ```
//!
//! The first two are stored energy. Dissipation never decreases, but the curl
//! term has no sign, so stored energy can grow while no power is supplied.

use nalgebra::Vector2;
use serde::Serialize;

use crate::simulator::{Integrator, Sample, SimState, Trajectory};
use crate::{AdmittanceParams, Result};

/// Per-step increases of the passivity excess below this (J) are ignored.
pub const VIOLATION_DEADBAND: f64 = 1e-12;

/// Energy terms (J) at one sample, in the absolute frame.
///
/// `excess` is stored energy minus supplied energy measured about the active
/// equilibrium, evaluated through the balance identity as
/// `−(dissipated + curl work about the equilibrium)`. It rises exactly when
/// the curl field injects more power than the damper removes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergySample {
    pub t: f64,
    pub kinetic: f64,
    pub potential: f64,
    pub dissipated: f64,
    pub curl_work: f64,
    pub total: f64,
    pub storage: f64,
    pub supplied: f64,
    pub excess: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Default)]
pub struct EnergyBreakdown {
    pub samples: Vec<EnergySample>,
}

impl EnergyBreakdown {
    pub fn peak_storage(&self) -> f64 {
        self.samples.iter().map(|s| s.storage).fold(0.0, f64::max)
    }

    /// Largest `|total − supplied|` over the run.
    pub fn max_balance_error(&self) -> f64 {
        self.samples
            .iter()
            .map(|s| (s.total - s.supplied).abs())
            .fold(0.0, f64::max)
    }
}

/// An interval over which stored energy grew faster than it was supplied.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ViolationInterval {
    pub start: f64,
    pub end: f64,
    pub gain: f64,
}

/// Instantaneous supplied power `vᵀf` (W).
pub fn power(s: &SimState, f: [f64; 2]) -> f64 {
    s.vx * f[0] + s.vy * f[1]
}

pub(crate) fn breakdown(
    samples: &[Sample],
    p: &AdmittanceParams,
    dt: f64,
    integrator: Integrator,
) -> EnergyBreakdown {
    let (ks, ka) = p.k.decompose();
    let mut out = Vec::with_capacity(samples.len());
    let (mut dissipated, mut curl, mut supplied, mut curl_eq) = (0.0, 0.0, 0.0, 0.0);
    for (i, s) in samples.iter().enumerate() {
        let x = s.state.position();
        let v = s.state.velocity();
        if i > 0 {
            let prev = &samples[i - 1];
            let x0 = prev.state.position();
            let v0 = prev.state.velocity();
            let dx = x - x0;
            let mid = (x + x0) * 0.5;
            let f_mid = (Vector2::from(prev.force) + Vector2::from(s.force)) * 0.5;
            let off_mid = (Vector2::from(prev.offset) + Vector2::from(s.offset)) * 0.5;
            dissipated += match integrator {
                // The reported velocity is the mean of the two velocities the
                // damper sees over the step, so this is the step's exact work.
                Integrator::SemiImplicit => p.d * dx.dot(&v0),
                Integrator::Rk4 => 0.5 * dt * p.d * (v0.dot(&v0) + v.dot(&v)),
            };
            curl += dx.dot(&(ka * mid));
            supplied += dx.dot(&f_mid);
            curl_eq += dx.dot(&(ka * off_mid));
        }
        let kinetic = 0.5 * p.m * v.dot(&v);
        let potential = 0.5 * x.dot(&(ks * x));
        out.push(EnergySample {
            t: s.state.t,
            kinetic,
            potential,
            dissipated,
            curl_work: curl,
            total: kinetic + potential + dissipated + curl,
            storage: kinetic + potential,
            supplied,
            excess: -(dissipated + curl_eq),
        });
    }
    EnergyBreakdown { samples: out }
}

/// Recomputes the energy terms of a trajectory on its sampling grid.
///
/// Work terms are accumulated step by step as the midpoint force dotted with
/// the sampled displacement. Damper work follows the integrator.
pub fn energy_breakdown(tr: &Trajectory, p: &AdmittanceParams) -> Result<EnergyBreakdown> {
    p.validate()?;
    Ok(breakdown(&tr.samples, p, tr.dt, tr.integrator))
}

/// Maximal runs of consecutive samples over which `excess` strictly rises.
pub fn passivity_violations(eb: &EnergyBreakdown) -> Vec<ViolationInterval> {
    let mut out = Vec::new();
    let mut open: Option<(f64, f64)> = None; // (start time, excess at start)
    for w in eb.samples.windows(2) {
        let rising = w[1].excess - w[0].excess > VIOLATION_DEADBAND;
        match (rising, open) {
            (true, None) => open = Some((w[0].t, w[0].excess)),
            (false, Some((start, base))) => {
                out.push(ViolationInterval {
                    start,
                    end: w[0].t,
                    gain: w[0].excess - base,
                });
                open = None;
            }
            _ => {}
        }
    }
    if let (Some((start, base)), Some(last)) = (open, eb.samples.last()) {
        out.push(ViolationInterval {
            start,
            end: last.t,
            gain: last.excess - base,
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulator::{simulate, Scenario};
    use crate::StiffnessMatrix;

    #[test]
    fn power_examples() {
        let s = SimState::default();
        assert_eq!(power(&s, [3.0, 4.0]), 0.0);
        let s = SimState {
            vy: 0.1,
            ..Default::default()
        };
        assert!((power(&s, [0.0, 10.0]) - 1.0).abs() < 1e-15);
        let s = SimState {
            vx: 2.0,
            vy: 1.0,
            ..Default::default()
        };
        assert_eq!(power(&s, [-1.0, 2.0]), 0.0);
    }

    #[test]
    fn at_rest_is_all_zero() {
        let p = AdmittanceParams::reference(0.34);
        let tr = simulate(&p, &Scenario::step_force([0.0, 0.0], 0.5, 1e-3)).unwrap();
        for e in &tr.energy.samples {
            assert_eq!(
                [
                    e.kinetic,
                    e.potential,
                    e.dissipated,
                    e.curl_work,
                    e.total,
                    e.supplied,
                    e.excess
                ],
                [0.0; 7]
            );
        }
        assert!(passivity_violations(&tr.energy).is_empty());
    }

    #[test]
    fn symmetric_stiffness_has_no_curl_and_no_violations() {
        let k = StiffnessMatrix::new(100.0, 60.0, 25.0, 0.0).unwrap();
        for d in [0.0, 0.05, 0.5] {
            let p = AdmittanceParams::new(0.1, d, k).unwrap();
            let tr = simulate(&p, &Scenario::reference_step()).unwrap();
            assert!(tr.energy.samples.iter().all(|e| e.curl_work == 0.0));
            assert!(passivity_violations(&tr.energy).is_empty(), "d={d}");
        }
    }

    #[test]
    fn dissipation_is_nondecreasing() {
        let tr = simulate(
            &AdmittanceParams::reference(0.34),
            &Scenario::reference_step(),
        )
        .unwrap();
        for w in tr.energy.samples.windows(2) {
            assert!(w[1].dissipated >= w[0].dissipated);
        }
    }

    #[test]
    fn recomputation_is_bit_identical() {
        let p = AdmittanceParams::reference(0.34);
        let tr = simulate(&p, &Scenario::reference_step()).unwrap();
        assert_eq!(energy_breakdown(&tr, &p).unwrap(), tr.energy);
    }

    #[test]
    fn intervals_are_maximal_runs() {
        let mk = |t: f64, excess: f64| EnergySample {
            t,
            kinetic: 0.0,
            potential: 0.0,
            dissipated: 0.0,
            curl_work: 0.0,
            total: 0.0,
            storage: 0.0,
            supplied: 0.0,
            excess,
        };
        let eb = EnergyBreakdown {
            samples: vec![
                mk(0.0, 0.0),
                mk(1.0, 1.0),
                mk(2.0, 3.0),
                mk(3.0, 2.0),
                mk(4.0, 2.5),
            ],
        };
        let v = passivity_violations(&eb);
        assert_eq!(
            v,
            vec![
                ViolationInterval {
                    start: 0.0,
                    end: 2.0,
                    gain: 3.0
                },
                ViolationInterval {
                    start: 3.0,
                    end: 4.0,
                    gain: 0.5
                },
            ]
        );
    }
}
