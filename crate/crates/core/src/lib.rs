//! Stability analysis and simulation for planar admittance control with an
//! asymmetric stiffness matrix.
//!
//! The admittance model maps an external force to motion through a virtual
//! mass, an isotropic damper and a 2×2 stiffness `K` that need not be
//! symmetric:
//!
//! ```text
//! F_ext = m·ẍ + d·ẋ + K·x,      K = [[kx, ks + ka], [ks − ka, ky]]
//! ```
//!
//! The antisymmetric part of `K` produces a curl force field that can excite
//! spiral oscillation and inject energy. This crate provides:
//!
//! * [`stiffness`]: the symmetric/antisymmetric split, stiffness eigenvalues
//!   and the spiral-free condition.
//! * [`eigen`]: closed-form system eigenvalues, an independent quartic root
//!   oracle, critical and minimum damping, root loci and stability reports.
//! * [`simulator`]: fixed-step time integration under step forces.
//! * [`energy`]: energy bookkeeping and local passivity violations.
//! * [`sweep`]: analytic and simulated minimum-damper maps over `(ks, ka)`.
//! * [`export`]: the CSV layouts and number formatting used by the CLI.
//!
//! ```
//! use admittance::{AdmittanceParams, StiffnessMatrix};
//! use admittance::eigen::min_damping_sufficient;
//!
//! let k = StiffnessMatrix::new(100.0, 100.0, 0.0, 10.0)?;
//! let d_min = min_damping_sufficient(&k, 0.1)?;
//! assert!((d_min - 0.316).abs() < 1e-3);
//!
//! let p = AdmittanceParams::new(0.1, 0.34, k)?;
//! assert!(admittance::eigen::stability_report(&p)?.verdict.is_stable());
//! # Ok::<(), admittance::Error>(())
//! ```

pub mod eigen;
pub mod energy;
mod error;
pub mod export;
pub mod simulator;
pub mod stiffness;
pub mod sweep;

pub use error::{Error, Result};
pub use stiffness::{AdmittanceParams, StiffnessMatrix};

/// Half-width of the band around zero in which a maximum real part (1/s) is
/// classified as marginal rather than stable or unstable.
pub const MARGINAL_BAND: f64 = 1e-9;
