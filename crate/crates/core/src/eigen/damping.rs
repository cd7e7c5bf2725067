use serde::Serialize;

use super::closed_form::max_real_part;
use crate::stiffness::SpiralClass;
use crate::{AdmittanceParams, Error, Result, StiffnessMatrix, MARGINAL_BAND};

/// Default bisection tolerance for [`min_damping_exact`] (N·s/m).
pub const DEFAULT_BISECTION_TOL: f64 = 1e-6;

/// Damper values (N·s/m) at which each conjugate pair of system eigenvalues
/// meets the real axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriticalDamping {
    pub upper: f64,
    pub lower: f64,
}

impl CriticalDamping {
    pub fn as_pair(&self) -> [f64; 2] {
        [self.upper, self.lower]
    }
}

fn check_mass(m: f64) -> Result<()> {
    if m.is_finite() && m > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(
            "m",
            format!("mass must be finite and > 0, got {m}"),
        ))
    }
}

/// `d = m·sqrt(2(k_xm + k_ym ± sqrt(−4k_am² + 4k_sm² + (k_xm − k_ym)²)))`.
///
/// `None` when the stiffness eigenvalues are complex: the curl field then
/// keeps an imaginary component at every damping. Also `None` when a
/// stiffness eigenvalue is negative, since that pair never oscillates.
pub fn critical_damping(k: &StiffnessMatrix, m: f64) -> Result<Option<CriticalDamping>> {
    check_mass(m)?;
    k.validate()?;
    if !k.is_spiral_free() {
        return Ok(None);
    }
    let q = match k.spiral_class() {
        SpiralClass::Boundary => 0.0,
        _ => k.discriminant(),
    };
    let r = q.sqrt() / m;
    let sum = (k.kx + k.ky) / m;
    let (hi, lo) = (2.0 * (sum + r), 2.0 * (sum - r));
    if lo < 0.0 {
        return Ok(None);
    }
    Ok(Some(CriticalDamping {
        upper: m * hi.sqrt(),
        lower: m * lo.sqrt(),
    }))
}

/// Proven-sufficient minimum damper `sqrt(ka²·m / σ_min)`.
///
/// `σ_min` is the smaller eigenvalue of the symmetric part: rotating into
/// the principal axes of `K_s` leaves `K_a` unchanged, which reduces any
/// matrix to the `ks = 0` case where the bound is derived. With `ks = 0`
/// this is `sqrt(ka²·m / min(kx, ky))`. Strictly spiral-free matrices need
/// no damping beyond an arbitrarily small positive value and return 0.
pub fn min_damping_sufficient(k: &StiffnessMatrix, m: f64) -> Result<f64> {
    check_mass(m)?;
    k.validate()?;
    let (sigma_min, _) = k.symmetric_eigenvalues();
    if sigma_min <= 0.0 {
        return Err(Error::IndefiniteStiffness {
            min_eigenvalue: sigma_min,
        });
    }
    if k.ka == 0.0 || k.spiral_class() == SpiralClass::SpiralFree {
        return Ok(0.0);
    }
    Ok((k.ka * k.ka * m / sigma_min).sqrt())
}

/// Smallest damper with every eigenvalue in the closed left half-plane
/// (up to the marginal band), found by bisection to `tol`.
pub fn min_damping_exact(k: &StiffnessMatrix, m: f64, tol: f64) -> Result<f64> {
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::invalid("tol", format!("must be > 0, got {tol}")));
    }
    let sufficient = min_damping_sufficient(k, m)?;
    let settled = |d: f64| -> Result<(bool, f64)> {
        let re = max_real_part(&AdmittanceParams::new(m, d, *k)?);
        Ok((re <= MARGINAL_BAND, re))
    };
    if settled(0.0)?.0 {
        return Ok(0.0);
    }

    let critical = critical_damping(k, m)?;
    let mut upper = critical
        .map(|c| c.upper.max(c.lower))
        .unwrap_or(0.0)
        .max(sufficient);
    upper = (2.0 * upper).max(tol);
    let (ok, re) = settled(upper)?;
    if !ok {
        return Err(Error::BracketFailure {
            upper,
            max_real_part: re,
        });
    }

    let (mut lo, mut hi) = (0.0, upper);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if settled(mid)?.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn k(kx: f64, ky: f64, ks: f64, ka: f64) -> StiffnessMatrix {
        StiffnessMatrix::new(kx, ky, ks, ka).unwrap()
    }

    #[test]
    fn critical_damping_examples() {
        let c = critical_damping(&k(100.0, 100.0, 0.0, 0.0), 1.0)
            .unwrap()
            .unwrap();
        assert_relative_eq!(c.upper, 20.0, max_relative = 1e-14);
        assert_relative_eq!(c.lower, 20.0, max_relative = 1e-14);

        let c = critical_damping(&k(140.0, 60.0, 0.0, 0.0), 1.0)
            .unwrap()
            .unwrap();
        assert_relative_eq!(c.upper, 560f64.sqrt(), max_relative = 1e-14);
        assert_relative_eq!(c.lower, 240f64.sqrt(), max_relative = 1e-14);
        assert!((c.upper - 23.664).abs() < 1e-3 && (c.lower - 15.492).abs() < 1e-3);

        assert_eq!(
            critical_damping(&k(100.0, 100.0, 0.0, 10.0), 0.1).unwrap(),
            None
        );
        assert!(critical_damping(&k(100.0, 100.0, 0.0, 0.0), 0.0).is_err());
    }

    #[test]
    fn sufficient_examples() {
        let table = k(100.0, 100.0, 0.0, 10.0);
        assert!((min_damping_sufficient(&table, 0.1).unwrap() - 0.1f64.sqrt()).abs() < 1e-15);
        assert!((min_damping_sufficient(&table, 0.1).unwrap() - 0.3162).abs() < 5e-4);

        assert_eq!(
            min_damping_sufficient(&k(100.0, 120.0, 30.0, 0.0), 0.1).unwrap(),
            0.0
        );

        let soft_x = min_damping_sufficient(&k(80.0, 100.0, 0.0, 10.0), 0.1).unwrap();
        assert_relative_eq!(soft_x, (100.0 * 0.1 / 80.0f64).sqrt(), max_relative = 1e-14);
        assert!((soft_x - 0.354).abs() < 1e-3);
    }

    #[test]
    fn sufficient_rejects_indefinite_symmetric_part() {
        let err = min_damping_sufficient(&k(100.0, 100.0, 150.0, 10.0), 0.1).unwrap_err();
        assert!(matches!(err, Error::IndefiniteStiffness { .. }));
        assert!(min_damping_sufficient(&k(-1.0, 100.0, 0.0, 10.0), 0.1).is_err());
    }

    #[test]
    fn sufficient_strictly_spiral_free_is_zero() {
        assert_eq!(
            min_damping_sufficient(&k(100.0, 100.0, 40.0, 30.0), 0.1).unwrap(),
            0.0
        );
        assert_eq!(
            min_damping_sufficient(&k(140.0, 60.0, 0.0, 30.0), 0.1).unwrap(),
            0.0
        );
        // On the boundary the matrix is defective; the bound stays positive.
        let b = min_damping_sufficient(&k(100.0, 100.0, 10.0, 10.0), 0.1).unwrap();
        assert_relative_eq!(b, (100.0 * 0.1 / 90.0f64).sqrt(), max_relative = 1e-14);
    }

    #[test]
    fn exact_threshold_reference() {
        let d = min_damping_exact(&k(100.0, 100.0, 0.0, 10.0), 0.1, DEFAULT_BISECTION_TOL).unwrap();
        assert!((d - 0.1f64.sqrt()).abs() <= 2e-6, "{d}");
    }

    #[test]
    fn exact_is_zero_without_asymmetry() {
        assert_eq!(
            min_damping_exact(&k(100.0, 70.0, 20.0, 0.0), 1.0, 1e-6).unwrap(),
            0.0
        );
    }

    #[test]
    fn exact_never_exceeds_sufficient() {
        for ks in (-8..=8).map(|i| 10.0 * i as f64) {
            for ka in (-8..=8).map(|i| 10.0 * i as f64) {
                let kk = k(100.0, 100.0, ks, ka);
                let exact = min_damping_exact(&kk, 0.1, 1e-6).unwrap();
                let sufficient = min_damping_sufficient(&kk, 0.1).unwrap();
                assert!(
                    exact <= sufficient + 1e-6,
                    "ks={ks} ka={ka}: {exact} > {sufficient}"
                );
            }
        }
    }

    #[test]
    fn exact_rejects_bad_tolerance() {
        assert!(min_damping_exact(&k(100.0, 100.0, 0.0, 10.0), 0.1, 0.0).is_err());
    }
}
