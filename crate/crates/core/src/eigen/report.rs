use serde::Serialize;

use super::DEFAULT_BISECTION_TOL;
use super::{critical_damping, eigenvalues_closed_form, min_damping_exact, min_damping_sufficient};
use crate::stiffness::SpiralClass;
use crate::{AdmittanceParams, Error, Result, MARGINAL_BAND};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Stable,
    Marginal,
    Unstable,
}

impl Verdict {
    pub fn from_max_real_part(re: f64) -> Self {
        if re.abs() <= MARGINAL_BAND {
            Verdict::Marginal
        } else if re < 0.0 {
            Verdict::Stable
        } else {
            Verdict::Unstable
        }
    }

    pub fn is_stable(self) -> bool {
        self == Verdict::Stable
    }
}

/// Everything the eigenvalue analysis says about one parameter set.
///
/// The minimum-damping fields are `None` when the symmetric part of `K` is
/// not positive definite; no damper bound is defined there.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityReport {
    pub spiral_free: bool,
    pub spiral_class: SpiralClass,
    pub critical_damping: Option<[f64; 2]>,
    pub d_min_sufficient: Option<f64>,
    pub d_min_exact: Option<f64>,
    pub max_real_part_at_d: f64,
    pub eigenvalues: [[f64; 2]; 4],
    pub verdict: Verdict,
}

pub fn stability_report(p: &AdmittanceParams) -> Result<StabilityReport> {
    p.validate()?;
    let set = eigenvalues_closed_form(p);
    let indefinite_is_none = |r: Result<f64>| match r {
        Ok(v) => Ok(Some(v)),
        Err(Error::IndefiniteStiffness { .. }) => Ok(None),
        Err(e) => Err(e),
    };
    let d_min_sufficient = indefinite_is_none(min_damping_sufficient(&p.k, p.m))?;
    let d_min_exact = indefinite_is_none(min_damping_exact(&p.k, p.m, DEFAULT_BISECTION_TOL))?;
    Ok(StabilityReport {
        spiral_free: p.k.is_spiral_free(),
        spiral_class: p.k.spiral_class(),
        critical_damping: critical_damping(&p.k, p.m)?.map(|c| c.as_pair()),
        d_min_sufficient,
        d_min_exact,
        max_real_part_at_d: set.max_real_part,
        eigenvalues: set.values.map(|v| [v.re, v.im]),
        verdict: Verdict::from_max_real_part(set.max_real_part),
    })
}
