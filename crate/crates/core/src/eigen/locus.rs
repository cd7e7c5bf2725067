use num_complex::Complex64;
use serde::Serialize;

use super::{best_assignment, eigenvalues_closed_form};
use crate::{AdmittanceParams, Error, Result, StiffnessMatrix};

/// Eigenvalues at one damper value, in branch order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LocusSample {
    pub d: f64,
    pub d_m: f64,
    pub branches: [Complex64; 4],
    pub max_real_part: f64,
}

/// Eigenvalue branches traced over an increasing damper sweep. Column `i` of
/// every sample belongs to the same continuous branch.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RootLocusTrace {
    pub m: f64,
    pub samples: Vec<LocusSample>,
}

impl RootLocusTrace {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// The path of branch `i` through the complex plane.
    pub fn branch(&self, i: usize) -> impl Iterator<Item = Complex64> + '_ {
        self.samples.iter().map(move |s| s.branches[i])
    }
}

/// Evenly spaced damper samples over `[lo, hi]`.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

/// Closed-form eigenvalues at each damper in `d_samples`, with columns
/// matched to the previous sample by minimum total distance so branches do
/// not braid where a re-sort would swap them.
pub fn root_locus(k: &StiffnessMatrix, m: f64, d_samples: &[f64]) -> Result<RootLocusTrace> {
    if d_samples.is_empty() {
        return Err(Error::Empty("damper sample list"));
    }
    for w in d_samples.windows(2) {
        if !(w[1] > w[0]) {
            return Err(Error::invalid(
                "d_samples",
                format!("must be strictly increasing ({} then {})", w[0], w[1]),
            ));
        }
    }
    let mut samples: Vec<LocusSample> = Vec::with_capacity(d_samples.len());
    for &d in d_samples {
        let p = AdmittanceParams::new(m, d, *k)?;
        let set = eigenvalues_closed_form(&p);
        let branches = match samples.last() {
            None => set.values,
            Some(prev) => {
                let (perm, _) = best_assignment(&prev.branches, &set.values);
                perm.map(|j| set.values[j])
            }
        };
        samples.push(LocusSample {
            d,
            d_m: d / m,
            branches,
            max_real_part: set.max_real_part,
        });
    }
    Ok(RootLocusTrace { m, samples })
}
