//! Eigenvalue analysis of the admittance state equation.
//!
//! With state `(ẋ_x, ẋ_y, x_x, x_y)` the model `m·ẍ + d·ẋ + K·x = F` becomes
//! `ż = A·z + B·F` with
//!
//! ```text
//!     ┌ −d_m    0     −k_xm          −(k_sm + k_am) ┐
//! A = │  0    −d_m    −(k_sm − k_am)  −k_ym         │
//!     │  1      0      0               0            │
//!     └  0      1      0               0            ┘
//! ```
//!
//! Because the damper is isotropic, the four eigenvalues solve
//! `λ² + d_m·λ + μ = 0` for each eigenvalue `μ` of `K/m`, which gives the
//! nested-radical closed form in [`eigenvalues_closed_form`]. The quartic
//! root finder in [`eigenvalues_oracle`] computes the same roots by an
//! unrelated route and is used to cross-check it.

mod closed_form;
mod damping;
mod locus;
mod oracle;
mod report;

use std::cmp::Ordering;

use nalgebra::Matrix4;
use num_complex::Complex64;
use serde::Serialize;

use crate::AdmittanceParams;

pub use closed_form::{eigenvalues_closed_form, max_real_part, ComplexBranch};
pub use damping::{
    critical_damping, min_damping_exact, min_damping_sufficient, CriticalDamping,
    DEFAULT_BISECTION_TOL,
};
pub use locus::{linspace, root_locus, LocusSample, RootLocusTrace};
pub use oracle::{characteristic_polynomial, eigenvalues_oracle, quartic_roots};
pub use report::{stability_report, StabilityReport, Verdict};

/// The 4×4 system matrix over `(ẋ_x, ẋ_y, x_x, x_y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemMatrix(pub Matrix4<f64>);

pub fn system_matrix(p: &AdmittanceParams) -> SystemMatrix {
    let n = p.normalized();
    #[rustfmt::skip]
    let a = Matrix4::new(
        -n.d_m, 0.0,    -n.k_xm,          -(n.k_sm + n.k_am),
        0.0,    -n.d_m, -(n.k_sm - n.k_am), -n.k_ym,
        1.0,    0.0,    0.0,              0.0,
        0.0,    1.0,    0.0,              0.0,
    );
    SystemMatrix(a)
}

impl SystemMatrix {
    pub fn trace(&self) -> f64 {
        self.0.trace()
    }

    pub fn row(&self, i: usize) -> [f64; 4] {
        [
            self.0[(i, 0)],
            self.0[(i, 1)],
            self.0[(i, 2)],
            self.0[(i, 3)],
        ]
    }
}

/// The four eigenvalues of the system matrix, ordered by real part then
/// imaginary part, both descending.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EigenSet {
    pub values: [Complex64; 4],
    pub max_real_part: f64,
}

impl EigenSet {
    pub fn from_unordered(mut values: [Complex64; 4]) -> Self {
        sort_desc(&mut values);
        EigenSet {
            values,
            max_real_part: values[0].re,
        }
    }

    pub fn sum(&self) -> Complex64 {
        self.values.iter().sum()
    }

    pub fn product(&self) -> Complex64 {
        self.values.iter().product()
    }

    /// Largest distance between matched roots of two sets, minimized over all
    /// pairings.
    pub fn max_deviation(&self, other: &EigenSet) -> f64 {
        best_assignment(&self.values, &other.values).1
    }
}

/// Lexicographic (Re desc, Im desc).
pub(crate) fn cmp_desc(a: &Complex64, b: &Complex64) -> Ordering {
    b.re.total_cmp(&a.re).then(b.im.total_cmp(&a.im))
}

pub(crate) fn sort_desc(values: &mut [Complex64]) {
    values.sort_by(cmp_desc);
}

pub(crate) const PERMUTATIONS_4: [[usize; 4]; 24] = [
    [0, 1, 2, 3],
    [0, 1, 3, 2],
    [0, 2, 1, 3],
    [0, 2, 3, 1],
    [0, 3, 1, 2],
    [0, 3, 2, 1],
    [1, 0, 2, 3],
    [1, 0, 3, 2],
    [1, 2, 0, 3],
    [1, 2, 3, 0],
    [1, 3, 0, 2],
    [1, 3, 2, 0],
    [2, 0, 1, 3],
    [2, 0, 3, 1],
    [2, 1, 0, 3],
    [2, 1, 3, 0],
    [2, 3, 0, 1],
    [2, 3, 1, 0],
    [3, 0, 1, 2],
    [3, 0, 2, 1],
    [3, 1, 0, 2],
    [3, 1, 2, 0],
    [3, 2, 0, 1],
    [3, 2, 1, 0],
];

/// Pairing `reference[i] ↔ candidate[perm[i]]` minimizing the total distance.
/// Returns the permutation and the largest single distance under it.
pub(crate) fn best_assignment(
    reference: &[Complex64; 4],
    candidate: &[Complex64; 4],
) -> ([usize; 4], f64) {
    let mut best = (PERMUTATIONS_4[0], f64::INFINITY, f64::INFINITY);
    for perm in PERMUTATIONS_4 {
        let mut total = 0.0;
        let mut worst: f64 = 0.0;
        for i in 0..4 {
            let dist = (reference[i] - candidate[perm[i]]).norm();
            total += dist;
            worst = worst.max(dist);
        }
        if total < best.1 {
            best = (perm, total, worst);
        }
    }
    (best.0, best.2)
}
