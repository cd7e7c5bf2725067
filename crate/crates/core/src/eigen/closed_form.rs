use num_complex::Complex64;

use super::EigenSet;
use crate::AdmittanceParams;

/// Square root of `α ± β·j` split into real part `a` and imaginary part `b`,
/// used when the inner radicand of the eigenvalue formula is negative.
///
/// `α = d_m² − 2(k_xm + k_ym)` and `β = sqrt(16k_am² − 16k_sm² − 4(k_xm − k_ym)²)`.
/// With the principal branch, `a = sqrt((α + sqrt(α² + β²))/2) ≥ 0` and
/// `b = β / 2a`, so `(a + bj)² = α + βj`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexBranch {
    pub alpha: f64,
    pub beta: f64,
    pub a: f64,
    pub b: f64,
}

impl ComplexBranch {
    pub fn new(alpha: f64, beta: f64) -> Self {
        let hyp = alpha.hypot(beta);
        // Evaluate whichever of a, b avoids cancellation, then recover the other.
        let (a, b) = if alpha >= 0.0 {
            let a = (0.5 * (alpha + hyp)).sqrt();
            let b = if a > 0.0 { beta / (2.0 * a) } else { 0.0 };
            (a, b)
        } else {
            let b = (0.5 * (hyp - alpha)).sqrt().copysign(beta);
            let a = if b != 0.0 { beta / (2.0 * b) } else { 0.0 };
            (a, b)
        };
        ComplexBranch { alpha, beta, a, b }
    }

    /// Builds the branch for the given parameters, or `None` when the inner
    /// radicand is nonnegative (all-real inner root).
    pub fn for_params(p: &AdmittanceParams) -> Option<Self> {
        let n = p.normalized();
        let q = inner_radicand(p);
        if q >= 0.0 {
            return None;
        }
        let alpha = n.d_m * n.d_m - 2.0 * (n.k_xm + n.k_ym);
        Some(ComplexBranch::new(alpha, 2.0 * (-q).sqrt()))
    }

    /// `∂a/∂α` and `∂a/∂β`, both positive for `β > 0`.
    pub fn partials(&self) -> (f64, f64) {
        let hyp = self.alpha.hypot(self.beta);
        let s = (self.alpha + hyp).sqrt();
        let denom = 2.0 * std::f64::consts::SQRT_2 * s;
        ((1.0 + self.alpha / hyp) / denom, self.beta / (hyp * denom))
    }
}

/// `−4k_am² + 4k_sm² + (k_xm − k_ym)²`.
pub(crate) fn inner_radicand(p: &AdmittanceParams) -> f64 {
    let n = p.normalized();
    let dk = n.k_xm - n.k_ym;
    -4.0 * n.k_am * n.k_am + 4.0 * n.k_sm * n.k_sm + dk * dk
}

fn real_sqrt_as_complex(w: f64) -> Complex64 {
    if w >= 0.0 {
        Complex64::new(w.sqrt(), 0.0)
    } else {
        Complex64::new(0.0, (-w).sqrt())
    }
}

/// The four system eigenvalues
/// `λ = ½(−d_m ± sqrt(d_m² − 2(k_xm + k_ym ± sqrt(−4k_am² + 4k_sm² + (k_xm − k_ym)²))))`.
///
/// A negative inner radicand goes through [`ComplexBranch`]; conjugate pairs
/// are then formed explicitly so the set is exactly conjugation-closed.
pub fn eigenvalues_closed_form(p: &AdmittanceParams) -> EigenSet {
    let n = p.normalized();
    let half_d = 0.5 * n.d_m;
    let mut values = [Complex64::new(0.0, 0.0); 4];
    match ComplexBranch::for_params(p) {
        None => {
            let r = inner_radicand(p).sqrt();
            let sum = n.k_xm + n.k_ym;
            let d2 = n.d_m * n.d_m;
            for (i, inner) in [r, -r].into_iter().enumerate() {
                let outer = 0.5 * real_sqrt_as_complex(d2 - 2.0 * (sum + inner));
                values[2 * i] = -half_d + outer;
                values[2 * i + 1] = -half_d - outer;
            }
        }
        Some(branch) => {
            let root = 0.5 * Complex64::new(branch.a, branch.b);
            values[0] = -half_d + root;
            values[1] = (-half_d + root).conj();
            values[2] = -half_d - root;
            values[3] = (-half_d - root).conj();
        }
    }
    EigenSet::from_unordered(values)
}

/// Largest real part of the system eigenvalues (1/s).
pub fn max_real_part(p: &AdmittanceParams) -> f64 {
    eigenvalues_closed_form(p).max_real_part
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::StiffnessMatrix;
    use approx::assert_relative_eq;

    fn params(m: f64, d: f64, kx: f64, ky: f64, ks: f64, ka: f64) -> AdmittanceParams {
        AdmittanceParams::new(m, d, StiffnessMatrix::new(kx, ky, ks, ka).unwrap()).unwrap()
    }

    #[test]
    fn undamped_isotropic_starts_on_imaginary_axis() {
        let set = eigenvalues_closed_form(&params(1.0, 0.0, 100.0, 100.0, 0.0, 0.0));
        let j10 = Complex64::new(0.0, 10.0);
        for (got, want) in set.values.iter().zip([j10, j10, -j10, -j10]) {
            assert!((got - want).norm() < 1e-12, "{:?}", set.values);
        }
        assert_eq!(set.max_real_part.abs(), 0.0);
    }

    #[test]
    fn reference_near_threshold_is_almost_marginal() {
        let set = eigenvalues_closed_form(&AdmittanceParams::reference(0.316));
        assert!(set.max_real_part.abs() < 2e-2, "{}", set.max_real_part);
    }

    #[test]
    fn decoupled_oscillators() {
        let set = eigenvalues_closed_form(&params(1.0, 0.0, 140.0, 60.0, 0.0, 0.0));
        let (w1, w2) = (140f64.sqrt(), 60f64.sqrt());
        let expected = [
            Complex64::new(0.0, w1),
            Complex64::new(0.0, w2),
            Complex64::new(0.0, -w2),
            Complex64::new(0.0, -w1),
        ];
        let mut got = set.values;
        got.sort_by(|a, b| b.im.total_cmp(&a.im));
        for (g, e) in got.iter().zip(expected) {
            assert!((g - e).norm() < 1e-12);
        }
    }

    #[test]
    fn branch_identities() {
        for &(alpha, beta) in &[
            (-3988.44, 400.0),
            (5.0, 3.0),
            (0.0, 2.0),
            (-1e-3, 1e3),
            (7.0, 0.0),
        ] {
            let b = ComplexBranch::new(alpha, beta);
            let scale = alpha.abs() + beta.abs();
            assert!((b.a * b.a - b.b * b.b - alpha).abs() <= 1e-12 * scale);
            assert!((2.0 * b.a * b.b - beta).abs() <= 1e-12 * scale);
            let direct = (0.5 * (alpha + alpha.hypot(beta))).sqrt();
            assert_relative_eq!(b.a, direct, max_relative = 1e-9, epsilon = 1e-12);
            assert!(b.a >= 0.0);
        }
    }

    #[test]
    fn branch_matches_principal_complex_sqrt() {
        let b = ComplexBranch::new(-12.5, 31.0);
        let z = Complex64::new(-12.5, 31.0).sqrt();
        assert_relative_eq!(b.a, z.re, max_relative = 1e-12);
        assert_relative_eq!(b.b, z.im, max_relative = 1e-12);
    }

    #[test]
    fn branch_real_part_is_monotone() {
        // finite differences over a grid of (α, β) with β > 0
        let h = 1e-6;
        for i in 0..40 {
            for j in 1..40 {
                let alpha = -200.0 + 10.0 * i as f64;
                let beta = 5.0 * j as f64;
                let a = ComplexBranch::new(alpha, beta).a;
                let da = (ComplexBranch::new(alpha + h, beta).a - a) / h;
                let db = (ComplexBranch::new(alpha, beta + h).a - a) / h;
                assert!(da >= -1e-9 && db >= -1e-9, "α={alpha} β={beta}");
                let (pa, pb) = ComplexBranch::new(alpha, beta).partials();
                assert!(pa > 0.0 && pb > 0.0);
                assert_relative_eq!(pa, da, max_relative = 1e-3, epsilon = 1e-7);
                assert_relative_eq!(pb, db, max_relative = 1e-3, epsilon = 1e-7);
            }
        }
    }

    #[test]
    fn conjugate_closed() {
        let set = eigenvalues_closed_form(&params(0.3, 1.1, 80.0, 120.0, 5.0, 40.0));
        for v in set.values {
            assert!(set.values.iter().any(|w| (w - v.conj()).norm() <= 1e-9));
        }
    }
}
