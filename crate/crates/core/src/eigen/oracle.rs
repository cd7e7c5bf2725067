//! Independent eigenvalue route: the characteristic quartic of the system
//! matrix solved by Aberth–Ehrlich simultaneous iteration.

use num_complex::Complex64;

use super::EigenSet;
use crate::{AdmittanceParams, Error, Result};

const MAX_ITERATIONS: usize = 1000;

/// Coefficients `[c0, c1, c2, c3, c4]` (ascending powers) of
/// `(λ² + d_m·λ + k_xm)(λ² + d_m·λ + k_ym) − (k_sm² − k_am²)`.
pub fn characteristic_polynomial(p: &AdmittanceParams) -> [f64; 5] {
    let n = p.normalized();
    let d = n.d_m;
    [
        n.k_xm * n.k_ym - n.k_sm * n.k_sm + n.k_am * n.k_am,
        d * (n.k_xm + n.k_ym),
        d * d + n.k_xm + n.k_ym,
        2.0 * d,
        1.0,
    ]
}

/// System eigenvalues computed from the characteristic quartic, ordered like
/// [`super::eigenvalues_closed_form`].
pub fn eigenvalues_oracle(p: &AdmittanceParams) -> Result<EigenSet> {
    let roots = quartic_roots(&characteristic_polynomial(p))?;
    let values: [Complex64; 4] = roots
        .try_into()
        .map_err(|_| Error::invalid("polynomial", "expected four roots"))?;
    Ok(EigenSet::from_unordered(values))
}

/// All complex roots of a real polynomial given in ascending coefficient
/// order. The leading coefficient must be nonzero.
pub fn quartic_roots(coeffs: &[f64]) -> Result<Vec<Complex64>> {
    let degree = coeffs.len().saturating_sub(1);
    if coeffs.is_empty() || coeffs[degree] == 0.0 {
        return Err(Error::invalid(
            "polynomial",
            "leading coefficient must be nonzero",
        ));
    }
    if coeffs.iter().any(|c| !c.is_finite()) {
        return Err(Error::invalid("polynomial", "coefficients must be finite"));
    }

    // Exact zero roots come off the bottom before iterating.
    let zeros = coeffs.iter().take_while(|&&c| c == 0.0).count();
    let mut roots = vec![Complex64::new(0.0, 0.0); zeros];
    let monic: Vec<f64> = coeffs[zeros..].iter().map(|c| c / coeffs[degree]).collect();
    if monic.len() > 1 {
        roots.extend(aberth(&monic)?);
    }
    Ok(roots)
}

fn horner(coeffs: &[f64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

/// Rounding-error bound on evaluating the polynomial at `z`.
fn evaluation_bound(coeffs: &[f64], z: Complex64) -> f64 {
    let r = z.norm();
    let mut acc = 0.0;
    for &c in coeffs.iter().rev() {
        acc = acc * r + c.abs();
    }
    8.0 * f64::EPSILON * acc * coeffs.len() as f64
}

fn aberth(monic: &[f64]) -> Result<Vec<Complex64>> {
    let n = monic.len() - 1;
    // Fujiwara-style bound on root magnitudes seeds a circle of guesses.
    let radius = monic[..n]
        .iter()
        .enumerate()
        .map(|(i, c)| c.abs().powf(1.0 / (n - i) as f64))
        .fold(0.0_f64, f64::max)
        .max(1e-3);
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| {
            let theta = 2.0 * std::f64::consts::PI * k as f64 / n as f64 + 0.4;
            Complex64::from_polar(radius, theta)
        })
        .collect();

    let mut settled = vec![false; n];
    for _ in 0..MAX_ITERATIONS {
        let mut all_settled = true;
        for k in 0..n {
            if settled[k] {
                continue;
            }
            let (p, dp) = horner(monic, z[k]);
            if p.norm() <= evaluation_bound(monic, z[k]) {
                settled[k] = true;
                continue;
            }
            all_settled = false;
            let newton = p / dp;
            let repulsion: Complex64 = (0..n)
                .filter(|&j| j != k)
                .map(|j| (z[k] - z[j]).inv())
                .sum();
            let step = newton / (Complex64::new(1.0, 0.0) - newton * repulsion);
            if !step.is_finite() {
                // Collided guesses: nudge instead of dividing by zero.
                z[k] += Complex64::new(radius * 1e-7, radius * 1e-7);
                continue;
            }
            z[k] -= step;
            if step.norm() <= f64::EPSILON * z[k].norm() {
                settled[k] = true;
            }
        }
        if all_settled {
            return Ok(polish(monic, z));
        }
    }
    Err(Error::NoConvergence {
        iterations: MAX_ITERATIONS,
    })
}

/// A few Newton steps per root, kept only when the residual shrinks.
fn polish(monic: &[f64], mut z: Vec<Complex64>) -> Vec<Complex64> {
    for root in z.iter_mut() {
        for _ in 0..3 {
            let (p, dp) = horner(monic, *root);
            if dp.norm() == 0.0 {
                break;
            }
            let candidate = *root - p / dp;
            if horner(monic, candidate).0.norm() < p.norm() {
                *root = candidate;
            } else {
                break;
            }
        }
    }
    z
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigen::eigenvalues_closed_form;
    use crate::StiffnessMatrix;

    #[test]
    fn matches_closed_form_on_reference() {
        for d in [0.0, 0.3, 0.316, 0.34, 1.0, 10.0] {
            let p = AdmittanceParams::reference(d);
            let oracle = eigenvalues_oracle(&p).unwrap();
            let closed = eigenvalues_closed_form(&p);
            assert!(oracle.max_deviation(&closed) <= 1e-9 * 31.7, "d={d}");
        }
    }

    #[test]
    fn quadruple_zero_root() {
        let p = AdmittanceParams::new(1.0, 0.0, StiffnessMatrix::new(0.0, 0.0, 0.0, 0.0).unwrap())
            .unwrap();
        let set = eigenvalues_oracle(&p).unwrap();
        assert_eq!(set.values, [Complex64::new(0.0, 0.0); 4]);
    }

    #[test]
    fn double_roots_still_converge() {
        let p = AdmittanceParams::new(
            1.0,
            0.0,
            StiffnessMatrix::new(100.0, 100.0, 0.0, 0.0).unwrap(),
        )
        .unwrap();
        let set = eigenvalues_oracle(&p).unwrap();
        let closed = eigenvalues_closed_form(&p);
        // multiple roots are only conditioned to about sqrt(eps)
        assert!(set.max_deviation(&closed) < 1e-6);
    }

    #[test]
    fn simple_polynomials() {
        // (x − 1)(x − 2)(x + 3) = x³ − 7x + 6
        let mut roots = quartic_roots(&[6.0, -7.0, 0.0, 1.0]).unwrap();
        roots.sort_by(|a, b| a.re.total_cmp(&b.re));
        for (r, want) in roots.iter().zip([-3.0, 1.0, 2.0]) {
            assert!((r - Complex64::new(want, 0.0)).norm() < 1e-12);
        }
        // x² + 1
        let roots = quartic_roots(&[1.0, 0.0, 1.0]).unwrap();
        assert!(roots
            .iter()
            .all(|r| (r.norm() - 1.0).abs() < 1e-12 && r.re.abs() < 1e-12));
    }

    #[test]
    fn rejects_degenerate_input() {
        assert!(quartic_roots(&[1.0, 0.0]).is_err());
        assert!(quartic_roots(&[]).is_err());
        assert!(quartic_roots(&[f64::NAN, 1.0]).is_err());
    }
}
