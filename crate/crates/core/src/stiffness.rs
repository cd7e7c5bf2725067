//! Stiffness-matrix algebra: the symmetric/antisymmetric split, stiffness
//! eigenvalues and the spiral-oscillation-free condition.

use nalgebra::{Matrix2, Vector2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Relative band (against the magnitude of the radicand's terms) inside which
/// the stiffness discriminant is treated as exactly zero.
const BOUNDARY_TOLERANCE: f64 = 1e-12;

/// A planar stiffness matrix `[[kx, ks + ka], [ks − ka, ky]]` in N/m.
///
/// `ks` is the symmetric off-diagonal component and `ka` the antisymmetric
/// (curl) component. Indefinite matrices are representable; analyses that
/// need positivity check it themselves.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StiffnessMatrix {
    pub kx: f64,
    pub ky: f64,
    pub ks: f64,
    pub ka: f64,
}

/// How a stiffness matrix sits relative to the spiral-free condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpiralClass {
    /// Real, distinct stiffness eigenvalues.
    SpiralFree,
    /// Real, repeated stiffness eigenvalues (`|ka|` equals the bound).
    Boundary,
    /// Complex stiffness eigenvalues; the curl field excites spiral motion.
    Spiral,
}

impl SpiralClass {
    /// Boundary matrices count as spiral-free: their eigenvalues carry no
    /// imaginary component.
    pub fn is_spiral_free(self) -> bool {
        !matches!(self, SpiralClass::Spiral)
    }
}

impl StiffnessMatrix {
    pub fn new(kx: f64, ky: f64, ks: f64, ka: f64) -> Result<Self> {
        let k = StiffnessMatrix { kx, ky, ks, ka };
        k.validate()?;
        Ok(k)
    }

    /// Builds the `(kx, ky, ks, ka)` parameterization of an arbitrary 2×2 matrix.
    pub fn from_matrix(k: &Matrix2<f64>) -> Result<Self> {
        Self::new(
            k[(0, 0)],
            k[(1, 1)],
            0.5 * (k[(0, 1)] + k[(1, 0)]),
            0.5 * (k[(0, 1)] - k[(1, 0)]),
        )
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("kx", self.kx),
            ("ky", self.ky),
            ("ks", self.ks),
            ("ka", self.ka),
        ] {
            if !v.is_finite() {
                return Err(Error::invalid(name, format!("must be finite, got {v}")));
            }
        }
        Ok(())
    }

    pub fn matrix(&self) -> Matrix2<f64> {
        Matrix2::new(self.kx, self.ks + self.ka, self.ks - self.ka, self.ky)
    }

    /// `K_s = (K + Kᵀ)/2`.
    pub fn symmetric(&self) -> Matrix2<f64> {
        Matrix2::new(self.kx, self.ks, self.ks, self.ky)
    }

    /// `K_a = (K − Kᵀ)/2`.
    pub fn antisymmetric(&self) -> Matrix2<f64> {
        Matrix2::new(0.0, self.ka, -self.ka, 0.0)
    }

    /// Splits `K` into its symmetric and antisymmetric parts. Their sum is `K`.
    pub fn decompose(&self) -> (Matrix2<f64>, Matrix2<f64>) {
        (self.symmetric(), self.antisymmetric())
    }

    pub fn trace(&self) -> f64 {
        self.kx + self.ky
    }

    pub fn determinant(&self) -> f64 {
        self.kx * self.ky - self.ks * self.ks + self.ka * self.ka
    }

    /// `−4ka² + 4ks² + (kx − ky)²`, the discriminant of the stiffness
    /// characteristic polynomial. Nonnegative iff the eigenvalues are real.
    pub fn discriminant(&self) -> f64 {
        let dk = self.kx - self.ky;
        -4.0 * self.ka * self.ka + 4.0 * self.ks * self.ks + dk * dk
    }

    fn discriminant_scale(&self) -> f64 {
        let dk = self.kx - self.ky;
        4.0 * self.ka * self.ka + 4.0 * self.ks * self.ks + dk * dk
    }

    /// Eigenvalues of `K`, ordered by real part then imaginary part, both
    /// descending.
    pub fn eigenvalues(&self) -> [Complex64; 2] {
        let half_trace = 0.5 * self.trace();
        let mut q = self.discriminant();
        if self.spiral_class() == SpiralClass::Boundary {
            q = 0.0;
        }
        let root = if q >= 0.0 {
            Complex64::new(0.5 * q.sqrt(), 0.0)
        } else {
            Complex64::new(0.0, 0.5 * (-q).sqrt())
        };
        let mut ev = [half_trace + root, half_trace - root];
        crate::eigen::sort_desc(&mut ev);
        ev
    }

    /// Eigenvalues of the symmetric part, `(smaller, larger)`. Always real.
    pub fn symmetric_eigenvalues(&self) -> (f64, f64) {
        let mid = 0.5 * self.trace();
        let r = self.ks.hypot(0.5 * (self.kx - self.ky));
        (mid - r, mid + r)
    }

    pub fn symmetric_is_positive_definite(&self) -> bool {
        self.symmetric_eigenvalues().0 > 0.0
    }

    /// `sqrt(ks² + (kx − ky)²/4)`: the largest `|ka|` that keeps the stiffness
    /// eigenvalues real.
    pub fn spiral_free_bound(&self) -> f64 {
        self.ks.hypot(0.5 * (self.kx - self.ky))
    }

    pub fn spiral_class(&self) -> SpiralClass {
        let q = self.discriminant();
        if q.abs() <= BOUNDARY_TOLERANCE * self.discriminant_scale() {
            SpiralClass::Boundary
        } else if q > 0.0 {
            SpiralClass::SpiralFree
        } else {
            SpiralClass::Spiral
        }
    }

    /// True iff the stiffness eigenvalues are real (boundary included).
    pub fn is_spiral_free(&self) -> bool {
        self.spiral_class().is_spiral_free()
    }

    /// Restoring force `−K·x` and its symmetric and antisymmetric parts.
    pub fn force_at(&self, x: [f64; 2]) -> FieldSample {
        let pos = Vector2::new(x[0], x[1]);
        let (ks, ka) = self.decompose();
        let sym = -(ks * pos);
        let asym = -(ka * pos);
        let total = -(self.matrix() * pos);
        FieldSample {
            position: x,
            force: [total.x, total.y],
            symmetric: [sym.x, sym.y],
            antisymmetric: [asym.x, asym.y],
        }
    }

    /// Evaluates the force field over `grid`, row-major (y outer, x inner).
    pub fn force_field(&self, grid: &GridSpec) -> Result<Vec<FieldSample>> {
        let xs = grid.x_points()?;
        let ys = grid.y_points()?;
        Ok(ys
            .iter()
            .flat_map(|&y| xs.iter().map(move |&x| [x, y]))
            .map(|p| self.force_at(p))
            .collect())
    }
}

/// Rectangular sampling grid for [`StiffnessMatrix::force_field`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
    pub nx: usize,
    pub ny: usize,
}

impl GridSpec {
    /// Square grid over `[−extent, extent]²` with `n` points per axis.
    pub fn square(extent: f64, n: usize) -> Self {
        GridSpec {
            x_range: (-extent, extent),
            y_range: (-extent, extent),
            nx: n,
            ny: n,
        }
    }

    fn x_points(&self) -> Result<Vec<f64>> {
        axis_points("grid x axis", self.x_range, self.nx)
    }

    fn y_points(&self) -> Result<Vec<f64>> {
        axis_points("grid y axis", self.y_range, self.ny)
    }
}

fn axis_points(what: &'static str, (lo, hi): (f64, f64), n: usize) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::Empty(what));
    }
    if !lo.is_finite() || !hi.is_finite() || hi < lo {
        return Err(Error::invalid("grid", format!("bad range [{lo}, {hi}]")));
    }
    if n == 1 {
        return Ok(vec![0.5 * (lo + hi)]);
    }
    let step = (hi - lo) / (n - 1) as f64;
    Ok((0..n).map(|i| lo + step * i as f64).collect())
}

/// One point of a force field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FieldSample {
    pub position: [f64; 2],
    pub force: [f64; 2],
    pub symmetric: [f64; 2],
    pub antisymmetric: [f64; 2],
}

/// Virtual mass `m` (kg), isotropic damper `d` (N·s/m) and stiffness `K`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdmittanceParams {
    pub m: f64,
    pub d: f64,
    pub k: StiffnessMatrix,
}

/// Mass-normalized parameters, the natural variables of the eigenvalue
/// formulas.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Normalized {
    pub d_m: f64,
    pub k_xm: f64,
    pub k_ym: f64,
    pub k_sm: f64,
    pub k_am: f64,
}

impl AdmittanceParams {
    pub fn new(m: f64, d: f64, k: StiffnessMatrix) -> Result<Self> {
        let p = AdmittanceParams { m, d, k };
        p.validate()?;
        Ok(p)
    }

    /// The reference parameter set: m = 0.1 kg, kx = ky = 100 N/m,
    /// ks = 0, ka = 10 N/m, with the given damper.
    pub fn reference(d: f64) -> Self {
        AdmittanceParams {
            m: 0.1,
            d,
            k: StiffnessMatrix {
                kx: 100.0,
                ky: 100.0,
                ks: 0.0,
                ka: 10.0,
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.m.is_finite() && self.m > 0.0) {
            return Err(Error::invalid(
                "m",
                format!("mass must be finite and > 0, got {}", self.m),
            ));
        }
        if !(self.d.is_finite() && self.d >= 0.0) {
            return Err(Error::invalid(
                "d",
                format!("damper must be finite and >= 0, got {}", self.d),
            ));
        }
        self.k.validate()
    }

    pub fn with_damping(&self, d: f64) -> Self {
        AdmittanceParams { d, ..*self }
    }

    pub fn normalized(&self) -> Normalized {
        let m = self.m;
        Normalized {
            d_m: self.d / m,
            k_xm: self.k.kx / m,
            k_ym: self.k.ky / m,
            k_sm: self.k.ks / m,
            k_am: self.k.ka / m,
        }
    }

    /// `D = d·I`.
    pub fn damping_matrix(&self) -> Matrix2<f64> {
        Matrix2::identity() * self.d
    }

    /// `M = m·I`.
    pub fn mass_matrix(&self) -> Matrix2<f64> {
        Matrix2::identity() * self.m
    }
}
