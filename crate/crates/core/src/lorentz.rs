//! Matrix model of the shortened Lorentz group SO₀(2,1) and its Lie algebra.
//!
//! Elements are real 3×3 matrices `C` preserving the form `-t² + x² + y²`,
//! i.e. `C⁻¹ = I Cᵀ I` with `I = diag(-1, 1, 1)`, with `c11 ≥ 1` and
//! `det C = 1`. Entries are addressed `c(i, j)` with 1-based indices in the
//! usual row-major order.
//!
//! The algebra basis is
//!
//! ```text
//!     | 0 1 0 |       | 0 0 1 |       | 0 0  0 |
//! a = | 1 0 0 |   b = | 0 0 0 |   c = | 0 0 -1 |
//!     | 0 0 0 |       | 1 0 0 |       | 0 1  0 |
//! ```
//!
//! with `[a, b] = -c`, `[b, c] = a`, `[c, a] = b`. `a` and `b` generate
//! boosts, `c` generates the rotation subgroup `SO(2) = 1 ⊗ SO(2)`.

use std::fmt;
use std::ops::Mul;

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default tolerance for group membership and every case discrimination
/// that works on matrix residuals.
pub const DEFAULT_TOL: f64 = 1e-9;

/// The time-reversal matrix `I = diag(-1, 1, 1)`.
pub fn time_reversal() -> Matrix3<f64> {
    Matrix3::from_diagonal(&Vector3::new(-1.0, 1.0, 1.0))
}

/// Residuals of the group-membership conditions for a candidate matrix.
///
/// The pseudo-orthogonality and determinant residuals are divided by
/// `scale²` and `scale³` respectively, where `scale = max(1, max |c_ij|)`;
/// roundoff in valid elements grows like that.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub pseudo_orthogonality: f64,
    pub determinant: f64,
    pub c11_floor: f64,
    pub scale: f64,
    pub tol: f64,
    pub accepted: bool,
}

impl ValidationReport {
    pub fn max_residual(&self) -> f64 {
        self.pseudo_orthogonality.max(self.determinant).max(self.c11_floor)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "pseudo-orthogonality {:.3e}, det-1 {:.3e}, 1-c11 {:.3e} (tol {:.1e})",
            self.pseudo_orthogonality, self.determinant, self.c11_floor, self.tol
        )
    }
}

/// Checks whether `m` lies in SO₀(2,1) to within `tol`.
///
/// Only non-finite input is an error; an out-of-group matrix yields a report
/// with `accepted == false`.
pub fn validate(m: &Matrix3<f64>, tol: f64) -> Result<ValidationReport> {
    if let Some(index) = m.transpose().iter().position(|x| !x.is_finite()) {
        return Err(Error::NonFinite { index });
    }
    let scale = m.amax().max(1.0);
    let ir = time_reversal();
    let product = m * (ir * m.transpose() * ir);
    let pseudo = (product - Matrix3::identity()).amax() / (scale * scale);
    let det = (m.determinant() - 1.0).abs() / (scale * scale * scale);
    let floor = (1.0 - m[(0, 0)]).max(0.0);
    Ok(ValidationReport {
        pseudo_orthogonality: pseudo,
        determinant: det,
        c11_floor: floor,
        scale,
        tol,
        accepted: pseudo <= tol && det <= tol && floor <= tol,
    })
}

/// An element of SO₀(2,1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupElement(Matrix3<f64>);

impl GroupElement {
    pub fn identity() -> Self {
        GroupElement(Matrix3::identity())
    }

    /// Validates `m` and wraps it.
    pub fn new(m: Matrix3<f64>, tol: f64) -> Result<Self> {
        let report = validate(&m, tol)?;
        if report.accepted {
            Ok(GroupElement(m))
        } else {
            Err(Error::Invalid(report))
        }
    }

    /// Builds from nine row-major entries `[c11, c12, c13, c21, ...]`.
    pub fn from_row_major(entries: &[f64; 9], tol: f64) -> Result<Self> {
        Self::new(Matrix3::from_row_slice(entries), tol)
    }

    /// Wraps a matrix that is in the group by construction.
    pub(crate) fn from_matrix_unchecked(m: Matrix3<f64>) -> Self {
        GroupElement(m)
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.0
    }

    /// Entry `c_ij` with 1-based indices.
    #[inline]
    pub fn c(&self, i: usize, j: usize) -> f64 {
        self.0[(i - 1, j - 1)]
    }

    pub fn to_row_major(&self) -> [f64; 9] {
        let m = &self.0;
        [
            m[(0, 0)],
            m[(0, 1)],
            m[(0, 2)],
            m[(1, 0)],
            m[(1, 1)],
            m[(1, 2)],
            m[(2, 0)],
            m[(2, 1)],
            m[(2, 2)],
        ]
    }

    pub fn validate(&self, tol: f64) -> ValidationReport {
        validate(&self.0, tol).expect("group elements have finite entries")
    }

    /// `C⁻¹ = I Cᵀ I`.
    pub fn inverse(&self) -> Self {
        let ir = time_reversal();
        GroupElement(ir * self.0.transpose() * ir)
    }

    pub fn transpose(&self) -> Self {
        GroupElement(self.0.transpose())
    }

    /// Group product, re-validated against `tol`.
    pub fn multiply(&self, other: &GroupElement, tol: f64) -> Result<Self> {
        let product = self.0 * other.0;
        let report = validate(&product, tol)?;
        if report.accepted {
            Ok(GroupElement(product))
        } else {
            Err(Error::NumericDrift {
                residual: report.max_residual(),
                tol,
            })
        }
    }

    /// Entrywise max-norm distance between two elements.
    pub fn max_abs_diff(&self, other: &GroupElement) -> f64 {
        (self.0 - other.0).amax()
    }

    /// Asymmetry `‖C − Cᵀ‖∞`.
    pub fn asymmetry(&self) -> f64 {
        (self.0 - self.0.transpose()).amax()
    }

    pub fn project_base(&self) -> HyperboloidPoint {
        project_base(self)
    }
}

impl Mul for GroupElement {
    type Output = GroupElement;

    fn mul(self, rhs: GroupElement) -> GroupElement {
        GroupElement(self.0 * rhs.0)
    }
}

impl Mul<&GroupElement> for &GroupElement {
    type Output = GroupElement;

    fn mul(self, rhs: &GroupElement) -> GroupElement {
        GroupElement(self.0 * rhs.0)
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..3 {
            let row = self.0.row(i);
            writeln!(f, "[{} {} {}]", row[0], row[1], row[2])?;
        }
        Ok(())
    }
}

/// Validated product of two elements.
pub fn multiply(a: &GroupElement, b: &GroupElement, tol: f64) -> Result<GroupElement> {
    a.multiply(b, tol)
}

pub fn inverse(c: &GroupElement) -> GroupElement {
    c.inverse()
}

/// The rotation `1 ⊗ R(ω)`, with `c32 = sin ω` and `c23 = -sin ω`.
pub fn rotation(omega: f64) -> GroupElement {
    let (s, c) = omega.sin_cos();
    GroupElement(Matrix3::new(1.0, 0.0, 0.0, 0.0, c, -s, 0.0, s, c))
}

/// The boost `exp(t·a)` in the (t, x) plane.
pub fn boost(t: f64) -> GroupElement {
    let (sh, ch) = (t.sinh(), t.cosh());
    GroupElement(Matrix3::new(ch, sh, 0.0, sh, ch, 0.0, 0.0, 0.0, 1.0))
}

/// Coefficients of `x_a·a + x_b·b + x_c·c` in 𝔰𝔬(2,1).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct AlgebraElement {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl AlgebraElement {
    pub fn new(a: f64, b: f64, c: f64) -> Self {
        AlgebraElement { a, b, c }
    }

    pub fn to_matrix(&self) -> Matrix3<f64> {
        let AlgebraElement { a, b, c } = *self;
        Matrix3::new(0.0, a, b, a, 0.0, -c, b, c, 0.0)
    }

    pub fn scale(&self, s: f64) -> Self {
        AlgebraElement::new(self.a * s, self.b * s, self.c * s)
    }

    pub fn exp(&self) -> GroupElement {
        exp_algebra(self)
    }
}

pub fn basis_a() -> Matrix3<f64> {
    AlgebraElement::new(1.0, 0.0, 0.0).to_matrix()
}

pub fn basis_b() -> Matrix3<f64> {
    AlgebraElement::new(0.0, 1.0, 0.0).to_matrix()
}

pub fn basis_c() -> Matrix3<f64> {
    AlgebraElement::new(0.0, 0.0, 1.0).to_matrix()
}

/// Matrix commutator `[x, y] = xy − yx`.
pub fn bracket(x: &Matrix3<f64>, y: &Matrix3<f64>) -> Matrix3<f64> {
    x * y - y * x
}

pub fn exp_algebra(x: &AlgebraElement) -> GroupElement {
    GroupElement(expm(&x.to_matrix()))
}

/// Matrix exponential by scaling and squaring around a Taylor core.
///
/// The argument is scaled by `2^-s` until its ∞-norm is at most 1/2, the
/// series is summed until terms fall below machine precision relative to
/// the partial sum, and the result is squared `s` times.
pub fn expm(x: &Matrix3<f64>) -> Matrix3<f64> {
    let norm = (0..3)
        .map(|i| x.row(i).iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let squarings = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as i32
    } else {
        0
    };
    let y = x * 2f64.powi(-squarings);

    let mut sum = Matrix3::identity();
    let mut term = Matrix3::identity();
    for k in 1..=30 {
        term = term * y / k as f64;
        sum += term;
        if term.amax() <= f64::EPSILON * 1e-2 * sum.amax() {
            break;
        }
    }
    for _ in 0..squarings {
        sum = sum * sum;
    }
    sum
}

/// A point `(t, x, y)` of the upper sheet `-t² + x² + y² = -1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HyperboloidPoint {
    pub t: f64,
    pub x: f64,
    pub y: f64,
}

impl HyperboloidPoint {
    /// `-t² + x² + y² + 1`, zero on the hyperboloid.
    pub fn form_residual(&self) -> f64 {
        -self.t * self.t + self.x * self.x + self.y * self.y + 1.0
    }
}

/// Image of the base point `(1, 0, 0)`: the first column of `C`.
pub fn project_base(c: &GroupElement) -> HyperboloidPoint {
    HyperboloidPoint {
        t: c.c(1, 1),
        x: c.c(2, 1),
        y: c.c(3, 1),
    }
}
