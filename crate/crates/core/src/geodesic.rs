//! Unit-speed geodesics `γ(β, φ; t)` through the identity.
//!
//! Every geodesic is the product of two one-parameter subgroups,
//!
//! ```text
//! γ(β, φ; t) = exp(t(cos φ·a + sin φ·b − β c)) · exp(tβ c),
//! ```
//!
//! and its matrix entries have a closed form in terms of the scalars
//! `m(β, t)` and `n(β, t)` (see [`mn_scalars`]). [`geodesic_point`]
//! evaluates the closed form, [`geodesic_point_product`] the product of
//! exponentials; the two are kept independent so each checks the other.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::lorentz::{expm, project_base, rotation, AlgebraElement, GroupElement, HyperboloidPoint};

/// Below this value of `|1 − β²|·t²` the scalars come from a Taylor series
/// around the horocycle case `|β| = 1`.
pub const HOROCYCLE_BAND: f64 = 1e-8;

/// Parameters of the geodesic point `γ(β, φ; t)`.
///
/// `phi` is kept in `[0, 2π)` and `t ≥ 0`; construct through
/// [`GeodesicParams::new`] to get that normalization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeodesicParams {
    pub beta: f64,
    pub phi: f64,
    pub t: f64,
}

impl GeodesicParams {
    /// Normalizes `φ` to `[0, 2π)`. A negative `t` is rewritten as
    /// `(−β, φ + π, −t)`, which names the same point.
    pub fn new(beta: f64, phi: f64, t: f64) -> Result<Self> {
        if !(beta.is_finite() && phi.is_finite() && t.is_finite()) {
            return Err(Error::Domain(format!(
                "geodesic parameters must be finite (beta={beta}, phi={phi}, t={t})"
            )));
        }
        let (beta, phi, t) = if t < 0.0 { (-beta, phi + PI, -t) } else { (beta, phi, t) };
        Ok(GeodesicParams {
            beta,
            phi: normalize_angle(phi),
            t,
        })
    }

    pub fn point(&self) -> GroupElement {
        geodesic_point(self)
    }
}

/// Reduces an angle to `[0, 2π)`.
pub fn normalize_angle(phi: f64) -> f64 {
    let r = phi.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeodesicScalars {
    pub m: f64,
    pub n: f64,
}

/// The scalars `m`, `n` of the closed-form geodesic.
///
/// * `|β| < 1`: `m = sh(t√(1−β²))/√(1−β²)`, `n = (ch(t√(1−β²)) − 1)/(1−β²)`
/// * `|β| = 1`: `m = t`, `n = t²/2`
/// * `|β| > 1`: `m = sin(t√(β²−1))/√(β²−1)`, `n = (1 − cos(t√(β²−1)))/(β²−1)`
///
/// Near `|β| = 1` a four-term series in `(1−β²)t²` replaces the quotients,
/// so the three branches join continuously.
pub fn mn_scalars(beta: f64, t: f64) -> GeodesicScalars {
    let q = 1.0 - beta * beta;
    let x = q * t * t;
    if x.abs() < HOROCYCLE_BAND {
        let m = t * (1.0 + x / 6.0 + x * x / 120.0 + x * x * x / 5040.0);
        let n = t * t * (0.5 + x / 24.0 + x * x / 720.0 + x * x * x / 40320.0);
        return GeodesicScalars { m, n };
    }
    if q > 0.0 {
        let s = q.sqrt();
        let half = (0.5 * t * s).sinh();
        GeodesicScalars {
            m: (t * s).sinh() / s,
            n: 2.0 * half * half / q,
        }
    } else {
        let s = (-q).sqrt();
        let half = (0.5 * t * s).sin();
        GeodesicScalars {
            m: (t * s).sin() / s,
            n: 2.0 * half * half / (-q),
        }
    }
}

/// Closed-form evaluation; `t` may have either sign here.
pub(crate) fn eval_closed_form(beta: f64, phi: f64, t: f64) -> nalgebra::Matrix3<f64> {
    let GeodesicScalars { m, n } = mn_scalars(beta, t);
    let bt = beta * t;
    let (sin_bt, cos_bt) = bt.sin_cos();
    let (sin_u, cos_u) = (bt - phi).sin_cos();
    let (sin_p, cos_p) = phi.sin_cos();
    let w = 1.0 - beta * beta * n;
    let bn = beta * n;
    let bm = beta * m;

    nalgebra::Matrix3::new(
        1.0 + n,
        m * cos_u + bn * sin_u,
        bn * cos_u - m * sin_u,
        m * cos_p + bn * sin_p,
        n * cos_u * cos_p + bm * sin_bt + w * cos_bt,
        -n * sin_u * cos_p + bm * cos_bt - w * sin_bt,
        m * sin_p - bn * cos_p,
        n * cos_u * sin_p - bm * cos_bt + w * sin_bt,
        -n * sin_u * sin_p + bm * sin_bt + w * cos_bt,
    )
}

/// `γ(β, φ; t)` assembled column by column from the closed form.
pub fn geodesic_point(p: &GeodesicParams) -> GroupElement {
    GroupElement::from_matrix_unchecked(eval_closed_form(p.beta, p.phi, p.t))
}

/// `γ(β, φ; t)` as `exp(t(cos φ·a + sin φ·b − βc)) · exp(tβc)`.
pub fn geodesic_point_product(p: &GeodesicParams) -> GroupElement {
    let (s, c) = p.phi.sin_cos();
    let generator = AlgebraElement::new(c, s, -p.beta).scale(p.t);
    let left = GroupElement::from_matrix_unchecked(expm(&generator.to_matrix()));
    left * rotation(p.t * p.beta)
}

/// One sample of a geodesic trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TracePoint {
    pub t: f64,
    pub element: GroupElement,
    pub base: HyperboloidPoint,
}

/// Samples `γ(β, φ; ·)` on the uniform grid `t_k = k·t/steps`,
/// `k = 0..=steps`.
pub fn geodesic_trace(p: &GeodesicParams, steps: usize, exec: Execution) -> Result<Vec<TracePoint>> {
    if steps == 0 {
        return Err(Error::Domain("trace needs at least one step".into()));
    }
    let points = exec.map_range(steps + 1, |k| {
        let t = if k == steps { p.t } else { p.t * k as f64 / steps as f64 };
        let element = geodesic_point(&GeodesicParams { t, ..*p });
        TracePoint {
            t,
            element,
            base: project_base(&element),
        }
    });
    Ok(points)
}

/// Solves the first column of `C` for `φ`, given `(β, t)`.
///
/// `(c21, c31)` is the rotation by `φ` of `(m, −βn)`, whose length
/// `√(m² + β²n²) = √(c11² − 1)` is positive off SO(2), so `φ` is unique.
/// `tol` bounds `|n(β, t) − (c11 − 1)|` relative to `1 + c11`.
pub fn recover_phi(c: &GroupElement, beta: f64, t: f64, tol: f64) -> Result<f64> {
    let c11 = c.c(1, 1);
    let (c21, c31) = (c.c(2, 1), c.c(3, 1));
    if c11 <= 1.0 || c21.hypot(c31) == 0.0 {
        return Err(Error::Domain(format!("phi is undetermined on SO(2) (c11 = {c11})")));
    }
    let GeodesicScalars { m, n } = mn_scalars(beta, t);
    let actual = c11 - 1.0;
    if (n - actual).abs() > tol * (1.0 + c11) {
        return Err(Error::ParameterMismatch { expected: n, actual });
    }
    Ok(normalize_angle(c31.atan2(c21) - (-beta * n).atan2(m)))
}
