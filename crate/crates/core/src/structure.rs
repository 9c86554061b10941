//! Structural classification of group elements: the rotation subgroup,
//! the symmetric submanifold `Sim`, the decomposition `C = s₁k₁ = k₁s₂`,
//! the cut locus `K(e) ∪ (SO(2) − {e})`, the conjugate set and the cut and
//! conjugate times of geodesics.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geodesic::{geodesic_point, GeodesicParams};
use crate::lorentz::{rotation, GroupElement};
use crate::oracle;
use crate::roots::{bisect, tan_fixed_point};

/// Relative symmetry tolerance: `‖C − Cᵀ‖∞ ≤ SYMMETRY_TOL·(1 + c11)`.
pub const SYMMETRY_TOL: f64 = 1e-8;

/// `3/√5`: geodesics with `|β|` at or above this close up over SO(2) before
/// meeting `K(e)`.
pub const CUT_BETA: f64 = 1.341_640_786_499_873_8;

/// Step of the cut-time scan for `0 < |β| < 3/√5`.
pub const CUT_SCAN_STEP: f64 = 1e-2;

/// `n(C) = c11 − 1`, zero exactly on SO(2).
pub fn n_index(c: &GroupElement) -> f64 {
    (c.c(1, 1) - 1.0).max(0.0)
}

/// Angle `η ∈ (−π, π]` of the rotation factor `k₁` in `C = s₁k₁`:
/// `cos η = (c22 + c33)/(1 + c11)`, `sin η = (c32 − c23)/(1 + c11)`.
pub fn eta_angle(c: &GroupElement) -> f64 {
    let eta = (c.c(3, 2) - c.c(2, 3)).atan2(c.c(2, 2) + c.c(3, 3));
    if eta <= -PI {
        PI
    } else {
        eta
    }
}

/// The thresholds `θ = π(√((1+c11)/2) − 1)` and
/// `α = √(2(c11−1)) − 2 arccos √(2/(1+c11))` on `|η|`.
pub fn thresholds(c11: f64) -> (f64, f64) {
    let n = (c11 - 1.0).max(0.0);
    let theta = PI * (((1.0 + c11) / 2.0).sqrt() - 1.0);
    // arccos √(2/(2+n)) = arcsin √(n/(2+n)), better conditioned near n = 0.
    let alpha = (2.0 * n).sqrt() - 2.0 * (n / (2.0 + n)).sqrt().asin();
    (theta, alpha)
}

/// Largest off-diagonal entry of the first row and column; zero exactly on
/// SO(2) since `c11² − 1 = c21² + c31² = c12² + c13²`.
pub fn so2_residual(c: &GroupElement) -> f64 {
    [c.c(1, 2), c.c(1, 3), c.c(2, 1), c.c(3, 1)]
        .iter()
        .fold(0.0, |acc, v| acc.max(v.abs()))
}

/// The largest violation of the equalities defining `K(e)`, relative to
/// `1 + c11`.
pub fn cut_k_residual(c: &GroupElement) -> f64 {
    let r = (c.c(2, 1) + c.c(1, 2))
        .abs()
        .max((c.c(3, 1) + c.c(1, 3)).abs())
        .max((c.c(2, 3) - c.c(3, 2)).abs());
    r / (1.0 + c.c(1, 1))
}

pub fn is_identity(c: &GroupElement, tol: f64) -> bool {
    c.max_abs_diff(&GroupElement::identity()) <= tol
}

pub fn is_in_so2(c: &GroupElement, tol: f64) -> bool {
    so2_residual(c) <= tol
}

/// Membership in `Sim`: symmetric, and not the half turn `1 ⊗ (−E₂)`.
/// The identity belongs to `Sim`.
pub fn is_in_sim(c: &GroupElement, tol: f64) -> bool {
    let c11 = c.c(1, 1);
    if c.asymmetry() > tol * (1.0 + c11) {
        return false;
    }
    // The only symmetric rotations are e and the half turn.
    c11 > 1.0 + tol || c.c(2, 2) + c.c(3, 3) > 0.0
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decomposition {
    pub s1: GroupElement,
    pub k1: GroupElement,
    pub s2: GroupElement,
    pub eta: f64,
}

/// `C = s₁k₁ = k₁s₂` with `s₁, s₂` symmetric and `k₁ = rotation(η)`.
pub fn decompose(c: &GroupElement) -> Decomposition {
    let eta = eta_angle(c);
    let k1 = rotation(eta);
    if c.c(1, 1) <= 1.0 {
        return Decomposition {
            s1: GroupElement::identity(),
            k1: *c,
            s2: GroupElement::identity(),
            eta,
        };
    }
    let k_inv = k1.inverse();
    Decomposition {
        s1: c * &k_inv,
        k1,
        s2: &k_inv * c,
        eta,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CutLocus {
    No,
    K,
    ConjugateSO2,
}

/// Position of `C` relative to the cut locus of the identity.
///
/// Equalities are tested with `tol` relative to `1 + c11`; SO(2)
/// membership with absolute `tol` on the first row and column.
pub fn in_cut_locus(c: &GroupElement, tol: f64) -> Result<CutLocus> {
    if is_identity(c, tol) {
        return Err(Error::Domain("the cut locus of e does not contain e".into()));
    }
    if is_in_so2(c, tol) {
        return Ok(CutLocus::ConjugateSO2);
    }
    if cut_k_residual(c) <= tol && c.c(2, 2) + c.c(3, 3) < 0.0 {
        return Ok(CutLocus::K);
    }
    Ok(CutLocus::No)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConjugateMembership {
    pub member: bool,
    /// `(β, t)` of a geodesic reaching `C` at a conjugate time, when found.
    pub witness: Option<(f64, f64)>,
}

/// How many roots of `tan x = x` the conjugate search walks through.
pub const CONJUGATE_SEARCH_INDEX: u32 = 64;

/// Membership in the conjugate set `S(e)`.
///
/// SO(2) − {e} is decided directly. Elsewhere the answer comes from a
/// witness search over the first [`CONJUGATE_SEARCH_INDEX`] conjugate
/// families, so a `false` only means none was found at that depth.
pub fn in_conjugate_set(c: &GroupElement, tol: f64) -> ConjugateMembership {
    if is_identity(c, tol) {
        return ConjugateMembership {
            member: false,
            witness: None,
        };
    }
    if is_in_so2(c, tol) {
        return ConjugateMembership {
            member: true,
            witness: None,
        };
    }
    match oracle::conjugate_witness(c, tol, CONJUGATE_SEARCH_INDEX) {
        Some(p) => ConjugateMembership {
            member: true,
            witness: Some((p.beta, p.t)),
        },
        None => ConjugateMembership {
            member: false,
            witness: None,
        },
    }
}

/// First conjugate time `2x₁/√(β² − 1)` for `β² > 1`, where `x₁` is the first
/// positive root of `tan x = x`.
pub fn first_conjugate_time(beta: f64) -> Option<f64> {
    let q = beta * beta - 1.0;
    (q > 0.0).then(|| 2.0 * tan_fixed_point(1) / q.sqrt())
}

/// Scan horizon for the cut time when `0 < |β| < 3/√5`.
pub fn cut_scan_horizon(beta: f64) -> f64 {
    (4.0 * PI / beta.abs()).max(50.0)
}

/// Cut time `T(β)`: the geodesic `γ(β, φ; ·)` is minimizing exactly on
/// `[0, T]`, independently of `φ`.
///
/// For `|β| ≥ 3/√5`, `T = 2π/√(β² − 1)`, where the geodesic closes up over
/// SO(2). Below that, `T` is the first time `γ(β, 0; t)` meets `K(e)`, i.e.
/// where `c32 − c23` changes sign while `c22 + c33 < 0`; it is found by a
/// scan of step [`CUT_SCAN_STEP`] and bisection. `β = 0` gives `+∞`.
pub fn cut_time(beta: f64) -> Result<f64> {
    if !beta.is_finite() {
        return Err(Error::Domain(format!("beta must be finite, got {beta}")));
    }
    let b = beta.abs();
    if b == 0.0 {
        return Ok(f64::INFINITY);
    }
    if b >= CUT_BETA {
        return Ok(2.0 * PI / (b * b - 1.0).sqrt());
    }

    let at = |t: f64| geodesic_point(&GeodesicParams { beta: b, phi: 0.0, t });
    let rotation_part = |g: &GroupElement| g.c(3, 2) - g.c(2, 3);
    let trace_part = |g: &GroupElement| g.c(2, 2) + g.c(3, 3);

    let horizon = cut_scan_horizon(b);
    let steps = (horizon / CUT_SCAN_STEP).ceil() as usize;
    let mut prev_t = 0.0;
    let mut prev = at(0.0);
    let mut last_trace = trace_part(&prev);
    for k in 1..=steps {
        let t = k as f64 * CUT_SCAN_STEP;
        let g = at(t);
        if !g.matrix().iter().all(|v| v.is_finite()) {
            break;
        }
        let (r0, r1) = (rotation_part(&prev), rotation_part(&g));
        last_trace = trace_part(&g);
        if trace_part(&prev) < 0.0 && last_trace < 0.0 && (r0 < 0.0) != (r1 < 0.0) {
            let root = bisect(|s| rotation_part(&at(s)), prev_t, t);
            return Ok(root);
        }
        prev_t = t;
        prev = g;
    }
    Err(Error::Horizon {
        beta,
        horizon,
        last_trace,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Label {
    Identity,
    SO2,
    Sim,
    CutLocusK,
    Generic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassificationResiduals {
    pub symmetry: f64,
    #[serde(rename = "cutK")]
    pub cut_k: f64,
    pub so2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub label: Label,
    pub conjugate_flag: bool,
    pub eta: f64,
    pub theta: f64,
    pub alpha: f64,
    pub residuals: ClassificationResiduals,
}

/// Classifies `C`; `tol` is the base tolerance of the membership tests.
pub fn classify(c: &GroupElement, tol: f64) -> Classification {
    let c11 = c.c(1, 1);
    let (theta, alpha) = thresholds(c11);
    let residuals = ClassificationResiduals {
        symmetry: c.asymmetry() / (1.0 + c11),
        cut_k: cut_k_residual(c),
        so2: so2_residual(c),
    };
    let label = if is_identity(c, tol) {
        Label::Identity
    } else if is_in_so2(c, tol) {
        Label::SO2
    } else if is_in_sim(c, SYMMETRY_TOL.max(tol)) {
        Label::Sim
    } else if matches!(in_cut_locus(c, tol), Ok(CutLocus::K)) {
        Label::CutLocusK
    } else {
        Label::Generic
    };
    let conjugate_flag = match label {
        Label::Identity => false,
        Label::SO2 => true,
        // Sim points are reached only by β = 0 geodesics.
        Label::Sim => false,
        _ => in_conjugate_set(c, tol.max(1e-9)).member,
    };
    Classification {
        label,
        conjugate_flag,
        eta: eta_angle(c),
        theta,
        alpha,
        residuals,
    }
}
