//! Sub-Riemannian distance from the identity as a case machine.
//!
//! The distance depends only on `c11` and `|η|` (the rotation angle of the
//! `Sim·SO(2)` decomposition). Writing `n = c11 − 1`,
//! `θ = π(√((1+c11)/2) − 1)` and `α = √(2n) − 2 arccos √(2/(1+c11))`:
//!
//! | case | condition        | `|β|`                     | `d(e, C)`                      |
//! |------|------------------|---------------------------|--------------------------------|
//! | 0    | `C ∈ Sim`        | 0                         | `arch c11`                     |
//! | I    | `C ∈ SO(2)`      | root in `[3/√5, ∞)`       | `2π/√(β²−1)`                   |
//! | II   | `|η| = θ`        | `√((1+c11)/(c11−1))`      | `π√(n/2)`                      |
//! | III  | `|η| > θ`        | root in `(2/√3, β_max)`   | `(2π − γ)/√(β²−1)`             |
//! | IVa  | `|η| = α`        | 1                         | `√(2n)`                        |
//! | IVb  | `|η| < α`        | root in `(0, 1)`          | `2 arch(√((1+c11)/2)|μ|)/√(1−β²)` |
//! | IVc  | `α < |η| < θ`    | root in `(1, β_max)`      | `γ/√(β²−1)`                    |
//!
//! with `cos γ = β² − c11(β² − 1)` and `|μ| = √(1 − β²n/(2+n))`. Every
//! non-trivial case satisfies `|β|·d = |η| + 2 arccos μ`.
//!
//! The residuals are evaluated through `arcsin(s)/s` and `arsinh(s)/s`
//! forms, which are algebraically the same as the textbook expressions but
//! stay accurate as `|β| → 1` and `c11 → 1`.

use std::f64::consts::{PI, TAU};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::geodesic::{geodesic_point, mn_scalars, recover_phi, GeodesicParams};
use crate::lorentz::{GroupElement, DEFAULT_TOL};
use crate::roots::scan_roots;
use crate::structure::{
    eta_angle, in_cut_locus, is_identity, is_in_sim, is_in_so2, thresholds, CutLocus, CUT_BETA, SYMMETRY_TOL,
};

/// `2/√3`, the curvature of the `|η| = π` semicircle case.
pub const SEMICIRCLE_BETA: f64 = 1.154_700_538_379_251_5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CaseLabel {
    Identity,
    #[serde(rename = "Case0_Sim")]
    Sim,
    #[serde(rename = "CaseI_SO2")]
    So2,
    #[serde(rename = "CaseII_EtaEqualsTheta")]
    EtaEqualsTheta,
    #[serde(rename = "CaseIII_EtaAboveTheta")]
    EtaAboveTheta,
    #[serde(rename = "CaseIVa_Horocycle")]
    Horocycle,
    #[serde(rename = "CaseIVb_EtaBelowAlpha")]
    EtaBelowAlpha,
    #[serde(rename = "CaseIVc_AlphaToTheta")]
    AlphaToTheta,
}

impl CaseLabel {
    pub const ALL: [CaseLabel; 8] = [
        CaseLabel::Identity,
        CaseLabel::Sim,
        CaseLabel::So2,
        CaseLabel::EtaEqualsTheta,
        CaseLabel::EtaAboveTheta,
        CaseLabel::Horocycle,
        CaseLabel::EtaBelowAlpha,
        CaseLabel::AlphaToTheta,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CaseLabel::Identity => "Identity",
            CaseLabel::Sim => "Case0_Sim",
            CaseLabel::So2 => "CaseI_SO2",
            CaseLabel::EtaEqualsTheta => "CaseII_EtaEqualsTheta",
            CaseLabel::EtaAboveTheta => "CaseIII_EtaAboveTheta",
            CaseLabel::Horocycle => "CaseIVa_Horocycle",
            CaseLabel::EtaBelowAlpha => "CaseIVb_EtaBelowAlpha",
            CaseLabel::AlphaToTheta => "CaseIVc_AlphaToTheta",
        }
    }

    /// Whether `|β|` comes from root finding rather than a closed form.
    pub fn needs_root(self) -> bool {
        matches!(
            self,
            CaseLabel::So2 | CaseLabel::EtaAboveTheta | CaseLabel::EtaBelowAlpha | CaseLabel::AlphaToTheta
        )
    }
}

impl fmt::Display for CaseLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A case label with the invariants that selected it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CaseInfo {
    pub label: CaseLabel,
    pub c11: f64,
    pub eta_abs: f64,
    pub theta: f64,
    pub alpha: f64,
}

impl CaseInfo {
    fn n(&self) -> f64 {
        (self.c11 - 1.0).max(0.0)
    }

    /// `β_max = √((1+c11)/(c11−1))`, where `μ = 0`.
    pub fn beta_max(&self) -> f64 {
        let n = self.n();
        ((n + 2.0) / n).sqrt()
    }
}

/// Relative width of the bands around `θ` and `α` that route to the
/// closed-form boundary cases.
pub const BOUNDARY_BAND: f64 = 1e-9;

pub fn classify_case(c: &GroupElement, tol: f64) -> CaseInfo {
    let c11 = c.c(1, 1);
    let (theta, alpha) = thresholds(c11);
    let eta_abs = eta_angle(c).abs();
    let band = BOUNDARY_BAND * (1.0 + theta);
    let label = if is_identity(c, tol) {
        CaseLabel::Identity
    } else if is_in_so2(c, tol) {
        CaseLabel::So2
    } else if is_in_sim(c, SYMMETRY_TOL) {
        CaseLabel::Sim
    } else if (eta_abs - theta).abs() <= band {
        CaseLabel::EtaEqualsTheta
    } else if eta_abs > theta {
        CaseLabel::EtaAboveTheta
    } else if (eta_abs - alpha).abs() <= band {
        CaseLabel::Horocycle
    } else if eta_abs < alpha {
        CaseLabel::EtaBelowAlpha
    } else {
        CaseLabel::AlphaToTheta
    };
    CaseInfo {
        label,
        c11,
        eta_abs,
        theta,
        alpha,
    }
}

/// `arcsin(s)/s`, continuous at 0.
fn asinc(s: f64) -> f64 {
    if s < 1e-4 {
        1.0 + s * s / 6.0 + 3.0 * s.powi(4) / 40.0
    } else {
        s.min(1.0).asin() / s
    }
}

/// `arsinh(s)/s`, continuous at 0.
fn asinhc(s: f64) -> f64 {
    if s < 1e-4 {
        1.0 - s * s / 6.0 + 3.0 * s.powi(4) / 40.0
    } else {
        s.asinh() / s
    }
}

/// The case equations as functions of `|β|` for fixed `(c11, |η|)`.
#[derive(Debug, Clone, Copy)]
pub struct CaseEquations {
    n: f64,
    eta_abs: f64,
}

impl CaseEquations {
    pub fn new(c11: f64, eta_abs: f64) -> Self {
        CaseEquations {
            n: (c11 - 1.0).max(0.0),
            eta_abs,
        }
    }

    /// `arccos |μ| = arcsin(β √(n/(2+n)))`.
    pub fn arccos_abs_mu(&self, beta: f64) -> f64 {
        (beta * (self.n / (2.0 + self.n)).sqrt()).min(1.0).asin()
    }

    pub fn abs_mu(&self, beta: f64) -> f64 {
        (1.0 - beta * beta * self.n / (2.0 + self.n)).max(0.0).sqrt()
    }

    /// Central angle `γ ∈ [0, π]`, `cos γ = β² − c11(β² − 1)`, for `β ≥ 1`.
    pub fn gamma(&self, beta: f64) -> f64 {
        let s = (self.n * (beta * beta - 1.0).max(0.0) / 2.0).sqrt();
        2.0 * s.min(1.0).asin()
    }

    /// SO(2): `2βπ/√(β²−1) − (|η| + 2π)`.
    pub fn so2(&self, beta: f64) -> f64 {
        2.0 * beta * PI / (beta * beta - 1.0).sqrt() - (self.eta_abs + TAU)
    }

    /// `|η| > θ`: `(2π − γ)β/√(β²−1) − 2 arccos(−|μ|) − |η|`.
    pub fn above_theta(&self, beta: f64) -> f64 {
        let delta = beta * beta - 1.0;
        (TAU - self.gamma(beta)) * beta / delta.sqrt() - 2.0 * (PI - self.arccos_abs_mu(beta)) - self.eta_abs
    }

    /// `|η| < α`: `2(β/√(1−β²)·arch(√((1+c11)/2)|μ|) − arccos|μ|) − |η|`.
    pub fn below_alpha(&self, beta: f64) -> f64 {
        let s = (self.n * (1.0 - beta * beta).max(0.0) / 2.0).sqrt();
        2.0 * (beta * (self.n / 2.0).sqrt() * asinhc(s) - self.arccos_abs_mu(beta)) - self.eta_abs
    }

    /// `α < |η| < θ`: `γβ/√(β²−1) − 2 arccos|μ| − |η|`.
    pub fn alpha_to_theta(&self, beta: f64) -> f64 {
        let s = (self.n * (beta * beta - 1.0).max(0.0) / 2.0).sqrt();
        2.0 * beta * (self.n / 2.0).sqrt() * asinc(s) - 2.0 * self.arccos_abs_mu(beta) - self.eta_abs
    }

    pub fn residual(&self, case: CaseLabel, beta: f64) -> f64 {
        match case {
            CaseLabel::So2 => self.so2(beta),
            CaseLabel::EtaAboveTheta => self.above_theta(beta),
            CaseLabel::EtaBelowAlpha => self.below_alpha(beta),
            CaseLabel::AlphaToTheta => self.alpha_to_theta(beta),
            _ => 0.0,
        }
    }

    /// Distance along a geodesic of curvature `|β|` under `case`.
    pub fn distance(&self, case: CaseLabel, beta: f64) -> f64 {
        let n = self.n;
        match case {
            CaseLabel::Identity => 0.0,
            // arch(1 + n) = 2 arsinh √(n/2)
            CaseLabel::Sim => 2.0 * (n / 2.0).sqrt().asinh(),
            CaseLabel::So2 => TAU / (beta * beta - 1.0).sqrt(),
            CaseLabel::EtaEqualsTheta => PI * (n / 2.0).sqrt(),
            CaseLabel::EtaAboveTheta => (TAU - self.gamma(beta)) / (beta * beta - 1.0).sqrt(),
            CaseLabel::Horocycle => (2.0 * n).sqrt(),
            CaseLabel::EtaBelowAlpha => {
                let s = (n * (1.0 - beta * beta).max(0.0) / 2.0).sqrt();
                (2.0 * n).sqrt() * asinhc(s)
            }
            CaseLabel::AlphaToTheta => {
                let s = (n * (beta * beta - 1.0).max(0.0) / 2.0).sqrt();
                (2.0 * n).sqrt() * asinc(s)
            }
        }
    }

    /// Signed `μ`: `−1` on SO(2), negative above `θ`, positive below.
    pub fn signed_mu(&self, case: CaseLabel, beta: f64) -> f64 {
        match case {
            CaseLabel::Identity | CaseLabel::Sim => 1.0,
            CaseLabel::So2 => -1.0,
            CaseLabel::EtaEqualsTheta => 0.0,
            CaseLabel::EtaAboveTheta => -self.abs_mu(beta),
            _ => self.abs_mu(beta),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Base tolerance for identity / SO(2) detection and cut-locus tests.
    pub tol: f64,
    /// Number of scan intervals on each case bracket.
    pub scan_intervals: usize,
    /// Tolerance on `n(β, d)` versus `c11 − 1` when recovering `φ`.
    pub phi_tol: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: DEFAULT_TOL,
            scan_intervals: 512,
            phi_tol: 1e-6,
        }
    }
}

/// Solved `|β|` plus any further roots the bracket scan turned up.
#[derive(Debug, Clone, PartialEq)]
pub struct BetaSolution {
    pub beta: f64,
    pub residual: f64,
    pub alternate_roots: Vec<f64>,
}

/// `|β|` for the active case. Closed-form cases return directly.
pub fn solve_beta(info: &CaseInfo, opts: &SolverOptions) -> Result<BetaSolution> {
    let eq = CaseEquations::new(info.c11, info.eta_abs);
    let closed = |beta: f64| {
        Ok(BetaSolution {
            beta,
            residual: 0.0,
            alternate_roots: Vec::new(),
        })
    };
    let (lo, hi) = match info.label {
        CaseLabel::Identity | CaseLabel::Sim => return closed(0.0),
        CaseLabel::EtaEqualsTheta => return closed(info.beta_max()),
        CaseLabel::Horocycle => return closed(1.0),
        CaseLabel::So2 => {
            // The left side decreases from 3π at 3/√5 towards 2π.
            let mut hi = 2.0;
            while eq.so2(hi) > 0.0 {
                hi *= 2.0;
                if hi > 1e12 {
                    return Err(Error::SolverFailure {
                        case: info.label,
                        reason: "no upper bracket for the SO(2) equation".into(),
                        profile: vec![(hi, eq.so2(hi))],
                    });
                }
            }
            (CUT_BETA, hi)
        }
        CaseLabel::EtaAboveTheta => (SEMICIRCLE_BETA, info.beta_max()),
        CaseLabel::EtaBelowAlpha => (0.0, 1.0),
        CaseLabel::AlphaToTheta => (1.0, info.beta_max()),
    };

    let f = |b: f64| eq.residual(info.label, b);
    let zero_tol = 1e-14 * (1.0 + info.eta_abs);
    let scan = scan_roots(f, lo, hi, opts.scan_intervals, zero_tol);
    if scan.roots.is_empty() {
        return Err(Error::SolverFailure {
            case: info.label,
            reason: format!("no sign change on [{lo}, {hi}]"),
            profile: scan.profile,
        });
    }
    // Several roots would mean several candidate distances; keep the
    // shortest and report the rest.
    let mut roots = scan.roots;
    roots.sort_by(|a, b| eq.distance(info.label, *a).total_cmp(&eq.distance(info.label, *b)));
    let beta = roots[0];
    Ok(BetaSolution {
        beta,
        residual: f(beta).abs(),
        alternate_roots: roots[1..].to_vec(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistanceResiduals {
    pub master_identity: f64,
    pub forward_reconstruction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceResult {
    pub d: f64,
    pub case: CaseLabel,
    pub beta: f64,
    pub mu: f64,
    pub eta_abs: f64,
    pub gamma_angle: Option<f64>,
    pub psi: f64,
    pub geodesics: Vec<GeodesicParams>,
    pub residuals: DistanceResiduals,
    /// `|f(β)|` for the case equation at the returned `β`.
    pub equation_residual: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub alternate_roots: Vec<f64>,
}

pub fn distance_from_identity(c: &GroupElement) -> Result<DistanceResult> {
    distance_from_identity_with(c, &SolverOptions::default())
}

pub fn distance_from_identity_with(c: &GroupElement, opts: &SolverOptions) -> Result<DistanceResult> {
    let info = classify_case(c, opts.tol);
    let eq = CaseEquations::new(info.c11, info.eta_abs);
    let sol = solve_beta(&info, opts)?;
    let beta = sol.beta;
    check_bounds(&info, &eq, beta)?;

    let d = eq.distance(info.label, beta);
    let mu = eq.signed_mu(info.label, beta);
    let gamma_angle = matches!(info.label, CaseLabel::EtaAboveTheta | CaseLabel::AlphaToTheta).then(|| eq.gamma(beta));

    let geodesics = if info.label == CaseLabel::Identity {
        Vec::new()
    } else {
        geodesics_for(c, &info, beta, d, opts)?
    };
    let forward_reconstruction = geodesics
        .iter()
        .map(|g| geodesic_point(g).max_abs_diff(c))
        .fold(0.0, f64::max);

    Ok(DistanceResult {
        d,
        case: info.label,
        beta,
        mu,
        eta_abs: info.eta_abs,
        gamma_angle,
        psi: mu.clamp(-1.0, 1.0).acos(),
        geodesics,
        residuals: DistanceResiduals {
            master_identity: master_identity_residual(info.c11, info.eta_abs, beta, d, mu),
            forward_reconstruction,
        },
        equation_residual: sol.residual,
        alternate_roots: sol.alternate_roots,
    })
}

/// `| |β|d − |η| − 2 arccos μ |` with `μ = m(β, d)/√(c11² − 1)` recomputed
/// from the geodesic scalars; on SO(2) the limit value `μ = −1` is used.
pub fn master_identity_residual(c11: f64, eta_abs: f64, beta: f64, d: f64, mu_case: f64) -> f64 {
    let n = c11 - 1.0;
    let mu = if n > 0.0 {
        let m = mn_scalars(beta, d).m;
        (m / (n * (n + 2.0)).sqrt()).clamp(-1.0, 1.0)
    } else {
        mu_case
    };
    (beta * d - eta_abs - 2.0 * mu.acos()).abs()
}

fn check_bounds(info: &CaseInfo, eq: &CaseEquations, beta: f64) -> Result<()> {
    const SLACK: f64 = 1e-12;
    let bmax = info.beta_max();
    let (ok, what) = match info.label {
        CaseLabel::So2 => (beta >= CUT_BETA - SLACK, "beta >= 3/sqrt(5)"),
        CaseLabel::EtaAboveTheta => {
            let g = eq.gamma(beta);
            (
                beta > SEMICIRCLE_BETA - SLACK && beta <= bmax + SLACK && g < PI + SLACK,
                "2/sqrt(3) < beta < beta_max, 0 <= gamma < pi",
            )
        }
        CaseLabel::EtaBelowAlpha => (beta > 0.0 && beta < 1.0 + SLACK, "0 < beta < 1"),
        CaseLabel::AlphaToTheta => {
            let g = eq.gamma(beta);
            (
                beta >= 1.0 - SLACK && beta <= bmax + SLACK && g < PI + SLACK,
                "1 < beta < beta_max, 0 < gamma < pi",
            )
        }
        _ => (true, ""),
    };
    if ok {
        Ok(())
    } else {
        Err(Error::SolverFailure {
            case: info.label,
            reason: format!("solved beta = {beta} violates {what}"),
            profile: vec![(beta, eq.residual(info.label, beta))],
        })
    }
}

fn geodesics_for(
    c: &GroupElement,
    info: &CaseInfo,
    beta: f64,
    d: f64,
    opts: &SolverOptions,
) -> Result<Vec<GeodesicParams>> {
    if info.label == CaseLabel::So2 {
        // Every φ works on SO(2): the projection closes into a circle and
        // γ(β, φ; d) = rotation(βd). Report two representatives.
        let sign = if eta_angle(c) >= 0.0 { 1.0 } else { -1.0 };
        return Ok(vec![
            GeodesicParams::new(sign * beta, 0.0, d)?,
            GeodesicParams::new(sign * beta, PI, d)?,
        ]);
    }
    let signs: &[f64] = if beta == 0.0 { &[1.0] } else { &[1.0, -1.0] };
    let mut candidates = Vec::with_capacity(2);
    for &s in signs {
        let phi = recover_phi(c, s * beta, d, opts.phi_tol)?;
        let g = GeodesicParams::new(s * beta, phi, d)?;
        let err = geodesic_point(&g).max_abs_diff(c);
        candidates.push((err, g));
    }
    let on_k = matches!(in_cut_locus(c, opts.tol), Ok(CutLocus::K));
    if on_k && candidates.len() == 2 {
        return Ok(candidates.into_iter().map(|(_, g)| g).collect());
    }
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(vec![candidates[0].1])
}

/// Minimizing geodesics from `e` to `C`: one generically, two on the cut
/// locus.
pub fn minimizing_geodesics(c: &GroupElement) -> Result<Vec<GeodesicParams>> {
    if is_identity(c, DEFAULT_TOL) {
        return Err(Error::Domain("minimizing geodesics need C != e".into()));
    }
    Ok(distance_from_identity(c)?.geodesics)
}

/// Distance between two elements, reduced to `d(e, g⁻¹h)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairDistance {
    #[serde(flatten)]
    pub result: DistanceResult,
    /// `g`: the geodesics run from `e` to `g⁻¹h`; translate by `g` for `g → h`.
    #[serde(skip)]
    pub translation: Option<GroupElement>,
}

pub fn distance(g: &GroupElement, h: &GroupElement) -> Result<PairDistance> {
    distance_with(g, h, &SolverOptions::default())
}

pub fn distance_with(g: &GroupElement, h: &GroupElement, opts: &SolverOptions) -> Result<PairDistance> {
    let relative = g.inverse().multiply(h, opts.tol.max(DEFAULT_TOL))?;
    Ok(PairDistance {
        result: distance_from_identity_with(&relative, opts)?,
        translation: Some(*g),
    })
}

/// Distances from the identity for a batch, in input order.
pub fn distance_batch(items: &[GroupElement], exec: Execution) -> Vec<Result<DistanceResult>> {
    exec.map_slice(items, distance_from_identity)
}
