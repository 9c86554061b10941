//! Brute-force geodesic shooting.
//!
//! The oracle knows nothing about the case analysis: it evaluates the
//! forward map `(β, φ, t) ↦ γ(β, φ; t)` on a grid, keeps the cells whose
//! image lands near the target, refines them locally and reports the
//! smallest time that still hits. That time is an upper bound on the
//! distance up to the grid resolution.

use std::cmp::Ordering;
use std::f64::consts::TAU;

use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use crate::distance::{distance_from_identity, CaseLabel};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::geodesic::{eval_closed_form, geodesic_point, normalize_angle, recover_phi, GeodesicParams};
use crate::lorentz::GroupElement;
use crate::roots::tan_fixed_point;

/// Hit tolerance reached at the last refinement round.
pub const FINAL_HIT_TOL: f64 = 1e-6;

/// Default coarse-stage hit tolerance.
pub const COARSE_HIT_TOL: f64 = 1e-3;

/// Moves allowed per round before the box must have settled.
const MAX_MOVES: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// `B`: the β grid spans `[−B, B]`.
    pub beta_max: f64,
    pub beta_steps: usize,
    pub phi_steps: usize,
    pub t_steps: usize,
    pub t_max: f64,
    pub refine_rounds: u32,
    /// Points per axis of each local refinement grid; odd, ≥ 3.
    pub refine_steps: usize,
    /// Coarse local minima carried into refinement.
    pub max_seeds: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            beta_max: 3.0,
            beta_steps: 49,
            phi_steps: 48,
            t_steps: 101,
            t_max: 10.0,
            refine_rounds: 3,
            refine_steps: 11,
            max_seeds: 48,
        }
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::Domain(format!("invalid grid: {what}")));
        if !(self.beta_max >= 3.0 && self.beta_max.is_finite()) {
            return bad("beta range must be [-B, B] with B >= 3");
        }
        if self.beta_steps < 2 || self.phi_steps < 2 || self.t_steps < 2 {
            return bad("all steps must be >= 2");
        }
        if !(self.t_max > 0.0 && self.t_max.is_finite()) {
            return bad("t_max must be positive");
        }
        if self.refine_steps < 3 || self.refine_steps.is_multiple_of(2) {
            return bad("refine_steps must be odd and >= 3");
        }
        if self.max_seeds == 0 {
            return bad("max_seeds must be positive");
        }
        Ok(())
    }

    /// Coarse spacings `(h_β, h_φ, h_t)`.
    pub fn coarse_spacing(&self) -> [f64; 3] {
        [
            2.0 * self.beta_max / (self.beta_steps - 1) as f64,
            TAU / self.phi_steps as f64,
            self.t_max / (self.t_steps - 1) as f64,
        ]
    }

    /// Factor by which each refinement round shrinks the spacing.
    pub fn shrink(&self) -> f64 {
        2.0 / (self.refine_steps - 1) as f64
    }

    /// Spacing in `t` after `round` refinement rounds.
    pub fn t_resolution(&self, round: u32) -> f64 {
        self.coarse_spacing()[2] * self.shrink().powi(round as i32)
    }

    /// Spacing in `t` after the last round; the agreement tolerance.
    pub fn final_resolution(&self) -> f64 {
        self.t_resolution(self.refine_rounds)
    }

    /// Hit tolerance at `round`, geometric from `coarse` to [`FINAL_HIT_TOL`].
    pub fn hit_tol_at(&self, coarse: f64, round: u32) -> f64 {
        if self.refine_rounds == 0 || coarse <= FINAL_HIT_TOL {
            return coarse;
        }
        let s = round as f64 / self.refine_rounds as f64;
        coarse.powf(1.0 - s) * FINAL_HIT_TOL.powf(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleHit {
    pub params: GeodesicParams,
    /// `‖γ(params) − C‖∞`.
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Agree,
    /// `|gap|` above tolerance, or no hit: either the solver or the grid
    /// is wrong; both parameter sets are in the report.
    Discrepancy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    /// Smallest hitting time; `+∞` (JSON `null`) when nothing hit.
    pub t_min: f64,
    pub best_params: Option<GeodesicParams>,
    /// `‖γ(best) − C‖∞`.
    pub match_residual: f64,
    /// Spacing in `t` of the final grid.
    pub resolution: f64,
    /// Relative hit tolerance used at the final round.
    pub hit_tol: f64,
    /// Distinct hits, sorted by time.
    pub hits: Vec<OracleHit>,
    /// Smallest certified time found up to the coarse stage and up to each
    /// refinement round; non-increasing, last entry is `t_min`.
    pub round_t_min: Vec<f64>,
    pub analytic_d: Option<f64>,
    pub gap: Option<f64>,
    pub verdict: Option<Verdict>,
    pub analytic_case: Option<CaseLabel>,
    pub analytic_geodesics: Vec<GeodesicParams>,
    pub analytic_error: Option<String>,
}

impl OracleReport {
    pub fn is_hit(&self) -> bool {
        self.t_min.is_finite()
    }

    /// Hits with `t ≤ t_min + slack`.
    pub fn near_minimal(&self, slack: f64) -> Vec<OracleHit> {
        self.hits
            .iter()
            .copied()
            .filter(|h| h.params.t <= self.t_min + slack)
            .collect()
    }
}

/// Deterministic order on grid candidates: residual, then `(t, β, φ)`.
fn by_residual(a: &(f64, [f64; 3]), b: &(f64, [f64; 3])) -> Ordering {
    a.0.total_cmp(&b.0).then_with(|| lexicographic(&a.1, &b.1))
}

/// Lexicographic `(t, β, φ)`.
fn lexicographic(a: &[f64; 3], b: &[f64; 3]) -> Ordering {
    a[2].total_cmp(&b[2])
        .then_with(|| a[0].total_cmp(&b[0]))
        .then_with(|| a[1].total_cmp(&b[1]))
}

fn max_abs(m: &Matrix3<f64>) -> f64 {
    m.iter().fold(0.0, |acc: f64, v| acc.max(v.abs()))
}

struct Target {
    m: Matrix3<f64>,
    scale: f64,
}

impl Target {
    fn new(c: &GroupElement) -> Self {
        Target {
            m: *c.matrix(),
            scale: c.c(1, 1).max(1.0),
        }
    }

    /// `‖γ(p) − C‖∞ / max(1, c11)`.
    fn residual(&self, p: &[f64; 3]) -> f64 {
        let r = max_abs(&(eval_closed_form(p[0], p[1], p[2]) - self.m)) / self.scale;
        if r.is_finite() {
            r
        } else {
            f64::INFINITY
        }
    }

    /// Frobenius distance, normalized like [`Target::residual`]. Smooth, so
    /// the refinement grids follow it.
    fn objective(&self, p: &[f64; 3]) -> f64 {
        let r = (eval_closed_form(p[0], p[1], p[2]) - self.m).norm() / self.scale;
        if r.is_finite() {
            r
        } else {
            f64::INFINITY
        }
    }

    /// Residual reachable within a cell of spacing `h` around a solution,
    /// to first order: `Σ_k ‖∂γ/∂p_k‖∞ h_k`, normalized like [`residual`].
    fn cell_bound(&self, p: &[f64; 3], h: &[f64; 3]) -> f64 {
        const STEP: f64 = 1e-6;
        let mut total = 0.0;
        for k in 0..3 {
            let (mut lo, mut hi) = (*p, *p);
            lo[k] -= STEP;
            hi[k] += STEP;
            let d = eval_closed_form(hi[0], hi[1], hi[2]) - eval_closed_form(lo[0], lo[1], lo[2]);
            total += max_abs(&d) / (2.0 * STEP) * h[k];
        }
        total / self.scale
    }
}

#[derive(Debug, Clone)]
struct Seed {
    p: [f64; 3],
    residual: f64,
    /// Cleared once the residual exceeds what the grid can explain.
    alive: bool,
}

fn clamp_point(p: [f64; 3], grid: &GridSpec) -> [f64; 3] {
    [
        p[0].clamp(-grid.beta_max, grid.beta_max),
        normalize_angle(p[1]),
        p[2].clamp(0.0, grid.t_max),
    ]
}

/// Minimizes the objective over a `refine_steps³` box of half-width `h`
/// around `center`; the flag is set when the centre itself wins.
fn refine_box(target: &Target, grid: &GridSpec, center: [f64; 3], h: [f64; 3]) -> (f64, [f64; 3], bool) {
    let half = (grid.refine_steps / 2) as isize;
    let step = h.map(|v| v / half as f64);
    let mut best = (target.objective(&center), center);
    let mut settled = true;
    for i in -half..=half {
        for j in -half..=half {
            for k in -half..=half {
                if (i, j, k) == (0, 0, 0) {
                    continue;
                }
                let p = clamp_point(
                    [
                        center[0] + i as f64 * step[0],
                        center[1] + j as f64 * step[1],
                        center[2] + k as f64 * step[2],
                    ],
                    grid,
                );
                let cand = (target.objective(&p), p);
                if by_residual(&cand, &best) == Ordering::Less {
                    best = cand;
                    settled = false;
                }
            }
        }
    }
    (best.0, best.1, settled)
}

/// Coarse local minima of the objective (26-neighbourhood, periodic in φ),
/// best first. Near-ties go to the smaller grid index, so a plateau (the
/// φ-circle over an SO(2) target, say) yields one seed.
fn coarse_seeds(target: &Target, grid: &GridSpec, exec: Execution) -> Vec<(f64, [f64; 3])> {
    let [hb, hp, ht] = grid.coarse_spacing();
    let (nb, np, nt) = (grid.beta_steps, grid.phi_steps, grid.t_steps);
    let point = |i: usize, j: usize, k: usize| {
        let t = if k == nt - 1 { grid.t_max } else { k as f64 * ht };
        [-grid.beta_max + i as f64 * hb, j as f64 * hp, t]
    };
    let values: Vec<Vec<f64>> = exec.map_range(nb, |i| {
        let mut row = Vec::with_capacity(np * nt);
        for j in 0..np {
            for k in 0..nt {
                row.push(target.objective(&point(i, j, k)));
            }
        }
        row
    });
    let at = |i: usize, j: usize, k: usize| values[i][j * nt + k];

    let minima: Vec<Vec<(f64, [f64; 3])>> = exec.map_range(nb, |i| {
        let mut out = Vec::new();
        for j in 0..np {
            for k in 0..nt {
                let v = at(i, j, k);
                if !v.is_finite() {
                    continue;
                }
                let mut is_min = true;
                'nb: for di in -1isize..=1 {
                    let ii = i as isize + di;
                    if ii < 0 || ii >= nb as isize {
                        continue;
                    }
                    for dj in -1isize..=1 {
                        let jj = (j as isize + dj).rem_euclid(np as isize) as usize;
                        for dk in -1isize..=1 {
                            let kk = k as isize + dk;
                            if kk < 0 || kk >= nt as isize || (di, dj, dk) == (0, 0, 0) {
                                continue;
                            }
                            let w = at(ii as usize, jj, kk as usize);
                            let tie = (w - v).abs() <= 1e-12 * v;
                            let earlier = (ii as usize, jj, kk as usize) < (i, j, k);
                            if w < v && !tie || tie && earlier {
                                is_min = false;
                                break 'nb;
                            }
                        }
                    }
                }
                if is_min {
                    out.push((v, point(i, j, k)));
                }
            }
        }
        out
    });
    let mut all: Vec<_> = minima.into_iter().flatten().collect();
    all.sort_by(by_residual);
    all.truncate(grid.max_seeds);
    all
}

/// Whether `residual` is still explained by tolerance or cell size. The
/// factor 2 covers curvature the first-order bound misses.
fn plausible(target: &Target, p: &[f64; 3], residual: f64, h: &[f64; 3], tol: f64) -> bool {
    residual <= tol.max(2.0 * target.cell_bound(p, h))
}

/// One refinement round: moves the box of half-width `box_h` until its
/// centre is optimal, then returns the sup-norm residual there.
fn refine_step(target: &Target, grid: &GridSpec, center: [f64; 3], box_h: [f64; 3]) -> (f64, [f64; 3]) {
    let mut p = center;
    for _ in 0..MAX_MOVES {
        let (_, q, settled) = refine_box(target, grid, p, box_h);
        p = q;
        if settled {
            break;
        }
    }
    (target.residual(&p), p)
}

fn min_t(points: &[[f64; 3]]) -> f64 {
    points.iter().map(|q| q[2]).fold(f64::INFINITY, f64::min)
}

/// Cap on damped Gauss-Newton steps spent certifying a hit.
const POLISH_ROUNDS: usize = 60;

/// Entry-wise residual `γ(p) − C` as a 9-vector.
fn residual_vector(target: &Target, p: &[f64; 3]) -> nalgebra::SVector<f64, 9> {
    let d = eval_closed_form(p[0], p[1], p[2]) - target.m;
    nalgebra::SVector::<f64, 9>::from_iterator(d.iter().copied())
}

/// Levenberg-Marquardt on the entries, started from the refined point.
/// The cell spacing `h` sets the finite-difference steps. `None` unless
/// the sup-norm residual reaches `tol`.
fn certify(target: &Target, p: [f64; 3], residual: f64, h: [f64; 3], tol: f64) -> Option<[f64; 3]> {
    let (mut p, mut residual) = (p, residual);
    let mut r = residual_vector(target, &p);
    let mut lambda = 1e-3;
    for _ in 0..POLISH_ROUNDS {
        if residual <= tol {
            return Some(p);
        }
        let mut jac = nalgebra::SMatrix::<f64, 9, 3>::zeros();
        for k in 0..3 {
            let step = (h[k] * 1e-3).max(1e-8);
            let (mut lo, mut hi) = (p, p);
            lo[k] -= step;
            hi[k] += step;
            let col = (residual_vector(target, &hi) - residual_vector(target, &lo)) / (2.0 * step);
            jac.set_column(k, &col);
        }
        let jtj = jac.transpose() * jac;
        let g = jac.transpose() * r;
        let mut improved = false;
        for _ in 0..12 {
            let mut a = jtj;
            for k in 0..3 {
                a[(k, k)] += lambda * jtj[(k, k)].max(1e-12);
            }
            let Some(delta) = a.lu().solve(&(-g)) else {
                lambda *= 10.0;
                continue;
            };
            let mut q = [p[0] + delta[0], p[1] + delta[1], p[2] + delta[2]];
            q[1] = normalize_angle(q[1]);
            q[2] = q[2].max(0.0);
            let rq = residual_vector(target, &q);
            if rq.norm() < r.norm() {
                p = q;
                r = rq;
                residual = target.residual(&p);
                lambda = (lambda * 0.3).max(1e-12);
                improved = true;
                break;
            }
            lambda *= 10.0;
        }
        if !improved {
            break;
        }
    }
    (residual <= tol).then_some(p)
}

pub fn shoot_min_time(c: &GroupElement, grid: &GridSpec, hit_tol: f64) -> Result<OracleReport> {
    shoot_min_time_with(c, grid, hit_tol, Execution::default())
}

/// Shooting search.
///
/// `hit_tol` applies to the residual relative to `max(1, c11)` at the
/// coarse stage and tightens geometrically to [`FINAL_HIT_TOL`] over the
/// refinement rounds; a seed is dropped once its residual exceeds both the
/// round's tolerance and what the cell size can explain. After every stage
/// each surviving seed is certified by a damped Gauss-Newton polish down to
/// the final tolerance, and `t_min` is the smallest certified time.
/// `resolution` is the spacing in `t` after `refine_rounds` rounds.
pub fn shoot_min_time_with(c: &GroupElement, grid: &GridSpec, hit_tol: f64, exec: Execution) -> Result<OracleReport> {
    grid.validate()?;
    let target = Target::new(c);
    let mut h = grid.coarse_spacing();

    let mut seeds: Vec<Seed> = coarse_seeds(&target, grid, exec)
        .into_iter()
        .map(|(_, p)| (target.residual(&p), p))
        .map(|(residual, p)| Seed {
            p,
            residual,
            alive: plausible(&target, &p, residual, &h, hit_tol),
        })
        .collect();

    let final_tol = grid.hit_tol_at(hit_tol, grid.refine_rounds);
    let certify_alive = |seeds: &[Seed], h: [f64; 3]| -> Vec<[f64; 3]> {
        exec.map_slice(seeds, |s| {
            if s.alive {
                certify(&target, s.p, s.residual, h, final_tol)
            } else {
                None
            }
        })
        .into_iter()
        .flatten()
        .collect()
    };

    let mut found: Vec<[f64; 3]> = certify_alive(&seeds, h);
    let mut round_t_min = vec![min_t(&found)];
    for round in 1..=grid.refine_rounds {
        let tol = grid.hit_tol_at(hit_tol, round);
        let box_h = h;
        h = h.map(|v| v * grid.shrink());
        seeds = exec.map_slice(&seeds, |s| {
            if !s.alive {
                return s.clone();
            }
            let (residual, p) = refine_step(&target, grid, s.p, box_h);
            Seed {
                p,
                residual,
                alive: plausible(&target, &p, residual, &h, tol),
            }
        });
        found.extend(certify_alive(&seeds, h));
        let prev = round_t_min[round as usize - 1];
        round_t_min.push(prev.min(min_t(&found)));
    }
    found.sort_by(lexicographic);

    let mut hits: Vec<OracleHit> = Vec::new();
    for q in found {
        let params = GeodesicParams {
            beta: q[0],
            phi: q[1],
            t: q[2],
        };
        let duplicate = hits.iter().any(|o| {
            let dphi = (o.params.phi - params.phi).rem_euclid(TAU);
            (o.params.beta - params.beta).abs() <= h[0]
                && dphi.min(TAU - dphi) <= h[1]
                && (o.params.t - params.t).abs() <= h[2]
        });
        if !duplicate {
            let residual = geodesic_point(&params).max_abs_diff(c);
            hits.push(OracleHit { params, residual });
        }
    }

    let best = hits.first().copied();
    Ok(OracleReport {
        t_min: best.map_or(f64::INFINITY, |b| b.params.t),
        best_params: best.map(|b| b.params),
        match_residual: best.map_or(f64::INFINITY, |b| b.residual),
        resolution: h[2],
        hit_tol: final_tol,
        hits,
        round_t_min,
        analytic_d: None,
        gap: None,
        verdict: None,
        analytic_case: None,
        analytic_geodesics: Vec::new(),
        analytic_error: None,
    })
}

pub fn verify_distance(c: &GroupElement, grid: &GridSpec, tol: f64) -> Result<OracleReport> {
    verify_distance_with(c, grid, tol, Execution::default())
}

/// Shooting plus the analytic solver; `Agree` when `|t_min − d| ≤ tol`.
/// A solver error is recorded in the report, not returned.
pub fn verify_distance_with(c: &GroupElement, grid: &GridSpec, tol: f64, exec: Execution) -> Result<OracleReport> {
    let mut report = shoot_min_time_with(c, grid, COARSE_HIT_TOL, exec)?;
    match distance_from_identity(c) {
        Ok(r) => {
            let gap = report.t_min - r.d;
            report.analytic_d = Some(r.d);
            report.gap = Some(gap);
            report.analytic_case = Some(r.case);
            report.analytic_geodesics = r.geodesics;
            report.verdict = Some(if gap.abs() <= tol {
                Verdict::Agree
            } else {
                Verdict::Discrepancy
            });
        }
        Err(e) => {
            report.analytic_error = Some(e.to_string());
            report.verdict = Some(Verdict::Discrepancy);
        }
    }
    Ok(report)
}

/// A geodesic reaching `C` exactly at one of its conjugate times, if any
/// exists among the first `max_index` families.
///
/// Conjugate points of `γ(β, φ; ·)` with `β² > 1` sit at `t√(β² − 1)/2 = x_k`,
/// the roots of `tan x = x`. On such a point `n = 2 sin²x_k/(β² − 1)`, so
/// `c11` fixes `β` for each `k`, and `φ` follows from the first column.
pub fn conjugate_witness(c: &GroupElement, tol: f64, max_index: u32) -> Option<GeodesicParams> {
    let c11 = c.c(1, 1);
    let n = c11 - 1.0;
    if n.is_nan() || n <= 0.0 {
        return None;
    }
    for k in 1..=max_index {
        let x = tan_fixed_point(k);
        let q = 2.0 * x.sin().powi(2) / n;
        let beta = (1.0 + q).sqrt();
        let t = 2.0 * x / q.sqrt();
        for beta in [beta, -beta] {
            let Ok(phi) = recover_phi(c, beta, t, tol.max(1e-12)) else {
                continue;
            };
            let p = GeodesicParams { beta, phi, t };
            if geodesic_point(&p).max_abs_diff(c) <= tol * (1.0 + c11) {
                return Some(p);
            }
        }
    }
    None
}
