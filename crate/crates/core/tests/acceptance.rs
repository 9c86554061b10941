//! Acceptance criteria 1 to 9, one PASS/FAIL line each.
//!
//! Run with `cargo test -p so21 --test acceptance`; the process exits
//! non-zero when any criterion fails.

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};
use std::time::{Duration, Instant};

use nalgebra::SMatrix;
use so21::distance::{classify_case, CaseEquations, CaseLabel, SEMICIRCLE_BETA};
use so21::geodesic::{geodesic_point, geodesic_point_product, mn_scalars, GeodesicParams};
use so21::lorentz::{boost, rotation, GroupElement, DEFAULT_TOL};
use so21::oracle::{shoot_min_time, GridSpec, COARSE_HIT_TOL};
use so21::roots::tan_fixed_point;
use so21::sample::{SampleBox, Sampler};
use so21::structure::{cut_time, eta_angle, first_conjugate_time, CUT_BETA};
use so21::{distance, distance_from_identity, minimizing_geodesics};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn gp(beta: f64, phi: f64, t: f64) -> GroupElement {
    geodesic_point(&GeodesicParams::new(beta, phi, t).unwrap())
}

fn run(id: u32, name: &str, limit: Duration, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let out = f();
    let elapsed = start.elapsed();
    let in_time = elapsed <= limit;
    let pass = out.pass && in_time;
    println!(
        "criterion {id} {} {name}: {}; {:.3?} (limit {:?}{})",
        if pass { "PASS" } else { "FAIL" },
        out.detail,
        elapsed,
        limit,
        if in_time { "" } else { ", exceeded" },
    );
    pass
}

fn point_check() -> Outcome {
    let c = gp(SEMICIRCLE_BETA, 0.0, PI * 3f64.sqrt());
    let info = classify_case(&c, DEFAULT_TOL);
    let r = distance_from_identity(&c).unwrap();
    let e_c11 = (c.c(1, 1) - 7.0).abs();
    let e_eta = (info.eta_abs - PI).abs();
    let e_d = (r.d - PI * 3f64.sqrt()).abs();
    let pass = e_c11 <= 1e-8 && e_eta <= 1e-8 && e_d <= 1e-8 && r.case == CaseLabel::EtaEqualsTheta;
    outcome(
        pass,
        format!(
            "case {}, |c11-7| {e_c11:.1e}, ||eta|-pi| {e_eta:.1e}, |d-pi*sqrt3| {e_d:.1e}",
            r.case
        ),
    )
}

fn sim_distances() -> Outcome {
    let mut s = Sampler::new(2);
    let mut worst: f64 = 0.0;
    let mut worst_arch: f64 = 0.0;
    let mut all_sim = true;
    for _ in 0..100 {
        let phi = s.uniform(0.0, TAU);
        let t = 5.0 - s.uniform(0.0, 5.0);
        let c = gp(0.0, phi, t);
        let r = distance_from_identity(&c).unwrap();
        all_sim &= r.case == CaseLabel::Sim;
        worst = worst.max((r.d - t).abs());
        worst_arch = worst_arch.max((r.d - c.c(1, 1).acosh()).abs() / t.max(1.0));
    }
    outcome(
        all_sim && worst <= 1e-9,
        format!("max |d-t| {worst:.1e}, max |d-arch c11|/max(1,t) {worst_arch:.1e}, all Case0 {all_sim}"),
    )
}

fn so2_distances() -> Outcome {
    let r = distance_from_identity(&rotation(PI)).unwrap();
    let e_d = (r.d - PI * 5f64.sqrt()).abs();
    let e_b = (r.beta - 3.0 / 5f64.sqrt()).abs();
    let mut ok = e_d <= 1e-8 && e_b <= 1e-8;
    let (mut worst_res, mut worst_closed, mut min_beta): (f64, f64, f64) = (0.0, 0.0, f64::INFINITY);
    for k in 1..=50 {
        let omega = PI * k as f64 / 50.0;
        let c = rotation(omega);
        let r = distance_from_identity(&c).unwrap();
        ok &= r.case == CaseLabel::So2;
        let res = CaseEquations::new(1.0, omega).so2(r.beta).abs();
        // β² = k²/(k² − 1) with k = (ω + 2π)/(2π) solves the same equation.
        let kk = (omega + TAU) / TAU;
        let closed = (kk * kk / (kk * kk - 1.0)).sqrt();
        worst_res = worst_res.max(res);
        worst_closed = worst_closed.max((r.beta - closed).abs() / closed);
        min_beta = min_beta.min(r.beta);
    }
    ok &= worst_res < 1e-10 && min_beta >= 3.0 / 5f64.sqrt() - 1e-15;
    outcome(
        ok,
        format!(
            "rotation(pi): |d-pi*sqrt5| {e_d:.1e}, |beta-3/sqrt5| {e_b:.1e}; 50 angles: min beta {min_beta:.6}, \
             max residual {worst_res:.1e}, max rel. dev. from closed form {worst_closed:.1e}"
        ),
    )
}

/// Generic draws plus strata for the cases that only occur on
/// lower-dimensional sets.
fn round_trip_samples() -> Vec<GeodesicParams> {
    let mut s = Sampler::new(4);
    let mut out = Vec::with_capacity(1000);
    let capped = |beta: f64| cut_time(beta).map_or(10.0, |t| (0.9 * t).min(10.0));
    for _ in 0..850 {
        let beta = s.uniform(-3.0, 3.0);
        let t = capped(beta) * (1.0 - s.uniform(0.0, 1.0));
        out.push(GeodesicParams::new(beta, s.uniform(0.0, TAU), t).unwrap());
    }
    for _ in 0..40 {
        out.push(GeodesicParams::new(0.0, s.uniform(0.0, TAU), 5.0 - s.uniform(0.0, 5.0)).unwrap());
    }
    for i in 0..40 {
        // SO(2) is reached at t = T(β) exactly.
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        let beta = sign * s.uniform(CUT_BETA, 3.0);
        out.push(GeodesicParams::new(beta, s.uniform(0.0, TAU), cut_time(beta).unwrap()).unwrap());
    }
    for i in 0..35 {
        // μ = 0 where t√(β² − 1) = π.
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        let beta = sign * s.uniform(CUT_BETA, 3.0);
        out.push(GeodesicParams::new(beta, s.uniform(0.0, TAU), PI / (beta * beta - 1.0).sqrt()).unwrap());
    }
    let t_horo = 0.9 * cut_time(1.0).unwrap();
    for i in 0..35 {
        let beta = if i % 2 == 0 { 1.0 } else { -1.0 };
        out.push(GeodesicParams::new(beta, s.uniform(0.0, TAU), t_horo * (1.0 - s.uniform(0.0, 1.0))).unwrap());
    }
    out
}

fn round_trip() -> Outcome {
    let samples = round_trip_samples();
    let mut counts: BTreeMap<&'static str, usize> = BTreeMap::new();
    let (mut worst_d, mut worst_rec): (f64, f64) = (0.0, 0.0);
    let mut failures = 0usize;
    let mut first_failure = String::new();
    for p in &samples {
        let c = geodesic_point(p);
        match distance_from_identity(&c) {
            Ok(r) => {
                *counts.entry(r.case.as_str()).or_default() += 1;
                let rec = r
                    .geodesics
                    .iter()
                    .map(|g| geodesic_point(g).max_abs_diff(&c))
                    .fold(f64::INFINITY, f64::min);
                let rec = if r.case == CaseLabel::Identity { 0.0 } else { rec };
                let ed = (r.d - p.t).abs();
                if ed > 1e-6 || rec > 1e-6 {
                    failures += 1;
                    if first_failure.is_empty() {
                        first_failure = format!("; first failure {p:?} case {} d {} rec {rec:.1e}", r.case, r.d);
                    }
                }
                worst_d = worst_d.max(ed);
                worst_rec = worst_rec.max(rec);
            }
            Err(e) => {
                failures += 1;
                if first_failure.is_empty() {
                    first_failure = format!("; first failure {p:?}: {e}");
                }
            }
        }
    }
    let required = [
        CaseLabel::Sim,
        CaseLabel::So2,
        CaseLabel::EtaEqualsTheta,
        CaseLabel::EtaAboveTheta,
        CaseLabel::Horocycle,
        CaseLabel::EtaBelowAlpha,
        CaseLabel::AlphaToTheta,
    ];
    let covered = required.iter().all(|c| counts.contains_key(c.as_str()));
    outcome(
        failures == 0 && covered,
        format!(
            "{} samples, {failures} failures, max |d-t| {worst_d:.1e}, max reconstruction {worst_rec:.1e}, \
             cases {counts:?}{first_failure}",
            samples.len()
        ),
    )
}

fn oracle_targets() -> Vec<(&'static str, GroupElement)> {
    vec![
        ("boost 1", boost(1.0)),
        ("sim phi=2 t=2.5", gp(0.0, 2.0, 2.5)),
        ("sim phi=4 t=0.6", gp(0.0, 4.0, 0.6)),
        ("rotation pi", rotation(PI)),
        ("rotation 2", rotation(2.0)),
        ("rotation -1.2", rotation(-1.2)),
        ("semicircle", gp(SEMICIRCLE_BETA, 0.0, PI * 3f64.sqrt())),
        ("mu=0 beta=2", gp(2.0, 0.3, PI / 3f64.sqrt())),
        ("beta=2 t=3", gp(2.0, 1.0, 3.0)),
        ("beta=-1.6 t=2.5", gp(-1.6, 4.0, 2.5)),
        ("cut point exp(a)rot(pi)", boost(1.0) * rotation(PI)),
        ("horocycle t=2", gp(1.0, 0.5, 2.0)),
        ("horocycle t=3.5", gp(-1.0, 3.0, 3.5)),
        ("beta=0.5 t=0.7", gp(0.5, 1.0, 0.7)),
        ("beta=-0.8 t=3", gp(-0.8, 2.2, 3.0)),
        ("beta=0.3 t=1.5", gp(0.3, 5.0, 1.5)),
        ("beta=1.2 t=2", gp(1.2, 0.4, 2.0)),
        ("beta=-1.5 t=1", gp(-1.5, 2.7, 1.0)),
        ("beta=2.5 t=0.8", gp(2.5, 5.5, 0.8)),
        ("past cut beta=2 t=5", gp(2.0, 0.0, 5.0)),
    ]
}

fn oracle_agreement() -> Outcome {
    let grid = GridSpec::default();
    let res = grid.final_resolution();
    let mut counts: BTreeMap<&'static str, usize> = BTreeMap::new();
    let mut worst: f64 = 0.0;
    let mut bad = Vec::new();
    for (name, c) in oracle_targets() {
        let d = distance_from_identity(&c).unwrap();
        *counts.entry(d.case.as_str()).or_default() += 1;
        let r = shoot_min_time(&c, &grid, COARSE_HIT_TOL).unwrap();
        let gap = r.t_min - d.d;
        worst = worst.max(gap.abs());
        if gap.is_nan() || gap.abs() > r.resolution {
            bad.push(format!("{name}: t_min {} d {}", r.t_min, d.d));
        }
    }
    outcome(
        bad.is_empty() && res <= 1e-3 && counts.len() >= 7,
        format!(
            "20 targets, resolution {res:.1e}, max |t_min-d| {worst:.1e}, cases {counts:?}{}",
            if bad.is_empty() {
                String::new()
            } else {
                format!(", misses {bad:?}")
            }
        ),
    )
}

/// Largest `K(e)` residual and reconstruction error at the cut point of
/// `β`, both divided by `scale(c)`; `false` on a structural failure.
fn cut_point_check(beta: f64, scale: impl Fn(&GroupElement) -> f64, notes: &mut Vec<String>) -> (bool, f64, f64) {
    let t = cut_time(beta).unwrap();
    let c = gp(beta, 0.0, t);
    let s = scale(&c);
    let k = [
        (c.c(2, 1) + c.c(1, 2)).abs(),
        (c.c(3, 1) + c.c(1, 3)).abs(),
        (c.c(2, 3) - c.c(3, 2)).abs(),
    ]
    .into_iter()
    .fold(0.0, f64::max)
        / s;
    let mut ok = c.c(2, 2) + c.c(3, 3) < 0.0;
    let mut rec: f64 = 0.0;
    match minimizing_geodesics(&c) {
        Ok(gs) => {
            if gs.len() != 2 {
                ok = false;
                notes.push(format!("beta {beta:.3}: {} geodesics", gs.len()));
            }
            for g in &gs {
                rec = rec.max(geodesic_point(g).max_abs_diff(&c) / s);
            }
        }
        Err(e) => {
            ok = false;
            notes.push(format!("beta {beta:.3}: {e}"));
        }
    }
    (ok, k, rec)
}

fn cut_locus() -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;
    // Absolute residuals while entries stay moderate.
    let (mut worst_k, mut worst_rec): (f64, f64) = (0.0, 0.0);
    for i in 0..20 {
        let beta = 0.3 + i as f64 / 19.0;
        let (o, k, rec) = cut_point_check(beta, |_| 1.0, &mut notes);
        ok &= o;
        worst_k = worst_k.max(k);
        worst_rec = worst_rec.max(rec);
    }
    // Below 0.3 the cut time grows like 2π/β and c11 like e^T, so
    // residuals are taken relative to c11.
    let (mut small_k, mut small_rec): (f64, f64) = (0.0, 0.0);
    for i in 0..10 {
        let beta = 0.05 * 6f64.powf(i as f64 / 10.0);
        let (o, k, rec) = cut_point_check(beta, |c| c.c(1, 1), &mut notes);
        ok &= o;
        small_k = small_k.max(k);
        small_rec = small_rec.max(rec);
    }
    ok &= worst_k <= 1e-7 && worst_rec <= 1e-6 && small_k <= 1e-7 && small_rec <= 1e-6;
    outcome(
        ok,
        format!(
            "beta in [0.3, 1.3]: max K-condition residual {worst_k:.1e}, max reconstruction {worst_rec:.1e}; \
             beta in [0.05, 0.3), relative to c11: {small_k:.1e}, {small_rec:.1e}{}",
            if notes.is_empty() {
                String::new()
            } else {
                format!(", {notes:?}")
            }
        ),
    )
}

fn min_singular_value(beta: f64, phi: f64, t: f64) -> f64 {
    const H: f64 = 1e-5;
    let mut j = SMatrix::<f64, 9, 3>::zeros();
    let base = [beta, phi, t];
    for k in 0..3 {
        let (mut lo, mut hi) = (base, base);
        lo[k] -= H;
        hi[k] += H;
        let f = |p: [f64; 3]| {
            GeodesicParams {
                beta: p[0],
                phi: p[1],
                t: p[2],
            }
            .point()
            .to_row_major()
        };
        let (a, b) = (f(hi), f(lo));
        for r in 0..9 {
            j[(r, k)] = (a[r] - b[r]) / (2.0 * H);
        }
    }
    j.singular_values().min()
}

fn conjugate_condition() -> Outcome {
    let x1 = tan_fixed_point(1);
    let e = (x1.tan() - x1).abs();
    let mut ok = e < 1e-10 && x1 > PI && x1 < 1.5 * PI;
    let mut parts = vec![format!("x1 {x1:.12}, |tan x1 - x1| {e:.1e}")];
    for beta in [1.5, 2.0, 3.0] {
        let t = first_conjugate_time(beta).unwrap();
        let at = min_singular_value(beta, 0.3, t);
        let half = min_singular_value(beta, 0.3, 0.5 * t);
        ok &= at < 1e-3 && half > 1e-1;
        parts.push(format!("beta {beta}: t {t:.6}, smin {at:.1e} / {half:.2} at t/2"));
    }
    outcome(ok, parts.join("; "))
}

fn algebraic_identities() -> Outcome {
    let mut s = Sampler::new(8);
    let b = SampleBox {
        beta: (-3.0, 3.0),
        t: (0.0, 10.0),
        ..SampleBox::default()
    };
    let mut worst: BTreeMap<&'static str, f64> = BTreeMap::new();
    let mut record = |k: &'static str, v: f64| {
        let e = worst.entry(k).or_insert(0.0);
        *e = e.max(v.abs());
    };
    for _ in 0..1000 {
        let p = s.params(&b);
        let c = geodesic_point(&p);
        let q = geodesic_point_product(&p);
        let scale = c.c(1, 1);
        let (beta, phi, t) = (p.beta, p.phi, p.t);
        let sc = mn_scalars(beta, t);
        let (m, n) = (sc.m, sc.n);
        let e = |i, j| c.c(i, j);
        let bt = beta * t;
        // Entries grow like c11; differences are measured relative to it.
        let rel = |v: f64| v / scale;
        let rel2 = |v: f64| v / (scale * scale);
        record("closed form vs product", rel(c.max_abs_diff(&q)));
        record("c11-1=n", rel(e(1, 1) - 1.0 - n));
        record(
            "trace",
            rel(e(2, 2) + e(3, 3) - (2.0 * beta * m * bt.sin() + (2.0 + n - 2.0 * beta * beta * n) * bt.cos())),
        );
        record(
            "antisymmetric part",
            rel(e(3, 2) - e(2, 3) - ((2.0 + n - 2.0 * beta * beta * n) * bt.sin() - 2.0 * beta * m * bt.cos())),
        );
        record(
            "diagonal difference",
            rel(e(2, 2) - e(3, 3) - n * (bt - 2.0 * phi).cos()),
        );
        record("off-diagonal sum", rel(e(2, 3) + e(3, 2) + n * (bt - 2.0 * phi).sin()));
        let s0 = e(1, 1) * e(1, 1) - 1.0;
        record("first column", rel2(s0 - e(2, 1).powi(2) - e(3, 1).powi(2)));
        record("first row", rel2(s0 - e(1, 2).powi(2) - e(1, 3).powi(2)));
        record("m,n norm", rel2(s0 - m * m - beta * beta * n * n));
        record(
            "n squared",
            rel2((e(1, 1) - 1.0).powi(2) - (e(2, 2) - e(3, 3)).powi(2) - (e(2, 3) + e(3, 2)).powi(2)),
        );
        record("lower minor", rel2(e(2, 2) * e(3, 3) - e(2, 3) * e(3, 2) - e(1, 1)));
        record(
            "lower block square",
            rel2((e(2, 2) + e(3, 3)).powi(2) + (e(3, 2) - e(2, 3)).powi(2) - (1.0 + e(1, 1)).powi(2)),
        );
    }
    let max = worst.values().copied().fold(0.0, f64::max);
    let detail: Vec<String> = worst.iter().map(|(k, v)| format!("{k} {v:.1e}")).collect();
    outcome(
        max <= 1e-9,
        format!("1000 points, |beta|<=3, t<=10, scale-relative: {}", detail.join(", ")),
    )
}

fn metric_axioms() -> Outcome {
    let mut s = Sampler::new(16);
    let b = SampleBox {
        beta: (-2.0, 2.0),
        t: (0.0, 3.0),
        omega: Some((-PI, PI)),
        ..SampleBox::default()
    };
    let (mut sym, mut conj, mut tri): (f64, f64, f64) = (0.0, 0.0, f64::INFINITY);
    let mut errors = 0;
    for _ in 0..200 {
        let g = s.sample(&b).element;
        let h = s.sample(&b).element;
        let k = s.sample(&b).element;
        let r = rotation(s.uniform(-PI, PI));
        let d = |x: &GroupElement, y: &GroupElement| distance(x, y).map(|p| p.result.d);
        match (d(&g, &h), d(&h, &g), d(&h, &k), d(&g, &k)) {
            (Ok(gh), Ok(hg), Ok(hk), Ok(gk)) => {
                sym = sym.max((gh - hg).abs());
                tri = tri.min(gh + hk - gk);
                let c = g.inverse() * h;
                match distance_from_identity(&(r * c * r.inverse())) {
                    Ok(x) => conj = conj.max((x.d - gh).abs()),
                    Err(_) => errors += 1,
                }
            }
            _ => errors += 1,
        }
    }
    outcome(
        errors == 0 && sym <= 1e-8 && conj <= 1e-8 && tri >= -1e-8,
        format!(
            "200 triples: max symmetry gap {sym:.1e}, max conjugation gap {conj:.1e}, \
             min d(g,h)+d(h,k)-d(g,k) {tri:.2e}, solver errors {errors}"
        ),
    )
}

fn main() {
    // `--list` and filters from the test harness protocol are accepted and
    // ignored beyond listing.
    if std::env::args().any(|a| a == "--list") {
        println!("acceptance: test");
        return;
    }
    let eta_check = eta_angle(&rotation(1.0));
    assert!((eta_check - 1.0).abs() < 1e-15);

    let secs = Duration::from_secs_f64;
    let results = [
        run(1, "reference point c11=7", secs(1e-3), point_check),
        run(2, "Sim distances", secs(0.1), sim_distances),
        run(3, "SO(2) distances", secs(1.0), so2_distances),
        run(4, "round trip", secs(10.0), round_trip),
        run(5, "oracle agreement", secs(120.0), oracle_agreement),
        run(6, "cut locus", secs(10.0), cut_locus),
        run(7, "conjugate condition", secs(1.0), conjugate_condition),
        run(8, "algebraic identities", secs(1.0), algebraic_identities),
        run(9, "metric axioms", secs(10.0), metric_axioms),
    ];
    let passed = results.iter().filter(|p| **p).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    if passed != results.len() {
        std::process::exit(1);
    }
}
