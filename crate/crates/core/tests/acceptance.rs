//! Acceptance suite. Each criterion prints one `criterion N: PASS|FAIL`
//! line; the process fails if any criterion fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use orbit_ricci::assembly::{
    build_exceptional_tube, design_tube, golden_configs, run_config, Config, DoubleConfig, TubeDesign,
    DEFAULT_GRID_POINTS, GRID_START,
};
use orbit_ricci::curvature::{
    nu_bound, perelman_check, quotient_quantities, ricci_g1, ricci_warped_interval, TubeParams, FIBER_POSITIVITY_FLAG,
    NU_BOUND_CONDITION,
};
use orbit_ricci::oracle::{
    chart_doubly_warped, chart_round_sphere, compare_berger, compare_doubly_warped, random_point, ricci,
    sample_doubly_warped, sectional_min, ALIGNMENT_THRESHOLD, DEFAULT_STEP,
};
use orbit_ricci::profiles::{jet_match, GridSpec, Jet2};
use orbit_ricci::{Error, Profile};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const ORACLE_TOL: f64 = 1e-4;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn sin_jet(r: f64) -> Jet2 {
    Jet2::new(r.sin(), r.cos(), -r.sin())
}

/// Largest rel_err and alignment angle over oracle comparison rows.
fn worst(rows: &[orbit_ricci::oracle::ComparisonRow]) -> (f64, f64) {
    rows.iter().fold((0.0f64, 0.0f64), |(e, a), r| (e.max(r.rel_err), a.max(r.alignment)))
}

fn criterion_1() -> Outcome {
    let mut max_err = 0.0f64;
    for (q, m) in [(1, 1), (1, 2), (3, 1)] {
        let n = if q == 1 { 2 * m + 1 } else { 4 * m + 3 } as f64;
        let grid = GridSpec::new(200, 0.05, PI - 0.05).map_err(|e| e.to_string())?;
        for r in grid.points() {
            let ric = ricci_g1(&sin_jet(r), &sin_jet(r), q, m).map_err(|e| e.to_string())?;
            for v in [ric.radial, ric.horizontal, ric.fiber] {
                max_err = max_err.max((v - n).abs());
            }
        }
    }
    let sine = Profile::sine(0.2, PI - 0.2).map_err(|e| e.to_string())?;
    let points = sample_doubly_warped(&sine, &sine, 20, 11, DEFAULT_STEP).map_err(|e| e.to_string())?;
    let rows = compare_doubly_warped(&sine, &sine, &points, DEFAULT_STEP).map_err(|e| e.to_string())?;
    let (rel, align) = worst(&rows);
    check(
        max_err <= 1e-10 && rel <= ORACLE_TOL && align <= ALIGNMENT_THRESHOLD,
        format!("closed-form |err| {max_err:.2e} over 3x200 points; oracle rel_err {rel:.2e} at 20 points"),
    )
}

fn criterion_2() -> Outcome {
    let mut worst_rel = 0.0f64;
    let mut ok = true;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for c in [0.5, 1.0, 1.5] {
        let ric = ricci_g1(&Jet2::constant(c), &Jet2::constant(1.0), 1, 1).map_err(|e| e.to_string())?;
        ok &= ric.radial == 0.0 && ric.horizontal == 4.0 - 2.0 * c * c && ric.fiber == 2.0 * c * c;
        if c == 1.0 {
            ok &= ric.horizontal == 2.0 && ric.fiber == 2.0;
        }
        let chart = orbit_ricci::oracle::chart_berger_s3(c, 1.0);
        let points: Vec<Vec<f64>> = (0..5).map(|_| random_point(&chart, &mut rng, 0.01)).collect();
        let rows = compare_berger(c, &points, DEFAULT_STEP).map_err(|e| e.to_string())?;
        // The 4-dimensional chart with constant profiles also carries the
        // flat radial direction.
        let f = Profile::constant(c, 0.0, 1.0).map_err(|e| e.to_string())?;
        let h = Profile::constant(1.0, 0.0, 1.0).map_err(|e| e.to_string())?;
        let pts = sample_doubly_warped(&f, &h, 5, 3, DEFAULT_STEP).map_err(|e| e.to_string())?;
        let rows4 = compare_doubly_warped(&f, &h, &pts, DEFAULT_STEP).map_err(|e| e.to_string())?;
        for (rel, align) in [worst(&rows), worst(&rows4)] {
            worst_rel = worst_rel.max(rel);
            ok &= rel <= ORACLE_TOL && align <= ALIGNMENT_THRESHOLD;
        }
    }
    check(ok, format!("c in {{0.5, 1, 1.5}}: closed forms exact, oracle rel_err {worst_rel:.2e}"))
}

/// The 20 random tubes shared by criteria 3 and 4.
fn random_tubes() -> Vec<(TubeParams, Result<TubeDesign, Error>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    (0..20)
        .map(|_| {
            let lambda = rng.gen_range(0.5..3.0);
            let big = rng.gen_range(0.1..0.9);
            let eps = rng.gen_range(0.2..1.0);
            let params = TubeParams::new(1, 1, eps, 0.5 * nu_bound(lambda, eps), lambda, big);
            let design = design_tube(&params);
            (params, design)
        })
        .collect()
}

fn criterion_3(tubes: &[(TubeParams, Result<TubeDesign, Error>)]) -> Outcome {
    let mut worst_rel = 0.0f64;
    let mut worst_align = 0.0f64;
    for (k, (params, design)) in tubes.iter().enumerate() {
        let d = design.as_ref().map_err(|e| format!("tube {k} {params:?}: {e}"))?;
        let points = sample_doubly_warped(&d.f, &d.h, 5, 100 + k as u64, DEFAULT_STEP).map_err(|e| e.to_string())?;
        let rows = compare_doubly_warped(&d.f, &d.h, &points, DEFAULT_STEP).map_err(|e| e.to_string())?;
        let (rel, align) = worst(&rows);
        worst_rel = worst_rel.max(rel);
        worst_align = worst_align.max(align);
    }
    check(
        worst_rel <= ORACLE_TOL && worst_align <= ALIGNMENT_THRESHOLD,
        format!("{} designed tubes x 5 points: max rel_err {worst_rel:.2e}, max angle {worst_align:.2e}", tubes.len()),
    )
}

fn criterion_4(tubes: &[(TubeParams, Result<TubeDesign, Error>)]) -> Outcome {
    let mut min_margin = f64::INFINITY;
    for (k, (_, design)) in tubes.iter().enumerate() {
        let d = design.as_ref().map_err(|e| format!("tube {k}: {e}"))?;
        if !d.report.pass {
            return Err(format!("tube {k}: design report does not pass"));
        }
        // Recomputed here from the closed forms rather than read back from
        // the report.
        let grid = GridSpec::new(DEFAULT_GRID_POINTS, GRID_START, d.radius).map_err(|e| e.to_string())?;
        for r in grid.points_with_knots(&[d.f.knots(), d.h.knots()].concat()) {
            let (fl, fr) = d.f.eval_both(r).map_err(|e| e.to_string())?;
            let (hl, hr) = d.h.eval_both(r).map_err(|e| e.to_string())?;
            for (fj, hj) in [(fl, hl), (fr, hr)] {
                let ric = ricci_g1(&fj, &hj, 1, 1).map_err(|e| e.to_string())?;
                let quo = quotient_quantities(&fj, &hj, &d.params).map_err(|e| e.to_string())?;
                for m in [ric.radial, ric.horizontal, ric.fiber, quo.rq_radial, quo.radial_a_margin] {
                    min_margin = min_margin.min(m);
                }
            }
        }
    }
    check(
        min_margin > 0.0,
        format!("{} tubes on {DEFAULT_GRID_POINTS}-point grids: min margin {min_margin:.3e}", tubes.len()),
    )
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut cases = vec![(1.0, 0.5, 0.5)];
    cases.extend((0..5).map(|_| (rng.gen_range(0.5..3.0), rng.gen_range(0.1..0.9), rng.gen_range(0.2..1.0))));
    for (lambda, big, eps) in cases {
        let bound = nu_bound(lambda, eps);
        match design_tube(&TubeParams::new(1, 1, eps, bound, lambda, big)) {
            Err(Error::InfeasibleParams { constraint, .. }) if constraint == NU_BOUND_CONDITION => {}
            other => return Err(format!("nu = bound at lambda {lambda}: expected InfeasibleParams, got {other:?}")),
        }
        let ok = design_tube(&TubeParams::new(1, 1, eps, 0.999 * bound, lambda, big)).map(|d| d.report.pass);
        if !matches!(ok, Ok(true)) {
            return Err(format!("nu = 0.999 bound at lambda {lambda}, Lambda {big}, eps {eps} did not pass"));
        }
    }
    Ok(format!("6 cases: nu = bound rejected naming `{NU_BOUND_CONDITION}`, 0.999 bound passes"))
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..100 {
        let lambda: f64 = rng.gen_range(0.2..3.0);
        let p = rng.gen_range((-1.0 / lambda + 0.05)..1.0);
        let edge = lambda * p;
        let mid = perelman_check(lambda, p, 0.5 * (-1.0 + edge)).map_err(|e| e.to_string())?;
        let at_edge = perelman_check(lambda, p, edge).map_err(|e| e.to_string())?;
        if !mid.pass || at_edge.pass {
            return Err(format!("lambda {lambda}, p {p}: midpoint {}, edge {}", mid.pass, at_edge.pass));
        }
    }
    Ok("100 random (lambda, p): midpoint passes, lambda*p fails".into())
}

fn criterion_7() -> Outcome {
    let sine = Profile::sine(0.0, PI / 2.0).map_err(|e| e.to_string())?;
    let jets = jet_match(&sine, &sine.mirror(), 3).map_err(|e| e.to_string())?;
    let exact = jets.residuals.iter().all(|&r| r == 0.0);
    let full = sine.concat(&sine.mirror()).and_then(|p| p.restricted(0.2, PI - 0.2)).map_err(|e| e.to_string())?;
    let chart = chart_doubly_warped(&full, &full, 1, 1).map_err(|e| e.to_string())?;
    let sec = sectional_min(&chart, 20, 20, 7).map_err(|e| e.to_string())?;
    let report = run_config(&Config::Double(DoubleConfig::standard())).map_err(|e| e.to_string())?;
    check(
        exact && sec >= 1.0 - 1e-3 && report.overall,
        format!("jet residuals {:?}; sampled sec min {sec:.6}", jets.residuals),
    )
}

fn criterion_8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut min_margin = f64::INFINITY;
    for _ in 0..20 {
        let n: u32 = rng.gen_range(2..=6);
        let lambda = rng.gen_range(0.5..3.0);
        let big = rng.gen_range(0.1..0.9);
        let tube = build_exceptional_tube(n, lambda, big, 0.1).map_err(|e| format!("n {n}, lambda {lambda}: {e}"))?;
        if !tube.report.pass {
            return Err(format!("n {n}, lambda {lambda}, Lambda {big}: report fails"));
        }
        let grid = GridSpec::new(DEFAULT_GRID_POINTS, GRID_START, tube.radius).map_err(|e| e.to_string())?;
        for r in grid.points_with_knots(&tube.h.knots()) {
            let (l, rj) = tube.h.eval_both(r).map_err(|e| e.to_string())?;
            for j in [l, rj] {
                let ric = ricci_warped_interval(&j, n, (n - 1) as f64).map_err(|e| e.to_string())?;
                min_margin = min_margin.min(ric.min());
            }
        }
    }
    check(min_margin > 0.0, format!("20 random exceptional tubes: min warped Ricci {min_margin:.3e}"))
}

fn criterion_9() -> Outcome {
    let mut lines = Vec::new();
    for (name, config) in golden_configs() {
        let report = run_config(&config).map_err(|e| format!("{name}: {e}"))?;
        let strict_ok =
            report.stages.iter().flat_map(|s| &s.report.entries).all(|e| e.pass && (!e.strict || e.worst_margin > 0.0));
        let allowed = |a: &String| a.starts_with("nu0") || a == FIBER_POSITIVITY_FLAG;
        let assumptions_ok = report.assumptions.iter().all(allowed);
        if !(report.overall && strict_ok && assumptions_ok && report.min_strict_margin > 0.0) {
            return Err(format!(
                "{name}: overall {}, entries ok {strict_ok}, assumptions {:?}",
                report.overall, report.assumptions
            ));
        }
        lines.push(format!("{name} (min margin {:.2e})", report.min_strict_margin));
    }
    Ok(lines.join(", "))
}

/// Largest |Ricci eigenvalue − 3| over 20 points of the polar round S⁴
/// chart, sampled `margin` inside its coordinate box.
fn s4_error(step: f64, margin: f64) -> Result<f64, String> {
    let chart = chart_round_sphere(4);
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut err = 0.0f64;
    for _ in 0..20 {
        let x = random_point(&chart, &mut rng, margin);
        let s = ricci(&chart, &x, step).map_err(|e| e.to_string())?;
        err = s.ricci_eigen.iter().fold(err, |acc, v| acc.max((v - 3.0).abs()));
    }
    Ok(err)
}

/// Enforced on the whole chart box, where truncation error dominates. Deep
/// inside the box the error is already at the roundoff floor of the nested
/// differences (about 1e-7) and halving the step gains little; that ratio
/// is printed for information only.
fn criterion_10() -> Outcome {
    let full = (s4_error(1e-4, 3e-3)?, s4_error(5e-5, 3e-3)?);
    let inner = (s4_error(1e-4, 0.5)?, s4_error(5e-5, 0.5)?);
    let ratio = full.0 / full.1;
    check(
        ratio >= 3.0,
        format!(
            "full chart {:.2e} -> {:.2e} (x{ratio:.2}); interior only {:.2e} -> {:.2e} (x{:.2}, roundoff floor)",
            full.0,
            full.1,
            inner.0,
            inner.1,
            inner.0 / inner.1
        ),
    )
}

fn main() -> ExitCode {
    // `cargo test` passes harness flags; a filter argument selects nothing
    // here, so the whole suite always runs.
    let tubes = random_tubes();
    let mut failed = false;
    let mut report = |n: usize, started: Instant, outcome: Outcome| {
        let secs = started.elapsed().as_secs_f64();
        match outcome {
            Ok(d) => println!("criterion {n}: PASS ({secs:.1}s) {d}"),
            Err(d) => {
                println!("criterion {n}: FAIL ({secs:.1}s) {d}");
                failed = true;
            }
        }
    };
    let t = Instant::now();
    report(1, t, criterion_1());
    let t = Instant::now();
    report(2, t, criterion_2());
    let t = Instant::now();
    report(3, t, criterion_3(&tubes));
    let t = Instant::now();
    report(4, t, criterion_4(&tubes));
    let t = Instant::now();
    report(5, t, criterion_5());
    let t = Instant::now();
    report(6, t, criterion_6());
    let t = Instant::now();
    report(7, t, criterion_7());
    let t = Instant::now();
    report(8, t, criterion_8());
    let t = Instant::now();
    report(9, t, criterion_9());
    let t = Instant::now();
    report(10, t, criterion_10());
    if failed {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
