//! Grid-based verification of the sign conditions that make `g₁` and its
//! quotient Ricci positive.

use serde::{Deserialize, Serialize};

use super::{nu_bound, quotient_quantities, ricci_g1, TubeParams};
use crate::error::{Error, Result};
use crate::profiles::{GridSpec, Jet2, Profile};

/// Slack allowed for non-strict inequalities.
pub const NON_STRICT_TOLERANCE: f64 = 1e-12;
/// Tolerance for the boundary-jet and plateau equalities.
pub const MATCH_TOLERANCE: f64 = 1e-10;

/// Recorded on every verdict that relies on the Ricci positivity of the
/// rescaled homogeneous fibre, which is assumed rather than computed.
pub const FIBER_POSITIVITY_FLAG: &str =
    "fiber_positivity: Ric > 0 for the normal homogeneous fibre rescaled by 1+eps along H-orbits (assumed for eps < eps0)";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionEntry {
    pub name: String,
    pub pass: bool,
    /// Strict conditions need `worst_margin > strictness`, non-strict ones
    /// `worst_margin ≥ −1e-12`.
    pub strict: bool,
    pub worst_margin: f64,
    pub witness_r: Option<f64>,
}

impl ConditionEntry {
    pub fn new(name: impl Into<String>, strict: bool, margin: f64, witness_r: Option<f64>) -> Self {
        Self::with_strictness(name, strict, margin, witness_r, 0.0)
    }

    pub fn with_strictness(
        name: impl Into<String>,
        strict: bool,
        margin: f64,
        witness_r: Option<f64>,
        strictness: f64,
    ) -> Self {
        let pass = if strict { margin > strictness } else { margin >= -NON_STRICT_TOLERANCE };
        ConditionEntry { name: name.into(), pass, strict, worst_margin: margin, witness_r }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub pass: bool,
    pub entries: Vec<ConditionEntry>,
    pub conditional_flags: Vec<String>,
}

impl ConditionReport {
    pub fn new() -> Self {
        ConditionReport { pass: true, entries: Vec::new(), conditional_flags: Vec::new() }
    }

    pub fn push(&mut self, entry: ConditionEntry) {
        self.pass &= entry.pass;
        self.entries.push(entry);
    }

    pub fn extend(&mut self, other: ConditionReport) {
        for e in other.entries {
            self.push(e);
        }
        for flag in other.conditional_flags {
            self.flag(flag);
        }
    }

    pub fn flag(&mut self, flag: impl Into<String>) {
        let flag = flag.into();
        if !self.conditional_flags.contains(&flag) {
            self.conditional_flags.push(flag);
        }
    }

    pub fn entry(&self, name: &str) -> Option<&ConditionEntry> {
        self.entries.iter().find(|e| e.name == name)
    }

    pub fn failures(&self) -> impl Iterator<Item = &ConditionEntry> {
        self.entries.iter().filter(|e| !e.pass)
    }

    /// Smallest margin among strict entries.
    pub fn min_strict_margin(&self) -> f64 {
        self.entries.iter().filter(|e| e.strict).map(|e| e.worst_margin).fold(f64::INFINITY, f64::min)
    }
}

/// Running minimum of a margin over sample points.
#[derive(Clone, Debug)]
pub struct MarginScan {
    name: &'static str,
    strict: bool,
    worst: f64,
    witness: Option<f64>,
}

impl MarginScan {
    pub fn new(name: &'static str, strict: bool) -> Self {
        MarginScan { name, strict, worst: f64::INFINITY, witness: None }
    }

    pub fn observe(&mut self, r: f64, margin: f64) {
        if self.worst.is_nan() {
            return;
        }
        if margin.is_nan() || margin < self.worst {
            self.worst = margin;
            self.witness = Some(r);
        }
    }

    pub fn finish(self, strictness: f64) -> ConditionEntry {
        ConditionEntry::with_strictness(self.name, self.strict, self.worst, self.witness, strictness)
    }
}

/// Evaluation points: grid plus knots of both profiles, each paired with
/// the one-sided jets of `f` and `h` taken from the same side.
fn sample_jets(f: &Profile, h: &Profile, grid: &GridSpec) -> Result<Vec<(f64, Jet2, Jet2)>> {
    if grid.lo <= 0.0 {
        return Err(Error::InvalidParam(format!("grid must start above 0, got {}", grid.lo)));
    }
    for p in [f, h] {
        if grid.lo < p.lo() || grid.hi > p.hi() {
            return Err(Error::InvalidParam(format!(
                "grid [{}, {}] leaves profile domain [{}, {}]",
                grid.lo,
                grid.hi,
                p.lo(),
                p.hi()
            )));
        }
    }
    let knots: Vec<f64> = f.knots().into_iter().chain(h.knots()).collect();
    let mut out = Vec::new();
    for r in grid.points_with_knots(&knots) {
        let (fl, fr) = f.eval_both(r)?;
        let (hl, hr) = h.eval_both(r)?;
        out.push((r, fr, hr));
        if fl != fr || hl != hr {
            out.push((r, fl, hl));
        }
    }
    Ok(out)
}

/// Checks the sufficient conditions on `(f, h)` for `g₁(f, h)` to be Ricci
/// positive: sine cap at the origin, concavity and monotonicity, `f ≤ h`,
/// `f'/f ≤ h'/h` and `(f/h)³ ≥ f'h'`.
pub fn check_profile_conditions(f: &Profile, h: &Profile, grid: &GridSpec) -> Result<ConditionReport> {
    check_profile_conditions_with_strictness(f, h, grid, 0.0)
}

pub fn check_profile_conditions_with_strictness(
    f: &Profile,
    h: &Profile,
    grid: &GridSpec,
    strictness: f64,
) -> Result<ConditionReport> {
    let mut report = ConditionReport::new();
    let cap = match (f.starts_with_unit_sine(), h.starts_with_unit_sine()) {
        (Some(a), Some(b)) => a.min(b),
        _ => -1.0,
    };
    report.push(ConditionEntry::with_strictness("sine_cap", true, cap, Some(0.0), strictness));

    let mut scans = [
        MarginScan::new("f_concave", false),
        MarginScan::new("h_concave", false),
        MarginScan::new("sum_strictly_concave", true),
        MarginScan::new("f_nondecreasing", false),
        MarginScan::new("h_nondecreasing", false),
        MarginScan::new("f_below_h", false),
        MarginScan::new("log_slope_order", false),
        MarginScan::new("cubic_ratio_bound", false),
    ];
    for (r, fj, hj) in sample_jets(f, h, grid)? {
        let margins = [
            -fj.d2,
            -hj.d2,
            -(fj.d2 + hj.d2),
            fj.d1,
            hj.d1,
            hj.value - fj.value,
            hj.d1 / hj.value - fj.d1 / fj.value,
            (fj.value / hj.value).powi(3) - fj.d1 * hj.d1,
        ];
        for (scan, m) in scans.iter_mut().zip(margins) {
            scan.observe(r, m);
        }
    }
    for scan in scans {
        report.push(scan.finish(strictness));
    }
    Ok(report)
}

/// Full verification of a designed tube: the profile conditions, strict
/// positivity of every closed-form Ricci component of `g₁` and of the
/// quotient's radial Ricci curvature, the radial A-tensor dominance, the
/// boundary jet and fibre plateau, and the bound on `ν`.
pub fn verify_tube(f: &Profile, h: &Profile, params: &TubeParams, grid: &GridSpec) -> Result<ConditionReport> {
    verify_tube_with_strictness(f, h, params, grid, 0.0)
}

pub fn verify_tube_with_strictness(
    f: &Profile,
    h: &Profile,
    params: &TubeParams,
    grid: &GridSpec,
    strictness: f64,
) -> Result<ConditionReport> {
    params.validate()?;
    let iota = params.iota.ok_or_else(|| Error::InvalidParam("verification needs iota (plateau width)".into()))?;
    let mut report = check_profile_conditions_with_strictness(f, h, grid, strictness)?;

    let mut scans = [
        MarginScan::new("ricci_radial_positive", true),
        MarginScan::new("ricci_horizontal_positive", true),
        MarginScan::new("ricci_fiber_positive", true),
        MarginScan::new("quotient_radial_positive", true),
        MarginScan::new("radial_a_tensor_dominance", true),
        MarginScan::new("mean_curvature_derivative_signs", false),
    ];
    for (r, fj, hj) in sample_jets(f, h, grid)? {
        let ric = ricci_g1(&fj, &hj, params.q, params.m)?;
        let quo = quotient_quantities(&fj, &hj, params)?;
        let n = &quo.nabla_n;
        let sign = -(quo.phi.max(n.x).max(n.fiber).max(n.delta));
        let margins = [ric.radial, ric.horizontal, ric.fiber, quo.rq_radial, quo.radial_a_margin, sign];
        for (scan, m) in scans.iter_mut().zip(margins) {
            scan.observe(r, m);
        }
    }
    for scan in scans {
        report.push(scan.finish(strictness));
    }

    let radius = h.hi();
    let target = params.fiber_target();
    let band_lo = radius - iota;
    let mut plateau = MarginScan::new("fiber_plateau", false);
    if band_lo < f.lo() {
        plateau.observe(band_lo, f64::NEG_INFINITY);
    } else {
        let band = GridSpec::new(grid.points.max(2), band_lo, radius)?;
        for r in band.points_with_knots(&f.knots()) {
            for j in [f.eval_left(r)?, f.eval(r)?] {
                plateau.observe(r, MATCH_TOLERANCE - (j.value - target).abs().max(j.d1.abs()));
            }
        }
    }
    report.push(plateau.finish(strictness));

    let end = h.eval(radius)?;
    report.push(ConditionEntry::new(
        "boundary_value",
        false,
        MATCH_TOLERANCE - (end.value - params.lambda).abs(),
        Some(radius),
    ));
    report.push(ConditionEntry::new(
        "boundary_slope",
        false,
        MATCH_TOLERANCE - (end.d1 - params.lambda_slope).abs(),
        Some(radius),
    ));
    report.push(ConditionEntry::with_strictness(
        NU_BOUND_CONDITION,
        true,
        nu_bound(params.lambda, params.eps) - params.nu,
        None,
        strictness,
    ));
    if let Some(eps0) = params.eps0 {
        report.push(ConditionEntry::with_strictness("eps < eps0", true, eps0 - params.eps, None, strictness));
    }
    report.flag(FIBER_POSITIVITY_FLAG);
    Ok(report)
}

/// Name of the strict bound on `ν`, shared by reports and errors.
pub const NU_BOUND_CONDITION: &str = "nu < lambda*eps/(1+eps)";

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn equal_sine_profiles_pass() {
        let s = Profile::sine(0.0, PI / 3.0).unwrap();
        let grid = GridSpec::new(500, 1e-3, PI / 3.0).unwrap();
        let rep = check_profile_conditions(&s, &s, &grid).unwrap();
        assert!(rep.pass, "{:?}", rep.failures().collect::<Vec<_>>());
        let cubic = rep.entry("cubic_ratio_bound").unwrap();
        // (f/h)³ − f'h' = 1 − cos² r, smallest at the grid start.
        assert!((cubic.worst_margin - (1e-3f64).sin().powi(2)).abs() < 1e-12);
    }

    #[test]
    fn long_sine_fails_monotonicity() {
        let s = Profile::sine(0.0, 2.0).unwrap();
        let grid = GridSpec::new(500, 1e-3, 2.0).unwrap();
        let rep = check_profile_conditions(&s, &s, &grid).unwrap();
        assert!(!rep.pass);
        let e = rep.entry("f_nondecreasing").unwrap();
        assert!(!e.pass);
        assert!(e.witness_r.unwrap() > PI / 2.0);
    }

    #[test]
    fn missing_sine_cap_fails() {
        let c = Profile::constant(0.5, 0.0, 1.0).unwrap();
        let s = Profile::sine(0.0, 1.0).unwrap();
        let grid = GridSpec::new(100, 1e-3, 1.0).unwrap();
        let rep = check_profile_conditions(&c, &s, &grid).unwrap();
        assert!(!rep.entry("sine_cap").unwrap().pass);
    }

    #[test]
    fn grid_must_avoid_cone_point() {
        let s = Profile::sine(0.0, 1.0).unwrap();
        let grid = GridSpec::new(100, 0.0, 1.0).unwrap();
        assert!(check_profile_conditions(&s, &s, &grid).is_err());
    }

    #[test]
    fn margin_scan_keeps_nan() {
        let mut scan = MarginScan::new("x", true);
        scan.observe(0.1, 1.0);
        scan.observe(0.2, f64::NAN);
        scan.observe(0.3, -5.0);
        let e = scan.finish(0.0);
        assert!(!e.pass);
        assert_eq!(e.witness_r, Some(0.2));
    }
}
