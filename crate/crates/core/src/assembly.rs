//! Gluing bases, collars and tubes into a feasibility report.
//!
//! An assembly starts from a base orbit space `B` with one or more boundary
//! components. Each boundary gets a concave collar `ds² + θ²(s)·g` that bends
//! its second fundamental form, then a tube (a singular disc bundle or an
//! exceptional quotient disc) is designed to match the collar's far end.
//! Every stage is recorded as a [`StageReport`]; the overall verdict passes
//! only if every stage does.

use std::f64::consts::{FRAC_PI_2, PI};
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curvature::{
    einstein_constant, nu_bound, perelman_check, ricci_g1, ricci_warped_interval, verify_tube, ConditionEntry,
    ConditionReport, MarginScan, TubeParams, MATCH_TOLERANCE, NU_BOUND_CONDITION,
};
use crate::error::{Error, Result};
use crate::oracle;
use crate::profiles::{
    bisect_increasing, build_collar, build_f, build_h, default_delta, jet_match, jet_match_with_tolerance, GridSpec,
    MatchReport, Profile, JET_MATCH_TOLERANCE,
};

pub const DEFAULT_GRID_POINTS: usize = 2048;
/// Grids never start closer than this to a cone point.
pub const GRID_START: f64 = 1e-3;
/// Smoothing-window halvings tried by [`design_tube`].
pub const MAX_RETRIES: usize = 8;
/// `ν_auto = NU_AUTO_FACTOR · min(ν bounds)`.
pub const NU_AUTO_FACTOR: f64 = 0.9;
/// `ν` used when no tube bounds it and no `nu0` is given.
pub const NU_FALLBACK: f64 = 0.1;
/// Default collar length as a fraction of the boundary scale.
pub const DEFAULT_COLLAR_FRACTION: f64 = 0.1;

pub const NU0_ASSUMPTION: &str =
    "nu0: nu lies below the horizontal shrinking constant of the complement of the tubes (asserted, not computed)";
pub const EXCEPTIONAL_FIBER_ASSUMPTION: &str =
    "exceptional_fiber: nu*g0 has Ric > 0 on the homogeneous factor of an exceptional tube";
pub const ABSTRACT_BASE_ASSUMPTION: &str = "abstract_base: Ric > 0 on the base is asserted by the configuration";
pub const SUBMERSION_SEC_RESULT: &str =
    "O'Neill: Riemannian submersions do not decrease sectional curvature, so sec >= 0 passes to the quotient";

/// Fibre of a base boundary component, with its standard metric.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum FiberKind {
    /// `CP^m` with the Fubini–Study metric.
    Cp { m: u32 },
    /// `HP^m` with the Fubini–Study metric.
    Hp { m: u32 },
    /// `CP^m / Z₂` for odd `m`, locally isometric to `CP^m`.
    CpOddModZ2 { m: u32 },
    /// A round unit sphere `S^n` modulo a finite group.
    SphereQuotient { n: u32, group: String },
}

impl FiberKind {
    fn validate(&self) -> Result<()> {
        match self {
            FiberKind::Cp { m } | FiberKind::Hp { m } if *m >= 1 => Ok(()),
            FiberKind::CpOddModZ2 { m } if m % 2 == 1 => Ok(()),
            FiberKind::SphereQuotient { n, .. } if *n >= 2 => Ok(()),
            other => Err(Error::Config(format!("invalid fibre {other:?}"))),
        }
    }

    pub fn dim(&self) -> u32 {
        match self {
            FiberKind::Cp { m } | FiberKind::CpOddModZ2 { m } => 2 * m,
            FiberKind::Hp { m } => 4 * m,
            FiberKind::SphereQuotient { n, .. } => *n,
        }
    }

    /// Einstein constant of the standard metric.
    pub fn ricci(&self) -> f64 {
        match self {
            FiberKind::Cp { m } | FiberKind::CpOddModZ2 { m } => einstein_constant(1, *m).expect("q = 1"),
            FiberKind::Hp { m } => einstein_constant(3, *m).expect("q = 3"),
            FiberKind::SphereQuotient { n, .. } => (*n - 1) as f64,
        }
    }
}

/// One boundary component of the base: its metric is `λ²` times the
/// standard metric of `fiber_kind`, and `p_inf` is the smallest principal
/// curvature with respect to the outward normal.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryData {
    pub label: String,
    pub lambda: f64,
    pub p_inf: f64,
    pub fiber_kind: FiberKind,
}

impl BoundaryData {
    /// `p_inf + 1/λ`, positive iff a Ricci-positive collar can start here.
    pub fn condition_margin(&self) -> f64 {
        self.p_inf + 1.0 / self.lambda
    }
}

/// The base orbit space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum BaseSpec {
    /// `dr² + ψ²(r)·g_F` on `[a, b] × F`; boundaries `left` and `right`.
    Shell { psi: Profile, fiber_dim: u32, fiber_ricci: f64, fiber_kind: FiberKind },
    /// `dr² + ψ²(r)·g_F` with a cone point at `a` closed up smoothly
    /// (`ψ(a) = 0`, `ψ'(a) = 1`); one boundary `boundary` at `b`.
    Cap { psi: Profile, fiber_dim: u32, fiber_ricci: f64, fiber_kind: FiberKind },
    /// Boundary data supplied directly; positivity of the base is asserted.
    Abstract { boundaries: Vec<BoundaryData>, ric_positive_assertion: bool },
}

impl BaseSpec {
    pub fn boundaries(&self) -> Result<Vec<BoundaryData>> {
        match self {
            BaseSpec::Shell { psi, fiber_dim, fiber_ricci, fiber_kind } => {
                check_warped_fiber(*fiber_dim, *fiber_ricci, fiber_kind)?;
                let scale = (fiber_kind.ricci() / fiber_ricci).sqrt();
                let (a, b) = (psi.eval(psi.lo())?, psi.eval_left(psi.hi())?);
                if !(a.value > 0.0 && b.value > 0.0) {
                    return Err(Error::Config("shell profile must be positive at both ends".into()));
                }
                Ok(vec![
                    BoundaryData {
                        label: "left".into(),
                        lambda: a.value * scale,
                        p_inf: -a.d1 / a.value,
                        fiber_kind: fiber_kind.clone(),
                    },
                    BoundaryData {
                        label: "right".into(),
                        lambda: b.value * scale,
                        p_inf: b.d1 / b.value,
                        fiber_kind: fiber_kind.clone(),
                    },
                ])
            }
            BaseSpec::Cap { psi, fiber_dim, fiber_ricci, fiber_kind } => {
                check_warped_fiber(*fiber_dim, *fiber_ricci, fiber_kind)?;
                let scale = (fiber_kind.ricci() / fiber_ricci).sqrt();
                let b = psi.eval_left(psi.hi())?;
                if !(b.value > 0.0) {
                    return Err(Error::Config("cap profile must be positive at its boundary".into()));
                }
                Ok(vec![BoundaryData {
                    label: "boundary".into(),
                    lambda: b.value * scale,
                    p_inf: b.d1 / b.value,
                    fiber_kind: fiber_kind.clone(),
                }])
            }
            BaseSpec::Abstract { boundaries, .. } => {
                for b in boundaries {
                    b.fiber_kind.validate()?;
                    if !(b.lambda > 0.0 && b.p_inf.is_finite()) {
                        return Err(Error::Config(format!("boundary {}: need lambda > 0 and finite p_inf", b.label)));
                    }
                }
                Ok(boundaries.clone())
            }
        }
    }

    /// Strict Ricci positivity of the base on a grid.
    pub fn positivity(&self, grid_points: usize) -> Result<(ConditionReport, Vec<String>)> {
        let mut report = ConditionReport::new();
        let mut assumptions = Vec::new();
        match self {
            BaseSpec::Shell { psi, fiber_dim, fiber_ricci, .. } => {
                report.extend(warped_positivity(psi, *fiber_dim, *fiber_ricci, grid_points, BASE_NAMES)?);
            }
            BaseSpec::Cap { psi, fiber_dim, fiber_ricci, .. } => {
                let a = psi.derivs(psi.lo())?;
                let defect = a[0].abs().max((a[1] - 1.0).abs()).max(a[2].abs());
                report.push(ConditionEntry::new("cap_cone_point", false, MATCH_TOLERANCE - defect, Some(psi.lo())));
                report.extend(warped_positivity(psi, *fiber_dim, *fiber_ricci, grid_points, BASE_NAMES)?);
            }
            BaseSpec::Abstract { ric_positive_assertion, .. } => {
                let margin = if *ric_positive_assertion { 1.0 } else { -1.0 };
                report.push(ConditionEntry::new("abstract_base_asserted", true, margin, None));
                assumptions.push(ABSTRACT_BASE_ASSUMPTION.to_string());
            }
        }
        Ok((report, assumptions))
    }
}

fn check_warped_fiber(d: u32, rho_f: f64, kind: &FiberKind) -> Result<()> {
    kind.validate()?;
    if !(rho_f > 0.0) {
        return Err(Error::Config(format!("fiber_ricci must be > 0, got {rho_f}")));
    }
    if d != kind.dim() {
        return Err(Error::Config(format!("fiber_dim {d} does not match {kind:?} (dimension {})", kind.dim())));
    }
    Ok(())
}

const BASE_NAMES: (&str, &str) = ("base_ricci_radial_positive", "base_ricci_fiber_positive");
const COLLAR_NAMES: (&str, &str) = ("collar_ricci_radial_positive", "collar_ricci_fiber_positive");
const EXCEPTIONAL_NAMES: (&str, &str) = ("disc_ricci_radial_positive", "disc_ricci_fiber_positive");

/// Grid on the domain of `psi`, kept [`GRID_START`] away from zeros of `psi`
/// at either end.
fn profile_grid(psi: &Profile, points: usize) -> Result<GridSpec> {
    let (mut lo, mut hi) = psi.domain();
    if psi.eval(lo)?.value <= 0.0 {
        lo += GRID_START;
    }
    if psi.eval_left(hi)?.value <= 0.0 {
        hi -= GRID_START;
    }
    GridSpec::new(points, lo, hi)
}

/// Strict positivity of both Ricci components of `dr² + ψ²·g_F`.
fn warped_positivity(
    psi: &Profile,
    d: u32,
    rho_f: f64,
    points: usize,
    names: (&'static str, &'static str),
) -> Result<ConditionReport> {
    let grid = profile_grid(psi, points)?;
    let mut radial = MarginScan::new(names.0, true);
    let mut fiber = MarginScan::new(names.1, true);
    for r in grid.points_with_knots(&psi.knots()) {
        let (left, right) = psi.eval_both(r)?;
        for j in [left, right] {
            let ric = ricci_warped_interval(&j, d, rho_f)?;
            radial.observe(r, ric.radial);
            fiber.observe(r, ric.fiber);
        }
    }
    let mut report = ConditionReport::new();
    report.push(radial.finish(0.0));
    report.push(fiber.finish(0.0));
    Ok(report)
}

/// Folds `other` into `base`, keeping the worse margin for entries with the
/// same name.
fn merge_worst(base: &mut ConditionReport, other: ConditionReport) {
    for e in other.entries {
        match base.entries.iter_mut().find(|b| b.name == e.name) {
            Some(b) if e.worst_margin.is_nan() || e.worst_margin < b.worst_margin => *b = e,
            Some(_) => {}
            None => base.entries.push(e),
        }
    }
    for flag in other.conditional_flags {
        base.flag(flag);
    }
    base.pass = base.entries.iter().all(|e| e.pass);
}

// ---------------------------------------------------------------- tubes

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DesignOptions {
    pub grid_points: usize,
    /// Initial width of the `f` bridge; chosen from the geometry when absent.
    pub smoothing_window: Option<f64>,
}

impl Default for DesignOptions {
    fn default() -> Self {
        DesignOptions { grid_points: DEFAULT_GRID_POINTS, smoothing_window: None }
    }
}

/// A designed singular tube together with its verification.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TubeDesign {
    /// Input parameters with `iota` resolved.
    pub params: TubeParams,
    pub f: Profile,
    pub h: Profile,
    pub radius: f64,
    /// Length of the sine cap of `h`.
    pub delta: f64,
    /// Where `h` reaches the fibre plateau value.
    pub delta_f: f64,
    pub smoothing_window: f64,
    pub attempts: usize,
    pub report: ConditionReport,
}

pub fn design_tube(params: &TubeParams) -> Result<TubeDesign> {
    design_tube_with(params, &DesignOptions::default())
}

/// Builds `(f, h)` for a singular tube and verifies them.
///
/// `h` comes from [`build_h`]; `f` follows `h` up to the point `δ_f` where
/// `h = (1+ε)ν/ε`, then bends onto that plateau through a quintic bridge.
/// Verification runs on the full grid and again on a dense grid across the
/// bridge. A failed bridge or verification halves the window, up to
/// [`MAX_RETRIES`] times.
pub fn design_tube_with(params: &TubeParams, opts: &DesignOptions) -> Result<TubeDesign> {
    params.validate()?;
    let bound = nu_bound(params.lambda, params.eps);
    if !(params.nu < bound) {
        return Err(Error::InfeasibleParams {
            constraint: NU_BOUND_CONDITION.into(),
            detail: format!("nu = {} but lambda*eps/(1+eps) = {bound}", params.nu),
        });
    }
    let delta = default_delta(params.lambda, params.lambda_slope);
    let built = build_h(params.lambda, params.lambda_slope, delta)?;
    let (h, radius) = (built.profile, built.radius);
    let target = params.fiber_target();
    let delta_f = bisect_increasing(|r| h.eval(r).map(|j| j.value), h.lo(), radius, target)?;
    let gap = radius - delta_f;
    let iota = params.iota.unwrap_or_else(|| (0.05 * radius).min(0.25 * gap));
    let mut resolved = params.clone();
    resolved.iota = Some(iota);
    let mut window = opts.smoothing_window.unwrap_or_else(|| (0.01 * radius).min(gap - iota).min(delta_f));
    if !(window > 0.0) {
        return Err(Error::DesignFailure(format!("no room for the f bridge (iota = {iota}, R - delta_f = {gap})")));
    }

    let mut last_problem = String::new();
    for attempt in 0..=MAX_RETRIES {
        match build_f(&h, target, iota, window) {
            Ok(f) => {
                let report = verify_designed(&f, &h, &resolved, opts.grid_points, delta_f, window)?;
                if report.pass {
                    return Ok(TubeDesign {
                        params: resolved,
                        f,
                        h,
                        radius,
                        delta,
                        delta_f,
                        smoothing_window: window,
                        attempts: attempt + 1,
                        report,
                    });
                }
                let failed: Vec<&str> = report.failures().map(|e| e.name.as_str()).collect();
                last_problem = format!("verification failed: {}", failed.join(", "));
            }
            Err(Error::DesignFailure(msg)) => last_problem = msg,
            Err(e) => return Err(e),
        }
        window *= 0.5;
    }
    Err(Error::DesignFailure(format!(
        "tube (q={}, m={}, lambda={}, Lambda={}, nu={}) not found after {} windows: {last_problem}",
        params.q,
        params.m,
        params.lambda,
        params.lambda_slope,
        params.nu,
        MAX_RETRIES + 1
    )))
}

fn verify_designed(
    f: &Profile,
    h: &Profile,
    params: &TubeParams,
    points: usize,
    delta_f: f64,
    window: f64,
) -> Result<ConditionReport> {
    let radius = h.hi();
    let mut report = verify_tube(f, h, params, &GridSpec::new(points, GRID_START.max(h.lo()), radius)?)?;
    let bridge = GridSpec::new(points, delta_f - 0.5 * window, (delta_f + 0.5 * window).min(radius))?;
    merge_worst(&mut report, verify_tube(f, h, params, &bridge)?);
    Ok(report)
}

/// An exceptional tube `dr² + h²(r)·ds²_n + ν·g₀` and its checks.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExceptionalTube {
    pub n: u32,
    pub nu: f64,
    pub h: Profile,
    pub radius: f64,
    pub report: ConditionReport,
}

/// Builds `h` for an exceptional tube and checks that the disc factor
/// `dr² + h²·ds²_n` is Ricci positive. The homogeneous factor `ν·g₀` is
/// Ricci positive by hypothesis and recorded as a conditional flag.
pub fn build_exceptional_tube(n: u32, lambda: f64, big_lambda: f64, nu: f64) -> Result<ExceptionalTube> {
    build_exceptional_tube_with(n, lambda, big_lambda, nu, DEFAULT_GRID_POINTS)
}

pub fn build_exceptional_tube_with(
    n: u32,
    lambda: f64,
    big_lambda: f64,
    nu: f64,
    grid_points: usize,
) -> Result<ExceptionalTube> {
    if n < 2 {
        return Err(Error::InvalidParam(format!("n must be >= 2, got {n}")));
    }
    if !(big_lambda > 0.0 && big_lambda < 1.0) {
        return Err(Error::InvalidParam(format!("Lambda must lie in (0, 1), got {big_lambda}")));
    }
    if !(nu > 0.0) {
        return Err(Error::InvalidParam(format!("nu must be > 0, got {nu}")));
    }
    let built = build_h(lambda, big_lambda, default_delta(lambda, big_lambda))?;
    let mut report = warped_positivity(&built.profile, n, (n - 1) as f64, grid_points, EXCEPTIONAL_NAMES)?;
    let end = built.profile.eval(built.radius)?;
    report.push(ConditionEntry::new(
        "boundary_value",
        false,
        MATCH_TOLERANCE - (end.value - lambda).abs(),
        Some(built.radius),
    ));
    report.push(ConditionEntry::new(
        "boundary_slope",
        false,
        MATCH_TOLERANCE - (end.d1 - big_lambda).abs(),
        Some(built.radius),
    ));
    report.flag(EXCEPTIONAL_FIBER_ASSUMPTION);
    Ok(ExceptionalTube { n, nu, radius: built.radius, h: built.profile, report })
}

// ------------------------------------------------------------ assembly

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum TubeKind {
    Singular { q: u32, m: u32 },
    Exceptional { n: u32, group: String },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TubeSpec {
    pub boundary: String,
    pub tube: TubeKind,
    /// Collar length; `collar_fraction · λ` when absent.
    #[serde(default)]
    pub collar_length: Option<f64>,
}

impl TubeSpec {
    /// Checks that the tube's boundary fibre is the boundary fibre of the
    /// base, returning a label for quotient tubes.
    fn matches(&self, kind: &FiberKind) -> Result<Option<String>> {
        match (&self.tube, kind) {
            (TubeKind::Singular { q: 1, m }, FiberKind::Cp { m: k }) if m == k => Ok(None),
            (TubeKind::Singular { q: 3, m }, FiberKind::Hp { m: k }) if m == k => Ok(None),
            (TubeKind::Singular { q: 1, m }, FiberKind::CpOddModZ2 { m: k }) if m == k => {
                Ok(Some(format!("N_SU(2)U(1) quotient over CP^{m}/Z2")))
            }
            (TubeKind::Exceptional { n, group }, FiberKind::SphereQuotient { n: k, group: g })
                if n == k && group == g =>
            {
                Ok(Some(format!("S^{n}/{group}")))
            }
            (tube, fiber) => {
                Err(Error::Config(format!("boundary {}: tube {tube:?} does not bound fibre {fiber:?}", self.boundary)))
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NuKeyword {
    Auto,
}

/// `"auto"` or an explicit value.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NuSpec {
    Value(f64),
    Keyword(NuKeyword),
}

impl Default for NuSpec {
    fn default() -> Self {
        NuSpec::Keyword(NuKeyword::Auto)
    }
}

fn default_collar_fraction() -> f64 {
    DEFAULT_COLLAR_FRACTION
}

fn default_grid_points() -> usize {
    DEFAULT_GRID_POINTS
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AssemblyConfig {
    pub base: BaseSpec,
    pub tubes: Vec<TubeSpec>,
    pub eps: f64,
    #[serde(default)]
    pub nu: NuSpec,
    #[serde(default)]
    pub nu0: Option<f64>,
    #[serde(default)]
    pub eps0: Option<f64>,
    #[serde(default = "default_collar_fraction")]
    pub collar_fraction: f64,
    #[serde(default)]
    pub smoothing_window: Option<f64>,
    #[serde(default = "default_grid_points")]
    pub grid_points: usize,
}

fn default_samples() -> usize {
    20
}

fn default_seed() -> u64 {
    1
}

/// A double `D ∪ D` of the sine cap.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DoubleConfig {
    pub f: Profile,
    pub h: Profile,
    #[serde(default = "default_samples")]
    pub points: usize,
    #[serde(default = "default_samples")]
    pub planes: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

impl DoubleConfig {
    pub fn standard() -> Self {
        let sin = Profile::sine(0.0, FRAC_PI_2).expect("sine cap");
        DoubleConfig { f: sin.clone(), h: sin, points: default_samples(), planes: default_samples(), seed: 1 }
    }
}

/// Any configuration accepted by `assemble`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Config {
    Gluing(AssemblyConfig),
    Double(DoubleConfig),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageReport {
    pub stage: String,
    pub boundary: Option<String>,
    pub report: ConditionReport,
    pub notes: Vec<String>,
}

impl StageReport {
    fn new(stage: &str, boundary: Option<&str>, report: ConditionReport) -> Self {
        StageReport { stage: stage.into(), boundary: boundary.map(String::from), report, notes: Vec::new() }
    }

    fn failed(stage: &str, boundary: Option<&str>, entry: &str, note: String) -> Self {
        let mut report = ConditionReport::new();
        report.push(ConditionEntry::new(entry, true, 0.0, None));
        StageReport { stage: stage.into(), boundary: boundary.map(String::from), report, notes: vec![note] }
    }
}

/// Second-order mismatch at a collar–tube junction and the window in which
/// it would be smoothed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmoothingPlan {
    pub window: f64,
    pub d2_jump: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TubeOutcome {
    pub boundary: String,
    pub kind: TubeKind,
    pub quotient_label: Option<String>,
    pub collar: Profile,
    pub collar_slopes: (f64, f64),
    /// `θ` and `|θ'|` at the far end of the collar.
    pub tube_lambda: f64,
    pub tube_slope: f64,
    pub params: Option<TubeParams>,
    pub h: Option<Profile>,
    pub f: Option<Profile>,
    pub junction: Option<MatchReport>,
    pub smoothing: Option<SmoothingPlan>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DoubleOutcome {
    pub jet: MatchReport,
    pub sectional_min: f64,
    pub points: usize,
    pub planes: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub config: Config,
    pub overall: bool,
    pub nu: Option<f64>,
    pub boundaries: Vec<BoundaryData>,
    pub stages: Vec<StageReport>,
    pub tubes: Vec<TubeOutcome>,
    pub double: Option<DoubleOutcome>,
    /// Inputs the verdict depends on but cannot check.
    pub assumptions: Vec<String>,
    /// Published results the verdict relies on.
    pub cited_results: Vec<String>,
    pub min_strict_margin: f64,
}

impl FeasibilityReport {
    #[allow(clippy::too_many_arguments)]
    fn finish(
        config: Config,
        nu: Option<f64>,
        boundaries: Vec<BoundaryData>,
        stages: Vec<StageReport>,
        tubes: Vec<TubeOutcome>,
        double: Option<DoubleOutcome>,
        mut assumptions: Vec<String>,
        cited_results: Vec<String>,
    ) -> Self {
        for s in &stages {
            for flag in &s.report.conditional_flags {
                if !assumptions.contains(flag) {
                    assumptions.push(flag.clone());
                }
            }
        }
        let overall = !stages.is_empty() && stages.iter().all(|s| s.report.pass);
        let min_strict_margin = stages.iter().map(|s| s.report.min_strict_margin()).fold(f64::INFINITY, f64::min);
        FeasibilityReport {
            config,
            overall,
            nu,
            boundaries,
            stages,
            tubes,
            double,
            assumptions,
            cited_results,
            min_strict_margin,
        }
    }

    pub fn stage(&self, stage: &str, boundary: Option<&str>) -> Option<&StageReport> {
        self.stages.iter().find(|s| s.stage == stage && s.boundary.as_deref() == boundary)
    }

    pub fn failed_stages(&self) -> impl Iterator<Item = &StageReport> {
        self.stages.iter().filter(|s| !s.report.pass)
    }
}

pub fn run_config(config: &Config) -> Result<FeasibilityReport> {
    match config {
        Config::Gluing(c) => assemble(c),
        Config::Double(d) => assemble_double(d),
    }
}

/// Collar data for one boundary, or why there is none.
struct Collar {
    theta: Profile,
    slopes: (f64, f64),
    end_value: f64,
    end_slope: f64,
}

fn midpoint(a: f64, b: f64) -> f64 {
    0.5 * (a + b)
}

fn prepare_collar(b: &BoundaryData, length: f64, grid_points: usize) -> (Vec<StageReport>, Option<Collar>) {
    let label = Some(b.label.as_str());
    let slope0 = midpoint(-1.0, (b.lambda * b.p_inf).min(0.0));
    let slope1 = midpoint(-1.0, slope0);
    let mut stages = Vec::new();

    let mut perelman = ConditionReport::new();
    perelman.push(ConditionEntry::new("p_inf > -1/lambda", true, b.condition_margin(), None));
    let mut notes = Vec::new();
    match perelman_check(b.lambda, b.p_inf, slope0) {
        Ok(check) => {
            perelman.push(ConditionEntry::new("theta'(0) < lambda*p_inf", true, check.margin, Some(0.0)));
            notes.push(format!("theta'(0) = {slope0} in window ({}, {})", check.window.0, check.window.1));
        }
        Err(e) => {
            perelman.push(ConditionEntry::new("theta'(0) < lambda*p_inf", true, 0.0, Some(0.0)));
            notes.push(e.to_string());
        }
    }
    let perelman_pass = perelman.pass;
    stages.push(StageReport { notes, ..StageReport::new("perelman", label, perelman) });
    if !perelman_pass {
        return (stages, None);
    }

    let theta = match build_collar(b.lambda, slope0, slope1, length) {
        Ok(t) => t,
        Err(e) => {
            stages.push(StageReport::failed("collar", label, "collar_built", e.to_string()));
            return (stages, None);
        }
    };
    let collar_report = (|| -> Result<ConditionReport> {
        let mut rep = warped_positivity(&theta, b.fiber_kind.dim(), b.fiber_kind.ricci(), grid_points, COLLAR_NAMES)?;
        let grid = GridSpec::new(grid_points, 0.0, length)?;
        let mut concave = MarginScan::new("collar_concave", true);
        let mut slope = MarginScan::new("collar_slope_below_one", true);
        for s in grid.points() {
            let j = theta.eval(s)?;
            concave.observe(s, -j.d2);
            slope.observe(s, 1.0 - j.d1.abs());
        }
        rep.push(concave.finish(0.0));
        rep.push(slope.finish(0.0));
        let start = theta.eval(0.0)?;
        rep.push(ConditionEntry::new(
            "collar_start_matches_boundary",
            false,
            MATCH_TOLERANCE - (start.value - b.lambda).abs().max((start.d1 - slope0).abs()),
            Some(0.0),
        ));
        Ok(rep)
    })();
    let end = theta.eval(length).expect("collar end in domain");
    match collar_report {
        Ok(rep) => {
            let pass = rep.pass;
            let mut stage = StageReport::new("collar", label, rep);
            stage
                .notes
                .push(format!("theta on [0, {length}], slopes {slope0} -> {slope1}, theta(end) = {}", end.value));
            stages.push(stage);
            if !pass {
                return (stages, None);
            }
        }
        Err(e) => {
            stages.push(StageReport::failed("collar", label, "collar_checked", e.to_string()));
            return (stages, None);
        }
    }
    (stages, Some(Collar { theta, slopes: (slope0, slope1), end_value: end.value, end_slope: -end.d1 }))
}

/// Runs a full gluing: base positivity, collars and Perelman checks,
/// `ν` selection, tube design, and collar–tube junctions.
pub fn assemble(config: &AssemblyConfig) -> Result<FeasibilityReport> {
    if !(config.eps > 0.0) {
        return Err(Error::Config(format!("eps must be > 0, got {}", config.eps)));
    }
    if config.grid_points < 2 {
        return Err(Error::Config("grid_points must be >= 2".into()));
    }
    if !(config.collar_fraction > 0.0) {
        return Err(Error::Config("collar_fraction must be > 0".into()));
    }
    if let NuSpec::Value(v) = config.nu {
        if !(v > 0.0) {
            return Err(Error::Config(format!("nu must be > 0, got {v}")));
        }
    }
    let mut boundaries = config.base.boundaries()?;
    boundaries.sort_by(|a, b| a.label.cmp(&b.label));
    for pair in boundaries.windows(2) {
        if pair[0].label == pair[1].label {
            return Err(Error::Config(format!("duplicate boundary label {}", pair[0].label)));
        }
    }
    let mut specs = Vec::with_capacity(boundaries.len());
    let mut quotient_labels = Vec::with_capacity(boundaries.len());
    for b in &boundaries {
        let matching: Vec<&TubeSpec> = config.tubes.iter().filter(|t| t.boundary == b.label).collect();
        match matching.as_slice() {
            [t] => {
                quotient_labels.push(t.matches(&b.fiber_kind)?);
                specs.push(*t);
            }
            [] => return Err(Error::Config(format!("boundary {} has no tube", b.label))),
            _ => return Err(Error::Config(format!("boundary {} has {} tubes", b.label, matching.len()))),
        }
    }
    if let Some(t) = config.tubes.iter().find(|t| !boundaries.iter().any(|b| b.label == t.boundary)) {
        return Err(Error::Config(format!("tube refers to unknown boundary {}", t.boundary)));
    }

    let mut stages = Vec::new();
    let (base_report, mut assumptions) = config.base.positivity(config.grid_points)?;
    stages.push(StageReport::new("base_positivity", None, base_report));

    let mut collars = Vec::with_capacity(boundaries.len());
    for (b, spec) in boundaries.iter().zip(&specs) {
        let length = spec.collar_length.unwrap_or(config.collar_fraction * b.lambda);
        let (s, collar) = prepare_collar(b, length, config.grid_points);
        stages.extend(s);
        collars.push(collar);
    }

    let singular_bounds: Vec<(String, f64)> = boundaries
        .iter()
        .zip(&specs)
        .zip(&collars)
        .filter(|((_, s), _)| matches!(s.tube, TubeKind::Singular { .. }))
        .filter_map(|((b, _), c)| c.as_ref().map(|c| (b.label.clone(), nu_bound(c.end_value, config.eps))))
        .collect();
    let nu = match config.nu {
        NuSpec::Value(v) => v,
        NuSpec::Keyword(NuKeyword::Auto) => {
            let cap = singular_bounds.iter().map(|(_, b)| *b).chain(config.nu0).fold(f64::INFINITY, f64::min);
            if cap.is_finite() {
                NU_AUTO_FACTOR * cap
            } else {
                NU_FALLBACK
            }
        }
    };
    let mut budget = ConditionReport::new();
    for (label, bound) in &singular_bounds {
        budget.push(ConditionEntry::new(format!("{NU_BOUND_CONDITION} at {label}"), true, bound - nu, None));
    }
    if let Some(nu0) = config.nu0 {
        budget.push(ConditionEntry::new("nu < nu0", true, nu0 - nu, None));
    }
    assumptions.push(NU0_ASSUMPTION.to_string());
    let mut budget_stage = StageReport::new("nu_budget", None, budget);
    budget_stage.notes.push(format!("nu = {nu}"));

    let opts = DesignOptions { grid_points: config.grid_points, smoothing_window: config.smoothing_window };
    let built: Vec<(Vec<StageReport>, Option<TubeOutcome>)> = boundaries
        .par_iter()
        .zip(specs.par_iter())
        .zip(collars.par_iter())
        .zip(quotient_labels.par_iter())
        .map(|(((b, spec), collar), qlabel)| {
            collar.as_ref().map(|c| build_tube(b, spec, c, qlabel.clone(), config, nu, &opts)).unwrap_or_else(|| {
                let note = "no collar, tube not built".to_string();
                (vec![StageReport::failed("tube", Some(&b.label), "tube_built", note)], None)
            })
        })
        .collect();
    let mut tubes = Vec::new();
    for (s, t) in built {
        stages.extend(s);
        tubes.extend(t);
    }
    stages.push(budget_stage);

    Ok(FeasibilityReport::finish(
        Config::Gluing(config.clone()),
        Some(nu),
        boundaries,
        stages,
        tubes,
        None,
        assumptions,
        Vec::new(),
    ))
}

fn build_tube(
    b: &BoundaryData,
    spec: &TubeSpec,
    collar: &Collar,
    quotient_label: Option<String>,
    config: &AssemblyConfig,
    nu: f64,
    opts: &DesignOptions,
) -> (Vec<StageReport>, Option<TubeOutcome>) {
    let label = Some(b.label.as_str());
    let mut outcome = TubeOutcome {
        boundary: b.label.clone(),
        kind: spec.tube.clone(),
        quotient_label,
        collar: collar.theta.clone(),
        collar_slopes: collar.slopes,
        tube_lambda: collar.end_value,
        tube_slope: collar.end_slope,
        params: None,
        h: None,
        f: None,
        junction: None,
        smoothing: None,
    };
    let (h, window, report) = match &spec.tube {
        TubeKind::Singular { q, m } => {
            let mut params = TubeParams::new(*q, *m, config.eps, nu, collar.end_value, collar.end_slope);
            params.eps0 = config.eps0;
            match design_tube_with(&params, opts) {
                Ok(d) => {
                    outcome.params = Some(d.params.clone());
                    outcome.f = Some(d.f);
                    (d.h, d.params.iota.unwrap_or(d.smoothing_window), d.report)
                }
                Err(e) => {
                    outcome.params = Some(params);
                    return (vec![StageReport::failed("tube", label, "tube_designed", e.to_string())], Some(outcome));
                }
            }
        }
        TubeKind::Exceptional { n, .. } => {
            match build_exceptional_tube_with(*n, collar.end_value, collar.end_slope, nu, config.grid_points) {
                Ok(t) => {
                    let w = 0.05 * t.radius;
                    (t.h, w, t.report)
                }
                Err(e) => {
                    return (vec![StageReport::failed("tube", label, "tube_designed", e.to_string())], Some(outcome));
                }
            }
        }
    };
    let mut stages = vec![StageReport::new("tube", label, report)];

    let junction = (|| -> Result<(ConditionReport, MatchReport, SmoothingPlan)> {
        let continuation = collar.theta.mirror();
        let jet = jet_match(&h, &continuation, 1)?;
        let (hj, cj) = (h.eval_left(h.hi())?, continuation.eval(continuation.lo())?);
        let mut rep = ConditionReport::new();
        let worst = jet.residuals.iter().copied().fold(0.0, f64::max);
        rep.push(ConditionEntry::new("junction_jet_order1", true, jet.tolerance - worst, Some(h.hi())));
        rep.push(ConditionEntry::new("junction_concavity", true, (-hj.d2).min(-cj.d2), Some(h.hi())));
        let plan =
            SmoothingPlan { window: window.min(continuation.hi() - continuation.lo()), d2_jump: (hj.d2 - cj.d2).abs() };
        Ok((rep, jet, plan))
    })();
    match junction {
        Ok((rep, jet, plan)) => {
            let mut stage = StageReport::new("junction", label, rep);
            stage
                .notes
                .push(format!("order-2 jump {:.3e} smoothed within {:.3e} of the junction", plan.d2_jump, plan.window));
            stages.push(stage);
            outcome.junction = Some(jet);
            outcome.smoothing = Some(plan);
        }
        Err(e) => stages.push(StageReport::failed("junction", label, "junction_checked", e.to_string())),
    }
    outcome.h = Some(h);
    (stages, Some(outcome))
}

fn is_sine_cap(p: &Profile) -> bool {
    p.segments().len() == 1
        && p.lo() == 0.0
        && (p.hi() - FRAC_PI_2).abs() <= 1e-12
        && p.starts_with_unit_sine().is_some()
}

/// The double of the round half-disc: checks that `sin` continues smoothly
/// into its reflection at `π/2` and samples the sectional curvature of
/// `g₁(sin, sin)` on the doubled interval.
pub fn assemble_double(config: &DoubleConfig) -> Result<FeasibilityReport> {
    if !is_sine_cap(&config.f) || !is_sine_cap(&config.h) {
        return Err(Error::InvalidParam("the double needs f = h = sin on [0, pi/2]".into()));
    }
    let sin = &config.f;
    let mirror = sin.mirror();
    let jet = jet_match_with_tolerance(sin, &mirror, 3, JET_MATCH_TOLERANCE)?;
    let worst = jet.residuals.iter().copied().fold(0.0, f64::max);
    let mut jet_report = ConditionReport::new();
    jet_report.push(ConditionEntry::new("mirror_jet_order3", true, jet.tolerance - worst, Some(FRAC_PI_2)));
    let mut jet_stage = StageReport::new("mirror_jet", None, jet_report);
    jet_stage.notes.push(format!("residuals {:?}", jet.residuals));

    let full = sin.concat(&mirror)?;
    let mut ricci_report = ConditionReport::new();
    let mut scan = MarginScan::new("ricci_g1_positive", true);
    for r in GridSpec::new(DEFAULT_GRID_POINTS, GRID_START, PI - GRID_START)?.points() {
        let j = full.eval(r)?;
        scan.observe(r, ricci_g1(&j, &j, 1, 1)?.min());
    }
    ricci_report.push(scan.finish(0.0));

    let core = full.restricted(0.2, PI - 0.2)?;
    let chart = oracle::chart_doubly_warped(&core, &core, 1, 1)?;
    let sec = oracle::sectional_min(&chart, config.points, config.planes, config.seed)?;
    let mut sec_report = ConditionReport::new();
    sec_report.push(ConditionEntry::new("sectional_nonnegative", true, sec + 1e-8, None));
    let mut sec_stage = StageReport::new("sectional", None, sec_report);
    sec_stage.notes.push(format!("sampled sectional minimum {sec}"));

    Ok(FeasibilityReport::finish(
        Config::Double(config.clone()),
        None,
        Vec::new(),
        vec![jet_stage, StageReport::new("ricci_g1", None, ricci_report), sec_stage],
        Vec::new(),
        Some(DoubleOutcome {
            jet,
            sectional_min: sec,
            points: config.points,
            planes: config.planes,
            seed: config.seed,
        }),
        Vec::new(),
        vec![SUBMERSION_SEC_RESULT.to_string()],
    ))
}

// ----------------------------------------------------------- experiment

/// One row of a shell scan.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShellScanRow {
    pub label: String,
    pub base_radial_margin: f64,
    pub base_fiber_margin: f64,
    pub left_lambda: f64,
    pub left_p: f64,
    pub left_margin: f64,
    pub right_lambda: f64,
    pub right_p: f64,
    pub right_margin: f64,
    pub feasible: bool,
}

/// Evaluates shell bases `dr² + ψ²·g_F` for gluing: strict base Ricci
/// margins and, at each end, `p + 1/λ` with `λ = ψ` (boundary measured in
/// units of `g_F`).
pub fn experiment_shell_scan(
    fiber_dim: u32,
    fiber_ricci: f64,
    family: &[(String, Profile)],
    grid_points: usize,
) -> Result<Vec<ShellScanRow>> {
    family
        .par_iter()
        .map(|(label, psi)| {
            let rep = warped_positivity(psi, fiber_dim, fiber_ricci, grid_points, BASE_NAMES)?;
            let (a, b) = (psi.eval(psi.lo())?, psi.eval_left(psi.hi())?);
            let (left_p, right_p) = (-a.d1 / a.value, b.d1 / b.value);
            let left_margin = left_p + 1.0 / a.value;
            let right_margin = right_p + 1.0 / b.value;
            let base_radial_margin = rep.entries[0].worst_margin;
            let base_fiber_margin = rep.entries[1].worst_margin;
            Ok(ShellScanRow {
                label: label.clone(),
                base_radial_margin,
                base_fiber_margin,
                left_lambda: a.value,
                left_p,
                left_margin,
                right_lambda: b.value,
                right_p,
                right_margin,
                feasible: rep.pass && left_margin > 0.0 && right_margin > 0.0,
            })
        })
        .collect()
}

/// `ψ = sin` on `[t, π − t]` for each `t`.
pub fn sine_shell_family(ts: &[f64]) -> Result<Vec<(String, Profile)>> {
    ts.iter().map(|&t| Ok((format!("sin[{t}, pi-{t}]"), Profile::sine(t, PI - t)?))).collect()
}

/// `ψ ≡ c` on `[0, 1]` for each `c`.
pub fn constant_shell_family(cs: &[f64]) -> Result<Vec<(String, Profile)>> {
    cs.iter().map(|&c| Ok((format!("const {c}"), Profile::constant(c, 0.0, 1.0)?))).collect()
}

pub fn write_scan_csv(rows: &[ShellScanRow], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

// --------------------------------------------------------- golden configs

/// Suspension with two `U(1)` singular orbits: a round shell over
/// `S² = CP¹` capped at both ends by disc bundles.
pub fn golden_suspension() -> AssemblyConfig {
    AssemblyConfig {
        base: BaseSpec::Shell {
            psi: Profile::sine(0.3, PI - 0.3).expect("shell profile"),
            fiber_dim: 2,
            fiber_ricci: 4.0,
            fiber_kind: FiberKind::Cp { m: 1 },
        },
        tubes: ["left", "right"]
            .iter()
            .map(|b| TubeSpec { boundary: b.to_string(), tube: TubeKind::Singular { q: 1, m: 1 }, collar_length: None })
            .collect(),
        eps: 0.5,
        nu: NuSpec::default(),
        nu0: None,
        eps0: None,
        collar_fraction: DEFAULT_COLLAR_FRACTION,
        smoothing_window: None,
        grid_points: DEFAULT_GRID_POINTS,
    }
}

/// A single singular orbit: the round 3-ball `dr² + sin²r·ds²₂`,
/// `r ≤ 1.2`, with a `U(1)` tube over `CP¹` on its boundary sphere.
pub fn golden_single_orbit() -> AssemblyConfig {
    AssemblyConfig {
        base: BaseSpec::Cap {
            psi: Profile::sine(0.0, 1.2).expect("cap profile"),
            fiber_dim: 2,
            fiber_ricci: 1.0,
            fiber_kind: FiberKind::Cp { m: 1 },
        },
        tubes: vec![TubeSpec {
            boundary: "boundary".into(),
            tube: TubeKind::Singular { q: 1, m: 1 },
            collar_length: None,
        }],
        eps: 0.5,
        nu: NuSpec::default(),
        nu0: None,
        eps0: None,
        collar_fraction: DEFAULT_COLLAR_FRACTION,
        smoothing_window: None,
        grid_points: DEFAULT_GRID_POINTS,
    }
}

pub fn golden_configs() -> Vec<(&'static str, Config)> {
    vec![
        ("suspension", Config::Gluing(golden_suspension())),
        ("single_orbit", Config::Gluing(golden_single_orbit())),
        ("double", Config::Double(DoubleConfig::standard())),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profiles::{Jet2, Segment};

    #[test]
    fn design_tube_example() {
        let d = design_tube(&TubeParams::new(1, 1, 1.0, 0.2, 1.0, 0.3)).unwrap();
        assert!(d.report.pass);
        let end = d.f.eval(d.radius).unwrap();
        assert!((end.value - 0.4).abs() < 1e-12 && end.d1 == 0.0);
        let d3 = design_tube(&TubeParams::new(3, 1, 0.5, 0.1, 2.0, 0.5)).unwrap();
        assert!(d3.report.pass);
    }

    #[test]
    fn design_tube_strict_bound() {
        match design_tube(&TubeParams::new(1, 1, 1.0, 0.5, 1.0, 0.3)) {
            Err(Error::InfeasibleParams { constraint, .. }) => assert_eq!(constraint, NU_BOUND_CONDITION),
            other => panic!("expected InfeasibleParams, got {other:?}"),
        }
        assert!(design_tube(&TubeParams::new(1, 1, 1.0, 0.4995, 1.0, 0.3)).unwrap().report.pass);
    }

    #[test]
    fn exceptional_examples() {
        assert!(build_exceptional_tube(2, 1.0, 0.5, 0.1).unwrap().report.pass);
        assert!(build_exceptional_tube(2, 0.1, 0.999, 0.1).unwrap().report.pass);
        assert!(matches!(build_exceptional_tube(2, 1.0, 1.0, 0.1), Err(Error::InvalidParam(_))));
    }

    #[test]
    fn golden_gluings_pass() {
        for (name, cfg) in golden_configs() {
            let rep = run_config(&cfg).unwrap();
            let failed: Vec<_> = rep.failed_stages().map(|s| (&s.stage, &s.boundary, &s.notes)).collect();
            assert!(rep.overall, "{name}: {failed:?}");
        }
    }

    #[test]
    fn nu_at_bound_fails_budget() {
        let mut cfg = golden_single_orbit();
        let auto = assemble(&cfg).unwrap();
        let lambda = auto.tubes[0].tube_lambda;
        cfg.nu = NuSpec::Value(nu_bound(lambda, cfg.eps));
        let rep = assemble(&cfg).unwrap();
        assert!(!rep.overall);
        assert!(!rep.stage("nu_budget", None).unwrap().report.pass);
    }

    #[test]
    fn unmatched_boundary_is_config_error() {
        let mut cfg = golden_suspension();
        cfg.tubes.pop();
        assert!(matches!(assemble(&cfg), Err(Error::Config(_))));
    }

    #[test]
    fn double_rejects_perturbed_profile() {
        let mut cfg = DoubleConfig::standard();
        cfg.f = Profile::from_segment(Segment::sine_arc(1.01, 0.0, 0.0, FRAC_PI_2)).unwrap();
        assert!(matches!(assemble_double(&cfg), Err(Error::InvalidParam(_))));
    }

    #[test]
    fn shell_scan_examples() {
        let rows = experiment_shell_scan(2, 1.0, &sine_shell_family(&[0.3]).unwrap(), 512).unwrap();
        assert!(rows[0].feasible);
        let rows = experiment_shell_scan(2, 1.0, &constant_shell_family(&[0.7]).unwrap(), 512).unwrap();
        assert!(!rows[0].feasible);
        assert_eq!(rows[0].base_radial_margin, 0.0);
        assert!((rows[0].base_fiber_margin - 1.0 / 0.49).abs() < 1e-12);
        let psi =
            Profile::from_segment(Segment::quintic(Jet2::new(1.0, 0.5, -1.0), Jet2::new(0.5, -1.0, -1.0), 0.0, 1.0))
                .unwrap();
        let rows = experiment_shell_scan(2, 1.0, &[("threshold".into(), psi)], 512).unwrap();
        assert_eq!(rows[0].right_margin, 0.0);
        assert!(!rows[0].feasible);
    }
}
