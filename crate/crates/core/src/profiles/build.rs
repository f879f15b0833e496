//! Constructive builders for the warping functions.

use std::f64::consts::FRAC_PI_4;

use super::{GridSpec, Jet2, Profile, Segment};
use crate::error::{Error, Result};

/// Points used when certifying sign conditions of a freshly built segment.
const CHECK_POINTS: usize = 2048;
/// Tolerance for non-strict sign conditions (`≤ 0`, `≥ 0`).
const NON_STRICT: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct BuildHOutcome {
    pub profile: Profile,
    /// Right end of the domain, where `h(R) = λ` and `h'(R) = Λ`.
    pub radius: f64,
    /// `min(−h'')` over the checked grid on `[δ, R]`.
    pub concavity_margin: f64,
}

/// A sine-cap length compatible with the boundary data `(λ, Λ)`.
///
/// The slope has to decrease from `cos δ` to `Λ` and the value has to grow
/// from `sin δ` to `λ`; keeping `sin δ` small next to the average curvature
/// `(1 − Λ²)/(2λ)` leaves the quintic room to stay concave.
pub fn default_delta(lambda: f64, big_lambda: f64) -> f64 {
    let slope_room = 0.5 * big_lambda.clamp(0.0, 1.0).acos();
    let curvature_room = 0.25 * (1.0 - big_lambda * big_lambda) / lambda.max(1.0);
    0.1f64.min(slope_room).min(0.5 * lambda).min(curvature_room)
}

/// Builds `h`: `sin r` on `[0, δ]` followed by one quintic Hermite segment
/// ending with the jet `(λ, Λ, −κ)` at `R`, `κ = 0.01·min(1, λ)`.
///
/// The length `L = R − δ` is searched inside the window where a concave
/// function can connect the two jets, starting from the length that puts the
/// centroid of the curvature mass at the midpoint.
pub fn build_h(lambda: f64, big_lambda: f64, delta: f64) -> Result<BuildHOutcome> {
    if !(lambda > 0.0) {
        return Err(Error::InvalidParam(format!("lambda must be > 0, got {lambda}")));
    }
    if !(big_lambda > 0.0 && big_lambda < 1.0) {
        return Err(Error::InvalidParam(format!("Lambda must lie in (0, 1), got {big_lambda}")));
    }
    if !(delta > 0.0 && delta < FRAC_PI_4) {
        return Err(Error::InvalidParam(format!("delta must lie in (0, pi/4), got {delta}")));
    }
    let (s, c) = delta.sin_cos();
    if !(c > big_lambda) {
        return Err(Error::InvalidParam(format!(
            "slope cos(delta) = {c} must exceed Lambda = {big_lambda} for a concave h"
        )));
    }
    if !(lambda > s) {
        return Err(Error::InvalidParam(format!(
            "lambda = {lambda} must exceed sin(delta) = {s} for a non-decreasing h"
        )));
    }
    let kappa = 0.01 * lambda.min(1.0);
    let rise = lambda - s;
    let (len_lo, len_hi) = (rise / c, rise / big_lambda);

    let mut candidates = vec![2.0 * rise / (c + big_lambda)];
    candidates.extend((1..16).map(|k| len_lo + (len_hi - len_lo) * k as f64 / 16.0));
    let r0 = delta + rise;
    candidates.extend((0..40).map(|j| r0 * 1.25f64.powi(j) - delta).filter(|l| *l > len_lo && *l < len_hi));

    let sine_end = Jet2::new(s, c, -s);
    let target = Jet2::new(lambda, big_lambda, -kappa);
    let mut best_margin = f64::NEG_INFINITY;
    for len in candidates {
        let radius = delta + len;
        let bridge = Segment::quintic(sine_end, target, delta, radius);
        let Some(margin) = concave_increasing_margin(&bridge, true) else {
            continue;
        };
        best_margin = best_margin.max(margin);
        if margin > 0.0 {
            let profile = Profile::new(vec![Segment::unit_sine(0.0, delta), bridge])?;
            return Ok(BuildHOutcome { profile, radius, concavity_margin: margin });
        }
    }
    Err(Error::DesignFailure(format!(
        "no quintic h with h'' < 0 and 0 <= h' < 1 found for lambda = {lambda}, Lambda = {big_lambda}, \
         delta = {delta} (best concavity margin {best_margin:e})"
    )))
}

/// `min(−p'')` over the segment if `0 ≤ p' (< 1 when `slope_below_one`)
/// holds everywhere on the check grid, `None` otherwise.
fn concave_increasing_margin(seg: &Segment, slope_below_one: bool) -> Option<f64> {
    let grid = GridSpec { points: CHECK_POINTS, lo: seg.from, hi: seg.to };
    let mut margin = f64::INFINITY;
    for r in grid.points() {
        let j = seg.jet(r);
        if j.d1 < -NON_STRICT || (slope_below_one && j.d1 >= 1.0) {
            return None;
        }
        margin = margin.min(-j.d2);
    }
    Some(margin)
}

/// Builds `f`: equal to `h` up to the bridge, a concave quintic bridge of
/// width `window` centred where `h = f_target`, then the plateau
/// `f ≡ f_target` through `R`.
pub fn build_f(h: &Profile, f_target: f64, iota: f64, window: f64) -> Result<Profile> {
    let (lo, radius) = h.domain();
    let h_end = h.eval(radius)?.value;
    if !(f_target > 0.0) {
        return Err(Error::InvalidParam(format!("f_target must be > 0, got {f_target}")));
    }
    if !(iota > 0.0 && window > 0.0) {
        return Err(Error::InvalidParam(format!("iota and smoothing_window must be > 0, got {iota}, {window}")));
    }
    if !(f_target < h_end) {
        return Err(Error::DesignFailure(format!("plateau value {f_target} must be below h(R) = {h_end}")));
    }
    let crossing = bisect_increasing(|r| h.eval(r).map(|j| j.value), lo, radius, f_target)?;
    let (x0, x1) = (crossing - 0.5 * window, crossing + 0.5 * window);
    if !(x0 > lo) {
        return Err(Error::DesignFailure(format!("smoothing window {window} does not fit before r = {crossing}")));
    }
    if !(x1 <= radius - iota) {
        return Err(Error::DesignFailure(format!("plateau starts at {x1}, after R - iota = {}", radius - iota)));
    }

    let start = h.eval(x0)?;
    let bridge = Segment::quintic(start, Jet2::constant(f_target), x0, x1);
    let grid = GridSpec { points: CHECK_POINTS, lo: x0, hi: x1 };
    for r in grid.points() {
        let j = bridge.jet(r);
        if j.d2 > NON_STRICT || j.d1 < -NON_STRICT {
            return Err(Error::DesignFailure(format!(
                "bridge loses concavity or monotonicity at r = {r} (f' = {}, f'' = {})",
                j.d1, j.d2
            )));
        }
        if j.value > h.eval(r)?.value + NON_STRICT {
            return Err(Error::DesignFailure(format!("bridge rises above h at r = {r}")));
        }
    }

    let mut segments: Vec<Segment> =
        h.segments().iter().filter(|s| s.from < x0).map(|s| s.restricted(s.from, s.to.min(x0))).collect();
    segments.push(bridge);
    segments.push(Segment::constant(f_target, x1, radius));
    Profile::new(segments)
}

/// Root of an increasing function on `[lo, hi]` to absolute tolerance 1e-12.
pub(crate) fn bisect_increasing(g: impl Fn(f64) -> Result<f64>, mut lo: f64, mut hi: f64, target: f64) -> Result<f64> {
    if g(lo)? > target || g(hi)? < target {
        return Err(Error::DesignFailure(format!("value {target} is not attained on [{lo}, {hi}]")));
    }
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if g(mid)? < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Builds a collar function `θ` on `[0, length]` with `θ(0) = λ`,
/// `θ'(0) = slope0`, `θ'(length) = slope1` and constant `θ'' < 0`.
pub fn build_collar(lambda: f64, slope0: f64, slope1: f64, length: f64) -> Result<Profile> {
    if !(lambda > 0.0 && length > 0.0) {
        return Err(Error::InvalidParam(format!("collar needs lambda > 0 and length > 0, got {lambda}, {length}")));
    }
    for s in [slope0, slope1] {
        if !(s.abs() < 1.0) {
            return Err(Error::DesignFailure(format!("collar slope {s} violates |theta'| < 1")));
        }
    }
    if !(slope1 < slope0) {
        return Err(Error::DesignFailure(format!(
            "theta'' < 0 needs a strictly decreasing slope, got {slope0} -> {slope1}"
        )));
    }
    let curvature = (slope1 - slope0) / length;
    let end_value = lambda + 0.5 * (slope0 + slope1) * length;
    if !(end_value > 0.0) {
        return Err(Error::DesignFailure(format!("collar value reaches {end_value} <= 0 at s = {length}")));
    }
    let left = Jet2::new(lambda, slope0, curvature);
    let right = Jet2::new(end_value, slope1, curvature);
    Profile::from_segment(Segment::quintic(left, right, 0.0, length))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn min_neg_d2(p: &Profile, lo: f64) -> f64 {
        let grid = GridSpec::new(1000, lo, p.hi()).unwrap();
        grid.points_with_knots(&p.knots()).into_iter().map(|r| -p.eval(r).unwrap().d2).fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn build_h_hits_boundary_jet() {
        let out = build_h(1.0, 0.5, 0.1).unwrap();
        let j = out.profile.eval(out.radius).unwrap();
        assert_abs_diff_eq!(j.value, 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(j.d1, 0.5, epsilon = 1e-10);
        assert!(out.concavity_margin > 0.0);
        assert!(min_neg_d2(&out.profile, 1e-3) > 0.0);
        assert_eq!(out.profile.starts_with_unit_sine(), Some(0.1));
        assert!(out.profile.c1_defect() <= 1e-12);
    }

    #[test]
    fn build_h_large_lambda_needs_long_radius() {
        let out = build_h(5.0, 0.1, 0.1).unwrap();
        assert!(out.radius > 4.0);
        assert!(out.radius >= 5.0 - 0.1f64.sin() + 0.1);
        assert!(min_neg_d2(&out.profile, 1e-3) > 0.0);
    }

    #[test]
    fn build_h_rejects_bad_slope() {
        assert!(matches!(build_h(1.0, 1.2, 0.1), Err(Error::InvalidParam(_))));
        assert!(matches!(build_h(1.0, 0.0, 0.1), Err(Error::InvalidParam(_))));
        assert!(matches!(build_h(-1.0, 0.5, 0.1), Err(Error::InvalidParam(_))));
    }

    #[test]
    fn build_h_steep_boundary_with_default_delta() {
        let delta = default_delta(0.1, 0.999);
        let out = build_h(0.1, 0.999, delta).unwrap();
        assert!(min_neg_d2(&out.profile, 1e-3f64.min(delta)) > 0.0);
    }

    #[test]
    fn build_f_plateau_and_concavity() {
        let out = build_h(1.0, 0.3, 0.1).unwrap();
        let f = build_f(&out.profile, 0.5, 0.05, 0.02).unwrap();
        let j = f.eval(out.radius).unwrap();
        assert_eq!(j, Jet2::constant(0.5));
        let grid = GridSpec::new(1000, 1e-3, out.radius).unwrap();
        for r in grid.points_with_knots(&f.knots()) {
            let (fj, hj) = (f.eval(r).unwrap(), out.profile.eval(r).unwrap());
            assert!(fj.d2 <= 1e-12, "f'' > 0 at {r}");
            assert!(fj.d1 >= -1e-12);
            assert!(fj.value <= hj.value + 1e-12);
        }
        assert_eq!(f.starts_with_unit_sine(), Some(0.1));
    }

    #[test]
    fn build_f_rejects_target_above_boundary() {
        let out = build_h(1.0, 0.3, 0.1).unwrap();
        assert!(matches!(build_f(&out.profile, 1.1, 0.05, 0.02), Err(Error::DesignFailure(_))));
    }

    #[test]
    fn collar_examples() {
        let theta = build_collar(1.0, -0.1, -0.2, 0.5).unwrap();
        let end = theta.eval(0.5).unwrap();
        assert!(end.value > 1.0 - 0.2 * 0.5 && end.value < 1.0 - 0.1 * 0.5);
        assert_abs_diff_eq!(end.d1, -0.2, epsilon = 1e-14);
        assert_eq!(theta.eval(0.0).unwrap(), Jet2::new(1.0, -0.1, -0.2));
        assert!(min_neg_d2(&theta, 0.0) > 0.0);

        assert!(matches!(build_collar(1.0, -0.1, -0.1, 0.5), Err(Error::DesignFailure(_))));
        assert!(build_collar(1.0, 0.5, -0.5, 1.0).is_ok());
        assert!(matches!(build_collar(1.0, -0.5, -0.9, 10.0), Err(Error::DesignFailure(_))));
        assert!(matches!(build_collar(1.0, 1.0, -0.5, 1.0), Err(Error::DesignFailure(_))));
    }
}
