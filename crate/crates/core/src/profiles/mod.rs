//! Warping functions as piecewise analytic profiles.
//!
//! A [`Profile`] is an ordered tiling of an interval by [`Segment`]s, each of
//! which is evaluated analytically: no numerical differentiation happens
//! inside a segment. The builders in [`build`] construct the concrete
//! warping functions of a tube (`h`, `f`) and of a boundary collar (`θ`).

mod build;
mod segment;

use serde::{Deserialize, Serialize};

pub(crate) use build::bisect_increasing;
pub use build::{build_collar, build_f, build_h, default_delta, BuildHOutcome};
pub use segment::{Segment, SegmentKind};

use crate::error::{Error, Result};

/// Maximum value/slope mismatch tolerated at an interior knot.
pub const C1_TOLERANCE: f64 = 1e-12;
/// Second-derivative jump below which a knot counts as smooth.
pub const SMOOTH_D2_TOLERANCE: f64 = 1e-9;

/// Value, first and second derivative at a point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Jet2 {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
}

impl Jet2 {
    pub const fn new(value: f64, d1: f64, d2: f64) -> Self {
        Jet2 { value, d1, d2 }
    }

    pub const fn constant(c: f64) -> Self {
        Jet2 { value: c, d1: 0.0, d2: 0.0 }
    }

    /// The jet of `s ↦ p(−s)`.
    pub fn reversed(&self) -> Self {
        Jet2 { value: self.value, d1: -self.d1, d2: self.d2 }
    }

    pub fn is_finite(&self) -> bool {
        self.value.is_finite() && self.d1.is_finite() && self.d2.is_finite()
    }
}

/// Uniform sampling of `[lo, hi]`, endpoints included.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub points: usize,
    pub lo: f64,
    pub hi: f64,
}

impl GridSpec {
    pub fn new(points: usize, lo: f64, hi: f64) -> Result<Self> {
        if points < 2 {
            return Err(Error::InvalidParam(format!("grid needs at least 2 points, got {points}")));
        }
        if !(lo < hi) {
            return Err(Error::InvalidParam(format!("grid needs lo < hi, got [{lo}, {hi}]")));
        }
        Ok(GridSpec { points, lo, hi })
    }

    pub fn points(&self) -> Vec<f64> {
        let n = self.points - 1;
        let step = (self.hi - self.lo) / n as f64;
        (0..=n).map(|i| if i == n { self.hi } else { self.lo + step * i as f64 }).collect()
    }

    /// Grid points merged with the given knots that fall inside the grid,
    /// sorted and deduplicated.
    pub fn points_with_knots<'a>(&self, knots: impl IntoIterator<Item = &'a f64>) -> Vec<f64> {
        let mut pts = self.points();
        pts.extend(knots.into_iter().copied().filter(|k| *k >= self.lo && *k <= self.hi));
        pts.sort_by(|a, b| a.total_cmp(b));
        pts.dedup();
        pts
    }
}

/// A piecewise-C² positive function on `[lo, hi]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ProfileDoc", into = "ProfileDoc")]
pub struct Profile {
    segments: Vec<Segment>,
}

#[derive(Serialize, Deserialize)]
struct ProfileDoc {
    domain: [f64; 2],
    segments: Vec<Segment>,
}

impl TryFrom<ProfileDoc> for Profile {
    type Error = Error;

    fn try_from(doc: ProfileDoc) -> Result<Self> {
        let p = Profile::new(doc.segments)?;
        if p.lo() != doc.domain[0] || p.hi() != doc.domain[1] {
            return Err(Error::InvalidProfile(format!(
                "declared domain {:?} does not match segments [{}, {}]",
                doc.domain,
                p.lo(),
                p.hi()
            )));
        }
        Ok(p)
    }
}

impl From<Profile> for ProfileDoc {
    fn from(p: Profile) -> Self {
        ProfileDoc { domain: [p.lo(), p.hi()], segments: p.segments }
    }
}

impl Profile {
    /// Validates tiling, C¹ continuity at knots and positivity.
    pub fn new(segments: Vec<Segment>) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::InvalidProfile("no segments".into()));
        }
        for (i, s) in segments.iter().enumerate() {
            if !(s.from.is_finite() && s.to.is_finite() && s.from < s.to) {
                return Err(Error::InvalidProfile(format!(
                    "segment {i} has an empty or non-finite interval [{}, {}]",
                    s.from, s.to
                )));
            }
            if let SegmentKind::SineArc { a, .. } = s.kind {
                if !(a > 0.0) {
                    return Err(Error::InvalidProfile(format!("segment {i}: sine amplitude {a} <= 0")));
                }
            }
        }
        for (i, pair) in segments.windows(2).enumerate() {
            let (l, r) = (&pair[0], &pair[1]);
            if l.to != r.from {
                return Err(Error::InvalidProfile(format!(
                    "gap or overlap between segments {i} and {}: {} vs {}",
                    i + 1,
                    l.to,
                    r.from
                )));
            }
            let (jl, jr) = (l.jet(l.to), r.jet(r.from));
            let dv = (jl.value - jr.value).abs();
            let dd = (jl.d1 - jr.d1).abs();
            if dv > C1_TOLERANCE || dd > C1_TOLERANCE {
                return Err(Error::InvalidProfile(format!(
                    "not C¹ at knot {}: value jump {dv:e}, slope jump {dd:e}",
                    l.to
                )));
            }
        }
        let profile = Profile { segments };
        profile.check_positive()?;
        Ok(profile)
    }

    fn check_positive(&self) -> Result<()> {
        const SAMPLES: usize = 32;
        let (lo, hi) = (self.lo(), self.hi());
        for seg in &self.segments {
            for i in 0..=SAMPLES {
                let r = seg.from + seg.width() * i as f64 / SAMPLES as f64;
                let r = if i == SAMPLES { seg.to } else { r };
                let v = seg.jet(r).value;
                let endpoint = r == lo || r == hi;
                let ok = if endpoint { v >= -C1_TOLERANCE } else { v > 0.0 };
                if !ok || !v.is_finite() {
                    return Err(Error::InvalidProfile(format!("value {v} is not positive at r = {r}")));
                }
            }
        }
        Ok(())
    }

    /// A single-segment profile.
    pub fn from_segment(segment: Segment) -> Result<Self> {
        Profile::new(vec![segment])
    }

    /// `sin r` on `[lo, hi]`.
    pub fn sine(lo: f64, hi: f64) -> Result<Self> {
        Profile::from_segment(Segment::unit_sine(lo, hi))
    }

    pub fn constant(c: f64, lo: f64, hi: f64) -> Result<Self> {
        Profile::from_segment(Segment::constant(c, lo, hi))
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn lo(&self) -> f64 {
        self.segments[0].from
    }

    pub fn hi(&self) -> f64 {
        self.segments[self.segments.len() - 1].to
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.lo(), self.hi())
    }

    /// Interior breakpoints.
    pub fn knots(&self) -> Vec<f64> {
        self.segments[1..].iter().map(|s| s.from).collect()
    }

    fn check_domain(&self, r: f64) -> Result<()> {
        if r >= self.lo() && r <= self.hi() {
            Ok(())
        } else {
            Err(Error::OutOfDomain { r, lo: self.lo(), hi: self.hi() })
        }
    }

    /// Index of the segment active at `r`; the right-hand one at a knot.
    fn index_right(&self, r: f64) -> usize {
        self.segments.partition_point(|s| s.from <= r).saturating_sub(1)
    }

    /// Index of the segment active at `r`; the left-hand one at a knot.
    fn index_left(&self, r: f64) -> usize {
        self.segments.partition_point(|s| s.to < r).min(self.segments.len() - 1)
    }

    /// Analytic 2-jet at `r`. At a knot the right segment is used.
    pub fn eval(&self, r: f64) -> Result<Jet2> {
        self.check_domain(r)?;
        Ok(self.segments[self.index_right(r)].jet(r))
    }

    /// Like [`Profile::eval`] but using the left segment at a knot.
    pub fn eval_left(&self, r: f64) -> Result<Jet2> {
        self.check_domain(r)?;
        Ok(self.segments[self.index_left(r)].jet(r))
    }

    /// Value and three derivatives, right segment at knots.
    pub fn derivs(&self, r: f64) -> Result<[f64; 4]> {
        self.check_domain(r)?;
        Ok(self.segments[self.index_right(r)].derivs(r))
    }

    pub fn derivs_left(&self, r: f64) -> Result<[f64; 4]> {
        self.check_domain(r)?;
        Ok(self.segments[self.index_left(r)].derivs(r))
    }

    /// Both one-sided jets at `r`; identical away from knots.
    pub fn eval_both(&self, r: f64) -> Result<(Jet2, Jet2)> {
        Ok((self.eval_left(r)?, self.eval(r)?))
    }

    /// Second-derivative jump `d2(k⁺) − d2(k⁻)` at every interior knot.
    pub fn d2_jumps(&self) -> Vec<(f64, f64)> {
        self.segments.windows(2).map(|p| (p[1].from, p[1].jet(p[1].from).d2 - p[0].jet(p[0].to).d2)).collect()
    }

    pub fn is_smooth(&self) -> bool {
        self.d2_jumps().iter().all(|(_, j)| j.abs() <= SMOOTH_D2_TOLERANCE)
    }

    /// Largest value or slope mismatch over interior knots.
    pub fn c1_defect(&self) -> f64 {
        self.segments
            .windows(2)
            .map(|p| {
                let (l, r) = (p[0].jet(p[0].to), p[1].jet(p[1].from));
                (l.value - r.value).abs().max((l.d1 - r.d1).abs())
            })
            .fold(0.0, f64::max)
    }

    /// Whether the first segment is `sin r` starting at 0.
    pub fn starts_with_unit_sine(&self) -> Option<f64> {
        let s = &self.segments[0];
        (s.is_unit_sine() && s.from == 0.0).then_some(s.to)
    }

    /// The reflection `s ↦ p(lo + hi − s)` on the same domain.
    ///
    /// First derivatives change sign; values and second derivatives are kept.
    pub fn mirror(&self) -> Profile {
        let (lo, hi) = self.domain();
        let sum = lo + hi;
        let n = self.segments.len();
        let segments = self
            .segments
            .iter()
            .rev()
            .enumerate()
            .map(|(i, s)| {
                let from = if i == 0 { lo } else { sum - s.to };
                let to = if i == n - 1 { hi } else { sum - s.from };
                s.reflected(sum, from, to)
            })
            .collect();
        Profile { segments }
    }

    /// `self` followed by `next` translated to start at `self.hi()`.
    pub fn concat(&self, next: &Profile) -> Result<Profile> {
        let shift = self.hi() - next.lo();
        let mut segments = self.segments.clone();
        segments.extend(next.segments.iter().map(|s| {
            let mut t = s.shifted(shift);
            if s.from == next.lo() {
                t.from = self.hi();
            }
            t
        }));
        Profile::new(segments)
    }

    /// The profile restricted to `[lo, hi]`.
    pub fn restricted(&self, lo: f64, hi: f64) -> Result<Profile> {
        self.check_domain(lo)?;
        self.check_domain(hi)?;
        if !(lo < hi) {
            return Err(Error::InvalidParam(format!("empty restriction [{lo}, {hi}]")));
        }
        let segments = self
            .segments
            .iter()
            .filter(|s| s.to > lo && s.from < hi)
            .map(|s| s.restricted(s.from.max(lo), s.to.min(hi)))
            .collect();
        Profile::new(segments)
    }
}

/// Outcome of comparing the right end of one profile to the left end of
/// another, derivative order by derivative order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatchReport {
    pub order: usize,
    pub tolerance: f64,
    /// `residuals[k] = |d^k left − d^k right|`.
    pub residuals: Vec<f64>,
    pub pass: bool,
}

impl MatchReport {
    /// Highest order through which all residuals are within tolerance.
    pub fn matched_through(&self) -> Option<usize> {
        self.residuals.iter().take_while(|r| **r <= self.tolerance).count().checked_sub(1)
    }
}

pub const JET_MATCH_TOLERANCE: f64 = 1e-6;

/// Compares derivatives up to `order` (at most 3) of `left` at its right
/// endpoint with `right` at its left endpoint.
///
/// All orders use the analytic segment derivatives.
pub fn jet_match(left: &Profile, right: &Profile, order: usize) -> Result<MatchReport> {
    jet_match_with_tolerance(left, right, order, JET_MATCH_TOLERANCE)
}

pub fn jet_match_with_tolerance(left: &Profile, right: &Profile, order: usize, tolerance: f64) -> Result<MatchReport> {
    if order > 3 {
        return Err(Error::InvalidParam(format!("jet order {order} > 3")));
    }
    let l = left.derivs_left(left.hi())?;
    let r = right.derivs(right.lo())?;
    let residuals: Vec<f64> = (0..=order).map(|k| (l[k] - r[k]).abs()).collect();
    let pass = residuals.iter().all(|x| *x <= tolerance);
    Ok(MatchReport { order, tolerance, residuals, pass })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn eval_examples() {
        let sin = Profile::sine(0.0, PI).unwrap();
        let j = sin.eval(FRAC_PI_2).unwrap();
        assert_abs_diff_eq!(j.value, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(j.d1, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(j.d2, -1.0, epsilon = 1e-15);

        let c = Profile::constant(0.7, 0.0, 2.0).unwrap();
        assert_eq!(c.eval(1.3).unwrap(), Jet2::new(0.7, 0.0, 0.0));

        let arc = Profile::from_segment(Segment::sine_arc(2.0, 0.0, 0.0, 4.0)).unwrap();
        let j = arc.eval(PI).unwrap();
        assert_abs_diff_eq!(j.value, 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(j.d1, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(j.d2, -0.5, epsilon = 1e-15);
    }

    #[test]
    fn eval_out_of_domain() {
        let sin = Profile::sine(0.0, 1.0).unwrap();
        assert!(matches!(sin.eval(1.5), Err(Error::OutOfDomain { .. })));
        assert!(matches!(sin.eval(-1e-9), Err(Error::OutOfDomain { .. })));
    }

    #[test]
    fn eval_at_knot_uses_right_segment() {
        let p = Profile::new(vec![Segment::unit_sine(0.0, FRAC_PI_2), Segment::constant(1.0, FRAC_PI_2, 2.0)]).unwrap();
        assert_eq!(p.eval(FRAC_PI_2).unwrap().d2, 0.0);
        assert_eq!(p.eval_left(FRAC_PI_2).unwrap().d2, -1.0);
        assert!(!p.is_smooth());
        let jumps = p.d2_jumps();
        assert_eq!(jumps.len(), 1);
        assert_abs_diff_eq!(jumps[0].1, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn rejects_gaps_and_kinks() {
        let gap = Profile::new(vec![Segment::constant(1.0, 0.0, 1.0), Segment::constant(1.0, 1.1, 2.0)]);
        assert!(matches!(gap, Err(Error::InvalidProfile(_))));
        let kink = Profile::new(vec![Segment::unit_sine(0.0, 1.0), Segment::constant(1.0, 1.0, 2.0)]);
        assert!(matches!(kink, Err(Error::InvalidProfile(_))));
        let negative = Profile::sine(0.0, 4.0);
        assert!(matches!(negative, Err(Error::InvalidProfile(_))));
    }

    #[test]
    fn mirror_examples() {
        let sin = Profile::sine(0.0, FRAC_PI_2).unwrap();
        let m = sin.mirror();
        let j = m.eval(0.0).unwrap();
        assert_abs_diff_eq!(j.value, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(j.d1, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(j.d2, -1.0, epsilon = 1e-15);

        let c = Profile::constant(1.3, 0.0, 2.0).unwrap();
        assert_eq!(c.mirror(), c);
    }

    #[test]
    fn jet_match_examples() {
        let sin = Profile::sine(0.0, FRAC_PI_2).unwrap();
        let rep = jet_match(&sin, &sin.mirror(), 3).unwrap();
        assert_eq!(rep.residuals, vec![0.0; 4]);
        assert!(rep.pass);

        let one = Profile::constant(1.0, 0.0, 1.0).unwrap();
        let rep2 = jet_match(&sin, &one, 2).unwrap();
        assert!(!rep2.pass);
        assert_abs_diff_eq!(rep2.residuals[2], 1.0, epsilon = 1e-15);
        assert_eq!(rep2.matched_through(), Some(1));
        assert!(jet_match(&sin, &one, 1).unwrap().pass);
        assert!(jet_match(&sin, &one, 4).is_err());
    }

    #[test]
    fn concat_sine_with_its_mirror_is_sine() {
        let sin = Profile::sine(0.0, FRAC_PI_2).unwrap();
        let double = sin.concat(&sin.mirror()).unwrap();
        assert_eq!(double.domain(), (0.0, PI));
        for i in 1..100 {
            let r = PI * i as f64 / 100.0;
            let j = double.eval(r).unwrap();
            assert_abs_diff_eq!(j.value, r.sin(), epsilon = 1e-14);
            assert_abs_diff_eq!(j.d1, r.cos(), epsilon = 1e-14);
        }
        assert!(double.is_smooth());
    }

    #[test]
    fn grid_points_inclusive() {
        let g = GridSpec::new(5, 1.0, 2.0).unwrap();
        assert_eq!(g.points(), vec![1.0, 1.25, 1.5, 1.75, 2.0]);
        let merged = g.points_with_knots(&[1.1, 3.0, 1.5]);
        assert_eq!(merged, vec![1.0, 1.1, 1.25, 1.5, 1.75, 2.0]);
        assert!(GridSpec::new(1, 0.0, 1.0).is_err());
        assert!(GridSpec::new(4, 1.0, 1.0).is_err());
    }

    #[test]
    fn json_shape() {
        let p = Profile::new(vec![
            Segment::unit_sine(0.0, 0.5),
            Segment::quintic(
                Jet2::new(0.5f64.sin(), 0.5f64.cos(), -0.5f64.sin()),
                Jet2::new(0.9, 0.2, -0.01),
                0.5,
                1.5,
            ),
        ])
        .unwrap();
        let v: serde_json::Value = serde_json::to_value(&p).unwrap();
        assert_eq!(v["domain"], serde_json::json!([0.0, 1.5]));
        assert_eq!(v["segments"][0]["kind"], "sine_arc");
        assert_eq!(v["segments"][1]["kind"], "quintic_hermite");
        assert_eq!(v["segments"][1]["right"]["d1"], 0.2);
        let bad = r#"{"domain":[0,2],"segments":[{"kind":"constant","c":1.0,"from":0.0,"to":1.0}]}"#;
        assert!(serde_json::from_str::<Profile>(bad).is_err());
    }
}
