use serde::{Deserialize, Serialize};

use super::Jet2;

/// Analytic shape of one piece of a [`super::Profile`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SegmentKind {
    /// `r ↦ a·sin(r/a + b)`.
    SineArc {
        a: f64,
        b: f64,
    },
    Constant {
        c: f64,
    },
    /// The unique quintic matching `left` at `from` and `right` at `to`.
    QuinticHermite {
        left: Jet2,
        right: Jet2,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    #[serde(flatten)]
    pub kind: SegmentKind,
    pub from: f64,
    pub to: f64,
}

impl Segment {
    pub fn sine_arc(a: f64, b: f64, from: f64, to: f64) -> Self {
        Segment { kind: SegmentKind::SineArc { a, b }, from, to }
    }

    /// The unit sine `sin r` on `[from, to]`.
    pub fn unit_sine(from: f64, to: f64) -> Self {
        Self::sine_arc(1.0, 0.0, from, to)
    }

    pub fn constant(c: f64, from: f64, to: f64) -> Self {
        Segment { kind: SegmentKind::Constant { c }, from, to }
    }

    pub fn quintic(left: Jet2, right: Jet2, from: f64, to: f64) -> Self {
        Segment { kind: SegmentKind::QuinticHermite { left, right }, from, to }
    }

    pub fn width(&self) -> f64 {
        self.to - self.from
    }

    pub fn contains(&self, r: f64) -> bool {
        self.from <= r && r <= self.to
    }

    /// Value and the first three derivatives at `r`.
    ///
    /// Quintic segments return their stored endpoint jets bit-for-bit at the
    /// endpoints, so knots shared with a neighbour are exactly continuous.
    pub fn derivs(&self, r: f64) -> [f64; 4] {
        match &self.kind {
            SegmentKind::SineArc { a, b } => {
                let (s, c) = (r / a + b).sin_cos();
                [a * s, c, -s / a, -c / (a * a)]
            }
            SegmentKind::Constant { c } => [*c, 0.0, 0.0, 0.0],
            SegmentKind::QuinticHermite { left, right } => {
                let coef = quintic_coefficients(left, right, self.width());
                let t = r - self.from;
                let mut d = poly_derivs(&coef, t);
                if r == self.from {
                    d[..3].copy_from_slice(&[left.value, left.d1, left.d2]);
                } else if r == self.to {
                    d[..3].copy_from_slice(&[right.value, right.d1, right.d2]);
                }
                d
            }
        }
    }

    pub fn jet(&self, r: f64) -> Jet2 {
        let d = self.derivs(r);
        Jet2::new(d[0], d[1], d[2])
    }

    /// The same function restricted to `[from, to]` (a subinterval).
    pub(crate) fn restricted(&self, from: f64, to: f64) -> Segment {
        let kind = match &self.kind {
            SegmentKind::QuinticHermite { .. } => {
                SegmentKind::QuinticHermite { left: self.jet(from), right: self.jet(to) }
            }
            other => other.clone(),
        };
        Segment { kind, from, to }
    }

    /// `s ↦ self(sum − s)`, defined on `[sum − to, sum − from]`.
    pub(crate) fn reflected(&self, sum: f64, from: f64, to: f64) -> Segment {
        let kind = match &self.kind {
            SegmentKind::SineArc { a, b } => SegmentKind::SineArc { a: *a, b: std::f64::consts::PI - sum / a - b },
            SegmentKind::Constant { c } => SegmentKind::Constant { c: *c },
            SegmentKind::QuinticHermite { left, right } => {
                SegmentKind::QuinticHermite { left: right.reversed(), right: left.reversed() }
            }
        };
        Segment { kind, from, to }
    }

    /// `r ↦ self(r − shift)`, defined on `[from + shift, to + shift]`.
    pub(crate) fn shifted(&self, shift: f64) -> Segment {
        let kind = match &self.kind {
            SegmentKind::SineArc { a, b } => SegmentKind::SineArc { a: *a, b: b - shift / a },
            other => other.clone(),
        };
        Segment { kind, from: self.from + shift, to: self.to + shift }
    }

    pub(crate) fn is_unit_sine(&self) -> bool {
        matches!(self.kind, SegmentKind::SineArc { a, b } if a == 1.0 && b == 0.0)
    }
}

/// Power-basis coefficients (in `t = r − from`) of the quintic Hermite
/// interpolant of two 2-jets over a segment of width `w`.
pub(crate) fn quintic_coefficients(left: &Jet2, right: &Jet2, w: f64) -> [f64; 6] {
    let c0 = left.value;
    let c1 = left.d1;
    let c2 = 0.5 * left.d2;
    let d0 = right.value - (c0 + c1 * w + c2 * w * w);
    let d1 = (right.d1 - (c1 + 2.0 * c2 * w)) * w;
    let d2 = (right.d2 - 2.0 * c2) * w * w;
    // Scaled unknowns A = c3 w³, B = c4 w⁴, C = c5 w⁵.
    let a = 10.0 * d0 - 4.0 * d1 + 0.5 * d2;
    let b = -15.0 * d0 + 7.0 * d1 - d2;
    let c = 6.0 * d0 - 3.0 * d1 + 0.5 * d2;
    let w3 = w * w * w;
    [c0, c1, c2, a / w3, b / (w3 * w), c / (w3 * w * w)]
}

fn poly_derivs(c: &[f64; 6], t: f64) -> [f64; 4] {
    let v = c[0] + t * (c[1] + t * (c[2] + t * (c[3] + t * (c[4] + t * c[5]))));
    let d1 = c[1] + t * (2.0 * c[2] + t * (3.0 * c[3] + t * (4.0 * c[4] + t * 5.0 * c[5])));
    let d2 = 2.0 * c[2] + t * (6.0 * c[3] + t * (12.0 * c[4] + t * 20.0 * c[5]));
    let d3 = 6.0 * c[3] + t * (24.0 * c[4] + t * 60.0 * c[5]);
    [v, d1, d2, d3]
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn quintic_reproduces_endpoint_jets() {
        let left = Jet2::new(0.3, 0.9, -0.2);
        let right = Jet2::new(1.1, 0.4, -0.05);
        let seg = Segment::quintic(left, right, 0.5, 1.7);
        let coef = quintic_coefficients(&left, &right, seg.width());
        let end = poly_derivs(&coef, seg.width());
        assert_abs_diff_eq!(end[0], right.value, epsilon = 1e-13);
        assert_abs_diff_eq!(end[1], right.d1, epsilon = 1e-13);
        assert_abs_diff_eq!(end[2], right.d2, epsilon = 1e-12);
        assert_eq!(seg.jet(1.7), right);
        assert_eq!(seg.jet(0.5), left);
    }

    #[test]
    fn quintic_reproduces_quadratics_exactly() {
        // θ(s) = 1 − 0.1 s − 0.1 s² on [0, 0.5]
        let left = Jet2::new(1.0, -0.1, -0.2);
        let right = Jet2::new(1.0 - 0.05 - 0.025, -0.2, -0.2);
        let seg = Segment::quintic(left, right, 0.0, 0.5);
        for i in 0..=10 {
            let s = 0.05 * i as f64;
            let d = seg.derivs(s);
            assert_abs_diff_eq!(d[0], 1.0 - 0.1 * s - 0.1 * s * s, epsilon = 1e-14);
            assert_abs_diff_eq!(d[2], -0.2, epsilon = 1e-12);
            assert_abs_diff_eq!(d[3], 0.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn sine_arc_third_derivative() {
        let seg = Segment::sine_arc(2.0, 0.3, 0.0, 3.0);
        let r = 1.1;
        let h = 1e-4;
        let fd = (seg.derivs(r + h)[2] - seg.derivs(r - h)[2]) / (2.0 * h);
        assert_abs_diff_eq!(seg.derivs(r)[3], fd, epsilon = 1e-8);
    }
}
