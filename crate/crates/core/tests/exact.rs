//! Closed forms checked against values computed in exact rational
//! arithmetic. At r = π/6, π/4, π/3 both sin² and cos² are rational, and
//! every term below only depends on those.

use std::f64::consts::PI;

use num_rational::Ratio;
use orbit_ricci::curvature::{quotient_quantities, ricci_g1, TubeParams};
use orbit_ricci::profiles::Jet2;

type Q = Ratio<i64>;

fn q(n: i64, d: i64) -> Q {
    Ratio::new(n, d)
}

fn to_f64(x: Q) -> f64 {
    *x.numer() as f64 / *x.denom() as f64
}

/// (angle, sin², cos²)
fn angles() -> [(f64, Q, Q); 3] {
    [(PI / 6.0, q(1, 4), q(3, 4)), (PI / 4.0, q(1, 2), q(1, 2)), (PI / 3.0, q(3, 4), q(1, 4))]
}

fn sin_jet(r: f64, scale: f64) -> Jet2 {
    Jet2::new(scale * r.sin(), scale * r.cos(), -scale * r.sin())
}

fn close(got: f64, want: Q) {
    let w = to_f64(want);
    assert!((got - w).abs() <= 1e-13 * w.abs().max(1.0), "got {got}, exact {want} = {w}");
}

#[test]
fn quotient_radial_is_exact_on_the_round_profile() {
    // f = h = sin, so f''/f = h''/h = −1, f'² = cos², f² = sin².
    let (eps, nu) = (q(1, 1), q(1, 10));
    let snu = (q(1, 1) + eps) * nu;
    for (r, s2, c2) in angles() {
        let den = s2 + snu;
        let want = q(2, 1) + snu / den * (q(3, 1) * c2 / den + q(1, 1));
        let params = TubeParams::new(1, 1, 1.0, 0.1, 1.0, 0.5);
        let got = quotient_quantities(&sin_jet(r, 1.0), &sin_jet(r, 1.0), &params).unwrap().rq_radial;
        close(got, want);
    }
}

#[test]
fn quotient_radial_regression_is_142_over_49() {
    let (_, s2, c2) = angles()[1];
    let snu = q(1, 5);
    let den = s2 + snu;
    let exact = q(2, 1) + snu / den * (q(3, 1) * c2 / den + q(1, 1));
    assert_eq!(exact, q(142, 49));
}

#[test]
fn scaled_fibre_matches_warped_berger() {
    // f = c·sin, h = sin is dr² + sin²(r)·B_c with B_c the Berger sphere of
    // fibre scale c. Unit-vector Ricci of B_c: horizontal 4 − 2c², vertical
    // 2c². Warping over a 3-manifold adds 1 − 2cot² to each, and the radial
    // direction gets −3 sin''/sin = 3.
    let c = q(1, 2);
    for (r, s2, c2) in angles() {
        let cot2 = c2 / s2;
        let warp = q(1, 1) - q(2, 1) * cot2;
        let horizontal = (q(4, 1) - q(2, 1) * c * c) / s2 + warp;
        let fiber = q(2, 1) * c * c / s2 + warp;
        let got = ricci_g1(&sin_jet(r, to_f64(c)), &sin_jet(r, 1.0), 1, 1).unwrap();
        close(got.radial, q(3, 1));
        close(got.horizontal, horizontal);
        close(got.fiber, fiber);
        assert_eq!(got.mixed, 0.0);
    }
}

#[test]
fn round_profile_is_einstein_exactly() {
    // c = 1 is the round S⁴: Ricci 3 in every direction.
    for (r, _, _) in angles() {
        let got = ricci_g1(&sin_jet(r, 1.0), &sin_jet(r, 1.0), 1, 1).unwrap();
        for v in [got.radial, got.horizontal, got.fiber] {
            close(v, q(3, 1));
        }
    }
}
