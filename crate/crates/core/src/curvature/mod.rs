//! Closed-form curvature of the doubly warped submersion metric
//! `g₁(f, h) = dr² + h²(r)·g_P + f²(r)·ds²_q` over a Hopf fibration
//! `S^q → S^n → P`, of its quotient by the diagonal `S^q`-action, and of
//! singly warped intervals `dr² + ψ²(r)·g_F`.

mod checks;

use serde::{Deserialize, Serialize};

pub use checks::{
    check_profile_conditions, check_profile_conditions_with_strictness, verify_tube, verify_tube_with_strictness,
    ConditionEntry, ConditionReport, MarginScan, FIBER_POSITIVITY_FLAG, MATCH_TOLERANCE, NON_STRICT_TOLERANCE,
    NU_BOUND_CONDITION,
};

use crate::error::{Error, Result};
use crate::profiles::Jet2;

/// Numeric shape of a singular tube.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TubeParams {
    /// Fibre sphere dimension: 1 for `U(1)`, 3 for `SU(2)`.
    pub q: u32,
    /// Index of the projective base `CP^m` or `HP^m`.
    pub m: u32,
    pub eps: f64,
    pub nu: f64,
    /// Boundary scale `h(R)`.
    pub lambda: f64,
    /// Boundary slope `h'(R)`.
    #[serde(rename = "Lambda")]
    pub lambda_slope: f64,
    /// Width of the boundary band where `f` is constant; chosen by the
    /// designer when absent.
    #[serde(default)]
    pub iota: Option<f64>,
    /// Asserted upper bound for `eps` (not computed).
    #[serde(default)]
    pub eps0: Option<f64>,
}

impl TubeParams {
    pub fn new(q: u32, m: u32, eps: f64, nu: f64, lambda: f64, lambda_slope: f64) -> Self {
        TubeParams { q, m, eps, nu, lambda, lambda_slope, iota: None, eps0: None }
    }

    pub fn validate(&self) -> Result<()> {
        if !matches!(self.q, 1 | 3) {
            return Err(Error::InvalidParam(format!("q must be 1 or 3, got {}", self.q)));
        }
        if self.m < 1 {
            return Err(Error::InvalidParam("m must be >= 1".into()));
        }
        let positive = [("eps", self.eps), ("nu", self.nu), ("lambda", self.lambda)];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParam(format!("{name} must be > 0, got {v}")));
            }
        }
        if !(self.lambda_slope > 0.0 && self.lambda_slope < 1.0) {
            return Err(Error::InvalidParam(format!("Lambda must lie in (0, 1), got {}", self.lambda_slope)));
        }
        if let Some(iota) = self.iota {
            if !(iota > 0.0) {
                return Err(Error::InvalidParam(format!("iota must be > 0, got {iota}")));
            }
        }
        Ok(())
    }

    /// Real dimension of the projective base.
    pub fn dim_p(&self) -> u32 {
        if self.q == 1 {
            2 * self.m
        } else {
            4 * self.m
        }
    }

    /// Dimension of the sphere `S^n` (the disc is `D^{n+1}`).
    pub fn n(&self) -> u32 {
        self.dim_p() + self.q
    }

    /// `(1+ε)ν`, the fibre-direction scale of the homogeneous factor.
    pub fn scaled_nu(&self) -> f64 {
        (1.0 + self.eps) * self.nu
    }

    /// The plateau value `(1+ε)ν/ε` the fibre function must reach.
    pub fn fiber_target(&self) -> f64 {
        self.scaled_nu() / self.eps
    }
}

/// Einstein constant of the Fubini–Study metric: `2m+2` on `CP^m`,
/// `4m+8` on `HP^m`.
pub fn einstein_constant(q: u32, m: u32) -> Result<f64> {
    let m = m as f64;
    match q {
        1 => Ok(2.0 * m + 2.0),
        3 => Ok(4.0 * m + 8.0),
        _ => Err(Error::InvalidParam(format!("q must be 1 or 3, got {q}"))),
    }
}

/// A-tensor norms of the standard Hopf fibration over `CP^m` / `HP^m`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HopfATensor {
    /// `⟨A v*, A v*⟩` for a unit vertical field.
    pub av_norm: f64,
    /// `⟨A Y, A Y⟩` for a unit horizontal field.
    pub ay_norm: f64,
    /// `⟨(δ̌A) Y, v*⟩`.
    pub delta_a: f64,
}

pub fn hopf_atensor_constants(q: u32, m: u32) -> Result<HopfATensor> {
    let dim_p = match q {
        1 => 2 * m,
        3 => 4 * m,
        _ => return Err(Error::InvalidParam(format!("q must be 1 or 3, got {q}"))),
    };
    Ok(HopfATensor { av_norm: dim_p as f64, ay_norm: q as f64, delta_a: 0.0 })
}

/// Diagonal Ricci components of `g₁` in the frame `∂r`, `Xᵢ` (horizontal),
/// `v*ₖ` (fibre). Mixed components vanish identically.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RicciG1 {
    pub radial: f64,
    pub horizontal: f64,
    pub fiber: f64,
    pub mixed: f64,
}

impl RicciG1 {
    pub fn min(&self) -> f64 {
        self.radial.min(self.horizontal).min(self.fiber)
    }
}

fn require_positive(what: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Singular(format!("{what} = {v} is not positive")))
    }
}

/// Ricci curvature of `g₁(f, h)` from the 2-jets of `f` and `h` at one `r`.
///
/// The horizontal component is the base warped-product term plus the fibre
/// mean-curvature and A-tensor contributions:
/// `dimP(1−h'²)/h² + 2^q/h² − h''/h + (h'/h)² − q f'h'/(fh) − 2q f²/h⁴`.
pub fn ricci_g1(fj: &Jet2, hj: &Jet2, q: u32, m: u32) -> Result<RicciG1> {
    require_positive("f", fj.value)?;
    require_positive("h", hj.value)?;
    let a = hopf_atensor_constants(q, m)?;
    let rho_p = einstein_constant(q, m)?;
    let (dim_p, q) = (a.av_norm, q as f64);
    let (f, f1, f2) = (fj.value, fj.d1, fj.d2);
    let (h, h1, h2) = (hj.value, hj.d1, hj.d2);

    let radial = -dim_p * h2 / h - q * f2 / f;
    // ρ_P = dimP + 2^q, so ρ_P/h² − (dimP − 1)(h'/h)² regroups the first terms.
    let horizontal = rho_p / (h * h)
        - h2 / h
        - (dim_p - 1.0) * (h1 / h).powi(2)
        - q * f1 * h1 / (f * h)
        - 2.0 * f * f / h.powi(4) * a.ay_norm;
    let fiber = (q - 1.0) * (1.0 - f1 * f1) / (f * f) - f2 / f + a.av_norm * (f * f / h.powi(4) - f1 * h1 / (f * h));
    Ok(RicciG1 { radial, horizontal, fiber, mixed: a.delta_a })
}

/// The horizontal component with the opposite sign on `(h'/h)²` and
/// `+2q f²/h⁴`. Kept only for diagnostics: it fails the round-sphere identity.
pub fn ricci_g1_horizontal_flipped(fj: &Jet2, hj: &Jet2, q: u32, m: u32) -> Result<f64> {
    require_positive("f", fj.value)?;
    require_positive("h", hj.value)?;
    let dim_p = hopf_atensor_constants(q, m)?.av_norm;
    let qf = q as f64;
    let (f, f1) = (fj.value, fj.d1);
    let (h, h1, h2) = (hj.value, hj.d1, hj.d2);
    Ok(dim_p * (1.0 - h1 * h1) / (h * h) + 2f64.powi(q as i32) / (h * h)
        - h2 / h
        - (h1 / h).powi(2)
        - qf * (f1 * h1 / (f * h) - 2.0 * f * f / h.powi(4)))
}

/// Ricci components of the singly warped metric `dr² + ψ²(r)·g_F`, with
/// `g_F` a `d`-dimensional Einstein metric of constant `rho_f`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WarpedRicci {
    pub radial: f64,
    pub fiber: f64,
}

impl WarpedRicci {
    pub fn min(&self) -> f64 {
        self.radial.min(self.fiber)
    }
}

pub fn ricci_warped_interval(psi: &Jet2, d: u32, rho_f: f64) -> Result<WarpedRicci> {
    require_positive("psi", psi.value)?;
    if d < 1 {
        return Err(Error::InvalidParam("fibre dimension must be >= 1".into()));
    }
    let (p, p1, p2) = (psi.value, psi.d1, psi.d2);
    let d = d as f64;
    Ok(WarpedRicci { radial: -d * p2 / p, fiber: rho_f / (p * p) - p2 / p - (d - 1.0) * (p1 / p).powi(2) })
}

/// Coefficient `φ` of the mean-curvature field `N = φ ∂r` of the quotient:
/// `φ = −q f f' / (f² + (1+ε)ν)`.
pub fn phi(fj: &Jet2, params: &TubeParams) -> f64 {
    let den = fj.value * fj.value + params.scaled_nu();
    -(params.q as f64) * fj.value * fj.d1 / den
}

/// `φ'`, the exact `r`-derivative of [`phi`].
pub fn phi_prime(fj: &Jet2, params: &TubeParams) -> f64 {
    let (f, f1, f2) = (fj.value, fj.d1, fj.d2);
    let q = params.q as f64;
    let den = f * f + params.scaled_nu();
    -q * (f1 * f1 + f * f2) / den + 2.0 * q * (f * f1).powi(2) / (den * den)
}

/// Coefficients of `∇N` in the quotient frame; every entry is the factor
/// multiplying the corresponding frame vector.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NablaN {
    #[serde(rename = "X")]
    pub x: f64,
    pub w: f64,
    pub radial: f64,
    pub fiber: f64,
    #[serde(rename = "Delta")]
    pub delta: f64,
}

/// Curvature data of the quotient metric at one radius.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuotientReport {
    pub phi: f64,
    /// `⟨A∂r, A∂r⟩`.
    #[serde(rename = "A_norm")]
    pub a_norm: f64,
    /// `⟨T∂r, T∂r⟩`.
    #[serde(rename = "T_norm")]
    pub t_norm: f64,
    #[serde(rename = "nablaN")]
    pub nabla_n: NablaN,
    /// Squared length of the (non-unit) frame vector `Δₖ`.
    pub delta_norm_sq: f64,
    /// Ricci curvature of the quotient in the radial direction.
    #[serde(rename = "rQ_radial")]
    pub rq_radial: f64,
    /// `rQ_radial − 2⟨A∂r, A∂r⟩`.
    pub radial_a_margin: f64,
    pub conditional_flags: Vec<String>,
}

pub fn quotient_quantities(fj: &Jet2, hj: &Jet2, params: &TubeParams) -> Result<QuotientReport> {
    require_positive("f", fj.value)?;
    require_positive("h", hj.value)?;
    let (f, f1, f2) = (fj.value, fj.d1, fj.d2);
    let (h, h1, h2) = (hj.value, hj.d1, hj.d2);
    let q = params.q as f64;
    let dim_p = params.dim_p() as f64;
    let snu = params.scaled_nu();
    let den = f * f + snu;

    let phi = phi(fj, params);
    let phi1 = phi_prime(fj, params);
    let nabla_n = NablaN {
        x: phi * h1 / h,
        w: 0.0,
        radial: phi1,
        fiber: phi * f1 / f,
        delta: phi * (f1 / f) * snu / (snu + f * f),
    };
    let t_norm = q * (f * f1).powi(2) / (den * den);
    let a_norm = q * snu * f1 * f1 / (den * den);
    let rq_radial = -dim_p * h2 / h + q * snu / den * (3.0 * f1 * f1 / den - f2 / f);
    Ok(QuotientReport {
        phi,
        a_norm,
        t_norm,
        nabla_n,
        delta_norm_sq: snu * den / (f * f),
        rq_radial,
        radial_a_margin: rq_radial - 2.0 * a_norm,
        conditional_flags: vec![FIBER_POSITIVITY_FLAG.to_string()],
    })
}

/// Fibre scale `λ = μν/(μ−1)` at which the quotient orbits are normal
/// homogeneous; with `μ = 1+ε` this is `(1+ε)ν/ε`.
pub fn fiber_match(mu: f64, nu: f64) -> Result<f64> {
    if !(mu > 1.0) {
        return Err(Error::InvalidParam(format!("mu must be > 1, got {mu}")));
    }
    Ok(mu * nu / (mu - 1.0))
}

/// Strict upper bound `λε/(1+ε)` for `ν`.
pub fn nu_bound(lambda: f64, eps: f64) -> f64 {
    lambda * eps / (1.0 + eps)
}

/// Principal curvature `−θ'/θ` of a collar `ds² + θ²(s) g` at its `s = 0`
/// end, with respect to the outward normal `−∂s`.
pub fn collar_principal_curvature(theta: &Jet2) -> Result<f64> {
    require_positive("theta", theta.value)?;
    Ok(-theta.d1 / theta.value)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerelmanCheck {
    pub pass: bool,
    /// `λ·p − θ'(0)`.
    pub margin: f64,
    /// Admissible interval `(−1, λ·p)` for `θ'(0)`.
    pub window: (f64, f64),
}

/// Whether a collar with initial slope `theta0_slope` glues to a boundary of
/// scale `lambda` and minimal principal curvature `p_inf`.
pub fn perelman_check(lambda: f64, p_inf: f64, theta0_slope: f64) -> Result<PerelmanCheck> {
    if !(lambda > 0.0) {
        return Err(Error::InvalidParam(format!("lambda must be > 0, got {lambda}")));
    }
    let c = p_inf + 1.0 / lambda;
    if !(c > 0.0) {
        return Err(Error::InvalidParam(format!("p_inf = {p_inf} must exceed -1/lambda = {}", -1.0 / lambda)));
    }
    let upper = -1.0 + lambda * c;
    let margin = lambda * p_inf - theta0_slope;
    Ok(PerelmanCheck { pass: margin > 0.0, margin, window: (-1.0, upper) })
}
