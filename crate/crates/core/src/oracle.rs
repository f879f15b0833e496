//! Finite-difference curvature of explicit coordinate metrics.
//!
//! This module never looks at analytic derivatives of a profile: it only
//! evaluates metric components, differentiates them by second-order central
//! differences, and builds Christoffel symbols, the Riemann tensor, Ricci
//! curvature and sampled sectional curvature from those numbers. That keeps
//! it an independent route against which the closed forms in
//! [`crate::curvature`] are validated.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::curvature::ricci_g1;
use crate::error::{Error, Result};
use crate::profiles::Profile;

/// Default central-difference step (in coordinate units).
pub const DEFAULT_STEP: f64 = 1e-4;
/// Largest accepted condition number of `g`.
const MAX_CONDITION: f64 = 1e12;
/// Angle (radians) within which a frame direction counts as a Ricci
/// eigendirection.
pub const ALIGNMENT_THRESHOLD: f64 = 1e-3;

pub type MetricFn = Arc<dyn Fn(&[f64]) -> DMatrix<f64> + Send + Sync>;

/// A Riemannian metric in one coordinate chart.
#[derive(Clone)]
pub struct ChartMetric {
    pub dim: usize,
    pub components: MetricFn,
    /// Coordinate box `[(lo, hi); dim]` on which the metric is defined.
    pub valid_region: Vec<(f64, f64)>,
    pub name: String,
}

impl fmt::Debug for ChartMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ChartMetric")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("valid_region", &self.valid_region)
            .finish_non_exhaustive()
    }
}

impl ChartMetric {
    pub fn new(
        name: impl Into<String>,
        valid_region: Vec<(f64, f64)>,
        components: impl Fn(&[f64]) -> DMatrix<f64> + Send + Sync + 'static,
    ) -> Self {
        ChartMetric { dim: valid_region.len(), components: Arc::new(components), valid_region, name: name.into() }
    }

    /// `g_ij(x)`, checked for symmetry and positive definiteness.
    pub fn metric_at(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        let g = (self.components)(x);
        if g.nrows() != self.dim || g.ncols() != self.dim {
            return Err(Error::InvalidParam(format!("{}: metric has wrong shape", self.name)));
        }
        let asym = (&g - g.transpose()).amax();
        if asym > 1e-12 * g.amax().max(1.0) {
            return Err(Error::Singular(format!("{}: metric not symmetric at {x:?}", self.name)));
        }
        let eig = SymmetricEigen::new(g.clone()).eigenvalues;
        let (lo, hi) = (eig.min(), eig.max());
        if !(lo > 1e-10) || hi / lo > MAX_CONDITION {
            return Err(Error::Singular(format!(
                "{}: metric degenerate at {x:?} (eigenvalues in [{lo:e}, {hi:e}])",
                self.name
            )));
        }
        Ok(g)
    }

    fn check_interior(&self, x: &[f64], margin: f64) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::InvalidParam(format!("point has dimension {}, chart {}", x.len(), self.dim)));
        }
        for (i, (&xi, &(lo, hi))) in x.iter().zip(&self.valid_region).enumerate() {
            if xi - margin < lo || xi + margin > hi {
                return Err(Error::InvalidParam(format!(
                    "{}: coordinate {i} = {xi} is within {margin} of the chart boundary [{lo}, {hi}]",
                    self.name
                )));
            }
        }
        Ok(())
    }

    fn offset(x: &[f64], axis: usize, delta: f64) -> Vec<f64> {
        let mut y = x.to_vec();
        y[axis] += delta;
        y
    }
}

/// Christoffel symbols `Γ^k_ij`, stored at `data[(k·dim + i)·dim + j]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Christoffel {
    pub dim: usize,
    pub data: Vec<f64>,
}

impl Christoffel {
    pub fn get(&self, k: usize, i: usize, j: usize) -> f64 {
        self.data[(k * self.dim + i) * self.dim + j]
    }
}

/// `Γ^k_ij = ½ g^kl (∂_i g_jl + ∂_j g_il − ∂_l g_ij)` with central
/// differences of step `step`.
pub fn christoffel(metric: &ChartMetric, x: &[f64], step: f64) -> Result<Christoffel> {
    metric.check_interior(x, 2.0 * step)?;
    christoffel_unchecked(metric, x, step)
}

fn christoffel_unchecked(metric: &ChartMetric, x: &[f64], step: f64) -> Result<Christoffel> {
    let n = metric.dim;
    let g = metric.metric_at(x)?;
    let g_inv = g
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Singular(format!("{}: metric not invertible at {x:?}", metric.name)))?;
    // dg[a][(i, j)] = ∂_a g_ij
    let mut dg = Vec::with_capacity(n);
    for a in 0..n {
        let plus = metric.metric_at(&ChartMetric::offset(x, a, step))?;
        let minus = metric.metric_at(&ChartMetric::offset(x, a, -step))?;
        dg.push((plus - minus) / (2.0 * step));
    }
    let mut data = vec![0.0; n * n * n];
    for i in 0..n {
        for j in i..n {
            let lowered: Vec<f64> = (0..n).map(|l| 0.5 * (dg[i][(j, l)] + dg[j][(i, l)] - dg[l][(i, j)])).collect();
            for k in 0..n {
                let v: f64 = (0..n).map(|l| g_inv[(k, l)] * lowered[l]).sum();
                data[(k * n + i) * n + j] = v;
                data[(k * n + j) * n + i] = v;
            }
        }
    }
    Ok(Christoffel { dim: n, data })
}

/// Curvature data at one point of a chart.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CurvatureSample {
    pub point: Vec<f64>,
    pub christoffel: Christoffel,
    /// `R^i_jkl` at `data[((i·dim + j)·dim + k)·dim + l]`, with
    /// `R(∂k, ∂l)∂j = R^i_jkl ∂i`.
    pub riemann: Vec<f64>,
    /// `Ric_jl` (row-major, symmetrised).
    pub ricci: Vec<f64>,
    /// Eigenvalues of Ricci relative to `g`, ascending.
    pub ricci_eigen: Vec<f64>,
    /// Smallest sectional curvature over coordinate 2-planes.
    pub sec_min_sampled: f64,
    /// `max |R^i_jkl + R^i_jlk|`.
    pub antisymmetry_residual: f64,
    /// `max |Ric_jl − Ric_lj|` before symmetrisation.
    pub ricci_asymmetry: f64,
    /// `g_ij` (row-major).
    pub metric: Vec<f64>,
}

impl CurvatureSample {
    fn dim(&self) -> usize {
        self.point.len()
    }

    pub fn riemann_at(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        let n = self.dim();
        self.riemann[((i * n + j) * n + k) * n + l]
    }

    pub fn ricci_matrix(&self) -> DMatrix<f64> {
        let n = self.dim();
        DMatrix::from_row_slice(n, n, &self.ricci)
    }

    pub fn metric_matrix(&self) -> DMatrix<f64> {
        let n = self.dim();
        DMatrix::from_row_slice(n, n, &self.metric)
    }

    /// Sectional curvature of the plane spanned by coordinate vectors `x`, `y`.
    #[allow(clippy::needless_range_loop)]
    pub fn sectional(&self, x: &[f64], y: &[f64]) -> f64 {
        let n = self.dim();
        let g = self.metric_matrix();
        let gx = DVector::from_column_slice(x);
        let gy = DVector::from_column_slice(y);
        let gxx = gx.dot(&(&g * &gx));
        let gyy = gy.dot(&(&g * &gy));
        let gxy = gx.dot(&(&g * &gy));
        let area = gxx * gyy - gxy * gxy;
        // ⟨R(X,Y)Y, X⟩ = g_im R^m_jkl X^k Y^l Y^j X^i
        let mut num = 0.0;
        for m in 0..n {
            let mut rm = 0.0;
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        rm += self.riemann_at(m, j, k, l) * x[k] * y[l] * y[j];
                    }
                }
            }
            let gx_m: f64 = (0..n).map(|i| g[(i, m)] * x[i]).sum();
            num += gx_m * rm;
        }
        num / area
    }
}

/// Riemann and Ricci curvature by differencing the Christoffel symbols.
pub fn ricci(metric: &ChartMetric, x: &[f64], step: f64) -> Result<CurvatureSample> {
    metric.check_interior(x, 2.0 * step)?;
    let n = metric.dim;
    let gamma = christoffel_unchecked(metric, x, step)?;
    // dgamma[a] = ∂_a Γ
    let mut dgamma = Vec::with_capacity(n);
    for a in 0..n {
        let plus = christoffel_unchecked(metric, &ChartMetric::offset(x, a, step), step)?;
        let minus = christoffel_unchecked(metric, &ChartMetric::offset(x, a, -step), step)?;
        dgamma.push(plus.data.iter().zip(&minus.data).map(|(p, m)| (p - m) / (2.0 * step)).collect::<Vec<f64>>());
    }
    let idx = |k: usize, i: usize, j: usize| (k * n + i) * n + j;
    let mut riemann = vec![0.0; n * n * n * n];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let mut v = dgamma[k][idx(i, l, j)] - dgamma[l][idx(i, k, j)];
                    for m in 0..n {
                        v += gamma.get(i, k, m) * gamma.get(m, l, j) - gamma.get(i, l, m) * gamma.get(m, k, j);
                    }
                    riemann[((i * n + j) * n + k) * n + l] = v;
                }
            }
        }
    }
    let r4 = |i: usize, j: usize, k: usize, l: usize| riemann[((i * n + j) * n + k) * n + l];
    let mut antisymmetry_residual: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    antisymmetry_residual = antisymmetry_residual.max((r4(i, j, k, l) + r4(i, j, l, k)).abs());
                }
            }
        }
    }
    let mut ric = DMatrix::zeros(n, n);
    for j in 0..n {
        for l in 0..n {
            ric[(j, l)] = (0..n).map(|i| r4(i, j, i, l)).sum();
        }
    }
    let ricci_asymmetry = (&ric - ric.transpose()).amax();
    let ric = (&ric + ric.transpose()) * 0.5;

    let g = metric.metric_at(x)?;
    let ricci_eigen = relative_eigen(&g, &ric)?.0;
    let mut sample = CurvatureSample {
        point: x.to_vec(),
        christoffel: gamma,
        riemann,
        ricci: ric.transpose().as_slice().to_vec(),
        ricci_eigen,
        sec_min_sampled: f64::INFINITY,
        antisymmetry_residual,
        ricci_asymmetry,
        metric: g.transpose().as_slice().to_vec(),
    };
    let mut sec_min = f64::INFINITY;
    for a in 0..n {
        for b in (a + 1)..n {
            let (mut ea, mut eb) = (vec![0.0; n], vec![0.0; n]);
            ea[a] = 1.0;
            eb[b] = 1.0;
            sec_min = sec_min.min(sample.sectional(&ea, &eb));
        }
    }
    sample.sec_min_sampled = sec_min;
    Ok(sample)
}

/// Eigen-decomposition of `ric` relative to `g`: returns ascending
/// eigenvalues, the eigenvectors in a `g`-orthonormal basis, and the
/// Cholesky factor `L` with `g = L Lᵀ`.
fn relative_eigen(g: &DMatrix<f64>, ric: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>, DMatrix<f64>)> {
    let chol = g.clone().cholesky().ok_or_else(|| Error::Singular("metric not positive definite".into()))?;
    let l = chol.l();
    let l_inv = l.clone().try_inverse().ok_or_else(|| Error::Singular("Cholesky factor singular".into()))?;
    let m = &l_inv * ric * l_inv.transpose();
    let m = (&m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|a, b| eig.eigenvalues[*a].total_cmp(&eig.eigenvalues[*b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors =
        DMatrix::from_columns(&order.iter().map(|&i| eig.eigenvectors.column(i).into_owned()).collect::<Vec<_>>());
    Ok((values, vectors, l))
}

/// Ricci curvature along one frame direction and how well that direction
/// aligns with a Ricci eigenspace.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DirectionMatch {
    pub label: String,
    /// `Ric(v, v) / g(v, v)`.
    pub value: f64,
    /// Mean eigenvalue of the best-aligned eigenspace.
    pub eigenvalue: f64,
    /// Angle between `v` and that eigenspace.
    pub angle: f64,
    pub aligned: bool,
}

/// Eigenvalues closer than this (relative) form one eigenspace: splits
/// below the oracle's own accuracy are not resolvable.
pub const EIGEN_CLUSTER_TOLERANCE: f64 = 1e-4;

/// Matches coordinate directions to Ricci eigenspaces.
pub fn match_directions(sample: &CurvatureSample, directions: &[(&str, Vec<f64>)]) -> Result<Vec<DirectionMatch>> {
    let g = sample.metric_matrix();
    let ric = sample.ricci_matrix();
    let (values, vectors, l) = relative_eigen(&g, &ric)?;
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for (i, v) in values.iter().enumerate() {
        match clusters.last_mut() {
            Some(c) if (v - values[c[0]]).abs() <= EIGEN_CLUSTER_TOLERANCE * v.abs().max(1.0) => c.push(i),
            _ => clusters.push(vec![i]),
        }
    }
    directions
        .iter()
        .map(|(label, dir)| {
            let v = DVector::from_column_slice(dir);
            let gvv = v.dot(&(&g * &v));
            let value = v.dot(&(&ric * &v)) / gvv;
            let u = l.transpose() * &v / gvv.sqrt();
            let (best, proj) = clusters
                .iter()
                .map(|c| (c, c.iter().map(|&i| vectors.column(i).dot(&u).powi(2)).sum::<f64>()))
                .max_by(|a, b| a.1.total_cmp(&b.1))
                .expect("at least one eigenvalue");
            let eigenvalue = best.iter().map(|&i| values[i]).sum::<f64>() / best.len() as f64;
            let angle = proj.min(1.0).sqrt().acos();
            Ok(DirectionMatch {
                label: label.to_string(),
                value,
                eigenvalue,
                angle,
                aligned: angle <= ALIGNMENT_THRESHOLD,
            })
        })
        .collect()
}

/// Minimum sectional curvature over `planes` random 2-planes at each of
/// `points` random points. Deterministic for a given seed.
pub fn sectional_min(metric: &ChartMetric, points: usize, planes: usize, seed: u64) -> Result<f64> {
    sectional_min_with_step(metric, points, planes, seed, DEFAULT_STEP)
}

pub fn sectional_min_with_step(
    metric: &ChartMetric,
    points: usize,
    planes: usize,
    seed: u64,
    step: f64,
) -> Result<f64> {
    Ok(sectional_range(metric, points, planes, seed, step)?.0)
}

/// `(min, max)` of sectional curvature over random planes at random points.
pub fn sectional_range(metric: &ChartMetric, points: usize, planes: usize, seed: u64, step: f64) -> Result<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = metric.dim;
    let (mut min, mut max) = (f64::INFINITY, f64::NEG_INFINITY);
    for _ in 0..points {
        let x = random_point(metric, &mut rng, 3.0 * step);
        let sample = ricci(metric, &x, step)?;
        for _ in 0..planes {
            let a: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let k = sample.sectional(&a, &b);
            min = min.min(k);
            max = max.max(k);
        }
    }
    Ok((min, max))
}

/// Tolerance of the frame calibration.
pub const CALIBRATION_TOLERANCE: f64 = 1e-3;

/// Checks that the Euler-angle block with `f = h = 1` is the unit round
/// `S³` (all sampled sectional curvatures `1 ± 1e-3`). Every comparison on
/// doubly warped charts depends on this normalisation.
pub fn calibrate_frame() -> Result<(f64, f64)> {
    let (lo, hi) = sectional_range(&chart_berger_s3(1.0, 1.0), 4, 16, 0, DEFAULT_STEP)?;
    if (lo - 1.0).abs() > CALIBRATION_TOLERANCE || (hi - 1.0).abs() > CALIBRATION_TOLERANCE {
        return Err(Error::Singular(format!(
            "frame calibration failed: unit S^3 sectional curvature sampled in [{lo}, {hi}]"
        )));
    }
    Ok((lo, hi))
}

/// A uniformly random point of the chart, at least `margin` inside.
pub fn random_point(metric: &ChartMetric, rng: &mut impl Rng, margin: f64) -> Vec<f64> {
    metric.valid_region.iter().map(|&(lo, hi)| rng.gen_range((lo + margin)..(hi - margin))).collect()
}

/// Euclidean metric on `[-1, 1]^d`.
pub fn chart_flat(d: usize) -> ChartMetric {
    ChartMetric::new(format!("flat-r{d}"), vec![(-1.0, 1.0); d], move |_| DMatrix::identity(d, d))
}

/// Unit round `S^d` in polar coordinates
/// `dx₁² + sin²x₁ dx₂² + sin²x₁ sin²x₂ dx₃² + …`.
pub fn chart_round_sphere(d: usize) -> ChartMetric {
    assert!(d >= 2, "round sphere chart needs d >= 2");
    let mut region = vec![(0.2, std::f64::consts::PI - 0.2); d - 1];
    region.push((0.0, 2.0 * std::f64::consts::PI));
    ChartMetric::new(format!("round-s{d}"), region, move |x| {
        let mut g = DMatrix::zeros(d, d);
        let mut scale = 1.0;
        for i in 0..d {
            g[(i, i)] = scale;
            scale *= x[i].sin().powi(2);
        }
        g
    })
}

/// The Hopf-fibred 3-sphere `(h²/4)(db² + sin²b da²) + (f²/4)(dc + cos b da)²`
/// in Euler angles `(a, b, c)`. With `f = h = 1` it is the unit round `S³`,
/// a Riemannian submersion onto `CP¹ = S²(1/2)`.
pub fn chart_berger_s3(fiber_scale: f64, base_scale: f64) -> ChartMetric {
    let region =
        vec![(0.0, 2.0 * std::f64::consts::PI), (0.2, std::f64::consts::PI - 0.2), (0.0, 4.0 * std::f64::consts::PI)];
    ChartMetric::new(format!("berger-s3(f={fiber_scale},h={base_scale})"), region, move |x| {
        hopf_block(x[1], fiber_scale, base_scale)
    })
}

/// Metric on the Euler-angle block `(a, b, c)`.
fn hopf_block(b: f64, f: f64, h: f64) -> DMatrix<f64> {
    let (sb, cb) = b.sin_cos();
    let (hh, ff) = (0.25 * h * h, 0.25 * f * f);
    DMatrix::from_row_slice(3, 3, &[hh * sb * sb + ff * cb * cb, 0.0, ff * cb, 0.0, hh, 0.0, ff * cb, 0.0, ff])
}

/// The doubly warped metric `dr² + h²(r)(σ₁² + σ₂²) + f²(r)σ₃²` on
/// `(r, a, b, c)`, where `σᵢ` is the left-invariant coframe of the unit
/// 3-sphere. Only the Hopf fibration `S¹ → S³ → CP¹` (`q = 1`, `m = 1`) has
/// a chart here.
///
/// Like the Euler angle `b`, the radius stays [`CONE_MARGIN`] away from the
/// cone point `r = 0`, where the second differences lose accuracy as
/// `step²/r⁴`; there the profiles are `sin` and the metric is round.
pub fn chart_doubly_warped(f: &Profile, h: &Profile, q: u32, m: u32) -> Result<ChartMetric> {
    if (q, m) != (1, 1) {
        return Err(Error::InvalidParam(format!("no oracle chart for (q, m) = ({q}, {m}); only (1, 1)")));
    }
    let lo = f.lo().max(h.lo()).max(CONE_MARGIN);
    let hi = f.hi().min(h.hi());
    if !(lo < hi) {
        return Err(Error::InvalidParam("profiles share no radial interval away from 0".into()));
    }
    let (f, h) = (f.clone(), h.clone());
    let pi = std::f64::consts::PI;
    let region = vec![(lo, hi), (0.0, 2.0 * pi), (0.2, pi - 0.2), (0.0, 4.0 * pi)];
    Ok(ChartMetric::new("doubly-warped(q=1,m=1)", region, move |x| {
        let r = x[0];
        let fv = f.eval(r).map(|j| j.value).unwrap_or(f64::NAN);
        let hv = h.eval(r).map(|j| j.value).unwrap_or(f64::NAN);
        let block = hopf_block(x[2], fv, hv);
        let mut g = DMatrix::zeros(4, 4);
        g[(0, 0)] = 1.0;
        g.view_mut((1, 1), (3, 3)).copy_from(&block);
        g
    }))
}

/// Smallest radius sampled on doubly warped charts.
pub const CONE_MARGIN: f64 = 0.2;

/// One closed-form versus oracle comparison.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub chart: String,
    pub point: Vec<f64>,
    pub component: String,
    pub closed_form: f64,
    pub oracle: f64,
    /// `|closed_form − oracle| / max(|closed_form|, 1)`.
    pub rel_err: f64,
    /// Angle between the frame direction and its Ricci eigenspace.
    pub alignment: f64,
}

pub fn rel_err(closed_form: f64, oracle: f64) -> f64 {
    (closed_form - oracle).abs() / closed_form.abs().max(1.0)
}

/// Largest radial step as a fraction of the local segment width.
pub const RADIAL_STEP_FRACTION: f64 = 2e-3;

/// Radial finite-difference step at `r`: `base`, reduced to
/// [`RADIAL_STEP_FRACTION`] of the shortest profile segment containing `r`
/// so narrow bridges are resolved.
pub fn radial_step(f: &Profile, h: &Profile, r: f64, base: f64) -> f64 {
    let width = [f, h]
        .iter()
        .flat_map(|p| p.segments().iter().filter(|s| s.from <= r && r <= s.to).map(|s| s.to - s.from))
        .fold(f64::INFINITY, f64::min);
    base.min(RADIAL_STEP_FRACTION * width)
}

/// Whether the radial stencil of half-width `2·step` at `r` stays inside
/// one segment of each profile. Across a knot the profiles are only `C²`
/// and second differences drop to first order.
pub fn stencil_clear(f: &Profile, h: &Profile, r: f64, step: f64) -> bool {
    f.knots().iter().chain(h.knots().iter()).all(|k| (k - r).abs() > 2.0 * step)
}

/// Random points of the doubly warped chart whose radial stencil avoids
/// the profile knots.
pub fn sample_doubly_warped(
    f: &Profile,
    h: &Profile,
    count: usize,
    seed: u64,
    base_step: f64,
) -> Result<Vec<Vec<f64>>> {
    let chart = chart_doubly_warped(f, h, 1, 1)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    for _ in 0..1000 * count.max(1) {
        if out.len() == count {
            break;
        }
        let x = random_point(&chart, &mut rng, 3.0 * base_step);
        if stencil_clear(f, h, x[0], radial_step(f, h, x[0], base_step)) {
            out.push(x);
        }
    }
    if out.len() < count {
        return Err(Error::InvalidParam("could not place sample points away from profile knots".into()));
    }
    Ok(out)
}

/// Radial, horizontal and fibre Ricci curvature of `g₁(f, h)` at the given
/// chart points, from the oracle and from the closed forms. The step at each
/// point is [`radial_step`] of `base_step`.
pub fn compare_doubly_warped(
    f: &Profile,
    h: &Profile,
    points: &[Vec<f64>],
    base_step: f64,
) -> Result<Vec<ComparisonRow>> {
    calibrate_frame()?;
    let chart = chart_doubly_warped(f, h, 1, 1)?;
    let mut rows = Vec::new();
    for x in points {
        let step = radial_step(f, h, x[0], base_step);
        if !stencil_clear(f, h, x[0], step) {
            return Err(Error::InvalidParam(format!("stencil at r = {} straddles a profile knot", x[0])));
        }
        let sample = ricci(&chart, x, step)?;
        let ric = ricci_g1(&f.eval(x[0])?, &h.eval(x[0])?, 1, 1)?;
        let dirs = [
            ("radial", vec![1.0, 0.0, 0.0, 0.0]),
            ("horizontal", vec![0.0, 0.0, 1.0, 0.0]),
            ("fiber", vec![0.0, 0.0, 0.0, 1.0]),
        ];
        let matches = match_directions(&sample, &dirs)?;
        for (m, cf) in matches.iter().zip([ric.radial, ric.horizontal, ric.fiber]) {
            rows.push(ComparisonRow {
                chart: chart.name.clone(),
                point: x.clone(),
                component: m.label.clone(),
                closed_form: cf,
                oracle: m.value,
                rel_err: rel_err(cf, m.value),
                alignment: m.angle,
            });
        }
    }
    Ok(rows)
}

/// Berger 3-sphere comparison against the `r`-independent closed forms
/// (horizontal, fibre) of `g₁` with constant `f = fiber_scale`, `h = 1`.
pub fn compare_berger(fiber_scale: f64, points: &[Vec<f64>], step: f64) -> Result<Vec<ComparisonRow>> {
    use crate::profiles::Jet2;
    let chart = chart_berger_s3(fiber_scale, 1.0);
    let ric = ricci_g1(&Jet2::constant(fiber_scale), &Jet2::constant(1.0), 1, 1)?;
    let mut rows = Vec::new();
    for x in points {
        let sample = ricci(&chart, x, step)?;
        let dirs = [("horizontal", vec![0.0, 1.0, 0.0]), ("fiber", vec![0.0, 0.0, 1.0])];
        for (m, cf) in match_directions(&sample, &dirs)?.iter().zip([ric.horizontal, ric.fiber]) {
            rows.push(ComparisonRow {
                chart: chart.name.clone(),
                point: x.clone(),
                component: m.label.clone(),
                closed_form: cf,
                oracle: m.value,
                rel_err: rel_err(cf, m.value),
                alignment: m.angle,
            });
        }
    }
    Ok(rows)
}
