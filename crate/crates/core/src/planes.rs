//! Tangent planes: degeneracy classes, sectional curvature, degenerate-plane
//! sampling and the ratio limit along planes approaching a degenerate one.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::chart::{curvature_bundle, MetricChart};
use crate::conformal::Diffeo;
use crate::error::{Error, Result};
use crate::linalg;
use crate::scalar::{dot, max_abs, norm, Scalar};
use crate::tensor::{SymmetricBilinear, Tensor4};

/// Default relative rank threshold for [`classify_plane`].
pub const DEFAULT_RANK_TOL: f64 = 1e-9;
/// Minimum normalized Gram determinant of independent spanning vectors.
const INDEPENDENCE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PlaneKind {
    Weak,
    Strong,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PlaneTag {
    Nondegenerate,
    WeaklyDegenerate,
    StronglyDegenerate,
}

/// A point together with two independent tangent vectors.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TangentPlane<S> {
    pub point: Vec<S>,
    pub x: Vec<S>,
    pub y: Vec<S>,
}

impl<S: Scalar> TangentPlane<S> {
    pub fn new(point: Vec<S>, x: Vec<S>, y: Vec<S>) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::DimensionMismatch {
                expected: x.len(),
                found: y.len(),
            });
        }
        if !point.is_empty() && point.len() != x.len() {
            return Err(Error::DimensionMismatch {
                expected: x.len(),
                found: point.len(),
            });
        }
        let plane = TangentPlane { point, x, y };
        if plane.euclidean_gram_det() <= S::lit(INDEPENDENCE_TOL) {
            return Err(Error::DependentVectors);
        }
        Ok(plane)
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    /// Gram determinant of the Euclidean-normalized spanning vectors.
    fn euclidean_gram_det(&self) -> S {
        let nx = norm(&self.x);
        let ny = norm(&self.y);
        if nx == S::zero() || ny == S::zero() {
            return S::zero();
        }
        let c = dot(&self.x, &self.y) / (nx * ny);
        S::one() - c * c
    }

    /// Same plane spanned by `(a x + b y, c x + d y)`.
    pub fn rebased(&self, a: S, b: S, c: S, d: S) -> Result<Self> {
        let comb = |p: S, q: S| -> Vec<S> { self.x.iter().zip(&self.y).map(|(u, v)| p * *u + q * *v).collect() };
        TangentPlane::new(self.point.clone(), comb(a, b), comb(c, d))
    }

    /// Largest Euclidean norm of the two spanning vectors.
    pub fn basis_norm(&self) -> S {
        norm(&self.x).max(norm(&self.y))
    }
}

/// Degeneracy class of a plane.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlaneClass<S> {
    pub tag: PlaneTag,
    /// Euclidean-unit isotropic direction orthogonal to the plane; for strongly
    /// degenerate planes every direction qualifies and the first basis vector is returned.
    pub isotropic_direction: Option<Vec<S>>,
    /// Eigenvalues of the Gram matrix of the Euclidean-normalized basis.
    pub gram_eigenvalues: [S; 2],
    pub threshold: S,
}

/// Rank of the restricted metric on `plane`.
///
/// The basis is Euclidean-normalized first; an eigenvalue of the 2×2 Gram
/// matrix counts as zero when below `tol` times the largest of the Gram
/// eigenvalues and the operator norm of `g`.
pub fn classify_plane<S: Scalar>(g: &SymmetricBilinear<S>, plane: &TangentPlane<S>, tol: S) -> Result<PlaneClass<S>> {
    if plane.dim() != g.dim() {
        return Err(Error::DimensionMismatch {
            expected: g.dim(),
            found: plane.dim(),
        });
    }
    if plane.euclidean_gram_det() <= S::lit(INDEPENDENCE_TOL) {
        return Err(Error::DependentVectors);
    }
    let x: Vec<S> = unit(&plane.x);
    let y: Vec<S> = unit(&plane.y);
    let gram = [g.apply(&x, &x), g.apply(&x, &y), g.apply(&x, &y), g.apply(&y, &y)];
    let (vals, vecs) = linalg::symmetric_eigen(2, &gram);
    let g_norm = max_abs(&g.eigenvalues());
    let scale = g_norm.max(vals[0].abs()).max(vals[1].abs());
    let threshold = tol * scale;
    let rank = vals.iter().filter(|v| v.abs() > threshold).count();
    let (tag, iso) = match rank {
        2 => (PlaneTag::Nondegenerate, None),
        1 => {
            // kernel eigenvector is the one with the smaller |eigenvalue|
            let k = if vals[0].abs() <= vals[1].abs() { 0 } else { 1 };
            let xi: Vec<S> = x
                .iter()
                .zip(&y)
                .map(|(a, b)| vecs[k][0] * *a + vecs[k][1] * *b)
                .collect();
            (PlaneTag::WeaklyDegenerate, Some(canonical_sign(unit(&xi))))
        }
        _ => (PlaneTag::StronglyDegenerate, Some(canonical_sign(x.clone()))),
    };
    Ok(PlaneClass {
        tag,
        isotropic_direction: iso,
        gram_eigenvalues: [vals[0], vals[1]],
        threshold,
    })
}

/// `π₁(x,y,y,x) = g(x,x) g(y,y) - g(x,y)²`.
pub fn pi1_on_plane<S: Scalar>(g: &SymmetricBilinear<S>, x: &[S], y: &[S]) -> S {
    let xy = g.apply(x, y);
    g.apply(x, x) * g.apply(y, y) - xy * xy
}

/// `K = R(x,y,y,x) / π₁(x,y,y,x)` on a nondegenerate plane.
pub fn sectional_curvature<S: Scalar>(r: &Tensor4<S>, g: &SymmetricBilinear<S>, plane: &TangentPlane<S>) -> Result<S> {
    let class = classify_plane(g, plane, S::lit(DEFAULT_RANK_TOL))?;
    if class.tag != PlaneTag::Nondegenerate {
        return Err(Error::DegeneratePlane(class.tag));
    }
    let (x, y) = (&plane.x, &plane.y);
    Ok(r.eval(x, y, y, x) / pi1_on_plane(g, x, y))
}

fn unit<S: Scalar>(v: &[S]) -> Vec<S> {
    let n = norm(v);
    v.iter().map(|a| *a / n).collect()
}

/// Flips `v` so its first non-negligible coordinate is positive.
pub(crate) fn canonical_sign<S: Scalar>(v: Vec<S>) -> Vec<S> {
    let cut = max_abs(&v) * S::lit(1e-12);
    let flip = matches!(v.iter().find(|a| a.abs() > cut), Some(a) if *a < S::zero());
    // adding zero also turns -0.0 into 0.0
    v.into_iter().map(|a| if flip { -a } else { a } + S::zero()).collect()
}

/// One `g`-orthonormal frame: vectors with `g(e_i, e_j) = ε_i δ_ij`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrthonormalFrame<S> {
    pub vectors: Vec<Vec<S>>,
    pub signs: Vec<i8>,
}

impl<S: Scalar> OrthonormalFrame<S> {
    fn indices_with_sign(&self, sign: i8) -> Vec<usize> {
        (0..self.signs.len()).filter(|&i| self.signs[i] == sign).collect()
    }
}

/// Random orthonormal frames from signature-respecting Gram–Schmidt.
///
/// Random vectors are drawn in coordinates where `g` is `diag(-1,…,-1,1,…,1)`;
/// a candidate with `|η(v,v)| < 0.1 |v|²` after projection is rejected and the
/// frame restarted.
pub fn random_orthonormal_frames<S: Scalar>(
    g: &SymmetricBilinear<S>,
    count: usize,
    seed: u64,
) -> Vec<OrthonormalFrame<S>> {
    let n = g.dim();
    let (vals, vecs) = linalg::symmetric_eigen(n, g.as_slice());
    // columns of E: eigenvectors scaled by 1/sqrt|λ|; then Eᵀ g E = diag(sign λ)
    let eta: Vec<S> = vals.iter().map(|v| v.signum()).collect();
    let scale: Vec<S> = vals.iter().map(|v| S::one() / v.abs().sqrt()).collect();
    let to_coords = |z: &[S]| -> Vec<S> {
        (0..n)
            .map(|k| (0..n).map(|i| z[i] * scale[i] * vecs[i][k]).sum())
            .collect()
    };
    let ip = |a: &[S], b: &[S]| -> S { (0..n).map(|i| eta[i] * a[i] * b[i]).sum() };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut frames = Vec::with_capacity(count);
    while frames.len() < count {
        let mut basis: Vec<(Vec<S>, S)> = Vec::with_capacity(n);
        let mut attempts = 0;
        while basis.len() < n && attempts < 64 {
            attempts += 1;
            let mut v: Vec<S> = (0..n).map(|_| S::lit(rng.gen_range(-1.0..1.0))).collect();
            for (e, s) in &basis {
                let c = ip(&v, e) * *s;
                for i in 0..n {
                    v[i] -= c * e[i];
                }
            }
            let q = ip(&v, &v);
            if q.abs() < S::lit(0.1) * dot(&v, &v) {
                continue;
            }
            let inv = S::one() / q.abs().sqrt();
            basis.push((v.iter().map(|a| *a * inv).collect(), q.signum()));
        }
        if basis.len() < n {
            continue;
        }
        frames.push(OrthonormalFrame {
            vectors: basis.iter().map(|(z, _)| to_coords(z)).collect(),
            signs: basis.iter().map(|(_, s)| if *s < S::zero() { -1 } else { 1 }).collect(),
        });
    }
    frames
}

fn require_signature<S: Scalar>(g: &SymmetricBilinear<S>, kind: PlaneKind) -> Result<()> {
    let (neg, pos) = crate::chart::signature_of(g);
    let ok = match kind {
        PlaneKind::Weak => neg >= 1 && pos >= 1 && neg + pos >= 3,
        PlaneKind::Strong => neg >= 2 && pos >= 2,
    };
    if ok {
        Ok(())
    } else {
        Err(Error::SignatureInsufficient {
            negative: neg,
            positive: pos,
            kind,
        })
    }
}

/// Reproducible degenerate planes at `point`.
///
/// Weak: `{x, ξ}` with `x` a unit frame vector and `ξ = u + v` built from a
/// spacelike and a timelike frame vector orthogonal to `x`.
/// Strong: `{ξ, η + cξ}` with `ξ = u₁ + v₁`, `η = u₂ + v₂`.
pub fn sample_degenerate_planes<S: Scalar>(
    g: &SymmetricBilinear<S>,
    point: &[S],
    kind: PlaneKind,
    count: usize,
    seed: u64,
) -> Result<Vec<TangentPlane<S>>> {
    require_signature(g, kind)?;
    let frames = random_orthonormal_frames(g, count, seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let add = |a: &[S], b: &[S]| -> Vec<S> { a.iter().zip(b).map(|(p, q)| *p + *q).collect() };
    frames
        .iter()
        .map(|f| {
            let neg = f.indices_with_sign(-1);
            let pos = f.indices_with_sign(1);
            match kind {
                PlaneKind::Weak => {
                    // x takes a sign class with a spare member so one of each sign remains
                    let x_from_neg = if neg.len() >= 2 && pos.len() >= 2 {
                        rng.gen_bool(0.5)
                    } else {
                        neg.len() >= 2
                    };
                    let (x, u, v) = if x_from_neg {
                        (neg[0], pos[0], neg[1])
                    } else {
                        (pos[0], pos[1], neg[0])
                    };
                    let xi = add(&f.vectors[u], &f.vectors[v]);
                    TangentPlane::new(point.to_vec(), f.vectors[x].clone(), xi)
                }
                PlaneKind::Strong => {
                    let xi = add(&f.vectors[pos[0]], &f.vectors[neg[0]]);
                    let eta = add(&f.vectors[pos[1]], &f.vectors[neg[1]]);
                    let c = S::lit(rng.gen_range(-0.5..0.5));
                    let eta: Vec<S> = eta.iter().zip(&xi).map(|(a, b)| *a + c * *b).collect();
                    TangentPlane::new(point.to_vec(), xi, eta)
                }
            }
        })
        .collect()
}

/// Result of the ratio-limit estimate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitEstimate {
    pub estimate: f64,
    /// Difference between the last two diagonal Richardson entries.
    pub error_indicator: f64,
    pub t_values: Vec<f64>,
    pub ratios: Vec<f64>,
    /// Families redrawn because a member left the nondegenerate locus.
    pub resamples: usize,
    pub converged: bool,
}

/// Parameterization of the approaching family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LimitFamily {
    /// `α_t = span{x + t w₁, ξ + t w₂}` with `t_k = t0 · 2^{-k}`.
    pub t0: f64,
    pub seed: u64,
    pub max_resamples: usize,
}

impl Default for LimitFamily {
    fn default() -> Self {
        LimitFamily {
            t0: 1e-2,
            seed: 0,
            max_resamples: 16,
        }
    }
}

/// Richardson columns used; deeper tables amplify rounding.
const RICHARDSON_COLUMNS: usize = 4;
/// Relative change between the last diagonal entries accepted as convergence.
const CONVERGENCE_TOL: f64 = 1e-4;

/// Estimates `lim K̄(f_*α_t)/K(α_t)` as `α_t` approaches the degenerate `plane0`.
///
/// `steps` halvings are taken after `t0`; the sequence of ratios is
/// extrapolated in powers of `t`.
pub fn limit_ratio_estimate(
    source: &MetricChart<f64>,
    target: &MetricChart<f64>,
    map: &Diffeo<f64>,
    plane0: &TangentPlane<f64>,
    family: LimitFamily,
    steps: usize,
) -> Result<LimitEstimate> {
    let p = &plane0.point;
    let n = source.dim();
    let src = curvature_bundle(source, p)?;
    let fp = map.apply(p);
    let tgt = curvature_bundle(target, &fp)?;
    let jac = map.jacobian(p)?;
    let push = |v: &[f64]| linalg::mat_vec(n, &jac, v);
    let class0 = classify_plane(&src.metric, plane0, DEFAULT_RANK_TOL)?;
    if class0.tag == PlaneTag::Nondegenerate {
        return Err(Error::InvalidParameter("limit base plane must be degenerate".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(family.seed);
    let scale = plane0.basis_norm();
    for attempt in 0..=family.max_resamples {
        let w1: Vec<f64> = (0..n).map(|_| scale * rng.gen_range(-1.0..1.0)).collect();
        let w2: Vec<f64> = (0..n).map(|_| scale * rng.gen_range(-1.0..1.0)).collect();
        let mut ts = Vec::with_capacity(steps + 1);
        let mut ratios = Vec::with_capacity(steps + 1);
        let mut ok = true;
        for k in 0..=steps {
            let t = family.t0 * 0.5f64.powi(k as i32);
            let x: Vec<f64> = plane0.x.iter().zip(&w1).map(|(a, b)| a + t * b).collect();
            let y: Vec<f64> = plane0.y.iter().zip(&w2).map(|(a, b)| a + t * b).collect();
            let (fx, fy) = (push(&x), push(&y));
            let Ok(plane) = TangentPlane::new(p.clone(), x.clone(), y.clone()) else {
                ok = false;
                break;
            };
            let Ok(image) = TangentPlane::new(fp.clone(), fx.clone(), fy.clone()) else {
                ok = false;
                break;
            };
            let nondeg = |g: &SymmetricBilinear<f64>, pl: &TangentPlane<f64>| {
                classify_plane(g, pl, DEFAULT_RANK_TOL)
                    .map(|c| c.tag == PlaneTag::Nondegenerate)
                    .unwrap_or(false)
            };
            if !nondeg(&src.metric, &plane) || !nondeg(&tgt.metric, &image) {
                ok = false;
                break;
            }
            let num = src.riemann.eval(&x, &y, &y, &x);
            let bar = tgt.riemann.eval(&fx, &fy, &fy, &fx);
            let pi = pi1_on_plane(&src.metric, &x, &y);
            let pibar = pi1_on_plane(&tgt.metric, &fx, &fy);
            if num == 0.0 || pibar == 0.0 {
                ok = false;
                break;
            }
            // K̄/K = (R̄/π̄₁) / (R/π₁)
            ts.push(t);
            ratios.push((bar / num) * (pi / pibar));
        }
        if !ok || ratios.iter().any(|r| !r.is_finite()) {
            continue;
        }
        let (estimate, error_indicator) = richardson(&ratios);
        let converged = error_indicator.is_finite() && error_indicator <= CONVERGENCE_TOL * estimate.abs().max(1.0);
        return Ok(LimitEstimate {
            estimate,
            error_indicator,
            t_values: ts,
            ratios,
            resamples: attempt,
            converged,
        });
    }
    Err(Error::FamilyExhausted(family.max_resamples))
}

/// Richardson extrapolation of samples at `t_k = t0 2^{-k}` assuming an
/// expansion in integer powers of `t`. Returns the estimate and the change
/// between the last two diagonal entries.
fn richardson(values: &[f64]) -> (f64, f64) {
    let m = values.len();
    let cols = RICHARDSON_COLUMNS.min(m);
    let mut table: Vec<Vec<f64>> = Vec::with_capacity(m);
    for (k, v) in values.iter().enumerate() {
        let mut row = vec![*v];
        for j in 1..cols.min(k + 1) {
            let f = 2f64.powi(j as i32);
            let prev: f64 = table[k - 1][j - 1];
            row.push((f * row[j - 1] - prev) / (f - 1.0));
        }
        table.push(row);
    }
    let last = table.last().expect("at least one sample");
    let est = *last.last().expect("non-empty row");
    let err = if m >= 2 {
        let before = &table[m - 2];
        let j = (last.len() - 1).min(before.len() - 1);
        (last[j] - before[j]).abs()
    } else {
        f64::INFINITY
    };
    (est, err)
}
