//! Curvature-tensor fits and pointwise classification.

use nalgebra::{Complex, DMatrix, Schur};
use serde::Serialize;

use crate::chart::{covariant_derivative_r, curvature_bundle, DerivativePath, MetricChart};
use crate::error::{Error, Result};
use crate::linalg;
use crate::planes::{canonical_sign, random_orthonormal_frames, sample_degenerate_planes, PlaneKind};
use crate::scalar::{norm, Scalar};
use crate::tensor::{build_phi, build_pi1, SymmetricBilinear, Tensor4, Tensor5};

/// Least-squares `c` in `T ≈ c π₁` and the max-norm residual.
pub fn fit_c_pi1<S: Scalar>(t: &Tensor4<S>, g: &SymmetricBilinear<S>) -> Result<(S, S)> {
    let pi1 = build_pi1(g)?;
    let denom = pi1.frobenius(&pi1);
    let c = if denom == S::zero() {
        S::zero()
    } else {
        t.frobenius(&pi1) / denom
    };
    let residual = t.max_diff(&pi1.scaled(c));
    Ok((c, residual))
}

/// Outcome of a sampled plane or frame test.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampledVerdict {
    pub samples: usize,
    /// Largest normalized value found.
    pub max_value: f64,
    pub tol: f64,
    pub passed: bool,
}

/// Checks `|T(x,ξ,ξ,x)| <= tol ‖T‖ ‖basis‖⁴` on sampled degenerate planes.
pub fn degenerate_vanishing_test(
    t: &Tensor4<f64>,
    g: &SymmetricBilinear<f64>,
    kind: PlaneKind,
    samples: usize,
    tol: f64,
    seed: u64,
) -> Result<SampledVerdict> {
    let planes = sample_degenerate_planes(g, &[], kind, samples, seed)?;
    let scale = t.max_abs();
    let mut worst = 0.0f64;
    let mut passed = true;
    for p in &planes {
        let v = t.eval(&p.x, &p.y, &p.y, &p.x).abs();
        let b = p.basis_norm().powi(4);
        if v > tol * scale * b {
            passed = false;
        }
        if scale > 0.0 {
            worst = worst.max(v / (scale * b));
        }
    }
    Ok(SampledVerdict {
        samples: planes.len(),
        max_value: worst,
        tol,
        passed,
    })
}

/// Checks `|R(x,y,z,u)| < tol` over all ordered quadruples of distinct vectors
/// from random orthonormal frames.
pub fn orthonormal_quadruple_test(
    r: &Tensor4<f64>,
    g: &SymmetricBilinear<f64>,
    samples: usize,
    tol: f64,
    seed: u64,
) -> Result<SampledVerdict> {
    let n = g.dim();
    if n < 4 {
        return Err(Error::UnsupportedDimension(n, "orthonormal quadruples need n >= 4"));
    }
    let mut worst = 0.0f64;
    for f in random_orthonormal_frames(g, samples, seed) {
        let e = &f.vectors;
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        if a == b || a == c || a == d || b == c || b == d || c == d {
                            continue;
                        }
                        worst = worst.max(r.eval(&e[a], &e[b], &e[c], &e[d]).abs());
                    }
                }
            }
        }
    }
    Ok(SampledVerdict {
        samples,
        max_value: worst,
        tol,
        passed: worst < tol,
    })
}

/// Which branch the quasi-constant fit took.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum QuasiConstantBranch {
    /// Ricci operator has a simple eigenvalue and one of multiplicity `n-1`.
    QuasiConstant,
    /// Ricci proportional to `g`; `H = N = c` and `V` undetermined.
    ConstantCurvature,
    /// All eigenvalues coincide but Ricci is not proportional to `g`.
    NonDiagonalizable,
    /// Neither eigenvalue pattern is present, or the distinguished direction is null.
    NotQuasiConstant,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuasiConstantFit {
    pub branch: QuasiConstantBranch,
    pub h: f64,
    pub n: f64,
    /// Unit vector with first nonzero coordinate positive.
    pub v: Option<Vec<f64>>,
    /// `g(V, V) ∈ {-1, +1}`.
    pub epsilon: Option<i8>,
    /// `max |R - (N-H) φ(B) - H π₁|`.
    pub residual: f64,
    /// Mismatch of the Ricci eigenvalues predicted by `(H, N, ε)`.
    pub eigen_relation_residual: Option<f64>,
    pub ricci_eigenvalues: Vec<f64>,
    pub tol: f64,
    pub passed: bool,
}

/// Eigenvalues of a small real matrix via a capped Schur iteration.
///
/// The uncapped iteration can cycle on noisy matrices with a nearly repeated
/// eigenvalue, so a looser convergence threshold is tried before giving up.
fn operator_eigenvalues(a: DMatrix<f64>) -> Result<Vec<Complex<f64>>> {
    let n = a.nrows();
    for eps in [f64::EPSILON, 1e-12, 1e-9] {
        if let Some(schur) = Schur::try_new(a.clone(), eps, 200 * n) {
            return Ok(schur.complex_eigenvalues().iter().copied().collect());
        }
    }
    Err(Error::NoConvergence("Ricci operator eigenvalues".into()))
}

/// Fits `R = (N-H) φ(B) + H π₁` with `B = g(·,V) g(·,V)`.
///
/// `V` comes from the Ricci operator `g⁻¹S`: for the quasi-constant form
/// `S - α g = (β-α) ε V♭⊗V♭` with `α` the `(n-1)`-fold eigenvalue and `β` the
/// simple one, so any column of `S - αg` is proportional to `V♭`.
pub fn fit_quasi_constant(r: &Tensor4<f64>, g: &SymmetricBilinear<f64>, tol: f64) -> Result<QuasiConstantFit> {
    let n = g.dim();
    let ginv = g.inverse()?;
    let (ricci, _) = crate::tensor::contract_ricci(r, &ginv)?;
    let a = DMatrix::from_fn(n, n, |i, j| {
        (0..n).map(|k| ginv.get(i, k) * ricci.get(k, j)).sum::<f64>()
    });
    let eig = operator_eigenvalues(a)?;
    let scale = eig.iter().fold(r.max_abs(), |m, z| m.max(z.norm()));
    let cut = tol * scale.max(f64::MIN_POSITIVE);
    let mut vals: Vec<f64> = eig.iter().map(|z| z.re).collect();
    vals.sort_by(|x, y| x.partial_cmp(y).expect("finite eigenvalues"));
    let r_scale = r.max_abs();
    let pass_cut = |res: f64| res <= tol * r_scale.max(1e-300) || res == 0.0;
    let complex = eig.iter().any(|z| z.im.abs() > cut);

    let not_qc = |res: f64| QuasiConstantFit {
        branch: QuasiConstantBranch::NotQuasiConstant,
        h: f64::NAN,
        n: f64::NAN,
        v: None,
        epsilon: None,
        residual: res,
        eigen_relation_residual: None,
        ricci_eigenvalues: vals.clone(),
        tol,
        passed: false,
    };

    let spread = |xs: &[f64]| -> (f64, f64) {
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        (mean, xs.iter().fold(0.0f64, |m, v| m.max((v - mean).abs())))
    };

    if complex {
        let (c, res) = fit_c_pi1(r, g)?;
        let _ = c;
        return Ok(not_qc(res));
    }

    let (mean_all, spread_all) = spread(&vals);
    if spread_all <= cut {
        let (c, res) = fit_c_pi1(r, g)?;
        let diag = ricci.add_scaled(-mean_all, g)?.max_abs() <= cut * g.max_abs().max(1.0);
        let branch = if diag {
            QuasiConstantBranch::ConstantCurvature
        } else {
            QuasiConstantBranch::NonDiagonalizable
        };
        let passed = diag && pass_cut(res);
        return Ok(QuasiConstantFit {
            branch,
            h: c,
            n: c,
            v: None,
            epsilon: None,
            residual: res,
            eigen_relation_residual: None,
            ricci_eigenvalues: vals,
            tol,
            passed,
        });
    }

    // the simple eigenvalue sits at one end of the sorted list
    let mut best: Option<(f64, f64, f64)> = None;
    for simple in [0, n - 1] {
        let rest: Vec<f64> = (0..n).filter(|&i| i != simple).map(|i| vals[i]).collect();
        let (alpha, s) = spread(&rest);
        if best.is_none_or(|(_, _, bs)| s < bs) {
            best = Some((alpha, vals[simple], s));
        }
    }
    let (alpha, beta, s) = best.expect("two candidates examined");
    if s > cut {
        let (_, res) = fit_c_pi1(r, g)?;
        return Ok(not_qc(res));
    }
    let m = ricci.add_scaled(-alpha, g)?;
    let j = (0..n)
        .max_by(|&a, &b| m.get(a, a).abs().partial_cmp(&m.get(b, b).abs()).expect("finite"))
        .expect("n >= 2");
    // pick the column with the largest norm (robust when the diagonal is small)
    let col_norm = |c: usize| (0..n).map(|i| m.get(i, c).powi(2)).sum::<f64>();
    let j = (0..n).fold(j, |b, c| if col_norm(c) > col_norm(b) { c } else { b });
    let w: Vec<f64> = (0..n).map(|i| m.get(i, j)).collect();
    let v_raw = ginv.lower(&w);
    let gvv = g.apply(&v_raw, &v_raw);
    if gvv.abs() <= tol * norm(&v_raw).powi(2) * g.max_abs() {
        let (_, res) = fit_c_pi1(r, g)?;
        return Ok(not_qc(res));
    }
    let v = canonical_sign(v_raw.iter().map(|x| x / gvv.abs().sqrt()).collect::<Vec<f64>>());
    let eps: i8 = if gvv < 0.0 { -1 } else { 1 };
    let vf = g.lower(&v);
    let b = SymmetricBilinear::from_fn(n, |i, k| vf[i] * vf[k]);
    let phi = build_phi(g, &b)?;
    let pi1 = build_pi1(g)?;
    // R = N φ(B) + H (π₁ - φ(B))
    let u = &phi;
    let wt = pi1.add_scaled(-1.0, &phi)?;
    let (uu, uw, ww) = (u.frobenius(u), u.frobenius(&wt), wt.frobenius(&wt));
    let (ur, wr) = (u.frobenius(r), wt.frobenius(r));
    let det = uu * ww - uw * uw;
    if det.abs() <= 1e-14 * uu * ww {
        let (_, res) = fit_c_pi1(r, g)?;
        return Ok(not_qc(res));
    }
    let n_fit = (ur * ww - wr * uw) / det;
    let h_fit = (wr * uu - ur * uw) / det;
    let model = phi.scaled(n_fit - h_fit).add_scaled(h_fit, &pi1)?;
    let residual = r.max_diff(&model);
    let nf = n as f64;
    let e = eps as f64;
    let alpha_pred = (n_fit - h_fit) * e + (nf - 1.0) * h_fit;
    let beta_pred = alpha_pred + (n_fit - h_fit) * (nf - 2.0) * e;
    let rel = (alpha - alpha_pred).abs().max((beta - beta_pred).abs());
    let passed = pass_cut(residual);
    Ok(QuasiConstantFit {
        branch: QuasiConstantBranch::QuasiConstant,
        h: h_fit,
        n: n_fit,
        v: Some(v),
        epsilon: Some(eps),
        residual,
        eigen_relation_residual: Some(rel),
        ricci_eigenvalues: vals,
        tol,
        passed,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RecurrenceMode {
    Recurrent,
    SymmetricKnStar,
    Symmetric,
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecurrenceFit {
    pub mode: RecurrenceMode,
    /// Recurrent: least-squares `α`; SymmetricKnStar: a unit kernel vector.
    pub alpha: Option<Vec<f64>>,
    /// Recurrent / None: `‖∇R - α⊗R‖ / ‖∇R‖`; symmetric modes: `‖∇R‖ / ‖R‖`.
    pub residual: f64,
    /// Dimension of the kernel of the cyclic system (symmetric modes only).
    pub cyclic_kernel_dim: Option<usize>,
    /// Singular values of the cyclic system, ascending (symmetric modes only).
    pub cyclic_singular_values: Option<Vec<f64>>,
    pub tol: f64,
}

/// Absolute max-norm below which `R` counts as zero.
pub const FLAT_TOL: f64 = 1e-10;

/// Detects `∇R = α⊗R` or `∇R = 0` with a cyclic annihilator `α`.
pub fn fit_recurrence(chart: &MetricChart<f64>, p: &[f64], tol: f64) -> Result<RecurrenceFit> {
    let b = curvature_bundle(chart, p)?;
    let nabla = covariant_derivative_r(chart, p)?;
    recurrence_from(&b.riemann, &nabla, tol)
}

/// [`fit_recurrence`] on precomputed `R` and `∇R`.
pub fn recurrence_from(r: &Tensor4<f64>, nabla: &Tensor5<f64>, tol: f64) -> Result<RecurrenceFit> {
    let n = r.dim();
    if r.max_abs() <= FLAT_TOL {
        return Err(Error::Flat);
    }
    let rr = r.frobenius(r);
    let r_norm = rr.sqrt();
    let nabla_norm = nabla.as_slice().iter().map(|v| v * v).sum::<f64>().sqrt();
    if nabla_norm < tol * r_norm {
        let (kernel, svals) = cyclic_kernel(r, tol);
        let mode = if kernel.is_empty() {
            RecurrenceMode::Symmetric
        } else {
            RecurrenceMode::SymmetricKnStar
        };
        return Ok(RecurrenceFit {
            mode,
            alpha: kernel.first().cloned(),
            residual: nabla_norm / r_norm,
            cyclic_kernel_dim: Some(kernel.len()),
            cyclic_singular_values: Some(svals),
            tol,
        });
    }
    let alpha: Vec<f64> = (0..n).map(|e| nabla.slice(e).frobenius(r) / rr).collect();
    let mut res = 0.0;
    for (e, a) in alpha.iter().enumerate() {
        let d = nabla.slice(e).add_scaled(-a, r)?;
        res += d.frobenius(&d);
    }
    let residual = res.sqrt() / nabla_norm;
    let mode = if residual < tol && norm(&alpha) > tol {
        RecurrenceMode::Recurrent
    } else {
        RecurrenceMode::None
    };
    Ok(RecurrenceFit {
        mode,
        alpha: Some(alpha),
        residual,
        cyclic_kernel_dim: None,
        cyclic_singular_values: None,
        tol,
    })
}

/// Kernel of `α ↦ α(X)R(Y,Z,U,V) + α(Y)R(Z,X,U,V) + α(Z)R(X,Y,U,V)` via the
/// eigen-decomposition of `MᵀM`. Singular values below `tol · ‖R‖_max`
/// count as zero.
fn cyclic_kernel(r: &Tensor4<f64>, tol: f64) -> (Vec<Vec<f64>>, Vec<f64>) {
    let n = r.dim();
    let mut mtm = vec![0.0; n * n];
    let mut row = vec![0.0; n];
    for x in 0..n {
        for y in 0..n {
            for z in 0..n {
                for u in 0..n {
                    for v in 0..n {
                        row.iter_mut().for_each(|c| *c = 0.0);
                        row[x] += r.get(y, z, u, v);
                        row[y] += r.get(z, x, u, v);
                        row[z] += r.get(x, y, u, v);
                        for i in 0..n {
                            for j in 0..n {
                                mtm[i * n + j] += row[i] * row[j];
                            }
                        }
                    }
                }
            }
        }
    }
    let (vals, vecs) = linalg::symmetric_eigen(n, &mtm);
    let svals: Vec<f64> = vals.iter().map(|v| v.max(0.0).sqrt()).collect();
    let cut = tol * r.max_abs();
    let kernel = svals
        .iter()
        .zip(vecs)
        .filter(|(s, _)| **s < cut)
        .map(|(_, v)| canonical_sign(v))
        .collect();
    (kernel, svals)
}

/// Fit tolerances for [`classify_point`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances {
    /// Relative tolerance for the `cπ₁` and quasi-constant fits.
    pub fit: f64,
    /// Conformal flatness: Weyl/Cotton max-norm below `conformal · max(1, ‖R‖)`.
    pub conformal: f64,
    /// Relative tolerance for the recurrence fit.
    pub recurrence: f64,
}

impl Tolerances {
    /// Defaults for the given derivative path.
    pub fn for_path(path: DerivativePath) -> Self {
        let t = match path {
            DerivativePath::Symbolic => 1e-6,
            DerivativePath::FiniteDifference => 1e-3,
        };
        Tolerances {
            fit: t,
            conformal: t,
            recurrence: t,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub passed: bool,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassificationReport {
    pub point: Vec<f64>,
    pub path: DerivativePath,
    pub tolerances: Tolerances,
    /// Constant curvature `R = cπ₁`.
    pub c: f64,
    pub constant_curvature: Verdict,
    pub quasi_constant: QuasiConstantFit,
    /// Weyl (n ≥ 4) or Cotton (n = 3) max-norm; every surface is conformally flat.
    pub conformally_flat: Verdict,
    /// `None` when `R` vanishes at the point.
    pub recurrence: Option<RecurrenceFit>,
    pub flat: bool,
    pub tags: Vec<String>,
}

/// Runs the fits in order constant curvature, quasi-constant, conformal
/// flatness, recurrence. Verdicts are independent of each other.
pub fn classify_point(chart: &MetricChart<f64>, p: &[f64], tol: Tolerances) -> Result<ClassificationReport> {
    let b = curvature_bundle(chart, p)?;
    let r_scale = b.riemann.max_abs();
    let flat = r_scale <= FLAT_TOL;
    let (c, cres) = fit_c_pi1(&b.riemann, &b.metric)?;
    let constant_curvature = Verdict {
        passed: cres <= tol.fit * r_scale.max(1.0),
        residual: cres,
    };
    let quasi_constant = fit_quasi_constant(&b.riemann, &b.metric, tol.fit)?;
    let obstruction = b.conformal_obstruction().unwrap_or(0.0);
    let conformally_flat = Verdict {
        passed: obstruction <= tol.conformal * r_scale.max(1.0),
        residual: obstruction,
    };
    let recurrence = if flat {
        None
    } else {
        let nabla = covariant_derivative_r(chart, p)?;
        Some(recurrence_from(&b.riemann, &nabla, tol.recurrence)?)
    };
    let mut tags = Vec::new();
    if flat {
        tags.push("flat");
    }
    if constant_curvature.passed {
        tags.push("constant_curvature");
    }
    if quasi_constant.passed {
        tags.push("quasi_constant");
    }
    if conformally_flat.passed {
        tags.push("conformally_flat");
    }
    match recurrence.as_ref().map(|r| r.mode) {
        Some(RecurrenceMode::Recurrent) => tags.push("recurrent"),
        Some(RecurrenceMode::SymmetricKnStar) => tags.push("symmetric_kn_star"),
        Some(RecurrenceMode::Symmetric) => tags.push("symmetric"),
        _ => {}
    }
    if tags.is_empty() {
        tags.push("generic");
    }
    Ok(ClassificationReport {
        point: p.to_vec(),
        path: chart.path(),
        tolerances: tol,
        c,
        constant_curvature,
        quasi_constant,
        conformally_flat,
        recurrence,
        flat,
        tags: tags.into_iter().map(String::from).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn metric(d: &[f64]) -> SymmetricBilinear<f64> {
        SymmetricBilinear::diagonal(d)
    }

    #[test]
    fn c_pi1_fit_examples() {
        let g = metric(&[-1.0, 1.0, 1.0, 1.0]);
        let pi1 = build_pi1(&g).unwrap();
        let (c, res) = fit_c_pi1(&pi1.scaled(3.0), &g).unwrap();
        assert!((c - 3.0).abs() < 1e-14 && res < 1e-14);
        let (c, res) = fit_c_pi1(&Tensor4::zeros(4), &g).unwrap();
        assert_eq!((c, res), (0.0, 0.0));
    }

    #[test]
    fn quasi_constant_on_model_tensors() {
        let g = metric(&[-1.0, 1.0, 1.0, 1.0]);
        let pi1 = build_pi1(&g).unwrap();
        let fit = fit_quasi_constant(&pi1.scaled(2.0), &g, 1e-9).unwrap();
        assert_eq!(fit.branch, QuasiConstantBranch::ConstantCurvature);
        assert!((fit.h - 2.0).abs() < 1e-12 && (fit.n - 2.0).abs() < 1e-12 && fit.v.is_none());

        // R = (N - H) φ(B) + H π₁ with spacelike V = e2
        let v = [0.0, 0.0, 1.0, 0.0];
        let vf = g.lower(&v);
        let b = SymmetricBilinear::from_fn(4, |i, j| vf[i] * vf[j]);
        let r = build_phi(&g, &b)
            .unwrap()
            .scaled(0.7 - 1.3)
            .add_scaled(1.3, &pi1)
            .unwrap();
        let fit = fit_quasi_constant(&r, &g, 1e-9).unwrap();
        assert_eq!(fit.branch, QuasiConstantBranch::QuasiConstant);
        assert!((fit.h - 1.3).abs() < 1e-12 && (fit.n - 0.7).abs() < 1e-12, "{fit:?}");
        assert_eq!(fit.epsilon, Some(1));
        assert!(fit.residual < 1e-12 && fit.eigen_relation_residual.unwrap() < 1e-12);
        let got = fit.v.unwrap();
        assert!((got[2] - 1.0).abs() < 1e-12);

        // timelike V
        let v = [1.0, 0.0, 0.0, 0.0];
        let vf = g.lower(&v);
        let b = SymmetricBilinear::from_fn(4, |i, j| vf[i] * vf[j]);
        let r = build_phi(&g, &b).unwrap().scaled(0.5).add_scaled(-0.2, &pi1).unwrap();
        let fit = fit_quasi_constant(&r, &g, 1e-9).unwrap();
        assert_eq!(fit.epsilon, Some(-1));
        assert!((fit.h + 0.2).abs() < 1e-12 && (fit.n - 0.3).abs() < 1e-12);
    }

    #[test]
    fn reassembly_identity() {
        let g = SymmetricBilinear::from_fn(4, |i, j| if i == j { [-1.5, 1.0, 2.0, 0.8][i] } else { 0.1 });
        let pi1 = build_pi1(&g).unwrap();
        let v = [0.3, 0.5, -0.2, 0.9];
        let vf = g.lower(&v);
        let b = SymmetricBilinear::from_fn(4, |i, j| vf[i] * vf[j]);
        let r = build_phi(&g, &b).unwrap().scaled(-0.4).add_scaled(0.9, &pi1).unwrap();
        let fit = fit_quasi_constant(&r, &g, 1e-8).unwrap();
        let vv = fit.v.clone().unwrap();
        let vf = g.lower(&vv);
        let bb = SymmetricBilinear::from_fn(4, |i, j| vf[i] * vf[j]);
        let model = build_phi(&g, &bb)
            .unwrap()
            .scaled(fit.n - fit.h)
            .add_scaled(fit.h, &pi1)
            .unwrap();
        assert!((r.max_diff(&model) - fit.residual).abs() < 1e-14);
        assert!(fit.passed);
    }

    #[test]
    fn scale_equivariance_of_c_fit() {
        let g = metric(&[-1.0, -1.0, 1.0, 1.0]);
        let t = Tensor4::from_fn(4, |a, b, c, d| ((a * 7 + b * 5 + c * 3 + d) % 11) as f64 * 0.01);
        let (c1, r1) = fit_c_pi1(&t, &g).unwrap();
        let (c2, r2) = fit_c_pi1(&t.scaled(3.0), &g).unwrap();
        assert!((c2 - 3.0 * c1).abs() < 1e-14 && (r2 - 3.0 * r1).abs() < 1e-14);
    }

    #[test]
    fn degenerate_tests_on_pi1() {
        let g = metric(&[-1.0, -1.0, 1.0, 1.0]);
        let pi1 = build_pi1(&g).unwrap();
        for kind in [PlaneKind::Weak, PlaneKind::Strong] {
            assert!(degenerate_vanishing_test(&pi1, &g, kind, 20, 1e-10, 1).unwrap().passed);
        }
        assert!(orthonormal_quadruple_test(&pi1, &g, 10, 1e-10, 1).unwrap().passed);
        let flat = Tensor4::zeros(4);
        assert!(
            degenerate_vanishing_test(&flat, &g, PlaneKind::Weak, 5, 1e-10, 1)
                .unwrap()
                .passed
        );
        assert!(orthonormal_quadruple_test(&pi1, &metric(&[1.0, 1.0, 1.0]), 1, 1e-10, 1).is_err());
    }

    #[test]
    fn cyclic_kernel_of_pi1_is_trivial() {
        let g = metric(&[-1.0, 1.0, 1.0, 1.0]);
        let (k, s) = cyclic_kernel(&build_pi1(&g).unwrap(), 1e-8);
        assert!(k.is_empty(), "{s:?}");
    }
}
