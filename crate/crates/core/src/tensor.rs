//! Dense multilinear algebra on small dimensions.
//!
//! Tensors are stored fully dense in row-major order; with `n <= 6` a
//! `(0,4)` tensor has at most 1296 entries.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg;
use crate::scalar::Scalar;

pub const MIN_DIM: usize = 2;
pub const MAX_DIM: usize = 6;

fn check_dim(dim: usize) -> Result<()> {
    if (MIN_DIM..=MAX_DIM).contains(&dim) {
        Ok(())
    } else {
        Err(Error::UnsupportedDimension(dim, "2..=6"))
    }
}

fn same_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

/// Symmetric `(0,2)` tensor. Houses the metric, Ricci, `Q`, `B` and `P`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SymmetricBilinear<S> {
    dim: usize,
    values: Vec<S>,
}

impl<S: Scalar> SymmetricBilinear<S> {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            values: vec![S::zero(); dim * dim],
        }
    }

    /// Builds from the upper triangle; `f(i, j)` is only called for `i <= j`.
    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> S) -> Self {
        let mut values = vec![S::zero(); dim * dim];
        for i in 0..dim {
            for j in i..dim {
                let v = f(i, j);
                values[i * dim + j] = v;
                values[j * dim + i] = v;
            }
        }
        Self { dim, values }
    }

    pub fn diagonal(entries: &[S]) -> Self {
        Self::from_fn(entries.len(), |i, j| if i == j { entries[i] } else { S::zero() })
    }

    /// Diagonal `±1` form with `negative` leading minus signs.
    pub fn signature_form(negative: usize, dim: usize) -> Self {
        Self::from_fn(dim, |i, j| match (i == j, i < negative) {
            (false, _) => S::zero(),
            (true, true) => -S::one(),
            (true, false) => S::one(),
        })
    }

    /// Builds from a row-major matrix, rejecting asymmetry above `tol` (relative)
    /// and averaging the two triangles otherwise.
    pub fn from_matrix(dim: usize, matrix: &[S], tol: S) -> Result<Self> {
        same_dim(dim * dim, matrix.len())?;
        let scale = crate::scalar::max_abs(matrix).max(S::min_positive_value());
        for i in 0..dim {
            for j in i + 1..dim {
                if (matrix[i * dim + j] - matrix[j * dim + i]).abs() > tol * scale {
                    return Err(Error::NotSymmetric(i, j));
                }
            }
        }
        let half = S::lit(0.5);
        Ok(Self::from_fn(dim, |i, j| {
            half * (matrix[i * dim + j] + matrix[j * dim + i])
        }))
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> S {
        self.values[i * self.dim + j]
    }

    /// Row-major entries.
    pub fn as_slice(&self) -> &[S] {
        &self.values
    }

    /// `B(x, y)`.
    pub fn apply(&self, x: &[S], y: &[S]) -> S {
        let n = self.dim;
        let mut acc = S::zero();
        for i in 0..n {
            if x[i] == S::zero() {
                continue;
            }
            let mut row = S::zero();
            for j in 0..n {
                row += self.values[i * n + j] * y[j];
            }
            acc += x[i] * row;
        }
        acc
    }

    /// Index lowering `x ↦ B(x, ·)`.
    pub fn lower(&self, x: &[S]) -> Vec<S> {
        linalg::mat_vec(self.dim, &self.values, x)
    }

    pub fn scaled(&self, factor: S) -> Self {
        Self {
            dim: self.dim,
            values: self.values.iter().map(|v| *v * factor).collect(),
        }
    }

    /// `self + factor * other`.
    pub fn add_scaled(&self, factor: S, other: &Self) -> Result<Self> {
        same_dim(self.dim, other.dim)?;
        Ok(Self {
            dim: self.dim,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| *a + factor * *b)
                .collect(),
        })
    }

    pub fn inverse(&self) -> Result<Self> {
        let inv = linalg::invert(self.dim, &self.values)?;
        let half = S::lit(0.5);
        let n = self.dim;
        Ok(Self::from_fn(n, |i, j| half * (inv[i * n + j] + inv[j * n + i])))
    }

    pub fn det(&self) -> S {
        linalg::det(self.dim, &self.values)
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<S> {
        linalg::symmetric_eigen(self.dim, &self.values).0
    }

    /// `g`-trace `Σ g^{ij} B_ij` given the inverse metric.
    pub fn trace_with(&self, g_inv: &Self) -> S {
        self.values.iter().zip(&g_inv.values).map(|(a, b)| *a * *b).sum()
    }

    pub fn max_abs(&self) -> S {
        crate::scalar::max_abs(&self.values)
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(S) -> T) -> SymmetricBilinear<T> {
        SymmetricBilinear {
            dim: self.dim,
            values: self.values.iter().map(|v| f(*v)).collect(),
        }
    }
}

macro_rules! dense_tensor {
    ($name:ident, $rank:expr, $doc:literal) => {
        #[doc = $doc]
        #[derive(Debug, Clone, PartialEq, Serialize)]
        pub struct $name<S> {
            dim: usize,
            values: Vec<S>,
        }

        impl<S: Scalar> $name<S> {
            pub fn zeros(dim: usize) -> Self {
                Self {
                    dim,
                    values: vec![S::zero(); dim.pow($rank)],
                }
            }

            pub fn from_values(dim: usize, values: Vec<S>) -> Result<Self> {
                same_dim(dim.pow($rank), values.len())?;
                Ok(Self { dim, values })
            }

            #[inline]
            pub fn dim(&self) -> usize {
                self.dim
            }

            pub fn as_slice(&self) -> &[S] {
                &self.values
            }

            pub fn as_mut_slice(&mut self) -> &mut [S] {
                &mut self.values
            }

            pub fn max_abs(&self) -> S {
                crate::scalar::max_abs(&self.values)
            }

            pub fn scaled(&self, factor: S) -> Self {
                Self {
                    dim: self.dim,
                    values: self.values.iter().map(|v| *v * factor).collect(),
                }
            }

            /// `self + factor * other`.
            pub fn add_scaled(&self, factor: S, other: &Self) -> Result<Self> {
                same_dim(self.dim, other.dim)?;
                Ok(Self {
                    dim: self.dim,
                    values: self
                        .values
                        .iter()
                        .zip(&other.values)
                        .map(|(a, b)| *a + factor * *b)
                        .collect(),
                })
            }

            /// Componentwise (Frobenius) inner product.
            pub fn frobenius(&self, other: &Self) -> S {
                self.values.iter().zip(&other.values).map(|(a, b)| *a * *b).sum()
            }

            /// Max-norm of `self - other`.
            pub fn max_diff(&self, other: &Self) -> S {
                self.values
                    .iter()
                    .zip(&other.values)
                    .fold(S::zero(), |m, (a, b)| m.max((*a - *b).abs()))
            }

            pub fn map<T: Scalar>(&self, f: impl Fn(S) -> T) -> $name<T> {
                $name {
                    dim: self.dim,
                    values: self.values.iter().map(|v| f(*v)).collect(),
                }
            }
        }
    };
}

dense_tensor!(
    Tensor3,
    3,
    "Dense rank-3 array; Christoffel symbols `Γ^i_{jk}` and the Cotton tensor."
);
dense_tensor!(Tensor4, 4, "Dense `(0,4)` tensor at a point: `R`, `C`, `π₁`, `φ(Q)`.");
dense_tensor!(Tensor5, 5, "Dense rank-5 array indexed `[e][a][b][c][d]`; houses `∇R`.");

impl<S: Scalar> Tensor3<S> {
    #[inline]
    pub fn get(&self, a: usize, b: usize, c: usize) -> S {
        let n = self.dim;
        self.values[(a * n + b) * n + c]
    }

    #[inline]
    pub fn set(&mut self, a: usize, b: usize, c: usize, v: S) {
        let n = self.dim;
        self.values[(a * n + b) * n + c] = v;
    }
}

impl<S: Scalar> Tensor4<S> {
    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize, usize, usize) -> S) -> Self {
        let mut values = Vec::with_capacity(dim.pow(4));
        for a in 0..dim {
            for b in 0..dim {
                for c in 0..dim {
                    for d in 0..dim {
                        values.push(f(a, b, c, d));
                    }
                }
            }
        }
        Self { dim, values }
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize, c: usize, d: usize) -> S {
        let n = self.dim;
        self.values[((a * n + b) * n + c) * n + d]
    }

    #[inline]
    pub fn set(&mut self, a: usize, b: usize, c: usize, d: usize, v: S) {
        let n = self.dim;
        self.values[((a * n + b) * n + c) * n + d] = v;
    }

    /// `T(x, y, z, u)` on coordinate vectors.
    pub fn eval(&self, x: &[S], y: &[S], z: &[S], u: &[S]) -> S {
        let n = self.dim;
        let mut acc = S::zero();
        for a in 0..n {
            if x[a] == S::zero() {
                continue;
            }
            for b in 0..n {
                let xy = x[a] * y[b];
                if xy == S::zero() {
                    continue;
                }
                for c in 0..n {
                    let xyz = xy * z[c];
                    if xyz == S::zero() {
                        continue;
                    }
                    let base = ((a * n + b) * n + c) * n;
                    let mut inner = S::zero();
                    for d in 0..n {
                        inner += self.values[base + d] * u[d];
                    }
                    acc += xyz * inner;
                }
            }
        }
        acc
    }
}

impl<S: Scalar> Tensor5<S> {
    #[inline]
    pub fn get(&self, e: usize, a: usize, b: usize, c: usize, d: usize) -> S {
        let n = self.dim;
        self.values[(((e * n + a) * n + b) * n + c) * n + d]
    }

    #[inline]
    pub fn set(&mut self, e: usize, a: usize, b: usize, c: usize, d: usize, v: S) {
        let n = self.dim;
        self.values[(((e * n + a) * n + b) * n + c) * n + d] = v;
    }

    /// The `(0,4)` slice with the first (derivative) slot fixed.
    pub fn slice(&self, e: usize) -> Tensor4<S> {
        let m = self.dim.pow(4);
        Tensor4 {
            dim: self.dim,
            values: self.values[e * m..(e + 1) * m].to_vec(),
        }
    }
}

/// `π₁(z,u,v,w) = g(z,w) g(u,v) - g(z,v) g(u,w)`.
pub fn build_pi1<S: Scalar>(g: &SymmetricBilinear<S>) -> Result<Tensor4<S>> {
    check_dim(g.dim())?;
    Ok(Tensor4::from_fn(g.dim(), |z, u, v, w| {
        g.get(z, w) * g.get(u, v) - g.get(z, v) * g.get(u, w)
    }))
}

/// `φ(Q)(x,y,z,u) = g(x,u)Q(y,z) - g(x,z)Q(y,u) + g(y,z)Q(x,u) - g(y,u)Q(x,z)`.
pub fn build_phi<S: Scalar>(g: &SymmetricBilinear<S>, q: &SymmetricBilinear<S>) -> Result<Tensor4<S>> {
    check_dim(g.dim())?;
    same_dim(g.dim(), q.dim())?;
    Ok(Tensor4::from_fn(g.dim(), |x, y, z, u| {
        g.get(x, u) * q.get(y, z) - g.get(x, z) * q.get(y, u) + g.get(y, z) * q.get(x, u) - g.get(y, u) * q.get(x, z)
    }))
}

/// Max-norm violations of the curvature-like identities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SymmetryReport<S> {
    /// `T(x,y,z,u) = -T(y,x,z,u)`
    pub first_pair: S,
    /// Cyclic sum over the first three slots.
    pub bianchi: S,
    /// `T(x,y,z,u) = -T(x,y,u,z)`
    pub last_pair: S,
    /// Derived `T(x,y,z,u) = T(z,u,x,y)`.
    pub pair_exchange: S,
    pub tol: S,
    pub passed: bool,
}

impl<S: Scalar> SymmetryReport<S> {
    pub fn max_violation(&self) -> S {
        self.first_pair
            .max(self.bianchi)
            .max(self.last_pair)
            .max(self.pair_exchange)
    }
}

pub fn check_curvature_symmetries<S: Scalar>(t: &Tensor4<S>, tol: S) -> SymmetryReport<S> {
    let n = t.dim();
    let (mut first, mut cyc, mut last, mut pair) = (S::zero(), S::zero(), S::zero(), S::zero());
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    let v = t.get(a, b, c, d);
                    first = first.max((v + t.get(b, a, c, d)).abs());
                    last = last.max((v + t.get(a, b, d, c)).abs());
                    cyc = cyc.max((v + t.get(b, c, a, d) + t.get(c, a, b, d)).abs());
                    pair = pair.max((v - t.get(c, d, a, b)).abs());
                }
            }
        }
    }
    let passed = first < tol && cyc < tol && last < tol && pair < tol;
    SymmetryReport {
        first_pair: first,
        bianchi: cyc,
        last_pair: last,
        pair_exchange: pair,
        tol,
        passed,
    }
}

/// Ricci contraction `S(y,z) = Σ g^{ik} T(e_i, y, z, e_k)` and its trace `τ`.
pub fn contract_ricci<S: Scalar>(t: &Tensor4<S>, g_inv: &SymmetricBilinear<S>) -> Result<(SymmetricBilinear<S>, S)> {
    same_dim(t.dim(), g_inv.dim())?;
    let n = t.dim();
    let det = g_inv.det();
    if det.abs() <= S::epsilon() * g_inv.max_abs().powi(n as i32) || !det.is_finite() {
        return Err(Error::Singular(det.as_f64()));
    }
    let half = S::lit(0.5);
    let raw = |y: usize, z: usize| -> S {
        let mut acc = S::zero();
        for i in 0..n {
            for k in 0..n {
                let gi = g_inv.get(i, k);
                if gi != S::zero() {
                    acc += gi * t.get(i, y, z, k);
                }
            }
        }
        acc
    };
    let ricci = SymmetricBilinear::from_fn(n, |y, z| half * (raw(y, z) + raw(z, y)));
    let scalar = ricci.trace_with(g_inv);
    Ok((ricci, scalar))
}

/// Weyl tensor `C = R - φ(S)/(n-2) + τ/((n-1)(n-2)) π₁` for `n >= 3`.
pub fn weyl_from<S: Scalar>(
    riemann: &Tensor4<S>,
    g: &SymmetricBilinear<S>,
    ricci: &SymmetricBilinear<S>,
    scalar: S,
) -> Result<Tensor4<S>> {
    let n = g.dim();
    if n < 3 {
        return Err(Error::UnsupportedDimension(n, "Weyl tensor needs n >= 3"));
    }
    let nf = S::lit(n as f64);
    let phi = build_phi(g, ricci)?;
    let pi1 = build_pi1(g)?;
    riemann
        .add_scaled(-S::one() / (nf - S::lit(2.0)), &phi)?
        .add_scaled(scalar / ((nf - S::one()) * (nf - S::lit(2.0))), &pi1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn e(n: usize, i: usize) -> Vec<f64> {
        let mut v = vec![0.0; n];
        v[i] = 1.0;
        v
    }

    #[test]
    fn pi1_on_orthonormal_pairs() {
        let g = SymmetricBilinear::<f64>::diagonal(&[1.0, 1.0, 1.0]);
        let p = build_pi1(&g).unwrap();
        assert_eq!(p.eval(&e(3, 0), &e(3, 1), &e(3, 1), &e(3, 0)), 1.0);

        let g = SymmetricBilinear::<f64>::diagonal(&[-1.0, 1.0, 1.0]);
        let p = build_pi1(&g).unwrap();
        assert_eq!(p.eval(&e(3, 0), &e(3, 1), &e(3, 1), &e(3, 0)), -1.0);
        let x = [0.3, -1.2, 0.7];
        assert_eq!(p.eval(&x, &x, &x, &x), 0.0);
    }

    #[test]
    fn phi_of_metric_is_twice_pi1() {
        let g = SymmetricBilinear::from_fn(4, |i, j| if i == j { 1.0 + i as f64 } else { 0.1 * (i + j) as f64 });
        let phi = build_phi(&g, &g).unwrap();
        let pi1 = build_pi1(&g).unwrap();
        assert!(phi.max_diff(&pi1.scaled(2.0)) < 1e-14);
        let zero = build_phi(&g, &SymmetricBilinear::zeros(4)).unwrap();
        assert_eq!(zero.max_abs(), 0.0);
    }

    #[test]
    fn phi_matches_index_loop_oracle() {
        // B(X,Y) = g(X,V) g(Y,V) with V = e2 in signature (1,3).
        let g = SymmetricBilinear::<f64>::diagonal(&[-1.0, 1.0, 1.0, 1.0]);
        let v = e(4, 2);
        let gv = g.lower(&v);
        let b = SymmetricBilinear::from_fn(4, |i, j| gv[i] * gv[j]);
        let phi = build_phi(&g, &b).unwrap();
        let gd = [-1.0, 1.0, 1.0, 1.0];
        let gm = |i: usize, j: usize| if i == j { gd[i] } else { 0.0 };
        let bm = |i: usize, j: usize| if i == 2 && j == 2 { 1.0 } else { 0.0 };
        for x in 0..4 {
            for y in 0..4 {
                for z in 0..4 {
                    for u in 0..4 {
                        let expect =
                            gm(x, u) * bm(y, z) - gm(x, z) * bm(y, u) + gm(y, z) * bm(x, u) - gm(y, u) * bm(x, z);
                        assert_eq!(phi.get(x, y, z, u), expect);
                    }
                }
            }
        }
        // sample entries: φ(B)(0,2,2,0) = g00 B22 = -1, φ(B)(1,2,2,1) = 1
        assert_eq!(phi.get(0, 2, 2, 0), -1.0);
        assert_eq!(phi.get(1, 2, 2, 1), 1.0);
    }

    #[test]
    fn symmetry_check_flags_single_entry_perturbation() {
        let g = SymmetricBilinear::<f64>::diagonal(&[-1.0, 1.0, 2.0, 1.0]);
        let mut t = build_pi1(&g).unwrap();
        let r = check_curvature_symmetries(&t, 1e-12);
        assert!(r.passed);
        assert_eq!(r.max_violation(), 0.0);
        let v = t.get(0, 1, 2, 3);
        t.set(0, 1, 2, 3, v + 1.0);
        let r = check_curvature_symmetries(&t, 1e-12);
        assert!(!r.passed);
        assert!(r.bianchi >= 1.0 || r.last_pair >= 1.0);
    }

    #[test]
    fn ricci_of_pi1_and_zero() {
        let g = SymmetricBilinear::<f64>::diagonal(&[-1.0, 1.0, 1.0, 1.0, 1.0]);
        let gi = g.inverse().unwrap();
        let (s, tau) = contract_ricci(&build_pi1(&g).unwrap(), &gi).unwrap();
        assert!(s.add_scaled(-4.0, &g).unwrap().max_abs() < 1e-14);
        assert_eq!(tau, 20.0);
        let (s, tau) = contract_ricci(&Tensor4::zeros(5), &gi).unwrap();
        assert_eq!(s.max_abs(), 0.0);
        assert_eq!(tau, 0.0);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let g = SymmetricBilinear::<f64>::diagonal(&[1.0, 1.0, 1.0]);
        let q = SymmetricBilinear::<f64>::diagonal(&[1.0, 1.0, 1.0, 1.0]);
        assert!(matches!(build_phi(&g, &q), Err(Error::DimensionMismatch { .. })));
        let big = SymmetricBilinear::<f64>::diagonal(&[1.0; 7]);
        assert!(build_pi1(&big).is_err());
    }

    #[test]
    fn f32_pi1_is_curvature_like() {
        let g = SymmetricBilinear::<f32>::diagonal(&[-1.0, 1.0, 1.0]);
        let p = build_pi1(&g).unwrap();
        assert!(check_curvature_symmetries(&p, 1e-6).passed);
    }

    fn random_metric(dim: usize, neg: usize, seed: &[f64]) -> SymmetricBilinear<f64> {
        // g = L^T η L with L = I + small perturbation
        let eta = SymmetricBilinear::<f64>::signature_form(neg, dim);
        let l: Vec<f64> = (0..dim * dim)
            .map(|k| if k / dim == k % dim { 1.0 } else { 0.0 } + 0.3 * seed[k % seed.len()] * ((k * 7 % 5) as f64 - 2.0) / 2.0)
            .collect();
        SymmetricBilinear::from_fn(dim, |i, j| {
            (0..dim).map(|k| l[k * dim + i] * eta.get(k, k) * l[k * dim + j]).sum()
        })
    }

    proptest! {
        #[test]
        fn phi_and_pi1_are_curvature_like(
            dim in 3usize..=6,
            neg in 0usize..3,
            seed in proptest::collection::vec(-1.0f64..1.0, 8),
            q in proptest::collection::vec(-2.0f64..2.0, 36),
        ) {
            let g = random_metric(dim, neg.min(dim), &seed);
            let qq = SymmetricBilinear::from_fn(dim, |i, j| q[i * 6 + j]);
            let pi1 = build_pi1(&g).unwrap();
            let phi = build_phi(&g, &qq).unwrap();
            let scale = pi1.max_abs().max(1.0);
            prop_assert!(check_curvature_symmetries(&pi1, 1e-12 * scale).passed);
            prop_assert!(check_curvature_symmetries(&phi, 1e-12 * phi.max_abs().max(1.0)).passed);
        }

        #[test]
        fn ricci_of_phi_is_trace_identity(
            dim in 3usize..=6,
            neg in 0usize..3,
            seed in proptest::collection::vec(-1.0f64..1.0, 8),
            q in proptest::collection::vec(-2.0f64..2.0, 36),
        ) {
            let g = random_metric(dim, neg.min(dim), &seed);
            let gi = g.inverse().unwrap();
            let qq = SymmetricBilinear::from_fn(dim, |i, j| q[i * 6 + j]);
            let (s, _) = contract_ricci(&build_phi(&g, &qq).unwrap(), &gi).unwrap();
            let expect = qq.scaled((dim - 2) as f64).add_scaled(qq.trace_with(&gi), &g).unwrap();
            let diff = s.add_scaled(-1.0, &expect).unwrap().max_abs();
            prop_assert!(diff < 1e-10 * expect.max_abs().max(1.0));
        }

        #[test]
        fn pi1_vanishes_on_degenerate_pairs(
            a in -2.0f64..2.0, b in -2.0f64..2.0, w in 0.2f64..3.0,
        ) {
            // signature (1,2): ξ = w (e0 + e1), x = e2 + a ξ + b e... orthogonal to ξ
            let g = SymmetricBilinear::<f64>::diagonal(&[-1.0, 1.0, 1.0]);
            let xi = [w, w, 0.0];
            let x = [a * w, a * w, 1.0 + b * 0.0];
            prop_assert_eq!(g.apply(&xi, &xi), 0.0);
            prop_assert!(g.apply(&x, &xi).abs() < 1e-12);
            let p = build_pi1(&g).unwrap();
            prop_assert!(p.eval(&x, &xi, &xi, &x).abs() < 1e-12);
        }
    }
}
