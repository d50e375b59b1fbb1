//! Metric charts and their derivative oracles.

mod curvature;
mod fd;

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::expr::{parse_metric_dsl, Differentiator, Expr, MetricGrid, Tape};
use crate::scalar::Scalar;
use crate::tensor::{SymmetricBilinear, MAX_DIM, MIN_DIM};

pub use curvature::{covariant_derivative_r, curvature_bundle, CurvatureBundle};

/// Seed for the construction-time signature sweep.
const SIGNATURE_SWEEP_SEED: u64 = 0x5157_a7e0;
const SIGNATURE_SWEEP_POINTS: usize = 16;
/// `|eigenvalue| < DEGENERACY_RATIO * max |eigenvalue|` counts as degenerate.
pub const DEGENERACY_RATIO: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DerivativePath {
    Symbolic,
    FiniteDifference,
}

impl fmt::Display for DerivativePath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DerivativePath::Symbolic => "symbolic",
            DerivativePath::FiniteDifference => "finite_difference",
        })
    }
}

/// Black-box metric evaluator returning the row-major `n × n` components.
pub type MetricFn<S> = Arc<dyn Fn(&[S]) -> Vec<S> + Send + Sync>;

struct Compiled {
    grid: MetricGrid,
    tape: Tape,
    g: Vec<u32>,
    d1: Vec<u32>,
    d2: Vec<u32>,
    d3: Vec<u32>,
    /// Tape prefix length needed for each derivative order.
    ends: [usize; 4],
}

impl Compiled {
    fn build(grid: MetricGrid) -> Self {
        let n = grid.dim;
        let mut diff = Differentiator::default();
        let mut tape = Tape::new();
        let mut ends = [0usize; 4];

        let upper: Vec<(usize, usize)> = (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect();
        let comp = |i: usize, j: usize| if i <= j { (i, j) } else { (j, i) };

        let base: Vec<Expr> = upper.iter().map(|&(i, j)| grid.get(i, j).clone()).collect();
        let slots0 = tape.push_all(base.iter());
        ends[0] = tape.len();

        // order k derivative trees keyed by sorted multi-index, per upper component
        let mut level: Vec<(Vec<usize>, Vec<Expr>)> = vec![(vec![], base)];
        let mut slots_by_order: Vec<Vec<(Vec<usize>, Vec<u32>)>> = vec![vec![(vec![], slots0)]];
        for order in 1..=3 {
            let mut next = Vec::new();
            for (multi, exprs) in &level {
                let start = multi.last().copied().unwrap_or(0);
                for k in start..n {
                    let d: Vec<Expr> = exprs.iter().map(|e| diff.diff(e, k)).collect();
                    let mut m = multi.clone();
                    m.push(k);
                    next.push((m, d));
                }
            }
            let slots: Vec<(Vec<usize>, Vec<u32>)> = next
                .iter()
                .map(|(m, ex)| (m.clone(), tape.push_all(ex.iter())))
                .collect();
            ends[order] = tape.len();
            slots_by_order.push(slots);
            level = next;
        }

        let lookup = |order: usize, multi: &[usize], i: usize, j: usize| -> u32 {
            let mut key = multi.to_vec();
            key.sort_unstable();
            let (a, b) = comp(i, j);
            let pos = upper.iter().position(|&u| u == (a, b)).unwrap();
            let entry = slots_by_order[order].iter().find(|(m, _)| *m == key).unwrap();
            entry.1[pos]
        };
        let mut g = Vec::with_capacity(n * n);
        let mut d1 = Vec::with_capacity(n.pow(3));
        let mut d2 = Vec::with_capacity(n.pow(4));
        let mut d3 = Vec::with_capacity(n.pow(5));
        for i in 0..n {
            for j in 0..n {
                g.push(lookup(0, &[], i, j));
            }
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    d1.push(lookup(1, &[k], i, j));
                }
            }
        }
        for k in 0..n {
            for l in 0..n {
                for i in 0..n {
                    for j in 0..n {
                        d2.push(lookup(2, &[k, l], i, j));
                    }
                }
            }
        }
        for k in 0..n {
            for l in 0..n {
                for m in 0..n {
                    for i in 0..n {
                        for j in 0..n {
                            d3.push(lookup(3, &[k, l, m], i, j));
                        }
                    }
                }
            }
        }
        Compiled {
            grid,
            tape,
            g,
            d1,
            d2,
            d3,
            ends,
        }
    }
}

#[derive(Clone)]
enum Source<S> {
    Symbolic(Arc<Compiled>),
    BlackBox(MetricFn<S>),
}

/// Metric derivatives at a point up to a requested order. Arrays are
/// row-major with derivative indices first: `d1[k][i][j] = ∂_k g_ij`.
#[derive(Debug, Clone)]
pub struct MetricJet<S> {
    pub dim: usize,
    pub order: usize,
    pub g: Vec<S>,
    pub d1: Vec<S>,
    pub d2: Vec<S>,
    pub d3: Vec<S>,
}

impl<S: Scalar> MetricJet<S> {
    #[inline]
    pub fn g(&self, i: usize, j: usize) -> S {
        self.g[i * self.dim + j]
    }
    #[inline]
    pub fn d1(&self, k: usize, i: usize, j: usize) -> S {
        let n = self.dim;
        self.d1[(k * n + i) * n + j]
    }
    #[inline]
    pub fn d2(&self, k: usize, l: usize, i: usize, j: usize) -> S {
        let n = self.dim;
        self.d2[((k * n + l) * n + i) * n + j]
    }
    #[inline]
    pub fn d3(&self, k: usize, l: usize, m: usize, i: usize, j: usize) -> S {
        let n = self.dim;
        self.d3[(((k * n + l) * n + m) * n + i) * n + j]
    }
}

/// A metric on a coordinate box with a derivative oracle of order 3.
#[derive(Clone)]
pub struct MetricChart<S> {
    name: String,
    dim: usize,
    domain: Vec<(f64, f64)>,
    source: Source<S>,
    path: DerivativePath,
    signature: (usize, usize),
}

impl<S: Scalar> fmt::Debug for MetricChart<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MetricChart")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("domain", &self.domain)
            .field("path", &self.path)
            .field("signature", &self.signature)
            .finish()
    }
}

impl<S: Scalar> MetricChart<S> {
    /// Symbolic chart from a parsed component grid.
    pub fn from_grid(name: impl Into<String>, grid: MetricGrid, domain: Vec<(f64, f64)>) -> Result<Self> {
        check_domain(grid.dim, &domain)?;
        for i in 0..grid.dim {
            for j in 0..grid.dim {
                if let Some(v) = grid.get(i, j).max_var() {
                    if v >= grid.dim {
                        return Err(Error::InvalidParameter(format!(
                            "component g[{i}][{j}] references x{v} beyond dim {}",
                            grid.dim
                        )));
                    }
                }
            }
        }
        let dim = grid.dim;
        let compiled = Arc::new(Compiled::build(grid));
        Self::finish(
            name.into(),
            dim,
            domain,
            Source::Symbolic(compiled),
            DerivativePath::Symbolic,
        )
    }

    pub fn from_dsl(name: impl Into<String>, text: &str, domain: Vec<(f64, f64)>) -> Result<Self> {
        Self::from_grid(name, parse_metric_dsl(text)?, domain)
    }

    /// Chart from a black-box evaluator; derivatives come from finite differences.
    pub fn from_fn(name: impl Into<String>, dim: usize, domain: Vec<(f64, f64)>, metric: MetricFn<S>) -> Result<Self> {
        check_domain(dim, &domain)?;
        Self::finish(
            name.into(),
            dim,
            domain,
            Source::BlackBox(metric),
            DerivativePath::FiniteDifference,
        )
    }

    fn finish(
        name: String,
        dim: usize,
        domain: Vec<(f64, f64)>,
        source: Source<S>,
        path: DerivativePath,
    ) -> Result<Self> {
        let mut chart = MetricChart {
            name,
            dim,
            domain,
            source,
            path,
            signature: (0, 0),
        };
        let mut first: Option<(usize, usize)> = None;
        for p in chart.sample_points(SIGNATURE_SWEEP_POINTS, SIGNATURE_SWEEP_SEED) {
            let sig = chart.signature_at(&p)?;
            match first {
                None => first = Some(sig),
                Some(f) if f != sig => return Err(Error::SignatureChange { first: f, other: sig }),
                _ => {}
            }
        }
        chart.signature = first.expect("sweep visits at least one point");
        Ok(chart)
    }

    /// Same metric with derivatives taken along `path`.
    pub fn with_path(&self, path: DerivativePath) -> Result<Self> {
        if path == DerivativePath::Symbolic && matches!(self.source, Source::BlackBox(_)) {
            return Err(Error::Derivative(
                "black-box charts only support finite differences".into(),
            ));
        }
        let mut c = self.clone();
        c.path = path;
        Ok(c)
    }

    pub fn renamed(&self, name: impl Into<String>) -> Self {
        let mut c = self.clone();
        c.name = name.into();
        c
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn domain(&self) -> &[(f64, f64)] {
        &self.domain
    }

    pub fn path(&self) -> DerivativePath {
        self.path
    }

    /// `(negative, positive)` eigenvalue counts, validated at construction.
    pub fn signature(&self) -> (usize, usize) {
        self.signature
    }

    /// Component expressions of a symbolic chart.
    pub fn grid(&self) -> Option<&MetricGrid> {
        match &self.source {
            Source::Symbolic(c) => Some(&c.grid),
            Source::BlackBox(_) => None,
        }
    }

    /// Size of the compiled evaluation tape (0 for black-box charts).
    pub fn tape_len(&self) -> usize {
        match &self.source {
            Source::Symbolic(c) => c.tape.len(),
            Source::BlackBox(_) => 0,
        }
    }

    pub fn contains(&self, p: &[S]) -> bool {
        p.len() == self.dim
            && p.iter().zip(&self.domain).all(|(x, (lo, hi))| {
                let x = x.as_f64();
                x.is_finite() && x >= *lo && x <= *hi
            })
    }

    fn check_point(&self, p: &[S]) -> Result<()> {
        if p.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: p.len(),
            });
        }
        if !self.contains(p) {
            return Err(Error::OutsideDomain {
                point: p.iter().map(|v| v.as_f64()).collect(),
            });
        }
        Ok(())
    }

    /// Reproducible interior sample points (inner 90% of each interval).
    pub fn sample_points(&self, count: usize, seed: u64) -> Vec<Vec<S>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count)
            .map(|_| {
                self.domain
                    .iter()
                    .map(|(lo, hi)| {
                        let w = hi - lo;
                        S::lit(lo + 0.05 * w + 0.9 * w * rng.gen::<f64>())
                    })
                    .collect()
            })
            .collect()
    }

    fn raw_metric(&self, p: &[S]) -> Vec<S> {
        match &self.source {
            Source::Symbolic(c) => {
                let vals = c.tape.eval(p, Some(c.ends[0]));
                c.g.iter().map(|&s| vals[s as usize]).collect()
            }
            Source::BlackBox(f) => f(p),
        }
    }

    /// Metric matrix at `p`, rejecting degenerate values.
    pub fn metric_at(&self, p: &[S]) -> Result<SymmetricBilinear<S>> {
        self.check_point(p)?;
        let raw = self.raw_metric(p);
        if raw.iter().any(|v| !v.is_finite()) {
            return Err(Error::Derivative(format!(
                "non-finite metric component at {:?}",
                p.iter().map(|v| v.as_f64()).collect::<Vec<_>>()
            )));
        }
        let g = SymmetricBilinear::from_matrix(self.dim, &raw, S::lit(1e-12))?;
        check_nondegenerate(&g)?;
        Ok(g)
    }

    /// Counts of negative and positive metric eigenvalues at `p`.
    pub fn signature_at(&self, p: &[S]) -> Result<(usize, usize)> {
        let g = self.metric_at(p)?;
        Ok(signature_of(&g))
    }

    /// Metric derivatives up to `order` (at most 3) along the chart's derivative path.
    pub fn jet(&self, p: &[S], order: usize) -> Result<MetricJet<S>> {
        assert!(order <= 3, "derivative oracle supports order <= 3");
        self.check_point(p)?;
        let n = self.dim;
        let jet = match (&self.source, self.path) {
            (Source::Symbolic(c), DerivativePath::Symbolic) => {
                let vals = c.tape.eval(p, Some(c.ends[order]));
                let pick = |slots: &[u32]| slots.iter().map(|&s| vals[s as usize]).collect();
                MetricJet {
                    dim: n,
                    order,
                    g: pick(&c.g),
                    d1: if order >= 1 { pick(&c.d1) } else { vec![] },
                    d2: if order >= 2 { pick(&c.d2) } else { vec![] },
                    d3: if order >= 3 { pick(&c.d3) } else { vec![] },
                }
            }
            _ => {
                let widths: Vec<f64> = self.domain.iter().map(|(lo, hi)| hi - lo).collect();
                fd::jet(|q: &[S]| self.raw_metric(q), p, &widths, order)
            }
        };
        if jet
            .g
            .iter()
            .chain(&jet.d1)
            .chain(&jet.d2)
            .chain(&jet.d3)
            .any(|v| !v.is_finite())
        {
            return Err(Error::Derivative("non-finite derivative value".into()));
        }
        Ok(jet)
    }
}

fn check_domain(dim: usize, domain: &[(f64, f64)]) -> Result<()> {
    if !(MIN_DIM..=MAX_DIM).contains(&dim) {
        return Err(Error::UnsupportedDimension(dim, "2..=6"));
    }
    if domain.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: domain.len(),
        });
    }
    if domain
        .iter()
        .any(|(lo, hi)| lo >= hi || !lo.is_finite() || !hi.is_finite())
    {
        return Err(Error::InvalidParameter("domain intervals must satisfy lo < hi".into()));
    }
    Ok(())
}

/// Rejects metrics with an eigenvalue below the relative degeneracy threshold.
pub fn check_nondegenerate<S: Scalar>(g: &SymmetricBilinear<S>) -> Result<()> {
    let eig = g.eigenvalues();
    let largest = eig.iter().fold(S::zero(), |m, v| m.max(v.abs()));
    let threshold = S::lit(DEGENERACY_RATIO) * largest;
    for v in &eig {
        if v.abs() < threshold || largest == S::zero() {
            return Err(Error::DegenerateMetric {
                eigenvalue: v.as_f64(),
                threshold: threshold.as_f64(),
            });
        }
    }
    Ok(())
}

/// `(negative, positive)` eigenvalue counts of a nondegenerate form.
pub fn signature_of<S: Scalar>(g: &SymmetricBilinear<S>) -> (usize, usize) {
    let eig = g.eigenvalues();
    let neg = eig.iter().filter(|v| **v < S::zero()).count();
    (neg, eig.len() - neg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sphere2() -> MetricChart<f64> {
        MetricChart::from_dsl(
            "sphere",
            "dim=2; g[0][0]=4/(1+x0^2+x1^2)^2; g[1][1]=g[0][0]",
            vec![(-1.0, 1.0), (-1.0, 1.0)],
        )
        .unwrap()
    }

    #[test]
    fn signature_of_diagonal_forms() {
        let c = MetricChart::<f64>::from_dsl(
            "f22",
            "dim=4; g[0][0]=-1; g[1][1]=-1; g[2][2]=1; g[3][3]=1",
            vec![(-1.0, 1.0); 4],
        )
        .unwrap();
        assert_eq!(c.signature(), (2, 2));
        let c =
            MetricChart::<f64>::from_dsl("e3", "dim=3; g[0][0]=1; g[1][1]=1; g[2][2]=1", vec![(-1.0, 1.0); 3]).unwrap();
        assert_eq!(c.signature_at(&[0.1, 0.2, 0.3]).unwrap(), (0, 3));
    }

    #[test]
    fn degenerate_and_sign_changing_metrics_are_rejected() {
        let r = MetricChart::<f64>::from_dsl("deg", "dim=2; g[0][0]=1", vec![(-1.0, 1.0); 2]);
        assert!(matches!(r, Err(Error::DegenerateMetric { .. })));
        let r = MetricChart::<f64>::from_dsl("flip", "dim=2; g[0][0]=x0; g[1][1]=1", vec![(-1.0, 1.0); 2]);
        assert!(matches!(
            r,
            Err(Error::SignatureChange { .. }) | Err(Error::DegenerateMetric { .. })
        ));
    }

    #[test]
    fn outside_domain_is_an_error() {
        let c = sphere2();
        assert!(matches!(c.metric_at(&[2.0, 0.0]), Err(Error::OutsideDomain { .. })));
        assert!(matches!(c.jet(&[0.0], 1), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn symbolic_and_fd_jets_agree() {
        let c = MetricChart::<f64>::from_dsl(
            "trig",
            "dim=3; g[0][0]=-(1+0.2*sin(x1)*x2); g[0][2]=0.1*cos(x0+x1); g[1][1]=exp(0.3*x0); g[2][2]=1+x1^2",
            vec![(-1.0, 1.0); 3],
        )
        .unwrap();
        let fd = c.with_path(DerivativePath::FiniteDifference).unwrap();
        let p = [0.2, -0.3, 0.4];
        let a = c.jet(&p, 3).unwrap();
        let b = fd.jet(&p, 3).unwrap();
        let diff = |x: &[f64], y: &[f64]| x.iter().zip(y).fold(0.0f64, |m, (u, v)| m.max((u - v).abs()));
        assert!(diff(&a.g, &b.g) == 0.0);
        assert!(diff(&a.d1, &b.d1) < 1e-9, "{}", diff(&a.d1, &b.d1));
        assert!(diff(&a.d2, &b.d2) < 1e-7, "{}", diff(&a.d2, &b.d2));
        assert!(diff(&a.d3, &b.d3) < 1e-4, "{}", diff(&a.d3, &b.d3));
        // symmetric in derivative indices
        assert_eq!(a.d3(0, 1, 2, 0, 2), a.d3(2, 0, 1, 2, 0));
    }

    #[test]
    fn black_box_chart_uses_finite_differences() {
        let f: MetricFn<f64> = Arc::new(|p: &[f64]| {
            let s = 4.0 / (1.0 + p[0] * p[0] + p[1] * p[1]).powi(2);
            vec![s, 0.0, 0.0, s]
        });
        let c = MetricChart::from_fn("bb", 2, vec![(-1.0, 1.0); 2], f).unwrap();
        assert_eq!(c.path(), DerivativePath::FiniteDifference);
        assert!(c.with_path(DerivativePath::Symbolic).is_err());
        let s = sphere2();
        let a = c.jet(&[0.3, 0.1], 2).unwrap();
        let b = s.jet(&[0.3, 0.1], 2).unwrap();
        for (u, v) in a.d2.iter().zip(&b.d2) {
            assert!((u - v).abs() < 1e-7);
        }
    }
}
