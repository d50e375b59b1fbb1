//! Built-in example manifolds and the catalog describing them.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::chart::MetricChart;
use crate::conformal::ScalarField;
use crate::error::{Error, Result};
use crate::expr::{parse_expr_vars, parse_metric_dsl, Expr, MetricGrid};
use crate::tensor::{SymmetricBilinear, Tensor4};
use crate::Chart;

const BUILTIN_CATALOG: &str = include_str!("catalog.toml");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Construction {
    ClosedForm,
    EmbeddingInduced,
    Product,
    ConformalPair,
}

/// Instantiation parameters; absent fields fall back to catalog defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    /// Profile `f(t)` of the hypersurface example.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f: Option<String>,
    /// pp-wave profile `h(u)`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h: Option<String>,
    /// Conformal factor exponent over `x0..`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma: Option<String>,
}

impl Params {
    /// Fields of `self`, falling back to `defaults`.
    pub fn or(&self, defaults: &Params) -> Params {
        Params {
            c: self.c.or(defaults.c),
            s: self.s.or(defaults.s),
            n: self.n.or(defaults.n),
            f: self.f.clone().or_else(|| defaults.f.clone()),
            h: self.h.clone().or_else(|| defaults.h.clone()),
            sigma: self.sigma.clone().or_else(|| defaults.sigma.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub name: String,
    pub construction: Construction,
    pub description: String,
    pub provenance: String,
    pub domain: String,
    pub defaults: Params,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dsl: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weyl_floor: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Catalog {
    #[serde(rename = "manifold")]
    pub entries: Vec<CatalogEntry>,
}

impl Catalog {
    /// The catalog shipped with the crate.
    pub fn builtin() -> Catalog {
        Catalog::from_toml_str(BUILTIN_CATALOG).expect("built-in catalog parses")
    }

    pub fn from_toml_str(text: &str) -> Result<Catalog> {
        toml::from_str(text).map_err(|e| Error::Registry(e.to_string()))
    }

    pub fn get(&self, name: &str) -> Option<&CatalogEntry> {
        self.entries.iter().find(|e| e.name == name)
    }

    pub fn names(&self) -> Vec<&str> {
        self.entries.iter().map(|e| e.name.as_str()).collect()
    }
}

/// A named manifold with parameter overrides.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifoldSpec {
    pub name: String,
    #[serde(default)]
    pub params: Params,
}

impl ManifoldSpec {
    pub fn new(name: impl Into<String>) -> Self {
        ManifoldSpec {
            name: name.into(),
            params: Params::default(),
        }
    }

    pub fn with(mut self, params: Params) -> Self {
        self.params = params;
        self
    }
}

/// Chart for `spec` using the built-in catalog.
pub fn instantiate(spec: &ManifoldSpec) -> Result<Chart> {
    instantiate_from(&Catalog::builtin(), spec)
}

/// Chart for `spec`, resolving defaults and frozen expressions from `catalog`.
pub fn instantiate_from(catalog: &Catalog, spec: &ManifoldSpec) -> Result<Chart> {
    let entry = catalog.get(&spec.name).ok_or_else(|| {
        Error::Registry(format!(
            "unknown manifold '{}' (known: {})",
            spec.name,
            catalog.names().join(", ")
        ))
    })?;
    let p = spec.params.or(&entry.defaults);
    let need_n = || {
        p.n.ok_or_else(|| Error::Registry(format!("{}: parameter n required", entry.name)))
    };
    let s = p.s.unwrap_or(0);
    match entry.name.as_str() {
        "flat" => flat(s, need_n()?),
        "constant_curvature" => constant_curvature(p.c.unwrap_or(1.0), s, need_n()?),
        "product_example1" => product_example1(p.c.unwrap_or(1.0), s, need_n()?),
        "example2" => example2(p.f.as_deref().unwrap_or("t^2"), s, need_n()?),
        "ppwave" => ppwave(p.h.as_deref().unwrap_or("exp(u)"), need_n()?),
        "ppwave_pair" => Ok(ppwave_pair_with(p.h.as_deref(), need_n()?)?.0),
        _ => match &entry.dsl {
            Some(text) => {
                let grid = parse_metric_dsl(text)?;
                let dim = grid.dim;
                MetricChart::from_grid(entry.name.clone(), grid, vec![(-1.0, 1.0); dim])
            }
            None => Err(Error::Registry(format!("{}: no construction available", entry.name))),
        },
    }
}

fn check_sn(s: usize, n: usize, what: &str) -> Result<()> {
    if !(crate::tensor::MIN_DIM..=crate::tensor::MAX_DIM).contains(&n) {
        return Err(Error::InvalidParameter(format!("{what}: n={n} outside 2..=6")));
    }
    if s > n {
        return Err(Error::InvalidParameter(format!("{what}: s={s} exceeds n={n}")));
    }
    Ok(())
}

fn sign(i: usize, s: usize) -> f64 {
    if i < s {
        -1.0
    } else {
        1.0
    }
}

fn diag_grid(n: usize, mut entry: impl FnMut(usize, usize) -> Expr) -> MetricGrid {
    let mut components = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            components.push(entry(i, j));
        }
    }
    MetricGrid { dim: n, components }
}

/// Pseudo-Euclidean metric with `s` negative directions.
pub fn flat(s: usize, n: usize) -> Result<Chart> {
    check_sn(s, n, "flat")?;
    let grid = diag_grid(n, |i, j| {
        if i == j {
            Expr::constant(sign(i, s))
        } else {
            Expr::zero()
        }
    });
    MetricChart::from_grid(format!("flat(s={s},n={n})"), grid, vec![(-1.0, 1.0); n])
}

/// Half-width keeping `1 + c q / 4` positive on the box.
fn model_half_width(c: f64, n: usize) -> f64 {
    if c == 0.0 {
        0.5
    } else {
        0.5f64.min((2.0 / (n as f64 * c.abs())).sqrt())
    }
}

/// Conformal factor `1 / (1 + c q(x)/4)²` over the first `m` coordinates.
fn model_factor(c: f64, s: usize, m: usize) -> Expr {
    let mut q = Expr::zero();
    for i in 0..m {
        let term = Expr::var(i).powi(2);
        q = if i < s { &q - &term } else { &q + &term };
    }
    (1.0 + q * (c / 4.0)).powi(-2)
}

/// Constant curvature `c` model `δ^{(s)} / (1 + c q/4)²`.
pub fn constant_curvature(c: f64, s: usize, n: usize) -> Result<Chart> {
    check_sn(s, n, "constant_curvature")?;
    let factor = model_factor(c, s, n);
    let grid = diag_grid(n, |i, j| if i == j { &factor * sign(i, s) } else { Expr::zero() });
    let w = model_half_width(c, n);
    MetricChart::from_grid(format!("constant_curvature(c={c},s={s},n={n})"), grid, vec![(-w, w); n])
}

/// `(n-1)`-dimensional constant-curvature model times a spacelike line.
pub fn product_example1(c: f64, s: usize, n: usize) -> Result<Chart> {
    check_sn(s, n, "product_example1")?;
    if n < 3 || s > n - 1 {
        return Err(Error::InvalidParameter(
            "product_example1 needs n >= 3 and s <= n-1".into(),
        ));
    }
    let m = n - 1;
    let factor = model_factor(c, s, m);
    let grid = diag_grid(n, |i, j| match (i == j, i == m) {
        (true, true) => Expr::one(),
        (true, false) => &factor * sign(i, s),
        _ => Expr::zero(),
    });
    let w = model_half_width(c, m);
    let mut domain = vec![(-w, w); m];
    domain.push((-1.0, 1.0));
    MetricChart::from_grid(format!("product_example1(c={c},s={s},n={n})"), grid, domain)
}

/// Domain of the hypersurface example.
fn example2_domain(n: usize) -> Vec<(f64, f64)> {
    let mut d = vec![(-0.4, 0.4); n - 1];
    d.push((0.5, 1.5));
    d
}

/// Embedding `y ↦ X(y) ∈ ℝ^{n+1}` of the hypersurface example.
fn example2_embedding(f: &str, s: usize, n: usize) -> Result<Vec<Expr>> {
    let profile = parse_expr_vars(f, &["t"])?;
    let yn = Expr::var(n - 1);
    let mut delta = Expr::one();
    for i in 0..n - 1 {
        let t = Expr::var(i).powi(2);
        delta = if i < s { &delta - &t } else { &delta + &t };
    }
    let mut x: Vec<Expr> = (0..n - 1).map(|i| 2.0 * &Expr::var(i) * &yn / &delta).collect();
    x.push(&yn * &(&delta - 2.0) / &delta);
    x.push(profile.substitute(std::slice::from_ref(&yn)));
    Ok(x)
}

fn check_example2(s: usize, n: usize) -> Result<()> {
    check_sn(s, n, "example2")?;
    if n < 3 || s > n - 1 {
        return Err(Error::InvalidParameter("example2 needs n >= 3 and s <= n-1".into()));
    }
    Ok(())
}

/// Hypersurface example with metric `Jᵀ η J` induced from the embedding.
pub fn example2(f: &str, s: usize, n: usize) -> Result<Chart> {
    check_example2(s, n)?;
    let x = example2_embedding(f, s, n)?;
    let jac: Vec<Vec<Expr>> = x.iter().map(|xa| (0..n).map(|k| xa.diff(k)).collect()).collect();
    let grid = diag_grid(n, |i, j| {
        let mut acc = Expr::zero();
        for (a, row) in jac.iter().enumerate() {
            let term = &row[i] * &row[j];
            acc = if a < s { &acc - &term } else { &acc + &term };
        }
        acc
    });
    MetricChart::from_grid(format!("example2(f={f},s={s},n={n})"), grid, example2_domain(n))
}

/// Derivatives `f'`, `f''` of the profile at `t`.
fn profile_derivatives(f: &str, t: f64) -> Result<(f64, f64)> {
    let e = parse_expr_vars(f, &["t"])?;
    let d1 = e.diff(0);
    let d2 = d1.diff(0);
    Ok((d1.eval(&[t]), d2.eval(&[t])))
}

fn example2_point_check(p: &[f64], s: usize) -> Result<()> {
    let n = p.len();
    let yn = p[n - 1];
    let delta = 1.0 + (0..n - 1).map(|i| sign(i, s) * p[i] * p[i]).sum::<f64>();
    if yn <= 0.0 || delta <= 0.0 {
        return Err(Error::OutsideDomain { point: p.to_vec() });
    }
    Ok(())
}

/// Printed closed forms `H = f'²/((yⁿ)²(1+f'²))`, `N = 4 f' f''/(yⁿ(1+f'²))`
/// evaluated verbatim; a comparison target only.
pub fn example2_reference_hn(f: &str, s: usize, p: &[f64]) -> Result<(f64, f64)> {
    example2_point_check(p, s)?;
    let yn = p[p.len() - 1];
    let (d1, d2) = profile_derivatives(f, yn)?;
    let h = d1 * d1 / (yn * yn * (1.0 + d1 * d1));
    let n = 4.0 * d1 * d2 / (yn * (1.0 + d1 * d1));
    Ok((h, n))
}

/// Curvature of the hypersurface example from the Gauss equation
/// `R(x,y,z,w) = ε (II(y,z) II(x,w) - II(x,z) II(y,w))`, with `II` taken
/// against the unit normal of the embedding and `ε = ⟨ν,ν⟩`.
pub fn example2_gauss_riemann(f: &str, s: usize, p: &[f64]) -> Result<(SymmetricBilinear<f64>, Tensor4<f64>)> {
    let n = p.len();
    check_example2(s, n)?;
    example2_point_check(p, s)?;
    let x = example2_embedding(f, s, n)?;
    let m = n + 1;
    let eta: Vec<f64> = (0..m).map(|a| sign(a, s)).collect();
    let jac = DMatrix::from_fn(m, n, |a, k| x[a].diff(k).eval(p));
    // normal: kernel of the n × (n+1) matrix Jᵀη via signed maximal minors
    let constraint: Vec<Vec<f64>> = (0..n).map(|k| (0..m).map(|a| jac[(a, k)] * eta[a]).collect()).collect();
    let mut nu: Vec<f64> = (0..m)
        .map(|skip| {
            let minor: Vec<f64> = constraint
                .iter()
                .flat_map(|row| row.iter().enumerate().filter(|(a, _)| *a != skip).map(|(_, v)| *v))
                .collect();
            let sgn = if skip % 2 == 0 { 1.0 } else { -1.0 };
            sgn * crate::linalg::det(n, &minor)
        })
        .collect();
    let nn: f64 = (0..m).map(|a| eta[a] * nu[a] * nu[a]).sum();
    if nn.abs() < 1e-12 {
        return Err(Error::DegenerateMetric {
            eigenvalue: nn,
            threshold: 1e-12,
        });
    }
    let eps = nn.signum();
    nu.iter_mut().for_each(|v| *v /= nn.abs().sqrt());
    let second = |i: usize, j: usize| -> f64 { (0..m).map(|a| eta[a] * x[a].diff(i).diff(j).eval(p) * nu[a]).sum() };
    let mut ii = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let v = second(i, j);
            ii[i * n + j] = v;
            ii[j * n + i] = v;
        }
    }
    let g = SymmetricBilinear::from_fn(n, |i, j| (0..m).map(|a| eta[a] * jac[(a, i)] * jac[(a, j)]).sum());
    let r = Tensor4::from_fn(n, |a, b, c, d| {
        eps * (ii[b * n + c] * ii[a * n + d] - ii[a * n + c] * ii[b * n + d])
    });
    Ok((g, r))
}

/// pp-wave `2 du dv + h(u) Σ x_i² du² + Σ dx_i²` in coordinates `(u, v, x2, …)`.
pub fn ppwave(h: &str, n: usize) -> Result<Chart> {
    ppwave_on(h, n, vec![(-1.0, 1.0); n])
}

fn ppwave_on(h: &str, n: usize, domain: Vec<(f64, f64)>) -> Result<Chart> {
    if n < 3 {
        return Err(Error::InvalidParameter("ppwave needs n >= 3".into()));
    }
    check_sn(1, n, "ppwave")?;
    let profile = parse_expr_vars(h, &["u"])?.substitute(&[Expr::var(0)]);
    let mut q = Expr::zero();
    for i in 2..n {
        q = &q + &Expr::var(i).powi(2);
    }
    let guu = &profile * &q;
    let grid = diag_grid(n, |i, j| match (i, j) {
        (0, 0) => guu.clone(),
        (0, 1) | (1, 0) => Expr::one(),
        (a, b) if a == b && a >= 2 => Expr::one(),
        _ => Expr::zero(),
    });
    MetricChart::from_grid(format!("ppwave(h={h},n={n})"), grid, domain)
}

/// Pinned profile of the conformal pair.
pub const PPWAVE_PAIR_PROFILE: &str = "exp(2*u)/(exp(2*u)-1)";
/// Pinned conformal exponent of the pair, over the chart coordinates.
pub const PPWAVE_PAIR_SIGMA: &str = "-x0";

/// pp-wave `g` and `σ` such that `(g, e^{2σ} g)` satisfies the weak
/// degenerate-plane condition with null `∇σ`.
pub fn ppwave_pair(n: usize) -> Result<(Chart, ScalarField)> {
    ppwave_pair_with(None, n)
}

fn ppwave_pair_with(h: Option<&str>, n: usize) -> Result<(Chart, ScalarField)> {
    let mut domain = vec![(-1.0, 1.0); n];
    domain[0] = (-2.0, -0.25);
    let chart = ppwave_on(h.unwrap_or(PPWAVE_PAIR_PROFILE), n, domain)?.renamed(format!("ppwave_pair(n={n})"));
    let sigma = ScalarField::parse(PPWAVE_PAIR_SIGMA, n)?;
    Ok((chart, sigma))
}

/// The frozen `(2,2)` chart.
pub fn generic22() -> Result<Chart> {
    instantiate(&ManifoldSpec::new("generic22"))
}

/// Certified lower bound on `max |Weyl|` over the generic chart.
pub fn generic22_weyl_floor() -> f64 {
    Catalog::builtin()
        .get("generic22")
        .and_then(|e| e.weyl_floor)
        .expect("generic22 pins a Weyl floor")
}

/// Random trig/polynomial metric of signature `(s, n-s)` on `[-1,1]^n`.
///
/// Diagonal entries stay within `ε_i [0.75, 1.25]` and each off-diagonal row
/// sum stays below `0.5`, so the signature is fixed by Gershgorin's theorem.
pub fn random_analytic_metric(seed: u64, s: usize, n: usize) -> Result<Chart> {
    check_sn(s, n, "random_analytic_metric")?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pick = |lo: f64, hi: f64| rng.gen_range(lo..hi);
    let mut text = format!("dim={n};\n");
    let mut terms = BTreeMap::new();
    for i in 0..n {
        let (a, b) = (
            (pick(0.0, 1.0) * n as f64) as usize % n,
            (pick(0.0, 1.0) * n as f64) as usize % n,
        );
        let amp = pick(0.05, 0.12);
        let freq = pick(0.5, 1.5);
        let phase = pick(-1.0, 1.0);
        let quad = pick(0.0, 0.1);
        let body = format!(
            "1+{amp:.4}*sin({freq:.4}*x{a}+{phase:.4})+{quad:.4}*x{b}^2*{:.4}",
            pick(-1.0, 1.0)
        );
        let entry = if i < s { format!("-({body})") } else { body };
        terms.insert((i, i), entry);
    }
    let off = 0.5 / (n as f64 - 1.0);
    for i in 0..n {
        for j in i + 1..n {
            let k = (pick(0.0, 1.0) * n as f64) as usize % n;
            let l = (pick(0.0, 1.0) * n as f64) as usize % n;
            let amp = off * pick(0.2, 0.9);
            let body = if pick(0.0, 1.0) < 0.5 {
                format!("{amp:.4}*cos({:.4}*x{k}-{:.4}*x{l})", pick(0.5, 1.5), pick(0.5, 1.5))
            } else {
                format!("{amp:.4}*x{k}*x{l}")
            };
            terms.insert((i, j), body);
        }
    }
    for ((i, j), e) in terms {
        text.push_str(&format!("g[{i}][{j}]={e};\n"));
    }
    MetricChart::from_dsl(format!("random(seed={seed},s={s},n={n})"), &text, vec![(-1.0, 1.0); n])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::curvature_bundle;
    use crate::tensor::build_pi1;

    #[test]
    fn catalog_lists_every_constructor() {
        let cat = Catalog::builtin();
        for name in cat.names() {
            let chart = instantiate(&ManifoldSpec::new(name)).unwrap();
            assert!(chart.dim() >= 3, "{name}");
        }
        assert!(instantiate(&ManifoldSpec::new("nope")).is_err());
    }

    #[test]
    fn reference_formulas_as_printed() {
        assert_eq!(
            example2_reference_hn("t", 2, &[0.0, 0.0, 0.0, 1.0]).unwrap(),
            (0.5, 0.0)
        );
        let (h, n) = example2_reference_hn("t^2", 2, &[0.1, 0.0, 0.2, 1.0]).unwrap();
        assert!((h - 0.8).abs() < 1e-15 && (n - 3.2).abs() < 1e-15);
        assert_eq!(
            example2_reference_hn("3", 2, &[0.0, 0.0, 0.0, 1.0]).unwrap(),
            (0.0, 0.0)
        );
        assert!(example2_reference_hn("t", 2, &[0.0, 0.0, 0.0, -1.0]).is_err());
    }

    #[test]
    fn gauss_equation_matches_pipeline() {
        let chart = example2("t^2", 2, 4).unwrap();
        let p = [0.1, -0.2, 0.15, 1.0];
        let b = curvature_bundle(&chart, &p).unwrap();
        let (g, r) = example2_gauss_riemann("t^2", 2, &p).unwrap();
        assert!(g.add_scaled(-1.0, &b.metric).unwrap().max_abs() < 1e-12);
        assert!(r.max_diff(&b.riemann) < 1e-10, "{}", r.max_diff(&b.riemann));
    }

    #[test]
    fn model_curvature() {
        let chart = constant_curvature(-0.7, 2, 5).unwrap();
        let p = chart.sample_points(1, 3).remove(0);
        let b = curvature_bundle(&chart, &p).unwrap();
        let pi1 = build_pi1(&b.metric).unwrap();
        assert!(b.riemann.max_diff(&pi1.scaled(-0.7)) < 1e-12);
    }

    #[test]
    fn random_metrics_are_reproducible() {
        let a = random_analytic_metric(5, 1, 4).unwrap();
        let b = random_analytic_metric(5, 1, 4).unwrap();
        assert_eq!(a.grid().unwrap().to_dsl(), b.grid().unwrap().to_dsl());
        assert_eq!(a.signature(), (1, 3));
    }
}
