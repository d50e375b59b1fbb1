//! Verb dispatch.

use serde_json::{json, Value};

use curvedcheck_core::classify::{
    classify_point, degenerate_vanishing_test, fit_c_pi1, orthonormal_quadruple_test, ClassificationReport,
    QuasiConstantBranch, RecurrenceMode, Tolerances,
};
use curvedcheck_core::conformal::{
    conformal_change, degenerate_condition_check, pullback_classify, Diffeo, GradientClass, MapClass, PullbackOptions,
    PullbackReport, ScalarField,
};
use curvedcheck_core::expr::parse_metric_dsl;
use curvedcheck_core::planes::{
    classify_plane, limit_ratio_estimate, random_orthonormal_frames, sample_degenerate_planes, sectional_curvature,
    LimitFamily, PlaneKind, TangentPlane, DEFAULT_RANK_TOL,
};
use curvedcheck_core::registry::{self, Catalog, ManifoldSpec, Params};
use curvedcheck_core::{curvature_bundle, Bundle, Chart, DerivativePath};

use crate::args::{Kind, LemmaId, Resolved, Verb};
use crate::report::{fmt_point, Report, Status, Verdict, SCHEMA};

/// Usage or evaluation error; maps to exit status 2.
pub type CmdResult<T> = Result<T, String>;

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

/// Limit steps after the initial member of the approaching family.
const LIMIT_STEPS: usize = 8;
/// Default tolerance on `|limit - 1|`.
const LIMIT_TOL: f64 = 1e-5;
/// Extra points mixed into the pullback classification so `σ̂` has spread.
const PULLBACK_EXTRA_POINTS: usize = 4;

struct Ctx {
    chart: Chart,
    opts: Resolved,
    tol: Tolerances,
    points: Vec<Vec<f64>>,
    /// Default `σ` from the catalog entry, if any.
    catalog_sigma: Option<String>,
}

impl Ctx {
    fn path(&self) -> DerivativePath {
        self.chart.path()
    }

    /// Relative tolerance for residual-style verdicts.
    fn check_tol(&self) -> f64 {
        self.opts.tol.unwrap_or(self.tol.fit)
    }

    fn sigma_text(&self) -> Option<String> {
        self.opts.sigma.clone().or_else(|| self.catalog_sigma.clone())
    }

    fn sigma(&self, required: bool) -> CmdResult<(ScalarField, String)> {
        match self.sigma_text() {
            Some(text) => Ok((ScalarField::parse(&text, self.chart.dim()).map_err(err)?, text)),
            None if required => Err("this verb needs --sigma".into()),
            None => Ok((ScalarField::constant(0.0, self.chart.dim()), "0".into())),
        }
    }

    fn bundle(&self, p: &[f64]) -> CmdResult<Bundle> {
        curvature_bundle(&self.chart, p).map_err(err)
    }

    fn classify(&self, p: &[f64]) -> CmdResult<ClassificationReport> {
        classify_point(&self.chart, p, self.tol).map_err(err)
    }

    fn pullback(&self, sigma: &ScalarField) -> CmdResult<PullbackReport> {
        let cc = conformal_change(&self.chart, sigma).map_err(err)?;
        let mut pts = self.points.clone();
        pts.extend(
            self.chart
                .sample_points(PULLBACK_EXTRA_POINTS, self.opts.seed.wrapping_add(1)),
        );
        let opts = PullbackOptions {
            seed: self.opts.seed,
            ..PullbackOptions::default()
        };
        pullback_classify(&Diffeo::identity(self.chart.dim()), &self.chart, &cc.bar, &pts, opts).map_err(err)
    }

    fn point_seed(&self, i: usize) -> u64 {
        self.opts.seed.wrapping_add(i as u64)
    }
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable")
}

fn plane_kind(k: Kind) -> PlaneKind {
    match k {
        Kind::Weak => PlaneKind::Weak,
        Kind::Strong => PlaneKind::Strong,
    }
}

fn parse_point(text: &str, dim: usize) -> CmdResult<Vec<f64>> {
    let p: Vec<f64> = text
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| format!("--at: cannot parse '{t}' in '{text}'"))
        })
        .collect::<CmdResult<_>>()?;
    if p.len() != dim {
        return Err(format!("--at {text}: expected {dim} coordinates, got {}", p.len()));
    }
    Ok(p)
}

fn load_chart(opts: &Resolved) -> CmdResult<(Chart, Option<String>, Value)> {
    match (&opts.manifold, &opts.inline) {
        (Some(_), Some(_)) => Err("give exactly one of --manifold and --inline, not both".into()),
        (None, None) => Err("a metric is required: --manifold NAME or --inline DSL".into()),
        (Some(name), None) => {
            let params = Params {
                c: opts.c,
                s: opts.s,
                n: opts.n,
                f: opts.f.clone(),
                h: opts.h.clone(),
                sigma: None,
            };
            let catalog = Catalog::builtin();
            let chart =
                registry::instantiate_from(&catalog, &ManifoldSpec::new(name).with(params.clone())).map_err(err)?;
            let defaults = catalog.get(name).map(|e| e.defaults.clone()).unwrap_or_default();
            let resolved = params.or(&defaults);
            Ok((chart, defaults.sigma, json!({ "manifold": name, "params": resolved })))
        }
        (None, Some(text)) => {
            let grid = parse_metric_dsl(text).map_err(err)?;
            let (lo, hi) = opts.domain.unwrap_or((-1.0, 1.0));
            let dim = grid.dim;
            let chart = Chart::from_grid("inline", grid, vec![(lo, hi); dim]).map_err(err)?;
            Ok((chart, None, json!({ "inline": text, "domain": [lo, hi] })))
        }
    }
}

fn build_ctx(opts: Resolved) -> CmdResult<(Ctx, Value)> {
    let (chart, catalog_sigma, source) = load_chart(&opts)?;
    let chart = if opts.fd {
        chart.with_path(DerivativePath::FiniteDifference).map_err(err)?
    } else {
        chart
    };
    let mut tol = Tolerances::for_path(chart.path());
    if let Some(t) = opts.tol {
        if !(t > 0.0 && t.is_finite()) {
            return Err(format!("--tol must be positive, got {t}"));
        }
        tol = Tolerances {
            fit: t,
            conformal: t,
            recurrence: t,
        };
    }
    let mut points = if opts.at.is_empty() {
        chart.sample_points(opts.point_samples(), opts.seed)
    } else {
        opts.at
            .iter()
            .map(|t| parse_point(t, chart.dim()))
            .collect::<CmdResult<_>>()?
    };
    for p in &points {
        if !chart.contains(p) {
            return Err(format!("point {} lies outside the chart domain", fmt_point(p)));
        }
    }
    points.sort_by(|a, b| {
        a.iter()
            .zip(b)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    points.dedup();
    Ok((
        Ctx {
            chart,
            opts,
            tol,
            points,
            catalog_sigma,
        },
        source,
    ))
}

/// Runs one command; `Err` is a usage or evaluation error.
pub fn run(verb: &Verb, opts: Resolved) -> CmdResult<Report> {
    let mut command = json!({
        "verb": verb.name(),
        "seed": opts.seed,
        "fd": opts.fd,
        "tol": opts.tol,
        "samples": opts.samples,
        "kind": opts.kind,
        "at": opts.at,
        "sigma": opts.sigma,
    });
    if let Verb::List = verb {
        return Ok(list(command));
    }
    let (ctx, source) = build_ctx(opts)?;
    command["source"] = source;
    command["sigma"] = to_value(&ctx.sigma_text());
    let body = match verb {
        Verb::List => unreachable!("handled above"),
        Verb::Curvature => curvature(&ctx)?,
        Verb::Classify => classify(&ctx)?,
        Verb::Planes => planes(&ctx)?,
        Verb::Conformal => conformal(&ctx)?,
        Verb::Limit => limit(&ctx)?,
        Verb::Lemma { which } => lemma(&ctx, *which)?,
        Verb::Theorem { which } => theorem(&ctx, *which)?,
    };
    Ok(Report {
        schema: SCHEMA,
        command,
        derivative_path: Some(ctx.path()),
        tolerances: Some(ctx.tol),
        points: body.points,
        checks: body.checks,
        verdict: body.verdict,
        text: body.text,
    })
}

struct Body {
    points: Vec<Value>,
    checks: Value,
    verdict: Verdict,
    text: Vec<String>,
}

impl Body {
    fn new() -> Self {
        Body {
            points: Vec::new(),
            checks: json!({}),
            verdict: Verdict {
                status: Status::Info,
                summary: String::new(),
            },
            text: Vec::new(),
        }
    }

    fn finish(mut self, status: Status, summary: impl Into<String>) -> Self {
        self.verdict = Verdict {
            status,
            summary: summary.into(),
        };
        self
    }
}

fn list(command: Value) -> Report {
    let catalog = Catalog::builtin();
    let mut text = Vec::new();
    let entries: Vec<Value> = catalog
        .entries
        .iter()
        .map(|e| {
            text.push(format!("{:<20} {}", e.name, e.description));
            to_value(e)
        })
        .collect();
    Report {
        schema: SCHEMA,
        command,
        derivative_path: None,
        tolerances: None,
        points: Vec::new(),
        checks: json!({ "manifolds": entries }),
        verdict: Verdict {
            status: Status::Info,
            summary: format!("{} manifolds", entries.len()),
        },
        text,
    }
}

fn curvature(ctx: &Ctx) -> CmdResult<Body> {
    let mut body = Body::new();
    let n = ctx.chart.dim();
    for p in &ctx.points {
        let b = ctx.bundle(p)?;
        let scale = b.riemann.max_abs();
        let cut = 1e-12 * scale.max(1.0);
        let mut components = Vec::new();
        for a in 0..n {
            for bb in a + 1..n {
                for c in 0..n {
                    for d in c + 1..n {
                        if (a, bb) > (c, d) {
                            continue;
                        }
                        let v = b.riemann.get(a, bb, c, d);
                        if v.abs() > cut {
                            components.push(json!({ "index": [a, bb, c, d], "value": v }));
                        }
                    }
                }
            }
        }
        let ricci: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| b.ricci.get(i, j)).collect()).collect();
        let metric: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| b.metric.get(i, j)).collect()).collect();
        let (neg, pos) = ctx.chart.signature_at(p).map_err(err)?;
        let obstruction = b.conformal_obstruction();
        body.text.push(format!(
            "{}: signature ({neg},{pos}), scalar curvature {:.6}, max|R| {:.3e}, conformal obstruction {}",
            fmt_point(p),
            b.scalar,
            scale,
            obstruction.map_or("n/a".to_string(), |o| format!("{o:.3e}"))
        ));
        body.points.push(json!({
            "point": p,
            "signature": [neg, pos],
            "metric": metric,
            "scalar_curvature": b.scalar,
            "ricci": ricci,
            "riemann_max": scale,
            "riemann_components": components,
            "weyl_max": b.weyl.as_ref().map(|w| w.max_abs()),
            "cotton_max": b.cotton.as_ref().map(|c| c.max_abs()),
            "conformal_obstruction": obstruction,
        }));
    }
    let k = body.points.len();
    Ok(body.finish(Status::Info, format!("curvature at {k} point(s)")))
}

fn classify(ctx: &Ctx) -> CmdResult<Body> {
    let mut body = Body::new();
    for p in &ctx.points {
        let r = ctx.classify(p)?;
        body.text.push(format!(
            "{}: [{}] c = {:.6}, H = {}, N = {}, recurrence {}",
            fmt_point(p),
            r.tags.join(", "),
            r.c,
            fmt_opt(r.quasi_constant.h),
            fmt_opt(r.quasi_constant.n),
            r.recurrence
                .as_ref()
                .map_or("n/a (flat)".to_string(), |f| format!("{:?}", f.mode))
        ));
        body.points.push(to_value(&r));
    }
    let k = body.points.len();
    Ok(body.finish(Status::Info, format!("classified {k} point(s)")))
}

/// `n/a` for the NaN placeholders of fits that did not apply.
fn fmt_opt(x: f64) -> String {
    if x.is_nan() {
        "n/a".into()
    } else {
        format!("{x:.6}")
    }
}

fn planes(ctx: &Ctx) -> CmdResult<Body> {
    let mut body = Body::new();
    let count = ctx.opts.point_samples();
    let kind = plane_kind(ctx.opts.kind);
    for (i, p) in ctx.points.iter().enumerate() {
        let b = ctx.bundle(p)?;
        let mut nondegenerate = Vec::new();
        for frame in random_orthonormal_frames(&b.metric, count, ctx.point_seed(i)) {
            let plane =
                TangentPlane::new(p.clone(), frame.vectors[0].clone(), frame.vectors[1].clone()).map_err(err)?;
            let class = classify_plane(&b.metric, &plane, DEFAULT_RANK_TOL).map_err(err)?;
            let k = sectional_curvature(&b.riemann, &b.metric, &plane).map_err(err)?;
            nondegenerate.push(json!({ "x": plane.x, "y": plane.y, "tag": class.tag, "sectional_curvature": k }));
        }
        let degenerate = match sample_degenerate_planes(&b.metric, p, kind, count, ctx.point_seed(i)) {
            Ok(planes) => {
                let mut out = Vec::new();
                for plane in planes {
                    let class = classify_plane(&b.metric, &plane, DEFAULT_RANK_TOL).map_err(err)?;
                    let value = b.riemann.eval(&plane.x, &plane.y, &plane.y, &plane.x);
                    out.push(json!({
                        "x": plane.x,
                        "y": plane.y,
                        "tag": class.tag,
                        "isotropic_direction": class.isotropic_direction,
                        "r_xyyx": value,
                    }));
                }
                json!(out)
            }
            Err(e) => json!({ "unavailable": e.to_string() }),
        };
        let ks: Vec<String> = nondegenerate
            .iter()
            .map(|v| format!("{:.4}", v["sectional_curvature"].as_f64().unwrap_or(f64::NAN)))
            .collect();
        body.text
            .push(format!("{}: sectional curvatures [{}]", fmt_point(p), ks.join(", ")));
        match degenerate.as_array() {
            Some(list) => {
                let vals: Vec<String> = list
                    .iter()
                    .map(|v| format!("{:.3e}", v["r_xyyx"].as_f64().unwrap_or(f64::NAN)))
                    .collect();
                body.text.push(format!(
                    "  {:?} degenerate planes: R(x,y,y,x) [{}]",
                    kind,
                    vals.join(", ")
                ));
            }
            None => body
                .text
                .push(format!("  {:?} degenerate planes: {}", kind, degenerate["unavailable"])),
        }
        body.points.push(
            json!({ "point": p, "nondegenerate": nondegenerate, "degenerate": degenerate, "kind": ctx.opts.kind }),
        );
    }
    let k = body.points.len();
    Ok(body.finish(Status::Info, format!("sampled planes at {k} point(s)")))
}

fn conformal(ctx: &Ctx) -> CmdResult<Body> {
    let mut body = Body::new();
    let (sigma, _) = ctx.sigma(true)?;
    let cc = conformal_change(&ctx.chart, &sigma).map_err(err)?;
    let tol = ctx.opts.tol.unwrap_or(ctx.tol.conformal);
    let mut all = true;
    let mut worst = 0.0f64;
    for p in &ctx.points {
        let check = cc.verify_at(p).map_err(err)?;
        let passed = check.residual <= tol * check.scale.max(1.0);
        all &= passed;
        worst = worst.max(check.residual);
        body.text.push(format!(
            "{}: σ = {:.6}, law residual {:.3e} (max|R̄| {:.3e})",
            fmt_point(p),
            sigma.value(p),
            check.residual,
            check.scale
        ));
        body.points
            .push(json!({ "point": p, "sigma": sigma.value(p), "law": check, "passed": passed }));
    }
    let pb = ctx.pullback(&sigma)?;
    body.text
        .push(format!("map g -> e^(2σ) g: {}", describe_class(&pb.class)));
    body.checks = json!({ "pullback": pb });
    let status = if all { Status::Pass } else { Status::Fail };
    Ok(body.finish(
        status,
        format!("conformal change law, max residual {worst:.3e}, tolerance {tol:e}"),
    ))
}

fn describe_class(c: &MapClass) -> String {
    match c {
        MapClass::Isometry => "isometry".into(),
        MapClass::Homothety { lambda } => format!("homothety, λ = {lambda:.6}"),
        MapClass::Conformal { sign, gradient_class } => {
            format!("conformal, sign {sign:+}, gradient {gradient_class:?}")
        }
        MapClass::General => "not conformal".into(),
    }
}

fn limit(ctx: &Ctx) -> CmdResult<Body> {
    let mut body = Body::new();
    let (sigma, _) = ctx.sigma(false)?;
    let cc = conformal_change(&ctx.chart, &sigma).map_err(err)?;
    let kind = plane_kind(ctx.opts.kind);
    let tol = ctx.opts.tol.unwrap_or(LIMIT_TOL);
    let map = Diffeo::identity(ctx.chart.dim());
    let mut all = true;
    for (i, p) in ctx.points.iter().enumerate() {
        let g = ctx.chart.metric_at(p).map_err(err)?;
        let plane = sample_degenerate_planes(&g, p, kind, 1, ctx.point_seed(i))
            .map_err(err)?
            .remove(0);
        let family = LimitFamily {
            seed: ctx.point_seed(i),
            ..LimitFamily::default()
        };
        let est = limit_ratio_estimate(&ctx.chart, &cc.bar, &map, &plane, family, LIMIT_STEPS).map_err(err)?;
        let passed = est.converged && (est.estimate - 1.0).abs() <= tol;
        all &= passed;
        body.text.push(format!(
            "{}: ratio limit {:.10} (error indicator {:.1e}, converged {})",
            fmt_point(p),
            est.estimate,
            est.error_indicator,
            est.converged
        ));
        body.points
            .push(json!({ "point": p, "plane": plane, "estimate": est, "passed": passed }));
    }
    let status = if all { Status::Pass } else { Status::Fail };
    Ok(body.finish(
        status,
        format!("ratio limit equals 1 within {tol:e} at every point: {all}"),
    ))
}

/// Relative size check used by the lemma suites.
fn small(value: f64, scale: f64, tol: f64) -> bool {
    value <= tol * scale.max(1.0)
}

fn lemma(ctx: &Ctx, which: LemmaId) -> CmdResult<Body> {
    let mut body = Body::new();
    let tol = ctx.check_tol();
    let samples = ctx.opts.plane_samples();
    let n = ctx.chart.dim();
    let (neg, pos) = ctx.chart.signature();
    match which {
        LemmaId::B if n < 4 => return Err(format!("lemma B needs n >= 4, chart has n = {n}")),
        LemmaId::C if neg < 2 || pos < 2 => {
            return Err(format!(
                "lemma C needs signature (s, n-s) with s >= 2 and n-s >= 2, chart has ({neg},{pos})"
            ))
        }
        _ => {}
    }
    let mut consistent = true;
    let mut holds_everywhere = true;
    for (i, p) in ctx.points.iter().enumerate() {
        let b = ctx.bundle(p)?;
        let scale = b.riemann.max_abs();
        let seed = ctx.point_seed(i);
        let (hypothesis, conclusion, detail) = match which {
            LemmaId::A => {
                let test = degenerate_vanishing_test(&b.riemann, &b.metric, PlaneKind::Weak, samples, tol, seed)
                    .map_err(err)?;
                let (c, residual) = fit_c_pi1(&b.riemann, &b.metric).map_err(err)?;
                let fits = small(residual, scale, tol);
                (
                    test.passed,
                    fits,
                    json!({ "weak_vanishing": test, "c": c, "fit_residual": residual }),
                )
            }
            LemmaId::B => {
                let test = orthonormal_quadruple_test(&b.riemann, &b.metric, samples, tol, seed).map_err(err)?;
                let w = b.conformal_obstruction().unwrap_or(0.0);
                (
                    test.passed,
                    small(w, scale, tol),
                    json!({ "quadruple": test, "weyl_max": w }),
                )
            }
            LemmaId::C => {
                let test = degenerate_vanishing_test(&b.riemann, &b.metric, PlaneKind::Strong, samples, tol, seed)
                    .map_err(err)?;
                let w = b.conformal_obstruction().unwrap_or(0.0);
                (
                    test.passed,
                    small(w, scale, tol),
                    json!({ "strong_vanishing": test, "weyl_max": w }),
                )
            }
        };
        let agree = hypothesis == conclusion;
        consistent &= agree;
        holds_everywhere &= hypothesis;
        let (hyp_name, concl_name) = match which {
            LemmaId::A => ("vanishes on weakly degenerate planes", "R = cπ₁"),
            LemmaId::B => ("vanishes on orthonormal quadruples", "Weyl = 0"),
            LemmaId::C => ("vanishes on strongly degenerate planes", "Weyl = 0"),
        };
        body.text.push(format!(
            "{}: R {hyp_name}: {hypothesis}; {concl_name}: {conclusion}; consistent: {agree}",
            fmt_point(p)
        ));
        let mut entry = json!({ "point": p, "hypothesis": hypothesis, "conclusion": conclusion, "consistent": agree });
        if let (Some(dst), Some(src)) = (entry.as_object_mut(), detail.as_object()) {
            dst.extend(src.clone());
        }
        body.points.push(entry);
    }
    let status = if consistent { Status::Pass } else { Status::Fail };
    let summary = if consistent {
        format!("hypothesis and conclusion agree at every point (hypothesis holds everywhere: {holds_everywhere})")
    } else {
        "hypothesis and conclusion disagree at some point".to_string()
    };
    Ok(body.finish(status, summary))
}

fn is_conformal_family(c: &MapClass) -> bool {
    !matches!(c, MapClass::General)
}

fn gradient_class(c: &MapClass) -> GradientClass {
    match c {
        MapClass::Isometry | MapClass::Homothety { .. } => GradientClass::Zero,
        MapClass::Conformal { gradient_class, .. } => *gradient_class,
        MapClass::General => GradientClass::Mixed,
    }
}

fn theorem(ctx: &Ctx, which: u8) -> CmdResult<Body> {
    let mut body = Body::new();
    let (sigma, sigma_text) = ctx.sigma(false)?;
    let tol = ctx.check_tol();
    let samples = ctx.opts.plane_samples();
    let n = ctx.chart.dim();
    let (neg, pos) = ctx.chart.signature();
    if which == 3 && (neg < 2 || pos < 2) {
        return Err(format!(
            "theorem 3 needs signature (s, n-s) with s >= 2 and n-s >= 2, chart has ({neg},{pos})"
        ));
    }
    if neg == 0 || pos == 0 {
        return Err(format!(
            "theorem {which} needs an indefinite metric, chart has signature ({neg},{pos})"
        ));
    }
    let reports: Vec<ClassificationReport> = ctx.points.iter().map(|p| ctx.classify(p)).collect::<CmdResult<_>>()?;
    let nowhere_constant = reports.iter().all(|r| !r.constant_curvature.passed);
    let nowhere_conf_flat = reports.iter().all(|r| !r.conformally_flat.passed);
    let everywhere_conf_flat = reports.iter().all(|r| r.conformally_flat.passed);
    for r in &reports {
        body.text
            .push(format!("{}: [{}]", fmt_point(&r.point), r.tags.join(", ")));
        body.points.push(to_value(r));
    }
    body.text.push(format!("σ = {sigma_text}"));

    if which == 3 {
        let check = degenerate_condition_check(&ctx.chart, &sigma, PlaneKind::Strong, samples, tol, ctx.opts.seed)
            .map_err(err)?;
        body.text.push(format!(
            "strong-plane residual max|(e^(2σ)-1) R(ξ,η,η,ξ)| = {:.3e} on {} planes (tolerance {tol:e})",
            check.residual, check.planes
        ));
        body.checks = json!({ "nowhere_conformally_flat": nowhere_conf_flat, "strong_condition": check });
        return Ok(if !nowhere_conf_flat {
            body.finish(
                Status::Info,
                "hypothesis not met: the metric is conformally flat at a sampled point",
            )
        } else if check.passed {
            body.finish(
                Status::Pass,
                "strong-plane condition holds; σ vanishes on the samples, the map is an isometry",
            )
        } else {
            body.finish(
                Status::Fail,
                format!(
                    "strong-plane condition violated, residual {:.3e} > {tol:e}",
                    check.residual
                ),
            )
        });
    }

    let weak =
        degenerate_condition_check(&ctx.chart, &sigma, PlaneKind::Weak, samples, tol, ctx.opts.seed).map_err(err)?;
    body.text.push(format!(
        "weak-plane residual max|R̄(x,ξ,ξ,x) - e^(4σ) R(x,ξ,ξ,x)| = {:.3e} on {} planes",
        weak.residual, weak.planes
    ));
    let pb = ctx.pullback(&sigma)?;
    body.text
        .push(format!("map g -> e^(2σ) g: {}", describe_class(&pb.class)));
    let mut checks = json!({
        "n": n,
        "nowhere_constant_curvature": nowhere_constant,
        "nowhere_conformally_flat": nowhere_conf_flat,
        "weak_condition": weak,
        "pullback": pb,
    });
    let mut missing = Vec::new();
    if n < 3 {
        missing.push("n >= 3");
    }
    if !nowhere_constant {
        missing.push("nowhere of constant curvature");
    }
    if !weak.passed {
        missing.push("weak-plane condition");
    }
    if !missing.is_empty() {
        body.checks = checks;
        return Ok(body.finish(Status::Info, format!("hypotheses not met: {}", missing.join(", "))));
    }
    if which == 1 {
        body.checks = checks;
        return Ok(if is_conformal_family(&pb.class) {
            body.finish(
                Status::Pass,
                format!("map is conformal ({})", describe_class(&pb.class)),
            )
        } else {
            body.finish(Status::Fail, "weak-plane condition holds but the map is not conformal")
        });
    }

    // case split on the causal character of ∇σ
    let grad = gradient_class(&pb.class);
    let (case, status, summary) = if grad == GradientClass::Zero || (n >= 4 && nowhere_conf_flat) {
        let ok = pb.class == MapClass::Isometry;
        (
            "a",
            ok,
            format!("expected an isometry, found {}", describe_class(&pb.class)),
        )
    } else if n == 3 && !everywhere_conf_flat {
        (
            "none",
            true,
            "n = 3 and not conformally flat: no case applies".to_string(),
        )
    } else {
        match grad {
            GradientClass::Isotropic => {
                let knstar = reports.iter().all(|r| {
                    matches!(
                        r.recurrence.as_ref().map(|f| f.mode),
                        Some(RecurrenceMode::Recurrent) | Some(RecurrenceMode::SymmetricKnStar)
                    )
                });
                let ok = everywhere_conf_flat && knstar;
                checks["k_n_star"] = json!(knstar);
                checks["conformally_flat"] = json!(everywhere_conf_flat);
                (
                    "b",
                    ok,
                    format!("conformally flat: {everywhere_conf_flat}, K*_n: {knstar}"),
                )
            }
            GradientClass::Nonnull => {
                let mut worst = 0.0f64;
                let mut quasi = true;
                for (p, r) in ctx.points.iter().zip(&reports) {
                    let fit = &r.quasi_constant;
                    quasi &= fit.passed && fit.branch == QuasiConstantBranch::QuasiConstant;
                    if let Some(v) = &fit.v {
                        let g = ctx.chart.metric_at(p).map_err(err)?;
                        let grad = g.inverse().map_err(err)?.lower(&sigma.gradient(p));
                        worst = worst.max(1.0 - euclid_cos(v, &grad).abs());
                    }
                }
                let ok = quasi && worst <= tol;
                checks["quasi_constant"] = json!(quasi);
                checks["v_gradient_misalignment"] = json!(worst);
                (
                    "c",
                    ok,
                    format!("quasi-constant: {quasi}, 1 - |cos(V, ∇σ)| = {worst:.2e}"),
                )
            }
            _ => ("none", true, "∇σ changes causal character across samples".to_string()),
        }
    };
    checks["case"] = json!(case);
    body.checks = checks;
    body.text.push(format!("case {case}: {summary}"));
    let st = match (case, status) {
        ("none", _) => Status::Info,
        (_, true) => Status::Pass,
        (_, false) => Status::Fail,
    };
    Ok(body.finish(st, format!("case {case}: {summary}")))
}

fn euclid_cos(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}
