use proptest::prelude::*;

use curvedcheck_core::conformal::{conformal_change, ScalarField};
use curvedcheck_core::planes::{classify_plane, sample_degenerate_planes, sectional_curvature, PlaneKind, PlaneTag};
use curvedcheck_core::registry::{self, Catalog, ManifoldSpec, Params};
use curvedcheck_core::{curvature_bundle, Chart, MetricChart};

#[test]
fn catalog_entries_keep_their_signature_over_the_domain() {
    let catalog = Catalog::builtin();
    for name in catalog.names() {
        let chart = registry::instantiate(&ManifoldSpec::new(name)).unwrap();
        let sig = chart.signature();
        for p in chart.sample_points(64, 3) {
            assert_eq!(chart.signature_at(&p).unwrap(), sig, "{name} at {p:?}");
        }
    }
}

#[test]
fn catalog_rejects_unknown_parameters() {
    let base = "[[manifold]]\nname = \"x\"\nconstruction = \"closed_form\"\ndescription = \"\"\nprovenance = \"\"\ndomain = \"unit box\"\n\
                [manifold.defaults]\nc = 1.0\n";
    assert_eq!(Catalog::from_toml_str(base).unwrap().names(), vec!["x"]);
    assert!(Catalog::from_toml_str(&format!("{base}bogus = 1\n")).is_err());
}

#[test]
fn instantiate_applies_overrides() {
    let spec = ManifoldSpec::new("constant_curvature").with(Params {
        c: Some(-2.0),
        s: Some(2),
        n: Some(5),
        ..Params::default()
    });
    let chart = registry::instantiate(&spec).unwrap();
    assert_eq!(chart.dim(), 5);
    assert_eq!(chart.signature(), (2, 3));
    let p = chart.sample_points(1, 0).remove(0);
    let b = curvature_bundle(&chart, &p).unwrap();
    let pi1 = curvedcheck_core::build_pi1(&b.metric).unwrap();
    assert!(b.riemann.max_diff(&pi1.scaled(-2.0)) < 1e-9);
}

#[test]
fn dsl_round_trip_reproduces_registry_metrics() {
    let charts: Vec<Chart> = vec![
        registry::constant_curvature(0.7, 1, 4).unwrap(),
        registry::example2("t^2", 2, 4).unwrap(),
        registry::ppwave("exp(u)", 4).unwrap(),
        registry::generic22().unwrap(),
        registry::random_analytic_metric(5, 1, 4).unwrap(),
    ];
    for chart in charts {
        let text = chart.grid().expect("symbolic chart").to_dsl();
        let again = Chart::from_dsl("again", &text, chart.domain().to_vec()).unwrap();
        for p in chart.sample_points(5, 1) {
            let a = curvature_bundle(&chart, &p).unwrap();
            let b = curvature_bundle(&again, &p).unwrap();
            assert!(
                a.metric.add_scaled(-1.0, &b.metric).unwrap().max_abs() < 1e-10,
                "{}",
                chart.name()
            );
            assert!(a.riemann.max_diff(&b.riemann) < 1e-10, "{}", chart.name());
        }
    }
}

#[test]
fn weyl_tensor_is_conformally_covariant() {
    let chart = registry::random_analytic_metric(21, 1, 4).unwrap();
    let sigma = ScalarField::parse("0.2*x0 - 0.1*x1*x2 + 0.05*sin(x3)", 4).unwrap();
    let cc = conformal_change(&chart, &sigma).unwrap();
    for p in chart.sample_points(4, 2) {
        let w = curvature_bundle(&chart, &p).unwrap().weyl.unwrap();
        let wb = curvature_bundle(&cc.bar, &p).unwrap().weyl.unwrap();
        let factor = (2.0 * sigma.value(&p)).exp();
        assert!(wb.max_diff(&w.scaled(factor)) < 1e-9 * (1.0 + w.max_abs()));
    }
}

#[test]
fn three_dimensional_obstruction_is_the_cotton_tensor() {
    let round = registry::constant_curvature(1.0, 0, 3).unwrap();
    let p = round.sample_points(1, 0).remove(0);
    let b = curvature_bundle(&round, &p).unwrap();
    assert!(b.weyl.is_none());
    assert!(b.conformal_obstruction().unwrap() < 1e-9);

    let generic = registry::random_analytic_metric(4, 1, 3).unwrap();
    let p = generic.sample_points(1, 0).remove(0);
    assert!(curvature_bundle(&generic, &p).unwrap().conformal_obstruction().unwrap() > 1e-4);
}

#[test]
fn single_precision_pipeline_runs() {
    let chart = MetricChart::<f32>::from_dsl(
        "sphere",
        "dim=2; g[0][0]=1; g[1][1]=sin(x0)^2;",
        vec![(0.5, 2.5), (-1.0, 1.0)],
    )
    .unwrap();
    let b = curvature_bundle(&chart, &[1.2f32, 0.3]).unwrap();
    let k = b.riemann.get(0, 1, 1, 0) / (b.metric.get(0, 0) * b.metric.get(1, 1));
    assert!((k - 1.0).abs() < 1e-4, "K = {k}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn sectional_curvature_ignores_the_basis(
        seed in 0u64..1000,
        a in 0.3f64..2.0, b in -1.5f64..1.5, c in -1.5f64..1.5, d in 0.3f64..2.0,
    ) {
        prop_assume!((a * d - b * c).abs() > 0.2);
        let chart = registry::random_analytic_metric(seed % 7, 1, 4).unwrap();
        let p = chart.sample_points(1, seed).remove(0);
        let bundle = curvature_bundle(&chart, &p).unwrap();
        let plane = curvedcheck_core::Plane::new(p.clone(), vec![1.0, 0.2, -0.3, 0.5], vec![0.1, 1.0, 0.4, -0.2]).unwrap();
        prop_assume!(classify_plane(&bundle.metric, &plane, 1e-9).unwrap().tag == PlaneTag::Nondegenerate);
        let k0 = sectional_curvature(&bundle.riemann, &bundle.metric, &plane).unwrap();
        let k1 = sectional_curvature(&bundle.riemann, &bundle.metric, &plane.rebased(a, b, c, d).unwrap()).unwrap();
        prop_assert!((k0 - k1).abs() < 1e-8 * (1.0 + k0.abs()));
    }

    #[test]
    fn degenerate_tags_survive_rebasing(
        seed in 0u64..1000,
        a in 0.3f64..2.0, b in -1.5f64..1.5, c in -1.5f64..1.5, d in 0.3f64..2.0,
        strong in any::<bool>(),
    ) {
        prop_assume!((a * d - b * c).abs() > 0.2);
        let g = curvedcheck_core::Bilinear::signature_form(2, 4);
        let kind = if strong { PlaneKind::Strong } else { PlaneKind::Weak };
        let want = if strong { PlaneTag::StronglyDegenerate } else { PlaneTag::WeaklyDegenerate };
        let plane = sample_degenerate_planes(&g, &[0.0; 4], kind, 1, seed).unwrap().remove(0);
        prop_assert_eq!(classify_plane(&g, &plane, 1e-9).unwrap().tag, want);
        let moved = plane.rebased(a, b, c, d).unwrap();
        prop_assert_eq!(classify_plane(&g, &moved, 1e-9).unwrap().tag, want);
    }
}

#[test]
fn finite_difference_classification_of_constant_curvature_terminates() {
    use curvedcheck_core::classify::{classify_point, QuasiConstantBranch, Tolerances};
    use curvedcheck_core::DerivativePath;
    let chart = registry::constant_curvature(1.0, 1, 4)
        .unwrap()
        .with_path(DerivativePath::FiniteDifference)
        .unwrap();
    for p in chart.sample_points(3, 0) {
        let r = classify_point(&chart, &p, Tolerances::for_path(DerivativePath::FiniteDifference)).unwrap();
        assert!(r.constant_curvature.passed);
        assert_eq!(r.quasi_constant.branch, QuasiConstantBranch::ConstantCurvature);
    }
}
