use orlicz::dist::DiscreteDistribution;
use orlicz::murphy::{elementary_score, ElementaryKind, ElementaryScoreSpec};
use orlicz::orliczfn::{catalog_lookup, PhiParams, CATALOG};
use orlicz::premium::{identification_residual, orlicz_premium};
use orlicz::scoring::{canonical_weight, verify_consistency, ScoringFamily};
use proptest::prelude::*;

fn params() -> PhiParams<f64> {
    PhiParams::default().p(1.5).q(0.35).alpha(0.4).lambda_mix(0.6)
}

// exp(alpha (y/x)^2) overflows for larger alpha once y/x reaches 100
fn score_params(name: &str) -> PhiParams<f64> {
    if name == "gauss-tail" {
        params().alpha(0.05)
    } else {
        params()
    }
}

fn dist_strategy() -> impl Strategy<Value = DiscreteDistribution<f64>> {
    prop::collection::vec((0.1f64..10.0, 0.05f64..1.0), 2..20).prop_map(|atoms| {
        let total: f64 = atoms.iter().map(|a| a.1).sum();
        let (xs, ws) = atoms.into_iter().map(|(x, w)| (x, w / total)).unzip();
        DiscreteDistribution::new(xs, ws).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn premium_is_homogeneous_and_between_extremes(d in dist_strategy(), lambda in 0.1f64..8.0) {
        for name in CATALOG {
            let s = catalog_lookup(name, &params()).unwrap();
            let h = orlicz_premium(&d, &s).unwrap().value;
            prop_assert!(h >= d.min() * (1.0 - 1e-12) && h <= d.max() * (1.0 + 1e-12), "{}", name);
            let hs = orlicz_premium(&d.scale(lambda).unwrap(), &s).unwrap().value;
            prop_assert!((hs - lambda * h).abs() <= 1e-9 * lambda * h, "{}: {} vs {}", name, hs, lambda * h);
        }
    }

    #[test]
    fn identification_changes_sign_at_premium(d in dist_strategy()) {
        for name in CATALOG.iter().filter(|n| **n != "quantile") {
            let s = catalog_lookup(name, &params()).unwrap();
            let h = orlicz_premium(&d, &s).unwrap().value;
            prop_assert!(identification_residual(&d, &s, 0.9 * h).unwrap().residual > 0.0);
            prop_assert!(identification_residual(&d, &s, 1.1 * h).unwrap().residual < 0.0);
        }
    }

    #[test]
    fn scores_nonnegative_and_quadrature_agrees(x in 0.1f64..10.0, y in 0.1f64..10.0) {
        for name in CATALOG {
            let s = catalog_lookup(name, &score_params(name)).unwrap();
            let canonical = ScoringFamily::canonical(s);
            let quad = ScoringFamily::with_weight(s, canonical_weight(&s));
            let c = canonical.score(x, y).unwrap();
            let q = quad.score(x, y).unwrap();
            prop_assert!(c >= -1e-12 * c.abs().max(1.0), "{}: {}", name, c);
            prop_assert!((c - q).abs() <= 1e-8 * c.abs().max(1.0), "{}: {} vs {}", name, c, q);
            prop_assert_eq!(canonical.score(x, x).unwrap(), 0.0);
        }
    }

    #[test]
    fn elementary_scores_nonnegative(x in 0.1f64..10.0, y in 0.1f64..10.0, z in 0.1f64..10.0) {
        let lce = catalog_lookup("lce", &params()).unwrap();
        for kind in [ElementaryKind::Generic(lce), ElementaryKind::PNorm { p: 2.0 }, ElementaryKind::Expectile { q: 0.3 }] {
            let spec = ElementaryScoreSpec::new(kind, z).unwrap();
            prop_assert!(elementary_score(&spec, x, y).unwrap() >= 0.0);
            prop_assert_eq!(elementary_score(&spec, x, x).unwrap(), 0.0);
        }
    }
}

#[test]
fn grid_minimizer_scales_with_the_distribution() {
    let d = DiscreteDistribution::new(vec![0.4, 1.0, 2.2, 5.0], vec![0.1, 0.4, 0.3, 0.2]).unwrap();
    for name in CATALOG {
        let family = ScoringFamily::canonical(catalog_lookup(name, &params()).unwrap());
        let base = verify_consistency(&family, &d, 400).unwrap();
        let lambda = 3.0;
        let scaled = verify_consistency(&family, &d.scale(lambda).unwrap(), 400).unwrap();
        assert!(
            (scaled.argmin - lambda * base.argmin).abs() <= scaled.step * (1.0 + 1e-9),
            "{name}: {} vs {}",
            scaled.argmin,
            lambda * base.argmin
        );
    }
}
