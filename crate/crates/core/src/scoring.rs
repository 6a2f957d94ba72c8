//! Strictly consistent scoring functions for Orlicz premia.
//!
//! The general family is `S(x, y) = \int_x^y h(z) (Phi(y/z) - 1) dz` for a
//! positive weight `h`. With `h = 1/z` it reduces to `varphi(log(y/x))`,
//! `varphi(t) = \int_0^t (Phi(e^s) - 1) ds`; with `h = 1/z^2` to
//! `\int_1^{y/x} (Phi(t) - 1) / y dt`. Every catalog row also has a closed
//! form, used by default.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::dist::{check_pairs, DiscreteDistribution};
use crate::error::{Error, Result};
use crate::orliczfn::{OrliczFunctionSpec, OrliczKind};
use crate::premium::orlicz_premium;
use crate::quadrature::{integrate, QuadOptions};
use crate::scalar::{pairwise_sum, spaced_grid, Scalar};

/// Mixing weight `h` of the scoring family; the scale multiplies the kernel.
#[derive(Clone)]
pub enum Weight<T> {
    /// `h(z) = c / z`
    InvZ(T),
    /// `h(z) = c / z^2`
    InvZ2(T),
    /// Any strictly positive, locally integrable `h`.
    Custom(Arc<dyn Fn(T) -> T + Send + Sync>),
}

impl<T: Scalar> Weight<T> {
    pub fn eval(&self, z: T) -> T {
        match self {
            Weight::InvZ(c) => *c / z,
            Weight::InvZ2(c) => *c / (z * z),
            Weight::Custom(h) => h(z),
        }
    }
}

impl<T: fmt::Debug> fmt::Debug for Weight<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Weight::InvZ(c) => write!(f, "InvZ({c:?})"),
            Weight::InvZ2(c) => write!(f, "InvZ2({c:?})"),
            Weight::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

/// Weight under which the closed-form score of a row equals the integral
/// representation: `1/z` for the first eight rows (`2/z` for lce, whose
/// closed form is `log(y/x)^2`), `1/z^2` for the exponential rows.
pub fn canonical_weight<T: Scalar>(spec: &OrliczFunctionSpec<T>) -> Weight<T> {
    match spec.kind() {
        OrliczKind::Lce => Weight::InvZ(T::lit(2.0)),
        OrliczKind::ExpAlpha { .. } | OrliczKind::GaussTail { .. } | OrliczKind::ExpCentered => {
            Weight::InvZ2(T::one())
        }
        _ => Weight::InvZ(T::one()),
    }
}

/// Closed-form score of a catalog row (its canonical weight).
///
/// For expectiles the asymmetry weight is `q` when the outcome exceeds the
/// forecast and `1 - q` otherwise, applied to the QLIKE kernel
/// `y/x - log(y/x) - 1`; that kernel is nonnegative, so the split is by the
/// sign of `log(y/x)`.
pub fn closed_form_score<T: Scalar>(spec: &OrliczFunctionSpec<T>, x: T, y: T) -> T {
    let one = T::one();
    let two = T::lit(2.0);
    let r = y / x;
    let t = r.ln();
    let qlike = || r - one - t;
    match spec.kind() {
        OrliczKind::Mean => qlike(),
        OrliczKind::Quantile { alpha } => {
            let ind = if x >= y { one } else { T::zero() };
            (ind - alpha) * -t
        }
        OrliczKind::Expectile { q } => {
            if y > x {
                q * qlike()
            } else {
                (one - q) * qlike()
            }
        }
        OrliczKind::Lce => t * t,
        OrliczKind::PNorm { p } => (r.powf(p) - one) / p - t,
        OrliczKind::MeanVariance { lambda, p } => {
            let rp = r.powf(p);
            (one - lambda) / (two * p) * rp * rp + lambda / p * rp - t - (lambda + one) / (two * p)
        }
        OrliczKind::EntropicLog => {
            let u = r + T::E() - one;
            u * (u.ln() - one) - t
        }
        OrliczKind::PNormLog { p } => {
            let rp = r.powf(p);
            let base = -t + (rp - one) / p;
            if y > x {
                base + rp * t / p - (rp - one) / (p * p)
            } else {
                base
            }
        }
        OrliczKind::ExpAlpha { alpha } => {
            let lead = alpha.exp() / alpha.exp_m1();
            lead * ((alpha * (r - one)).exp_m1() / (alpha * y) + one / y - one / x)
        }
        OrliczKind::GaussTail { alpha } => {
            (alpha * (r * r - one)).exp_m1() / (two * alpha * y) + one / y - one / x
        }
        OrliczKind::ExpCentered => {
            let e = T::E();
            ((r.exp() - T::lit(0.5)) / y + ((two - two * e) * x - y) / (two * x * x)) / (e - two)
        }
    }
}

/// `varphi(t) = \int_0^t (Phi(e^s) - 1) ds`, by quadrature.
pub fn varphi<T: Scalar>(spec: &OrliczFunctionSpec<T>, t: T) -> Result<T> {
    integrate(
        |s: T| spec.evaluate(s.exp()) - T::one(),
        T::zero(),
        t,
        &QuadOptions::default(),
    )
}

/// `\int_1^{y/x} (Phi(t) - 1) / y dt`: the `h = 1/z^2` member, by quadrature.
pub fn unit_ratio_score<T: Scalar>(spec: &OrliczFunctionSpec<T>, x: T, y: T) -> Result<T> {
    check_args(x, y)?;
    integrate(
        |t: T| (spec.evaluate(t) - T::one()) / y,
        T::one(),
        y / x,
        &QuadOptions::default(),
    )
}

fn check_args<T: Scalar>(x: T, y: T) -> Result<()> {
    if x > T::zero() && y > T::zero() && x.is_finite() && y.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPositiveArgs {
            x: x.as_f64(),
            y: y.as_f64(),
        })
    }
}

/// A scoring function for the premium of `spec`: a weight `h` and, for the
/// canonical weight, the closed form.
#[derive(Debug, Clone)]
pub struct ScoringFamily<T> {
    spec: OrliczFunctionSpec<T>,
    weight: Weight<T>,
    closed_form: bool,
}

impl<T: Scalar> ScoringFamily<T> {
    /// Catalog row with its canonical weight; scores use the closed form.
    pub fn canonical(spec: OrliczFunctionSpec<T>) -> Self {
        Self {
            weight: canonical_weight(&spec),
            spec,
            closed_form: true,
        }
    }

    /// Arbitrary weight; scores are computed by quadrature.
    pub fn with_weight(spec: OrliczFunctionSpec<T>, weight: Weight<T>) -> Self {
        Self {
            spec,
            weight,
            closed_form: false,
        }
    }

    pub fn spec(&self) -> &OrliczFunctionSpec<T> {
        &self.spec
    }

    pub fn weight(&self) -> &Weight<T> {
        &self.weight
    }

    pub fn has_closed_form(&self) -> bool {
        self.closed_form
    }

    /// `S(x, y)`: closed form when available, quadrature otherwise.
    pub fn score(&self, x: T, y: T) -> Result<T> {
        check_args(x, y)?;
        if x == y {
            return Ok(T::zero());
        }
        if self.closed_form {
            Ok(closed_form_score(&self.spec, x, y))
        } else {
            self.score_by_quadrature(x, y)
        }
    }

    /// `\int_x^y h(z) (Phi(y/z) - 1) dz` by adaptive quadrature.
    pub fn score_by_quadrature(&self, x: T, y: T) -> Result<T> {
        check_args(x, y)?;
        let one = T::one();
        integrate(
            |z: T| self.weight.eval(z) * (self.spec.evaluate(y / z) - one),
            x,
            y,
            &QuadOptions::default(),
        )
    }

    /// `E[S(x, Y)]` under `dist`, as an exact finite sum.
    pub fn expected_score(&self, dist: &DiscreteDistribution<T>, x: T) -> Result<T> {
        let terms = dist
            .iter()
            .map(|(y, w)| self.score(x, y).map(|s| w * s))
            .collect::<Result<Vec<T>>>()?;
        Ok(pairwise_sum(&terms))
    }
}

/// Per-observation scores of one forecaster and their mean.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoreReport<T> {
    pub forecaster: String,
    pub n: usize,
    pub mean_score: T,
    #[serde(skip)]
    pub scores: Vec<T>,
}

/// Mean score over paired forecasts and outcomes (pairwise summation).
pub fn mean_score<T: Scalar>(
    family: &ScoringFamily<T>,
    forecaster: &str,
    forecasts: &[T],
    outcomes: &[T],
) -> Result<ScoreReport<T>> {
    check_pairs(forecasts, outcomes)?;
    let scores = forecasts
        .iter()
        .zip(outcomes)
        .map(|(&x, &y)| family.score(x, y))
        .collect::<Result<Vec<T>>>()?;
    let mean_score = pairwise_sum(&scores) / T::from_usize(scores.len()).unwrap();
    Ok(ScoreReport {
        forecaster: forecaster.to_string(),
        n: scores.len(),
        mean_score,
        scores,
    })
}

/// Smallest grid accepted by [`verify_consistency`].
pub const MIN_CONSISTENCY_GRID: usize = 200;

/// Population expected score on a grid around the premium.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConsistencyReport<T> {
    pub grid: Vec<T>,
    pub expected_scores: Vec<T>,
    pub argmin: T,
    pub premium: T,
    pub step: T,
}

/// Checks that `x -> E[S(x, Y)]` on a linear grid over
/// `[0.5 min, 2 max]` is minimized within one grid step of the premium,
/// nonincreasing before its minimizer and nondecreasing after it (slack
/// `1e-10` relative to magnitude).
pub fn verify_consistency<T: Scalar>(
    family: &ScoringFamily<T>,
    dist: &DiscreteDistribution<T>,
    grid: usize,
) -> Result<ConsistencyReport<T>> {
    let n = grid.max(MIN_CONSISTENCY_GRID);
    let lo = dist.min() * T::lit(0.5);
    let hi = dist.max() * T::lit(2.0);
    let xs = spaced_grid(lo, hi, n, false);
    let step = (hi - lo) / T::from_usize(n - 1).unwrap();
    let expected = xs
        .iter()
        .map(|&x| family.expected_score(dist, x))
        .collect::<Result<Vec<T>>>()?;
    let (imin, _) = expected
        .iter()
        .enumerate()
        .fold((0, T::infinity()), |(bi, bv), (i, &v)| if v < bv { (i, v) } else { (bi, bv) });
    let premium = orlicz_premium(dist, family.spec())?.value;
    let argmin = xs[imin];

    if (argmin - premium).abs() > step * (T::one() + T::lit(1e-9)) {
        return Err(Error::ConsistencyViolation {
            x: argmin.as_f64(),
            detail: format!("grid minimizer {argmin} is more than one step ({step}) from premium {premium}"),
        });
    }
    let slack = |v: T| T::lit(1e-10) * v.abs().max(T::one());
    for i in 0..n - 1 {
        let (a, b) = (expected[i], expected[i + 1]);
        if a.is_infinite() && b.is_infinite() {
            continue;
        }
        if i < imin && b > a + slack(a) {
            return Err(Error::ConsistencyViolation {
                x: xs[i + 1].as_f64(),
                detail: format!("expected score increases left of the minimizer ({a} -> {b})"),
            });
        }
        if i >= imin && b < a - slack(a) {
            return Err(Error::ConsistencyViolation {
                x: xs[i + 1].as_f64(),
                detail: format!("expected score decreases right of the minimizer ({a} -> {b})"),
            });
        }
    }
    Ok(ConsistencyReport {
        grid: xs,
        expected_scores: expected,
        argmin,
        premium,
        step,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::orliczfn::{catalog_lookup, PhiParams, CATALOG};
    use std::f64::consts::E;

    fn family(name: &str, params: PhiParams<f64>) -> ScoringFamily<f64> {
        ScoringFamily::canonical(catalog_lookup(name, &params).unwrap())
    }

    fn u12() -> DiscreteDistribution<f64> {
        DiscreteDistribution::uniform(vec![1.0, 2.0]).unwrap()
    }

    #[test]
    fn qlike_at_one_e() {
        let s = family("mean", PhiParams::default()).score(1.0, E).unwrap();
        assert!((s - (E - 2.0)).abs() < 1e-15);
    }

    #[test]
    fn zero_at_truth_for_every_row() {
        let params = PhiParams::<f64>::default().p(2.0).q(0.3).alpha(0.6).lambda_mix(0.5);
        for name in CATALOG {
            let f = family(name, params);
            assert_eq!(f.score(3.7, 3.7).unwrap(), 0.0, "{name}");
            assert!(closed_form_score(f.spec(), 3.7, 3.7).abs() < 1e-14, "{name}");
        }
    }

    #[test]
    fn pqlike_and_lce_examples() {
        let s = family("pnorm", PhiParams::default().p(2.0)).score(1.0, 2.0).unwrap();
        assert!((s - (1.5 - 2f64.ln())).abs() < 1e-15);
        let l = family("lce", PhiParams::default()).score(1.0, E).unwrap();
        assert!((l - 1.0).abs() < 1e-15);
    }

    #[test]
    fn expectile_weights_by_side() {
        let f = family("expectile", PhiParams::default().q(0.8));
        let g = |x: f64, y: f64| y / x - (y / x).ln() - 1.0;
        assert!((f.score(1.0, 3.0).unwrap() - 0.8 * g(1.0, 3.0)).abs() < 1e-15);
        assert!((f.score(3.0, 1.0).unwrap() - 0.2 * g(3.0, 1.0)).abs() < 1e-15);
    }

    #[test]
    fn rejects_nonpositive_args() {
        let f = family("mean", PhiParams::default());
        assert!(matches!(f.score(0.0, 1.0), Err(Error::NonPositiveArgs { .. })));
        assert!(matches!(f.score(1.0, -2.0), Err(Error::NonPositiveArgs { .. })));
    }

    #[test]
    fn quadrature_routes_agree_with_closed_forms() {
        let params = PhiParams::<f64>::default().p(1.5).q(0.3).alpha(0.4).lambda_mix(0.25);
        let pairs: [(f64, f64); 5] = [(0.5, 2.0), (2.0, 0.5), (1.0, 1.3), (3.0, 2.9), (0.2, 0.9)];
        for name in CATALOG {
            let spec = catalog_lookup(name, &params).unwrap();
            let canonical = ScoringFamily::canonical(spec);
            let quad = ScoringFamily::with_weight(spec, canonical_weight(&spec));
            for &(x, y) in &pairs {
                let c = canonical.score(x, y).unwrap();
                let q = quad.score(x, y).unwrap();
                assert!((c - q).abs() <= 1e-8 * c.abs().max(1.0), "{name} ({x},{y}): {c} vs {q}");
                match canonical_weight(&spec) {
                    Weight::InvZ(scale) => {
                        let v = scale * varphi(&spec, (y / x).ln()).unwrap();
                        assert!((c - v).abs() <= 1e-8 * c.abs().max(1.0), "{name} varphi");
                    }
                    Weight::InvZ2(_) => {
                        let v = unit_ratio_score(&spec, x, y).unwrap();
                        assert!((c - v).abs() <= 1e-8 * c.abs().max(1.0), "{name} unit ratio");
                    }
                    Weight::Custom(_) => unreachable!(),
                }
            }
        }
    }

    #[test]
    fn custom_weight_is_still_consistent() {
        let spec = catalog_lookup("pnorm", &PhiParams::default().p(2.0)).unwrap();
        let f = ScoringFamily::with_weight(spec, Weight::Custom(Arc::new(|z: f64| 1.0 + z.sin().powi(2))));
        let d = DiscreteDistribution::new(vec![1.0, 2.0, 4.0], vec![0.5, 0.3, 0.2]).unwrap();
        let r = verify_consistency(&f, &d, 200).unwrap();
        assert!((r.argmin - r.premium).abs() <= r.step);
    }

    #[test]
    fn mean_score_examples() {
        let f = family("mean", PhiParams::default());
        let ys = [1.0, 2.0, 3.0];
        assert_eq!(mean_score(&f, "perfect", &ys, &ys).unwrap().mean_score, 0.0);
        let constant = [2.0; 3];
        let r = mean_score(&f, "flat", &constant, &ys).unwrap();
        let d = DiscreteDistribution::uniform(ys.to_vec()).unwrap();
        assert!((r.mean_score - f.expected_score(&d, 2.0).unwrap()).abs() < 1e-15);
        assert_eq!(r.n, 3);
        assert!(matches!(
            mean_score(&f, "bad", &[1.0], &ys),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn consistency_examples_on_u12() {
        let cases = [
            ("mean", PhiParams::default(), 1.5),
            ("lce", PhiParams::default(), 2f64.sqrt()),
            ("expectile", PhiParams::default().q(0.9), 1.9),
        ];
        for (name, params, expected) in cases {
            let r = verify_consistency(&family(name, params), &u12(), 400).unwrap();
            assert!((r.argmin - expected).abs() <= r.step, "{name}: {}", r.argmin);
        }
    }

    #[test]
    fn constant_weight_expectile_is_consistent() {
        let spec = catalog_lookup("expectile", &PhiParams::default().q(0.9)).unwrap();
        let f = ScoringFamily::with_weight(spec, Weight::Custom(Arc::new(|_z: f64| 1.0)));
        let r = verify_consistency(&f, &u12(), 400).unwrap();
        assert!((r.argmin - 1.9).abs() <= r.step);
    }

    #[test]
    fn f32_scores() {
        let spec = catalog_lookup("mean", &PhiParams::default()).unwrap();
        let f = ScoringFamily::<f32>::canonical(spec);
        assert!((f.score(1.0, std::f32::consts::E).unwrap() - 0.718_281_8).abs() < 1e-5);
    }
}
