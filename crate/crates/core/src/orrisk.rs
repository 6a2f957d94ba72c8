//! Optimized return risk measures `rho(X) = inf_x {x + inner((X - x)^+)}`.

use serde::Serialize;

use crate::dist::DiscreteDistribution;
use crate::error::{Error, Result};
use crate::orliczfn::OrliczFunctionSpec;
use crate::premium::{level_premium, BisectionOptions};
use crate::scalar::{pairwise_sum, Scalar};

/// Inner functional on nonnegative weighted samples. Callers promise
/// positive homogeneity and monotonicity; [`or_risk`] never passes an
/// all-zero sample (its value is taken to be zero).
pub trait ReturnRiskMeasure<T>: Send + Sync {
    fn name(&self) -> String;
    fn evaluate(&self, values: &[T], weights: &[T]) -> Result<T>;
    /// Whether the functional is convex; enables the subadditivity checks.
    fn is_convex(&self) -> bool;
}

fn check_level<T: Scalar>(level: T) -> Result<()> {
    if level >= T::zero() && level < T::one() {
        Ok(())
    } else {
        Err(Error::ParamOutOfRange {
            name: "lambda",
            value: level.as_f64(),
            expected: "0 <= lambda < 1",
        })
    }
}

/// `E[Y] / (1 - level)`; at level 0 the plain expectation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledExpectation<T> {
    level: T,
}

impl<T: Scalar> ScaledExpectation<T> {
    pub fn new(level: T) -> Result<Self> {
        check_level(level)?;
        Ok(Self { level })
    }

    pub fn level(&self) -> T {
        self.level
    }
}

impl<T: Scalar> ReturnRiskMeasure<T> for ScaledExpectation<T> {
    fn name(&self) -> String {
        if self.level == T::zero() {
            "expectation".into()
        } else {
            format!("avar({})", self.level)
        }
    }

    fn evaluate(&self, values: &[T], weights: &[T]) -> Result<T> {
        let terms: Vec<T> = values.iter().zip(weights).map(|(&v, &w)| v * w).collect();
        Ok(pairwise_sum(&terms) / (T::one() - self.level))
    }

    fn is_convex(&self) -> bool {
        true
    }
}

/// `inf{k > 0 : E[Phi(Y/k)] <= 1 - level}`. Needs `Phi(0) < 1 - level`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HaezendonckGoovaerts<T> {
    spec: OrliczFunctionSpec<T>,
    level: T,
}

impl<T: Scalar> HaezendonckGoovaerts<T> {
    pub fn new(spec: OrliczFunctionSpec<T>, level: T) -> Result<Self> {
        check_level(level)?;
        let at_zero = spec.evaluate(T::zero());
        if !(at_zero < T::one() - level) {
            return Err(Error::InvalidParams(format!(
                "{}: Phi(0) = {at_zero} is not below 1 - lambda = {}",
                spec.name(),
                T::one() - level
            )));
        }
        Ok(Self { spec, level })
    }
}

impl<T: Scalar> ReturnRiskMeasure<T> for HaezendonckGoovaerts<T> {
    fn name(&self) -> String {
        format!("hg({}, {})", self.spec.name(), self.level)
    }

    fn evaluate(&self, values: &[T], weights: &[T]) -> Result<T> {
        let opts = BisectionOptions {
            residual_tol: T::zero(),
            ..BisectionOptions::default()
        };
        level_premium(values, weights, &self.spec, T::one() - self.level, &opts)
            .map_err(|e| Error::InnerEvaluationFailure(format!("{}: {e}", self.name())))
    }

    fn is_convex(&self) -> bool {
        self.spec.flags().is_convex
    }
}

/// Result of [`or_risk`]; `boundary_flag` marks a minimizer at an edge of
/// the search bracket `[min - range, max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ORResult<T> {
    pub value: T,
    pub minimizer: T,
    #[serde(skip)]
    pub evaluations: usize,
    #[serde(rename = "boundary_flag")]
    pub boundary: bool,
}

/// `x + inner((X - x)^+)`.
pub fn or_objective<T: Scalar, R: ReturnRiskMeasure<T> + ?Sized>(
    dist: &DiscreteDistribution<T>,
    inner: &R,
    x: T,
) -> Result<T> {
    let excess: Vec<T> = dist.support().iter().map(|&s| (s - x).max(T::zero())).collect();
    if excess.iter().all(|&v| v == T::zero()) {
        return Ok(x);
    }
    let value = inner.evaluate(&excess, dist.weights())?;
    if !value.is_finite() {
        return Err(Error::InnerEvaluationFailure(format!(
            "{} returned {value} at x = {x}",
            inner.name()
        )));
    }
    Ok(x + value)
}

const GOLDEN_ITERS: usize = 200;

// Golden-section search on [a, b]; returns the best probed point.
fn golden_section<T: Scalar, G: FnMut(T) -> Result<T>>(
    g: &mut G,
    a: T,
    b: T,
    evaluations: &mut usize,
) -> Result<(T, T)> {
    let inv_phi = (T::lit(5.0).sqrt() - T::one()) / T::lit(2.0);
    let (mut a, mut b) = (a, b);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut gc, mut gd) = (g(c)?, g(d)?);
    *evaluations += 2;
    let tol = T::lit(1e-13);
    for _ in 0..GOLDEN_ITERS {
        if (b - a) <= tol * a.abs().max(b.abs()).max(T::one()) {
            break;
        }
        if gc <= gd {
            b = d;
            d = c;
            gd = gc;
            c = b - inv_phi * (b - a);
            gc = g(c)?;
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + inv_phi * (b - a);
            gd = g(d)?;
        }
        *evaluations += 1;
    }
    Ok(if gc <= gd { (c, gc) } else { (d, gd) })
}

/// Minimizes `x + inner((X - x)^+)` over `[min - range, max]`: golden
/// section inside every interval between consecutive bracket and support
/// points, then comparison with the points themselves. A degenerate
/// distribution uses `max(|c|, 1)` as its range.
pub fn or_risk<T: Scalar, R: ReturnRiskMeasure<T> + ?Sized>(
    dist: &DiscreteDistribution<T>,
    inner: &R,
) -> Result<ORResult<T>> {
    let (min, max) = (dist.min(), dist.max());
    let range = if max > min { max - min } else { max.abs().max(T::one()) };
    let lo = min - range;
    let mut knots = vec![lo];
    knots.extend_from_slice(dist.support());

    let mut evaluations = 0;
    let mut g = |x: T| or_objective(dist, inner, x);
    let mut best = (T::nan(), T::infinity());
    let consider = |x: T, v: T, best: &mut (T, T)| {
        if v < best.1 || (v == best.1 && x < best.0) {
            *best = (x, v);
        }
    };
    for &k in &knots {
        let v = g(k)?;
        evaluations += 1;
        consider(k, v, &mut best);
    }
    for w in knots.windows(2) {
        let (x, v) = golden_section(&mut g, w[0], w[1], &mut evaluations)?;
        consider(x, v, &mut best);
    }
    let (minimizer, value) = best;
    Ok(ORResult {
        value,
        minimizer,
        evaluations,
        boundary: minimizer == lo || minimizer == max,
    })
}

/// `(1 / (1 - level)) \int_level^1 q_a da`, accumulating each atom's share
/// of the upper tail.
pub fn average_value_at_risk<T: Scalar>(dist: &DiscreteDistribution<T>, level: T) -> Result<T> {
    check_level(level)?;
    let mut cum = T::zero();
    let mut terms = Vec::with_capacity(dist.len());
    for (x, w) in dist.iter() {
        let lower = cum.max(level);
        cum = cum + w;
        let upper = cum.min(T::one()).max(level);
        terms.push(x * (upper - lower));
    }
    // any mass lost to rounding of the cumulative sum belongs to the top atom
    let tail = T::one() - cum.max(level);
    if tail > T::zero() {
        terms.push(dist.max() * tail);
    }
    Ok(pairwise_sum(&terms) / (T::one() - level))
}

/// Diagnostics from [`or_property_check`]: worst discrepancy per property.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyReport<T> {
    pub inner: String,
    pub checks: usize,
    pub max_homogeneity_error: T,
    pub max_translation_error: T,
    pub min_shift_increase: T,
    /// `None` when the inner functional is not convex.
    pub max_subadditivity_excess: Option<T>,
}

const PROPERTY_TOL: f64 = 1e-8;

/// Checks monotonicity under nonnegative shifts, positive homogeneity,
/// translation invariance (both within `1e-8` relative) and, for convex
/// inner functionals, subadditivity on comonotone and independent couplings.
pub fn or_property_check<T: Scalar, R: ReturnRiskMeasure<T> + ?Sized>(
    pairs: &[(DiscreteDistribution<T>, DiscreteDistribution<T>)],
    inner: &R,
    scales: &[T],
    shifts: &[T],
) -> Result<PropertyReport<T>> {
    let tol = T::lit(PROPERTY_TOL);
    let rel = |v: T| tol * v.abs().max(T::one());
    let mut report = PropertyReport {
        inner: inner.name(),
        checks: 0,
        max_homogeneity_error: T::zero(),
        max_translation_error: T::zero(),
        min_shift_increase: T::infinity(),
        max_subadditivity_excess: inner.is_convex().then(|| T::neg_infinity()),
    };
    let violation = |property: &'static str, witness: String| Error::PropertyViolation { property, witness };

    for (i, (x, y)) in pairs.iter().enumerate() {
        let rx = or_risk(x, inner)?.value;
        for &s in scales {
            let scaled = or_risk(&x.scale(s)?, inner)?.value;
            let err = (scaled - s * rx).abs();
            report.max_homogeneity_error = report.max_homogeneity_error.max(err / (s * rx).abs().max(T::one()));
            report.checks += 1;
            if err > rel(s * rx) {
                return Err(violation(
                    "positive homogeneity",
                    format!("pair {i}, scale {s}: rho(sX) = {scaled}, s rho(X) = {}", s * rx),
                ));
            }
        }
        for &h in shifts {
            if h < T::zero() {
                return Err(Error::ParamOutOfRange {
                    name: "shift",
                    value: h.as_f64(),
                    expected: "shift >= 0",
                });
            }
            let shifted = or_risk(&x.shift(h)?, inner)?.value;
            let err = (shifted - rx - h).abs();
            report.max_translation_error = report.max_translation_error.max(err / (rx + h).abs().max(T::one()));
            report.min_shift_increase = report.min_shift_increase.min(shifted - rx);
            report.checks += 2;
            if shifted < rx - rel(rx) {
                return Err(violation(
                    "monotonicity",
                    format!("pair {i}, shift {h}: rho(X + h) = {shifted} < rho(X) = {rx}"),
                ));
            }
            if err > rel(rx + h) {
                return Err(violation(
                    "translation invariance",
                    format!("pair {i}, shift {h}: rho(X + h) = {shifted}, rho(X) + h = {}", rx + h),
                ));
            }
        }
        if let Some(worst) = report.max_subadditivity_excess.as_mut() {
            let ry = or_risk(y, inner)?.value;
            for (coupling, sum) in [("comonotone", x.comonotone_sum(y)?), ("independent", x.independent_sum(y)?)] {
                let rs = or_risk(&sum, inner)?.value;
                let excess = rs - rx - ry;
                *worst = worst.max(excess);
                report.checks += 1;
                if excess > rel(rx + ry) {
                    return Err(violation(
                        "subadditivity",
                        format!("pair {i}, {coupling}: rho(X + Y) = {rs} > rho(X) + rho(Y) = {}", rx + ry),
                    ));
                }
            }
        }
    }
    Ok(report)
}
