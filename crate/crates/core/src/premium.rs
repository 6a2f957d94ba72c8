//! Orlicz premia `H(X) = inf{k > 0 : E[Phi(X/k)] <= 1}`.

use serde::Serialize;

use crate::dist::DiscreteDistribution;
use crate::error::{Error, Result};
use crate::orliczfn::{OrliczFunctionSpec, OrliczKind};
use crate::scalar::{pairwise_sum, pos, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PremiumMethod {
    ClosedForm,
    Bisection,
}

/// Premium value with its provenance. Serializes as `{value, method, residual}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PremiumResult<T> {
    pub value: T,
    pub method: PremiumMethod,
    /// `|E[Phi(X/value)] - 1|`
    pub residual: T,
    #[serde(skip)]
    pub bracket: (T, T),
    #[serde(skip)]
    pub iterations: usize,
}

/// Stopping rule for the bisection root finder.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BisectionOptions<T> {
    pub max_iter: usize,
    /// Early exit once `|E[Phi(X/k)] - level| <= residual_tol`. Zero runs
    /// until the bracket collapses to adjacent floats.
    pub residual_tol: T,
}

impl<T: Scalar> Default for BisectionOptions<T> {
    fn default() -> Self {
        Self {
            max_iter: 200,
            residual_tol: T::tol_or_eps(1e-12, 4.0),
        }
    }
}

/// `E[Phi(X/k)]`.
pub fn expected_phi<T: Scalar>(
    dist: &DiscreteDistribution<T>,
    spec: &OrliczFunctionSpec<T>,
    k: T,
) -> Result<T> {
    if !(k > T::zero() && k.is_finite()) {
        return Err(Error::NonPositiveK(k.as_f64()));
    }
    Ok(dist.expect(|x| spec.evaluate(x / k)))
}

/// Sign of the identification function at a candidate value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IdentificationResidual<T> {
    pub x: T,
    /// `E[Phi(Y/x)] - 1`: zero at the premium, positive below it, negative
    /// above it (for strictly increasing `Phi`).
    pub residual: T,
}

pub fn identification_residual<T: Scalar>(
    dist: &DiscreteDistribution<T>,
    spec: &OrliczFunctionSpec<T>,
    x: T,
) -> Result<IdentificationResidual<T>> {
    if !(x > T::zero() && x.is_finite()) {
        return Err(Error::NonPositiveX(x.as_f64()));
    }
    Ok(IdentificationResidual {
        x,
        residual: expected_phi(dist, spec, x)? - T::one(),
    })
}

/// Orlicz premium of `dist`.
///
/// Point masses return their atom. Rows with a distribution-free closed form
/// (mean, quantile, expectile, lce, pnorm, mean-variance) use it; the others
/// go through [`premium_by_bisection`].
pub fn orlicz_premium<T: Scalar>(
    dist: &DiscreteDistribution<T>,
    spec: &OrliczFunctionSpec<T>,
) -> Result<PremiumResult<T>> {
    let closed = if dist.is_degenerate() {
        Some(dist.min())
    } else {
        closed_form_premium(dist, spec)
    };
    match closed {
        Some(value) => Ok(PremiumResult {
            value,
            method: PremiumMethod::ClosedForm,
            residual: (expected_phi(dist, spec, value)? - T::one()).abs(),
            bracket: (dist.min(), dist.max()),
            iterations: 0,
        }),
        None => premium_by_bisection(dist, spec),
    }
}

/// Premium by bisection on `[min support, max support]` with the default
/// stopping rule. The quantile row has flat stretches where the residual is
/// exactly zero, so it skips the early exit and runs to the left end.
pub fn premium_by_bisection<T: Scalar>(
    dist: &DiscreteDistribution<T>,
    spec: &OrliczFunctionSpec<T>,
) -> Result<PremiumResult<T>> {
    let mut opts = BisectionOptions::default();
    if matches!(spec.kind(), OrliczKind::Quantile { .. }) {
        opts.residual_tol = T::zero();
    }
    premium_by_bisection_with(dist, spec, &opts)
}

/// Bisection for the smallest `k` with `E[Phi(X/k)] <= 1`.
///
/// `k -> E[Phi(X/k)]` is nonincreasing for every catalog row, and
/// `Phi(1) = 1` puts the root inside `[min, max]`. For the quantile row the
/// search converges to the support point where the step crosses one.
pub fn premium_by_bisection_with<T: Scalar>(
    dist: &DiscreteDistribution<T>,
    spec: &OrliczFunctionSpec<T>,
    opts: &BisectionOptions<T>,
) -> Result<PremiumResult<T>> {
    let (lo, hi) = (dist.min(), dist.max());
    let g = |k: T| dist.expect(|x| spec.evaluate(x / k));
    let (value, iterations) = threshold_bisect(&g, lo, hi, T::one(), opts)?;
    Ok(PremiumResult {
        value,
        method: PremiumMethod::Bisection,
        residual: (g(value) - T::one()).abs(),
        bracket: (lo, hi),
        iterations,
    })
}

/// Smallest `k` in `[lo, hi]` with `g(k) <= level`, for nonincreasing `g`.
pub(crate) fn threshold_bisect<T: Scalar, G: Fn(T) -> T>(
    g: &G,
    mut lo: T,
    mut hi: T,
    level: T,
    opts: &BisectionOptions<T>,
) -> Result<(T, usize)> {
    let at_lo = g(lo);
    if at_lo <= level {
        return Ok((lo, 0));
    }
    let at_hi = g(hi);
    if !(at_hi <= level) {
        return Err(Error::BracketFailure {
            lo: lo.as_f64(),
            hi: hi.as_f64(),
            at_lo: at_lo.as_f64(),
            at_hi: at_hi.as_f64(),
        });
    }
    let two = T::lit(2.0);
    for iteration in 1..=opts.max_iter {
        let mid = lo + (hi - lo) / two;
        if mid <= lo || mid >= hi {
            return Ok((hi, iteration));
        }
        let gm = g(mid);
        if opts.residual_tol > T::zero() && (gm - level).abs() <= opts.residual_tol {
            return Ok((mid, iteration));
        }
        if gm <= level {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Err(Error::NonConvergence {
        iterations: opts.max_iter,
    })
}

/// Distribution-free closed forms; `None` for rows that need root-finding.
pub fn closed_form_premium<T: Scalar>(
    dist: &DiscreteDistribution<T>,
    spec: &OrliczFunctionSpec<T>,
) -> Option<T> {
    let one = T::one();
    match spec.kind() {
        OrliczKind::Mean => Some(dist.mean()),
        OrliczKind::Quantile { alpha } => Some(dist.quantile(alpha)),
        OrliczKind::Expectile { q } => Some(expectile(dist, q)),
        OrliczKind::Lce => Some(dist.expect(|x| x.ln()).exp()),
        OrliczKind::PNorm { p } => Some(dist.expect(|x| x.powf(p)).powf(one / p)),
        OrliczKind::MeanVariance { lambda, p } => {
            let m1 = dist.expect(|x| x.powf(p));
            let m2 = dist.expect(|x| x.powf(p + p));
            let root = (lambda * lambda * m1 * m1 + T::lit(4.0) * (one - lambda) * m2).sqrt();
            Some(((lambda * m1 + root) * T::lit(0.5)).powf(one / p))
        }
        _ => None,
    }
}

/// q-expectile: the root of `q E[(X-e)^+] = (1-q) E[(e-X)^+]`, solved
/// exactly on the linear piece that contains it.
pub fn expectile<T: Scalar>(dist: &DiscreteDistribution<T>, q: T) -> T {
    let xs = dist.support();
    let ws = dist.weights();
    let n = xs.len();
    let one = T::one();
    let weighted: Vec<T> = xs.iter().zip(ws).map(|(&x, &w)| x * w).collect();
    let total_s = pairwise_sum(&weighted);
    let (mut low_w, mut low_s) = (T::zero(), T::zero());
    for k in 0..n {
        low_w = low_w + ws[k];
        low_s = low_s + weighted[k];
        if k + 1 == n {
            break;
        }
        let up_w = pos(one - low_w);
        let up_s = total_s - low_s;
        let candidate = (q * up_s + (one - q) * low_s) / (q * up_w + (one - q) * low_w);
        if candidate <= xs[k + 1] {
            return candidate.max(xs[k]).min(xs[k + 1]);
        }
    }
    xs[n - 1]
}

/// Premium of `exp-alpha` for `Y ~ Gamma(shape, rate)`:
/// `alpha / (rate (1 - exp(-alpha / shape)))`.
pub fn gamma_exp_alpha_premium<T: Scalar>(alpha: T, shape: T, rate: T) -> T {
    alpha / (rate * -(-alpha / shape).exp_m1())
}

/// Premium of `gauss-tail` for `Y = |Z|`, `Z ~ N(0, sigma^2)`.
pub fn half_normal_gauss_tail_premium<T: Scalar>(alpha: T, sigma: T) -> T {
    let e = (-alpha).exp();
    let quarter = T::lit(0.25);
    (T::lit(2.0) / T::PI()).sqrt() * (T::lit(0.5) * e + (quarter * e * e + T::PI() * alpha).sqrt()) * sigma
}

/// `exp(rho(log X))`: the return risk measure associated with a monetary
/// functional `rho`, which receives the log-support and the weights.
pub fn log_transform_premium<T: Scalar, R>(dist: &DiscreteDistribution<T>, monetary_rho: R) -> T
where
    R: Fn(&[T], &[T]) -> T,
{
    let logs: Vec<T> = dist.support().iter().map(|x| x.ln()).collect();
    monetary_rho(&logs, dist.weights()).exp()
}

/// `inf{k > 0 : E[Phi(Y/k)] <= level}` for a nonnegative weighted sample
/// (zeros allowed). Zero when all mass sits at zero.
pub(crate) fn level_premium<T: Scalar>(
    values: &[T],
    weights: &[T],
    spec: &OrliczFunctionSpec<T>,
    level: T,
    opts: &BisectionOptions<T>,
) -> Result<T> {
    let max = values.iter().copied().fold(T::zero(), T::max);
    if max == T::zero() {
        return Ok(T::zero());
    }
    let min_pos = values
        .iter()
        .copied()
        .filter(|&v| v > T::zero())
        .fold(max, T::min);
    let g = |k: T| {
        let terms: Vec<T> = values
            .iter()
            .zip(weights)
            .map(|(&v, &w)| w * spec.evaluate(v / k))
            .collect();
        pairwise_sum(&terms)
    };
    let two = T::lit(2.0);
    let (mut lo, mut hi) = (min_pos, max);
    let mut expansions = 0;
    while g(lo) <= level && expansions < 400 {
        hi = lo;
        lo = lo / two;
        expansions += 1;
    }
    expansions = 0;
    while !(g(hi) <= level) && expansions < 400 {
        lo = hi;
        hi = hi * two;
        expansions += 1;
    }
    threshold_bisect(&g, lo, hi, level, opts).map(|(k, _)| k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::orliczfn::{catalog_lookup, PhiParams, CATALOG};

    fn u12() -> DiscreteDistribution<f64> {
        DiscreteDistribution::uniform(vec![1.0, 2.0]).unwrap()
    }

    fn spec(name: &str, params: PhiParams<f64>) -> OrliczFunctionSpec<f64> {
        catalog_lookup(name, &params).unwrap()
    }

    #[test]
    fn expected_phi_examples() {
        let d1 = DiscreteDistribution::point_mass(1.0).unwrap();
        let params = PhiParams::default().p(2.0).q(0.3).alpha(0.5).lambda_mix(0.5);
        for name in CATALOG.iter().filter(|&&n| n != "quantile") {
            let s = spec(name, params);
            assert!((expected_phi(&d1, &s, 1.0).unwrap() - 1.0).abs() < 1e-12, "{name}");
        }
        assert_eq!(expected_phi(&u12(), &spec("mean", params), 1.0).unwrap(), 1.5);
        assert_eq!(expected_phi(&u12(), &spec("pnorm", params), 1.0).unwrap(), 2.5);
        assert_eq!(
            expected_phi(&u12(), &spec("mean", params), 0.0),
            Err(Error::NonPositiveK(0.0))
        );
    }

    #[test]
    fn pnorm_two_on_u12() {
        let s = spec("pnorm", PhiParams::default().p(2.0));
        let b = premium_by_bisection(&u12(), &s).unwrap();
        let c = orlicz_premium(&u12(), &s).unwrap();
        assert!((b.value - 2.5_f64.sqrt()).abs() < 1e-11);
        assert!((c.value - 1.581_138_830_084_19).abs() < 1e-12);
        assert_eq!(c.method, PremiumMethod::ClosedForm);
        assert!(b.residual <= 1e-10);
    }

    #[test]
    fn lce_on_u12() {
        let s = spec("lce", PhiParams::default());
        let b = premium_by_bisection(&u12(), &s).unwrap();
        assert!((b.value - 2.0_f64.sqrt()).abs() < 1e-11);
        let via_log = log_transform_premium(&u12(), |l, w| l.iter().zip(w).map(|(a, b)| a * b).sum());
        assert!((via_log - 2.0_f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn log_transform_examples() {
        let worst = log_transform_premium(&u12(), |l, _| l.iter().copied().fold(f64::MIN, f64::max));
        assert!((worst - 2.0).abs() < 1e-15);
        let dc = DiscreteDistribution::point_mass(3.7_f64).unwrap();
        let v = log_transform_premium(&dc, |l, w| l.iter().zip(w).map(|(a, b)| a * b).sum());
        assert!((v - 3.7).abs() < 1e-14);
    }

    #[test]
    fn median_expectile_is_mean() {
        let d = DiscreteDistribution::new(vec![0.3, 1.7, 4.0, 9.5], vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let s = spec("expectile", PhiParams::default().q(0.5));
        assert!((orlicz_premium(&d, &s).unwrap().value - d.mean()).abs() < 1e-13);
    }

    #[test]
    fn expectile_09_on_u12_is_1_9() {
        // 0.9 (2 - e) = 0.1 (e - 1)  =>  e = 1.9
        assert!((expectile(&u12(), 0.9) - 1.9).abs() < 1e-14);
    }

    #[test]
    fn degenerate_returns_atom() {
        let d = DiscreteDistribution::point_mass(2.5).unwrap();
        for name in ["entropic-log", "exp-centered", "quantile"] {
            let s = spec(name, PhiParams::default().alpha(0.5));
            assert_eq!(orlicz_premium(&d, &s).unwrap().value, 2.5);
        }
    }

    #[test]
    fn identification_sign_structure() {
        let d = DiscreteDistribution::new(vec![0.5, 1.0, 3.0], vec![0.2, 0.5, 0.3]).unwrap();
        let s = spec("entropic-log", PhiParams::default());
        let h = orlicz_premium(&d, &s).unwrap().value;
        assert!(identification_residual(&d, &s, h).unwrap().residual.abs() <= 1e-10);
        assert!(identification_residual(&d, &s, h / 2.0).unwrap().residual > 0.0);
        assert!(identification_residual(&d, &s, 2.0 * h).unwrap().residual < 0.0);
        assert_eq!(
            identification_residual(&d, &s, -1.0),
            Err(Error::NonPositiveX(-1.0))
        );
    }

    #[test]
    fn quantile_row_by_bisection_hits_support_point() {
        let d = DiscreteDistribution::new(vec![1.0, 2.0, 3.0, 4.0], vec![0.1, 0.3, 0.4, 0.2]).unwrap();
        for (alpha, expected) in [(0.05, 1.0), (0.1, 1.0), (0.3, 2.0), (0.75, 3.0), (0.95, 4.0)] {
            let s = spec("quantile", PhiParams::default().alpha(alpha));
            let b = premium_by_bisection(&d, &s).unwrap();
            assert!((b.value - expected).abs() <= 1e-12 * expected, "alpha {alpha}: {}", b.value);
            assert_eq!(closed_form_premium(&d, &s), Some(expected));
        }
    }

    #[test]
    fn mean_variance_matches_moment_form_at_p_one() {
        // E[Y] (lambda/2 + sqrt((lambda/2 - 1)^2 + (1 - lambda) Var/E^2))
        let d = DiscreteDistribution::new(vec![0.4, 1.1, 2.5, 6.0], vec![0.3, 0.3, 0.25, 0.15]).unwrap();
        for lambda in [0.0_f64, 0.3, 0.75, 1.0] {
            let m = d.mean();
            let var = d.expect(|x| (x - m) * (x - m));
            let moment_form = m * (lambda / 2.0 + ((lambda / 2.0 - 1.0).powi(2) + (1.0 - lambda) * var / (m * m)).sqrt());
            let s = spec("mean-variance", PhiParams::default().lambda_mix(lambda));
            let closed = closed_form_premium(&d, &s).unwrap();
            let bisect = premium_by_bisection(&d, &s).unwrap().value;
            assert!((closed - moment_form).abs() <= 1e-12 * moment_form);
            assert!((bisect - moment_form).abs() <= 1e-10 * moment_form);
        }
    }

    #[test]
    fn gamma_exp_alpha_against_discretized_gamma() {
        // Gamma(1, 1) = Exp(1); premium e/(e-1) for alpha = 1
        let d = DiscreteDistribution::from_density(|y: f64| (-y).exp(), 0.0, 60.0, 10_000).unwrap();
        let s = spec("exp-alpha", PhiParams::default().alpha(1.0));
        let h = orlicz_premium(&d, &s).unwrap().value;
        let closed: f64 = gamma_exp_alpha_premium(1.0, 1.0, 1.0);
        assert!((closed - 1.581_976_706_869_326_4).abs() < 1e-14);
        assert!((h - closed).abs() < 1e-3);
    }

    #[test]
    fn gamma_exp_alpha_shape_two() {
        // shape 2, rate 3: density 9 y e^{-3y}
        let d = DiscreteDistribution::from_density(|y: f64| 9.0 * y * (-3.0 * y).exp(), 0.0, 30.0, 20_000).unwrap();
        let s = spec("exp-alpha", PhiParams::default().alpha(0.7));
        let h = orlicz_premium(&d, &s).unwrap().value;
        assert!((h - gamma_exp_alpha_premium(0.7, 2.0, 3.0)).abs() < 1e-3);
    }

    #[test]
    fn gauss_tail_against_discretized_half_normal() {
        let sigma = 1.3;
        let pdf = |y: f64| (-(y * y) / (2.0 * sigma * sigma)).exp();
        let d = DiscreteDistribution::from_density(pdf, 0.0, 12.0 * sigma, 20_000).unwrap();
        for alpha in [0.1, 0.5, 1.0] {
            let s = spec("gauss-tail", PhiParams::default().alpha(alpha));
            let h = orlicz_premium(&d, &s).unwrap().value;
            let closed = half_normal_gauss_tail_premium(alpha, sigma);
            assert!((h - closed).abs() < 1e-3, "alpha {alpha}: {h} vs {closed}");
        }
    }

    #[test]
    fn level_premium_with_zeros() {
        // pnorm 2 at level 1: ||Y||_2 with an atom at zero
        let s = spec("pnorm", PhiParams::default().p(2.0));
        let opts = BisectionOptions::default();
        let v = level_premium(&[0.0, 2.0], &[0.75, 0.25], &s, 1.0, &opts).unwrap();
        assert!((v - 1.0).abs() < 1e-11);
        let v = level_premium(&[0.0, 2.0], &[0.75, 0.25], &s, 0.25, &opts).unwrap();
        assert!((v - 2.0).abs() < 1e-11);
        assert_eq!(level_premium(&[0.0], &[1.0], &s, 1.0, &opts).unwrap(), 0.0);
        let small = level_premium(&[0.0, 1.0], &[0.99, 0.01], &spec("mean", PhiParams::default()), 1.0, &opts).unwrap();
        assert!((small - 0.01).abs() < 1e-13);
    }

    #[test]
    fn f32_premium() {
        let d = DiscreteDistribution::uniform(vec![1.0_f32, 2.0]).unwrap();
        let s = catalog_lookup("lce", &PhiParams::default()).unwrap();
        let b = premium_by_bisection(&d, &s).unwrap();
        assert!((b.value - 2.0_f32.sqrt()).abs() < 1e-5);
    }
}
