//! Population Murphy curves: outcome expectations in closed form given the
//! latent variable, latent variable on a midpoint-quantile grid.

use rayon::prelude::*;
use statrs::distribution::{Continuous, ContinuousCDF, Normal};

use super::{check_grid, ElementaryKind, MurphyCurve, MurphySeries};
use crate::dist::{
    exponential_forecasts, lognormal_forecasts, DiscreteDistribution, ExponentialParams,
    LognormalParams, EXPONENTIAL_FORECASTERS, LOGNORMAL_FORECASTERS,
};
use crate::error::{Error, Result};
use crate::scalar::{pairwise_sum, Scalar};

/// Latent grid size used for population curves.
pub const POPULATION_GRID: usize = 10_000;

/// `sigma * Phi^-1((i + 1/2) / n)` for `i = 0..n`.
pub fn latent_grid(sigma: f64, n: usize) -> Vec<f64> {
    let std = Normal::standard();
    (0..n)
        .map(|i| sigma * std.inverse_cdf((i as f64 + 0.5) / n as f64))
        .collect()
}

// E[(L - a)^+] and E[(a - L)^+] for L ~ N(mu, s^2).
fn normal_partial_moments(mu: f64, s: f64, a: f64) -> (f64, f64) {
    let std = Normal::standard();
    let m = mu - a;
    let d = std.pdf(m / s) * s;
    (m * std.cdf(m / s) + d, -m * std.cdf(-m / s) + d)
}

// E[(Y^p - z^p) 1{Y > z}] and E[(z^p - Y^p) 1{Y <= z}] for log Y ~ N(mu, s^2).
fn lognormal_power_parts(mu: f64, s: f64, p: f64, z: f64) -> (f64, f64) {
    let std = Normal::standard();
    let a = z.ln();
    let m = (p * mu + 0.5 * p * p * s * s).exp();
    let zp = z.powf(p);
    let upper = m * std.cdf((mu + p * s * s - a) / s) - zp * std.cdf((mu - a) / s);
    let lower = zp * std.cdf((a - mu) / s) - m * std.cdf((a - mu - p * s * s) / s);
    (upper.max(0.0), lower.max(0.0))
}

// q E[(Y - z)^+] and (1 - q) E[(z - Y)^+] for Y ~ Exp(lambda).
fn exponential_expectile_parts(lambda: f64, q: f64, z: f64) -> (f64, f64) {
    let tail = (-lambda * z).exp() / lambda;
    let below = z + (-lambda * z).exp_m1() / lambda;
    (q * tail, (1.0 - q) * below.max(0.0))
}

// Sum over latent points and the two equally likely offsets of
// 1{x <= z} upper + 1{z < x} lower, averaged.
fn accumulate<F, P>(
    latents: &[f64],
    taus: [f64; 2],
    forecasts: F,
    parts: P,
    zs: &[f64],
    n_forecasters: usize,
) -> Vec<Vec<f64>>
where
    F: Fn(f64, f64) -> Vec<f64> + Sync,
    P: Fn(f64, f64) -> (f64, f64) + Sync,
{
    let partials: Vec<Vec<Vec<f64>>> = latents
        .par_chunks(256)
        .map(|chunk| {
            let mut sums = vec![vec![0.0; zs.len()]; n_forecasters];
            for &latent in chunk {
                let pieces: Vec<(f64, f64)> = zs.iter().map(|&z| parts(latent, z)).collect();
                for tau in taus {
                    for (j, x) in forecasts(latent, tau).into_iter().enumerate() {
                        for (k, &z) in zs.iter().enumerate() {
                            let (upper, lower) = pieces[k];
                            sums[j][k] += if x <= z { upper } else { lower };
                        }
                    }
                }
            }
            sums
        })
        .collect();
    let scale = 1.0 / (2.0 * latents.len() as f64);
    let mut total = vec![vec![0.0; zs.len()]; n_forecasters];
    for part in partials {
        for (t, p) in total.iter_mut().zip(part) {
            for (u, v) in t.iter_mut().zip(p) {
                *u += v;
            }
        }
    }
    for row in &mut total {
        for v in row.iter_mut() {
            *v *= scale;
        }
    }
    total
}

fn to_curve<T: Scalar>(names: &[&str], thresholds: &[T], sums: Vec<Vec<f64>>, n: usize) -> MurphyCurve<T> {
    MurphyCurve {
        thresholds: thresholds.to_vec(),
        series: names
            .iter()
            .zip(sums)
            .map(|(name, row)| MurphySeries {
                forecaster: name.to_string(),
                mean_scores: row.into_iter().map(T::lit).collect(),
            })
            .collect(),
        n,
        seed: None,
    }
}

fn check_latent_grid(grid: usize) -> Result<()> {
    if grid == 0 {
        return Err(Error::InvalidParams("latent grid must have at least one point".into()));
    }
    Ok(())
}

/// Population Murphy curves of the lognormal scenario. `p = 0` uses the
/// generic logarithmic-certainty-equivalent kernel `|log y - log z|`, `p > 0`
/// the p-norm kernel `|y^p - z^p|`.
pub fn population_lognormal<T: Scalar>(
    params: &LognormalParams<T>,
    thresholds: &[T],
    grid: usize,
) -> Result<MurphyCurve<T>> {
    params.validate()?;
    check_grid(thresholds)?;
    check_latent_grid(grid)?;
    let sy = params.sigma_y.as_f64();
    let p = params.p.as_f64();
    let pf = LognormalParams {
        sigma_y: sy,
        sigma_mu: params.sigma_mu.as_f64(),
        p,
    };
    let zs: Vec<f64> = thresholds.iter().map(|z| z.as_f64()).collect();
    let latents = latent_grid(pf.sigma_mu, grid);
    let forecasts = |mu: f64, tau: f64| lognormal_forecasts(mu, tau, &pf).to_vec();
    let sums = if p == 0.0 {
        accumulate(
            &latents,
            [0.2, -0.2],
            forecasts,
            |mu, z| normal_partial_moments(mu, sy, z.ln()),
            &zs,
            LOGNORMAL_FORECASTERS.len(),
        )
    } else {
        accumulate(
            &latents,
            [0.2, -0.2],
            forecasts,
            |mu, z| lognormal_power_parts(mu, sy, p, z),
            &zs,
            LOGNORMAL_FORECASTERS.len(),
        )
    };
    Ok(to_curve(&LOGNORMAL_FORECASTERS, thresholds, sums, grid))
}

/// Population Murphy curves of the exponential scenario with the expectile
/// kernel at the scenario's level `q`.
pub fn population_exponential<T: Scalar>(
    params: &ExponentialParams<T>,
    thresholds: &[T],
    grid: usize,
) -> Result<MurphyCurve<T>> {
    params.validate()?;
    check_grid(thresholds)?;
    check_latent_grid(grid)?;
    let factor = params.expectile_factor()?.as_f64();
    let q = params.q.as_f64();
    let zs: Vec<f64> = thresholds.iter().map(|z| z.as_f64()).collect();
    let latents: Vec<f64> = latent_grid(params.sigma_lambda.as_f64(), grid)
        .into_iter()
        .map(f64::exp)
        .collect();
    let sums = accumulate(
        &latents,
        [1.25, 0.8],
        |lambda, tau| exponential_forecasts(lambda, tau, factor).to_vec(),
        |lambda, z| exponential_expectile_parts(lambda, q, z),
        &zs,
        EXPONENTIAL_FORECASTERS.len(),
    );
    Ok(to_curve(&EXPONENTIAL_FORECASTERS, thresholds, sums, grid))
}

/// Exact expected elementary scores of constant forecasts under a discrete
/// outcome distribution.
pub fn population_curve<T: Scalar>(
    kind: &ElementaryKind<T>,
    dist: &DiscreteDistribution<T>,
    forecasts: &[(String, T)],
    thresholds: &[T],
) -> Result<MurphyCurve<T>> {
    kind.validate()?;
    check_grid(thresholds)?;
    let mut series = Vec::with_capacity(forecasts.len());
    for (name, x) in forecasts {
        if !(*x > T::zero() && x.is_finite()) {
            return Err(Error::NonPositiveX(x.as_f64()));
        }
        let mean_scores = thresholds
            .iter()
            .map(|&z| {
                let terms: Vec<T> = dist.iter().map(|(y, w)| w * kind.value(*x, y, z)).collect();
                pairwise_sum(&terms)
            })
            .collect();
        series.push(MurphySeries {
            forecaster: name.clone(),
            mean_scores,
        });
    }
    Ok(MurphyCurve {
        thresholds: thresholds.to_vec(),
        series,
        n: dist.len(),
        seed: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::premium::orlicz_premium;
    use crate::orliczfn::{catalog_lookup, PhiParams};
    use crate::orliczfn::{OrliczFunctionSpec, OrliczKind};
    use crate::scalar::spaced_grid;

    fn lce_kernel() -> ElementaryKind<f64> {
        ElementaryKind::Generic(OrliczFunctionSpec::from_kind(OrliczKind::Lce))
    }

    // Outcome expectations against a fine discretization of the same law.
    fn discretized_lognormal(mu: f64, s: f64) -> DiscreteDistribution<f64> {
        let pdf = |y: f64| {
            let t = (y.ln() - mu) / s;
            (-0.5 * t * t).exp() / (y * s * (2.0 * std::f64::consts::PI).sqrt())
        };
        DiscreteDistribution::from_density(pdf, 1e-6, (mu + 9.0 * s).exp(), 200_000).unwrap()
    }

    #[test]
    fn closed_form_parts_match_discretized_expectations() {
        let (mu, s) = (0.15, 0.3);
        let d = discretized_lognormal(mu, s);
        for z in [0.6, 1.0, 1.4] {
            for x in [0.5 * z, 2.0 * z] {
                let lce = population_curve(&lce_kernel(), &d, &[("x".into(), x)], &[z]).unwrap();
                let (u, l) = normal_partial_moments(mu, s, z.ln());
                let want = if x <= z { u } else { l };
                assert!((lce.series[0].mean_scores[0] - want).abs() < 1e-5, "lce z={z}");

                let kind = ElementaryKind::PNorm { p: 2.0 };
                let pn = population_curve(&kind, &d, &[("x".into(), x)], &[z]).unwrap();
                let (u, l) = lognormal_power_parts(mu, s, 2.0, z);
                let want = if x <= z { u } else { l };
                assert!((pn.series[0].mean_scores[0] - want).abs() < 1e-5, "pnorm z={z}");
            }
        }
        let lambda = 1.7;
        let e = DiscreteDistribution::from_density(|y: f64| lambda * (-lambda * y).exp(), 0.0, 30.0, 200_000)
            .unwrap();
        let kind = ElementaryKind::Expectile { q: 0.7 };
        for z in [0.2, 0.9] {
            let (u, l) = exponential_expectile_parts(lambda, 0.7, z);
            let above = population_curve(&kind, &e, &[("x".into(), z / 2.0)], &[z]).unwrap();
            let below = population_curve(&kind, &e, &[("x".into(), z * 2.0)], &[z]).unwrap();
            assert!((above.series[0].mean_scores[0] - u).abs() < 1e-6);
            assert!((below.series[0].mean_scores[0] - l).abs() < 1e-6);
        }
    }

    #[test]
    fn latent_grid_is_symmetric() {
        let g = latent_grid(0.2, 1000);
        assert!((g[0] + g[999]).abs() < 1e-12);
        let mean: f64 = g.iter().sum::<f64>() / 1000.0;
        assert!(mean.abs() < 1e-12);
        let var: f64 = g.iter().map(|v| v * v).sum::<f64>() / 1000.0;
        assert!((var - 0.04).abs() < 1e-3);
    }

    #[test]
    fn perfect_dominates_in_population() {
        let zs = spaced_grid(0.3, 3.0, 41, true);
        let params = LognormalParams::new(0.2, 0.2, 0.0).unwrap();
        let c = population_lognormal(&params, &zs, 2000).unwrap();
        for other in &LOGNORMAL_FORECASTERS[1..] {
            assert_eq!(c.dominance_fraction("perfect", other, 1e-14), Some(1.0), "{other}");
        }
        let params = ExponentialParams::new(0.2, 0.9).unwrap();
        let c = population_exponential(&params, &zs, 2000).unwrap();
        for other in &EXPONENTIAL_FORECASTERS[1..] {
            assert_eq!(c.dominance_fraction("perfect", other, 1e-14), Some(1.0), "{other}");
        }
    }

    #[test]
    fn constant_bias_is_strictly_worse_somewhere() {
        let d = DiscreteDistribution::new(vec![0.5, 1.0, 2.0, 3.5], vec![0.1, 0.4, 0.3, 0.2]).unwrap();
        let spec = catalog_lookup("pnorm", &PhiParams::default().p(2.0)).unwrap();
        let truth = orlicz_premium(&d, &spec).unwrap().value;
        let zs = spaced_grid(0.25, 7.0, 101, true);
        let kind = ElementaryKind::for_spec(&spec);
        for c in [0.8, 1.25] {
            let curve = population_curve(
                &kind,
                &d,
                &[("perfect".into(), truth), ("biased".into(), c * truth)],
                &zs,
            )
            .unwrap();
            let p = curve.series("perfect").unwrap();
            let b = curve.series("biased").unwrap();
            assert!(p.iter().zip(b).all(|(u, v)| u <= &(v + 1e-14)));
            assert!(p.iter().zip(b).any(|(u, v)| u < v));
        }
    }
}
