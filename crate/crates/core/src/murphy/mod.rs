//! Elementary scores, the mixture representation and Murphy diagrams.

mod population;

pub use population::{
    latent_grid, population_curve, population_exponential, population_lognormal, POPULATION_GRID,
};

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::dist::Replication;
use crate::error::{Error, Result};
use crate::orliczfn::{OrliczFunctionSpec, OrliczKind};
use crate::quadrature::{integrate, QuadOptions};
use crate::scalar::{spaced_grid, Scalar};
use crate::scoring::ScoringFamily;

/// Threshold kernels: the generic `|Phi(y/z) - 1|`, the p-norm
/// `|y^p - z^p|` and the expectile `q (y - z)` / `(1 - q) (z - y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ElementaryKind<T> {
    Generic(OrliczFunctionSpec<T>),
    PNorm { p: T },
    Expectile { q: T },
}

impl<T: Scalar> ElementaryKind<T> {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ElementaryKind::Generic(_) => Ok(()),
            ElementaryKind::PNorm { p } if p > T::zero() && p.is_finite() => Ok(()),
            ElementaryKind::PNorm { p } => Err(Error::ParamOutOfRange {
                name: "p",
                value: p.as_f64(),
                expected: "p > 0",
            }),
            ElementaryKind::Expectile { q } if q > T::zero() && q < T::one() => Ok(()),
            ElementaryKind::Expectile { q } => Err(Error::ParamOutOfRange {
                name: "q",
                value: q.as_f64(),
                expected: "0 < q < 1",
            }),
        }
    }

    /// Density of the mixing measure for this kernel relative to `dH`:
    /// `1`, `z^-p` and `z^-1` respectively.
    pub fn density_factor(&self, z: T) -> T {
        match *self {
            ElementaryKind::Generic(_) => T::one(),
            ElementaryKind::PNorm { p } => z.powf(-p),
            ElementaryKind::Expectile { .. } => z.recip(),
        }
    }

    /// Kernel used for Murphy diagrams of a catalog row: the p-norm and
    /// expectile rows get their own kernels, everything else the generic one.
    pub fn for_spec(spec: &OrliczFunctionSpec<T>) -> Self {
        match spec.kind() {
            OrliczKind::PNorm { p } => ElementaryKind::PNorm { p },
            OrliczKind::Expectile { q } => ElementaryKind::Expectile { q },
            _ => ElementaryKind::Generic(*spec),
        }
    }

    // Caller guarantees x, y, z > 0.
    fn value(&self, x: T, y: T, z: T) -> T {
        if x <= z && z < y {
            self.upper(y, z)
        } else if y <= z && z < x {
            self.lower(y, z)
        } else {
            T::zero()
        }
    }

    // Outcome above the threshold.
    fn upper(&self, y: T, z: T) -> T {
        match *self {
            ElementaryKind::Generic(spec) => (spec.evaluate(y / z) - T::one()).abs(),
            ElementaryKind::PNorm { p } => y.powf(p) - z.powf(p),
            ElementaryKind::Expectile { q } => q * (y - z),
        }
    }

    // Outcome at or below the threshold.
    fn lower(&self, y: T, z: T) -> T {
        match *self {
            ElementaryKind::Generic(spec) => (spec.evaluate(y / z) - T::one()).abs(),
            ElementaryKind::PNorm { p } => z.powf(p) - y.powf(p),
            ElementaryKind::Expectile { q } => (T::one() - q) * (z - y),
        }
    }
}

/// An elementary score at a fixed threshold `z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElementaryScoreSpec<T> {
    pub kind: ElementaryKind<T>,
    pub z: T,
}

impl<T: Scalar> ElementaryScoreSpec<T> {
    pub fn new(kind: ElementaryKind<T>, z: T) -> Result<Self> {
        kind.validate()?;
        if !(z > T::zero() && z.is_finite()) {
            return Err(Error::ParamOutOfRange {
                name: "z",
                value: z.as_f64(),
                expected: "z > 0",
            });
        }
        Ok(Self { kind, z })
    }
}

fn check_positive<T: Scalar>(x: T, y: T) -> Result<()> {
    if x > T::zero() && y > T::zero() && x.is_finite() && y.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPositiveArgs {
            x: x.as_f64(),
            y: y.as_f64(),
        })
    }
}

/// `S_z(x, y)`; nonzero only on `{x <= z < y}` or `{y <= z < x}`.
pub fn elementary_score<T: Scalar>(spec: &ElementaryScoreSpec<T>, x: T, y: T) -> Result<T> {
    check_positive(x, y)?;
    Ok(spec.kind.value(x, y, spec.z))
}

/// `\int S_z(x, y) h(z) dz` over `[min(x, y), max(x, y)]` with the generic
/// kernel and the family's weight.
pub fn mixture_reconstruction<T: Scalar>(
    family: &ScoringFamily<T>,
    x: T,
    y: T,
    opts: &QuadOptions<T>,
) -> Result<T> {
    reconstruct(ElementaryKind::Generic(*family.spec()), family, x, y, opts)
}

/// As [`mixture_reconstruction`], but with the row's own kernel (p-norm or
/// expectile) against the reweighted measure `density_factor(z) h(z) dz`.
pub fn reweighted_mixture_reconstruction<T: Scalar>(
    family: &ScoringFamily<T>,
    x: T,
    y: T,
    opts: &QuadOptions<T>,
) -> Result<T> {
    reconstruct(ElementaryKind::for_spec(family.spec()), family, x, y, opts)
}

fn reconstruct<T: Scalar>(
    kind: ElementaryKind<T>,
    family: &ScoringFamily<T>,
    x: T,
    y: T,
    opts: &QuadOptions<T>,
) -> Result<T> {
    check_positive(x, y)?;
    if x == y {
        return Ok(T::zero());
    }
    let weight = family.weight();
    integrate(
        |z: T| kind.value(x, y, z) * kind.density_factor(z) * weight.eval(z),
        x.min(y),
        x.max(y),
        opts,
    )
}

/// Mean elementary scores of one forecaster across the threshold grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MurphySeries<T> {
    pub forecaster: String,
    pub mean_scores: Vec<T>,
}

/// Murphy diagram: mean elementary score per forecaster and threshold.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MurphyCurve<T> {
    pub thresholds: Vec<T>,
    pub series: Vec<MurphySeries<T>>,
    /// Observation pairs per forecaster (latent grid size for population curves).
    pub n: usize,
    pub seed: Option<u64>,
}

impl<T: Scalar> MurphyCurve<T> {
    pub fn series(&self, forecaster: &str) -> Option<&[T]> {
        self.series
            .iter()
            .find(|s| s.forecaster == forecaster)
            .map(|s| s.mean_scores.as_slice())
    }

    /// Share of thresholds where `reference` is at most `other` (plus `slack`).
    pub fn dominance_fraction(&self, reference: &str, other: &str, slack: T) -> Option<f64> {
        let a = self.series(reference)?;
        let b = self.series(other)?;
        let hits = a.iter().zip(b).filter(|(&u, &v)| u <= v + slack).count();
        Some(hits as f64 / a.len().max(1) as f64)
    }

    /// Long-format CSV `z,forecaster,mean_score`, grouped by forecaster.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let csv_err = |e: csv::Error| Error::Parse(e.to_string());
        w.write_record(["z", "forecaster", "mean_score"]).map_err(csv_err)?;
        for s in &self.series {
            for (z, v) in self.thresholds.iter().zip(&s.mean_scores) {
                w.write_record([z.to_string(), s.forecaster.clone(), v.to_string()])
                    .map_err(csv_err)?;
            }
        }
        w.flush().map_err(|e| Error::Parse(e.to_string()))
    }
}

fn check_grid<T: Scalar>(thresholds: &[T]) -> Result<()> {
    if thresholds.is_empty() {
        return Err(Error::Empty);
    }
    for (i, &z) in thresholds.iter().enumerate() {
        if !(z > T::zero() && z.is_finite()) {
            return Err(Error::NonPositiveSupport {
                index: i,
                value: z.as_f64(),
            });
        }
    }
    if thresholds.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParams("threshold grid must be strictly ascending".into()));
    }
    Ok(())
}

// Per-forecaster, per-threshold sums of elementary scores.
struct Accumulator<T> {
    sums: Vec<Vec<T>>,
}

impl<T: Scalar> Accumulator<T> {
    fn new(forecasters: usize, thresholds: usize) -> Self {
        Self {
            sums: vec![vec![T::zero(); thresholds]; forecasters],
        }
    }

    // Only thresholds in [min(x, y), max(x, y)) can fire.
    fn add(&mut self, kind: &ElementaryKind<T>, zs: &[T], j: usize, x: T, y: T) {
        let (lo, hi) = if x <= y { (x, y) } else { (y, x) };
        let start = zs.partition_point(|&z| z < lo);
        let end = zs.partition_point(|&z| z < hi);
        let row = &mut self.sums[j];
        for (k, &z) in zs.iter().enumerate().take(end).skip(start) {
            row[k] = row[k] + kind.value(x, y, z);
        }
    }

    fn merge(mut self, other: Self) -> Self {
        for (a, b) in self.sums.iter_mut().zip(other.sums) {
            for (u, v) in a.iter_mut().zip(b) {
                *u = *u + v;
            }
        }
        self
    }

    fn finish(self, names: &[String], thresholds: Vec<T>, n: usize, seed: Option<u64>) -> MurphyCurve<T> {
        let count = T::from_usize(n).unwrap();
        let series = names
            .iter()
            .zip(self.sums)
            .map(|(name, sums)| MurphySeries {
                forecaster: name.clone(),
                mean_scores: sums.into_iter().map(|s| s / count).collect(),
            })
            .collect();
        MurphyCurve {
            thresholds,
            series,
            n,
            seed,
        }
    }
}

const CHUNK: usize = 8192;

/// Murphy curves of several forecasters evaluated against the same outcomes.
///
/// Sums are formed over fixed-size chunks in parallel and merged in chunk
/// order, so the result does not depend on the thread count.
pub fn murphy_curve<T: Scalar>(
    kind: &ElementaryKind<T>,
    forecasts: &[(String, Vec<T>)],
    outcomes: &[T],
    thresholds: &[T],
) -> Result<MurphyCurve<T>> {
    kind.validate()?;
    check_grid(thresholds)?;
    if outcomes.is_empty() || forecasts.is_empty() {
        return Err(Error::Empty);
    }
    for (_, xs) in forecasts {
        crate::dist::check_pairs(xs, outcomes)?;
    }
    let names: Vec<String> = forecasts.iter().map(|(n, _)| n.clone()).collect();
    let partials: Vec<Accumulator<T>> = (0..outcomes.len().div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let range = c * CHUNK..((c + 1) * CHUNK).min(outcomes.len());
            let mut acc = Accumulator::new(forecasts.len(), thresholds.len());
            for (j, (_, xs)) in forecasts.iter().enumerate() {
                for i in range.clone() {
                    acc.add(kind, thresholds, j, xs[i], outcomes[i]);
                }
            }
            acc
        })
        .collect();
    let acc = partials
        .into_iter()
        .reduce(Accumulator::merge)
        .expect("at least one chunk");
    Ok(acc.finish(&names, thresholds.to_vec(), outcomes.len(), None))
}

/// Murphy curves pooled over simulated replications; each replication's
/// forecasts are constant across its outcomes.
pub fn murphy_from_replications<T: Scalar>(
    kind: &ElementaryKind<T>,
    forecasters: &[&str],
    replications: &[Replication<T>],
    thresholds: &[T],
    seed: Option<u64>,
) -> Result<MurphyCurve<T>> {
    kind.validate()?;
    check_grid(thresholds)?;
    if replications.is_empty() {
        return Err(Error::Empty);
    }
    for r in replications {
        if r.forecasts.len() != forecasters.len() {
            return Err(Error::LengthMismatch {
                left: r.forecasts.len(),
                right: forecasters.len(),
            });
        }
    }
    let names: Vec<String> = forecasters.iter().map(|s| s.to_string()).collect();
    let partials: Vec<Accumulator<T>> = replications
        .par_chunks(64)
        .map(|chunk| {
            let mut acc = Accumulator::new(names.len(), thresholds.len());
            for r in chunk {
                for (j, &x) in r.forecasts.iter().enumerate() {
                    for &y in r.outcomes.values() {
                        acc.add(kind, thresholds, j, x, y);
                    }
                }
            }
            acc
        })
        .collect();
    let n = replications.iter().map(|r| r.outcomes.len()).sum();
    let acc = partials
        .into_iter()
        .reduce(Accumulator::merge)
        .expect("at least one chunk");
    Ok(acc.finish(&names, thresholds.to_vec(), n, seed))
}

/// Points in the default threshold grid.
pub const DEFAULT_GRID_POINTS: usize = 101;

/// 101 log-spaced thresholds over `[0.5 q_0.01, 2 q_0.99]` of the pooled
/// values (outcomes and forecasts).
pub fn default_thresholds<T: Scalar>(pooled: &[T]) -> Result<Vec<T>> {
    if pooled.is_empty() {
        return Err(Error::Empty);
    }
    let mut sorted = pooled.to_vec();
    for (i, &v) in sorted.iter().enumerate() {
        if !(v > T::zero() && v.is_finite()) {
            return Err(Error::NonPositiveSupport {
                index: i,
                value: v.as_f64(),
            });
        }
    }
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let quantile = |alpha: f64| {
        let k = ((alpha * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len());
        sorted[k - 1]
    };
    let lo = quantile(0.01) * T::lit(0.5);
    let hi = quantile(0.99) * T::lit(2.0);
    Ok(spaced_grid(lo, hi, DEFAULT_GRID_POINTS, true))
}

/// Parses `lo:hi:count[:log|lin]` (log spacing by default).
pub fn parse_threshold_grid<T: Scalar>(text: &str) -> Result<Vec<T>> {
    let parts: Vec<&str> = text.split(':').map(str::trim).collect();
    if !(3..=4).contains(&parts.len()) {
        return Err(Error::Parse(format!("grid `{text}`: expected lo:hi:count[:log|lin]")));
    }
    let num = |s: &str| {
        s.parse::<f64>()
            .map_err(|_| Error::Parse(format!("grid `{text}`: bad number `{s}`")))
    };
    let (lo, hi) = (num(parts[0])?, num(parts[1])?);
    let count: usize = parts[2]
        .parse()
        .map_err(|_| Error::Parse(format!("grid `{text}`: bad count `{}`", parts[2])))?;
    let log = match parts.get(3) {
        None | Some(&"log") => true,
        Some(&"lin") => false,
        Some(other) => return Err(Error::Parse(format!("grid `{text}`: unknown spacing `{other}`"))),
    };
    let spread_ok = if count == 1 { hi >= lo } else { hi > lo };
    if !(lo > 0.0 && hi.is_finite() && spread_ok) || count == 0 {
        return Err(Error::Parse(format!(
            "grid `{text}`: need 0 < lo < hi (lo <= hi for a single point) and count >= 1"
        )));
    }
    Ok(spaced_grid(T::lit(lo), T::lit(hi), count, log))
}
