//! Catalog of Orlicz functions, shape diagnostics and the Lambert W function.

mod lambert;
mod shape;

pub use lambert::{lambert_w, LambertWResult};
pub use shape::{check_shape, ShapeReport, MIN_SHAPE_GRID};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::{neg, pos, Scalar};

/// Catalog names accepted by [`catalog_lookup`].
pub const CATALOG: [&str; 11] = [
    "mean",
    "quantile",
    "expectile",
    "lce",
    "pnorm",
    "mean-variance",
    "entropic-log",
    "pnorm-log",
    "exp-alpha",
    "gauss-tail",
    "exp-centered",
];

/// Shape properties of an Orlicz function. `is_increasing` means strictly
/// increasing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ShapeFlags {
    pub is_increasing: bool,
    pub is_convex: bool,
    pub is_ga_convex: bool,
}

/// Parametrized Orlicz functions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum OrliczKind<T> {
    /// `x`
    Mean,
    /// `alpha + 1{x > 1}`
    Quantile { alpha: T },
    /// `1 + q (x-1)^+ - (1-q) (x-1)^-`
    Expectile { q: T },
    /// `1 + log x`
    Lce,
    /// `x^p`
    PNorm { p: T },
    /// `lambda x^p + (1-lambda) x^(2p)`
    MeanVariance { lambda: T, p: T },
    /// `x log(e - 1 + x)`
    EntropicLog,
    /// `x^p + 1{x > 1} x^p log x`
    PNormLog { p: T },
    /// `(e^(alpha x) - 1) / (e^alpha - 1)`
    ExpAlpha { alpha: T },
    /// `x e^(alpha (x^2 - 1))`
    GaussTail { alpha: T },
    /// `(e^x - x - 1) / (e - 2)`
    ExpCentered,
}

/// Named parameters for [`catalog_lookup`]. Unused entries are ignored.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PhiParams<T> {
    pub p: Option<T>,
    pub q: Option<T>,
    pub alpha: Option<T>,
    pub lambda_mix: Option<T>,
}

impl<T: Scalar> PhiParams<T> {
    pub fn p(mut self, p: T) -> Self {
        self.p = Some(p);
        self
    }
    pub fn q(mut self, q: T) -> Self {
        self.q = Some(q);
        self
    }
    pub fn alpha(mut self, alpha: T) -> Self {
        self.alpha = Some(alpha);
        self
    }
    pub fn lambda_mix(mut self, lambda: T) -> Self {
        self.lambda_mix = Some(lambda);
        self
    }
}

/// An Orlicz function from the catalog with its declared shape flags.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OrliczFunctionSpec<T> {
    kind: OrliczKind<T>,
    flags: ShapeFlags,
}

fn require<T: Scalar>(value: Option<T>, name: &'static str, function: &str) -> Result<T> {
    value.ok_or_else(|| Error::InvalidParams(format!("`{function}` needs parameter {name}")))
}

fn check(ok: bool, name: &'static str, value: f64, expected: &'static str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::ParamOutOfRange {
            name,
            value,
            expected,
        })
    }
}

fn open_unit<T: Scalar>(v: T, name: &'static str) -> Result<T> {
    check(v > T::zero() && v < T::one(), name, v.as_f64(), "0 < value < 1")?;
    Ok(v)
}

fn at_least_one<T: Scalar>(v: T, name: &'static str) -> Result<T> {
    check(v >= T::one() && v.is_finite(), name, v.as_f64(), "value >= 1")?;
    Ok(v)
}

fn positive<T: Scalar>(v: T, name: &'static str) -> Result<T> {
    check(v > T::zero() && v.is_finite(), name, v.as_f64(), "value > 0")?;
    Ok(v)
}

/// Looks up a catalog entry by name.
///
/// Parameter ranges: `quantile` alpha in (0,1); `expectile` q in (0,1);
/// `pnorm` p > 0; `mean-variance` lambda in [0,1] and p >= 1 (default 1);
/// `pnorm-log` p >= 1; `exp-alpha` and `gauss-tail` alpha > 0.
pub fn catalog_lookup<T: Scalar>(name: &str, params: &PhiParams<T>) -> Result<OrliczFunctionSpec<T>> {
    let kind = match name {
        "mean" => OrliczKind::Mean,
        "quantile" => OrliczKind::Quantile {
            alpha: open_unit(require(params.alpha, "alpha", name)?, "alpha")?,
        },
        "expectile" => OrliczKind::Expectile {
            q: open_unit(require(params.q, "q", name)?, "q")?,
        },
        "lce" => OrliczKind::Lce,
        "pnorm" => OrliczKind::PNorm {
            p: positive(require(params.p, "p", name)?, "p")?,
        },
        "mean-variance" => {
            let lambda = require(params.lambda_mix, "lambda", name)?;
            check(
                lambda >= T::zero() && lambda <= T::one(),
                "lambda",
                lambda.as_f64(),
                "0 <= value <= 1",
            )?;
            OrliczKind::MeanVariance {
                lambda,
                p: at_least_one(params.p.unwrap_or_else(T::one), "p")?,
            }
        }
        "entropic-log" => OrliczKind::EntropicLog,
        "pnorm-log" => OrliczKind::PNormLog {
            p: at_least_one(require(params.p, "p", name)?, "p")?,
        },
        "exp-alpha" => OrliczKind::ExpAlpha {
            alpha: positive(require(params.alpha, "alpha", name)?, "alpha")?,
        },
        "gauss-tail" => OrliczKind::GaussTail {
            alpha: positive(require(params.alpha, "alpha", name)?, "alpha")?,
        },
        "exp-centered" => OrliczKind::ExpCentered,
        other => return Err(Error::UnknownFunction(other.to_string())),
    };
    Ok(OrliczFunctionSpec::from_kind(kind))
}

impl<T: Scalar> OrliczFunctionSpec<T> {
    /// Builds a spec from an already validated kind, attaching its flags.
    pub fn from_kind(kind: OrliczKind<T>) -> Self {
        let half = T::lit(0.5);
        let flags = match kind {
            OrliczKind::Quantile { .. } => ShapeFlags {
                is_increasing: false,
                is_convex: false,
                is_ga_convex: false,
            },
            OrliczKind::Expectile { q } => ShapeFlags {
                is_increasing: true,
                is_convex: q >= half,
                is_ga_convex: q >= half,
            },
            OrliczKind::Lce => ShapeFlags {
                is_increasing: true,
                is_convex: false,
                is_ga_convex: true,
            },
            OrliczKind::PNorm { p } => ShapeFlags {
                is_increasing: true,
                is_convex: p >= T::one(),
                is_ga_convex: true,
            },
            _ => ShapeFlags {
                is_increasing: true,
                is_convex: true,
                is_ga_convex: true,
            },
        };
        Self { kind, flags }
    }

    pub fn kind(&self) -> OrliczKind<T> {
        self.kind
    }

    pub fn flags(&self) -> ShapeFlags {
        self.flags
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            OrliczKind::Mean => "mean",
            OrliczKind::Quantile { .. } => "quantile",
            OrliczKind::Expectile { .. } => "expectile",
            OrliczKind::Lce => "lce",
            OrliczKind::PNorm { .. } => "pnorm",
            OrliczKind::MeanVariance { .. } => "mean-variance",
            OrliczKind::EntropicLog => "entropic-log",
            OrliczKind::PNormLog { .. } => "pnorm-log",
            OrliczKind::ExpAlpha { .. } => "exp-alpha",
            OrliczKind::GaussTail { .. } => "gauss-tail",
            OrliczKind::ExpCentered => "exp-centered",
        }
    }

    /// Whether `Phi(1) = 1` holds. Only the quantile row (`Phi(1) = alpha`)
    /// fails it.
    pub fn is_normalized(&self) -> bool {
        !matches!(self.kind, OrliczKind::Quantile { .. })
    }

    /// `Phi(x)` for `x >= 0`. `lce` returns `-inf` at zero.
    pub fn evaluate(&self, x: T) -> T {
        let one = T::one();
        match self.kind {
            OrliczKind::Mean => x,
            OrliczKind::Quantile { alpha } => {
                if x > one {
                    alpha + one
                } else {
                    alpha
                }
            }
            OrliczKind::Expectile { q } => one + q * pos(x - one) - (one - q) * neg(x - one),
            OrliczKind::Lce => one + x.ln(),
            OrliczKind::PNorm { p } => x.powf(p),
            OrliczKind::MeanVariance { lambda, p } => {
                let xp = x.powf(p);
                lambda * xp + (one - lambda) * xp * xp
            }
            OrliczKind::EntropicLog => x * (T::E() - one + x).ln(),
            OrliczKind::PNormLog { p } => {
                let xp = x.powf(p);
                if x > one {
                    xp + xp * x.ln()
                } else {
                    xp
                }
            }
            OrliczKind::ExpAlpha { alpha } => (alpha * x).exp_m1() / alpha.exp_m1(),
            OrliczKind::GaussTail { alpha } => x * (alpha * (x * x - one)).exp(),
            OrliczKind::ExpCentered => (x.exp_m1() - x) / (T::E() - T::lit(2.0)),
        }
    }
}
