use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive};

/// Floating-point scalar the numerical routines are generic over.
///
/// Implemented for `f32` and `f64`. Tolerances in this crate are stated for
/// `f64`; the `f32` instantiation clamps them to a few ulps where needed.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + Debug + Display + Default + Send + Sync + Sum + 'static
{
    /// Converts an `f64` literal into this scalar type.
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("f64 literal representable in scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// `max(tol, k * epsilon)`: a tolerance that stays meaningful for `f32`.
    #[inline]
    fn tol_or_eps(tol: f64, k: f64) -> Self {
        Self::lit(tol).max(Self::epsilon() * Self::lit(k))
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Pairwise summation; deterministic and accurate for long sums.
pub fn pairwise_sum<T: Scalar>(values: &[T]) -> T {
    const LEAF: usize = 32;
    if values.len() <= LEAF {
        return values.iter().fold(T::zero(), |acc, &v| acc + v);
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Positive part `max(x, 0)`.
#[inline]
pub fn pos<T: Scalar>(x: T) -> T {
    x.max(T::zero())
}

/// Negative part `max(-x, 0)`.
#[inline]
pub fn neg<T: Scalar>(x: T) -> T {
    (-x).max(T::zero())
}

/// `count` points from `lo` to `hi` inclusive, log-spaced when `log` is set.
pub fn spaced_grid<T: Scalar>(lo: T, hi: T, count: usize, log: bool) -> Vec<T> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let steps = T::from_usize(count - 1).unwrap();
            (0..count)
                .map(|i| {
                    let t = T::from_usize(i).unwrap() / steps;
                    if i == 0 {
                        lo
                    } else if i + 1 == count {
                        hi
                    } else if log {
                        (lo.ln() + t * (hi.ln() - lo.ln())).exp()
                    } else {
                        lo + t * (hi - lo)
                    }
                })
                .collect()
        }
    }
}
