use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Principal-branch Lambert W value with convergence diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LambertWResult<T> {
    pub value: T,
    pub iterations: usize,
    /// `|W e^W - arg|`
    pub residual: T,
}

const MAX_ITER: usize = 64;

/// Principal branch `W0` of the Lambert function, `W e^W = arg`, for
/// `arg >= -1/e`.
///
/// Halley iteration started from the branch-point series
/// `-1 + s - s^2/3 + 11 s^3/72` with `s = sqrt(2 (e arg + 1))` for
/// `arg < -0.25`, `ln(1 + arg)` up to 3, and `L1 - L2 + L2/L1`
/// (`L1 = ln arg`, `L2 = ln L1`) beyond.
pub fn lambert_w<T: Scalar>(arg: T) -> Result<LambertWResult<T>> {
    let one = T::one();
    let two = T::lit(2.0);
    if arg.is_nan() {
        return Err(Error::DomainError(f64::NAN));
    }
    if arg == T::zero() {
        return Ok(LambertWResult {
            value: T::zero(),
            iterations: 0,
            residual: T::zero(),
        });
    }
    if arg == T::infinity() {
        return Ok(LambertWResult {
            value: T::infinity(),
            iterations: 0,
            residual: T::zero(),
        });
    }
    let branch = T::E() * arg + one;
    if branch < T::zero() {
        if branch > -T::epsilon() * T::lit(8.0) {
            return Ok(at_branch_point());
        }
        return Err(Error::DomainError(arg.as_f64()));
    }
    if branch == T::zero() {
        return Ok(at_branch_point());
    }

    let mut w = if arg < T::lit(-0.25) {
        let s = (two * branch).sqrt();
        -one + s - s * s / T::lit(3.0) + T::lit(11.0 / 72.0) * s * s * s
    } else if arg < T::lit(3.0) {
        arg.ln_1p()
    } else {
        let l1 = arg.ln();
        let l2 = l1.ln();
        l1 - l2 + l2 / l1
    };

    let tol = T::epsilon() * T::lit(4.0);
    let mut iterations = 0;
    while iterations < MAX_ITER {
        iterations += 1;
        let ew = w.exp();
        let f = w * ew - arg;
        let wp1 = w + one;
        let denom = ew * wp1 - (w + two) * f / (two * wp1);
        if denom == T::zero() || !denom.is_finite() {
            break;
        }
        let step = f / denom;
        w = w - step;
        if step.abs() <= tol * (one + w.abs()) {
            break;
        }
    }
    let residual = (w * w.exp() - arg).abs();
    Ok(LambertWResult {
        value: w,
        iterations,
        residual,
    })
}

fn at_branch_point<T: Scalar>() -> LambertWResult<T> {
    let w = -T::one();
    LambertWResult {
        value: w,
        iterations: 0,
        residual: (w * w.exp() + T::one() / T::E()).abs(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_points() {
        assert_eq!(lambert_w(0.0_f64).unwrap().value, 0.0);
        assert!((lambert_w(std::f64::consts::E).unwrap().value - 1.0).abs() < 1e-15);
        assert_eq!(lambert_w(-1.0 / std::f64::consts::E).unwrap().value, -1.0);
    }

    #[test]
    fn omega_constant() {
        // fixed-point oracle w <- w - (w e^w - 1) / (e^w (w + 1)), run to 30 digits
        let w = lambert_w(1.0_f64).unwrap();
        assert!((w.value - 0.567_143_290_409_783_8).abs() < 1e-15);
        assert!(w.residual <= 1e-12);
    }

    #[test]
    fn rejects_below_branch_point() {
        assert!(matches!(lambert_w(-0.5_f64), Err(Error::DomainError(_))));
        assert!(lambert_w(f64::NAN).is_err());
    }

    #[test]
    fn defining_identity_on_log_spaced_set() {
        let inv_e = (-1.0_f64).exp();
        let mut args: Vec<f64> = (-6..=0).map(|k| -inv_e + 10f64.powi(k)).collect();
        args.extend((-60..=60).map(|k| 10f64.powf(k as f64 / 10.0)));
        args.extend((-60..=-5).map(|k| -(10f64.powf(k as f64 / 10.0))));
        for a in args {
            let r = lambert_w(a).unwrap();
            assert!(
                r.residual <= 1e-12 * a.abs().max(1.0),
                "arg {a}: residual {}",
                r.residual
            );
            assert!(r.value >= -1.0);
        }
    }

    #[test]
    fn f32_branch() {
        let w = lambert_w(1.0_f32).unwrap();
        assert!((w.value - 0.567_143_3).abs() < 1e-6);
    }
}
