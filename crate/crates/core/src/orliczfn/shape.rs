use serde::Serialize;

use super::{OrliczFunctionSpec, ShapeFlags};
use crate::scalar::{spaced_grid, Scalar};

/// Smallest grid accepted by [`check_shape`]; smaller requests are raised to it.
pub const MIN_SHAPE_GRID: usize = 64;

const GRID_LO: f64 = 1e-3;
const GRID_HI: f64 = 1e3;
const SLACK: f64 = 1e-10;

/// Outcome of [`check_shape`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShapeReport {
    pub function: &'static str,
    pub grid_points: usize,
    /// Consecutive grid points where `Phi` fails to increase strictly.
    pub monotone_violations: usize,
    /// Pairs with `Phi((x+y)/2) > (Phi(x)+Phi(y))/2` beyond slack.
    pub convex_violations: usize,
    /// Pairs with `Phi(sqrt(xy)) > (Phi(x)+Phi(y))/2` beyond slack.
    pub ga_violations: usize,
    pub declared: ShapeFlags,
    pub observed: ShapeFlags,
    /// Declared flags agree with the observations.
    pub consistent: bool,
}

fn exceeds<T: Scalar>(lhs: T, rhs: T) -> bool {
    if lhs.is_infinite() && rhs.is_infinite() {
        return false;
    }
    lhs > rhs + T::lit(SLACK) * rhs.abs().max(T::one())
}

/// Checks monotonicity, midpoint convexity and GA-midconvexity of `Phi` on a
/// log-spaced grid over `[1e-3, 1e3]`, over all grid pairs.
pub fn check_shape<T: Scalar>(spec: &OrliczFunctionSpec<T>, grid: usize) -> ShapeReport {
    let n = grid.max(MIN_SHAPE_GRID);
    let xs = spaced_grid(T::lit(GRID_LO), T::lit(GRID_HI), n, true);
    let phi: Vec<T> = xs.iter().map(|&x| spec.evaluate(x)).collect();
    let half = T::lit(0.5);

    let monotone_violations = phi
        .windows(2)
        .filter(|w| !(w[1] > w[0]) && !(w[0].is_infinite() && w[1].is_infinite()))
        .count();

    let mut convex_violations = 0;
    let mut ga_violations = 0;
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = (phi[i] + phi[j]) * half;
            if exceeds(spec.evaluate((xs[i] + xs[j]) * half), avg) {
                convex_violations += 1;
            }
            if exceeds(spec.evaluate((xs[i] * xs[j]).sqrt()), avg) {
                ga_violations += 1;
            }
        }
    }

    let observed = ShapeFlags {
        is_increasing: monotone_violations == 0,
        is_convex: convex_violations == 0,
        is_ga_convex: ga_violations == 0,
    };
    let declared = spec.flags();
    ShapeReport {
        function: spec.name(),
        grid_points: n,
        monotone_violations,
        convex_violations,
        ga_violations,
        declared,
        observed,
        consistent: declared == observed,
    }
}
