//! Built-in example systems and analytic minimum time functions.

use std::str::FromStr;

use nalgebra::{dmatrix, DMatrix, DVector};

use crate::dynamics::{Coefficient, LinearSystem};
use crate::error::{Error, Result};
use crate::geometry::Polytope;

/// `y' = u`, `|u| <= 1`, target `{0}`.
pub fn scalar_integrator(tf: f64) -> Result<LinearSystem> {
    LinearSystem::new(
        Coefficient::Constant(dmatrix![0.0]),
        Coefficient::Constant(dmatrix![1.0]),
        Polytope::cube(1, 1.0)?,
        Polytope::singleton(DVector::zeros(1)),
        0.0,
        tf,
    )
}

/// Two decoupled integrators, `U = [-1,1]^2`, target `{0}`; `T(x) = |x|_inf`.
pub fn scalar_product(tf: f64) -> Result<LinearSystem> {
    LinearSystem::new(
        Coefficient::Constant(DMatrix::zeros(2, 2)),
        Coefficient::Constant(DMatrix::identity(2, 2)),
        Polytope::cube(2, 1.0)?,
        Polytope::singleton(DVector::zeros(2)),
        0.0,
        tf,
    )
}

/// Harmonic oscillator `A = [[0,1],[-1,0]]`, `B = I`, `U = [-1,1]^2`, target `{0}`.
pub fn rotation(tf: f64) -> Result<LinearSystem> {
    LinearSystem::new(
        Coefficient::Constant(dmatrix![0.0, 1.0; -1.0, 0.0]),
        Coefficient::Constant(DMatrix::identity(2, 2)),
        Polytope::cube(2, 1.0)?,
        Polytope::singleton(DVector::zeros(2)),
        0.0,
        tf,
    )
}

/// `x1' = x2`, `x2' = u`, `|u| <= 1`, target `{0}`.
pub fn double_integrator(tf: f64) -> Result<LinearSystem> {
    LinearSystem::new(
        Coefficient::Constant(dmatrix![0.0, 1.0; 0.0, 0.0]),
        Coefficient::Constant(dmatrix![0.0; 1.0]),
        Polytope::cube(1, 1.0)?,
        Polytope::singleton(DVector::zeros(2)),
        0.0,
        tf,
    )
}

/// Names accepted by [`builtin`].
pub const BUILTINS: [&str; 4] = ["scalar_integrator", "scalar_product", "rotation", "double_integrator"];

pub fn builtin(name: &str, tf: f64) -> Result<LinearSystem> {
    match name {
        "scalar_integrator" => scalar_integrator(tf),
        "scalar_product" => scalar_product(tf),
        "rotation" => rotation(tf),
        "double_integrator" => double_integrator(tf),
        other => Err(Error::Config(format!(
            "unknown builtin system '{other}' (known: {})",
            BUILTINS.join(", ")
        ))),
    }
}

/// Analytic minimum time functions for built-in systems.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Oracle {
    #[default]
    None,
    /// `T(x) = max(|x1|, |x2|)`.
    ScalarProductInfNorm,
    /// Time-optimal control of the double integrator to the origin.
    DoubleIntegrator,
}

impl FromStr for Oracle {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Oracle::None),
            "scalar_product_inf_norm" => Ok(Oracle::ScalarProductInfNorm),
            "double_integrator" => Ok(Oracle::DoubleIntegrator),
            other => Err(Error::Config(format!(
                "unknown oracle '{other}' (expected none, scalar_product_inf_norm or double_integrator)"
            ))),
        }
    }
}

impl Oracle {
    pub fn name(self) -> &'static str {
        match self {
            Oracle::None => "none",
            Oracle::ScalarProductInfNorm => "scalar_product_inf_norm",
            Oracle::DoubleIntegrator => "double_integrator",
        }
    }

    pub fn eval(self, x: [f64; 2]) -> Option<f64> {
        match self {
            Oracle::None => None,
            Oracle::ScalarProductInfNorm => Some(x[0].abs().max(x[1].abs())),
            Oracle::DoubleIntegrator => Some(double_integrator_time(x)),
        }
    }
}

/// Minimum time to steer `x` to the origin under `x1' = x2, x2' = u, |u| <= 1`.
///
/// Above the switching curve `x1 = -x2|x2|/2` the optimal control is `-1`
/// followed by `+1`; below it the reverse.
pub fn double_integrator_time(x: [f64; 2]) -> f64 {
    let [x1, x2] = x;
    let s = x1 + 0.5 * x2 * x2.abs();
    if s > 0.0 {
        x2 + 2.0 * (x1 + 0.5 * x2 * x2).sqrt()
    } else if s < 0.0 {
        -x2 + 2.0 * (-x1 + 0.5 * x2 * x2).sqrt()
    } else {
        x2.abs()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // Integrate the bang-bang law exactly: constant u over an interval moves
    // (x1, x2) to (x1 + x2 t + u t^2/2, x2 + u t).
    fn flow(x: [f64; 2], u: f64, t: f64) -> [f64; 2] {
        [x[0] + x[1] * t + 0.5 * u * t * t, x[1] + u * t]
    }

    #[test]
    fn double_integrator_reaches_origin() {
        for &x in &[[1.0, 0.0], [-0.3, 0.8], [0.25, -1.1], [-2.0, -0.5], [0.6, 0.4]] {
            let t = double_integrator_time(x);
            let s = x[0] + 0.5 * x[1] * x[1].abs();
            let u = if s > 0.0 { -1.0 } else { 1.0 };
            // after the switch the state lies on the curve and moves with -u;
            // solve for the switch time by bisection on the curve condition
            let on_curve = |y: [f64; 2]| y[0] + 0.5 * y[1] * y[1].abs();
            let (mut lo, mut hi) = (0.0, t);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if on_curve(flow(x, u, mid)) * s > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let y = flow(x, u, lo);
            let end = flow(y, -u, t - lo);
            assert!(end[0].abs() < 1e-9 && end[1].abs() < 1e-9, "{x:?} -> {end:?}");
        }
        assert_eq!(double_integrator_time([1.0, 0.0]), 2.0);
        assert_eq!(double_integrator_time([0.0, 0.0]), 0.0);
    }

    #[test]
    fn builtin_names() {
        for n in BUILTINS {
            assert!(builtin(n, 1.0).is_ok());
        }
        assert!(builtin("pendulum", 1.0).is_err());
        assert_eq!("double_integrator".parse::<Oracle>().unwrap(), Oracle::DoubleIntegrator);
    }
}
