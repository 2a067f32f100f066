use crate::error::{Error, Result};
use crate::par::{map_slice, Execution};
use crate::reach::ReachRun;

use super::TimeSurface;

/// Modulus of continuity `omega` of the minimum time function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Modulus {
    /// `omega(d) = L d`
    Lipschitz(f64),
    /// `omega(d) = H d^(1/k)`
    Hoelder { constant: f64, k: u32 },
}

impl Modulus {
    pub fn eval(&self, d: f64) -> f64 {
        match *self {
            Modulus::Lipschitz(l) => l * d,
            Modulus::Hoelder { constant, k } => constant * d.powf(1.0 / k as f64),
        }
    }
}

/// Ingredients of the general error estimate `omega(Delta_Gamma) + omega(C h^p)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorBudget {
    pub modulus: Modulus,
    /// Scheme constant `C` in `d_H(R, R_h) <= C h^p`.
    pub c: f64,
    pub h: f64,
    pub p: u32,
    pub delta_gamma: f64,
    pub dt: f64,
}

impl ErrorBudget {
    pub fn new(modulus: Modulus, c: f64, h: f64, p: u32, delta_gamma: f64, dt: f64) -> Result<Self> {
        let constant = match modulus {
            Modulus::Lipschitz(l) => l,
            Modulus::Hoelder { constant, k } => {
                if k == 0 {
                    return Err(Error::domain("Hoelder exponent 1/k needs k >= 1"));
                }
                constant
            }
        };
        if [constant, c, h, delta_gamma, dt].iter().any(|v| !(*v >= 0.0)) {
            return Err(Error::domain("error budget entries must be nonnegative"));
        }
        Ok(ErrorBudget {
            modulus,
            c,
            h,
            p,
            delta_gamma,
            dt,
        })
    }

    /// `C h^p`.
    pub fn set_error(&self) -> f64 {
        self.c * self.h.powi(self.p as i32)
    }
}

pub fn error_bound_general(b: &ErrorBudget) -> f64 {
    b.modulus.eval(b.delta_gamma) + b.modulus.eval(b.set_error())
}

/// The `2 dt` bound and its inclusion diagnostic
/// `delta*(l, R_i) + eps/3 <= delta*(l, R_{i+1})` over the grid directions.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoDtBound {
    pub bound: f64,
    pub eps: f64,
    /// Smallest support increment between consecutive fronts.
    pub min_gap: f64,
    pub certified: bool,
    pub warning: Option<String>,
}

/// `2 dt`, with the inclusion checked for `eps` (or, if `None`, for the largest
/// `eps` the fronts certify, `3 * min_gap`).
pub fn error_bound_two_dt(run: &ReachRun, eps: Option<f64>) -> TwoDtBound {
    let min_gap = run.min_increment();
    let eps = eps.unwrap_or(3.0 * min_gap.max(0.0));
    let certified = min_gap > 0.0 && min_gap >= eps / 3.0;
    let warning = (!certified).then(|| {
        format!(
            "inclusion R_i + eps/3 B in R_(i+1) fails for eps = {eps:.3e} \
             (smallest support increment {min_gap:.3e}); the 2 dt bound is not certified"
        )
    });
    TwoDtBound {
        bound: 2.0 * run.grid.dt(),
        eps,
        min_gap,
        certified,
        warning,
    }
}

/// Largest deviation from an oracle over the samples inside the domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupError {
    pub max: f64,
    pub inside: usize,
    pub worst: Option<[f64; 2]>,
}

pub fn sup_error_vs_oracle<F>(
    surface: &TimeSurface,
    oracle: F,
    samples: &[[f64; 2]],
    exec: Execution,
) -> SupError
where
    F: Fn([f64; 2]) -> f64 + Sync + Send,
{
    let errs = map_slice(exec, samples, |&x| {
        surface.evaluate(x).value().map(|v| (oracle(x) - v).abs())
    });
    let mut out = SupError {
        max: 0.0,
        inside: 0,
        worst: None,
    };
    for (x, e) in samples.iter().zip(errs) {
        if let Some(e) = e {
            out.inside += 1;
            if out.worst.is_none() || e > out.max {
                out.max = e;
                out.worst = Some(*x);
            }
        }
    }
    out
}

/// Smallest `H` with `|T(x) - T(y)| <= H |x - y|^(1/k)` over all sample pairs.
pub fn fit_hoelder(points: &[[f64; 2]], values: &[f64], k: u32) -> f64 {
    let e = 1.0 / k.max(1) as f64;
    let mut h: f64 = 0.0;
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            let d = ((points[i][0] - points[j][0]).powi(2) + (points[i][1] - points[j][1]).powi(2))
                .sqrt();
            if d > 0.0 {
                h = h.max((values[i] - values[j]).abs() / d.powf(e));
            }
        }
    }
    h
}

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

/// The first `count` points of the 2-3 Halton sequence (skipping the origin),
/// mapped to the box `[lo, hi]`.
pub fn halton(count: usize, lo: [f64; 2], hi: [f64; 2]) -> Vec<[f64; 2]> {
    (1..=count as u64)
        .map(|i| {
            [
                lo[0] + (hi[0] - lo[0]) * radical_inverse(i, 2),
                lo[1] + (hi[1] - lo[1]) * radical_inverse(i, 3),
            ]
        })
        .collect()
}
