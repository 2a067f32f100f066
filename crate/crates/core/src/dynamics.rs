//! Linear control systems, time reversal and discrete transition matrices.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::geometry::Polytope;

type MatrixFn = Arc<dyn Fn(f64) -> DMatrix<f64> + Send + Sync>;

/// A matrix-valued coefficient `t -> M(t)`.
///
/// Coefficients are evaluated only at grid times. Tabulated data is looked up
/// at the nearest tabulated time (earlier entry on ties); nothing is integrated.
#[derive(Clone)]
pub enum Coefficient {
    Constant(DMatrix<f64>),
    Tabulated {
        times: Vec<f64>,
        values: Vec<DMatrix<f64>>,
    },
    Function {
        rows: usize,
        cols: usize,
        f: MatrixFn,
    },
}

impl fmt::Debug for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coefficient::Constant(m) => f.debug_tuple("Constant").field(m).finish(),
            Coefficient::Tabulated { times, .. } => {
                write!(f, "Tabulated({} samples)", times.len())
            }
            Coefficient::Function { rows, cols, .. } => write!(f, "Function({rows}x{cols})"),
        }
    }
}

impl Coefficient {
    pub fn function<F>(rows: usize, cols: usize, f: F) -> Self
    where
        F: Fn(f64) -> DMatrix<f64> + Send + Sync + 'static,
    {
        Coefficient::Function {
            rows,
            cols,
            f: Arc::new(f),
        }
    }

    pub fn tabulated(times: Vec<f64>, values: Vec<DMatrix<f64>>) -> Result<Self> {
        if times.is_empty() || times.len() != values.len() {
            return Err(Error::Config(
                "tabulated coefficient needs equally many (nonzero) times and values".into(),
            ));
        }
        if times.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::Config("tabulated times must be strictly increasing".into()));
        }
        let shape = values[0].shape();
        if values.iter().any(|v| v.shape() != shape) {
            return Err(Error::Config("tabulated matrices differ in shape".into()));
        }
        Ok(Coefficient::Tabulated { times, values })
    }

    pub fn shape(&self) -> (usize, usize) {
        match self {
            Coefficient::Constant(m) => m.shape(),
            Coefficient::Tabulated { values, .. } => values[0].shape(),
            Coefficient::Function { rows, cols, .. } => (*rows, *cols),
        }
    }

    pub fn as_constant(&self) -> Option<&DMatrix<f64>> {
        match self {
            Coefficient::Constant(m) => Some(m),
            _ => None,
        }
    }

    pub fn eval(&self, t: f64) -> DMatrix<f64> {
        match self {
            Coefficient::Constant(m) => m.clone(),
            Coefficient::Tabulated { times, values } => {
                let idx = times.partition_point(|&s| s < t);
                let pick = if idx == 0 {
                    0
                } else if idx == times.len() {
                    times.len() - 1
                } else if (t - times[idx - 1]) <= (times[idx] - t) {
                    idx - 1
                } else {
                    idx
                };
                values[pick].clone()
            }
            Coefficient::Function { f, .. } => f(t),
        }
    }

    /// `t -> -M(t0 + tf - t)`.
    fn reversed(&self, t0: f64, tf: f64) -> Coefficient {
        match self {
            Coefficient::Constant(m) => Coefficient::Constant(-m),
            other => {
                let inner = other.clone();
                let (rows, cols) = other.shape();
                Coefficient::function(rows, cols, move |t| -inner.eval(t0 + tf - t))
            }
        }
    }
}

/// `y' = A(t) y + B(t) u`, `u in U`, with target `S` on `[t0, tf]`.
#[derive(Debug, Clone)]
pub struct LinearSystem {
    pub a: Coefficient,
    pub b: Coefficient,
    pub control_set: Polytope,
    pub target: Polytope,
    pub t0: f64,
    pub tf: f64,
    reversed: bool,
}

impl LinearSystem {
    pub fn new(
        a: Coefficient,
        b: Coefficient,
        control_set: Polytope,
        target: Polytope,
        t0: f64,
        tf: f64,
    ) -> Result<Self> {
        let (n, n2) = a.shape();
        let (bn, m) = b.shape();
        if n == 0 || n != n2 {
            return Err(Error::Config(format!("A must be square, got {n}x{n2}")));
        }
        if bn != n {
            return Err(Error::Config(format!("B must have {n} rows, got {bn}")));
        }
        if m == 0 || control_set.dim() != m {
            return Err(Error::Config(format!(
                "control set has dimension {}, B has {m} columns",
                control_set.dim()
            )));
        }
        if target.dim() != n {
            return Err(Error::Config(format!(
                "target has dimension {}, state dimension is {n}",
                target.dim()
            )));
        }
        if !(t0 < tf) || !t0.is_finite() || !tf.is_finite() {
            return Err(Error::Config(format!("need finite t0 < tf, got [{t0}, {tf}]")));
        }
        Ok(LinearSystem {
            a,
            b,
            control_set,
            target,
            t0,
            tf,
            reversed: false,
        })
    }

    pub fn state_dim(&self) -> usize {
        self.a.shape().0
    }

    pub fn input_dim(&self) -> usize {
        self.b.shape().1
    }

    pub fn is_time_invariant(&self) -> bool {
        self.a.as_constant().is_some() && self.b.as_constant().is_some()
    }

    /// Whether this system is the time reversal of a user-supplied one.
    pub fn is_reversed(&self) -> bool {
        self.reversed
    }

    /// The time-reversed system `A(t) -> -A(t0+tf-t)`, `B(t) -> -B(t0+tf-t)`.
    /// The target becomes the initial set; `U` is unchanged.
    pub fn time_reverse(&self) -> LinearSystem {
        LinearSystem {
            a: self.a.reversed(self.t0, self.tf),
            b: self.b.reversed(self.t0, self.tf),
            control_set: self.control_set.clone(),
            target: self.target.clone(),
            t0: self.t0,
            tf: self.tf,
            reversed: !self.reversed,
        }
    }
}

/// Set-valued discretization scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    /// Set-valued Euler: `R+ = (I + hA) R + h B U`.
    Euler,
    /// Set-valued Heun with piecewise constant selections.
    Heun,
    /// Combination method: Heun transition matrices with trapezoidal quadrature.
    CombinationTrapezoid,
}

impl Scheme {
    pub fn order(self) -> u32 {
        match self {
            Scheme::Euler => 1,
            Scheme::Heun | Scheme::CombinationTrapezoid => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Euler => "euler",
            Scheme::Heun => "heun",
            Scheme::CombinationTrapezoid => "combination_trapezoid",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "euler" => Ok(Scheme::Euler),
            "heun" => Ok(Scheme::Heun),
            "combination" | "combination_trapezoid" | "trapezoid" => {
                Ok(Scheme::CombinationTrapezoid)
            }
            other => Err(Error::Config(format!(
                "unknown scheme '{other}' (expected euler, heun or combination)"
            ))),
        }
    }
}

/// Two-level time grid: `K` coarse levels of length `dt`, each split into `N`
/// substeps of length `h = dt / N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub t0: f64,
    pub tf: f64,
    pub levels: usize,
    pub substeps: usize,
}

impl TimeGrid {
    pub fn new(t0: f64, tf: f64, levels: usize, substeps: usize) -> Result<Self> {
        if levels == 0 || substeps == 0 {
            return Err(Error::domain("time grid needs K >= 1 and N >= 1"));
        }
        if !(t0 < tf) {
            return Err(Error::domain("time grid needs t0 < tf"));
        }
        Ok(TimeGrid {
            t0,
            tf,
            levels,
            substeps,
        })
    }

    pub fn dt(&self) -> f64 {
        (self.tf - self.t0) / self.levels as f64
    }

    pub fn h(&self) -> f64 {
        self.dt() / self.substeps as f64
    }

    /// Coarse time `t_i`; `t_K` is exactly `tf`.
    pub fn level_time(&self, i: usize) -> f64 {
        if i == self.levels {
            self.tf
        } else {
            self.t0 + i as f64 * self.dt()
        }
    }

    /// Fine time `t_ij = t_i + j h`.
    pub fn fine_time(&self, i: usize, j: usize) -> f64 {
        if j == self.substeps {
            self.level_time(i + 1)
        } else {
            self.level_time(i) + j as f64 * self.h()
        }
    }

    pub fn total_substeps(&self) -> usize {
        self.levels * self.substeps
    }
}

/// One-step transition matrix `Phi_h(t+h, t)` of the scheme.
pub fn phi_step(scheme: Scheme, a: &Coefficient, t: f64, h: f64) -> DMatrix<f64> {
    let a0 = a.eval(t);
    let n = a0.nrows();
    let id = DMatrix::<f64>::identity(n, n);
    match scheme {
        Scheme::Euler => id + a0 * h,
        Scheme::Heun | Scheme::CombinationTrapezoid => {
            let a1 = a.eval(t + h);
            let prod = &a1 * &a0;
            id + (&a0 + &a1) * (0.5 * h) + prod * (0.5 * h * h)
        }
    }
}

/// True iff the smallest singular value exceeds `1e-12` times the spectral norm.
pub fn phi_invertibility_check(phi: &DMatrix<f64>) -> bool {
    if !phi.is_square() || phi.nrows() == 0 {
        return false;
    }
    let sv = phi.singular_values();
    let max = sv.max();
    let min = sv.min();
    max > 0.0 && min > 1e-12 * max
}

/// Control input entering a level at node `anchor`: the state at that node
/// receives `input * u` before the remaining transition steps act on it.
#[derive(Debug, Clone)]
pub struct InputSlot {
    pub anchor: usize,
    pub input: DMatrix<f64>,
}

/// The discrete dynamics of one coarse level: `N` one-step transition
/// matrices and the input slots of the scheme's quadrature.
///
/// Transitions are only ever composed step by step, so the semigroup property
/// of the discrete fundamental matrix holds by construction.
#[derive(Debug, Clone)]
pub struct LevelMap {
    pub level: usize,
    pub steps: Vec<DMatrix<f64>>,
    pub slots: Vec<InputSlot>,
}

impl LevelMap {
    /// Builds level `level` of `grid` for the (already time-reversed) system.
    pub fn build(sys: &LinearSystem, scheme: Scheme, grid: &TimeGrid, level: usize) -> Result<Self> {
        let h = grid.h();
        let n = grid.substeps;
        let dim = sys.state_dim();
        let mut steps = Vec::with_capacity(n);
        for j in 0..n {
            let t = grid.fine_time(level, j);
            let phi = phi_step(scheme, &sys.a, t, h);
            if !phi_invertibility_check(&phi) {
                return Err(Error::Propagation {
                    level,
                    substep: j,
                    reason: format!(
                        "transition matrix at t = {t} is numerically singular; reduce the step size"
                    ),
                });
            }
            steps.push(phi);
        }
        let slots = match scheme {
            Scheme::Euler => (0..n)
                .map(|j| InputSlot {
                    anchor: j + 1,
                    input: sys.b.eval(grid.fine_time(level, j)) * h,
                })
                .collect(),
            Scheme::Heun => (0..n)
                .map(|j| {
                    let t = grid.fine_time(level, j);
                    let t1 = grid.fine_time(level, j + 1);
                    let id = DMatrix::<f64>::identity(dim, dim);
                    let lead = id + sys.a.eval(t1) * h;
                    let g = (lead * sys.b.eval(t) + sys.b.eval(t1)) * (0.5 * h);
                    InputSlot { anchor: j + 1, input: g }
                })
                .collect(),
            Scheme::CombinationTrapezoid => (0..=n)
                .map(|q| {
                    let c = if q == 0 || q == n { 0.5 } else { 1.0 };
                    InputSlot {
                        anchor: q,
                        input: sys.b.eval(grid.fine_time(level, q)) * (h * c),
                    }
                })
                .collect(),
        };
        Ok(LevelMap { level, steps, slots })
    }

    pub fn substeps(&self) -> usize {
        self.steps.len()
    }

    /// `Phi_h(t_{i+1}, t_i)` as the ordered product of the one-step matrices.
    pub fn transition(&self) -> DMatrix<f64> {
        let n = self.steps[0].nrows();
        self.steps
            .iter()
            .fold(DMatrix::identity(n, n), |acc, s| s * acc)
    }

    /// Backward covector recursion `c_{a-1} = Phi_{a-1}^T c_a` from `c_N = end`;
    /// returns the covectors at nodes `0..=N`.
    pub fn pullback(&self, end: &nalgebra::DVector<f64>) -> Vec<nalgebra::DVector<f64>> {
        let n = self.steps.len();
        let mut out = vec![end.clone(); n + 1];
        for a in (1..=n).rev() {
            out[a - 1] = self.steps[a - 1].tr_mul(&out[a]);
        }
        out
    }

    /// Forward states at nodes `0..=N` from `start` with one control per slot.
    pub fn push(
        &self,
        start: &nalgebra::DVector<f64>,
        controls: &[nalgebra::DVector<f64>],
    ) -> Vec<nalgebra::DVector<f64>> {
        debug_assert_eq!(controls.len(), self.slots.len());
        let n = self.steps.len();
        let mut states = Vec::with_capacity(n + 1);
        let mut x = start.clone();
        let mut s = 0;
        for a in 0..=n {
            if a > 0 {
                x = &self.steps[a - 1] * &x;
            }
            while s < self.slots.len() && self.slots[s].anchor == a {
                x += &self.slots[s].input * &controls[s];
                s += 1;
            }
            states.push(x.clone());
        }
        states
    }

    /// Final state only; same arithmetic as [`LevelMap::push`].
    pub fn push_end(
        &self,
        start: &nalgebra::DVector<f64>,
        controls: &[nalgebra::DVector<f64>],
    ) -> nalgebra::DVector<f64> {
        let n = self.steps.len();
        let mut x = start.clone();
        let mut s = 0;
        for a in 0..=n {
            if a > 0 {
                x = &self.steps[a - 1] * &x;
            }
            while s < self.slots.len() && self.slots[s].anchor == a {
                x += &self.slots[s].input * &controls[s];
                s += 1;
            }
        }
        x
    }
}
