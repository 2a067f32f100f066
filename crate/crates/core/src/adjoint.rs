//! Discrete adjoint, bang-bang controls and trajectory reconstruction.
//!
//! A front vertex is reached by following its provenance backwards: in each
//! level the vertex was produced by a grid direction `l` whose covector,
//! pulled back through the level by the discrete adjoint recursion, selected
//! the controls and the vertex of the previous front it came from. Replaying
//! those controls forward reproduces the vertex with the same arithmetic.

use nalgebra::{DMatrix, DVector};

use crate::dynamics::{LevelMap, LinearSystem, Scheme, TimeGrid};
use crate::error::{Error, Result};
use crate::geometry::{Point, Polytope};
use crate::reach::{select_controls, Front, ReachRun};

/// Components of `eta B` smaller than this count as zero (singular).
pub const SINGULAR_TOL: f64 = 1e-12;

/// Outward normal of a planar front at vertex `v`: the bisector of the normals
/// of the two adjacent edges.
pub fn outer_normal_at_vertex(front: &Front, v: &Point) -> Result<Point> {
    let p = &front.polytope;
    let tol = 1e-12 * p.diameter().max(1.0);
    let idx = p
        .find_vertex(v, tol)
        .ok_or_else(|| Error::domain("point is not a vertex of the front"))?;
    p.vertex_normal(idx)
}

/// Backward recursion `eta_{j-1} = eta_j Phi_j` from `eta_last = zeta` over the
/// one-step matrices `steps` (in forward time order). Returns covectors at all
/// nodes, in forward order.
pub fn adjoint_sequence(zeta: &Point, steps: &[DMatrix<f64>]) -> Result<Vec<Point>> {
    if zeta.norm() < 1e-12 {
        return Err(Error::domain("terminal covector must be nonzero"));
    }
    let mut out = vec![zeta.clone(); steps.len() + 1];
    for j in (1..=steps.len()).rev() {
        out[j - 1] = steps[j - 1].tr_mul(&out[j]);
    }
    Ok(out)
}

/// `sign(eta B)^T` with `sign(0) = 0` (below [`SINGULAR_TOL`]).
pub fn bang_bang_control(eta: &Point, b: &DMatrix<f64>) -> DVector<f64> {
    b.tr_mul(eta).map(|v| {
        if v.abs() < SINGULAR_TOL {
            0.0
        } else {
            v.signum()
        }
    })
}

/// Indices of the components of `eta B` that vanish numerically.
pub fn singular_components(eta: &Point, b: &DMatrix<f64>) -> Vec<usize> {
    b.tr_mul(eta)
        .iter()
        .enumerate()
        .filter(|(_, v)| v.abs() < SINGULAR_TOL)
        .map(|(i, _)| i)
        .collect()
}

/// Whether each control maximizes `eta_k B_k u` over the vertices of `u_set`
/// (within `1e-10`, relative to the size of the maximum).
pub fn maximum_condition_check(
    etas: &[Point],
    inputs: &[DMatrix<f64>],
    controls: &[Point],
    u_set: &Polytope,
) -> bool {
    etas.iter().zip(inputs).zip(controls).all(|((eta, b), u)| {
        let row = b.tr_mul(eta);
        let best = u_set
            .vertices()
            .iter()
            .map(|v| row.dot(v))
            .fold(f64::NEG_INFINITY, f64::max);
        row.dot(u) >= best - 1e-10 * (1.0 + best.abs())
    })
}

/// Forward states at every node of levels `0..controls.len()`; level `k` starts
/// where level `k-1` ended.
pub fn replay_with_maps(maps: &[LevelMap], controls: &[Vec<Point>], y0: &Point) -> Result<Vec<Vec<Point>>> {
    if controls.len() > maps.len() {
        return Err(Error::domain("more control levels than level maps"));
    }
    let mut out = Vec::with_capacity(controls.len());
    let mut y = y0.clone();
    for (map, u) in maps.iter().zip(controls) {
        if u.len() != map.slots.len() {
            return Err(Error::domain(format!(
                "level {} expects {} controls, got {}",
                map.level,
                map.slots.len(),
                u.len()
            )));
        }
        let states = map.push(&y, u);
        y = states.last().unwrap().clone();
        out.push(states);
    }
    Ok(out)
}

/// Replays `controls` for the time-reversed system `sys` with `scheme` on `grid`.
pub fn replay_trajectory(
    sys: &LinearSystem,
    scheme: Scheme,
    grid: &TimeGrid,
    controls: &[Vec<Point>],
    y0: &Point,
) -> Result<Vec<Vec<Point>>> {
    let maps: Vec<LevelMap> = (0..controls.len())
        .map(|k| LevelMap::build(sys, scheme, grid, k))
        .collect::<Result<_>>()?;
    replay_with_maps(&maps, controls, y0)
}

/// Kalman-type rank condition along the edge directions of the box `[-1,1]^m`:
/// `[B w, A B w, ..., A^(n-1) B w]` has rank `n` for every unit axis `w`.
pub fn normality_check(sys: &LinearSystem) -> Result<bool> {
    let (Some(a), Some(b)) = (sys.a.as_constant(), sys.b.as_constant()) else {
        return Err(Error::Unsupported(
            "the normality condition is only checked for constant coefficients".into(),
        ));
    };
    let n = a.nrows();
    for mu in 0..b.ncols() {
        let mut k = DMatrix::<f64>::zeros(n, n);
        let mut col = b.column(mu).into_owned();
        for j in 0..n {
            k.set_column(j, &col);
            col = a * col;
        }
        let sv = k.singular_values();
        let max = sv.max();
        if max == 0.0 || sv.iter().filter(|&&s| s > 1e-10 * max).count() < n {
            return Ok(false);
        }
    }
    Ok(true)
}

/// A piecewise constant signal: `values[i]` on `[breaks[i], breaks[i+1])`, with
/// the last value kept at the final instant.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlSignal {
    pub breaks: Vec<f64>,
    pub values: Vec<Point>,
}

impl ControlSignal {
    pub fn new(breaks: Vec<f64>, values: Vec<Point>) -> Result<Self> {
        if values.is_empty() || breaks.len() != values.len() + 1 {
            return Err(Error::domain("a control signal needs n values and n + 1 breakpoints"));
        }
        if breaks.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::domain("breakpoints must increase strictly"));
        }
        Ok(ControlSignal { breaks, values })
    }

    pub fn constant(t0: f64, t1: f64, value: Point) -> Result<Self> {
        ControlSignal::new(vec![t0, t1], vec![value])
    }

    pub fn start(&self) -> f64 {
        self.breaks[0]
    }

    pub fn end(&self) -> f64 {
        *self.breaks.last().unwrap()
    }

    pub fn value_at(&self, t: f64) -> &Point {
        let i = self.breaks.partition_point(|&b| b <= t);
        &self.values[i.saturating_sub(1).min(self.values.len() - 1)]
    }

    /// Number of sign changes of each component, ignoring zero values.
    pub fn switch_counts(&self) -> Vec<usize> {
        let m = self.values[0].len();
        (0..m)
            .map(|c| {
                let mut last = 0.0f64;
                let mut count = 0;
                for v in &self.values {
                    let s = v[c].signum() * (v[c] != 0.0) as u8 as f64;
                    if s != 0.0 {
                        if last != 0.0 && s != last {
                            count += 1;
                        }
                        last = s;
                    }
                }
                count
            })
            .collect()
    }
}

/// `int_a^b |u1(t) - u2(t)|_1 dt`, exact for piecewise constant signals.
pub fn l1_control_distance(u1: &ControlSignal, u2: &ControlSignal, interval: (f64, f64)) -> Result<f64> {
    let (a, b) = interval;
    if !(a <= b) {
        return Err(Error::domain("interval must satisfy a <= b"));
    }
    for u in [u1, u2] {
        if a < u.start() || b > u.end() {
            return Err(Error::domain(format!(
                "signal defined on [{}, {}] does not cover [{a}, {b}]",
                u.start(),
                u.end()
            )));
        }
    }
    if u1.values[0].len() != u2.values[0].len() {
        return Err(Error::dim(u1.values[0].len(), u2.values[0].len()));
    }
    let mut cuts: Vec<f64> = u1
        .breaks
        .iter()
        .chain(&u2.breaks)
        .copied()
        .filter(|&t| t > a && t < b)
        .collect();
    cuts.push(a);
    cuts.push(b);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut total = 0.0;
    for w in cuts.windows(2) {
        let mid = 0.5 * (w[0] + w[1]);
        total += (u1.value_at(mid) - u2.value_at(mid)).lp_norm(1) * (w[1] - w[0]);
    }
    Ok(total)
}

/// A reconstructed discrete time-optimal trajectory of the time-reversed
/// system, from the target to a vertex of front `level`.
#[derive(Debug, Clone)]
pub struct AdjointPath {
    pub scheme: Scheme,
    pub level: usize,
    pub vertex: Point,
    /// Outward normal (edge-normal bisector) at the vertex; planar fronts only.
    pub zeta: Option<Point>,
    /// Grid direction generating the vertex in each level (index `k` for level
    /// `k -> k+1`).
    pub directions: Vec<usize>,
    /// Covectors at the nodes of each level.
    pub etas: Vec<Vec<Point>>,
    /// Controls of each level, one per input slot.
    pub controls: Vec<Vec<Point>>,
    /// States at the nodes of each level.
    pub states: Vec<Vec<Point>>,
    /// Effective input matrices of each level's slots.
    pub inputs: Vec<Vec<DMatrix<f64>>>,
    /// Node each slot's covector is taken at.
    pub anchors: Vec<Vec<usize>>,
    pub times: Vec<Vec<f64>>,
    pub defect: f64,
    /// Slots where `eta G` has a numerically vanishing component.
    pub singular_slots: usize,
}

impl AdjointPath {
    pub fn start(&self) -> &Point {
        &self.states[0][0]
    }

    pub fn endpoint(&self) -> &Point {
        self.states.last().unwrap().last().unwrap()
    }

    /// Covector, effective input and control of every slot, in time order.
    pub fn pmp_terms(&self) -> (Vec<Point>, Vec<DMatrix<f64>>, Vec<Point>) {
        let mut e = Vec::new();
        let mut b = Vec::new();
        let mut u = Vec::new();
        for k in 0..self.controls.len() {
            for (s, ctrl) in self.controls[k].iter().enumerate() {
                e.push(self.etas[k][self.anchors[k][s]].clone());
                b.push(self.inputs[k][s].clone());
                u.push(ctrl.clone());
            }
        }
        (e, b, u)
    }

    pub fn maximum_condition(&self, u_set: &Polytope) -> bool {
        let (e, b, u) = self.pmp_terms();
        maximum_condition_check(&e, &b, &u, u_set)
    }

    /// Per level, `<eta_N, y_N> - <eta_0, y_0> - sum_s <eta_s, G_s u_s>`,
    /// relative to the largest term.
    pub fn duality_residuals(&self) -> Vec<f64> {
        (0..self.controls.len())
            .map(|k| {
                let eta = &self.etas[k];
                let y = &self.states[k];
                let n = eta.len() - 1;
                let lhs = eta[n].dot(&y[n]);
                let mut rhs = eta[0].dot(&y[0]);
                let mut scale = lhs.abs().max(rhs.abs());
                for (s, u) in self.controls[k].iter().enumerate() {
                    let term = eta[self.anchors[k][s]].dot(&(&self.inputs[k][s] * u));
                    scale = scale.max(term.abs());
                    rhs += term;
                }
                (lhs - rhs).abs() / scale.max(f64::MIN_POSITIVE)
            })
            .collect()
    }

    /// The controls as a piecewise constant signal: slot `j` of level `k` acts on
    /// `[t_kj, t_k(j+1))`.
    pub fn control_signal(&self) -> ControlSignal {
        let mut breaks = Vec::new();
        let mut values = Vec::new();
        for k in 0..self.controls.len() {
            let t = &self.times[k];
            let n = t.len() - 1;
            for j in 0..n {
                breaks.push(t[j]);
                values.push(self.controls[k][j].clone());
            }
        }
        breaks.push(*self.times.last().unwrap().last().unwrap());
        ControlSignal { breaks, values }
    }

    pub fn switch_counts(&self) -> Vec<usize> {
        self.control_signal().switch_counts()
    }

    /// Replays the controls through `run`'s level maps, which must come from
    /// the same scheme.
    pub fn replay(&self, run: &ReachRun) -> Result<Vec<Vec<Point>>> {
        if run.scheme != self.scheme {
            return Err(Error::Config(format!(
                "controls were built with {} and cannot be replayed with {}",
                self.scheme, run.scheme
            )));
        }
        replay_with_maps(&run.maps, &self.controls, self.start())
    }
}

/// Reconstructs the discrete optimal trajectory to vertex `vertex` of front
/// `level`.
pub fn reconstruct(run: &ReachRun, level: usize, vertex: usize) -> Result<AdjointPath> {
    if !run.system.is_time_invariant() {
        return Err(Error::Unsupported(
            "control reconstruction requires a time-invariant system".into(),
        ));
    }
    if level == 0 || level >= run.fronts.len() {
        return Err(Error::domain(format!(
            "level must lie in 1..={}, got {level}",
            run.fronts.len() - 1
        )));
    }
    let front = &run.fronts[level];
    let nv = front.polytope.len();
    if vertex >= nv {
        return Err(Error::domain(format!(
            "vertex index {vertex} out of range (front {level} has {nv} vertices)"
        )));
    }
    let target = front.polytope.vertices()[vertex].clone();
    let zeta = if run.directions.dim() == 2 {
        front.polytope.vertex_normal(vertex).ok()
    } else {
        None
    };

    let mut dirs = vec![0; level];
    let mut etas = vec![Vec::new(); level];
    let mut controls = vec![Vec::new(); level];
    let mut inputs = vec![Vec::new(); level];
    let mut anchors = vec![Vec::new(); level];
    let mut times = vec![Vec::new(); level];
    let mut singular = 0;
    let mut cur = vertex;
    for lvl in (1..=level).rev() {
        let f = &run.fronts[lvl];
        let d = f.generator[cur];
        let map = &run.maps[lvl - 1];
        let cov = map.pullback(&run.directions.directions()[d]);
        let u = select_controls(map, &cov, &run.controls);
        for s in &map.slots {
            if !singular_components(&cov[s.anchor], &s.input).is_empty() {
                singular += 1;
            }
        }
        dirs[lvl - 1] = d;
        inputs[lvl - 1] = map.slots.iter().map(|s| s.input.clone()).collect();
        anchors[lvl - 1] = map.slots.iter().map(|s| s.anchor).collect();
        times[lvl - 1] = (0..=map.substeps()).map(|j| run.grid.fine_time(lvl - 1, j)).collect();
        etas[lvl - 1] = cov;
        controls[lvl - 1] = u;
        cur = f.predecessor[d];
    }
    let y0 = run.fronts[0].polytope.vertices()[cur].clone();
    let states = replay_with_maps(&run.maps, &controls, &y0)?;
    let end = states.last().unwrap().last().unwrap();
    let defect = (end - &target).norm();
    Ok(AdjointPath {
        scheme: run.scheme,
        level,
        vertex: target,
        zeta,
        directions: dirs,
        etas,
        controls,
        states,
        inputs,
        anchors,
        times,
        defect,
        singular_slots: singular,
    })
}
