//! Propagation of supporting-point fronts of the fully discrete reachable sets.
//!
//! For every grid direction `l` the supporting point of
//! `Phi R + sum_s Phi(t_end, t_s) G_s U` is assembled term by term from the
//! supporting points of the summands, so no Minkowski vertex cloud is ever
//! materialized. After each coarse level the supporting points in the fixed
//! grid directions are re-extracted and hulled.

use std::collections::HashMap;

use nalgebra::DVector;

use crate::dynamics::{LevelMap, LinearSystem, Scheme, TimeGrid};
use crate::error::{Error, Result};
use crate::geometry::{
    argmax_dot, hausdorff_distance, polytope_from_directions, strict_hull_2d, support_sweep,
    DirectionGrid, Point, Polytope,
};
use crate::par::{map_indices, Execution};

/// Supporting points of the discrete reachable set at one coarse time.
#[derive(Debug, Clone)]
pub struct Front {
    pub level: usize,
    pub time: f64,
    /// Re-extracted supporting point for each grid direction.
    pub points: Vec<Point>,
    /// Supporting point of the Minkowski recursion for each grid direction
    /// (before re-extraction). At level 0 this equals `points`.
    pub candidates: Vec<Point>,
    /// For each direction, the index of the vertex of the previous front the
    /// candidate was propagated from. Empty at level 0.
    pub predecessor: Vec<usize>,
    /// For each hull vertex, a direction whose candidate is exactly that vertex.
    pub generator: Vec<usize>,
    /// `<l_k, points[k]>` for each grid direction.
    pub support_values: Vec<f64>,
    pub polytope: Polytope,
}

impl Front {
    fn assemble(
        level: usize,
        time: f64,
        dirs: &DirectionGrid,
        candidates: Vec<Point>,
        predecessor: Vec<usize>,
        exec: Execution,
    ) -> Result<Front> {
        let dim = dirs.dim();
        let points = reextract(&candidates, dirs, exec);
        let polytope = Polytope::from_points(dim, &points)?;
        let generator = generators(&polytope, dirs, &candidates);
        let support_values = points
            .iter()
            .zip(dirs.directions())
            .map(|(p, l)| l.dot(p))
            .collect();
        Ok(Front {
            level,
            time,
            points,
            candidates,
            predecessor,
            generator,
            support_values,
            polytope,
        })
    }

    pub fn support(&self, l: &Point) -> f64 {
        self.polytope.support_unchecked(l)
    }
}

/// Supporting points of the candidate cloud in the grid directions. In the
/// plane only strict hull vertices can be lexicographic maximizers, so the
/// search runs over those with an angular sweep.
fn reextract(candidates: &[Point], dirs: &DirectionGrid, exec: Execution) -> Vec<Point> {
    if dirs.dim() == 2 {
        let ring: Vec<Point> = strict_hull_2d(candidates)
            .into_iter()
            .map(|i| candidates[i].clone())
            .collect();
        support_sweep(&ring, dirs.directions())
            .into_iter()
            .map(|i| ring[i].clone())
            .collect()
    } else {
        map_indices(exec, dirs.len(), |k| {
            candidates[argmax_dot(candidates, &dirs.directions()[k])].clone()
        })
    }
}

/// For each hull vertex pick the generating direction closest to the vertex
/// normal (or the first one when no normal is defined).
fn generators(p: &Polytope, dirs: &DirectionGrid, candidates: &[Point]) -> Vec<usize> {
    let key = |v: &Point| v.iter().map(|x| x.to_bits()).collect::<Vec<u64>>();
    let mut by_point: HashMap<Vec<u64>, Vec<usize>> = HashMap::new();
    for (d, c) in candidates.iter().enumerate() {
        by_point.entry(key(c)).or_default().push(d);
    }
    (0..p.len())
        .map(|vi| {
            let v = &p.vertices()[vi];
            let normal = p.vertex_normal(vi).ok();
            let mut best: Option<(usize, f64)> = None;
            // Every hull vertex is one of the candidates, bit for bit.
            for &d in by_point.get(&key(v)).map_or(&[][..], |x| x.as_slice()) {
                let score = normal
                    .as_ref()
                    .map_or(0.0, |n| n.dot(&dirs.directions()[d]));
                if best.is_none_or(|(_, s)| score > s) {
                    best = Some((d, score));
                }
            }
            best.map(|(d, _)| d).unwrap_or(0)
        })
        .collect()
}

/// `U_Delta`: hull of the supporting points of `U` in the control directions.
pub fn discretize_control_set(u: &Polytope, grid: &DirectionGrid) -> Result<Polytope> {
    polytope_from_directions(u, grid)
}

/// Everything needed to advance a front by one coarse level.
#[derive(Debug, Clone, Copy)]
pub struct StepContext<'a> {
    pub directions: &'a DirectionGrid,
    pub controls: &'a Polytope,
    pub exec: Execution,
}

/// Controls selected by covector `cov` (one per slot): the supporting points of
/// `U_Delta` in directions `G_s^T cov_anchor`.
pub(crate) fn select_controls(map: &LevelMap, covectors: &[Point], controls: &Polytope) -> Vec<Point> {
    map.slots
        .iter()
        .map(|s| {
            let dir = s.input.tr_mul(&covectors[s.anchor]);
            controls.vertices()[argmax_dot(controls.vertices(), &dir)].clone()
        })
        .collect()
}

/// Advances `front` through the level described by `map`.
pub fn propagate_step(front: &Front, map: &LevelMap, grid: &TimeGrid, ctx: StepContext<'_>) -> Result<Front> {
    let prev = front.polytope.vertices();
    if let Some(v) = prev.first() {
        if v.len() != ctx.directions.dim() {
            return Err(Error::dim(ctx.directions.dim(), v.len()));
        }
    }
    // covectors at the start of the level select the predecessor vertex
    let starts: Vec<Point> = map_indices(ctx.exec, ctx.directions.len(), |k| {
        map.pullback(&ctx.directions.directions()[k]).swap_remove(0)
    });
    let pred = if ctx.directions.dim() == 2 {
        support_sweep(prev, &starts)
    } else {
        starts.iter().map(|c| argmax_dot(prev, c)).collect()
    };
    let candidates: Vec<Point> = map_indices(ctx.exec, ctx.directions.len(), |k| {
        let cov = map.pullback(&ctx.directions.directions()[k]);
        let u = select_controls(map, &cov, ctx.controls);
        map.push_end(&prev[pred[k]], &u)
    });
    let predecessor = pred;
    if candidates.iter().any(|c| c.iter().any(|x| !x.is_finite())) {
        return Err(Error::Propagation {
            level: map.level,
            substep: map.substeps(),
            reason: "non-finite supporting point".into(),
        });
    }
    let level = front.level + 1;
    Front::assemble(level, grid.level_time(level), ctx.directions, candidates, predecessor, ctx.exec)
}

/// Parameters of a reachable-set run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReachConfig {
    pub scheme: Scheme,
    pub levels: usize,
    pub substeps: usize,
    pub directions: usize,
    pub control_directions: usize,
    pub exec: Execution,
}

impl ReachConfig {
    pub fn new(scheme: Scheme, levels: usize, substeps: usize, directions: usize) -> Self {
        ReachConfig {
            scheme,
            levels,
            substeps,
            directions,
            control_directions: 64,
            exec: Execution::default(),
        }
    }

    pub fn with_exec(mut self, exec: Execution) -> Self {
        self.exec = exec;
        self
    }

    pub fn with_control_directions(mut self, n: usize) -> Self {
        self.control_directions = n;
        self
    }
}

/// Per-level expansion diagnostics: extreme values over the grid directions of
/// `delta*(l, R_{i+1}) - delta*(l, R_i)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Increment {
    pub level: usize,
    pub min: f64,
    pub max: f64,
}

/// Output of a run: fronts `0..=K` of the time-reversed system.
#[derive(Debug, Clone)]
pub struct ReachRun {
    pub system: LinearSystem,
    pub scheme: Scheme,
    pub grid: TimeGrid,
    pub directions: DirectionGrid,
    pub control_grid: DirectionGrid,
    pub controls: Polytope,
    pub maps: Vec<LevelMap>,
    pub fronts: Vec<Front>,
    pub increments: Vec<Increment>,
}

impl ReachRun {
    pub fn final_front(&self) -> &Front {
        self.fronts.last().expect("a run has at least one front")
    }

    /// Whether every support function strictly increases from level to level.
    pub fn strictly_expanding(&self) -> bool {
        self.increments.iter().all(|d| d.min > 0.0)
    }

    pub fn min_increment(&self) -> f64 {
        self.increments.iter().map(|d| d.min).fold(f64::INFINITY, f64::min)
    }
}

/// Direction grid for a state or control space of dimension `dim`.
pub fn default_grid(dim: usize, count: usize) -> Result<DirectionGrid> {
    DirectionGrid::for_dim(dim, count)
}

/// Runs the fully discrete scheme on the time reversal of `sys`.
pub fn run(sys: &LinearSystem, cfg: &ReachConfig) -> Result<ReachRun> {
    let dirs = default_grid(sys.state_dim(), cfg.directions)?;
    let cgrid = default_grid(sys.input_dim(), cfg.control_directions)?;
    run_with_grids(sys, cfg, dirs, cgrid)
}

/// As [`run`], with explicit direction grids for the state and control spaces.
pub fn run_with_grids(
    sys: &LinearSystem,
    cfg: &ReachConfig,
    directions: DirectionGrid,
    control_grid: DirectionGrid,
) -> Result<ReachRun> {
    if directions.dim() != sys.state_dim() {
        return Err(Error::dim(sys.state_dim(), directions.dim()));
    }
    if control_grid.dim() != sys.input_dim() {
        return Err(Error::dim(sys.input_dim(), control_grid.dim()));
    }
    let grid = TimeGrid::new(sys.t0, sys.tf, cfg.levels, cfg.substeps)?;
    let reversed = sys.time_reverse();
    let controls = discretize_control_set(&reversed.control_set, &control_grid)?;

    let target = &reversed.target;
    let start: Vec<Point> = directions
        .directions()
        .iter()
        .map(|l| target.vertices()[argmax_dot(target.vertices(), l)].clone())
        .collect();
    let front0 = Front::assemble(0, grid.level_time(0), &directions, start, Vec::new(), cfg.exec)?;

    let mut maps = Vec::with_capacity(cfg.levels);
    let mut fronts = Vec::with_capacity(cfg.levels + 1);
    let mut increments = Vec::with_capacity(cfg.levels);
    fronts.push(front0);
    for i in 0..cfg.levels {
        let map = LevelMap::build(&reversed, cfg.scheme, &grid, i)?;
        let ctx = StepContext {
            directions: &directions,
            controls: &controls,
            exec: cfg.exec,
        };
        let next = propagate_step(&fronts[i], &map, &grid, ctx)?;
        increments.push(increment(&fronts[i], &next));
        fronts.push(next);
        maps.push(map);
    }
    Ok(ReachRun {
        system: reversed,
        scheme: cfg.scheme,
        grid,
        directions,
        control_grid,
        controls,
        maps,
        fronts,
        increments,
    })
}

fn increment(a: &Front, b: &Front) -> Increment {
    let (mut min, mut max) = (f64::INFINITY, f64::NEG_INFINITY);
    for (sa, sb) in a.support_values.iter().zip(&b.support_values) {
        let d = sb - sa;
        min = min.min(d);
        max = max.max(d);
    }
    Increment {
        level: a.level,
        min,
        max,
    }
}

/// Empirical order of convergence between two consecutive rows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Eoc {
    /// Both errors vanish to rounding: the scheme is exact on this problem.
    Exact,
    Value(f64),
    /// First row, or the error ratio is undefined.
    NotAvailable,
}

impl Eoc {
    /// Order estimate `log(e0/e1) / log(h0/h1)`. Errors at or below `floor`
    /// count as zero.
    pub fn between(h0: f64, e0: f64, h1: f64, e1: f64, floor: f64) -> Eoc {
        if e0 <= floor && e1 <= floor {
            Eoc::Exact
        } else if e0 <= floor || e1 <= floor {
            Eoc::NotAvailable
        } else {
            Eoc::Value((e0 / e1).ln() / (h0 / h1).ln())
        }
    }

    pub fn value(self) -> Option<f64> {
        match self {
            Eoc::Value(v) => Some(v),
            _ => None,
        }
    }
}

impl std::fmt::Display for Eoc {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Eoc::Exact => f.write_str("exact"),
            Eoc::Value(v) => write!(f, "{v:.4}"),
            Eoc::NotAvailable => f.write_str("-"),
        }
    }
}

/// One row of a self-convergence study.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StudyRow {
    pub substeps: usize,
    pub h: f64,
    pub error: f64,
    pub eoc: Eoc,
}

/// Hausdorff distance of the final front to the one computed with the finest
/// substep count of `substeps` (the last entry), for every other entry.
pub fn self_convergence_study(
    sys: &LinearSystem,
    scheme: Scheme,
    levels: usize,
    substeps: &[usize],
    directions: usize,
    exec: Execution,
) -> Result<Vec<StudyRow>> {
    if substeps.len() < 2 {
        return Err(Error::domain("a study needs at least two substep counts"));
    }
    if substeps.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::domain("substep counts must be strictly increasing"));
    }
    let runs: Vec<ReachRun> = substeps
        .iter()
        .map(|&n| run(sys, &ReachConfig::new(scheme, levels, n, directions).with_exec(exec)))
        .collect::<Result<_>>()?;
    let reference = &runs.last().unwrap().final_front().polytope;
    let floor = 1e-12 * reference.diameter().max(1.0);
    let mut rows: Vec<StudyRow> = Vec::with_capacity(runs.len() - 1);
    for r in &runs[..runs.len() - 1] {
        let e = hausdorff_distance(&r.final_front().polytope, reference)?.value();
        let h = r.grid.h();
        let eoc = match rows.last() {
            Some(p) => Eoc::between(p.h, p.error, h, e, floor),
            None => Eoc::NotAvailable,
        };
        rows.push(StudyRow {
            substeps: r.grid.substeps,
            h,
            error: e,
            eoc,
        });
    }
    Ok(rows)
}

/// Supporting point of `front` for an arbitrary covector, by the same tie rule.
pub fn supporting_vertex(front: &Front, l: &DVector<f64>) -> usize {
    argmax_dot(front.polytope.vertices(), l)
}
