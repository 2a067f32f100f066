//! Run configuration and the `reach`, `mintime`, `trajectory` and `study`
//! commands behind the `linreach` binary.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::adjoint::{normality_check, reconstruct};
use crate::catalog::{self, Oracle};
use crate::dynamics::{LinearSystem, Scheme};
use crate::error::{Error, Result};
use crate::geometry::hausdorff_distance;
use crate::io;
use crate::mintime::{
    error_bound_general, error_bound_two_dt, fit_hoelder, halton, sup_error_vs_oracle, triangulate,
    ErrorBudget, Modulus, TimeSurface,
};
use crate::par::Execution;
use crate::reach::{run, Eoc, ReachConfig, ReachRun};

pub const DEFAULT_BUDGET: f64 = 1e8;

/// Process exit code for an error: 2 usage/configuration, 3 budget,
/// 4 numerical or structural failure.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::Io { .. } | Error::Unsupported(_) | Error::Domain(_) => 2,
        Error::Budget { .. } => 3,
        Error::Propagation { .. } | Error::Structural { .. } | Error::Dimension { .. } => 4,
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrajectoryConfig {
    pub level: Option<usize>,
    pub direction: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyConfig {
    /// Substep counts of the ladder.
    pub substeps: Vec<usize>,
    /// Substep count of the reference run (defaults to 4 times the finest).
    pub reference: Option<usize>,
    /// Coarse level counts per ladder entry (defaults to the run's).
    pub levels: Option<Vec<usize>>,
    /// Direction counts per ladder entry (defaults to the run's).
    pub directions: Option<Vec<usize>>,
}

/// The JSON configuration file.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    /// System description file, relative to the configuration file.
    pub system: Option<PathBuf>,
    /// Name of a built-in system, as an alternative to `system`.
    pub builtin: Option<String>,
    /// Final time for built-in systems.
    pub tf: Option<f64>,
    pub scheme: Option<String>,
    pub levels: Option<usize>,
    pub substeps: Option<usize>,
    pub directions: Option<usize>,
    pub control_directions: Option<usize>,
    #[serde(default)]
    pub allow_coarse_directions: bool,
    pub oracle: Option<String>,
    pub budget: Option<f64>,
    pub samples: Option<usize>,
    pub hoelder_k: Option<u32>,
    pub eps: Option<f64>,
    /// Output directory, relative to the configuration file.
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub sequential: bool,
    pub trajectory: Option<TrajectoryConfig>,
    pub study: Option<StudyConfig>,
}

/// Command line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub directions: Option<usize>,
    pub levels: Option<usize>,
    pub substeps: Option<usize>,
    pub scheme: Option<String>,
    pub allow_coarse_directions: bool,
    pub sequential: bool,
    pub level: Option<usize>,
    pub direction: Option<usize>,
}

/// A fully resolved configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub system: LinearSystem,
    pub system_label: String,
    pub scheme: Scheme,
    pub levels: usize,
    pub substeps: usize,
    pub directions: usize,
    pub directions_explicit: bool,
    pub allow_coarse_directions: bool,
    pub control_directions: usize,
    pub oracle: Oracle,
    pub budget: u128,
    pub samples: usize,
    pub hoelder_k: u32,
    pub eps: Option<f64>,
    pub out: PathBuf,
    pub exec: Execution,
    pub level: Option<usize>,
    pub direction: Option<usize>,
    pub study: Option<StudyConfig>,
}

/// Smallest direction count keeping the sphere discretization within the
/// scheme's error: `ceil(pi / h^p)`.
pub fn coupled_direction_count(h: f64, order: u32) -> usize {
    (std::f64::consts::PI / h.powi(order as i32)).ceil().max(3.0) as usize
}

impl RunConfig {
    pub fn load(path: &Path, ov: &Overrides) -> Result<RunConfig> {
        let text = io::read_to_string(path)?;
        let file: ConfigFile = serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        RunConfig::resolve(file, base, ov)
    }

    pub fn resolve(file: ConfigFile, base: &Path, ov: &Overrides) -> Result<RunConfig> {
        let (system, label) = match (&file.system, &file.builtin) {
            (Some(_), Some(_)) => {
                return Err(Error::Config("give either 'system' or 'builtin', not both".into()))
            }
            (Some(p), None) => {
                let full = base.join(p);
                if !full.exists() {
                    return Err(Error::Config(format!(
                        "system file {} does not exist",
                        full.display()
                    )));
                }
                (io::load_system(&full)?, full.display().to_string())
            }
            (None, Some(name)) => (catalog::builtin(name, file.tf.unwrap_or(1.0))?, name.clone()),
            (None, None) => {
                return Err(Error::Config("the configuration needs 'system' or 'builtin'".into()))
            }
        };
        let scheme = Scheme::from_str(ov.scheme.as_deref().or(file.scheme.as_deref()).unwrap_or("heun"))?;
        let levels = ov.levels.or(file.levels).unwrap_or(10);
        let substeps = ov.substeps.or(file.substeps).unwrap_or(10);
        if levels == 0 || substeps == 0 {
            return Err(Error::Config("levels and substeps must be positive".into()));
        }
        let oracle = Oracle::from_str(file.oracle.as_deref().unwrap_or("none"))?;
        let budget = file.budget.unwrap_or(DEFAULT_BUDGET);
        if !(budget >= 1.0) {
            return Err(Error::Config("budget must be at least 1".into()));
        }
        let explicit = ov.directions.or(file.directions);
        let mut cfg = RunConfig {
            system,
            system_label: label,
            scheme,
            levels,
            substeps,
            directions: 0,
            directions_explicit: explicit.is_some(),
            allow_coarse_directions: ov.allow_coarse_directions || file.allow_coarse_directions,
            control_directions: file.control_directions.unwrap_or(64),
            oracle,
            budget: budget as u128,
            samples: file.samples.unwrap_or(500),
            hoelder_k: file.hoelder_k.unwrap_or(2),
            eps: file.eps,
            out: ov
                .out
                .clone()
                .unwrap_or_else(|| base.join(file.out.as_deref().unwrap_or(Path::new("out")))),
            exec: if ov.sequential || file.sequential {
                Execution::Sequential
            } else {
                Execution::Parallel
            },
            level: ov.level.or(file.trajectory.as_ref().and_then(|t| t.level)),
            direction: ov.direction.or(file.trajectory.as_ref().and_then(|t| t.direction)),
            study: file.study,
        };
        cfg.directions = cfg.checked_directions(explicit, levels, substeps)?;
        if cfg.hoelder_k == 0 {
            return Err(Error::Config("hoelder_k must be at least 1".into()));
        }
        Ok(cfg)
    }

    fn h(&self, levels: usize, substeps: usize) -> f64 {
        (self.system.tf - self.system.t0) / (levels * substeps) as f64
    }

    /// Direction count for a grid, enforcing the coupling to `h^p` unless
    /// coarse grids are allowed.
    fn checked_directions(&self, requested: Option<usize>, levels: usize, substeps: usize) -> Result<usize> {
        if self.system.state_dim() == 1 {
            return Ok(2);
        }
        let min = coupled_direction_count(self.h(levels, substeps), self.scheme.order());
        match requested {
            None => Ok(min),
            Some(d) if d < 3 => Err(Error::Config(format!("need at least 3 directions, got {d}"))),
            Some(d) if d < min && !self.allow_coarse_directions => Err(Error::Config(format!(
                "{d} directions are too coarse for h = {:.4e} (order {}): at least {min} keep the \
                 direction error at the scheme's order; raise --dirs or pass --allow-coarse-directions",
                self.h(levels, substeps),
                self.scheme.order()
            ))),
            Some(d) => Ok(d),
        }
    }

    pub fn reach_config(&self) -> ReachConfig {
        ReachConfig::new(self.scheme, self.levels, self.substeps, self.directions)
            .with_control_directions(self.control_directions)
            .with_exec(self.exec)
    }

    fn check_budget(&self, needed: u128) -> Result<()> {
        if needed > self.budget {
            Err(Error::Budget {
                needed,
                cap: self.budget,
            })
        } else {
            Ok(())
        }
    }
}

fn direction_steps(levels: usize, substeps: usize, directions: usize) -> u128 {
    levels as u128 * substeps as u128 * directions as u128
}

fn created_unix() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map_or(0, |d| d.as_secs())
}

#[derive(Debug, Clone, Serialize)]
pub struct IncrementJson {
    pub level: usize,
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub command: String,
    pub system: String,
    pub scheme: String,
    pub levels: usize,
    pub substeps: usize,
    pub t0: f64,
    pub tf: f64,
    pub h: f64,
    pub dt: f64,
    pub directions: usize,
    pub density_eps: f64,
    pub control_directions: usize,
    pub control_density_eps: f64,
    pub strictly_expanding: bool,
    pub increments: Vec<IncrementJson>,
    pub files: Vec<String>,
    pub created_unix: u64,
}

fn manifest(command: &str, cfg: &RunConfig, r: &ReachRun, files: Vec<String>) -> Manifest {
    Manifest {
        command: command.into(),
        system: cfg.system_label.clone(),
        scheme: r.scheme.name().into(),
        levels: r.grid.levels,
        substeps: r.grid.substeps,
        t0: r.grid.t0,
        tf: r.grid.tf,
        h: r.grid.h(),
        dt: r.grid.dt(),
        directions: r.directions.len(),
        density_eps: r.directions.density_eps(),
        control_directions: r.control_grid.len(),
        control_density_eps: r.control_grid.density_eps(),
        strictly_expanding: r.strictly_expanding(),
        increments: r
            .increments
            .iter()
            .map(|d| IncrementJson {
                level: d.level,
                min: d.min,
                max: d.max,
            })
            .collect(),
        files,
        created_unix: created_unix(),
    }
}

fn file_name(p: &Path) -> String {
    p.file_name().map_or_else(String::new, |s| s.to_string_lossy().into_owned())
}

/// What a command did, for the console.
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub lines: Vec<String>,
    pub warnings: Vec<String>,
}

pub fn cmd_reach(cfg: &RunConfig) -> Result<Outcome> {
    cfg.check_budget(direction_steps(cfg.levels, cfg.substeps, cfg.directions))?;
    let r = run(&cfg.system, &cfg.reach_config())?;
    let files = io::write_fronts(&cfg.out, &r)?;
    let names = files.iter().map(|p| file_name(p)).collect();
    io::write_json(&cfg.out.join("manifest.json"), &manifest("reach", cfg, &r, names))?;
    let mut out = Outcome::default();
    out.lines.push(format!(
        "wrote {} fronts to {} (h = {}, dt = {}, {} directions, eps = {:.3e})",
        files.len(),
        cfg.out.display(),
        r.grid.h(),
        r.grid.dt(),
        r.directions.len(),
        r.directions.density_eps()
    ));
    if !r.strictly_expanding() {
        out.warnings.push(format!(
            "fronts are not strictly expanding (smallest support increment {:.3e})",
            r.min_increment()
        ));
    }
    Ok(out)
}

/// The error report of `mintime`.
#[derive(Debug, Clone, Serialize)]
pub struct ErrorReport {
    pub bound_general: f64,
    pub bound_two_dt: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sup_error_empirical: Option<f64>,
    pub delta_gamma: f64,
    pub h: f64,
    pub p: u32,
    pub dt: f64,
    pub modulus: String,
    pub hoelder_constant: f64,
    pub hoelder_k: u32,
    /// Estimate of `C h^p` from a run with halved step size.
    pub set_error: f64,
    pub two_dt_certified: bool,
    pub two_dt_eps: f64,
    pub min_support_increment: f64,
    pub samples_inside: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

/// Samples of the surface's domain: Halton points in the bounding box of the
/// last front that lie inside it.
pub fn domain_samples(surface: &TimeSurface, count: usize) -> Vec<[f64; 2]> {
    let v = surface.fronts.last().unwrap().vertices();
    let lo = [0, 1].map(|d| v.iter().map(|p| p[d]).fold(f64::INFINITY, f64::min));
    let hi = [0, 1].map(|d| v.iter().map(|p| p[d]).fold(f64::NEG_INFINITY, f64::max));
    let mut out = Vec::with_capacity(count);
    let mut batch = count.max(16);
    let mut seen = 0;
    while out.len() < count && seen < 64 * count.max(16) {
        let pts = halton(seen + batch, lo, hi);
        for x in &pts[seen..] {
            if out.len() < count && surface.evaluate(*x).value().is_some() {
                out.push(*x);
            }
        }
        seen += batch;
        batch *= 2;
    }
    out
}

/// `C h^p` estimated by Richardson from the final fronts at `h` and `h/2`.
pub fn estimate_set_error(sys: &LinearSystem, cfg: &ReachConfig, coarse: &ReachRun) -> Result<f64> {
    let mut fine_cfg = *cfg;
    fine_cfg.substeps *= 2;
    let fine = run(sys, &fine_cfg)?;
    let d = hausdorff_distance(&coarse.final_front().polytope, &fine.final_front().polytope)?.value();
    let q = 2f64.powi(cfg.scheme.order() as i32);
    Ok(d * q / (q - 1.0))
}

pub fn cmd_mintime(cfg: &RunConfig) -> Result<Outcome> {
    cfg.check_budget(3 * direction_steps(cfg.levels, cfg.substeps, cfg.directions))?;
    let rc = cfg.reach_config();
    let r = run(&cfg.system, &rc)?;
    let surface = triangulate(&r)?;
    let samples = domain_samples(&surface, cfg.samples);
    let values: Vec<f64> = samples
        .iter()
        .map(|x| surface.evaluate(*x).value().unwrap_or(f64::NAN))
        .collect();
    let (fit_values, modulus_label) = match cfg.oracle {
        Oracle::None => (values.clone(), "hoelder (fitted to the discrete surface)"),
        o => (
            samples.iter().map(|x| o.eval(*x).unwrap()).collect(),
            "hoelder (fitted to oracle samples)",
        ),
    };
    let hc = fit_hoelder(&samples, &fit_values, cfg.hoelder_k);
    let set_error = estimate_set_error(&cfg.system, &rc, &r)?;
    let p = cfg.scheme.order();
    let h = r.grid.h();
    let budget = ErrorBudget::new(
        Modulus::Hoelder {
            constant: hc,
            k: cfg.hoelder_k,
        },
        set_error / h.powi(p as i32),
        h,
        p,
        surface.max_diameter,
        r.grid.dt(),
    )?;
    let two = error_bound_two_dt(&r, cfg.eps);
    let sup = match cfg.oracle {
        Oracle::None => None,
        o => Some(sup_error_vs_oracle(&surface, |x| o.eval(x).unwrap(), &samples, cfg.exec)),
    };
    let report = ErrorReport {
        bound_general: error_bound_general(&budget),
        bound_two_dt: two.bound,
        sup_error_empirical: sup.map(|s| s.max),
        delta_gamma: surface.max_diameter,
        h,
        p,
        dt: r.grid.dt(),
        modulus: modulus_label.into(),
        hoelder_constant: hc,
        hoelder_k: cfg.hoelder_k,
        set_error,
        two_dt_certified: two.certified,
        two_dt_eps: two.eps,
        min_support_increment: two.min_gap,
        samples_inside: samples.len(),
        warning: two.warning.clone(),
    };
    io::write_mesh(&cfg.out.join("mesh.off"), &surface)?;
    let rows: Vec<([f64; 2], f64)> = samples.iter().copied().zip(values).collect();
    io::write_samples(&cfg.out.join("samples.csv"), &rows)?;
    io::write_json(&cfg.out.join("error_report.json"), &report)?;
    let files = vec!["mesh.off".into(), "samples.csv".into(), "error_report.json".into()];
    io::write_json(&cfg.out.join("manifest.json"), &manifest("mintime", cfg, &r, files))?;

    let mut out = Outcome::default();
    out.lines.push(format!(
        "mesh: {} vertices, {} triangles, max diameter {:.4e}",
        surface.vertices.len(),
        surface.triangles.len(),
        surface.max_diameter
    ));
    out.lines.push(format!(
        "bounds: general {:.4e}, 2 dt {:.4e}",
        report.bound_general, report.bound_two_dt
    ));
    if let Some(s) = report.sup_error_empirical {
        out.lines.push(format!("sup error vs {}: {:.4e}", cfg.oracle.name(), s));
    }
    out.warnings.extend(two.warning);
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct TrajectoryReport {
    pub level: usize,
    pub direction: usize,
    pub vertex: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub zeta: Option<Vec<f64>>,
    pub start: Vec<f64>,
    pub endpoint: Vec<f64>,
    pub endpoint_defect: f64,
    pub front_diameter: f64,
    pub pmp_check: bool,
    pub switch_counts: Vec<usize>,
    pub singular_slots: usize,
    pub max_duality_residual: f64,
    pub normal: bool,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

pub fn cmd_trajectory(cfg: &RunConfig) -> Result<Outcome> {
    if !cfg.system.is_time_invariant() {
        return Err(Error::Unsupported(
            "trajectory reconstruction needs constant A and B".into(),
        ));
    }
    let level = cfg.level.unwrap_or(cfg.levels);
    if level == 0 || level > cfg.levels {
        return Err(Error::Config(format!("level must lie in 1..={}, got {level}", cfg.levels)));
    }
    let nd = if cfg.system.state_dim() == 1 { 2 } else { cfg.directions };
    let direction = cfg.direction.unwrap_or(0);
    if direction >= nd {
        return Err(Error::Config(format!(
            "direction index {direction} out of range (0..{nd})"
        )));
    }
    cfg.check_budget(direction_steps(level, cfg.substeps, cfg.directions))?;
    let mut rc = cfg.reach_config();
    rc.levels = cfg.levels;
    let r = run(&cfg.system, &rc)?;
    let front = &r.fronts[level];
    let vertex = front
        .polytope
        .find_vertex(&front.points[direction], 0.0)
        .or_else(|| {
            let tol = 1e-9 * front.polytope.diameter().max(1.0);
            front.polytope.find_vertex(&front.points[direction], tol)
        })
        .ok_or_else(|| Error::Structural {
            band: level,
            reason: "supporting point is not a hull vertex".into(),
        })?;
    let path = reconstruct(&r, level, vertex)?;
    let normal = normality_check(&cfg.system)?;
    let mut warnings = Vec::new();
    if !normal {
        warnings.push(
            "the normality (rank) condition fails; L1 convergence of the controls is not guaranteed"
                .to_string(),
        );
    }
    if path.singular_slots > 0 {
        warnings.push(format!(
            "{} control slots have a vanishing switching function component",
            path.singular_slots
        ));
    }
    let report = TrajectoryReport {
        level,
        direction,
        vertex: path.vertex.iter().copied().collect(),
        zeta: path.zeta.as_ref().map(|z| z.iter().copied().collect()),
        start: path.start().iter().copied().collect(),
        endpoint: path.endpoint().iter().copied().collect(),
        endpoint_defect: path.defect,
        front_diameter: front.polytope.diameter(),
        pmp_check: path.maximum_condition(&r.controls),
        switch_counts: path.switch_counts(),
        singular_slots: path.singular_slots,
        max_duality_residual: path.duality_residuals().into_iter().fold(0.0, f64::max),
        normal,
        warnings: warnings.clone(),
    };
    io::write_trajectory(&cfg.out.join("trajectory.csv"), &path)?;
    io::write_json(&cfg.out.join("trajectory_report.json"), &report)?;
    let files = vec!["trajectory.csv".into(), "trajectory_report.json".into()];
    io::write_json(&cfg.out.join("manifest.json"), &manifest("trajectory", cfg, &r, files))?;
    let mut out = Outcome {
        lines: vec![format!(
            "vertex {:?} at level {level}: defect {:.3e}, maximum condition {}, switches {:?}",
            report.vertex, report.endpoint_defect, report.pmp_check, report.switch_counts
        )],
        warnings,
    };
    if !report.pmp_check {
        out.warnings.push("the maximum condition fails".into());
    }
    Ok(out)
}

/// One row of a refinement study.
#[derive(Debug, Clone, Serialize)]
pub struct StudyRecord {
    pub levels: usize,
    pub substeps: usize,
    pub h: f64,
    pub directions: usize,
    pub hausdorff: f64,
    pub eoc: String,
    pub sup_error: Option<f64>,
    pub eoc_t: Option<f64>,
}

pub fn study_rows(cfg: &RunConfig) -> Result<Vec<StudyRecord>> {
    let study = cfg
        .study
        .as_ref()
        .ok_or_else(|| Error::Config("the configuration has no 'study' section".into()))?;
    let n = study.substeps.len();
    if n < 3 {
        return Err(Error::Config("a study ladder needs at least 3 entries".into()));
    }
    let levels = study.levels.clone().unwrap_or_else(|| vec![cfg.levels; n]);
    if levels.len() != n {
        return Err(Error::Config("study.levels must match study.substeps in length".into()));
    }
    if let Some(d) = &study.directions {
        if d.len() != n {
            return Err(Error::Config("study.directions must match study.substeps in length".into()));
        }
    }
    let reference = study.reference.unwrap_or(4 * study.substeps[n - 1]);
    let ref_levels = levels[n - 1];
    let explicit = cfg.directions_explicit.then_some(cfg.directions);
    let mut ladder = Vec::with_capacity(n);
    for j in 0..n {
        let req = study.directions.as_ref().map(|d| d[j]).or(explicit);
        ladder.push((levels[j], study.substeps[j], cfg.checked_directions(req, levels[j], study.substeps[j])?));
    }
    let ref_dirs = ladder.iter().map(|r| r.2).max().unwrap();
    let needed: u128 = ladder
        .iter()
        .map(|&(k, s, d)| direction_steps(k, s, d))
        .sum::<u128>()
        + direction_steps(ref_levels, reference, ref_dirs);
    cfg.check_budget(needed)?;

    let reach_cfg = |k: usize, s: usize, d: usize| {
        ReachConfig::new(cfg.scheme, k, s, d)
            .with_control_directions(cfg.control_directions)
            .with_exec(cfg.exec)
    };
    let refrun = run(&cfg.system, &reach_cfg(ref_levels, reference, ref_dirs))?;
    let refpoly = &refrun.final_front().polytope;
    let floor = 1e-12 * refpoly.diameter().max(1.0);
    let mut rows: Vec<StudyRecord> = Vec::with_capacity(n);
    let mut prev: Option<(f64, f64)> = None;
    let mut prev_sup: Option<(f64, f64)> = None;
    for &(k, s, d) in &ladder {
        let r = run(&cfg.system, &reach_cfg(k, s, d))?;
        let e = hausdorff_distance(&r.final_front().polytope, refpoly)?.value();
        let h = r.grid.h();
        let eoc = match prev {
            Some((h0, e0)) => Eoc::between(h0, e0, h, e, floor),
            None => Eoc::NotAvailable,
        };
        prev = Some((h, e));
        let sup = match cfg.oracle {
            Oracle::None => None,
            o if cfg.system.state_dim() == 2 => {
                let surface = triangulate(&r)?;
                let samples = domain_samples(&surface, cfg.samples);
                Some(sup_error_vs_oracle(&surface, |x| o.eval(x).unwrap(), &samples, cfg.exec).max)
            }
            _ => None,
        };
        let eoc_t = match (prev_sup, sup) {
            (Some((h0, e0)), Some(e1)) if e0 > 0.0 && e1 > 0.0 => Some((e0 / e1).ln() / (h0 / h).ln()),
            _ => None,
        };
        prev_sup = sup.map(|v| (h, v));
        rows.push(StudyRecord {
            levels: k,
            substeps: s,
            h,
            directions: d,
            hausdorff: e,
            eoc: eoc.to_string(),
            sup_error: sup,
            eoc_t,
        });
    }
    Ok(rows)
}

pub fn cmd_study(cfg: &RunConfig) -> Result<Outcome> {
    let rows = study_rows(cfg)?;
    let path = cfg.out.join("study.csv");
    let opt = |v: Option<f64>| v.map_or_else(String::new, |x| format!("{x}"));
    let mut w = io::create(&path)?;
    let mut text = String::from("levels,substeps,h,directions,hausdorff,eoc,sup_error,eoc_t\n");
    for r in &rows {
        text.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.levels,
            r.substeps,
            r.h,
            r.directions,
            r.hausdorff,
            r.eoc,
            opt(r.sup_error),
            opt(r.eoc_t)
        ));
    }
    use std::io::Write;
    w.write_all(text.as_bytes())
        .and_then(|_| w.flush())
        .map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
    let mut out = Outcome::default();
    out.lines.push(format!(
        "{:>6} {:>8} {:>12} {:>10} {:>12} {:>8} {:>12} {:>8}",
        "K", "N", "h", "dirs", "d_H", "EOC", "sup err", "EOC_T"
    ));
    for r in &rows {
        out.lines.push(format!(
            "{:>6} {:>8} {:>12.4e} {:>10} {:>12.4e} {:>8} {:>12} {:>8}",
            r.levels,
            r.substeps,
            r.h,
            r.directions,
            r.hausdorff,
            r.eoc,
            r.sup_error.map_or("-".into(), |v| format!("{v:.4e}")),
            r.eoc_t.map_or("-".into(), |v| format!("{v:.3}"))
        ));
    }
    Ok(out)
}
