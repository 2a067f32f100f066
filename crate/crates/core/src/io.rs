//! File formats: system descriptions, fronts, meshes, reports.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::adjoint::AdjointPath;
use crate::dynamics::{Coefficient, LinearSystem};
use crate::error::{Error, Result};
use crate::geometry::{Polytope, PolytopeJson};
use crate::mintime::TimeSurface;
use crate::reach::ReachRun;

/// A matrix given as rows, or tabulated at increasing times.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MatrixInput {
    Constant(Vec<Vec<f64>>),
    Tabulated {
        times: Vec<f64>,
        values: Vec<Vec<Vec<f64>>>,
    },
}

/// JSON system description.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SystemFile {
    #[serde(rename = "A")]
    pub a: MatrixInput,
    #[serde(rename = "B")]
    pub b: MatrixInput,
    #[serde(rename = "U")]
    pub u: PolytopeJson,
    #[serde(rename = "S")]
    pub s: PolytopeJson,
    pub t0: f64,
    pub tf: f64,
}

fn matrix_from_rows(rows: &[Vec<f64>], what: &str) -> Result<DMatrix<f64>> {
    let r = rows.len();
    let c = rows.first().map_or(0, |x| x.len());
    if r == 0 || c == 0 || rows.iter().any(|x| x.len() != c) {
        return Err(Error::Config(format!("{what} must be a nonempty rectangular matrix")));
    }
    Ok(DMatrix::from_fn(r, c, |i, j| rows[i][j]))
}

impl MatrixInput {
    fn to_coefficient(&self, what: &str) -> Result<Coefficient> {
        match self {
            MatrixInput::Constant(rows) => Ok(Coefficient::Constant(matrix_from_rows(rows, what)?)),
            MatrixInput::Tabulated { times, values } => {
                let mats = values
                    .iter()
                    .map(|m| matrix_from_rows(m, what))
                    .collect::<Result<Vec<_>>>()?;
                Coefficient::tabulated(times.clone(), mats)
            }
        }
    }
}

impl SystemFile {
    pub fn to_system(&self) -> Result<LinearSystem> {
        let u = Polytope::from_json(&self.u).map_err(|e| Error::Config(format!("U: {e}")))?;
        let s = Polytope::from_json(&self.s).map_err(|e| Error::Config(format!("S: {e}")))?;
        LinearSystem::new(
            self.a.to_coefficient("A")?,
            self.b.to_coefficient("B")?,
            u,
            s,
            self.t0,
            self.tf,
        )
    }
}

pub fn read_to_string(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn load_system(path: &Path) -> Result<LinearSystem> {
    let text = read_to_string(path)?;
    let file: SystemFile = serde_json::from_str(&text)
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    file.to_system()
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.display().to_string(),
        source,
    }
}

pub fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    File::create(path).map(BufWriter::new).map_err(io_err(path))
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> Error + '_ {
    move |e| Error::Io {
        path: path.display().to_string(),
        source: std::io::Error::other(e.to_string()),
    }
}

fn num(x: f64) -> String {
    format!("{x}")
}

fn axis_names(prefix: &str, n: usize) -> Vec<String> {
    if n == 2 {
        vec![format!("{prefix}x"), format!("{prefix}y")]
    } else {
        (1..=n).map(|i| format!("{prefix}{i}")).collect()
    }
}

/// One CSV per front: `level,t,dir_index,lx,ly,px,py` (one row per grid
/// direction). Returns the written paths.
pub fn write_fronts(dir: &Path, run: &ReachRun) -> Result<Vec<PathBuf>> {
    let n = run.directions.dim();
    let mut header = vec!["level".to_string(), "t".into(), "dir_index".into()];
    header.extend(axis_names("l", n));
    header.extend(axis_names("p", n));
    let mut out = Vec::new();
    for f in &run.fronts {
        let path = dir.join(format!("front_{:03}.csv", f.level));
        let mut w = csv::Writer::from_writer(create(&path)?);
        w.write_record(&header).map_err(csv_err(&path))?;
        for (k, (l, p)) in run.directions.directions().iter().zip(&f.points).enumerate() {
            let mut row = vec![f.level.to_string(), num(f.time), k.to_string()];
            row.extend(l.iter().map(|x| num(*x)));
            row.extend(p.iter().map(|x| num(*x)));
            w.write_record(&row).map_err(csv_err(&path))?;
        }
        w.flush().map_err(io_err(&path))?;
        out.push(path);
    }
    Ok(out)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: std::io::Error::other(e.to_string()),
    })?;
    writeln!(w).map_err(io_err(path))?;
    w.flush().map_err(io_err(path))
}

pub fn write_mesh(path: &Path, surface: &TimeSurface) -> Result<()> {
    let mut w = create(path)?;
    surface.write_off(&mut w).map_err(io_err(path))?;
    w.flush().map_err(io_err(path))
}

/// `x,y,T` rows.
pub fn write_samples(path: &Path, rows: &[([f64; 2], f64)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(["x", "y", "T"]).map_err(csv_err(path))?;
    for (x, t) in rows {
        w.write_record([num(x[0]), num(x[1]), num(*t)]).map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

/// `t,x1..xn,u1..um,eta1..etan`, one row per fine grid node. The control on a
/// row is the one acting from that node on; the last node repeats the final
/// control.
pub fn write_trajectory(path: &Path, p: &AdjointPath) -> Result<()> {
    let n = p.start().len();
    let m = p.controls[0][0].len();
    let mut header = vec!["t".to_string()];
    header.extend((1..=n).map(|i| format!("x{i}")));
    header.extend((1..=m).map(|i| format!("u{i}")));
    header.extend((1..=n).map(|i| format!("eta{i}")));
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(&header).map_err(csv_err(path))?;
    let levels = p.controls.len();
    for k in 0..levels {
        let nodes = p.times[k].len();
        let last_level = k + 1 == levels;
        let upto = if last_level { nodes } else { nodes - 1 };
        for j in 0..upto {
            let u = &p.controls[k][j.min(p.controls[k].len() - 1)];
            let mut row = vec![num(p.times[k][j])];
            row.extend(p.states[k][j].iter().map(|x| num(*x)));
            row.extend(u.iter().map(|x| num(*x)));
            row.extend(p.etas[k][j].iter().map(|x| num(*x)));
            w.write_record(&row).map_err(csv_err(path))?;
        }
    }
    w.flush().map_err(io_err(path))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_constant_and_tabulated() {
        let text = r#"{
            "A": [[0, 1], [0, 0]],
            "B": {"times": [0, 1], "values": [[[0], [1]], [[0], [2]]]},
            "U": {"dim": 1, "vertices": [[-1], [1]]},
            "S": {"dim": 2, "vertices": [[0, 0]]},
            "t0": 0, "tf": 1
        }"#;
        let f: SystemFile = serde_json::from_str(text).unwrap();
        let sys = f.to_system().unwrap();
        assert!(sys.a.as_constant().is_some());
        assert_eq!(sys.b.eval(0.9)[(1, 0)], 2.0);
        assert!(!sys.is_time_invariant());
    }

    #[test]
    fn ragged_matrix_is_rejected() {
        let text = r#"{"A": [[0, 1], [0]], "B": [[0], [1]],
            "U": {"dim": 1, "vertices": [[-1], [1]]},
            "S": {"dim": 2, "vertices": [[0, 0]]}, "t0": 0, "tf": 1}"#;
        let f: SystemFile = serde_json::from_str(text).unwrap();
        assert!(matches!(f.to_system(), Err(Error::Config(_))));
    }
}
