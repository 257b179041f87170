//! CSV and JSON writers. Floats use shortest round-trip formatting, so
//! identical runs produce byte-identical files.

use std::fs;
use std::io;
use std::path::Path;

use iht_core::{ControlProblem, PenaltyKind, SolveReport};
use serde::Serialize;

/// Writes one CSV file; the header comes from the field names of `T`.
pub fn write_csv<T: Serialize>(path: &Path, rows: impl IntoIterator<Item = T>) -> io::Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let mut out = csv::Writer::from_path(path)?;
    for row in rows {
        out.serialize(row)?;
    }
    out.flush()
}

#[derive(Serialize)]
struct IterationRow {
    k: usize,
    #[serde(rename = "L")]
    l: f64,
    f: f64,
    g: f64,
    #[serde(rename = "F")]
    objective: f64,
    sparsity: f64,
    step_norm: f64,
    chi_distance: f64,
    pde_solves: usize,
    trials: usize,
}

/// Per-iteration log.
pub fn write_report(path: &Path, report: &SolveReport) -> io::Result<()> {
    write_csv(
        path,
        report.iterations.iter().map(|r| IterationRow {
            k: r.k,
            l: r.l,
            f: r.f,
            g: r.g,
            objective: r.objective,
            sparsity: r.sparsity,
            step_norm: r.step_norm,
            chi_distance: r.chi_distance,
            pde_solves: r.pde_solves,
            trials: r.trials,
        }),
    )
}

#[derive(Serialize)]
struct ControlRow {
    triangle_index: usize,
    centroid_x: f64,
    centroid_y: f64,
    value: f64,
}

/// Control values with the location of each dof: triangle centroids, or
/// interval midpoints at the centre line of the acting strip for switching
/// controls.
pub fn write_control(path: &Path, problem: &ControlProblem, values: &[f64]) -> io::Result<()> {
    let mesh = problem.mesh();
    let switching = problem.spec().penalty == PenaltyKind::Switching;
    let n = mesh.n();
    write_csv(
        path,
        values.iter().enumerate().map(|(k, &value)| {
            let [centroid_x, centroid_y] = if switching {
                [((k % n) as f64 + 0.5) / n as f64, if k < n { 0.125 } else { 0.875 }]
            } else {
                mesh.centroid(k)
            };
            ControlRow { triangle_index: k, centroid_x, centroid_y, value }
        }),
    )
}

#[derive(Debug, Serialize)]
pub struct Summary {
    pub mesh_n: usize,
    pub h: f64,
    pub alpha: f64,
    pub beta: f64,
    pub bound: String,
    pub penalty: String,
    pub pde: String,
    pub strategy: String,
    pub objective: f64,
    pub f: f64,
    pub g: f64,
    pub sparsity: f64,
    pub pde_solves: usize,
    pub iterations: usize,
    pub trials: usize,
    pub termination: String,
    pub final_l: f64,
    pub fp_residual: f64,
}

pub fn write_json(path: &Path, value: &impl Serialize) -> io::Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let text = serde_json::to_string_pretty(value).map_err(io::Error::other)?;
    fs::write(path, text + "\n")
}

pub fn fmt_bound(b: f64) -> String {
    if b.is_infinite() {
        "inf".into()
    } else {
        format!("{b}")
    }
}
