//! Result files.
//!
//! | file | columns |
//! |------|---------|
//! | `trace.csv` | `increment, cut, time, dt, record, abaqus, comsol, converged` |
//! | `force-displacement.csv` | `time, displacement, force` |
//! | `stress-strain.csv` | `time, strain, stress` |
//! | `reactions.csv` | `increment, time, node, component, reaction` |
//! | `fields.txt` | one block per increment, see [`write_fields`] |
//! | `hydrogen.csv` | `step, time, passes, node, x, y, z, c_l, c_t, n_t, sigma_h, eps_p` |
//!
//! Record 0 of an increment is the predictor; `converged` is set on the
//! record that met the tolerance. Numbers use the shortest representation
//! that round-trips, so repeated runs give byte-identical files.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::error::Result;
use crate::mesh::Mesh;
use crate::run::{CurvePoint, FieldFrame, RunResults, TransportFrame};
use crate::solver::SolverTrace;

pub fn write_trace(path: &Path, trace: &SolverTrace) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["increment", "cut", "time", "dt", "record", "abaqus", "comsol", "converged"])?;
    for a in &trace.attempts {
        let last = a.abaqus.len().saturating_sub(1);
        for (k, (ab, co)) in a.abaqus.iter().zip(&a.comsol).enumerate() {
            let conv = a.converged && k == last;
            w.write_record([
                a.increment.to_string(),
                a.cut.to_string(),
                a.time.to_string(),
                a.dt.to_string(),
                k.to_string(),
                ab.to_string(),
                co.to_string(),
                u8::from(conv).to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_curve(path: &Path, header: [&str; 3], points: &[CurvePoint]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for p in points {
        w.write_record(p.map(|v| v.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_reactions(path: &Path, ndim: usize, reactions: &[(f64, Vec<(usize, f64)>)]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["increment", "time", "node", "component", "reaction"])?;
    for (k, (time, list)) in reactions.iter().enumerate() {
        for &(dof, r) in list {
            w.write_record([
                (k + 1).to_string(),
                time.to_string(),
                (dof / ndim).to_string(),
                ["x", "y", "z"][dof % ndim].to_string(),
                r.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Plain-text nodal fields. Each block starts with
/// `# increment <k> time <t>` followed by one row per node:
/// `node x y z ux uy [uz] s11 s22 s33 s12 s13 s23 eps_p`, stresses in Pa.
pub fn write_fields(path: &Path, mesh: &Mesh, frames: &[FieldFrame]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    let d = mesh.dim();
    let axes = ["ux", "uy", "uz"];
    write!(w, "# node x y z")?;
    for a in &axes[..d] {
        write!(w, " {a}")?;
    }
    writeln!(w, " s11 s22 s33 s12 s13 s23 eps_p")?;
    for (k, f) in frames.iter().enumerate() {
        writeln!(w, "# increment {} time {}", k + 1, f.time)?;
        for (n, x) in mesh.nodes().iter().enumerate() {
            write!(w, "{n} {} {} {}", x[0], x[1], x[2])?;
            for i in 0..d {
                write!(w, " {}", f.u[n * d + i])?;
            }
            for s in f.stress[n] {
                write!(w, " {s}")?;
            }
            writeln!(w, " {}", f.eps_p[n])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_hydrogen(path: &Path, mesh: &Mesh, frames: &[TransportFrame]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "step", "time", "passes", "node", "x", "y", "z", "c_l", "c_t", "n_t", "sigma_h", "eps_p",
    ])?;
    for (k, f) in frames.iter().enumerate() {
        let s = &f.state;
        for (n, x) in mesh.nodes().iter().enumerate() {
            w.write_record([
                (k + 1).to_string(),
                f.time.to_string(),
                f.passes.to_string(),
                n.to_string(),
                x[0].to_string(),
                x[1].to_string(),
                x[2].to_string(),
                s.c_l[n].to_string(),
                s.c_t[n].to_string(),
                s.n_t[n].to_string(),
                s.sigma_h[n].to_string(),
                s.eps_p[n].to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Writes every result file the run produced into `dir` and returns their
/// paths.
pub fn write_results(dir: &Path, mesh: &Mesh, r: &RunResults) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let trace = dir.join("trace.csv");
    write_trace(&trace, &r.output.trace)?;
    written.push(trace);
    if !r.reactions.is_empty() {
        let p = dir.join("reactions.csv");
        write_reactions(&p, mesh.dim(), &r.reactions)?;
        written.push(p);
    }
    if !r.force_displacement.is_empty() {
        let p = dir.join("force-displacement.csv");
        write_curve(&p, ["time", "displacement", "force"], &r.force_displacement)?;
        written.push(p);
    }
    if !r.stress_strain.is_empty() {
        let p = dir.join("stress-strain.csv");
        write_curve(&p, ["time", "strain", "stress"], &r.stress_strain)?;
        written.push(p);
    }
    if !r.fields.is_empty() {
        let p = dir.join("fields.txt");
        write_fields(&p, mesh, &r.fields)?;
        written.push(p);
    }
    if !r.transport.is_empty() {
        let p = dir.join("hydrogen.csv");
        write_hydrogen(&p, mesh, &r.transport)?;
        written.push(p);
    }
    Ok(written)
}
