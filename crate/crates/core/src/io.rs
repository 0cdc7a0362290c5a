//! CSV and JSON output with versioned schemas. Floats are written with
//! Rust's shortest round-trip formatting so reruns of a deterministic
//! configuration produce bitwise-identical files.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::dynamics::{EnergyReport, Trajectory};
use crate::error::{Error, Result};
use crate::mesh::{Field, Mesh};

pub const SCHEMA_VERSION: u32 = 1;

pub const TRAJECTORY_COLUMNS: &str =
    "t,kinetic,potential,boundary,forcing,E,e,H,residual,grad_v,v_l2,u_linf";

fn schema_line() -> String {
    format!("# schema_version = {SCHEMA_VERSION}")
}

pub fn write_trajectory_csv(path: &Path, traj: &Trajectory) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    writeln!(w, "{}", schema_line())?;
    writeln!(w, "{TRAJECTORY_COLUMNS}")?;
    for e in &traj.energies {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            e.t,
            e.kinetic,
            e.potential,
            e.boundary,
            e.forcing,
            e.total,
            e.reduced,
            e.lyapunov,
            e.residual,
            e.grad_v,
            e.v_l2,
            e.u_linf
        )?;
    }
    w.flush()?;
    Ok(())
}

fn parse_f64(s: &str, path: &Path) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| Error::Malformed(format!("{}: bad number {s:?}", path.display())))
}

pub fn read_trajectory_csv(path: &Path) -> Result<Vec<EnergyReport>> {
    let text = fs::read_to_string(path)?;
    let mut rows = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with('t') {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 12 {
            return Err(Error::Malformed(format!(
                "{}: expected 12 columns, got {}",
                path.display(),
                cols.len()
            )));
        }
        let mut v = [0.0f64; 12];
        for (slot, col) in v.iter_mut().zip(&cols) {
            *slot = parse_f64(col, path)?;
        }
        rows.push(EnergyReport {
            t: v[0],
            kinetic: v[1],
            potential: v[2],
            boundary: v[3],
            forcing: v[4],
            total: v[5],
            reduced: v[6],
            lyapunov: v[7],
            residual: v[8],
            grad_v: v[9],
            v_l2: v[10],
            u_linf: v[11],
        });
    }
    Ok(rows)
}

/// Field snapshot as x[,y],u rows, x-major.
pub fn write_field_csv(path: &Path, field: &Field, mesh: &Mesh) -> Result<()> {
    field.check_mesh(mesh)?;
    let mut w = BufWriter::new(fs::File::create(path)?);
    writeln!(w, "{}", schema_line())?;
    if mesh.dimension == 1 {
        writeln!(w, "x,u")?;
        for i in 0..mesh.nx {
            writeln!(w, "{},{}", i as f64 * mesh.dx, field.values[i])?;
        }
    } else {
        writeln!(w, "x,y,u")?;
        for j in 0..mesh.ny {
            for i in 0..mesh.nx {
                writeln!(
                    w,
                    "{},{},{}",
                    i as f64 * mesh.dx,
                    j as f64 * mesh.dy,
                    field.values[j * mesh.nx + i]
                )?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_field_csv(path: &Path, mesh: &Mesh) -> Result<Field> {
    let text = fs::read_to_string(path)?;
    let mut values = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with('x') {
            continue;
        }
        let last = line
            .rsplit(',')
            .next()
            .ok_or_else(|| Error::Malformed(format!("{}: empty row", path.display())))?;
        values.push(parse_f64(last, path)?);
    }
    if values.len() != mesh.node_count() {
        return Err(Error::Malformed(format!(
            "{}: {} values for a mesh with {} nodes",
            path.display(),
            values.len(),
            mesh.node_count()
        )));
    }
    let mut f = mesh.zero_field();
    f.values = values;
    Ok(f)
}

/// Two-column (t, h) damping table.
pub fn read_damping_csv(path: &Path) -> Result<(Vec<f64>, Vec<f64>)> {
    let text = fs::read_to_string(path)?;
    let mut times = Vec::new();
    let mut values = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with('t') {
            continue;
        }
        let mut it = line.split(',');
        let t = it
            .next()
            .ok_or_else(|| Error::Malformed(format!("{}: empty row", path.display())))?;
        let h = it
            .next()
            .ok_or_else(|| Error::Malformed(format!("{}: missing value column", path.display())))?;
        times.push(parse_f64(t, path)?);
        values.push(parse_f64(h, path)?);
    }
    if times.len() < 2 {
        return Err(Error::Malformed(format!(
            "{}: a damping table needs at least two rows",
            path.display()
        )));
    }
    Ok((times, values))
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, payload: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(payload)
        .map_err(|e| Error::Malformed(format!("serialization failed: {e}")))?;
    fs::write(path, text + "\n")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::BcKind;

    fn tmpdir() -> std::path::PathBuf {
        let dir = std::env::temp_dir().join(format!("dampwave-io-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        dir
    }

    #[test]
    fn field_roundtrip_1d() {
        let mesh = Mesh::new_1d(std::f64::consts::PI, 51, BcKind::Dirichlet).unwrap();
        let f = mesh.field_from_fn(|x, _| x.sin() * 0.123456789012345);
        let path = tmpdir().join("field1d.csv");
        write_field_csv(&path, &f, &mesh).unwrap();
        let g = read_field_csv(&path, &mesh).unwrap();
        for (a, b) in f.values.iter().zip(&g.values) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn field_roundtrip_2d() {
        let mesh = Mesh::new_2d(1.0, 2.0, 7, 9, BcKind::Neumann).unwrap();
        let f = mesh.field_from_fn(|x, y| (x * 3.0).cos() + y * y / 7.0);
        let path = tmpdir().join("field2d.csv");
        write_field_csv(&path, &f, &mesh).unwrap();
        let g = read_field_csv(&path, &mesh).unwrap();
        for (a, b) in f.values.iter().zip(&g.values) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn field_wrong_mesh_rejected() {
        let mesh = Mesh::new_1d(1.0, 11, BcKind::Dirichlet).unwrap();
        let f = mesh.field_from_fn(|x, _| x);
        let path = tmpdir().join("field_short.csv");
        write_field_csv(&path, &f, &mesh).unwrap();
        let bigger = Mesh::new_1d(1.0, 21, BcKind::Dirichlet).unwrap();
        assert!(matches!(read_field_csv(&path, &bigger), Err(Error::Malformed(_))));
    }

    #[test]
    fn damping_table_roundtrip() {
        let path = tmpdir().join("damping.csv");
        fs::write(&path, "# schema_version = 1\nt,h\n0,1\n0.5,0.25\n1,0.0625\n").unwrap();
        let (t, h) = read_damping_csv(&path).unwrap();
        assert_eq!(t, vec![0.0, 0.5, 1.0]);
        assert_eq!(h, vec![1.0, 0.25, 0.0625]);
    }
}
