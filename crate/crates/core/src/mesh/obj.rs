use std::fmt::Write as _;
use std::path::Path;

use super::SurfaceMesh;
use crate::error::{Error, Result};

/// Read vertices and polygon faces (0-based) from a Wavefront OBJ file.
pub fn read_obj(path: &Path) -> Result<(Vec<Vec<f64>>, Vec<Vec<usize>>)> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
    let mut verts = Vec::new();
    let mut faces = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let mut it = line.split_whitespace();
        match it.next() {
            Some("v") => {
                let v: std::result::Result<Vec<f64>, _> = it.map(str::parse).collect();
                let v = v.map_err(|e| Error::Parse(format!("{}:{}: {e}", path.display(), ln + 1)))?;
                if v.len() < 3 {
                    return Err(Error::Parse(format!("{}:{}: short vertex", path.display(), ln + 1)));
                }
                verts.push(v[..3].to_vec());
            }
            Some("f") => {
                let mut f = Vec::new();
                for tok in it {
                    let idx: usize = tok
                        .split('/')
                        .next()
                        .unwrap_or("")
                        .parse()
                        .map_err(|e| Error::Parse(format!("{}:{}: {e}", path.display(), ln + 1)))?;
                    if idx == 0 {
                        return Err(Error::Parse(format!("{}:{}: index 0", path.display(), ln + 1)));
                    }
                    f.push(idx - 1);
                }
                if f.len() != 3 {
                    return Err(Error::Parse(format!(
                        "{}:{}: only triangles are supported",
                        path.display(),
                        ln + 1
                    )));
                }
                faces.push(f);
            }
            _ => {}
        }
    }
    Ok((verts, faces))
}

/// Serialize current positions and the boundary as OBJ: faces in 3D,
/// `l` polylines at z = 0 in 2D.
pub fn write_obj(mesh: &SurfaceMesh) -> String {
    let mut s = String::new();
    for p in &mesh.positions {
        let _ = writeln!(s, "v {:.17e} {:.17e} {:.17e}", p.x, p.y, if mesh.dim == 2 { 0.0 } else { p.z });
    }
    if mesh.dim == 2 {
        for e in &mesh.boundary_edges {
            let _ = writeln!(s, "l {} {}", e[0] + 1, e[1] + 1);
        }
    } else {
        for f in &mesh.boundary_faces {
            let _ = writeln!(s, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1);
        }
    }
    s
}
