//! Structured mesh generators for tests, benchmarks and bundled scenes.

use nalgebra::{Matrix3, Vector3};

use super::{MeshData, MeshKind};
use crate::real::Vec3;

/// Uniform `nx` x `ny` triangulated rectangle.
pub fn rect_tris(nx: usize, ny: usize, w: f64, h: f64, origin: [f64; 2]) -> MeshData {
    let xs: Vec<f64> = (0..=nx).map(|i| origin[0] + w * i as f64 / nx as f64).collect();
    let ys: Vec<f64> = (0..=ny).map(|j| origin[1] + h * j as f64 / ny as f64).collect();
    tensor_tris(&xs, &ys)
}

/// Triangulated tensor-product grid over increasing coordinate lists.
pub fn tensor_tris(xs: &[f64], ys: &[f64]) -> MeshData {
    let nx = xs.len();
    let mut nodes = Vec::with_capacity(nx * ys.len());
    for &y in ys {
        for &x in xs {
            nodes.push(vec![x, y]);
        }
    }
    let id = |i: usize, j: usize| j * nx + i;
    let mut elements = Vec::new();
    for j in 0..ys.len() - 1 {
        for i in 0..nx - 1 {
            let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            elements.push(vec![a, b, c]);
            elements.push(vec![a, c, d]);
        }
    }
    MeshData::new(MeshKind::Tri, nodes, elements)
}

/// Triangulated annulus with `nt` angular and `nr` radial cells.
pub fn annulus(r_in: f64, r_out: f64, nt: usize, nr: usize, center: [f64; 2]) -> MeshData {
    let mut nodes = Vec::new();
    for j in 0..=nr {
        let r = r_in + (r_out - r_in) * j as f64 / nr as f64;
        for i in 0..nt {
            let t = std::f64::consts::TAU * i as f64 / nt as f64;
            nodes.push(vec![center[0] + r * t.cos(), center[1] + r * t.sin()]);
        }
    }
    let id = |i: usize, j: usize| j * nt + (i % nt);
    let mut elements = Vec::new();
    for j in 0..nr {
        for i in 0..nt {
            let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            elements.push(vec![a, c, b]);
            elements.push(vec![a, d, c]);
        }
    }
    MeshData::new(MeshKind::Tri, nodes, elements)
}

/// Uniform box of `nx*ny*nz` cells, six tetrahedra per cell.
pub fn box_tets(nx: usize, ny: usize, nz: usize, size: [f64; 3], origin: [f64; 3]) -> MeshData {
    let lin = |n: usize, s: f64, o: f64| (0..=n).map(|i| o + s * i as f64 / n as f64).collect::<Vec<_>>();
    grid_tets(
        &lin(nx, size[0], origin[0]),
        &lin(ny, size[1], origin[1]),
        &lin(nz, size[2], origin[2]),
        |_, _, _| true,
    )
}

/// Tensor-product tet grid keeping only cells for which `keep(i, j, k)` holds.
/// Every cell uses the same six-tet split along its main diagonal, so the
/// result is conforming. Unreferenced nodes are dropped.
pub fn grid_tets(
    xs: &[f64],
    ys: &[f64],
    zs: &[f64],
    keep: impl Fn(usize, usize, usize) -> bool,
) -> MeshData {
    let (nx, ny) = (xs.len(), ys.len());
    let gid = |i: usize, j: usize, k: usize| (k * ny + j) * nx + i;
    let pos = |g: usize| {
        let i = g % nx;
        let j = (g / nx) % ny;
        let k = g / (nx * ny);
        Vec3::new(xs[i], ys[j], zs[k])
    };
    let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let mut tets = Vec::new();
    for k in 0..zs.len() - 1 {
        for j in 0..ny - 1 {
            for i in 0..nx - 1 {
                if !keep(i, j, k) {
                    continue;
                }
                for p in perms {
                    let mut c = [i, j, k];
                    let mut t = [gid(c[0], c[1], c[2]), 0, 0, 0];
                    for (s, &axis) in p.iter().enumerate() {
                        c[axis] += 1;
                        t[s + 1] = gid(c[0], c[1], c[2]);
                    }
                    let (a, b, cc, d) = (pos(t[0]), pos(t[1]), pos(t[2]), pos(t[3]));
                    if (&b - &a).cross(&(&cc - &a)).dot(&(&d - &a)) < 0.0 {
                        t.swap(1, 2);
                    }
                    tets.push(t);
                }
            }
        }
    }
    let mut remap = vec![usize::MAX; nx * ny * zs.len()];
    let mut nodes = Vec::new();
    let mut elements = Vec::with_capacity(tets.len());
    for t in tets {
        let mut e = Vec::with_capacity(4);
        for g in t {
            if remap[g] == usize::MAX {
                remap[g] = nodes.len();
                let p = pos(g);
                nodes.push(vec![p.x, p.y, p.z]);
            }
            e.push(remap[g]);
        }
        elements.push(e);
    }
    MeshData::new(MeshKind::Tet, nodes, elements)
}

/// Apply `x -> R x + t` to every node of a mesh listing.
pub fn transform_nodes(m: &MeshData, r: &Matrix3<f64>, t: &Vec3) -> MeshData {
    let mut out = m.clone();
    for n in out.nodes.iter_mut() {
        let v = Vector3::new(n[0], n[1], n.get(2).copied().unwrap_or(0.0));
        let w = r * v;
        n[0] = w.x + t.x;
        n[1] = w.y + t.y;
        if n.len() > 2 {
            n[2] = w.z + t.z;
        }
    }
    out
}

/// Displace every node by `f(node)`.
pub fn perturb_interior(m: &MeshData, f: impl Fn(&[f64]) -> Vec<f64>) -> MeshData {
    let mut out = m.clone();
    for n in out.nodes.iter_mut() {
        let d = f(n);
        for (a, b) in n.iter_mut().zip(d) {
            *a += b;
        }
    }
    out
}
