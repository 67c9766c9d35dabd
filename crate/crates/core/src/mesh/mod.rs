//! Boundary surface of a set of simplicial meshes, with adjacency, rest
//! state and per-primitive length scales.

mod generate;
mod obj;
mod scene;

pub use generate::{
    annulus, box_tets, grid_tets, perturb_interior, rect_tris, tensor_tris, transform_nodes,
};
pub use obj::{read_obj, write_obj};
pub use scene::{
    load_scene, parse_scene, Dirichlet, DirichletSpec, Material, MeshData, MeshKind, Motion, MotionKind, PotentialParams,
    Scene, SceneFile,
};

use std::collections::HashMap;

use nalgebra::Matrix3;

use crate::error::{Error, Result};
use crate::real::Vec3;

/// A boundary primitive, indexing into the boundary arrays of a [`SurfaceMesh`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Prim {
    Vertex(usize),
    Edge(usize),
    Face(usize),
}

impl Prim {
    pub fn dim(&self) -> usize {
        match self {
            Prim::Vertex(_) => 0,
            Prim::Edge(_) => 1,
            Prim::Face(_) => 2,
        }
    }

    pub fn index(&self) -> usize {
        match *self {
            Prim::Vertex(i) | Prim::Edge(i) | Prim::Face(i) => i,
        }
    }
}

/// Merged boundary representation of every mesh in a scene.
///
/// In 2D boundary edges are oriented with the material on their left. In 3D
/// boundary faces are oriented with outward normals and boundary edges are
/// stored with `a < b`.
#[derive(Clone, Debug)]
pub struct SurfaceMesh {
    pub dim: usize,
    pub rest_positions: Vec<Vec3>,
    pub positions: Vec<Vec3>,
    /// Global vertex ids of boundary vertices.
    pub boundary_vertices: Vec<usize>,
    pub boundary_edges: Vec<[usize; 2]>,
    pub boundary_faces: Vec<[usize; 3]>,
    /// Boundary vertex index -> incident boundary edges.
    pub vertex_edges: Vec<Vec<usize>>,
    /// Boundary edge -> incident faces; the first traverses the edge `a -> b`.
    pub edge_faces: Vec<[usize; 2]>,
    /// Boundary vertex index -> ordered one-ring of global vertex ids.
    /// 2D: `[prev, next]` along the boundary. 3D: faces `(v, r[i], r[i+1])` are
    /// the incident faces in cyclic order.
    pub rings: Vec<Vec<usize>>,
    /// Global vertex id -> boundary vertex index.
    pub boundary_index: Vec<Option<usize>>,
    /// Face -> its three boundary edges.
    pub face_edges: Vec<[usize; 3]>,
    pub vertex_l: Vec<f64>,
    pub edge_l: Vec<f64>,
    pub vertex_eps: Vec<f64>,
    pub edge_eps: Vec<f64>,
    pub face_eps: Vec<f64>,
    /// Elastic elements: triangles in 2D.
    pub tris: Vec<[usize; 3]>,
    /// Elastic elements: tetrahedra in 3D.
    pub tets: Vec<[usize; 4]>,
    /// Material index per element (tris or tets, whichever is used).
    pub element_material: Vec<usize>,
    /// Vertices that carry no mass and follow prescribed motion only.
    pub kinematic: Vec<bool>,
    /// Mesh index per vertex.
    pub body: Vec<usize>,
}

fn signed_area(a: &Vec3, b: &Vec3, c: &Vec3) -> f64 {
    0.5 * ((b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x))
}

fn signed_volume(a: &Vec3, b: &Vec3, c: &Vec3, d: &Vec3) -> f64 {
    (b - a).cross(&(c - a)).dot(&(d - a)) / 6.0
}

fn sorted2(a: usize, b: usize) -> [usize; 2] {
    if a < b {
        [a, b]
    } else {
        [b, a]
    }
}

impl SurfaceMesh {
    /// Merge meshes into one boundary representation and validate it.
    pub fn from_meshes(dim: usize, meshes: &[MeshData]) -> Result<Self> {
        if dim != 2 && dim != 3 {
            return Err(Error::InvalidScene(format!("dim must be 2 or 3, got {dim}")));
        }
        let mut positions = Vec::new();
        let mut tris = Vec::new();
        let mut tets = Vec::new();
        let mut element_material = Vec::new();
        let mut kinematic = Vec::new();
        let mut body = Vec::new();
        // oriented boundary simplices (edges in 2D, faces in 3D)
        let mut bsimp2: Vec<[usize; 2]> = Vec::new();
        let mut bsimp3: Vec<[usize; 3]> = Vec::new();

        for (mi, m) in meshes.iter().enumerate() {
            let off = positions.len();
            for n in &m.nodes {
                if n.len() != dim {
                    return Err(Error::InvalidScene(format!(
                        "mesh {mi}: node with {} coordinates in a {dim}D scene",
                        n.len()
                    )));
                }
                positions.push(Vec3::from_slice(n));
                kinematic.push(m.kind == MeshKind::Shell);
                body.push(mi);
            }
            let nn = m.nodes.len();
            let need = match (dim, m.kind) {
                (2, MeshKind::Tri) => 3,
                (3, MeshKind::Tet) => 4,
                (2, MeshKind::Shell) => 2,
                (3, MeshKind::Shell) => 3,
                (d, k) => {
                    return Err(Error::InvalidScene(format!(
                        "mesh {mi}: element type {k:?} not valid in {d}D"
                    )))
                }
            };
            let mut local2: HashMap<[usize; 2], (usize, [usize; 2])> = HashMap::new();
            let mut local3: HashMap<[usize; 3], (usize, [usize; 3])> = HashMap::new();
            for (ei, e) in m.elements.iter().enumerate() {
                if e.len() != need {
                    return Err(Error::InvalidScene(format!(
                        "mesh {mi}: element {ei} has {} nodes, expected {need}",
                        e.len()
                    )));
                }
                if let Some(&bad) = e.iter().find(|&&i| i >= nn) {
                    return Err(Error::InvalidScene(format!(
                        "mesh {mi}: element {ei} references node {bad} of {nn}"
                    )));
                }
                let g: Vec<usize> = e.iter().map(|&i| i + off).collect();
                let p = |i: usize| &positions[g[i]];
                match (dim, m.kind) {
                    (2, MeshKind::Tri) => {
                        let a = signed_area(p(0), p(1), p(2));
                        check_measure(a, mi, ei)?;
                        tris.push([g[0], g[1], g[2]]);
                        element_material.push(mi);
                        for k in 0..3 {
                            let s = [g[k], g[(k + 1) % 3]];
                            toggle2(&mut local2, s);
                        }
                    }
                    (3, MeshKind::Tet) => {
                        let v = signed_volume(p(0), p(1), p(2), p(3));
                        check_measure(v, mi, ei)?;
                        tets.push([g[0], g[1], g[2], g[3]]);
                        element_material.push(mi);
                        for f in [[1, 2, 3], [0, 3, 2], [0, 1, 3], [0, 2, 1]] {
                            toggle3(&mut local3, [g[f[0]], g[f[1]], g[f[2]]]);
                        }
                    }
                    (2, MeshKind::Shell) => bsimp2.push([g[0], g[1]]),
                    (3, MeshKind::Shell) => bsimp3.push([g[0], g[1], g[2]]),
                    _ => unreachable!(),
                }
            }
            let mut l2: Vec<_> = local2.into_values().filter(|v| v.0 == 1).map(|v| v.1).collect();
            l2.sort();
            bsimp2.extend(l2);
            let mut l3: Vec<_> = local3.into_values().filter(|v| v.0 == 1).map(|v| v.1).collect();
            l3.sort();
            bsimp3.extend(l3);

            if m.kind == MeshKind::Shell {
                check_shell_orientation(dim, &positions, mi, m, off)?;
            }
        }

        let mut mesh = SurfaceMesh {
            dim,
            rest_positions: positions.clone(),
            positions,
            boundary_vertices: Vec::new(),
            boundary_edges: Vec::new(),
            boundary_faces: Vec::new(),
            vertex_edges: Vec::new(),
            edge_faces: Vec::new(),
            rings: Vec::new(),
            boundary_index: Vec::new(),
            face_edges: Vec::new(),
            vertex_l: Vec::new(),
            edge_l: Vec::new(),
            vertex_eps: Vec::new(),
            edge_eps: Vec::new(),
            face_eps: Vec::new(),
            tris,
            tets,
            element_material,
            kinematic,
            body,
        };
        if dim == 2 {
            mesh.build_2d(bsimp2)?;
        } else {
            mesh.build_3d(bsimp3)?;
        }
        mesh.check_boundary_measures()?;
        mesh.assign_length_scales();
        Ok(mesh)
    }

    fn build_2d(&mut self, edges: Vec<[usize; 2]>) -> Result<()> {
        let n = self.positions.len();
        let mut next: Vec<Option<usize>> = vec![None; n];
        let mut prev: Vec<Option<usize>> = vec![None; n];
        for e in &edges {
            if next[e[0]].replace(e[1]).is_some() || prev[e[1]].replace(e[0]).is_some() {
                return Err(Error::NonManifold(format!(
                    "boundary vertex {} has more than two incident edges",
                    if next[e[0]].is_some() { e[0] } else { e[1] }
                )));
            }
        }
        let mut bidx = vec![None; n];
        let mut bverts = Vec::new();
        for v in 0..n {
            match (prev[v], next[v]) {
                (Some(_), Some(_)) => {
                    bidx[v] = Some(bverts.len());
                    bverts.push(v);
                }
                (None, None) => {}
                _ => {
                    return Err(Error::NonManifold(format!(
                        "boundary vertex {v} does not have exactly two incident edges"
                    )))
                }
            }
        }
        let mut vertex_edges = vec![Vec::new(); bverts.len()];
        for (ei, e) in edges.iter().enumerate() {
            vertex_edges[bidx[e[0]].unwrap()].push(ei);
            vertex_edges[bidx[e[1]].unwrap()].push(ei);
        }
        self.rings = bverts.iter().map(|&v| vec![prev[v].unwrap(), next[v].unwrap()]).collect();
        self.boundary_vertices = bverts;
        self.boundary_index = bidx;
        self.vertex_edges = vertex_edges;
        self.boundary_edges = edges;
        Ok(())
    }

    fn build_3d(&mut self, faces: Vec<[usize; 3]>) -> Result<()> {
        let n = self.positions.len();
        // directed half-edge -> face
        let mut half: HashMap<(usize, usize), usize> = HashMap::new();
        for (fi, f) in faces.iter().enumerate() {
            for k in 0..3 {
                let he = (f[k], f[(k + 1) % 3]);
                if half.insert(he, fi).is_some() {
                    return Err(Error::NonManifold(format!(
                        "directed edge {:?} used by more than one face (inconsistent orientation or non-manifold)",
                        he
                    )));
                }
            }
        }
        let mut edge_id: HashMap<[usize; 2], usize> = HashMap::new();
        let mut edges = Vec::new();
        let mut edge_faces = Vec::new();
        let mut face_edges = vec![[0usize; 3]; faces.len()];
        let mut keys: Vec<_> = half.keys().copied().collect();
        keys.sort();
        for (a, b) in keys {
            if a > b {
                continue;
            }
            let f1 = half[&(a, b)];
            let f2 = *half.get(&(b, a)).ok_or_else(|| {
                Error::NonManifold(format!("boundary edge ({a}, {b}) has a single incident face"))
            })?;
            edge_id.insert([a, b], edges.len());
            edges.push([a, b]);
            edge_faces.push([f1, f2]);
        }
        for (a, b) in half.keys() {
            if a > b && !half.contains_key(&(*b, *a)) {
                return Err(Error::NonManifold(format!(
                    "boundary edge ({b}, {a}) has a single incident face"
                )));
            }
        }
        for (fi, f) in faces.iter().enumerate() {
            for k in 0..3 {
                face_edges[fi][k] = edge_id[&sorted2(f[k], f[(k + 1) % 3])];
            }
        }

        let mut incident: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (fi, f) in faces.iter().enumerate() {
            for &v in f {
                incident[v].push(fi);
            }
        }
        let mut bidx = vec![None; n];
        let mut bverts = Vec::new();
        let mut rings = Vec::new();
        for v in 0..n {
            if incident[v].is_empty() {
                continue;
            }
            // map b -> c for faces rotated to (v, b, c)
            let mut succ: HashMap<usize, usize> = HashMap::new();
            for &fi in &incident[v] {
                let f = faces[fi];
                let k = f.iter().position(|&x| x == v).unwrap();
                succ.insert(f[(k + 1) % 3], f[(k + 2) % 3]);
            }
            let start = *succ.keys().min().unwrap();
            let mut ring = vec![start];
            let mut cur = succ[&start];
            while cur != start {
                ring.push(cur);
                cur = *succ.get(&cur).ok_or_else(|| {
                    Error::NonManifold(format!("vertex {v} has an open one-ring"))
                })?;
                if ring.len() > succ.len() {
                    return Err(Error::NonManifold(format!("vertex {v} has a broken one-ring")));
                }
            }
            if ring.len() != succ.len() {
                return Err(Error::NonManifold(format!(
                    "vertex {v} has {} incident face fans",
                    if ring.len() < succ.len() { "multiple" } else { "inconsistent" }
                )));
            }
            bidx[v] = Some(bverts.len());
            bverts.push(v);
            rings.push(ring);
        }
        let mut vertex_edges = vec![Vec::new(); bverts.len()];
        for (ei, e) in edges.iter().enumerate() {
            vertex_edges[bidx[e[0]].unwrap()].push(ei);
            vertex_edges[bidx[e[1]].unwrap()].push(ei);
        }
        self.boundary_vertices = bverts;
        self.boundary_index = bidx;
        self.rings = rings;
        self.vertex_edges = vertex_edges;
        self.boundary_edges = edges;
        self.edge_faces = edge_faces;
        self.boundary_faces = faces;
        self.face_edges = face_edges;
        Ok(())
    }

    fn check_boundary_measures(&self) -> Result<()> {
        for x in [&self.rest_positions, &self.positions] {
            for e in &self.boundary_edges {
                if (&x[e[1]] - &x[e[0]]).norm() <= 0.0 {
                    return Err(Error::DegenerateElement(format!("zero-length edge {e:?}")));
                }
            }
            for f in &self.boundary_faces {
                if Self::tri_area(x, f) <= 0.0 {
                    return Err(Error::DegenerateElement(format!("zero-area face {f:?}")));
                }
            }
        }
        Ok(())
    }

    fn tri_area(x: &[Vec3], f: &[usize; 3]) -> f64 {
        0.5 * (&x[f[1]] - &x[f[0]]).cross(&(&x[f[2]] - &x[f[0]])).norm()
    }

    /// L(vertex) = mean rest length of incident boundary edges, L(edge) =
    /// rest length. Localization radii are reset to infinity.
    pub fn assign_length_scales(&mut self) {
        let x = &self.rest_positions;
        self.edge_l = self
            .boundary_edges
            .iter()
            .map(|e| (&x[e[1]] - &x[e[0]]).norm())
            .collect();
        self.vertex_l = self
            .vertex_edges
            .iter()
            .map(|es| es.iter().map(|&e| self.edge_l[e]).sum::<f64>() / es.len() as f64)
            .collect();
        self.vertex_eps = vec![f64::INFINITY; self.boundary_vertices.len()];
        self.edge_eps = vec![f64::INFINITY; self.boundary_edges.len()];
        self.face_eps = vec![f64::INFINITY; self.boundary_faces.len()];
    }

    /// Length scale L of a primitive; faces have none and report 1.
    pub fn length_scale(&self, p: Prim) -> f64 {
        match p {
            Prim::Vertex(i) => self.vertex_l[i],
            Prim::Edge(i) => self.edge_l[i],
            Prim::Face(_) => 1.0,
        }
    }

    pub fn eps_of(&self, p: Prim) -> f64 {
        match p {
            Prim::Vertex(i) => self.vertex_eps[i],
            Prim::Edge(i) => self.edge_eps[i],
            Prim::Face(i) => self.face_eps[i],
        }
    }

    /// Global vertex ids of a primitive.
    pub fn prim_vertices(&self, p: Prim) -> Vec<usize> {
        match p {
            Prim::Vertex(i) => vec![self.boundary_vertices[i]],
            Prim::Edge(i) => self.boundary_edges[i].to_vec(),
            Prim::Face(i) => self.boundary_faces[i].to_vec(),
        }
    }

    pub fn num_vertices(&self) -> usize {
        self.positions.len()
    }

    pub fn num_dofs(&self) -> usize {
        self.positions.len() * self.dim
    }

    /// Set every localization radius to `eps`.
    pub fn set_uniform_eps(&mut self, eps: f64) {
        self.vertex_eps.iter_mut().for_each(|e| *e = eps);
        self.edge_eps.iter_mut().for_each(|e| *e = eps);
        self.face_eps.iter_mut().for_each(|e| *e = eps);
    }

    /// Flattened current positions, `dim` entries per vertex.
    pub fn flat_positions(&self) -> Vec<f64> {
        flatten(&self.positions, self.dim)
    }

    pub fn set_flat_positions(&mut self, x: &[f64]) {
        self.positions = unflatten(x, self.dim);
    }

    pub fn bbox_diagonal(&self) -> f64 {
        let mut lo = self.positions[0];
        let mut hi = self.positions[0];
        for p in &self.positions {
            lo = lo.min_comp(p);
            hi = hi.max_comp(p);
        }
        (&hi - &lo).norm()
    }

    /// Sum of signed element measures; positive for valid orientation.
    pub fn signed_measure(&self, x: &[Vec3]) -> f64 {
        if self.dim == 2 {
            self.tris.iter().map(|t| signed_area(&x[t[0]], &x[t[1]], &x[t[2]])).sum()
        } else {
            self.tets
                .iter()
                .map(|t| signed_volume(&x[t[0]], &x[t[1]], &x[t[2]], &x[t[3]]))
                .sum()
        }
    }
}

pub fn flatten(x: &[Vec3], dim: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(x.len() * dim);
    for p in x {
        out.push(p.x);
        out.push(p.y);
        if dim == 3 {
            out.push(p.z);
        }
    }
    out
}

pub fn unflatten(x: &[f64], dim: usize) -> Vec<Vec3> {
    x.chunks(dim).map(Vec3::from_slice).collect()
}

fn check_measure(m: f64, mi: usize, ei: usize) -> Result<()> {
    if m == 0.0 || !m.is_finite() {
        Err(Error::DegenerateElement(format!("mesh {mi}: element {ei} has zero measure")))
    } else if m < 0.0 {
        Err(Error::InvertedOrientation(format!("mesh {mi}: element {ei} has negative measure")))
    } else {
        Ok(())
    }
}

fn check_shell_orientation(
    dim: usize,
    x: &[Vec3],
    mi: usize,
    m: &MeshData,
    off: usize,
) -> Result<()> {
    let o = &x[off];
    let mut s = 0.0;
    for e in &m.elements {
        if dim == 2 {
            s += signed_area(o, &x[e[0] + off], &x[e[1] + off]);
        } else {
            s += signed_volume(o, &x[e[0] + off], &x[e[1] + off], &x[e[2] + off]);
        }
    }
    if s <= 0.0 {
        return Err(Error::InvertedOrientation(format!(
            "shell mesh {mi} encloses non-positive signed measure {s:e}"
        )));
    }
    Ok(())
}

fn toggle2(map: &mut HashMap<[usize; 2], (usize, [usize; 2])>, s: [usize; 2]) {
    map.entry(sorted2(s[0], s[1])).or_insert((0, s)).0 += 1;
}

fn toggle3(map: &mut HashMap<[usize; 3], (usize, [usize; 3])>, s: [usize; 3]) {
    let mut k = s;
    k.sort();
    map.entry(k).or_insert((0, s)).0 += 1;
}

/// Apply a proper rigid motion to the current positions; rest positions are
/// left unchanged.
pub fn rigid_transform(mesh: &SurfaceMesh, rotation: &Matrix3<f64>, translation: &Vec3) -> Result<SurfaceMesh> {
    let rtr = rotation.transpose() * rotation;
    if (rtr - Matrix3::identity()).abs().max() > 1e-9 || (rotation.determinant() - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidParameter("rotation must be orthogonal with determinant +1".into()));
    }
    if mesh.dim == 2
        && (rotation[(2, 2)] - 1.0).abs() > 1e-12
    {
        return Err(Error::InvalidParameter("2D rotation must fix the z axis".into()));
    }
    let mut out = mesh.clone();
    for p in out.positions.iter_mut() {
        let v = rotation * nalgebra::Vector3::new(p.x, p.y, p.z);
        *p = Vec3::new(v.x + translation.x, v.y + translation.y, v.z + translation.z);
        if mesh.dim == 2 {
            p.z = 0.0;
        }
    }
    Ok(out)
}

/// Rotation about z by `theta`.
pub fn rotation_z(theta: f64) -> Matrix3<f64> {
    *nalgebra::Rotation3::from_axis_angle(&nalgebra::Vector3::z_axis(), theta).matrix()
}
