use std::path::Path;

use serde::{Deserialize, Serialize};

use super::SurfaceMesh;
use crate::error::{Error, Result};
use crate::real::Vec3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MeshKind {
    Tri,
    Tet,
    Shell,
}

/// Node/element listing of one mesh as it appears in a scene file.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MeshData {
    #[serde(rename = "type")]
    pub kind: MeshKind,
    #[serde(default)]
    pub nodes: Vec<Vec<f64>>,
    #[serde(default)]
    pub elements: Vec<Vec<usize>>,
    /// Surface OBJ file, resolved relative to the scene file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<String>,
    /// Initial velocity applied to every node.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub velocity: Option<Vec<f64>>,
    /// Per-mesh material override.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub material: Option<Material>,
}

impl MeshData {
    pub fn new(kind: MeshKind, nodes: Vec<Vec<f64>>, elements: Vec<Vec<usize>>) -> Self {
        Self { kind, nodes, elements, file: None, velocity: None, material: None }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Material {
    #[serde(rename = "E")]
    pub youngs: f64,
    pub nu: f64,
    pub rho: f64,
}

impl Default for Material {
    fn default() -> Self {
        Self { youngs: 1e5, nu: 0.3, rho: 1000.0 }
    }
}

impl Material {
    /// Lamé parameters `(mu, lambda)`.
    pub fn lame(&self) -> (f64, f64) {
        let mu = self.youngs / (2.0 * (1.0 + self.nu));
        let lambda = self.youngs * self.nu / ((1.0 + self.nu) * (1.0 - 2.0 * self.nu));
        (mu, lambda)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MotionKind {
    Fixed,
    Linear,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DirichletSpec {
    #[serde(default)]
    pub nodes: Option<Vec<usize>>,
    /// Mesh the node indices refer to; without it indices are global.
    #[serde(default)]
    pub mesh: Option<usize>,
    pub motion: MotionKind,
    #[serde(default)]
    pub velocity: Option<Vec<f64>>,
}

/// Scene file layout.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SceneFile {
    pub dim: usize,
    pub meshes: Vec<MeshData>,
    #[serde(default)]
    pub material: Material,
    #[serde(default)]
    pub gravity: Option<Vec<f64>>,
    pub dt: f64,
    pub dhat: f64,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_beta")]
    pub beta: f64,
    #[serde(default = "default_c")]
    pub c: f64,
    #[serde(default = "default_kappa")]
    pub kappa: f64,
    #[serde(default)]
    pub p: Option<i32>,
    #[serde(default)]
    pub mu: f64,
    #[serde(default = "default_eps_v")]
    pub eps_v: f64,
    #[serde(default)]
    pub dirichlet: Vec<DirichletSpec>,
}

fn default_alpha() -> f64 {
    0.5
}
fn default_beta() -> f64 {
    0.1
}
fn default_c() -> f64 {
    0.01
}
fn default_kappa() -> f64 {
    1e4
}
fn default_eps_v() -> f64 {
    1e-3
}

/// Parameters of the contact potential.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PotentialParams {
    pub eps_trg: f64,
    pub alpha: f64,
    pub beta: f64,
    pub c: f64,
    pub p: i32,
    pub kappa: f64,
}

impl PotentialParams {
    pub fn new(dim: usize, eps_trg: f64) -> Self {
        Self { eps_trg, alpha: 0.5, beta: 0.1, c: 0.01, p: dim as i32 - 1, kappa: 1e4 }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.to_string()));
        if !(self.eps_trg > 0.0) {
            return bad("dhat must be > 0");
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return bad("alpha must lie in (0, 1]");
        }
        if !(self.beta > 0.0 && self.beta <= 1.0) {
            return bad("beta must lie in (0, 1]");
        }
        if !(self.c > 0.0) {
            return bad("c must be > 0");
        }
        if self.p < 1 {
            return bad("barrier power must be >= 1");
        }
        if !(self.kappa > 0.0) {
            return bad("kappa must be > 0");
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Motion {
    Fixed,
    Linear(Vec3),
}

/// Prescribed motion of a vertex set.
#[derive(Clone, Debug)]
pub struct Dirichlet {
    pub nodes: Vec<usize>,
    pub motion: Motion,
}

/// A validated simulation scene.
#[derive(Clone, Debug)]
pub struct Scene {
    pub mesh: SurfaceMesh,
    pub materials: Vec<Material>,
    pub dirichlet: Vec<Dirichlet>,
    pub gravity: Vec3,
    pub dt: f64,
    pub params: PotentialParams,
    pub mu: f64,
    pub eps_v: f64,
    pub velocities: Vec<Vec3>,
}

impl Scene {
    /// Per-vertex flag: position prescribed (Dirichlet or kinematic).
    pub fn constrained(&self) -> Vec<bool> {
        let mut c = self.mesh.kinematic.clone();
        for d in &self.dirichlet {
            for &n in &d.nodes {
                c[n] = true;
            }
        }
        c
    }

    /// Prescribed velocity of a constrained vertex (zero if fixed or kinematic).
    pub fn prescribed_velocity(&self) -> Vec<Vec3> {
        let mut v = vec![Vec3::default(); self.mesh.num_vertices()];
        for d in &self.dirichlet {
            if let Motion::Linear(u) = d.motion {
                for &n in &d.nodes {
                    v[n] = u;
                }
            }
        }
        v
    }
}

/// Read and validate a scene file.
pub fn load_scene(path: impl AsRef<Path>) -> Result<Scene> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
    let file: SceneFile =
        serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    parse_scene(file, path.parent())
}

fn vec_of(v: &[f64], dim: usize, what: &str) -> Result<Vec3> {
    if v.len() != dim {
        return Err(Error::InvalidScene(format!("{what} must have {dim} components")));
    }
    Ok(Vec3::from_slice(v))
}

/// Build a [`Scene`] from its parsed file form. `base` resolves mesh file paths.
pub fn parse_scene(mut file: SceneFile, base: Option<&Path>) -> Result<Scene> {
    let dim = file.dim;
    if dim != 2 && dim != 3 {
        return Err(Error::InvalidScene(format!("dim must be 2 or 3, got {dim}")));
    }
    if !(file.dt > 0.0) {
        return Err(Error::InvalidParameter("dt must be > 0".into()));
    }
    if !(file.mu >= 0.0) {
        return Err(Error::InvalidParameter("mu must be >= 0".into()));
    }
    if !(file.eps_v > 0.0) {
        return Err(Error::InvalidParameter("eps_v must be > 0".into()));
    }
    let params = PotentialParams {
        eps_trg: file.dhat,
        alpha: file.alpha,
        beta: file.beta,
        c: file.c,
        p: file.p.unwrap_or(dim as i32 - 1),
        kappa: file.kappa,
    };
    params.validate()?;

    for m in file.meshes.iter_mut() {
        if let Some(f) = m.file.take() {
            let p = base.map(|b| b.join(&f)).unwrap_or_else(|| f.clone().into());
            let (nodes, faces) = super::read_obj(&p)?;
            m.nodes = nodes.into_iter().map(|v| v[..dim].to_vec()).collect();
            m.elements = faces;
        }
    }
    let mesh = SurfaceMesh::from_meshes(dim, &file.meshes)?;

    let mut materials = Vec::new();
    let mut offsets = Vec::new();
    let mut velocities = Vec::new();
    let mut off = 0;
    for m in &file.meshes {
        let mat = m.material.unwrap_or(file.material);
        if !(mat.youngs > 0.0 && mat.rho > 0.0 && mat.nu > -1.0 && mat.nu < 0.5) {
            return Err(Error::InvalidParameter(format!("invalid material {mat:?}")));
        }
        materials.push(mat);
        offsets.push(off);
        let v = match &m.velocity {
            Some(v) => vec_of(v, dim, "mesh velocity")?,
            None => Vec3::default(),
        };
        velocities.extend(std::iter::repeat(v).take(m.nodes.len()));
        off += m.nodes.len();
    }

    let mut dirichlet = Vec::new();
    for (k, d) in file.dirichlet.iter().enumerate() {
        let nodes: Vec<usize> = match (d.mesh, &d.nodes) {
            (Some(mi), nodes) => {
                let m = file.meshes.get(mi).ok_or_else(|| {
                    Error::InvalidScene(format!("dirichlet {k}: mesh {mi} does not exist"))
                })?;
                let local: Vec<usize> = match nodes {
                    Some(n) => n.clone(),
                    None => (0..m.nodes.len()).collect(),
                };
                if local.iter().any(|&i| i >= m.nodes.len()) {
                    return Err(Error::InvalidScene(format!("dirichlet {k}: node out of range")));
                }
                local.into_iter().map(|i| i + offsets[mi]).collect()
            }
            (None, Some(n)) => n.clone(),
            (None, None) => {
                return Err(Error::InvalidScene(format!("dirichlet {k}: needs nodes or mesh")))
            }
        };
        if nodes.iter().any(|&i| i >= mesh.num_vertices()) {
            return Err(Error::InvalidScene(format!("dirichlet {k}: node out of range")));
        }
        let motion = match d.motion {
            MotionKind::Fixed => Motion::Fixed,
            MotionKind::Linear => Motion::Linear(vec_of(
                d.velocity.as_deref().ok_or_else(|| {
                    Error::InvalidScene(format!("dirichlet {k}: linear motion needs a velocity"))
                })?,
                dim,
                "dirichlet velocity",
            )?),
        };
        dirichlet.push(Dirichlet { nodes, motion });
    }

    let gravity = match &file.gravity {
        Some(g) => vec_of(g, dim, "gravity")?,
        None => Vec3::default(),
    };

    Ok(Scene {
        mesh,
        materials,
        dirichlet,
        gravity,
        dt: file.dt,
        params,
        mu: file.mu,
        eps_v: file.eps_v,
        velocities,
    })
}
