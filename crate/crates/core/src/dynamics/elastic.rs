//! Compressible Neo-Hookean elasticity on linear triangles and tetrahedra,
//! and lumped masses.

use nalgebra::{Matrix2, Matrix3};

use crate::ad::{self, Assembly, LocalEnergy, Order};
use crate::error::{Error, Result};
use crate::mesh::{Material, SurfaceMesh};
use crate::real::{Real, Vec3, V3};

/// One element with its rest shape inverse and Lamé parameters.
#[derive(Clone, Debug)]
pub struct Element {
    verts: Vec<usize>,
    /// Inverse rest edge matrix, row-major `dim x dim`.
    dm_inv: Vec<f64>,
    volume: f64,
    mu: f64,
    lambda: f64,
}

impl Element {
    fn new(x: &[Vec3], verts: &[usize], mat: &Material) -> Result<Self> {
        let dim = verts.len() - 1;
        let e = |k: usize| x[verts[k]] - x[verts[0]];
        let (dm_inv, volume) = if dim == 2 {
            let m = Matrix2::new(e(1).x, e(2).x, e(1).y, e(2).y);
            let inv = m.try_inverse().ok_or_else(|| Error::DegenerateElement(format!("triangle {verts:?}")))?;
            (inv.transpose().as_slice().to_vec(), 0.5 * m.determinant())
        } else {
            let m = Matrix3::new(e(1).x, e(2).x, e(3).x, e(1).y, e(2).y, e(3).y, e(1).z, e(2).z, e(3).z);
            let inv = m.try_inverse().ok_or_else(|| Error::DegenerateElement(format!("tetrahedron {verts:?}")))?;
            (inv.transpose().as_slice().to_vec(), m.determinant() / 6.0)
        };
        if !(volume > 0.0) {
            return Err(Error::InvertedOrientation(format!("element {verts:?} has rest measure {volume:e}")));
        }
        let (mu, lambda) = mat.lame();
        Ok(Self { verts: verts.to_vec(), dm_inv, volume, mu, lambda })
    }

    pub fn volume(&self) -> f64 {
        self.volume
    }

    /// Energy density of a deformation gradient given row-major.
    fn density<T: Real>(&self, f: &[T], dim: usize) -> T {
        let j = if dim == 2 {
            f[0].clone() * &f[3] - f[1].clone() * &f[2]
        } else {
            f[0].clone() * (f[4].clone() * &f[8] - f[5].clone() * &f[7])
                - f[1].clone() * (f[3].clone() * &f[8] - f[5].clone() * &f[6])
                + f[2].clone() * (f[3].clone() * &f[7] - f[4].clone() * &f[6])
        };
        if j.val() <= 0.0 {
            return T::cst(f64::INFINITY);
        }
        let tr = f.iter().fold(T::zero(), |s, v| s + v.clone() * v);
        let lj = j.ln();
        (tr - dim as f64) * (0.5 * self.mu) - lj.clone() * self.mu + lj.clone() * lj * (0.5 * self.lambda)
    }
}

impl LocalEnergy for Element {
    fn vertices(&self) -> &[usize] {
        &self.verts
    }

    fn eval<T: Real>(&self, x: &[V3<T>]) -> T {
        let dim = self.verts.len() - 1;
        // columns of the current edge matrix
        let cols: Vec<V3<T>> = (1..=dim).map(|k| &x[k] - &x[0]).collect();
        let mut f = Vec::with_capacity(dim * dim);
        for r in 0..dim {
            for c in 0..dim {
                let mut s = T::zero();
                for (k, col) in cols.iter().enumerate() {
                    s = s + col.component(r).clone() * self.dm_inv[k * dim + c];
                }
                f.push(s);
            }
        }
        self.density(&f, dim) * self.volume
    }
}

/// Elastic model of a mesh: one element per triangle (2D) or tetrahedron (3D).
#[derive(Clone, Debug)]
pub struct Elasticity {
    pub elements: Vec<Element>,
    dim: usize,
}

impl Elasticity {
    pub fn new(mesh: &SurfaceMesh, materials: &[Material]) -> Result<Self> {
        let x = &mesh.rest_positions;
        let elems: Vec<Vec<usize>> =
            if mesh.dim == 2 { mesh.tris.iter().map(|t| t.to_vec()).collect() } else { mesh.tets.iter().map(|t| t.to_vec()).collect() };
        let elements = elems
            .iter()
            .zip(&mesh.element_material)
            .map(|(v, &m)| Element::new(x, v, &materials[m]))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { elements, dim: mesh.dim })
    }

    pub fn assemble(&self, x: &[Vec3], order: Order) -> Assembly {
        ad::assemble(&self.elements, x, self.dim, order)
    }

    pub fn energy(&self, x: &[Vec3]) -> f64 {
        self.assemble(x, Order::Energy).energy
    }
}

/// Lumped vertex masses: each element spreads `rho * measure` evenly over its vertices.
pub fn lumped_mass(mesh: &SurfaceMesh, materials: &[Material]) -> Result<Vec<f64>> {
    let el = Elasticity::new(mesh, materials)?;
    let mut m = vec![0.0; mesh.num_vertices()];
    for (e, &mi) in el.elements.iter().zip(&mesh.element_material) {
        let share = materials[mi].rho * e.volume / e.verts.len() as f64;
        for &v in &e.verts {
            m[v] += share;
        }
    }
    Ok(m)
}
