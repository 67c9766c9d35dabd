//! Forward-mode derivatives of energies that are sums of small local terms.

use nalgebra::{DMatrix, DVector};
use num_dual::{Dual2DVec64, DualDVec64};
use rayon::prelude::*;

use crate::real::{Real, Vec3, V3};
use crate::sparse::{project_psd, Triplets};

/// An energy term depending on the positions of a few vertices.
pub trait LocalEnergy: Sync {
    /// Global ids of the vertices the term reads, in the order `eval` expects.
    fn vertices(&self) -> &[usize];

    /// Value of the term at the given vertex positions.
    fn eval<T: Real>(&self, x: &[V3<T>]) -> T;
}

/// What an assembly computes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Order {
    Energy,
    Gradient,
    /// Gradient and Hessian, optionally with each local block projected to PSD.
    Hessian { project: bool },
}

/// Energy with optional gradient (flat, `dim` entries per vertex) and Hessian.
#[derive(Clone, Debug, Default)]
pub struct Assembly {
    pub energy: f64,
    pub gradient: Vec<f64>,
    pub hessian: Triplets,
}

impl Assembly {
    pub fn zeros(ndofs: usize) -> Self {
        Self { energy: 0.0, gradient: vec![0.0; ndofs], hessian: Triplets::new(ndofs) }
    }

    /// Add another assembly of the same size, scaled by `s`.
    pub fn add_scaled(&mut self, other: Assembly, s: f64) {
        self.energy += s * other.energy;
        for (a, b) in self.gradient.iter_mut().zip(&other.gradient) {
            *a += s * b;
        }
        self.hessian.entries.extend(other.hessian.entries.into_iter().map(|(i, j, v)| (i, j, s * v)));
    }
}

pub fn local_dofs(verts: &[usize], dim: usize) -> Vec<usize> {
    verts.iter().flat_map(|&v| (0..dim).map(move |k| v * dim + k)).collect()
}

fn gather(verts: &[usize], x: &[Vec3], dim: usize) -> DVector<f64> {
    DVector::from_iterator(
        verts.len() * dim,
        verts.iter().flat_map(|&v| (0..dim).map(move |k| *x[v].component(k))),
    )
}

fn lift<T: Real>(v: &DVector<T>, dim: usize) -> Vec<V3<T>> {
    (0..v.len() / dim)
        .map(|k| {
            let z = if dim == 3 { v[3 * k + 2].clone() } else { T::zero() };
            V3::new(v[dim * k].clone(), v[dim * k + 1].clone(), z)
        })
        .collect()
}

pub fn local_values<E: LocalEnergy>(e: &E, x: &[Vec3]) -> Vec<Vec3> {
    e.vertices().iter().map(|&v| x[v]).collect()
}

pub fn local_gradient<E: LocalEnergy>(e: &E, x: &[Vec3], dim: usize) -> (f64, DVector<f64>) {
    let x0 = gather(e.vertices(), x, dim);
    num_dual::gradient(|v: DVector<DualDVec64>| e.eval(&lift(&v, dim)), &x0)
}

pub fn local_hessian<E: LocalEnergy>(e: &E, x: &[Vec3], dim: usize) -> (f64, DVector<f64>, DMatrix<f64>) {
    let x0 = gather(e.vertices(), x, dim);
    num_dual::hessian(|v: DVector<Dual2DVec64>| e.eval(&lift(&v, dim)), &x0)
}

/// Sum of local terms and their derivatives. Terms are reduced in slice order
/// so the result does not depend on the thread count.
pub fn assemble<E: LocalEnergy + Send>(terms: &[E], x: &[Vec3], dim: usize, order: Order) -> Assembly {
    let n = x.len() * dim;
    let mut out = Assembly::zeros(n);
    match order {
        Order::Energy => {
            let es: Vec<f64> = terms.par_iter().map(|t| t.eval(&local_values(t, x))).collect();
            out.energy = es.iter().sum();
        }
        Order::Gradient => {
            let parts: Vec<_> = terms.par_iter().map(|t| local_gradient(t, x, dim)).collect();
            for (t, (e, g)) in terms.iter().zip(parts) {
                out.energy += e;
                for (a, i) in local_dofs(t.vertices(), dim).into_iter().enumerate() {
                    out.gradient[i] += g[a];
                }
            }
        }
        Order::Hessian { project } => {
            let parts: Vec<_> = terms
                .par_iter()
                .map(|t| {
                    let (e, g, h) = local_hessian(t, x, dim);
                    let h = if project { project_psd(&h) } else { h };
                    (e, g, h)
                })
                .collect();
            for (t, (e, g, h)) in terms.iter().zip(parts) {
                out.energy += e;
                let dofs = local_dofs(t.vertices(), dim);
                for (a, &i) in dofs.iter().enumerate() {
                    out.gradient[i] += g[a];
                }
                out.hessian.add_block(&dofs, &h);
            }
        }
    }
    out
}
