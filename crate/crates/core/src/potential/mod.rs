//! Discrete contact potential. Every pair of boundary primitives closer than
//! its localization radius contributes `kappa * w * gamma * barrier(d)`, where
//! `w` combines length scales with current element measures and `gamma` is
//! the directional factor of the pair.

mod friction;
mod ipc;

pub use friction::{f0, f0_squared, f1, friction_assemble, friction_energy, lag_friction, FrictionData, FrictionPair};
pub use ipc::{ipc_assemble, ipc_energy, ipc_terms, IpcTerm};

use rayon::prelude::*;

use crate::ad::{self, Assembly, LocalEnergy, Order};
use crate::error::{Error, Result};
use crate::filter::{pair_geometry, DirectionalFactor, Side};
use crate::kernels::{barrier, barrier_derivative, BarrierSpec};
use crate::mesh::{PotentialParams, SurfaceMesh};
use crate::proximity::{broad_phase, intersecting_pairs, ContactPair};
use crate::real::{Real, Vec3, V3};

/// Contact model used by the solver.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum PotentialKind {
    /// The filtered geometric barrier.
    #[default]
    Geometric,
    /// Unfiltered log barrier on point-edge (2D) or point-triangle and
    /// edge-edge (3D) distances, with `dhat = eps_trg`.
    Ipc,
}

/// One active term of the potential.
#[derive(Clone, Debug, PartialEq)]
pub struct ContactTerm {
    pub pair: ContactPair,
    pub factor: DirectionalFactor,
    pub distance: f64,
    /// Localization radius of the pair.
    pub eps: f64,
    pub barrier: f64,
    pub weight: f64,
    /// `kappa * weight * gamma * barrier`.
    pub energy: f64,
}

impl ContactTerm {
    pub fn gamma(&self) -> f64 {
        self.factor.gamma()
    }
}

struct TermValue<T> {
    distance: T,
    factor: [T; 5],
    weight: T,
    barrier: T,
    energy: T,
}

/// A pair with everything its energy depends on. Vertices are the pair's
/// primitive vertices followed by the remaining side vertices.
struct PairEnergy<'a> {
    mesh: &'a SurfaceMesh,
    pair: ContactPair,
    a: Side,
    b: Side,
    verts: Vec<usize>,
    na: usize,
    nb: usize,
    params: &'a PotentialParams,
    eps: f64,
}

impl<'a> PairEnergy<'a> {
    fn new(mesh: &'a SurfaceMesh, pair: ContactPair, params: &'a PotentialParams) -> Self {
        let a = Side::of(mesh, pair.a);
        let b = Side::of(mesh, pair.b);
        let mut verts = mesh.prim_vertices(pair.a);
        let na = verts.len();
        verts.extend(mesh.prim_vertices(pair.b));
        let nb = verts.len() - na;
        for v in a.vertices().into_iter().chain(b.vertices()) {
            if !verts.contains(&v) {
                verts.push(v);
            }
        }
        let eps = pair_eps(mesh, &pair, params);
        Self { mesh, pair, a, b, verts, na, nb, params, eps }
    }

    fn local(&self, g: usize) -> usize {
        self.verts.iter().position(|&v| v == g).expect("vertex outside the term stencil")
    }

    fn value<T: Real>(&self, x: &[V3<T>]) -> Result<Option<TermValue<T>>> {
        let pts = &x[..self.na + self.nb];
        let Some(g) = pair_geometry(self.pair.kind, pts, self.params.c) else {
            return Ok(None);
        };
        if g.distance.val() <= 0.0 {
            return Err(Error::ZeroDistance(format!("{:?}", self.pair)));
        }
        if g.distance.val() >= self.eps || g.mollifier.val() == 0.0 {
            return Ok(None);
        }
        let v = (&g.q - &g.p).scale(&g.distance.recip());
        let pos = |i: usize| x[self.local(i)].clone();
        let (alpha, beta) = (self.params.alpha, self.params.beta);
        let (gm_xy, ge_xy) = self.b.factors(&pos, &v, alpha, beta);
        if gm_xy.val() == 0.0 || ge_xy.val() == 0.0 {
            return Ok(None);
        }
        let (gm_yx, ge_yx) = self.a.factors(&pos, &-v, alpha, beta);
        let gamma = gm_xy.clone() * &ge_xy * &gm_yx * &ge_yx * &g.mollifier;
        if gamma.val() == 0.0 {
            return Ok(None);
        }
        let dim = self.mesh.dim;
        let weight = prim_weight(dim, self.mesh.length_scale(self.pair.a), &pts[..self.na])
            * prim_weight(dim, self.mesh.length_scale(self.pair.b), &pts[self.na..]);
        let b = barrier(g.distance.clone(), BarrierSpec { eps: self.eps, p: self.params.p });
        let energy = weight.clone() * &gamma * &b * self.params.kappa;
        Ok(Some(TermValue {
            distance: g.distance,
            factor: [gm_xy, gm_yx, ge_xy, ge_yx, g.mollifier],
            weight,
            barrier: b,
            energy,
        }))
    }
}

impl LocalEnergy for PairEnergy<'_> {
    fn vertices(&self) -> &[usize] {
        &self.verts
    }

    fn eval<T: Real>(&self, x: &[V3<T>]) -> T {
        match self.value(x) {
            Ok(Some(t)) => t.energy,
            _ => T::zero(),
        }
    }
}

/// `L^(n-1-dim) * A` of one primitive: vertices carry only their length
/// scale, edges their length (times L in 3D), faces their area.
fn prim_weight<T: Real>(dim: usize, l: f64, pts: &[V3<T>]) -> T {
    match pts.len() {
        1 => T::cst(l.powi(dim as i32 - 1)),
        2 => (&pts[1] - &pts[0]).norm() * l.powi(dim as i32 - 2),
        _ => (&pts[1] - &pts[0]).cross(&(&pts[2] - &pts[0])).norm() * 0.5,
    }
}

/// Localization radius of a pair: the smaller primitive radius, capped by `eps_trg`.
pub fn pair_eps(mesh: &SurfaceMesh, pair: &ContactPair, params: &PotentialParams) -> f64 {
    mesh.eps_of(pair.a).min(mesh.eps_of(pair.b)).min(params.eps_trg)
}

fn search_radius(mesh: &SurfaceMesh, params: &PotentialParams) -> f64 {
    let all = mesh.vertex_eps.iter().chain(&mesh.edge_eps).chain(&mesh.face_eps);
    all.fold(0.0f64, |m, &e| m.max(e)).min(params.eps_trg)
}

fn active<'a>(mesh: &'a SurfaceMesh, x: &[Vec3], params: &'a PotentialParams) -> Result<Vec<(PairEnergy<'a>, ContactTerm)>> {
    let cands = broad_phase(mesh, x, search_radius(mesh, params));
    let found: Result<Vec<Option<(PairEnergy, ContactTerm)>>> = cands
        .pairs
        .into_par_iter()
        .map(|pair| {
            let pe = PairEnergy::new(mesh, pair, params);
            let xl = ad::local_values(&pe, x);
            Ok(pe.value(&xl)?.map(|t| {
                let [g_m_xy, g_m_yx, g_e_xy, g_e_yx, mollifier] = t.factor;
                let term = ContactTerm {
                    pair,
                    factor: DirectionalFactor { g_m_xy, g_m_yx, g_e_xy, g_e_yx, mollifier },
                    distance: t.distance,
                    eps: pe.eps,
                    barrier: t.barrier,
                    weight: t.weight,
                    energy: t.energy,
                };
                (pe, term)
            }))
        })
        .collect();
    Ok(found?.into_iter().flatten().collect())
}

/// Active terms at the mesh's current positions, sorted by pair.
pub fn collect_terms(mesh: &SurfaceMesh, params: &PotentialParams) -> Result<Vec<ContactTerm>> {
    collect_terms_at(mesh, &mesh.positions, params)
}

/// [`collect_terms`] at explicit positions.
pub fn collect_terms_at(mesh: &SurfaceMesh, x: &[Vec3], params: &PotentialParams) -> Result<Vec<ContactTerm>> {
    Ok(active(mesh, x, params)?.into_iter().map(|(_, t)| t).collect())
}

/// Energy and requested derivatives of the contact potential at `x`.
pub fn assemble(kind: PotentialKind, mesh: &SurfaceMesh, x: &[Vec3], params: &PotentialParams, order: Order) -> Result<Assembly> {
    match kind {
        PotentialKind::Geometric => {
            let (pes, terms): (Vec<_>, Vec<_>) = active(mesh, x, params)?.into_iter().unzip();
            if order == Order::Energy {
                let mut a = Assembly::zeros(x.len() * mesh.dim);
                a.energy = terms.iter().map(|t| t.energy).sum();
                return Ok(a);
            }
            Ok(ad::assemble(&pes, x, mesh.dim, order))
        }
        PotentialKind::Ipc => ipc_assemble(mesh, x, params, order),
    }
}

/// Contact energy at the current positions.
pub fn energy(mesh: &SurfaceMesh, params: &PotentialParams) -> Result<f64> {
    Ok(assemble(PotentialKind::Geometric, mesh, &mesh.positions, params, Order::Energy)?.energy)
}

/// Gradient with respect to the flat vertex coordinates (`dim` per vertex).
pub fn gradient(mesh: &SurfaceMesh, params: &PotentialParams) -> Result<Vec<f64>> {
    Ok(assemble(PotentialKind::Geometric, mesh, &mesh.positions, params, Order::Gradient)?.gradient)
}

/// Sparse symmetric Hessian; `project` clamps each term's block to PSD.
pub fn hessian(mesh: &SurfaceMesh, params: &PotentialParams, project: bool) -> Result<nalgebra_sparse::CscMatrix<f64>> {
    let a = assemble(PotentialKind::Geometric, mesh, &mesh.positions, params, Order::Hessian { project })?;
    Ok(a.hessian.to_csc())
}

/// Normal force magnitude of each term: the derivative of its energy with
/// respect to the pair distance, weight and directional factor held fixed.
pub fn contact_force_magnitudes(terms: &[ContactTerm], params: &PotentialParams) -> Vec<f64> {
    terms
        .iter()
        .map(|t| {
            let spec = BarrierSpec { eps: t.eps, p: params.p };
            (params.kappa * t.weight * t.gamma() * barrier_derivative(t.distance, spec)).abs()
        })
        .collect()
}

/// Shrink per-primitive localization radii so that no pair is active at
/// rest: each vertex takes half the smallest rest distance over pairs with a
/// nonzero directional factor that involve it, edges the minimum of their
/// vertices, faces the minimum of their edges. Radii never exceed `eps_trg`.
pub fn adapt_epsilon(mesh: &mut SurfaceMesh, params: &PotentialParams) -> Result<()> {
    params.validate()?;
    let rest = mesh.rest_positions.clone();
    let mut probe = mesh.clone();
    probe.set_uniform_eps(params.eps_trg);
    probe.positions = rest.clone();
    if let Some(&(i, j)) = intersecting_pairs(&probe).first() {
        return Err(Error::RestInContact(format!("boundary elements {i} and {j} intersect")));
    }
    let cands = broad_phase(&probe, &rest, params.eps_trg);
    let hits: Result<Vec<Option<(Vec<usize>, f64)>>> = cands
        .pairs
        .par_iter()
        .map(|&pair| {
            let pe = PairEnergy::new(&probe, pair, params);
            let xl = ad::local_values(&pe, &rest);
            match pe.value(&xl) {
                Ok(Some(t)) => Ok(Some((pe.verts[..pe.na + pe.nb].to_vec(), t.distance))),
                Ok(None) => Ok(None),
                Err(Error::ZeroDistance(m)) => Err(Error::RestInContact(m)),
                Err(e) => Err(e),
            }
        })
        .collect();
    let mut veps = vec![params.eps_trg; mesh.boundary_vertices.len()];
    for (verts, d) in hits?.into_iter().flatten() {
        for v in verts {
            let bi = mesh.boundary_index[v].expect("pair vertex on the boundary");
            veps[bi] = veps[bi].min(0.5 * d);
        }
    }
    let bidx = |v: usize| mesh.boundary_index[v].unwrap();
    let eeps: Vec<f64> = mesh.boundary_edges.iter().map(|e| veps[bidx(e[0])].min(veps[bidx(e[1])])).collect();
    let feps: Vec<f64> = mesh.face_edges.iter().map(|fe| fe.iter().map(|&e| eeps[e]).fold(f64::INFINITY, f64::min)).collect();
    mesh.vertex_eps = veps;
    mesh.edge_eps = eeps;
    mesh.face_eps = feps;
    Ok(())
}
