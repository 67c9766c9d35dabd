//! Unfiltered log-barrier baseline used for comparisons.

use rayon::prelude::*;

use crate::ad::{self, Assembly, LocalEnergy, Order};
use crate::error::{Error, Result};
use crate::kernels::ipc_barrier;
use crate::mesh::{PotentialParams, SurfaceMesh};
use crate::proximity::distance::{point_segment_dist, point_triangle_dist, segment_segment_dist};
use crate::proximity::{broad_phase, ContactPair, PairKind};
use crate::real::{Real, Vec3, V3};

/// One active baseline term.
#[derive(Clone, Debug, PartialEq)]
pub struct IpcTerm {
    pub pair: ContactPair,
    pub distance: f64,
    /// `kappa * ipc_barrier(distance, dhat)`.
    pub energy: f64,
}

struct PairDistance {
    kind: PairKind,
    verts: Vec<usize>,
    dhat: f64,
    kappa: f64,
}

fn distance<T: Real>(kind: PairKind, x: &[V3<T>]) -> T {
    match kind {
        PairKind::EV => point_segment_dist(&x[0], &x[1], &x[2]),
        PairKind::VF => point_triangle_dist(&x[0], &x[1], &x[2], &x[3]),
        PairKind::EE => segment_segment_dist(&x[0], &x[1], &x[2], &x[3]),
        PairKind::VV => (&x[1] - &x[0]).norm(),
    }
}

impl LocalEnergy for PairDistance {
    fn vertices(&self) -> &[usize] {
        &self.verts
    }

    fn eval<T: Real>(&self, x: &[V3<T>]) -> T {
        let d = distance(self.kind, x);
        if d.val() <= 0.0 || d.val() >= self.dhat {
            return T::zero();
        }
        ipc_barrier(d, self.dhat) * self.kappa
    }
}

fn active(mesh: &SurfaceMesh, x: &[Vec3], params: &PotentialParams) -> Result<Vec<(PairDistance, IpcTerm)>> {
    let dhat = params.eps_trg;
    let kinds: &[PairKind] = if mesh.dim == 2 { &[PairKind::EV] } else { &[PairKind::VF, PairKind::EE] };
    let found: Result<Vec<_>> = broad_phase(mesh, x, dhat)
        .of_kind(kinds)
        .into_par_iter()
        .map(|pair| {
            let mut verts = mesh.prim_vertices(pair.a);
            verts.extend(mesh.prim_vertices(pair.b));
            let pd = PairDistance { kind: pair.kind, verts, dhat, kappa: params.kappa };
            let d = distance(pair.kind, &ad::local_values(&pd, x));
            if d <= 0.0 {
                return Err(Error::ZeroDistance(format!("{pair:?}")));
            }
            if d >= dhat {
                return Ok(None);
            }
            let energy = pd.eval(&ad::local_values(&pd, x));
            Ok(Some((pd, IpcTerm { pair, distance: d, energy })))
        })
        .collect();
    Ok(found?.into_iter().flatten().collect())
}

/// Active baseline terms at `x` with `dhat = eps_trg`.
pub fn ipc_terms(mesh: &SurfaceMesh, x: &[Vec3], params: &PotentialParams) -> Result<Vec<IpcTerm>> {
    Ok(active(mesh, x, params)?.into_iter().map(|(_, t)| t).collect())
}

/// Baseline energy at `x`.
pub fn ipc_energy(mesh: &SurfaceMesh, x: &[Vec3], params: &PotentialParams) -> Result<f64> {
    Ok(ipc_terms(mesh, x, params)?.iter().map(|t| t.energy).sum())
}

pub fn ipc_assemble(mesh: &SurfaceMesh, x: &[Vec3], params: &PotentialParams, order: Order) -> Result<Assembly> {
    let (pds, terms): (Vec<_>, Vec<_>) = active(mesh, x, params)?.into_iter().unzip();
    if order == Order::Energy {
        let mut a = Assembly::zeros(x.len() * mesh.dim);
        a.energy = terms.iter().map(|t| t.energy).sum();
        return Ok(a);
    }
    Ok(ad::assemble(&pds, x, mesh.dim, order))
}
