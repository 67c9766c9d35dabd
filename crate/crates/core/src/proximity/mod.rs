//! Distances, candidate pairs, continuous collision detection and exact
//! intersection checks between boundary primitives.

mod broad_phase;
mod ccd;
pub mod distance;
mod intersect;

pub use broad_phase::{all_pairs, broad_phase, broad_phase_swept, CandidateSet, ContactPair};
pub use ccd::{ccd_max_step, ccd_max_step_with, CCD_SEPARATION};
pub use distance::{
    closest_edge_edge, closest_point_edge, closest_point_point, closest_point_triangle,
    ClosestPointResult, PairKind, Region,
};
pub use intersect::{intersecting_pairs, intersecting_pairs_at, intersects, intersects_at};

use crate::mesh::{Prim, SurfaceMesh};
use crate::real::Vec3;
use crate::Result;

/// Closest points of a candidate pair at positions `x`.
pub fn pair_closest(mesh: &SurfaceMesh, x: &[Vec3], pair: &ContactPair) -> Result<ClosestPointResult> {
    let va = mesh.prim_vertices(pair.a);
    let vb = mesh.prim_vertices(pair.b);
    match pair.kind {
        PairKind::VV => Ok(closest_point_point(&x[va[0]], &x[vb[0]])),
        PairKind::EV => closest_point_edge(&x[va[0]], [&x[vb[0]], &x[vb[1]]]),
        PairKind::VF => closest_point_triangle(&x[va[0]], [&x[vb[0]], &x[vb[1]], &x[vb[2]]]),
        PairKind::EE => closest_edge_edge([&x[va[0]], &x[va[1]]], [&x[vb[0]], &x[vb[1]]]),
    }
}

/// Smallest distance over the given pairs, `inf` if there are none.
pub fn min_distance(mesh: &SurfaceMesh, pairs: &[ContactPair]) -> Result<f64> {
    let mut m = f64::INFINITY;
    for p in pairs {
        m = m.min(pair_closest(mesh, &mesh.positions, p)?.distance);
    }
    Ok(m)
}

/// Whether two primitives share a mesh vertex.
pub fn shares_vertex(mesh: &SurfaceMesh, a: Prim, b: Prim) -> bool {
    let va = mesh.prim_vertices(a);
    mesh.prim_vertices(b).iter().any(|v| va.contains(v))
}
