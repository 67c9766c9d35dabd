use rayon::prelude::*;

use super::broad_phase::{broad_phase_swept, ContactPair};
use super::distance::{point_segment_dist, point_triangle_dist, segment_segment_dist, PairKind};
use crate::error::{Error, Result};
use crate::mesh::SurfaceMesh;
use crate::real::Vec3;

/// Default minimum-separation factor: each pair keeps at least
/// `(1 - s)` of its starting distance.
pub const CCD_SEPARATION: f64 = 0.2;

const MAX_ITERS: usize = 1000;

fn lerp(x0: &[Vec3], x1: &[Vec3], v: usize, t: f64) -> Vec3 {
    &x0[v] + &(&x1[v] - &x0[v]).scale_f(t)
}

fn pair_dist(kind: PairKind, p: &[Vec3]) -> f64 {
    match kind {
        PairKind::EV => point_segment_dist(&p[0], &p[1], &p[2]),
        PairKind::VF => point_triangle_dist(&p[0], &p[1], &p[2], &p[3]),
        PairKind::EE => segment_segment_dist(&p[0], &p[1], &p[2], &p[3]),
        PairKind::VV => (&p[0] - &p[1]).norm(),
    }
}

/// Conservative advancement for one pair. Returns the largest certified `t`.
fn pair_toi(mesh: &SurfaceMesh, x0: &[Vec3], x1: &[Vec3], pair: &ContactPair, s: f64) -> Result<f64> {
    let va = mesh.prim_vertices(pair.a);
    let vb = mesh.prim_vertices(pair.b);
    let verts: Vec<usize> = va.iter().chain(&vb).copied().collect();
    let na = va.len();
    let disp: Vec<Vec3> = verts.iter().map(|&v| &x1[v] - &x0[v]).collect();
    let mut mean = Vec3::default();
    for d in &disp {
        mean = &mean + d;
    }
    mean = mean.scale_f(1.0 / disp.len() as f64);
    let max_a = disp[..na].iter().map(|d| (d - &mean).norm()).fold(0.0, f64::max);
    let max_b = disp[na..].iter().map(|d| (d - &mean).norm()).fold(0.0, f64::max);
    let lp = max_a + max_b;

    let at = |t: f64| -> Vec<Vec3> { verts.iter().map(|&v| lerp(x0, x1, v, t)).collect() };
    let d0 = pair_dist(pair.kind, &at(0.0));
    if d0 <= 0.0 {
        return Err(Error::ZeroDistance(format!("{:?} {:?}", pair.a, pair.b)));
    }
    if lp == 0.0 {
        return Ok(1.0);
    }
    let d_min = (1.0 - s) * d0;
    let mut t = 0.0;
    let mut d = d0;
    for _ in 0..MAX_ITERS {
        let step = (d - d_min) / lp;
        if step <= 1e-12 * (1.0 + t) {
            return Ok(t);
        }
        t += step;
        if t >= 1.0 {
            return Ok(1.0);
        }
        d = pair_dist(pair.kind, &at(t));
    }
    Ok(t)
}

/// Largest `t <= 1` such that moving every vertex along `x0 + t (x1 - x0)`
/// stays intersection-free and keeps every candidate pair at least
/// `(1 - CCD_SEPARATION)` of its starting distance.
pub fn ccd_max_step(mesh: &SurfaceMesh, x0: &[Vec3], x1: &[Vec3]) -> Result<f64> {
    ccd_max_step_with(mesh, x0, x1, CCD_SEPARATION)
}

/// [`ccd_max_step`] with an explicit separation factor `s` in `[0, 1)`.
pub fn ccd_max_step_with(mesh: &SurfaceMesh, x0: &[Vec3], x1: &[Vec3], s: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&s) {
        return Err(Error::InvalidParameter(format!("ccd separation must lie in [0, 1), got {s}")));
    }
    let kinds: &[PairKind] = if mesh.dim == 2 { &[PairKind::EV] } else { &[PairKind::VF, PairKind::EE] };
    let cands = broad_phase_swept(mesh, x0, x1, 0.0).of_kind(kinds);
    let tois: Result<Vec<f64>> =
        cands.par_iter().map(|p| pair_toi(mesh, x0, x1, p, s)).collect();
    Ok(tois?.into_iter().fold(1.0, f64::min))
}
