//! Exact test of whether a direction points into the material at a vertex
//! of a piecewise-linear surface.

use crate::error::{Error, Result};
use crate::real::Vec3;

#[derive(Clone, Copy, Debug, PartialEq)]
enum Hit {
    Interior,
    Boundary,
    Apex,
}

/// Closest point to `v` on the planar sector spanned by rays `a` and `b`.
fn sector_closest(v: &Vec3, a: &Vec3, b: &Vec3) -> (Vec3, Hit) {
    let n = a.cross(b);
    let nn = n.norm_squared();
    let p = v - &n.scale_f(v.dot(&n) / nn);
    // p = s a + t b
    let s = p.cross(b).dot(&n) / nn;
    let t = a.cross(&p).dot(&n) / nn;
    if s > 0.0 && t > 0.0 {
        return (p, Hit::Interior);
    }
    let ray = |e: &Vec3| {
        let w = (v.dot(e) / e.norm_squared()).max(0.0);
        e.scale_f(w)
    };
    let (pa, pb) = (ray(a), ray(b));
    let q = if (v - &pa).norm_squared() <= (v - &pb).norm_squared() { pa } else { pb };
    if q.norm_squared() == 0.0 {
        (q, Hit::Apex)
    } else {
        (q, Hit::Boundary)
    }
}

fn project(a: &Vec3, b: &Vec3) -> Vec3 {
    let p = a - &b.scale_f(a.dot(b) / b.norm_squared());
    p.scale_f(1.0 / p.norm())
}

/// Whether `v` points into the material at a vertex whose one-ring edge
/// vectors are `edges` (face `i` spans `edges[i-1]`, `edges[i]`) and whose
/// face normals satisfy `(e[i-1] x e[i]) . n[i] > 0`. The normals are
/// outward. When the apex is the closest surface point to `v`, the test
/// is decided by another direction of the open hemisphere around `v`.
pub fn determine_inside_3d(v: &Vec3, edges: &[Vec3], normals: &[Vec3]) -> Result<bool> {
    let m = edges.len();
    if m < 3 || normals.len() != m {
        return Err(Error::InvalidParameter("vertex ring needs >= 3 edges and one normal per face".into()));
    }
    for i in 0..m {
        let a = &edges[(i + m - 1) % m];
        let b = &edges[i];
        if a.cross(b).norm() <= 1e-14 * a.norm() * b.norm() {
            return Err(Error::DegenerateElement(format!("ring edges {} and {i} are parallel", (i + m - 1) % m)));
        }
    }
    Ok(inside_rec(v, edges, normals, 0))
}

fn inside_rec(v: &Vec3, edges: &[Vec3], normals: &[Vec3], depth: usize) -> bool {
    let m = edges.len();
    let mut best = (f64::INFINITY, Hit::Apex, 0usize);
    for i in 0..m {
        let (p, hit) = sector_closest(v, &edges[(i + m - 1) % m], &edges[i]);
        let d = (v - &p).norm_squared();
        if d < best.0 {
            best = (d, hit, i);
        }
    }
    let (_, hit, j) = best;
    match hit {
        Hit::Apex => {
            let n0 = normals[0].scale_f(1.0 / normals[0].norm());
            let coplanar = normals.iter().all(|n| (n.scale_f(1.0 / n.norm()) - n0).norm() < 1e-12);
            if coplanar || depth > 0 {
                return -v.dot(&n0) > 0.0;
            }
            // Every ring edge satisfies v . e <= 0, so the whole cone surface
            // lies in the closed half-space opposite to v and the open
            // hemisphere around v is on one side of it. Classify a direction
            // of that hemisphere whose closest surface point is not the apex.
            // (Testing -v instead is only valid when the ring winds around -v.)
            let (k, perp) = edges
                .iter()
                .map(|e| e - &v.scale_f(v.dot(e)))
                .enumerate()
                .max_by(|a, b| {
                    let ra = a.1.norm() / edges[a.0].norm();
                    let rb = b.1.norm() / edges[b.0].norm();
                    ra.total_cmp(&rb)
                })
                .unwrap();
            let e = &edges[k];
            let along = -v.dot(e);
            let tan = perp.norm() / along.max(1e-300);
            let eps = 0.5 * tan.min(1.0);
            let u = &v.scale_f(eps) + &perp.scale_f(1.0 / perp.norm());
            inside_rec(&u.scale_f(1.0 / u.norm()), edges, normals, depth + 1)
        }
        Hit::Interior => -v.dot(&normals[j]) > 0.0,
        Hit::Boundary => {
            let mut jb = 0;
            let mut db = f64::INFINITY;
            for (i, e) in edges.iter().enumerate() {
                let w = (v.dot(e) / e.norm_squared()).max(0.0);
                let d = (v - &e.scale_f(w)).norm();
                if d < db {
                    db = d;
                    jb = i;
                }
            }
            let ej = &edges[jb];
            let e1 = project(&edges[(jb + m - 1) % m], ej);
            let e2 = project(&edges[(jb + 1) % m], ej);
            let vt = project(v, ej);
            (&vt - &e1).cross(&(&vt - &e2)).dot(ej) < 0.0
        }
    }
}
