use crate::mesh::SurfaceMesh;
use crate::real::Vec3;

use robust::{orient2d, orient3d, Coord, Coord3D};

// Exact orientation signs: rounded positions of coplanar or collinear
// elements must not produce spurious crossings.
fn orient2(a: &Vec3, b: &Vec3, c: &Vec3) -> f64 {
    let p = |v: &Vec3| Coord { x: v.x, y: v.y };
    orient2d(p(a), p(b), p(c))
}

fn on_segment2(a: &Vec3, b: &Vec3, p: &Vec3) -> bool {
    p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
}

/// Closed segment-segment intersection in the plane.
pub(crate) fn segments_intersect_2d(a: &Vec3, b: &Vec3, c: &Vec3, d: &Vec3) -> bool {
    let d1 = orient2(c, d, a);
    let d2 = orient2(c, d, b);
    let d3 = orient2(a, b, c);
    let d4 = orient2(a, b, d);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    (d1 == 0.0 && on_segment2(c, d, a))
        || (d2 == 0.0 && on_segment2(c, d, b))
        || (d3 == 0.0 && on_segment2(a, b, c))
        || (d4 == 0.0 && on_segment2(a, b, d))
}

fn orient3(a: &Vec3, b: &Vec3, c: &Vec3, d: &Vec3) -> f64 {
    let p = |v: &Vec3| Coord3D { x: v.x, y: v.y, z: v.z };
    orient3d(p(a), p(b), p(c), p(d))
}

/// Closed segment-triangle intersection (non-coplanar configurations, plus
/// touching contact).
pub(crate) fn segment_triangle_intersect(p: &Vec3, q: &Vec3, a: &Vec3, b: &Vec3, c: &Vec3) -> bool {
    let sp = orient3(a, b, c, p);
    let sq = orient3(a, b, c, q);
    if (sp > 0.0 && sq > 0.0) || (sp < 0.0 && sq < 0.0) {
        return false;
    }
    if sp == 0.0 && sq == 0.0 {
        // coplanar: intersect the segment with the triangle edges in the plane
        let n = (b - a).cross(&(c - a));
        let axis = if n.x.abs() >= n.y.abs() && n.x.abs() >= n.z.abs() {
            0
        } else if n.y.abs() >= n.z.abs() {
            1
        } else {
            2
        };
        let proj = |v: &Vec3| match axis {
            0 => Vec3::new(v.y, v.z, 0.0),
            1 => Vec3::new(v.z, v.x, 0.0),
            _ => Vec3::new(v.x, v.y, 0.0),
        };
        let (p2, q2, a2, b2, c2) = (proj(p), proj(q), proj(a), proj(b), proj(c));
        let inside = |x: &Vec3| {
            let o1 = orient2(&a2, &b2, x);
            let o2 = orient2(&b2, &c2, x);
            let o3 = orient2(&c2, &a2, x);
            (o1 >= 0.0 && o2 >= 0.0 && o3 >= 0.0) || (o1 <= 0.0 && o2 <= 0.0 && o3 <= 0.0)
        };
        return inside(&p2)
            || inside(&q2)
            || segments_intersect_2d(&p2, &q2, &a2, &b2)
            || segments_intersect_2d(&p2, &q2, &b2, &c2)
            || segments_intersect_2d(&p2, &q2, &c2, &a2);
    }
    let s1 = orient3(p, q, a, b);
    let s2 = orient3(p, q, b, c);
    let s3 = orient3(p, q, c, a);
    (s1 >= 0.0 && s2 >= 0.0 && s3 >= 0.0) || (s1 <= 0.0 && s2 <= 0.0 && s3 <= 0.0)
}

fn faces_intersect(x: &[Vec3], f: &[usize; 3], g: &[usize; 3]) -> bool {
    for k in 0..3 {
        let (p, q) = (&x[f[k]], &x[f[(k + 1) % 3]]);
        if segment_triangle_intersect(p, q, &x[g[0]], &x[g[1]], &x[g[2]]) {
            return true;
        }
        let (p, q) = (&x[g[k]], &x[g[(k + 1) % 3]]);
        if segment_triangle_intersect(p, q, &x[f[0]], &x[f[1]], &x[f[2]]) {
            return true;
        }
    }
    false
}

/// Non-adjacent boundary element pairs (edges in 2D, faces in 3D) that
/// intersect at the current positions.
pub fn intersecting_pairs(mesh: &SurfaceMesh) -> Vec<(usize, usize)> {
    intersecting_pairs_at(mesh, &mesh.positions)
}

/// [`intersecting_pairs`] at explicit positions.
pub fn intersecting_pairs_at(mesh: &SurfaceMesh, x: &[Vec3]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    if mesh.dim == 2 {
        let edges = &mesh.boundary_edges;
        let cands = element_candidates(x, edges.len(), |i| edges[i].to_vec());
        for (i, j) in cands {
            let (e, f) = (edges[i], edges[j]);
            if e.iter().any(|v| f.contains(v)) {
                continue;
            }
            if segments_intersect_2d(&x[e[0]], &x[e[1]], &x[f[0]], &x[f[1]]) {
                out.push((i, j));
            }
        }
    } else {
        let faces = &mesh.boundary_faces;
        let cands = element_candidates(x, faces.len(), |i| faces[i].to_vec());
        for (i, j) in cands {
            let (f, g) = (faces[i], faces[j]);
            if f.iter().any(|v| g.contains(v)) {
                continue;
            }
            if faces_intersect(x, &f, &g) {
                out.push((i, j));
            }
        }
    }
    out
}

fn element_candidates(x: &[Vec3], n: usize, verts: impl Fn(usize) -> Vec<usize>) -> Vec<(usize, usize)> {
    // sweep and prune on x
    let boxes: Vec<(Vec3, Vec3)> = (0..n)
        .map(|i| {
            let vs = verts(i);
            let mut lo = x[vs[0]];
            let mut hi = x[vs[0]];
            for &v in &vs[1..] {
                lo = lo.min_comp(&x[v]);
                hi = hi.max_comp(&x[v]);
            }
            (lo, hi)
        })
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| boxes[a].0.x.total_cmp(&boxes[b].0.x));
    let mut out = Vec::new();
    for (k, &i) in order.iter().enumerate() {
        for &j in &order[k + 1..] {
            if boxes[j].0.x > boxes[i].1.x {
                break;
            }
            let (a, b) = (&boxes[i], &boxes[j]);
            if a.0.y <= b.1.y && b.0.y <= a.1.y && a.0.z <= b.1.z && b.0.z <= a.1.z {
                out.push((i.min(j), i.max(j)));
            }
        }
    }
    out.sort_unstable();
    out
}

/// Whether any two non-adjacent boundary elements intersect.
pub fn intersects(mesh: &SurfaceMesh) -> bool {
    !intersecting_pairs(mesh).is_empty()
}

/// [`intersects`] at explicit positions.
pub fn intersects_at(mesh: &SurfaceMesh, x: &[Vec3]) -> bool {
    !intersecting_pairs_at(mesh, x).is_empty()
}
