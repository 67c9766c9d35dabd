//! Directional factor of a contact pair: local-minimum and exterior-direction
//! tests on both sides, times the closest-point mollifier.

mod cone;

pub use cone::determine_inside_3d;

use crate::error::{Error, Result};
use crate::kernels::{heaviside, mollify_h};
use crate::mesh::{PotentialParams, Prim, SurfaceMesh};
use crate::proximity::distance::{point_segment_dist, point_segment_dist2};
use crate::proximity::{ContactPair, PairKind};
use crate::real::{Real, Vec3, V3};

/// Smooth step that is 0 for `z <= -w` and 1 for `z >= 0`.
#[inline]
pub fn filter_step<T: Real>(z: T, w: f64) -> T {
    heaviside(z, w / 3.0)
}

/// Constrained tangent directions at a point of a primitive, grouped by
/// incident patch.
#[derive(Clone, Debug, PartialEq)]
pub struct TangentFrame {
    pub groups: Vec<Vec<Vec3>>,
}

impl TangentFrame {
    pub fn directions(&self) -> impl Iterator<Item = &Vec3> {
        self.groups.iter().flatten()
    }
}

/// Decomposed directional factor of one pair. `*_xy` factors are evaluated
/// with the frame of the second primitive, `*_yx` with the first.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DirectionalFactor {
    pub g_m_xy: f64,
    pub g_m_yx: f64,
    pub g_e_xy: f64,
    pub g_e_yx: f64,
    pub mollifier: f64,
}

impl DirectionalFactor {
    pub fn gamma(&self) -> f64 {
        self.g_m_xy * self.g_e_xy * self.g_m_yx * self.g_e_yx * self.mollifier
    }

    pub fn zero() -> Self {
        Self { g_m_xy: 0.0, g_m_yx: 0.0, g_e_xy: 0.0, g_e_yx: 0.0, mollifier: 0.0 }
    }
}

/// Local geometry of one side of a pair, as global vertex ids.
#[derive(Clone, Debug, PartialEq)]
pub enum Side {
    /// 2D boundary vertex with its boundary neighbors (material on the left
    /// walking `prev -> v -> next`).
    Vertex2 { v: usize, prev: usize, next: usize },
    /// 3D boundary vertex; faces `(v, ring[i], ring[i+1])` are outward oriented.
    Vertex3 { v: usize, ring: Vec<usize> },
    /// 2D boundary edge `a -> b`, material on the left.
    Edge2 { a: usize, b: usize },
    /// 3D boundary edge; face `(a, b, o1)` and face `(b, a, o2)` are incident.
    Edge3 { a: usize, b: usize, o1: usize, o2: usize },
    /// 3D boundary face, outward oriented.
    Face3 { a: usize, b: usize, c: usize },
}

impl Side {
    pub fn of(mesh: &SurfaceMesh, p: Prim) -> Side {
        match (mesh.dim, p) {
            (2, Prim::Vertex(i)) => Side::Vertex2 {
                v: mesh.boundary_vertices[i],
                prev: mesh.rings[i][0],
                next: mesh.rings[i][1],
            },
            (_, Prim::Vertex(i)) => Side::Vertex3 { v: mesh.boundary_vertices[i], ring: mesh.rings[i].clone() },
            (2, Prim::Edge(i)) => {
                let [a, b] = mesh.boundary_edges[i];
                Side::Edge2 { a, b }
            }
            (_, Prim::Edge(i)) => {
                let [a, b] = mesh.boundary_edges[i];
                let [f1, f2] = mesh.edge_faces[i];
                let third = |f: usize| *mesh.boundary_faces[f].iter().find(|&&x| x != a && x != b).unwrap();
                Side::Edge3 { a, b, o1: third(f1), o2: third(f2) }
            }
            (_, Prim::Face(i)) => {
                let [a, b, c] = mesh.boundary_faces[i];
                Side::Face3 { a, b, c }
            }
        }
    }

    /// Every vertex the side's factors depend on, primitive vertices first.
    pub fn vertices(&self) -> Vec<usize> {
        match self {
            Side::Vertex2 { v, prev, next } => vec![*v, *prev, *next],
            Side::Vertex3 { v, ring } => std::iter::once(*v).chain(ring.iter().copied()).collect(),
            Side::Edge2 { a, b } => vec![*a, *b],
            Side::Edge3 { a, b, o1, o2 } => vec![*a, *b, *o1, *o2],
            Side::Face3 { a, b, c } => vec![*a, *b, *c],
        }
    }

    /// Constrained directions under the closest-point simplification: along-edge
    /// tangents of edge points and all face tangents of face points drop out.
    pub fn frame<T: Real>(&self, x: &impl Fn(usize) -> V3<T>) -> Vec<Vec<V3<T>>> {
        match self {
            Side::Vertex2 { v, prev, next } => {
                let y = x(*v);
                vec![vec![(&x(*prev) - &y).normalized(), (&x(*next) - &y).normalized()]]
            }
            Side::Vertex3 { v, ring } => {
                let y = x(*v);
                let m = ring.len();
                (0..m)
                    .map(|i| {
                        let t1 = (&x(ring[i]) - &y).normalized();
                        let t2 = (&x(ring[(i + 1) % m]) - &y).normalized();
                        let t3 = (&t1 + &t2).normalized();
                        vec![t1, t2, t3]
                    })
                    .collect()
            }
            Side::Edge2 { .. } | Side::Face3 { .. } => Vec::new(),
            Side::Edge3 { a, b, o1, o2 } => {
                let (pa, pb) = (x(*a), x(*b));
                let u = (&pb - &pa).normalized();
                vec![vec![inward_perp(&u, &(&x(*o1) - &pa))], vec![inward_perp(&u, &(&x(*o2) - &pa))]]
            }
        }
    }

    /// `(g^m, g^e)` of this side for separation direction `v` (unit, pointing
    /// from the other side's point to this side's point).
    pub fn factors<T: Real>(&self, x: &impl Fn(usize) -> V3<T>, v: &V3<T>, alpha: f64, beta: f64) -> (T, T) {
        let mut gm = T::one();
        for t in self.frame(x).iter().flatten() {
            gm = gm * filter_step(t.dot(v), alpha);
            if gm.val() == 0.0 {
                break;
            }
        }
        let ge = match self {
            Side::Vertex2 { v: y, prev, next } => {
                let py = x(*y);
                let e1 = (&x(*prev) - &py).normalized();
                let e2 = (&x(*next) - &py).normalized();
                filter_step(phi_e_2d(v, &e1, &e2), beta)
            }
            Side::Vertex3 { v: y, ring } => {
                let py = x(*y);
                let m = ring.len();
                let normals: Vec<V3<T>> = (0..m)
                    .map(|i| (&x(ring[i]) - &py).cross(&(&x(ring[(i + 1) % m]) - &py)).normalized())
                    .collect();
                g_e_vertex(v, &normals, beta)
            }
            Side::Edge2 { a, b } => {
                let d = &x(*b) - &x(*a);
                let n = V3::new(d.y.clone(), -d.x.clone(), T::zero()).normalized();
                filter_step(-n.dot(v), beta)
            }
            Side::Edge3 { a, b, o1, o2 } => {
                let (pa, pb) = (x(*a), x(*b));
                let u = (&pb - &pa).normalized();
                let e1 = inward_perp(&u, &(&x(*o1) - &pa));
                let e2 = inward_perp(&u, &(&x(*o2) - &pa));
                filter_step(phi_e_edge_3d(v, &u, &e1, &e2), beta)
            }
            Side::Face3 { a, b, c } => {
                let pa = x(*a);
                let n = (&x(*b) - &pa).cross(&(&x(*c) - &pa)).normalized();
                filter_step(-n.dot(v), beta)
            }
        };
        (gm, ge)
    }
}

/// Unit component of `w` perpendicular to unit `u`.
fn inward_perp<T: Real>(u: &V3<T>, w: &V3<T>) -> V3<T> {
    (w - &u.scale(&u.dot(w))).normalized()
}

/// Tangent frame at a point of a primitive. Vertices report every incident
/// patch direction; edge points report both along-edge directions plus the
/// in-face inward perpendicular per face; face points report none.
pub fn tangent_frame(mesh: &SurfaceMesh, prim: Prim, point: &Vec3) -> Result<TangentFrame> {
    let x = |i: usize| mesh.positions[i];
    let vs = mesh.prim_vertices(prim);
    let on = match prim {
        Prim::Vertex(_) => (point - &x(vs[0])).norm(),
        Prim::Edge(_) => point_segment_dist(point, &x(vs[0]), &x(vs[1])),
        Prim::Face(_) => crate::proximity::distance::point_triangle_dist(point, &x(vs[0]), &x(vs[1]), &x(vs[2])),
    };
    let scale = vs.iter().map(|&v| x(v).max_abs()).fold(1.0, f64::max);
    if on > 1e-9 * scale {
        return Err(Error::InvalidParameter(format!("point is {on:e} away from {prim:?}")));
    }
    // a point on a vertex of an edge or face takes that vertex's frame
    if !matches!(prim, Prim::Vertex(_)) {
        if let Some(&v) = vs.iter().find(|&&v| (point - &x(v)).norm() <= 1e-12 * scale) {
            let bi = mesh.boundary_index[v].unwrap();
            return tangent_frame(mesh, Prim::Vertex(bi), point);
        }
    }
    let side = Side::of(mesh, prim);
    let mut groups = side.frame(&x);
    if let Side::Edge3 { a, b, .. } = side {
        let u = (&x(b) - &x(a)).normalized();
        for g in groups.iter_mut() {
            g.insert(0, u.scale_f(-1.0));
            g.insert(0, u);
        }
    }
    if let Side::Edge2 { a, b } = side {
        let u = (&x(b) - &x(a)).normalized();
        groups = vec![vec![u], vec![u.scale_f(-1.0)]];
    }
    Ok(TangentFrame { groups })
}

/// Product of `filter_step(t . v, alpha)` over every frame direction.
pub fn g_m(frame: &TangentFrame, v: &Vec3, alpha: f64) -> f64 {
    frame.directions().map(|t| filter_step(t.dot(v), alpha)).product()
}

/// Planar exterior-direction function `(v - e1) x (v - e2)`; positive iff `v`
/// points strictly into the material bounded by unit rays `e1`, `e2`.
pub fn phi_e_2d<T: Real>(v: &V3<T>, e1: &V3<T>, e2: &V3<T>) -> T {
    let a = v - e1;
    let b = v - e2;
    a.x.clone() * &b.y - a.y.clone() * &b.x
}

/// Exterior-direction function at an interior point of a 3D edge with unit
/// direction `u` and in-face inward perpendiculars `e1`, `e2` (the first from
/// the face traversing the edge along `u`). Returns 1 when `v` is parallel to
/// the edge.
pub fn phi_e_edge_3d<T: Real>(v: &V3<T>, u: &V3<T>, e1: &V3<T>, e2: &V3<T>) -> T {
    let w = v - &u.scale(&u.dot(v));
    if w.norm().val() < 1e-10 {
        return T::one();
    }
    let vt = w.normalized();
    (&vt - e1).cross(&(&vt - e2)).dot(u)
}

/// Mollified exterior test at a vertex: 1 if `v` points against any outward
/// normal, 0 if it has dot product at least `beta` with all of them.
pub fn g_e_vertex<T: Real>(v: &V3<T>, normals: &[V3<T>], beta: f64) -> T {
    let mut s = T::cst(-1.0);
    for n in normals {
        s = s + filter_step(-n.dot(v), beta);
    }
    filter_step(s, 1.0)
}

/// `filter_step(phi_e_edge_3d(..), beta)`.
pub fn g_e_edge<T: Real>(v: &V3<T>, u: &V3<T>, e1: &V3<T>, e2: &V3<T>, beta: f64) -> T {
    filter_step(phi_e_edge_3d(v, u, e1, e2), beta)
}

/// `filter_step(phi_e_2d(..), beta)` for a 2D boundary vertex.
pub fn g_e_vertex_2d<T: Real>(v: &V3<T>, e1: &V3<T>, e2: &V3<T>, beta: f64) -> T {
    filter_step(phi_e_2d(v, e1, e2), beta)
}

/// Closest-point geometry of a pair whose closest points are interior to both
/// primitives.
pub struct PairGeometry<T> {
    pub distance: T,
    /// Closest point on the first primitive.
    pub p: V3<T>,
    /// Closest point on the second primitive.
    pub q: V3<T>,
    pub mollifier: T,
}

/// `h_c(|y - p| / d)` for a point `y` whose offset from the closest point `p`
/// splits into the normal part (squared length `d2`) and an in-plane part
/// (squared length `delta2`). Written as `r^2 / (sqrt(1 + r^2) + 1)` to avoid
/// the cancellation in `|y - p| / d - 1` when `y` is near `p`.
fn mollify_offset<T: Real>(delta2: T, d2: &T, c: f64) -> T {
    let r2 = delta2 / d2;
    let excess = r2.clone() / ((r2 + 1.0).sqrt() + 1.0);
    mollify_h(excess * c.recip())
}

/// Closest points and mollifier of a pair given its primitive vertices in
/// order (first primitive, then second). Returns `None` when a closest point
/// lies on a sub-simplex boundary, where the mollifier vanishes.
pub fn pair_geometry<T: Real>(kind: PairKind, pts: &[V3<T>], c: f64) -> Option<PairGeometry<T>> {
    match kind {
        PairKind::VV => {
            let d = (&pts[1] - &pts[0]).norm();
            Some(PairGeometry { distance: d, p: pts[0].clone(), q: pts[1].clone(), mollifier: T::one() })
        }
        PairKind::EV => {
            let (p, a, b) = (&pts[0], &pts[1], &pts[2]);
            let ab = b - a;
            let t = ab.dot(&(p - a)) / ab.norm_squared();
            if t.val() <= 0.0 || t.val() >= 1.0 {
                return None;
            }
            let q = a + &ab.scale(&t);
            let d2 = (p - &q).norm_squared();
            let ab2 = ab.norm_squared();
            let s = T::one() - &t;
            let m = mollify_offset(ab2.clone() * &t * &t, &d2, c) * mollify_offset(ab2 * &s * &s, &d2, c);
            Some(PairGeometry { distance: d2.sqrt(), p: p.clone(), q, mollifier: m })
        }
        PairKind::VF => {
            let (p, a, b, cc) = (&pts[0], &pts[1], &pts[2], &pts[3]);
            let n = (b - a).cross(&(cc - a));
            let nn = n.norm_squared();
            let q = p - &n.scale(&(n.dot(&(p - a)) / &nn));
            let w_a = (b - &q).cross(&(cc - &q)).dot(&n) / &nn;
            let w_b = (cc - &q).cross(&(a - &q)).dot(&n) / &nn;
            let w_c = T::one() - &w_a - &w_b;
            if w_a.val() <= 0.0 || w_b.val() <= 0.0 || w_c.val() <= 0.0 {
                return None;
            }
            let d2 = (p - &q).norm_squared();
            let m = mollify_offset(point_segment_dist2(&q, a, b), &d2, c)
                * mollify_offset(point_segment_dist2(&q, b, cc), &d2, c)
                * mollify_offset(point_segment_dist2(&q, cc, a), &d2, c);
            Some(PairGeometry { distance: d2.sqrt(), p: p.clone(), q, mollifier: m })
        }
        PairKind::EE => {
            let (a, b, cc, dd) = (&pts[0], &pts[1], &pts[2], &pts[3]);
            let d1 = b - a;
            let d2 = dd - cc;
            let r = a - cc;
            let aa = d1.norm_squared();
            let ee = d2.norm_squared();
            let bb = d1.dot(&d2);
            let cr = d1.dot(&r);
            let fr = d2.dot(&r);
            let den = aa.clone() * &ee - bb.clone() * &bb;
            if den.val() <= 1e-14 * aa.val() * ee.val() {
                return None;
            }
            let s = (bb.clone() * &fr - cr.clone() * &ee) / &den;
            let t = (aa * &fr - bb * &cr) / &den;
            if s.val() <= 0.0 || s.val() >= 1.0 || t.val() <= 0.0 || t.val() >= 1.0 {
                return None;
            }
            let p = a + &d1.scale(&s);
            let q = cc + &d2.scale(&t);
            // shifting by the normal offset puts both segments in one plane
            let n = &p - &q;
            let d2 = n.norm_squared();
            let m = mollify_offset(point_segment_dist2(&(b - &n), cc, dd), &d2, c)
                * mollify_offset(point_segment_dist2(&(a - &n), cc, dd), &d2, c)
                * mollify_offset(point_segment_dist2(&(cc + &n), a, b), &d2, c)
                * mollify_offset(point_segment_dist2(&(dd + &n), a, b), &d2, c);
            Some(PairGeometry { distance: d2.sqrt(), p, q, mollifier: m })
        }
    }
}

/// Closest-point mollifier `M` of a pair with primitive vertices `pts`
/// (first primitive, then second). Zero-distance pairs are an error.
pub fn mollifier_m(kind: PairKind, pts: &[Vec3], c: f64) -> Result<f64> {
    let dist = match kind {
        PairKind::VV => (pts[1] - pts[0]).norm(),
        PairKind::EV => point_segment_dist(&pts[0], &pts[1], &pts[2]),
        PairKind::VF => crate::proximity::distance::point_triangle_dist(&pts[0], &pts[1], &pts[2], &pts[3]),
        PairKind::EE => crate::proximity::distance::segment_segment_dist(&pts[0], &pts[1], &pts[2], &pts[3]),
    };
    if dist <= 0.0 {
        return Err(Error::ZeroDistance(format!("{kind:?} mollifier")));
    }
    Ok(pair_geometry(kind, pts, c).map_or(0.0, |g| g.mollifier))
}

/// Full directional factor of a pair at the mesh's current positions.
pub fn gamma_ps(mesh: &SurfaceMesh, pair: &ContactPair, params: &PotentialParams) -> Result<DirectionalFactor> {
    gamma_ps_at(mesh, &mesh.positions, pair, params)
}

/// [`gamma_ps`] at explicit positions.
pub fn gamma_ps_at(mesh: &SurfaceMesh, x: &[Vec3], pair: &ContactPair, params: &PotentialParams) -> Result<DirectionalFactor> {
    let mut pts: Vec<Vec3> = mesh.prim_vertices(pair.a).into_iter().map(|v| x[v]).collect();
    pts.extend(mesh.prim_vertices(pair.b).into_iter().map(|v| x[v]));
    let m = mollifier_m(pair.kind, &pts, params.c)?;
    let Some(g) = pair_geometry(pair.kind, &pts, params.c) else {
        return Ok(DirectionalFactor { mollifier: m, ..DirectionalFactor::zero() });
    };
    let v = (&g.q - &g.p).scale_f(1.0 / g.distance);
    let pos = |i: usize| x[i];
    let (g_m_xy, g_e_xy) = Side::of(mesh, pair.b).factors(&pos, &v, params.alpha, params.beta);
    let (g_m_yx, g_e_yx) = Side::of(mesh, pair.a).factors(&pos, &v.scale_f(-1.0), params.alpha, params.beta);
    Ok(DirectionalFactor { g_m_xy, g_m_yx, g_e_xy, g_e_yx, mollifier: g.mollifier })
}
