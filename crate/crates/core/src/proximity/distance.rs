//! Closest points between points, segments and triangles.
//!
//! The generic routines pick their branch from real parts only, so they can be
//! evaluated with dual numbers to differentiate a distance piecewise.

use crate::error::{Error, Result};
use crate::real::{Real, Vec3, V3};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PairKind {
    VV,
    EV,
    VF,
    EE,
}

/// Which sub-simplex holds the minimizer. Vertex indices count through both
/// primitives in argument order (for edge-edge: A, B, C, D). Triangle edges are
/// numbered AB = 0, BC = 1, CA = 2.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Region {
    Interior,
    BoundaryVertex(usize),
    BoundaryEdge(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClosestPointResult {
    pub kind: PairKind,
    pub point_a: Vec3,
    pub point_b: Vec3,
    pub bary_a: Vec<f64>,
    pub bary_b: Vec<f64>,
    pub distance: f64,
    pub region: Region,
}

/// Parameter `t` of the closest point `a + t (b - a)` on a segment.
pub fn point_segment<T: Real>(p: &V3<T>, a: &V3<T>, b: &V3<T>) -> (T, Region) {
    let ab = b - a;
    let ap = p - a;
    let num = ab.dot(&ap);
    if num.val() <= 0.0 {
        return (T::zero(), Region::BoundaryVertex(0));
    }
    let den = ab.norm_squared();
    if num.val() >= den.val() {
        return (T::one(), Region::BoundaryVertex(1));
    }
    (num / den, Region::Interior)
}

/// Squared distance from a point to a segment.
pub fn point_segment_dist2<T: Real>(p: &V3<T>, a: &V3<T>, b: &V3<T>) -> T {
    let (t, _) = point_segment(p, a, b);
    let q = a + &(b - a).scale(&t);
    (p - &q).norm_squared()
}

/// Barycentric coordinates of the closest point on triangle `abc`.
pub fn point_triangle<T: Real>(p: &V3<T>, a: &V3<T>, b: &V3<T>, c: &V3<T>) -> ([T; 3], Region) {
    let (z, o) = (T::zero(), T::one());
    let ab = b - a;
    let ac = c - a;
    let ap = p - a;
    let d1 = ab.dot(&ap);
    let d2 = ac.dot(&ap);
    if d1.val() <= 0.0 && d2.val() <= 0.0 {
        return ([o, z.clone(), z], Region::BoundaryVertex(0));
    }
    let bp = p - b;
    let d3 = ab.dot(&bp);
    let d4 = ac.dot(&bp);
    if d3.val() >= 0.0 && d4.val() <= d3.val() {
        return ([z.clone(), o, z], Region::BoundaryVertex(1));
    }
    let vc = d1.clone() * &d4 - d3.clone() * &d2;
    if vc.val() <= 0.0 && d1.val() >= 0.0 && d3.val() <= 0.0 {
        let v = d1.clone() / (d1 - d3);
        return ([o - &v, v, z], Region::BoundaryEdge(0));
    }
    let cp = p - c;
    let d5 = ab.dot(&cp);
    let d6 = ac.dot(&cp);
    if d6.val() >= 0.0 && d5.val() <= d6.val() {
        return ([z.clone(), z, o], Region::BoundaryVertex(2));
    }
    let vb = d5.clone() * &d2 - d1.clone() * &d6;
    if vb.val() <= 0.0 && d2.val() >= 0.0 && d6.val() <= 0.0 {
        let w = d2.clone() / (d2 - d6);
        return ([o - &w, z, w], Region::BoundaryEdge(2));
    }
    let va = d3.clone() * &d6 - d5.clone() * &d4;
    let e43 = d4 - d3;
    let e56 = d5 - d6;
    if va.val() <= 0.0 && e43.val() >= 0.0 && e56.val() >= 0.0 {
        let w = e43.clone() / (e43 + e56);
        return ([z, o - &w, w], Region::BoundaryEdge(1));
    }
    let inv = (va + &vb + &vc).recip();
    let v = vb * &inv;
    let w = vc * inv;
    ([o - &v - &w, v, w], Region::Interior)
}

/// Parameters `(s, t)` of the closest points `a + s (b - a)` and
/// `c + t (d - c)` between two segments. Parallel overlapping segments use the
/// midpoint of the overlap interval.
pub fn segment_segment<T: Real>(a: &V3<T>, b: &V3<T>, c: &V3<T>, d: &V3<T>) -> (T, T, Region) {
    let d1 = b - a;
    let d2 = d - c;
    let r = a - c;
    let aa = d1.norm_squared();
    let ee = d2.norm_squared();
    let bb = d1.dot(&d2);
    let cc = d1.dot(&r);
    let ff = d2.dot(&r);
    let denom = aa.clone() * &ee - bb.clone() * &bb;
    let clamp01 = |x: T| {
        if x.val() < 0.0 {
            T::zero()
        } else if x.val() > 1.0 {
            T::one()
        } else {
            x
        }
    };

    let (s, t) = if denom.val() <= 1e-14 * aa.val() * ee.val() {
        // parallel: overlap of the projection of cd onto ab
        let s0 = -(cc.clone()) / &aa;
        let s1 = (d - a).dot(&d1) / &aa;
        let (lo, hi) = if s0.val() <= s1.val() { (s0, s1) } else { (s1, s0) };
        let lo = if lo.val() < 0.0 { T::zero() } else { lo };
        let hi = if hi.val() > 1.0 { T::one() } else { hi };
        if lo.val() <= hi.val() {
            let s = (lo + hi) * 0.5;
            let q = a + &d1.scale(&s);
            let (t, _) = point_segment(&q, c, d);
            (s, t)
        } else {
            return endpoint_min(a, b, c, d);
        }
    } else {
        let mut s = clamp01((bb.clone() * &ff - cc.clone() * &ee) / &denom);
        let mut t = (bb.clone() * &s + &ff) / &ee;
        if t.val() < 0.0 {
            t = T::zero();
            s = clamp01(-(cc) / &aa);
        } else if t.val() > 1.0 {
            t = T::one();
            s = clamp01((bb - cc) / &aa);
        }
        (s, t)
    };
    let region = ee_region(s.val(), t.val());
    (s, t, region)
}

fn ee_region(s: f64, t: f64) -> Region {
    if s <= 0.0 {
        Region::BoundaryVertex(0)
    } else if s >= 1.0 {
        Region::BoundaryVertex(1)
    } else if t <= 0.0 {
        Region::BoundaryVertex(2)
    } else if t >= 1.0 {
        Region::BoundaryVertex(3)
    } else {
        Region::Interior
    }
}

fn endpoint_min<T: Real>(a: &V3<T>, b: &V3<T>, c: &V3<T>, d: &V3<T>) -> (T, T, Region) {
    let cands = [
        (point_segment(a, c, d).0, true, 0.0),
        (point_segment(b, c, d).0, true, 1.0),
        (point_segment(c, a, b).0, false, 0.0),
        (point_segment(d, a, b).0, false, 1.0),
    ];
    let mut best: Option<(f64, T, T)> = None;
    for (u, on_cd, fixed) in cands {
        let (s, t) = if on_cd { (T::cst(fixed), u) } else { (u, T::cst(fixed)) };
        let p = a + &(b - a).scale(&s);
        let q = c + &(d - c).scale(&t);
        let dd = (&p - &q).norm_squared().val();
        if best.as_ref().map_or(true, |b| dd < b.0) {
            best = Some((dd, s, t));
        }
    }
    let (_, s, t) = best.unwrap();
    let region = ee_region(s.val(), t.val());
    (s, t, region)
}

/// Distance between two segments.
pub fn segment_segment_dist<T: Real>(a: &V3<T>, b: &V3<T>, c: &V3<T>, d: &V3<T>) -> T {
    let (s, t, _) = segment_segment(a, b, c, d);
    let p = a + &(b - a).scale(&s);
    let q = c + &(d - c).scale(&t);
    (&p - &q).norm()
}

/// Distance from a point to a triangle.
pub fn point_triangle_dist<T: Real>(p: &V3<T>, a: &V3<T>, b: &V3<T>, c: &V3<T>) -> T {
    let ([u, v, w], _) = point_triangle(p, a, b, c);
    let q = &(&a.scale(&u) + &b.scale(&v)) + &c.scale(&w);
    (p - &q).norm()
}

/// Distance from a point to a segment.
pub fn point_segment_dist<T: Real>(p: &V3<T>, a: &V3<T>, b: &V3<T>) -> T {
    point_segment_dist2(p, a, b).sqrt()
}

fn check_segment(a: &Vec3, b: &Vec3) -> Result<()> {
    if (b - a).norm_squared() == 0.0 {
        return Err(Error::DegenerateElement("zero-length segment".into()));
    }
    Ok(())
}

pub fn closest_point_point(a: &Vec3, b: &Vec3) -> ClosestPointResult {
    ClosestPointResult {
        kind: PairKind::VV,
        point_a: *a,
        point_b: *b,
        bary_a: vec![1.0],
        bary_b: vec![1.0],
        distance: (b - a).norm(),
        region: Region::Interior,
    }
}

/// Closest point on segment `e` to `p`. Region vertex indices: 0 = e[0], 1 = e[1].
pub fn closest_point_edge(p: &Vec3, e: [&Vec3; 2]) -> Result<ClosestPointResult> {
    check_segment(e[0], e[1])?;
    let (t, region) = point_segment(p, e[0], e[1]);
    let q = e[0] + &(e[1] - e[0]).scale(&t);
    Ok(ClosestPointResult {
        kind: PairKind::EV,
        point_a: *p,
        point_b: q,
        bary_a: vec![1.0],
        bary_b: vec![1.0 - t, t],
        distance: (p - &q).norm(),
        region,
    })
}

pub fn closest_point_triangle(p: &Vec3, t: [&Vec3; 3]) -> Result<ClosestPointResult> {
    if (t[1] - t[0]).cross(&(t[2] - t[0])).norm_squared() == 0.0 {
        return Err(Error::DegenerateElement("zero-area triangle".into()));
    }
    let (w, region) = point_triangle(p, t[0], t[1], t[2]);
    let q = &(&t[0].scale(&w[0]) + &t[1].scale(&w[1])) + &t[2].scale(&w[2]);
    Ok(ClosestPointResult {
        kind: PairKind::VF,
        point_a: *p,
        point_b: q,
        bary_a: vec![1.0],
        bary_b: w.to_vec(),
        distance: (p - &q).norm(),
        region,
    })
}

pub fn closest_edge_edge(e1: [&Vec3; 2], e2: [&Vec3; 2]) -> Result<ClosestPointResult> {
    check_segment(e1[0], e1[1])?;
    check_segment(e2[0], e2[1])?;
    let (s, t, region) = segment_segment(e1[0], e1[1], e2[0], e2[1]);
    let p = e1[0] + &(e1[1] - e1[0]).scale(&s);
    let q = e2[0] + &(e2[1] - e2[0]).scale(&t);
    Ok(ClosestPointResult {
        kind: PairKind::EE,
        point_a: p,
        point_b: q,
        bary_a: vec![1.0 - s, s],
        bary_b: vec![1.0 - t, t],
        distance: (&p - &q).norm(),
        region,
    })
}
