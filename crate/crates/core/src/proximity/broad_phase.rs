use std::collections::HashMap;

use super::distance::PairKind;
use crate::mesh::{Prim, SurfaceMesh};
use crate::real::Vec3;

/// A non-adjacent pair of boundary primitives. The lower-dimensional
/// primitive comes first; same-type pairs are ordered by index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ContactPair {
    pub kind: PairKind,
    pub a: Prim,
    pub b: Prim,
}

impl ContactPair {
    /// Canonical pair for two primitives, or `None` for combinations that are
    /// not contact pairs in a `dim`-dimensional scene.
    pub fn new(dim: usize, p: Prim, q: Prim) -> Option<Self> {
        let (a, b) = if (p.dim(), p.index()) <= (q.dim(), q.index()) { (p, q) } else { (q, p) };
        let kind = match (a, b) {
            (Prim::Vertex(_), Prim::Vertex(_)) => PairKind::VV,
            (Prim::Vertex(_), Prim::Edge(_)) => PairKind::EV,
            (Prim::Vertex(_), Prim::Face(_)) if dim == 3 => PairKind::VF,
            (Prim::Edge(_), Prim::Edge(_)) if dim == 3 => PairKind::EE,
            _ => return None,
        };
        Some(Self { kind, a, b })
    }
}

/// Deduplicated, sorted set of candidate pairs.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CandidateSet {
    pub pairs: Vec<ContactPair>,
}

impl CandidateSet {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn of_kind(&self, kinds: &[PairKind]) -> Vec<ContactPair> {
        self.pairs.iter().filter(|p| kinds.contains(&p.kind)).copied().collect()
    }
}

#[derive(Clone, Copy, Debug)]
struct Aabb {
    lo: Vec3,
    hi: Vec3,
}

impl Aabb {
    fn of(pts: impl Iterator<Item = Vec3>) -> Self {
        let mut lo = Vec3::new(f64::MAX, f64::MAX, f64::MAX);
        let mut hi = Vec3::new(f64::MIN, f64::MIN, f64::MIN);
        for p in pts {
            lo = lo.min_comp(&p);
            hi = hi.max_comp(&p);
        }
        Self { lo, hi }
    }

    fn overlaps(&self, o: &Aabb, r: f64) -> bool {
        self.lo.x <= o.hi.x + r
            && o.lo.x <= self.hi.x + r
            && self.lo.y <= o.hi.y + r
            && o.lo.y <= self.hi.y + r
            && self.lo.z <= o.hi.z + r
            && o.lo.z <= self.hi.z + r
    }
}

fn all_prims(mesh: &SurfaceMesh) -> Vec<Prim> {
    let mut v: Vec<Prim> = (0..mesh.boundary_vertices.len()).map(Prim::Vertex).collect();
    v.extend((0..mesh.boundary_edges.len()).map(Prim::Edge));
    v.extend((0..mesh.boundary_faces.len()).map(Prim::Face));
    v
}

/// Pairs of boxes whose gap is at most `r` on every axis, via a uniform hash grid.
fn overlapping(boxes: &[Aabb], r: f64) -> Vec<(usize, usize)> {
    if boxes.is_empty() {
        return Vec::new();
    }
    let mean_extent = boxes
        .iter()
        .map(|b| (b.hi.x - b.lo.x).max(b.hi.y - b.lo.y).max(b.hi.z - b.lo.z))
        .sum::<f64>()
        / boxes.len() as f64;
    let cell = (mean_extent + r).max(1e-12);
    let key = |x: f64| (x / cell).floor() as i64;
    let mut grid: HashMap<[i64; 3], Vec<u32>> = HashMap::new();
    for (i, b) in boxes.iter().enumerate() {
        let h = 0.5 * r;
        for ix in key(b.lo.x - h)..=key(b.hi.x + h) {
            for iy in key(b.lo.y - h)..=key(b.hi.y + h) {
                for iz in key(b.lo.z - h)..=key(b.hi.z + h) {
                    grid.entry([ix, iy, iz]).or_default().push(i as u32);
                }
            }
        }
    }
    let mut out = Vec::new();
    for list in grid.values() {
        for (k, &i) in list.iter().enumerate() {
            for &j in &list[k + 1..] {
                let (i, j) = (i as usize, j as usize);
                if boxes[i].overlaps(&boxes[j], r) {
                    out.push((i.min(j), i.max(j)));
                }
            }
        }
    }
    out.sort_unstable();
    out.dedup();
    out
}

fn collect(mesh: &SurfaceMesh, prims: &[Prim], boxes: &[Aabb], r: f64) -> CandidateSet {
    let mut pairs: Vec<ContactPair> = overlapping(boxes, r)
        .into_iter()
        .filter_map(|(i, j)| {
            let pair = ContactPair::new(mesh.dim, prims[i], prims[j])?;
            (!super::shares_vertex(mesh, pair.a, pair.b)).then_some(pair)
        })
        .collect();
    pairs.sort_unstable();
    pairs.dedup();
    CandidateSet { pairs }
}

/// All non-adjacent contact pairs whose bounding boxes at positions `x` come
/// within `r`. A superset of the pairs at distance `<= r`.
pub fn broad_phase(mesh: &SurfaceMesh, x: &[Vec3], r: f64) -> CandidateSet {
    let prims = all_prims(mesh);
    let boxes: Vec<Aabb> = prims
        .iter()
        .map(|&p| Aabb::of(mesh.prim_vertices(p).into_iter().map(|v| x[v])))
        .collect();
    collect(mesh, &prims, &boxes, r)
}

/// Like [`broad_phase`] with each box covering the straight-line sweep from
/// `x0` to `x1`.
pub fn broad_phase_swept(mesh: &SurfaceMesh, x0: &[Vec3], x1: &[Vec3], r: f64) -> CandidateSet {
    let prims = all_prims(mesh);
    let boxes: Vec<Aabb> = prims
        .iter()
        .map(|&p| {
            let vs = mesh.prim_vertices(p);
            Aabb::of(vs.iter().map(|&v| x0[v]).chain(vs.iter().map(|&v| x1[v])))
        })
        .collect();
    collect(mesh, &prims, &boxes, r)
}

/// Every non-adjacent contact pair, regardless of distance.
pub fn all_pairs(mesh: &SurfaceMesh) -> CandidateSet {
    let prims = all_prims(mesh);
    let mut pairs = Vec::new();
    for (i, &p) in prims.iter().enumerate() {
        for &q in &prims[i + 1..] {
            if let Some(pair) = ContactPair::new(mesh.dim, p, q) {
                if !super::shares_vertex(mesh, pair.a, pair.b) {
                    pairs.push(pair);
                }
            }
        }
    }
    pairs.sort_unstable();
    CandidateSet { pairs }
}
