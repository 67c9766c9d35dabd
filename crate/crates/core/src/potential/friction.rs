//! Lagged smoothed Coulomb friction. Normal force magnitudes and tangent
//! bases are frozen from the previous solve; the dissipative potential of a
//! pair is `mu * lambda * f0(|u|)` with `u` the tangential relative
//! displacement over the step.

use crate::ad::{self, Assembly, LocalEnergy, Order};
use crate::error::Result;
use crate::mesh::{PotentialParams, SurfaceMesh};
use crate::proximity::pair_closest;
use crate::real::{Real, Vec3, V3};

use super::{contact_force_magnitudes, ContactTerm};

/// Friction profile: `2y/(h eps_v) - y^2/(h eps_v)^2` below `h eps_v`, 1 above.
pub fn f1(y: f64, h: f64, eps_v: f64) -> f64 {
    let s = h * eps_v;
    if y >= s {
        1.0
    } else {
        2.0 * y / s - y * y / (s * s)
    }
}

/// Antiderivative of [`f1`] with `f0(0) = 0`, written in `s = y^2` so that
/// it stays twice differentiable at zero slip.
pub fn f0_squared<T: Real>(y2: T, h: f64, eps_v: f64) -> T {
    let s = h * eps_v;
    if y2.val() >= s * s {
        return y2.sqrt() - s / 3.0;
    }
    let y3 = if y2.val() > 0.0 { y2.clone() * y2.sqrt() } else { T::zero() };
    y2 * (1.0 / s) - y3 * (1.0 / (3.0 * s * s))
}

pub fn f0(y: f64, h: f64, eps_v: f64) -> f64 {
    f0_squared(y * y, h, eps_v)
}

/// Frozen data of one frictional pair.
#[derive(Clone, Debug, PartialEq)]
pub struct FrictionPair {
    /// Vertices of both primitives, first primitive first.
    pub verts: Vec<usize>,
    /// Barycentric weights of the closest points, negated on the first
    /// primitive so that `sum w_i dx_i` is the relative displacement.
    pub weights: Vec<f64>,
    /// Orthonormal tangent directions (one in 2D, two in 3D).
    pub basis: Vec<Vec3>,
    /// Contact force magnitude.
    pub lambda: f64,
}

/// Lagged friction state for one step.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FrictionData {
    pub pairs: Vec<FrictionPair>,
}

fn tangent_basis(n: &Vec3, dim: usize) -> Vec<Vec3> {
    if dim == 2 {
        return vec![Vec3::new(-n.y, n.x, 0.0)];
    }
    let axis = if n.x.abs() <= n.y.abs() && n.x.abs() <= n.z.abs() {
        Vec3::new(1.0, 0.0, 0.0)
    } else if n.y.abs() <= n.z.abs() {
        Vec3::new(0.0, 1.0, 0.0)
    } else {
        Vec3::new(0.0, 0.0, 1.0)
    };
    let t1 = n.cross(&axis).normalized();
    let t2 = n.cross(&t1);
    vec![t1, t2]
}

/// Freeze force magnitudes, closest points and tangent bases of `terms` at `x`.
pub fn lag_friction(mesh: &SurfaceMesh, x: &[Vec3], terms: &[ContactTerm], params: &PotentialParams) -> Result<FrictionData> {
    let lambdas = contact_force_magnitudes(terms, params);
    let mut pairs = Vec::new();
    for (t, &lambda) in terms.iter().zip(&lambdas) {
        if lambda == 0.0 {
            continue;
        }
        let cp = pair_closest(mesh, x, &t.pair)?;
        let n = (cp.point_b - cp.point_a).normalized();
        let mut verts = mesh.prim_vertices(t.pair.a);
        verts.extend(mesh.prim_vertices(t.pair.b));
        let weights = cp.bary_a.iter().map(|w| -w).chain(cp.bary_b.iter().copied()).collect();
        pairs.push(FrictionPair { verts, weights, basis: tangent_basis(&n, mesh.dim), lambda });
    }
    Ok(FrictionData { pairs })
}

struct PairFriction<'a> {
    pair: &'a FrictionPair,
    x_prev: Vec<Vec3>,
    coef: f64,
    h: f64,
    eps_v: f64,
}

impl LocalEnergy for PairFriction<'_> {
    fn vertices(&self) -> &[usize] {
        &self.pair.verts
    }

    fn eval<T: Real>(&self, x: &[V3<T>]) -> T {
        let mut rel = V3::<T>::zero();
        for ((xi, xp), &w) in x.iter().zip(&self.x_prev).zip(&self.pair.weights) {
            rel = rel + (xi - &V3::lift(xp)).scale_f(w);
        }
        let mut y2 = T::zero();
        for t in &self.pair.basis {
            let u = rel.dot(&V3::lift(t));
            y2 = y2 + u.clone() * u;
        }
        f0_squared(y2, self.h, self.eps_v) * self.coef
    }
}

fn locals<'a>(data: &'a FrictionData, x_prev: &[Vec3], mu: f64, eps_v: f64, h: f64) -> Vec<PairFriction<'a>> {
    data.pairs
        .iter()
        .map(|p| PairFriction {
            pair: p,
            x_prev: p.verts.iter().map(|&v| x_prev[v]).collect(),
            coef: mu * p.lambda,
            h,
            eps_v,
        })
        .collect()
}

/// `sum mu lambda_k f0(|u_k|)` with `u_k` measured from `x_prev` to `x`.
pub fn friction_energy(data: &FrictionData, x: &[Vec3], x_prev: &[Vec3], mu: f64, eps_v: f64, h: f64) -> f64 {
    locals(data, x_prev, mu, eps_v, h).iter().map(|l| l.eval(&ad::local_values(l, x))).sum()
}

/// Friction potential with derivatives; `dim` is the scene dimension.
#[allow(clippy::too_many_arguments)]
pub fn friction_assemble(
    data: &FrictionData,
    dim: usize,
    x: &[Vec3],
    x_prev: &[Vec3],
    mu: f64,
    eps_v: f64,
    h: f64,
    order: Order,
) -> Assembly {
    if mu == 0.0 {
        return Assembly::zeros(x.len() * dim);
    }
    ad::assemble(&locals(data, x_prev, mu, eps_v, h), x, dim, order)
}
