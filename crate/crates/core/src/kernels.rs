//! Scalar kernels: cubic B-spline, localized barrier, smoothed Heaviside,
//! spline delta and the closest-point mollifier.
//!
//! Every function is generic over [`Real`] so the same code path serves
//! plain evaluation and automatic differentiation. Branches are selected on
//! the real part of the argument.

use crate::error::{Error, Result};
use crate::real::Real;

/// Localized barrier parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BarrierSpec {
    pub eps: f64,
    pub p: i32,
}

impl BarrierSpec {
    pub fn new(eps: f64, p: i32) -> Result<Self> {
        if !(eps > 0.0) {
            return Err(Error::InvalidParameter(format!("barrier eps must be > 0, got {eps}")));
        }
        if p < 1 {
            return Err(Error::InvalidParameter(format!("barrier power must be >= 1, got {p}")));
        }
        Ok(Self { eps, p })
    }

    /// Default power `n - 1` for an `n`-dimensional scene.
    pub fn for_dim(eps: f64, dim: usize) -> Result<Self> {
        Self::new(eps, dim as i32 - 1)
    }
}

/// Cubic B-spline with support `|v| < 2`.
pub fn bspline3<T: Real>(v: T) -> T {
    let a = v.val().abs();
    if a < 1.0 {
        let v2 = v.clone() * &v;
        let av = if v.val() < 0.0 { -v } else { v };
        T::cst(2.0 / 3.0) - &v2 + v2 * av * 0.5
    } else if a < 2.0 {
        let av = if v.val() < 0.0 { -v } else { v };
        let w = T::cst(2.0) - av;
        w.powi(3) * (1.0 / 6.0)
    } else {
        T::zero()
    }
}

/// `h_eps(z) = 1.5 * bspline3(2z / eps)`.
pub fn h_eps<T: Real>(z: T, eps: f64) -> T {
    debug_assert!(eps > 0.0);
    bspline3(z * (2.0 / eps)) * 1.5
}

/// Checked variant of [`h_eps`] for callers handling user input.
pub fn try_h_eps(z: f64, eps: f64) -> Result<f64> {
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter(format!("eps must be > 0, got {eps}")));
    }
    Ok(h_eps(z, eps))
}

/// Localized barrier `h_eps(z) / z^p`. Zero for `z >= eps`.
///
/// The caller guarantees `z > 0`.
pub fn barrier<T: Real>(z: T, spec: BarrierSpec) -> T {
    debug_assert!(z.val() > 0.0, "barrier evaluated at z = {}", z.val());
    if z.val() >= spec.eps {
        return T::zero();
    }
    let num = h_eps(z.clone(), spec.eps);
    num / z.powi(spec.p)
}

/// Derivative of [`barrier`] with respect to `z`.
pub fn barrier_derivative(z: f64, spec: BarrierSpec) -> f64 {
    use num_dual::{first_derivative, Dual64};
    let (_, d) = first_derivative(|x: Dual64| barrier(x, spec), z);
    d
}

/// The normalized smoothed Heaviside with transition on `[-3, 0]`.
fn heaviside_unit<T: Real>(z: T) -> T {
    let r = z.val();
    if r < -3.0 {
        T::zero()
    } else if r < -2.0 {
        (z + 3.0).powi(3) * (1.0 / 6.0)
    } else if r < -1.0 {
        let z2 = z.clone() * &z;
        let z3 = z2.clone() * &z;
        (T::cst(3.0) - z * 9.0 - z2 * 9.0 - z3 * 2.0) * (1.0 / 6.0)
    } else if r < 0.0 {
        z.powi(3) * (1.0 / 6.0) + 1.0
    } else {
        T::one()
    }
}

/// Smoothed Heaviside `H(z / alpha)`: 0 for `z <= -3 alpha`, 1 for `z >= 0`.
pub fn heaviside<T: Real>(z: T, alpha: f64) -> T {
    debug_assert!(alpha > 0.0);
    heaviside_unit(z * alpha.recip())
}

/// Spline delta `(2/alpha) * bspline3(2z/alpha)`, unit integral, support `|z| < alpha`.
pub fn delta<T: Real>(z: T, alpha: f64) -> T {
    debug_assert!(alpha > 0.0);
    bspline3(z * (2.0 / alpha)) * (2.0 / alpha)
}

/// Mollifier `h(z) = z(2 - z)` on `[0, 1)`, 1 above, 0 below.
pub fn mollify_h<T: Real>(z: T) -> T {
    let r = z.val();
    if r < 0.0 {
        T::zero()
    } else if r < 1.0 {
        z.clone() * (T::cst(2.0) - z)
    } else {
        T::one()
    }
}

/// `h_c(s) = h((s - 1) / c)`.
pub fn mollify_hc<T: Real>(s: T, c: f64) -> T {
    debug_assert!(c > 0.0);
    mollify_h((s - 1.0) * c.recip())
}

/// Log barrier of the incremental potential contact baseline,
/// `-(d - dhat)^2 ln(d / dhat)` below `dhat`.
pub fn ipc_barrier<T: Real>(d: T, dhat: f64) -> T {
    debug_assert!(d.val() > 0.0);
    if d.val() >= dhat {
        return T::zero();
    }
    let diff = d.clone() - dhat;
    -(diff.clone() * diff) * (d * dhat.recip()).ln()
}
