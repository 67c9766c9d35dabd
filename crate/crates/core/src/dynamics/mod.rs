//! Implicit Euler time stepping and static solves by projected Newton with a
//! collision-aware backtracking line search.

mod elastic;

pub use elastic::{lumped_mass, Elasticity, Element};

use nalgebra::DMatrix;
use nalgebra_sparse::factorization::CscCholesky;
use nalgebra_sparse::{CooMatrix, CscMatrix};

use crate::ad::{Assembly, Order};
use crate::error::{Error, Result};
use crate::mesh::Scene;
use crate::potential::{self, adapt_epsilon, friction_assemble, lag_friction, FrictionData, PotentialKind};
use crate::proximity::{broad_phase, ccd_max_step_with, intersecting_pairs_at, pair_closest, CCD_SEPARATION};
use crate::real::Vec3;

/// Solver settings.
#[derive(Clone, Debug)]
pub struct SolverOptions {
    pub potential: PotentialKind,
    /// Newton stops when `max|dx| / h` falls below `tolerance * bbox diagonal`.
    pub tolerance: f64,
    pub max_iterations: usize,
    pub max_halvings: usize,
    /// Fraction of a pair's distance one line-search step may consume.
    pub ccd_separation: f64,
    /// Run the exact intersection test on every accepted iterate and fail
    /// with [`Error::Intersecting`] if one is found.
    pub check_intersections: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            potential: PotentialKind::Geometric,
            tolerance: 1e-5,
            max_iterations: 200,
            max_halvings: 64,
            ccd_separation: CCD_SEPARATION,
            check_intersections: false,
        }
    }
}

/// Diagnostics of one solve.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct StepReport {
    pub iterations: usize,
    /// Incremental potential at the start and after every accepted iterate.
    pub objective: Vec<f64>,
    pub elastic: f64,
    pub contact: f64,
    pub friction: f64,
    pub total: f64,
    pub min_distance: f64,
    /// Largest free-coordinate entry of the objective gradient at the solution.
    pub max_gradient: f64,
}

/// Positions, velocities and lagged friction of a simulation.
#[derive(Clone, Debug)]
pub struct SimState {
    pub positions: Vec<Vec3>,
    pub velocities: Vec<Vec3>,
    pub time: f64,
    pub friction: FrictionData,
    pub report: StepReport,
}

/// Precomputed per-scene data for the solver.
pub struct Simulator {
    pub scene: Scene,
    pub options: SolverOptions,
    pub state: SimState,
    elasticity: Elasticity,
    mass: Vec<f64>,
    constrained: Vec<bool>,
    prescribed: Vec<Vec3>,
}

struct Parts {
    elastic: f64,
    contact: f64,
    friction: f64,
}

impl Simulator {
    /// Set up a scene: localization radii are adapted to the rest state
    /// (geometric potential) and friction is lagged from the initial state.
    pub fn new(mut scene: Scene, options: SolverOptions) -> Result<Self> {
        if options.potential == PotentialKind::Geometric {
            adapt_epsilon(&mut scene.mesh, &scene.params)?;
        }
        let elasticity = Elasticity::new(&scene.mesh, &scene.materials)?;
        let mass = lumped_mass(&scene.mesh, &scene.materials)?;
        let constrained = scene.constrained();
        if let Some(v) = (0..mass.len()).find(|&v| !constrained[v] && mass[v] <= 0.0) {
            return Err(Error::InvalidScene(format!("free vertex {v} has no mass")));
        }
        let prescribed = scene.prescribed_velocity();
        let x = scene.mesh.positions.clone();
        if !intersecting_pairs_at(&scene.mesh, &x).is_empty() {
            return Err(Error::Intersecting("initial state".into()));
        }
        let state = SimState {
            positions: x,
            velocities: scene.velocities.clone(),
            time: 0.0,
            friction: FrictionData::default(),
            report: StepReport::default(),
        };
        let mut sim = Self { scene, options, state, elasticity, mass, constrained, prescribed };
        sim.state.friction = sim.lag(&sim.state.positions)?;
        Ok(sim)
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn constrained(&self) -> &[bool] {
        &self.constrained
    }

    fn lag(&self, x: &[Vec3]) -> Result<FrictionData> {
        if self.scene.mu == 0.0 || self.options.potential != PotentialKind::Geometric {
            return Ok(FrictionData::default());
        }
        let terms = potential::collect_terms_at(&self.scene.mesh, x, &self.scene.params)?;
        lag_friction(&self.scene.mesh, x, &terms, &self.scene.params)
    }

    /// Recompute the lagged friction data at the current positions.
    pub fn update_friction(&mut self) -> Result<()> {
        self.state.friction = self.lag(&self.state.positions)?;
        Ok(())
    }

    /// Advance one implicit Euler step.
    pub fn step(&mut self) -> Result<&StepReport> {
        let h = self.scene.dt;
        let x0 = self.state.positions.clone();
        let g = self.scene.gravity;
        let x_hat: Vec<Vec3> = x0
            .iter()
            .zip(&self.state.velocities)
            .map(|(x, v)| *x + v.scale_f(h) + g.scale_f(h * h))
            .collect();
        let (x, report) = self.solve(&x0, Some(&x_hat), h)?;
        self.state.velocities = x.iter().zip(&x0).map(|(a, b)| (*a - *b).scale_f(1.0 / h)).collect();
        self.finish(x, report, h)
    }

    /// Equilibrium of elasticity, contact, friction and gravity, with the
    /// prescribed vertices advanced by one time step of their motion.
    pub fn static_solve(&mut self) -> Result<&StepReport> {
        let h = self.scene.dt;
        let x0 = self.state.positions.clone();
        let (x, report) = self.solve(&x0, None, h)?;
        self.state.velocities = vec![Vec3::default(); x.len()];
        self.finish(x, report, h)
    }

    /// Energies, minimum distance and the largest free force component at the
    /// current positions, without taking a step.
    pub fn evaluate(&self) -> Result<StepReport> {
        let x = &self.state.positions;
        let dim = self.scene.mesh.dim;
        // with x_hat = x0 = x the inertia and friction terms vanish
        let (a, parts) = self.objective(x, x, Some(x), self.scene.dt, Order::Gradient)?;
        let max_gradient = (0..x.len() * dim).filter(|&i| !self.constrained[i / dim]).fold(0.0f64, |m, i| m.max(a.gradient[i].abs()));
        Ok(StepReport {
            iterations: 0,
            objective: vec![a.energy],
            elastic: parts.elastic,
            contact: parts.contact,
            friction: parts.friction,
            total: a.energy,
            min_distance: min_pair_distance(&self.scene, x)?,
            max_gradient,
        })
    }

    fn finish(&mut self, x: Vec<Vec3>, report: StepReport, h: f64) -> Result<&StepReport> {
        self.state.positions = x;
        self.state.time += h;
        self.state.friction = self.lag(&self.state.positions)?;
        self.state.report = report;
        Ok(&self.state.report)
    }

    /// Objective and its parts at `x`.
    fn objective(&self, x: &[Vec3], x0: &[Vec3], x_hat: Option<&[Vec3]>, h: f64, order: Order) -> Result<(Assembly, Parts)> {
        let dim = self.scene.mesh.dim;
        let n = x.len() * dim;
        let mut total = Assembly::zeros(n);
        let hess = matches!(order, Order::Hessian { .. });
        let comp = |v: &Vec3, k: usize| *v.component(k);
        match x_hat {
            Some(xh) => {
                let s = 1.0 / (h * h);
                for i in 0..x.len() {
                    let m = self.mass[i];
                    if m == 0.0 {
                        continue;
                    }
                    let d = x[i] - xh[i];
                    total.energy += 0.5 * s * m * d.norm_squared();
                    for k in 0..dim {
                        total.gradient[i * dim + k] += s * m * comp(&d, k);
                        if hess {
                            total.hessian.push(i * dim + k, i * dim + k, s * m);
                        }
                    }
                }
            }
            None => {
                let g = self.scene.gravity;
                for i in 0..x.len() {
                    total.energy -= self.mass[i] * g.dot(&x[i]);
                    for k in 0..dim {
                        total.gradient[i * dim + k] -= self.mass[i] * comp(&g, k);
                    }
                }
            }
        }
        let el = self.elasticity.assemble(x, order);
        let elastic = el.energy;
        total.add_scaled(el, 1.0);
        if !elastic.is_finite() {
            return Ok((total, Parts { elastic, contact: 0.0, friction: 0.0 }));
        }
        let ct = potential::assemble(self.options.potential, &self.scene.mesh, x, &self.scene.params, order)?;
        let contact = ct.energy;
        total.add_scaled(ct, 1.0);
        let fr = friction_assemble(&self.state.friction, dim, x, x0, self.scene.mu, self.scene.eps_v, h, order);
        let friction = fr.energy;
        total.add_scaled(fr, 1.0);
        Ok((total, Parts { elastic, contact, friction }))
    }

    fn solve(&self, x0: &[Vec3], x_hat: Option<&[Vec3]>, h: f64) -> Result<(Vec<Vec3>, StepReport)> {
        let mesh = &self.scene.mesh;
        let dim = mesh.dim;
        let n = x0.len() * dim;
        let opts = &self.options;
        let conv_h = if x_hat.is_some() { h } else { 1.0 };
        let tol = opts.tolerance * mesh.bbox_diagonal() * conv_h;
        let target: Vec<Vec3> =
            x0.iter().zip(&self.prescribed).map(|(x, v)| *x + v.scale_f(h)).collect();
        let mut free_index = vec![usize::MAX; n];
        let mut nfree = 0;
        for v in 0..x0.len() {
            if !self.constrained[v] {
                for k in 0..dim {
                    free_index[v * dim + k] = nfree;
                    nfree += 1;
                }
            }
        }

        let mut x = x0.to_vec();
        let mut report = StepReport::default();
        let (mut cur, _) = self.objective(&x, x0, x_hat, h, Order::Energy)?;
        report.objective.push(cur.energy);
        loop {
            // remaining prescribed displacement
            let mut dc = vec![0.0; n];
            let mut pending = false;
            for v in 0..x.len() {
                if self.constrained[v] {
                    let d = target[v] - x[v];
                    for k in 0..dim {
                        dc[v * dim + k] = *d.component(k);
                    }
                    pending |= d.max_abs() > 0.0;
                }
            }
            let (a, _) = self.objective(&x, x0, x_hat, h, Order::Hessian { project: true })?;
            let mut rhs = vec![0.0; nfree];
            for i in 0..n {
                if free_index[i] != usize::MAX {
                    rhs[free_index[i]] = -a.gradient[i];
                }
            }
            let mut coo = CooMatrix::new(nfree, nfree);
            for &(i, j, v) in &a.hessian.entries {
                let (fi, fj) = (free_index[i], free_index[j]);
                if fi != usize::MAX && fj != usize::MAX {
                    coo.push(fi, fj, v);
                } else if fi != usize::MAX && pending {
                    rhs[fi] -= v * dc[j];
                }
            }
            report.max_gradient = (0..n).filter(|&i| free_index[i] != usize::MAX).fold(0.0, |m, i| m.max(a.gradient[i].abs()));
            let df = if nfree > 0 { solve_spd(&CscMatrix::from(&coo), &rhs)? } else { Vec::new() };
            let mut dx = dc.clone();
            for i in 0..n {
                if free_index[i] != usize::MAX {
                    dx[i] = df[free_index[i]];
                }
            }
            let step_norm = dx.iter().fold(0.0f64, |m, d| m.max(d.abs()));
            if !pending && step_norm <= tol {
                break;
            }
            if report.iterations >= opts.max_iterations {
                return Err(Error::NoConvergence(report.iterations));
            }
            let dirs: Vec<Vec3> = (0..x.len())
                .map(|v| {
                    let s = &dx[v * dim..v * dim + dim];
                    Vec3::new(s[0], s[1], if dim == 3 { s[2] } else { 0.0 })
                })
                .collect();
            let trial = |alpha: f64| -> Vec<Vec3> { x.iter().zip(&dirs).map(|(p, d)| *p + d.scale_f(alpha)).collect() };
            let mut alpha = ccd_max_step_with(mesh, &x, &trial(1.0), opts.ccd_separation)?;
            let mut halvings = 0;
            let (next, e_next) = loop {
                let xt = trial(alpha);
                let (e, _) = self.objective(&xt, x0, x_hat, h, Order::Energy)?;
                let ok = e.energy.is_finite() && (pending || e.energy <= cur.energy + 1e-12 * cur.energy.abs());
                if ok {
                    break (xt, e);
                }
                halvings += 1;
                if halvings > opts.max_halvings {
                    return Err(Error::LineSearch { iteration: report.iterations, halvings, decrement: step_norm });
                }
                alpha *= 0.5;
            };
            x = next;
            if pending && alpha >= 1.0 {
                for v in 0..x.len() {
                    if self.constrained[v] {
                        x[v] = target[v];
                    }
                }
            }
            if opts.check_intersections {
                if let Some(&(i, j)) = intersecting_pairs_at(mesh, &x).first() {
                    return Err(Error::Intersecting(format!("newton iterate {}: elements {i} and {j}", report.iterations + 1)));
                }
            }
            cur = e_next;
            report.iterations += 1;
            report.objective.push(cur.energy);
        }
        let (_, parts) = self.objective(&x, x0, x_hat, h, Order::Energy)?;
        report.elastic = parts.elastic;
        report.contact = parts.contact;
        report.friction = parts.friction;
        report.total = cur.energy;
        report.min_distance = min_pair_distance(&self.scene, &x)?;
        Ok((x, report))
    }
}

/// Smallest distance between non-adjacent boundary primitives within the
/// localization radius, `inf` if none are that close.
pub fn min_pair_distance(scene: &Scene, x: &[Vec3]) -> Result<f64> {
    let mut m = f64::INFINITY;
    for p in broad_phase(&scene.mesh, x, scene.params.eps_trg).pairs {
        m = m.min(pair_closest(&scene.mesh, x, &p)?.distance);
    }
    Ok(m)
}

/// Cholesky solve, retried with a growing diagonal shift for singular systems.
fn solve_spd(a: &CscMatrix<f64>, b: &[f64]) -> Result<Vec<f64>> {
    let rhs = DMatrix::from_column_slice(b.len(), 1, b);
    if let Ok(c) = CscCholesky::factor(a) {
        return Ok(c.solve(&rhs).column(0).iter().copied().collect());
    }
    let dmax = a.diagonal_as_csc().values().iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
    let mut shift = 1e-12 * dmax;
    for _ in 0..12 {
        let mut coo = CooMatrix::new(a.nrows(), a.ncols());
        for (i, j, v) in a.triplet_iter() {
            coo.push(i, j, *v);
        }
        for i in 0..a.nrows() {
            coo.push(i, i, shift);
        }
        if let Ok(c) = CscCholesky::factor(&CscMatrix::from(&coo)) {
            log::debug!("cholesky needed a diagonal shift of {shift:e}");
            return Ok(c.solve(&rhs).column(0).iter().copied().collect());
        }
        shift *= 100.0;
    }
    Err(Error::LinearSolve("matrix is not positive definite after shifting".into()))
}
