//! Acceptance suite. Every criterion prints one PASS/FAIL line and the
//! process exits non-zero if any of them fails. Criterion numbers given on
//! the command line select a subset.

use std::error::Error as StdError;
use std::f64::consts::{FRAC_PI_4, PI, TAU};
use std::time::Instant;

use geobarrier::ad::Order;
use geobarrier::dynamics::{Elasticity, Simulator, SolverOptions};
use geobarrier::filter::{determine_inside_3d, g_e_vertex, gamma_ps_at};
use geobarrier::mesh::{
    annulus, box_tets, parse_scene, rect_tris, rigid_transform, rotation_z, tensor_tris, transform_nodes,
    DirichletSpec, Material, MeshData, MeshKind, MotionKind, PotentialParams, SceneFile, SurfaceMesh,
};
use geobarrier::potential::{self, adapt_epsilon, collect_terms, collect_terms_at, ipc_energy, ipc_terms, PotentialKind};
use geobarrier::proximity::{all_pairs, broad_phase, intersects, min_distance, pair_closest, ContactPair};
use geobarrier::Vec3;
use nalgebra::{Matrix3, Rotation3, Unit, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, Box<dyn StdError>>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+).into());
        }
    };
}

fn v(x: f64, y: f64, z: f64) -> Vec3 {
    Vec3::new(x, y, z)
}

fn scene(dim: usize, meshes: Vec<MeshData>, dhat: f64) -> SceneFile {
    SceneFile {
        dim,
        meshes,
        material: Material { youngs: 1e5, nu: 0.3, rho: 1000.0 },
        gravity: None,
        dt: 0.01,
        dhat,
        alpha: 0.5,
        beta: 0.1,
        c: 0.01,
        kappa: 1e3,
        p: None,
        mu: 0.0,
        eps_v: 1e-3,
        dirichlet: vec![],
    }
}

fn checked() -> SolverOptions {
    SolverOptions { check_intersections: true, ..Default::default() }
}

fn fixed(nodes: Vec<usize>) -> DirichletSpec {
    DirichletSpec { nodes: Some(nodes), mesh: None, motion: MotionKind::Fixed, velocity: None }
}

fn moving(nodes: Vec<usize>, vel: Vec<f64>) -> DirichletSpec {
    DirichletSpec { nodes: Some(nodes), mesh: None, motion: MotionKind::Linear, velocity: Some(vel) }
}

/// Closed 2D box obstacle whose top side spans `[x0, x1]` at height `y`.
fn ground2(x0: f64, x1: f64, y: f64) -> MeshData {
    MeshData::new(
        MeshKind::Shell,
        vec![vec![x0, y - 1.0], vec![x1, y - 1.0], vec![x1, y], vec![x0, y]],
        vec![vec![0, 1], vec![1, 2], vec![2, 3], vec![3, 0]],
    )
}

/// Closed 3D box obstacle `[-h, h]^2 x [-1, 0]` (top face at z = 0).
fn ground3(h: f64) -> MeshData {
    let solid = box_tets(1, 1, 1, [2.0 * h, 2.0 * h, 1.0], [-h, -h, -1.0]);
    let m = SurfaceMesh::from_meshes(3, &[solid]).unwrap();
    let nodes = m.positions.iter().map(|p| vec![p.x, p.y, p.z]).collect();
    let faces = m.boundary_faces.iter().map(|f| f.to_vec()).collect();
    MeshData::new(MeshKind::Shell, nodes, faces)
}

fn max_abs(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn nodes_where(m: &MeshData, f: impl Fn(&[f64]) -> bool) -> Vec<usize> {
    (0..m.nodes.len()).filter(|&i| f(&m.nodes[i])).collect()
}

// ---------------------------------------------------------------------------
// 1. zero rest forces

fn slit_block() -> MeshData {
    let xs = [0.0, 0.25, 0.49, 0.51, 0.75, 1.0];
    let ys = [0.0, 0.25, 0.5, 0.75, 1.0];
    let mut m = tensor_tris(&xs, &ys);
    let nodes = m.nodes.clone();
    m.elements.retain(|e| {
        let cx = e.iter().map(|&i| nodes[i][0]).sum::<f64>() / 3.0;
        let cy = e.iter().map(|&i| nodes[i][1]).sum::<f64>() / 3.0;
        !(cx > 0.49 && cx < 0.51 && cy > 0.25)
    });
    m
}

fn zero_rest_forces() -> Check {
    let eps = 0.05;
    let cases = [
        ("two blocks 2D", 2, vec![rect_tris(4, 4, 1.0, 1.0, [0.0, 0.0]), rect_tris(4, 4, 1.0, 1.0, [0.13, 1.02])]),
        ("two blocks 3D", 3, vec![box_tets(2, 2, 2, [1.0; 3], [0.0; 3]), box_tets(2, 2, 2, [1.0; 3], [0.13, 0.21, 1.02])]),
        ("slit block", 2, vec![slit_block()]),
    ];
    let mut out = Vec::new();
    for (name, dim, meshes) in cases {
        let t = Instant::now();
        let sc = parse_scene(scene(dim, meshes, eps), None)?;
        let p = sc.params;
        let mut mesh = sc.mesh.clone();
        adapt_epsilon(&mut mesh, &p)?;
        let shrunk = mesh.vertex_eps.iter().filter(|&&e| e < eps).count();
        let e = potential::energy(&mesh, &p)?;
        let g = max_abs(potential::gradient(&mesh, &p)?);
        let mut sim = Simulator::new(sc.clone(), checked())?;
        let r = sim.static_solve()?.clone();
        let ipc = ipc_energy(&sc.mesh, &sc.mesh.positions, &p)?;
        let secs = t.elapsed().as_secs_f64();
        ensure!(shrunk > 0, "{name}: no localization radius was adapted, gap not below eps");
        ensure!(e == 0.0 && g == 0.0, "{name}: rest energy {e:e}, max |grad| {g:e}");
        ensure!(r.iterations == 0 && r.contact == 0.0, "{name}: static solve ran {} iterations", r.iterations);
        ensure!(sim.state.positions == sc.mesh.positions, "{name}: rest state moved");
        ensure!(ipc > 0.0, "{name}: baseline rest energy {ipc:e}");
        ensure!(secs < 10.0, "{name}: {secs:.1}s");
        out.push(format!("{name}: E=0 |grad|=0 iters=0, baseline E={ipc:.3e}"));
    }
    Ok(out.join("; "))
}

// ---------------------------------------------------------------------------
// 2. compression filter

fn compression_filter() -> Check {
    let eps = 0.1;
    let block = rect_tris(4, 12, 1.0, 1.0, [0.0, 0.0]);
    let bottom = nodes_where(&block, |n| n[1] == 0.0);
    let top = nodes_where(&block, |n| n[1] == 1.0);
    let left = nodes_where(&block, |n| n[0] == 0.0);
    let right = nodes_where(&block, |n| n[0] == 1.0);
    let steps = 10;
    let mut f = scene(2, vec![block], eps);
    f.material = Material { youngs: 1e4, nu: 0.0, rho: 1000.0 };
    f.dt = 1.0;
    f.dirichlet = vec![fixed(bottom), moving(top.clone(), vec![0.0, -(1.0 - 0.33) / steps as f64])];
    let sc = parse_scene(f, None)?;
    let mut sim = Simulator::new(sc.clone(), checked())?;
    for _ in 0..steps {
        let r = sim.static_solve()?;
        ensure!(r.contact == 0.0, "contact energy {:e} during compression", r.contact);
    }
    let x = sim.state.positions.clone();
    let height = x[top[0]].y;
    ensure!((height - 0.33).abs() < 1e-9, "final height {height}");
    let mesh = &sim.scene.mesh;
    let p = sim.scene.params;
    let side_of = |pair: &ContactPair| {
        let vs: Vec<usize> = mesh.prim_vertices(pair.a).into_iter().chain(mesh.prim_vertices(pair.b)).collect();
        vs.iter().all(|i| left.contains(i)) || vs.iter().all(|i| right.contains(i))
    };
    let mut close = 0;
    for pair in broad_phase(mesh, &x, eps).pairs.iter().filter(|q| side_of(q)) {
        if pair_closest(mesh, &x, pair)?.distance < eps {
            close += 1;
            let g = gamma_ps_at(mesh, &x, pair, &p)?.gamma();
            ensure!(g == 0.0, "side pair {pair:?} has gamma {g:e}");
        }
    }
    ensure!(close > 0, "no side pairs came within eps");
    let side_ipc: f64 = ipc_terms(&sc.mesh, &x, &p)?.iter().filter(|t| side_of(&t.pair)).map(|t| t.energy).sum();
    ensure!(side_ipc > 0.0, "baseline side energy {side_ipc:e}");
    Ok(format!("{close} side pairs within eps all have gamma=0; baseline side energy {side_ipc:.3e}"))
}

// ---------------------------------------------------------------------------
// 3. thin membrane

fn thin_membrane() -> Check {
    let (ri, ro, nt, eps) = (0.5, 0.6, 48, 0.05);
    let ring = annulus(ri, ro, nt, 1, [0.0, 0.0]);
    let steps = 8;
    let grow = 0.08 / steps as f64;
    let mut f = scene(2, vec![ring], eps);
    f.material = Material { youngs: 1e4, nu: 0.3, rho: 1000.0 };
    f.dt = 1.0;
    f.dirichlet = (0..nt)
        .map(|i| {
            let t = TAU * i as f64 / nt as f64;
            moving(vec![i], vec![grow * t.cos(), grow * t.sin()])
        })
        .collect();
    f.dirichlet.push(fixed((nt..2 * nt).collect()));
    let mut sim = Simulator::new(parse_scene(f, None)?, checked())?;
    for _ in 0..steps {
        let r = sim.static_solve()?;
        ensure!(r.contact == 0.0, "contact energy {:e} between the walls", r.contact);
    }
    let x = sim.state.positions.clone();
    let thickness = (0..nt).map(|i| x[i + nt].norm() - x[i].norm()).fold(f64::INFINITY, f64::min);
    ensure!(thickness < eps, "wall only thinned to {thickness}");
    let mesh = &sim.scene.mesh;
    let p = sim.scene.params;
    let mut cross = 0;
    for pair in broad_phase(mesh, &x, eps).pairs {
        let vs: Vec<usize> = mesh.prim_vertices(pair.a).into_iter().chain(mesh.prim_vertices(pair.b)).collect();
        let inner = vs.iter().any(|&i| i < nt);
        let outer = vs.iter().any(|&i| i >= nt);
        if inner && outer && pair_closest(mesh, &x, &pair)?.distance < eps {
            cross += 1;
            let g = gamma_ps_at(mesh, &x, &pair, &p)?.gamma();
            ensure!(g == 0.0, "wall pair {pair:?} has gamma {g:e}");
        }
    }
    ensure!(cross > 0, "no inner/outer pairs within eps");
    ensure!(collect_terms_at(mesh, &x, &p)?.iter().all(|t| t.energy == 0.0), "nonzero contact term");
    Ok(format!("wall thickness {thickness:.4} < eps {eps}; {cross} cross-wall pairs all gamma=0, contact energy 0"))
}

// ---------------------------------------------------------------------------
// 4. corner drop under refinement

/// Square of side `s` refined towards its corner at the origin, rotated so
/// that corner points down and placed with the corner at height `h0`.
fn corner_square(level: i32, s: f64, h0: f64) -> MeshData {
    let mut c = vec![0.0];
    for j in (1..=level).rev() {
        c.push(s * 0.5f64.powi(j));
    }
    c.push(s);
    transform_nodes(&tensor_tris(&c, &c), &rotation_z(FRAC_PI_4), &v(0.0, h0, 0.0))
}

fn corner_trace(level: i32, side: f64, steps: usize) -> Result<Vec<f64>, Box<dyn StdError>> {
    let mut f = scene(2, vec![corner_square(level, side, 0.05), ground2(-1.0, 1.0, 0.0)], 0.01 * side);
    // a nearly rigid square, so the trace reflects the contact model rather
    // than the growing compliance of a refined point load
    f.material = Material { youngs: 1e10, nu: 0.3, rho: 1000.0 };
    f.dt = 1e-3;
    f.meshes[0].velocity = Some(vec![0.0, -2.0]);
    let mut sc = parse_scene(f, None)?;
    // corners of the square are feature vertices: their length scale keeps
    // its coarsest value instead of shrinking with the local edges
    let c = FRAC_PI_4.cos();
    for (a, b) in [(0.0, 0.0), (side, 0.0), (0.0, side), (side, side)] {
        let corner = v(c * (a - b), c * (a + b) + 0.05, 0.0);
        let k = (0..sc.mesh.positions.len())
            .find(|&k| (sc.mesh.positions[k] - corner).norm() < 1e-12)
            .ok_or("corner vertex not found")?;
        let bi = sc.mesh.boundary_index[k].ok_or("corner vertex not on the boundary")?;
        sc.mesh.vertex_l[bi] = 0.5 * side;
    }
    let mut sim = Simulator::new(sc, checked())?;
    let mut trace = vec![sim.state.positions[0].y];
    for _ in 0..steps {
        sim.step()?;
        trace.push(sim.state.positions[0].y);
    }
    Ok(trace)
}

fn corner_drop() -> Check {
    let side = 0.5;
    let traces = [1, 2, 3].map(|l| corner_trace(l, side, 100));
    let traces: Vec<Vec<f64>> = traces.into_iter().collect::<Result<_, _>>()?;
    let lowest = traces.iter().flatten().fold(f64::INFINITY, |m, &y| m.min(y));
    ensure!(lowest > 0.0, "tip reached height {lowest:e}");
    let mut worst = 0.0f64;
    for t in 0..traces[0].len() {
        let ys: Vec<f64> = traces.iter().map(|tr| tr[t]).collect();
        let spread = ys.iter().fold(f64::NEG_INFINITY, |m, &y| m.max(y)) - ys.iter().fold(f64::INFINITY, |m, &y| m.min(y));
        worst = worst.max(spread);
    }
    ensure!(worst < 0.01 * side, "tip traces differ by {worst:.3e} (> {:.3e})", 0.01 * side);
    Ok(format!("max tip-height spread {worst:.3e} < {:.3e}, lowest tip {lowest:.3e}", 0.01 * side))
}

// ---------------------------------------------------------------------------
// 5. potential convergence

fn refinement_convergence() -> Check {
    let eps = 0.1;
    let psi: Vec<f64> = (1..=5)
        .map(|k| {
            let n = 1usize << k;
            let mut m = SurfaceMesh::from_meshes(2, &[rect_tris(n, n, 1.0, 1.0, [0.0, 0.0]), rect_tris(n, n, 1.0, 1.0, [0.3, 1.05])])?;
            m.set_uniform_eps(eps);
            potential::energy(&m, &PotentialParams::new(2, eps))
        })
        .collect::<Result<_, _>>()?;
    ensure!(psi.iter().all(|&e| e > 0.0), "inactive configuration {psi:?}");
    let diffs: Vec<f64> = psi.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    let ratios: Vec<f64> = diffs.windows(2).map(|w| w[1] / w[0]).collect();
    ensure!(ratios.iter().all(|&r| r < 0.75), "difference ratios {ratios:?}");
    let list = |v: &[f64]| v.iter().map(|x| format!("{x:.3e}")).collect::<Vec<_>>().join(" ");
    Ok(format!("psi [{}], difference ratios [{}]", list(&psi), list(&ratios)))
}

// ---------------------------------------------------------------------------
// 6. alpha monotonicity

/// Thin strip folded like an accordion: straight arms joined by half-circle
/// caps of random radius, so neighbouring arms face each other across gaps
/// of varying width.
fn crumpled_strip(seed: u64) -> SurfaceMesh {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (arm, half) = (0.6, 0.015);
    // centreline samples with unit tangents
    let mut pts: Vec<(Vec3, Vec3)> = Vec::new();
    let mut at = v(0.0, 0.0, 0.0);
    for fold in 0..8 {
        let up = fold % 2 == 0;
        let dir = v(0.0, if up { 1.0 } else { -1.0 }, 0.0);
        for k in 0..8 {
            let shift = if k == 0 { 0.0 } else { rng.gen_range(-0.003..0.003) };
            pts.push((at + dir.scale_f(arm * k as f64 / 8.0) + v(shift, 0.0, 0.0), dir));
        }
        at = at + dir.scale_f(arm);
        let r = rng.gen_range(0.04..0.07);
        let centre = at + v(r, 0.0, 0.0);
        // top caps turn clockwise, bottom caps counter-clockwise
        for k in 0..10 {
            let th = PI * k as f64 / 10.0;
            let (s, c) = th.sin_cos();
            let off = v(-c, if up { s } else { -s }, 0.0);
            let tan = v(s, if up { c } else { -c }, 0.0);
            pts.push((centre + off.scale_f(r), tan));
        }
        at = centre + v(r, 0.0, 0.0);
    }
    pts.push((at, v(0.0, 1.0, 0.0)));
    let us: Vec<f64> = (0..pts.len()).map(|i| i as f64).collect();
    let mut m = tensor_tris(&us, &[-half, half]);
    for node in m.nodes.iter_mut() {
        let (c, t) = pts[node[0] as usize];
        let p = c + v(-t.y, t.x, 0.0).scale_f(node[1]);
        node[0] = p.x;
        node[1] = p.y;
    }
    SurfaceMesh::from_meshes(2, &[m]).unwrap()
}

fn alpha_monotonicity() -> Check {
    let mut m = crumpled_strip(21);
    let mut rows = Vec::new();
    for eps in [0.1, 0.2, 0.3] {
        m.set_uniform_eps(eps);
        let mut counts = Vec::new();
        for alpha in [1.0, 0.8, 0.5, 0.1] {
            let mut p = PotentialParams::new(2, eps);
            p.alpha = alpha;
            counts.push(collect_terms(&m, &p)?.iter().filter(|t| t.gamma() > 0.0).count());
        }
        ensure!(counts[0] > 0, "eps {eps}: no active pairs");
        ensure!(counts.windows(2).all(|w| w[1] <= w[0]), "eps {eps}: counts {counts:?}");
        rows.push(format!("eps {eps}: {counts:?}"));
    }
    Ok(rows.join(", "))
}

// ---------------------------------------------------------------------------
// 7. derivative validation

fn place(dim: usize, a: &MeshData, b: &MeshData, dir: Vec3, gap: f64) -> SurfaceMesh {
    let build = |s: f64| {
        let bt = transform_nodes(b, &Matrix3::identity(), &dir.scale_f(s));
        SurfaceMesh::from_meshes(dim, &[a.clone(), bt]).unwrap()
    };
    let too_close = |m: &SurfaceMesh| intersects(m) || min_distance(m, &all_pairs(m).pairs).unwrap() < gap;
    let (mut lo, mut hi) = (0.0, 4.0);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if too_close(&build(mid)) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    build(hi)
}

fn random_rotation(rng: &mut ChaCha8Rng) -> Matrix3<f64> {
    let axis = Unit::new_normalize(Vector3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    *Rotation3::from_axis_angle(&axis, rng.gen_range(0.0..TAU)).matrix()
}

fn random_scene(rng: &mut ChaCha8Rng, dim: usize, eps: f64) -> SurfaceMesh {
    let gap = eps * rng.gen_range(0.15..0.8);
    if dim == 2 {
        let a = rect_tris(2, 2, 1.0, 1.0, [0.0, 0.0]);
        let b = transform_nodes(&rect_tris(2, 2, 1.0, 1.0, [-0.5, -0.5]), &rotation_z(rng.gen_range(0.0..TAU)), &v(0.5, 0.5, 0.0));
        let th: f64 = rng.gen_range(0.0..TAU);
        place(2, &a, &b, v(th.cos(), th.sin(), 0.0), gap)
    } else {
        let a = box_tets(1, 1, 1, [1.0; 3], [0.0; 3]);
        let b = transform_nodes(&box_tets(1, 1, 1, [1.0; 3], [-0.5; 3]), &random_rotation(rng), &v(0.5, 0.5, 0.5));
        let d = v(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)).normalized();
        place(3, &a, &b, d, gap)
    }
}

/// Corner of a rotated block hovering `gap` above the top of a unit block,
/// horizontally `delta` from the end of the top boundary (a closest-point
/// region transition).
fn transition_scene(rng: &mut ChaCha8Rng, dim: usize, eps: f64) -> SurfaceMesh {
    let gap = eps * rng.gen_range(0.2..0.8);
    let delta = rng.gen_range(1e-4..1e-3) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
    let (a, b) = if dim == 2 {
        let rot = rotation_z(FRAC_PI_4 + rng.gen_range(-0.2..0.2));
        (rect_tris(2, 2, 1.0, 1.0, [0.0, 0.0]), transform_nodes(&rect_tris(2, 2, 0.5, 0.5, [-0.25, -0.25]), &rot, &v(0.0, 0.0, 0.0)))
    } else {
        let down = Rotation3::rotation_between(&Vector3::new(-1.0, -1.0, -1.0), &Vector3::new(0.0, 0.0, -1.0)).unwrap();
        let spin = Rotation3::from_axis_angle(&Vector3::z_axis(), rng.gen_range(0.0..TAU));
        let tilt = Rotation3::from_axis_angle(&Vector3::x_axis(), rng.gen_range(-0.1..0.1));
        let rot = *(tilt * spin * down).matrix();
        (box_tets(1, 1, 1, [1.0; 3], [0.0; 3]), transform_nodes(&box_tets(1, 1, 1, [0.5; 3], [-0.25; 3]), &rot, &v(0.0, 0.0, 0.0)))
    };
    let up = dim - 1;
    let tip = b.nodes.iter().min_by(|p, q| p[up].total_cmp(&q[up])).unwrap().clone();
    let target = if dim == 2 { v(1.0 + delta, 1.0 + gap, 0.0) } else { v(1.0 + delta, rng.gen_range(0.3..0.7), 1.0 + gap) };
    let shift = target - v(tip[0], tip[1], if dim == 3 { tip[2] } else { 0.0 });
    SurfaceMesh::from_meshes(dim, &[a, transform_nodes(&b, &Matrix3::identity(), &shift)]).unwrap()
}

fn shifted(x: &[Vec3], dim: usize, i: usize, h: f64) -> Vec<Vec3> {
    let mut y = x.to_vec();
    let c = &mut y[i / dim];
    match i % dim {
        0 => c.x += h,
        1 => c.y += h,
        _ => c.z += h,
    }
    y
}

/// Relative gradient and Hessian errors against central differences.
fn fd_errors(m: &SurfaceMesh, p: &PotentialParams) -> Result<(f64, f64, f64), Box<dyn StdError>> {
    let kind = PotentialKind::Geometric;
    let x = &m.positions;
    let dim = m.dim;
    let a = potential::assemble(kind, m, x, p, Order::Hessian { project: false })?;
    let hd = a.hessian.to_dense();
    let h = 1e-6 * m.bbox_diagonal();
    let n = m.num_dofs();
    let (mut gerr, mut herr) = (0.0f64, 0.0f64);
    for i in 0..n {
        let (xp, xm) = (shifted(x, dim, i, h), shifted(x, dim, i, -h));
        let ep = potential::assemble(kind, m, &xp, p, Order::Gradient)?;
        let em = potential::assemble(kind, m, &xm, p, Order::Gradient)?;
        gerr = gerr.max((a.gradient[i] - (ep.energy - em.energy) / (2.0 * h)).abs());
        for j in 0..n {
            herr = herr.max((hd[(j, i)] - (ep.gradient[j] - em.gradient[j]) / (2.0 * h)).abs());
        }
    }
    Ok((a.energy, gerr / max_abs(a.gradient.iter().copied()), herr / hd.amax()))
}

fn derivative_validation() -> Check {
    let eps = 0.1;
    let p2 = PotentialParams::new(2, eps);
    let p3 = PotentialParams::new(3, eps);
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut worst_g, mut worst_h) = (0.0f64, 0.0f64);
    let mut done = 0;
    let mut transitions = 0;
    let mut attempts = 0;
    while done < 50 {
        attempts += 1;
        ensure!(attempts < 500, "could not build enough active scenes");
        let near = done >= 40;
        let dim = if done % 5 < 3 { 2 } else { 3 };
        let mut m = if near { transition_scene(&mut rng, dim, eps) } else { random_scene(&mut rng, dim, eps) };
        m.set_uniform_eps(eps);
        let p = if dim == 2 { &p2 } else { &p3 };
        let (e, g, h) = fd_errors(&m, p)?;
        if e == 0.0 {
            continue;
        }
        ensure!(g < 1e-5, "scene {done} (dim {dim}, transition {near}): gradient error {g:e}");
        ensure!(h < 1e-3, "scene {done} (dim {dim}, transition {near}): hessian error {h:e}");
        worst_g = worst_g.max(g);
        worst_h = worst_h.max(h);
        done += 1;
        transitions += near as usize;
    }
    Ok(format!("50 scenes ({transitions} at region transitions): max gradient error {worst_g:.2e}, max hessian error {worst_h:.2e}"))
}

// ---------------------------------------------------------------------------
// 8. barrier growth and intersection-free iterates

fn corner_pair(dim: usize, d: f64) -> SurfaceMesh {
    let s = d / (dim as f64).sqrt();
    if dim == 2 {
        SurfaceMesh::from_meshes(2, &[rect_tris(1, 1, 1.0, 1.0, [0.0, 0.0]), rect_tris(1, 1, 1.0, 1.0, [1.0 + s, 1.0 + s])]).unwrap()
    } else {
        SurfaceMesh::from_meshes(3, &[box_tets(1, 1, 1, [1.0; 3], [0.0; 3]), box_tets(1, 1, 1, [1.0; 3], [1.0 + s; 3])]).unwrap()
    }
}

fn run_steps(f: SceneFile, kind: PotentialKind, steps: usize) -> Result<usize, Box<dyn StdError>> {
    let opts = SolverOptions { potential: kind, check_intersections: true, ..Default::default() };
    let mut sim = Simulator::new(parse_scene(f, None)?, opts)?;
    let mut iterates = 0;
    for _ in 0..steps {
        let r = sim.step()?;
        iterates += r.iterations;
        ensure!(r.min_distance > 0.0, "min distance {}", r.min_distance);
    }
    Ok(iterates)
}

fn barrier_property() -> Check {
    let eps = 0.1;
    let mut slopes = Vec::new();
    for dim in [2, 3] {
        let p = PotentialParams::new(dim, eps);
        // the first sample sits just past eps: placing the corner along the
        // diagonal rounds the exact distance eps to slightly below it
        let mut ds: Vec<f64> = (0..=80).map(|k| eps * 10f64.powf(-(k as f64) / 10.0)).collect();
        ds[0] = eps * (1.0 + 1e-12);
        let es: Vec<f64> = ds
            .iter()
            .map(|&d| {
                let mut m = corner_pair(dim, d);
                m.set_uniform_eps(eps);
                potential::energy(&m, &p)
            })
            .collect::<Result<_, _>>()?;
        ensure!(es[0] == 0.0 && es[1] > 0.0, "dim {dim}: localization at eps");
        ensure!(es.windows(2).all(|w| w[1] > w[0]), "dim {dim}: energy not increasing on approach");
        let bound = -(dim as f64 - 1.0) + 0.1;
        let mut steepest = f64::NEG_INFINITY;
        for k in 10..80 {
            let slope = (es[k + 1].ln() - es[k].ln()) / (ds[k + 1].ln() - ds[k].ln());
            ensure!(slope <= bound, "dim {dim}: slope {slope} at d = {:e}", ds[k]);
            steepest = steepest.max(slope);
        }
        slopes.push(format!("{dim}D slope <= {steepest:.3}"));
    }

    // dynamic runs, every accepted iterate checked for intersections
    let mut iterates = 0;
    let mut f = scene(2, vec![corner_square(2, 0.5, 0.05), ground2(-1.0, 1.0, 0.0)], 0.005);
    f.dt = 1e-3;
    f.meshes[0].velocity = Some(vec![0.0, -2.0]);
    iterates += run_steps(f, PotentialKind::Geometric, 60)?;
    for kind in [PotentialKind::Geometric, PotentialKind::Ipc] {
        let mut f = scene(2, vec![rect_tris(2, 2, 0.4, 0.4, [0.0, 0.03]), ground2(-1.0, 1.0, 0.0)], 0.02);
        f.gravity = Some(vec![0.0, -9.8]);
        f.meshes[0].velocity = Some(vec![0.3, -1.5]);
        iterates += run_steps(f, kind, 40)?;
    }
    let mut f = scene(2, vec![rect_tris(2, 2, 0.5, 0.5, [0.0, 0.0]), rect_tris(2, 2, 0.5, 0.5, [0.55, 0.2])], 0.02);
    f.meshes[0].velocity = Some(vec![2.0, 0.0]);
    f.meshes[1].velocity = Some(vec![-2.0, 0.0]);
    iterates += run_steps(f, PotentialKind::Geometric, 40)?;
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let cube = transform_nodes(&box_tets(2, 2, 2, [0.3; 3], [-0.15; 3]), &random_rotation(&mut rng), &v(0.0, 0.0, 0.3));
    let mut f = scene(3, vec![cube, ground3(1.0)], 0.01);
    f.gravity = Some(vec![0.0, 0.0, -9.8]);
    f.meshes[0].velocity = Some(vec![0.0, 0.0, -3.0]);
    f.dt = 5e-3;
    iterates += run_steps(f, PotentialKind::Geometric, 40)?;
    Ok(format!("{}; {iterates} accepted iterates intersection-free", slopes.join(", ")))
}

// ---------------------------------------------------------------------------
// 9. cone test against a winding oracle

fn random_ring(rng: &mut ChaCha8Rng, convex: bool) -> Vec<Vec3> {
    loop {
        let m = rng.gen_range(3..9);
        let mut th: Vec<f64> = (0..m).map(|_| rng.gen_range(0.0..TAU)).collect();
        th.sort_by(f64::total_cmp);
        let ok = (0..m).all(|i| {
            let d = if i + 1 < m { th[i + 1] - th[i] } else { th[0] + TAU - th[i] };
            d > 0.2 && d < PI - 0.2
        });
        if !ok {
            continue;
        }
        let phase: f64 = rng.gen_range(0.0..TAU);
        let amp: f64 = rng.gen_range(0.3..1.5);
        return th
            .iter()
            .map(|&t| {
                let h = if convex { -rng.gen_range(0.05..2.0) } else { amp * (2.0 * t + phase).sin() + rng.gen_range(-0.2..0.2) };
                v(t.cos(), t.sin(), h)
            })
            .collect();
    }
}

fn ring_normals(e: &[Vec3]) -> Vec<Vec3> {
    let m = e.len();
    (0..m).map(|i| e[(i + m - 1) % m].cross(&e[i]).normalized()).collect()
}

fn arcs_cross(a: &Vec3, b: &Vec3, c: &Vec3, d: &Vec3) -> Option<bool> {
    let n1 = a.cross(b);
    let n2 = c.cross(d);
    let p = n1.cross(&n2);
    if p.norm() < 1e-12 {
        return None;
    }
    let p = p.normalized();
    for q in [p, p * -1.0] {
        let on1 = a.cross(&q).dot(&n1) >= 0.0 && q.cross(b).dot(&n1) >= 0.0;
        let on2 = c.cross(&q).dot(&n2) >= 0.0 && q.cross(d).dot(&n2) >= 0.0;
        if on1 && on2 {
            return Some(true);
        }
    }
    Some(false)
}

/// Inside test by the parity of crossings between the spherical ring polygon
/// and an arc from a reference direction just inside face 0. `None` within
/// 1e-9 of the cone surface.
fn winding_oracle(d: &Vec3, e: &[Vec3], n: &[Vec3]) -> Option<bool> {
    let m = e.len();
    let u: Vec<Vec3> = e.iter().map(|x| x.normalized()).collect();
    for i in 0..m {
        let a = &u[(i + m - 1) % m];
        let b = &u[i];
        let nn = a.cross(b).normalized();
        let s = d.dot(&nn);
        let p = (*d - nn * s).normalized();
        let within = a.cross(&p).dot(&nn) >= 0.0 && p.cross(b).dot(&nn) >= 0.0;
        if (within && s.abs() < 1e-9) || (d - a).norm() < 1e-9 {
            return None;
        }
    }
    let r = ((u[m - 1] + u[0]).normalized() - n[0] * 1e-4).normalized();
    if (r + *d).norm() < 1e-6 {
        return None;
    }
    let mut crossings = 0;
    for i in 0..m {
        match arcs_cross(&r, d, &u[(i + m - 1) % m], &u[i]) {
            Some(true) => crossings += 1,
            Some(false) => {}
            None => return None,
        }
    }
    Some(crossings % 2 == 0)
}

fn random_dir(rng: &mut ChaCha8Rng) -> Vec3 {
    loop {
        let p = v(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let l = p.norm();
        if l > 0.1 && l <= 1.0 {
            return p * (1.0 / l);
        }
    }
}

fn cone_oracle() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let (mut agreed, mut skipped, mut inside) = (0, 0, 0);
    for k in 0..1000 {
        let e = random_ring(&mut rng, k % 2 == 0);
        let n = ring_normals(&e);
        for _ in 0..100 {
            let d = random_dir(&mut rng);
            let got = determine_inside_3d(&d, &e, &n)?;
            if got {
                inside += 1;
                let g = g_e_vertex(&d, &n, 0.1);
                ensure!(g > 0.0, "g_e_vertex is 0 for an inside direction {d:?} of ring {e:?}");
            }
            match winding_oracle(&d, &e, &n) {
                Some(o) => {
                    ensure!(o == got, "ring {k} {e:?}, direction {d:?}: oracle {o}, test {got}");
                    agreed += 1;
                }
                None => skipped += 1,
            }
        }
    }
    Ok(format!("{agreed} agreements, {skipped} near the cone surface skipped; g_e > 0 on all {inside} inside directions"))
}

// ---------------------------------------------------------------------------
// 10. friction statics on an incline

/// Block resting on an incline of angle `theta` (gravity rotated instead of
/// the ground). With friction the block settles on the slope with friction
/// active and the drift over the next 50 steps is returned. Without friction
/// it settles under the normal component only, is released from rest, and
/// the distance slid in 50 steps is returned.
fn incline(mu_ratio: f64, theta: f64) -> Result<f64, Box<dyn StdError>> {
    let g = 9.8;
    let tilted = v(-g * theta.sin(), -g * theta.cos(), 0.0);
    let block = rect_tris(2, 2, 0.2, 0.2, [-0.1, 0.015]);
    let nb = block.nodes.len();
    let mut f = scene(2, vec![block, ground2(-1.0, 1.0, 0.0)], 0.01);
    f.eps_v = 1e-5;
    f.mu = mu_ratio * theta.tan();
    f.gravity = Some(if mu_ratio > 0.0 { vec![tilted.x, tilted.y] } else { vec![0.0, tilted.y] });
    let mut sim = Simulator::new(parse_scene(f, None)?, checked())?;
    for _ in 0..150 {
        sim.step()?;
    }
    let vmax = max_abs(sim.state.velocities[..nb].iter().map(|w| w.norm()));
    ensure!(vmax < 1e-3, "block did not settle (speed {vmax:e})");
    if mu_ratio == 0.0 {
        sim.state.velocities = vec![Vec3::default(); sim.state.velocities.len()];
        sim.scene.gravity = tilted;
    }
    let centroid = |x: &[Vec3]| x[..nb].iter().map(|p| p.x).sum::<f64>() / nb as f64;
    let c0 = centroid(&sim.state.positions);
    let mut max_disp = 0.0f64;
    let mut disp = 0.0;
    for _ in 0..50 {
        sim.step()?;
        disp = c0 - centroid(&sim.state.positions);
        max_disp = max_disp.max(disp.abs());
    }
    Ok(if mu_ratio > 0.0 { max_disp } else { disp })
}

fn friction_statics() -> Check {
    let theta = 20f64.to_radians();
    let stuck = incline(1.2, theta)?;
    ensure!(stuck < 1e-4, "block with mu = 1.2 tan(theta) moved {stuck:e} m");
    let slid = incline(0.0, theta)?;
    let t = 50.0 * 0.01;
    let exact = 0.5 * 9.8 * theta.sin() * t * t;
    let rel = (slid - exact).abs() / exact;
    ensure!(rel < 0.05, "frictionless slide {slid:.4} m vs {exact:.4} m");
    Ok(format!("static drift {stuck:.2e} m; frictionless slide {slid:.4} m vs analytic {exact:.4} m ({:.2}%)", 100.0 * rel))
}

// ---------------------------------------------------------------------------
// 11. rigid invariance

fn perturbed(m: &SurfaceMesh, rng: &mut ChaCha8Rng, a: f64) -> SurfaceMesh {
    let mut out = m.clone();
    for (p, dim) in out.positions.iter_mut().zip(std::iter::repeat(m.dim)) {
        p.x += rng.gen_range(-a..a);
        p.y += rng.gen_range(-a..a);
        if dim == 3 {
            p.z += rng.gen_range(-a..a);
        }
    }
    out
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

fn rigid_invariance() -> Check {
    let eps = 0.1;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut scenes = vec![
        random_scene(&mut rng, 2, eps),
        random_scene(&mut rng, 2, eps),
        random_scene(&mut rng, 3, eps),
        random_scene(&mut rng, 3, eps),
        crumpled_strip(5),
    ];
    for s in scenes.iter_mut() {
        *s = perturbed(s, &mut rng, 2e-3);
        s.set_uniform_eps(eps);
    }
    let mut worst = 0.0f64;
    let mut terms_seen = 0;
    for (k, m) in scenes.iter().enumerate() {
        let p = PotentialParams::new(m.dim, eps);
        let bodies = m.body.iter().max().unwrap() + 1;
        let el = Elasticity::new(m, &vec![Material::default(); bodies])?;
        let e_el = el.energy(&m.positions);
        let terms = collect_terms(m, &p)?;
        let e_c: f64 = terms.iter().map(|t| t.energy).sum();
        ensure!(e_c > 0.0 && e_el > 0.0, "scene {k} is not loaded (contact {e_c:e}, elastic {e_el:e})");
        terms_seen += terms.len();
        for _ in 0..20 {
            let r = if m.dim == 2 { rotation_z(rng.gen_range(0.0..TAU)) } else { random_rotation(&mut rng) };
            let t = v(rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0), if m.dim == 3 { rng.gen_range(-5.0..5.0) } else { 0.0 });
            let mr = rigid_transform(m, &r, &t)?;
            let tr = collect_terms(&mr, &p)?;
            ensure!(tr.len() == terms.len(), "scene {k}: {} terms vs {}", tr.len(), terms.len());
            let mut err = rel(e_c, tr.iter().map(|t| t.energy).sum());
            err = err.max(rel(e_el, el.energy(&mr.positions)));
            for (a, b) in terms.iter().zip(&tr) {
                ensure!(a.pair == b.pair, "scene {k}: term sets differ");
                err = err.max(rel(a.gamma(), b.gamma()));
            }
            ensure!(err < 1e-10, "scene {k}: relative change {err:e}");
            worst = worst.max(err);
        }
    }
    Ok(format!("5 scenes x 20 transforms ({terms_seen} terms): max relative change {worst:.2e}"))
}

// ---------------------------------------------------------------------------

fn main() {
    let only: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let criteria: [(u32, &str, f64, fn() -> Check); 11] = [
        (1, "zero rest forces", 30.0, zero_rest_forces),
        (2, "compression filter", 60.0, compression_filter),
        (3, "thin membrane filter", 120.0, thin_membrane),
        (4, "corner drop refinement", 300.0, corner_drop),
        (5, "potential refinement convergence", 60.0, refinement_convergence),
        (6, "alpha monotonicity", 60.0, alpha_monotonicity),
        (7, "gradient/hessian validation", 300.0, derivative_validation),
        (8, "barrier growth, intersection-free iterates", 60.0, barrier_property),
        (9, "cone test oracle", 120.0, cone_oracle),
        (10, "friction statics", 60.0, friction_statics),
        (11, "rigid invariance", 30.0, rigid_invariance),
    ];
    let mut failed = 0;
    for (n, name, limit, run) in criteria {
        if !only.is_empty() && !only.contains(&n) {
            continue;
        }
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(run);
        let secs = start.elapsed().as_secs_f64();
        let (pass, msg) = match outcome {
            Ok(Ok(m)) if secs <= limit => (true, m),
            Ok(Ok(m)) => (false, format!("{m}; runtime {secs:.1}s over the {limit}s budget")),
            Ok(Err(e)) => (false, e.to_string()),
            Err(_) => (false, "panicked".to_string()),
        };
        failed += !pass as usize;
        println!("criterion {n:>2} [{}] {name} ({secs:.1}s): {msg}", if pass { "PASS" } else { "FAIL" });
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
