use std::fs::{self, File};
use std::path::Path;

use anyhow::Context;
use geobarrier::dynamics::{Simulator, SolverOptions, StepReport};
use geobarrier::mesh::{load_scene, write_obj};
use geobarrier::potential::{collect_terms_at, ipc_terms, PotentialKind};
use serde::Serialize;

use crate::Args;

/// One row of `summary.csv`. Step 0 is the initial state.
#[derive(Serialize)]
struct SummaryRow {
    step: usize,
    time: f64,
    iterations: usize,
    total: f64,
    elastic: f64,
    contact: f64,
    friction: f64,
    min_distance: f64,
    max_gradient: f64,
}

impl SummaryRow {
    fn new(step: usize, time: f64, r: &StepReport) -> Self {
        // adding 0.0 turns -0.0 into 0.0
        Self {
            step,
            time,
            iterations: r.iterations,
            total: r.total + 0.0,
            elastic: r.elastic + 0.0,
            contact: r.contact + 0.0,
            friction: r.friction + 0.0,
            min_distance: r.min_distance,
            max_gradient: r.max_gradient,
        }
    }
}

const TERM_COLUMNS: [&str; 13] =
    ["step", "pair", "a", "b", "distance", "g_m_xy", "g_m_yx", "g_e_xy", "g_e_yx", "mollifier", "gamma", "weight", "energy"];

/// One row of `terms.csv`. Directional factors are empty for the baseline.
#[derive(Serialize)]
struct TermRow {
    step: usize,
    pair: String,
    a: usize,
    b: usize,
    distance: f64,
    g_m_xy: Option<f64>,
    g_m_yx: Option<f64>,
    g_e_xy: Option<f64>,
    g_e_yx: Option<f64>,
    mollifier: Option<f64>,
    gamma: Option<f64>,
    weight: Option<f64>,
    energy: f64,
}

fn write_terms(w: &mut csv::Writer<File>, sim: &Simulator, step: usize) -> anyhow::Result<()> {
    let mesh = &sim.scene.mesh;
    let x = &sim.state.positions;
    match sim.options.potential {
        PotentialKind::Geometric => {
            for t in collect_terms_at(mesh, x, &sim.scene.params)? {
                let f = t.factor;
                w.serialize(TermRow {
                    step,
                    pair: format!("{:?}", t.pair.kind),
                    a: t.pair.a.index(),
                    b: t.pair.b.index(),
                    distance: t.distance,
                    g_m_xy: Some(f.g_m_xy),
                    g_m_yx: Some(f.g_m_yx),
                    g_e_xy: Some(f.g_e_xy),
                    g_e_yx: Some(f.g_e_yx),
                    mollifier: Some(f.mollifier),
                    gamma: Some(f.gamma()),
                    weight: Some(t.weight),
                    energy: t.energy,
                })?;
            }
        }
        PotentialKind::Ipc => {
            for t in ipc_terms(mesh, x, &sim.scene.params)? {
                w.serialize(TermRow {
                    step,
                    pair: format!("{:?}", t.pair.kind),
                    a: t.pair.a.index(),
                    b: t.pair.b.index(),
                    distance: t.distance,
                    g_m_xy: None,
                    g_m_yx: None,
                    g_e_xy: None,
                    g_e_yx: None,
                    mollifier: None,
                    gamma: None,
                    weight: None,
                    energy: t.energy,
                })?;
            }
        }
    }
    Ok(())
}

fn write_frame(out: &Path, sim: &Simulator, step: usize) -> anyhow::Result<()> {
    let mut mesh = sim.scene.mesh.clone();
    mesh.positions.clone_from(&sim.state.positions);
    let path = out.join(format!("frame_{step:06}.obj"));
    fs::write(&path, write_obj(&mesh)).with_context(|| format!("writing {}", path.display()))
}

pub fn run(args: &Args) -> anyhow::Result<()> {
    let scene = load_scene(&args.scene).with_context(|| format!("loading {}", args.scene.display()))?;
    let options = SolverOptions { potential: args.potential.into(), ..Default::default() };
    let mut sim = Simulator::new(scene, options)?;
    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;

    let mut summary = csv::Writer::from_path(args.out.join("summary.csv"))?;
    let mut terms = None;
    if args.dump_terms {
        // header written up front so a run without contact still has one
        let mut w = csv::WriterBuilder::new().has_headers(false).from_path(args.out.join("terms.csv"))?;
        w.write_record(TERM_COLUMNS)?;
        terms = Some(w);
    }

    summary.serialize(SummaryRow::new(0, sim.state.time, &sim.evaluate()?))?;
    write_frame(&args.out, &sim, 0)?;
    if let Some(w) = terms.as_mut() {
        write_terms(w, &sim, 0)?;
    }
    for step in 1..=args.steps {
        let report = sim.step().with_context(|| format!("step {step}"))?.clone();
        log::info!("step {step}: {} iterations, contact {:e}, min distance {:e}", report.iterations, report.contact, report.min_distance);
        summary.serialize(SummaryRow::new(step, sim.state.time, &report))?;
        write_frame(&args.out, &sim, step)?;
        if let Some(w) = terms.as_mut() {
            write_terms(w, &sim, step)?;
        }
    }
    summary.flush()?;
    if let Some(mut w) = terms {
        w.flush()?;
    }
    Ok(())
}
