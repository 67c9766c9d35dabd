use std::fmt;
use std::path::Path;

use geobarrier::mesh::{load_scene, SurfaceMesh};
use geobarrier::potential::adapt_epsilon;
use geobarrier::proximity::intersecting_pairs;

const BINS: usize = 8;

/// Outcome of checking a scene: a list of failures, or the distribution of
/// adapted localization radii.
#[derive(Debug)]
pub struct Report {
    pub failures: Vec<String>,
    pub histogram: Vec<String>,
}

impl Report {
    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.ok() {
            writeln!(f, "OK")?;
            for line in &self.histogram {
                writeln!(f, "{line}")?;
            }
        } else {
            writeln!(f, "FAILED")?;
            for e in &self.failures {
                writeln!(f, "  {e}")?;
            }
        }
        Ok(())
    }
}

fn histogram(mesh: &SurfaceMesh, eps_trg: f64) -> Vec<String> {
    let groups = [("vertices", &mesh.vertex_eps), ("edges", &mesh.edge_eps), ("faces", &mesh.face_eps)];
    let lo = groups.iter().flat_map(|(_, e)| e.iter().copied()).fold(eps_trg, f64::min);
    let mut out = vec![format!("localization radius histogram (eps_trg = {eps_trg:e})")];
    if lo >= eps_trg {
        let counts: Vec<String> = groups.iter().map(|(n, e)| format!("{n} {}", e.len())).collect();
        out.push(format!("  all at eps_trg: {}", counts.join(", ")));
        return out;
    }
    // log-spaced bins from the smallest radius up to eps_trg (inclusive)
    let ratio = (eps_trg / lo).ln();
    let bin = |e: f64| ((((e / lo).ln() / ratio) * BINS as f64) as usize).min(BINS - 1);
    let mut counts = [[0usize; 3]; BINS];
    for (k, (_, eps)) in groups.iter().enumerate() {
        for &e in eps.iter() {
            counts[bin(e)][k] += 1;
        }
    }
    for (i, c) in counts.iter().enumerate() {
        let a = lo * (ratio * i as f64 / BINS as f64).exp();
        let b = lo * (ratio * (i + 1) as f64 / BINS as f64).exp();
        out.push(format!("  [{a:.3e}, {b:.3e}{}  vertices {}, edges {}, faces {}", if i + 1 == BINS { "]" } else { ")" }, c[0], c[1], c[2]));
    }
    out
}

pub fn validate(path: &Path) -> Report {
    let mut failures = Vec::new();
    let scene = match load_scene(path) {
        Ok(s) => s,
        Err(e) => {
            failures.push(e.to_string());
            return Report { failures, histogram: vec![] };
        }
    };
    let kind = if scene.mesh.dim == 2 { "edges" } else { "faces" };
    for (i, j) in intersecting_pairs(&scene.mesh) {
        failures.push(format!("rest intersection: boundary {kind} {i} and {j}"));
    }
    if !failures.is_empty() {
        return Report { failures, histogram: vec![] };
    }
    let mut mesh = scene.mesh.clone();
    match adapt_epsilon(&mut mesh, &scene.params) {
        Ok(()) => Report { failures, histogram: histogram(&mesh, scene.params.eps_trg) },
        Err(e) => {
            failures.push(e.to_string());
            Report { failures, histogram: vec![] }
        }
    }
}
