//! The `pack` subcommands. Each returns an [`Outcome`] holding the exit
//! status and the text for stdout and stderr, so they can be driven from
//! tests without spawning a process.
//!
//! Documents (result JSON, SVG) go to `--out` when given, else to stdout;
//! human-readable summaries go to stderr. `check` and `verify` print their
//! reports on stdout.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use circpack::mesh::{LogRadiusVector, MeshError, WeightedTriangulation};
use circpack::solver::{default_start, solve, SolveError, SolverOptions};
use circpack::verify::{self, CertificateReport, HessianSampling, MeshSampling, SampleSpec};
use circpack::jacobian;
use circpack::{Geometry, LengthTriple, RadiusTriple, TriangleWeights};

use crate::format::{ResultFile, SolveSummary, SurfaceFile};
use crate::layout;

/// Exit-code contract.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok = 0,
    Invalid = 1,
    Infeasible = 2,
    NotConverged = 3,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub status: Status,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn new() -> Self {
        Self { status: Status::Ok, stdout: String::new(), stderr: String::new() }
    }

    fn fail(status: Status, message: impl std::fmt::Display) -> Self {
        Self { status, stdout: String::new(), stderr: format!("error: {message}\n") }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Options {
    /// Overrides the geometry tag of the input (or filters `verify`).
    pub geometry: Option<Geometry>,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub checks: Vec<String>,
    pub root: usize,
    pub samples: Option<usize>,
}

/// Agreement required between per-face recoveries of one radius.
pub const INVERT_AGREEMENT: f64 = 1e-8;
pub const DEFAULT_SEED: u64 = 20_240_601;
pub const DEFAULT_SAMPLES: usize = 10_000;

fn load(path: &Path, opts: &Options) -> Result<SurfaceFile, Outcome> {
    SurfaceFile::read(path, opts.geometry).map_err(|e| Outcome::fail(Status::Invalid, e))
}

fn weighted(file: &SurfaceFile) -> Result<WeightedTriangulation, Outcome> {
    file.weighted().map_err(|e| Outcome::fail(Status::Invalid, e))
}

fn required_radii(file: &SurfaceFile) -> Result<LogRadiusVector, Outcome> {
    match file.log_radii() {
        Ok(Some(u)) => Ok(u),
        Ok(None) => Err(Outcome::fail(Status::Invalid, "field `radii` is required for this command")),
        Err(e) => Err(Outcome::fail(Status::Invalid, e)),
    }
}

/// Writes `doc` to `--out`, or appends it to stdout.
fn emit(o: &mut Outcome, opts: &Options, doc: &str) {
    match &opts.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, doc) {
                o.status = Status::Invalid;
                let _ = writeln!(o.stderr, "error: cannot write {}: {e}", path.display());
            }
        }
        None => {
            o.stdout.push_str(doc);
            if !doc.ends_with('\n') {
                o.stdout.push('\n');
            }
        }
    }
}

/// Every problem with the file, not just the first.
pub fn cmd_check(path: &Path, opts: &Options) -> Outcome {
    let file = match load(path, opts) {
        Ok(f) => f,
        Err(o) => return o,
    };
    let mut o = Outcome::new();
    let mut problems: Vec<String> = file.check_fields().iter().map(ToString::to_string).collect();
    let indices_ok = file.faces.iter().flatten().all(|&v| v < file.vertex_count);

    if indices_ok {
        let t = file.triangulation();
        let report = t.validate();
        let _ = writeln!(o.stdout, "topology: {}", if report.is_valid() { "closed surface" } else { "invalid" });
        let _ = writeln!(
            o.stdout,
            "  V = {}, E = {}, F = {}, chi = {}",
            report.vertices, report.edges, report.faces, report.euler_characteristic
        );
        problems.extend(report.issues.iter().map(|i| i.to_string()));

        let edges = t.edge_faces();
        let given: BTreeMap<_, _> =
            file.weights.iter().map(|&(i, j, w)| (circpack::mesh::EdgeKey::new(i, j), w)).collect();
        for edge in edges.keys().filter(|e| !given.contains_key(e)) {
            problems.push(format!("edge {edge} has no weight"));
        }
        for (edge, w) in &given {
            if !edges.contains_key(edge) {
                problems.push(format!("weight given for {edge}, which is not an edge of the triangulation"));
            } else if !(w.is_finite() && *w >= 0.0) {
                problems.push(format!("edge {edge} has invalid weight {w}"));
            }
        }
    }

    if problems.is_empty() {
        if let Some(radii) = &file.radii {
            let g = file.geometry;
            let wt = file.weighted_unchecked().expect("checked above");
            let mut bad = 0;
            for (f, face) in file.faces.iter().enumerate() {
                let r = RadiusTriple(face.map(|v| radii[v]));
                if !g.is_admissible(&r, &wt.face_weights(f)) {
                    bad += 1;
                    problems.push(format!("face {f} {face:?} is not admissible at the given radii ({g})"));
                }
            }
            let _ = writeln!(o.stdout, "radii: {} of {} faces admissible", file.faces.len() - bad, file.faces.len());
        }
    }

    if problems.is_empty() {
        let _ = writeln!(o.stdout, "ok");
    } else {
        o.status = Status::Invalid;
        for p in &problems {
            let _ = writeln!(o.stdout, "problem: {p}");
        }
    }
    o
}

pub fn cmd_angles(path: &Path, opts: &Options) -> Outcome {
    let run = || -> Result<Outcome, Outcome> {
        let file = load(path, opts)?;
        let wt = weighted(&file)?;
        let u = required_radii(&file)?;
        let result = ResultFile::evaluate(file.geometry, &wt, &u).map_err(|e| Outcome::fail(Status::Invalid, e))?;
        let mut o = Outcome::new();
        let _ = writeln!(
            o.stderr,
            "angle sum defect (sum a_i - pi |F|): {:.3e} [{}]",
            result.angle_sum_defect, file.geometry
        );
        emit(&mut o, opts, &result.to_json());
        Ok(o)
    };
    run().unwrap_or_else(|o| o)
}

pub fn cmd_solve(path: &Path, opts: &Options) -> Outcome {
    let run = || -> Result<Outcome, Outcome> {
        let file = load(path, opts)?;
        let g = file.geometry;
        let wt = weighted(&file)?;
        let target = file
            .targets()
            .ok_or_else(|| Outcome::fail(Status::Invalid, "field `target_angles` is required for solve"))?;
        let u0 = match file.log_radii() {
            Ok(Some(u)) => u,
            Ok(None) => default_start(g, file.vertex_count),
            Err(e) => return Err(Outcome::fail(Status::Invalid, e)),
        };
        let mut options = SolverOptions::default();
        if let Some(tol) = opts.tol {
            options.residual_tolerance = tol;
        }
        if let Some(n) = opts.max_iter {
            options.max_iterations = n;
        }
        let (u, report, status) = match solve(g, &wt, &target, &u0, &options) {
            Ok((u, report)) => (u, report, Status::Ok),
            Err(SolveError::Infeasible(f)) => return Err(Outcome::fail(Status::Infeasible, format!("infeasible target: {f}"))),
            Err(SolveError::Start(e)) => return Err(Outcome::fail(Status::Invalid, format!("start point rejected: {e}"))),
            Err(SolveError::NotConverged { best, report }) => (best, report, Status::NotConverged),
        };
        let mut result = ResultFile::evaluate(g, &wt, &u).map_err(|e| Outcome::fail(Status::Invalid, e))?;
        result.solve = Some(SolveSummary::from(&report));
        let mut o = Outcome::new();
        o.status = status;
        let _ = writeln!(
            o.stderr,
            "{}: residual {:.3e} after {} iterations",
            report.termination, report.residual, report.iterations
        );
        if status == Status::NotConverged {
            let _ = writeln!(o.stderr, "error: no convergence; the best iterate is written");
        }
        emit(&mut o, opts, &result.to_json());
        Ok(o)
    };
    run().unwrap_or_else(|o| o)
}

/// Radii from per-face lengths, with a cross-face consistency check.
pub fn cmd_invert(path: &Path, opts: &Options) -> Outcome {
    let run = || -> Result<Outcome, Outcome> {
        let file = load(path, opts)?;
        let g = file.geometry;
        let wt = weighted(&file)?;
        let lengths = file
            .face_lengths
            .as_ref()
            .ok_or_else(|| Outcome::fail(Status::Invalid, "field `face_lengths` is required for invert"))?;
        let mut per_vertex: Vec<Vec<(usize, f64)>> = vec![Vec::new(); file.vertex_count];
        let mut errors = Vec::new();
        for (f, face) in file.faces.iter().enumerate() {
            match g.radii_from_lengths(&LengthTriple(lengths[f]), &wt.face_weights(f)) {
                Ok(r) => {
                    for (v, x) in face.iter().zip(r.0) {
                        per_vertex[*v].push((f, x));
                    }
                }
                Err(e) => errors.push(MeshError::Face { face: f, vertices: *face, source: e }.to_string()),
            }
        }
        let mut o = Outcome::new();
        if !errors.is_empty() {
            o.status = Status::Invalid;
            for e in errors {
                let _ = writeln!(o.stderr, "error: {e}");
            }
            return Ok(o);
        }
        let mut radii = Vec::with_capacity(file.vertex_count);
        let mut worst: f64 = 0.0;
        for (v, values) in per_vertex.iter().enumerate() {
            let mean = values.iter().map(|p| p.1).sum::<f64>() / values.len() as f64;
            let (lo, hi) = values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.1), b.max(p.1)));
            let spread = (hi - lo) / mean;
            worst = worst.max(spread);
            if !(spread <= INVERT_AGREEMENT) {
                o.status = Status::Invalid;
                let listing: Vec<String> = values.iter().map(|(f, x)| format!("face {f}: {x:.17e}")).collect();
                let _ = writeln!(
                    o.stderr,
                    "error: cross-face disagreement at vertex {v}: relative spread {spread:.3e} > {INVERT_AGREEMENT:e} ({})",
                    listing.join(", ")
                );
            }
            radii.push(mean);
        }
        let _ = writeln!(o.stderr, "worst relative cross-face spread {worst:.3e}");
        if o.status != Status::Ok {
            return Ok(o);
        }
        let u = LogRadiusVector::from_radii(g, &radii).map_err(|e| Outcome::fail(Status::Invalid, e))?;
        let result = ResultFile::evaluate(g, &wt, &u).map_err(|e| Outcome::fail(Status::Invalid, e))?;
        emit(&mut o, opts, &result.to_json());
        Ok(o)
    };
    run().unwrap_or_else(|o| o)
}

/// Certificates selectable with `--check`.
pub const CHECKS: [&str; 11] = [
    "symmetry",
    "spectrum",
    "closedness",
    "injectivity",
    "inequality2",
    "minors",
    "jacobian-fd",
    "hessian-fd",
    "rigidity",
    "gauge",
    "witness",
];

/// Checks run when no `--check` is given.
pub const DEFAULT_CHECKS: [&str; 8] =
    ["symmetry", "spectrum", "closedness", "injectivity", "inequality2", "minors", "jacobian-fd", "hessian-fd"];

fn solids() -> [(&'static str, circpack::mesh::Triangulation); 3] {
    use circpack::mesh::Triangulation;
    [
        ("tetrahedron", Triangulation::tetrahedron()),
        ("octahedron", Triangulation::octahedron()),
        ("icosahedron", Triangulation::icosahedron()),
    ]
}

fn run_check(name: &str, geometries: &[Geometry], samples: usize, seed: u64) -> Vec<CertificateReport> {
    let mut out = Vec::new();
    let euclidean = geometries.contains(&Geometry::Euclidean);
    let hyperbolic = geometries.contains(&Geometry::Hyperbolic);
    let spec = |g| SampleSpec::new(g, samples, seed);
    match name {
        "symmetry" => out.extend(geometries.iter().map(|&g| verify::certify_symmetry(&spec(g)))),
        "spectrum" => out.extend(geometries.iter().map(|&g| verify::certify_spectrum(&spec(g)))),
        "closedness" => out.extend(geometries.iter().map(|&g| verify::certify_closedness(&spec(g)))),
        "injectivity" => out.extend(geometries.iter().map(|&g| verify::certify_injectivity(&spec(g)))),
        "inequality2" if euclidean => out.push(verify::certify_inequality2_equivalence(&spec(Geometry::Euclidean))),
        "minors" if hyperbolic => out.push(verify::certify_minor_inequalities(&spec(Geometry::Hyperbolic))),
        "jacobian-fd" => out.extend(
            geometries.iter().map(|&g| verify::certify_jacobian_fd(&spec(g).with_margin(verify::FD_MARGIN))),
        ),
        "hessian-fd" => {
            for (mesh, t) in solids().into_iter().take(2) {
                let wt = WeightedTriangulation::uniform(t, 1.0).expect("solids are closed surfaces");
                for &g in geometries {
                    let sampling =
                        HessianSampling { geometry: g, radius_range: (0.5, 2.0), count: samples.min(200), seed };
                    out.push(verify::certify_hessian_fd(mesh, &wt, &sampling));
                }
            }
        }
        "rigidity" => {
            for (mesh, t) in solids() {
                for &g in geometries {
                    let s = MeshSampling::new(g, samples.min(20), seed);
                    out.push(verify::certify_local_rigidity(mesh, &t, &s, &SolverOptions::default(), 1e-8, 25));
                }
            }
        }
        "gauge" => {
            for (mesh, t) in solids() {
                if euclidean {
                    let s = MeshSampling::new(Geometry::Euclidean, samples.min(100), seed);
                    out.push(verify::certify_scaling_gauge(mesh, &t, &s, 1e-12));
                }
                if hyperbolic {
                    let s = MeshSampling::new(Geometry::Hyperbolic, samples.min(20), seed);
                    out.push(verify::certify_start_independence(mesh, &t, &s, &SolverOptions::default(), 1e-8));
                }
            }
        }
        _ => {}
    }
    out
}

/// The two worked-matrix regressions, then the selected certificates.
pub fn cmd_verify(opts: &Options) -> Outcome {
    let mut o = Outcome::new();
    let unknown: Vec<&String> = opts.checks.iter().filter(|c| !CHECKS.contains(&c.as_str())).collect();
    if !unknown.is_empty() {
        return Outcome::fail(Status::Invalid, format!("unknown check(s) {unknown:?}; available: {}", CHECKS.join(", ")));
    }
    let geometries: Vec<Geometry> = match opts.geometry {
        Some(g) => vec![g],
        None => vec![Geometry::Euclidean, Geometry::Hyperbolic],
    };
    let seed = opts.seed.unwrap_or(DEFAULT_SEED);
    let samples = opts.samples.unwrap_or(DEFAULT_SAMPLES);
    let selected: Vec<&str> = if opts.checks.is_empty() {
        DEFAULT_CHECKS.to_vec()
    } else {
        CHECKS.iter().copied().filter(|c| opts.checks.iter().any(|s| s == c)).collect()
    };

    let mut reports = vec![verify::worked_n_regression(), verify::worked_m_regression()];
    let mut witnesses = Vec::new();
    for name in &selected {
        if *name == "witness" {
            if geometries.contains(&Geometry::Euclidean) {
                let budget = samples.max(1_000_000);
                for w in [2.0, 1.0] {
                    witnesses.push(verify::find_nonconvexity_witness(&TriangleWeights::splat(w), budget, seed));
                }
            }
            continue;
        }
        reports.extend(run_check(name, &geometries, samples, seed));
    }

    let _ = writeln!(o.stdout, "seed {seed}, samples {samples}, checks {}", selected.join(" "));
    let (l, r) = (LengthTriple::new(2.0, 2.0, 3.0), RadiusTriple::splat(1.0));
    for (name, m) in [("N", jacobian::matrix_n(&l, &r)), ("M", jacobian::matrix_m(&l, &r))] {
        if let Ok(m) = m {
            let mut ev: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
            ev.sort_by(|a, b| b.total_cmp(a));
            let shown: Vec<String> = ev.iter().map(|x| format!("{:.12}", if x.abs() < 5e-13 { 0.0 } else { *x })).collect();
            let _ = writeln!(o.stdout, "eigenvalues of {name} at l = (2, 2, 3), r = (1, 1, 1): {}", shown.join(", "));
        }
    }
    for r in &reports {
        o.stdout.push_str(&r.to_string());
        if !r.passed {
            o.status = Status::Invalid;
        }
    }
    // the witness must exist at I = 2 and must not at I = 1
    for w in &witnesses {
        let expected = w.weights[0] > 1.0;
        let ok = w.found() == expected && w.witness.as_ref().is_none_or(|x| x.reverified);
        let _ = write!(o.stdout, "{} {w}", if ok { "PASS" } else { "FAIL" });
        if !w.to_string().ends_with('\n') {
            o.stdout.push('\n');
        }
        if !ok {
            o.status = Status::Invalid;
        }
    }
    let passed = reports.iter().filter(|r| r.passed).count();
    let _ = writeln!(o.stdout, "{passed} of {} certificates passed", reports.len());
    if let Some(path) = &opts.out {
        let doc = serde_json::json!({ "seed": seed, "samples": samples, "certificates": reports, "witness_searches": witnesses });
        if let Err(e) = std::fs::write(path, serde_json::to_string_pretty(&doc).expect("reports serialize")) {
            o.status = Status::Invalid;
            let _ = writeln!(o.stderr, "error: cannot write {}: {e}", path.display());
        }
    }
    o
}

pub fn cmd_layout(path: &Path, opts: &Options) -> Outcome {
    let run = || -> Result<Outcome, Outcome> {
        let file = load(path, opts)?;
        let wt = weighted(&file)?;
        let u = required_radii(&file)?;
        let net = layout::develop(file.geometry, &wt, &u, opts.root).map_err(|e| Outcome::fail(Status::Invalid, e))?;
        let mut o = Outcome::new();
        let _ = writeln!(
            o.stderr,
            "{} faces and {} circles developed from root face {} [{}]",
            net.faces.len(),
            net.circles.len(),
            net.root,
            file.geometry
        );
        emit(&mut o, opts, &net.to_svg());
        Ok(o)
    };
    run().unwrap_or_else(|o| o)
}
