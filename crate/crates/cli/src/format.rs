//! The surface and result documents, plus an OFF import shim.
//!
//! Both documents are JSON. Floats are written in the shortest form that
//! parses back to the same `f64`, so a read/write cycle is lossless.

use std::collections::BTreeSet;
use std::path::Path;

use circpack::mesh::{EdgeKey, LogRadiusVector, MeshError, Triangulation, WeightedTriangulation};
use circpack::solver::{SolveReport, TargetAngles};
use circpack::Geometry;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {source}")]
    Json { path: String, source: serde_json::Error },
    #[error("{path}, line {line}: {message}")]
    Off { path: String, line: usize, message: String },
    #[error("field `{field}`: {message}")]
    Field { field: &'static str, message: String },
    #[error(transparent)]
    Mesh(#[from] MeshError),
}

fn field(field: &'static str, message: impl Into<String>) -> FormatError {
    FormatError::Field { field, message: message.into() }
}

/// Input document: a weighted triangulation and optional per-vertex data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceFile {
    pub geometry: Geometry,
    pub vertex_count: usize,
    pub faces: Vec<[usize; 3]>,
    /// `[i, j, I]` with `i < j`.
    pub weights: Vec<(usize, usize, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radii: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_angles: Option<Vec<f64>>,
    /// Per face `[l_jk, l_ki, l_ij]` for face `[i, j, k]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub face_lengths: Option<Vec<[f64; 3]>>,
}

impl SurfaceFile {
    pub fn from_json(path: &str, text: &str) -> Result<Self, FormatError> {
        serde_json::from_str(text).map_err(|source| FormatError::Json { path: path.to_string(), source })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("surface documents serialize")
    }

    /// Reads JSON, or OFF when the extension is `.off`.
    pub fn read(path: &Path, geometry: Option<Geometry>) -> Result<Self, FormatError> {
        let name = path.display().to_string();
        let text = std::fs::read_to_string(path).map_err(|source| FormatError::Io { path: name.clone(), source })?;
        let is_off = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("off"));
        let mut file = if is_off {
            Self::from_off(&name, &text, geometry.unwrap_or(Geometry::Euclidean))?
        } else {
            Self::from_json(&name, &text)?
        };
        if let Some(g) = geometry {
            file.geometry = g;
        }
        Ok(file)
    }

    /// Triangle faces of an OFF file with every weight set to 1. Vertex
    /// coordinates are ignored.
    pub fn from_off(path: &str, text: &str, geometry: Geometry) -> Result<Self, FormatError> {
        let err = |line: usize, message: String| FormatError::Off { path: path.to_string(), line, message };
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(k, l)| (k + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());
        let (n, header) = lines.next().ok_or_else(|| err(1, "empty file".into()))?;
        let mut counts_line = if header == "OFF" {
            lines.next().ok_or_else(|| err(n, "missing counts".into()))?
        } else if let Some(rest) = header.strip_prefix("OFF") {
            (n, rest.trim())
        } else {
            return Err(err(n, format!("expected `OFF`, found `{header}`")));
        };
        if counts_line.1.is_empty() {
            counts_line = lines.next().ok_or_else(|| err(n, "missing counts".into()))?;
        }
        let counts: Vec<usize> = counts_line
            .1
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| err(counts_line.0, format!("bad count `{t}`"))))
            .collect::<Result<_, _>>()?;
        let [vertex_count, face_count, ..] = counts[..] else {
            return Err(err(counts_line.0, "expected vertex and face counts".into()));
        };
        for _ in 0..vertex_count {
            lines.next().ok_or_else(|| err(counts_line.0, "fewer vertex lines than declared".into()))?;
        }
        let mut faces = Vec::with_capacity(face_count);
        for _ in 0..face_count {
            let (k, l) = lines.next().ok_or_else(|| err(counts_line.0, "fewer face lines than declared".into()))?;
            let idx: Vec<usize> = l
                .split_whitespace()
                .map(|t| t.parse().map_err(|_| err(k, format!("bad index `{t}`"))))
                .collect::<Result<_, _>>()?;
            match idx[..] {
                [3, a, b, c, ..] => faces.push([a, b, c]),
                _ => return Err(err(k, "only triangular faces are supported".into())),
            }
        }
        let t = Triangulation::new(vertex_count, faces.clone());
        let weights = t.edges().into_iter().map(|e| (e.0, e.1, 1.0)).collect();
        Ok(Self { geometry, vertex_count, faces, weights, radii: None, target_angles: None, face_lengths: None })
    }

    pub fn triangulation(&self) -> Triangulation {
        Triangulation::new(self.vertex_count, self.faces.clone())
    }

    /// Structural checks on the document itself (index ranges, canonical
    /// weight order, array sizes). Topology is checked separately.
    pub fn check_fields(&self) -> Vec<FormatError> {
        let mut errors = Vec::new();
        let n = self.vertex_count;
        if n == 0 {
            errors.push(field("vertex_count", "must be positive"));
        }
        for (f, face) in self.faces.iter().enumerate() {
            if let Some(v) = face.iter().find(|&&v| v >= n) {
                errors.push(field("faces", format!("face {f} {face:?} references vertex {v} >= {n}")));
            }
        }
        let mut seen = BTreeSet::new();
        for &(i, j, w) in &self.weights {
            if i >= j {
                errors.push(field("weights", format!("entry [{i}, {j}, {w}] must have i < j")));
            }
            if !seen.insert(EdgeKey::new(i, j)) {
                errors.push(field("weights", format!("edge ({i}, {j}) listed twice")));
            }
        }
        let sized = |name: &'static str, len: Option<usize>, want: usize, errors: &mut Vec<FormatError>| {
            if let Some(len) = len.filter(|&l| l != want) {
                errors.push(field(name, format!("has {len} entries, expected {want}")));
            }
        };
        sized("radii", self.radii.as_ref().map(Vec::len), n, &mut errors);
        sized("target_angles", self.target_angles.as_ref().map(Vec::len), n, &mut errors);
        sized("face_lengths", self.face_lengths.as_ref().map(Vec::len), self.faces.len(), &mut errors);
        if let Some(r) = &self.radii {
            if let Some((v, x)) = r.iter().enumerate().find(|(_, x)| !(x.is_finite() && **x > 0.0)) {
                errors.push(field("radii", format!("vertex {v} has radius {x}")));
            }
        }
        errors
    }

    /// Validated weighted triangulation.
    pub fn weighted(&self) -> Result<WeightedTriangulation, FormatError> {
        if let Some(e) = self.check_fields().into_iter().next() {
            return Err(e);
        }
        Ok(WeightedTriangulation::new(self.triangulation(), self.weights.iter().copied())?)
    }

    /// Weighted triangulation without the closed-surface checks (still
    /// requires exact weight coverage).
    pub fn weighted_unchecked(&self) -> Result<WeightedTriangulation, FormatError> {
        if let Some(e) = self.check_fields().into_iter().next() {
            return Err(e);
        }
        Ok(WeightedTriangulation::with_unchecked_topology(self.triangulation(), self.weights.iter().copied())?)
    }

    pub fn log_radii(&self) -> Result<Option<LogRadiusVector>, FormatError> {
        self.radii
            .as_ref()
            .map(|r| LogRadiusVector::from_radii(self.geometry, r).map_err(|e| field("radii", e.to_string())))
            .transpose()
    }

    pub fn targets(&self) -> Option<TargetAngles> {
        self.target_angles.clone().map(TargetAngles)
    }
}

/// Lengths and angles of one face, in its vertex order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FaceRecord {
    pub vertices: [usize; 3],
    /// `[l_jk, l_ki, l_ij]`.
    pub lengths: [f64; 3],
    pub angles: [f64; 3],
}

/// Condensed [`SolveReport`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveSummary {
    pub converged: bool,
    pub iterations: usize,
    pub initial_residual: f64,
    pub residual: f64,
    pub termination: String,
    pub residual_trace: Vec<f64>,
}

impl From<&SolveReport> for SolveSummary {
    fn from(r: &SolveReport) -> Self {
        Self {
            converged: r.converged,
            iterations: r.iterations,
            initial_residual: r.initial_residual,
            residual: r.residual,
            termination: r.termination.to_string(),
            residual_trace: r.trace.iter().map(|t| t.residual).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultFile {
    pub geometry: Geometry,
    pub radii: Vec<f64>,
    pub log_radii: Vec<f64>,
    pub cone_angles: Vec<f64>,
    /// `sum a_i - pi |F|`: zero up to rounding for Euclidean, negative for
    /// hyperbolic.
    pub angle_sum_defect: f64,
    pub faces: Vec<FaceRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solve: Option<SolveSummary>,
}

impl ResultFile {
    /// Evaluates everything at `u`. Fails on the first inadmissible face.
    pub fn evaluate(g: Geometry, wt: &WeightedTriangulation, u: &LogRadiusVector) -> Result<Self, MeshError> {
        let cone = wt.cone_angles(g, u)?;
        let radii = u.radii(g)?;
        let mut faces = Vec::with_capacity(wt.face_count());
        for (f, face) in wt.faces().iter().enumerate() {
            let wrap = |source| MeshError::Face { face: f, vertices: *face, source };
            let r = g.r_from_u(&u.face(*face)).map_err(wrap)?;
            let lengths = g.lengths_of_triangle(&r, &wt.face_weights(f)).map_err(wrap)?;
            let angles = g.angles(&lengths).map_err(wrap)?;
            faces.push(FaceRecord { vertices: *face, lengths: lengths.0, angles: angles.0 });
        }
        Ok(Self {
            geometry: g,
            radii,
            log_radii: u.0.clone(),
            angle_sum_defect: cone.sum() - std::f64::consts::PI * wt.face_count() as f64,
            cone_angles: cone.0,
            faces,
            solve: None,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("result documents serialize")
    }

    pub fn from_json(path: &str, text: &str) -> Result<Self, FormatError> {
        serde_json::from_str(text).map_err(|source| FormatError::Json { path: path.to_string(), source })
    }
}
