//! Closed weighted triangulated surfaces, cone angles and the assembled
//! Hessian of the total energy.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{Geometry, GeometryError, LogRadiusTriple, TriangleWeights};

/// Unordered edge stored as `(min, max)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EdgeKey(pub usize, pub usize);

impl EdgeKey {
    pub fn new(a: usize, b: usize) -> Self {
        if a <= b {
            EdgeKey(a, b)
        } else {
            EdgeKey(b, a)
        }
    }
}

impl fmt::Display for EdgeKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}, {}}}", self.0, self.1)
    }
}

/// Edges of face `[a, b, c]` in opposite-vertex order: `bc`, `ca`, `ab`.
pub fn face_edges(face: [usize; 3]) -> [EdgeKey; 3] {
    let [a, b, c] = face;
    [EdgeKey::new(b, c), EdgeKey::new(c, a), EdgeKey::new(a, b)]
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Triangulation {
    pub vertex_count: usize,
    pub faces: Vec<[usize; 3]>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum ValidationIssue {
    NoVertices,
    NoFaces,
    IndexOutOfRange { face: usize, vertex: usize },
    RepeatedVertex { face: usize },
    EdgeDegree { edge: EdgeKey, faces: Vec<usize> },
    VertexDegree { vertex: usize, degree: usize },
    LinkNotCycle { vertex: usize },
    Disconnected { components: usize },
    EulerCharacteristic { chi: i64 },
}

impl fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use ValidationIssue::*;
        match self {
            NoVertices => write!(f, "vertex_count is zero"),
            NoFaces => write!(f, "face list is empty"),
            IndexOutOfRange { face, vertex } => write!(f, "face {face} references vertex {vertex}, out of range"),
            RepeatedVertex { face } => write!(f, "face {face} repeats a vertex"),
            EdgeDegree { edge, faces } => {
                write!(f, "edge {edge} lies in {} face(s) {faces:?}, expected 2", faces.len())
            }
            VertexDegree { vertex, degree } => write!(f, "vertex {vertex} lies in {degree} face(s), expected >= 3"),
            LinkNotCycle { vertex } => write!(f, "link of vertex {vertex} is not a single cycle"),
            Disconnected { components } => write!(f, "surface has {components} connected components"),
            EulerCharacteristic { chi } => write!(f, "Euler characteristic {chi} is not an even integer <= 2"),
        }
    }
}

/// Every violated closed-surface invariant; valid iff `issues` is empty.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub issues: Vec<ValidationIssue>,
    pub vertices: usize,
    pub edges: usize,
    pub faces: usize,
    pub euler_characteristic: i64,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.issues.is_empty()
    }

    /// Edges whose face degree is not 2.
    pub fn bad_edges(&self) -> Vec<EdgeKey> {
        self.issues
            .iter()
            .filter_map(|i| match i {
                ValidationIssue::EdgeDegree { edge, .. } => Some(*edge),
                _ => None,
            })
            .collect()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "V = {}, E = {}, F = {}, chi = {}",
            self.vertices, self.edges, self.faces, self.euler_characteristic
        )?;
        for issue in &self.issues {
            write!(f, "\n  {issue}")?;
        }
        Ok(())
    }
}

impl Triangulation {
    pub fn new(vertex_count: usize, faces: Vec<[usize; 3]>) -> Self {
        Self { vertex_count, faces }
    }

    /// Boundary of the tetrahedron.
    pub fn tetrahedron() -> Self {
        Self::new(4, vec![[0, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]])
    }

    /// Boundary of the octahedron; vertices 0 and 5 are the poles.
    pub fn octahedron() -> Self {
        Self::new(
            6,
            vec![[0, 1, 2], [0, 2, 3], [0, 3, 4], [0, 4, 1], [5, 2, 1], [5, 3, 2], [5, 4, 3], [5, 1, 4]],
        )
    }

    /// Boundary of the icosahedron.
    pub fn icosahedron() -> Self {
        Self::new(
            12,
            vec![
                [0, 11, 5],
                [0, 5, 1],
                [0, 1, 7],
                [0, 7, 10],
                [0, 10, 11],
                [1, 5, 9],
                [5, 11, 4],
                [11, 10, 2],
                [10, 7, 6],
                [7, 1, 8],
                [3, 9, 4],
                [3, 4, 2],
                [3, 2, 6],
                [3, 6, 8],
                [3, 8, 9],
                [4, 9, 5],
                [2, 4, 11],
                [6, 2, 10],
                [8, 6, 7],
                [9, 8, 1],
            ],
        )
    }

    /// Each edge with the faces containing it, in face order.
    pub fn edge_faces(&self) -> BTreeMap<EdgeKey, Vec<usize>> {
        let mut map: BTreeMap<EdgeKey, Vec<usize>> = BTreeMap::new();
        for (fi, face) in self.faces.iter().enumerate() {
            for e in face_edges(*face) {
                if e.0 != e.1 {
                    map.entry(e).or_default().push(fi);
                }
            }
        }
        map
    }

    pub fn edges(&self) -> Vec<EdgeKey> {
        self.edge_faces().into_keys().collect()
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.vertex_count as i64 - self.edge_faces().len() as i64 + self.faces.len() as i64
    }

    /// Faces incident to each vertex. Out-of-range indices are skipped.
    pub fn vertex_faces(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.vertex_count];
        for (fi, face) in self.faces.iter().enumerate() {
            let distinct: BTreeSet<usize> = face.iter().copied().collect();
            for v in distinct {
                if v < self.vertex_count {
                    out[v].push(fi);
                }
            }
        }
        out
    }

    pub fn validate(&self) -> ValidationReport {
        let mut issues = Vec::new();
        if self.vertex_count == 0 {
            issues.push(ValidationIssue::NoVertices);
        }
        if self.faces.is_empty() {
            issues.push(ValidationIssue::NoFaces);
        }
        let mut well_formed = true;
        for (fi, face) in self.faces.iter().enumerate() {
            for &v in face {
                if v >= self.vertex_count {
                    issues.push(ValidationIssue::IndexOutOfRange { face: fi, vertex: v });
                    well_formed = false;
                }
            }
            if face[0] == face[1] || face[1] == face[2] || face[2] == face[0] {
                issues.push(ValidationIssue::RepeatedVertex { face: fi });
                well_formed = false;
            }
        }
        let edge_faces = self.edge_faces();
        for (edge, faces) in &edge_faces {
            if faces.len() != 2 {
                issues.push(ValidationIssue::EdgeDegree { edge: *edge, faces: faces.clone() });
            }
        }
        if well_formed {
            let incident = self.vertex_faces();
            for (v, faces) in incident.iter().enumerate() {
                if faces.len() < 3 {
                    issues.push(ValidationIssue::VertexDegree { vertex: v, degree: faces.len() });
                } else if !self.link_is_cycle(v, faces) {
                    issues.push(ValidationIssue::LinkNotCycle { vertex: v });
                }
            }
            let components = self.component_count();
            if components > 1 {
                issues.push(ValidationIssue::Disconnected { components });
            }
        }
        let chi = self.vertex_count as i64 - edge_faces.len() as i64 + self.faces.len() as i64;
        if chi % 2 != 0 || chi > 2 {
            issues.push(ValidationIssue::EulerCharacteristic { chi });
        }
        ValidationReport {
            issues,
            vertices: self.vertex_count,
            edges: edge_faces.len(),
            faces: self.faces.len(),
            euler_characteristic: chi,
        }
    }

    /// The link edges (opposite sides of incident faces) form one cycle.
    fn link_is_cycle(&self, v: usize, faces: &[usize]) -> bool {
        let mut adjacency: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for &fi in faces {
            let others: Vec<usize> = self.faces[fi].iter().copied().filter(|&x| x != v).collect();
            adjacency.entry(others[0]).or_default().push(others[1]);
            adjacency.entry(others[1]).or_default().push(others[0]);
        }
        if adjacency.values().any(|n| n.len() != 2) {
            return false;
        }
        let start = *adjacency.keys().next().expect("vertex has incident faces");
        let mut seen = BTreeSet::from([start]);
        let mut queue = VecDeque::from([start]);
        while let Some(x) = queue.pop_front() {
            for &y in &adjacency[&x] {
                if seen.insert(y) {
                    queue.push_back(y);
                }
            }
        }
        seen.len() == adjacency.len()
    }

    /// Connected components of the vertex-edge graph, isolated vertices
    /// included.
    fn component_count(&self) -> usize {
        let mut parent: Vec<usize> = (0..self.vertex_count).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for face in &self.faces {
            for e in face_edges(*face) {
                let (a, b) = (find(&mut parent, e.0), find(&mut parent, e.1));
                if a != b {
                    parent[a] = b;
                }
            }
        }
        (0..self.vertex_count).filter(|&v| find(&mut parent, v) == v).count()
    }

    /// Relabels vertex `v` as `perm[v]`.
    pub fn relabeled(&self, perm: &[usize]) -> Self {
        Self::new(self.vertex_count, self.faces.iter().map(|f| f.map(|v| perm[v])).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MeshError {
    #[error("invalid triangulation: {0}")]
    Topology(ValidationReport),
    #[error("edge {0} has no weight")]
    MissingWeight(EdgeKey),
    #[error("weight given for {0}, which is not an edge of the triangulation")]
    UnknownEdge(EdgeKey),
    #[error("edge {0} has more than one weight")]
    DuplicateWeight(EdgeKey),
    #[error("edge {edge} has invalid weight {value}")]
    InvalidWeight { edge: EdgeKey, value: f64 },
    #[error("expected {expected} values, got {found}")]
    SizeMismatch { expected: usize, found: usize },
    #[error("face {face} {vertices:?}: {source}")]
    Face {
        face: usize,
        vertices: [usize; 3],
        #[source]
        source: GeometryError,
    },
    #[error("vertex {vertex}: {source}")]
    Vertex {
        vertex: usize,
        #[source]
        source: GeometryError,
    },
}

/// A triangulation with one weight `I >= 0` per edge.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedTriangulation {
    triangulation: Triangulation,
    weights: BTreeMap<EdgeKey, f64>,
    face_weights: Vec<TriangleWeights>,
}

impl WeightedTriangulation {
    /// Validates the topology and requires exactly one weight per edge.
    pub fn new(
        triangulation: Triangulation,
        weights: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Result<Self, MeshError> {
        let report = triangulation.validate();
        if !report.is_valid() {
            return Err(MeshError::Topology(report));
        }
        Self::with_unchecked_topology(triangulation, weights)
    }

    /// Skips [`Triangulation::validate`]. Faces must still reference
    /// vertices in range.
    pub fn with_unchecked_topology(
        triangulation: Triangulation,
        weights: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Result<Self, MeshError> {
        let edges = triangulation.edge_faces();
        let mut map = BTreeMap::new();
        for (a, b, value) in weights {
            let edge = EdgeKey::new(a, b);
            if !edges.contains_key(&edge) {
                return Err(MeshError::UnknownEdge(edge));
            }
            if !(value.is_finite() && value >= 0.0) {
                return Err(MeshError::InvalidWeight { edge, value });
            }
            if map.insert(edge, value).is_some() {
                return Err(MeshError::DuplicateWeight(edge));
            }
        }
        if let Some(edge) = edges.keys().find(|e| !map.contains_key(e)) {
            return Err(MeshError::MissingWeight(*edge));
        }
        let face_weights = triangulation
            .faces
            .iter()
            .map(|f| TriangleWeights(face_edges(*f).map(|e| map[&e])))
            .collect();
        Ok(Self { triangulation, weights: map, face_weights })
    }

    /// Same weight on every edge.
    pub fn uniform(triangulation: Triangulation, weight: f64) -> Result<Self, MeshError> {
        let edges = triangulation.edges();
        Self::new(triangulation, edges.into_iter().map(|e| (e.0, e.1, weight)))
    }

    pub fn triangulation(&self) -> &Triangulation {
        &self.triangulation
    }

    pub fn weights(&self) -> &BTreeMap<EdgeKey, f64> {
        &self.weights
    }

    pub fn vertex_count(&self) -> usize {
        self.triangulation.vertex_count
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.triangulation.faces
    }

    pub fn face_count(&self) -> usize {
        self.triangulation.faces.len()
    }

    /// Weights of face `f` as `(I_jk, I_ki, I_ij)`.
    pub fn face_weights(&self, f: usize) -> TriangleWeights {
        self.face_weights[f]
    }

    fn face_error(&self, face: usize, source: GeometryError) -> MeshError {
        MeshError::Face { face, vertices: self.triangulation.faces[face], source }
    }

    fn check_size(&self, u: &LogRadiusVector) -> Result<(), MeshError> {
        if u.0.len() == self.vertex_count() {
            Ok(())
        } else {
            Err(MeshError::SizeMismatch { expected: self.vertex_count(), found: u.0.len() })
        }
    }

    /// Sum at each vertex of the inner angles at that vertex.
    pub fn cone_angles(&self, g: Geometry, u: &LogRadiusVector) -> Result<ConeAngles, MeshError> {
        self.check_size(u)?;
        let mut sums = vec![Neumaier::default(); self.vertex_count()];
        for (fi, face) in self.faces().iter().enumerate() {
            let angles = g
                .angles_at(&u.face(*face), &self.face_weights[fi])
                .map_err(|e| self.face_error(fi, e))?;
            for (slot, &v) in face.iter().enumerate() {
                sums[v].add(angles[slot]);
            }
        }
        Ok(ConeAngles(sums.iter().map(Neumaier::total).collect()))
    }

    /// Hessian of the total energy, `d a / d u`, assembled from the face
    /// Jacobians.
    pub fn global_hessian(&self, g: Geometry, u: &LogRadiusVector) -> Result<SymmetricSparse, MeshError> {
        self.check_size(u)?;
        let mut entries: BTreeMap<(usize, usize), Neumaier> = BTreeMap::new();
        for (fi, face) in self.faces().iter().enumerate() {
            let jac = g
                .r_from_u(&u.face(*face))
                .and_then(|r| g.angle_jacobian(&r, &self.face_weights[fi]))
                .map_err(|e| self.face_error(fi, e))?;
            for p in 0..3 {
                for q in 0..3 {
                    entries.entry((face[p], face[q])).or_default().add(jac[(p, q)]);
                }
            }
        }
        Ok(SymmetricSparse::from_sorted(
            self.vertex_count(),
            entries.into_iter().map(|(pq, sum)| (pq, sum.total())),
        ))
    }

    /// `W(u) = sum_f w_f(u)` with every face integrated from `base`.
    pub fn total_energy(&self, g: Geometry, u: &LogRadiusVector, base: &LogRadiusVector) -> Result<f64, MeshError> {
        self.check_size(u)?;
        self.check_size(base)?;
        let mut total = Neumaier::default();
        for (fi, face) in self.faces().iter().enumerate() {
            let w = g
                .triangle_energy(&u.face(*face), &self.face_weights[fi], &base.face(*face))
                .map_err(|e| self.face_error(fi, e))?;
            total.add(w);
        }
        Ok(total.total())
    }

    /// First face that is not admissible at `u`, with the reason.
    pub fn first_inadmissible_face(&self, g: Geometry, u: &LogRadiusVector) -> Option<MeshError> {
        if let Err(e) = self.check_size(u) {
            return Some(e);
        }
        self.faces().iter().enumerate().find_map(|(fi, face)| {
            g.angles_at(&u.face(*face), &self.face_weights[fi]).err().map(|e| self.face_error(fi, e))
        })
    }

    /// Relabels vertex `v` as `perm[v]`, carrying weights along.
    pub fn relabeled(&self, perm: &[usize]) -> Self {
        let weights = self.weights.iter().map(|(e, w)| (perm[e.0], perm[e.1], *w));
        Self::with_unchecked_topology(self.triangulation.relabeled(perm), weights)
            .expect("relabeling preserves weight coverage")
    }
}

/// Log-radii `u` for every vertex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogRadiusVector(pub Vec<f64>);

impl LogRadiusVector {
    pub fn constant(n: usize, value: f64) -> Self {
        Self(vec![value; n])
    }

    pub fn from_radii(g: Geometry, radii: &[f64]) -> Result<Self, MeshError> {
        radii
            .iter()
            .enumerate()
            .map(|(vertex, &r)| g.u_from_r_scalar(r).map_err(|source| MeshError::Vertex { vertex, source }))
            .collect::<Result<Vec<_>, _>>()
            .map(Self)
    }

    pub fn radii(&self, g: Geometry) -> Result<Vec<f64>, MeshError> {
        self.0
            .iter()
            .enumerate()
            .map(|(vertex, &u)| g.r_from_u_scalar(u).map_err(|source| MeshError::Vertex { vertex, source }))
            .collect()
    }

    pub fn face(&self, face: [usize; 3]) -> LogRadiusTriple {
        LogRadiusTriple(face.map(|v| self.0[v]))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn shifted(&self, c: f64) -> Self {
        Self(self.0.iter().map(|x| x + c).collect())
    }
}

/// Cone angle `a_i` at each vertex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConeAngles(pub Vec<f64>);

impl ConeAngles {
    pub fn sum(&self) -> f64 {
        let mut s = Neumaier::default();
        self.0.iter().for_each(|x| s.add(*x));
        s.total()
    }
}

/// Symmetric sparse matrix in compressed-row form; both triangles are
/// stored and column indices are sorted within each row.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricSparse {
    dim: usize,
    row_offsets: Vec<usize>,
    columns: Vec<usize>,
    values: Vec<f64>,
}

impl SymmetricSparse {
    /// From `((row, col), value)` triplets sorted by `(row, col)` without
    /// duplicates.
    fn from_sorted(dim: usize, entries: impl IntoIterator<Item = ((usize, usize), f64)>) -> Self {
        let mut row_offsets = vec![0; dim + 1];
        let mut columns = Vec::new();
        let mut values = Vec::new();
        for ((p, q), v) in entries {
            row_offsets[p + 1] += 1;
            columns.push(q);
            values.push(v);
        }
        for p in 0..dim {
            row_offsets[p + 1] += row_offsets[p];
        }
        Self { dim, row_offsets, columns, values }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Stored `(column, value)` pairs of row `p`.
    pub fn row(&self, p: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.row_offsets[p]..self.row_offsets[p + 1];
        self.columns[range.clone()].iter().copied().zip(self.values[range].iter().copied())
    }

    pub fn get(&self, p: usize, q: usize) -> f64 {
        let range = self.row_offsets[p]..self.row_offsets[p + 1];
        match self.columns[range.clone()].binary_search(&q) {
            Ok(k) => self.values[range.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.dim).map(|p| self.row(p).map(|(q, v)| v * x[q]).sum()).collect()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for p in 0..self.dim {
            for (q, v) in self.row(p) {
                m[(p, q)] = v;
            }
        }
        m
    }
}

/// Neumaier's compensated sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct Neumaier {
    sum: f64,
    compensation: f64,
}

impl Neumaier {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn total(&self) -> f64 {
        self.sum + self.compensation
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn platonic_surfaces_are_valid_spheres() {
        for (t, (v, e, f)) in [
            (Triangulation::tetrahedron(), (4, 6, 4)),
            (Triangulation::octahedron(), (6, 12, 8)),
            (Triangulation::icosahedron(), (12, 30, 20)),
        ] {
            let report = t.validate();
            assert!(report.is_valid(), "{report}");
            assert_eq!((report.vertices, report.edges, report.faces), (v, e, f));
            assert_eq!(report.euler_characteristic, 2);
        }
    }

    #[test]
    fn removing_a_face_opens_three_edges() {
        let mut t = Triangulation::tetrahedron();
        t.faces.pop();
        let report = t.validate();
        assert_eq!(report.bad_edges(), vec![EdgeKey(1, 2), EdgeKey(1, 3), EdgeKey(2, 3)]);
    }

    #[test]
    fn detects_structural_defects() {
        let t = Triangulation::new(4, vec![[0, 0, 1], [0, 1, 4]]);
        let issues = t.validate().issues;
        assert!(issues.contains(&ValidationIssue::RepeatedVertex { face: 0 }));
        assert!(issues.contains(&ValidationIssue::IndexOutOfRange { face: 1, vertex: 4 }));

        let mut two = Triangulation::tetrahedron();
        two.vertex_count = 8;
        two.faces.extend(Triangulation::tetrahedron().faces.iter().map(|f| f.map(|v| v + 4)));
        assert!(two.validate().issues.contains(&ValidationIssue::Disconnected { components: 2 }));
    }

    #[test]
    fn pinched_vertex_fails_link_check() {
        // Two octahedra glued at a single vertex: edge degrees are all 2 but
        // the link of the shared vertex has two cycles.
        let oct = Triangulation::octahedron();
        let mut faces = oct.faces.clone();
        faces.extend(oct.faces.iter().map(|f| f.map(|v| if v == 0 { 0 } else { v + 5 })));
        let t = Triangulation::new(11, faces);
        assert!(t.validate().issues.contains(&ValidationIssue::LinkNotCycle { vertex: 0 }));
    }

    #[test]
    fn weights_must_cover_edges() {
        let t = Triangulation::tetrahedron();
        let mut w: Vec<_> = t.edges().into_iter().map(|e| (e.1, e.0, 1.0)).collect();
        let dropped = w.pop().unwrap();
        assert_eq!(
            WeightedTriangulation::new(t.clone(), w.clone()).unwrap_err(),
            MeshError::MissingWeight(EdgeKey::new(dropped.0, dropped.1))
        );
        w.push((0, 0, 1.0));
        assert!(matches!(WeightedTriangulation::new(t, w), Err(MeshError::UnknownEdge(_))));
    }

    #[test]
    fn face_weights_follow_opposite_convention() {
        let t = Triangulation::tetrahedron();
        let w = t.edges().into_iter().map(|e| (e.0, e.1, (10 * e.0 + e.1) as f64));
        let wt = WeightedTriangulation::new(t, w).unwrap();
        // face [0, 1, 3]: slots bc = {1,3}, ca = {0,3}, ab = {0,1}
        assert_eq!(wt.face_weights(1).0, [13.0, 3.0, 1.0]);
    }

    #[test]
    fn tangent_tetrahedron_has_cone_angle_pi() {
        let wt = WeightedTriangulation::uniform(Triangulation::tetrahedron(), 1.0).unwrap();
        let a = wt.cone_angles(Geometry::Euclidean, &LogRadiusVector::constant(4, 0.0)).unwrap();
        for x in &a.0 {
            assert!((x - PI).abs() < 1e-15);
        }
        assert!((a.sum() - 4.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn inadmissible_face_is_named() {
        let t = Triangulation::tetrahedron();
        let w = t.edges().into_iter().map(|e| (e.0, e.1, if e == EdgeKey(1, 2) { 10.0 } else { 0.0 }));
        let wt = WeightedTriangulation::new(t, w).unwrap();
        match wt.cone_angles(Geometry::Euclidean, &LogRadiusVector::constant(4, 0.0)) {
            Err(MeshError::Face { face: 0, vertices: [0, 1, 2], .. }) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn hessian_is_symmetric_with_constant_kernel() {
        let wt = WeightedTriangulation::uniform(Triangulation::octahedron(), 0.7).unwrap();
        let u = LogRadiusVector(vec![0.1, -0.2, 0.05, 0.3, 0.0, -0.1]);
        let h = wt.global_hessian(Geometry::Euclidean, &u).unwrap().to_dense();
        assert!((&h - h.transpose()).amax() < 1e-12);
        let kernel = &h * nalgebra::DVector::from_element(6, 1.0);
        assert!(kernel.amax() < 1e-12);
    }

    #[test]
    fn sparse_storage_matches_dense() {
        let wt = WeightedTriangulation::uniform(Triangulation::icosahedron(), 1.3).unwrap();
        let u = LogRadiusVector((0..12).map(|i| 0.05 * i as f64).collect());
        let h = wt.global_hessian(Geometry::Euclidean, &u).unwrap();
        // 12 diagonal entries plus both orientations of 30 edges
        assert_eq!(h.nnz(), 12 + 60);
        let dense = h.to_dense();
        let x: Vec<f64> = (0..12).map(|i| (i as f64).sin()).collect();
        let y = h.mul_vec(&x);
        let yd = &dense * nalgebra::DVector::from_vec(x);
        for p in 0..12 {
            assert!((y[p] - yd[p]).abs() < 1e-14);
            assert_eq!(h.get(p, p), dense[(p, p)]);
        }
        assert_eq!(h.get(0, 3), 0.0);
    }

    #[test]
    fn neumaier_recovers_cancelled_terms() {
        let mut s = Neumaier::default();
        for x in [1.0, 1e100, 1.0, -1e100] {
            s.add(x);
        }
        assert_eq!(s.total(), 2.0);
    }
}
