//! Develops a packing into the plane (Euclidean) or the Poincare disk
//! (hyperbolic) along a breadth-first spanning tree of the dual graph, and
//! renders the resulting net as SVG.
//!
//! Both models are handled with one recipe: move the placed vertex `p` to
//! the origin by an isometry, where geodesics through `p` are straight rays
//! and distance `d` sits at model radius `d` (plane) or `tanh(d / 2)`
//! (disk); place the new vertex by angle and distance, then move back.

use std::collections::VecDeque;
use std::fmt::Write as _;

use circpack::mesh::{face_edges, LogRadiusVector, MeshError, WeightedTriangulation};
use circpack::Geometry;
use num_complex::Complex64;
use thiserror::Error;

/// SVG user units per model unit.
pub const SCALE: f64 = 100.0;
/// Points closer than this to the disk boundary cannot be placed reliably.
const DISK_LIMIT: f64 = 1.0 - 1e-12;

#[derive(Debug, Error)]
pub enum LayoutError {
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error("root face {root} out of range (surface has {faces} faces)")]
    Root { root: usize, faces: usize },
    #[error("faces {0:?} are not reachable from the root through shared edges")]
    Unreachable(Vec<usize>),
    #[error(
        "face {face} reaches the Poincare disk boundary in double precision; \
         hyperbolic nets are limited to moderate edge lengths"
    )]
    DiskBoundary { face: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlacedFace {
    pub face: usize,
    pub vertices: [usize; 3],
    pub points: [Complex64; 3],
}

/// A vertex circle drawn as a Euclidean circle in model coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct PlacedCircle {
    pub vertex: usize,
    /// Model position of the vertex (the hyperbolic centre in the disk).
    pub point: Complex64,
    pub center: Complex64,
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Layout {
    pub geometry: Geometry,
    pub root: usize,
    /// In breadth-first order, root first.
    pub faces: Vec<PlacedFace>,
    pub circles: Vec<PlacedCircle>,
}

/// Isometry taking `a` to the origin.
fn to_origin(g: Geometry, a: Complex64, z: Complex64) -> Complex64 {
    match g {
        Geometry::Euclidean => z - a,
        Geometry::Hyperbolic => (z - a) / (Complex64::new(1.0, 0.0) - a.conj() * z),
    }
}

/// Inverse of [`to_origin`].
fn from_origin(g: Geometry, a: Complex64, z: Complex64) -> Complex64 {
    match g {
        Geometry::Euclidean => z + a,
        Geometry::Hyperbolic => (z + a) / (Complex64::new(1.0, 0.0) + a.conj() * z),
    }
}

/// Model radius of a point at distance `d` from the origin.
fn radial(g: Geometry, d: f64) -> f64 {
    match g {
        Geometry::Euclidean => d,
        Geometry::Hyperbolic => (0.5 * d).tanh(),
    }
}

/// Distance in the model metric.
pub fn model_distance(g: Geometry, a: Complex64, b: Complex64) -> f64 {
    let d = to_origin(g, a, b).norm();
    match g {
        Geometry::Euclidean => d,
        Geometry::Hyperbolic => 2.0 * d.atanh(),
    }
}

/// Places the vertex at distance `dist` from `p`, making angle `angle`
/// with the geodesic `pq`, on the side `side` (+1 counterclockwise).
fn third_point(g: Geometry, p: Complex64, q: Complex64, dist: f64, angle: f64, side: f64) -> Complex64 {
    let theta = to_origin(g, p, q).arg();
    from_origin(g, p, Complex64::from_polar(radial(g, dist), theta + side * angle))
}

/// Which side of the geodesic `pq` the point `r` lies on.
fn side_of(g: Geometry, p: Complex64, q: Complex64, r: Complex64) -> f64 {
    let theta = to_origin(g, p, q).arg();
    let s = (to_origin(g, p, r) * Complex64::from_polar(1.0, -theta)).im;
    if s >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

/// Length between the corners in slots `s` and `t` of a face.
fn slot_length(lengths: &[f64; 3], s: usize, t: usize) -> f64 {
    lengths[3 - s - t]
}

/// Circle of radius `r` about `c` as a Euclidean circle in the model.
fn model_circle(g: Geometry, c: Complex64, r: f64) -> (Complex64, f64) {
    match g {
        Geometry::Euclidean => (c, r),
        Geometry::Hyperbolic => {
            let rho = (0.5 * r).tanh();
            let (rho2, c2) = (rho * rho, c.norm_sqr());
            let denom = 1.0 - rho2 * c2;
            (c * ((1.0 - rho2) / denom), rho * (1.0 - c2) / denom)
        }
    }
}

/// Develops every face reachable from `root`.
pub fn develop(
    g: Geometry,
    wt: &WeightedTriangulation,
    u: &LogRadiusVector,
    root: usize,
) -> Result<Layout, LayoutError> {
    let faces = wt.faces();
    if root >= faces.len() {
        return Err(LayoutError::Root { root, faces: faces.len() });
    }
    let mut lengths = Vec::with_capacity(faces.len());
    let mut angles = Vec::with_capacity(faces.len());
    for (f, face) in faces.iter().enumerate() {
        let wrap = |source| MeshError::Face { face: f, vertices: *face, source };
        let r = g.r_from_u(&u.face(*face)).map_err(wrap)?;
        let l = g.lengths_of_triangle(&r, &wt.face_weights(f)).map_err(wrap)?;
        angles.push(g.angles(&l).map_err(wrap)?.0);
        lengths.push(l.0);
    }
    let radii = u.radii(g)?;
    let edge_faces = wt.triangulation().edge_faces();

    let mut points: Vec<Option<[Complex64; 3]>> = vec![None; faces.len()];
    let l = &lengths[root];
    let p = Complex64::new(0.0, 0.0);
    let q = Complex64::new(radial(g, slot_length(l, 0, 1)), 0.0);
    let r = third_point(g, p, q, slot_length(l, 0, 2), angles[root][0], 1.0);
    points[root] = Some([p, q, r]);

    let mut order = vec![root];
    let mut queue = VecDeque::from([root]);
    while let Some(f) = queue.pop_front() {
        let placed = points[f].expect("queued faces are placed");
        for edge in face_edges(faces[f]) {
            for &h in &edge_faces[&edge] {
                if points[h].is_some() {
                    continue;
                }
                let pos = |v: usize| placed[faces[f].iter().position(|&x| x == v).expect("shared vertex")];
                let (a, b) = (edge.0, edge.1);
                let other = faces[f].iter().copied().find(|&v| v != a && v != b).expect("triangle");
                let side = -side_of(g, pos(a), pos(b), pos(other));
                let sa = faces[h].iter().position(|&x| x == a).expect("shared vertex");
                let sc = (0..3).find(|&s| faces[h][s] != a && faces[h][s] != b).expect("triangle");
                let c = third_point(g, pos(a), pos(b), slot_length(&lengths[h], sa, sc), angles[h][sa], side);
                if g == Geometry::Hyperbolic && !(c.norm() < DISK_LIMIT) {
                    return Err(LayoutError::DiskBoundary { face: h });
                }
                let mut pts = [Complex64::new(0.0, 0.0); 3];
                for (s, v) in faces[h].iter().enumerate() {
                    pts[s] = if s == sc { c } else { pos(*v) };
                }
                points[h] = Some(pts);
                order.push(h);
                queue.push_back(h);
            }
        }
    }
    let unreachable: Vec<usize> = (0..faces.len()).filter(|&f| points[f].is_none()).collect();
    if !unreachable.is_empty() {
        return Err(LayoutError::Unreachable(unreachable));
    }

    let placed: Vec<PlacedFace> = order
        .iter()
        .map(|&f| PlacedFace { face: f, vertices: faces[f], points: points[f].expect("all placed") })
        .collect();
    // one circle per distinct position of a vertex in the net
    let mut circles: Vec<PlacedCircle> = Vec::new();
    for pf in &placed {
        for (v, z) in pf.vertices.iter().zip(pf.points) {
            if circles.iter().any(|c| c.vertex == *v && model_distance(g, c.point, z) < 1e-9) {
                continue;
            }
            let (center, radius) = model_circle(g, z, radii[*v]);
            circles.push(PlacedCircle { vertex: *v, point: z, center, radius });
        }
    }
    Ok(Layout { geometry: g, root, faces: placed, circles })
}

fn screen(z: Complex64) -> (f64, f64) {
    // adding 0.0 turns -0.0 into 0.0
    (SCALE * z.re + 0.0, -SCALE * z.im + 0.0)
}

/// SVG path command for the geodesic from `a` to `b` (pen already at `a`).
fn geodesic_to(g: Geometry, a: Complex64, b: Complex64, out: &mut String) {
    let (bx, by) = screen(b);
    let cross = a.re * b.im - a.im * b.re;
    if g == Geometry::Euclidean || cross.abs() < 1e-12 {
        let _ = write!(out, " L {bx:.9} {by:.9}");
        return;
    }
    // circle orthogonal to the unit circle through a and b:
    // 2 <o, a> = |a|^2 + 1 and 2 <o, b> = |b|^2 + 1
    let (ra, rb) = (0.5 * (a.norm_sqr() + 1.0), 0.5 * (b.norm_sqr() + 1.0));
    let det = a.re * b.im - a.im * b.re;
    let o = Complex64::new((ra * b.im - rb * a.im) / det, (a.re * rb - b.re * ra) / det);
    let radius = SCALE * (o.norm_sqr() - 1.0).sqrt();
    let (pa, pb) = (screen(a - o), screen(b - o));
    let sweep = u8::from(pa.0 * pb.1 - pa.1 * pb.0 > 0.0);
    let _ = write!(out, " A {radius:.9} {radius:.9} 0 0 {sweep} {bx:.9} {by:.9}");
}

impl Layout {
    pub fn to_svg(&self) -> String {
        let g = self.geometry;
        let (mut lo, mut hi) = ((f64::INFINITY, f64::INFINITY), (f64::NEG_INFINITY, f64::NEG_INFINITY));
        let mut grow = |x: f64, y: f64, pad: f64| {
            lo = (lo.0.min(x - pad), lo.1.min(y - pad));
            hi = (hi.0.max(x + pad), hi.1.max(y + pad));
        };
        match g {
            Geometry::Hyperbolic => {
                grow(-SCALE, -SCALE, 0.0);
                grow(SCALE, SCALE, 0.0);
            }
            Geometry::Euclidean => {
                for c in &self.circles {
                    let (x, y) = screen(c.center);
                    grow(x, y, SCALE * c.radius);
                }
            }
        }
        let pad = 10.0;
        let (x0, y0, w, h) = (lo.0 - pad, lo.1 - pad, hi.0 - lo.0 + 2.0 * pad, hi.1 - lo.1 + 2.0 * pad);
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="{x0:.3} {y0:.3} {w:.3} {h:.3}" width="{w:.0}" height="{h:.0}">"#
        );
        if g == Geometry::Hyperbolic {
            let _ = writeln!(s, r#"  <circle class="disk" cx="0" cy="0" r="{SCALE}" fill="none" stroke="black" stroke-width="0.5"/>"#);
        }
        let _ = writeln!(s, r#"  <g class="faces" fill="none" stroke="black" stroke-width="0.8">"#);
        for f in &self.faces {
            let (x, y) = screen(f.points[0]);
            let mut d = format!("M {x:.9} {y:.9}");
            for k in 0..3 {
                geodesic_to(g, f.points[k], f.points[(k + 1) % 3], &mut d);
            }
            let _ = writeln!(s, r#"    <path data-face="{}" d="{d} Z"/>"#, f.face);
        }
        let _ = writeln!(s, "  </g>");
        let _ = writeln!(s, r#"  <g class="circles" fill="none" stroke="steelblue" stroke-width="0.6">"#);
        for c in &self.circles {
            let (x, y) = screen(c.center);
            let _ = writeln!(
                s,
                r#"    <circle data-vertex="{}" cx="{x:.9}" cy="{y:.9}" r="{:.9}"/>"#,
                c.vertex,
                SCALE * c.radius
            );
        }
        let _ = writeln!(s, "  </g>\n</svg>");
        s
    }
}
