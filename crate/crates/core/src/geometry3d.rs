//! The open-book polyhedron and the extruded strip panels.
//!
//! The book has n quadrilateral "pages" fanned about the x3-axis spine
//! between the planes x3 = 0 and x3 = -1. Its 5n+1 vertices split into top
//! vertices y^1..y^{3n} (x3 = 0) and bottom vertices z^1..z^{3n} (x3 = -1);
//! the side faces come in triples (front, end, back) per page. The top face
//! is a fan of n congruent triangles with apex angle theta_n at the origin;
//! the bottom face is a single 3n-gon.

use crate::error::{Error, Result};
use crate::geometry2d::{sawtooth_segment, Segment2D};
use crate::kernels::Point3;
use std::f64::consts::PI;
use std::fmt::Write as _;

/// Planar face with 3 or 4 vertices, outward unit normal, and a label.
#[derive(Debug, Clone)]
pub struct Face3D {
    pub vertices: Vec<Point3>,
    pub normal: Point3,
    pub label: String,
}

/// Absolute planarity budget for face constructors.
pub const PLANARITY_TOL: f64 = 1e-12;

impl Face3D {
    /// Builds a face from an ordered vertex loop. The normal is the loop's
    /// right-hand-rule normal; pass `outward_along` to flip the loop so the
    /// normal has positive component along that direction.
    pub fn new(
        vertices: Vec<Point3>,
        label: impl Into<String>,
        outward_along: Option<&Point3>,
    ) -> Result<Self> {
        let label = label.into();
        if vertices.len() < 3 || vertices.len() > 4 {
            return Err(Error::InvalidParameter(format!(
                "face {label} must have 3 or 4 vertices, got {}",
                vertices.len()
            )));
        }
        let mut face = Face3D {
            normal: loop_normal(&vertices).ok_or_else(|| {
                Error::InvalidParameter(format!("face {label} is degenerate"))
            })?,
            vertices,
            label,
        };
        let resid = face.planarity_residual();
        if resid > PLANARITY_TOL * (1.0 + face.diameter()) {
            return Err(Error::InvalidParameter(format!(
                "face {} planarity residual {resid:e} exceeds budget",
                face.label
            )));
        }
        if let Some(dir) = outward_along {
            if dir.dot(&face.normal) < 0.0 {
                face.vertices.reverse();
                face.normal = -face.normal;
            }
        }
        Ok(face)
    }

    pub fn centroid(&self) -> Point3 {
        self.vertices.iter().sum::<Point3>() / self.vertices.len() as f64
    }

    pub fn diameter(&self) -> f64 {
        let mut d: f64 = 0.0;
        for (i, v) in self.vertices.iter().enumerate() {
            for w in &self.vertices[i + 1..] {
                d = d.max((v - w).norm());
            }
        }
        d
    }

    /// Max distance of the vertices to their best-fit plane.
    pub fn planarity_residual(&self) -> f64 {
        let c = self.centroid();
        self.vertices
            .iter()
            .map(|v| (v - c).dot(&self.normal).abs())
            .fold(0.0, f64::max)
    }

    pub fn area(&self) -> f64 {
        let v0 = self.vertices[0];
        let mut total = Point3::zeros();
        for i in 1..self.vertices.len() - 1 {
            total += (self.vertices[i] - v0).cross(&(self.vertices[i + 1] - v0));
        }
        total.norm() / 2.0
    }

    /// Convexity of the vertex loop (always true for triangles).
    pub fn is_convex(&self) -> bool {
        let n = self.vertices.len();
        if n == 3 {
            return true;
        }
        let mut sign = 0.0f64;
        for i in 0..n {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            let c = self.vertices[(i + 2) % n];
            let turn = (b - a).cross(&(c - b)).dot(&self.normal);
            if turn.abs() < 1e-15 {
                continue;
            }
            if sign == 0.0 {
                sign = turn.signum();
            } else if turn.signum() != sign {
                return false;
            }
        }
        true
    }

    /// Whether the loop winds counterclockwise about the stored normal.
    pub fn right_handed(&self) -> bool {
        loop_normal(&self.vertices)
            .map(|n| n.dot(&self.normal) > 0.0)
            .unwrap_or(false)
    }

    /// In-plane point-in-polygon test (the point is first projected onto the
    /// face plane; `tol` bounds the allowed out-of-plane offset).
    pub fn contains_in_plane(&self, p: &Point3, tol: f64) -> bool {
        let c = self.centroid();
        if (p - c).dot(&self.normal).abs() > tol {
            return false;
        }
        let n = self.vertices.len();
        for i in 0..n {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            if (b - a).cross(&(p - a)).dot(&self.normal) < -tol {
                return false;
            }
        }
        true
    }

    /// Interior sample points on a triangular barycentric grid (faces with 4
    /// vertices are fanned into two triangles). `level` 3 already yields at
    /// least 10 points per face.
    pub fn interior_samples(&self, level: usize) -> Vec<Point3> {
        let mut out = Vec::new();
        let v0 = self.vertices[0];
        for i in 1..self.vertices.len() - 1 {
            let (v1, v2) = (self.vertices[i], self.vertices[i + 1]);
            let l = level as f64 + 2.0;
            for p in 1..=level {
                for q in 1..=(level + 1 - p) {
                    let (u, v) = (p as f64 / l, q as f64 / l);
                    out.push(v0 + (v1 - v0) * u + (v2 - v0) * v);
                }
            }
        }
        out
    }
}

fn loop_normal(vertices: &[Point3]) -> Option<Point3> {
    let v0 = vertices[0];
    let mut n = Point3::zeros();
    for i in 1..vertices.len() - 1 {
        n += (vertices[i] - v0).cross(&(vertices[i + 1] - v0));
    }
    let len = n.norm();
    (len > 0.0).then(|| n / len)
}

/// Open-book polyhedron with `n_pages` pages and opening angle `theta`.
#[derive(Debug, Clone)]
pub struct OpenBook {
    pub theta: f64,
    pub n_pages: usize,
    pub theta_n: f64,
    pub eta: f64,
    pub r1: f64,
    pub r2: f64,
    /// y^1..y^{3n} in the plane x3 = 0
    pub top_vertices: Vec<Point3>,
    /// z^1..z^{3n} in the plane x3 = -1
    pub bottom_vertices: Vec<Point3>,
    /// side faces Γ_1..Γ_{3n} with outward normals
    pub side_faces: Vec<Face3D>,
    /// the n congruent triangles composing the top face Γ_0
    pub top_triangles: Vec<Face3D>,
    /// the 3n-gon bottom face Γ_{-1} as a vertex loop (outward normal -e3)
    pub bottom_loop: Vec<Point3>,
    /// star center used by the certificate
    pub star_center: Point3,
    /// measured min over face samples of (x - x0)·n(x)
    pub star_margin: f64,
}

/// Cap on the star-center offset from the spine-bottom vertex (0,0,-1). The
/// certificate only needs it "sufficiently small"; the offset is placed along
/// the wedge bisector (a 45-degree offset leaves the book entirely once the
/// opening angle drops below pi/2) and shrunk further when the margins of the
/// faces not incident to (0,0,-1) demand it.
pub const STAR_EPS: f64 = 0.01;

/// Builds the open-book polyhedron, validates the planarity of every face
/// quadruple, and certifies star-shapedness by sampling face interiors.
pub fn open_book(theta: f64, n_pages: usize) -> Result<OpenBook> {
    if !(theta > 0.0 && theta <= PI) {
        return Err(Error::InvalidParameter(format!(
            "opening angle must lie in (0, pi], got {theta}"
        )));
    }
    if n_pages < 2 {
        return Err(Error::InvalidParameter(format!(
            "need at least 2 pages, got {n_pages}"
        )));
    }
    let n = n_pages;
    let theta_n = theta / (2 * n - 1) as f64;
    let eta = theta * theta_n / (4.0 * PI);
    debug_assert!(eta > 0.0 && eta < theta_n / 2.0);
    let r1 = (theta_n / 2.0 + eta).cos() / (theta_n / 2.0).cos();
    let r2 = eta.sin() / (theta_n / 2.0).sin();

    let mut y = vec![Point3::zeros(); 3 * n + 1]; // 1-based
    let mut z = vec![Point3::zeros(); 3 * n + 1];
    for j in 1..=n {
        let a2 = (2 * j - 2) as f64 * theta_n;
        let a3 = (2 * j - 1) as f64 * theta_n;
        y[3 * j - 2] = Point3::zeros();
        y[3 * j - 1] = Point3::new(a2.cos(), a2.sin(), 0.0);
        y[3 * j] = Point3::new(a3.cos(), a3.sin(), 0.0);
    }
    z[1] = Point3::new(0.0, 0.0, -1.0);
    z[2] = Point3::new(r1, 0.0, -1.0);
    for j in 1..n {
        let a = (2 * j - 1) as f64 * theta_n + eta;
        z[3 * j] = Point3::new(a.cos(), a.sin(), -1.0);
    }
    for j in 2..=n {
        let a = (2.0 * j as f64 - 2.5) * theta_n;
        z[3 * j - 2] = Point3::new(r2 * a.cos(), r2 * a.sin(), -1.0);
        let b = (2 * j - 2) as f64 * theta_n - eta;
        z[3 * j - 1] = Point3::new(b.cos(), b.sin(), -1.0);
    }
    z[3 * n] = Point3::new(r1 * theta.cos(), r1 * theta.sin(), -1.0);

    // outward orientation is intrinsic: fronts face toward decreasing polar
    // angle, backs toward increasing, ends radially out, the top along +e3
    let angular = |verts: &[Point3]| -> Point3 {
        let c: Point3 = verts.iter().sum::<Point3>() / verts.len() as f64;
        Point3::new(-c.y, c.x, 0.0)
    };
    let radial = |verts: &[Point3]| -> Point3 {
        let c: Point3 = verts.iter().sum::<Point3>() / verts.len() as f64;
        Point3::new(c.x, c.y, 0.0)
    };

    let mut side_faces = Vec::with_capacity(3 * n);
    for j in 1..=n {
        let front = vec![y[3 * j - 2], y[3 * j - 1], z[3 * j - 1], z[3 * j - 2]];
        let dir = -angular(&front);
        side_faces.push(Face3D::new(front, format!("G{}", 3 * j - 2), Some(&dir))?);
        let end = vec![y[3 * j - 1], y[3 * j], z[3 * j], z[3 * j - 1]];
        let dir = radial(&end);
        side_faces.push(Face3D::new(end, format!("G{}", 3 * j - 1), Some(&dir))?);
        let (yb, zb) = if j < n {
            (y[3 * j + 1], z[3 * j + 1])
        } else {
            (y[1], z[1])
        };
        let back = vec![y[3 * j], yb, zb, z[3 * j]];
        let dir = angular(&back);
        side_faces.push(Face3D::new(back, format!("G{}", 3 * j), Some(&dir))?);
    }

    let up = Point3::new(0.0, 0.0, 1.0);
    let mut top_triangles = Vec::with_capacity(n);
    for j in 1..=n {
        top_triangles.push(Face3D::new(
            vec![y[3 * j - 2], y[3 * j - 1], y[3 * j]],
            format!("G0_{j}"),
            Some(&up),
        )?);
    }
    let bottom_loop: Vec<Point3> = (1..=3 * n).map(|m| z[m]).collect();

    let mut book = OpenBook {
        theta,
        n_pages: n,
        theta_n,
        eta,
        r1,
        r2,
        top_vertices: (1..=3 * n).map(|m| y[m]).collect(),
        bottom_vertices: (1..=3 * n).map(|m| z[m]).collect(),
        side_faces,
        top_triangles,
        bottom_loop,
        star_center: Point3::new(0.0, 0.0, -1.0),
        star_margin: 0.0,
    };
    // star center: (0,0,-1) certifies every face not incident to it; shift
    // along the wedge bisector by the largest offset those margins allow
    let m_base = book.sampled_margin(&Point3::new(0.0, 0.0, -1.0), true);
    if m_base <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "star-shapedness certificate failed at the spine vertex (margin {m_base:e})"
        )));
    }
    let rho = STAR_EPS.min(m_base / 3.0);
    let x0 = Point3::new(
        rho * (theta / 2.0).cos(),
        rho * (theta / 2.0).sin(),
        rho - 1.0,
    );
    book.star_center = x0;
    let margin = book.sampled_margin(&x0, false).min(rho);
    if margin <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "star-shapedness certificate failed (min margin {margin:e})"
        )));
    }
    book.star_margin = margin;
    Ok(book)
}

impl OpenBook {
    /// Min over sampled face points of (x - x0)·n(x). With `skip_incident`
    /// the faces containing the spine-bottom vertex (front 1, back n, bottom)
    /// are left out; their margins at that vertex are zero by construction.
    fn sampled_margin(&self, x0: &Point3, skip_incident: bool) -> f64 {
        let n = self.n_pages;
        let mut min = f64::INFINITY;
        let mut consider = |face: &Face3D| {
            for p in face.interior_samples(3) {
                min = min.min((p - x0).dot(&face.normal));
            }
        };
        for f in &self.side_faces {
            if skip_incident && (f.label == "G1" || f.label == format!("G{}", 3 * n)) {
                continue;
            }
            consider(f);
        }
        for f in &self.top_triangles {
            consider(f);
        }
        min
    }

    /// Fronts and backs relabelled in reading order: page m = 2j-1 is the
    /// front face of leaf j, page m = 2j its back face.
    pub fn pages(&self) -> Vec<Face3D> {
        let n = self.n_pages;
        let mut out = Vec::with_capacity(2 * n);
        for j in 1..=n {
            let mut front = self.side_faces[3 * j - 3].clone();
            front.label = format!("Gt{}", 2 * j - 1);
            out.push(front);
            let mut back = self.side_faces[3 * j - 1].clone();
            back.label = format!("Gt{}", 2 * j);
            out.push(back);
        }
        out
    }

    /// OBJ text: vertex list followed by faces (sides, top fan, bottom).
    pub fn to_obj(&self) -> String {
        let n = self.n_pages;
        let mut out = String::new();
        for v in self.top_vertices.iter().chain(&self.bottom_vertices) {
            writeln!(out, "v {:.17} {:.17} {:.17}", v.x, v.y, v.z).unwrap();
        }
        let index_of = |p: &Point3| -> usize {
            for (i, v) in self.top_vertices.iter().chain(&self.bottom_vertices).enumerate() {
                if (v - p).norm() == 0.0 {
                    return i + 1;
                }
            }
            unreachable!("face vertex missing from vertex table")
        };
        for f in self.side_faces.iter().chain(&self.top_triangles) {
            let ids: Vec<String> = f.vertices.iter().map(|v| index_of(v).to_string()).collect();
            writeln!(out, "f {}", ids.join(" ")).unwrap();
        }
        let ids: Vec<String> = (1..=3 * n).map(|m| (3 * n + m).to_string()).collect();
        writeln!(out, "f {}", ids.join(" ")).unwrap();
        out
    }

    /// CSV dump of the vertex tables.
    pub fn vertices_csv(&self) -> String {
        let mut out = String::from("label,x,y,z\n");
        for (i, v) in self.top_vertices.iter().enumerate() {
            writeln!(out, "y{},{:.17e},{:.17e},{:.17e}", i + 1, v.x, v.y, v.z).unwrap();
        }
        for (i, v) in self.bottom_vertices.iter().enumerate() {
            writeln!(out, "z{},{:.17e},{:.17e},{:.17e}", i + 1, v.x, v.y, v.z).unwrap();
        }
        out
    }
}

/// Rectangular panel (-a, a) × Γ_m extruded from a 2-d sawtooth segment.
#[derive(Debug, Clone)]
pub struct StripPanel {
    pub base: Segment2D,
    pub half_width: f64,
}

impl StripPanel {
    pub fn area(&self) -> f64 {
        2.0 * self.half_width * self.base.length()
    }

    /// Corner vertices in (x1, x2, x3) with x1 the extrusion coordinate.
    pub fn corners(&self) -> [Point3; 4] {
        let a = self.half_width;
        let (p, q) = (self.base.a, self.base.b);
        [
            Point3::new(-a, p.x, p.y),
            Point3::new(a, p.x, p.y),
            Point3::new(a, q.x, q.y),
            Point3::new(-a, q.x, q.y),
        ]
    }

    /// Panel normal: the extruded 2-d normal, first component zero.
    pub fn normal(&self) -> Point3 {
        Point3::new(0.0, self.base.normal.x, self.base.normal.y)
    }
}

/// Panels over the sawtooth segments Γ_1..Γ_count.
pub fn strip_panels(slope: f64, half_width: f64, count: usize) -> Result<Vec<StripPanel>> {
    if slope <= 0.0 || half_width <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "slope and half-width must be positive, got {slope}, {half_width}"
        )));
    }
    (1..=count as i64)
        .map(|m| {
            Ok(StripPanel {
                base: sawtooth_segment(m, slope)?,
                half_width,
            })
        })
        .collect()
}
