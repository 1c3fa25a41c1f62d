//! Weight-independent lower bound for the essential norm of the double-layer
//! operator on the open book in weighted continuous-function norms.
//!
//! On each page the region cut out by the cylinder
//! (x1 - 1/2)^2 + (x3 + 1/2)^2 < 1/64 is an ellipse; as the book closes these
//! ellipses pile up into 2n nearly coincident discs of radius 1/8. The bound
//! is the sampled minimum over disc points of the summed solid angles of the
//! other discs, divided by 4π; its closing-book limit is (2n-1)/4, attained
//! toward the disc rims.

use crate::error::{Error, Result};
use crate::geometry3d::{open_book, Face3D, OpenBook};
use crate::kernels::{solid_angle_polygon, Point3};
use nalgebra::Vector2;
use rayon::prelude::*;
use std::f64::consts::PI;
use std::fmt::Write as _;

/// Disc center in the (x1, x3) cylinder coordinates and its radius.
pub const DISC_CENTER: (f64, f64) = (0.5, -0.5);
pub const DISC_RADIUS: f64 = 0.125;

/// Margin by which sample points avoid the disc rim.
pub const RIM_MARGIN: f64 = 1e-3;

/// Polygonal approximations of the per-page elliptical regions.
#[derive(Debug, Clone)]
pub struct PageDiscFamily {
    pub book: OpenBook,
    /// one inscribed P-gon per page, same order as `book.pages()`
    pub discs: Vec<Vec<Point3>>,
    pub p_gon: usize,
}

struct PageChart {
    origin: Point3,
    u: Point3,
    v: Point3,
    w0: Vector2<f64>,
    inv: nalgebra::Matrix2<f64>,
}

fn page_chart(face: &Face3D) -> Result<PageChart> {
    let c = face.centroid();
    let u = (face.vertices[1] - face.vertices[0]).normalize();
    let v = face.normal.cross(&u).normalize();
    let l = nalgebra::Matrix2::new(u.x, v.x, u.z, v.z);
    let inv = l.try_inverse().ok_or_else(|| {
        Error::NotRepresentable(format!(
            "page {} is parallel to the cylinder axis",
            face.label
        ))
    })?;
    Ok(PageChart {
        origin: c,
        u,
        v,
        w0: Vector2::new(c.x - DISC_CENTER.0, c.z - DISC_CENTER.1),
        inv,
    })
}

impl PageChart {
    /// Maps cylinder coordinates w = (x1 - 1/2, x3 + 1/2) to the point of the
    /// page plane with those coordinates.
    fn lift(&self, w: Vector2<f64>) -> Point3 {
        let st = self.inv * (w - self.w0);
        self.origin + self.u * st.x + self.v * st.y
    }
}

/// Builds the inscribed P-gon approximation of each page's elliptical region
/// and checks every polygon vertex lies inside its page.
pub fn page_disc_family(book: &OpenBook, p_gon: usize) -> Result<PageDiscFamily> {
    if p_gon < 180 {
        return Err(Error::InvalidParameter(format!(
            "polygon resolution must be at least 180, got {p_gon}"
        )));
    }
    let pages = book.pages();
    let mut discs = Vec::with_capacity(pages.len());
    for face in &pages {
        let chart = page_chart(face)?;
        let mut poly = Vec::with_capacity(p_gon);
        for k in 0..p_gon {
            let phi = 2.0 * PI * k as f64 / p_gon as f64;
            let w = Vector2::new(phi.cos(), phi.sin()) * DISC_RADIUS;
            let p = chart.lift(w);
            if !face.contains_in_plane(&p, 1e-9) {
                return Err(Error::NotRepresentable(format!(
                    "disc vertex escapes page {}",
                    face.label
                )));
            }
            poly.push(p);
        }
        discs.push(poly);
    }
    Ok(PageDiscFamily {
        book: book.clone(),
        discs,
        p_gon,
    })
}

/// (1/4π) Σ_{m≠j} solid angle of disc m at x; each term is checked against
/// the geometric range [0, 2π].
pub fn disc_sum_at(family: &PageDiscFamily, skip: usize, x: &Point3) -> Result<f64> {
    let mut total = 0.0;
    for (m, poly) in family.discs.iter().enumerate() {
        if m == skip {
            continue;
        }
        let omega = solid_angle_polygon(poly, x)?;
        if !(0.0..=2.0 * PI + 1e-9).contains(&omega) {
            return Err(Error::NotRepresentable(format!(
                "solid angle {omega} outside [0, 2pi]"
            )));
        }
        total += omega;
    }
    Ok(total / (4.0 * PI))
}

/// Result of the sampled minimisation, with grid metadata.
#[derive(Debug, Clone, Copy)]
pub struct WeightedBound {
    pub theta: f64,
    pub n_pages: usize,
    pub p_gon: usize,
    pub grid: usize,
    /// sampled minimum of the solid-angle functional (not a certified inf)
    pub value: f64,
    /// the closing-book limit (2n-1)/4 for reference
    pub limit: f64,
}

impl WeightedBound {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("theta,n,P,G,lower_bound,limit\n");
        writeln!(
            out,
            "{:.10e},{},{},{},{:.10e},{:.10e}",
            self.theta, self.n_pages, self.p_gon, self.grid, self.value, self.limit
        )
        .unwrap();
        out
    }
}

/// Sampled minimum over all pages and a polar interior grid (rings reach the
/// rim minus RIM_MARGIN, where the functional is smallest) of the summed
/// solid angles of the other discs over 4π.
pub fn weighted_lower_bound(
    theta: f64,
    n_pages: usize,
    p_gon: usize,
    grid: usize,
) -> Result<WeightedBound> {
    if grid < 10 {
        return Err(Error::InvalidParameter(format!(
            "sample grid must be at least 10 per page, got {grid}"
        )));
    }
    let book = open_book(theta, n_pages)?;
    let family = page_disc_family(&book, p_gon)?;
    let pages = book.pages();
    let mut samples = Vec::new();
    for (j, face) in pages.iter().enumerate() {
        let chart = page_chart(face)?;
        for ir in 0..grid {
            let r = DISC_RADIUS * (1.0 - RIM_MARGIN) * (ir + 1) as f64 / grid as f64;
            for it in 0..grid {
                let phi = 2.0 * PI * (it as f64 + 0.5) / grid as f64;
                let w = Vector2::new(r * phi.cos(), r * phi.sin());
                samples.push((j, chart.lift(w)));
            }
        }
    }
    let value = samples
        .par_iter()
        .map(|(j, x)| disc_sum_at(&family, *j, x))
        .try_reduce(|| f64::INFINITY, |a, b| Ok(a.min(b)))?;
    Ok(WeightedBound {
        theta,
        n_pages,
        p_gon,
        grid,
        value,
        limit: (2 * n_pages - 1) as f64 / 4.0,
    })
}
