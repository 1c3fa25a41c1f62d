//! The 2-d counterexample curves: the periodic sawtooth graph, the
//! self-similar graph that accumulates at the origin, and the composite
//! profile that glues scaled sawtooth blocks between successive powers of
//! beta.

use crate::error::{Error, Result};
use nalgebra::Vector2;
use std::fmt::Write as _;

pub type Point2 = Vector2<f64>;

/// Oriented open line segment with its unit normal.
///
/// The orientation convention for all graph geometries here is n2 > 0: the
/// normal points to the upper side of the graph.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment2D {
    pub a: Point2,
    pub b: Point2,
    pub normal: Point2,
    pub index: i64,
}

impl Segment2D {
    /// Builds the segment with the upward (n2 > 0) unit normal.
    pub fn new(a: Point2, b: Point2, index: i64) -> Result<Self> {
        let d = b - a;
        let len = d.norm();
        if len == 0.0 {
            return Err(Error::InvalidParameter(format!(
                "segment {index} has coincident endpoints"
            )));
        }
        let t = d / len;
        let mut normal = Vector2::new(-t.y, t.x);
        if normal.y < 0.0 {
            normal = -normal;
        }
        if normal.y == 0.0 && normal.x < 0.0 {
            normal = -normal;
        }
        Ok(Segment2D { a, b, normal, index })
    }

    pub fn length(&self) -> f64 {
        (self.b - self.a).norm()
    }

    pub fn point_at(&self, t: f64) -> Point2 {
        self.a + (self.b - self.a) * t
    }

    pub fn midpoint(&self) -> Point2 {
        self.point_at(0.5)
    }

    /// |dy/dx| of the supporting line; infinite for vertical segments.
    pub fn abs_slope(&self) -> f64 {
        let d = self.b - self.a;
        (d.y / d.x).abs()
    }

    /// True when the two segments share an endpoint within `tol`.
    pub fn shares_endpoint_with(&self, other: &Segment2D, tol: f64) -> bool {
        for p in [&self.a, &self.b] {
            for q in [&other.a, &other.b] {
                if (p - q).norm() <= tol {
                    return true;
                }
            }
        }
        false
    }
}

/// An ordered chain of segments; consecutive segments share an endpoint.
#[derive(Debug, Clone)]
pub struct Polyline {
    pub segments: Vec<Segment2D>,
    pub closed: bool,
}

impl Polyline {
    pub fn new(segments: Vec<Segment2D>, closed: bool) -> Result<Self> {
        for pair in segments.windows(2) {
            if (pair[0].b - pair[1].a).norm() > 1e-14 {
                return Err(Error::InvalidParameter(format!(
                    "segments {} and {} do not share an endpoint",
                    pair[0].index, pair[1].index
                )));
            }
        }
        Ok(Polyline { segments, closed })
    }

    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    /// One row per segment: index, ax, ay, bx, by, nx, ny.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,ax,ay,bx,by,nx,ny\n");
        for s in &self.segments {
            writeln!(
                out,
                "{},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}",
                s.index, s.a.x, s.a.y, s.b.x, s.b.y, s.normal.x, s.normal.y
            )
            .unwrap();
        }
        out
    }
}

/// One segment of the sawtooth graph of slope ±M (period 2/M): for odd m the
/// open segment from ((1−m)/M, 0) to (−m/M, 1), for even m from ((1−m)/M, 1)
/// to (−m/M, 0).
pub fn sawtooth_segment(m: i64, slope: f64) -> Result<Segment2D> {
    if slope <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "sawtooth slope must be positive, got {slope}"
        )));
    }
    let (a, b) = if m.rem_euclid(2) == 1 {
        (
            Point2::new((1 - m) as f64 / slope, 0.0),
            Point2::new(-m as f64 / slope, 1.0),
        )
    } else {
        (
            Point2::new((1 - m) as f64 / slope, 1.0),
            Point2::new(-m as f64 / slope, 0.0),
        )
    };
    Segment2D::new(a, b, m)
}

/// Sawtooth segments m_lo..=m_hi as a connected polyline.
pub fn sawtooth(slope: f64, m_lo: i64, m_hi: i64) -> Result<Polyline> {
    if m_lo > m_hi {
        return Err(Error::InvalidParameter(format!(
            "empty index range {m_lo}..{m_hi}"
        )));
    }
    let segments = (m_lo..=m_hi)
        .map(|m| sawtooth_segment(m, slope))
        .collect::<Result<Vec<_>>>()?;
    Polyline::new(segments, false)
}

/// One segment of the self-similar graph: tooth k (k = 1, 2, ...) sits on
/// [β^k, β^{k−1}] with its peak on the diagonal at β^{k−1}(1+β)/2·(1,1).
/// Odd m = 2k−1 is the right (falling) side from (β^{k−1}, 0) up to the peak;
/// even m = 2k descends from the peak to (β^k, 0). Slopes are ±(1+β)/(1−β)
/// and the whole family scales by β every two segments.
pub fn gamma_beta_segment(m: i64, beta: f64) -> Result<Segment2D> {
    if !(0.0 < beta && beta < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "beta must lie in (0,1), got {beta}"
        )));
    }
    if m < 1 {
        return Err(Error::InvalidParameter(format!(
            "segment index must be >= 1, got {m}"
        )));
    }
    let k = (m + 1) / 2; // tooth number
    let scale = beta.powi((k - 1) as i32);
    let peak = Point2::new(scale * (1.0 + beta) / 2.0, scale * (1.0 + beta) / 2.0);
    let (a, b) = if m % 2 == 1 {
        (Point2::new(scale, 0.0), peak)
    } else {
        (peak, Point2::new(scale * beta, 0.0))
    };
    Segment2D::new(a, b, m)
}

/// Segments Γ_1..Γ_{2·depth} of the self-similar graph.
pub fn gamma_beta(beta: f64, depth: usize) -> Result<Polyline> {
    if depth == 0 {
        return Err(Error::InvalidParameter("depth must be >= 1".into()));
    }
    let segments = (1..=(2 * depth as i64))
        .map(|m| gamma_beta_segment(m, beta))
        .collect::<Result<Vec<_>>>()?;
    Polyline::new(segments, false)
}

/// Scaling factor of block j: block j is a γ_j-scaled copy of the first 2j
/// sawtooth segments translated to start at (β^{j−1}, 0).
pub fn omega2d_block_scale(slope: f64, beta: f64, j: usize) -> f64 {
    slope * (beta.powi(j as i32 - 1) - beta.powi(j as i32)) / (2.0 * j as f64)
}

/// Piecewise-linear profile on [β^{j_max}, 1]: block j carries 2j sawtooth
/// segments of slope ±M scaled by γ_j, and the blocks meet at (β^j, 0).
pub fn omega2d_profile(slope: f64, beta: f64, j_max: usize) -> Result<Polyline> {
    if slope <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "slope must be positive, got {slope}"
        )));
    }
    if !(0.0 < beta && beta < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "beta must lie in (0,1), got {beta}"
        )));
    }
    if j_max == 0 {
        return Err(Error::InvalidParameter("j_max must be >= 1".into()));
    }
    let mut segments = Vec::new();
    let mut index = 1i64;
    for j in 1..=j_max {
        let gamma = omega2d_block_scale(slope, beta, j);
        let origin = Point2::new(beta.powi(j as i32 - 1), 0.0);
        for m in 1..=(2 * j as i64) {
            let base = sawtooth_segment(m, slope)?;
            let a = origin + gamma * base.a;
            let b = origin + gamma * base.b;
            segments.push(Segment2D::new(a, b, index)?);
            index += 1;
        }
    }
    Polyline::new(segments, false)
}
