//! Closed-form evaluation of the Laplace double-layer kernel and the flat
//! panel integrals it induces: the subtended angle of a 2-d segment and the
//! solid angle of a 3-d triangle or polygon.
//!
//! Kernels are signed; the angle operations return absolute values. The side
//! sign is recovered where needed from sign((x − ȳ)·n) at the panel centroid,
//! matching the sign rule of the flat-panel integral identity.

use crate::error::{Error, Result};
use crate::geometry2d::{Point2, Segment2D};
use nalgebra::Vector3;
use std::f64::consts::PI;

pub type Point3 = Vector3<f64>;

/// Relative distance below which an evaluation point counts as lying on the
/// panel, scaled by the panel diameter.
pub const SINGULARITY_RTOL: f64 = 1e-12;

/// 2-d double-layer kernel (1/2π)·((x−y)·n(y))/|x−y|².
pub fn dlp_kernel_2d(x: &Point2, y: &Point2, ny: &Point2) -> Result<f64> {
    let d = x - y;
    let r2 = d.norm_squared();
    if r2 == 0.0 {
        return Err(Error::Singularity("coincident points in 2-d kernel".into()));
    }
    Ok(d.dot(ny) / (2.0 * PI * r2))
}

/// 3-d double-layer kernel (1/4π)·((x−y)·n(y))/|x−y|³.
pub fn dlp_kernel_3d(x: &Point3, y: &Point3, ny: &Point3) -> Result<f64> {
    let d = x - y;
    let r = d.norm();
    if r == 0.0 {
        return Err(Error::Singularity("coincident points in 3-d kernel".into()));
    }
    Ok(d.dot(ny) / (4.0 * PI * r * r * r))
}

fn on_segment(seg: &Segment2D, x: &Point2) -> bool {
    let len = seg.length();
    let tol = SINGULARITY_RTOL * len;
    let d = seg.b - seg.a;
    let t = (x - seg.a).dot(&d) / d.norm_squared();
    let t = t.clamp(0.0, 1.0);
    (x - seg.point_at(t)).norm() <= tol
}

/// Angle in [0, π] subtended at `x` by the segment, computed as the absolute
/// two-argument arctangent angle between (a − x) and (b − x). Equals
/// 2π·|∫_seg ∂Φ/∂n ds|.
pub fn angle_subtended(seg: &Segment2D, x: &Point2) -> Result<f64> {
    if on_segment(seg, x) {
        return Err(Error::Singularity(
            "evaluation point lies on the segment".into(),
        ));
    }
    let va = seg.a - x;
    let vb = seg.b - x;
    let cross = va.x * vb.y - va.y * vb.x;
    let dot = va.dot(&vb);
    Ok(cross.atan2(dot).abs())
}

fn tri_diameter(v0: &Point3, v1: &Point3, v2: &Point3) -> f64 {
    (v0 - v1)
        .norm()
        .max((v1 - v2).norm())
        .max((v2 - v0).norm())
}

fn point_in_triangle_plane(v0: &Point3, v1: &Point3, v2: &Point3, x: &Point3, tol: f64) -> bool {
    let n = (v1 - v0).cross(&(v2 - v0));
    let nn = n.norm();
    if nn == 0.0 {
        return false;
    }
    let n = n / nn;
    if (x - v0).dot(&n).abs() > tol {
        return false;
    }
    // barycentric sign test in the plane
    let inside = |a: &Point3, b: &Point3| (b - a).cross(&(x - a)).dot(&n);
    let s0 = inside(v0, v1);
    let s1 = inside(v1, v2);
    let s2 = inside(v2, v0);
    let lo = -tol * nn;
    (s0 >= lo && s1 >= lo && s2 >= lo) || (s0 <= -lo && s1 <= -lo && s2 <= -lo)
}

/// Signed solid angle of the oriented triangle (v0, v1, v2) at `x`
/// (van Oosterom–Strandberg two-argument-arctangent form).
pub fn solid_angle_triangle_signed(
    v0: &Point3,
    v1: &Point3,
    v2: &Point3,
    x: &Point3,
) -> Result<f64> {
    let dia = tri_diameter(v0, v1, v2);
    if point_in_triangle_plane(v0, v1, v2, x, SINGULARITY_RTOL * dia) {
        return Err(Error::Singularity(
            "evaluation point lies in the closed triangle".into(),
        ));
    }
    let a = v0 - x;
    let b = v1 - x;
    let c = v2 - x;
    let (la, lb, lc) = (a.norm(), b.norm(), c.norm());
    let num = a.dot(&b.cross(&c));
    let den = la * lb * lc + a.dot(&b) * lc + a.dot(&c) * lb + b.dot(&c) * la;
    Ok(2.0 * num.atan2(den))
}

/// Solid angle in [0, 2π) subtended at `x` by the triangle; equals
/// 4π·|∫_tri ∂Φ/∂n ds|.
pub fn solid_angle_triangle(v0: &Point3, v1: &Point3, v2: &Point3, x: &Point3) -> Result<f64> {
    Ok(solid_angle_triangle_signed(v0, v1, v2, x)?.abs())
}

/// Solid angle of a planar polygon given by an ordered vertex loop: fan
/// triangulation from vertex 0 with signed accumulation, so the result is
/// independent of the fan root. Degenerate (zero-area) fans contribute zero.
pub fn solid_angle_polygon(vertices: &[Point3], x: &Point3) -> Result<f64> {
    if vertices.len() < 3 {
        return Ok(0.0);
    }
    let mut total = 0.0;
    for i in 1..vertices.len() - 1 {
        let (v0, v1, v2) = (&vertices[0], &vertices[i], &vertices[i + 1]);
        if (v1 - v0).cross(&(v2 - v0)).norm() == 0.0 {
            continue;
        }
        total += solid_angle_triangle_signed(v0, v1, v2, x)?;
    }
    Ok(total.abs())
}

/// Sign of the flat-panel integral: +1 when `x` lies on the side the normal
/// points to, judged at the panel centroid.
pub fn side_sign_2d(x: &Point2, centroid: &Point2, normal: &Point2) -> f64 {
    if (x - centroid).dot(normal) >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

pub fn side_sign_3d(x: &Point3, centroid: &Point3, normal: &Point3) -> f64 {
    if (x - centroid).dot(normal) >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry2d::Segment2D;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use proptest::prelude::*;

    fn seg(ax: f64, ay: f64, bx: f64, by: f64) -> Segment2D {
        Segment2D::new(Point2::new(ax, ay), Point2::new(bx, by), 0).unwrap()
    }

    #[test]
    fn kernel_vanishes_when_offset_perpendicular_to_normal() {
        let v = dlp_kernel_2d(&Point2::new(1.0, 0.0), &Point2::new(0.0, 0.0), &Point2::new(0.0, 1.0))
            .unwrap();
        assert_abs_diff_eq!(v, 0.0, epsilon = 1e-16);
    }

    #[test]
    fn kernel_3d_axis_value() {
        let v = dlp_kernel_3d(
            &Point3::new(0.0, 0.0, 1.0),
            &Point3::new(0.0, 0.0, 0.0),
            &Point3::new(0.0, 0.0, 1.0),
        )
        .unwrap();
        assert_relative_eq!(v, 1.0 / (4.0 * PI), epsilon = 1e-15);
    }

    #[test]
    fn kernel_2d_axis_value() {
        let v = dlp_kernel_2d(
            &Point2::new(0.0, 1.0),
            &Point2::new(0.0, 0.0),
            &Point2::new(0.0, 1.0),
        )
        .unwrap();
        assert_relative_eq!(v, 1.0 / (2.0 * PI), epsilon = 1e-15);
    }

    #[test]
    fn coincident_points_are_singular() {
        let p = Point2::new(0.3, 0.4);
        assert!(dlp_kernel_2d(&p, &p, &Point2::new(0.0, 1.0)).is_err());
    }

    #[test]
    fn right_isoceles_sees_right_angle() {
        let s = seg(0.0, 0.0, 1.0, 0.0);
        let alpha = angle_subtended(&s, &Point2::new(0.5, 0.5)).unwrap();
        assert_relative_eq!(alpha, PI / 2.0, epsilon = 1e-14);
    }

    #[test]
    fn collinear_point_sees_zero_angle() {
        let s = seg(0.0, 0.0, 1.0, 0.0);
        let alpha = angle_subtended(&s, &Point2::new(2.0, 0.0)).unwrap();
        assert_abs_diff_eq!(alpha, 0.0, epsilon = 1e-14);
    }

    #[test]
    fn angle_tends_to_pi_close_to_interior() {
        let s = seg(0.0, 0.0, 1.0, 0.0);
        let mut prev = 0.0;
        for h in [1e-2, 1e-4, 1e-6] {
            let alpha = angle_subtended(&s, &Point2::new(0.5, h)).unwrap();
            assert!(alpha > prev);
            prev = alpha;
        }
        assert_relative_eq!(prev, PI, epsilon = 1e-5);
    }

    #[test]
    fn point_on_segment_is_singular() {
        let s = seg(0.0, 0.0, 1.0, 0.0);
        assert!(angle_subtended(&s, &Point2::new(0.5, 0.0)).is_err());
        assert!(angle_subtended(&s, &Point2::new(0.0, 0.0)).is_err());
    }

    #[test]
    fn solid_angle_zero_in_plane_outside() {
        let (v0, v1, v2) = (
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(0.0, 1.0, 0.0),
        );
        let omega = solid_angle_triangle(&v0, &v1, &v2, &Point3::new(3.0, 3.0, 0.0)).unwrap();
        assert_abs_diff_eq!(omega, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn solid_angle_in_triangle_is_singular() {
        let (v0, v1, v2) = (
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(0.0, 1.0, 0.0),
        );
        assert!(solid_angle_triangle(&v0, &v1, &v2, &Point3::new(0.2, 0.2, 0.0)).is_err());
    }

    #[test]
    fn disc_fan_matches_axial_closed_form() {
        // unit disc as a 720-gon fan, observer on the axis at height 1:
        // closed form 2π(1 − h/√(h²+R²)) = 2π(1 − 1/√2)
        let n = 720;
        let x = Point3::new(0.0, 0.0, 1.0);
        let mut vertices = Vec::with_capacity(n);
        for k in 0..n {
            let t = 2.0 * PI * k as f64 / n as f64;
            vertices.push(Point3::new(t.cos(), t.sin(), 0.0));
        }
        let omega = solid_angle_polygon(&vertices, &x).unwrap();
        let exact = 2.0 * PI * (1.0 - 1.0 / 2.0f64.sqrt());
        assert_abs_diff_eq!(omega, exact, epsilon = 1e-4);
    }

    #[test]
    fn solid_angle_approaches_two_pi_near_interior() {
        let (v0, v1, v2) = (
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(0.0, 1.0, 0.0),
        );
        let centroid = (v0 + v1 + v2) / 3.0;
        let mut prev_gap = f64::INFINITY;
        for delta in [1e-3, 1e-4] {
            let above =
                solid_angle_triangle(&v0, &v1, &v2, &(centroid + Point3::new(0.0, 0.0, delta)))
                    .unwrap();
            let below =
                solid_angle_triangle(&v0, &v1, &v2, &(centroid - Point3::new(0.0, 0.0, delta)))
                    .unwrap();
            // mirror symmetry through the plane
            assert_abs_diff_eq!(above, below, epsilon = 1e-12);
            let gap = (2.0 * PI - above).abs();
            assert!(gap < prev_gap && gap <= 100.0 * delta, "gap {gap} at {delta}");
            prev_gap = gap;
        }
    }

    #[test]
    fn polygon_split_two_ways_agrees() {
        let quad = [
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(2.0, 0.0, 0.0),
            Point3::new(2.0, 2.0, 0.0),
            Point3::new(0.0, 2.0, 0.0),
        ];
        let x = Point3::new(0.3, 0.7, 1.3);
        let whole = solid_angle_polygon(&quad, &x).unwrap();
        let rotated = [quad[1], quad[2], quad[3], quad[0]];
        let other = solid_angle_polygon(&rotated, &x).unwrap();
        assert_abs_diff_eq!(whole, other, epsilon = 1e-12);
    }

    #[test]
    fn degenerate_polygon_has_zero_solid_angle() {
        let line = [
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(2.0, 0.0, 0.0),
        ];
        let omega = solid_angle_polygon(&line, &Point3::new(0.0, 1.0, 1.0)).unwrap();
        assert_abs_diff_eq!(omega, 0.0, epsilon = 1e-14);
    }

    proptest! {
        // angle_subtended equals 2π·|quadrature of the signed kernel| on
        // random segment/point configurations
        #[test]
        fn angle_matches_kernel_quadrature(
            ax in -1.0f64..1.0, ay in -1.0f64..1.0,
            bx in -1.0f64..1.0, by in -1.0f64..1.0,
            px in -2.0f64..2.0, py in 0.1f64..2.0,
        ) {
            prop_assume!(((bx-ax).powi(2) + (by-ay).powi(2)).sqrt() > 1e-3);
            let s = seg(ax, ay, bx, by);
            let x = Point2::new(px, py + ay.max(by));
            prop_assume!(!on_segment(&s, &x));
            let alpha = angle_subtended(&s, &x).unwrap();
            let rule = crate::quadrature::QuadRule::on_unit(crate::quadrature::Grading::Both, 10, 8, 16);
            let val = rule.integrate(|t| {
                dlp_kernel_2d(&x, &s.point_at(t), &s.normal).unwrap()
            }) * s.length();
            prop_assert!((alpha - 2.0 * PI * val.abs()).abs() < 1e-8,
                "alpha {} vs quad {}", alpha, 2.0 * PI * val.abs());
        }

        // rigid motion + uniform scaling invariance of the subtended angle
        #[test]
        fn angle_invariant_under_similarity(
            theta in 0.0f64..(2.0*PI), scale in 0.1f64..10.0,
            tx in -5.0f64..5.0, ty in -5.0f64..5.0,
        ) {
            let s = seg(0.0, 0.0, 1.0, 0.25);
            let x = Point2::new(0.4, 0.9);
            let alpha = angle_subtended(&s, &x).unwrap();
            let rot = |p: &Point2| {
                let (c, sn) = (theta.cos(), theta.sin());
                Point2::new(
                    scale * (c * p.x - sn * p.y) + tx,
                    scale * (sn * p.x + c * p.y) + ty,
                )
            };
            let s2 = Segment2D::new(rot(&s.a), rot(&s.b), 0).unwrap();
            let alpha2 = angle_subtended(&s2, &rot(&x)).unwrap();
            prop_assert!((alpha - alpha2).abs() < 1e-12);
        }

        // solid angle of a polygon is independent of the fan root and
        // invariant under rotation + scaling
        #[test]
        fn solid_angle_similarity_invariance(
            phi in 0.0f64..(2.0*PI), scale in 0.2f64..5.0,
        ) {
            let quad = [
                Point3::new(0.0, 0.0, 0.0),
                Point3::new(1.0, 0.0, 0.1),
                Point3::new(1.1, 1.0, 0.1),
                Point3::new(0.05, 1.0, 0.0),
            ];
            // make it planar: project last onto plane of first three
            let n = (quad[1]-quad[0]).cross(&(quad[2]-quad[0])).normalize();
            let mut q3 = quad[3];
            q3 -= n * (q3 - quad[0]).dot(&n);
            let quad = [quad[0], quad[1], quad[2], q3];
            let x = Point3::new(0.5, 0.5, 1.5);
            let before = solid_angle_polygon(&quad, &x).unwrap();
            let rot = |p: &Point3| {
                let (c, s) = (phi.cos(), phi.sin());
                Point3::new(scale*(c*p.x - s*p.y), scale*(s*p.x + c*p.y), scale*p.z)
            };
            let quad2: Vec<_> = quad.iter().map(rot).collect();
            let after = solid_angle_polygon(&quad2, &rot(&x)).unwrap();
            prop_assert!((before - after).abs() < 1e-11);
        }
    }
}
