//! Piecewise-constant Galerkin assembly of the double-layer operator.
//!
//! Basis functions are indicator functions scaled by |panel|^{-1/2}. Off-
//! diagonal entries reduce to panel integrals of subtended angles (2-d) or
//! solid angles (3-d) times a side sign recovered at panel centroids;
//! diagonal entries vanish because every panel is flat.

use crate::error::{Error, Result};
use crate::geometry2d::{gamma_beta, sawtooth, Segment2D};
use crate::geometry3d::{Face3D, OpenBook};
use crate::kernels::{angle_subtended, side_sign_2d, side_sign_3d, solid_angle_polygon, Point3};
use crate::quadrature::{integrate_adaptive, Grading, QuadRule};
use nalgebra::DMatrix;
use rayon::prelude::*;
use std::f64::consts::PI;
use std::fmt::Write as _;

/// Default quadrature tolerances per dimension.
pub const DEFAULT_TOL_2D: f64 = 1e-8;
pub const DEFAULT_TOL_3D: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeometryTag {
    GammaBeta,
    Sawtooth,
    Strip,
    OpenBook,
    Custom,
}

impl std::fmt::Display for GeometryTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            GeometryTag::GammaBeta => "gamma-beta",
            GeometryTag::Sawtooth => "sawtooth",
            GeometryTag::Strip => "strip",
            GeometryTag::OpenBook => "open-book",
            GeometryTag::Custom => "custom",
        };
        f.write_str(s)
    }
}

/// Dense Galerkin matrix with provenance and the achieved quadrature error.
#[derive(Debug, Clone)]
pub struct GalerkinMatrix {
    pub entries: DMatrix<f64>,
    pub geometry_tag: GeometryTag,
    pub params: String,
    pub quad_report: f64,
}

impl GalerkinMatrix {
    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    /// Row-major CSV with `#`-prefixed provenance header.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        writeln!(out, "# geometry: {}", self.geometry_tag).unwrap();
        writeln!(out, "# params: {}", self.params).unwrap();
        writeln!(out, "# quad_report: {:e}", self.quad_report).unwrap();
        for j in 0..self.entries.nrows() {
            let row: Vec<String> = (0..self.entries.ncols())
                .map(|m| format!("{:.17e}", self.entries[(j, m)]))
                .collect();
            writeln!(out, "{}", row.join(",")).unwrap();
        }
        out
    }
}

/// Sign-pattern matrix (B_N)_{jm} = (-1)^{m+1} sign(m - j), 1-based indices.
pub fn bn_sign(j: usize, m: usize) -> f64 {
    let sign = match m.cmp(&j) {
        std::cmp::Ordering::Greater => 1.0,
        std::cmp::Ordering::Less => -1.0,
        std::cmp::Ordering::Equal => 0.0,
    };
    let parity = if m % 2 == 1 { 1.0 } else { -1.0 };
    parity * sign
}

/// The exact integer matrix B_N.
pub fn b_matrix(n: usize) -> GalerkinMatrix {
    let entries = DMatrix::from_fn(n, n, |j, m| bn_sign(j + 1, m + 1));
    GalerkinMatrix {
        entries,
        geometry_tag: GeometryTag::Custom,
        params: format!("BN N={n}"),
        quad_report: 0.0,
    }
}

/// Coefficient matrix (the nonnegative d_{jm}) plus the achieved quadrature
/// error estimate.
#[derive(Debug, Clone)]
pub struct CoeffMatrix {
    pub values: DMatrix<f64>,
    pub quad_report: f64,
}

/// d_{jm} = (2π |Γ_j|^{1/2} |Γ_m|^{1/2})^{-1} ∫_{Γ_j} α_m ds for one pair.
/// The angle of a nearby segment has boundary layers at either endpoint of
/// the observation segment (shared vertices, near-parallel teeth), so the
/// rule always grades toward both ends.
fn d_pair_2d(src: &Segment2D, tgt: &Segment2D, tol: f64) -> Result<(f64, f64)> {
    let grading = Grading::Both;
    let lj = src.length();
    let lm = tgt.length();
    let scale = lj / (2.0 * PI * (lj * lm).sqrt());
    let (val, est) = integrate_adaptive(
        |t| angle_subtended(tgt, &src.point_at(t)).unwrap_or(PI),
        grading,
        tol / scale,
    )?;
    Ok((scale * val, scale * est))
}

/// Coefficients d_{jm} for an arbitrary ordered family of segments.
pub fn d_coeffs_segments(segments: &[Segment2D], tol: f64) -> Result<CoeffMatrix> {
    let n = segments.len();
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|j| (0..n).filter(move |&m| m != j).map(move |m| (j, m)))
        .collect();
    let computed: Result<Vec<((usize, usize), (f64, f64))>> = pairs
        .par_iter()
        .map(|&(j, m)| Ok(((j, m), d_pair_2d(&segments[j], &segments[m], tol)?)))
        .collect();
    let mut values = DMatrix::zeros(n, n);
    let mut report: f64 = 0.0;
    for ((j, m), (v, e)) in computed? {
        values[(j, m)] = v;
        report = report.max(e);
    }
    Ok(CoeffMatrix {
        values,
        quad_report: report,
    })
}

/// Galerkin matrix over an ordered segment family: entry (j, m) is the side
/// sign at centroids times d_{jm}.
pub fn galerkin_segments(
    segments: &[Segment2D],
    tol: f64,
    tag: GeometryTag,
    params: String,
) -> Result<GalerkinMatrix> {
    let coeffs = d_coeffs_segments(segments, tol)?;
    let n = segments.len();
    let entries = DMatrix::from_fn(n, n, |j, m| {
        if j == m {
            0.0
        } else {
            let s = side_sign_2d(
                &segments[j].midpoint(),
                &segments[m].midpoint(),
                &segments[m].normal,
            );
            s * coeffs.values[(j, m)]
        }
    });
    Ok(GalerkinMatrix {
        entries,
        geometry_tag: tag,
        params,
        quad_report: coeffs.quad_report,
    })
}

/// d_{jm} over the first N segments of the self-similar graph.
pub fn d_coeffs_gammabeta(beta: f64, n: usize, tol: f64) -> Result<CoeffMatrix> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "need at least 2 segments, got {n}"
        )));
    }
    let pl = gamma_beta(beta, n.div_ceil(2))?;
    d_coeffs_segments(&pl.segments[..n], tol)
}

/// Galerkin matrix D_N of the double-layer operator on the self-similar
/// graph, piecewise-constant basis on Γ_1..Γ_N.
pub fn galerkin_gammabeta(beta: f64, n: usize, tol: f64) -> Result<GalerkinMatrix> {
    let pl = gamma_beta(beta, n.div_ceil(2))?;
    galerkin_segments(
        &pl.segments[..n],
        tol,
        GeometryTag::GammaBeta,
        format!("beta={beta} N={n} tol={tol:e}"),
    )
}

/// Toeplitz coefficients d'_0..d'_L of the sawtooth graph: d'_0 = 0 and
/// d'_l = (2π|Γ_l|)^{-1} ∫_{Γ_l} (angle subtended by Γ_0) ds.
pub fn sawtooth_coeffs(slope: f64, l_max: usize, tol: f64) -> Result<(Vec<f64>, f64)> {
    if slope <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "slope must be positive, got {slope}"
        )));
    }
    let pl = sawtooth(slope, 0, l_max as i64)?;
    let gamma0 = pl.segments[0].clone();
    let computed: Result<Vec<(f64, f64)>> = (1..=l_max)
        .into_par_iter()
        .map(|l| d_pair_2d(&pl.segments[l], &gamma0, tol))
        .collect();
    let mut coeffs = vec![0.0];
    let mut report: f64 = 0.0;
    for (v, e) in computed? {
        coeffs.push(v);
        report = report.max(e);
    }
    Ok((coeffs, report))
}

/// Sawtooth Galerkin matrix D_N: Toeplitz-with-sign, entries
/// (B_N)_{jm} d'_{|j-m|}.
pub fn galerkin_sawtooth(slope: f64, n: usize, tol: f64) -> Result<GalerkinMatrix> {
    let (coeffs, report) = sawtooth_coeffs(slope, n.saturating_sub(1), tol)?;
    let entries = DMatrix::from_fn(n, n, |j, m| {
        bn_sign(j + 1, m + 1) * coeffs[j.abs_diff(m)]
    });
    Ok(GalerkinMatrix {
        entries,
        geometry_tag: GeometryTag::Sawtooth,
        params: format!("M={slope} N={n} tol={tol:e}"),
        quad_report: report,
    })
}

/// Strip coefficients d'_{l,a} = d'_l + correction, the correction being the
/// smooth double integral of the 2-d kernel magnitude times
/// (sqrt(1 + |x-y|^2/(4a^2)) - 1) over Γ_l × Γ_0.
pub fn d_coeffs_strip(
    slope: f64,
    half_width: f64,
    l_max: usize,
    tol: f64,
) -> Result<(Vec<f64>, f64)> {
    if slope <= 0.0 || half_width <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "slope and half-width must be positive, got {slope}, {half_width}"
        )));
    }
    let (base, base_report) = sawtooth_coeffs(slope, l_max, tol)?;
    let pl = sawtooth(slope, 0, l_max as i64)?;
    let gamma0 = &pl.segments[0];
    let seg_len = gamma0.length();
    let computed: Result<Vec<(f64, f64)>> = (1..=l_max)
        .into_par_iter()
        .map(|l| {
            let src = &pl.segments[l];
            let grading = Grading::Both;
            // outer integral over Γ_l, inner over Γ_0
            let inner_rule = QuadRule::on_unit(Grading::Both, 10, 4, 16);
            // (2π|Γ_l|)^{-1} ∫∫ |(y-x)·n(y)|/r² (√(1+r²/4a²)-1) ds ds with
            // ds(x) ds(y) = |Γ_l||Γ_0| dt ds and |Γ_l| = |Γ_0|
            let scale = seg_len / (2.0 * PI);
            let integrand = |t: f64| {
                let x = src.point_at(t);
                inner_rule.integrate(|s| {
                    let y = gamma0.point_at(s);
                    let d = x - y;
                    let r2 = d.norm_squared();
                    if r2 == 0.0 {
                        return 0.0;
                    }
                    let smooth = (1.0 + r2 / (4.0 * half_width * half_width)).sqrt() - 1.0;
                    d.dot(&gamma0.normal).abs() / r2 * smooth
                })
            };
            let (val, est) = integrate_adaptive(integrand, grading, tol / scale)?;
            Ok((scale * val, scale * est))
        })
        .collect();
    let mut coeffs = vec![0.0];
    let mut report = base_report;
    for (l, (corr, est)) in computed?.into_iter().enumerate() {
        coeffs.push(base[l + 1] + corr);
        report = report.max(est);
    }
    Ok((coeffs, report))
}

/// Strip Galerkin matrix D_{N,a}.
pub fn galerkin_strip(slope: f64, half_width: f64, n: usize, tol: f64) -> Result<GalerkinMatrix> {
    let (coeffs, report) = d_coeffs_strip(slope, half_width, n.saturating_sub(1), tol)?;
    let entries = DMatrix::from_fn(n, n, |j, m| {
        bn_sign(j + 1, m + 1) * coeffs[j.abs_diff(m)]
    });
    Ok(GalerkinMatrix {
        entries,
        geometry_tag: GeometryTag::Strip,
        params: format!("M={slope} a={half_width} N={n} tol={tol:e}"),
        quad_report: report,
    })
}

/// Reorders a page's vertex loop into a bilinear frame with the spine edge at
/// u = 0 and the top edge at v = 0, so grading toward u = 0 (and v = 0)
/// targets the spine / origin corner where pages meet.
fn page_frame(face: &Face3D) -> [Point3; 4] {
    let z_mid = face.vertices.iter().map(|v| v.z).sum::<f64>() / face.vertices.len() as f64;
    let mut tops: Vec<Point3> = Vec::new();
    let mut bottoms: Vec<Point3> = Vec::new();
    for v in &face.vertices {
        if v.z > z_mid {
            tops.push(*v);
        } else {
            bottoms.push(*v);
        }
    }
    let radius = |p: &Point3| (p.x * p.x + p.y * p.y).sqrt();
    tops.sort_by(|a, b| radius(a).partial_cmp(&radius(b)).unwrap());
    bottoms.sort_by(|a, b| radius(a).partial_cmp(&radius(b)).unwrap());
    [tops[0], tops[1], bottoms[1], bottoms[0]]
}

fn bilinear(v: &[Point3; 4], u: f64, w: f64) -> Point3 {
    v[0] * ((1.0 - u) * (1.0 - w))
        + v[1] * (u * (1.0 - w))
        + v[2] * (u * w)
        + v[3] * ((1.0 - u) * w)
}

fn bilinear_jacobian(v: &[Point3; 4], u: f64, w: f64) -> f64 {
    let du = (v[1] - v[0]) * (1.0 - w) + (v[2] - v[3]) * w;
    let dw = (v[3] - v[0]) * (1.0 - u) + (v[2] - v[1]) * u;
    du.cross(&dw).norm()
}

fn openbook_pair(
    src: &[Point3; 4],
    src_area: f64,
    tgt: &Face3D,
    layers: usize,
    subdiv: usize,
    points: usize,
) -> f64 {
    let rule_u = QuadRule::on_unit(Grading::Both, layers, subdiv, points);
    let rule_v = QuadRule::on_unit(Grading::Both, layers, subdiv, points);
    let mut total = 0.0;
    for (&u, &wu) in rule_u.nodes.iter().zip(&rule_u.weights) {
        for (&v, &wv) in rule_v.nodes.iter().zip(&rule_v.weights) {
            let x = bilinear(src, u, v);
            let jac = bilinear_jacobian(src, u, v);
            let omega = solid_angle_polygon(&tgt.vertices, &x).unwrap_or(0.0);
            total += wu * wv * jac * omega;
        }
    }
    let tgt_area = tgt.area();
    total / (4.0 * PI * (src_area * tgt_area).sqrt())
}

/// Open-book Galerkin matrix of size N = 2n - 1 over the relabelled pages:
/// d_{jm} integrates the solid angle of page m over page j by graded tensor
/// quadrature in the bilinear page frame.
pub fn galerkin_openbook(book: &OpenBook, tol: f64) -> Result<GalerkinMatrix> {
    galerkin_openbook_with(book, tol, 8)
}

/// As [`galerkin_openbook`] with an explicit starting graded-layer count;
/// the rule escalates (subdivided panels, doubled nodes) until the
/// node-doubling estimate meets `tol` or the budget runs out.
pub fn galerkin_openbook_with(
    book: &OpenBook,
    tol: f64,
    start_layers: usize,
) -> Result<GalerkinMatrix> {
    let n = 2 * book.n_pages - 1;
    let pages = book.pages();
    galerkin_pages(
        &pages[..n],
        tol,
        start_layers,
        format!(
            "theta={} n={} N={n} tol={tol:e}",
            book.theta, book.n_pages
        ),
    )
}

/// Galerkin assembly over an arbitrary family of planar quadrilateral pages
/// sharing the open-book spine structure.
pub fn galerkin_pages(
    pages: &[Face3D],
    tol: f64,
    start_layers: usize,
    params: String,
) -> Result<GalerkinMatrix> {
    let n = pages.len();
    let frames: Vec<[Point3; 4]> = pages.iter().map(page_frame).collect();
    let areas: Vec<f64> = pages.iter().map(|p| p.area()).collect();
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|j| (0..n).filter(move |&m| m != j).map(move |m| (j, m)))
        .collect();
    let computed: Result<Vec<((usize, usize), (f64, f64))>> = pairs
        .par_iter()
        .map(|&(j, m)| {
            let layers = start_layers.max(4);
            let mut subdiv = 1;
            let mut last = (0.0, f64::INFINITY);
            for _ in 0..4 {
                let lo = openbook_pair(&frames[j], areas[j], &pages[m], layers, subdiv, 8);
                let hi = openbook_pair(&frames[j], areas[j], &pages[m], layers, subdiv, 16);
                let est = (hi - lo).abs().max(f64::EPSILON);
                last = (hi, est);
                if est <= tol {
                    return Ok(((j, m), last));
                }
                subdiv *= 2;
            }
            Err(Error::ConvergenceFailure {
                estimate: last.1,
                tol,
            })
        })
        .collect();
    let mut d = DMatrix::zeros(n, n);
    let mut report: f64 = 0.0;
    for ((j, m), (v, e)) in computed? {
        d[(j, m)] = v;
        report = report.max(e);
    }
    let entries = DMatrix::from_fn(n, n, |j, m| {
        if j == m {
            0.0
        } else {
            let s = side_sign_3d(&pages[j].centroid(), &pages[m].centroid(), &pages[m].normal);
            s * d[(j, m)]
        }
    });
    Ok(GalerkinMatrix {
        entries,
        geometry_tag: GeometryTag::OpenBook,
        params,
        quad_report: report,
    })
}
