//! Numerical range approximations, numerical abscissae, matrix 2-norms, and
//! the explicit spectral facts about the sign-pattern matrix B_N.
//!
//! The numerical range is approximated from both sides: boundary points are
//! Rayleigh quotients of extreme eigenvectors of rotated Hermitian parts
//! (genuine members of W(A)), their convex hull is the inner approximation,
//! and the intersection of the supporting half-planes Re(e^{iθ}z) ≤
//! w_r(e^{iθ}A) is the outer one. Eigenvalues come from cyclic Jacobi sweeps,
//! with the complex Hermitian case handled by the real-symmetric embedding.

use crate::assembly::b_matrix;
use crate::error::{Error, Result};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;
use std::fmt::Write as _;

/// Off-diagonal norm tolerance (relative to the input norm) for the Jacobi
/// sweeps.
pub const JACOBI_TOL: f64 = 1e-12;
const JACOBI_MAX_SWEEPS: usize = 40;

/// Eigendecomposition of a real symmetric matrix by cyclic Jacobi rotations
/// with deterministic row-by-row sweep order. Returns eigenvalues in
/// ascending order with matching orthonormal eigenvector columns.
pub fn jacobi_sym(matrix: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = matrix.nrows();
    let mut a = matrix.clone();
    let mut v = DMatrix::<f64>::identity(n, n);
    let norm = a.norm().max(f64::MIN_POSITIVE);
    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[(p, q)] * a[(p, q)];
            }
        }
        if (2.0 * off).sqrt() <= JACOBI_TOL * norm {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let tau = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].partial_cmp(&a[(j, j)]).unwrap());
    let eigenvalues: Vec<f64> = order.iter().map(|&i| a[(i, i)]).collect();
    let mut vectors = DMatrix::zeros(n, n);
    for (col, &i) in order.iter().enumerate() {
        vectors.set_column(col, &v.column(i));
    }
    (eigenvalues, vectors)
}

/// Hermitian part of e^{iθ}A: H = (e^{iθ}A + e^{-iθ}A*)/2, Hermitian by
/// construction (the upper triangle is mirrored exactly).
pub fn hermitian_part(a: &DMatrix<Complex64>, theta: f64) -> DMatrix<Complex64> {
    let n = a.nrows();
    let w = Complex64::from_polar(1.0, theta);
    let mut h = DMatrix::<Complex64>::zeros(n, n);
    for p in 0..n {
        h[(p, p)] = Complex64::new((w * a[(p, p)]).re, 0.0);
        for q in (p + 1)..n {
            let val = (w * a[(p, q)] + (w * a[(q, p)]).conj()) / 2.0;
            h[(p, q)] = val;
            h[(q, p)] = val.conj();
        }
    }
    h
}

pub fn to_complex(a: &DMatrix<f64>) -> DMatrix<Complex64> {
    a.map(|x| Complex64::new(x, 0.0))
}

fn hermitian_deviation(h: &DMatrix<Complex64>) -> f64 {
    let mut dev: f64 = 0.0;
    for p in 0..h.nrows() {
        for q in 0..h.ncols() {
            dev = dev.max((h[(p, q)] - h[(q, p)].conj()).norm());
        }
    }
    dev
}

/// Eigendecomposition of a complex Hermitian matrix: eigenvalues ascending,
/// orthonormal eigenvector columns. Real inputs go straight to the real
/// Jacobi; complex ones through the real-symmetric embedding
/// [[X, -Y], [Y, X]] with H = X + iY.
pub fn eigs_hermitian(h: &DMatrix<Complex64>) -> Result<(Vec<f64>, DMatrix<Complex64>)> {
    let n = h.nrows();
    if n != h.ncols() {
        return Err(Error::InvalidParameter("matrix must be square".into()));
    }
    let scale = h.map(|z| z.norm()).max().max(1.0);
    if hermitian_deviation(h) > 1e-12 * scale {
        return Err(Error::InvalidParameter(
            "matrix is not Hermitian within 1e-12".into(),
        ));
    }
    let imag_max = h.map(|z| z.im.abs()).max();
    if imag_max <= f64::MIN_POSITIVE {
        let real = h.map(|z| z.re);
        let (vals, vecs) = jacobi_sym(&real);
        return Ok((vals, vecs.map(|x| Complex64::new(x, 0.0))));
    }
    let mut e = DMatrix::<f64>::zeros(2 * n, 2 * n);
    for p in 0..n {
        for q in 0..n {
            let z = h[(p, q)];
            e[(p, q)] = z.re;
            e[(p + n, q + n)] = z.re;
            e[(p, q + n)] = -z.im;
            e[(p + n, q)] = z.im;
        }
    }
    let (vals, vecs) = jacobi_sym(&e);
    // each eigenvalue of H appears twice; extract one complex vector per pair
    let mut out_vals = Vec::with_capacity(n);
    let mut out_vecs: Vec<nalgebra::DVector<Complex64>> = Vec::with_capacity(n);
    for i in 0..2 * n {
        if out_vals.len() == n {
            break;
        }
        let col = vecs.column(i);
        let mut c = nalgebra::DVector::<Complex64>::from_fn(n, |k, _| {
            Complex64::new(col[k], col[k + n])
        });
        for b in &out_vecs {
            let proj = b.dotc(&c);
            c -= b * proj;
        }
        let nrm = c.norm();
        if nrm > 1e-6 {
            out_vals.push(vals[i]);
            out_vecs.push(c / Complex64::new(nrm, 0.0));
        }
    }
    if out_vals.len() != n {
        return Err(Error::InvalidParameter(
            "embedding pair extraction failed".into(),
        ));
    }
    let mut vectors = DMatrix::<Complex64>::zeros(n, n);
    for (col, vec) in out_vecs.iter().enumerate() {
        vectors.set_column(col, vec);
    }
    Ok((out_vals, vectors))
}

/// Numerical abscissa w_r(e^{iθ}A): the top eigenvalue of the Hermitian part.
pub fn numerical_abscissa(a: &DMatrix<Complex64>, theta: f64) -> Result<f64> {
    let (vals, _) = eigs_hermitian(&hermitian_part(a, theta))?;
    Ok(*vals.last().unwrap())
}

/// Spectral 2-norm via the top eigenvalue of A*A.
pub fn matrix_2norm(a: &DMatrix<f64>) -> f64 {
    let gram = a.transpose() * a;
    let (vals, _) = jacobi_sym(&gram);
    vals.last().unwrap().max(0.0).sqrt()
}

pub fn matrix_2norm_complex(a: &DMatrix<Complex64>) -> f64 {
    let gram = a.adjoint() * a;
    let (vals, _) = eigs_hermitian(&gram).expect("Gram matrix is Hermitian");
    vals.last().unwrap().max(0.0).sqrt()
}

/// Smallest singular value via the bottom eigenvalue of A*A.
pub fn matrix_sigma_min(a: &DMatrix<f64>) -> f64 {
    let gram = a.transpose() * a;
    let (vals, _) = jacobi_sym(&gram);
    vals.first().unwrap().max(0.0).sqrt()
}

/// Closed-form spectrum of B_N together with its characteristic polynomial
/// verification.
#[derive(Debug, Clone)]
pub struct SpecBn {
    pub n: usize,
    pub eigenvalues: Vec<f64>,
    /// max |computed - closed form| over characteristic coefficients
    pub char_poly_deviation: f64,
}

/// Characteristic polynomial coefficients of det(λI - A), ascending powers,
/// by the Faddeev-LeVerrier recursion (exact for these small integer
/// matrices).
fn char_poly(a: &DMatrix<f64>) -> Vec<f64> {
    let n = a.nrows();
    let mut coeffs = vec![0.0; n + 1];
    coeffs[n] = 1.0;
    let mut m = DMatrix::<f64>::zeros(n, n);
    for k in 1..=n {
        // M_k = A M_{k-1} + c_{n-k+1} I, then c_{n-k} = -tr(A M_k)/k
        m = a * m;
        for i in 0..n {
            m[(i, i)] += coeffs[n - k + 1];
        }
        coeffs[n - k] = -(a * &m).trace() / k as f64;
    }
    coeffs
}

/// spec(B_N) = {-1, 1} for even N and {-1, 0, 1} for odd N ≥ 2, verified
/// against det(λI - B_N) = (λ²-1)^ν (N = 2ν) or λ(λ²-1)^ν (N = 2ν+1).
pub fn spec_bn(n: usize) -> Result<SpecBn> {
    if n < 2 {
        return Err(Error::InvalidParameter("spec_bn needs N >= 2".into()));
    }
    let b = b_matrix(n);
    let got = char_poly(&b.entries);
    // closed form: (λ²-1)^ν times λ^(n mod 2)
    let nu = n / 2;
    let mut expect = vec![0.0; n + 1];
    for k in 0..=nu {
        let binom = binomial(nu, k);
        let sign = if (nu - k) % 2 == 0 { 1.0 } else { -1.0 };
        expect[2 * k + (n % 2)] = sign * binom;
    }
    let dev = got
        .iter()
        .zip(&expect)
        .map(|(g, e)| (g - e).abs())
        .fold(0.0, f64::max);
    let eigenvalues = if n % 2 == 0 {
        vec![-1.0, 1.0]
    } else {
        vec![-1.0, 0.0, 1.0]
    };
    Ok(SpecBn {
        n,
        eigenvalues,
        char_poly_deviation: dev,
    })
}

fn binomial(n: usize, k: usize) -> f64 {
    let mut v = 1.0f64;
    for i in 0..k {
        v = v * (n - i) as f64 / (i + 1) as f64;
    }
    v
}

/// Two-sided numerical range approximation over a uniform angle grid.
#[derive(Debug, Clone)]
pub struct NumericalRangeApprox {
    pub angles: Vec<f64>,
    pub abscissae: Vec<f64>,
    pub boundary_points: Vec<Complex64>,
    /// counterclockwise convex polygon through the boundary points
    pub inner_hull: Vec<Complex64>,
}

impl NumericalRangeApprox {
    /// Membership in the outer region ∩_k {z : Re(e^{iθ_k} z) ≤ w_k}.
    pub fn outer_contains(&self, z: Complex64, slack: f64) -> bool {
        self.angles
            .iter()
            .zip(&self.abscissae)
            .all(|(&t, &w)| (Complex64::from_polar(1.0, t) * z).re <= w + slack)
    }

    /// Strict membership of a point in the inner hull with margin.
    pub fn inner_contains(&self, z: Complex64, margin: f64) -> bool {
        let h = &self.inner_hull;
        if h.len() < 3 {
            return false;
        }
        for i in 0..h.len() {
            let a = h[i];
            let b = h[(i + 1) % h.len()];
            let cross = (b.re - a.re) * (z.im - a.im) - (b.im - a.im) * (z.re - a.re);
            if cross < margin {
                return false;
            }
        }
        true
    }

    /// CSV rows (theta, abscissa, re(boundary), im(boundary)).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("theta,abscissa,re_boundary,im_boundary\n");
        for k in 0..self.angles.len() {
            writeln!(
                out,
                "{:.17e},{:.17e},{:.17e},{:.17e}",
                self.angles[k], self.abscissae[k], self.boundary_points[k].re,
                self.boundary_points[k].im
            )
            .unwrap();
        }
        out
    }
}

fn convex_hull(points: &[Complex64]) -> Vec<Complex64> {
    let mut pts: Vec<(f64, f64)> = points.iter().map(|z| (z.re, z.im)).collect();
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup_by(|a, b| (a.0 - b.0).abs() <= 1e-12 && (a.1 - b.1).abs() <= 1e-12);
    if pts.len() < 3 {
        return pts.iter().map(|&(x, y)| Complex64::new(x, y)).collect();
    }
    let cross = |o: (f64, f64), a: (f64, f64), b: (f64, f64)| {
        (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
    };
    let mut lower: Vec<(f64, f64)> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<(f64, f64)> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower
        .into_iter()
        .chain(upper)
        .map(|(x, y)| Complex64::new(x, y))
        .collect()
}

/// Inner/outer numerical range approximation on K uniformly spaced angles.
/// Each boundary point is the Rayleigh quotient of the top eigenvector of the
/// rotated Hermitian part, hence a genuine element of W(A).
pub fn numerical_range(a: &DMatrix<Complex64>, k: usize) -> Result<NumericalRangeApprox> {
    if k < 8 {
        return Err(Error::InvalidParameter(format!(
            "angle count must be at least 8, got {k}"
        )));
    }
    let per_angle: Result<Vec<(f64, f64, Complex64)>> = (0..k)
        .into_par_iter()
        .map(|i| {
            let theta = 2.0 * PI * i as f64 / k as f64;
            let h = hermitian_part(a, theta);
            let (vals, vecs) = eigs_hermitian(&h)?;
            let top = vecs.column(vecs.ncols() - 1);
            let rayleigh = top.dotc(&(a * top));
            Ok((theta, *vals.last().unwrap(), rayleigh))
        })
        .collect();
    let per_angle = per_angle?;
    let angles: Vec<f64> = per_angle.iter().map(|t| t.0).collect();
    let abscissae: Vec<f64> = per_angle.iter().map(|t| t.1).collect();
    let boundary_points: Vec<Complex64> = per_angle.iter().map(|t| t.2).collect();
    let inner_hull = convex_hull(&boundary_points);
    Ok(NumericalRangeApprox {
        angles,
        abscissae,
        boundary_points,
        inner_hull,
    })
}

pub fn numerical_range_real(a: &DMatrix<f64>, k: usize) -> Result<NumericalRangeApprox> {
    numerical_range(&to_complex(a), k)
}

/// Numerical radius estimate: max modulus over the boundary points.
pub fn numerical_radius(nr: &NumericalRangeApprox) -> f64 {
    nr.boundary_points
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

/// Largest r such that the disc |z| ≤ r fits inside the inner hull: the
/// minimum over hull edges of the distance from the origin to the edge's
/// supporting line. Returns 0 when the origin is not inside the hull.
pub fn disc_inclusion_radius(nr: &NumericalRangeApprox) -> f64 {
    let h = &nr.inner_hull;
    if h.len() < 3 || !nr.inner_contains(Complex64::new(0.0, 0.0), 0.0) {
        return 0.0;
    }
    let mut r = f64::INFINITY;
    for i in 0..h.len() {
        let a = h[i];
        let b = h[(i + 1) % h.len()];
        let e = b - a;
        let len = e.norm();
        if len == 0.0 {
            continue;
        }
        // distance from origin to the supporting line through a, b
        let dist = (a.re * b.im - a.im * b.re).abs() / len;
        r = r.min(dist);
    }
    r
}

/// a = ½ sqrt((d_12 + d_21)² + (d_23 + d_32)²) from a coefficient matrix,
/// indices 1-based: the half-length of the real section of W(D_3).
pub fn a_of_beta(d: &DMatrix<f64>) -> Result<f64> {
    if d.nrows() < 3 || d.ncols() < 3 {
        return Err(Error::InvalidParameter(
            "coefficient matrix must be at least 3x3".into(),
        ));
    }
    let p = d[(0, 1)] + d[(1, 0)];
    let r = d[(1, 2)] + d[(2, 1)];
    Ok(0.5 * (p * p + r * r).sqrt())
}

/// w_r(e^{iθ}B_N) for the sign matrix, used by the B_N fact checks.
pub fn bn_abscissa(n: usize, theta: f64) -> Result<f64> {
    numerical_abscissa(&to_complex(&b_matrix(n).entries), theta)
}
