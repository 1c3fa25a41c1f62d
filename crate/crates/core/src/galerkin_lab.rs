//! Finite-dimensional Galerkin solver and stability analyzer.
//!
//! The lab solves projected systems over nested orthonormal subspaces,
//! measures the stability constant (the smallest singular value of the
//! compression), and builds the adversarial sandwiched sequence: shifted
//! copies of a near-null-Rayleigh vector grafted onto a convergent base
//! sequence drive the stability constant toward zero while the sandwich
//! bookkeeping H*_N ⊂ H_N ⊂ H*_{M_N} stays exact.

use crate::error::{Error, Result};
use crate::matrixanalysis::{
    jacobi_sym, matrix_sigma_min, numerical_range, to_complex, NumericalRangeApprox,
};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use std::fmt::Write as _;

/// Nested orthonormal bases inside a fixed ambient dimension.
#[derive(Debug, Clone)]
pub struct SubspaceSequence {
    pub ambient_dim: usize,
    pub bases: Vec<DMatrix<f64>>,
    /// sandwich bookkeeping M_N when built adversarially
    pub m_ns: Option<Vec<usize>>,
}

impl SubspaceSequence {
    /// Coordinate sequence: basis k spans the first dims[k] unit vectors.
    pub fn coordinate(ambient_dim: usize, dims: &[usize]) -> Result<Self> {
        if dims.is_empty() || dims.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter(
                "dimension list must be nonempty and strictly increasing".into(),
            ));
        }
        if *dims.last().unwrap() > ambient_dim {
            return Err(Error::InvalidParameter(
                "dimensions exceed the ambient space".into(),
            ));
        }
        let id = DMatrix::<f64>::identity(ambient_dim, ambient_dim);
        let bases = dims
            .iter()
            .map(|&k| id.view((0, 0), (ambient_dim, k)).into_owned())
            .collect();
        Ok(SubspaceSequence {
            ambient_dim,
            bases,
            m_ns: None,
        })
    }

    /// Orthonormality of every basis and prefix nesting between stages.
    pub fn validate(&self) -> Result<()> {
        for (i, q) in self.bases.iter().enumerate() {
            let gram = q.transpose() * q;
            let dev = (&gram - DMatrix::identity(gram.nrows(), gram.ncols())).abs().max();
            if dev > 1e-12 {
                return Err(Error::InvalidParameter(format!(
                    "basis {i} not orthonormal (deviation {dev:e})"
                )));
            }
        }
        for pair in self.bases.windows(2) {
            let (prev, next) = (&pair[0], &pair[1]);
            if next.ncols() < prev.ncols() {
                return Err(Error::InvalidParameter("bases must grow".into()));
            }
            let head = next.view((0, 0), (self.ambient_dim, prev.ncols()));
            if (&head - prev).abs().max() > 1e-12 {
                return Err(Error::InvalidParameter(
                    "earlier basis is not a prefix of the later one".into(),
                ));
            }
        }
        Ok(())
    }
}

/// Per-stage stability and error data.
#[derive(Debug, Clone, Copy)]
pub struct StabilityRow {
    pub n: usize,
    pub dim: usize,
    pub c_n: f64,
    pub err: f64,
    pub best_err: f64,
    pub m_n: usize,
}

#[derive(Debug, Clone, Default)]
pub struct StabilityReport {
    pub rows: Vec<StabilityRow>,
}

impl StabilityReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("N,dim,c_N,err,best_err,M_N\n");
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{:.10e},{:.10e},{:.10e},{}",
                r.n, r.dim, r.c_n, r.err, r.best_err, r.m_n
            )
            .unwrap();
        }
        out
    }
}

/// Solves the projected system (QᵀAQ)c = Qᵀg and returns Qc. Flags
/// near-singular compressions instead of returning garbage.
pub fn galerkin_solve(
    a: &DMatrix<f64>,
    q: &DMatrix<f64>,
    g: &DVector<f64>,
) -> Result<DVector<f64>> {
    let gram = q.transpose() * q;
    let dev = (&gram - DMatrix::identity(gram.nrows(), gram.ncols())).abs().max();
    if dev > 1e-10 {
        return Err(Error::InvalidParameter(format!(
            "basis columns not orthonormal (deviation {dev:e})"
        )));
    }
    let projected = q.transpose() * a * q;
    let rhs = q.transpose() * g;
    let (vals, _) = jacobi_sym(&(projected.transpose() * &projected));
    let smax = vals.last().unwrap().max(0.0).sqrt();
    let smin = vals.first().unwrap().max(0.0).sqrt();
    let cond = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if cond > 1e14 {
        return Err(Error::NonUniqueness { cond });
    }
    let lu = projected.clone().lu();
    let c = lu
        .solve(&rhs)
        .ok_or(Error::NonUniqueness { cond })?;
    let residual = (&projected * &c - &rhs).norm();
    if residual > 1e-10 * g.norm().max(1e-300) {
        return Err(Error::NonUniqueness { cond });
    }
    Ok(q * c)
}

/// Stability constant: the smallest singular value of QᵀAQ, which equals the
/// minimum of ||P_N A φ|| over unit φ in the span of Q.
pub fn stability_constant(a: &DMatrix<f64>, q: &DMatrix<f64>) -> f64 {
    matrix_sigma_min(&(q.transpose() * a * q))
}

fn rayleigh(a: &DMatrix<f64>, v: &DVector<f64>) -> f64 {
    v.dot(&(a * v)) / v.norm_squared()
}

/// Finds a unit vector whose Rayleigh quotient hits a real target strictly
/// inside the real section of W(A), for real A: bisect along the normalized
/// segment between the extreme eigenvectors of the symmetric part. The
/// Rayleigh path is real and continuous, so a sign change brackets the
/// target.
fn rayleigh_target_real(a: &DMatrix<f64>, z: f64, tol: f64) -> Result<DVector<f64>> {
    let sym = (a + a.transpose()) / 2.0;
    let (vals, vecs) = jacobi_sym(&sym);
    let n = a.nrows();
    let lo = vals[0];
    let hi = vals[n - 1];
    if !(lo + 1e-6 <= z && z <= hi - 1e-6) {
        return Err(Error::NotRepresentable(format!(
            "target {z} outside the real section [{lo}, {hi}] with margin"
        )));
    }
    let u = vecs.column(n - 1).clone_owned(); // Rayleigh hi
    let v = vecs.column(0).clone_owned(); // Rayleigh lo
    let psi_at = |t: f64| -> DVector<f64> {
        let w = &u * (1.0 - t) + &v * t;
        let nn = w.norm();
        &w / nn
    };
    let mut t_lo = 0.0; // rayleigh hi side (>= z)
    let mut t_hi = 1.0; // rayleigh lo side (<= z)
    let mut best = psi_at(0.0);
    for _ in 0..200 {
        let mid = (t_lo + t_hi) / 2.0;
        let psi = psi_at(mid);
        let r = rayleigh(a, &psi);
        best = psi;
        if (r - z).abs() <= tol {
            return Ok(best);
        }
        if r > z {
            t_lo = mid;
        } else {
            t_hi = mid;
        }
    }
    let r = rayleigh(a, &best);
    if (r - z).abs() <= tol {
        Ok(best)
    } else {
        Err(Error::NotRepresentable(format!(
            "bisection stalled at Rayleigh {r}, target {z}"
        )))
    }
}

/// Continuous-path search between two unit vectors with known Rayleigh
/// quotients p and q and a target z on the segment [p, q]: for each phase φ
/// the path ψ_t = normalize((1-t)u + t e^{iφ}v) is bisected in t where it
/// crosses the hyperplane through z transverse to the segment; the leftover
/// transverse offset δ(φ) is driven to zero by a phase sign-change bisection
/// or golden-section minimisation, with a dense 2-d zoom as fallback. Every
/// evaluation uses the precomputed 2x2 compression of A onto span{u, v}, so
/// the search is O(1) per point; z is attainable because the compression's
/// numerical range (a filled ellipse containing p and q) contains the
/// segment.
fn connect_path(
    a: &DMatrix<Complex64>,
    u: &DVector<Complex64>,
    p: Complex64,
    v: &DVector<Complex64>,
    q: Complex64,
    z: Complex64,
    tol: f64,
) -> Result<DVector<Complex64>> {
    let dir = (q - p) / (q - p).norm();
    let au = a * u;
    let av = a * v;
    let r_uu = u.dotc(&au);
    let r_uv = u.dotc(&av);
    let r_vu = v.dotc(&au);
    let r_vv = v.dotc(&av);
    let g = u.dotc(v);
    let rayleigh_2x2 = |t: f64, phi: f64| -> Complex64 {
        let w = Complex64::from_polar(1.0, phi);
        let (c1, c2) = (1.0 - t, t);
        let num = r_uu * (c1 * c1)
            + r_vv * (c2 * c2)
            + (w * r_uv + w.conj() * r_vu) * (c1 * c2);
        let den = c1 * c1 + c2 * c2 + 2.0 * c1 * c2 * (w * g).re;
        num / den
    };
    // s = along-segment coordinate, delta = transverse offset
    let coords = |t: f64, phi: f64| -> (f64, f64) {
        let r = (rayleigh_2x2(t, phi) - z) * dir.conj();
        (r.re, r.im)
    };
    let cross_t = |phi: f64| -> (f64, f64) {
        let mut t_lo = 0.0;
        let mut t_hi = 1.0;
        for _ in 0..90 {
            let mid = (t_lo + t_hi) / 2.0;
            if coords(mid, phi).0 < 0.0 {
                t_lo = mid;
            } else {
                t_hi = mid;
            }
        }
        let t = (t_lo + t_hi) / 2.0;
        (coords(t, phi).1, t)
    };
    let grid = 64;
    let mut best: (f64, f64, f64) = (f64::INFINITY, 0.0, 0.0); // |delta|, t, phi
    let consider = |phi: f64, best: &mut (f64, f64, f64)| {
        let (d, t) = cross_t(phi);
        if d.abs() < best.0 {
            *best = (d.abs(), t, phi);
        }
        d
    };
    let mut prev: Option<(f64, f64)> = None;
    let mut samples = Vec::with_capacity(grid + 1);
    for i in 0..=grid {
        let phi = 2.0 * std::f64::consts::PI * i as f64 / grid as f64;
        let d = consider(phi, &mut best);
        samples.push((phi, d));
        if let Some((phi0, d0)) = prev {
            if d0 * d <= 0.0 && (d0 != 0.0 || d != 0.0) {
                let (mut a0, mut a1, mut da0) = (phi0, phi, d0);
                for _ in 0..80 {
                    let mid = (a0 + a1) / 2.0;
                    let dm = consider(mid, &mut best);
                    if da0 * dm <= 0.0 {
                        a1 = mid;
                    } else {
                        a0 = mid;
                        da0 = dm;
                    }
                }
            }
        }
        prev = Some((phi, d));
    }
    if best.0 > tol / 2.0 {
        // no sign change: golden-section on |delta| around the grid argmin
        let step = 2.0 * std::f64::consts::PI / grid as f64;
        let (mut lo, mut hi) = (best.2 - step, best.2 + step);
        for _ in 0..90 {
            let m1 = lo + 0.381_966 * (hi - lo);
            let m2 = hi - 0.381_966 * (hi - lo);
            let d1 = consider(m1, &mut best).abs();
            let d2 = consider(m2, &mut best).abs();
            if d1 < d2 {
                hi = m2;
            } else {
                lo = m1;
            }
        }
    }
    if best.0 > tol / 2.0 {
        // dense zoom on |R(t,phi) - z| over the whole parameter rectangle
        let mut center = (0.5, std::f64::consts::PI);
        let mut half = (0.5, std::f64::consts::PI);
        for _ in 0..60 {
            let mut local: (f64, f64, f64) = (f64::INFINITY, 0.0, 0.0);
            for i in 0..=16 {
                for jj in 0..=16 {
                    let t = (center.0 - half.0 + half.0 * i as f64 / 8.0).clamp(0.0, 1.0);
                    let phi = center.1 - half.1 + half.1 * jj as f64 / 8.0;
                    let miss = (rayleigh_2x2(t, phi) - z).norm();
                    if miss < local.0 {
                        local = (miss, t, phi);
                    }
                }
            }
            center = (local.1, local.2);
            half = (half.0 * 0.6, half.1 * 0.6);
            if local.0 < best.0 {
                best = local;
            }
        }
    }
    let (_, t, phi) = best;
    let w = u * Complex64::new(1.0 - t, 0.0) + v * (Complex64::from_polar(1.0, phi) * t);
    let nn = w.norm();
    if nn < 1e-12 {
        return Err(Error::NotRepresentable("degenerate path vector".into()));
    }
    let psi = w / Complex64::new(nn, 0.0);
    let r = psi.dotc(&(a * &psi));
    if (r - z).norm() <= tol {
        Ok(psi)
    } else {
        Err(Error::NotRepresentable(format!(
            "path search reached {r}, target {z}"
        )))
    }
}

/// Unit vector ψ with |ψ*Aψ − z| ≤ tol for z strictly inside the numerical
/// range of A. Real matrices with real targets resolve through the real
/// bisection directly (the real section certifies membership); other cases
/// build the numerical range approximation on `angles` directions first.
pub fn rayleigh_target_vector(
    a: &DMatrix<Complex64>,
    z: Complex64,
    tol: f64,
    angles: usize,
) -> Result<DVector<Complex64>> {
    let is_real = a.iter().all(|c| c.im == 0.0);
    if is_real && z.im.abs() <= 1e-12 {
        let ar = a.map(|c| c.re);
        let psi = rayleigh_target_real(&ar, z.re, tol)?;
        return Ok(psi.map(|x| Complex64::new(x, 0.0)));
    }
    let nr = numerical_range(a, angles)?;
    rayleigh_target_with_range(a, &nr, z, tol)
}

pub fn rayleigh_target_with_range(
    a: &DMatrix<Complex64>,
    nr: &NumericalRangeApprox,
    z: Complex64,
    tol: f64,
) -> Result<DVector<Complex64>> {
    // a vertex target: return the extreme eigenvector itself
    for (k, b) in nr.boundary_points.iter().enumerate() {
        if (b - z).norm() <= tol {
            let h = crate::matrixanalysis::hermitian_part(a, nr.angles[k]);
            let (_, vecs) = crate::matrixanalysis::eigs_hermitian(&h)?;
            return Ok(vecs.column(vecs.ncols() - 1).clone_owned());
        }
    }
    if !nr.inner_contains(z, 1e-9) {
        return Err(Error::NotRepresentable(format!(
            "target {z} not strictly inside the inner hull"
        )));
    }
    let is_real_matrix = a.iter().all(|c| c.im == 0.0);
    if is_real_matrix && z.im.abs() <= 1e-12 {
        let ar = a.map(|c| c.re);
        let psi = rayleigh_target_real(&ar, z.re, tol)?;
        return Ok(psi.map(|x| Complex64::new(x, 0.0)));
    }
    // general path: fan triangle of hull vertices containing z, then two
    // chord searches (smallest-index fan triangle wins)
    let h = &nr.inner_hull;
    let eigvec_of = |point: Complex64| -> Result<(DVector<Complex64>, Complex64)> {
        for (k, b) in nr.boundary_points.iter().enumerate() {
            if (b - point).norm() <= 1e-12 {
                let hm = crate::matrixanalysis::hermitian_part(a, nr.angles[k]);
                let (_, vecs) = crate::matrixanalysis::eigs_hermitian(&hm)?;
                let v = vecs.column(vecs.ncols() - 1).clone_owned();
                return Ok((v, *b));
            }
        }
        Err(Error::NotRepresentable(
            "hull vertex lost its boundary point".into(),
        ))
    };
    let scale = h.iter().map(|p| p.norm()).fold(1.0, f64::max);
    for i in 1..h.len().saturating_sub(1) {
        let (p0, p1, p2) = (h[0], h[i], h[i + 1]);
        let area = ((p1 - p0).re * (p2 - p0).im - (p1 - p0).im * (p2 - p0).re).abs();
        if area < 1e-10 * scale * scale || !point_in_triangle(z, p0, p1, p2, 1e-12) {
            continue;
        }
        let Some(w) = ray_segment_intersection(p0, z, p1, p2) else {
            continue;
        };
        let (u1, r1) = eigvec_of(p1)?;
        let (u2, r2) = eigvec_of(p2)?;
        let stage_tol = (tol / 10.0).max(1e-12);
        let Ok(psi_w) = connect_path(a, &u1, r1, &u2, r2, w, stage_tol) else {
            continue;
        };
        let rw = psi_w.dotc(&(a * &psi_w)) / Complex64::new(psi_w.norm_squared(), 0.0);
        let (u0, r0) = eigvec_of(p0)?;
        if let Ok(psi) = connect_path(a, &u0, r0, &psi_w, rw, z, tol) {
            return Ok(psi);
        }
    }
    Err(Error::NotRepresentable(
        "no fan triangle of the inner hull reached the target".into(),
    ))
}

fn point_in_triangle(z: Complex64, a: Complex64, b: Complex64, c: Complex64, tol: f64) -> bool {
    let cross = |p: Complex64, q: Complex64, r: Complex64| {
        (q.re - p.re) * (r.im - p.im) - (q.im - p.im) * (r.re - p.re)
    };
    let d1 = cross(a, b, z);
    let d2 = cross(b, c, z);
    let d3 = cross(c, a, z);
    (d1 >= -tol && d2 >= -tol && d3 >= -tol) || (d1 <= tol && d2 <= tol && d3 <= tol)
}

fn ray_segment_intersection(
    origin: Complex64,
    through: Complex64,
    a: Complex64,
    b: Complex64,
) -> Option<Complex64> {
    let d = through - origin;
    let e = b - a;
    let denom = d.re * e.im - d.im * e.re;
    if denom.abs() < 1e-15 {
        return None;
    }
    let f = a - origin;
    let t = (f.re * e.im - f.im * e.re) / denom;
    let s = (d.re * f.im - d.im * f.re) / -denom;
    if t > 0.0 && (-1e-12..=1.0 + 1e-12).contains(&s) {
        Some(a + e * s)
    } else {
        None
    }
}

/// Parameters of the adversarial construction.
#[derive(Debug, Clone, Copy)]
pub struct AdversarialConfig {
    pub band_width: usize,
    pub shift: usize,
    pub count: usize,
    /// target tolerance for the near-null Rayleigh vector
    pub rayleigh_tol: f64,
}

/// Output of the adversarial construction.
#[derive(Debug, Clone)]
pub struct AdversarialOutcome {
    pub sequence: SubspaceSequence,
    pub report: StabilityReport,
    /// measured Rayleigh quotients of the shifted vectors
    pub rayleigh_values: Vec<f64>,
    /// the shifted near-null vectors themselves
    pub shifted_vectors: Vec<DVector<f64>>,
}

/// Builds the adversarial sandwiched sequence for a real matrix A whose
/// central-band compression has 0 inside its numerical range: a near-null
/// Rayleigh vector ψ on the band is shifted by even multiples of `shift`
/// (respecting the 2-periodic Toeplitz sign structure of the sawtooth
/// matrices), W_n = span{φ_1..φ_n}, and H_N = H*_N + W_{n_N} with n_N =
/// min(N, count). Reports c_N, errors on a reference right-hand side, and
/// the sandwich index M_N per stage.
pub fn adversarial_sequence(
    a: &DMatrix<f64>,
    base: &SubspaceSequence,
    config: AdversarialConfig,
) -> Result<AdversarialOutcome> {
    let dim = a.nrows();
    if base.ambient_dim != dim {
        return Err(Error::InvalidParameter(
            "base sequence ambient dimension does not match the matrix".into(),
        ));
    }
    base.validate()?;
    if config.shift % 2 != 0 {
        return Err(Error::InvalidParameter(
            "shift must be even to respect the sawtooth 2-periodicity".into(),
        ));
    }
    let ladder = (config.count - 1) * config.shift + config.band_width;
    if ladder > dim {
        return Err(Error::InvalidParameter(format!(
            "band ladder ({ladder}) exceeds the ambient dimension ({dim})"
        )));
    }
    // center the whole ladder, keeping the start even
    let start = ((dim - ladder) / 2) & !1usize;
    let band = a.view((start, start), (config.band_width, config.band_width)).into_owned();
    // the compression must have 0 strictly inside its range
    let nr = numerical_range(&to_complex(&band), 360)?;
    if !nr.inner_contains(Complex64::new(0.0, 0.0), 1e-9) {
        return Err(Error::NotRepresentable(
            "band compression does not contain 0 in its numerical range".into(),
        ));
    }
    let psi_band = rayleigh_target_real(&band, 0.0, config.rayleigh_tol)?;

    let mut shifted = Vec::with_capacity(config.count);
    let mut rayleighs = Vec::with_capacity(config.count);
    for m in 0..config.count {
        let offset = start + m * config.shift;
        let mut phi = DVector::<f64>::zeros(dim);
        phi.rows_mut(offset, config.band_width).copy_from(&psi_band);
        rayleighs.push(phi.dot(&(a * &phi)));
        shifted.push(phi);
    }

    let stages = base.bases.len().min(config.count);
    let mut bases = Vec::with_capacity(stages);
    let mut m_ns = Vec::with_capacity(stages);
    let mut rows = Vec::with_capacity(stages);
    // reference problem: right-hand side with known solution
    let u_ref = DVector::<f64>::from_element(dim, 1.0 / (dim as f64).sqrt());
    let g = a * &u_ref;
    for stage in 0..stages {
        let n_n = stage + 1;
        let base_q = &base.bases[stage];
        let mut cols: Vec<DVector<f64>> = (0..base_q.ncols())
            .map(|c| base_q.column(c).clone_owned())
            .collect();
        // orthonormalize the shifted vectors against the base prefix
        for phi in shifted.iter().take(n_n) {
            let mut w = phi.clone();
            for b in &cols {
                let proj = b.dot(&w);
                w -= b * proj;
            }
            let nn = w.norm();
            if nn > 1e-10 {
                cols.push(w / nn);
            }
        }
        let mut q = DMatrix::<f64>::zeros(dim, cols.len());
        for (c, col) in cols.iter().enumerate() {
            q.set_column(c, col);
        }
        let c_n = stability_constant(a, &q);
        let (err, best_err) = match galerkin_solve(a, &q, &g) {
            Ok(phi_n) => {
                let best = (&u_ref - &q * (q.transpose() * &u_ref)).norm();
                ((&phi_n - &u_ref).norm(), best)
            }
            Err(_) => (f64::NAN, (&u_ref - &q * (q.transpose() * &u_ref)).norm()),
        };
        // sandwich index: smallest base stage whose span contains H_N
        let max_support = start + (n_n - 1) * config.shift + config.band_width;
        let m_n = base
            .bases
            .iter()
            .position(|b| b.ncols() >= max_support && b.ncols() >= q.ncols())
            .map(|i| i + 1)
            .ok_or_else(|| {
                Error::NotRepresentable(
                    "base sequence does not reach the shifted supports".into(),
                )
            })?;
        m_ns.push(m_n);
        rows.push(StabilityRow {
            n: stage + 1,
            dim: q.ncols(),
            c_n,
            err,
            best_err,
            m_n,
        });
        bases.push(q);
    }
    Ok(AdversarialOutcome {
        sequence: SubspaceSequence {
            ambient_dim: dim,
            bases,
            m_ns: Some(m_ns),
        },
        report: StabilityReport { rows },
        rayleigh_values: rayleighs,
        shifted_vectors: shifted,
    })
}

/// Stability report of a plain subspace sequence on a reference problem,
/// for contrast with the adversarial run.
pub fn stability_report(
    a: &DMatrix<f64>,
    seq: &SubspaceSequence,
    g: &DVector<f64>,
) -> Result<StabilityReport> {
    seq.validate()?;
    let lu = a.clone().lu();
    let exact = lu
        .solve(g)
        .ok_or(Error::NonUniqueness { cond: f64::INFINITY })?;
    let mut rows = Vec::new();
    for (i, q) in seq.bases.iter().enumerate() {
        let c_n = stability_constant(a, q);
        let best_err = (&exact - q * (q.transpose() * &exact)).norm();
        let err = match galerkin_solve(a, q, g) {
            Ok(phi_n) => (&phi_n - &exact).norm(),
            Err(_) => f64::NAN,
        };
        rows.push(StabilityRow {
            n: i + 1,
            dim: q.ncols(),
            c_n,
            err,
            best_err,
            m_n: i + 1,
        });
    }
    Ok(StabilityReport { rows })
}
