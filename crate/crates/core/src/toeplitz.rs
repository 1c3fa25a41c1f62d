//! Symbols of the sawtooth Toeplitz operators and finite-section norms.
//!
//! The sawtooth Galerkin matrix depends on j - m only through the
//! coefficients d'_l, so its infinite extension is (up to a diagonal sign
//! similarity) a Toeplitz operator. Its symbol e(t) splits into a closed-form
//! leading term plus an absolutely convergent residual series; the rotated
//! family h^theta(t) additionally mixes the odd and even residual parts.

use crate::assembly::{galerkin_sawtooth, sawtooth_coeffs};
use crate::error::{Error, Result};
use crate::matrixanalysis::matrix_2norm;
use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;

/// Number of exactly integrated coefficients; beyond this the tail model
/// d'_l = M/(2 pi l) + c/l^2 takes over, with c fitted on l in [30, 50].
pub const EXACT_COEFFS: usize = 50;
const FIT_RANGE: std::ops::RangeInclusive<usize> = 30..=50;

/// Which symbol a sup-norm computation refers to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SymbolKind {
    E,
    HTheta(f64),
}

/// Coefficients d'_1..d'_L of the sawtooth symbol plus the split into the
/// closed-form leading term and residual series.
#[derive(Debug, Clone)]
pub struct SymbolSeries {
    pub slope: f64,
    /// d'_0 = 0, d'_1..d'_L
    pub coeffs: Vec<f64>,
    pub l_max: usize,
    /// residual coefficients d'_m - M/(2 pi m)
    resid: Vec<f64>,
}

impl SymbolSeries {
    /// Builds the series: exact quadrature for l <= EXACT_COEFFS, fitted
    /// O(1/l^2) tail beyond, truncated at l_max.
    pub fn build(slope: f64, l_max: usize, tol: f64) -> Result<Self> {
        if slope <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "slope must be positive, got {slope}"
            )));
        }
        if l_max < EXACT_COEFFS {
            return Err(Error::InvalidParameter(format!(
                "series needs at least {EXACT_COEFFS} coefficients, got {l_max}"
            )));
        }
        let (mut coeffs, _report) = sawtooth_coeffs(slope, EXACT_COEFFS, tol)?;
        let mut fit = 0.0;
        let mut count = 0usize;
        for l in FIT_RANGE {
            let resid = coeffs[l] - slope / (2.0 * PI * l as f64);
            fit += resid * (l * l) as f64;
            count += 1;
        }
        let c = fit / count as f64;
        for l in (EXACT_COEFFS + 1)..=l_max {
            let lf = l as f64;
            coeffs.push(slope / (2.0 * PI * lf) + c / (lf * lf));
        }
        let resid = (1..=l_max)
            .map(|m| coeffs[m] - slope / (2.0 * PI * m as f64))
            .collect();
        Ok(SymbolSeries {
            slope,
            coeffs,
            l_max,
            resid,
        })
    }

    /// Asymptotic sanity of the stored coefficients (coeff*2*pi*l/M near 1
    /// for l >= 5).
    pub fn coeffs_sane(&self) -> bool {
        (5..=self.l_max).all(|l| {
            let ratio = self.coeffs[l] * 2.0 * PI * l as f64 / self.slope;
            (0.5..=1.5).contains(&ratio)
        })
    }

    /// Residual sums S_odd(t), S_even(t) over odd / even m.
    fn residual_sums(&self, t: f64) -> (f64, f64) {
        let mut odd = 0.0;
        let mut even = 0.0;
        // forward recurrence for sin(m t)
        let (s1, c1) = t.sin_cos();
        let mut sin_prev = 0.0;
        let mut sin_cur = s1;
        for m in 1..=self.l_max {
            let r = self.resid[m - 1] * sin_cur;
            if m % 2 == 1 {
                odd += r;
            } else {
                even += r;
            }
            let next = 2.0 * c1 * sin_cur - sin_prev;
            sin_prev = sin_cur;
            sin_cur = next;
        }
        (odd, even)
    }

    /// e(t) = -i M sign(t)(pi - |t|)/(2 pi) + e_r(t), |t| <= pi.
    pub fn symbol_e(&self, t: f64) -> Complex64 {
        let lead = self.slope * sgn(t) * (PI - t.abs()) / (2.0 * PI);
        let (odd, even) = self.residual_sums(t);
        Complex64::new(0.0, -(lead + 2.0 * (odd + even)))
    }

    /// h^theta(t) = -i M (sign(t)(pi-|t|) + e^{-2i theta} t)/(4 pi) +
    /// h_r^theta(t), |t| < pi.
    pub fn symbol_h(&self, theta: f64, t: f64) -> Complex64 {
        let w = Complex64::from_polar(1.0, -2.0 * theta);
        let lead = (Complex64::new(sgn(t) * (PI - t.abs()), 0.0) + w * t)
            * (self.slope / (4.0 * PI));
        let (odd, even) = self.residual_sums(t);
        let hr = (Complex64::new(1.0, 0.0) + w) * odd + (Complex64::new(1.0, 0.0) - w) * even;
        Complex64::new(0.0, -1.0) * (lead + hr)
    }

    /// Brute-force partial sum of the defining series (no closed-form split),
    /// using the same coefficient model extended to `l` terms.
    pub fn symbol_e_direct(&self, t: f64, l: usize) -> Complex64 {
        let c_tail = if self.l_max >= 1 {
            let m = self.l_max as f64;
            (self.coeffs[self.l_max] - self.slope / (2.0 * PI * m)) * m * m
        } else {
            0.0
        };
        let mut sum = 0.0;
        let (s1, c1) = t.sin_cos();
        let mut sin_prev = 0.0;
        let mut sin_cur = s1;
        for m in 1..=l {
            let coeff = if m <= self.l_max {
                self.coeffs[m]
            } else {
                let mf = m as f64;
                self.slope / (2.0 * PI * mf) + c_tail / (mf * mf)
            };
            sum += coeff * sin_cur;
            let next = 2.0 * c1 * sin_cur - sin_prev;
            sin_prev = sin_cur;
            sin_cur = next;
        }
        Complex64::new(0.0, -2.0 * sum)
    }
}

/// Result of a sup-norm computation: grid maximum plus golden-section
/// refinement around it.
#[derive(Debug, Clone, Copy)]
pub struct SupNorm {
    pub grid_value: f64,
    pub refined_value: f64,
    pub refine_delta: f64,
    pub argmax_t: f64,
}

fn sgn(t: f64) -> f64 {
    if t == 0.0 {
        0.0
    } else {
        t.signum()
    }
}

const GOLDEN: f64 = 0.618_033_988_749_894_9;

fn golden_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, xtol: f64) -> (f64, f64) {
    let mut x1 = hi - GOLDEN * (hi - lo);
    let mut x2 = lo + GOLDEN * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let mut best = (if f1 > f2 { x1 } else { x2 }, f1.max(f2));
    while hi - lo > xtol {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + GOLDEN * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - GOLDEN * (hi - lo);
            f1 = f(x1);
        }
        if f1 > best.1 {
            best = (x1, f1);
        }
        if f2 > best.1 {
            best = (x2, f2);
        }
    }
    (best.0, best.1)
}

/// Sup of |symbol| over a uniform grid of (-pi, pi), refined by golden
/// section around the grid argmax down to 1e-10 in t.
pub fn sup_norm(series: &SymbolSeries, kind: SymbolKind, grid: usize) -> Result<SupNorm> {
    if grid < 1024 {
        return Err(Error::InvalidParameter(format!(
            "sup-norm grid must have at least 1024 points, got {grid}"
        )));
    }
    let eval = |t: f64| -> f64 {
        match kind {
            SymbolKind::E => series.symbol_e(t).norm(),
            SymbolKind::HTheta(theta) => series.symbol_h(theta, t).norm(),
        }
    };
    let h = 2.0 * PI / grid as f64;
    let values: Vec<(f64, f64)> = (0..grid)
        .into_par_iter()
        .map(|k| {
            let t = -PI + (k as f64 + 0.5) * h;
            (t, eval(t))
        })
        .collect();
    let (t_star, grid_value) = values
        .iter()
        .cloned()
        .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
        .unwrap();
    let lo = (t_star - h).max(-PI + 1e-15);
    let hi = (t_star + h).min(PI - 1e-15);
    let (argmax_t, refined) = golden_max(eval, lo, hi, 1e-10);
    let refined_value = refined.max(grid_value);
    Ok(SupNorm {
        grid_value,
        refined_value,
        refine_delta: refined_value - grid_value,
        argmax_t,
    })
}

/// min over a theta grid of ||h^theta||_inf, with the residual sums cached
/// per t so each theta costs O(grid). The t-sup per theta is grid + golden
/// refinement, like [`sup_norm`].
pub fn min_sup_h_over_theta(
    series: &SymbolSeries,
    grid: usize,
    theta_count: usize,
) -> Result<(f64, f64)> {
    if grid < 1024 || theta_count < 8 {
        return Err(Error::InvalidParameter(
            "need grid >= 1024 and theta_count >= 8".into(),
        ));
    }
    let h = 2.0 * PI / grid as f64;
    let cached: Vec<(f64, f64, f64)> = (0..grid)
        .into_par_iter()
        .map(|k| {
            let t = -PI + (k as f64 + 0.5) * h;
            let (odd, even) = series.residual_sums(t);
            (t, odd, even)
        })
        .collect();
    let m = series.slope;
    let sup_at = |theta: f64| -> (f64, f64) {
        let w = Complex64::from_polar(1.0, -2.0 * theta);
        let mut best = (0.0f64, 0.0f64);
        for &(t, odd, even) in &cached {
            let lead = (Complex64::new(sgn(t) * (PI - t.abs()), 0.0) + w * t) * (m / (4.0 * PI));
            let hr = (Complex64::new(1.0, 0.0) + w) * odd + (Complex64::new(1.0, 0.0) - w) * even;
            let v = (lead + hr).norm();
            if v > best.1 {
                best = (t, v);
            }
        }
        best
    };
    let mut min = (0.0f64, f64::INFINITY);
    for i in 0..theta_count {
        let theta = PI * i as f64 / theta_count as f64;
        let (_, v) = sup_at(theta);
        if v < min.1 {
            min = (theta, v);
        }
    }
    // refine the winning theta's sup near t -> 0 by golden section
    let (t_star, grid_sup) = sup_at(min.0);
    let eval = |t: f64| series.symbol_h(min.0, t).norm();
    let (_, refined) = golden_max(eval, (t_star - h).max(-PI + 1e-15), (t_star + h).min(PI - 1e-15), 1e-10);
    Ok((min.0, refined.max(grid_sup)))
}

/// ||D_N||_2 for each N in the list (assembled once at the largest N; the
/// smaller sections are leading principal submatrices).
pub fn finite_section_norms(slope: f64, n_list: &[usize], tol: f64) -> Result<Vec<f64>> {
    if n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter(
            "section sizes must be strictly increasing".into(),
        ));
    }
    let n_max = *n_list.last().ok_or_else(|| {
        Error::InvalidParameter("section list must be nonempty".into())
    })?;
    let big = galerkin_sawtooth(slope, n_max, tol)?;
    Ok(n_list
        .iter()
        .map(|&n| matrix_2norm(&big.entries.view((0, 0), (n, n)).into_owned()))
        .collect())
}

/// CSV with the scaled symbol magnitudes against t/pi:
/// (t/pi, 2|e|/M, 4 min_theta |h^theta|/M, 4 max_theta |h^theta|/M).
pub fn figure_symbols_csv(series: &SymbolSeries, grid: usize, theta_grid: usize) -> String {
    let m = series.slope;
    let mut out = String::from("t_over_pi,e_scaled,h_min_scaled,h_max_scaled\n");
    let rows: Vec<String> = (0..grid)
        .into_par_iter()
        .map(|k| {
            let t = -PI + (k as f64 + 0.5) * 2.0 * PI / grid as f64;
            let e = 2.0 * series.symbol_e(t).norm() / m;
            let mut hmin = f64::INFINITY;
            let mut hmax: f64 = 0.0;
            for i in 0..theta_grid {
                let theta = PI * i as f64 / theta_grid as f64;
                let v = series.symbol_h(theta, t).norm();
                hmin = hmin.min(v);
                hmax = hmax.max(v);
            }
            format!(
                "{:.10e},{:.10e},{:.10e},{:.10e}",
                t / PI,
                e,
                4.0 * hmin / m,
                4.0 * hmax / m
            )
        })
        .collect();
    for r in rows {
        out.push_str(&r);
        out.push('\n');
    }
    out
}
