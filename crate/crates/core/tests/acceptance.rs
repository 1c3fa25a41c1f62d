//! Acceptance suite: the quantitative exit criteria of the laboratory, one
//! test per criterion, printing one pass/fail line each.
//!
//! Known red criteria (measured limits of the constructions themselves, see
//! the failing assertion messages): the a(beta) = 1/2 crossing sits at
//! beta* = 0.66942, |2d'_1 - 1| at M = 50 is 0.0541, ||D_200|| at M = 4 is
//! 1.8975, and the strip corrections at a = 4 exceed 2% for l >= 2. Each
//! failing assertion carries the measured value.

use dlplab::assembly::{
    b_matrix, bn_sign, d_coeffs_gammabeta, d_coeffs_segments, d_coeffs_strip, galerkin_openbook,
    galerkin_pages, galerkin_sawtooth, galerkin_segments, sawtooth_coeffs, GeometryTag,
};
use dlplab::galerkin_lab::{
    adversarial_sequence, galerkin_solve, AdversarialConfig, SubspaceSequence,
};
use dlplab::geometry2d::{gamma_beta_segment, sawtooth, Segment2D};
use dlplab::geometry3d::{open_book, Face3D};
use dlplab::kernels::{angle_subtended, dlp_kernel_2d, dlp_kernel_3d, solid_angle_polygon, Point3};
use dlplab::matrixanalysis::{
    a_of_beta, disc_inclusion_radius, matrix_2norm, numerical_abscissa, numerical_range_real,
    spec_bn, to_complex,
};
use dlplab::quadrature::{Grading, QuadRule};
use dlplab::toeplitz::{
    finite_section_norms, min_sup_h_over_theta, sup_norm, SymbolKind, SymbolSeries,
};
use dlplab::weighted::weighted_lower_bound;
use nalgebra::{DMatrix, DVector};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::time::Instant;

/// Floating-point guard for acceptance windows whose edge is the exact
/// mathematical value attained only in a limit (the symbol sups reach M/2
/// and M/4 as t -> 0; any finite evaluation sits an ulp-scale amount below).
const EDGE_GUARD: f64 = 1e-9;

struct Criterion {
    name: &'static str,
    failures: Vec<String>,
    start: Instant,
    budget: f64,
}

impl Criterion {
    fn new(name: &'static str, budget_secs: f64) -> Self {
        Criterion {
            name,
            failures: Vec::new(),
            start: Instant::now(),
            budget: budget_secs,
        }
    }

    fn check(&mut self, ok: bool, detail: String) {
        if !ok {
            self.failures.push(detail);
        }
    }

    fn finish(mut self) {
        let elapsed = self.start.elapsed().as_secs_f64();
        self.check(
            elapsed < self.budget,
            format!("runtime {elapsed:.1}s exceeds budget {}s", self.budget),
        );
        if self.failures.is_empty() {
            println!("{}: PASS ({elapsed:.1}s)", self.name);
        } else {
            println!(
                "{}: FAIL ({elapsed:.1}s) - {}",
                self.name,
                self.failures.join("; ")
            );
            panic!("{}: {}", self.name, self.failures.join("; "));
        }
    }
}

#[test]
fn criterion_1_bn_facts() {
    let mut c = Criterion::new("criterion 1 (B_N facts)", 1.0);
    for n in 2..=12 {
        let s = spec_bn(n).unwrap();
        c.check(
            s.char_poly_deviation <= 1e-10,
            format!("char poly deviation {:.2e} at N={n}", s.char_poly_deviation),
        );
        let expect: &[f64] = if n % 2 == 0 {
            &[-1.0, 1.0]
        } else {
            &[-1.0, 0.0, 1.0]
        };
        c.check(s.eigenvalues == expect, format!("spectrum mismatch at N={n}"));
    }
    let w3 = numerical_abscissa(&to_complex(&b_matrix(3).entries), 0.0).unwrap();
    c.check(
        (w3 - 2.0f64.sqrt()).abs() <= 1e-10,
        format!("w_r(B_3) = {w3}, expected sqrt(2)"),
    );
    let b7 = to_complex(&b_matrix(7).entries);
    let mut min_w = f64::INFINITY;
    for k in 0..720 {
        let theta = 2.0 * PI * k as f64 / 720.0;
        min_w = min_w.min(numerical_abscissa(&b7, theta).unwrap());
    }
    c.check(
        min_w >= 3.0f64.sqrt() - 1e-6,
        format!("min w_r(e^it B_7) = {min_w}, expected >= sqrt(3) - 1e-6"),
    );
    c.finish();
}

#[test]
fn criterion_2_figure4_reproduction() {
    let mut c = Criterion::new("criterion 2 (a(beta) curve)", 30.0);
    let tol = 1e-8;
    let a_at = |beta: f64| -> f64 {
        a_of_beta(&d_coeffs_gammabeta(beta, 3, tol).unwrap().values).unwrap()
    };
    let grid = [0.5, 0.6, 0.7, 0.75, 0.8, 0.85, 0.9, 0.95, 0.99, 0.999];
    let values: Vec<f64> = grid.iter().map(|&b| a_at(b)).collect();
    for w in values.windows(2) {
        c.check(w[0] < w[1], format!("a not increasing: {} -> {}", w[0], w[1]));
    }
    let a_last = *values.last().unwrap();
    c.check(
        (0.70..=0.7071).contains(&a_last),
        format!("a(0.999) = {a_last}, expected in [0.70, 0.7071]"),
    );
    // bisection crossing of a = 1/2
    let (mut lo, mut hi) = (0.5, 0.999);
    let mut f_lo = a_at(lo) - 0.5;
    for _ in 0..25 {
        let mid = (lo + hi) / 2.0;
        let f_mid = a_at(mid) - 0.5;
        if f_lo * f_mid <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
            f_lo = f_mid;
        }
    }
    let beta_star = (lo + hi) / 2.0;
    c.check(
        (beta_star - 0.7903).abs() <= 0.005,
        format!("crossing beta* = {beta_star:.5}, stated 0.7903 +- 0.005"),
    );
    c.finish();
}

#[test]
fn criterion_3_sawtooth_limits() {
    let mut c = Criterion::new("criterion 3 (sawtooth limits)", 120.0);
    let tol = 1e-9;
    let (c50, _) = sawtooth_coeffs(50.0, 1, tol).unwrap();
    let dev = (2.0 * c50[1] - 1.0).abs();
    c.check(
        dev <= 0.05,
        format!("|2d'_1 - 1| = {dev:.4} at M = 50, stated <= 0.05"),
    );
    for m in [1.0, 2.0, 4.0] {
        let (coeffs, _) = sawtooth_coeffs(m, 50, tol).unwrap();
        for l in 30..=50 {
            let ratio = coeffs[l] * 2.0 * PI * l as f64 / m;
            c.check(
                (0.9..=1.1).contains(&ratio),
                format!("asymptotic ratio {ratio:.3} at M={m}, l={l}"),
            );
        }
        let series = SymbolSeries::build(m, 2000, tol).unwrap();
        let sup = sup_norm(&series, SymbolKind::E, 8192).unwrap().refined_value;
        let norm = finite_section_norms(m, &[200], 1e-8).unwrap()[0];
        c.check(
            norm >= m / 2.0 - 0.05,
            format!("||D_200|| = {norm:.4} at M={m}, stated >= {}", m / 2.0 - 0.05),
        );
        c.check(
            norm <= sup + 1e-6,
            format!("||D_200|| = {norm:.6} exceeds ||e||_inf = {sup:.6} at M={m}"),
        );
    }
    c.finish();
}

#[test]
fn criterion_4_symbol_conjectures() {
    let mut c = Criterion::new("criterion 4 (symbol sups)", 60.0);
    for m in [1.0, 2.0, 4.0] {
        let series = SymbolSeries::build(m, 2000, 1e-9).unwrap();
        let sup = sup_norm(&series, SymbolKind::E, 8192).unwrap().refined_value;
        let scaled = 2.0 * sup / m;
        c.check(
            (1.0 - EDGE_GUARD..=1.02).contains(&scaled),
            format!("2||e||/M = {scaled:.10} at M={m}, window [1.0, 1.02]"),
        );
    }
    let series = SymbolSeries::build(2.0, 2000, 1e-9).unwrap();
    let (theta_min, h_min) = min_sup_h_over_theta(&series, 8192, 180).unwrap();
    let scaled = h_min / (2.0 / 4.0);
    c.check(
        (1.0 - EDGE_GUARD..=1.04).contains(&scaled),
        format!(
            "min_theta ||h||/(M/4) = {scaled:.10} at theta={theta_min:.3}, window [1.0, 1.04]"
        ),
    );
    c.finish();
}

#[test]
fn criterion_5_strip_sandwich() {
    let mut c = Criterion::new("criterion 5 (strip sandwich)", 60.0);
    let slope = 1.0;
    let (plain, _) = sawtooth_coeffs(slope, 5, 1e-9).unwrap();
    let mut strip4 = Vec::new();
    for a in [1.0, 2.0, 4.0] {
        let (strip, _) = d_coeffs_strip(slope, a, 5, 1e-8).unwrap();
        for l in 1..=5 {
            let upper = (1.0 + (1.0 + ((1 + l) as f64).powi(2) / (slope * slope)) / (4.0 * a * a))
                .sqrt()
                * plain[l];
            c.check(
                strip[l] >= plain[l] - 1e-6,
                format!("lower sandwich violated at a={a}, l={l}"),
            );
            c.check(
                strip[l] <= upper + 1e-6,
                format!("upper sandwich violated at a={a}, l={l}"),
            );
        }
        if a == 4.0 {
            strip4 = strip.clone();
        }
    }
    for l in 1..=5 {
        let rel = (strip4[l] - plain[l]).abs() / plain[l];
        c.check(
            rel <= 0.02,
            format!("|d'_({l},4) - d'_{l}| = {:.4}*d'_{l}, stated <= 0.02*d'_{l}", rel),
        );
    }
    c.finish();
}

#[test]
fn criterion_6_open_book() {
    let mut c = Criterion::new("criterion 6 (open book)", 300.0);
    let book = open_book(PI / 2.0, 4).unwrap();
    let worst_planarity = book
        .side_faces
        .iter()
        .map(|f| f.planarity_residual())
        .fold(0.0f64, f64::max);
    c.check(
        worst_planarity <= 1e-12,
        format!("planarity residual {worst_planarity:.2e}"),
    );
    c.check(
        (book.r1 - 0.99645).abs() <= 5e-5,
        format!("r1 = {:.7}, expected 0.99645 +- 5e-5", book.r1),
    );
    c.check(
        (book.r2 - 0.2505).abs() <= 5e-4,
        format!("r2 = {:.6}, expected 0.2505 +- 5e-4", book.r2),
    );
    let small = open_book(0.02, 3).unwrap();
    let g = galerkin_openbook(&small, 1e-6).unwrap();
    let n = g.n();
    let mut dev: f64 = 0.0;
    for j in 0..n {
        for m in 0..n {
            if j != m {
                dev = dev.max((2.0 * g.entries[(j, m)].abs() - 1.0).abs());
            }
        }
    }
    c.check(
        dev <= 0.1,
        format!("max |2d_jm - 1| = {dev:.4} at (0.02, 3), stated <= 0.1"),
    );
    let doubled = &g.entries * 2.0;
    let nr = numerical_range_real(&doubled, 720).unwrap();
    let radius = disc_inclusion_radius(&nr);
    c.check(
        radius >= 2.0f64.sqrt() - 0.15,
        format!("disc radius of 2D_5 = {radius:.4}, stated >= sqrt(2) - 0.15"),
    );
    c.finish();
}

#[test]
fn criterion_7_weighted_bound() {
    let mut c = Criterion::new("criterion 7 (weighted bound)", 120.0);
    let bound = weighted_lower_bound(0.01, 2, 360, 12).unwrap();
    c.check(
        (0.71..=0.76).contains(&bound.value),
        format!(
            "weighted lower bound = {:.4} at (0.01, 2), window [0.71, 0.76] (limit {})",
            bound.value, bound.limit
        ),
    );
    c.finish();
}

#[test]
fn criterion_8_galerkin_lab() {
    let mut c = Criterion::new("criterion 8 (Galerkin lab)", 120.0);
    // Cea bound for a coercive matrix on 20 random right-hand sides
    let n = 24;
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut r = DMatrix::<f64>::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
    r /= matrix_2norm(&r);
    let a = DMatrix::<f64>::identity(n, n) + r * 0.4;
    let a_norm = matrix_2norm(&a);
    let q = {
        let m = DMatrix::<f64>::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        m.qr().q().view((0, 0), (n, 8)).into_owned()
    };
    let mut violations = 0;
    for _ in 0..20 {
        let g = DVector::<f64>::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
        let exact = a.clone().lu().solve(&g).unwrap();
        let approx = galerkin_solve(&a, &q, &g).unwrap();
        let best = (&exact - &q * (q.transpose() * &exact)).norm();
        if (&approx - &exact).norm() > a_norm / 0.6 * best + 1e-10 {
            violations += 1;
        }
    }
    c.check(violations == 0, format!("{violations} Cea violations"));

    // adversarial sandwiched sequence on (1/2)I + D_200, M = 4
    let size = 200;
    let d = galerkin_sawtooth(4.0, size, 1e-8).unwrap();
    let a_big = DMatrix::<f64>::identity(size, size) * 0.5 + &d.entries;
    let dims: Vec<usize> = (1..=10).map(|k| 20 * k).collect();
    let base = SubspaceSequence::coordinate(size, &dims).unwrap();
    let outcome = adversarial_sequence(
        &a_big,
        &base,
        AdversarialConfig {
            band_width: 40,
            shift: 40,
            count: 4,
            rayleigh_tol: 1e-9,
        },
    )
    .unwrap();
    for (i, r) in outcome.rayleigh_values.iter().enumerate() {
        c.check(
            r.abs() <= 1e-3,
            format!("|<A phi_{}, phi_{}>| = {:.2e}, stated <= 1e-3", i + 1, i + 1, r.abs()),
        );
    }
    let final_c = outcome.report.rows.last().unwrap().c_n;
    c.check(
        final_c <= 0.1,
        format!("final stability constant {final_c:.4}, stated <= 0.1"),
    );
    // sandwich bookkeeping H*_N subset H_N subset H*_{M_N}, exactly
    for (stage, q_n) in outcome.sequence.bases.iter().enumerate() {
        let base_q = &base.bases[stage];
        let head = q_n.view((0, 0), (size, base_q.ncols()));
        c.check(
            (&head - base_q).abs().max() == 0.0,
            format!("base basis {} is not an exact prefix", stage + 1),
        );
        let m_n = outcome.sequence.m_ns.as_ref().unwrap()[stage];
        let big = &base.bases[m_n - 1];
        // every adversarial column must lie in span(base M_N): the residual
        // after projecting onto the coordinate span must vanish exactly
        let proj = big * (big.transpose() * q_n);
        c.check(
            (q_n - proj).abs().max() == 0.0,
            format!("H_{} escapes H*_{m_n}", stage + 1),
        );
    }
    c.finish();
}

#[test]
fn criterion_9_cross_validation() {
    let mut c = Criterion::new("criterion 9 (cross-validation)", 300.0);
    let mut rng = ChaCha8Rng::seed_from_u64(7);

    // 2-d: closed-form angle vs kernel quadrature, 1e-8
    for _ in 0..25 {
        let a = nalgebra::Vector2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let b = nalgebra::Vector2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        if (a - b).norm() < 1e-2 {
            continue;
        }
        let seg = Segment2D::new(a, b, 0).unwrap();
        let x = nalgebra::Vector2::new(rng.gen_range(-2.0..2.0), 2.0 + rng.gen_range(0.0..1.0));
        let alpha = angle_subtended(&seg, &x).unwrap();
        let rule = QuadRule::on_unit(Grading::Both, 10, 8, 16);
        let quad = rule.integrate(|t| dlp_kernel_2d(&x, &seg.point_at(t), &seg.normal).unwrap())
            * seg.length();
        c.check(
            (alpha - 2.0 * PI * quad.abs()).abs() <= 1e-8,
            format!("2-d angle vs quadrature mismatch {:.2e}", (alpha - 2.0 * PI * quad.abs()).abs()),
        );
    }

    // 3-d: solid angle vs kernel quadrature, 1e-6
    for _ in 0..10 {
        let quad_face = [
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(1.0 + rng.gen_range(0.0..0.5), rng.gen_range(-0.2..0.2), 0.0),
            Point3::new(1.0, 1.0 + rng.gen_range(0.0..0.5), 0.0),
            Point3::new(rng.gen_range(-0.2..0.2), 1.0, 0.0),
        ];
        let x = Point3::new(
            rng.gen_range(-0.5..1.5),
            rng.gen_range(-0.5..1.5),
            0.7 + rng.gen_range(0.0..1.0),
        );
        let omega = solid_angle_polygon(&quad_face, &x).unwrap();
        let normal = Point3::new(0.0, 0.0, 1.0);
        let rule = QuadRule::on_unit(Grading::None, 0, 24, 16);
        let mut quadv = 0.0;
        // bilinear map of the planar quad
        for (&u, &wu) in rule.nodes.iter().zip(&rule.weights) {
            for (&v, &wv) in rule.nodes.iter().zip(&rule.weights) {
                let p = quad_face[0] * ((1.0 - u) * (1.0 - v))
                    + quad_face[1] * (u * (1.0 - v))
                    + quad_face[2] * (u * v)
                    + quad_face[3] * ((1.0 - u) * v);
                let du = (quad_face[1] - quad_face[0]) * (1.0 - v)
                    + (quad_face[2] - quad_face[3]) * v;
                let dv = (quad_face[3] - quad_face[0]) * (1.0 - u)
                    + (quad_face[2] - quad_face[1]) * u;
                let jac = du.cross(&dv).norm();
                quadv += wu * wv * jac * dlp_kernel_3d(&x, &p, &normal).unwrap();
            }
        }
        c.check(
            (omega - 4.0 * PI * quadv.abs()).abs() <= 1e-6,
            format!(
                "3-d solid angle vs quadrature mismatch {:.2e}",
                (omega - 4.0 * PI * quadv.abs()).abs()
            ),
        );
    }

    // scale invariance under kappa in {0.1, 10}: gamma-beta and sawtooth
    let tol = 1e-8;
    let segs: Vec<Segment2D> = (1..=4).map(|m| gamma_beta_segment(m, 0.8).unwrap()).collect();
    let reference = galerkin_segments(&segs, tol, GeometryTag::Custom, String::new()).unwrap();
    for kappa in [0.1, 10.0] {
        let scaled: Vec<Segment2D> = segs
            .iter()
            .map(|s| Segment2D::new(s.a * kappa, s.b * kappa, s.index).unwrap())
            .collect();
        let got = galerkin_segments(&scaled, tol, GeometryTag::Custom, String::new()).unwrap();
        let dev = (&got.entries - &reference.entries).abs().max();
        c.check(
            dev <= 10.0 * tol,
            format!("gamma-beta scale invariance violated at kappa={kappa}: {dev:.2e}"),
        );
    }
    let saw = sawtooth(1.0, 1, 4).unwrap();
    let reference = galerkin_segments(&saw.segments, tol, GeometryTag::Custom, String::new()).unwrap();
    for kappa in [0.1, 10.0] {
        let scaled: Vec<Segment2D> = saw
            .segments
            .iter()
            .map(|s| Segment2D::new(s.a * kappa, s.b * kappa, s.index).unwrap())
            .collect();
        let got = galerkin_segments(&scaled, tol, GeometryTag::Custom, String::new()).unwrap();
        let dev = (&got.entries - &reference.entries).abs().max();
        c.check(
            dev <= 10.0 * tol,
            format!("sawtooth scale invariance violated at kappa={kappa}: {dev:.2e}"),
        );
    }
    // open book pages scaled by kappa
    let book = open_book(0.5, 2).unwrap();
    let tol3 = 1e-5;
    let pages = book.pages();
    let reference = galerkin_pages(&pages[..3], tol3, 8, String::new()).unwrap();
    for kappa in [0.1, 10.0] {
        let scaled: Vec<Face3D> = pages[..3]
            .iter()
            .map(|f| {
                Face3D::new(
                    f.vertices.iter().map(|v| v * kappa).collect(),
                    f.label.clone(),
                    Some(&f.normal),
                )
                .unwrap()
            })
            .collect();
        let got = galerkin_pages(&scaled, tol3, 8, String::new()).unwrap();
        let dev = (&got.entries - &reference.entries).abs().max();
        c.check(
            dev <= 10.0 * tol3,
            format!("open-book scale invariance violated at kappa={kappa}: {dev:.2e}"),
        );
    }

    // Toeplitz structure of the entrywise-assembled sawtooth matrix
    let n = 10;
    let saw = sawtooth(1.0, 1, n as i64).unwrap();
    let entrywise = d_coeffs_segments(&saw.segments, tol).unwrap();
    let mut spread: f64 = 0.0;
    for offset in 1..n {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for j in 0..(n - offset) {
            let v = entrywise.values[(j + offset, j)];
            lo = lo.min(v);
            hi = hi.max(v);
            let w = entrywise.values[(j, j + offset)];
            lo = lo.min(w);
            hi = hi.max(w);
        }
        spread = spread.max(hi - lo);
    }
    c.check(
        spread <= 2.0 * tol,
        format!("Toeplitz diagonal spread {spread:.2e} > 2 tol"),
    );
    // and the entrywise assembly agrees with the coefficient route
    let direct = galerkin_sawtooth(1.0, n, tol).unwrap();
    let via_segments =
        galerkin_segments(&saw.segments, tol, GeometryTag::Custom, String::new()).unwrap();
    let dev = (&direct.entries - &via_segments.entries).abs().max();
    c.check(
        dev <= 3.0 * tol,
        format!("coefficient route vs entrywise assembly differ by {dev:.2e}"),
    );
    // signed-kernel route: B ⊙ d decomposition matches the sign pattern
    for j in 0..n {
        for m in 0..n {
            if j != m && via_segments.entries[(j, m)].abs() > 10.0 * via_segments.quad_report {
                c.check(
                    via_segments.entries[(j, m)].signum() == bn_sign(j + 1, m + 1),
                    format!("sign pattern broken at ({j},{m})"),
                );
            }
        }
    }

    // matrix-level dual route: assemble D_3 on the self-similar graph by raw
    // signed-kernel double quadrature (no angle formula) and compare
    let tol_m = 1e-5;
    let angle_route = dlplab::assembly::galerkin_gammabeta(0.8, 3, tol_m).unwrap();
    let segs3: Vec<Segment2D> = (1..=3).map(|m| gamma_beta_segment(m, 0.8).unwrap()).collect();
    let rule = QuadRule::on_unit(Grading::Both, 10, 8, 16);
    for j in 0..3 {
        for m in 0..3 {
            if j == m {
                continue;
            }
            let (sj, sm) = (&segs3[j], &segs3[m]);
            let mut total = 0.0;
            for (&t, &wt) in rule.nodes.iter().zip(&rule.weights) {
                let x = sj.point_at(t);
                for (&s, &ws) in rule.nodes.iter().zip(&rule.weights) {
                    total += wt * ws * dlp_kernel_2d(&x, &sm.point_at(s), &sm.normal).unwrap();
                }
            }
            total *= sj.length() * sm.length() / (sj.length() * sm.length()).sqrt();
            let dev = (total - angle_route.entries[(j, m)]).abs();
            c.check(
                dev <= 3.0 * tol_m,
                format!("signed-kernel vs angle assembly differ by {dev:.2e} at ({j},{m})"),
            );
        }
    }
    c.finish();
}
