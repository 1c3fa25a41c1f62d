//! Command-line front end: emits CSV data reproducing the laboratory's
//! figures and headline numbers.

use clap::{Args, Parser, Subcommand};
use dlplab::assembly::{
    b_matrix, d_coeffs_gammabeta, d_coeffs_strip, galerkin_openbook_with, galerkin_sawtooth,
    sawtooth_coeffs, DEFAULT_TOL_2D, DEFAULT_TOL_3D,
};
use dlplab::galerkin_lab::{
    adversarial_sequence, stability_report, AdversarialConfig, SubspaceSequence,
};
use dlplab::geometry3d::open_book;
use dlplab::matrixanalysis::{
    a_of_beta, disc_inclusion_radius, matrix_2norm, numerical_abscissa, numerical_range_real,
    spec_bn, to_complex,
};
use dlplab::toeplitz::{figure_symbols_csv, sup_norm, SymbolKind, SymbolSeries};
use dlplab::weighted::weighted_lower_bound;
use dlplab::Error;
use nalgebra::DMatrix;
use std::fmt::Write as _;
use std::io::Write as _;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "dlplab", version, about = "double-layer potential laboratory")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// quadrature tolerance (defaults: 1e-8 in 2-d, 1e-6 in 3-d)
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// output CSV path (stdout when omitted)
    #[arg(long, global = true)]
    out: Option<std::path::PathBuf>,
    /// angle count for numerical-range sweeps
    #[arg(long, default_value_t = 720, global = true)]
    angles: usize,
    /// starting graded-layer count for 3-d quadrature
    #[arg(long, default_value_t = 8, global = true)]
    quad_panels: usize,
    /// seed for randomized cross-checks
    #[arg(long, default_value_t = 0, global = true)]
    seed: u64,
}

#[derive(Subcommand, Clone)]
enum Command {
    /// a(beta) curve over a beta grid, with the a = 1/2 crossing
    ABeta {
        /// comma-separated beta grid in (0,1)
        #[arg(long, default_value = "0.5,0.55,0.6,0.65,0.7,0.75,0.8,0.85,0.9,0.95,0.99,0.999")]
        grid: String,
    },
    /// scaled symbol magnitudes 2|e|/M and 4 min/max_theta |h^theta|/M
    Symbols {
        #[arg(long, default_value = "1,2,4")]
        slopes: String,
        #[arg(long, default_value_t = 1024)]
        grid: usize,
        #[arg(long, default_value_t = 180)]
        theta_grid: usize,
    },
    /// sawtooth finite sections: norms and abscissae over N
    Sawtooth {
        #[arg(long, default_value_t = 1.0)]
        slope: f64,
        #[arg(long, default_value = "5,10,20,40,80")]
        sections: String,
    },
    /// strip coefficients d'_{l,a} against the sandwich envelope
    Strip {
        #[arg(long, default_value_t = 1.0)]
        slope: f64,
        #[arg(long, default_value = "1,2,4")]
        widths: String,
        #[arg(long, default_value_t = 5)]
        l_max: usize,
    },
    /// open-book diagnostics over a theta list
    Openbook {
        #[arg(long, default_value = "0.02,0.1,0.5")]
        thetas: String,
        #[arg(long, default_value_t = 3)]
        pages: usize,
    },
    /// B_N spectra and abscissae over a range of N
    Bn {
        #[arg(long, default_value_t = 2)]
        n_lo: usize,
        #[arg(long, default_value_t = 12)]
        n_hi: usize,
    },
    /// Galerkin stability lab on (1/2)I + D_N
    GalerkinDemo {
        #[arg(long, default_value_t = 4.0)]
        slope: f64,
        #[arg(long, default_value_t = 200)]
        size: usize,
        #[arg(long, default_value_t = 40)]
        band: usize,
        #[arg(long, default_value_t = 40)]
        shift: usize,
        #[arg(long, default_value_t = 4)]
        count: usize,
    },
    /// weighted-norm lower bound on the open book
    Weighted {
        #[arg(long, default_value_t = 0.01)]
        theta: f64,
        #[arg(long, default_value_t = 2)]
        pages: usize,
        #[arg(long, default_value_t = 360)]
        p_gon: usize,
        #[arg(long, default_value_t = 12)]
        grid: usize,
    },
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

fn parse_f64_list(s: &str) -> Result<Vec<f64>, Error> {
    s.split(',')
        .map(|x| {
            x.trim()
                .parse::<f64>()
                .map_err(|e| Error::InvalidParameter(format!("bad number {x:?}: {e}")))
        })
        .collect()
}

fn parse_usize_list(s: &str) -> Result<Vec<usize>, Error> {
    s.split(',')
        .map(|x| {
            x.trim()
                .parse::<usize>()
                .map_err(|e| Error::InvalidParameter(format!("bad integer {x:?}: {e}")))
        })
        .collect()
}

fn header(config: &str) -> String {
    let mut out = String::new();
    writeln!(out, "# dlplab {}", env!("CARGO_PKG_VERSION")).unwrap();
    writeln!(out, "# config: {config}").unwrap();
    writeln!(out, "# config_hash: {:016x}", fnv1a(config.as_bytes())).unwrap();
    out
}

fn run_a_beta(common: &Common, grid: &str) -> Result<String, Error> {
    let grid = parse_f64_list(grid)?;
    if grid.iter().any(|&b| !(0.0 < b && b < 1.0)) {
        return Err(Error::InvalidParameter("beta grid must lie in (0,1)".into()));
    }
    let tol = common.tol.unwrap_or(DEFAULT_TOL_2D);
    let a_at = |beta: f64| -> Result<f64, Error> {
        let c = d_coeffs_gammabeta(beta, 3, tol)?;
        a_of_beta(&c.values)
    };
    let mut values = Vec::new();
    for &b in &grid {
        values.push((b, a_at(b)?));
    }
    // bisection for the a = 1/2 crossing within the grid bracket
    let mut crossing = None;
    for w in values.windows(2) {
        let ((b0, a0), (b1, a1)) = (w[0], w[1]);
        if (a0 - 0.5) * (a1 - 0.5) <= 0.0 && a0 != a1 {
            let (mut lo, mut hi) = (b0, b1);
            let mut f_lo = a0 - 0.5;
            for _ in 0..30 {
                let mid = (lo + hi) / 2.0;
                let f_mid = a_at(mid)? - 0.5;
                if f_lo * f_mid <= 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                    f_lo = f_mid;
                }
            }
            crossing = Some((lo + hi) / 2.0);
            break;
        }
    }
    let mut out = header(&format!("a-beta grid={grid:?} tol={tol:e}"));
    if let Some(c) = crossing {
        writeln!(out, "# crossing_beta_star: {c:.6}").unwrap();
    }
    out.push_str("beta,a\n");
    for (b, a) in values {
        writeln!(out, "{b:.10e},{a:.10e}").unwrap();
    }
    Ok(out)
}

fn run_symbols(common: &Common, slopes: &str, grid: usize, theta_grid: usize) -> Result<String, Error> {
    let slopes = parse_f64_list(slopes)?;
    let tol = common.tol.unwrap_or(DEFAULT_TOL_2D);
    let mut out = header(&format!(
        "symbols slopes={slopes:?} grid={grid} theta_grid={theta_grid} tol={tol:e}"
    ));
    out.push_str("M,t_over_pi,e_scaled,h_min_scaled,h_max_scaled\n");
    for &m in &slopes {
        let series = SymbolSeries::build(m, 2000, tol)?;
        let sup_e = sup_norm(&series, SymbolKind::E, 8192)?;
        writeln!(out, "# M={m}: sup<2|e|/M> = {:.8}", 2.0 * sup_e.refined_value / m).unwrap();
        let body = figure_symbols_csv(&series, grid, theta_grid);
        for line in body.lines().skip(1) {
            writeln!(out, "{m},{line}").unwrap();
        }
    }
    Ok(out)
}

fn run_sawtooth(common: &Common, slope: f64, sections: &str) -> Result<String, Error> {
    let sections = parse_usize_list(sections)?;
    let tol = common.tol.unwrap_or(DEFAULT_TOL_2D);
    let n_max = *sections.last().ok_or_else(|| {
        Error::InvalidParameter("need at least one section size".into())
    })?;
    let big = galerkin_sawtooth(slope, n_max, tol)?;
    let (coeffs, _) = sawtooth_coeffs(slope, 2, tol)?;
    let mut out = header(&format!(
        "sawtooth M={slope} sections={sections:?} tol={tol:e}"
    ));
    writeln!(out, "# d'_1 = {:.10e}  sqrt2*d'_1 = {:.10e}", coeffs[1], 2f64.sqrt() * coeffs[1])
        .unwrap();
    out.push_str("N,norm2,abscissa\n");
    for &n in &sections {
        let section = big.entries.view((0, 0), (n, n)).into_owned();
        let norm = matrix_2norm(&section);
        let wr = numerical_abscissa(&to_complex(&section), 0.0)?;
        writeln!(out, "{n},{norm:.10e},{wr:.10e}").unwrap();
    }
    Ok(out)
}

fn run_strip(common: &Common, slope: f64, widths: &str, l_max: usize) -> Result<String, Error> {
    let widths = parse_f64_list(widths)?;
    let tol = common.tol.unwrap_or(DEFAULT_TOL_2D);
    let (plain, _) = sawtooth_coeffs(slope, l_max, tol)?;
    let mut out = header(&format!(
        "strip M={slope} widths={widths:?} l_max={l_max} tol={tol:e}"
    ));
    out.push_str("a,l,d_plain,d_strip,upper_envelope\n");
    for &a in &widths {
        let (strip, _) = d_coeffs_strip(slope, a, l_max, tol)?;
        for l in 1..=l_max {
            let upper = (1.0
                + (1.0 + ((1 + l) as f64 / slope).powi(2)) / (4.0 * a * a))
                .sqrt()
                * plain[l];
            writeln!(
                out,
                "{a},{l},{:.10e},{:.10e},{upper:.10e}",
                plain[l], strip[l]
            )
            .unwrap();
        }
    }
    Ok(out)
}

fn run_openbook(common: &Common, thetas: &str, pages: usize) -> Result<String, Error> {
    let thetas = parse_f64_list(thetas)?;
    let tol = common.tol.unwrap_or(DEFAULT_TOL_3D);
    let mut out = header(&format!(
        "openbook thetas={thetas:?} n={pages} tol={tol:e} angles={} quad_panels={}",
        common.angles, common.quad_panels
    ));
    out.push_str("theta,r1,r2,planarity,star_margin,max_2d_dev,disc_radius_2dn\n");
    for &theta in &thetas {
        let book = open_book(theta, pages)?;
        let planarity = book
            .side_faces
            .iter()
            .map(|f| f.planarity_residual())
            .fold(0.0f64, f64::max);
        let g = galerkin_openbook_with(&book, tol, common.quad_panels)?;
        let n = g.n();
        let mut dev: f64 = 0.0;
        for j in 0..n {
            for m in 0..n {
                if j != m {
                    dev = dev.max((2.0 * g.entries[(j, m)].abs() - 1.0).abs());
                }
            }
        }
        let doubled = &g.entries * 2.0;
        let nr = numerical_range_real(&doubled, common.angles)?;
        let radius = disc_inclusion_radius(&nr);
        writeln!(
            out,
            "{theta:.6e},{:.8},{:.8},{planarity:.3e},{:.3e},{dev:.6},{radius:.8}",
            book.r1, book.r2, book.star_margin
        )
        .unwrap();
    }
    Ok(out)
}

fn run_bn(n_lo: usize, n_hi: usize) -> Result<String, Error> {
    if n_lo < 2 || n_lo > n_hi {
        return Err(Error::InvalidParameter("need 2 <= n_lo <= n_hi".into()));
    }
    let mut out = header(&format!("bn range={n_lo}..{n_hi}"));
    out.push_str("N,spectrum,char_poly_deviation,abscissa,norm2\n");
    for n in n_lo..=n_hi {
        let s = spec_bn(n)?;
        let b = b_matrix(n);
        let wr = numerical_abscissa(&to_complex(&b.entries), 0.0)?;
        let norm = matrix_2norm(&b.entries);
        let spectrum = s
            .eigenvalues
            .iter()
            .map(|v| format!("{v}"))
            .collect::<Vec<_>>()
            .join("|");
        writeln!(out, "{n},{spectrum},{:.3e},{wr:.10e},{norm:.10e}", s.char_poly_deviation)
            .unwrap();
    }
    Ok(out)
}

fn run_galerkin_demo(
    common: &Common,
    slope: f64,
    size: usize,
    band: usize,
    shift: usize,
    count: usize,
) -> Result<String, Error> {
    let tol = common.tol.unwrap_or(DEFAULT_TOL_2D);
    let d = galerkin_sawtooth(slope, size, tol)?;
    let a = DMatrix::<f64>::identity(size, size) * 0.5 + &d.entries;
    let dims: Vec<usize> = (1..=size / 20).map(|k| 20 * k).collect();
    let base = SubspaceSequence::coordinate(size, &dims)?;
    let outcome = adversarial_sequence(
        &a,
        &base,
        AdversarialConfig {
            band_width: band,
            shift,
            count,
            rayleigh_tol: 1e-9,
        },
    )?;
    let g = &a * nalgebra::DVector::<f64>::from_element(size, 1.0 / (size as f64).sqrt());
    let base_report = stability_report(&a, &base, &g)?;
    let mut out = header(&format!(
        "galerkin-demo M={slope} size={size} band={band} shift={shift} count={count} seed={} tol={tol:e}",
        common.seed
    ));
    for (i, r) in outcome.rayleigh_values.iter().enumerate() {
        writeln!(out, "# rayleigh phi_{}: {r:.3e}", i + 1).unwrap();
    }
    out.push_str("kind,N,dim,c_N,err,best_err,M_N\n");
    for r in &base_report.rows {
        writeln!(
            out,
            "base,{},{},{:.10e},{:.10e},{:.10e},{}",
            r.n, r.dim, r.c_n, r.err, r.best_err, r.m_n
        )
        .unwrap();
    }
    for r in &outcome.report.rows {
        writeln!(
            out,
            "adversarial,{},{},{:.10e},{:.10e},{:.10e},{}",
            r.n, r.dim, r.c_n, r.err, r.best_err, r.m_n
        )
        .unwrap();
    }
    Ok(out)
}

fn run_weighted(theta: f64, pages: usize, p_gon: usize, grid: usize) -> Result<String, Error> {
    let bound = weighted_lower_bound(theta, pages, p_gon, grid)?;
    let mut out = header(&format!(
        "weighted theta={theta} n={pages} P={p_gon} G={grid}"
    ));
    out.push_str(&bound.to_csv());
    Ok(out)
}

fn dispatch(cli: &Cli) -> Result<String, Error> {
    match &cli.command {
        Command::ABeta { grid } => run_a_beta(&cli.common, grid),
        Command::Symbols { slopes, grid, theta_grid } => {
            run_symbols(&cli.common, slopes, *grid, *theta_grid)
        }
        Command::Sawtooth { slope, sections } => run_sawtooth(&cli.common, *slope, sections),
        Command::Strip { slope, widths, l_max } => {
            run_strip(&cli.common, *slope, widths, *l_max)
        }
        Command::Openbook { thetas, pages } => run_openbook(&cli.common, thetas, *pages),
        Command::Bn { n_lo, n_hi } => run_bn(*n_lo, *n_hi),
        Command::GalerkinDemo { slope, size, band, shift, count } => {
            run_galerkin_demo(&cli.common, *slope, *size, *band, *shift, *count)
        }
        Command::Weighted { theta, pages, p_gon, grid } => {
            run_weighted(*theta, *pages, *p_gon, *grid)
        }
    }
}


fn main() -> ExitCode {
    if let Ok(threads) = std::env::var("DLPLAB_THREADS") {
        if let Ok(n) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(csv) => {
            let outcome = match &cli.common.out {
                Some(path) => std::fs::write(path, csv).map_err(|e| e.to_string()),
                None => std::io::stdout()
                    .write_all(csv.as_bytes())
                    .map_err(|e| e.to_string()),
            };
            match outcome {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(1)
                }
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::ConvergenceFailure { .. } => ExitCode::from(3),
                _ => ExitCode::from(2),
            }
        }
    }
}
