mod config;
mod svg;

use std::f64::consts::TAU;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use rand::Rng;
use serde_json::{json, Value};

use svg::{Plot, Style};
use torus_nls::acceptance::{run_criterion, CRITERIA};
use torus_nls::io;
use torus_nls::lattice::{coprime_count, coprime_density, coprime_inverse_square_sum, LatticePoint};
use torus_nls::nls::{evolve, NlsConfig, Nonlinearity};
use torus_nls::parallelogram::{
    additive_energy, ap3_count, cumulative_from_counts, point_line_incidences, rich_lines, tau_counts, tau_histogram, PointSet,
    DEFAULT_MAX_POINTS,
};
use torus_nls::resonance::{
    approx_solution_experiment, approx_trend, experiment_config, fit_resonant_constant, gaussian_state, horizon_sweep,
    l4_lower_bound_check, predicted_mode_rates, two_solution_divergence, SparseGaussianData,
};
use torus_nls::rng::stream;
use torus_nls::schrodinger::{
    extinction_scan, kernel_bound_scan, l4_spacetime, l4_time_slice, n_norm, quartic_grid_side, FourierState, L4Method,
};
use torus_nls::uniformity::{embedding_side, gowers_norm_explicit, gowers_norm_group, gowers_norm_recursive, pi_eta_norm, pi_norm, BoxFunction};
use torus_nls::Error;

#[derive(Parser, Debug)]
#[command(name = "torus-nls", version, about = "Resonance counting, uniformity norms and NLS experiments on the square torus")]
struct Cli {
    /// Seed for every random instance; equal seeds give identical output.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output format; each command has its own default.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Also write an SVG plot to this path.
    #[arg(long, global = true)]
    svg: Option<PathBuf>,
    /// JSON object of parameter defaults, e.g. {"radius": 1000}.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum NlArg {
    Defocusing,
    Focusing,
    Off,
}

impl From<NlArg> for Nonlinearity {
    fn from(n: NlArg) -> Self {
        match n {
            NlArg::Defocusing => Nonlinearity::Defocusing,
            NlArg::Focusing => Nonlinearity::Focusing,
            NlArg::Off => Nonlinearity::Off,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// τ-histogram of parallelograms in a point set.
    Count(CountArgs),
    /// Gowers U^k and Π norms of a function on a box.
    Gowers(GowersArgs),
    /// L⁴ norms of the free Schrödinger flow.
    L4(L4Args),
    /// Dirichlet-bound scan of the Littlewood–Paley kernel and the extinction table.
    Kernel(KernelArgs),
    /// Density of primitive lattice points in a disc.
    Coprime(CoprimeArgs),
    /// Resonant rectangle sums and their W² ln W fit, or per-mode phase rates.
    Resonance(ResonanceArgs),
    /// Split-step NLS runs and the phase-corrected approximation experiment.
    Simulate(SimulateArgs),
    /// Run the acceptance suite.
    Verify(VerifyArgs),
}

#[derive(Args, Debug)]
struct CountArgs {
    /// Point set file, one "x y" per line.
    #[arg(long, conflicts_with_all = ["square", "disc"])]
    input: Option<PathBuf>,
    /// Use the square [−N, N]².
    #[arg(long)]
    square: Option<i64>,
    /// Use the integer points of the disc of this radius.
    #[arg(long)]
    disc: Option<f64>,
    /// Report only |τ| ≤ M and the cumulative counts up to M.
    #[arg(long)]
    max_tau: Option<i64>,
    /// Also report lines with at least K points and their incidences.
    #[arg(long)]
    rich: Option<usize>,
}

#[derive(Args, Debug)]
struct GowersArgs {
    /// Box function file: "i,re,im" (1D) or "i,j,re,im" (2D) rows.
    #[arg(long, conflicts_with = "random")]
    input: Option<PathBuf>,
    /// Random complex function on [−N, N]^dim.
    #[arg(long)]
    random: Option<i64>,
    #[arg(long, default_value_t = 1)]
    dim: usize,
    /// Order k of U^k.
    #[arg(long, default_value_t = 2)]
    k: usize,
    #[arg(long, value_enum, default_value_t = GowersMethod::Recursive)]
    method: GowersMethod,
    /// Cyclic group side for --method group (default 2^{k+1}N).
    #[arg(long)]
    modulus: Option<i64>,
    /// Also compute ‖f‖_Π (2D only).
    #[arg(long)]
    pi: bool,
    /// Also compute ‖f‖_{Π_η} for η = "a,b" (2D only).
    #[arg(long)]
    eta: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, ValueEnum)]
enum GowersMethod {
    Recursive,
    Explicit,
    Group,
}

#[derive(Args, Debug)]
struct L4Args {
    /// Fourier state file: "xi1,xi2,re,im" rows.
    #[arg(long, conflicts_with = "random")]
    input: Option<PathBuf>,
    /// Random state with this many modes.
    #[arg(long)]
    random: Option<usize>,
    /// Cutoff |ξ|_∞ ≤ K for --random.
    #[arg(long, default_value_t = 8)]
    cutoff: i64,
    #[arg(long, default_value_t = 0.0)]
    t0: f64,
    #[arg(long, default_value_t = TAU)]
    t1: f64,
    /// Number of time slices g(t) reported on [t0, t1].
    #[arg(long, default_value_t = 64)]
    samples: usize,
    /// Cross-check each slice and the integral by quadrature.
    #[arg(long)]
    cross_check: bool,
    /// Fejér-weighted norm with this M (requires --scale).
    #[arg(long, requires = "scale")]
    fejer: Option<u64>,
    /// Frequency scale N of the Fejér-weighted norm.
    #[arg(long)]
    scale: Option<u64>,
}

#[derive(Args, Debug)]
struct KernelArgs {
    /// Dyadic scales N.
    #[arg(long, value_delimiter = ',', default_value = "8,16,32")]
    n: Vec<u64>,
    /// Times t; defaults to a seeded random batch.
    #[arg(long, value_delimiter = ',')]
    times: Option<Vec<f64>>,
    /// Size of the random batch when --times is absent.
    #[arg(long, default_value_t = 16)]
    random: usize,
    /// Report the extinction table instead.
    #[arg(long)]
    extinction: bool,
    #[arg(long, value_delimiter = ',', default_value = "0.5,1,2,4")]
    big_t: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "1,0.5,0.25")]
    eps: Vec<f64>,
}

#[derive(Args, Debug)]
struct CoprimeArgs {
    #[arg(long, default_value_t = 10_000.0)]
    radius: f64,
}

#[derive(Args, Debug)]
struct ResonanceArgs {
    /// Widths W for the fit of R(0, W)/W² against ln W.
    #[arg(long, value_delimiter = ',', default_value = "64,128,256,512,1024,2048,4096")]
    w: Vec<f64>,
    /// Report the per-mode phase rates of the data (L, first W, λ) instead.
    #[arg(long)]
    rates: bool,
    #[arg(long, default_value_t = 1)]
    l: i64,
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    #[arg(long, value_enum, default_value_t = NlArg::Defocusing)]
    nonlinearity: NlArg,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    /// "approx" compares the NLS flow with the phase-corrected free flow.
    #[arg(long, value_enum)]
    experiment: Option<Experiment>,
    /// Initial Fourier state; defaults to the sparse Gaussian data.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, default_value_t = 8)]
    l: i64,
    #[arg(long, default_value_t = 32.0)]
    w: f64,
    #[arg(long, default_value_t = 0.1)]
    lambda: f64,
    #[arg(long, default_value_t = 1e-3)]
    dt: f64,
    /// Minimum grid side.
    #[arg(long, default_value_t = 256)]
    grid: usize,
    /// Horizon; defaults to the admissible c/ln(W/L).
    #[arg(long)]
    horizon: Option<f64>,
    #[arg(long, value_enum, default_value_t = NlArg::Defocusing)]
    nonlinearity: NlArg,
    /// Sample the errors every this many steps.
    #[arg(long, default_value_t = 10)]
    sample_every: usize,
    /// Run the approximation over these widths at fixed L and λ.
    #[arg(long, value_delimiter = ',')]
    trend: Option<Vec<f64>>,
    /// Run past the horizon up to this value of t·ln(W/L) and locate the breakdown.
    #[arg(long)]
    sweep: Option<f64>,
    /// Compare with a second solution of amplitude λ′.
    #[arg(long)]
    lambda2: Option<f64>,
    /// Report L⁴ growth of the free flow at these rescaled times.
    #[arg(long, value_delimiter = ',')]
    l4_growth: Option<Vec<f64>>,
    /// Galerkin cutoff for plain runs (default from the data).
    #[arg(long)]
    k: Option<i64>,
    /// End time for plain runs.
    #[arg(long, default_value_t = 1.0)]
    t_end: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, ValueEnum)]
enum Experiment {
    Approx,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Same criteria and tolerances; the full suite already fits the quick budget.
    #[arg(long)]
    quick: bool,
    /// Run only these criteria.
    #[arg(long, value_delimiter = ',')]
    only: Option<Vec<u8>>,
}

enum Failure {
    Usage(String),
    Numerical(String),
    Verification(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Blowup { .. } | Error::Precondition(_) => Failure::Numerical(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

type Outcome<T> = std::result::Result<T, Failure>;

/// Rendered result of one command.
struct Report {
    json: Value,
    csv: String,
    default: Format,
    plot: Option<Plot>,
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn finite(v: f64, what: &str) -> Outcome<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Failure::Numerical(format!("{what} is not finite")))
    }
}

fn read(path: &Path) -> Outcome<String> {
    io::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn point(s: &str) -> Outcome<LatticePoint> {
    let parts: Vec<&str> = s.split(',').collect();
    let bad = || usage(format!("expected a lattice point \"a,b\", got {s:?}"));
    if parts.len() != 2 {
        return Err(bad());
    }
    let x = parts[0].trim().parse().map_err(|_| bad())?;
    let y = parts[1].trim().parse().map_err(|_| bad())?;
    Ok(LatticePoint::new(x, y)?)
}

fn cmd_count(a: &CountArgs) -> Outcome<Report> {
    let set = match (&a.input, a.square, a.disc) {
        (Some(p), _, _) => io::parse_point_set(&read(p)?)?,
        (None, Some(n), _) if n >= 0 => PointSet::square(n),
        (None, None, Some(r)) if r >= 0.0 => PointSet::disc(r),
        _ => return Err(usage("give --input FILE, --square N or --disc R")),
    };
    if let Some(m) = a.max_tau {
        if m < 1 {
            return Err(usage("--max-tau must be ≥ 1"));
        }
    }
    let hist = tau_histogram(&set, None)?;
    let counts = tau_counts(&set, DEFAULT_MAX_POINTS)?;
    let shown: Vec<Value> = hist
        .entries
        .keys()
        .filter(|t| a.max_tau.map_or(true, |m| t.abs() <= m))
        .map(|&t| json!({"tau": t, "count": hist.count(t)}))
        .collect();
    let mut out = json!({
        "points": set.len(),
        "additive_energy": additive_energy(&set)?,
        "ap3": ap3_count(&set)?,
        "histogram": shown,
    });
    if let Some(m) = a.max_tau {
        out["cumulative"] = json!({
            "max_tau": m,
            "including_zero": cumulative_from_counts(&counts, m, true),
            "excluding_zero": cumulative_from_counts(&counts, m, false),
        });
    }
    if let Some(k) = a.rich {
        let lines = rich_lines(&set, k)?;
        let plain: Vec<_> = lines.iter().map(|(l, _)| *l).collect();
        out["rich_lines"] = json!({
            "k": k,
            "lines": lines.len(),
            "incidences": point_line_incidences(&set, &plain)?,
        });
    }
    let pts: Vec<(f64, f64)> = hist
        .entries
        .keys()
        .filter(|t| a.max_tau.map_or(true, |m| t.abs() <= m))
        .map(|&t| (t as f64, hist.count(t) as f64))
        .collect();
    Ok(Report {
        json: out,
        csv: io::format_histogram(&hist, a.max_tau),
        default: Format::Csv,
        plot: Some(Plot::new("parallelograms by resonance level", "tau", "count").with("count", Style::Points, pts)),
    })
}

fn random_box(seed: u64, n: i64, dim: usize) -> Outcome<BoxFunction> {
    let mut rng = stream(seed, 101);
    let mut draw = || Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    Ok(match dim {
        1 => BoxFunction::from_fn_1d(n, |_| draw())?,
        2 => BoxFunction::from_fn_2d(n, |_, _| draw())?,
        _ => return Err(usage("--dim must be 1 or 2")),
    })
}

fn cmd_gowers(a: &GowersArgs, seed: u64) -> Outcome<Report> {
    let f = match (&a.input, a.random) {
        (Some(p), _) => io::parse_box_function(&read(p)?)?,
        (None, Some(n)) => random_box(seed, n, a.dim)?,
        _ => return Err(usage("give --input FILE or --random N")),
    };
    let value = match a.method {
        GowersMethod::Recursive => gowers_norm_recursive(&f, a.k)?,
        GowersMethod::Explicit => gowers_norm_explicit(&f, a.k)?,
        GowersMethod::Group => gowers_norm_group(&f, a.k, a.modulus.unwrap_or_else(|| embedding_side(f.half_width(), a.k)))?,
    };
    let mut out = json!({
        "dim": f.dim(),
        "n": f.half_width(),
        "k": a.k,
        "method": format!("{:?}", a.method).to_lowercase(),
        "value": finite(value, "norm")?,
    });
    if a.pi {
        out["pi_norm"] = json!(pi_norm(&f)?);
    }
    if let Some(e) = &a.eta {
        let eta = point(e)?;
        out["pi_eta_norm"] = json!({"eta": [eta.x, eta.y], "value": pi_eta_norm(&f, eta)?});
    }
    let csv = io::format_table(&["k", "value"], &[vec![a.k as f64, value]]);
    Ok(Report {
        json: out,
        csv,
        default: Format::Json,
        plot: None,
    })
}

fn random_state(seed: u64, modes: usize, k: i64) -> Outcome<FourierState> {
    if k < 0 {
        return Err(usage("--cutoff must be ≥ 0"));
    }
    let mut rng = stream(seed, 102);
    let mut pairs = Vec::with_capacity(modes);
    for _ in 0..modes {
        let p = LatticePoint::new(rng.gen_range(-k..=k), rng.gen_range(-k..=k))?;
        pairs.push((p, Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))));
    }
    Ok(FourierState::with_cutoff(pairs.into_iter().collect(), k)?)
}

fn cmd_l4(a: &L4Args, seed: u64) -> Outcome<Report> {
    let phi = match (&a.input, a.random) {
        (Some(p), _) => io::parse_fourier_state(&read(p)?)?,
        (None, Some(m)) => random_state(seed, m, a.cutoff)?,
        _ => return Err(usage("give --input FILE or --random MODES")),
    };
    let report = l4_spacetime(&phi, a.t0, a.t1, a.cross_check)?;
    let grid = quartic_grid_side(phi.cutoff());
    let n = a.samples.max(1);
    let mut rows = Vec::with_capacity(n);
    for i in 0..n {
        let t = if n == 1 { a.t0 } else { a.t0 + (a.t1 - a.t0) * i as f64 / (n - 1) as f64 };
        let g = finite(l4_time_slice(&phi, t, L4Method::Combinatorial)?, "g(t)")?;
        let q = if a.cross_check {
            l4_time_slice(&phi, t, L4Method::Quadrature { grid })?
        } else {
            f64::NAN
        };
        rows.push(vec![t, g, q]);
    }
    let mut out = json!({
        "modes": phi.len(),
        "cutoff": phi.cutoff(),
        "mass": phi.mass(),
        "interval": [a.t0, a.t1],
        "integral": report.integral_combinatorial,
        "value": report.value_combinatorial,
        "integral_quadrature": report.integral_quadrature,
        "slices": rows.iter().map(|r| json!({"t": r[0], "g": r[1]})).collect::<Vec<_>>(),
    });
    if let (Some(m), Some(s)) = (a.fejer, a.scale) {
        out["fejer_norm"] = json!({"m": m, "n": s, "value": n_norm(&phi, m, s)?});
    }
    let pts = rows.iter().map(|r| (r[0], r[1])).collect();
    let csv = if a.cross_check {
        io::format_table(&["t", "g_combinatorial", "g_quadrature"], &rows)
    } else {
        let short: Vec<Vec<f64>> = rows.iter().map(|r| r[..2].to_vec()).collect();
        io::format_table(&["t", "g"], &short)
    };
    Ok(Report {
        json: out,
        csv,
        default: Format::Json,
        plot: Some(Plot::new("L4 time slices of the free flow", "t", "g(t)").with("g", Style::Line, pts)),
    })
}

fn cmd_kernel(a: &KernelArgs, seed: u64) -> Outcome<Report> {
    if a.extinction {
        let rows = extinction_scan(&a.n, &a.big_t, &a.eps)?;
        let table: Vec<Vec<f64>> = rows
            .iter()
            .map(|r| vec![r.n as f64, r.big_t, r.eps, r.t0, r.t1, r.value])
            .collect();
        let pts = rows.iter().map(|r| (r.big_t / r.eps, r.value)).collect();
        return Ok(Report {
            json: json!({"extinction": rows}),
            csv: io::format_table(&["n", "big_t", "eps", "t0", "t1", "value"], &table),
            default: Format::Csv,
            plot: Some(Plot::new("extinction values", "T/eps", "value").with("value", Style::Points, pts)),
        });
    }
    let times = match &a.times {
        Some(t) => t.clone(),
        None => {
            let mut rng = stream(seed, 103);
            (0..a.random).map(|_| rng.gen_range(0.0..TAU)).collect()
        }
    };
    let rows = kernel_bound_scan(&a.n, &times)?;
    let worst = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
    let table: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| vec![r.n as f64, r.t, r.a as f64, r.q as f64, r.measured, r.bound, r.ratio])
        .collect();
    let pts = rows.iter().map(|r| (r.t, r.ratio)).collect();
    Ok(Report {
        json: json!({"rows": rows, "max_ratio": finite(worst, "kernel ratio")?}),
        csv: io::format_table(&["n", "t", "a", "q", "measured", "bound", "ratio"], &table),
        default: Format::Csv,
        plot: Some(Plot::new("kernel sup over the Dirichlet bound", "t", "ratio").with("ratio", Style::Points, pts)),
    })
}

fn cmd_coprime(a: &CoprimeArgs) -> Outcome<Report> {
    let count = coprime_count(a.radius)?;
    let ratio = count as f64 / (std::f64::consts::PI * a.radius * a.radius);
    let target = (coprime_density() * 1e6).round() / 1e6;
    let inv = coprime_inverse_square_sum(a.radius)?;
    Ok(Report {
        json: json!({"radius": a.radius, "count": count, "ratio": ratio, "target": target, "inverse_square_sum": inv}),
        csv: io::format_table(&["radius", "count", "ratio", "target"], &[vec![a.radius, count as f64, ratio, target]]),
        default: Format::Json,
        plot: None,
    })
}

fn cmd_resonance(a: &ResonanceArgs) -> Outcome<Report> {
    if a.rates {
        let w = *a.w.first().ok_or_else(|| usage("--w needs a value"))?;
        let data = SparseGaussianData::new(a.l, w, a.lambda);
        let rep = predicted_mode_rates(&data, a.nonlinearity.into())?;
        let table: Vec<Vec<f64>> = rep
            .per_xi
            .iter()
            .map(|m| vec![m.xi.x as f64, m.xi.y as f64, m.r, m.rate])
            .collect();
        let pts = rep
            .per_xi
            .iter()
            .map(|m| ((m.xi.norm2() as f64).sqrt(), m.rate))
            .collect();
        return Ok(Report {
            json: json!({
                "l": a.l, "w": w, "lambda": a.lambda, "mu": rep.mu, "modes": rep.per_xi.len(),
                "weighted_mean_rate": rep.weighted_mean_rate, "rate_dispersion": rep.rate_dispersion,
            }),
            csv: io::format_table(&["xi1", "xi2", "r", "rate"], &table),
            default: Format::Csv,
            plot: Some(Plot::new("resonant phase rate per mode", "|xi|", "rate").with("rate", Style::Points, pts)),
        });
    }
    let fit = fit_resonant_constant(&a.w)?;
    let table: Vec<Vec<f64>> = fit.rows.iter().map(|r| vec![r.w, r.r, r.residual]).collect();
    let measured = fit.rows.iter().map(|r| (r.w.ln(), r.r / (r.w * r.w))).collect();
    let line = fit.rows.iter().map(|r| (r.w.ln(), fit.alpha * r.w.ln() + fit.beta)).collect();
    Ok(Report {
        json: serde_json::to_value(&fit)?,
        csv: io::format_table(&["w", "r", "residual"], &table),
        default: Format::Csv,
        plot: Some(
            Plot::new("resonant sum R(0, W)/W^2", "ln W", "R/W^2")
                .with("measured", Style::Points, measured)
                .with(&format!("fit alpha = {:.4}", fit.alpha), Style::Line, line),
        ),
    })
}

fn cmd_simulate(a: &SimulateArgs) -> Outcome<Report> {
    let nl: Nonlinearity = a.nonlinearity.into();
    let data = SparseGaussianData::new(a.l, a.w, a.lambda);
    if let Some(ws) = &a.trend {
        let rows = approx_trend(a.l, ws, a.lambda, a.dt, nl, a.grid)?;
        let table: Vec<Vec<f64>> = rows
            .iter()
            .map(|r| vec![r.ratio, r.w, r.horizon, r.dt, r.max_error_corrected_over_lambda, r.max_error_plain_over_lambda])
            .collect();
        let pts = rows.iter().map(|r| (r.ratio, r.max_error_corrected_over_lambda)).collect();
        return Ok(Report {
            json: json!({"trend": rows}),
            csv: io::format_table(&["ratio", "w", "horizon", "dt", "corrected_over_lambda", "plain_over_lambda"], &table),
            default: Format::Csv,
            plot: Some(Plot::new("corrected error against W/L", "W/L", "max error / lambda").with("corrected", Style::Line, pts)),
        });
    }
    if let Some(ts) = &a.l4_growth {
        let rep = l4_lower_bound_check(&data, ts)?;
        let table: Vec<Vec<f64>> = rep.rows.iter().map(|r| vec![r.big_t, r.t_prime, r.periods, r.value]).collect();
        let pts = rep.rows.iter().map(|r| (r.big_t.ln(), r.value.ln())).collect();
        return Ok(Report {
            json: serde_json::to_value(&rep)?,
            csv: io::format_table(&["big_t", "t_prime", "periods", "value"], &table),
            default: Format::Csv,
            plot: Some(Plot::new("spacetime L4 growth", "ln T", "ln value").with("value", Style::Line, pts)),
        });
    }
    if a.experiment == Some(Experiment::Approx) || a.sweep.is_some() || a.lambda2.is_some() {
        let mut cfg = experiment_config(&data, a.dt, nl, a.grid);
        cfg.sample_every = a.sample_every.max(1);
        if let Some(l2) = a.lambda2 {
            let h = a.horizon.unwrap_or_else(|| data.max_horizon());
            let rep = two_solution_divergence(&data, l2, &cfg, h)?;
            let row = vec![rep.lambda, rep.lambda2, rep.initial_distance, rep.final_distance, rep.predicted_final];
            return Ok(Report {
                json: serde_json::to_value(&rep)?,
                csv: io::format_table(&["lambda", "lambda2", "initial", "final", "predicted_final"], &[row]),
                default: Format::Json,
                plot: None,
            });
        }
        let (rep, extra) = if let Some(max) = a.sweep {
            let sw = horizon_sweep(&data, &cfg, max)?;
            let extra = json!({"breakdown": sw.breakdown, "ratios": sw.ratios});
            (sw.report, Some(extra))
        } else {
            let h = a.horizon.unwrap_or_else(|| data.max_horizon());
            (approx_solution_experiment(&data, &cfg, h)?, None)
        };
        for s in &rep.samples {
            finite(s.error_plain + s.error_corrected, "experiment error")?;
        }
        let table: Vec<Vec<f64>> = rep
            .samples
            .iter()
            .map(|s| vec![s.t, s.error_plain, s.error_corrected, s.phase])
            .collect();
        let plain = rep.samples.iter().map(|s| (s.t, s.error_plain)).collect();
        let corrected = rep.samples.iter().map(|s| (s.t, s.error_corrected)).collect();
        let mut json = json!({
            "l": a.l, "w": a.w, "lambda": a.lambda, "lambda_eff": rep.lambda_eff, "mu": rep.mu,
            "horizon": rep.horizon, "oracle_rate": rep.oracle_rate, "fitted_rate": rep.fitted_rate,
            "rate_dispersion": rep.rate_dispersion, "l4_plain": rep.l4_plain, "l4_corrected": rep.l4_corrected,
            "final": rep.last(),
        });
        if let Some(e) = extra {
            json["sweep"] = e;
        }
        return Ok(Report {
            json,
            csv: io::format_table(&["t", "error_plain", "error_corrected", "fitted_phase"], &table),
            default: Format::Csv,
            plot: Some(
                Plot::new("NLS against the free flow", "t", "L2 error")
                    .with("plain", Style::Line, plain)
                    .with("phase corrected", Style::Line, corrected),
            ),
        });
    }
    let u0 = match &a.input {
        Some(p) => io::parse_fourier_state(&read(p)?)?,
        None => gaussian_state(&data)?,
    };
    let lattice = if a.input.is_some() { 1 } else { a.l };
    let k = a.k.unwrap_or(if a.input.is_some() { u0.cutoff() } else { data.reduced_radius() * a.l });
    let m = quartic_grid_side(k / lattice).max(a.grid);
    let mut cfg = NlsConfig::new(k, m, a.dt, nl, a.t_end);
    cfg.lattice = lattice;
    cfg.sample_every = a.sample_every.max(1);
    let tr = evolve(&u0, &cfg)?;
    let table: Vec<Vec<f64>> = tr.samples.iter().map(|s| vec![s.t, s.mass, s.energy, s.l4_slice]).collect();
    let pts = tr.samples.iter().map(|s| (s.t, s.l4_slice)).collect();
    Ok(Report {
        json: json!({
            "k": k, "m": m, "dt": a.dt, "t_end": a.t_end, "samples": tr.samples.len(),
            "max_mass_drift": tr.max_mass_drift(), "max_energy_drift": tr.max_energy_drift(),
            "final_mass": tr.last().mass, "final_energy": tr.last().energy,
        }),
        csv: io::format_table(&["t", "mass", "energy", "l4_slice"], &table),
        default: Format::Csv,
        plot: Some(Plot::new("L4 time slice of the NLS flow", "t", "integral of |u|^4").with("l4", Style::Line, pts)),
    })
}

fn cmd_verify(a: &VerifyArgs, seed: u64, format: Option<Format>) -> Outcome<()> {
    let ids: Vec<u8> = match &a.only {
        Some(ids) => {
            if let Some(bad) = ids.iter().find(|i| !CRITERIA.iter().any(|c| c.0 == **i)) {
                return Err(usage(format!("no criterion {bad}")));
            }
            ids.clone()
        }
        None => CRITERIA.iter().map(|c| c.0).collect(),
    };
    let mut results = Vec::new();
    for id in ids {
        let r = run_criterion(id, seed);
        if format != Some(Format::Json) {
            println!("{r}");
        }
        results.push(r);
    }
    let failed = results.iter().filter(|r| !r.pass).count();
    match format {
        Some(Format::Json) => println!("{}", serde_json::to_string_pretty(&results)?),
        _ => println!("{} of {} criteria passed", results.len() - failed, results.len()),
    }
    if failed > 0 {
        return Err(Failure::Verification(format!("{failed} criteria failed")));
    }
    Ok(())
}

fn emit(report: Report, format: Option<Format>, svg: Option<&Path>) -> Outcome<()> {
    match format.unwrap_or(report.default) {
        Format::Json => println!("{}", serde_json::to_string_pretty(&report.json)?),
        Format::Csv => print!("{}", report.csv),
    }
    if let Some(path) = svg {
        let plot = report.plot.ok_or_else(|| usage("this command has no plot"))?;
        std::fs::write(path, plot.render()).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Outcome<()> {
    let report = match &cli.command {
        Command::Count(a) => cmd_count(a)?,
        Command::Gowers(a) => cmd_gowers(a, cli.seed)?,
        Command::L4(a) => cmd_l4(a, cli.seed)?,
        Command::Kernel(a) => cmd_kernel(a, cli.seed)?,
        Command::Coprime(a) => cmd_coprime(a)?,
        Command::Resonance(a) => cmd_resonance(a)?,
        Command::Simulate(a) => cmd_simulate(a)?,
        Command::Verify(a) => return cmd_verify(a, cli.seed, cli.format),
    };
    emit(report, cli.format, cli.svg.as_deref())
}

fn main() -> ExitCode {
    let args = match config::merge(std::env::args().collect()) {
        Ok(a) => a,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification(msg)) => {
            eprintln!("verification failed: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("numerical failure: {msg}");
            ExitCode::from(3)
        }
    }
}
