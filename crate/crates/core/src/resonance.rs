//! Sparse Gaussian data on Lℤ², the resonant rectangle sum and the
//! phase-corrected approximate solution.
//!
//! With spacing L and width W the effective logarithm is ln(W/L): rescaling
//! ξ = Lη turns the data into a Gaussian of width W/L on ℤ².

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{gcd, LatticePoint};
use crate::nls::{DenseState, NlsConfig, Nonlinearity, Solver};
use crate::schrodinger::{free_evolve, quartic_grid_side, FourierState, TimeSliceSeries};

/// Horizon constant c in t ≤ c/ln(W/L).
pub const HORIZON_CONSTANT: f64 = 1.0;

/// Ratio error_corrected/error_plain above which the approximation counts as broken.
pub const BREAKDOWN_RATIO: f64 = 1.0 / 3.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SparseGaussianData {
    pub l: i64,
    pub w: f64,
    pub lambda: f64,
    pub cutoff_radius: f64,
}

impl SparseGaussianData {
    /// Cutoff 4W.
    pub fn new(l: i64, w: f64, lambda: f64) -> Self {
        SparseGaussianData {
            l,
            w,
            lambda,
            cutoff_radius: 4.0 * w,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.check_basic()?;
        if self.w < 4.0 * self.l as f64 {
            return Err(Error::domain(format!(
                "W = {} < 4L = {}: too few modes under the envelope",
                self.w,
                4 * self.l
            )));
        }
        Ok(())
    }

    fn check_basic(&self) -> Result<()> {
        if self.l < 1 {
            return Err(Error::domain("lattice spacing must be a positive integer"));
        }
        if !(self.w > 0.0 && self.w.is_finite()) || !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(Error::domain("W and λ must be positive and finite"));
        }
        if !(self.cutoff_radius >= 4.0 * self.w) || !self.cutoff_radius.is_finite() {
            return Err(Error::domain("cutoff radius must be finite and at least 4W"));
        }
        Ok(())
    }

    /// ln(W/L).
    pub fn log_ratio(&self) -> f64 {
        (self.w / self.l as f64).ln()
    }

    /// Largest reduced radius ⌊cutoff/L⌋.
    pub fn reduced_radius(&self) -> i64 {
        (self.cutoff_radius / self.l as f64).floor() as i64
    }

    /// c(ξ) = λ(L/W)e^{−|ξ/W|²}.
    pub fn coefficient(&self, xi: LatticePoint) -> f64 {
        self.lambda * self.l as f64 / self.w * (-(xi.norm2() as f64) / (self.w * self.w)).exp()
    }

    /// Largest admissible horizon c/ln(W/L).
    pub fn max_horizon(&self) -> f64 {
        HORIZON_CONSTANT / self.log_ratio()
    }
}

/// Coefficients of the data without the W ≥ 4L requirement.
pub fn gaussian_state(data: &SparseGaussianData) -> Result<FourierState> {
    data.check_basic()?;
    let l = data.l;
    let r = data.reduced_radius();
    let cut2 = data.cutoff_radius * data.cutoff_radius;
    let mut pairs = BTreeMap::new();
    for x in -r..=r {
        for y in -r..=r {
            let xi = LatticePoint::new(x * l, y * l)?;
            if (xi.norm2() as f64) <= cut2 {
                pairs.insert(xi, Complex64::new(data.coefficient(xi), 0.0));
            }
        }
    }
    FourierState::new(pairs)
}

/// The sparse Gaussian state. ‖u₀‖ ≈ 2π·λ√(π/2), so λ_eff = ‖u₀‖/(2π) ≈ 1.25λ.
pub fn build_phi(data: &SparseGaussianData) -> Result<FourierState> {
    data.validate()?;
    gaussian_state(data)
}

/// ‖u₀‖_{L²}/(2π).
pub fn lambda_eff(phi: &FourierState) -> f64 {
    phi.l2_norm() / TAU
}

/// Split Σ_m e^{−s(m+u)²} into its m = 0 term and the rest.
fn theta_split(s: f64, u: f64) -> (f64, f64) {
    let zero = (-s * u * u).exp();
    if s < PI {
        let mut full = 1.0;
        let mut k = 1.0;
        loop {
            let a = (-PI * PI * k * k / s).exp();
            if a < 1e-18 {
                break;
            }
            full += 2.0 * a * (TAU * k * u).cos();
            k += 1.0;
        }
        full *= (PI / s).sqrt();
        (zero, full - zero)
    } else {
        let m0 = (-u).round() as i64;
        let j = (41.0 / s).sqrt().ceil() as i64 + 1;
        let mut rest = 0.0;
        for m in (m0 - j)..=(m0 + j) {
            if m != 0 {
                let d = m as f64 + u;
                rest += (-s * d * d).exp();
            }
        }
        (zero, rest)
    }
}

/// R(ξ) = Σ over rectangles (ξ₁, ξ₂, ξ₃, ξ) of 𝔤(ξ₁)𝔤(ξ₂)𝔤(ξ₃), 𝔤 = e^{−|·/W|²} on ℤ².
///
/// Each nonzero rectangle is reached from exactly two primitive directions ±η,
/// which fixes the factor ½ in front of the η-sum.
pub fn resonant_sum(xi: LatticePoint, w: f64, truncation: f64) -> Result<f64> {
    if !(w > 0.0) || !w.is_finite() {
        return Err(Error::domain("W must be positive and finite"));
    }
    if !(truncation >= 6.0 * w) || !truncation.is_finite() {
        return Err(Error::precondition(format!(
            "truncation {truncation} must be at least 6W = {}",
            6.0 * w
        )));
    }
    let w2 = w * w;
    let xn = xi.norm2() as f64;
    let (xx, xy) = (xi.x as f64, xi.y as f64);
    let base = (-xn / w2).exp();
    let t2 = truncation * truncation;
    let tmax = truncation.floor() as i64;
    let mut total = 0.0;
    // One representative η = (a, b), a ≥ 1, b ≥ 0 per rotation class; the
    // four rotations contribute equally.
    for a in 1..=tmax {
        let mut row = 0.0;
        let bmax = ((t2 - (a * a) as f64).max(0.0)).sqrt().floor() as i64;
        for b in 0..=bmax {
            if gcd(a as u64, b as u64) != 1 {
                continue;
            }
            let n2 = (a * a + b * b) as f64;
            let s = 2.0 * n2 / w2;
            let u = (xx * a as f64 + xy * b as f64) / n2;
            let v = (-xx * b as f64 + xy * a as f64) / n2;
            let (zu, ru) = theta_split(s, u);
            let (zv, rv) = theta_split(s, v);
            row += ru * (zv + rv) + zu * rv;
        }
        total += row;
    }
    Ok((-3.0 * xn / w2).exp() + 2.0 * base * total)
}

/// R(ξ) by direct enumeration over the disc of radius `radius`.
pub fn resonant_sum_brute(xi: LatticePoint, w: f64, radius: f64) -> Result<f64> {
    let set = crate::parallelogram::PointSet::disc(radius);
    if !set.contains(xi) {
        return Err(Error::domain("ξ must lie inside the enumeration disc"));
    }
    let weights: Vec<Complex64> = set
        .points()
        .iter()
        .map(|p| Complex64::new((-(p.norm2() as f64) / (w * w)).exp(), 0.0))
        .collect();
    Ok(crate::parallelogram::resonant_vertex_sum(&set, &weights, xi)?.re)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ResonantFitRow {
    pub w: f64,
    pub r: f64,
    /// R/W² minus the fitted α ln W + β.
    pub residual: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ResonantFit {
    pub rows: Vec<ResonantFitRow>,
    pub alpha: f64,
    pub beta: f64,
}

/// Least-squares fit R(0, W)/W² = α ln W + β.
pub fn fit_resonant_constant(ws: &[f64]) -> Result<ResonantFit> {
    if ws.len() < 2 {
        return Err(Error::domain("the fit needs at least two widths"));
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut rs = Vec::new();
    for &w in ws {
        let r = resonant_sum(LatticePoint::ORIGIN, w, 6.0 * w)?;
        xs.push(w.ln());
        ys.push(r / (w * w));
        rs.push(r);
    }
    let (alpha, beta) = linear_fit(&xs, &ys)?;
    let rows = ws
        .iter()
        .zip(xs.iter().zip(&ys))
        .zip(&rs)
        .map(|((&w, (x, y)), &r)| ResonantFitRow {
            w,
            r,
            residual: y - (alpha * x + beta),
        })
        .collect();
    Ok(ResonantFit { rows, alpha, beta })
}

pub(crate) fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<(f64, f64)> {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::domain("fit abscissae must not all coincide"));
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    Ok((slope, my - slope * mx))
}

/// Coefficients on the reduced lattice, dense over [−r, r]².
struct DiscGrid {
    r: i64,
    /// (cutoff/L)².
    rho2: f64,
    side: usize,
    vals: Vec<Complex64>,
}

impl DiscGrid {
    fn get(&self, p: LatticePoint) -> Complex64 {
        if p.x.abs() > self.r || p.y.abs() > self.r {
            return Complex64::default();
        }
        self.vals[(p.x + self.r) as usize * self.side + (p.y + self.r) as usize]
    }
}

fn quadratic_range(a: f64, b: f64, c: f64) -> (i64, i64) {
    // a m² + 2 b m + c ≤ 0
    let d = (b * b - a * c).max(0.0).sqrt();
    (((-b - d) / a).floor() as i64, ((-b + d) / a).ceil() as i64)
}

/// Σ over Q = (ξ₁, ξ₂, ξ₃, ξ) ∈ 𝒬⁰ with vertices in the support of c(ξ₁)·conj c(ξ₂)·c(ξ₃),
/// through the η-decomposition on the support itself.
fn support_vertex_sum(grid: &DiscGrid, xi: LatticePoint) -> Complex64 {
    let c0 = grid.get(xi);
    let rho2 = grid.rho2;
    let xn = xi.norm2() as f64;
    let mut total = Complex64::default();
    let emax = (2.0 * rho2.sqrt()).floor() as i64;
    for a in 1..=emax {
        for b in 0..=emax {
            let eta = LatticePoint::raw(a, b);
            let n2 = eta.norm2() as f64;
            if n2 > (4.0 * rho2) || gcd(a as u64, b as u64) != 1 {
                continue;
            }
            let ep = eta.perp();
            let (m0, m1) = quadratic_range(n2, xi.dot(eta) as f64, xn - rho2);
            let (k0, k1) = quadratic_range(n2, xi.dot(ep) as f64, xn - rho2);
            if m0 >= 0 && m1 <= 0 && k0 >= 0 && k1 <= 0 {
                continue;
            }
            for m in m0..=m1 {
                let c1 = grid.get(xi + eta * m);
                if c1 == Complex64::default() {
                    continue;
                }
                for n in k0..=k1 {
                    if m == 0 && n == 0 {
                        continue;
                    }
                    let c3 = grid.get(xi + ep * n);
                    if c3 == Complex64::default() {
                        continue;
                    }
                    let c2 = grid.get(xi + eta * m + ep * n);
                    total += c1 * c2.conj() * c3;
                }
            }
        }
    }
    c0 * c0.conj() * c0 + total * 2.0
}

fn disc_grid(data: &SparseGaussianData) -> Result<DiscGrid> {
    let r = data.reduced_radius();
    let side = (2 * r + 1) as usize;
    let mut vals = vec![Complex64::default(); side * side];
    let cut2 = data.cutoff_radius * data.cutoff_radius;
    for x in -r..=r {
        for y in -r..=r {
            let xi = LatticePoint::new(x * data.l, y * data.l)?;
            if (xi.norm2() as f64) <= cut2 {
                vals[(x + r) as usize * side + (y + r) as usize] = Complex64::new(data.coefficient(xi), 0.0);
            }
        }
    }
    let rho = data.cutoff_radius / data.l as f64;
    Ok(DiscGrid {
        r,
        rho2: rho * rho,
        side,
        vals,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ModeRate {
    pub xi: LatticePoint,
    /// Σ_{Q ∈ 𝒬⁰, ξ₄ = ξ} c₁ c̄₂ c₃.
    pub r: f64,
    /// ω(ξ) = μ·r/c(ξ).
    pub rate: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ResonantSumReport {
    pub w: f64,
    pub per_xi: Vec<ModeRate>,
    pub alpha_fit: Option<f64>,
    pub beta_fit: Option<f64>,
    /// |c|²-weighted mean of ω.
    pub weighted_mean_rate: f64,
    /// Weighted standard deviation of ω over |weighted mean|.
    pub rate_dispersion: f64,
    pub mu: f64,
}

/// Exact resonant self-interaction rate of every mode of the data.
pub fn predicted_mode_rates(data: &SparseGaussianData, nonlinearity: Nonlinearity) -> Result<ResonantSumReport> {
    data.check_basic()?;
    let grid = disc_grid(data)?;
    let mu = nonlinearity.mu();
    let r = grid.r;
    // The data is invariant under the symmetries of the square, and so are the sums.
    let mut orbit: BTreeMap<(i64, i64), Complex64> = BTreeMap::new();
    let mut per_xi = Vec::new();
    for x in -r..=r {
        for y in -r..=r {
            let eta = LatticePoint::raw(x, y);
            let c = grid.get(eta);
            if c == Complex64::default() {
                continue;
            }
            let key = (x.abs().max(y.abs()), x.abs().min(y.abs()));
            let s = *orbit
                .entry(key)
                .or_insert_with(|| support_vertex_sum(&grid, LatticePoint::raw(key.0, key.1)));
            per_xi.push(ModeRate {
                xi: LatticePoint::new(x * data.l, y * data.l)?,
                r: s.re,
                rate: mu * s.re / c.re,
            });
        }
    }
    let (mean, disp) = weighted_rate_stats(data, &per_xi);
    Ok(ResonantSumReport {
        w: data.w,
        per_xi,
        alpha_fit: None,
        beta_fit: None,
        weighted_mean_rate: mean,
        rate_dispersion: disp,
        mu,
    })
}

/// Rate of a single mode of the data.
pub fn mode_rate(data: &SparseGaussianData, xi: LatticePoint, nonlinearity: Nonlinearity) -> Result<ModeRate> {
    data.check_basic()?;
    if xi.x % data.l != 0 || xi.y % data.l != 0 {
        return Err(Error::domain(format!("{xi} is not on the lattice {}ℤ²", data.l)));
    }
    let grid = disc_grid(data)?;
    let eta = LatticePoint::raw(xi.x / data.l, xi.y / data.l);
    let c = grid.get(eta);
    if c == Complex64::default() {
        return Err(Error::domain(format!("{xi} is outside the support")));
    }
    let s = support_vertex_sum(&grid, eta);
    Ok(ModeRate {
        xi,
        r: s.re,
        rate: nonlinearity.mu() * s.re / c.re,
    })
}

fn weighted_rate_stats(data: &SparseGaussianData, rates: &[ModeRate]) -> (f64, f64) {
    let mut sw = 0.0;
    let mut s1 = 0.0;
    let mut s2 = 0.0;
    for m in rates {
        let w = data.coefficient(m.xi).powi(2);
        sw += w;
        s1 += w * m.rate;
        s2 += w * m.rate * m.rate;
    }
    if sw == 0.0 {
        return (0.0, 0.0);
    }
    let mean = s1 / sw;
    let var = (s2 / sw - mean * mean).max(0.0);
    let disp = if mean == 0.0 { 0.0 } else { var.sqrt() / mean.abs() };
    (mean, disp)
}

/// Σ_ξ conj c(ξ)·Σ_{Q ∈ 𝒬⁰, ξ₄ = ξ} c₁ c̄₂ c₃ = Σ_{Q ∈ 𝒬⁰} f(Q).
pub fn resonant_mass(data: &SparseGaussianData) -> Result<f64> {
    let rep = predicted_mode_rates(data, Nonlinearity::Defocusing)?;
    Ok(rep.per_xi.iter().map(|m| data.coefficient(m.xi) * m.r).sum())
}

/// Configuration resolving the data: K = L⌊cutoff/L⌋, grid side ≥ `min_grid`.
pub fn experiment_config(data: &SparseGaussianData, dt: f64, nonlinearity: Nonlinearity, min_grid: usize) -> NlsConfig {
    let kr = data.reduced_radius();
    let m = quartic_grid_side(kr).max(min_grid);
    let mut cfg = NlsConfig::new(kr * data.l, m, dt, nonlinearity, data.max_horizon());
    cfg.lattice = data.l;
    cfg
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ApproxSample {
    pub t: f64,
    pub error_plain: f64,
    /// With the oracle mean rate.
    pub error_corrected: f64,
    /// With the fitted rate.
    pub error_corrected_fit: f64,
    /// Unwrapped arg⟨u(t), e^{itΔ}u₀⟩.
    pub phase: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ApproxReport {
    pub data: SparseGaussianData,
    pub horizon: f64,
    pub mu: f64,
    pub lambda_eff: f64,
    pub oracle_rate: f64,
    pub fitted_rate: f64,
    pub rate_dispersion: f64,
    pub samples: Vec<ApproxSample>,
    /// ‖u − e^{itΔ}u₀‖_{L⁴_{t,x}} over [0, horizon].
    pub l4_plain: f64,
    /// ‖u − e^{−iω̄t}e^{itΔ}u₀‖_{L⁴_{t,x}} with the oracle rate.
    pub l4_corrected: f64,
}

impl ApproxReport {
    pub fn last(&self) -> &ApproxSample {
        self.samples.last().expect("the report always holds t = 0")
    }

    pub fn max_error_corrected(&self) -> f64 {
        self.samples.iter().map(|s| s.error_corrected).fold(0.0, f64::max)
    }

    pub fn max_error_plain(&self) -> f64 {
        self.samples.iter().map(|s| s.error_plain).fold(0.0, f64::max)
    }
}

fn check_resolution(data: &SparseGaussianData, cfg: &NlsConfig) -> Result<()> {
    if cfg.lattice < 1 || data.l % cfg.lattice != 0 {
        return Err(Error::precondition(format!(
            "solver lattice {} must divide the data spacing {}",
            cfg.lattice, data.l
        )));
    }
    let need = data.reduced_radius() * data.l;
    if cfg.k < need {
        return Err(Error::precondition(format!(
            "cutoff K = {} does not resolve the data (needs {need})",
            cfg.k
        )));
    }
    cfg.validate()
}

/// Nonlinear run against the free and phase-corrected free flows.
pub fn approx_solution_experiment(data: &SparseGaussianData, cfg: &NlsConfig, horizon: f64) -> Result<ApproxReport> {
    data.validate()?;
    let hmax = data.max_horizon();
    if !(horizon > 0.0) || horizon > hmax * (1.0 + 1e-12) {
        return Err(Error::precondition(format!(
            "horizon {horizon} must lie in (0, c/ln(W/L)] = (0, {hmax}]"
        )));
    }
    run_experiment(data, cfg, horizon)
}

fn run_experiment(data: &SparseGaussianData, cfg: &NlsConfig, horizon: f64) -> Result<ApproxReport> {
    check_resolution(data, cfg)?;
    let u0 = gaussian_state(data)?;
    let rates = predicted_mode_rates(data, cfg.nonlinearity)?;
    let omega = rates.weighted_mean_rate;
    let steps = ((horizon / cfg.dt).round() as usize).max(1);
    let dt = horizon / steps as f64;
    let mut run_cfg = cfg.clone();
    run_cfg.dt = dt;
    let mut solver_run = Solver::new(&run_cfg)?;
    let mut s = solver_run.to_dense(&u0)?;

    struct Raw {
        t: f64,
        uu: f64,
        ff: f64,
        uf: Complex64,
        plain: f64,
        corrected: f64,
        q_plain: f64,
        q_corrected: f64,
    }
    let mut raw: Vec<Raw> = Vec::new();
    let mut measure = |solver: &mut Solver, s: &DenseState, t: f64| -> Result<()> {
        let f = solver.to_dense(&free_evolve(&u0, t))?;
        let mut uf = Complex64::default();
        for (a, b) in s.data.iter().zip(&f.data) {
            uf += a * b.conj();
        }
        uf *= TAU * TAU;
        let rot = Complex64::from_polar(1.0, -omega * t);
        let dp = DenseState {
            data: s.data.iter().zip(&f.data).map(|(a, b)| a - b).collect(),
        };
        let dc = DenseState {
            data: s.data.iter().zip(&f.data).map(|(a, b)| a - rot * b).collect(),
        };
        raw.push(Raw {
            t,
            uu: solver.mass(s),
            ff: solver.mass(&f),
            uf,
            plain: solver.mass(&dp).sqrt(),
            corrected: solver.mass(&dc).sqrt(),
            q_plain: solver.quartic(&dp),
            q_corrected: solver.quartic(&dc),
        });
        Ok(())
    };
    measure(&mut solver_run, &s, 0.0)?;
    let every = cfg.sample_every.max(1);
    for n in 1..=steps {
        solver_run.step(&mut s, false);
        let t = n as f64 * dt;
        if !solver_run.is_finite(&s) {
            return Err(Error::Blowup { step: n, t });
        }
        if n % every == 0 || n == steps {
            measure(&mut solver_run, &s, t)?;
        }
    }

    // Nearest-branch unwrapping of the overlap phase.
    let mut phases = Vec::with_capacity(raw.len());
    let mut prev = 0.0f64;
    for r in &raw {
        let a = r.uf.arg();
        let k = ((prev - a) / TAU).round();
        let p = a + k * TAU;
        if (p - prev).abs() > PI / 2.0 {
            return Err(Error::precondition(
                "phase changes by more than π/2 between samples; sample more often",
            ));
        }
        phases.push(p);
        prev = p;
    }
    let num: f64 = raw.iter().zip(&phases).map(|(r, p)| r.t * p).sum();
    let den: f64 = raw.iter().map(|r| r.t * r.t).sum();
    let fitted = if den > 0.0 { -num / den } else { 0.0 };

    let samples: Vec<ApproxSample> = raw
        .iter()
        .zip(&phases)
        .map(|(r, &phase)| {
            let e2 = r.uu + r.ff - 2.0 * (Complex64::from_polar(1.0, fitted * r.t) * r.uf).re;
            ApproxSample {
                t: r.t,
                error_plain: r.plain,
                error_corrected: r.corrected,
                error_corrected_fit: e2.max(0.0).sqrt(),
                phase,
            }
        })
        .collect();
    let trap = |f: &dyn Fn(&Raw) -> f64| -> f64 {
        raw.windows(2)
            .map(|w| 0.5 * (w[1].t - w[0].t) * (f(&w[0]) + f(&w[1])))
            .sum::<f64>()
    };
    let l4_plain = trap(&|r| r.q_plain).max(0.0).powf(0.25);
    let l4_corrected = trap(&|r| r.q_corrected).max(0.0).powf(0.25);

    Ok(ApproxReport {
        data: *data,
        horizon,
        mu: cfg.mu(),
        lambda_eff: lambda_eff(&u0),
        oracle_rate: omega,
        fitted_rate: fitted,
        rate_dispersion: rates.rate_dispersion,
        samples,
        l4_plain,
        l4_corrected,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TrendRow {
    pub ratio: f64,
    pub w: f64,
    pub horizon: f64,
    pub dt: f64,
    pub max_error_corrected_over_lambda: f64,
    pub max_error_plain_over_lambda: f64,
}

/// The experiment at fixed L and λ over several widths, each at its own horizon.
///
/// Resonance levels in the Gaussian bulk grow like W², so the step is
/// `dt_ref·(W₀/W)²` with W₀ the first width; a fixed step aliases fast
/// non-resonant phases back towards resonance at large W.
pub fn approx_trend(l: i64, ws: &[f64], lambda: f64, dt_ref: f64, nonlinearity: Nonlinearity, min_grid: usize) -> Result<Vec<TrendRow>> {
    let mut out = Vec::new();
    let w0 = *ws.first().ok_or_else(|| Error::domain("at least one width is required"))?;
    for &w in ws {
        let data = SparseGaussianData::new(l, w, lambda);
        let dt = dt_ref * (w0 / w).powi(2);
        let mut cfg = experiment_config(&data, dt, nonlinearity, min_grid);
        cfg.sample_every = ((1e-2 / dt).round() as usize).max(1);
        let h = data.max_horizon();
        let rep = approx_solution_experiment(&data, &cfg, h)?;
        out.push(TrendRow {
            ratio: w / l as f64,
            w,
            horizon: h,
            dt,
            max_error_corrected_over_lambda: rep.max_error_corrected() / lambda,
            max_error_plain_over_lambda: rep.max_error_plain() / lambda,
        });
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HorizonSweep {
    pub report: ApproxReport,
    /// (t ln(W/L), error_corrected/error_plain).
    pub ratios: Vec<(f64, f64)>,
    /// First rescaled time past one sublattice period with ratio above the threshold.
    pub breakdown: Option<f64>,
}

/// One long run past the admissible horizon, locating where the corrected
/// flow stops tracking the solution.
pub fn horizon_sweep(data: &SparseGaussianData, cfg: &NlsConfig, rescaled_max: f64) -> Result<HorizonSweep> {
    data.validate()?;
    let lr = data.log_ratio();
    let report = run_experiment(data, cfg, rescaled_max / lr)?;
    let period = PI / (data.l * data.l) as f64;
    let ratios: Vec<(f64, f64)> = report
        .samples
        .iter()
        .filter(|s| s.error_plain > 0.0)
        .map(|s| (s.t * lr, s.error_corrected / s.error_plain))
        .collect();
    let breakdown = ratios
        .iter()
        .find(|(t, r)| *t / lr > period && *r > BREAKDOWN_RATIO)
        .map(|(t, _)| *t);
    Ok(HorizonSweep {
        report,
        ratios,
        breakdown,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DivergenceReport {
    pub lambda: f64,
    pub lambda2: f64,
    pub initial_distance: f64,
    pub final_distance: f64,
    /// ‖u₀‖·|1 − e^{−i(ω̄−ω̄′)t}| at the horizon.
    pub predicted_final: f64,
}

/// Two solutions with amplitudes λ and λ′ drifting apart through their phase rates.
pub fn two_solution_divergence(data: &SparseGaussianData, lambda2: f64, cfg: &NlsConfig, horizon: f64) -> Result<DivergenceReport> {
    let data2 = SparseGaussianData { lambda: lambda2, ..*data };
    data.validate()?;
    data2.validate()?;
    check_resolution(data, cfg)?;
    let u1 = gaussian_state(data)?;
    let u2 = gaussian_state(&data2)?;
    let steps = ((horizon / cfg.dt).round() as usize).max(1);
    let mut run_cfg = cfg.clone();
    run_cfg.dt = horizon / steps as f64;
    let mut solver = Solver::new(&run_cfg)?;
    let mut s1 = solver.to_dense(&u1)?;
    let mut s2 = solver.to_dense(&u2)?;
    for _ in 0..steps {
        solver.step(&mut s1, false);
        solver.step(&mut s2, false);
    }
    let a = solver.to_state(&s1);
    let b = solver.to_state(&s2);
    let w1 = predicted_mode_rates(data, cfg.nonlinearity)?.weighted_mean_rate;
    let w2 = predicted_mode_rates(&data2, cfg.nonlinearity)?.weighted_mean_rate;
    let predicted = (Complex64::new(1.0, 0.0) - Complex64::from_polar(1.0, -(w1 - w2) * horizon)).norm();
    Ok(DivergenceReport {
        lambda: data.lambda,
        lambda2,
        initial_distance: u1.l2_distance(&u2),
        final_distance: a.l2_distance(&b),
        predicted_final: predicted * u1.l2_norm(),
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct L4GrowthRow {
    /// Rescaled time T.
    pub big_t: f64,
    /// T′ = T/ln(W/L).
    pub t_prime: f64,
    pub periods: f64,
    pub value4: f64,
    pub value: f64,
    /// T′ was shorter than one period; the value is the direct integral.
    pub short_interval: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct L4GrowthReport {
    pub period: f64,
    pub rows: Vec<L4GrowthRow>,
    /// value(T_{i+1})/value(T_i).
    pub ratios: Vec<f64>,
    pub w0: f64,
    pub resonant_mass: f64,
}

/// ‖e^{itΔ}u₀‖⁴_{L⁴([0, T/ln(W/L)) × 𝕋²)} for each T, using the period π/L² of the free flow.
pub fn l4_lower_bound_check(data: &SparseGaussianData, big_ts: &[f64]) -> Result<L4GrowthReport> {
    data.validate()?;
    if big_ts.iter().any(|&t| !(t >= 1.0) || !t.is_finite()) {
        return Err(Error::domain("rescaled times must be finite and ≥ 1"));
    }
    let phi = gaussian_state(data)?;
    let series = TimeSliceSeries::new(&phi)?;
    let period = PI / (data.l * data.l) as f64;
    let w0 = series.histogram.get(0).re;
    let per_period = period * TAU * TAU * w0;
    let lr = data.log_ratio();
    let mut rows = Vec::new();
    for &big_t in big_ts {
        let tp = big_t / lr;
        let k = (tp / period).floor();
        let short = k < 1.0;
        let value4 = if short {
            series.integral(0.0, tp)
        } else {
            k * per_period + series.integral(k * period, tp)
        };
        rows.push(L4GrowthRow {
            big_t,
            t_prime: tp,
            periods: tp / period,
            value4,
            value: value4.max(0.0).powf(0.25),
            short_interval: short,
        });
    }
    let ratios = rows.windows(2).map(|w| w[1].value / w[0].value).collect();
    Ok(L4GrowthReport {
        period,
        rows,
        ratios,
        w0,
        resonant_mass: resonant_mass(data)?,
    })
}
