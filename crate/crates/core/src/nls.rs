//! Strang-split pseudospectral integrator for i∂ₜu + Δu = μ|u|²u on 𝕋².
//!
//! The state is Galerkin-truncated to |ξ|_∞ ≤ K. Data supported on Lℤ² is
//! integrated in the rescaled variable v(y) = u(y/L), which satisfies
//! i∂ₜv + L²Δv = μ|v|²v on the same torus and needs only a grid of side
//! M ≥ 4(K/L) + 2 for the cubic term to be alias-free.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::LatticePoint;
use crate::schrodinger::{FourierState, SpectralGrid};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Nonlinearity {
    /// μ = +1.
    Defocusing,
    /// μ = −1.
    Focusing,
    /// μ = 0: the free flow.
    Off,
}

impl Nonlinearity {
    pub fn mu(self) -> f64 {
        match self {
            Nonlinearity::Defocusing => 1.0,
            Nonlinearity::Focusing => -1.0,
            Nonlinearity::Off => 0.0,
        }
    }
}

fn default_lattice() -> i64 {
    1
}

fn default_sample_every() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NlsConfig {
    /// Galerkin cutoff on |ξ|_∞.
    pub k: i64,
    /// Grid side in the rescaled variable.
    pub m: usize,
    pub dt: f64,
    pub nonlinearity: Nonlinearity,
    pub t_end: f64,
    #[serde(default = "default_sample_every")]
    pub sample_every: usize,
    /// Spacing L of the sublattice carrying the data.
    #[serde(default = "default_lattice")]
    pub lattice: i64,
}

impl NlsConfig {
    pub fn new(k: i64, m: usize, dt: f64, nonlinearity: Nonlinearity, t_end: f64) -> Self {
        NlsConfig {
            k,
            m,
            dt,
            nonlinearity,
            t_end,
            sample_every: 1,
            lattice: 1,
        }
    }

    pub fn mu(&self) -> f64 {
        self.nonlinearity.mu()
    }

    /// Cutoff in the rescaled variable.
    pub fn reduced_cutoff(&self) -> i64 {
        self.k / self.lattice.max(1)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k < 0 || self.lattice < 1 {
            return Err(Error::domain("cutoff must be ≥ 0 and lattice spacing ≥ 1"));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::domain(format!("time step must be positive, got {}", self.dt)));
        }
        if !(self.t_end.is_finite() && self.t_end >= 0.0) {
            return Err(Error::domain("t_end must be finite and ≥ 0"));
        }
        if self.sample_every == 0 {
            return Err(Error::domain("sample_every must be ≥ 1"));
        }
        let need = 4 * self.reduced_cutoff() + 2;
        if (self.m as i64) < need {
            return Err(Error::precondition(format!(
                "grid side {} cannot dealias the cubic term for cutoff {} on {}ℤ²; need M ≥ {need}",
                self.m, self.k, self.lattice
            )));
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }
}

/// Dense spectral state on the rescaled grid.
#[derive(Clone, Debug)]
pub struct DenseState {
    pub data: Vec<Complex64>,
}

/// Reusable solver: FFT plans, active modes and their half-step phases.
pub struct Solver {
    cfg: NlsConfig,
    grid: SpectralGrid,
    active: Vec<(usize, LatticePoint)>,
    mask: Vec<bool>,
    half_phase: Vec<Complex64>,
    work: Vec<Complex64>,
}

impl Solver {
    pub fn new(cfg: &NlsConfig) -> Result<Self> {
        cfg.validate()?;
        let grid = SpectralGrid::new(cfg.m);
        let kr = cfg.reduced_cutoff();
        let l = cfg.lattice;
        let size = cfg.m * cfg.m;
        let mut active = Vec::new();
        let mut mask = vec![false; size];
        let mut half_phase = vec![Complex64::default(); size];
        for x in -kr..=kr {
            for y in -kr..=kr {
                let eta = LatticePoint::raw(x, y);
                let slot = grid.slot(eta);
                mask[slot] = true;
                active.push((slot, eta));
                let w = (l * l * eta.norm2()) as f64;
                half_phase[slot] = Complex64::from_polar(1.0, -w * cfg.dt / 2.0);
            }
        }
        Ok(Solver {
            cfg: cfg.clone(),
            grid,
            active,
            mask,
            half_phase,
            work: vec![Complex64::default(); size],
        })
    }

    pub fn config(&self) -> &NlsConfig {
        &self.cfg
    }

    pub fn to_dense(&self, u: &FourierState) -> Result<DenseState> {
        let l = self.cfg.lattice;
        let kr = self.cfg.reduced_cutoff();
        let mut data = vec![Complex64::default(); self.cfg.m * self.cfg.m];
        for (&p, &c) in u.coeffs() {
            if p.x % l != 0 || p.y % l != 0 {
                return Err(Error::precondition(format!("mode {p} is not on the lattice {l}ℤ²")));
            }
            let eta = LatticePoint::raw(p.x / l, p.y / l);
            if eta.linf() > kr {
                return Err(Error::precondition(format!("mode {p} exceeds the cutoff K = {}", self.cfg.k)));
            }
            data[self.grid.slot(eta)] = c;
        }
        Ok(DenseState { data })
    }

    pub fn to_state(&self, s: &DenseState) -> FourierState {
        let l = self.cfg.lattice;
        let mut coeffs = BTreeMap::new();
        for &(slot, eta) in &self.active {
            let c = s.data[slot];
            if c != Complex64::default() {
                coeffs.insert(LatticePoint::raw(eta.x * l, eta.y * l), c);
            }
        }
        FourierState::with_cutoff(coeffs, self.cfg.k).expect("active modes lie inside the cutoff")
    }

    fn linear_half(&self, s: &mut DenseState, sign: f64) {
        for &(slot, _) in &self.active {
            let p = self.half_phase[slot];
            s.data[slot] *= if sign > 0.0 { p } else { p.conj() };
        }
    }

    fn nonlinear(&mut self, s: &mut DenseState, dt: f64) {
        let mu = self.cfg.mu();
        if mu == 0.0 {
            return;
        }
        self.work.copy_from_slice(&s.data);
        self.grid.synthesize(&mut self.work);
        for z in self.work.iter_mut() {
            *z *= Complex64::from_polar(1.0, -mu * z.norm_sqr() * dt);
        }
        self.grid.analyze(&mut self.work);
        for (i, z) in self.work.iter().enumerate() {
            s.data[i] = if self.mask[i] { *z } else { Complex64::default() };
        }
    }

    /// One Strang step of size dt (or −dt when `backward`).
    pub fn step(&mut self, s: &mut DenseState, backward: bool) {
        let sign = if backward { -1.0 } else { 1.0 };
        self.linear_half(s, sign);
        self.nonlinear(s, sign * self.cfg.dt);
        self.linear_half(s, sign);
    }

    /// Σ|c|² over the active modes.
    pub fn coeff_l2_sq(&self, s: &DenseState) -> f64 {
        self.active.iter().map(|&(slot, _)| s.data[slot].norm_sqr()).sum()
    }

    pub fn mass(&self, s: &DenseState) -> f64 {
        TAU * TAU * self.coeff_l2_sq(s)
    }

    /// ∫|u|⁴ dx on the grid (exact for the truncated state).
    pub fn quartic(&mut self, s: &DenseState) -> f64 {
        self.work.copy_from_slice(&s.data);
        self.grid.synthesize(&mut self.work);
        self.grid.quartic_integral(&self.work)
    }

    /// E = ∫|∇u|² + (μ/2)∫|u|⁴.
    pub fn energy(&mut self, s: &DenseState) -> f64 {
        let l2 = (self.cfg.lattice * self.cfg.lattice) as f64;
        let kin: f64 = self
            .active
            .iter()
            .map(|&(slot, eta)| l2 * eta.norm2() as f64 * s.data[slot].norm_sqr())
            .sum();
        TAU * TAU * kin + 0.5 * self.cfg.mu() * self.quartic(s)
    }

    pub fn is_finite(&self, s: &DenseState) -> bool {
        self.coeff_l2_sq(s).is_finite()
    }
}

/// Single Strang step: half linear, exact pointwise rotation u·e^{−iμ|u|²dt},
/// truncation to |ξ|_∞ ≤ K, half linear.
pub fn strang_step(u: &FourierState, cfg: &NlsConfig) -> Result<FourierState> {
    let mut solver = Solver::new(cfg)?;
    let mut s = solver.to_dense(u)?;
    solver.step(&mut s, false);
    if !solver.is_finite(&s) {
        return Err(Error::Blowup { step: 1, t: cfg.dt });
    }
    Ok(solver.to_state(&s))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub state: FourierState,
    pub mass: f64,
    pub energy: f64,
    pub l4_slice: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
}

impl Trajectory {
    pub fn last(&self) -> &Sample {
        self.samples.last().expect("a trajectory always holds the initial sample")
    }

    pub fn max_mass_drift(&self) -> f64 {
        let m0 = self.samples[0].mass;
        self.samples
            .iter()
            .map(|s| (s.mass - m0).abs() / m0.max(1e-300))
            .fold(0.0, f64::max)
    }

    pub fn max_energy_drift(&self) -> f64 {
        let e0 = self.samples[0].energy;
        self.samples
            .iter()
            .map(|s| (s.energy - e0).abs() / e0.abs().max(1e-300))
            .fold(0.0, f64::max)
    }
}

fn sample(solver: &mut Solver, s: &DenseState, t: f64) -> Sample {
    let l4 = solver.quartic(s);
    let kin_energy = solver.energy(s);
    Sample {
        t,
        state: solver.to_state(s),
        mass: solver.mass(s),
        energy: kin_energy,
        l4_slice: l4,
    }
}

/// Repeated Strang steps up to t_end, sampling every `sample_every` steps and at the end.
pub fn evolve(u0: &FourierState, cfg: &NlsConfig) -> Result<Trajectory> {
    let mut solver = Solver::new(cfg)?;
    let mut s = solver.to_dense(u0)?;
    let steps = cfg.steps();
    let mut samples = vec![sample(&mut solver, &s, 0.0)];
    for n in 1..=steps {
        solver.step(&mut s, false);
        let t = n as f64 * cfg.dt;
        if !solver.is_finite(&s) {
            return Err(Error::Blowup { step: n, t });
        }
        if n % cfg.sample_every == 0 || n == steps {
            samples.push(sample(&mut solver, &s, t));
        }
    }
    Ok(Trajectory { samples })
}
