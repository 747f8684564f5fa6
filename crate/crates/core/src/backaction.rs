//! Dirac oscillator coupled to a bosonic measuring mode.
//!
//! The apparatus photon number `b̂†b̂` commutes with the total Hamiltonian, so a
//! diagonal photon distribution splits the problem into independent sectors.
//! In the sector with `n_b` photons the system evolves under
//! `H_DO + g·n_b·x̂ + f·σ̂z x̂`; the `ħω_b b̂†b̂` term is a sector-global phase.
//! System observables are the photon-weighted average over sectors.
//!
//! Forces `f`, `Δ` are in units of `ħω/(√2 x_zpt)` and positions are reported
//! as `⟨X̂⟩/(√2 x_zpt)`; both conventions coincide with plain model units
//! because `√2 x_zpt = 1`.

use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::fit::{fit_zitterbewegung_template, ZB_RESIDUAL_THRESHOLD};
use crate::hilbert::{build_quadratures, build_spin, BasisSpec, Operator, Pauli, QuantumState, Spin};
use crate::math::{sin, sqrt};
use crate::oscillator::{analytic_energy, build_h_do, build_h_nr, Branch, DiracParams};
use crate::propagate::{validate_times, Propagator, DEFAULT_DROP_TOL};
use crate::units::ModelUnits;
use crate::{Error, Result, C64};

/// Default truncation for backaction runs.
pub const DEFAULT_CUTOFF: usize = 128;
/// Maximum population allowed in the top Fock levels at any sampled time.
pub const DEFAULT_LEAKAGE_GATE: f64 = 1e-8;
/// Fraction of Fock levels treated as the truncation edge.
pub const DEFAULT_LEAKAGE_FRACTION: f64 = 0.1;

/// Which oscillator Hamiltonian drives the system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Dynamics {
    /// Full `H_DO`.
    FullDirac,
    /// `H_nr`, where `σ̂z` is conserved.
    NonRelativistic,
}

/// One photon-number sector of the apparatus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhotonSector {
    pub photons: u32,
    pub weight: f64,
}

/// Diagonal photon-number distribution of the measuring mode.
#[derive(Debug, Clone, PartialEq)]
pub struct ApparatusState {
    sectors: Vec<PhotonSector>,
}

impl ApparatusState {
    /// Sharp Fock state `|n_b⟩`.
    pub fn sharp(photons: u32) -> Self {
        Self { sectors: alloc::vec![PhotonSector { photons, weight: 1.0 }] }
    }

    /// Weights must be non-negative and sum to one within `1e-12`.
    pub fn distribution(sectors: impl IntoIterator<Item = (u32, f64)>) -> Result<Self> {
        let sectors: Vec<PhotonSector> =
            sectors.into_iter().map(|(photons, weight)| PhotonSector { photons, weight }).collect();
        if sectors.is_empty() {
            return Err(Error::invalid("apparatus", "empty photon distribution"));
        }
        if sectors.iter().any(|s| !(s.weight >= 0.0) || !s.weight.is_finite()) {
            return Err(Error::invalid("apparatus", "weights must be finite and non-negative"));
        }
        let total: f64 = sectors.iter().map(|s| s.weight).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::invalid("apparatus", alloc::format!("weights sum to {total}, not 1")));
        }
        Ok(Self { sectors })
    }

    /// Truncated Poisson distribution of mean `mean`, renormalized over `0..max_photons`.
    pub fn poisson(mean: f64, max_photons: u32) -> Result<Self> {
        if !(mean >= 0.0) {
            return Err(Error::invalid("apparatus", "mean photon number must be non-negative"));
        }
        let mut w = Vec::with_capacity(max_photons as usize + 1);
        let mut term = libm::exp(-mean);
        for k in 0..=max_photons {
            if k > 0 {
                term *= mean / k as f64;
            }
            w.push((k, term));
        }
        let total: f64 = w.iter().map(|(_, x)| x).sum();
        Self::distribution(w.into_iter().map(|(k, x)| (k, x / total)))
    }

    pub fn sectors(&self) -> &[PhotonSector] {
        &self.sectors
    }

    /// `⟨b̂†b̂⟩`
    pub fn mean_photons(&self) -> f64 {
        self.sectors.iter().map(|s| s.weight * s.photons as f64).sum()
    }
}

/// One backaction experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementConfig {
    pub epsilon: f64,
    /// Level `n ≥ 1` of `|Ψ_n⟩ = (|n,↑⟩ + |n−1,↓⟩)/√2`.
    pub level: usize,
    /// Dimensionless strength `G = √2 g⟨b̂†b̂⟩x_zpt/ħω = g⟨b̂†b̂⟩`.
    pub strength: f64,
    /// Spin-dependent force `f`.
    pub force: f64,
    pub apparatus: ApparatusState,
    /// Apparatus frequency; only a per-sector phase, kept for the composite check.
    pub omega_b: f64,
    pub times: Vec<f64>,
    pub basis: BasisSpec,
    pub leakage_gate: f64,
    pub leakage_fraction: f64,
}

impl MeasurementConfig {
    /// Defaults: cutoff 128, apparatus in `|1⟩`, `ω_b = 0`, leakage gate `1e-8` on the top 10%.
    pub fn new(epsilon: f64, level: usize, strength: f64, force: f64, times: Vec<f64>) -> Result<Self> {
        let cfg = Self {
            epsilon,
            level,
            strength,
            force,
            apparatus: ApparatusState::sharp(1),
            omega_b: 0.0,
            times,
            basis: BasisSpec::new(DEFAULT_CUTOFF)?,
            leakage_gate: DEFAULT_LEAKAGE_GATE,
            leakage_fraction: DEFAULT_LEAKAGE_FRACTION,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_basis(mut self, basis: BasisSpec) -> Self {
        self.basis = basis;
        self
    }

    pub fn with_apparatus(mut self, apparatus: ApparatusState) -> Self {
        self.apparatus = apparatus;
        self
    }

    pub fn validate(&self) -> Result<()> {
        ModelUnits::new(self.epsilon)?;
        if self.level == 0 {
            return Err(Error::invalid("level", "|Ψ_n⟩ needs n ≥ 1"));
        }
        if self.level >= self.basis.fock_cutoff() {
            return Err(Error::CutoffTooSmall { required: self.level + 1, cutoff: self.basis.fock_cutoff() });
        }
        if !(self.strength >= 0.0) || !self.strength.is_finite() {
            return Err(Error::invalid("strength", "G must be finite and ≥ 0"));
        }
        if !self.force.is_finite() || !self.omega_b.is_finite() {
            return Err(Error::invalid("force", "must be finite"));
        }
        if self.strength > 0.0 && self.apparatus.mean_photons() == 0.0 {
            return Err(Error::invalid("apparatus", "G > 0 needs a populated apparatus"));
        }
        if !(self.leakage_fraction > 0.0 && self.leakage_fraction < 1.0) {
            return Err(Error::invalid("leakage_fraction", "must lie in (0, 1)"));
        }
        validate_times(&self.times)
    }

    /// Bare coupling `g` such that `g⟨b̂†b̂⟩ = G`.
    pub fn coupling(&self) -> f64 {
        let mean = self.apparatus.mean_photons();
        if mean == 0.0 {
            0.0
        } else {
            self.strength / mean
        }
    }

    /// `Δ = √(2nε)·G`
    pub fn analytic_smearing(&self) -> f64 {
        sqrt(2.0 * self.level as f64 * self.epsilon) * self.strength
    }

    /// Exact Zitterbewegung angular frequency `2E_n⁺`.
    pub fn zitterbewegung_frequency(&self) -> f64 {
        2.0 * analytic_energy(self.level, Branch::Positive, self.epsilon)
    }
}

/// Sector Hamiltonian `H_osc + (g·n_b)·x̂ + f·σ̂z x̂`.
pub fn build_h_sector(epsilon: f64, g_times_nb: f64, force: f64, basis: BasisSpec, dynamics: Dynamics) -> Result<Operator> {
    let p = DiracParams { units: ModelUnits::new(epsilon)?, basis };
    let h0 = match dynamics {
        Dynamics::FullDirac => build_h_do(&p),
        Dynamics::NonRelativistic => build_h_nr(&p),
    };
    Ok(&h0 + &sector_coupling(basis, g_times_nb, force))
}

/// `(g·n_b + f σ̂z) x̂`
pub fn sector_coupling(basis: BasisSpec, g_times_nb: f64, force: f64) -> Operator {
    let (x, _) = build_quadratures(basis);
    let sz = build_spin(basis, Pauli::Z);
    &x.scale(g_times_nb) + &(&sz * &x).scale(force)
}

/// `|Ψ_n⟩ = (|n,↑⟩ + |n−1,↓⟩)/√2`
pub fn balanced_state(level: usize, basis: BasisSpec) -> Result<QuantumState> {
    if level == 0 {
        return Err(Error::invalid("level", "|Ψ_n⟩ needs n ≥ 1"));
    }
    let one = C64::new(1.0, 0.0);
    QuantumState::superposition(basis, &[(level, Spin::Up, one), (level - 1, Spin::Down, one)])
}

/// The collective observables `X̂ = x̂ I`, `Π̂ = p̂ σ̂z`, `Φ̂ = x̂ σ̂z`, `P̂ = p̂ I`.
#[derive(Debug, Clone)]
pub struct CollectiveObservables {
    pub x: Operator,
    pub pi: Operator,
    pub phi: Operator,
    pub p: Operator,
    pub sigma_z: Operator,
}

impl CollectiveObservables {
    pub fn new(basis: BasisSpec) -> Self {
        let (x, p) = build_quadratures(basis);
        let sigma_z = build_spin(basis, Pauli::Z);
        Self { pi: &p * &sigma_z, phi: &x * &sigma_z, x, p, sigma_z }
    }
}

/// Observables at one sampled time. Positions are `⟨X̂⟩/(√2 x_zpt)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryPoint {
    pub t: f64,
    pub exp_x: f64,
    /// `(ΔX̂)²`
    pub var_x: f64,
    pub exp_sigma_z: f64,
    pub exp_pi: f64,
    /// `(ΔΠ̂)²`
    pub var_pi: f64,
    pub leakage: f64,
}

impl TrajectoryPoint {
    /// `ΔX̂·ΔΠ̂ − |⟨σ̂z⟩|/2`, non-negative when the uncertainty relation holds.
    pub fn uncertainty_margin(&self) -> f64 {
        sqrt(self.var_x * self.var_pi) - 0.5 * self.exp_sigma_z.abs()
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    pub points: Vec<TrajectoryPoint>,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.t).collect()
    }

    pub fn positions(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.exp_x).collect()
    }

    pub fn max_leakage(&self) -> f64 {
        self.points.iter().map(|p| p.leakage).fold(0.0, f64::max)
    }

    pub fn min_uncertainty_margin(&self) -> f64 {
        self.points.iter().map(|p| p.uncertainty_margin()).fold(f64::INFINITY, f64::min)
    }
}

/// Evolves `|Ψ_n⟩` in every photon sector and averages the observables over
/// the photon distribution.
pub fn run_backaction(cfg: &MeasurementConfig, dynamics: Dynamics) -> Result<Trajectory> {
    cfg.validate()?;
    let psi0 = balanced_state(cfg.level, cfg.basis)?;
    let g = cfg.coupling();
    let obs = CollectiveObservables::new(cfg.basis);
    let gate = LeakageGate { basis: cfg.basis, fraction: cfg.leakage_fraction, limit: cfg.leakage_gate };
    let mut acc = alloc::vec![[0.0f64; 6]; cfg.times.len()];
    for sector in cfg.apparatus.sectors().iter().filter(|s| s.weight > 0.0) {
        let h = build_h_sector(cfg.epsilon, g * sector.photons as f64, cfg.force, cfg.basis, dynamics)?;
        accumulate_moments(&h, &psi0, &obs, &cfg.times, gate, sector.weight, &mut acc)?;
    }
    Ok(moments_to_trajectory(acc, &cfg.times))
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct LeakageGate {
    pub basis: BasisSpec,
    pub fraction: f64,
    pub limit: f64,
}

/// Adds `weight·[⟨X̂⟩, ⟨X̂²⟩, ⟨σ̂z⟩, ⟨Π̂⟩, ⟨Π̂²⟩, leakage]` at each time to `acc`.
pub(crate) fn accumulate_moments(
    h: &Operator,
    psi0: &QuantumState,
    obs: &CollectiveObservables,
    times: &[f64],
    gate: LeakageGate,
    weight: f64,
    acc: &mut [[f64; 6]],
) -> Result<()> {
    validate_times(times)?;
    let prop = Propagator::new(h)?;
    let red = prop.reduce(psi0, DEFAULT_DROP_TOL)?;
    let x2 = &obs.x * &obs.x;
    let pi2 = &obs.pi * &obs.pi;
    let reduced = [&obs.x, &x2, &obs.sigma_z, &obs.pi, &pi2].map(|o| red.project(o));
    let mut ws = red.workspace();
    for (row, &t) in acc.iter_mut().zip(times) {
        red.advance(t, &mut ws);
        let leak = red.leakage(gate.basis, gate.fraction, &mut ws);
        if leak > gate.limit {
            return Err(Error::LeakageExceeded { time: t, leakage: leak, gate: gate.limit });
        }
        for (slot, o) in row.iter_mut().zip(&reduced) {
            *slot += weight * red.expectation(o, &mut ws).re;
        }
        row[5] += weight * leak;
    }
    Ok(())
}

pub(crate) fn moments_to_trajectory(acc: Vec<[f64; 6]>, times: &[f64]) -> Trajectory {
    let points = acc
        .into_iter()
        .zip(times)
        .map(|(a, &t)| TrajectoryPoint {
            t,
            exp_x: a[0],
            var_x: (a[1] - a[0] * a[0]).max(0.0),
            exp_sigma_z: a[2],
            exp_pi: a[3],
            var_pi: (a[4] - a[3] * a[3]).max(0.0),
            leakage: a[5],
        })
        .collect();
    Trajectory { points }
}

/// Non-relativistic mean `⟨X̂(t)⟩ = −(2f/mω²) sin²(ωt/2)`.
pub fn analytic_x_nr(t: f64, force: f64) -> f64 {
    let s = sin(0.5 * t);
    -2.0 * force * s * s
}

/// Non-relativistic spread `ΔX̂ = x_zpt √(2n + 8G² sin⁴(ωt/2))` for a sharp
/// apparatus photon number.
pub fn analytic_delta_x_nr(t: f64, level: usize, strength: f64) -> f64 {
    let s = sin(0.5 * t);
    let s4 = s * s * s * s;
    core::f64::consts::FRAC_1_SQRT_2 * sqrt(2.0 * level as f64 + 8.0 * strength * strength * s4)
}

/// Mean position with the leading Zitterbewegung correction,
/// `−2[f + √(2nε) G sin(2mc²t/ħ)] sin²(ωt/2)`. Valid for `ε ≪ 1`.
pub fn analytic_x_corrected(t: f64, force: f64, level: usize, epsilon: f64, strength: f64) -> f64 {
    let drive = force + sqrt(2.0 * level as f64 * epsilon) * strength * sin(2.0 * t / epsilon);
    let s = sin(0.5 * t);
    -2.0 * drive * s * s
}

/// Exact free evolution of `⟨σ̂z⟩` from `|Ψ_n⟩`:
/// `√(2nε/(1+2nε)) sin(2E_n⁺t)`.
pub fn analytic_sigma_z(t: f64, level: usize, epsilon: f64) -> f64 {
    let x = 2.0 * level as f64 * epsilon;
    let amp = sqrt(x / (1.0 + x));
    amp * sin(2.0 * analytic_energy(level, Branch::Positive, epsilon) * t)
}

/// Two-oscillator reference with opposite masses, prepared in `|n⟩⊗|n−1⟩`
/// and normalized to the same `G = 0` spread as `|Ψ_n⟩`. Returns
/// `(⟨X̂⟩, ΔX̂)`; the apparatus strength has no effect on either.
pub fn qmfs_reference(t: f64, force: f64, _strength: f64, level: usize) -> (f64, f64) {
    (analytic_x_nr(t, force), analytic_delta_x_nr(t, level, 0.0))
}

/// Fitted and closed-form smearing of the measured force.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmearingEstimate {
    pub delta_fitted: f64,
    pub delta_analytic: f64,
    pub zb_frequency_fitted: f64,
    /// Peak of the windowed discrete Fourier amplitude of the slow-fit residual.
    pub zb_frequency_dft: f64,
    pub zb_frequency_exact: f64,
    /// `‖data − fit‖₂ / ‖data‖₂`
    pub residual: f64,
    /// Slow amplitude in the template, `−2f_fit sin²(ωt/2)`.
    pub force_fitted: f64,
    /// Raised when the residual exceeds the template threshold.
    pub regime_breakdown: bool,
}

/// Fits `⟨X̂(t)⟩` to the slow-plus-Zitterbewegung template and extracts `Δ`.
pub fn estimate_smearing(traj: &Trajectory, cfg: &MeasurementConfig) -> Result<SmearingEstimate> {
    let times = traj.times();
    let values = traj.positions();
    let exact = cfg.zitterbewegung_frequency();
    let fit = fit_zitterbewegung_template(&times, &values, cfg.epsilon, exact)?;
    Ok(SmearingEstimate {
        delta_fitted: 0.5 * fit.fast_amplitude(),
        delta_analytic: cfg.analytic_smearing(),
        zb_frequency_fitted: fit.frequency,
        zb_frequency_dft: fit.dft_frequency,
        zb_frequency_exact: exact,
        residual: fit.residual,
        force_fitted: fit.force(),
        regime_breakdown: fit.residual > ZB_RESIDUAL_THRESHOLD,
    })
}

/// `count` uniformly spaced times on `[0, t_end]`, both ends included.
pub fn uniform_times(t_end: f64, count: usize) -> Vec<f64> {
    if count < 2 {
        return alloc::vec![0.0; count];
    }
    let dt = t_end / (count - 1) as f64;
    (0..count).map(|k| k as f64 * dt).collect()
}

/// Uniform grid on `[0, t_end]` with at least `per_fast_period` samples per
/// leading-order Zitterbewegung period `πε`.
pub fn zitterbewegung_resolved_times(epsilon: f64, t_end: f64, per_fast_period: usize) -> Vec<f64> {
    let period = core::f64::consts::PI * epsilon;
    let count = libm::ceil(t_end / period * per_fast_period as f64) as usize + 1;
    uniform_times(t_end, count.max(2))
}

/// Full system ⊗ apparatus Hamiltonian
/// `H_osc ⊗ I + ω_b I ⊗ b̂†b̂ + g x̂ ⊗ b̂†b̂ + f σ̂z x̂ ⊗ I`, system index major.
pub fn build_composite_hamiltonian(
    epsilon: f64,
    coupling: f64,
    force: f64,
    omega_b: f64,
    basis: BasisSpec,
    apparatus_dim: usize,
    dynamics: Dynamics,
) -> Result<Operator> {
    if apparatus_dim < 1 {
        return Err(Error::invalid("apparatus_dim", "must be ≥ 1"));
    }
    let p = DiracParams { units: ModelUnits::new(epsilon)?, basis };
    let h_sys = match dynamics {
        Dynamics::FullDirac => build_h_do(&p),
        Dynamics::NonRelativistic => build_h_nr(&p),
    };
    let (x, _) = build_quadratures(basis);
    let sz = build_spin(basis, Pauli::Z);
    let nb = number_matrix(apparatus_dim);
    let id_app = DMatrix::<C64>::identity(apparatus_dim, apparatus_dim);
    let id_sys = DMatrix::<C64>::identity(basis.total_dim(), basis.total_dim());
    let fx = (&sz * &x).scale(force);
    let m = (h_sys.matrix() + fx.matrix()).kronecker(&id_app)
        + id_sys.kronecker(&nb) * C64::new(omega_b, 0.0)
        + (x.matrix() * C64::new(coupling, 0.0)).kronecker(&nb);
    Ok(Operator::from_matrix(m))
}

/// `A_sys ⊗ I_app`
pub fn lift_system_operator(op: &Operator, apparatus_dim: usize) -> Operator {
    Operator::from_matrix(op.matrix().kronecker(&DMatrix::<C64>::identity(apparatus_dim, apparatus_dim)))
}

/// `I_sys ⊗ b̂†b̂`
pub fn apparatus_number(system_dim: usize, apparatus_dim: usize) -> Operator {
    Operator::from_matrix(DMatrix::<C64>::identity(system_dim, system_dim).kronecker(&number_matrix(apparatus_dim)))
}

/// `|ψ_sys⟩ ⊗ Σ_k c_k |k⟩` for arbitrary apparatus amplitudes.
pub fn composite_product_state(system: &QuantumState, apparatus: &[C64]) -> Result<QuantumState> {
    let app = nalgebra::DVector::from_column_slice(apparatus);
    QuantumState::normalized(system.amplitudes().kronecker(&app))
}

fn number_matrix(dim: usize) -> DMatrix<C64> {
    DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(dim, (0..dim).map(|k| C64::new(k as f64, 0.0))))
}
