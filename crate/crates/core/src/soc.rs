//! Spin-orbit-coupled condensate as a Dirac-oscillator analog.
//!
//! After the pseudo-spin rotation the single-atom Hamiltonian reads
//!
//! `H_s = ħ²k_r²/2m_a + ħ²k̂²/2m_a + (ħ²k_r/m_a) k̂ σ̂x − ħς x̂ σ̂y + ħχ σ̂z (+ ħδ/2 σ̂x)`
//!
//! which, without the `ħ²k̂²/2m_a` term, is `H_DO` with `c̃ = ħk_r/m_a` and
//! `m̃c̃² = ħχ` shifted by the constant `ħ²k_r²/2m_a`.
//!
//! Grid Hamiltonians are returned in units of `ħχ` and use a dense Fourier
//! (spectral) momentum operator on a periodic uniform grid. Grid index `j`
//! and pseudo-spin `s` share the layout of the Fock basis: `2j + s`.

use alloc::vec::Vec;

use nalgebra::{DMatrix, Matrix2};

use crate::hilbert::{Operator, Pauli};
use crate::math::{cos, sin, sqrt};
use crate::oscillator::{analytic_energy, Branch};
use crate::spectral::HermitianEigen;
use crate::{Error, Result, C64};

/// Reduced Planck constant in J·s.
pub const HBAR: f64 = 1.054_571_817e-34;

/// Laboratory parameters of the Raman-dressed condensate (SI units).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SocParams {
    /// Recoil wavenumber `k_r` (1/m).
    pub k_r: f64,
    /// Constant imaginary part `χ` of the Rabi coupling (rad/s).
    pub chi: f64,
    /// Rabi phase gradient rate `ς` (rad/(s·m)).
    pub sigma_slope: f64,
    /// Atomic mass (kg).
    pub m_a: f64,
    /// Two-photon detuning `δ` (rad/s).
    pub delta: f64,
}

impl SocParams {
    pub fn new(k_r: f64, chi: f64, sigma_slope: f64, m_a: f64) -> Result<Self> {
        let p = Self { k_r, chi, sigma_slope, m_a, delta: 0.0 };
        p.validate()?;
        Ok(p)
    }

    pub fn with_detuning(mut self, delta: f64) -> Result<Self> {
        self.delta = delta;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &'static str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::invalid(name, "must be finite and > 0"))
            }
        };
        positive("k_r", self.k_r)?;
        positive("m_a", self.m_a)?;
        if !(self.chi >= 0.0 && self.chi.is_finite()) {
            return Err(Error::invalid("chi", "must be finite and ≥ 0"));
        }
        if !(self.sigma_slope >= 0.0 && self.sigma_slope.is_finite()) {
            return Err(Error::invalid("sigma_slope", "must be finite and ≥ 0"));
        }
        if !self.delta.is_finite() {
            return Err(Error::invalid("delta", "must be finite"));
        }
        Ok(())
    }

    /// `ħ²k_r²/2m_a` in units of `ħχ`.
    fn recoil_offset(&self) -> f64 {
        HBAR * self.k_r * self.k_r / (2.0 * self.m_a * self.chi)
    }
}

/// `ς` that realizes a target `ε̃` for the given `k_r`, `χ`, `m_a`.
pub fn sigma_slope_for_epsilon(k_r: f64, chi: f64, m_a: f64, epsilon: f64) -> f64 {
    epsilon * m_a * chi * chi / (HBAR * k_r)
}

/// Effective Dirac-oscillator quantities of the condensate (SI units).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveParams {
    /// `c̃ = ħk_r/m_a` (m/s)
    pub c_eff: f64,
    /// `m̃ = χm_a²/(ħk_r²)` (kg)
    pub m_eff: f64,
    /// `λ̄_c = ħ/(m̃c̃) = ħk_r/(χm_a)` (m)
    pub compton_eff: f64,
    /// `Ω̃_zb = 2χ` (rad/s)
    pub zb_freq: f64,
    /// `ω̃ = ħk_rς/(m_aχ)` (rad/s)
    pub omega_eff: f64,
    /// `ε̃ = ħk_rς/(m_aχ²)`
    pub epsilon_eff: f64,
}

impl EffectiveParams {
    /// `ħω̃/(m̃c̃²)`, which must reproduce `ε̃`.
    pub fn epsilon_from_energies(&self) -> f64 {
        HBAR * self.omega_eff / (self.m_eff * self.c_eff * self.c_eff)
    }

    /// `λ̄_c m̃ c̃ / ħ`, which must equal one.
    pub fn compton_identity(&self) -> f64 {
        self.compton_eff * self.m_eff * self.c_eff / HBAR
    }

    /// Oscillator length `√(ħ/(m̃ω̃))`; infinite when `ς = 0`.
    pub fn oscillator_length(&self) -> f64 {
        if self.omega_eff > 0.0 {
            sqrt(HBAR / (self.m_eff * self.omega_eff))
        } else {
            f64::INFINITY
        }
    }
}

/// Maps the lab parameters onto the effective oscillator. Refuses `χ = 0` and `δ ≠ 0`.
pub fn map_parameters(p: &SocParams) -> Result<EffectiveParams> {
    p.validate()?;
    if p.chi == 0.0 {
        return Err(Error::invalid("chi", "χ = 0 leaves the effective rest mass at zero"));
    }
    if p.delta != 0.0 {
        return Err(Error::invalid("delta", "the Dirac-oscillator mapping holds only at zero detuning"));
    }
    let c_eff = HBAR * p.k_r / p.m_a;
    Ok(EffectiveParams {
        c_eff,
        m_eff: p.chi * p.m_a * p.m_a / (HBAR * p.k_r * p.k_r),
        compton_eff: c_eff / p.chi,
        zb_freq: 2.0 * p.chi,
        omega_eff: c_eff * p.sigma_slope / p.chi,
        epsilon_eff: c_eff * p.sigma_slope / (p.chi * p.chi),
    })
}

/// Order-of-magnitude scales of one physical platform, as text.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PlatformScale {
    pub platform: &'static str,
    pub velocity_of_light: &'static str,
    pub rest_mass: &'static str,
    pub compton_wavelength: &'static str,
    pub zb_frequency: &'static str,
    pub oscillator_frequency: &'static str,
    pub relativistic_parameter: &'static str,
}

/// Reference magnitudes for the electron and for condensate, circuit-QED
/// and trapped-ion analogs. Frequencies are in units of `2π × Hz`.
pub const PLATFORM_SCALES: [PlatformScale; 4] = [
    PlatformScale {
        platform: "electron",
        velocity_of_light: "1e8",
        rest_mass: "1e-31",
        compton_wavelength: "1e-12",
        zb_frequency: "1e21",
        oscillator_frequency: "ω",
        relativistic_parameter: "ħω/mc²",
    },
    PlatformScale {
        platform: "soc-condensate",
        velocity_of_light: "1e-2",
        rest_mass: "1e-27",
        compton_wavelength: "1e-5",
        zb_frequency: "1e3",
        oscillator_frequency: "0-1e4",
        relativistic_parameter: "0-10",
    },
    PlatformScale {
        platform: "cqed",
        velocity_of_light: "1e1",
        rest_mass: "1e-26",
        compton_wavelength: "1e-9",
        zb_frequency: "1e10",
        oscillator_frequency: "1e10",
        relativistic_parameter: "1",
    },
    PlatformScale {
        platform: "ion",
        velocity_of_light: "1e-3",
        rest_mass: "1e-23",
        compton_wavelength: "1e-8",
        zb_frequency: "1e5",
        oscillator_frequency: "1e6",
        relativistic_parameter: "1e1",
    },
];

/// Uniform periodic grid `x_j = x_min + j (x_max − x_min)/points` (SI metres).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SocGrid {
    pub x_min: f64,
    pub x_max: f64,
    pub points: usize,
}

/// Smallest grid accepted by [`build_soc_hamiltonian_grid`].
pub const MIN_GRID_POINTS: usize = 256;

impl SocGrid {
    pub fn new(x_min: f64, x_max: f64, points: usize) -> Result<Self> {
        if !(x_min.is_finite() && x_max.is_finite() && x_max > x_min) {
            return Err(Error::invalid("grid", "need finite x_min < x_max"));
        }
        if points < MIN_GRID_POINTS {
            return Err(Error::GridTooCoarse { reason: alloc::format!("{points} points, need ≥ {MIN_GRID_POINTS}") });
        }
        Ok(Self { x_min, x_max, points })
    }

    /// Symmetric box of `±half_widths` oscillator lengths (or reduced Compton
    /// wavelengths when `ς = 0`).
    pub fn centered(eff: &EffectiveParams, half_widths: f64, points: usize) -> Result<Self> {
        let l = eff.oscillator_length();
        let scale = if l.is_finite() { l } else { eff.compton_eff };
        Self::new(-half_widths * scale, half_widths * scale, points)
    }

    pub fn spacing(&self) -> f64 {
        (self.x_max - self.x_min) / self.points as f64
    }

    pub fn positions(&self) -> Vec<f64> {
        let dx = self.spacing();
        (0..self.points).map(|j| self.x_min + j as f64 * dx).collect()
    }

    /// Fourier wavenumbers in FFT order; the Nyquist entry is kept as `−π/dx`.
    pub fn wavenumbers(&self) -> Vec<f64> {
        let n = self.points as i64;
        let dk = 2.0 * core::f64::consts::PI / (self.spacing() * self.points as f64);
        (0..n).map(|m| if 2 * m < n { m } else { m - n }).map(|m| m as f64 * dk).collect()
    }

    /// Dense spectral matrices `(k̂, k̂²)`. The first-derivative Nyquist mode
    /// is zeroed so that `k̂` stays Hermitian.
    pub fn momentum_matrices(&self) -> (DMatrix<C64>, DMatrix<C64>) {
        let n = self.points;
        let ks = self.wavenumbers();
        let nyquist = if n % 2 == 0 { Some(n / 2) } else { None };
        let mut d1 = alloc::vec![C64::new(0.0, 0.0); n];
        let mut d2 = alloc::vec![C64::new(0.0, 0.0); n];
        for (d, (a1, a2)) in d1.iter_mut().zip(d2.iter_mut()).enumerate() {
            for (m, &k) in ks.iter().enumerate() {
                let theta = 2.0 * core::f64::consts::PI * ((m * d) % n) as f64 / n as f64;
                let z = C64::new(cos(theta), sin(theta));
                if Some(m) != nyquist {
                    *a1 += z * k;
                }
                *a2 += z * (k * k);
            }
            *a1 /= n as f64;
            *a2 /= n as f64;
        }
        let k1 = DMatrix::from_fn(n, n, |j, l| d1[(j + n - l) % n]);
        let k2 = DMatrix::from_fn(n, n, |j, l| d2[(j + n - l) % n]);
        (k1, k2)
    }
}

/// Whether the `ħ²k̂²/2m_a` term is kept.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KineticTerm {
    Included,
    Suppressed,
}

fn grid_operator(points: usize, parts: &[(&DMatrix<C64>, Matrix2<C64>)]) -> Operator {
    let mut m = DMatrix::<C64>::zeros(2 * points, 2 * points);
    for (space, spin) in parts {
        m += space.kronecker(spin);
    }
    Operator::from_matrix(m)
}

fn diagonal(values: impl Iterator<Item = f64>, n: usize) -> DMatrix<C64> {
    DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(n, values.map(|v| C64::new(v, 0.0))))
}

fn check_resolution(p: &SocParams, grid: &SocGrid) -> Result<()> {
    let c_eff = HBAR * p.k_r / p.m_a;
    let dx = grid.spacing();
    if p.sigma_slope > 0.0 {
        let l = sqrt(HBAR * p.k_r / (p.m_a * p.sigma_slope));
        if dx > 0.5 * l {
            return Err(Error::GridTooCoarse { reason: alloc::format!("spacing {dx:e} m exceeds half the oscillator length {l:e} m") });
        }
        if grid.x_min > -6.0 * l || grid.x_max < 6.0 * l {
            return Err(Error::GridTooCoarse { reason: alloc::format!("box must cover ±6 oscillator lengths ({l:e} m)") });
        }
    } else if dx > c_eff / p.chi {
        return Err(Error::GridTooCoarse { reason: "spacing exceeds the reduced Compton wavelength".into() });
    }
    Ok(())
}

/// Rotated-frame grid Hamiltonian in units of `ħχ`.
///
/// Requires `χ > 0` (the energy unit). A nonzero detuning contributes `(δ/2χ) σ̂x`.
pub fn build_soc_hamiltonian_grid(p: &SocParams, grid: &SocGrid, kinetic: KineticTerm) -> Result<Operator> {
    p.validate()?;
    if p.chi == 0.0 {
        return Err(Error::invalid("chi", "grid Hamiltonian is expressed in units of ħχ"));
    }
    check_resolution(p, grid)?;
    let n = grid.points;
    let (k1, k2) = grid.momentum_matrices();
    let c_over_chi = HBAR * p.k_r / (p.m_a * p.chi);
    let x = diagonal(grid.positions().into_iter().map(|x| -p.sigma_slope / p.chi * x), n);
    let id = DMatrix::<C64>::identity(n, n);
    let sx = Pauli::X.matrix();
    let mut parts = alloc::vec![
        (&k1 * C64::new(c_over_chi, 0.0), sx),
        (x, Pauli::Y.matrix()),
        (id.clone(), Pauli::Z.matrix()),
    ];
    if p.delta != 0.0 {
        parts.push((&id * C64::new(0.5 * p.delta / p.chi, 0.0), sx));
    }
    if kinetic == KineticTerm::Included {
        parts.push((k2 * C64::new(HBAR / (2.0 * p.m_a * p.chi), 0.0), Matrix2::identity()));
    }
    let refs: Vec<(&DMatrix<C64>, Matrix2<C64>)> = parts.iter().map(|(m, s)| (m, *s)).collect();
    Ok(grid_operator(n, &refs).shift(p.recoil_offset()))
}

/// `c̃ p̂ σ̂x − c̃ m̃ ω̃ x̂ σ̂y + m̃c̃² σ̂z` on the grid, built from the mapped
/// quantities alone, in units of `ħχ = m̃c̃²`.
pub fn build_mapped_do_grid(eff: &EffectiveParams, grid: &SocGrid) -> Operator {
    let n = grid.points;
    let (k1, _) = grid.momentum_matrices();
    let rest = eff.m_eff * eff.c_eff * eff.c_eff;
    let speed = eff.c_eff * HBAR / rest;
    let spring = eff.c_eff * eff.m_eff * eff.omega_eff / rest;
    let x = diagonal(grid.positions().into_iter().map(|x| -spring * x), n);
    let k = &k1 * C64::new(speed, 0.0);
    let id = DMatrix::<C64>::identity(n, n);
    grid_operator(n, &[(&k, Pauli::X.matrix()), (&x, Pauli::Y.matrix()), (&id, Pauli::Z.matrix())])
}

/// One level of [`ComparisonReport`]. Energies are in units of `ħχ` above the
/// recoil offset `ħ²k_r²/2m_a`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonRow {
    pub n: usize,
    pub soc_kinetic: f64,
    pub soc_no_kinetic: f64,
    pub do_analytic: f64,
    /// `|soc_no_kinetic − do_analytic| / do_analytic`
    pub rel_error_no_kinetic: f64,
    /// `|soc_kinetic − soc_no_kinetic| / soc_no_kinetic`
    pub kinetic_shift: f64,
    /// `√⟨k²⟩ / k_r` estimated from the mapped oscillator level.
    pub k_over_kr: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub effective: EffectiveParams,
    pub grid: SocGrid,
    pub rows: Vec<ComparisonRow>,
    /// Population of the retained eigenvectors in the top half of the
    /// Fourier band or the outer fifth of the box.
    pub aliasing_weight: f64,
    /// Positive-energy edge-bound or doubler states left out of `rows`.
    pub artifact_states: usize,
}

/// Largest `√⟨k²⟩/k_r` for which the `k ≪ k_r` approximation is reported as valid.
pub const VALIDITY_K_RATIO: f64 = 0.1;
/// Largest acceptable [`ComparisonReport::aliasing_weight`].
pub const ALIASING_TOL: f64 = 1e-10;

impl ComparisonReport {
    pub fn max_rel_error_no_kinetic(&self) -> f64 {
        self.rows.iter().map(|r| r.rel_error_no_kinetic).fold(0.0, f64::max)
    }

    /// Kinetic-term shifts never decrease with level index.
    pub fn kinetic_shift_monotone(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].kinetic_shift >= w[0].kinetic_shift)
    }

    /// All levels satisfy `√⟨k²⟩/k_r ≤ VALIDITY_K_RATIO`.
    pub fn valid(&self) -> bool {
        self.rows.iter().all(|r| r.k_over_kr <= VALIDITY_K_RATIO)
    }
}

/// Box-edge or high-band population above which an eigenvector counts as a
/// grid artifact rather than an oscillator level.
const ARTIFACT_WEIGHT: f64 = 0.5;

/// Weight of eigenvector `col` in the outer fifth of the box.
fn edge_weight(grid: &SocGrid, eig: &HermitianEigen, col: usize) -> f64 {
    let centre = 0.5 * (grid.x_min + grid.x_max);
    let edge = 0.4 * (grid.x_max - grid.x_min);
    let v = eig.vectors().column(col);
    grid.positions()
        .iter()
        .enumerate()
        .filter(|(_, x)| (*x - centre).abs() > edge)
        .map(|(j, _)| v[2 * j].norm_sqr() + v[2 * j + 1].norm_sqr())
        .sum()
}

/// Columns of the lowest `n_levels` positive energies above `offset`, skipping
/// grid artifacts. Returns the columns and the number of skipped states.
fn bulk_positive_columns(grid: &SocGrid, eig: &HermitianEigen, offset: f64, n_levels: usize) -> Result<(Vec<usize>, usize)> {
    let mut cols = Vec::with_capacity(n_levels);
    let mut skipped = 0;
    for (col, &v) in eig.values().iter().enumerate() {
        if cols.len() == n_levels {
            break;
        }
        if v - offset <= 0.0 {
            continue;
        }
        if edge_weight(grid, eig, col) > ARTIFACT_WEIGHT || high_band_weight(grid, eig, col) > ARTIFACT_WEIGHT {
            skipped += 1;
        } else {
            cols.push(col);
        }
    }
    if cols.len() < n_levels {
        return Err(Error::GridTooCoarse { reason: alloc::format!("only {} positive bulk levels on the grid", cols.len()) });
    }
    Ok((cols, skipped))
}

/// For each reference column, the column of `eig` with the largest overlap.
fn track_by_overlap(reference: &HermitianEigen, cols: &[usize], eig: &HermitianEigen) -> Vec<usize> {
    cols.iter()
        .map(|&c| {
            let r = reference.vectors().column(c);
            let overlaps = eig.vectors().adjoint() * r;
            overlaps.iter().enumerate().fold((0, -1.0), |best, (k, z)| if z.norm_sqr() > best.1 { (k, z.norm_sqr()) } else { best }).0
        })
        .collect()
}

/// Compares the lowest `n_levels` positive-branch energies of the grid
/// Hamiltonian, with and without the kinetic term, against the mapped
/// Dirac oscillator.
///
/// Two kinds of grid state have no oscillator counterpart. The periodic box
/// turns the linear mass term `−ςxσ_y` into a sawtooth whose jump binds states
/// at the edge, and the Nyquist plane wave has `k̂ = 0`, so it carries a
/// doubler band `√(1 + (ςx)²)` straight through the low-energy window. Both
/// are dropped and counted in [`ComparisonReport::artifact_states`].
/// Kinetic-term levels are matched to the kinetic-free ones by eigenvector overlap.
pub fn compare_soc_vs_do(p: &SocParams, grid: &SocGrid, n_levels: usize) -> Result<ComparisonReport> {
    let eff = map_parameters(p)?;
    if p.sigma_slope == 0.0 {
        return Err(Error::invalid("sigma_slope", "the comparison needs a confining ς > 0"));
    }
    if n_levels == 0 {
        return Err(Error::invalid("n_levels", "must be ≥ 1"));
    }
    let offset = p.recoil_offset();
    let eig0 = HermitianEigen::new(&build_soc_hamiltonian_grid(p, grid, KineticTerm::Suppressed)?)?;
    let eig_k = HermitianEigen::new(&build_soc_hamiltonian_grid(p, grid, KineticTerm::Included)?)?;
    let (cols, artifact_states) = bulk_positive_columns(grid, &eig0, offset, n_levels)?;
    let cols_k = track_by_overlap(&eig0, &cols, &eig_k);
    let aliasing_weight = aliasing_weight(grid, &eig0, &cols);

    let eps = eff.epsilon_eff;
    let l = eff.oscillator_length();
    let rows = (0..n_levels)
        .map(|n| {
            let no_kin = eig0.values()[cols[n]] - offset;
            let kin = eig_k.values()[cols_k[n]] - offset;
            let analytic = analytic_energy(n, Branch::Positive, eps) * eps;
            let (a, b) = crate::oscillator::analytic_coefficients(n, eps);
            let p2 = a * a * (n as f64 + 0.5) + b * b * (n as f64 - 0.5).max(0.0);
            ComparisonRow {
                n,
                soc_kinetic: kin,
                soc_no_kinetic: no_kin,
                do_analytic: analytic,
                rel_error_no_kinetic: (no_kin - analytic).abs() / analytic,
                kinetic_shift: (kin - no_kin).abs() / no_kin,
                k_over_kr: sqrt(p2) / (l * p.k_r),
            }
        })
        .collect();
    Ok(ComparisonReport { effective: eff, grid: *grid, rows, aliasing_weight, artifact_states })
}

/// Weight of eigenvector `col` in the top half of the Fourier band.
fn high_band_weight(grid: &SocGrid, eig: &HermitianEigen, col: usize) -> f64 {
    let n = grid.points;
    let ks = grid.wavenumbers();
    let k_half = 0.5 * ks.iter().fold(0.0f64, |m, k| m.max(k.abs()));
    let v = eig.vectors().column(col);
    let mut weight = 0.0;
    for (m, k) in ks.iter().enumerate() {
        if k.abs() <= k_half {
            continue;
        }
        for s in 0..2 {
            let mut acc = C64::new(0.0, 0.0);
            for j in 0..n {
                let theta = -2.0 * core::f64::consts::PI * ((m * j) % n) as f64 / n as f64;
                acc += v[2 * j + s] * C64::new(cos(theta), sin(theta));
            }
            weight += acc.norm_sqr() / n as f64;
        }
    }
    weight
}

fn aliasing_weight(grid: &SocGrid, eig: &HermitianEigen, cols: &[usize]) -> f64 {
    cols.iter()
        .map(|&c| edge_weight(grid, eig, c).max(high_band_weight(grid, eig, c)))
        .fold(0.0, f64::max)
}

/// Closed-form positive branch of the `ς = 0`, kinetic-free grid problem in
/// units of `ħχ` above the recoil offset: `√((λ̄_c k)² + 1)` per grid wavenumber
/// (Nyquist mode excluded from the linear term).
pub fn free_dispersion(p: &SocParams, grid: &SocGrid) -> Vec<f64> {
    let lambda = HBAR * p.k_r / (p.m_a * p.chi);
    let n = grid.points;
    let mut out: Vec<f64> = grid
        .wavenumbers()
        .into_iter()
        .enumerate()
        .map(|(m, k)| if n % 2 == 0 && m == n / 2 { 0.0 } else { k })
        .map(|k| sqrt(lambda * lambda * k * k + 1.0))
        .collect();
    out.sort_by(f64::total_cmp);
    out
}
