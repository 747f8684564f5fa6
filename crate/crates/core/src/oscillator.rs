//! The Dirac-oscillator Hamiltonian family and its closed-form spectrum.
//!
//! In model units `H_DO = c σ̂x p̂ − c σ̂y x̂ + c² σ̂z` with `c² = mc² = 1/ε`.
//! It couples `|n,↑⟩` only to `|n−1,↓⟩`, so the truncated matrix is block
//! diagonal in exactly the 2×2 blocks of the infinite problem. The one
//! exception is `|N−1,↓⟩`, whose partner `|N,↑⟩` is cut off; it is left as an
//! isolated edge state at energy `−mc²`.

use alloc::vec::Vec;

use crate::hilbert::{build_number, build_quadratures, build_spin, leakage_of, BasisSpec, Operator, Pauli, QuantumState, Spin};
use crate::math::sqrt;
use crate::spectral::{align_phase, HermitianEigen};
use crate::units::ModelUnits;
use crate::{Error, Result, C64};

/// Energy branch of the Dirac oscillator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    Positive,
    Negative,
}

/// Relativistic parameter plus truncation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiracParams {
    pub units: ModelUnits,
    pub basis: BasisSpec,
}

impl DiracParams {
    pub fn new(epsilon: f64, fock_cutoff: usize) -> Result<Self> {
        Ok(Self { units: ModelUnits::new(epsilon)?, basis: BasisSpec::new(fock_cutoff)? })
    }

    pub fn epsilon(&self) -> f64 {
        self.units.epsilon()
    }
}

/// `E_n⁺ = mc²√(1+2nε)` and `E_n⁻ = −E_{n+1}⁺`, in units of `ħω`.
pub fn analytic_energy(n: usize, branch: Branch, epsilon: f64) -> f64 {
    match branch {
        Branch::Positive => sqrt(1.0 + 2.0 * n as f64 * epsilon) / epsilon,
        Branch::Negative => -analytic_energy(n + 1, Branch::Positive, epsilon),
    }
}

/// `(A_n, B_n)` with `A_n² = (E_n⁺+mc²)/2E_n⁺` and `B_n² = (E_n⁺−mc²)/2E_n⁺`.
///
/// Written in terms of `s = √(1+2nε)` to avoid cancellation when `ε → 0`.
pub fn analytic_coefficients(n: usize, epsilon: f64) -> (f64, f64) {
    let s = sqrt(1.0 + 2.0 * n as f64 * epsilon);
    let a2 = (s + 1.0) / (2.0 * s);
    let b2 = n as f64 * epsilon / (s * (s + 1.0));
    (sqrt(a2), sqrt(b2))
}

/// Closed-form eigenstates
/// `|E_n⁺⟩ = A_n|n,↑⟩ − iB_n|n−1,↓⟩` and `|E_n⁻⟩ = B_{n+1}|n+1,↑⟩ + iA_{n+1}|n,↓⟩`.
pub fn analytic_eigenstate(n: usize, branch: Branch, p: &DiracParams) -> Result<QuantumState> {
    let cutoff = p.basis.fock_cutoff();
    let eps = p.epsilon();
    let terms: Vec<(usize, Spin, C64)> = match branch {
        Branch::Positive => {
            if n >= cutoff {
                return Err(Error::CutoffTooSmall { required: n + 1, cutoff });
            }
            let (a, b) = analytic_coefficients(n, eps);
            if n == 0 {
                alloc::vec![(0, Spin::Up, C64::new(1.0, 0.0))]
            } else {
                alloc::vec![(n, Spin::Up, C64::new(a, 0.0)), (n - 1, Spin::Down, C64::new(0.0, -b))]
            }
        }
        Branch::Negative => {
            if n + 1 >= cutoff {
                return Err(Error::CutoffTooSmall { required: n + 2, cutoff });
            }
            let (a, b) = analytic_coefficients(n + 1, eps);
            alloc::vec![(n + 1, Spin::Up, C64::new(b, 0.0)), (n, Spin::Down, C64::new(0.0, a))]
        }
    };
    let mut v = nalgebra::DVector::zeros(p.basis.total_dim());
    for (level, s, c) in terms {
        v[p.basis.index(level, s)] = c;
    }
    QuantumState::from_amplitudes(v)
}

/// `H_DO = c σ̂x p̂ − mcω σ̂y x̂ + mc² σ̂z`.
pub fn build_h_do(p: &DiracParams) -> Operator {
    let mc2 = p.units.rest_energy();
    &build_h_weyl(p) + &build_spin(p.basis, Pauli::Z).scale(mc2)
}

/// Weyl limit `H_r = c σ̂x p̂ − c mω σ̂y x̂`.
pub fn build_h_weyl(p: &DiracParams) -> Operator {
    let c = p.units.speed_of_light();
    let (x, mom) = build_quadratures(p.basis);
    let sx = build_spin(p.basis, Pauli::X);
    let sy = build_spin(p.basis, Pauli::Y);
    &(&sx * &mom).scale(c) - &(&sy * &x).scale(c)
}

/// Non-relativistic limit `(mc² + p̂²/2m + mω²x̂²/2) σ̂z − ħω/2`.
///
/// The oscillator part is built as `â†â + 1/2`, which equals `p̂²/2 + x̂²/2`
/// on every level but the top one, where the truncated quadratures disagree.
pub fn build_h_nr(p: &DiracParams) -> Operator {
    let mc2 = p.units.rest_energy();
    let osc = build_number(p.basis).shift(mc2 + 0.5);
    (&osc * &build_spin(p.basis, Pauli::Z)).shift(-0.5)
}

/// One row of a spectrum comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumRow {
    pub n: usize,
    pub branch: Branch,
    pub numeric: f64,
    pub analytic: f64,
    pub abs_error: f64,
    /// `|⟨numeric|analytic⟩|²`
    pub overlap: f64,
    /// `max |v_numeric − v_analytic|` after phase alignment.
    pub max_component_error: f64,
}

/// Numeric versus closed-form spectrum of `H_DO` on low levels.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumReport {
    pub epsilon: f64,
    pub fock_cutoff: usize,
    pub n_max: usize,
    pub rows: Vec<SpectrumRow>,
    /// Interior-supported numeric levels with `|E| ≤ E_{n_max}⁺`.
    pub window_count: usize,
    /// Closed-form levels in the same window (`2·n_max + 1`).
    pub expected_window_count: usize,
    pub min_gap: f64,
}

impl SpectrumReport {
    pub const ENERGY_TOL: f64 = 1e-9;
    pub const OVERLAP_TOL: f64 = 1e-9;

    /// Largest energy error in units of `mc²`.
    pub fn max_energy_error(&self) -> f64 {
        self.rows.iter().map(|r| r.abs_error).fold(0.0, f64::max) * self.epsilon
    }

    pub fn min_overlap(&self) -> f64 {
        self.rows.iter().map(|r| r.overlap).fold(1.0, f64::min)
    }

    pub fn passes(&self) -> bool {
        self.max_energy_error() <= Self::ENERGY_TOL
            && self.min_overlap() >= 1.0 - Self::OVERLAP_TOL
            && self.window_count == self.expected_window_count
    }
}

/// Diagonalizes `H_DO` and compares every level `n ≤ n_max` of both branches
/// with the closed forms. Requires `n_max ≤ N/4`.
pub fn validate_spectrum(p: &DiracParams, n_max: usize) -> Result<SpectrumReport> {
    let cutoff = p.basis.fock_cutoff();
    if 4 * n_max > cutoff {
        return Err(Error::CutoffTooSmall { required: 4 * n_max, cutoff });
    }
    let h = build_h_do(p);
    let eig = HermitianEigen::new(&h)?;
    let min_gap = eig.min_gap();
    if !(min_gap > 1e-8) {
        return Err(Error::Degenerate { gap: min_gap });
    }
    let eps = p.epsilon();
    let values = eig.values();
    let mut rows = Vec::with_capacity(2 * (n_max + 1));
    for n in 0..=n_max {
        for branch in [Branch::Positive, Branch::Negative] {
            let analytic = analytic_energy(n, branch, eps);
            let k = nearest(values.as_slice(), analytic);
            let state = analytic_eigenstate(n, branch, p)?;
            let numeric_vec = eig.vectors().column(k).into_owned();
            let leak = leakage_of(&numeric_vec, p.basis, 0.1);
            if leak > 1e-8 {
                return Err(Error::LeakageExceeded { time: 0.0, leakage: leak, gate: 1e-8 });
            }
            let aligned = align_phase(state.amplitudes(), &numeric_vec);
            let overlap = state.amplitudes().dotc(&aligned).norm_sqr();
            let max_component_error = (&aligned - state.amplitudes()).iter().fold(0.0f64, |m, z| m.max(z.norm()));
            rows.push(SpectrumRow {
                n,
                branch,
                numeric: values[k],
                analytic,
                abs_error: (values[k] - analytic).abs(),
                overlap,
                max_component_error,
            });
        }
    }
    let bound = analytic_energy(n_max, Branch::Positive, eps) * (1.0 + 1e-12);
    let window_count = (0..eig.dim())
        .filter(|&k| values[k].abs() <= bound)
        .filter(|&k| leakage_of(&eig.vectors().column(k).into_owned(), p.basis, 0.1) <= 1e-8)
        .count();
    Ok(SpectrumReport {
        epsilon: eps,
        fock_cutoff: cutoff,
        n_max,
        rows,
        window_count,
        expected_window_count: 2 * n_max + 1,
        min_gap,
    })
}

fn nearest(sorted: &[f64], target: f64) -> usize {
    let mut best = 0;
    for (k, v) in sorted.iter().enumerate() {
        if (v - target).abs() < (sorted[best] - target).abs() {
            best = k;
        }
    }
    best
}

/// Energies `E_n^±/mc²` along an `ε` grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyCurvePoint {
    pub epsilon: f64,
    pub n: usize,
    pub positive: f64,
    pub negative: f64,
}

/// Component weights `|A_n|²`, `|B_n|²` along an `ε` grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightCurvePoint {
    pub epsilon: f64,
    pub n: usize,
    pub a_squared: f64,
    pub b_squared: f64,
}

pub fn energy_curves(epsilons: &[f64], levels: usize) -> Vec<EnergyCurvePoint> {
    epsilons
        .iter()
        .flat_map(|&eps| {
            (0..levels).map(move |n| EnergyCurvePoint {
                epsilon: eps,
                n,
                positive: analytic_energy(n, Branch::Positive, eps) * eps,
                negative: analytic_energy(n, Branch::Negative, eps) * eps,
            })
        })
        .collect()
}

pub fn weight_curves(epsilons: &[f64], levels: usize) -> Vec<WeightCurvePoint> {
    epsilons
        .iter()
        .flat_map(|&eps| {
            (0..levels).map(move |n| {
                let (a, b) = analytic_coefficients(n, eps);
                WeightCurvePoint { epsilon: eps, n, a_squared: a * a, b_squared: b * b }
            })
        })
        .collect()
}
