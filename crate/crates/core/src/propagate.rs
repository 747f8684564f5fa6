//! Exact time propagation `ψ(t) = e^{-iHt} ψ₀` through one Hermitian
//! eigendecomposition per Hamiltonian.
//!
//! [`ReducedDynamics`] keeps only eigencomponents that carry population, so a
//! trajectory with `M` samples costs `O(M·K²)` per observable where `K` is the
//! number of populated eigenstates, independent of the cutoff.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::hilbert::{BasisSpec, Operator, QuantumState};
use crate::math::phase;
use crate::spectral::HermitianEigen;
use crate::{Error, Result, C64};

/// Allowed `|‖ψ(t)‖ - 1|`.
pub const NORM_DRIFT_TOL: f64 = 1e-10;

/// Default per-component population below which an eigencomponent is dropped.
pub const DEFAULT_DROP_TOL: f64 = 1e-30;

/// Propagator for a fixed Hermitian Hamiltonian.
#[derive(Debug, Clone)]
pub struct Propagator {
    eigen: HermitianEigen,
}

impl Propagator {
    pub fn new(hamiltonian: &Operator) -> Result<Self> {
        Ok(Self { eigen: HermitianEigen::new(hamiltonian)? })
    }

    pub fn eigen(&self) -> &HermitianEigen {
        &self.eigen
    }

    pub fn dim(&self) -> usize {
        self.eigen.dim()
    }

    /// Eigenbasis coefficients `V†ψ`.
    pub fn coefficients(&self, psi: &QuantumState) -> Result<DVector<C64>> {
        if psi.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: psi.dim() });
        }
        Ok(self.eigen.vectors().ad_mul(psi.amplitudes()))
    }

    pub fn state_at(&self, psi0: &QuantumState, t: f64) -> Result<QuantumState> {
        let c = self.coefficients(psi0)?;
        self.state_from_coefficients(&c, t)
    }

    fn state_from_coefficients(&self, c: &DVector<C64>, t: f64) -> Result<QuantumState> {
        let values = self.eigen.values();
        let evolved = DVector::from_iterator(c.len(), c.iter().zip(values.iter()).map(|(ck, &e)| ck * phase(e * t)));
        let amps = self.eigen.vectors() * evolved;
        let drift = (amps.norm() - 1.0).abs();
        if drift > NORM_DRIFT_TOL {
            return Err(Error::NormDrift { time: t, drift });
        }
        QuantumState::from_amplitudes(amps)
    }

    /// States at each time; `times` must be finite and non-decreasing.
    pub fn evolve(&self, psi0: &QuantumState, times: &[f64]) -> Result<Vec<QuantumState>> {
        validate_times(times)?;
        let c = self.coefficients(psi0)?;
        times.iter().map(|&t| self.state_from_coefficients(&c, t)).collect()
    }

    /// Restricts the dynamics of `psi0` to eigencomponents with population above `drop_tol`.
    pub fn reduce(&self, psi0: &QuantumState, drop_tol: f64) -> Result<ReducedDynamics> {
        let c = self.coefficients(psi0)?;
        let keep: Vec<usize> = (0..c.len()).filter(|&k| c[k].norm_sqr() > drop_tol).collect();
        let dropped: f64 = (0..c.len()).filter(|k| !keep.contains(k)).map(|k| c[k].norm_sqr()).sum();
        let kept_norm = keep.iter().map(|&k| c[k].norm_sqr()).sum::<f64>();
        let drift = (libm::sqrt(kept_norm) - 1.0).abs();
        if drift > NORM_DRIFT_TOL {
            return Err(Error::NormDrift { time: 0.0, drift });
        }
        let energies = keep.iter().map(|&k| self.eigen.values()[k]).collect();
        let coeffs = DVector::from_iterator(keep.len(), keep.iter().map(|&k| c[k]));
        let mut vectors = DMatrix::zeros(self.dim(), keep.len());
        for (j, &k) in keep.iter().enumerate() {
            vectors.set_column(j, &self.eigen.vectors().column(k));
        }
        Ok(ReducedDynamics { energies, coeffs, vectors, dropped_weight: dropped })
    }
}

/// `ψ(t) = e^{-iHt}ψ₀` at each requested time.
pub fn evolve(hamiltonian: &Operator, psi0: &QuantumState, times: &[f64]) -> Result<Vec<QuantumState>> {
    Propagator::new(hamiltonian)?.evolve(psi0, times)
}

pub fn validate_times(times: &[f64]) -> Result<()> {
    if times.iter().any(|t| !t.is_finite()) {
        return Err(Error::invalid("times", "must be finite"));
    }
    if times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::invalid("times", "must be ascending"));
    }
    Ok(())
}

/// Dynamics of one initial state restricted to its populated eigencomponents.
#[derive(Debug, Clone)]
pub struct ReducedDynamics {
    energies: Vec<f64>,
    coeffs: DVector<C64>,
    vectors: DMatrix<C64>,
    dropped_weight: f64,
}

/// Observable in the reduced eigenbasis.
#[derive(Debug, Clone)]
pub struct ReducedObservable(DMatrix<C64>);

/// Scratch space for repeated evaluations.
#[derive(Debug, Clone)]
pub struct Workspace {
    amps: DVector<C64>,
    buf: DVector<C64>,
    rows: DVector<C64>,
}

impl ReducedDynamics {
    /// Number of retained eigencomponents.
    pub fn rank(&self) -> usize {
        self.energies.len()
    }

    pub fn dropped_weight(&self) -> f64 {
        self.dropped_weight
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn coefficients(&self) -> &DVector<C64> {
        &self.coeffs
    }

    pub fn workspace(&self) -> Workspace {
        let k = self.rank();
        Workspace { amps: DVector::zeros(k), buf: DVector::zeros(k), rows: DVector::zeros(0) }
    }

    /// `V_K† A V_K`
    pub fn project(&self, op: &Operator) -> ReducedObservable {
        ReducedObservable(self.vectors.ad_mul(&(op.matrix() * &self.vectors)))
    }

    /// Loads `c_k e^{-iE_k t}` into the workspace.
    pub fn advance(&self, t: f64, ws: &mut Workspace) {
        for (k, (&e, &c)) in self.energies.iter().zip(self.coeffs.iter()).enumerate() {
            ws.amps[k] = c * phase(e * t);
        }
    }

    /// `⟨ψ(t)|A|ψ(t)⟩` for the time last loaded by [`advance`](Self::advance).
    pub fn expectation(&self, obs: &ReducedObservable, ws: &mut Workspace) -> C64 {
        ws.buf.gemv(C64::new(1.0, 0.0), &obs.0, &ws.amps, C64::new(0.0, 0.0));
        ws.amps.dotc(&ws.buf)
    }

    /// Population of the top `ceil(fraction·N)` Fock levels at the loaded time.
    pub fn leakage(&self, basis: BasisSpec, fraction: f64, ws: &mut Workspace) -> f64 {
        let start = 2 * (basis.fock_cutoff() - basis.top_levels(fraction));
        let rows = self.vectors.nrows() - start;
        if ws.rows.len() != rows {
            ws.rows = DVector::zeros(rows);
        }
        ws.rows.gemv(C64::new(1.0, 0.0), &self.vectors.rows(start, rows), &ws.amps, C64::new(0.0, 0.0));
        ws.rows.norm_squared()
    }

    /// Full state at the loaded time.
    pub fn state(&self, ws: &Workspace) -> DVector<C64> {
        &self.vectors * &ws.amps
    }

    /// Squared norm of the loaded amplitudes.
    pub fn norm_squared(&self, ws: &Workspace) -> f64 {
        ws.amps.norm_squared()
    }
}
