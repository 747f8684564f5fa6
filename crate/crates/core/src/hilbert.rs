//! Truncated harmonic oscillator ⊗ spin-1/2 Hilbert space.
//!
//! The Fock factor keeps levels `0..N`, and the composite index of `|n, s⟩` is
//! `2n + s` (spin up = 0). Ladder operators are truncated by dropping the
//! matrix element that would leave the space, so `[â, â†] = I` holds exactly
//! on levels `0..N-1` while the top diagonal entry of the commutator equals
//! `-(N-1)`.

use alloc::vec::Vec;
use core::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector, Matrix2};

use crate::math::sqrt;
use crate::{Error, Result, C64};

const NORM_TOL: f64 = 1e-10;

/// Spin projection along z.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Spin {
    Up,
    Down,
}

impl Spin {
    pub fn offset(self) -> usize {
        match self {
            Spin::Up => 0,
            Spin::Down => 1,
        }
    }
}

/// Pauli matrix selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pauli {
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn matrix(self) -> Matrix2<C64> {
        let o = C64::new(0.0, 0.0);
        let one = C64::new(1.0, 0.0);
        let i = C64::new(0.0, 1.0);
        match self {
            Pauli::X => Matrix2::new(o, one, one, o),
            Pauli::Y => Matrix2::new(o, -i, i, o),
            Pauli::Z => Matrix2::new(one, o, o, -one),
        }
    }
}

/// Shape of the truncated space: `N` Fock levels times a spin-1/2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BasisSpec {
    fock_cutoff: usize,
}

impl BasisSpec {
    pub fn new(fock_cutoff: usize) -> Result<Self> {
        if fock_cutoff < 2 {
            return Err(Error::invalid("fock_cutoff", "need at least 2 Fock levels"));
        }
        Ok(Self { fock_cutoff })
    }

    pub fn fock_cutoff(&self) -> usize {
        self.fock_cutoff
    }

    pub const fn spin_dim(&self) -> usize {
        2
    }

    pub fn total_dim(&self) -> usize {
        2 * self.fock_cutoff
    }

    /// Composite index of `|n, s⟩`.
    pub fn index(&self, n: usize, spin: Spin) -> usize {
        debug_assert!(n < self.fock_cutoff);
        2 * n + spin.offset()
    }

    /// Number of Fock levels in the top `fraction` of the space, rounded up.
    pub fn top_levels(&self, fraction: f64) -> usize {
        let k = libm::ceil(fraction * self.fock_cutoff as f64) as usize;
        k.min(self.fock_cutoff)
    }

    /// Composite indices whose Fock level is below `levels`.
    pub fn interior_indices(&self, levels: usize) -> Vec<usize> {
        (0..2 * levels.min(self.fock_cutoff)).collect()
    }
}

/// Dense complex operator on the composite space.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator(DMatrix<C64>);

impl Operator {
    pub fn from_matrix(matrix: DMatrix<C64>) -> Self {
        assert!(matrix.is_square(), "operators are square");
        Self(matrix)
    }

    pub fn zeros(dim: usize) -> Self {
        Self(DMatrix::zeros(dim, dim))
    }

    pub fn identity(dim: usize) -> Self {
        Self(DMatrix::identity(dim, dim))
    }

    /// `fock ⊗ spin` in the interleaved ordering.
    pub fn fock_tensor_spin(fock: &DMatrix<C64>, spin: &Matrix2<C64>) -> Self {
        Self(fock.kronecker(spin))
    }

    /// Diagonal operator with real entries.
    pub fn from_real_diagonal(diag: impl IntoIterator<Item = f64>) -> Self {
        let v: Vec<C64> = diag.into_iter().map(|d| C64::new(d, 0.0)).collect();
        Self(DMatrix::from_diagonal(&DVector::from_vec(v)))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.0
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn scale(&self, s: f64) -> Self {
        Self(&self.0 * C64::new(s, 0.0))
    }

    pub fn scale_complex(&self, s: C64) -> Self {
        Self(&self.0 * s)
    }

    /// `self + s·I`
    pub fn shift(&self, s: f64) -> Self {
        let mut m = self.0.clone();
        for i in 0..m.nrows() {
            m[(i, i)] += s;
        }
        Self(m)
    }

    pub fn commutator(&self, other: &Operator) -> Operator {
        Self(&self.0 * &other.0 - &other.0 * &self.0)
    }

    pub fn anticommutator(&self, other: &Operator) -> Operator {
        Self(&self.0 * &other.0 + &other.0 * &self.0)
    }

    /// `max |H - H†|` entrywise.
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for j in 0..n {
            for i in 0..=j {
                let d = (self.0[(i, j)] - self.0[(j, i)].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    /// `max |A_ij|`
    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0f64, |m, z| m.max(z.norm()))
    }

    /// `max |A_ij - B_ij|`
    pub fn max_abs_diff(&self, other: &Operator) -> f64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .fold(0.0f64, |m, (a, b)| m.max((a - b).norm()))
    }

    /// Square block on the given composite indices.
    pub fn restrict(&self, indices: &[usize]) -> Operator {
        let k = indices.len();
        Self(DMatrix::from_fn(k, k, |i, j| self.0[(indices[i], indices[j])]))
    }

    /// `max |U†U - I|` entrywise.
    pub fn unitarity_defect(&self) -> f64 {
        let p = self.0.adjoint() * &self.0;
        let id = DMatrix::<C64>::identity(self.dim(), self.dim());
        Operator(p).max_abs_diff(&Operator(id))
    }

    pub fn apply(&self, psi: &QuantumState) -> Result<DVector<C64>> {
        check_dim(self.dim(), psi.dim())?;
        Ok(&self.0 * psi.amplitudes())
    }

    /// Frobenius norm.
    pub fn frobenius(&self) -> f64 {
        self.0.norm()
    }
}

impl Add for &Operator {
    type Output = Operator;
    fn add(self, rhs: &Operator) -> Operator {
        Operator(&self.0 + &rhs.0)
    }
}

impl Sub for &Operator {
    type Output = Operator;
    fn sub(self, rhs: &Operator) -> Operator {
        Operator(&self.0 - &rhs.0)
    }
}

impl Mul for &Operator {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        Operator(&self.0 * &rhs.0)
    }
}

impl Neg for &Operator {
    type Output = Operator;
    fn neg(self) -> Operator {
        Operator(-&self.0)
    }
}

impl Add for Operator {
    type Output = Operator;
    fn add(self, rhs: Operator) -> Operator {
        Operator(self.0 + rhs.0)
    }
}

impl Sub for Operator {
    type Output = Operator;
    fn sub(self, rhs: Operator) -> Operator {
        Operator(self.0 - rhs.0)
    }
}

impl Mul for Operator {
    type Output = Operator;
    fn mul(self, rhs: Operator) -> Operator {
        Operator(self.0 * rhs.0)
    }
}

/// Normalized state vector.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState(DVector<C64>);

impl QuantumState {
    /// Wraps amplitudes that are already normalized to `1e-10`.
    pub fn from_amplitudes(amplitudes: DVector<C64>) -> Result<Self> {
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized { norm });
        }
        Ok(Self(amplitudes))
    }

    /// Normalizes arbitrary nonzero amplitudes.
    pub fn normalized(amplitudes: DVector<C64>) -> Result<Self> {
        let norm = amplitudes.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::NotNormalized { norm });
        }
        Ok(Self(amplitudes / C64::new(norm, 0.0)))
    }

    /// The product basis state `|n, s⟩`.
    pub fn basis_state(basis: BasisSpec, n: usize, spin: Spin) -> Result<Self> {
        if n >= basis.fock_cutoff() {
            return Err(Error::CutoffTooSmall { required: n + 1, cutoff: basis.fock_cutoff() });
        }
        let mut v = DVector::zeros(basis.total_dim());
        v[basis.index(n, spin)] = C64::new(1.0, 0.0);
        Ok(Self(v))
    }

    /// Normalized superposition `Σ c_k |n_k, s_k⟩`.
    pub fn superposition(basis: BasisSpec, terms: &[(usize, Spin, C64)]) -> Result<Self> {
        let mut v = DVector::zeros(basis.total_dim());
        for &(n, s, c) in terms {
            if n >= basis.fock_cutoff() {
                return Err(Error::CutoffTooSmall { required: n + 1, cutoff: basis.fock_cutoff() });
            }
            v[basis.index(n, s)] += c;
        }
        Self::normalized(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.0
    }

    pub fn into_amplitudes(self) -> DVector<C64> {
        self.0
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    /// `⟨self|other⟩`
    pub fn inner(&self, other: &QuantumState) -> Result<C64> {
        check_dim(self.dim(), other.dim())?;
        Ok(self.0.dotc(&other.0))
    }

    /// Population of the top `ceil(top_fraction·N)` Fock levels, both spins.
    pub fn leakage(&self, basis: BasisSpec, top_fraction: f64) -> f64 {
        leakage_of(&self.0, basis, top_fraction)
    }
}

pub(crate) fn leakage_of(amps: &DVector<C64>, basis: BasisSpec, top_fraction: f64) -> f64 {
    let k = basis.top_levels(top_fraction);
    let start = 2 * (basis.fock_cutoff() - k);
    amps.rows(start, amps.len() - start).norm_squared()
}

fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// Fock-space annihilation operator (without the spin factor).
pub fn fock_annihilation(n_levels: usize) -> DMatrix<C64> {
    let mut a = DMatrix::zeros(n_levels, n_levels);
    for n in 1..n_levels {
        a[(n - 1, n)] = C64::new(sqrt(n as f64), 0.0);
    }
    a
}

/// `â ⊗ I₂`: `â|n⟩ = √n|n-1⟩`. The truncated `â†` has no element leaving level `N-1`.
pub fn build_ladder(basis: BasisSpec) -> Operator {
    Operator::fock_tensor_spin(&fock_annihilation(basis.fock_cutoff()), &Matrix2::identity())
}

/// `â†â ⊗ I₂`, exact on every retained level.
pub fn build_number(basis: BasisSpec) -> Operator {
    Operator::from_real_diagonal((0..basis.total_dim()).map(|i| (i / 2) as f64))
}

/// Position and momentum `x̂ = x_zpt(â + â†)`, `p̂ = (i/√2)(â† - â)` with `x_zpt = 1/√2`.
pub fn build_quadratures(basis: BasisSpec) -> (Operator, Operator) {
    let a = fock_annihilation(basis.fock_cutoff());
    let ad = a.adjoint();
    let s = core::f64::consts::FRAC_1_SQRT_2;
    let x = (&a + &ad) * C64::new(s, 0.0);
    let p = (&ad - &a) * C64::new(0.0, s);
    let id = Matrix2::identity();
    (Operator::fock_tensor_spin(&x, &id), Operator::fock_tensor_spin(&p, &id))
}

/// Pauli operator tensored with the Fock identity.
pub fn build_spin(basis: BasisSpec, which: Pauli) -> Operator {
    let id = DMatrix::<C64>::identity(basis.fock_cutoff(), basis.fock_cutoff());
    Operator::fock_tensor_spin(&id, &which.matrix())
}

/// Projector on the top `ceil(top_fraction·N)` Fock levels.
pub fn top_projector(basis: BasisSpec, top_fraction: f64) -> Operator {
    let k = basis.top_levels(top_fraction);
    let first = basis.fock_cutoff() - k;
    Operator::from_real_diagonal((0..basis.total_dim()).map(|i| if i / 2 >= first { 1.0 } else { 0.0 }))
}

/// `⟨ψ|A|ψ⟩`
pub fn expectation(psi: &QuantumState, op: &Operator) -> Result<C64> {
    let v = op.apply(psi)?;
    Ok(psi.amplitudes().dotc(&v))
}

/// Real expectation of a Hermitian operator; rejects an imaginary part above `1e-10`.
pub fn expectation_real(psi: &QuantumState, op: &Operator) -> Result<f64> {
    let z = expectation(psi, op)?;
    if z.im.abs() > 1e-10 * z.re.abs().max(1.0) {
        return Err(Error::NotHermitian { defect: z.im.abs() });
    }
    Ok(z.re)
}

/// Population in the top `ceil(top_fraction·N)` Fock levels.
pub fn leakage(psi: &QuantumState, basis: BasisSpec, top_fraction: f64) -> Result<f64> {
    check_dim(basis.total_dim(), psi.dim())?;
    if !(top_fraction > 0.0 && top_fraction < 1.0) {
        return Err(Error::invalid("top_fraction", "must lie in (0, 1)"));
    }
    Ok(psi.leakage(basis, top_fraction))
}
