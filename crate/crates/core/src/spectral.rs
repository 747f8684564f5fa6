//! Hermitian eigendecomposition and spectral matrix functions.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::hilbert::Operator;
use crate::math::{atan2, sqrt};
use crate::{Error, Result, C64};

/// Relative Hermiticity tolerance for Hamiltonian-role operators.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Eigenpairs of a Hermitian operator, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    values: DVector<f64>,
    vectors: DMatrix<C64>,
}

impl HermitianEigen {
    /// Full decomposition; fails on a non-Hermitian input or when the residual
    /// `max |HV - VΛ|` exceeds `1e-9·max(1, max|H|)`.
    pub fn new(op: &Operator) -> Result<Self> {
        let scale = op.max_abs().max(1.0);
        let defect = op.hermitian_defect();
        if defect > HERMITIAN_TOL * scale {
            return Err(Error::NotHermitian { defect });
        }
        let eig = op.matrix().clone().symmetric_eigen();
        let n = op.dim();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = DVector::from_iterator(n, order.iter().map(|&k| eig.eigenvalues[k]));
        let mut vectors = DMatrix::zeros(n, n);
        for (dst, &src) in order.iter().enumerate() {
            vectors.set_column(dst, &eig.eigenvectors.column(src));
        }
        let out = Self { values, vectors };
        let residual = out.residual(op);
        if !(residual <= 1e-9 * scale) {
            return Err(Error::EigensolverFailure { residual });
        }
        Ok(out)
    }

    /// Eigenvalues only (cheaper; no residual check).
    pub fn values_only(op: &Operator) -> Result<DVector<f64>> {
        let scale = op.max_abs().max(1.0);
        let defect = op.hermitian_defect();
        if defect > HERMITIAN_TOL * scale {
            return Err(Error::NotHermitian { defect });
        }
        let mut v: Vec<f64> = op.matrix().clone().symmetric_eigenvalues().iter().copied().collect();
        v.sort_by(f64::total_cmp);
        Ok(DVector::from_vec(v))
    }

    pub fn values(&self) -> &DVector<f64> {
        &self.values
    }

    pub fn vectors(&self) -> &DMatrix<C64> {
        &self.vectors
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// `max |HV - VΛ|`
    pub fn residual(&self, op: &Operator) -> f64 {
        let hv = op.matrix() * &self.vectors;
        let mut worst = 0.0f64;
        for k in 0..self.dim() {
            let lam = self.values[k];
            for i in 0..self.dim() {
                worst = worst.max((hv[(i, k)] - self.vectors[(i, k)] * lam).norm());
            }
        }
        worst
    }

    /// Smallest gap between consecutive eigenvalues.
    pub fn min_gap(&self) -> f64 {
        self.values
            .as_slice()
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min)
    }

    /// `V f(Λ) V†`
    pub fn apply_fn(&self, f: impl Fn(f64) -> C64) -> Operator {
        let n = self.dim();
        let mut scaled = self.vectors.clone();
        for k in 0..n {
            let w = f(self.values[k]);
            for i in 0..n {
                scaled[(i, k)] *= w;
            }
        }
        Operator::from_matrix(scaled * self.vectors.adjoint())
    }
}

/// Principal square root of a positive operator. Fails with the smallest
/// eigenvalue when it is not strictly positive.
pub fn spectral_sqrt(op: &Operator) -> Result<Operator> {
    let eig = HermitianEigen::new(op)?;
    let min = eig.values()[0];
    if !(min > 0.0) {
        return Err(Error::NotPositive { min_eigenvalue: min });
    }
    Ok(eig.apply_fn(|l| C64::new(sqrt(l), 0.0)))
}

/// Inverse of a Hermitian operator through its spectrum.
pub fn spectral_inverse(op: &Operator) -> Result<Operator> {
    let eig = HermitianEigen::new(op)?;
    if eig.values().iter().any(|&l| l == 0.0) {
        return Err(Error::NotPositive { min_eigenvalue: 0.0 });
    }
    Ok(eig.apply_fn(|l| C64::new(1.0 / l, 0.0)))
}

/// Multiplies `v` by `e^{-i arg⟨reference|v⟩}` so its overlap with `reference` is real and non-negative.
pub fn align_phase(reference: &DVector<C64>, v: &DVector<C64>) -> DVector<C64> {
    let ov = reference.dotc(v);
    if ov.norm() == 0.0 {
        return v.clone();
    }
    let theta = atan2(ov.im, ov.re);
    v * crate::math::phase(theta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{build_quadratures, build_spin, BasisSpec, Pauli};

    #[test]
    fn sorted_and_accurate() {
        let b = BasisSpec::new(10).unwrap();
        let (x, p) = build_quadratures(b);
        let h = &(&x * &x) + &(&p * &build_spin(b, Pauli::X));
        let eig = HermitianEigen::new(&h).unwrap();
        assert!(eig.values().as_slice().windows(2).all(|w| w[0] <= w[1]));
        assert!(eig.residual(&h) < 1e-12);
        let vals = HermitianEigen::values_only(&h).unwrap();
        for (a, b) in vals.iter().zip(eig.values().iter()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_non_hermitian() {
        let b = BasisSpec::new(3).unwrap();
        let (x, p) = build_quadratures(b);
        let bad = &x * &p;
        assert!(matches!(HermitianEigen::new(&bad), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn sqrt_squares_back() {
        let b = BasisSpec::new(8).unwrap();
        let (x, p) = build_quadratures(b);
        let pos = (&(&x * &x) + &(&p * &p)).shift(3.0);
        let r = spectral_sqrt(&pos).unwrap();
        assert!((&r * &r).max_abs_diff(&pos) < 1e-12);
        assert!(r.hermitian_defect() < 1e-12);
        let neg = pos.shift(-100.0);
        assert!(matches!(spectral_sqrt(&neg), Err(Error::NotPositive { .. })));
    }

    #[test]
    fn inverse() {
        let b = BasisSpec::new(6).unwrap();
        let z = build_spin(b, Pauli::Z).shift(0.5);
        let inv = spectral_inverse(&z).unwrap();
        assert!((&inv * &z).max_abs_diff(&Operator::identity(12)) < 1e-12);
    }

    #[test]
    fn phase_alignment() {
        let r = DVector::from_vec(alloc::vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)]);
        let v = DVector::from_vec(alloc::vec![C64::new(0.0, 2.0), C64::new(1.0, 0.0)]);
        let a = align_phase(&r, &v);
        let ov = r.dotc(&a);
        assert!(ov.im.abs() < 1e-15 && ov.re > 0.0);
    }
}
