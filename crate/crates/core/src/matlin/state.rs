use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{hermitian_eigenvalues, CMatrix, TOL_HERM, TOL_PSD, TOL_TRACE, ZERO};
use crate::error::{Error, Result};

/// Local dimensions `(m, n)` of a bipartite system `A (x) B`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SubsystemDims {
    m: usize,
    n: usize,
}

impl SubsystemDims {
    pub fn new(m: usize, n: usize) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(Error::DimensionMismatch(format!(
                "subsystem dimensions must be positive, got {m}x{n}"
            )));
        }
        Ok(Self { m, n })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Dimension of the joint space, `m * n`.
    pub fn total(&self) -> usize {
        self.m * self.n
    }

    /// Checks that `mat` is square of size `m * n`.
    pub fn check_square(&self, mat: &CMatrix) -> Result<()> {
        let size = self.total();
        if mat.shape() != (size, size) {
            return Err(Error::DimensionMismatch(format!(
                "expected a {size}x{size} matrix for {self}, got {}x{}",
                mat.rows(),
                mat.cols()
            )));
        }
        Ok(())
    }
}

impl fmt::Display for SubsystemDims {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.m, self.n)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Subsystem {
    A,
    B,
}

/// A validated bipartite density matrix.
///
/// Construction checks Hermiticity (entrywise, [`TOL_HERM`]), unit trace
/// ([`TOL_TRACE`]) and positivity (smallest eigenvalue above [`TOL_PSD`]).
#[derive(Debug, Clone, PartialEq)]
pub struct DensityState {
    dims: SubsystemDims,
    mat: CMatrix,
}

impl DensityState {
    pub fn new(dims: SubsystemDims, mat: CMatrix) -> Result<Self> {
        let state = Self::new_unchecked(dims, mat)?;
        state.validate()?;
        Ok(state)
    }

    /// Skips the density-matrix invariants; only the shape is checked.
    pub fn new_unchecked(dims: SubsystemDims, mat: CMatrix) -> Result<Self> {
        dims.check_square(&mat)?;
        Ok(Self { dims, mat })
    }

    pub fn validate(&self) -> Result<()> {
        let deviation = self.mat.hermitian_deviation().unwrap_or(f64::INFINITY);
        if deviation > TOL_HERM {
            return Err(Error::InvariantViolation(format!(
                "not Hermitian: max |rho_ij - conj(rho_ji)| = {deviation:e}"
            )));
        }
        let tr = self.mat.trace();
        if (tr.re - 1.0).abs() > TOL_TRACE || tr.im.abs() > TOL_TRACE {
            return Err(Error::InvariantViolation(format!("trace is {tr}, expected 1")));
        }
        let min_eig = hermitian_eigenvalues(&self.mat)?[0];
        if min_eig < TOL_PSD {
            return Err(Error::InvariantViolation(format!(
                "not positive semidefinite: smallest eigenvalue {min_eig:e}"
            )));
        }
        Ok(())
    }

    pub fn dims(&self) -> SubsystemDims {
        self.dims
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> CMatrix {
        self.mat
    }

    /// `rho_A = Tr_B rho`.
    pub fn reduced_a(&self) -> CMatrix {
        partial_trace(self, Subsystem::B)
    }

    /// `rho_B = Tr_A rho`.
    pub fn reduced_b(&self) -> CMatrix {
        partial_trace(self, Subsystem::A)
    }
}

/// Traces out `traced_out`, returning the reduced matrix of the other party.
pub fn partial_trace(rho: &DensityState, traced_out: Subsystem) -> CMatrix {
    partial_trace_matrix(&rho.mat, rho.dims, traced_out).expect("DensityState shape is checked at construction")
}

/// [`partial_trace`] for an arbitrary `(m n) x (m n)` matrix.
pub fn partial_trace_matrix(mat: &CMatrix, dims: SubsystemDims, traced_out: Subsystem) -> Result<CMatrix> {
    dims.check_square(mat)?;
    let (m, n) = (dims.m, dims.n);
    Ok(match traced_out {
        Subsystem::B => CMatrix::from_fn(m, m, |i, j| {
            (0..n).fold(ZERO, |acc: Complex64, mu| acc + mat[(i * n + mu, j * n + mu)])
        }),
        Subsystem::A => CMatrix::from_fn(n, n, |mu, nu| {
            (0..m).fold(ZERO, |acc: Complex64, i| acc + mat[(i * n + mu, i * n + nu)])
        }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matlin::kron;
    use approx::assert_abs_diff_eq;

    fn real(rows: usize, data: &[f64]) -> CMatrix {
        CMatrix::from_real(rows, data.len() / rows, data).unwrap()
    }

    #[test]
    fn dims_validation() {
        assert!(SubsystemDims::new(0, 3).is_err());
        let d = SubsystemDims::new(2, 3).unwrap();
        assert_eq!(d.total(), 6);
        assert!(d.check_square(&CMatrix::zeros(6, 6)).is_ok());
        assert!(d.check_square(&CMatrix::zeros(5, 5)).is_err());
    }

    #[test]
    fn density_state_invariants() {
        let dims = SubsystemDims::new(2, 2).unwrap();
        let mixed = CMatrix::identity(4).scale(Complex64::new(0.25, 0.0));
        assert!(DensityState::new(dims, mixed).is_ok());

        let low_trace = CMatrix::identity(4).scale(Complex64::new(0.2, 0.0));
        assert!(matches!(
            DensityState::new(dims, low_trace.clone()),
            Err(Error::InvariantViolation(_))
        ));
        assert!(DensityState::new_unchecked(dims, low_trace).is_ok());

        let negative = real(
            4,
            &[
                0.5, 0.0, 0.0, 0.0, 0.0, 0.6, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, -0.1,
            ],
        );
        assert!(matches!(
            DensityState::new(dims, negative),
            Err(Error::InvariantViolation(_))
        ));

        let mut skew = CMatrix::identity(4).scale(Complex64::new(0.25, 0.0));
        skew[(0, 1)] = Complex64::new(0.01, 0.0);
        assert!(matches!(
            DensityState::new(dims, skew),
            Err(Error::InvariantViolation(_))
        ));
    }

    #[test]
    fn partial_trace_of_product() {
        let a = real(2, &[0.7, 0.2, 0.2, 0.3]);
        let b = real(3, &[0.5, 0.1, 0.0, 0.1, 0.3, 0.05, 0.0, 0.05, 0.2]);
        let dims = SubsystemDims::new(2, 3).unwrap();
        let rho = DensityState::new(dims, kron(&a, &b)).unwrap();
        assert!(rho.reduced_a().max_abs_diff(&a) < 1e-15);
        assert!(rho.reduced_b().max_abs_diff(&b) < 1e-15);
        assert_abs_diff_eq!(rho.reduced_a().trace().re, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn partial_trace_matrix_traces_unnormalized_factor() {
        // Tr_B(A (x) B) = A Tr(B)
        let a = real(2, &[1.0, 2.0, 3.0, 4.0]);
        let b = real(2, &[2.0, 0.5, -1.0, 3.0]);
        let dims = SubsystemDims::new(2, 2).unwrap();
        let pt = partial_trace_matrix(&kron(&a, &b), dims, Subsystem::B).unwrap();
        assert!(pt.max_abs_diff(&a.scale(Complex64::new(5.0, 0.0))) < 1e-14);
    }
}
