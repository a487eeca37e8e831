#pragma once

#include <complex>
#include <cstddef>

namespace lambdaflow {

using cplx = std::complex<double>;

// Dense eigensolvers for the small per-node matrices (n <= 8).
// All routines return eigenvalues in DESCENDING order; eigenvector columns
// follow their eigenvalues and are orthonormal.

/// Cyclic-by-row complex Jacobi. A is n x n row-major Hermitian (only read);
/// evecs may be null when only values are wanted. Throws NumericalError if
/// the off-diagonal norm has not converged after max_sweeps.
void jacobi_hermitian(const cplx* A, int n, double* evals, cplx* evecs,
                      int max_sweeps = 100);

/// Real symmetric variant (used for finite-difference Hessians of f).
void jacobi_symmetric(const double* A, int n, double* evals, double* evecs = nullptr,
                      int max_sweeps = 100);

/// Closed-form 2x2 Hermitian eigenpairs.
void eig2_hermitian(const cplx* A, double* evals, cplx* evecs);

/// Trigonometric (Cardano) eigenvalues of a 3x3 Hermitian matrix with a
/// Newton polish on the characteristic polynomial for well-separated roots.
void eig3_hermitian_values(const cplx* A, double* evals);

/// Values-only dispatch: analytic for n <= 3, Jacobi otherwise.
void hermitian_eigenvalues(const cplx* A, int n, double* evals);

}  // namespace lambdaflow
