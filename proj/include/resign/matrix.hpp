// matrix.hpp — dense complex matrix helpers, Hermitian eigendecomposition and
// density-matrix validation.

#pragma once

#include <Eigen/Dense>

#include <complex>

#include "resign/errors.hpp"

namespace resign {

using cplx = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using Index = Eigen::Index;

inline constexpr cplx kI{0.0, 1.0};

/// Entrywise max-norm, the norm used for every tolerance in the library.
double max_norm(const ComplexMatrix& m);

/// ‖M − M†‖_max
double hermiticity_error(const ComplexMatrix& m);

/// AB − BA. Throws DimMismatch for unequal shapes.
ComplexMatrix commutator(const ComplexMatrix& a, const ComplexMatrix& b);

/// AB + BA. Throws DimMismatch for unequal shapes.
ComplexMatrix anticommutator(const ComplexMatrix& a, const ComplexMatrix& b);

/// (M + M†)/2
ComplexMatrix hermitian_part(const ComplexMatrix& m);

/// |i⟩⟨j| in a d-dimensional space (0-based indices).
ComplexMatrix basis_op(Index d, Index i, Index j);

struct HermitianEig {
    RealVector values;      // ascending
    ComplexMatrix vectors;  // columns are eigenvectors
};

/// Eigendecomposition of a Hermitian matrix with ascending eigenvalues.
/// The Hermiticity check uses tol·max(1, ‖M‖_max); NonHermitianInput otherwise.
HermitianEig hermitian_eig(const ComplexMatrix& m, double tol = 1e-9);

/// Validated density matrix: Hermitian, unit trace and positive semidefinite,
/// each within the tolerance it was validated with.
class DensityState {
public:
    const ComplexMatrix& matrix() const noexcept { return matrix_; }
    Index dim() const noexcept { return matrix_.rows(); }
    double tol() const noexcept { return tol_; }
    double min_eigenvalue() const noexcept { return min_eigenvalue_; }

private:
    DensityState(ComplexMatrix m, double tol, double min_eig)
        : matrix_(std::move(m)), tol_(tol), min_eigenvalue_(min_eig) {}
    friend DensityState validate_density(const ComplexMatrix&, double);

    ComplexMatrix matrix_;
    double tol_;
    double min_eigenvalue_;
};

/// Checks the density-matrix invariants in order (square/Hermitian, trace, PSD)
/// and throws InvalidDensity naming the first violation and its size.
DensityState validate_density(const ComplexMatrix& m, double tol = 1e-8);

namespace pauli {
ComplexMatrix identity();
ComplexMatrix x();
ComplexMatrix y();
ComplexMatrix z();
// Basis ordering is (excited, ground): index 0 is |e⟩.
ComplexMatrix lowering();  // σ− = |g⟩⟨e|
ComplexMatrix raising();   // σ+ = |e⟩⟨g|
}  // namespace pauli

}  // namespace resign
