#include "resign/matrix.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

namespace resign {

namespace {

void require_same_shape(const ComplexMatrix& a, const ComplexMatrix& b, const char* what) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw DimMismatch(std::string(what) + ": operand shapes differ");
    }
}

}  // namespace

double max_norm(const ComplexMatrix& m) {
    if (m.size() == 0) return 0.0;
    return m.cwiseAbs().maxCoeff();
}

double hermiticity_error(const ComplexMatrix& m) {
    if (m.rows() != m.cols()) throw DimMismatch("hermiticity_error: matrix is not square");
    return max_norm(m - m.adjoint());
}

ComplexMatrix commutator(const ComplexMatrix& a, const ComplexMatrix& b) {
    require_same_shape(a, b, "commutator");
    return a * b - b * a;
}

ComplexMatrix anticommutator(const ComplexMatrix& a, const ComplexMatrix& b) {
    require_same_shape(a, b, "anticommutator");
    return a * b + b * a;
}

ComplexMatrix hermitian_part(const ComplexMatrix& m) {
    return 0.5 * (m + m.adjoint());
}

ComplexMatrix basis_op(Index d, Index i, Index j) {
    if (d <= 0) throw DimMismatch("basis_op: dimension must be positive");
    if (i < 0 || j < 0 || i >= d || j >= d) throw DimMismatch("basis_op: index out of range");
    ComplexMatrix m = ComplexMatrix::Zero(d, d);
    m(i, j) = 1.0;
    return m;
}

HermitianEig hermitian_eig(const ComplexMatrix& m, double tol) {
    if (m.rows() != m.cols()) throw DimMismatch("hermitian_eig: matrix is not square");
    const double dev = hermiticity_error(m);
    if (dev > tol * std::max(1.0, max_norm(m))) throw NonHermitianInput(dev);

    // Householder tridiagonalization followed by implicit QL; eigenvalues come
    // back ascending.
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(hermitian_part(m));
    if (solver.info() != Eigen::Success) {
        throw Error("hermitian_eig: eigensolver did not converge");
    }
    return {solver.eigenvalues(), solver.eigenvectors()};
}

DensityState validate_density(const ComplexMatrix& m, double tol) {
    using V = InvalidDensity::Violation;
    if (m.rows() != m.cols() || m.rows() == 0) throw DimMismatch("validate_density: matrix is not square");
    const double herm = hermiticity_error(m);
    if (herm > tol) throw InvalidDensity(V::NotHermitian, herm);
    const double trace_err = std::abs(m.trace() - cplx(1.0, 0.0));
    if (trace_err > tol) throw InvalidDensity(V::TraceNotOne, trace_err);
    const auto eig = hermitian_eig(m, std::max(tol, 1e-9));
    const double min_eig = eig.values(0);
    if (min_eig < -tol) throw InvalidDensity(V::NotPSD, -min_eig);
    return DensityState(m, tol, min_eig);
}

namespace pauli {

ComplexMatrix identity() { return ComplexMatrix::Identity(2, 2); }

ComplexMatrix x() {
    ComplexMatrix m(2, 2);
    m << 0.0, 1.0,
         1.0, 0.0;
    return m;
}

ComplexMatrix y() {
    ComplexMatrix m(2, 2);
    m << 0.0, -kI,
         kI, 0.0;
    return m;
}

ComplexMatrix z() {
    ComplexMatrix m(2, 2);
    m << 1.0, 0.0,
         0.0, -1.0;
    return m;
}

ComplexMatrix lowering() { return basis_op(2, 1, 0); }
ComplexMatrix raising() { return basis_op(2, 0, 1); }

}  // namespace pauli

}  // namespace resign
