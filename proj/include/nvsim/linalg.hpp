// linalg.hpp — dense complex spin algebra: spin operators, Kronecker products,
// Hermitian eigendecomposition with a fixed gauge, exact unitary propagators.

#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/KroneckerProduct>

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

namespace nvsim {

using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using Complex = std::complex<double>;

inline constexpr double two_pi = 6.283185307179586476925286766559;
inline constexpr double deg_to_rad = two_pi / 360.0;

struct SpinOperators {
    ComplexMatrix sx, sy, sz;
};

// Angular-momentum matrices with hbar = 1, basis ordered m = +s ... -s.
// Only the two spins of the NV problem are supported.
inline SpinOperators spin_operators(double spin) {
    const Complex i(0.0, 1.0);
    if (spin == 0.5) {
        SpinOperators op{ComplexMatrix(2, 2), ComplexMatrix(2, 2), ComplexMatrix(2, 2)};
        op.sx << 0.0, 0.5, 0.5, 0.0;
        op.sy << 0.0, -0.5 * i, 0.5 * i, 0.0;
        op.sz << 0.5, 0.0, 0.0, -0.5;
        return op;
    }
    if (spin == 1.0) {
        const double r = 1.0 / std::sqrt(2.0);
        SpinOperators op{ComplexMatrix::Zero(3, 3), ComplexMatrix::Zero(3, 3),
                         ComplexMatrix::Zero(3, 3)};
        op.sx(0, 1) = r; op.sx(1, 0) = r; op.sx(1, 2) = r; op.sx(2, 1) = r;
        op.sy(0, 1) = -i * r; op.sy(1, 0) = i * r; op.sy(1, 2) = -i * r; op.sy(2, 1) = i * r;
        op.sz(0, 0) = 1.0; op.sz(2, 2) = -1.0;
        return op;
    }
    throw std::invalid_argument("spin_operators: unsupported spin value " + std::to_string(spin));
}

inline ComplexMatrix identity(Eigen::Index n) { return ComplexMatrix::Identity(n, n); }

inline ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
    return Eigen::kroneckerProduct(a, b).eval();
}

inline double max_abs(const ComplexMatrix& m) { return m.cwiseAbs().maxCoeff(); }

inline bool is_hermitian(const ComplexMatrix& m, double rel_tol = 1e-12) {
    if (m.rows() != m.cols()) return false;
    const double scale = max_abs(m);
    if (scale == 0.0) return true;
    return max_abs(ComplexMatrix(m - m.adjoint())) <= rel_tol * scale;
}

struct EigenDecomposition {
    Eigen::VectorXd eigenvalues;   // ascending
    ComplexMatrix eigenvectors;    // orthonormal columns, gauge-fixed
};

// Hermitian eigendecomposition. The gauge is fixed so that each eigenvector's
// largest-magnitude component is real and positive; ties pick the lowest index.
// This makes repeated calls on identical input bitwise reproducible.
inline EigenDecomposition eigh(const ComplexMatrix& m) {
    if (m.rows() != m.cols())
        throw std::invalid_argument("eigh: matrix must be square");
    if (!is_hermitian(m))
        throw std::invalid_argument("eigh: matrix is not Hermitian");
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(m);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("eigh: eigendecomposition failed to converge");
    EigenDecomposition out{solver.eigenvalues(), solver.eigenvectors()};
    for (Eigen::Index k = 0; k < out.eigenvectors.cols(); ++k) {
        Eigen::Index imax = 0;
        double best = 0.0;
        for (Eigen::Index r = 0; r < out.eigenvectors.rows(); ++r) {
            const double a = std::abs(out.eigenvectors(r, k));
            if (a > best) { best = a; imax = r; }
        }
        const Complex pivot = out.eigenvectors(imax, k);
        if (best > 0.0)
            out.eigenvectors.col(k) *= std::conj(pivot) / best;
    }
    return out;
}

// U(t) = V exp(-i diag(lambda) t) V^dag for Hermitian H (energies in rad/us, t in us).
inline ComplexMatrix propagator(const ComplexMatrix& h, double t_us) {
    const EigenDecomposition ed = eigh(h);
    ComplexVector phases(ed.eigenvalues.size());
    for (Eigen::Index k = 0; k < phases.size(); ++k)
        phases(k) = std::polar(1.0, -ed.eigenvalues(k) * t_us);
    return ed.eigenvectors * phases.asDiagonal() * ed.eigenvectors.adjoint();
}

inline ComplexMatrix propagator(const EigenDecomposition& ed, double t_us) {
    ComplexVector phases(ed.eigenvalues.size());
    for (Eigen::Index k = 0; k < phases.size(); ++k)
        phases(k) = std::polar(1.0, -ed.eigenvalues(k) * t_us);
    return ed.eigenvectors * phases.asDiagonal() * ed.eigenvectors.adjoint();
}

}  // namespace nvsim
