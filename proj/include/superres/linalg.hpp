#pragma once

#include <Eigen/Eigenvalues>

#include "superres/signal_model.hpp"

namespace superres {

struct PsdCheck {
    bool psd = false;
    double min_eigenvalue = 0.0;
};

/// Smallest eigenvalue of a Hermitian matrix and whether it is >= -tol.
PsdCheck eigencheck_psd(const CMatrix& m, double tol);

/// Eigen-decomposition of the Hermitian part of m, ascending eigenvalues.
Eigen::SelfAdjointEigenSolver<CMatrix> hermitian_eigen(const CMatrix& m);

/// Closest PSD matrix in Frobenius norm.
CMatrix project_psd(const CMatrix& m);

/// (m + m^H) / 2.
inline CMatrix hermitian_part(const CMatrix& m) { return (m + m.adjoint()) / 2.0; }

/// Real trace inner product Re tr(a^H b).
inline double real_inner(const CMatrix& a, const CMatrix& b) { return (a.adjoint() * b).trace().real(); }

}  // namespace superres
