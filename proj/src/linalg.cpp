#include "superres/linalg.hpp"

#include "superres/errors.hpp"

namespace superres {

Eigen::SelfAdjointEigenSolver<CMatrix> hermitian_eigen(const CMatrix& m) {
    if (m.rows() != m.cols()) throw InvalidArgument("hermitian_eigen: matrix must be square");
    return Eigen::SelfAdjointEigenSolver<CMatrix>(hermitian_part(m));
}

PsdCheck eigencheck_psd(const CMatrix& m, double tol) {
    if (m.size() == 0) return {true, 0.0};
    const auto es = hermitian_eigen(m);
    const double lo = es.eigenvalues()(0);
    return {lo >= -tol, lo};
}

CMatrix project_psd(const CMatrix& m) {
    const auto es = hermitian_eigen(m);
    const RVector& w = es.eigenvalues();
    Eigen::Index first = 0;
    while (first < w.size() && w(first) <= 0.0) ++first;
    const Eigen::Index k = w.size() - first;
    if (k == 0) return CMatrix::Zero(m.rows(), m.cols());
    const auto v = es.eigenvectors().rightCols(k);
    return v * w.tail(k).asDiagonal() * v.adjoint();
}

}  // namespace superres
