#include "superres/toeplitz.hpp"

#include <cmath>
#include <numbers>

#include "superres/errors.hpp"

namespace superres {

ToeplitzParam::ToeplitzParam(CVector u) : u_(std::move(u)) {
    if (u_.size() == 0) return;
    const double im = u_(0).imag();
    if (std::abs(im) > 1e-12 * (1.0 + std::abs(u_(0).real()))) {
        throw InvalidArgument("ToeplitzParam: u[0] must be real");
    }
    u_(0) = Complex(u_(0).real(), 0.0);
}

ToeplitzParam ToeplitzParam::sinusoid(double f, double p, int n) {
    CVector u = p * steering_vector(f, n).conjugate();
    return ToeplitzParam(std::move(u));
}

CMatrix toeplitz_lift(const ToeplitzParam& param) {
    const CVector& u = param.u();
    const Eigen::Index n = u.size();
    CMatrix t(n, n);
    for (Eigen::Index k = 0; k < n; ++k) {
        for (Eigen::Index j = 0; j <= k; ++j) t(j, k) = u(k - j);
        for (Eigen::Index j = k + 1; j < n; ++j) t(j, k) = std::conj(u(j - k));
    }
    return t;
}

CVector toeplitz_adjoint(const CMatrix& m) {
    if (m.rows() != m.cols()) throw InvalidArgument("toeplitz_adjoint: matrix must be square");
    const Eigen::Index n = m.rows();
    CVector v = CVector::Zero(n);
    if (n == 0) return v;
    v(0) = Complex(m.diagonal().sum().real(), 0.0);
    for (Eigen::Index d = 1; d < n; ++d) {
        Complex acc(0.0, 0.0);
        for (Eigen::Index j = 0; j + d < n; ++j) acc += m(j, j + d) + std::conj(m(j + d, j));
        v(d) = acc;
    }
    return v;
}

RVector toeplitz_gram_diagonal(int n) {
    RVector c(n);
    if (n == 0) return c;
    c(0) = n;
    for (int d = 1; d < n; ++d) c(d) = 2.0 * (n - d);
    return c;
}

ToeplitzParam toeplitz_from_atoms(const std::vector<double>& freqs, const std::vector<double>& powers,
                                  int n) {
    if (freqs.size() != powers.size()) throw InvalidArgument("toeplitz_from_atoms: size mismatch");
    CVector u = CVector::Zero(n);
    for (std::size_t k = 0; k < freqs.size(); ++k) {
        u += powers[k] * steering_vector(canonical_frequency(freqs[k]), n).conjugate();
    }
    u(0) = Complex(u(0).real(), 0.0);
    return ToeplitzParam(std::move(u));
}

}  // namespace superres
