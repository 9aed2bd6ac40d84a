#include "superres/sparse_metric.hpp"

#include <cmath>
#include <limits>

#include "superres/errors.hpp"
#include "superres/linalg.hpp"

namespace superres {

double log_det_shifted(const ToeplitzParam& u, double eps) {
    if (!(eps > 0.0)) throw InvalidArgument("eval_metric: eps must be positive");
    const RVector ev = hermitian_eigen(toeplitz_lift(u)).eigenvalues();
    double acc = 0.0;
    for (Eigen::Index i = 0; i < ev.size(); ++i) acc += std::log(std::max(ev(i), 0.0) + eps);
    return acc;
}

double eval_metric(const CMatrix& y, const ToeplitzParam& u, double eps) {
    if (!(eps > 0.0)) throw InvalidArgument("eval_metric: eps must be positive");
    if (y.rows() != u.n()) throw InvalidArgument("eval_metric: Y and u disagree on N");
    const auto es = hermitian_eigen(toeplitz_lift(u));
    const RVector& ev = es.eigenvalues();
    const Eigen::Index n = ev.size();

    double log_det = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) log_det += std::log(std::max(ev(i), 0.0) + eps);

    // Only eigenvalues at round-off level count as zero. Small positive ones
    // are real: PSD feasibility of the Schur block bounds the matching
    // components of Y by sqrt(lambda_i tr Z), not by zero.
    const double lmax = n > 0 ? ev(n - 1) : 0.0;
    const double cut = 64.0 * std::numeric_limits<double>::epsilon() * static_cast<double>(n) * lmax;
    Eigen::Index first = 0;
    while (first < n && ev(first) <= cut) ++first;
    const Eigen::Index k = n - first;

    const double y_norm = y.norm();
    if (y_norm == 0.0) return log_det;
    if (k == 0 || lmax <= 0.0) return std::numeric_limits<double>::infinity();

    const auto v = es.eigenvectors().rightCols(k);
    const CMatrix coords = v.adjoint() * y;
    const double outside = (y - v * coords).norm();
    if (outside > 1e-8 * y_norm) return std::numeric_limits<double>::infinity();

    double quad = 0.0;
    for (Eigen::Index i = 0; i < k; ++i) quad += coords.row(i).squaredNorm() / ev(first + i);
    return log_det + quad;
}

}  // namespace superres
