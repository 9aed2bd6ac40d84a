#pragma once

#include "superres/signal_model.hpp"
#include "superres/toeplitz.hpp"

namespace superres {

/// ln det(T(u) + eps I) + tr(Y^H T(u)^+ Y).
///
/// Eigenvalues of T(u) at or below 64 N machine-epsilon * lambda_max count as
/// zero (negative ones are clamped to zero in the log-det). Returns +infinity when
/// the part of Y outside the retained eigenspace exceeds 1e-8 ||Y||_F.
/// Throws InvalidArgument for eps <= 0.
double eval_metric(const CMatrix& y, const ToeplitzParam& u, double eps);

/// The log-det term alone, computed stably as sum_k ln(max(lambda_k, 0) + eps).
double log_det_shifted(const ToeplitzParam& u, double eps);

}  // namespace superres
