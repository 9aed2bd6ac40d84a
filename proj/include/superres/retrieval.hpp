#pragma once

#include <vector>

#include "superres/signal_model.hpp"
#include "superres/toeplitz.hpp"

namespace superres {

/// Frequencies and powers of a Vandermonde decomposition
/// T(u) ~ sum_k p_k a(f_k) a(f_k)^H, sorted by frequency.
struct RetrievedSpectrum {
    std::vector<double> freqs;
    std::vector<double> powers;
    int order = 0;
    /// ||T(u) - sum_k p_k a_k a_k^H||_F / ||T(u)||_F.
    double residual = 0.0;
};

/// Number of eigenvalues above rel_tol * lambda_max; 0 for a zero matrix.
int numerical_rank(const CMatrix& t, double rel_tol);

struct VandermondeOptions {
    /// Largest acceptable relative reconstruction residual.
    double max_rel_residual = 1e-6;
    /// Throw ReconstructionFailure above max_rel_residual; otherwise the
    /// residual is only reported.
    bool strict = true;
};

/// Recovers k_hat atoms from a PSD Toeplitz matrix of rank k_hat < N.
///
/// The k_hat frequencies are the roots of the minimum-norm polynomial of the
/// noise subspace nearest the unit circle, polished by Newton steps on the
/// null spectrum ||E_n^H a(f)||^2. Powers follow from nonnegative least
/// squares against the lifted atoms. Roots closer than 1e-9 merge.
///
/// Throws FullRank when k_hat >= N.
RetrievedSpectrum vandermonde_decompose(const ToeplitzParam& u, int k_hat,
                                        const VandermondeOptions& opts = {});

/// Rank detection followed by a non-strict decomposition. The detected rank
/// is capped at N - 1.
RetrievedSpectrum retrieve_spectrum(const ToeplitzParam& u, double rank_rel_tol);

struct MatchScore {
    /// Mean squared wrap distance over matched pairs (0 when nothing matched).
    double freq_mse = 0.0;
    /// Per truth source: matched to some estimate.
    std::vector<bool> detected;
    /// Per truth source: wrap distance to its match, NaN when unmatched.
    std::vector<double> errors;
    /// Per truth source: index of the matched estimate, -1 when unmatched.
    std::vector<int> assignment;
    /// Estimated order minus true order.
    int order_error = 0;
};

/// Minimum total squared-wrap-distance assignment between estimates and the
/// true frequencies.
MatchScore match_and_score(const std::vector<double>& est, const std::vector<double>& truth);
MatchScore match_and_score(const RetrievedSpectrum& est, const FrequencyMixture& truth);

/// ||y_est - y_true||_F^2 / ||y_true||_F^2. Throws for a zero y_true.
double signal_relative_mse(const CMatrix& y_est, const CMatrix& y_true);

/// Optimal assignment for a rectangular cost matrix; result[i] is the
/// column assigned to row i (or -1 when rows > cols and row i is unassigned).
std::vector<int> min_cost_assignment(const Eigen::MatrixXd& cost);

}  // namespace superres
