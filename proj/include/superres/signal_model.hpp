#pragma once

#include <cstdint>
#include <random>
#include <variant>
#include <vector>

#include <Eigen/Core>

namespace superres {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

/// Generator used by every stochastic routine. Callers own their instance.
using Rng = std::mt19937_64;

/// Reduces f modulo 1 into [0, 1).
double canonical_frequency(double f);

/// Circular distance on the unit torus: min(|a-b|, 1-|a-b|) after reduction.
double wrap_distance(double a, double b);

/// Ground truth of a line spectrum: K frequencies and the K x L coefficient
/// rows that multiply the corresponding sinusoids.
class FrequencyMixture {
public:
    FrequencyMixture() = default;

    /// Frequencies are reduced modulo 1. Throws InvalidArgument on duplicate
    /// frequencies, a row count mismatch or an all-zero coefficient row.
    FrequencyMixture(std::vector<double> freqs, CMatrix coeffs);

    const std::vector<double>& freqs() const { return freqs_; }
    const CMatrix& coeffs() const { return coeffs_; }
    Eigen::Index order() const { return static_cast<Eigen::Index>(freqs_.size()); }
    Eigen::Index snapshots() const { return coeffs_.cols(); }

private:
    std::vector<double> freqs_;
    CMatrix coeffs_;
};

/// Sorted set of observed rows. Indices are 1-based, as sensor positions are
/// conventionally written.
class SamplingPattern {
public:
    SamplingPattern() = default;
    SamplingPattern(std::vector<int> omega, int n);

    static SamplingPattern full(int n);

    const std::vector<int>& omega() const { return omega_; }
    int n() const { return n_; }
    int m() const { return static_cast<int>(omega_.size()); }

    /// Row index (0-based) of the i-th observed sample.
    int row(int i) const { return omega_[static_cast<std::size_t>(i)] - 1; }

private:
    std::vector<int> omega_;
    int n_ = 0;
};

struct EqualityOnOmega {};

/// Frobenius-norm ball ||Y_Omega - Y_Omega^o||_F <= eta around the data.
struct BallOnOmega {
    double eta = 0.0;
};

using FeasibleDomain = std::variant<EqualityOnOmega, BallOnOmega>;

/// Observed rows of the data matrix plus the constraint set they define.
class MeasurementSet {
public:
    MeasurementSet() = default;
    MeasurementSet(SamplingPattern pattern, CMatrix y_obs,
                   FeasibleDomain domain = EqualityOnOmega{});

    const SamplingPattern& pattern() const { return pattern_; }
    const CMatrix& y_obs() const { return y_obs_; }
    const FeasibleDomain& domain() const { return domain_; }

    int n() const { return pattern_.n(); }
    int m() const { return pattern_.m(); }
    Eigen::Index l() const { return y_obs_.cols(); }

    /// Ball radius, or 0 for the equality domain.
    double radius() const;

private:
    SamplingPattern pattern_;
    CMatrix y_obs_;
    FeasibleDomain domain_;
};

/// [1, e^{i2 pi f}, ..., e^{i2 pi (n-1) f}]^T. Requires f in [0, 1).
CVector steering_vector(double f, int n);

/// Sum over k of a(f_k) s_k, an n x L matrix.
CMatrix synthesize(const FrequencyMixture& mix, int n);

/// Rows of y selected by the pattern.
CMatrix subsample(const CMatrix& y, const SamplingPattern& pattern);

/// K frequencies with pairwise wrap distance >= min_sep and i.i.d. standard
/// complex normal coefficients.
FrequencyMixture draw_mixture(int k, double min_sep, int l, Rng& rng);

/// Uniformly random size-m subset of [1, n].
SamplingPattern draw_sampling_pattern(int n, int m, Rng& rng);

/// Matrix of i.i.d. circularly-symmetric complex Gaussians with the given
/// per-entry variance.
CMatrix complex_normal(Eigen::Index rows, Eigen::Index cols, double variance, Rng& rng);

/// y_obs plus circular complex Gaussian noise of per-entry variance sigma2.
CMatrix add_noise(const CMatrix& y_obs, double sigma2, Rng& rng);

/// sqrt((m l + 2 sqrt(m l)) sigma2): mean plus two standard deviations of the
/// noise energy, taken as a Frobenius radius.
double noise_ball_radius(int m, int l, double sigma2);

}  // namespace superres
