#include "superres/signal_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "superres/errors.hpp"

namespace superres {

double canonical_frequency(double f) {
    if (!std::isfinite(f)) throw InvalidArgument("frequency must be finite");
    double r = f - std::floor(f);
    // floor can round x - floor(x) up to exactly 1 for tiny negative x.
    if (r >= 1.0) r = 0.0;
    return r;
}

double wrap_distance(double a, double b) {
    const double d = std::abs(canonical_frequency(a) - canonical_frequency(b));
    return std::min(d, 1.0 - d);
}

FrequencyMixture::FrequencyMixture(std::vector<double> freqs, CMatrix coeffs)
    : freqs_(std::move(freqs)), coeffs_(std::move(coeffs)) {
    if (static_cast<Eigen::Index>(freqs_.size()) != coeffs_.rows()) {
        throw InvalidArgument("mixture: " + std::to_string(freqs_.size()) + " frequencies but " +
                              std::to_string(coeffs_.rows()) + " coefficient rows");
    }
    for (double& f : freqs_) f = canonical_frequency(f);
    for (std::size_t i = 0; i < freqs_.size(); ++i) {
        for (std::size_t j = i + 1; j < freqs_.size(); ++j) {
            if (freqs_[i] == freqs_[j]) throw InvalidArgument("mixture: duplicate frequency");
        }
        if (coeffs_.row(static_cast<Eigen::Index>(i)).cwiseAbs().maxCoeff() == 0.0) {
            throw InvalidArgument("mixture: all-zero coefficient row");
        }
    }
}

SamplingPattern::SamplingPattern(std::vector<int> omega, int n) : omega_(std::move(omega)), n_(n) {
    if (n_ < 1) throw InvalidArgument("sampling pattern: n must be positive");
    if (static_cast<int>(omega_.size()) > n_) throw InvalidArgument("sampling pattern: |omega| > n");
    for (std::size_t i = 0; i < omega_.size(); ++i) {
        if (omega_[i] < 1 || omega_[i] > n_) {
            throw InvalidArgument("sampling pattern: index " + std::to_string(omega_[i]) +
                                  " outside [1, " + std::to_string(n_) + "]");
        }
        if (i > 0 && omega_[i] <= omega_[i - 1]) {
            throw InvalidArgument("sampling pattern: indices must be strictly increasing");
        }
    }
}

SamplingPattern SamplingPattern::full(int n) {
    std::vector<int> omega(static_cast<std::size_t>(std::max(n, 0)));
    std::iota(omega.begin(), omega.end(), 1);
    return {std::move(omega), n};
}

MeasurementSet::MeasurementSet(SamplingPattern pattern, CMatrix y_obs, FeasibleDomain domain)
    : pattern_(std::move(pattern)), y_obs_(std::move(y_obs)), domain_(domain) {
    if (y_obs_.rows() != pattern_.m()) {
        throw InvalidArgument("measurement set: y_obs has " + std::to_string(y_obs_.rows()) +
                              " rows, pattern has " + std::to_string(pattern_.m()));
    }
    if (!y_obs_.allFinite()) throw InvalidArgument("measurement set: non-finite data");
    if (const auto* ball = std::get_if<BallOnOmega>(&domain_)) {
        if (!(ball->eta >= 0.0) || !std::isfinite(ball->eta)) {
            throw InfeasibleDomain("measurement set: ball radius must be finite and >= 0");
        }
    }
}

double MeasurementSet::radius() const {
    if (const auto* ball = std::get_if<BallOnOmega>(&domain_)) return ball->eta;
    return 0.0;
}

CVector steering_vector(double f, int n) {
    if (n < 1) throw InvalidArgument("steering_vector: n must be positive");
    if (!(f >= 0.0 && f < 1.0)) throw InvalidArgument("steering_vector: f must lie in [0, 1)");
    CVector a(n);
    const double w = 2.0 * std::numbers::pi * f;
    for (int j = 0; j < n; ++j) a(j) = std::polar(1.0, w * j);
    a(0) = Complex(1.0, 0.0);
    return a;
}

CMatrix synthesize(const FrequencyMixture& mix, int n) {
    if (n < 1) throw InvalidArgument("synthesize: n must be positive");
    CMatrix y = CMatrix::Zero(n, mix.snapshots());
    for (Eigen::Index k = 0; k < mix.order(); ++k) {
        y.noalias() += steering_vector(mix.freqs()[static_cast<std::size_t>(k)], n) * mix.coeffs().row(k);
    }
    return y;
}

CMatrix subsample(const CMatrix& y, const SamplingPattern& pattern) {
    if (y.rows() != pattern.n()) {
        throw InvalidArgument("subsample: matrix has " + std::to_string(y.rows()) +
                              " rows, pattern expects " + std::to_string(pattern.n()));
    }
    CMatrix out(pattern.m(), y.cols());
    for (int i = 0; i < pattern.m(); ++i) out.row(i) = y.row(pattern.row(i));
    return out;
}

namespace {

bool separated(const std::vector<double>& f, double min_sep) {
    for (std::size_t i = 0; i < f.size(); ++i) {
        for (std::size_t j = i + 1; j < f.size(); ++j) {
            if (wrap_distance(f[i], f[j]) < min_sep) return false;
        }
    }
    return true;
}

}  // namespace

FrequencyMixture draw_mixture(int k, double min_sep, int l, Rng& rng) {
    if (k < 0 || l < 1) throw InvalidArgument("draw_mixture: need k >= 0 and l >= 1");
    if (min_sep < 0.0 || (k > 1 && k * min_sep >= 1.0)) {
        throw InfeasibleSeparation("draw_mixture: " + std::to_string(k) +
                                   " frequencies cannot be separated by " + std::to_string(min_sep));
    }
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<double> freqs(static_cast<std::size_t>(k));

    constexpr int kMaxRejections = 10000;
    bool accepted = false;
    for (int attempt = 0; attempt < kMaxRejections && !accepted; ++attempt) {
        for (double& f : freqs) f = canonical_frequency(unif(rng));
        accepted = separated(freqs, min_sep);
    }
    if (!accepted) {
        // Stratified jitter: random gaps summing to the slack, random rotation.
        const double slack = 1.0 - k * min_sep;
        std::vector<double> cuts(static_cast<std::size_t>(k));
        for (double& c : cuts) c = unif(rng) * slack;
        std::sort(cuts.begin(), cuts.end());
        const double offset = unif(rng);
        for (int i = 0; i < k; ++i) {
            freqs[static_cast<std::size_t>(i)] =
                canonical_frequency(offset + i * min_sep + cuts[static_cast<std::size_t>(i)]);
        }
    }
    return {std::move(freqs), complex_normal(k, l, 1.0, rng)};
}

SamplingPattern draw_sampling_pattern(int n, int m, Rng& rng) {
    if (m < 0 || m > n) throw InvalidArgument("draw_sampling_pattern: need 0 <= m <= n");
    std::vector<int> all(static_cast<std::size_t>(n));
    std::iota(all.begin(), all.end(), 1);
    // Partial Fisher-Yates; std::shuffle's draw count is implementation-defined.
    for (int i = 0; i < m; ++i) {
        std::uniform_int_distribution<int> pick(i, n - 1);
        std::swap(all[static_cast<std::size_t>(i)], all[static_cast<std::size_t>(pick(rng))]);
    }
    std::vector<int> omega(all.begin(), all.begin() + m);
    std::sort(omega.begin(), omega.end());
    return {std::move(omega), n};
}

CMatrix complex_normal(Eigen::Index rows, Eigen::Index cols, double variance, Rng& rng) {
    std::normal_distribution<double> gauss(0.0, std::sqrt(variance / 2.0));
    CMatrix out(rows, cols);
    // Column-major fill order is part of the reproducibility contract.
    for (Eigen::Index c = 0; c < cols; ++c) {
        for (Eigen::Index r = 0; r < rows; ++r) {
            const double re = gauss(rng);
            const double im = gauss(rng);
            out(r, c) = Complex(re, im);
        }
    }
    return out;
}

CMatrix add_noise(const CMatrix& y_obs, double sigma2, Rng& rng) {
    if (!(sigma2 >= 0.0)) throw InvalidArgument("add_noise: sigma2 must be >= 0");
    if (sigma2 == 0.0) return y_obs;
    return y_obs + complex_normal(y_obs.rows(), y_obs.cols(), sigma2, rng);
}

double noise_ball_radius(int m, int l, double sigma2) {
    if (m < 1 || l < 1) throw InvalidArgument("noise_ball_radius: m and l must be positive");
    if (!(sigma2 >= 0.0)) throw InvalidArgument("noise_ball_radius: sigma2 must be >= 0");
    const double ml = static_cast<double>(m) * l;
    return std::sqrt((ml + 2.0 * std::sqrt(ml)) * sigma2);
}

}  // namespace superres
