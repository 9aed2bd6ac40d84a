#include <doctest.h>

#include <cmath>
#include <numbers>

#include "superres/errors.hpp"
#include "superres/signal_model.hpp"

using namespace superres;

namespace {

constexpr double kPi = std::numbers::pi;

CMatrix naive_synthesis(const std::vector<double>& f, const CMatrix& s, int n) {
    CMatrix y = CMatrix::Zero(n, s.cols());
    for (int j = 0; j < n; ++j) {
        for (Eigen::Index t = 0; t < s.cols(); ++t) {
            Complex acc = 0.0;
            for (std::size_t k = 0; k < f.size(); ++k) {
                const double ph = 2.0 * kPi * f[k] * j;
                acc += Complex(std::cos(ph), std::sin(ph)) * s(static_cast<Eigen::Index>(k), t);
            }
            y(j, t) = acc;
        }
    }
    return y;
}

}  // namespace

TEST_CASE("steering vector special frequencies") {
    const CVector a0 = steering_vector(0.0, 4);
    for (int j = 0; j < 4; ++j) CHECK(a0(j) == Complex(1.0, 0.0));

    const CVector ah = steering_vector(0.5, 4);
    const double expect[] = {1, -1, 1, -1};
    for (int j = 0; j < 4; ++j) {
        CHECK(ah(j).real() == doctest::Approx(expect[j]).epsilon(1e-15));
        CHECK(std::abs(ah(j).imag()) < 1e-15);
    }

    const CVector aq = steering_vector(0.25, 4);
    const Complex eq[] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    for (int j = 0; j < 4; ++j) CHECK(std::abs(aq(j) - eq[j]) < 1e-15);

    CHECK(steering_vector(0.3721, 7)(0) == Complex(1.0, 0.0));
    CHECK_THROWS_AS(steering_vector(1.0, 4), InvalidArgument);
    CHECK_THROWS_AS(steering_vector(-0.1, 4), InvalidArgument);
    CHECK_THROWS_AS(steering_vector(0.1, 0), InvalidArgument);
}

TEST_CASE("steering vector norm") {
    Rng rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 200; ++i) {
        const int n = 1 + i % 40;
        CHECK(steering_vector(u(rng), n).squaredNorm() == doctest::Approx(n).epsilon(1e-13));
    }
}

TEST_CASE("synthesize small cases") {
    FrequencyMixture one({0.0}, CMatrix::Ones(1, 1));
    const CMatrix y1 = synthesize(one, 3);
    CHECK(y1.rows() == 3);
    for (int j = 0; j < 3; ++j) CHECK(y1(j, 0) == Complex(1.0, 0.0));

    FrequencyMixture two({0.0, 0.5}, CMatrix::Ones(2, 1));
    const CMatrix y2 = synthesize(two, 2);
    CHECK(std::abs(y2(0, 0) - Complex(2.0, 0.0)) < 1e-15);
    CHECK(std::abs(y2(1, 0)) < 1e-15);
}

TEST_CASE("synthesize matches entrywise double loop") {
    Rng rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        const auto mix = draw_mixture(3, 0.05, 2, rng);
        const CMatrix y = synthesize(mix, 8);
        const CMatrix ref = naive_synthesis(mix.freqs(), mix.coeffs(), 8);
        CHECK((y - ref).cwiseAbs().maxCoeff() < 1e-14 * std::max(1.0, ref.cwiseAbs().maxCoeff()));
    }
}

TEST_CASE("subsample") {
    CMatrix y(3, 2);
    y << Complex(1, 0), Complex(2, 0), Complex(3, 1), Complex(4, 0), Complex(5, 0), Complex(6, -1);
    CHECK(subsample(y, SamplingPattern::full(3)) == y);

    const CMatrix first = subsample(y, SamplingPattern({1}, 3));
    CHECK(first.rows() == 1);
    CHECK(first.row(0) == y.row(0));

    const SamplingPattern sla({1, 2, 5, 6, 8, 12, 15, 17, 19, 20}, 20);
    CMatrix ramp(20, 1);
    for (int j = 0; j < 20; ++j) ramp(j, 0) = Complex(j + 1, 0);
    const CMatrix s = subsample(ramp, sla);
    for (int i = 0; i < sla.m(); ++i) CHECK(s(i, 0).real() == sla.omega()[static_cast<std::size_t>(i)]);

    CHECK_THROWS_AS(subsample(y, SamplingPattern({1, 4}, 4)), InvalidArgument);
}

TEST_CASE("restriction commutes with synthesis") {
    Rng rng(21);
    for (int trial = 0; trial < 10; ++trial) {
        const auto mix = draw_mixture(4, 0.02, 3, rng);
        const auto pat = draw_sampling_pattern(16, 7, rng);
        const CMatrix lhs = subsample(synthesize(mix, 16), pat);
        CMatrix rhs = CMatrix::Zero(7, 3);
        for (Eigen::Index k = 0; k < mix.order(); ++k) {
            const CVector a = steering_vector(mix.freqs()[static_cast<std::size_t>(k)], 16);
            for (int i = 0; i < 7; ++i) rhs.row(i) += a(pat.row(i)) * mix.coeffs().row(k);
        }
        CHECK((lhs - rhs).norm() < 1e-12);
    }
}

TEST_CASE("sampling pattern invariants") {
    CHECK_THROWS_AS(SamplingPattern({0, 1}, 3), InvalidArgument);
    CHECK_THROWS_AS(SamplingPattern({2, 2}, 3), InvalidArgument);
    CHECK_THROWS_AS(SamplingPattern({3, 2}, 3), InvalidArgument);
    CHECK_THROWS_AS(SamplingPattern({4}, 3), InvalidArgument);

    Rng rng(3);
    for (int i = 0; i < 100; ++i) {
        const auto p = draw_sampling_pattern(64, 30, rng);
        CHECK(p.m() == 30);
        for (int j = 1; j < p.m(); ++j) CHECK(p.omega()[static_cast<std::size_t>(j)] > p.omega()[static_cast<std::size_t>(j - 1)]);
        CHECK(p.omega().front() >= 1);
        CHECK(p.omega().back() <= 64);
    }
}

TEST_CASE("mixture invariants") {
    CHECK_THROWS_AS(FrequencyMixture({0.1, 0.1}, CMatrix::Ones(2, 1)), InvalidArgument);
    CHECK_THROWS_AS(FrequencyMixture({0.25, 1.25}, CMatrix::Ones(2, 1)), InvalidArgument);
    CHECK_THROWS_AS(FrequencyMixture({0.1}, CMatrix::Ones(2, 1)), InvalidArgument);
    CMatrix zero_row = CMatrix::Ones(2, 2);
    zero_row.row(1).setZero();
    CHECK_THROWS_AS(FrequencyMixture({0.1, 0.2}, zero_row), InvalidArgument);

    FrequencyMixture wrapped({1.25, -0.25}, CMatrix::Ones(2, 1));
    CHECK(wrapped.freqs()[0] == doctest::Approx(0.25));
    CHECK(wrapped.freqs()[1] == doctest::Approx(0.75));
}

TEST_CASE("wrap distance") {
    CHECK(wrap_distance(0.05, 0.95) == doctest::Approx(0.1));
    CHECK(wrap_distance(0.2, 0.7) == doctest::Approx(0.5));
    CHECK(wrap_distance(0.3, 0.3) == 0.0);
}

TEST_CASE("draw_mixture separation") {
    Rng rng(1234);
    for (int i = 0; i < 1000; ++i) {
        const auto mix = draw_mixture(2, 0.4, 1, rng);
        CHECK(wrap_distance(mix.freqs()[0], mix.freqs()[1]) >= 0.4);
    }
    for (int seed = 0; seed < 50; ++seed) {
        Rng r(static_cast<std::uint64_t>(seed));
        const auto mix = draw_mixture(20, 0.3 / 64, 5, r);
        CHECK(mix.order() == 20);
        CHECK(mix.snapshots() == 5);
        for (std::size_t a = 0; a < 20; ++a) {
            for (std::size_t b = a + 1; b < 20; ++b) CHECK(wrap_distance(mix.freqs()[a], mix.freqs()[b]) >= 0.3 / 64);
        }
    }
    // Tight packing falls through to stratified jitter.
    Rng tight(9);
    const auto dense = draw_mixture(9, 0.11, 1, tight);
    for (std::size_t a = 0; a < 9; ++a) {
        for (std::size_t b = a + 1; b < 9; ++b) CHECK(wrap_distance(dense.freqs()[a], dense.freqs()[b]) >= 0.11);
    }
    CHECK_THROWS_AS(draw_mixture(10, 0.1, 1, rng), InfeasibleSeparation);
}

TEST_CASE("draw_mixture is deterministic") {
    Rng a(77), b(77);
    const auto ma = draw_mixture(5, 0.01, 3, a);
    const auto mb = draw_mixture(5, 0.01, 3, b);
    CHECK(ma.freqs() == mb.freqs());
    CHECK(ma.coeffs() == mb.coeffs());
}

TEST_CASE("add_noise") {
    Rng rng(4);
    const CMatrix y = complex_normal(10, 200, 1.0, rng);
    CHECK(add_noise(y, 0.0, rng) == y);

    Rng r1(99), r2(99), r3(100);
    const CMatrix n1 = add_noise(y, 1.0, r1);
    const CMatrix n2 = add_noise(y, 1.0, r2);
    const CMatrix n3 = add_noise(y, 1.0, r3);
    CHECK(n1 == n2);
    CHECK(n1 != n3);

    // Sample variance of 2000 unit-variance entries: 3 sigma band is about 0.067.
    const double power = (n1 - y).squaredNorm() / 2000.0;
    CHECK(power > 0.94);
    CHECK(power < 1.06);
    const double re = (n1 - y).real().squaredNorm() / 2000.0;
    CHECK(re == doctest::Approx(0.5).epsilon(0.1));
    CHECK_THROWS_AS(add_noise(y, -1.0, rng), InvalidArgument);
}

TEST_CASE("noise ball radius") {
    CHECK(noise_ball_radius(10, 200, 0.0) == 0.0);
    CHECK(noise_ball_radius(10, 200, 1.0) == doctest::Approx(std::sqrt(2000.0 + 2.0 * std::sqrt(2000.0))));
    CHECK(noise_ball_radius(10, 200, 1.0) == doctest::Approx(45.7104).epsilon(1e-5));
    CHECK(noise_ball_radius(1, 1, 4.0) == doctest::Approx(std::sqrt(12.0)));
}

TEST_CASE("measurement set") {
    const SamplingPattern p({1, 3}, 4);
    CHECK_THROWS_AS(MeasurementSet(p, CMatrix::Ones(3, 1)), InvalidArgument);
    CHECK_THROWS_AS(MeasurementSet(p, CMatrix::Ones(2, 1), BallOnOmega{-1.0}), InfeasibleDomain);
    CHECK(MeasurementSet(p, CMatrix::Ones(2, 1), BallOnOmega{2.5}).radius() == 2.5);
    CHECK(MeasurementSet(p, CMatrix::Ones(2, 1)).radius() == 0.0);
}
