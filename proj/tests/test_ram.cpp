#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/LU>

#include "superres/errors.hpp"
#include "superres/ram.hpp"
#include "superres/retrieval.hpp"
#include "superres/sparse_metric.hpp"

using namespace superres;

TEST_CASE("reweight at zero is a scaled identity") {
    for (int n : {1, 4, 20}) {
        const auto w = reweight(ToeplitzParam::zero(n), 0.25);
        CHECK(w.w() == CMatrix::Identity(n, n) / (n * 0.25));
    }
}

TEST_CASE("reweight matches a dense inverse") {
    Rng rng(6);
    for (int trial = 0; trial < 30; ++trial) {
        const int n = 2 + trial % 9;
        std::vector<double> f, p;
        for (int k = 0; k < 1 + trial % 3; ++k) {
            f.push_back(std::uniform_real_distribution<double>(0.0, 1.0)(rng));
            p.push_back(1.0 + k);
        }
        const ToeplitzParam u = toeplitz_from_atoms(f, p, n);
        const double eps = 1e-2 * (1 + trial % 4);
        const CMatrix dense = (toeplitz_lift(u) + eps * CMatrix::Identity(n, n)).inverse() / n;
        CHECK((reweight(u, eps).w() - dense).norm() < 1e-9 * dense.norm());
    }
    CHECK_THROWS_AS(reweight(ToeplitzParam::zero(3), 0.0), InvalidArgument);
}

TEST_CASE("capon weight") {
    const int n = 6;
    CHECK(capon_weight(0.3, WeightMatrix::uniform(n)) == doctest::Approx(1.0));
    const ToeplitzParam u = toeplitz_from_atoms({0.2}, {3.0}, n);
    const double eps = 0.5;
    const auto w = reweight(u, eps);
    for (double f : {0.0, 0.2, 0.7}) {
        const CVector a = steering_vector(f, n);
        const double q = (a.adjoint() * w.w() * a)(0).real();
        CHECK(capon_weight(f, w) == doctest::Approx(1.0 / std::sqrt(q)));
    }
    // Large weights near the existing atom, i.e. a cheaper atom there.
    CHECK(capon_weight(0.2, w) > capon_weight(0.7, w));
    CHECK_THROWS_AS(capon_weight(0.1, WeightMatrix(CMatrix::Zero(n, n))), DegenerateWeight);
}

TEST_CASE("epsilon schedule") {
    RamConfig c;
    CHECK(eps_schedule(c, 1) == 1.0);
    CHECK(eps_schedule(c, 2) == 0.5);
    CHECK(eps_schedule(c, 11) == 1.0 / 1024.0);
    CHECK(eps_schedule(c, 30) == 1.0 / 1024.0);
    c.eps_halving = false;
    c.eps0 = 0.125;
    c.eps_floor = 0.125;
    CHECK(eps_schedule(c, 7) == 0.125);
}

TEST_CASE("config validation") {
    RamConfig c;
    CHECK_NOTHROW(c.validate());
    c.eps_floor = 2.0;
    CHECK_THROWS_AS(c.validate(), InvalidArgument);
    c = RamConfig{};
    c.max_iters = 0;
    CHECK_THROWS_AS(c.validate(), InvalidArgument);
    c = RamConfig{};
    c.eps0 = -1.0;
    CHECK_THROWS_AS(c.validate(), InvalidArgument);
}

TEST_CASE("first iteration is the atomic norm solution") {
    Rng rng(15);
    const auto mix = draw_mixture(3, 0.15, 1, rng);
    const auto pat = draw_sampling_pattern(16, 10, rng);
    const MeasurementSet meas(pat, subsample(synthesize(mix, 16), pat));
    RamConfig c;
    c.max_iters = 1;
    c.scale_to_m = false;
    const auto ram = ram_solve(meas, c);
    const auto anm = anm_solve(meas);
    REQUIRE(ram.trace.iterations.size() == 1);
    CHECK(std::isnan(ram.trace.iterations[0].rel_change));
    CHECK((ram.solution.u_star.u() - anm.u_star.u()).norm() < 1e-4 * anm.u_star.u().norm());
}

TEST_CASE("noiseless recovery beyond the atomic norm regime") {
    // Two close atoms that plain ANM blurs at this sample size.
    const int n = 32;
    CMatrix s(3, 1);
    s << Complex(1.0, 0.3), Complex(-0.8, 0.5), Complex(0.6, -0.9);
    const FrequencyMixture mix({0.2, 0.2 + 0.7 / n, 0.61}, s);
    Rng rng(3);
    const auto pat = draw_sampling_pattern(n, 16, rng);
    const CMatrix y_full = synthesize(mix, n);
    const MeasurementSet meas(pat, subsample(y_full, pat));
    const auto res = ram_solve(meas);
    REQUIRE(!res.trace.aborted);
    const auto spec = retrieve_spectrum(res.solution.u_star, 1e-6);
    CHECK(spec.order == 3);
    const auto score = match_and_score(spec, mix);
    CHECK(score.freq_mse < 1e-10);
    CHECK(signal_relative_mse(res.solution.y_star, y_full) < 1e-8);
    for (std::size_t j = 1; j < res.trace.iterations.size(); ++j) {
        CHECK(res.trace.iterations[j].eps <= res.trace.iterations[j - 1].eps);
    }
}

TEST_CASE("fixed epsilon iterations descend") {
    Rng rng(27);
    const auto mix = draw_mixture(3, 0.05, 1, rng);
    const auto pat = draw_sampling_pattern(24, 12, rng);
    const MeasurementSet meas(pat, subsample(synthesize(mix, 24), pat));
    RamConfig c;
    c.eps0 = 1.0 / 1024.0;
    c.eps_halving = false;
    c.max_iters = 6;
    c.rel_change_tol = 0.0;
    const auto res = ram_solve(meas, c);
    CHECK(mm_objective_decrease_check(res.trace));
    for (const auto& it : res.trace.iterations) CHECK(it.eps == 1.0 / 1024.0);
}

TEST_CASE("descent check on synthetic traces") {
    RamTrace t;
    for (double v : {5.0, 4.0, 4.0 + 1e-7, 1.0}) {
        RamIteration it;
        it.objective_metric = v;
        t.iterations.push_back(it);
    }
    CHECK(mm_objective_decrease_check(t));
    t.iterations[2].objective_metric = 4.1;
    CHECK_FALSE(mm_objective_decrease_check(t));
}

TEST_CASE("sparse metric minimization on a single atom") {
    const int n = 8;
    const double f = 0.43;
    CMatrix s(1, 2);
    s << Complex(0.6, 0.8), Complex(1.0, 0.0);
    const CMatrix y = steering_vector(f, n) * s;
    const double s2 = s.squaredNorm();
    for (double eps : {1e-2, 1.0}) {
        SolverOptions tight;
        tight.tol = 1e-10;
        tight.max_iter = 200000;
        const auto m = minimize_sparse_metric(y, eps, 200, 1e-10, tight);
        // Stationary point of ln(pN + eps) + (N-1) ln eps + |s|^2 / p.
        const double p = (s2 * n + std::sqrt(s2 * s2 * n * n + 4.0 * n * s2 * eps)) / (2.0 * n);
        const double closed = std::log(p * n + eps) + (n - 1) * std::log(eps) + s2 / p;
        CHECK(m.value == doctest::Approx(closed).epsilon(1e-5));
        for (std::size_t i = 1; i < m.history.size(); ++i) {
            CHECK(m.history[i] <= m.history[i - 1] + 1e-6 * (1.0 + std::abs(m.history[i - 1])));
        }
        CHECK(m.value == doctest::Approx(eval_metric(y, m.u, eps)).epsilon(1e-9));
    }
}

TEST_CASE("trace csv") {
    Rng rng(2);
    const auto mix = draw_mixture(1, 0.1, 1, rng);
    const MeasurementSet meas(SamplingPattern::full(6), synthesize(mix, 6));
    RamConfig c;
    c.max_iters = 2;
    const auto res = ram_solve(meas, c);
    std::ostringstream os;
    write_trace_csv(os, res.trace);
    const std::string out = os.str();
    CHECK(out.rfind("j,eps,metric,surrogate,rel_change,primal_residual,dual_residual,solver_iterations,wall_seconds",
                    0) == 0);
    CHECK(std::count(out.begin(), out.end(), '\n') == 1 + static_cast<long>(res.trace.iterations.size()));
}
