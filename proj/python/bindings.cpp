#include <optional>
#include <string>

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "superres/errors.hpp"
#include "superres/experiments.hpp"
#include "superres/sparse_metric.hpp"

namespace py = pybind11;
using namespace superres;

namespace {

MeasurementSet make_measurements(const CMatrix& y_obs, const std::vector<int>& omega, int n,
                                 std::optional<double> eta) {
    FeasibleDomain dom = EqualityOnOmega{};
    if (eta) dom = BallOnOmega{*eta};
    return MeasurementSet(SamplingPattern(omega, n), y_obs, dom);
}

SolverOptions solver_options(double tol, int max_iter) {
    SolverOptions o;
    o.tol = tol;
    o.max_iter = max_iter;
    return o;
}

py::dict solution_dict(const SdpSolution& s) {
    py::dict d;
    d["y"] = s.y_star;
    d["u"] = s.u_star.u();
    d["objective"] = s.objective;
    d["primal_residual"] = s.primal_residual;
    d["dual_residual"] = s.dual_or_fixed_point_residual;
    d["iterations"] = s.iterations;
    d["converged"] = s.converged;
    return d;
}

py::dict spectrum_dict(const RetrievedSpectrum& s) {
    py::dict d;
    d["freqs"] = s.freqs;
    d["powers"] = s.powers;
    d["order"] = s.order;
    d["residual"] = s.residual;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Gridless line-spectral estimation";

    auto base = py::register_exception<Error>(m, "SuperresError", PyExc_RuntimeError);
    py::register_exception<InvalidArgument>(m, "InvalidArgument", base.ptr());
    py::register_exception<InfeasibleDomain>(m, "InfeasibleDomain", base.ptr());
    py::register_exception<InfeasibleSeparation>(m, "InfeasibleSeparation", base.ptr());
    py::register_exception<NonConvergence>(m, "NonConvergence", base.ptr());
    py::register_exception<FullRank>(m, "FullRank", base.ptr());
    py::register_exception<ReconstructionFailure>(m, "ReconstructionFailure", base.ptr());
    py::register_exception<DegenerateWeight>(m, "DegenerateWeight", base.ptr());

    m.def("steering_vector", &steering_vector, py::arg("f"), py::arg("n"));
    m.def("wrap_distance", &wrap_distance, py::arg("a"), py::arg("b"));
    m.def("noise_ball_radius", &noise_ball_radius, py::arg("m"), py::arg("l"), py::arg("sigma2"));

    m.def(
        "synthesize",
        [](const std::vector<double>& freqs, const CMatrix& coeffs, int n) {
            return synthesize(FrequencyMixture(freqs, coeffs), n);
        },
        py::arg("freqs"), py::arg("coeffs"), py::arg("n"), "N x L data sum_k a(f_k) s_k.");

    m.def(
        "draw_mixture",
        [](int k, double min_sep, int l, std::uint64_t seed) {
            Rng rng(seed);
            const FrequencyMixture mix = draw_mixture(k, min_sep, l, rng);
            return py::make_tuple(mix.freqs(), mix.coeffs());
        },
        py::arg("k"), py::arg("min_sep"), py::arg("l") = 1, py::arg("seed") = 0,
        "Random frequencies with the given wrap separation and standard complex normal coefficients.");

    m.def(
        "draw_sampling_pattern",
        [](int n, int m, std::uint64_t seed) {
            Rng rng(seed);
            return draw_sampling_pattern(n, m, rng).omega();
        },
        py::arg("n"), py::arg("m"), py::arg("seed") = 0, "Sorted 1-based indices of m observed rows.");

    m.def(
        "toeplitz",
        [](const CVector& u) { return toeplitz_lift(ToeplitzParam(u)); }, py::arg("u"),
        "Hermitian Toeplitz matrix with first row u.");

    m.def(
        "atomic_norm",
        [](const CMatrix& y, double tol, int max_iter) { return atomic_norm(y, solver_options(tol, max_iter)); },
        py::arg("y"), py::arg("tol") = 1e-7, py::arg("max_iter") = 50000);

    m.def(
        "anm",
        [](const CMatrix& y_obs, const std::vector<int>& omega, int n, std::optional<double> eta,
           std::optional<CMatrix> weight, double tol, int max_iter) {
            const MeasurementSet meas = make_measurements(y_obs, omega, n, eta);
            const WeightMatrix w = weight ? WeightMatrix(*weight) : WeightMatrix::uniform(n);
            SdpSolution s;
            {
                py::gil_scoped_release release;
                s = solve_weighted_anm(meas, w, solver_options(tol, max_iter));
            }
            return solution_dict(s);
        },
        py::arg("y_obs"), py::arg("omega"), py::arg("n"), py::arg("eta") = py::none(),
        py::arg("weight") = py::none(), py::arg("tol") = 1e-7, py::arg("max_iter") = 50000,
        "(Weighted) atomic norm minimization. omega holds 1-based observed rows; eta selects the ball domain.");

    m.def(
        "ram",
        [](const CMatrix& y_obs, const std::vector<int>& omega, int n, std::optional<double> eta, int max_iters,
           double eps0, double eps_floor, double tol) {
            const MeasurementSet meas = make_measurements(y_obs, omega, n, eta);
            RamConfig cfg;
            cfg.max_iters = max_iters;
            cfg.eps0 = eps0;
            cfg.eps_floor = eps_floor;
            cfg.solver.tol = tol;
            RamResult r;
            {
                py::gil_scoped_release release;
                r = ram_solve(meas, cfg);
            }
            py::dict d = solution_dict(r.solution);
            py::list trace;
            for (const auto& it : r.trace.iterations) {
                py::dict row;
                row["j"] = it.j;
                row["eps"] = it.eps;
                row["metric"] = it.objective_metric;
                row["rel_change"] = it.rel_change;
                row["solver_iterations"] = it.solver_iterations;
                row["solver_converged"] = it.solver_converged;
                trace.append(row);
            }
            d["trace"] = trace;
            d["ram_converged"] = r.trace.converged;
            d["aborted"] = r.trace.aborted;
            return d;
        },
        py::arg("y_obs"), py::arg("omega"), py::arg("n"), py::arg("eta") = py::none(), py::arg("max_iters") = 20,
        py::arg("eps0") = 1.0, py::arg("eps_floor") = 1.0 / 1024.0, py::arg("tol") = 1e-7,
        "Reweighted atomic norm minimization.");

    m.def(
        "sparse_metric",
        [](const CMatrix& y, const CVector& u, double eps) { return eval_metric(y, ToeplitzParam(u), eps); },
        py::arg("y"), py::arg("u"), py::arg("eps"), "ln det(T(u) + eps I) + tr(Y^H T(u)^+ Y).");

    m.def(
        "vandermonde",
        [](const CVector& u, std::optional<int> k, double rank_tol) {
            const ToeplitzParam p(u);
            return spectrum_dict(k ? vandermonde_decompose(p, *k) : retrieve_spectrum(p, rank_tol));
        },
        py::arg("u"), py::arg("k") = py::none(), py::arg("rank_tol") = 1e-6,
        "Frequencies and powers of T(u); the order is detected from the spectrum when k is omitted.");

    m.def(
        "music",
        [](const CMatrix& y_obs, const std::vector<int>& omega, int n, int k, int grid) {
            const SamplingPattern pat(omega, n);
            const Pseudospectrum ps = music_pseudospectrum(sample_covariance(y_obs), k, pat, grid);
            const PeakPick peaks = pick_peaks(ps, k);
            py::dict d;
            d["freqs"] = peaks.freqs;
            d["complete"] = peaks.complete;
            d["grid"] = ps.grid;
            d["pseudospectrum"] = ps.values;
            return d;
        },
        py::arg("y_obs"), py::arg("omega"), py::arg("n"), py::arg("k"), py::arg("grid") = 8192);

    m.def(
        "match",
        [](const std::vector<double>& est, const std::vector<double>& truth) {
            const MatchScore s = match_and_score(est, truth);
            py::dict d;
            d["freq_mse"] = s.freq_mse;
            d["errors"] = s.errors;
            d["detected"] = s.detected;
            d["assignment"] = s.assignment;
            d["order_error"] = s.order_error;
            return d;
        },
        py::arg("est"), py::arg("truth"), "Minimum-cost matching of estimated to true frequencies.");
}
