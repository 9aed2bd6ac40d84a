#include "superres/ram.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <ostream>

#include "superres/errors.hpp"
#include "superres/linalg.hpp"
#include "superres/sparse_metric.hpp"

namespace superres {

void RamConfig::validate() const {
    if (!(eps0 > 0.0) || !(eps_floor > 0.0)) throw InvalidArgument("RamConfig: eps must be positive");
    if (eps_floor > eps0) throw InvalidArgument("RamConfig: eps_floor exceeds eps0");
    if (max_iters < 1) throw InvalidArgument("RamConfig: max_iters must be >= 1");
    if (!(rel_change_tol >= 0.0)) throw InvalidArgument("RamConfig: rel_change_tol must be >= 0");
}

WeightMatrix reweight(const ToeplitzParam& u_prev, double eps) {
    if (!(eps > 0.0)) throw InvalidArgument("reweight: eps must be positive");
    const int n = u_prev.n();
    if (u_prev.u().isZero(0.0)) {
        return WeightMatrix(CMatrix::Identity(n, n) / (static_cast<double>(n) * eps));
    }
    const auto es = hermitian_eigen(toeplitz_lift(u_prev));
    RVector inv(n);
    for (int i = 0; i < n; ++i) inv(i) = 1.0 / (std::max(es.eigenvalues()(i), 0.0) + eps);
    const CMatrix& v = es.eigenvectors();
    CMatrix w = v * inv.asDiagonal() * v.adjoint() / static_cast<double>(n);
    return WeightMatrix(hermitian_part(w));
}

double capon_weight(double f, const WeightMatrix& w) {
    const CVector a = steering_vector(canonical_frequency(f), w.n());
    const double q = a.dot(w.w() * a).real();
    const double floor = 1e-14 * w.w().cwiseAbs().maxCoeff() * w.n();
    if (!(q > floor)) throw DegenerateWeight("capon_weight: a(f)^H W a(f) vanishes");
    return 1.0 / std::sqrt(q);
}

double eps_schedule(const RamConfig& cfg, int j) {
    if (!cfg.eps_halving) return cfg.eps0;
    return std::max(cfg.eps0 * std::ldexp(1.0, -(j - 1)), cfg.eps_floor);
}

SdpSolution anm_solve(const MeasurementSet& meas, const SolverOptions& opts) {
    return solve_weighted_anm(meas, WeightMatrix::uniform(meas.n()), opts);
}

RamResult ram_solve(const MeasurementSet& meas, const RamConfig& cfg) {
    cfg.validate();
    const int n = meas.n();
    const double sqrt_n = std::sqrt(static_cast<double>(n));

    RamResult out;
    double scale = 1.0;
    const double data_norm = meas.y_obs().norm();
    if (cfg.scale_to_m && data_norm > 0.0) scale = std::sqrt(static_cast<double>(meas.m())) / data_norm;
    out.trace.scale = scale;

    FeasibleDomain domain = meas.domain();
    if (auto* ball = std::get_if<BallOnOmega>(&domain)) ball->eta *= scale;
    const MeasurementSet work(meas.pattern(), meas.y_obs() * scale, domain);

    ToeplitzParam u_prev = ToeplitzParam::zero(n);
    CMatrix y_prev;
    SdpSolution current;
    int failures_in_row = 0;

    for (int j = 1; j <= cfg.max_iters; ++j) {
        const auto t0 = std::chrono::steady_clock::now();
        const double eps = eps_schedule(cfg, j);
        const WeightMatrix w = reweight(u_prev, eps);
        const SolverState* warm = (cfg.warm_start && current.state) ? &*current.state : nullptr;
        SdpSolution sol = solve_weighted_anm(work, w, cfg.solver, warm);

        RamIteration rec;
        rec.j = j;
        rec.eps = eps;
        rec.u = sol.u_star;
        rec.y = sol.y_star;
        rec.objective_metric = eval_metric(sol.y_star, sol.u_star, eps);
        rec.surrogate_objective = 2.0 * sqrt_n * sol.objective;
        rec.primal_residual = sol.primal_residual;
        rec.dual_residual = sol.dual_or_fixed_point_residual;
        rec.solver_iterations = sol.iterations;
        rec.solver_converged = sol.converged;
        if (j == 1) {
            rec.rel_change = std::numeric_limits<double>::quiet_NaN();
        } else {
            const double prev = y_prev.norm();
            const double diff = (sol.y_star - y_prev).norm();
            rec.rel_change = prev > 0.0 ? diff / prev : (diff > 0.0 ? 1.0 : 0.0);
        }
        rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        out.trace.iterations.push_back(std::move(rec));

        failures_in_row = sol.converged ? 0 : failures_in_row + 1;
        y_prev = sol.y_star;
        u_prev = sol.u_star;
        current = std::move(sol);

        if (failures_in_row >= 2) {
            out.trace.aborted = true;
            break;
        }
        const double change = out.trace.iterations.back().rel_change;
        if (j > 1 && change < cfg.rel_change_tol) {
            out.trace.converged = true;
            break;
        }
    }

    out.solution = std::move(current);
    if (scale != 1.0) {
        out.solution.y_star /= scale;
        out.solution.u_star = ToeplitzParam(out.solution.u_star.u() / scale);
        out.solution.z_star /= scale;
        out.solution.objective /= scale;
        out.solution.state.reset();
    }
    return out;
}

bool mm_objective_decrease_check(const RamTrace& trace) {
    const auto& it = trace.iterations;
    for (std::size_t i = 1; i < it.size(); ++i) {
        const double prev = it[i - 1].objective_metric;
        const double cur = it[i].objective_metric;
        if (std::isnan(cur) || std::isnan(prev)) return false;
        if (cur > prev + 1e-6 * (1.0 + std::abs(prev))) return false;
    }
    return true;
}

SparseMetricMinimum minimize_sparse_metric(const CMatrix& y, double eps, int max_iters, double rel_tol,
                                           const SolverOptions& opts) {
    if (!(eps > 0.0)) throw InvalidArgument("minimize_sparse_metric: eps must be positive");
    const int n = static_cast<int>(y.rows());
    const MeasurementSet meas(SamplingPattern::full(n), y, EqualityOnOmega{});

    SparseMetricMinimum out;
    out.u = ToeplitzParam::zero(n);
    std::optional<SolverState> state;
    for (int j = 1; j <= max_iters; ++j) {
        const WeightMatrix w = reweight(out.u, eps);
        SdpSolution sol = solve_weighted_anm(meas, w, opts, state ? &*state : nullptr);
        const double prev = out.u.u().norm();
        const double change = (sol.u_star.u() - out.u.u()).norm();
        out.u = sol.u_star;
        out.value = eval_metric(y, out.u, eps);
        out.history.push_back(out.value);
        out.iterations = j;
        state = std::move(sol.state);
        if (j > 1 && change <= rel_tol * std::max(prev, std::numeric_limits<double>::min())) break;
    }
    return out;
}

void write_trace_csv(std::ostream& os, const RamTrace& trace) {
    os << "j,eps,metric,surrogate,rel_change,primal_residual,dual_residual,solver_iterations,wall_seconds\n";
    const auto old_precision = os.precision(17);
    for (const auto& r : trace.iterations) {
        os << r.j << ',' << r.eps << ',' << r.objective_metric << ',' << r.surrogate_objective << ','
           << r.rel_change << ',' << r.primal_residual << ',' << r.dual_residual << ','
           << r.solver_iterations << ',' << r.wall_seconds << '\n';
    }
    os.precision(old_precision);
}

}  // namespace superres
