#pragma once

#include <iosfwd>
#include <vector>

#include "superres/weighted_anm.hpp"

namespace superres {

/// Settings of the reweighted atomic-norm iteration.
struct RamConfig {
    double eps0 = 1.0;
    bool eps_halving = true;
    double eps_floor = 1.0 / 1024.0;
    int max_iters = 20;
    double rel_change_tol = 1e-6;
    /// Scale the data so that ||Y_Omega||_F^2 = M before solving.
    bool scale_to_m = true;
    /// Seed each weighted solve with the previous solver iterate.
    bool warm_start = true;
    SolverOptions solver;

    /// Throws InvalidArgument when eps_floor > eps0, max_iters < 1, etc.
    void validate() const;
};

struct RamIteration {
    int j = 0;
    double eps = 0.0;
    ToeplitzParam u;                   ///< Working (scaled) units.
    CMatrix y;                         ///< Working (scaled) units.
    double objective_metric = 0.0;     ///< ln det(T(u)+eps I) + tr(Y^H T(u)^+ Y).
    double surrogate_objective = 0.0;  ///< Linearized objective at this solve.
    double rel_change = 0.0;           ///< ||Y_j - Y_{j-1}||_F / ||Y_{j-1}||_F; NaN at j = 1.
    double primal_residual = 0.0;
    double dual_residual = 0.0;
    int solver_iterations = 0;
    bool solver_converged = false;
    double wall_seconds = 0.0;
};

struct RamTrace {
    std::vector<RamIteration> iterations;
    /// Factor applied to the data before solving (1 when scaling is off).
    double scale = 1.0;
    /// Stopped on the relative-change rule rather than the iteration cap.
    bool converged = false;
    /// Stopped after two consecutive inner solver failures.
    bool aborted = false;
};

struct RamResult {
    SdpSolution solution;
    RamTrace trace;
};

/// (1/N) (T(u_prev) + eps I)^{-1}, computed through the eigen-decomposition of
/// T(u_prev) with negative eigenvalues clamped to zero. For u_prev = 0 the
/// result is exactly I / (N eps).
WeightMatrix reweight(const ToeplitzParam& u_prev, double eps);

/// (a(f)^H W a(f))^{-1/2}; throws DegenerateWeight when the form vanishes.
double capon_weight(double f, const WeightMatrix& w);

/// Epsilon used at iteration j (1-based) under the schedule in cfg.
double eps_schedule(const RamConfig& cfg, int j);

/// Majorization-minimization on ln det(T(u) + eps I) + tr(Y^H T(u)^{-1} Y)
/// over Y in the feasible domain: each step is a weighted atomic-norm
/// problem with W_j = reweight(u_{j-1}, eps_j), starting from u_0 = 0.
RamResult ram_solve(const MeasurementSet& meas, const RamConfig& cfg = {});

/// One unweighted atomic-norm solve.
SdpSolution anm_solve(const MeasurementSet& meas, const SolverOptions& opts = {});

/// True iff the objective_metric values never increase by more than
/// 1e-6 (1 + |value|). Only meaningful for traces run at a fixed eps.
bool mm_objective_decrease_check(const RamTrace& trace);

struct SparseMetricMinimum {
    ToeplitzParam u;
    double value = 0.0;
    int iterations = 0;
    std::vector<double> history;
};

/// Minimizes the sparse metric over u for a fully known Y by the same
/// majorization-minimization steps (Y is fixed, so only u moves). Stops when
/// the relative change of u drops below rel_tol.
SparseMetricMinimum minimize_sparse_metric(const CMatrix& y, double eps, int max_iters = 50,
                                           double rel_tol = 1e-9, const SolverOptions& opts = {});

/// One CSV row per iteration: j, eps, metric, surrogate, rel_change,
/// primal_residual, dual_residual, solver_iterations, wall_seconds.
void write_trace_csv(std::ostream& os, const RamTrace& trace);

}  // namespace superres
