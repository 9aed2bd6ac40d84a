#pragma once

#include <optional>

#include "superres/signal_model.hpp"
#include "superres/toeplitz.hpp"

namespace superres {

/// Hermitian PSD matrix W defining the weighting w(f) = (a(f)^H W a(f))^{-1/2}.
class WeightMatrix {
public:
    WeightMatrix() = default;

    /// Throws InvalidArgument unless w is Hermitian to 1e-12 (relative) and
    /// its smallest eigenvalue is >= -1e-10 (relative to the largest).
    explicit WeightMatrix(CMatrix w);

    /// (1/n) I: the unweighted atomic norm.
    static WeightMatrix uniform(int n);

    const CMatrix& w() const { return w_; }
    int n() const { return static_cast<int>(w_.rows()); }

private:
    CMatrix w_;
};

struct SolverOptions {
    double tol = 1e-7;
    int max_iter = 50000;
    /// Over-relaxation factor of the splitting, in (0, 2).
    double relaxation = 1.6;
    /// Initial penalty parameter (in the solver's normalized units).
    double rho = 1.0;
    /// Residual-balancing interval; 0 keeps rho fixed.
    int rho_update_every = 25;
    /// Anderson acceleration memory on the splitting's fixed-point map; 0
    /// turns it off. Steps that increase the fixed-point residual are
    /// rejected in favour of the plain step.
    int anderson_memory = 5;
    /// Precondition the PSD block by diag((N W)^{1/2}, I) when W is far from
    /// a multiple of the identity.
    bool precondition = true;
    bool verbose = false;
};

/// Internal iterate of the splitting solver, kept in problem units so that
/// it can seed a nearby solve (e.g. the next reweighting step).
struct SolverState {
    CMatrix s;       ///< PSD block variable.
    CMatrix lambda;  ///< Multiplier of the block consistency constraint.
    double rho = 1.0;
};

struct SdpSolution {
    CMatrix y_star;                  ///< N x L completed data.
    ToeplitzParam u_star;
    CMatrix z_star;                  ///< L x L slack block of the Schur lift.
    double objective = 0.0;          ///< Lifted objective at the returned point.
    double primal_residual = 0.0;
    double dual_or_fixed_point_residual = 0.0;
    int iterations = 0;
    bool converged = false;
    std::optional<SolverState> state;
};

/// Solves
///
///     min  (sqrt(N)/2) tr(W T(u)) + (1/(2 sqrt(N))) tr(Z)
///     s.t. [[T(u), Y], [Y^H, Z]] >= 0,  Y in D
///
/// by over-relaxed ADMM on the PSD cone. At optimality tr(Z) equals
/// tr(Y^H T(u)^{-1} Y), so the objective is the weighted atomic norm of Y
/// minimized over the feasible domain. The returned point is exactly
/// feasible: a final uniform shift of T and Z absorbs the remaining
/// consistency residual.
///
/// `warm` seeds the iterate; it must come from a solve with the same N and L.
SdpSolution solve_weighted_anm(const MeasurementSet& meas, const WeightMatrix& w,
                               const SolverOptions& opts = {},
                               const SolverState* warm = nullptr);

/// Atomic norm of a fully known matrix y (N x L).
double atomic_norm(const CMatrix& y, const SolverOptions& opts = {});

/// Block matrix [[T(u), Y], [Y^H, Z]].
CMatrix schur_block(const ToeplitzParam& u, const CMatrix& y, const CMatrix& z);

}  // namespace superres
