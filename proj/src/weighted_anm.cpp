#include "superres/weighted_anm.hpp"

#include <cmath>
#include <cstdio>
#include <deque>
#include <limits>

#include <Eigen/Cholesky>

#include "superres/errors.hpp"
#include "superres/linalg.hpp"

namespace superres {

WeightMatrix::WeightMatrix(CMatrix w) : w_(std::move(w)) {
    if (w_.rows() != w_.cols()) throw InvalidArgument("WeightMatrix: matrix must be square");
    if (w_.size() == 0) return;
    const double scale = std::max(w_.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
    if ((w_ - w_.adjoint()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
        throw InvalidArgument("WeightMatrix: matrix is not Hermitian");
    }
    w_ = hermitian_part(w_);
    const auto es = hermitian_eigen(w_);
    const double lo = es.eigenvalues()(0);
    const double hi = es.eigenvalues()(es.eigenvalues().size() - 1);
    if (lo < -1e-10 * std::max(hi, 0.0) - std::numeric_limits<double>::min()) {
        throw InvalidArgument("WeightMatrix: matrix is not positive semidefinite");
    }
}

WeightMatrix WeightMatrix::uniform(int n) {
    return WeightMatrix(CMatrix::Identity(n, n) / static_cast<double>(n));
}

CMatrix schur_block(const ToeplitzParam& u, const CMatrix& y, const CMatrix& z) {
    const Eigen::Index n = u.n();
    const Eigen::Index l = y.cols();
    CMatrix b(n + l, n + l);
    b.topLeftCorner(n, n) = toeplitz_lift(u);
    b.topRightCorner(n, l) = y;
    b.bottomLeftCorner(l, n) = y.adjoint();
    b.bottomRightCorner(l, l) = z;
    return b;
}

namespace {

// The problem is solved in normalized variables
//
//     Y = beta Yn,   T = (beta / sqrt(alpha)) Tn,   Z = beta sqrt(alpha) Zn,
//
// with alpha = tr(W) and beta the RMS row norm of the data, so that the
// normalized weight has unit trace and the normalized data unit row norm.
// Block matrices map by the congruence D = diag(alpha^{1/4} I_N, alpha^{-1/4} I_L):
// P = beta D^{-1} Pn D^{-1}; multipliers map as Lambda = sqrt(alpha) D Lambdan D.
struct Scaling {
    double alpha = 1.0;
    double beta = 1.0;
    Eigen::Index n = 0;
    Eigen::Index l = 0;

    double dt() const { return std::pow(alpha, 0.25); }

    CMatrix to_normalized_primal(const CMatrix& p) const {
        CMatrix out = p / beta;
        scale_blocks(out, dt());
        return out;
    }
    CMatrix to_physical_primal(const CMatrix& p) const {
        CMatrix out = p * beta;
        scale_blocks(out, 1.0 / dt());
        return out;
    }
    CMatrix to_normalized_dual(const CMatrix& lam) const {
        CMatrix out = lam / std::sqrt(alpha);
        scale_blocks(out, 1.0 / dt());
        return out;
    }
    CMatrix to_physical_dual(const CMatrix& lam) const {
        CMatrix out = lam * std::sqrt(alpha);
        scale_blocks(out, dt());
        return out;
    }

    // m <- diag(s I, I/s) m diag(s I, I/s)
    void scale_blocks(CMatrix& m, double s) const {
        m.topLeftCorner(n, n) *= s * s;
        m.bottomRightCorner(l, l) /= s * s;
    }
};

// Type-II Anderson acceleration of a fixed-point map x -> f(x).
class Anderson {
public:
    explicit Anderson(int memory) : memory_(static_cast<std::size_t>(std::max(memory, 0))) {}

    bool enabled() const { return memory_ > 0; }

    void reset() {
        df_.clear();
        dg_.clear();
        has_prev_ = false;
    }

    // Takes f = f(x) and g = f - x; returns the extrapolated next point, or f
    // while there is no history.
    RVector step(const RVector& f, const RVector& g) {
        if (has_prev_) {
            df_.push_back(f - f_prev_);
            dg_.push_back(g - g_prev_);
            if (df_.size() > memory_) {
                df_.pop_front();
                dg_.pop_front();
            }
        }
        f_prev_ = f;
        g_prev_ = g;
        has_prev_ = true;
        if (dg_.empty()) return f;

        const auto k = static_cast<Eigen::Index>(dg_.size());
        Eigen::MatrixXd gram(k, k);
        RVector rhs(k);
        for (Eigen::Index a = 0; a < k; ++a) {
            rhs(a) = dg_[static_cast<std::size_t>(a)].dot(g);
            for (Eigen::Index b = 0; b <= a; ++b) {
                gram(a, b) = dg_[static_cast<std::size_t>(a)].dot(dg_[static_cast<std::size_t>(b)]);
                gram(b, a) = gram(a, b);
            }
        }
        gram.diagonal().array() += 1e-10 * gram.trace() + std::numeric_limits<double>::min();
        const RVector gamma = gram.ldlt().solve(rhs);
        if (!gamma.allFinite()) return f;
        RVector x = f;
        for (Eigen::Index a = 0; a < k; ++a) x -= gamma(a) * df_[static_cast<std::size_t>(a)];
        return x;
    }

private:
    std::size_t memory_;
    std::deque<RVector> df_;
    std::deque<RVector> dg_;
    RVector f_prev_;
    RVector g_prev_;
    bool has_prev_ = false;
};

// Real view of the pair (S, Lambda / rho).
RVector pack(const CMatrix& s, const CMatrix& lam_scaled) {
    const Eigen::Index len = 2 * s.size();
    RVector out(2 * len);
    out.head(len) = Eigen::Map<const RVector>(reinterpret_cast<const double*>(s.data()), len);
    out.tail(len) = Eigen::Map<const RVector>(reinterpret_cast<const double*>(lam_scaled.data()), len);
    return out;
}

void unpack(const RVector& x, CMatrix& s, CMatrix& lam_scaled) {
    const Eigen::Index len = 2 * s.size();
    Eigen::Map<RVector>(reinterpret_cast<double*>(s.data()), len) = x.head(len);
    Eigen::Map<RVector>(reinterpret_cast<double*>(lam_scaled.data()), len) = x.tail(len);
}

// Real coordinates [Re u0, Re u1, Im u1, ...] of a Toeplitz parameter, in
// which the trace pairing is the Euclidean inner product.
RVector to_real(const CVector& v) {
    const Eigen::Index n = v.size();
    RVector out(2 * n - 1);
    out(0) = v(0).real();
    for (Eigen::Index d = 1; d < n; ++d) {
        out(2 * d - 1) = v(d).real();
        out(2 * d) = v(d).imag();
    }
    return out;
}

CVector from_real(const RVector& x, Eigen::Index n) {
    CVector v(n);
    v(0) = Complex(x(0), 0.0);
    for (Eigen::Index d = 1; d < n; ++d) v(d) = Complex(x(2 * d - 1), x(2 * d));
    return v;
}

// Congruence diag(P, I) applied to the PSD block, with P close to
// (N W)^{1/2}. The cost tr(W T) = tr(P T P) / N is then isotropic, which
// keeps the splitting well conditioned when W has a wide spectrum. The
// Toeplitz and data updates become small least-squares problems whose
// factorizations are formed once per solve.
struct Preconditioner {
    bool identity = true;
    CMatrix p;
    CMatrix p_inv;
    CMatrix p2;
    Eigen::LLT<Eigen::MatrixXd> u_normal;
    std::vector<int> free_rows;
    std::vector<int> obs_rows;
    Eigen::LLT<CMatrix> ff;  // (P^2)_{FF}
    CMatrix k;               // (P^2)_{FF}^{-1} (P^2)_{F, Omega}
    RVector s_vals;          // Schur complement of (P^2)_{FF}, eigenvalues
    CMatrix s_vecs;

    void build(const CMatrix& w_n, const SamplingPattern& pattern) {
        const Eigen::Index n = w_n.rows();
        const auto es = hermitian_eigen(w_n * static_cast<double>(n));
        const RVector& mu = es.eigenvalues();
        const double top = mu(n - 1);
        if (!(mu(0) < 0.5 * top)) return;  // already isotropic
        identity = false;
        RVector root(n);
        for (Eigen::Index i = 0; i < n; ++i) root(i) = std::sqrt(std::max(mu(i), 1e-12 * top));
        const CMatrix& v = es.eigenvectors();
        p = v * root.asDiagonal() * v.adjoint();
        p_inv = v * root.cwiseInverse().asDiagonal() * v.adjoint();
        p2 = v * root.cwiseAbs2().asDiagonal() * v.adjoint();

        const Eigen::Index r = 2 * n - 1;
        Eigen::MatrixXd h(r, r);
        for (Eigen::Index j = 0; j < r; ++j) {
            RVector e = RVector::Zero(r);
            e(j) = 1.0;
            h.col(j) = to_real(toeplitz_adjoint(p2 * toeplitz_lift(ToeplitzParam(from_real(e, n))) * p2));
        }
        u_normal.compute((h + h.transpose()) / 2.0);

        std::vector<bool> observed(static_cast<std::size_t>(n), false);
        for (int i = 0; i < pattern.m(); ++i) {
            observed[static_cast<std::size_t>(pattern.row(i))] = true;
            obs_rows.push_back(pattern.row(i));
        }
        for (int i = 0; i < n; ++i) {
            if (!observed[static_cast<std::size_t>(i)]) free_rows.push_back(i);
        }
        const CMatrix w_ff = select(p2, free_rows, free_rows);
        const CMatrix w_fo = select(p2, free_rows, obs_rows);
        CMatrix schur = select(p2, obs_rows, obs_rows);
        if (!free_rows.empty()) {
            ff.compute(w_ff);
            k = ff.solve(w_fo);
            schur -= w_fo.adjoint() * k;
        } else {
            k = CMatrix::Zero(0, static_cast<Eigen::Index>(obs_rows.size()));
        }
        const auto se = hermitian_eigen(hermitian_part(schur));
        s_vals = se.eigenvalues().cwiseMax(1e-300);
        s_vecs = se.eigenvectors();
    }

    static CMatrix select(const CMatrix& a, const std::vector<int>& rows, const std::vector<int>& cols) {
        CMatrix out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
        for (std::size_t i = 0; i < rows.size(); ++i) {
            for (std::size_t j = 0; j < cols.size(); ++j) {
                out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = a(rows[i], cols[j]);
            }
        }
        return out;
    }

    // argmin ||P Y - G|| over Y with ||Y_Omega - C|| <= eta (eta < 0: equality).
    CMatrix project_y(const CMatrix& g, const CMatrix& c, double eta) const {
        const Eigen::Index l = g.cols();
        const CMatrix h = p * g;
        CMatrix h_f(static_cast<Eigen::Index>(free_rows.size()), l);
        CMatrix h_o(static_cast<Eigen::Index>(obs_rows.size()), l);
        for (std::size_t a = 0; a < free_rows.size(); ++a) h_f.row(static_cast<Eigen::Index>(a)) = h.row(free_rows[a]);
        for (std::size_t a = 0; a < obs_rows.size(); ++a) h_o.row(static_cast<Eigen::Index>(a)) = h.row(obs_rows[a]);

        CMatrix y_o = c;
        if (eta > 0.0) {
            // Trust-region step in the eigenbasis of the Schur complement:
            // Y_Omega - C = V (S + mu)^{-1} V^H (b - S C).
            const CMatrix b = free_rows.empty() ? h_o : CMatrix(h_o - k.adjoint() * h_f);
            const CMatrix rt = s_vecs.adjoint() * b - s_vals.asDiagonal() * (s_vecs.adjoint() * c);
            const RVector row2 = rt.rowwise().squaredNorm();
            const auto dist = [&](double m) { return std::sqrt((row2.array() / (s_vals.array() + m).square()).sum()); };
            double mu = 0.0;
            if (dist(0.0) > eta) {
                double lo = 0.0;
                double hi = std::sqrt(row2.sum()) / eta;
                for (int i = 0; i < 200 && hi - lo > 1e-15 * hi; ++i) {
                    // Newton on 1/dist - 1/eta, kept inside the bracket.
                    const double d = dist(mu);
                    const double d3 = (row2.array() / (s_vals.array() + mu).cube()).sum();
                    if (d > eta) lo = mu; else hi = mu;
                    double next = mu - (1.0 / d - 1.0 / eta) * d * d * d / d3;
                    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
                    if (std::abs(next - mu) <= 1e-15 * std::max(mu, 1e-300)) break;
                    mu = next;
                }
            }
            CMatrix step = s_vecs * ((s_vals.array() + mu).inverse().matrix().asDiagonal() * rt);
            const double len = step.norm();
            if (len > eta) step *= eta / len;
            y_o = c + step;
        }
        CMatrix y(p.rows(), l);
        if (!free_rows.empty()) {
            const CMatrix y_f = ff.solve(h_f) - k * y_o;
            for (std::size_t a = 0; a < free_rows.size(); ++a) y.row(free_rows[a]) = y_f.row(static_cast<Eigen::Index>(a));
        }
        for (std::size_t a = 0; a < obs_rows.size(); ++a) y.row(obs_rows[a]) = y_o.row(static_cast<Eigen::Index>(a));
        return y;
    }

    // B -> D B D and Lambda -> D^{-1} Lambda D^{-1} with D = diag(P, I).
    void to_primal(CMatrix& b, Eigen::Index n) const { congruence(b, n, p); }
    void to_dual(CMatrix& b, Eigen::Index n) const { congruence(b, n, p_inv); }
    void from_primal(CMatrix& b, Eigen::Index n) const { congruence(b, n, p_inv); }
    void from_dual(CMatrix& b, Eigen::Index n) const { congruence(b, n, p); }

    static void congruence(CMatrix& b, Eigen::Index n, const CMatrix& q) {
        const Eigen::Index l = b.rows() - n;
        b.topLeftCorner(n, n) = q * b.topLeftCorner(n, n) * q;
        b.topRightCorner(n, l) = q * b.topRightCorner(n, l);
        b.bottomLeftCorner(l, n) = b.bottomLeftCorner(l, n) * q;
    }
};

SdpSolution zero_solution(int n, Eigen::Index l) {
    SdpSolution sol;
    sol.y_star = CMatrix::Zero(n, l);
    sol.u_star = ToeplitzParam::zero(n);
    sol.z_star = CMatrix::Zero(l, l);
    sol.converged = true;
    return sol;
}

}  // namespace

SdpSolution solve_weighted_anm(const MeasurementSet& meas, const WeightMatrix& weight,
                               const SolverOptions& opts, const SolverState* warm) {
    const int n = meas.n();
    const Eigen::Index l = meas.l();
    const int m = meas.m();
    if (weight.n() != n) throw InvalidArgument("solve_weighted_anm: weight matrix has wrong order");
    if (l < 1) throw InvalidArgument("solve_weighted_anm: need at least one snapshot");
    if (!(opts.relaxation > 0.0 && opts.relaxation < 2.0)) {
        throw InvalidArgument("solve_weighted_anm: relaxation must lie in (0, 2)");
    }
    if (opts.anderson_memory < 0) throw InvalidArgument("solve_weighted_anm: anderson_memory must be >= 0");
    const double eta = meas.radius();
    const bool ball = std::holds_alternative<BallOnOmega>(meas.domain());

    // Y = 0, T = 0 is feasible and the objective is nonnegative.
    const double data_norm = meas.y_obs().norm();
    if (m == 0 || data_norm <= eta) return zero_solution(n, l);

    Scaling sc;
    sc.n = n;
    sc.l = l;
    sc.alpha = weight.w().trace().real();
    if (!(sc.alpha > 0.0)) throw InvalidArgument("solve_weighted_anm: weight matrix has zero trace");
    sc.beta = data_norm / std::sqrt(static_cast<double>(m));

    const CMatrix w_n = weight.w() / sc.alpha;
    const CMatrix center = meas.y_obs() / sc.beta;
    const double radius = eta / sc.beta;
    const CVector tw = toeplitz_adjoint(w_n);
    const RVector gram = toeplitz_gram_diagonal(n);
    const double sqrt_n = std::sqrt(static_cast<double>(n));
    const Eigen::Index dim = n + l;

    Preconditioner pre;
    if (opts.precondition) pre.build(w_n, meas.pattern());

    CMatrix s = CMatrix::Zero(dim, dim);
    CMatrix lambda = CMatrix::Zero(dim, dim);
    double rho = opts.rho;
    if (warm != nullptr) {
        if (warm->s.rows() != dim || warm->lambda.rows() != dim) {
            throw InvalidArgument("solve_weighted_anm: warm state has wrong dimensions");
        }
        s = sc.to_normalized_primal(warm->s);
        lambda = sc.to_normalized_dual(warm->lambda);
        if (!pre.identity) {
            pre.to_primal(s, n);
            pre.to_dual(lambda, n);
        }
        rho = warm->rho;
    }

    CVector u(n);
    CMatrix y(n, l);
    CMatrix z(l, l);
    CMatrix theta(dim, dim);
    CMatrix s_new(dim, dim);
    CMatrix lambda_new(dim, dim);
    CMatrix s_plain(dim, dim);
    CMatrix lambda_plain(dim, dim);
    Anderson aa(opts.anderson_memory);
    bool extrapolated = false;
    double g_norm_ref = std::numeric_limits<double>::infinity();
    Eigen::SelfAdjointEigenSolver<CMatrix> es(dim);

    CVector best_u = CVector::Zero(n);
    CMatrix best_y = CMatrix::Zero(n, l);
    CMatrix best_z = CMatrix::Zero(l, l);
    double best_res = std::numeric_limits<double>::infinity();
    double best_rp = 0.0;
    double best_rd = 0.0;

    SdpSolution sol;
    int it = 0;
    double rp = 0.0;
    double rd = 0.0;
    for (it = 1; it <= opts.max_iter; ++it) {
        const CMatrix g = s - lambda / rho;

        if (pre.identity) {
            // u: quadratic in the lift plus the linear weight term, diagonal Gram.
            const CVector tg = toeplitz_adjoint(g.topLeftCorner(n, n));
            for (int d = 0; d < n; ++d) u(d) = (tg(d) - (sqrt_n / (2.0 * rho)) * tw(d)) / gram(d);
            u(0) = Complex(u(0).real(), 0.0);
        } else {
            const CVector tg = toeplitz_adjoint(pre.p * g.topLeftCorner(n, n) * pre.p);
            u = from_real(pre.u_normal.solve(to_real(tg - (sqrt_n / (2.0 * rho)) * tw)), n);
        }

        // Y: average of the two off-diagonal blocks, then the domain projection.
        y = (g.topRightCorner(n, l) + g.bottomLeftCorner(l, n).adjoint()) / 2.0;
        if (!pre.identity) {
            y = pre.project_y(y, center, ball ? radius : -1.0);
        } else if (ball) {
            double dev2 = 0.0;
            for (int i = 0; i < m; ++i) dev2 += (y.row(meas.pattern().row(i)) - center.row(i)).squaredNorm();
            const double dev = std::sqrt(dev2);
            const double shrink = dev > radius ? radius / dev : 1.0;
            for (int i = 0; i < m; ++i) {
                const int r = meas.pattern().row(i);
                y.row(r) = center.row(i) + shrink * (y.row(r) - center.row(i));
            }
        } else {
            for (int i = 0; i < m; ++i) y.row(meas.pattern().row(i)) = center.row(i);
        }

        z = hermitian_part(g.bottomRightCorner(l, l));
        z.diagonal().array() -= 1.0 / (2.0 * sqrt_n * rho);

        theta.topLeftCorner(n, n) = toeplitz_lift(ToeplitzParam(u));
        theta.topRightCorner(n, l) = y;
        theta.bottomLeftCorner(l, n) = y.adjoint();
        theta.bottomRightCorner(l, l) = z;
        if (!pre.identity) pre.to_primal(theta, n);

        const CMatrix relaxed = opts.relaxation * theta + (1.0 - opts.relaxation) * s;
        es.compute(relaxed + lambda / rho);
        const RVector& ev = es.eigenvalues();
        Eigen::Index first = 0;
        while (first < dim && ev(first) <= 0.0) ++first;
        const Eigen::Index k = dim - first;
        if (k == 0) {
            s_new.setZero();
        } else {
            const auto v = es.eigenvectors().rightCols(k);
            s_new.noalias() = v * ev.tail(k).asDiagonal() * v.adjoint();
        }
        lambda_new = lambda + rho * (relaxed - s_new);

        const double scale_p = std::max({theta.norm(), s_new.norm(), 1.0});
        rp = (theta - s_new).norm() / scale_p;
        rd = rho * (s_new - s).norm() / std::max(lambda_new.norm(), 1.0);

        const double res = std::max(rp, rd);
        if (res < best_res) {
            best_res = res;
            best_u = u;
            best_y = y;
            best_z = z;
            best_rp = rp;
            best_rd = rd;
        }
        if (opts.verbose && (it % 500 == 0 || it == 1)) {
            std::fprintf(stderr, "admm it=%6d rp=%.3e rd=%.3e rho=%.3e\n", it, rp, rd, rho);
        }
        // Residuals at an extrapolated point understate the distance to the
        // solution when W is badly conditioned; those points must get 100x
        // closer before they are accepted.
        const double tol = extrapolated ? 1e-2 * opts.tol : opts.tol;
        if (rp <= tol && rd <= tol) {
            s.swap(s_new);
            lambda.swap(lambda_new);
            sol.converged = true;
            break;
        }

        if (aa.enabled()) {
            const RVector f = pack(s_new, lambda_new / rho);
            const RVector g = f - pack(s, lambda / rho);
            const double g_norm = g.norm();
            if (extrapolated && !(g_norm <= g_norm_ref)) {
                // The extrapolated point made things worse: resume from the
                // plain step it replaced.
                s = s_plain;
                lambda = lambda_plain;
                aa.reset();
                extrapolated = false;
            } else {
                s_plain = s_new;
                lambda_plain = lambda_new;
                g_norm_ref = g_norm;
                const RVector x = aa.step(f, g);
                CMatrix lam_scaled(dim, dim);
                unpack(x, s, lam_scaled);
                lambda = rho * lam_scaled;
                extrapolated = true;
            }
        } else {
            s.swap(s_new);
            lambda.swap(lambda_new);
        }

        if (opts.rho_update_every > 0 && it % opts.rho_update_every == 0) {
            const double before = rho;
            if (rp > 3.0 * rd) {
                rho *= 2.0;
            } else if (rd > 3.0 * rp) {
                rho /= 2.0;
            }
            if (rho != before && aa.enabled()) {
                // The fixed-point map depends on rho; old differences no
                // longer apply.
                if (extrapolated) {
                    s = s_plain;
                    lambda = lambda_plain;
                }
                aa.reset();
                extrapolated = false;
            }
        }
    }
    sol.iterations = std::min(it, opts.max_iter);

    if (!sol.converged) {
        u = best_u;
        y = best_y;
        z = best_z;
        rp = best_rp;
        rd = best_rd;
    }
    sol.primal_residual = rp;
    sol.dual_or_fixed_point_residual = rd;

    // Shift T and Z by the most negative eigenvalue of the block so that the
    // returned triple is exactly feasible.
    const CMatrix block_n = schur_block(ToeplitzParam(u), y, z);
    const double lo = hermitian_eigen(block_n).eigenvalues()(0);
    if (lo < 0.0) {
        u(0) += -lo;
        z.diagonal().array() += -lo;
    }

    const double t_scale = sc.beta / std::sqrt(sc.alpha);
    sol.u_star = ToeplitzParam(u * t_scale);
    sol.y_star = y * sc.beta;
    sol.z_star = hermitian_part(z) * (sc.beta * std::sqrt(sc.alpha));
    // Restore observed rows bit-exactly for the equality domain.
    if (!ball) {
        for (int i = 0; i < m; ++i) sol.y_star.row(meas.pattern().row(i)) = meas.y_obs().row(i);
    }
    sol.objective = (sqrt_n / 2.0) * real_inner(weight.w(), toeplitz_lift(sol.u_star)) +
                    sol.z_star.trace().real() / (2.0 * sqrt_n);
    if (!pre.identity) {
        pre.from_primal(s, n);
        pre.from_dual(lambda, n);
    }
    sol.state = SolverState{sc.to_physical_primal(s), sc.to_physical_dual(lambda), rho};
    return sol;
}

double atomic_norm(const CMatrix& y, const SolverOptions& opts) {
    const int n = static_cast<int>(y.rows());
    const MeasurementSet meas(SamplingPattern::full(n), y, EqualityOnOmega{});
    return solve_weighted_anm(meas, WeightMatrix::uniform(n), opts).objective;
}

}  // namespace superres
