#include "superres/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "superres/errors.hpp"
#include "superres/linalg.hpp"

namespace superres {

int numerical_rank(const CMatrix& t, double rel_tol) {
    if (t.size() == 0) return 0;
    const RVector ev = hermitian_eigen(t).eigenvalues();
    const double lmax = ev(ev.size() - 1);
    if (!(lmax > 0.0)) return 0;
    int rank = 0;
    for (Eigen::Index i = 0; i < ev.size(); ++i) rank += ev(i) > rel_tol * lmax ? 1 : 0;
    return rank;
}

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Lawson-Hanson active set method for min ||A x - b||, x >= 0, posed through
// the normal equations G = A^T A, h = A^T b.
RVector nnls_normal(const Eigen::MatrixXd& g, const RVector& h) {
    const Eigen::Index k = h.size();
    RVector x = RVector::Zero(k);
    if (k == 0) return x;
    std::vector<bool> passive(static_cast<std::size_t>(k), false);
    const double tol = 1e-14 * std::max(g.cwiseAbs().maxCoeff(), 1.0) * static_cast<double>(k);

    auto solve_passive = [&](RVector& z) {
        std::vector<Eigen::Index> idx;
        for (Eigen::Index i = 0; i < k; ++i) {
            if (passive[static_cast<std::size_t>(i)]) idx.push_back(i);
        }
        z = RVector::Zero(k);
        if (idx.empty()) return;
        const auto p = static_cast<Eigen::Index>(idx.size());
        Eigen::MatrixXd gp(p, p);
        RVector hp(p);
        for (Eigen::Index a = 0; a < p; ++a) {
            hp(a) = h(idx[static_cast<std::size_t>(a)]);
            for (Eigen::Index b = 0; b < p; ++b) gp(a, b) = g(idx[static_cast<std::size_t>(a)], idx[static_cast<std::size_t>(b)]);
        }
        const RVector zp = gp.completeOrthogonalDecomposition().solve(hp);
        for (Eigen::Index a = 0; a < p; ++a) z(idx[static_cast<std::size_t>(a)]) = zp(a);
    };

    for (int outer = 0; outer < 3 * static_cast<int>(k) + 10; ++outer) {
        const RVector grad = h - g * x;
        Eigen::Index best = -1;
        double best_val = tol;
        for (Eigen::Index i = 0; i < k; ++i) {
            if (!passive[static_cast<std::size_t>(i)] && grad(i) > best_val) {
                best_val = grad(i);
                best = i;
            }
        }
        if (best < 0) break;
        passive[static_cast<std::size_t>(best)] = true;
        for (int inner = 0; inner < 3 * static_cast<int>(k) + 10; ++inner) {
            RVector z;
            solve_passive(z);
            bool feasible = true;
            for (Eigen::Index i = 0; i < k; ++i) {
                if (passive[static_cast<std::size_t>(i)] && z(i) <= 0.0) feasible = false;
            }
            if (feasible) {
                x = z;
                break;
            }
            double step = 1.0;
            for (Eigen::Index i = 0; i < k; ++i) {
                if (passive[static_cast<std::size_t>(i)] && z(i) <= 0.0) {
                    step = std::min(step, x(i) / (x(i) - z(i)));
                }
            }
            x += step * (z - x);
            for (Eigen::Index i = 0; i < k; ++i) {
                if (passive[static_cast<std::size_t>(i)] && x(i) <= tol) {
                    passive[static_cast<std::size_t>(i)] = false;
                    x(i) = 0.0;
                }
            }
        }
    }
    return x;
}

// Roots of sum_j c_j z^j via the companion matrix; trailing zero
// coefficients (roots at infinity) are dropped.
std::vector<Complex> polynomial_roots(CVector c) {
    Eigen::Index deg = c.size() - 1;
    const double cmax = c.cwiseAbs().maxCoeff();
    while (deg > 0 && std::abs(c(deg)) <= 1e-13 * cmax) --deg;
    if (deg < 1) return {};
    CMatrix companion = CMatrix::Zero(deg, deg);
    for (Eigen::Index i = 1; i < deg; ++i) companion(i, i - 1) = 1.0;
    for (Eigen::Index i = 0; i < deg; ++i) companion(i, deg - 1) = -c(i) / c(deg);
    const Eigen::ComplexEigenSolver<CMatrix> es(companion, false);
    std::vector<Complex> roots(static_cast<std::size_t>(deg));
    for (Eigen::Index i = 0; i < deg; ++i) roots[static_cast<std::size_t>(i)] = es.eigenvalues()(i);
    return roots;
}

// Newton iterations on the derivative of g(f) = ||E^H a(f)||^2.
double polish_null(const CMatrix& noise, double f) {
    const Eigen::Index n = noise.rows();
    auto eval = [&](double x, double& g, double& d1, double& d2) {
        CVector a(n), da(n), dda(n);
        for (Eigen::Index j = 0; j < n; ++j) {
            const Complex e = std::polar(1.0, kTwoPi * x * static_cast<double>(j));
            const double w = kTwoPi * static_cast<double>(j);
            a(j) = e;
            da(j) = Complex(0.0, w) * e;
            dda(j) = -w * w * e;
        }
        const CVector b = noise.adjoint() * a;
        const CVector db = noise.adjoint() * da;
        const CVector ddb = noise.adjoint() * dda;
        g = b.squaredNorm();
        d1 = 2.0 * b.dot(db).real();
        d2 = 2.0 * (db.squaredNorm() + b.dot(ddb).real());
    };
    double g = 0.0, d1 = 0.0, d2 = 0.0;
    eval(f, g, d1, d2);
    for (int it = 0; it < 20; ++it) {
        if (!(d2 > 0.0)) break;
        const double step = d1 / d2;
        // Newton never needs to travel beyond a fraction of a bin here.
        if (std::abs(step) > 0.5 / static_cast<double>(n)) break;
        double g2 = 0.0, e1 = 0.0, e2 = 0.0;
        eval(f - step, g2, e1, e2);
        if (!(g2 <= g)) break;
        f -= step;
        g = g2;
        d1 = e1;
        d2 = e2;
        if (std::abs(step) < 1e-15) break;
    }
    return canonical_frequency(f);
}

}  // namespace

RetrievedSpectrum vandermonde_decompose(const ToeplitzParam& u, int k_hat, const VandermondeOptions& opts) {
    const int n = u.n();
    if (k_hat < 0) throw InvalidArgument("vandermonde_decompose: k_hat must be >= 0");
    if (k_hat >= n) throw FullRank("vandermonde_decompose: k_hat must be below N");
    const CMatrix t = toeplitz_lift(u);
    const double t_norm = t.norm();

    RetrievedSpectrum out;
    if (k_hat == 0) {
        out.residual = t_norm > 0.0 ? 1.0 : 0.0;
    } else {
        const auto es = hermitian_eigen(t);
        const CMatrix noise = es.eigenvectors().leftCols(n - k_hat);

        // Minimum-norm null vector: projection of e_1 onto the noise
        // subspace. Its polynomial has the signal roots on the unit circle
        // and the extraneous ones strictly inside.
        const CVector d = noise * noise.row(0).adjoint();
        std::vector<Complex> roots = polynomial_roots(d.conjugate());

        std::sort(roots.begin(), roots.end(), [](Complex a, Complex b) {
            return std::abs(1.0 - std::abs(a)) < std::abs(1.0 - std::abs(b));
        });
        std::vector<double> freqs;
        for (std::size_t i = 0; i < roots.size() && static_cast<int>(freqs.size()) < k_hat; ++i) {
            const double f = polish_null(noise, canonical_frequency(std::arg(roots[i]) / kTwoPi));
            const bool dup = std::any_of(freqs.begin(), freqs.end(),
                                         [&](double g) { return wrap_distance(f, g) < 1e-9; });
            if (!dup) freqs.push_back(f);
        }

        const auto k = static_cast<Eigen::Index>(freqs.size());
        std::vector<CVector> atoms;
        for (double f : freqs) atoms.push_back(steering_vector(f, n));
        Eigen::MatrixXd gram(k, k);
        RVector rhs(k);
        for (Eigen::Index a = 0; a < k; ++a) {
            rhs(a) = atoms[static_cast<std::size_t>(a)].dot(t * atoms[static_cast<std::size_t>(a)]).real();
            for (Eigen::Index b = 0; b < k; ++b) {
                gram(a, b) = std::norm(atoms[static_cast<std::size_t>(a)].dot(atoms[static_cast<std::size_t>(b)]));
            }
        }
        const RVector p = nnls_normal(gram, rhs);

        std::vector<std::size_t> order(static_cast<std::size_t>(k));
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return freqs[a] < freqs[b]; });
        CMatrix recon = CMatrix::Zero(n, n);
        for (std::size_t i : order) {
            const double pi = p(static_cast<Eigen::Index>(i));
            if (!(pi > 0.0)) continue;
            out.freqs.push_back(freqs[i]);
            out.powers.push_back(pi);
            recon += pi * atoms[i] * atoms[i].adjoint();
        }
        out.order = static_cast<int>(out.freqs.size());
        out.residual = t_norm > 0.0 ? (t - recon).norm() / t_norm : 0.0;
    }
    if (opts.strict && out.residual > opts.max_rel_residual) {
        throw ReconstructionFailure("vandermonde_decompose: relative residual " + std::to_string(out.residual));
    }
    return out;
}

RetrievedSpectrum retrieve_spectrum(const ToeplitzParam& u, double rank_rel_tol) {
    const int k = std::min(numerical_rank(toeplitz_lift(u), rank_rel_tol), u.n() - 1);
    return vandermonde_decompose(u, std::max(k, 0), VandermondeOptions{.max_rel_residual = 1.0, .strict = false});
}

std::vector<int> min_cost_assignment(const Eigen::MatrixXd& cost) {
    const Eigen::Index rows = cost.rows();
    const Eigen::Index cols = cost.cols();
    if (rows == 0) return {};
    if (cols == 0) return std::vector<int>(static_cast<std::size_t>(rows), -1);
    if (rows > cols) {
        const std::vector<int> t = min_cost_assignment(cost.transpose());
        std::vector<int> out(static_cast<std::size_t>(rows), -1);
        for (std::size_t c = 0; c < t.size(); ++c) out[static_cast<std::size_t>(t[c])] = static_cast<int>(c);
        return out;
    }
    // Hungarian method with potentials, rows <= cols, 1-based internals.
    const auto n = static_cast<std::size_t>(rows);
    const auto m = static_cast<std::size_t>(cols);
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> pu(n + 1, 0.0), pv(m + 1, 0.0);
    std::vector<std::size_t> match(m + 1, 0), way(m + 1, 0);
    for (std::size_t i = 1; i <= n; ++i) {
        match[0] = i;
        std::size_t j0 = 0;
        std::vector<double> minv(m + 1, inf);
        std::vector<bool> used(m + 1, false);
        do {
            used[j0] = true;
            const std::size_t i0 = match[j0];
            double delta = inf;
            std::size_t j1 = 0;
            for (std::size_t j = 1; j <= m; ++j) {
                if (used[j]) continue;
                const double cur = cost(static_cast<Eigen::Index>(i0 - 1), static_cast<Eigen::Index>(j - 1)) - pu[i0] - pv[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= m; ++j) {
                if (used[j]) {
                    pu[match[j]] += delta;
                    pv[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (match[j0] != 0);
        do {
            const std::size_t j1 = way[j0];
            match[j0] = match[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    std::vector<int> out(n, -1);
    for (std::size_t j = 1; j <= m; ++j) {
        if (match[j] != 0) out[match[j] - 1] = static_cast<int>(j - 1);
    }
    return out;
}

MatchScore match_and_score(const std::vector<double>& est, const std::vector<double>& truth) {
    MatchScore score;
    const auto k = truth.size();
    score.detected.assign(k, false);
    score.errors.assign(k, std::numeric_limits<double>::quiet_NaN());
    score.assignment.assign(k, -1);
    score.order_error = static_cast<int>(est.size()) - static_cast<int>(k);
    if (k == 0 || est.empty()) return score;

    Eigen::MatrixXd cost(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(est.size()));
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < est.size(); ++j) {
            const double d = wrap_distance(truth[i], est[j]);
            cost(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = d * d;
        }
    }
    const std::vector<int> assign = min_cost_assignment(cost);
    double total = 0.0;
    int pairs = 0;
    for (std::size_t i = 0; i < k; ++i) {
        if (assign[i] < 0) continue;
        const double d = wrap_distance(truth[i], est[static_cast<std::size_t>(assign[i])]);
        score.detected[i] = true;
        score.errors[i] = d;
        score.assignment[i] = assign[i];
        total += d * d;
        ++pairs;
    }
    score.freq_mse = pairs > 0 ? total / pairs : 0.0;
    return score;
}

MatchScore match_and_score(const RetrievedSpectrum& est, const FrequencyMixture& truth) {
    return match_and_score(est.freqs, truth.freqs());
}

double signal_relative_mse(const CMatrix& y_est, const CMatrix& y_true) {
    if (y_est.rows() != y_true.rows() || y_est.cols() != y_true.cols()) {
        throw InvalidArgument("signal_relative_mse: shape mismatch");
    }
    const double denom = y_true.squaredNorm();
    if (denom == 0.0) throw InvalidArgument("signal_relative_mse: zero reference signal");
    return (y_est - y_true).squaredNorm() / denom;
}

}  // namespace superres
