#pragma once

#include "superres/signal_model.hpp"

namespace superres {

/// First row u of a Hermitian Toeplitz matrix T(u); u(0) is real.
class ToeplitzParam {
public:
    ToeplitzParam() = default;

    /// Throws InvalidArgument if u(0) has a non-negligible imaginary part;
    /// a negligible one is dropped.
    explicit ToeplitzParam(CVector u);

    static ToeplitzParam zero(int n) { return ToeplitzParam(CVector::Zero(n)); }

    /// Parameter of p a(f) a(f)^H.
    static ToeplitzParam sinusoid(double f, double p, int n);

    const CVector& u() const { return u_; }
    int n() const { return static_cast<int>(u_.size()); }

private:
    CVector u_;
};

/// T(u)[j, k] = u[k - j] for k >= j and conj(u[j - k]) otherwise.
CMatrix toeplitz_lift(const ToeplitzParam& u);

/// Adjoint of the lift under the real trace pairing:
///
///     Re tr(T(u)^H M) = Re sum_d conj(u[d]) v[d],   v = toeplitz_adjoint(M),
///
/// with v[0] = Re tr(M) and v[d] = sum_j (M[j, j+d] + conj(M[j+d, j])).
CVector toeplitz_adjoint(const CMatrix& m);

/// Diagonal of adjoint(lift(.)): N for d = 0, 2 (N - d) otherwise.
RVector toeplitz_gram_diagonal(int n);

/// Parameter of sum_k p_k a(f_k) a(f_k)^H.
ToeplitzParam toeplitz_from_atoms(const std::vector<double>& freqs, const std::vector<double>& powers,
                                  int n);

}  // namespace superres
