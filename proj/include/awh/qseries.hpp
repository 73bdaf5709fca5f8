#pragma once

#include <vector>

#include "awh/numerics.hpp"

namespace awh {

// Base q of all series here; the library never works outside |q| < 1.
struct QBase {
    double q;
    explicit QBase(double qv) : q(qv) {
        if (!(qv > -1.0 && qv < 1.0))
            throw DomainError("QBase: q must lie in (-1,1)");
    }
};

struct TruncationPolicy {
    double tol = 1e-15;
    int max_terms = 10000;
    TruncationPolicy() = default;
    TruncationPolicy(double t, int m) : tol(t), max_terms(m) {
        if (!(tol > 0.0)) throw DomainError("TruncationPolicy: tol must be > 0");
        if (max_terms < 1)
            throw DomainError("TruncationPolicy: max_terms must be >= 1");
    }
};

// n < 0 in qpoch_multi means the infinite product.
inline constexpr int kInfinite = -1;

// (a;q)_n = prod_{j<n} (1 - a q^j)
cplx qpoch_finite(cplx a, double q, int n);
double qpoch_finite(double a, double q, int n);

// (a;q)_inf, truncated once |a q^j| < policy.tol; NonConvergent if max_terms
// is exhausted first.
cplx qpoch_infinite(cplx a, double q, const TruncationPolicy& policy = {});
double qpoch_infinite(double a, double q, const TruncationPolicy& policy = {});

// (a1,...,ak;q)_n, n >= 0 finite or kInfinite.
cplx qpoch_multi(const std::vector<cplx>& args, double q, int n,
                 const TruncationPolicy& policy = {});
double qpoch_multi_real(const std::vector<double>& args, double q, int n,
                        const TruncationPolicy& policy = {});

// Gaussian binomial [N k]_q.
double qbinomial(int N, int k, double q);

// Partial sum (first `terms` terms) of the basic hypergeometric series
// r_phi_s(upper; lower; q, z). Carries the (-1)^j q^(j choose 2) factor to
// the power 1+s-r, so both balanced and confluent layouts are covered.
cplx phi_partial(const std::vector<cplx>& upper, const std::vector<cplx>& lower,
                 double q, cplx z, int terms);

}  // namespace awh
