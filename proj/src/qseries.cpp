#include "awh/qseries.hpp"

#include <cmath>
#include <string>

namespace awh {

namespace {
void require_q(double q) {
    QBase check(q);
    (void)check;
}
}  // namespace

cplx qpoch_finite(cplx a, double q, int n) {
    require_q(q);
    if (n < 0) throw DomainError("qpoch_finite: n must be >= 0");
    ScaledProd p;
    cplx aq = a;
    for (int j = 0; j < n; ++j) {
        p.mul(cplx{1.0, 0.0} - aq);
        aq *= q;
    }
    return p.value();
}

double qpoch_finite(double a, double q, int n) {
    return qpoch_finite(cplx{a, 0.0}, q, n).real();
}

cplx qpoch_infinite(cplx a, double q, const TruncationPolicy& policy) {
    require_q(q);
    ScaledProd p;
    cplx aq = a;
    for (int j = 0; j < policy.max_terms; ++j) {
        if (std::abs(aq) < policy.tol) return p.value();
        p.mul(cplx{1.0, 0.0} - aq);
        aq *= q;
    }
    throw NonConvergent("qpoch_infinite: max_terms exhausted before |a q^j| < tol");
}

double qpoch_infinite(double a, double q, const TruncationPolicy& policy) {
    return qpoch_infinite(cplx{a, 0.0}, q, policy).real();
}

cplx qpoch_multi(const std::vector<cplx>& args, double q, int n,
                 const TruncationPolicy& policy) {
    cplx out{1.0, 0.0};
    for (const cplx& a : args) {
        out *= (n < 0) ? qpoch_infinite(a, q, policy) : qpoch_finite(a, q, n);
    }
    return out;
}

double qpoch_multi_real(const std::vector<double>& args, double q, int n,
                        const TruncationPolicy& policy) {
    std::vector<cplx> c(args.begin(), args.end());
    return realize(qpoch_multi(c, q, n, policy));
}

double qbinomial(int N, int k, double q) {
    require_q(q);
    if (N < 0 || k < 0) throw DomainError("qbinomial: indices must be >= 0");
    if (k > N) throw DomainError("qbinomial: k > N");
    // [N k]_q = prod_{j=1..k} (1-q^{N-k+j})/(1-q^j); factor-by-factor keeps
    // the ratio well conditioned for q near 1 or negative q.
    double out = 1.0;
    for (int j = 1; j <= k; ++j) {
        out *= (1.0 - std::pow(q, N - k + j)) / (1.0 - std::pow(q, j));
    }
    return out;
}

cplx phi_partial(const std::vector<cplx>& upper, const std::vector<cplx>& lower,
                 double q, cplx z, int terms) {
    require_q(q);
    if (terms < 1) throw DomainError("phi_partial: terms must be >= 1");
    // A lower parameter of the form q^{-m} with m < terms makes (l;q)_j vanish
    // inside the requested sum.
    for (const cplx& l : lower) {
        for (int m = 0; m + 1 < terms; ++m) {
            const cplx lq = l * std::pow(q, m);
            if (std::abs(lq - cplx{1.0, 0.0}) < 1e-13)
                throw DomainError("phi_partial: lower parameter hits pole q^{-" +
                                  std::to_string(m) + "}");
        }
    }
    const int extra_pow =
        1 + static_cast<int>(lower.size()) - static_cast<int>(upper.size());
    cplx sum{0.0, 0.0};
    cplx term{1.0, 0.0};  // j = 0 term
    for (int j = 0; j < terms; ++j) {
        sum += term;
        if (j + 1 == terms) break;
        // ratio from term j to j+1
        cplx ratio{1.0, 0.0};
        const double qj = std::pow(q, j);
        for (const cplx& u : upper) ratio *= (cplx{1.0, 0.0} - u * qj);
        for (const cplx& l : lower) ratio /= (cplx{1.0, 0.0} - l * qj);
        ratio /= (1.0 - std::pow(q, j + 1));
        ratio *= z;
        if (extra_pow != 0) {
            // (-1)^j q^{C(j,2)} steps by -q^j each increment
            cplx f = -qj;
            cplx fp{1.0, 0.0};
            for (int r = 0; r < std::abs(extra_pow); ++r) fp *= f;
            ratio *= (extra_pow > 0) ? fp : cplx{1.0, 0.0} / fp;
        }
        term *= ratio;
    }
    return sum;
}

}  // namespace awh
