#include "awh/martingale.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "awh/askey_wilson.hpp"
#include "awh/errors.hpp"
#include "awh/qseries.hpp"

namespace awh {
namespace {

// Exact integer powers; std::pow is avoided for signed q.
double ipow(double b, int e) {
    if (e < 0) return 1.0 / ipow(b, -e);
    double r = 1.0;
    while (e-- > 0) r *= b;
    return r;
}

bool is_real(cplx z) {
    return std::abs(z.imag()) <= 1e-12 * std::max(1.0, std::abs(z.real()));
}

// The distinguished parameter must be real: a conjugate pair (A,B) leaves no
// real-valued normalization of the martingale family.
double real_A(const ProcessParams& p, const char* who) {
    if (!is_real(p.A))
        throw DomainError(std::string(who) +
                          ": distinguished parameter A must be real; "
                          "conjugate-pair (A,B) is unsupported here");
    return p.A.real();
}

void require_in_I(const ProcessParams& p, double t, const char* who) {
    if (!time_domains(p).I.contains(t))
        throw DomainError(std::string(who) + ": time " + std::to_string(t) +
                          " outside I");
}

AWParams marg_params(const ProcessParams& p, double t) {
    const double rt = std::sqrt(t);
    return aw_params(p.A * rt, p.B * rt, p.C / rt, p.D / rt, p.q);
}

double guard(double d, const char* what) {
    if (std::abs(d) < 1e-280)
        throw Singular(std::string("jacobi_coeffs: vanishing denominator ") +
                       what);
    return d;
}

using Dense = std::vector<std::vector<double>>;

Dense to_dense(const BandedOperator& J) {
    Dense M(J.size, std::vector<double>(J.size, 0.0));
    for (int i = 0; i < J.size; ++i) M[i][i] = J.diag[i];
    for (int i = 0; i + 1 < J.size; ++i) {
        M[i][i + 1] = J.upper[i];
        M[i + 1][i] = J.lower[i];
    }
    return M;
}

Dense matmul(const Dense& X, const Dense& Y) {
    const int n = static_cast<int>(X.size());
    Dense Z(n, std::vector<double>(n, 0.0));
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) {
            const double x = X[i][k];
            if (x == 0.0) continue;
            for (int j = 0; j < n; ++j) Z[i][j] += x * Y[k][j];
        }
    return Z;
}

// Half plane -> unit circle/real branch: x -> x + i sqrt(1-x^2) for |x| <= 1,
// else the real root of r + 1/r = 2x on the same side as x.
cplx unit_root(double x) {
    if (std::abs(x) <= 1.0) return {x, std::sqrt(std::max(0.0, 1.0 - x * x))};
    return {x + std::copysign(std::sqrt(x * x - 1.0), x), 0.0};
}

}  // namespace

double r_poly(int n, double x, double t, const ProcessParams& p) {
    if (n < 0) throw DomainError("r_poly: n must be >= 0");
    require_in_I(p, t, "r_poly");
    const double A = real_A(p, "r_poly");
    const double st = std::sqrt(t);
    const double scale = 2.0 * st / std::sqrt(1.0 - p.q);
    const double y = x / scale;
    const AWParams ap = marg_params(p, t);
    if (A != 0.0) return eval_bar(n, y, ap);
    // A = 0: the family monic in the martingale variable x, not in y.
    return ipow(scale, n) * eval_monic(n, y, ap);
}

JacobiCoeffs jacobi_coeffs(const ProcessParams& p, int n_max) {
    if (n_max < 0) throw DomainError("jacobi_coeffs: n_max must be >= 0");
    const double A = real_A(p, "jacobi_coeffs");
    const double q = p.q;
    const double s1q = std::sqrt(1.0 - q);
    const double P = realize(p.A * p.B * p.C * p.D);
    const double CD = realize(p.C * p.D);
    JacobiCoeffs c;
    c.alpha.reserve(n_max + 1);
    c.beta.reserve(n_max + 1);
    c.gamma.reserve(n_max + 1);
    c.delta.reserve(n_max + 1);
    c.epsilon.reserve(n_max + 1);
    c.phi.reserve(n_max + 1);
    if (A != 0.0) {
        const double AB = realize(p.A * p.B);
        for (int n = 0; n <= n_max; ++n) {
            const double qn = ipow(q, n);
            double beta;
            if (n == 0) {
                beta = realize((1.0 - p.A * p.C) * (1.0 - p.A * p.D)) /
                       guard(A * s1q * (1.0 - P), "1-ABCD");
            } else {
                const double qn1 = ipow(q, n - 1);
                beta = (1.0 - P * qn1) *
                       realize((1.0 - p.A * p.C * qn) * (1.0 - p.A * p.D * qn)) /
                       guard(A * s1q * (1.0 - P * qn * qn) *
                                 (1.0 - P * qn * qn1),
                             "1-ABCD q^{2n}");
            }
            double eps = 0.0;
            if (n >= 1) {
                const double qn1 = ipow(q, n - 1);
                eps = A * (1.0 - qn) *
                      realize((1.0 - p.B * p.C * qn1) *
                              (1.0 - p.B * p.D * qn1)) /
                      guard(s1q * (1.0 - P * qn1 * qn1) *
                                (1.0 - P * qn * qn1),
                            "1-ABCD q^{2n-2}");
            }
            const double alpha = -AB * qn * beta;
            const double phi = (n >= 1) ? -CD * ipow(q, n - 1) * eps : 0.0;
            c.alpha.push_back(alpha);
            c.beta.push_back(beta);
            c.gamma.push_back(A / s1q - alpha - eps);
            c.delta.push_back(1.0 / (A * s1q) - beta - phi);
            c.epsilon.push_back(eps);
            c.phi.push_back(phi);
        }
        return c;
    }
    // A = 0: monic family; J[n][n+1] is identically 1.
    const double B = realize(p.B);
    const double CpD = realize(p.C + p.D);
    for (int n = 0; n <= n_max; ++n) {
        const double qn = ipow(q, n);
        c.alpha.push_back(0.0);
        c.beta.push_back(1.0);
        c.gamma.push_back(B * qn / s1q);
        if (n == 0) {
            c.delta.push_back((CpD - B * CD) / s1q);
            c.epsilon.push_back(0.0);
            c.phi.push_back(0.0);
        } else {
            const double qn1 = ipow(q, n - 1);
            c.delta.push_back(
                (B * CD * qn1 + CpD * qn - B * CD * qn * qn1 * (1.0 + q)) /
                s1q);
            const double eps =
                (1.0 - qn) *
                realize((1.0 - p.B * p.C * qn1) * (1.0 - p.B * p.D * qn1)) /
                (1.0 - q);
            c.epsilon.push_back(eps);
            c.phi.push_back(-CD * qn1 * eps);
        }
    }
    return c;
}

BandedOperator jacobi_matrix(const JacobiCoeffs& c, double t, int size) {
    if (size < 1) throw DomainError("jacobi_matrix: size must be >= 1");
    if (static_cast<int>(c.alpha.size()) < size)
        throw DomainError("jacobi_matrix: coefficients shorter than size");
    BandedOperator J;
    J.size = size;
    J.diag.reserve(size);
    J.upper.reserve(size - 1);
    J.lower.reserve(size - 1);
    for (int i = 0; i < size; ++i)
        J.diag.push_back(c.gamma[i] * t + c.delta[i]);
    for (int i = 0; i + 1 < size; ++i) {
        J.upper.push_back(c.alpha[i] * t + c.beta[i]);
        J.lower.push_back(c.epsilon[i + 1] * t + c.phi[i + 1]);
    }
    return J;
}

IdentityReport check_q_commutation(const ProcessParams& p, int n_max) {
    if (n_max < 0) throw DomainError("check_q_commutation: n_max must be >= 0");
    const JacobiCoeffs c = jacobi_coeffs(p, n_max + 1);
    const double q = p.q;
    IdentityReport rep{"q-commutation", n_max, 0.0, -1, p};
    auto note = [&rep](int n, double r) {
        if (std::abs(r) > rep.max_residual) {
            rep.max_residual = std::abs(r);
            rep.argmax_n = n;
        }
    };
    const auto &a = c.alpha, &b = c.beta, &g = c.gamma, &d = c.delta,
               &e = c.epsilon, &f = c.phi;
    for (int n = 0; n <= n_max; ++n) {
        if (n >= 1) {
            note(n, a[n] * b[n - 1] - q * a[n - 1] * b[n]);
            note(n, d[n] * e[n] + g[n - 1] * f[n] -
                        q * (d[n - 1] * e[n] + g[n] * f[n]));
        }
        note(n, b[n] * g[n + 1] + a[n] * d[n] -
                    q * (b[n] * g[n] + a[n] * d[n + 1]));
        const double am1 = (n >= 1) ? a[n - 1] : 0.0;
        const double bm1 = (n >= 1) ? b[n - 1] : 0.0;
        note(n, g[n] * d[n] + b[n] * e[n + 1] + am1 * f[n] -
                    q * (g[n] * d[n] + bm1 * e[n] + a[n] * f[n + 1]) - 1.0);
        note(n, e[n] * f[n + 1] - q * e[n + 1] * f[n]);
    }
    return rep;
}

IdentityReport check_matrix_identity(const ProcessParams& p, double s, double t,
                                     double u, int n_max) {
    if (n_max < 0)
        throw DomainError("check_matrix_identity: n_max must be >= 0");
    if (!(s <= t && t <= u && s < u))
        throw DomainError("check_matrix_identity: need s <= t <= u, s < u");
    require_in_I(p, s, "check_matrix_identity");
    require_in_I(p, u, "check_matrix_identity");
    const int size = n_max + 3;
    const JacobiCoeffs c = jacobi_coeffs(p, size - 1);
    const Dense Js = to_dense(jacobi_matrix(c, s, size));
    const Dense Jt = to_dense(jacobi_matrix(c, t, size));
    const Dense Ju = to_dense(jacobi_matrix(c, u, size));
    const double q = p.q;
    const double den = (u - s) * (u - q * s);
    const double c_ss = (u - t) * (u - q * t) / den;
    const double c_su = (q + 1.0) * (t - s) * (u - t) / den;
    const double c_uu = (t - s) * (t - q * s) / den;
    const double c_id = (t - s) * (u - t) / (u - q * s);
    Dense M = matmul(Jt, Jt);
    const Dense Ss = matmul(Js, Js);
    const Dense Su = matmul(Ju, Js);
    const Dense Uu = matmul(Ju, Ju);
    for (int i = 0; i < size; ++i) {
        for (int j = 0; j < size; ++j)
            M[i][j] -= c_ss * Ss[i][j] + c_su * Su[i][j] + c_uu * Uu[i][j];
        M[i][i] -= c_id;
    }
    IdentityReport rep{"matrix-three-time", n_max, 0.0, -1, p};
    double fro2 = 0.0, worst = -1.0;
    for (int i = 0; i + 2 < size; ++i) {
        double row2 = 0.0;
        for (int j = 0; j + 2 < size; ++j) row2 += M[i][j] * M[i][j];
        fro2 += row2;
        if (row2 > worst) {
            worst = row2;
            rep.argmax_n = i;
        }
    }
    rep.max_residual = std::sqrt(fro2);
    return rep;
}

double q_n(int n, double y, double x, double t, double s,
           const ProcessParams& p) {
    if (n < 0) throw DomainError("q_n: n must be >= 0");
    const double A = real_A(p, "q_n");
    if (A == 0.0) throw DomainError("q_n: requires nonzero A");
    require_in_I(p, s, "q_n");
    require_in_I(p, t, "q_n");
    if (!(s <= t)) throw DomainError("q_n: need s <= t");
    const double q = p.q;
    const double B = realize(p.B);
    const double a = A * std::sqrt(t);
    const double b = B * std::sqrt(t);
    const double m = std::sqrt(s / t);
    const cplx r = unit_root(x);
    const cplx cc = m * r;
    const cplx dd = m / r;
    const double cd = m * m;
    const double abcd = a * b * cd;
    // Q_n = (ac,ad;q)_n wbar_n, so the diagonal keeps the plain A_k + C_k of
    // wbar while the transfers pick up the rescale: Abar_k = A_k/((1-ac q^k)
    // (1-ad q^k)), Cbar_k = C_k (1-ac q^{k-1})(1-ad q^{k-1}).
    const AWParams kp = aw_params(cplx(a, 0.0), cplx(b, 0.0), cc, dd, q);
    auto Abar = [&](int k) -> double {
        if (k == 0) return (1.0 - a * b) / (a * (1.0 - abcd));
        const double qk = ipow(q, k), qk1 = ipow(q, k - 1);
        return (1.0 - abcd * qk1) * (1.0 - a * b * qk) /
               (a * (1.0 - abcd * qk * qk1) * (1.0 - abcd * qk * qk));
    };
    auto Cbar = [&](int k) -> double {
        if (k == 0) return 0.0;
        const double qk = ipow(q, k), qk1 = ipow(q, k - 1);
        const double quad =
            realize((1.0 - a * cc * qk1) * (1.0 - a * dd * qk1) *
                    (1.0 - b * cc * qk1) * (1.0 - b * dd * qk1));
        return a * (1.0 - qk) * quad * (1.0 - cd * qk1) /
               ((1.0 - abcd * qk1 * qk1) * (1.0 - abcd * qk * qk1));
    };
    double prev = 0.0, cur = 1.0;
    for (int k = 0; k < n; ++k) {
        const double Ak = Abar(k), Ck = Cbar(k);
        const double diag = recurrence_A(k, kp) + recurrence_C(k, kp);
        if (Ak == 0.0) throw Singular("q_n: recurrence coefficient vanished");
        const double next =
            ((2.0 * y - (a + 1.0 / a - diag)) * cur - Ck * prev) / Ak;
        prev = cur;
        cur = next;
    }
    return cur;
}

std::vector<double> connection_coeffs(int n, double x, double s,
                                      const ProcessParams& p) {
    if (n < 0) throw DomainError("connection_coeffs: n must be >= 0");
    const double A = real_A(p, "connection_coeffs");
    if (A == 0.0) throw DomainError("connection_coeffs: requires nonzero A");
    if (p.q == 0.0)
        throw DomainError(
            "connection_coeffs: q = 0 degenerates the q^{-n} parameters");
    require_in_I(p, s, "connection_coeffs");
    const double q = p.q;
    const cplx r = unit_root(x);
    const double rs = std::sqrt(s);
    const cplx Exp = A * rs * r;
    const cplx Exm = A * rs / r;
    const double ABs = realize(p.A * p.B) * s;
    const double P = realize(p.A * p.B * p.C * p.D);
    const cplx AC = p.A * p.C;
    const cplx AD = p.A * p.D;
    const cplx prefix = qpoch_finite(Exp, q, n) * qpoch_finite(Exm, q, n);
    std::vector<double> out;
    out.reserve(n + 1);
    for (int k = 0; k <= n; ++k) {
        // (-1)^k q^{k(k+1)/2} (q^{-n};q)_k / (q;q)_k = q^{-k(n-k)} [n k]_q
        const double lead = ipow(q, -k * (n - k)) * qbinomial(n, k, q);
        const cplx num = qpoch_finite(cplx(ABs * ipow(q, n - 1), 0.0), q, k) *
                         qpoch_finite(AC, q, k) * qpoch_finite(AD, q, k);
        const cplx den = qpoch_finite(cplx(P * ipow(q, k - 1), 0.0), q, k) *
                         qpoch_finite(Exp, q, k) * qpoch_finite(Exm, q, k);
        if (std::abs(den) < 1e-280)
            throw Singular("connection_coeffs: lower-parameter pole");
        // Terminating 4phi3 with upper parameter q^{k-n}: n-k+1 terms.
        cplx phi = 1.0, term = 1.0;
        for (int j = 0; j < n - k; ++j) {
            const cplx tden = (1.0 - ipow(q, j + 1)) *
                              (1.0 - P * ipow(q, 2 * k + j)) *
                              (1.0 - Exp * ipow(q, k + j)) *
                              (1.0 - Exm * ipow(q, k + j));
            if (std::abs(tden) < 1e-280)
                throw Singular("connection_coeffs: lower-parameter pole");
            term *= (1.0 - ipow(q, k - n + j)) *
                    (1.0 - ABs * ipow(q, n + k - 1 + j)) *
                    (1.0 - AC * ipow(q, k + j)) * (1.0 - AD * ipow(q, k + j)) *
                    q / tden;
            phi += term;
        }
        out.push_back(realize(lead * prefix * num / den * phi, 1e-8));
    }
    return out;
}

IdentityReport check_projection(const ProcessParams& p, double s, double t,
                                double x, int n_max) {
    if (n_max < 0) throw DomainError("check_projection: n_max must be >= 0");
    if (!(s < t)) throw DomainError("check_projection: need s < t");
    require_in_I(p, s, "check_projection");
    require_in_I(p, t, "check_projection");
    const AWMeasure law = transition(p, s, t, x);
    IdentityReport rep{"projection", n_max, 0.0, -1, p};
    for (int n = 0; n <= n_max; ++n) {
        const double target = r_poly(n, z_from_y(p, s, x), s, p);
        const double got = integrate_measure(law, [&](double y) {
            return r_poly(n, z_from_y(p, t, y), t, p);
        });
        const double resid = std::abs(got - target);
        if (resid > rep.max_residual) {
            rep.max_residual = resid;
            rep.argmax_n = n;
        }
    }
    return rep;
}

}  // namespace awh
