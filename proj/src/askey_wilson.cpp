#include "awh/askey_wilson.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "awh/errors.hpp"
#include "awh/numerics.hpp"

namespace awh {

namespace {

bool nearly_real(cplx z, double eps = 1e-12) {
    return std::abs(z.imag()) <= eps * std::max(1.0, std::abs(z));
}

bool real_pair(cplx x, cplx y) { return nearly_real(x) && nearly_real(y); }

bool conj_pair(cplx x, cplx y) {
    return std::abs(y - std::conj(x)) <= 1e-12 * (1.0 + std::abs(x));
}

// Membership test for the Lemma 3.1 product counts: real and in [1, inf).
bool in_one_inf(cplx z) { return nearly_real(z) && z.real() >= 1.0 - 1e-12; }

struct ProductSet {
    std::array<cplx, 6> val;  // ab, ac, ad, bc, bd, cd
};

ProductSet six_products(const AWParams& p) {
    return {{{p.a * p.b, p.a * p.c, p.a * p.d, p.b * p.c, p.b * p.d,
              p.c * p.d}}};
}

// Detect prod = q^{-N} for the purely discrete cases; base is |q|.
std::optional<int> power_index(double prod, double q, double tol = 1e-9) {
    const double aq = std::abs(q);
    if (aq <= 0.0 || prod < 1.0 - 1e-12) return std::nullopt;
    int N = static_cast<int>(std::lround(std::log(std::max(prod, 1.0)) /
                                         std::log(1.0 / aq)));
    if (N < 0) N = 0;
    // Signed check: for q<0 this only passes when N is even.
    if (std::abs(prod * std::pow(q, N) - 1.0) <= tol) return N;
    return std::nullopt;
}

}  // namespace

AWParams aw_params(cplx a, cplx b, cplx c, cplx d, double q) {
    if (!(std::abs(q) < 1.0)) throw DomainError("aw_params: need |q| < 1");
    for (cplx z : {a, b, c, d})
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
            throw DomainError("aw_params: parameters must be finite");
    if (real_pair(a, b)) {
        a = cplx(a.real(), 0.0);
        b = cplx(b.real(), 0.0);
    } else if (conj_pair(a, b)) {
        b = std::conj(a);
    } else {
        throw DomainError("aw_params: (a,b) must be real or complex conjugates");
    }
    if (real_pair(c, d)) {
        c = cplx(c.real(), 0.0);
        d = cplx(d.real(), 0.0);
    } else if (conj_pair(c, d)) {
        d = std::conj(c);
    } else {
        throw DomainError("aw_params: (c,d) must be real or complex conjugates");
    }
    const double p = realize(a * b * c * d);
    if (!(p < 1.0)) throw DomainError("aw_params: need abcd < 1");
    if (!(q * p < 1.0)) throw DomainError("aw_params: need q*abcd < 1");
    return AWParams{a, b, c, d, q};
}

double recurrence_A(int n, const AWParams& p) {
    if (n < 0) throw DomainError("recurrence_A: n >= 0 required");
    if (std::abs(p.a) == 0.0)
        throw DomainError("recurrence_A: distinguished parameter a must be nonzero");
    const cplx a = p.a, b = p.b, c = p.c, d = p.d;
    const double q = p.q;
    const cplx P = a * b * c * d;
    if (n == 0) {
        // (1-abcd/q) cancels against the same factor downstairs.
        return realize((1.0 - a * b) * (1.0 - a * c) * (1.0 - a * d) /
                       (a * (1.0 - P)));
    }
    const double qn = std::pow(q, n);
    const cplx num = (1.0 - P * std::pow(q, n - 1)) * (1.0 - a * b * qn) *
                     (1.0 - a * c * qn) * (1.0 - a * d * qn);
    const cplx den =
        a * (1.0 - P * std::pow(q, 2 * n - 1)) * (1.0 - P * std::pow(q, 2 * n));
    return realize(num / den);
}

double recurrence_C(int n, const AWParams& p) {
    if (n < 0) throw DomainError("recurrence_C: n >= 0 required");
    if (n == 0) return 0.0;
    if (std::abs(p.a) == 0.0)
        throw DomainError("recurrence_C: distinguished parameter a must be nonzero");
    const cplx a = p.a, b = p.b, c = p.c, d = p.d;
    const double q = p.q;
    const cplx P = a * b * c * d;
    const double qn1 = std::pow(q, n - 1);
    const cplx num = a * (1.0 - std::pow(q, n)) * (1.0 - b * c * qn1) *
                     (1.0 - b * d * qn1) * (1.0 - c * d * qn1);
    const cplx den =
        (1.0 - P * std::pow(q, 2 * n - 2)) * (1.0 - P * std::pow(q, 2 * n - 1));
    return realize(num / den);
}

double eval_bar(int n, double x, const AWParams& p) {
    if (n < 0) throw DomainError("eval_bar: n >= 0 required");
    if (!nearly_real(p.a) || std::abs(p.a) == 0.0)
        throw DomainError("eval_bar: requires real nonzero a (use eval_monic)");
    const double ainv = p.a.real() + 1.0 / p.a.real();
    double wm = 0.0, w = 1.0;
    for (int k = 0; k < n; ++k) {
        const double Ak = recurrence_A(k, p);
        const double Ck = recurrence_C(k, p);
        const double wp = ((2.0 * x - ainv + Ak + Ck) * w - Ck * wm) / Ak;
        wm = w;
        w = wp;
    }
    return w;
}

double monic_s(int n, const AWParams& p) {
    if (n < 0) throw DomainError("monic_s: n >= 0 required");
    const cplx a = p.a, b = p.b, c = p.c, d = p.d;
    const double q = p.q;
    const cplx e1 = b + c + d;
    const cplx e2 = b * c + b * d + c * d;
    const cplx e3 = b * c * d;
    const cplx P = a * e3;  // abcd
    if (n == 0)
        return 0.5 * realize((e3 - e1 + a * e2 - a * a * e3) / (1.0 - P) - a);
    const double qn = std::pow(q, n), qn1 = std::pow(q, n - 1);
    const double q2n = qn * qn, q2n1 = qn * qn1, q3n = q2n * qn,
                 q3n1 = q2n * qn1, q4n1 = q2n * q2n1;
    // a-cancelled numerator of A_n + C_n - (A_n+C_n at a=infinity); finite at a=0.
    const cplx NAa = -e3 * qn1 - e1 * qn + e3 * q2n1 * (1.0 + q) +
                     a * (e2 * q2n + e1 * e3 * q2n1 - e3 * e3 * q4n1) +
                     a * a * (-e3 * q3n - e2 * e3 * q3n1) +
                     a * a * a * e3 * e3 * q4n1;
    const cplx Cn = a * (1.0 - qn) * (1.0 - b * c * qn1) * (1.0 - b * d * qn1) *
                    (1.0 - c * d * qn1) /
                    ((1.0 - P * qn1 * qn1) * (1.0 - P * q2n1));
    return 0.5 * realize(NAa / ((1.0 - P * q2n1) * (1.0 - P * q2n)) + Cn - a);
}

double monic_u(int n, const AWParams& p) {
    if (n < 0) throw DomainError("monic_u: n >= 0 required");
    if (n == 0) return 0.0;
    const cplx a = p.a, b = p.b, c = p.c, d = p.d;
    const double q = p.q;
    const cplx P = a * b * c * d;
    const double qn = std::pow(q, n), qn1 = std::pow(q, n - 1);
    const cplx c_over_a = (1.0 - qn) * (1.0 - b * c * qn1) * (1.0 - b * d * qn1) *
                          (1.0 - c * d * qn1) /
                          ((1.0 - P * qn1 * qn1) * (1.0 - P * qn1 * qn));
    cplx a_times_Am1;  // a * A_{n-1}, written without negative q powers
    if (n == 1) {
        a_times_Am1 =
            (1.0 - a * b) * (1.0 - a * c) * (1.0 - a * d) / (1.0 - P);
    } else {
        const double qm = std::pow(q, n - 1), qm2 = std::pow(q, n - 2);
        a_times_Am1 = (1.0 - P * qm2) * (1.0 - a * b * qm) * (1.0 - a * c * qm) *
                      (1.0 - a * d * qm) /
                      ((1.0 - P * std::pow(q, 2 * n - 3)) *
                       (1.0 - P * std::pow(q, 2 * n - 2)));
    }
    return 0.25 * realize(a_times_Am1 * c_over_a);
}

double eval_monic(int n, double x, const AWParams& p) {
    if (n < 0) throw DomainError("eval_monic: n >= 0 required");
    double wm = 0.0, w = 1.0;
    for (int k = 0; k < n; ++k) {
        const double wp =
            (x + monic_s(k, p)) * w - (k >= 1 ? monic_u(k, p) * wm : 0.0);
        wm = w;
        w = wp;
    }
    return w;
}

FavardReport classify(const AWParams& p) {
    FavardReport rep;
    const ProductSet prods = six_products(p);
    std::vector<std::pair<double, int>> big1, big2;  // (value, index)
    for (int i = 0; i < 6; ++i) {
        if (in_one_inf(prods.val[i])) {
            rep.m1 += 1;
            big1.emplace_back(prods.val[i].real(), i);
        }
        if (in_one_inf(p.q * prods.val[i])) {
            rep.m2 += 1;
            big2.emplace_back(p.q * prods.val[i].real(), i);
        }
    }
    auto by_mag_then_lex = [](const std::pair<double, int>& l,
                              const std::pair<double, int>& r) {
        if (l.first != r.first) return l.first < r.first;
        return l.second < r.second;
    };
    std::sort(big1.begin(), big1.end(), by_mag_then_lex);
    std::sort(big2.begin(), big2.end(), by_mag_then_lex);
    const bool all_real = nearly_real(p.a) && nearly_real(p.b) &&
                          nearly_real(p.c) && nearly_real(p.d);

    if (p.q >= 0.0) {
        if (rep.m1 == 0) {
            rep.favard_case = FavardCase::i;
            rep.admissible = true;
        } else if (rep.m1 == 2 && all_real) {
            if (p.q == 0.0) {
                // Well defined with no q-power condition; atoms coexist with
                // the continuous part, so no finite-support cap.
                rep.favard_case = FavardCase::iii;
                rep.admissible = true;
            } else if (auto N = power_index(big1.front().first, p.q)) {
                rep.favard_case = FavardCase::iii;
                rep.admissible = true;
                rep.n_atoms_cap = *N + 1;
            }
        }
    } else {
        if (rep.m1 == 0 && rep.m2 == 0) {
            rep.favard_case = FavardCase::ii;
            rep.admissible = true;
        } else if (rep.m1 > 0 && rep.m2 > 0) {
            rep.favard_case = FavardCase::iv;
        } else if (rep.m1 == 2 && rep.m2 == 0 && all_real) {
            if (auto N = power_index(big1.front().first, p.q)) {
                rep.favard_case = FavardCase::v;  // N even enforced by sign
                rep.admissible = true;
                rep.n_atoms_cap = *N + 1;
            }
        } else if (rep.m1 == 0 && rep.m2 == 2 && all_real) {
            if (auto N = power_index(big2.front().first, p.q)) {
                rep.favard_case = FavardCase::vi;
                rep.admissible = true;
                rep.n_atoms_cap = *N + 2;
            }
        }
    }
    return rep;
}

double density_constant(const AWParams& p, const TruncationPolicy& policy) {
    const ProductSet prods = six_products(p);
    std::vector<cplx> num{cplx(p.q, 0.0)};
    for (const cplx& v : prods.val) num.push_back(v);
    const cplx top = qpoch_multi(num, p.q, kInfinite, policy);
    const cplx bot = qpoch_infinite(p.a * p.b * p.c * p.d, p.q, policy);
    return realize(top / (2.0 * M_PI * bot));
}

double density_theta(double th, const AWParams& p, double K,
                     const TruncationPolicy& policy) {
    const cplx e(std::cos(th), std::sin(th));
    const double num = std::norm(qpoch_infinite(e * e, p.q, policy));
    const cplx den = qpoch_infinite(p.a * e, p.q, policy) *
                     qpoch_infinite(p.b * e, p.q, policy) *
                     qpoch_infinite(p.c * e, p.q, policy) *
                     qpoch_infinite(p.d * e, p.q, policy);
    const double dn = std::norm(den);
    if (dn == 0.0) throw Singular("density_theta: pole in the weight");
    return K * num / dn;
}

double density(double x, const AWParams& p, const TruncationPolicy& policy) {
    if (!(std::abs(x) < 1.0))
        throw DomainError("density: defined on (-1,1) only");
    const double K = density_constant(p, policy);
    return density_theta(std::acos(x), p, K, policy) / std::sqrt(1.0 - x * x);
}

std::vector<Atom> atoms(const AWParams& p, const TruncationPolicy& policy) {
    const std::array<cplx, 4> par = {p.a, p.b, p.c, p.d};
    const double q = p.q;
    std::vector<Atom> out;
    std::vector<bool> boundary_flag;
    for (int idx = 0; idx < 4; ++idx) {
        if (!nearly_real(par[idx])) continue;
        const double g = par[idx].real();
        if (std::abs(g) < 1.0 - 1e-12 || g == 0.0) continue;
        std::array<cplx, 3> oth;
        for (int i = 0, k = 0; i < 4; ++i)
            if (i != idx) oth[k++] = par[i];

        // Mass at j=0; the j>0 masses are relative corrections to it.
        cplx m0num = qpoch_multi({cplx(1.0 / (g * g), 0.0), oth[0] * oth[1],
                                  oth[0] * oth[2], oth[1] * oth[2]},
                                 q, kInfinite, policy);
        cplx m0den = qpoch_multi({oth[0] / g, oth[1] / g, oth[2] / g,
                                  g * oth[0] * oth[1] * oth[2]},
                                 q, kInfinite, policy);
        if (std::abs(m0den) < 1e-250)
            throw Singular("atoms: coincident parameters produce a mass pole");
        const double mass0 = realize(m0num / m0den);

        for (int j = 0;; ++j) {
            const double v = g * std::pow(q, j);
            if (std::abs(v) < 1.0 - 1e-12) break;
            const bool boundary = std::abs(std::abs(v) - 1.0) <= 1e-12;
            const double x = 0.5 * (v + 1.0 / v);
            double mass = 0.0;
            if (!boundary) {
                if (j == 0) {
                    mass = mass0;
                } else {
                    // Cancelled ratio, finite when abcd = 0 (derivation artifact:
                    // (q/(abcd))^j is folded into the per-factor quotients).
                    cplx r = std::pow(q, j) * std::pow(g, 2 * j);
                    for (const cplx& y : oth)
                        for (int i = 0; i < j; ++i) {
                            const cplx dd =
                                g * y - g * g * std::pow(q, i + 1);
                            if (std::abs(dd) < 1e-250)
                                throw Singular("atoms: mass ratio pole");
                            r *= (1.0 - g * y * std::pow(q, i)) / dd;
                        }
                    r *= qpoch_finite(cplx(g * g, 0.0), q, j) *
                         (1.0 - g * g * std::pow(q, 2 * j)) /
                         (qpoch_finite(q, q, j) * (1.0 - g * g));
                    mass = realize(mass0 * r);
                }
            }
            const bool dup =
                std::any_of(out.begin(), out.end(), [&](const Atom& a0) {
                    return std::abs(a0.x - x) < 1e-12;
                });
            if (!dup) {
                out.push_back(Atom{x, mass});
                boundary_flag.push_back(boundary);
            }
            if (j > policy.max_terms) break;
            if (q == 0.0) {  // only j=0 exists
                break;
            }
        }
    }
    std::vector<Atom> kept;
    for (std::size_t i = 0; i < out.size(); ++i)
        if (out[i].mass > 1e-13 || boundary_flag[i]) kept.push_back(out[i]);
    std::sort(kept.begin(), kept.end(),
              [](const Atom& l, const Atom& r) { return l.x < r.x; });
    return kept;
}

double discrete_pmf(int k, int N, double a, double b, double c, double q) {
    if (!(q > 0.0 && q < 1.0))
        throw DomainError("discrete_pmf: need q in (0,1)");
    if (k < 0 || N < 0 || k > N)
        throw DomainError("discrete_pmf: need 0 <= k <= N");
    if (a == 0.0 || b == 0.0 || c == 0.0)
        throw DomainError("discrete_pmf: parameters must be nonzero");
    const double qN = std::pow(q, N);
    const double d = 1.0 / (a * qN);
    const double abcd = b * c / qN;
    if (!(abcd < 1.0) || !(q * abcd < 1.0))
        throw DomainError("discrete_pmf: need abcd < 1 and q*abcd < 1");
    const std::array<double, 6> prods = {a * b, a * c, a * d,
                                         b * c, b * d, c * d};
    std::vector<double> big;
    for (double v : prods)
        if (v >= 1.0 - 1e-12) big.push_back(v);
    if (big.size() != 2)
        throw DomainError(
            "discrete_pmf: admissibility needs exactly two pairwise products "
            "in [1,inf), found " +
            std::to_string(big.size()));
    const double smaller = std::min(big[0], big[1]);
    if (std::abs(smaller * qN - 1.0) > 1e-9)
        throw DomainError(
            "discrete_pmf: smaller large product must equal q^{-N}");

    double r = qbinomial(N, k, q);
    const double qk1 = std::pow(q, k + 1);
    r *= qpoch_finite(qk1 * a / b, q, N - k) *
         qpoch_finite(qk1 * a / c, q, N - k);
    r *= qpoch_finite(a * b, q, k) * qpoch_finite(a * c, q, k);
    r *= (1.0 - std::pow(q, 2 * k) * a * a) *
         std::pow(q, 0.5 * k * (k + 1));
    const double den = qpoch_finite(std::pow(q, k) * a * a, q, N + 1) *
                       qpoch_finite(q / (b * c), q, N) * std::pow(-b * c, k);
    if (den == 0.0) throw Singular("discrete_pmf: mass formula pole");
    return r / den;
}

AWMeasure measure(const AWParams& p, const TruncationPolicy& policy) {
    const FavardReport rep = classify(p);
    if (!rep.admissible) {
        const std::string msg = "orthogonality measure does not exist: m1=" +
                                std::to_string(rep.m1) +
                                ", m2=" + std::to_string(rep.m2) +
                                ", q=" + std::to_string(p.q);
        throw Inadmissible(msg, {msg});
    }
    AWMeasure m;
    m.params = p;
    m.atoms = atoms(p, policy);
    if (rep.n_atoms_cap.has_value()) {
        m.K = 0.0;
        m.has_continuous = false;
    } else {
        m.K = density_constant(p, policy);
        m.has_continuous = true;
    }
    return m;
}

double mean(const AWParams& p) {
    const cplx e1 = p.a + p.b + p.c + p.d;
    const cplx e3 = p.a * p.b * p.c + p.a * p.b * p.d + p.a * p.c * p.d +
                    p.b * p.c * p.d;
    const cplx P = p.a * p.b * p.c * p.d;
    return realize((e1 - e3) / (2.0 * (1.0 - P)));
}

double variance(const AWParams& p) {
    const cplx a = p.a, b = p.b, c = p.c, d = p.d;
    const cplx P = a * b * c * d;
    const cplx num = (1.0 - a * b) * (1.0 - a * c) * (1.0 - a * d) *
                     (1.0 - b * c) * (1.0 - b * d) * (1.0 - c * d) *
                     (1.0 - p.q);
    return realize(num / (4.0 * (1.0 - P) * (1.0 - P) * (1.0 - P * p.q)));
}

double integrate_measure(const AWMeasure& m, const std::function<double(double)>& f,
                         double tol) {
    double total = 0.0;
    for (const Atom& a : m.atoms) total += a.mass * f(a.x);
    if (m.has_continuous) {
        const AWParams& p = m.params;
        const double K = m.K;
        total += integrate(
                     [&](double th) {
                         return density_theta(th, p, K) * f(std::cos(th));
                     },
                     0.0, M_PI, tol)
                     .value;
    }
    return total;
}

}  // namespace awh
