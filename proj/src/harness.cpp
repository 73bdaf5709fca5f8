#include "awh/harness.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "awh/errors.hpp"
#include "awh/numerics.hpp"

namespace awh {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool nearly_real(cplx z, double eps = 1e-12) {
    return std::abs(z.imag()) <= eps * std::max(1.0, std::abs(z));
}

bool conj_pair(cplx x, cplx y) {
    return std::abs(y - std::conj(x)) <= 1e-12 * (1.0 + std::abs(x));
}

bool in_one_inf(cplx z) {
    return nearly_real(z) && z.real() >= 1.0 - 1e-12;
}

void require_time(const Interval& I, double t, const char* who) {
    if (!I.contains(t))
        throw DomainError(std::string(who) + ": time outside the open interval I");
}

}  // namespace

ProcessParams validate(cplx A, cplx B, cplx C, cplx D, double q) {
    if (!(std::abs(q) < 1.0)) throw Inadmissible("validate: need |q| < 1", {"q"});
    auto fix_pair = [](cplx& x, cplx& y, const char* name) {
        if (nearly_real(x) && nearly_real(y)) {
            x = cplx(x.real(), 0.0);
            y = cplx(y.real(), 0.0);
        } else if (conj_pair(x, y)) {
            y = std::conj(x);
        } else {
            throw Inadmissible(std::string("validate: (") + name +
                                   ") must be real or a conjugate pair",
                               {name});
        }
    };
    fix_pair(A, B, "A,B");
    fix_pair(C, D, "C,D");

    std::vector<std::string> bad;
    const double P = realize(A * B * C * D);
    if (!(P < 1.0)) bad.push_back("ABCD");
    if (!(q * P < 1.0)) bad.push_back("qABCD");
    const struct {
        const char* name;
        cplx value;
    } prods[] = {{"AC", A * C}, {"AD", A * D}, {"BC", B * C}, {"BD", B * D}};
    for (const auto& pr : prods) {
        if (in_one_inf(pr.value)) bad.push_back(pr.name);
        if (in_one_inf(q * pr.value)) bad.push_back(std::string("q") + pr.name);
    }
    if (!bad.empty()) {
        std::string msg = "validate: products in the forbidden region [1,inf):";
        for (const auto& s : bad) msg += " " + s;
        throw Inadmissible(msg, bad);
    }
    return ProcessParams{A, B, C, D, q};
}

HarnessParams harness_params(const ProcessParams& p) {
    const cplx A = p.A, B = p.B, C = p.C, D = p.D;
    const double q = p.q;
    const double P = realize(A * B * C * D);
    const double quad = realize((1.0 - A * C) * (1.0 - B * C) * (1.0 - A * D) *
                                (1.0 - B * D));
    const double dd2 = quad * (1.0 - q * P);
    if (!(dd2 > 0.0))
        throw Singular("harness_params: vanishing normalization denominator");
    const double dd = std::sqrt(dd2);
    HarnessParams h;
    h.eta = -realize((A + B) * (1.0 + P) - 2.0 * (A * B) * (C + D)) *
            std::sqrt(1.0 - q) / dd;
    h.theta = -realize((C + D) * (1.0 + P) - 2.0 * (C * D) * (A + B)) *
              std::sqrt(1.0 - q) / dd;
    h.sigma = realize(A * B) * (1.0 - q) / (1.0 - q * P);
    h.tau = realize(C * D) * (1.0 - q) / (1.0 - q * P);
    h.gamma = (q - P) / (1.0 - q * P);
    return h;
}

TimeDomain time_domains(const ProcessParams& p) {
    const double AB = realize(p.A * p.B);
    const double CD = realize(p.C * p.D);
    const double P = realize(p.A * p.B * p.C * p.D);
    const double q = p.q;
    TimeDomain td;
    td.I.lo = std::max({0.0, CD, q * CD});
    const double him = std::max({0.0, AB, q * AB});
    td.I.hi = him == 0.0 ? kInf : 1.0 / him;
    // T0/T1 from the original-parameter displays; the third entry only
    // matters for q < 0.
    const double g = (1.0 - q) / (1.0 - q * P);
    td.J.lo = std::max({0.0, -CD, -CD * g});
    const double jm = std::max({0.0, -AB, -AB * g});
    td.J.hi = jm == 0.0 ? kInf : 1.0 / jm;
    if (!(td.I.lo < td.I.hi))
        throw EmptyDomain("time_domains: interval I is empty");
    return td;
}

AWMeasure marginal(const ProcessParams& p, double t,
                   const TruncationPolicy& policy) {
    require_time(time_domains(p).I, t, "marginal");
    const double rt = std::sqrt(t);
    return measure(aw_params(p.A * rt, p.B * rt, p.C / rt, p.D / rt, p.q),
                   policy);
}

AWMeasure transition(const ProcessParams& p, double s, double t, double x,
                     const TruncationPolicy& policy) {
    const TimeDomain td = time_domains(p);
    require_time(td.I, s, "transition");
    require_time(td.I, t, "transition");
    if (!(s < t)) throw DomainError("transition: need s < t");
    // Support test: inside [-1,1] when pi_s has a density, else near an atom.
    const AWMeasure ms = marginal(p, s, policy);
    bool supported = ms.has_continuous && std::abs(x) <= 1.0;
    if (!supported)
        for (const Atom& a : ms.atoms)
            if (std::abs(x - a.x) <= 1e-9) {
                supported = true;
                break;
            }
    if (!supported)
        throw UnsupportedPoint(
            "transition: x is not in the support of the time-s marginal");
    const double m = std::sqrt(s / t), rt = std::sqrt(t);
    cplx c, d;
    if (std::abs(x) <= 1.0) {
        const cplx e(x, std::sqrt(1.0 - x * x));
        c = m * e;
        d = m * std::conj(e);
    } else {
        const double r = x + std::copysign(std::sqrt(x * x - 1.0), x);
        c = cplx(m * r, 0.0);
        d = cplx(m / r, 0.0);
    }
    return measure(aw_params(p.A * rt, p.B * rt, c, d, p.q), policy);
}

double e_y(const ProcessParams& p, double t) {
    if (!(t > 0.0)) throw DomainError("e_y: need t > 0");
    const cplx A = p.A, B = p.B, C = p.C, D = p.D;
    const double P = realize(A * B * C * D);
    const cplx num = (A + B - A * B * (C + D)) * t + C + D - C * D * (A + B);
    return realize(num) / (2.0 * std::sqrt(t) * (1.0 - P));
}

double var_y(const ProcessParams& p, double t) { return cov_y(p, t, t); }

double cov_y(const ProcessParams& p, double s, double t) {
    if (!(s > 0.0 && t > 0.0)) throw DomainError("cov_y: need s,t > 0");
    if (s > t) return cov_y(p, t, s);
    const cplx A = p.A, B = p.B, C = p.C, D = p.D;
    const double q = p.q;
    const double P = realize(A * B * C * D);
    const double AB = realize(A * B), CD = realize(C * D);
    const double quad =
        realize((1.0 - A * C) * (1.0 - A * D) * (1.0 - B * C) * (1.0 - B * D));
    const double num = (1.0 - q) * quad * (s - CD) * (1.0 - AB * t);
    const double den =
        4.0 * std::sqrt(s * t) * (1.0 - P) * (1.0 - P) * (1.0 - q * P);
    if (den == 0.0) throw Singular("cov_y: vanishing denominator");
    return num / den;
}

double cond_e_y(const ProcessParams& p, double s, double t, double x) {
    const double AB = realize(p.A * p.B);
    const double sum = realize(p.A + p.B);
    const double den = 2.0 * std::sqrt(t) * (1.0 - AB * s);
    if (den == 0.0) throw Singular("cond_e_y: vanishing denominator");
    return (sum * (t - s) + 2.0 * (1.0 - AB * t) * std::sqrt(s) * x) / den;
}

double cond_var_y(const ProcessParams& p, double s, double t, double x) {
    const cplx A = p.A, B = p.B;
    const double q = p.q;
    const double AB = realize(A * B);
    const double pairs = realize((1.0 + A * A * s - 2.0 * A * std::sqrt(s) * x) *
                                 (1.0 + B * B * s - 2.0 * B * std::sqrt(s) * x));
    const double num = (1.0 - q) * (t - s) * (1.0 - AB * t) * pairs;
    const double den =
        4.0 * t * (1.0 - AB * s) * (1.0 - AB * s) * (1.0 - q * AB * s);
    if (den == 0.0) throw Singular("cond_var_y: vanishing denominator");
    return num / den;
}

double bicond_e_y(const ProcessParams&, double s, double t, double u, double x,
                  double z) {
    if (!(s < t && t < u)) throw DomainError("bicond_e_y: need s < t < u");
    return ((u - t) * std::sqrt(s) * x + (t - s) * std::sqrt(u) * z) /
           (std::sqrt(t) * (u - s));
}

double bicond_var_y(const ProcessParams& p, double s, double t, double u,
                    double x, double z) {
    if (!(s < t && t < u)) throw DomainError("bicond_var_y: need s < t < u");
    const double q = p.q;
    const double w = (u * std::sqrt(s) * x - s * std::sqrt(u) * z) *
                     (std::sqrt(u) * z - std::sqrt(s) * x) / ((u - s) * (u - s));
    return (1.0 - q) * (u - t) * (t - s) / (t * (u - q * s)) * (0.25 - w);
}

double mobius_h(const ProcessParams& p, double x) {
    const double AB = realize(p.A * p.B), CD = realize(p.C * p.D);
    const double den = 1.0 - AB * x;
    if (std::abs(den) < 1e-300) throw Singular("mobius_h: pole at x = 1/(AB)");
    return (x - CD) / den;
}

double mobius_T(const ProcessParams& p, double t) {
    const double AB = realize(p.A * p.B), CD = realize(p.C * p.D);
    const double den = 1.0 + AB * t;
    if (std::abs(den) < 1e-300) throw Singular("mobius_T: pole at t = -1/(AB)");
    return (t + CD) / den;
}

double z_from_y(const ProcessParams& p, double t, double y) {
    if (!(t > 0.0)) throw DomainError("z_from_y: need t > 0");
    return 2.0 * std::sqrt(t) * y / std::sqrt(1.0 - p.q);
}

double x_from_z(const ProcessParams& p, double t, double z) {
    const cplx A = p.A, B = p.B, C = p.C, D = p.D;
    const double q = p.q;
    const double AB = realize(A * B);
    const double quad =
        realize((1.0 - A * C) * (1.0 - A * D) * (1.0 - B * C) * (1.0 - B * D));
    const double den2 = (1.0 - q) * quad;
    if (!(den2 > 0.0))
        throw Singular("x_from_z: vanishing normalization denominator");
    const double P = realize(A * B * C * D);
    const double num = std::sqrt(1.0 - q) * (1.0 + AB * t) * z -
                       realize(A + B) * t - realize(C + D);
    return num * std::sqrt(1.0 - q * P) / std::sqrt(den2);
}

ProcessParams q_meixner(double theta, double tau, double gamma) {
    if (!(gamma > -1.0 && gamma < 1.0))
        throw HypothesisViolated("q_meixner: need -1 < gamma < 1");
    const double q = gamma;
    const double disc = theta * theta - 4.0 * tau;
    cplx C, D;
    const double s = 2.0 * std::sqrt(1.0 - q);
    if (disc >= 0.0) {
        const double r = std::sqrt(disc);
        C = cplx((-theta + r) / s, 0.0);
        D = cplx((-theta - r) / s, 0.0);
    } else {
        const double r = std::sqrt(-disc);
        C = cplx(-theta / s, r / s);
        D = std::conj(C);
    }
    return validate(cplx(0.0), cplx(0.0), C, D, q);
}

ProcessParams bi_poisson(double eta, double theta, double gamma) {
    if (!(gamma > -1.0 && gamma < 1.0))
        throw HypothesisViolated("bi_poisson: need -1 < gamma < 1");
    if (!(1.0 + eta * theta > std::max(gamma, 0.0)))
        throw HypothesisViolated(
            "bi_poisson: need 1 + eta*theta > max(gamma, 0)");
    const double q = gamma;
    const double r = std::sqrt(eta * theta + 1.0 - q);
    return validate(cplx(0.0), cplx(-eta / r, 0.0), cplx(0.0),
                    cplx(-theta / r, 0.0), q);
}

ProcessParams free_harness(double eta, double theta, double sigma, double tau) {
    const double st = sigma * tau;
    if (!(st >= 0.0 && st < 1.0))
        throw HypothesisViolated("free_harness: need 0 <= sigma*tau < 1");
    if (!(2.0 + eta * theta + 2.0 * st >= 0.0))
        throw HypothesisViolated(
            "free_harness: need 2 + eta*theta + 2*sigma*tau >= 0");
    const double alpha = (eta + theta * sigma) / (1.0 - st);
    const double beta = (eta * tau + theta) / (1.0 - st);
    if (!(1.0 + alpha * beta > 0.0))
        throw HypothesisViolated("free_harness: need 1 + alpha*beta > 0");
    const double s = std::sqrt(1.0 + alpha * beta);
    const cplx r1 = std::sqrt(cplx((alpha - beta * sigma) * (alpha - beta * sigma) -
                                   4.0 * sigma,
                               0.0));
    const cplx r2 = std::sqrt(cplx((beta - alpha * tau) * (beta - alpha * tau) -
                                   4.0 * tau,
                               0.0));
    const cplx A = -(alpha + beta * sigma - r1) / (2.0 * s);
    const cplx B = -(alpha + beta * sigma + r1) / (2.0 * s);
    const cplx C = -(beta + alpha * tau - r2) / (2.0 * s);
    const cplx D = -(beta + alpha * tau + r2) / (2.0 * s);
    return validate(A, B, C, D, 0.0);
}

ProcessParams purely_quadratic(double sigma, double tau, double gamma) {
    if (!(sigma > 0.0)) throw HypothesisViolated("purely_quadratic: need sigma > 0");
    if (!(tau > 0.0)) throw HypothesisViolated("purely_quadratic: need tau > 0");
    if (!(sigma * tau < 1.0))
        throw HypothesisViolated("purely_quadratic: need sigma*tau < 1");
    const double cap = 1.0 - 2.0 * std::sqrt(sigma * tau);
    if (!(gamma > -1.0 && gamma < cap))
        throw HypothesisViolated(
            "purely_quadratic: need -1 < gamma < 1 - 2*sqrt(sigma*tau)");
    const double root = std::sqrt((1.0 - gamma) * (1.0 - gamma) -
                                  4.0 * sigma * tau);
    const double q = 4.0 * (gamma + sigma * tau) /
                     ((1.0 + gamma + root) * (1.0 + gamma + root));
    const double den =
        std::sqrt((1.0 - q) + std::sqrt((1.0 - q) * (1.0 - q) +
                                        4.0 * q * sigma * tau));
    const cplx A(0.0, std::sqrt(2.0 * sigma) / den);
    const cplx C(0.0, std::sqrt(2.0 * tau) / den);
    return validate(A, -A, C, -C, q);
}

double CovarianceForm::eval(double s, double t) const {
    return c0 + c1 * std::min(s, t) + c2 * std::max(s, t) + c3 * s * t;
}

CovarianceForm x_covariance(const ProcessParams& p) {
    CovarianceForm f;
    f.c1 = 1.0;  // Cov(X_s, X_t) = min(s,t)
    f.domain = time_domains(p).J;
    return f;
}

CovarianceForm gl2_action(const Mat2& m, const CovarianceForm& f) {
    const double det = m.a * m.d - m.b * m.c;
    if (det == 0.0) throw DomainError("gl2_action: matrix not invertible");
    if (!(det > 0.0))
        throw DomainError("gl2_action: induced Mobius map must be increasing");
    CovarianceForm g;
    g.c0 = f.c0 * m.d * m.d + (f.c1 + f.c2) * m.b * m.d + f.c3 * m.b * m.b;
    g.c1 = f.c0 * m.c * m.d + f.c1 * m.a * m.d + f.c2 * m.b * m.c +
           f.c3 * m.a * m.b;
    g.c2 = f.c0 * m.c * m.d + f.c1 * m.b * m.c + f.c2 * m.a * m.d +
           f.c3 * m.a * m.b;
    g.c3 = f.c0 * m.c * m.c + (f.c1 + f.c2) * m.a * m.c + f.c3 * m.a * m.a;
    // New domain = preimage of f.domain under T(t) = (at+b)/(ct+d).
    auto inv = [&](double x) {
        if (std::isinf(x))
            return m.c != 0.0 ? m.a / m.c : (x > 0 ? kInf : -kInf);
        const double den = m.a - m.c * x;
        if (den == 0.0) return kInf;
        return (m.d * x - m.b) / den;
    };
    g.domain.lo = inv(f.domain.lo);
    g.domain.hi = inv(f.domain.hi);
    if (!(g.domain.lo < g.domain.hi))
        throw DomainError("gl2_action: the Mobius image leaves the time domain");
    if (m.c != 0.0) {
        const double pole = -m.d / m.c;
        if (pole > g.domain.lo && pole < g.domain.hi)
            throw DomainError(
                "gl2_action: Mobius pole inside the transformed domain");
    }
    return g;
}

}  // namespace awh
