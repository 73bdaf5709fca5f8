#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "awh/harness.hpp"

#include <cmath>
#include <string>

using namespace awh;

namespace {

double rel(double got, double want) {
    return std::abs(got - want) / std::max(std::abs(want), 1e-280);
}

const ProcessParams kP =
    validate({0.5, 0.0}, {-0.3, 0.0}, {0.4, 0.0}, {0.2, 0.0}, 0.5);

}  // namespace

TEST_CASE("closed-form moment reference values") {
    const double s = 0.33, t = 1.08, u = 2.48;
    CHECK(rel(e_y(kP, t), 0.4265469874151286) < 1e-13);
    CHECK(rel(var_y(kP, t), 0.1115808753741255) < 1e-13);
    CHECK(rel(cov_y(kP, s, t), 0.050464349644824685) < 1e-13);
    CHECK(rel(cond_e_y(kP, s, t, 0.42), 0.3258151920878622) < 1e-13);
    CHECK(rel(cond_var_y(kP, s, t, 0.42), 0.0882925536060263) < 1e-13);
    CHECK(rel(bicond_e_y(kP, s, t, u, 0.3, -0.2), 0.002260793972921071) < 1e-12);
    CHECK(rel(bicond_var_y(kP, s, t, u, 0.3, -0.2), 0.06425743849372316) < 1e-12);
}

TEST_CASE("harness constants reference values") {
    const HarnessParams h = harness_params(kP);
    CHECK(rel(h.eta, -0.2879319147079058) < 1e-12);
    CHECK(rel(h.theta, -0.4276276953606822) < 1e-12);
    CHECK(rel(h.sigma, -0.07455268389662027) < 1e-12);
    CHECK(rel(h.tau, 0.03976143141153082) < 1e-12);
    CHECK(rel(h.gamma, 0.5089463220675945) < 1e-12);
}

TEST_CASE("time domains and clock maps") {
    const TimeDomain td = time_domains(kP);
    CHECK(rel(td.I.lo, 0.08) < 1e-14);
    CHECK(std::isinf(td.I.hi));
    CHECK(td.J.lo == 0.0);
    CHECK(rel(td.J.hi, 6.666666666666667) < 1e-14);
    CHECK(td.I.contains(0.33));
    CHECK_FALSE(td.I.contains(0.08));

    CHECK(rel(mobius_T(kP, 1.3), 1.7142857142857146) < 1e-14);
    CHECK(rel(mobius_h(kP, 0.7), 0.5610859728506786) < 1e-14);
    for (double x : {0.2, 0.7, 3.1}) CHECK(rel(mobius_T(kP, mobius_h(kP, x)), x) < 1e-13);
    for (double t : {0.1, 1.3, 4.0}) CHECK(rel(mobius_h(kP, mobius_T(kP, t)), t) < 1e-13);
    // J is the image of I under h
    CHECK(std::abs(mobius_h(kP, td.I.lo) - td.J.lo) < 1e-13);

    CHECK(rel(x_from_z(kP, 1.08, 0.9), -0.43372225324018504) < 1e-13);
    CHECK(rel(z_from_y(kP, 0.64, 0.5), 2.0 * 0.8 * 0.5 / std::sqrt(0.5)) < 1e-14);
}

TEST_CASE("marginal matches the closed-form moments") {
    for (double t : {0.33, 1.08, 2.48}) {
        const AWMeasure m = marginal(kP, t);
        const double m0 = integrate_measure(m, [](double) { return 1.0; });
        const double m1 = integrate_measure(m, [](double y) { return y; });
        const double m2 = integrate_measure(m, [](double y) { return y * y; });
        CHECK(std::abs(m0 - 1.0) < 1e-10);
        CHECK(std::abs(m1 - e_y(kP, t)) < 1e-10);
        CHECK(std::abs(m2 - m1 * m1 - var_y(kP, t)) < 1e-10);
    }
}

TEST_CASE("transition kernel matches the closed-form conditional moments") {
    const double s = 0.33, t = 1.08;
    for (double x : {-0.4, 0.1, 0.42}) {
        const AWMeasure k = transition(kP, s, t, x);
        const double m0 = integrate_measure(k, [](double) { return 1.0; });
        const double m1 = integrate_measure(k, [](double y) { return y; });
        const double m2 = integrate_measure(k, [](double y) { return y * y; });
        CHECK(std::abs(m0 - 1.0) < 1e-10);
        CHECK(std::abs(m1 - cond_e_y(kP, s, t, x)) < 1e-10);
        CHECK(std::abs(m2 - m1 * m1 - cond_var_y(kP, s, t, x)) < 1e-10);
    }
}

TEST_CASE("marginals are consistent under the transition kernel") {
    const double s = 0.33, t = 1.08;
    const AWMeasure ms = marginal(kP, s);
    const AWMeasure mt = marginal(kP, t);
    for (int pow = 1; pow <= 3; ++pow) {
        const double lhs = integrate_measure(
            ms,
            [&](double x) {
                const AWMeasure k = transition(kP, s, t, x);
                return integrate_measure(
                    k, [&](double y) { return std::pow(y, pow); }, 1e-10);
            },
            1e-10);
        const double rhs =
            integrate_measure(mt, [&](double y) { return std::pow(y, pow); });
        CHECK(std::abs(lhs - rhs) < 1e-8);
    }
}

TEST_CASE("covariance factors through the conditional mean") {
    // E[Y_t | Y_s] is linear in Y_s, so cov(s,t) = slope * var(s)
    const double s = 0.33, t = 1.08;
    const double x1 = 0.1, x2 = 0.3;
    const double slope =
        (cond_e_y(kP, s, t, x2) - cond_e_y(kP, s, t, x1)) / (x2 - x1);
    CHECK(rel(cov_y(kP, s, t), slope * var_y(kP, s)) < 1e-11);
}

TEST_CASE("validate rejects and names offending products") {
    try {
        validate({3.0, 0.0}, {0.2, 0.0}, {0.5, 0.0}, {0.1, 0.0}, 0.5);
        FAIL("expected Inadmissible");
    } catch (const Inadmissible& e) {
        REQUIRE_FALSE(e.violations.empty());
        bool names_ac = false;
        for (const std::string& v : e.violations)
            if (v.find("AC") != std::string::npos) names_ac = true;
        CHECK(names_ac);
    }
    // mismatched pair structure
    CHECK_THROWS_AS(validate({0.3, 0.2}, {0.4, 0.1}, {0.1, 0.0}, {0.2, 0.0}, 0.5),
                    Inadmissible);
    CHECK_THROWS_AS(validate({0.3, 0.0}, {0.2, 0.0}, {0.1, 0.0}, {0.2, 0.0}, 1.0),
                    Inadmissible);
}

TEST_CASE("q-Meixner constructor round-trips its corollary parameters") {
    const ProcessParams p = q_meixner(0.8, 0.3, 0.2);
    const HarnessParams h = harness_params(p);
    CHECK(rel(h.theta, 0.8) < 1e-12);
    CHECK(rel(h.tau, 0.3) < 1e-12);
    CHECK(rel(h.gamma, 0.2) < 1e-12);
    CHECK(std::abs(h.eta) < 1e-12);
    CHECK(std::abs(h.sigma) < 1e-12);
    CHECK(std::abs(p.A) == 0.0);
    CHECK(std::abs(p.B) == 0.0);
    // complex-root branch
    const HarnessParams hc = harness_params(q_meixner(0.1, 0.5, -0.3));
    CHECK(rel(hc.theta, 0.1) < 1e-12);
    CHECK(rel(hc.tau, 0.5) < 1e-12);
    CHECK_THROWS_AS(q_meixner(0.1, 0.2, 1.5), HypothesisViolated);
}

TEST_CASE("bi-Poisson constructor round-trips its corollary parameters") {
    const ProcessParams p = bi_poisson(0.6, -0.4, 0.3);
    const HarnessParams h = harness_params(p);
    CHECK(rel(h.eta, 0.6) < 1e-12);
    CHECK(rel(h.theta, -0.4) < 1e-12);
    CHECK(rel(h.gamma, 0.3) < 1e-12);
    CHECK(std::abs(h.sigma) < 1e-12);
    CHECK(std::abs(h.tau) < 1e-12);
    CHECK_THROWS_AS(bi_poisson(2.0, -0.8, 0.9), HypothesisViolated);
}

TEST_CASE("free harness constructor reference values and round-trip") {
    const ProcessParams p = free_harness(0.5, -0.3, 0.4, 0.35);
    CHECK(rel(p.A.real(), -0.1983350726430202) < 1e-12);
    CHECK(rel(std::abs(p.A.imag()), 0.6005524115010179) < 1e-12);
    CHECK(rel(p.C.real(), -0.004808122973164111) < 1e-10);
    CHECK(rel(std::abs(p.C.imag()), 0.5915884396719352) < 1e-12);
    CHECK(p.B == std::conj(p.A));
    CHECK(p.D == std::conj(p.C));
    CHECK(p.q == 0.0);

    const HarnessParams h = harness_params(p);
    CHECK(rel(h.eta, 0.5) < 1e-10);
    CHECK(rel(h.theta, -0.3) < 1e-10);
    CHECK(rel(h.sigma, 0.4) < 1e-10);
    CHECK(rel(h.tau, 0.35) < 1e-10);
    CHECK_THROWS_AS(free_harness(0.1, 0.1, 2.0, 0.6), HypothesisViolated);
}

TEST_CASE("purely quadratic constructor reference values and round-trip") {
    const ProcessParams p = purely_quadratic(0.3, 0.25, -0.2);
    CHECK(std::abs(p.A.real()) < 1e-14);
    CHECK(rel(std::abs(p.A.imag()), 0.5143776332557023) < 1e-12);
    CHECK(std::abs(p.C.real()) < 1e-14);
    CHECK(rel(std::abs(p.C.imag()), 0.46956038801711275) < 1e-12);
    CHECK(rel(p.q, -0.14333495934998042) < 1e-12);
    CHECK(p.B == -p.A);
    CHECK(p.D == -p.C);

    const HarnessParams h = harness_params(p);
    CHECK(rel(h.sigma, 0.3) < 1e-10);
    CHECK(rel(h.tau, 0.25) < 1e-10);
    CHECK(rel(h.gamma, -0.2) < 1e-10);
    CHECK(std::abs(h.eta) < 1e-12);
    CHECK(std::abs(h.theta) < 1e-12);
    CHECK_THROWS_AS(purely_quadratic(-0.1, 0.25, -0.2), HypothesisViolated);
}

TEST_CASE("constructor round-trips across random admissible draws") {
    Rng rng(417, 0);
    auto u = [&](double lo, double hi) { return lo + (hi - lo) * rng.uniform01(); };
    for (int trial = 0; trial < 40; ++trial) {
        {
            const double th = u(-1.0, 1.0), ta = u(0.05, 0.8), ga = u(-0.8, 0.8);
            const HarnessParams h = harness_params(q_meixner(th, ta, ga));
            CHECK(std::abs(h.theta - th) < 1e-10);
            CHECK(std::abs(h.tau - ta) < 1e-10);
            CHECK(std::abs(h.gamma - ga) < 1e-10);
        }
        {
            const double et = u(-0.7, 0.7), th = u(-0.7, 0.7), ga = u(-0.6, 0.6);
            if (1.0 + et * th > std::max(ga, 0.0) + 0.05) {
                const HarnessParams h = harness_params(bi_poisson(et, th, ga));
                CHECK(std::abs(h.eta - et) < 1e-10);
                CHECK(std::abs(h.theta - th) < 1e-10);
                CHECK(std::abs(h.gamma - ga) < 1e-10);
            }
        }
        {
            const double et = u(-0.6, 0.6), th = u(-0.6, 0.6);
            const double si = u(0.05, 0.7), ta = u(0.05, 0.7);
            const HarnessParams h = harness_params(free_harness(et, th, si, ta));
            CHECK(std::abs(h.eta - et) < 1e-9);
            CHECK(std::abs(h.theta - th) < 1e-9);
            CHECK(std::abs(h.sigma - si) < 1e-9);
            CHECK(std::abs(h.tau - ta) < 1e-9);
        }
        {
            const double si = u(0.05, 0.8), ta = u(0.05, 0.8), ga = u(-0.7, 0.7);
            if (si * ta < 0.9 && ga < 1.0 - 2.0 * std::sqrt(si * ta) - 0.02) {
                const HarnessParams h = harness_params(purely_quadratic(si, ta, ga));
                CHECK(std::abs(h.sigma - si) < 1e-10);
                CHECK(std::abs(h.tau - ta) < 1e-10);
                CHECK(std::abs(h.gamma - ga) < 1e-10);
            }
        }
    }
}

TEST_CASE("covariance form and its GL2 carrier") {
    const CovarianceForm f = x_covariance(kP);
    CHECK(f.eval(0.4, 1.7) == 0.4);
    CHECK(f.eval(2.0, 0.9) == 0.9);
    CHECK(f.domain.lo == 0.0);
    CHECK(rel(f.domain.hi, 6.666666666666667) < 1e-14);

    // identity acts trivially
    const CovarianceForm id = gl2_action(Mat2{1.0, 0.0, 0.0, 1.0}, f);
    CHECK(id.c0 == f.c0);
    CHECK(id.c1 == f.c1);
    CHECK(id.c2 == f.c2);
    CHECK(id.c3 == f.c3);

    // carrier property: g(s,t) = (cs+d)(ct+d) f(T(s), T(t))
    const Mat2 m{1.0, 0.08, -0.15, 1.0};
    const CovarianceForm g = gl2_action(m, f);
    auto T = [&](double t) { return (m.a * t + m.b) / (m.c * t + m.d); };
    for (double s : {0.33, 0.9}) {
        for (double t : {1.08, 2.48}) {
            const double want =
                (m.c * s + m.d) * (m.c * t + m.d) * f.eval(T(s), T(t));
            CHECK(rel(g.eval(s, t), want) < 1e-13);
        }
    }

    CHECK_THROWS_AS(gl2_action(Mat2{1.0, 2.0, 2.0, 4.0}, f), DomainError);
    CHECK_THROWS_AS(gl2_action(Mat2{0.0, 1.0, -1.0, 0.0}, f), DomainError);
}
