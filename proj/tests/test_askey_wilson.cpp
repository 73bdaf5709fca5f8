#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "awh/askey_wilson.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

using namespace awh;

namespace {

double rel(double got, double want) {
    return std::abs(got - want) / std::max(std::abs(want), 1e-280);
}

AWParams real_set(double a, double b, double c, double d, double q) {
    return aw_params({a, 0.0}, {b, 0.0}, {c, 0.0}, {d, 0.0}, q);
}

// the continuous reference set used throughout
const AWParams kCont = real_set(0.4, 0.3, -0.2, 0.1, 0.5);

}  // namespace

TEST_CASE("recurrence coefficient reference values") {
    const AWParams p = real_set(0.3, 0.2, 0.1, 0.05, 0.5);
    CHECK(rel(recurrence_A(1, p), 3.1607099233831084) < 1e-14);
    CHECK(rel(recurrence_C(1, p), 0.14486753387120302) < 1e-14);
    CHECK(rel(recurrence_A(0, p), 2.9946417258510887) < 1e-14);
    CHECK(recurrence_C(0, p) == 0.0);
}

TEST_CASE("density and moment reference values") {
    const AWMeasure m = measure(kCont);
    CHECK(m.has_continuous);
    CHECK(m.atoms.empty());
    CHECK(rel(m.K, 0.042280746895847134) < 1e-12);
    CHECK(rel(density(0.3, kCont), 1.0466031603261454) < 1e-12);
    CHECK(rel(density(-0.75, kCont), 0.021429221562409072) < 1e-12);
    CHECK(rel(mean(kCont), 0.3122505985634477) < 1e-13);
    CHECK(rel(variance(kCont), 0.11889469799530711) < 1e-13);
}

TEST_CASE("polynomial evaluation reference values") {
    const AWParams p = real_set(0.6, -0.3, 0.45, 0.2, 0.4);
    CHECK(rel(eval_bar(3, 0.37, p), -0.0438119288663522) < 1e-13);
    CHECK(rel(eval_monic(4, 0.37, p), 0.0281282678495991) < 1e-13);
    CHECK(eval_bar(0, 0.37, p) == 1.0);
    CHECK(eval_monic(0, 0.37, p) == 1.0);

    // the monic coefficients stay finite at a = 0
    const AWParams p0 = real_set(0.0, -0.3, 0.45, 0.2, 0.4);
    CHECK(rel(eval_monic(4, 0.37, p0), -0.0020263408579553263) < 1e-12);
    CHECK_THROWS_AS(eval_bar(2, 0.37, p0), DomainError);
}

TEST_CASE("bar and monic recurrences agree with their coefficients") {
    const AWParams p = real_set(0.6, -0.3, 0.45, 0.2, 0.4);
    const double ainv = 0.6 + 1.0 / 0.6;
    for (double x : {-0.8, -0.15, 0.37, 0.9}) {
        for (int n = 1; n <= 7; ++n) {
            const double An = recurrence_A(n, p), Cn = recurrence_C(n, p);
            const double lhs = (2.0 * x - ainv) * eval_bar(n, x, p);
            const double rhs = An * eval_bar(n + 1, x, p) -
                               (An + Cn) * eval_bar(n, x, p) +
                               Cn * eval_bar(n - 1, x, p);
            CHECK(std::abs(lhs - rhs) < 1e-12 * std::max(1.0, std::abs(lhs)));

            const double ml = x * eval_monic(n, x, p);
            const double mr = eval_monic(n + 1, x, p) -
                              monic_s(n, p) * eval_monic(n, x, p) +
                              monic_u(n, p) * eval_monic(n - 1, x, p);
            CHECK(std::abs(ml - mr) < 1e-12 * std::max(1.0, std::abs(ml)));
        }
    }
}

TEST_CASE("monic polynomials are monic in x") {
    const AWParams p = real_set(0.6, -0.3, 0.45, 0.2, 0.4);
    // leading coefficient by finite growth: w_n(x)/x^n -> 1
    for (int n : {2, 5}) {
        const double big = 1e6;
        CHECK(rel(eval_monic(n, big, p) / std::pow(big, n), 1.0) < 1e-5);
    }
}

TEST_CASE("normalization across measure types") {
    auto total_mass = [](const AWParams& p) {
        return integrate_measure(measure(p), [](double) { return 1.0; });
    };
    CHECK(rel(total_mass(kCont), 1.0) < 1e-10);
    CHECK(rel(total_mass(real_set(1.5, 0.3, 0.2, 0.1, 0.5)), 1.0) < 1e-10);
    CHECK(rel(total_mass(real_set(1.4, 0.5, 0.3, 0.0, 0.6)), 1.0) < 1e-10);
    CHECK(rel(total_mass(real_set(1.5, -1.2, 0.2, 0.1, 0.5)), 1.0) < 1e-10);
    // conjugate pairs, q < 0
    const AWParams pc =
        aw_params({0.3, 0.4}, {0.3, -0.4}, {-0.2, 0.1}, {-0.2, -0.1}, -0.5);
    CHECK(rel(total_mass(pc), 1.0) < 1e-10);
}

TEST_CASE("closed-form mean and variance match quadrature") {
    for (const AWParams& p :
         {kCont, real_set(1.5, 0.3, 0.2, 0.1, 0.5),
          aw_params({0.3, 0.4}, {0.3, -0.4}, {-0.2, 0.1}, {-0.2, -0.1}, -0.5)}) {
        const AWMeasure m = measure(p);
        const double m1 = integrate_measure(m, [](double x) { return x; });
        const double m2 = integrate_measure(m, [](double x) { return x * x; });
        CHECK(std::abs(mean(p) - m1) < 1e-10);
        CHECK(std::abs(variance(p) - (m2 - m1 * m1)) < 1e-10);
    }
}

TEST_CASE("orthogonality of low-degree polynomials") {
    for (const AWParams& p : {kCont, real_set(1.5, 0.3, 0.2, 0.1, 0.5)}) {
        const AWMeasure m = measure(p);
        const double i12 = integrate_measure(m, [&](double x) {
            return eval_monic(1, x, p) * eval_monic(2, x, p);
        });
        const double i3 =
            integrate_measure(m, [&](double x) { return eval_monic(3, x, p); });
        const double i13 = integrate_measure(m, [&](double x) {
            return eval_bar(1, x, p) * eval_bar(3, x, p);
        });
        CHECK(std::abs(i12) < 1e-10);
        CHECK(std::abs(i3) < 1e-10);
        CHECK(std::abs(i13) < 1e-9);
    }
}

TEST_CASE("atom locations and masses") {
    const std::vector<Atom> one = atoms(real_set(1.5, 0.3, 0.2, 0.1, 0.5));
    REQUIRE(one.size() == 1);
    CHECK(rel(one[0].x, 1.0833333333333333) < 1e-14);
    CHECK(rel(one[0].mass, 0.6509761054416616) < 1e-12);

    const std::vector<Atom> zero_prod = atoms(real_set(1.4, 0.5, 0.3, 0.0, 0.6));
    REQUIRE(zero_prod.size() == 1);
    CHECK(rel(zero_prod[0].x, 1.0571428571428572) < 1e-14);
    CHECK(rel(zero_prod[0].mass, 0.6927170308583208) < 1e-12);

    std::vector<Atom> two = atoms(real_set(1.5, -1.2, 0.2, 0.1, 0.5));
    REQUIRE(two.size() == 2);
    std::sort(two.begin(), two.end(),
              [](const Atom& l, const Atom& r) { return l.x > r.x; });
    CHECK(rel(two[0].x, 1.0833333333333333) < 1e-14);
    CHECK(rel(two[0].mass, 0.24938512302718827) < 1e-12);
    CHECK(rel(two[1].x, -1.0166666666666666) < 1e-14);
    CHECK(rel(two[1].mass, 0.0043951405556488694) < 1e-12);

    CHECK(atoms(kCont).empty());
    for (const Atom& at : two) CHECK(std::abs(at.x) >= 1.0);
}

TEST_CASE("purely discrete pmf reference values") {
    const double a = 10.4, b = 0.91, c = 0.05, q = 0.5;
    const int N = 3;
    const double want[4] = {0.36299068031365395, 0.2640428398911144,
                            0.20868745089929394, 0.164279028895938};
    double sum = 0.0;
    for (int k = 0; k <= N; ++k) {
        const double pk = discrete_pmf(k, N, a, b, c, q);
        CHECK(rel(pk, want[k]) < 1e-12);
        CHECK(pk > 0.0);
        sum += pk;
    }
    CHECK(std::abs(sum - 1.0) < 1e-13);
}

TEST_CASE("pmf matches the atoms of the fully discrete measure") {
    const double a = 10.4, b = 0.91, c = 0.05, q = 0.5;
    const int N = 3;
    const AWParams p = real_set(a, b, c, 1.0 / (a * std::pow(q, N)), q);

    const FavardReport rep = classify(p);
    CHECK(rep.favard_case == FavardCase::iii);
    CHECK(rep.admissible);
    REQUIRE(rep.n_atoms_cap.has_value());
    CHECK(*rep.n_atoms_cap == N + 1);

    const AWMeasure m = measure(p);
    CHECK_FALSE(m.has_continuous);
    CHECK(m.K == 0.0);
    REQUIRE(static_cast<int>(m.atoms.size()) == N + 1);
    for (int k = 0; k <= N; ++k) {
        const double xk = 0.5 * (a * std::pow(q, k) + 1.0 / (a * std::pow(q, k)));
        const double mk = discrete_pmf(k, N, a, b, c, q);
        const auto it = std::min_element(
            m.atoms.begin(), m.atoms.end(), [&](const Atom& l, const Atom& r) {
                return std::abs(l.x - xk) < std::abs(r.x - xk);
            });
        CHECK(std::abs(it->x - xk) < 1e-12);
        CHECK(rel(it->mass, mk) < 1e-11);
    }

    // the support points are the roots of the (N+1)-st monic polynomial
    for (const Atom& at : m.atoms)
        CHECK(std::abs(eval_monic(N + 1, at.x, p)) < 1e-8);
}

TEST_CASE("classification over the six-product counts") {
    CHECK(classify(kCont).favard_case == FavardCase::i);
    CHECK(classify(kCont).m1 == 0);
    CHECK(classify(real_set(1.5, 0.3, 0.2, 0.1, 0.5)).favard_case ==
          FavardCase::i);
    const AWParams pc =
        aw_params({0.3, 0.4}, {0.3, -0.4}, {-0.2, 0.1}, {-0.2, -0.1}, -0.5);
    CHECK(classify(pc).favard_case == FavardCase::ii);
    CHECK(classify(pc).admissible);
}

TEST_CASE("measure is symmetric in the four parameters") {
    const AWParams swapped = real_set(-0.2, 0.1, 0.4, 0.3, 0.5);  // (c,d,a,b)
    CHECK(rel(mean(swapped), mean(kCont)) < 1e-12);
    CHECK(rel(variance(swapped), variance(kCont)) < 1e-12);
    for (double x : {-0.6, 0.05, 0.81})
        CHECK(rel(density(x, swapped), density(x, kCont)) < 1e-11);
}

TEST_CASE("integrate_measure handles mixed measures") {
    const AWParams p = real_set(1.5, 0.3, 0.2, 0.1, 0.5);
    const AWMeasure m = measure(p);
    REQUIRE(m.atoms.size() == 1);
    CHECK(m.has_continuous);
    const double m1 = integrate_measure(m, [](double x) { return x; });
    CHECK(std::abs(m1 - mean(p)) < 1e-10);
    // atom indicator integrates to the atom mass
    const double above = integrate_measure(
        m, [](double x) { return x > 1.0 ? 1.0 : 0.0; });
    CHECK(rel(above, m.atoms[0].mass) < 1e-10);
}

TEST_CASE("density_theta carries the Jacobian") {
    const AWMeasure m = measure(kCont);
    for (double th : {0.4, 1.1, 2.3}) {
        const double lhs = density_theta(th, m.params, m.K);
        const double rhs = density(std::cos(th), kCont) * std::sin(th);
        CHECK(rel(lhs, rhs) < 1e-11);
    }
}

TEST_CASE("admissibility guards") {
    CHECK_THROWS_AS(aw_params({0.4, 0.0}, {0.3, 0.0}, {0.2, 0.0}, {0.1, 0.0}, 1.0),
                    DomainError);
    // (a,b) neither real nor conjugate
    CHECK_THROWS_AS(aw_params({0.4, 0.2}, {0.3, 0.1}, {0.2, 0.0}, {0.1, 0.0}, 0.5),
                    DomainError);
    // abcd >= 1
    CHECK_THROWS_AS(real_set(2.0, 1.5, 1.2, 1.1, 0.5), DomainError);
    CHECK_THROWS_AS(density(1.2, kCont), DomainError);
    CHECK_THROWS_AS(density(-1.0, kCont), DomainError);
    CHECK_THROWS_AS(discrete_pmf(5, 3, 10.4, 0.91, 0.05, 0.5), DomainError);
    // measure() refuses an inadmissible count pattern: q > 0, m1 = 2 but
    // ab not on the q^{-N} grid and b outside the atom-free window
    const AWParams bad{{3.0, 0.0}, {0.9, 0.0}, {0.1, 0.0}, {0.05, 0.0}, 0.5};
    const FavardReport rep = classify(bad);
    if (!rep.admissible) CHECK_THROWS_AS(measure(bad), Inadmissible);
}
