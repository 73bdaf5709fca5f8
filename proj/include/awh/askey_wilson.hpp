#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "awh/qseries.hpp"

namespace awh {

// Four Askey-Wilson parameters plus the base. Each of (a,b) and (c,d) is
// either a real pair or a complex-conjugate pair; abcd and q*abcd are real
// and < 1. Construct through aw_params() which enforces all of that.
struct AWParams {
    cplx a{0.0, 0.0}, b{0.0, 0.0}, c{0.0, 0.0}, d{0.0, 0.0};
    double q = 0.0;
};

AWParams aw_params(cplx a, cplx b, cplx c, cplx d, double q);

enum class FavardCase { i, ii, iii, iv, v, vi, inadmissible };

struct FavardReport {
    int m1 = 0;  // of {ab,ac,ad,bc,bd,cd} in [1,inf)
    int m2 = 0;  // same for the q-scaled products
    FavardCase favard_case = FavardCase::inadmissible;
    std::optional<int> n_atoms_cap;  // set iff the measure is purely discrete
    bool admissible = false;
};

struct Atom {
    double x = 0.0;     // |x| >= 1
    double mass = 0.0;  // >= 0
};

struct AWMeasure {
    AWParams params;
    double K = 0.0;  // density normalizing constant; 0 iff no continuous part
    std::vector<Atom> atoms;
    bool has_continuous = false;
};

// Recurrence coefficients A_n, C_n of
//   (2x - (a+1/a)) wbar_n = A_n wbar_{n+1} - (A_n+C_n) wbar_n + C_n wbar_{n-1}.
double recurrence_A(int n, const AWParams& p);
double recurrence_C(int n, const AWParams& p);

// wbar_n(x) by forward recurrence; wbar_{-1}=0, wbar_0=1. Needs a != 0.
double eval_bar(int n, double x, const AWParams& p);

// Monic form x w_n = w_{n+1} - s_n w_n + u_n w_{n-1}. The coefficients are
// evaluated from a-cancelled expressions, so a = 0 is fine.
double eval_monic(int n, double x, const AWParams& p);
// The monic recurrence coefficients themselves (exposed for the bridge
// endpoint laws, which need the roots of w_2).
double monic_s(int n, const AWParams& p);
double monic_u(int n, const AWParams& p);

FavardReport classify(const AWParams& p);

// Density at x in (-1,1); DomainError outside.
double density(double x, const AWParams& p, const TruncationPolicy& policy = {});

std::vector<Atom> atoms(const AWParams& p, const TruncationPolicy& policy = {});

// P(X = x_k) of the N-point law with parameters (a,b,c) from the purely
// discrete regime; DomainError outside its admissibility region.
double discrete_pmf(int k, int N, double a, double b, double c, double q);

AWMeasure measure(const AWParams& p, const TruncationPolicy& policy = {});

double mean(const AWParams& p);
double variance(const AWParams& p);

// Integral of f against the measure: atoms summed exactly, the continuous
// part integrated in theta (x = cos theta removes the edge singularity).
double integrate_measure(const AWMeasure& m, const std::function<double(double)>& f,
                         double tol = 1e-12);

// Density weight in theta: f(cos th) sin th. This is the smooth integrand
// every quadrature and sampling table uses.
double density_theta(double th, const AWParams& p, double K,
                     const TruncationPolicy& policy = {});

// Normalizing constant of the density.
double density_constant(const AWParams& p, const TruncationPolicy& policy = {});

}  // namespace awh
