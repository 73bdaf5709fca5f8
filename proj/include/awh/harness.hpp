#pragma once

#include "awh/askey_wilson.hpp"

namespace awh {

// Process parameters (A,B),(C,D) real or conjugate pairs, |q|<1, with all of
// AC, AD, BC, BD and their q-multiples outside [1, inf) and ABCD, qABCD < 1.
// Construct through validate().
struct ProcessParams {
    cplx A{0.0, 0.0}, B{0.0, 0.0}, C{0.0, 0.0}, D{0.0, 0.0};
    double q = 0.0;
};

// The quadratic-harness constants of the conditional-variance form.
struct HarnessParams {
    double eta = 0.0, theta = 0.0, sigma = 0.0, tau = 0.0, gamma = 0.0;
};

struct Interval {
    double lo = 0.0;
    double hi = 0.0;  // +inf allowed
    bool contains(double t) const { return t > lo && t < hi; }
};

struct TimeDomain {
    Interval I;  // domain of (Y_t) / (Z_t)
    Interval J;  // domain of (X_t), J = h(I)
};

ProcessParams validate(cplx A, cplx B, cplx C, cplx D, double q);

HarnessParams harness_params(const ProcessParams& p);

TimeDomain time_domains(const ProcessParams& p);

AWMeasure marginal(const ProcessParams& p, double t,
                   const TruncationPolicy& policy = {});

AWMeasure transition(const ProcessParams& p, double s, double t, double x,
                     const TruncationPolicy& policy = {});

// Closed-form moments of (Y_t).
double e_y(const ProcessParams& p, double t);
double var_y(const ProcessParams& p, double t);
double cov_y(const ProcessParams& p, double s, double t);
double cond_e_y(const ProcessParams& p, double s, double t, double x);
double cond_var_y(const ProcessParams& p, double s, double t, double x);
double bicond_e_y(const ProcessParams& p, double s, double t, double u,
                  double x, double z);
double bicond_var_y(const ProcessParams& p, double s, double t, double u,
                    double x, double z);

// h(x) = (x-CD)/(1-ABx) and its inverse T(t) = (t+CD)/(1+ABt).
double mobius_h(const ProcessParams& p, double x);
double mobius_T(const ProcessParams& p, double t);

double z_from_y(const ProcessParams& p, double t, double y);
double x_from_z(const ProcessParams& p, double t, double z);

// Constructors of the named subfamilies; each checks its corollary's
// hypotheses and throws HypothesisViolated naming the failed inequality.
ProcessParams q_meixner(double theta, double tau, double gamma);
ProcessParams bi_poisson(double eta, double theta, double gamma);
ProcessParams free_harness(double eta, double theta, double sigma, double tau);
ProcessParams purely_quadratic(double sigma, double tau, double gamma);

// Covariance of the form c(s,t) = c0 + c1*min + c2*max + c3*s*t on a time
// interval; the carrier of the GL2 action Y_t = (ct+d) X_{(at+b)/(ct+d)}.
struct CovarianceForm {
    double c0 = 0.0, c1 = 0.0, c2 = 0.0, c3 = 0.0;
    Interval domain;
    double eval(double s, double t) const;
};

struct Mat2 {
    double a = 1.0, b = 0.0, c = 0.0, d = 1.0;
};

CovarianceForm x_covariance(const ProcessParams& p);

CovarianceForm gl2_action(const Mat2& m, const CovarianceForm& f);

}  // namespace awh
