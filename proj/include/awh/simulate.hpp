#pragma once

#include "awh/harness.hpp"

#include <cstdint>
#include <vector>

namespace awh {

struct Trajectory {
  std::vector<double> times;
  std::vector<double> values;  // Y-space
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
};

// One draw from a mixed Askey-Wilson law: atoms by mass, continuous part by
// inverse CDF on a cached 2048-cell theta-space table.
double sample_measure(const AWMeasure& m, Rng& rng);

// CDF / quantile of the *normalized* continuous part, read off the same
// cached table sample_measure draws from.  DomainError without a continuous
// part.  continuous_cdf(continuous_quantile(u)) = u to table accuracy.
double continuous_cdf(const AWMeasure& m, double y);
double continuous_quantile(const AWMeasure& m, double u);

// Sequential draw pi_{t_1} then P_{t_i,t_{i+1}}; grid strictly increasing,
// inside the open interval I (endpoints never admitted).  Deterministic given
// (seed, stream).
Trajectory sample_path(const ProcessParams& p, const std::vector<double>& grid,
                       std::uint64_t seed, std::uint64_t stream = 0);

struct McCell {
  double g1 = 0, g2 = 0;  // cell means of G1=(u Xs - s Xu)/(u-s), G2=(Xu-Xs)/(u-s)
  long count = 0;
  double var_hat = 0, var_se = 0, var_target = 0;
};

struct McConditional {
  long n_paths = 0;
  // no-intercept OLS of X_t on (X_s, X_u), HC0 standard errors
  double coef_s = 0, coef_u = 0, se_s = 0, se_u = 0;
  double target_s = 0, target_u = 0;  // (u-t)/(u-s), (t-s)/(u-s)
  // Cov(X_s, X_t) vs min(s,t)
  double cov_st = 0, cov_se = 0, cov_target = 0;
  // weighted fit of the variance surface residual on (G1, G1^2)
  double eta_hat = 0, eta_se = 0, sigma_hat = 0, sigma_se = 0;
  std::vector<McCell> cells;  // the binned conditional-variance curve
};

// X-process Monte Carlo check at X-times s <= t <= u in J (s < u): regression
// coefficients, covariance, and the binned conditional variance against the
// quadratic form in the greeks.
McConditional mc_conditional(const ProcessParams& p, double s, double t,
                             double u, long n_paths, std::uint64_t seed);

// ---- purely discrete process (the N+1-curve regime) ----

// D = 1/(A q^N) implied.  Construct through discrete_spec().
struct DiscreteProcessSpec {
  double A = 0, B = 0, C = 0, q = 0;
  int N = 0;
  double D = 0;
};

DiscreteProcessSpec discrete_spec(double A, double B, double C, double q,
                                  int N);

class DiscreteProcess {
 public:
  explicit DiscreteProcess(const DiscreteProcessSpec& spec);
  const DiscreteProcessSpec& spec() const { return sp_; }
  Interval domain() const;  // I = (C/(q^N A), 1/(AB)), open
  double y_k(double t, int k) const;
  double marginal_k(double t, int k) const;
  // P(Y_t = y_j(t) | Y_s = y_k(s)); zero for j > k.
  double transition_jk(double s, double t, int j, int k) const;
  // P(Y_t = y_j(t) | Y_s = y_k(s), Y_u = y_i(u)); needs i <= j <= k.
  double bicond(int i, int j, int k, double s, double t, double u) const;
  Trajectory sample_path(const std::vector<double>& grid, std::uint64_t seed,
                         std::uint64_t stream = 0) const;

 private:
  void check_time(double t, const char* who) const;
  DiscreteProcessSpec sp_;
};

inline DiscreteProcess discrete_process(const DiscreteProcessSpec& spec) {
  return DiscreteProcess(spec);
}

// ---- bridge endpoint laws (Z-space) ----

struct BridgeLaw {
  bool deterministic = false;
  double value = 0;         // when deterministic
  std::vector<Atom> atoms;  // otherwise: (location, mass)
};

struct BridgeEndpoints {
  double left_time = 0, right_time = 0;
  BridgeLaw left, right;
};

BridgeEndpoints bridge_endpoints(const ProcessParams& p);

}  // namespace awh
