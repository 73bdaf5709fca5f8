#pragma once

#include "awh/harness.hpp"

#include <string>
#include <vector>

namespace awh {

// Coefficients of the decomposition J_t = t*x + y of the Jacobi matrix of
// {r_n(.;t)}.  Row n of J_t is [eps_n t + phi_n, gamma_n t + delta_n,
// alpha_n t + beta_n].  Relations alpha_n = -AB q^n beta_n and
// phi_n = -CD q^{n-1} eps_n hold by construction.
struct JacobiCoeffs {
  std::vector<double> alpha, beta, gamma, delta, epsilon, phi;
};

// Finite tridiagonal truncation.  upper[i] = J[i][i+1], diag[i] = J[i][i],
// lower[i] = J[i+1][i].  Identities checked to level n_max need size >= n_max+2;
// the last two rows/columns carry truncation edge effects and are excluded
// from residual norms.
struct BandedOperator {
  int size = 0;
  std::vector<double> upper, diag, lower;
};

struct IdentityReport {
  std::string identity;
  int n_max = 0;
  double max_residual = 0.0;
  int argmax_n = -1;
  ProcessParams params;
};

// Martingale polynomial r_n(x;t).  Distinguished parameter is A; for A = 0 the
// family is monic in x (scaled monic Askey-Wilson).  Conjugate-pair (A,B) has
// no real-valued normalization and throws DomainError.
double r_poly(int n, double x, double t, const ProcessParams& p);

JacobiCoeffs jacobi_coeffs(const ProcessParams& p, int n_max);

BandedOperator jacobi_matrix(const JacobiCoeffs& c, double t, int size);

// Max residual of the five displayed coefficient identities equivalent to
// [x,y]_q = I, over n <= n_max.
IdentityReport check_q_commutation(const ProcessParams& p, int n_max);

// Frobenius residual, interior block, of
// J_t^2 = c_ss J_s^2 + c_su J_u J_s + c_uu J_u^2 + c_id I.
IdentityReport check_matrix_identity(const ProcessParams& p, double s, double t,
                                     double u, int n_max);

// Auxiliary family Q_n(y; x, t, s) by its three-step recurrence.
double q_n(int n, double y, double x, double t, double s,
           const ProcessParams& p);

// Connection coefficients b_{n,0..n}(x,s) with
// Q_n(y;x,t,s) = sum_k b_{n,k} p_k(y;t), independent of t.
std::vector<double> connection_coeffs(int n, double x, double s,
                                      const ProcessParams& p);

// Max residual over n <= n_max of the projection identity
// integral p_n(y;t) P_{s,t}(x,dy) = p_n(x;s).
IdentityReport check_projection(const ProcessParams& p, double s, double t,
                                double x, int n_max);

}  // namespace awh
