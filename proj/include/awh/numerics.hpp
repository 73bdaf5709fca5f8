#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "awh/errors.hpp"

namespace awh {

using cplx = std::complex<double>;

// Collapse a complex value that is real up to roundoff. eps is relative to
// max(1, |re|); anything beyond it is a genuine imaginary part and an error.
double realize(cplx z, double eps = 1e-10);

// Product accumulator that renormalizes through frexp once the running value
// leaves [1e-280, 1e280], so long q-Pochhammer products can't overflow.
class ScaledProd {
  public:
    void mul(double f);
    void mul(cplx f);
    bool is_zero() const { return zero_; }
    double value_real() const;  // throws DomainError on overflow
    cplx value() const;
    double log_abs() const;

  private:
    void renorm();
    cplx m_{1.0, 0.0};
    long exp2_ = 0;
    bool zero_ = false;
};

// Adaptive Gauss-Kronrod (G7,K15) on [a,b]. Bisection on the K15 error
// estimate; depth-limited so endpoint roughness can't hang the caller.
struct QuadResult {
    double value;
    double error;
};
QuadResult integrate(const std::function<double(double)>& f, double a, double b,
                     double tol = 1e-12, int max_depth = 22);

// Monotone piecewise-cubic (PCHIP, Fritsch-Carlson tangents). Interpolates
// monotone data monotonically, which the inverse-CDF tables rely on.
class MonotoneCubic {
  public:
    MonotoneCubic() = default;
    MonotoneCubic(std::vector<double> x, std::vector<double> y);
    double operator()(double xq) const;
    double derivative(double xq) const;
    // Solve (*this)(x) = yq for monotone increasing data.
    double invert(double yq) const;
    const std::vector<double>& knots_x() const { return x_; }
    const std::vector<double>& knots_y() const { return y_; }

  private:
    std::vector<double> x_, y_, d_;  // d_ = tangents
    std::size_t find_cell(double xq) const;
};

// splitmix64: seed expander and per-path stream derivation.
std::uint64_t splitmix64(std::uint64_t& state);

// xoshiro256++ with streams split off a master seed by a counter. Two calls
// with the same (seed, stream) yield identical sequences on any platform,
// which is what makes trajectories bit-reproducible.
class Rng {
  public:
    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);
    std::uint64_t next_u64();
    double uniform01();  // in [0,1), 53-bit

  private:
    std::uint64_t s_[4];
};

// FNV-1a, used for config hashes in report headers (stable across runs).
std::uint64_t fnv1a64(const void* data, std::size_t n);
std::uint64_t fnv1a64(const std::string& s);

}  // namespace awh
