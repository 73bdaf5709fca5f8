#include "awh/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace awh {

double realize(cplx z, double eps) {
    const double scale = std::max(1.0, std::abs(z.real()));
    if (std::abs(z.imag()) > eps * scale) {
        throw Singular("realize: imaginary part " + std::to_string(z.imag()) +
                       " exceeds tolerance");
    }
    return z.real();
}

void ScaledProd::renorm() {
    const double mag = std::abs(m_);
    if (mag == 0.0) {
        zero_ = true;
        m_ = {0.0, 0.0};
        exp2_ = 0;
        return;
    }
    if (mag > 1e280 || mag < 1e-280) {
        int e = 0;
        std::frexp(mag, &e);
        m_ = {std::ldexp(m_.real(), -e), std::ldexp(m_.imag(), -e)};
        exp2_ += e;
    }
}

void ScaledProd::mul(double f) {
    if (zero_) return;
    m_ *= f;
    renorm();
}

void ScaledProd::mul(cplx f) {
    if (zero_) return;
    m_ *= f;
    renorm();
}

cplx ScaledProd::value() const {
    if (zero_) return {0.0, 0.0};
    const double l2 = std::log2(std::abs(m_)) + static_cast<double>(exp2_);
    if (l2 > 1020.0) throw DomainError("ScaledProd: overflow on readout");
    if (l2 < -1070.0) return {0.0, 0.0};  // true underflow collapses to zero
    // scale in two halves so the intermediate can't overflow either
    const int e1 = static_cast<int>(exp2_ / 2);
    const int e2 = static_cast<int>(exp2_ - e1);
    return (m_ * std::ldexp(1.0, e1)) * std::ldexp(1.0, e2);
}

double ScaledProd::value_real() const { return realize(value()); }

double ScaledProd::log_abs() const {
    if (zero_) return -std::numeric_limits<double>::infinity();
    return std::log(std::abs(m_)) + static_cast<double>(exp2_) * std::log(2.0);
}

namespace {

// Gauss-Kronrod 7-15 nodes/weights on [-1,1] (symmetric; nonnegative abscissae).
constexpr double kXgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr double kWgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double kWg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

QuadResult gk15(const std::function<double(double)>& f, double a, double b) {
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    const double fc = f(c);
    double resg = fc * kWg[3];
    double resk = fc * kWgk[7];
    for (int j = 0; j < 7; ++j) {
        const double x = h * kXgk[j];
        const double f1 = f(c - x), f2 = f(c + x);
        resk += kWgk[j] * (f1 + f2);
        if (j % 2 == 1) resg += kWg[j / 2] * (f1 + f2);
    }
    return {resk * h, std::abs((resk - resg) * h)};
}

void adapt(const std::function<double(double)>& f, double a, double b,
           double tol, int depth, double& acc, double& err) {
    QuadResult r = gk15(f, a, b);
    if (depth <= 0 || r.error <= tol) {
        acc += r.value;
        err += r.error;
        return;
    }
    const double m = 0.5 * (a + b);
    adapt(f, a, m, tol * 0.5, depth - 1, acc, err);
    adapt(f, m, b, tol * 0.5, depth - 1, acc, err);
}

}  // namespace

QuadResult integrate(const std::function<double(double)>& f, double a, double b,
                     double tol, int max_depth) {
    double acc = 0.0, err = 0.0;
    adapt(f, a, b, tol, max_depth, acc, err);
    return {acc, err};
}

MonotoneCubic::MonotoneCubic(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)) {
    const std::size_t n = x_.size();
    if (n < 2 || y_.size() != n) throw DomainError("MonotoneCubic: bad knots");
    d_.assign(n, 0.0);
    std::vector<double> h(n - 1), del(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        h[i] = x_[i + 1] - x_[i];
        if (h[i] <= 0) throw DomainError("MonotoneCubic: knots not increasing");
        del[i] = (y_[i + 1] - y_[i]) / h[i];
    }
    // Fritsch-Carlson: harmonic-mean interior tangents, one-sided at the ends,
    // clamped to zero across sign changes so monotone data stays monotone.
    d_[0] = del[0];
    d_[n - 1] = del[n - 2];
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (del[i - 1] * del[i] <= 0.0) {
            d_[i] = 0.0;
        } else {
            const double w1 = 2.0 * h[i] + h[i - 1];
            const double w2 = h[i] + 2.0 * h[i - 1];
            d_[i] = (w1 + w2) / (w1 / del[i - 1] + w2 / del[i]);
        }
    }
    if (n > 2) {
        // shape-preserving end tangents
        auto end_tangent = [](double h0, double h1, double d0, double d1) {
            double t = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
            if (t * d0 <= 0.0)
                t = 0.0;
            else if (d0 * d1 <= 0.0 && std::abs(t) > 3.0 * std::abs(d0))
                t = 3.0 * d0;
            return t;
        };
        d_[0] = end_tangent(h[0], h[1], del[0], del[1]);
        d_[n - 1] = end_tangent(h[n - 2], h[n - 3], del[n - 2], del[n - 3]);
    }
}

std::size_t MonotoneCubic::find_cell(double xq) const {
    auto it = std::upper_bound(x_.begin(), x_.end(), xq);
    if (it == x_.begin()) return 0;
    std::size_t i = static_cast<std::size_t>(it - x_.begin()) - 1;
    return std::min(i, x_.size() - 2);
}

double MonotoneCubic::operator()(double xq) const {
    const std::size_t i = find_cell(xq);
    const double h = x_[i + 1] - x_[i];
    const double t = (xq - x_[i]) / h;
    const double t2 = t * t, t3 = t2 * t;
    const double h00 = 2 * t3 - 3 * t2 + 1, h10 = t3 - 2 * t2 + t;
    const double h01 = -2 * t3 + 3 * t2, h11 = t3 - t2;
    return h00 * y_[i] + h10 * h * d_[i] + h01 * y_[i + 1] + h11 * h * d_[i + 1];
}

double MonotoneCubic::derivative(double xq) const {
    const std::size_t i = find_cell(xq);
    const double h = x_[i + 1] - x_[i];
    const double t = (xq - x_[i]) / h;
    const double t2 = t * t;
    const double dh00 = (6 * t2 - 6 * t) / h, dh10 = (3 * t2 - 4 * t + 1);
    const double dh01 = (-6 * t2 + 6 * t) / h, dh11 = (3 * t2 - 2 * t);
    return dh00 * y_[i] + dh10 * d_[i] + dh01 * y_[i + 1] + dh11 * d_[i + 1];
}

double MonotoneCubic::invert(double yq) const {
    // bracket by knot values, then safeguarded Newton inside the cell
    auto it = std::upper_bound(y_.begin(), y_.end(), yq);
    if (it == y_.begin()) return x_.front();
    if (it == y_.end()) return x_.back();
    std::size_t i = static_cast<std::size_t>(it - y_.begin()) - 1;
    i = std::min(i, y_.size() - 2);
    double lo = x_[i], hi = x_[i + 1];
    double xq = lo + (hi - lo) * (yq - y_[i]) /
                         std::max(y_[i + 1] - y_[i],
                                  std::numeric_limits<double>::min());
    for (int iter = 0; iter < 60; ++iter) {
        const double fv = (*this)(xq)-yq;
        if (fv > 0)
            hi = xq;
        else
            lo = xq;
        const double dv = derivative(xq);
        double step = (dv != 0.0) ? fv / dv : 0.0;
        double cand = xq - step;
        if (!(cand > lo && cand < hi)) cand = 0.5 * (lo + hi);
        if (std::abs(cand - xq) < 1e-15 * (1.0 + std::abs(xq))) return cand;
        xq = cand;
    }
    return xq;
}

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

namespace {
inline std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
}
}  // namespace

Rng::Rng(std::uint64_t seed, std::uint64_t stream) {
    // Counter-based split: fold the stream id into the seed through one
    // splitmix64 round before expanding the state, so streams are independent.
    std::uint64_t st = seed;
    std::uint64_t mix = splitmix64(st) ^ (stream * 0xD2B74407B1CE6E93ULL);
    std::uint64_t st2 = mix;
    for (auto& w : s_) w = splitmix64(st2);
}

std::uint64_t Rng::next_u64() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

double Rng::uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::uint64_t fnv1a64(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 0x100000001B3ULL;
    }
    return h;
}

std::uint64_t fnv1a64(const std::string& s) { return fnv1a64(s.data(), s.size()); }

}  // namespace awh
