#include "awh/simulate.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <memory>
#include <mutex>
#include <numbers>
#include <unordered_map>
#include <vector>

#include "awh/errors.hpp"

namespace awh {
namespace {

constexpr double kPi = std::numbers::pi;

// ---- keyed table cache: hash bucket -> exact-key match, cleared at cap ----

template <class Table, std::size_t N>
class TableCache {
  public:
    template <class Build>
    std::shared_ptr<const Table> get(const std::array<double, N>& key, Build&& build) {
        const std::uint64_t h = fnv1a64(key.data(), sizeof(double) * N);
        {
            std::lock_guard<std::mutex> lock(mu_);
            if (auto it = map_.find(h); it != map_.end())
                for (const auto& t : it->second)
                    if (t->key == key) return t;
        }
        std::shared_ptr<Table> made = build();  // built outside the lock
        made->key = key;
        std::lock_guard<std::mutex> lock(mu_);
        if (map_.size() >= kCap) map_.clear();
        auto& slot = map_[h];
        for (const auto& t : slot)
            if (t->key == key) return t;
        slot.push_back(made);
        return made;
    }

  private:
    static constexpr std::size_t kCap = 256;
    std::mutex mu_;
    std::unordered_map<std::uint64_t, std::vector<std::shared_ptr<const Table>>> map_;
};

std::array<double, 9> measure_key(const AWParams& p) {
    return {p.a.real(), p.a.imag(), p.b.real(), p.b.imag(), p.c.real(),
            p.c.imag(), p.d.real(), p.d.imag(), p.q};
}

// ---- marginal inverse-CDF table (theta space) ----

constexpr int kCdfCells = 2048;

struct CdfTable {
    std::array<double, 9> key;
    MonotoneCubic F;  // theta in [0,pi] -> CDF of the continuous part
};

TableCache<CdfTable, 9> g_cdf_cache;

std::shared_ptr<const CdfTable> cdf_table(const AWMeasure& m) {
    return g_cdf_cache.get(measure_key(m.params), [&m] {
        auto tab = std::make_shared<CdfTable>();
        std::vector<double> th(kCdfCells + 1), F(kCdfCells + 1), fn(kCdfCells + 1);
        for (int j = 0; j <= kCdfCells; ++j) {
            th[j] = kPi * j / kCdfCells;
            fn[j] = density_theta(th[j], m.params, m.K);
        }
        const double h6 = kPi / kCdfCells / 6.0;
        F[0] = 0.0;
        for (int j = 0; j < kCdfCells; ++j) {
            const double fm = density_theta(kPi * (j + 0.5) / kCdfCells, m.params, m.K);
            F[j + 1] = F[j] + h6 * (fn[j] + 4.0 * fm + fn[j + 1]);
        }
        const double total = F.back();
        if (!(total > 0.0))
            throw NonConvergent("sample_measure: continuous mass vanished in quadrature");
        for (double& v : F) v /= total;
        F.back() = 1.0;
        tab->F = MonotoneCubic(std::move(th), std::move(F));
        return tab;
    });
}

// ---- transition-kernel table for the no-atom fast path ----
//
// With a = A sqrt(t), b = B sqrt(t), c = m e^{i th_x}, d = m e^{-i th_x},
// m = sqrt(s/t), the kernel theta-density factors as
//   base(th) / ( ghat(cos(th+th_x)) ghat(cos(th-th_x)) ),
// base carrying the (e^{2i th};q)_inf and a,b factors and
// ghat(c) = prod_j (1 - 2 m q^j c + m^2 q^{2j}).  base and ghat depend only
// on (params, s, t), so one table serves every step of a Monte Carlo run.

constexpr int kKernelCells = 1024;
constexpr int kKernelNodes = 2 * kKernelCells + 1;
constexpr int kGhatNodes = 1025;

// PCHIP on a uniform grid; plain arrays keep the per-sample loop branch-light.
struct UniformPchip {
    double lo = 0.0, h = 1.0;
    std::vector<double> y, d;

    double operator()(double c) const {
        const int n = static_cast<int>(y.size());
        double s = (c - lo) / h;
        int i = static_cast<int>(s);
        if (i < 0) i = 0;
        if (i > n - 2) i = n - 2;
        const double t = s - i;
        const double t2 = t * t, t3 = t2 * t;
        return (2 * t3 - 3 * t2 + 1) * y[i] + (t3 - 2 * t2 + t) * h * d[i] +
               (-2 * t3 + 3 * t2) * y[i + 1] + (t3 - t2) * h * d[i + 1];
    }
};

UniformPchip make_pchip(double lo, double h, std::vector<double> vals) {
    const int n = static_cast<int>(vals.size());
    std::vector<double> del(n - 1), d(n);
    for (int i = 0; i + 1 < n; ++i) del[i] = (vals[i + 1] - vals[i]) / h;
    for (int i = 1; i + 1 < n; ++i)
        d[i] = (del[i - 1] * del[i] <= 0.0)
                   ? 0.0
                   : 2.0 / (1.0 / del[i - 1] + 1.0 / del[i]);
    auto end_tangent = [](double d0, double d1) {
        double t = 1.5 * d0 - 0.5 * d1;
        if (t * d0 <= 0.0)
            t = 0.0;
        else if (d0 * d1 <= 0.0 && std::abs(t) > 3.0 * std::abs(d0))
            t = 3.0 * d0;
        return t;
    };
    d[0] = end_tangent(del[0], del[1]);
    d[n - 1] = end_tangent(del[n - 2], del[n - 3]);
    return {lo, h, std::move(vals), std::move(d)};
}

struct KernelTable {
    std::array<double, 11> key;
    std::vector<double> base;
    UniformPchip ghat;
};

TableCache<KernelTable, 11> g_kernel_cache;

std::shared_ptr<const KernelTable> kernel_table(const ProcessParams& p, double s,
                                                double t) {
    const std::array<double, 11> key = {p.A.real(), p.A.imag(), p.B.real(),
                                        p.B.imag(), p.C.real(), p.C.imag(),
                                        p.D.real(), p.D.imag(), p.q, s, t};
    return g_kernel_cache.get(key, [&p, s, t] {
        auto tab = std::make_shared<KernelTable>();
        const double rt = std::sqrt(t);
        const AWParams pab = aw_params(p.A * rt, p.B * rt, 0.0, 0.0, p.q);
        tab->base.resize(kKernelNodes);
        for (int j = 0; j < kKernelNodes; ++j)
            tab->base[j] = density_theta(kPi * j / (kKernelNodes - 1), pab, 1.0);
        const double m = std::sqrt(s / t);
        std::vector<double> g(kGhatNodes);
        const double h = 2.0 / (kGhatNodes - 1);
        for (int i = 0; i < kGhatNodes; ++i) {
            const double c = -1.0 + h * i;
            double prod = 1.0;
            for (double mq = m; std::abs(mq) > 1e-15; mq *= p.q)
                prod *= 1.0 - 2.0 * mq * c + mq * mq;
            g[i] = prod;
        }
        tab->ghat = make_pchip(-1.0, h, std::move(g));
        return tab;
    });
}

bool fast_path_ok(const ProcessParams& p, double t, double x) {
    const double rt = std::sqrt(t);
    return std::abs(x) <= 1.0 && std::abs(p.A) * rt < 1.0 - 1e-9 &&
           std::abs(p.B) * rt < 1.0 - 1e-9;
}

double kernel_draw(const KernelTable& tab, double x, Rng& rng) {
    const double thx = std::acos(std::clamp(x, -1.0, 1.0));
    static thread_local std::vector<double> f, F;
    f.resize(kKernelNodes);
    F.resize(kKernelCells + 1);
    for (int j = 0; j < kKernelNodes; ++j) {
        const double th = kPi * j / (kKernelNodes - 1);
        const double g1 = tab.ghat(std::cos(th + thx));
        const double g2 = tab.ghat(std::cos(th - thx));
        f[j] = tab.base[j] / (g1 * g2);
    }
    const double h = kPi / kKernelCells, h6 = h / 6.0;
    F[0] = 0.0;
    for (int i = 0; i < kKernelCells; ++i)
        F[i + 1] = F[i] + h6 * (f[2 * i] + 4.0 * f[2 * i + 1] + f[2 * i + 2]);
    const double total = F[kKernelCells];
    if (!(total > 0.0))
        throw NonConvergent("sample_path: transition density vanished in quadrature");
    const double target = rng.uniform01() * total;
    int i = static_cast<int>(std::upper_bound(F.begin(), F.end(), target) -
                             F.begin()) - 1;
    i = std::clamp(i, 0, kKernelCells - 1);
    // invert the cumulative of Simpson's parabola through (f0, f1, f2)
    const double f0 = f[2 * i], f1 = f[2 * i + 1], f2 = f[2 * i + 2];
    const double tau = target - F[i];
    const double Fc = F[i + 1] - F[i];
    double xi = (Fc > 0.0) ? std::clamp(tau / Fc, 0.0, 1.0) : 0.5;
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 50; ++it) {
        const double xi2 = xi * xi, xi3 = xi2 * xi;
        const double cum = h * (f0 * (xi - 1.5 * xi2 + (2.0 / 3.0) * xi3) +
                                f1 * (2.0 * xi2 - (4.0 / 3.0) * xi3) +
                                f2 * ((2.0 / 3.0) * xi3 - 0.5 * xi2));
        const double g = cum - tau;
        if (g > 0.0)
            hi = xi;
        else
            lo = xi;
        const double den = h * (f0 * (1.0 - 3.0 * xi + 2.0 * xi2) +
                                f1 * (4.0 * xi - 4.0 * xi2) +
                                f2 * (2.0 * xi2 - xi));
        double cand = (den > 0.0) ? xi - g / den : 0.5 * (lo + hi);
        if (!(cand > lo && cand < hi)) cand = 0.5 * (lo + hi);
        if (std::abs(cand - xi) < 1e-14) {
            xi = cand;
            break;
        }
        xi = cand;
    }
    return std::cos((i + xi) * h);
}

double step_transition(const ProcessParams& p, double s, double t, double y,
                       Rng& rng) {
    if (fast_path_ok(p, t, y)) return kernel_draw(*kernel_table(p, s, t), y, rng);
    return sample_measure(transition(p, s, t, y), rng);
}

}  // namespace

double sample_measure(const AWMeasure& m, Rng& rng) {
    if (!m.has_continuous && m.atoms.empty())
        throw DomainError("sample_measure: measure has neither atoms nor density");
    double atom_mass = 0.0;
    for (const Atom& a : m.atoms) atom_mass += a.mass;
    const double u = rng.uniform01();
    if (u < atom_mass || !m.has_continuous) {
        double acc = 0.0;
        for (const Atom& a : m.atoms) {
            acc += a.mass;
            if (u < acc) return a.x;
        }
        return m.atoms.back().x;  // mass-sum roundoff
    }
    double w = (u - atom_mass) / (1.0 - atom_mass);
    w = std::clamp(w, 0.0, 1.0);
    return std::cos(cdf_table(m)->F.invert(w));
}

double continuous_cdf(const AWMeasure& m, double y) {
    if (!m.has_continuous)
        throw DomainError("continuous_cdf: measure has no continuous part");
    if (y <= -1.0) return 0.0;
    if (y >= 1.0) return 1.0;
    return 1.0 - cdf_table(m)->F(std::acos(y));
}

double continuous_quantile(const AWMeasure& m, double u) {
    if (!m.has_continuous)
        throw DomainError("continuous_quantile: measure has no continuous part");
    if (!(u >= 0.0 && u <= 1.0))
        throw DomainError("continuous_quantile: u outside [0,1]");
    return std::cos(cdf_table(m)->F.invert(1.0 - u));
}

Trajectory sample_path(const ProcessParams& p, const std::vector<double>& grid,
                       std::uint64_t seed, std::uint64_t stream) {
    if (grid.empty()) throw DomainError("sample_path: empty time grid");
    const TimeDomain td = time_domains(p);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!td.I.contains(grid[i]))
            throw DomainError("sample_path: grid time outside the open interval I");
        if (i > 0 && !(grid[i] > grid[i - 1]))
            throw DomainError("sample_path: grid must be strictly increasing");
    }
    Rng rng(seed, stream);
    Trajectory tr;
    tr.times = grid;
    tr.values.resize(grid.size());
    tr.seed = seed;
    tr.stream = stream;
    tr.values[0] = sample_measure(marginal(p, grid[0]), rng);
    for (std::size_t i = 1; i < grid.size(); ++i)
        tr.values[i] = step_transition(p, grid[i - 1], grid[i], tr.values[i - 1], rng);
    return tr;
}

McConditional mc_conditional(const ProcessParams& p, double s, double t, double u,
                             long n_paths, std::uint64_t seed) {
    const TimeDomain td = time_domains(p);
    if (!(s <= t && t <= u && s < u))
        throw DomainError("mc_conditional: need s <= t <= u with s < u");
    if (!td.J.contains(s) || !td.J.contains(t) || !td.J.contains(u))
        throw DomainError("mc_conditional: times must lie inside J");
    if (n_paths < 10000)
        throw InsufficientPaths("mc_conditional: need at least 10000 paths");

    const double ts = mobius_T(p, s), tt = mobius_T(p, t), tu = mobius_T(p, u);
    const AWMeasure marg = marginal(p, ts);
    const HarnessParams hp = harness_params(p);

    const std::size_t n = static_cast<std::size_t>(n_paths);
    std::vector<double> xs(n), xt(n), xu(n);
    for (std::size_t i = 0; i < n; ++i) {
        Rng rng(seed, static_cast<std::uint64_t>(i));
        const double ys = sample_measure(marg, rng);
        const double yt = (tt > ts) ? step_transition(p, ts, tt, ys, rng) : ys;
        const double yu = (tu > tt) ? step_transition(p, tt, tu, yt, rng) : yt;
        xs[i] = x_from_z(p, s, z_from_y(p, ts, ys));
        xt[i] = x_from_z(p, t, z_from_y(p, tt, yt));
        xu[i] = x_from_z(p, u, z_from_y(p, tu, yu));
    }

    McConditional out;
    out.n_paths = n_paths;
    out.target_s = (u - t) / (u - s);
    out.target_u = (t - s) / (u - s);

    // no-intercept least squares of X_t on (X_s, X_u), HC0 errors
    double mss = 0, msu = 0, muu = 0, vs = 0, vu = 0;
    for (std::size_t i = 0; i < n; ++i) {
        mss += xs[i] * xs[i];
        msu += xs[i] * xu[i];
        muu += xu[i] * xu[i];
        vs += xs[i] * xt[i];
        vu += xu[i] * xt[i];
    }
    const double det = mss * muu - msu * msu;
    if (!(std::abs(det) > 1e-12 * (1.0 + mss * muu)))
        throw Singular("mc_conditional: regression design is singular");
    out.coef_s = (muu * vs - msu * vu) / det;
    out.coef_u = (mss * vu - msu * vs) / det;
    double s11 = 0, s12 = 0, s22 = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double e = xt[i] - out.coef_s * xs[i] - out.coef_u * xu[i];
        s11 += e * e * xs[i] * xs[i];
        s12 += e * e * xs[i] * xu[i];
        s22 += e * e * xu[i] * xu[i];
    }
    out.se_s = std::sqrt(std::max(
        muu * muu * s11 - 2.0 * muu * msu * s12 + msu * msu * s22, 0.0)) / det;
    out.se_u = std::sqrt(std::max(
        mss * mss * s22 - 2.0 * mss * msu * s12 + msu * msu * s11, 0.0)) / det;

    // Cov(X_s, X_t) against min(s,t)
    double xbs = 0, xbt = 0;
    for (std::size_t i = 0; i < n; ++i) {
        xbs += xs[i];
        xbt += xt[i];
    }
    xbs /= n;
    xbt /= n;
    double c1 = 0, c2 = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double c = (xs[i] - xbs) * (xt[i] - xbt);
        c1 += c;
        c2 += c * c;
    }
    out.cov_st = c1 / n;
    out.cov_se = std::sqrt(std::max(c2 / n - out.cov_st * out.cov_st, 0.0) / n);
    out.cov_target = std::min(s, t);

    // decile x decile cells of (X_s, X_u); >= 50 paths per kept cell
    auto edges_of = [&](const std::vector<double>& v) {
        std::vector<double> sorted(v);
        std::sort(sorted.begin(), sorted.end());
        std::vector<double> e(9);
        for (int k = 1; k <= 9; ++k) e[k - 1] = sorted[(n * k) / 10];
        return e;
    };
    const std::vector<double> es = edges_of(xs), eu = edges_of(xu);
    auto bin_of = [](const std::vector<double>& e, double v) {
        return static_cast<int>(std::upper_bound(e.begin(), e.end(), v) - e.begin());
    };
    std::vector<std::vector<std::uint32_t>> members(100);
    for (std::size_t i = 0; i < n; ++i)
        members[10 * bin_of(es, xs[i]) + bin_of(eu, xu[i])].push_back(
            static_cast<std::uint32_t>(i));

    const double fden = u * (1.0 + hp.sigma * s) + hp.tau - hp.gamma * s;
    if (!(std::abs(fden) > 1e-14))
        throw Singular("mc_conditional: conditional-variance scale degenerates");
    const double F = (u - t) * (t - s) / fden;

    std::vector<double> wls_w, wls_y, wls_r1, wls_r2;
    for (const auto& idx : members) {
        if (idx.size() < 50) continue;
        const double nc = static_cast<double>(idx.size());
        double g1m = 0, g2m = 0, rm = 0;
        std::vector<double> g1(idx.size()), g2(idx.size()), r(idx.size());
        for (std::size_t j = 0; j < idx.size(); ++j) {
            const std::size_t i = idx[j];
            g1[j] = (u * xs[i] - s * xu[i]) / (u - s);
            g2[j] = (xu[i] - xs[i]) / (u - s);
            r[j] = xt[i] - out.target_s * xs[i] - out.target_u * xu[i];
            g1m += g1[j];
            g2m += g2[j];
            rm += r[j];
        }
        g1m /= nc;
        g2m /= nc;
        rm /= nc;
        double v11 = 0, v22 = 0, v12 = 0, vr = 0, m4 = 0;
        for (std::size_t j = 0; j < idx.size(); ++j) {
            const double a = g1[j] - g1m, b = g2[j] - g2m, e = r[j] - rm;
            v11 += a * a;
            v22 += b * b;
            v12 += a * b;
            vr += e * e;
            m4 += e * e * e * e;
        }
        v11 /= nc;
        v22 /= nc;
        v12 /= nc;
        vr /= nc;
        m4 /= nc;
        McCell cell;
        cell.g1 = g1m;
        cell.g2 = g2m;
        cell.count = static_cast<long>(idx.size());
        cell.var_hat = vr;
        cell.var_se = std::sqrt(std::max(m4 - vr * vr, 0.0) / nc);
        const double corr2 = 1.0 + hp.theta * g2m + hp.tau * (g2m * g2m + v22) -
                             (1.0 - hp.gamma) * (g1m * g2m + v12);
        cell.var_target =
            F * (corr2 + hp.eta * g1m + hp.sigma * (g1m * g1m + v11));
        out.cells.push_back(cell);
        if (F != 0.0 && cell.var_se > 0.0) {
            wls_w.push_back((F / cell.var_se) * (F / cell.var_se));
            wls_y.push_back(vr / F - corr2);
            wls_r1.push_back(g1m);
            wls_r2.push_back(g1m * g1m + v11);
        }
    }

    if (F != 0.0) {
        if (wls_w.size() < 3)
            throw Singular("mc_conditional: too few populated cells for the variance fit");
        double a11 = 0, a12 = 0, a22 = 0, b1 = 0, b2 = 0;
        for (std::size_t c = 0; c < wls_w.size(); ++c) {
            a11 += wls_w[c] * wls_r1[c] * wls_r1[c];
            a12 += wls_w[c] * wls_r1[c] * wls_r2[c];
            a22 += wls_w[c] * wls_r2[c] * wls_r2[c];
            b1 += wls_w[c] * wls_r1[c] * wls_y[c];
            b2 += wls_w[c] * wls_r2[c] * wls_y[c];
        }
        const double d2 = a11 * a22 - a12 * a12;
        if (!(d2 > 0.0))
            throw Singular("mc_conditional: conditional-variance fit is singular");
        out.eta_hat = (a22 * b1 - a12 * b2) / d2;
        out.sigma_hat = (a11 * b2 - a12 * b1) / d2;
        out.eta_se = std::sqrt(a22 / d2);
        out.sigma_se = std::sqrt(a11 / d2);
    }
    return out;
}

// ---- purely discrete process ----

DiscreteProcessSpec discrete_spec(double A, double B, double C, double q, int N) {
    if (!(q > 0.0 && q < 1.0))
        throw HypothesisViolated("discrete_spec: need 0 < q < 1");
    if (N < 0) throw HypothesisViolated("discrete_spec: need N >= 0");
    if (!(A > 0.0)) throw HypothesisViolated("discrete_spec: need A > 0");
    if (!(B > A)) throw HypothesisViolated("discrete_spec: need 0 < A < B");
    if (!(C > 0.0)) throw HypothesisViolated("discrete_spec: need C > 0");
    const double D = 1.0 / (A * std::pow(q, N));
    if (!(C < D))
        throw HypothesisViolated("discrete_spec: need C < D = 1/(A q^N)");
    if (!(A * B * C * D < 1.0))
        throw HypothesisViolated("discrete_spec: need ABCD < 1");
    DiscreteProcessSpec sp;
    sp.A = A;
    sp.B = B;
    sp.C = C;
    sp.q = q;
    sp.N = N;
    sp.D = D;
    return sp;
}

DiscreteProcess::DiscreteProcess(const DiscreteProcessSpec& spec)
    : sp_(discrete_spec(spec.A, spec.B, spec.C, spec.q, spec.N)) {}

Interval DiscreteProcess::domain() const {
    return {sp_.C * sp_.D, 1.0 / (sp_.A * sp_.B)};
}

void DiscreteProcess::check_time(double t, const char* who) const {
    if (!domain().contains(t))
        throw DomainError(std::string(who) + ": time outside the open interval I");
}

double DiscreteProcess::y_k(double t, int k) const {
    check_time(t, "y_k");
    if (k < 0 || k > sp_.N) throw DomainError("y_k: curve index outside 0..N");
    const double g = sp_.A * std::sqrt(t) * std::pow(sp_.q, k);
    return 0.5 * (g + 1.0 / g);
}

double DiscreteProcess::marginal_k(double t, int k) const {
    check_time(t, "marginal_k");
    if (k < 0 || k > sp_.N) throw DomainError("marginal_k: index outside 0..N");
    const double rt = std::sqrt(t);
    return discrete_pmf(k, sp_.N, sp_.A * rt, sp_.B * rt, sp_.C / rt, sp_.q);
}

double DiscreteProcess::transition_jk(double s, double t, int j, int k) const {
    check_time(s, "transition_jk");
    check_time(t, "transition_jk");
    if (!(s < t)) throw DomainError("transition_jk: need s < t");
    if (k < 0 || k > sp_.N || j < 0 || j > sp_.N)
        throw DomainError("transition_jk: index outside 0..N");
    if (j > k) return 0.0;
    const double rt = std::sqrt(t);
    return discrete_pmf(j, k, sp_.A * rt, sp_.B * rt,
                        std::pow(sp_.q, k) * sp_.A * s / rt, sp_.q);
}

double DiscreteProcess::bicond(int i, int j, int k, double s, double t,
                               double u) const {
    check_time(s, "bicond");
    check_time(t, "bicond");
    check_time(u, "bicond");
    if (!(s < t && t < u)) throw DomainError("bicond: need s < t < u");
    if (i < 0 || i > sp_.N || j < 0 || j > sp_.N || k < 0 || k > sp_.N)
        throw DomainError("bicond: index outside 0..N");
    if (i > k)
        throw DomainError("bicond: conditioning event has probability zero (i > k)");
    if (j < i || j > k) return 0.0;
    const double rt = std::sqrt(t);
    const double qi = std::pow(sp_.q, i);
    return discrete_pmf(j - i, k - i, qi * sp_.A * rt, rt / (qi * sp_.A * u),
                        std::pow(sp_.q, k) * sp_.A * s / rt, sp_.q);
}

Trajectory DiscreteProcess::sample_path(const std::vector<double>& grid,
                                        std::uint64_t seed,
                                        std::uint64_t stream) const {
    if (grid.empty()) throw DomainError("sample_path: empty time grid");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        check_time(grid[i], "sample_path");
        if (i > 0 && !(grid[i] > grid[i - 1]))
            throw DomainError("sample_path: grid must be strictly increasing");
    }
    Rng rng(seed, stream);
    auto draw = [&rng](const std::vector<double>& pmf) {
        const double u = rng.uniform01();
        double acc = 0.0;
        for (std::size_t k = 0; k < pmf.size(); ++k) {
            acc += pmf[k];
            if (u < acc) return static_cast<int>(k);
        }
        return static_cast<int>(pmf.size()) - 1;
    };
    Trajectory tr;
    tr.times = grid;
    tr.values.resize(grid.size());
    tr.seed = seed;
    tr.stream = stream;
    std::vector<double> pmf(sp_.N + 1);
    for (int k = 0; k <= sp_.N; ++k) pmf[k] = marginal_k(grid[0], k);
    int cur = draw(pmf);
    tr.values[0] = y_k(grid[0], cur);
    for (std::size_t i = 1; i < grid.size(); ++i) {
        pmf.assign(cur + 1, 0.0);
        for (int j = 0; j <= cur; ++j)
            pmf[j] = transition_jk(grid[i - 1], grid[i], j, cur);
        cur = draw(pmf);
        tr.values[i] = y_k(grid[i], cur);
    }
    return tr;
}

// ---- bridge endpoint laws ----

namespace {

// two-valued endpoint law from the roots of the monic w_2 at the endpoint
BridgeLaw two_point_law(const ProcessParams& p, double te) {
    const double rte = std::sqrt(te);
    const AWParams ap =
        aw_params(p.A * rte, p.B * rte, p.C / rte, p.D / rte, p.q);
    const double s0 = monic_s(0, ap), s1 = monic_s(1, ap), u1 = monic_u(1, ap);
    const double bq = s0 + s1, cq = s0 * s1 - u1;
    const double disc = bq * bq - 4.0 * cq;
    if (!(disc >= 0.0))
        throw Singular("bridge_endpoints: endpoint support roots are complex");
    const double rd = std::sqrt(disc);
    const double r1 = 0.5 * (-bq - rd), r2 = 0.5 * (-bq + rd);
    const double mu = e_y(p, te);
    double p1 = (rd > 0.0) ? (r2 - mu) / rd : 1.0;
    p1 = std::clamp(p1, 0.0, 1.0);
    BridgeLaw law;
    law.atoms = {{z_from_y(p, te, r1), p1}, {z_from_y(p, te, r2), 1.0 - p1}};
    return law;
}

// one family of the purely discrete Z_0 law: atoms q^k Cf / sqrt(1-q), masses
//   (A Df, B Df; q)_inf (A Cf, B Cf; q)_k q^k
//   -----------------------------------------------
//   (Df/Cf, ABCD; q)_inf (q, q Cf/Df; q)_k
std::vector<Atom> bridge_family(const ProcessParams& p, double Cf, double Df,
                                double srq) {
    const double q = p.q;
    const double abcd = realize(p.A * p.B * p.C * p.D);
    const double f =
        realize(qpoch_infinite(p.A * Df, q) * qpoch_infinite(p.B * Df, q)) /
        (qpoch_infinite(Df / Cf, q) * qpoch_infinite(abcd, q));
    std::vector<Atom> out;
    double num = 1.0, den = 1.0, qk = 1.0;
    for (int k = 0; k <= 2000; ++k) {
        const double mass = f * num * qk / den;
        if (k > 0 && !(std::abs(mass) > 1e-18)) break;
        out.push_back({qk * Cf / srq, mass});
        const double qkp = std::pow(q, k);
        num *= realize((1.0 - p.A * qkp * Cf) * (1.0 - p.B * qkp * Cf));
        den *= (1.0 - qkp * q) * (1.0 - qkp * q * Cf / Df);
        qk *= q;
    }
    return out;
}

}  // namespace

BridgeEndpoints bridge_endpoints(const ProcessParams& p) {
    const double ab = realize(p.A * p.B);
    const double cd = realize(p.C * p.D);
    if (ab == 0.0)
        throw DomainError(
            "bridge_endpoints: need AB != 0 so the right endpoint is finite");
    const double srq = std::sqrt(1.0 - p.q);
    BridgeEndpoints out;
    if (ab > 0.0) {
        out.right_time = 1.0 / ab;
        out.right.deterministic = true;
        out.right.value = realize(1.0 / p.A + 1.0 / p.B) / srq;
    } else if (p.q < 0.0) {
        out.right_time = 1.0 / (p.q * ab);
        out.right = two_point_law(p, out.right_time);
    } else {
        throw DomainError(
            "bridge_endpoints: AB < 0 with q >= 0 puts the right endpoint at "
            "infinity");
    }
    if (cd >= 0.0) {
        out.left_time = cd;
        out.left.deterministic = true;
        out.left.value = realize(p.C + p.D) / srq;
    } else if (p.q >= 0.0) {
        // purely discrete Z_0; for q = 0 each family ends at its k = 0 atom
        out.left_time = 0.0;
        const double C = realize(p.C), D = realize(p.D);
        out.left.atoms = bridge_family(p, C, D, srq);
        const std::vector<Atom> fam_d = bridge_family(p, D, C, srq);
        out.left.atoms.insert(out.left.atoms.end(), fam_d.begin(), fam_d.end());
    } else {
        out.left_time = p.q * cd;
        out.left = two_point_law(p, out.left_time);
    }
    return out;
}

}  // namespace awh
