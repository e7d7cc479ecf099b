#include "oscv/functionals.hpp"

#include <algorithm>
#include <cmath>

namespace oscv {

double roughness(const Kernel& g, const QuadratureConfig& cfg) {
    cfg.validate();
    return integrate([&g](double u) { const double v = g(u); return v * v; },
                     g.lo(), g.hi(), cfg.abs_tol, cfg.rel_tol);
}

double second_moment(const Kernel& g, const QuadratureConfig& cfg) {
    cfg.validate();
    return integrate([&g](double u) { return u * u * g(u); }, g.lo(), g.hi(),
                     cfg.abs_tol, cfg.rel_tol);
}

double partial_mass(const Kernel& g, double z, const QuadratureConfig& cfg) {
    cfg.validate();
    if (z <= g.lo()) return 0.0;
    return integrate([&g](double u) { return g(u); }, g.lo(), std::min(z, g.hi()),
                     cfg.abs_tol, cfg.rel_tol);
}

double partial_first_moment(const Kernel& g, double z, const QuadratureConfig& cfg) {
    cfg.validate();
    if (z <= g.lo()) return 0.0;
    return integrate([&g](double u) { return u * g(u); }, g.lo(), std::min(z, g.hi()),
                     cfg.abs_tol, cfg.rel_tol);
}

KernelProfile::KernelProfile(const Kernel& g, const QuadratureConfig& cfg, int n_points) {
    cfg.validate();
    if (n_points < 8) throw InvalidParam("KernelProfile: grid too small");
    lo_ = g.lo();
    hi_ = g.hi();
    step_ = (hi_ - lo_) / (n_points - 1);
    d_.resize(n_points);
    g_.resize(n_points);
    d_slope_.resize(n_points);
    g_slope_.resize(n_points);

    // Segment tolerances a notch below the global budget so the cumulative
    // sums stay within cfg.abs_tol overall.
    const double seg_tol = cfg.abs_tol / n_points * 8.0;
    d_[0] = 0.0;
    g_[0] = 0.0;
    for (int i = 1; i < n_points; ++i) {
        const double a = lo_ + (i - 1) * step_;
        const double b = lo_ + i * step_;
        d_[i] = d_[i - 1] +
                integrate([&g](double u) { return g(u); }, a, b, seg_tol, cfg.rel_tol, 100);
        g_[i] = g_[i - 1] +
                integrate([&g](double u) { return u * g(u); }, a, b, seg_tol, cfg.rel_tol, 100);
    }
    for (int i = 0; i < n_points; ++i) {
        const double z = lo_ + i * step_;
        const double gv = g(z);
        d_slope_[i] = gv;
        g_slope_[i] = z * gv;
    }
}

double KernelProfile::interpolate(const std::vector<double>& y,
                                  const std::vector<double>& s, double z) const {
    const int n = static_cast<int>(y.size());
    int i = static_cast<int>((z - lo_) / step_);
    i = std::clamp(i, 0, n - 2);
    const double t = (z - (lo_ + i * step_)) / step_;
    const double y0 = y[i], y1 = y[i + 1];
    const double d0 = s[i] * step_, d1 = s[i + 1] * step_;
    const double t2 = t * t, t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + t) * d0 +
           (-2 * t3 + 3 * t2) * y1 + (t3 - t2) * d1;
}

double KernelProfile::mass_below(double z) const {
    if (z <= lo_) return 0.0;
    if (z >= hi_) return d_.back();
    return interpolate(d_, d_slope_, z);
}

double KernelProfile::first_moment_below(double z) const {
    if (z <= lo_) return 0.0;
    if (z >= hi_) return g_.back();
    return interpolate(g_, g_slope_, z);
}

namespace {

template <class MassFn, class MomentFn>
double b_outer(const Kernel& g, const QuadratureConfig& cfg, MassFn D, MomentFn G) {
    // truncation must cover the support on both sides
    const double z_max =
        std::max({cfg.outer_grid_max, g.hi() + 1.0, -g.lo() + 1.0});

    auto upper = [&](double z) {
        const double t = z * (1.0 - D(z)) + G(z);
        return t * t;
    };
    auto lower = [&](double z) {
        const double t = z * D(-z) + G(-z);
        return t * t;
    };
    if (upper(z_max) > 1e-10 || lower(z_max) > 1e-10)
        throw NonIntegrableTail("b_functional: outer integrand not negligible at truncation");

    return integrate(upper, 0.0, z_max, cfg.abs_tol, cfg.rel_tol, 4000) +
           integrate(lower, 0.0, z_max, cfg.abs_tol, cfg.rel_tol, 4000);
}

}  // namespace

double b_functional(const Kernel& g, const QuadratureConfig& cfg) {
    cfg.validate();
    KernelProfile profile(g, cfg);
    return b_outer(
        g, cfg, [&profile](double z) { return profile.mass_below(z); },
        [&profile](double z) { return profile.first_moment_below(z); });
}

double b_functional_direct(const Kernel& g, const QuadratureConfig& cfg) {
    cfg.validate();
    // The inner quadratures must be well below the outer tolerance, or their
    // noise keeps the outer error estimate from converging.
    QuadratureConfig inner = cfg;
    inner.abs_tol = std::min(cfg.abs_tol * 1e-3, 1e-13);
    inner.rel_tol = std::min(cfg.rel_tol * 1e-3, 1e-12);
    QuadratureConfig outer = cfg;
    outer.abs_tol = std::max(cfg.abs_tol, 1e-10);
    return b_outer(
        g, outer, [&g, &inner](double z) { return partial_mass(g, z, inner); },
        [&g, &inner](double z) { return partial_first_moment(g, z, inner); });
}

}  // namespace oscv
