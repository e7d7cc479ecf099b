#include "oscv/densities.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <random>

namespace oscv {

namespace {

constexpr double kSqrt2Pi = 2.506628274631000502415765284811;
constexpr double kQuantileEps = 1e-9;

double laplace_cdf_std(double t) {
    return t < 0.0 ? 0.5 * std::exp(t) : 1.0 - 0.5 * std::exp(-t);
}

}  // namespace

void MixtureSpec::validate() const {
    if (components.empty()) throw InvalidSpec("mixture: no components");
    double total = 0.0;
    for (const auto& c : components) {
        if (c.weight < 0.0) throw InvalidSpec("mixture: negative weight");
        if (!(c.scale > 0.0)) throw InvalidSpec("mixture: scale must be > 0");
        if (!std::isfinite(c.location)) throw InvalidSpec("mixture: non-finite location");
        total += c.weight;
    }
    if (std::abs(total - 1.0) > 1e-9)
        throw InvalidSpec("mixture: weights must sum to 1");
}

double TestDensity::quantile(double p) const {
    if (!(p > 0.0 && p < 1.0)) throw InvalidParam("quantile: p must be in (0, 1)");
    double lo = bracket_lo_, hi = bracket_hi_;
    double step = std::max(1.0, 0.25 * (hi - lo));
    while (cdf_(lo) > p) {
        lo -= step;
        step *= 2.0;
    }
    step = std::max(1.0, 0.25 * (hi - lo));
    while (cdf_(hi) < p) {
        hi += step;
        step *= 2.0;
    }

    // Newton with a bisection safeguard; cdf is strictly increasing.
    double x = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
        const double f_cdf = cdf_(x);
        if (f_cdf > p)
            hi = x;
        else
            lo = x;
        const double dens = pdf_(x);
        double next = dens > 1e-300 ? x + (p - f_cdf) / dens : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        const double moved = std::abs(next - x);
        x = next;
        if (moved < 1e-15 * (1.0 + std::abs(x)) || hi - lo < 1e-15 * (1.0 + std::abs(x)))
            break;
    }
    return x;
}

TestDensity TestDensity::standard_normal() {
    TestDensity d;
    d.label_ = "normal";
    d.pdf_ = [](double x) { return std::exp(-0.5 * x * x) / kSqrt2Pi; };
    d.cdf_ = [](double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); };
    d.bracket_lo_ = -10.0;
    d.bracket_hi_ = 10.0;
    d.effective_lo_ = d.quantile(kQuantileEps);
    d.effective_hi_ = d.quantile(1.0 - kQuantileEps);
    return d;
}

TestDensity TestDensity::laplace_mixture(const MixtureSpec& spec) {
    spec.validate();
    auto components = spec.components;
    std::sort(components.begin(), components.end(),
              [](const MixtureComponent& a, const MixtureComponent& b) {
                  return a.location < b.location;
              });

    TestDensity d;
    d.label_ = spec.label;
    d.pdf_ = [components](double x) {
        double v = 0.0;
        for (const auto& c : components)
            v += c.weight / (2.0 * c.scale) * std::exp(-std::abs(x - c.location) / c.scale);
        return v;
    };
    d.cdf_ = [components](double x) {
        double v = 0.0;
        for (const auto& c : components)
            v += c.weight * laplace_cdf_std((x - c.location) / c.scale);
        return v;
    };

    // each component cusps at its location with f'(m+) - f'(m-) = -w/s^2;
    // coincident locations accumulate
    std::map<double, double> jumps;
    for (const auto& c : components)
        if (c.weight > 0.0) jumps[c.location] -= c.weight / (c.scale * c.scale);
    for (const auto& [loc, jump] : jumps) d.cusps_.push_back({loc, jump});

    d.bracket_lo_ = components.front().location - 1.0;
    d.bracket_hi_ = components.back().location + 1.0;
    d.effective_lo_ = d.quantile(kQuantileEps);
    d.effective_hi_ = d.quantile(1.0 - kQuantileEps);
    return d;
}

MixtureSpec cusped7_spec() {
    MixtureSpec spec;
    spec.label = "cusped7";
    spec.components = {
        {0.15, -2.1, 0.40}, {0.15, -1.1, 0.35}, {0.20, 0.0, 0.30}, {0.15, 0.9, 0.35},
        {0.15, 1.8, 0.30},  {0.10, 2.6, 0.25},  {0.10, 3.3, 0.25},
    };
    return spec;
}

TestDensity make_density(const std::string& name) {
    if (name == "normal") return TestDensity::standard_normal();
    if (name == "cusped7") return TestDensity::laplace_mixture(cusped7_spec());
    if (name == "laplace") {
        MixtureSpec spec;
        spec.label = "laplace";
        spec.components = {{1.0, 0.0, 1.0}};
        return TestDensity::laplace_mixture(spec);
    }
    throw InvalidSpec("unknown density: " + name);
}

TestDensity make_density(const MixtureSpec& spec) {
    return TestDensity::laplace_mixture(spec);
}

Sample sample_density(const TestDensity& density, int n, std::uint64_t seed) {
    if (n < 2) throw InvalidParam("sample_density: need n >= 2");
    std::mt19937_64 engine(seed);
    std::vector<double> draws(n);
    for (int i = 0; i < n; ++i) {
        // uniform in (0, 1), endpoints excluded; mapping fixed here rather
        // than std::uniform_real_distribution so streams are portable
        const double u = (static_cast<double>(engine() >> 11) + 0.5) * 0x1p-53;
        draws[i] = density.quantile(u);
    }
    return Sample(std::move(draws));
}

}  // namespace oscv
