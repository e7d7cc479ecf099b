#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "oscv/selection.hpp"

namespace oscv {

// Location where the density is continuous but its first derivative jumps
// by `jump` = f'(x+) - f'(x-).
struct Cusp {
    double location = 0.0;
    double jump = 0.0;
};

struct MixtureComponent {
    double weight = 0.0;
    double location = 0.0;
    double scale = 1.0;
};

// Laplace mixture: sum_j w_j / (2 s_j) exp(-|x - m_j| / s_j). Weights must
// be nonnegative and sum to 1.
struct MixtureSpec {
    std::string label;
    std::vector<MixtureComponent> components;

    void validate() const;  // throws InvalidSpec
};

// Evaluable density with exact cdf and quantile, used as a simulation
// target. Immutable.
class TestDensity {
public:
    double pdf(double x) const { return pdf_(x); }
    double cdf(double x) const { return cdf_(x); }
    double quantile(double p) const;

    const std::vector<Cusp>& cusps() const { return cusps_; }
    const std::string& label() const { return label_; }

    // Quantile range [q(eps), q(1-eps)] with eps = 1e-9; bounds the ISE
    // integration window.
    double effective_lo() const { return effective_lo_; }
    double effective_hi() const { return effective_hi_; }

    static TestDensity standard_normal();
    static TestDensity laplace_mixture(const MixtureSpec& spec);

private:
    TestDensity() = default;

    std::function<double(double)> pdf_, cdf_;
    std::vector<Cusp> cusps_;
    std::string label_;
    double bracket_lo_ = 0.0, bracket_hi_ = 0.0;  // initial quantile bracket
    double effective_lo_ = 0.0, effective_hi_ = 0.0;
};

// Named densities: "normal", "laplace" (single component at 0 with unit
// scale), "cusped7" (the bundled 7-cusp mixture).
TestDensity make_density(const std::string& name);
TestDensity make_density(const MixtureSpec& spec);

// The bundled 7-cusp mixture parameters (also shipped as data/cusped7.json).
MixtureSpec cusped7_spec();

// Inverse-transform sampling; deterministic given the seed.
Sample sample_density(const TestDensity& density, int n, std::uint64_t seed);

}  // namespace oscv
