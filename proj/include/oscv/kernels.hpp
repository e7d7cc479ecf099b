#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "oscv/errors.hpp"

namespace oscv {

// Gaussian-tailed kernels are treated as exactly zero outside
// [-kGaussianTruncation, kGaussianTruncation]; phi at the bound is below
// 1.5e-18. Scale-mixture kernels widen this by their largest scale.
inline constexpr double kGaussianTruncation = 9.0;

enum class BaseKernel { gaussian, epanechnikov, quartic };

// Tabulated self-convolution (L*L)(v) = int L(u) L(u - v) du, which is even
// in v. Values on a uniform grid over [0, support width], cubic Hermite in
// between with fourth-order finite-difference slopes.
class ConvolutionTable {
public:
    ConvolutionTable(const std::function<double(double)>& f, double lo, double hi,
                     int n_points = 4096);

    double operator()(double v) const;
    double width() const { return width_; }
    double at_zero() const { return values_.front(); }

private:
    double width_, step_;
    std::vector<double> values_;
    std::vector<double> slopes_;
};

namespace detail {
struct KernelData;
}

// Immutable evaluable kernel. Evaluates to exactly 0 outside the declared
// support; cheap to copy and safe to share across threads.
class Kernel {
public:
    double operator()(double u) const;
    double lo() const;
    double hi() const;
    bool symmetric() const;
    const std::string& label() const;

    // Self-convolution table, built on first use and cached.
    const ConvolutionTable& self_convolution() const;

    static Kernel make(std::string label, double lo, double hi, bool symmetric,
                       std::function<double(double)> f);

private:
    std::shared_ptr<const detail::KernelData> data_;
};

// Parameters of the L_I one-sided kernel family together with the derived
// coefficients of the linear tilt (a + b_coef*u)/c. `b_coef` avoids the
// collision with the cross-validation bandwidth b.
struct LIParams {
    double alpha = 0.0;
    double sigma = 1.0;
    double a = 0.0;
    double b_coef = 0.0;
    double c = 0.0;

    // Derives a, b_coef, c from (alpha, sigma). Throws InvalidParam for
    // sigma <= 0 and DegenerateKernel for c == 0.
    static LIParams from(double alpha, double sigma);
};

enum class PolynomialOneSided { L1, L2, L3 };

Kernel make_base_kernel(BaseKernel name);

// Right-sided second-order kernel built from a two-sided benchmark by the
// linear-tilt construction. Throws DegenerateKernel when the half-moment
// determinant is below 1e-12.
Kernel make_one_sided(const Kernel& benchmark);

Kernel make_LI(const LIParams& params);
inline Kernel make_LI(double alpha, double sigma) {
    return make_LI(LIParams::from(alpha, sigma));
}

Kernel make_polynomial_onesided(PolynomialOneSided which);

// Resolves the canonical labels accepted by the CLI: "gaussian",
// "epanechnikov", "quartic", "one_sided:<base>", "LI:<alpha>:<sigma>",
// "L1", "L2", "L3". Throws UnknownKernelLabel.
Kernel kernel_from_label(const std::string& label);

}  // namespace oscv
