#include "oscv/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <mutex>
#include <numbers>
#include <sstream>

#include "oscv/quadrature.hpp"

namespace oscv {

namespace detail {

struct KernelData {
    std::string label;
    double lo, hi;
    bool symmetric;
    std::function<double(double)> f;

    mutable std::mutex conv_mutex;
    mutable std::shared_ptr<const ConvolutionTable> conv;
};

}  // namespace detail

double Kernel::operator()(double u) const {
    const auto& d = *data_;
    if (u < d.lo || u > d.hi) return 0.0;
    return d.f(u);
}

double Kernel::lo() const { return data_->lo; }
double Kernel::hi() const { return data_->hi; }
bool Kernel::symmetric() const { return data_->symmetric; }
const std::string& Kernel::label() const { return data_->label; }

const ConvolutionTable& Kernel::self_convolution() const {
    const auto& d = *data_;
    std::lock_guard<std::mutex> lock(d.conv_mutex);
    if (!d.conv) {
        const Kernel& self = *this;
        d.conv = std::make_shared<const ConvolutionTable>(
            [&self](double u) { return self(u); }, d.lo, d.hi);
    }
    return *d.conv;
}

Kernel Kernel::make(std::string label, double lo, double hi, bool symmetric,
                    std::function<double(double)> f) {
    auto data = std::make_shared<detail::KernelData>();
    data->label = std::move(label);
    data->lo = lo;
    data->hi = hi;
    data->symmetric = symmetric;
    data->f = std::move(f);
    Kernel k;
    k.data_ = std::move(data);
    return k;
}

namespace {

constexpr double kSqrt2Pi = 2.506628274631000502415765284811;

double phi(double u) { return std::exp(-0.5 * u * u) / kSqrt2Pi; }

// int_0^hi t^k H(t) dt for k = 0, 1, 2
void half_moments(const Kernel& h, double& m0, double& m1, double& m2) {
    if (h.hi() <= 0.0)
        throw DegenerateKernel("make_one_sided: benchmark has no mass on [0, inf)");
    const double hi = h.hi();
    const double tol = 1e-12;
    m0 = integrate([&h](double t) { return h(t); }, 0.0, hi, tol, 1e-10);
    m1 = integrate([&h](double t) { return t * h(t); }, 0.0, hi, tol, 1e-10);
    m2 = integrate([&h](double t) { return t * t * h(t); }, 0.0, hi, tol, 1e-10);
}

}  // namespace

ConvolutionTable::ConvolutionTable(const std::function<double(double)>& f,
                                   double lo, double hi, int n_points) {
    width_ = hi - lo;
    if (!(width_ > 0) || n_points < 8)
        throw InvalidParam("ConvolutionTable: bad support or grid size");
    step_ = width_ / (n_points - 1);
    values_.resize(n_points);
    for (int i = 0; i < n_points; ++i) {
        const double v = i * step_;
        if (v >= width_) {
            values_[i] = 0.0;
            continue;
        }
        values_[i] = integrate([&f, v](double u) { return f(u) * f(u - v); },
                               lo + v, hi, 1e-13, 1e-11, 4000);
    }

    // Fourth-order finite-difference slopes keep the cubic pieces at
    // O(step^4) accuracy, which the 1e-9 criterion-vs-oracle contract needs.
    slopes_.resize(n_points);
    const auto& y = values_;
    const double inv = 1.0 / step_;
    const int n = n_points;
    for (int i = 2; i < n - 2; ++i)
        slopes_[i] = (y[i - 2] - 8.0 * y[i - 1] + 8.0 * y[i + 1] - y[i + 2]) / 12.0 * inv;
    auto forward = [&](int i) {
        return (-25.0 * y[i] + 48.0 * y[i + 1] - 36.0 * y[i + 2] + 16.0 * y[i + 3] -
                3.0 * y[i + 4]) / 12.0 * inv;
    };
    auto backward = [&](int i) {
        return (25.0 * y[i] - 48.0 * y[i - 1] + 36.0 * y[i - 2] - 16.0 * y[i - 3] +
                3.0 * y[i - 4]) / 12.0 * inv;
    };
    slopes_[0] = forward(0);
    slopes_[1] = forward(1);
    slopes_[n - 2] = backward(n - 2);
    slopes_[n - 1] = backward(n - 1);
}

double ConvolutionTable::operator()(double v) const {
    v = std::abs(v);
    if (v >= width_) return 0.0;
    const int n = static_cast<int>(values_.size());
    int i = static_cast<int>(v / step_);
    i = std::min(i, n - 2);
    const double t = (v - i * step_) / step_;
    const double y0 = values_[i], y1 = values_[i + 1];
    const double d0 = slopes_[i] * step_, d1 = slopes_[i + 1] * step_;
    const double t2 = t * t, t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + t) * d0 +
           (-2 * t3 + 3 * t2) * y1 + (t3 - t2) * d1;
}

Kernel make_base_kernel(BaseKernel name) {
    switch (name) {
        case BaseKernel::gaussian:
            return Kernel::make("gaussian", -kGaussianTruncation, kGaussianTruncation,
                                true, [](double u) { return phi(u); });
        case BaseKernel::epanechnikov:
            return Kernel::make("epanechnikov", -1.0, 1.0, true,
                                [](double u) { return 0.75 * (1.0 - u * u); });
        case BaseKernel::quartic:
            return Kernel::make("quartic", -1.0, 1.0, true, [](double u) {
                const double w = 1.0 - u * u;
                return (15.0 / 16.0) * w * w;
            });
    }
    throw InvalidParam("make_base_kernel: unknown enum value");
}

Kernel make_one_sided(const Kernel& benchmark) {
    double m0, m1, m2;
    half_moments(benchmark, m0, m1, m2);
    const double det = m0 * m2 - m1 * m1;
    if (std::abs(det) < 1e-12)
        throw DegenerateKernel("make_one_sided: half-moment determinant ~ 0 for " +
                               benchmark.label());
    Kernel h = benchmark;
    return Kernel::make("one_sided:" + benchmark.label(), 0.0, benchmark.hi(), false,
                        [h, m1, m2, det](double u) {
                            return (m2 - u * m1) / det * h(u);
                        });
}

LIParams LIParams::from(double alpha, double sigma) {
    if (!(sigma > 0.0)) throw InvalidParam("LIParams: sigma must be > 0");
    LIParams p;
    p.alpha = alpha;
    p.sigma = sigma;
    const double ps = 1.0 + alpha - alpha * sigma * sigma;
    const double qs = 1.0 + alpha - alpha * sigma;
    p.a = 2.0 * std::numbers::pi * ps;
    p.b_coef = -2.0 * kSqrt2Pi * qs;
    p.c = std::numbers::pi * ps - 2.0 * qs * qs;
    if (p.c == 0.0) throw DegenerateKernel("LIParams: c == 0");
    return p;
}

Kernel make_LI(const LIParams& params) {
    if (!(params.sigma > 0.0)) throw InvalidParam("make_LI: sigma must be > 0");
    if (params.c == 0.0) throw DegenerateKernel("make_LI: c == 0");
    const double alpha = params.alpha, sigma = params.sigma;
    const double a = params.a, b = params.b_coef, c = params.c;
    std::ostringstream label;
    label.precision(15);
    label << "LI:" << alpha << ":" << sigma;
    const double hi = kGaussianTruncation * std::max(1.0, sigma);
    return Kernel::make(label.str(), 0.0, hi, false, [alpha, sigma, a, b, c](double u) {
        const double h_i = (1.0 + alpha) * phi(u) - alpha * phi(u / sigma) / sigma;
        return (a + b * u) / c * h_i;
    });
}

Kernel make_polynomial_onesided(PolynomialOneSided which) {
    switch (which) {
        case PolynomialOneSided::L1:
            return Kernel::make("L1", 0.0, 1.0, false, [](double u) {
                return 6.0 * u * (1.0 - u) * (6.0 - 10.0 * u);
            });
        case PolynomialOneSided::L2:
            return Kernel::make("L2", 0.0, 1.0, false, [](double u) {
                const double w = u * (1.0 - u);
                return 30.0 * w * w * (8.0 - 14.0 * u);
            });
        case PolynomialOneSided::L3:
            return Kernel::make("L3", 0.0, 1.0, false, [](double u) {
                const double w = u * (1.0 - u);
                return 140.0 * w * w * w * (10.0 - 18.0 * u);
            });
    }
    throw InvalidParam("make_polynomial_onesided: unknown enum value");
}

Kernel kernel_from_label(const std::string& label) {
    if (label == "gaussian") return make_base_kernel(BaseKernel::gaussian);
    if (label == "epanechnikov") return make_base_kernel(BaseKernel::epanechnikov);
    if (label == "quartic") return make_base_kernel(BaseKernel::quartic);
    if (label == "L1") return make_polynomial_onesided(PolynomialOneSided::L1);
    if (label == "L2") return make_polynomial_onesided(PolynomialOneSided::L2);
    if (label == "L3") return make_polynomial_onesided(PolynomialOneSided::L3);

    const std::string one_sided_prefix = "one_sided:";
    if (label.rfind(one_sided_prefix, 0) == 0)
        return make_one_sided(kernel_from_label(label.substr(one_sided_prefix.size())));

    if (label.rfind("LI:", 0) == 0) {
        const std::string rest = label.substr(3);
        const auto colon = rest.find(':');
        if (colon != std::string::npos) {
            try {
                size_t pa = 0, ps = 0;
                const std::string alpha_s = rest.substr(0, colon);
                const std::string sigma_s = rest.substr(colon + 1);
                const double alpha = std::stod(alpha_s, &pa);
                const double sigma = std::stod(sigma_s, &ps);
                if (pa == alpha_s.size() && ps == sigma_s.size())
                    return make_LI(alpha, sigma);
            } catch (const std::invalid_argument&) {
            } catch (const std::out_of_range&) {
            }
        }
    }
    throw UnknownKernelLabel("unknown kernel label: " + label);
}

}  // namespace oscv
