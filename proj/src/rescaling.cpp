#include "oscv/rescaling.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <utility>

namespace oscv {

namespace {

constexpr double kTiny = 1e-14;

struct KernelFunctionals {
    double r, mu2, b;
};

KernelFunctionals compute_functionals(const Kernel& k, const QuadratureConfig& cfg,
                                      bool need_b) {
    KernelFunctionals f{};
    f.r = roughness(k, cfg);
    f.mu2 = second_moment(k, cfg);
    f.b = need_b ? b_functional(k, cfg) : 0.0;
    return f;
}

}  // namespace

double constant_smooth(const Kernel& estimation, const Kernel& cv,
                       const QuadratureConfig& cfg) {
    const double r_k = roughness(estimation, cfg);
    const double r_l = roughness(cv, cfg);
    const double mu2_k = second_moment(estimation, cfg);
    const double mu2_l = second_moment(cv, cfg);
    if (std::abs(mu2_k) < kTiny || std::abs(r_l) < kTiny)
        throw DegenerateKernel("constant_smooth: vanishing mu2(K) or R(L)");
    return std::pow(r_k / r_l * (mu2_l * mu2_l) / (mu2_k * mu2_k), 0.2);
}

double constant_nonsmooth(const Kernel& estimation, const Kernel& cv,
                          const QuadratureConfig& cfg) {
    const double r_k = roughness(estimation, cfg);
    const double r_l = roughness(cv, cfg);
    if (std::abs(r_l) < kTiny || std::abs(r_k) < kTiny)
        throw DegenerateKernel("constant_nonsmooth: vanishing roughness");
    const double b_k = b_functional(estimation, cfg);
    const double b_l = b_functional(cv, cfg);
    if (b_k < kTiny || b_l < kTiny)
        throw DegenerateKernel("constant_nonsmooth: vanishing B functional");
    return std::pow(r_k / b_k * b_l / r_l, 0.25);
}

double relative_bias(double c_smooth, double c_nonsmooth) {
    if (c_nonsmooth == 0.0) throw DivisionByZero("relative_bias: c_nonsmooth == 0");
    return (c_smooth / c_nonsmooth - 1.0) * 100.0;
}

ConstantsRecord make_constants_record(const Kernel& estimation, const Kernel& cv,
                                      const QuadratureConfig& cfg) {
    ConstantsRecord rec;
    rec.estimation_kernel = estimation.label();
    rec.cv_kernel = cv.label();
    rec.c_smooth = constant_smooth(estimation, cv, cfg);
    rec.c_nonsmooth = constant_nonsmooth(estimation, cv, cfg);
    rec.e_c_percent = relative_bias(rec.c_smooth, rec.c_nonsmooth);
    return rec;
}

namespace {

// E_C for L_I(alpha, sigma) against fixed gaussian-K functionals.
double e_c_of_li(double alpha, double sigma, const KernelFunctionals& k,
                 const QuadratureConfig& cfg) {
    const Kernel li = make_LI(alpha, sigma);
    const KernelFunctionals l = compute_functionals(li, cfg, true);
    if (std::abs(l.r) < kTiny || l.b < kTiny)
        throw DegenerateKernel("scan_robust: vanishing functional");
    const double c = std::pow(k.r / l.r * (l.mu2 * l.mu2) / (k.mu2 * k.mu2), 0.2);
    const double cs = std::pow(k.r / k.b * l.b / l.r, 0.25);
    return relative_bias(c, cs);
}

struct RowResult {
    std::vector<ScanHit> hits;
    std::vector<ScanSkip> skipped;
};

}  // namespace

ScanResult scan_robust(double alpha_lo, double alpha_hi, double alpha_step,
                       double sigma_lo, double sigma_hi, double sigma_step,
                       double threshold_percent, const QuadratureConfig& cfg) {
    cfg.validate();
    if (alpha_hi < alpha_lo || sigma_hi < sigma_lo)
        throw InvalidParam("scan_robust: empty range");
    if (!(alpha_step > 0) || !(sigma_step > 0))
        throw InvalidParam("scan_robust: grid steps must be > 0");
    if (!(sigma_lo > 0)) throw InvalidParam("scan_robust: sigma must be > 0");

    const Kernel gaussian = make_base_kernel(BaseKernel::gaussian);
    const KernelFunctionals kf = compute_functionals(gaussian, cfg, true);

    const int n_alpha = static_cast<int>(std::floor((alpha_hi - alpha_lo) / alpha_step + 1e-9)) + 1;
    const int n_sigma = static_cast<int>(std::floor((sigma_hi - sigma_lo) / sigma_step + 1e-9)) + 1;

    auto scan_row = [&](double sigma) {
        RowResult row;
        std::vector<std::pair<double, double>> computed;  // (alpha, e_c) for sign changes
        for (int i = 0; i < n_alpha; ++i) {
            const double alpha = alpha_lo + i * alpha_step;
            try {
                const double ec = e_c_of_li(alpha, sigma, kf, cfg);
                computed.emplace_back(alpha, ec);
                if (std::abs(ec) <= threshold_percent)
                    row.hits.push_back({LIParams::from(alpha, sigma), ec, false});
            } catch (const Error& e) {
                row.skipped.push_back({alpha, sigma, e.what()});
            }
        }
        // bisection on E_C(alpha) between adjacent cells with a sign change
        for (size_t i = 1; i < computed.size(); ++i) {
            auto [a0, e0] = computed[i - 1];
            auto [a1, e1] = computed[i];
            if (a1 - a0 > alpha_step * 1.5) continue;  // skipped cell in between
            if (e0 == 0.0 || e1 == 0.0 || (e0 < 0) == (e1 < 0)) continue;
            double lo = a0, hi = a1, elo = e0;
            double mid = 0.5 * (lo + hi), emid = elo;
            bool ok = true;
            for (int it = 0; it < 200; ++it) {
                mid = 0.5 * (lo + hi);
                try {
                    emid = e_c_of_li(mid, sigma, kf, cfg);
                } catch (const Error& e) {
                    row.skipped.push_back({mid, sigma, e.what()});
                    ok = false;
                    break;
                }
                if (std::abs(emid) < 0.01) break;
                if ((emid < 0) == (elo < 0)) {
                    lo = mid;
                    elo = emid;
                } else {
                    hi = mid;
                }
            }
            if (ok && std::abs(emid) < 0.01)
                row.hits.push_back({LIParams::from(mid, sigma), emid, true});
        }
        return row;
    };

    std::vector<std::future<RowResult>> futures;
    futures.reserve(n_sigma);
    for (int j = 0; j < n_sigma; ++j) {
        const double sigma = sigma_lo + j * sigma_step;
        futures.push_back(std::async(std::launch::async, scan_row, sigma));
    }

    ScanResult result;
    for (auto& f : futures) {
        RowResult row = f.get();
        result.hits.insert(result.hits.end(), row.hits.begin(), row.hits.end());
        result.skipped.insert(result.skipped.end(), row.skipped.begin(), row.skipped.end());
    }
    std::stable_sort(result.hits.begin(), result.hits.end(),
                     [](const ScanHit& a, const ScanHit& b) {
                         if (std::abs(a.e_c_percent) != std::abs(b.e_c_percent))
                             return std::abs(a.e_c_percent) < std::abs(b.e_c_percent);
                         if (a.params.sigma != b.params.sigma)
                             return a.params.sigma < b.params.sigma;
                         return a.params.alpha < b.params.alpha;
                     });
    return result;
}

}  // namespace oscv
