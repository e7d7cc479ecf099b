#include "oscv/selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "oscv/rescaling.hpp"

namespace oscv {

Sample::Sample(std::vector<double> obs) : observations(std::move(obs)) {
    if (observations.size() < 2)
        throw InvalidSample("Sample: need at least 2 observations");
    for (double v : observations)
        if (!std::isfinite(v)) throw InvalidSample("Sample: non-finite observation");
}

double sample_scale(const Sample& sample) {
    const auto& x = sample.observations;
    const int n = sample.n();
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= n;
    double ss = 0.0;
    for (double v : x) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / (n - 1));

    std::vector<double> sorted = x;
    std::sort(sorted.begin(), sorted.end());
    auto quantile = [&sorted, n](double p) {
        const double pos = p * (n - 1);
        const int i = static_cast<int>(pos);
        if (i >= n - 1) return sorted[n - 1];
        const double frac = pos - i;
        return sorted[i] * (1.0 - frac) + sorted[i + 1] * frac;
    };
    const double iqr = quantile(0.75) - quantile(0.25);
    return std::min(sd, iqr / 1.349);
}

std::vector<double> GridPolicy::make_grid(const Sample& sample) const {
    if (n_points < 2) throw InvalidParam("GridPolicy: need at least 2 grid points");
    double lo, hi;
    if (lo_override && hi_override) {
        lo = *lo_override;
        hi = *hi_override;
    } else {
        double s = sample_scale(sample);
        if (s <= 0.0) {
            // Fully tied data carry no scale; any grid works, the result is
            // flagged degenerate downstream.
            double amax = 0.0;
            for (double v : sample.observations) amax = std::max(amax, std::abs(v));
            s = std::max(amax, 1.0) * 1e-3;
        }
        const double base = s * std::pow(sample.n(), -0.2);
        lo = lo_override.value_or(lo_factor * base);
        hi = hi_override.value_or(hi_factor * base);
    }
    if (!(lo > 0) || !(hi > lo))
        throw InvalidParam("GridPolicy: grid bounds must satisfy 0 < lo < hi");
    std::vector<double> grid(n_points);
    const double llo = std::log(lo), lhi = std::log(hi);
    for (int i = 0; i < n_points; ++i)
        grid[i] = std::exp(llo + (lhi - llo) * i / (n_points - 1));
    grid.front() = lo;
    grid.back() = hi;
    return grid;
}

std::string to_string(SelectionMode mode) {
    switch (mode) {
        case SelectionMode::smooth: return "smooth";
        case SelectionMode::nonsmooth: return "nonsmooth";
        case SelectionMode::robust: return "robust";
        case SelectionMode::lscv: return "lscv";
    }
    return "unknown";
}

SelectionMode selection_mode_from_string(const std::string& s) {
    if (s == "smooth") return SelectionMode::smooth;
    if (s == "nonsmooth") return SelectionMode::nonsmooth;
    if (s == "robust") return SelectionMode::robust;
    if (s == "lscv") return SelectionMode::lscv;
    throw InvalidParam("unknown selection mode: " + s);
}

double BandwidthSelection::usable_bandwidth(bool allow_degenerate) const {
    if (curve.degenerate && !allow_degenerate)
        throw DegenerateCriterion(
            "criterion minimum at the lower grid edge; pass allow_degenerate to use it");
    return bandwidth;
}

double kde(const Sample& sample, double h, const Kernel& kernel, double x) {
    if (!(h > 0)) throw InvalidBandwidth("kde: bandwidth must be > 0");
    double sum = 0.0;
    for (double xi : sample.observations) sum += kernel((x - xi) / h);
    return sum / (sample.n() * h);
}

namespace {

// CV criterion over sorted data:
//   (1/(n^2 b)) sum_ij (k*k)((Xi-Xj)/b) - 2/(n(n-1)b) sum_{i!=j} k((Xi-Xj)/b)
// The i = j kernel values enter only through the first (full-sample) term.
class CriterionEvaluator {
public:
    CriterionEvaluator(const Sample& sample, const Kernel& kernel)
        : kernel_(kernel), conv_(kernel.self_convolution()), sorted_(sample.observations) {
        std::sort(sorted_.begin(), sorted_.end());
    }

    double operator()(double b) const {
        const int n = static_cast<int>(sorted_.size());
        const double window = b * conv_.width();
        double r_sum = n * conv_.at_zero();
        double cv_sum = 0.0;
        for (int i = 0; i < n; ++i) {
            for (int j = i + 1; j < n; ++j) {
                const double dist = sorted_[j] - sorted_[i];
                if (dist > window) break;
                const double d = dist / b;
                r_sum += 2.0 * conv_(d);
                cv_sum += kernel_(d) + kernel_(-d);
            }
        }
        return r_sum / (static_cast<double>(n) * n * b) -
               2.0 * cv_sum / (static_cast<double>(n) * (n - 1) * b);
    }

private:
    const Kernel& kernel_;
    const ConvolutionTable& conv_;
    std::vector<double> sorted_;
};

constexpr double kValueTie = 1e-8;

template <class F>
std::pair<double, double> golden_section(const F& f, double a, double b) {
    constexpr double kInvPhi = 0.6180339887498949;
    double c = b - kInvPhi * (b - a);
    double d = a + kInvPhi * (b - a);
    double fc = f(c), fd = f(d);
    const double tol = 1e-11;
    int iter = 0;
    while (b - a > tol * (std::abs(c) + std::abs(d)) && ++iter < 200) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - kInvPhi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + kInvPhi * (b - a);
            fd = f(d);
        }
    }
    return fc < fd ? std::make_pair(c, fc) : std::make_pair(d, fd);
}

template <class F>
CriterionCurve build_curve(const F& criterion, const std::vector<double>& grid,
                           bool force_degenerate) {
    const int m = static_cast<int>(grid.size());
    if (m < 2) throw InvalidParam("criterion curve: need at least 2 grid points");
    for (int i = 0; i < m; ++i) {
        if (!(grid[i] > 0)) throw InvalidBandwidth("criterion curve: bandwidths must be > 0");
        if (i > 0 && !(grid[i] > grid[i - 1]))
            throw InvalidParam("criterion curve: grid must be strictly increasing");
    }

    CriterionCurve curve;
    curve.grid = grid;
    curve.values.resize(m);
    for (int i = 0; i < m; ++i) curve.values[i] = criterion(grid[i]);
    const auto& v = curve.values;
    for (double val : v)
        if (!std::isfinite(val)) throw QuadratureFailure("criterion curve: non-finite value");

    struct Candidate {
        double b, value;
        bool lower_edge;
    };
    std::vector<Candidate> candidates;

    // interior local minima, refined; runs of equal values count once
    for (int k = 1; k + 1 < m; ++k) {
        if (!(v[k] <= v[k - 1] && v[k] <= v[k + 1])) continue;
        if (v[k] == v[k - 1] && v[k] == v[k + 1]) continue;
        if (k > 1 && v[k] == v[k - 1]) continue;  // plateau, counted at its left end
        auto [b_ref, val_ref] = golden_section(criterion, grid[k - 1], grid[k + 1]);
        if (v[k] < val_ref) {
            b_ref = grid[k];
            val_ref = v[k];
        }
        curve.local_minima.push_back(b_ref);
        candidates.push_back({b_ref, val_ref, false});
    }
    if (v[0] <= v[1]) candidates.push_back({grid[0], v[0], true});
    if (v[m - 1] <= v[m - 2]) candidates.push_back({grid[m - 1], v[m - 1], false});
    if (candidates.empty()) {
        // monotone grid values with no interior or edge dip cannot happen,
        // but guard against exotic float patterns
        const auto it = std::min_element(v.begin(), v.end());
        candidates.push_back({grid[it - v.begin()], *it, it == v.begin()});
    }

    double best_value = std::numeric_limits<double>::infinity();
    for (const auto& c : candidates) best_value = std::min(best_value, c.value);

    // Among near-ties the smallest bandwidth wins.
    const Candidate* chosen = nullptr;
    for (const auto& c : candidates)
        if (c.value <= best_value + kValueTie && (!chosen || c.b < chosen->b)) chosen = &c;

    curve.minimizer = chosen->b;
    curve.degenerate = chosen->lower_edge || force_degenerate;
    if (force_degenerate) curve.minimizer = grid.front();
    return curve;
}

CriterionCurve cv_curve(const Sample& sample, const Kernel& kernel,
                        const std::vector<double>& grid) {
    const CriterionEvaluator criterion(sample, kernel);
    const bool zero_scale = sample_scale(sample) <= 0.0;
    return build_curve(criterion, grid, zero_scale);
}

}  // namespace

CriterionCurve oscv_curve(const Sample& sample, const Kernel& cv_kernel,
                          const std::vector<double>& grid) {
    return cv_curve(sample, cv_kernel, grid);
}

CriterionCurve lscv_curve(const Sample& sample, const Kernel& kernel,
                          const std::vector<double>& grid) {
    return cv_curve(sample, kernel, grid);
}

BandwidthSelection select(const Sample& sample, SelectionMode mode,
                          const Kernel& cv_kernel, const Kernel& estimation_kernel,
                          const GridPolicy& policy, const QuadratureConfig& cfg) {
    const std::vector<double> grid = policy.make_grid(sample);

    BandwidthSelection sel;
    sel.mode = mode;
    switch (mode) {
        case SelectionMode::lscv:
            sel.curve = lscv_curve(sample, estimation_kernel, grid);
            sel.constant = 1.0;
            break;
        case SelectionMode::smooth:
            sel.curve = oscv_curve(sample, cv_kernel, grid);
            sel.constant = constant_smooth(estimation_kernel, cv_kernel, cfg);
            break;
        case SelectionMode::nonsmooth:
            sel.curve = oscv_curve(sample, cv_kernel, grid);
            sel.constant = constant_nonsmooth(estimation_kernel, cv_kernel, cfg);
            break;
        case SelectionMode::robust: {
            const double c = constant_smooth(estimation_kernel, cv_kernel, cfg);
            const double cs = constant_nonsmooth(estimation_kernel, cv_kernel, cfg);
            const double e_c = relative_bias(c, cs);
            if (std::abs(e_c) > 0.1)
                throw NotRobustKernel("robust mode needs |E_C| <= 0.1%, got " +
                                      std::to_string(e_c) + "% for " + cv_kernel.label());
            sel.curve = oscv_curve(sample, cv_kernel, grid);
            sel.constant = c;
            break;
        }
    }
    sel.raw_minimizer = sel.curve.minimizer;
    sel.bandwidth = sel.constant * sel.raw_minimizer;
    return sel;
}

}  // namespace oscv
