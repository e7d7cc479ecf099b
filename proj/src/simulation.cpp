#include "oscv/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <thread>

namespace oscv {

double ise(const TestDensity& density, const Sample& sample, double h,
           const Kernel& kernel, const QuadratureConfig& cfg) {
    if (!(h > 0)) throw InvalidBandwidth("ise: bandwidth must be > 0");
    cfg.validate();

    std::vector<double> sorted = sample.observations;
    std::sort(sorted.begin(), sorted.end());
    const int n = static_cast<int>(sorted.size());
    const double pad = 6.0 * h;
    const double lo = std::min(density.effective_lo(), sorted.front() - pad);
    const double hi = std::max(density.effective_hi(), sorted.back() + pad);

    // windowed estimator over the sorted sample
    const double k_lo = kernel.lo() * h, k_hi = kernel.hi() * h;
    auto fhat = [&](double x) {
        auto first = std::lower_bound(sorted.begin(), sorted.end(), x - k_hi);
        auto last = std::upper_bound(first, sorted.end(), x - k_lo);
        double s = 0.0;
        for (auto it = first; it != last; ++it) s += kernel((x - *it) / h);
        return s / (n * h);
    };
    auto integrand = [&](double x) {
        const double d = fhat(x) - density.pdf(x);
        return d * d;
    };

    // Split at the cusps and at the landmarks of both f and hat f. Without
    // the landmark splits, huge-h windows hide the density spike from the
    // first Gauss-Kronrod pass entirely.
    std::vector<double> breaks{lo, hi};
    auto add_break = [&](double x) {
        if (x > lo && x < hi) breaks.push_back(x);
    };
    for (const auto& c : density.cusps()) add_break(c.location);
    add_break(density.effective_lo());
    add_break(density.effective_hi());
    add_break(sorted.front());
    add_break(sorted.back());
    std::sort(breaks.begin(), breaks.end());
    breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

    double total = 0.0;
    for (size_t i = 0; i + 1 < breaks.size(); ++i)
        total += integrate(integrand, breaks[i], breaks[i + 1], cfg.abs_tol, cfg.rel_tol,
                           20000);
    return total;
}

CriterionCurve ise_profile(const TestDensity& density, const Sample& sample,
                           const Kernel& kernel, const GridPolicy& policy,
                           const QuadratureConfig& cfg) {
    const std::vector<double> grid = policy.make_grid(sample);
    const int m = static_cast<int>(grid.size());

    CriterionCurve curve;
    curve.grid = grid;
    curve.values.resize(m);
    for (int i = 0; i < m; ++i)
        curve.values[i] = ise(density, sample, grid[i], kernel, cfg);

    const auto& v = curve.values;
    int k = 0;
    for (int i = 1; i < m; ++i)
        if (v[i] < v[k]) k = i;

    if (k == 0) {
        curve.minimizer = grid.front();
        curve.degenerate = true;
        return curve;
    }
    if (k == m - 1) {
        curve.minimizer = grid.back();
        return curve;
    }

    // golden-section refinement inside the bracketing cell
    constexpr double kInvPhi = 0.6180339887498949;
    double a = grid[k - 1], b = grid[k + 1];
    double c = b - kInvPhi * (b - a), d = a + kInvPhi * (b - a);
    double fc = ise(density, sample, c, kernel, cfg);
    double fd = ise(density, sample, d, kernel, cfg);
    for (int it = 0; it < 100 && b - a > 1e-8 * (std::abs(a) + std::abs(b)); ++it) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - kInvPhi * (b - a);
            fc = ise(density, sample, c, kernel, cfg);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + kInvPhi * (b - a);
            fd = ise(density, sample, d, kernel, cfg);
        }
    }
    curve.minimizer = fc < fd ? c : d;
    curve.local_minima.push_back(curve.minimizer);
    return curve;
}

double ise_optimal_bandwidth(const TestDensity& density, const Sample& sample,
                             const Kernel& kernel, const GridPolicy& policy,
                             const QuadratureConfig& cfg) {
    const CriterionCurve curve = ise_profile(density, sample, kernel, policy, cfg);
    if (curve.degenerate)
        throw DegenerateCriterion("ise_optimal_bandwidth: minimum at the lower grid edge");
    return curve.minimizer;
}

namespace {

double jump_sum_squared(const TestDensity& density) {
    double s = 0.0;
    for (const auto& c : density.cusps()) s += c.jump * c.jump;
    return s;
}

}  // namespace

double amise_nonsmooth(const TestDensity& density, const Kernel& kernel, double h,
                       int n, const QuadratureConfig& cfg) {
    if (density.cusps().empty())
        throw SmoothDensity("amise_nonsmooth: density has no cusps");
    if (!(h > 0)) throw InvalidBandwidth("amise_nonsmooth: bandwidth must be > 0");
    if (n < 1) throw InvalidParam("amise_nonsmooth: n must be >= 1");
    const double r = roughness(kernel, cfg);
    const double b = b_functional(kernel, cfg);
    return r / (n * h) + h * h * h * b * jump_sum_squared(density);
}

double h_star(const TestDensity& density, const Kernel& kernel, int n,
              const QuadratureConfig& cfg) {
    if (density.cusps().empty()) throw SmoothDensity("h_star: density has no cusps");
    if (n < 1) throw InvalidParam("h_star: n must be >= 1");
    const double jumps = jump_sum_squared(density);
    if (!(jumps > 0.0)) throw DegenerateJumps("h_star: zero squared-jump sum");
    const double r = roughness(kernel, cfg);
    const double b = b_functional(kernel, cfg);
    return std::pow(r / (3.0 * b * jumps), 0.25) * std::pow(n, -0.25);
}

MethodSpec MethodSpec::lscv(Kernel estimation) {
    MethodSpec m;
    m.kind = MethodKind::lscv;
    m.cv_kernel = estimation;
    m.estimation_kernel = std::move(estimation);
    m.name = "lscv";
    return m;
}

MethodSpec MethodSpec::oscv(MethodKind kind, Kernel cv, Kernel estimation) {
    if (kind == MethodKind::lscv) return lscv(std::move(estimation));
    MethodSpec m;
    m.kind = kind;
    m.cv_kernel = std::move(cv);
    m.estimation_kernel = std::move(estimation);
    switch (kind) {
        case MethodKind::oscv_smooth: m.name = "oscv_smooth"; break;
        case MethodKind::oscv_nonsmooth: m.name = "oscv_nonsmooth"; break;
        case MethodKind::oscv_robust: m.name = "oscv_robust:" + m.cv_kernel.label(); break;
        default: break;
    }
    return m;
}

std::uint64_t replication_seed(std::uint64_t master_seed, int replication) {
    // splitmix64 over (master ^ index); avalanches so nearby indices do not
    // correlate the mt19937_64 streams
    std::uint64_t z = master_seed + 0x9e3779b97f4a7c15ULL * (replication + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

double median(std::vector<double> values) {
    if (values.empty()) throw InvalidParam("median: empty set");
    std::sort(values.begin(), values.end());
    const size_t n = values.size();
    return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

SimulationReport monte_carlo_study(const TestDensity& density, int n, int reps,
                                   const std::vector<MethodSpec>& methods,
                                   std::uint64_t master_seed, const GridPolicy& policy,
                                   const QuadratureConfig& cfg) {
    if (reps < 1) throw InvalidParam("monte_carlo_study: reps must be >= 1");
    if (methods.empty()) throw InvalidParam("monte_carlo_study: no methods");

    // rescaling constants do not depend on the data; compute once
    std::vector<double> constants(methods.size(), 1.0);
    for (size_t m = 0; m < methods.size(); ++m) {
        const auto& spec = methods[m];
        switch (spec.kind) {
            case MethodKind::lscv:
                constants[m] = 1.0;
                break;
            case MethodKind::oscv_smooth:
                constants[m] = constant_smooth(spec.estimation_kernel, spec.cv_kernel, cfg);
                break;
            case MethodKind::oscv_nonsmooth:
                constants[m] =
                    constant_nonsmooth(spec.estimation_kernel, spec.cv_kernel, cfg);
                break;
            case MethodKind::oscv_robust: {
                const double c = constant_smooth(spec.estimation_kernel, spec.cv_kernel, cfg);
                const double cs =
                    constant_nonsmooth(spec.estimation_kernel, spec.cv_kernel, cfg);
                const double e_c = relative_bias(c, cs);
                if (std::abs(e_c) > 0.1)
                    throw NotRobustKernel("monte_carlo_study: |E_C| > 0.1% for " +
                                          spec.cv_kernel.label());
                constants[m] = c;
                break;
            }
        }
        // warm the shared convolution caches before the parallel loop
        if (spec.kind == MethodKind::lscv)
            spec.estimation_kernel.self_convolution();
        else
            spec.cv_kernel.self_convolution();
    }

    SimulationReport report;
    report.density_label = density.label();
    report.n = n;
    report.replications = reps;
    report.master_seed = master_seed;
    report.records.resize(reps);

    auto run_replication = [&](int rep) {
        ReplicationRecord rec;
        rec.seed = replication_seed(master_seed, rep);
        const Sample sample = sample_density(density, n, rec.seed);
        const std::vector<double> grid = policy.make_grid(sample);

        // one curve per distinct criterion (kernel, type) pair
        std::map<std::string, CriterionCurve> curves;
        auto curve_for = [&](const MethodSpec& spec) -> const CriterionCurve& {
            const bool is_lscv = spec.kind == MethodKind::lscv;
            const Kernel& k = is_lscv ? spec.estimation_kernel : spec.cv_kernel;
            const std::string key = (is_lscv ? "lscv:" : "oscv:") + k.label();
            auto it = curves.find(key);
            if (it == curves.end())
                it = curves
                         .emplace(key, is_lscv ? lscv_curve(sample, k, grid)
                                               : oscv_curve(sample, k, grid))
                         .first;
            return it->second;
        };

        const CriterionCurve h0_curve =
            ise_profile(density, sample, methods.front().estimation_kernel, policy, cfg);
        rec.h0 = h0_curve.minimizer;
        rec.h0_degenerate = h0_curve.degenerate;
        rec.ise_h0 = ise(density, sample, rec.h0, methods.front().estimation_kernel, cfg);

        rec.results.resize(methods.size());
        for (size_t m = 0; m < methods.size(); ++m) {
            const CriterionCurve& curve = curve_for(methods[m]);
            MethodResult& res = rec.results[m];
            res.degenerate = curve.degenerate;
            res.bandwidth = constants[m] * curve.minimizer;
            res.ise_value = ise(density, sample, res.bandwidth,
                                methods[m].estimation_kernel, cfg);
        }
        return rec;
    };

    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const unsigned workers = std::min<unsigned>(hw, static_cast<unsigned>(reps));
    if (workers <= 1) {
        for (int rep = 0; rep < reps; ++rep) report.records[rep] = run_replication(rep);
    } else {
        std::atomic<int> next{0};
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (int rep = next.fetch_add(1); rep < reps; rep = next.fetch_add(1))
                    report.records[rep] = run_replication(rep);
            });
        for (auto& t : pool) t.join();
    }

    // aggregation: deterministic fold in replication order
    std::vector<double> h0s;
    for (const auto& rec : report.records) {
        if (rec.h0_degenerate) {
            ++report.h0_excluded;
            continue;
        }
        h0s.push_back(rec.h0);
    }
    const double med_h0 = median(h0s);

    for (size_t m = 0; m < methods.size(); ++m) {
        MethodSummary summary;
        summary.name = methods[m].name;
        std::vector<double> bandwidths, ise_ratios;
        for (const auto& rec : report.records) {
            if (rec.h0_degenerate) continue;
            const MethodResult& res = rec.results[m];
            if (res.degenerate) {
                ++summary.excluded;
                continue;
            }
            bandwidths.push_back(res.bandwidth);
            ise_ratios.push_back((res.ise_value - rec.ise_h0) / rec.ise_h0);
        }
        summary.delta_b = (median(bandwidths) - med_h0) / med_h0 * 100.0;
        summary.delta_ise = median(ise_ratios) * 100.0;
        report.summaries.push_back(summary);
    }
    return report;
}

}  // namespace oscv
