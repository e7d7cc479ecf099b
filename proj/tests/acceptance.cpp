// Acceptance suite: one line per criterion, nonzero exit when any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "oscv/densities.hpp"
#include "oscv/functionals.hpp"
#include "oscv/rescaling.hpp"
#include "oscv/selection.hpp"
#include "oscv/simulation.hpp"

using namespace oscv;
namespace fs = std::filesystem;

namespace {

struct Check {
    bool ok = true;
    std::string detail;

    void require(bool cond, const std::string& what) {
        if (!cond) {
            ok = false;
            if (!detail.empty()) detail += "; ";
            detail += what;
        }
    }
    void note(const std::string& what) {
        if (!detail.empty()) detail += "; ";
        detail += what;
    }
};

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

double rel_diff(double a, double b) {
    const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
    return std::abs(a - b) / scale;
}

// the twenty fixed-seed samples shared by criteria 3 and 4
std::vector<Sample> oracle_samples() {
    std::vector<Sample> samples;
    const TestDensity normal = make_density("normal");
    const TestDensity cusped = make_density("cusped7");
    for (int i = 0; i < 10; ++i) {
        const int n = 20 + 3 * i;  // 20 .. 47
        samples.push_back(sample_density(normal, n, 1000 + i));
        samples.push_back(sample_density(cusped, n, 2000 + i));
    }
    return samples;
}

QuadratureConfig mc_config() {
    QuadratureConfig cfg;
    cfg.abs_tol = 1e-9;
    cfg.rel_tol = 1e-7;
    return cfg;
}

}  // namespace

int main() {
    int failures = 0;
    int index = 0;

    auto report = [&](const std::string& name, const std::function<void(Check&)>& body,
                      double time_limit_s = 0.0) {
        ++index;
        Check check;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            body(check);
        } catch (const std::exception& e) {
            check.require(false, std::string("exception: ") + e.what());
        }
        const double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (time_limit_s > 0.0)
            check.require(elapsed < time_limit_s,
                          "runtime " + fmt(elapsed) + "s over limit " + fmt(time_limit_s) + "s");
        if (!check.ok) ++failures;
        std::printf("%s  criterion %2d: %s (%.1fs%s%s)\n", check.ok ? "PASS" : "FAIL", index,
                    name.c_str(), elapsed, check.detail.empty() ? "" : "; ",
                    check.detail.c_str());
        std::fflush(stdout);
    };

    auto skip = [&](const std::string& name, const std::string& why) {
        ++index;
        std::printf("SKIP  criterion %2d: %s (%s)\n", index, name.c_str(), why.c_str());
        std::fflush(stdout);
    };

    const Kernel gaussian = make_base_kernel(BaseKernel::gaussian);
    const Kernel lg = make_one_sided(gaussian);

    // 1 -------------------------------------------------------------------
    report(
        "Table 1 golden constants",
        [&](Check& c) {
            struct Row {
                const char* label;
                double cs, cn, ec;
            };
            const Row rows[] = {{"epanechnikov", 0.5371, 0.5019, 7.01},
                                {"quartic", 0.5573, 0.5206, 7.05},
                                {"gaussian", 0.6168, 0.5730, 7.64}};
            for (const Row& row : rows) {
                const Kernel k = kernel_from_label(row.label);
                const ConstantsRecord rec = make_constants_record(k, make_one_sided(k));
                c.require(std::abs(rec.c_smooth - row.cs) < 5e-4,
                          std::string(row.label) + " C=" + fmt(rec.c_smooth));
                c.require(std::abs(rec.c_nonsmooth - row.cn) < 5e-4,
                          std::string(row.label) + " C*=" + fmt(rec.c_nonsmooth));
                c.require(std::abs(rec.e_c_percent - row.ec) < 0.05,
                          std::string(row.label) + " E_C=" + fmt(rec.e_c_percent));
            }
        },
        10.0);

    // 2 -------------------------------------------------------------------
    report(
        "robust-kernel verification",
        [&](Check& c) {
            const ConstantsRecord robust =
                make_constants_record(gaussian, make_LI(16.8954588, 1.01));
            c.require(std::abs(robust.e_c_percent) < 0.1,
                      "LI(16.8954588,1.01) E_C=" + fmt(robust.e_c_percent));

            const Kernel li48 = make_LI(4.0, 0.8);
            const ConstantsRecord almost = make_constants_record(gaussian, li48);
            c.require(std::abs(almost.e_c_percent - 1.17) < 0.05,
                      "LI(4,0.8) E_C=" + fmt(almost.e_c_percent));
            c.require(li48(0.0) == 0.0, "LI(4,0.8)(0) != 0");

            for (const char* label : {"L1", "L2", "L3"}) {
                const ConstantsRecord rec =
                    make_constants_record(gaussian, kernel_from_label(label));
                c.require(std::abs(rec.e_c_percent) < 0.3,
                          std::string(label) + " E_C=" + fmt(rec.e_c_percent));
            }
        },
        30.0);

    // 3 -------------------------------------------------------------------
    report(
        "criterion oracle equivalence on 20 fixed-seed samples",
        [&](Check& c) {
            GridPolicy policy;
            policy.n_points = 25;
            double worst = 0.0;
            for (const Sample& s : oracle_samples()) {
                const std::vector<double> grid = policy.make_grid(s);
                const CriterionCurve oscv = oscv_curve(s, lg, grid);
                const CriterionCurve lscv = lscv_curve(s, gaussian, grid);
                for (size_t i = 0; i < grid.size(); ++i) {
                    const double ref_o =
                        oracles::brute_criterion(s.observations, lg, grid[i]);
                    const double ref_l =
                        oracles::brute_criterion(s.observations, gaussian, grid[i]);
                    worst = std::max({worst, rel_diff(oscv.values[i], ref_o),
                                      rel_diff(lscv.values[i], ref_l)});
                }
            }
            c.require(worst < 1e-9, "worst relative deviation " + fmt(worst));
            c.note("worst rel dev " + fmt(worst));
        },
        60.0);

    // 4 -------------------------------------------------------------------
    report("shared-minimizer ratio equals C/C*", [&](Check& c) {
        const double ratio_expected = constant_smooth(gaussian, lg) /
                                      constant_nonsmooth(gaussian, lg);
        c.require(std::abs(ratio_expected - 1.0764) < 0.001,
                  "C/C* = " + fmt(ratio_expected));
        GridPolicy policy;
        policy.n_points = 61;
        for (const Sample& s : oracle_samples()) {
            const BandwidthSelection smooth =
                select(s, SelectionMode::smooth, lg, gaussian, policy);
            const BandwidthSelection nonsmooth =
                select(s, SelectionMode::nonsmooth, lg, gaussian, policy);
            c.require(smooth.raw_minimizer == nonsmooth.raw_minimizer,
                      "raw minimizers differ");
            c.require(rel_diff(smooth.bandwidth / nonsmooth.bandwidth, ratio_expected) <
                          1e-12,
                      "bandwidth ratio deviates");
        }
    });

    // 5 -------------------------------------------------------------------
    report("h_star over b_star reproduces C*", [&](Check& c) {
        const double c_star = constant_nonsmooth(gaussian, lg);
        for (const char* name : {"laplace", "cusped7"}) {
            const TestDensity d = make_density(name);
            for (int n : {100, 500}) {
                const double ratio = h_star(d, gaussian, n) / h_star(d, lg, n);
                c.require(std::abs(ratio - c_star) < 5e-4,
                          std::string(name) + " n=" + std::to_string(n) + " ratio " +
                              fmt(ratio) + " vs C* " + fmt(c_star));
            }
        }
    });

    // 6 -------------------------------------------------------------------
    report(
        "smooth-case Monte Carlo sanity (median within 15% of 0.4224)",
        [&](Check& c) {
            const TestDensity normal = make_density("normal");
            std::vector<double> selected;
            int degenerate = 0;
            for (int rep = 0; rep < 200; ++rep) {
                const Sample s = sample_density(normal, 100, replication_seed(1, rep));
                const BandwidthSelection sel =
                    select(s, SelectionMode::smooth, lg, gaussian);
                if (sel.curve.degenerate) {
                    ++degenerate;
                    continue;
                }
                selected.push_back(sel.bandwidth);
            }
            const double med = median(selected);
            c.note("median " + fmt(med) + ", target 0.4224, ratio " + fmt(med / 0.4224) +
                   ", degenerate " + std::to_string(degenerate));
            c.require(std::abs(med / 0.4224 - 1.0) <= 0.15,
                      "median off the normal-reference optimum by more than 15%");
        },
        300.0);

    // 7 -------------------------------------------------------------------
    report(
        "directional Table 2 ordering on cusped7",
        [&](Check& c) {
            const TestDensity d = make_density("cusped7");
            const std::vector<MethodSpec> methods = {
                MethodSpec::oscv(MethodKind::oscv_smooth, lg, gaussian),
                MethodSpec::oscv(MethodKind::oscv_nonsmooth, lg, gaussian)};
            const SimulationReport rep =
                monte_carlo_study(d, 500, 200, methods, 2, {}, mc_config());
            const double db_s = rep.summaries[0].delta_b;
            const double db_n = rep.summaries[1].delta_b;
            const double di_s = rep.summaries[0].delta_ise;
            const double di_n = rep.summaries[1].delta_ise;
            c.note("Delta_B " + fmt(db_s) + " / " + fmt(db_n) + ", Delta_ISE " + fmt(di_s) +
                   " / " + fmt(di_n) + ", excluded " +
                   std::to_string(rep.summaries[0].excluded) + "+" +
                   std::to_string(rep.summaries[1].excluded));
            c.require(db_s > db_n, "Delta_B(smooth) <= Delta_B(nonsmooth)");
            c.require(db_n > 0.0, "Delta_B(nonsmooth) <= 0");
            c.require(di_s > di_n, "Delta_ISE(smooth) <= Delta_ISE(nonsmooth)");
        },
        1200.0);

    // 8 -------------------------------------------------------------------
    report("degeneracy detection on tied samples", [&](Check& c) {
        const Sample tied(std::vector<double>(60, 3.25));
        const Kernel robust_kernel = make_LI(16.8954588, 1.01);
        struct ModeCase {
            SelectionMode mode;
            const Kernel* cv;
        };
        const ModeCase cases[] = {{SelectionMode::lscv, &lg},
                                  {SelectionMode::smooth, &lg},
                                  {SelectionMode::nonsmooth, &lg},
                                  {SelectionMode::robust, &robust_kernel}};
        for (const ModeCase& mc : cases) {
            const BandwidthSelection sel = select(tied, mc.mode, *mc.cv, gaussian);
            c.require(sel.curve.degenerate,
                      to_string(mc.mode) + " not flagged degenerate");
            bool threw = false;
            try {
                (void)sel.usable_bandwidth();
            } catch (const DegenerateCriterion&) {
                threw = true;
            }
            c.require(threw, to_string(mc.mode) + " yielded a usable bandwidth");
        }
    });

    // 9 -------------------------------------------------------------------
    {
        const fs::path geyser = fs::path(OSCV_SOURCE_DIR) / "data" / "geyser.csv";
        if (!fs::exists(geyser)) {
            skip("real-data bandwidths (geyser)", "dataset not present at data/geyser.csv");
        } else {
            report("real-data bandwidths (geyser)", [&](Check& c) {
                std::ifstream in(geyser);
                std::vector<double> values;
                std::string line;
                while (std::getline(in, line)) {
                    if (line.empty()) continue;
                    try {
                        values.push_back(std::stod(line));
                    } catch (...) {
                        // header
                    }
                }
                const Sample s(values);
                c.note("n=" + std::to_string(s.n()));
                const BandwidthSelection smooth =
                    select(s, SelectionMode::smooth, lg, gaussian);
                const BandwidthSelection lscv =
                    select(s, SelectionMode::lscv, lg, gaussian);
                c.note("OSCV " + fmt(smooth.bandwidth) + ", LSCV " + fmt(lscv.bandwidth));
                c.require(std::abs(smooth.bandwidth - 0.1256) < 0.001,
                          "smooth OSCV bandwidth " + fmt(smooth.bandwidth));
                c.require(std::abs(lscv.bandwidth - 0.1021) < 0.001,
                          "LSCV bandwidth " + fmt(lscv.bandwidth));
            });
        }
    }

    // 10 ------------------------------------------------------------------
    report("property suite (>= 100 randomized cases each)", [&](Check& c) {
        oracles::NormalStream rng(20250810);

        // unit mass and zero first moment across random L_I kernels
        int checked = 0;
        for (int i = 0; i < 120; ++i) {
            const double alpha = -2.0 + 22.0 * rng.next_uniform();
            const double sigma = 0.3 + 2.7 * rng.next_uniform();
            Kernel k = gaussian;
            try {
                k = make_LI(alpha, sigma);
            } catch (const DegenerateKernel&) {
                continue;  // c == 0 cell
            }
            const double mass =
                integrate([&k](double u) { return k(u); }, k.lo(), k.hi(), 1e-12, 1e-10);
            const double moment = integrate([&k](double u) { return u * k(u); }, k.lo(),
                                            k.hi(), 1e-12, 1e-10);
            if (std::abs(mass - 1.0) >= 1e-8)
                c.require(false, "mass off for LI(" + fmt(alpha) + "," + fmt(sigma) + ")");
            if (std::abs(moment) >= 1e-8)
                c.require(false, "moment off for LI(" + fmt(alpha) + "," + fmt(sigma) + ")");
            ++checked;
        }
        c.require(checked >= 100, "too few valid L_I cases");

        // affine equivariance of select() across random samples and maps
        const double c_smooth_lg = constant_smooth(gaussian, lg);
        (void)c_smooth_lg;
        GridPolicy policy;
        policy.n_points = 41;
        const SelectionMode modes[] = {SelectionMode::smooth, SelectionMode::nonsmooth,
                                       SelectionMode::lscv};
        for (int i = 0; i < 102; ++i) {
            const int n = 20 + static_cast<int>(rng.next_uniform() * 40);
            std::vector<double> x(n);
            for (double& v : x) v = rng();
            const double a = 0.5 + 2.5 * rng.next_uniform();
            const double shift = -5.0 + 10.0 * rng.next_uniform();
            std::vector<double> y(n);
            for (int j = 0; j < n; ++j) y[j] = a * x[j] + shift;
            const SelectionMode mode = modes[i % 3];
            const BandwidthSelection bx = select(Sample(x), mode, lg, gaussian, policy);
            const BandwidthSelection by = select(Sample(y), mode, lg, gaussian, policy);
            if (bx.curve.degenerate || by.curve.degenerate) continue;
            if (rel_diff(by.bandwidth, a * bx.bandwidth) >= 1e-6)
                c.require(false, "affine equivariance broke at case " + std::to_string(i));
        }

        // determinism by seed
        const TestDensity cusped = make_density("cusped7");
        for (int i = 0; i < 100; ++i) {
            const std::uint64_t seed =
                static_cast<std::uint64_t>(rng.next_uniform() * 1e18);
            const Sample s1 = sample_density(cusped, 25, seed);
            const Sample s2 = sample_density(cusped, 25, seed);
            if (!(s1.observations == s2.observations))
                c.require(false, "sampler not deterministic at seed " + std::to_string(seed));
        }

        // B functional vs the dense-grid oracle on random L_I kernels
        int b_checked = 0;
        double worst_b = 0.0;
        for (int i = 0; i < 110; ++i) {
            const double alpha = -1.5 + 8.0 * rng.next_uniform();
            const double sigma = 0.3 + 1.7 * rng.next_uniform();
            Kernel k = gaussian;
            try {
                k = make_LI(alpha, sigma);
            } catch (const DegenerateKernel&) {
                continue;
            }
            const double fast = b_functional(k);
            const double ref = oracles::dense_trapezoid_b(k);
            worst_b = std::max(worst_b, rel_diff(fast, ref));
            ++b_checked;
        }
        c.require(b_checked >= 100, "too few valid B cases");
        c.require(worst_b < 1e-6, "worst B deviation " + fmt(worst_b));
        c.note("worst B rel dev " + fmt(worst_b));
    });

    std::printf("%d of %d criteria failed\n", failures, index);
    return failures == 0 ? 0 : 1;
}
