#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "oscv/densities.hpp"
#include "oscv/rescaling.hpp"
#include "oscv/selection.hpp"

namespace oscv {

// ISE_K(h) = int (hat f_{h,K} - f)^2 over the density's effective support
// union the sample range padded by 6h.
double ise(const TestDensity& density, const Sample& sample, double h,
           const Kernel& kernel, const QuadratureConfig& cfg = {});

// ISE(h) profile over the grid policy; minimizer is hat h_0.
CriterionCurve ise_profile(const TestDensity& density, const Sample& sample,
                           const Kernel& kernel, const GridPolicy& policy = {},
                           const QuadratureConfig& cfg = {});

// hat h_0; throws DegenerateCriterion when the ISE minimum sits at the
// lower grid edge.
double ise_optimal_bandwidth(const TestDensity& density, const Sample& sample,
                             const Kernel& kernel, const GridPolicy& policy = {},
                             const QuadratureConfig& cfg = {});

// AMISE*_K(h) = R(K)/(nh) + h^3 B(K) sum_t jump_t^2 for a cusped density.
double amise_nonsmooth(const TestDensity& density, const Kernel& kernel, double h,
                       int n, const QuadratureConfig& cfg = {});

// Closed-form minimizer of AMISE*: (R(K) / (3 B(K) sum jump^2))^(1/4) n^(-1/4).
double h_star(const TestDensity& density, const Kernel& kernel, int n,
              const QuadratureConfig& cfg = {});

enum class MethodKind { lscv, oscv_smooth, oscv_nonsmooth, oscv_robust };

struct MethodSpec {
    MethodKind kind = MethodKind::oscv_smooth;
    Kernel cv_kernel;       // ignored for lscv
    Kernel estimation_kernel;
    std::string name;       // report key, e.g. "oscv_smooth"

    static MethodSpec lscv(Kernel estimation);
    static MethodSpec oscv(MethodKind kind, Kernel cv, Kernel estimation);
};

struct MethodResult {
    double bandwidth = 0.0;
    double ise_value = 0.0;
    bool degenerate = false;
};

struct ReplicationRecord {
    std::uint64_t seed = 0;
    double h0 = 0.0;
    double ise_h0 = 0.0;
    bool h0_degenerate = false;
    std::vector<MethodResult> results;  // one per method, method order
};

struct MethodSummary {
    std::string name;
    double delta_b = 0.0;
    double delta_ise = 0.0;
    int excluded = 0;  // degenerate selections left out of the medians
};

struct SimulationReport {
    std::string density_label;
    int n = 0;
    int replications = 0;
    std::uint64_t master_seed = 0;
    std::vector<ReplicationRecord> records;
    std::vector<MethodSummary> summaries;
    int h0_excluded = 0;
};

// Per-replication seed: pure function of (master seed, replication index).
std::uint64_t replication_seed(std::uint64_t master_seed, int replication);

// Sample median (mean of the two middle order statistics for even length).
double median(std::vector<double> values);

// Monte Carlo study. Per replication: draw a sample, run each method,
// locate hat h_0, evaluate ISE at every bandwidth. Aggregates
//   Delta_B   = (med(hat h) - med(hat h_0)) / med(hat h_0) * 100
//   Delta_ISE = med((ISE(hat h) - ISE(hat h_0)) / ISE(hat h_0)) * 100.
// Degenerate selections are excluded from the medians and counted.
SimulationReport monte_carlo_study(const TestDensity& density, int n, int reps,
                                   const std::vector<MethodSpec>& methods,
                                   std::uint64_t master_seed,
                                   const GridPolicy& policy = {},
                                   const QuadratureConfig& cfg = {});

}  // namespace oscv
