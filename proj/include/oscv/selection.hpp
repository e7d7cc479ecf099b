#pragma once

#include <optional>
#include <string>
#include <vector>

#include "oscv/kernels.hpp"
#include "oscv/quadrature.hpp"

namespace oscv {

struct Sample {
    std::vector<double> observations;

    explicit Sample(std::vector<double> obs);
    int n() const { return static_cast<int>(observations.size()); }
};

// Bandwidth grid: n_points log-spaced between lo_factor * s * n^(-1/5) and
// hi_factor * s * n^(-1/5) with s = min(sd, IQR/1.349), unless absolute
// overrides are set.
struct GridPolicy {
    int n_points = 201;
    double lo_factor = 0.05;
    double hi_factor = 3.0;
    std::optional<double> lo_override;
    std::optional<double> hi_override;

    std::vector<double> make_grid(const Sample& sample) const;
};

// Robust scale estimate used by the grid policy; 0 for fully tied data.
double sample_scale(const Sample& sample);

struct CriterionCurve {
    std::vector<double> grid;
    std::vector<double> values;
    double minimizer = 0.0;
    std::vector<double> local_minima;  // refined interior local minimizers
    bool degenerate = false;           // global minimum at the lower grid edge
};

enum class SelectionMode { smooth, nonsmooth, robust, lscv };

std::string to_string(SelectionMode mode);
SelectionMode selection_mode_from_string(const std::string& s);

struct BandwidthSelection {
    double raw_minimizer = 0.0;  // hat b
    double constant = 1.0;       // C, C*, or 1
    double bandwidth = 0.0;      // constant * raw_minimizer
    SelectionMode mode = SelectionMode::smooth;
    CriterionCurve curve;

    // Throws DegenerateCriterion unless the curve is clean or the caller
    // explicitly overrides.
    double usable_bandwidth(bool allow_degenerate = false) const;
};

// Kernel density estimate at x.
double kde(const Sample& sample, double h, const Kernel& kernel, double x);

// OSCV_L(b) = R(hat f_{b,L}) - (2/n) sum_i hat f^{-i}_{b,L}(X_i) over the
// grid, with the global minimizer refined by golden-section search.
CriterionCurve oscv_curve(const Sample& sample, const Kernel& cv_kernel,
                          const std::vector<double>& grid);

// Classical least-squares cross-validation; same criterion with the
// two-sided kernel.
CriterionCurve lscv_curve(const Sample& sample, const Kernel& kernel,
                          const std::vector<double>& grid);

BandwidthSelection select(const Sample& sample, SelectionMode mode,
                          const Kernel& cv_kernel, const Kernel& estimation_kernel,
                          const GridPolicy& policy = {},
                          const QuadratureConfig& cfg = {});

}  // namespace oscv
