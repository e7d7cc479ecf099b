#pragma once

#include <functional>

#include "oscv/errors.hpp"

namespace oscv {

// Tolerances and truncation limits shared by the numerical layer.
struct QuadratureConfig {
    double abs_tol = 1e-10;
    double rel_tol = 1e-8;
    // Finite stand-in for infinite integration limits of Gaussian-tailed
    // integrands; phi(9) < 1.5e-18.
    double truncation_bound = 9.0;
    // Upper limit for the outer z-integrals of the B functional.
    double outer_grid_max = 12.0;

    void validate() const;
};

// Adaptive Gauss-Kronrod (G7/K15) integration of f over [a, b].
// Splits the segment with the largest error estimate until the summed
// error is below max(abs_tol, rel_tol*|result|); throws QuadratureFailure
// when the subdivision budget is exhausted first.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double abs_tol = 1e-10, double rel_tol = 1e-8,
                 int max_segments = 2000);

// Single non-adaptive G7/K15 pass; returns the K15 value and writes the
// error estimate. Building block for integrate(); exposed for reuse.
double gauss_kronrod_15(const std::function<double(double)>& f, double a,
                        double b, double& err_estimate);

}  // namespace oscv
