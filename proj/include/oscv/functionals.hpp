#pragma once

#include <vector>

#include "oscv/kernels.hpp"
#include "oscv/quadrature.hpp"

namespace oscv {

// R(g) = int g^2
double roughness(const Kernel& g, const QuadratureConfig& cfg = {});

// mu_2(g) = int u^2 g(u) du
double second_moment(const Kernel& g, const QuadratureConfig& cfg = {});

// D_g(z) = int_{-inf}^z g
double partial_mass(const Kernel& g, double z, const QuadratureConfig& cfg = {});

// G_g(z) = int_{-inf}^z u g(u) du
double partial_first_moment(const Kernel& g, double z, const QuadratureConfig& cfg = {});

// Cached D_g/G_g profile on a uniform grid over the kernel support, cubic
// Hermite between nodes with the exact slopes D' = g and G' = z g.
// Immutable once built.
class KernelProfile {
public:
    KernelProfile(const Kernel& g, const QuadratureConfig& cfg = {}, int n_points = 2048);

    double mass_below(double z) const;          // D_g(z)
    double first_moment_below(double z) const;  // G_g(z)
    double total_mass() const { return d_.back(); }

private:
    double interpolate(const std::vector<double>& y, const std::vector<double>& s,
                       double z) const;

    double lo_, hi_, step_;
    std::vector<double> d_, g_;          // node values
    std::vector<double> d_slope_, g_slope_;
};

// B(g) of the nonsmooth bias expansion:
//   int_0^inf {z(1 - D_g(z)) + G_g(z)}^2 dz + int_0^inf {z D_g(-z) + G_g(-z)}^2 dz.
// The outer truncation extends past cfg.outer_grid_max when the kernel
// support does; throws NonIntegrableTail when the integrand at the
// truncation point is still above 1e-10.
double b_functional(const Kernel& g, const QuadratureConfig& cfg = {});

// Cache-free reference path: every D/G evaluation is a fresh adaptive
// quadrature. Slow; used to validate the profile cache.
double b_functional_direct(const Kernel& g, const QuadratureConfig& cfg = {});

}  // namespace oscv
