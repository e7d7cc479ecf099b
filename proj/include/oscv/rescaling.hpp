#pragma once

#include <string>
#include <vector>

#include "oscv/functionals.hpp"
#include "oscv/kernels.hpp"

namespace oscv {

// One (estimation kernel, cv kernel) row of rescaling constants.
struct ConstantsRecord {
    std::string estimation_kernel;
    std::string cv_kernel;
    double c_smooth = 0.0;
    double c_nonsmooth = 0.0;
    double e_c_percent = 0.0;
};

// C = (R(K)/R(L) * mu2(L)^2/mu2(K)^2)^(1/5); hat h = C * hat b in the
// smooth case.
double constant_smooth(const Kernel& estimation, const Kernel& cv,
                       const QuadratureConfig& cfg = {});

// C* = (R(K)/B(K) * B(L)/R(L))^(1/4); hat h = C* * hat b in the nonsmooth
// case.
double constant_nonsmooth(const Kernel& estimation, const Kernel& cv,
                          const QuadratureConfig& cfg = {});

// E_C = (C/C* - 1) * 100, in percent. Positive means the smooth constant
// oversmooths a nonsmooth target.
double relative_bias(double c_smooth, double c_nonsmooth);

ConstantsRecord make_constants_record(const Kernel& estimation, const Kernel& cv,
                                      const QuadratureConfig& cfg = {});

struct ScanHit {
    LIParams params;
    double e_c_percent = 0.0;
    bool refined = false;  // true when found by bisection on a sign change
};

struct ScanSkip {
    double alpha = 0.0;
    double sigma = 0.0;
    std::string reason;
};

struct ScanResult {
    std::vector<ScanHit> hits;      // |E_C| <= threshold, sorted by |E_C|
    std::vector<ScanSkip> skipped;  // degenerate or failed grid points
};

// Grid scan of the L_I family for robust kernels (K = gaussian). Rows run
// over sigma; a sign change of E_C between adjacent alpha cells triggers
// bisection refinement of the root to |E_C| < 0.01.
ScanResult scan_robust(double alpha_lo, double alpha_hi, double alpha_step,
                       double sigma_lo, double sigma_hi, double sigma_step,
                       double threshold_percent, const QuadratureConfig& cfg = {});

}  // namespace oscv
