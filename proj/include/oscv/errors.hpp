#pragma once

#include <stdexcept>
#include <string>

namespace oscv {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct QuadratureFailure : Error {
    using Error::Error;
};

struct NonIntegrableTail : Error {
    using Error::Error;
};

struct DegenerateKernel : Error {
    using Error::Error;
};

struct InvalidParam : Error {
    using Error::Error;
};

struct UnknownKernelLabel : Error {
    using Error::Error;
};

struct InvalidBandwidth : Error {
    using Error::Error;
};

struct InvalidSample : Error {
    using Error::Error;
};

struct DegenerateCriterion : Error {
    using Error::Error;
};

struct NotRobustKernel : Error {
    using Error::Error;
};

struct DivisionByZero : Error {
    using Error::Error;
};

struct InvalidSpec : Error {
    using Error::Error;
};

struct SmoothDensity : Error {
    using Error::Error;
};

struct DegenerateJumps : Error {
    using Error::Error;
};

struct ParseError : Error {
    using Error::Error;
};

struct FileNotFound : Error {
    using Error::Error;
};

}  // namespace oscv
