#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace varsolve {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad matrix/vector sizes (zero order, mismatched dimensions).
class InvalidDimensionError : public Error {
public:
    using Error::Error;
};

/// Violated structural requirement (asymmetry, loss of positive-definiteness).
class StructuralError : public Error {
public:
    using Error::Error;
};

/// An iterative routine failed to converge; the message carries diagnostics.
class NumericalError : public Error {
public:
    NumericalError(const std::string& what, double achieved)
        : Error(what), achieved_error(achieved) {}
    explicit NumericalError(const std::string& what)
        : Error(what), achieved_error(std::numeric_limits<double>::quiet_NaN()) {}

    double achieved_error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Which end of the t-axis an asymptotic statement refers to.
enum class Regime { at_infinity, at_zero };

inline const char* to_string(Regime r) {
    return r == Regime::at_infinity ? "infinity" : "zero";
}

/// Format with 17 significant digits (round-trip safe for doubles).
inline std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

inline double norm2(const std::vector<double>& u) {
    double s = 0.0;
    for (double x : u) s += x * x;
    return std::sqrt(s);
}

inline double norm_inf(const std::vector<double>& u) {
    double m = 0.0;
    for (double x : u) m = std::max(m, std::abs(x));
    return m;
}

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

using Rng = std::mt19937_64;

} // namespace varsolve
