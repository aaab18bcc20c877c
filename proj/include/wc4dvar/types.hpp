#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace wc4dvar {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

// Invalid or inconsistent experiment configuration (CLI exit code 2).
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Numerical failure inside a solver or factorization (CLI exit code 3).
struct NumericalError : std::runtime_error {
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

// Dense assembly requested beyond the desk-scale cap (CLI exit code 4).
struct DenseCapError : std::runtime_error {
    explicit DenseCapError(const std::string& what) : std::runtime_error(what) {}
};

inline void require(bool cond, const std::string& what) {
    if (!cond) throw std::invalid_argument(what);
}

}  // namespace wc4dvar
