#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace wits {

/// A sample is a dense row-major matrix with one point per row.
using Sample = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

using Index = Eigen::Index;

// Error hierarchy. The CLI maps these onto exit codes:
// InvalidArgument -> 1, DataError -> 2, NumericalError -> 3.
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class DimensionMismatch : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline void require(bool cond, const std::string& what) {
    if (!cond) throw InvalidArgument(what);
}

inline void require_same_dim(const Sample& a, const Sample& b, const char* where) {
    if (a.cols() != b.cols()) {
        throw DimensionMismatch(std::string(where) + ": dimension mismatch (" +
                                std::to_string(a.cols()) + " vs " + std::to_string(b.cols()) + ")");
    }
}

inline void require_nonempty(const Sample& a, const char* where) {
    if (a.rows() == 0 || a.cols() == 0) throw InvalidArgument(std::string(where) + ": empty sample");
}

}  // namespace detail

}  // namespace wits
