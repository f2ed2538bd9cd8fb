#pragma once

#include "wits/types.hpp"
#include "wits/witness.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace wits {

struct TwoSample {
    Sample x;
    Sample y;
    std::string descriptor;
};

struct SplitData {
    Sample xtr, ytr, xte, yte;
    double ratio = 0.5;
    // Row indices into the original X and Y for each part.
    std::vector<Index> xtr_index, xte_index, ytr_index, yte_index;
};

/// 2x2 covariance stored row-major.
using Cov2 = std::array<double, 4>;

/// Blob grid parameters shared by both Blobs generators.
namespace blobs {
inline constexpr int kGridSide = 3;               // centers {0, 1, 2}^2
inline constexpr Cov2 kRotatedBase = {0.03, 0.0, 0.0, 0.01};
inline constexpr double kLiuIsotropicVariance = 0.03;

/// Covariance of Q's blob `index` (row-major over the grid) in the
/// multi-covariance variant.
Cov2 liu_q_covariance(int index);

/// R(theta) C R(theta)^T.
Cov2 rotate(const Cov2& c, double theta);
}  // namespace blobs

/// Nine-blob mixture on a 3x3 grid. P uses covariance C = diag(0.03, 0.01);
/// Q uses R(theta) C R(theta)^T. theta = 0 gives P = Q.
TwoSample blobs_rotated(Index n, Index m, double theta, std::uint64_t seed);

/// Nine-blob mixture with isotropic P (0.03 I) and per-blob anisotropic Q.
/// With `null_mode` both samples are drawn from P.
TwoSample blobs_liu(Index n, Index m, std::uint64_t seed, bool null_mode = false);

struct CsvOptions {
    std::optional<std::vector<int>> columns;  // 0-based; all columns when absent
    char delimiter = ',';
};

/// Reads a numeric CSV with a header row into one point per data row.
Sample load_csv(const std::string& path, const CsvOptions& options = {});

/// Writes a sample as CSV with header x0, x1, ... using shortest round-trip
/// formatting, so load_csv reproduces every value bit-exactly.
void write_csv(const std::string& path, const Sample& s, char delimiter = ',');

/// Uniform subset of rows without replacement, in random order.
Sample subsample_without_replacement(const Sample& s, Index size, std::uint64_t seed);

/// Random per-class index partition with n_tr = ceil(r n).
SplitData split(const TwoSample& ts, SplitRatio r, std::uint64_t seed);

}  // namespace wits
