#pragma once

#include "wits/types.hpp"

#include <string>
#include <vector>

namespace wits {

enum class KernelFamily {
    Gaussian,  // scale * exp(-||x - y||^2 / bandwidth^2)
    Linear,    // scale * <x, y>; finite-dimensional, used by identity checks
};

/// Positive-definite kernel with a bandwidth and an overall scale.
///
/// The Gaussian family divides the squared distance by bandwidth^2, NOT by
/// 2 * bandwidth^2. Bandwidths taken from codebases that use the 2*sigma^2
/// convention must be multiplied by sqrt(2) to describe the same kernel.
struct Kernel {
    KernelFamily family = KernelFamily::Gaussian;
    double bandwidth = 1.0;
    double scale = 1.0;

    static Kernel gaussian(double bandwidth);
    static Kernel linear();

    /// Same kernel multiplied by a positive constant.
    [[nodiscard]] Kernel scaled(double gamma) const;

    [[nodiscard]] std::string describe() const;
};

using PointRef = Eigen::Ref<const Eigen::RowVectorXd>;

double eval_kernel(const Kernel& k, PointRef x, PointRef y);

/// |A| x |B| Gram matrix with entry (i, j) = k(A_i, B_j).
Matrix gram_matrix(const Kernel& k, const Sample& a, const Sample& b);

/// Symmetric Gram matrix of a sample with itself; the upper triangle is
/// computed and mirrored, so the result equals its transpose exactly.
Matrix gram_matrix(const Kernel& k, const Sample& a);

/// Pairwise squared Euclidean distances, used to rebuild Gaussian Gram
/// matrices for many bandwidths without recomputing geometry.
Matrix squared_distances(const Sample& a, const Sample& b);

/// Applies a Gaussian kernel elementwise to a squared-distance matrix.
Matrix gaussian_from_squared_distances(const Kernel& k, const Matrix& sq_dist);

/// `count` Gaussian kernels with bandwidths evenly spaced in log10 between
/// 10^log10_min and 10^log10_max, endpoints included.
std::vector<Kernel> bandwidth_grid(double log10_min, double log10_max, int count);

/// Median pairwise Euclidean distance over distinct pairs of `z`. With an
/// even number of pairs the two middle values are averaged.
double median_heuristic_bandwidth(const Sample& z);

}  // namespace wits
