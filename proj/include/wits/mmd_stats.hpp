#pragma once

#include "wits/kernel.hpp"

namespace wits {

enum class MmdEstimator { VStatistic, UStatistic };

struct MmdEstimate {
    double value = 0.0;
    MmdEstimator estimator = MmdEstimator::VStatistic;
};

/// Biased (V-statistic) estimate of MMD^2:
///   mean k(x,x') + mean k(y,y') - 2 mean k(x,y)
/// over all ordered pairs, diagonal included. Nonnegative up to rounding.
double mmd_v_statistic(const Kernel& k, const Sample& x, const Sample& y);

/// Same estimate from a pooled Gram matrix whose first `n` rows belong to X.
double mmd_v_statistic_from_gram(const Matrix& pooled_gram, Index n);

/// Paired H-Gram: H_ij = k(x_i,x_j) + k(y_i,y_j) - k(x_i,y_j) - k(x_j,y_i).
/// Requires |X| = |Y|.
Matrix h_gram(const Kernel& k, const Sample& x, const Sample& y);

/// Unbiased U-statistic over paired samples, normalised by n(n-1).
double mmd_u_statistic(const Kernel& k, const Sample& x, const Sample& y);

/// Plug-in estimate of the asymptotic variance of the U-statistic under the
/// alternative, 4 (E[H12 H13] - E[H12]^2), with distinct-index averages.
/// Floored at zero. Requires n >= 3.
double sigma_h1_squared(const Kernel& k, const Sample& x, const Sample& y);

/// Kernel-selection criterion MMD_u^2 / sqrt(sigma_H1^2 + eps).
double j_criterion(const Kernel& k, const Sample& x, const Sample& y, double eps = 1e-8);

/// J evaluated with the empirical measures of X and Y taken as the
/// populations P and Q (i.i.d. draws with replacement), so every expectation
/// is exact. No regulariser; throws if the variance vanishes.
double j_criterion_population(const Kernel& k, const Sample& x, const Sample& y);

MmdEstimate mmd_estimate(const Kernel& k, const Sample& x, const Sample& y, MmdEstimator which);

}  // namespace wits
