#pragma once

#include "wits/kernel.hpp"
#include "wits/witness.hpp"

#include <cstdint>
#include <vector>

namespace wits {

/// Search space of (kernel, lambda) candidates.
struct ParamGrid {
    std::vector<Kernel> kernels;
    std::vector<double> lambdas;

    void validate() const;
    [[nodiscard]] std::size_t size() const { return kernels.size() * lambdas.size(); }

    /// Ten Gaussian bandwidths on [1e-3, 1e1] and five lambdas on [1e-4, 1e3],
    /// both log-spaced.
    static ParamGrid defaults();
};

/// Index partition of one cross-validation fold. Indices refer to rows of
/// X_tr and Y_tr separately.
struct FoldSplit {
    std::vector<Index> x_train, x_valid;
    std::vector<Index> y_train, y_valid;
};

struct CandidateScore {
    Kernel kernel;
    double lambda = 0.0;
    std::vector<double> fold_scores;  // -inf for degenerate folds
    double mean_score = 0.0;
};

struct CvReport {
    std::vector<CandidateScore> candidates;  // grid order: kernels outer, lambdas inner
    Kernel kernel;
    double lambda = 0.0;
    double best_score = 0.0;
    std::uint64_t fold_seed = 0;
    int folds = 0;
};

/// Class-stratified k-fold partition; each point is validated exactly once.
std::vector<FoldSplit> kfold_split(Index n, Index m, int folds, std::uint64_t seed);
std::vector<FoldSplit> kfold_split(const Sample& xtr, const Sample& ytr, int folds, std::uint64_t seed);

/// Grid search scored by mean validation SNR of exact KFDA witnesses fitted on
/// the training folds. Ties prefer the larger lambda, then the larger
/// bandwidth. Only Stage-I data enter this routine.
CvReport grid_search_cv(const ParamGrid& grid, const Sample& xtr, const Sample& ytr, int folds, std::uint64_t seed);

/// Same search over explicit folds.
CvReport grid_search_cv(const ParamGrid& grid, const Sample& xtr, const Sample& ytr,
                        const std::vector<FoldSplit>& folds);

}  // namespace wits
