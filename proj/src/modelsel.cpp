#include "wits/modelsel.hpp"

#include "wits/random.hpp"

#include <cmath>
#include <limits>

namespace wits {

void ParamGrid::validate() const {
    detail::require(!kernels.empty(), "ParamGrid: no kernels");
    detail::require(!lambdas.empty(), "ParamGrid: no lambdas");
    for (double l : lambdas) detail::require(l > 0.0, "ParamGrid: lambdas must be positive");
}

ParamGrid ParamGrid::defaults() {
    ParamGrid g;
    g.kernels = bandwidth_grid(-3.0, 1.0, 10);
    for (int i = 0; i < 5; ++i) g.lambdas.push_back(std::pow(10.0, -4.0 + 7.0 * i / 4.0));
    return g;
}

std::vector<FoldSplit> kfold_split(Index n, Index m, int folds, std::uint64_t seed) {
    detail::require(folds >= 2, "kfold_split: need at least two folds");
    if (n < folds || m < folds) throw InvalidArgument("kfold_split: each class needs at least `folds` points");
    Rng rng(seed);
    std::vector<FoldSplit> out(static_cast<std::size_t>(folds));
    auto assign = [&](Index count, auto member_train, auto member_valid) {
        std::vector<Index> order = sample_indices(count, count, rng);
        for (Index pos = 0; pos < count; ++pos) {
            const auto fold = static_cast<std::size_t>(pos % folds);
            for (std::size_t f = 0; f < out.size(); ++f) {
                if (f == fold) (out[f].*member_valid).push_back(order[static_cast<std::size_t>(pos)]);
                else (out[f].*member_train).push_back(order[static_cast<std::size_t>(pos)]);
            }
        }
    };
    assign(n, &FoldSplit::x_train, &FoldSplit::x_valid);
    assign(m, &FoldSplit::y_train, &FoldSplit::y_valid);
    return out;
}

std::vector<FoldSplit> kfold_split(const Sample& xtr, const Sample& ytr, int folds, std::uint64_t seed) {
    return kfold_split(xtr.rows(), ytr.rows(), folds, seed);
}

namespace {

// Pooled Gram matrices for each kernel are built once and sliced per fold.
class PooledGrams {
public:
    PooledGrams(const Sample& xtr, const Sample& ytr) : z_(pool(xtr, ytr)), n_(xtr.rows()) {}

    Matrix gram(const Kernel& k) {
        if (k.family == KernelFamily::Gaussian) {
            if (sq_dist_.size() == 0) sq_dist_ = squared_distances(z_, z_);
            return gaussian_from_squared_distances(k, sq_dist_);
        }
        return gram_matrix(k, z_);
    }

    // Pooled row indices for a fold: X rows first, then Y rows offset by n.
    [[nodiscard]] std::vector<Index> pooled(const std::vector<Index>& xi, const std::vector<Index>& yi) const {
        std::vector<Index> out(xi);
        for (Index j : yi) out.push_back(n_ + j);
        return out;
    }

private:
    Sample z_;
    Index n_;
    Matrix sq_dist_;
};

Matrix slice(const Matrix& g, const std::vector<Index>& rows, const std::vector<Index>& cols) {
    Matrix out(static_cast<Index>(rows.size()), static_cast<Index>(cols.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < cols.size(); ++j) out(static_cast<Index>(i), static_cast<Index>(j)) = g(rows[i], cols[j]);
    }
    return out;
}

constexpr double kVarianceFloor = 1e-12;

double validation_score(const Matrix& gram, const FoldSplit& fold, const PooledGrams& grams, double lambda) {
    const auto train = grams.pooled(fold.x_train, fold.y_train);
    const auto valid_x = grams.pooled(fold.x_valid, {});
    const auto valid_y = grams.pooled({}, fold.y_valid);
    const auto ntr = static_cast<Index>(fold.x_train.size());
    const auto mtr = static_cast<Index>(fold.y_train.size());

    KfdaSolution sol;
    try {
        sol = solve_kfda(slice(gram, train, train), pooled_labels(ntr, mtr), lambda, default_proportion(ntr, mtr));
    } catch (const NumericalError&) {
        return -std::numeric_limits<double>::infinity();
    }
    const double sign = sol.mean_difference >= 0.0 ? 1.0 : -1.0;
    const Vector hx = sign * (slice(gram, valid_x, train) * sol.alpha);
    const Vector hy = sign * (slice(gram, valid_y, train) * sol.alpha);

    const double vx = (hx.array() - hx.mean()).square().sum();
    const double vy = (hy.array() - hy.mean()).square().sum();
    if (vx == 0.0 && vy == 0.0) return -std::numeric_limits<double>::infinity();
    const auto nv = static_cast<Index>(hx.size());
    const auto mv = static_cast<Index>(hy.size());
    return snr_from_values(hx, hy, default_proportion(nv, mv), kVarianceFloor);
}

bool better(const CandidateScore& a, const CandidateScore& b) {
    if (a.mean_score != b.mean_score) return a.mean_score > b.mean_score;
    if (a.lambda != b.lambda) return a.lambda > b.lambda;
    return a.kernel.bandwidth > b.kernel.bandwidth;
}

}  // namespace

CvReport grid_search_cv(const ParamGrid& grid, const Sample& xtr, const Sample& ytr,
                        const std::vector<FoldSplit>& folds) {
    grid.validate();
    detail::require(!folds.empty(), "grid_search_cv: no folds");
    detail::require_same_dim(xtr, ytr, "grid_search_cv");
    PooledGrams grams(xtr, ytr);

    CvReport report;
    report.folds = static_cast<int>(folds.size());
    for (const Kernel& k : grid.kernels) {
        const Matrix gram = grams.gram(k);
        for (double lambda : grid.lambdas) {
            CandidateScore cand{k, lambda, {}, 0.0};
            double total = 0.0;
            for (const FoldSplit& fold : folds) {
                const double s = validation_score(gram, fold, grams, lambda);
                cand.fold_scores.push_back(s);
                total += s;
            }
            cand.mean_score = total / static_cast<double>(folds.size());
            report.candidates.push_back(std::move(cand));
        }
    }

    const CandidateScore* best = nullptr;
    for (const auto& cand : report.candidates) {
        if (best == nullptr || better(cand, *best)) best = &cand;
    }
    if (report.candidates.size() > 1 && !std::isfinite(best->mean_score)) {
        throw NumericalError("grid_search_cv: every candidate produced a degenerate validation witness");
    }
    report.kernel = best->kernel;
    report.lambda = best->lambda;
    report.best_score = best->mean_score;
    return report;
}

CvReport grid_search_cv(const ParamGrid& grid, const Sample& xtr, const Sample& ytr, int folds, std::uint64_t seed) {
    CvReport report = grid_search_cv(grid, xtr, ytr, kfold_split(xtr, ytr, folds, seed));
    report.fold_seed = seed;
    return report;
}

}  // namespace wits
