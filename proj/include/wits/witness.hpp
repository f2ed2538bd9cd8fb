#pragma once

#include "wits/kernel.hpp"

#include <optional>
#include <vector>

namespace wits {

/// Class labels for a pooled sample: +1 for points from X, -1 for Y.
using Labels = std::vector<int>;

/// Learned witness h(z) = orientation * sum_i coefficients_i k(basis_i, z).
class WitnessModel {
public:
    WitnessModel(Sample basis, Vector coefficients, Kernel kernel, int orientation = +1);

    [[nodiscard]] const Sample& basis() const noexcept { return basis_; }
    [[nodiscard]] const Vector& coefficients() const noexcept { return coefficients_; }
    [[nodiscard]] const Kernel& kernel() const noexcept { return kernel_; }
    [[nodiscard]] int orientation() const noexcept { return orientation_; }
    [[nodiscard]] Index dim() const noexcept { return basis_.cols(); }

    /// Copy with the orientation sign flipped.
    [[nodiscard]] WitnessModel negated() const;

private:
    Sample basis_;
    Vector coefficients_;
    Kernel kernel_;
    int orientation_;
};

/// Fraction of data assigned to Stage I. n_tr = ceil(r n), n_te = n - n_tr.
struct SplitRatio {
    double r = 0.5;

    explicit SplitRatio(double ratio = 0.5);
    [[nodiscard]] Index train_size(Index n) const;
    [[nodiscard]] Index test_size(Index n) const { return n - train_size(n); }
};

/// Empirical MMD witness mu_Xtr - mu_Ytr on the pooled training basis.
WitnessModel mmd_witness(const Kernel& k, const Sample& xtr, const Sample& ytr);

/// Block-diagonal [P_n / c, 0; 0, P_m / (1 - c)] with P_l = I - 11^T / l.
Matrix build_centering(Index n, Index m, double c);

/// Outcome of one regularised KFDA solve on a pooled Gram matrix.
struct KfdaSolution {
    Vector alpha;
    double residual = 0.0;        // ||(K N_c K / N + lambda K) alpha - K delta||
    double rhs_norm = 0.0;        // ||K delta||
    double jitter = 0.0;          // diagonal shift that was needed, 0 if none
    double mean_difference = 0.0; // delta^T K alpha, the training mean gap
};

/// Solves (K N_c K / N + lambda K) alpha = K delta for a pooled Gram matrix
/// with arbitrary label order. delta_i = 1/n on label +1 and -1/m on -1.
///
/// The system is reduced to the SPD matrix lambda I + S K S / N with
/// S = N_c^{1/2}, which has spectrum bounded below by lambda and yields the
/// same alpha whenever K is invertible (and a valid solution otherwise).
KfdaSolution solve_kfda(const Matrix& gram, const Labels& labels, double lambda, double c);

/// Default Stage-I proportion c = n / (n + m).
double default_proportion(Index n, Index m);

/// Exact regularised KFDA witness on the pooled training sample.
WitnessModel kfda_witness_exact(const Kernel& k, double lambda, const Sample& xtr, const Sample& ytr,
                                std::optional<double> c = std::nullopt);

/// h(z) for every row of z.
Vector evaluate_witness(const WitnessModel& h, const Sample& z);

/// (mean_X - mean_Y) / sqrt(s_X^2 / c + s_Y^2 / (1 - c) + reg) with unbiased
/// sample variances. Throws when the pooled variance and reg are both zero.
double empirical_snr(const WitnessModel& h, const Sample& x, const Sample& y, double c, double reg);

/// Same criterion on precomputed witness values.
double snr_from_values(const Vector& hx, const Vector& hy, double c, double reg);

/// SNR with the empirical measures of X and Y treated as populations: exact
/// means and variances (denominator n) under uniform weights.
double population_snr(const WitnessModel& h, const Sample& x, const Sample& y, double c);

/// Pools X and Y (X first) with matching +1 / -1 labels.
Sample pool(const Sample& x, const Sample& y);
Labels pooled_labels(Index n, Index m);

}  // namespace wits
