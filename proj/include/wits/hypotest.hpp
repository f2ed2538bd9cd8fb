#pragma once

#include "wits/kernel.hpp"
#include "wits/witness.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace wits {

struct TestOutcome {
    double statistic = 0.0;
    std::optional<double> p_value;    // permutation mode
    std::optional<double> threshold;  // analytic mode
    bool reject = false;
    std::string method;
    double alpha = 0.05;
    std::optional<int> num_permutations;
    // Kernel bandwidth and lambda actually used, when the caller chose them.
    std::optional<double> bandwidth;
    std::optional<double> lambda;
};

struct PermutationOptions {
    int num_permutations = 200;
    std::uint64_t seed = 0;
    // (count + 1) / (B + 1) instead of count / B.
    bool plus_one = false;
};

/// Standard normal CDF.
double normal_cdf(double x);

/// Inverse standard normal CDF for p in (0, 1).
double gaussian_quantile(double p);

/// sqrt(n + m) (mean_X h - mean_Y h) / sigma_c(h) on precomputed values,
/// with c = n / (n + m) and unbiased per-sample variances.
double standardized_tau_from_values(const Vector& hx, const Vector& hy);
double standardized_tau(const WitnessModel& h, const Sample& xte, const Sample& yte);

/// One-sided test: reject iff tau > Phi^{-1}(1 - alpha).
TestOutcome asymptotic_witness_test(const WitnessModel& h, const Sample& xte, const Sample& yte, double alpha);

/// Permutation p-value of the unnormalised mean difference. `values` holds
/// the witness on X_te followed by Y_te; the first `n` entries are X.
/// Each of the B rounds reshuffles the array in place, as in the reference
/// procedure; ties count toward the p-value.
double witness_permutation_pvalue(std::vector<double> values, Index n, const PermutationOptions& options,
                                  double* observed = nullptr);

TestOutcome permutation_witness_test(const WitnessModel& h, const Sample& xte, const Sample& yte, double alpha,
                                     const PermutationOptions& options = {});

/// Asymptotic power 1 - Phi(Phi^{-1}(1 - alpha) - sqrt(n_te + m_te) snr).
double asymptotic_power(double snr, Index n_te, Index m_te, double alpha);

/// Generator of successive uniformly random label assignments over a pooled
/// sample of size `total`. MMD-BOOT and KFDA-BOOT draw from the same stream
/// for the same seed, so their permutation sets coincide.
class PermutationStream {
public:
    PermutationStream(Index total, std::uint64_t seed);
    /// Reshuffles and returns the current index order.
    const std::vector<Index>& next();

private:
    std::vector<Index> order_;
    std::uint64_t state_seed_;
    std::uint64_t draws_ = 0;
};

/// MMD-BOOT permutation stage on a pooled Gram matrix (first n rows are X).
double mmd_permutation_pvalue(const Matrix& pooled_gram, Index n, const PermutationOptions& options,
                              double* observed = nullptr);

/// KFDA-BOOT permutation stage: the statistic delta^T K alpha is re-solved
/// under each relabelling with the Gram matrix fixed.
double kfda_permutation_pvalue(const Matrix& pooled_gram, Index n, double lambda, const PermutationOptions& options,
                               double* observed = nullptr);

/// Full-data MMD test with permutation threshold; statistic is the V-statistic.
TestOutcome mmd_boot_test(const Kernel& k, const Sample& x, const Sample& y, double alpha,
                          const PermutationOptions& options = {});

/// Full-data KFDA test, statistic <mu_X - mu_Y, (Sigma + lambda)^{-1} (mu_X - mu_Y)>.
TestOutcome kfda_boot_test(const Kernel& k, double lambda, const Sample& x, const Sample& y, double alpha,
                           const PermutationOptions& options = {});

}  // namespace wits
