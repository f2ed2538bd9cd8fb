#include "wits/hypotest.hpp"

#include "wits/mmd_stats.hpp"
#include "wits/random.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace wits {

namespace {

void check_alpha(double alpha) { detail::require(alpha > 0.0 && alpha < 1.0, "alpha must lie in (0, 1)"); }

void check_permutations(const PermutationOptions& options) {
    detail::require(options.num_permutations >= 1, "number of permutations must be at least 1");
}

// Ties are decided up to rounding of the summation order.
inline bool at_least(double permuted, double observed, double scale) {
    return permuted >= observed - 1e-12 * scale;
}

double finish_pvalue(long count, int b, bool plus_one) {
    if (plus_one) return (static_cast<double>(count) + 1.0) / (static_cast<double>(b) + 1.0);
    return static_cast<double>(count) / static_cast<double>(b);
}

}  // namespace

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double gaussian_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw InvalidArgument("gaussian_quantile: p must lie in (0, 1)");
    // Acklam's rational approximation (relative error ~1e-9) ...
    static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                                   1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                   6.680131188771972e+01,  -1.328068155288572e+01};
    static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                   -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                   3.754408661907416e+00};
    constexpr double p_low = 0.02425;
    double x;
    if (p < p_low) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - p_low) {
        const double q = p - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log1p(-p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    // ... plus one Halley step against the erfc-based CDF.
    const double e = normal_cdf(x) - p;
    const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
    return x - u / (1.0 + 0.5 * x * u);
}

double standardized_tau_from_values(const Vector& hx, const Vector& hy) {
    detail::require(hx.size() >= 2 && hy.size() >= 2, "standardized_tau: need at least two test points per sample");
    const double n = static_cast<double>(hx.size());
    const double m = static_cast<double>(hy.size());
    const double c = n / (n + m);
    const double mx = hx.mean();
    const double my = hy.mean();
    const double vx = (hx.array() - mx).square().sum() / (n - 1.0);
    const double vy = (hy.array() - my).square().sum() / (m - 1.0);
    const double pooled = vx / c + vy / (1.0 - c);
    if (!(pooled > 0.0)) throw NumericalError("standardized_tau: zero pooled variance (constant witness on test data)");
    return std::sqrt(n + m) * (mx - my) / std::sqrt(pooled);
}

double standardized_tau(const WitnessModel& h, const Sample& xte, const Sample& yte) {
    return standardized_tau_from_values(evaluate_witness(h, xte), evaluate_witness(h, yte));
}

TestOutcome asymptotic_witness_test(const WitnessModel& h, const Sample& xte, const Sample& yte, double alpha) {
    check_alpha(alpha);
    TestOutcome out;
    out.method = "witness-asymptotic";
    out.alpha = alpha;
    out.statistic = standardized_tau(h, xte, yte);
    out.threshold = gaussian_quantile(1.0 - alpha);
    out.reject = out.statistic > *out.threshold;
    return out;
}

double witness_permutation_pvalue(std::vector<double> values, Index n, const PermutationOptions& options,
                                  double* observed) {
    check_permutations(options);
    const auto total = static_cast<Index>(values.size());
    detail::require(n >= 1 && n < total, "permutation test: both test samples must be nonempty");
    const double dn = static_cast<double>(n);
    const double dm = static_cast<double>(total - n);

    const double sum_all = std::accumulate(values.begin(), values.end(), 0.0);
    auto mean_gap = [&](const std::vector<double>& v) {
        const double sx = std::accumulate(v.begin(), v.begin() + n, 0.0);
        return sx / dn - (sum_all - sx) / dm;
    };
    const double tau = mean_gap(values);
    double scale = std::abs(tau);
    for (double v : values) scale = std::max(scale, std::abs(v));

    Rng rng(options.seed);
    long count = 0;
    for (int b = 0; b < options.num_permutations; ++b) {
        shuffle_in_place(std::span<double>(values), rng);
        if (at_least(mean_gap(values), tau, scale)) ++count;
    }
    if (observed != nullptr) *observed = tau;
    return finish_pvalue(count, options.num_permutations, options.plus_one);
}

TestOutcome permutation_witness_test(const WitnessModel& h, const Sample& xte, const Sample& yte, double alpha,
                                     const PermutationOptions& options) {
    check_alpha(alpha);
    check_permutations(options);
    detail::require_nonempty(xte, "permutation_witness_test");
    detail::require_nonempty(yte, "permutation_witness_test");
    const Vector values = evaluate_witness(h, pool(xte, yte));
    TestOutcome out;
    out.method = "witness-permutation";
    out.alpha = alpha;
    out.num_permutations = options.num_permutations;
    double tau = 0.0;
    out.p_value = witness_permutation_pvalue(std::vector<double>(values.begin(), values.end()), xte.rows(), options,
                                             &tau);
    out.statistic = tau;
    out.reject = *out.p_value <= alpha;
    return out;
}

double asymptotic_power(double snr, Index n_te, Index m_te, double alpha) {
    check_alpha(alpha);
    detail::require(n_te >= 1 && m_te >= 1, "asymptotic_power: test sizes must be positive");
    const double shift = std::sqrt(static_cast<double>(n_te + m_te)) * snr;
    return std::clamp(1.0 - normal_cdf(gaussian_quantile(1.0 - alpha) - shift), 0.0, 1.0);
}

PermutationStream::PermutationStream(Index total, std::uint64_t seed)
    : order_(static_cast<std::size_t>(total)), state_seed_(seed) {
    std::iota(order_.begin(), order_.end(), Index{0});
}

const std::vector<Index>& PermutationStream::next() {
    // A fresh generator per draw keeps draw i reproducible on its own.
    Rng rng(derive_seed(state_seed_, draws_++));
    std::iota(order_.begin(), order_.end(), Index{0});
    shuffle_in_place(std::span<Index>(order_), rng);
    return order_;
}

namespace {

Vector delta_for(const std::vector<Index>& order, Index n) {
    const auto total = static_cast<Index>(order.size());
    Vector delta(total);
    const double pos = 1.0 / static_cast<double>(n);
    const double neg = -1.0 / static_cast<double>(total - n);
    for (Index i = 0; i < total; ++i) delta[order[static_cast<std::size_t>(i)]] = i < n ? pos : neg;
    return delta;
}

Labels labels_for(const std::vector<Index>& order, Index n) {
    Labels labels(order.size());
    for (std::size_t i = 0; i < order.size(); ++i) labels[static_cast<std::size_t>(order[i])] = static_cast<Index>(i) < n ? 1 : -1;
    return labels;
}

template <class Statistic>
double boot_pvalue(Index total, Index n, const PermutationOptions& options, double* observed, Statistic&& stat) {
    check_permutations(options);
    detail::require(n >= 1 && n < total, "permutation test: both samples must be nonempty");
    std::vector<Index> identity(static_cast<std::size_t>(total));
    std::iota(identity.begin(), identity.end(), Index{0});
    const double tau = stat(identity);
    PermutationStream stream(total, options.seed);
    long count = 0;
    for (int b = 0; b < options.num_permutations; ++b) {
        if (at_least(stat(stream.next()), tau, std::abs(tau))) ++count;
    }
    if (observed != nullptr) *observed = tau;
    return finish_pvalue(count, options.num_permutations, options.plus_one);
}

}  // namespace

double mmd_permutation_pvalue(const Matrix& pooled_gram, Index n, const PermutationOptions& options,
                              double* observed) {
    return boot_pvalue(pooled_gram.rows(), n, options, observed, [&](const std::vector<Index>& order) {
        const Vector delta = delta_for(order, n);
        return delta.dot(pooled_gram * delta);
    });
}

double kfda_permutation_pvalue(const Matrix& pooled_gram, Index n, double lambda, const PermutationOptions& options,
                               double* observed) {
    detail::require(lambda > 0.0, "kfda_boot: lambda must be positive");
    const double c = default_proportion(n, pooled_gram.rows() - n);
    return boot_pvalue(pooled_gram.rows(), n, options, observed, [&](const std::vector<Index>& order) {
        return solve_kfda(pooled_gram, labels_for(order, n), lambda, c).mean_difference;
    });
}

TestOutcome mmd_boot_test(const Kernel& k, const Sample& x, const Sample& y, double alpha,
                          const PermutationOptions& options) {
    check_alpha(alpha);
    detail::require_nonempty(x, "mmd_boot_test");
    detail::require_nonempty(y, "mmd_boot_test");
    const Matrix gram = gram_matrix(k, pool(x, y));
    TestOutcome out;
    out.method = "mmd-boot";
    out.alpha = alpha;
    out.num_permutations = options.num_permutations;
    double stat = 0.0;
    out.p_value = mmd_permutation_pvalue(gram, x.rows(), options, &stat);
    out.statistic = stat;
    out.reject = *out.p_value <= alpha;
    return out;
}

TestOutcome kfda_boot_test(const Kernel& k, double lambda, const Sample& x, const Sample& y, double alpha,
                           const PermutationOptions& options) {
    check_alpha(alpha);
    detail::require(lambda > 0.0, "kfda_boot_test: lambda must be positive");
    detail::require_nonempty(x, "kfda_boot_test");
    detail::require_nonempty(y, "kfda_boot_test");
    const Matrix gram = gram_matrix(k, pool(x, y));
    TestOutcome out;
    out.method = "kfda-boot";
    out.alpha = alpha;
    out.num_permutations = options.num_permutations;
    double stat = 0.0;
    out.p_value = kfda_permutation_pvalue(gram, x.rows(), lambda, options, &stat);
    out.statistic = stat;
    out.reject = *out.p_value <= alpha;
    return out;
}

}  // namespace wits
