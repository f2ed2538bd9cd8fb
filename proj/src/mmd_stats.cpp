#include "wits/mmd_stats.hpp"

#include <algorithm>
#include <cmath>

namespace wits {

namespace {

void check_pair(const Sample& x, const Sample& y, const char* where) {
    detail::require_nonempty(x, where);
    detail::require_nonempty(y, where);
    detail::require_same_dim(x, y, where);
}

void check_paired(const Sample& x, const Sample& y, Index min_n, const char* where) {
    check_pair(x, y, where);
    if (x.rows() != y.rows()) throw InvalidArgument(std::string(where) + ": paired form needs |X| = |Y|");
    if (x.rows() < min_n) {
        throw InvalidArgument(std::string(where) + ": need at least " + std::to_string(min_n) + " pairs");
    }
}

double off_diagonal_sum(const Matrix& h) { return h.sum() - h.diagonal().sum(); }

}  // namespace

double mmd_v_statistic(const Kernel& k, const Sample& x, const Sample& y) {
    check_pair(x, y, "mmd_v_statistic");
    const double n = static_cast<double>(x.rows());
    const double m = static_cast<double>(y.rows());
    const double kxx = gram_matrix(k, x).sum() / (n * n);
    const double kyy = gram_matrix(k, y).sum() / (m * m);
    const double kxy = gram_matrix(k, x, y).sum() / (n * m);
    return kxx + kyy - 2.0 * kxy;
}

double mmd_v_statistic_from_gram(const Matrix& pooled_gram, Index n) {
    const Index total = pooled_gram.rows();
    detail::require(n >= 1 && n < total, "mmd_v_statistic_from_gram: both blocks must be nonempty");
    const Index m = total - n;
    const double kxx = pooled_gram.topLeftCorner(n, n).sum();
    const double kyy = pooled_gram.bottomRightCorner(m, m).sum();
    const double kxy = pooled_gram.topRightCorner(n, m).sum();
    const double dn = static_cast<double>(n);
    const double dm = static_cast<double>(m);
    return kxx / (dn * dn) + kyy / (dm * dm) - 2.0 * kxy / (dn * dm);
}

Matrix h_gram(const Kernel& k, const Sample& x, const Sample& y) {
    check_paired(x, y, 1, "h_gram");
    const Matrix kxy = gram_matrix(k, x, y);
    Matrix h = gram_matrix(k, x) + gram_matrix(k, y);
    h -= kxy;
    h -= kxy.transpose();
    return h;
}

double mmd_u_statistic(const Kernel& k, const Sample& x, const Sample& y) {
    check_paired(x, y, 2, "mmd_u_statistic");
    const double n = static_cast<double>(x.rows());
    return off_diagonal_sum(h_gram(k, x, y)) / (n * (n - 1.0));
}

double sigma_h1_squared(const Kernel& k, const Sample& x, const Sample& y) {
    check_paired(x, y, 3, "sigma_h1_squared");
    const Matrix h = h_gram(k, x, y);
    const Index n = h.rows();
    const double dn = static_cast<double>(n);

    // sum over distinct (i, j, l) of H_ij H_il
    //   = sum_i [ (sum_{j != i} H_ij)^2 - sum_{j != i} H_ij^2 ]
    double triple = 0.0;
    double pair = 0.0;
    for (Index i = 0; i < n; ++i) {
        double row = 0.0;
        double row_sq = 0.0;
        for (Index j = 0; j < n; ++j) {
            if (j == i) continue;
            row += h(i, j);
            row_sq += h(i, j) * h(i, j);
        }
        triple += row * row - row_sq;
        pair += row;
    }
    const double e_h12_h13 = triple / (dn * (dn - 1.0) * (dn - 2.0));
    const double e_h12 = pair / (dn * (dn - 1.0));
    return std::max(0.0, 4.0 * (e_h12_h13 - e_h12 * e_h12));
}

double j_criterion(const Kernel& k, const Sample& x, const Sample& y, double eps) {
    detail::require(eps >= 0.0, "j_criterion: eps must be nonnegative");
    const double var = sigma_h1_squared(k, x, y);
    const double mmd = mmd_u_statistic(k, x, y);
    const double denom = std::sqrt(var + eps);
    if (!(denom > 0.0)) {
        if (mmd == 0.0) return 0.0;
        throw NumericalError("j_criterion: zero variance with eps = 0");
    }
    return mmd / denom;
}

double j_criterion_population(const Kernel& k, const Sample& x, const Sample& y) {
    check_pair(x, y, "j_criterion_population");
    const double n = static_cast<double>(x.rows());
    const double m = static_cast<double>(y.rows());
    const Matrix kxx = gram_matrix(k, x);
    const Matrix kyy = gram_matrix(k, y);
    const Matrix kxy = gram_matrix(k, x, y);
    // witness h = mu_P - mu_Q evaluated on both supports
    const Vector hx = kxx.rowwise().sum() / n - kxy.rowwise().sum() / m;
    const Vector hy = kxy.colwise().sum().transpose() / n - kyy.rowwise().sum() / m;
    const double mean_x = hx.mean();
    const double mean_y = hy.mean();
    const double var_x = (hx.array() - mean_x).square().mean();
    const double var_y = (hy.array() - mean_y).square().mean();
    // E[H12] = MMD^2; E[H12 H13] - E[H12]^2 = Var(h(X) - h(Y)) with X, Y independent.
    const double mmd2 = mean_x - mean_y;
    const double sigma2 = 4.0 * (var_x + var_y);
    if (!(sigma2 > 0.0)) throw NumericalError("j_criterion_population: zero variance");
    return mmd2 / std::sqrt(sigma2);
}

MmdEstimate mmd_estimate(const Kernel& k, const Sample& x, const Sample& y, MmdEstimator which) {
    if (which == MmdEstimator::UStatistic) return {mmd_u_statistic(k, x, y), which};
    return {mmd_v_statistic(k, x, y), which};
}

}  // namespace wits
