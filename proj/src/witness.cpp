#include "wits/witness.hpp"

#include "linalg.hpp"

#include <cmath>
#include <limits>

namespace wits {

WitnessModel::WitnessModel(Sample basis, Vector coefficients, Kernel kernel, int orientation)
    : basis_(std::move(basis)), coefficients_(std::move(coefficients)), kernel_(kernel), orientation_(orientation) {
    if (basis_.rows() != coefficients_.size()) {
        throw InvalidArgument("WitnessModel: coefficient count does not match basis size");
    }
    if (!coefficients_.allFinite()) throw NumericalError("WitnessModel: non-finite coefficients");
    if (orientation_ != 1 && orientation_ != -1) throw InvalidArgument("WitnessModel: orientation must be +1 or -1");
}

WitnessModel WitnessModel::negated() const { return WitnessModel(basis_, coefficients_, kernel_, -orientation_); }

SplitRatio::SplitRatio(double ratio) : r(ratio) {
    detail::require(ratio > 0.0 && ratio < 1.0, "split ratio must lie in (0, 1)");
}

Index SplitRatio::train_size(Index n) const {
    // Guard against r * n landing a hair above an integer through rounding.
    const double raw = r * static_cast<double>(n);
    const double nearest = std::round(raw);
    const double v = std::abs(raw - nearest) < 1e-9 ? nearest : std::ceil(raw);
    return static_cast<Index>(v);
}

Sample pool(const Sample& x, const Sample& y) {
    detail::require_same_dim(x, y, "pool");
    Sample z(x.rows() + y.rows(), x.cols());
    z.topRows(x.rows()) = x;
    z.bottomRows(y.rows()) = y;
    return z;
}

Labels pooled_labels(Index n, Index m) {
    Labels out(static_cast<std::size_t>(n + m), -1);
    for (Index i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = 1;
    return out;
}

WitnessModel mmd_witness(const Kernel& k, const Sample& xtr, const Sample& ytr) {
    detail::require_nonempty(xtr, "mmd_witness");
    detail::require_nonempty(ytr, "mmd_witness");
    const Index n = xtr.rows();
    const Index m = ytr.rows();
    Vector delta(n + m);
    delta.head(n).setConstant(1.0 / static_cast<double>(n));
    delta.tail(m).setConstant(-1.0 / static_cast<double>(m));
    return WitnessModel(pool(xtr, ytr), std::move(delta), k, +1);
}

Matrix build_centering(Index n, Index m, double c) {
    detail::require(n >= 1 && m >= 1, "build_centering: block sizes must be positive");
    detail::require(c > 0.0 && c < 1.0, "build_centering: c must lie in (0, 1)");
    Matrix out = Matrix::Zero(n + m, n + m);
    auto block = [](Index l, double s) {
        Matrix p = Matrix::Identity(l, l);
        p.array() -= 1.0 / static_cast<double>(l);
        return Matrix(s * p);
    };
    out.topLeftCorner(n, n) = block(n, 1.0 / c);
    out.bottomRightCorner(m, m) = block(m, 1.0 / (1.0 - c));
    return out;
}

double default_proportion(Index n, Index m) { return static_cast<double>(n) / static_cast<double>(n + m); }

KfdaSolution solve_kfda(const Matrix& gram, const Labels& labels, double lambda, double c) {
    detail::require(lambda > 0.0, "solve_kfda: lambda must be positive");
    detail::require(c > 0.0 && c < 1.0, "solve_kfda: c must lie in (0, 1)");
    const Index total = gram.rows();
    detail::require(gram.cols() == total && static_cast<Index>(labels.size()) == total,
                    "solve_kfda: Gram matrix and labels disagree in size");

    const detail::ClassCentering centering(labels, 1.0 / std::sqrt(c), 1.0 / std::sqrt(1.0 - c));
    detail::require(centering.n_pos() > 0 && centering.n_neg() > 0, "solve_kfda: both classes must be present");
    const double dn = static_cast<double>(total);

    Vector delta(total);
    for (Index i = 0; i < total; ++i) {
        delta[i] = labels[static_cast<std::size_t>(i)] == 1 ? 1.0 / static_cast<double>(centering.n_pos())
                                                             : -1.0 / static_cast<double>(centering.n_neg());
    }
    const Vector k_delta = gram * delta;

    Eigen::MatrixXd system = centering.sandwich(gram) / dn;
    system.diagonal().array() += lambda;
    const double base_jitter = 1e-10 * gram.trace() / dn;
    const auto chol = detail::cholesky_with_jitter(system, base_jitter, 3, true, "kfda");

    // alpha = (delta - S (lambda I + S K S / N)^{-1} S K delta / N) / lambda
    const Vector inner = chol.llt.solve(centering.apply(k_delta) / dn);
    KfdaSolution out;
    out.alpha = (delta - centering.apply(inner)) / lambda;
    out.jitter = chol.jitter;

    const Vector k_alpha = gram * out.alpha;
    const Vector lhs = gram * (centering.apply_squared(k_alpha) / dn + lambda * out.alpha);
    out.residual = (lhs - k_delta).norm();
    out.rhs_norm = k_delta.norm();
    out.mean_difference = delta.dot(k_alpha);

    if (!out.alpha.allFinite()) throw NumericalError("kfda: non-finite coefficients");
    const double rounding = 1e3 * std::numeric_limits<double>::epsilon() * gram.norm() *
                            (centering.apply_squared(k_alpha) / dn + lambda * out.alpha).norm();
    if (out.residual > 1e-8 * out.rhs_norm + rounding) {
        throw NumericalError("kfda: residual " + std::to_string(out.residual) + " exceeds tolerance");
    }
    return out;
}

WitnessModel kfda_witness_exact(const Kernel& k, double lambda, const Sample& xtr, const Sample& ytr,
                                std::optional<double> c) {
    detail::require(lambda > 0.0, "kfda_witness_exact: lambda must be positive");
    detail::require_nonempty(xtr, "kfda_witness_exact");
    detail::require_nonempty(ytr, "kfda_witness_exact");
    detail::require_same_dim(xtr, ytr, "kfda_witness_exact");
    const double prop = c.value_or(default_proportion(xtr.rows(), ytr.rows()));
    Sample z = pool(xtr, ytr);
    const Matrix gram = gram_matrix(k, z);
    KfdaSolution sol = solve_kfda(gram, pooled_labels(xtr.rows(), ytr.rows()), lambda, prop);
    const int orientation = sol.mean_difference >= 0.0 ? 1 : -1;
    return WitnessModel(std::move(z), std::move(sol.alpha), k, orientation);
}

Vector evaluate_witness(const WitnessModel& h, const Sample& z) {
    detail::require_same_dim(h.basis(), z, "evaluate_witness");
    if (z.rows() == 0) return Vector();
    const Matrix g = gram_matrix(h.kernel(), z, h.basis());
    Vector out = g * h.coefficients();
    if (h.orientation() < 0) out = -out;
    return out;
}

namespace {

double unbiased_variance(const Vector& v) {
    const double mean = v.mean();
    return (v.array() - mean).square().sum() / static_cast<double>(v.size() - 1);
}

}  // namespace

double snr_from_values(const Vector& hx, const Vector& hy, double c, double reg) {
    detail::require(hx.size() >= 2 && hy.size() >= 2, "empirical_snr: need at least two values per sample");
    detail::require(c > 0.0 && c < 1.0, "empirical_snr: c must lie in (0, 1)");
    detail::require(reg >= 0.0, "empirical_snr: reg must be nonnegative");
    const double pooled = unbiased_variance(hx) / c + unbiased_variance(hy) / (1.0 - c) + reg;
    if (!(pooled > 0.0)) throw NumericalError("empirical_snr: zero pooled variance (constant witness)");
    return (hx.mean() - hy.mean()) / std::sqrt(pooled);
}

double empirical_snr(const WitnessModel& h, const Sample& x, const Sample& y, double c, double reg) {
    return snr_from_values(evaluate_witness(h, x), evaluate_witness(h, y), c, reg);
}

double population_snr(const WitnessModel& h, const Sample& x, const Sample& y, double c) {
    detail::require(c > 0.0 && c < 1.0, "population_snr: c must lie in (0, 1)");
    const Vector hx = evaluate_witness(h, x);
    const Vector hy = evaluate_witness(h, y);
    const double var_x = (hx.array() - hx.mean()).square().mean();
    const double var_y = (hy.array() - hy.mean()).square().mean();
    const double pooled = var_x / c + var_y / (1.0 - c);
    if (!(pooled > 0.0)) throw NumericalError("population_snr: zero variance");
    return (hx.mean() - hy.mean()) / std::sqrt(pooled);
}

}  // namespace wits
