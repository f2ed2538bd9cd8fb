#include "wits/falkon.hpp"

#include "linalg.hpp"
#include "wits/random.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace wits {

void FalkonConfig::validate(Index pooled_size) const {
    detail::require(num_centers >= 1 && num_centers <= pooled_size,
                    "falkon: number of centers must lie in [1, n + m]");
    detail::require(cg_iterations >= 1, "falkon: at least one CG iteration is required");
    detail::require(lambda > 0.0, "falkon: lambda must be positive");
    detail::require(block_rows >= 1, "falkon: block_rows must be positive");
    if (centering == FalkonCentering::Pooled) detail::require(c > 0.0 && c < 1.0, "falkon: c must lie in (0, 1)");
}

namespace {

std::pair<double, double> centering_scales(FalkonCentering centering, double c) {
    if (centering == FalkonCentering::Pooled) return {1.0 / std::sqrt(c), 1.0 / std::sqrt(1.0 - c)};
    return {1.0, 1.0};
}

struct AllocationLog {
    Index peak = 0;
    Index max_block_rows = 0;
    void note(Index rows, Index cols) { peak = std::max(peak, rows * cols); }
};

// K_ZM in row blocks of the data; the callback sees (first_row, block).
template <class Fn>
void for_each_block(const Sample& z, const Sample& centers, const Kernel& k, Index block_rows, AllocationLog& log,
                    Fn&& fn) {
    const Index total = z.rows();
    for (Index start = 0; start < total; start += block_rows) {
        const Index rows = std::min(block_rows, total - start);
        log.note(rows, centers.rows());
        log.max_block_rows = std::max(log.max_block_rows, rows);
        const Sample zb = z.middleRows(start, rows);
        fn(start, gram_matrix(k, zb, centers));
    }
}

}  // namespace

std::pair<Sample, Labels> select_centers(const Sample& z, const Labels& labels, Index num_centers,
                                         std::uint64_t seed) {
    detail::require(static_cast<Index>(labels.size()) == z.rows(), "select_centers: labels do not match sample");
    detail::require(num_centers >= 1, "select_centers: need at least one center");
    if (num_centers > z.rows()) throw InvalidArgument("select_centers: more centers requested than points");
    Rng rng(seed);
    const std::vector<Index> idx = sample_indices(z.rows(), num_centers, rng);
    Labels sub(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) sub[i] = labels[static_cast<std::size_t>(idx[i])];
    return {take_rows(z, idx), std::move(sub)};
}

FalkonPreconditioner falkon_preconditioner(const Sample& centers, const Labels& center_labels, const Kernel& k,
                                           double lambda, FalkonCentering centering, double c) {
    detail::require(lambda > 0.0, "falkon_preconditioner: lambda must be positive");
    detail::require(static_cast<Index>(center_labels.size()) == centers.rows(),
                    "falkon_preconditioner: labels do not match centers");
    const Index m = centers.rows();
    const auto [sp, sn] = centering_scales(centering, c);
    const detail::ClassCentering n_m(center_labels, sp, sn);

    const Eigen::MatrixXd kmm = gram_matrix(k, centers);
    const double base = 1e-10 * kmm.trace() / static_cast<double>(m);
    auto t = detail::cholesky_with_jitter(kmm, base, 3, false, "falkon preconditioner (K_MM)");

    FalkonPreconditioner out;
    out.t_lower = t.llt.matrixL();
    out.t_jitter = t.jitter;

    // T^T N N^T T / M + lambda I, with T^T the upper factor of K_MM.
    Eigen::MatrixXd centered(m, m);
    for (Index j = 0; j < m; ++j) centered.col(j) = n_m.apply_squared(out.t_lower.col(j));
    Eigen::MatrixXd inner = out.t_lower.transpose() * centered / static_cast<double>(m);
    inner = 0.5 * (inner + inner.transpose());
    inner.diagonal().array() += lambda;
    const double base_a = 1e-10 * inner.trace() / static_cast<double>(m);
    auto a = detail::cholesky_with_jitter(inner, base_a, 3, false, "falkon preconditioner (A)");
    out.a_lower = a.llt.matrixL();
    out.a_jitter = a.jitter;
    return out;
}

FalkonResult fda_falkon(const Sample& z, const Labels& labels, const Kernel& k, const FalkonConfig& config) {
    detail::require_nonempty(z, "fda_falkon");
    detail::require(static_cast<Index>(labels.size()) == z.rows(), "fda_falkon: labels do not match sample");
    config.validate(z.rows());
    const auto [sp, sn] = centering_scales(config.centering, config.c);
    const detail::ClassCentering n_z(labels, sp, sn);
    if (n_z.n_pos() == 0 || n_z.n_neg() == 0) throw InvalidArgument("fda_falkon: labels must contain both classes");

    FalkonResult result;
    std::tie(result.centers, result.center_labels) = select_centers(z, labels, config.num_centers, config.seed);
    const Sample& centers = result.centers;
    const Index m = centers.rows();
    const double total = static_cast<double>(z.rows());

    AllocationLog log;
    const FalkonPreconditioner pre =
        falkon_preconditioner(centers, result.center_labels, k, config.lambda, config.centering, config.c);
    log.note(m, m);  // K_MM and its two factors
    result.diagnostics.t_jitter = pre.t_jitter;
    result.diagnostics.a_jitter = pre.a_jitter;
    const auto t_low = pre.t_lower.triangularView<Eigen::Lower>();
    const auto a_low = pre.a_lower.triangularView<Eigen::Lower>();

    // Per-class column sums of K_ZM, i.e. K_MZ 1_+ and K_MZ 1_-.
    Vector colsum_pos = Vector::Zero(m);
    Vector colsum_neg = Vector::Zero(m);
    for_each_block(z, centers, k, config.block_rows, log, [&](Index start, const Matrix& kb) {
        for (Index r = 0; r < kb.rows(); ++r) {
            if (labels[static_cast<std::size_t>(start + r)] == 1) colsum_pos += kb.row(r).transpose();
            else colsum_neg += kb.row(r).transpose();
        }
    });
    const double n_pos = static_cast<double>(n_z.n_pos());
    const double n_neg = static_cast<double>(n_z.n_neg());
    const Vector k_delta = colsum_pos / n_pos - colsum_neg / n_neg;  // K_MZ delta

    // w -> K_MZ N N^T K_ZM w, one streamed pass over K_ZM.
    auto normal_product = [&](const Vector& w) {
        Vector acc = Vector::Zero(m);
        double sum_pos = 0.0;
        double sum_neg = 0.0;
        for_each_block(z, centers, k, config.block_rows, log, [&](Index start, const Matrix& kb) {
            Vector ub = kb * w;
            for (Index r = 0; r < ub.size(); ++r) {
                if (labels[static_cast<std::size_t>(start + r)] == 1) {
                    sum_pos += ub[r];
                    ub[r] *= sp * sp;
                } else {
                    sum_neg += ub[r];
                    ub[r] *= sn * sn;
                }
            }
            acc.noalias() += kb.transpose() * ub;
        });
        acc -= (sp * sp * sum_pos / n_pos) * colsum_pos;
        acc -= (sn * sn * sum_neg / n_neg) * colsum_neg;
        return acc;
    };

    // B^T (R R^T + N lambda K_MM) B with B = T^{-T} A^{-T}.
    auto lin_op = [&](const Vector& beta) {
        const Vector v = a_low.transpose().solve(beta);
        const Vector w = t_low.transpose().solve(v);
        const Vector c = normal_product(w);
        Vector out = t_low.solve(c) + config.lambda * total * v;
        return Vector(a_low.solve(out));
    };

    // Conjugate-residual iteration: the CG recurrence in the operator's own
    // inner product, so each step minimises the residual over the Krylov space.
    const Vector rhs = a_low.solve(Vector(t_low.solve(k_delta)));
    Vector beta = Vector::Zero(m);
    Vector r = rhs;
    const double rhs_norm = rhs.norm();
    auto& history = result.diagnostics.residual_history;
    history.push_back(rhs_norm);
    if (rhs_norm > 0.0) {
        Vector ar = lin_op(r);
        Vector p = r;
        Vector ap = ar;
        double rar = r.dot(ar);
        for (int it = 1; it <= config.cg_iterations; ++it) {
            const double app = ap.squaredNorm();
            if (!(rar > 0.0) || !(app > 0.0) || !std::isfinite(rar) || !std::isfinite(app)) {
                throw NumericalError("fda_falkon: conjugate gradient breakdown at iteration " + std::to_string(it));
            }
            const double step = rar / app;
            beta += step * p;
            r -= step * ap;
            const double res = r.norm();
            history.push_back(res);
            result.diagnostics.iterations = it;
            if (res < config.tolerance * rhs_norm || it == config.cg_iterations) break;
            ar = lin_op(r);
            const double rar_new = r.dot(ar);
            const double b = rar_new / rar;
            p = r + b * p;
            ap = ar + b * ap;
            rar = rar_new;
        }
    }

    result.alpha = t_low.transpose().solve(Vector(a_low.transpose().solve(beta)));
    if (!result.alpha.allFinite()) throw NumericalError("fda_falkon: non-finite coefficients");
    result.mean_difference = k_delta.dot(result.alpha);
    result.diagnostics.peak_matrix_elements = log.peak;
    result.diagnostics.max_data_block_rows = log.max_block_rows;
    return result;
}

WitnessModel kfda_witness_nystrom(const Kernel& k, const Sample& xtr, const Sample& ytr, const FalkonConfig& config,
                                  FalkonDiagnostics* diagnostics) {
    detail::require_nonempty(xtr, "kfda_witness_nystrom");
    detail::require_nonempty(ytr, "kfda_witness_nystrom");
    detail::require_same_dim(xtr, ytr, "kfda_witness_nystrom");
    FalkonResult res = fda_falkon(pool(xtr, ytr), pooled_labels(xtr.rows(), ytr.rows()), k, config);
    if (diagnostics != nullptr) *diagnostics = res.diagnostics;
    const int orientation = res.mean_difference >= 0.0 ? 1 : -1;
    return WitnessModel(std::move(res.centers), std::move(res.alpha), k, orientation);
}

}  // namespace wits
