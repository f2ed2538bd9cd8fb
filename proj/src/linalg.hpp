#pragma once

// Internal numerical helpers shared by the exact and Nystrom KFDA solvers.

#include "wits/types.hpp"
#include "wits/witness.hpp"

#include <Eigen/Cholesky>

#include <string>

namespace wits::detail {

struct JitteredCholesky {
    Eigen::LLT<Eigen::MatrixXd> llt;
    double jitter = 0.0;
};

/// Cholesky factorisation with diagonal jitter escalation. When
/// `plain_first` is set the unshifted matrix is tried before any jitter.
/// Jitter starts at `base_jitter` and is multiplied by 10 per failure, for
/// `attempts` jittered tries in total.
inline JitteredCholesky cholesky_with_jitter(const Eigen::MatrixXd& a, double base_jitter, int attempts,
                                             bool plain_first, const std::string& what) {
    JitteredCholesky out;
    if (plain_first) {
        out.llt.compute(a);
        if (out.llt.info() == Eigen::Success) return out;
    }
    double jitter = base_jitter > 0.0 ? base_jitter : 1e-300;
    for (int attempt = 0; attempt < attempts; ++attempt, jitter *= 10.0) {
        Eigen::MatrixXd shifted = a;
        shifted.diagonal().array() += jitter;
        out.llt.compute(shifted);
        if (out.llt.info() == Eigen::Success) {
            out.jitter = jitter;
            return out;
        }
    }
    throw NumericalError(what + ": Cholesky factorisation failed after jitter escalation");
}

/// Per-class centering with optional per-class scale: for label +1 the map is
/// v_i -> s_pos (v_i - mean_{+}(v)), likewise for -1. With unit scales this
/// is the idempotent block matrix N = diag(P_n, P_m) in label order.
class ClassCentering {
public:
    ClassCentering(const Labels& labels, double scale_pos, double scale_neg)
        : labels_(&labels), scale_pos_(scale_pos), scale_neg_(scale_neg) {
        for (int l : labels) {
            if (l == 1) ++n_pos_;
            else if (l == -1) ++n_neg_;
            else throw InvalidArgument("labels must be +1 or -1");
        }
    }

    [[nodiscard]] Index n_pos() const { return n_pos_; }
    [[nodiscard]] Index n_neg() const { return n_neg_; }
    [[nodiscard]] double scale(int label) const { return label == 1 ? scale_pos_ : scale_neg_; }

    /// Class means of v.
    void class_means(const Vector& v, double& mean_pos, double& mean_neg) const {
        double sp = 0.0;
        double sn = 0.0;
        const auto& lab = *labels_;
        for (std::size_t i = 0; i < lab.size(); ++i) {
            if (lab[i] == 1) sp += v[static_cast<Index>(i)];
            else sn += v[static_cast<Index>(i)];
        }
        mean_pos = n_pos_ > 0 ? sp / static_cast<double>(n_pos_) : 0.0;
        mean_neg = n_neg_ > 0 ? sn / static_cast<double>(n_neg_) : 0.0;
    }

    /// Applies the (scaled) centering once.
    [[nodiscard]] Vector apply(const Vector& v) const { return apply_with_scales(v, scale_pos_, scale_neg_); }

    /// Applies it twice, i.e. multiplies by the squared scales.
    [[nodiscard]] Vector apply_squared(const Vector& v) const {
        return apply_with_scales(v, scale_pos_ * scale_pos_, scale_neg_ * scale_neg_);
    }

    /// S G S for symmetric G, where S is the scaled centering in label order.
    [[nodiscard]] Eigen::MatrixXd sandwich(const Matrix& g) const {
        const auto& lab = *labels_;
        const Index n = g.rows();
        // row means of g restricted to each class of columns
        Vector rp = Vector::Zero(n);
        Vector rn = Vector::Zero(n);
        for (Index i = 0; i < n; ++i) {
            double sp = 0.0;
            double sn = 0.0;
            for (Index j = 0; j < n; ++j) {
                if (lab[static_cast<std::size_t>(j)] == 1) sp += g(i, j);
                else sn += g(i, j);
            }
            rp[i] = n_pos_ > 0 ? sp / static_cast<double>(n_pos_) : 0.0;
            rn[i] = n_neg_ > 0 ? sn / static_cast<double>(n_neg_) : 0.0;
        }
        double bpp = 0.0, bpn = 0.0, bnn = 0.0;
        for (Index i = 0; i < n; ++i) {
            if (lab[static_cast<std::size_t>(i)] == 1) {
                bpp += rp[i];
                bpn += rn[i];
            } else {
                bnn += rn[i];
            }
        }
        if (n_pos_ > 0) {
            bpp /= static_cast<double>(n_pos_);
            bpn /= static_cast<double>(n_pos_);
        }
        if (n_neg_ > 0) bnn /= static_cast<double>(n_neg_);

        Eigen::MatrixXd out(n, n);
        for (Index j = 0; j < n; ++j) {
            const bool pj = lab[static_cast<std::size_t>(j)] == 1;
            const double sj = pj ? scale_pos_ : scale_neg_;
            for (Index i = 0; i < n; ++i) {
                const bool pi = lab[static_cast<std::size_t>(i)] == 1;
                const double si = pi ? scale_pos_ : scale_neg_;
                const double col_mean_of_i = pj ? rp[i] : rn[i];  // mean over class(j) of g(i, .)
                const double row_mean_of_j = pi ? rp[j] : rn[j];  // mean over class(i) of g(., j)
                const double block = (pi && pj) ? bpp : (!pi && !pj) ? bnn : bpn;
                out(i, j) = si * sj * (g(i, j) - col_mean_of_i - row_mean_of_j + block);
            }
        }
        return out;
    }

private:
    [[nodiscard]] Vector apply_with_scales(const Vector& v, double sp, double sn) const {
        double mp = 0.0;
        double mn = 0.0;
        class_means(v, mp, mn);
        Vector out(v.size());
        const auto& lab = *labels_;
        for (Index i = 0; i < v.size(); ++i) {
            out[i] = lab[static_cast<std::size_t>(i)] == 1 ? sp * (v[i] - mp) : sn * (v[i] - mn);
        }
        return out;
    }

    const Labels* labels_;
    double scale_pos_;
    double scale_neg_;
    Index n_pos_ = 0;
    Index n_neg_ = 0;
};

}  // namespace wits::detail
