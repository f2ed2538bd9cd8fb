#include "wits/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace wits {

Kernel Kernel::gaussian(double bandwidth) {
    detail::require(bandwidth > 0.0 && std::isfinite(bandwidth), "Gaussian kernel: bandwidth must be positive");
    return Kernel{KernelFamily::Gaussian, bandwidth, 1.0};
}

Kernel Kernel::linear() { return Kernel{KernelFamily::Linear, 1.0, 1.0}; }

Kernel Kernel::scaled(double gamma) const {
    detail::require(gamma > 0.0, "Kernel::scaled: factor must be positive");
    Kernel out = *this;
    out.scale *= gamma;
    return out;
}

std::string Kernel::describe() const {
    std::ostringstream os;
    switch (family) {
        case KernelFamily::Gaussian: os << "gaussian(sigma=" << bandwidth; break;
        case KernelFamily::Linear: os << "linear("; break;
    }
    if (scale != 1.0) os << (family == KernelFamily::Linear ? "" : ", ") << "scale=" << scale;
    os << ")";
    return os.str();
}

namespace {

inline double sq_dist(const double* x, const double* y, Index d) {
    double s = 0.0;
    for (Index k = 0; k < d; ++k) {
        const double diff = x[k] - y[k];
        s += diff * diff;
    }
    return s;
}

inline double dot(const double* x, const double* y, Index d) {
    double s = 0.0;
    for (Index k = 0; k < d; ++k) s += x[k] * y[k];
    return s;
}

inline double eval_raw(const Kernel& k, const double* x, const double* y, Index d) {
    switch (k.family) {
        case KernelFamily::Gaussian: {
            const double inv = 1.0 / (k.bandwidth * k.bandwidth);
            return k.scale * std::exp(-sq_dist(x, y, d) * inv);
        }
        case KernelFamily::Linear: return k.scale * dot(x, y, d);
    }
    return 0.0;
}

}  // namespace

double eval_kernel(const Kernel& k, PointRef x, PointRef y) {
    if (x.size() != y.size()) throw DimensionMismatch("eval_kernel: dimension mismatch");
    return eval_raw(k, x.data(), y.data(), x.size());
}

Matrix gram_matrix(const Kernel& k, const Sample& a, const Sample& b) {
    detail::require_nonempty(a, "gram_matrix");
    detail::require_nonempty(b, "gram_matrix");
    detail::require_same_dim(a, b, "gram_matrix");
    const Index d = a.cols();
    Matrix out(a.rows(), b.rows());
    for (Index i = 0; i < a.rows(); ++i) {
        const double* ai = a.row(i).data();
        for (Index j = 0; j < b.rows(); ++j) out(i, j) = eval_raw(k, ai, b.row(j).data(), d);
    }
    return out;
}

Matrix gram_matrix(const Kernel& k, const Sample& a) {
    detail::require_nonempty(a, "gram_matrix");
    const Index n = a.rows();
    const Index d = a.cols();
    Matrix out(n, n);
    for (Index i = 0; i < n; ++i) {
        const double* ai = a.row(i).data();
        for (Index j = i; j < n; ++j) {
            const double v = eval_raw(k, ai, a.row(j).data(), d);
            out(i, j) = v;
            out(j, i) = v;
        }
    }
    return out;
}

Matrix squared_distances(const Sample& a, const Sample& b) {
    detail::require_same_dim(a, b, "squared_distances");
    const Index d = a.cols();
    Matrix out(a.rows(), b.rows());
    for (Index i = 0; i < a.rows(); ++i) {
        for (Index j = 0; j < b.rows(); ++j) out(i, j) = sq_dist(a.row(i).data(), b.row(j).data(), d);
    }
    return out;
}

Matrix gaussian_from_squared_distances(const Kernel& k, const Matrix& sq_dist) {
    detail::require(k.family == KernelFamily::Gaussian, "gaussian_from_squared_distances: kernel is not Gaussian");
    const double inv = 1.0 / (k.bandwidth * k.bandwidth);
    return (k.scale * (-inv * sq_dist.array()).exp()).matrix();
}

std::vector<Kernel> bandwidth_grid(double log10_min, double log10_max, int count) {
    detail::require(count >= 1, "bandwidth_grid: count must be at least 1");
    detail::require(log10_min <= log10_max, "bandwidth_grid: log10_min must not exceed log10_max");
    std::vector<Kernel> out;
    out.reserve(static_cast<std::size_t>(count));
    if (count == 1) {
        out.push_back(Kernel::gaussian(std::pow(10.0, log10_min)));
        return out;
    }
    const double step = (log10_max - log10_min) / static_cast<double>(count - 1);
    for (int i = 0; i < count; ++i) {
        const double e = (i == count - 1) ? log10_max : log10_min + step * i;
        out.push_back(Kernel::gaussian(std::pow(10.0, e)));
    }
    return out;
}

double median_heuristic_bandwidth(const Sample& z) {
    detail::require(z.rows() >= 2, "median_heuristic_bandwidth: need at least two points");
    const Index n = z.rows();
    std::vector<double> dist;
    dist.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
    for (Index i = 0; i < n; ++i) {
        for (Index j = i + 1; j < n; ++j) dist.push_back(std::sqrt(sq_dist(z.row(i).data(), z.row(j).data(), z.cols())));
    }
    const std::size_t mid = dist.size() / 2;
    std::nth_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(mid), dist.end());
    double med = dist[mid];
    if (dist.size() % 2 == 0) {
        const double lower = *std::max_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(mid));
        med = 0.5 * (med + lower);
    }
    if (!(med > 0.0)) throw InvalidArgument("median_heuristic_bandwidth: median pairwise distance is zero");
    return med;
}

}  // namespace wits
