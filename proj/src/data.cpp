#include "wits/data.hpp"

#include "wits/random.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace wits {

namespace blobs {

namespace {

// Q blobs of the multi-covariance variant: (major variance, minor variance,
// orientation of the major axis). Eigenvalues lie in [0.01, 0.09].
struct AxisSpec {
    double major, minor, angle;
};
constexpr std::array<AxisSpec, 9> kLiuQ = {{
    {0.090, 0.010, 0.0 * std::numbers::pi / 9.0},
    {0.080, 0.012, 1.0 * std::numbers::pi / 9.0},
    {0.070, 0.015, 2.0 * std::numbers::pi / 9.0},
    {0.060, 0.010, 3.0 * std::numbers::pi / 9.0},
    {0.050, 0.020, 4.0 * std::numbers::pi / 9.0},
    {0.085, 0.012, 5.0 * std::numbers::pi / 9.0},
    {0.075, 0.010, 6.0 * std::numbers::pi / 9.0},
    {0.065, 0.018, 7.0 * std::numbers::pi / 9.0},
    {0.090, 0.015, 8.0 * std::numbers::pi / 9.0},
}};

}  // namespace

Cov2 rotate(const Cov2& c, double theta) {
    const double cs = std::cos(theta);
    const double sn = std::sin(theta);
    // R C R^T with R = [[cs, -sn], [sn, cs]]
    const double a = c[0], b = c[1], d = c[3];
    const double r00 = cs * cs * a - 2.0 * cs * sn * b + sn * sn * d;
    const double r01 = cs * sn * a + (cs * cs - sn * sn) * b - cs * sn * d;
    const double r11 = sn * sn * a + 2.0 * cs * sn * b + cs * cs * d;
    return {r00, r01, r01, r11};
}

Cov2 liu_q_covariance(int index) {
    detail::require(index >= 0 && index < 9, "liu_q_covariance: blob index out of range");
    const AxisSpec& s = kLiuQ[static_cast<std::size_t>(index)];
    return rotate(Cov2{s.major, 0.0, 0.0, s.minor}, s.angle);
}

}  // namespace blobs

namespace {

struct Chol2 {
    double l00, l10, l11;
};

Chol2 chol2(const Cov2& c) {
    const double l00 = std::sqrt(c[0]);
    const double l10 = c[2] / l00;
    const double l11 = std::sqrt(c[3] - l10 * l10);
    return {l00, l10, l11};
}

// Draws `count` points from the nine-blob mixture; cov_for(blob) gives the
// Cholesky factor of each blob's covariance.
template <class CovFor>
Sample draw_mixture(Index count, Rng& rng, CovFor&& cov_for) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Sample out(count, 2);
    const int blobs_total = blobs::kGridSide * blobs::kGridSide;
    for (Index i = 0; i < count; ++i) {
        const int blob = static_cast<int>(uniform_below(rng, static_cast<std::uint64_t>(blobs_total)));
        const Chol2& l = cov_for(blob);
        const double z0 = normal(rng);
        const double z1 = normal(rng);
        out(i, 0) = static_cast<double>(blob / blobs::kGridSide) + l.l00 * z0;
        out(i, 1) = static_cast<double>(blob % blobs::kGridSide) + l.l10 * z0 + l.l11 * z1;
    }
    return out;
}

void check_sizes(Index n, Index m, const char* where) {
    detail::require(n >= 1 && m >= 1, std::string(where) + ": sample sizes must be positive");
}

}  // namespace

TwoSample blobs_rotated(Index n, Index m, double theta, std::uint64_t seed) {
    check_sizes(n, m, "blobs_rotated");
    const Chol2 lp = chol2(blobs::kRotatedBase);
    const Chol2 lq = chol2(blobs::rotate(blobs::kRotatedBase, theta));
    Rng rx(derive_seed(seed, 1));
    Rng ry(derive_seed(seed, 2));
    TwoSample ts;
    ts.x = draw_mixture(n, rx, [&](int) -> const Chol2& { return lp; });
    ts.y = draw_mixture(m, ry, [&](int) -> const Chol2& { return lq; });
    std::ostringstream os;
    os << "blobs_rotated(theta=" << theta << ")";
    ts.descriptor = os.str();
    return ts;
}

TwoSample blobs_liu(Index n, Index m, std::uint64_t seed, bool null_mode) {
    check_sizes(n, m, "blobs_liu");
    const double v = blobs::kLiuIsotropicVariance;
    const Chol2 lp = chol2(Cov2{v, 0.0, 0.0, v});
    std::array<Chol2, 9> lq{};
    for (int b = 0; b < 9; ++b) lq[static_cast<std::size_t>(b)] = chol2(blobs::liu_q_covariance(b));
    Rng rx(derive_seed(seed, 1));
    Rng ry(derive_seed(seed, 2));
    TwoSample ts;
    ts.x = draw_mixture(n, rx, [&](int) -> const Chol2& { return lp; });
    if (null_mode) {
        ts.y = draw_mixture(m, ry, [&](int) -> const Chol2& { return lp; });
    } else {
        ts.y = draw_mixture(m, ry, [&](int b) -> const Chol2& { return lq[static_cast<std::size_t>(b)]; });
    }
    ts.descriptor = null_mode ? "blobs_liu(null)" : "blobs_liu";
    return ts;
}

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_line(std::string_view line, char delim) {
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(delim, start);
        if (pos == std::string_view::npos) {
            cells.push_back(trim(line.substr(start)));
            break;
        }
        cells.push_back(trim(line.substr(start, pos - start)));
        start = pos + 1;
    }
    return cells;
}

}  // namespace

Sample load_csv(const std::string& path, const CsvOptions& options) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open CSV file '" + path + "'");

    std::string line;
    std::size_t line_no = 0;
    std::size_t width = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!trim(line).empty()) {
            width = split_line(line, options.delimiter).size();
            have_header = true;
            break;
        }
    }
    if (!have_header) throw DataError("'" + path + "': missing header row");

    std::vector<int> cols;
    if (options.columns) {
        cols = *options.columns;
        if (cols.empty()) throw DataError("'" + path + "': empty column selection");
        for (int c : cols) {
            if (c < 0 || static_cast<std::size_t>(c) >= width) {
                throw DataError("'" + path + "': column " + std::to_string(c) + " out of range (file has " +
                                std::to_string(width) + " columns)");
            }
        }
    } else {
        for (std::size_t c = 0; c < width; ++c) cols.push_back(static_cast<int>(c));
    }

    std::vector<double> values;
    Index rows = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto cells = split_line(line, options.delimiter);
        if (cells.size() != width) {
            throw DataError("'" + path + "' line " + std::to_string(line_no) + ": expected " + std::to_string(width) +
                            " fields, found " + std::to_string(cells.size()));
        }
        for (int c : cols) {
            const std::string_view cell = cells[static_cast<std::size_t>(c)];
            double v = 0.0;
            const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
            if (cell.empty() || res.ec != std::errc() || res.ptr != cell.data() + cell.size()) {
                throw DataError("'" + path + "' line " + std::to_string(line_no) + ", column " + std::to_string(c) +
                                ": non-numeric value '" + std::string(cell) + "'");
            }
            values.push_back(v);
        }
        ++rows;
    }
    if (rows == 0) throw DataError("'" + path + "': no data rows");
    const auto d = static_cast<Index>(cols.size());
    return Eigen::Map<const Sample>(values.data(), rows, d);
}

void write_csv(const std::string& path, const Sample& s, char delimiter) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write CSV file '" + path + "'");
    for (Index j = 0; j < s.cols(); ++j) out << (j ? std::string(1, delimiter) : std::string()) << 'x' << j;
    out << '\n';
    char buf[64];
    for (Index i = 0; i < s.rows(); ++i) {
        for (Index j = 0; j < s.cols(); ++j) {
            const auto res = std::to_chars(buf, buf + sizeof(buf), s(i, j));
            if (j) out << delimiter;
            out.write(buf, res.ptr - buf);
        }
        out << '\n';
    }
    if (!out) throw DataError("failed writing CSV file '" + path + "'");
}

Sample subsample_without_replacement(const Sample& s, Index size, std::uint64_t seed) {
    if (size > s.rows()) throw InvalidArgument("subsample_without_replacement: size exceeds sample");
    detail::require(size >= 0, "subsample_without_replacement: negative size");
    Rng rng(seed);
    return take_rows(s, sample_indices(s.rows(), size, rng));
}

SplitData split(const TwoSample& ts, SplitRatio r, std::uint64_t seed) {
    detail::require_same_dim(ts.x, ts.y, "split");
    const Index n = ts.x.rows();
    const Index m = ts.y.rows();
    const Index ntr = r.train_size(n);
    const Index mtr = r.train_size(m);
    if (ntr < 1 || mtr < 1 || ntr >= n || mtr >= m) {
        throw InvalidArgument("split: ratio " + std::to_string(r.r) + " leaves an empty part for sizes " +
                              std::to_string(n) + "/" + std::to_string(m));
    }
    Rng rng(seed);
    SplitData out;
    out.ratio = r.r;
    std::vector<Index> px = sample_indices(n, n, rng);
    std::vector<Index> py = sample_indices(m, m, rng);
    out.xtr_index.assign(px.begin(), px.begin() + ntr);
    out.xte_index.assign(px.begin() + ntr, px.end());
    out.ytr_index.assign(py.begin(), py.begin() + mtr);
    out.yte_index.assign(py.begin() + mtr, py.end());
    out.xtr = take_rows(ts.x, out.xtr_index);
    out.xte = take_rows(ts.x, out.xte_index);
    out.ytr = take_rows(ts.y, out.ytr_index);
    out.yte = take_rows(ts.y, out.yte_index);
    return out;
}

}  // namespace wits
