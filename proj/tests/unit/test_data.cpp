#include <doctest.h>

#include "testing.hpp"
#include "wits/data.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <set>

using namespace wits;
using namespace wits::testing;

namespace {

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / ("wits_test_" + name)).string();
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream(path) << text;
}

// Mean and covariance of the rows nearest each grid center.
struct CellMoments {
    std::array<double, 9> count{};
    std::array<std::array<double, 2>, 9> mean{};
    std::array<Cov2, 9> cov{};
};

CellMoments cell_moments(const Sample& s) {
    CellMoments cm;
    std::array<std::array<double, 5>, 9> acc{};
    for (Index i = 0; i < s.rows(); ++i) {
        const int a = static_cast<int>(std::clamp(std::round(s(i, 0)), 0.0, 2.0));
        const int b = static_cast<int>(std::clamp(std::round(s(i, 1)), 0.0, 2.0));
        auto& r = acc[3 * a + b];
        r[0] += s(i, 0);
        r[1] += s(i, 1);
        r[2] += s(i, 0) * s(i, 0);
        r[3] += s(i, 0) * s(i, 1);
        r[4] += s(i, 1) * s(i, 1);
        cm.count[3 * a + b] += 1;
    }
    for (int c = 0; c < 9; ++c) {
        const double n = cm.count[c];
        const double mx = acc[c][0] / n, my = acc[c][1] / n;
        cm.mean[c] = {mx, my};
        const double cxy = acc[c][3] / n - mx * my;
        cm.cov[c] = {acc[c][2] / n - mx * mx, cxy, cxy, acc[c][4] / n - my * my};
    }
    return cm;
}

// Independent mixture sampler with explicit per-blob covariances.
Sample mixture_oracle(Index count, std::uint64_t seed, const std::array<Cov2, 9>& covs) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> pick(0, 8);
    std::normal_distribution<double> normal;
    Sample s(count, 2);
    for (Index i = 0; i < count; ++i) {
        const int b = pick(rng);
        Eigen::Matrix2d c;
        c << covs[b][0], covs[b][1], covs[b][2], covs[b][3];
        const Eigen::Matrix2d l = c.llt().matrixL();
        const Eigen::Vector2d z = l * Eigen::Vector2d(normal(rng), normal(rng));
        s(i, 0) = b / 3 + z(0);
        s(i, 1) = b % 3 + z(1);
    }
    return s;
}

}  // namespace

TEST_CASE("rotation of the base covariance") {
    const Cov2 r = blobs::rotate(blobs::kRotatedBase, std::numbers::pi / 2);
    CHECK(r[0] == doctest::Approx(0.01).epsilon(1e-12));
    CHECK(r[3] == doctest::Approx(0.03).epsilon(1e-12));
    CHECK(std::abs(r[1]) <= 1e-15);
    const Cov2 q = blobs::rotate(blobs::kRotatedBase, std::numbers::pi / 4);
    CHECK(q[0] == doctest::Approx(0.02));
    CHECK(q[1] == doctest::Approx(0.01));
    CHECK(q[1] == q[2]);
}

TEST_CASE("blobs_rotated") {
    const TwoSample null = blobs_rotated(100, 80, 0.0, 3);
    CHECK(null.x.rows() == 100);
    CHECK(null.y.rows() == 80);
    CHECK(null.x.cols() == 2);

    const TwoSample again = blobs_rotated(100, 80, 0.0, 3);
    CHECK(again.x == null.x);
    CHECK(again.y == null.y);
    CHECK(blobs_rotated(100, 80, 0.0, 4).x != null.x);

    // Mixture mean is the grid-center average (1, 1).
    const Index big = 100000;
    const TwoSample ts = blobs_rotated(big, big, std::numbers::pi / 4, 11);
    for (const Sample* s : {&ts.x, &ts.y}) {
        const Eigen::RowVector2d mean = s->colwise().mean();
        for (int j = 0; j < 2; ++j) {
            const double var = 2.0 / 3.0 + 0.03;
            CHECK(std::abs(mean(j) - 1.0) <= 3.0 * std::sqrt(var / big));
        }
    }
    CHECK_THROWS_AS(blobs_rotated(0, 5, 0.0, 1), InvalidArgument);
}

TEST_CASE("blobs_liu per-blob covariance matches an independent sampler") {
    const Index big = 200000;
    const TwoSample ts = blobs_liu(big, big, 5);
    CHECK(ts.x.cols() == 2);
    CHECK(ts.y.cols() == 2);

    std::array<Cov2, 9> p{}, q{};
    for (int b = 0; b < 9; ++b) {
        p[b] = {blobs::kLiuIsotropicVariance, 0.0, 0.0, blobs::kLiuIsotropicVariance};
        q[b] = blobs::liu_q_covariance(b);
        Eigen::Matrix2d c;
        c << q[b][0], q[b][1], q[b][2], q[b][3];
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(c);
        CHECK(es.eigenvalues().minCoeff() >= 0.01 - 1e-12);
        CHECK(es.eigenvalues().maxCoeff() <= 0.09 + 1e-12);
    }
    // Nearest-center truncation affects both sides equally.
    const CellMoments got_x = cell_moments(ts.x), want_x = cell_moments(mixture_oracle(big, 77, p));
    const CellMoments got_y = cell_moments(ts.y), want_y = cell_moments(mixture_oracle(big, 78, q));
    for (const auto& [got, want] : {std::pair{got_x, want_x}, std::pair{got_y, want_y}}) {
        for (int b = 0; b < 9; ++b) {
            const double n = got.count[b];
            const Cov2& c = want.cov[b];
            const double se00 = std::sqrt(2.0 * c[0] * c[0] / n), se11 = std::sqrt(2.0 * c[3] * c[3] / n);
            const double se01 = std::sqrt((c[0] * c[3] + c[1] * c[1]) / n);
            CHECK(std::abs(got.cov[b][0] - c[0]) <= 5.0 * std::sqrt(2.0) * se00);
            CHECK(std::abs(got.cov[b][3] - c[3]) <= 5.0 * std::sqrt(2.0) * se11);
            CHECK(std::abs(got.cov[b][1] - c[1]) <= 5.0 * std::sqrt(2.0) * se01);
        }
    }

    const TwoSample null = blobs_liu(big, big, 6, true);
    const CellMoments ny = cell_moments(null.y);
    for (int b = 0; b < 9; ++b) {
        CHECK(std::abs(ny.cov[b][0] - want_x.cov[b][0]) <= 0.002);
        CHECK(std::abs(ny.cov[b][1]) <= 0.002);
    }
}

TEST_CASE("load_csv basics") {
    const std::string path = temp_path("basic.csv");
    write_text(path, "a,b\n1,2\n3.5,-4\n\n5e-3, 6\n");
    const Sample s = load_csv(path);
    REQUIRE(s.rows() == 3);
    REQUIRE(s.cols() == 2);
    CHECK(s(1, 0) == 3.5);
    CHECK(s(2, 0) == 5e-3);
    CHECK(s(2, 1) == 6.0);

    const std::string wide = temp_path("wide.csv");
    write_text(wide, "a,b,c,d\n1,2,3,4\n5,6,7,8\n");
    CsvOptions opts;
    opts.columns = std::vector<int>{1, 3};
    const Sample sub = load_csv(wide, opts);
    REQUIRE(sub.cols() == 2);
    CHECK(sub(0, 0) == 2.0);
    CHECK(sub(1, 1) == 8.0);

    const std::string semi = temp_path("semi.csv");
    write_text(semi, "a;b\n1;2\n");
    CsvOptions so;
    so.delimiter = ';';
    CHECK(load_csv(semi, so)(0, 1) == 2.0);
}

TEST_CASE("load_csv errors name the location") {
    auto message = [](const std::string& path, const CsvOptions& o = {}) {
        try {
            load_csv(path, o);
        } catch (const DataError& e) {
            return std::string(e.what());
        }
        return std::string("no error");
    };
    const std::string missing = temp_path("does_not_exist.csv");
    CHECK(message(missing).find(missing) != std::string::npos);

    const std::string bad = temp_path("bad.csv");
    write_text(bad, "a,b\n1,2\n3,x\n");
    const std::string m1 = message(bad);
    CHECK(m1.find("line 3") != std::string::npos);
    CHECK(m1.find("column 1") != std::string::npos);

    const std::string ragged = temp_path("ragged.csv");
    write_text(ragged, "a,b\n1,2\n3\n");
    CHECK(message(ragged).find("line 3") != std::string::npos);

    const std::string empty = temp_path("empty.csv");
    write_text(empty, "");
    CHECK(message(empty).find("header") != std::string::npos);

    const std::string header_only = temp_path("header_only.csv");
    write_text(header_only, "a,b\n");
    CHECK(message(header_only).find("no data") != std::string::npos);

    CsvOptions out_of_range;
    out_of_range.columns = std::vector<int>{5};
    CHECK(message(bad, out_of_range).find("out of range") != std::string::npos);
}

TEST_CASE("CSV write/load round trip is bit exact") {
    Rng rng(8);
    Sample s(50, 4);
    for (Index i = 0; i < s.rows(); ++i) {
        for (Index j = 0; j < s.cols(); ++j) {
            const double mant = uniform_real(rng, -1.0, 1.0);
            s(i, j) = std::ldexp(mant, static_cast<int>(uniform_int(rng, -300, 300)));
        }
    }
    s(0, 0) = std::numeric_limits<double>::denorm_min();
    s(0, 1) = std::numeric_limits<double>::max();
    s(0, 2) = -0.0;
    s(0, 3) = 0.1;
    const std::string path = temp_path("roundtrip.csv");
    write_csv(path, s);
    const Sample back = load_csv(path);
    REQUIRE(back.rows() == s.rows());
    for (Index i = 0; i < s.rows(); ++i)
        for (Index j = 0; j < s.cols(); ++j) CHECK(std::bit_cast<std::uint64_t>(back(i, j)) == std::bit_cast<std::uint64_t>(s(i, j)));
}

TEST_CASE("subsample without replacement") {
    Sample s(100, 1);
    for (Index i = 0; i < 100; ++i) s(i, 0) = static_cast<double>(i);
    const Sample all = subsample_without_replacement(s, 100, 3);
    std::set<double> seen(all.data(), all.data() + 100);
    CHECK(seen.size() == 100);
    CHECK(subsample_without_replacement(s, 10, 1) != subsample_without_replacement(s, 10, 2));
    CHECK(subsample_without_replacement(s, 10, 1) == subsample_without_replacement(s, 10, 1));
    CHECK_THROWS_AS(subsample_without_replacement(s, 101, 1), InvalidArgument);

    std::vector<int> freq(20, 0);
    Sample small(20, 1);
    for (Index i = 0; i < 20; ++i) small(i, 0) = static_cast<double>(i);
    const int reps = 10000;
    for (int r = 0; r < reps; ++r) {
        const Sample sub = subsample_without_replacement(small, 5, derive_seed(99, r));
        std::set<double> uniq(sub.data(), sub.data() + 5);
        CHECK(uniq.size() == 5);
        for (double v : uniq) ++freq[static_cast<int>(v)];
    }
    const double p = 5.0 / 20.0;
    for (int f : freq) CHECK(std::abs(f / double(reps) - p) <= 4.0 * std::sqrt(p * (1 - p) / reps));
}

TEST_CASE("split") {
    const TwoSample ts = blobs_rotated(100, 100, 0.0, 1);
    const SplitData half = split(ts, SplitRatio(0.5), 2);
    CHECK(half.xtr.rows() == 50);
    CHECK(half.xte.rows() == 50);
    CHECK(half.ytr.rows() == 50);

    const TwoSample odd = blobs_rotated(101, 37, 0.0, 1);
    const SplitData s = split(odd, SplitRatio(0.5), 3);
    CHECK(s.xtr.rows() == 51);
    CHECK(s.xte.rows() == 50);
    CHECK(s.ytr.rows() == 19);
    CHECK(s.yte.rows() == 18);

    std::set<Index> xi(s.xtr_index.begin(), s.xtr_index.end());
    for (Index i : s.xte_index) CHECK(xi.insert(i).second);
    CHECK(xi.size() == 101);
    CHECK(*xi.rbegin() == 100);
    for (std::size_t i = 0; i < s.xtr_index.size(); ++i) CHECK(s.xtr.row(static_cast<Index>(i)) == odd.x.row(s.xtr_index[i]));
    for (std::size_t i = 0; i < s.yte_index.size(); ++i) CHECK(s.yte.row(static_cast<Index>(i)) == odd.y.row(s.yte_index[i]));

    const SplitData s2 = split(odd, SplitRatio(0.5), 3);
    CHECK(s2.xtr_index == s.xtr_index);
    CHECK(split(odd, SplitRatio(0.5), 4).xtr_index != s.xtr_index);

    TwoSample tiny{Sample::Zero(1, 2), Sample::Zero(4, 2), ""};
    CHECK_THROWS_AS(split(tiny, SplitRatio(0.5), 1), InvalidArgument);
}
