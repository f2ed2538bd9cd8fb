#include <doctest.h>

#include "testing.hpp"
#include "wits/modelsel.hpp"

#include <algorithm>
#include <cmath>
#include <set>

using namespace wits;
using namespace wits::testing;

TEST_CASE("ParamGrid defaults and validation") {
    const ParamGrid g = ParamGrid::defaults();
    REQUIRE(g.kernels.size() == 10);
    REQUIRE(g.lambdas.size() == 5);
    CHECK(g.kernels.front().bandwidth == 1e-3);
    CHECK(g.kernels.back().bandwidth == 10.0);
    CHECK(g.lambdas.front() == 1e-4);
    CHECK(g.lambdas.back() == 1e3);
    CHECK(g.size() == 50);

    ParamGrid bad = g;
    bad.lambdas.push_back(0.0);
    CHECK_THROWS_AS(bad.validate(), InvalidArgument);
    bad = g;
    bad.kernels.clear();
    CHECK_THROWS_AS(bad.validate(), InvalidArgument);
}

TEST_CASE("kfold_split partitions each class") {
    const auto two = kfold_split(4, 4, 2, 1);
    REQUIRE(two.size() == 2);
    for (const auto& f : two) {
        CHECK(f.x_valid.size() == 2);
        CHECK(f.y_valid.size() == 2);
        CHECK(f.x_train.size() == 2);
    }

    Rng rng(3);
    for (int trial = 0; trial < 30; ++trial) {
        const int folds = static_cast<int>(uniform_int(rng, 2, 7));
        const Index n = uniform_int(rng, folds, 40), m = uniform_int(rng, folds, 40);
        const std::uint64_t seed = rng();
        const auto fs = kfold_split(n, m, folds, seed);
        REQUIRE(fs.size() == static_cast<std::size_t>(folds));
        std::multiset<Index> vx, vy;
        for (const auto& f : fs) {
            vx.insert(f.x_valid.begin(), f.x_valid.end());
            vy.insert(f.y_valid.begin(), f.y_valid.end());
            std::set<Index> tx(f.x_train.begin(), f.x_train.end());
            for (Index i : f.x_valid) CHECK(tx.count(i) == 0);
            CHECK(static_cast<Index>(f.x_train.size() + f.x_valid.size()) == n);
            CHECK(static_cast<Index>(f.y_train.size() + f.y_valid.size()) == m);
            CHECK(!f.x_valid.empty());
            CHECK(!f.y_valid.empty());
        }
        CHECK(static_cast<Index>(vx.size()) == n);
        CHECK(static_cast<Index>(std::set<Index>(vx.begin(), vx.end()).size()) == n);
        CHECK(static_cast<Index>(std::set<Index>(vy.begin(), vy.end()).size()) == m);
        const auto again = kfold_split(n, m, folds, seed);
        for (int f = 0; f < folds; ++f) CHECK(again[f].x_valid == fs[f].x_valid);
    }
    CHECK_THROWS_AS(kfold_split(3, 10, 5, 1), InvalidArgument);
    CHECK_THROWS_AS(kfold_split(10, 10, 1, 1), InvalidArgument);
}

TEST_CASE("singleton grid returns its candidate") {
    const Sample x = normal_sample(20, 2, 1), y = normal_sample(20, 2, 2);
    ParamGrid g{{Kernel::gaussian(1e-6)}, {1.0}};
    const CvReport r = grid_search_cv(g, x, y, 5, 3);
    CHECK(r.kernel.bandwidth == 1e-6);
    CHECK(r.lambda == 1.0);
    CHECK(r.candidates.size() == 1);
    CHECK(r.fold_seed == 3);
}

TEST_CASE("a vanishing bandwidth loses to a well-scaled one") {
    for (std::uint64_t s = 0; s < 5; ++s) {
        const Sample x = normal_sample(40, 2, derive_seed(s, 1)), y = normal_sample(40, 2, derive_seed(s, 2), 1.0);
        ParamGrid g{{Kernel::gaussian(1e-4), Kernel::gaussian(1.0)}, {1e-2}};
        const CvReport r = grid_search_cv(g, x, y, 5, s);
        CHECK(r.kernel.bandwidth == 1.0);
        CHECK(r.candidates[0].mean_score < r.candidates[1].mean_score);
        CHECK(r.best_score == r.candidates[1].mean_score);
    }
}

TEST_CASE("chosen candidate maximises the mean score and ignores grid order") {
    const Sample x = normal_sample(30, 2, 5), y = normal_sample(30, 2, 6, 0.7);
    ParamGrid g{bandwidth_grid(-1, 1, 5), {1e-3, 1e-1, 10.0}};
    const auto folds = kfold_split(x, y, 4, 9);
    const CvReport r = grid_search_cv(g, x, y, folds);
    double best = -1e300;
    for (const auto& c : r.candidates) {
        best = std::max(best, c.mean_score);
        double mean = 0.0;
        for (double f : c.fold_scores) mean += f / c.fold_scores.size();
        CHECK(c.mean_score == doctest::Approx(mean));
        CHECK(c.fold_scores.size() == 4);
    }
    CHECK(r.best_score == best);

    ParamGrid rev = g;
    std::reverse(rev.kernels.begin(), rev.kernels.end());
    std::reverse(rev.lambdas.begin(), rev.lambdas.end());
    const CvReport rr = grid_search_cv(rev, x, y, folds);
    CHECK(rr.kernel.bandwidth == r.kernel.bandwidth);
    CHECK(rr.lambda == r.lambda);
}

TEST_CASE("scores do not depend on within-class order given matched folds") {
    const Sample x = normal_sample(25, 2, 7), y = normal_sample(20, 2, 8, 0.5);
    ParamGrid g{bandwidth_grid(-0.5, 0.5, 3), {1e-2, 1.0}};
    const auto folds = kfold_split(x, y, 5, 4);

    Rng rng(12);
    std::vector<Index> px = sample_indices(25, 25, rng), py = sample_indices(20, 20, rng);
    const Sample xs = take_rows(x, px), ys = take_rows(y, py);
    // Row j of the shuffled sample is row p[j] of the original.
    std::vector<Index> inv_x(25), inv_y(20);
    for (Index j = 0; j < 25; ++j) inv_x[px[j]] = j;
    for (Index j = 0; j < 20; ++j) inv_y[py[j]] = j;
    auto remap = [](const std::vector<Index>& idx, const std::vector<Index>& inv) {
        std::vector<Index> out;
        for (Index i : idx) out.push_back(inv[i]);
        return out;
    };
    std::vector<FoldSplit> mapped;
    for (const auto& f : folds) {
        mapped.push_back({remap(f.x_train, inv_x), remap(f.x_valid, inv_x), remap(f.y_train, inv_y),
                          remap(f.y_valid, inv_y)});
    }
    const CvReport a = grid_search_cv(g, x, y, folds);
    const CvReport b = grid_search_cv(g, xs, ys, mapped);
    for (std::size_t i = 0; i < a.candidates.size(); ++i) {
        CHECK(b.candidates[i].mean_score == doctest::Approx(a.candidates[i].mean_score).epsilon(1e-8));
    }
}

TEST_CASE("degenerate candidates") {
    const Sample x = normal_sample(20, 2, 1), y = normal_sample(20, 2, 2, 0.5);
    ParamGrid mixed{{Kernel::gaussian(1e-6), Kernel::gaussian(1.0)}, {1e-2}};
    const CvReport r = grid_search_cv(mixed, x, y, 4, 1);
    CHECK(std::isinf(r.candidates[0].mean_score));
    CHECK(r.candidates[0].mean_score < 0);
    CHECK(r.kernel.bandwidth == 1.0);

    ParamGrid dead{{Kernel::gaussian(1e-6), Kernel::gaussian(1e-7)}, {1e-2}};
    CHECK_THROWS_AS(grid_search_cv(dead, x, y, 4, 1), NumericalError);
}
