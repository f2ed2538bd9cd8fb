#include <doctest.h>

#include "testing.hpp"
#include "wits/mmd_stats.hpp"
#include "wits/witness.hpp"

#include <cmath>

using namespace wits;
using namespace wits::testing;

namespace {

std::vector<double> delta_vector(Index n, Index m) {
    std::vector<double> d;
    for (Index i = 0; i < n; ++i) d.push_back(1.0 / static_cast<double>(n));
    for (Index j = 0; j < m; ++j) d.push_back(-1.0 / static_cast<double>(m));
    return d;
}

// Dense solve of (K N_c K / N + lambda K) alpha = K delta with N_c written out entrywise.
Eigen::VectorXd dense_kfda_oracle(const Kernel& k, double lambda, const Sample& x, const Sample& y, double c) {
    const Index n = x.rows(), m = y.rows(), total = n + m;
    const Sample z = pool(x, y);
    Eigen::MatrixXd kz(total, total), nc = Eigen::MatrixXd::Zero(total, total);
    for (Index i = 0; i < total; ++i)
        for (Index j = 0; j < total; ++j) kz(i, j) = kernel_oracle(k, z, i, z, j);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j) nc(i, j) = ((i == j ? 1.0 : 0.0) - 1.0 / static_cast<double>(n)) / c;
    for (Index i = 0; i < m; ++i)
        for (Index j = 0; j < m; ++j)
            nc(n + i, n + j) = ((i == j ? 1.0 : 0.0) - 1.0 / static_cast<double>(m)) / (1.0 - c);
    const auto d = delta_vector(n, m);
    const Eigen::VectorXd delta = Eigen::Map<const Eigen::VectorXd>(d.data(), total);
    const Eigen::MatrixXd a = kz * nc * kz / static_cast<double>(total) + lambda * kz;
    return a.fullPivLu().solve(kz * delta);
}

double mean(const Vector& v) { return v.mean(); }

}  // namespace

TEST_CASE("SplitRatio ceiling rule") {
    CHECK(SplitRatio(0.5).train_size(100) == 50);
    CHECK(SplitRatio(0.5).train_size(101) == 51);
    CHECK(SplitRatio(0.5).test_size(101) == 50);
    CHECK(SplitRatio(0.1).train_size(100) == 10);
    CHECK(SplitRatio(0.3).train_size(10) == 3);
    CHECK(SplitRatio(0.7).train_size(10) == 7);
    CHECK_THROWS_AS(SplitRatio(0.0), InvalidArgument);
    CHECK_THROWS_AS(SplitRatio(1.0), InvalidArgument);
}

TEST_CASE("mmd_witness") {
    const Kernel k = Kernel::gaussian(0.8);
    Sample x(1, 2), y(1, 2);
    x << 0.0, 0.5;
    y << 1.0, -0.5;
    const WitnessModel h = mmd_witness(k, x, y);
    const Sample z = normal_sample(9, 2, 3);
    const Vector hz = evaluate_witness(h, z);
    for (Index j = 0; j < z.rows(); ++j) {
        CHECK(hz(j) == doctest::Approx(kernel_oracle(k, x, 0, z, j) - kernel_oracle(k, y, 0, z, j)).epsilon(1e-14));
    }

    Rng rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        const Sample xtr = normal_sample(20, 2, rng()), ytr = normal_sample(20, 2, rng(), 0.4);
        const WitnessModel w = mmd_witness(k, xtr, ytr);
        CHECK(w.orientation() == 1);
        CHECK(w.basis().rows() == 40);
        const double gap = mean(evaluate_witness(w, xtr)) - mean(evaluate_witness(w, ytr));
        CHECK(std::abs(gap - mmd_v_statistic(k, xtr, ytr)) <= 1e-12);
        CHECK(gap >= 0.0);

        // Independent mean-embedding evaluation on a grid.
        const Sample grid = uniform_sample(25, 2, rng(), -2.0, 2.0);
        const Vector hg = evaluate_witness(w, grid);
        for (Index j = 0; j < grid.rows(); ++j) {
            double mx = 0.0, my = 0.0;
            for (Index i = 0; i < 20; ++i) mx += kernel_oracle(k, xtr, i, grid, j) / 20.0;
            for (Index i = 0; i < 20; ++i) my += kernel_oracle(k, ytr, i, grid, j) / 20.0;
            CHECK(std::abs(hg(j) - (mx - my)) <= 1e-14);
        }
    }
    CHECK_THROWS_AS(mmd_witness(k, Sample(0, 2), y), InvalidArgument);
}

TEST_CASE("build_centering") {
    CHECK(build_centering(1, 1, 0.3).isZero(0.0));
    const Matrix c2 = build_centering(2, 3, 0.5);
    CHECK(c2(0, 0) == doctest::Approx(1.0));
    CHECK(c2(0, 1) == doctest::Approx(-1.0));
    CHECK(c2(1, 0) == doctest::Approx(-1.0));
    CHECK(c2(1, 1) == doctest::Approx(1.0));
    CHECK(c2.block(0, 2, 2, 3).isZero(0.0));

    const double c = 0.3;
    const Matrix nc = build_centering(5, 4, c);
    const Matrix p5 = nc.topLeftCorner(5, 5) * c;
    CHECK((p5 * p5 - p5).cwiseAbs().maxCoeff() <= 1e-12);
    const Matrix p4 = nc.bottomRightCorner(4, 4) * (1.0 - c);
    CHECK((p4 * p4 - p4).cwiseAbs().maxCoeff() <= 1e-12);

    CHECK_THROWS_AS(build_centering(2, 2, 0.0), InvalidArgument);
    CHECK_THROWS_AS(build_centering(2, 2, 1.0), InvalidArgument);
    CHECK_THROWS_AS(build_centering(0, 2, 0.5), InvalidArgument);
}

TEST_CASE("kfda with singleton classes reduces to delta / lambda") {
    Sample x(1, 2), y(1, 2);
    x << 0.0, 0.0;
    y << 0.5, 0.1;
    for (double lambda : {1e-3, 1e-1, 10.0}) {
        const WitnessModel h = kfda_witness_exact(Kernel::gaussian(1.0), lambda, x, y);
        CHECK(h.coefficients()(0) * h.orientation() == doctest::Approx(1.0 / lambda).epsilon(1e-9));
        CHECK(h.coefficients()(1) * h.orientation() == doctest::Approx(-1.0 / lambda).epsilon(1e-9));
    }
}

TEST_CASE("kfda matches a dense direct oracle and satisfies the residual bound") {
    Rng rng(23);
    for (int trial = 0; trial < 10; ++trial) {
        const Sample x = normal_sample(15, 2, rng()), y = normal_sample(15, 2, rng(), 0.3);
        const Kernel k = Kernel::gaussian(uniform_real(rng, 0.5, 1.5));
        const double c = trial % 2 ? 0.5 : 0.4;
        const Eigen::VectorXd expect = dense_kfda_oracle(k, 1e-2, x, y, c);
        const WitnessModel h = kfda_witness_exact(k, 1e-2, x, y, c);
        const Eigen::VectorXd got = h.coefficients() * static_cast<double>(h.orientation());
        CHECK((got - expect).norm() <= 1e-6 * expect.norm());

        const KfdaSolution s = solve_kfda(gram_matrix(k, pool(x, y)), pooled_labels(15, 15), 1e-2, c);
        CHECK(s.residual <= 1e-8 * s.rhs_norm);
        CHECK(s.mean_difference >= 0.0);
    }
}

TEST_CASE("kfda solve is label-order invariant") {
    const Sample x = normal_sample(6, 2, 1), y = normal_sample(5, 2, 2, 0.5);
    const Kernel k = Kernel::gaussian(1.0);
    const Sample z = pool(x, y);
    const KfdaSolution base = solve_kfda(gram_matrix(k, z), pooled_labels(6, 5), 0.1, 6.0 / 11.0);

    // Interleave the rows and permute labels accordingly.
    std::vector<Index> order = {6, 0, 7, 1, 8, 2, 9, 3, 10, 4, 5};
    const Sample zp = take_rows(z, order);
    Labels lp;
    for (Index i : order) lp.push_back(i < 6 ? 1 : -1);
    const KfdaSolution perm = solve_kfda(gram_matrix(k, zp), lp, 0.1, 6.0 / 11.0);
    for (std::size_t i = 0; i < order.size(); ++i) {
        CHECK(perm.alpha(static_cast<Index>(i)) == doctest::Approx(base.alpha(order[i])).epsilon(1e-9));
    }
    CHECK(perm.mean_difference == doctest::Approx(base.mean_difference).epsilon(1e-12));
}

TEST_CASE("kfda errors") {
    const Sample x = normal_sample(4, 2, 1), y = normal_sample(4, 2, 2);
    CHECK_THROWS_AS(kfda_witness_exact(Kernel::gaussian(1.0), 0.0, x, y), InvalidArgument);
    CHECK_THROWS_AS(kfda_witness_exact(Kernel::gaussian(1.0), -1.0, x, y), InvalidArgument);
    CHECK_THROWS_AS(kfda_witness_exact(Kernel::gaussian(1.0), 1.0, Sample(0, 2), y), InvalidArgument);
    CHECK_THROWS_AS(kfda_witness_exact(Kernel::gaussian(1.0), 1.0, x, y, 1.5), InvalidArgument);
}

TEST_CASE("kfda tends to the MMD witness as lambda grows") {
    Rng rng(29);
    for (int trial = 0; trial < 10; ++trial) {
        const Sample x = normal_sample(12, 2, rng()), y = normal_sample(14, 2, rng(), 0.5);
        const WitnessModel h = kfda_witness_exact(Kernel::gaussian(1.0), 1e6, x, y);
        const Eigen::VectorXd a = h.coefficients() * (1e6 * h.orientation());
        const auto d = delta_vector(12, 14);
        const Eigen::VectorXd delta = Eigen::Map<const Eigen::VectorXd>(d.data(), 26);
        CHECK(a.dot(delta) / (a.norm() * delta.norm()) >= 0.999);
    }
}

TEST_CASE("witness orientation is nonnegative on training data") {
    Rng rng(31);
    for (int trial = 0; trial < 20; ++trial) {
        const Index n = uniform_int(rng, 2, 20), m = uniform_int(rng, 2, 20);
        const Sample x = normal_sample(n, 2, rng()), y = normal_sample(m, 2, rng(), uniform_real(rng, -1, 1));
        const Kernel k = Kernel::gaussian(uniform_real(rng, 0.2, 3.0));
        const double lambda = std::pow(10.0, uniform_real(rng, -4, 3));
        for (const WitnessModel& h : {kfda_witness_exact(k, lambda, x, y), mmd_witness(k, x, y)}) {
            CHECK(mean(evaluate_witness(h, x)) - mean(evaluate_witness(h, y)) >= -1e-12);
        }
    }
}

TEST_CASE("evaluate_witness") {
    const Sample basis = normal_sample(4, 3, 1);
    const Kernel k = Kernel::gaussian(0.9);
    const WitnessModel zero(basis, Vector::Zero(4), k);
    CHECK(evaluate_witness(zero, normal_sample(5, 3, 2)).isZero(0.0));

    const WitnessModel single(basis.topRows(1), Vector::Ones(1), k);
    CHECK(evaluate_witness(single, basis.topRows(1))(0) == 1.0);

    Rng rng(37);
    for (int trial = 0; trial < 10; ++trial) {
        const Sample b = normal_sample(7, 3, rng()), z = normal_sample(6, 3, rng());
        const Vector coef = Vector::Random(7);
        const WitnessModel h(b, coef, k, trial % 2 ? -1 : 1);
        const auto expect = witness_oracle(k, b, std::vector<double>(coef.data(), coef.data() + 7), z);
        const Vector got = evaluate_witness(h, z);
        for (Index j = 0; j < 6; ++j) CHECK(std::abs(got(j) - h.orientation() * expect[j]) <= 1e-14);
        const Vector neg = evaluate_witness(h.negated(), z);
        CHECK((neg + got).isZero(0.0));
    }
    CHECK_THROWS_AS(evaluate_witness(zero, normal_sample(2, 2, 1)), DimensionMismatch);
    CHECK_THROWS_AS(WitnessModel(basis, Vector::Zero(3), k), InvalidArgument);
    CHECK_THROWS_AS(WitnessModel(basis, Vector::Zero(4), k, 0), InvalidArgument);
}

TEST_CASE("empirical SNR") {
    Vector hx(2), hy(2);
    hx << 1.0, 1.0;
    hy << 0.0, 0.0;
    CHECK(snr_from_values(hx, hy, 0.5, 1e-12) == doctest::Approx(1e6).epsilon(1e-12));
    CHECK_THROWS_AS(snr_from_values(hx, hy, 0.5, 0.0), NumericalError);

    const Vector flat = Vector::Constant(5, 0.3);
    CHECK(snr_from_values(flat, flat, 0.5, 1e-3) == 0.0);

    Rng rng(41);
    for (int trial = 0; trial < 20; ++trial) {
        const Vector a = Vector::Random(8), b = Vector::Random(6).array() + 0.2;
        const double c = uniform_real(rng, 0.2, 0.8);
        const double gamma = uniform_real(rng, 0.1, 10.0);
        const std::vector<double> va(a.data(), a.data() + 8), vb(b.data(), b.data() + 6);
        const double expect = (a.mean() - b.mean()) / std::sqrt(sample_variance(va) / c + sample_variance(vb) / (1 - c));
        CHECK(snr_from_values(a, b, c, 0.0) == doctest::Approx(expect).epsilon(1e-12));
        CHECK(snr_from_values(gamma * a, gamma * b, c, 0.0) == doctest::Approx(expect).epsilon(1e-12));
        CHECK(snr_from_values(gamma * a, gamma * b, c, gamma * gamma * 0.01) ==
              doctest::Approx(snr_from_values(a, b, c, 0.01)).epsilon(1e-12));
    }

    // Rescaling a witness cannot change which of two witnesses has the larger SNR.
    const Sample x = normal_sample(30, 2, 5), y = normal_sample(30, 2, 6, 0.5);
    const WitnessModel h1 = mmd_witness(Kernel::gaussian(0.5), x, y);
    const WitnessModel h2 = kfda_witness_exact(Kernel::gaussian(1.0), 0.1, x, y);
    const WitnessModel h2s(h2.basis(), h2.coefficients() * 1e4, h2.kernel(), h2.orientation());
    CHECK((empirical_snr(h1, x, y, 0.5, 0.0) > empirical_snr(h2, x, y, 0.5, 0.0)) ==
          (empirical_snr(h1, x, y, 0.5, 0.0) > empirical_snr(h2s, x, y, 0.5, 0.0)));
    CHECK_THROWS_AS(empirical_snr(h1, x.topRows(1), y, 0.5, 0.0), InvalidArgument);
}

TEST_CASE("population SNR uses population moments") {
    Vector hx(3), hy(2);
    const Sample x = normal_sample(3, 1, 1), y = normal_sample(2, 1, 2);
    const WitnessModel h = mmd_witness(Kernel::gaussian(1.0), x, y);
    const Vector ex = evaluate_witness(h, x), ey = evaluate_witness(h, y);
    const double vx = (ex.array() - ex.mean()).square().mean();
    const double vy = (ey.array() - ey.mean()).square().mean();
    const double expect = (ex.mean() - ey.mean()) / std::sqrt(vx / 0.5 + vy / 0.5);
    CHECK(population_snr(h, x, y, 0.5) == doctest::Approx(expect).epsilon(1e-13));
}

TEST_CASE("linear-kernel KFDA converges to the population solution") {
    // P = N(mu, S_P), Q = N(0, S_Q) in 2-d; with c = n / (n + m) the empirical
    // operator is the sum of the two biased class covariances.
    Eigen::Matrix2d lp, lq;
    lp << 1.0, 0.0, 0.4, 0.8;
    lq << 0.7, 0.0, -0.3, 1.1;
    const Eigen::Vector2d mu(0.6, -0.2);
    const double lambda = 0.5;
    const Eigen::Matrix2d sigma = lp * lp.transpose() + lq * lq.transpose();
    const Eigen::Vector2d w_pop = (sigma + lambda * Eigen::Matrix2d::Identity()).ldlt().solve(mu);

    std::vector<double> errors;
    for (Index n : {25, 50, 100, 200}) {
        double total = 0.0;
        const int reps = 40;
        for (int rep = 0; rep < reps; ++rep) {
            const std::uint64_t s = derive_seed(static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(rep));
            Sample x = normal_sample(n, 2, derive_seed(s, 1)), y = normal_sample(n, 2, derive_seed(s, 2));
            x = (x * lp.transpose()).rowwise() + mu.transpose();
            y = y * lq.transpose();
            const WitnessModel h = kfda_witness_exact(Kernel::linear(), lambda, x, y);
            const Eigen::Vector2d w = h.basis().transpose() * h.coefficients() * static_cast<double>(h.orientation());
            total += (w - w_pop).norm();
        }
        errors.push_back(total / reps);
    }
    for (std::size_t i = 1; i < errors.size(); ++i) CHECK(errors[i] < errors[i - 1]);
}

TEST_CASE("pool and labels") {
    const Sample x = normal_sample(2, 2, 1), y = normal_sample(3, 2, 2);
    const Sample z = pool(x, y);
    CHECK(z.rows() == 5);
    CHECK(z.row(1) == x.row(1));
    CHECK(z.row(4) == y.row(2));
    CHECK(pooled_labels(2, 3) == Labels{1, 1, -1, -1, -1});
    CHECK_THROWS_AS(pool(x, normal_sample(1, 3, 1)), DimensionMismatch);
}
