#include "wits/bench.hpp"

#include "wits/falkon.hpp"
#include "wits/mmd_stats.hpp"
#include "wits/random.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>
#include <thread>

namespace wits {

std::string to_string(Method m) {
    switch (m) {
        case Method::KfdaWitness: return "kfda-witness";
        case Method::OptMmdWitness: return "opt-mmd-witness";
        case Method::MmdBoot: return "mmd-boot";
        case Method::KfdaBoot: return "kfda-boot";
    }
    return "?";
}

Method parse_method(const std::string& s) {
    for (Method m : {Method::KfdaWitness, Method::OptMmdWitness, Method::MmdBoot, Method::KfdaBoot}) {
        if (to_string(m) == s) return m;
    }
    throw InvalidArgument("unknown method '" + s + "' (expected kfda-witness, opt-mmd-witness, mmd-boot, kfda-boot)");
}

std::string to_string(DatasetKind d) {
    switch (d) {
        case DatasetKind::BlobsRotated: return "blobs_rotated";
        case DatasetKind::BlobsLiu: return "blobs_liu";
        case DatasetKind::Csv: return "csv";
    }
    return "?";
}

DatasetKind parse_dataset(const std::string& s) {
    for (DatasetKind d : {DatasetKind::BlobsRotated, DatasetKind::BlobsLiu, DatasetKind::Csv}) {
        if (to_string(d) == s) return d;
    }
    throw InvalidArgument("unknown dataset generator '" + s + "' (expected blobs_rotated, blobs_liu, csv)");
}

std::string to_string(ThresholdMode t) { return t == ThresholdMode::Analytic ? "analytic" : "permutation"; }

ThresholdMode parse_threshold(const std::string& s) {
    if (s == "analytic") return ThresholdMode::Analytic;
    if (s == "permutation") return ThresholdMode::Permutation;
    throw InvalidArgument("unknown threshold mode '" + s + "' (expected permutation or analytic)");
}

std::string to_string(SweepAxis a) {
    switch (a) {
        case SweepAxis::SplitRatio: return "split_ratio";
        case SweepAxis::SampleSize: return "sample_size";
        case SweepAxis::Method: return "method";
        case SweepAxis::Lambda: return "lambda";
    }
    return "?";
}

SweepAxis parse_axis(const std::string& s) {
    for (SweepAxis a : {SweepAxis::SplitRatio, SweepAxis::SampleSize, SweepAxis::Method, SweepAxis::Lambda}) {
        if (to_string(a) == s) return a;
    }
    throw InvalidArgument("unknown sweep axis '" + s + "' (expected split_ratio, sample_size, method, lambda)");
}

void ExperimentConfig::validate() const {
    std::vector<std::string> problems;
    auto check = [&](bool ok, const std::string& what) {
        if (!ok) problems.push_back(what);
    };
    check(alpha > 0.0 && alpha < 1.0, "alpha must lie in (0, 1)");
    check(repetitions >= 1, "repetitions must be at least 1");
    check(permutations >= 1, "permutations must be at least 1");
    check(lambda > 0.0, "lambda must be positive");
    check(!sigma || *sigma > 0.0, "sigma must be positive");
    check(threads >= 1, "threads must be at least 1");
    check(cg_iterations >= 1, "cg_iterations must be at least 1");
    check(!falkon_centers || *falkon_centers >= 1, "falkon_centers must be at least 1");
    if (is_witness_method(method)) {
        check(split_ratio > 0.0 && split_ratio < 1.0, "split_ratio must lie in (0, 1)");
        if (use_grid) {
            check(folds >= 2, "folds must be at least 2");
            check(!grid.kernels.empty() && !grid.lambdas.empty(), "grid must be nonempty");
        }
    }
    if (dataset.kind == DatasetKind::Csv) {
        check(!dataset.x_path.empty() && !dataset.y_path.empty(), "csv dataset needs x_path and y_path");
        check(dataset.n >= 0 && dataset.m >= 0, "n and m must be nonnegative");
    } else {
        check(dataset.n >= 1 && dataset.m >= 1, "n and m must be positive");
    }
    if (!problems.empty()) {
        std::string msg = "invalid experiment configuration:";
        for (const auto& p : problems) msg += "\n  - " + p;
        throw InvalidArgument(msg);
    }
}

std::uint64_t trial_data_seed(std::uint64_t master, std::uint64_t trial) { return derive_seed(master, trial); }

std::uint64_t trial_method_seed(std::uint64_t master, std::uint64_t trial, Method method) {
    return derive_seed(trial_data_seed(master, trial), hash_name(to_string(method)));
}

std::uint64_t fingerprint(const ExperimentConfig& c) {
    std::ostringstream os;
    os.precision(17);
    os << to_string(c.dataset.kind) << '|' << c.dataset.n << '|' << c.dataset.m << '|' << c.dataset.theta << '|'
       << c.dataset.null_mode << '|' << c.dataset.x_path << '|' << c.dataset.y_path << '|' << c.dataset.delimiter << '|';
    if (c.dataset.columns) {
        for (int col : *c.dataset.columns) os << col << ',';
    }
    os << '|' << to_string(c.method) << '|' << (c.sigma ? *c.sigma : -1.0) << '|' << c.lambda << '|' << c.use_grid
       << '|';
    if (c.use_grid) {
        for (const auto& k : c.grid.kernels) os << k.bandwidth << ',';
        os << '|';
        for (double l : c.grid.lambdas) os << l << ',';
    }
    os << '|' << c.folds << '|' << c.split_ratio << '|' << c.alpha << '|' << c.permutations << '|'
       << to_string(c.threshold) << '|' << c.plus_one << '|' << c.repetitions << '|'
       << (c.falkon_centers ? *c.falkon_centers : 0) << '|' << c.cg_iterations << '|' << c.seed;
    return hash_name(os.str());
}

namespace {

std::shared_ptr<const Sample> cached_csv(const std::string& path, const DatasetSpec& spec) {
    static std::mutex mutex;
    static std::map<std::string, std::shared_ptr<const Sample>> cache;
    std::ostringstream key;
    key << path << '|' << spec.delimiter << '|';
    if (spec.columns) {
        for (int c : *spec.columns) key << c << ',';
    }
    std::lock_guard<std::mutex> lock(mutex);
    auto it = cache.find(key.str());
    if (it != cache.end()) return it->second;
    CsvOptions opts;
    opts.columns = spec.columns;
    opts.delimiter = spec.delimiter;
    auto loaded = std::make_shared<const Sample>(load_csv(path, opts));
    cache.emplace(key.str(), loaded);
    return loaded;
}

}  // namespace

TwoSample draw_trial_data(const ExperimentConfig& config, std::uint64_t trial) {
    const std::uint64_t seed = trial_data_seed(config.seed, trial);
    const DatasetSpec& d = config.dataset;
    switch (d.kind) {
        case DatasetKind::BlobsRotated: return blobs_rotated(d.n, d.m, d.theta, seed);
        case DatasetKind::BlobsLiu: return blobs_liu(d.n, d.m, seed, d.null_mode);
        case DatasetKind::Csv: {
            const auto x = cached_csv(d.x_path, d);
            const auto y = cached_csv(d.y_path, d);
            TwoSample ts;
            ts.x = d.n > 0 ? subsample_without_replacement(*x, d.n, derive_seed(seed, 1)) : *x;
            ts.y = d.m > 0 ? subsample_without_replacement(*y, d.m, derive_seed(seed, 2)) : *y;
            if (ts.x.cols() != ts.y.cols()) throw DataError("csv dataset: X and Y have different dimensions");
            ts.descriptor = "csv(" + d.x_path + "," + d.y_path + ")";
            return ts;
        }
    }
    throw InvalidArgument("unknown dataset kind");
}

namespace {

enum StreamKey : std::uint64_t { kSplit = 1, kFolds = 2, kPermutations = 3, kCenters = 4 };

Kernel fixed_kernel(const ExperimentConfig& config, const Sample& a, const Sample& b) {
    if (config.sigma) return Kernel::gaussian(*config.sigma);
    return Kernel::gaussian(median_heuristic_bandwidth(pool(a, b)));
}

// Kernel maximising J on the paired training prefix; ties prefer the larger bandwidth.
Kernel select_kernel_by_j(const std::vector<Kernel>& kernels, const Sample& xtr, const Sample& ytr) {
    const Index pairs = std::min(xtr.rows(), ytr.rows());
    const Sample xp = xtr.topRows(pairs);
    const Sample yp = ytr.topRows(pairs);
    const Kernel* best = nullptr;
    double best_j = -std::numeric_limits<double>::infinity();
    for (const Kernel& k : kernels) {
        const double j = j_criterion(k, xp, yp);
        if (best == nullptr || j > best_j || (j == best_j && k.bandwidth > best->bandwidth)) {
            best = &k;
            best_j = j;
        }
    }
    return *best;
}

TestOutcome stage_two(const ExperimentConfig& config, const WitnessModel& h, const SplitData& parts,
                      std::uint64_t method_seed) {
    if (config.threshold == ThresholdMode::Analytic) return asymptotic_witness_test(h, parts.xte, parts.yte, config.alpha);
    PermutationOptions perm{config.permutations, derive_seed(method_seed, kPermutations), config.plus_one};
    return permutation_witness_test(h, parts.xte, parts.yte, config.alpha, perm);
}

}  // namespace

TestOutcome run_on_data(const ExperimentConfig& config, const TwoSample& data, std::uint64_t method_seed) {
    const PermutationOptions perm{config.permutations, derive_seed(method_seed, kPermutations), config.plus_one};
    TestOutcome out;
    switch (config.method) {
        case Method::MmdBoot: {
            const Kernel k = fixed_kernel(config, data.x, data.y);
            out = mmd_boot_test(k, data.x, data.y, config.alpha, perm);
            out.bandwidth = k.bandwidth;
            break;
        }
        case Method::KfdaBoot: {
            const Kernel k = fixed_kernel(config, data.x, data.y);
            out = kfda_boot_test(k, config.lambda, data.x, data.y, config.alpha, perm);
            out.bandwidth = k.bandwidth;
            out.lambda = config.lambda;
            break;
        }
        case Method::KfdaWitness: {
            const SplitData parts = split(data, SplitRatio(config.split_ratio), derive_seed(method_seed, kSplit));
            Kernel k = Kernel::gaussian(1.0);
            double lambda = config.lambda;
            if (config.use_grid) {
                const CvReport cv =
                    grid_search_cv(config.grid, parts.xtr, parts.ytr, config.folds, derive_seed(method_seed, kFolds));
                k = cv.kernel;
                lambda = cv.lambda;
            } else {
                k = fixed_kernel(config, parts.xtr, parts.ytr);
            }
            if (config.falkon_centers) {
                FalkonConfig fc;
                fc.num_centers = std::min(*config.falkon_centers, parts.xtr.rows() + parts.ytr.rows());
                fc.cg_iterations = config.cg_iterations;
                fc.lambda = lambda;
                fc.seed = derive_seed(method_seed, kCenters);
                fc.centering = FalkonCentering::Pooled;
                fc.c = default_proportion(parts.xtr.rows(), parts.ytr.rows());
                out = stage_two(config, kfda_witness_nystrom(k, parts.xtr, parts.ytr, fc), parts, method_seed);
            } else {
                out = stage_two(config, kfda_witness_exact(k, lambda, parts.xtr, parts.ytr), parts, method_seed);
            }
            out.method = to_string(config.method) + "/" + out.method;
            out.bandwidth = k.bandwidth;
            out.lambda = lambda;
            return out;
        }
        case Method::OptMmdWitness: {
            const SplitData parts = split(data, SplitRatio(config.split_ratio), derive_seed(method_seed, kSplit));
            const Kernel k = config.use_grid ? select_kernel_by_j(config.grid.kernels, parts.xtr, parts.ytr)
                                             : fixed_kernel(config, parts.xtr, parts.ytr);
            out = stage_two(config, mmd_witness(k, parts.xtr, parts.ytr), parts, method_seed);
            out.method = to_string(config.method) + "/" + out.method;
            out.bandwidth = k.bandwidth;
            return out;
        }
    }
    return out;
}

namespace {

[[noreturn]] void rethrow_with_trial(std::uint64_t trial, std::uint64_t seed) {
    const std::string prefix =
        "trial " + std::to_string(trial) + " (data seed " + std::to_string(seed) + "): ";
    try {
        throw;
    } catch (const InvalidArgument& e) {
        throw InvalidArgument(prefix + e.what());
    } catch (const DataError& e) {
        throw DataError(prefix + e.what());
    } catch (const NumericalError& e) {
        throw NumericalError(prefix + e.what());
    } catch (const std::exception& e) {
        throw std::runtime_error(prefix + e.what());
    }
}

}  // namespace

TestOutcome run_single_trial(const ExperimentConfig& config, std::uint64_t trial) {
    try {
        return run_on_data(config, draw_trial_data(config, trial), trial_method_seed(config.seed, trial, config.method));
    } catch (...) {
        rethrow_with_trial(trial, trial_data_seed(config.seed, trial));
    }
}

PowerEstimate estimate_rejection_rate(const ExperimentConfig& config) {
    config.validate();
    const int reps = config.repetitions;
    std::vector<char> rejected(static_cast<std::size_t>(reps), 0);
    std::atomic<int> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;

    auto worker = [&] {
        while (!failed.load()) {
            const int i = next.fetch_add(1);
            if (i >= reps) return;
            try {
                rejected[static_cast<std::size_t>(i)] = run_single_trial(config, static_cast<std::uint64_t>(i)).reject;
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!failed.exchange(true)) error = std::current_exception();
                return;
            }
        }
    };
    const int threads = std::max(1, std::min(config.threads, reps));
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (error) std::rethrow_exception(error);

    PowerEstimate est;
    est.repetitions = reps;
    est.rejections = std::count(rejected.begin(), rejected.end(), 1);
    est.rejection_rate = static_cast<double>(est.rejections) / reps;
    est.std_err = std::sqrt(est.rejection_rate * (1.0 - est.rejection_rate) / reps);
    est.fingerprint = fingerprint(config);
    return est;
}

std::vector<SweepRow> sweep(const ExperimentConfig& base, SweepAxis axis, const std::vector<std::string>& values) {
    detail::require(!values.empty(), "sweep: no values");
    std::vector<SweepRow> rows;
    for (const std::string& v : values) {
        ExperimentConfig c = base;
        try {
            switch (axis) {
                case SweepAxis::SplitRatio: c.split_ratio = std::stod(v); break;
                case SweepAxis::SampleSize: c.dataset.n = c.dataset.m = std::stol(v); break;
                case SweepAxis::Method: c.method = parse_method(v); break;
                case SweepAxis::Lambda:
                    c.lambda = std::stod(v);
                    c.use_grid = false;
                    break;
            }
        } catch (const std::logic_error&) {
            if (axis == SweepAxis::Method) throw;
            throw InvalidArgument("sweep: cannot parse value '" + v + "' for axis " + to_string(axis));
        }
        rows.push_back({c, estimate_rejection_rate(c)});
    }
    return rows;
}

void write_results_header(std::ostream& os) {
    os << "method,dataset,n,m,r,sigma,lambda,alpha,B,R,rejection_rate,std_err,seed\n";
}

void write_results_row(std::ostream& os, const SweepRow& row) {
    const ExperimentConfig& c = row.config;
    const bool witness = is_witness_method(c.method);
    const bool grid_sigma = witness && c.use_grid;
    const bool uses_lambda = c.method == Method::KfdaWitness || c.method == Method::KfdaBoot;
    std::ostringstream os_row;
    os_row.precision(10);
    os_row << to_string(c.method) << ',' << to_string(c.dataset.kind) << ',' << c.dataset.n << ',' << c.dataset.m << ',';
    if (witness) os_row << c.split_ratio;
    os_row << ',';
    if (grid_sigma) os_row << "cv";
    else if (c.sigma) os_row << *c.sigma;
    else os_row << "median";
    os_row << ',';
    if (uses_lambda) {
        if (grid_sigma && c.method == Method::KfdaWitness) os_row << "cv";
        else os_row << c.lambda;
    }
    os_row << ',' << c.alpha << ',' << c.permutations << ',' << row.estimate.repetitions << ','
           << row.estimate.rejection_rate << ',' << row.estimate.std_err << ',' << c.seed << '\n';
    os << os_row.str();
}

}  // namespace wits
