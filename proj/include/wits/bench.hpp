#pragma once

#include "wits/data.hpp"
#include "wits/hypotest.hpp"
#include "wits/modelsel.hpp"

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace wits {

enum class Method { KfdaWitness, OptMmdWitness, MmdBoot, KfdaBoot };
enum class DatasetKind { BlobsRotated, BlobsLiu, Csv };
enum class ThresholdMode { Permutation, Analytic };

std::string to_string(Method m);
Method parse_method(const std::string& s);
std::string to_string(DatasetKind d);
DatasetKind parse_dataset(const std::string& s);
std::string to_string(ThresholdMode t);
ThresholdMode parse_threshold(const std::string& s);

[[nodiscard]] constexpr bool is_witness_method(Method m) {
    return m == Method::KfdaWitness || m == Method::OptMmdWitness;
}

struct DatasetSpec {
    DatasetKind kind = DatasetKind::BlobsRotated;
    Index n = 100;
    Index m = 100;
    double theta = 0.0;      // BlobsRotated
    bool null_mode = false;  // BlobsLiu
    std::string x_path, y_path;  // Csv; n or m of 0 means "use every row"
    std::optional<std::vector<int>> columns;
    char delimiter = ',';
};

struct ExperimentConfig {
    DatasetSpec dataset;
    Method method = Method::KfdaWitness;

    // Kernel and regularisation. With `use_grid` the witness methods select
    // from `grid` on Stage-I data; otherwise `sigma` (or the median heuristic
    // when absent) and `lambda` are used as given.
    std::optional<double> sigma;
    double lambda = 1e-2;
    bool use_grid = false;
    ParamGrid grid = ParamGrid::defaults();
    int folds = 5;

    double split_ratio = 0.5;
    double alpha = 0.05;
    int permutations = 200;
    ThresholdMode threshold = ThresholdMode::Permutation;
    bool plus_one = false;

    int repetitions = 100;
    std::optional<Index> falkon_centers;
    int cg_iterations = 50;

    std::uint64_t seed = 0;
    int threads = 1;

    void validate() const;
};

struct PowerEstimate {
    double rejection_rate = 0.0;
    double std_err = 0.0;
    int repetitions = 0;
    long rejections = 0;
    std::uint64_t fingerprint = 0;
};

/// Seed of the data draw for a trial; shared by all methods.
std::uint64_t trial_data_seed(std::uint64_t master, std::uint64_t trial);
/// Seed of a method's own randomness (split, folds, permutations, centers).
std::uint64_t trial_method_seed(std::uint64_t master, std::uint64_t trial, Method method);

/// Stable hash of every field that influences results.
std::uint64_t fingerprint(const ExperimentConfig& config);

/// The TwoSample seen by trial `trial`.
TwoSample draw_trial_data(const ExperimentConfig& config, std::uint64_t trial);

/// Runs the given method on one TwoSample with the method's seed stream.
TestOutcome run_on_data(const ExperimentConfig& config, const TwoSample& data, std::uint64_t method_seed);

/// Full pipeline for trial `trial`: draw data, split, Stage I, Stage II.
TestOutcome run_single_trial(const ExperimentConfig& config, std::uint64_t trial);

/// Rejection rate over config.repetitions independent trials.
PowerEstimate estimate_rejection_rate(const ExperimentConfig& config);

enum class SweepAxis { SplitRatio, SampleSize, Method, Lambda };
SweepAxis parse_axis(const std::string& s);
std::string to_string(SweepAxis a);

struct SweepRow {
    ExperimentConfig config;
    PowerEstimate estimate;
};

std::vector<SweepRow> sweep(const ExperimentConfig& base, SweepAxis axis, const std::vector<std::string>& values);

/// Results table: method,dataset,n,m,r,sigma,lambda,alpha,B,R,rejection_rate,std_err,seed
void write_results_header(std::ostream& os);
void write_results_row(std::ostream& os, const SweepRow& row);

}  // namespace wits
