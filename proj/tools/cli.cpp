#include "cli.hpp"

#include "wits/bench.hpp"
#include "wits/config.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <optional>

namespace wits::cli {

namespace {

struct TestFlags {
    std::string x_path, y_path;
    std::string method = "kfda-witness";
    double alpha = 0.05;
    int permutations = 200;
    double r = 0.5;
    std::optional<double> sigma;
    double lambda = 1e-2;
    std::string grid = "none";
    std::optional<Index> falkon_centers;
    int cg_iterations = 50;
    int folds = 5;
    std::string threshold = "permutation";
    bool plus_one = false;
    std::uint64_t seed = 0;  // same default as the config files
    std::string columns;
    char delimiter = ',';
    std::string out;
};

void apply_thread_cap(ExperimentConfig& c) {
    if (const char* env = std::getenv("WITS_THREADS")) {
        try {
            const int cap = std::stoi(env);
            if (cap >= 1) c.threads = std::min(c.threads, cap);
        } catch (const std::exception&) {
            throw InvalidArgument(std::string("WITS_THREADS must be a positive integer, got '") + env + "'");
        }
    }
}

std::optional<std::vector<int>> parse_columns(const std::string& s) {
    if (s.empty() || s == "all") return std::nullopt;
    std::vector<int> cols;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            const int v = std::stoi(item, &used);
            if (used != item.size() || v < 0) throw std::invalid_argument(item);
            cols.push_back(v);
        } catch (const std::exception&) {
            throw InvalidArgument("--columns: bad column index '" + item + "'");
        }
    }
    return cols;
}

std::string fmt(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

int cmd_test(const TestFlags& f, std::ostream& out) {
    ExperimentConfig c;
    c.method = parse_method(f.method);
    c.alpha = f.alpha;
    c.permutations = f.permutations;
    c.split_ratio = f.r;
    c.sigma = f.sigma;
    c.lambda = f.lambda;
    c.folds = f.folds;
    c.threshold = parse_threshold(f.threshold);
    c.plus_one = f.plus_one;
    c.falkon_centers = f.falkon_centers;
    c.cg_iterations = f.cg_iterations;
    c.seed = f.seed;
    c.repetitions = 1;
    if (f.grid == "default") {
        c.use_grid = true;
    } else if (f.grid != "none") {
        c.use_grid = true;
        c.grid = load_grid_file(f.grid);
    }
    c.dataset.kind = DatasetKind::Csv;
    c.dataset.x_path = f.x_path;
    c.dataset.y_path = f.y_path;
    c.dataset.columns = parse_columns(f.columns);
    c.dataset.delimiter = f.delimiter;
    c.dataset.n = c.dataset.m = 0;
    c.validate();

    const TwoSample data = draw_trial_data(c, 0);
    const TestOutcome t = run_on_data(c, data, trial_method_seed(c.seed, 0, c.method));

    out << "method:    " << t.method << "\n";
    out << "samples:   n=" << data.x.rows() << " m=" << data.y.rows() << " d=" << data.x.cols() << "\n";
    if (t.bandwidth) out << "sigma:     " << format_double(*t.bandwidth) << "\n";
    if (t.lambda) out << "lambda:    " << format_double(*t.lambda) << "\n";
    out << "statistic: " << format_double(t.statistic) << "\n";
    if (t.p_value) out << "p-value:   " << format_double(*t.p_value) << " (B=" << c.permutations << ")\n";
    if (t.threshold) out << "threshold: " << format_double(*t.threshold) << "\n";
    out << "alpha:     " << format_double(c.alpha) << "\n";
    out << "decision:  " << (t.reject ? "reject" : "fail to reject") << "\n";

    if (!f.out.empty()) {
        std::ofstream csv(f.out);
        if (!csv) throw DataError("cannot write report '" + f.out + "'");
        csv << "method,n,m,d,r,sigma,lambda,alpha,B,statistic,p_value,threshold,reject,seed\n";
        csv << to_string(c.method) << ',' << data.x.rows() << ',' << data.y.rows() << ',' << data.x.cols() << ','
            << (is_witness_method(c.method) ? format_double(c.split_ratio) : "") << ',' << fmt(t.bandwidth) << ','
            << fmt(t.lambda) << ',' << format_double(c.alpha) << ',' << (t.p_value ? std::to_string(c.permutations) : "")
            << ',' << format_double(t.statistic) << ',' << fmt(t.p_value) << ',' << fmt(t.threshold) << ','
            << (t.reject ? 1 : 0) << ',' << c.seed << '\n';
        if (!csv) throw DataError("failed writing report '" + f.out + "'");
    }
    return kOk;
}

int cmd_experiment(const std::string& config_path, const std::string& out_path, bool is_sweep, std::ostream& out,
                   std::ostream& err) {
    RunSpec spec = load_run_spec(config_path);
    if (is_sweep && !spec.sweep_axis) throw ConfigError(config_path + ": sweep needs harness.sweep_axis");
    if (!is_sweep && spec.sweep_axis) throw ConfigError(config_path + ": harness.sweep_axis is set; use 'wits sweep'");
    const std::string resolved = render_run_spec(spec);
    apply_thread_cap(spec.experiment);

    std::vector<SweepRow> rows;
    if (is_sweep) {
        rows = sweep(spec.experiment, *spec.sweep_axis, spec.sweep_values);
    } else {
        rows.push_back({spec.experiment, estimate_rejection_rate(spec.experiment)});
    }

    auto emit = [&](std::ostream& os) {
        write_results_header(os);
        for (const auto& row : rows) write_results_row(os, row);
    };
    if (out_path.empty()) {
        emit(out);
        err << "# resolved config\n" << resolved;
    } else {
        std::ofstream csv(out_path);
        if (!csv) throw DataError("cannot write results '" + out_path + "'");
        emit(csv);
        const std::string sidecar = out_path + ".resolved.ini";
        std::ofstream ini(sidecar);
        if (!ini) throw DataError("cannot write '" + sidecar + "'");
        ini << resolved;
        for (const auto& row : rows) {
            out << to_string(row.config.method) << ": rejection rate " << format_double(row.estimate.rejection_rate)
                << " +/- " << format_double(row.estimate.std_err) << " (R=" << row.estimate.repetitions << ")\n";
        }
        out << "results: " << out_path << "\nresolved config: " << sidecar << "\n";
    }
    return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"WiTS kernel two-sample tests"};
    app.require_subcommand(1, 1);

    TestFlags tf;
    auto* test = app.add_subcommand("test", "Run one test on two CSV samples");
    test->add_option("x_csv", tf.x_path, "Sample X (CSV with header)")->required();
    test->add_option("y_csv", tf.y_path, "Sample Y (CSV with header)")->required();
    test->add_option("--method", tf.method, "kfda-witness | opt-mmd-witness | mmd-boot | kfda-boot")
        ->capture_default_str();
    test->add_option("--alpha", tf.alpha, "Significance level")->capture_default_str();
    test->add_option("--B", tf.permutations, "Number of permutations")->capture_default_str();
    test->add_option("--r", tf.r, "Stage-I split ratio")->capture_default_str();
    test->add_option("--sigma", tf.sigma, "Gaussian bandwidth (median heuristic when absent)");
    test->add_option("--lambda", tf.lambda, "KFDA regularisation")->capture_default_str();
    test->add_option("--grid", tf.grid, "default | none | <grid file>")->capture_default_str();
    test->add_option("--falkon-centers", tf.falkon_centers, "Use the Nystrom solver with M centers");
    test->add_option("--cg-iters", tf.cg_iterations, "Conjugate-gradient iterations")->capture_default_str();
    test->add_option("--folds", tf.folds, "Cross-validation folds")->capture_default_str();
    test->add_option("--threshold", tf.threshold, "permutation | analytic")->capture_default_str();
    test->add_flag("--plus-one", tf.plus_one, "Use (count+1)/(B+1) p-values");
    test->add_option("--seed", tf.seed, "Master seed")->capture_default_str();
    test->add_option("--columns", tf.columns, "Comma-separated 0-based columns (default all)");
    test->add_option("--delimiter", tf.delimiter, "CSV field delimiter")->capture_default_str();
    test->add_option("--out", tf.out, "One-row CSV report");

    std::string power_config, power_out;
    auto* power = app.add_subcommand("power", "Estimate a rejection rate from a config file");
    power->add_option("config", power_config, "Experiment config")->required();
    power->add_option("--out", power_out, "Results CSV (stdout when absent)");

    std::string sweep_config, sweep_out;
    auto* sweep_cmd = app.add_subcommand("sweep", "Rejection rates along one axis from a config file");
    sweep_cmd->add_option("config", sweep_config, "Experiment config with harness.sweep_axis")->required();
    sweep_cmd->add_option("--out", sweep_out, "Results CSV (stdout when absent)");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    }
    try {
        if (test->parsed()) return cmd_test(tf, out);
        if (power->parsed()) return cmd_experiment(power_config, power_out, false, out, err);
        return cmd_experiment(sweep_config, sweep_out, true, out, err);
    } catch (const DataError& e) {
        err << "data error: " << e.what() << "\n";
        return kData;
    } catch (const NumericalError& e) {
        err << "numerical error: " << e.what() << "\n";
        return kNumerical;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    }
}

}  // namespace wits::cli
