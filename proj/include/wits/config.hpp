#pragma once

#include "wits/bench.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace wits {

/// Parse or validation failure in a config file; the message lists every problem.
class ConfigError : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

/// Flat sectioned key/value text:
///
///   # comment
///   [section]
///   key = value
///
/// Keys before the first section header belong to section "".
struct IniEntry {
    std::string value;
    int line = 0;
};
using IniSection = std::map<std::string, IniEntry>;
using IniDocument = std::map<std::string, IniSection>;

IniDocument parse_ini(const std::string& text, const std::string& origin = "<string>");

/// An experiment plus an optional sweep.
struct RunSpec {
    ExperimentConfig experiment;
    std::optional<SweepAxis> sweep_axis;
    std::vector<std::string> sweep_values;
};

/// Sections: dataset, method, stage1, stage2, harness. Unknown sections or
/// fields are errors naming each one with its line.
RunSpec parse_run_spec(const std::string& text, const std::string& origin = "<string>");
RunSpec load_run_spec(const std::string& path);

/// Every field with defaults filled in; parse_run_spec(render_run_spec(s))
/// reproduces `s`.
std::string render_run_spec(const RunSpec& spec);

/// Grid file with keys `bandwidths` and `lambdas` (comma-separated), either
/// at top level or under [grid].
ParamGrid load_grid_file(const std::string& path);

/// Shortest decimal text that parses back to exactly `v`.
std::string format_double(double v);

bool operator==(const DatasetSpec& a, const DatasetSpec& b);
bool operator==(const ExperimentConfig& a, const ExperimentConfig& b);

}  // namespace wits
