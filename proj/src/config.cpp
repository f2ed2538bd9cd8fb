#include "wits/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace wits {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

IniDocument parse_ini(const std::string& text, const std::string& origin) {
    IniDocument doc;
    std::vector<std::string> errors;
    std::string section;
    doc[section];
    std::istringstream in(text);
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        // Inline comments start at a ';' or '#' that follows whitespace.
        for (std::size_t i = 1; i < raw.size(); ++i) {
            if ((raw[i] == ';' || raw[i] == '#') && (raw[i - 1] == ' ' || raw[i - 1] == '\t')) {
                raw.resize(i);
                break;
            }
        }
        const std::string s = trim(raw);
        if (s.empty() || s[0] == '#' || s[0] == ';') continue;
        const std::string where = origin + ":" + std::to_string(line) + ": ";
        if (s.front() == '[') {
            if (s.back() != ']') {
                errors.push_back(where + "unterminated section header");
                continue;
            }
            section = trim(s.substr(1, s.size() - 2));
            doc[section];
            continue;
        }
        const auto eq = s.find('=');
        if (eq == std::string::npos) {
            errors.push_back(where + "expected 'key = value'");
            continue;
        }
        const std::string key = trim(s.substr(0, eq));
        if (key.empty()) {
            errors.push_back(where + "empty key");
            continue;
        }
        auto [it, inserted] = doc[section].emplace(key, IniEntry{trim(s.substr(eq + 1)), line});
        if (!inserted) {
            errors.push_back(where + "duplicate field '" + key + "' (first on line " + std::to_string(it->second.line) + ")");
        }
    }
    if (!errors.empty()) {
        std::string msg = "config parse errors:";
        for (const auto& e : errors) msg += "\n  " + e;
        throw ConfigError(msg);
    }
    return doc;
}

namespace {

// Typed field access that records every problem instead of stopping at the first.
class Reader {
public:
    Reader(const IniDocument& doc, std::string origin) : doc_(doc), origin_(std::move(origin)) {}

    const IniEntry* find(const std::string& section, const std::string& key) {
        used_.insert(section + "." + key);
        auto s = doc_.find(section);
        if (s == doc_.end()) return nullptr;
        auto k = s->second.find(key);
        return k == s->second.end() ? nullptr : &k->second;
    }

    void fail(const std::string& section, const std::string& key, const IniEntry& e, const std::string& what) {
        errors_.push_back(origin_ + ":" + std::to_string(e.line) + ": " + section + "." + key + ": " + what);
    }

    template <class T, class F>
    void get(const std::string& section, const std::string& key, T& out, F&& convert) {
        const IniEntry* e = find(section, key);
        if (e == nullptr) return;
        try {
            out = convert(e->value);
        } catch (const std::exception& ex) {
            fail(section, key, *e, ex.what());
        }
    }

    // Records unknown sections and fields; returns every problem found so far.
    std::vector<std::string> collect(const std::set<std::string>& known_sections) {
        for (const auto& [sname, sec] : doc_) {
            if (sname.empty() && sec.empty()) continue;
            if (!known_sections.count(sname)) {
                errors_.push_back(origin_ + ": unknown section [" + sname + "]");
                continue;
            }
            for (const auto& [key, e] : sec) {
                if (!used_.count(sname + "." + key)) {
                    errors_.push_back(origin_ + ":" + std::to_string(e.line) + ": unknown field '" + key +
                                      "' in section [" + sname + "]");
                }
            }
        }
        return errors_;
    }

    void finish(const std::set<std::string>& known_sections) {
        const auto errors = collect(known_sections);
        if (!errors.empty()) {
            std::string msg = "invalid config:";
            for (const auto& e : errors) msg += "\n  " + e;
            throw ConfigError(msg);
        }
    }

private:
    const IniDocument& doc_;
    std::string origin_;
    std::set<std::string> used_;
    std::vector<std::string> errors_;
};

double to_double(const std::string& s) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size() || !std::isfinite(v)) {
        throw std::invalid_argument("expected a finite number, got '" + s + "'");
    }
    return v;
}

long long to_integer(const std::string& s) {
    long long v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw std::invalid_argument("expected an integer, got '" + s + "'");
    }
    return v;
}

std::uint64_t to_seed(const std::string& s) {
    std::uint64_t v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw std::invalid_argument("expected a nonnegative integer, got '" + s + "'");
    }
    return v;
}

bool to_bool(const std::string& s) {
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    throw std::invalid_argument("expected true or false, got '" + s + "'");
}

std::vector<double> to_doubles(const std::string& s) {
    std::vector<double> out;
    for (const auto& item : split_list(s)) out.push_back(to_double(item));
    if (out.empty()) throw std::invalid_argument("expected a comma-separated list of numbers");
    return out;
}

std::vector<Kernel> to_kernels(const std::string& s) {
    std::vector<Kernel> out;
    for (double b : to_doubles(s)) out.push_back(Kernel::gaussian(b));
    return out;
}

char to_delimiter(const std::string& s) {
    if (s == "tab" || s == "\\t") return '\t';
    if (s == "comma") return ',';
    if (s == "semicolon") return ';';
    if (s == "space") return ' ';
    if (s == "hash") return '#';
    if (s.size() == 1) return s[0];
    throw std::invalid_argument("expected a single character, tab, comma, semicolon, space or hash");
}

std::string delimiter_name(char c) {
    switch (c) {
        case '\t': return "tab";
        case ',': return "comma";
        case ';': return "semicolon";
        case ' ': return "space";
        case '#': return "hash";
        default: return std::string(1, c);
    }
}

std::string join(const std::vector<double>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + format_double(v[i]);
    return out;
}

}  // namespace

RunSpec parse_run_spec(const std::string& text, const std::string& origin) {
    const IniDocument doc = parse_ini(text, origin);
    Reader r(doc, origin);
    RunSpec spec;
    ExperimentConfig& c = spec.experiment;
    DatasetSpec& d = c.dataset;

    r.get("dataset", "generator", d.kind, parse_dataset);
    r.get("dataset", "n", d.n, to_integer);
    r.get("dataset", "m", d.m, to_integer);
    r.get("dataset", "theta", d.theta, to_double);
    r.get("dataset", "null_mode", d.null_mode, to_bool);
    r.get("dataset", "x_path", d.x_path, [](const std::string& s) { return s; });
    r.get("dataset", "y_path", d.y_path, [](const std::string& s) { return s; });
    r.get("dataset", "columns", d.columns, [](const std::string& s) -> std::optional<std::vector<int>> {
        if (s == "all") return std::nullopt;
        std::vector<int> cols;
        for (const auto& item : split_list(s)) {
            const long long v = to_integer(item);
            if (v < 0) throw std::invalid_argument("column indices must be nonnegative");
            cols.push_back(static_cast<int>(v));
        }
        if (cols.empty()) throw std::invalid_argument("expected 'all' or a list of column indices");
        return cols;
    });
    r.get("dataset", "delimiter", d.delimiter, to_delimiter);

    r.get("method", "name", c.method, parse_method);

    r.get("stage1", "sigma", c.sigma, [](const std::string& s) -> std::optional<double> {
        if (s == "median") return std::nullopt;
        return to_double(s);
    });
    r.get("stage1", "lambda", c.lambda, to_double);
    std::string grid_mode = "none";
    r.get("stage1", "grid", grid_mode, [](const std::string& s) {
        if (s != "none" && s != "default" && s != "custom") {
            throw std::invalid_argument("expected none, default or custom, got '" + s + "'");
        }
        return s;
    });
    c.use_grid = grid_mode != "none";
    const IniEntry* bw = r.find("stage1", "grid_bandwidths");
    const IniEntry* lam = r.find("stage1", "grid_lambdas");
    if (grid_mode == "custom") {
        if (bw == nullptr || lam == nullptr) {
            const IniEntry* g = r.find("stage1", "grid");
            r.fail("stage1", "grid", *g, "custom grid needs grid_bandwidths and grid_lambdas");
        }
        r.get("stage1", "grid_bandwidths", c.grid.kernels, to_kernels);
        r.get("stage1", "grid_lambdas", c.grid.lambdas, to_doubles);
    } else {
        if (bw != nullptr) r.fail("stage1", "grid_bandwidths", *bw, "only allowed with grid = custom");
        if (lam != nullptr) r.fail("stage1", "grid_lambdas", *lam, "only allowed with grid = custom");
    }
    r.get("stage1", "folds", c.folds, to_integer);
    r.get("stage1", "split_ratio", c.split_ratio, to_double);
    r.get("stage1", "falkon_centers", c.falkon_centers, [](const std::string& s) -> std::optional<Index> {
        if (s == "none") return std::nullopt;
        return to_integer(s);
    });
    r.get("stage1", "cg_iterations", c.cg_iterations, to_integer);

    r.get("stage2", "alpha", c.alpha, to_double);
    r.get("stage2", "permutations", c.permutations, to_integer);
    r.get("stage2", "threshold", c.threshold, parse_threshold);
    r.get("stage2", "plus_one", c.plus_one, to_bool);

    r.get("harness", "repetitions", c.repetitions, to_integer);
    r.get("harness", "seed", c.seed, to_seed);
    r.get("harness", "threads", c.threads, to_integer);
    r.get("harness", "sweep_axis", spec.sweep_axis, [](const std::string& s) -> std::optional<SweepAxis> {
        if (s == "none") return std::nullopt;
        return parse_axis(s);
    });
    r.get("harness", "sweep_values", spec.sweep_values, split_list);

    std::vector<std::string> problems = r.collect({"dataset", "method", "stage1", "stage2", "harness"});
    if (spec.sweep_axis && spec.sweep_values.empty()) problems.push_back("harness.sweep_values: required with sweep_axis");
    if (!spec.sweep_axis && !spec.sweep_values.empty()) problems.push_back("harness.sweep_values: set without sweep_axis");
    try {
        c.validate();
    } catch (const InvalidArgument& e) {
        problems.push_back(e.what());
    }
    if (c.use_grid) {
        try {
            c.grid.validate();
        } catch (const InvalidArgument& e) {
            problems.push_back(std::string("stage1 grid: ") + e.what());
        }
    }
    if (!problems.empty()) {
        std::string msg = origin + ": invalid config:";
        for (const auto& p : problems) msg += "\n  " + p;
        throw ConfigError(msg);
    }
    return spec;
}

RunSpec load_run_spec(const std::string& path) { return parse_run_spec(read_file(path), path); }

std::string render_run_spec(const RunSpec& spec) {
    const ExperimentConfig& c = spec.experiment;
    const DatasetSpec& d = c.dataset;
    std::ostringstream os;
    os << "[dataset]\n";
    os << "generator = " << to_string(d.kind) << "\n";
    os << "n = " << d.n << "\n";
    os << "m = " << d.m << "\n";
    os << "theta = " << format_double(d.theta) << "\n";
    os << "null_mode = " << (d.null_mode ? "true" : "false") << "\n";
    if (!d.x_path.empty()) os << "x_path = " << d.x_path << "\n";
    if (!d.y_path.empty()) os << "y_path = " << d.y_path << "\n";
    os << "columns = ";
    if (d.columns) {
        for (std::size_t i = 0; i < d.columns->size(); ++i) os << (i ? ", " : "") << (*d.columns)[i];
    } else {
        os << "all";
    }
    os << "\n";
    os << "delimiter = " << delimiter_name(d.delimiter) << "\n\n";

    os << "[method]\nname = " << to_string(c.method) << "\n\n";

    os << "[stage1]\n";
    os << "sigma = " << (c.sigma ? format_double(*c.sigma) : "median") << "\n";
    os << "lambda = " << format_double(c.lambda) << "\n";
    if (c.use_grid) {
        std::vector<double> bws;
        for (const auto& k : c.grid.kernels) bws.push_back(k.bandwidth);
        os << "grid = custom\n";
        os << "grid_bandwidths = " << join(bws) << "\n";
        os << "grid_lambdas = " << join(c.grid.lambdas) << "\n";
    } else {
        os << "grid = none\n";
    }
    os << "folds = " << c.folds << "\n";
    os << "split_ratio = " << format_double(c.split_ratio) << "\n";
    os << "falkon_centers = " << (c.falkon_centers ? std::to_string(*c.falkon_centers) : "none") << "\n";
    os << "cg_iterations = " << c.cg_iterations << "\n\n";

    os << "[stage2]\n";
    os << "alpha = " << format_double(c.alpha) << "\n";
    os << "permutations = " << c.permutations << "\n";
    os << "threshold = " << to_string(c.threshold) << "\n";
    os << "plus_one = " << (c.plus_one ? "true" : "false") << "\n\n";

    os << "[harness]\n";
    os << "repetitions = " << c.repetitions << "\n";
    os << "seed = " << c.seed << "\n";
    os << "threads = " << c.threads << "\n";
    os << "sweep_axis = " << (spec.sweep_axis ? to_string(*spec.sweep_axis) : "none") << "\n";
    if (spec.sweep_axis) {
        os << "sweep_values = ";
        for (std::size_t i = 0; i < spec.sweep_values.size(); ++i) os << (i ? ", " : "") << spec.sweep_values[i];
        os << "\n";
    }
    return os.str();
}

ParamGrid load_grid_file(const std::string& path) {
    const IniDocument doc = parse_ini(read_file(path), path);
    const std::string section = doc.count("grid") ? "grid" : "";
    Reader r(doc, path);
    ParamGrid g;
    const IniEntry* bw = r.find(section, "bandwidths");
    const IniEntry* lam = r.find(section, "lambdas");
    if (bw == nullptr || lam == nullptr) throw ConfigError(path + ": grid file needs 'bandwidths' and 'lambdas'");
    r.get(section, "bandwidths", g.kernels, to_kernels);
    r.get(section, "lambdas", g.lambdas, to_doubles);
    r.finish({section});
    g.validate();
    return g;
}

bool operator==(const DatasetSpec& a, const DatasetSpec& b) {
    return a.kind == b.kind && a.n == b.n && a.m == b.m && a.theta == b.theta && a.null_mode == b.null_mode &&
           a.x_path == b.x_path && a.y_path == b.y_path && a.columns == b.columns && a.delimiter == b.delimiter;
}

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b) {
    auto same_kernels = [](const std::vector<Kernel>& x, const std::vector<Kernel>& y) {
        return std::equal(x.begin(), x.end(), y.begin(), y.end(), [](const Kernel& p, const Kernel& q) {
            return p.family == q.family && p.bandwidth == q.bandwidth && p.scale == q.scale;
        });
    };
    const bool grids = !a.use_grid || (same_kernels(a.grid.kernels, b.grid.kernels) && a.grid.lambdas == b.grid.lambdas);
    return a.dataset == b.dataset && a.method == b.method && a.sigma == b.sigma && a.lambda == b.lambda &&
           a.use_grid == b.use_grid && grids && a.folds == b.folds && a.split_ratio == b.split_ratio &&
           a.alpha == b.alpha && a.permutations == b.permutations && a.threshold == b.threshold &&
           a.plus_one == b.plus_one && a.repetitions == b.repetitions && a.falkon_centers == b.falkon_centers &&
           a.cg_iterations == b.cg_iterations && a.seed == b.seed && a.threads == b.threads;
}

}  // namespace wits
