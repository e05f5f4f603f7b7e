#pragma once

// Flat `key = value` experiment files.  Blank lines and text after '#' are
// ignored; list values are comma separated.  Example:
//
//   experiment = support
//   n = 1000
//   q = 1
//   sparsity = 5pct
//   methods = ss_cv, ss_min, fast_ss, lasso_cv, lasso_best
//   thresholds = 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9
//   n_replications = 100
//   seed = 1

#include <charconv>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include "sglarma/errors.hpp"
#include "sglarma/selection.hpp"

namespace sglarma {

/// Shortest round-trip decimal form of x ("NA" for NaN).
inline std::string format_double(double x) {
    if (std::isnan(x)) return "NA";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

struct ExperimentConfig {
    std::string experiment = "support";  ///< support | estimation
    std::vector<long> n{1000};
    long p = 100;
    std::vector<long> q{1};
    std::string sparsity = "5pct";        ///< 5pct | 10pct | none
    double intercept = 0.0;               ///< beta_0 of the true coefficients
    std::vector<double> gamma;            ///< true gamma; empty = default for each q
    std::vector<Method> methods{Method::ss_cv, Method::ss_min, Method::fast_ss, Method::lasso_cv,
                                Method::lasso_best};
    std::vector<double> thresholds{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
    std::vector<double> mle_thresholds{1e-9, 1e-8, 1e-7, 1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1};
    int n_replications = 100;
    std::uint64_t seed = 1;
    int threads = 1;
    std::string output_dir = "out";
    bool timing = false;  ///< record wall times (off keeps the CSV reproducible)
    SelectionConfig selection{};

    void validate() const;
};

namespace detail {

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split_list(const std::string& v) {
    std::vector<std::string> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

template <class T>
T parse_number(const std::string& s, const std::string& where) {
    T v{};
    const auto* b = s.data();
    const auto* e = s.data() + s.size();
    const auto res = std::from_chars(b, e, v);
    if (res.ec != std::errc{} || res.ptr != e) throw ConfigError(where + ": '" + s + "' is not a valid number");
    return v;
}

inline bool parse_bool(const std::string& s, const std::string& where) {
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    throw ConfigError(where + ": expected true or false, got '" + s + "'");
}

template <class T>
std::string join(const std::vector<T>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ", ";
        if constexpr (std::is_same_v<T, double>)
            out += format_double(v[i]);
        else if constexpr (std::is_same_v<T, Method>)
            out += to_string(v[i]);
        else
            out += std::to_string(v[i]);
    }
    return out;
}

}  // namespace detail

inline void ExperimentConfig::validate() const {
    if (experiment != "support" && experiment != "estimation")
        throw ConfigError("experiment: expected support or estimation");
    if (n.empty()) throw ConfigError("n: at least one series length is required");
    for (long v : n)
        if (v < 2) throw ConfigError("n: series length must be >= 2");
    if (p < 0) throw ConfigError("p: must be >= 0");
    if (q.empty()) throw ConfigError("q: at least one order is required");
    for (long v : q)
        if (v < 1) throw ConfigError("q: order must be >= 1");
    if (sparsity != "5pct" && sparsity != "10pct" && sparsity != "none")
        throw ConfigError("sparsity: expected 5pct, 10pct or none");
    if (sparsity != "none" && p != 100) throw ConfigError("sparsity: the 5pct and 10pct patterns need p = 100");
    if (!gamma.empty() && q.size() != 1) throw ConfigError("gamma: an explicit gamma needs a single q");
    if (!gamma.empty() && static_cast<long>(gamma.size()) != q.front())
        throw ConfigError("gamma: length must equal q");
    if (experiment == "support" && methods.empty()) throw ConfigError("methods: at least one method is required");
    if (experiment == "support" && sparsity == "none") throw ConfigError("sparsity: support experiments need 5pct or 10pct");
    for (const auto* list : {&thresholds, &mle_thresholds})
        for (std::size_t i = 1; i < list->size(); ++i)
            if (!((*list)[i - 1] < (*list)[i])) throw ConfigError("thresholds must be strictly ascending");
    for (double t : thresholds)
        if (!(t >= 0.0 && t <= 1.0)) throw ConfigError("thresholds: values must lie in [0, 1]");
    for (double t : mle_thresholds)
        if (!(t >= 0.0)) throw ConfigError("mle_thresholds: values must be non-negative");
    if (n_replications < 1) throw ConfigError("n_replications: must be >= 1");
    if (threads < 1) throw ConfigError("threads: must be >= 1");
    try {
        selection.validate();
    } catch (const UsageError& e) {
        throw ConfigError(e.what());
    }
}

/// Parses a config file.  `source` only labels error messages.
inline ExperimentConfig parse_config(std::istream& in, const std::string& source = "config") {
    ExperimentConfig c;
    std::map<std::string, int> seen;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto h = line.find('#'); h != std::string::npos) line.erase(h);
        line = detail::trim(line);
        if (line.empty()) continue;
        const std::string at = source + ":" + std::to_string(lineno);
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(at + ": expected 'key = value'");
        const std::string key = detail::trim(std::string_view(line).substr(0, eq));
        const std::string val = detail::trim(std::string_view(line).substr(eq + 1));
        const std::string where = at + ": " + key;
        if (key.empty()) throw ConfigError(at + ": missing key");
        if (seen.count(key)) throw ConfigError(where + ": duplicate key (first on line " + std::to_string(seen[key]) + ")");
        seen[key] = lineno;

        auto doubles = [&] {
            std::vector<double> v;
            for (const auto& s : detail::split_list(val)) v.push_back(detail::parse_number<double>(s, where));
            return v;
        };
        auto longs = [&] {
            std::vector<long> v;
            for (const auto& s : detail::split_list(val)) v.push_back(detail::parse_number<long>(s, where));
            return v;
        };
        auto& s = c.selection;
        if (key == "experiment") c.experiment = val;
        else if (key == "n") c.n = longs();
        else if (key == "p") c.p = detail::parse_number<long>(val, where);
        else if (key == "q") c.q = longs();
        else if (key == "sparsity") c.sparsity = val;
        else if (key == "intercept") c.intercept = detail::parse_number<double>(val, where);
        else if (key == "gamma") c.gamma = doubles();
        else if (key == "methods") {
            c.methods.clear();
            for (const auto& m : detail::split_list(val)) {
                try {
                    c.methods.push_back(parse_method(m));
                } catch (const UsageError& e) {
                    throw ConfigError(where + ": " + e.what());
                }
            }
        }
        else if (key == "thresholds") c.thresholds = doubles();
        else if (key == "mle_thresholds") c.mle_thresholds = doubles();
        else if (key == "n_replications") c.n_replications = detail::parse_number<int>(val, where);
        else if (key == "seed") c.seed = detail::parse_number<std::uint64_t>(val, where);
        else if (key == "threads") c.threads = detail::parse_number<int>(val, where);
        else if (key == "output_dir") c.output_dir = val;
        else if (key == "timing") c.timing = detail::parse_bool(val, where);
        else if (key == "n_subsamples") s.n_subsamples = detail::parse_number<int>(val, where);
        else if (key == "n_lambda") s.n_lambda = detail::parse_number<int>(val, where);
        else if (key == "lambda_ratio") s.lambda_ratio = detail::parse_number<double>(val, where);
        else if (key == "k_folds") s.k_folds = detail::parse_number<int>(val, where);
        else if (key == "max_pipeline_iters") s.max_pipeline_iters = detail::parse_number<int>(val, where);
        else if (key == "gamma_stab_tol") s.gamma_stab_tol = detail::parse_number<double>(val, where);
        else if (key == "cv_scope") {
            if (val == "per_subsample") s.cv_scope = CvScope::per_subsample;
            else if (val == "full_data") s.cv_scope = CvScope::full_data;
            else throw ConfigError(where + ": expected per_subsample or full_data");
        }
        else if (key == "refit") {
            if (val == "glarma") s.refit = RefitKind::glarma;
            else if (val == "glm") s.refit = RefitKind::glm;
            else throw ConfigError(where + ": expected glarma or glm");
        }
        else if (key == "gamma_search") s.gamma_search.enabled = detail::parse_bool(val, where);
        else if (key == "newton_tol") s.newton.tol = detail::parse_number<double>(val, where);
        else throw ConfigError(where + ": unknown key");
    }
    c.validate();
    return c;
}

inline ExperimentConfig parse_config_string(const std::string& text, const std::string& source = "config") {
    std::istringstream in(text);
    return parse_config(in, source);
}

/// Canonical key-value form; parse_config of this text gives back the same config.
inline std::map<std::string, std::string> config_entries(const ExperimentConfig& c) {
    const auto& s = c.selection;
    std::map<std::string, std::string> m;
    m["experiment"] = c.experiment;
    m["n"] = detail::join(c.n);
    m["p"] = std::to_string(c.p);
    m["q"] = detail::join(c.q);
    m["sparsity"] = c.sparsity;
    m["intercept"] = format_double(c.intercept);
    if (!c.gamma.empty()) m["gamma"] = detail::join(c.gamma);
    m["methods"] = detail::join(c.methods);
    m["thresholds"] = detail::join(c.thresholds);
    m["mle_thresholds"] = detail::join(c.mle_thresholds);
    m["n_replications"] = std::to_string(c.n_replications);
    m["seed"] = std::to_string(c.seed);
    m["threads"] = std::to_string(c.threads);
    m["output_dir"] = c.output_dir;
    m["timing"] = c.timing ? "true" : "false";
    m["n_subsamples"] = std::to_string(s.n_subsamples);
    m["n_lambda"] = std::to_string(s.n_lambda);
    m["lambda_ratio"] = format_double(s.lambda_ratio);
    m["k_folds"] = std::to_string(s.k_folds);
    m["max_pipeline_iters"] = std::to_string(s.max_pipeline_iters);
    m["gamma_stab_tol"] = format_double(s.gamma_stab_tol);
    m["cv_scope"] = s.cv_scope == CvScope::per_subsample ? "per_subsample" : "full_data";
    m["refit"] = s.refit == RefitKind::glarma ? "glarma" : "glm";
    m["gamma_search"] = s.gamma_search.enabled ? "true" : "false";
    m["newton_tol"] = format_double(s.newton.tol);
    return m;
}

inline std::string config_text(const ExperimentConfig& c) {
    std::string out;
    for (const auto& [k, v] : config_entries(c)) out += k + " = " + v + "\n";
    return out;
}

}  // namespace sglarma
