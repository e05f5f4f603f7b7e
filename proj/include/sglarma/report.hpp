#pragma once

// Aggregation of bench output: mean ± 1 SE of TPR, FPR and TPR - FPR per
// (method, threshold, n, q, sparsity) at each replication's final pipeline
// iteration, gamma quantiles per iteration, and parameter-estimate summaries.

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "sglarma/bench.hpp"
#include "sglarma/config.hpp"
#include "sglarma/errors.hpp"

namespace sglarma {

struct MeanSe {
    long count = 0;
    double mean = std::numeric_limits<double>::quiet_NaN();
    double se = std::numeric_limits<double>::quiet_NaN();  ///< sample SD / sqrt(count); NaN below 2 values
};

inline MeanSe mean_se(const std::vector<double>& v) {
    MeanSe m;
    m.count = static_cast<long>(v.size());
    if (v.empty()) return m;
    double s = 0.0;
    for (double x : v) s += x;
    m.mean = s / static_cast<double>(v.size());
    if (v.size() >= 2) {
        double ss = 0.0;
        for (double x : v) ss += (x - m.mean) * (x - m.mean);
        m.se = std::sqrt(ss / static_cast<double>(v.size() - 1)) / std::sqrt(static_cast<double>(v.size()));
    }
    return m;
}

/// Linear-interpolation quantile of sorted-or-not data (the R default, type 7).
inline double quantile(std::vector<double> v, double prob) {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(v.begin(), v.end());
    const double h = (static_cast<double>(v.size()) - 1.0) * prob;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

inline double median(const std::vector<double>& v) { return quantile(v, 0.5); }

// ---------------------------------------------------------------------------
// CSV input

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

inline std::optional<double> parse_optional(const std::string& s, const std::string& where) {
    if (s == "NA") return std::nullopt;
    return parse_number<double>(s, where);
}

}  // namespace detail

inline std::vector<MetricsRow> read_metrics_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || detail::trim(line) != kMetricsHeader)
        throw ConfigError("metrics file: header must be '" + std::string(kMetricsHeader) + "'");
    std::vector<MetricsRow> rows;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (detail::trim(line).empty()) continue;
        const auto f = detail::split_csv_line(detail::trim(line));
        const std::string at = "metrics line " + std::to_string(lineno);
        if (f.size() != 11) throw ConfigError(at + ": expected 11 fields");
        MetricsRow r;
        r.method = f[0];
        r.threshold = detail::parse_optional(f[1], at);
        r.n = detail::parse_number<long>(f[2], at);
        r.q = detail::parse_number<long>(f[3], at);
        r.sparsity = f[4];
        r.replication = detail::parse_number<int>(f[5], at);
        r.tpr = detail::parse_optional(f[6], at);
        r.fpr = detail::parse_optional(f[7], at);
        std::stringstream gs(f[8]);
        std::string g;
        while (std::getline(gs, g, ';')) r.gamma_hat.push_back(detail::parse_number<double>(g, at));
        r.pipeline_iter = detail::parse_number<int>(f[9], at);
        r.wall_time_seconds = detail::parse_number<double>(f[10], at);
        rows.push_back(std::move(r));
    }
    return rows;
}

inline std::vector<EstimateRow> read_estimates_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || detail::trim(line) != kEstimatesHeader)
        throw ConfigError("estimates file: header must be '" + std::string(kEstimatesHeader) + "'");
    std::vector<EstimateRow> rows;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (detail::trim(line).empty()) continue;
        const auto f = detail::split_csv_line(detail::trim(line));
        const std::string at = "estimates line " + std::to_string(lineno);
        if (f.size() != 8) throw ConfigError(at + ": expected 8 fields");
        rows.push_back({detail::parse_number<long>(f[0], at), detail::parse_number<long>(f[1], at),
                        detail::parse_number<int>(f[2], at), f[3], detail::parse_number<double>(f[4], at),
                        detail::parse_number<double>(f[5], at), f[6] == "1", detail::parse_number<int>(f[7], at)});
    }
    return rows;
}

// ---------------------------------------------------------------------------
// summaries

struct SummaryKey {
    std::string method;
    std::optional<double> threshold;
    long n = 0;
    long q = 0;
    std::string sparsity;

    auto tie() const { return std::tie(method, threshold, n, q, sparsity); }
    bool operator<(const SummaryKey& o) const { return tie() < o.tie(); }
    bool operator==(const SummaryKey& o) const { return tie() == o.tie(); }
};

struct SummaryRow {
    SummaryKey key;
    long replications = 0;
    MeanSe tpr, fpr, gap, iter1_seconds, iterations;
};

/// Final-iteration row of every (key, replication).
inline std::vector<MetricsRow> final_iteration_rows(const std::vector<MetricsRow>& rows) {
    std::map<std::pair<SummaryKey, int>, const MetricsRow*> last;
    for (const auto& r : rows) {
        auto& slot = last[{SummaryKey{r.method, r.threshold, r.n, r.q, r.sparsity}, r.replication}];
        if (!slot || r.pipeline_iter > slot->pipeline_iter) slot = &r;
    }
    std::vector<MetricsRow> out;
    for (const auto& [k, r] : last) out.push_back(*r);
    return out;
}

inline std::vector<SummaryRow> summarize(const std::vector<MetricsRow>& rows) {
    struct Acc {
        std::vector<double> tpr, fpr, gap, t1, iters;
    };
    std::map<SummaryKey, Acc> acc;
    for (const auto& r : final_iteration_rows(rows)) {
        auto& a = acc[SummaryKey{r.method, r.threshold, r.n, r.q, r.sparsity}];
        if (r.tpr) a.tpr.push_back(*r.tpr);
        if (r.fpr) a.fpr.push_back(*r.fpr);
        a.gap.push_back(r.tpr.value_or(0.0) - r.fpr.value_or(0.0));
        a.iters.push_back(r.pipeline_iter);
    }
    for (const auto& r : rows)
        if (r.pipeline_iter == 1) acc[SummaryKey{r.method, r.threshold, r.n, r.q, r.sparsity}].t1.push_back(r.wall_time_seconds);
    std::vector<SummaryRow> out;
    for (const auto& [k, a] : acc) {
        SummaryRow s;
        s.key = k;
        s.replications = static_cast<long>(a.gap.size());
        s.tpr = mean_se(a.tpr);
        s.fpr = mean_se(a.fpr);
        s.gap = mean_se(a.gap);
        s.iter1_seconds = mean_se(a.t1);
        s.iterations = mean_se(a.iters);
        out.push_back(std::move(s));
    }
    return out;
}

struct GammaQuantiles {
    SummaryKey key;
    int pipeline_iter = 0;
    int component = 0;  ///< 1-based
    long count = 0;
    double min = 0, q1 = 0, median = 0, q3 = 0, max = 0, mean = 0;
};

/// Distribution of each gamma component over replications, per pipeline
/// iteration (boxplot inputs).  Replications that stopped earlier do not
/// contribute to later iterations.
inline std::vector<GammaQuantiles> gamma_by_iteration(const std::vector<MetricsRow>& rows) {
    std::map<std::tuple<SummaryKey, int, int>, std::vector<double>> acc;
    for (const auto& r : rows)
        for (std::size_t j = 0; j < r.gamma_hat.size(); ++j)
            acc[{SummaryKey{r.method, r.threshold, r.n, r.q, r.sparsity}, r.pipeline_iter, static_cast<int>(j + 1)}]
                .push_back(r.gamma_hat[j]);
    std::vector<GammaQuantiles> out;
    for (const auto& [k, v] : acc) {
        GammaQuantiles g;
        std::tie(g.key, g.pipeline_iter, g.component) = k;
        g.count = static_cast<long>(v.size());
        g.min = quantile(v, 0.0);
        g.q1 = quantile(v, 0.25);
        g.median = quantile(v, 0.5);
        g.q3 = quantile(v, 0.75);
        g.max = quantile(v, 1.0);
        g.mean = mean_se(v).mean;
        out.push_back(g);
    }
    return out;
}

struct EstimateSummary {
    long n = 0;
    long q = 0;
    std::string param;
    double truth = 0;
    long count = 0;
    double mean = 0, min = 0, q1 = 0, median = 0, q3 = 0, max = 0, median_abs_error = 0;
};

inline std::vector<EstimateSummary> summarize_estimates(const std::vector<EstimateRow>& rows) {
    std::map<std::tuple<long, long, std::string>, std::pair<double, std::vector<double>>> acc;
    for (const auto& r : rows) {
        auto& a = acc[{r.n, r.q, r.param}];
        a.first = r.truth;
        a.second.push_back(r.estimate);
    }
    std::vector<EstimateSummary> out;
    for (const auto& [k, a] : acc) {
        EstimateSummary s;
        std::tie(s.n, s.q, s.param) = k;
        s.truth = a.first;
        const auto& v = a.second;
        s.count = static_cast<long>(v.size());
        s.mean = mean_se(v).mean;
        s.min = quantile(v, 0.0);
        s.q1 = quantile(v, 0.25);
        s.median = quantile(v, 0.5);
        s.q3 = quantile(v, 0.75);
        s.max = quantile(v, 1.0);
        std::vector<double> err;
        for (double x : v) err.push_back(std::abs(x - s.truth));
        s.median_abs_error = median(err);
        out.push_back(s);
    }
    return out;
}

// ---------------------------------------------------------------------------
// CSV output

namespace detail {

inline void key_cells(std::ostream& os, const SummaryKey& k) {
    os << k.method << ',' << format_optional(k.threshold) << ',' << k.n << ',' << k.q << ',' << k.sparsity;
}

}  // namespace detail

inline void write_summary_csv(std::ostream& os, const std::vector<SummaryRow>& rows) {
    os << "method,threshold,n,q,sparsity,replications,tpr_mean,tpr_se,fpr_mean,fpr_se,gap_mean,gap_se,"
          "iterations_mean,iter1_seconds_mean\n";
    for (const auto& s : rows) {
        detail::key_cells(os, s.key);
        os << ',' << s.replications << ',' << format_double(s.tpr.mean) << ',' << format_double(s.tpr.se) << ','
           << format_double(s.fpr.mean) << ',' << format_double(s.fpr.se) << ',' << format_double(s.gap.mean) << ','
           << format_double(s.gap.se) << ',' << format_double(s.iterations.mean) << ','
           << format_double(s.iter1_seconds.mean) << '\n';
    }
}

inline void write_gamma_csv(std::ostream& os, const std::vector<GammaQuantiles>& rows) {
    os << "method,threshold,n,q,sparsity,pipeline_iter,component,count,min,q1,median,q3,max,mean\n";
    for (const auto& g : rows) {
        detail::key_cells(os, g.key);
        os << ',' << g.pipeline_iter << ',' << g.component << ',' << g.count << ',' << format_double(g.min) << ','
           << format_double(g.q1) << ',' << format_double(g.median) << ',' << format_double(g.q3) << ','
           << format_double(g.max) << ',' << format_double(g.mean) << '\n';
    }
}

inline void write_estimates_summary_csv(std::ostream& os, const std::vector<EstimateSummary>& rows) {
    os << "n,q,param,truth,count,mean,min,q1,median,q3,max,median_abs_error\n";
    for (const auto& s : rows)
        os << s.n << ',' << s.q << ',' << s.param << ',' << format_double(s.truth) << ',' << s.count << ','
           << format_double(s.mean) << ',' << format_double(s.min) << ',' << format_double(s.q1) << ','
           << format_double(s.median) << ',' << format_double(s.q3) << ',' << format_double(s.max) << ','
           << format_double(s.median_abs_error) << '\n';
}

}  // namespace sglarma
