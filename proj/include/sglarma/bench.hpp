#pragma once

// Replicated simulation experiments.  Each replication owns its RNG streams,
// so replications run on any number of threads and the rows are merged back
// in (n, q, replication, method, threshold, iteration) order.

#include <atomic>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "sglarma/config.hpp"
#include "sglarma/estimation.hpp"
#include "sglarma/glm.hpp"
#include "sglarma/metrics.hpp"
#include "sglarma/selection.hpp"
#include "sglarma/simulate.hpp"

#ifndef SGLARMA_VERSION
#define SGLARMA_VERSION "0.0.0"
#endif

namespace sglarma {

inline constexpr const char* kMetricsHeader =
    "method,threshold,n,q,sparsity,replication,tpr,fpr,gamma_hat,pipeline_iter,wall_time_seconds";
inline constexpr const char* kEstimatesHeader = "n,q,replication,param,truth,estimate,converged,iterations";

struct MetricsRow {
    std::string method;
    std::optional<double> threshold;  ///< missing for methods without one
    long n = 0;
    long q = 0;
    std::string sparsity;
    int replication = 0;
    std::optional<double> tpr;
    std::optional<double> fpr;
    std::vector<double> gamma_hat;
    int pipeline_iter = 0;
    double wall_time_seconds = 0.0;
};

struct EstimateRow {
    long n = 0;
    long q = 0;
    int replication = 0;
    std::string param;  ///< beta0.., gamma1..
    double truth = 0.0;
    double estimate = 0.0;
    bool converged = false;
    int iterations = 0;
};

struct FailureRecord {
    long n = 0;
    long q = 0;
    int replication = 0;
    std::string method;
    std::string what;
};

struct ExperimentResult {
    std::vector<MetricsRow> rows;
    std::vector<EstimateRow> estimates;
    std::vector<FailureRecord> failures;
    long simulation_rejections = 0;
    long clamped_final_states = 0;   ///< fits whose final (beta, gamma) drives W into the clamp
    long nonconverged = 0;           ///< pipelines or joint fits stopped by their iteration cap
};

/// True coefficients of a scenario.
inline Vector scenario_beta(const ExperimentConfig& c) {
    Vector b = c.sparsity == "none" ? Vector::Zero(c.p + 1) : sparse_beta(c.sparsity);
    b[0] = c.intercept;
    return b;
}

inline Vector scenario_gamma(const ExperimentConfig& c, long q) {
    if (!c.gamma.empty()) return Eigen::Map<const Vector>(c.gamma.data(), static_cast<Eigen::Index>(c.gamma.size()));
    return default_gamma_star(q);
}

inline std::uint64_t replication_seed(std::uint64_t seed, long n, long q, int r) {
    return derive_seed(seed, {static_cast<std::uint64_t>(StreamTag::replication), static_cast<std::uint64_t>(n),
                              static_cast<std::uint64_t>(q), static_cast<std::uint64_t>(r)});
}

namespace detail {

inline std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

inline void run_support_replication(const ExperimentConfig& c, const Design& design, long n, long q, int r,
                                    ExperimentResult& out) {
    const Vector truth = scenario_beta(c);
    ScenarioSpec spec{n, c.p, truth, scenario_gamma(c, q), c.sparsity, replication_seed(c.seed, n, q, r)};
    SimulationResult sim;
    try {
        sim = simulate_with_retries(spec, design);
    } catch (const Error& e) {
        out.failures.push_back({n, q, r, "simulate", e.what()});
        return;
    }
    out.simulation_rejections += sim.rejections;

    for (Method m : c.methods) {
        SelectionConfig sc = c.selection;
        sc.method = m;
        sc.rng_seed = derive_seed(spec.rng_seed, {static_cast<std::uint64_t>(StreamTag::pipeline)});
        const auto& ths = m == Method::mle_threshold ? c.mle_thresholds : c.thresholds;
        std::vector<SelectionResult> results;
        try {
            results = run_pipeline_thresholds(sim.y, design, q, sc, ths, truth);
        } catch (const Error& e) {
            out.failures.push_back({n, q, r, to_string(m), e.what()});
            continue;
        }
        for (const auto& res : results) {
            if (!res.converged && m != Method::mle_threshold) ++out.nonconverged;
            if (compute_state(sim.y, design, Params{res.beta_hat, res.gamma_hat}).clamped) ++out.clamped_final_states;
            for (const auto& rec : res.trace) {
                MetricsRow row;
                row.method = to_string(m);
                if (uses_threshold(m)) row.threshold = res.threshold;
                row.n = n;
                row.q = q;
                row.sparsity = c.sparsity;
                row.replication = r;
                const Rates rates = compute_tpr_fpr(rec.support, truth);
                row.tpr = rates.tpr;
                row.fpr = rates.fpr;
                row.gamma_hat = to_std(rec.gamma);
                row.pipeline_iter = rec.iteration;
                row.wall_time_seconds = c.timing ? rec.seconds : 0.0;
                out.rows.push_back(std::move(row));
            }
        }
    }
}

inline void run_estimation_replication(const ExperimentConfig& c, const Design& design, long n, long q, int r,
                                       ExperimentResult& out) {
    const Vector beta = scenario_beta(c);
    const Vector gamma = scenario_gamma(c, q);
    ScenarioSpec spec{n, c.p, beta, gamma, c.sparsity, replication_seed(c.seed, n, q, r)};
    try {
        const SimulationResult sim = simulate_with_retries(spec, design);
        out.simulation_rejections += sim.rejections;
        const GlmFit glm = fit_poisson_glm(sim.y, design);
        const NewtonReport fit =
            fit_glarma_from(sim.y, design, glm.beta, q, c.selection.newton, c.selection.gamma_search);
        if (!fit.converged) ++out.nonconverged;
        if (compute_state(sim.y, design, fit.params).clamped) ++out.clamped_final_states;
        auto push = [&](const std::string& name, double t, double e) {
            out.estimates.push_back({n, q, r, name, t, e, fit.converged, fit.iterations});
        };
        for (Eigen::Index i = 0; i < beta.size(); ++i)
            push("beta" + std::to_string(i), beta[i], fit.params.beta[i]);
        for (Eigen::Index j = 0; j < gamma.size(); ++j)
            push("gamma" + std::to_string(j + 1), gamma[j], fit.params.gamma[j]);
    } catch (const Error& e) {
        out.failures.push_back({n, q, r, "joint_mle", e.what()});
    }
}

}  // namespace detail

/// Runs every (n, q, replication) of the config on `threads` workers.
inline ExperimentResult run_experiment(const ExperimentConfig& c, int threads) {
    c.validate();
    if (threads < 1) throw UsageError("threads must be >= 1");

    struct Task {
        std::size_t n_idx;
        long q;
        int r;
    };
    std::vector<Design> designs;
    for (long n : c.n) designs.push_back(fourier_design(n, c.p));
    std::vector<Task> tasks;
    for (std::size_t i = 0; i < c.n.size(); ++i)
        for (long q : c.q)
            for (int r = 0; r < c.n_replications; ++r) tasks.push_back({i, q, r});

    std::vector<ExperimentResult> parts(tasks.size());
    std::atomic<std::size_t> next{0};
    std::exception_ptr fatal;
    std::mutex fatal_mu;
    auto worker = [&] {
        for (;;) {
            const std::size_t k = next.fetch_add(1);
            if (k >= tasks.size()) return;
            const Task& t = tasks[k];
            try {
                if (c.experiment == "support")
                    detail::run_support_replication(c, designs[t.n_idx], c.n[t.n_idx], t.q, t.r, parts[k]);
                else
                    detail::run_estimation_replication(c, designs[t.n_idx], c.n[t.n_idx], t.q, t.r, parts[k]);
            } catch (...) {
                std::lock_guard lock(fatal_mu);
                if (!fatal) fatal = std::current_exception();
                next.store(tasks.size());
                return;
            }
        }
    };
    const int nt = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(threads), tasks.size()));
    if (nt <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < nt; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (fatal) std::rethrow_exception(fatal);

    ExperimentResult all;
    for (auto& p : parts) {
        all.rows.insert(all.rows.end(), std::make_move_iterator(p.rows.begin()), std::make_move_iterator(p.rows.end()));
        all.estimates.insert(all.estimates.end(), p.estimates.begin(), p.estimates.end());
        all.failures.insert(all.failures.end(), p.failures.begin(), p.failures.end());
        all.simulation_rejections += p.simulation_rejections;
        all.clamped_final_states += p.clamped_final_states;
        all.nonconverged += p.nonconverged;
    }
    return all;
}

// ---------------------------------------------------------------------------
// output

inline std::string format_optional(const std::optional<double>& v) { return v ? format_double(*v) : "NA"; }

inline void write_metrics_csv(std::ostream& os, const std::vector<MetricsRow>& rows) {
    os << kMetricsHeader << '\n';
    for (const auto& r : rows) {
        std::string g;
        for (std::size_t j = 0; j < r.gamma_hat.size(); ++j) {
            if (j) g += ';';
            g += format_double(r.gamma_hat[j]);
        }
        os << r.method << ',' << format_optional(r.threshold) << ',' << r.n << ',' << r.q << ',' << r.sparsity << ','
           << r.replication << ',' << format_optional(r.tpr) << ',' << format_optional(r.fpr) << ',' << g << ','
           << r.pipeline_iter << ',' << format_double(r.wall_time_seconds) << '\n';
    }
}

inline void write_estimates_csv(std::ostream& os, const std::vector<EstimateRow>& rows) {
    os << kEstimatesHeader << '\n';
    for (const auto& r : rows)
        os << r.n << ',' << r.q << ',' << r.replication << ',' << r.param << ',' << format_double(r.truth) << ','
           << format_double(r.estimate) << ',' << (r.converged ? 1 : 0) << ',' << r.iterations << '\n';
}

inline nlohmann::json make_manifest(const ExperimentConfig& c, const ExperimentResult& res, int threads,
                                    const std::vector<std::string>& outputs) {
    nlohmann::json m;
    m["tool"] = "sglarma";
    m["version"] = SGLARMA_VERSION;
    m["command"] = "bench";
    nlohmann::json cfg = nlohmann::json::object();
    for (const auto& [k, v] : config_entries(c)) cfg[k] = v;
    m["config"] = cfg;
    m["seed"] = c.seed;
    m["threads"] = threads;
    m["design"] = {{"covariates", "fourier"}, {"column_order", "intercept, then cos(2 pi k t/n), sin(2 pi k t/n) for k = 1, 2, ..."}};
    m["versions"] = {{"sglarma", SGLARMA_VERSION},
                     {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                   std::to_string(EIGEN_MINOR_VERSION)},
                     {"compiler", __VERSION__}};
    m["counters"] = {{"simulation_rejections", res.simulation_rejections},
                     {"clamped_final_states", res.clamped_final_states},
                     {"nonconverged", res.nonconverged},
                     {"failed_runs", res.failures.size()}};
    nlohmann::json f = nlohmann::json::array();
    for (const auto& x : res.failures)
        f.push_back({{"n", x.n}, {"q", x.q}, {"replication", x.replication}, {"method", x.method}, {"error", x.what}});
    m["failures"] = f;
    m["outputs"] = outputs;
    m["metrics_columns"] = kMetricsHeader;
    return m;
}

/// Config stored in a manifest.
inline ExperimentConfig config_from_manifest(const nlohmann::json& m) {
    if (!m.contains("config") || !m["config"].is_object()) throw ConfigError("manifest: missing config object");
    std::string text;
    for (const auto& [k, v] : m["config"].items()) {
        if (!v.is_string()) throw ConfigError("manifest: config." + k + " must be a string");
        text += k + " = " + v.get<std::string>() + "\n";
    }
    return parse_config_string(text, "manifest");
}

/// Writes metrics.csv or estimates.csv plus manifest.json under `dir`.
inline std::vector<std::string> write_experiment(const std::filesystem::path& dir, const ExperimentConfig& c,
                                                 const ExperimentResult& res, int threads) {
    std::filesystem::create_directories(dir);
    std::vector<std::string> outputs;
    auto open = [&](const std::string& name) {
        std::ofstream os(dir / name, std::ios::binary);
        if (!os) throw std::runtime_error("cannot write " + (dir / name).string());
        outputs.push_back(name);
        return os;
    };
    if (c.experiment == "support") {
        auto os = open("metrics.csv");
        write_metrics_csv(os, res.rows);
    } else {
        auto os = open("estimates.csv");
        write_estimates_csv(os, res.estimates);
    }
    std::ofstream ms(dir / "manifest.json", std::ios::binary);
    if (!ms) throw std::runtime_error("cannot write " + (dir / "manifest.json").string());
    ms << make_manifest(c, res, threads, outputs).dump(2) << '\n';
    outputs.push_back("manifest.json");
    return outputs;
}

}  // namespace sglarma
