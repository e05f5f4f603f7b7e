// sglarma command-line front end.
//
//   sglarma simulate --config exp.cfg --out corpus/
//   sglarma fit      --data series.csv --q 1 --out fit/
//   sglarma select   --data series.csv --q 1 --method ss_cv --threshold 0.7
//   sglarma bench    --config exp.cfg --threads 8 --out results/
//   sglarma bench    --manifest results/manifest.json --out rerun/
//   sglarma report   --out results/
//
// Exit status: 0 success, 1 usage or input error, 2 numerical failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "sglarma.hpp"
#include "sglarma/bench.hpp"
#include "sglarma/config.hpp"
#include "sglarma/io.hpp"
#include "sglarma/report.hpp"

namespace fs = std::filesystem;
using namespace sglarma;

namespace {

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::ifstream open_in(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw IoError("cannot open " + p.string());
    return in;
}

std::ofstream open_out(const fs::path& p) {
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream os(p, std::ios::binary);
    if (!os) throw IoError("cannot write " + p.string());
    return os;
}

ExperimentConfig load_config(const std::string& path) {
    auto in = open_in(path);
    return parse_config(in, path);
}

nlohmann::json to_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

struct Common {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
    std::string out;
};

void apply_overrides(ExperimentConfig& c, const Common& o) {
    if (o.seed) c.seed = *o.seed;
    if (o.threads) c.threads = *o.threads;
    if (!o.out.empty()) c.output_dir = o.out;
    c.validate();
}

int cmd_simulate(const Common& o) {
    ExperimentConfig c = load_config(o.config);
    apply_overrides(c, o);
    const fs::path dir = c.output_dir;
    fs::create_directories(dir);
    const Vector beta = scenario_beta(c);
    nlohmann::json files = nlohmann::json::array();
    long rejections = 0;
    for (long n : c.n) {
        const Design design = fourier_design(n, c.p);
        for (long q : c.q)
            for (int r = 0; r < c.n_replications; ++r) {
                ScenarioSpec spec{n, c.p, beta, scenario_gamma(c, q), c.sparsity, replication_seed(c.seed, n, q, r)};
                const SimulationResult sim = simulate_with_retries(spec, design);
                rejections += sim.rejections;
                const std::string name =
                    "series_n" + std::to_string(n) + "_q" + std::to_string(q) + "_r" + std::to_string(r) + ".csv";
                auto os = open_out(dir / name);
                write_series_csv(os, sim.y, design);
                files.push_back(name);
            }
    }
    nlohmann::json m;
    m["tool"] = "sglarma";
    m["version"] = SGLARMA_VERSION;
    m["command"] = "simulate";
    nlohmann::json cfg = nlohmann::json::object();
    for (const auto& [k, v] : config_entries(c)) cfg[k] = v;
    m["config"] = cfg;
    m["beta_star"] = to_json(beta);
    m["counters"] = {{"simulation_rejections", rejections}};
    m["outputs"] = files;
    auto ms = open_out(dir / "manifest.json");
    ms << m.dump(2) << '\n';
    std::cout << "wrote " << files.size() << " series to " << dir.string() << '\n';
    return 0;
}

int cmd_fit(const std::string& data, long q, const Common& o) {
    auto in = open_in(data);
    const SeriesData d = read_series_csv(in, data);
    SelectionConfig sc;
    if (!o.config.empty()) sc = load_config(o.config).selection;
    const GlmFit glm = glm_initializer(d.y, d.design, o.seed.value_or(0));
    const NewtonReport fit = fit_glarma_from(d.y, d.design, glm.beta, q, sc.newton, sc.gamma_search);

    nlohmann::json j;
    j["beta"] = to_json(fit.params.beta);
    j["gamma"] = to_json(fit.params.gamma);
    j["loglik"] = fit.loglik_trace.back();
    j["converged"] = fit.converged;
    j["iterations"] = fit.iterations;
    j["n"] = d.y.n();
    j["p"] = d.design.p();
    j["q"] = q;
    const std::string text = j.dump(2);
    if (!o.out.empty()) {
        auto os = open_out(fs::path(o.out) / "fit.json");
        os << text << '\n';
    }
    std::cout << text << '\n';
    if (!fit.converged) {
        std::cerr << "Newton-Raphson stopped before converging\n";
        return 2;
    }
    return 0;
}

int cmd_select(const std::string& data, long q, const std::string& method, std::optional<double> threshold,
               const Common& o) {
    auto in = open_in(data);
    const SeriesData d = read_series_csv(in, data);
    SelectionConfig sc;
    if (!o.config.empty()) sc = load_config(o.config).selection;
    sc.method = parse_method(method);
    if (sc.method == Method::lasso_best)
        throw UsageError("lasso_best needs the true coefficients and is only available in bench");
    if (threshold) sc.threshold = *threshold;
    if (o.seed) sc.rng_seed = *o.seed;
    const SelectionResult r = run_pipeline(d.y, d.design, q, sc);

    nlohmann::json j;
    j["method"] = to_string(r.method);
    if (uses_threshold(r.method)) j["threshold"] = r.threshold;
    j["support"] = r.support;
    j["frequencies"] = to_json(r.frequencies);
    j["beta_hat"] = to_json(r.beta_hat);
    j["gamma_hat"] = to_json(r.gamma_hat);
    j["pipeline_iters"] = r.pipeline_iters;
    j["converged"] = r.converged;
    nlohmann::json trace = nlohmann::json::array();
    for (const auto& rec : r.trace) trace.push_back(to_json(rec.gamma));
    j["gamma_trace"] = trace;
    const std::string text = j.dump(2);
    if (!o.out.empty()) {
        auto os = open_out(fs::path(o.out) / "selection.json");
        os << text << '\n';
    }
    std::cout << text << '\n';
    return 0;
}

int cmd_bench(const std::string& manifest, const Common& o) {
    ExperimentConfig c;
    if (!manifest.empty()) {
        if (!o.config.empty()) throw UsageError("give either --config or --manifest, not both");
        auto in = open_in(manifest);
        nlohmann::json m;
        try {
            m = nlohmann::json::parse(in);
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError(manifest + ": " + e.what());
        }
        c = config_from_manifest(m);
    } else {
        if (o.config.empty()) throw UsageError("bench needs --config or --manifest");
        c = load_config(o.config);
    }
    apply_overrides(c, o);
    const ExperimentResult res = run_experiment(c, c.threads);
    const auto outputs = write_experiment(c.output_dir, c, res, c.threads);
    std::cout << "wrote";
    for (const auto& f : outputs) std::cout << ' ' << (fs::path(c.output_dir) / f).string();
    std::cout << "\nrows " << (c.experiment == "support" ? res.rows.size() : res.estimates.size()) << ", failed runs "
              << res.failures.size() << ", simulation rejections " << res.simulation_rejections << '\n';
    return 0;
}

int cmd_report(const std::string& in_dir, const Common& o) {
    const fs::path src = in_dir.empty() ? fs::path(o.out) : fs::path(in_dir);
    const fs::path dst = o.out.empty() ? src : fs::path(o.out);
    if (src.empty()) throw UsageError("report needs --in or --out");
    bool any = false;
    if (fs::exists(src / "metrics.csv")) {
        auto in = open_in(src / "metrics.csv");
        const auto rows = read_metrics_csv(in);
        auto s = open_out(dst / "summary.csv");
        write_summary_csv(s, summarize(rows));
        auto g = open_out(dst / "gamma_by_iteration.csv");
        write_gamma_csv(g, gamma_by_iteration(rows));
        std::cout << "wrote " << (dst / "summary.csv").string() << ' ' << (dst / "gamma_by_iteration.csv").string()
                  << '\n';
        any = true;
    }
    if (fs::exists(src / "estimates.csv")) {
        auto in = open_in(src / "estimates.csv");
        auto s = open_out(dst / "estimates_summary.csv");
        write_estimates_summary_csv(s, summarize_estimates(read_estimates_csv(in)));
        std::cout << "wrote " << (dst / "estimates_summary.csv").string() << '\n';
        any = true;
    }
    if (!any) throw UsageError("no metrics.csv or estimates.csv in " + src.string());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sparse Poisson GLARMA: simulation, estimation and variable selection"};
    app.require_subcommand(1);
    app.set_version_flag("--version", SGLARMA_VERSION);

    Common o;
    auto common = [&](CLI::App* sub, bool needs_config) {
        auto* c = sub->add_option("--config", o.config, "key = value experiment file");
        if (needs_config) c->check(CLI::ExistingFile);
        sub->add_option("--seed", o.seed, "RNG seed (overrides the config)");
        sub->add_option("--threads", o.threads, "worker threads")->check(CLI::PositiveNumber);
        sub->add_option("--out", o.out, "output directory");
    };

    auto* sim = app.add_subcommand("simulate", "write simulated series as CSV files");
    common(sim, true);
    sim->get_option("--config")->required();

    std::string data;
    long q = 1;
    auto* fit = app.add_subcommand("fit", "joint maximum likelihood fit of a series");
    common(fit, true);
    fit->add_option("--data", data, "CSV with columns t,y,x1..xp")->required()->check(CLI::ExistingFile);
    fit->add_option("--q", q, "MA order")->check(CLI::PositiveNumber);

    std::string method = "ss_cv";
    std::optional<double> threshold;
    auto* sel = app.add_subcommand("select", "variable selection on a series");
    common(sel, true);
    sel->add_option("--data", data, "CSV with columns t,y,x1..xp")->required()->check(CLI::ExistingFile);
    sel->add_option("--q", q, "MA order")->check(CLI::PositiveNumber);
    sel->add_option("--method", method, "ss_cv, ss_min, fast_ss, lasso_cv or mle_threshold");
    sel->add_option("--threshold", threshold, "selection threshold");

    std::string manifest;
    auto* bench = app.add_subcommand("bench", "run a replicated simulation experiment");
    common(bench, true);
    bench->add_option("--manifest", manifest, "rerun the experiment recorded in a manifest")->check(CLI::ExistingFile);

    std::string in_dir;
    auto* rep = app.add_subcommand("report", "aggregate bench output into summary tables");
    common(rep, false);
    rep->add_option("--in", in_dir, "directory holding metrics.csv / estimates.csv (default: --out)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (sim->parsed()) return cmd_simulate(o);
        if (fit->parsed()) return cmd_fit(data, q, o);
        if (sel->parsed()) return cmd_select(data, q, method, threshold, o);
        if (bench->parsed()) return cmd_bench(manifest, o);
        if (rep->parsed()) return cmd_report(in_dir, o);
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
