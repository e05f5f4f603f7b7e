#pragma once

// Synthetic GLARMA series: Fourier covariates, sparse beta patterns and a
// sequential generator driven by counter-based random streams.

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "sglarma/errors.hpp"
#include "sglarma/model.hpp"
#include "sglarma/rng.hpp"

namespace sglarma {

/// Intensities above this abort a simulated series.
inline constexpr double kSimulationMuLimit = 1e8;

struct ScenarioSpec {
    Eigen::Index n = 0;
    Eigen::Index p = 0;
    Vector beta_star;
    Vector gamma_star;
    std::string sparsity_label = "none";
    std::uint64_t rng_seed = 0;

    Eigen::Index q() const noexcept { return gamma_star.size(); }
};

/// Column 0 = 1; columns 2k-1, 2k = cos(2 pi k t / n), sin(2 pi k t / n) for
/// k = 1, 2, ..., t = 1..n, truncated to p non-intercept columns.
inline Design fourier_design(Eigen::Index n, Eigen::Index p) {
    if (n < 1 || p < 0) throw DimensionError("fourier design needs n >= 1 and p >= 0");
    Matrix x(n, p + 1);
    x.col(0).setOnes();
    for (Eigen::Index c = 1; c <= p; ++c) {
        const Eigen::Index k = (c + 1) / 2;
        const bool is_cos = (c % 2) == 1;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double a = 2.0 * std::numbers::pi * static_cast<double>(k) * static_cast<double>(i + 1) /
                             static_cast<double>(n);
            x(i, c) = is_cos ? std::cos(a) : std::sin(a);
        }
    }
    return Design(std::move(x));
}

/// The two sparse coefficient patterns of the p = 100 experiments ("5pct", "10pct").
inline Vector sparse_beta(const std::string& pattern) {
    Vector b = Vector::Zero(101);
    if (pattern == "5pct") {
        b[1] = 1.73;
        b[3] = 0.38;
        b[17] = 0.29;
        b[33] = -0.64;
        b[44] = -0.13;
    } else if (pattern == "10pct") {
        b[1] = 1.73;
        b[3] = 1.2;
        b[5] = 0.67;
        b[10] = 0.5;
        b[14] = -0.38;
        b[17] = 0.29;
        b[30] = -0.64;
        b[33] = -0.13;
        b[38] = -0.1;
        b[44] = -0.07;
    } else {
        throw UsageError("unknown sparsity pattern '" + pattern + "' (expected 5pct or 10pct)");
    }
    return b;
}

/// Default MA coefficients for q = 1, 2, 3.
inline Vector default_gamma_star(Eigen::Index q) {
    switch (q) {
        case 1: return Vector::Constant(1, 0.5);
        case 2: return (Vector(2) << 0.5, 0.25).finished();
        case 3: return (Vector(3) << 0.5, 1.0 / 3.0, 0.25).finished();
        default: throw UsageError("no default gamma for q = " + std::to_string(q) + "; give gamma explicitly");
    }
}

// ---------------------------------------------------------------------------
// Poisson sampling

namespace detail {

inline double log_factorial(std::uint64_t k) {
    static const std::array<double, 256> table = [] {
        std::array<double, 256> t{};
        t[0] = 0.0;
        for (std::size_t i = 1; i < t.size(); ++i) t[i] = t[i - 1] + std::log(static_cast<double>(i));
        return t;
    }();
    if (k < table.size()) return table[k];
    // Stirling series; error below 1e-13 for k >= 256
    const double x = static_cast<double>(k);
    const double ix = 1.0 / x;
    const double ix2 = ix * ix;
    return x * std::log(x) - x + 0.5 * std::log(2.0 * std::numbers::pi * x) +
           ix * (1.0 / 12.0 - ix2 * (1.0 / 360.0 - ix2 / 1260.0));
}

}  // namespace detail

/// Poisson(mu) draw: sequential-search inversion for mu < 10, Hormann's
/// transformed rejection (PTRS) for mu >= 10.
inline std::uint64_t sample_poisson(double mu, Philox4x32& rng) {
    if (!(mu >= 0.0) || !std::isfinite(mu)) throw NumericalError("Poisson mean must be finite and >= 0");
    if (mu == 0.0) return 0;
    if (mu < 10.0) {
        const double u = rng.uniform();
        double pk = std::exp(-mu);
        double cdf = pk;
        std::uint64_t k = 0;
        while (u >= cdf) {
            ++k;
            pk *= mu / static_cast<double>(k);
            const double next = cdf + pk;
            if (next == cdf) break;  // tail exhausted in double precision
            cdf = next;
        }
        return k;
    }
    const double slam = std::sqrt(mu);
    const double loglam = std::log(mu);
    const double b = 0.931 + 2.53 * slam;
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double vr = 0.9277 - 3.6224 / (b - 2.0);
    for (;;) {
        const double u = rng.uniform() - 0.5;
        const double v = rng.uniform_open();
        const double us = 0.5 - std::abs(u);
        const double kd = std::floor((2.0 * a / us + b) * u + mu + 0.43);
        if (us >= 0.07 && v <= vr) return static_cast<std::uint64_t>(kd);
        if (kd < 0.0 || (us < 0.013 && v > us)) continue;
        const auto k = static_cast<std::uint64_t>(kd);
        if (std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b) <=
            -mu + kd * loglam - detail::log_factorial(k))
            return k;
    }
}

// ---------------------------------------------------------------------------
// GLARMA generator

/// Step-by-step generator; exposes W_t so callers can condition on a prefix.
class GlarmaSimulator {
public:
    GlarmaSimulator(const Design& design, Vector beta, Vector gamma)
        : design_(design), beta_(std::move(beta)), gamma_(std::move(gamma)) {
        if (beta_.size() != design_.p() + 1) throw DimensionError("beta length does not match the design");
        if (gamma_.size() < 1) throw DimensionError("gamma must have at least one entry");
        if (!beta_.allFinite() || !gamma_.allFinite()) throw NumericalError("non-finite simulation parameters");
        E_.reserve(static_cast<std::size_t>(design_.n()));
    }

    Eigen::Index t() const noexcept { return static_cast<Eigen::Index>(E_.size()); }

    /// W of the next time point given the residuals so far.
    double next_w() const {
        const Eigen::Index i = t();
        if (i >= design_.n()) throw DimensionError("simulator ran past the end of the design");
        double w = design_.x().row(i).dot(beta_);
        const Eigen::Index lags = std::min<Eigen::Index>(gamma_.size(), i);
        for (Eigen::Index j = 1; j <= lags; ++j) w += gamma_[j - 1] * E_[static_cast<std::size_t>(i - j)];
        return w;
    }

    /// Records an observed value for the next time point.
    void push(double y) {
        const double w = next_w();
        E_.push_back(y * std::exp(-w) - 1.0);
    }

    /// Draws the next value; throws SimulationDivergenceError when exp(W) > 1e8.
    double step(Philox4x32& rng) {
        const double w = next_w();
        const double mu = std::exp(w);
        if (!(mu <= kSimulationMuLimit))
            throw SimulationDivergenceError("simulated intensity exceeded 1e8 at t = " + std::to_string(t() + 1));
        const auto y = static_cast<double>(sample_poisson(mu, rng));
        E_.push_back(y * std::exp(-w) - 1.0);
        return y;
    }

    const std::vector<double>& residuals() const noexcept { return E_; }

private:
    const Design& design_;
    Vector beta_;
    Vector gamma_;
    std::vector<double> E_;
};

/// One series from an explicit stream.
inline CountSeries simulate_glarma(const Design& design, const Vector& beta_star, const Vector& gamma_star,
                                   Philox4x32& rng) {
    GlarmaSimulator sim(design, beta_star, gamma_star);
    Vector y(design.n());
    for (Eigen::Index i = 0; i < design.n(); ++i) y[i] = sim.step(rng);
    return CountSeries(std::move(y));
}

/// One series from the scenario's seed (single attempt).
inline CountSeries simulate_glarma(const ScenarioSpec& spec, const Design& design) {
    if (design.n() != spec.n || design.p() != spec.p) throw DimensionError("scenario does not match the design");
    auto rng = make_stream(spec.rng_seed, {static_cast<std::uint64_t>(StreamTag::simulation), 0});
    return simulate_glarma(design, spec.beta_star, spec.gamma_star, rng);
}

struct SimulationResult {
    CountSeries y;
    int rejections = 0;  ///< diverged draws that were discarded before this one
};

/// Re-draws with the next sub-seed whenever a draw diverges.
inline SimulationResult simulate_with_retries(const ScenarioSpec& spec, const Design& design, int max_attempts = 100) {
    if (design.n() != spec.n || design.p() != spec.p) throw DimensionError("scenario does not match the design");
    for (int a = 0; a < max_attempts; ++a) {
        auto rng = make_stream(spec.rng_seed,
                               {static_cast<std::uint64_t>(StreamTag::simulation), static_cast<std::uint64_t>(a)});
        try {
            return {simulate_glarma(design, spec.beta_star, spec.gamma_star, rng), a};
        } catch (const SimulationDivergenceError&) {
        }
    }
    throw SimulationDivergenceError("every one of " + std::to_string(max_attempts) + " simulation attempts diverged");
}

}  // namespace sglarma
