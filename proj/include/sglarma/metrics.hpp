#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <optional>
#include <set>
#include <vector>

#include "sglarma/errors.hpp"
#include "sglarma/model.hpp"

namespace sglarma {

/// S* = { i >= 1 : truth_i != 0 }.  The intercept never counts.
inline std::vector<Eigen::Index> true_support(const Vector& truth) {
    std::vector<Eigen::Index> s;
    for (Eigen::Index i = 1; i < truth.size(); ++i)
        if (truth[i] != 0.0) s.push_back(i);
    return s;
}

struct Rates {
    std::optional<double> tpr;  ///< missing when S* is empty
    std::optional<double> fpr;  ///< missing when S* covers every covariate
};

/// TPR = |S ∩ S*| / |S*| and FPR = |S \ S*| / (p - |S*|) over indices 1..p.
template <class Support>
Rates compute_tpr_fpr(const Support& support, const Vector& truth) {
    const Eigen::Index p = truth.size() - 1;
    if (p < 0) throw DimensionError("truth must have length p + 1 >= 1");
    std::set<Eigen::Index> sel;
    for (auto k : support) {
        const auto i = static_cast<Eigen::Index>(k);
        if (i < 0 || i > p) throw DimensionError("support index out of range");
        if (i >= 1) sel.insert(i);
    }
    Eigen::Index pos = 0, tp = 0, fp = 0;
    for (Eigen::Index i = 1; i <= p; ++i) {
        const bool is_true = truth[i] != 0.0;
        pos += is_true;
        if (sel.count(i)) (is_true ? tp : fp) += 1;
    }
    Rates r;
    if (pos > 0) r.tpr = static_cast<double>(tp) / static_cast<double>(pos);
    if (p - pos > 0) r.fpr = static_cast<double>(fp) / static_cast<double>(p - pos);
    return r;
}

/// TPR - FPR with missing terms counted as 0.
inline double rate_gap(const Rates& r) { return r.tpr.value_or(0.0) - r.fpr.value_or(0.0); }

}  // namespace sglarma
