#pragma once

// Count-series data files: CSV with header t,y,x1..xp.  The intercept column
// is implicit.

#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "sglarma/config.hpp"
#include "sglarma/errors.hpp"
#include "sglarma/model.hpp"
#include "sglarma/report.hpp"

namespace sglarma {

struct SeriesData {
    CountSeries y;
    Design design;  ///< intercept first
};

inline SeriesData read_series_csv(std::istream& in, const std::string& source = "data") {
    std::string line;
    if (!std::getline(in, line)) throw ConfigError(source + ": empty file");
    const auto head = detail::split_csv_line(detail::trim(line));
    if (head.size() < 2 || detail::trim(head[0]) != "t" || detail::trim(head[1]) != "y")
        throw ConfigError(source + ":1: header must start with t,y");
    const std::size_t p = head.size() - 2;
    for (std::size_t j = 0; j < p; ++j)
        if (detail::trim(head[j + 2]) != "x" + std::to_string(j + 1))
            throw ConfigError(source + ":1: column " + std::to_string(j + 3) + " must be x" + std::to_string(j + 1));

    std::vector<double> ys, xs;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (detail::trim(line).empty()) continue;
        const std::string at = source + ":" + std::to_string(lineno);
        const auto f = detail::split_csv_line(detail::trim(line));
        if (f.size() != p + 2) throw ConfigError(at + ": expected " + std::to_string(p + 2) + " fields");
        const auto t = detail::parse_number<long>(detail::trim(f[0]), at + ": t");
        if (t != static_cast<long>(ys.size()) + 1) throw ConfigError(at + ": t must run 1, 2, ... without gaps");
        const double y = detail::parse_number<double>(detail::trim(f[1]), at + ": y");
        if (!(y >= 0.0) || y != std::floor(y)) throw ConfigError(at + ": y must be a non-negative integer");
        ys.push_back(y);
        xs.push_back(1.0);
        for (std::size_t j = 0; j < p; ++j) {
            const double x = detail::parse_number<double>(detail::trim(f[j + 2]), at + ": x" + std::to_string(j + 1));
            if (!std::isfinite(x)) throw ConfigError(at + ": covariates must be finite");
            xs.push_back(x);
        }
    }
    if (ys.empty()) throw ConfigError(source + ": no observations");
    const auto n = static_cast<Eigen::Index>(ys.size());
    const auto P = static_cast<Eigen::Index>(p + 1);
    Matrix X = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(xs.data(), n, P);
    return {CountSeries(Eigen::Map<const Vector>(ys.data(), n)), Design(std::move(X))};
}

inline void write_series_csv(std::ostream& os, const CountSeries& y, const Design& design) {
    if (y.n() != design.n()) throw DimensionError("series length != design rows");
    os << "t,y";
    for (Eigen::Index j = 1; j <= design.p(); ++j) os << ",x" << j;
    os << '\n';
    for (Eigen::Index i = 0; i < y.n(); ++i) {
        os << (i + 1) << ',' << format_double(y.values()[i]);
        for (Eigen::Index j = 1; j <= design.p(); ++j) os << ',' << format_double(design.x()(i, j));
        os << '\n';
    }
}

}  // namespace sglarma
