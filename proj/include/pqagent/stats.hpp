#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <span>

#include <boost/math/distributions/students_t.hpp>

#include "pqagent/error.hpp"

namespace pqagent {

/// Generator owned by one replication; replication i is seeded with base_seed + i.
using Rng = std::mt19937_64;

inline Rng replication_rng(std::uint64_t base_seed, std::uint64_t replication) {
    return Rng(base_seed + replication);
}

struct MeanEstimate {
    double mean = 0.0;
    double half_width = 0.0;  // two-sided 95% Student-t half width
    std::size_t samples = 0;

    double lo() const { return mean - half_width; }
    double hi() const { return mean + half_width; }
    bool covers(double value) const { return value >= lo() && value <= hi(); }
    bool overlaps(const MeanEstimate& other) const {
        return lo() <= other.hi() && other.lo() <= hi();
    }
};

inline double student_t_quantile(double p, std::size_t dof) {
    if (dof == 0) throw DomainError("student_t_quantile: zero degrees of freedom");
    boost::math::students_t dist(static_cast<double>(dof));
    return boost::math::quantile(dist, p);
}

/// Mean and 95% confidence half width of independent replication values.
inline MeanEstimate estimate_mean(std::span<const double> values, double level = 0.95) {
    MeanEstimate out;
    out.samples = values.size();
    if (values.empty()) return out;
    double sum = 0.0;
    for (double v : values) sum += v;
    out.mean = sum / static_cast<double>(values.size());
    if (values.size() < 2) {
        out.half_width = std::numeric_limits<double>::infinity();
        return out;
    }
    double ss = 0.0;
    for (double v : values) ss += (v - out.mean) * (v - out.mean);
    const double sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
    const double t = student_t_quantile(0.5 + 0.5 * level, values.size() - 1);
    out.half_width = t * sd / std::sqrt(static_cast<double>(values.size()));
    return out;
}

}  // namespace pqagent
