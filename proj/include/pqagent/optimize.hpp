#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "pqagent/error.hpp"

namespace pqagent {

struct ScalarOptimum {
    double arg = 0.0;
    double value = 0.0;
    double grid_step = 0.0;
};

/// Golden-section minimization of a unimodal f on [a, b].
template <class F>
ScalarOptimum golden_section_min(F&& f, double a, double b, double tol = 1e-10,
                                 int max_iter = 200) {
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = f(c);
    double fd = f(d);
    for (int it = 0; it < max_iter && (b - a) > tol; ++it) {
        if (fc <= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    return fc <= fd ? ScalarOptimum{c, fc, 0.0} : ScalarOptimum{d, fd, 0.0};
}

/// Global minimum of f on [lo, hi]: evenly spaced grid, then golden section on the
/// bracket around the best grid point. The refined point only replaces the grid point
/// when strictly better, and grid ties resolve to the smaller argument.
template <class F>
ScalarOptimum grid_golden_min(F&& f, double lo, double hi, std::size_t points = 1024,
                              double tol = 1e-10) {
    if (!(hi >= lo)) throw DomainError("grid_golden_min: empty interval");
    if (points < 2 || hi == lo) return {lo, f(lo), 0.0};
    const double step = (hi - lo) / static_cast<double>(points - 1);
    std::size_t best = 0;
    double best_value = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < points; ++i) {
        const double x = (i + 1 == points) ? hi : lo + step * static_cast<double>(i);
        const double v = f(x);
        if (v < best_value) {
            best_value = v;
            best = i;
        }
    }
    ScalarOptimum out{best + 1 == points ? hi : lo + step * static_cast<double>(best), best_value,
                      step};
    const double a = best == 0 ? lo : lo + step * static_cast<double>(best - 1);
    const double b = best + 1 >= points ? hi : lo + step * static_cast<double>(best + 1);
    const auto refined = golden_section_min(f, a, b, tol);
    if (refined.value < out.value) {
        out.arg = refined.arg;
        out.value = refined.value;
    }
    return out;
}

/// Plain grid argmin, ties to the smaller argument.
template <class F>
ScalarOptimum grid_min(F&& f, double lo, double hi, std::size_t points) {
    if (points < 2) return {lo, f(lo), 0.0};
    const double step = (hi - lo) / static_cast<double>(points - 1);
    ScalarOptimum out{lo, std::numeric_limits<double>::infinity(), step};
    for (std::size_t i = 0; i < points; ++i) {
        const double x = (i + 1 == points) ? hi : lo + step * static_cast<double>(i);
        const double v = f(x);
        if (v < out.value) out = {x, v, step};
    }
    return out;
}

/// Second differences of sampled values; convexity shows as all entries >= 0.
inline std::vector<double> second_differences(const std::vector<double>& v) {
    std::vector<double> out;
    for (std::size_t i = 1; i + 1 < v.size(); ++i) out.push_back(v[i - 1] - 2.0 * v[i] + v[i + 1]);
    return out;
}

}  // namespace pqagent
