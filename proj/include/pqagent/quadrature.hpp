#pragma once

#include <cmath>
#include <cstddef>
#include <map>
#include <mutex>
#include <numbers>
#include <span>
#include <vector>

#include "pqagent/error.hpp"

namespace pqagent {

/// Gauss-Legendre nodes and weights on [-1, 1].
class GaussLegendre {
public:
    explicit GaussLegendre(std::size_t n) : nodes_(n), weights_(n) {
        if (n == 0) throw DomainError("GaussLegendre: need at least one node");
        if (n == 1) {
            nodes_[0] = 0.0;
            weights_[0] = 2.0;
            return;
        }
        const std::size_t half = (n + 1) / 2;
        for (std::size_t i = 0; i < half; ++i) {
            // Tricomi's initial guess, then Newton on P_n.
            double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) /
                                (static_cast<double>(n) + 0.5));
            double dp = 1.0;
            for (int it = 0; it < 100; ++it) {
                double p0 = 1.0;
                double p1 = x;
                for (std::size_t k = 2; k <= n; ++k) {
                    const double kd = static_cast<double>(k);
                    const double pk = ((2.0 * kd - 1.0) * x * p1 - (kd - 1.0) * p0) / kd;
                    p0 = p1;
                    p1 = pk;
                }
                dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
                const double dx = p1 / dp;
                x -= dx;
                if (std::abs(dx) < 1e-16) break;
            }
            const double w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes_[i] = -x;
            weights_[i] = w;
            nodes_[n - 1 - i] = x;
            weights_[n - 1 - i] = w;
        }
    }

    std::size_t size() const { return nodes_.size(); }
    std::span<const double> nodes() const { return nodes_; }
    std::span<const double> weights() const { return weights_; }

    /// Integral of f over [a, b].
    template <class F>
    double integrate(F&& f, double a, double b) const {
        const double half = 0.5 * (b - a);
        const double mid = 0.5 * (a + b);
        double sum = 0.0;
        for (std::size_t i = 0; i < nodes_.size(); ++i) {
            sum += weights_[i] * f(mid + half * nodes_[i]);
        }
        return half * sum;
    }

private:
    std::vector<double> nodes_;
    std::vector<double> weights_;
};

inline constexpr std::size_t kDefaultNodes = 256;

/// Shared rule for n nodes; built once per n and never freed.
inline const GaussLegendre& gauss_legendre(std::size_t n = kDefaultNodes) {
    static std::mutex mutex;
    static std::map<std::size_t, GaussLegendre> cache;
    std::lock_guard lock(mutex);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, GaussLegendre(n)).first;
    return it->second;
}

/// Node count and panel layout used by the analytic integrals.
struct Accuracy {
    std::size_t nodes = kDefaultNodes;
    std::size_t panels = 8;

    Accuracy refined() const { return {2 * nodes, panels}; }
};

/// Integral over [a, b] split into equal panels.
template <class F>
double integrate(F&& f, double a, double b, const Accuracy& acc = {}) {
    if (!(b > a)) return 0.0;
    const auto& rule = gauss_legendre(acc.nodes);
    const std::size_t panels = acc.panels == 0 ? 1 : acc.panels;
    const double h = (b - a) / static_cast<double>(panels);
    double sum = 0.0;
    for (std::size_t p = 0; p < panels; ++p) {
        const double lo = a + h * static_cast<double>(p);
        const double hi = (p + 1 == panels) ? b : lo + h;
        sum += rule.integrate(f, lo, hi);
    }
    return sum;
}

/// Integral over consecutive pieces [breaks[i], breaks[i+1]], one rule per piece.
template <class F>
double integrate_pieces(F&& f, std::span<const double> breaks, std::size_t nodes = kDefaultNodes) {
    const auto& rule = gauss_legendre(nodes);
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
        if (breaks[i + 1] > breaks[i]) sum += rule.integrate(f, breaks[i], breaks[i + 1]);
    }
    return sum;
}

}  // namespace pqagent
