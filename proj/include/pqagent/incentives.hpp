#pragma once

#include <cmath>
#include <string>

#include "pqagent/analytic.hpp"
#include "pqagent/dists.hpp"
#include "pqagent/error.hpp"
#include "pqagent/optimize.hpp"

namespace pqagent {

/// Increasing map from incentive beta >= 0 to prioritization weight gamma in [0, 1].
struct IncentiveMap {
    enum class Kind { Saturating, Logistic, CappedLinear };

    Kind kind = Kind::Saturating;
    double scale = 1.0;   // logistic slope, or linear slope
    double center = 2.0;  // logistic midpoint

    static IncentiveMap saturating() { return {Kind::Saturating, 1.0, 0.0}; }
    static IncentiveMap logistic(double slope = 1.0, double center = 2.0) {
        return {Kind::Logistic, slope, center};
    }
    static IncentiveMap capped_linear(double slope = 0.1) { return {Kind::CappedLinear, slope, 0.0}; }

    double operator()(double beta) const {
        if (beta < 0.0) throw DomainError("IncentiveMap: beta must be nonnegative");
        switch (kind) {
            case Kind::Saturating:
                return beta / (1.0 + beta);
            case Kind::Logistic: {
                // Logistic curve shifted and rescaled so that f(0) = 0 and f(inf) = 1.
                auto sig = [](double t) { return 1.0 / (1.0 + std::exp(-t)); };
                const double base = sig(-scale * center);
                return (sig(scale * (beta - center)) - base) / (1.0 - base);
            }
            case Kind::CappedLinear:
                return std::min(1.0, scale * beta);
        }
        return 0.0;
    }

    /// Smallest beta with f(beta) >= gamma, by bisection on [0, hi].
    double inverse(double gamma, double hi = 1e6) const {
        if ((*this)(hi) < gamma) throw DomainError("IncentiveMap: weight not reachable");
        double lo = 0.0;
        if ((*this)(lo) >= gamma) return 0.0;
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            if ((*this)(mid) >= gamma) hi = mid; else lo = mid;
        }
        return hi;
    }

    std::string name() const {
        switch (kind) {
            case Kind::Saturating: return "saturating";
            case Kind::Logistic: return "logistic";
            case Kind::CappedLinear: return "capped-linear";
        }
        return "unknown";
    }
};

struct IncentiveSpec {
    double theta = 1.0;  // loss per unit cost
    IncentiveMap f{};
    double rho = 0.0;
    double lambda = 0.4;
    double mu = 0.6;
    double beta_max = 100.0;
    std::size_t grid_points = 4096;

    void validate() const {
        if (!(theta >= 0.0)) throw DomainError("IncentiveSpec: theta must be nonnegative");
        if (!(rho >= -1.0 && rho <= 1.0)) throw DomainError("IncentiveSpec: rho must lie in [-1, 1]");
        if (!(beta_max > 0.0)) throw DomainError("IncentiveSpec: beta_max must be positive");
        if (f(beta_max) < 0.99) {
            throw DomainError("IncentiveSpec: incentive map is not saturated at beta_max");
        }
        if (grid_points < 2) throw DomainError("IncentiveSpec: need at least two grid points");
    }
};

/// U = -beta - theta * C(f(beta)).
inline double utility(double beta, const IncentiveSpec& spec, double c1) {
    if (beta < 0.0) throw DomainError("utility: beta must be nonnegative");
    return -beta - spec.theta * rho_xz(spec.f(beta), spec.rho) * c1;
}

inline double utility(double beta, const IncentiveSpec& spec) {
    return utility(beta, spec, c1_integral(spec.lambda, spec.mu));
}

struct IncentiveOptimum {
    double beta_star = 0.0;
    double u_star = 0.0;
    double grid_step = 0.0;
};

/// Global maximizer of U on [0, beta_max].
///
/// At rho = -1 the utility jumps where f(beta) = 1/2. The objective is then taken from the
/// right at the jump, and a maximizer sitting on it is reported just past it.
inline IncentiveOptimum optimize_incentive(const IncentiveSpec& spec) {
    spec.validate();
    const double c1 = c1_integral(spec.lambda, spec.mu);
    const bool jump = is_degenerate(0.5, spec.rho);
    const double beta_half = jump ? spec.f.inverse(0.5, spec.beta_max) : -1.0;
    auto neg_u = [&](double beta) {
        if (jump && (beta == beta_half || spec.f(beta) == 0.5)) {
            return beta + spec.theta * c1;  // right limit: rho_xz -> +1
        }
        return -utility(beta, spec, c1);
    };
    auto opt = grid_golden_min(neg_u, 0.0, spec.beta_max, spec.grid_points, 1e-12);
    if (jump) {
        const double cand = beta_half;
        const double v = neg_u(cand);
        if (v < opt.value || (v == opt.value && cand < opt.arg)) opt = {cand, v, opt.grid_step};
        // Exclude the degenerate point itself.
        if (std::abs(opt.arg - beta_half) <= 1e-9 * std::max(1.0, beta_half)) {
            opt.arg = beta_half + 1e-12 * std::max(1.0, beta_half);
            opt.value = -utility(opt.arg, spec, c1);
        }
    }
    return {opt.arg, -opt.value, opt.grid_step};
}

}  // namespace pqagent
