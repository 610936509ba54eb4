#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <random>
#include <vector>

#include "pqagent/dists.hpp"
#include "pqagent/error.hpp"

namespace pqagent {

/// Per-slot completion probability mu0 + ln(1 + y), validated on a declared support.
class FittsRateMap {
public:
    explicit FittsRateMap(double mu0, double support_lo = 0.0, double support_hi = 1.0)
        : mu0_(mu0), lo_(support_lo), hi_(support_hi) {
        if (!(mu0 > 0.0 && mu0 < 1.0)) throw RateOutOfRange("FittsRateMap: mu0 must lie in (0, 1)");
        if (!(support_hi >= support_lo) || support_lo <= -1.0) {
            throw DomainError("FittsRateMap: invalid interest support");
        }
        if (!(raw(lo_) > 0.0) || raw(hi_) > 1.0) {
            throw RateOutOfRange("FittsRateMap: rate leaves (0, 1] on the declared support");
        }
    }

    double mu0() const { return mu0_; }
    double support_lo() const { return lo_; }
    double support_hi() const { return hi_; }
    double min_rate() const { return raw(lo_); }
    double max_rate() const { return raw(hi_); }

    double raw(double y) const { return mu0_ + std::log1p(y); }

private:
    double mu0_;
    double lo_;
    double hi_;
};

inline double fitts_rate(double y, const FittsRateMap& map) {
    const double mu = map.raw(y);
    if (!(mu > 0.0 && mu <= 1.0)) throw RateOutOfRange("fitts_rate: rate outside (0, 1]");
    return mu;
}

struct ServiceMoments {
    double rate = 1.0;      // 1 / E[S]
    double variance = 0.0;  // var(S), in slots^2
};

inline ServiceMoments geometric_moments(double mu) {
    if (!(mu > 0.0 && mu <= 1.0)) throw RateOutOfRange("geometric_moments: rate outside (0, 1]");
    return {mu, (1.0 - mu) / (mu * mu)};
}

/// Service-time pmf over {1, ..., n_max}; p[n-1] = P(S = n).
struct ServicePmf {
    std::vector<double> p;
    double tail_bound = 0.0;  // upper bound on P(S > n_max)

    std::size_t n_max() const { return p.size(); }
    double total_mass() const {
        double s = 0.0;
        for (double v : p) s += v;
        return s;
    }
};

inline ServicePmf geometric_pmf(double mu, std::size_t n_max) {
    if (!(mu > 0.0 && mu <= 1.0)) throw RateOutOfRange("geometric_pmf: rate outside (0, 1]");
    ServicePmf out;
    out.p.resize(n_max);
    double survive = 1.0;
    for (std::size_t n = 0; n < n_max; ++n) {
        out.p[n] = survive * mu;
        survive *= 1.0 - mu;
    }
    out.tail_bound = survive;
    return out;
}

inline constexpr double kPmfTailTolerance = 1e-9;

namespace detail {
// Smallest n with (1 - mu_min)^n below tol.
inline std::size_t geometric_cutoff(double mu_min, double tol) {
    if (mu_min >= 1.0) return 1;
    const double n = std::ceil(std::log(tol) / std::log1p(-mu_min));
    return static_cast<std::size_t>(std::max(1.0, n));
}
}  // namespace detail

/// P(S = n) = E[(1 - mu(Y))^{n-1} mu(Y)] for Y drawn from `interest`.
///
/// With n_max = 0 the cutoff is chosen so that the geometric tail bound
/// (1 - mu_min)^n_max is below 1e-16, far inside the 1e-9 requirement, which keeps
/// second moments accurate. An explicit n_max must still leave a tail below 1e-9.
inline ServicePmf unconditional_service_pmf(const RoutedInterestDensity& interest,
                                            const FittsRateMap& map, std::size_t n_max = 0,
                                            std::size_t nodes = kDefaultNodes) {
    const double lo = interest.atom() ? *interest.atom() : interest.lo();
    const double hi = interest.atom() ? *interest.atom() : interest.hi();
    if (lo < map.support_lo() - 1e-12 || hi > map.support_hi() + 1e-12) {
        throw RateOutOfRange("unconditional_service_pmf: density support exceeds the rate map");
    }
    const double mu_min = fitts_rate(lo, map);
    if (n_max == 0) n_max = detail::geometric_cutoff(mu_min, 1e-16);
    const double tail = std::pow(1.0 - mu_min, static_cast<double>(n_max));
    if (tail > kPmfTailTolerance) {
        throw TruncationError("unconditional_service_pmf: tail mass exceeds tolerance at n_max");
    }

    ServicePmf out;
    out.p.assign(n_max, 0.0);
    out.tail_bound = tail;
    auto accumulate = [&](double y, double weight) {
        const double mu = fitts_rate(y, map);
        double survive = weight;
        for (std::size_t n = 0; n < n_max; ++n) {
            out.p[n] += survive * mu;
            survive *= 1.0 - mu;
            if (survive == 0.0) break;
        }
    };
    if (interest.atom()) {
        accumulate(*interest.atom(), 1.0);
    } else {
        const auto& rule = gauss_legendre(nodes);
        const auto& br = interest.breaks();
        for (std::size_t i = 0; i + 1 < br.size(); ++i) {
            const double a = br[i];
            const double b = br[i + 1];
            if (!(b > a)) continue;
            const double half = 0.5 * (b - a);
            const double mid = 0.5 * (a + b);
            for (std::size_t k = 0; k < rule.size(); ++k) {
                const double y = mid + half * rule.nodes()[k];
                const double w = half * rule.weights()[k] * interest.pdf(y);
                if (w != 0.0) accumulate(y, w);
            }
        }
    }
    const double mass = out.total_mass();
    if (mass < 1.0 - kPmfTailTolerance || mass > 1.0 + 1e-12) {
        throw TruncationError("unconditional_service_pmf: pmf mass outside [1 - 1e-9, 1]");
    }
    return out;
}

inline ServiceMoments service_moments(const ServicePmf& pmf) {
    double m1 = 0.0;
    double m2 = 0.0;
    for (std::size_t i = 0; i < pmf.p.size(); ++i) {
        const double n = static_cast<double>(i + 1);
        m1 += n * pmf.p[i];
        m2 += n * n * pmf.p[i];
    }
    if (!(m1 > 0.0)) throw DomainError("service_moments: empty pmf");
    return {1.0 / m1, std::max(0.0, m2 - m1 * m1)};
}

/// Moments of Fitts-law service for tasks whose agent interest follows `interest`.
inline ServiceMoments fitts_moments(const RoutedInterestDensity& interest, const FittsRateMap& map) {
    return service_moments(unconditional_service_pmf(interest, map));
}

/// Service requirement in slots for per-slot completion probability mu.
inline std::uint32_t draw_service_slots(double mu, Rng& rng) {
    if (mu >= 1.0) return 1;
    std::geometric_distribution<std::uint32_t> geo(mu);
    return geo(rng) + 1;
}

}  // namespace pqagent
