#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "pqagent/error.hpp"
#include "pqagent/normal.hpp"
#include "pqagent/quadrature.hpp"
#include "pqagent/stats.hpp"

namespace pqagent {

// ---------------------------------------------------------------------------
// Jointly Gaussian principal/agent interests and the agent's priority.

struct GaussianPairModel {
    double mean_x = 0.0;
    double mean_y = 0.0;
    double sigma_x = 1.0;
    double sigma_y = 1.0;
    double rho = 0.0;  // alignment between X and Y

    void validate() const {
        if (!(sigma_x > 0.0) || !(sigma_y > 0.0)) {
            throw DomainError("GaussianPairModel: standard deviations must be positive");
        }
        if (!(rho >= -1.0 && rho <= 1.0)) {
            throw DomainError("GaussianPairModel: correlation must lie in [-1, 1]");
        }
    }
};

struct PrioritizationRule {
    double gamma = 1.0;  // weight on the principal's interest

    void validate() const {
        if (!(gamma >= 0.0 && gamma <= 1.0)) {
            throw DomainError("PrioritizationRule: gamma must lie in [0, 1]");
        }
    }
};

/// Variance of gamma*X + (1-gamma)*Y for unit-variance X, Y with correlation rho.
/// Written as (2g - 1)^2 + 2(1 + rho) g (1 - g) so that it stays accurate near (1/2, -1).
inline double mixture_variance(double gamma, double rho) {
    const double d = 2.0 * gamma - 1.0;
    return d * d + 2.0 * (1.0 + rho) * gamma * (1.0 - gamma);
}

/// True at (gamma, rho) = (1/2, -1), where the priority is identically zero.
inline bool is_degenerate(double gamma, double rho) {
    return mixture_variance(gamma, rho) <= std::numeric_limits<double>::min();
}

namespace detail {
inline double mixture_sd_checked(double gamma, double rho) {
    if (!(gamma >= 0.0 && gamma <= 1.0)) throw DomainError("gamma must lie in [0, 1]");
    if (!(rho >= -1.0 && rho <= 1.0)) throw DomainError("rho must lie in [-1, 1]");
    if (is_degenerate(gamma, rho)) {
        throw DegenerateRule("gamma = 1/2 with rho = -1 leaves no priority information");
    }
    return std::sqrt(mixture_variance(gamma, rho));
}
}  // namespace detail

/// Normalized priority the agent assigns to a task with interests (x, y).
///
/// Both interests are standardized with the model's moments first, so the result is
/// a standard Gaussian whenever (X, Y) follows the model.
inline double z_priority(double x, double y, const PrioritizationRule& rule,
                         const GaussianPairModel& model) {
    const double sd = detail::mixture_sd_checked(rule.gamma, model.rho);
    const double sx = (x - model.mean_x) / model.sigma_x;
    const double sy = (y - model.mean_y) / model.sigma_y;
    return (rule.gamma * sx + (1.0 - rule.gamma) * sy) / sd;
}

/// Correlation between the principal's interest and the agent's priority.
inline double rho_xz(double gamma, double rho) {
    const double sd = detail::mixture_sd_checked(gamma, rho);
    return std::clamp((gamma + rho * (1.0 - gamma)) / sd, -1.0, 1.0);
}

inline std::pair<double, double> sample_gaussian_pair(const GaussianPairModel& model, Rng& rng) {
    std::normal_distribution<double> normal;
    const double s = normal(rng);
    const double t = normal(rng);
    const double w = model.rho * s + std::sqrt(std::max(0.0, 1.0 - model.rho * model.rho)) * t;
    return {model.mean_x + model.sigma_x * s, model.mean_y + model.sigma_y * w};
}

// ---------------------------------------------------------------------------
// Agent-interest pairs with uniform marginals.

struct CopulaModel {
    double rho_g = 0.0;  // latent Gaussian correlation between the two agents

    void validate() const {
        if (!(rho_g >= -1.0 && rho_g <= 0.0)) {
            throw DomainError("CopulaModel: rho_g must lie in [-1, 0]");
        }
    }
};

inline std::pair<double, double> sample_copula_pair(const CopulaModel& model, Rng& rng) {
    std::normal_distribution<double> normal;
    const double s = normal(rng);
    const double t = normal(rng);
    const double u1 = normal_cdf(s);
    if (model.rho_g <= -1.0) return {u1, 1.0 - u1};
    const double w = model.rho_g * s + std::sqrt(1.0 - model.rho_g * model.rho_g) * t;
    return {u1, normal_cdf(w)};
}

struct QuantalPerception {
    double q = 1.0;         // interests outside (1-q, q) are perceived correctly
    double p_unsure = 0.5;  // chance an unsure task goes to the first agent

    void validate() const {
        if (!(q >= 0.5 && q <= 1.0)) throw DomainError("QuantalPerception: q must lie in [1/2, 1]");
        if (!(p_unsure >= 0.0 && p_unsure <= 1.0)) {
            throw DomainError("QuantalPerception: p_unsure must lie in [0, 1]");
        }
    }
};

// ---------------------------------------------------------------------------
// Interest density of the tasks that reach an agent.

enum class InterestScenario {
    Uniform,           // no routing information: Z ~ U[0, 1]
    PerfectDiversity,  // Y2 = 1 - Y1, routed to the more interested agent
    Copula,            // Gaussian-copula agents, routed to the more interested agent
    Independent,       // independent agents, routed to the more interested agent
    Quantal,           // perfectly diverse agents seen through an erasure window
};

struct RoutingScenario {
    InterestScenario kind = InterestScenario::Uniform;
    double rho_g = 0.0;
    QuantalPerception perception{};

    static RoutingScenario uniform() { return {}; }
    static RoutingScenario perfect_diversity() {
        return {InterestScenario::PerfectDiversity, -1.0, {}};
    }
    static RoutingScenario copula(double rho_g) { return {InterestScenario::Copula, rho_g, {}}; }
    static RoutingScenario independent() { return {InterestScenario::Independent, 0.0, {}}; }
    static RoutingScenario quantal(double q, double p_unsure = 0.5) {
        return {InterestScenario::Quantal, -1.0, {q, p_unsure}};
    }

    std::string label() const {
        std::ostringstream os;
        switch (kind) {
            case InterestScenario::Uniform: os << "uniform"; break;
            case InterestScenario::PerfectDiversity: os << "perfect-diversity"; break;
            case InterestScenario::Copula: os << "copula(" << rho_g << ")"; break;
            case InterestScenario::Independent: os << "independent"; break;
            case InterestScenario::Quantal: os << "quantal(" << perception.q << ")"; break;
        }
        return os.str();
    }
};

/// Density on a bounded interval, smooth between breakpoints, or a single atom.
class RoutedInterestDensity {
public:
    RoutedInterestDensity(std::vector<double> breaks, std::function<double(double)> pdf,
                          std::string tag)
        : breaks_(std::move(breaks)), pdf_(std::move(pdf)), tag_(std::move(tag)) {
        if (breaks_.size() < 2 || !std::is_sorted(breaks_.begin(), breaks_.end())) {
            throw DomainError("RoutedInterestDensity: breakpoints must be increasing");
        }
    }

    static RoutedInterestDensity point_mass(double y) {
        RoutedInterestDensity d({y, y}, [](double) { return 0.0; }, "atom");
        d.atom_ = y;
        return d;
    }

    static RoutedInterestDensity uniform(double lo, double hi, std::string tag = "uniform") {
        if (!(hi > lo)) throw DomainError("uniform density needs lo < hi");
        const double level = 1.0 / (hi - lo);
        return RoutedInterestDensity(
            {lo, hi}, [=](double z) { return (z >= lo && z <= hi) ? level : 0.0; },
            std::move(tag));
    }

    double lo() const { return breaks_.front(); }
    double hi() const { return breaks_.back(); }
    const std::vector<double>& breaks() const { return breaks_; }
    const std::string& tag() const { return tag_; }
    std::optional<double> atom() const { return atom_; }

    double pdf(double z) const {
        if (atom_ || z < lo() || z > hi()) return 0.0;
        return pdf_(z);
    }

    /// E[g(Z)] by Gauss-Legendre on every smooth piece.
    template <class G>
    double expect(G&& g, std::size_t nodes = kDefaultNodes) const {
        if (atom_) return g(*atom_);
        return integrate_pieces([&](double z) { return g(z) * pdf_(z); },
                                std::span<const double>(breaks_), nodes);
    }

    double mass(std::size_t nodes = kDefaultNodes) const {
        return expect([](double) { return 1.0; }, nodes);
    }

    double mean() const {
        return expect([](double z) { return z; });
    }

    /// P(Z > x).
    double survival(double x, std::size_t nodes = 64) const {
        if (atom_) return *atom_ > x ? 1.0 : 0.0;
        if (x <= lo()) return 1.0;
        if (x >= hi()) return 0.0;
        std::vector<double> pieces{x};
        for (double b : breaks_) {
            if (b > x) pieces.push_back(b);
        }
        return integrate_pieces(pdf_, std::span<const double>(pieces), nodes);
    }

private:
    std::vector<double> breaks_;
    std::function<double(double)> pdf_;
    std::string tag_;
    std::optional<double> atom_;
};

/// Density 2*Phi(k * Phi^{-1}(z)) of the winning agent's interest under a Gaussian
/// copula with correlation rho_g, where k = sqrt((1 - rho_g) / (1 + rho_g)).
inline double copula_winner_pdf(double z, double rho_g) {
    if (z <= 0.0) return 0.0;
    if (z >= 1.0) return 2.0;
    const double k = std::sqrt((1.0 - rho_g) / (1.0 + rho_g));
    return 2.0 * normal_cdf(k * normal_quantile(z));
}

/// Interest density of the tasks routed to agent `agent` (0 or 1).
inline RoutedInterestDensity routed_density(const RoutingScenario& scenario, int agent = 0) {
    if (agent != 0 && agent != 1) throw UnsupportedScenario("routed_density: agent must be 0 or 1");
    switch (scenario.kind) {
        case InterestScenario::Uniform:
            return RoutedInterestDensity::uniform(0.0, 1.0, scenario.label());
        case InterestScenario::PerfectDiversity:
            return RoutedInterestDensity::uniform(0.5, 1.0, scenario.label());
        case InterestScenario::Independent:
        case InterestScenario::Copula: {
            const double rho_g =
                scenario.kind == InterestScenario::Independent ? 0.0 : scenario.rho_g;
            if (!(rho_g >= -1.0 && rho_g <= 0.0)) {
                throw UnsupportedScenario("routed_density: copula correlation must lie in [-1, 0]");
            }
            if (rho_g <= -1.0) return RoutedInterestDensity::uniform(0.5, 1.0, scenario.label());
            return RoutedInterestDensity({0.0, 0.5, 1.0},
                                         [rho_g](double z) { return copula_winner_pdf(z, rho_g); },
                                         scenario.label());
        }
        case InterestScenario::Quantal: {
            const auto& pq = scenario.perception;
            if (!(pq.q >= 0.5 && pq.q <= 1.0) || !(pq.p_unsure >= 0.0 && pq.p_unsure <= 1.0)) {
                throw UnsupportedScenario("routed_density: quantal parameters out of range");
            }
            const double q = pq.q;
            const double p = agent == 0 ? pq.p_unsure : 1.0 - pq.p_unsure;
            const double share = (1.0 - q) + p * (2.0 * q - 1.0);
            if (share <= 0.0) {
                throw UnsupportedScenario("routed_density: agent receives no tasks");
            }
            if (q <= 0.5) return RoutedInterestDensity::uniform(0.5, 1.0, scenario.label());
            const double sure = 1.0 / share;
            const double unsure = p / share;
            return RoutedInterestDensity(
                {0.0, 1.0 - q, q, 1.0},
                [=](double z) {
                    if (z >= q) return sure;
                    if (z > 1.0 - q) return unsure;
                    return 0.0;
                },
                scenario.label());
        }
    }
    throw UnsupportedScenario("routed_density: unknown scenario");
}

}  // namespace pqagent
