#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "pqagent/quadrature.hpp"

using namespace pqagent;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("Gauss-Legendre integrates polynomials of degree 2n-1 exactly", "[quadrature]") {
    for (std::size_t n : {1u, 2u, 5u, 16u, 64u}) {
        const auto& rule = gauss_legendre(n);
        double wsum = 0.0;
        for (double w : rule.weights()) wsum += w;
        CHECK_THAT(wsum, WithinAbs(2.0, 1e-13));
        const int deg = static_cast<int>(2 * n - 1);
        const double got = rule.integrate([&](double x) { return std::pow(x, deg) + std::pow(x, deg - 1); },
                                          0.0, 1.0);
        CHECK_THAT(got, WithinRel(1.0 / (deg + 1) + 1.0 / deg, 1e-12));
    }
}

TEST_CASE("panelled integration converges on smooth and kinked integrands", "[quadrature]") {
    const double g = integrate([](double x) { return std::exp(-0.5 * x * x); }, -8.0, 8.0);
    CHECK_THAT(g, WithinRel(std::sqrt(2.0 * std::numbers::pi), 1e-13));
    const double breaks[] = {-1.0, 0.0, 1.0};
    const double kink = integrate_pieces([](double x) { return std::abs(x); }, breaks, 8);
    CHECK_THAT(kink, WithinAbs(1.0, 1e-14));
    const Accuracy acc{};
    const double a = integrate([](double x) { return std::log1p(x * x); }, 0.0, 3.0, acc);
    const double b = integrate([](double x) { return std::log1p(x * x); }, 0.0, 3.0, acc.refined());
    CHECK_THAT(a, WithinAbs(b, 1e-12));
}
